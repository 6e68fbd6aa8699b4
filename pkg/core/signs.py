# core/signs.py

import os
from typing import Any, Dict, List, Union

import yaml

from core.config import ROOT, settings
from core.exceptions import SignConventionError
from core.logger import get_surgery_logger

logger = get_surgery_logger("surgerykit.signs", "SIGNS")

DEFAULT_MANIFEST = str(ROOT / settings.manifest.path)


class SignManifest:
    """
    Global registry of resolved sign conventions. Entries are read from the
    shipped manifest; code asks for a sign by name and never hardcodes it twice.
    """
    _signs: Dict[str, Dict[str, Any]] = {}
    _version: str = ""

    @classmethod
    def load_manifest(cls, path: str = DEFAULT_MANIFEST):
        """Read the YAML manifest; unknown layouts raise SignConventionError."""
        if not os.path.exists(path):
            raise SignConventionError(f"sign manifest not found: {path}")
        with open(path, encoding="utf-8") as f:
            raw = yaml.safe_load(f) or {}
        signs = raw.get("signs")
        if not isinstance(signs, dict):
            raise SignConventionError(f"sign manifest {path} has no 'signs' mapping")
        for name, entry in signs.items():
            if not isinstance(entry, dict) or "value" not in entry:
                raise SignConventionError(f"manifest entry '{name}' lacks a value")
            _check_value(name, entry["value"])
        cls._signs = signs
        cls._version = str(raw.get("version", ""))
        if cls._version != settings.manifest.version:
            logger.warning(f"Sign manifest {path} has version {cls._version}, "
                           f"config.yaml expects {settings.manifest.version}")
        logger.debug(f"Loaded {len(signs)} sign conventions, manifest version {cls._version}")

    @classmethod
    def list(cls) -> Dict[str, Union[int, List[int]]]:
        """Return name -> value for every resolved sign."""
        return {name: entry["value"] for name, entry in cls._signs.items()}

    @classmethod
    def entries(cls) -> Dict[str, Dict[str, Any]]:
        return {name: dict(entry) for name, entry in cls._signs.items()}

    @classmethod
    def enforce(cls, name: str):
        """Raise SignConventionError when the sign is not recorded."""
        if name not in cls._signs:
            raise SignConventionError(f"Sign convention not recognized: {name}")

    @classmethod
    def value(cls, name: str) -> Union[int, List[int]]:
        cls.enforce(name)
        return cls._signs[name]["value"]

    @classmethod
    def sign(cls, name: str) -> int:
        v = cls.value(name)
        if isinstance(v, list):
            raise SignConventionError(f"'{name}' is a sign vector, not a single sign")
        return int(v)

    @classmethod
    def formula(cls, name: str) -> str:
        cls.enforce(name)
        return cls._signs[name].get("formula", "")

    @classmethod
    def version(cls) -> str:
        return cls._version


def _check_value(name: str, value: Any):
    values = value if isinstance(value, list) else [value]
    if not all(isinstance(v, int) and v in (-1, 0, 1) for v in values):
        raise SignConventionError(f"manifest entry '{name}' has a non-sign value {value!r}")


# Load the shipped manifest at import time
SignManifest.load_manifest()
