# core/config.py

from typing import List, Union
from pydantic_settings import BaseSettings
from pydantic import ConfigDict, Field, ValidationError
import os
import yaml
from pathlib import Path
import logging
from logging.handlers import MemoryHandler

logger = logging.getLogger("surgerykit.config")
logger.setLevel(logging.DEBUG)

ROOT = Path(__file__).resolve().parent.parent

# held until the settings name the log file
_pending = MemoryHandler(capacity=1000, flushLevel=logging.CRITICAL + 1)
logger.addHandler(_pending)


class VerificationConfig(BaseSettings):
    seed: int = 20240611
    count: int = 20
    max_rank: int = 1
    coefficient_bound: int = 2


class ManifestConfig(BaseSettings):
    path: str = "data/sign_manifest.yaml"
    version: str = "1.0"
    battery_size: int = 24


class LoggingConfig(BaseSettings):
    log_dir: str = "logs"
    file_name: str = "surgerykit.log"
    level: str = "INFO"


class ReportConfig(BaseSettings):
    machine_format: str = "yaml"
    include_timing: bool = False
    max_failures_listed: int = 10


class ScenarioConfig(BaseSettings):
    extension: str = ".skn"
    search_paths: List[str] = ["data/scenarios"]


class Settings(BaseSettings):
    model_config = ConfigDict(extra='ignore', env_file=".env", case_sensitive=False)

    app_name: str = "surgerykit"
    version: str = "0.1.0"
    debug: bool = False
    environment: str = "development"

    verification: VerificationConfig = Field(default_factory=VerificationConfig)
    manifest: ManifestConfig = Field(default_factory=ManifestConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)
    report: ReportConfig = Field(default_factory=ReportConfig)
    scenarios: ScenarioConfig = Field(default_factory=ScenarioConfig)

    @classmethod
    def load_from_yaml(cls, yaml_path: Union[str, Path]) -> "Settings":
        """Settings from a YAML file; relative paths fall back to the repository root."""
        path = Path(yaml_path)
        if not path.is_absolute() and not path.exists():
            path = ROOT / path
        if not path.exists():
            logger.warning(f"No {yaml_path} found, running on defaults")
            return cls()

        try:
            raw = yaml.safe_load(path.read_text(encoding="utf-8"))
        except yaml.YAMLError as e:
            logger.error(f"{path} is not valid YAML ({e}); running on defaults")
            return cls()
        if not raw:
            logger.warning(f"{path} is empty, running on defaults")
            return cls()

        try:
            loaded = cls.model_validate(raw)
        except ValidationError as e:
            logger.error(f"{path} does not validate: {e.error_count()} errors; running on defaults")
            return cls()
        logger.info(f"Settings read from {path} (environment {loaded.environment})")
        return loaded


def route_config_log(config: LoggingConfig) -> logging.FileHandler:
    """Point the config logger at the configured log file, replaying whatever was logged before."""
    os.makedirs(config.log_dir, exist_ok=True)
    fh = logging.FileHandler(os.path.join(config.log_dir, config.file_name))
    fh.setFormatter(logging.Formatter("%(asctime)s | CONFIG | %(levelname)s | %(message)s"))
    for h in list(logger.handlers):
        if h is _pending:
            _pending.setTarget(fh)
            _pending.flush()
        logger.removeHandler(h)
        h.close()
    logger.addHandler(fh)
    return fh


settings = Settings.load_from_yaml("config.yaml")
route_config_log(settings.logging)
