#!/usr/bin/env python3
"""Settings loading and the config logger."""

import logging
import os

from core.config import LoggingConfig, Settings, route_config_log, settings

CONFIG_LOGGER = logging.getLogger("surgerykit.config")


def test_config_log_uses_the_logging_settings():
    (handler,) = CONFIG_LOGGER.handlers
    expected = os.path.abspath(os.path.join(settings.logging.log_dir, settings.logging.file_name))
    assert handler.baseFilename == expected


def test_config_log_can_be_moved(tmp_path):
    target = tmp_path / "elsewhere"
    fh = route_config_log(LoggingConfig(log_dir=str(target), file_name="config.log"))
    try:
        CONFIG_LOGGER.info("moved")
        fh.flush()
        assert CONFIG_LOGGER.handlers == [fh]
        assert "| CONFIG | INFO | moved" in (target / "config.log").read_text(encoding="utf-8")
    finally:
        route_config_log(settings.logging)


def test_missing_yaml_falls_back_to_defaults(tmp_path):
    loaded = Settings.load_from_yaml(tmp_path / "missing.yaml")
    assert loaded.logging == LoggingConfig()
    assert loaded.verification.seed == 20240611
