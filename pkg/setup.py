#!/usr/bin/env python3
"""
Legacy setup script for MGIG Lab.

Metadata lives in pyproject.toml and setup.cfg; the version is read from
``mgig_lab.config.config`` so there is one place to bump it.
"""

import importlib.util
import os
from pathlib import Path

import setuptools

version = "0.3.0"
config_path = Path(__file__).parent / "src" / "mgig_lab" / "config" / "config.py"
if config_path.exists():
    spec = importlib.util.spec_from_file_location("mgig_lab_config", config_path)
    if spec is not None and spec.loader is not None:
        module = importlib.util.module_from_spec(spec)
        try:
            spec.loader.exec_module(module)
            version = module.get_version_string()
        except Exception as exc:  # fall back to the pinned version
            if os.environ.get("MGIG_LAB_DEBUG") == "1":
                print(f"⚠️ Could not read version from config: {exc}")

setuptools.setup(version=version)
