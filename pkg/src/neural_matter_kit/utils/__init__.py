"""Utility helpers."""

__all__ = ["setup_logging", "setup_file_logging"]

from .logging_utils import setup_file_logging, setup_logging
