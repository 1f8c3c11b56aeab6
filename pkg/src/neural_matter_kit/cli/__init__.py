"""Command-line interface for the Neural Matter Kit."""

__all__ = ["main", "build_parser"]

from .commands import build_parser, main
