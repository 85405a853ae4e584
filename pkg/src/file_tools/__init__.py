"""Artifact file helpers."""

from src.file_tools.file_operations import (
    format_float,
    read_file,
    save_csv,
    save_file,
    save_json,
)

__all__ = [
    "format_float",
    "read_file",
    "save_csv",
    "save_file",
    "save_json",
]
