"""Atomic artifact writing: text, JSON and CSV outputs of a run."""

import csv
import io
import json
import logging
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)


def format_float(value: float) -> str:
    """Shortest round-tripping text for a float, stable across runs."""
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, ".17g")


def _jsonable(value: Any) -> Any:
    # numpy containers and scalars become plain Python values
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        return value.item()
    # JSON has no inf or nan literals
    if isinstance(value, float) and not math.isfinite(value):
        return format_float(value)
    if isinstance(value, Mapping):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, Path):
        return str(value)
    return value


def read_file(abs_path: Path) -> str:
    """
    Read a UTF-8 text file.

    Args:
        abs_path: Absolute path of the file.

    Returns:
        The file contents.

    Raises:
        FileNotFoundError: If the file does not exist.
        IsADirectoryError: If the path points to a directory.
        ValueError: If the file is not valid UTF-8.
    """
    # Check that the path exists and is a regular file
    if not abs_path.exists():
        logger.error(f"File not found: {abs_path}")
        raise FileNotFoundError(f"File '{abs_path}' does not exist")

    if not abs_path.is_file():
        logger.error(f"Path is not a file: {abs_path}")
        raise IsADirectoryError(f"Path '{abs_path}' is not a file")

    try:
        logger.debug(f"Reading file: {abs_path}")
        with open(abs_path, "r", encoding="utf-8") as handle:
            content = handle.read()
        logger.debug(f"Successfully read {len(content)} bytes from {abs_path}")
        return content
    except UnicodeDecodeError as e:
        logger.error(f"Unicode decode error while reading {abs_path}: {str(e)}")
        raise ValueError(
            f"File '{abs_path}' contains invalid characters. Ensure it's a valid text file."
        ) from e


def save_file(abs_path: Path, content: str) -> Path:
    """
    Write content to a file atomically (temporary file + rename).

    Args:
        abs_path: Absolute path of the target file.
        content: Text to write.

    Returns:
        The path written.

    Raises:
        ValueError: If content is not a string.
        PermissionError: If the directory or file is not writable.
    """
    # Validate content type
    if not isinstance(content, str):
        raise ValueError(f"Content must be a string, got {type(content)}")


    # Create the parent directory if needed
    parent_dir = abs_path.parent
    if not parent_dir.exists():
        logger.info(f"Creating directory: {parent_dir}")
        parent_dir.mkdir(parents=True, exist_ok=True)

    # Write to a temporary file in the same directory, then rename over the target
    temp_path = None
    try:
        with tempfile.NamedTemporaryFile(
            mode="w", encoding="utf-8", dir=str(parent_dir), delete=False, newline=""
        ) as handle:
            temp_path = Path(handle.name)
            logger.debug(f"Writing to temporary file '{temp_path}' for target '{abs_path}'")
            handle.write(content)

        # Atomic on POSIX and Windows
        os.replace(str(temp_path), str(abs_path))
        temp_path = None
        logger.debug(f"Successfully wrote {len(content)} bytes to {abs_path}")
        return abs_path
    except Exception as e:
        logger.error(f"Error writing to file {abs_path}: {str(e)}")
        raise
    finally:
        if temp_path is not None and temp_path.exists():
            logger.warning(f"Cleaning up leftover temporary file: {temp_path}")
            try:
                temp_path.unlink()
            except OSError as cleanup_e:
                logger.error(f"Failed to clean up temporary file {temp_path}: {cleanup_e}")


def save_json(abs_path: Path, data: Any) -> Path:
    """Write a JSON document (numpy values converted, keys sorted)."""
    text = json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n"
    return save_file(abs_path, text)


def save_csv(
    abs_path: Path,
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    provenance: Optional[Mapping[str, Any]] = None,
) -> Path:
    """Write a CSV table; floats use the round-tripping format_float text.

    Args:
        abs_path: Absolute path of the target file.
        columns: Header row.
        rows: Data rows.
        provenance: Optional run metadata, written as ``# key=value`` lines
            ahead of the header row.

    Returns:
        The path written.
    """
    buffer = io.StringIO()
    # Provenance lines, then the header row
    for key, value in (provenance or {}).items():
        buffer.write(f"# {key}={value}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    count = 0
    for row in rows:
        writer.writerow(
            [format_float(float(v)) if isinstance(v, (float, np.floating)) else v for v in row]
        )
        count += 1
    logger.debug(f"Prepared {count} CSV rows for {abs_path}")
    return save_file(abs_path, buffer.getvalue())
