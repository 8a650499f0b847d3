"""
Simple Utilities for the sketch-and-solve toolkit
Essential helpers only - logging, hashing, sizes, filesystem
"""
import hashlib
import logging
import os

import numpy as np


LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def setup_logging(level: str = "INFO") -> logging.Logger:
    """
    Console logging for the sketch_mlc package

    Module loggers (sketch_mlc.src.*) inherit the handler installed on the
    package logger; calling this again replaces it.

    Args:
        level: One of LOG_LEVELS (case-insensitive)

    Returns:
        The package logger
    """
    name = str(level).upper()
    if name not in LOG_LEVELS:
        raise ValueError(f"unknown log level {level!r}; choose from {list(LOG_LEVELS)}")
    logger = logging.getLogger("sketch_mlc")
    logger.handlers.clear()
    logger.setLevel(getattr(logging, name))

    # Create console handler
    handler = logging.StreamHandler()
    formatter = logging.Formatter(
        '%(asctime)s - %(levelname)s - %(message)s',
        datefmt='%H:%M:%S'
    )
    handler.setFormatter(formatter)
    logger.addHandler(handler)

    return logger


def ensure_directory(path: str) -> None:
    """Ensure directory exists"""
    if path:
        os.makedirs(path, exist_ok=True)


def ensure_parent_directory(file_path: str) -> None:
    """Ensure the directory holding file_path exists"""
    ensure_directory(os.path.dirname(os.path.abspath(file_path)))


def is_power_of_two(n: int) -> bool:
    """True for 1, 2, 4, 8, ..."""
    return n >= 1 and (n & (n - 1)) == 0


def next_power_of_two(n: int) -> int:
    """
    Smallest power of two that is >= n

    Args:
        n: Positive integer

    Returns:
        2^ceil(log2 n)
    """
    if n < 1:
        raise ValueError(f"next_power_of_two needs n >= 1, got {n}")
    return 1 << (n - 1).bit_length()


def array_sha256(array: np.ndarray) -> str:
    """
    Content hash of an array (shape, dtype and bytes)

    Args:
        array: Array to hash

    Returns:
        Hex digest
    """
    contiguous = np.ascontiguousarray(array)
    digest = hashlib.sha256()
    digest.update(str(contiguous.shape).encode("utf-8"))
    digest.update(str(contiguous.dtype).encode("utf-8"))
    digest.update(contiguous.tobytes())
    return digest.hexdigest()
