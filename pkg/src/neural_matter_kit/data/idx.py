#!/usr/bin/env python
"""
IDX container reader and writer (the MNIST distribution format).

Layout: big-endian 32-bit magic (0x00000800 | ndim for unsigned bytes),
ndim big-endian 32-bit sizes, then the raw unsigned bytes in row-major
order. Image pixels are scaled by 1/255 on load.
"""

import logging
import struct
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from neural_matter_kit.data.dataset import Dataset
from neural_matter_kit.errors import ConsistencyError, DatasetIOError, FormatError

logger = logging.getLogger(__name__)

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801
PIXEL_SCALE = 255.0


def _read_bytes(path: Path) -> bytes:
    try:
        return path.read_bytes()
    except OSError as e:
        raise DatasetIOError(f"Cannot read IDX file {path}: {e}") from e


def read_idx(path: Union[str, Path], magic: int) -> np.ndarray:
    """
    Read one IDX file of unsigned bytes.

    Args:
        path: File path
        magic: Expected magic number (fixes the number of dimensions)

    Returns:
        uint8 array with the header's dimensions

    Raises:
        DatasetIOError: If the file cannot be read or is truncated
        FormatError: If the magic number differs
    """
    path = Path(path)
    data = _read_bytes(path)
    if len(data) < 4:
        raise DatasetIOError(f"IDX file {path} is truncated: no header")
    (found,) = struct.unpack(">I", data[:4])
    if found != magic:
        raise FormatError(
            f"IDX file {path} has magic 0x{found:08x}, expected 0x{magic:08x}"
        )
    ndim = magic & 0xFF
    header_size = 4 + 4 * ndim
    if len(data) < header_size:
        raise DatasetIOError(f"IDX file {path} is truncated inside the header")
    dims = struct.unpack(f">{ndim}I", data[4:header_size])
    expected = int(np.prod(dims, dtype=np.int64))
    payload = len(data) - header_size
    if payload < expected:
        raise DatasetIOError(
            f"IDX file {path} is truncated: {payload} of {expected} payload bytes"
        )
    if payload > expected:
        logger.warning(
            f"IDX file {path} has {payload - expected} trailing bytes; ignoring them"
        )
    values = np.frombuffer(data, dtype=np.uint8, count=expected, offset=header_size)
    return values.reshape(dims)


def write_idx(path: Union[str, Path], values: np.ndarray, magic: int) -> None:
    """Write a uint8 array as IDX with the given magic."""
    array = np.ascontiguousarray(values, dtype=np.uint8)
    if array.ndim != magic & 0xFF:
        raise FormatError(
            f"magic 0x{magic:08x} needs {magic & 0xFF} dimensions, got {array.ndim}"
        )
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = struct.pack(f">I{array.ndim}I", magic, *array.shape)
    path.write_bytes(header + array.tobytes())


def load_idx(
    images_path: Union[str, Path],
    labels_path: Union[str, Path],
    num_classes: Optional[int] = None,
) -> Dataset:
    """
    Load an image/label IDX pair.

    Args:
        images_path: File with magic 0x00000803 (count, rows, cols)
        labels_path: File with magic 0x00000801 (count)
        num_classes: Class count; max(label) + 1 when omitted

    Returns:
        Dataset with k×(H·W) features in [0, 1] and image_shape (H, W)

    Raises:
        FormatError: Wrong magic number
        DatasetIOError: Missing or truncated file
        ConsistencyError: Image and label counts differ
    """
    images = read_idx(images_path, IMAGES_MAGIC)
    labels = read_idx(labels_path, LABELS_MAGIC)
    if images.shape[0] != labels.shape[0]:
        raise ConsistencyError(
            f"{images_path} holds {images.shape[0]} images but "
            f"{labels_path} holds {labels.shape[0]} labels"
        )
    count, rows, cols = images.shape
    features = images.reshape(count, rows * cols).astype(np.float64) / PIXEL_SCALE
    dataset = Dataset.from_arrays(
        features, labels.astype(np.int64), num_classes, (rows, cols)
    )
    logger.info(f"Loaded {count} samples of {rows}x{cols} from {images_path}")
    return dataset


def save_idx(
    dataset: Dataset,
    images_path: Union[str, Path],
    labels_path: Union[str, Path],
    image_shape: Optional[Tuple[int, int]] = None,
) -> None:
    """
    Write a dataset as an IDX pair, mapping features in [0, 1] back to bytes.

    Args:
        dataset: Dataset with features in [0, 1] and labels below 256
        images_path: Output images file
        labels_path: Output labels file
        image_shape: (H, W); defaults to dataset.image_shape, then to (1, n)

    Raises:
        FormatError: If features leave [0, 1], labels do not fit a byte, or the
            shape is not 2-D
    """
    shape = image_shape or dataset.image_shape or (1, dataset.dim)
    if len(shape) != 2:
        raise FormatError(f"IDX images need a 2-D image shape, got {shape}")
    features = dataset.features
    if features.size and (features.min() < 0.0 or features.max() > 1.0):
        raise FormatError("IDX images need features in [0, 1]")
    if dataset.labels.size and dataset.labels.max() > 255:
        raise FormatError("IDX labels must fit in one byte")
    pixels = np.rint(features * PIXEL_SCALE).reshape((len(dataset),) + tuple(shape))
    write_idx(images_path, pixels, IMAGES_MAGIC)
    write_idx(labels_path, dataset.labels, LABELS_MAGIC)
    logger.info(f"Wrote {len(dataset)} samples to {images_path} and {labels_path}")
