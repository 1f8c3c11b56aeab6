#!/usr/bin/env python
"""
Datasets: the value type, IDX files and generated tasks.
"""

__all__ = [
    "Dataset",
    "load_idx",
    "save_idx",
    "synthetic_blobs",
    "xor_dataset",
]

from .dataset import Dataset
from .idx import load_idx, save_idx
from .synthetic import synthetic_blobs, xor_dataset
