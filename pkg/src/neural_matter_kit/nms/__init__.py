#!/usr/bin/env python
"""
Neural-Matter State reports and their export.
"""

__all__ = [
    "CollapsePair",
    "NMSReport",
    "build_nms",
    "export_nms",
    "load_nms_json",
    "max_offdiagonal_similarity",
    "similarity_noise_floor",
]

from .report import (
    CollapsePair,
    NMSReport,
    build_nms,
    load_nms_json,
    max_offdiagonal_similarity,
    similarity_noise_floor,
)
from .export import export_nms
