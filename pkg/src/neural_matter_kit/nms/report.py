#!/usr/bin/env python
"""
Neural-Matter State (NMS) reports for one layer's kernel.

A report holds the neurons projected to 2-D (PCA, or an embedding supplied
by the caller), a Gaussian KDE density grid over the padded bounding box,
the pairwise yat similarity matrix, and the neuron pairs flagged as
collapsed: similarity > kappa × median off-diagonal similarity, and above
the round-off floor of the pair so that orthogonal rows never collapse.
"""

import logging
from pathlib import Path
from typing import Annotated, Any, List, Optional, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, Field, PlainSerializer, PlainValidator
from scipy.stats import gaussian_kde

from neural_matter_kit.errors import (
    DatasetIOError,
    FormatError,
    InsufficientDataError,
    ShapeError,
)
from neural_matter_kit.linalg.matrix import as_matrix
from neural_matter_kit.linalg.pca import pca_2d
from neural_matter_kit.yat.products import DEFAULT_EPSILON, pairwise_yat_matrix

logger = logging.getLogger(__name__)

DEFAULT_KAPPA = 10.0
DEFAULT_GRID = 64
BOX_PADDING = 0.1
ROUNDOFF_SLACK = 8.0


def _to_array(value: Any) -> np.ndarray:
    return np.asarray(value, dtype=np.float64)


NDArrayField = Annotated[
    np.ndarray,
    PlainValidator(_to_array),
    PlainSerializer(lambda a: a.tolist(), return_type=list),
]


class CollapsePair(BaseModel):
    i: int
    j: int
    similarity: float


class NMSReport(BaseModel):
    """Plot-ready state of one layer."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    layer_name: str
    projection: str = Field("pca", description="'pca' or 'external'")
    points: NDArrayField = Field(..., description="m×2 neuron coordinates")
    variance_explained: Tuple[float, float] = (0.0, 0.0)
    grid_x: NDArrayField = Field(..., description="Density grid column coordinates")
    grid_y: NDArrayField = Field(..., description="Density grid row coordinates")
    density_grid: NDArrayField = Field(
        ..., description="g×g KDE values; [i, j] sits at (grid_x[j], grid_y[i])"
    )
    similarity: NDArrayField = Field(..., description="m×m pairwise yat similarity")
    median_similarity: float = Field(..., description="Median off-diagonal similarity")
    collapse_pairs: List[CollapsePair] = Field(default_factory=list)
    kappa: float = DEFAULT_KAPPA
    epsilon: float = DEFAULT_EPSILON

    @property
    def neurons(self) -> int:
        return int(self.points.shape[0])

    def approx_equal(self, other: "NMSReport", tol: float = 1e-12) -> bool:
        """Field-wise comparison with an absolute-or-relative float tolerance."""
        if (self.layer_name, self.projection, self.kappa, self.epsilon) != (
            other.layer_name,
            other.projection,
            other.kappa,
            other.epsilon,
        ):
            return False
        mine_pairs = [(p.i, p.j) for p in self.collapse_pairs]
        if mine_pairs != [(p.i, p.j) for p in other.collapse_pairs]:
            return False
        for name in ("points", "grid_x", "grid_y", "density_grid", "similarity"):
            mine, theirs = getattr(self, name), getattr(other, name)
            if mine.shape != theirs.shape:
                return False
            if not np.allclose(mine, theirs, rtol=tol, atol=tol):
                return False
        return bool(
            np.allclose(
                self.variance_explained, other.variance_explained, rtol=tol, atol=tol
            )
            and np.isclose(
                self.median_similarity, other.median_similarity, rtol=tol, atol=tol
            )
        )


def _padded_axis(values: np.ndarray, size: int) -> np.ndarray:
    low, high = float(values.min()), float(values.max())
    span = high - low
    pad = BOX_PADDING * span if span > 0.0 else 0.5
    return np.linspace(low - pad, high + pad, size)


def density_grid(
    points: np.ndarray, size: int = DEFAULT_GRID
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Gaussian KDE (Scott bandwidth) on a size×size grid over the padded bounding box.

    Returns:
        Tuple of (grid_x, grid_y, density); the density is all zeros when the
        point cloud is too degenerate for a KDE
    """
    grid_x = _padded_axis(points[:, 0], size)
    grid_y = _padded_axis(points[:, 1], size)
    xs, ys = np.meshgrid(grid_x, grid_y)
    try:
        kde = gaussian_kde(points.T, bw_method="scott")
        density = kde(np.vstack([xs.ravel(), ys.ravel()])).reshape(size, size)
    except (np.linalg.LinAlgError, ValueError) as e:
        logger.warning(
            f"KDE unavailable for {points.shape[0]} degenerate points ({e}); "
            "using a zero density grid"
        )
        density = np.zeros((size, size))
    return grid_x, grid_y, density


def similarity_noise_floor(
    kernel: ArrayLike, epsilon: float = DEFAULT_EPSILON
) -> np.ndarray:
    """
    Largest yat similarity each pair of rows can show from round-off alone.

    A dot product of two length-n rows carries an absolute error of about
    n × machine-eps × ‖w_i‖‖w_j‖; the floor is that error squared over the
    pair's stabilised squared distance.
    """
    weights = as_matrix(kernel, "kernel")
    n = weights.shape[1]
    sq = np.einsum("ij,ij->i", weights, weights)
    norms = np.sqrt(sq)
    dot_error = ROUNDOFF_SLACK * n * np.finfo(np.float64).eps * np.outer(norms, norms)
    dist = np.clip(sq[:, None] + sq[None, :] - 2.0 * (weights @ weights.T), 0.0, None)
    return dot_error**2 / (dist + epsilon)


def collapse_pairs(
    similarity: np.ndarray,
    kappa: float,
    noise_floor: Optional[np.ndarray] = None,
) -> Tuple[List[CollapsePair], float]:
    """
    Flag pairs i < j with similarity > max(kappa × median, noise floor of the pair).

    Args:
        similarity: m×m pairwise similarity
        kappa: Multiplier of the median off-diagonal similarity
        noise_floor: Optional m×m similarities treated as zero
            (see similarity_noise_floor)

    Returns:
        Tuple of (flagged pairs in row-major order, the median)
    """
    m = similarity.shape[0]
    rows, cols = np.triu_indices(m, k=1)
    upper = similarity[rows, cols]
    median = float(np.median(upper))
    floor = noise_floor[rows, cols] if noise_floor is not None else np.zeros_like(upper)
    threshold = np.maximum(kappa * median, floor)
    flagged = [
        CollapsePair(i=int(i), j=int(j), similarity=float(value))
        for i, j, value, limit in zip(rows, cols, upper, threshold)
        if value > limit
    ]
    return flagged, median


def build_nms(
    kernel: ArrayLike,
    epsilon: float = DEFAULT_EPSILON,
    kappa: float = DEFAULT_KAPPA,
    grid: int = DEFAULT_GRID,
    layer_name: str = "layer",
    points: Optional[ArrayLike] = None,
) -> NMSReport:
    """
    Build the NMS report of a kernel.

    Args:
        kernel: m×n kernel, one neuron per row
        epsilon: Stabiliser of the similarity
        kappa: Collapse threshold multiplier
        grid: Density grid size per axis
        layer_name: Name recorded in the report
        points: Optional m×2 embedding used instead of PCA

    Returns:
        NMSReport

    Raises:
        InsufficientDataError: Fewer than 2 neurons
        ShapeError: points is not m×2
    """
    weights = as_matrix(kernel, "kernel")
    m = weights.shape[0]
    if m < 2:
        raise InsufficientDataError(f"NMS report needs at least 2 neurons, got {m}")
    if points is None:
        coords, explained = pca_2d(weights)
        projection = "pca"
    else:
        coords = as_matrix(points, "points")
        if coords.shape != (m, 2):
            raise ShapeError(f"points must be {m}x2, got {coords.shape}")
        explained = (0.0, 0.0)
        projection = "external"
    grid_x, grid_y, density = density_grid(coords, grid)
    similarity = pairwise_yat_matrix(weights, epsilon)
    floor = similarity_noise_floor(weights, epsilon)
    flagged, median = collapse_pairs(similarity, kappa, floor)
    logger.info(
        f"NMS report for {layer_name}: {m} neurons, {len(flagged)} collapsed pairs"
    )
    return NMSReport(
        layer_name=layer_name,
        projection=projection,
        points=coords,
        variance_explained=explained,
        grid_x=grid_x,
        grid_y=grid_y,
        density_grid=density,
        similarity=similarity,
        median_similarity=median,
        collapse_pairs=flagged,
        kappa=kappa,
        epsilon=epsilon,
    )


def max_offdiagonal_similarity(report: NMSReport) -> float:
    m = report.neurons
    rows, cols = np.triu_indices(m, k=1)
    return float(report.similarity[rows, cols].max())


def load_nms_json(path: Union[str, Path]) -> NMSReport:
    """
    Read a report written by export_nms.

    Raises:
        DatasetIOError: Unreadable file
        FormatError: Content is not a valid report
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise DatasetIOError(f"Cannot read NMS report {path}: {e}") from e
    try:
        return NMSReport.model_validate_json(text)
    except ValueError as e:
        raise FormatError(f"Invalid NMS report {path}: {e}") from e
