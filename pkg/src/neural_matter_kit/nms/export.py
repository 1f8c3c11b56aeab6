#!/usr/bin/env python
"""
Export NMS reports as CSV, JSON and SVG files with fixed names.
"""

import csv
import logging
from pathlib import Path
from typing import Iterable, List, Union

import matplotlib

matplotlib.use("Agg")

import numpy as np
from matplotlib import rc_context
from matplotlib.colors import LogNorm, Normalize
from matplotlib.figure import Figure

from neural_matter_kit.errors import DatasetIOError, DomainError
from neural_matter_kit.nms.report import NMSReport

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json", "svg")
POINTS_FILE = "points.csv"
SIMILARITY_FILE = "similarity.csv"
COLLAPSE_FILE = "collapse.csv"
JSON_FILE = "nms.json"
SVG_FILE = "nms.svg"
SCATTER_GID = "neurons"
SVG_HASH_SALT = "neural-matter-kit"


def _write_csv(report: NMSReport, directory: Path) -> List[Path]:
    points_path = directory / POINTS_FILE
    with open(points_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["index", "x", "y"])
        for index, (x, y) in enumerate(report.points):
            writer.writerow([index, repr(float(x)), repr(float(y))])

    similarity_path = directory / SIMILARITY_FILE
    with open(similarity_path, "w", newline="") as f:
        writer = csv.writer(f)
        for row in report.similarity:
            writer.writerow([repr(float(value)) for value in row])

    collapse_path = directory / COLLAPSE_FILE
    with open(collapse_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["i", "j", "similarity"])
        for pair in report.collapse_pairs:
            writer.writerow([pair.i, pair.j, repr(pair.similarity)])
    return [points_path, similarity_path, collapse_path]


def _write_json(report: NMSReport, directory: Path) -> List[Path]:
    path = directory / JSON_FILE
    path.write_text(report.model_dump_json(indent=2))
    return [path]


def render_svg(report: NMSReport, path: Path) -> Path:
    """
    Draw the scatter (with density contours and collapsed pairs joined) next
    to the similarity heatmap on a monochrome log ramp.
    """
    with rc_context({"svg.hashsalt": SVG_HASH_SALT, "svg.fonttype": "none"}):
        fig = Figure(figsize=(10, 4.5))
        scatter_ax, heat_ax = fig.subplots(1, 2)

        if np.any(report.density_grid > 0.0):
            scatter_ax.contourf(
                report.grid_x,
                report.grid_y,
                report.density_grid,
                levels=8,
                cmap="Greys",
                alpha=0.5,
            )
        for pair in report.collapse_pairs:
            xs = [report.points[pair.i, 0], report.points[pair.j, 0]]
            ys = [report.points[pair.i, 1], report.points[pair.j, 1]]
            scatter_ax.plot(xs, ys, color="crimson", linewidth=1.0)
        markers = scatter_ax.scatter(
            report.points[:, 0], report.points[:, 1], s=18, color="black"
        )
        markers.set_gid(SCATTER_GID)
        ve1, ve2 = report.variance_explained
        scatter_ax.set_title(f"{report.layer_name}: {report.neurons} neurons")
        scatter_ax.set_xlabel(f"PC1 ({ve1:.1%})" if report.projection == "pca" else "x")
        scatter_ax.set_ylabel(f"PC2 ({ve2:.1%})" if report.projection == "pca" else "y")

        positive = report.similarity[report.similarity > 0.0]
        if positive.size and positive.max() > positive.min():
            norm = LogNorm(vmin=float(positive.min()), vmax=float(positive.max()))
            values = np.ma.masked_less_equal(report.similarity, 0.0)
        else:
            norm = Normalize()
            values = report.similarity
        image = heat_ax.imshow(values, cmap="Greys", norm=norm, interpolation="nearest")
        heat_ax.set_title("pairwise E-similarity")
        fig.colorbar(image, ax=heat_ax)
        fig.savefig(path, format="svg", metadata={"Date": None})
    return path


def export_nms(
    report: NMSReport, directory: Union[str, Path], formats: Iterable[str] = FORMATS
) -> List[Path]:
    """
    Write report artifacts into directory.

    Args:
        report: NMS report
        directory: Output directory, created if missing
        formats: Any of "csv", "json", "svg"

    Returns:
        Written paths in format order

    Raises:
        DomainError: Unknown format
        DatasetIOError: A file could not be written
    """
    requested = set(formats)
    unknown = requested - set(FORMATS)
    if unknown:
        raise DomainError(
            f"unknown export formats {sorted(unknown)}, "
            f"expected a subset of {list(FORMATS)}"
        )
    directory = Path(directory)
    written: List[Path] = []
    try:
        directory.mkdir(parents=True, exist_ok=True)
        if "csv" in requested:
            written.extend(_write_csv(report, directory))
        if "json" in requested:
            written.extend(_write_json(report, directory))
        if "svg" in requested:
            written.append(render_svg(report, directory / SVG_FILE))
    except OSError as e:
        raise DatasetIOError(f"Cannot write NMS artifacts to {directory}: {e}") from e
    logger.info(f"Exported {len(written)} NMS files to {directory}")
    return written
