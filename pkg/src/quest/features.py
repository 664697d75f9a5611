"""Region-grid histograms over code maps and the feature-matrix CSV format."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .descriptor import CodeMap
from .errors import ImageSizeError, SchemaError


def split_axis(length: int, parts: int) -> list[int]:
    """Segment lengths; the first ``length % parts`` segments get the extra pixel."""
    if parts < 1:
        raise ValueError("parts must be >= 1")
    if length < parts:
        raise ImageSizeError(f"cannot split {length} pixels into {parts} parts")
    q, r = divmod(length, parts)
    return [q + 1] * r + [q] * (parts - r)


@dataclass(frozen=True)
class RegionGrid:
    rows: int = 8
    cols: int = 8

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("grid dimensions must be >= 1")

    def boundaries(self, height: int, width: int):
        """Per-axis offsets ``(row_edges, col_edges)``, each starting at 0."""
        rows = np.concatenate([[0], np.cumsum(split_axis(height, self.rows))])
        cols = np.concatenate([[0], np.cumsum(split_axis(width, self.cols))])
        return rows.tolist(), cols.tolist()

    def regions(self, height: int, width: int):
        """Yield ``(top, left, bottom, right)`` extents in row-major order."""
        r_edges, c_edges = self.boundaries(height, width)
        for i in range(self.rows):
            for j in range(self.cols):
                yield r_edges[i], c_edges[j], r_edges[i + 1], c_edges[j + 1]


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    descriptor_id: str
    grid: tuple[int, int]
    code_range: int

    def blocks(self) -> np.ndarray:
        return self.values.reshape(-1, self.code_range)

    def __len__(self):
        return len(self.values)


def region_histogram(cmap: CodeMap, region) -> np.ndarray:
    top, left, bottom, right = region
    if bottom <= top or right <= left:
        raise ValueError(f"empty region {region}")
    if top < 0 or left < 0 or bottom > cmap.height or right > cmap.width:
        raise ValueError(f"region {region} outside {cmap.width}x{cmap.height} code map")
    block = cmap.codes[top:bottom, left:right]
    return np.bincount(block.ravel(), minlength=cmap.code_range).astype(np.int64)


def extract_feature_vector(cmap: CodeMap, grid: RegionGrid | None = None) -> FeatureVector:
    grid = grid or RegionGrid()
    if cmap.height < grid.rows or cmap.width < grid.cols:
        raise ImageSizeError(
            f"{cmap.width}x{cmap.height} code map is smaller than a {grid.cols}x{grid.rows} grid")
    parts = []
    for region in grid.regions(cmap.height, cmap.width):
        hist = region_histogram(cmap, region)
        parts.append(hist / hist.sum())
    return FeatureVector(np.concatenate(parts), cmap.descriptor_id, (grid.rows, grid.cols),
                         cmap.code_range)


@dataclass
class FeatureTable:
    """Labelled feature matrix, one row per sample."""

    labels: list[str]
    subjects: list[str]
    X: np.ndarray

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        if self.X.ndim != 2:
            raise ValueError("feature matrix must be 2-D")
        if not (len(self.labels) == len(self.subjects) == self.X.shape[0]):
            raise ValueError("labels, subjects and rows must have equal length")

    def __len__(self):
        return len(self.labels)

    @property
    def dim(self) -> int:
        return self.X.shape[1]


def write_feature_csv(path, table: FeatureTable) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["label", "subject"] + [f"f{i}" for i in range(table.dim)])
        for label, subject, row in zip(table.labels, table.subjects, table.X):
            writer.writerow([label, subject] + [f"{v:.9g}" for v in row])


def read_feature_csv(path) -> FeatureTable:
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty feature file") from None
        if header[:2] != ["label", "subject"] or len(header) < 3:
            raise SchemaError("header must start with label,subject,f0", line=1)
        dim = len(header) - 2
        labels, subjects, rows = [], [], []
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != dim + 2:
                raise SchemaError(f"expected {dim + 2} fields, got {len(rec)}", line=lineno)
            try:
                rows.append([float(v) for v in rec[2:]])
            except ValueError as exc:
                raise SchemaError(str(exc), line=lineno) from None
            labels.append(rec[0])
            subjects.append(rec[1])
    if not rows:
        raise SchemaError(f"{path}: no samples")
    return FeatureTable(labels, subjects, np.array(rows))
