"""CSV ingestion, split bookkeeping, normalization, and correlation-based
initial graph construction."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..edge_dynamics import NodeSignalSeries
from ..graphs import StaticGraph

logger = logging.getLogger(__name__)

__all__ = [
    "DataError",
    "EmptyCsvError",
    "RaggedRowError",
    "NonNumericCellError",
    "SplitSpec",
    "GraphBuildSpec",
    "ingest_csv",
    "series_to_csv",
    "normalize_by_train_mean",
    "build_initial_graph",
]


class DataError(Exception):
    """Problem with an input data file."""


class EmptyCsvError(DataError):
    """The file has no header or no data rows."""


class RaggedRowError(DataError):
    """A data row has a different cell count than the header."""


class NonNumericCellError(DataError):
    """A data cell failed to parse as a finite number."""


def ingest_csv(path: str | Path) -> NodeSignalSeries:
    """Read a rectangular numeric CSV: header of node labels, one row per step."""
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh)]
    if not rows:
        raise EmptyCsvError(f"{path}: file is empty")
    header = [cell.strip() for cell in rows[0]]
    data = rows[1:]
    if not data:
        raise EmptyCsvError(f"{path}: header only, no data rows")
    n = len(header)
    values = np.empty((len(data), n))
    for r, row in enumerate(data):
        line = r + 2  # 1-based file line, counting the header
        if len(row) != n:
            raise RaggedRowError(f"{path}: line {line} has {len(row)} cells, expected {n}")
        for c, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                raise NonNumericCellError(
                    f"{path}: line {line}, column {header[c]!r}: {cell!r} is not numeric"
                ) from None
            if not math.isfinite(v):
                raise NonNumericCellError(
                    f"{path}: line {line}, column {header[c]!r}: {cell!r} is not finite"
                )
            values[r, c] = v
    return NodeSignalSeries(values, labels=tuple(header))


def series_to_csv(series: NodeSignalSeries, path: str | Path) -> None:
    labels = series.labels or tuple(f"node{i}" for i in range(series.node_count))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(labels)
        for row in series.values:
            writer.writerow([repr(float(v)) for v in row])


@dataclass(frozen=True)
class SplitSpec:
    """Train/validation/test ranges as 1-based inclusive [start, end] pairs.

    Ranges must be ordered and disjoint. The test end may be None, meaning
    "through the last step"; it is resolved once the series length is known.
    """

    train: tuple[int, int]
    validation: tuple[int, int]
    test: tuple[int, int | None]

    def __post_init__(self) -> None:
        tr, va, te = self.train, self.validation, self.test
        if tr[0] < 1 or tr[1] < tr[0]:
            raise ValueError(f"bad train range {tr}")
        if va[0] <= tr[1] or va[1] < va[0]:
            raise ValueError(f"validation range {va} must follow train {tr}")
        if te[0] <= va[1] or (te[1] is not None and te[1] < te[0]):
            raise ValueError(f"test range {te} must follow validation {va}")

    def resolve(self, total_steps: int) -> "SplitSpec":
        """Pin an open test end and check everything fits in the series."""
        end = self.test[1] if self.test[1] is not None else total_steps
        resolved = SplitSpec(self.train, self.validation, (self.test[0], end))
        if end > total_steps:
            raise ValueError(f"test range ends at {end} but series has {total_steps} steps")
        return resolved

    def rows(self, name: str) -> slice:
        """0-based half-open row slice for a named split."""
        start, end = getattr(self, name)
        if end is None:
            raise ValueError("resolve() the spec before slicing an open test range")
        return slice(start - 1, end)


def normalize_by_train_mean(series: NodeSignalSeries, splits: SplitSpec) -> NodeSignalSeries:
    """Divide each node by its training-split mean.

    Nodes whose training mean is (numerically) zero pass through unscaled
    with a logged warning; dividing by it would be meaningless.
    """
    train = series.values[splits.rows("train")]
    if train.shape[0] == 0:
        raise ValueError("train split is empty")
    means = train.mean(axis=0)
    scale_floor = 1e-12 * np.maximum(1.0, np.abs(train).max(axis=0))
    degenerate = np.abs(means) <= scale_floor
    if np.any(degenerate):
        which = np.flatnonzero(degenerate)
        names = [series.labels[i] if series.labels else str(i) for i in which]
        logger.warning("train mean is zero for node(s) %s; leaving them unscaled", names)
    divisor = np.where(degenerate, 1.0, means)
    return NodeSignalSeries(series.values / divisor, labels=series.labels)


@dataclass(frozen=True)
class GraphBuildSpec:
    """Connect each node to its top-k most |correlated| partners, plus every
    pair above an absolute-correlation threshold."""

    top_k: int = 3
    abs_corr_threshold: float = 0.95

    def __post_init__(self) -> None:
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if not 0.0 <= self.abs_corr_threshold <= 1.0:
            raise ValueError("abs_corr_threshold must lie in [0, 1]")


def _abs_correlation_matrix(values: np.ndarray) -> np.ndarray:
    centered = values - values.mean(axis=0)
    cov = centered.T @ centered
    spread = np.sqrt(np.diag(cov))
    denom = np.outer(spread, spread)
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = np.where(denom > 0, cov / np.where(denom > 0, denom, 1.0), 0.0)
    np.fill_diagonal(corr, 0.0)
    return np.clip(np.abs(corr), 0.0, 1.0)


def build_initial_graph(series: NodeSignalSeries, spec: GraphBuildSpec) -> StaticGraph:
    """Sparse static graph from training-window correlations.

    Edge set is the union of each node's top-k partners by |correlation| and
    all pairs whose |correlation| strictly exceeds the threshold. Weights are
    the |correlation| values. top_k is clipped to n-1 on small graphs, so two
    nodes always yield their single possible edge.
    """
    values = series.values
    t_len, n = values.shape
    if n < 2:
        raise ValueError("need at least 2 nodes to build a graph")
    if t_len < 2:
        raise ValueError("need at least 2 samples to correlate")
    absc = _abs_correlation_matrix(values)

    chosen: set[tuple[int, int]] = set()
    k = min(spec.top_k, n - 1)
    for i in range(n):
        order = np.argsort(-absc[i], kind="stable")
        partners = [j for j in order if j != i][:k]
        for j in partners:
            chosen.add((min(i, j), max(i, j)))
    above = np.argwhere(np.triu(absc, 1) > spec.abs_corr_threshold)
    for i, j in above:
        chosen.add((int(i), int(j)))

    edges = tuple(sorted(chosen))
    weights = tuple(float(absc[i, j]) for i, j in edges)
    return StaticGraph(n, edges, weights, labels=series.labels)
