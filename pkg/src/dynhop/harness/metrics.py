"""Evaluation metrics: per-step MSE over runs and average node degree."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..multihop import DynamicTopology

__all__ = ["AlgorithmMetrics", "MetricsReport", "mse_curve", "degree_curve"]


@dataclass(frozen=True)
class AlgorithmMetrics:
    """Aggregated curves for one algorithm over R runs."""

    label: str
    mse: np.ndarray
    avg_degree: np.ndarray
    runs: int
    diverged_runs: int


@dataclass(frozen=True)
class MetricsReport:
    """One experiment's worth of per-algorithm curves.

    ``times`` holds the absolute 1-based step indices of the evaluated
    window, so curves line up with the original series.
    """

    times: np.ndarray
    algorithms: tuple[AlgorithmMetrics, ...]

    def by_label(self, label: str) -> AlgorithmMetrics:
        for a in self.algorithms:
            if a.label == label:
                return a
        raise KeyError(label)


def mse_curve(traces: Sequence, ground_truth: np.ndarray) -> np.ndarray:
    """Per-step mean squared error, averaged over nodes and runs.

    ``traces`` may hold EstimationTrace objects or raw (T, N) estimate
    arrays. All runs must match the ground truth's shape.
    """
    if len(traces) < 1:
        raise ValueError("need at least one run")
    truth = np.asarray(ground_truth, dtype=float)
    arrays = []
    for tr in traces:
        est = np.asarray(getattr(tr, "estimates", tr), dtype=float)
        if est.shape != truth.shape:
            raise ValueError(f"trace shape {est.shape} does not match truth {truth.shape}")
        arrays.append(est)
    stack = np.stack(arrays)  # (R, T, N)
    return np.mean((stack - truth[None]) ** 2, axis=(0, 2))


def degree_curve(topology: DynamicTopology) -> np.ndarray:
    """Average unweighted node degree per step: 2 |E_t| / N."""
    if topology.steps == 0:
        raise ValueError("topology has no slices")
    n = topology.base.node_count
    return np.array([2.0 * s.graph.edge_count / n for s in topology.slices])
