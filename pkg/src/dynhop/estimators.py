"""Online adaptive estimation of noisy, partially observed node signals.

All algorithms share one update skeleton: the masked residual of the newest
observation is (optionally) passed through an element-wise non-linearity,
shaped by a graph operator, scaled by a step size, and added to the running
estimate. They differ in the operator and non-linearity:

  dynamic-multihop   spectral filter re-bound every step to the merged
                     multi-hop topology inferred from the estimate history
  glms               spectral filter bound once to the static graph
  gdlms              one-step diffusion (I - eps L) on the static graph
  glmp               static spectral filter, signed-power error term
  gsign              static spectral filter, sign error term
  gsd                diffusion operator, sign error term
  sgm-then-glms      correlation-thresholded topology refreshed before each
                     update
  glms-then-sgm      update first, then refresh the topology for the next
                     step

Divergence (non-finite values, or magnitudes beyond an overflow guard) is
flagged in the trace; the run keeps going so the blow-up stays visible in
downstream metrics.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .edge_dynamics import NodeSignalSeries, WindowSpec, sliding_abs_correlation
from .filters import FilterSpec, bind_filter, filter_response, fit_lowpass_coefficients
from .graphs import StaticGraph, build_laplacian, eigendecompose
from .multihop import PruneSpec, build_topology_slice

__all__ = [
    "ALGORITHMS",
    "DIVERGENCE_GUARD",
    "StepSizeRule",
    "ObservationStream",
    "EstimatorConfig",
    "EstimationTrace",
    "adaptive_mu",
    "error_nonlinearity",
    "diffusion_operator",
    "lms_step",
    "run_estimation",
    "stability_bound",
    "trace_to_csv",
    "trace_summary",
]

ALGORITHMS = (
    "dynamic-multihop",
    "glms",
    "gdlms",
    "glmp",
    "gsign",
    "gsd",
    "sgm-then-glms",
    "glms-then-sgm",
)

_SPATIAL = frozenset({"gdlms", "gsd"})
_SIGN = frozenset({"gsign", "gsd"})
_DYNAMIC = frozenset({"dynamic-multihop", "sgm-then-glms", "glms-then-sgm"})

# estimates whose magnitude passes this can never recover and would soon
# overflow norm computations; flag divergence here instead of waiting for inf
DIVERGENCE_GUARD = 1e100

# above this size, per-step ideal re-binding (a full eigendecomposition per
# topology change) is replaced by a fixed polynomial response
EXACT_REBIND_LIMIT = 200


@dataclass(frozen=True)
class StepSizeRule:
    """Fixed step size, or one decaying exponentially with the residual norm."""

    kind: str
    mu: float | None = None
    mu_min: float | None = None
    mu_max: float | None = None

    def __post_init__(self) -> None:
        if self.kind == "fixed":
            if self.mu is None or self.mu <= 0:
                raise ValueError("fixed rule needs mu > 0")
        elif self.kind == "residual-adaptive":
            if self.mu_min is None or self.mu_max is None:
                raise ValueError("adaptive rule needs mu_min and mu_max")
            if not 0 < self.mu_min <= self.mu_max:
                raise ValueError("need 0 < mu_min <= mu_max")
        else:
            raise ValueError(f"unknown step rule {self.kind!r}")

    @classmethod
    def fixed(cls, mu: float) -> "StepSizeRule":
        return cls("fixed", mu=mu)

    @classmethod
    def adaptive(cls, mu_min: float, mu_max: float) -> "StepSizeRule":
        return cls("residual-adaptive", mu_min=mu_min, mu_max=mu_max)


def adaptive_mu(residual_norm: float, rule: StepSizeRule) -> float:
    """Step size for the current residual.

    The adaptive rule interpolates (mu_max - mu_min) * exp(-r) + mu_min:
    large residuals give cautious steps near mu_min, small residuals give
    aggressive steps near mu_max.
    """
    if rule.kind == "fixed":
        return float(rule.mu)
    return (rule.mu_max - rule.mu_min) * math.exp(-float(residual_norm)) + rule.mu_min


@dataclass(frozen=True)
class ObservationStream:
    """Per-step noisy observations with a boolean sampling mask.

    Unobserved entries are zeroed on construction, so downstream code can
    rely on masked coordinates carrying no information.
    """

    observations: np.ndarray
    mask: np.ndarray

    def __post_init__(self) -> None:
        obs = np.asarray(self.observations, dtype=float)
        mask = np.asarray(self.mask, dtype=bool)
        if obs.ndim != 2 or obs.shape != mask.shape:
            raise ValueError(
                f"observations {obs.shape} and mask {mask.shape} must be equal 2-D shapes"
            )
        obs = np.where(mask, obs, 0.0)
        obs.setflags(write=False)
        mask = mask.copy()
        mask.setflags(write=False)
        object.__setattr__(self, "observations", obs)
        object.__setattr__(self, "mask", mask)

    @property
    def steps(self) -> int:
        return self.observations.shape[0]

    @property
    def node_count(self) -> int:
        return self.observations.shape[1]


@dataclass(frozen=True)
class EstimatorConfig:
    """Full description of one estimation algorithm run.

    ``refresh_weights=False`` pins the dynamic family to the static graph's
    weights (useful as a reduction check: dynamic-multihop with hops=1 and
    static weights must reproduce glms exactly). ``weights_source`` selects
    whether windowed correlations are computed on the running estimates
    (deployment setting) or on a supplied ground-truth history.
    """

    algorithm: str
    filter: FilterSpec = FilterSpec("ideal-band-limited", passband_fraction=0.4)
    step: StepSizeRule = StepSizeRule.fixed(0.9)
    hops: int = 6
    prune: PruneSpec = PruneSpec(0.2)
    window: WindowSpec = WindowSpec(10, 1)
    p_exponent: float = 1.5
    diffusion_eps: float | None = None
    refresh_weights: bool = True
    latent_weight: str = "score"
    weights_source: str = "estimates"
    label: str | None = None

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        if self.algorithm == "glmp" and not 1.0 < self.p_exponent <= 2.0:
            raise ValueError("glmp exponent must lie in (1, 2]")
        if self.hops < 1:
            raise ValueError("hops must be >= 1")
        if self.weights_source not in ("estimates", "ground-truth"):
            raise ValueError(f"unknown weights_source {self.weights_source!r}")

    @property
    def name(self) -> str:
        return self.label if self.label is not None else self.algorithm


@dataclass(frozen=True)
class EstimationTrace:
    """Per-step outputs of one estimation run."""

    estimates: np.ndarray  # (T, N), estimate aligned with each observation
    residual_norms: np.ndarray
    step_sizes: np.ndarray
    edge_counts: np.ndarray  # edges of the topology used at each step
    diverged: bool = False
    diverged_at: int | None = None

    @property
    def steps(self) -> int:
        return self.estimates.shape[0]


def error_nonlinearity(e: np.ndarray, algorithm: str, p_exponent: float | None = None) -> np.ndarray:
    """Element-wise residual shaping for each algorithm family.

    Least-squares members pass the residual through; the p-norm member uses
    sign(e)|e|^(p-1); sign members keep only the sign (sign(0) = 0).
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    e = np.asarray(e, dtype=float)
    if algorithm in _SIGN:
        return np.sign(e)
    if algorithm == "glmp":
        p = 1.5 if p_exponent is None else float(p_exponent)
        if not 1.0 < p <= 2.0:
            raise ValueError("glmp exponent must lie in (1, 2]")
        return np.sign(e) * np.abs(e) ** (p - 1.0)
    return e


def diffusion_operator(laplacian: np.ndarray, eps: float) -> Callable[[np.ndarray], np.ndarray]:
    """One-step spatial diffusion x -> x - eps * L x.

    Non-expansive for 0 < eps < 2 / lambda_max; values outside that range
    only warn, since exploratory use is legitimate.
    """
    laplacian = np.asarray(laplacian, dtype=float)
    lam_max = float(np.linalg.eigvalsh(laplacian)[-1])
    if lam_max > 0 and not 0.0 < eps < 2.0 / lam_max:
        warnings.warn(
            f"diffusion step {eps} outside (0, {2.0 / lam_max:.6g}); operator may expand",
            stacklevel=2,
        )

    def op(x: np.ndarray) -> np.ndarray:
        return x - eps * (laplacian @ x)

    return op


def lms_step(
    estimate: np.ndarray,
    observation: np.ndarray,
    mask: np.ndarray,
    filter_op: Callable[[np.ndarray], np.ndarray],
    mu: float,
) -> np.ndarray:
    """One correction step: estimate + mu * C(masked residual)."""
    residual = np.where(mask, observation - estimate, 0.0)
    return estimate + mu * filter_op(residual)


def stability_bound(
    subject: StaticGraph | np.ndarray,
    filter_spec: FilterSpec,
    mask_policy: str | float | np.ndarray = "full",
) -> float:
    """Largest step size with a convergent mean update: 2 / lambda_max of
    the filtered-and-masked quadratic form.

    mask_policy "full" evaluates at the identity mask (optimistic); a float
    in (0, 1] stands for a uniform per-node observation probability; an
    array gives per-node probabilities. An empty mask (or an all-zero
    response) has lambda_max = 0 and the bound is +inf.
    """
    lap = build_laplacian(subject) if isinstance(subject, StaticGraph) else np.asarray(subject, float)
    decomp = eigendecompose(lap)
    h = filter_response(decomp, filter_spec)
    n = lap.shape[0]
    if isinstance(mask_policy, str):
        if mask_policy != "full":
            raise ValueError(f"unknown mask policy {mask_policy!r}")
        m = np.ones(n)
    elif np.isscalar(mask_policy):
        m = np.full(n, float(mask_policy))
    else:
        m = np.asarray(mask_policy, dtype=float)
        if m.shape != (n,):
            raise ValueError(f"mask policy shape {m.shape} does not match {n} nodes")
    shaped = decomp.eigenvectors * h  # U Sigma
    quad = shaped.T @ (shaped * m[:, None])
    lam_max = float(np.linalg.eigvalsh(quad)[-1])
    if lam_max <= 1e-15:
        return math.inf
    return 2.0 / lam_max


def _last_window_scores(rows: np.ndarray, pairs) -> np.ndarray:
    """Windowed |correlation| over exactly one trailing window of history."""
    series = NodeSignalSeries(rows)
    spec = WindowSpec(rows.shape[0], 1)
    return sliding_abs_correlation(series, spec, pairs)[-1]


def run_estimation(
    stream: ObservationStream,
    g: StaticGraph,
    cfg: EstimatorConfig,
    ground_truth: NodeSignalSeries | None = None,
) -> EstimationTrace:
    """Run one online estimation pass over an observation stream.

    The dynamic family refreshes edge weights from the strictly causal
    estimate history (steps before the window fills fall back to the static
    graph), rebuilds its topology, re-binds the filter, and then applies the
    same masked correction step as every static baseline. ``ground_truth``
    is only consulted when ``cfg.weights_source == "ground-truth"``.
    """
    n = g.node_count
    t_total = stream.steps
    if stream.node_count != n:
        raise ValueError(f"stream has {stream.node_count} nodes, graph has {n}")
    if t_total < 1:
        raise ValueError("stream must contain at least one step")
    if cfg.weights_source == "ground-truth":
        if ground_truth is None:
            raise ValueError("weights_source='ground-truth' requires a ground_truth series")
        if ground_truth.values.shape != (t_total, n):
            raise ValueError("ground_truth shape must match the stream")

    algo = cfg.algorithm
    window = cfg.window.window
    static_weights = np.asarray(g.weights, dtype=float)
    base_lap = build_laplacian(g)

    rebind_spec: FilterSpec | None = None  # fixed polynomial response, fitted once

    def bind(lap: np.ndarray, rebinding: bool = False) -> Callable[[np.ndarray], np.ndarray]:
        nonlocal rebind_spec
        if algo in _SPATIAL:
            lam_max = float(np.linalg.eigvalsh(lap)[-1])
            eps = cfg.diffusion_eps if cfg.diffusion_eps is not None else (
                1.0 / lam_max if lam_max > 0 else 0.0
            )
            return diffusion_operator(lap, eps)
        spec = cfg.filter
        if rebinding and spec.kind == "ideal-band-limited" and n > EXACT_REBIND_LIMIT:
            # per-step exact diagonalization is too costly at this size; fit
            # a non-negative polynomial to the ideal response once, over a
            # padded domain so topology drift cannot push eigenvalues past it
            if rebind_spec is None:
                pad = 1.5
                order = spec.order + spec.order % 2  # squared fit needs even order
                lam_max = float(np.linalg.eigvalsh(lap)[-1])
                grid = np.linspace(0.0, pad * lam_max, 16 * order + 8)
                theta = fit_lowpass_coefficients(
                    grid, spec.passband_fraction / pad, order, nonnegative=True
                )
                rebind_spec = FilterSpec("chebyshev", spec.passband_fraction, order, theta)
            spec = rebind_spec
        return bind_filter(lap, spec)

    static_apply = bind(base_lap)
    apply_c = static_apply
    current_edge_count = g.edge_count

    # single-entry cache: any change of edge set or weights triggers a re-bind
    cache_key: tuple | None = None
    cached_apply: Callable[[np.ndarray], np.ndarray] | None = None

    def bind_cached(graph: StaticGraph) -> Callable[[np.ndarray], np.ndarray]:
        nonlocal cache_key, cached_apply
        key = (graph.edges, graph.weights)
        if key != cache_key:
            cached_apply = bind(build_laplacian(graph), rebinding=True)
            cache_key = key
        return cached_apply

    all_pairs: list[tuple[int, int]] = []
    if algo in ("sgm-then-glms", "glms-then-sgm"):
        all_pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

    def history_rows(t: int) -> np.ndarray | None:
        """Trailing window of strictly causal signal history, or None."""
        if t < window:
            return None
        if cfg.weights_source == "ground-truth":
            return ground_truth.values[t - window : t]
        rows = np.asarray(estimates[t - window : t])
        if not np.all(np.isfinite(rows)):
            return None  # diverged history carries no usable statistics
        return rows

    def sgm_graph(rows: np.ndarray) -> StaticGraph:
        scores = _last_window_scores(rows, all_pairs)
        keep = scores > cfg.prune.threshold
        edges = tuple(p for p, k in zip(all_pairs, keep) if k)
        weights = tuple(float(s) for s, k in zip(scores, keep) if k)
        return StaticGraph(n, edges, weights)

    estimates = np.zeros((t_total, n))
    residual_norms = np.zeros(t_total)
    step_sizes = np.zeros(t_total)
    edge_counts = np.zeros(t_total, dtype=int)
    x_hat = np.zeros(n)
    diverged = False
    diverged_at: int | None = None
    sgm_topology = g  # topology in force for glms-then-sgm

    for t in range(t_total):
        if algo == "dynamic-multihop":
            rows = history_rows(t)
            if cfg.refresh_weights and rows is not None:
                weights_t = _last_window_scores(rows, g.edges)
                scorer = None
                if cfg.prune.metric == "correlation" or cfg.latent_weight == "correlation":
                    scorer = lambda _t, pairs: _last_window_scores(rows, list(pairs))
            else:
                weights_t = static_weights
                scorer = None
                if cfg.prune.metric == "correlation" or cfg.latent_weight == "correlation":
                    # no usable history: score candidates as unsupported
                    scorer = lambda _t, pairs: np.zeros(len(pairs))
            topo = build_topology_slice(
                g,
                weights_t,
                cfg.hops,
                cfg.prune,
                t=t,
                latent_weight=cfg.latent_weight,
                candidate_scores=scorer,
            )
            apply_c = bind_cached(topo.graph)
            current_edge_count = topo.graph.edge_count
        elif algo == "sgm-then-glms":
            rows = history_rows(t)
            topo_graph = sgm_graph(rows) if rows is not None else g
            apply_c = bind_cached(topo_graph)
            current_edge_count = topo_graph.edge_count
        elif algo == "glms-then-sgm":
            apply_c = bind_cached(sgm_topology)
            current_edge_count = sgm_topology.edge_count

        residual = np.where(stream.mask[t], stream.observations[t] - x_hat, 0.0)
        residual_norm = float(np.linalg.norm(residual))
        mu_t = adaptive_mu(residual_norm, cfg.step)
        shaped = error_nonlinearity(residual, algo, cfg.p_exponent)
        x_hat = x_hat + mu_t * apply_c(shaped)

        if not diverged and (
            not np.all(np.isfinite(x_hat)) or np.max(np.abs(x_hat)) > DIVERGENCE_GUARD
        ):
            diverged = True
            diverged_at = t

        estimates[t] = x_hat
        residual_norms[t] = residual_norm
        step_sizes[t] = mu_t
        edge_counts[t] = current_edge_count

        if algo == "glms-then-sgm":
            rows = history_rows(t + 1)
            sgm_topology = sgm_graph(rows) if rows is not None else g

    estimates.setflags(write=False)
    return EstimationTrace(
        estimates=estimates,
        residual_norms=residual_norms,
        step_sizes=step_sizes,
        edge_counts=edge_counts,
        diverged=diverged,
        diverged_at=diverged_at,
    )


def trace_to_csv(trace: EstimationTrace, path: str | Path) -> None:
    """Long-format estimates: one row per (step, node)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "node", "estimate"])
        for t in range(trace.steps):
            for i, v in enumerate(trace.estimates[t]):
                writer.writerow([t, i, repr(float(v))])


def trace_summary(trace: EstimationTrace) -> dict:
    """JSON-ready per-run summary (norms, steps, edge counts, divergence)."""
    return {
        "residual_norms": [float(v) for v in trace.residual_norms],
        "step_sizes": [float(v) for v in trace.step_sizes],
        "edge_counts": [int(v) for v in trace.edge_counts],
        "diverged": bool(trace.diverged),
        "diverged_at": None if trace.diverged_at is None else int(trace.diverged_at),
    }


def trace_summary_json(trace: EstimationTrace) -> str:
    return json.dumps(trace_summary(trace), sort_keys=True)
