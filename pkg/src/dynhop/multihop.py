"""Multi-hop expansion, pruning, and merging of time-varying topologies.

Powers of the (spectrally normalized) Laplacian become non-zero exactly
where a walk of that length connects two nodes. Entries that were zero in
the base matrix mark latent node pairs: interaction routed through
intermediaries rather than a direct edge. Each hop order contributes the
pairs that first appear at that power; pruning keeps the pairs whose score
strictly exceeds a threshold; merging stacks the survivors on top of the
original graph, whose own edges are never pruned.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .edge_dynamics import EdgeWeightSeries, NodeSignalSeries, WindowSpec, sliding_abs_correlation
from .graphs import StaticGraph, build_laplacian

__all__ = [
    "EPS_ZERO",
    "PruneSpec",
    "HopCandidateSet",
    "TopologySlice",
    "DynamicTopology",
    "spectral_normalize",
    "hop_expand",
    "prune",
    "merge",
    "build_topology_slice",
    "build_dynamic_topology",
    "windowed_pair_scorer",
    "topology_to_csv",
]

# magnitudes below this in a matrix power count as zero (absorbs
# cancellation round-off without hiding genuine walk contributions)
EPS_ZERO = 1e-12

PRUNE_METRICS = ("weight-magnitude", "correlation")
LATENT_WEIGHT_RULES = ("score", "correlation")

# scorer(t, pairs) -> array of non-negative scores, one per pair
PairScorer = Callable[[int, Sequence[tuple[int, int]]], np.ndarray]


@dataclass(frozen=True)
class PruneSpec:
    """Threshold and scoring metric for candidate-edge pruning.

    "weight-magnitude" scores a candidate by the magnitude of its entry in
    the normalized Laplacian power; "correlation" re-scores it by the
    windowed |correlation| of its endpoints' signals. Survival is strict:
    score must exceed the threshold, equality is pruned.
    """

    threshold: float
    metric: str = "weight-magnitude"

    def __post_init__(self) -> None:
        if not np.isfinite(self.threshold) or self.threshold < 0:
            raise ValueError("threshold must be finite and >= 0")
        if self.metric not in PRUNE_METRICS:
            raise ValueError(f"unknown metric {self.metric!r}; expected one of {PRUNE_METRICS}")


@dataclass(frozen=True)
class HopCandidateSet:
    """Latent node pairs first reachable at one hop order.

    Pairs are absent from the original edge set and from every lower hop
    order retained at the same step; scores are non-negative.
    """

    hop: int
    pairs: tuple[tuple[int, int], ...]
    scores: tuple[float, ...]
    time: int = 0

    def __post_init__(self) -> None:
        if self.hop < 2:
            raise ValueError("hop order starts at 2")
        if len(self.pairs) != len(self.scores):
            raise ValueError("pairs and scores must have equal length")
        if any(s < 0 for s in self.scores):
            raise ValueError("scores must be >= 0")


@dataclass(frozen=True)
class TopologySlice:
    """One merged graph with per-edge provenance ("original" or "hop<p>")."""

    graph: StaticGraph
    provenance: tuple[str, ...]
    time: int = 0

    def __post_init__(self) -> None:
        if len(self.provenance) != self.graph.edge_count:
            raise ValueError("one provenance tag per edge required")


@dataclass(frozen=True)
class DynamicTopology:
    """Per-step merged graphs over a base topology."""

    base: StaticGraph
    slices: tuple[TopologySlice, ...]

    @property
    def steps(self) -> int:
        return len(self.slices)


def spectral_normalize(laplacian: np.ndarray) -> np.ndarray | None:
    """Scale by the largest eigenvalue so all matrix powers stay bounded.

    Returns None for an all-zero operator (no active edges): there is
    nothing to diffuse, so hop expansion is skipped entirely.
    """
    lam_max = float(np.linalg.eigvalsh(laplacian)[-1])
    if lam_max <= 0.0:
        return None
    return laplacian / lam_max


def hop_expand(
    normalized_laplacian: np.ndarray, g: StaticGraph, hops: int, t: int = 0
) -> list[HopCandidateSet]:
    """Candidate sets for hop orders 2..hops (newly appearing non-zeros only).

    A pair qualifies at order p when |power entry| > EPS_ZERO, the pair is
    not an edge of ``g``, and it did not already qualify at a lower order.
    Candidates are emitted in ascending (hop, pair) order.
    """
    if hops < 1:
        raise ValueError("hops must be >= 1")
    n = g.node_count
    if normalized_laplacian.shape != (n, n):
        raise ValueError(
            f"operator shape {normalized_laplacian.shape} does not match {n} nodes"
        )
    taken = np.zeros((n, n), dtype=bool)
    np.fill_diagonal(taken, True)
    for i, j in g.edges:
        taken[i, j] = taken[j, i] = True

    out: list[HopCandidateSet] = []
    power = normalized_laplacian
    for p in range(2, hops + 1):
        power = power @ normalized_laplacian
        magnitude = np.abs(np.triu(power, 1))
        fresh = (magnitude > EPS_ZERO) & ~taken
        index = np.argwhere(fresh)  # row-major: ascending pair order
        pairs = tuple((int(i), int(j)) for i, j in index)
        scores = tuple(float(magnitude[i, j]) for i, j in index)
        out.append(HopCandidateSet(hop=p, pairs=pairs, scores=scores, time=t))
        fresh_sym = fresh | fresh.T
        taken |= fresh_sym
    return out


def prune(candidates: HopCandidateSet, spec: PruneSpec) -> HopCandidateSet:
    """Keep exactly the candidates whose score strictly exceeds the threshold."""
    kept = [
        (pair, score)
        for pair, score in zip(candidates.pairs, candidates.scores)
        if score > spec.threshold
    ]
    return HopCandidateSet(
        hop=candidates.hop,
        pairs=tuple(p for p, _ in kept),
        scores=tuple(s for _, s in kept),
        time=candidates.time,
    )


def merge(
    g_t: StaticGraph,
    pruned: Sequence[HopCandidateSet],
    weight_rule: Callable[[tuple[int, int], float, int], float] | None = None,
    t: int = 0,
) -> TopologySlice:
    """Union of the current graph with surviving latent edges.

    Original edges keep their weights at t. Latent edges take their score,
    or whatever ``weight_rule(pair, score, hop)`` returns. A pair appearing
    twice across inputs signals an upstream bug and raises.
    """
    edges = list(g_t.edges)
    weights = list(g_t.weights)
    provenance = ["original"] * len(edges)
    seen = set(edges)
    for cand in pruned:
        for pair, score in zip(cand.pairs, cand.scores):
            if pair in seen:
                raise ValueError(f"duplicate edge {pair} across merge inputs")
            seen.add(pair)
            w = score if weight_rule is None else float(weight_rule(pair, score, cand.hop))
            edges.append(pair)
            weights.append(w)
            provenance.append(f"hop{cand.hop}")
    graph = StaticGraph(g_t.node_count, tuple(edges), tuple(weights), g_t.labels)
    return TopologySlice(graph=graph, provenance=tuple(provenance), time=t)


def _rescored(cands: HopCandidateSet, scorer: PairScorer) -> HopCandidateSet:
    if not cands.pairs:
        return cands
    scores = np.asarray(scorer(cands.time, cands.pairs), dtype=float)
    return HopCandidateSet(cands.hop, cands.pairs, tuple(float(s) for s in scores), cands.time)


def build_topology_slice(
    g: StaticGraph,
    weights_t: Sequence[float],
    hops: int,
    prune_spec: PruneSpec,
    *,
    t: int = 0,
    latent_weight: str = "score",
    candidate_scores: PairScorer | None = None,
) -> TopologySlice:
    """Expand, prune, and merge a single step.

    ``candidate_scores`` must be supplied when either the pruning metric or
    the latent weight rule is "correlation".
    """
    if hops < 1:
        raise ValueError("hops must be >= 1")
    if latent_weight not in LATENT_WEIGHT_RULES:
        raise ValueError(f"unknown latent weight rule {latent_weight!r}")
    needs_scores = prune_spec.metric == "correlation" or latent_weight == "correlation"
    if needs_scores and candidate_scores is None:
        raise ValueError("correlation scoring requires a candidate_scores callback")

    g_t = g.with_weights(weights_t)
    candidate_sets: list[HopCandidateSet] = []
    if hops >= 2:
        normalized = spectral_normalize(build_laplacian(g_t))
        if normalized is not None:
            candidate_sets = hop_expand(normalized, g, hops, t=t)
    if prune_spec.metric == "correlation":
        candidate_sets = [_rescored(c, candidate_scores) for c in candidate_sets]
    pruned = [prune(c, prune_spec) for c in candidate_sets]
    if latent_weight == "correlation" and prune_spec.metric != "correlation":
        pruned = [_rescored(c, candidate_scores) for c in pruned]
    return merge(g_t, pruned, None, t=t)


def build_dynamic_topology(
    g: StaticGraph,
    ws: EdgeWeightSeries,
    hops: int,
    prune_spec: PruneSpec,
    *,
    latent_weight: str = "score",
    candidate_scores: PairScorer | None = None,
) -> DynamicTopology:
    """Per-step expand/prune/merge over a whole edge-weight series."""
    if ws.edges != g.edges:
        raise ValueError("weight series edge set does not match the graph")
    slices = tuple(
        build_topology_slice(
            g,
            ws.weights[t],
            hops,
            prune_spec,
            t=t,
            latent_weight=latent_weight,
            candidate_scores=candidate_scores,
        )
        for t in range(ws.steps)
    )
    return DynamicTopology(base=g, slices=slices)


def windowed_pair_scorer(series: NodeSignalSeries, spec: WindowSpec) -> PairScorer:
    """Scorer giving the windowed |correlation| of arbitrary node pairs.

    Intended for the "correlation" pruning metric / latent weight rule when
    a full signal history is available offline. ``t`` indexes absolute steps,
    so scoring always runs at stride 1 whatever the spec's stride.
    """
    dense = WindowSpec(spec.window, 1)

    def scorer(t: int, pairs: Sequence[tuple[int, int]]) -> np.ndarray:
        return sliding_abs_correlation(series, dense, pairs)[t]

    return scorer


def topology_to_csv(topology: DynamicTopology, path: str | Path) -> None:
    """Per-step edge list with provenance, one row per (step, edge)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "src", "dst", "weight", "provenance"])
        for s in topology.slices:
            for (i, j), w, tag in zip(s.graph.edges, s.graph.weights, s.provenance):
                writer.writerow([s.time, i, j, repr(float(w)), tag])
