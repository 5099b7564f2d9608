"""Intrinsic metrics of a domain.

Closed form: the distance-ratio quantities r and j = log(1 + r).
Graph-backed: the quasihyperbolic metric (density 1/d) and the inner
Euclidean metric (density 1), both as shortest paths on a MetricGraph with
continuous-chord shortcutting so discrete overshoot stays small.  Discrete
paths are admissible curves, so every value is an upper bound of the true
infimum up to quadrature error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .errors import PointOnBoundary, Unreachable
from .geometry import (
    DensityKind,
    DomainDescriptor,
    as_point,
    constant_density,
    reciprocal_boundary_distance,
    segment_integrals,
)
from .graphs import MetricGraph, build_metric_graph_cached, snap_to_graph

EPS_ZERO = 1e-300


def distance_ratio(dom: DomainDescriptor, x, y) -> float:
    """|x - y| / min(d(x), d(y))."""
    px, py = as_point(x, dom.dim), as_point(y, dom.dim)
    dx, dy = dom.dist_to_boundary(px), dom.dist_to_boundary(py)
    if dx <= 0 or dy <= 0 or not (dom.contains(px) and dom.contains(py)):
        raise PointOnBoundary(f"points must lie strictly inside the domain (d={min(dx, dy)})")
    return float(np.linalg.norm(px - py) / min(dx, dy))


def distance_ratio_metric(dom: DomainDescriptor, x, y) -> float:
    """log(1 + |x - y| / min(d(x), d(y)))."""
    return float(np.log1p(distance_ratio(dom, x, y)))


def distance_ratio_batch(dom: DomainDescriptor, xs, ys):
    """Vectorized (r, j) over paired point rows."""
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    dx, dy = dom._dist(xs), dom._dist(ys)
    ok = dom._contains(xs) & dom._contains(ys) & (dx > 0) & (dy > 0)
    if not np.all(ok):
        raise PointOnBoundary(f"{int((~ok).sum())} points not strictly inside the domain")
    r = np.linalg.norm(xs - ys, axis=1) / np.minimum(dx, dy)
    return r, np.log1p(r)


@dataclass(frozen=True)
class ConvergencePolicy:
    """Refinement ladder control: halve h until successive values differ by
    less than rel_tol (relative), up to max_levels total resolutions."""

    rel_tol: float = 0.01
    max_levels: int = 3


@dataclass
class GeodesicResult:
    value: float
    path: np.ndarray                       # (m, dim) vertices, m >= 1
    converged: bool
    estimates_at_resolutions: list         # [(h, value)], h decreasing
    flags: tuple = ()
    segment_weights: np.ndarray = field(default_factory=lambda: np.empty(0))

    def path_length_euclidean(self) -> float:
        if len(self.path) < 2:
            return 0.0
        return float(np.linalg.norm(np.diff(self.path, axis=0), axis=1).sum())


def _node_path(pred: np.ndarray, end: int) -> list:
    out = [end]
    while pred[out[-1]] >= 0:
        out.append(int(pred[out[-1]]))
    out.reverse()
    return out


def _shortcut(dom, verts, seg_w, density, clip, rel_tol, window=16, max_passes=40):
    """Greedy farthest-jump chord replacement; keeps the polyline admissible
    and never increases the weighted length."""
    from .graphs import _chord_inside

    guard = 1e-12 * (sum(seg_w) + 1.0)
    for _ in range(max_passes):
        improved = False
        new_v = [verts[0]]
        new_w = []
        i = 0
        n = len(verts)
        while i < n - 1:
            best_j, best_w = i + 1, seg_w[i]
            cum = np.cumsum(seg_w[i:min(i + window, n - 1)])
            for j in range(min(i + window, n - 1), i + 1, -1):
                span = cum[j - i - 1]
                if not _chord_inside(dom, verts[i], verts[j], clip)[0]:
                    continue
                w = float(segment_integrals(dom, verts[i], verts[j], density,
                                            rel_tol=rel_tol, clip=clip)[0])
                if w < span - guard:
                    best_j, best_w = j, w
                    improved = True
                    break
            new_v.append(verts[best_j])
            new_w.append(best_w)
            i = best_j
        verts, seg_w = new_v, new_w
        if not improved:
            break
    return verts, seg_w


def _solve(graph: MetricGraph, x, y, density: DensityKind,
           quad_rtol: float = 1e-9, shortcut: bool = True):
    """Single-resolution shortest path between two interior points."""
    x = as_point(x, graph.domain.dim)
    y = as_point(y, graph.domain.dim)
    if np.array_equal(x, y):
        return 0.0, x[None, :], np.empty(0)

    sx, wx, _ = snap_to_graph(graph, x, density, quad_rtol)
    sy, wy, _ = snap_to_graph(graph, y, density, quad_rtol)
    indptr, indices, data = graph.csr_for(density, quad_rtol)
    dist, pred = kernels.dijkstra(indptr, indices, data, sources=sx, offsets=wx, targets=sy)
    through = dist[sy] + wy
    if not np.any(np.isfinite(through)):
        raise Unreachable("no path between the snapped regions")
    j_best = int(np.argmin(through))
    end = int(sy[j_best])

    nodes_on_path = _node_path(pred, end)
    verts = [x] + [graph.nodes[i] for i in nodes_on_path] + [y]
    # drop duplicated endpoints when the query point coincided with a node
    dedup = [verts[0]]
    for v in verts[1:]:
        if not np.array_equal(v, dedup[-1]):
            dedup.append(v)
    verts = dedup
    if len(verts) == 1:
        return 0.0, np.asarray(verts), np.empty(0)
    seg_w = list(segment_integrals(
        graph.domain, np.asarray(verts[:-1]), np.asarray(verts[1:]), density,
        rel_tol=quad_rtol, clip=graph.clip,
    ))
    if shortcut:
        verts, seg_w = _shortcut(graph.domain, verts, seg_w, density, graph.clip, quad_rtol)
    return float(sum(seg_w)), np.asarray(verts), np.asarray(seg_w)


def _truncation_flags(graph: MetricGraph, path: np.ndarray) -> tuple:
    if graph.domain.bounded or len(path) == 0:
        return ()
    lo, hi = graph.domain.bbox
    _, idx = graph.tree().query(path)
    margin = 1.5 * graph.node_spacing[np.atleast_1d(idx)]
    gap = np.minimum((path - lo).min(axis=1), (hi - path).min(axis=1))
    if np.any(gap <= margin):
        return ("TRUNCATION_SUSPECT",)
    return ()


def _graph_metric(graph: MetricGraph, x, y, density: DensityKind,
                  refine: Optional[ConvergencePolicy]) -> GeodesicResult:
    value, path, seg_w = _solve(graph, x, y, density)
    estimates = [(graph.res.h, value)]
    converged = False
    if refine is not None:
        g = graph
        for _ in range(1, max(refine.max_levels, 1)):
            g = build_metric_graph_cached(graph.domain, g.res.halved(), graph.seed, density)
            v2, path, seg_w = _solve(g, x, y, density)
            estimates.append((g.res.h, v2))
            prev = estimates[-2][1]
            if abs(v2 - prev) < refine.rel_tol * max(abs(v2), EPS_ZERO):
                converged = True
                break
        value = estimates[-1][1]
        graph = g
    return GeodesicResult(
        value=value, path=path, converged=converged,
        estimates_at_resolutions=estimates,
        flags=_truncation_flags(graph, path),
        segment_weights=seg_w,
    )


def quasihyperbolic_distance(graph: MetricGraph, x, y,
                             refine: Optional[ConvergencePolicy] = None) -> GeodesicResult:
    """Shortest-path estimate of the quasihyperbolic distance (density 1/d)."""
    return _graph_metric(graph, x, y, reciprocal_boundary_distance(), refine)


def inner_distance(graph: MetricGraph, x, y,
                   refine: Optional[ConvergencePolicy] = None) -> GeodesicResult:
    """Shortest Euclidean path length through the domain (density 1)."""
    return _graph_metric(graph, x, y, constant_density(1.0), refine)


@dataclass
class PsiEnvelope:
    """Monotone staircase upper envelope of (r, k) sample pairs."""

    knots: np.ndarray  # (m, 2) rows (r, k_env), r increasing, k_env nondecreasing
    dropped: int = 0

    def evaluate(self, t: float, extend: bool = False) -> Optional[float]:
        r = self.knots[:, 0]
        if t < r[0]:
            return float(self.knots[0, 1])
        if t > r[-1] and not extend:
            return None
        i = int(np.searchsorted(r, t, side="right")) - 1
        return float(self.knots[min(i, len(r) - 1), 1])


def psi_envelope(dom: DomainDescriptor, graph: MetricGraph, sample_pairs,
                 refine: Optional[ConvergencePolicy] = None) -> PsiEnvelope:
    """Empirical growth bound of k against the distance ratio r: the least
    monotone staircase dominating the sampled (r, k) scatter."""
    if len(sample_pairs) < 10:
        raise ValueError("need at least 10 sample pairs")
    rows, dropped = [], 0
    for x, y in sample_pairs:
        try:
            r = distance_ratio(dom, x, y)
            k = quasihyperbolic_distance(graph, x, y, refine).value
        except (Unreachable, PointOnBoundary):
            dropped += 1
            continue
        rows.append((r, k))
    rows.sort()
    arr = np.asarray(rows)
    env = np.maximum.accumulate(arr[:, 1])
    return PsiEnvelope(knots=np.column_stack([arr[:, 0], env]), dropped=dropped)


@dataclass
class UniformityEstimate:
    a_length: float
    a_cigar: float
    per_pair: np.ndarray  # (m, 2) columns (length ratio, cigar ratio)
    dropped: int = 0

    @property
    def a_hat(self) -> float:
        return max(self.a_length, self.a_cigar)


def uniformity_constant_estimate(dom: DomainDescriptor, graph: MetricGraph, sample_pairs,
                                 refine: Optional[ConvergencePolicy] = None) -> UniformityEstimate:
    """Length and cigar ratios of discrete quasihyperbolic geodesics, used as
    candidate uniform arcs; sample maxima are lower bounds for the best
    uniformity constant."""
    rows, dropped = [], 0
    for x, y in sample_pairs:
        x, y = np.asarray(x, float), np.asarray(y, float)
        if np.array_equal(x, y):
            continue
        try:
            res = quasihyperbolic_distance(graph, x, y, refine)
        except (Unreachable, PointOnBoundary):
            dropped += 1
            continue
        verts = res.path
        seg = np.linalg.norm(np.diff(verts, axis=0), axis=1)
        total = seg.sum()
        a_len = total / np.linalg.norm(x - y)
        cigar = 0.0
        if len(verts) > 2:
            cum = np.concatenate([[0.0], np.cumsum(seg)])[1:-1]
            dz = dom._dist(verts[1:-1])
            cigar = float(np.max(np.minimum(cum, total - cum) / dz))
        rows.append((float(a_len), cigar))
    arr = np.asarray(rows) if rows else np.zeros((0, 2))
    a_length = float(arr[:, 0].max()) if len(arr) else 0.0
    a_cigar = float(arr[:, 1].max()) if len(arr) else 0.0
    return UniformityEstimate(a_length=a_length, a_cigar=a_cigar, per_pair=arr, dropped=dropped)
