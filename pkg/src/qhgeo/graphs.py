"""Adaptive metric graphs: Whitney-style point clouds over a domain with
k-nearest-neighbor edges weighted by line integrals of a chosen density.

The graph is the single discretization on which all shortest-path metrics
run.  Construction is deterministic for a given (domain, resolution, seed).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .errors import DisconnectedSample, EmptyDomainSample, Unreachable
from .geometry import (
    DensityKind,
    DomainDescriptor,
    constant_density,
    reciprocal_boundary_distance,
    segment_integrals,
)

GRAPH_FORMAT = "qhgeo-graph/1"


@dataclass(frozen=True)
class ResolutionSpec:
    """Sampling resolution: base grid spacing, Whitney refinement rule,
    and neighbor count (default 2*dim + 6)."""

    h: float
    spacing_ratio: float = 0.4
    neighbors: Optional[int] = None
    max_depth: int = 3
    clip: Optional[float] = None  # overrides the domain's default boundary clip
    max_nodes: int = 400_000

    def halved(self) -> "ResolutionSpec":
        return replace(self, h=self.h / 2.0)

    def key(self) -> tuple:
        return (self.h, self.spacing_ratio, self.neighbors, self.max_depth, self.clip)


@dataclass(eq=False)
class MetricGraph:
    domain: DomainDescriptor
    res: ResolutionSpec
    seed: int
    nodes: np.ndarray          # (m, dim)
    node_d: np.ndarray         # (m,) boundary distances
    node_spacing: np.ndarray   # (m,) lattice spacing each node was kept at
    edges: np.ndarray          # (E, 2) int32, u < v
    clip: float
    _weights: dict = field(default_factory=dict)   # density key -> (E,) array
    _csr: dict = field(default_factory=dict)       # density key -> (indptr, indices, data)
    _tree: Optional[cKDTree] = field(default=None, repr=False)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def tree(self) -> cKDTree:
        if self._tree is None:
            self._tree = cKDTree(self.nodes)
        return self._tree

    def density_keys(self):
        return sorted(self._weights)

    def weights_for(self, density: DensityKind, rel_tol: float = 1e-9) -> np.ndarray:
        key = density.key()
        if key not in self._weights:
            w = segment_integrals(
                self.domain, self.nodes[self.edges[:, 0]], self.nodes[self.edges[:, 1]],
                density, rel_tol=rel_tol, clip=self.clip,
            )
            self._weights[key] = w
        return self._weights[key]

    def csr_for(self, density: DensityKind, rel_tol: float = 1e-9):
        key = density.key()
        if key not in self._csr:
            w = self.weights_for(density, rel_tol)
            u, v = self.edges[:, 0], self.edges[:, 1]
            rows = np.concatenate([u, v])
            cols = np.concatenate([v, u])
            data = np.concatenate([w, w])
            mat = csr_matrix((data, (rows, cols)), shape=(self.n_nodes, self.n_nodes))
            self._csr[key] = (
                mat.indptr.astype(np.int64),
                mat.indices.astype(np.int32),
                mat.data.astype(np.float64),
            )
        return self._csr[key]

    def near_bbox_shell(self, idx) -> np.ndarray:
        """True where a node sits within 1.5 local spacings of the bbox shell
        (meaningful for truncated unbounded domains)."""
        lo, hi = self.domain.bbox
        pts = self.nodes[idx]
        margin = 1.5 * self.node_spacing[idx]
        gap = np.minimum((pts - lo).min(axis=1), (hi - pts).min(axis=1))
        return gap <= margin

    def to_json_obj(self) -> dict:
        return {
            "format": GRAPH_FORMAT,
            "domain": {"kind": self.domain.kind, "params": self.domain.params},
            "resolution": {
                "h": self.res.h, "spacing_ratio": self.res.spacing_ratio,
                "neighbors": self.res.neighbors, "max_depth": self.res.max_depth,
                "clip": self.res.clip,
            },
            "seed": self.seed,
            "clip": self.clip,
            "nodes": self.nodes.tolist(),
            "node_d": self.node_d.tolist(),
            "node_spacing": self.node_spacing.tolist(),
            "edges": self.edges.tolist(),
            "weights": {k: w.tolist() for k, w in sorted(self._weights.items())},
        }

    def to_json_bytes(self) -> bytes:
        return json.dumps(self.to_json_obj(), sort_keys=True, separators=(",", ":")).encode()

    def save(self, path) -> None:
        with open(path, "wb") as f:
            f.write(self.to_json_bytes())


def _lattice(dom: DomainDescriptor, h: float) -> np.ndarray:
    lo, hi = dom.bbox
    mid = 0.5 * (lo + hi)
    axes = []
    for a in range(dom.dim):
        count = max(int(np.floor((hi[a] - lo[a]) / h)) + 1, 1)
        axes.append(mid[a] + (np.arange(count) - (count - 1) / 2.0) * h)
    grids = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([g.ravel() for g in grids])


def _child_offsets(dim: int, step: float) -> np.ndarray:
    signs = np.array(np.meshgrid(*([[-1.0, 1.0]] * dim), indexing="ij")).reshape(dim, -1).T
    return signs * step


def build_metric_graph(dom: DomainDescriptor, res: ResolutionSpec, seed: int,
                       density: Optional[DensityKind] = None,
                       quad_rtol: float = 1e-9) -> MetricGraph:
    """Deterministic Whitney-refined point cloud plus kNN edges.

    Level-0 lattice clipped to {d > clip}; points whose lattice spacing
    exceeds spacing_ratio*d are replaced by their 2^dim children, up to
    max_depth levels (still-inadequate deepest points are dropped so that
    every kept node satisfies the spacing rule).
    """
    if density is None:
        density = reciprocal_boundary_distance()
    clip = res.clip if res.clip is not None else dom.d_min_clip()

    pts_levels, d_levels, spacing_levels = [], [], []
    cur = _lattice(dom, res.h)
    cur_h = res.h
    for depth in range(res.max_depth + 1):
        if len(cur) == 0:
            break
        d = dom._dist(cur)
        inside = dom._contains(cur) & (d > clip)
        cur, d = cur[inside], d[inside]
        adequate = cur_h <= res.spacing_ratio * d
        keep = cur[adequate]
        if len(keep):
            pts_levels.append(keep)
            d_levels.append(d[adequate])
            spacing_levels.append(np.full(len(keep), cur_h))
        if depth == res.max_depth:
            break
        bad = cur[~adequate]
        if len(bad) == 0:
            break
        offs = _child_offsets(dom.dim, cur_h / 4.0)
        cur = (bad[:, None, :] + offs[None, :, :]).reshape(-1, dom.dim)
        cur_h = cur_h / 2.0
        if len(cur) > res.max_nodes * 4:
            raise EmptyDomainSample(
                f"refinement exploded past {res.max_nodes * 4} candidates; coarsen h or lower max_depth"
            )

    if not pts_levels:
        raise EmptyDomainSample("no lattice point satisfied the clip/spacing rule")
    nodes = np.vstack(pts_levels)
    node_d = np.concatenate(d_levels)
    node_spacing = np.concatenate(spacing_levels)
    if len(nodes) > res.max_nodes:
        raise EmptyDomainSample(f"{len(nodes)} nodes exceeds max_nodes={res.max_nodes}")

    tree = cKDTree(nodes)
    k = res.neighbors if res.neighbors is not None else 2 * dom.dim + 6
    k = min(k + 1, len(nodes))
    _, nbr = tree.query(nodes, k=k)
    src = np.repeat(np.arange(len(nodes)), nbr.shape[1])
    dst = nbr.ravel()
    keep = src != dst
    u = np.minimum(src[keep], dst[keep])
    v = np.maximum(src[keep], dst[keep])
    edges = np.unique(np.column_stack([u, v]), axis=0).astype(np.int32)

    edges = edges[_chord_inside(dom, nodes[edges[:, 0]], nodes[edges[:, 1]], clip)]

    graph = MetricGraph(
        domain=dom, res=res, seed=seed, nodes=nodes, node_d=node_d,
        node_spacing=node_spacing, edges=edges, clip=clip, _tree=tree,
    )
    _ensure_connected(graph, density, quad_rtol)
    graph.weights_for(density, quad_rtol)
    return graph


def _chord_inside(dom: DomainDescriptor, a: np.ndarray, b: np.ndarray, clip: float,
                  samples: int = 33) -> np.ndarray:
    """Screen: every probe along each chord is inside with d > clip and a
    Lipschitz margin covering the gap between probes."""
    if a.ndim == 1:
        a, b = a[None, :], b[None, :]
    t = np.linspace(0.0, 1.0, samples)
    pts = a[:, None, :] + t[None, :, None] * (b - a)[:, None, :]
    flat = pts.reshape(-1, a.shape[1])
    d = dom._dist(flat).reshape(len(a), samples)
    inside = dom._contains(flat).reshape(len(a), samples)
    seg = np.linalg.norm(b - a, axis=1)
    margin = clip + 0.5 * seg / (samples - 1)
    ok_end = inside[:, [0, -1]].all(axis=1) & (d[:, [0, -1]] > clip).all(axis=1)
    ok_mid = inside[:, 1:-1].all(axis=1) & (d[:, 1:-1] > margin[:, None]).all(axis=1)
    return ok_end & ok_mid


def _ensure_connected(graph: MetricGraph, density: DensityKind, quad_rtol: float) -> None:
    """Bridge stray components through valid chords or fail loudly."""
    for _ in range(16):
        u, v = graph.edges[:, 0], graph.edges[:, 1]
        mat = csr_matrix(
            (np.ones(2 * len(u)), (np.concatenate([u, v]), np.concatenate([v, u]))),
            shape=(graph.n_nodes, graph.n_nodes),
        )
        ncomp, labels = connected_components(mat, directed=False)
        if ncomp == 1:
            return
        sizes = np.bincount(labels)
        main = int(np.argmax(sizes))
        main_idx = np.where(labels == main)[0]
        main_tree = cKDTree(graph.nodes[main_idx])
        added = []
        for c in range(ncomp):
            if c == main:
                continue
            comp_idx = np.where(labels == c)[0]
            dist, j = main_tree.query(graph.nodes[comp_idx])
            best = int(np.argmin(dist))
            a, b = comp_idx[best], main_idx[j[best]]
            if _chord_inside(graph.domain, graph.nodes[a], graph.nodes[b], graph.clip)[0]:
                added.append((min(a, b), max(a, b)))
        if not added:
            raise DisconnectedSample(sorted(sizes.tolist(), reverse=True))
        graph.edges = np.unique(
            np.vstack([graph.edges, np.asarray(added, dtype=np.int32)]), axis=0
        )
        graph._weights.clear()
        graph._csr.clear()
    raise DisconnectedSample(sorted(np.bincount(labels).tolist(), reverse=True))


def snap_to_graph(graph: MetricGraph, x, density: DensityKind, rel_tol: float = 1e-9):
    """Wire a query point to nearby nodes with exactly-quadratured connector
    edges.  Returns (node_indices, connector_weights, euclid_lengths)."""
    x = np.asarray(x, dtype=float)
    d0, i0 = graph.tree().query(x)
    if d0 == 0.0:
        return np.array([int(i0)]), np.array([0.0]), np.array([0.0])
    radius = 2.0 * graph.node_spacing[int(i0)]
    cand = graph.tree().query_ball_point(x, r=radius * (1 + 1e-12))
    if not cand:
        cand = [int(i0)]
    cand = np.asarray(sorted(cand), dtype=np.int64)
    a = np.broadcast_to(x, (len(cand), len(x)))
    ok = _chord_inside(graph.domain, a, graph.nodes[cand], graph.clip)
    if not np.any(ok):
        raise Unreachable(f"no admissible connector from {x} into the sampled region")
    cand = cand[ok]
    a = a[ok]
    w = segment_integrals(graph.domain, a, graph.nodes[cand], density,
                          rel_tol=rel_tol, clip=graph.clip)
    lengths = np.linalg.norm(graph.nodes[cand] - x, axis=1)
    return cand, w, lengths


_GRAPH_CACHE: dict = {}


def build_metric_graph_cached(dom: DomainDescriptor, res: ResolutionSpec, seed: int,
                              density: Optional[DensityKind] = None) -> MetricGraph:
    if density is None:
        density = reciprocal_boundary_distance()
    key = (id(dom), res.key(), seed, density.key())
    g = _GRAPH_CACHE.get(key)
    if g is None:
        g = build_metric_graph(dom, res, seed, density)
        _GRAPH_CACHE[key] = g
    return g
