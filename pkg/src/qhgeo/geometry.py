"""Domains, curves, and line integration.

A domain is described by an oracle for the distance to its boundary plus a
containment test and a bounding box; builtin kinds carry exact closed forms.
All evaluators are vectorized over (m, dim) point arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    DegenerateCurve,
    DimensionMismatch,
    SingularDensity,
)

CLIP_FACTOR = 1e-6  # boundary layer excluded from sampling, relative to bbox diameter


def as_point(x, dim: Optional[int] = None) -> np.ndarray:
    p = np.asarray(x, dtype=float)
    if p.ndim != 1 or p.shape[0] < 2:
        raise DimensionMismatch(f"point must be a vector of >= 2 coordinates, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise DimensionMismatch("point has non-finite coordinates")
    if dim is not None and p.shape[0] != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {p.shape[0]}")
    return p


def _as_batch(x, dim: int) -> np.ndarray:
    p = np.asarray(x, dtype=float)
    if p.ndim == 1:
        p = p[None, :]
    if p.ndim != 2 or p.shape[1] != dim:
        raise DimensionMismatch(f"expected points of dimension {dim}, got shape {p.shape}")
    return p


@dataclass(eq=False, frozen=True)
class DomainDescriptor:
    """A proper subdomain of R^n given by boundary-distance/containment oracles."""

    dim: int
    kind: str
    params: dict
    bbox: np.ndarray  # (2, dim): [lo; hi]
    bounded: bool
    _dist: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    _contains: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    _boundary_sample: Callable[[int, int], np.ndarray] = field(repr=False)

    def dist_to_boundary(self, x):
        """Unsigned Euclidean distance to the boundary (0 on it, defined outside too)."""
        batch = _as_batch(x, self.dim)
        d = np.asarray(self._dist(batch), dtype=float)
        return float(d[0]) if np.asarray(x).ndim == 1 else d

    def contains(self, x):
        batch = _as_batch(x, self.dim)
        c = np.asarray(self._contains(batch), dtype=bool)
        return bool(c[0]) if np.asarray(x).ndim == 1 else c

    def boundary_sample(self, count: int, seed: int) -> np.ndarray:
        """Deterministic sample of boundary points, shape (m, dim) with m <= count."""
        pts = np.asarray(self._boundary_sample(count, seed), dtype=float)
        return pts.reshape(-1, self.dim)

    def bbox_diameter(self) -> float:
        return float(np.linalg.norm(self.bbox[1] - self.bbox[0]))

    def d_min_clip(self) -> float:
        return CLIP_FACTOR * self.bbox_diameter()


def boundary_distance(dom: DomainDescriptor, x) -> float:
    """Distance from x to the domain boundary; exact for builtin kinds."""
    as_point(x, dom.dim)
    return dom.dist_to_boundary(x)


# ---------------------------------------------------------------------------
# builtin domain kinds


def _box(lo, hi) -> np.ndarray:
    return np.asarray([lo, hi], dtype=float)


def ball(center, radius: float) -> DomainDescriptor:
    c = as_point(center)
    r = float(radius)
    if r <= 0:
        raise ValueError("radius must be positive")

    def dist(p):
        return np.abs(r - np.linalg.norm(p - c, axis=1))

    def contains(p):
        return np.linalg.norm(p - c, axis=1) < r

    def bsample(count, seed):
        return c + r * _sphere_points(len(c), count, seed)

    return DomainDescriptor(
        dim=len(c), kind="ball", params={"center": c.tolist(), "radius": r},
        bbox=_box(c - r, c + r), bounded=True,
        _dist=dist, _contains=contains, _boundary_sample=bsample,
    )


def punctured_ball(center, radius: float) -> DomainDescriptor:
    c = as_point(center)
    r = float(radius)
    if r <= 0:
        raise ValueError("radius must be positive")

    def dist(p):
        rho = np.linalg.norm(p - c, axis=1)
        inside = rho <= r
        return np.where(inside, np.minimum(rho, r - rho), rho - r)

    def contains(p):
        rho = np.linalg.norm(p - c, axis=1)
        return (rho > 0) & (rho < r)

    def bsample(count, seed):
        sphere = c + r * _sphere_points(len(c), max(count - 1, 1), seed)
        return np.vstack([c[None, :], sphere])

    return DomainDescriptor(
        dim=len(c), kind="punctured_ball", params={"center": c.tolist(), "radius": r},
        bbox=_box(c - r, c + r), bounded=True,
        _dist=dist, _contains=contains, _boundary_sample=bsample,
    )


def annulus(center, r_in: float, r_out: float) -> DomainDescriptor:
    c = as_point(center)
    ri, ro = float(r_in), float(r_out)
    if not 0 < ri < ro:
        raise ValueError("need 0 < r_in < r_out")

    def dist(p):
        rho = np.linalg.norm(p - c, axis=1)
        return np.where(
            rho < ri, ri - rho, np.where(rho > ro, rho - ro, np.minimum(rho - ri, ro - rho))
        )

    def contains(p):
        rho = np.linalg.norm(p - c, axis=1)
        return (rho > ri) & (rho < ro)

    def bsample(count, seed):
        n_in = count // 2
        inner = c + ri * _sphere_points(len(c), max(n_in, 1), seed)
        outer = c + ro * _sphere_points(len(c), max(count - n_in, 1), seed + 1)
        return np.vstack([inner, outer])

    return DomainDescriptor(
        dim=len(c), kind="annulus", params={"center": c.tolist(), "r_in": ri, "r_out": ro},
        bbox=_box(c - ro, c + ro), bounded=True,
        _dist=dist, _contains=contains, _boundary_sample=bsample,
    )


def half_space(normal, offset: float = 0.0, extent: float = 8.0) -> DomainDescriptor:
    """Points x with <normal, x> > offset, truncated to a box of half-width
    ``extent`` around the foot point offset*normal."""
    nrm = as_point(normal)
    nrm = nrm / np.linalg.norm(nrm)
    off = float(offset)
    foot = off * nrm

    def dist(p):
        return np.abs(p @ nrm - off)

    def contains(p):
        return p @ nrm - off > 0

    def bsample(count, seed):
        rng = np.random.default_rng(seed)
        raw = rng.uniform(foot - extent, foot + extent, size=(count, len(nrm)))
        return raw - np.outer(raw @ nrm - off, nrm)

    return DomainDescriptor(
        dim=len(nrm), kind="half_space",
        params={"normal": nrm.tolist(), "offset": off, "extent": float(extent)},
        bbox=_box(foot - extent, foot + extent), bounded=False,
        _dist=dist, _contains=contains, _boundary_sample=bsample,
    )


def punctured_space(center, extent: float = 4.0) -> DomainDescriptor:
    c = as_point(center)

    def dist(p):
        return np.linalg.norm(p - c, axis=1)

    def contains(p):
        return np.linalg.norm(p - c, axis=1) > 0

    def bsample(count, seed):
        return c[None, :]

    return DomainDescriptor(
        dim=len(c), kind="punctured_space",
        params={"center": c.tolist(), "extent": float(extent)},
        bbox=_box(c - extent, c + extent), bounded=False,
        _dist=dist, _contains=contains, _boundary_sample=bsample,
    )


_AXES = {"x": 0, "y": 1, "z": 2}


def complement_of_axis_line(axis="z", extent: float = 4.0) -> DomainDescriptor:
    """R^3 minus the coordinate axis line through the origin."""
    ax = _AXES.get(axis, axis)
    if ax not in (0, 1, 2):
        raise ValueError(f"axis must be one of x|y|z, got {axis!r}")
    perp = [i for i in range(3) if i != ax]

    def dist(p):
        return np.linalg.norm(p[:, perp], axis=1)

    def contains(p):
        return np.linalg.norm(p[:, perp], axis=1) > 0

    def bsample(count, seed):
        rng = np.random.default_rng(seed)
        pts = np.zeros((count, 3))
        pts[:, ax] = rng.uniform(-extent, extent, size=count)
        return pts

    lo = np.full(3, -extent)
    hi = np.full(3, extent)
    return DomainDescriptor(
        dim=3, kind="complement_of_axis_line",
        params={"axis": "xyz"[ax], "extent": float(extent)},
        bbox=_box(lo, hi), bounded=False,
        _dist=dist, _contains=contains, _boundary_sample=bsample,
    )


def slab(normal, lo: float, hi: float, extent: float = 8.0) -> DomainDescriptor:
    """Points with lo < <normal, x> < hi (two parallel hyperplanes)."""
    nrm = as_point(normal)
    nrm = nrm / np.linalg.norm(nrm)
    lo, hi = float(lo), float(hi)
    if not lo < hi:
        raise ValueError("need lo < hi")
    mid = 0.5 * (lo + hi) * nrm

    def dist(p):
        s = p @ nrm
        return np.abs(np.minimum(s - lo, hi - s))

    def contains(p):
        s = p @ nrm
        return (s > lo) & (s < hi)

    def bsample(count, seed):
        rng = np.random.default_rng(seed)
        raw = rng.uniform(mid - extent, mid + extent, size=(count, len(nrm)))
        level = np.where(np.arange(count) % 2 == 0, lo, hi)
        return raw - np.outer(raw @ nrm - level, nrm)

    return DomainDescriptor(
        dim=len(nrm), kind="slab",
        params={"normal": nrm.tolist(), "lo": lo, "hi": hi, "extent": float(extent)},
        bbox=_box(mid - extent, mid + extent), bounded=False,
        _dist=dist, _contains=contains, _boundary_sample=bsample,
    )


def custom_domain(dim, dist, contains, bbox, bounded=True, boundary_sample=None,
                  kind="custom", params=None) -> DomainDescriptor:
    """Wrap user oracles; accuracy is whatever the supplied oracles deliver."""

    def bsample(count, seed):
        if boundary_sample is None:
            raise NotImplementedError("custom domain has no boundary sampler")
        return boundary_sample(count, seed)

    return DomainDescriptor(
        dim=dim, kind=kind, params=dict(params or {}),
        bbox=np.asarray(bbox, dtype=float), bounded=bounded,
        _dist=dist, _contains=contains, _boundary_sample=bsample,
    )


BUILTIN_DOMAINS = {
    "ball": ball,
    "punctured_ball": punctured_ball,
    "annulus": annulus,
    "half_space": half_space,
    "punctured_space": punctured_space,
    "complement_of_axis_line": complement_of_axis_line,
    "slab": slab,
}


def _sphere_points(dim: int, count: int, seed: int) -> np.ndarray:
    """Deterministic unit-sphere sample (Gaussian normalized)."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((count, dim))
    nrm = np.linalg.norm(v, axis=1, keepdims=True)
    nrm[nrm == 0] = 1.0
    return v / nrm


def fibonacci_sphere(count: int) -> np.ndarray:
    """Low-discrepancy points on the unit 2-sphere."""
    i = np.arange(count) + 0.5
    phi = math.pi * (3.0 - math.sqrt(5.0)) * i
    z = 1.0 - 2.0 * i / count
    r = np.sqrt(np.maximum(1.0 - z * z, 0.0))
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def circle_points(count: int) -> np.ndarray:
    theta = 2.0 * math.pi * (np.arange(count) + 0.5) / count
    return np.column_stack([np.cos(theta), np.sin(theta)])


# ---------------------------------------------------------------------------
# curves


@dataclass(frozen=True)
class Polyline:
    """Piecewise-linear curve; vertices are rows of an (m, dim) array."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[0] < 2:
            raise DegenerateCurve(f"polyline needs >= 2 vertices, got shape {v.shape}")
        if np.any(np.linalg.norm(np.diff(v, axis=0), axis=1) == 0):
            raise DegenerateCurve("consecutive vertices coincide")
        object.__setattr__(self, "vertices", v)

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    def segment_lengths(self) -> np.ndarray:
        return np.linalg.norm(np.diff(self.vertices, axis=0), axis=1)


def curve_length(poly: Polyline) -> float:
    """Euclidean length of the polyline."""
    return float(poly.segment_lengths().sum())


# ---------------------------------------------------------------------------
# densities and line integrals


@dataclass(frozen=True)
class DensityKind:
    """Integrand along curves, expressed per unit Euclidean arclength.

    kinds: "constant" (value c), "reciprocal" (1/d, the quasihyperbolic
    weight), "bhk" (exp(-eps*k(.,w)) per unit *k*-arclength, i.e.
    exp(-eps*k)/d per Euclidean arclength; needs a k oracle).
    """

    kind: str
    value: float = 1.0
    eps: float = 0.0
    k_oracle: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)

    def needs_boundary_distance(self) -> bool:
        return self.kind in ("reciprocal", "bhk")

    def evaluate(self, dom: DomainDescriptor, points: np.ndarray, d=None) -> np.ndarray:
        if self.kind == "constant":
            return np.full(len(points), self.value)
        if d is None:
            d = dom._dist(points)
        if self.kind == "reciprocal":
            return 1.0 / d
        if self.kind == "bhk":
            k = np.asarray(self.k_oracle(points), dtype=float)
            return np.exp(-self.eps * k) / d
        raise ValueError(f"unknown density kind {self.kind!r}")

    def key(self) -> str:
        if self.kind == "constant":
            return f"constant:{self.value!r}"
        if self.kind == "reciprocal":
            return "reciprocal"
        return f"bhk:{self.eps!r}"


def constant_density(c: float = 1.0) -> DensityKind:
    return DensityKind(kind="constant", value=float(c))


def reciprocal_boundary_distance() -> DensityKind:
    return DensityKind(kind="reciprocal")


def bhk_density(eps: float, k_oracle, w=None) -> DensityKind:
    return DensityKind(kind="bhk", eps=float(eps), k_oracle=k_oracle)


DEFAULT_QUAD_RTOL = 1e-9
_MAX_DOUBLINGS = 14


def segment_integrals(dom, starts, ends, density: DensityKind,
                      rel_tol: float = DEFAULT_QUAD_RTOL, clip: Optional[float] = None
                      ) -> np.ndarray:
    """Adaptive composite-Simpson integrals of the density along straight
    segments, batched; converged when doubling the panel count moves a
    segment's value by at most rel_tol (relative)."""
    starts = np.asarray(starts, dtype=float)
    ends = np.asarray(ends, dtype=float)
    if starts.ndim == 1:
        starts = starts[None, :]
        ends = ends[None, :]
    n = len(starts)
    lengths = np.linalg.norm(ends - starts, axis=1)
    if clip is None:
        clip = dom.d_min_clip()

    if density.kind == "constant":
        return density.value * lengths

    check_d = density.needs_boundary_distance()

    def composite(idx, panels):
        a, b = starts[idx], ends[idx]
        m = 2 * panels + 1
        t = np.linspace(0.0, 1.0, m)
        pts = a[:, None, :] + t[None, :, None] * (b - a)[:, None, :]
        flat = pts.reshape(-1, pts.shape[-1])
        d = dom._dist(flat) if check_d else None
        if check_d and np.any(d <= clip):
            raise SingularDensity(
                f"quadrature node within clip {clip:.3g} of the boundary"
            )
        vals = density.evaluate(dom, flat, d=d).reshape(len(idx), m)
        w = np.ones(m)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        return (vals @ w) * lengths[idx] / (3.0 * (m - 1))

    result = np.zeros(n)
    active = np.arange(n)
    prev = composite(active, 2)
    panels = 4
    for _ in range(_MAX_DOUBLINGS):
        cur = composite(active, panels)
        err = np.abs(cur - prev)
        ok = err <= rel_tol * np.maximum(np.abs(cur), 1e-300)
        result[active[ok]] = cur[ok]
        active = active[~ok]
        if len(active) == 0:
            break
        prev = cur[~ok]
        panels *= 2
    else:
        result[active] = prev  # accept best effort at the doubling cap
    return result


def line_integral(dom: DomainDescriptor, poly: Polyline, density: DensityKind,
                  rel_tol: float = DEFAULT_QUAD_RTOL, clip: Optional[float] = None) -> float:
    """Integral of the density along the polyline's arclength."""
    if poly.dim != dom.dim:
        raise DimensionMismatch(f"curve dim {poly.dim} != domain dim {dom.dim}")
    v = poly.vertices
    return float(segment_integrals(dom, v[:-1], v[1:], density, rel_tol, clip).sum())
