"""Kernel backend selection: compiled extension if importable, else the
pure-Python fallback.  ``QHGEO_PURE=1`` forces the fallback."""

import os

import numpy as np

if os.environ.get("QHGEO_PURE", "") == "1":
    from . import _pykernels as _impl

    BACKEND = "pure"
else:
    try:
        from . import _ckernels as _impl

        BACKEND = "compiled"
    except ImportError:
        from . import _pykernels as _impl

        BACKEND = "pure"

_EMPTY_I32 = np.empty(0, dtype=np.int32)
_EMPTY_F64 = np.empty(0, dtype=np.float64)


def dijkstra(indptr, indices, weights, sources, offsets=None, targets=None):
    """Multi-source shortest paths on a CSR graph.

    sources/offsets give per-source initial distances (0 by default);
    targets, when given, allow early exit once all are settled.
    Returns (dist, pred).
    """
    sources = np.ascontiguousarray(sources, dtype=np.int32)
    if offsets is None:
        offsets = np.zeros(len(sources))
    offsets = np.ascontiguousarray(offsets, dtype=np.float64)
    if targets is None:
        targets = _EMPTY_I32
    else:
        targets = np.ascontiguousarray(targets, dtype=np.int32)
    return _impl.dijkstra(
        np.ascontiguousarray(indptr, dtype=np.int64),
        np.ascontiguousarray(indices, dtype=np.int32),
        np.ascontiguousarray(weights, dtype=np.float64),
        sources,
        offsets,
        targets,
    )


def four_point_scan_all(dist_matrix):
    d = np.ascontiguousarray(dist_matrix, dtype=np.float64)
    return _impl.four_point_scan_all(d)


def four_point_scan_quads(dist_matrix, quads):
    d = np.ascontiguousarray(dist_matrix, dtype=np.float64)
    q = np.ascontiguousarray(quads, dtype=np.int64)
    return _impl.four_point_scan_quads(d, q)
