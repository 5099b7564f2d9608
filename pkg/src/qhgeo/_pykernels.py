"""Pure-Python/numpy fallback for the compiled kernels.

Same contracts as ``_ckernels``; used when the extension is unavailable or
when ``QHGEO_PURE=1`` forces it.
"""

from heapq import heappop, heappush

import numpy as np


def dijkstra(indptr, indices, weights, sources, offsets, targets):
    n = len(indptr) - 1
    dist = np.full(n, np.inf)
    pred = np.full(n, -1, dtype=np.int32)
    settled = np.zeros(n, dtype=bool)
    is_target = np.zeros(n, dtype=bool)
    is_target[np.asarray(targets, dtype=np.int64)] = True
    remaining = int(is_target.sum())

    heap = []
    for u, off in zip(sources, offsets):
        u = int(u)
        off = float(off)
        if off < dist[u]:
            dist[u] = off
            heappush(heap, (off, u))
    while heap:
        du, u = heappop(heap)
        if settled[u]:
            continue
        settled[u] = True
        if is_target[u]:
            remaining -= 1
            if remaining == 0:
                break
        for e in range(indptr[u], indptr[u + 1]):
            v = indices[e]
            if settled[v]:
                continue
            nd = du + weights[e]
            if nd < dist[v]:
                dist[v] = nd
                pred[v] = u
                heappush(heap, (nd, int(v)))
    return dist, pred


def four_point_scan_all(d):
    d = np.asarray(d, dtype=float)
    n = d.shape[0]
    best = -np.inf
    witness = (0, 0, 0, 0)
    for t in range(n):
        # products with basepoint t: P[i, j] = (i|j)_t
        p = 0.5 * (d[:, t][:, None] + d[:, t][None, :] - d)
        for y in range(n):
            defect = np.minimum.outer(p[:, y], p[y, :]) - p
            i = np.unravel_index(np.argmax(defect), defect.shape)
            if defect[i] > best:
                best = float(defect[i])
                witness = (int(i[0]), y, int(i[1]), t)
    return best, witness


def four_point_scan_quads(d, quads):
    d = np.asarray(d, dtype=float)
    quads = np.asarray(quads, dtype=np.int64)
    x, y, z, t = quads[:, 0], quads[:, 1], quads[:, 2], quads[:, 3]
    pxy = 0.5 * (d[x, t] + d[y, t] - d[x, y])
    pyz = 0.5 * (d[y, t] + d[z, t] - d[y, z])
    pxz = 0.5 * (d[x, t] + d[z, t] - d[x, z])
    defect = np.minimum(pxy, pyz) - pxz
    i = int(np.argmax(defect))
    return float(defect[i]), i
