# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: multi-source Dijkstra on CSR graphs and
four-point hyperbolicity-defect scans over distance matrices."""

import numpy as np

cimport numpy as cnp
from libc.stdlib cimport free, malloc

cnp.import_array()

INF = float("inf")


cdef struct Heap:
    double *keys
    int *nodes
    Py_ssize_t size
    Py_ssize_t cap


cdef inline int heap_push(Heap *h, double key, int node) except -1:
    cdef Py_ssize_t i, parent
    cdef double *nk
    cdef int *nn
    if h.size == h.cap:
        h.cap *= 2
        nk = <double *> malloc(h.cap * sizeof(double))
        nn = <int *> malloc(h.cap * sizeof(int))
        if nk == NULL or nn == NULL:
            raise MemoryError()
        for i in range(h.size):
            nk[i] = h.keys[i]
            nn[i] = h.nodes[i]
        free(h.keys)
        free(h.nodes)
        h.keys = nk
        h.nodes = nn
    i = h.size
    h.size += 1
    while i > 0:
        parent = (i - 1) >> 1
        if h.keys[parent] <= key:
            break
        h.keys[i] = h.keys[parent]
        h.nodes[i] = h.nodes[parent]
        i = parent
    h.keys[i] = key
    h.nodes[i] = node
    return 0


cdef inline int heap_pop(Heap *h, double *key_out) noexcept:
    cdef int node = h.nodes[0]
    cdef double key, last_key
    cdef int last_node
    cdef Py_ssize_t i, child
    key_out[0] = h.keys[0]
    h.size -= 1
    if h.size == 0:
        return node
    last_key = h.keys[h.size]
    last_node = h.nodes[h.size]
    i = 0
    while True:
        child = 2 * i + 1
        if child >= h.size:
            break
        if child + 1 < h.size and h.keys[child + 1] < h.keys[child]:
            child += 1
        if h.keys[child] >= last_key:
            break
        h.keys[i] = h.keys[child]
        h.nodes[i] = h.nodes[child]
        i = child
    h.keys[i] = last_key
    h.nodes[i] = last_node
    return node


def dijkstra(cnp.int64_t[::1] indptr,
             cnp.int32_t[::1] indices,
             cnp.float64_t[::1] weights,
             cnp.int32_t[::1] sources,
             cnp.float64_t[::1] offsets,
             cnp.int32_t[::1] targets):
    """Multi-source Dijkstra with per-source initial offsets.

    Returns (dist, pred) float64/int32 arrays; pred is -1 at sources and
    unreached nodes.  If ``targets`` is nonempty the search stops once all
    of them are settled.
    """
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dist_arr = np.full(n, np.inf)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] pred_arr = np.full(n, -1, dtype=np.int32)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] settled_arr = np.zeros(n, dtype=np.uint8)
    cdef cnp.float64_t[::1] dist = dist_arr
    cdef cnp.int32_t[::1] pred = pred_arr
    cdef cnp.uint8_t[::1] settled = settled_arr
    cdef cnp.ndarray[cnp.int32_t, ndim=1] is_target_arr = np.zeros(n, dtype=np.int32)
    cdef cnp.int32_t[::1] is_target = is_target_arr

    cdef Heap h
    h.cap = 4 * (n + 16)
    h.size = 0
    h.keys = <double *> malloc(h.cap * sizeof(double))
    h.nodes = <int *> malloc(h.cap * sizeof(int))
    if h.keys == NULL or h.nodes == NULL:
        raise MemoryError()

    cdef Py_ssize_t i, e
    cdef int u, v, remaining = 0
    cdef double du, nd, key

    try:
        for i in range(targets.shape[0]):
            v = targets[i]
            if not is_target[v]:
                is_target[v] = 1
                remaining += 1
        for i in range(sources.shape[0]):
            u = sources[i]
            if offsets[i] < dist[u]:
                dist[u] = offsets[i]
                heap_push(&h, offsets[i], u)
        while h.size > 0:
            u = heap_pop(&h, &key)
            if settled[u]:
                continue
            settled[u] = 1
            if is_target[u]:
                remaining -= 1
                if remaining == 0:
                    break
            du = dist[u]
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                if settled[v]:
                    continue
                nd = du + weights[e]
                if nd < dist[v]:
                    dist[v] = nd
                    pred[v] = u
                    heap_push(&h, nd, v)
    finally:
        free(h.keys)
        free(h.nodes)
    return dist_arr, pred_arr


def four_point_scan_all(cnp.float64_t[:, ::1] d):
    """Exhaustive max over ordered quadruples (x, y, z, t) of
    min((x|y)_t, (y|z)_t) - (x|z)_t.  Returns (defect, (x, y, z, t))."""
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t t, y, x, z
    cdef double best = -np.inf
    cdef Py_ssize_t bx = 0, by = 0, bz = 0, bt = 0
    cdef double pxy, pyz, pxz, m, defect, dxt, dyt

    for t in range(n):
        for y in range(n):
            dyt = d[y, t]
            for x in range(n):
                dxt = d[x, t]
                pxy = 0.5 * (dxt + dyt - d[x, y])
                for z in range(n):
                    pyz = 0.5 * (dyt + d[z, t] - d[y, z])
                    m = pxy if pxy < pyz else pyz
                    pxz = 0.5 * (dxt + d[z, t] - d[x, z])
                    defect = m - pxz
                    if defect > best:
                        best = defect
                        bx = x
                        by = y
                        bz = z
                        bt = t
    return best, (bx, by, bz, bt)


def four_point_scan_quads(cnp.float64_t[:, ::1] d, cnp.int64_t[:, ::1] quads):
    """Max four-point defect over the given (m, 4) quadruple index rows."""
    cdef Py_ssize_t m = quads.shape[0]
    cdef Py_ssize_t i
    cdef Py_ssize_t x, y, z, t
    cdef double best = -np.inf
    cdef Py_ssize_t bi = 0
    cdef double pxy, pyz, pxz, mn, defect

    for i in range(m):
        x = quads[i, 0]
        y = quads[i, 1]
        z = quads[i, 2]
        t = quads[i, 3]
        pxy = 0.5 * (d[x, t] + d[y, t] - d[x, y])
        pyz = 0.5 * (d[y, t] + d[z, t] - d[y, z])
        pxz = 0.5 * (d[x, t] + d[z, t] - d[x, z])
        mn = pxy if pxy < pyz else pyz
        defect = mn - pxz
        if defect > best:
            best = defect
            bi = i
    return best, bi
