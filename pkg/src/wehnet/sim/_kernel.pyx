# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled slot kernel: nearest transmitter, interference and harvestable power.

Mirrors ``_kernel_py.slot_kernel`` exactly in semantics; see that module for
the contract.
"""
import numpy as np

from libc.math cimport fabs, pow, sqrt, INFINITY


def slot_kernel(const double[:, ::1] rx, const double[:, ::1] tx,
                const double[:, ::1] fades, double side, double alpha):
    cdef Py_ssize_t k, i
    cdef Py_ssize_t n_rx = rx.shape[0]
    cdef Py_ssize_t n_tx = tx.shape[0]
    cdef double half = 0.5 * side
    cdef double dx, dy, d2, best, gain, h, interf, harvest
    cdef Py_ssize_t best_i
    cdef bint alpha4 = alpha == 4.0
    cdef double e = -0.5 * alpha

    idx_arr = np.full(n_rx, -1, dtype=np.int64)
    dist_arr = np.full(n_rx, np.inf, dtype=np.float64)
    hc_arr = np.zeros(n_rx, dtype=np.float64)
    interf_arr = np.zeros(n_rx, dtype=np.float64)
    harvest_arr = np.zeros(n_rx, dtype=np.float64)
    d2buf_arr = np.empty(n_tx, dtype=np.float64)

    cdef long long[::1] idx = idx_arr
    cdef double[::1] dist = dist_arr
    cdef double[::1] hc = hc_arr
    cdef double[::1] interf_out = interf_arr
    cdef double[::1] harvest_out = harvest_arr
    cdef double[::1] d2buf = d2buf_arr

    if n_tx == 0:
        return idx_arr, dist_arr, hc_arr, interf_arr, harvest_arr

    for k in range(n_rx):
        best = INFINITY
        best_i = 0
        for i in range(n_tx):
            dx = fabs(rx[k, 0] - tx[i, 0])
            if dx > half:
                dx = side - dx
            dy = fabs(rx[k, 1] - tx[i, 1])
            if dy > half:
                dy = side - dy
            d2 = dx * dx + dy * dy
            d2buf[i] = d2
            if d2 < best:
                best = d2
                best_i = i
        interf = 0.0
        harvest = 0.0
        for i in range(n_tx):
            d2 = d2buf[i]
            h = fades[k, i]
            if alpha4:
                gain = 1.0 / (d2 * d2)
            else:
                gain = pow(d2, e)
            if i != best_i:
                interf += h * gain
            if d2 <= 1.0:
                harvest += h
            else:
                harvest += h * gain
        idx[k] = best_i
        dist[k] = sqrt(best)
        hc[k] = fades[k, best_i]
        interf_out[k] = interf
        harvest_out[k] = harvest

    return idx_arr, dist_arr, hc_arr, interf_arr, harvest_arr
