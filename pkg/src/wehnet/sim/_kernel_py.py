"""NumPy implementation of the slot kernel (fallback when the extension is absent)."""
from __future__ import annotations

import numpy as np

_CHUNK_PAIRS = 2_000_000


def slot_kernel(rx, tx, fades, side, alpha):
    """Per-receiver nearest transmitter, interference and harvestable power.

    Parameters
    ----------
    rx, tx : (K, 2) and (N, 2) float arrays of torus coordinates.
    fades : (K, N) power fades, ``fades[k, i]`` for the link tx i -> rx k.
    side : torus side length.
    alpha : path-loss exponent.

    Returns
    -------
    nearest index (ties to the lowest index), nearest distance, nearest fade,
    sum_{i != nearest} h_i d_i^-alpha, and sum_i h_i min(1, d_i^-alpha).
    Everything is normalized to unit transmit power.
    """
    rx = np.ascontiguousarray(rx, dtype=np.float64)
    tx = np.ascontiguousarray(tx, dtype=np.float64)
    n_rx, n_tx = rx.shape[0], tx.shape[0]
    idx = np.full(n_rx, -1, dtype=np.int64)
    dist = np.full(n_rx, np.inf)
    hc = np.zeros(n_rx)
    interf = np.zeros(n_rx)
    harvest = np.zeros(n_rx)
    if n_tx == 0 or n_rx == 0:
        return idx, dist, hc, interf, harvest

    half = 0.5 * side
    step = max(1, _CHUNK_PAIRS // n_tx)
    for start in range(0, n_rx, step):
        stop = min(start + step, n_rx)
        dx = np.abs(rx[start:stop, 0, None] - tx[None, :, 0])
        dx = np.where(dx > half, side - dx, dx)
        dy = np.abs(rx[start:stop, 1, None] - tx[None, :, 1])
        dy = np.where(dy > half, side - dy, dy)
        d2 = dx * dx + dy * dy
        best = np.argmin(d2, axis=1)
        rows = np.arange(stop - start)
        h = fades[start:stop]
        gain = 1.0 / (d2 * d2) if alpha == 4.0 else d2 ** (-0.5 * alpha)
        contrib = h * gain
        bounded = np.where(d2 <= 1.0, h, contrib)
        contrib[rows, best] = 0.0
        idx[start:stop] = best
        dist[start:stop] = np.sqrt(d2[rows, best])
        hc[start:stop] = h[rows, best]
        interf[start:stop] = contrib.sum(axis=1)
        harvest[start:stop] = bounded.sum(axis=1)
    return idx, dist, hc, interf, harvest
