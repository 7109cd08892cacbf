"""Pure numpy implementation of the hot kernels.

Mirrors ``_kernels_c.pyx`` function for function; used when the compiled
extension is unavailable or ``AIRYGAP_PURE_PYTHON=1`` is set.
"""

import numpy as np

TAYLOR_TERMS = 40


def airy_table_eval(x, x_first, h, node_ai, node_aip):
    """Ai and Ai' by Taylor expansion about the nearest table node.

    The table holds (Ai, Ai') at ``x_first + i*h``; the ODE Ai'' = x Ai gives
    the recursion a[n] = (xc a[n-2] + a[n-3]) / (n (n-1)).
    """
    x = np.asarray(x, dtype=np.float64)
    idx = np.floor((x - x_first) / h + 0.5).astype(np.int64)
    idx = np.clip(idx, 0, len(node_ai) - 1)
    xc = x_first + idx * h
    t = x - xc

    a_m3 = np.zeros_like(x)
    a_m2 = node_ai[idx].astype(np.float64)
    a_m1 = node_aip[idx].astype(np.float64)
    ai = a_m2 + a_m1 * t
    aip = a_m1.copy()
    tp = t.copy()  # t**(n-1)
    for n in range(2, TAYLOR_TERMS):
        a_n = (xc * a_m2 + a_m3) / (n * (n - 1))
        aip += n * a_n * tp
        tp = tp * t
        ai += a_n * tp
        a_m3, a_m2, a_m1 = a_m2, a_m1, a_n
    return ai, aip


def airy_kernel_matrix(u, ai, aip, h0):
    """Symmetric Airy-kernel matrix on the node set ``u``.

    Off-diagonal pairs closer than ``h0`` use the first-order symmetric
    Taylor form; the diagonal is exact.
    """
    u = np.asarray(u, dtype=np.float64)
    du = u[:, None] - u[None, :]
    near = np.abs(du) <= h0
    safe = np.where(near, 1.0, du)
    K = (np.outer(ai, aip) - np.outer(aip, ai)) / safe
    if near.any():
        stable = np.outer(aip, aip) - 0.5 * (u[:, None] + u[None, :]) * np.outer(ai, ai)
        K = np.where(near, stable, K)
    K[np.diag_indices_from(K)] = aip * aip - u * ai * ai
    return K


def theta_sum_real(weights, vecs, z):
    """Sum_k weights[k] * cos(2 pi vecs[k].z) for real weights and real z."""
    phase = 2.0 * np.pi * (vecs @ np.asarray(z, dtype=np.float64))
    return float(np.sum(weights * np.cos(phase)))


def theta_pair_sum(coef, vecs, z, odd):
    """Sum_k coef[k] * f(2 pi vecs[k].z) with f = i sin if odd else cos."""
    phase = 2.0 * np.pi * (vecs @ np.asarray(z, dtype=np.complex128))
    if odd:
        return complex(np.sum(coef * (1j * np.sin(phase))))
    return complex(np.sum(coef * np.cos(phase)))
