"""Numba-compiled kernels: fused loops over heads and positions.

Matches kernels_numpy exactly (same math, loop order chosen to avoid the
large temporaries the vectorized path allocates).  First call per process
pays cache-load/compile cost; results are bitwise-stable across runs.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def mha_forward(q, k, v, n_heads):
    n_q, width = q.shape
    n_k = k.shape[0]
    dk = width // n_heads
    scale = 1.0 / math.sqrt(dk)
    ctx = np.empty((n_q, width))
    attn = np.empty((n_heads, n_q, n_k))
    for h in range(n_heads):
        c0 = h * dk
        for i in range(n_q):
            mx = -np.inf
            for j in range(n_k):
                s = 0.0
                for t in range(dk):
                    s += q[i, c0 + t] * k[j, c0 + t]
                s *= scale
                attn[h, i, j] = s
                if s > mx:
                    mx = s
            z = 0.0
            for j in range(n_k):
                e = math.exp(attn[h, i, j] - mx)
                attn[h, i, j] = e
                z += e
            for j in range(n_k):
                attn[h, i, j] /= z
            for t in range(dk):
                acc = 0.0
                for j in range(n_k):
                    acc += attn[h, i, j] * v[j, c0 + t]
                ctx[i, c0 + t] = acc
    return ctx, attn


@njit(cache=True)
def mha_backward(d_out, q, k, v, attn, n_heads):
    n_q, width = q.shape
    n_k = k.shape[0]
    dk = width // n_heads
    scale = 1.0 / math.sqrt(dk)
    dq = np.zeros((n_q, width))
    dk_ = np.zeros((n_k, width))
    dv = np.zeros((n_k, width))
    d_score_row = np.empty(n_k)
    for h in range(n_heads):
        c0 = h * dk
        for i in range(n_q):
            # d(attn row) and its softmax pullback
            dot = 0.0
            for j in range(n_k):
                da = 0.0
                for t in range(dk):
                    da += d_out[i, c0 + t] * v[j, c0 + t]
                d_score_row[j] = da
                dot += da * attn[h, i, j]
            for j in range(n_k):
                d_score_row[j] = attn[h, i, j] * (d_score_row[j] - dot)
            for j in range(n_k):
                a = attn[h, i, j]
                ds = d_score_row[j] * scale
                for t in range(dk):
                    dv[j, c0 + t] += a * d_out[i, c0 + t]
                    dq[i, c0 + t] += ds * k[j, c0 + t]
                    dk_[j, c0 + t] += ds * q[i, c0 + t]
    return dq, dk_, dv


@njit(cache=True)
def layer_norm_forward(x, gamma, beta, eps):
    n, d = x.shape
    y = np.empty((n, d))
    mean = np.empty(n)
    rstd = np.empty(n)
    for i in range(n):
        m = 0.0
        for j in range(d):
            m += x[i, j]
        m /= d
        var = 0.0
        for j in range(d):
            diff = x[i, j] - m
            var += diff * diff
        var /= d
        r = 1.0 / math.sqrt(var + eps)
        mean[i] = m
        rstd[i] = r
        for j in range(d):
            y[i, j] = (x[i, j] - m) * r * gamma[j] + beta[j]
    return y, mean, rstd


@njit(cache=True)
def layer_norm_backward(dy, x, gamma, mean, rstd):
    n, d = x.shape
    dx = np.empty((n, d))
    dgamma = np.zeros(d)
    dbeta = np.zeros(d)
    for i in range(n):
        m = mean[i]
        r = rstd[i]
        s1 = 0.0
        s2 = 0.0
        for j in range(d):
            xhat = (x[i, j] - m) * r
            dxh = dy[i, j] * gamma[j]
            dgamma[j] += dy[i, j] * xhat
            dbeta[j] += dy[i, j]
            s1 += dxh
            s2 += dxh * xhat
        s1 /= d
        s2 /= d
        for j in range(d):
            xhat = (x[i, j] - m) * r
            dx[i, j] = r * (dy[i, j] * gamma[j] - s1 - xhat * s2)
    return dx, dgamma, dbeta
