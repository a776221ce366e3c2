"""Pure-numpy reference kernels.

Same contracts as kernels_numba; this module is the fallback when numba is
unavailable or when ``MCNER_BACKEND=numpy`` is set.  All arrays are float64.
"""

from __future__ import annotations

import numpy as np


def mha_forward(q: np.ndarray, k: np.ndarray, v: np.ndarray, n_heads: int):
    """Scaled dot-product attention over pre-projected inputs.

    q: (n_q, width), k/v: (n_k, width) with width = n_heads * head_dim.
    Returns (context (n_q, width), attention weights (n_heads, n_q, n_k)).
    """
    n_q, width = q.shape
    n_k = k.shape[0]
    dk = width // n_heads
    qh = q.reshape(n_q, n_heads, dk).transpose(1, 0, 2)
    kh = k.reshape(n_k, n_heads, dk).transpose(1, 0, 2)
    vh = v.reshape(n_k, n_heads, dk).transpose(1, 0, 2)
    scores = qh @ kh.transpose(0, 2, 1) / np.sqrt(dk)
    scores -= scores.max(axis=2, keepdims=True)
    attn = np.exp(scores)
    attn /= attn.sum(axis=2, keepdims=True)
    ctx = attn @ vh
    return np.ascontiguousarray(ctx.transpose(1, 0, 2).reshape(n_q, width)), attn


def mha_backward(d_out: np.ndarray, q: np.ndarray, k: np.ndarray, v: np.ndarray,
                 attn: np.ndarray, n_heads: int):
    """Gradients of mha_forward w.r.t. q, k, v given d(context)."""
    n_q, width = q.shape
    n_k = k.shape[0]
    dk = width // n_heads
    scale = 1.0 / np.sqrt(dk)
    qh = q.reshape(n_q, n_heads, dk).transpose(1, 0, 2)
    kh = k.reshape(n_k, n_heads, dk).transpose(1, 0, 2)
    vh = v.reshape(n_k, n_heads, dk).transpose(1, 0, 2)
    d_ctx = d_out.reshape(n_q, n_heads, dk).transpose(1, 0, 2)
    d_attn = d_ctx @ vh.transpose(0, 2, 1)
    dv = attn.transpose(0, 2, 1) @ d_ctx
    # softmax Jacobian applied row-wise
    d_scores = attn * (d_attn - (d_attn * attn).sum(axis=2, keepdims=True))
    dq = (d_scores @ kh) * scale
    dk_ = (d_scores.transpose(0, 2, 1) @ qh) * scale
    to_flat = lambda a, n: np.ascontiguousarray(a.transpose(1, 0, 2).reshape(n, width))
    return to_flat(dq, n_q), to_flat(dk_, n_k), to_flat(dv, n_k)


def layer_norm_forward(x: np.ndarray, gamma: np.ndarray, beta: np.ndarray, eps: float):
    """Row-wise layer norm. Returns (y, mean (n,), rstd (n,))."""
    mean = x.mean(axis=1)
    var = x.var(axis=1)
    rstd = 1.0 / np.sqrt(var + eps)
    xhat = (x - mean[:, None]) * rstd[:, None]
    return xhat * gamma + beta, mean, rstd


def layer_norm_backward(dy: np.ndarray, x: np.ndarray, gamma: np.ndarray,
                        mean: np.ndarray, rstd: np.ndarray):
    """Gradients of layer_norm_forward: (dx, dgamma, dbeta)."""
    xhat = (x - mean[:, None]) * rstd[:, None]
    dgamma = (dy * xhat).sum(axis=0)
    dbeta = dy.sum(axis=0)
    dxhat = dy * gamma
    dx = rstd[:, None] * (
        dxhat
        - dxhat.mean(axis=1, keepdims=True)
        - xhat * (dxhat * xhat).mean(axis=1, keepdims=True)
    )
    return dx, dgamma, dbeta
