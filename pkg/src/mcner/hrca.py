"""Three-step reasoning over the separated hidden states.

One layer runs, in order: (1) self-attention over the question states,
(2) cross-attention that reads the option states against the reviewed
question, (3) cross-attention that locates answers in the passage states
against the read options.  Every attention is multi-head scaled dot-product;
each step has its own projection weights, optionally wrapped in a residual
connection plus layer norm.  Layers repeat on the updated segments and the
enriched passage states come out.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Mapping

import numpy as np

from . import autograd as ag
from .autograd import Tensor

if TYPE_CHECKING:
    from .encoder import HiddenStates

STEP_NAMES = ("review", "read", "find")


@dataclass(frozen=True)
class HrcaConfig:
    n_heads: int = 8
    head_dim: int = 64
    n_layers: int = 1
    residual: bool = True

    def __post_init__(self):
        if self.n_heads < 1 or self.head_dim < 1 or self.n_layers < 1:
            raise ValueError("n_heads, head_dim and n_layers must all be >= 1")

    @property
    def width(self) -> int:
        return self.n_heads * self.head_dim


def xavier(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


_ATTN_KEYS = ("wq", "wk", "wv", "wo", "bq", "bk", "bv", "bo", "ln.g", "ln.b")


def subparams(params: Mapping[str, Tensor], prefix: str) -> dict[str, Tensor]:
    """Attention-step view of a flat parameter dict under a dotted prefix."""
    out = {}
    for key in _ATTN_KEYS:
        tensor = params.get(f"{prefix}.{key}")
        if tensor is not None:
            out[key] = tensor
    if not out:
        raise KeyError(f"no parameters under prefix {prefix!r}")
    return out


def init_attention_params(rng: np.random.Generator, d: int, width: int, prefix: str) -> dict[str, Tensor]:
    p = {
        f"{prefix}.wq": ag.parameter(xavier(rng, d, width)),
        f"{prefix}.wk": ag.parameter(xavier(rng, d, width)),
        f"{prefix}.wv": ag.parameter(xavier(rng, d, width)),
        f"{prefix}.wo": ag.parameter(xavier(rng, width, d)),
        f"{prefix}.bq": ag.parameter(np.zeros(width)),
        f"{prefix}.bk": ag.parameter(np.zeros(width)),
        f"{prefix}.bv": ag.parameter(np.zeros(width)),
        f"{prefix}.bo": ag.parameter(np.zeros(d)),
    }
    return p


def init_layer_norm_params(d: int, prefix: str) -> dict[str, Tensor]:
    return {f"{prefix}.g": ag.parameter(np.ones(d)), f"{prefix}.b": ag.parameter(np.zeros(d))}


def init_hrca_params(rng: np.random.Generator, d: int, config: HrcaConfig) -> dict[str, Tensor]:
    params: dict[str, Tensor] = {}
    for layer in range(config.n_layers):
        for step in STEP_NAMES:
            prefix = f"hrca.{layer}.{step}"
            params.update(init_attention_params(rng, d, config.width, prefix))
            if config.residual:
                params.update(init_layer_norm_params(d, f"{prefix}.ln"))
    return params


def attention(
    queries: Tensor,
    keys: Tensor,
    values: Tensor,
    params: Mapping[str, Tensor],
    n_heads: int,
    return_weights: bool = False,
):
    """Multi-head scaled dot-product attention with projections.

    ``params`` holds wq/wk/wv (d_in, width), wo (width, d_out) and biases.
    Per head, score rows are softmax-normalized; head contexts are
    concatenated and output-projected.
    """
    if keys.shape[0] != values.shape[0]:
        raise ValueError("key and value row counts differ")
    q = ag.linear(queries, params["wq"], params["bq"])
    k = ag.linear(keys, params["wk"], params["bk"])
    v = ag.linear(values, params["wv"], params["bv"])
    ctx, weights = ag.mha(q, k, v, n_heads)
    out = ag.linear(ctx, params["wo"], params["bo"])
    if return_weights:
        return out, weights
    return out


def _step(x_q: Tensor, x_kv: Tensor, params: Mapping[str, Tensor], config: HrcaConfig) -> Tensor:
    if params["wq"].shape[1] != config.width:
        raise ValueError(
            f"projection width {params['wq'].shape[1]} does not match "
            f"n_heads*head_dim = {config.width}"
        )
    attended = attention(x_q, x_kv, x_kv, params, config.n_heads)
    if not config.residual:
        return attended
    return ag.layer_norm(ag.add(x_q, attended), params["ln.g"], params["ln.b"])


def hrca_forward(h: "HiddenStates", params: Mapping[str, Tensor], config: HrcaConfig) -> Tensor:
    """Run the review/read/find stack; returns enriched passage states (k, d)."""
    for seg_name, seg in (("passage", h.passage), ("question", h.question), ("option", h.option)):
        if seg.shape[0] == 0:
            raise ValueError(f"empty {seg_name} segment")
    hp, hq, ho = h.passage, h.question, h.option
    for layer in range(config.n_layers):
        hq = _step(hq, hq, subparams(params, f"hrca.{layer}.review"), config)
        ho = _step(ho, hq, subparams(params, f"hrca.{layer}.read"), config)
        hp = _step(hp, ho, subparams(params, f"hrca.{layer}.find"), config)
    return hp
