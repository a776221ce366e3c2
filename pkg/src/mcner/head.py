"""Per-option classification heads and the training objective.

Each option has its own linear sub-head mapping the enriched passage states
from width d down to 2 logits per token: channel 0 means "select this
option", channel 1 means "don't".  Stacking the softmaxed pairs over options
yields the prediction matrix of shape (k, n_options, 2).  The loss is the
positionwise two-class cross-entropy per option, averaged over the k
positions, then summed over options.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import autograd as ag
from .autograd import Tensor
from .hrca import xavier

SELECT, NOT_SELECT = 0, 1
LOG_EPS = 1e-12


@dataclass
class PredictionMatrix:
    """Scores of shape (k, n_options, 2); normalized means softmaxed pairs."""

    scores: np.ndarray
    normalized: bool = True

    @property
    def k(self) -> int:
        return self.scores.shape[0]

    @property
    def n_options(self) -> int:
        return self.scores.shape[1]


def init_head_params(rng: np.random.Generator, d: int, n_options: int) -> dict[str, Tensor]:
    params: dict[str, Tensor] = {}
    for i in range(n_options):
        params[f"head.{i}.w"] = ag.parameter(xavier(rng, d, 2))
        params[f"head.{i}.b"] = ag.parameter(np.zeros(2))
    return params


def option_logits(state: Tensor, params: Mapping[str, Tensor], option_index: int) -> Tensor:
    """Raw (k, 2) logits of sub-head ``option_index`` on its enriched states."""
    return ag.linear(state, params[f"head.{option_index}.w"], params[f"head.{option_index}.b"])


def _softmax_pairs(logits: np.ndarray) -> np.ndarray:
    m = logits.max(axis=-1, keepdims=True)
    e = np.exp(logits - m)
    return e / e.sum(axis=-1, keepdims=True)


def predict(option_states: Sequence, params: Mapping[str, Tensor]) -> PredictionMatrix:
    """Stack softmaxed sub-head outputs into the (k, n_options, 2) matrix.

    ``option_states`` holds one (k, d) state matrix per option, in catalog
    order; entry i goes through sub-head i.
    """
    n_options = sum(1 for name in params if name.startswith("head.") and name.endswith(".w"))
    if len(option_states) != n_options:
        raise ValueError(f"{len(option_states)} option states but {n_options} sub-heads")
    columns = []
    with ag.no_grad():
        for i, state in enumerate(option_states):
            if not isinstance(state, Tensor):
                state = ag.constant(state)
            logits = option_logits(state, params, i).data
            columns.append(_softmax_pairs(logits))
    scores = np.stack(columns, axis=1)
    return PredictionMatrix(scores, normalized=True)


def cce_loss(pred_option: np.ndarray, labels: np.ndarray) -> float:
    """Mean two-class cross-entropy for one option.

    ``pred_option``: (k, 2) normalized select/not-select probabilities;
    ``labels``: binary k-vector (1 = this option's type at that position).
    Zero iff every position predicts its target with probability one.
    """
    pred_option = np.asarray(pred_option, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if pred_option.shape[0] != labels.shape[0]:
        raise ValueError("prediction and label lengths differ")
    logp = np.log(np.clip(pred_option, LOG_EPS, None))
    per_pos = labels * logp[:, SELECT] + (1.0 - labels) * logp[:, NOT_SELECT]
    return float(-per_pos.mean())


def overall_loss(pred: PredictionMatrix, label_matrix: np.ndarray) -> float:
    """Sum of per-option cross-entropies over all options."""
    label_matrix = np.asarray(label_matrix)
    if pred.scores.shape[:2] != label_matrix.shape:
        raise ValueError(
            f"prediction {pred.scores.shape[:2]} and labels {label_matrix.shape} disagree"
        )
    return sum(cce_loss(pred.scores[:, i, :], label_matrix[:, i]) for i in range(pred.n_options))


def cce_loss_t(logits: Tensor, labels: np.ndarray) -> Tensor:
    """Differentiable cce_loss, computed from logits via log-softmax."""
    k = logits.shape[0]
    labels = np.asarray(labels, dtype=np.float64)
    target = np.stack([labels, 1.0 - labels], axis=1)
    return ag.scale(ag.weighted_sum(ag.log_softmax(logits), target), -1.0 / k)


def overall_loss_t(option_logit_list: Sequence[Tensor], label_matrix: np.ndarray) -> Tensor:
    """Differentiable overall loss from per-option logits."""
    label_matrix = np.asarray(label_matrix)
    total = None
    for i, logits in enumerate(option_logit_list):
        term = cce_loss_t(logits, label_matrix[:, i])
        total = term if total is None else ag.add(total, term)
    return total
