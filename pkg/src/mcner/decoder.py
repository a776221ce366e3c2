"""Recovering IOB tags from the prediction matrix.

Three stages: threshold every (position, option) pair by comparing its
select/not-select probabilities; map each position to an entity type (the
selected option with the highest select probability) or to outside when
nothing is selected; then re-attach positional prefixes, giving B- to the
first of each run of consecutive identical types and I- to the rest.

Two deliberate tie rules, both asserted in tests: a 0.5/0.5 pair counts as
not selected, and a probability tie between selected options goes to the
lower option index.  Runs reset across O, and adjacent distinct entities of
the same type merge into one span; that merge is inherent to the recovery
rule and is reproduced as-is.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .catalog import EntityCatalog
from .head import NOT_SELECT, SELECT, PredictionMatrix


@dataclass(frozen=True)
class SelectionMatrix:
    """Binary (k, n_options) matrix: 1 where select beats not-select."""

    a_pred: np.ndarray


@dataclass(frozen=True)
class DecodedTags:
    tags: tuple[str, ...]


def select(pred: PredictionMatrix) -> SelectionMatrix:
    """Per-cell argmax over the last axis; exact ties resolve to not-select."""
    if not pred.normalized:
        raise ValueError("prediction matrix must be normalized before selection")
    chosen = pred.scores[:, :, SELECT] > pred.scores[:, :, NOT_SELECT]
    return SelectionMatrix(chosen.astype(np.int8))


def decode_types(pred: PredictionMatrix, sel: SelectionMatrix, catalog: EntityCatalog) -> list[str | None]:
    """Entity type per position, or None where no option is selected.

    With multiple selections the type with the highest select probability
    wins (lowest option index on exact ties).
    """
    if sel.a_pred.shape != pred.scores.shape[:2]:
        raise ValueError("selection and prediction shapes disagree")
    types: list[str | None] = []
    select_probs = pred.scores[:, :, SELECT]
    for r in range(pred.k):
        row = sel.a_pred[r]
        if row.sum() == 0:
            types.append(None)
            continue
        masked = np.where(row == 1, select_probs[r], -np.inf)
        types.append(catalog.types[int(np.argmax(masked))])
    return types


def recover_iob(types: list[str | None]) -> DecodedTags:
    """Attach B-/I- prefixes: B- opens each run of identical consecutive types."""
    tags: list[str] = []
    prev: str | None = None
    for t in types:
        if t is None:
            tags.append("O")
        elif t == prev:
            tags.append("I-" + t)
        else:
            tags.append("B-" + t)
        prev = t
    return DecodedTags(tuple(tags))


def decode(pred: PredictionMatrix, catalog: EntityCatalog) -> DecodedTags:
    """Full recovery: selection, type assignment, prefix attachment."""
    sel = select(pred)
    return recover_iob(decode_types(pred, sel, catalog))


def perfect_prediction(label_matrix: np.ndarray) -> PredictionMatrix:
    """Probability-1 prediction matrix for a gold label matrix."""
    label_matrix = np.asarray(label_matrix)
    k, n_options = label_matrix.shape
    scores = np.zeros((k, n_options, 2))
    scores[:, :, SELECT] = label_matrix
    scores[:, :, NOT_SELECT] = 1.0 - label_matrix
    return PredictionMatrix(scores, normalized=True)
