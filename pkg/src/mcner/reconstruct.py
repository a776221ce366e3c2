"""Turning tagged sentences into multiple-choice triplets.

Every sentence becomes a (passage, question, options) triplet: the passage
is the token sequence verbatim, the question is one fixed string shared by
all datasets, and the options are the catalog's type descriptions in catalog
order.  Gold tags are flattened into a binary matrix of shape
(passage length, option count): row r has a one in column i when token r
belongs to an entity of type i, with the B-/I- prefix discarded.  Outside
tokens are all-zero rows; there is no explicit "none" option.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .catalog import EntityCatalog
from .corpus import TaggedSentence

UNIVERSAL_QUESTION = "What kind of entity is this?"


class ReconstructionError(ValueError):
    pass


@dataclass(frozen=True)
class McTriplet:
    passage: tuple[str, ...]
    question: tuple[str, ...]
    options: tuple[tuple[str, ...], ...]
    label_matrix: np.ndarray | None = field(default=None, compare=False)  # (k, n_options) int8
    origin: TaggedSentence | None = field(default=None, compare=False)

    @property
    def n_options(self) -> int:
        return len(self.options)

    def __len__(self) -> int:
        return len(self.passage)


def strip_iob(tag: str) -> str | None:
    """Drop the positional prefix: ``B-X``/``I-X`` -> ``X``; ``O`` -> None."""
    if tag == "O":
        return None
    if (tag.startswith("B-") or tag.startswith("I-")) and len(tag) > 2:
        return tag[2:]
    raise ValueError(f"malformed IOB tag {tag!r}")


def question_tokens() -> tuple[str, ...]:
    return tuple(UNIVERSAL_QUESTION.split())


def reconstruct(sentence: TaggedSentence, catalog: EntityCatalog) -> McTriplet:
    """Build the triplet and label matrix for one sentence.

    Raises ReconstructionError when a tag names an entity type the catalog
    does not list.
    """
    k = len(sentence)
    labels = np.zeros((k, len(catalog)), dtype=np.int8)
    for r, tok in enumerate(sentence.tokens):
        etype = strip_iob(tok.tag)
        if etype is None:
            continue
        try:
            labels[r, catalog.index_of(etype)] = 1
        except KeyError:
            raise ReconstructionError(
                f"entity type {etype!r} at token position {r} is not in the catalog "
                f"(types: {', '.join(catalog.types)})"
            ) from None
    return McTriplet(
        passage=sentence.surfaces,
        question=question_tokens(),
        options=tuple(tuple(text.split()) for text in catalog.option_texts),
        label_matrix=labels,
        origin=sentence,
    )


def inference_triplet(tokens: Sequence[str], catalog: EntityCatalog) -> McTriplet:
    """Triplet for an unlabeled token sequence (no label matrix)."""
    return McTriplet(
        passage=tuple(tokens),
        question=question_tokens(),
        options=tuple(tuple(text.split()) for text in catalog.option_texts),
    )


def triplet_to_record(triplet: McTriplet) -> dict:
    record = {
        "passage": list(triplet.passage),
        "question": " ".join(triplet.question),
        "options": [" ".join(opt) for opt in triplet.options],
    }
    if triplet.label_matrix is not None:
        record["label_matrix"] = triplet.label_matrix.tolist()
    return record


def write_triplets(path: str | Path, triplets: Iterable[McTriplet]) -> int:
    """Write triplets as JSON lines; returns the number written."""
    n = 0
    with Path(path).open("w", encoding="utf-8") as f:
        for t in triplets:
            f.write(json.dumps(triplet_to_record(t), ensure_ascii=False) + "\n")
            n += 1
    return n
