"""Span-level micro-averaged precision/recall/F1.

A predicted entity counts only on exact match of (type, start, end) against
a gold span; counts are pooled over all sentences and entity types before
the ratios are taken.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .corpus import TaggedSentence, repair_iob, sentence_from_pairs, validate_iob


class InvalidTagSequenceError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class EntitySpan:
    type_name: str
    start: int  # inclusive
    end: int    # exclusive

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise ValueError(f"bad span boundaries [{self.start}, {self.end})")


@dataclass
class F1Report:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    per_type: dict[str, dict[str, int]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "per_type": self.per_type,
        }


def _as_tags(seq) -> tuple[str, ...]:
    if isinstance(seq, TaggedSentence):
        return seq.tags
    return tuple(seq)


def extract_spans(tags, repair: bool = False) -> set[EntitySpan]:
    """Maximal B-/I- runs as (type, start, end) spans.

    Invalid IOB (an I- continuing nothing) raises unless ``repair`` rewrites
    the orphans to B- first.
    """
    tags = _as_tags(tags)
    sentence = sentence_from_pairs(("w", t) for t in tags)
    if validate_iob(sentence):
        if not repair:
            raise InvalidTagSequenceError(
                f"I- tag without opener at position(s) {validate_iob(sentence)}; "
                "enable repair to rewrite orphans"
            )
        tags = repair_iob(sentence).tags
    spans: set[EntitySpan] = set()
    start = None
    current = None
    for i, tag in enumerate(tags):
        if tag.startswith("B-"):
            if current is not None:
                spans.add(EntitySpan(current, start, i))
            current, start = tag[2:], i
        elif tag.startswith("I-"):
            pass  # guaranteed to continue `current` after validation/repair
        else:
            if current is not None:
                spans.add(EntitySpan(current, start, i))
            current, start = None, None
    if current is not None:
        spans.add(EntitySpan(current, start, len(tags)))
    return spans


def micro_f1(gold: Sequence, pred: Sequence, repair: bool = False) -> F1Report:
    """Micro-averaged span F1 over aligned gold and predicted tag sequences."""
    if len(gold) != len(pred):
        raise ValueError(f"{len(gold)} gold sentences vs {len(pred)} predicted")
    tp = fp = fn = 0
    per_type: dict[str, dict[str, int]] = {}

    def bucket(name: str) -> dict[str, int]:
        return per_type.setdefault(name, {"tp": 0, "fp": 0, "fn": 0})

    for idx, (g, p) in enumerate(zip(gold, pred)):
        g_tags, p_tags = _as_tags(g), _as_tags(p)
        if len(g_tags) != len(p_tags):
            raise ValueError(f"sentence {idx}: length mismatch {len(g_tags)} vs {len(p_tags)}")
        g_spans = extract_spans(g_tags, repair=repair)
        p_spans = extract_spans(p_tags, repair=repair)
        for span in g_spans & p_spans:
            tp += 1
            bucket(span.type_name)["tp"] += 1
        for span in p_spans - g_spans:
            fp += 1
            bucket(span.type_name)["fp"] += 1
        for span in g_spans - p_spans:
            fn += 1
            bucket(span.type_name)["fn"] += 1
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return F1Report(precision, recall, f1, tp, fp, fn, per_type)
