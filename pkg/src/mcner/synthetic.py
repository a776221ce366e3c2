"""Seeded synthetic corpus for tests and demos.

Templated sentences over three entity types (PER, LOC, ORG) with one- and
two-token entity surface forms, so B- and I- tags both occur.  Lexicons are
disjoint across types, so the task is fully learnable; a coverage queue
(used for the train split) routes every lexicon item through the templates
before random sampling takes over, keeping evaluation splits free of
never-trained tokens.  The suite must never depend on downloading real
benchmark data.
"""

from __future__ import annotations

import json
from collections import deque
from pathlib import Path

import numpy as np

from .catalog import EntityCatalog, build_catalog
from .corpus import TaggedSentence, Token, serialize_conll

FIRST_NAMES = ("Alice", "Bob", "Carol", "David", "Erin", "Frank")
SURNAMES = ("Smith", "Jones", "Khan")
CITIES = ("Paris", "London", "Tokyo", "Oslo", "Cairo", "Quito")
TWO_TOKEN_PLACES = (("New", "York"), ("San", "Pedro"))
ORG_NAMES = ("Acme", "Globex", "Initech", "Umbrella", "Hooli")
ORG_SUFFIXES = ("Corp", "Labs")

TEMPLATES = (
    ("PER", "visited", "LOC", "last", "summer", "."),
    ("ORG", "hired", "PER", "this", "week", "."),
    ("PER", "works", "for", "ORG", "in", "LOC", "."),
    ("the", "mayor", "of", "LOC", "met", "PER", "."),
    ("ORG", "opened", "an", "office", "in", "LOC", "."),
    ("analysts", "at", "ORG", "praised", "PER", "."),
    ("it", "rained", "in", "LOC", "all", "week", "."),
    ("the", "quarterly", "report", "was", "late", "."),
    ("PER", "moved", "from", "LOC", "to", "LOC", "."),
)

GUIDELINE_CATALOG = {
    "dataset": "synthetic",
    "source_kind": "annotation_guidelines",
    "options": [
        {"type": "PER", "text": "Names of people, either a first name alone or a first name followed by a surname."},
        {"type": "LOC", "text": "Names of places such as cities, including two-word place names."},
        {"type": "ORG", "text": "Names of companies and other organizations, sometimes with a corporate suffix."},
    ],
}

NAME_ONLY_CATALOG = {
    "dataset": "synthetic",
    "source_kind": "name_only",
    "options": [
        {"type": "PER", "text": "Person"},
        {"type": "LOC", "text": "Location"},
        {"type": "ORG", "text": "Organization"},
    ],
}


def catalog(source_kind: str = "annotation_guidelines") -> EntityCatalog:
    doc = {"annotation_guidelines": GUIDELINE_CATALOG, "name_only": NAME_ONLY_CATALOG}[source_kind]
    return build_catalog(doc)


def _entity(rng: np.random.Generator, etype: str) -> list[str]:
    if etype == "PER":
        name = [str(rng.choice(FIRST_NAMES))]
        if rng.random() < 0.5:
            name.append(str(rng.choice(SURNAMES)))
        return name
    if etype == "LOC":
        if rng.random() < 0.3:
            return list(TWO_TOKEN_PLACES[rng.integers(len(TWO_TOKEN_PLACES))])
        return [str(rng.choice(CITIES))]
    if etype == "ORG":
        name = [str(rng.choice(ORG_NAMES))]
        if rng.random() < 0.4:
            name.append(str(rng.choice(ORG_SUFFIXES)))
        return name
    raise ValueError(etype)


def _coverage_entities() -> dict[str, deque]:
    """One realization per lexicon item, queued for deterministic coverage."""
    per = [[f, s] for f, s in zip(FIRST_NAMES, SURNAMES)]
    per += [[f] for f in FIRST_NAMES[len(SURNAMES):]]
    loc = [[c] for c in CITIES] + [list(p) for p in TWO_TOKEN_PLACES]
    org = [[o, suf] for o, suf in zip(ORG_NAMES, ORG_SUFFIXES)]
    org += [[o] for o in ORG_NAMES[len(ORG_SUFFIXES):]]
    return {"PER": deque(per), "LOC": deque(loc), "ORG": deque(org)}


def generate_sentence(rng: np.random.Generator, queues: dict[str, deque] | None = None) -> TaggedSentence:
    template = TEMPLATES[rng.integers(len(TEMPLATES))]
    tokens: list[Token] = []
    for slot in template:
        if slot in ("PER", "LOC", "ORG"):
            if queues is not None and queues[slot]:
                surface_tokens = queues[slot].popleft()
            else:
                surface_tokens = _entity(rng, slot)
            tokens.append(Token(surface_tokens[0], f"B-{slot}"))
            tokens.extend(Token(s, f"I-{slot}") for s in surface_tokens[1:])
        else:
            tokens.append(Token(slot, "O"))
    return TaggedSentence(tuple(tokens))


def generate_corpus(n_sentences: int, seed: int, ensure_coverage: bool = False) -> list[TaggedSentence]:
    rng = np.random.default_rng(seed)
    queues = _coverage_entities() if ensure_coverage else None
    return [generate_sentence(rng, queues) for _ in range(n_sentences)]


def generate_splits(n_train: int = 50, n_dev: int = 20, n_test: int = 20, seed: int = 0) -> dict[str, list[TaggedSentence]]:
    return {
        "train": generate_corpus(n_train, seed, ensure_coverage=True),
        "dev": generate_corpus(n_dev, seed + 1),
        "test": generate_corpus(n_test, seed + 2),
    }


def write_corpus_dir(directory: str | Path, n_train: int = 50, n_dev: int = 20,
                     n_test: int = 20, seed: int = 0) -> dict[str, Path]:
    """Write split files plus both catalog variants; returns the file map."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    splits = generate_splits(n_train, n_dev, n_test, seed)
    paths = {}
    for name, sentences in splits.items():
        p = directory / f"{name}.txt"
        p.write_text(serialize_conll(sentences), encoding="utf-8")
        paths[name] = p
    for fname, doc in (("catalog_guidelines.json", GUIDELINE_CATALOG),
                       ("catalog_names.json", NAME_ONLY_CATALOG)):
        p = directory / fname
        p.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
        paths[fname] = p
    return paths
