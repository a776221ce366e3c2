"""Shared fixtures, tiny-instance builders, and independent oracles."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from mcner import backend
from mcner.catalog import EntityCatalog, load_catalog
from mcner.corpus import TaggedSentence, Token
from mcner.encoder import EncoderConfig
from mcner.hrca import HrcaConfig
from mcner.model import McModel, ModelConfig, build_vocabulary
from mcner.reconstruct import reconstruct

REPO_ROOT = Path(__file__).resolve().parent.parent
CATALOG_DIR = REPO_ROOT / "configs" / "catalogs"
MINI_DIR = Path(__file__).resolve().parent / "data" / "mini"


@pytest.fixture(scope="session")
def wnut17_catalog() -> EntityCatalog:
    return load_catalog(CATALOG_DIR / "wnut17_guidelines.json")


@pytest.fixture(scope="session")
def mini_dir() -> Path:
    return MINI_DIR


@pytest.fixture(params=["numpy", "numba"])
def each_backend(request):
    """Run a test under both kernel backends, restoring the default after."""
    previous = backend.active_backend()
    backend.set_backend(request.param)
    yield request.param
    backend.set_backend(previous)


# -- tiny trainable instances for gradient work ------------------------------

WORDS = ("alpha", "beta", "gamma", "delta", "epsilon", "zeta",
         "eta", "theta", "iota", "kappa", "mu", "nu")


def random_valid_tags(rng: np.random.Generator, length: int, types) -> list[str]:
    """Random IOB2-valid tag sequence over the given types."""
    tags: list[str] = []
    open_type = None
    for _ in range(length):
        r = rng.random()
        if open_type is not None and r < 0.3:
            tags.append("I-" + open_type)
            continue
        if r < 0.6:
            open_type = str(types[rng.integers(len(types))])
            tags.append("B-" + open_type)
        else:
            open_type = None
            tags.append("O")
    return tags


def make_tiny_instance(seed: int, variant: str = "full",
                       hrca_config: HrcaConfig | None = None,
                       width: int | None = None, n_layers: int | None = None):
    """A small random model plus one training sample.

    Sizes stay within: passage <= 6 tokens, option <= 6 tokens, width <= 8,
    at most 3 entity types.
    """
    rng = np.random.default_rng(seed)
    n_types = int(rng.integers(1, 4))
    types = [f"T{i}" for i in range(n_types)]
    catalog = EntityCatalog(
        tuple((t, " ".join(rng.choice(WORDS, size=rng.integers(1, 7)))) for t in types),
        source_kind="name_only",
        dataset="tiny",
    )
    k = int(rng.integers(1, 7))
    tags = random_valid_tags(rng, k, types)
    sentence = TaggedSentence(tuple(
        Token(str(rng.choice(WORDS)), tag) for tag in tags
    ))
    if width is None:
        width = int(rng.choice([4, 8]))
    if n_layers is None:
        n_layers = int(rng.integers(1, 3))
    enc = EncoderConfig(width=width, n_layers=n_layers,
                        n_heads=2, ffn_mult=2, max_len=32)
    if hrca_config is None:
        hrca_config = HrcaConfig(n_heads=2, head_dim=int(rng.choice([2, 4])),
                                 n_layers=1, residual=bool(rng.integers(2)))
    config = ModelConfig(encoder=enc, hrca=hrca_config, variant=variant)
    vocab = build_vocabulary([sentence], catalog, variant)
    model = McModel(config, vocab, catalog, seed=seed)
    triplet = reconstruct(sentence, catalog) if variant != "vanilla" else None
    return model, sentence, triplet


# -- independent oracles ------------------------------------------------------

def algorithm1_oracle(scores: np.ndarray, types) -> list[str]:
    """Direct transcription of the inference recovery procedure.

    Kept deliberately loop-based and separate from the library decoder;
    shares only the two documented tie rules (exact select ties lose, exact
    probability ties go to the lower option index).
    """
    k, n_o, _ = scores.shape
    a = np.zeros((k, n_o), dtype=int)
    for m in range(k):
        for n in range(n_o):
            if scores[m, n, 0] > scores[m, n, 1]:
                a[m, n] = 1
    entity: list[str] = []
    for m in range(k):
        if a[m].sum() >= 1:  # Case A: pick the selected type with max probability
            best, best_p = -1, -1.0
            for n in range(n_o):
                if a[m, n] == 1 and scores[m, n, 0] > best_p:
                    best, best_p = n, scores[m, n, 0]
            entity.append(str(types[best]))
        else:  # Case B
            entity.append("O")
    tags: list[str] = []
    for e in range(k):
        if entity[e] == "O":
            tags.append("O")
        elif e == 0 or entity[e - 1] != entity[e]:
            tags.append("B-" + entity[e])
        else:
            tags.append("I-" + entity[e])
    return tags


def span_set_oracle(tags) -> set[tuple[str, int, int]]:
    """Brute-force span enumeration: test every (start, end) candidate."""
    tags = list(tags)
    k = len(tags)
    found = set()
    for s in range(k):
        if not tags[s].startswith("B-"):
            continue
        t = tags[s][2:]
        for e in range(s + 1, k + 1):
            inside = all(tags[j] == "I-" + t for j in range(s + 1, e))
            closed = e == k or tags[e] != "I-" + t
            if inside and closed:
                found.add((t, s, e))
    return found


def micro_f1_oracle(gold_corpus, pred_corpus) -> tuple[int, int, int, float]:
    tp = fp = fn = 0
    for g, p in zip(gold_corpus, pred_corpus):
        gs, ps = span_set_oracle(g), span_set_oracle(p)
        tp += len(gs & ps)
        fp += len(ps - gs)
        fn += len(gs - ps)
    prec = tp / (tp + fp) if tp + fp else 0.0
    rec = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
    return tp, fp, fn, f1


def iob_automaton_violations(tags) -> list[int]:
    """State-machine check of IOB2 validity (independent of validate_iob)."""
    bad: list[int] = []
    state: str | None = None
    for i, tag in enumerate(tags):
        if tag == "O":
            state = None
        elif tag.startswith("B-"):
            state = tag[2:]
        else:
            if state != tag[2:]:
                bad.append(i)
            state = tag[2:]
    return bad
