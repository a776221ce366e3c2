"""Reading, validating, and summarizing CoNLL-style NER corpora.

Corpora are whitespace-columned text files: one token per line, blank lines
between sentences, entity tag in the last column.  Tags follow the
inside-outside-beginning scheme: ``O``, ``B-<type>``, ``I-<type>``.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

logger = logging.getLogger(__name__)

TAG_PATTERN = re.compile(r"^(?:O|[BI]-\S+)$")
DOCSTART = "-DOCSTART-"

#: Conventional split-file stems, in reporting order.
SPLIT_NAMES = ("train", "dev", "test")


class CorpusParseError(ValueError):
    """Malformed corpus input.  Carries the offending 1-based line number."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


@dataclass(frozen=True)
class Token:
    surface: str
    tag: str

    def __post_init__(self):
        if not self.surface or any(ch.isspace() for ch in self.surface):
            raise ValueError(f"token surface must be non-empty and whitespace-free: {self.surface!r}")
        if not TAG_PATTERN.match(self.tag):
            raise ValueError(f"invalid IOB tag {self.tag!r} (expected O, B-<type> or I-<type>)")

    @property
    def entity_type(self) -> str | None:
        """Entity type with the B-/I- prefix removed; None for O."""
        return None if self.tag == "O" else self.tag[2:]


@dataclass(frozen=True)
class TaggedSentence:
    tokens: tuple[Token, ...]
    source_line: int = field(default=0, compare=False)

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def surfaces(self) -> tuple[str, ...]:
        return tuple(t.surface for t in self.tokens)

    @property
    def tags(self) -> tuple[str, ...]:
        return tuple(t.tag for t in self.tokens)


@dataclass(frozen=True)
class CorpusStats:
    split_sizes: dict[str, int]
    n_entity_types: int
    avg_length: float
    avg_option_length: float | None = None

    def to_dict(self) -> dict:
        return {
            "split_sizes": dict(self.split_sizes),
            "n_entity_types": self.n_entity_types,
            "avg_length": self.avg_length,
            "avg_option_length": self.avg_option_length,
        }


def sentence_from_pairs(pairs: Iterable[tuple[str, str]], source_line: int = 0) -> TaggedSentence:
    """Build a TaggedSentence from (surface, tag) pairs."""
    return TaggedSentence(tuple(Token(s, t) for s, t in pairs), source_line)


def parse_conll(source: str | Iterable[str]) -> list[TaggedSentence]:
    """Parse CoNLL-style text into sentences.

    ``source`` is a string or an iterable of lines.  Sentences are separated
    by blank lines; each non-blank line holds whitespace-separated columns
    with the surface form first and the IOB tag last.  ``-DOCSTART-`` marker
    lines are skipped.
    """
    if isinstance(source, str):
        lines: Iterable[str] = source.splitlines()
    else:
        lines = (ln.rstrip("\r\n") for ln in source)

    sentences: list[TaggedSentence] = []
    current: list[Token] = []
    start_line = 0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            if current:
                sentences.append(TaggedSentence(tuple(current), start_line))
                current = []
            continue
        fields = line.split()
        if fields[0] == DOCSTART:
            continue
        if len(fields) < 2:
            raise CorpusParseError(f"missing tag column: {line!r}", lineno)
        surface, tag = fields[0], fields[-1]
        if not TAG_PATTERN.match(tag):
            raise CorpusParseError(f"invalid IOB tag {tag!r}", lineno)
        if not current:
            start_line = lineno
        current.append(Token(surface, tag))
    if current:
        sentences.append(TaggedSentence(tuple(current), start_line))
    return sentences


def serialize_conll(sentences: Sequence[TaggedSentence]) -> str:
    """Inverse of parse_conll: one ``surface tag`` line per token, sentences blank-line separated."""
    blocks = []
    for sent in sentences:
        blocks.append("\n".join(f"{t.surface} {t.tag}" for t in sent.tokens))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


def validate_iob(sentence: TaggedSentence) -> list[int]:
    """Return positions where an I-tag continues nothing.

    A position violates IOB2 when its tag is ``I-X`` and the previous tag is
    neither ``B-X`` nor ``I-X``.  An empty list means the sentence is valid.
    """
    violations = []
    prev: Token | None = None
    for i, tok in enumerate(sentence.tokens):
        if tok.tag.startswith("I-"):
            if prev is None or prev.tag == "O" or prev.entity_type != tok.entity_type:
                violations.append(i)
        prev = tok
    return violations


def repair_iob(sentence: TaggedSentence) -> TaggedSentence:
    """Rewrite orphan ``I-X`` tags to ``B-X`` so the sentence satisfies IOB2.

    This changes gold spans, so callers must opt in explicitly.
    """
    repaired: list[Token] = []
    for tok in sentence.tokens:
        if tok.tag.startswith("I-"):
            prev = repaired[-1] if repaired else None
            if prev is None or prev.tag == "O" or prev.entity_type != tok.entity_type:
                tok = Token(tok.surface, "B-" + tok.entity_type)
        repaired.append(tok)
    return TaggedSentence(tuple(repaired), sentence.source_line)


def load_corpus_file(path: str | Path, repair: bool = False) -> list[TaggedSentence]:
    """Parse one corpus file; warn about (or repair) IOB2 violations."""
    path = Path(path)
    with path.open("r", encoding="utf-8") as f:
        sentences = parse_conll(f)
    checked = []
    for sent in sentences:
        bad = validate_iob(sent)
        if bad:
            if repair:
                sent = repair_iob(sent)
            else:
                logger.warning(
                    "%s:%d: I- tag without matching opener at token position(s) %s (kept as-is)",
                    path, sent.source_line, bad,
                )
        checked.append(sent)
    return checked


def find_split_files(directory: str | Path) -> dict[str, Path]:
    """Locate train/dev/test files in a corpus directory by filename stem."""
    directory = Path(directory)
    aliases = {"train": ("train",), "dev": ("dev", "valid", "validation"), "test": ("test",)}
    found: dict[str, Path] = {}
    for name in SPLIT_NAMES:
        for cand in sorted(directory.iterdir()):
            if cand.is_file() and any(cand.stem.lower().startswith(a) for a in aliases[name]):
                found[name] = cand
                break
    if not found:
        raise FileNotFoundError(f"no train/dev/test files found under {directory}")
    return found


def load_corpus_dir(directory: str | Path, repair: bool = False) -> dict[str, list[TaggedSentence]]:
    return {name: load_corpus_file(p, repair=repair) for name, p in find_split_files(directory).items()}


def entity_types_in(sentences: Iterable[TaggedSentence]) -> set[str]:
    return {t.entity_type for sent in sentences for t in sent.tokens if t.entity_type is not None}


def check_catalog_coverage(sentences: Iterable[TaggedSentence], catalog_types: Iterable[str]) -> list[str]:
    """Entity types present in the corpus but missing from the catalog, sorted."""
    return sorted(entity_types_in(sentences) - set(catalog_types))


def compute_stats(
    splits: Mapping[str, Sequence[TaggedSentence]],
    catalog=None,
) -> CorpusStats:
    """Corpus summary: per-split sentence counts, type count, mean lengths.

    ``avg_length`` is the mean token count over all sentences pooled across
    every provided split.  With a catalog, ``n_entity_types`` is the catalog
    size and ``avg_option_length`` the mean whitespace-token count of the
    option descriptions; otherwise types are counted from the tags.
    """
    if not splits:
        raise ValueError("at least one corpus split is required")
    sizes = {name: len(sents) for name, sents in splits.items()}
    all_sents = [s for sents in splits.values() for s in sents]
    total_tokens = sum(len(s) for s in all_sents)
    avg_length = total_tokens / len(all_sents) if all_sents else 0.0
    if catalog is not None:
        n_types = len(catalog)
        option_tokens = [len(text.split()) for text in catalog.option_texts]
        avg_option = sum(option_tokens) / len(option_tokens)
    else:
        n_types = len(entity_types_in(all_sents))
        avg_option = None
    return CorpusStats(sizes, n_types, avg_length, avg_option)
