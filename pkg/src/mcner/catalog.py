"""Entity-type catalogs: the ordered option set offered for every token.

A catalog fixes the option order for a whole run (option column ``i`` of the
label matrix is ``entries[i]``) and carries one description per type.  The
descriptions come from one of three sources: the dataset's annotation
guidelines, definitions collected from the internet, or the bare type name.
Catalogs are data, not code: they ship as JSON documents.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

SOURCE_KINDS = ("annotation_guidelines", "internet_definition", "name_only")


class CatalogError(ValueError):
    pass


@dataclass(frozen=True)
class EntityCatalog:
    entries: tuple[tuple[str, str], ...]  # (type_name, option_text), order = option index
    source_kind: str
    dataset: str = ""

    def __post_init__(self):
        if self.source_kind not in SOURCE_KINDS:
            raise CatalogError(f"unknown source_kind {self.source_kind!r}; expected one of {SOURCE_KINDS}")
        seen = set()
        for name, text in self.entries:
            if not name:
                raise CatalogError("empty entity type name")
            if name in seen:
                raise CatalogError(f"duplicate entity type {name!r}")
            seen.add(name)
            if not text:
                raise CatalogError(f"empty option description for type {name!r}")

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def types(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.entries)

    @property
    def option_texts(self) -> tuple[str, ...]:
        return tuple(text for _, text in self.entries)

    def index_of(self, type_name: str) -> int:
        """Option column for an entity type; KeyError if absent."""
        for i, (name, _) in enumerate(self.entries):
            if name == type_name:
                return i
        raise KeyError(type_name)

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "source_kind": self.source_kind,
            "options": [{"type": name, "text": text} for name, text in self.entries],
        }


def build_catalog(config: dict) -> EntityCatalog:
    """Build a catalog from a parsed config document.

    Expected shape::

        {"dataset": str, "source_kind": str,
         "options": [{"type": str, "text": str}, ...]}

    Option order in the document is the option order of the run.
    """
    try:
        options = config["options"]
        source_kind = config["source_kind"]
    except KeyError as exc:
        raise CatalogError(f"catalog config missing key {exc}") from exc
    if not options:
        raise CatalogError("catalog config lists no options")
    entries = []
    for i, opt in enumerate(options):
        if "type" not in opt or "text" not in opt:
            raise CatalogError(f"option {i} must have 'type' and 'text' keys")
        entries.append((opt["type"], opt["text"]))
    return EntityCatalog(tuple(entries), source_kind, config.get("dataset", ""))


def load_catalog(path: str | Path) -> EntityCatalog:
    with Path(path).open("r", encoding="utf-8") as f:
        return build_catalog(json.load(f))
