"""Core vocabulary shared across the toolkit: entity types, sources, buckets, triples."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class RelTaxError(Exception):
    """Base class for all toolkit errors."""


class EntityType(Enum):
    PER = "PER"
    ORG = "ORG"
    LOC = "LOC"
    OTHER = "OTHER"

    @property
    def short(self) -> str:
        return self.value.lower()


# Types a triple endpoint must have to participate in the taxonomy.
TYPED = (EntityType.PER, EntityType.ORG, EntityType.LOC)

# Conflict resolution order when an entity reaches root classes of several types.
DEFAULT_PRECEDENCE = (EntityType.PER, EntityType.ORG, EntityType.LOC)


class Source(Enum):
    WIKIDATA = "WIKIDATA"
    DBPEDIA = "DBPEDIA"
    INFOBOX = "INFOBOX"


@dataclass(frozen=True, order=True)
class Bucket:
    """A (head type, tail type) pair over PER/ORG/LOC; one of the 9 depth-2 nodes."""

    head: EntityType
    tail: EntityType

    def __post_init__(self):
        if self.head not in TYPED or self.tail not in TYPED:
            raise ValueError(f"bucket endpoints must be PER/ORG/LOC, got {self.head}/{self.tail}")

    @property
    def name(self) -> str:
        return f"{self.head.short}-{self.tail.short}"

    @classmethod
    def parse(cls, name: str) -> "Bucket":
        try:
            head, tail = name.strip().split("-")
            return cls(EntityType(head.upper()), EntityType(tail.upper()))
        except (ValueError, KeyError) as exc:
            raise ValueError(f"not a bucket name: {name!r}") from exc

    def __str__(self) -> str:
        return self.name


def all_buckets() -> list[Bucket]:
    """The 9 buckets in lexicographic name order (loc-loc first, per-per last)."""
    return sorted((Bucket(h, t) for h in TYPED for t in TYPED), key=lambda b: b.name)


BUCKET_NAMES = [b.name for b in all_buckets()]


@dataclass(frozen=True)
class Triple:
    """One typed KB statement; the unit of support evidence."""

    head: str
    relation: str
    tail: str
    head_type: EntityType
    tail_type: EntityType
    source: Source

    def __post_init__(self):
        if not self.head or not self.relation or not self.tail:
            raise ValueError("triple fields must be non-empty")

    @property
    def is_typed(self) -> bool:
        return self.head_type in TYPED and self.tail_type in TYPED

    @property
    def bucket(self) -> Bucket:
        return Bucket(self.head_type, self.tail_type)


@dataclass
class IngestStats:
    """Counters accumulated while streaming a dump."""

    lines: int = 0
    parsed: int = 0
    skipped: int = 0
    parse_errors: int = 0
    statements: int = 0
    typed: int = 0
    dropped_untyped: int = 0
    error_lines: list = field(default_factory=list)

    def record_error(self, lineno: int, reason: str, keep: int = 20) -> None:
        self.parse_errors += 1
        if len(self.error_lines) < keep:
            self.error_lines.append((lineno, reason))
