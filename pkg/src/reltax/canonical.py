"""Relation-name canonicalization, alias grouping and support filtering.

Names are normalized to camel case: tokens split on whitespace, underscores
and hyphens; the first token starts lowercase, later tokens start uppercase,
and the remainder of every token is kept as-is so already-camel-cased names
(the DBpedia convention) are fixed points of the rule.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

from .ingest import SupportIndex
from .types import Bucket, EntityType, RelTaxError, Source


class InvalidNameError(RelTaxError):
    """Relation name empty after trimming separators."""


class AliasCycleError(RelTaxError):
    def __init__(self, cycle: list):
        self.cycle = cycle
        super().__init__("alias cycle: " + " -> ".join(cycle + cycle[:1]))


_SEPARATORS = re.compile(r"[\s_\-]+")


def normalize_name(raw: str) -> str:
    """Canonical camel-case form of a raw relation name.

    "place of birth" -> "placeOfBirth"; "birth_place" -> "birthPlace";
    "founder" -> "founder". Idempotent: canonical names map to themselves.
    """
    tokens = [t for t in _SEPARATORS.split(raw.strip()) if t]
    if not tokens:
        raise InvalidNameError(f"relation name is empty after trimming: {raw!r}")
    first = tokens[0]
    parts = [first[0].lower() + first[1:]]
    for token in tokens[1:]:
        parts.append(token[0].upper() + token[1:])
    return "".join(parts)


class Stage(Enum):
    RAW = "RAW"
    CANONICAL = "CANONICAL"
    FILTERED = "FILTERED"


@dataclass
class RelationRecord:
    """A relation name with provenance, aliases and support evidence.

    For KB-backed records ``support_total`` equals the sum over buckets; for
    INFOBOX records it is the template usage count and the bucket map may be
    empty unless the curated TSV declared a bucket.
    """

    raw_name: str
    source: Source
    canonical_name: str | None = None
    aliases: set = field(default_factory=set)
    support_total: int = 0
    support_by_bucket: dict = field(default_factory=dict)
    head_class: EntityType | None = None
    declared_bucket: Bucket | None = None
    stage: Stage = Stage.RAW

    def __post_init__(self):
        if not self.aliases:
            self.aliases = {self.raw_name}

    @property
    def name(self) -> str:
        return self.canonical_name if self.canonical_name else self.raw_name

    def to_dict(self) -> dict:
        return {
            "raw_name": self.raw_name,
            "canonical_name": self.canonical_name,
            "source": self.source.value,
            "aliases": sorted(self.aliases),
            "support_total": self.support_total,
            "support_by_bucket": dict(sorted(self.support_by_bucket.items())),
            "head_class": self.head_class.value if self.head_class else None,
            "declared_bucket": self.declared_bucket.name if self.declared_bucket else None,
            "stage": self.stage.value,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "RelationRecord":
        return cls(
            raw_name=raw["raw_name"],
            source=Source(raw["source"]),
            canonical_name=raw.get("canonical_name"),
            aliases=set(raw.get("aliases") or [raw["raw_name"]]),
            support_total=int(raw.get("support_total", 0)),
            support_by_bucket={k: int(v) for k, v in (raw.get("support_by_bucket") or {}).items()},
            head_class=EntityType(raw["head_class"]) if raw.get("head_class") else None,
            declared_bucket=Bucket.parse(raw["declared_bucket"]) if raw.get("declared_bucket") else None,
            stage=Stage(raw.get("stage", "RAW")),
        )


def save_records(records: Iterable[RelationRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")


def load_records(path) -> list:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                records.append(RelationRecord.from_dict(json.loads(line)))
    return records


def _dominant_head(buckets: dict) -> EntityType | None:
    """Head type of the best-supported bucket (ties: lexicographic bucket name)."""
    nonzero = {name: count for name, count in buckets.items() if count > 0}
    if not nonzero:
        return None
    best = min(nonzero, key=lambda name: (-nonzero[name], name))
    return Bucket.parse(best).head


def records_from_support(index: SupportIndex, source: Source | None = None) -> list:
    """One RAW record per (source, raw relation) present in a support index."""
    records = []
    for src, relation in index.relations(source):
        buckets = index.bucket_counts(src, relation)
        records.append(
            RelationRecord(
                raw_name=relation,
                source=src,
                support_total=sum(buckets.values()),
                support_by_bucket=buckets,
                head_class=_dominant_head(buckets),
            )
        )
    return records


INFOBOX_HEADER = ["relation", "template", "usage_count"]


def load_infobox_tsv(path) -> list:
    """Load the curated infobox relation list.

    Expected header: ``relation<TAB>template<TAB>usage_count`` with an
    optional fourth ``bucket`` column declaring the relation's bucket.
    Rows are aggregated per (relation, head type): usage counts summed.
    """
    merged: dict = {}
    order: list = []
    with open(path, encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter="\t")
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:3]] != INFOBOX_HEADER:
            wanted = "\t".join(INFOBOX_HEADER)
            raise RelTaxError(f"infobox TSV must start with header {wanted!r}: {path}")
        for row in reader:
            if not row or not row[0].strip():
                continue
            if len(row) < 3:
                raise RelTaxError(f"infobox row needs 3 columns: {row!r}")
            relation = row[0].strip()
            usage = int(row[2])
            bucket = Bucket.parse(row[3]) if len(row) > 3 and row[3].strip() else None
            head = bucket.head if bucket else None
            key = (relation, head)
            if key not in merged:
                record = RelationRecord(
                    raw_name=relation,
                    source=Source.INFOBOX,
                    support_total=0,
                    head_class=head,
                    declared_bucket=bucket,
                )
                merged[key] = record
                order.append(key)
            merged[key].support_total += usage
            if bucket and merged[key].declared_bucket is None:
                merged[key].declared_bucket = bucket
    return [merged[key] for key in order]


def canonicalize_records(records: Iterable[RelationRecord]) -> list:
    """Stamp every record with its canonical name (stage RAW -> CANONICAL)."""
    out = []
    for record in records:
        canonical = normalize_name(record.raw_name)
        out.append(
            RelationRecord(
                raw_name=record.raw_name,
                source=record.source,
                canonical_name=canonical,
                aliases=set(record.aliases) | {record.raw_name},
                support_total=record.support_total,
                support_by_bucket=dict(record.support_by_bucket),
                head_class=record.head_class,
                declared_bucket=record.declared_bucket,
                stage=Stage.CANONICAL,
            )
        )
    return out


class AliasMap:
    """Mapping from a normalized name to its chosen representative.

    Lookups resolve chains to their fixed point; inserting an entry that
    would close a cycle fails with the cycle spelled out.
    """

    AUTOMATIC = "AUTOMATIC"
    MANUAL = "MANUAL"

    def __init__(self):
        self._entries: dict = {}  # alias -> (representative, provenance)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, name: str) -> bool:
        return name in self._entries

    def add(self, alias: str, representative: str, provenance: str = MANUAL) -> None:
        if provenance not in (self.AUTOMATIC, self.MANUAL):
            raise ValueError(f"unknown provenance: {provenance!r}")
        if alias == representative:
            return
        # walk from the representative; reaching the alias would close a cycle
        seen = [alias]
        current = representative
        while current in self._entries:
            seen.append(current)
            current = self._entries[current][0]
            if current == alias:
                raise AliasCycleError(seen)
        self._entries[alias] = (representative, provenance)

    def resolve(self, name: str) -> str:
        seen = set()
        current = name
        while current in self._entries:
            if current in seen:
                raise AliasCycleError(sorted(seen))
            seen.add(current)
            current = self._entries[current][0]
        return current

    def entries(self) -> list:
        return sorted((a, r, p) for a, (r, p) in self._entries.items())

    def save_tsv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for alias, rep, provenance in self.entries():
                fh.write(f"{alias}\t{rep}\t{provenance}\n")

    @classmethod
    def load_tsv(cls, path) -> "AliasMap":
        amap = cls()
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line.strip() or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) < 2:
                    raise RelTaxError(f"alias file {path} line {lineno}: need alias<TAB>representative")
                provenance = parts[2].strip() if len(parts) > 2 and parts[2].strip() else cls.MANUAL
                amap.add(parts[0].strip(), parts[1].strip(), provenance)
        return amap

    @classmethod
    def from_groups(cls, groups: Iterable[Iterable[tuple]], provenance: str = AUTOMATIC) -> "AliasMap":
        """Build a map from alias groups of (name, source) pairs.

        Representative preference: a DBpedia-sourced name, else the shortest,
        else the lexicographically least.
        """
        amap = cls()
        for group in groups:
            members = list(group)
            rep = choose_representative(members)
            for name, _ in members:
                if name != rep:
                    amap.add(name, rep, provenance)
        return amap


def choose_representative(members: Iterable[tuple]) -> str:
    """Pick one name of an alias group of (name, source) pairs."""
    members = list(members)
    if not members:
        raise ValueError("empty alias group")

    def key(member):
        name, source = member
        return (0 if source is Source.DBPEDIA else 1, len(name), name)

    return min(members, key=key)[0]


def apply_alias_map(records: Iterable[RelationRecord], alias_map: AliasMap) -> list:
    """Merge records whose canonical names share a representative.

    Alias sets are unioned and support summed per bucket, so total support is
    conserved. Records must already be canonicalized.
    """
    grouped: dict = {}
    order: list = []
    for record in records:
        if record.stage is Stage.RAW or not record.canonical_name:
            raise RelTaxError(f"record {record.raw_name!r} is not canonicalized")
        rep = alias_map.resolve(record.canonical_name)
        if rep not in grouped:
            grouped[rep] = []
            order.append(rep)
        grouped[rep].append(record)

    out = []
    for rep in order:
        group = grouped[rep]
        native = next((r for r in group if r.canonical_name == rep), group[0])
        aliases = set()
        buckets: dict = {}
        total = 0
        for record in group:
            aliases |= record.aliases | {record.canonical_name}
            total += record.support_total
            for bucket_name, count in record.support_by_bucket.items():
                buckets[bucket_name] = buckets.get(bucket_name, 0) + count
        out.append(
            RelationRecord(
                raw_name=native.raw_name,
                source=native.source,
                canonical_name=rep,
                aliases=aliases,
                support_total=total,
                support_by_bucket=buckets,
                head_class=group[0].head_class,
                declared_bucket=next((r.declared_bucket for r in group if r.declared_bucket), None),
                stage=Stage.CANONICAL,
            )
        )
    return out


def filter_by_support(
    records: Iterable[RelationRecord],
    support_index: SupportIndex | None = None,
    threshold: int = 100,
) -> list:
    """Keep records whose support reaches the threshold (stage -> FILTERED).

    KB-backed records may have their support refreshed from ``support_index``
    by summing over their raw aliases; INFOBOX records always filter on their
    template usage count.
    """
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    kept = []
    for record in records:
        total = record.support_total
        buckets = dict(record.support_by_bucket)
        if support_index is not None and record.source is not Source.INFOBOX:
            buckets = {}
            for alias in sorted(record.aliases):
                for bucket_name, count in support_index.bucket_counts(record.source, alias).items():
                    buckets[bucket_name] = buckets.get(bucket_name, 0) + count
            if buckets:
                total = sum(buckets.values())
        if total >= threshold:
            kept.append(
                RelationRecord(
                    raw_name=record.raw_name,
                    source=record.source,
                    canonical_name=record.canonical_name,
                    aliases=set(record.aliases),
                    support_total=total,
                    support_by_bucket=buckets,
                    head_class=record.head_class,
                    declared_bucket=record.declared_bucket,
                    stage=Stage.FILTERED,
                )
            )
    return kept


def head_tag(record: RelationRecord) -> EntityType:
    """Head entity type a record is reported under."""
    if record.head_class is not None:
        return record.head_class
    if record.declared_bucket is not None:
        return record.declared_bucket.head
    derived = _dominant_head(record.support_by_bucket)
    if derived is None:
        raise RelTaxError(f"record {record.name!r} has no head type tag")
    return derived


def canonicalization_report(
    before: Iterable[RelationRecord], after: Iterable[RelationRecord]
) -> dict:
    """Before/after counts per (source, head entity type) cell."""
    report: dict = {}
    for position, records in ((0, before), (1, after)):
        for record in records:
            key = (record.source, head_tag(record))
            cell = report.setdefault(key, [0, 0])
            cell[position] += 1
    return {key: (b, a) for key, (b, a) in sorted(report.items(), key=lambda kv: (kv[0][0].value, kv[0][1].value))}
