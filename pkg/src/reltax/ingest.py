"""Stream-parse KB dumps into typed triples and support counts.

Two dump layouts are understood:

* Wikidata-style JSON: one entity object per line, with the whole file
  optionally wrapped in ``[`` / ``]`` and lines separated by trailing commas.
* N-Triples: one ``<s> <p> <o> .`` statement per line.

Entity types are resolved by walking subclass chains from each entity's
asserted classes up to configurable root classes (bounded depth), then
triples whose endpoints both resolve to PER/ORG/LOC are kept.
"""

from __future__ import annotations

import gzip
import json
import re
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .types import (
    DEFAULT_PRECEDENCE,
    Bucket,
    EntityType,
    IngestStats,
    RelTaxError,
    Source,
    Triple,
)


class LineParseError(RelTaxError):
    """A single malformed dump line; ingestion continues past it."""

    def __init__(self, reason: str, lineno: int | None = None):
        self.reason = reason
        self.lineno = lineno
        at = f" at line {lineno}" if lineno is not None else ""
        super().__init__(f"parse error{at}: {reason}")


# Properties recognised as instance-of / subclass-of across both KBs.
DEFAULT_INSTANCE_OF = ("P31", "type", "rdf:type")
DEFAULT_SUBCLASS_OF = ("P279", "subClassOf", "rdfs:subClassOf")

# Reasonable desk defaults; real runs are expected to supply a config file.
DEFAULT_TYPE_ROOTS = {
    EntityType.PER: frozenset({"Q5", "Person"}),
    EntityType.ORG: frozenset({"Q43229", "Organisation", "Organization"}),
    EntityType.LOC: frozenset({"Q17334923", "Q2221906", "Place", "Location"}),
}


@dataclass(frozen=True)
class TypeConfig:
    """Root classes per entity type plus traversal and parsing knobs."""

    type_roots: dict = field(default_factory=lambda: dict(DEFAULT_TYPE_ROOTS))
    max_chain_depth: int = 3
    precedence: tuple = DEFAULT_PRECEDENCE
    instance_of: tuple = DEFAULT_INSTANCE_OF
    subclass_of: tuple = DEFAULT_SUBCLASS_OF
    prefixes: tuple = ()

    def __post_init__(self):
        if self.max_chain_depth < 0:
            raise ValueError("max_chain_depth must be >= 0")

    @classmethod
    def from_dict(cls, raw: dict) -> "TypeConfig":
        kwargs = {}
        if "type_roots" in raw:
            kwargs["type_roots"] = {
                EntityType(k.upper()): frozenset(v) for k, v in raw["type_roots"].items()
            }
        if "max_chain_depth" in raw:
            kwargs["max_chain_depth"] = int(raw["max_chain_depth"])
        if "precedence" in raw:
            kwargs["precedence"] = tuple(EntityType(t.upper()) for t in raw["precedence"])
        for key in ("instance_of", "subclass_of", "prefixes"):
            if key in raw:
                kwargs[key] = tuple(raw[key])
        return cls(**kwargs)

    @classmethod
    def load(cls, path) -> "TypeConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class ParsedEntity:
    """One Wikidata-style entity: its id, asserted classes, entity-valued statements."""

    entity_id: str
    classes: frozenset
    statements: tuple  # of (property, target entity id)


def _claim_target(claim: dict) -> str | None:
    """Entity id referenced by a claim's main value, or None for literals."""
    snak = claim.get("mainsnak", {})
    if snak.get("snaktype") != "value":
        return None
    dv = snak.get("datavalue", {})
    if dv.get("type") != "wikibase-entityid":
        return None
    value = dv.get("value")
    if isinstance(value, dict):
        if value.get("id"):
            return str(value["id"])
        if "numeric-id" in value:
            prefix = {"item": "Q", "property": "P"}.get(value.get("entity-type", "item"), "Q")
            return f"{prefix}{value['numeric-id']}"
    return None


def parse_wikidata_entity(
    line: str,
    instance_of: Iterable[str] = DEFAULT_INSTANCE_OF,
    lineno: int | None = None,
) -> ParsedEntity | None:
    """Parse one line of a Wikidata JSON dump.

    Returns None for structural wrapper lines (``[``, ``]``, blanks).
    Instance-of targets are reported as the entity's classes; every other
    entity-valued statement is reported as a (property, target) pair.
    Literal-valued statements are dropped.
    """
    stripped = line.strip()
    if stripped in ("", "[", "]"):
        return None
    if stripped.endswith(","):
        stripped = stripped[:-1].rstrip()
    try:
        obj = json.loads(stripped)
    except json.JSONDecodeError as exc:
        raise LineParseError(f"invalid JSON: {exc.msg}", lineno) from exc
    if not isinstance(obj, dict) or not obj.get("id"):
        raise LineParseError("entity object without an id", lineno)

    entity_id = str(obj["id"])
    claims = obj.get("claims", {})
    if not isinstance(claims, dict):
        raise LineParseError("claims is not an object", lineno)

    instance_props = set(instance_of)
    classes = set()
    statements = []
    for prop, claim_list in claims.items():
        if not isinstance(claim_list, list):
            continue
        for claim in claim_list:
            if not isinstance(claim, dict):
                continue
            target = _claim_target(claim)
            if target is None:
                continue  # literal-valued statement
            if prop in instance_props:
                classes.add(target)
            else:
                statements.append((prop, target))
    return ParsedEntity(entity_id, frozenset(classes), tuple(statements))


_NT_LINE = re.compile(r"^<([^<>]*)>\s+<([^<>]*)>\s+(.+?)\s*\.\s*$")


def strip_iri(iri: str, prefixes: Iterable[str] = ()) -> str:
    """Local identifier of an IRI: longest configured prefix wins, else the
    fragment / last path segment."""
    for prefix in sorted(prefixes, key=len, reverse=True):
        if prefix and iri.startswith(prefix):
            return iri[len(prefix):]
    if "#" in iri:
        return iri.rsplit("#", 1)[1]
    if "/" in iri:
        return iri.rsplit("/", 1)[1]
    return iri


def parse_ntriples_line(
    line: str,
    prefixes: Iterable[str] = (),
    lineno: int | None = None,
) -> tuple[str, str, str] | None:
    """Parse one N-Triples line to a (subject, predicate, object) of local ids.

    Comment and blank lines, and statements with literal objects, yield None.
    """
    stripped = line.strip()
    if not stripped or stripped.startswith("#"):
        return None
    match = _NT_LINE.match(stripped)
    if match is None:
        raise LineParseError("not a subject-predicate-object statement", lineno)
    subject, predicate, obj = match.groups()
    if obj.startswith('"'):
        return None  # literal object carries no entity pair
    if not (obj.startswith("<") and obj.endswith(">")):
        raise LineParseError(f"unrecognised object term: {obj[:40]!r}", lineno)
    return (
        strip_iri(subject, prefixes),
        strip_iri(predicate, prefixes),
        strip_iri(obj[1:-1], prefixes),
    )


class TypeIndex:
    """Immutable entity -> EntityType map; unknown entities are OTHER."""

    def __init__(self, types: dict, config: TypeConfig):
        self._types = types
        self.config = config

    def type_of(self, entity: str) -> EntityType:
        return self._types.get(entity, EntityType.OTHER)

    def __len__(self) -> int:
        return len(self._types)

    def __contains__(self, entity: str) -> bool:
        return entity in self._types


def build_type_index(
    class_assertions: Iterable[tuple[str, str]],
    subclass_edges: Iterable[tuple[str, str]],
    config: TypeConfig | None = None,
) -> TypeIndex:
    """Resolve every asserted entity to PER/ORG/LOC/OTHER.

    An entity gets type T iff one of its asserted classes reaches a root class
    of T within ``max_chain_depth`` subclass hops; conflicts resolve by the
    configured precedence order. Traversal is visited-set bounded, so cyclic
    subclass graphs terminate.
    """
    config = config or TypeConfig()
    supers: dict = defaultdict(set)
    for cls, super_cls in subclass_edges:
        supers[cls].add(super_cls)

    root_types: dict = defaultdict(set)
    for etype, roots in config.type_roots.items():
        for root in roots:
            root_types[root].add(etype)

    reachable_cache: dict = {}

    def reachable_types(start: str) -> frozenset:
        cached = reachable_cache.get(start)
        if cached is not None:
            return cached
        found = set()
        visited = {start}
        frontier = [start]
        depth = 0
        while frontier and depth <= config.max_chain_depth:
            for cls in frontier:
                found.update(root_types.get(cls, ()))
            if depth == config.max_chain_depth:
                break
            frontier = [
                nxt for cls in frontier for nxt in supers.get(cls, ()) if nxt not in visited
            ]
            visited.update(frontier)
            depth += 1
        result = frozenset(found)
        reachable_cache[start] = result
        return result

    entity_classes: dict = defaultdict(set)
    for entity, cls in class_assertions:
        entity_classes[entity].add(cls)

    types = {}
    for entity, classes in entity_classes.items():
        found = set()
        for cls in classes:
            found |= reachable_types(cls)
        for etype in config.precedence:
            if etype in found:
                types[entity] = etype
                break
    return TypeIndex(types, config)


def extract_typed_triples(
    statements: Iterable[tuple[str, str, str]],
    index: TypeIndex,
    source: Source,
    stats: IngestStats | None = None,
) -> Iterator[Triple]:
    """Keep exactly the statements whose endpoints both type to PER/ORG/LOC.

    Order-preserving; untyped statements are silently dropped (counted on
    ``stats`` when given).
    """
    for head, relation, tail in statements:
        head_type = index.type_of(head)
        tail_type = index.type_of(tail)
        triple = Triple(head, relation, tail, head_type, tail_type, source)
        if triple.is_typed:
            if stats is not None:
                stats.typed += 1
            yield triple
        elif stats is not None:
            stats.dropped_untyped += 1


class SupportIndex:
    """Typed-triple counts per (source, raw relation, bucket)."""

    def __init__(self):
        self._counts: dict = defaultdict(lambda: defaultdict(int))

    def add(self, source: Source, relation: str, bucket: Bucket, count: int = 1) -> None:
        if count < 0:
            raise ValueError("support counts are non-negative")
        self._counts[(source, relation)][bucket.name] += count

    def add_triple(self, triple: Triple) -> None:
        self.add(triple.source, triple.relation, triple.bucket)

    def merge(self, other: "SupportIndex") -> "SupportIndex":
        for (source, relation), buckets in other._counts.items():
            for bucket_name, count in buckets.items():
                self._counts[(source, relation)][bucket_name] += count
        return self

    def bucket_counts(self, source: Source, relation: str) -> dict:
        return dict(self._counts.get((source, relation), {}))

    def total(self, source: Source, relation: str) -> int:
        return sum(self._counts.get((source, relation), {}).values())

    def relations(self, source: Source | None = None) -> list:
        keys = self._counts.keys()
        if source is not None:
            keys = [k for k in keys if k[0] is source]
        return sorted(keys, key=lambda k: (k[0].value, k[1]))

    def records(self) -> Iterator[dict]:
        for source, relation in self.relations():
            buckets = self._counts[(source, relation)]
            yield {
                "source": source.value,
                "relation": relation,
                "buckets": dict(sorted(buckets.items())),
                "total": sum(buckets.values()),
            }

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for record in self.records():
                fh.write(json.dumps(record, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "SupportIndex":
        index = cls()
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                record = json.loads(line)
                source = Source(record["source"])
                for bucket_name, count in record["buckets"].items():
                    index.add(source, record["relation"], Bucket.parse(bucket_name), count)
        return index


def count_support(triples: Iterable[Triple]) -> SupportIndex:
    """Tally typed triples per (source, relation, bucket)."""
    index = SupportIndex()
    for triple in triples:
        index.add_triple(triple)
    return index


# ---------------------------------------------------------------------------
# Dump scanning and file formats


def open_text(path):
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, "rt", encoding="utf-8")
    return open(path, encoding="utf-8")


def _iter_lines(paths) -> Iterator[tuple[int, str]]:
    for path in paths:
        with open_text(path) as fh:
            for lineno, line in enumerate(fh, 1):
                yield lineno, line


def scan_wikidata(paths, config: TypeConfig, stats: IngestStats) -> Iterator[ParsedEntity]:
    for lineno, line in _iter_lines(paths):
        stats.lines += 1
        try:
            entity = parse_wikidata_entity(line, config.instance_of, lineno)
        except LineParseError as exc:
            stats.record_error(lineno, exc.reason)
            continue
        if entity is None:
            stats.skipped += 1
            continue
        stats.parsed += 1
        yield entity


def scan_ntriples(paths, config: TypeConfig, stats: IngestStats) -> Iterator[tuple[str, str, str]]:
    for lineno, line in _iter_lines(paths):
        stats.lines += 1
        try:
            statement = parse_ntriples_line(line, config.prefixes, lineno)
        except LineParseError as exc:
            stats.record_error(lineno, exc.reason)
            continue
        if statement is None:
            stats.skipped += 1
            continue
        stats.parsed += 1
        yield statement


@dataclass
class IngestResult:
    triples: list
    support: SupportIndex
    stats: IngestStats


def ingest_dump(kind: str, paths, config: TypeConfig | None = None) -> IngestResult:
    """Run the full ingest pipeline over dump files.

    Pass 1 builds the type index from instance-of assertions and subclass
    edges; pass 2 extracts entity-pair statements, keeps the typed ones,
    deduplicates exact (head, relation, tail, source) repeats and counts
    support. Triples come back in canonical sorted order, so shard order
    does not affect the result.
    """
    config = config or TypeConfig()
    stats = IngestStats()
    instance_props = set(config.instance_of)
    subclass_props = set(config.subclass_of)

    if kind == "wikidata":
        source = Source.WIKIDATA

        def statement_stream(collect_types):
            pass_stats = stats if collect_types else IngestStats()
            for entity in scan_wikidata(paths, config, pass_stats):
                for prop, target in entity.statements:
                    if prop in subclass_props:
                        if collect_types:
                            yield "subclass", (entity.entity_id, target)
                    elif not collect_types:
                        yield entity.entity_id, prop, target
                if collect_types:
                    for cls in entity.classes:
                        yield "class", (entity.entity_id, cls)

        class_assertions = []
        subclass_edges = []
        for tag, pair in statement_stream(collect_types=True):
            (class_assertions if tag == "class" else subclass_edges).append(pair)
        index = build_type_index(class_assertions, subclass_edges, config)
        raw_statements = statement_stream(collect_types=False)
    elif kind == "dbpedia":
        source = Source.DBPEDIA
        class_assertions = []
        subclass_edges = []
        for s, p, o in scan_ntriples(paths, config, stats):
            if p in instance_props:
                class_assertions.append((s, o))
            elif p in subclass_props:
                subclass_edges.append((s, o))
        index = build_type_index(class_assertions, subclass_edges, config)

        def raw_ntriples():
            silent = IngestStats()
            for s, p, o in scan_ntriples(paths, config, silent):
                if p not in instance_props and p not in subclass_props:
                    yield s, p, o

        raw_statements = raw_ntriples()
    else:
        raise ValueError(f"unknown dump kind: {kind!r}")

    seen = set()
    triples = []
    for triple in extract_typed_triples(raw_statements, index, source, stats):
        key = (triple.head, triple.relation, triple.tail, triple.source)
        if key in seen:
            continue
        seen.add(key)
        triples.append(triple)
    triples.sort(key=_triple_sort_key)
    stats.statements = stats.typed + stats.dropped_untyped
    return IngestResult(triples, count_support(triples), stats)


def _triple_sort_key(t: Triple):
    return (t.source.value, t.relation, t.head, t.tail)


TRIPLES_HEADER = ["head", "relation", "tail", "headType", "tailType", "source"]


def write_typed_triples(triples: Iterable[Triple], path, derived: dict | None = None) -> int:
    """Write the canonical typed-triples TSV (sorted, exact duplicates removed).

    ``derived`` maps (head, relation, tail) to a bool; passing it adds the
    `derived` column used by inference output.
    """
    unique = sorted(set(triples), key=_triple_sort_key)
    header = list(TRIPLES_HEADER) + (["derived"] if derived is not None else [])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(header) + "\n")
        for t in unique:
            row = [t.head, t.relation, t.tail, t.head_type.value, t.tail_type.value, t.source.value]
            if derived is not None:
                row.append("1" if derived.get((t.head, t.relation, t.tail)) else "0")
            fh.write("\t".join(row) + "\n")
    return len(unique)


def read_typed_triples(path, include_derived: bool = False) -> Iterator[Triple]:
    """Stream triples back from a typed-triples TSV.

    Rows flagged derived=1 are skipped unless asked for: support counting and
    completeness statistics must reflect asserted evidence only.
    """
    with open_text(path) as fh:
        header = fh.readline().rstrip("\n").split("\t")
        try:
            cols = {name: header.index(name) for name in TRIPLES_HEADER}
        except ValueError as exc:
            raise LineParseError(f"missing column in {path}: {exc}") from exc
        derived_col = header.index("derived") if "derived" in header else None
        for lineno, line in enumerate(fh, 2):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if derived_col is not None and not include_derived and parts[derived_col] == "1":
                continue
            yield Triple(
                parts[cols["head"]],
                parts[cols["relation"]],
                parts[cols["tail"]],
                EntityType(parts[cols["headType"]]),
                EntityType(parts[cols["tailType"]]),
                Source(parts[cols["source"]]),
            )
