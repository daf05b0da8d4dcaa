"""Append-only curation log and deterministic replay.

Hierarchy curation is a sequence of logged human decisions. The log is the
source of truth: replaying it over the same base (filtered relation lists
plus the canonical lists consulted for parents) reproduces the hierarchy
byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable

from .canonical import AliasMap, RelationRecord, Stage
from .hierarchy import Hierarchy, HierarchyError, assign_bucket
from .types import Bucket, RelTaxError, Source

ACTIONS = ("PLACE", "INTRODUCE", "RESOLVE_CONFLICT", "CHOOSE_ALIAS")


class ReplayError(RelTaxError):
    """A decision that cannot apply; carries the offending sequence number."""

    def __init__(self, sequence: int, reason: str):
        self.sequence = sequence
        self.reason = reason
        super().__init__(f"decision {sequence}: {reason}")


@dataclass(frozen=True)
class CurationDecision:
    sequence: int
    action: str
    actor: str = "anonymous"
    timestamp: str = ""
    name: str | None = None
    parent: str | None = None
    bucket: str | None = None
    group: tuple = ()
    representative: str | None = None

    def __post_init__(self):
        if self.action not in ACTIONS:
            raise ValueError(f"unknown action {self.action!r}")

    def to_dict(self) -> dict:
        out = {
            "sequence": self.sequence,
            "timestamp": self.timestamp,
            "actor": self.actor,
            "action": self.action,
        }
        if self.action in ("PLACE", "INTRODUCE", "RESOLVE_CONFLICT"):
            out["name"] = self.name
            out["parent"] = self.parent
        if self.action == "INTRODUCE":
            out["bucket"] = self.bucket
        if self.action == "CHOOSE_ALIAS":
            out["group"] = sorted(self.group)
            out["representative"] = self.representative
        return out

    @classmethod
    def from_dict(cls, raw: dict) -> "CurationDecision":
        return cls(
            sequence=int(raw["sequence"]),
            action=raw["action"],
            actor=raw.get("actor", "anonymous"),
            timestamp=raw.get("timestamp", ""),
            name=raw.get("name"),
            parent=raw.get("parent"),
            bucket=raw.get("bucket"),
            group=tuple(raw.get("group", ())),
            representative=raw.get("representative"),
        )


def now_utc() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def save_log(decisions: Iterable[CurationDecision], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for decision in decisions:
            fh.write(json.dumps(decision.to_dict(), sort_keys=True) + "\n")


def append_log(decision: CurationDecision, path) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(decision.to_dict(), sort_keys=True) + "\n")


def load_log(path) -> list:
    decisions = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                decisions.append(CurationDecision.from_dict(json.loads(line)))
    return decisions


@dataclass
class PoolEntry:
    """One canonical relation awaiting (or eligible for) placement."""

    name: str
    sources: set
    aliases: set
    support_total: int
    support_by_bucket: dict
    declared_bucket: Bucket | None
    filtered: bool  # passed the support filter (unfiltered = canonical-list only)
    bucket: Bucket | None = None

    def to_record(self) -> RelationRecord:
        source = sorted(self.sources, key=lambda s: s.value)[0] if self.sources else Source.WIKIDATA
        return RelationRecord(
            raw_name=self.name,
            source=source,
            canonical_name=self.name,
            aliases=set(self.aliases),
            support_total=self.support_total,
            support_by_bucket=dict(self.support_by_bucket),
            declared_bucket=self.declared_bucket,
            stage=Stage.FILTERED if self.filtered else Stage.CANONICAL,
        )


@dataclass
class CurationBase:
    """Replay starting point: the relation pool and an empty hierarchy tag."""

    tag: str = "H"
    pool: dict = field(default_factory=dict)  # canonical name -> PoolEntry

    @classmethod
    def from_records(
        cls,
        filtered: Iterable[RelationRecord],
        canonical: Iterable[RelationRecord] = (),
        tag: str = "H",
    ) -> "CurationBase":
        base = cls(tag=tag)
        for is_filtered, records in ((True, filtered), (False, canonical)):
            for record in records:
                name = record.canonical_name or record.raw_name
                entry = base.pool.get(name)
                if entry is None:
                    entry = PoolEntry(
                        name=name,
                        sources=set(),
                        aliases=set(),
                        support_total=0,
                        support_by_bucket={},
                        declared_bucket=record.declared_bucket,
                        filtered=is_filtered,
                    )
                    base.pool[name] = entry
                entry.sources.add(record.source)
                entry.aliases |= record.aliases
                entry.support_total += record.support_total
                for bucket_name, count in record.support_by_bucket.items():
                    entry.support_by_bucket[bucket_name] = (
                        entry.support_by_bucket.get(bucket_name, 0) + count
                    )
                entry.filtered = entry.filtered or is_filtered
                if entry.declared_bucket is None:
                    entry.declared_bucket = record.declared_bucket
        for entry in base.pool.values():
            try:
                entry.bucket = assign_bucket(entry.to_record())
            except HierarchyError:
                entry.bucket = None
        return base


def check_sequence(decisions: Iterable[CurationDecision]) -> None:
    last = 0
    for decision in decisions:
        if decision.sequence <= last:
            raise ReplayError(
                decision.sequence,
                f"sequence numbers must increase strictly (previous was {last})",
            )
        last = decision.sequence


def apply_decision(
    h: Hierarchy,
    pool: dict,
    alias_map: AliasMap,
    decision: CurationDecision,
) -> None:
    """Apply one decision to hierarchy + pool state; raises ReplayError."""
    seq = decision.sequence
    try:
        if decision.action == "PLACE":
            entry = pool.get(decision.name)
            if entry is None:
                raise ReplayError(
                    seq,
                    f"{decision.name!r} is not in the filtered or canonical lists; "
                    "use INTRODUCE for genuinely new names",
                )
            bucket = entry.bucket or entry.declared_bucket
            if bucket is None:
                raise ReplayError(seq, f"{decision.name!r} has no assignable bucket")
            h.place(decision.name, decision.parent, bucket=bucket, sources=entry.sources)
        elif decision.action == "INTRODUCE":
            if decision.name in pool:
                raise ReplayError(
                    seq,
                    f"{decision.name!r} exists in the relation lists; PLACE it instead",
                )
            if not decision.bucket:
                raise ReplayError(seq, "INTRODUCE needs a bucket")
            h.introduce(decision.name, Bucket.parse(decision.bucket), decision.parent)
        elif decision.action == "RESOLVE_CONFLICT":
            h.reparent(decision.name, decision.parent)
        elif decision.action == "CHOOSE_ALIAS":
            _choose_alias(h, pool, alias_map, decision)
    except ReplayError:
        raise
    except (HierarchyError, RelTaxError, ValueError) as exc:
        raise ReplayError(seq, str(exc)) from exc


def _choose_alias(h: Hierarchy, pool: dict, alias_map: AliasMap, decision: CurationDecision) -> None:
    rep = decision.representative
    group = set(decision.group)
    if not rep or rep not in group:
        raise ReplayError(decision.sequence, "representative must be one of the group")
    placed = [n for n in group if n in h]
    if placed:
        raise ReplayError(
            decision.sequence,
            f"alias choice must precede placement; already placed: {sorted(placed)}",
        )
    missing = [n for n in group if n not in pool]
    if missing:
        raise ReplayError(decision.sequence, f"unknown relations in alias group: {sorted(missing)}")
    target = pool[rep]
    for name in sorted(group - {rep}):
        entry = pool.pop(name)
        target.sources |= entry.sources
        target.aliases |= entry.aliases | {name}
        target.support_total += entry.support_total
        for bucket_name, count in entry.support_by_bucket.items():
            target.support_by_bucket[bucket_name] = (
                target.support_by_bucket.get(bucket_name, 0) + count
            )
        target.filtered = target.filtered or entry.filtered
        alias_map.add(name, rep, AliasMap.MANUAL)
    try:
        target.bucket = assign_bucket(target.to_record())
    except HierarchyError:
        target.bucket = None


def copy_pool(pool: dict) -> dict:
    return {
        name: PoolEntry(
            name=entry.name,
            sources=set(entry.sources),
            aliases=set(entry.aliases),
            support_total=entry.support_total,
            support_by_bucket=dict(entry.support_by_bucket),
            declared_bucket=entry.declared_bucket,
            filtered=entry.filtered,
            bucket=entry.bucket,
        )
        for name, entry in pool.items()
    }


def replay_decisions(
    base: CurationBase,
    decisions: Iterable[CurationDecision],
    alias_map: AliasMap | None = None,
    initial: Hierarchy | None = None,
) -> Hierarchy:
    """Rebuild the hierarchy by replaying a decision log over a base.

    Deterministic: identical inputs produce byte-identical canonical files.
    A decision violating hierarchy invariants aborts with its sequence
    number; pool state is copied, so the base can be replayed again.
    ``initial`` seeds the hierarchy (e.g. a merged file awaiting conflict
    resolution) instead of starting empty.
    """
    decisions = list(decisions)
    check_sequence(decisions)
    h = initial.copy() if initial is not None else Hierarchy(base.tag)
    pool = copy_pool(base.pool)
    amap = alias_map if alias_map is not None else AliasMap()
    for decision in decisions:
        apply_decision(h, pool, amap, decision)
    return h
