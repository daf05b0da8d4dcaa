"""The taxonomy data model.

A hierarchy is a fixed skeleton -- root ``rel`` (depth 0), the three head
type nodes (depth 1), the 9 buckets (depth 2) -- plus relation nodes at
depths 3 to 5. Is-a edges connect relation nodes within one bucket only, and
each relation node has a single parent: either its bucket or another
relation node of the same bucket.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Iterable

from .canonical import RelationRecord
from .types import BUCKET_NAMES, Bucket, RelTaxError, Source, all_buckets

ROOT_NAME = "rel"
MAX_DEPTH = 5
_RESERVED = {ROOT_NAME, "per", "org", "loc"} | set(BUCKET_NAMES)


class HierarchyError(RelTaxError):
    pass


class DuplicateNameError(HierarchyError):
    pass


class UnknownNameError(HierarchyError):
    pass


class CrossBucketError(HierarchyError):
    pass


class DepthOverflowError(HierarchyError):
    pass


class UnassignableError(HierarchyError):
    pass


@dataclass(frozen=True)
class RelationNode:
    name: str
    bucket: Bucket
    parent: str | None = None  # None = attached directly to the bucket
    sources: frozenset = frozenset()
    introduced: bool = False


@dataclass(frozen=True)
class Violation:
    kind: str
    node: str
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.node}: {self.detail}"


def assign_bucket(record: RelationRecord) -> Bucket:
    """Bucket a relation record belongs to.

    The best-supported bucket wins, ties broken by lexicographic bucket name;
    records without support evidence fall back to their declared bucket.
    """
    nonzero = {name: count for name, count in record.support_by_bucket.items() if count > 0}
    if nonzero:
        best = min(nonzero, key=lambda name: (-nonzero[name], name))
        return Bucket.parse(best)
    if record.declared_bucket is not None:
        return record.declared_bucket
    raise UnassignableError(f"{record.name!r} has no support in any bucket and no declared bucket")


class Hierarchy:
    """Rooted relation taxonomy; mutated by one writer, snapshots shared read-only."""

    def __init__(self, tag: str = "H"):
        self.tag = tag
        self.nodes: dict = {}
        self._load_duplicates: list = []

    def __contains__(self, name: str) -> bool:
        return name in self.nodes

    def __len__(self) -> int:
        return len(self.nodes)

    def node(self, name: str) -> RelationNode:
        try:
            return self.nodes[name]
        except KeyError:
            raise UnknownNameError(f"no relation named {name!r} in hierarchy {self.tag}") from None

    def children(self, parent: str | None, bucket: Bucket | None = None) -> list:
        """Child names of a relation node (or of a bucket when parent is None)."""
        return sorted(
            name
            for name, node in self.nodes.items()
            if node.parent == parent and (parent is not None or node.bucket == bucket)
        )

    def depth(self, name: str) -> int:
        node = self.node(name)
        depth = 3
        seen = {name}
        while node.parent is not None:
            if node.parent in seen:
                raise HierarchyError(f"parent cycle through {node.parent!r}")
            seen.add(node.parent)
            node = self.node(node.parent)
            depth += 1
        return depth

    def ancestors(self, name: str) -> list:
        """Relation-node ancestors from parent upward (bucket/head/root excluded)."""
        out = []
        node = self.node(name)
        seen = {name}
        while node.parent is not None:
            if node.parent in seen:
                raise HierarchyError(f"parent cycle through {node.parent!r}")
            seen.add(node.parent)
            out.append(node.parent)
            node = self.node(node.parent)
        return out

    def _check_new_name(self, name: str) -> None:
        if not name:
            raise HierarchyError("relation name is empty")
        if name in self.nodes or name in _RESERVED:
            raise DuplicateNameError(f"{name!r} already names a node")

    def _resolve_parent(self, parent, bucket: Bucket | None) -> tuple:
        """Returns (parent name or None, bucket) for a placement target."""
        if isinstance(parent, Bucket):
            parent = parent.name
        if parent is None or parent in BUCKET_NAMES:
            target_bucket = Bucket.parse(parent) if parent else bucket
            if target_bucket is None:
                raise HierarchyError("placement under a bucket needs the bucket")
            if bucket is not None and target_bucket != bucket:
                raise CrossBucketError(
                    f"declared bucket {bucket.name} != placement bucket {target_bucket.name}"
                )
            return None, target_bucket
        parent_node = self.node(parent)
        if bucket is not None and parent_node.bucket != bucket:
            raise CrossBucketError(
                f"parent {parent!r} is in {parent_node.bucket.name}, not {bucket.name}"
            )
        if self.depth(parent) >= MAX_DEPTH:
            raise DepthOverflowError(f"child of {parent!r} would exceed depth {MAX_DEPTH}")
        return parent, parent_node.bucket

    def place(
        self,
        name: str,
        parent=None,
        bucket: Bucket | None = None,
        sources: Iterable[Source] = (),
    ) -> RelationNode:
        """Place a relation under its bucket or under a same-bucket relation node."""
        self._check_new_name(name)
        parent_name, node_bucket = self._resolve_parent(parent, bucket)
        node = RelationNode(name, node_bucket, parent_name, frozenset(sources), introduced=False)
        self.nodes[name] = node
        return node

    def introduce(self, name: str, bucket: Bucket, parent=None) -> RelationNode:
        """Add a curated grouping node that appears in no source list."""
        self._check_new_name(name)
        parent_name, node_bucket = self._resolve_parent(parent, bucket)
        node = RelationNode(name, node_bucket, parent_name, frozenset(), introduced=True)
        self.nodes[name] = node
        return node

    def reparent(self, name: str, parent) -> RelationNode:
        """Move an existing node (and its subtree) under a new parent."""
        node = self.node(name)
        if isinstance(parent, Bucket):
            parent = parent.name
        if parent == name or (parent is not None and parent not in BUCKET_NAMES and name in ([parent] + self.ancestors(parent))):
            raise HierarchyError(f"reparenting {name!r} under its own subtree")
        parent_name, node_bucket = self._resolve_parent(parent, node.bucket)
        moved = replace(node, parent=parent_name, bucket=node_bucket)
        self.nodes[name] = moved
        # the whole subtree shifts; its deepest leaf must stay within bounds
        overflow = [d for d in self._subtree_depths(name) if d > MAX_DEPTH]
        if overflow:
            self.nodes[name] = node
            raise DepthOverflowError(f"moving {name!r} pushes descendants past depth {MAX_DEPTH}")
        return moved

    def _subtree_depths(self, root: str) -> list:
        depths = [self.depth(root)]
        frontier = [root]
        while frontier:
            current = frontier.pop()
            for name, node in self.nodes.items():
                if node.parent == current:
                    depths.append(self.depth(name))
                    frontier.append(name)
        return depths

    def relation_names(self) -> list:
        return sorted(self.nodes)

    def validate(self) -> list:
        """Every violated invariant; an empty list means the hierarchy is valid."""
        violations = []
        for name in self._load_duplicates:
            violations.append(Violation("duplicate", name, "name defined more than once"))
        for name, node in sorted(self.nodes.items()):
            if node.parent is not None:
                parent = self.nodes.get(node.parent)
                if parent is None:
                    violations.append(Violation("orphan", name, f"parent {node.parent!r} missing"))
                    continue
                if parent.bucket != node.bucket:
                    violations.append(
                        Violation(
                            "cross-bucket",
                            name,
                            f"in {node.bucket.name} but parent {node.parent!r} is in {parent.bucket.name}",
                        )
                    )
            try:
                depth = self.depth(name)
            except HierarchyError:
                violations.append(Violation("cycle", name, "parent chain loops"))
                continue
            if depth > MAX_DEPTH:
                violations.append(Violation("depth", name, f"depth {depth} exceeds {MAX_DEPTH}"))
            if node.introduced and node.sources:
                violations.append(Violation("introduced-sources", name, "introduced node carries sources"))
        return violations

    def copy(self) -> "Hierarchy":
        out = Hierarchy(self.tag)
        out.nodes = dict(self.nodes)
        out._load_duplicates = list(self._load_duplicates)
        return out

    # -- serialization ------------------------------------------------------

    def _canonical_order(self) -> list:
        """Nodes bucket by bucket, depth-first with children sorted by name."""
        by_parent: dict = {}
        for name, node in self.nodes.items():
            by_parent.setdefault((node.bucket.name, node.parent), []).append(name)
        ordered = []
        emitted = set()

        def walk(bucket_name: str, parent: str | None):
            for name in sorted(by_parent.get((bucket_name, parent), [])):
                if name in emitted:
                    continue
                emitted.add(name)
                ordered.append(name)
                walk(bucket_name, name)

        for bucket in all_buckets():
            walk(bucket.name, None)
        # orphans and cycle members are unreachable from buckets; keep them anyway
        for name in sorted(self.nodes):
            if name not in emitted:
                ordered.append(name)
        return ordered

    def to_doc(self) -> dict:
        nodes = []
        for name in self._canonical_order():
            node = self.nodes[name]
            nodes.append(
                {
                    "name": node.name,
                    "bucket": node.bucket.name,
                    "parent": node.parent,
                    "sources": sorted(s.value for s in node.sources),
                    "introduced": node.introduced,
                }
            )
        return {"tag": self.tag, "nodes": nodes}

    @classmethod
    def from_doc(cls, doc: dict) -> "Hierarchy":
        h = cls(doc.get("tag", "H"))
        for raw in doc.get("nodes", []):
            node = RelationNode(
                name=raw["name"],
                bucket=Bucket.parse(raw["bucket"]),
                parent=raw.get("parent"),
                sources=frozenset(Source(s) for s in raw.get("sources", [])),
                introduced=bool(raw.get("introduced", False)),
            )
            if node.name in h.nodes:
                h._load_duplicates.append(node.name)
                continue
            h.nodes[node.name] = node
        return h

    def dumps(self) -> str:
        return json.dumps(self.to_doc(), indent=2, sort_keys=True) + "\n"

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path) -> "Hierarchy":
        with open(path, encoding="utf-8") as fh:
            return cls.from_doc(json.load(fh))


@dataclass(frozen=True)
class MergeConflict:
    """Same relation name, different parents (or buckets) across inputs."""

    name: str
    chosen_tag: str
    chosen_parent: str | None
    chosen_bucket: str
    alternatives: tuple  # of (tag, parent, bucket)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "chosen_tag": self.chosen_tag,
            "chosen_parent": self.chosen_parent,
            "chosen_bucket": self.chosen_bucket,
            "alternatives": [
                {"tag": t, "parent": p, "bucket": b} for t, p, b in self.alternatives
            ],
        }


def merge_hierarchies(hierarchies: Iterable["Hierarchy"], tag: str = "H") -> tuple:
    """Union hierarchies by canonical name.

    Nodes sharing a name unify with their sources unioned; when inputs
    disagree on the parent (or bucket), the earliest-listed hierarchy wins
    provisionally and a conflict is emitted for curation. Conflicts are data,
    not failures: the merged result may need `validate()` + resolution.
    """
    merged = Hierarchy(tag)
    first_tag: dict = {}
    disagreements: dict = {}
    for h in hierarchies:
        for name in h._canonical_order():
            node = h.nodes[name]
            if name not in merged.nodes:
                merged.nodes[name] = node
                first_tag[name] = h.tag
                continue
            kept = merged.nodes[name]
            if (node.parent, node.bucket) != (kept.parent, kept.bucket):
                disagreements.setdefault(name, []).append(
                    (h.tag, node.parent, node.bucket.name)
                )
            merged.nodes[name] = replace(
                kept,
                sources=kept.sources | node.sources,
                introduced=kept.introduced and node.introduced,
            )
    conflicts = [
        MergeConflict(
            name=name,
            chosen_tag=first_tag[name],
            chosen_parent=merged.nodes[name].parent,
            chosen_bucket=merged.nodes[name].bucket.name,
            alternatives=tuple(alts),
        )
        for name, alts in sorted(disagreements.items())
    ]
    return merged, conflicts


def save_conflicts(conflicts: Iterable[MergeConflict], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([c.to_dict() for c in conflicts], fh, indent=2, sort_keys=True)
        fh.write("\n")
