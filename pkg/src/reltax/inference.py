"""Taxonomic-closure inference over triples and count aggregation up the tree."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .hierarchy import ROOT_NAME, Hierarchy
from .types import RelTaxError, all_buckets


@dataclass(frozen=True)
class LabeledTriple:
    """A triple labeled with a hierarchy relation.

    ``derived`` marks triples produced by closure inference rather than
    asserted; it does not participate in equality, so an inferred triple that
    also exists asserted is a single set element.
    """

    head: str
    relation: str
    tail: str
    derived: bool = field(default=False, compare=False)


def infer_closure(triples: Iterable[LabeledTriple], h: Hierarchy) -> set:
    """Close a triple set upward: every triple also holds under each is-a
    ancestor of its relation.

    Argument order is preserved (is-a edges stay within one bucket, so the
    head/tail types remain valid). Inferred triples carry derived=True; an
    inferred triple equal to an asserted one stays asserted.
    """
    flags: dict = {}
    triples = list(triples)
    for t in triples:
        key = (t.head, t.relation, t.tail)
        flags[key] = flags.get(key, True) and t.derived
    for t in triples:
        for ancestor in h.ancestors(t.relation):
            key = (t.head, ancestor, t.tail)
            if key not in flags:
                flags[key] = True
    return {
        LabeledTriple(head, relation, tail, derived)
        for (head, relation, tail), derived in flags.items()
    }


def _as_fraction(value) -> Fraction:
    if isinstance(value, float):
        raise TypeError(
            f"pass counts as int/Fraction/str, not float ({value!r}); floats drift"
        )
    return Fraction(value)


def aggregate_instance_counts(leaf_counts: Mapping, h: Hierarchy) -> dict:
    """Aggregate per-relation values bottom-up through the hierarchy.

    Every node's value is its own count (0 when absent) plus the sum over its
    children, computed in exact fraction arithmetic. The result also carries
    the structural levels (buckets, head types, root), so the root holds the
    conserved total.
    """
    own: dict = {}
    for name, value in leaf_counts.items():
        if name not in h.nodes:
            raise RelTaxError(f"count keyed by unknown relation {name!r}")
        own[name] = _as_fraction(value)

    children: dict = {}
    bucket_roots: dict = {}
    for name, node in h.nodes.items():
        if node.parent is None:
            bucket_roots.setdefault(node.bucket.name, []).append(name)
        else:
            children.setdefault(node.parent, []).append(name)

    totals: dict = {}

    def total(name: str) -> Fraction:
        if name in totals:
            return totals[name]
        value = own.get(name, Fraction(0)) + sum(
            (total(child) for child in children.get(name, [])), Fraction(0)
        )
        totals[name] = value
        return value

    for name in h.nodes:
        total(name)
    for bucket in all_buckets():
        totals[bucket.name] = sum(
            (totals[n] for n in bucket_roots.get(bucket.name, [])), Fraction(0)
        )
    for head in ("loc", "org", "per"):
        totals[head] = sum(
            (totals[b.name] for b in all_buckets() if b.head.short == head), Fraction(0)
        )
    totals[ROOT_NAME] = totals["loc"] + totals["org"] + totals["per"]
    return totals
