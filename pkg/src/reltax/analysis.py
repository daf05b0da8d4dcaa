"""Statistics over hierarchies and triple files: depth histograms, bucket
distributions, source overlap, dataset coverage and KB completeness."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .canonical import AliasMap, normalize_name
from .hierarchy import Hierarchy
from .types import DEFAULT_PRECEDENCE, RelTaxError, Source, Triple, all_buckets


@dataclass(frozen=True)
class DepthHistogram:
    total: int
    depth3: int
    depth4: int
    depth5: int
    mean_depth: Fraction | None

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "depth3": self.depth3,
            "depth4": self.depth4,
            "depth5": self.depth5,
            "mean_depth": float(self.mean_depth) if self.mean_depth is not None else None,
        }


def depth_histogram(h: Hierarchy) -> DepthHistogram:
    """Relation counts at depths 3/4/5 and the mean relation depth."""
    counts = {3: 0, 4: 0, 5: 0}
    depth_sum = 0
    for name in h.nodes:
        depth = h.depth(name)
        counts[depth] += 1
        depth_sum += depth
    total = len(h.nodes)
    return DepthHistogram(
        total=total,
        depth3=counts[3],
        depth4=counts[4],
        depth5=counts[5],
        mean_depth=Fraction(depth_sum, total) if total else None,
    )


def bucket_distribution(h: Hierarchy, by_source: bool = False) -> dict:
    """Relation count per bucket; with by_source, a node counts once per
    source it carries."""
    if not by_source:
        out = {b.name: 0 for b in all_buckets()}
        for node in h.nodes.values():
            out[node.bucket.name] += 1
        return out
    out = {b.name: {s.value: 0 for s in Source} for b in all_buckets()}
    for node in h.nodes.values():
        for source in node.sources:
            out[node.bucket.name][source.value] += 1
    return out


@dataclass(frozen=True)
class OverlapRegion:
    sources: tuple  # sorted source value names
    count: int
    fraction: Fraction

    @property
    def label(self) -> str:
        return "+".join(self.sources)


def source_overlap(h: Hierarchy) -> list:
    """Decompose non-introduced relations into the 7 source-combination
    regions (every nonempty subset of the three sources)."""
    totals: dict = {}
    population = 0
    for node in h.nodes.values():
        if node.introduced:
            continue
        population += 1
        key = tuple(sorted(s.value for s in node.sources))
        totals[key] = totals.get(key, 0) + 1
    regions = []
    source_names = sorted(s.value for s in Source)
    keys = []
    for mask in range(1, 8):
        keys.append(tuple(n for i, n in enumerate(source_names) if mask >> i & 1))
    for key in sorted(keys, key=lambda k: (len(k), k)):
        count = totals.get(key, 0)
        regions.append(
            OverlapRegion(key, count, Fraction(count, population) if population else Fraction(0))
        )
    untagged = totals.get((), 0)
    if untagged:
        regions.append(OverlapRegion((), untagged, Fraction(untagged, population)))
    return regions


@dataclass(frozen=True)
class DatasetCoverage:
    name: str
    total: int
    restricted: int
    subsumed: int
    matched: tuple  # of (dataset relation, hierarchy node)


@dataclass(frozen=True)
class CoverageReport:
    datasets: tuple
    micro_average_restricted: Fraction | None
    micro_average_all: Fraction | None


def coverage_report(
    datasets: Iterable[tuple],
    h: Hierarchy,
    mapping: dict | None = None,
    alias_map: AliasMap | None = None,
) -> CoverageReport:
    """How many dataset relations the hierarchy subsumes.

    ``datasets`` is an iterable of (name, [(relation, restricted), ...]).
    A restricted relation counts as subsumed when its normalized (and
    alias-resolved) name is a hierarchy node, or the manual mapping maps it
    to one. Micro averages pool counts across datasets.
    """
    mapping = mapping or {}
    for dataset_rel, target in mapping.items():
        if target not in h.nodes:
            raise RelTaxError(f"mapping for {dataset_rel!r} references unknown node {target!r}")

    rows = []
    sum_total = sum_restricted = sum_subsumed = 0
    for name, relations in datasets:
        total = len(relations)
        restricted = 0
        matched = []
        for relation, is_restricted in relations:
            if not is_restricted:
                continue
            restricted += 1
            target = _lookup(relation, h, mapping, alias_map)
            if target is not None:
                matched.append((relation, target))
        rows.append(
            DatasetCoverage(
                name=name,
                total=total,
                restricted=restricted,
                subsumed=len(matched),
                matched=tuple(matched),
            )
        )
        sum_total += total
        sum_restricted += restricted
        sum_subsumed += len(matched)
    return CoverageReport(
        datasets=tuple(rows),
        micro_average_restricted=(
            Fraction(sum_subsumed, sum_restricted) if sum_restricted else None
        ),
        micro_average_all=Fraction(sum_subsumed, sum_total) if sum_total else None,
    )


def _lookup(relation: str, h: Hierarchy, mapping: dict, alias_map: AliasMap | None) -> str | None:
    if relation in mapping:
        return mapping[relation]
    try:
        name = normalize_name(relation)
    except RelTaxError:
        return None
    if name in mapping:
        return mapping[name]
    if alias_map is not None:
        name = alias_map.resolve(name)
    return name if name in h.nodes else None


def load_dataset_tsv(path) -> list:
    """Read a dataset relation list: ``relation<TAB>restricted{0|1}`` rows."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) < 2 or parts[1].strip() not in ("0", "1"):
                raise RelTaxError(f"{path} line {lineno}: expected relation<TAB>0|1")
            out.append((parts[0].strip(), parts[1].strip() == "1"))
    return out


def load_mapping_tsv(path) -> dict:
    """Read a manual match file: ``dataset_relation<TAB>hierarchy_relation``."""
    mapping = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) < 2:
                raise RelTaxError(f"{path} line {lineno}: expected two tab-separated columns")
            mapping[parts[0].strip()] = parts[1].strip()
    return mapping


def kb_completeness(
    triples: Iterable[Triple],
    type_counts: dict,
    relation: str,
) -> Fraction:
    """Fraction of entities of the relation's head type with at least one
    triple of that relation (distinct-head counting)."""
    heads_by_type: dict = {}
    for triple in triples:
        if triple.relation != relation:
            continue
        heads_by_type.setdefault(triple.head_type, set()).add(triple.head)
    if not heads_by_type:
        return Fraction(0)
    head_type = min(
        heads_by_type,
        key=lambda t: (-len(heads_by_type[t]), DEFAULT_PRECEDENCE.index(t)),
    )
    population = type_counts.get(head_type)
    if not population or population <= 0:
        raise RelTaxError(f"no population for entity type {head_type.value}")
    return Fraction(len(heads_by_type[head_type]), population)


# ---------------------------------------------------------------------------
# Report rendering: every report comes in TSV and aligned-text flavours.


def render_histogram(hist: DepthHistogram, tag: str, fmt: str = "text") -> str:
    if fmt == "tsv":
        lines = ["tag\ttotal\tdepth3\tdepth4\tdepth5\tmean_depth"]
        mean = f"{float(hist.mean_depth):.4f}" if hist.mean_depth is not None else ""
        lines.append(f"{tag}\t{hist.total}\t{hist.depth3}\t{hist.depth4}\t{hist.depth5}\t{mean}")
        return "\n".join(lines) + "\n"
    mean = f"{float(hist.mean_depth):.3f}" if hist.mean_depth is not None else "-"
    return (
        f"hierarchy {tag}\n"
        f"  total relations : {hist.total}\n"
        f"  at depth 3      : {hist.depth3}\n"
        f"  at depth 4      : {hist.depth4}\n"
        f"  at depth 5      : {hist.depth5}\n"
        f"  mean depth      : {mean}\n"
    )


def render_buckets(dist: dict, fmt: str = "text") -> str:
    per_source = dist and isinstance(next(iter(dist.values())), dict)
    if fmt == "tsv":
        if per_source:
            sources = sorted(s.value for s in Source)
            lines = ["bucket\t" + "\t".join(sources)]
            for bucket, counts in sorted(dist.items()):
                lines.append(bucket + "\t" + "\t".join(str(counts[s]) for s in sources))
        else:
            lines = ["bucket\tcount"]
            for bucket, count in sorted(dist.items()):
                lines.append(f"{bucket}\t{count}")
        return "\n".join(lines) + "\n"
    lines = []
    for bucket, value in sorted(dist.items()):
        if per_source:
            detail = "  ".join(f"{s}={c}" for s, c in sorted(value.items()))
            lines.append(f"  {bucket:8s} {detail}")
        else:
            lines.append(f"  {bucket:8s} {value}")
    return "\n".join(lines) + "\n"


def render_overlap(regions: list, fmt: str = "text") -> str:
    if fmt == "tsv":
        lines = ["sources\tcount\tfraction"]
        for region in regions:
            lines.append(f"{region.label}\t{region.count}\t{float(region.fraction):.4f}")
        return "\n".join(lines) + "\n"
    lines = []
    for region in regions:
        label = region.label or "(untagged)"
        lines.append(f"  {label:30s} {region.count:6d}  {float(region.fraction) * 100:6.2f}%")
    return "\n".join(lines) + "\n"


def render_coverage(report: CoverageReport, fmt: str = "text") -> str:
    if fmt == "tsv":
        lines = ["dataset\ttotal\trestricted\tsubsumed"]
        for row in report.datasets:
            lines.append(f"{row.name}\t{row.total}\t{row.restricted}\t{row.subsumed}")
        if report.micro_average_restricted is not None:
            lines.append(
                "micro_average_restricted\t\t\t"
                f"{float(report.micro_average_restricted):.4f}"
            )
        if report.micro_average_all is not None:
            lines.append(f"micro_average_all\t\t\t{float(report.micro_average_all):.4f}")
        return "\n".join(lines) + "\n"
    lines = [f"  {'dataset':18s} {'total':>6s} {'restr':>6s} {'subsumed':>9s}"]
    for row in report.datasets:
        lines.append(f"  {row.name:18s} {row.total:6d} {row.restricted:6d} {row.subsumed:9d}")
    if report.micro_average_restricted is not None:
        lines.append(
            f"  micro average (restricted): {float(report.micro_average_restricted) * 100:.2f}%"
        )
    if report.micro_average_all is not None:
        lines.append(f"  micro average (all):        {float(report.micro_average_all) * 100:.2f}%")
    return "\n".join(lines) + "\n"
