"""reltax: build, curate, merge and query a taxonomy of PER/ORG/LOC
knowledge-base relations."""

from .types import Bucket, EntityType, Source, Triple, all_buckets
from .canonical import (
    AliasMap,
    RelationRecord,
    Stage,
    apply_alias_map,
    canonicalization_report,
    canonicalize_records,
    filter_by_support,
    normalize_name,
)
from .hierarchy import Hierarchy, RelationNode, assign_bucket, merge_hierarchies
from .inference import LabeledTriple, aggregate_instance_counts, infer_closure
from .analysis import (
    bucket_distribution,
    coverage_report,
    depth_histogram,
    kb_completeness,
    source_overlap,
)
from .ingest import (
    SupportIndex,
    TypeConfig,
    TypeIndex,
    build_type_index,
    count_support,
    extract_typed_triples,
    parse_ntriples_line,
    parse_wikidata_entity,
)
from .decisions import CurationBase, CurationDecision, replay_decisions

__version__ = "0.1.0"

__all__ = [
    "AliasMap",
    "Bucket",
    "CurationBase",
    "CurationDecision",
    "EntityType",
    "Hierarchy",
    "LabeledTriple",
    "RelationNode",
    "RelationRecord",
    "Source",
    "Stage",
    "SupportIndex",
    "Triple",
    "TypeConfig",
    "TypeIndex",
    "aggregate_instance_counts",
    "all_buckets",
    "apply_alias_map",
    "assign_bucket",
    "bucket_distribution",
    "build_type_index",
    "canonicalization_report",
    "canonicalize_records",
    "count_support",
    "coverage_report",
    "depth_histogram",
    "extract_typed_triples",
    "filter_by_support",
    "infer_closure",
    "kb_completeness",
    "merge_hierarchies",
    "normalize_name",
    "parse_ntriples_line",
    "parse_wikidata_entity",
    "replay_decisions",
    "source_overlap",
]
