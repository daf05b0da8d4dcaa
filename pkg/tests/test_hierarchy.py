import random

import pytest

from reltax.canonical import RelationRecord
from reltax.hierarchy import (
    CrossBucketError,
    DepthOverflowError,
    DuplicateNameError,
    Hierarchy,
    UnassignableError,
    UnknownNameError,
    assign_bucket,
    merge_hierarchies,
)
from reltax.types import Bucket, Source

PER_PER = Bucket.parse("per-per")
PER_LOC = Bucket.parse("per-loc")
ORG_PER = Bucket.parse("org-per")
LOC_LOC = Bucket.parse("loc-loc")


def rec(name, buckets=None, declared=None):
    return RelationRecord(
        raw_name=name,
        source=Source.WIKIDATA,
        canonical_name=name,
        support_by_bucket=buckets or {},
        support_total=sum((buckets or {}).values()),
        declared_bucket=declared,
    )


class TestAssignBucket:
    def test_max_support_wins(self):
        assert assign_bucket(rec("founder", {"org-per": 500, "per-per": 3})) == ORG_PER

    def test_single_bucket(self):
        assert assign_bucket(rec("spouse", {"per-per": 7})) == PER_PER

    def test_tie_breaks_lexicographically(self):
        assert assign_bucket(rec("x", {"loc-loc": 10, "org-loc": 10})) == LOC_LOC

    def test_declared_bucket_fallback(self):
        assert assign_bucket(rec("birth_place", declared=PER_LOC)) == PER_LOC

    def test_unassignable(self):
        with pytest.raises(UnassignableError):
            assign_bucket(rec("mystery", {"per-per": 0}))


class TestPlacement:
    def test_place_under_bucket_is_depth_3(self):
        h = Hierarchy("T")
        h.place("parent", PER_PER)
        assert h.depth("parent") == 3
        assert h.ancestors("parent") == []

    def test_place_child_under_relation(self):
        h = Hierarchy("T")
        h.place("parent", PER_PER)
        h.place("father", "parent")
        assert h.depth("father") == 4
        assert h.ancestors("father") == ["parent"]

    def test_depth_overflow_at_six(self):
        h = Hierarchy("T")
        h.place("a", PER_PER)
        h.place("b", "a")
        h.place("c", "b")
        assert h.depth("c") == 5
        with pytest.raises(DepthOverflowError):
            h.place("d", "c")

    def test_cross_bucket_parent_rejected(self):
        h = Hierarchy("T")
        h.place("founder", ORG_PER)
        with pytest.raises(CrossBucketError):
            h.place("father", "founder", bucket=PER_PER)

    def test_duplicate_name_rejected(self):
        h = Hierarchy("T")
        h.place("spouse", PER_PER)
        with pytest.raises(DuplicateNameError):
            h.place("spouse", PER_PER)

    def test_reserved_names_rejected(self):
        h = Hierarchy("T")
        with pytest.raises(DuplicateNameError):
            h.place("rel", PER_PER)
        with pytest.raises(DuplicateNameError):
            h.place("per-loc", PER_PER)

    def test_unknown_parent_rejected(self):
        h = Hierarchy("T")
        with pytest.raises(UnknownNameError):
            h.place("father", "parent")

    def test_ancestors_of_depth5_node(self):
        h = Hierarchy("T")
        h.place("a", PER_LOC)
        h.place("b", "a")
        h.place("c", "b")
        assert h.ancestors("c") == ["b", "a"]
        assert len(h.ancestors("c")) == h.depth("c") - 3


class TestIntroduce:
    def test_introduced_node_has_no_sources(self):
        h = Hierarchy("T")
        node = h.introduce("placeOfDeathGroup", PER_LOC)
        assert node.introduced and node.sources == frozenset()

    def test_introduce_duplicate_rejected(self):
        h = Hierarchy("T")
        h.introduce("g", PER_LOC)
        with pytest.raises(DuplicateNameError):
            h.introduce("g", PER_LOC)

    def test_children_under_introduced_parent(self):
        h = Hierarchy("T")
        h.introduce("group", PER_LOC)
        h.place("cityOfDeath", "group")
        h.place("countryOfDeath", "group")
        assert h.depth("cityOfDeath") == h.depth("group") + 1
        assert sorted(h.children("group")) == ["cityOfDeath", "countryOfDeath"]


class TestValidate:
    def test_fresh_hierarchy_valid(self):
        h = Hierarchy("T")
        h.place("a", PER_PER)
        h.place("b", "a")
        h.introduce("g", LOC_LOC)
        assert h.validate() == []

    def test_corrupted_cross_bucket_edge_reported(self):
        h = Hierarchy("T")
        h.place("a", PER_PER)
        h.place("b", "a")
        node = h.nodes["b"]
        h.nodes["b"] = type(node)(node.name, LOC_LOC, node.parent, node.sources, node.introduced)
        kinds = {v.kind for v in h.validate()}
        assert "cross-bucket" in kinds

    def test_orphan_reported(self):
        h = Hierarchy("T")
        h.place("a", PER_PER)
        h.nodes["ghost"] = type(h.nodes["a"])("ghost", PER_PER, "nothere", frozenset(), False)
        kinds = {v.kind for v in h.validate()}
        assert "orphan" in kinds

    def test_cycle_reported(self):
        h = Hierarchy("T")
        h.place("a", PER_PER)
        h.place("b", "a")
        node_a = h.nodes["a"]
        h.nodes["a"] = type(node_a)("a", PER_PER, "b", node_a.sources, False)
        kinds = {v.kind for v in h.validate()}
        assert "cycle" in kinds

    def test_shipped_fixtures_validate_clean(self, data_dir):
        for name in ("common", "infobox", "dbpedia", "wikidata"):
            h = Hierarchy.load(data_dir / f"hierarchy-{name}.json")
            assert h.validate() == [], name


class TestSerialization:
    def test_roundtrip_preserves_everything(self):
        h = Hierarchy("T")
        h.place("parent", PER_PER, sources=(Source.WIKIDATA, Source.DBPEDIA))
        h.place("father", "parent", sources=(Source.INFOBOX,))
        h.introduce("group", LOC_LOC)
        again = Hierarchy.from_doc(h.to_doc())
        assert again.tag == "T"
        assert again.nodes == h.nodes

    def test_byte_stable_output(self, tmp_path):
        def build(order):
            h = Hierarchy("T")
            for name in order:
                h.place(name, PER_PER)
            return h

        a = build(["alpha", "beta", "gamma"]).dumps()
        b = build(["gamma", "alpha", "beta"]).dumps()
        assert a == b

    def test_duplicate_names_in_file_reported(self):
        doc = {
            "tag": "T",
            "nodes": [
                {"name": "a", "bucket": "per-per", "parent": None, "sources": [], "introduced": False},
                {"name": "a", "bucket": "per-per", "parent": None, "sources": [], "introduced": False},
            ],
        }
        h = Hierarchy.from_doc(doc)
        assert any(v.kind == "duplicate" for v in h.validate())


class TestMerge:
    def build(self, tag, nodes):
        h = Hierarchy(tag)
        for name, parent, bucket, sources in nodes:
            h.place(name, parent or bucket, sources=sources)
        return h

    def test_disjoint_union_no_conflicts(self):
        h1 = self.build("A", [("x", None, PER_PER, (Source.INFOBOX,))])
        h2 = self.build("B", [("y", None, LOC_LOC, (Source.DBPEDIA,))])
        merged, conflicts = merge_hierarchies([h1, h2])
        assert len(merged.nodes) == 2 and conflicts == []

    def test_same_name_unions_sources(self):
        h1 = self.build("A", [("placeOfBirth", None, PER_LOC, (Source.INFOBOX,))])
        h2 = self.build("B", [("placeOfBirth", None, PER_LOC, (Source.DBPEDIA,))])
        merged, conflicts = merge_hierarchies([h1, h2])
        assert len(merged.nodes) == 1
        assert merged.nodes["placeOfBirth"].sources == {Source.INFOBOX, Source.DBPEDIA}
        assert conflicts == []

    def test_parent_disagreement_emits_conflict_first_wins(self):
        h1 = self.build(
            "A",
            [
                ("group1", None, PER_LOC, ()),
                ("cityOfDeath", "group1", PER_LOC, (Source.WIKIDATA,)),
            ],
        )
        h2 = self.build(
            "B",
            [
                ("group2", None, PER_LOC, ()),
                ("cityOfDeath", "group2", PER_LOC, (Source.DBPEDIA,)),
            ],
        )
        merged, conflicts = merge_hierarchies([h1, h2])
        assert merged.nodes["cityOfDeath"].parent == "group1"
        assert len(conflicts) == 1
        conflict = conflicts[0]
        assert conflict.name == "cityOfDeath"
        assert conflict.chosen_tag == "A"
        assert conflict.alternatives == (("B", "group2", "per-loc"),)

    def test_size_bound_and_equality_condition(self):
        h1 = self.build("A", [("x", None, PER_PER, ()), ("y", None, PER_PER, ())])
        h2 = self.build("B", [("y", None, PER_PER, ()), ("z", None, PER_PER, ())])
        merged, _ = merge_hierarchies([h1, h2])
        assert len(merged.nodes) <= len(h1.nodes) + len(h2.nodes)
        disjoint, _ = merge_hierarchies([h1, self.build("C", [("w", None, PER_PER, ())])])
        assert len(disjoint.nodes) == len(h1.nodes) + 1

    def test_merge_associativity_up_to_conflicts(self, data_dir):
        h1 = Hierarchy.load(data_dir / "hierarchy-infobox.json")
        h2 = Hierarchy.load(data_dir / "hierarchy-dbpedia.json")
        h3 = Hierarchy.load(data_dir / "hierarchy-wikidata.json")
        all_at_once, _ = merge_hierarchies([h1, h2, h3])
        ab, _ = merge_hierarchies([h1, h2])
        staged, _ = merge_hierarchies([ab, h3])
        assert set(all_at_once.nodes) == set(staged.nodes)
        for name in all_at_once.nodes:
            a, b = all_at_once.nodes[name], staged.nodes[name]
            assert (a.parent, a.bucket, a.sources) == (b.parent, b.bucket, b.sources)

    def test_introduced_only_if_introduced_everywhere(self):
        h1 = Hierarchy("A")
        h1.introduce("group", PER_LOC)
        h2 = Hierarchy("B")
        h2.place("group", PER_LOC, sources=(Source.WIKIDATA,))
        merged, _ = merge_hierarchies([h1, h2])
        assert not merged.nodes["group"].introduced
        assert merged.nodes["group"].sources == {Source.WIKIDATA}


class TestRandomizedInvariants:
    def test_place_sequences_always_validate_clean(self):
        from conftest import random_hierarchy

        for seed in range(25):
            h = random_hierarchy(random.Random(seed), max_nodes=40)
            assert h.validate() == []
            hist_sum = sum(1 for n in h.nodes if h.depth(n) in (3, 4, 5))
            assert hist_sum == len(h.nodes)
            for name, node in h.nodes.items():
                if node.parent is not None:
                    assert h.nodes[node.parent].bucket == node.bucket
