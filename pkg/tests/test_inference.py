import random
from fractions import Fraction

import pytest

from reltax.hierarchy import Hierarchy, UnknownNameError
from reltax.inference import LabeledTriple, aggregate_instance_counts, infer_closure
from reltax.types import Bucket, RelTaxError

from conftest import random_hierarchy

PER_PER = Bucket.parse("per-per")
PER_LOC = Bucket.parse("per-loc")


def closure_oracle(triples, h):
    """Independent reference: per-triple parent-pointer walk over the raw
    serialized document, no library ancestor code."""
    parents = {n["name"]: n["parent"] for n in h.to_doc()["nodes"]}
    expected = {}
    for t in triples:
        key = (t.head, t.relation, t.tail)
        expected[key] = expected.get(key, True) and t.derived
    for t in triples:
        current = parents[t.relation]
        while current is not None:
            key = (t.head, current, t.tail)
            expected.setdefault(key, True)
            current = parents[current]
    return expected


def as_flags(triple_set):
    return {(t.head, t.relation, t.tail): t.derived for t in triple_set}


class TestInferClosure:
    def family(self):
        h = Hierarchy("T")
        h.place("parent", PER_PER)
        h.place("father", "parent")
        h.place("mother", "parent")
        return h

    def test_father_infers_parent(self):
        h = self.family()
        out = infer_closure([LabeledTriple("Albert", "father", "Hermann")], h)
        assert LabeledTriple("Albert", "parent", "Hermann") in out
        flags = as_flags(out)
        assert flags[("Albert", "father", "Hermann")] is False
        assert flags[("Albert", "parent", "Hermann")] is True
        assert len(out) == 2

    def test_depth3_relation_adds_nothing(self):
        h = self.family()
        triples = {LabeledTriple("a", "parent", "b")}
        assert infer_closure(triples, h) == triples

    def test_inferred_equal_to_asserted_stays_asserted(self):
        h = self.family()
        out = infer_closure(
            [
                LabeledTriple("Albert", "father", "Hermann"),
                LabeledTriple("Albert", "parent", "Hermann"),
            ],
            h,
        )
        assert len(out) == 2
        assert as_flags(out)[("Albert", "parent", "Hermann")] is False

    def test_unknown_relation_rejected(self):
        h = self.family()
        with pytest.raises(UnknownNameError):
            infer_closure([LabeledTriple("a", "bogus", "b")], h)

    def test_matches_bruteforce_oracle_on_random_instances(self):
        for seed in range(40):
            rng = random.Random(seed)
            h = random_hierarchy(rng, max_nodes=30)
            names = list(h.nodes)
            triples = [
                LabeledTriple(f"e{rng.randint(0, 9)}", rng.choice(names), f"e{rng.randint(0, 9)}")
                for _ in range(rng.randint(1, 20))
            ]
            assert as_flags(infer_closure(triples, h)) == closure_oracle(triples, h)

    def test_idempotent(self):
        for seed in range(10):
            rng = random.Random(100 + seed)
            h = random_hierarchy(rng)
            names = list(h.nodes)
            triples = {
                LabeledTriple(f"x{rng.randint(0, 5)}", rng.choice(names), f"y{rng.randint(0, 5)}")
                for _ in range(15)
            }
            once = infer_closure(triples, h)
            twice = infer_closure(once, h)
            assert as_flags(once) == as_flags(twice)

    def test_monotone(self):
        rng = random.Random(5)
        h = random_hierarchy(rng)
        names = list(h.nodes)
        triples = [
            LabeledTriple(f"x{i}", rng.choice(names), f"y{i}") for i in range(12)
        ]
        small = infer_closure(triples[:6], h)
        big = infer_closure(triples, h)
        assert {(t.head, t.relation, t.tail) for t in small} <= {
            (t.head, t.relation, t.tail) for t in big
        }

    def test_size_bound(self):
        rng = random.Random(11)
        h = random_hierarchy(rng)
        names = list(h.nodes)
        triples = [LabeledTriple(f"x{i}", rng.choice(names), f"y{i}") for i in range(20)]
        out = infer_closure(triples, h)
        bound = sum(1 + h.depth(t.relation) - 3 for t in triples)
        assert len(out) <= bound


class TestAggregateInstanceCounts:
    def test_tacred_death_places_sum_exactly(self):
        h = Hierarchy("T")
        h.place("placeOfDeath", PER_LOC)
        for child in ("cityOfDeath", "countryOfDeath", "stateorprovinceOfDeath"):
            h.place(child, "placeOfDeath")
        counts = {
            "cityOfDeath": "0.12",
            "countryOfDeath": "0.01",
            "stateorprovinceOfDeath": "0.07",
        }
        totals = aggregate_instance_counts(counts, h)
        assert totals["placeOfDeath"] == Fraction("0.20")
        assert totals["rel"] == Fraction("0.20")

    def test_single_leaf_propagates(self):
        h = Hierarchy("T")
        h.place("a", PER_PER)
        h.place("b", "a")
        totals = aggregate_instance_counts({"b": 3}, h)
        assert totals["a"] == 3 and totals["b"] == 3
        assert totals["per-per"] == 3 and totals["per"] == 3 and totals["rel"] == 3

    def test_unknown_relation_rejected(self):
        h = Hierarchy("T")
        h.place("a", PER_PER)
        with pytest.raises(RelTaxError):
            aggregate_instance_counts({"nope": 1}, h)

    def test_floats_rejected(self):
        h = Hierarchy("T")
        h.place("a", PER_PER)
        with pytest.raises(TypeError):
            aggregate_instance_counts({"a": 0.12}, h)

    def test_random_tree_conservation(self):
        for seed in range(30):
            rng = random.Random(seed)
            h = random_hierarchy(rng, max_nodes=25)
            counts = {
                name: rng.randint(0, 50)
                for name in h.nodes
                if rng.random() < 0.7
            }
            totals = aggregate_instance_counts(counts, h)
            # flat summation oracle
            assert totals["rel"] == sum(counts.values())
            assert totals["rel"] == totals["per"] + totals["org"] + totals["loc"]

    def test_internal_node_own_value_included(self):
        h = Hierarchy("T")
        h.place("parent", PER_PER)
        h.place("father", "parent")
        totals = aggregate_instance_counts({"parent": 5, "father": 2}, h)
        assert totals["parent"] == 7
