import random
from fractions import Fraction

import pytest

from reltax.analysis import (
    bucket_distribution,
    coverage_report,
    depth_histogram,
    kb_completeness,
    load_dataset_tsv,
    load_mapping_tsv,
    render_buckets,
    render_coverage,
    render_histogram,
    render_overlap,
    source_overlap,
)
from reltax.canonical import AliasMap
from reltax.hierarchy import Hierarchy
from reltax.types import Bucket, EntityType, RelTaxError, Source, Triple, all_buckets


class TestDepthHistogram:
    def test_common_fixture_counts(self, common_hierarchy):
        hist = depth_histogram(common_hierarchy)
        assert (hist.total, hist.depth3, hist.depth4, hist.depth5) == (623, 357, 247, 19)
        assert 3 <= hist.mean_depth <= 5

    @pytest.mark.parametrize(
        "name, expected",
        [
            ("infobox", (351, 177, 168, 6)),
            ("dbpedia", (282, 162, 110, 10)),
            ("wikidata", (267, 209, 52, 6)),
        ],
    )
    def test_per_source_fixture_counts(self, data_dir, name, expected):
        hist = depth_histogram(Hierarchy.load(data_dir / f"hierarchy-{name}.json"))
        assert (hist.total, hist.depth3, hist.depth4, hist.depth5) == expected

    def test_empty_hierarchy_all_zero(self):
        hist = depth_histogram(Hierarchy("T"))
        assert (hist.total, hist.depth3, hist.depth4, hist.depth5) == (0, 0, 0, 0)
        assert hist.mean_depth is None

    def test_counts_partition_total(self, common_hierarchy):
        hist = depth_histogram(common_hierarchy)
        assert hist.depth3 + hist.depth4 + hist.depth5 == hist.total


class TestBucketDistribution:
    def test_fixture_extremes(self, common_hierarchy):
        dist = bucket_distribution(common_hierarchy)
        assert dist["loc-loc"] == 113
        assert dist["org-loc"] == 24
        assert max(dist.values()) == 113 and min(dist.values()) == 24
        assert sum(dist.values()) == 623

    def test_single_relation(self):
        h = Hierarchy("T")
        h.place("spouse", Bucket.parse("per-per"))
        dist = bucket_distribution(h)
        assert dist["per-per"] == 1 and sum(dist.values()) == 1

    def test_one_per_bucket(self):
        h = Hierarchy("T")
        for i, bucket in enumerate(all_buckets()):
            h.place(f"r{i}", bucket)
        assert all(count == 1 for count in bucket_distribution(h).values())

    def test_by_source_counts_once_per_source(self):
        h = Hierarchy("T")
        h.place("placeOfBirth", Bucket.parse("per-loc"),
                sources=(Source.INFOBOX, Source.DBPEDIA, Source.WIKIDATA))
        dist = bucket_distribution(h, by_source=True)
        assert dist["per-loc"] == {"INFOBOX": 1, "DBPEDIA": 1, "WIKIDATA": 1}


class TestSourceOverlap:
    def test_fixture_three_way_region_near_ten_percent(self, common_hierarchy):
        regions = source_overlap(common_hierarchy)
        three = next(r for r in regions if len(r.sources) == 3)
        assert abs(float(three.fraction) - 0.10) <= 0.015

    def test_regions_partition_non_introduced(self, common_hierarchy):
        regions = source_overlap(common_hierarchy)
        population = sum(1 for n in common_hierarchy.nodes.values() if not n.introduced)
        assert sum(r.count for r in regions) == population
        assert sum(r.fraction for r in regions) == 1

    def test_all_single_source_three_way_zero(self):
        h = Hierarchy("T")
        h.place("a", Bucket.parse("per-per"), sources=(Source.WIKIDATA,))
        h.place("b", Bucket.parse("loc-loc"), sources=(Source.DBPEDIA,))
        three = next(r for r in source_overlap(h) if len(r.sources) == 3)
        assert three.count == 0

    def test_all_three_sources_everywhere_is_total(self):
        h = Hierarchy("T")
        for i in range(3):
            h.place(f"r{i}", Bucket.parse("per-per"), sources=tuple(Source))
        three = next(r for r in source_overlap(h) if len(r.sources) == 3)
        assert three.count == 3 and three.fraction == 1


def table3_style_datasets():
    """Synthetic dataset lists shaped like the reference comparison:
    subsumed 11/35/27/61 of restricted 17/47/29/64, totals 24/51/41/100."""
    shapes = [("ace", 24, 17, 11), ("nyt", 51, 47, 35), ("tac", 41, 29, 27), ("few", 100, 64, 61)]
    datasets = []
    mapping = {}
    for name, total, restricted, subsumed in shapes:
        relations = []
        for i in range(subsumed):
            rel = f"{name}:in{i}"
            relations.append((rel, True))
            mapping[rel] = "placeOfBirth"
        for i in range(restricted - subsumed):
            relations.append((f"{name}:miss{i}", True))
        for i in range(total - restricted):
            relations.append((f"{name}:out{i}", False))
        datasets.append((name, relations))
    return datasets, mapping


class TestCoverageReport:
    def hierarchy(self):
        h = Hierarchy("T")
        h.place("placeOfBirth", Bucket.parse("per-loc"))
        h.place("founder", Bucket.parse("org-per"))
        return h

    def test_micro_averages_match_hand_computation(self):
        datasets, mapping = table3_style_datasets()
        report = coverage_report(datasets, self.hierarchy(), mapping)
        assert report.micro_average_restricted == Fraction(134, 157)
        assert report.micro_average_all == Fraction(134, 216)
        assert abs(float(report.micro_average_restricted) * 100 - 85.35) < 0.01
        assert abs(float(report.micro_average_all) * 100 - 62.04) < 0.1

    def test_normalization_path_subsumes_without_mapping(self):
        report = coverage_report(
            [("d", [("place of birth", True), ("unknown thing", True)])],
            self.hierarchy(),
        )
        row = report.datasets[0]
        assert row.subsumed == 1
        assert row.matched == (("place of birth", "placeOfBirth"),)

    def test_alias_map_resolves_before_lookup(self):
        amap = AliasMap()
        amap.add("birthPlace", "placeOfBirth")
        report = coverage_report(
            [("d", [("birth place", True)])], self.hierarchy(), alias_map=amap
        )
        assert report.datasets[0].subsumed == 1

    def test_mapping_to_unknown_node_is_config_error(self):
        with pytest.raises(RelTaxError):
            coverage_report([("d", [("x", True)])], self.hierarchy(), {"x": "nope"})

    def test_empty_dataset_list(self):
        report = coverage_report([], self.hierarchy())
        assert report.datasets == ()
        assert report.micro_average_restricted is None
        assert report.micro_average_all is None

    def test_invariant_subsumed_le_restricted_le_total(self):
        datasets, mapping = table3_style_datasets()
        report = coverage_report(datasets, self.hierarchy(), mapping)
        for row in report.datasets:
            assert row.subsumed <= row.restricted <= row.total

    def test_fixture_files_roundtrip(self, data_dir, common_hierarchy):
        datasets = [
            (name, load_dataset_tsv(data_dir / "coverage" / f"{name}.tsv"))
            for name in ("ace2004", "nyt2010", "tacred", "fewrel")
        ]
        mapping = load_mapping_tsv(data_dir / "coverage" / "mapping.tsv")
        report = coverage_report(datasets, common_hierarchy, mapping)
        assert [row.subsumed for row in report.datasets] == [11, 35, 27, 61]
        assert [row.restricted for row in report.datasets] == [17, 47, 29, 64]
        assert [row.total for row in report.datasets] == [24, 51, 41, 100]


PER, ORG, LOC = EntityType.PER, EntityType.ORG, EntityType.LOC


class TestKbCompleteness:
    def test_quarter_of_persons(self):
        triples = [
            Triple(f"p{i}", "placeOfBirth", f"c{i}", PER, LOC, Source.DBPEDIA)
            for i in range(25)
        ]
        assert kb_completeness(triples, {PER: 100}, "placeOfBirth") == Fraction(1, 4)

    def test_no_triples_zero(self):
        assert kb_completeness([], {PER: 10}, "placeOfBirth") == 0

    def test_distinct_head_counting(self):
        triples = [
            Triple("p1", "placeOfBirth", f"c{i}", PER, LOC, Source.DBPEDIA) for i in range(3)
        ]
        assert kb_completeness(triples, {PER: 10}, "placeOfBirth") == Fraction(1, 10)

    def test_zero_population_rejected(self):
        triples = [Triple("p1", "r", "c", PER, LOC, Source.DBPEDIA)]
        with pytest.raises(RelTaxError):
            kb_completeness(triples, {PER: 0}, "r")

    def test_thousand_entities_match_tally_oracle(self):
        rng = random.Random(13)
        triples = []
        for i in range(1000):
            head = f"p{rng.randint(0, 400)}"
            relation = rng.choice(["placeOfBirth", "spouse", "employer"])
            triples.append(Triple(head, relation, f"t{i}", PER, LOC, Source.WIKIDATA))
        expected_heads = {t.head for t in triples if t.relation == "placeOfBirth"}
        result = kb_completeness(triples, {PER: 500}, "placeOfBirth")
        assert result == Fraction(len(expected_heads), 500)


class TestRenderers:
    def test_every_report_renders_both_flavours(self, common_hierarchy):
        hist = depth_histogram(common_hierarchy)
        assert "623" in render_histogram(hist, "H", "text")
        assert render_histogram(hist, "H", "tsv").startswith("tag\t")
        dist = bucket_distribution(common_hierarchy)
        assert "loc-loc" in render_buckets(dist, "text")
        assert "bucket\tcount" in render_buckets(dist, "tsv")
        regions = source_overlap(common_hierarchy)
        assert "+" in render_overlap(regions, "text")
        assert render_overlap(regions, "tsv").startswith("sources\t")
        datasets, mapping = table3_style_datasets()
        h = Hierarchy("T")
        h.place("placeOfBirth", Bucket.parse("per-loc"))
        report = coverage_report(datasets, h, mapping)
        assert "85.35" in render_coverage(report, "text")
        assert "micro_average_all" in render_coverage(report, "tsv")
