#!/usr/bin/env python3
"""Regenerate the reference fixtures under data/.

The shipped hierarchy files are deterministic synthetic stand-ins that
reproduce the reference statistics exactly (relation totals, depth counts,
bucket extremes, source-overlap regions); the real curated node names are not
redistributable here. Everything is seeded, so reruns are byte-identical.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

from reltax.hierarchy import Hierarchy
from reltax.types import Bucket, Source

DATA = Path(__file__).resolve().parent.parent / "data"

# (bucket, depth-3 count, depth-4 count, depth-5 count) per hierarchy
COMMON = {
    "loc-loc": (60, 45, 8),
    "loc-org": (34, 22, 0),
    "loc-per": (30, 20, 0),
    "org-loc": (16, 8, 0),
    "org-org": (33, 22, 0),
    "org-per": (48, 32, 0),
    "per-loc": (49, 36, 5),
    "per-org": (36, 24, 0),
    "per-per": (51, 38, 6),
}

INFOBOX = {
    "loc-loc": (26, 26, 3),
    "loc-org": (13, 13, 0),
    "loc-per": (13, 13, 0),
    "org-loc": (8, 6, 0),
    "org-org": (16, 14, 0),
    "org-per": (23, 22, 0),
    "per-loc": (28, 27, 0),
    "per-org": (21, 19, 0),
    "per-per": (29, 28, 3),
}

DBPEDIA = {
    "loc-loc": (27, 18, 5),
    "loc-org": (12, 8, 0),
    "loc-per": (12, 8, 0),
    "org-loc": (9, 5, 0),
    "org-org": (17, 11, 0),
    "org-per": (21, 14, 0),
    "per-loc": (22, 18, 5),
    "per-org": (18, 12, 0),
    "per-per": (24, 16, 0),
}

WIKIDATA = {
    "loc-loc": (33, 9, 3),
    "loc-org": (20, 4, 0),
    "loc-per": (21, 4, 0),
    "org-loc": (12, 3, 0),
    "org-org": (20, 5, 0),
    "org-per": (24, 6, 0),
    "per-loc": (32, 8, 0),
    "per-org": (20, 5, 0),
    "per-per": (27, 8, 3),
}

# Region sizes over the 611 source-carrying nodes of the common hierarchy.
REGIONS = [
    (("DBPEDIA", "INFOBOX", "WIKIDATA"), 61),
    (("DBPEDIA", "INFOBOX"), 69),
    (("INFOBOX", "WIKIDATA"), 59),
    (("DBPEDIA", "WIKIDATA"), 39),
    (("INFOBOX",), 162),
    (("DBPEDIA",), 113),
    (("WIKIDATA",), 108),
]

# A few real relation names woven into the synthetic common hierarchy:
# (name, bucket, depth, parent or None).
FLAVOR = [
    ("placeOfBirth", "per-loc", 3, None),
    ("placeOfDeath", "per-loc", 3, None),
    ("cityOfDeath", "per-loc", 4, "placeOfDeath"),
    ("countryOfDeath", "per-loc", 4, "placeOfDeath"),
    ("stateorprovinceOfDeath", "per-loc", 4, "placeOfDeath"),
    ("parent", "per-per", 3, None),
    ("father", "per-per", 4, "parent"),
    ("mother", "per-per", 4, "parent"),
    ("spouse", "per-per", 3, None),
    ("founder", "org-per", 3, None),
    ("keyPerson", "org-per", 3, None),
    ("country", "loc-loc", 3, None),
    ("capital", "loc-loc", 3, None),
]

# 12 curated grouping nodes: one depth-3 node per bucket plus three depth-4.
INTRODUCED_D3_PER_BUCKET = 1
INTRODUCED_D4_BUCKETS = ("loc-loc", "per-loc", "per-per")


def camel(bucket_name: str) -> str:
    head, tail = bucket_name.split("-")
    return head + tail.capitalize()


def build(tag: str, layout: dict, flavor=(), introduced=False) -> Hierarchy:
    h = Hierarchy(tag)
    flavor_by_bucket: dict = {}
    for name, bucket, depth, parent in flavor:
        flavor_by_bucket.setdefault((bucket, depth), []).append((name, parent))

    for bucket_name in sorted(layout):
        bucket = Bucket.parse(bucket_name)
        d3, d4, d5 = layout[bucket_name]
        prefix = camel(bucket_name)

        d3_names = [name for name, _ in flavor_by_bucket.get((bucket_name, 3), [])]
        index = 0
        while len(d3_names) < d3:
            index += 1
            d3_names.append(f"{prefix}Relation{index:03d}")
        for name in d3_names:
            h.place(name, bucket)

        d4_names = []
        for name, parent in flavor_by_bucket.get((bucket_name, 4), []):
            h.place(name, parent)
            d4_names.append(name)
        index = 0
        slot = 0
        while len(d4_names) < d4:
            index += 1
            name = f"{prefix}Sub{index:03d}"
            h.place(name, d3_names[slot % len(d3_names)])
            d4_names.append(name)
            slot += 1
        index = 0
        slot = 0
        for _ in range(d5):
            index += 1
            h.place(f"{prefix}Leaf{index:03d}", d4_names[slot % len(d4_names)])
            slot += 1

    if introduced:
        marks = []
        for bucket_name in sorted(layout):
            marks.append(f"{camel(bucket_name)}Relation001")
        for bucket_name in INTRODUCED_D4_BUCKETS:
            marks.append(f"{camel(bucket_name)}Sub001")
        for name in marks:
            node = h.nodes[name]
            h.nodes[name] = type(node)(
                name=node.name,
                bucket=node.bucket,
                parent=node.parent,
                sources=frozenset(),
                introduced=True,
            )
    return h


def tag_sources_common(h: Hierarchy) -> None:
    names = [n for n in sorted(h.nodes) if not h.nodes[n].introduced]
    assignments = []
    for sources, count in REGIONS:
        assignments.extend([sources] * count)
    assert len(assignments) == len(names), (len(assignments), len(names))
    rng = random.Random(42)
    rng.shuffle(assignments)
    plan = dict(zip(names, assignments))
    # placeOfBirth is the canonical everywhere-present example; force it into
    # the three-way region by swapping with whoever holds that slot.
    want = ("DBPEDIA", "INFOBOX", "WIKIDATA")
    if plan["placeOfBirth"] != want:
        donor = next(n for n in names if plan[n] == want)
        plan[donor] = plan["placeOfBirth"]
        plan["placeOfBirth"] = want
    for name, sources in plan.items():
        node = h.nodes[name]
        h.nodes[name] = type(node)(
            name=node.name,
            bucket=node.bucket,
            parent=node.parent,
            sources=frozenset(Source(s) for s in sources),
            introduced=False,
        )


def tag_single_source(h: Hierarchy, source: Source) -> None:
    for name, node in list(h.nodes.items()):
        h.nodes[name] = type(node)(
            name=node.name,
            bucket=node.bucket,
            parent=node.parent,
            sources=frozenset({source}),
            introduced=False,
        )


def write_coverage_fixtures(h: Hierarchy) -> None:
    """Dataset lists + manual mapping reproducing the reference coverage
    counts: subsumed 11/35/27/61 of restricted 17/47/29/64 (totals 24/51/41/100)."""
    out = DATA / "coverage"
    out.mkdir(parents=True, exist_ok=True)
    datasets = [
        ("ace2004", 24, 17, 11),
        ("nyt2010", 51, 47, 35),
        ("tacred", 41, 29, 27),
        ("fewrel", 100, 64, 61),
    ]
    # stable pool of mapping targets: hierarchy nodes in name order
    targets = [n for n in sorted(h.nodes) if not h.nodes[n].introduced]
    mapping_rows = []
    target_index = 0
    for name, total, restricted, subsumed in datasets:
        rows = []
        # name-hit examples resolve by normalization alone; they are
        # hierarchy names spelled in each dataset's own convention
        name_hits = [("place of birth", "placeOfBirth"), ("founder", "founder")]
        used_hits = name_hits[: min(2, subsumed)]
        for relation, _ in used_hits:
            rows.append((relation, 1))
        for i in range(subsumed - len(used_hits)):
            relation = f"{name}:rel{i:03d}"
            rows.append((relation, 1))
            mapping_rows.append((relation, targets[target_index % len(targets)]))
            target_index += 1
        for i in range(restricted - subsumed):
            rows.append((f"{name}:unmatched{i:03d}", 1))
        for i in range(total - restricted):
            rows.append((f"{name}:outofscope{i:03d}", 0))
        with open(out / f"{name}.tsv", "w", encoding="utf-8") as fh:
            for relation, flag in rows:
                fh.write(f"{relation}\t{flag}\n")
    with open(out / "mapping.tsv", "w", encoding="utf-8") as fh:
        for relation, target in mapping_rows:
            fh.write(f"{relation}\t{target}\n")


def write_type_configs() -> None:
    configs = {
        "config-wikidata.json": {
            "type_roots": {
                "PER": ["Q5"],
                "ORG": ["Q43229"],
                "LOC": ["Q17334923", "Q2221906", "Q515", "Q6256"],
            },
            "max_chain_depth": 3,
            "precedence": ["PER", "ORG", "LOC"],
            "instance_of": ["P31"],
            "subclass_of": ["P279"],
        },
        "config-dbpedia.json": {
            "type_roots": {
                "PER": ["Person"],
                "ORG": ["Organisation", "Organization"],
                "LOC": ["Place", "Location", "PopulatedPlace"],
            },
            "max_chain_depth": 3,
            "precedence": ["PER", "ORG", "LOC"],
            "instance_of": ["type"],
            "subclass_of": ["subClassOf"],
            "prefixes": [
                "http://dbpedia.org/resource/",
                "http://dbpedia.org/ontology/",
                "http://www.w3.org/1999/02/22-rdf-syntax-ns#",
                "http://www.w3.org/2000/01/rdf-schema#",
            ],
        },
    }
    for name, payload in configs.items():
        with open(DATA / name, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")


def write_demo_inputs() -> None:
    """A dump slice small enough to read, for the README walkthrough."""
    demo = DATA / "demo"
    demo.mkdir(parents=True, exist_ok=True)

    def claim(prop, target):
        return {
            "mainsnak": {
                "snaktype": "value",
                "property": prop,
                "datavalue": {
                    "type": "wikibase-entityid",
                    "value": {"entity-type": "item", "id": target},
                },
            },
            "type": "statement",
            "rank": "normal",
        }

    entities = [
        {"id": "Q937", "claims": {"P31": [claim("P31", "Q5")], "P19": [claim("P19", "Q9166")],
                                  "P22": [claim("P22", "Q88665")]}},
        {"id": "Q88665", "claims": {"P31": [claim("P31", "Q5")]}},
        {"id": "Q9166", "claims": {"P31": [claim("P31", "Q515")]}},
        {"id": "Q312", "claims": {"P31": [claim("P31", "Q43229")],
                                  "P112": [claim("P112", "Q19837")]}},
        {"id": "Q19837", "claims": {"P31": [claim("P31", "Q5")]}},
        {"id": "Q515", "claims": {"P279": [claim("P279", "Q2221906")]}},
    ]
    with open(demo / "wikidata.json", "w", encoding="utf-8") as fh:
        fh.write("[\n")
        for i, entity in enumerate(entities):
            comma = "," if i < len(entities) - 1 else ""
            fh.write(json.dumps(entity, sort_keys=True) + comma + "\n")
        fh.write("]\n")

    nt_lines = [
        "<http://dbpedia.org/resource/Albert_Einstein> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://dbpedia.org/ontology/Person> .",
        "<http://dbpedia.org/resource/Ulm> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://dbpedia.org/ontology/City> .",
        "<http://dbpedia.org/ontology/City> <http://www.w3.org/2000/01/rdf-schema#subClassOf> <http://dbpedia.org/ontology/Place> .",
        "<http://dbpedia.org/resource/Albert_Einstein> <http://dbpedia.org/ontology/birthPlace> <http://dbpedia.org/resource/Ulm> .",
        '<http://dbpedia.org/resource/Albert_Einstein> <http://www.w3.org/2000/01/rdf-schema#label> "Albert Einstein"@en .',
    ]
    with open(demo / "dbpedia.nt", "w", encoding="utf-8") as fh:
        fh.write("\n".join(nt_lines) + "\n")

    infobox_rows = [
        ("birth_place", "infobox person", 180000, "per-loc"),
        ("death_place", "infobox person", 120000, "per-loc"),
        ("spouse", "infobox person", 90000, "per-per"),
        ("founder", "infobox company", 40000, "org-per"),
        ("rare_field", "infobox person", 42, "per-per"),
    ]
    with open(demo / "infobox.tsv", "w", encoding="utf-8") as fh:
        fh.write("relation\ttemplate\tusage_count\tbucket\n")
        for relation, template, usage, bucket in infobox_rows:
            fh.write(f"{relation}\t{template}\t{usage}\t{bucket}\n")


def main():
    DATA.mkdir(parents=True, exist_ok=True)

    common = build("H", COMMON, flavor=FLAVOR, introduced=True)
    tag_sources_common(common)
    assert not common.validate(), common.validate()
    common.save(DATA / "hierarchy-common.json")

    for tag, layout, source, filename in [
        ("Hi", INFOBOX, Source.INFOBOX, "hierarchy-infobox.json"),
        ("Hd", DBPEDIA, Source.DBPEDIA, "hierarchy-dbpedia.json"),
        ("Hw", WIKIDATA, Source.WIKIDATA, "hierarchy-wikidata.json"),
    ]:
        h = build(tag, layout)
        tag_single_source(h, source)
        assert not h.validate(), h.validate()
        h.save(DATA / filename)

    write_coverage_fixtures(common)
    write_type_configs()
    write_demo_inputs()
    print(f"fixtures written under {DATA}")


if __name__ == "__main__":
    main()
