import json
import random
from pathlib import Path

import pytest

from reltax.hierarchy import Hierarchy
from reltax.types import all_buckets

REPO = Path(__file__).resolve().parent.parent
DATA = REPO / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


@pytest.fixture(scope="session")
def common_hierarchy() -> Hierarchy:
    return Hierarchy.load(DATA / "hierarchy-common.json")


def wikidata_line(entity_id: str, claims: dict, trailing_comma: bool = False) -> str:
    """Hand-build one dump line: claims maps property -> list of target ids
    (entity references) or ("literal", value) markers."""
    claim_obj = {}
    for prop, targets in claims.items():
        claim_list = []
        for target in targets:
            if isinstance(target, tuple) and target[0] == "literal":
                claim_list.append(
                    {
                        "mainsnak": {
                            "snaktype": "value",
                            "property": prop,
                            "datavalue": {"type": "string", "value": target[1]},
                        }
                    }
                )
            else:
                claim_list.append(
                    {
                        "mainsnak": {
                            "snaktype": "value",
                            "property": prop,
                            "datavalue": {
                                "type": "wikibase-entityid",
                                "value": {"entity-type": "item", "id": target},
                            },
                        }
                    }
                )
        claim_obj[prop] = claim_list
    line = json.dumps({"type": "item", "id": entity_id, "claims": claim_obj})
    return line + ("," if trailing_comma else "")


def random_hierarchy(rng: random.Random, max_nodes: int = 30, tag: str = "T") -> Hierarchy:
    """A valid random hierarchy with relation chains up to depth 5."""
    h = Hierarchy(tag)
    buckets = all_buckets()
    n = rng.randint(1, max_nodes)
    names = [f"r{i:02d}" for i in range(n)]
    for name in names:
        bucket = rng.choice(buckets)
        candidates = [
            existing
            for existing, node in h.nodes.items()
            if node.bucket == bucket and h.depth(existing) < 5
        ]
        if candidates and rng.random() < 0.6:
            h.place(name, rng.choice(candidates))
        else:
            h.place(name, bucket)
    return h
