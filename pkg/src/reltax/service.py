"""HTTP curation API.

Reads serve immutable snapshots; every mutation is validated, appended to the
decision log, then swapped in atomically. The log is the source of truth:
restarting the service and replaying the log reproduces the state exactly.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Iterable

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .analysis import depth_histogram
from .canonical import AliasMap
from .decisions import (
    ACTIONS,
    CurationBase,
    CurationDecision,
    ReplayError,
    append_log,
    apply_decision,
    copy_pool,
    now_utc,
)
from .hierarchy import DuplicateNameError, Hierarchy
from .ingest import read_typed_triples
from .types import BUCKET_NAMES, Triple

SUPPORT_PREVIEW_CAP = 20


@dataclass(frozen=True)
class Snapshot:
    hierarchy: Hierarchy
    pool: dict
    alias_map: AliasMap
    decisions: tuple


class CurationService:
    """Single-writer curation state behind the HTTP API."""

    def __init__(
        self,
        base: CurationBase,
        initial: Hierarchy | None = None,
        log_path=None,
        decisions: Iterable[CurationDecision] = (),
        support_samples: dict | None = None,
    ):
        self.base = base
        self.initial = initial
        self.log_path = log_path
        self.support_samples = support_samples or {}
        self._lock = threading.Lock()
        hierarchy = initial.copy() if initial is not None else Hierarchy(base.tag)
        pool = copy_pool(base.pool)
        alias_map = AliasMap()
        applied = []
        for decision in decisions:
            apply_decision(hierarchy, pool, alias_map, decision)
            applied.append(decision)
        self._snapshot = Snapshot(hierarchy, pool, alias_map, tuple(applied))

    @property
    def snapshot(self) -> Snapshot:
        return self._snapshot

    def submit(self, decision_fields: dict) -> CurationDecision:
        """Validate and apply one decision; exactly one concurrent writer wins."""
        with self._lock:
            current = self._snapshot
            decision = CurationDecision(
                sequence=(current.decisions[-1].sequence + 1) if current.decisions else 1,
                timestamp=now_utc(),
                **decision_fields,
            )
            hierarchy = current.hierarchy.copy()
            pool = copy_pool(current.pool)
            alias_map = AliasMap()
            for alias, rep, provenance in current.alias_map.entries():
                alias_map.add(alias, rep, provenance)
            apply_decision(hierarchy, pool, alias_map, decision)
            if self.log_path is not None:
                append_log(decision, self.log_path)
            self._snapshot = Snapshot(
                hierarchy, pool, alias_map, current.decisions + (decision,)
            )
            return decision


class DecisionIn(BaseModel):
    action: str
    actor: str = "anonymous"
    name: str | None = None
    parent: str | None = None
    bucket: str | None = None
    group: list = []
    representative: str | None = None


def load_support_samples(triples_path, base: CurationBase, cap: int = SUPPORT_PREVIEW_CAP) -> dict:
    """Sample up to ``cap`` support triples per canonical relation from a
    typed-triples file, for the curator's placement evidence."""
    alias_to_name = {}
    for name, entry in base.pool.items():
        for alias in entry.aliases | {name}:
            alias_to_name.setdefault(alias, name)
    samples: dict = {}
    for triple in read_typed_triples(triples_path):
        name = alias_to_name.get(triple.relation)
        if name is None:
            continue
        bucket_samples = samples.setdefault(name, [])
        if len(bucket_samples) < cap:
            bucket_samples.append(_triple_dict(triple))
    return samples


def _triple_dict(t: Triple) -> dict:
    return {
        "head": t.head,
        "relation": t.relation,
        "tail": t.tail,
        "headType": t.head_type.value,
        "tailType": t.tail_type.value,
        "source": t.source.value,
    }


def _relation_view(name: str, snapshot: Snapshot) -> dict:
    entry = snapshot.pool.get(name)
    node = snapshot.hierarchy.nodes.get(name)
    view = {
        "name": name,
        "placed": node is not None,
        "bucket": None,
        "sources": [],
        "supportTotal": 0,
        "supportByBucket": {},
        "filtered": False,
        "introduced": bool(node.introduced) if node else False,
        "parent": node.parent if node else None,
    }
    if entry is not None:
        view.update(
            bucket=entry.bucket.name if entry.bucket else None,
            sources=sorted(s.value for s in entry.sources),
            supportTotal=entry.support_total,
            supportByBucket=dict(sorted(entry.support_by_bucket.items())),
            filtered=entry.filtered,
        )
    if node is not None:
        view["bucket"] = node.bucket.name
        view["sources"] = sorted(s.value for s in node.sources) or view["sources"]
    return view


def create_app(service: CurationService) -> FastAPI:
    app = FastAPI(title="reltax curation service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/buckets")
    def buckets():
        snapshot = service.snapshot
        placed: dict = {name: 0 for name in BUCKET_NAMES}
        unplaced: dict = {name: 0 for name in BUCKET_NAMES}
        for node in snapshot.hierarchy.nodes.values():
            placed[node.bucket.name] += 1
        for name, entry in snapshot.pool.items():
            if entry.filtered and name not in snapshot.hierarchy and entry.bucket:
                unplaced[entry.bucket.name] += 1
        return [
            {"bucket": name, "placed": placed[name], "unplaced": unplaced[name]}
            for name in BUCKET_NAMES
        ]

    @app.get("/relations")
    def relations(
        status: str = Query("all", pattern="^(unplaced|placed|all)$"),
        bucket: str | None = None,
    ):
        snapshot = service.snapshot
        names = set(snapshot.pool) | set(snapshot.hierarchy.nodes)
        views = []
        for name in sorted(names):
            view = _relation_view(name, snapshot)
            if status == "unplaced" and (view["placed"] or not view["filtered"]):
                continue
            if status == "placed" and not view["placed"]:
                continue
            if bucket is not None and view["bucket"] != bucket:
                continue
            views.append(view)
        return views

    @app.get("/relations/{name}/support")
    def support(name: str, limit: int = Query(SUPPORT_PREVIEW_CAP, ge=1)):
        snapshot = service.snapshot
        if name not in snapshot.pool and name not in snapshot.hierarchy:
            raise HTTPException(status_code=404, detail=f"unknown relation {name!r}")
        samples = service.support_samples.get(name, [])
        return samples[: min(limit, SUPPORT_PREVIEW_CAP)]

    @app.get("/hierarchy")
    def hierarchy_doc():
        return service.snapshot.hierarchy.to_doc()

    @app.get("/stats")
    def stats():
        snapshot = service.snapshot
        out = depth_histogram(snapshot.hierarchy).to_dict()
        out["tag"] = snapshot.hierarchy.tag
        return out

    @app.post("/decisions", status_code=201)
    def post_decision(body: DecisionIn):
        if body.action not in ACTIONS:
            raise HTTPException(status_code=422, detail=f"unknown action {body.action!r}")
        fields = {
            "action": body.action,
            "actor": body.actor,
            "name": body.name,
            "parent": body.parent,
            "bucket": body.bucket,
            "group": tuple(body.group),
            "representative": body.representative,
        }
        try:
            decision = service.submit(fields)
        except ReplayError as exc:
            status = 409 if isinstance(exc.__cause__, DuplicateNameError) else 422
            raise HTTPException(status_code=status, detail=exc.reason) from exc
        return decision.to_dict()

    @app.get("/decisions")
    def get_decisions(since: int = 0):
        return [d.to_dict() for d in service.snapshot.decisions if d.sequence > since]

    return app


def serve(service: CurationService, host: str = "127.0.0.1", port: int = 8630) -> None:
    import uvicorn

    uvicorn.run(create_app(service), host=host, port=port, log_level="info")
