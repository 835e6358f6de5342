"""JSON-over-HTTP facade for the explorer UI and programmatic clients.

Single-tenant and local-first: sessions live in process memory. Each session
caches the synthetic pool per (size, seed) and the boundary searches per
(observation, target class, search parameters); re-explaining with only
regression-side parameters changed therefore never repeats the expensive
model queries, which keeps the iterate-on-the-explanation loop fast.
"""
from __future__ import annotations

import itertools
import pathlib
import threading
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .config import RunConfig
from .dataset import load_csv, load_schema, split
from .errors import BcxError, ConfigError
from .estimator import estimate_b_perturbation, fidelity_error, percent_fidelity
from .explain import SCHEMA_VERSION, explain_observation, make_pool
from .models import BuiltinModelConfig, train_builtin, wrap_external
from .neighbourhood import (
    augment_with_counterfactuals,
    balanced_neighbourhood,
    imbalanced_neighbourhood,
)
from .surrogate import simplify as simplify_model


class ModelSpec(BaseModel):
    kind: str = "builtin"  # builtin | external
    family: str = "mlp_softmax"
    hidden_units: int = 16
    epochs: int = 400
    learning_rate: float = 0.5
    seed: int = 0
    command: Optional[list] = None
    class_count: Optional[int] = None


class SessionRequest(BaseModel):
    csv_path: str
    schema_path: str
    test_fraction: float = 0.2
    split_seed: int = 0
    model: ModelSpec = ModelSpec()


class ExplainRequest(BaseModel):
    observation_index: Optional[int] = None
    values: Optional[list] = None
    target_class: Optional[int] = None
    seed: int = 0
    overrides: dict = {}


class SimplifyRequest(BaseModel):
    observation_index: int
    target_class: Optional[int] = None
    keep: list


class Session:
    def __init__(self, sid, train, test, model):
        self.id = sid
        self.train = train
        self.test = test
        self.model = model
        self.pools = {}  # (count, seed) -> SyntheticPool
        self.bps = {}  # (obs_key, target, search sig) -> (bps, flips)
        self.last = {}  # obs_key -> {"config", "seed", "explanations"}
        self.lock = threading.Lock()
        self._obs_locks = {}

    def obs_lock(self, key):
        with self.lock:
            if key not in self._obs_locks:
                self._obs_locks[key] = threading.Lock()
            return self._obs_locks[key]

    def pool_for(self, cfg, seed):
        count = cfg.lime_samples if cfg.method == "lime" else cfg.pool_size
        key = (count, seed)
        with self.lock:
            pool = self.pools.get(key)
        if pool is None:
            pool = make_pool(self.train, self.model, cfg, seed)
            with self.lock:
                self.pools.setdefault(key, pool)
        return pool


def _search_sig(cfg):
    return (cfg.search_steps, cfg.refine_tol, cfg.boundary_threshold)


def create_app():
    app = FastAPI(title="bcx service", version="0.1.0")
    app.state.sessions = {}
    app.state.ids = itertools.count(1)
    app.state.lock = threading.Lock()

    @app.exception_handler(BcxError)
    async def bcx_error(request, exc):
        status = 422 if isinstance(exc, ConfigError) else 500
        return JSONResponse(
            status_code=status,
            content={"error_type": type(exc).__name__, "message": str(exc)},
        )

    def get_session(sid) -> Session:
        session = app.state.sessions.get(sid)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {sid}")
        return session

    def resolve_observation(session, req):
        if req.observation_index is not None:
            if not 0 <= req.observation_index < len(session.test):
                raise HTTPException(
                    status_code=404,
                    detail=f"observation {req.observation_index} outside test partition",
                )
            return req.observation_index, session.test.observation(req.observation_index)
        if req.values is not None:
            x = tuple(req.values)
            try:
                session.train.validate_observation(x)
            except BcxError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            return ("values", x), x
        raise HTTPException(status_code=422, detail="observation_index or values required")

    @app.post("/sessions")
    def create_session(req: SessionRequest):
        try:
            schema, label, classes = load_schema(req.schema_path)
            ds = load_csv(req.csv_path, schema, label, class_names=classes)
            train, test = split(ds, req.test_fraction, req.split_seed)
            if req.model.kind == "builtin":
                model = train_builtin(
                    train,
                    BuiltinModelConfig(
                        family=req.model.family,
                        hidden_units=req.model.hidden_units,
                        epochs=req.model.epochs,
                        learning_rate=req.model.learning_rate,
                        seed=req.model.seed,
                    ),
                )
            elif req.model.kind == "external":
                if not req.model.command or not req.model.class_count:
                    raise ConfigError("external model needs command and class_count")
                model = wrap_external(train, req.model.class_count, req.model.command)
            else:
                raise ConfigError(f"unknown model kind {req.model.kind!r}")
        except FileNotFoundError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        sid = str(next(app.state.ids))
        with app.state.lock:
            app.state.sessions[sid] = Session(sid, train, test, model)
        return {
            "schema_version": SCHEMA_VERSION,
            "session_id": sid,
            "n_train": len(train),
            "n_test": len(test),
            "class_names": train.class_names,
            "features": [
                {
                    "name": s.name,
                    "kind": s.kind,
                    "levels": list(s.levels),
                    "train_min": _nan_none(s.train_min),
                    "train_max": _nan_none(s.train_max),
                    "mean": _nan_none(s.mean),
                    "stddev": _nan_none(s.stddev),
                }
                for s in train.features
            ],
            "training_accuracy": getattr(model, "training_accuracy", None),
        }

    @app.post("/sessions/{sid}/explain")
    def explain(sid: str, req: ExplainRequest):
        session = get_session(sid)
        obs_key, x = resolve_observation(session, req)
        cfg = RunConfig().with_overrides(**req.overrides)
        pool = session.pool_for(cfg, req.seed)
        sig = _search_sig(cfg)

        with session.obs_lock(obs_key):
            cache = {}
            for (k_obs, tc, k_sig), value in list(session.bps.items()):
                if k_obs == obs_key and k_sig == sig:
                    cache[(obs_key, tc)] = value
            expls = explain_observation(
                session.train, session.model, x, cfg,
                seed=req.seed, pool=pool, bps_cache=cache,
                observation_index=obs_key, target_class=req.target_class,
            )
            with session.lock:
                for (k_obs, tc), value in cache.items():
                    session.bps[(k_obs, tc, sig)] = value
                session.last[obs_key] = {
                    "config": cfg,
                    "seed": req.seed,
                    "explanations": expls,
                }
        records = [r for e in expls for r in e.records]
        feasible = [r for r in records if r.feasible]
        overall = (
            percent_fidelity(records, T=cfg.T) if feasible else None
        )
        return {
            "schema_version": SCHEMA_VERSION,
            "observation_index": req.observation_index,
            "config": cfg.to_dict(),
            "seed": req.seed,
            "fidelity_overall": overall,
            "explanations": [e.to_dict() for e in expls],
        }

    @app.post("/sessions/{sid}/simplify")
    def simplify(sid: str, req: SimplifyRequest):
        session = get_session(sid)
        if not req.keep:
            raise HTTPException(status_code=422, detail="keep set must not be empty")
        obs_key = req.observation_index
        state = session.last.get(obs_key)
        if state is None:
            raise HTTPException(
                status_code=404, detail=f"no explanation yet for observation {obs_key}"
            )
        expls = state["explanations"]
        if req.target_class is not None:
            expls = [e for e in expls if e.target_class == req.target_class]
            if not expls:
                raise HTTPException(
                    status_code=404,
                    detail=f"no explanation for target class {req.target_class}",
                )
        cfg = state["config"]
        out = []
        for e in expls:
            simplified = simplify_model(e.model, req.keep, e.observation)
            estimated = [
                estimate_b_perturbation(simplified, bp, e.observation,
                                        boundary=cfg.boundary_threshold)
                for bp in e.actual
            ]
            recs = [
                fidelity_error(bp, ep, session.train, T=cfg.T)
                for bp, ep in zip(e.actual, estimated)
            ]
            fid = percent_fidelity(recs, T=cfg.T) if any(r.feasible for r in recs) else None
            out.append(
                {
                    "target_class": e.target_class,
                    "regression": simplified.to_dict(),
                    "fidelity_records": [
                        {
                            "feature": r.feature,
                            "target_class": r.target_class,
                            "actual_delta": r.actual_delta,
                            "estimated_delta": None if r.estimated_delta != r.estimated_delta else r.estimated_delta,
                            "error": r.error if np.isfinite(r.error) else None,
                            "feasible": r.feasible,
                            "within_threshold": r.within_threshold,
                            "status": r.status,
                        }
                        for r in recs
                    ],
                    "fidelity": fid,
                }
            )
        return {
            "schema_version": SCHEMA_VERSION,
            "observation_index": obs_key,
            "keep": list(req.keep),
            "simplified": out,
        }

    @app.get("/sessions/{sid}/neighbourhood/{obs}")
    def neighbourhood(sid: str, obs: int, target_class: Optional[int] = None):
        session = get_session(sid)
        state = session.last.get(obs)
        if state is None:
            raise HTTPException(
                status_code=404, detail=f"no explanation yet for observation {obs}"
            )
        cfg, seed = state["config"], state["seed"]
        expls = state["explanations"]
        tc = target_class if target_class is not None else expls[0].target_class
        matching = [e for e in expls if e.target_class == tc]
        if not matching:
            raise HTTPException(status_code=404, detail=f"no explanation for class {tc}")
        e = matching[0]
        pool = session.pool_for(cfg, seed)
        if cfg.method == "lime":
            raise HTTPException(
                status_code=404, detail="neighbourhood view applies to method=bcx"
            )
        if cfg.balanced:
            nbd = balanced_neighbourhood(pool, e.observation, tc, cfg.b1, cfg.b2,
                                         cfg.n_neighbourhood)
        else:
            nbd = imbalanced_neighbourhood(pool, e.observation, tc,
                                           cfg.n_neighbourhood, cfg.b1, cfg.b2)
        if cfg.use_counterfactual_augmentation and e.actual:
            nbd = augment_with_counterfactuals(nbd, e.actual, session.model,
                                               weight=cfg.cf_weight)
        ds = session.train
        z = ds.standardize_numeric(nbd.num)
        x_num, _ = ds.encode_batch([e.observation])
        x_z = ds.standardize_numeric(x_num)[0]
        return {
            "schema_version": SCHEMA_VERSION,
            "observation_index": obs,
            "target_class": tc,
            "feature_names": [ds.features[i].name for i in ds.numeric_indices],
            "x": [float(v) for v in x_z],
            "points": [[float(v) for v in row] for row in z],
            "responses": [float(v) for v in nbd.responses],
            "bands": [int(b) for b in nbd.band_of],
            "weights": [float(w) for w in nbd.weights],
            "is_counterfactual": [bool(c) for c in nbd.cf_mask],
            "balanced": nbd.balanced,
            "b1": nbd.b1,
            "b2": nbd.b2,
        }

    _mount_frontend(app)

    @app.get("/sessions/{sid}/report")
    def report(sid: str):
        session = get_session(sid)
        explanations = []
        for obs_key, state in session.last.items():
            for e in state["explanations"]:
                explanations.append(e.to_dict())
        return {
            "schema_version": SCHEMA_VERSION,
            "n_observations": len(session.last),
            "explanations": explanations,
        }

    return app


def _nan_none(v):
    return None if v != v else float(v)


def _mount_frontend(app):
    """Serve the explorer UI at /app/ when a built frontend directory exists
    (cwd/frontend or the repository checkout next to this package)."""
    candidates = [
        pathlib.Path.cwd() / "frontend",
        pathlib.Path(__file__).resolve().parents[2] / "frontend",
    ]
    for cand in candidates:
        if (cand / "index.html").is_file() and (cand / "dist").is_dir():
            app.mount("/app", StaticFiles(directory=str(cand), html=True), name="app")
            return


app = create_app()
