"""Session orchestration: automatic phase, artifact store, serving state.

A session is one directory of text artifacts (config, status, predictions,
working samples, attribution matrix, ranking, transforms, projection grid).
Artifacts are plain JSON with sorted keys so identical configurations produce
byte-identical files; anything an API response needs is either persisted or
recomputable by a pure engine call on persisted inputs.
"""

from __future__ import annotations

import json
import os
import shutil
import tempfile
import uuid
from dataclasses import dataclass, field

import numpy as np

from .attributions import (
    METHOD_NAMES,
    AttributionMatrix,
    build_attribution_matrix,
    compute_attribution,
)
from .counterfactuals import (
    Counterfactual,
    native_guide_cf,
    nearest_unlike_neighbor,
    wachter_cf,
)
from .data import TEST, TRAIN, confusion_assign, load_ucr_files, z_normalize
from .errors import (
    IndexOutOfRangeError,
    InvalidConfigError,
    InvalidParamsError,
    SessionNotFoundError,
    UnknownMethodError,
)
from .evaluation import (
    DatasetStats,
    PerturbationConfig,
    TopPercent,
    evaluate_grid,
    rank_methods,
    ranking_table,
)
from .nn.classifier import build_cnn
from .nn.introspection import activation_maximization, mc_dropout_predict
from .nn.model import Model
from .nn.training import TrainConfig, train_arrays
from .projections import (
    TSNE2D,
    ProjectionCell,
    cluster_score,
    fit_projection,
    set_visibility,
)
from .transforms import TRANSFORM_NAMES, transform_block
from .whatif import EditContext, apply_edits, nearest_in_matrix, parse_space

# rng stream tags for seed derivation (keep distinct across the package)
_SUBSAMPLE_STREAM = 41
_UNCERTAINTY_STREAM = 51
# sample_index sentinel for attribution calls on rows outside the working set
_OOS_INDEX = 10**9

STAGES = ("load", "predict", "attributions", "ranking", "transforms", "projections")


def _jsonable(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def write_json(path: str, doc) -> None:
    text = json.dumps(doc, sort_keys=True, separators=(",", ":"), default=_jsonable,
                      allow_nan=False)
    # temp file + rename: a concurrent reader sees the old document or the
    # new one, never a truncated file (status.json is polled while the
    # build thread rewrites it)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def read_json(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


@dataclass(frozen=True)
class SessionConfig:
    train_path: str
    test_path: str
    delimiter: str = "auto"
    znormalize: bool = False
    model_path: str | None = None
    train: dict | None = None  # TrainConfig overrides + builder overrides
    methods: tuple = ("saliency", "grad_input", "integrated_gradients", "occlusion")
    method_params: dict = field(default_factory=dict)
    top_percent: float = 10.0
    span: int = 5
    transforms: tuple = TRANSFORM_NAMES
    techniques: tuple = ("pca", "kpca", "tsne")
    pred_weight: float = 2.0
    train_subsample_cap: int = 2000
    tsne_iters: int = 1000
    mc_passes: int = 25
    seed: int = 0

    def __post_init__(self):
        if not self.methods:
            raise InvalidConfigError("need at least one attribution method")
        for m in self.methods:
            if m not in METHOD_NAMES:
                raise InvalidConfigError(f"unknown attribution method {m!r}")
        for t in self.transforms:
            if t not in TRANSFORM_NAMES:
                raise InvalidConfigError(f"unknown transform {t!r}")
        for t in self.techniques:
            if t not in ("pca", "kpca", "tsne"):
                raise InvalidConfigError(f"unknown projection technique {t!r}")
        if not self.techniques:
            raise InvalidConfigError("need at least one projection technique")
        if self.model_path is None and self.train is None:
            raise InvalidConfigError("config needs a model path or a train request")
        if not 0 < self.top_percent <= 100:
            raise InvalidConfigError("top_percent must be in (0, 100]")
        if self.span < 1 or self.train_subsample_cap < 0 or self.mc_passes < 1:
            raise InvalidConfigError("bad span/cap/mc_passes")
        if self.seed < 0 or self.tsne_iters < 1:
            raise InvalidConfigError("seed must be >= 0 and tsne_iters >= 1")
        if self.pred_weight <= 0:
            raise InvalidConfigError("pred_weight must be > 0")

    @classmethod
    def from_doc(cls, doc: dict) -> "SessionConfig":
        if not isinstance(doc, dict):
            raise InvalidConfigError("config must be a JSON object")
        dataset = doc.get("dataset")
        if not isinstance(dataset, dict) or "train" not in dataset or "test" not in dataset:
            raise InvalidConfigError("config.dataset needs 'train' and 'test' paths")
        model = doc.get("model") or {}
        try:
            return cls(
                train_path=str(dataset["train"]),
                test_path=str(dataset["test"]),
                delimiter=str(dataset.get("delimiter", "auto")),
                znormalize=bool(dataset.get("znormalize", False)),
                model_path=model.get("path"),
                train=model.get("train"),
                methods=tuple(doc.get("methods", cls.methods)),
                method_params=dict(doc.get("method_params", {})),
                top_percent=float(doc.get("top_percent", 10.0)),
                span=int(doc.get("span", 5)),
                transforms=tuple(doc.get("transforms", TRANSFORM_NAMES)),
                techniques=tuple(doc.get("techniques", ("pca", "kpca", "tsne"))),
                pred_weight=float(doc.get("pred_weight", 2.0)),
                train_subsample_cap=int(doc.get("train_subsample_cap", 2000)),
                tsne_iters=int(doc.get("tsne_iters", 1000)),
                mc_passes=int(doc.get("mc_passes", 25)),
                seed=int(doc.get("seed", 0)),
            )
        except (TypeError, ValueError) as exc:
            raise InvalidConfigError(f"bad config value: {exc}") from None

    def to_doc(self) -> dict:
        return {
            "dataset": {
                "train": self.train_path,
                "test": self.test_path,
                "delimiter": self.delimiter,
                "znormalize": self.znormalize,
            },
            "model": {"path": self.model_path, "train": self.train},
            "methods": list(self.methods),
            "method_params": self.method_params,
            "top_percent": self.top_percent,
            "span": self.span,
            "transforms": list(self.transforms),
            "techniques": list(self.techniques),
            "pred_weight": self.pred_weight,
            "train_subsample_cap": self.train_subsample_cap,
            "tsne_iters": self.tsne_iters,
            "mc_passes": self.mc_passes,
            "seed": self.seed,
        }


class Session:
    """Handle on one session directory; all reads/writes go through here."""

    def __init__(self, session_id: str, path: str, config: SessionConfig):
        self.id = session_id
        self.path = path
        self.config = config
        self._cache: dict = {}

    # -- status -------------------------------------------------------------

    def status(self) -> dict:
        return read_json(os.path.join(self.path, "status.json"))

    def set_status(self, state: str, stage=None, reason=None, stages_done=None) -> None:
        doc = {"state": state, "stage": stage, "reason": reason,
               "stages_done": stages_done or []}
        write_json(os.path.join(self.path, "status.json"), doc)

    def is_done(self) -> bool:
        return self.status()["state"] == "done"

    # -- artifacts ----------------------------------------------------------

    def artifact_path(self, name: str) -> str:
        return os.path.join(self.path, name + ".json")

    def write_artifact(self, name: str, doc) -> None:
        write_json(self.artifact_path(name), doc)

    def artifact(self, name: str):
        key = "artifact:" + name
        if key not in self._cache:
            self._cache[key] = read_json(self.artifact_path(name))
        return self._cache[key]

    # -- lazily derived state ----------------------------------------------

    def model(self) -> Model:
        if "model" not in self._cache:
            self._cache["model"] = Model.load(os.path.join(self.path, "model.json"))
        return self._cache["model"]

    def working_samples(self) -> np.ndarray:
        if "working" not in self._cache:
            doc = self.artifact("working")
            self._cache["working"] = np.asarray(doc["samples"], dtype=np.float64)
        return self._cache["working"]

    def activations(self) -> np.ndarray:
        if "activations" not in self._cache:
            self._cache["activations"] = self.model().activations(
                self.working_samples()
            ).astype(np.float64)
        return self._cache["activations"]

    def attribution_matrix(self) -> AttributionMatrix:
        if "attr_matrix" not in self._cache:
            self._cache["attr_matrix"] = AttributionMatrix.from_doc(
                self.artifact("attributions")
            )
        return self._cache["attr_matrix"]

    def dataset(self):
        if "dataset" not in self._cache:
            cfg = self.config
            ds = load_ucr_files(cfg.train_path, cfg.test_path, cfg.delimiter)
            if cfg.znormalize:
                samples = np.vstack([z_normalize(r) for r in ds.samples])
                ds = type(ds)(samples, ds.labels, ds.split, ds.class_count, ds.label_values)
            self._cache["dataset"] = ds
        return self._cache["dataset"]

    def train_stats(self) -> DatasetStats:
        if "train_stats" not in self._cache:
            ds = self.dataset()
            self._cache["train_stats"] = DatasetStats.from_samples(
                ds.samples[ds.indices(TRAIN)]
            )
        return self._cache["train_stats"]

    def train_preds(self) -> np.ndarray:
        if "train_preds" not in self._cache:
            ds = self.dataset()
            idx = ds.indices(TRAIN)
            self._cache["train_preds"] = self.model().predict(
                ds.samples[idx].astype(np.float64)
            )
        return self._cache["train_preds"]

    def actmax_series(self, target_class: int) -> np.ndarray:
        key = f"actmax:{target_class}"
        if key not in self._cache:
            ds = self.dataset()
            idx = ds.indices(TRAIN)
            members = idx[ds.labels[idx] == target_class]
            init = (
                ds.samples[members].astype(np.float64).mean(axis=0)
                if members.size
                else None
            )
            self._cache[key] = activation_maximization(
                self.model(), target_class, init=init
            )
        return self._cache[key]

    def projection_state(self, source: str, technique: str):
        """Fitted estimator for one cell, refit deterministically on demand."""
        key = f"proj:{source}|{technique}"
        if key not in self._cache:
            matrix = self.source_matrix(source)
            if technique == "tsne":
                state = TSNE2D(iters=self.config.tsne_iters, seed=self.config.seed).fit(matrix)
            else:
                state = fit_projection(technique, matrix, seed=self.config.seed)
            self._cache[key] = state
        return self._cache[key]

    def source_matrix(self, source: str) -> np.ndarray:
        key = f"source:{source}"
        if key not in self._cache:
            if source == "raw":
                mat = self.working_samples()
            elif source == "activations":
                mat = self.activations()
            elif source.startswith("attr:"):
                method = source[len("attr:"):]
                blocks = self.attribution_matrix().blocks
                if method not in blocks:
                    raise UnknownMethodError(f"no attributions for {method!r}")
                mat = blocks[method]["values"].astype(np.float64)
            elif source in self.config.transforms:
                mat = np.asarray(self.artifact("transforms")[source], dtype=np.float64)
            else:
                raise UnknownMethodError(f"unknown source {source!r}")
            self._cache[key] = mat
        return self._cache[key]

    def source_row(self, source: str, series: np.ndarray) -> np.ndarray:
        """One out-of-sample series represented in a source's feature space."""
        series = np.asarray(series, dtype=np.float64)
        if source == "raw":
            return series
        if source == "activations":
            return self.model().activations(series[None, :])[0].astype(np.float64)
        if source.startswith("attr:"):
            method = source[len("attr:"):]
            params = dict(self.config.method_params.get(method, {}))
            attr = compute_attribution(
                self.model(), series, method,
                sample_index=_OOS_INDEX, seed=self.config.seed, params=params,
            )
            return attr.values.astype(np.float64)
        if source in self.config.transforms:
            params = {"word_count": min(20, series.size)} if source == "sax" else {}
            return transform_block(series[None, :], source, **params)[0]
        raise UnknownMethodError(f"unknown source {source!r}")


class SessionStore:
    """One directory per session under a root; survives process restarts."""

    def __init__(self, root: str):
        self.root = root
        os.makedirs(root, exist_ok=True)

    def create(self, config_doc: dict) -> Session:
        config = SessionConfig.from_doc(config_doc)
        for path in (config.train_path, config.test_path):
            if not os.path.isfile(path):
                raise FileNotFoundError(f"dataset file not found: {path}")
        if config.model_path is not None and not os.path.isfile(config.model_path):
            raise FileNotFoundError(f"model file not found: {config.model_path}")
        session_id = uuid.uuid4().hex[:12]
        path = os.path.join(self.root, session_id)
        os.makedirs(path)
        session = Session(session_id, path, config)
        write_json(os.path.join(path, "config.json"), config.to_doc())
        session.set_status("pending")
        return session

    def load(self, session_id: str) -> Session:
        path = os.path.join(self.root, session_id)
        if not os.path.isdir(path) or not os.path.isfile(os.path.join(path, "config.json")):
            raise SessionNotFoundError(f"no session {session_id!r}")
        config = SessionConfig.from_doc(read_json(os.path.join(path, "config.json")))
        return Session(session_id, path, config)

    def list(self) -> list:
        out = []
        for name in sorted(os.listdir(self.root)):
            try:
                out.append(self.load(name))
            except SessionNotFoundError:
                continue
        return out

    def delete(self, session_id: str) -> None:
        path = os.path.join(self.root, session_id)
        if not os.path.isdir(path):
            raise SessionNotFoundError(f"no session {session_id!r}")
        shutil.rmtree(path)


# -- the automatic phase ----------------------------------------------------


def _prepare_model(session: Session) -> Model:
    cfg = session.config
    target = os.path.join(session.path, "model.json")
    if cfg.model_path is not None:
        model = Model.load(cfg.model_path)
        model.save(target)
        return model
    ds = session.dataset()
    req = dict(cfg.train or {})
    builder = {
        k: req.pop(k)
        for k in ("filters", "kernel", "pool", "dense_units", "dropout")
        if k in req
    }
    model = build_cnn(ds.length, ds.class_count, seed=cfg.seed, **builder)
    train_cfg = TrainConfig(seed=cfg.seed, **req)
    idx = ds.indices(TRAIN)
    train_arrays(model, ds.samples[idx], ds.labels[idx], train_cfg)
    model.save(target)
    return model


def _working_set(session: Session):
    """Test split in full plus a seeded train subsample, test rows first."""
    cfg = session.config
    ds = session.dataset()
    test_idx = ds.indices(TEST)
    train_idx = ds.indices(TRAIN)
    if train_idx.size > cfg.train_subsample_cap:
        rng = np.random.default_rng([_SUBSAMPLE_STREAM, cfg.seed])
        pick = rng.choice(train_idx.size, cfg.train_subsample_cap, replace=False)
        train_idx = train_idx[np.sort(pick)]
    rows = np.concatenate([test_idx, train_idx])
    splits = [TEST] * test_idx.size + [TRAIN] * train_idx.size
    return ds, rows, splits


def run_automatic_phase(session: Session) -> Session:
    """pending -> running(stage)* -> done | failed(stage); artifacts persisted
    as each stage completes, and kept on failure for debugging."""
    cfg = session.config
    done: list = []
    stage = STAGES[0]
    try:
        session.set_status("running", stage=stage)
        ds, rows, splits = _working_set(session)
        model = _prepare_model(session)
        if ds.length != model.input_length or ds.class_count != model.class_count:
            raise InvalidConfigError(
                f"model expects T={model.input_length}/k={model.class_count}, "
                f"dataset has T={ds.length}/k={ds.class_count}"
            )
        done.append(stage)

        stage = "predict"
        session.set_status("running", stage=stage, stages_done=done)
        samples = ds.samples[rows].astype(np.float64)
        labels = ds.labels[rows]
        probs = model.predict_proba(samples)
        preds = np.argmax(probs, axis=1)
        cells = [
            confusion_assign(int(t), int(p), ds.class_count)
            for t, p in zip(labels, preds)
        ]
        session.write_artifact("working", {"samples": samples})
        session.write_artifact(
            "predictions",
            {
                "origin_split": splits,
                "origin_row": rows,
                "labels": labels,
                "preds": preds,
                "probs": probs,
                "confusion": [c.category for c in cells],
                "color_index": [c.color_index for c in cells],
                "class_count": ds.class_count,
                "label_values": list(ds.label_values),
            },
        )
        done.append(stage)

        stage = "attributions"
        session.set_status("running", stage=stage, stages_done=done)
        matrix = build_attribution_matrix(
            model, samples, cfg.methods, seed=cfg.seed, params=cfg.method_params
        )
        session.write_artifact("attributions", matrix.to_doc())
        done.append(stage)

        stage = "ranking"
        session.set_status("running", stage=stage, stages_done=done)
        test_mask = np.asarray(splits) == TEST
        stats = DatasetStats.from_samples(ds.samples[ds.indices(TRAIN)])
        grid = _config_grid(cfg)
        eval_matrix = AttributionMatrix(
            {
                m: {
                    "params": b["params"],
                    "values": b["values"][test_mask],
                    "std": b["std"][test_mask],
                }
                for m, b in matrix.blocks.items()
            }
        )
        results = evaluate_grid(
            model, samples[test_mask], labels[test_mask], eval_matrix, grid, stats
        )
        entries = rank_methods(results)
        session.write_artifact(
            "ranking",
            {
                "table": ranking_table(entries, grid),
                "eval": [
                    {
                        "method": r.method,
                        "config": r.config.label(),
                        "acc_before": r.acc_before,
                        "acc_after": r.acc_after,
                        "drop": r.drop,
                        "random_drop": r.random_drop,
                        "beats_random": r.beats_random,
                    }
                    for r in results
                ],
            },
        )
        done.append(stage)

        stage = "transforms"
        session.set_status("running", stage=stage, stages_done=done)
        tdoc = {}
        for kind in cfg.transforms:
            params = {"word_count": min(20, ds.length)} if kind == "sax" else {}
            tdoc[kind] = transform_block(samples, kind, **params)
        session.write_artifact("transforms", tdoc)
        done.append(stage)

        stage = "projections"
        session.set_status("running", stage=stage, stages_done=done)
        sources = ["raw"] + list(cfg.transforms) + ["activations"]
        sources += [f"attr:{m}" for m in cfg.methods]
        cells_out = []
        for source in sources:
            for technique in cfg.techniques:
                state = session.projection_state(source, technique)
                score = cluster_score(
                    state.coords_.astype(np.float64), labels, preds,
                    pred_weight=cfg.pred_weight,
                )
                cells_out.append(
                    ProjectionCell(source, technique, state.coords_, state, score)
                )
        set_visibility(cells_out)
        session.write_artifact(
            "projections",
            {
                "sources": sources,
                "techniques": list(cfg.techniques),
                "cells": [c.to_doc() for c in cells_out],
            },
        )
        done.append(stage)

        session.set_status("done", stages_done=done)
    except Exception as exc:  # keep partial artifacts, record the stage
        session.set_status(
            "failed", stage=stage,
            reason=f"{type(exc).__name__}: {exc}", stages_done=done,
        )
    return session


def _config_grid(cfg: SessionConfig) -> list:
    thr = TopPercent(cfg.top_percent)
    grid = [
        PerturbationConfig("point", s, thr, seed=cfg.seed)
        for s in ("zero", "inverse", "mean")
    ]
    grid += [
        PerturbationConfig("time", s, thr, span=cfg.span, seed=cfg.seed)
        for s in ("zero", "inverse", "mean", "swap")
    ]
    return grid


# -- serving helpers ----------------------------------------------------------


def visible_cells(session: Session) -> list:
    return [c for c in session.artifact("projections")["cells"] if c["visible"]]


def oos_coords(session: Session, series: np.ndarray) -> list:
    """Place one series in every visible projection cell without refitting."""
    out = []
    for cell in visible_cells(session):
        state = session.projection_state(cell["source"], cell["technique"])
        row = session.source_row(cell["source"], series)
        xy = state.transform(row[None, :])[0]
        out.append(
            {
                "source": cell["source"],
                "technique": cell["technique"],
                "x": float(xy[0]),
                "y": float(xy[1]),
            }
        )
    return out


def describe_sample(session: Session, idx: int) -> dict:
    preds = session.artifact("predictions")
    n = len(preds["labels"])
    if not 0 <= idx < n:
        raise IndexOutOfRangeError(f"sample index {idx} outside [0, {n})")
    series = session.working_samples()[idx]
    attrs = {
        m: {
            "values": block["values"][idx],
            "std": float(block["std"][idx]),
            "params": block["params"],
        }
        for m, block in session.attribution_matrix().blocks.items()
    }
    pred = int(preds["preds"][idx])
    mean, std = mc_dropout_predict(
        session.model(), series, passes=session.config.mc_passes,
        seed=[_UNCERTAINTY_STREAM, idx, session.config.seed],
    )
    return {
        "index": idx,
        "series": series,
        "label": int(preds["labels"][idx]),
        "pred": pred,
        "probs": preds["probs"][idx],
        "confusion": preds["confusion"][idx],
        "color_index": int(preds["color_index"][idx]),
        "attributions": attrs,
        "actmax": session.actmax_series(pred),
        "uncertainty": {"mean": mean, "std": std},
    }


def run_whatif(session: Session, base, edits: list) -> dict:
    """Apply edits to a base sample and re-derive everything the UI shows."""
    if isinstance(base, (int, np.integer)):
        samples = session.working_samples()
        if not 0 <= base < samples.shape[0]:
            raise IndexOutOfRangeError(f"base index {base} out of range")
        series = samples[int(base)]
    else:
        series = np.asarray(base, dtype=np.float64)
        if series.ndim != 1 or series.size != session.model().input_length:
            raise InvalidParamsError("base series has the wrong length")
        if not np.all(np.isfinite(series)):
            raise InvalidParamsError("base series must be finite")

    context = EditContext(
        global_mean=session.train_stats().mean,
        actmax_lookup=session.actmax_series,
    )
    edited = apply_edits(series, edits, context)
    model = session.model()
    probs = model.predict_proba(edited[None, :])[0]
    pred = int(np.argmax(probs))
    mean, std = mc_dropout_predict(
        model, edited, passes=session.config.mc_passes,
        seed=[_UNCERTAINTY_STREAM, _OOS_INDEX, session.config.seed],
    )
    attrs = {}
    for m in session.config.methods:
        params = dict(session.config.method_params.get(m, {}))
        attr = compute_attribution(
            model, edited, m, sample_index=_OOS_INDEX,
            seed=session.config.seed, params=params,
        )
        attrs[m] = {"values": attr.values, "target_class": attr.target_class}
    return {
        "series": edited,
        "pred": pred,
        "probs": probs,
        "uncertainty": {"mean": mean, "std": std},
        "attributions": attrs,
        "coords": oos_coords(session, edited),
    }


def run_counterfactual(session: Session, idx: int, method: str) -> dict:
    samples = session.working_samples()
    if not 0 <= idx < samples.shape[0]:
        raise IndexOutOfRangeError(f"sample index {idx} out of range")
    query = samples[idx]
    model = session.model()
    query_pred = int(model.predict(query[None, :])[0])

    if method == "native":
        ds = session.dataset()
        train_rows = ds.indices(TRAIN)
        train_samples = ds.samples[train_rows].astype(np.float64)
        nun_i, nun = nearest_unlike_neighbor(
            train_samples, session.train_preds(), query, query_pred
        )
        top_method = session.artifact("ranking")["table"]["methods"][0]
        guidance = session.attribution_matrix().blocks[top_method]["values"][idx]
        cf = native_guide_cf(model, query, guidance, nun, origin_index=idx)
        extra = {"nun_train_row": int(train_rows[nun_i]), "guided_by": top_method}
    elif method == "wachter":
        logits = model.logits(query[None, :])[0]
        order = np.argsort(-logits, kind="stable")
        target = int(order[1]) if order[0] == query_pred else int(order[0])
        cf = wachter_cf(model, query, target, origin_index=idx)
        extra = {"target_class": target}
    else:
        raise UnknownMethodError(f"unknown counterfactual method {method!r}")

    doc = cf.to_doc()
    doc.update(extra)
    return {"counterfactual": doc, "coords": oos_coords(session, cf.series)}


def run_neighbors(session: Session, idx: int, space: str, k: int) -> dict:
    samples = session.working_samples()
    if not 0 <= idx < samples.shape[0]:
        raise IndexOutOfRangeError(f"sample index {idx} out of range")
    kind, method = parse_space(space)
    if kind == "euclidean":
        matrix = samples
    elif kind == "activations":
        matrix = session.activations()
    else:
        blocks = session.attribution_matrix().blocks
        if method not in blocks:
            raise UnknownMethodError(f"no attributions for {method!r}")
        matrix = blocks[method]["values"].astype(np.float64)
    pairs = nearest_in_matrix(matrix, matrix[idx], k, exclude_index=idx)
    return {
        "space": space,
        "neighbors": [{"index": i, "distance": d} for i, d in pairs],
    }
