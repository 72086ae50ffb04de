"""Per-SDG random-forest ensembles over system predictions and length.

Feature layout: one boolean per base system ("system s assigned this
SDG") followed by the raw document word count. Rows are weighted 1/N per
labeled dataset (N = documents) and k/N for length-matched synthetic
datasets; k = 0 drops synthetic rows entirely.

Trees are grown on weighted bootstraps (rows resampled with replacement,
probability proportional to weight, sample size = row count; resampled
rows then carry unit weight), with the best split chosen by weighted
Gini impurity decrease among `mtry` features sampled per node. Forest
scores are the mean leaf positive-fraction across trees; an SDG is
assigned at score >= threshold (default 0.5).
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import Dataset, LabeledDocument
from .errors import (
    IoError,
    MissingSystemError,
    ModelCorruptError,
    ModelVersionError,
    NoLabelsError,
    OneClassError,
    ParamError,
    SchemaMismatchError,
)
from .evaluation import ConfusionCounts, MetricReport, metrics
from .systems import PredictionMatrix

__all__ = [
    "FeatureRow",
    "ForestParams",
    "Leaf",
    "Split",
    "Forest",
    "EnsembleModel",
    "CvConfig",
    "CvFoldRecord",
    "CvResult",
    "build_features",
    "train_forest",
    "forest_score",
    "train_model",
    "cross_validate",
    "permutation_importance",
    "model_importance",
    "save_model",
    "load_model",
    "feature_names_for",
]

MODEL_MAGIC = "sdg-ensemble"
MODEL_VERSION = 1

WORD_COUNT_FEATURE = "word_count"


def feature_names_for(system_names: Sequence[str]) -> list[str]:
    return list(system_names) + [WORD_COUNT_FEATURE]


@dataclass(frozen=True)
class FeatureRow:
    doc_id: str
    origin: str
    sdg: int
    features: tuple[float, ...]
    label: bool
    weight: float
    synthetic: bool = False


@dataclass(frozen=True)
class ForestParams:
    num_trees: int = 300
    mtry: int | None = None  # default ceil(sqrt(n_features))
    min_leaf_frac: float = 1e-6  # of total training weight
    max_depth: int | None = None
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.num_trees < 1:
            raise ParamError("num_trees must be positive")
        if self.mtry is not None and self.mtry < 1:
            raise ParamError("mtry must be positive")
        if self.max_depth is not None and self.max_depth < 0:
            raise ParamError("max_depth must be non-negative")
        if not 0 <= self.min_leaf_frac < 1:
            raise ParamError("min_leaf_frac must be in [0, 1)")


@dataclass(frozen=True)
class Leaf:
    positive_fraction: float
    weight: float


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: float
    left: "Leaf | Split"
    right: "Leaf | Split"


@dataclass(frozen=True)
class Forest:
    trees: tuple["Leaf | Split", ...]
    n_features: int
    params: ForestParams


# ---------------------------------------------------------------------------
# Feature construction
# ---------------------------------------------------------------------------


def build_features(
    matrices: Mapping[str, PredictionMatrix],
    system_names: Sequence[str],
    labeled_datasets: Sequence[Dataset],
    synthetic_datasets: Sequence[Dataset],
    k: float,
) -> dict[int, list[FeatureRow]]:
    """Per-SDG feature rows with per-dataset 1/N (labeled) or k/N (synthetic) weights."""
    if k < 0:
        raise ParamError("synthetic weight factor k must be non-negative")
    rows: dict[int, list[FeatureRow]] = {g: [] for g in range(1, 18)}

    def features_for(matrix: PredictionMatrix, doc, sdg: int) -> tuple[float, ...]:
        feats = []
        for s in system_names:
            if not matrix.covers(doc.id, s):
                raise MissingSystemError(
                    f"system {s!r} has no predictions for document {doc.id!r}"
                )
            feats.append(1.0 if matrix.is_predicted(doc.id, s, sdg) else 0.0)
        feats.append(float(doc.word_count))
        return tuple(feats)

    for ds in labeled_datasets:
        if not ds.labeled:
            raise NoLabelsError(f"dataset {ds.name!r} has no expert labels")
        matrix = matrices[ds.name]
        weight = 1.0 / len(ds.documents)
        for doc in ds.documents:
            if not isinstance(doc, LabeledDocument):
                continue
            for sdg in sorted(doc.evaluated):
                rows[sdg].append(
                    FeatureRow(
                        doc.id,
                        ds.name,
                        sdg,
                        features_for(matrix, doc, sdg),
                        sdg in doc.labels,
                        weight,
                    )
                )
    if k > 0:
        for ds in synthetic_datasets:
            matrix = matrices[ds.name]
            weight = k / len(ds.documents)
            for doc in ds.documents:
                for sdg in range(1, 18):
                    rows[sdg].append(
                        FeatureRow(
                            doc.id,
                            ds.name,
                            sdg,
                            features_for(matrix, doc, sdg),
                            False,
                            weight,
                            synthetic=True,
                        )
                    )
    return rows


# ---------------------------------------------------------------------------
# Tree growing
# ---------------------------------------------------------------------------


def _child_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(tuple(int(p) for p in parts)).generate_state(1)[0])


def _best_split(
    X: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    feature_ids: np.ndarray,
    min_leaf_weight: float,
) -> tuple[int, float] | None:
    """Exhaustive weighted-Gini scan over candidate features and thresholds.

    Returns (feature, threshold) with the largest impurity decrease, or
    None if no split improves on the parent. Ties break toward the lower
    feature index, then the lower threshold, so results are deterministic.
    """
    total = w.sum()
    pos = float((w * y).sum())
    p1 = pos / total
    parent = 2.0 * p1 * (1.0 - p1) * total  # total-weighted Gini
    best_gain = 1e-12
    best: tuple[int, float] | None = None
    for f in sorted(int(f) for f in feature_ids):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        ws = w[order]
        ps = ws * y[order]
        cw = np.cumsum(ws)
        cp = np.cumsum(ps)
        wl = cw[:-1]
        wr = total - wl
        valid = (xs[:-1] < xs[1:]) & (wl >= min_leaf_weight) & (wr >= min_leaf_weight)
        if not valid.any():
            continue
        pl = np.divide(cp[:-1], wl, out=np.zeros_like(wl), where=wl > 0)
        pr = np.divide(pos - cp[:-1], wr, out=np.zeros_like(wr), where=wr > 0)
        children = 2.0 * pl * (1.0 - pl) * wl + 2.0 * pr * (1.0 - pr) * wr
        gains = np.where(valid, parent - children, -np.inf)
        i = int(np.argmax(gains))
        gain = float(gains[i])
        if gain > best_gain:
            best_gain = gain
            best = (f, float((xs[i] + xs[i + 1]) / 2.0))
    return best


def _grow(
    X: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    depth: int,
    rng: np.random.Generator,
    mtry: int,
    min_leaf_weight: float,
    max_depth: int | None,
) -> Leaf | Split:
    total = float(w.sum())
    pos_frac = float((w * y).sum() / total)
    if pos_frac <= 0.0 or pos_frac >= 1.0 or (max_depth is not None and depth >= max_depth):
        return Leaf(pos_frac, total)
    n_features = X.shape[1]
    feature_ids = rng.choice(n_features, size=min(mtry, n_features), replace=False)
    best = _best_split(X, y, w, feature_ids, min_leaf_weight)
    if best is None:
        return Leaf(pos_frac, total)
    f, threshold = best
    mask = X[:, f] <= threshold
    left = _grow(X[mask], y[mask], w[mask], depth + 1, rng, mtry, min_leaf_weight, max_depth)
    right = _grow(X[~mask], y[~mask], w[~mask], depth + 1, rng, mtry, min_leaf_weight, max_depth)
    return Split(f, threshold, left, right)


def _rows_to_arrays(rows: Sequence[FeatureRow]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    X = np.asarray([r.features for r in rows], dtype=np.float64)
    y = np.asarray([r.label for r in rows], dtype=np.float64)
    w = np.asarray([r.weight for r in rows], dtype=np.float64)
    return X, y, w


def train_forest(rows: Sequence[FeatureRow], params: ForestParams) -> Forest:
    if not rows:
        raise OneClassError("no training rows")
    X, y, w = _rows_to_arrays(rows)
    if (w[y > 0].sum() <= 0) or (w[y == 0].sum() <= 0):
        raise OneClassError("training rows contain only one class")
    n, n_features = X.shape
    mtry = params.mtry if params.mtry is not None else math.ceil(math.sqrt(n_features))
    p = w / w.sum()
    trees = []
    for t in range(params.num_trees):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((params.seed, t))))
        if params.bootstrap:
            idx = rng.choice(n, size=n, replace=True, p=p)
            Xt, yt, wt = X[idx], y[idx], np.ones(n, dtype=np.float64)
        else:
            Xt, yt, wt = X, y, w
        min_leaf_weight = params.min_leaf_frac * float(wt.sum())
        trees.append(_grow(Xt, yt, wt, 0, rng, mtry, min_leaf_weight, params.max_depth))
    return Forest(tuple(trees), n_features, params)


def _tree_score(node: Leaf | Split, features: Sequence[float]) -> float:
    while isinstance(node, Split):
        node = node.left if features[node.feature] <= node.threshold else node.right
    return node.positive_fraction


def forest_score(forest: Forest, features: Sequence[float]) -> float:
    """Mean leaf positive-fraction over all trees, in [0, 1]."""
    if len(features) != forest.n_features:
        raise SchemaMismatchError(
            f"expected {forest.n_features} features, got {len(features)}"
        )
    return sum(_tree_score(t, features) for t in forest.trees) / len(forest.trees)


# ---------------------------------------------------------------------------
# Model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EnsembleModel:
    forests: dict[int, Forest]  # one per SDG 1..17
    feature_names: tuple[str, ...]
    system_names: tuple[str, ...]
    k: float
    seed: int
    threshold: float = 0.5

    def __post_init__(self):
        if sorted(self.forests) != list(range(1, 18)):
            raise SchemaMismatchError("model must have exactly 17 forests (SDGs 1..17)")

    def predict_document(
        self, system_predictions: Mapping[str, frozenset[int] | set[int]], word_count: int
    ) -> tuple[set[int], dict[int, float]]:
        """Assigned SDG set and per-SDG scores for one document."""
        if set(system_predictions) != set(self.system_names):
            raise SchemaMismatchError(
                f"model was trained on systems {sorted(self.system_names)}, "
                f"got {sorted(system_predictions)}"
            )
        scores: dict[int, float] = {}
        assigned: set[int] = set()
        for sdg in range(1, 18):
            feats = [
                1.0 if sdg in system_predictions[s] else 0.0 for s in self.system_names
            ] + [float(word_count)]
            score = forest_score(self.forests[sdg], feats)
            scores[sdg] = score
            if score >= self.threshold:
                assigned.add(sdg)
        return assigned, scores


def train_model(
    rows_by_sdg: Mapping[int, Sequence[FeatureRow]],
    system_names: Sequence[str],
    k: float,
    params: ForestParams,
    threshold: float = 0.5,
) -> EnsembleModel:
    forests = {}
    for sdg in range(1, 18):
        sdg_params = replace(params, seed=_child_seed(params.seed, sdg))
        forests[sdg] = train_forest(rows_by_sdg.get(sdg, []), sdg_params)
    return EnsembleModel(
        forests,
        tuple(feature_names_for(system_names)),
        tuple(system_names),
        k,
        params.seed,
        threshold,
    )


# ---------------------------------------------------------------------------
# Cross-validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CvConfig:
    folds: int = 5
    repeats: int = 2
    seed: int = 0
    k: float = 1.0  # synthetic weight factor used to build the rows
    threshold: float = 0.5

    def __post_init__(self):
        if self.folds < 2:
            raise ParamError("folds must be >= 2")
        if self.repeats < 1:
            raise ParamError("repeats must be >= 1")


@dataclass(frozen=True)
class CvFoldRecord:
    sdg: int
    repeat: int
    fold: int
    counts: ConfusionCounts
    report: MetricReport


@dataclass(frozen=True)
class CvResult:
    records: tuple[CvFoldRecord, ...]
    pooled_counts: ConfusionCounts
    pooled_report: MetricReport
    per_origin_accuracy: dict[str, float]
    mean_origin_accuracy: float | None  # equal dataset weight, labeled origins
    synthetic_fp_rate: float | None
    skipped: tuple[tuple[int, int, int, str], ...]
    fold_assignments: tuple[dict[tuple[str, str], int], ...]  # one per repeat


def _assign_folds(
    doc_info: dict[tuple[str, str], bool], folds: int, rng: np.random.Generator
) -> dict[tuple[str, str], int]:
    """Document-level fold assignment, stratified by (origin, any positive label)."""
    strata: dict[tuple[str, bool], list[tuple[str, str]]] = {}
    for key, positive in doc_info.items():
        strata.setdefault((key[0], positive), []).append(key)
    assignment: dict[tuple[str, str], int] = {}
    for skey in sorted(strata):
        docs = sorted(strata[skey])
        perm = rng.permutation(len(docs))
        for slot, idx in enumerate(perm):
            assignment[docs[int(idx)]] = slot % folds
    return assignment


def cross_validate(
    rows_by_sdg: Mapping[int, Sequence[FeatureRow]],
    config: CvConfig,
    params: ForestParams,
) -> CvResult:
    doc_info: dict[tuple[str, str], bool] = {}
    for rows in rows_by_sdg.values():
        for r in rows:
            key = (r.origin, r.doc_id)
            doc_info[key] = doc_info.get(key, False) or r.label
    if not doc_info:
        raise OneClassError("no rows to cross-validate")

    records: list[CvFoldRecord] = []
    skipped: list[tuple[int, int, int, str]] = []
    assignments: list[dict[tuple[str, str], int]] = []
    pooled = ConfusionCounts()
    origin_correct: dict[str, int] = {}
    origin_total: dict[str, int] = {}
    labeled_origins: set[str] = set()
    synth_fp = 0
    synth_total = 0

    for rep in range(config.repeats):
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence((config.seed, rep)))
        )
        assignment = _assign_folds(doc_info, config.folds, rng)
        assignments.append(assignment)
        for fold in range(config.folds):
            for sdg in sorted(rows_by_sdg):
                rows = rows_by_sdg[sdg]
                train = [r for r in rows if assignment[(r.origin, r.doc_id)] != fold]
                test = [r for r in rows if assignment[(r.origin, r.doc_id)] == fold]
                if not test:
                    continue
                fold_params = replace(
                    params, seed=_child_seed(config.seed, rep, fold, sdg)
                )
                try:
                    forest = train_forest(train, fold_params)
                except OneClassError as exc:
                    skipped.append((sdg, rep, fold, str(exc)))
                    continue
                tp = fp = tn = fn = 0
                for r in test:
                    predicted = forest_score(forest, r.features) >= config.threshold
                    if predicted and r.label:
                        tp += 1
                    elif predicted:
                        fp += 1
                    elif r.label:
                        fn += 1
                    else:
                        tn += 1
                    correct = predicted == r.label
                    origin_correct[r.origin] = origin_correct.get(r.origin, 0) + int(correct)
                    origin_total[r.origin] = origin_total.get(r.origin, 0) + 1
                    if r.synthetic:
                        synth_total += 1
                        synth_fp += int(predicted)
                    else:
                        labeled_origins.add(r.origin)
                counts = ConfusionCounts(tp, fp, tn, fn)
                pooled += counts
                records.append(CvFoldRecord(sdg, rep, fold, counts, metrics(counts)))

    per_origin = {
        origin: origin_correct[origin] / origin_total[origin] for origin in sorted(origin_total)
    }
    labeled_accs = [per_origin[o] for o in sorted(labeled_origins)]
    mean_origin = sum(labeled_accs) / len(labeled_accs) if labeled_accs else None
    return CvResult(
        tuple(records),
        pooled,
        metrics(pooled),
        per_origin,
        mean_origin,
        (synth_fp / synth_total) if synth_total else None,
        tuple(skipped),
        tuple(assignments),
    )


# ---------------------------------------------------------------------------
# Permutation importance
# ---------------------------------------------------------------------------


def permutation_importance(
    forest: Forest,
    rows: Sequence[FeatureRow],
    repetitions: int = 10,
    seed: int = 0,
    threshold: float = 0.5,
) -> list[float]:
    """Per-feature mean drop in weighted accuracy when that column is permuted."""
    if repetitions < 1:
        raise ParamError("repetitions must be >= 1")
    if not rows:
        raise ParamError("permutation importance needs evaluation rows")
    X, y, w = _rows_to_arrays(rows)
    total_w = w.sum()

    def weighted_accuracy(Xm: np.ndarray) -> float:
        correct = 0.0
        for i in range(Xm.shape[0]):
            predicted = forest_score(forest, Xm[i]) >= threshold
            if predicted == bool(y[i]):
                correct += w[i]
        return correct / total_w

    baseline = weighted_accuracy(X)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed,))))
    importances = []
    for f in range(X.shape[1]):
        drops = []
        for _ in range(repetitions):
            perm = rng.permutation(X.shape[0])
            Xp = X.copy()
            Xp[:, f] = X[perm, f]
            drops.append(baseline - weighted_accuracy(Xp))
        importances.append(sum(drops) / repetitions)
    return importances


def model_importance(
    model: EnsembleModel,
    rows_by_sdg: Mapping[int, Sequence[FeatureRow]],
    repetitions: int = 10,
    seed: int = 0,
) -> dict[int, dict[str, float]]:
    out: dict[int, dict[str, float]] = {}
    for sdg in range(1, 18):
        rows = rows_by_sdg.get(sdg, [])
        if not rows:
            continue
        imps = permutation_importance(
            model.forests[sdg],
            rows,
            repetitions=repetitions,
            seed=_child_seed(seed, sdg),
            threshold=model.threshold,
        )
        out[sdg] = dict(zip(model.feature_names, imps))
    return out


# ---------------------------------------------------------------------------
# Persistence (versioned single-file JSON)
# ---------------------------------------------------------------------------


def _node_to_obj(node: Leaf | Split):
    if isinstance(node, Leaf):
        return {"p": node.positive_fraction, "w": node.weight}
    return {
        "f": node.feature,
        "t": node.threshold,
        "l": _node_to_obj(node.left),
        "r": _node_to_obj(node.right),
    }


def _node_from_obj(obj) -> Leaf | Split:
    if not isinstance(obj, dict):
        raise ModelCorruptError("malformed tree node")
    if "p" in obj:
        return Leaf(float(obj["p"]), float(obj["w"]))
    try:
        return Split(
            int(obj["f"]),
            float(obj["t"]),
            _node_from_obj(obj["l"]),
            _node_from_obj(obj["r"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelCorruptError(f"malformed tree node: {exc}") from exc


def save_model(model: EnsembleModel, path: str | Path) -> None:
    path = Path(path)
    payload = {
        "magic": MODEL_MAGIC,
        "version": MODEL_VERSION,
        "feature_names": list(model.feature_names),
        "system_names": list(model.system_names),
        "k": model.k,
        "seed": model.seed,
        "threshold": model.threshold,
        "forests": {
            str(sdg): {
                "params": {
                    "num_trees": forest.params.num_trees,
                    "mtry": forest.params.mtry,
                    "min_leaf_frac": forest.params.min_leaf_frac,
                    "max_depth": forest.params.max_depth,
                    "bootstrap": forest.params.bootstrap,
                    "seed": forest.params.seed,
                },
                "n_features": forest.n_features,
                "trees": [_node_to_obj(t) for t in forest.trees],
            }
            for sdg, forest in sorted(model.forests.items())
        },
    }
    try:
        fd, tmp = tempfile.mkstemp(dir=str(path.parent), suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True)
        os.replace(tmp, path)
    except OSError as exc:
        raise IoError(f"cannot write model {path}: {exc}") from exc


def load_model(path: str | Path) -> EnsembleModel:
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read model {path}: {exc}") from exc
    try:
        payload = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ModelCorruptError(f"model file is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("magic") != MODEL_MAGIC:
        raise ModelCorruptError("not an ensemble model file (bad magic)")
    if payload.get("version") != MODEL_VERSION:
        raise ModelVersionError(
            f"unsupported model version {payload.get('version')!r} (expected {MODEL_VERSION})"
        )
    try:
        forests = {}
        for key, fobj in payload["forests"].items():
            p = fobj["params"]
            forests[int(key)] = Forest(
                tuple(_node_from_obj(t) for t in fobj["trees"]),
                int(fobj["n_features"]),
                ForestParams(
                    num_trees=int(p["num_trees"]),
                    mtry=p["mtry"],
                    min_leaf_frac=float(p["min_leaf_frac"]),
                    max_depth=p["max_depth"],
                    bootstrap=bool(p["bootstrap"]),
                    seed=int(p["seed"]),
                ),
            )
        return EnsembleModel(
            forests,
            tuple(payload["feature_names"]),
            tuple(payload["system_names"]),
            float(payload["k"]),
            int(payload["seed"]),
            float(payload["threshold"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelCorruptError(f"malformed model file: {exc}") from exc
