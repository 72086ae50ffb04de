"""Command-line surface for the SDG detection pipeline.

Subcommands: detect, evaluate, bias, synth, train, predict, importance.
All outputs are plot-ready CSV (mirrored to JSON with --json) plus a
manifest.json recording inputs (sha256), parameters, and seed, so a run
can be reproduced byte-for-byte. Outputs are written atomically.

Exit codes: 0 success, 2 usage/parameter error, 3 data/schema error,
4 degenerate computation.

A key=value config file (via --config or the SDGDETECT_CONFIG env var)
may supply defaults for the global flags seed, threads, out_dir, json;
command-line flags always win. --threads is recorded in the manifest;
commands run single-process.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
from pathlib import Path

from . import __version__
from .bias import bias as bias_vector
from .bias import profile, profile_bias, profile_fidelity
from .corpus import Dataset, LabeledDocument, load_documents, save_documents
from .ensemble import (
    CvConfig,
    ForestParams,
    _child_seed,
    build_features,
    cross_validate,
    feature_names_for,
    load_model,
    model_importance,
    save_model,
    train_model,
)
from .errors import DegenerateInputError, ParamError, SchemaError, SdgToolError
from .evaluation import confusion, metrics, roc_point, sdgs_per_document
from .synthgen import SynthSpec, generate_documents, generate_matched, load_frequency_table
from .systems import (
    PredictionMatrix,
    detect,
    import_external_predictions,
    keyword_frequencies,
    load_system,
    to_matrix,
)

CONFIG_ENV_VAR = "SDGDETECT_CONFIG"


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def _atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), suffix=".tmp")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_table(out_dir: Path, name: str, header: list[str], rows, as_json: bool) -> None:
    lines = [",".join(header)]
    for row in rows:
        cells = [_fmt(v) for v in row]
        quoted = []
        for cell in cells:
            if any(c in cell for c in ',"\n'):
                cell = '"' + cell.replace('"', '""') + '"'
            quoted.append(cell)
        lines.append(",".join(quoted))
    _atomic_write_text(out_dir / f"{name}.csv", "\n".join(lines) + "\n")
    if as_json:
        payload = [dict(zip(header, [None if v is None else v for v in row])) for row in rows]
        _atomic_write_text(
            out_dir / f"{name}.json", json.dumps(payload, sort_keys=True, indent=2) + "\n"
        )


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(out_dir: Path, command: str, params: dict, inputs, seed: int) -> None:
    manifest = {
        "tool": "sdgdetect",
        "version": __version__,
        "command": command,
        "seed": seed,
        "params": params,
        "inputs": {str(p): _sha256(Path(p)) for p in inputs},
    }
    _atomic_write_text(
        out_dir / "manifest.json", json.dumps(manifest, sort_keys=True, indent=2) + "\n"
    )


def _write_matrix_file(
    out_dir: Path, system_names: list[str], matrices: dict[str, PredictionMatrix]
) -> None:
    payload = {
        "systems": sorted(system_names),
        "datasets": {
            name: {"assignments": [list(t) for t in matrix.assignments]}
            for name, matrix in sorted(matrices.items())
        },
    }
    _atomic_write_text(
        out_dir / "matrix.json", json.dumps(payload, sort_keys=True, indent=2) + "\n"
    )


def _load_matrix_file(
    path: Path, datasets: list[Dataset]
) -> tuple[list[str], dict[str, PredictionMatrix]]:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        systems = list(payload["systems"])
        raw = payload["datasets"]
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise SchemaError(f"cannot read prediction matrix {path}: {exc}") from exc
    matrices: dict[str, PredictionMatrix] = {}
    for ds in datasets:
        if ds.name not in raw:
            raise SchemaError(f"matrix file has no predictions for dataset {ds.name!r}")
        matrix = PredictionMatrix()
        for doc in ds.documents:
            for s in systems:
                matrix.cover(doc.id, s)
        for doc_id, system, sdg in raw[ds.name]["assignments"]:
            matrix.add(doc_id, system, int(sdg))
        matrices[ds.name] = matrix
    return systems, matrices


# ---------------------------------------------------------------------------
# Shared loading
# ---------------------------------------------------------------------------


def _load_datasets(paths: list[str]) -> list[Dataset]:
    datasets = [load_documents(p) for p in paths]
    names = [d.name for d in datasets]
    if len(set(names)) != len(names):
        raise SchemaError(f"dataset names collide: {names}")
    return datasets


def _load_systems(paths: list[str]):
    systems = [load_system(p) for p in paths]
    names = [s.name for s in systems]
    if len(set(names)) != len(names):
        raise SchemaError(f"system names collide: {names}")
    return systems


def _detect_all(datasets, systems) -> tuple[list, dict[str, PredictionMatrix]]:
    all_hits = []
    matrices = {}
    for ds in datasets:
        hits = detect(ds, systems)
        matrices[ds.name] = to_matrix(hits, ds, systems)
        all_hits.append((ds.name, hits))
    return all_hits, matrices


def _parse_k_grid(raw: str) -> list[float]:
    try:
        values = [float(part) for part in raw.split(",") if part.strip()]
    except ValueError:
        raise ParamError(f"invalid k grid {raw!r}") from None
    if not values or any(not 0 <= v <= 10 for v in values):
        raise ParamError("k values must lie in [0, 10]")
    return values


def _forest_params(args, seed: int) -> ForestParams:
    return ForestParams(
        num_trees=args.trees,
        mtry=args.mtry,
        min_leaf_frac=args.min_leaf_frac,
        max_depth=args.max_depth,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_detect(args, ctx) -> int:
    out_dir = ctx["out_dir"]
    systems = _load_systems(args.systems)
    datasets = _load_datasets(args.dataset)
    hits_by_ds, matrices = _detect_all(datasets, systems)
    system_names = [s.name for s in systems]

    if args.external:
        all_ids = {doc.id for ds in datasets for doc in ds.documents}
        for item in args.external:
            if "=" not in item:
                raise ParamError("--external expects NAME=PATH")
            name, path = item.split("=", 1)
            fragment = import_external_predictions(
                path, name, known_doc_ids=all_ids, strict=not args.lenient_external
            )
            system_names.append(name)
            for ds in datasets:
                matrix = matrices[ds.name]
                for doc in ds.documents:
                    matrix.cover(doc.id, name)
                    for sdg in fragment.predicted(doc.id, name):
                        matrix.add(doc.id, name, sdg)

    hit_rows = []
    freq_rows = []
    for ds_name, hits in hits_by_ds:
        for hit in hits:
            if hit.matched_terms:
                for term, positions in hit.matched_terms:
                    hit_rows.append(
                        (
                            ds_name,
                            hit.doc_id,
                            hit.system,
                            hit.sdg,
                            hit.query_id,
                            term,
                            "|".join(str(p) for p in positions),
                        )
                    )
            else:
                hit_rows.append((ds_name, hit.doc_id, hit.system, hit.sdg, hit.query_id, "", ""))
        for system, term, count in keyword_frequencies(hits):
            freq_rows.append((ds_name, system, term, count))

    _write_table(
        out_dir,
        "hits",
        ["dataset", "doc_id", "system", "sdg", "query_id", "term", "positions"],
        hit_rows,
        ctx["json"],
    )
    _write_table(
        out_dir,
        "keyword_frequencies",
        ["dataset", "system", "term", "count"],
        freq_rows,
        ctx["json"],
    )
    _write_matrix_file(out_dir, system_names, matrices)
    _write_manifest(
        out_dir,
        "detect",
        {"datasets": args.dataset, "systems": args.systems, "external": args.external or []},
        args.dataset + args.systems + [i.split("=", 1)[1] for i in (args.external or [])],
        ctx["seed"],
    )
    return 0


def cmd_evaluate(args, ctx) -> int:
    out_dir = ctx["out_dir"]
    datasets = _load_datasets(args.dataset)
    systems, matrices = _load_matrix_file(Path(args.matrix), datasets)

    metric_rows = []
    roc_rows = []
    spd_rows = []
    for ds in datasets:
        matrix = matrices[ds.name]
        for system in systems:
            counts = confusion(matrix, ds, system)
            report = metrics(counts)
            metric_rows.append(
                (
                    ds.name,
                    system,
                    counts.tp,
                    counts.fp,
                    counts.tn,
                    counts.fn,
                    report.sensitivity,
                    report.specificity,
                    report.accuracy,
                    report.balanced_accuracy,
                    report.precision,
                    report.f1,
                )
            )
            if report.sensitivity is not None and report.specificity is not None:
                x, y = roc_point(report)
                roc_rows.append((ds.name, system, x, y))
            mean_sdgs, mean_words = sdgs_per_document(matrix, ds, system)
            spd_rows.append((ds.name, system, mean_words, mean_sdgs))

    _write_table(
        out_dir,
        "metrics",
        [
            "dataset",
            "system",
            "tp",
            "fp",
            "tn",
            "fn",
            "sensitivity",
            "specificity",
            "accuracy",
            "balanced_accuracy",
            "precision",
            "f1",
        ],
        metric_rows,
        ctx["json"],
    )
    _write_table(out_dir, "roc", ["dataset", "system", "fpr", "tpr"], roc_rows, ctx["json"])
    _write_table(
        out_dir,
        "sdgs_per_doc",
        ["dataset", "system", "mean_words", "mean_sdgs_per_doc"],
        spd_rows,
        ctx["json"],
    )
    _write_manifest(
        out_dir,
        "evaluate",
        {"datasets": args.dataset, "matrix": args.matrix},
        args.dataset + [args.matrix],
        ctx["seed"],
    )
    return 0


def _dataset_profiles(ds: Dataset, matrix: PredictionMatrix, system: str):
    expert_sets = []
    system_sets = []
    for doc in ds.documents:
        if not isinstance(doc, LabeledDocument):
            continue
        expert_sets.append(doc.labels)
        system_sets.append(matrix.predicted(doc.id, system) & doc.evaluated)
    return profile(expert_sets), profile(system_sets)


def cmd_bias(args, ctx) -> int:
    out_dir = ctx["out_dir"]
    datasets = _load_datasets(args.dataset)
    systems, matrices = _load_matrix_file(Path(args.matrix), datasets)

    excluded = set()
    for item in args.exclude_pair or []:
        if ":" not in item:
            raise ParamError("--exclude-pair expects NAME:NAME")
        a, b = item.split(":", 1)
        excluded.add(frozenset((a, b)))
    names = sorted(d.name for d in datasets)
    pairs = [
        (a, b)
        for i, a in enumerate(names)
        for b in names[i + 1 :]
        if frozenset((a, b)) not in excluded
    ]

    bias_rows = []
    profile_rows = []
    corr_rows = []
    expert_profiles = {}
    for ds in datasets:
        if not ds.labeled:
            raise SchemaError(f"dataset {ds.name!r} has no expert labels")
    for system in systems:
        biases = {}
        fidelities = []
        for ds in datasets:
            expert, predicted = _dataset_profiles(ds, matrices[ds.name], system)
            expert_profiles[ds.name] = expert
            vec = bias_vector(predicted, expert)
            biases[ds.name] = vec
            for sdg in range(1, 18):
                bias_rows.append(
                    (
                        system,
                        ds.name,
                        sdg,
                        expert.proportions[sdg - 1],
                        predicted.proportions[sdg - 1],
                        vec[sdg - 1],
                    )
                )
            for sdg in range(1, 18):
                profile_rows.append((system, ds.name, sdg, predicted.proportions[sdg - 1]))
            try:
                fidelities.append(profile_fidelity(expert, predicted))
            except DegenerateInputError as exc:
                print(f"warning: fidelity for {system}/{ds.name}: {exc}", file=sys.stderr)
        fidelity = sum(fidelities) / len(fidelities) if fidelities else None
        corr_rows.append((system, "profile_fidelity_mean_rho", fidelity))
        try:
            mean_r = profile_bias(biases, pairs) if pairs else None
        except DegenerateInputError as exc:
            print(f"warning: profile bias for {system}: {exc}", file=sys.stderr)
            mean_r = None
        corr_rows.append((system, "profile_bias_mean_r", mean_r))

    for name in sorted(expert_profiles):
        for sdg in range(1, 18):
            profile_rows.append(
                ("expert", name, sdg, expert_profiles[name].proportions[sdg - 1])
            )
    profile_rows.sort(key=lambda r: (r[0], r[1], r[2]))

    _write_table(
        out_dir,
        "bias",
        ["system", "dataset", "sdg", "observed", "predicted", "bias"],
        bias_rows,
        ctx["json"],
    )
    _write_table(
        out_dir,
        "profiles",
        ["source", "dataset", "sdg", "proportion"],
        profile_rows,
        ctx["json"],
    )
    _write_table(out_dir, "correlations", ["system", "metric", "value"], corr_rows, ctx["json"])
    _write_manifest(
        out_dir,
        "bias",
        {
            "datasets": args.dataset,
            "matrix": args.matrix,
            "exclude_pairs": args.exclude_pair or [],
            "pairs": [list(p) for p in pairs],
        },
        args.dataset + [args.matrix],
        ctx["seed"],
    )
    return 0


def cmd_synth(args, ctx) -> int:
    out_dir = ctx["out_dir"]
    table = load_frequency_table(args.freq_table)
    if args.match:
        reference = load_documents(args.match)
        dataset = generate_matched(table, reference, ctx["seed"])
        inputs = [args.freq_table, args.match]
    else:
        if not args.lengths:
            raise ParamError("synth requires --lengths or --match")
        lengths = tuple(int(x) for x in args.lengths.split(","))
        spec = SynthSpec(lengths, args.docs_per_length, ctx["seed"])
        dataset = generate_documents(table, spec)
        inputs = [args.freq_table]
    out_dir.mkdir(parents=True, exist_ok=True)
    save_documents(dataset, out_dir / "synthetic.jsonl")
    _write_manifest(
        out_dir,
        "synth",
        {
            "freq_table": args.freq_table,
            "match": args.match,
            "lengths": args.lengths,
            "docs_per_length": args.docs_per_length,
        },
        inputs,
        ctx["seed"],
    )
    return 0


def cmd_train(args, ctx) -> int:
    out_dir = ctx["out_dir"]
    seed = ctx["seed"]
    systems = _load_systems(args.systems)
    labeled = _load_datasets(args.dataset)
    table = load_frequency_table(args.freq_table)
    synthetic = [
        generate_matched(table, ds, _child_seed(seed, i)) for i, ds in enumerate(labeled)
    ]
    _, matrices = _detect_all(labeled + synthetic, systems)
    system_names = [s.name for s in systems]

    grid = _parse_k_grid(args.k_grid) if args.k_grid else []
    if args.k not in grid:
        grid.append(args.k)
    grid = sorted(set(grid))

    curve_rows = []
    final_cv = None
    for kg in grid:
        rows = build_features(matrices, system_names, labeled, synthetic, kg)
        cv = cross_validate(
            rows,
            CvConfig(args.folds, args.repeats, seed, kg, args.threshold),
            _forest_params(args, seed),
        )
        curve_rows.append(
            (kg, cv.pooled_report.accuracy, cv.mean_origin_accuracy, cv.synthetic_fp_rate)
        )
        if kg == args.k:
            final_cv = cv

    assert final_cv is not None
    cv_rows = [
        (
            rec.sdg,
            rec.fold,
            rec.repeat,
            rec.counts.tp,
            rec.counts.fp,
            rec.counts.tn,
            rec.counts.fn,
            rec.report.accuracy,
            rec.report.f1,
        )
        for rec in final_cv.records
    ]
    skipped_rows = [(sdg, rep, fold, reason) for sdg, rep, fold, reason in final_cv.skipped]

    rows = build_features(matrices, system_names, labeled, synthetic, args.k)
    model = train_model(
        rows, system_names, args.k, _forest_params(args, seed), args.threshold
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    save_model(model, out_dir / "model.json")

    _write_table(
        out_dir,
        "cv_report",
        ["sdg", "fold", "repeat", "tp", "fp", "tn", "fn", "accuracy", "f1"],
        cv_rows,
        ctx["json"],
    )
    _write_table(
        out_dir,
        "curve",
        ["k", "pooled_accuracy", "mean_dataset_accuracy", "synthetic_fp_rate"],
        curve_rows,
        ctx["json"],
    )
    _write_table(out_dir, "skipped", ["sdg", "repeat", "fold", "reason"], skipped_rows, ctx["json"])
    _write_manifest(
        out_dir,
        "train",
        {
            "datasets": args.dataset,
            "systems": args.systems,
            "freq_table": args.freq_table,
            "k": args.k,
            "k_grid": grid,
            "folds": args.folds,
            "repeats": args.repeats,
            "trees": args.trees,
            "mtry": args.mtry,
            "max_depth": args.max_depth,
            "min_leaf_frac": args.min_leaf_frac,
            "threshold": args.threshold,
        },
        args.dataset + args.systems + [args.freq_table],
        seed,
    )
    return 0


def cmd_predict(args, ctx) -> int:
    out_dir = ctx["out_dir"]
    model = load_model(args.model)
    systems = _load_systems(args.systems)
    if {s.name for s in systems} != set(model.system_names):
        raise SchemaError(
            f"model was trained on systems {sorted(model.system_names)}, "
            f"got {sorted(s.name for s in systems)}"
        )
    datasets = _load_datasets(args.dataset)
    _, matrices = _detect_all(datasets, systems)

    rows = []
    for ds in datasets:
        matrix = matrices[ds.name]
        for doc in ds.documents:
            preds = {s: matrix.predicted(doc.id, s) for s in model.system_names}
            assigned, scores = model.predict_document(preds, doc.word_count)
            for sdg in range(1, 18):
                rows.append((ds.name, doc.id, sdg, scores[sdg], sdg in assigned))
    _write_table(
        out_dir,
        "predictions",
        ["dataset", "doc_id", "sdg", "score", "assigned"],
        rows,
        ctx["json"],
    )
    _write_manifest(
        out_dir,
        "predict",
        {"model": args.model, "datasets": args.dataset, "systems": args.systems},
        [args.model] + args.dataset + args.systems,
        ctx["seed"],
    )
    return 0


def cmd_importance(args, ctx) -> int:
    out_dir = ctx["out_dir"]
    seed = ctx["seed"]
    model = load_model(args.model)
    systems = _load_systems(args.systems)
    if {s.name for s in systems} != set(model.system_names):
        raise SchemaError(
            f"model was trained on systems {sorted(model.system_names)}, "
            f"got {sorted(s.name for s in systems)}"
        )
    labeled = _load_datasets(args.dataset)
    table = load_frequency_table(args.freq_table)
    synthetic = [
        generate_matched(table, ds, _child_seed(seed, i)) for i, ds in enumerate(labeled)
    ]
    _, matrices = _detect_all(labeled + synthetic, systems)
    rows = build_features(matrices, list(model.system_names), labeled, synthetic, model.k)
    importances = model_importance(model, rows, repetitions=args.repetitions, seed=seed)

    out_rows = []
    for sdg in sorted(importances):
        for feature in feature_names_for(model.system_names):
            out_rows.append((sdg, feature, importances[sdg][feature]))
    _write_table(out_dir, "importance", ["sdg", "feature", "importance"], out_rows, ctx["json"])
    _write_manifest(
        out_dir,
        "importance",
        {
            "model": args.model,
            "datasets": args.dataset,
            "systems": args.systems,
            "freq_table": args.freq_table,
            "repetitions": args.repetitions,
        },
        [args.model] + args.dataset + args.systems + [args.freq_table],
        seed,
    )
    return 0


# ---------------------------------------------------------------------------
# Parser / entry point
# ---------------------------------------------------------------------------


def _read_config(path: str | None) -> dict[str, str]:
    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR)
    if not path or not Path(path).exists():
        return {}
    config = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParamError(f"config {path}:{lineno}: expected key=value")
        key, value = line.split("=", 1)
        config[key.strip()] = value.strip()
    return config


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default 0)")
    common.add_argument("--threads", type=int, default=None, help="recorded; single-process")
    common.add_argument("--out-dir", default=None, help="output directory (default ./out)")
    common.add_argument("--json", action="store_true", default=None, help="mirror CSVs as JSON")
    common.add_argument("--config", default=None, help=f"key=value config (or ${CONFIG_ENV_VAR})")

    parser = argparse.ArgumentParser(prog="sdgdetect", description=__doc__)
    parser.add_argument("--version", action="version", version=f"sdgdetect {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", parents=[common], help="run labeling systems over datasets")
    p.add_argument("--dataset", action="append", required=True)
    p.add_argument("--systems", action="append", required=True)
    p.add_argument("--external", action="append", help="NAME=PATH external predictions CSV")
    p.add_argument("--lenient-external", action="store_true", help="skip unknown doc ids")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("evaluate", parents=[common], help="score predictions against labels")
    p.add_argument("--dataset", action="append", required=True)
    p.add_argument("--matrix", required=True, help="matrix.json from detect")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bias", parents=[common], help="per-SDG bias and profile correlations")
    p.add_argument("--dataset", action="append", required=True)
    p.add_argument("--matrix", required=True)
    p.add_argument("--exclude-pair", action="append", help="NAME:NAME pair to skip")
    p.set_defaults(func=cmd_bias)

    p = sub.add_parser("synth", parents=[common], help="generate synthetic documents")
    p.add_argument("--freq-table", required=True)
    p.add_argument("--lengths", help="comma-separated document lengths")
    p.add_argument("--docs-per-length", type=int, default=1000)
    p.add_argument("--match", help="dataset to length-match instead of --lengths")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", parents=[common], help="train the per-SDG ensemble")
    p.add_argument("--dataset", action="append", required=True, help="labeled dataset")
    p.add_argument("--systems", action="append", required=True)
    p.add_argument("--freq-table", required=True)
    p.add_argument("--k", type=float, default=1.0, help="synthetic weight factor")
    p.add_argument("--k-grid", help="comma-separated k values for curve data")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--repeats", type=int, default=2)
    p.add_argument("--trees", type=int, default=300)
    p.add_argument("--mtry", type=int, default=None)
    p.add_argument("--max-depth", type=int, default=None)
    p.add_argument("--min-leaf-frac", type=float, default=1e-6)
    p.add_argument("--threshold", type=float, default=0.5)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", parents=[common], help="apply a saved ensemble model")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", action="append", required=True)
    p.add_argument("--systems", action="append", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("importance", parents=[common], help="permutation feature importance")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", action="append", required=True, help="labeled dataset")
    p.add_argument("--systems", action="append", required=True)
    p.add_argument("--freq-table", required=True)
    p.add_argument("--repetitions", type=int, default=10)
    p.set_defaults(func=cmd_importance)

    return parser


def _build_context(args) -> dict:
    config = _read_config(args.config)

    def pick(flag_value, key, fallback, convert):
        if flag_value is not None:
            return flag_value
        if key in config:
            return convert(config[key])
        return fallback

    return {
        "seed": pick(args.seed, "seed", 0, int),
        "threads": pick(args.threads, "threads", 1, int),
        "out_dir": Path(pick(args.out_dir, "out_dir", "out", str)),
        "json": bool(pick(args.json, "json", False, lambda v: v.lower() in ("1", "true", "yes"))),
    }


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        ctx = _build_context(args)
        ctx["out_dir"].mkdir(parents=True, exist_ok=True)
        return args.func(args, ctx)
    except SdgToolError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error [E_IO]: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
