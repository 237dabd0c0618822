"""Running configured experiments and writing their result files.

Output files are byte-deterministic functions of the records: rows are
sorted canonically, floats are written with ``repr`` and JSON keys are
sorted.  Wall-clock timings go to ``timings.json`` only.
"""

import csv
import json
import os
import statistics
import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import active, dataset, imputation, overlap, theory
from .config import ACTIVE, IMPUTE, SYNTHETIC, THEORY, ExperimentConfig
from .errors import MultiplicityError, ParameterError
from .records import RESULT_COLUMNS, ResultRecord
from .seeding import derive_seed

OUTPUT_ENV = "NEIGHBOURMULT_OUTPUT_DIR"


@dataclass
class ExperimentRun:
    """Records of a run, failed cells, and task-specific extras."""

    records: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)


def load_data(cfg):
    src = cfg.data_source
    if "synthetic" in src:
        return dataset.generate_gaussian(cfg.synthetic_spec())
    return dataset.load_csv(src["csv"], src["label_column"], src.get("missing_token", ""), src.get("categorical"))


def fixed_split(cfg, data=None):
    """The one train/test split every seed of ``cfg`` shares."""
    data = load_data(cfg) if data is None else data
    return dataset.split(data, 1.0 - cfg.test_fraction, cfg.split_seed)


def _error(seed, setting, algorithm, exc):
    return {
        "seed": seed,
        "setting": setting,
        "algorithm": algorithm,
        "error": type(exc).__name__,
        "message": str(exc),
    }


def _run_active(cfg, train, test, out):
    strategies = cfg.strategy_objects()
    for seed in cfg.seeds:
        for n in cfg.n_grid:
            try:
                out.records.extend(
                    active.run_active(train, test, strategies, n, cfg.q, cfg.T, cfg.family, cfg.rashomon, seed)
                )
            except MultiplicityError as exc:
                out.errors.append(_error(seed, {"n": n, "q": cfg.q, "T": cfg.T}, "*", exc))


def _run_impute(cfg, train, test, out):
    methods = cfg.method_objects()
    diffs = []
    for seed in cfg.seeds:
        for r in cfg.r_grid:
            try:
                missing = dataset.inject_missing(train, r, derive_seed(seed, "missing", r))
                run = imputation.run_imputation(missing, test, methods, cfg.family, cfg.rashomon, seed, r)
            except MultiplicityError as exc:
                out.errors.append(_error(seed, {"r": r}, "*", exc))
                continue
            out.records.extend(run.records)
            for (a, b), k in sorted(run.pairwise_k.items()):
                diffs.append({"seed": seed, "r": r, "a": a, "b": b, "k": k})
    out.extras["pairwise_k"] = diffs


def _run_theory(cfg, out):
    t = cfg.theory
    kinds = tuple(t.get("classes", theory.CLASS_KINDS))
    eps = [Fraction(e) for e in t["epsilons"]] if "epsilons" in t else None
    summary = theory.sweep(t.get("instances", 1000), t.get("seed", 0), kinds, epsilons=eps)
    chains = theory.sweep_chains(t.get("chains", 200), t.get("seed", 0), kinds) if t.get("chains", 200) else []
    out.extras["theory"] = theory_report(summary, chains)


def theory_report(summary, chains):
    return {
        "instances": summary.as_dict(),
        "chains": {
            "count": len(chains),
            "assumptions_hold": sum(c.assumptions_hold for c in chains),
            "composed_subset_holds": sum(c.subset_holds for c in chains if c.assumptions_hold),
            "counterexamples": [c.counterexample for c in chains if c.counterexample is not None],
        },
    }


def run_experiment(cfg):
    """Run every (seed, setting) cell of ``cfg``; failed cells are logged, not raised."""
    out = ExperimentRun()
    if cfg.task == THEORY:
        _run_theory(cfg, out)
        return out
    data = load_data(cfg)
    if cfg.task == SYNTHETIC:
        out.extras["data"] = data
        return out
    train, test = fixed_split(cfg, data)
    if cfg.task == ACTIVE:
        _run_active(cfg, train, test, out)
    elif cfg.task == IMPUTE:
        _run_impute(cfg, train, test, out)
    out.records = sort_records(out.records)
    return out


# ---------------------------------------------------------------------------
# analysis


def _sort_key(rec):
    def num(v):
        return (v is None, v if v is not None else 0)

    return (rec.task, num(rec.n), num(rec.r), num(rec.t), rec.seed, rec.algorithm)


def sort_records(records):
    return sorted(records, key=_sort_key)


def _stats(values):
    values = [float(v) for v in values]
    std = statistics.pstdev(values) if len(values) > 1 else 0.0
    return {"mean": statistics.fmean(values), "std": std, "count": len(values)}


def correlate(records, x="ovl", y="ambiguity", group_by=("task", "n", "t", "r")):
    """Spearman of ``x`` against ``y`` across algorithms, per group and seed.

    Returns one row per group with the per-seed values and their mean and
    standard deviation.  Seeds whose values are constant (or have fewer
    than three records) are listed under ``skipped``.
    """
    cells = defaultdict(list)
    for rec in records:
        key = tuple(getattr(rec, g) for g in group_by)
        cells[key, rec.seed].append(rec)
    groups = defaultdict(dict)
    skipped = defaultdict(list)
    for (key, seed), recs in sorted(cells.items(), key=lambda kv: repr(kv[0])):
        if len(recs) < 3:
            skipped[key].append({"seed": seed, "reason": f"only {len(recs)} records"})
            continue
        try:
            groups[key][seed] = overlap.spearman([getattr(r, x) for r in recs], [getattr(r, y) for r in recs])
        except overlap.UndefinedCorrelationError as exc:
            warnings.warn(f"group {dict(zip(group_by, key))} seed {seed}: {exc}", stacklevel=2)
            skipped[key].append({"seed": seed, "reason": str(exc)})
    rows = []
    for key in sorted(set(groups) | set(skipped), key=repr):
        per_seed = groups.get(key, {})
        row = dict(zip(group_by, key))
        row.update({"x": x, "y": y, "per_seed": {str(s): v for s, v in sorted(per_seed.items())}})
        if per_seed:
            vals = list(per_seed.values())
            row.update(mean=statistics.fmean(vals), std=statistics.pstdev(vals), median=statistics.median(vals))
        else:
            row.update(mean=None, std=None, median=None)
        row["skipped"] = skipped.get(key, [])
        rows.append(row)
    return rows


def summarize(records):
    by_alg = defaultdict(list)
    by_setting = defaultdict(lambda: defaultdict(list))
    for rec in records:
        by_alg[rec.task, rec.algorithm].append(rec)
        setting = ",".join(f"{k}={getattr(rec, k)}" for k in ("n", "t", "r") if getattr(rec, k) is not None)
        by_setting[rec.task, setting][rec.algorithm].append(rec)
    metrics = ("accuracy", "ambiguity", "ovl", "epsilon", "rashomon_size")

    def block(recs):
        return {m: _stats([getattr(r, m) for r in recs]) for m in metrics}

    return {
        "by_algorithm": {f"{t}/{a}": block(recs) for (t, a), recs in sorted(by_alg.items())},
        "by_setting": {
            f"{t}/{s}": {a: block(recs) for a, recs in sorted(algs.items())}
            for (t, s), algs in sorted(by_setting.items())
        },
        "record_count": len(records),
    }


# ---------------------------------------------------------------------------
# files


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_results_csv(records, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for rec in records:
            row = rec.as_row()
            w.writerow([_cell(row[c]) for c in RESULT_COLUMNS])


def read_results_csv(path):
    with open(path, newline="") as fh:
        return [ResultRecord.from_row(row) for row in csv.DictReader(fh)]


def _write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def _plotdata(records, out_dir):
    plot = Path(out_dir) / "plotdata"
    plot.mkdir(parents=True, exist_ok=True)
    _write_rows(
        plot / "ambiguity_vs_accuracy.csv",
        ("task", "n", "t", "r", "seed", "algorithm", "accuracy", "ambiguity"),
        [(r.task, r.n, r.t, r.r, r.seed, r.algorithm, r.accuracy, r.ambiguity) for r in records],
    )
    series = defaultdict(list)
    for r in records:
        if r.t is not None:
            series["ambiguity_vs_step", (r.task, r.n, r.t, r.algorithm)].append(r)
        if r.r is not None:
            series["ambiguity_vs_r", (r.task, r.r, r.algorithm)].append(r)
    header = {
        "ambiguity_vs_step": ("task", "n", "t", "algorithm"),
        "ambiguity_vs_r": ("task", "r", "algorithm"),
    }
    for name, head in header.items():
        rows = []
        for (kind, key), recs in sorted(series.items(), key=lambda kv: repr(kv[0])):
            if kind != name:
                continue
            amb = _stats([r.ambiguity for r in recs])
            acc = _stats([r.accuracy for r in recs])
            rows.append((*key, amb["mean"], amb["std"], acc["mean"], acc["std"], amb["count"]))
        if rows:
            _write_rows(
                plot / f"{name}.csv",
                (*head, "ambiguity_mean", "ambiguity_std", "accuracy_mean", "accuracy_std", "seeds"),
                rows,
            )


def emit_report(records, out_dir, errors=(), extras=None):
    """Write results.csv, summary.json, errors.json, timings.json and plotdata/."""
    records = sort_records(records)
    if not records and not extras:
        raise ParameterError("emit_report needs at least one record")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_results_csv(records, out / "results.csv")
    summary = summarize(records)
    if records:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            summary["correlation"] = correlate(records)
    for key, value in sorted((extras or {}).items()):
        if key != "data":
            summary[key] = value
    _write_json(summary, out / "summary.json")
    _write_json(list(errors), out / "errors.json")
    _write_json(
        [{"setting": list(r.setting()), "algorithm": r.algorithm, "runtime_seconds": r.runtime_seconds} for r in records],
        out / "timings.json",
    )
    if records:
        _plotdata(records, out)
    return out


def output_dir_env():
    return os.environ.get(OUTPUT_ENV) or None


def output_dir(cfg, flag=None):
    """``--out`` beats the environment variable, which beats the config."""
    return flag or output_dir_env() or cfg.output_dir


def run_and_report(cfg, out_dir=None):
    run = run_experiment(cfg)
    target = output_dir(cfg, out_dir)
    if cfg.task == SYNTHETIC:
        Path(target).mkdir(parents=True, exist_ok=True)
        dataset.save_csv(run.extras["data"], Path(target) / "data.csv")
        return run, Path(target)
    return run, emit_report(run.records, target, run.errors, run.extras)


def load_config(path, seed=None):
    cfg = ExperimentConfig.load(path)
    return cfg.with_overrides(seed=seed) if seed is not None else cfg
