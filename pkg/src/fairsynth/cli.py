"""End-to-end experiment driver.

Subcommands (all deterministic functions of inputs, config and seed):

- ``fit``              train a generator, write model file + loss history
- ``sample``           draw synthetic rows from a model file into a CSV
- ``evaluate``         fidelity + fairness reports for original vs synthetic
- ``audit``            downstream logistic-regression audit
- ``proxy-experiment`` inject a proxy column, refit, report key associations
- ``sweep``            grid over fairness weights x seeds, select a weight

Each run owns its output directory, writes the fully resolved config next
to its reports, and derives every sub-seed from the master seed (see
fairsynth.rng). Exit codes: 0 success, 1 validation error, 2 runtime or
numeric error. Diagnostics go to stderr; reports go to files, whose paths
are printed to stdout.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .audit import LogRegConfig, audit
from .config import ExperimentConfig, load_experiment_config
from .data import decode, encode, fit_encoder, inject_proxy, load_csv
from .errors import FairsynthError, NumericError, ValidationError
from .fairness import fairness_report
from .fidelity import cramers_v, fidelity_report
from .model import init_model, load_model, sample, save_model, train
from .rng import derive_seed
from .schema import CATEGORICAL, ColumnSpec


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse usage errors are validation errors
        raise ValidationError(message)


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _emit(path: Path) -> None:
    print(str(path))


def _out_dir(cfg_dir: str, override: str | None) -> Path:
    out = Path(override) if override else Path(cfg_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(obj, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=1)
        fh.write("\n")
    _emit(path)


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
        cfg.train = dataclasses.replace(cfg.train, seed=args.seed)
    if getattr(args, "fairness_weight", None) is not None:
        cfg.train = dataclasses.replace(cfg.train, fairness_weight=args.fairness_weight)
    if getattr(args, "reps", None) is not None:
        cfg.reps = args.reps
    if getattr(args, "out", None) is not None:
        cfg.output_dir = args.out
    return cfg


def _load_config(args) -> ExperimentConfig:
    return _apply_overrides(load_experiment_config(args.config), args)


def _write_resolved(cfg: ExperimentConfig, out: Path) -> None:
    path = out / "resolved_config.txt"
    path.write_text(cfg.resolved_text(), encoding="utf-8")
    _emit(path)


def _fit_one(cfg: ExperimentConfig, data, fairness_weight: float, seed: int):
    train_cfg = dataclasses.replace(cfg.train, fairness_weight=fairness_weight, seed=seed)
    enc = fit_encoder(data)
    encoded = encode(data, enc)
    model = init_model(enc, data.schema, train_cfg)
    return train(model, encoded, train_cfg)


def cmd_fit(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(cfg.output_dir, None)
    data = load_csv(cfg.data_path, cfg.schema)
    _log(f"fit: {data.n_rows} rows, fairness_weight={cfg.train.fairness_weight}")
    model, history = _fit_one(cfg, data, cfg.train.fairness_weight, cfg.train.seed)
    save_model(model, out / "model.json")
    _emit(out / "model.json")
    history.write_csv(out / "history.csv")
    _emit(out / "history.csv")
    _write_resolved(cfg, out)
    return 0


def cmd_sample(args) -> int:
    model = load_model(args.model)
    if args.n < 0:
        raise ValidationError("sample size must be >= 0")
    codes = sample(model, args.n, args.seed)
    data = decode(codes, derive_seed(args.seed, "decode"))
    out_path = Path(args.out or "synthetic.csv")
    out_path.parent.mkdir(parents=True, exist_ok=True)
    data.write_csv(out_path)
    _emit(out_path)
    return 0


def cmd_evaluate(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(cfg.output_dir, None)
    original = load_csv(args.original, cfg.schema)
    schema = cfg.schema
    if cfg.has_proxy and "proxy" not in schema.names:
        schema = schema.with_column(ColumnSpec("proxy", CATEGORICAL))
        original = load_csv(args.original, schema)
    synthetic = load_csv(args.synthetic, schema)
    enc = fit_encoder(original)
    proxies = ["proxy"] if "proxy" in schema.names else []
    fid = fidelity_report(original, synthetic, enc, schema, proxy_columns=proxies)
    _write_json(fid.to_dict(), out / "fidelity_report.json")
    fid.write_tv_csv(out / "tv_table.csv")
    _emit(out / "tv_table.csv")
    fid.write_pairs_csv(out / "pairwise_v.csv")
    _emit(out / "pairwise_v.csv")
    _write_json(
        {
            "original": fairness_report(original, schema),
            "synthetic": fairness_report(synthetic, schema),
        },
        out / "fairness_report.json",
    )
    _write_resolved(cfg, out)
    return 0


def cmd_audit(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(cfg.output_dir, None)
    original = load_csv(args.original, cfg.schema)
    model = load_model(args.model)
    if model.schema.names != cfg.schema.names:
        raise ValidationError("model schema does not match config schema")
    _log(f"audit: {cfg.reps} synthetic repetitions")
    report = audit(
        original,
        model,
        reps=cfg.reps,
        seed=cfg.seed,
        holdout_fraction=cfg.holdout_fraction,
        logreg=LogRegConfig(),
    )
    _write_json(report.to_dict(), out / "audit_report.json")
    report.write_histogram_csv(out / "propensity_hist.csv")
    _emit(out / "propensity_hist.csv")
    _write_resolved(cfg, out)
    return 0


def cmd_proxy_experiment(args) -> int:
    cfg = _load_config(args)
    if not cfg.has_proxy:
        raise ValidationError("proxy-experiment needs the proxy.* config block")
    out = _out_dir(cfg.output_dir, None)
    base = load_csv(cfg.data_path, cfg.schema)
    injected = inject_proxy(
        base,
        cfg.proxy_column,
        cfg.proxy_reference_value,
        cfg.proxy_probability,
        derive_seed(cfg.seed, "proxy"),
    )
    _log("proxy-experiment: refitting encoder and model on injected data")
    model, history = _fit_one(cfg, injected, cfg.train.fairness_weight, cfg.train.seed)
    save_model(model, out / "model.json")
    _emit(out / "model.json")
    history.write_csv(out / "history.csv")
    _emit(out / "history.csv")
    codes = sample(model, injected.n_rows, derive_seed(cfg.seed, "sample"))
    synthetic = decode(codes, derive_seed(cfg.seed, "decode"))
    synthetic.write_csv(out / "synthetic.csv")
    _emit(out / "synthetic.csv")

    enc = fit_encoder(injected)
    target = injected.schema.target.name
    prot = cfg.proxy_column
    report = {"pairs": {}, "fairness": {}}
    for name, (a, b) in {
        "protected_proxy": (prot, "proxy"),
        "protected_target": (prot, target),
        "proxy_target": ("proxy", target),
    }.items():
        report["pairs"][name] = {
            "columns": [a, b],
            "v_original": cramers_v(injected, a, b, enc),
            "v_synthetic": cramers_v(synthetic, a, b, enc),
        }
    report["fairness"]["original"] = fairness_report(injected)
    report["fairness"]["synthetic"] = fairness_report(synthetic)
    _write_json(report, out / "proxy_report.json")
    _write_resolved(cfg, out)
    return 0


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(cfg.output_dir, None)
    data = load_csv(cfg.data_path, cfg.schema)
    enc = fit_encoder(data)
    rows = []
    for weight in cfg.sweep_fairness_weights:
        for seed in cfg.sweep_seeds:
            _log(f"sweep: fairness_weight={weight} seed={seed}")
            model, _ = _fit_one(cfg, data, weight, seed)
            tag = f"w{weight:g}_s{seed}"
            save_model(model, out / f"model_{tag}.json")
            codes = sample(model, data.n_rows, derive_seed(seed, "sample"))
            synthetic = decode(codes, derive_seed(seed, "decode"))
            fair = fairness_report(synthetic)
            fid = fidelity_report(data, synthetic, enc, data.schema)
            rows.append(
                {
                    "fairness_weight": weight,
                    "seed": seed,
                    "disparate_impact": fair["disparate_impact"],
                    "parity_difference": fair["parity_difference"],
                    "max_tv": max(fid.tv.values()),
                }
            )
    summary_path = out / "sweep_summary.csv"
    with open(summary_path, "w", encoding="utf-8") as fh:
        fh.write("fairness_weight,seed,disparate_impact,parity_difference,max_tv\n")
        for r in rows:
            fh.write(
                f"{r['fairness_weight']!r},{r['seed']},{r['disparate_impact']!r},"
                f"{r['parity_difference']!r},{r['max_tv']!r}\n"
            )
    _emit(summary_path)

    selection = select_fairness_weight(rows)
    _write_json(selection, out / "sweep_selection.json")
    _write_resolved(cfg, out)
    return 0


def select_fairness_weight(rows, di_threshold: float = 0.8, tv_limit: float = 0.05) -> dict:
    """Pick the smallest weight whose median sampled DI clears the threshold.

    Candidates must also keep the median worst-column TV within the limit;
    if no weight qualifies, the one with the highest median DI among
    fidelity-respecting weights is reported (selected_meets_target=False).
    """
    weights = sorted({r["fairness_weight"] for r in rows})
    per_weight = []
    for w in weights:
        group = [r for r in rows if r["fairness_weight"] == w]
        dis = [r["disparate_impact"] for r in group if r["disparate_impact"] is not None]
        tvs = [r["max_tv"] for r in group]
        per_weight.append(
            {
                "fairness_weight": w,
                "median_di": float(np.median(dis)) if dis else None,
                "median_max_tv": float(np.median(tvs)),
                "runs": len(group),
            }
        )
    qualified = [
        p
        for p in per_weight
        if p["median_di"] is not None
        and p["median_di"] >= di_threshold
        and p["median_max_tv"] <= tv_limit
    ]
    if qualified:
        chosen = min(qualified, key=lambda p: p["fairness_weight"])
        meets = True
    else:
        usable = [p for p in per_weight if p["median_max_tv"] <= tv_limit and p["median_di"] is not None]
        pool = usable or [p for p in per_weight if p["median_di"] is not None]
        chosen = max(pool, key=lambda p: p["median_di"])
        meets = False
    return {
        "per_weight": per_weight,
        "selected_fairness_weight": chosen["fairness_weight"],
        "selected_median_di": chosen["median_di"],
        "selected_meets_target": meets,
        "di_threshold": di_threshold,
        "tv_limit": tv_limit,
    }


def build_parser() -> _Parser:
    parser = _Parser(prog="fairsynth", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument("--seed", type=int, default=None, help="master seed override")
        p.add_argument("--out", default=None, help="output directory override")

    p = sub.add_parser("fit", help="train a generator")
    add_common(p)
    p.add_argument("--lambda", dest="fairness_weight", type=float, default=None,
                   help="fairness weight override")
    p.set_defaults(fn=cmd_fit)

    p = sub.add_parser("sample", help="draw synthetic rows from a model file")
    p.add_argument("model", help="model file from fit")
    p.add_argument("n", type=int, help="number of rows")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output CSV path")
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("evaluate", help="fidelity + fairness reports")
    p.add_argument("original", help="original CSV")
    p.add_argument("synthetic", help="synthetic CSV")
    add_common(p)
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("audit", help="downstream-model audit")
    p.add_argument("original", help="original CSV")
    p.add_argument("model", help="model file from fit")
    add_common(p)
    p.add_argument("--reps", type=int, default=None, help="synthetic repetitions")
    p.set_defaults(fn=cmd_audit)

    p = sub.add_parser("proxy-experiment", help="proxy-attribute experiment")
    add_common(p)
    p.add_argument("--lambda", dest="fairness_weight", type=float, default=None)
    p.set_defaults(fn=cmd_proxy_experiment)

    p = sub.add_parser("sweep", help="fairness-weight sweep and selection")
    add_common(p)
    p.set_defaults(fn=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except ValidationError as exc:
        _log(f"error: {exc}")
        return 1
    except NumericError as exc:
        _log(f"numeric error: {exc}")
        return 2
    except FairsynthError as exc:
        _log(f"error: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
