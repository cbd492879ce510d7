"""Command-line entry point: ``glmsel table1 | asymptotics | fit``."""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .estimation import Dataset, fit
from .family import FamilyKind, make_family
from .harness import (
    DEFAULT_SEED,
    PRESETS,
    AsymptoticsConfig,
    load_config,
    preset,
    rows_to_csv,
    run_asymptotics,
    run_experiment,
    seed_from_env,
)
from .asymptotics import SCENARIOS
from .numerics import SingularSystemError, solve_psd
from .selection import CriterionSpec, Scale, best_subset


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _criteria(text: str, scale: str) -> tuple[CriterionSpec, ...]:
    out = []
    for item in text.split(","):
        item = item.strip()
        if item:
            out.append(CriterionSpec.parse(item if ":" in item else f"{item}:{scale}"))
    return tuple(out)


def _emit(text: str, out):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_table1(args) -> int:
    if args.config:
        base = load_config(args.config)
    else:
        base = preset(args.model, base_seed=seed_from_env(DEFAULT_SEED))
    overrides = {}
    if args.reps is not None:
        overrides["reps"] = args.reps
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.criterion is not None:
        overrides["criteria"] = _criteria(args.criterion, args.scale)
    if args.design is not None:
        overrides["covariate_law"] = args.design
        if args.design == "uniform01":
            overrides["bound"] = 1.0
    if args.seed is not None:
        overrides["base_seed"] = seed_from_env(args.seed)
    sizes = _ints(args.n) if args.n else [base.n]
    rows = []
    for n in sizes:
        rows.extend(run_experiment(replace(base, n=n, **overrides)))
    _emit(rows_to_csv(rows), args.out)
    return 0


def cmd_asymptotics(args) -> int:
    cfg = AsymptoticsConfig(
        scenario=args.scenario,
        n_grid=tuple(_ints(args.grid)),
        reps=args.reps,
        base_seed=seed_from_env(args.seed if args.seed is not None else DEFAULT_SEED),
        workers=args.workers,
    )
    summary = run_asymptotics(cfg, args.out, args.summary)
    if args.summary is None:
        sys.stdout.write(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return 0 if summary["pass"] else 1


def read_csv_dataset(path) -> tuple[Dataset, list[str]]:
    """CSV with a header ``y, x1, ..., xp``; an optional ``w`` column holds weights."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        data = np.array([[float(v) for v in row] for row in reader if row], dtype=float)
    if "y" not in header:
        raise ValueError(f"{path}: header needs a 'y' column")
    if data.size == 0:
        raise ValueError(f"{path}: no data rows")
    xcols = [k for k, h in enumerate(header) if h not in ("y", "w")]
    if not xcols:
        raise ValueError(f"{path}: no covariate columns")
    w = data[:, header.index("w")] if "w" in header else None
    return Dataset(data[:, xcols], data[:, header.index("y")], w), [header[k] for k in xcols]


def cmd_fit(args) -> int:
    fam = make_family(args.family, args.theta if args.family == FamilyKind.NEGBIN.value else None)
    ds, names = read_csv_dataset(args.data)
    cols = list(range(ds.p))
    if args.select:
        spec = CriterionSpec.parse(args.select if ":" in args.select else f"{args.select}:{Scale.TOTAL.value}")
        best, _ = best_subset(spec, ds, fam)
        cols = best.columns
        print(f"selected by {spec.name}: {', '.join(names[j] for j in cols)} (criterion {best.criterion_value:.6f})")
    f = fit(ds.columns(cols), fam)
    try:
        cov = np.column_stack([solve_psd(f.fisher, e) for e in np.eye(len(cols))])
        se = np.sqrt(np.maximum(np.diag(cov), 0.0))
    except SingularSystemError:
        se = np.full(len(cols), np.nan)
    print(f"family: {fam}  n: {ds.n}  converged: {f.converged}  iterations: {f.iterations}")
    print(f"loglik: {f.loglik:.6f}  score sup-norm: {f.score_norm:.3e}")
    if f.separation_flag:
        print("warning: the responses are separated; the MLE does not exist")
    width = max(len(names[j]) for j in cols)
    print(f"{'':{width}}  {'estimate':>12}  {'std.err':>12}")
    for k, j in enumerate(cols):
        print(f"{names[j]:{width}}  {f.beta_hat[k]:12.6f}  {se[k]:12.6f}")
    return 0 if f.converged else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="glmsel", description="Weighted GLM fitting and best-subset selection studies.")
    sub = ap.add_subparsers(dest="command", required=True)

    t = sub.add_parser("table1", help="selection rates over replications")
    t.add_argument("--model", choices=PRESETS, default="nbr")
    t.add_argument("--config", help="flat key = value config file (overrides --model)")
    t.add_argument("--n", help="sample size, or a comma list")
    t.add_argument("--reps", type=int)
    t.add_argument("--criterion", help="comma list, e.g. bic,aic or bic:per-observation")
    t.add_argument("--scale", choices=[s.value for s in Scale], default=Scale.TOTAL.value)
    t.add_argument("--design", choices=["bounded", "uniform01"], help="covariate law")
    t.add_argument("--seed", type=int, help="base seed ($GLMSEL_SEED takes precedence)")
    t.add_argument("--workers", type=int)
    t.add_argument("--out", help="CSV path (default stdout)")
    t.set_defaults(func=cmd_table1)

    a = sub.add_parser("asymptotics", help="LIL ratios and likelihood gaps")
    a.add_argument("--scenario", choices=sorted(SCENARIOS), default="gaussian-iid")
    a.add_argument("--grid", default="200,500,1000,2000,5000")
    a.add_argument("--reps", type=int, default=50)
    a.add_argument("--seed", type=int)
    a.add_argument("--workers", type=int, default=1)
    a.add_argument("--out", help="per-rep CSV path")
    a.add_argument("--summary", help="summary JSON path (default stdout)")
    a.set_defaults(func=cmd_asymptotics)

    f = sub.add_parser("fit", help="fit a GLM to a CSV file")
    f.add_argument("--family", choices=[k.value for k in FamilyKind], required=True)
    f.add_argument("--theta", type=float, default=10.0, help="negbin size parameter")
    f.add_argument("--data", required=True)
    f.add_argument("--select", help="run best-subset selection first (aic, bic, scc)")
    f.set_defaults(func=cmd_fit)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as e:
        print(f"glmsel: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
