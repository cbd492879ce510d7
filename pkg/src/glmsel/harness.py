"""Replication studies: selection experiments and the asymptotics suite.

Replication ``r`` of an experiment draws everything from
``RngStream(base_seed, r)``, so results do not depend on the number of
workers or on completion order. Rows are aggregated in replication order.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .asymptotics import SCENARIOS, RepDiagnostics, _check_grid, run_replication, summarize
from .estimation import Dataset, SolverOptions
from .family import FamilyModel, make_family
from .numerics import RngStream
from .selection import CriterionSpec, Label, columns_to_mask, fit_candidates, select
from .simulate import (
    CovariateLaw,
    DesignSpec,
    ErrorProcessSpec,
    gen_dependent_lm,
    gen_design,
    gen_glm_responses,
)

SEED_ENV = "GLMSEL_SEED"
DEFAULT_SEED = 20240601
PRESETS = ("nbr", "probit", "dep-lm-mr2", "dep-lm-mr3")
MODELS = PRESETS + ("custom",)
PRESET_BETA0 = (0.5, 0.5, 0.5, 0.0, 0.0, 0.0)
MA_COEFFS = {"dep-lm-mr2": (0.5, 0.3), "dep-lm-mr3": (0.5, 0.3, 0.2)}

# Unit-variance bounded covariates: U(-sqrt 3, sqrt 3).
CENTERED_BOUND = math.sqrt(3.0)

ROW_FIELDS = ("model", "method", "sample_size", "correct_rate", "overfit_rate", "underfit_rate", "mse", "failed_fits")
ASYMPTOTICS_FIELDS = ("rep_id", "n", "ratio", "gap_correct", "gap_wrong_per_n")


@dataclass(frozen=True)
class ExperimentConfig:
    """One cell family of the selection study.

    Presets fill ``family``, ``error`` and ``beta0``; ``custom`` takes them
    as given. Independent responses are drawn when ``error`` is ``None``,
    otherwise the dependent linear model ``y = X beta0 + eps``.

    The default design has every column iid U(-sqrt 3, sqrt 3) and the
    criteria are on the total scale; ``covariate_law="uniform01"`` and
    per-observation criteria give the other reading of the protocol.
    """

    model: str = "custom"
    n: int = 300
    reps: int = 500
    beta0: tuple[float, ...] = PRESET_BETA0
    theta: float = 10.0
    criteria: tuple[CriterionSpec, ...] = (CriterionSpec("bic"), CriterionSpec("aic"))
    base_seed: int = DEFAULT_SEED
    workers: int = 1
    family: str = "gaussian"
    error: ErrorProcessSpec | None = None
    covariate_law: CovariateLaw = CovariateLaw.BOUNDED
    bound: float = CENTERED_BOUND

    def __post_init__(self):
        object.__setattr__(self, "beta0", tuple(float(b) for b in self.beta0))
        object.__setattr__(self, "criteria", tuple(self.criteria))
        object.__setattr__(self, "covariate_law", CovariateLaw(self.covariate_law))
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; expected one of {', '.join(MODELS)}")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if not 0 <= self.base_seed < 2**64:
            raise ValueError("base_seed must be a 64-bit unsigned integer")
        if not self.criteria:
            raise ValueError("at least one criterion is required")
        if not any(self.beta0):
            raise ValueError("beta0 needs at least one nonzero coefficient")
        if self.error is not None and self.family != "gaussian":
            raise ValueError("dependent errors are only supported for the gaussian family")
        self.fam  # validates family/theta

    @property
    def fam(self) -> FamilyModel:
        return make_family(self.family, self.theta if self.family == "negbin" else None)

    @property
    def p(self) -> int:
        return len(self.beta0)

    @property
    def alpha0(self) -> int:
        return columns_to_mask(np.flatnonzero(self.beta0))

    def design(self, stream: RngStream) -> DesignSpec:
        p_signal = int(np.count_nonzero(self.beta0))
        return DesignSpec(self.n, p_signal, self.p - p_signal, self.covariate_law, stream, self.bound)


def preset(name: str, **overrides) -> ExperimentConfig:
    """A named configuration, with any field overridden."""
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; expected one of {', '.join(PRESETS)}")
    base = {"model": name, "beta0": PRESET_BETA0, "theta": 10.0}
    if name == "nbr":
        base["family"] = "negbin"
    elif name == "probit":
        base["family"] = "probit"
    else:
        base["family"] = "gaussian"
        base["error"] = ErrorProcessSpec("ma", ma_coeffs=MA_COEFFS[name])
    base.update(overrides)
    return ExperimentConfig(**base)


def generate(cfg: ExperimentConfig, rep_id: int) -> Dataset:
    """Design and responses of replication ``rep_id``."""
    stream = RngStream(cfg.base_seed, rep_id)
    X = gen_design(cfg.design(stream.spawn(0)))
    if cfg.error is None:
        y = gen_glm_responses(X, cfg.fam, cfg.beta0, stream.spawn(1))
    else:
        y = gen_dependent_lm(X, cfg.beta0, cfg.error, stream.spawn(1))
    return Dataset(X, y)


@dataclass(frozen=True)
class RepOutcome:
    """Result of one replication under one criterion."""

    label: Label
    beta_error: float
    alpha: int
    failed_fits: int


def run_rep(cfg: ExperimentConfig, rep_id: int, opts: SolverOptions | None = None) -> list[RepOutcome]:
    """Fit all sub-models once and select under each criterion of ``cfg``."""
    ds = generate(cfg, rep_id)
    cands = fit_candidates(ds, cfg.fam, opts)
    out = []
    for spec in cfg.criteria:
        o = select(spec, ds, cfg.fam, cfg.alpha0, cfg.beta0, cands)
        out.append(RepOutcome(o.label, o.beta_full_error, o.chosen.alpha, o.failed_fits))
    return out


@dataclass(frozen=True)
class TableRow:
    model: str
    method: str
    sample_size: int
    correct_rate: float
    overfit_rate: float
    underfit_rate: float
    mse: float
    failed_fits: int = 0

    def __post_init__(self):
        total = self.correct_rate + self.overfit_rate + self.underfit_rate
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"rates sum to {total!r}, not 1")

    def csv_fields(self) -> list[str]:
        return [
            self.model,
            self.method,
            str(self.sample_size),
            f"{self.correct_rate:.6f}",
            f"{self.overfit_rate:.6f}",
            f"{self.underfit_rate:.6f}",
            f"{self.mse:.6f}",
            str(self.failed_fits),
        ]


def aggregate(cfg: ExperimentConfig, outcomes: list[list[RepOutcome]]) -> list[TableRow]:
    """One row per criterion from per-replication outcomes (in rep order)."""
    rows = []
    reps = len(outcomes)
    for k, spec in enumerate(cfg.criteria):
        col = [o[k] for o in outcomes]
        counts = {lab: sum(o.label is lab for o in col) for lab in Label}
        rows.append(
            TableRow(
                model=cfg.model,
                method=spec.name,
                sample_size=cfg.n,
                correct_rate=counts[Label.CORRECT] / reps,
                overfit_rate=counts[Label.OVERFIT] / reps,
                underfit_rate=counts[Label.UNDERFIT] / reps,
                mse=float(np.mean([o.beta_error for o in col])),
                failed_fits=sum(o.failed_fits for o in col),
            )
        )
    return rows


def _map_reps(fn, cfg, rep_ids, workers):
    if workers == 1 or len(rep_ids) == 1:
        return [fn(cfg, r) for r in rep_ids]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map() yields in submission order whatever the completion order
        return list(pool.map(fn, [cfg] * len(rep_ids), rep_ids, chunksize=max(1, len(rep_ids) // (4 * workers))))


def run_outcomes(cfg: ExperimentConfig) -> list[list[RepOutcome]]:
    return _map_reps(run_rep, cfg, list(range(cfg.reps)), cfg.workers)


def run_experiment(cfg: ExperimentConfig) -> list[TableRow]:
    """Selection rates and coefficient error over ``cfg.reps`` replications."""
    return aggregate(cfg, run_outcomes(cfg))


def rows_to_csv(rows: list[TableRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ROW_FIELDS)
    for r in rows:
        w.writerow(r.csv_fields())
    return buf.getvalue()


def _write(path, text: str):
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as e:
        raise OSError(f"cannot write {path}: {e.strerror or e}") from e


# -- asymptotics ---------------------------------------------------------------


@dataclass(frozen=True)
class AsymptoticsConfig:
    scenario: str = "gaussian-iid"
    n_grid: tuple[int, ...] = (200, 500, 1000, 2000, 5000)
    reps: int = 50
    base_seed: int = DEFAULT_SEED
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}; expected one of {', '.join(SCENARIOS)}")
        _check_grid(self.n_grid)
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


def _asymptotics_rep(cfg: AsymptoticsConfig, rep_id: int) -> RepDiagnostics:
    return run_replication(SCENARIOS[cfg.scenario], cfg.n_grid, RngStream(cfg.base_seed, rep_id))


def run_asymptotics_reps(cfg: AsymptoticsConfig) -> list[RepDiagnostics]:
    return _map_reps(_asymptotics_rep, cfg, list(range(cfg.reps)), cfg.workers)


def diagnostics_to_csv(reps: list[RepDiagnostics]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ASYMPTOTICS_FIELDS)
    for rep in reps:
        for rep_id, n, ratio, gc, gw in rep.rows():
            w.writerow([rep_id, n, f"{ratio:.6f}", f"{gc:.6f}", f"{gw:.6f}"])
    return buf.getvalue()


def run_asymptotics(cfg: AsymptoticsConfig, out_csv=None, summary_json=None) -> dict:
    """Run the suite, write the per-rep CSV and summary JSON, return the summary."""
    reps = run_asymptotics_reps(cfg)
    summary = {"scenario": cfg.scenario, "base_seed": cfg.base_seed, **summarize(reps)}
    if out_csv is not None:
        _write(out_csv, diagnostics_to_csv(reps))
    if summary_json is not None:
        _write(summary_json, json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


# -- configuration -------------------------------------------------------------


def seed_from_env(default: int) -> int:
    """``$GLMSEL_SEED`` if set, else ``default``."""
    raw = os.environ.get(SEED_ENV)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw, 0)
    except ValueError:
        raise ValueError(f"{SEED_ENV}={raw!r} is not an integer") from None


def parse_kv(text: str) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ValueError(f"line {lineno}: expected key = value, got {line!r}")
        out[key.strip()] = value.strip()
    return out


def _floats(v: str) -> tuple[float, ...]:
    return tuple(float(x) for x in v.split(",") if x.strip())


def config_from_mapping(kv: dict[str, str]) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from string fields.

    Keys mirror the dataclass fields, plus ``criteria`` as a comma list
    (``bic,aic:per-observation``), ``scc_epsilon``, ``error`` (``iid``, ``ar1``
    or ``ma``), ``ar_coeff`` and ``ma_coeffs``. The ``GLMSEL_SEED``
    environment variable overrides ``base_seed``.
    """
    kv = dict(kv)
    fields = {}
    model = kv.pop("model", "nbr")
    for key, conv in (("n", int), ("reps", int), ("workers", int), ("theta", float), ("bound", float)):
        if key in kv:
            fields[key] = conv(kv.pop(key))
    if "base_seed" in kv:
        fields["base_seed"] = int(kv.pop("base_seed"), 0)
    if "beta0" in kv:
        fields["beta0"] = _floats(kv.pop("beta0"))
    if "family" in kv:
        fields["family"] = kv.pop("family")
    if "covariate_law" in kv:
        fields["covariate_law"] = kv.pop("covariate_law")
    eps = float(kv.pop("scc_epsilon", "1.0"))
    if "criteria" in kv:
        fields["criteria"] = tuple(CriterionSpec.parse(c, eps) for c in kv.pop("criteria").split(",") if c.strip())
    err_kind = kv.pop("error", None)
    ar = float(kv.pop("ar_coeff", "0"))
    ma = _floats(kv.pop("ma_coeffs", ""))
    if err_kind is not None:
        fields["error"] = None if err_kind == "none" else ErrorProcessSpec(err_kind, ar_coeff=ar, ma_coeffs=ma)
    elif ma:
        fields["error"] = ErrorProcessSpec("ma", ma_coeffs=ma)
    if kv:
        raise ValueError(f"unknown config keys: {', '.join(sorted(kv))}")
    cfg = preset(model, **fields) if model in PRESETS else ExperimentConfig(model=model, **fields)
    return replace(cfg, base_seed=seed_from_env(cfg.base_seed))


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise OSError(f"cannot read {path}: {e.strerror or e}") from e
    return config_from_mapping(parse_kv(text))


def config_to_text(cfg: ExperimentConfig) -> str:
    """Inverse of :func:`load_config` (criteria with a custom penalty excluded)."""
    lines = [
        f"model = {cfg.model}",
        f"n = {cfg.n}",
        f"reps = {cfg.reps}",
        "beta0 = " + ",".join(repr(b) for b in cfg.beta0),
        f"theta = {cfg.theta!r}",
        "criteria = " + ",".join(f"{c.kind.value}:{c.scale.value}" for c in cfg.criteria),
        f"scc_epsilon = {cfg.criteria[0].scc_epsilon!r}",
        f"base_seed = {cfg.base_seed}",
        f"workers = {cfg.workers}",
        f"family = {cfg.family}",
        f"covariate_law = {cfg.covariate_law.value}",
        f"bound = {cfg.bound!r}",
    ]
    if cfg.error is None:
        lines.append("error = none")
    else:
        lines.append(f"error = {cfg.error.kind.value}")
        lines.append(f"ar_coeff = {cfg.error.ar_coeff!r}")
        lines.append("ma_coeffs = " + ",".join(repr(c) for c in cfg.error.ma_coeffs))
    return "\n".join(lines) + "\n"


__all__ = [
    "AsymptoticsConfig",
    "ExperimentConfig",
    "RepOutcome",
    "TableRow",
    "aggregate",
    "config_from_mapping",
    "config_to_text",
    "diagnostics_to_csv",
    "generate",
    "load_config",
    "parse_kv",
    "preset",
    "rows_to_csv",
    "run_asymptotics",
    "run_experiment",
    "run_rep",
    "seed_from_env",
]
