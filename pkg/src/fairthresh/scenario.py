"""Declarative bias sweeps: train thresholds on biased data, score them on truth."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .bias import FAMILIES, SHIFT_KINDS, SHIFT_TARGETS, BiasSpec, ShiftSpec, apply_bias, check_beta, sample_dataset, unbiased_beta
from .errors import FairThreshError, InconsistentInput, UnsupportedCriterion, ValidationError
from .ingest import fico_table_path, load_profile_table, load_records, records_to_population, table_to_population
from .policy import (
    CRITERIA,
    DEFAULT_EPSILON,
    FairnessSpec,
    PolicyEvaluation,
    ThresholdPair,
    grid_oracle,
    solve_fair,
    utility,
    utility_contour,
)
from .population import Population, gaussian_population
from .sensitivity import SensitivityReport, sensitivity_feature_bias, sensitivity_label_bias

SOURCES = ("synthetic", "table", "records")
DEFAULT_UTILITY_RATIO = 10.0
RESULT_COLUMNS = (
    "spec", "beta", "theta_a", "theta_b", "sel_a", "sel_b", "gap_dp", "gap_tpr", "gap_fpr",
    "util_a", "util_b", "util_total", "solver", "residual",
)
ORACLE_COLUMNS = ("oracle_theta_a", "oracle_theta_b")
SENSITIVITY_COLUMNS = ("criterion", "group", "analytic", "fd", "rel_err")


def default_betas(family: str) -> tuple[float, ...]:
    """``1.0, 0.95, ..., 0.5`` (``0.0, ..., 0.5`` for overestimation)."""
    steps = np.round(np.arange(11) * 0.05, 10)
    if family == "overestimate_a":
        return tuple(float(v) for v in steps)
    return tuple(float(v) for v in np.round(1.0 - steps, 10))


@dataclass(frozen=True)
class Scenario:
    name: str = "scenario"
    source: str = "synthetic"
    path: str | None = None
    bins: int | None = None
    # synthetic population; scalars are shared, two-element lists are (a, b)
    n_a: float = 0.8
    alpha_a: float = 0.8
    alpha_b: float = 0.3
    mean_qualified: Any = 70.0
    mean_unqualified: Any = 50.0
    std: Any = 10.0
    u_minus_over_u_plus: float | None = None
    specs: tuple[str, ...] = ("DP", "TPR", "FPR", "EO")
    epsilon: float = DEFAULT_EPSILON
    family: str = "underestimate_b"
    betas: tuple[float, ...] | None = None
    shift_kind: str = "mean_drop"
    shift_amount: float = 1.0
    shift_target: str = "qualified"
    shift_slope: float = 0.0
    shift_anchor: float = 0.0
    sample_size: int | None = None
    seed: int = 0
    oracle: bool = False
    grid_step: float | None = None
    results: str = "results.csv"
    contour: bool = False
    contour_lattice: int = 101
    sensitivity: bool = False
    base_dir: Path = field(default=Path("."), compare=False, repr=False)

    def __post_init__(self):
        specs = self.specs
        if isinstance(specs, str):
            specs = [s for s in specs.replace(",", " ").split() if s]
        object.__setattr__(self, "specs", tuple(str(s).upper() for s in specs))
        if self.betas is None:
            object.__setattr__(self, "betas", default_betas(self.family))
        else:
            object.__setattr__(self, "betas", tuple(float(b) for b in np.atleast_1d(self.betas)))

    @property
    def shift(self) -> ShiftSpec:
        return ShiftSpec(
            self.shift_kind, self.shift_amount, slope=self.shift_slope, anchor=self.shift_anchor, target=self.shift_target
        )

    def fairness_specs(self) -> list[FairnessSpec]:
        """MU first, then the requested specs in order, without repeats."""
        out = [FairnessSpec("MU", 0.0)]
        for crit in self.specs:
            spec = FairnessSpec(crit, 0.0 if crit == "MU" else self.epsilon)
            if spec not in out:
                out.append(spec)
        return out

    def bias_spec(self, beta: float) -> BiasSpec:
        shift = self.shift if self.family == "feature_shift_b" else None
        return BiasSpec(self.family, beta, shift, self.seed)

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p


def validate_scenario(s: Scenario) -> None:
    problems = []
    if s.source not in SOURCES:
        problems.append(f"source must be one of {SOURCES}, got {s.source!r}")
    elif s.source != "synthetic" and not s.path:
        problems.append(f"source {s.source!r} needs a path")
    if s.family not in FAMILIES:
        problems.append(f"family must be one of {FAMILIES}, got {s.family!r}")
    if not s.specs:
        problems.append("at least one fairness spec is required")
    for crit in s.specs:
        if crit not in CRITERIA:
            problems.append(f"unknown fairness spec {crit!r}")
    if not s.epsilon >= 0:
        problems.append("epsilon must be nonnegative")
    if s.family in FAMILIES:
        for beta in s.betas:
            try:
                check_beta(s.family, beta)
            except InconsistentInput as exc:
                problems.append(str(exc))
    diffs = np.diff(s.betas)
    if diffs.size and not (np.all(diffs > 0) or np.all(diffs < 0)):
        problems.append("betas must be strictly monotone")
    if s.family == "feature_shift_b":
        if s.shift_kind not in SHIFT_KINDS:
            problems.append(f"shift_kind must be one of {SHIFT_KINDS}")
        if s.shift_target not in SHIFT_TARGETS:
            problems.append(f"shift_target must be one of {SHIFT_TARGETS}")
    if s.sample_size is not None and s.sample_size < 1:
        problems.append("sample_size must be positive")
    if s.grid_step is not None and not s.grid_step > 0:
        problems.append("grid_step must be positive")
    if s.contour_lattice < 2:
        problems.append("contour_lattice must be at least 2")
    if problems:
        raise ValidationError("; ".join(problems))


def load_scenario(path) -> Scenario:
    """Read a flat YAML scenario; relative paths resolve against its directory."""
    path = Path(path)
    with open(path) as fh:
        raw = yaml.safe_load(fh) or {}
    if not isinstance(raw, dict):
        raise ValidationError(f"{path}: expected a mapping of keys to values")
    known = {f.name for f in fields(Scenario)} - {"base_dir"}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ValidationError(f"{path}: unknown keys {', '.join(unknown)}")
    nested = [k for k, v in raw.items() if isinstance(v, dict)]
    if nested:
        raise ValidationError(f"{path}: nested values are not allowed ({', '.join(nested)})")
    try:
        s = Scenario(**raw, base_dir=path.parent)
    except (TypeError, ValueError, FairThreshError) as exc:
        raise ValidationError(f"{path}: {exc}") from exc
    validate_scenario(s)
    return s


def build_population(s: Scenario) -> Population:
    ratio = s.u_minus_over_u_plus
    if s.source == "synthetic":
        return gaussian_population(
            s.n_a, s.alpha_a, s.alpha_b, _pair(s.mean_qualified), _pair(s.mean_unqualified), _pair(s.std),
            u_plus=1.0, u_minus=DEFAULT_UTILITY_RATIO if ratio is None else ratio,
        )
    if s.source == "table":
        # "fico" names the bundled credit-score table
        path = fico_table_path() if s.path == "fico" else s.resolve(s.path)
        return table_to_population(load_profile_table(path), 1.0, ratio)
    records = load_records(s.resolve(s.path))
    return records_to_population(records, s.bins, 1.0, DEFAULT_UTILITY_RATIO if ratio is None else ratio)


def _pair(v):
    return tuple(v) if isinstance(v, (list, tuple)) else v


@dataclass(frozen=True)
class SweepRow:
    spec: FairnessSpec
    beta: float
    trained: ThresholdPair | None
    truth: PolicyEvaluation | None
    biased: PolicyEvaluation | None
    error: str | None = None
    oracle: ThresholdPair | None = None


@dataclass(frozen=True)
class SweepResult:
    scenario: Scenario
    rows: tuple[SweepRow, ...]
    u_plus: float = 1.0

    def select(self, label: str) -> list[SweepRow]:
        return [r for r in self.rows if r.spec.label == label or r.spec.criterion == label.upper()]

    def series(self, label: str, quantity) -> tuple[np.ndarray, np.ndarray]:
        """``(beta, quantity(row))`` for the successful rows of one spec."""
        rows = [r for r in self.select(label) if r.error is None]
        return np.array([r.beta for r in rows]), np.array([quantity(r) for r in rows], dtype=float)

    @property
    def all_failed(self) -> bool:
        return bool(self.rows) and all(r.error is not None for r in self.rows)


def _training_population(s: Scenario, truth: Population, beta: float) -> Population:
    bp = apply_bias(truth, s.bias_spec(beta))
    if s.sample_size is None:
        return bp.biased
    records = sample_dataset(bp, s.sample_size, seed=s.seed)
    return records_to_population(records, s.bins, truth.u_plus, truth.u_minus)


def run_scenario(s: Scenario, truth: Population | None = None) -> SweepResult:
    """Solve every spec on biased data at each beta and evaluate on truth.

    Solver failures are recorded on their row and the sweep continues.
    Rows are ordered by spec, then by beta as listed in the scenario.
    """
    validate_scenario(s)
    truth = build_population(s) if truth is None else truth
    specs = s.fairness_specs()
    cells: dict[tuple[int, int], SweepRow] = {}
    for j, beta in enumerate(s.betas):
        try:
            train = _training_population(s, truth, beta)
        except FairThreshError as exc:
            for i, spec in enumerate(specs):
                cells[i, j] = SweepRow(spec, beta, None, None, None, _describe(exc))
            continue
        for i, spec in enumerate(specs):
            cells[i, j] = _solve_cell(s, spec, beta, train, truth)
    rows = tuple(cells[i, j] for i in range(len(specs)) for j in range(len(s.betas)))
    return SweepResult(s, rows, truth.u_plus)


def _describe(exc: Exception) -> str:
    return f"{type(exc).__name__}: {exc}"


def _solve_cell(s: Scenario, spec: FairnessSpec, beta: float, train: Population, truth: Population) -> SweepRow:
    try:
        pair = solve_fair(train, spec, s.grid_step)
    except FairThreshError as exc:
        return SweepRow(spec, beta, None, None, None, _describe(exc))
    oracle = None
    if s.oracle:
        try:
            oracle = grid_oracle(train, spec, s.grid_step)
        except FairThreshError:
            oracle = None
    return SweepRow(spec, beta, pair, utility(truth, pair), utility(train, pair), None, oracle)


def bias_level(family: str, beta) -> np.ndarray:
    """Distance of ``beta`` from the family's unbiased value."""
    return np.abs(np.asarray(beta, float) - unbiased_beta(family))


def fit_violation_trend(sr: SweepResult, criterion: str, spec: str | None = None) -> float:
    """OLS slope of the truth-side ``criterion`` gap against bias level.

    The gap is read from the rows trained under ``spec`` (by default the spec
    of the same criterion).
    """
    criterion = criterion.upper()
    if criterion not in ("DP", "TPR", "FPR", "EO"):
        raise UnsupportedCriterion(f"no gap is defined for {criterion}")
    beta, gap = sr.series(spec or criterion, lambda r: r.truth.fairness_gap[criterion])
    if beta.size < 3:
        raise ValidationError(f"need at least 3 sweep points to fit a trend, got {beta.size}")
    level = bias_level(sr.scenario.family, beta)
    if np.ptp(level) == 0:
        raise ValidationError("bias levels do not vary")
    return float(np.polyfit(level, gap, 1)[0])


# --- output ---------------------------------------------------------------------


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.12g}"


def result_rows(sr: SweepResult):
    # utilities are reported in units of u+
    scale = sr.u_plus
    for r in sr.rows:
        if r.error is not None:
            row = [r.spec.label, r.beta] + [None] * 10 + [f"error: {r.error}", None]
        else:
            t, pair = r.truth, r.trained
            row = [
                r.spec.label, r.beta, pair.theta_a, pair.theta_b, t.selection_rate.a, t.selection_rate.b,
                t.fairness_gap["DP"], t.fairness_gap["TPR"], t.fairness_gap["FPR"],
                t.utility.a / scale, t.utility.b / scale, t.total_utility / scale,
                pair.solver + ("+" + "+".join(pair.flags) if pair.flags else ""), pair.stationarity_residual,
            ]
        if sr.scenario.oracle:
            row += [r.oracle.theta_a, r.oracle.theta_b] if r.oracle is not None else [None, None]
        yield [_fmt(v) for v in row]


def _write_csv(path: Path, header, rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def write_results(sr: SweepResult, path) -> Path:
    header = RESULT_COLUMNS + (ORACLE_COLUMNS if sr.scenario.oracle else ())
    return _write_csv(Path(path), header, result_rows(sr))


def write_contour(pop: Population, out_dir, lattice: int = 101, epsilon: float = DEFAULT_EPSILON) -> list[Path]:
    """Utility over selection-rate pairs plus one file per constraint curve."""
    out_dir = Path(out_dir)
    c = utility_contour(pop, lattice, epsilon)
    rows = ((_fmt(sa), _fmt(sb), _fmt(c.utility[i, j])) for i, sa in enumerate(c.rates) for j, sb in enumerate(c.rates))
    paths = [_write_csv(out_dir / "contour.csv", ("s_a", "s_b", "utility"), rows)]
    for crit, pts in c.curves.items():
        paths.append(
            _write_csv(out_dir / f"contour_{crit.lower()}.csv", ("s_a", "s_b"), ([_fmt(a), _fmt(b)] for a, b in pts))
        )
    return paths


def sensitivity_reports(s: Scenario, pop: Population) -> list[SensitivityReport]:
    if s.family == "underestimate_b":
        crits = [c for c in ("DP", "TPR") if c in s.specs] or ["DP", "TPR"]
        return [sensitivity_label_bias(pop, c) for c in crits]
    if s.family == "feature_shift_b":
        crits = [c for c in ("TPR", "FPR") if c in s.specs] or ["TPR", "FPR"]
        return [sensitivity_feature_bias(pop, c, s.shift) for c in crits]
    raise UnsupportedCriterion(f"no closed-form sensitivities for {s.family}")


def write_sensitivity(reports, path) -> Path:
    rows = ([_fmt(v) for v in row] for rep in reports for row in rep.rows())
    return _write_csv(Path(path), SENSITIVITY_COLUMNS, rows)


def emit_outputs(
    sr: SweepResult | None, out_dir, contour_pop: Population | None = None, sensitivity=None
) -> list[Path]:
    """Write the results table and any requested contour and sensitivity files."""
    out_dir = Path(out_dir)
    paths = []
    if sr is not None:
        paths.append(write_results(sr, out_dir / sr.scenario.results))
    if contour_pop is not None:
        s = sr.scenario if sr is not None else Scenario()
        paths += write_contour(contour_pop, out_dir, s.contour_lattice, s.epsilon)
    if sensitivity:
        paths.append(write_sensitivity(sensitivity, out_dir / "sensitivity.csv"))
    return paths


def with_overrides(s: Scenario, **changes) -> Scenario:
    changes = {k: v for k, v in changes.items() if v is not None}
    return replace(s, **changes) if changes else s


__all__ = [
    "Scenario",
    "SweepRow",
    "SweepResult",
    "load_scenario",
    "validate_scenario",
    "build_population",
    "run_scenario",
    "fit_violation_trend",
    "bias_level",
    "emit_outputs",
    "write_results",
    "write_contour",
    "write_sensitivity",
    "sensitivity_reports",
    "default_betas",
]
