"""Loading profile tables and scored records into populations.

Profile table CSV::

    # n_a = 0.88
    # n_b = 0.12
    # u_minus_over_u_plus = 10
    score,gamma_a,gamma_b,density_a,density_b
    300.0,0.0146,0.0033,...

Metadata may instead live in a sidecar ``key=value`` file.  Record CSVs have
the header ``group,score,label`` with groups ``a``/``b`` and labels 0/1.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .distributions import Empirical
from .errors import InsufficientData, ParseError, RenormalizationWarning, ValidationError
from .population import Population, check_mlr, population_from_profile

TABLE_COLUMNS = ("score", "gamma_a", "gamma_b", "density_a", "density_b")
RECORD_COLUMNS = ("group", "score", "label")
MAX_BINS = 200
DENSITY_TOLERANCE = 1e-3


@dataclass(frozen=True)
class ProfileTable:
    score: np.ndarray
    gamma_a: np.ndarray
    gamma_b: np.ndarray
    density_a: np.ndarray
    density_b: np.ndarray
    n_a: float
    n_b: float
    u_minus_over_u_plus: float | None = None
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        cols = {c: np.asarray(getattr(self, c), dtype=float) for c in TABLE_COLUMNS}
        size = cols["score"].size
        for name, v in cols.items():
            if v.ndim != 1 or v.size != size:
                raise ValidationError(f"column {name!r} must be 1-D with {size} rows")
            bad = np.flatnonzero(~np.isfinite(v))
            if bad.size:
                raise ValidationError(f"non-finite value in column {name!r} at row {bad[0] + 1}")
        if size < 2:
            raise ValidationError("profile table needs at least 2 rows")
        if np.any(np.diff(cols["score"]) <= 0):
            i = int(np.flatnonzero(np.diff(cols["score"]) <= 0)[0])
            raise ValidationError(f"scores must be strictly ascending (row {i + 2})")
        for name in ("gamma_a", "gamma_b"):
            bad = np.flatnonzero((cols[name] < 0) | (cols[name] > 1))
            if bad.size:
                i = int(bad[0])
                raise ValidationError(
                    f"probability {cols[name][i]:g} outside [0, 1] at row {i + 1}, column {name!r}"
                )
        for name in ("density_a", "density_b"):
            bad = np.flatnonzero(cols[name] < 0)
            if bad.size:
                raise ValidationError(f"negative density at row {bad[0] + 1}, column {name!r}")
            mass = float(np.trapezoid(cols[name], cols["score"]))
            if not mass > 0:
                raise ValidationError(f"column {name!r} has zero mass")
            if abs(mass - 1.0) > DENSITY_TOLERANCE:
                warnings.warn(
                    f"{name} integrates to {mass:.6g}; renormalising", RenormalizationWarning, stacklevel=3
                )
            cols[name] = cols[name] / mass
        if not (0 <= self.n_a <= 1 and 0 <= self.n_b <= 1) or abs(self.n_a + self.n_b - 1) > 1e-6:
            raise ValidationError(f"group fractions must sum to 1, got n_a={self.n_a}, n_b={self.n_b}")
        for name, v in cols.items():
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    def alpha(self, g: str) -> float:
        gam, dens = getattr(self, f"gamma_{g}"), getattr(self, f"density_{g}")
        return float(np.trapezoid(gam * dens, self.score))

    @property
    def alpha_a(self) -> float:
        return self.alpha("a")

    @property
    def alpha_b(self) -> float:
        return self.alpha("b")


def _parse_metadata_lines(lines) -> dict:
    meta = {}
    for raw in lines:
        line = raw.strip().lstrip("#").strip()
        if not line or "=" not in line:
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        meta[key] = value
    return meta


def _float_or_parse_error(value: str, row: int, column: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ParseError(f"cannot parse {value!r} as a number", row=row, column=column) from None


def _read_csv(path: Path, expected: tuple[str, ...]):
    text = path.read_text()
    comments = [ln for ln in text.splitlines() if ln.lstrip().startswith("#")]
    body = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    reader = csv.reader(io.StringIO("\n".join(body)))
    header = [h.strip() for h in next(reader, [])]
    missing = [c for c in expected if c not in header]
    if missing:
        raise ParseError(f"missing column(s) {', '.join(missing)}; header is {','.join(header)}", row=1)
    idx = {c: header.index(c) for c in expected}
    rows = []
    for r, rec in enumerate(reader, start=2):
        if len(rec) != len(header):
            raise ParseError(f"expected {len(header)} fields, found {len(rec)}", row=r)
        rows.append((r, {c: rec[i].strip() for c, i in idx.items()}))
    return rows, _parse_metadata_lines(comments)


def load_profile_table(path, metadata_path=None) -> ProfileTable:
    """Read a per-score qualification profile table.

    ``n_a``/``n_b`` (and optionally ``u_minus_over_u_plus``) come from ``#``
    comment lines or a sidecar file; the sidecar wins on conflicts.  A sidecar
    named ``<table>.meta`` is picked up automatically.
    """
    path = Path(path)
    rows, meta = _read_csv(path, TABLE_COLUMNS)
    if metadata_path is None and path.with_suffix(path.suffix + ".meta").exists():
        metadata_path = path.with_suffix(path.suffix + ".meta")
    if metadata_path is not None:
        meta.update(_parse_metadata_lines(Path(metadata_path).read_text().splitlines()))
    cols = {c: [] for c in TABLE_COLUMNS}
    for r, rec in rows:
        for c in TABLE_COLUMNS:
            cols[c].append(_float_or_parse_error(rec[c], r, c))
    if "n_a" not in meta and "n_b" not in meta:
        raise ValidationError("metadata must provide n_a or n_b")
    n_a = float(meta["n_a"]) if "n_a" in meta else 1.0 - float(meta["n_b"])
    n_b = float(meta["n_b"]) if "n_b" in meta else 1.0 - n_a
    ratio = meta.get("u_minus_over_u_plus")
    return ProfileTable(
        *(np.array(cols[c]) for c in TABLE_COLUMNS),
        n_a=n_a,
        n_b=n_b,
        u_minus_over_u_plus=None if ratio is None else float(ratio),
        metadata=meta,
    )


def save_profile_table(t: ProfileTable, path) -> None:
    lines = [f"# n_a = {t.n_a!r}", f"# n_b = {t.n_b!r}"]
    if t.u_minus_over_u_plus is not None:
        lines.append(f"# u_minus_over_u_plus = {t.u_minus_over_u_plus!r}")
    lines.append(",".join(TABLE_COLUMNS))
    for row in zip(*(getattr(t, c) for c in TABLE_COLUMNS)):
        lines.append(",".join(f"{v:.10g}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def table_to_population(t: ProfileTable, u_plus: float = 1.0, u_minus: float | None = None) -> Population:
    """Invert a profile table into class-conditional densities per group."""
    if u_minus is None:
        u_minus = u_plus * (t.u_minus_over_u_plus if t.u_minus_over_u_plus is not None else 10.0)
    grid = t.score
    pop = population_from_profile(
        grid,
        t.gamma_a,
        t.gamma_b,
        Empirical(grid, t.density_a),
        Empirical(grid, t.density_b),
        n_a=t.n_a / (t.n_a + t.n_b),
        u_plus=u_plus,
        u_minus=u_minus,
    )
    diag = {
        "mlr_a": check_mlr(pop.group_a),
        "mlr_b": check_mlr(pop.group_b),
        "disadvantaged_fraction": pop.disadvantaged_fraction,
    }
    return Population(pop.group_a, pop.group_b, pop.u_plus, pop.u_minus, diag)


@dataclass(frozen=True)
class ScoredRecords:
    group: np.ndarray
    score: np.ndarray
    label: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.group).astype(str)
        s = np.asarray(self.score, dtype=float)
        y = np.asarray(self.label)
        if not (g.shape == s.shape == y.shape) or g.ndim != 1:
            raise ValidationError("group, score and label must be 1-D and equally long")
        if not np.all(np.isin(g, ("a", "b"))):
            raise ValidationError("groups must be 'a' or 'b'")
        if not np.all(np.isin(y, (0, 1))):
            raise ValidationError("labels must be 0 or 1")
        if not np.all(np.isfinite(s)):
            raise ValidationError("scores must be finite")
        for gid in ("a", "b"):
            if not np.any(g == gid):
                raise ValidationError(f"group {gid!r} has no records")
        for name, v in (("group", g), ("score", s), ("label", y.astype(int))):
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    def __len__(self):
        return self.score.size

    def cell(self, g: str, label: int) -> np.ndarray:
        return self.score[(self.group == g) & (self.label == label)]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(RECORD_COLUMNS)
            for g, s, y in zip(self.group, self.score, self.label):
                w.writerow((g, repr(float(s)), int(y)))


def load_records(path) -> ScoredRecords:
    rows, _ = _read_csv(Path(path), RECORD_COLUMNS)
    groups, scores, labels = [], [], []
    for r, rec in rows:
        if rec["group"] not in ("a", "b"):
            raise ParseError(f"group must be 'a' or 'b', got {rec['group']!r}", row=r, column="group")
        if rec["label"] not in ("0", "1"):
            raise ParseError(f"label must be 0 or 1, got {rec['label']!r}", row=r, column="label")
        groups.append(rec["group"])
        scores.append(_float_or_parse_error(rec["score"], r, "score"))
        labels.append(int(rec["label"]))
    if not rows:
        raise InsufficientData("record file has no rows")
    return ScoredRecords(np.array(groups), np.array(scores), np.array(labels))


def default_bins(scores: np.ndarray) -> int:
    """Freedman-Diaconis bin count, capped at 200."""
    edges = np.histogram_bin_edges(scores, bins="fd")
    return int(min(max(edges.size - 1, 2), MAX_BINS))


def records_to_population(
    r: ScoredRecords, bins: int | None = None, u_plus: float = 1.0, u_minus: float = 10.0
) -> Population:
    """Histogram each (group, label) cell into an empirical density.

    All cells share one set of bin edges; densities are tabulated at bin
    centres.  ``alpha_g`` is the label mean and ``n_g`` the group frequency.
    """
    from .population import GroupModel

    for g in ("a", "b"):
        for y in (1, 0):
            cell = r.cell(g, y)
            if cell.size < 2 or np.unique(cell).size < 2:
                raise InsufficientData(f"cell (group {g}, label {y}) needs at least 2 distinct scores")
    if bins is None:
        bins = default_bins(r.score)
    if bins < 2:
        raise ValueError("bins must be at least 2")
    edges = np.linspace(r.score.min(), r.score.max(), bins + 1)
    centres = 0.5 * (edges[1:] + edges[:-1])
    groups = []
    for g in ("a", "b"):
        in_g = r.group == g
        dists = {}
        for y in (1, 0):
            counts, _ = np.histogram(r.cell(g, y), bins=edges)
            dists[y] = Empirical(centres, counts.astype(float))
        alpha = float(r.label[in_g].mean())
        groups.append(GroupModel(g, float(in_g.mean()), alpha, dists[1], dists[0]))
    diag = {"mlr_a": check_mlr(groups[0]), "mlr_b": check_mlr(groups[1]), "bins": bins}
    return Population(groups[0], groups[1], u_plus, u_minus, diag)


def fico_table_path() -> Path:
    """Path of the bundled two-group credit-score profile table."""
    return Path(__file__).with_name("data") / "fico_black_white.csv"


def load_fico() -> ProfileTable:
    return load_profile_table(fico_table_path())


__all__ = [
    "ProfileTable",
    "ScoredRecords",
    "load_profile_table",
    "save_profile_table",
    "table_to_population",
    "load_records",
    "records_to_population",
    "default_bins",
    "fico_table_path",
    "load_fico",
]
