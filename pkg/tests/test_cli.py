import csv
from dataclasses import replace

import numpy as np
import pytest

import fairthresh.scenario as scenario_mod
from fairthresh.bias import apply_underestimate_b
from fairthresh.cli import EXIT_INFEASIBLE, EXIT_INVALID, EXIT_IO, EXIT_OK, main
from fairthresh.errors import InfeasibleConstraint, ValidationError
from fairthresh.policy import FairnessSpec, GroupPair, PolicyEvaluation, solve_fair, solve_mu, utility
from fairthresh.scenario import (
    RESULT_COLUMNS,
    Scenario,
    SweepResult,
    SweepRow,
    emit_outputs,
    fit_violation_trend,
    load_scenario,
    run_scenario,
    write_results,
)

BASIC = """\
source: synthetic
specs: [DP, TPR]
epsilon: 0.0
family: underestimate_b
betas: [1.0, 0.8, 0.6]
"""


@pytest.fixture
def scenario_file(tmp_path):
    p = tmp_path / "s.yaml"
    p.write_text(BASIC)
    return p


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_unbiased_row_matches_direct_solve(synthetic):
    sr = run_scenario(Scenario(specs=("DP", "TPR", "FPR", "EO"), betas=(1.0,)))
    assert [r.spec.label for r in sr.rows] == ["MU", "DP@0.01", "TPR@0.01", "FPR@0.01", "EO@0.01"]
    for row in sr.rows:
        direct = solve_fair(synthetic, row.spec)
        assert tuple(row.trained) == pytest.approx(tuple(direct), abs=1e-9)
        if row.spec.criterion != "MU":
            assert row.truth.fairness_gap[row.spec.criterion] <= 0.01 + 1e-9


def test_trained_on_biased_data(synthetic):
    sr = run_scenario(Scenario(specs=("DP",), epsilon=0.0, betas=(0.7,)))
    row = sr.select("DP")[0]
    biased = apply_underestimate_b(synthetic, 0.7).biased
    assert tuple(row.trained) == pytest.approx(tuple(solve_fair(biased, FairnessSpec("DP", 0.0))), abs=1e-9)
    assert row.truth.total_utility == pytest.approx(utility(synthetic, row.trained).total_utility, abs=1e-12)
    assert row.biased.total_utility == pytest.approx(utility(biased, row.trained).total_utility, abs=1e-12)


def test_run_writes_stable_results(scenario_file, tmp_path):
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["run", str(scenario_file), "--out-dir", str(out1)]) == EXIT_OK
    assert main(["run", str(scenario_file), "--out-dir", str(out2)]) == EXIT_OK
    a, b = (out1 / "results.csv").read_bytes(), (out2 / "results.csv").read_bytes()
    assert a == b
    rows = read_rows(out1 / "results.csv")
    assert list(rows[0]) == list(RESULT_COLUMNS)
    assert [r["spec"] for r in rows] == ["MU"] * 3 + ["DP@0"] * 3 + ["TPR@0"] * 3
    assert [float(r["beta"]) for r in rows[:3]] == [1.0, 0.8, 0.6]


def test_oracle_flag_adds_columns(scenario_file, tmp_path):
    assert main(["run", str(scenario_file), "--out-dir", str(tmp_path), "--oracle"]) == EXIT_OK
    rows = read_rows(tmp_path / "results.csv")
    for r in rows:
        assert abs(float(r["oracle_theta_b"]) - float(r["theta_b"])) <= 1.0


def test_sampled_training_is_seeded(tmp_path):
    p = tmp_path / "s.yaml"
    p.write_text(BASIC + "sample_size: 20000\n")
    outs = []
    for seed in ("1", "1", "2"):
        d = tmp_path / f"o{len(outs)}"
        assert main(["run", str(p), "--out-dir", str(d), "--seed", seed]) == EXIT_OK
        outs.append((d / "results.csv").read_bytes())
    assert outs[0] == outs[1]
    assert outs[0] != outs[2]


def test_header_only_for_empty_sweep(tmp_path):
    sr = SweepResult(Scenario(), ())
    path = write_results(sr, tmp_path / "r.csv")
    assert path.read_text() == ",".join(RESULT_COLUMNS) + "\n"


def test_contour_and_sensitivity_verbs(scenario_file, tmp_path, synthetic):
    assert main(["contour", str(scenario_file), "--out-dir", str(tmp_path)]) == EXIT_OK
    cells = read_rows(tmp_path / "contour.csv")
    assert len(cells) == 101 * 101
    best = max(cells, key=lambda r: float(r["utility"]))
    mu = utility(synthetic, solve_mu(synthetic)).selection_rate
    assert abs(float(best["s_a"]) - mu.a) <= 0.01 and abs(float(best["s_b"]) - mu.b) <= 0.01
    assert (tmp_path / "contour_dp.csv").exists() and (tmp_path / "contour_eo.csv").exists()

    assert main(["sensitivity", str(scenario_file), "--out-dir", str(tmp_path)]) == EXIT_OK
    rows = read_rows(tmp_path / "sensitivity.csv")
    assert list(rows[0]) == ["criterion", "group", "analytic", "fd", "rel_err"]
    assert {(r["criterion"], r["group"]) for r in rows} == {("DP", "a"), ("DP", "b"), ("TPR", "a"), ("TPR", "b")}
    assert all(float(r["rel_err"]) <= 0.01 for r in rows)


def test_validate(scenario_file, capsys):
    assert main(["validate", str(scenario_file)]) == EXIT_OK
    assert "ok" in capsys.readouterr().out


@pytest.mark.parametrize(
    "extra",
    [
        "colour: blue\n",
        "betas: [1.0, 1.2]\n",
        "betas: [1.0, 0.5, 0.8]\n",
        "specs: []\n",
        "specs: [DP, XYZ]\n",
        "bias: {family: underestimate_b}\n",
    ],
)
def test_invalid_scenarios(tmp_path, extra):
    p = tmp_path / "bad.yaml"
    text = "\n".join(ln for ln in BASIC.splitlines() if not ln.startswith(extra.split(":")[0] + ":"))
    p.write_text(text + "\n" + extra)
    with pytest.raises(ValidationError):
        load_scenario(p)
    assert main(["validate", str(p)]) == EXIT_INVALID


def test_missing_files(tmp_path):
    assert main(["validate", str(tmp_path / "nope.yaml")]) == EXIT_IO
    p = tmp_path / "s.yaml"
    p.write_text("source: table\npath: missing.csv\n")
    assert main(["validate", str(p)]) == EXIT_IO


def test_sensitivity_needs_closed_form(tmp_path):
    p = tmp_path / "s.yaml"
    p.write_text("family: overestimate_a\nbetas: [0.0, 0.2]\n")
    assert main(["sensitivity", str(p), "--out-dir", str(tmp_path)]) == EXIT_INVALID


def test_cell_errors_are_recorded(monkeypatch, scenario_file, tmp_path):
    real = scenario_mod.solve_fair

    def flaky(pop, spec, grid_step=None):
        if spec.criterion == "TPR":
            raise InfeasibleConstraint("no feasible pair", min_epsilon=0.2)
        return real(pop, spec, grid_step)

    monkeypatch.setattr(scenario_mod, "solve_fair", flaky)
    assert main(["run", str(scenario_file), "--out-dir", str(tmp_path)]) == EXIT_OK
    rows = read_rows(tmp_path / "results.csv")
    tpr = [r for r in rows if r["spec"].startswith("TPR")]
    assert len(tpr) == 3 and all(r["solver"].startswith("error: InfeasibleConstraint") for r in tpr)
    assert all(r["theta_a"] for r in rows if r["spec"].startswith("DP"))


def test_all_cells_failing(monkeypatch, scenario_file, tmp_path):
    def never(pop, spec, grid_step=None):
        raise InfeasibleConstraint("no feasible pair", min_epsilon=0.2)

    monkeypatch.setattr(scenario_mod, "solve_fair", never)
    assert main(["run", str(scenario_file), "--out-dir", str(tmp_path)]) == EXIT_INFEASIBLE


def fake_row(beta, gap):
    gaps = {"DP": gap, "TPR": gap, "FPR": gap, "EO": gap}
    pair = GroupPair(0.0, 0.0)
    ev = PolicyEvaluation(pair, pair, pair, pair, 0.0, gaps)
    return SweepRow(FairnessSpec("DP"), beta, None, ev, ev)


def test_trend_of_constant_gap():
    sr = SweepResult(Scenario(), tuple(fake_row(b, 0.02) for b in (1.0, 0.9, 0.8, 0.7)))
    assert fit_violation_trend(sr, "DP") == pytest.approx(0.0, abs=1e-12)


def test_trend_slope_against_bias_level():
    # gap = 0.3 * (1 - beta)
    sr = SweepResult(Scenario(), tuple(fake_row(b, 0.3 * (1 - b)) for b in (1.0, 0.9, 0.8, 0.7)))
    assert fit_violation_trend(sr, "DP") == pytest.approx(0.3)
    over = replace(Scenario(family="overestimate_a"))
    sr = SweepResult(over, tuple(fake_row(b, 0.5 * b) for b in (0.0, 0.1, 0.2)))
    assert fit_violation_trend(sr, "DP") == pytest.approx(0.5)


def test_trend_needs_three_points():
    sr = SweepResult(Scenario(), tuple(fake_row(b, 0.0) for b in (1.0, 0.9)))
    with pytest.raises(ValidationError):
        fit_violation_trend(sr, "DP")


def test_bundled_scenarios_validate():
    from pathlib import Path

    root = Path(__file__).resolve().parents[1] / "scenarios"
    files = sorted(root.glob("*.yaml"))
    assert files
    for f in files:
        assert main(["validate", str(f)]) == EXIT_OK


def test_emit_without_sweep(tmp_path, synthetic):
    paths = emit_outputs(None, tmp_path, contour_pop=synthetic)
    assert {p.name for p in paths} >= {"contour.csv", "contour_dp.csv", "contour_tpr.csv", "contour_fpr.csv"}
    vals = np.array([float(r["utility"]) for r in read_rows(tmp_path / "contour.csv")])
    assert np.all(np.isfinite(vals))
