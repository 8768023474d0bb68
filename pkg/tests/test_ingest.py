import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairthresh.bias import apply_underestimate_b, sample_dataset
from fairthresh.errors import InsufficientData, ParseError, RenormalizationWarning, ValidationError
from fairthresh.ingest import (
    ProfileTable,
    ScoredRecords,
    default_bins,
    load_profile_table,
    load_records,
    records_to_population,
    save_profile_table,
    table_to_population,
)
from fairthresh.population import extract_profile


def write(path, text):
    path.write_text(text)
    return path


def test_fico_aggregates(fico_table):
    assert fico_table.alpha_b == pytest.approx(0.34, abs=0.005)
    assert fico_table.alpha_a == pytest.approx(0.76, abs=0.005)
    assert fico_table.n_b == pytest.approx(0.12, abs=0.005)
    assert fico_table.score[0] == 300 and fico_table.score[-1] == 850
    assert fico_table.u_minus_over_u_plus == 10


def test_fico_population(fico, fico_table):
    assert fico.group_b.alpha == pytest.approx(fico_table.alpha_b, abs=1e-12)
    share = np.mean(fico_table.gamma_b <= fico_table.gamma_a + 1e-9)
    assert share >= 0.95
    assert fico.diagnostics["disadvantaged_fraction"] == pytest.approx(share, abs=1e-12)
    assert fico.diagnostics["mlr_a"].holds in (True, False)
    assert fico.diagnostics["mlr_b"].holds in (True, False)


def test_toy_table_alpha(tmp_path):
    p = write(tmp_path / "t.csv", "# n_a = 0.5\nscore,gamma_a,gamma_b,density_a,density_b\n0,0.5,0.5,1,1\n1,0.5,0.5,1,1\n")
    t = load_profile_table(p)
    assert t.alpha_a == 0.5 and t.alpha_b == 0.5
    assert t.n_b == 0.5


def test_probability_out_of_range(tmp_path):
    p = write(tmp_path / "t.csv", "# n_a = 0.5\nscore,gamma_a,gamma_b,density_a,density_b\n0,0.5,1.2,1,1\n1,0.5,0.5,1,1\n")
    with pytest.raises(ValidationError, match=r"1\.2.*row 1.*gamma_b"):
        load_profile_table(p)


def test_parse_error_location(tmp_path):
    p = write(tmp_path / "t.csv", "# n_a = 0.5\nscore,gamma_a,gamma_b,density_a,density_b\n0,0.5,0.5,1,1\n1,0.5,x,1,1\n")
    with pytest.raises(ParseError) as err:
        load_profile_table(p)
    assert err.value.row == 3 and err.value.column == "gamma_b"


def test_missing_column(tmp_path):
    p = write(tmp_path / "t.csv", "# n_a = 0.5\nscore,gamma_a,density_a,density_b\n0,0.5,1,1\n")
    with pytest.raises(ParseError):
        load_profile_table(p)


def test_density_renormalised_with_warning(tmp_path):
    p = write(tmp_path / "t.csv", "# n_a = 0.5\nscore,gamma_a,gamma_b,density_a,density_b\n0,0.5,0.5,2,1\n1,0.5,0.5,2,1\n")
    with pytest.warns(RenormalizationWarning):
        t = load_profile_table(p)
    assert np.trapezoid(t.density_a, t.score) == pytest.approx(1.0)


def test_sidecar_metadata(tmp_path):
    p = write(tmp_path / "t.csv", "score,gamma_a,gamma_b,density_a,density_b\n0,0.5,0.5,1,1\n1,0.5,0.5,1,1\n")
    write(tmp_path / "t.csv.meta", "n_a=0.7\nn_b=0.3\nu_minus_over_u_plus=4\n")
    t = load_profile_table(p)
    assert (t.n_a, t.n_b, t.u_minus_over_u_plus) == (0.7, 0.3, 4.0)


def test_missing_group_fractions(tmp_path):
    p = write(tmp_path / "t.csv", "score,gamma_a,gamma_b,density_a,density_b\n0,0.5,0.5,1,1\n1,0.5,0.5,1,1\n")
    with pytest.raises(ValidationError):
        load_profile_table(p)


def test_save_load_round_trip(tmp_path, fico_table):
    save_profile_table(fico_table, tmp_path / "f.csv")
    back = load_profile_table(tmp_path / "f.csv")
    np.testing.assert_allclose(back.gamma_b, fico_table.gamma_b, atol=1e-9)
    np.testing.assert_allclose(back.density_a, fico_table.density_a, rtol=1e-8)
    assert back.n_a == fico_table.n_a


def test_constant_profile_table():
    grid = np.linspace(0, 10, 11)
    dens = np.exp(-((grid - 5) ** 2) / 8)
    dens /= np.trapezoid(dens, grid)
    t = ProfileTable(grid, np.full(11, 0.3), np.full(11, 0.6), dens, dens, 0.5, 0.5)
    pop = table_to_population(t)
    for g in pop.groups:
        np.testing.assert_allclose(g.dist_qualified.pdf(grid), g.dist_unqualified.pdf(grid), atol=1e-12)


def test_table_round_trip(fico, fico_table):
    tab = extract_profile(fico, fico_table.score)
    for g in ("a", "b"):
        dens = getattr(fico_table, f"density_{g}")
        # the profile is undefined where the group has no mass
        has_mass = dens > 0
        assert np.all(np.isnan(tab[f"gamma_{g}"][~has_mass]))
        expected = np.clip(getattr(fico_table, f"gamma_{g}"), 1e-9, 1 - 1e-9)
        np.testing.assert_allclose(tab[f"gamma_{g}"][has_mass], expected[has_mass], atol=1e-6)
        np.testing.assert_allclose(tab[f"density_{g}"], dens, atol=1e-6)


def test_records_recover_alpha(synthetic):
    n = 100_000
    rec = sample_dataset(apply_underestimate_b(synthetic, 1.0), n, seed=11)
    pop = records_to_population(rec)
    n_b = int(np.sum(rec.group == "b"))
    se = np.sqrt(0.3 * 0.7 / n_b)
    assert abs(pop.group_b.alpha - 0.3) <= 3 * se
    assert pop.group_b.n == pytest.approx(n_b / n)
    assert pop.diagnostics["bins"] == default_bins(rec.score) <= 200


def test_records_file_round_trip(tmp_path, synthetic):
    rec = sample_dataset(apply_underestimate_b(synthetic, 0.8), 500, seed=5)
    rec.to_csv(tmp_path / "r.csv")
    back = load_records(tmp_path / "r.csv")
    np.testing.assert_array_equal(back.score, rec.score)
    np.testing.assert_array_equal(back.label, rec.label)


def test_bad_record_label(tmp_path):
    p = write(tmp_path / "r.csv", "group,score,label\na,1.0,1\nb,2.0,2\n")
    with pytest.raises(ParseError) as err:
        load_records(p)
    assert err.value.row == 3 and err.value.column == "label"


def test_all_qualified_group_is_insufficient():
    rng = np.random.default_rng(0)
    groups = np.array(["a"] * 50 + ["b"] * 50)
    labels = np.r_[rng.integers(0, 2, 50), np.ones(50, dtype=int)]
    rec = ScoredRecords(groups, rng.normal(size=100), labels)
    with pytest.raises(InsufficientData, match="group b, label 0"):
        records_to_population(rec)


def test_two_bins_runs(synthetic):
    rec = sample_dataset(apply_underestimate_b(synthetic, 1.0), 2000, seed=0)
    pop = records_to_population(rec, bins=2)
    assert "mlr_b" in pop.diagnostics
    with pytest.raises(ValueError):
        records_to_population(rec, bins=1)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_records_permutation_invariant(synthetic, seed):
    rec = sample_dataset(apply_underestimate_b(synthetic, 0.9), 3000, seed=1)
    perm = np.random.default_rng(seed).permutation(len(rec))
    shuffled = ScoredRecords(rec.group[perm], rec.score[perm], rec.label[perm])
    a, b = records_to_population(rec), records_to_population(shuffled)
    x = np.linspace(*a.bounds, 50)
    for ga, gb in zip(a.groups, b.groups):
        assert ga.alpha == gb.alpha
        np.testing.assert_array_equal(ga.dist_qualified.pdf(x), gb.dist_qualified.pdf(x))
