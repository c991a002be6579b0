import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from specmix.compare import (
    DegenerateSampleError, compare_moments, empirical_cauchy_transform, histogram, mass_near_integers,
    mp_bin_averages, mp_density, mp_edges, semicircle_cauchy,
)
from specmix.ensembles import CompoundPoissonMatrix, CovarianceMatrix, SpectralSample, simulate
from specmix.gamma import Interpolation
from specmix.levy import poisson
from specmix.moments import limit_moments
from specmix.vectors import GaussianInterp, UniformSphere


def synthetic(values_per_rep):
    return SpectralSample.from_spectra([np.asarray(v, float) for v in values_per_rep], 2)


def test_identical_moments_give_zero_z():
    s = synthetic([[0.0, 2.0], [1.0, 1.0]])
    mean, _ = s.empirical_moments()
    rep = compare_moments(s, mean.tolist(), gate=3.0)
    assert rep.z == [0.0, 0.0] and rep.passed


def test_degenerate_sample():
    s = synthetic([[1.0, 1.0], [1.0, 1.0]])
    assert compare_moments(s, [1.0, 1.0]).z == [0.0, 0.0]
    with pytest.raises(DegenerateSampleError):
        compare_moments(s, [1.5, 1.0])


def test_order_overlap_required():
    s = synthetic([[1.0], [2.0]])
    with pytest.raises(ValueError):
        compare_moments(s, [1.0, 2.0], k_max=3)


@pytest.fixture(scope="module")
def poisson2_sample():
    spec = CovarianceMatrix(2.0, GaussianInterp(1.0), 300)
    return simulate(spec, 24, seed=4, k_max=3)


def test_correct_limit_passes_and_wrong_rate_fails(poisson2_sample):
    good = compare_moments(poisson2_sample, limit_moments(poisson(2.0), Interpolation(1.0), 3), gate=3.0)
    assert good.passed and all(math.isfinite(z) for z in good.z)
    bad = compare_moments(poisson2_sample, limit_moments(poisson(2.2), Interpolation(1.0), 3), gate=3.0)
    assert not bad.passed


def test_report_is_order_independent(poisson2_sample):
    perm = SpectralSample(poisson2_sample.moments[::-1].copy(), None, {})
    table = limit_moments(poisson(2.0), Interpolation(1.0), 3)
    a, b = compare_moments(poisson2_sample, table), compare_moments(perm, table)
    assert a.z == pytest.approx(b.z, rel=1e-12, abs=1e-12)


def test_report_json(tmp_path, poisson2_sample):
    rep = compare_moments(poisson2_sample, limit_moments(poisson(2.0), Interpolation(1.0), 3))
    rep.histogram = histogram(poisson2_sample, 20)
    rep.write_json(tmp_path / "r.json")
    d = json.load(open(tmp_path / "r.json"))
    assert d["verdict"] == "pass" and len(d["histogram"]["density"]) == 20


def test_error_shrinks_with_repetitions():
    """4x the repetitions halves the typical absolute error of an unbiased moment estimate."""
    spec = CompoundPoissonMatrix(poisson(1.0), UniformSphere(field="real"), 20)
    errs = {4: [], 16: []}
    for trial in range(10):
        for reps in errs:
            s = simulate(spec, reps, seed=1000 * reps + trial, k_max=1, keep_eigenvalues=False)
            errs[reps].append(abs(s.empirical_moments()[0][0] - 1.0))
    assert np.median(errs[16]) < np.median(errs[4])


def test_cauchy_transform_of_zero_matrix():
    s = synthetic([[0.0, 0.0, 0.0]] * 2)
    zs = [1j, 2 + 0.5j]
    assert empirical_cauchy_transform(s, zs) == pytest.approx([1 / z for z in zs])
    with pytest.raises(ValueError):
        empirical_cauchy_transform(s, [1.0 + 0j])


def test_semicircle_reference_against_gue():
    N, v = 400, 1.7
    rng = np.random.default_rng(3)
    vals = []
    for r in range(20):
        A = (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))) / 2
        H = (A + A.conj().T) * math.sqrt(v / N)
        vals.append(np.mean(1 / (2j - np.linalg.eigvalsh(H))))
    vals = np.array(vals)
    ref = semicircle_cauchy(2j, v)
    se = math.hypot(vals.real.std(ddof=1), vals.imag.std(ddof=1)) / math.sqrt(vals.size)
    assert abs(vals.mean() - ref) <= 3 * se + 1e-4
    assert semicircle_cauchy(1 + 1j, 1.0).imag < 0


def test_histogram_zero_matrices():
    h = histogram(synthetic([[0.0, 0.0]] * 3), bins=30)
    assert len(h.density) == 1 and h.edges[0] < 0 < h.edges[1]
    assert h.mass == pytest.approx(1.0, abs=1e-12) and h.overflow == 0


@settings(max_examples=40)
@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=200), st.integers(1, 80),
       st.sampled_from(["full", ("quantile", 0.9), ("quantile", 0.5), ("quantile", 1.0)]))
def test_histogram_mass_conservation(values, bins, policy):
    h = histogram(np.array(values), bins=bins, range_policy=policy)
    assert abs(h.mass - 1.0) <= 1e-9
    assert 0.0 <= h.overflow <= 1.0
    if policy == "full":
        assert h.overflow == 0.0


def test_histogram_bad_policy():
    with pytest.raises(ValueError):
        histogram(np.ones(3), range_policy=("iqr", 2))


def test_histogram_files(tmp_path):
    h = histogram(np.linspace(0, 1, 11), bins=5)
    h.write_csv(tmp_path / "h.csv")
    h.write_gnuplot(tmp_path / "h.dat")
    assert open(tmp_path / "h.csv").readline().strip() == "edge_lo,edge_hi,density"
    rows = [l.split() for l in open(tmp_path / "h.dat") if not l.startswith("#")]
    assert len(rows) == 5 and all(len(r) == 2 for r in rows)


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0, 4.0])
def test_mp_density_mass(lam):
    from scipy import integrate

    a, b = mp_edges(lam)
    mass = integrate.quad(lambda x: mp_density(np.array([x]), lam)[0], a, b, limit=200)[0]
    # below ratio one the remaining mass sits in an atom at zero
    assert mass == pytest.approx(min(lam, 1.0), abs=1e-6)


def test_marchenko_pastur_histogram():
    N = 2000
    spec = CovarianceMatrix(2.0, GaussianInterp(math.inf, field="real"), N)
    s = simulate(spec, 1, seed=0, k_max=2)
    h = histogram(s, bins=60)
    ref = mp_bin_averages(h.edges, 2.0)
    assert np.max(np.abs(h.density - ref)) < 0.05


def test_interpolation_drift_towards_atoms():
    masses = {}
    for t in (0.01, 1.0):
        s = simulate(CovarianceMatrix(2.0, GaussianInterp(t), 400), 2, seed=5, k_max=1)
        masses[t] = mass_near_integers(s, 0.15)
    assert masses[0.01] > masses[1.0]
