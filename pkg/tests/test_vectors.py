import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from specmix.gamma import HeavyTailTrunc, Interpolation
from specmix.vectors import (
    BrownianSphere, GaussianInterp, HeavyTailPareto, ModelError, RefinementWarning, SparseBernoulliPhase,
    UniformPhaseInterp, UniformSphere, model_from_dict, pareto_entries, sample_vector,
)


def mean_se(x):
    x = np.asarray(x, float)
    return x.mean(), x.std(ddof=1) / math.sqrt(x.size)


@pytest.mark.parametrize("field", ["real", "complex"])
def test_gaussian_interp_at_zero_is_basis_vector(rng, field):
    U = GaussianInterp(0.0, field=field).sample(30, 50, rng)
    assert np.all(np.count_nonzero(U, axis=0) == 1)
    assert np.allclose(np.abs(U).max(axis=0), math.sqrt(30), rtol=0, atol=1e-12)


@pytest.mark.parametrize("field", ["real", "complex"])
@given(N=st.integers(2, 60), seed=st.integers(0, 2 ** 32))
@settings(max_examples=25)
def test_uniform_sphere_norm(field, N, seed):
    U = UniformSphere(field=field).sample(N, 7, np.random.default_rng(seed))
    assert np.allclose(np.sum(np.abs(U) ** 2, axis=0), N, rtol=1e-12)


@pytest.mark.parametrize("model", [GaussianInterp(0.7), UniformPhaseInterp(0.7), GaussianInterp(2.0, field="real")],
                         ids=["gauss", "phase", "gauss-real"])
def test_expected_squared_norm(rng, model):
    N = 40
    U = model.sample(N, 20000, rng)
    m, se = mean_se(np.sum(np.abs(U) ** 2, axis=0) / N)
    assert abs(m - 1.0) <= 4 * se


@pytest.mark.parametrize("model", [GaussianInterp(0.5), UniformPhaseInterp(1.0), SparseBernoulliPhase(),
                                   HeavyTailPareto(alpha=1.5, B=3.0)], ids=["gauss", "phase", "sparse", "heavy"])
def test_exchangeable_second_moments(rng, model):
    N = 8
    A = np.abs(model.sample(N, 40000, rng)) ** 2
    means = A.mean(axis=1)
    se = A.std(axis=1, ddof=1) / math.sqrt(A.shape[1])
    pooled = means.mean()
    assert np.all(np.abs(means - pooled) <= 4.5 * se)


def test_uniform_phase_entries_have_unit_modulus_off_the_spike(rng):
    U = UniformPhaseInterp(math.inf).sample(10, 5, rng)
    assert np.allclose(np.abs(U), 1.0)


@pytest.mark.parametrize("s", [1.0, 2.0, 10.0, 100.0])
def test_pareto_tail(rng, s):
    alpha = 0.5
    y = pareto_entries(rng, 200000, alpha)
    assert np.all(np.abs(y) >= 1.0)
    p = np.mean(np.abs(y) >= s)
    q = s ** -alpha
    assert abs(p - q) <= 4 * math.sqrt(q * (1 - q) / y.size) + 1e-12


def test_heavy_tail_normalization_and_truncation(rng):
    model = HeavyTailPareto(alpha=0.5, B=2.0)
    N = 100
    y = model.raw(N, 300, rng)
    z = model.normalize(y, N)
    keep = np.abs(y) <= 2.0 * model.a_N(N)
    assert np.all(z[~keep] == 0)
    assert np.allclose(z[keep], y[keep] * math.sqrt(N) / N ** 2)


@pytest.mark.parametrize("n", [1, 2])
def test_heavy_tail_truncated_gamma_estimate(n):
    """E|Z|^{2n} / N^{n-1} for truncated Pareto entries against the Gamma^(B) limit."""
    alpha, B, N = 0.5, 4.0, 4000
    model = HeavyTailPareto(alpha=alpha, B=B)
    vals = []
    for r in range(20):
        z = model.sample(N, 200, np.random.default_rng([11, r]))
        vals.append(np.abs(z) ** (2 * n) / N ** (n - 1))
    m, se = mean_se(np.concatenate([v.ravel() for v in vals]))
    assert abs(m - HeavyTailTrunc(alpha, B)((n,))) <= 3 * se


def _sparse_profile_estimate(U, k):
    """Unbiased estimate of E[prod_l N B_l] over k distinct coordinates: N^k (m)_k / (N)_k."""
    N = U.shape[0]
    m = np.count_nonzero(U, axis=0).astype(float)
    falling = np.ones_like(m)
    for j in range(k):
        falling *= (m - j) * N / (N - j)
    return falling


@pytest.fixture(scope="module")
def sparse_draws():
    N = 4000
    return N, SparseBernoulliPhase().sample(N, 6000, np.random.default_rng(5))


@pytest.mark.parametrize("profile", [(1,), (2,), (4,), (1, 1), (2, 1), (3, 1), (2, 2), (1, 1, 1), (2, 1, 1), (1, 1, 1, 1)])
def test_sparse_bernoulli_gamma_is_one(sparse_draws, profile):
    N, U = sparse_draws
    # |U_i|^{2n} / N^{n-1} = N B_i whatever n is, so a profile only depends on its length
    assert np.allclose(np.abs(U[U != 0]) ** 2, N)
    m, se = mean_se(_sparse_profile_estimate(U, len(profile)))
    assert abs(m - 1.0) <= 3 * se


@pytest.mark.parametrize("model", [GaussianInterp(1.0), UniformPhaseInterp(1.0)], ids=["gauss", "phase"])
def test_interpolated_gamma_estimates(model):
    N, reps = 4000, 400
    U = model.sample(N, reps, np.random.default_rng(17))
    a = np.abs(U) ** 2
    s2 = np.sum(a, axis=0)
    s4 = np.sum(a ** 2, axis=0)
    s8 = np.sum(a ** 4, axis=0)
    g = Interpolation(1.0)
    est = {
        (2,): s4 / N ** 2,
        (1, 1): (s2 ** 2 - s4) / (N * (N - 1)),
        (2, 2): (s4 ** 2 - s8) / (N ** 2 * N * (N - 1)),
    }
    for prof, vals in est.items():
        m, se = mean_se(vals)
        assert abs(m - g(prof)) <= 3 * se + 2.0 / N, prof


def test_brownian_norm_and_start(rng):
    b = BrownianSphere(t=0.3)
    U = b.sample(50, 20, rng)
    assert np.allclose(np.sum(np.abs(U) ** 2, axis=0), 50, rtol=1e-12)
    U0 = BrownianSphere(t=0.0).sample(50, 4, rng)
    assert np.all(np.count_nonzero(U0, axis=0) == 1)


@pytest.mark.parametrize("scheme", ["euler", "geodesic"])
def test_brownian_schemes_preserve_norm(rng, scheme):
    U = BrownianSphere(t=1.0, steps=100, scheme=scheme).sample(30, 10, rng, start="first")
    assert np.allclose(np.linalg.norm(U, axis=0) ** 2, 30, rtol=1e-12)


def test_brownian_refinement_warning_and_strict():
    with pytest.warns(RefinementWarning):
        BrownianSphere(t=1.0, steps=10)
    with pytest.raises(ModelError):
        BrownianSphere(t=1.0, steps=10, strict=True)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert BrownianSphere(t=1.0, steps=100).n_steps == 100
    assert BrownianSphere(t=0.5).n_steps == 50


@pytest.mark.parametrize("bad", [dict(t=-1.0), dict(t=math.inf), dict(scheme="rk4")])
def test_brownian_validation(bad):
    with pytest.raises(ModelError):
        BrownianSphere(**bad)


@pytest.mark.parametrize("bad", [lambda: GaussianInterp(-1.0), lambda: UniformSphere(field="quaternion").sample(3, 1, None),
                                 lambda: HeavyTailPareto(alpha=2.5), lambda: HeavyTailPareto(alpha=0.5, B=-1.0)])
def test_model_validation(bad):
    with pytest.raises(ModelError):
        bad()


@pytest.mark.parametrize("d", [
    {"model": "uniform_sphere", "field": "real"}, {"model": "gaussian_interp", "t": 1.0, "field": "complex"},
    {"model": "uniform_phase_interp", "t": 0.1, "field": "complex"}, {"model": "heavy_tail", "alpha": 0.5, "B": 4.0, "field": "real"},
    {"model": "sparse_bernoulli_phase", "field": "complex"}, {"model": "brownian_sphere", "t": 0.5, "steps": 50, "scheme": "euler"},
])
def test_model_dict_round_trip(d):
    m = model_from_dict(d)
    assert model_from_dict(m.to_dict()) == m


def test_sample_vector_shape(rng):
    v = sample_vector(GaussianInterp(1.0), 12, rng)
    assert v.shape == (12,) and np.iscomplexobj(v)
    assert UniformSphere(field="real").beta == 1 and UniformSphere().beta == 2
