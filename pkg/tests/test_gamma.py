import math

import pytest
from hypothesis import given, strategies as st

from specmix.gamma import (
    GammaError, HeavyTailTrunc, Interpolation, ProductSequence, Tabulated, Unit,
    gamma_consistency_check, gamma_eval, gamma_from_dict, profiles_up_to,
)

profiles = st.lists(st.integers(1, 5), min_size=1, max_size=6)
SPECS = [Unit(), Interpolation(0.0), Interpolation(0.7), Interpolation(math.inf), HeavyTailTrunc(0.5, 4.0),
         HeavyTailTrunc(1.5, 0.8), ProductSequence((1.0, 2.0, 6.0, 24.0, 120.0, 720.0))]


def test_interpolation_closed_forms():
    g = Interpolation(math.log(2))
    assert gamma_eval(g, (1, 1)) == pytest.approx(0.75, rel=1e-15)
    t = 0.9
    g = Interpolation(t)
    assert g((2,)) == pytest.approx(math.exp(-2 * t), rel=1e-15)
    assert g((2, 3, 1)) == 0.0
    x = math.exp(-t)
    assert g((3, 1, 1)) == pytest.approx(x ** 3 * (1 - x) ** 2, rel=1e-14)
    assert g((1, 1, 1)) == pytest.approx((1 - x) ** 3 + 3 * x * (1 - x) ** 2, rel=1e-14)


def test_heavy_tail_and_product_values():
    assert HeavyTailTrunc(1.0, 1.0)((1,)) == 1.0
    h = HeavyTailTrunc(0.5, 4.0)
    assert h((2, 1)) == pytest.approx(4 ** 3.5 * 0.5 / 3.5 * 4 ** 1.5 * 0.5 / 1.5, rel=1e-14)
    p = ProductSequence((1.0, 3.0))
    assert p((2, 1, 2)) == 9.0
    with pytest.raises(GammaError):
        p((3,))


@pytest.mark.parametrize("bad", [(), (0,), (2, -1)])
def test_profile_errors(bad):
    with pytest.raises(GammaError):
        Unit()(bad)


def test_tabulated():
    tab = Tabulated.from_mapping({(1,): 1.0, (1, 2): 0.5})
    assert tab((2, 1)) == 0.5
    with pytest.raises(GammaError):
        tab((3,))
    with pytest.raises(GammaError):
        Tabulated.from_mapping({(1,): -1.0})


@pytest.mark.parametrize("t", [1.0, 0.0, 0.3, 2.5, math.inf])
def test_interpolation_consistency_passes(t):
    assert gamma_consistency_check(Interpolation(t), 5).passed
    assert gamma_consistency_check(Interpolation(t), 9).passed


def test_consistency_needs_unit_norm():
    with pytest.raises(GammaError):
        gamma_consistency_check(Unit(), 5)
    # Gamma == 1 declared unit-norm violates the recursion: 1 != k + 1
    tab = Tabulated.from_mapping({p: 1.0 for p in profiles_up_to(6)}, unit_norm=True)
    rep = gamma_consistency_check(tab, 5)
    assert not rep.passed and rep.lhs == 1.0 and rep.rhs == 2.0


def test_endpoint_limits():
    small, big = Interpolation(1e-6), Interpolation(20.0)
    for prof in profiles_up_to(8):
        at0 = Interpolation(0.0)(prof)
        assert at0 == (1.0 if len(prof) == 1 else 0.0)
        assert small(prof) == pytest.approx(at0, abs=1e-4)
        ind = 1.0 if max(prof) == 1 else 0.0
        assert Interpolation(math.inf)(prof) == ind
        assert big(prof) == pytest.approx(ind, abs=1e-4)


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: str(s.to_dict()))
def test_bound_and_nonnegativity(spec):
    C = spec.bound_constant
    for prof in profiles_up_to(12):
        if isinstance(spec, ProductSequence) and max(prof) > len(spec.c):
            continue
        v = spec(prof)
        assert 0.0 <= v <= C ** sum(prof) * (1 + 1e-12)


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: str(s.to_dict()))
@given(prof=profiles, seed=st.randoms())
def test_symmetric_in_profile(spec, prof, seed):
    shuffled = list(prof)
    seed.shuffle(shuffled)
    assert spec(prof) == spec(shuffled)


def test_root_floors():
    assert Interpolation(1.0).root_floor == pytest.approx(math.exp(-1))
    assert Interpolation(math.inf).root_floor == 0.0
    assert HeavyTailTrunc(0.5, 4.0).root_floor > 0
    h = HeavyTailTrunc(0.5, 4.0)
    assert all(h.factor(n) ** (1 / n) >= h.root_floor * (1 - 1e-12) for n in range(1, 60))


def test_product_sequence_validation():
    with pytest.raises(GammaError):
        ProductSequence((0.0, 1.0))
    with pytest.raises(GammaError):
        ProductSequence((1.0, -1.0))


@pytest.mark.parametrize("d,expected", [
    ({"variant": "unit"}, Unit()),
    ({"variant": "interpolation", "t": 1.0}, Interpolation(1.0)),
    ({"variant": "interpolation", "t": "inf"}, Interpolation(math.inf)),
    ({"variant": "heavy_tail", "alpha": 0.5, "B": 4.0}, HeavyTailTrunc(0.5, 4.0)),
    ({"variant": "product", "c": [1.0, 0.0, 2.5]}, ProductSequence((1.0, 0.0, 2.5))),
])
def test_from_dict_round_trip(d, expected):
    spec = gamma_from_dict(d)
    assert spec == expected
    assert gamma_from_dict(spec.to_dict()) == spec


def test_from_dict_unknown():
    with pytest.raises(GammaError):
        gamma_from_dict({"variant": "nope"})
