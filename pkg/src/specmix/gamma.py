"""Moment-scaling functionals Gamma on multisets of positive integers.

``Gamma(n_1, ..., n_k)`` is the large-N limit of
``E[prod_l |U(l)|^{2 n_l} / N^{n_l - 1}]`` for an exchangeable random vector U.
Each variant below corresponds to one vector model; profiles are multisets,
so every evaluation first sorts them in non-increasing order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

INF = math.inf


class GammaError(ValueError):
    pass


def canonical_profile(profile: Iterable[int]) -> tuple[int, ...]:
    prof = tuple(sorted((int(n) for n in profile), reverse=True))
    if not prof:
        raise GammaError("empty profile")
    if prof[-1] < 1:
        raise GammaError(f"profile entries must be positive integers, got {prof}")
    return prof


@dataclass(frozen=True)
class GammaSpec:
    """Base class; subclasses are frozen so they hash as memo keys."""

    @property
    def unit_norm(self) -> bool:
        return False

    @property
    def bound_constant(self) -> float:
        raise NotImplementedError

    @property
    def root_floor(self) -> float:
        raise NotImplementedError

    def _eval(self, prof: tuple[int, ...]) -> float:
        raise NotImplementedError

    def __call__(self, profile: Iterable[int]) -> float:
        return self._eval(canonical_profile(profile))

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Unit(GammaSpec):
    """Gamma == 1: the sparse Bernoulli-phase model (not unit-norm)."""

    def _eval(self, prof):
        return 1.0

    @property
    def bound_constant(self):
        return 1.0

    @property
    def root_floor(self):
        return 1.0

    def to_dict(self):
        return {"variant": "unit"}


@dataclass(frozen=True)
class Interpolation(GammaSpec):
    """Gamma_t of the localized Gaussian / Brownian-sphere vectors, t in [0, inf]."""

    t: float

    def __post_init__(self):
        if not (self.t >= 0):
            raise GammaError(f"t must be >= 0, got {self.t}")
        object.__setattr__(self, "t", float(self.t))

    @property
    def unit_norm(self):
        return True

    def _eval(self, prof):
        x = math.exp(-self.t)  # 0.0 at t = inf
        big = [n for n in prof if n >= 2]
        ones = len(prof) - len(big)
        if len(big) >= 2:
            return 0.0
        if big:
            return x ** big[0] * (1.0 - x) ** ones
        k = ones
        return (1.0 - x) ** k + k * x * (1.0 - x) ** (k - 1)

    @property
    def bound_constant(self):
        return 2.0

    @property
    def root_floor(self):
        return math.exp(-self.t)

    def to_dict(self):
        return {"variant": "interpolation", "t": "inf" if self.t == INF else self.t}


@dataclass(frozen=True)
class HeavyTailTrunc(GammaSpec):
    """Gamma^(B) of Pareto(alpha) entries truncated at B * a_N."""

    alpha: float
    B: float

    def __post_init__(self):
        if not 0 < self.alpha < 2:
            raise GammaError(f"alpha must lie in (0, 2), got {self.alpha}")
        if not self.B > 0:
            raise GammaError(f"B must be positive, got {self.B}")

    def factor(self, n: int) -> float:
        a = self.alpha
        return self.B ** (2 * n - a) * a / (2 * n - a)

    def _eval(self, prof):
        out = 1.0
        for n in prof:
            out *= self.factor(n)
        return out

    @property
    def bound_constant(self):
        # factor(n) <= B^{2n} * max(1, B^-a * a/(2-a)) <= C^n
        a = self.alpha
        return self.B ** 2 * max(1.0, self.B ** (-a) * a / (2 - a))

    @property
    def root_floor(self):
        # factor(n)^(1/n) -> B^2; scan until the sequence has settled
        a, logB = self.alpha, math.log(self.B)
        logs = [((2 * n - a) * logB + math.log(a / (2 * n - a))) / n for n in range(1, 400)]
        return min(math.exp(min(logs)), self.B ** 2)

    def to_dict(self):
        return {"variant": "heavy_tail", "alpha": self.alpha, "B": self.B}


@dataclass(frozen=True)
class ProductSequence(GammaSpec):
    """Gamma(n_1..n_k) = prod c_{2 n_l}; ``c[n-1]`` holds c_{2n}."""

    c: tuple[float, ...]

    def __post_init__(self):
        c = tuple(float(v) for v in self.c)
        if not c or c[0] <= 0:
            raise GammaError("ProductSequence needs c_2 > 0")
        if any(v < 0 or not math.isfinite(v) for v in c):
            raise GammaError("c_{2n} must be finite and non-negative")
        object.__setattr__(self, "c", c)

    def _eval(self, prof):
        if prof[0] > len(self.c):
            raise GammaError(f"c_{2 * prof[0]} not supplied (have up to c_{2 * len(self.c)})")
        out = 1.0
        for n in prof:
            out *= self.c[n - 1]
        return out

    @property
    def bound_constant(self):
        return max(v ** (1.0 / n) for n, v in enumerate(self.c, start=1))

    @property
    def root_floor(self):
        return min(v ** (1.0 / n) for n, v in enumerate(self.c, start=1))

    def to_dict(self):
        return {"variant": "product", "c": list(self.c)}


@dataclass(frozen=True)
class Tabulated(GammaSpec):
    table: tuple[tuple[tuple[int, ...], float], ...]
    declared_unit_norm: bool = False
    _lookup: dict = field(default=None, compare=False, hash=False, repr=False)

    def __post_init__(self):
        lookup = {}
        for prof, val in self.table:
            if val < 0:
                raise GammaError("tabulated Gamma values must be non-negative")
            lookup[canonical_profile(prof)] = float(val)
        object.__setattr__(self, "table", tuple(sorted(lookup.items())))
        object.__setattr__(self, "_lookup", lookup)

    @classmethod
    def from_mapping(cls, mapping: Mapping, unit_norm: bool = False) -> "Tabulated":
        return cls(tuple((tuple(k), v) for k, v in mapping.items()), unit_norm)

    @property
    def unit_norm(self):
        return self.declared_unit_norm

    def _eval(self, prof):
        try:
            return self._lookup[prof]
        except KeyError:
            raise GammaError(f"profile {prof} not tabulated") from None

    @property
    def bound_constant(self):
        return max([1.0] + [v ** (1.0 / sum(p)) for p, v in self.table if v > 0])

    @property
    def root_floor(self):
        singles = [v ** (1.0 / p[0]) for p, v in self.table if len(p) == 1]
        return min(singles) if singles else 0.0

    def to_dict(self):
        return {"variant": "tabulated", "unit_norm": self.declared_unit_norm,
                "table": [[list(p), v] for p, v in self.table]}


def gamma_eval(spec: GammaSpec, profile: Iterable[int]) -> float:
    return spec(profile)


def profiles_up_to(total: int) -> Iterable[tuple[int, ...]]:
    """All non-increasing positive profiles with entry sum <= total."""

    def rec(remaining: int, cap: int, prefix: tuple[int, ...]):
        if prefix:
            yield prefix
        for n in range(min(cap, remaining), 0, -1):
            yield from rec(remaining - n, n, prefix + (n,))

    yield from rec(total, total, ())


@dataclass
class ConsistencyReport:
    passed: bool
    checked: int
    first_violation: tuple[int, ...] | None = None
    lhs: float | None = None
    rhs: float | None = None


def gamma_consistency_check(spec: GammaSpec, k_max: int, rtol: float = 1e-12) -> ConsistencyReport:
    """Check Gamma(1) = 1 and the unit-norm recursion

    Gamma(n_1..n_k) = sum_j Gamma(.., n_j + 1, ..) + Gamma(n_1..n_k, 1)

    for every profile with entry sum <= k_max.
    """
    if not spec.unit_norm:
        raise GammaError("consistency recursion only applies to unit-norm models")
    g1 = spec((1,))
    if abs(g1 - 1.0) > rtol:
        return ConsistencyReport(False, 0, (1,), g1, 1.0)
    checked = 0
    for prof in profiles_up_to(k_max):
        lhs = spec(prof)
        rhs = sum(spec(prof[:j] + (prof[j] + 1,) + prof[j + 1:]) for j in range(len(prof)))
        rhs += spec(prof + (1,))
        checked += 1
        if abs(lhs - rhs) > rtol * max(1.0, abs(lhs), abs(rhs)):
            return ConsistencyReport(False, checked, prof, lhs, rhs)
    return ConsistencyReport(True, checked)


def gamma_from_dict(d: Mapping) -> GammaSpec:
    """Build a spec from its JSON form, e.g. ``{"variant": "interpolation", "t": 1.0}``."""
    variant = d.get("variant")
    if variant == "unit":
        return Unit()
    if variant == "interpolation":
        t = d.get("t")
        if isinstance(t, str) and t.lower() in ("inf", "infinity", "+inf"):
            t = INF
        if t is None:
            raise GammaError("interpolation needs 't'")
        return Interpolation(float(t))
    if variant == "heavy_tail":
        return HeavyTailTrunc(float(d["alpha"]), float(d["B"]))
    if variant == "product":
        return ProductSequence(tuple(d["c"]))
    if variant == "tabulated":
        return Tabulated(tuple((tuple(p), v) for p, v in d["table"]), bool(d.get("unit_norm", False)))
    raise GammaError(f"unknown gamma variant {variant!r}")
