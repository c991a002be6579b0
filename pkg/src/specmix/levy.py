"""Infinitely divisible laws with atomic Levy measures, and their classical cumulants."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .partitions import Partition, enumerate_partitions


class LawError(ValueError):
    pass


class UnsupportedMoments(LawError):
    """Raised for laws without moments of all orders (Cauchy)."""


@dataclass(frozen=True)
class IdLaw:
    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class LevyPair(IdLaw):
    """Drift ``gamma`` and atomic measure ``sigma = sum w_j delta_{t_j}``."""

    gamma: float
    sigma: tuple[tuple[float, float], ...]  # (position t, mass w)

    def __post_init__(self):
        sig = tuple((float(t), float(w)) for t, w in self.sigma)
        for t, w in sig:
            if not (w > 0 and math.isfinite(w) and math.isfinite(t)):
                raise LawError(f"sigma atom ({t}, {w}) needs a finite position and positive mass")
        object.__setattr__(self, "sigma", sig)
        object.__setattr__(self, "gamma", float(self.gamma))

    def to_dict(self):
        return {"form": "levy_pair", "gamma": self.gamma,
                "sigma": [{"t": t, "w": w} for t, w in self.sigma]}


@dataclass(frozen=True)
class CompoundPoisson(IdLaw):
    """Rate ``lam`` and atomic jump law ``nu = sum p_j delta_{x_j}``."""

    lam: float
    jumps: tuple[tuple[float, float], ...]  # (jump x, probability p)

    def __post_init__(self):
        if not (self.lam >= 0 and math.isfinite(self.lam)):  # rate 0 is the point mass at 0
            raise LawError(f"rate must be non-negative and finite, got {self.lam}")
        jumps = tuple((float(x), float(p)) for x, p in self.jumps)
        if not jumps or any(p <= 0 for _, p in jumps):
            raise LawError("jump law needs at least one atom with positive probability")
        total = math.fsum(p for _, p in jumps)
        if abs(total - 1.0) > 1e-12:
            raise LawError(f"jump probabilities sum to {total}, not 1")
        object.__setattr__(self, "jumps", jumps)
        object.__setattr__(self, "lam", float(self.lam))

    def jump_moment(self, n: int) -> float:
        return math.fsum(p * x ** n for x, p in self.jumps)

    def to_dict(self):
        return {"form": "compound_poisson", "lambda": self.lam,
                "jumps": [{"x": x, "p": p} for x, p in self.jumps]}


def poisson(lam: float = 1.0) -> CompoundPoisson:
    return CompoundPoisson(lam, ((1.0, 1.0),))


@dataclass(frozen=True)
class Dirac(IdLaw):
    gamma: float

    def to_dict(self):
        return {"form": "dirac", "gamma": self.gamma}


@dataclass(frozen=True)
class GaussianStd(IdLaw):
    def to_dict(self):
        return {"form": "gaussian"}


@dataclass(frozen=True)
class Cauchy(IdLaw):
    t: float

    def __post_init__(self):
        if not self.t > 0:
            raise LawError(f"Cauchy scale must be positive, got {self.t}")

    def to_dict(self):
        return {"form": "cauchy", "t": self.t}


# ------------------------------------------------------------------ cumulants

def cumulants(law: IdLaw, k_max: int) -> tuple[float, ...]:
    """Classical cumulants c_1..c_kmax as a tuple (index 0 holds c_1)."""
    if k_max < 1:
        raise LawError("k_max must be >= 1")
    if isinstance(law, Cauchy):
        raise UnsupportedMoments("Cauchy laws have no cumulants")
    if isinstance(law, CompoundPoisson):
        return tuple(law.lam * law.jump_moment(n) for n in range(1, k_max + 1))
    if isinstance(law, LevyPair):
        c = [law.gamma + math.fsum(w * t for t, w in law.sigma)]
        for n in range(2, k_max + 1):
            # 0.0 ** 0 == 1, so an atom at 0 contributes w exactly at n = 2
            c.append(math.fsum(w * t ** (n - 2) * (1 + t * t) for t, w in law.sigma))
        return tuple(c)
    if isinstance(law, Dirac):
        return (float(law.gamma),) + (0.0,) * (k_max - 1)
    if isinstance(law, GaussianStd):
        return ((0.0, 1.0) + (0.0,) * (k_max - 2))[:k_max]
    raise LawError(f"unknown law {law!r}")


def to_levy_pair(law: CompoundPoisson) -> LevyPair:
    """Levy pair of a compound Poisson law: sigma = lam t^2/(1+t^2) nu, gamma = lam int t/(1+t^2) nu."""
    sigma = tuple((x, law.lam * p * x * x / (1 + x * x)) for x, p in law.jumps if x != 0)
    gamma = law.lam * math.fsum(p * x / (1 + x * x) for x, p in law.jumps)
    return LevyPair(gamma, sigma)


def merge(a: CompoundPoisson, b: CompoundPoisson) -> CompoundPoisson:
    """Convolution of two compound Poisson laws, again compound Poisson."""
    lam = a.lam + b.lam
    if lam == 0:
        return a
    weights: dict[float, float] = {}
    for law in (a, b):
        for x, p in law.jumps:
            weights[x] = weights.get(x, 0.0) + law.lam * p / lam
    jumps = sorted(weights.items())
    # renormalize away rounding so the probability check stays exact
    s = math.fsum(p for _, p in jumps)
    return CompoundPoisson(lam, tuple((x, p / s) for x, p in jumps))


def c_pi(c: Sequence[float], pi: Partition) -> float:
    sizes = pi.block_sizes()
    if max(sizes) > len(c):
        raise LawError(f"need cumulants up to order {max(sizes)}, have {len(c)}")
    out = 1.0
    for s in sizes:
        out *= c[s - 1]
    return out


def cumulants_to_moments(c: Sequence[float], k_max: int) -> tuple[float, ...]:
    """m_k = sum over Part(k) of prod c_|J|, by direct partition sum."""
    if k_max > len(c):
        raise LawError(f"k_max={k_max} exceeds the {len(c)} cumulants supplied")
    out = []
    for k in range(1, k_max + 1):
        out.append(math.fsum(c_pi(c, pi) for pi in enumerate_partitions(k)))
    return tuple(out)


# --------------------------------------------------------------------- config

def law_from_dict(d: Mapping) -> IdLaw:
    form = d.get("form")
    try:
        if form == "compound_poisson":
            return CompoundPoisson(float(d["lambda"]), tuple((j["x"], j["p"]) for j in d["jumps"]))
        if form == "poisson":
            return poisson(float(d.get("lambda", 1.0)))
        if form == "levy_pair":
            return LevyPair(float(d.get("gamma", 0.0)), tuple((s["t"], s["w"]) for s in d.get("sigma", [])))
        if form == "dirac":
            return Dirac(float(d["gamma"]))
        if form == "gaussian":
            return GaussianStd()
        if form == "cauchy":
            return Cauchy(float(d["t"]))
    except KeyError as e:
        raise LawError(f"law form {form!r} is missing field {e.args[0]!r}") from None
    raise LawError(f"unknown law form {form!r}")
