"""Limit moments m_k = sum_pi f_Gamma(pi) c_pi(mu).

f_Gamma(pi) sums, over the edge partitions tau whose hypergraph H(pi, tau)
has no cycle, the product over blocks J of Gamma(profile of J).  It
factorizes over the connected components of pi, and for unit-norm models
it is unchanged by ``thin``; both reductions are used on the fast path and
can be switched off to obtain the raw enumeration as an oracle.
"""
from __future__ import annotations

import logging
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import islice

import numpy as np

from .gamma import GammaSpec, Interpolation
from .hypergraphs import ContractViolation, _acyclic_labellings, _profiles
from .levy import Cauchy, IdLaw, UnsupportedMoments, c_pi, cumulants
from .partitions import (
    InducedPartition,
    Partition,
    PartitionError,
    connected_components,
    cyclic_canonical,
    enumerate_pairings,
    enumerate_partitions,
    kappa,
    thin,
)

log = logging.getLogger(__name__)

DEFAULT_K_MOMENT_MAX = 9
KAPPA_CONVENTION = "induced-cyclic-order"


def k_moment_max() -> int:
    raw = os.environ.get("SPECMIX_KMAX")
    if raw is None:
        return DEFAULT_K_MOMENT_MAX
    try:
        val = int(raw)
    except ValueError:
        raise PartitionError(f"SPECMIX_KMAX={raw!r} is not an integer") from None
    if val != DEFAULT_K_MOMENT_MAX:
        warnings.warn(f"SPECMIX_KMAX overrides the moment cap: {DEFAULT_K_MOMENT_MAX} -> {val}", RuntimeWarning)
    return val


def _check_cap(k: int, cap: int | None = None) -> None:
    cap = k_moment_max() if cap is None else cap
    if k > cap:
        raise PartitionError(f"k={k} exceeds K_MOMENT_MAX={cap} (set SPECMIX_KMAX to override)")


# ---------------------------------------------------------------- f_Gamma

def _component_sum(labels: tuple[int, ...], spec: GammaSpec) -> float:
    """Raw sum over acyclic tau for the partition with these RGS labels."""
    k = len(labels)
    nv = max(labels)
    edges = [(labels[l] - 1, labels[(l + 1) % k] - 1) for l in range(k)]
    gcache: dict[tuple[int, ...], float] = {}
    terms = []
    for tau in _acyclic_labellings(labels):
        prod = 1.0
        for prof in _profiles(edges, tau, nv).values():
            g = gcache.get(prof)
            if g is None:
                g = gcache[prof] = spec(prof)
            prod *= g
            if prod == 0.0:
                break
        terms.append(prod)
    return math.fsum(terms)


@lru_cache(maxsize=None)
def _component_cached(key: tuple[int, ...], spec: GammaSpec) -> float:
    return _component_sum(key, spec)


def f_gamma(pi: Partition | InducedPartition, spec: GammaSpec, *,
            use_thin: bool | None = None, split_components: bool = True,
            k_max: int | None = None) -> float:
    """f_Gamma(pi).

    ``use_thin`` defaults to ``spec.unit_norm``.  With ``use_thin=False`` and
    ``split_components=False`` this is the plain enumeration over all acyclic
    tau of the whole quotient graph.  ``k_max`` lifts the size cap for a
    single evaluation.
    """
    if isinstance(pi, InducedPartition):
        pi = pi.relabeled()
    _check_cap(pi.k, k_max)
    if use_thin is None:
        use_thin = spec.unit_norm
    if use_thin and not spec.unit_norm:
        raise ContractViolation("thin reduction is only valid for unit-norm models")
    if use_thin:
        pi = thin(pi).relabeled()
    if not split_components:
        return _component_sum(pi.labels, spec)
    out = 1.0
    for comp in connected_components(pi):
        out *= _component_cached(cyclic_canonical(comp.labels), spec)
        if out == 0.0:
            break
    return out


def f_gamma_kappa(pi: Partition, t: float) -> float:
    """exp(-kappa(pi) t); at t = inf this is the non-crossing indicator."""
    if t < 0:
        raise ValueError("t must be non-negative")
    kap = kappa(pi)
    if kap == 0:
        return 1.0
    return math.exp(-kap * t)


# ------------------------------------------------------------ moment table

@dataclass
class MomentTable:
    k_max: int
    m: tuple[float, ...]
    gamma: GammaSpec
    law: IdLaw
    meta: dict = field(default_factory=dict)

    def __getitem__(self, k: int) -> float:
        return self.m[k - 1]

    def to_dict(self) -> dict:
        return {
            "k": list(range(1, self.k_max + 1)),
            "m": list(self.m),
            "gamma": self.gamma.to_dict(),
            "law": self.law.to_dict(),
            "kappa_convention": KAPPA_CONVENTION,
        }


def _chunk_terms(args) -> list[float]:
    k, start, stop, c, spec = args
    out = []
    for pi in islice(enumerate_partitions(k), start, stop):
        w = c_pi(c, pi)
        if w != 0.0:
            out.append(f_gamma(pi, spec) * w)
    return out


def _bell(k: int) -> int:
    from .partitions import bell_number

    return bell_number(k)


def limit_moments(law: IdLaw, spec: GammaSpec, k_max: int, threads: int = 1,
                  chunk: int = 4096) -> MomentTable:
    """Moments m_1..m_kmax of the limit spectral law.

    Terms are combined with ``math.fsum`` (correctly rounded), so the result
    does not depend on ``threads`` or on the order in which chunks finish.
    """
    if isinstance(law, Cauchy):
        raise UnsupportedMoments("limit moments need a law with all moments")
    _check_cap(k_max)
    c = cumulants(law, k_max)
    m = []
    pool = ProcessPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        for k in range(1, k_max + 1):
            n = _bell(k)
            jobs = [(k, s, min(s + chunk, n), c, spec) for s in range(0, n, chunk)]
            if pool is not None and len(jobs) > 1:
                parts = list(pool.map(_chunk_terms, jobs))
            else:
                parts = [_chunk_terms(j) for j in jobs]
            m.append(math.fsum(x for part in parts for x in part))
    finally:
        if pool is not None:
            pool.shutdown()
    return MomentTable(k_max, tuple(m), spec, law)


def acyclic_counts_moments(k_max: int) -> tuple[int, ...]:
    """Exact integers sum_pi #{acyclic tau}: the Gamma == 1, Poisson(1) moments."""
    return tuple(sum(len(_acyclic_labellings(p.labels)) for p in enumerate_partitions(k))
                 for k in range(1, k_max + 1))


# -------------------------------------------------------- support witness

@dataclass
class SupportReport:
    passed: bool
    epsilon: float
    pairing_checks: int
    failures: list = field(default_factory=list)
    moment_bounds: dict = field(default_factory=dict)


def support_growth_check(spec: GammaSpec, law: IdLaw, k_max: int) -> SupportReport:
    """Pairing lower bound f(pi) >= eps^k and m_2n >= eps^2n (2n-1)!! c_2^n, eps = root floor."""
    if k_max % 2:
        raise ValueError("k_max must be even")
    eps = spec.root_floor
    if not eps > 0:
        raise ContractViolation(f"root floor of {spec.to_dict()} is {eps}, the witness needs it > 0")
    c = cumulants(law, k_max)
    if any(x < 0 for x in c) or c[1] <= 0:
        raise ContractViolation("witness needs non-negative cumulants and c_2 > 0")
    table = limit_moments(law, spec, k_max)
    rep = SupportReport(True, eps, 0)
    for k in range(2, k_max + 1, 2):
        floor = eps ** k * (1 - 1e-12)
        for pi in enumerate_pairings(k):
            rep.pairing_checks += 1
            f = f_gamma(pi, spec)
            if f < floor:
                rep.passed = False
                rep.failures.append((str(pi), f, eps ** k))
        n = k // 2
        bound = eps ** k * math.prod(range(1, k, 2)) * c[1] ** n
        rep.moment_bounds[k] = (table[k], bound)
        if table[k] < bound * (1 - 1e-12):
            rep.passed = False
            rep.failures.append((f"m_{k}", table[k], bound))
    return rep


# ---------------------------------------------------- finite-N MC oracle

def finite_n_moment_oracle(law, model, N: int, k: int, repetitions: int = 2000, seed: int = 0):
    """Monte Carlo E[(1/N) Tr M^k] for the compound Poisson matrix at size N.

    Returns (estimate, standard error).  Meant for small N, where it shows
    how the finite-N weights approach f_Gamma.
    """
    from .ensembles import CompoundPoissonMatrix, sample_compound_poisson_matrix, rep_rng

    if N > 64 or k > 5:
        raise ValueError("finite-N oracle is limited to N <= 64 and k <= 5")
    ens = CompoundPoissonMatrix(law=law, vectors=model, N=N)
    vals = np.empty(repetitions)
    for r in range(repetitions):
        M = sample_compound_poisson_matrix(ens, rep_rng(seed, r))
        vals[r] = np.trace(np.linalg.matrix_power(M, k)).real / N
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(repetitions))


def kappa_identity_holds(pi: Partition, t: float, rtol: float = 1e-12, k_max: int | None = None) -> bool:
    raw = f_gamma(pi, Interpolation(t), use_thin=False, split_components=False, k_max=k_max)
    ref = f_gamma_kappa(pi, t)
    return abs(raw - ref) <= rtol * max(abs(raw), abs(ref))
