"""Random matrix ensembles (1/N) sum_i X_i U^i (U^i)^* and their spectra."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse

from .hypergraphs import ContractViolation
from .levy import Cauchy, CompoundPoisson, Dirac, GaussianStd, IdLaw, UnsupportedMoments
from .vectors import HeavyTailPareto, UniformSphere, VectorModel, pareto_entries


class EnsembleError(ValueError):
    pass


def rep_rng(seed: int, rep: int) -> np.random.Generator:
    """Private stream for repetition ``rep``; independent of execution order."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(rep),)))


# ------------------------------------------------------------- ensemble specs

@dataclass(frozen=True)
class CompoundPoissonMatrix:
    law: CompoundPoisson
    vectors: VectorModel
    N: int


@dataclass(frozen=True)
class TriangularArrayId:
    law: IdLaw
    vectors: VectorModel
    N: int
    n: int = 64


@dataclass(frozen=True)
class CovarianceMatrix:
    """(1/N) sum_{j <= p} X_j U^j (U^j)^*, p = round(ratio N); X == 1 when ``weights`` is None."""

    ratio: float
    vectors: VectorModel
    N: int
    weights: CompoundPoisson | None = None  # X_j drawn from the jump law of this
    recenter: bool = True

    @property
    def p(self) -> int:
        return int(round(self.ratio * self.N))


@dataclass(frozen=True)
class ExplodingCovariance:
    """(1/N) M M^* for an N x p matrix of i.i.d. entries drawn from ``entries``."""

    ratio: float
    entries: VectorModel
    N: int

    @property
    def p(self) -> int:
        return int(round(self.ratio * self.N))


EnsembleSpec = CompoundPoissonMatrix | TriangularArrayId | CovarianceMatrix | ExplodingCovariance


def _validate(spec) -> None:
    if spec.N < 2:
        raise EnsembleError("N must be at least 2")
    ratio = getattr(spec, "ratio", None)
    if ratio is not None and not ratio > 0:
        raise EnsembleError("ratio p/N must be positive")


def _gram(W: np.ndarray, x: np.ndarray | None, N: int) -> np.ndarray:
    Wx = W if x is None else W * x
    M = (Wx @ W.conj().T) / N
    return 0.5 * (M + M.conj().T)


def _draw_jumps(law: CompoundPoisson, size: int, rng: np.random.Generator) -> np.ndarray:
    xs = np.array([x for x, _ in law.jumps])
    ps = np.array([p for _, p in law.jumps])
    if len(xs) == 1:
        return np.full(size, xs[0])
    return rng.choice(xs, size=size, p=ps / ps.sum())


def sample_compound_poisson_matrix(spec: CompoundPoissonMatrix, rng: np.random.Generator) -> np.ndarray:
    _validate(spec)
    N = spec.N
    P = int(rng.poisson(N * spec.law.lam))
    dtype = complex if spec.vectors.field == "complex" else float
    if P == 0:
        return np.zeros((N, N), dtype)
    X = _draw_jumps(spec.law, P, rng)
    return _gram(spec.vectors.sample(N, P, rng), X, N)


def root_sampler(law: IdLaw, n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draws from the n-th convolution root of ``law``."""
    if isinstance(law, Cauchy):
        return (law.t / n) * np.tan(math.pi * (rng.random(size) - 0.5))
    if isinstance(law, GaussianStd):
        return rng.standard_normal(size) / math.sqrt(n)
    if isinstance(law, Dirac):
        return np.full(size, law.gamma / n)
    if isinstance(law, CompoundPoisson):
        # the n-th root is compound Poisson with rate lam/n: thin the jumps
        counts = rng.poisson(law.lam / n, size=size)
        out = np.zeros(size)
        hit = np.nonzero(counts)[0]
        for i in hit:
            out[i] = _draw_jumps(law, int(counts[i]), rng).sum()
        return out
    raise UnsupportedMoments(f"no convolution-root sampler for {type(law).__name__}")


def sample_id_matrix(spec: TriangularArrayId, rng: np.random.Generator) -> np.ndarray:
    _validate(spec)
    N = spec.N
    terms = N * spec.n
    X = root_sampler(spec.law, spec.n, terms, rng)
    return _gram(spec.vectors.sample(N, terms, rng), X, N)


def sample_cauchy_levy_ito(N: int, t: float, vectors: VectorModel, rng: np.random.Generator,
                           n_jumps: float = 3000.0) -> np.ndarray:
    """Cauchy(t) ID matrix from its Levy-Ito decomposition, uniform-sphere vectors only.

    Jumps with |x| > eps are drawn exactly (Poisson count with mean
    ``n_jumps``, |x| = eps / V); the remaining small jumps are replaced by the
    Gaussian matrix with the same covariance, a g I + a H with H from the
    GOE/GUE, which leaves an O(eps^3) error instead of the O(1/n) bias of
    the triangular array.
    """
    if not isinstance(vectors, UniformSphere):
        raise EnsembleError("the Levy-Ito sampler needs uniform-sphere vectors")
    eps = 2.0 * t * N / (math.pi * n_jumps)
    P = int(rng.poisson(n_jumps))
    x = eps / (1.0 - rng.random(P)) * rng.choice(np.array([-1.0, 1.0]), size=P)
    M = _gram(vectors.sample(N, P, rng), x, N) if P else np.zeros((N, N))
    # Var Tr(A R) = (2 t eps / pi) E[(U^* A U)^2] / N
    if vectors.field == "complex":
        a = math.sqrt(2 * t * eps / (math.pi * (N + 1)))
        H = (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))) / 2.0
        H = H + H.conj().T  # off-diagonal E|H_ij|^2 = 1, diagonal variance 1
    else:
        a = math.sqrt(2 * t * eps / (math.pi * (N + 2)))
        H = rng.standard_normal((N, N))
        H = (H + H.T) / math.sqrt(2.0)  # GOE: off-diagonal variance 1, diagonal 2
    return M + a * (H + rng.standard_normal() * np.eye(N))


def _covariance_columns(spec, rng):
    N, p = spec.N, spec.p
    if isinstance(spec, ExplodingCovariance):
        return spec.entries.sample(N, p, rng), None
    W = spec.vectors.sample(N, p, rng)
    if isinstance(spec.vectors, HeavyTailPareto) and spec.vectors.alpha > 1 and spec.recenter:
        nz = W != 0
        if nz.any():
            W = np.where(nz, W - W[nz].mean(), 0.0)
    X = None if spec.weights is None else _draw_jumps(spec.weights, p, rng)
    return W, X


def sample_covariance_matrix(spec: CovarianceMatrix | ExplodingCovariance, rng: np.random.Generator) -> np.ndarray:
    _validate(spec)
    W, X = _covariance_columns(spec, rng)
    return _gram(W, X, spec.N)


def sample_matrix(spec, rng: np.random.Generator) -> np.ndarray:
    if isinstance(spec, CompoundPoissonMatrix):
        return sample_compound_poisson_matrix(spec, rng)
    if isinstance(spec, TriangularArrayId):
        return sample_id_matrix(spec, rng)
    if isinstance(spec, (CovarianceMatrix, ExplodingCovariance)):
        return sample_covariance_matrix(spec, rng)
    raise EnsembleError(f"unknown ensemble {spec!r}")


# ---------------------------------------------------------------- spectra

def check_hermitian(M: np.ndarray, rtol: float = 1e-12) -> None:
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ContractViolation("matrix must be square")
    if not np.all(np.isfinite(M)):
        raise ContractViolation("matrix has non-finite entries")
    scale = max(np.abs(M).max(), 1e-300)
    if np.abs(M - M.conj().T).max() > rtol * scale:
        raise ContractViolation("matrix is not Hermitian within tolerance")


def eigenvalues(M: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """Ascending real spectrum of a Hermitian matrix (LAPACK syevd/heevd)."""
    check_hermitian(M, rtol)
    return np.linalg.eigvalsh(M)


def trace_moments(M, k_max: int) -> np.ndarray:
    """(1/N) Tr M^k for k = 1..k_max, dense or scipy.sparse input."""
    N = M.shape[0]
    out = np.empty(k_max)
    P = M
    for k in range(1, k_max + 1):
        if k > 1:
            P = P @ M
        out[k - 1] = (P.diagonal().sum()).real / N
    return out


@dataclass
class SpectralSample:
    """Per-repetition spectra (optional) and moments (1/N) sum lambda^k."""

    moments: np.ndarray  # (repetitions, k_max)
    eigenvalues: list[np.ndarray] | None = None
    meta: dict = field(default_factory=dict)

    @property
    def repetitions(self) -> int:
        return self.moments.shape[0]

    @property
    def k_max(self) -> int:
        return self.moments.shape[1]

    @classmethod
    def from_spectra(cls, spectra: Sequence[np.ndarray], k_max: int, meta=None) -> "SpectralSample":
        spectra = [np.sort(np.asarray(s, float)) for s in spectra]
        mom = np.array([[np.mean(s ** k) for k in range(1, k_max + 1)] for s in spectra])
        return cls(mom, spectra, dict(meta or {}))

    def empirical_moments(self, k_max: int | None = None):
        k_max = self.k_max if k_max is None else k_max
        m = self.moments[:, :k_max]
        if self.repetitions < 2:
            raise EnsembleError("standard errors need at least two repetitions")
        return m.mean(axis=0), m.std(axis=0, ddof=1) / math.sqrt(self.repetitions)

    def pooled(self) -> np.ndarray:
        if self.eigenvalues is None:
            raise EnsembleError("sample was drawn without keeping eigenvalues")
        return np.concatenate(self.eigenvalues)

    def summary(self) -> dict:
        out = {"meta": self.meta, "repetitions": self.repetitions}
        if self.repetitions >= 2:
            mean, se = self.empirical_moments()
            out["moments"] = {"k": list(range(1, self.k_max + 1)), "mean": mean.tolist(), "se": se.tolist()}
        else:
            out["moments"] = {"k": list(range(1, self.k_max + 1)), "mean": self.moments[0].tolist()}
        return out

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.summary(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def write_csv(self, path) -> None:
        if self.eigenvalues is None:
            raise EnsembleError("sample was drawn without keeping eigenvalues")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["repetition", "index", "value"])
            for r, spec in enumerate(self.eigenvalues):
                for i, v in enumerate(spec):
                    w.writerow([r, i, repr(float(v))])


def _one_rep(args):
    spec, seed, r, k_max, keep = args
    M = sample_matrix(spec, rep_rng(seed, r))
    if keep:
        ev = eigenvalues(M)
        return ev, [float(np.mean(ev ** k)) for k in range(1, k_max + 1)]
    return None, trace_moments(M, k_max)


def simulate(spec, repetitions: int, seed: int, k_max: int = 4, keep_eigenvalues: bool = True,
             threads: int = 1) -> SpectralSample:
    """Draw ``repetitions`` matrices, each from its own stream ``rep_rng(seed, r)``.

    Repetitions are independent; with ``threads > 1`` they run in worker
    processes and are collected in repetition order, so the result does not
    depend on ``threads``.
    """
    jobs = [(spec, seed, r, k_max, keep_eigenvalues) for r in range(repetitions)]
    if threads > 1 and repetitions > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_one_rep, jobs))
    else:
        results = [_one_rep(j) for j in jobs]
    spectra = [ev for ev, _ in results]
    mom = np.array([m for _, m in results], dtype=float).reshape(repetitions, k_max)
    meta = {"ensemble": describe(spec), "seed": int(seed), "repetitions": repetitions}
    return SpectralSample(mom, spectra if keep_eigenvalues else None, meta)


def describe(spec) -> dict:
    d = {"kind": type(spec).__name__, "N": spec.N}
    for name in ("ratio", "n"):
        if hasattr(spec, name):
            d[name] = getattr(spec, name)
    for name in ("law", "weights"):
        v = getattr(spec, name, None)
        if v is not None:
            d[name] = v.to_dict()
    model = getattr(spec, "vectors", None) or getattr(spec, "entries", None)
    d["vectors"] = model.to_dict()
    return d


# ------------------------------------------------------------- sparse model

def sparse_covariance_moments(N: int, ratio: float, k_max: int, rng: np.random.Generator) -> np.ndarray:
    """Trace moments for the sparse Bernoulli-phase covariance matrix.

    Same law as ``ExplodingCovariance(ratio, SparseBernoulliPhase(), N)``,
    stored sparsely: only about p of the N p entries are non-zero.
    """
    p = int(round(ratio * N))
    mask = rng.random((N, p)) < 1.0 / N
    rows, cols = np.nonzero(mask)
    vals = math.sqrt(N) * np.exp(2j * math.pi * rng.random(rows.size))
    W = scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(N, p))
    M = (W @ W.conj().T) / N
    return trace_moments(M.tocsr(), k_max)


# --------------------------------------------------------- heavy-tail rank

@dataclass
class HeavyTailDraw:
    moments: np.ndarray  # truncated ensemble, k = 1..k_max
    bad_columns: int
    rank_bound: int  # upper bound on rank(M - M_truncated)


def heavy_tail_draw(N: int, ratio: float, alpha: float, B: float, k_max: int,
                    rng: np.random.Generator, rank: bool = True) -> HeavyTailDraw:
    """One heavy-tailed covariance matrix, truncated at B a_N, with its rank perturbation.

    M - M_trunc = (1/a_N^2) sum over columns with a truncated entry of
    V V^T - V' V'^T, which lies in the span of [V'_bad, (V - V')_bad]; the
    numerical rank of that column-normalized matrix bounds the rank of the
    difference.
    """
    model = HeavyTailPareto(alpha=alpha, B=B)
    p = int(round(ratio * N))
    Y = pareto_entries(rng, (N, p), alpha)
    level = B * model.a_N(N)
    over = np.abs(Y) > level
    Yt = np.where(over, 0.0, Y)
    M = _gram(Yt * (math.sqrt(N) / model.a_N(N)), None, N)
    mom = trace_moments(M, k_max)
    bad = np.nonzero(over.any(axis=0))[0]
    r = -1
    if rank:
        r = 0
        if bad.size:
            Wd = np.hstack([Yt[:, bad], (Y - Yt)[:, bad]])
            norms = np.linalg.norm(Wd, axis=0)
            Wd = Wd[:, norms > 0] / norms[norms > 0]
            R = scipy.linalg.qr(Wd, mode="r", pivoting=True)[0]
            d = np.abs(np.diag(R))
            r = int(np.sum(d > d[0] * max(Wd.shape) * np.finfo(float).eps))
    return HeavyTailDraw(mom, int(bad.size), r)


# ---------------------------------------------------------- Cauchy ensemble

@dataclass
class ResolventReport:
    z: complex
    target: complex
    diag_mean: complex
    diag_se: complex
    off_mean: complex
    off_se: complex
    max_entry_z: float
    frac_entries_over_4se: float

    @property
    def diag_z(self) -> float:
        return max(abs((self.diag_mean - self.target).real) / self.diag_se.real,
                   abs((self.diag_mean - self.target).imag) / self.diag_se.imag)

    @property
    def off_z(self) -> float:
        return max(abs(self.off_mean.real) / self.off_se.real, abs(self.off_mean.imag) / self.off_se.imag)

    def passed(self, gate: float = 4.0, entry_fraction: float = 1e-3) -> bool:
        return self.diag_z <= gate and self.off_z <= gate and self.frac_entries_over_4se <= entry_fraction

    def to_dict(self) -> dict:
        c = lambda v: [float(v.real), float(v.imag)]  # noqa: E731
        return {"z": c(self.z), "target": c(self.target), "diag_mean": c(self.diag_mean),
                "diag_se": c(self.diag_se), "off_mean": c(self.off_mean), "off_se": c(self.off_se),
                "diag_z": self.diag_z, "off_z": self.off_z, "max_entry_z": self.max_entry_z,
                "frac_entries_over_4se": self.frac_entries_over_4se}


def resolvent_mean(N: int, t: float, zs: Sequence[complex], repetitions: int, seed: int,
                   vectors: VectorModel | None = None, n: int = 64, scale: float = 1.0,
                   sampler: str = "triangular", n_jumps: float = 3000.0) -> list[ResolventReport]:
    """Monte Carlo mean of (z - M_t)^{-1} for the Cauchy(t) ensemble.

    ``scale`` multiplies every vector, so that Gamma(1) = scale^2; the
    expected mean is then (z + i scale^2 t)^{-1} I.  ``sampler`` is
    ``"triangular"`` (N n terms, bias of order 1/n) or ``"levy_ito"``.
    """
    zs = [complex(z) for z in zs]
    if any(z.imag <= 0 for z in zs):
        raise ValueError("resolvent needs Im z > 0")
    vectors = vectors or UniformSphere()
    spec = TriangularArrayId(Cauchy(t), vectors, N, n)
    s1 = [np.zeros((N, N), complex) for _ in zs]
    s2r = [np.zeros((N, N)) for _ in zs]
    s2i = [np.zeros((N, N)) for _ in zs]
    dav = np.empty((len(zs), repetitions), complex)  # per-draw diagonal average
    oav = np.empty((len(zs), repetitions), complex)  # per-draw off-diagonal average
    for r in range(repetitions):
        if sampler == "levy_ito":
            M = sample_cauchy_levy_ito(N, t, vectors, rep_rng(seed, r), n_jumps) * scale ** 2
        elif sampler == "triangular":
            M = sample_id_matrix(spec, rep_rng(seed, r)) * scale ** 2
        else:
            raise ValueError(f"unknown sampler {sampler!r}")
        lam, V = np.linalg.eigh(M)
        for j, z in enumerate(zs):
            G = (V * (1.0 / (z - lam))) @ V.conj().T
            s1[j] += G
            s2r[j] += G.real ** 2
            s2i[j] += G.imag ** 2
            tr = np.trace(G)
            dav[j, r] = tr / N
            oav[j, r] = (G.sum() - tr) / (N * (N - 1))
    out = []
    R = repetitions
    off = ~np.eye(N, dtype=bool)
    for j, z in enumerate(zs):
        target = 1.0 / (z + 1j * t * scale ** 2)
        mean = s1[j] / R
        var_r = np.maximum(s2r[j] / R - mean.real ** 2, 0) * R / (R - 1)
        var_i = np.maximum(s2i[j] / R - mean.imag ** 2, 0) * R / (R - 1)
        se_r, se_i = np.sqrt(var_r / R), np.sqrt(var_i / R)
        d_se = complex(dav[j].real.std(ddof=1), dav[j].imag.std(ddof=1)) / math.sqrt(R)
        o_se = complex(oav[j].real.std(ddof=1), oav[j].imag.std(ddof=1)) / math.sqrt(R)
        expect = np.where(off, 0, target)
        zr = np.abs(mean.real - expect.real) / np.where(se_r > 0, se_r, np.inf)
        zi = np.abs(mean.imag - expect.imag) / np.where(se_i > 0, se_i, np.inf)
        zmax = np.maximum(zr, zi)
        out.append(ResolventReport(z, target, complex(dav[j].mean()), d_se, complex(oav[j].mean()), o_se,
                                   float(zmax.max()), float(np.mean(zmax > 4.0))))
    return out


def fit_cauchy_scale(zs: Sequence[complex], G: Sequence[complex]) -> float:
    """Least-squares t' for G(z) ~ 1/(z + i t') on a z-grid."""
    from scipy.optimize import minimize_scalar

    zs = np.asarray(zs, complex)
    G = np.asarray(G, complex)

    def loss(tp):
        return float(np.sum(np.abs(G - 1.0 / (zs + 1j * tp)) ** 2))

    return float(minimize_scalar(loss, bounds=(1e-6, 100.0), method="bounded",
                                 options={"xatol": 1e-10}).x)


# ------------------------------------------------ characteristic functional

def _psi(law: IdLaw, xi: np.ndarray) -> np.ndarray:
    if isinstance(law, CompoundPoisson):
        return law.lam * sum(p * (np.exp(1j * xi * x) - 1.0) for x, p in law.jumps)
    if isinstance(law, Dirac):
        return 1j * law.gamma * xi
    raise UnsupportedMoments(f"no Levy exponent for {type(law).__name__}")


@dataclass
class CharFunctionalReport:
    mc: complex
    mc_se: float
    analytic: complex
    analytic_se: float

    @property
    def discrepancy(self) -> float:
        return abs(self.mc - self.analytic)

    @property
    def combined_se(self) -> float:
        return math.hypot(self.mc_se, self.analytic_se)

    def agrees(self, gate: float = 3.0) -> bool:
        return self.discrepancy <= gate * self.combined_se + 1e-15


def characteristic_functional(law: IdLaw, vectors: VectorModel, N: int, A: np.ndarray,
                              repetitions: int, seed: int, inner_draws: int = 20000,
                              n: int = 64) -> CharFunctionalReport:
    """E[exp(i Tr(A M))] by simulation, and exp(N E_U[Psi(U^* A U / N)]) with Monte Carlo over U."""
    if isinstance(law, CompoundPoisson):
        spec = CompoundPoissonMatrix(law, vectors, N)
    elif isinstance(law, Dirac):
        spec = TriangularArrayId(law, vectors, N, n)
    else:
        raise UnsupportedMoments(f"no Levy exponent for {type(law).__name__}")
    _psi(law, np.zeros(1))
    vals = np.empty(repetitions, complex)
    for r in range(repetitions):
        M = sample_matrix(spec, rep_rng(seed, r))
        vals[r] = np.exp(1j * np.trace(A @ M).real)
    mc = complex(vals.mean())
    mc_se = float(np.sqrt((np.var(vals.real, ddof=1) + np.var(vals.imag, ddof=1)) / repetitions))
    rng = rep_rng(seed, repetitions + 1)
    U = vectors.sample(N, inner_draws, rng)
    q = np.einsum("ij,ik,kj->j", U.conj(), A, U).real / N
    ps = _psi(law, q)
    inner = complex(ps.mean())
    inner_se = float(np.sqrt((np.var(ps.real, ddof=1) + np.var(ps.imag, ddof=1)) / inner_draws))
    analytic = complex(np.exp(N * inner))
    return CharFunctionalReport(mc, mc_se, analytic, abs(analytic) * N * inner_se)
