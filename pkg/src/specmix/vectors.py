"""Random column vectors U in K^N with exchangeable entries.

Every sampler returns an ``(N, count)`` array whose columns are independent
draws, already scaled so that the matrix ``(1/N) sum X_i U^i (U^i)^*`` is the
right object (for heavy tails this absorbs the ``1/a_N^2`` normalization).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np

FIELDS = ("real", "complex")


class ModelError(ValueError):
    pass


class RefinementWarning(RuntimeWarning):
    pass


def _check_field(field):
    if field not in FIELDS:
        raise ModelError(f"field must be one of {FIELDS}, got {field!r}")


def _gauss(rng: np.random.Generator, shape, field: str) -> np.ndarray:
    """Centered Gaussian entries with E|g|^2 = 1."""
    if field == "real":
        return rng.standard_normal(shape)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * math.sqrt(0.5)


def _phase(rng: np.random.Generator, shape, field: str) -> np.ndarray:
    """Uniform on the unit circle of K (random signs when K = R)."""
    if field == "real":
        return rng.choice(np.array([-1.0, 1.0]), size=shape)
    return np.exp(2j * math.pi * rng.random(shape))


@dataclass(frozen=True)
class VectorModel:
    field: str = dc_field(default="complex", kw_only=True)

    @property
    def beta(self) -> int:
        return 1 if self.field == "real" else 2

    def sample(self, N: int, count: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class UniformSphere(VectorModel):
    """Uniform on the sphere of radius sqrt(N)."""

    def sample(self, N, count, rng):
        _check_field(self.field)
        g = _gauss(rng, (N, count), self.field)
        return g * (math.sqrt(N) / np.linalg.norm(g, axis=0))

    def to_dict(self):
        return {"model": "uniform_sphere", "field": self.field}


def _localized(N, count, t, rng, noise, field):
    a = math.exp(-t / 2) if math.isfinite(t) else 0.0
    b = math.sqrt(1.0 - a * a)
    out = b * noise((N, count), field) if b > 0 else np.zeros((N, count), complex if field == "complex" else float)
    if a > 0:
        J = rng.integers(0, N, size=count)
        out[J, np.arange(count)] += a * math.sqrt(N)
    return out


@dataclass(frozen=True)
class GaussianInterp(VectorModel):
    """sqrt(N) e^{-t/2} e_J + sqrt(1 - e^{-t}) G with G standard Gaussian."""

    t: float = 1.0

    def __post_init__(self):
        _check_field(self.field)
        if not self.t >= 0:
            raise ModelError("t must be non-negative")

    def sample(self, N, count, rng):
        return _localized(N, count, self.t, rng, lambda s, f: _gauss(rng, s, f), self.field)

    def to_dict(self):
        return {"model": "gaussian_interp", "t": self.t, "field": self.field}


@dataclass(frozen=True)
class UniformPhaseInterp(VectorModel):
    """As GaussianInterp, with unit-modulus noise entries."""

    t: float = 1.0

    def __post_init__(self):
        _check_field(self.field)
        if not self.t >= 0:
            raise ModelError("t must be non-negative")

    def sample(self, N, count, rng):
        return _localized(N, count, self.t, rng, lambda s, f: _phase(rng, s, f), self.field)

    def to_dict(self):
        return {"model": "uniform_phase_interp", "t": self.t, "field": self.field}


def pareto_entries(rng: np.random.Generator, shape, alpha: float) -> np.ndarray:
    """Symmetric entries with P(|Y| >= s) = s^-alpha for s >= 1."""
    v = 1.0 - rng.random(shape)  # in (0, 1]
    return _phase(rng, shape, "real") * v ** (-1.0 / alpha)


@dataclass(frozen=True)
class HeavyTailPareto(VectorModel):
    """sqrt(N) Y / a_N with Pareto(alpha) entries Y and a_N = N^(1/alpha).

    With ``B`` set, entries with |Y| > B a_N are zeroed (truncation).
    """

    alpha: float = 0.5
    B: float | None = None
    field: str = dc_field(default="real", kw_only=True)

    def __post_init__(self):
        _check_field(self.field)
        if not 0 < self.alpha < 2:
            raise ModelError("alpha must lie in (0, 2)")
        if self.B is not None and not self.B > 0:
            raise ModelError("truncation level B must be positive")

    def a_N(self, N: int) -> float:
        return N ** (1.0 / self.alpha)

    def raw(self, N, count, rng):
        y = pareto_entries(rng, (N, count), self.alpha)
        if self.field == "complex":
            y = y * _phase(rng, (N, count), "complex")
        return y

    def normalize(self, y: np.ndarray, N: int, truncate: bool = True) -> np.ndarray:
        aN = self.a_N(N)
        if truncate and self.B is not None:
            y = np.where(np.abs(y) <= self.B * aN, y, 0.0)
        return y * (math.sqrt(N) / aN)

    def sample(self, N, count, rng):
        return self.normalize(self.raw(N, count, rng), N)

    def to_dict(self):
        return {"model": "heavy_tail", "alpha": self.alpha, "B": self.B, "field": self.field}


@dataclass(frozen=True)
class SparseBernoulliPhase(VectorModel):
    """Entries sqrt(N) B e^{i Theta} with B ~ Bernoulli(1/N); Gamma == 1 exactly."""

    def sample(self, N, count, rng):
        _check_field(self.field)
        mask = rng.random((N, count)) < 1.0 / N
        return math.sqrt(N) * mask * _phase(rng, (N, count), self.field)

    def to_dict(self):
        return {"model": "sparse_bernoulli_phase", "field": self.field}


@dataclass(frozen=True)
class BrownianSphere(VectorModel):
    """Brownian motion on the sphere of radius sqrt(N), started on a uniform basis vector.

    Euler scheme for dU = (dK) U - U dt / 2 with renormalization after each
    step.  For a unit vector u the increment (dK) u has the law of
    i (h u + w), h ~ N(0, dt/N) real and w circular Gaussian with covariance
    (dt/N)(I - u u^*), so only O(N) work per step is needed.  The
    ``geodesic`` scheme instead moves along the great circle in direction
    i w by arc length |w| and multiplies by e^{ih}; its weak bias is about
    three times smaller at equal step count.
    """

    t: float = 1.0
    steps: int | None = None
    strict: bool = False
    scheme: str = "euler"

    def __post_init__(self):
        if self.scheme not in ("euler", "geodesic"):
            raise ModelError(f"unknown scheme {self.scheme!r}")
        if self.field != "complex":
            raise ModelError("the Brownian sphere model is complex only")
        if not (self.t >= 0 and math.isfinite(self.t)):
            raise ModelError("t must be finite and non-negative")
        need = self.min_steps
        if self.steps is not None and self.steps < need:
            msg = f"{self.steps} Euler steps for t={self.t}; at least {need} required"
            if self.strict:
                raise ModelError(msg)
            warnings.warn(msg, RefinementWarning)

    @property
    def min_steps(self) -> int:
        return math.ceil(100 * self.t)

    @property
    def n_steps(self) -> int:
        return self.steps if self.steps is not None else max(self.min_steps, 1)

    def evolve(self, U: np.ndarray, rng: np.random.Generator, chunk: int = 256) -> np.ndarray:
        """Run the scheme on rows of ``U`` (shape (count, N), row norms sqrt(N)).

        Rows are advanced in blocks of ``chunk`` so the working set stays in cache.
        """
        if self.t == 0:
            return U
        U = np.array(U, dtype=complex)
        for lo in range(0, U.shape[0], chunk):
            U[lo:lo + chunk] = self._evolve_block(U[lo:lo + chunk], rng)
        return U

    def _evolve_block(self, U, rng):
        count, N = U.shape
        dt = self.t / self.n_steps
        s = math.sqrt(dt / N)
        rootN = math.sqrt(N)
        geodesic = self.scheme == "geodesic"
        z = np.empty((count, N), complex)
        for _ in range(self.n_steps):
            z[:] = rng.standard_normal((count, 2 * N)).view(complex)
            z *= s * math.sqrt(0.5)
            proj = np.einsum("ij,ij->i", U.conj(), z) / N
            z -= U * proj[:, None]  # w, since u = U / sqrt(N)
            h = rng.standard_normal((count, 1)) * s
            if geodesic:
                r = np.linalg.norm(z, axis=1, keepdims=True)
                U = np.exp(1j * h) * (U * np.cos(r) + (1j * rootN) * z * (np.sin(r) / r))
            else:
                U = U * (1.0 - 0.5 * dt + 1j * h) + (1j * rootN) * z
            U *= rootN / np.linalg.norm(U, axis=1, keepdims=True)
        return U

    def sample(self, N, count, rng, start: str = "uniform"):
        U = np.zeros((count, N), complex)
        J = rng.integers(0, N, size=count) if start == "uniform" else np.zeros(count, int)
        U[np.arange(count), J] = math.sqrt(N)
        return self.evolve(U, rng).T

    def to_dict(self):
        return {"model": "brownian_sphere", "t": self.t, "steps": self.n_steps, "scheme": self.scheme}


def sample_vector(model: VectorModel, N: int, rng: np.random.Generator) -> np.ndarray:
    return model.sample(N, 1, rng)[:, 0]


def model_from_dict(d: dict) -> VectorModel:
    kind = d.get("model")
    field = d.get("field")
    kw = {} if field is None else {"field": field}
    if kind == "uniform_sphere":
        return UniformSphere(**kw)
    if kind == "gaussian_interp":
        return GaussianInterp(t=_t(d), **kw)
    if kind == "uniform_phase_interp":
        return UniformPhaseInterp(t=_t(d), **kw)
    if kind == "heavy_tail":
        return HeavyTailPareto(alpha=float(d["alpha"]), B=d.get("B"), **kw)
    if kind == "sparse_bernoulli_phase":
        return SparseBernoulliPhase(**kw)
    if kind == "brownian_sphere":
        return BrownianSphere(t=_t(d), steps=d.get("steps"), strict=bool(d.get("strict", False)),
                              scheme=d.get("scheme", "euler"))
    raise ModelError(f"unknown vector model {kind!r}")


def _t(d) -> float:
    t = d.get("t", 1.0)
    if isinstance(t, str) and t.lower() in ("inf", "infinity"):
        return math.inf
    return float(t)
