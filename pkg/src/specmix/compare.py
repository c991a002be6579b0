"""Comparing simulated spectra with limit moments and reference laws."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate

from .ensembles import SpectralSample
from .moments import MomentTable


class DegenerateSampleError(ValueError):
    pass


@dataclass
class Histogram:
    edges: np.ndarray
    density: np.ndarray
    overflow: float  # pooled mass outside [edges[0], edges[-1]]

    @property
    def mass(self) -> float:
        return float(np.sum(self.density * np.diff(self.edges)))

    def to_dict(self) -> dict:
        return {"edges": self.edges.tolist(), "density": self.density.tolist(), "overflow": self.overflow}

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["edge_lo", "edge_hi", "density"])
            for lo, hi, d in zip(self.edges[:-1], self.edges[1:], self.density):
                w.writerow([repr(float(lo)), repr(float(hi)), repr(float(d))])

    def write_gnuplot(self, path) -> None:
        mid = 0.5 * (self.edges[:-1] + self.edges[1:])
        with open(path, "w") as fh:
            fh.write("# bin_center density\n")
            for x, d in zip(mid, self.density):
                fh.write(f"{x!r} {float(d)!r}\n")


@dataclass
class ComparisonReport:
    k: list[int]
    analytic: list[float]
    mean: list[float]
    se: list[float]
    z: list[float]
    gate: float
    histogram: Histogram | None = None
    cauchy: dict | None = None
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(abs(v) <= self.gate for v in self.z)

    def to_dict(self) -> dict:
        out = {
            "k": self.k, "analytic": self.analytic, "mean": self.mean, "se": self.se, "z": self.z,
            "gate": self.gate, "verdict": "pass" if self.passed else "fail", "meta": self.meta,
        }
        if self.histogram is not None:
            out["histogram"] = self.histogram.to_dict()
        if self.cauchy is not None:
            out["cauchy"] = self.cauchy
        return out

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def compare_moments(s: SpectralSample, m: MomentTable | Sequence[float], gate: float = 3.0,
                    k_max: int | None = None) -> ComparisonReport:
    """z_k = (empirical mean - limit moment) / SE for k = 1..k_max."""
    target = list(m.m) if isinstance(m, MomentTable) else [float(v) for v in m]
    k_max = min(s.k_max, len(target)) if k_max is None else k_max
    if k_max < 1 or k_max > s.k_max or k_max > len(target):
        raise ValueError("moment orders of sample and table do not overlap")
    mean, se = s.empirical_moments(k_max)
    z = []
    for k in range(k_max):
        diff = mean[k] - target[k]
        if se[k] == 0:
            if abs(diff) > 1e-12 * max(1.0, abs(target[k])):
                raise DegenerateSampleError(f"zero standard error but moment {k + 1} differs by {diff}")
            z.append(0.0)
        else:
            z.append(float(diff / se[k]))
    return ComparisonReport(list(range(1, k_max + 1)), target[:k_max], mean.tolist(), se.tolist(), z, gate)


def empirical_cauchy_transform(s: SpectralSample | np.ndarray, zs: Sequence[complex]) -> np.ndarray:
    """G(z) = mean of 1/(z - lambda) over the pooled eigenvalues."""
    zs = np.asarray(zs, complex)
    if np.any(zs.imag <= 0):
        raise ValueError("Cauchy transform grid must lie in the upper half-plane")
    lam = s.pooled() if isinstance(s, SpectralSample) else np.asarray(s, float).ravel()
    return np.array([np.mean(1.0 / (z - lam)) for z in zs])


def histogram(s: SpectralSample | np.ndarray, bins: int = 60, range_policy="full") -> Histogram:
    """Density histogram of the pooled eigenvalues.

    ``range_policy`` is ``"full"`` or ``("quantile", q)``; the latter clips
    to the central q-quantile range, and the clipped mass is reported as
    ``overflow`` while the in-range densities still integrate to one.
    """
    lam = s.pooled() if isinstance(s, SpectralSample) else np.asarray(s, float).ravel()
    if lam.size == 0:
        raise ValueError("empty sample")
    if range_policy == "full":
        lo, hi = float(lam.min()), float(lam.max())
    else:
        kind, q = range_policy
        if kind != "quantile" or not 0 < q <= 1:
            raise ValueError(f"unknown range policy {range_policy!r}")
        lo, hi = (float(v) for v in np.quantile(lam, [(1 - q) / 2, (1 + q) / 2]))
    if hi > lo and not np.any((lam >= lo) & (lam <= hi)):
        lo, hi = float(lam.min()), float(lam.max())  # empty window, fall back to full range
    if hi <= lo:
        lo, hi, bins = lo - 0.5, lo + 0.5, 1
    counts, edges = np.histogram(lam, bins=bins, range=(lo, hi))
    inside = counts.sum()
    density = counts / (inside * np.diff(edges))
    return Histogram(edges, density, float((lam.size - inside) / lam.size))


# ------------------------------------------------------------ reference laws

def mp_edges(lam: float) -> tuple[float, float]:
    r = math.sqrt(lam)
    return (1 - r) ** 2, (1 + r) ** 2


def mp_density(x, lam: float):
    """Absolutely continuous part of the Marchenko-Pastur law with ratio lam, unit variance."""
    a, b = mp_edges(lam)
    x = np.asarray(x, float)
    inside = (x > a) & (x < b)
    out = np.zeros_like(x)
    xi = x[inside]
    out[inside] = np.sqrt((b - xi) * (xi - a)) / (2 * math.pi * xi)
    return out


def mp_bin_averages(edges: np.ndarray, lam: float) -> np.ndarray:
    a, b = mp_edges(lam)
    out = np.empty(len(edges) - 1)
    for i, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
        lo_c, hi_c = max(lo, a), min(hi, b)
        mass = integrate.quad(lambda x: float(mp_density(np.array([x]), lam)[0]), lo_c, hi_c)[0] if hi_c > lo_c else 0.0
        out[i] = mass / (hi - lo)
    return out


def semicircle_cauchy(z: complex, v: float) -> complex:
    """Cauchy transform of the centered semicircle law with variance v."""
    z = complex(z)
    root = np.sqrt(z * z - 4 * v + 0j)
    g = (z - root) / (2 * v)
    if g.imag > 0:  # wrong branch: G maps the upper half-plane to the lower one
        g = (z + root) / (2 * v)
    return complex(g)


def mass_near_integers(s: SpectralSample | np.ndarray, radius: float = 0.15) -> float:
    lam = s.pooled() if isinstance(s, SpectralSample) else np.asarray(s, float).ravel()
    return float(np.mean(np.abs(lam - np.round(lam)) <= radius))
