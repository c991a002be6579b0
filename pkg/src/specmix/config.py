"""JSON run configurations: parsing, validation and defaults.

Validation collects every problem before anything runs and raises
``ConfigError`` whose ``errors`` list is emitted as JSON by the CLI.
"""
from __future__ import annotations

import copy
import json
import math
import os
import warnings
from dataclasses import dataclass, field
from typing import Any

from .ensembles import CompoundPoissonMatrix, CovarianceMatrix, ExplodingCovariance, TriangularArrayId
from .gamma import GammaError, GammaSpec, HeavyTailTrunc, Interpolation, Unit, gamma_from_dict
from .levy import CompoundPoisson, IdLaw, LawError, law_from_dict, poisson
from .partitions import PartitionError, parse_partition
from .vectors import (
    BrownianSphere,
    GaussianInterp,
    HeavyTailPareto,
    ModelError,
    RefinementWarning,
    SparseBernoulliPhase,
    UniformPhaseInterp,
    UniformSphere,
    model_from_dict,
)

COMMANDS = ("kappa", "f-gamma", "moments", "simulate", "compare", "cauchy-check", "brownian-check", "selftest")
SEED_MAX = 2 ** 64


class ConfigError(ValueError):
    def __init__(self, errors: list[dict]):
        self.errors = errors
        super().__init__("; ".join(f"{e['field']}: {e['error']}" for e in errors))

    def to_dict(self) -> dict:
        return {"status": "config_error", "errors": self.errors}


@dataclass
class RunConfig:
    command: str
    raw: dict
    seed: int = 0
    threads: int = 1
    strict: bool = False
    out: str = "out"
    k_max: int = 4
    repetitions: int = 32
    gate: float = 3.0
    law: IdLaw | None = None
    gamma: GammaSpec | None = None
    ensemble: Any = None
    sweep_t: list[float] | None = None
    partition: str | None = None
    histogram: dict = field(default_factory=lambda: {"bins": 60, "range": "full"})
    cauchy: dict = field(default_factory=dict)
    brownian: dict = field(default_factory=dict)

    def resolved(self) -> dict:
        """The configuration as it will be executed (echoed into the manifest)."""
        d = copy.deepcopy(self.raw)
        d.update(command=self.command, seed=self.seed, threads=self.threads, strict=self.strict,
                 k_max=self.k_max, repetitions=self.repetitions, gate=self.gate)
        if self.law is not None:
            d["law"] = self.law.to_dict()
        if self.gamma is not None:
            d["gamma"] = self.gamma.to_dict()
        d.pop("out", None)
        return d


class _Collector:
    def __init__(self):
        self.errors: list[dict] = []

    def add(self, path: str, msg: str) -> None:
        self.errors.append({"field": path, "error": msg})

    def num(self, d: dict, key: str, default, *, kind=float, lo=None, hi=None, lo_open=False):
        if key not in d:
            return default
        v = d[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or (kind is int and not float(v).is_integer()):
            self.add(key, f"expected {'an integer' if kind is int else 'a number'}, got {v!r}")
            return default
        v = kind(v)
        if lo is not None and (v <= lo if lo_open else v < lo):
            self.add(key, f"must be {'>' if lo_open else '>='} {lo}, got {v}")
        if hi is not None and v > hi:
            self.add(key, f"must be <= {hi}, got {v}")
        return v


def load_json(path: str) -> dict:
    if not os.path.exists(path):
        raise ConfigError([{"field": "--config", "error": f"file not found: {path}"}])
    try:
        with open(path) as fh:
            d = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError([{"field": "--config", "error": f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"}]) from None
    if not isinstance(d, dict):
        raise ConfigError([{"field": "--config", "error": "top level must be a JSON object"}])
    return d


def ensemble_from_dict(d: dict):
    kind = d.get("kind")
    N = d.get("N")
    if not isinstance(N, int) or isinstance(N, bool) or N < 2:
        raise ModelError(f"ensemble N must be an integer >= 2, got {N!r}")
    if kind == "compound_poisson":
        law = law_from_dict(d["law"])
        if not isinstance(law, CompoundPoisson):
            raise LawError("compound_poisson ensembles need a compound Poisson law")
        return CompoundPoissonMatrix(law, model_from_dict(d["vectors"]), N)
    if kind == "triangular":
        return TriangularArrayId(law_from_dict(d["law"]), model_from_dict(d["vectors"]), N, int(d.get("n", 64)))
    if kind == "covariance":
        w = d.get("weights")
        weights = None if w is None else law_from_dict(w)
        if weights is not None and not isinstance(weights, CompoundPoisson):
            raise LawError("covariance weights must be given as a compound Poisson jump law")
        ratio = float(d["ratio"])
        if not ratio > 0:
            raise ModelError("ratio p/N must be positive")
        return CovarianceMatrix(ratio, model_from_dict(d["vectors"]), N, weights, bool(d.get("recenter", True)))
    if kind == "exploding":
        ratio = float(d["ratio"])
        if not ratio > 0:
            raise ModelError("ratio p/N must be positive")
        return ExplodingCovariance(ratio, model_from_dict(d["entries"]), N)
    raise ModelError(f"unknown ensemble kind {kind!r}")


def default_law(ens) -> IdLaw:
    """Limit law matching an ensemble when the config does not name one."""
    if isinstance(ens, (CompoundPoissonMatrix, TriangularArrayId)):
        return ens.law
    if isinstance(ens, CovarianceMatrix) and ens.weights is not None:
        return CompoundPoisson(ens.ratio, ens.weights.jumps)
    return poisson(ens.ratio)


def default_gamma(ens) -> GammaSpec:
    model = getattr(ens, "vectors", None) or getattr(ens, "entries", None)
    if isinstance(model, (GaussianInterp, UniformPhaseInterp, BrownianSphere)):
        return Interpolation(model.t)
    if isinstance(model, UniformSphere):
        return Interpolation(math.inf)
    if isinstance(model, SparseBernoulliPhase):
        return Unit()
    if isinstance(model, HeavyTailPareto) and model.B is not None:
        return HeavyTailTrunc(model.alpha, model.B)
    raise GammaError(f"no default Gamma for {model!r}; set 'gamma' in the config")


def with_t(ens, t: float):
    """Copy of a covariance or compound ensemble with its interpolation time replaced."""
    from dataclasses import replace

    return replace(ens, vectors=replace(ens.vectors, t=t))


def build_config(command: str, raw: dict | None = None, *, seed=None, threads=None, strict=False,
                 out=None, partition=None) -> RunConfig:
    raw = dict(raw or {})
    c = _Collector()
    if command not in COMMANDS:
        c.add("command", f"unknown command {command!r}; choose from {', '.join(COMMANDS)}")
        raise ConfigError(c.errors)
    if "command" in raw and raw["command"] != command:
        c.add("command", f"config is for {raw['command']!r} but {command!r} was requested")
    cfg = RunConfig(command=command, raw=raw, strict=bool(strict or raw.get("strict", False)))
    if seed is not None:
        raw["seed"] = seed
    cfg.seed = c.num(raw, "seed", 0, kind=int, lo=0, hi=SEED_MAX - 1)
    if threads is not None:
        raw["threads"] = threads
    cfg.threads = c.num(raw, "threads", 1, kind=int, lo=1, hi=1024)
    cfg.k_max = c.num(raw, "k_max", 4, kind=int, lo=1, hi=12)
    cfg.repetitions = c.num(raw, "repetitions", 32, kind=int, lo=1)
    gate = raw.get("gate", {})
    cfg.gate = c.num(gate if isinstance(gate, dict) else {"max_z": gate}, "max_z", 3.0, lo=0, lo_open=True)
    cfg.out = out or raw.get("out", "out")
    raw.pop("out", None)

    for key, parse in (("law", law_from_dict), ("gamma", gamma_from_dict), ("ensemble", ensemble_from_dict)):
        if key in raw:
            try:
                with warnings.catch_warnings():
                    if cfg.strict:
                        warnings.simplefilter("error", RefinementWarning)
                    setattr(cfg, key, parse(raw[key]))
            except (LawError, GammaError, ModelError, KeyError, TypeError, ValueError, RefinementWarning) as exc:
                c.add(key, f"{type(exc).__name__}: {exc}")

    if command in ("kappa", "f-gamma"):
        text = partition or raw.get("partition")
        if not text:
            c.add("partition", "a partition string such as {1,3}{2,4} is required")
        else:
            try:
                parse_partition(text)
            except PartitionError as exc:
                c.add("partition", str(exc))
        cfg.partition = text
        if command == "f-gamma" and cfg.gamma is None and "gamma" not in raw:
            c.add("gamma", "required for f-gamma")
    if command == "moments":
        if "law" not in raw:
            c.add("law", "required for moments")
        if "gamma" not in raw:
            c.add("gamma", "required for moments")
    if command in ("simulate", "compare"):
        if "ensemble" not in raw:
            c.add("ensemble", f"required for {command}")
        if command == "compare" and cfg.repetitions < 2:
            c.add("repetitions", "comparison needs at least two repetitions")
        sw = raw.get("sweep_t")
        if sw is not None:
            if not isinstance(sw, list) or not sw or not all(isinstance(v, (int, float)) and v >= 0 for v in sw):
                c.add("sweep_t", "must be a non-empty list of non-negative numbers")
            elif cfg.ensemble is not None and not hasattr(getattr(cfg.ensemble, "vectors", None), "t"):
                c.add("sweep_t", "ensemble vectors have no interpolation time")
            else:
                cfg.sweep_t = [float(v) for v in sw]
        if command == "compare" and cfg.ensemble is not None and cfg.gamma is None and "gamma" not in raw and cfg.sweep_t is None:
            try:
                cfg.gamma = default_gamma(cfg.ensemble)
            except GammaError as exc:
                c.add("gamma", str(exc))
        if command == "compare" and cfg.ensemble is not None and cfg.law is None and "law" not in raw:
            cfg.law = default_law(cfg.ensemble)
        h = raw.get("histogram", {})
        bins = c.num(h, "bins", 60, kind=int, lo=1)
        rng = h.get("range", "full")
        if rng != "full" and not (isinstance(rng, dict) and set(rng) == {"quantile"}
                                  and isinstance(rng["quantile"], (int, float)) and 0 < rng["quantile"] <= 1):
            c.add("histogram.range", "must be 'full' or {\"quantile\": q} with 0 < q <= 1")
            rng = "full"
        cfg.histogram = {"bins": bins, "range": rng}
    if command == "cauchy-check":
        d = raw.get("cauchy", {})
        if not isinstance(d, dict):
            c.add("cauchy", "must be an object")
            d = {}
        zs = d.get("z", [[0.0, 2.0]])
        try:
            zl = [complex(*z) for z in zs]
            if any(z.imag <= 0 for z in zl):
                c.add("cauchy.z", "every z must have positive imaginary part")
        except TypeError:
            c.add("cauchy.z", "z values must be [re, im] pairs")
        fit = d.get("fit_z", [[0.0, 1.0], [0.0, 2.0], [0.0, 4.0], [1.0, 1.0], [-1.0, 2.0], [2.0, 3.0]])
        try:
            [complex(*z) for z in fit]
        except TypeError:
            c.add("cauchy.fit_z", "z values must be [re, im] pairs")
        sampler = d.get("sampler", "levy_ito")
        if sampler not in ("levy_ito", "triangular"):
            c.add("cauchy.sampler", "must be 'levy_ito' or 'triangular'")
        field_ = d.get("field", "real")
        if field_ not in ("real", "complex"):
            c.add("cauchy.field", "must be 'real' or 'complex'")
        cfg.cauchy = {
            "N": c.num(d, "N", 200, kind=int, lo=2), "t": c.num(d, "t", 1.0, lo=0, lo_open=True),
            "z": zs, "fit_z": fit, "sampler": sampler, "field": field_,
            "n_jumps": c.num(d, "n_jumps", 3000.0, lo=1), "n": c.num(d, "n", 64, kind=int, lo=1),
            "scale_sq": c.num(d, "scale_sq", 1.5, lo=0, lo_open=True),
            "fit_repetitions": c.num(d, "fit_repetitions", 200, kind=int, lo=2),
            "fit_tolerance": c.num(d, "fit_tolerance", 0.05, lo=0, lo_open=True),
            "gate": c.num(d, "gate", 4.0, lo=0, lo_open=True),
            "entry_fraction": c.num(d, "entry_fraction", 1e-3, lo=0),
        }
        if "repetitions" not in raw:
            cfg.repetitions = 2000
        if cfg.repetitions < 2:
            c.add("repetitions", "need at least two repetitions for standard errors")
    if command == "brownian-check":
        d = raw.get("brownian", {})
        if not isinstance(d, dict):
            c.add("brownian", "must be an object")
            d = {}
        ns = d.get("n", [2, 3])
        if not isinstance(ns, list) or not ns or not all(v in (2, 3, 4) for v in ns):
            c.add("brownian.n", "must be a non-empty list drawn from 2, 3, 4")
            ns = [2, 3]
        scheme = d.get("scheme", "euler")
        if scheme not in ("euler", "geodesic"):
            c.add("brownian.scheme", "must be 'euler' or 'geodesic'")
        t = c.num(d, "t", 1.0, lo=0)
        steps = d.get("steps")
        if steps is not None:
            steps = c.num(d, "steps", None, kind=int, lo=1)
            if steps is not None and steps < math.ceil(100 * t) and cfg.strict:
                c.add("brownian.steps", f"{steps} steps for t={t}; strict mode needs at least {math.ceil(100 * t)}")
        cfg.brownian = {"N": c.num(d, "N", 500, kind=int, lo=200), "t": t,
                        "draws": c.num(d, "draws", 5000, kind=int, lo=2), "n": ns, "steps": steps, "scheme": scheme}
    if c.errors:
        raise ConfigError(c.errors)
    return cfg
