"""Experiment configuration: a JSON document with a fixed set of keys.

Unknown keys anywhere are errors.  Complex matrices are written as
``{"re": [[...]], "im": [[...]]}`` with rows listed in order.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .core import CouplingLaw, Ensemble, InitRecipe, ModelParams, sample_initial
from .dynamics import Variant, check_variant
from .integrate import IntegratorSettings


class ConfigError(ValueError):
    """The configuration document is malformed or inconsistent."""


FORMATS = ("csv", "full_state")
HYPOTHESES = ("t31", "t32", "t33", "t34")


def _check_keys(obj: Any, where: str, required: set, optional: set = frozenset()) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be an object")
    unknown = set(obj) - required - optional
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")
    missing = required - set(obj)
    if missing:
        raise ConfigError(f"missing key(s) in {where}: {', '.join(sorted(missing))}")
    return obj


def _num(obj: dict, key: str, where: str) -> float:
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{where}.{key} must be a finite number, got {v!r}")
    return float(v)


def _int(obj: dict, key: str, where: str) -> int:
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{where}.{key} must be an integer, got {v!r}")
    return v


def _range(obj: dict, key: str, where: str) -> tuple[float, float]:
    v = obj[key]
    if not (isinstance(v, list) and len(v) == 2):
        raise ConfigError(f"{where}.{key} must be a [lo, hi] pair")
    lo, hi = (_num({"x": x}, "x", f"{where}.{key}") for x in v)
    if lo > hi:
        raise ConfigError(f"{where}.{key} is empty: {lo} > {hi}")
    return lo, hi


def _complex_matrix(v: Any, where: str, shape: tuple[int, int]) -> np.ndarray:
    _check_keys(v, where, {"re", "im"})
    try:
        re = np.array(v["re"], dtype=np.float64)
        im = np.array(v["im"], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where} entries must be numbers: {exc}") from None
    if re.shape != shape or im.shape != shape:
        raise ConfigError(f"{where} must have shape {shape}, got re {re.shape}, im {im.shape}")
    if not (np.all(np.isfinite(re)) and np.all(np.isfinite(im))):
        raise ConfigError(f"{where} has non-finite entries")
    return re + 1j * im


def _real_matrix(v: Any, where: str, shape: tuple[int, int]) -> np.ndarray:
    try:
        a = np.array(v, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where} entries must be numbers: {exc}") from None
    if a.shape != shape:
        raise ConfigError(f"{where} must have shape {shape}, got {a.shape}")
    return a


def _cm_to_json(a: Optional[np.ndarray]):
    if a is None:
        return "zero"
    return {"re": a.real.tolist(), "im": a.imag.tolist()}


@dataclass(frozen=True, eq=False)
class InitConfig:
    seed: int = 0
    kind: str = "near_aggregate"
    spread: float = 0.1
    kappa_range: tuple[float, float] = (1.0, 2.0)
    lambda_rule: str = "sl_pair"
    lambda_range: tuple[float, float] = (0.0, 0.0)
    lambda_tilde0: float = 0.0
    symmetric_gains: bool = False
    hypothesis: Optional[str] = None
    states: Optional[np.ndarray] = None
    kappa: Optional[np.ndarray] = None
    lam: Optional[np.ndarray] = None


@dataclass(frozen=True, eq=False)
class SimConfig:
    variant: Variant
    law0: CouplingLaw
    law1: CouplingLaw
    N: int
    d: int
    gamma0: float
    gamma1: float
    mu0: float
    mu1: float
    omega: Optional[np.ndarray]
    init: InitConfig
    integrator: IntegratorSettings
    directory: str = "out"
    formats: tuple[str, ...] = ("csv",)
    source: Optional[Path] = field(default=None, compare=False)

    def params(self) -> ModelParams:
        dim = self.d + 1
        omega = np.zeros((dim, dim), dtype=np.complex128) if self.omega is None else self.omega
        return ModelParams(omega=omega, gamma0=self.gamma0, gamma1=self.gamma1, mu0=self.mu0,
                           mu1=self.mu1, law0=self.law0, law1=self.law1)

    def recipe(self) -> InitRecipe:
        i = self.init
        return InitRecipe(n=self.N, d=self.d, spread=i.spread, kappa_range=i.kappa_range,
                          lambda_rule=i.lambda_rule, lambda_range=i.lambda_range,
                          lambda_tilde0=i.lambda_tilde0, symmetric_gains=i.symmetric_gains)

    def initial_ensemble(self) -> Ensemble:
        i = self.init
        if i.kind == "explicit":
            return Ensemble(t=0.0, states=i.states, kappa=i.kappa, lam=i.lam)
        predicate = None
        if i.hypothesis is not None:
            from .diagnostics import check_theorem

            p = self.params()
            predicate = lambda e: check_theorem(e, p, i.hypothesis, variant=self.variant)  # noqa: E731
        return sample_initial(self.recipe(), i.seed, predicate)

    def output_dir(self) -> Path:
        out = Path(self.directory)
        if not out.is_absolute() and self.source is not None:
            out = self.source.parent / out
        return out

    def to_dict(self) -> dict:
        i = self.init
        init: dict[str, Any] = {"seed": i.seed, "kind": i.kind}
        if i.kind == "near_aggregate":
            init.update(
                spread=i.spread, kappa_range=list(i.kappa_range), lambda_rule=i.lambda_rule,
                lambda_range=list(i.lambda_range), lambda_tilde0=i.lambda_tilde0,
                symmetric_gains=i.symmetric_gains, hypothesis=i.hypothesis,
            )
        else:
            init.update(states=_cm_to_json(i.states), kappa=i.kappa.tolist(), **{"lambda": i.lam.tolist()})
        s = self.integrator
        return {
            "model": {"variant": self.variant.value, "law0": self.law0.value, "law1": self.law1.value},
            "N": self.N,
            "d": self.d,
            "params": {"gamma0": self.gamma0, "gamma1": self.gamma1, "mu0": self.mu0,
                       "mu1": self.mu1, "omega": _cm_to_json(self.omega)},
            "init": init,
            "integrator": {"dt": s.dt, "t_end": s.t_end, "renormalize": s.renormalize,
                           "record_every": s.record_every},
            "output": {"directory": self.directory, "formats": list(self.formats)},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def digest(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()

    def __eq__(self, other):
        if not isinstance(other, SimConfig):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def _enum(cls, value, where):
    try:
        return cls(value)
    except ValueError:
        choices = ", ".join(m.value for m in cls)
        raise ConfigError(f"{where}: unknown value {value!r} (choose from {choices})") from None


def parse_config(doc: dict, source: Optional[Path] = None) -> SimConfig:
    _check_keys(doc, "config", {"model", "N", "d", "params", "init", "integrator"}, {"output"})
    model = _check_keys(doc["model"], "model", {"variant"}, {"law0", "law1"})
    variant = _enum(Variant, model["variant"], "model.variant")
    law0 = _enum(CouplingLaw, model.get("law0", "anti_hebbian"), "model.law0")
    law1 = _enum(CouplingLaw, model.get("law1", "zero"), "model.law1")
    N = _int(doc, "N", "config")
    d = _int(doc, "d", "config")
    if N < 1 or d < 0:
        raise ConfigError(f"need N >= 1 and d >= 0, got N={N}, d={d}")
    dim = d + 1

    params = _check_keys(doc["params"], "params", {"gamma0", "gamma1", "mu0", "mu1"}, {"omega"})
    rates = {k: _num(params, k, "params") for k in ("gamma0", "gamma1", "mu0", "mu1")}
    raw_omega = params.get("omega", "zero")
    omega = None if raw_omega == "zero" else _complex_matrix(raw_omega, "params.omega", (dim, dim))

    init_doc = doc["init"]
    kind = init_doc.get("kind") if isinstance(init_doc, dict) else None
    if kind == "explicit":
        _check_keys(init_doc, "init", {"kind", "states", "kappa", "lambda"}, {"seed"})
        init = InitConfig(
            seed=_int(init_doc, "seed", "init") if "seed" in init_doc else 0,
            kind="explicit",
            states=_complex_matrix(init_doc["states"], "init.states", (N, dim)),
            kappa=_real_matrix(init_doc["kappa"], "init.kappa", (N, N)),
            lam=_real_matrix(init_doc["lambda"], "init.lambda", (N, N)),
        )
    elif kind == "near_aggregate":
        _check_keys(init_doc, "init", {"kind", "seed"},
                    {"spread", "kappa_range", "lambda_rule", "lambda_range", "lambda_tilde0",
                     "symmetric_gains", "hypothesis"})
        rule = init_doc.get("lambda_rule", "range" if "lambda_range" in init_doc else "sl_pair")
        if rule not in ("sl_pair", "uniform_tilde", "range"):
            raise ConfigError(f"init.lambda_rule: unknown value {rule!r}")
        hyp = init_doc.get("hypothesis")
        if hyp is not None and hyp not in HYPOTHESES:
            raise ConfigError(f"init.hypothesis must be one of {', '.join(HYPOTHESES)} or null")
        sym = init_doc.get("symmetric_gains", False)
        if not isinstance(sym, bool):
            raise ConfigError("init.symmetric_gains must be true or false")
        init = InitConfig(
            seed=_int(init_doc, "seed", "init"),
            kind="near_aggregate",
            spread=_num(init_doc, "spread", "init") if "spread" in init_doc else 0.1,
            kappa_range=_range(init_doc, "kappa_range", "init") if "kappa_range" in init_doc else (1.0, 2.0),
            lambda_rule=rule,
            lambda_range=_range(init_doc, "lambda_range", "init") if "lambda_range" in init_doc else (0.0, 0.0),
            lambda_tilde0=_num(init_doc, "lambda_tilde0", "init") if "lambda_tilde0" in init_doc else 0.0,
            symmetric_gains=sym,
            hypothesis=hyp,
        )
        if init.spread < 0:
            raise ConfigError("init.spread must be nonnegative")
    else:
        raise ConfigError(f"init.kind must be 'near_aggregate' or 'explicit', got {kind!r}")

    integ = _check_keys(doc["integrator"], "integrator", {"dt", "t_end"}, {"renormalize", "record_every"})
    renorm = integ.get("renormalize", True)
    if not isinstance(renorm, bool):
        raise ConfigError("integrator.renormalize must be true or false")
    every = _int(integ, "record_every", "integrator") if "record_every" in integ else 1
    try:
        settings = IntegratorSettings(dt=_num(integ, "dt", "integrator"),
                                      t_end=_num(integ, "t_end", "integrator"),
                                      renormalize=renorm, record_every=every)
    except ValueError as exc:
        raise ConfigError(f"integrator: {exc}") from None

    out = _check_keys(doc.get("output", {}), "output", set(), {"directory", "formats"})
    directory = out.get("directory", "out")
    if not isinstance(directory, str) or not directory:
        raise ConfigError("output.directory must be a nonempty string")
    formats = out.get("formats", ["csv"])
    if not isinstance(formats, list) or any(f not in FORMATS for f in formats):
        raise ConfigError(f"output.formats must be a list drawn from {', '.join(FORMATS)}")

    cfg = SimConfig(variant=variant, law0=law0, law1=law1, N=N, d=d, omega=omega,
                    init=init, integrator=settings, directory=directory,
                    formats=tuple(formats), source=source, **rates)
    try:
        p = cfg.params()
        check_variant(variant, p)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def load_config(path) -> SimConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return parse_config(doc, source=path.resolve())
