"""Strict JSON configuration: parsing, validation, canonical serialization.

Unknown keys are rejected so that misspelled options fail loudly.  Rational
powers are written as "n1/n2" strings (or integers) and must have odd
denominators in lowest terms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .evolve import IntegratorConfig
from .model import ParameterError, Params12, Params21
from .spectral import Grid, make_grid


class ConfigError(ValueError):
    """Malformed or inadmissible run configuration."""


SYSTEMS = ("two-plus-one", "one-plus-two")
TASKS = ("simulate", "groundstate", "lambda", "stability", "soliton", "sweep")

_PARAM_KEYS = {
    "two-plus-one": ("alpha1", "alpha2", "gamma1", "gamma2", "beta", "q1", "q2", "p"),
    "one-plus-two": ("alpha1", "alpha2", "gamma", "q", "beta1", "beta2", "p1", "p2"),
}
_RATIONAL_KEYS = ("p", "p1", "p2")

_TASK_KEYS = {
    "simulate": {"T": (float, True), "initial": (dict, True), "dump_fields": (bool, False)},
    "groundstate": {"r": (float, True), "l": (float, True), "m": (float, True),
                    "tol": (float, False), "max_iters": (int, False)},
    "lambda": {"r": (float, True), "l": (float, True), "m": (float, True),
               "tol": (float, False), "max_iters": (int, False)},
    "stability": {"r": (float, True), "l": (float, True), "m": (float, True),
                  "delta": (float, True), "T": (float, True),
                  "tol": (float, False), "max_iters": (int, False)},
    "soliton": {"C": (float, True)},
    "sweep": {"runs": (list, True)},
}


@dataclass
class TaskConfig:
    name: str
    options: dict = field(default_factory=dict)


@dataclass
class RunConfig:
    system: str
    params: object          # Params21 or Params12
    grid: Grid
    integrator: IntegratorConfig
    task: TaskConfig
    seed: int = 0
    output: str | None = None


def _reject_unknown(d: dict, allowed, path: str):
    for key in d:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in {path or 'config'}")


def _need(d: dict, key: str, path: str):
    if key not in d:
        raise ConfigError(f"missing required key {key!r} in {path or 'config'}")
    return d[key]


def _as_number(value, key: str, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"key {key!r} in {path} must be a number")
    return float(value)


def _as_rational(value, key: str, path: str):
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"key {key!r} in {path}: {exc}") from exc
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"key {key!r} in {path} must be an int or 'n1/n2' string")
    return value


def _parse_params(system: str, d: dict):
    keys = _PARAM_KEYS[system]
    _reject_unknown(d, keys, "params")
    kwargs = {}
    for key, value in d.items():
        if key in _RATIONAL_KEYS:
            kwargs[key] = _as_rational(value, key, "params")
        else:
            kwargs[key] = _as_number(value, key, "params")
    cls = Params21 if system == "two-plus-one" else Params12
    try:
        return cls(**kwargs)
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc


def _parse_grid(d: dict) -> Grid:
    _reject_unknown(d, ("L", "N"), "grid")
    L = _as_number(_need(d, "L", "grid"), "L", "grid")
    n = _need(d, "N", "grid")
    if isinstance(n, bool) or not isinstance(n, int):
        raise ConfigError("key 'N' in grid must be an integer")
    try:
        return make_grid(L, n)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _parse_integrator(d: dict) -> IntegratorConfig:
    allowed = ("dt", "scheme", "dealias", "monitor_stride", "max_h1")
    _reject_unknown(d, allowed, "integrator")
    kwargs = {}
    if "dt" in d:
        kwargs["dt"] = _as_number(d["dt"], "dt", "integrator")
    if "scheme" in d:
        if d["scheme"] not in ("IFRK4", "Strang"):
            raise ConfigError("integrator scheme must be 'IFRK4' or 'Strang'")
        kwargs["scheme"] = d["scheme"]
    if "dealias" in d:
        if not isinstance(d["dealias"], bool):
            raise ConfigError("key 'dealias' in integrator must be a boolean")
        kwargs["dealias"] = d["dealias"]
    if "monitor_stride" in d:
        ms = d["monitor_stride"]
        if isinstance(ms, bool) or not isinstance(ms, int):
            raise ConfigError("key 'monitor_stride' in integrator must be an integer")
        kwargs["monitor_stride"] = ms
    if "max_h1" in d and d["max_h1"] is not None:
        kwargs["max_h1"] = _as_number(d["max_h1"], "max_h1", "integrator")
    try:
        return IntegratorConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


_INITIAL_KEYS = {
    "gaussian": {"amplitudes": (list, True), "widths": (list, True),
                 "windings": (list, False), "centers": (list, False)},
    "solitary": {"sigma1": (float, False), "sigma2": (float, False),
                 "sigma": (float, False), "lam1": (float, False),
                 "lam2": (float, False), "c": (float, False)},
}


def _parse_initial(d: dict) -> dict:
    kind = _need(d, "type", "task.initial")
    if kind not in _INITIAL_KEYS:
        raise ConfigError(
            f"unknown initial-data type {kind!r}; expected one of "
            f"{sorted(_INITIAL_KEYS)}"
        )
    spec = _INITIAL_KEYS[kind]
    _reject_unknown({k: v for k, v in d.items() if k != "type"}, spec, "task.initial")
    out = {"type": kind}
    for key, (typ, required) in spec.items():
        if key in d:
            value = d[key]
            if typ is float:
                value = _as_number(value, key, "task.initial")
            elif typ is list and not isinstance(value, list):
                raise ConfigError(f"key {key!r} in task.initial must be a list")
            out[key] = value
        elif required:
            raise ConfigError(f"missing required key {key!r} in task.initial")
    return out


def _parse_task(d: dict) -> TaskConfig:
    name = _need(d, "name", "task")
    if name not in TASKS:
        raise ConfigError(f"unknown task {name!r}; expected one of {sorted(TASKS)}")
    spec = _TASK_KEYS[name]
    body = {k: v for k, v in d.items() if k != "name"}
    _reject_unknown(body, spec, f"task ({name})")
    options = {}
    for key, (typ, required) in spec.items():
        if key in body:
            value = body[key]
            if typ is float:
                value = _as_number(value, key, f"task ({name})")
            elif typ is int:
                if isinstance(value, bool) or not isinstance(value, int):
                    raise ConfigError(f"key {key!r} in task ({name}) must be an integer")
            elif typ is bool:
                if not isinstance(value, bool):
                    raise ConfigError(f"key {key!r} in task ({name}) must be a boolean")
            elif typ is dict:
                if not isinstance(value, dict):
                    raise ConfigError(f"key {key!r} in task ({name}) must be an object")
                if key == "initial":
                    value = _parse_initial(value)
            elif typ is list and not isinstance(value, list):
                raise ConfigError(f"key {key!r} in task ({name}) must be a list")
            options[key] = value
        elif required:
            raise ConfigError(f"missing required key {key!r} in task ({name})")
    if name == "sweep":
        for i, entry in enumerate(options["runs"]):
            if not isinstance(entry, dict):
                raise ConfigError(f"sweep run #{i} must be an object of overrides")
            if entry.get("task", {}).get("name") == "sweep":
                raise ConfigError("sweep runs cannot nest another sweep")
    return TaskConfig(name=name, options=options)


def parse_config_dict(doc: dict) -> RunConfig:
    _reject_unknown(
        doc, ("system", "params", "grid", "integrator", "task", "seed", "output"), ""
    )
    system = _need(doc, "system", "")
    if system not in SYSTEMS:
        raise ConfigError(f"unknown system {system!r}; expected one of {sorted(SYSTEMS)}")
    params = _parse_params(system, _need(doc, "params", ""))
    grid = _parse_grid(_need(doc, "grid", ""))
    integrator = _parse_integrator(doc.get("integrator", {}))
    task = _parse_task(_need(doc, "task", ""))
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError("key 'seed' must be an integer")
    output = doc.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("key 'output' must be a string path")
    return RunConfig(system=system, params=params, grid=grid,
                     integrator=integrator, task=task, seed=seed, output=output)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON config document (strict schema)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config is not valid JSON: {exc.msg} at line {exc.lineno}, "
            f"column {exc.colno}"
        ) from exc
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    return parse_config_dict(doc)


def _params_to_dict(params) -> dict:
    if isinstance(params, Params21):
        return {
            "alpha1": params.alpha1, "alpha2": params.alpha2,
            "gamma1": params.gamma1, "gamma2": params.gamma2,
            "beta": params.beta, "q1": params.q1, "q2": params.q2,
            "p": str(params.p),
        }
    return {
        "alpha1": params.alpha1, "alpha2": params.alpha2,
        "gamma": params.gamma, "q": params.q,
        "beta1": params.beta1, "beta2": params.beta2,
        "p1": str(params.p1), "p2": str(params.p2),
    }


def config_to_dict(cfg: RunConfig) -> dict:
    doc = {
        "system": cfg.system,
        "params": _params_to_dict(cfg.params),
        "grid": {"L": cfg.grid.L, "N": cfg.grid.N},
        "integrator": {
            "dt": cfg.integrator.dt,
            "scheme": cfg.integrator.scheme,
            "dealias": cfg.integrator.dealias,
            "monitor_stride": cfg.integrator.monitor_stride,
            "max_h1": cfg.integrator.max_h1,
        },
        "task": {"name": cfg.task.name, **cfg.task.options},
        "seed": cfg.seed,
    }
    if cfg.output is not None:
        doc["output"] = cfg.output
    return doc


def serialize_config(cfg: RunConfig) -> str:
    """Canonical JSON text: sorted keys, bit-stable float round trips."""
    return json.dumps(config_to_dict(cfg), sort_keys=True, indent=2) + "\n"
