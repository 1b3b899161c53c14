"""Task dispatch and bit-stable artifact serialization.

Every task writes delimited data (CSV), a JSON summary where appropriate, a
PNG figure, and a manifest.  Files are written atomically (temp file + rename)
and, apart from the manifest's wall time, are pure functions of (config, seed).
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, report
from .config import ConfigError, RunConfig, config_to_dict, parse_config_dict, serialize_config
from .conserved import ConservedReport
from .evolve import IntegratorConfig, Status, integrate
from .model import Params12, Params21, State12, State21
from .spectral import COMPLEX, REAL, Field, Grid, boost_phase
from .stability import stability_experiment
from .varsolve import MinimizerResult, SolverOptions, lambda_minimize, theta_minimize
from .waves import WaveParams, assemble_traveling, kdv_profile, nls_profile

FMT = "%.17g"


class NumericalFailure(RuntimeError):
    """Integration aborted (blow-up guard or non-finite samples)."""


class NonConvergence(RuntimeError):
    """A variational solve did not reach its tolerance."""


def atomic_write_text(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def json_text(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def trajectory_csv(reports: list[ConservedReport], header: str) -> str:
    lines = [header]
    lines.extend(r.csv_row(FMT) for r in reports)
    return "\n".join(lines) + "\n"


def fields_json(state) -> str:
    def pairs(f: Field):
        return [[float(np.real(z)), float(np.imag(z))] for z in f.values]

    if isinstance(state, State21):
        doc = {"t": state.t, "u1": pairs(state.u1), "u2": pairs(state.u2),
               "v": pairs(state.v)}
    else:
        doc = {"t": state.t, "u": pairs(state.u), "v1": pairs(state.v1),
               "v2": pairs(state.v2)}
    return json_text(doc)


def profile_csv(x, columns: dict) -> str:
    header = "x," + ",".join(columns)
    lines = [header]
    cols = list(columns.values())
    for i in range(len(x)):
        row = [FMT % x[i]] + [FMT % np.real(col[i]) for col in cols]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def minimizer_csv(res: MinimizerResult) -> str:
    x = res.w.grid.x
    lines = ["x,phi1_re,phi1_im,phi2_re,phi2_im,w"]
    for i in range(len(x)):
        lines.append(",".join(FMT % v for v in (
            x[i],
            np.real(res.phi1.values[i]), np.imag(res.phi1.values[i]),
            np.real(res.phi2.values[i]), np.imag(res.phi2.values[i]),
            np.real(res.w.values[i]),
        )))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# initial data builders


def _gaussian_state(cfg: RunConfig, spec: dict):
    grid = cfg.grid
    amps = spec["amplitudes"]
    widths = spec["widths"]
    if len(amps) != 3 or len(widths) != 3:
        raise ConfigError("gaussian initial data needs 3 amplitudes and 3 widths")
    centers = spec.get("centers", [0.0, 0.0, 0.0])
    if len(centers) != 3:
        raise ConfigError("gaussian initial data needs 3 centers")
    windings = spec.get("windings", [0, 0])
    bumps = [a * np.exp(-((grid.x - c) / w) ** 2)
             for a, w, c in zip(amps, widths, centers)]
    if cfg.system == "two-plus-one":
        tilt1 = boost_phase(grid, 2 * np.pi * windings[0] / grid.L)
        tilt2 = boost_phase(grid, 2 * np.pi * windings[1] / grid.L)
        return State21(
            u1=Field(grid, bumps[0] * tilt1, COMPLEX),
            u2=Field(grid, bumps[1] * tilt2, COMPLEX),
            v=Field(grid, bumps[2], REAL),
        )
    tilt = boost_phase(grid, 2 * np.pi * windings[0] / grid.L)
    return State12(
        u=Field(grid, bumps[0] * tilt, COMPLEX),
        v1=Field(grid, bumps[1], REAL),
        v2=Field(grid, bumps[2], REAL),
    )


def _solitary_state(cfg: RunConfig, spec: dict):
    grid = cfg.grid
    prm = cfg.params
    if cfg.system == "two-plus-one":
        c = spec.get("c", 0.0)
        sigma1 = spec.get("sigma1", 1.0)
        sigma2 = spec.get("sigma2", 1.0)
        phi1 = nls_profile(prm.q1, prm.gamma1 / (prm.q1 + 2.0), sigma1, grid)
        phi2 = nls_profile(prm.q2, prm.gamma2 / (prm.q2 + 2.0), sigma2, grid)
        lam3 = spec.get("lam1", c if c > 0 else 1.0)
        w = kdv_profile(prm.p, prm.beta, lam3, grid)
        wp = WaveParams.from_multipliers(sigma1, sigma2, c)
        return assemble_traveling(phi1, phi2, w, wp, t=0.0)
    sigma = spec.get("sigma", 1.0)
    lam1 = spec.get("lam1", 1.0)
    lam2 = spec.get("lam2", 1.0)
    u = nls_profile(prm.q, prm.gamma / (prm.q + 2.0), sigma, grid)
    return State12(
        u=Field(grid, u.values, COMPLEX),
        v1=kdv_profile(prm.p1, prm.beta1, lam1, grid),
        v2=kdv_profile(prm.p2, prm.beta2, lam2, grid),
    )


def build_initial_state(cfg: RunConfig, spec: dict):
    if spec["type"] == "gaussian":
        return _gaussian_state(cfg, spec)
    return _solitary_state(cfg, spec)


# ---------------------------------------------------------------------------
# task implementations


def _solver_options(options: dict) -> SolverOptions:
    kwargs = {}
    if "tol" in options:
        kwargs["tol"] = options["tol"]
    if "max_iters" in options:
        kwargs["max_iters"] = options["max_iters"]
    return SolverOptions(**kwargs)


def _task_simulate(cfg: RunConfig, out: Path) -> dict:
    state0 = build_initial_state(cfg, cfg.task.options["initial"])
    traj = integrate(state0, cfg.params, cfg.integrator, cfg.task.options["T"])
    header = (ConservedReport.CSV_HEADER_21 if cfg.system == "two-plus-one"
              else ConservedReport.CSV_HEADER_12)
    atomic_write_text(out / "trajectory.csv", trajectory_csv(traj.reports, header))
    if cfg.task.options.get("dump_fields", False):
        atomic_write_text(out / "fields.json", fields_json(traj.final_state))
    report.trajectory_figure(traj, out / "trajectory.png")
    last = traj.reports[-1]
    verdict = {
        "status": traj.status.value,
        "final_time": last.time,
        "max_drift": max(last.drift_energy, last.drift_momentum,
                         *last.drift_masses),
    }
    if traj.status is not Status.COMPLETED:
        raise NumericalFailure(json.dumps(verdict, sort_keys=True))
    return verdict


def _task_soliton(cfg: RunConfig, out: Path) -> dict:
    prm = cfg.params
    c_speed = cfg.task.options["C"]
    if cfg.system == "two-plus-one":
        prof = kdv_profile(prm.p, prm.beta, c_speed, cfg.grid)
    else:
        prof = kdv_profile(prm.p1, prm.beta1, c_speed, cfg.grid)
    vals = np.real(prof.values)
    atomic_write_text(out / "soliton.csv", profile_csv(cfg.grid.x, {"value": vals}))
    report.profile_figure(cfg.grid.x, {"w": vals}, out / "soliton.png",
                          title=f"long-wave soliton, multiplier C = {c_speed:g}")
    return {"peak": float(np.max(vals)), "mass": float(np.sum(vals**2) * cfg.grid.dx)}


def _require_21(cfg: RunConfig, what: str) -> Params21:
    if cfg.system != "two-plus-one":
        raise ConfigError(f"task {what!r} is defined for the two-plus-one system")
    return cfg.params


def _task_groundstate(cfg: RunConfig, out: Path) -> dict:
    prm = _require_21(cfg, "groundstate")
    o = cfg.task.options
    res = theta_minimize(o["r"], o["l"], o["m"], prm, cfg.grid, _solver_options(o))
    atomic_write_text(out / "groundstate.json", json_text(res.summary_dict()))
    atomic_write_text(out / "groundstate.csv", minimizer_csv(res))
    report.minimizer_figure(res, out / "groundstate.png")
    verdict = dict(res.summary_dict())
    verdict["min_w"] = float(np.min(np.real(res.w.values)))
    if not res.converged:
        raise NonConvergence(json.dumps(verdict, sort_keys=True))
    return verdict


def _task_lambda(cfg: RunConfig, out: Path) -> dict:
    prm = _require_21(cfg, "lambda")
    o = cfg.task.options
    res = lambda_minimize(o["r"], o["l"], o["m"], prm, cfg.grid, _solver_options(o))
    doc = res.summary_dict()
    doc["momentum"] = res.momentum
    doc["boost_b"] = res.boost_b
    atomic_write_text(out / "lambda.json", json_text(doc))
    atomic_write_text(out / "lambda.csv", minimizer_csv(res))
    report.minimizer_figure(res, out / "lambda.png")
    if not res.converged:
        raise NonConvergence(json.dumps(doc, sort_keys=True))
    return doc


def _task_stability(cfg: RunConfig, out: Path) -> dict:
    prm = _require_21(cfg, "stability")
    o = cfg.task.options
    ref = lambda_minimize(o["r"], o["l"], o["m"], prm, cfg.grid, _solver_options(o))
    if not ref.converged:
        raise NonConvergence("reference minimizer did not converge")
    rec = stability_experiment(ref, o["delta"], o["T"], prm, cfg.integrator,
                               seed=cfg.seed)
    rows = ["t,d,driftE,driftH"]
    for t, d in zip(rec.times, rec.distances):
        rows.append(",".join(FMT % v for v in (t, d, rec.drift_energy,
                                               rec.drift_momentum)))
    atomic_write_text(out / "stability.csv", "\n".join(rows) + "\n")
    doc = {
        "delta": rec.delta, "verdict": rec.verdict, "ratio": rec.ratio,
        "t_escape": rec.t_escape, "status": rec.status,
        "drift_energy": rec.drift_energy, "drift_momentum": rec.drift_momentum,
        "drift_masses": list(rec.drift_masses),
    }
    atomic_write_text(out / "stability.json", json_text(doc))
    report.stability_figure(rec, out / "stability.png")
    if rec.status != Status.COMPLETED.value:
        raise NumericalFailure(json.dumps(doc, sort_keys=True))
    return doc


def _merge_override(base: dict, override: dict) -> dict:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge_override(merged[key], value)
        else:
            merged[key] = value
    return merged


def _task_sweep(cfg: RunConfig, out: Path, threads: int) -> dict:
    base_doc = config_to_dict(cfg)
    del base_doc["task"]
    runs = cfg.task.options["runs"]
    sub_docs = []
    for i, override in enumerate(runs):
        doc = _merge_override(base_doc, override)
        doc.setdefault("task", override.get("task"))
        if doc.get("task") is None:
            raise ConfigError(f"sweep run #{i} does not define a task")
        doc.pop("output", None)
        sub_docs.append(doc)

    def one(i_doc):
        i, doc = i_doc
        sub_cfg = parse_config_dict(doc)
        sub_out = out / f"run_{i:04d}"
        return i, run(sub_cfg, sub_out, threads=1)

    results = {}
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        for i, result in pool.map(one, enumerate(sub_docs)):
            results[f"run_{i:04d}"] = {
                "exit_code": result.exit_code,
                "verdicts": result.verdicts,
            }
    worst = max(r["exit_code"] for r in results.values())
    if worst != 0:
        raise NumericalFailure(json.dumps(results, sort_keys=True))
    return results


@dataclass
class RunResult:
    exit_code: int
    verdicts: dict
    error: dict | None = None


def run(cfg: RunConfig, out_dir, threads: int = 1) -> RunResult:
    """Execute one config; artifacts land in out_dir; returns verdicts + exit code."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.monotonic()
    config_text = serialize_config(cfg)
    digest = hashlib.sha256(config_text.encode()).hexdigest()
    atomic_write_text(out / "config.json", config_text)

    error = None
    exit_code = 0
    verdicts: dict = {}
    try:
        if cfg.task.name == "simulate":
            verdicts = _task_simulate(cfg, out)
        elif cfg.task.name == "soliton":
            verdicts = _task_soliton(cfg, out)
        elif cfg.task.name == "groundstate":
            verdicts = _task_groundstate(cfg, out)
        elif cfg.task.name == "lambda":
            verdicts = _task_lambda(cfg, out)
        elif cfg.task.name == "stability":
            verdicts = _task_stability(cfg, out)
        elif cfg.task.name == "sweep":
            verdicts = _task_sweep(cfg, out, threads)
    except ConfigError as exc:
        exit_code, error = 2, {"kind": "config", "message": str(exc)}
    except NonConvergence as exc:
        exit_code, error = 4, {"kind": "non-convergence", "message": str(exc)}
    except (NumericalFailure, FloatingPointError) as exc:
        exit_code, error = 3, {"kind": "numerical", "message": str(exc)}
    except ValueError as exc:
        # admissibility failures surfaced by library preconditions
        exit_code, error = 2, {"kind": "config", "message": str(exc)}

    manifest = {
        "config_sha256": digest,
        "versions": {"dlab": __version__, "numpy": np.__version__},
        "wall_time_s": time.monotonic() - started,
        "verdicts": verdicts,
        "error": error,
        "exit_code": exit_code,
    }
    atomic_write_text(out / "manifest.json", json_text(manifest))
    return RunResult(exit_code=exit_code, verdicts=verdicts, error=error)
