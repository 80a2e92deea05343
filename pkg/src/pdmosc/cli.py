"""Command-line front end.

    pdmosc <command> --config run.json [--out path] [--set key.path=value ...]

Exit codes: 0 success, 2 config validation, 3 solver failure, 4 no bound states
for the requested ordering.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import classical, eigensolve, quantum
from .config import ConfigError, RunConfig, load_raw, parse_config, parse_override, set_path
from .errors import (
    AdmissibilityError,
    AmplitudeDomainError,
    DomainError,
    GridTooCoarse,
    IntegrationError,
)
from .model import ClassicalState, ModelParams, hamiltonian, momentum

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_QUANTUM = 0, 2, 3, 4

COMMANDS = ("simulate", "period-sweep", "spectrum", "eigensolve", "wavefunction",
            "phase-portrait", "linearize-check")

# shortcut flags and the config keys they set
_SHORTCUTS = {"omega": "model.omega", "a": "model.a", "m0": "m0",
              "alpha": "ambiguity.alpha", "beta": "ambiguity.beta"}


# --- output -----------------------------------------------------------------

def _fmt(v) -> str:
    return "%.17g" % v


def csv_text(header: list[str], columns) -> str:
    """Comma-separated table with a single header line; floats at 17 significant digits."""
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    buf = io.StringIO()
    np.savetxt(buf, data, fmt="%.17g", delimiter=",", header=",".join(header), comments="")
    return buf.getvalue()


def json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _floats(a) -> list[float]:
    return [float(v) for v in np.asarray(a, dtype=float)]


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# --- helpers shared by commands ---------------------------------------------

def _require(block, name: str):
    if block is None:
        raise ConfigError(f"{name}: block required for this command")
    return block


def _quantum_cfg(cfg: RunConfig, ambiguity=None) -> quantum.QuantumConfig:
    amb = ambiguity if ambiguity is not None else _require(cfg.ambiguity, "ambiguity")
    return quantum.QuantumConfig(cfg.model.params(), amb.triple(), cfg.m0)


def _initial_state(block, params: ModelParams) -> ClassicalState:
    if block.initial is not None:
        return ClassicalState(block.initial.x, block.initial.xdot)
    sol = classical.OrbitSolution(block.energy, block.theta0, params)
    return classical.orbit_state(sol, 0.0)


def _messages(caught) -> list[str]:
    return list(dict.fromkeys(str(w.message) for w in caught))


def _report(cfg: RunConfig, command: str, caught, **body) -> dict:
    return {"command": command, "config": cfg.resolved(), "warnings": _messages(caught), **body}


# --- commands ---------------------------------------------------------------

def cmd_simulate(cfg: RunConfig, caught) -> str:
    block = _require(cfg.simulate, "simulate")
    params = cfg.model.params()
    state = _initial_state(block, params)
    traj = classical.integrate(state, block.t_end, block.tol, params, block.n_samples)
    p = momentum(traj.x, traj.xdot, params)
    H = hamiltonian(traj.x, p, params)
    return csv_text(["t", "x", "xdot", "p", "H"], [traj.times, traj.x, traj.xdot, p, H])


def _sweep_row(E: float, params: ModelParams, block) -> tuple[float, float, str]:
    if not abs(E / (params.a * params.omega)) > 1 or E <= 0:
        return math.nan, math.nan, "unbounded/forbidden"
    t_end = block.periods * math.pi / params.omega
    try:
        state = classical.turning_state(E, params, "max")
        traj = classical.integrate(state, t_end, block.tol, params)
        T = classical.measure_period(traj)
    except (IntegrationError, DomainError, AmplitudeDomainError) as exc:
        return math.nan, math.nan, f"error: {type(exc).__name__}"
    return T, T * params.omega / math.pi, "ok"


def cmd_period_sweep(cfg: RunConfig, caught) -> tuple[str, bool]:
    block = _require(cfg.period_sweep, "period_sweep")
    params = cfg.model.params()
    with ThreadPoolExecutor(max_workers=block.workers) as pool:
        rows = list(pool.map(lambda E: _sweep_row(E, params, block), block.energies))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["E", "T", "T_omega_over_pi", "status"])
    for E, (T, ratio, status) in zip(block.energies, rows):
        w.writerow([_fmt(E), _fmt(T), _fmt(ratio), status])
    return buf.getvalue(), any(r[2] != "ok" for r in rows)


def _solver_block(qcfg, result: eigensolve.EigenResult, exact: np.ndarray) -> dict:
    return {
        "values": _floats(result.values),
        "est_error": _floats(result.est_error),
        "abs_error": _floats(np.abs(result.values - exact)),
        "gaps": _floats(np.diff(result.values)),
        "grid": result.grid.describe(),
        "extrapolated": result.extrapolated,
        "reduced_confidence": result.reduced_confidence,
    }


def _spectrum_entry(cfg: RunConfig, amb, levels: int, do_refine: bool) -> dict:
    qcfg = _quantum_cfg(cfg, amb)
    exact = quantum.analytic_spectrum(qcfg, levels).E
    entry = {
        "alpha": amb.alpha, "beta": amb.beta, "gamma": qcfg.ambiguity.gamma,
        "epsilon": qcfg.epsilon,
        "analytic": {"values": _floats(exact),
                     "gaps": _floats(quantum.analytic_gaps(qcfg, levels))},
    }
    for name, solver in (("xi_space", eigensolve.solve_xi_space),
                         ("x_space", eigensolve.solve_x_space)):
        res = solver(qcfg, k=levels)
        if do_refine:
            res = eigensolve.refine(res, qcfg)
        entry[name] = _solver_block(qcfg, res, exact)
    return entry


def cmd_spectrum(cfg: RunConfig, caught) -> str:
    block = cfg.spectrum
    triples = block.triples or [_require(cfg.ambiguity, "ambiguity")]
    # validate every triple before spending time on any solve
    for amb in triples:
        _quantum_cfg(cfg, amb)
    with ThreadPoolExecutor(max_workers=block.workers) as pool:
        entries = list(pool.map(
            lambda amb: _spectrum_entry(cfg, amb, block.levels, block.refine), triples))
    return json_text(_report(cfg, "spectrum", caught, levels=block.levels, triples=entries))


def cmd_eigensolve(cfg: RunConfig, caught) -> str:
    block = cfg.eigensolve
    qcfg = _quantum_cfg(cfg)
    k = block.levels
    if block.method == "xi":
        grid = eigensolve.default_xi_grid(qcfg, k)
        solver, default_n = eigensolve.solve_xi_space, eigensolve.XI_POINTS
    else:
        grid = eigensolve.default_x_grid(qcfg, k)
        solver, default_n = eigensolve.solve_x_space, eigensolve.X_POINTS
    if block.hi is not None or block.n_points is not None:
        grid = eigensolve.EigenGrid.from_origin(block.hi or grid.hi, block.n_points or default_n)
    res = solver(qcfg, grid, k, tol=block.tol)
    exact = quantum.analytic_spectrum(qcfg, k).E
    body = {"raw": _solver_block(qcfg, res, exact), "order": _floats(res.order)}
    if block.refine:
        body["refined"] = _solver_block(qcfg, eigensolve.refine(res, qcfg), exact)
    body["analytic"] = _floats(exact)
    return json_text(_report(cfg, "eigensolve", caught, method=res.method, **body))


def cmd_wavefunction(cfg: RunConfig, caught) -> str:
    block = cfg.wavefunction
    qcfg = _quantum_cfg(cfg)
    xi = np.linspace(0.0, block.xi_max, block.n_points + 1)[1:]
    x = quantum.inverse_map(xi, qcfg)
    cols = [xi, x, quantum.effective_potential(xi, qcfg)]
    phis = [quantum.wavefunction_phi(n, xi, qcfg) for n in range(block.levels)]
    psis = [quantum.wavefunction_psi(n, x, qcfg) for n in range(block.levels)]
    header = (["xi", "x", "V_eff"] + [f"phi_{n}" for n in range(block.levels)]
              + [f"psi_{n}" for n in range(block.levels)])
    return csv_text(header, cols + phis + psis)


def cmd_phase_portrait(cfg: RunConfig, caught) -> tuple[str, str]:
    block = cfg.phase_portrait
    params = cfg.model.params()
    s, w = params.sign, params.omega
    xr = block.x_range or (s * 0.02 / w, s * 1.0 / w)
    vr = block.xdot_range or (-1.0, 1.0)
    X, V = np.meshgrid(np.linspace(*xr, block.nx), np.linspace(*vr, block.nv), indexing="ij")
    X, V = X.ravel(), V.ravel()
    dx, dv = classical.rhs(ClassicalState(X, V), params)
    H = hamiltonian(X, momentum(X, V, params), params)
    table = csv_text(["x", "xdot", "dx", "dxdot", "H"], [X, V, dx, dv, H])
    points = []
    for fp in classical.fixed_points(params):
        eig = np.linalg.eigvals(classical.jacobian(fp, params))
        points.append({"x": fp.x, "xdot": fp.xdot,
                       "eigenvalues": [[float(e.real), float(e.imag)] for e in eig],
                       "energy": float(hamiltonian(fp.x, 0.0, params))})
    summary = {"command": "phase-portrait", "fixed_points": points}
    return table, json.dumps(summary, sort_keys=True)


def cmd_linearize_check(cfg: RunConfig, caught) -> tuple[str, str]:
    block = _require(cfg.linearize_check, "linearize_check")
    params = cfg.model.params()
    state = _initial_state(block, params)
    t_end = block.periods * math.pi / params.omega
    traj = classical.integrate(state, t_end, block.tol, params, block.n_samples)
    wit = classical.linearization_witness(traj, step=block.step)
    table = csv_text(["t", "abs_X", "residual"], [wit.times, np.abs(wit.X), wit.residual])
    summary = {"command": "linearize-check", "max_residual": float(np.max(wit.residual)),
               "scale": wit.scale, "relative_max": wit.relative_max,
               "energy_drift": traj.energy_drift}
    return table, json.dumps(summary, sort_keys=True)


# --- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pdmosc", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--out", help="output file (default: stdout)")
    parser.add_argument("--set", action="append", default=[], metavar="KEY.PATH=VALUE",
                        help="override a config value; VALUE is parsed as JSON")
    for flag in _SHORTCUTS:
        parser.add_argument(f"--{flag}", type=float, help=f"override {_SHORTCUTS[flag]}")
    return parser


def resolve_config(args) -> RunConfig:
    raw = load_raw(args.config)
    for text in args.set:
        set_path(raw, *parse_override(text))
    for flag, path in _SHORTCUTS.items():
        value = getattr(args, flag)
        if value is not None:
            set_path(raw, path, value)
    return parse_config(raw)


def run(args) -> int:
    cfg = resolve_config(args)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        failed = False
        side = None
        if args.command == "simulate":
            text = cmd_simulate(cfg, caught)
        elif args.command == "period-sweep":
            text, failed = cmd_period_sweep(cfg, caught)
        elif args.command == "spectrum":
            text = cmd_spectrum(cfg, caught)
        elif args.command == "eigensolve":
            text = cmd_eigensolve(cfg, caught)
        elif args.command == "wavefunction":
            text = cmd_wavefunction(cfg, caught)
        elif args.command == "phase-portrait":
            text, side = cmd_phase_portrait(cfg, caught)
        else:
            text, side = cmd_linearize_check(cfg, caught)
    for msg in _messages(caught):
        print(f"warning: {msg}", file=sys.stderr)
    _emit(text, args.out)
    if side is not None:
        print(side, file=sys.stderr)
    if failed:
        print("error: one or more sweep rows failed; see the status column", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AdmissibilityError as exc:
        print(f"inadmissible ordering: {exc}; bound states need a^2 + eps >= 1/4",
              file=sys.stderr)
        return EXIT_QUANTUM
    except (AmplitudeDomainError, DomainError) as exc:
        print(f"config error: invalid initial condition: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, GridTooCoarse) as exc:
        print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
