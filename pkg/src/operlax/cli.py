"""Command-line front end: simulation runs, verification suites, bracket tool.

Exit codes are fixed: 0 when everything passed, 1 for runtime or check
failures, 2 for usage and configuration errors.  All numeric output uses
shortest round-trip decimal formatting capped at 17 significant digits, and
every random suite is driven by a single ``--seed`` through the documented
PCG64 streams, so identical invocations produce identical reports.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass

from .calculus import gerstenhaber_bracket, operad_law_suite
from .errors import ConfigError, DegenerateStateError, DivergenceError
from .evolution import (
    IntegratorConfig,
    evolve,
    pde_suite,
    theorem_suite,
    trajectory_csv_lines,
)
from .multilinear import operation_from_dict, operation_to_dict
from .oscillator import MuParams, OscState, hamiltonian, proof_identity_suite

MODES = ("simulate", "verify-operad", "verify-theorem", "verify-identities", "pde-check")

_DEFAULTS = {
    "simulate": {"dt": 1e-3, "t_end": 20.0, "record_every": 1, "c": (0.0,) * 8, "seed": 0},
    "verify-operad": {"trials": 200, "tol": 1e-10, "seed": 0},
    "verify-theorem": {"trials": 20, "tol": 1e-6, "seed": 0, "dt": 1e-3, "t_end": 20.0},
    "verify-identities": {"trials": 1000, "tol": 1e-12, "seed": 0},
    "pde-check": {"trials": 100, "tol": 1e-8, "seed": 0},
}

_FIELDS = ("omega", "q0", "p0", "c", "dt", "t_end", "record_every", "trials", "tol", "seed", "out")


@dataclass(frozen=True)
class RunConfig:
    mode: str
    omega: float | None = None
    q0: float | None = None
    p0: float | None = None
    c: tuple | None = None
    dt: float | None = None
    t_end: float | None = None
    record_every: int | None = None
    trials: int | None = None
    tol: float | None = None
    seed: int | None = None
    out: str | None = None


def _parse_c(value) -> tuple:
    if isinstance(value, str):
        parts = value.split(",")
    else:
        parts = list(value)
    if len(parts) != 8:
        raise ConfigError(f"c: expected 8 comma-separated values, got {len(parts)}")
    try:
        return tuple(float(x) for x in parts)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"c: {exc}") from exc


def _validated(cfg: RunConfig) -> RunConfig:
    def bad(field, why):
        raise ConfigError(f"{field}: {why}")

    if cfg.mode not in MODES:
        bad("mode", f"must be one of {MODES}, got {cfg.mode!r}")
    if cfg.dt is not None and not (isinstance(cfg.dt, (int, float)) and cfg.dt > 0):
        bad("dt", f"must be a positive number, got {cfg.dt!r}")
    if cfg.t_end is not None and not (isinstance(cfg.t_end, (int, float)) and cfg.t_end > 0):
        bad("t_end", f"must be a positive number, got {cfg.t_end!r}")
    if cfg.omega is not None and not (isinstance(cfg.omega, (int, float)) and cfg.omega > 0):
        bad("omega", f"must be a positive number, got {cfg.omega!r}")
    if cfg.record_every is not None and (not isinstance(cfg.record_every, int) or cfg.record_every < 1):
        bad("record_every", f"must be a positive integer, got {cfg.record_every!r}")
    if cfg.trials is not None and (not isinstance(cfg.trials, int) or cfg.trials < 1):
        bad("trials", f"must be a positive integer, got {cfg.trials!r}")
    if cfg.tol is not None and not (isinstance(cfg.tol, (int, float)) and cfg.tol > 0):
        bad("tol", f"must be a positive number, got {cfg.tol!r}")
    if cfg.seed is not None and (not isinstance(cfg.seed, int) or not 0 <= cfg.seed < 2 ** 64):
        bad("seed", f"must be an unsigned 64-bit integer, got {cfg.seed!r}")
    for name in ("omega", "q0", "p0"):
        v = getattr(cfg, name)
        if v is not None and not (isinstance(v, (int, float)) and math.isfinite(v)):
            bad(name, f"must be a finite number, got {v!r}")
    if cfg.mode == "simulate":
        for name in ("omega", "q0", "p0"):
            if getattr(cfg, name) is None:
                bad(name, "is required for simulate")
    return cfg


def _read_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be a JSON object")
    unknown = set(raw) - set(_FIELDS) - {"mode"}
    if unknown:
        raise ConfigError(f"config: unknown fields {sorted(unknown)}")
    if "c" in raw and raw["c"] is not None:
        raw["c"] = _parse_c(raw["c"])
    for name in ("record_every", "trials", "seed"):
        if name in raw and raw[name] is not None and isinstance(raw[name], float):
            if raw[name] != int(raw[name]):
                raise ConfigError(f"{name}: must be an integer, got {raw[name]!r}")
            raw[name] = int(raw[name])
    return raw


def load_config(path: str) -> RunConfig:
    """Read a flat JSON config file and return the validated RunConfig."""
    raw = _read_config_file(path)
    if "mode" not in raw:
        raise ConfigError("mode: missing from config file")
    return build_config(str(raw["mode"]), {}, raw)


def build_config(mode: str, flags: dict, file_values: dict) -> RunConfig:
    """Merge flag values over file values over mode defaults, then validate."""
    merged = dict(_DEFAULTS.get(mode, {}))
    merged.update({k: v for k, v in file_values.items() if k != "mode" and v is not None})
    merged.update({k: v for k, v in flags.items() if v is not None})
    if "c" in merged and merged["c"] is not None:
        merged["c"] = _parse_c(merged["c"])
    return _validated(RunConfig(mode=mode, **{k: merged.get(k) for k in _FIELDS}))


def _write_text(path: str | None, text: str):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _report_json(suite: str, seed: int, checks) -> tuple[dict, bool]:
    checks = sorted(checks, key=lambda r: r.law_name)
    overall = all(c.passed for c in checks)
    obj = {
        "suite": suite,
        "seed": int(seed),
        "checks": [c.to_dict() for c in checks],
        "overall_pass": overall,
        "wall_time_seconds": 0.0,
    }
    return obj, overall


def cmd_simulate(cfg: RunConfig) -> int:
    if cfg.out is None:
        raise ConfigError("out: simulate needs an output path for the CSV")
    state = OscState(cfg.omega, cfg.q0, cfg.p0)
    if hamiltonian(state) <= 0.0:
        raise ConfigError("q0/p0: degenerate energy (H = 0); nothing to evolve")
    try:
        icfg = IntegratorConfig(
            dt=cfg.dt,
            t_end=cfg.t_end,
            omega=cfg.omega,
            q0=cfg.q0,
            p0=cfg.p0,
            params=MuParams(cfg.c),
            record_every=cfg.record_every,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    traj = evolve(icfg)
    _write_text(cfg.out, "\n".join(trajectory_csv_lines(traj)) + "\n")
    print(
        f"simulate: records={len(traj.records)} "
        f"max_err_mu_max={traj.max_err_mu()!r} "
        f"max_energy_drift={traj.max_energy_drift()!r}"
    )
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    started = time.monotonic()
    if cfg.mode == "verify-operad":
        checks = operad_law_suite(cfg.trials, cfg.seed, cfg.tol)
    elif cfg.mode == "verify-theorem":
        if cfg.dt > 0.05:
            raise ConfigError("dt: theorem trials sample omega up to 2, so dt must be <= 0.05")
        checks = theorem_suite(cfg.trials, cfg.seed, cfg.tol, dt=cfg.dt, t_end=cfg.t_end)
    elif cfg.mode == "verify-identities":
        checks = proof_identity_suite(cfg.trials, cfg.seed, cfg.tol)
    elif cfg.mode == "pde-check":
        checks = pde_suite(cfg.trials, cfg.seed, cfg.tol)
    else:  # pragma: no cover - guarded by argparse choices
        raise ConfigError(f"mode: {cfg.mode} is not a verification mode")
    obj, overall = _report_json(cfg.mode, cfg.seed, checks)
    obj["wall_time_seconds"] = time.monotonic() - started
    _write_text(cfg.out, json.dumps(obj, indent=2) + "\n")
    return 0 if overall else 1


def cmd_bracket(first: str, second: str, out: str | None) -> int:
    ops = []
    for path in (first, second):
        try:
            with open(path) as fh:
                ops.append(operation_from_dict(json.load(fh)))
        except (OSError, json.JSONDecodeError, ValueError) as exc:
            raise ConfigError(f"operation file {path}: {exc}") from exc
    try:
        result = gerstenhaber_bracket(ops[0], ops[1])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    _write_text(out, json.dumps(operation_to_dict(result)) + "\n")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="operlax",
        description="Operadic Lax flows of the harmonic oscillator: simulate and verify.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, *, trials=False):
        p.add_argument("--config", help="JSON file with the same keys as the flags")
        p.add_argument("--seed", type=int, default=None, help="root PRNG seed")
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        if trials:
            p.add_argument("--trials", type=int, default=None)
            p.add_argument("--tol", type=float, default=None)

    sim = sub.add_parser("simulate", help="integrate one configuration and write a CSV trajectory")
    sim.add_argument("--omega", type=float, default=None)
    sim.add_argument("--q0", type=float, default=None)
    sim.add_argument("--p0", type=float, default=None)
    sim.add_argument("--c", default=None, help="C1,...,C8 family parameters")
    sim.add_argument("--dt", type=float, default=None)
    sim.add_argument("--t-end", dest="t_end", type=float, default=None)
    sim.add_argument("--record-every", dest="record_every", type=int, default=None)
    add_common(sim)

    ver = sub.add_parser("verify", help="run a randomized verification suite")
    ver.add_argument("suite", choices=["operad", "theorem", "identities"])
    ver.add_argument("--dt", type=float, default=None)
    ver.add_argument("--t-end", dest="t_end", type=float, default=None)
    add_common(ver, trials=True)

    pde = sub.add_parser("pde-check", help="finite-difference residuals of the defining PDE")
    add_common(pde, trials=True)

    br = sub.add_parser("bracket", help="bracket of two operation JSON files")
    br.add_argument("first")
    br.add_argument("second")
    br.add_argument("--out", default=None)

    return parser


def _flags_dict(args: argparse.Namespace) -> dict:
    return {k: getattr(args, k) for k in _FIELDS if hasattr(args, k)}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "bracket":
            return cmd_bracket(args.first, args.second, args.out)
        mode = args.command if args.command != "verify" else f"verify-{args.suite}"
        file_values = _read_config_file(args.config) if args.config else {}
        cfg = build_config(mode, _flags_dict(args), file_values)
        if mode == "simulate":
            return cmd_simulate(cfg)
        return cmd_verify(cfg)
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"operlax: error: {exc}", file=sys.stderr)
        return 2
    except (DegenerateStateError, DivergenceError, OSError) as exc:
        print(f"operlax: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
