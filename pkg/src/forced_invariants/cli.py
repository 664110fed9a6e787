"""Command-line front end.

Subcommands: simulate, drift, verify-pde, sweep, particular. Configuration is
one flat JSON document (``--config path`` or ``--config -`` for stdin);
precedence is flags > file > defaults.

``drift`` and ``verify-pde`` always emit JSON; the table commands honour
``--format``. Exit codes: 0 success, 2 configuration error, 3 numerical abort.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .dynamics import TimeGrid, integrate_oscillator
from .errors import NumericalAbort, ParameterError, SingularityError
from .invariants import AnglePolicy, InvariantKind, build_invariant
from .particular import particular_solution_sinusoidal, steady_amplitude
from .systems import EPS_CRIT, EPS_RES, OscillatorParams
from .verification import DRIFT_FLOOR, drift, random_points, residual_study

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

INVARIANT_CHOICES = ("auto",) + tuple(k.value for k in InvariantKind)


class ConfigError(ValueError):
    def __init__(self, field_name, message):
        super().__init__(f"invalid config field '{field_name}': {message}")
        self.field = field_name


@dataclass
class RunConfig:
    m: float = 1.0
    omega: float = 1.0
    lam: float = 0.0
    amp: float = 1.0
    cap_omega: float = 2.0
    x0: float = 1.0
    v0: float = 0.0
    t_start: float = 0.0
    t_end: float = 50.0
    dt: float = 1e-3
    method: str = "RK4"
    invariant: str = "auto"
    policy: str = "unwrapped"
    format: str = "csv"
    seed: int = 0
    eps_res: float = EPS_RES
    eps_crit: float = EPS_CRIT
    drift_floor: float = DRIFT_FLOOR
    points: int = 20
    h: list = field(default_factory=lambda: [1e-2, 5e-3, 2.5e-3])
    omega_min: float = 0.5
    omega_max: float = 1.5
    count: int = 21

    # JSON/flag spelling -> attribute
    ALIASES = {"lambda": "lam", "cap-omega": "cap_omega", "t-end": "t_end", "t-start": "t_start",
               "eps-res": "eps_res", "eps-crit": "eps_crit", "drift-floor": "drift_floor",
               "omega-min": "omega_min", "omega-max": "omega_max"}

    def params(self) -> OscillatorParams:
        return OscillatorParams(self.m, self.omega, self.lam, self.amp, self.cap_omega)

    def grid(self) -> TimeGrid:
        return TimeGrid(self.t_start, self.t_end, self.dt)

    def angle_policy(self) -> AnglePolicy:
        return AnglePolicy(self.policy)


def _coerce(name, value, default):
    try:
        if isinstance(default, bool):
            return bool(value)
        if isinstance(default, int):
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        if isinstance(default, float):
            if isinstance(value, bool):
                raise ValueError
            return float(value)
        if isinstance(default, list):
            return [float(v) for v in value]
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(name, f"cannot interpret {value!r}") from None


def load_config(doc: dict | None, overrides: dict) -> RunConfig:
    cfg = RunConfig()
    defaults = {f.name: getattr(cfg, f.name) for f in dataclasses.fields(cfg)}
    for source in (doc or {}, overrides):
        for key, value in source.items():
            if value is None:
                continue
            name = RunConfig.ALIASES.get(key, key.replace("-", "_"))
            if name not in defaults:
                raise ConfigError(key, "unknown field")
            setattr(cfg, name, _coerce(key, value, defaults[name]))
    validate(cfg)
    return cfg


def validate(cfg: RunConfig):
    try:
        cfg.params()
        cfg.grid()
    except ParameterError as exc:
        raise ConfigError(exc.field or "params", str(exc)) from None
    if cfg.method.upper() not in ("RK4", "RK45"):
        raise ConfigError("method", "must be RK4 or RK45")
    if cfg.invariant not in INVARIANT_CHOICES:
        raise ConfigError("invariant", f"must be one of {', '.join(INVARIANT_CHOICES)}")
    if cfg.policy not in ("principal", "unwrapped"):
        raise ConfigError("policy", "must be principal or unwrapped")
    if cfg.format not in ("csv", "json"):
        raise ConfigError("format", "must be csv or json")
    for name in ("eps_res", "eps_crit", "drift_floor"):
        if not getattr(cfg, name) >= 0:
            raise ConfigError(name, "must be >= 0")
    if cfg.points < 1:
        raise ConfigError("points", "must be >= 1")
    if cfg.count < 1:
        raise ConfigError("count", "must be >= 1")
    if not 0 <= cfg.omega_min <= cfg.omega_max:
        raise ConfigError("omega_min", "need 0 <= omega_min <= omega_max")


# --- formatting -----------------------------------------------------------------

def fmt(value) -> str:
    if isinstance(value, str):
        return value
    return format(float(value), ".17g")


def write_table(out, header, rows, cfg: RunConfig):
    if cfg.format == "json":
        records = [dict(zip(header, (r if isinstance(r, str) else float(r) for r in row)))
                   for row in rows]
        json.dump({"columns": list(header), "rows": records}, out, indent=1)
        out.write("\n")
        return
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(fmt(v) for v in row) + "\n")


def write_json(out, doc):
    json.dump(doc, out, indent=1, allow_nan=True)
    out.write("\n")


def _build_invariant(cfg: RunConfig, p: OscillatorParams):
    try:
        return build_invariant(cfg.invariant, p, cfg.angle_policy(), cfg.eps_res, cfg.eps_crit)
    except ParameterError as exc:
        raise ConfigError(exc.field or "invariant", str(exc)) from None


def _run_drift(cfg: RunConfig, p: OscillatorParams):
    inv = _build_invariant(cfg, p)
    traj = integrate_oscillator(p, cfg.x0, cfg.v0, cfg.grid(), cfg.method)
    return inv, traj, drift(inv, traj, floor=cfg.drift_floor)


# --- subcommands ----------------------------------------------------------------

def cmd_simulate(cfg: RunConfig, out):
    inv, traj, report = _run_drift(cfg, cfg.params())
    rows = zip(traj.times, traj.x, traj.v, report.k_values, report.rel_drift)
    write_table(out, ("t", "x", "v", "K", "rel_drift"), rows, cfg)


def cmd_drift(cfg: RunConfig, out):
    inv, traj, report = _run_drift(cfg, cfg.params())
    doc = report.to_dict()
    doc["invariant"] = inv.kind.value
    doc["normalization"] = inv.normalization
    doc["method"] = traj.meta.method
    doc["h"] = traj.meta.h
    write_json(out, doc)


def cmd_verify_pde(cfg: RunConfig, out):
    p = cfg.params()
    inv = _build_invariant(cfg, p)
    try:
        hs = sorted(cfg.h, reverse=True)
        pts = random_points(inv, cfg.points, seed=cfg.seed, h_max=hs[0])
        report = residual_study(inv, p.to_system(), pts, hs, seed=cfg.seed)
    except ParameterError as exc:
        raise ConfigError(exc.field or "h", str(exc)) from None
    doc = report.to_dict()
    doc["invariant"] = inv.kind.value
    write_json(out, doc)


def cmd_sweep(cfg: RunConfig, out):
    """Steady-state amplitude |A|/(m sqrt(D)) and invariant drift across forcing frequencies.

    For lambda = 0, frequencies inside the resonance band are emitted with an
    ``excluded`` marker.
    """
    base = cfg.params()
    rows = []
    for W in np.linspace(cfg.omega_min, cfg.omega_max, cfg.count):
        p = base.replace(cap_omega=float(W))
        if p.lam == 0 and p.in_resonance_band(cfg.eps_res):
            rows.append((W, "excluded", "excluded"))
            continue
        sub = dataclasses.replace(cfg, cap_omega=float(W))
        _, _, report = _run_drift(sub, p)
        rows.append((W, steady_amplitude(p), report.max_rel_drift))
    write_table(out, ("Omega", "max_amplitude", "max_rel_drift"), rows, cfg)


def cmd_particular(cfg: RunConfig, out):
    p = cfg.params()
    try:
        ps = particular_solution_sinusoidal(p, cfg.eps_res)
    except ParameterError as exc:
        raise ConfigError(exc.field or "cap_omega", str(exc)) from None
    t = cfg.grid().times()
    write_table(out, ("t", "alpha", "beta"), zip(t, ps.alpha(t), ps.beta(t)), cfg)


COMMANDS = {
    "simulate": cmd_simulate,
    "drift": cmd_drift,
    "verify-pde": cmd_verify_pde,
    "sweep": cmd_sweep,
    "particular": cmd_particular,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file, or - for stdin")
    for flag in ("m", "omega", "lambda", "amp", "cap-omega", "x0", "v0", "t-start", "t-end",
                 "dt", "eps-res", "eps-crit", "drift-floor"):
        common.add_argument(f"--{flag}", type=float)
    common.add_argument("--method", choices=("RK4", "RK45"))
    common.add_argument("--invariant", choices=INVARIANT_CHOICES)
    common.add_argument("--policy", choices=("principal", "unwrapped"))
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output file (default stdout)")

    parser = argparse.ArgumentParser(prog="forced-invariants",
                                     description="Time-dependent invariants of forced linear oscillators.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="trajectory and K as CSV")
    sub.add_parser("drift", parents=[common], help="drift report as JSON")
    vp = sub.add_parser("verify-pde", parents=[common], help="transport-equation residuals as JSON")
    vp.add_argument("--points", type=int)
    vp.add_argument("--h", type=float, nargs="+")
    sp = sub.add_parser("sweep", parents=[common], help="resonance sweep over Omega")
    sp.add_argument("--omega-min", type=float)
    sp.add_argument("--omega-max", type=float)
    sp.add_argument("--count", type=int)
    sub.add_parser("particular", parents=[common], help="alpha and beta samples")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    opts = vars(args).copy()
    command = opts.pop("command")
    config_path = opts.pop("config")
    out_path = opts.pop("out")
    try:
        doc = None
        if config_path == "-":
            doc = json.load(sys.stdin)
        elif config_path:
            with open(config_path) as fh:
                doc = json.load(fh)
        if doc is not None and not isinstance(doc, dict):
            raise ConfigError("config", "must be a JSON object")
        cfg = load_config(doc, opts)
        out = open(out_path, "w", newline="") if out_path else sys.stdout
        try:
            COMMANDS[command](cfg, out)
        finally:
            if out_path:
                out.close()
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalAbort, SingularityError, FloatingPointError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
