"""Command-line front end.

Every subcommand writes its primary result (JSON or CSV) to ``-o`` or to
stdout; short summaries go to stderr.  Exit status: 0 on success, 2 for
invalid input, 3 when a numerical check fails.
"""

import argparse
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import _io
from .aak import best_rank_approx
from .errors import NumericalError, ValidationError
from .experiments import (TurbulenceParams, check_traveling, default_base, growth_sweep,
                          traveling_wave)
from .flow import (exact_trajectory, integrate_direct,
                   integrate_hierarchy_direct, invariant_report, l2_distance)
from .hankel import DEFAULT_TOL_CLUSTER, DEFAULT_TOL_DOMINANCE
from .hardy import DEFAULT_GRID, DEFAULT_MODES, HardySymbol, is_power_of_two, sobolev_norm
from .nlft import SpectralData, forward, inverse

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3


@dataclass(frozen=True)
class RunConfig:
    n_modes: int = DEFAULT_MODES
    grid_m: int = DEFAULT_GRID
    dt: float = 1e-3
    tol_cluster: float = DEFAULT_TOL_CLUSTER
    tol_dominance: float = DEFAULT_TOL_DOMINANCE
    tol_fit: float = 1e-6
    seed: int = 0
    output: str = None

    def __post_init__(self):
        if self.n_modes < 1:
            raise ValidationError("--modes must be positive")
        if not is_power_of_two(self.grid_m) or self.grid_m < 2 * self.n_modes:
            raise ValidationError("--grid must be a power of two ≥ 2·modes")
        if not self.dt > 0:
            raise ValidationError("--dt must be positive")
        for name in ("tol_cluster", "tol_dominance", "tol_fit"):
            if not 0 < getattr(self, name) < 1:
                raise ValidationError(f"--{name.replace('_', '-')} must lie in (0, 1)")

    @classmethod
    def from_args(cls, args):
        return cls(args.modes, args.grid, args.dt, args.tol_cluster, args.tol_dominance,
                   args.tol_fit, args.seed, args.output)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ValidationError(f"{self.prog}: {message}")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--modes", type=int, default=DEFAULT_MODES, help="retained Fourier modes N")
    common.add_argument("--grid", type=int, default=DEFAULT_GRID, help="FFT grid size M")
    common.add_argument("--dt", type=float, default=1e-3, help="RK4 step")
    common.add_argument("--tol-cluster", type=float, default=DEFAULT_TOL_CLUSTER)
    common.add_argument("--tol-dominance", type=float, default=DEFAULT_TOL_DOMINANCE)
    common.add_argument("--tol-fit", type=float, default=1e-6)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-o", "--output", help="output file (default: stdout)")

    parser = _Parser(prog="szego", description="Nonlinear Fourier transform for the cubic "
                     "Szegő equation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", parents=[common], help="symbol JSON → spectral JSON")
    p.add_argument("input")
    p = sub.add_parser("synth", parents=[common], help="spectral JSON → symbol JSON")
    p.add_argument("input")
    p = sub.add_parser("roundtrip", parents=[common],
                       help="forward then inverse; reports the relative H^1/2 error")
    p.add_argument("input")

    p = sub.add_parser("evolve", parents=[common], help="cubic Szegő trajectory as CSV")
    p.add_argument("input", help="symbol or spectral JSON")
    p.add_argument("--t", type=float, required=True, dest="t_end")
    p.add_argument("--method", choices=("exact", "direct", "both"), default="exact")
    p.add_argument("--samples", type=int, default=10, help="number of sampling intervals")
    p.add_argument("--include-modes", type=int, default=0)

    p = sub.add_parser("aak", parents=[common], help="best rank-k Hankel approximation")
    p.add_argument("input")
    p.add_argument("--rank", type=int, required=True)

    p = sub.add_parser("traveling", parents=[common], help="traveling wave check")
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--ell", type=int, default=1)
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--t", type=float, default=1.0, dest="t_end")

    p = sub.add_parser("turbulence", parents=[common], help="H^s growth sweep as CSV")
    p.add_argument("--N", type=int, default=3, dest="block")
    p.add_argument("--s", type=float, default=0.75, dest="sobolev_s")
    p.add_argument("--delta", type=float, default=1e-2)
    p.add_argument("--eps-from", type=float, default=1e-2)
    p.add_argument("--eps-to", type=float, default=1e-4)
    p.add_argument("--points", type=int, default=6)
    p.add_argument("--method", choices=("exact", "grid"), default="exact")
    p.add_argument("--retries", type=int, default=5)

    p = sub.add_parser("invariants", parents=[common],
                       help="drift of conserved quantities along RK4")
    p.add_argument("input")
    p.add_argument("--t", type=float, default=1.0, dest="t_end")
    p.add_argument("--y", type=float, default=None, help="integrate the J^y flow instead")
    return parser


# --------------------------------------------------------------------------
# I/O helpers

def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from None


def _parse(kind, obj):
    try:
        return kind.from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"malformed {kind.__name__} JSON: {exc}") from None


def _load_symbol(path, cfg):
    obj = _read_json(path)
    if isinstance(obj, dict) and "coeffs" in obj:
        u = _parse(HardySymbol, obj)
        return u.resized(max(u.n_modes, cfg.n_modes))
    if isinstance(obj, dict) and "s" in obj:
        return inverse(_parse(SpectralData, obj), cfg.grid_m, cfg.n_modes)
    raise ValidationError(f"{path}: expected symbol JSON (coeffs) or spectral JSON (s, psi)")


def _emit(cfg, text):
    if cfg.output:
        _io.atomic_write(cfg.output, text)
    else:
        sys.stdout.write(text)


def _json(obj):
    return _io.dumps(obj) + "\n"


def _note(msg):
    print(msg, file=sys.stderr)


def _forward(u, cfg):
    grid = max(cfg.grid_m, 4 * u.n_modes)
    return forward(u, cfg.tol_cluster, cfg.tol_dominance, grid, cfg.tol_fit)


# --------------------------------------------------------------------------
# subcommands

def cmd_analyze(args, cfg):
    sd = _forward(_load_symbol(args.input, cfg), cfg)
    _emit(cfg, _json(sd.to_json()))


def cmd_synth(args, cfg):
    sd = _parse(SpectralData, _read_json(args.input))
    u = inverse(sd, max(cfg.grid_m, 4 * cfg.n_modes), cfg.n_modes)
    _emit(cfg, _json(u.to_json()))


def cmd_roundtrip(args, cfg):
    u = _load_symbol(args.input, cfg)
    sd = _forward(u, cfg)
    v = inverse(sd, max(cfg.grid_m, 4 * u.n_modes), u.n_modes)
    err = sobolev_norm(u - v, 0.5) / sobolev_norm(u, 0.5)
    _emit(cfg, _json({"relative_h_half_error": err, "spectral_data": sd.to_json()}))
    _note(f"relative H^1/2 error {err:.3e}")


def _sample_times(t_end, dt, samples):
    n_steps = int(round(t_end / dt))
    if n_steps < 1 or abs(n_steps * dt - t_end) > 1e-9 * max(1.0, t_end):
        raise ValidationError("--t must be a positive multiple of --dt")
    stride = max(1, n_steps // max(1, samples))
    steps = list(range(0, n_steps + 1, stride))
    if steps[-1] != n_steps:
        steps.append(n_steps)
    return np.array(steps) * dt, stride


def cmd_evolve(args, cfg):
    u0 = _load_symbol(args.input, cfg)
    times, stride = _sample_times(args.t_end, cfg.dt, args.samples)
    grid = max(cfg.grid_m, 4 * u0.n_modes)
    if args.method in ("exact", "both"):
        sd = _forward(u0, cfg)
        exact = exact_trajectory(sd, times, grid, u0.n_modes)
    if args.method in ("direct", "both"):
        direct = integrate_direct(u0, args.t_end, cfg.dt, grid, stride)
    if args.method == "exact":
        _emit(cfg, exact.csv(args.include_modes))
        return
    if args.method == "direct":
        _emit(cfg, direct.csv(args.include_modes))
        return
    gaps = [l2_distance(a, b) for a, b in zip(exact.states, direct.states)]
    report = {"t": args.t_end, "dt": cfg.dt, "l2_gap": max(gaps),
              "l2_gap_final": gaps[-1],
              "exact_drift": invariant_report(exact), "direct_drift": invariant_report(direct)}
    _emit(cfg, _json(report))
    _note(f"exact vs direct L2 gap {max(gaps):.3e}")


def cmd_aak(args, cfg):
    u = _load_symbol(args.input, cfg)
    res = best_rank_approx(u, args.rank, max(cfg.grid_m, 4 * u.n_modes), details=True)
    _emit(cfg, _json({"rank": res.rank, "err": res.err, "singular_value": res.s,
                      "r": res.r.to_json()}))
    _note(f"‖H_(u-r)‖ = {res.err:.17g}")


def cmd_traveling(args, cfg):
    u0, c, omega = traveling_wave(args.rho, args.sigma, args.m, args.ell, args.phi,
                                  args.theta, cfg.n_modes)
    dev = check_traveling(u0, c, omega, args.t_end, cfg.dt, max(cfg.grid_m, 4 * cfg.n_modes))
    _emit(cfg, _json({"c": c, "omega": omega, "t": args.t_end, "dt": cfg.dt,
                      "max_modal_deviation": dev, "u0": u0.to_json()}))
    _note(f"c = {c:.17g}, ω = {omega:.17g}, deviation {dev:.3e}")


def cmd_turbulence(args, cfg):
    if args.points < 2:
        raise ValidationError("--points must be at least 2")
    if not args.eps_from > args.eps_to > 0:
        raise ValidationError("need --eps-from > --eps-to > 0")
    eps = np.geomspace(args.eps_from, args.eps_to, args.points)
    template = TurbulenceParams.default(default_base(), args.block, args.delta, eps[0])
    sweep = growth_sweep(template, args.sobolev_s, eps, method=args.method, m_grid=cfg.grid_m,
                         n_out=cfg.n_modes, retries=args.retries, seed=cfg.seed)
    _emit(cfg, sweep.csv())
    _note(f"fitted slope {sweep.slope:.6f}, predicted {sweep.predicted:.6f}, "
          f"attempts {len(sweep.attempts)}, within tolerance: {sweep.accepted}")


def cmd_invariants(args, cfg):
    u0 = _load_symbol(args.input, cfg)
    grid = max(cfg.grid_m, 4 * u0.n_modes)
    if args.y is None:
        traj = integrate_direct(u0, args.t_end, cfg.dt, grid)
    else:
        traj = integrate_hierarchy_direct(u0, args.y, args.t_end, cfg.dt, grid)
    _emit(cfg, _json({"t": args.t_end, "dt": cfg.dt, "y": args.y,
                      "relative_drift": invariant_report(traj)}))


COMMANDS = {"analyze": cmd_analyze, "synth": cmd_synth, "roundtrip": cmd_roundtrip,
            "evolve": cmd_evolve, "aak": cmd_aak, "traveling": cmd_traveling,
            "turbulence": cmd_turbulence, "invariants": cmd_invariants}


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = RunConfig.from_args(args)
        COMMANDS[args.command](args, cfg)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except ValidationError as exc:
        _note(f"error: {exc}")
        return EXIT_INVALID
    except NumericalError as exc:
        _note(f"numerical failure: {exc}")
        return EXIT_NUMERICAL
    return EXIT_OK


def main():
    sys.exit(run())

