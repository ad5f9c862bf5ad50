"""Command-line front end: ``optocool rates|classical|master-eq|spectrum|sweep``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from . import classical, fock, linearized, noise, sweep
from .errors import ConfigError, NumericalError
from .params import CONFIG_KEYS, coupling_alpha, normalize

log = logging.getLogger("optocool")

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
SECTIONS = ("sweep", "classical", "master_eq", "spectrum")


def _merge(base: dict, override: Mapping) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def load_config(path: str | None, preset: str | None) -> dict[str, Any]:
    config: dict[str, Any] = sweep.preset_config(preset) if preset else {}
    if path:
        try:
            with open(path) as fh:
                user = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config must be a JSON object")
        # A file that picks the other spelling of a ratio replaces the preset's.
        for a, b in (("omega_m_over_kappa", "kappa_over_omega_m"),
                     ("gamma_m_over_omega_m", "quality_factor")):
            if a in user:
                config.pop(b, None)
            if b in user:
                config.pop(a, None)
        config = _merge(config, user)
    if not config:
        raise ConfigError("give --config and/or --preset")
    unknown = set(config) - set(CONFIG_KEYS) - set(SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return config


def _section(config: Mapping, name: str, allowed: set[str]) -> dict:
    sec = config.get(name, {}) or {}
    if not isinstance(sec, Mapping):
        raise ConfigError(f"'{name}' must be a mapping")
    unknown = set(sec) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in '{name}': {sorted(unknown)}")
    return dict(sec)


def _num(value: Any, name: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be a number") from exc


def _finite(x: float) -> float | None:
    return x if math.isfinite(x) else None


def _table(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# --- subcommands --------------------------------------------------------------


def cmd_rates(config, args) -> None:
    p = normalize(config)
    r = noise.rate_set(p)
    result = {
        "alpha": coupling_alpha(p),
        "gamma_down": r.gamma_down,
        "gamma_up": r.gamma_up,
        "gamma_opt": r.gamma_opt,
        "n_min": r.n_min,
        "n_steady": r.n_steady,
        "valid_weak_coupling": r.valid_weak_coupling,
        "optimal_detuning": noise.optimal_detuning(p.omega_m, p.kappa),
        "min_phonon": noise.min_phonon(p.omega_m, p.kappa),
    }
    if args.format == "json":
        clean = {k: _finite(v) if isinstance(v, float) else v for k, v in result.items()}
        _emit(json.dumps({"params": p.as_config(), "rates": clean}, indent=1) + "\n", args.out)
    else:
        _emit(_table(["quantity", "value"], result.items()), args.out)


_CLASSICAL_KEYS = {"mass", "tau", "f_max", "i_max", "x_equilibrium", "temperature", "profile",
                   "slope", "duration", "step", "seed", "n_trajectories", "record_every"}


def cmd_classical(config, args) -> None:
    p = normalize(config)
    sec = _section(config, "classical", _CLASSICAL_KEYS)
    c = classical.ClassicalParams(
        mass=_num(sec.get("mass", 1.0), "mass"),
        tau=_num(sec.get("tau", 1.0), "tau"),
        f_max=_num(sec.get("f_max", 0.0), "f_max"),
        i_max=_num(sec.get("i_max", 1.0), "i_max"),
        x_equilibrium=_num(sec.get("x_equilibrium", 0.0), "x_equilibrium"),
        temperature=_num(sec.get("temperature", 1.0), "temperature"),
    )
    profile = sec.get("profile", "bolometric")
    if profile == "bolometric":
        model = classical.LagForceModel.bolometric(p, c)
    elif profile == "linear":
        model = classical.LagForceModel.linear(_num(sec.get("slope", 0.0), "slope"), c.tau, c.x_equilibrium)
    else:
        raise ConfigError(f"profile must be 'bolometric' or 'linear', got {profile!r}")
    summary = classical.classical_result(model, p, c)
    res = classical.simulate_langevin(
        model, c, p,
        duration=_num(sec.get("duration", 2000.0), "duration"),
        step=_num(sec.get("step", 0.02), "step"),
        seed=int(sec.get("seed", 0)),
        n_trajectories=int(sec.get("n_trajectories", 64)),
        record_every=int(sec.get("record_every", 10)),
    )
    rows = zip(res.times, res.x, res.force)
    if args.format == "json":
        _emit(json.dumps({
            "gamma_opt": summary.gamma_opt,
            "omega_m_tilde": summary.omega_m_tilde,
            "t_eff": summary.t_eff,
            "x_bar": res.x_bar,
            "position_variance": res.position_variance,
            "standard_error": res.standard_error,
            "equipartition_variance": summary.t_eff / (c.mass * summary.omega_m_tilde**2),
            "trajectory": {"time": res.times.tolist(), "x": res.x.tolist(), "F": res.force.tolist()},
        }, indent=1) + "\n", args.out)
    else:
        _emit(_table(["time", "x", "F"], rows), args.out)


def cmd_master_eq(config, args) -> None:
    p = normalize(config)
    sec = _section(config, "master_eq", {"n0", "t_max", "t_count"})
    rates = noise.golden_rule_rates(p)
    chain, state = fock.auto_steady_state(rates, p.gamma_m, p.n_th)
    total = fock.relaxation_rate(rates, p.gamma_m)
    n0 = _num(sec.get("n0", p.n_th), "n0")
    if n0 < 0:
        raise ConfigError("n0 must be >= 0")
    t_max = _num(sec.get("t_max", 5.0 / total), "t_max")
    times = np.linspace(0.0, t_max, int(sec.get("t_count", 51)))
    # The chain must also hold the initial thermal state.
    n_max = max(chain.n_max, fock.default_cutoff(n0))
    big = fock.build_chain(rates, p.gamma_m, p.n_th, n_max)
    pops = fock.evolve_chain(big, fock.thermal_distribution(n0, n_max), times)
    n_chain = fock.mean_trajectory(pops)
    n_closed = fock.evolve_mean(n0, rates, p.gamma_m, p.n_th, times)
    pop_rows = [(n, float(pn)) for n, pn in enumerate(state.probabilities)]
    rel_rows = list(zip(times, n_closed, n_chain))
    if args.format == "json":
        _emit(json.dumps({
            "n_max": chain.n_max,
            "mean": state.mean,
            "populations": [pn for _, pn in pop_rows],
            "relaxation": {"t": times.tolist(), "n_closed_form": n_closed.tolist(),
                           "n_chain": n_chain.tolist()},
        }, indent=1) + "\n", args.out)
        return
    pop_csv = _table(["n", "p_n"], pop_rows)
    rel_csv = _table(["t", "n_mean", "n_mean_chain"], rel_rows)
    if args.out:
        out = Path(args.out)
        out.write_text(pop_csv)
        out.with_name(out.stem + "_relaxation" + (out.suffix or ".csv")).write_text(rel_csv)
    else:
        sys.stdout.write(pop_csv + "\n" + rel_csv)


def cmd_spectrum(config, args) -> None:
    if args.preset == "fig3" or "sweep" in config and config["sweep"].get("observable") in ("s_cc", "s_cc_neg"):
        spec = sweep.spec_from_config(config)
        _write_grid(sweep.run_sweep(spec, args.threads), args)
        return
    p = normalize(config)
    sec = _section(config, "spectrum", {"omega_min", "omega_max", "omega_count"})
    lo = _num(sec.get("omega_min", -2.0), "omega_min")
    hi = _num(sec.get("omega_max", 2.0), "omega_max")
    count = int(sec.get("omega_count", 4001))
    if not lo < hi or count < 2:
        raise ConfigError("need omega_min < omega_max and omega_count >= 2")
    system = linearized.build_system(p)
    grid = linearized.s_cc(system, np.linspace(lo, hi, count))
    if args.format == "json":
        _emit(json.dumps({
            "detuning": p.detuning,
            "omega": grid.omegas.tolist(),
            "S_cc": grid.values.tolist(),
            "phonon_number": linearized.phonon_number(system),
            "normal_modes": [m._asdict() for m in linearized.normal_modes(system)],
        }, indent=1) + "\n", args.out)
    else:
        _emit(_table(["omega", "S_cc"], zip(grid.omegas, grid.values)), args.out)


def _write_grid(grid: sweep.GridResult, args, levels=None) -> None:
    contours = None
    if levels:
        contours = {str(k): [line.tolist() for line in v]
                    for k, v in sweep.extract_contours(grid, levels).items()}
    if args.format == "json":
        d = grid.to_dict()
        if contours is not None:
            d["contours"] = contours
        _emit(json.dumps(d) + "\n", args.out)
        return
    _emit(grid.to_csv(), args.out)
    if contours is not None:
        if args.out:
            Path(args.out + ".contours.json").write_text(json.dumps(contours) + "\n")
        else:
            log.warning("contours are only written with --out or --format json")


def cmd_sweep(config, args) -> None:
    spec = sweep.spec_from_config(config)
    levels = None
    if args.levels:
        try:
            levels = [float(x) for x in args.levels.split(",")]
        except ValueError as exc:
            raise ConfigError(f"bad --levels {args.levels!r}") from exc
    _write_grid(sweep.run_sweep(spec, args.threads), args, levels)


COMMANDS = {
    "rates": cmd_rates,
    "classical": cmd_classical,
    "master-eq": cmd_master_eq,
    "spectrum": cmd_spectrum,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="optocool", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--preset", choices=sorted(sweep.PRESETS))
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $OPTOCOOL_THREADS or CPU count)")
        if name == "sweep":
            sp.add_argument("--levels", help="comma-separated contour levels, e.g. 1,0.1")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        if args.threads is None:
            args.threads = sweep.default_threads()
        config = load_config(args.config, args.preset)
        COMMANDS[args.command](config, args)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except (NumericalError, ArithmeticError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    return 0


if __name__ == "__main__":
    sys.exit(main())
