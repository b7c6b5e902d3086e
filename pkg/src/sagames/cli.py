"""Command-line front end.

Usage::

    sag sne --metric delay --lambda 1 --C 3 --rho 18
    sag price-opt --metric goodput --lambda 1 --C 3
    sag poa-sweep --metric delay --lambda 1 --C 3 --rho-min 16.7 --rho-max 30 --steps 200
    sag replicator --lambda 1 --C 3 --rho 0.5 --p0 0.9 --horizon 200
    sag simulate --lambda 0.2 --p 0.5 --r 1 --beta 4 --T 1 --n 100000 --seed 7

Every run prints one report (JSON by default, CSV with ``--output csv``)
that starts with the resolved inputs. Feeding the ``inputs`` block back via
``--params FILE`` reproduces the run byte for byte.

Exit status: 0 on success, 1 when ``simulate`` disagrees with the closed
form by more than three standard errors, 2 on invalid input.
"""
import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import delay_game, goodput_game
from .errors import DomainError, ParameterError, QuadratureError
from .model import GameParams, NetworkParams, team_densities
from .montecarlo import (SimConfig, coverage_z_score, estimate_coverage,
                         estimate_local_delay)

__all__ = ["RunReport", "main", "build_parser", "run"]

GEOMETRY_KEYS = ("r", "T", "beta", "A", "mu", "P", "w")
GEOMETRY_DEFAULTS = {"r": 1.0, "T": 1.0, "beta": 4.0, "A": 1.0, "mu": 1.0, "P": 1.0, "w": 0.0}


@dataclass
class RunReport:
    command: str
    params_echo: dict
    results: dict
    rows: list
    warnings: list = field(default_factory=list)
    exit_code: int = 0


class UsageError(ValueError):
    pass


# -- formatting ---------------------------------------------------------------

def _fmt_float(x):
    return format(x, ".17g")


def _json_scalar(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return "null"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return '"infinite"' if v > 0 else '"-infinite"'
        if math.isnan(v):
            return "null"
        return _fmt_float(v)
    return json.dumps(str(v))


def to_json(obj, level=0):
    """Serialise with every float written to 17 significant digits."""
    pad = "  " * (level + 1)
    end = "  " * level
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + to_json(v, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    return _json_scalar(obj)


def _csv_cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return _fmt_float(float(v))
    return str(v)


def to_csv(report):
    buf = io.StringIO()
    buf.write(f"# command: {report.command}\n")
    for section in ("inputs", "derived"):
        for k, v in report.params_echo.get(section, {}).items():
            buf.write(f"# {section}.{k} = {_csv_cell(v)}\n")
    for k, v in report.results.items():
        if k != "rows" and not isinstance(v, (dict, list)):
            buf.write(f"# results.{k} = {_csv_cell(v)}\n")
    for msg in report.warnings:
        buf.write(f"# warning: {msg}\n")
    if report.rows:
        writer = csv.writer(buf, lineterminator="\n")
        header = list(report.rows[0])
        writer.writerow(header)
        for row in report.rows:
            writer.writerow([_csv_cell(row.get(k)) for k in header])
    return buf.getvalue()


def render(report, output="json"):
    if output == "csv":
        return to_csv(report)
    doc = {
        "command": report.command,
        "params": report.params_echo,
        "results": dict(report.results, rows=report.rows),
        "warnings": report.warnings,
    }
    return to_json(doc) + "\n"


# -- parameter handling -------------------------------------------------------

def _float_flag(parser, name, dest=None, help=None):
    parser.add_argument(f"--{name}", dest=dest or name.replace("-", "_"), type=float,
                        default=None, help=help)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("model")
    g.add_argument("--params", metavar="FILE", default=None,
                   help="flat JSON document of inputs; flags override it")
    _float_flag(g, "lambda", dest="lambda", help="node intensity")
    _float_flag(g, "r", help="transmitter-receiver distance (default 1)")
    _float_flag(g, "T", help="SINR threshold (default 1)")
    _float_flag(g, "beta", help="path-loss exponent > 2 (default 4)")
    _float_flag(g, "A", help="attenuation scale (default 1)")
    _float_flag(g, "mu", help="Rayleigh fading rate (default 1)")
    _float_flag(g, "P", help="transmit power (default 1)")
    _float_flag(g, "w", help="noise power (default 0)")
    _float_flag(g, "C", help="contention constant; replaces r, T, beta")
    g.add_argument("--metric", choices=("goodput", "delay"), default=None)
    o = common.add_argument_group("output")
    o.add_argument("--output", choices=("json", "csv"), default="json")
    o.add_argument("--out", metavar="PATH", default=None)

    parser = argparse.ArgumentParser(prog="sag", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sne", parents=[common], help="symmetric Nash equilibria")
    _float_flag(p, "rho")

    sub.add_parser("price-opt", parents=[common], help="optimal price factor")

    p = sub.add_parser("poa-sweep", parents=[common], help="price of anarchy over a price grid")
    _float_flag(p, "rho-min")
    _float_flag(p, "rho-max")
    p.add_argument("--steps", type=int, default=None)

    p = sub.add_parser("replicator", parents=[common], help="replicator dynamics trajectory")
    _float_flag(p, "p0")
    _float_flag(p, "rho")
    _float_flag(p, "horizon")
    _float_flag(p, "step")
    p.add_argument("--stride", type=int, default=None,
                   help="emit every k-th state (default: about 1000 rows)")

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo check of the closed form")
    _float_flag(p, "p")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--max-slots", dest="max_slots", type=int, default=None)
    p.add_argument("--window", default=None, help="'auto' or a radius")
    p.add_argument("--quantity", choices=("coverage", "delay"), default=None)
    return parser


_COMMAND_KEYS = {
    "sne": ("rho",),
    "price-opt": (),
    "poa-sweep": ("rho_min", "rho_max", "steps"),
    "replicator": ("p0", "rho", "horizon", "step", "stride"),
    "simulate": ("p", "n", "seed", "max_slots", "window", "quantity"),
}


def _merge_inputs(args):
    merged = {}
    if args.params:
        try:
            with open(args.params) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read --params file: {exc}") from exc
        if not isinstance(doc, dict):
            raise UsageError("--params file must hold a flat JSON object")
        if "inputs" in doc.get("params", {}):
            doc = doc["params"]["inputs"]
        merged.update(doc)
    for key in ("lambda", "C", "metric") + GEOMETRY_KEYS + _COMMAND_KEYS[args.command]:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _require(inputs, key):
    if inputs.get(key) is None:
        raise UsageError(f"--{key.replace('_', '-')} is required")
    return inputs[key]


def _resolve_model(inputs, allow_override=True):
    lam = float(_require(inputs, "lambda"))
    if inputs.get("C") is not None:
        if not allow_override:
            raise UsageError("simulate needs the physical geometry; --C is not accepted")
        given = [k for k in GEOMETRY_KEYS if k in inputs]
        if given:
            raise UsageError(f"--C cannot be combined with geometry flags {given}")
        params = GameParams(lam=lam, C=float(inputs["C"]))
        resolved = {"lambda": lam, "C": params.C}
    else:
        geo = {k: float(inputs.get(k, GEOMETRY_DEFAULTS[k])) for k in GEOMETRY_KEYS}
        params = NetworkParams(lam=lam, **geo)
        resolved = dict({"lambda": lam}, **geo)
    return params, resolved


def _derived(params, metric):
    out = {"C": params.C, "C_bar": params.C_bar, "lambda_C": params.lam_C,
           "team_regime": "interior" if params.lam_C > 1.0 else "full_access"}
    if metric == "delay":
        th = delay_game.thresholds(params)
        out.update(contention_regime=th.regime.value, rho_t=th.rho_t,
                   rho_boundary=th.rho_boundary)
    return out


# -- commands -----------------------------------------------------------------

def _eq_row(eq, params, metric):
    # the games are posed without noise
    g = eq.p_star * math.exp(-eq.p_star * params.lam_C)
    return {"p_star": eq.p_star, "branch": eq.branch.value, "stable": eq.stable,
            "utility": eq.utility_at_eq, "goodput": g,
            "delay": 1.0 / g if g > 0 else math.inf}


def cmd_sne(inputs, params, derived):
    metric = inputs["metric"]
    rho = float(_require(inputs, "rho"))
    inputs["rho"] = rho
    if metric == "goodput":
        if rho < 0:
            raise UsageError("--rho must be >= 0")
        eqs = [goodput_game.sne(rho, params)]
    else:
        if rho <= 0:
            raise UsageError("--rho must be > 0 for the delay game")
        eqs = delay_game.sne_all(rho, params)
        derived["regime_label"] = delay_game.regime_label(rho, params)
    rows = [_eq_row(e, params, metric) for e in eqs]
    return {"n_equilibria": len(rows)}, rows


def cmd_price_opt(inputs, params, derived):
    d_s, d_t = team_densities(GameParams.from_network(params)
                              if isinstance(params, NetworkParams) else params)
    if inputs["metric"] == "goodput":
        rho = goodput_game.optimal_price(params)
        p_star = goodput_game.sne(rho, params).p_star
        d_eq = params.lam * goodput_game.equilibrium_goodput(rho, params)
        d_team = d_s
    else:
        rho, d_eq = delay_game.optimal_price(params)
        p_star = delay_game.sne_all(rho, params)[0].p_star
        d_team = d_t
    row = {"rho_star": rho, "p_star": p_star, "equilibrium_density": d_eq,
           "team_density": d_team, "difference": d_eq - d_team}
    return {}, [row]


def cmd_poa_sweep(inputs, params, derived):
    metric = inputs["metric"]
    lo = float(_require(inputs, "rho_min"))
    hi = float(_require(inputs, "rho_max"))
    steps = int(inputs.get("steps") or 100)
    inputs.update(rho_min=lo, rho_max=hi, steps=steps)
    if steps < 1 or not hi >= lo or not math.isfinite(hi):
        raise UsageError("need --steps >= 1 and a finite range with --rho-min <= --rho-max")
    if metric == "goodput" and lo < 0:
        raise UsageError("--rho-min must be >= 0")
    if metric == "delay" and lo <= 0:
        raise UsageError("--rho-min must be > 0 for the delay game")
    grid = np.linspace(lo, hi, steps) if steps > 1 else np.array([lo])
    game = goodput_game if metric == "goodput" else delay_game
    rows = []
    for rho in grid:
        rep = game.poa(float(rho), params)
        rows.append({"rho": float(rho), "poa": rep.value, "lower_bound": rep.lower_bound,
                     "upper_bound": rep.upper_bound, "bounds_hold": rep.bounds_hold,
                     "p_star": rep.p_worst, "p_team": rep.p_team})
        if metric == "delay":
            # equilibrium delay cost over the optimal one, >= 1
            rows[-1]["cost_ratio"] = 1.0 / rep.value
    summary = {}
    values = np.array([r["poa"] for r in rows])
    if metric == "goodput":
        inf_at = [r["rho"] for r in rows if math.isinf(r["poa"])]
        summary["infinite_from"] = inf_at[0] if inf_at else None
    elif len(rows) > 1:
        jumps = np.abs(np.diff(values))
        k = int(np.argmax(jumps))
        summary.update(jump_left=rows[k]["rho"], jump_right=rows[k + 1]["rho"],
                       jump_size=float(jumps[k]))
        checked = [r["bounds_hold"] for r in rows if r["bounds_hold"] is not None]
        summary["bounds_hold_all"] = all(checked) if checked else None
    return summary, rows


def cmd_replicator(inputs, params, derived):
    if inputs["metric"] != "goodput":
        raise UsageError("replicator dynamics are defined for the goodput game only")
    p0 = float(_require(inputs, "p0"))
    rho = float(_require(inputs, "rho"))
    horizon = float(inputs.get("horizon") or 1000.0)
    step = float(inputs.get("step") or 0.01)
    if not 0.0 < p0 < 1.0:
        raise UsageError("--p0 must lie in (0, 1)")
    traj = goodput_game.replicator_trajectory(p0, rho, params, horizon=horizon, step=step)
    stride = int(inputs.get("stride") or max(1, (traj.states.size - 1) // 1000))
    inputs.update(p0=p0, rho=rho, horizon=horizon, step=step, stride=stride)
    idx = list(range(0, traj.states.size, stride))
    if idx[-1] != traj.states.size - 1:
        idx.append(traj.states.size - 1)
    rows = [{"t": float(traj.times[i]), "p": float(traj.states[i])} for i in idx]
    summary = {"converged": bool(traj.converged), "final": traj.final, "target": traj.target,
               "gap": abs(traj.final - traj.target)}
    return summary, rows


def cmd_simulate(inputs, params, derived):
    p = float(_require(inputs, "p"))
    if not 0.0 < p <= 1.0:
        raise UsageError("--p must lie in (0, 1]")
    quantity = inputs.get("quantity") or "coverage"
    n_default = 100_000 if quantity == "coverage" else 10_000
    n = int(inputs.get("n") or n_default)
    seed = inputs.get("seed")
    if seed is None:
        seed = int(os.environ.get("SAG_SEED", "0"))
    window = inputs.get("window") or "auto"
    max_slots = int(inputs.get("max_slots") or 1000)
    inputs.update(p=p, quantity=quantity, n=n, seed=int(seed), window=str(window),
                  max_slots=max_slots)
    if str(window) == "auto":
        radius = None
    else:
        try:
            radius = float(window)
        except ValueError:
            raise UsageError("--window must be 'auto' or a positive radius") from None
    sim = SimConfig(n_samples=n, seed=int(seed), window_radius=radius, max_slots=max_slots)
    coverage = math.exp(-p * params.lam_C) * params.noise_factor
    if quantity == "coverage":
        est = estimate_coverage(params, p, sim)
        expected = coverage
        z = coverage_z_score(est, expected)
    else:
        est = estimate_local_delay(params, p, sim)
        expected = 1.0 / (p * coverage)
        z = est.z_score(expected)
    row = {"quantity": quantity, "estimate": est.value, "std_error": est.std_error,
           "n": est.n, "seed": est.seed, "window_radius": est.window_radius,
           "closed_form": expected, "z": z, "pass": abs(z) <= 3.0}
    return {}, [row]


_COMMANDS = {
    "sne": cmd_sne,
    "price-opt": cmd_price_opt,
    "poa-sweep": cmd_poa_sweep,
    "replicator": cmd_replicator,
    "simulate": cmd_simulate,
}


def run(args):
    """Execute a parsed command and return its :class:`RunReport`."""
    inputs = _merge_inputs(args)
    metric = inputs.get("metric") or "goodput"
    if metric not in ("goodput", "delay"):
        raise UsageError(f"unknown metric {metric!r}")
    params, resolved = _resolve_model(inputs, allow_override=args.command != "simulate")
    echo_inputs = dict(resolved, metric=metric)
    derived = _derived(params, metric)
    command_inputs = {k: inputs.get(k) for k in _COMMAND_KEYS[args.command]}
    command_inputs["metric"] = metric
    summary, rows = _COMMANDS[args.command](command_inputs, params, derived)
    command_inputs.pop("metric")
    echo_inputs.update({k: v for k, v in command_inputs.items() if v is not None})
    exit_code = 0
    warn = []
    if args.command == "simulate" and not rows[0]["pass"]:
        exit_code = 1
        warn.append("estimate is more than 3 standard errors from the closed form")
    return RunReport(command=args.command,
                     params_echo={"inputs": echo_inputs, "derived": derived},
                     results=summary, rows=rows, warnings=warn, exit_code=exit_code)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        report = run(args)
    except (UsageError, ParameterError, DomainError, QuadratureError) as exc:
        print(f"sag {args.command}: error: {exc}", file=sys.stderr)
        return 2
    text = render(report, args.output)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
