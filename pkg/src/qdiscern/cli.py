"""Batch command line front end.

Every run writes a JSON document ``{"config": ..., "result": ...}`` whose
``config`` block is the fully resolved configuration; feeding that block
back through ``--config`` reproduces the run. CSV output (``sweep`` and
``reference``) echoes the configuration to a ``.config.json`` sidecar, or
to stderr when writing to stdout.

Exit codes: 0 success, 1 usage, 2 input validation, 3 numerical invariant
violation.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import discrimination as disc
from .errors import DomainError, InvariantViolation, NumericalCorruption
from .linalg import StatePair, make_state_pair, standard_pair
from .optimizer import MAX_SEARCH_DIM, SearchConfig, embed_pair, maximize_delta
from .sampling import run_experiment
from .serialization import InputError, dumps, parse_matrix, parse_vector, write_atomic

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_INVARIANT = 0, 1, 2, 3
ENV_OUTPUT_DIR = "QDISCERN_OUTPUT_DIR"
MAX_CLI_DIM = 64
SWEEP_COLUMNS = ("theta", "alpha", "n", "trials", "empirical_error", "cheb_bound", "delta", "seed")

_FAMILY = dict(theta=None, alpha=None, dim=2, lambda_scale=1.0, mu_shift=0.0)

PARAMS: dict[str, dict] = {
    "delta": dict(_FAMILY, allow_unsaturated=False),
    "bound": dict(theta=None, dim=2),
    "saturate": dict(_FAMILY, tol=1e-8),
    "check": dict(_FAMILY, tol=1e-8, allow_unsaturated=False),
    "simulate": dict(_FAMILY, p1=0.5, n=100, trials=10_000, seed=0, workers=1,
                     allow_unsaturated=False),
    "sweep": dict(theta_values=None, alpha_values=None, alpha_count=None, n_values=None,
                  dim=2, lambda_scale=1.0, mu_shift=0.0, p1=0.5, trials=10_000, seed=0,
                  workers=1, allow_unsaturated=False),
    "maximize": dict(theta=None, dim=2, restarts=8, max_evals=20_000, seed=0, xatol=1e-10,
                     fatol=1e-13, init_noise=0.1, polish_rounds=2),
    "reference": dict(theta_values=None, p1_values=None),
}
CSV_COMMANDS = {"sweep", "reference"}
_ANGLE_KEYS = ("theta", "alpha")
_ANGLE_LIST_KEYS = ("theta_values", "alpha_values")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    params: dict
    input_path: str | None = None
    output_path: str | None = None
    format: str = "json"
    _keys = ("command", "params", "input_path", "output_path", "format")

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "input_path": self.input_path,
            "output_path": self.output_path,
            "format": self.format,
            "params": dict(self.params),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if not isinstance(d, dict):
            raise UsageError("config must be a JSON object")
        if "config" in d and "command" not in d:
            d = d["config"]  # accept a whole output document
        unknown = set(d) - set(cls._keys)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        if d.get("command") not in PARAMS:
            raise UsageError(f"unknown command {d.get('command')!r}")
        cfg = cls(d["command"], dict(d.get("params") or {}), d.get("input_path"),
                  d.get("output_path"), d.get("format", "json"))
        cfg.params = resolve_params(cfg.command, cfg.params)
        return cfg


def resolve_params(command: str, given: dict) -> dict:
    defaults = PARAMS[command]
    unknown = set(given) - set(defaults)
    if unknown:
        raise UsageError(f"unknown parameters for {command!r}: {sorted(unknown)}")
    params = {**defaults, **given}
    for key in ("dim", "n", "trials", "workers", "restarts", "max_evals", "alpha_count"):
        val = params.get(key)
        if val is not None and (not isinstance(val, int) or isinstance(val, bool) or val < 1):
            raise UsageError(f"--{key.replace('_', '-')} must be a positive integer")
    if params.get("dim") is not None and params["dim"] > MAX_CLI_DIM:
        raise UsageError(f"--dim is capped at {MAX_CLI_DIM}")
    if "seed" in params and not (isinstance(params["seed"], int) and 0 <= params["seed"] < 2**64):
        raise UsageError("--seed must be a 64-bit unsigned integer")
    if "p1" in params and not 0.0 < params["p1"] < 1.0:
        raise UsageError("--p1 must lie in (0, 1)")
    return params


# -- argument parsing -------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(s: str) -> int:
    try:
        n = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {s!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {n}")
    return n


def _seed(s: str) -> int:
    n = int(s)
    if not 0 <= n < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return n


def _float_list(s: str) -> list[float]:
    try:
        return [float(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {s!r}") from None


def _int_list(s: str) -> list[int]:
    out = []
    for x in s.split(","):
        if x.strip():
            out.append(_positive_int(x))
    return out


_FLAG_TYPES = {
    "theta": float, "alpha": float, "dim": _positive_int, "lambda_scale": float,
    "mu_shift": float, "p1": float, "n": _positive_int, "trials": _positive_int,
    "seed": _seed, "workers": _positive_int, "tol": float, "restarts": _positive_int,
    "max_evals": _positive_int, "xatol": float, "fatol": float, "init_noise": float,
    "polish_rounds": int, "theta_values": _float_list, "alpha_values": _float_list,
    "alpha_count": _positive_int, "n_values": _int_list, "p1_values": _float_list,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qdiscern", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="re-run from an echoed config (JSON file)")
    sub = parser.add_subparsers(dest="command")
    for name, defaults in PARAMS.items():
        p = sub.add_parser(name)
        for key in defaults:
            flag = "--" + key.replace("_", "-")
            if key == "allow_unsaturated":
                p.add_argument(flag, action="store_true", default=argparse.SUPPRESS)
            else:
                p.add_argument(flag, type=_FLAG_TYPES[key], default=argparse.SUPPRESS)
        p.add_argument("--input", dest="input_path")
        p.add_argument("--output", dest="output_path")
        p.add_argument("--format", choices=["json", "csv"], default="json")
        p.add_argument("--degrees", action="store_true", help="angles given in degrees")
    return parser


def config_from_args(argv) -> RunConfig:
    parser = build_parser()
    ns = vars(parser.parse_args(argv))
    if ns.get("config"):
        try:
            data = json.loads(Path(ns["config"]).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        return RunConfig.from_dict(data)
    command = ns.get("command")
    if command is None:
        parser.error("a command is required")
    given = {k: ns[k] for k in PARAMS[command] if k in ns}
    if ns.get("degrees"):
        for k in _ANGLE_KEYS:
            if given.get(k) is not None:
                given[k] = math.radians(given[k])
        for k in _ANGLE_LIST_KEYS:
            if given.get(k) is not None:
                given[k] = [math.radians(x) for x in given[k]]
    fmt = ns.get("format", "json")
    if fmt == "csv" and command not in CSV_COMMANDS:
        raise UsageError(f"--format csv is only available for {sorted(CSV_COMMANDS)}")
    return RunConfig(command, resolve_params(command, given), ns.get("input_path"),
                     ns.get("output_path"), fmt)


# -- problem assembly -------------------------------------------------------

_INPUT_KEYS = {"states", "observable", "priors"}


def load_input(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read input: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") \
            from None
    if not isinstance(data, dict):
        raise InputError("input: expected a JSON object")
    unknown = set(data) - _INPUT_KEYS
    if unknown:
        raise InputError(f"input: unknown fields {sorted(unknown)}")
    out: dict = {}
    if "states" in data:
        states = data["states"]
        if not isinstance(states, dict) or set(states) != {"v", "w"}:
            raise InputError("states: expected an object with exactly the fields 'v' and 'w'")
        out["v"] = parse_vector(states["v"], "states.v")
        out["w"] = parse_vector(states["w"], "states.w")
        if out["v"].size != out["w"].size:
            raise InputError("states.w: dimension differs from states.v")
    if "observable" in data:
        out["observable"] = parse_matrix(data["observable"], "observable")
    if "priors" in data:
        priors = data["priors"]
        if not isinstance(priors, dict) or set(priors) != {"p1"}:
            raise InputError("priors: expected an object with exactly the field 'p1'")
        p1 = priors["p1"]
        if not isinstance(p1, (int, float)) or not 0.0 < p1 < 1.0:
            raise InputError(f"priors.p1: must be a number in (0, 1), got {p1!r}")
        out["p1"] = float(p1)
    return out


def _pair(params: dict, data: dict, dim: int) -> StatePair:
    if "v" in data:
        try:
            return make_state_pair(data["v"], data["w"])
        except DomainError as exc:
            raise InputError(f"states: {exc}") from None
    if params.get("theta") is None:
        raise UsageError("--theta is required unless the input supplies states")
    theta = params["theta"]
    if not 0.0 < theta <= math.pi / 2:
        raise InputError(f"theta: must lie in (0, pi/2], got {theta!r}")
    return standard_pair(theta, dim)


def _observable(params: dict, data: dict, pair: StatePair) -> np.ndarray:
    if "observable" in data:
        a = data["observable"]
        if a.shape[0] != pair.dim:
            raise InputError(f"observable: dimension {a.shape[0]} != state dimension {pair.dim}")
        return a
    alpha = params["alpha"]
    if params.get("allow_unsaturated"):
        return disc.family_operator(pair, alpha, params["lambda_scale"], params["mu_shift"])
    try:
        return disc.saturating_observable(pair, alpha, params["lambda_scale"], params["mu_shift"])
    except DomainError as exc:
        raise InputError(f"alpha: {exc}") from None


def _problem(cfg: RunConfig):
    data = load_input(cfg.input_path)
    params = cfg.params
    if "alpha" in params and params["alpha"] is None:
        params["alpha"] = math.pi / 2
    dim = data["observable"].shape[0] if "observable" in data else params.get("dim", 2)
    pair = _pair(params, data, dim)
    a = _observable(params, data, pair) if "alpha" in params else None
    if "p1" in data:
        params["p1"] = data["p1"]
    return pair, a


def _bound_or_inf(pair: StatePair) -> float:
    return math.inf if pair.orthogonal else disc.fleming_bound(pair)


# -- commands ---------------------------------------------------------------

def cmd_delta(cfg: RunConfig):
    pair, a = _problem(cfg)
    stats = disc.discernability(a, pair)
    gap = disc.check_qmie(a, pair)
    bound = _bound_or_inf(pair)
    result = {"theta": pair.theta, "stats": stats.to_dict(), "fleming_bound": bound,
              "bound_gap": (bound - stats.delta) if stats.defined else None, "qmie_gap": gap}
    if not stats.defined:
        return result, EXIT_INPUT, "delta undefined: both uncertainties vanish"
    return result, EXIT_OK, (f"delta = {stats.delta:.7g}  tan(theta) = {bound:.7g}  "
                             f"gap = {bound - stats.delta:.7g}")


def cmd_bound(cfg: RunConfig):
    pair, _ = _problem(cfg)
    try:
        bound = disc.fleming_bound(pair)
    except DomainError as exc:
        raise InputError(f"theta: {exc}") from None
    return {"theta": pair.theta, "fleming_bound": bound}, EXIT_OK, f"tan(theta) = {bound:.7g}"


def cmd_saturate(cfg: RunConfig):
    p = cfg.params
    pair, a = _problem(cfg)
    e1, e2 = disc.build_onb(pair)
    stats = disc.discernability(a, pair)
    report = disc.check_saturation(a, pair, tol=p["tol"])
    result = {"theta": pair.theta, "alpha": p["alpha"], "lambda_scale": p["lambda_scale"],
              "mu_shift": p["mu_shift"], "basis": {"e1": e1, "e2": e2}, "observable": a,
              "stats": stats.to_dict(), "saturation": report.to_dict()}
    return result, EXIT_OK, f"delta = {stats.delta:.7g}  saturated = {report.saturated}"


def cmd_check(cfg: RunConfig):
    pair, a = _problem(cfg)
    gap = disc.check_qmie(a, pair)
    try:
        report = disc.check_saturation(a, pair, tol=cfg.params["tol"])
    except DomainError as exc:
        return {"theta": pair.theta, "qmie_gap": gap, "status": str(exc)}, EXIT_INPUT, str(exc)
    return ({"theta": pair.theta, "saturation": report.to_dict()}, EXIT_OK,
            f"saturated = {report.saturated}  qmie gap = {gap:.7g}")


def cmd_simulate(cfg: RunConfig):
    p = cfg.params
    pair, a = _problem(cfg)
    try:
        rep = run_experiment(a, pair, p["p1"], p["n"], p["trials"], p["seed"], p["workers"])
    except DomainError as exc:
        raise InputError(str(exc)) from None
    code = EXIT_OK if rep.within_bound else EXIT_INVARIANT
    return rep.to_dict(), code, (f"error rate = {rep.empirical_error:.7g}  "
                                 f"bound 1/(n delta^2) = {rep.cheb_bound:.7g}")


def cmd_sweep(cfg: RunConfig):
    p = cfg.params
    data = load_input(cfg.input_path)
    if p["theta_values"] is None and "v" not in data:
        raise UsageError("--theta-values is required")
    if p["n_values"] is None:
        p["n_values"] = [1, 10, 100, 1000]
    if "p1" in data:
        p["p1"] = data["p1"]
    pairs = ([make_state_pair(data["v"], data["w"])] if "v" in data
             else [standard_pair(t, p["dim"]) for t in p["theta_values"]])
    grid = []
    for pair in pairs:
        if p["alpha_values"] is not None:
            alphas = p["alpha_values"]
        elif p["alpha_count"] is not None:
            alphas = np.linspace(pair.theta, math.pi - pair.theta, p["alpha_count"]).tolist()
        else:
            alphas = [math.pi / 2]
        for alpha in alphas:
            for n in p["n_values"]:
                grid.append((pair.theta, alpha, n, pair))
    if not grid:
        raise UsageError("empty sweep grid")
    grid.sort(key=lambda g: g[:3])
    rows = []
    for theta, alpha, n, pair in grid:
        params = dict(p, alpha=alpha)
        a = _observable(params, data, pair)
        try:
            rep = run_experiment(a, pair, p["p1"], n, p["trials"], p["seed"], p["workers"])
        except DomainError as exc:
            raise InputError(f"theta={theta!r}, alpha={alpha!r}: {exc}") from None
        rows.append({"theta": theta, "alpha": alpha, "n": n, "trials": rep.trials,
                     "empirical_error": rep.empirical_error, "cheb_bound": rep.cheb_bound,
                     "delta": rep.delta, "seed": rep.seed})
    return rows, EXIT_OK, f"{len(rows)} sweep rows"


def cmd_maximize(cfg: RunConfig):
    p = cfg.params
    if p["dim"] > MAX_SEARCH_DIM:
        raise UsageError(f"--dim is capped at {MAX_SEARCH_DIM} for the search")
    pair, _ = _problem(cfg)
    if pair.orthogonal or pair.theta >= math.pi / 2 - 1e-12:
        raise InputError("theta: orthogonal states, the bound is infinite")
    search = SearchConfig(restarts=p["restarts"], max_evals=p["max_evals"], seed=p["seed"],
                          xatol=p["xatol"], fatol=p["fatol"], init_noise=p["init_noise"],
                          polish_rounds=p["polish_rounds"])
    res = maximize_delta(pair, max(p["dim"], pair.dim), search)
    result = res.to_dict()
    big = embed_pair(pair, res.best_operator.shape[0])
    result["saturation"] = disc.check_saturation(res.best_operator, big, tol=1e-2).to_dict()
    result["subspace_residual"] = result["saturation"]["subspace_residual"]
    return result, EXIT_OK, (f"best delta = {res.best_value:.7g}  tan(theta) = {res.bound:.7g}  "
                             f"converged = {res.converged}")


def cmd_reference(cfg: RunConfig):
    p = cfg.params
    thetas = p["theta_values"] or [math.pi / 3]
    p1s = p["p1_values"] or [0.5]
    p["theta_values"], p["p1_values"] = thetas, p1s
    rows = []
    for theta in thetas:
        for p1 in p1s:
            try:
                rows.append({"theta": theta, "p1": p1,
                             "min_error_prob": disc.min_error_prob(theta, p1),
                             "unambiguous_max": disc.unambiguous_max(theta, p1),
                             "regime": disc.unambiguous_regime(theta, p1)})
            except DomainError as exc:
                raise InputError(f"theta={theta!r}, p1={p1!r}: {exc}") from None
    return rows, EXIT_OK, f"{len(rows)} reference rows"


COMMANDS = {
    "delta": cmd_delta, "bound": cmd_bound, "saturate": cmd_saturate, "check": cmd_check,
    "simulate": cmd_simulate, "sweep": cmd_sweep, "maximize": cmd_maximize,
    "reference": cmd_reference,
}


# -- output -----------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(rows[0]))
    for r in rows:
        writer.writerow([_fmt(v) for v in r.values()])
    return buf.getvalue()


def _resolve_output(path: str | None) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    base = os.environ.get(ENV_OUTPUT_DIR)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def emit(cfg: RunConfig, result) -> None:
    out = _resolve_output(cfg.output_path)
    echo = cfg.to_dict()
    if cfg.format == "csv":
        text = rows_to_csv(result)
        if out is None:
            sys.stderr.write("config: " + json.dumps(echo) + "\n")
            sys.stdout.write(text)
        else:
            write_atomic(out, text)
            write_atomic(out.with_name(out.name + ".config.json"), dumps(echo) + "\n")
        return
    text = dumps({"config": echo, "result": result}) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        write_atomic(out, text)


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
        result, code, summary = COMMANDS[cfg.command](cfg)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"qdiscern: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"qdiscern: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InvariantViolation, NumericalCorruption) as exc:
        print(f"qdiscern: numerical invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    emit(cfg, result)
    print(summary, file=sys.stderr)
    return code


def entry() -> None:
    sys.exit(main())
