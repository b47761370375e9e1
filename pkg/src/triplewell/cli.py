"""Command-line driver.

    triplewell instanton   --omega 1            profile table (tau, x_c, dx_c, x_o)
    triplewell determinant --omega 1 --half-box 8
    triplewell gas         --omega 4
    triplewell spectrum    --omega 4 [--operator stability]
    triplewell compare     --omega 4,6,8
    triplewell sweep       --command compare --omega 4,6,8 --jobs 3

Exit codes: 0 success, 2 invalid configuration, 3 numerical-regime failure.
"""

from __future__ import annotations

import argparse
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .dilute_gas import dilute_gas, energy_levels, instanton_density
from .errors import NumericalRegimeError
from .fluctuation import IVP_MAX_KT, RESCALE_AT, reduced_ratio, stability_problem
from .instanton import (
    BOUNDARY_LAYER_V,
    DEFAULT_OMEGA_STEP,
    DEFAULT_OMEGA_T,
    box_grid,
    closed_form_profile,
    make_grid,
    solve_bogomolny,
    zero_mode,
)
from .potential import PotentialSpec, canonical_omega, triple_well
from .report import to_csv, to_json
from .spectrum_oracle import (
    BOX_RTOL,
    DEFAULT_POINTS,
    DEFAULT_SCHRODINGER_HALF_WIDTH,
    GridSpec,
    diagonalize_schrodinger,
    diagonalize_stability,
    parities,
    schrodinger_states,
)

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

COMMANDS = ("instanton", "determinant", "gas", "spectrum", "compare")
DEFAULT_FORMAT = {
    "instanton": "csv",
    "determinant": "json",
    "gas": "json",
    "spectrum": "csv",
    "compare": "csv",
}
COLUMNS = {
    "instanton": ["omega", "tau", "x_c", "dx_c", "x_o"],
    "determinant": ["omega", "T", "f_end", "g_end", "lambda", "raw_ratio", "reduced_ratio", "route"],
    "gas": ["omega", "d", "E0", "E1", "E2", "d_pipeline", "d_ratio"],
    "spectrum": ["omega", "T_or_L", "N", "index", "eigenvalue"],
    "compare": [
        "omega", "E0_semi", "E1_semi", "E2_semi", "E0_num", "E1_num", "E2_num",
        "splitting_ratio", "parity_1",
    ],
}
OPTION_KEYS = (
    "omega", "half_box", "grid_n", "convention", "format", "output", "jobs",
    "count", "operator", "method",
)


class ConfigError(Exception):
    """Invalid run configuration; ``where`` is a ``source:line`` locator."""

    def __init__(self, where: str, message: str) -> None:
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class RunConfig:
    command: str
    omegas: tuple[float, ...]
    half_box: float | None = None
    grid_n: int | None = None
    convention: str = "canonical"
    format: str = "json"
    output: str | None = None
    jobs: int = 1
    count: int = 3
    operator: str = "schrodinger"
    method: str = "closed"


# ---------------------------------------------------------------- per-omega work


def _spec(cfg: dict, omega: float) -> PotentialSpec:
    return triple_well(omega, cfg["convention"])


def _instanton_rows(cfg: dict, omega: float) -> list[dict]:
    spec = _spec(cfg, omega)
    w = canonical_omega(spec)
    half_box = cfg["half_box"] or 0.5 * DEFAULT_OMEGA_T / w
    if cfg["grid_n"]:
        grid = np.linspace(-half_box, half_box, cfg["grid_n"])
    else:
        grid = make_grid(half_box, DEFAULT_OMEGA_STEP / w)
    if cfg["method"] == "numeric":
        profile = solve_bogomolny(spec, 0.0, 1.0, grid)
    else:
        profile = closed_form_profile(w, grid=grid)
    x_o = zero_mode(profile)
    return [
        {"omega": omega, "tau": t, "x_c": x, "dx_c": v, "x_o": z}
        for t, x, v, z in zip(profile.tau, profile.x_c, profile.dx_c, x_o)
    ]


def _determinant_rows(cfg: dict, omega: float) -> list[dict]:
    w = canonical_omega(_spec(cfg, omega))
    half_box = cfg["half_box"] or 8.0 / w
    profile = closed_form_profile(w, grid=box_grid(w, half_box))
    problem = stability_problem(profile, half_box)
    rec = reduced_ratio(profile, problem, steps=cfg["grid_n"]).to_record()
    rec["omega"] = omega
    return [rec]


def _gas_rows(cfg: dict, omega: float) -> list[dict]:
    w = canonical_omega(_spec(cfg, omega))
    rec = dilute_gas(w, cfg["half_box"]).to_record()
    rec["omega"] = omega
    return [rec]


def _spectrum_rows(cfg: dict, omega: float) -> list[dict]:
    spec = _spec(cfg, omega)
    n = cfg["grid_n"] or DEFAULT_POINTS
    count = cfg["count"]
    if cfg["operator"] == "stability":
        w = canonical_omega(spec)
        half_box = cfg["half_box"] or 8.0 / w
        profile = closed_form_profile(w, grid=box_grid(w, half_box))
        eig = diagonalize_stability(profile, half_box, GridSpec(half_box, n), count)
        size = 2.0 * half_box
    else:
        grid = GridSpec(cfg["half_box"] or DEFAULT_SCHRODINGER_HALF_WIDTH, n)
        eig = diagonalize_schrodinger(spec, grid, count)
        size = grid.half_width
    return [
        {"omega": omega, "T_or_L": size, "N": n, "index": i, "eigenvalue": float(e)}
        for i, e in enumerate(eig)
    ]


def _compare_rows(cfg: dict, omega: float) -> list[dict]:
    spec = _spec(cfg, omega)
    w = canonical_omega(spec)
    grid = GridSpec(cfg["half_box"] or DEFAULT_SCHRODINGER_HALF_WIDTH, cfg["grid_n"] or DEFAULT_POINTS)
    semi = energy_levels(w)
    num = diagonalize_schrodinger(spec, grid, 3)
    _, vecs, _ = schrodinger_states(spec, grid, 3)
    parity = parities(vecs)[1]
    return [{
        "omega": omega,
        "E0_semi": semi.e0,
        "E1_semi": semi.e1,
        "E2_semi": semi.e2,
        "E0_num": float(num[0]),
        "E1_num": float(num[1]),
        "E2_num": float(num[2]),
        "splitting_ratio": float(num[2] - num[0]) / (2.0 * w * instanton_density(w)),
        "parity_1": "odd" if parity < 0 else "even",
    }]


_WORKERS = {
    "instanton": _instanton_rows,
    "determinant": _determinant_rows,
    "gas": _gas_rows,
    "spectrum": _spectrum_rows,
    "compare": _compare_rows,
}


def _work(args: tuple[str, dict, float]) -> list[dict]:
    command, cfg, omega = args
    return _WORKERS[command](cfg, omega)


def _tolerances(config: RunConfig) -> dict[str, Any]:
    c = config.command
    if c == "instanton":
        return {"bogomolny_tol": 1e-12, "boundary_layer_V": BOUNDARY_LAYER_V,
                "grid_step_omega": DEFAULT_OMEGA_STEP}
    if c in ("determinant", "gas"):
        tol = {"rk4_step_omega": 0.005, "rescale_at": RESCALE_AT, "ivp_max_kT": IVP_MAX_KT,
               "lambda_slope_rtol": 0.02}
        if c == "gas":
            tol["series_rtol"] = 1e-15
        return tol
    order = 4 if (c == "spectrum" and config.operator == "stability") else 2
    return {"box_rtol": BOX_RTOL, "richardson": order == 2, "stencil_order": order}


def run(config: RunConfig) -> str:
    """Execute ``config`` and return the rendered report."""
    cfg = asdict(config)
    tasks = [(config.command, cfg, w) for w in config.omegas]
    if config.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            blocks = list(pool.map(_work, tasks))
    else:
        blocks = [_work(t) for t in tasks]
    rows = [r for block in blocks for r in block]
    meta = {
        "command": config.command,
        "convention": config.convention,
        "version": __version__,
        "tolerances": _tolerances(config),
    }
    if config.command == "spectrum":
        meta["operator"] = config.operator
    if config.format == "csv":
        return to_csv(meta, COLUMNS[config.command], rows)
    return to_json(meta, rows)


# ---------------------------------------------------------------- configuration


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--omega", help="frequency parameter, or comma-separated list")
    parser.add_argument("--half-box", dest="half_box",
                        help="T/2 for time-domain commands, L for spectrum/compare")
    parser.add_argument("--grid-n", dest="grid_n", help="grid points (or RK4 steps)")
    parser.add_argument("--convention", help="canonical | literal")
    parser.add_argument("--format", help="csv | json")
    parser.add_argument("--output", help="output file (default stdout)")
    parser.add_argument("--jobs", help="parallel workers for omega lists")
    parser.add_argument("--config", help="TOML file; flags take precedence")
    parser.add_argument("--count", help="number of eigenvalues (spectrum)")
    parser.add_argument("--operator", help="schrodinger | stability (spectrum)")
    parser.add_argument("--method", help="closed | numeric (instanton)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="triplewell", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        _common(sub.add_parser(name))
    sweep = sub.add_parser("sweep", help="run a command over a list of omegas")
    _common(sweep)
    sweep.add_argument("--command", dest="sweep_command", help="|".join(COMMANDS))
    return parser


def _argv_locator(argv: Sequence[str], key: str) -> str:
    flag = "--" + key.replace("_", "-")
    for i, tok in enumerate(argv):
        if tok == flag or tok.startswith(flag + "="):
            return f"argv:{i + 1}"
    return "argv:0"


def _config_locator(path: str, text: str, key: str) -> str:
    for lineno, line in enumerate(text.splitlines(), 1):
        if re.match(rf"\s*{re.escape(key)}\s*=", line):
            return f"{path}:{lineno}"
    return f"{path}:0"


def _load_config(path: str) -> tuple[dict, str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}:0", f"cannot read config: {exc.strerror}") from None
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None) or _line_from_message(str(exc))
        raise ConfigError(f"{path}:{line}", f"invalid TOML: {exc}") from None
    unknown = sorted(set(data) - set(OPTION_KEYS) - {"command"})
    if unknown:
        raise ConfigError(_config_locator(path, text, unknown[0]), f"unknown key {unknown[0]!r}")
    return data, text


def _line_from_message(msg: str) -> int:
    m = re.search(r"line (\d+)", msg)
    return int(m.group(1)) if m else 0


def _positive_float(value: Any, name: str, where: str) -> float:
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise ConfigError(where, f"{name} must be a number, got {value!r}") from None
    if not x > 0 or x == float("inf"):
        raise ConfigError(where, f"{name} must be positive and finite, got {value!r}")
    return x


def _positive_int(value: Any, name: str, where: str, minimum: int = 1) -> int:
    try:
        n = int(str(value))
    except ValueError:
        raise ConfigError(where, f"{name} must be an integer, got {value!r}") from None
    if n < minimum:
        raise ConfigError(where, f"{name} must be >= {minimum}, got {n}")
    return n


def _choice(value: Any, name: str, where: str, options: Sequence[str]) -> str:
    if value not in options:
        raise ConfigError(where, f"{name} must be one of {', '.join(options)}, got {value!r}")
    return value


def resolve_config(ns: argparse.Namespace, argv: Sequence[str]) -> RunConfig:
    """Merge flags over the optional config file and validate everything."""
    file_data: dict = {}
    text = ""
    if ns.config:
        file_data, text = _load_config(ns.config)

    values: dict[str, Any] = {}
    where: dict[str, str] = {}
    for key in OPTION_KEYS:
        flag_value = getattr(ns, key, None)
        if flag_value is not None:
            values[key], where[key] = flag_value, _argv_locator(argv, key)
        elif key in file_data:
            values[key], where[key] = file_data[key], _config_locator(ns.config, text, key)

    command = ns.command
    if command == "sweep":
        sub = ns.sweep_command if ns.sweep_command is not None else file_data.get("command")
        loc = _argv_locator(argv, "command") if ns.sweep_command else (
            _config_locator(ns.config, text, "command") if ns.config else "argv:0")
        if sub is None:
            raise ConfigError(loc, "sweep needs --command")
        command = _choice(sub, "command", loc, COMMANDS)

    raw = values.get("omega", 1.0)
    loc = where.get("omega", "argv:0")
    if isinstance(raw, str):
        parts = [p for p in raw.split(",") if p.strip()]
    elif isinstance(raw, (list, tuple)):
        parts = list(raw)
    else:
        parts = [raw]
    if not parts:
        raise ConfigError(loc, "omega list is empty")
    omegas = tuple(_positive_float(p, "omega", loc) for p in parts)

    def get(key, convert, default):
        if key not in values:
            return default
        return convert(values[key], where[key])

    return RunConfig(
        command=command,
        omegas=omegas,
        half_box=get("half_box", lambda v, w: _positive_float(v, "half_box", w), None),
        grid_n=get("grid_n", lambda v, w: _positive_int(v, "grid_n", w, 100), None),
        convention=get("convention", lambda v, w: _choice(v, "convention", w, ("canonical", "literal")),
                       "canonical"),
        format=get("format", lambda v, w: _choice(v, "format", w, ("csv", "json")),
                   DEFAULT_FORMAT[command]),
        output=get("output", lambda v, w: str(v), None),
        jobs=get("jobs", lambda v, w: _positive_int(v, "jobs", w), 1),
        count=get("count", lambda v, w: _positive_int(v, "count", w), 3),
        operator=get("operator", lambda v, w: _choice(v, "operator", w, ("schrodinger", "stability")),
                     "schrodinger"),
        method=get("method", lambda v, w: _choice(v, "method", w, ("closed", "numeric")), "closed"),
    )


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ns = build_parser().parse_args(argv)
    try:
        config = resolve_config(ns, argv)
    except ConfigError as exc:
        print(f"triplewell: error: {exc}", file=sys.stderr)
        return 2
    try:
        text = run(config)
    except NumericalRegimeError as exc:
        print(f"triplewell: numerical regime violated: {exc}", file=sys.stderr)
        return 3
    if config.output and config.output != "-":
        with open(config.output, "w", newline="\n") as fh:
            fh.write(text)
    else:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            sys.stderr.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
