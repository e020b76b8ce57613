"""Command-line front end: ``halfline {kernel,slice,compose,decompose,verify}``.

Every command writes a CSV table (header row, 17 significant digits, LF line
endings) to ``--out`` or stdout. ``--format csv+plot`` also writes a gnuplot
script next to the CSV.

Exit codes: 0 success, 1 verification failure, 2 invalid input, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
import warnings
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import decomposition as dec
from . import kernels as kn
from . import slicing as sl
from . import specfun as sf
from . import verify as vf
from .errors import DomainError, HalflineError, NumericalError

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INVALID = 2
EXIT_NUMERICAL = 3


class UsageError(Exception):
    """Bad command-line input; the message names the offending flag."""

    def __init__(self, flag: str, message: str):
        super().__init__(f"{flag}: {message}")
        self.flag = flag


# -- flag parsing --------------------------------------------------------------


def _float(flag: str, text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise UsageError(flag, f"expected a number, got {text!r}") from None
    if not math.isfinite(value):
        raise UsageError(flag, f"must be finite, got {text!r}")
    return value


def _int(flag: str, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise UsageError(flag, f"expected an integer, got {text!r}") from None


def _key_values(flag: str, text: str) -> dict[str, str]:
    out = {}
    for item in filter(None, text.split(",")):
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(flag, f"expected key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def parse_potential(text: str) -> kn.PotentialSpec:
    """``zero``, ``harmonic:omega=W``, ``coulomb:alpha=A`` or ``power:c=C,p=P``."""
    flag = "--potential"
    kind, _, rest = text.partition(":")
    params = _key_values(flag, rest)
    expected = {"zero": set(), "harmonic": {"omega"}, "coulomb": {"alpha"}, "power": {"c", "p"}}
    if kind not in expected:
        raise UsageError(flag, f"unknown potential {kind!r}; choose zero, harmonic, coulomb or power")
    if set(params) != expected[kind]:
        need = ",".join(sorted(expected[kind])) or "no parameters"
        raise UsageError(flag, f"{kind} takes {need}, got {text!r}")
    vals = {k: _float(flag, v) for k, v in params.items()}
    try:
        if kind == "zero":
            return kn.Zero()
        if kind == "harmonic":
            return kn.Harmonic(vals["omega"])
        if kind == "coulomb":
            return kn.Coulomb(vals["alpha"])
        return kn.PowerLaw(vals["c"], vals["p"])
    except DomainError as exc:
        raise UsageError(flag, str(exc)) from None


def parse_grid(text: str) -> np.ndarray:
    """``lo:hi:count`` with ``0 < lo <= hi`` and ``count >= 1``."""
    flag = "--grid"
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(flag, f"expected lo:hi:count, got {text!r}")
    lo, hi = _float(flag, parts[0]), _float(flag, parts[1])
    count = _int(flag, parts[2])
    if count < 1:
        raise UsageError(flag, f"grid is empty (count={count}); count must be >= 1")
    if not 0 < lo <= hi:
        raise UsageError(flag, f"need 0 < lo <= hi, got lo={lo:g}, hi={hi:g}")
    if count > 1 and lo == hi:
        raise UsageError(flag, "lo == hi with count > 1 repeats one point")
    return np.linspace(lo, hi, count)


def parse_quad(text: str) -> sl.QuadratureSpec:
    """``nodes=N,panels=P,xmax=X``; any subset, the rest defaulted."""
    flag = "--quad"
    params = _key_values(flag, text)
    unknown = set(params) - {"nodes", "panels", "xmax"}
    if unknown:
        raise UsageError(flag, f"unknown keys {sorted(unknown)}; allowed: nodes, panels, xmax")
    kwargs = {}
    if "nodes" in params:
        kwargs["nodes_per_panel"] = _int(flag, params["nodes"])
    if "panels" in params:
        kwargs["panels"] = _int(flag, params["panels"])
    if "xmax" in params:
        kwargs["x_max"] = _float(flag, params["xmax"])
    try:
        return sl.QuadratureSpec(**kwargs)
    except DomainError as exc:
        raise UsageError(flag, str(exc)) from None


def _positive(flag: str, value: float) -> float:
    if not value > 0:
        raise UsageError(flag, f"must be > 0, got {value:g}")
    return value


def read_config(path: str) -> list[str]:
    """Flat ``key=value`` file turned into ``--key value`` tokens."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError("--config", f"cannot read {path!r}: {exc.strerror}") from None
    tokens: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError("--config", f"{path}:{lineno}: expected key=value, got {line!r}")
        key = key.strip().replace("_", "-")
        if key == "config":
            raise UsageError("--config", f"{path}:{lineno}: key {key!r} is not allowed")
        tokens.append(f"--{key}")
        tokens.extend(value.split())
    return tokens


# -- run configuration ----------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    system: kn.SystemSpec
    quad: sl.QuadratureSpec | None
    out: str | None
    fmt: str


def build_config(args: argparse.Namespace) -> RunConfig:
    nu = _float("--nu", args.nu)
    if nu < 0.5:
        raise UsageError("--nu", f"must be >= 1/2, got {nu:g}")
    mass = _positive("--mass", _float("--mass", args.mass))
    hbar = _positive("--hbar", _float("--hbar", args.hbar))
    potential = parse_potential(args.potential)
    quad = parse_quad(args.quad) if args.quad else None
    system = kn.SystemSpec(nu=nu, mass=mass, hbar=hbar, potential=potential)
    return RunConfig(system, quad, args.out, args.format)


def _eps_list(args: argparse.Namespace, default_from_beta: bool = True) -> list[float]:
    if args.eps:
        return [_positive("--eps", _float("--eps", e)) for e in args.eps]
    if default_from_beta and args.beta is not None:
        return [_beta(args)]
    return [1.0]


def _beta(args: argparse.Namespace, default: float = 1.0) -> float:
    if args.beta is None:
        return default
    return _positive("--beta", _float("--beta", args.beta))


def _branch(args: argparse.Namespace) -> int:
    if args.branch not in ("+1", "1", "-1"):
        raise UsageError("--branch", f"must be +1 or -1, got {args.branch!r}")
    return -1 if args.branch == "-1" else 1


# -- output ---------------------------------------------------------------------------


def fmt(value) -> str:
    """17 significant digits; booleans as 0/1; None as an empty field."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return format(float(value), ".17g")


def render_csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def plot_script(csv_path: str, header: list[str], x_col: str, y_cols: list[str], logscale: bool = False) -> str:
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set xlabel '{x_col}'",
    ]
    if logscale:
        lines.append("set logscale xy")
    xi = header.index(x_col) + 1
    plots = [f"'{csv_path}' using {xi}:{header.index(c) + 1} with linespoints" for c in y_cols]
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


def emit(cfg: RunConfig, header, rows, x_col: str, y_cols: list[str], logscale: bool = False) -> None:
    text = render_csv(header, rows)
    if cfg.out:
        Path(cfg.out).write_text(text, newline="\n")
    else:
        sys.stdout.write(text)
    if cfg.fmt == "csv+plot":
        csv_name = cfg.out or "data.csv"
        script = plot_script(Path(csv_name).name, header, x_col, y_cols, logscale)
        target = Path(cfg.out).with_suffix(".gp") if cfg.out else None
        if target is None:
            sys.stderr.write(script)
        else:
            target.write_text(script, newline="\n")


def _pairs(grid: np.ndarray):
    for x in grid:
        for xp in grid:
            yield float(x), float(xp)


# -- commands ---------------------------------------------------------------------------


def cmd_kernel(args, cfg: RunConfig) -> int:
    grid = parse_grid(args.grid)
    spec = cfg.system
    if args.exact == "free" and not (spec.nu == 1 and isinstance(spec.potential, kn.Zero)):
        raise UsageError("--exact", "free closed form needs --nu 1 --potential zero")
    if args.exact == "oscillator" and not isinstance(spec.potential, kn.Harmonic):
        raise UsageError("--exact", "oscillator closed form needs --potential harmonic:omega=W")
    rows = []
    for eps in _eps_list(args):
        x, xp = np.meshgrid(grid, grid, indexing="ij")
        if args.exact == "free":
            vals = kn.exact_free_halfline(spec.mass, spec.hbar, x, xp, eps)
        elif args.exact == "oscillator":
            vals = kn.radial_oscillator_kernel(spec.nu, spec.potential.omega, spec.mass, spec.hbar, x, xp, eps)
        else:
            vals = kn.short_time_kernel(spec, x, xp, eps)
        for i, j in np.ndindex(vals.shape):
            rows.append((x[i, j], xp[i, j], eps, vals[i, j]))
    emit(cfg, ["x", "xprime", "eps", "value"], rows, "xprime", ["value"])
    return EXIT_OK


def cmd_slice(args, cfg: RunConfig) -> int:
    spec = cfg.system
    a = _positive("--a", _float("--a", args.a))
    b = _positive("--b", _float("--b", args.b))
    beta = _beta(args)
    n_list = [_int("--n-slices", n) for n in (args.n_slices or ["1", "2", "4", "8", "16", "32"])]
    if any(n < 1 for n in n_list):
        raise UsageError("--n-slices", "every N must be >= 1")
    if len(set(n_list)) != len(n_list) or n_list != sorted(n_list):
        raise UsageError("--n-slices", "N values must be strictly increasing")
    quad = cfg.quad
    if quad is not None and quad.x_max is not None and max(a, b) > 0.8 * quad.x_max:
        raise UsageError("--quad", f"xmax={quad.x_max:g} too small for endpoints a={a:g}, b={b:g}")
    header = ["N", "eps", "value", "rel_error_vs_exact", "observed_order"]
    if sl.exact_reference(spec, a, b, beta) is None:
        warnings.warn(f"no exact reference for potential {spec.potential}; error columns left empty")
        rows = [(n, beta / n, sl.time_sliced_kernel(spec, a, b, beta, n, quad), None, None) for n in n_list]
    else:
        records = sl.convergence_study(spec, a, b, beta, n_list, quad)
        rows = []
        for r in records:
            order = None if math.isnan(r.observed_order) else ("exact" if math.isinf(r.observed_order) else r.observed_order)
            rows.append((r.N, r.eps, r.value, r.max_rel_error, order))
    emit(cfg, header, rows, "N", ["rel_error_vs_exact"], logscale=True)
    return EXIT_OK


def cmd_compose(args, cfg: RunConfig) -> int:
    spec = cfg.system
    grid = parse_grid(args.grid)
    if not args.eps or len(args.eps) != 2:
        raise UsageError("--eps", "compose needs exactly two values: --eps EPS1 EPS2")
    e1, e2 = (_positive("--eps", _float("--eps", e)) for e in args.eps)
    top = float(grid.max())
    quad = cfg.quad
    if quad is None:
        quad = sl.QuadratureSpec.for_problem(spec, top, top, e1 + e2, 2)
    elif quad.x_max is None:
        quad = replace(quad, x_max=sl.default_x_max(spec, top, top, e1 + e2))
    if top > 0.8 * quad.x_max:
        raise UsageError("--quad", f"xmax={quad.x_max:g} too small for grid maximum {top:g}")
    composed = sl.compose_points(spec, grid, grid, e1, e2, quad)
    x, xp = np.meshgrid(grid, grid, indexing="ij")
    direct = kn.short_time_kernel(spec, x, xp, e1 + e2)
    rows = []
    for i, j in np.ndindex(composed.shape):
        rows.append((x[i, j], xp[i, j], e1, e2, composed[i, j], direct[i, j], abs(composed[i, j] - direct[i, j]) / direct[i, j]))
    header = ["x", "xprime", "eps1", "eps2", "composed", "kernel_sum", "rel_error"]
    emit(cfg, header, rows, "xprime", ["composed", "kernel_sum"])
    return EXIT_OK


def cmd_decompose(args, cfg: RunConfig) -> int:
    spec = cfg.system
    grid = parse_grid(args.grid)
    branch = _branch(args)
    rows = []
    for eps in _eps_list(args):
        for x, xp in _pairs(grid):
            try:
                d = dec.decompose(spec, x, xp, eps, branch)
            except DomainError as exc:
                raise UsageError("--potential", str(exc)) from None
            rows.append(
                (x, xp, eps, complex(d.direct).real, complex(d.direct).imag, d.reflected.real, d.reflected.imag, d.total.real, d.total.imag, d.valid)
            )
    header = ["x", "xprime", "eps", "direct_re", "direct_im", "reflected_re", "reflected_im", "total_re", "total_im", "valid"]
    emit(cfg, header, rows, "xprime", ["direct_re", "reflected_re", "total_re"])
    return EXIT_OK


def cmd_verify(args, cfg: RunConfig) -> int:
    only = None
    if args.only:
        only = [s for item in args.only for s in item.split(",") if s]
        known = set(vf.GROUPS) | {c.name for c in vf.CHECKS}
        bad = sorted(set(only) - known)
        if bad:
            raise UsageError("--only", f"unknown check or group {bad}; groups: {', '.join(vf.GROUPS)}")
    scale = _positive("--tolerance-scale", _float("--tolerance-scale", args.tolerance_scale))
    reports = vf.run_checks(only, scale)
    header = ["group", "name", "parameters", "residual", "tolerance", "passed"]
    if args.timing:
        header.append("wall_time")
    rows = []
    for r in reports:
        row = [r.group, r.name, r.parameters, r.residual, r.tolerance, r.passed]
        if args.timing:
            row.append(r.wall_time)
        rows.append(row)
    emit(cfg, header, rows, "name", ["residual"])
    return EXIT_OK if all(r.passed for r in reports) else EXIT_VERIFY_FAILED


def cmd_specfun_table(args, cfg: RunConfig) -> int:
    grid = parse_grid(args.grid)
    mus = [_float("--mu", m) for m in (args.mu or ["0", "0.5", "1", "2"])]
    if any(m < -0.5 for m in mus):
        raise UsageError("--mu", "orders below -1/2 are not supported")
    rows = [(mu, float(z), sf.bessel_i_scaled(mu, float(z))) for mu in mus for z in grid]
    emit(cfg, ["mu", "z", "value"], rows, "z", ["value"])
    return EXIT_OK


COMMANDS = {
    "kernel": cmd_kernel,
    "slice": cmd_slice,
    "compose": cmd_compose,
    "decompose": cmd_decompose,
    "verify": cmd_verify,
    "specfun-table": cmd_specfun_table,
}


# -- parser ------------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("system and output")
    g.add_argument("--config", help="flat key=value file; explicit flags take precedence")
    g.add_argument("--nu", default="1", help="centrifugal index nu >= 1/2 (default 1)")
    g.add_argument("--mass", default="1")
    g.add_argument("--hbar", default="1")
    g.add_argument("--potential", default="zero", help="zero | harmonic:omega=W | coulomb:alpha=A | power:c=C,p=P")
    g.add_argument("--eps", nargs="+", help="imaginary time step(s)")
    g.add_argument("--beta", help="total imaginary time")
    g.add_argument("--n-slices", nargs="+", help="slice counts N")
    g.add_argument("--grid", default="0.25:2:8", help="lo:hi:count, used for both x and x'")
    g.add_argument("--quad", help="nodes=N,panels=P,xmax=X")
    g.add_argument("--branch", default="+1", help="+1 or -1: sign of arg(xx') = +-pi")
    g.add_argument("--out", help="output CSV path (default stdout)")
    g.add_argument("--format", choices=("csv", "csv+plot"), default="csv")

    parser = _Parser(prog="halfline", description="Feynman kernels on the half-line with centrifugal potential.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("kernel", parents=[common], help="short-time kernel (or a closed form) on a grid")
    p.add_argument("--exact", choices=("none", "free", "oscillator"), default="none")

    p = sub.add_parser("slice", parents=[common], help="time-sliced kernel convergence table")
    p.add_argument("--a", default="1")
    p.add_argument("--b", default="1")

    sub.add_parser("compose", parents=[common], help="numerical composition K(eps1) o K(eps2)")
    sub.add_parser("decompose", parents=[common], help="direct and reflected path terms")

    p = sub.add_parser("verify", parents=[common], help="run the self-check suite")
    p.add_argument("--only", nargs="+", help="groups or check names to run")
    p.add_argument("--tolerance-scale", default="1")
    p.add_argument("--timing", action="store_true", help="add a wall_time column (output no longer byte-stable)")

    p = sub.add_parser("specfun-table", parents=[common], help=argparse.SUPPRESS)
    p.add_argument("--mu", nargs="+")
    return parser


def _expand_config(argv: list[str]) -> list[str]:
    """Insert config-file tokens right after the subcommand so later flags win."""
    if "--config" not in argv and not any(a.startswith("--config=") for a in argv):
        return argv
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
            break
        if a.startswith("--config="):
            path = a.split("=", 1)[1]
            break
    else:
        raise UsageError("--config", "missing file path")
    tokens = read_config(path)
    cmd_index = next((i for i, a in enumerate(argv) if a in COMMANDS), None)
    if cmd_index is None:
        return argv
    return argv[: cmd_index + 1] + tokens + argv[cmd_index + 1 :]


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_expand_config(argv))
        cfg = build_config(args)
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = _show_warning
            return COMMANDS[args.command](args, cfg)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"halfline: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"halfline: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DomainError, HalflineError) as exc:
        print(f"halfline: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"halfline: warning: {message}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
