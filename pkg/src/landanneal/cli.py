"""Command-line front end.

Exit codes: 0 success, 2 configuration/usage error, 3 I/O error,
4 numerical failure (quadrature, density underflow, divergence).
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .critheight import Grid1D, clipped_critical_height, critical_height, read_grid_csv
from .errors import ConfigError, NumericError
from .gibbs import density_1d, tail_mass
from .harness import run_experiment, write_csv
from .integrators import NoiseStream, simulate
from .landscape import FModifier, ModifiedLandscape, landscape_grid
from .potentials import get_potential

OUTPUT_ENV = "LANDANNEAL_OUTPUT_DIR"

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _grid(text: str) -> np.ndarray:
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise ConfigError(f"grid must be lo:hi:n, got {text!r}") from None
    if n < 1 or (n > 1 and not hi > lo):
        raise ConfigError(f"grid {text!r} needs n >= 1 and hi > lo")
    return np.linspace(lo, hi, n)


def _output(args, default_name: str) -> Path:
    if args.output:
        return Path(args.output)
    return Path(os.environ.get(OUTPUT_ENV, ".")) / default_name


def _one_dim(name: str):
    try:
        p = get_potential(name)
    except KeyError as exc:
        raise ConfigError(str(exc.args[0])) from None
    if p.dim != 1:
        raise ConfigError(f"potential {name!r} is {p.dim}-dimensional; this command needs a 1D potential")
    return p


def _write_rows(path: Path, header, rows) -> None:
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


# -- subcommands ------------------------------------------------------------


def cmd_compare(args) -> int:
    exp = cfgmod.load_experiment(args.config, args.set)
    curves = run_experiment(exp)
    out = _output(args, "compare.csv")
    write_csv(curves, out)
    print(f"potential={exp.potential} replicas={exp.n_replicas} steps={exp.n_steps} delta={exp.delta:g} seed={exp.base_seed}")
    print(f"{'method':<8} {'theta':>12} {'p_inst':>8} {'p_runmin':>9} {'diverged':>9}")
    for c in curves:
        print(f"{c.method:<8} {c.theta[-1]:>12.6g} {c.p_inst[-1]:>8.3f} {c.p_runmin[-1]:>9.3f} {c.n_diverged:>9d}")
    print(f"wrote {out}")
    if args.plot:
        from .plotting import figure_path, plot_curves

        print(f"wrote {plot_curves(curves, figure_path(out), exp.delta)}")
    return EXIT_OK


def cmd_run(args) -> int:
    exp = cfgmod.load_experiment(args.config, args.set)
    label = args.method or next(iter(exp.methods))
    if label not in exp.methods:
        raise ConfigError(f"method {label!r} not configured; have {', '.join(exp.methods)}")
    mcfg = exp.methods[label]
    p = exp.target
    y0 = None
    if mcfg.kinetic:
        y0 = np.zeros(p.dim) if exp.y0 is None else np.asarray(exp.y0)
    ns = NoiseStream(exp.base_seed, args.replica, p.dim)
    traj = simulate(mcfg, p, np.asarray(exp.x0), y0, exp.n_steps, ns, exp.checkpoint_steps())
    out = _output(args, "run.csv")
    header = ["step", "theta"] + [f"x{i + 1}" for i in range(p.dim)] + ["U", "runmin"]
    rows = [[k, _fmt(t), *(_fmt(v) for v in x), _fmt(u), _fmt(m)] for k, t, x, u, m in traj.rows()]
    _write_rows(out, header, rows)
    print(f"{label}: final U={traj.final.u:.6g} runmin={traj.final.runmin:.6g} theta={traj.final.theta:.6g}")
    print(f"wrote {out}")
    if args.plot:
        from .plotting import figure_path, plot_trajectory

        print(f"wrote {plot_trajectory(traj, figure_path(out))}")
    return EXIT_OK


def cmd_landscape(args) -> int:
    p = _one_dim(args.potential)
    L = ModifiedLandscape(p, FModifier.parse(args.modifier), args.c, args.epsilon)
    table = landscape_grid(L, _grid(args.grid))
    out = _output(args, "landscape.csv")
    _write_rows(out, ["x", "U", "H"], ([_fmt(x), _fmt(u), _fmt(h)] for x, u, h in table.rows()))
    print(f"wrote {out}")
    if args.plot:
        from .plotting import figure_path, plot_landscape

        title = f"eps={args.epsilon:g}, c={args.c:g}, f={L.modifier}"
        print(f"wrote {plot_landscape(table, figure_path(out), title)}")
    return EXIT_OK


def cmd_critheight(args) -> int:
    if args.csv:
        try:
            g = read_grid_csv(args.csv)
        except (ValueError, UnicodeDecodeError) as exc:
            raise ConfigError(f"malformed grid CSV: {exc}") from None
    else:
        p = _one_dim(args.potential)
        xs = _grid(args.grid)
        g = Grid1D(xs, p.energy(xs[:, None]))
    e = critical_height(g)
    c = math.inf if args.c is None else args.c
    cs = clipped_critical_height(g, c, args.delta1)
    i, j = e.pair
    print(f"E_* = {_fmt(e.value)}  pair x=({_fmt(g.xs[i])}, {_fmt(g.xs[j])})")
    i, j = cs.pair
    print(f"c_* = {_fmt(cs.value)}  pair x=({_fmt(g.xs[i])}, {_fmt(g.xs[j])})  c={c:g} delta1={args.delta1:g}")
    return EXIT_OK


def cmd_stationary(args) -> int:
    p = _one_dim(args.potential)
    m = FModifier.parse(args.modifier)
    d = density_1d(p, m, args.c, args.epsilon, _grid(args.grid))
    out = _output(args, "stationary.csv")
    rows = (
        [_fmt(x), _fmt(u), _fmt(h), _fmt(mu)]
        for x, u, h, mu in zip(d.grid.xs, d.grid.us, d.h, d.density)
    )
    _write_rows(out, ["x", "U", "H", "mu"], rows)
    print(f"tail mass P(U > U_min + {args.delta:g}) = {_fmt(tail_mass(d, p, args.delta))}")
    print(f"wrote {out}")
    if args.plot:
        from .plotting import figure_path, plot_density

        title = f"eps={args.epsilon:g}, c={args.c:g}, f={m}"
        print(f"wrote {plot_density(d, figure_path(out), title)}")
    return EXIT_OK


# -- parser -----------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="landanneal", description="Langevin annealing with landscape modification.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, default_name):
        sp.add_argument("-o", "--output", help=f"output CSV (default ${OUTPUT_ENV}/{default_name} or ./{default_name})")
        sp.add_argument("--plot", action="store_true", help="also render a PNG figure next to the CSV")

    epilog = cfgmod.keys_help()
    for name, helptext in (
        ("compare", "run every configured method on shared noise and write probability curves"),
        ("run", "simulate one replica of one method and write its checkpoint table"),
    ):
        sp = sub.add_parser(name, help=helptext, description=helptext, epilog=epilog,
                            formatter_class=argparse.RawDescriptionHelpFormatter)
        sp.add_argument("-c", "--config", help="INI config file ([experiment] and [method LABEL] sections)")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="config override; repeatable")
        sp.add_argument("overrides", nargs="*", metavar="KEY=VALUE", help="config overrides")
        if name == "run":
            sp.add_argument("--method", help="method label to run (default: first configured)")
            sp.add_argument("--replica", type=int, default=0, help="noise stream replica index")
        common(sp, f"{name}.csv")

    sp = sub.add_parser("landscape", help="tabulate U and H on a 1D grid", formatter_class=fmt)
    sp.add_argument("--potential", default="u0", help="1D potential name")
    sp.add_argument("--epsilon", type=float, default=0.5, help="temperature eps")
    sp.add_argument("--c", type=float, default=-1.5, help="level c")
    sp.add_argument("--modifier", default="arctan:1", help="zero | arctan:<a> | smoothstep:<M3>:<M4>")
    sp.add_argument("--grid", default="-5:5:2001", help="lo:hi:n")
    common(sp, "landscape.csv")

    sp = sub.add_parser("critheight", help="critical height E_* and clipped height c_* of a 1D grid", formatter_class=fmt)
    sp.add_argument("--csv", help="two-column CSV (x, U); overrides --potential")
    sp.add_argument("--potential", default="double_well", help="1D potential to sample")
    sp.add_argument("--grid", default="-2:2:4001", help="lo:hi:n for --potential")
    sp.add_argument("--c", type=float, default=None, help="clipping level c (default: no clipping)")
    sp.add_argument("--delta1", type=float, default=0.0, help="clipping slack delta1")

    sp = sub.add_parser("stationary", help="grid density of the modified Gibbs law and its tail mass", formatter_class=fmt)
    sp.add_argument("--potential", default="u0", help="1D potential name")
    sp.add_argument("--modifier", default="arctan:1", help="zero | arctan:<a> | smoothstep:<M3>:<M4>")
    sp.add_argument("--c", type=float, default=-1.5, help="level c")
    sp.add_argument("--epsilon", type=float, default=0.5, help="temperature eps")
    sp.add_argument("--delta", type=float, default=0.3, help="tail threshold: U > U_min + delta")
    sp.add_argument("--grid", default="-5:5:4001", help="lo:hi:n")
    common(sp, "stationary.csv")
    return parser


COMMANDS = {
    "compare": cmd_compare,
    "run": cmd_run,
    "landscape": cmd_landscape,
    "critheight": cmd_critheight,
    "stationary": cmd_stationary,
}


def _join_grid_values(argv):
    """``--grid -5:5:201`` would read as an option; fold it into ``--grid=-5:5:201``."""
    out, it = [], iter(argv)
    for tok in it:
        if tok == "--grid":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--grid={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args, extra = parser.parse_known_args(_join_grid_values(argv))
        if hasattr(args, "overrides"):
            # overrides may also follow options, where argparse leaves them unparsed
            stray = [t for t in extra if t.startswith("-") or "=" not in t]
            if stray:
                parser.error(f"unrecognized arguments: {' '.join(stray)}")
            args.set = list(args.set) + list(args.overrides) + extra
        elif extra:
            parser.error(f"unrecognized arguments: {' '.join(extra)}")
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
