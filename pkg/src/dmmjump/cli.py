"""Command-line interface: ``dmmjump {gen,solve,bench,fit,scaling,plot}``.

Exit codes: 0 success, 2 usage/configuration error, 3 unsolved or partially
completed run, 4 fit failure, 5 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .analysis import (FitError, Family, fit_curve_table, fit_exponential, fit_exponential_mle,
                       fit_inverse_gaussian, fit_inverse_gaussian_mle, fit_scaling, histogram,
                       read_tts_csv)
from .bench import DEFAULT_THRESHOLDS, JUMP_MULT, CampaignSpec, export_campaign, run_campaign, threshold_sweep
from .dynamics import DmmParams
from .generators import GeneratorSpec, Kind, generate
from .plot import SchemaError, render
from .sat import DimacsError, parse_dimacs, write_dimacs
from .solver import SolveConfig, TrajectorySpec, solve

EXIT_OK, EXIT_USAGE, EXIT_UNSOLVED, EXIT_FIT, EXIT_IO = 0, 2, 3, 4, 5
HELP_WIDTH = 100
_D = DmmParams()


class UsageError(Exception):
    pass


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _formatter(prog):
    return argparse.HelpFormatter(prog, width=HELP_WIDTH)


def _add_dynamics(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("dynamics")
    g.add_argument("--alpha", type=float, default=_D.alpha, help="long-memory rate (default: %(default)s)")
    g.add_argument("--beta", type=float, default=_D.beta, help="short-memory rate (default: %(default)s)")
    g.add_argument("--gamma", type=float, default=_D.gamma, help="short-memory threshold (default: %(default)s)")
    g.add_argument("--delta", type=float, default=_D.delta, help="long-memory threshold (default: %(default)s)")
    g.add_argument("--epsilon", type=float, default=_D.epsilon,
                   help="short-memory offset and clamp margin (default: %(default)s)")
    g.add_argument("--zeta", type=float, default=_D.zeta, help="rigidity weight (default: %(default)s)")
    g.add_argument("--dt", type=float, default=_D.dt, help="Euler time step (default: %(default)s)")
    g.add_argument("--max-steps", type=int, default=_D.max_steps,
                   help="step cutoff (default: %(default)s)")


def _add_generator(p: argparse.ArgumentParser, n_required=True) -> None:
    g = p.add_argument_group("instances")
    g.add_argument("--kind", choices=[k.value for k in Kind], required=True, help="instance ensemble")
    g.add_argument("--n", type=int, required=n_required, help="number of variables")
    g.add_argument("--ratio", type=float, help="clause-to-variable ratio M/N (barthel)")
    g.add_argument("--p0", type=float, default=0.08, help="Barthel p0 (default: %(default)s)")


def _params(args, v_thr=0.0, v_jump=0.0) -> DmmParams:
    return DmmParams(alpha=args.alpha, beta=args.beta, gamma=args.gamma, delta=args.delta,
                     epsilon=args.epsilon, zeta=args.zeta, dt=args.dt, v_thr=v_thr,
                     v_jump=v_jump, max_steps=args.max_steps)


def _jump(args) -> tuple[float, float]:
    if args.v_jump is not None and args.v_jump_mult is not None:
        raise UsageError("give either --v-jump or --v-jump-mult, not both")
    if args.v_jump_mult is not None:
        return args.v_thr, args.v_jump_mult * args.v_thr
    return args.v_thr, args.v_jump or 0.0


def _gen_spec(args, seed: int) -> GeneratorSpec:
    if args.kind == Kind.BARTHEL.value and args.ratio is None:
        raise UsageError("--ratio is required for barthel instances")
    return GeneratorSpec(Kind(args.kind), args.n, args.ratio if args.kind == "barthel" else None,
                         args.p0 if args.kind == "barthel" else None, seed)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")


def _emit(text: str, out: str | None, out_dir: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    if out_dir is not None and not path.is_absolute():
        path = Path(out_dir) / path
    _write(path, text)


# -- subcommands -------------------------------------------------------------

def cmd_gen(args) -> int:
    spec = _gen_spec(args, args.seed)
    cnf, planted = generate(spec)
    text = write_dimacs(cnf, planted, comments=[spec.comment()])
    _emit(text, args.out, args.out_dir)
    if not args.quiet:
        print(cnf.digest(), file=sys.stderr if args.out is None else sys.stdout)
    return EXIT_OK


def cmd_solve(args) -> int:
    cnf, _ = parse_dimacs(Path(args.cnf).read_bytes())
    thr, jump = _jump(args)
    traj = None
    if args.trajectory:
        traj = TrajectorySpec(args.stride, tuple(_ints(args.traj_vars)) if args.traj_vars else None)
    cfg = SolveConfig(_params(args, thr, jump), seed=args.seed, init=args.init,
                      check_every=args.check_every, trajectory=traj)
    result, trajectory = solve(cnf, cfg)
    _emit(json.dumps(result.to_dict(), sort_keys=True) + "\n", args.out, args.out_dir)
    if trajectory is not None:
        _emit(trajectory.to_csv(), args.trajectory, args.out_dir)
    return EXIT_OK if result.solved else EXIT_UNSOLVED


def _sweep_from_args(args) -> tuple[tuple[float, float], ...]:
    if args.sweep:
        pts = []
        for item in args.sweep.split(","):
            thr, jump = item.split(":")
            pts.append((float(thr), float(jump)))
        return tuple(pts)
    if args.jumps:
        return tuple((args.fixed_v_thr, j) for j in _floats(args.jumps))
    return threshold_sweep(_floats(args.thresholds), args.jump_mult)


def _campaign(args, sweep, sizes) -> CampaignSpec:
    template = _gen_spec(args, 0) if args.n is not None else _gen_spec(
        argparse.Namespace(**{**vars(args), "n": sizes[0]}), 0)
    return CampaignSpec(generator=template, instance_count=args.instances, sweep=sweep,
                        baseline=not args.no_baseline, sizes=tuple(sizes) if sizes else None,
                        master_seed=args.seed, max_steps=args.max_steps, repeats=args.repeats,
                        params=_params(args), workers=args.workers)


def cmd_bench(args) -> int:
    sizes = _ints(args.sizes) if args.sizes else None
    if args.n is None and not sizes:
        raise UsageError("give --n or --sizes")
    spec = _campaign(args, _sweep_from_args(args), sizes)
    result = run_campaign(spec)
    export_campaign(result, args.out_dir or ".", include_timing=args.timing)
    if not args.quiet:
        for c in result.cells:
            print(f"n={c.n} v_thr={c.v_thr:g} v_jump={c.v_jump:g} median={c.median} nmtts={c.nmtts}")
    return EXIT_OK if result.complete else EXIT_UNSOLVED


def cmd_scaling(args) -> int:
    sizes = _ints(args.sizes)
    if len(sizes) < 3:
        raise UsageError("--sizes needs at least 3 values")
    if args.no_baseline:
        raise UsageError("scaling compares against the unmodified runs; --no-baseline is not allowed")
    thr, jump = _jump(args)
    spec = _campaign(args, ((thr, jump),), sizes)
    result = run_campaign(spec)
    out = Path(args.out_dir or ".")
    export_campaign(result, out, include_timing=args.timing)
    rows = ["n,median_base,median_mod,nmtts"]
    base_pts, mod_pts = [], []
    for n in sizes:
        b, c = result.baseline[n], result.cell(n, thr, jump)
        rows.append(",".join("" if x is None else repr(x) if isinstance(x, float) else str(x)
                             for x in (n, b.median, c.median, c.nmtts)))
        if b.median is not None:
            base_pts.append((n, b.median))
        if c.median is not None:
            mod_pts.append((n, c.median))
    _write(out / "scaling.csv", "\n".join(rows) + "\n")
    family = Family.POWER_LAW if args.family == "power" else Family.EXP_SCALING
    report = {"schema_version": 1, "family": family.value, "v_thr": thr, "v_jump": jump}
    code = EXIT_OK
    for name, pts in (("unmodified", base_pts), ("with_jumps", mod_pts)):
        if len(pts) >= 3:
            report[name] = fit_scaling(pts, family).to_dict()
        else:
            report[name] = None
            code = EXIT_UNSOLVED
    _write(out / "scaling.json", json.dumps(report, indent=2, sort_keys=True) + "\n")
    if not args.quiet:
        for name in ("unmodified", "with_jumps"):
            if report[name]:
                print(f"{name}: exponent={report[name]['parameters']['exponent']:.5f}")
    return code


def cmd_fit(args) -> int:
    samples = read_tts_csv(Path(args.tts_csv).read_text(encoding="utf-8"))
    h = histogram(samples, args.w, args.origin)
    if args.family == "exp":
        fit = fit_exponential(h) if args.method == "lsq" else fit_exponential_mle(samples, h)
    else:
        fit = fit_inverse_gaussian(h) if args.method == "lsq" else fit_inverse_gaussian_mle(samples, h)
    _emit(json.dumps(fit.to_dict(), indent=2, sort_keys=True) + "\n", args.out, args.out_dir)
    if args.curve_out:
        _emit(fit_curve_table(h, fit), args.curve_out, args.out_dir)
    return EXIT_OK


def cmd_plot(args) -> int:
    text = Path(args.input).read_text(encoding="utf-8")
    svg = render(args.kind, text, logx=args.logx, logy=args.logy)
    _emit(svg, args.out, args.out_dir)
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global")
    g.add_argument("--seed", type=int, default=0, help="seed (master seed for campaigns) (default: %(default)s)")
    g.add_argument("--out-dir", default=None, help="directory for output files")
    g.add_argument("--workers", type=int, default=1, help="worker processes (default: %(default)s)")
    g.add_argument("--quiet", action="store_true", help="suppress progress output")

    parser = argparse.ArgumentParser(prog="dmmjump", formatter_class=_formatter,
                                     description="Memcomputing 3-SAT solver with voltage jumps.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("gen", parents=[common], formatter_class=_formatter,
                       help="generate a planted 3-SAT instance")
    _add_generator(p)
    p.add_argument("--out", help="output DIMACS path (default: stdout)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", parents=[common], formatter_class=_formatter,
                       help="solve a DIMACS instance")
    p.add_argument("cnf", help="DIMACS CNF file")
    _add_dynamics(p)
    j = p.add_argument_group("jumps")
    j.add_argument("--v-thr", type=float, default=0.0, help="threshold voltage (default: %(default)s)")
    j.add_argument("--v-jump", type=float, default=None, help="absolute jump voltage (default: 0)")
    j.add_argument("--v-jump-mult", type=float, default=None, help="jump voltage as a multiple of --v-thr")
    p.add_argument("--init", choices=["random", "all-ones"], default="random",
                   help="initial voltages (default: %(default)s)")
    p.add_argument("--check-every", type=int, default=1,
                   help="steps between satisfiability checks (default: %(default)s)")
    p.add_argument("--out", help="result JSON path (default: stdout)")
    p.add_argument("--trajectory", help="write a trajectory CSV to this path")
    p.add_argument("--stride", type=int, default=1, help="trajectory sample stride (default: %(default)s)")
    p.add_argument("--traj-vars", help="comma-separated 1-based variables to record (default: all)")
    p.set_defaults(func=cmd_solve)

    def campaign_flags(p):
        _add_generator(p, n_required=False)
        _add_dynamics(p)
        p.add_argument("--instances", type=int, default=100,
                       help="simulations per cell (default: %(default)s)")
        p.add_argument("--repeats", type=int, default=1,
                       help="solver seeds per instance; 1 draws a fresh instance per simulation "
                            "(default: %(default)s)")
        p.add_argument("--no-baseline", action="store_true", help="skip the unmodified runs")
        p.add_argument("--timing", action="store_true", help="also write timing.json")

    p = sub.add_parser("bench", parents=[common], formatter_class=_formatter,
                       help="run a baseline/jump campaign over a sweep")
    campaign_flags(p)
    p.add_argument("--sizes", help="comma-separated list of N (default: --n)")
    p.add_argument("--thresholds", default=",".join(map(str, DEFAULT_THRESHOLDS)),
                   help="threshold sweep (default: %(default)s)")
    p.add_argument("--jump-mult", type=float, default=JUMP_MULT,
                   help="v_jump / v_thr for the threshold sweep (default: %(default)s)")
    p.add_argument("--jumps", help="jump-size sweep at --fixed-v-thr instead of a threshold sweep")
    p.add_argument("--fixed-v-thr", type=float, default=0.0,
                   help="threshold used with --jumps (default: %(default)s)")
    p.add_argument("--sweep", help="explicit points 'thr:jump,thr:jump,...'")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("scaling", parents=[common], formatter_class=_formatter,
                       help="median TTS versus N with scaling fits")
    campaign_flags(p)
    p.add_argument("--sizes", required=True, help="comma-separated list of N (at least 3)")
    p.add_argument("--v-thr", type=float, default=0.65, help="threshold voltage (default: %(default)s)")
    p.add_argument("--v-jump", type=float, default=None, help="absolute jump voltage")
    p.add_argument("--v-jump-mult", type=float, default=None,
                   help=f"jump voltage as a multiple of --v-thr (default: {JUMP_MULT})")
    p.add_argument("--family", choices=["power", "exp"], default="power",
                   help="power law in N or exponential in N (default: %(default)s)")
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("fit", parents=[common], formatter_class=_formatter,
                       help="fit a TTS histogram")
    p.add_argument("tts_csv", help="CSV with tts,censored columns")
    p.add_argument("--family", choices=["exp", "invgauss"], required=True, help="model family")
    p.add_argument("--w", type=float, required=True, help="bin width")
    p.add_argument("--origin", type=float, default=0.0, help="histogram origin (default: %(default)s)")
    p.add_argument("--method", choices=["lsq", "mle"], default="lsq",
                   help="least squares on counts or maximum likelihood (default: %(default)s)")
    p.add_argument("--out", help="fit report JSON path (default: stdout)")
    p.add_argument("--curve-out", help="CSV of bin_center,count,fitted_value")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("plot", parents=[common], formatter_class=_formatter, help="render an SVG plot")
    p.add_argument("input", help="input CSV")
    p.add_argument("--kind", choices=["histogram", "trajectory", "sweep", "scaling"], required=True,
                   help="plot kind")
    p.add_argument("--out", help="output SVG path (default: stdout)")
    p.add_argument("--logx", action="store_true", default=None, help="logarithmic x axis")
    p.add_argument("--logy", action="store_true", default=None, help="logarithmic y axis")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(message)s")
    if args.command == "scaling" and args.v_jump is None and args.v_jump_mult is None:
        args.v_jump_mult = JUMP_MULT
    try:
        return args.func(args)
    except (UsageError, ValueError) as e:
        if isinstance(e, (DimacsError, SchemaError)):
            print(f"dmmjump: input error: {e}", file=sys.stderr)
        else:
            print(f"dmmjump: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except FitError as e:
        print(f"dmmjump: fit failed: {e} (last parameters: {e.last_params})", file=sys.stderr)
        return EXIT_FIT
    except OSError as e:
        print(f"dmmjump: I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
