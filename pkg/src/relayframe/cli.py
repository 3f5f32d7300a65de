"""``relayframe`` command line.

Exit codes: 0 when every verdict in the report passes, 1 for usage, parse
and validation errors, 2 for mathematical failures (not a frame, hypothesis
fails, bracket violated, singular transform).
"""
import argparse
import logging
import sys

import numpy as np

from . import __version__, io
from .analysis import FRAME_TOL, PARSEVAL_TOL, frame_bounds, reconstruct_vector
from .duality import (
    IDENTITY_TOL,
    canonical_dual,
    canonical_identities,
    global_dual,
    local_dual,
    parseval_tighten,
    q_transform_ambient,
    q_transform_local,
)
from .errors import MathematicalFailure, MissingTransforms, RelayFrameError
from .perturbation import DEFAULT_SEED, check_perturbation_simple, check_perturbation_three_constant

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MATH = 2
RECONSTRUCT_TOL = 1e-8

log = logging.getLogger("relayframe")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _num(x):
    """Float rounded to 12 significant digits for the text report."""
    return repr(float(f"{float(x):.12g}"))


def _vector_arg(text):
    try:
        return np.array([float(t) for t in text.split(",")], dtype=np.float64)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


class _Run:
    """Shared state of one command invocation."""

    def __init__(self, args, argv):
        self.args = args
        self.argv = argv
        self.digests = []
        self.notices = []
        self.lines = []

    def load(self, path):
        loaded = io.load_system(path)
        self.digests.append(loaded.digest)
        self.notices.extend(loaded.notices)
        return loaded

    def say(self, line):
        self.lines.append(line)

    def tolerances(self, **extra):
        d = {"frame_tol": self.args.tol_frame, "parseval_tol": self.args.tol_parseval}
        d.update(extra)
        return d

    def finish(self, results, passed, **tol):
        report = io.build_report(
            ["relayframe"] + list(self.argv), self.digests, self.tolerances(**tol), results, passed, self.notices
        )
        print("\n".join(self.lines))
        self.write(report)
        return EXIT_OK if passed else EXIT_MATH

    def fail(self, exc):
        """Record an error in the JSON report (when requested) and echo it."""
        print(f"relayframe: {type(exc).__name__}: {exc}", file=sys.stderr)
        error = {"type": type(exc).__name__, "message": str(exc)}
        self.write(io.build_report(
            ["relayframe"] + list(self.argv), self.digests, self.tolerances(), {"error": error}, False, self.notices
        ))

    def write(self, report):
        if self.args.json:
            with open(self.args.json, "w", encoding="utf-8") as fh:
                fh.write(io.dumps_report(report))


def _bounds_line(rep):
    verdict = "PARSEVAL" if rep.is_parseval else ("FRAME" if rep.is_frame else "NOT A FRAME")
    return f"A={_num(rep.a_opt)} B={_num(rep.b_opt)} {verdict}"


def cmd_check(run):
    sysobj = run.load(run.args.path).system
    rep = frame_bounds(sysobj, run.args.tol_frame, run.args.tol_parseval)
    run.say(_bounds_line(rep))
    d = rep.to_dict()
    d.pop("spectrum")
    return run.finish({"bounds": d}, rep.is_frame)


def cmd_bounds(run):
    sysobj = run.load(run.args.path).system
    rep = frame_bounds(sysobj, run.args.tol_frame, run.args.tol_parseval)
    run.say(_bounds_line(rep))
    run.say("spectrum: " + " ".join(_num(x) for x in rep.spectrum))
    run.say(f"condition: {_num(rep.condition)}")
    return run.finish({"bounds": rep.to_dict(), "condition": rep.condition}, rep.is_frame)


def cmd_reconstruct(run):
    loaded = run.load(run.args.path)
    f = run.args.vector
    if loaded.vector is not None:
        if f is not None and not np.array_equal(f, loaded.vector):
            msg = "vector in file differs from --vector; using the file"
            log.warning(msg)
            run.notices.append(msg)
        f = loaded.vector
    if f is None:
        raise MissingTransforms("no vector: pass --vector or add a 'vector' field to the file")
    rep = reconstruct_vector(loaded.system, f, run.args.formula, run.args.method, run.args.tol_frame)
    ok = rep.relative_error <= RECONSTRUCT_TOL
    run.say("reconstructed: " + ",".join(_num(x) for x in rep.reconstructed))
    run.say(f"relative_error: {rep.relative_error:.3e} ({'PASS' if ok else 'FAIL'}, tol {RECONSTRUCT_TOL:g})")
    res = rep.to_dict()
    res["input"] = f
    res["method"] = run.args.method
    return run.finish({"reconstruction": res}, ok, reconstruct_tol=RECONSTRUCT_TOL)


def _bracket_lines(run, b):
    run.say(f"predicted: [{_num(b.predicted_lower)}, {_num(b.predicted_upper)}]")
    run.say(f"computed:  [{_num(b.actual_lower)}, {_num(b.actual_upper)}] {'PASS' if b.ok else 'FAIL'}")


def cmd_dual(run):
    loaded = run.load(run.args.path)
    sysobj, kind = loaded.system, run.args.kind
    if kind == "canonical":
        dual = canonical_dual(sysobj, run.args.tol_frame)
    elif kind == "global":
        dual = global_dual(sysobj, loaded.transforms.get("G_locals"), run.args.tol_frame)
    else:
        dual = local_dual(sysobj, loaded.transforms.get("local_frames"), run.args.tol_frame)
    b = dual.verify()
    run.say(f"dual: {kind}")
    _bracket_lines(run, b)
    results = {"kind": kind, "bracket": b.to_dict()}
    passed = b.ok
    if kind == "canonical":
        ss, tt = canonical_identities(sysobj, dual)
        ok = max(ss, tt) <= IDENTITY_TOL
        run.say(f"max|S S' - I| = {ss:.3e}  max|T* T' - I| = {tt:.3e} {'PASS' if ok else 'FAIL'}")
        results["identity_residual"] = {"S_S_dual": ss, "T_T_dual": tt, "tol": IDENTITY_TOL, "ok": ok}
        passed = passed and ok
    if run.args.out:
        io.save_system(dual.system, run.args.out)
        results["written"] = run.args.out
    return run.finish(results, passed)


def cmd_tighten(run):
    sysobj = run.load(run.args.path).system
    tight = parseval_tighten(sysobj, run.args.tol_frame)
    rep = frame_bounds(tight, run.args.tol_frame, run.args.tol_parseval)
    dev = max(abs(x - 1.0) for x in rep.spectrum)
    ok = dev <= run.args.tol_parseval
    run.say(_bounds_line(rep))
    run.say(f"max|lambda - 1| = {dev:.3e} {'PASS' if ok else 'FAIL'}")
    results = {"bounds": rep.to_dict(), "deviation": dev}
    if run.args.out:
        io.save_system(tight, run.args.out)
        results["written"] = run.args.out
    return run.finish(results, ok)


def cmd_transform(run):
    loaded = run.load(run.args.path)
    if run.args.local_q:
        rep = q_transform_local(loaded.system, loaded.transforms.get("Q_locals"), run.args.tol_frame)
    else:
        if "Q" not in loaded.transforms:
            raise MissingTransforms("transforms.Q not supplied")
        rep = q_transform_ambient(loaded.system, loaded.transforms["Q"], run.args.tol_frame)
    run.say(f"transform: {rep.transform_kind}")
    if rep.sandwich_lower_residual is not None:
        run.say(f"sandwich lower residual: {rep.sandwich_lower_residual:.3e}")
        run.say(f"sandwich upper residual: {rep.sandwich_upper_residual:.3e} "
                f"{'PASS' if rep.sandwich_ok else 'FAIL'} (tol {rep.sandwich_tol:g})")
    _bracket_lines(run, rep.bracket)
    return run.finish(rep.to_dict(), rep.passed)


def cmd_perturb(run):
    a = run.load(run.args.path1).system
    b = run.load(run.args.path2).system
    if run.args.constants is not None:
        C, D, eps = run.args.constants
        rep = check_perturbation_three_constant(a, b, C, D, eps, run.args.samples, run.args.seed, run.args.tol_frame)
    else:
        rep = check_perturbation_simple(a, b, run.args.tol_frame)
    run.say(f"check: {rep.variant}")
    run.say(f"c_exact: {_num(rep.c_exact)}")
    run.say(f"hypothesis: {'holds' if rep.hypothesis_holds else 'FAILS'}" + (" (sampled)" if rep.sampled else ""))
    run.say(f"predicted: [{_num(rep.predicted_lower)}, {_num(rep.predicted_upper)}]")
    run.say(f"computed:  [{_num(rep.actual_lower)}, {_num(rep.actual_upper)}] {'PASS' if rep.bracket_ok else 'FAIL'}")
    return run.finish(rep.to_dict(), rep.passed, seed=run.args.seed)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", metavar="OUT", help="also write the machine-readable report to OUT")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for sampled checks (default 42)")
    common.add_argument("--tol-frame", type=float, default=FRAME_TOL, help="frame verdict tolerance")
    common.add_argument("--tol-parseval", type=float, default=PARSEVAL_TOL, help="Parseval verdict tolerance")
    common.add_argument("-q", "--quiet", action="store_true", help="suppress notices on stderr")

    p = _Parser(prog="relayframe", description="Analyse discretized relay fusion frames.")
    p.add_argument("--version", action="version", version=f"relayframe {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("check", parents=[common], help="frame verdict and optimal bounds")
    s.add_argument("path")
    s.set_defaults(fn=cmd_check)

    s = sub.add_parser("bounds", parents=[common], help="bounds plus the full spectrum of S")
    s.add_argument("path")
    s.set_defaults(fn=cmd_bounds)

    s = sub.add_parser("reconstruct", parents=[common], help="recover a vector through S^-1")
    s.add_argument("path")
    s.add_argument("--vector", type=_vector_arg, help="comma-separated vector, e.g. 3,4")
    s.add_argument("--formula", choices=["left", "right"], default="left")
    s.add_argument("--method", choices=["dense", "cg"], default="dense")
    s.set_defaults(fn=cmd_reconstruct)

    s = sub.add_parser("dual", parents=[common], help="construct and verify a dual system")
    s.add_argument("path")
    s.add_argument("--kind", choices=["canonical", "global", "local"], default="canonical")
    s.add_argument("--out", help="write the dual system here")
    s.set_defaults(fn=cmd_dual)

    s = sub.add_parser("tighten", parents=[common], help="Parseval system via S^-1/2")
    s.add_argument("path")
    s.add_argument("--out", help="write the Parseval system here")
    s.set_defaults(fn=cmd_tighten)

    s = sub.add_parser("transform", parents=[common], help="check an invertible-operator transform")
    s.add_argument("path")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--ambient-q", action="store_true", help="use transforms.Q on H (default)")
    g.add_argument("--local-q", action="store_true", help="use transforms.Q_locals on each K_w")
    s.set_defaults(fn=cmd_transform)

    s = sub.add_parser("perturb", parents=[common], help="stability under inner-subspace perturbation")
    s.add_argument("path1")
    s.add_argument("path2")
    s.add_argument("--constants", nargs=3, type=float, metavar=("C", "D", "EPS"),
                   help="run the three-constant test instead of the single-constant one")
    s.add_argument("--samples", type=int, default=64, help="random probes for the sampled hypothesis")
    s.set_defaults(fn=cmd_perturb)
    return p


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # usage errors exit 1; --help and --version exit 0
        return exc.code
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.INFO,
                        format="relayframe: %(levelname)s: %(message)s", stream=sys.stderr)
    logging.getLogger("relayframe").setLevel(logging.ERROR if args.quiet else logging.INFO)
    run = _Run(args, argv)
    try:
        return args.fn(run)
    except MathematicalFailure as exc:
        run.fail(exc)
        return EXIT_MATH
    except (RelayFrameError, OSError, ValueError) as exc:
        run.fail(exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
