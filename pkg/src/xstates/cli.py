"""Command-line entry point.

    xstates gen --n 2 --seed 7 --x-state > s.json
    xstates reduce --input s.json
    xstates verify all --seed 1 --json

Exit status: 0 on success, 1 when a reduction fails or a suite does not
pass, 2 on usage errors and unreadable or malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import jsonio
from .bloch import BlochState, DensityMatrix, from_bloch, to_bloch
from .errors import MalformedState, NotGeneric, ReductionFailed, XStateError
from .geometry import fiber_embed, fiber_project, random_fiber_point, random_lstate, random_xstate, reduce_to_section2
from .geometry import truncate_to_xT
from .invariants import p_invariants, quotient_coords
from .verify import SUITE_NAMES, ToleranceConfig, plan, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, help="number of qubits")
    common.add_argument("--seed", type=int, default=1)
    common.add_argument("--input", help="input JSON file ('-' or omitted: stdin)")
    common.add_argument("--output", help="write output here instead of stdout")
    common.add_argument("--json", action="store_true", help="machine-readable output for verify")

    p = argparse.ArgumentParser(prog="xstates", description="X-state invariants and verification suites")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="sample a random state")
    kind = g.add_mutually_exclusive_group()
    kind.add_argument("--x-state", action="store_true", help="random X-state g·p in general position")
    kind.add_argument("--fiber", action="store_true", help="random point of the standard fiber")
    g.add_argument("--density", action="store_true", help="emit the operator instead of the Bloch model")

    sub.add_parser("bloch", parents=[common], help="convert between Bloch model and operator")
    sub.add_parser("invariants", parents=[common], help="p1..p5 of a 2-qubit state")
    r = sub.add_parser("reduce", parents=[common], help="normal form of a 2-qubit X-state")
    r.add_argument("--tol", type=float, default=1e-8)
    q = sub.add_parser("quotient-coords", parents=[common], help="N-invariant coordinates of a fiber point")
    q.add_argument("--tol", type=float, default=1e-12, help="allowed leak outside the fiber")

    v = sub.add_parser("verify", parents=[common], help="run verification suites")
    v.add_argument("suite", choices=[*SUITE_NAMES, "all"])
    v.add_argument("--trials", type=int)
    v.add_argument("--tol", type=float, default=1e-8, help="residual tolerance")
    v.add_argument("--fd-step", type=float, default=1e-6)
    v.add_argument("--rank-tol", type=float, default=1e-6)
    v.add_argument("--deep", action="store_true", help="include n = 4")
    v.add_argument("--workers", type=int, default=1)
    return p


def _read_input(path: str | None):
    try:
        if path in (None, "-"):
            text = sys.stdin.read()
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read input: {exc}") from exc
    try:
        return jsonio.decode_state(json.loads(text))
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON: {exc}") from exc
    except MalformedState as exc:
        raise UsageError(f"malformed state: {exc}") from exc


def _as_bloch(state) -> BlochState:
    if isinstance(state, DensityMatrix):
        try:
            return to_bloch(state)
        except MalformedState as exc:
            raise UsageError(f"malformed state: {exc}") from exc
    return state


def _cmd_gen(args) -> tuple[int, object]:
    n = args.n if args.n is not None else 2
    if n < 1:
        raise UsageError("--n must be >= 1")
    if args.x_state:
        state, _ = random_xstate(n, args.seed)
    elif args.fiber:
        state = fiber_embed(random_fiber_point(n, np.random.default_rng(args.seed)))
    else:
        state = random_lstate(n, args.seed)
    out = jsonio.encode_density(from_bloch(state)) if args.density else jsonio.encode_bloch(state)
    return EXIT_OK, out


def _cmd_bloch(args):
    state = _read_input(args.input)
    if isinstance(state, DensityMatrix):
        return EXIT_OK, jsonio.encode_bloch(_as_bloch(state))
    return EXIT_OK, jsonio.encode_density(from_bloch(state))


def _cmd_invariants(args):
    b = _as_bloch(_read_input(args.input))
    if b.n != 2:
        raise UsageError("invariants needs a 2-qubit state; use quotient-coords for fiber points")
    return EXIT_OK, {"p": p_invariants(b).vector()}


def _cmd_reduce(args):
    b = _as_bloch(_read_input(args.input))
    if b.n != 2:
        raise UsageError("reduce needs a 2-qubit state")
    try:
        g, s = reduce_to_section2(b, args.tol)
    except (NotGeneric, ReductionFailed) as exc:
        return EXIT_FAIL, {"error": "reduction-failed", "reason": exc.code, "detail": str(exc)}
    return EXIT_OK, {"g": jsonio.encode_rotation(g), "section": jsonio.encode_section(s)}


def _cmd_quotient(args):
    b = _as_bloch(_read_input(args.input))
    if b.n < 2:
        raise UsageError("quotient-coords needs n >= 2")
    try:
        p = fiber_project(b, args.tol)
    except XStateError as exc:
        return EXIT_FAIL, {"error": "not-in-fiber", "detail": str(exc)}
    return EXIT_OK, {"quotient": quotient_coords(truncate_to_xT(p)).as_dict()}


def _cmd_verify(args):
    if args.trials is not None and args.trials < 1:
        raise UsageError("--trials must be >= 1")
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    try:
        cfg = ToleranceConfig(
            fd_step=args.fd_step,
            rank_rel_tol=args.rank_tol,
            residual_tol=args.tol,
            trials=args.trials,
            seed=args.seed,
            workers=args.workers,
        )
    except XStateError as exc:
        raise UsageError(str(exc)) from exc
    if args.n is not None:
        if args.n < 2 or (args.suite == "dims" and args.n > 4):
            raise UsageError("--n out of range for this suite")
        ns = [args.n]
    else:
        ns = [2, 3, 4] if args.deep else [2, 3]
    names = SUITE_NAMES if args.suite == "all" else [args.suite]
    reports = [run_suite(name, n, cfg).to_dict() for name, n in plan(names, ns)]
    passed = all(r["pass"] for r in reports)
    if args.json:
        return (EXIT_OK if passed else EXIT_FAIL), {"pass": passed, "reports": reports}
    lines = []
    for r in reports:
        tag = "PASS" if r["pass"] else "FAIL"
        where = "" if r["n"] is None else f" n={r['n']}"
        lines.append(f"{tag} {r['suite']}{where} trials={r['trials']} seed={r['seed']}")
    lines.append("all suites passed" if passed else "some suites FAILED")
    return (EXIT_OK if passed else EXIT_FAIL), "\n".join(lines) + "\n"


COMMANDS = {
    "gen": _cmd_gen,
    "bloch": _cmd_bloch,
    "invariants": _cmd_invariants,
    "reduce": _cmd_reduce,
    "quotient-coords": _cmd_quotient,
    "verify": _cmd_verify,
}


def _emit(payload, path: str | None) -> None:
    text = payload if isinstance(payload, str) else jsonio.dumps(payload)
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write output: {exc}") from exc


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        status, payload = COMMANDS[args.command](args)
        _emit(payload, args.output)
    except UsageError as exc:
        print(f"xstates: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return status


if __name__ == "__main__":
    sys.exit(main())
