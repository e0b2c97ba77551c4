"""Command line interface: ``imc <command> ...``.

Exit codes: 0 success, 2 input error, 3 non-convergence, 4 size cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from imc import io
from imc.classify import classify
from imc.errors import IMCError, SizeCapError
from imc.limits import invariant_upper_expectation
from imc.operators import power_apply, lower_power_apply
from imc.recursion import conditional_lower, conditional_upper, joint_lower, joint_upper, marginal_lower, marginal_upper
from imc.reliability import ReliabilitySpec, build_embedded_chain, failure_bounds, failure_closed_form, reliability_sweep
from imc.setchain import extreme_matrices, max_product_expectation, min_product_expectation, product_scrambling_check
from imc.trajectory import render_svg, singleton_bounds, write_csv

EXIT_INPUT = 2
EXIT_NONCONVERGENCE = 3
EXIT_SIZE_CAP = 4


def _num(x: float) -> float:
    return float(f"{float(x):.15g}")


def _emit(obj, out):
    out.write(io.dumps(obj))


def _load(args):
    doc = io.load_document(args.model)
    chain = doc.chain
    if getattr(args, "initial", None):
        chain = chain.with_initial(io.parse_model(chain.space, io.load_json(args.initial), args.initial))
    return doc, chain


def _gamble(args, space):
    if args.event is not None:
        labels = [s for s in args.event.split(",") if s]
        if not labels:
            raise io.DocumentError("--event: no states given")
        for s in labels:
            if s not in space.states:
                raise io.DocumentError(f"--event: unknown state {s!r}")
        return space.indicator(labels)
    if args.gamble is None:
        raise io.DocumentError("give a gamble file or --event")
    return io.load_gamble(space, args.gamble)


def _sides(side, lower, upper):
    out = {}
    if side in ("lower", "both"):
        out["lower"] = _num(lower())
    if side in ("upper", "both"):
        out["upper"] = _num(upper())
    return out


def cmd_expect(args, out):
    _, chain = _load(args)
    space = chain.space
    situation = [s for s in args.situation.split(",") if s] if args.situation else None
    if args.joint:
        if args.horizon is None:
            raise io.DocumentError("--joint needs --horizon")
        f = io.parse_joint(space, io.load_json(args.joint), args.horizon, args.joint)
        chain = chain if chain.horizon is not None else chain.with_horizon(args.horizon)
        if situation:
            result = _sides(args.side, lambda: conditional_lower(chain, f, situation),
                            lambda: conditional_upper(chain, f, situation))
        else:
            result = _sides(args.side, lambda: joint_lower(chain, f), lambda: joint_upper(chain, f))
    else:
        h = _gamble(args, space)
        if situation:
            n = args.time if args.time is not None else len(situation) + 1
            if n < len(situation):
                raise io.DocumentError(f"--time {n} is before the end of the situation")
            f = np.broadcast_to(h, (space.size,) * n).copy()
            if chain.horizon is None:
                chain = chain.with_horizon(n)
            result = _sides(args.side, lambda: conditional_lower(chain, f, situation),
                            lambda: conditional_upper(chain, f, situation))
        else:
            n = 1 if args.time is None else args.time
            if n < 1:
                raise io.DocumentError("--time must be at least 1")
            if chain.horizon is not None and n > chain.horizon:
                raise io.DocumentError(f"--time {n} is beyond the model's horizon {chain.horizon}")
            result = _sides(args.side, lambda: marginal_lower(chain, h, n), lambda: marginal_upper(chain, h, n))
    _emit(result, out)
    return 0


def cmd_classify(args, out):
    _, chain = _load(args)
    if not chain.stationary:
        raise io.DocumentError("classification needs a stationary model")
    _emit(classify(chain.stationary_operator).to_dict(), out)
    return 0


def cmd_limit(args, out):
    _, chain = _load(args)
    if not chain.stationary:
        raise io.DocumentError("limits need a stationary model")
    h = _gamble(args, chain.space)
    res = invariant_upper_expectation(chain.stationary_operator, h, tol=args.tol, max_iter=args.max_iter)
    if args.trace:
        res.write_trace(args.trace)
    payload = res.to_dict()
    payload["limit_value"] = _num(payload["limit_value"])
    payload["bracket"] = [_num(v) for v in payload["bracket"]]
    payload["marginal_upper"] = _num(chain.initial.upper(res.final))
    _emit(payload, out)
    return 0 if res.converged else EXIT_NONCONVERGENCE


def cmd_trajectory(args, out):
    _, chain = _load(args)
    bounds = singleton_bounds(chain, args.steps)
    write_csv(f"{args.out}.csv", chain.space, bounds)
    written = [f"{args.out}.csv"]
    if args.svg:
        if args.svg_steps:
            panels = [int(v) for v in args.svg_steps.split(",")]
        else:
            panels = sorted({1, 2, 3, 4, args.steps} & set(range(1, args.steps + 1)))
        with open(f"{args.out}.svg", "w") as fh:
            fh.write(render_svg(chain.space, bounds, panels))
        written.append(f"{args.out}.svg")
    last = bounds[-1]
    _emit({
        "steps": args.steps,
        "files": written,
        "final": {s: [_num(lo), _num(up)] for s, (lo, up) in zip(chain.space.states, last)},
    }, out)
    return 0


def cmd_setchain(args, out):
    _, chain = _load(args)
    if not chain.stationary:
        raise io.DocumentError("set-chain comparison needs a stationary model")
    T = chain.stationary_operator
    M = extreme_matrices(T)
    if args.scrambling:
        verdict = product_scrambling_check(M, args.m_max)
        payload = verdict.to_dict()
        if "tau" in payload:
            payload["tau"] = _num(payload["tau"])
        payload["matrices"] = len(M)
        _emit(payload, out)
        return 0
    if args.n is None or args.x is None:
        raise io.DocumentError("give --n and --x (or --scrambling)")
    h = _gamble(args, chain.space)
    x = chain.space.index(args.x)
    op_up = power_apply(T, h, args.n)[x]
    op_lo = lower_power_apply(T, h, args.n)[x]
    sc_up = max_product_expectation(M, h, args.n, x)
    sc_lo = min_product_expectation(M, h, args.n, x)
    _emit({
        "operator_value": _num(op_up),
        "setchain_value": _num(sc_up),
        "operator_lower": _num(op_lo),
        "setchain_lower": _num(sc_lo),
        "matrices": len(M),
        "agree": bool(abs(op_up - sc_up) < 1e-9 and abs(op_lo - sc_lo) < 1e-9),
    }, out)
    return 0


def cmd_reliability(args, out):
    if args.sweep:
        grid = io.load_json(args.sweep)
        io._check_keys(grid, {"k", "r", "epsilon", "n"}, "$", ["k", "r", "epsilon", "n"])
        rows = reliability_sweep(int(grid["k"]), grid["r"], grid["epsilon"], grid["n"])
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["r", "epsilon", "n", "f_lower", "f_upper"])
        for r, eps, n, lo, up in rows:
            w.writerow([repr(float(r)), repr(float(eps)), n, repr(_num(lo)), repr(_num(up))])
        return 0
    missing = [name for name in ("k", "n", "r_lower", "r_upper") if getattr(args, name) is None]
    if missing:
        raise io.DocumentError(f"missing --{', --'.join(m.replace('_', '-') for m in missing)} (or give --sweep)")
    spec = ReliabilitySpec(args.k, args.n, args.r_lower, args.r_upper)
    lo, up = failure_bounds(spec)
    T = build_embedded_chain(spec).stationary_operator
    _emit({
        "k": spec.k,
        "n": spec.n,
        "r_lower": spec.r_lower,
        "r_upper": spec.r_upper,
        "f_lower": _num(lo),
        "f_upper": _num(up),
        "closed_form_lower": _num(failure_closed_form(spec.k, spec.n, spec.r_upper)),
        "closed_form_upper": _num(failure_closed_form(spec.k, spec.n, spec.r_lower)),
        "regularly_absorbing": classify(T).regularly_absorbing,
    }, out)
    return 0


def cmd_validate(args, out):
    doc = io.load_document(args.model)
    out.write(io.serialize_document(doc))
    return 0


def _add_gamble_args(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("gamble", nargs="?", help="JSON file mapping state labels to values")
    g.add_argument("--event", help="comma-separated states; uses their indicator as gamble")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="imc", description="Imprecise Markov chain computations.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("expect", help="lower/upper expectations (marginal, joint or conditional)")
    p.add_argument("model")
    _add_gamble_args(p)
    p.add_argument("--time", type=int, help="time index n of the marginal X(n)")
    p.add_argument("--horizon", type=int, help="horizon N of the joint map")
    p.add_argument("--joint", help="JSON file with a map on X^N")
    p.add_argument("--situation", help="comma-separated observed path x_1..x_m to condition on")
    p.add_argument("--side", choices=["upper", "lower", "both"], default="both")
    p.add_argument("--initial", help="JSON file with a replacement initial model")
    p.set_defaults(func=cmd_expect)

    p = sub.add_parser("classify", help="classification under upper accessibility")
    p.add_argument("model")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("limit", help="iterate T^n h to the invariant upper expectation")
    p.add_argument("model")
    _add_gamble_args(p)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--trace", help="write the (n, min, max) envelope to this CSV file")
    p.add_argument("--initial", help="JSON file with a replacement initial model")
    p.set_defaults(func=cmd_limit)

    p = sub.add_parser("trajectory", help="singleton bounds per step (CSV, optional SVG)")
    p.add_argument("model")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--out", required=True, help="output prefix")
    p.add_argument("--svg", action="store_true")
    p.add_argument("--svg-steps", help="comma-separated steps to draw")
    p.add_argument("--initial", help="JSON file with a replacement initial model")
    p.set_defaults(func=cmd_trajectory)

    p = sub.add_parser("setchain", help="compare with the Markov set-chain, or check product scrambling")
    p.add_argument("model")
    _add_gamble_args(p)
    p.add_argument("--n", type=int)
    p.add_argument("--x")
    p.add_argument("--scrambling", action="store_true")
    p.add_argument("--m-max", type=int, default=4)
    p.set_defaults(func=cmd_setchain)

    p = sub.add_parser("reliability", help="k-out-of-n:F failure probability bounds")
    p.add_argument("--k", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--r-lower", type=float)
    p.add_argument("--r-upper", type=float)
    p.add_argument("--sweep", help="JSON grid {k, r: [...], epsilon: [...], n: [...]}; writes CSV")
    p.set_defaults(func=cmd_reliability)

    p = sub.add_parser("validate", help="parse a model file and print its canonical form")
    p.add_argument("model")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except SizeCapError as exc:
        print(f"imc: size cap exceeded: {exc}", file=sys.stderr)
        return EXIT_SIZE_CAP
    except (IMCError, ValueError, OSError, IndexError) as exc:
        print(f"imc: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
