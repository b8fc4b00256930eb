"""Command-line interface: navigate, verify, diameter, bounds and spectrum, one JSON record per line."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import bounds as bnd
from .algebra import AlgebraError
from .bases import BfsBase, MitmBase
from .engine import BaseCaseError, BudgetExceeded, NavigationError, Navigator
from .fabgup import FabGupInstance, layered_base
from .groups import CyclicGroup, ThresholdError
from .oracle import DEFAULT_BFS_THRESHOLD, NotGeneratingError, directed_diameter, exhaustive_residue_check, \
    verify_hypotheses
from .sl2 import PackedMitmBase, ScheduleError, Sl2Instance, Sl2Quotient, canonical_generators, parse_schedule, \
    random_element, sl2_order
from .spectral import DEFAULT_SPECTRAL_THRESHOLD, DisconnectedError, spectral_report
from .treeauto import PortraitError, PortraitGroup, gen_a, gen_b, pt_from_str, pt_mul

EXIT_OK, EXIT_CERT, EXIT_THRESHOLD, EXIT_INPUT = 0, 2, 3, 4


class InputError(ValueError):
    """Malformed command-line input."""


# -- groups, generators and elements -----------------------------------------------------------


def _fg_word(word: str, m: int):
    g = PortraitGroup(m).identity()
    letters = {"a": gen_a(m), "b": gen_b(m)}
    for ch in word:
        if ch not in letters:
            raise InputError(f"words may only use the letters a and b, got {ch!r}")
        g = pt_mul(g, letters[ch])
    return g


def make_group(args):
    if args.group == "sl2":
        return Sl2Quotient(args.q, args.depth)
    if args.group == "fabgup":
        return PortraitGroup(args.depth)
    return CyclicGroup(args.q)


def parse_element(args, G, s: str):
    if args.group == "fabgup" and ":" not in s:
        return _fg_word(s, args.depth)
    if args.group == "fabgup":
        g = pt_from_str(s)
        if g.depth != args.depth:
            raise InputError(f"expected a depth-{args.depth} portrait")
        return g
    return G.parse(s)


def random_group_element(args, G, rng):
    if args.group == "sl2":
        return random_element(args.q, args.depth, rng)
    if args.group == "fabgup":
        return FabGupInstance(max(args.depth, 4)).sample_gamma(rng).truncate(args.depth)
    return int(rng.integers(args.q))


def make_generators(args, G, rng) -> list:
    text = args.gens
    head, _, extra = text.partition("+")
    if head == "canonical":
        if args.group == "sl2":
            gens = canonical_generators(args.q, args.depth)
        elif args.group == "fabgup":
            gens = [gen_a(args.depth), gen_b(args.depth)]
        else:
            gens = [1 % args.q]
    else:
        path = Path(head)
        if not path.exists():
            raise InputError(f"generator set {text!r} is neither 'canonical[+random:k]' nor a file")
        gens = [parse_element(args, G, s) for s in json.loads(path.read_text())]
    if extra:
        kind, _, k = extra.partition(":")
        if kind != "random" or not k.isdigit():
            raise InputError(f"unknown generator augmentation {extra!r}")
        gens = gens + [random_group_element(args, G, rng) for _ in range(int(k))]
    if not gens:
        raise InputError("empty generating set")
    return gens


def make_instance(args):
    if args.group == "sl2":
        return Sl2Instance(parse_schedule(args.schedule, args.q, args.depth))
    if args.group == "fabgup":
        return FabGupInstance(args.depth)
    raise InputError("navigation and verification need --group sl2 or fabgup")


def make_base(args, inst, gens):
    kind = args.base
    if args.group == "fabgup":
        if kind not in ("auto", "layered"):
            raise InputError("the tree group uses the layered base")
        return layered_base(gens)
    Q = inst.base_quotient()
    bgens = [inst.to_base(s) for s in gens]
    if kind == "auto":
        kind = "bfs" if Q.order <= args.threshold else "mitm"
    if kind == "bfs":
        if Q.order > args.threshold:
            raise ThresholdError(f"|Gamma/N_1| = {Q.order} exceeds threshold {args.threshold}")
        return BfsBase(Q, bgens, threshold=args.threshold)
    if kind == "mitm":
        if args.q == 2 and Q.m <= 16:
            return PackedMitmBase(bgens, Q.m, L=args.mitm_L)
        if args.mitm_L is None:
            raise InputError("generic meet in the middle needs --mitm-L")
        return MitmBase(Q, bgens, args.mitm_L, threshold=args.threshold)
    raise InputError(f"base {kind!r} is not available for {args.group}")


# -- commands ----------------------------------------------------------------------------------


def cmd_navigate(args, out) -> int:
    rng = np.random.default_rng(args.seed)
    inst = make_instance(args)
    G = inst.group
    gens = make_generators(args, G, rng)
    base = make_base(args, inst, gens)
    nav = Navigator(inst, gens, base, max_calls=args.max_calls)
    targets = [parse_element(args, G, s) for s in args.element or []]
    targets += [random_group_element(args, G, rng) for _ in range(args.random)]
    if not targets:
        raise InputError("give --element or --random")
    status = EXIT_OK
    for g in targets:
        res = nav.navigate(g, args.level)
        rec = res.to_record(expand_limit=args.expand_limit)
        rec.update(seed=args.seed, element=G.serialize(g))
        emit(out, rec)
        if not res.certified:
            status = EXIT_CERT
    return status


def _levels(text: str, top: int) -> list[int]:
    if text == "all":
        return list(range(1, top))
    lo, _, hi = text.partition("-")
    return list(range(int(lo), int(hi or lo) + 1))


def cmd_verify(args, out) -> int:
    inst = make_instance(args)
    levels = _levels(args.levels, inst.top_level)
    rep = verify_hypotheses(inst, levels, args.samples, seed=args.seed)
    rep.update(command="verify", instance=inst.describe(), seed=args.seed, samples=args.samples)
    exhaustive = []
    for n in levels:
        try:
            exhaustive.append(exhaustive_residue_check(inst, n))
        except ThresholdError:
            continue
    rep["exhaustive"] = exhaustive
    rep["ok"] = rep["ok"] and all(e["ok"] for e in exhaustive)
    emit(out, rep)
    return EXIT_OK if rep["ok"] else EXIT_CERT


def cmd_diameter(args, out) -> int:
    rng = np.random.default_rng(args.seed)
    G = make_group(args)
    gens = make_generators(args, G, rng)
    d = directed_diameter(G, gens, threshold=args.threshold)
    emit(out, {"command": "diameter", "group": G.describe(), "generators": [G.serialize(s) for s in gens],
               "order": G.order, "directed_diameter": d, "seed": args.seed})
    return EXIT_OK


def cmd_bounds(args, out) -> int:
    n = args.steps
    rec = {"command": "bounds", "group": args.group, "steps": n}
    if args.group == "sl2":
        sched = parse_schedule(args.schedule, args.q, args.depth)
        A, k = bnd.sl2_params(sched.steps - 1)
        idx = sl2_order(args.q, sched.betas[0])
        rec.update(index_N1=idx, bound_l=bnd.bound_l(idx, A, k), levels=sched.steps,
                   betas=list(sched.betas), bound_L=bnd.bound_L(idx, A, k, 1))
    elif args.group == "fabgup":
        A, k = bnd.fg_params(n - 1)
        idx = 3**28
        rt = bnd.bound_runtime(1, A, k, 2, idx)
        rec.update(index_N1=idx, bound_l=bnd.bound_l(idx, A, k), log10_runtime_bound=rt["log10_closed_form"],
                   **bnd.fg_period_products())
    else:
        rec["padic_bound"] = bnd.padic_bound(args.q, args.index_h2, n)
    rec["constants"] = bnd.exponent_constants()
    emit(out, rec)
    return EXIT_OK


def cmd_spectrum(args, out) -> int:
    rng = np.random.default_rng(args.seed)
    G = make_group(args)
    gens = make_generators(args, G, rng)
    rep = spectral_report(G, gens, threshold=args.threshold)
    rec = rep.to_record()
    rec.update(command="spectrum", generators=[G.serialize(s) for s in gens], seed=args.seed)
    emit(out, rec)
    return EXIT_OK


def _json_default(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def emit(out, rec: dict) -> None:
    rec = {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in rec.items()}
    out.write(json.dumps(rec, sort_keys=True, default=_json_default) + "\n")
    out.flush()


# -- argument parsing --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="potentskp", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--group", choices=["sl2", "fabgup", "cyclic"], default="sl2")
    common.add_argument("--q", type=int, default=2, help="field order for sl2, group order for cyclic")
    common.add_argument("--depth", type=int, default=4, help="t-adic depth (sl2) or tree depth (fabgup)")
    common.add_argument("--schedule", default="auto:3", help="auto:<beta1> or a JSON schedule file")
    common.add_argument("--gens", default="canonical", help="canonical, canonical+random:<k>, or a JSON list file")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threshold", type=int, default=None,
                        help="size threshold (default 10^7 for BFS, 10^6 for spectra)")
    common.add_argument("--out", default="-", help="output file (default stdout)")
    sub = p.add_subparsers(dest="command", required=True)

    nav = sub.add_parser("navigate", parents=[common], help="positive words for elements")
    nav.add_argument("--element", action="append", help="element to navigate (repeatable)")
    nav.add_argument("--random", type=int, default=0, help="also navigate this many random elements")
    nav.add_argument("--level", type=int, default=None, help="target level n (default: deepest)")
    nav.add_argument("--base", choices=["auto", "bfs", "mitm", "layered"], default="auto")
    nav.add_argument("--mitm-L", dest="mitm_L", type=int, default=None)
    nav.add_argument("--max-calls", dest="max_calls", type=int, default=None)
    nav.add_argument("--expand-limit", dest="expand_limit", type=int, default=10**5)

    ver = sub.add_parser("verify", parents=[common], help="randomized hypothesis checks")
    ver.add_argument("--levels", default="all", help="'all', 'n' or 'lo-hi'")
    ver.add_argument("--samples", type=int, default=20)

    sub.add_parser("diameter", parents=[common], help="exact directed diameter by BFS")

    bo = sub.add_parser("bounds", parents=[common], help="diameter and runtime bound calculators")
    bo.add_argument("--steps", type=int, default=7, help="number of levels n")
    bo.add_argument("--index-h2", dest="index_h2", type=int, default=9, help="|Gamma:H_2| for the p-adic bound")

    sub.add_parser("spectrum", parents=[common], help="spectral gap, diameter and mixing time")
    return p


COMMANDS = {"navigate": cmd_navigate, "verify": cmd_verify, "diameter": cmd_diameter, "bounds": cmd_bounds,
            "spectrum": cmd_spectrum}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threshold is None:
        args.threshold = DEFAULT_SPECTRAL_THRESHOLD if args.command == "spectrum" else DEFAULT_BFS_THRESHOLD
    out = sys.stdout if args.out == "-" else open(args.out, "w")
    try:
        return COMMANDS[args.command](args, out)
    except (ThresholdError, BudgetExceeded) as exc:
        print(f"potentskp: {exc}", file=sys.stderr)
        return EXIT_THRESHOLD
    except (InputError, AlgebraError, PortraitError, ScheduleError, NotGeneratingError, DisconnectedError,
            BaseCaseError, ValueError, json.JSONDecodeError) as exc:
        print(f"potentskp: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NavigationError as exc:
        print(f"potentskp: {exc}", file=sys.stderr)
        return EXIT_CERT
    finally:
        if out is not sys.stdout:
            out.close()


if __name__ == "__main__":
    sys.exit(main())
