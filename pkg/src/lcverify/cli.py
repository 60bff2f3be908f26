"""Command-line front end.

Exit codes: 0 answer produced, 1 cross-check disagreement, 2 usage error,
3 capacity exceeded / inconclusive, 4 model parse error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from typing import Sequence

from .crosscheck import crosscheck
from .cycle import cyc, cyc_bruteforce, read_only_cycle_check
from .generate import GenParams, generate_instance
from .liveness import lcl
from .model import Interface, ModelError, System, load_system, parse_interface, serialize_system
from .reach_subsets import lcr_subsets
from .reach_witness import WitnessCapacityError, lcr_witness
from .semantics import (
    OracleCapacityError,
    bounded_live_oracle,
    bounded_reach_oracle,
    saturated_cycle_search,
)

EXIT_OK, EXIT_DISAGREE, EXIT_USAGE, EXIT_CAPACITY, EXIT_PARSE = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


def _iface_json(s: System, iface: Interface | None) -> dict | None:
    if iface is None:
        return None
    return {
        "contributors": [s.contributor.state_names[p] for p in sorted(iface.contributor_set)],
        "leader": s.leader.state_names[iface.leader_state],
        "memory": s.symbol_names[iface.memory_value],
    }


def _symbols(s: System, gamma) -> list[str]:
    return [s.symbol_names[b] for b in sorted(gamma)]


def _steps(s: System, steps) -> list[str]:
    return [st.render(s) for st in steps]


def cmd_check_reach(s: System, args) -> dict:
    out: dict = {"problem": "LCR", "backend": args.algo, "stats": {}}
    if args.algo == "subsets":
        v = lcr_subsets(s)
        out["answer"] = v.answer
        out["interface"] = _iface_json(s, v.interface)
        out["stats"]["abstract_states"] = v.explored
        if v.trace is not None:
            out["trace"] = _steps(s, v.trace)
    elif args.algo == "witness":
        v = lcr_witness(s)
        out["answer"] = v.answer
        out["stats"] = {k: v.stats[k] for k in ("short_words", "entries", "pair_work", "pair_bound")}
    else:
        bound = args.bound or 3
        out["answer"] = "no-at-bound"
        out["stats"]["bound"] = bound
        for t in range(1, bound + 1):
            r = bounded_reach_oracle(s, s.final_states, t)
            if r.found:
                out["answer"] = True
                out["stats"]["t"] = t
                out["trace"] = _steps(s, r.trace)
                break
    return out


def cmd_check_cycle(s: System, args) -> dict:
    if not args.interface:
        raise UsageError("check-cycle needs --interface")
    try:
        iface = parse_interface(s, args.interface)
    except (KeyError, ValueError) as e:
        raise UsageError(str(e).strip('"')) from None
    out: dict = {"problem": "CYC", "backend": args.algo, "stats": {}}
    out["interface"] = _iface_json(s, iface)
    if args.algo == "fixpoint":
        v = cyc(s, iface)
        out["answer"] = v.answer
        if v.gamma is not None:
            out["gamma"] = _symbols(s, v.gamma)
        out["stats"]["read_only"] = v.read_only
        out["stats"]["chain"] = [_symbols(s, g) for g in v.chain]
    elif args.algo == "enum":
        out["answer"] = cyc_bruteforce(s, iface)
        out["stats"]["read_only"] = read_only_cycle_check(s, iface)
    else:
        lo = len(iface.contributor_set)
        bound = args.bound or lo + 3
        out["answer"] = "no-at-bound"
        out["stats"]["bound"] = bound
        for t in range(lo, bound + 1):
            hit = saturated_cycle_search(s, iface, t)
            if hit is not None:
                out["answer"] = True
                out["stats"]["t"] = t
                out["cycle"] = _steps(s, hit[1])
                break
    return out


def cmd_check_liveness(s: System, args) -> dict:
    v = lcl(s, args.algo)
    out: dict = {"problem": "LCL", "answer": v.answer, "backend": args.algo, "stats": dict(v.stats)}
    out["interface"] = _iface_json(s, v.interface)
    if v.evidence is not None:
        if v.evidence.gamma is not None:
            out["gamma"] = _symbols(s, v.evidence.gamma)
        out["stats"]["evidence"] = v.evidence.evidence
    if args.confirm_bound and v.answer:
        out["confirmed_at"] = None
        for t in range(1, args.confirm_bound + 1):
            r = bounded_live_oracle(s, t)
            if r.found:
                c = r.certificate
                out["confirmed_at"] = t
                out["lasso"] = {
                    "prefix": _steps(s, c.prefix),
                    "cycle": _steps(s, c.cycle),
                    "knot": c.knot.render(s),
                }
                break
    return out


def _render_text(res: dict) -> str:
    lines = [f"{res['problem']}: {res['answer']}  ({res['backend']})"]
    for key in ("interface", "gamma", "trace", "cycle", "confirmed_at", "lasso"):
        if res.get(key) is not None:
            lines.append(f"  {key}: {json.dumps(res[key])}")
    lines.append(f"  stats: {json.dumps(res['stats'])}")
    return "\n".join(lines)


def _emit(res: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(res, sort_keys=True))
    else:
        print(_render_text(res))


def _seed_range(text: str) -> range:
    try:
        if ".." in text:
            a, b = text.split("..")
            return range(int(a), int(b) + 1)
        k = int(text)
        return range(k, k + 1)
    except ValueError:
        raise UsageError(f"bad seed range {text!r}; use A..B") from None


def _params(text: str | None) -> GenParams | None:
    if text is None or text == "corpus":
        return None
    fields = {"L": "leader_states", "C": "contributor_states", "D": "domain_size"}
    kw: dict = {}
    try:
        for part in text.split(","):
            k, v = part.split("=")
            k = k.strip()
            if k in fields:
                kw[fields[k]] = int(v)
            elif k in ("density", "final_fraction"):
                kw[k] = float(v)
            else:
                raise ValueError(k)
        return GenParams(**kw)
    except (ValueError, TypeError):
        raise UsageError(f"bad --params {text!r}; e.g. L=3,C=3,D=2,density=0.4") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lcverify", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p):
        p.add_argument("file")
        p.add_argument("--format", choices=("json", "text"), default="json")

    p = sub.add_parser("check-reach", help="is a final leader state reachable")
    common(p)
    p.add_argument("--algo", choices=("subsets", "witness", "oracle"), default="subsets")
    p.add_argument("--bound", type=int)

    p = sub.add_parser("check-cycle", help="saturated cycle for an interface")
    common(p)
    p.add_argument("--interface", help="e.g. c0+c1:q0:x")
    p.add_argument("--algo", choices=("fixpoint", "enum", "oracle"), default="fixpoint")
    p.add_argument("--bound", type=int)

    p = sub.add_parser("check-liveness", help="is a final leader state visited infinitely often")
    common(p)
    p.add_argument("--algo", choices=("subsets", "witness"), default="subsets")
    p.add_argument("--confirm-bound", type=int)

    p = sub.add_parser("gen", help="print a random system")
    p.add_argument("--leader", type=int, required=True)
    p.add_argument("--contrib", type=int, required=True)
    p.add_argument("--domain", type=int, required=True)
    p.add_argument("--density", type=float, default=0.4)
    p.add_argument("--final-fraction", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("crosscheck", help="compare engines on generated systems")
    p.add_argument("--seeds", required=True, help="A..B")
    p.add_argument("--params", help="'corpus' or L=..,C=..,D=..,density=..")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", default="crosscheck-repro")
    p.add_argument("--format", choices=("json", "text"), default="json")
    return ap


def run_cli(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        if args.cmd == "gen":
            p = GenParams(args.leader, args.contrib, args.domain, args.density, args.final_fraction, args.seed)
            sys.stdout.write(serialize_system(generate_instance(p)))
            return EXIT_OK
        if args.cmd == "crosscheck":
            seeds = _seed_range(args.seeds)
            t0 = time.perf_counter()
            bad = crosscheck(seeds, _params(args.params), args.workers, args.out)
            res = {
                "problem": "crosscheck",
                "answer": not bad,
                "backend": "all",
                "stats": {"instances": len(seeds), "disagreements": len(bad)},
                "timings": {"total_s": round(time.perf_counter() - t0, 3)},
                "failures": [{"seed": r.seed, "checks": r.problems, "reproducer": r.reproducer} for r in bad],
            }
            print(json.dumps(res, sort_keys=True) if args.format == "json" else _render_text(res))
            return EXIT_DISAGREE if bad else EXIT_OK
        try:
            s = load_system(args.file)
        except OSError as e:
            raise UsageError(f"cannot read {args.file}: {e.strerror}") from None
        handler = {
            "check-reach": cmd_check_reach,
            "check-cycle": cmd_check_cycle,
            "check-liveness": cmd_check_liveness,
        }[args.cmd]
        t0 = time.perf_counter()
        res = handler(s, args)
        res["timings"] = {"total_s": round(time.perf_counter() - t0, 6)}
        _emit(res, args.format)
        return EXIT_OK
    except UsageError as e:
        print(f"lcverify: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ModelError as e:
        print(f"lcverify: {getattr(args, 'file', '')}:{e}", file=sys.stderr)
        return EXIT_PARSE
    except (OracleCapacityError, WitnessCapacityError) as e:
        print(f"lcverify: inconclusive: {e}", file=sys.stderr)
        return EXIT_CAPACITY
    except ValueError as e:
        print(f"lcverify: {e}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run_cli())
