"""Engine cross-validation over generated systems, with reproducer shrinking."""

from __future__ import annotations

import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable

from .cycle import cyc, cyc_bruteforce
from .generate import GenParams, corpus_params, generate_instance
from .liveness import lcl
from .model import Automaton, Interface, System, serialize_system
from .reach_subsets import lcr_subsets
from .reach_witness import lcr_witness

Checker = Callable[[System], list[str]]


def sample_interfaces(s: System, count: int, seed: int) -> list[Interface]:
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        k = rng.randint(1, s.C)
        sup = frozenset(rng.sample(range(s.C), k))
        out.append(Interface(sup, rng.randrange(s.L), rng.randrange(s.D)))
    return out


def disagreements(s: System, cyc_samples: int = 4, seed: int = 0) -> list[str]:
    """Names of the checks on which two independent routes disagree."""
    bad = []
    if lcr_subsets(s).answer != lcr_witness(s).answer:
        bad.append("lcr")
    if lcl(s, "subsets").answer != lcl(s, "witness").answer:
        bad.append("lcl")
    for iface in sample_interfaces(s, cyc_samples, seed):
        if cyc(s, iface).answer != cyc_bruteforce(s, iface):
            bad.append("cyc:" + iface.render(s))
    return bad


def _without(aut: Automaton, edge) -> Automaton:
    return replace(aut, transitions=aut.transitions - {edge})


def minimize(s: System, kind: str, check: Checker = disagreements) -> System:
    """Greedily drop transitions while ``kind`` still shows up."""
    changed = True
    while changed:
        changed = False
        for side in ("leader", "contributor"):
            for edge in sorted(getattr(s, side).transitions):
                cand = replace(s, **{side: _without(getattr(s, side), edge)})
                if kind in check(cand):
                    s = cand
                    changed = True
    return s


@dataclass(frozen=True)
class CaseResult:
    seed: int
    problems: list[str]
    reproducer: str | None = None


def _run_case(args) -> CaseResult:
    seed, params, check, out_dir = args
    p = corpus_params(seed) if params is None else replace(params, seed=seed)
    s = generate_instance(p)
    problems = check(s)
    if not problems:
        return CaseResult(seed, [])
    small = minimize(s, problems[0], check)
    path = os.path.join(out_dir, f"repro-seed{seed}.lcs")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {problems[0]} disagreement, seed {seed}\n")
        fh.write(serialize_system(small))
    return CaseResult(seed, problems, path)


def crosscheck(
    seeds: range,
    params: GenParams | None = None,
    workers: int = 1,
    out_dir: str = ".",
    check: Checker = disagreements,
) -> list[CaseResult]:
    """Failing cases only, ordered by seed."""
    os.makedirs(out_dir, exist_ok=True)
    jobs = [(k, params, check, out_dir) for k in seeds]
    if workers <= 1:
        results = [_run_case(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_case, jobs, chunksize=4))
    return sorted((r for r in results if r.problems), key=lambda r: r.seed)
