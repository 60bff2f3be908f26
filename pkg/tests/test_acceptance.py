"""Acceptance criteria, one test each; a PASS/FAIL line per criterion is
printed in the terminal summary."""

import random
import time
from itertools import permutations

import pytest

from lcverify.cycle import cyc, cyc_bruteforce, greatest_fixed_point, stable_sets, writes_scc
from lcverify.generate import GenParams, corpus_params, generate_instance
from lcverify.liveness import lcl
from lcverify.model import SYS1_TEXT, SYS2_TEXT, Interface, ModelError, parse_system, serialize_system
from lcverify.reach_subsets import interfaces_from_table, lcr_subsets, saturate_abstract, state_bound
from lcverify.reach_witness import (
    Witness,
    concat,
    context,
    full_expr_states,
    lcr_witness,
    lvalid,
    shrink_star,
    sigma_maps,
    valid_short_table,
)
from lcverify.semantics import (
    bounded_live_oracle,
    bounded_reach_oracle,
    bounded_saturated_cycle_oracle,
)

from test_model import _mutate

CORPUS = range(1, 301)
RESULTS: dict[int, tuple[bool, str]] = {}


def record(n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = (ok, detail)
    assert ok, detail


@pytest.fixture(scope="module")
def corpus():
    t0 = time.perf_counter()
    rows = []
    for k in CORPUS:
        s = generate_instance(corpus_params(k))
        rows.append(
            (
                k,
                s,
                lcr_subsets(s).answer,
                lcr_witness(s).answer,
                lcl(s, "subsets").answer,
                lcl(s, "witness").answer,
            )
        )
    return rows, time.perf_counter() - t0


def test_c1_named_instances():
    t0 = time.perf_counter()
    s1 = parse_system(SYS1_TEXT)
    s2 = parse_system(SYS2_TEXT)
    q0, q1 = 0, 1
    checks = []
    # SYS1, F={q1}
    checks.append(lcr_subsets(s1, {q1}).answer)
    checks.append(lcr_witness(s1, {q1}).answer)
    checks.append(bounded_reach_oracle(s1, {q1}, 1).found)
    # SYS1, F={q0}
    for backend in ("subsets", "witness"):
        v = lcl(s1, backend)
        checks.append(v.answer and v.interface == Interface(frozenset({0, 1}), q0, 0) and v.evidence.gamma == {0, 1})
    checks.append(bounded_live_oracle(s1, 1).found)
    # SYS2, F={q1}
    checks.append(not lcr_subsets(s2).answer)
    checks.append(not lcr_witness(s2).answer)
    checks.append(not any(bounded_reach_oracle(s2, {q1}, t).found for t in (1, 2, 3)))
    checks.append(not lcl(s2, "subsets").answer and not lcl(s2, "witness").answer)
    checks.append(not any(bounded_live_oracle(s2, t).found for t in (1, 2, 3)))
    # SYS2, F={q0}
    s2f = s2.with_final({q0})
    for backend in ("subsets", "witness"):
        v = lcl(s2f, backend)
        checks.append(v.answer and v.evidence.evidence == "read-only")
    checks.append(bounded_live_oracle(s2f, 1).found)
    dt = time.perf_counter() - t0
    record(1, all(checks) and dt < 1.0, f"{sum(checks)}/{len(checks)} checks, {dt:.3f}s (< 1s)")


def test_c2_lcr_engine_equivalence(corpus):
    rows, dt = corpus
    bad = [k for k, _, a, b, _, _ in rows if a != b]
    record(2, not bad and dt < 300, f"{len(rows)} systems, {len(bad)} disagreements {bad[:5]}, {dt:.1f}s (< 300s incl. LCL)")


def test_c3_lcl_backend_equivalence(corpus):
    rows, _ = corpus
    bad = [k for k, _, _, _, a, b in rows if a != b]
    record(3, not bad, f"{len(rows)} systems, {len(bad)} disagreements {bad[:5]}")


def test_c4_cyc_equivalence():
    rng = random.Random(4)
    bad = []
    chains_ok = True
    for k in range(300):
        p = GenParams(rng.randint(1, 3), rng.randint(1, 3), rng.randint(1, 4), rng.choice((0.2, 0.4, 0.7)), seed=k)
        s = generate_instance(p)
        sup = frozenset(rng.sample(range(s.C), rng.randint(1, s.C)))
        iface = Interface(sup, rng.randrange(s.L), rng.randrange(s.D))
        gfp, chain = greatest_fixed_point(s, iface)
        if not (all(a >= b for a, b in zip(chain, chain[1:])) and len(chain) <= s.D + 1):
            chains_ok = False
        if cyc(s, iface).answer != cyc_bruteforce(s, iface):
            bad.append(k)
    record(4, not bad and chains_ok, f"300 pairs (D<=4), {len(bad)} disagreements, chains ok: {chains_ok}")


def test_c5_oracle_soundness(corpus):
    rows, _ = corpus
    violations = []
    for k, s, r_sub, r_wit, l_sub, l_wit in rows:
        for t in (1, 2, 3, 4):
            if bounded_reach_oracle(s, s.final_states, t).found and not (r_sub and r_wit):
                violations.append(("reach", k, t))
            if bounded_live_oracle(s, t).found and not (l_sub and l_wit):
                violations.append(("live", k, t))
        for iface in sorted(interfaces_from_table(saturate_abstract(s)), key=Interface.sort_key):
            n = len(iface.contributor_set)
            if any(bounded_saturated_cycle_oracle(s, iface, t) for t in range(max(1, n), 5)):
                if not cyc(s, iface).answer:
                    violations.append(("cyc", k, iface))
    record(5, not violations, f"{len(rows)} systems x t in 1..4, {len(violations)} violations {violations[:3]}")


def _sample_witnesses(s, rng, want):
    ctx = context(s)
    ws = []
    for q in range(ctx.n):
        for w, tgt in ctx.structural(q):
            for k in range(min(2, s.D) + 1):
                for sig in sigma_maps(len(w), k):
                    ws.append(Witness(w, tgt, tuple(sig)))
    by_init = {}
    for w in ws:
        by_init.setdefault(w.init, []).append(w)
    out = []
    for _ in range(want):
        x = rng.choice(ws)
        y = rng.choice(by_init.get(x.target, [Witness((), x.target)]))
        out.append(concat(x, y))
    return out


def test_c6_structural_properties():
    rng = random.Random(6)
    mono_bad = 0
    for k in range(200):
        p = GenParams(rng.randint(1, 3), rng.randint(1, 3), rng.randint(1, 4), rng.choice((0.2, 0.4, 0.7)), seed=k)
        s = generate_instance(p)
        iface = Interface(frozenset(rng.sample(range(s.C), rng.randint(1, s.C))), rng.randrange(s.L), rng.randrange(s.D))
        big = {b for b in range(s.D) if rng.random() < 0.6}
        small = {b for b in big if rng.random() < 0.5}
        if not writes_scc(s, iface, small) <= writes_scc(s, iface, big):
            mono_bad += 1

    shrink_bad = checked = 0
    invariance = []
    seed = 0
    while checked < 1000 or len(invariance) < 200:
        seed += 1
        s = generate_instance(corpus_params(seed))
        for z in _sample_witnesses(s, rng, 25):
            sz = shrink_star(z)
            betas = list(permutations(range(s.D), z.order))
            ok = shrink_star(sz) == sz and sz.is_short
            for beta in betas:
                if lvalid(s, z, beta):
                    ok = ok and lvalid(s, sz, beta)
                    if len(invariance) < 200:
                        invariance.append(full_expr_states(s, z, beta) == full_expr_states(s, sz, beta))
            checked += 1
            shrink_bad += not ok
    inv_bad = invariance.count(False)
    record(
        6,
        mono_bad == 0 and shrink_bad == 0 and inv_bad == 0,
        f"monotonicity violations {mono_bad}/200, shrink {shrink_bad}/{checked}, FullExpr invariance {inv_bad}/{len(invariance)}",
    )


def test_c7_complexity(corpus):
    rows, _ = corpus
    over = [k for k, s, *_ in rows if saturate_abstract(s).explored > state_bound(s)]
    worst = 0.0
    pair_ok = True
    instances = [GenParams(3, 3, 2, 0.4, seed=k) for k in range(1, 101)]
    instances += [GenParams(3, 3, 2, 0.7, seed=k) for k in range(1, 11)]
    for p in instances:
        t0 = time.perf_counter()
        try:
            tbl = valid_short_table(generate_instance(p))
        except AssertionError:
            pair_ok = False
            continue
        worst = max(worst, time.perf_counter() - t0)
        st = tbl.stats
        pair_ok = pair_ok and all(w <= b for w, b in zip(st["pair_work"], st["pair_bound"]))
    record(
        7,
        not over and worst < 10 and pair_ok,
        f"subsets bound violations {len(over)}, witness worst {worst:.2f}s over {len(instances)} L=3,D=2 runs (< 10s), pair-work asserted: {pair_ok}",
    )


def test_c8_parser(corpus):
    rows, _ = corpus
    rt_bad = [k for k, s, *_ in rows if parse_system(serialize_system(s)) != s]
    rng = random.Random(8)
    bases = [SYS1_TEXT, SYS2_TEXT] + [serialize_system(s) for _, s, *_ in rows[:20]]
    crashes = 0
    for k in range(100):
        doc = _mutate(rng, bases[k % len(bases)])
        try:
            parse_system(doc)
        except ModelError as e:
            crashes += e.line is None or e.column is None
        except Exception:
            crashes += 1
    record(8, not rt_bad and crashes == 0, f"roundtrip failures {len(rt_bad)}/{len(rows)}, fuzz crashes {crashes}/100")
