import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lcverify.cycle import (
    LeaderProduct,
    contributor_writes,
    cyc,
    cyc_bruteforce,
    gamma_scc,
    greatest_fixed_point,
    read_only_cycle_check,
    stable_sets,
    writes_of_decomposition,
    writes_scc,
)
from lcverify.model import Interface, parse_interface, parse_system
from lcverify.semantics import bounded_saturated_cycle_oracle

from conftest import system_and_interface

X, Y = 0, 1


@pytest.fixture
def i1(sys1):
    return parse_interface(sys1, "c0+c1:q0:x")


@pytest.fixture
def i2(sys2):
    return parse_interface(sys2, "c0:q0:x")


def test_gamma_scc(sys1, i1):
    assert gamma_scc(sys1, i1, {X, Y}) == [frozenset({0, 1})]
    assert gamma_scc(sys1, i1, set()) == [frozenset({0}), frozenset({1})]


def test_gamma_scc_singleton():
    s = parse_system("system { domain=[x] init=x leader { init=q } contributor { init=c } }")
    assert gamma_scc(s, Interface(frozenset({0}), 0, 0), {0}) == [frozenset({0})]


def test_writes_of_decomposition(sys1, i1, sys2, i2):
    dec = [frozenset({0, 1})]
    assert contributor_writes(sys1, i1, dec) == {Y}
    assert LeaderProduct(sys1, frozenset({Y})).loop_writes(0, X) == {X}
    assert writes_of_decomposition(sys1, i1, dec, check=True) == {X, Y}
    assert writes_of_decomposition(sys2, i2, [frozenset({0})], check=True) == set()


def test_leader_write_self_loop():
    s = parse_system("system { domain=[x,y] init=x leader { init=q q -> q : !y } contributor { init=c } }")
    i = Interface(frozenset({0}), 0, Y)
    assert writes_of_decomposition(s, i, [frozenset({0})], check=True) == {Y}


def test_writes_scc(sys1, i1):
    assert writes_scc(sys1, i1, {X, Y}) == {X, Y}
    assert writes_scc(sys1, i1, set()) == set()


def test_gfp(sys1, i1, sys2, i2):
    assert greatest_fixed_point(sys1, i1) == (frozenset({X, Y}), [frozenset({X, Y})])
    gfp, chain = greatest_fixed_point(sys2, i2)
    assert gfp == set() and len(chain) <= 2


def test_gfp_contributor_self_write():
    s = parse_system(
        "system { domain=[x,y] init=x leader { init=q q -> q : ?x } contributor { init=c c -> c : !y } }"
    )
    assert Y in greatest_fixed_point(s, Interface(frozenset({0}), 0, X))[0]


def test_read_only(sys1, i1, sys2, i2):
    assert read_only_cycle_check(sys2, i2)
    assert not read_only_cycle_check(sys1, i1)
    s = parse_system("system { domain=[x] init=x leader { init=q q -> q : eps } contributor { init=c } }")
    assert read_only_cycle_check(s, Interface(frozenset({0}), 0, 0))


def test_cyc_examples(sys1, i1, sys2, i2):
    v = cyc(sys1, i1)
    assert v.answer and v.gamma == {X, Y} and v.evidence == "gamma"
    v = cyc(sys2, i2)
    assert v.answer and v.evidence == "read-only"
    assert not cyc(sys2, parse_interface(sys2, "c0:q0:y")).answer


def test_bruteforce_examples(sys1, i1, sys2):
    assert cyc_bruteforce(sys1, i1)
    assert stable_sets(sys1, i1) == [frozenset({X, Y})]
    assert not cyc_bruteforce(sys2, parse_interface(sys2, "c0:q0:y"))


# a nonempty fixed point that misses the memory value: only y circulates
NONEMPTY_GFP_WITHOUT_A = (
    "system { domain=[a,b] init=a leader { init=q }"
    " contributor { init=c0 c0 -> c1 : !b c1 -> c0 : ?b } }"
)
# a leader write/read loop on the memory value with no contributor writes
LEADER_SELF_READ = (
    "system { domain=[a,b] init=a leader { init=q0 q0 -> q1 : ?a q1 -> q0 : !a }"
    " contributor { init=c0 } }"
)


def test_gfp_must_hold_memory_value():
    s = parse_system(NONEMPTY_GFP_WITHOUT_A)
    i = Interface(frozenset({0, 1}), 0, 0)
    assert greatest_fixed_point(s, i)[0] == {1}
    assert not cyc(s, i).answer
    assert not any(bounded_saturated_cycle_oracle(s, i, t) for t in range(2, 7))


def test_leader_reads_own_write():
    s = parse_system(LEADER_SELF_READ)
    i = Interface(frozenset({0}), 0, 0)
    assert bounded_saturated_cycle_oracle(s, i, 1)
    assert cyc(s, i).answer


def test_debug_crosscheck_env(sys1, i1, monkeypatch):
    monkeypatch.setenv("LCS_DEBUG", "1")
    assert cyc(sys1, i1).answer


def test_bruteforce_cap():
    dom = ",".join(f"d{k}" for k in range(17))
    s = parse_system(f"system {{ domain=[{dom}] init=d0 leader {{ init=q }} contributor {{ init=c }} }}")
    with pytest.raises(ValueError):
        stable_sets(s, Interface(frozenset({0}), 0, 0))


@settings(max_examples=100, deadline=None)
@given(system_and_interface(max_d=4), st.data())
def test_writes_scc_monotone(si, data):
    s, i = si
    big = data.draw(st.sets(st.integers(0, s.D - 1)))
    small = data.draw(st.sets(st.sampled_from(sorted(big)))) if big else set()
    assert writes_scc(s, i, small) <= writes_scc(s, i, big)


@settings(max_examples=100, deadline=None)
@given(system_and_interface(max_d=4))
def test_stable_sets_below_gfp(si):
    s, i = si
    gfp, chain = greatest_fixed_point(s, i)
    assert all(a >= b for a, b in zip(chain, chain[1:]))
    for g in stable_sets(s, i):
        assert g <= gfp
    assert cyc(s, i).answer == cyc_bruteforce(s, i)


@settings(max_examples=60, deadline=None)
@given(system_and_interface(max_l=2, max_c=3, max_d=2))
def test_product_routes_agree(si):
    s, i = si
    for g in ({*range(s.D)}, set()):
        dec = gamma_scc(s, i, g)
        writes_of_decomposition(s, i, dec, check=True)


@settings(max_examples=40, deadline=None)
@given(system_and_interface(max_l=2, max_c=2, max_d=2))
def test_oracle_soundness(si):
    s, i = si
    k = len(i.contributor_set)
    if any(bounded_saturated_cycle_oracle(s, i, t) for t in range(k, k + 3)):
        assert cyc(s, i).answer
