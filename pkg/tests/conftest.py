import functools

import pytest
from hypothesis import strategies as st

from lcverify.generate import GenParams, corpus_params, generate_instance
from lcverify.model import SYS1_TEXT, SYS2_TEXT, Interface, parse_system


@pytest.fixture(scope="session")
def sys1():
    return parse_system(SYS1_TEXT)


@pytest.fixture(scope="session")
def sys2():
    return parse_system(SYS2_TEXT)


@functools.lru_cache(maxsize=None)
def corpus_system(seed: int):
    return generate_instance(corpus_params(seed))


@st.composite
def small_systems(draw, max_l=3, max_c=3, max_d=2):
    p = GenParams(
        leader_states=draw(st.integers(1, max_l)),
        contributor_states=draw(st.integers(1, max_c)),
        domain_size=draw(st.integers(1, max_d)),
        density=draw(st.sampled_from((0.2, 0.4, 0.7))),
        seed=draw(st.integers(0, 2**32)),
    )
    return generate_instance(p)


@st.composite
def system_and_interface(draw, **kw):
    s = draw(small_systems(**kw))
    sup = draw(st.sets(st.integers(0, s.C - 1), min_size=1))
    q = draw(st.integers(0, s.L - 1))
    a = draw(st.integers(0, s.D - 1))
    return s, Interface(frozenset(sup), q, a)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, 9):
        if n in RESULTS:
            ok, detail = RESULTS[n]
            terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
        else:
            terminalreporter.write_line(f"criterion {n}: NOT RUN")
