from hypothesis import given, settings
from hypothesis import strategies as st

from lcverify.scc import component_of, tarjan


def _reach(adj, u):
    seen, stack = {u}, [u]
    while stack:
        v = stack.pop()
        for w in adj.get(v, ()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


graphs = st.integers(1, 8).flatmap(
    lambda n: st.dictionaries(st.integers(0, n - 1), st.lists(st.integers(0, n - 1), max_size=4)).map(
        lambda d: (n, d)
    )
)


def test_small_examples():
    adj = {0: [1], 1: [0, 2], 2: []}
    comps = sorted(sorted(c) for c in tarjan([0, 1, 2], lambda u: adj[u]))
    assert comps == [[0, 1], [2]]
    assert component_of(2, lambda u: adj[u]) == {2}


@settings(max_examples=200, deadline=None)
@given(graphs)
def test_against_mutual_reachability(g):
    n, adj = g
    succ = lambda u: adj.get(u, [])  # noqa: E731
    reach = {u: _reach(adj, u) for u in range(n)}
    expected = {frozenset(v for v in range(n) if v in reach[u] and u in reach[v]) for u in range(n)}
    comps = [frozenset(c) for c in tarjan(list(range(n)), succ)]
    assert len(comps) == len(expected) and set(comps) == expected
    for u in range(n):
        assert frozenset(component_of(u, succ)) in expected and u in component_of(u, succ)


def test_deep_chain_no_recursion_limit():
    n = 20000
    comps = tarjan(list(range(n)), lambda u: [u + 1] if u + 1 < n else [0])
    assert len(comps) == 1
