"""Tarjan's strongly connected components over dense integer graphs."""

from __future__ import annotations

from typing import Callable, Iterable

Succ = Callable[[int], Iterable[int]]


def tarjan(nodes: Iterable[int], succ: Succ) -> list[list[int]]:
    """Components in reverse topological order (sinks first), iteratively."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    out: list[list[int]] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ(w))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


def component_of(root: int, succ: Succ) -> set[int]:
    """The SCC containing ``root``, exploring only what ``root`` reaches."""
    for comp in tarjan([root], succ):
        if root in comp:
            return set(comp)
    raise AssertionError("root missing from its own search")
