"""Concrete configuration graph and bounded explicit-state oracles.

A configuration stores contributors as a count vector indexed by contributor
state; contributor identities never matter, so this is the quotient of the
per-thread graph by permutation.  All searches are breadth-first with
successors in a fixed order, which makes every returned trace reproducible.
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator

from .model import Interface, MemOp, OpKind, System

DEFAULT_MAX_STATES = 10**6


class OracleCapacityError(RuntimeError):
    """The explored graph outgrew the configured cap; the answer is unknown."""


def max_states() -> int:
    raw = os.environ.get("LCS_MAX_STATES")
    return int(raw) if raw else DEFAULT_MAX_STATES


@dataclass(frozen=True, order=True)
class Configuration:
    leader_state: int
    memory: int
    counts: tuple[int, ...]

    @property
    def t(self) -> int:
        return sum(self.counts)

    @property
    def support(self) -> frozenset[int]:
        return frozenset(p for p, n in enumerate(self.counts) if n)

    def count_map(self) -> dict[int, int]:
        return {p: n for p, n in enumerate(self.counts) if n}

    def render(self, s: System) -> str:
        cs = ",".join(
            f"{s.contributor.state_names[p]}:{n}" for p, n in self.count_map().items()
        )
        return f"({s.leader.state_names[self.leader_state]},{s.symbol_names[self.memory]},{{{cs}}})"


@dataclass(frozen=True, order=True)
class Step:
    """One move: ``actor`` is ``"L"`` for the leader, ``"C"`` for a contributor."""

    actor: str
    src: int
    op: MemOp
    dst: int

    def render(self, s: System) -> str:
        aut = s.leader if self.actor == "L" else s.contributor
        n = aut.state_names
        return f"{self.actor}:{n[self.src]}-{self.op.render(s.symbol_names)}->{n[self.dst]}"


def initial_configuration(s: System, t: int) -> Configuration:
    if t < 1:
        raise ValueError("need at least one contributor")
    counts = [0] * s.C
    counts[s.contributor.initial] = t
    return Configuration(s.leader.initial, s.initial_value, tuple(counts))


def _enabled(op: MemOp, memory: int) -> tuple[bool, int]:
    if op.kind == OpKind.WRITE:
        return True, op.value
    if op.kind == OpKind.READ:
        return op.value == memory, memory
    return True, memory


def moves(s: System, c: Configuration) -> Iterator[tuple[Step, Configuration]]:
    """Enabled moves in canonical order: leader first, then contributors by state."""
    for op, dst in s.leader.out[c.leader_state]:
        ok, mem = _enabled(op, c.memory)
        if ok:
            yield Step("L", c.leader_state, op, dst), Configuration(dst, mem, c.counts)
    for p, n in enumerate(c.counts):
        if not n:
            continue
        for op, dst in s.contributor.out[p]:
            ok, mem = _enabled(op, c.memory)
            if not ok:
                continue
            counts = list(c.counts)
            counts[p] -= 1
            counts[dst] += 1
            yield Step("C", p, op, dst), Configuration(c.leader_state, mem, tuple(counts))


def successors(s: System, c: Configuration) -> set[tuple[MemOp, Configuration]]:
    return {(step.op, nxt) for step, nxt in moves(s, c)}


def apply_step(s: System, c: Configuration, step: Step) -> Configuration:
    for cand, nxt in moves(s, c):
        if cand == step:
            return nxt
    raise ValueError(f"step {step} not enabled in {c}")


def replay(s: System, c: Configuration, steps: Iterable[Step]) -> Configuration:
    for step in steps:
        c = apply_step(s, c, step)
    return c


def matches_interface(c: Configuration, iface: Interface) -> bool:
    return (
        c.support == iface.contributor_set
        and c.leader_state == iface.leader_state
        and c.memory == iface.memory_value
    )


# --------------------------------------------------------------------------
# exploration helpers


class _Graph:
    """Explicit graph over configurations discovered by BFS from ``roots``."""

    def __init__(self, s: System, roots: Iterable[Configuration], keep=None, cap=None):
        self.nodes: list[Configuration] = []
        self.index: dict[Configuration, int] = {}
        self.edges: list[list[tuple[Step, int]]] = []
        self.parent: list[tuple[int, Step] | None] = []
        cap = max_states() if cap is None else cap
        queue: deque[int] = deque()
        for r in roots:
            if r not in self.index:
                self._add(r, None, cap)
                queue.append(self.index[r])
        while queue:
            u = queue.popleft()
            for step, nxt in moves(s, self.nodes[u]):
                if keep is not None and not keep(nxt):
                    continue
                v = self.index.get(nxt)
                if v is None:
                    v = self._add(nxt, (u, step), cap)
                    queue.append(v)
                self.edges[u].append((step, v))

    def _add(self, c: Configuration, parent, cap: int) -> int:
        if len(self.nodes) >= cap:
            raise OracleCapacityError(f"explored more than {cap} configurations")
        self.index[c] = len(self.nodes)
        self.nodes.append(c)
        self.edges.append([])
        self.parent.append(parent)
        return self.index[c]

    def path_to(self, v: int) -> list[Step]:
        path = []
        while self.parent[v] is not None:
            u, step = self.parent[v]
            path.append(step)
            v = u
        path.reverse()
        return path

    def components(self) -> list[int]:
        """Kosaraju labelling; returns the component id of every node."""
        n = len(self.nodes)
        order: list[int] = []
        seen = [False] * n
        for root in range(n):
            if seen[root]:
                continue
            seen[root] = True
            stack = [(root, 0)]
            while stack:
                u, i = stack[-1]
                if i < len(self.edges[u]):
                    stack[-1] = (u, i + 1)
                    v = self.edges[u][i][1]
                    if not seen[v]:
                        seen[v] = True
                        stack.append((v, 0))
                else:
                    stack.pop()
                    order.append(u)
        rev: list[list[int]] = [[] for _ in range(n)]
        for u in range(n):
            for _, v in self.edges[u]:
                rev[v].append(u)
        comp = [-1] * n
        label = 0
        for root in reversed(order):
            if comp[root] != -1:
                continue
            comp[root] = label
            stack2 = [root]
            while stack2:
                u = stack2.pop()
                for v in rev[u]:
                    if comp[v] == -1:
                        comp[v] = label
                        stack2.append(v)
            label += 1
        return comp

    def on_cycle(self, comp: list[int]) -> list[bool]:
        size: dict[int, int] = {}
        for c in comp:
            size[c] = size.get(c, 0) + 1
        flags = [size[comp[u]] > 1 for u in range(len(self.nodes))]
        for u in range(len(self.nodes)):
            if any(v == u for _, v in self.edges[u]):
                flags[u] = True
        return flags

    def cycle_through(self, knot: int, comp: list[int]) -> list[Step]:
        """Shortest nonempty cycle at ``knot`` (BFS inside its component)."""
        for step, v in self.edges[knot]:
            if v == knot:
                return [step]
        prev: dict[int, tuple[int, Step]] = {}
        queue: deque[int] = deque()
        for step, v in self.edges[knot]:
            if comp[v] == comp[knot] and v not in prev:
                prev[v] = (knot, step)
                queue.append(v)
        while queue:
            u = queue.popleft()
            for step, v in self.edges[u]:
                if v == knot:
                    path = [step]
                    while u != knot:
                        u, st = prev[u]
                        path.append(st)
                    path.reverse()
                    return path
                if comp[v] == comp[knot] and v not in prev:
                    prev[v] = (u, step)
                    queue.append(v)
        raise AssertionError("knot is not on a cycle")


# --------------------------------------------------------------------------
# oracles


@dataclass(frozen=True)
class ReachResult:
    found: bool
    trace: list[Step] | None
    explored: int


def bounded_reach_oracle(
    s: System, targets: Iterable[int], t: int, cap: int | None = None
) -> ReachResult:
    targets = frozenset(targets)
    start = initial_configuration(s, t)
    g = _Graph(s, [start], cap=cap)
    for v, c in enumerate(g.nodes):
        if c.leader_state in targets:
            return ReachResult(True, g.path_to(v), len(g.nodes))
    return ReachResult(False, None, len(g.nodes))


@dataclass(frozen=True)
class LassoCertificate:
    prefix: list[Step]
    cycle: list[Step]
    knot: Configuration
    t: int

    def validate(self, s: System) -> bool:
        try:
            start = initial_configuration(s, self.t)
            if replay(s, start, self.prefix) != self.knot:
                return False
            if not self.cycle or replay(s, self.knot, self.cycle) != self.knot:
                return False
        except ValueError:
            return False
        return self.knot.leader_state in s.final_states


@dataclass(frozen=True)
class LiveResult:
    found: bool
    certificate: LassoCertificate | None
    explored: int


def bounded_live_oracle(s: System, t: int, cap: int | None = None) -> LiveResult:
    start = initial_configuration(s, t)
    g = _Graph(s, [start], cap=cap)
    comp = g.components()
    cyclic = g.on_cycle(comp)
    for v, c in enumerate(g.nodes):
        if cyclic[v] and c.leader_state in s.final_states:
            cert = LassoCertificate(g.path_to(v), g.cycle_through(v, comp), c, t)
            return LiveResult(True, cert, len(g.nodes))
    return LiveResult(False, None, len(g.nodes))


def count_vectors(support: Iterable[int], total: int, width: int) -> Iterator[tuple[int, ...]]:
    """All count vectors of length ``width`` with exactly this support and sum."""
    sup = sorted(support)
    k = len(sup)
    if k == 0 or total < k:
        return
    # stars and bars over positive parts
    for cuts in combinations(range(1, total), k - 1):
        bounds = (0,) + cuts + (total,)
        vec = [0] * width
        for i, p in enumerate(sup):
            vec[p] = bounds[i + 1] - bounds[i]
        yield tuple(vec)


def saturated_cycle_search(
    s: System, iface: Interface, t: int, cap: int | None = None
) -> tuple[Configuration, list[Step]] | None:
    """A nonempty saturated cycle on some configuration matching ``iface``."""
    if t < len(iface.contributor_set):
        raise ValueError("t smaller than the interface support")
    sup = iface.contributor_set
    starts = [
        Configuration(iface.leader_state, iface.memory_value, vec)
        for vec in count_vectors(sup, t, s.C)
    ]
    g = _Graph(s, starts, keep=lambda c: c.support <= sup, cap=cap)
    comp = g.components()
    cyclic = g.on_cycle(comp)
    for c in starts:
        v = g.index[c]
        if cyclic[v]:
            return c, g.cycle_through(v, comp)
    return None


def bounded_saturated_cycle_oracle(
    s: System, iface: Interface, t: int, cap: int | None = None
) -> bool:
    return saturated_cycle_search(s, iface, t, cap) is not None
