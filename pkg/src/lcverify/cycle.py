"""Saturated-cycle detection for an interface ``(S, q, a)``.

A cycle that writes at all is summarised by the set Γ of values it writes.
Contributors may only move inside strongly connected blocks of the graph
``G(S, Γ)`` (reads restricted to Γ), and the leader must close a loop at
``(q, a)`` in a memory-tracking product where contributors may overwrite the
memory with anything they can write inside a block.  The writes these two
parts can produce define ``writes_scc(Γ)``; a cycle exists iff some Γ holding
``a`` reproduces itself, which the greatest fixed point of the monotone
operator decides.  Write-free cycles are handled separately.
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable

from .model import Interface, OpKind, System
from .scc import component_of, tarjan

BRUTEFORCE_DOMAIN_CAP = 16

SymbolSet = frozenset[int]


def _debug() -> bool:
    return bool(os.environ.get("LCS_DEBUG"))


def gamma_edges(s: System, iface: Interface, gamma: Iterable[int]) -> dict[int, list[tuple[int, int | None]]]:
    """Adjacency of G(S, Γ): ``p -> [(p', written value or None)]``."""
    gamma = frozenset(gamma)
    sup = iface.contributor_set
    adj: dict[int, list[tuple[int, int | None]]] = {p: [] for p in sorted(sup)}
    for p in sorted(sup):
        for op, dst in s.contributor.out[p]:
            if dst not in sup:
                continue
            if op.kind == OpKind.READ and op.value not in gamma:
                continue
            adj[p].append((dst, op.value if op.kind == OpKind.WRITE else None))
    return adj


def gamma_scc(s: System, iface: Interface, gamma: Iterable[int]) -> list[frozenset[int]]:
    adj = gamma_edges(s, iface, gamma)
    comps = tarjan(sorted(adj), lambda p: [d for d, _ in adj[p]])
    return sorted((frozenset(c) for c in comps), key=min)


def contributor_writes(s: System, iface: Interface, dec: list[frozenset[int]]) -> SymbolSet:
    block = {p: i for i, blk in enumerate(dec) for p in blk}
    out = set()
    for p in iface.contributor_set:
        for op, dst in s.contributor.out[p]:
            if op.kind == OpKind.WRITE and dst in block and block[dst] == block[p]:
                out.add(op.value)
    return frozenset(out)


class LeaderProduct:
    """Leader paired with the memory value, plus contributor overwrites.

    Nodes are ``q * D + b``.  Leader moves track memory exactly; an extra
    silent edge ``(q, b) -> (q, c)`` exists for every ``c`` in ``hijack``,
    modelling a contributor writing ``c`` in between two leader moves.
    """

    def __init__(self, s: System, hijack: SymbolSet):
        self.s = s
        self.D = s.D
        self.hijack = hijack
        # (dst node, written value or None) per node
        self.adj: list[list[tuple[int, int | None]]] = [[] for _ in range(s.L * s.D)]
        for q in range(s.L):
            for op, dst in s.leader.out[q]:
                for b in range(s.D):
                    if op.kind == OpKind.WRITE:
                        self.adj[q * s.D + b].append((dst * s.D + op.value, op.value))
                    elif op.kind == OpKind.READ:
                        if op.value == b:
                            self.adj[q * s.D + b].append((dst * s.D + b, None))
                    else:
                        self.adj[q * s.D + b].append((dst * s.D + b, None))
            for b in range(s.D):
                for c in sorted(hijack):
                    if c != b:
                        self.adj[q * s.D + b].append((q * s.D + c, None))

    def node(self, q: int, a: int) -> int:
        return q * self.D + a

    def loop_writes(self, q: int, a: int) -> SymbolSet:
        """Values written on edges inside the SCC of ``(q, a)``."""
        root = self.node(q, a)
        comp = component_of(root, lambda u: [v for v, _ in self.adj[u]])
        return frozenset(
            b for u in comp for v, b in self.adj[u] if b is not None and v in comp
        )

    def loop_writes_by_product(self, q: int, a: int) -> SymbolSet:
        """Per-symbol emptiness test: can ``(q, a)`` return to itself after a ``!b``?"""
        root = self.node(q, a)
        out = set()
        for b in range(self.D):
            seen = {(root, 0)}
            queue = deque([(root, 0)])
            hit = False
            while queue and not hit:
                u, flag = queue.popleft()
                for v, w in self.adj[u]:
                    nf = 1 if (flag or w == b) else 0
                    if v == root and nf:
                        hit = True
                        break
                    if (v, nf) not in seen:
                        seen.add((v, nf))
                        queue.append((v, nf))
            if hit:
                out.add(b)
        return frozenset(out)


def writes_of_decomposition(
    s: System,
    iface: Interface,
    dec: list[frozenset[int]],
    cache: dict | None = None,
    check: bool | None = None,
) -> SymbolSet:
    wc = contributor_writes(s, iface, dec)
    if cache is not None and wc in cache:
        return cache[wc]
    prod = LeaderProduct(s, wc)
    wl = prod.loop_writes(iface.leader_state, iface.memory_value)
    if check if check is not None else _debug():
        alt = prod.loop_writes_by_product(iface.leader_state, iface.memory_value)
        assert alt == wl, f"leader loop writes disagree: {sorted(wl)} vs {sorted(alt)}"
    result = wc | wl
    if cache is not None:
        cache[wc] = result
    return result


def writes_scc(s: System, iface: Interface, X: Iterable[int], cache: dict | None = None) -> SymbolSet:
    return writes_of_decomposition(s, iface, gamma_scc(s, iface, X), cache)


def greatest_fixed_point(s: System, iface: Interface) -> tuple[SymbolSet, list[SymbolSet]]:
    """Kleene iteration from the full domain; returns the limit and the chain."""
    cache: dict = {}
    gamma = frozenset(range(s.D))
    chain = [gamma]
    while True:
        nxt = writes_scc(s, iface, gamma, cache)
        assert nxt <= gamma, "Kleene chain increased"
        if nxt == gamma:
            break
        gamma = nxt
        chain.append(gamma)
    assert len(chain) <= s.D + 1
    return gamma, chain


def _has_cycle_at(root: int, succ) -> bool:
    seen = set()
    queue = deque(succ(root))
    while queue:
        u = queue.popleft()
        if u == root:
            return True
        if u in seen:
            continue
        seen.add(u)
        queue.extend(succ(u))
    return False


def read_only_cycle_check(s: System, iface: Interface) -> bool:
    a = iface.memory_value

    def quiet(op) -> bool:
        return op.kind == OpKind.EPS or (op.kind == OpKind.READ and op.value == a)

    def leader_succ(q: int):
        return [d for op, d in s.leader.out[q] if quiet(op)]

    if _has_cycle_at(iface.leader_state, leader_succ):
        return True
    sup = iface.contributor_set

    def contrib_succ(p: int):
        return [d for op, d in s.contributor.out[p] if quiet(op) and d in sup]

    return any(_has_cycle_at(p, contrib_succ) for p in sorted(sup))


@dataclass(frozen=True)
class CycVerdict:
    answer: bool
    gamma: SymbolSet | None
    read_only: bool
    chain: tuple[SymbolSet, ...] = ()

    @property
    def evidence(self) -> str | None:
        if self.gamma is not None:
            return "gamma"
        return "read-only" if self.read_only else None


def cyc(s: System, iface: Interface) -> CycVerdict:
    gfp, chain = greatest_fixed_point(s, iface)
    ro = read_only_cycle_check(s, iface)
    if iface.memory_value in gfp:
        return CycVerdict(True, gfp, ro, tuple(chain))
    return CycVerdict(ro, None, ro, tuple(chain))


def stable_sets(s: System, iface: Interface) -> list[SymbolSet]:
    """Every nonempty Γ with ``writes_scc(Γ) = Γ``, by exhaustive enumeration."""
    if s.D > BRUTEFORCE_DOMAIN_CAP:
        raise ValueError(f"brute force limited to |D| <= {BRUTEFORCE_DOMAIN_CAP}")
    out = []
    for k in range(1, s.D + 1):
        for combo in combinations(range(s.D), k):
            g = frozenset(combo)
            if writes_scc(s, iface, g) == g:
                out.append(g)
    return out


def cyc_bruteforce(s: System, iface: Interface) -> bool:
    if any(iface.memory_value in g for g in stable_sets(s, iface)):
        return True
    return read_only_cycle_check(s, iface)
