"""Reachability by saturation over abstract states ``(S, q, a)``.

``S`` is the set of contributor states populated so far.  Because an unbounded
supply of contributors can follow any single one (the copycat argument), a
state once populated never has to be vacated, so ``S`` only grows along a
computation and the abstract graph has at most ``2^C * L * D`` nodes.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from .model import Interface, OpKind, System
from .semantics import Step

MAX_CONTRIBUTOR_STATES = 64


class AbstractState(NamedTuple):
    mask: int
    leader_state: int
    memory: int


@dataclass
class ReachTable:
    entries: dict[int, set[tuple[int, int]]]
    provenance: dict[AbstractState, tuple[AbstractState, Step] | None]
    explored: int = 0
    order: list[AbstractState] = field(default_factory=list)

    def __contains__(self, st: AbstractState) -> bool:
        return st in self.provenance

    def trace(self, st: AbstractState) -> list[Step]:
        steps = []
        link = self.provenance[st]
        while link is not None:
            prev, step = link
            steps.append(step)
            link = self.provenance[prev]
        steps.reverse()
        return steps

    def chain(self, st: AbstractState) -> list[AbstractState]:
        out = [st]
        link = self.provenance[st]
        while link is not None:
            out.append(link[0])
            link = self.provenance[link[0]]
        out.reverse()
        return out


def abstract_successors(s: System, st: AbstractState):
    mask, q, a = st
    for op, dst in s.leader.out[q]:
        if op.kind == OpKind.READ and op.value != a:
            continue
        b = op.value if op.kind == OpKind.WRITE else a
        yield Step("L", q, op, dst), AbstractState(mask, dst, b)
    m, p = mask, 0
    while m:
        if m & 1:
            for op, dst in s.contributor.out[p]:
                if op.kind == OpKind.READ and op.value != a:
                    continue
                b = op.value if op.kind == OpKind.WRITE else a
                yield Step("C", p, op, dst), AbstractState(mask | (1 << dst), q, b)
        m >>= 1
        p += 1


def state_bound(s: System) -> int:
    return (1 << s.C) * s.L * s.D


def saturate_abstract(s: System) -> ReachTable:
    if s.C > MAX_CONTRIBUTOR_STATES:
        raise ValueError(f"subset engine supports at most {MAX_CONTRIBUTOR_STATES} contributor states")
    root = AbstractState(1 << s.contributor.initial, s.leader.initial, s.initial_value)
    tbl = ReachTable(entries={}, provenance={root: None})
    queue = deque([root])
    while queue:
        st = queue.popleft()
        tbl.order.append(st)
        tbl.entries.setdefault(st.mask, set()).add((st.leader_state, st.memory))
        for step, nxt in abstract_successors(s, st):
            if nxt not in tbl.provenance:
                tbl.provenance[nxt] = (st, step)
                queue.append(nxt)
    tbl.explored = len(tbl.order)
    assert tbl.explored <= state_bound(s), "abstract state bound violated"
    return tbl


@dataclass(frozen=True)
class ReachVerdict:
    answer: bool
    interface: Interface | None = None
    trace: list[Step] | None = None
    explored: int = 0


def lcr_subsets(s: System, targets: Iterable[int] | None = None) -> ReachVerdict:
    """Is some leader state in ``targets`` (default: the final states) reachable?"""
    goal = s.final_states if targets is None else frozenset(targets)
    tbl = saturate_abstract(s)
    for st in tbl.order:
        if st.leader_state in goal:
            iface = Interface.from_mask(*st)
            return ReachVerdict(True, iface, tbl.trace(st), tbl.explored)
    return ReachVerdict(False, explored=tbl.explored)


def interfaces_from_table(
    tbl: ReachTable, restrict_final: Iterable[int] | None = None
) -> set[Interface]:
    keep = None if restrict_final is None else frozenset(restrict_final)
    out = set()
    for mask, pairs in tbl.entries.items():
        for q, a in pairs:
            if keep is None or q in keep:
                out.add(Interface.from_mask(mask, q, a))
    return out
