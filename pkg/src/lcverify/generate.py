"""Seeded random systems.

The algorithm is fixed so that a parameter set always yields the same system:
for the leader and then the contributor, visit every (source, op, target)
triple in the order source, target, then ``!0..!D-1, ?0..?D-1, eps``, and keep
it when ``rng.random() < density``.  Final states are drawn afterwards, one
draw per leader state, and the first leader state is used if none is drawn.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .model import EPS, Automaton, MemOp, OpKind, System

DENSITIES = (0.2, 0.4, 0.7)


@dataclass(frozen=True)
class GenParams:
    leader_states: int
    contributor_states: int
    domain_size: int
    density: float = 0.4
    final_fraction: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        if min(self.leader_states, self.contributor_states, self.domain_size) < 1:
            raise ValueError("state and domain counts must be positive")
        if not 0 < self.density <= 1 or not 0 < self.final_fraction <= 1:
            raise ValueError("density and final_fraction must lie in (0, 1]")


def _ops(D: int) -> list[MemOp]:
    return (
        [MemOp(OpKind.WRITE, a) for a in range(D)]
        + [MemOp(OpKind.READ, a) for a in range(D)]
        + [EPS]
    )


def _automaton(rng: random.Random, n: int, D: int, density: float, prefix: str) -> Automaton:
    trans = set()
    ops = _ops(D)
    for src in range(n):
        for dst in range(n):
            for op in ops:
                if rng.random() < density:
                    trans.add((src, op, dst))
    return Automaton(n, 0, frozenset(trans), tuple(f"{prefix}{i}" for i in range(n)))


def symbol_names(D: int) -> tuple[str, ...]:
    base = "xyzwuvst"
    if D <= len(base):
        return tuple(base[:D])
    return tuple(f"d{i}" for i in range(D))


def generate_instance(p: GenParams) -> System:
    rng = random.Random(p.seed)
    leader = _automaton(rng, p.leader_states, p.domain_size, p.density, "q")
    contributor = _automaton(rng, p.contributor_states, p.domain_size, p.density, "c")
    final = {q for q in range(p.leader_states) if rng.random() < p.final_fraction}
    if not final:
        final = {0}
    return System(
        p.domain_size, 0, leader, contributor, frozenset(final), symbol_names(p.domain_size)
    )


def corpus_params(seed: int) -> GenParams:
    """Parameters of the standard small corpus (L, C <= 3, D <= 2)."""
    return GenParams(
        leader_states=1 + seed % 3,
        contributor_states=1 + (seed // 3) % 3,
        domain_size=1 + (seed // 9) % 2,
        density=DENSITIES[(seed // 18) % 3],
        final_fraction=0.5,
        seed=seed,
    )


def corpus(seeds=range(1, 301)) -> list[System]:
    return [generate_instance(corpus_params(k)) for k in seeds]
