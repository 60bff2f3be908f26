"""Liveness: some final leader state is visited infinitely often.

An infinite run exists iff some reachable interface with a final leader state
admits a saturated cycle, so the check pairs a reachability back end (which
lists the reachable interfaces) with the cycle engine.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cycle import CycVerdict, cyc
from .model import Interface, System
from .reach_subsets import interfaces_from_table, saturate_abstract
from .reach_witness import interfaces_from_witness_table, valid_short_table

BACKENDS = ("subsets", "witness")


@dataclass(frozen=True)
class Verdict:
    answer: bool
    interface: Interface | None
    evidence: CycVerdict | None
    backend: str
    stats: dict = field(default_factory=dict)


def reachable_interfaces(s: System, backend: str, stats: dict | None = None) -> list[Interface]:
    stats = {} if stats is None else stats
    if backend == "subsets":
        tbl = saturate_abstract(s)
        stats["abstract_states"] = tbl.explored
        found = interfaces_from_table(tbl, s.final_states)
    elif backend == "witness":
        tbl = valid_short_table(s)
        stats["table_entries"] = tbl.stats["entries"]
        found = interfaces_from_witness_table(s, tbl, s.final_states)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return sorted(found, key=Interface.sort_key)


def lcl(s: System, backend: str = "subsets") -> Verdict:
    stats: dict = {"interfaces": 0, "cyc_calls": 0}
    if not s.final_states:
        return Verdict(False, None, None, backend, stats)
    ifaces = reachable_interfaces(s, backend, stats)
    stats["interfaces"] = len(ifaces)
    for iface in ifaces:
        stats["cyc_calls"] += 1
        ev = cyc(s, iface)
        if ev.answer:
            return Verdict(True, iface, ev, backend, stats)
    return Verdict(False, None, None, backend, stats)
