"""Reachability through short witnesses, parameterised by leader size and domain.

A witness ``(w, q, σ)`` records the leader's run as a word of
``(state, written value or ⊥)`` pairs ending in ``q``, and ``σ`` places the
first contributor write of each value ``β_ℓ`` just before leader position
``σ(ℓ)``.  A witness is *valid* for ``β`` when the leader can follow it given
the values available so far, and when every first write is producible by some
contributor reading only what the leader and earlier first writes offer.

Short witnesses (pairwise distinct leader states) are built by a dynamic
program over the number of first writes: each order-``k+1`` witness is an
order-``k`` witness extended by an order-1 witness and shrunk back to a short
one.

The leader is *prepared* before use:

* a fresh root state performs the write of the initial memory value and then
  enters the real initial state, so reads of the initial value need no special
  case;
* ``p -!a-> q`` followed by ε moves and ``?a`` is closed into one composite
  ``p -!a-> q''`` so the leader can read back its own writes.

Witnesses produced by this module are over the prepared leader; real leader
states keep their indices and the root is index ``L``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations_with_replacement, permutations
from math import comb
from typing import Iterable, Iterator

from .model import Interface, OpKind, System, members
from .scc import component_of

BOT = None
DEFAULT_UNIVERSE_CAP = 250_000
_NEVER = 1 << 30


class WitnessCapacityError(RuntimeError):
    """The short-witness universe is too large for this engine."""


@dataclass(frozen=True)
class Witness:
    word: tuple[tuple[int, int | None], ...]
    target: int
    sigma: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        n = len(self.word)
        prev = 1
        for v in self.sigma:
            if not prev <= v <= n:
                raise ValueError(f"bad first-write position {v} for word of length {n}")
            prev = v

    def key(self) -> tuple:
        """Total order for deterministic iteration (⊥ sorts first)."""
        return (
            tuple((q, -1 if a is None else a) for q, a in self.word),
            self.target,
            self.sigma,
        )

    @property
    def order(self) -> int:
        return len(self.sigma)

    @property
    def init(self) -> int:
        return self.word[0][0] if self.word else self.target

    @property
    def states(self) -> list[int]:
        return [q for q, _ in self.word]

    @property
    def is_short(self) -> bool:
        st = self.states
        return len(set(st)) == len(st)

    def available(self, beta: tuple[int, ...], i: int) -> int:
        """Mask of first-write values readable at position ``i`` (1-based)."""
        m = 0
        for v, b in zip(self.sigma, beta):
            if v <= i:
                m |= 1 << b
        return m


def concat(x: Witness, y: Witness) -> Witness:
    if y.init != x.target:
        raise ValueError("concatenation needs init(y) == target(x)")
    shift = len(x.word)
    return Witness(x.word + y.word, y.target, x.sigma + tuple(v + shift for v in y.sigma))


def shrink_once(x: Witness) -> Witness:
    """Cut out the first repetition ``q_i = q_j`` (least ``i``, then least ``j``)."""
    st = x.states
    for i, q in enumerate(st):
        for j in range(i + 1, len(st)):
            if st[j] == q:
                lo, hi = i + 1, j + 1  # 1-based positions of the repeat
                word = x.word[:i] + x.word[j:]
                sigma = tuple(
                    v if v < lo else lo if v <= hi else v - hi + lo for v in x.sigma
                )
                return Witness(word, x.target, sigma)
    return x


def shrink_star(x: Witness) -> Witness:
    while True:
        y = shrink_once(x)
        if y == x:
            return x
        x = y


def short_concat(x: Witness, y: Witness) -> Witness:
    return shrink_star(concat(x, y))


# --------------------------------------------------------------------------
# prepared leader and per-system caches


class Context:
    """Prepared leader, contributor move tables and memo caches for one system."""

    def __init__(self, s: System):
        self.s = s
        self.L = s.L
        self.root = s.L
        self.n = s.L + 1
        self.ALL = (1 << s.D) - 1
        writes: list[set[tuple[int, int]]] = [set() for _ in range(self.n)]
        self.reads: list[set[tuple[int, int]]] = [set() for _ in range(self.n)]
        self.eps: list[set[int]] = [set() for _ in range(self.n)]
        for src, op, dst in s.leader.transitions:
            if op.kind == OpKind.WRITE:
                writes[src].add((op.value, dst))
            elif op.kind == OpKind.READ:
                self.reads[src].add((op.value, dst))
            else:
                self.eps[src].add(dst)
        writes[self.root].add((s.initial_value, s.leader.initial))
        closure = [self._eps_closure(q) for q in range(self.n)]
        changed = True
        while changed:
            changed = False
            for p in range(self.n):
                for a, q in list(writes[p]):
                    for q1 in closure[q]:
                        for b, q2 in self.reads[q1]:
                            if b == a and (a, q2) not in writes[p]:
                                writes[p].add((a, q2))
                                changed = True
        self.writes = writes
        # options per state for structural enumeration: (label, next)
        self.options: list[list[tuple[int | None, int]]] = []
        for q in range(self.n):
            opts = {(a, d) for a, d in writes[q]}
            opts |= {(None, d) for _, d in self.reads[q]}
            opts |= {(None, d) for d in self.eps[q]}
            if q != self.root:  # the root only ever fires its write
                opts.add((None, q))
            self.options.append(sorted(opts, key=lambda o: (o[1], -1 if o[0] is None else o[0])))
        self.c_out = [
            [(op.kind, op.value, d) for op, d in s.contributor.out[p]] for p in range(s.C)
        ]
        self.writers = [0] * s.D  # Q_b as a mask
        for p in range(s.C):
            for kind, v, _ in self.c_out[p]:
                if kind == OpKind.WRITE:
                    self.writers[v] |= 1 << p
        self.c_init = 1 << s.contributor.initial
        self._closure: dict[tuple[int, int, int], int] = {}
        self._loop: dict[tuple[int, int], int] = {}

    def _eps_closure(self, q: int) -> set[int]:
        seen = {q}
        stack = [q]
        while stack:
            u = stack.pop()
            for v in self.eps[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return seen

    def loop(self, q: int, gamma: int) -> int:
        """Mask of values the leader can write on some loop at ``q``."""
        key = (q, gamma)
        hit = self._loop.get(key)
        if hit is not None:
            return hit

        def succ(u: int) -> list[int]:
            out = [d for _, d in self.writes[u]]
            out += [d for b, d in self.reads[u] if gamma >> b & 1]
            out += list(self.eps[u])
            return out

        comp = component_of(q, succ)
        m = 0
        for u in comp:
            for a, d in self.writes[u]:
                if d in comp:
                    m |= 1 << a
        self._loop[key] = m
        return m

    def closure(self, start: int, read_mask: int, write_mask: int) -> int:
        """Contributor states reachable from ``start`` with the given reads/writes."""
        key = (start, read_mask, write_mask)
        hit = self._closure.get(key)
        if hit is not None:
            return hit
        seen = start
        stack = list(members(start))
        while stack:
            p = stack.pop()
            for kind, v, d in self.c_out[p]:
                if kind == OpKind.READ:
                    if not read_mask >> v & 1:
                        continue
                elif kind == OpKind.WRITE and not write_mask >> v & 1:
                    continue
                if not seen >> d & 1:
                    seen |= 1 << d
                    stack.append(d)
        self._closure[key] = seen
        return seen

    # ---- validity -------------------------------------------------------

    def lvalid(self, x: Witness, beta: tuple[int, ...]) -> bool:
        if len(beta) != x.order:
            raise ValueError("first-write sequence length differs from witness order")
        n = len(x.word)
        if n and x.word[0][0] == self.root and any(v < 2 for v in x.sigma):
            return False
        prev = 0
        for i in range(1, n + 1):
            q, a = x.word[i - 1]
            nxt = x.word[i][0] if i < n else x.target
            avail = x.available(beta, i)
            assert prev & ~avail == 0, "availability must grow along the word"
            prev = avail
            if a is not None:
                if (a, nxt) not in self.writes[q]:
                    return False
            elif q == self.root:
                return False
            elif not (
                q == nxt
                or nxt in self.eps[q]
                or any(avail >> b & 1 for b, d in self.reads[q] if d == nxt)
            ):
                return False
        return True

    def _nodes(self, x: Witness, beta: tuple[int, ...], k: int) -> list[int]:
        """Read masks along the expression chain pre1, post1, pre2, ... w.r.t. β[:k]."""
        alpha = beta[:k]
        out = []
        for m, (q, a) in enumerate(x.word, start=1):
            avail = x.available(alpha, m)
            out.append(self.loop(q, avail) | avail)
            out.append(0 if a is None else 1 << a)
        return out

    def _skip(self, x: Witness) -> int:
        # nothing happens before the root's write of the initial value
        return 1 if x.word and x.word[0][0] == self.root else 0

    def cvalid(self, x: Witness, beta: tuple[int, ...], i: int) -> bool:
        if len(beta) != x.order:
            raise ValueError("first-write sequence length differs from witness order")
        if not 1 <= i <= x.order:
            raise IndexError("first-write index out of range")
        target = self.writers[beta[i - 1]]
        nodes = self._nodes(x, beta, i - 1)[: 2 * x.sigma[i - 1] - 1]
        r = self.c_init
        for mask in nodes[self._skip(x):]:
            r = self.closure(r, mask, self.ALL)
        return bool(r & target)

    def full_reach(self, z: Witness, beta: tuple[int, ...]) -> int:
        r = self.closure(self.c_init, 0, self.ALL)
        for mask in self._nodes(z, beta, len(beta))[self._skip(z):]:
            r = self.closure(r, mask, self.ALL)
        return r

    def quiet_reach(self, z: Witness, beta: tuple[int, ...]) -> int:
        """States populated when nothing overwrites the leader's final write."""
        nodes = self._nodes(z, beta, len(beta))
        a = z.word[-1][1]
        r = self.c_init
        for mask in nodes[self._skip(z):-1]:
            r = self.closure(r, mask, self.ALL)
        return self.closure(r, 1 << a, 1 << a)

    def tail(self, q: int, a: int) -> set[int]:
        """Leader states reachable from ``q`` by ε moves and reads of ``a``."""
        seen = {q}
        stack = [q]
        while stack:
            u = stack.pop()
            nxt = list(self.eps[u]) + [d for b, d in self.reads[u] if b == a]
            for v in nxt:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return seen

    # ---- enumeration ----------------------------------------------------

    def structural(self, start: int) -> Iterator[tuple[tuple, int]]:
        """All (short word, target) pairs from ``start`` with some edge per step."""
        yield (), start

        def extend(prefix: tuple, visited: frozenset, q: int):
            for label, nxt in self.options[q]:
                w = prefix + ((q, label),)
                yield w, nxt
                if nxt not in visited:
                    yield from extend(w, visited | {nxt}, nxt)

        yield from extend((), frozenset({start}), start)


@lru_cache(maxsize=32)
def context(s: System) -> Context:
    return Context(s)


def sigma_maps(n: int, k: int, lowest: int = 1) -> Iterator[tuple[int, ...]]:
    return combinations_with_replacement(range(lowest, n + 1), k)


def first_write_sequences(D: int) -> Iterator[tuple[int, ...]]:
    for k in range(D + 1):
        yield from permutations(range(D), k)


# --------------------------------------------------------------------------
# public predicates


def loop_set(s: System, q: int, gamma: Iterable[int]) -> frozenset[int]:
    g = 0
    for b in gamma:
        g |= 1 << b
    return frozenset(members(context(s).loop(q, g)))


def lvalid(s: System, x: Witness, beta: Iterable[int]) -> bool:
    return context(s).lvalid(x, tuple(beta))


def cvalid_i(s: System, x: Witness, beta: Iterable[int], i: int) -> bool:
    return context(s).cvalid(x, tuple(beta), i)


def full_expr_states(s: System, z: Witness, beta: Iterable[int]) -> frozenset[int]:
    beta = tuple(beta)
    if len(beta) != z.order:
        raise ValueError("first-write sequence length differs from witness order")
    return frozenset(members(context(s).full_reach(z, beta)))


def valid(s: System, x: Witness, beta: Iterable[int]) -> bool:
    """Leader validity plus producibility of every first write (full witnesses too)."""
    ctx = context(s)
    beta = tuple(beta)
    return ctx.lvalid(x, beta) and all(
        ctx.cvalid(x, beta, i) for i in range(1, x.order + 1)
    )


# --------------------------------------------------------------------------
# dynamic program


@dataclass
class ShortValidTable:
    """True entries only: ``entries[β][z] = (x, y)`` with ``z = x ⊗ y`` (or None)."""

    system: System
    roots: tuple[int, ...]
    entries: dict[tuple[int, ...], dict[Witness, tuple[Witness, Witness] | None]]
    stats: dict[str, object] = field(default_factory=dict)

    def __contains__(self, key: tuple[tuple[int, ...], Witness]) -> bool:
        beta, z = key
        return z in self.entries.get(beta, {})

    def lookup(self, beta: Iterable[int], z: Witness) -> bool:
        return (tuple(beta), z) in self

    def true_entries(self) -> Iterator[tuple[tuple[int, ...], Witness]]:
        for beta in sorted(self.entries, key=lambda b: (len(b), b)):
            for z in sorted(self.entries[beta], key=Witness.key):
                yield beta, z

    def initialized(self) -> Iterator[tuple[tuple[int, ...], Witness]]:
        root = context(self.system).root
        for beta, z in self.true_entries():
            if z.init == root and z.target != root:
                yield beta, z


@dataclass
class _Group:
    """Order-1 witnesses sharing one word and target, indexed by ``σ(1)``."""

    word: tuple
    target: int
    pos: dict[int, int]
    sigmas: list[int]
    usable: dict[tuple[int, int], list[tuple[int, int]]] = field(default_factory=dict)


def _cut(xw: tuple, g: _Group) -> tuple[int, int] | None:
    """First repeat of ``x.word · g.word``; both parts are repeat-free."""
    for i, (q, _) in enumerate(xw):
        j = g.pos.get(q)
        if j is not None:
            return i, j
    return None


def _usable(ctx: Context, g: _Group, avail: int, b: int) -> list[tuple[int, int]]:
    """``(σ(1), hit mask)`` for each leader-valid placement of the new first write.

    The hit mask holds the contributor states from which, following the
    expression of ``g`` up to ``σ(1)``, some writer of ``b`` is reachable.
    """
    key = (avail, b)
    hit = g.usable.get(key)
    if hit is not None:
        return hit
    n = len(g.word)
    ok_before, ok_after = [], []
    for i in range(n):
        q, a = g.word[i]
        nxt = g.word[i + 1][0] if i + 1 < n else g.target
        if a is not None:
            flag = (a, nxt) in ctx.writes[q]
            ok_before.append(flag)
            ok_after.append(flag)
            continue
        free = q == nxt or nxt in ctx.eps[q]
        labels = 0
        for c, d in ctx.reads[q]:
            if d == nxt:
                labels |= 1 << c
        ok_before.append(free or bool(labels & avail))
        ok_after.append(free or bool(labels & (avail | 1 << b)))
    nodes = []
    for q, a in g.word:
        nodes.append(ctx.loop(q, avail) | avail)
        nodes.append(0 if a is None else 1 << a)
    skip = 1 if g.word and g.word[0][0] == ctx.root else 0
    target = ctx.writers[b]
    # reach[v] for each start state: states reachable by node pre(v)
    hits = {v: 0 for v in g.sigmas}
    for p in range(ctx.s.C):
        r = 1 << p
        for idx in range(skip, 2 * n - 1):
            r = ctx.closure(r, nodes[idx], ctx.ALL)
            if idx % 2 == 0:
                v = idx // 2 + 1
                if v in hits and r & target:
                    hits[v] |= 1 << p
    out = []
    for v in g.sigmas:
        if all(ok_before[: v - 1]) and all(ok_after[v - 1 :]) and hits[v]:
            out.append((v, hits[v]))
    g.usable[key] = out
    return out


def valid_short_table(
    s: System, roots: Iterable[int] | None = None, cap: int = DEFAULT_UNIVERSE_CAP
) -> ShortValidTable:
    """Fill every true entry whose witness starts in one of ``roots``.

    By default only the prepared root is used; that is all reachability and
    interface extraction need, since ``x ⊗ y`` keeps the start of ``x``.
    """
    ctx = context(s)
    roots = (ctx.root,) if roots is None else tuple(sorted(set(roots)))

    words_by_start: dict[int, list[tuple[tuple, int]]] = {}
    universe = 0
    for q in range(ctx.n):
        words_by_start[q] = list(ctx.structural(q))
        universe += len(words_by_start[q])
        if universe > cap:
            raise WitnessCapacityError(f"more than {cap} short words; leader too large")

    def lowest(start: int) -> int:
        return 2 if start == ctx.root else 1

    groups: dict[int, list[_Group]] = {}
    for q, words in words_by_start.items():
        for w, tgt in words:
            sig = list(range(lowest(q), len(w) + 1))
            if sig:
                pos = {st: j for j, (st, _) in enumerate(w)}
                groups.setdefault(q, []).append(_Group(w, tgt, pos, sig))
    n_ord1 = sum(len(g.sigmas) for gs in groups.values() for g in gs)

    def ord_size(k: int) -> int:
        total = 0
        for q in roots:
            lo = lowest(q)
            for w, _ in words_by_start[q]:
                slots = len(w) - lo + 1
                total += 1 if k == 0 else (comb(slots + k - 1, k) if slots > 0 else 0)
        return total

    entries: dict[tuple[int, ...], dict[Witness, tuple[Witness, Witness] | None]] = {}
    base = entries.setdefault((), {})
    for q in roots:
        for w, tgt in words_by_start[q]:
            z = Witness(w, tgt)
            if ctx.lvalid(z, ()):
                base[z] = None

    keys: dict[tuple[int, ...], set[tuple]] = {}
    pair_work: list[int] = []
    pair_bound: list[int] = []
    for k in range(s.D):
        work = 0
        for beta_p in sorted(b for b in entries if len(b) == k):
            avail = 0
            for b in beta_p:
                avail |= 1 << b
            for x in sorted(entries[beta_p], key=Witness.key):
                assert x.order == k
                r_x = ctx.full_reach(x, beta_p)
                nx = len(x.word)
                for b in range(s.D):
                    if avail >> b & 1:
                        continue
                    dest = None
                    for g in groups.get(x.target, ()):
                        work += len(g.sigmas)
                        usable = [v for v, h in _usable(ctx, g, avail, b) if h & r_x]
                        if not usable:
                            continue
                        cut = _cut(x.word, g)
                        if cut is None:
                            word, lo, hi = x.word + g.word, _NEVER, _NEVER
                        else:
                            i, j = cut
                            word, lo, hi = x.word[:i] + g.word[j:], i + 1, nx + j + 1

                        def fold(v: int) -> int:
                            return v if v < lo else lo if v <= hi else v - hi + lo

                        head = tuple(fold(v) for v in x.sigma)
                        if dest is None:
                            beta = beta_p + (b,)
                            dest = entries.setdefault(beta, {})
                            seen = keys.setdefault(beta, set())
                        for v in usable:
                            key = (word, g.target, head + (fold(v + nx),))
                            if key not in seen:
                                seen.add(key)
                                dest[Witness(*key)] = (x, Witness(g.word, g.target, (v,)))
        bound = ord_size(k) * n_ord1
        assert work <= bound, "pair work exceeded Ord(k) x Ord(1)"
        pair_work.append(work)
        pair_bound.append(bound)

    stats = {
        "short_words": universe,
        "ord1": n_ord1,
        "pair_work": pair_work,
        "pair_bound": pair_bound,
        "entries": sum(len(v) for v in entries.values()),
    }
    return ShortValidTable(s, roots, entries, stats)


# --------------------------------------------------------------------------
# answers


@dataclass(frozen=True)
class WitnessVerdict:
    answer: bool
    witness: Witness | None = None
    beta: tuple[int, ...] | None = None
    stats: dict | None = None


def lcr_witness(
    s: System, targets: Iterable[int] | None = None, tbl: ShortValidTable | None = None
) -> WitnessVerdict:
    goal = s.final_states if targets is None else frozenset(targets)
    tbl = valid_short_table(s) if tbl is None else tbl
    for beta, z in tbl.initialized():
        if z.target in goal:
            return WitnessVerdict(True, z, beta, tbl.stats)
    return WitnessVerdict(False, stats=tbl.stats)


def interfaces_from_witness_table(
    s: System, tbl: ShortValidTable, restrict_final: Iterable[int] | None = None
) -> set[Interface]:
    """Interfaces reachable along initialized valid short witnesses.

    Two sources of final memory value:

    * any first write in β, re-issued by a spare contributor at the very end;
      every state the full expression reaches can be populated;
    * the leader's own last write, if the witness ends with it; then nobody
      may write a different value afterwards, so contributors only continue
      with reads of it, and the leader may continue with reads and ε moves.
    """
    ctx = context(s)
    keep = None if restrict_final is None else frozenset(restrict_final)
    out: set[Interface] = set()
    for beta, z in tbl.initialized():
        if beta and (keep is None or z.target in keep):
            full = ctx.full_reach(z, beta)
            for d in beta:
                out.add(Interface.from_mask(full, z.target, d))
        last = z.word[-1][1] if z.word else None
        if last is None:
            continue
        ends = [q for q in sorted(ctx.tail(z.target, last)) if q != ctx.root]
        ends = [q for q in ends if keep is None or q in keep]
        if ends:
            quiet = ctx.quiet_reach(z, beta)
            for q in ends:
                out.add(Interface.from_mask(quiet, q, last))
    return out
