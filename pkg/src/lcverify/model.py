"""Leader/contributor systems and the ``.lcs`` text format.

States and symbols are dense integer indices; names are kept in side tables
so that callers can print results the way the model file spelled them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import IntEnum
from functools import cached_property
from typing import Iterable, Iterator


class OpKind(IntEnum):
    WRITE = 0
    READ = 1
    EPS = 2


@dataclass(frozen=True, order=True)
class MemOp:
    kind: OpKind
    value: int | None = None

    def __post_init__(self) -> None:
        if (self.kind == OpKind.EPS) != (self.value is None):
            raise ValueError(f"malformed operation {self.kind!r}/{self.value!r}")

    def render(self, symbols: tuple[str, ...]) -> str:
        if self.kind == OpKind.EPS:
            return "eps"
        sigil = "!" if self.kind == OpKind.WRITE else "?"
        return sigil + symbols[self.value]


EPS = MemOp(OpKind.EPS)


def write(a: int) -> MemOp:
    return MemOp(OpKind.WRITE, a)


def read(a: int) -> MemOp:
    return MemOp(OpKind.READ, a)


Transition = tuple[int, MemOp, int]


@dataclass(frozen=True)
class Automaton:
    state_count: int
    initial: int
    transitions: frozenset[Transition]
    state_names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.state_count < 1:
            raise ValueError("automaton needs at least one state")
        if not 0 <= self.initial < self.state_count:
            raise ValueError("initial state out of range")
        for src, _, dst in self.transitions:
            if not (0 <= src < self.state_count and 0 <= dst < self.state_count):
                raise ValueError(f"transition {src}->{dst} out of range")
        if not self.state_names:
            object.__setattr__(
                self, "state_names", tuple(f"s{i}" for i in range(self.state_count))
            )
        if len(self.state_names) != self.state_count:
            raise ValueError("state name table has the wrong length")

    @cached_property
    def out(self) -> tuple[tuple[tuple[MemOp, int], ...], ...]:
        """Outgoing (op, target) pairs per state, sorted."""
        table: list[list[tuple[MemOp, int]]] = [[] for _ in range(self.state_count)]
        for src, op, dst in self.transitions:
            table[src].append((op, dst))
        return tuple(tuple(sorted(row)) for row in table)

    def sorted_transitions(self) -> list[Transition]:
        return sorted(self.transitions)


@dataclass(frozen=True)
class System:
    domain_size: int
    initial_value: int
    leader: Automaton
    contributor: Automaton
    final_states: frozenset[int] = frozenset()
    symbol_names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.domain_size < 1:
            raise ValueError("domain must be nonempty")
        if not 0 <= self.initial_value < self.domain_size:
            raise ValueError("initial value out of range")
        for q in self.final_states:
            if not 0 <= q < self.leader.state_count:
                raise ValueError(f"final state {q} out of range")
        for aut in (self.leader, self.contributor):
            for _, op, _ in aut.transitions:
                if op.value is not None and not 0 <= op.value < self.domain_size:
                    raise ValueError(f"symbol {op.value} out of range")
        if not self.symbol_names:
            object.__setattr__(
                self, "symbol_names", tuple(f"d{i}" for i in range(self.domain_size))
            )
        if len(self.symbol_names) != self.domain_size:
            raise ValueError("symbol name table has the wrong length")

    @property
    def L(self) -> int:
        return self.leader.state_count

    @property
    def C(self) -> int:
        return self.contributor.state_count

    @property
    def D(self) -> int:
        return self.domain_size

    def with_final(self, final: Iterable[int]) -> "System":
        return System(
            self.domain_size,
            self.initial_value,
            self.leader,
            self.contributor,
            frozenset(final),
            self.symbol_names,
        )

    def leader_index(self, name: str) -> int:
        return _lookup(self.leader.state_names, name, "leader state")

    def contributor_index(self, name: str) -> int:
        return _lookup(self.contributor.state_names, name, "contributor state")

    def symbol_index(self, name: str) -> int:
        return _lookup(self.symbol_names, name, "symbol")


def _lookup(names: tuple[str, ...], name: str, what: str) -> int:
    try:
        return names.index(name)
    except ValueError:
        raise KeyError(f"unknown {what} '{name}'") from None


@dataclass(frozen=True)
class Interface:
    """An (S, q, a) triple: contributor support, leader state, memory value."""

    contributor_set: frozenset[int]
    leader_state: int
    memory_value: int

    def __post_init__(self) -> None:
        if not self.contributor_set:
            raise ValueError("interface needs a nonempty contributor set")

    @property
    def mask(self) -> int:
        return mask_of(self.contributor_set)

    def sort_key(self) -> tuple[int, int, int]:
        return (self.mask, self.leader_state, self.memory_value)

    @classmethod
    def from_mask(cls, mask: int, q: int, a: int) -> "Interface":
        return cls(frozenset(members(mask)), q, a)

    def check(self, s: System) -> None:
        if not all(0 <= p < s.C for p in self.contributor_set):
            raise ValueError("contributor state out of range")
        if not 0 <= self.leader_state < s.L:
            raise ValueError("leader state out of range")
        if not 0 <= self.memory_value < s.D:
            raise ValueError("memory value out of range")

    def render(self, s: System) -> str:
        cs = "+".join(s.contributor.state_names[p] for p in sorted(self.contributor_set))
        return f"{cs}:{s.leader.state_names[self.leader_state]}:{s.symbol_names[self.memory_value]}"


def mask_of(states: Iterable[int]) -> int:
    m = 0
    for p in states:
        m |= 1 << p
    return m


def members(mask: int) -> Iterator[int]:
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


def parse_interface(s: System, text: str) -> Interface:
    """Parse ``c0+c1:q0:x`` (or ``c0+c1,q0,x``) against the name tables of ``s``."""
    parts = re.split("[:,]", text)
    if len(parts) != 3 or not parts[0]:
        raise ValueError(f"interface must look like c0+c1:q0:x, got {text!r}")
    cs = frozenset(s.contributor_index(n.strip()) for n in parts[0].split("+"))
    return Interface(cs, s.leader_index(parts[1].strip()), s.symbol_index(parts[2].strip()))


# --------------------------------------------------------------------------
# text format


class ModelError(ValueError):
    """Parse or validation failure, optionally with a source position."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line is not None else ""
        super().__init__(where + message)


class ModelSyntaxError(ModelError):
    pass


class ModelSemanticError(ModelError):
    pass


_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>#[^\n]*)"
    r"|(?P<arrow>->)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<punct>[{}\[\]=,:!?])"
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ModelSyntaxError(
                f"unexpected character {text[pos]!r}", line, pos - line_start + 1
            )
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


@dataclass
class _Block:
    name: str
    tok: _Tok
    init: _Tok | None = None
    final: list[_Tok] | None = None
    states: list[_Tok] | None = None
    edges: list[tuple[_Tok, _Tok, str, _Tok | None]] = field(default_factory=list)


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, k: int = 0) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def take(self) -> _Tok:
        t = self.peek()
        self.i += 1
        return t

    def expect(self, text: str) -> _Tok:
        t = self.take()
        if t.text != text or t.kind == "eof":
            found = "end of input" if t.kind == "eof" else repr(t.text)
            raise ModelSyntaxError(f"expected {text!r}, found {found}", t.line, t.col)
        return t

    def ident(self) -> _Tok:
        t = self.take()
        if t.kind != "ident":
            found = "end of input" if t.kind == "eof" else repr(t.text)
            raise ModelSyntaxError(f"expected identifier, found {found}", t.line, t.col)
        return t

    def ident_list(self) -> list[_Tok]:
        self.expect("[")
        items: list[_Tok] = []
        if self.peek().text != "]":
            items.append(self.ident())
            while self.peek().text == ",":
                self.take()
                items.append(self.ident())
        self.expect("]")
        return items

    def document(self):
        head = self.ident()
        if head.text != "system":
            raise ModelSyntaxError("document must start with 'system'", head.line, head.col)
        self.expect("{")
        domain = init = None
        blocks: dict[str, _Block] = {}
        while self.peek().text != "}":
            key = self.ident()
            if key.text == "domain":
                if domain is not None:
                    raise ModelSemanticError("duplicate domain", key.line, key.col)
                self.expect("=")
                domain = (key, self.ident_list())
            elif key.text == "init":
                if init is not None:
                    raise ModelSemanticError("duplicate system init", key.line, key.col)
                self.expect("=")
                init = self.ident()
            elif key.text in ("leader", "contributor"):
                if key.text in blocks:
                    raise ModelSemanticError(f"duplicate {key.text} block", key.line, key.col)
                blocks[key.text] = self.block(key)
            else:
                raise ModelSyntaxError(f"unexpected {key.text!r} in system block", key.line, key.col)
        self.expect("}")
        tail = self.peek()
        if tail.kind != "eof":
            raise ModelSyntaxError(f"trailing input {tail.text!r}", tail.line, tail.col)
        return head, domain, init, blocks

    def block(self, key: _Tok) -> _Block:
        blk = _Block(key.text, key)
        self.expect("{")
        while self.peek().text != "}":
            t = self.ident()
            nxt = self.peek().text
            if nxt == "=" and t.text in ("init", "final", "states"):
                self.take()
                if t.text == "init":
                    if blk.init is not None:
                        raise ModelSemanticError(f"duplicate init in {blk.name}", t.line, t.col)
                    blk.init = self.ident()
                elif t.text == "final":
                    if blk.name != "leader":
                        raise ModelSemanticError(
                            "final is only allowed in the leader block", t.line, t.col
                        )
                    if blk.final is not None:
                        raise ModelSemanticError("duplicate final", t.line, t.col)
                    blk.final = self.ident_list()
                else:
                    if blk.states is not None:
                        raise ModelSemanticError(f"duplicate states in {blk.name}", t.line, t.col)
                    blk.states = self.ident_list()
            elif nxt == "->":
                self.take()
                dst = self.ident()
                self.expect(":")
                blk.edges.append((t, dst, *self.op()))
            else:
                n = self.peek()
                raise ModelSyntaxError(
                    f"expected '->' or '=' after {t.text!r}", n.line, n.col
                )
        self.expect("}")
        return blk

    def op(self) -> tuple[str, _Tok | None]:
        t = self.take()
        if t.text in ("!", "?"):
            return t.text, self.ident()
        if t.kind == "ident" and t.text == "eps":
            return "eps", None
        raise ModelSyntaxError(f"expected !sym, ?sym or eps, found {t.text!r}", t.line, t.col)


def _names(toks: list[_Tok], what: str) -> list[str]:
    seen: set[str] = set()
    out = []
    for t in toks:
        if t.text in seen:
            raise ModelSemanticError(f"duplicate {what} '{t.text}'", t.line, t.col)
        seen.add(t.text)
        out.append(t.text)
    return out


def _build_automaton(blk: _Block, symbols: dict[str, int]) -> Automaton:
    if blk.init is None:
        raise ModelSemanticError(f"{blk.name} missing init", blk.tok.line, blk.tok.col)
    if blk.states is not None:
        order = _names(blk.states, f"{blk.name} state")
    else:
        order = [blk.init.text]
        for src, dst, _, _ in blk.edges:
            for n in (src.text, dst.text):
                if n not in order:
                    order.append(n)
        for t in blk.final or []:
            if t.text not in order:
                order.append(t.text)
    index = {n: i for i, n in enumerate(order)}

    def state(t: _Tok) -> int:
        if t.text not in index:
            raise ModelSemanticError(f"unknown {blk.name} state '{t.text}'", t.line, t.col)
        return index[t.text]

    def symbol(t: _Tok) -> int:
        if t.text not in symbols:
            raise ModelSemanticError(f"unknown symbol '{t.text}'", t.line, t.col)
        return symbols[t.text]

    init = state(blk.init)
    trans = set()
    for src, dst, kind, sym in blk.edges:
        if kind == "eps":
            op = EPS
        else:
            op = MemOp(OpKind.WRITE if kind == "!" else OpKind.READ, symbol(sym))
        trans.add((state(src), op, state(dst)))
    return Automaton(len(order), init, frozenset(trans), tuple(order))


def parse_system(text: str) -> System:
    """Parse a model document; raises :class:`ModelError` on any problem."""
    head, domain, init, blocks = _Parser(text).document()
    if domain is None:
        raise ModelSemanticError("system missing domain", head.line, head.col)
    if not domain[1]:
        raise ModelSemanticError("empty domain", domain[0].line, domain[0].col)
    sym_names = _names(domain[1], "symbol")
    symbols = {n: i for i, n in enumerate(sym_names)}
    if init is None:
        raise ModelSemanticError("system missing init", head.line, head.col)
    if init.text not in symbols:
        raise ModelSemanticError(f"unknown symbol '{init.text}'", init.line, init.col)
    for name in ("leader", "contributor"):
        if name not in blocks:
            raise ModelSemanticError(f"missing {name} block", head.line, head.col)
    leader = _build_automaton(blocks["leader"], symbols)
    contributor = _build_automaton(blocks["contributor"], symbols)
    final = set()
    for t in blocks["leader"].final or []:
        if t.text not in leader.state_names:
            raise ModelSemanticError(f"unknown leader state '{t.text}'", t.line, t.col)
        final.add(leader.state_names.index(t.text))
    return System(
        len(sym_names), symbols[init.text], leader, contributor, frozenset(final), tuple(sym_names)
    )


def _render_block(name: str, aut: Automaton, symbols: tuple[str, ...], final=None) -> list[str]:
    n = aut.state_names
    lines = [f"  {name} {{", f"    states = [{', '.join(n)}]", f"    init = {n[aut.initial]}"]
    if final is not None:
        lines.append(f"    final = [{', '.join(n[q] for q in sorted(final))}]")
    for src, op, dst in aut.sorted_transitions():
        lines.append(f"    {n[src]} -> {n[dst]} : {op.render(symbols)}")
    lines.append("  }")
    return lines


def serialize_system(s: System) -> str:
    """Canonical document: fixed block order, explicit state lists, sorted edges."""
    lines = [
        "system {",
        f"  domain = [{', '.join(s.symbol_names)}]",
        f"  init = {s.symbol_names[s.initial_value]}",
    ]
    lines += _render_block("leader", s.leader, s.symbol_names, s.final_states)
    lines += _render_block("contributor", s.contributor, s.symbol_names)
    lines.append("}")
    return "\n".join(lines) + "\n"


def load_system(path: str) -> System:
    with open(path, encoding="utf-8") as fh:
        return parse_system(fh.read())


SYS1_TEXT = """\
system {
  domain = [x, y]
  init = x
  leader {
    init = q0
    final = [q0]
    q0 -> q1 : ?y
    q1 -> q0 : !x
  }
  contributor {
    init = c0
    c0 -> c1 : !y
    c1 -> c0 : ?x
  }
}
"""

SYS2_TEXT = """\
system {
  domain = [x, y]
  init = x
  leader {
    init = q0
    final = [q1]
    q0 -> q1 : ?y
  }
  contributor {
    init = c0
    c0 -> c0 : ?x
  }
}
"""
