"""Verification of leader/contributor shared-memory systems."""

from .model import (
    Automaton,
    Interface,
    MemOp,
    ModelError,
    OpKind,
    System,
    parse_system,
    serialize_system,
)

__all__ = [
    "Automaton",
    "Interface",
    "MemOp",
    "ModelError",
    "OpKind",
    "System",
    "parse_system",
    "serialize_system",
]

__version__ = "0.1.0"
