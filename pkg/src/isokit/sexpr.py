"""Minimal s-expression reader with source positions.

Used for both the term syntax and the theory file format.  Comments run
from ``;`` to end of line.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Union


class SexprError(ValueError):
    """Malformed s-expression; ``pos`` is a 0-based character offset."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


@dataclass(frozen=True)
class Atom:
    text: str
    pos: int


@dataclass(frozen=True)
class SList:
    items: tuple
    pos: int


Sexpr = Union[Atom, SList]

_DELIMS = "();"


def _skip(text: str, i: int) -> int:
    n = len(text)
    while i < n:
        c = text[i]
        if c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c.isspace():
            i += 1
        else:
            break
    return i


def _read(text: str, i: int) -> tuple[Sexpr, int]:
    # explicit stack so deeply nested inputs do not hit the recursion limit
    stack: List[tuple[int, list]] = []
    while True:
        i = _skip(text, i)
        if i >= len(text):
            if stack:
                raise SexprError("unclosed '('", stack[-1][0])
            raise SexprError("unexpected end of input", i)
        c = text[i]
        if c == "(":
            stack.append((i, []))
            i += 1
            continue
        if c == ")":
            if not stack:
                raise SexprError("unexpected ')'", i)
            start, items = stack.pop()
            node: Sexpr = SList(tuple(items), start)
            i += 1
        else:
            start = i
            while i < len(text) and not text[i].isspace() and text[i] not in _DELIMS:
                i += 1
            node = Atom(text[start:i], start)
        if not stack:
            return node, i
        stack[-1][1].append(node)


def read_one(text: str) -> Sexpr:
    """Read exactly one expression; trailing non-comment text is an error."""
    node, i = _read(text, 0)
    i = _skip(text, i)
    if i != len(text):
        raise SexprError("trailing input after expression", i)
    return node


def read_all(text: str) -> List[Sexpr]:
    out = []
    i = _skip(text, 0)
    while i < len(text):
        node, i = _read(text, i)
        out.append(node)
        i = _skip(text, i)
    return out


def dump(node: Sexpr) -> str:
    if isinstance(node, Atom):
        return node.text
    return "(" + " ".join(dump(x) for x in node.items) + ")"
