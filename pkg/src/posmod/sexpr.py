"""Minimal s-expression reader with source positions.

Atoms are returned as :class:`Sym` (a ``str`` subclass carrying its
position) and lists as :class:`SList`.
"""

from __future__ import annotations

from .errors import ParseError


class Sym(str):
    pos: tuple[int, int]

    def __new__(cls, text, pos):
        obj = super().__new__(cls, text)
        obj.pos = pos
        return obj


class SList(list):
    def __init__(self, items, pos):
        super().__init__(items)
        self.pos = pos


def _tokens(text):
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line, col = line + 1, 1
            i += 1
        elif ch.isspace():
            i += 1
            col += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            yield ch, (line, col)
            i += 1
            col += 1
        else:
            start, start_col = i, col
            while i < n and not text[i].isspace() and text[i] not in "();":
                i += 1
                col += 1
            yield text[start:i], (line, start_col)


def read_all(text):
    """Parse every top-level expression in ``text``."""
    stack = [SList([], (1, 1))]
    for tok, pos in _tokens(text):
        if tok == "(":
            stack.append(SList([], pos))
        elif tok == ")":
            if len(stack) == 1:
                raise ParseError("unbalanced ')'", pos)
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(Sym(tok, pos))
    if len(stack) != 1:
        raise ParseError("unclosed '('", stack[-1].pos)
    return stack[0]


def read_one(text):
    items = read_all(text)
    if not items:
        raise ParseError("empty input", (1, 1))
    if len(items) > 1:
        raise ParseError("trailing input after expression", _pos(items[1]))
    return items[0]


def _pos(x):
    return getattr(x, "pos", None)


def expect_list(x, what):
    if not isinstance(x, SList):
        raise ParseError(f"expected {what}, got {x!r}", _pos(x))
    return x


def expect_sym(x, what):
    if not isinstance(x, Sym):
        raise ParseError(f"expected {what}, got a list", _pos(x))
    return x


def expect_int(x, what):
    expect_sym(x, what)
    try:
        return int(x)
    except ValueError:
        raise ParseError(f"expected {what}, got {x!r}", x.pos) from None


def head(x):
    """Head symbol of a list, or None."""
    if isinstance(x, SList) and x and isinstance(x[0], Sym):
        return str(x[0])
    return None
