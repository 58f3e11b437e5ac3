"""Primitive-positive normal forms and canonical structures (canonical queries)."""

from __future__ import annotations

from dataclasses import dataclass

from ..structures import FiniteStructure
from .syntax import (FALSE, TRUE, And, Atom, Const, Eq, Exists, Falsity, Or, Truth, Var, conj,
                     exists, free_vars)


@dataclass(frozen=True)
class PPFormula:
    """``exists bound (conjunction of atoms)``; an empty conjunction is true."""

    bound: tuple
    atoms: tuple

    def to_formula(self):
        return exists(self.bound, conj(self.atoms))

    def free_vars(self):
        return free_vars(self.to_formula())

    def __str__(self):
        return str(self.to_formula())


def _alpha_rename(f):
    """Give every bound variable a name distinct from all free and other bound names."""
    taken = set(free_vars(f))

    def fresh(name):
        cand, i = name, 1
        while cand in taken:
            i += 1
            cand = f"{name}_{i}"
        taken.add(cand)
        return cand

    def term(t, env):
        if isinstance(t, Var) and t.name in env:
            return Var(env[t.name])
        return t

    def walk(g, env):
        if isinstance(g, Atom):
            return Atom(g.rel, tuple(term(t, env) for t in g.args))
        if isinstance(g, Eq):
            return Eq(term(g.left, env), term(g.right, env))
        if isinstance(g, And):
            return And(tuple(walk(c, env) for c in g.children))
        if isinstance(g, Or):
            return Or(tuple(walk(c, env) for c in g.children))
        if isinstance(g, Exists):
            env2 = dict(env)
            names = []
            for v in g.vars:
                env2[v] = fresh(v)
                names.append(env2[v])
            return Exists(tuple(names), walk(g.body, env2))
        return g

    return walk(f, {})


def _nf(g):
    if isinstance(g, Truth):
        return [PPFormula((), ())]
    if isinstance(g, Falsity):
        return []
    if isinstance(g, (Atom, Eq)):
        return [PPFormula((), (g,))]
    if isinstance(g, Or):
        return [p for c in g.children for p in _nf(c)]
    if isinstance(g, And):
        acc = [PPFormula((), ())]
        for c in g.children:
            parts = _nf(c)
            acc = [PPFormula(p.bound + q.bound, p.atoms + q.atoms) for p in acc for q in parts]
        return acc
    if isinstance(g, Exists):
        return [PPFormula(tuple(g.vars) + p.bound, p.atoms) for p in _nf(g.body)]
    raise TypeError(f"not a positive formula: {g!r}")


def _tidy(p):
    used = set()
    for a in p.atoms:
        terms = a.args if isinstance(a, Atom) else (a.left, a.right)
        used.update(t.name for t in terms if isinstance(t, Var))
    atoms = tuple(dict.fromkeys(p.atoms))
    return PPFormula(tuple(v for v in p.bound if v in used), atoms)


def pp_normal_form(f):
    """Equivalent finite disjunction of pp formulas (empty list = false)."""
    return [_tidy(p) for p in _nf(_alpha_rename(f))]


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def add(self, x):
        self.parent.setdefault(x, x)

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def _key(t):
    return ("v", t.name) if isinstance(t, Var) else ("c", t.name)


def canonical_structure(pp, free, sig):
    """Canonical structure of ``pp`` with distinguished tuple for the variables ``free``.

    For every structure A over ``sig`` and tuple ā, A satisfies pp at ā iff
    some homomorphism from the returned structure to A sends the tuple to ā.
    Equalities are resolved by merging; two constants forced equal simply
    share an element.
    """
    if isinstance(pp, (Atom, Eq)):
        pp = PPFormula((), (pp,))
    uf = _UnionFind()
    order = [("v", v) for v in free] + [("v", v) for v in pp.bound]
    for a in pp.atoms:
        terms = a.args if isinstance(a, Atom) else (a.left, a.right)
        order.extend(_key(t) for t in terms)
    order.extend(("c", c) for c in sig.constants)
    order = list(dict.fromkeys(order))
    for k in order:
        uf.add(k)
    for a in pp.atoms:
        if isinstance(a, Eq):
            uf.union(_key(a.left), _key(a.right))
    index = {}
    for k in order:
        r = uf.find(k)
        if r not in index:
            index[r] = len(index)
    elem = {k: index[uf.find(k)] for k in order}
    size = max(len(index), 1)
    rels = {r: set() for r in sig.relation_names}
    for a in pp.atoms:
        if isinstance(a, Atom):
            rels[a.rel].add(tuple(elem[_key(t)] for t in a.args))
    consts = {c: elem[("c", c)] for c in sig.constants}
    return FiniteStructure(sig, size, rels, consts), tuple(elem[("v", v)] for v in free)


__all__ = ["PPFormula", "pp_normal_form", "canonical_structure", "TRUE", "FALSE"]
