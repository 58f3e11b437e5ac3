"""Tarskian evaluation of positive formulas and theory satisfaction."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from ..errors import PosmodError, SignatureError
from ..verdict import fails, holds
from .normal import pp_normal_form
from .syntax import And, Atom, Const, Eq, Exists, Falsity, Or, Truth, Var


class UnboundVariable(PosmodError):
    pass


def _term(a, t, asg):
    if isinstance(t, Var):
        try:
            return asg[t.name]
        except KeyError:
            raise UnboundVariable(f"free variable {t.name} has no value") from None
    try:
        return a.consts[t.name]
    except KeyError:
        raise SignatureError(f"constant {t.name} is not in the structure's signature") from None


def eval_formula(a, f, asg=None):
    """Truth of positive formula ``f`` in structure ``a`` under ``asg`` (name -> element)."""
    asg = dict(asg or {})
    return _eval(a, f, asg)


def _eval(a, f, asg):
    if isinstance(f, Atom):
        try:
            table = a.rels[f.rel]
        except KeyError:
            raise SignatureError(f"relation {f.rel} is not in the structure's signature") from None
        return tuple(_term(a, t, asg) for t in f.args) in table
    if isinstance(f, Eq):
        return _term(a, f.left, asg) == _term(a, f.right, asg)
    if isinstance(f, And):
        return all(_eval(a, c, asg) for c in f.children)
    if isinstance(f, Or):
        return any(_eval(a, c, asg) for c in f.children)
    if isinstance(f, Exists):
        saved = {v: asg[v] for v in f.vars if v in asg}
        try:
            for vals in itertools.product(range(a.size), repeat=len(f.vars)):
                asg.update(zip(f.vars, vals))
                if _eval(a, f.body, asg):
                    return True
            return False
        finally:
            for v in f.vars:
                asg.pop(v, None)
            asg.update(saved)
    if isinstance(f, Truth):
        return True
    if isinstance(f, Falsity):
        return False
    raise TypeError(f"not a positive formula: {f!r}")


# ------------------------------------------------------------ theory checks

@dataclass(frozen=True)
class Rule:
    """One premise disjunct of an h-inductive sentence, flattened to a join.

    ``vars`` lists the universal variables followed by the premise's
    existential ones; ``atoms`` is the premise conjunction.
    """

    label: str
    universal: tuple
    vars: tuple
    atoms: tuple
    conclusion: object


def compile_sentence(label, s):
    rules = []
    for pp in pp_normal_form(s.premise):
        rename = {}
        taken = set(s.vars)
        for v in pp.bound:
            new, i = v, 1
            while new in taken:
                i += 1
                new = f"{v}_{i}"
            taken.add(new)
            rename[v] = new
        atoms = tuple(_rename_atom(a, rename) for a in pp.atoms)
        rules.append(Rule(label, tuple(s.vars), tuple(s.vars) + tuple(rename[v] for v in pp.bound),
                          atoms, s.conclusion))
    return rules


def _rename_atom(a, rename):
    def t(x):
        return Var(rename[x.name]) if isinstance(x, Var) and x.name in rename else x

    if isinstance(a, Atom):
        return Atom(a.rel, tuple(t(x) for x in a.args))
    return Eq(t(a.left), t(a.right))


def iter_premise_matches(a, rule):
    """Assignments (tuples over ``rule.vars``) satisfying the premise, in lexicographic order."""
    order = {v: i for i, v in enumerate(rule.vars)}
    checks = [[] for _ in rule.vars]
    ground = []
    for at in rule.atoms:
        terms = at.args if isinstance(at, Atom) else (at.left, at.right)
        idx = [order[t.name] for t in terms if isinstance(t, Var)]
        if idx:
            checks[max(idx)].append(at)
        else:
            ground.append(at)
    asg = {}
    if not all(_eval(a, at, asg) for at in ground):
        return
    n = len(rule.vars)
    if n == 0:
        yield ()
        return
    vals = [0] * n

    def rec(i):
        name = rule.vars[i]
        for x in range(a.size):
            asg[name] = x
            vals[i] = x
            if all(_eval(a, at, asg) for at in checks[i]):
                if i + 1 == n:
                    yield tuple(vals)
                else:
                    yield from rec(i + 1)
        del asg[name]

    yield from rec(0)


@dataclass(frozen=True)
class AxiomViolation:
    label: str
    sentence: object
    assignment: dict

    def describe(self):
        asg = " ".join(f"{k}={v}" for k, v in self.assignment.items())
        return f"axiom {self.label} violated at [{asg}]"


def find_violation(a, label, s):
    """Least falsifying assignment of sentence ``s`` in ``a`` or None."""
    for rule in compile_sentence(label, s):
        cache = {}
        k = len(rule.universal)
        for vals in iter_premise_matches(a, rule):
            key = vals[:k]
            if key not in cache:
                cache[key] = _eval(a, rule.conclusion, dict(zip(rule.universal, key)))
            if not cache[key]:
                return AxiomViolation(label, s, dict(zip(rule.vars, vals)))
    return None


def satisfies(a, theory):
    if a.sig != theory.sig:
        raise SignatureError(f"signature mismatch: structure {a.sig} vs theory {theory.sig}")
    for label, s in theory.axioms:
        v = find_violation(a, label, s)
        if v is not None:
            return fails(v)
    return holds()


def sentence_holds(a, s):
    return find_violation(a, "_", s) is None
