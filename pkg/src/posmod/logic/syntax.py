"""Positive formulas, h-inductive sentences and theories: AST, parser, printer."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from ..errors import ParseError, SignatureError
from ..sexpr import SList, Sym, expect_int, expect_list, expect_sym, head, read_all, read_one
from ..structures import Signature


@dataclass(frozen=True, order=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, order=True)
class Const:
    name: str

    def __str__(self):
        return self.name


class Formula:
    """Base class of positive formula nodes."""

    __slots__ = ()

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Truth(Formula):
    pass


@dataclass(frozen=True)
class Falsity(Formula):
    pass


TRUE = Truth()
FALSE = Falsity()


@dataclass(frozen=True)
class Atom(Formula):
    rel: str
    args: tuple

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Eq(Formula):
    left: object
    right: object

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class And(Formula):
    children: tuple

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("And needs at least two children")

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Or(Formula):
    children: tuple

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("Or needs at least two children")

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Exists(Formula):
    vars: tuple
    body: Formula

    def __post_init__(self):
        if not self.vars:
            raise ValueError("Exists needs at least one variable")

    def __str__(self):
        return to_text(self)


def conj(parts):
    parts = list(parts)
    if not parts:
        return TRUE
    if len(parts) == 1:
        return parts[0]
    return And(tuple(parts))


def disj(parts):
    parts = list(parts)
    if not parts:
        return FALSE
    if len(parts) == 1:
        return parts[0]
    return Or(tuple(parts))


def exists(vars, body):
    vars = tuple(vars)
    return Exists(vars, body) if vars else body


@dataclass(frozen=True)
class HSentence:
    """``forall vars (premise -> conclusion)``; h-universal when conclusion is false."""

    vars: tuple
    premise: Formula
    conclusion: Formula

    @property
    def is_h_universal(self):
        return isinstance(self.conclusion, Falsity)

    def __str__(self):
        return sentence_text(self)


@dataclass(frozen=True)
class Theory:
    name: str
    sig: Signature
    axioms: tuple  # of (label, HSentence)

    def __post_init__(self):
        labels = [lab for lab, _ in self.axioms]
        if len(set(labels)) != len(labels):
            raise ParseError(f"duplicate axiom labels in theory {self.name}")

    def sentences(self):
        return [s for _, s in self.axioms]

    def extend(self, axioms, name=None):
        return Theory(name or self.name, self.sig, tuple(self.axioms) + tuple(axioms))

    def digest(self):
        return hashlib.sha256(theory_text(self).encode()).hexdigest()

    def __str__(self):
        return theory_text(self)


# ----------------------------------------------------------------- queries

def free_vars(f):
    """Free variable names in order of first occurrence."""
    out = []

    def walk(g, bound):
        if isinstance(g, Atom):
            terms = g.args
        elif isinstance(g, Eq):
            terms = (g.left, g.right)
        elif isinstance(g, (And, Or)):
            for c in g.children:
                walk(c, bound)
            return
        elif isinstance(g, Exists):
            walk(g.body, bound | set(g.vars))
            return
        else:
            return
        for t in terms:
            if isinstance(t, Var) and t.name not in bound and t.name not in out:
                out.append(t.name)

    walk(f, frozenset())
    return tuple(out)


def atoms_of(f):
    if isinstance(f, (Atom, Eq)):
        return [f]
    if isinstance(f, (And, Or)):
        return [a for c in f.children for a in atoms_of(c)]
    if isinstance(f, Exists):
        return atoms_of(f.body)
    return []


def is_quantifier_free(f):
    if isinstance(f, Exists):
        return False
    if isinstance(f, (And, Or)):
        return all(is_quantifier_free(c) for c in f.children)
    return True


def substitute(f, mapping):
    """Replace free variables by terms (mapping: name -> Var/Const)."""

    def term(t, bound):
        if isinstance(t, Var) and t.name not in bound and t.name in mapping:
            return mapping[t.name]
        return t

    def walk(g, bound):
        if isinstance(g, Atom):
            return Atom(g.rel, tuple(term(t, bound) for t in g.args))
        if isinstance(g, Eq):
            return Eq(term(g.left, bound), term(g.right, bound))
        if isinstance(g, And):
            return And(tuple(walk(c, bound) for c in g.children))
        if isinstance(g, Or):
            return Or(tuple(walk(c, bound) for c in g.children))
        if isinstance(g, Exists):
            return Exists(g.vars, walk(g.body, bound | set(g.vars)))
        return g

    return walk(f, frozenset())


# ----------------------------------------------------------------- printing

def term_text(t):
    return t.name


def to_text(f):
    if isinstance(f, Truth):
        return "true"
    if isinstance(f, Falsity):
        return "false"
    if isinstance(f, Atom):
        return "(" + " ".join([f.rel] + [term_text(t) for t in f.args]) + ")"
    if isinstance(f, Eq):
        return f"(= {term_text(f.left)} {term_text(f.right)})"
    if isinstance(f, And):
        return "(and " + " ".join(to_text(c) for c in f.children) + ")"
    if isinstance(f, Or):
        return "(or " + " ".join(to_text(c) for c in f.children) + ")"
    if isinstance(f, Exists):
        return f"(exists ({' '.join(f.vars)}) {to_text(f.body)})"
    raise TypeError(f"not a positive formula: {f!r}")


def sentence_text(s):
    if s.is_h_universal and not s.vars:
        return f"(not {to_text(s.premise)})"
    return f"(forall ({' '.join(s.vars)}) (=> {to_text(s.premise)} {to_text(s.conclusion)}))"


def theory_text(t, header=None):
    lines = []
    if header:
        lines.extend("; " + h for h in header.splitlines())
    decls = [f"(rel {r} {k})" for r, k in t.sig.relations] + [f"(const {c})" for c in t.sig.constants]
    lines.append(f"(theory {t.name}")
    lines.append("  (sig " + " ".join(decls) + ")")
    for label, s in t.axioms:
        lines.append(f"  (axiom {label} {sentence_text(s)})")
    lines[-1] += ")"
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------ parsing

_NEGATIVE = {"not", "forall", "=>", "->", "implies", "iff", "<=>"}


def _parse_term(x, sig, bound):
    name = str(expect_sym(x, "term"))
    if name in ("true", "false") or name in _NEGATIVE:
        raise ParseError(f"{name!r} cannot be used as a term", x.pos)
    if sig is not None and sig.has_constant(name) and name not in bound:
        return Const(name)
    if sig is not None and sig.has_relation(name):
        raise ParseError(f"relation symbol {name} used as a term", x.pos)
    return Var(name)


def _parse(x, sig, bound):
    if isinstance(x, Sym):
        if x == "true":
            return TRUE
        if x == "false":
            return FALSE
        raise ParseError(f"expected a formula, got symbol {str(x)!r}", x.pos)
    if not x:
        raise ParseError("empty formula", x.pos)
    h = head(x)
    if h is None:
        raise ParseError("formula must start with a symbol", x.pos)
    if h in _NEGATIVE:
        raise ParseError(f"positive fragment only: {h!r} is not allowed inside a formula", x.pos)
    if h in ("and", "or"):
        if len(x) < 3:
            raise ParseError(f"({h} ...) needs at least two arguments", x.pos)
        kids = tuple(_parse(c, sig, bound) for c in x[1:])
        return And(kids) if h == "and" else Or(kids)
    if h == "exists":
        if len(x) != 3:
            raise ParseError("expected (exists (VARS) BODY)", x.pos)
        vs = expect_list(x[1], "variable list")
        if not vs:
            raise ParseError("exists with no variables", vs.pos)
        names = []
        for v in vs:
            name = str(expect_sym(v, "variable"))
            if name in names:
                raise ParseError(f"variable {name} bound twice", v.pos)
            if name in bound:
                raise ParseError(f"variable {name} is already bound by an enclosing exists", v.pos)
            if sig is not None and (sig.has_constant(name) or sig.has_relation(name)):
                raise ParseError(f"{name} is a signature symbol, not a variable", v.pos)
            names.append(name)
        return Exists(tuple(names), _parse(x[2], sig, bound | set(names)))
    if h == "=":
        if len(x) != 3:
            raise ParseError("equality takes two terms", x.pos)
        return Eq(_parse_term(x[1], sig, bound), _parse_term(x[2], sig, bound))
    args = tuple(_parse_term(t, sig, bound) for t in x[1:])
    if not args:
        raise ParseError(f"atom ({h}) has no arguments", x.pos)
    if sig is not None:
        if not sig.has_relation(h):
            raise ParseError(f"unknown relation symbol {h}", x[0].pos)
        if sig.arity(h) != len(args):
            raise ParseError(f"arity mismatch: {h} expects {sig.arity(h)} arguments, got {len(args)}", x.pos)
    return Atom(h, args)


def parse_formula(text, sig=None):
    return _parse(read_one(text), sig, frozenset())


def formula_from_sexpr(x, sig=None):
    return _parse(x, sig, frozenset())


def _parse_sentence(x, sig):
    h = head(x)
    if h == "not":
        if len(x) != 2:
            raise ParseError("expected (not FORMULA)", x.pos)
        body = _parse(x[1], sig, frozenset())
        fv = free_vars(body)
        if fv:
            raise ParseError(f"sentence is not closed: free variables {', '.join(fv)}", x.pos)
        return HSentence((), body, FALSE)
    if h == "forall":
        if len(x) != 3:
            raise ParseError("expected (forall (VARS) (=> PREMISE CONCLUSION))", x.pos)
        vs = expect_list(x[1], "variable list")
        names = []
        for v in vs:
            name = str(expect_sym(v, "variable"))
            if name in names:
                raise ParseError(f"variable {name} quantified twice", v.pos)
            if sig is not None and (sig.has_constant(name) or sig.has_relation(name)):
                raise ParseError(f"{name} is a signature symbol, not a variable", v.pos)
            names.append(name)
        imp = expect_list(x[2], "(=> PREMISE CONCLUSION)")
        if head(imp) != "=>" or len(imp) != 3:
            raise ParseError("expected (=> PREMISE CONCLUSION)", imp.pos)
        prem = _parse(imp[1], sig, frozenset(names))
        concl = _parse(imp[2], sig, frozenset(names))
        loose = [v for v in free_vars(prem) + free_vars(concl) if v not in names]
        if loose:
            raise ParseError(f"sentence is not closed: free variables {', '.join(dict.fromkeys(loose))}", x.pos)
        return HSentence(tuple(names), prem, concl)
    raise ParseError("expected (forall ...) or (not ...) sentence", getattr(x, "pos", None))


def parse_sentence(text, sig=None):
    return _parse_sentence(read_one(text), sig)


def parse_signature(form):
    expect_list(form, "(sig ...)")
    if head(form) != "sig":
        raise ParseError("expected (sig ...)", form.pos)
    rels, consts = [], []
    for d in form[1:]:
        expect_list(d, "declaration")
        kind = head(d)
        if kind == "rel" and len(d) == 3:
            rels.append((str(expect_sym(d[1], "relation name")), expect_int(d[2], "arity")))
        elif kind == "const" and len(d) == 2:
            consts.append(str(expect_sym(d[1], "constant name")))
        else:
            raise ParseError("expected (rel NAME ARITY) or (const NAME)", d.pos)
    try:
        return Signature(tuple(rels), tuple(consts))
    except SignatureError as e:
        raise ParseError(str(e), form.pos) from None


def parse_theory(text):
    forms = read_all(text)
    if len(forms) != 1:
        raise ParseError("expected exactly one (theory ...) form", (1, 1))
    form = forms[0]
    expect_list(form, "(theory ...)")
    if head(form) != "theory" or len(form) < 3:
        raise ParseError("expected (theory NAME (sig ...) (axiom ...)*)", form.pos)
    name = str(expect_sym(form[1], "theory name"))
    sig = parse_signature(form[2])
    axioms = []
    for ax in form[3:]:
        expect_list(ax, "(axiom LABEL SENTENCE)")
        if head(ax) != "axiom" or len(ax) != 3:
            raise ParseError("expected (axiom LABEL SENTENCE)", ax.pos)
        label = str(expect_sym(ax[1], "axiom label"))
        if any(label == lab for lab, _ in axioms):
            raise ParseError(f"duplicate axiom label {label}", ax[1].pos)
        axioms.append((label, _parse_sentence(ax[2], sig)))
    return Theory(name, sig, tuple(axioms))
