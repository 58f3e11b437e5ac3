"""Finite relational structures with constants.

The universe of a structure of size ``n`` is always ``range(n)``.
Structures are immutable once built; every construction returns a new one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import ParseError, SignatureError, StructureError
from .sexpr import expect_int, expect_list, expect_sym, head, read_one


@dataclass(frozen=True)
class Signature:
    relations: tuple[tuple[str, int], ...] = ()
    constants: tuple[str, ...] = ()

    def __post_init__(self):
        names = [r for r, _ in self.relations] + list(self.constants)
        if len(set(names)) != len(names):
            raise SignatureError(f"duplicate symbol names in signature: {names}")
        for name, arity in self.relations:
            if not isinstance(arity, int) or arity < 1:
                raise SignatureError(f"relation {name} has invalid arity {arity!r}")

    def arity(self, name):
        for r, k in self.relations:
            if r == name:
                return k
        raise SignatureError(f"unknown relation symbol {name!r}")

    def has_relation(self, name):
        return any(r == name for r, _ in self.relations)

    def has_constant(self, name):
        return name in self.constants

    @property
    def relation_names(self):
        return tuple(r for r, _ in self.relations)

    def with_constants(self, extra):
        return Signature(self.relations, self.constants + tuple(extra))

    def __str__(self):
        parts = [f"{r}/{k}" for r, k in self.relations] + list(self.constants)
        return "{" + ", ".join(parts) + "}"


@dataclass(frozen=True, eq=False)
class FiniteStructure:
    sig: Signature
    size: int
    rels: dict = field(default_factory=dict)
    consts: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.size
        if not isinstance(n, int) or n < 1:
            raise StructureError(f"universe size must be a positive integer, got {n!r}")
        rels = {}
        for name, arity in self.sig.relations:
            tuples = frozenset(tuple(t) for t in self.rels.get(name, ()))
            for t in tuples:
                if len(t) != arity:
                    raise StructureError(f"tuple {t} has wrong arity for {name}/{arity}")
                for x in t:
                    if not 0 <= x < n:
                        raise StructureError(f"element {x} out of range in {name}{t}")
            rels[name] = tuples
        for name in self.rels:
            if not self.sig.has_relation(name):
                raise SignatureError(f"unknown relation symbol {name!r}")
        for name in self.consts:
            if not self.sig.has_constant(name):
                raise SignatureError(f"unknown constant symbol {name!r}")
        for c in self.sig.constants:
            if c not in self.consts:
                raise StructureError(f"constant {c} is not assigned")
            if not 0 <= self.consts[c] < n:
                raise StructureError(f"constant {c} value {self.consts[c]} out of range")
        object.__setattr__(self, "rels", rels)
        object.__setattr__(self, "consts", {c: self.consts[c] for c in self.sig.constants})

    # identity is structural: same labelled tables
    def _ident(self):
        return (self.sig, self.size,
                tuple(tuple(sorted(self.rels[r])) for r in self.sig.relation_names),
                tuple(self.consts[c] for c in self.sig.constants))

    def __eq__(self, other):
        return isinstance(other, FiniteStructure) and self._ident() == other._ident()

    def __hash__(self):
        return hash(self._ident())

    def __len__(self):
        return self.size

    def __repr__(self):
        return f"<FiniteStructure {serialize_structure(self, compact=True)}>"

    @property
    def universe(self):
        return range(self.size)

    def holds(self, rel, tup):
        return tuple(tup) in self.rels[rel]

    def atom_count(self):
        return sum(len(t) for t in self.rels.values())

    def relabel(self, perm):
        """Image of the structure under the bijection ``perm`` (old -> new)."""
        perm = list(perm)
        if sorted(perm) != list(range(self.size)):
            raise StructureError("relabel needs a permutation of the universe")
        rels = {r: {tuple(perm[x] for x in t) for t in ts} for r, ts in self.rels.items()}
        consts = {c: perm[v] for c, v in self.consts.items()}
        return FiniteStructure(self.sig, self.size, rels, consts)

    def expand(self, sig):
        """Reinterpret over a larger signature; missing relations are empty."""
        for name, arity in self.sig.relations:
            if sig.arity(name) != arity:
                raise SignatureError(f"arity of {name} differs")
        for c in self.sig.constants:
            if not sig.has_constant(c):
                raise SignatureError(f"constant {c} missing from target signature")
        missing = [c for c in sig.constants if c not in self.consts]
        if missing:
            raise StructureError(f"constants {missing} are not assigned")
        return FiniteStructure(sig, self.size, dict(self.rels), dict(self.consts))

    def with_constants(self, named):
        """Add constants naming elements, e.g. for a diagram language."""
        sig = self.sig.with_constants(list(named))
        consts = dict(self.consts)
        consts.update(named)
        return FiniteStructure(sig, self.size, dict(self.rels), consts)


def singleton(sig):
    return FiniteStructure(sig, 1, {}, {c: 0 for c in sig.constants})


def _require_same_sig(a, b):
    if a.sig != b.sig:
        raise SignatureError(f"signature mismatch: {a.sig} vs {b.sig}")


# ---------------------------------------------------------------- file I/O

def parse_structure(text, sig=None):
    """Parse a ``(structure (universe n) (rel R (..)...) (const c k))`` form.

    Without ``sig`` the signature is inferred from the text (relations in
    order of appearance). With ``sig`` every symbol is checked against it and
    absent relations are empty.
    """
    form = read_one(text)
    expect_list(form, "(structure ...)")
    if head(form) != "structure":
        raise ParseError("expected (structure ...)", form.pos)
    body = form[1:]
    if not body or head(body[0]) != "universe" or len(body[0]) != 2:
        raise ParseError("expected (universe N) first", getattr(body[0], "pos", form.pos) if body else form.pos)
    n = expect_int(body[0][1], "universe size")
    if n < 1:
        raise ParseError("universe size must be at least 1", body[0][1].pos)

    rel_order, rels, consts = [], {}, {}
    for clause in body[1:]:
        expect_list(clause, "(rel ...) or (const ...)")
        kind = head(clause)
        if kind == "rel":
            if len(clause) < 2:
                raise ParseError("relation name missing", clause.pos)
            name = str(expect_sym(clause[1], "relation name"))
            if name in rels:
                raise ParseError(f"relation {name} given twice", clause.pos)
            tuples = []
            for t in clause[2:]:
                expect_list(t, "tuple")
                if not t:
                    raise ParseError("empty tuple", t.pos)
                tup = tuple(expect_int(x, "element") for x in t)
                for x, tok in zip(tup, t):
                    if not 0 <= x < n:
                        raise ParseError(f"element {x} out of range for universe {n}", tok.pos)
                tuples.append(tup)
            arities = {len(t) for t in tuples}
            if len(arities) > 1:
                raise ParseError(f"relation {name} used with several arities", clause.pos)
            if sig is not None:
                if not sig.has_relation(name):
                    raise ParseError(f"unknown relation symbol {name}", clause[1].pos)
                if arities and arities != {sig.arity(name)}:
                    raise ParseError(f"arity mismatch for {name}", clause.pos)
            elif not arities:
                raise ParseError(f"cannot infer arity of empty relation {name}", clause.pos)
            rel_order.append((name, arities.pop() if arities else sig.arity(name)))
            rels[name] = set(tuples)
            if len(rels[name]) != len(tuples):
                raise ParseError(f"duplicate tuple in relation {name}", clause.pos)
        elif kind == "const":
            if len(clause) != 3:
                raise ParseError("expected (const NAME ELEMENT)", clause.pos)
            name = str(expect_sym(clause[1], "constant name"))
            val = expect_int(clause[2], "element")
            if not 0 <= val < n:
                raise ParseError(f"element {val} out of range for universe {n}", clause[2].pos)
            if sig is not None and not sig.has_constant(name):
                raise ParseError(f"unknown constant symbol {name}", clause[1].pos)
            if name in consts:
                raise ParseError(f"constant {name} given twice", clause.pos)
            consts[name] = val
        else:
            raise ParseError(f"unexpected clause {kind!r}", clause.pos)

    if sig is None:
        sig = Signature(tuple(rel_order), tuple(consts))
    missing = [c for c in sig.constants if c not in consts]
    if missing:
        raise ParseError(f"unassigned constant(s): {', '.join(missing)}", form.pos)
    return FiniteStructure(sig, n, rels, consts)


def serialize_structure(a, compact=False):
    """Deterministic text form; empty relations are omitted."""
    parts = [f"(universe {a.size})"]
    for name in a.sig.relation_names:
        tuples = sorted(a.rels[name])
        if tuples:
            parts.append(f"(rel {name} " + " ".join("(" + " ".join(map(str, t)) + ")" for t in tuples) + ")")
    for c in a.sig.constants:
        parts.append(f"(const {c} {a.consts[c]})")
    if compact:
        return "(structure " + " ".join(parts) + ")"
    return "(structure " + "\n  ".join(parts) + ")\n"


# ------------------------------------------------------------ constructions

def induced_substructure(a, subset):
    """Restriction to ``subset``, relabelled order-preservingly to 0..k-1."""
    keep = sorted(set(subset))
    if not keep:
        raise StructureError("induced substructure of an empty subset")
    for x in keep:
        if not 0 <= x < a.size:
            raise StructureError(f"element {x} out of range")
    index = {x: i for i, x in enumerate(keep)}
    for c, v in a.consts.items():
        if v not in index:
            raise StructureError(f"constant {c} (= {v}) lies outside the subset")
    rels = {r: {tuple(index[x] for x in t) for t in ts if all(x in index for x in t)}
            for r, ts in a.rels.items()}
    consts = {c: index[v] for c, v in a.consts.items()}
    return FiniteStructure(a.sig, len(keep), rels, consts)


def disjoint_sum(a, b):
    _require_same_sig(a, b)
    if a.sig.constants:
        raise StructureError("disjoint sum is undefined when the signature has constants")
    shift = a.size
    rels = {r: set(a.rels[r]) | {tuple(x + shift for x in t) for t in b.rels[r]} for r in a.sig.relation_names}
    return FiniteStructure(a.sig, a.size + b.size, rels, {})


def product(a, b):
    """Direct product; the pair (x, y) is element ``x * |b| + y``."""
    _require_same_sig(a, b)
    m = b.size
    rels = {}
    for r, k in a.sig.relations:
        rels[r] = {tuple(x * m + y for x, y in zip(s, t)) for s in a.rels[r] for t in b.rels[r]}
    consts = {c: a.consts[c] * m + b.consts[c] for c in a.sig.constants}
    return FiniteStructure(a.sig, a.size * m, rels, consts)


# ------------------------------------------------------- isomorphism tests

def canonical_form(a):
    """Lexicographically least serialization over all relabellings.

    Exhaustive over the n! permutations; intended for n <= 9 and used as the
    reference that :func:`posmod.canon.canonical_key` is tested against.
    """
    best = None
    for perm in itertools.permutations(range(a.size)):
        enc = serialize_structure(a.relabel(perm), compact=True).encode()
        if best is None or enc < best:
            best = enc
    return best


def isomorphic(a, b):
    """A bijection ``a -> b`` (as a tuple) preserving and reflecting everything, or None."""
    from .canon import canonical_labeling

    _require_same_sig(a, b)
    if a.size != b.size or a.atom_count() != b.atom_count():
        return None
    key_a, lab_a = canonical_labeling(a)
    key_b, lab_b = canonical_labeling(b)
    if key_a != key_b:
        return None
    inv_b = [0] * b.size
    for x, i in enumerate(lab_b):
        inv_b[i] = x
    bij = tuple(inv_b[lab_a[x]] for x in range(a.size))
    if a.relabel(bij) != b:
        raise AssertionError("canonical labelling produced a non-isomorphism")
    return bij
