"""Class-level checks over a model universe: pc and h-maximal members,
continuations, amalgamation and the joint continuation property.

Every verdict quantifies over the members of the universe only and carries
its bound; failures carry the homomorphisms that witness them.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import NotAModel, PreconditionError
from ..logic.semantics import satisfies
from ..morphisms import (Homomorphism, first_homomorphism, is_embedding, is_immersion, iter_maps,
                         retraction)
from ..structures import FiniteStructure, induced_substructure
from ..verdict import Kind, Verdict, fails, holds


@dataclass(frozen=True)
class HomFailure:
    """A homomorphism into a member that is not an immersion (resp. embedding)."""

    member: int
    hom: Homomorphism
    reason: object

    def describe(self):
        return f"hom into member #{self.member}: {self.reason.describe()}"


@dataclass(frozen=True)
class Continuation:
    member: int
    hom: Homomorphism


@dataclass(frozen=True)
class AmalgamFailure:
    left: int
    right: int
    f: Homomorphism
    g: Homomorphism

    def describe(self):
        return f"no member continues both member #{self.left} and member #{self.right} over the base"


@dataclass(frozen=True)
class Amalgam:
    member: int
    g: Homomorphism
    j: Homomorphism


@dataclass(frozen=True)
class JointFailure:
    left: int
    right: int

    def describe(self):
        return f"members #{self.left} and #{self.right} have no common continuation"


def _require_model(a, u):
    v = satisfies(a, u.theory)
    if not v:
        raise NotAModel(v)


def _homs(a, b):
    for m in iter_maps(a, b):
        yield Homomorphism(a, b, m)


# ------------------------------------------------------------------ pc

def _first_non_immersion(a, u, certificate=True):
    for i, b in enumerate(u.members):
        for f in _homs(a, b):
            if retraction(f) is None:
                if not certificate:
                    return HomFailure(i, f, None)
                v = is_immersion(f)
                return HomFailure(i, f, v.witness)
    return None


def is_pc(a, u):
    """Every homomorphism from ``a`` into a member is an immersion."""
    _require_model(a, u)
    bad = _first_non_immersion(a, u)
    return holds(u.bound) if bad is None else fails(bad, u.bound)


def is_core(a):
    """No homomorphism into a proper induced substructure (equivalently, every
    endomorphism is a bijection)."""
    fixed = set(a.consts.values())
    for v in range(a.size):
        if v in fixed or a.size == 1:
            continue
        keep = [x for x in range(a.size) if x != v]
        if first_homomorphism(a, induced_substructure(a, keep)) is not None:
            return False
    return True


def pc_members(u, jobs=1):
    """Members flagged pc, in universe order. A non-core member has a non-injective
    endomorphism, which is never an immersion, so only cores are searched."""
    _fill_flags(u, "pc", _pc_flag, jobs)
    return [m for i, m in enumerate(u.members) if u.flag(i, "pc")]


def pc_indices(u, jobs=1):
    _fill_flags(u, "pc", _pc_flag, jobs)
    return [i for i in range(len(u.members)) if u.flag(i, "pc")]


def hmax_indices(u, jobs=1):
    _fill_flags(u, "hmax", _hmax_flag, jobs)
    return [i for i in range(len(u.members)) if u.flag(i, "hmax")]


def _pc_flag(args):
    a, u = args
    return is_core(a) and _first_non_immersion(a, u, certificate=False) is None


def _hmax_flag(args):
    a, u = args
    return is_core(a) and _first_non_embedding(a, u) is None


def _fill_flags(u, name, fn, jobs):
    todo = [i for i in range(len(u.members)) if u.flag(i, name) is None]
    if jobs > 1 and len(todo) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(fn, [(u.members[i], _light(u)) for i in todo], chunksize=4))
    else:
        results = [fn((u.members[i], u)) for i in todo]
    for i, r in zip(todo, results):
        u.set_flag(i, name, r)


def _light(u):
    from .universe import ModelUniverse

    return ModelUniverse(u.theory, u.bound, u.members, u.keys, u.strategy, [{} for _ in u.members])


# ------------------------------------------------------------- h-maximal

def _first_non_embedding(a, u):
    for i, b in enumerate(u.members):
        for f in _homs(a, b):
            v = is_embedding(f)
            if not v:
                return HomFailure(i, f, v.witness)
    return None


def is_h_maximal(a, u):
    """Every homomorphism from ``a`` into a member is an embedding."""
    _require_model(a, u)
    bad = _first_non_embedding(a, u)
    return holds(u.bound) if bad is None else fails(bad, u.bound)


def h_maximal_members(u, jobs=1):
    _fill_flags(u, "hmax", _hmax_flag, jobs)
    return [m for i, m in enumerate(u.members) if u.flag(i, "hmax")]


# ---------------------------------------------------------- continuation

def pc_continuation(a, u):
    """First pc member receiving a homomorphism from ``a``, with the least such map."""
    _require_model(a, u)
    pc_members(u)
    for i, b in enumerate(u.members):
        if not u.flag(i, "pc"):
            continue
        h = first_homomorphism(a, b)
        if h is not None:
            return holds(u.bound, Continuation(i, h))
    return Verdict(Kind.NOT_FOUND_WITHIN, u.bound)


# ---------------------------------------------------------- amalgamation

def glue(b, c, pairs):
    """Disjoint union of ``b`` and ``c`` with each pair (x in b, y in c) and
    every constant identified. Returns the glued structure and the two maps."""
    if b.sig != c.sig:
        raise PreconditionError("signature mismatch")
    n = b.size + c.size
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry)] = min(rx, ry)

    for x, y in pairs:
        union(x, b.size + y)
    for k in b.sig.constants:
        union(b.consts[k], b.size + c.consts[k])
    roots = sorted({find(x) for x in range(n)})
    index = {r: i for i, r in enumerate(roots)}
    fb = tuple(index[find(x)] for x in range(b.size))
    fc = tuple(index[find(b.size + y)] for y in range(c.size))
    rels = {}
    for r in b.sig.relation_names:
        rels[r] = {tuple(fb[x] for x in t) for t in b.rels[r]} | {tuple(fc[x] for x in t) for t in c.rels[r]}
    consts = {k: fb[b.consts[k]] for k in b.sig.constants}
    p = FiniteStructure(b.sig, len(roots), rels, consts)
    return p, Homomorphism(b, p, fb), Homomorphism(c, p, fc)


def _continues(p, u):
    """Index of the first member receiving a homomorphism from ``p``, or None."""
    for i, d in enumerate(u.members):
        if first_homomorphism(p, d) is not None:
            return i
    return None


def is_amalgamation_basis(a, u):
    """Every pair of homomorphisms from ``a`` into members closes to a commuting
    square in some member (checked through the pushout)."""
    outs = [(i, f) for i, b in enumerate(u.members) for f in _homs(a, b)]
    seen = {}
    for x, (i, f) in enumerate(outs):
        for j, g in outs[x:]:
            p, _, _ = glue(f.target, g.target, list(zip(f.map, g.map)))
            key = (p.size, frozenset((r, frozenset(t)) for r, t in p.rels.items()), tuple(sorted(p.consts.items())))
            ok = seen.get(key)
            if ok is None:
                ok = _continues(p, u) is not None
                seen[key] = ok
            if not ok:
                return fails(AmalgamFailure(i, j, f, g), u.bound)
    return holds(u.bound)


def asymmetric_amalgam(a, b, c, i, f, u):
    """A member D with g: b -> D and an immersion j: c -> D such that g∘i = j∘f."""
    if i.source != a or i.target != b or f.source != a or f.target != c:
        raise PreconditionError("maps do not match the given structures")
    if not is_immersion(i, certificate=False):
        raise PreconditionError("the first map is not an immersion")
    for k, d in enumerate(u.members):
        for j in _homs(c, d):
            if retraction(j) is None:
                continue
            pins = {}
            ok = True
            for x in range(a.size):
                y = j.map[f.map[x]]
                if pins.setdefault(i.map[x], y) != y:
                    ok = False
                    break
            if not ok:
                continue
            g = first_homomorphism(b, d, pins)
            if g is not None:
                return holds(u.bound, Amalgam(k, g, j))
    return Verdict(Kind.NOT_FOUND_WITHIN, u.bound)


# ---------------------------------------------------------- completeness

def is_complete(u):
    """Joint continuation property: every two members map into a common member."""
    n = len(u.members)
    # shortcut: a member receiving every member settles every pair
    for d in u.members:
        if all(first_homomorphism(b, d) is not None for b in u.members):
            return holds(u.bound)
    for x in range(n):
        for y in range(x + 1, n):
            p, _, _ = glue(u.members[x], u.members[y], [])
            if _continues(p, u) is None:
                return fails(JointFailure(x, y), u.bound)
    return holds(u.bound)
