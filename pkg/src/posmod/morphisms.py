"""Homomorphism search, embedding/immersion decisions, type comparison."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

from .errors import InconsistentPins, SignatureError, StructureError
from .logic.normal import PPFormula, canonical_structure
from .logic.syntax import Atom, Const, Eq, Var, conj, exists
from .verdict import fails, holds


class MorphismKind(Enum):
    HOM = "hom"
    EMBEDDING = "embedding"
    IMMERSION = "immersion"


@dataclass(frozen=True, eq=False)
class Homomorphism:
    source: object
    target: object
    map: tuple

    def __post_init__(self):
        a, b, f = self.source, self.target, tuple(self.map)
        object.__setattr__(self, "map", f)
        if a.sig != b.sig:
            raise SignatureError("homomorphism between structures of different signatures")
        if len(f) != a.size or any(not 0 <= y < b.size for y in f):
            raise StructureError(f"map {f} is not a function {a.size} -> {b.size}")
        for c in a.sig.constants:
            if f[a.consts[c]] != b.consts[c]:
                raise StructureError(f"map does not send constant {c} to {c}")
        for r, ts in a.rels.items():
            tb = b.rels[r]
            for t in ts:
                if tuple(f[x] for x in t) not in tb:
                    raise StructureError(f"map does not preserve {r}{t}")

    def __call__(self, x):
        return self.map[x]

    def __eq__(self, other):
        return (isinstance(other, Homomorphism) and self.map == other.map
                and self.source == other.source and self.target == other.target)

    def __hash__(self):
        return hash(self.map)

    def __repr__(self):
        return f"Homomorphism({serialize_map(self.map)})"

    def then(self, g):
        """Composite ``g ∘ self``."""
        return Homomorphism(self.source, g.target, tuple(g.map[y] for y in self.map))

    def is_injective(self):
        return len(set(self.map)) == len(self.map)


def serialize_map(f):
    return "(map " + " ".join(f"({x} {y})" for x, y in enumerate(f)) + ")"


def identity(a):
    return Homomorphism(a, a, tuple(range(a.size)))


# ---------------------------------------------------------------- CSP core

class _Problem:
    """Backtracking with forward checking; variables = source elements in
    index order, values ascending, so solutions come out lexicographically."""

    def __init__(self, a, b, pins, injective=False):
        if a.sig != b.sig:
            raise SignatureError(f"signature mismatch: {a.sig} vs {b.sig}")
        self.a, self.b = a, b
        self.injective = injective
        self.cons = [[] for _ in range(a.size)]
        self.index = {}
        self.dead = False
        dom = [set(range(b.size)) for _ in range(a.size)]
        fixed = dict(pins or {})
        for c in a.sig.constants:
            x, y = a.consts[c], b.consts[c]
            if fixed.get(x, y) != y:
                self.dead = True
            fixed[x] = y
        for x, y in fixed.items():
            dom[x] &= {y}
        for r, ts in a.rels.items():
            tb = sorted(b.rels[r])
            idx = {}
            for s in tb:
                for i, y in enumerate(s):
                    idx.setdefault((i, y), []).append(s)
            self.index[r] = (tb, idx)
            for t in ts:
                pattern = [[j for j in range(len(t)) if t[j] == t[i]] for i in range(len(t))]
                ok = [s for s in tb if all(s[j] == s[i] for i in range(len(t)) for j in pattern[i])]
                for i, x in enumerate(t):
                    dom[x] &= {s[i] for s in ok}
                for x in set(t):
                    self.cons[x].append((r, t))
        if any(not d for d in dom):
            self.dead = True
        self.dom = dom

    def _supports(self, r, t, asg, u):
        tb, idx = self.index[r]
        best = None
        for i, x in enumerate(t):
            if asg[x] is not None:
                cand = idx.get((i, asg[x]), ())
                if best is None or len(cand) < len(best):
                    best = cand
        if best is None:
            best = tb
        out = set()
        for s in best:
            ok = True
            val = None
            for i, x in enumerate(t):
                y = asg[x]
                if y is not None:
                    if s[i] != y:
                        ok = False
                        break
                elif x == u:
                    if val is None:
                        val = s[i]
                    elif val != s[i]:
                        ok = False
                        break
            if ok:
                out.add(val)
        return out

    def solve(self, limit=None):
        if self.dead:
            return
        n = self.a.size
        asg = [None] * n
        dom = [set(d) for d in self.dom]
        used = set()
        count = [0]

        def rec(v):
            if v == n:
                count[0] += 1
                yield tuple(asg)
                return
            for val in sorted(dom[v]):
                if self.injective and val in used:
                    continue
                asg[v] = val
                saved = []
                ok = True
                for r, t in self.cons[v]:
                    pending = {x for x in t if asg[x] is None}
                    if not pending:
                        if tuple(asg[x] for x in t) not in self.b.rels[r]:
                            ok = False
                            break
                        continue
                    for u in pending:
                        allowed = self._supports(r, t, asg, u)
                        nd = dom[u] & allowed
                        if len(nd) != len(dom[u]):
                            saved.append((u, dom[u]))
                            dom[u] = nd
                        if not nd:
                            ok = False
                            break
                    if not ok:
                        break
                if ok:
                    used.add(val)
                    yield from rec(v + 1)
                    used.discard(val)
                    if limit is not None and count[0] >= limit:
                        for u, d in reversed(saved):
                            dom[u] = d
                        asg[v] = None
                        return
                for u, d in reversed(saved):
                    dom[u] = d
                asg[v] = None

        yield from rec(0)


def _check_pins(a, b, pins):
    for x, y in pins.items():
        if not (0 <= x < a.size and 0 <= y < b.size):
            raise InconsistentPins(f"pin {x}->{y} out of range")
    for c in a.sig.constants:
        if a.consts[c] in pins and pins[a.consts[c]] != b.consts[c]:
            raise InconsistentPins(f"pin on {a.consts[c]} contradicts constant {c}")
    for r, ts in a.rels.items():
        for t in ts:
            if all(x in pins for x in t) and tuple(pins[x] for x in t) not in b.rels[r]:
                raise InconsistentPins(f"pins violate {r}{t}")


def iter_maps(a, b, pins=None, limit=None, injective=False):
    """Raw hom maps (tuples) in lexicographic order; no pin validation."""
    return _Problem(a, b, pins, injective).solve(limit)


def find_homomorphisms(a, b, pins=None, limit=None):
    """All homomorphisms ``a -> b`` agreeing with ``pins``, lexicographically sorted."""
    pins = dict(pins or {})
    if a.sig != b.sig:
        raise SignatureError(f"signature mismatch: {a.sig} vs {b.sig}")
    _check_pins(a, b, pins)
    return [Homomorphism(a, b, m) for m in iter_maps(a, b, pins, limit)]


def first_homomorphism(a, b, pins=None):
    for m in iter_maps(a, b, pins, 1):
        return Homomorphism(a, b, m)
    return None


def count_homomorphisms(a, b, pins=None):
    return sum(1 for _ in iter_maps(a, b, pins))


# ---------------------------------------------------------------- embedding

@dataclass(frozen=True)
class EmbeddingFailure:
    reason: str           # "merge" or "atom"
    elements: tuple       # merged pair, or the source tuple whose atom is not reflected
    relation: str | None = None

    def describe(self):
        if self.reason == "merge":
            x, y = self.elements
            return f"elements {x} and {y} are identified"
        return f"atom {self.relation}{self.elements} holds in the target only"


def is_embedding(f):
    seen = {}
    for x, y in enumerate(f.map):
        if y in seen:
            return fails(EmbeddingFailure("merge", (seen[y], x)))
        seen[y] = x
    a, b = f.source, f.target
    for r in a.sig.relation_names:
        ta = a.rels[r]
        for s in sorted(b.rels[r]):
            if all(y in seen for y in s):
                pre = tuple(seen[y] for y in s)
                if pre not in ta:
                    return fails(EmbeddingFailure("atom", pre, r))
    return holds()


# ---------------------------------------------------------------- immersion

@dataclass(frozen=True)
class ImmersionFailure:
    formula: object       # positive formula true of f(ā) in the target, false of ā in the source
    assignment: dict      # variable -> source element
    mode: str

    def describe(self):
        asg = " ".join(f"{k}={v}" for k, v in self.assignment.items())
        return f"{self.formula} holds at the image but not at [{asg}]"


def retraction(f):
    """A homomorphism ``g: target -> source`` with ``g ∘ f = id``, or None."""
    pins = {}
    for x, y in enumerate(f.map):
        if pins.setdefault(y, x) != x:
            return None
    return first_homomorphism(f.target, f.source, pins)


def _term_namer(f):
    a, b = f.source, f.target
    pre = {}
    for x, y in enumerate(f.map):
        pre.setdefault(y, x)
    const_at = {}
    for c in b.sig.constants:
        const_at.setdefault(b.consts[c], c)

    def term(y):
        if y in const_at:
            return Const(const_at[y])
        if y in pre:
            return Var(f"x{pre[y]}")
        return Var(f"y{y}")

    extra = []
    for y, x in pre.items():
        if y in const_at:
            extra.append(Eq(Var(f"x{x}"), Const(const_at[y])))
    for c in b.sig.constants:
        if const_at[b.consts[c]] != c:
            extra.append(Eq(Const(const_at[b.consts[c]]), Const(c)))
    return term, pre, extra


def pp_holds(a, pp, free, values):
    """Does the pp formula hold in ``a`` with ``free`` bound to ``values``? (via its canonical structure)"""
    can, tup = canonical_structure(pp, free, a.sig)
    pins = {}
    for i, v in zip(tup, values):
        if pins.setdefault(i, v) != v:
            return False
    return first_homomorphism(can, a, pins) is not None


def distinguishing_formula(f):
    """A minimal pp formula true of f(ā) in the target and false of ā in the source.

    Starts from the diagram of the target (image elements free, the rest
    existential) and drops atoms while the formula stays false in the source.
    Returns None when ``f`` is an immersion.
    """
    a, b = f.source, f.target
    if not f.is_injective():
        x = next(i for i, y in enumerate(f.map) if f.map.index(y) != i)
        x0 = f.map.index(f.map[x])
        phi = Eq(Var(f"x{x0}"), Var(f"x{x}"))
        return ImmersionFailure(phi, {f"x{x0}": x0, f"x{x}": x}, "retraction")
    term, pre, extra = _term_namer(f)
    atoms = list(extra)
    for r in b.sig.relation_names:
        for t in sorted(b.rels[r]):
            atoms.append(Atom(r, tuple(term(y) for y in t)))
    free = [f"x{x}" for x in range(a.size)]
    values = list(range(a.size))

    def false_in_source(ats):
        used = _vars(ats)
        bound = tuple(sorted((v for v in used if v.startswith("y")), key=lambda s: int(s[1:])))
        return not pp_holds(a, PPFormula(bound, tuple(ats)), free, values)

    if not false_in_source(atoms):
        return None
    i = 0
    while i < len(atoms):
        trial = atoms[:i] + atoms[i + 1:]
        if false_in_source(trial):
            atoms = trial
        else:
            i += 1
    used = _vars(atoms)
    bound = tuple(sorted((v for v in used if v.startswith("y")), key=lambda s: int(s[1:])))
    phi = exists(bound, conj(atoms))
    asg = {v: int(v[1:]) for v in free if v in used}
    return ImmersionFailure(phi, asg, "retraction")


def _vars(atoms):
    out = set()
    for at in atoms:
        terms = at.args if isinstance(at, Atom) else (at.left, at.right)
        out.update(t.name for t in terms if isinstance(t, Var))
    return out


def is_immersion(f, mode="retraction", frag=None, certificate=True):
    """Decide whether ``f`` reflects every positive formula.

    ``mode="retraction"`` is exact for finite structures: ``f`` is an
    immersion iff some homomorphism back is a left inverse. The witness of
    HOLDS is that retraction; FAILS carries a distinguishing pp formula.
    ``mode="oracle"`` checks reflection of the formulas of ``frag`` directly
    and can only miss failures that need formulas outside the fragment.
    """
    if mode == "retraction":
        g = retraction(f)
        if g is not None:
            return holds(witness=g)
        if certificate:
            return fails(distinguishing_formula(f))
        return fails(ImmersionFailure(None, {}, "retraction"))
    if mode == "oracle":
        from .oracle import oracle_reflection_failure

        bad = oracle_reflection_failure(f, frag)
        return holds() if bad is None else fails(bad)
    raise ValueError(f"unknown immersion mode {mode!r}")


# ------------------------------------------------------------------- types

@dataclass(frozen=True)
class TypeFailure:
    left: tuple
    right: tuple
    detail: str

    def describe(self):
        return f"{self.left} vs {self.right}: {self.detail}"


def tp_leq(a, xs, b, ys):
    """tp(xs in a) ⊆ tp(ys in b): a homomorphism a -> b sending xs to ys."""
    xs, ys = tuple(xs), tuple(ys)
    if len(xs) != len(ys):
        raise ValueError("tuples of different lengths")
    if a.sig != b.sig:
        raise SignatureError("signature mismatch")
    pins = {}
    for x, y in zip(xs, ys):
        if pins.setdefault(x, y) != y:
            return fails(TypeFailure(xs, ys, f"{x} would need two images"))
    h = first_homomorphism(a, b, pins)
    if h is None:
        return fails(TypeFailure(xs, ys, "no homomorphism sends the first tuple to the second"))
    return holds(witness=h)


def tpqf_leq(a, xs, b, ys):
    from .logic.fragment import tpqf

    if len(xs) != len(ys):
        raise ValueError("tuples of different lengths")
    left, right = tpqf(a, tuple(xs)), tpqf(b, tuple(ys))
    missing = sorted(str(x) for x in left - right)
    if missing:
        return fails(TypeFailure(tuple(xs), tuple(ys), "missing " + ", ".join(missing)))
    return holds()


def iter_tuples(a, length):
    return itertools.product(range(a.size), repeat=length)
