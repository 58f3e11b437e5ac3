"""Theory-level operations relative to a model universe: fragment theories of
structures, Kaiser hulls, companions, Ctr sets, Robinson properties and
quantifier-elimination witnesses."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from enum import Enum

from ..errors import Inconclusive, PreconditionError, SignatureError
from ..logic.fragment import FormulaFragment, enumerate_fragment, tpqf
from ..logic.normal import pp_normal_form
from ..logic.syntax import (FALSE, TRUE, Atom, HSentence, Var, exists, free_vars, is_quantifier_free,
                            sentence_text)
from ..morphisms import tp_leq
from ..verdict import Kind, Verdict, fails, holds
from .classes import hmax_indices, pc_indices, pc_members
from .universe import enumerate_models


class SentenceKind(Enum):
    H_UNIVERSAL = "h-universal"
    H_INDUCTIVE = "h-inductive"


# ------------------------------------------------------------ evaluation

def sat_mask(a, f, free):
    """Bitmask over ``a.size ** len(free)`` tuples (lexicographic) satisfying ``f``."""
    m = len(free)
    n = a.size
    mask = 0
    for pp in pp_normal_form(f):
        for t in _pp_satisfying(a, pp, free):
            idx = 0
            for x in t:
                idx = idx * n + x
            mask |= 1 << idx
    return mask


def _pp_satisfying(a, pp, free):
    """Free tuples satisfying a pp formula, by a join over its atoms."""
    # bound names shadow equal free names, which then stay unconstrained
    pos = {v: i for i, v in enumerate(free)}
    for k, v in enumerate(pp.bound):
        pos[v] = len(free) + k
    nv = len(free) + len(pp.bound)
    nfree = len(free)
    checks = [[] for _ in range(max(nv, 1))]
    ground = []
    for at in pp.atoms:
        terms = at.args if isinstance(at, Atom) else (at.left, at.right)
        idx = [pos[t.name] for t in terms if isinstance(t, Var)]
        (checks[max(idx)] if idx else ground).append(at)
    val = [0] * nv

    def value(t):
        return val[pos[t.name]] if isinstance(t, Var) else a.consts[t.name]

    def ok(at):
        if isinstance(at, Atom):
            return tuple(value(t) for t in at.args) in a.rels[at.rel]
        return value(at.left) == value(at.right)

    if not all(ok(at) for at in ground):
        return
    out = []

    def bound_rec(i):
        if i == nv:
            return True
        for x in range(a.size):
            val[i] = x
            if all(ok(at) for at in checks[i]) and bound_rec(i + 1):
                return True
        return False

    def free_rec(i):
        if i == nfree:
            if bound_rec(nfree):
                out.append(tuple(val[:nfree]))
            return
        for x in range(a.size):
            val[i] = x
            if all(ok(at) for at in checks[i]):
                free_rec(i + 1)

    free_rec(0)
    yield from out


def _full(a, m):
    return (1 << (a.size ** m)) - 1


def _unrank(a, idx, m):
    out = []
    for _ in range(m):
        out.append(idx % a.size)
        idx //= a.size
    return tuple(reversed(out))


# ------------------------------------------------------------ theory_of

def _universal_sentence(phi):
    vs = free_vars(phi)
    return HSentence((), exists(tuple(vs), phi), FALSE)


def _inductive_sentence(phi, psi, order):
    used = set(free_vars(phi)) | set(free_vars(psi))
    return HSentence(tuple(v for v in order if v in used), phi, psi)


_KEYWORDS = {"not", "exists", "forall", "=>", "and", "or", "=", "true", "false"}


def _shape(s, symbols):
    """Tokens of ``s`` with variables renamed in order of first occurrence."""
    names = {}
    out = []
    for tok in re.findall(r"[()]|[^\s()]+", sentence_text(s)):
        if tok in "()" or tok in _KEYWORDS or tok in symbols:
            out.append(tok)
        else:
            out.append(names.setdefault(tok, f"v{len(names)}"))
    return tuple(out)


def _distinct(sentences, sig):
    """Drop sentences that differ from an earlier one only by variable names."""
    symbols = set(sig.relation_names) | set(sig.constants)
    seen = set()
    out = []
    for s in sentences:
        key = _shape(s, symbols)
        if key not in seen:
            seen.add(key)
            out.append(s)
    return out


def _fragment_sentences(structs, frag, kind):
    """Fragment sentences of the given shape true in every structure of ``structs``."""
    sig = structs[0].sig
    formulas = list(enumerate_fragment(sig, frag))
    free = frag.free
    masks = [[sat_mask(a, f, free) for f in formulas] for a in structs]
    out = []
    if kind is SentenceKind.H_UNIVERSAL:
        for i, f in enumerate(formulas):
            if f == FALSE:
                continue
            if all(ms[i] == 0 for ms in masks):
                out.append(_universal_sentence(f))
        return _distinct(out, sig)
    for i, phi in enumerate(formulas):
        if phi == FALSE:
            continue
        for j, psi in enumerate(formulas):
            if psi == TRUE or i == j:
                continue
            if all(ms[i] & ~ms[j] == 0 for ms in masks):
                if psi == FALSE:
                    out.append(_universal_sentence(phi))
                else:
                    out.append(_inductive_sentence(phi, psi, free))
    return _distinct(out, sig)


def _param_names(a):
    taken = set(a.sig.constants) | set(a.sig.relation_names)
    names = []
    i = 0
    while len(names) < a.size:
        name = f"c{i}"
        if name not in taken:
            names.append(name)
        i += 1
    return names


def theory_of(a, frag, kind=SentenceKind.H_INDUCTIVE, with_params=False):
    """Fragment sentences of the requested shape true in ``a``; with parameters,
    one fresh constant names each element first."""
    if with_params:
        a = a.with_constants(dict(zip(_param_names(a), range(a.size))))
    return _fragment_sentences([a], frag, kind)


def kaiser_hull(u, frag):
    """Fragment h-inductive sentences true in every pc member."""
    pcs = pc_members(u)
    if not pcs:
        raise Inconclusive(f"no pc member up to size {u.bound}")
    return _fragment_sentences(pcs, frag, SentenceKind.H_INDUCTIVE)


def universal_companion(u, frag):
    """Fragment h-universal sentences true in every pc member."""
    pcs = pc_members(u)
    if not pcs:
        raise Inconclusive(f"no pc member up to size {u.bound}")
    return _fragment_sentences(pcs, frag, SentenceKind.H_UNIVERSAL)


@dataclass(frozen=True)
class CompanionFailure:
    structure: object
    pc_in: str        # which theory has it as a pc member

    def describe(self):
        return f"pc in {self.pc_in} only"


def companion_check(t1, t2, n, budget=None, jobs=1):
    """Same pc members up to isomorphism among models of size <= n."""
    if t1.sig != t2.sig:
        raise SignatureError(f"signature mismatch: {t1.sig} vs {t2.sig}")
    u1 = enumerate_models(t1, n, budget, jobs)
    u2 = enumerate_models(t2, n, budget, jobs)
    k1 = {u1.keys[i]: u1.members[i] for i in pc_indices(u1, jobs)}
    k2 = {u2.keys[i]: u2.members[i] for i in pc_indices(u2, jobs)}
    for key in sorted(set(k1) ^ set(k2), key=lambda k: ((k1.get(k) or k2.get(k)).size, k)):
        if key in k1:
            return fails(CompanionFailure(k1[key], t1.name), n)
        return fails(CompanionFailure(k2[key], t2.name), n)
    return holds(n)


# ------------------------------------------------------------------ Ctr

@dataclass(frozen=True)
class Countermodel:
    """A member satisfying the theory together with ``exists x (phi and psi)``."""

    member: int
    structure: object
    assignment: dict

    def describe(self):
        asg = " ".join(f"{k}={v}" for k, v in self.assignment.items())
        return f"member #{self.member} at [{asg}]"


@dataclass
class CtrReport:
    formula: object
    fragment: FormulaFragment
    bound: int
    entries: list                   # (psi, Verdict)
    qf_basis: dict | None = None    # index of psi -> quantifier-free psi' or None
    complement: object = None
    complement_searched: bool = False
    notes: list = field(default_factory=list)

    def not_refuted(self):
        return [psi for psi, v in self.entries if v.kind is Kind.NOT_REFUTED_UP_TO]

    def status(self, psi):
        for p, v in self.entries:
            if p == psi:
                return v
        raise KeyError(psi)


def ctr_fragment(phi, frag):
    """The fragment with free variables named after ``phi``'s, padded to ``frag.m``."""
    free = list(free_vars(phi))
    if len(free) > frag.m:
        raise PreconditionError(f"formula has {len(free)} free variables, fragment allows {frag.m}")
    i = 1
    while len(free) < frag.m:
        name = f"x{i}"
        if name not in free:
            free.append(name)
        i += 1
    return frag.with_free(free)


class _Masks:
    """Satisfaction bitmasks per (member, formula), computed lazily."""

    def __init__(self, structs, free):
        self.structs = structs
        self.free = tuple(free)
        self.cache = {}

    def get(self, i, f):
        key = (i, f)
        hit = self.cache.get(key)
        if hit is None:
            hit = sat_mask(self.structs[i], f, self.free)
            self.cache[key] = hit
        return hit


def ctr(theory, phi, frag, n, qf_basis=False, complement=False, universe=None, budget=None, jobs=1):
    """Refutation-style Ctr: each fragment formula is REFUTED by a member
    satisfying ``exists x (phi and psi)`` or NOT_REFUTED_UP_TO(n)."""
    u = universe if universe is not None else enumerate_models(theory, n, budget, jobs)
    frag = ctr_fragment(phi, frag)
    free = frag.free
    masks = _Masks(u.members, free)
    formulas = list(enumerate_fragment(theory.sig, frag))
    entries = []
    for psi in formulas:
        witness = None
        for i, m in enumerate(u.members):
            both = masks.get(i, phi) & masks.get(i, psi)
            if both:
                low = (both & -both).bit_length() - 1
                tup = _unrank(m, low, len(free))
                witness = Countermodel(i, m, dict(zip(free, tup)))
                break
        if witness is None:
            entries.append((psi, Verdict(Kind.NOT_REFUTED_UP_TO, u.bound)))
        else:
            entries.append((psi, Verdict(Kind.REFUTED, witness=witness)))
    report = CtrReport(phi, frag, u.bound, entries)
    alive = [k for k, (_, v) in enumerate(entries) if v.kind is Kind.NOT_REFUTED_UP_TO]
    if qf_basis:
        qf = [k for k in alive if is_quantifier_free(formulas[k])]
        report.qf_basis = {}
        for k in alive:
            pick = None
            for q in qf:
                if all(masks.get(i, formulas[k]) & ~masks.get(i, formulas[q]) == 0
                       for i in range(len(u.members))):
                    pick = formulas[q]
                    break
            report.qf_basis[k] = pick
    if complement:
        report.complement_searched = True
        hm = hmax_indices(u, jobs)
        for k in alive:
            if all(masks.get(i, phi) | masks.get(i, formulas[k]) == _full(u.members[i], len(free))
                   for i in hm):
                report.complement = formulas[k]
                break
    return report


@dataclass(frozen=True)
class CharacterizationFailure:
    """A quantifier-free formula false at a tuple with every fragment formula
    true there refuted (or, for a member that should fail, the absence thereof)."""

    formula: object
    assignment: dict

    def describe(self):
        asg = " ".join(f"{k}={v}" for k, v in self.assignment.items())
        return f"{self.formula} false at [{asg}] with no unrefuted formula true there"


def ctr_characterization(a, u, frag):
    """For every quantifier-free fragment formula false at a tuple of ``a``, some
    unrefuted formula of its Ctr set holds at that tuple.

    HOLDS_WITHIN when the criterion is met; FAILS names the first (formula,
    tuple) without such a formula.
    """
    free = frag.free
    formulas = list(enumerate_fragment(u.theory.sig, frag))
    masks = _Masks(list(u.members) + [a], free)
    ai = len(u.members)
    full = _full(a, len(free))
    refuted_by = {}

    def refuted(phi, psi):
        key = (phi, psi)
        hit = refuted_by.get(key)
        if hit is None:
            hit = any(masks.get(i, phi) & masks.get(i, psi) for i in range(ai))
            refuted_by[key] = hit
        return hit

    for phi in formulas:
        if not is_quantifier_free(phi):
            continue
        false_at = full & ~masks.get(ai, phi)
        idx = 0
        while false_at:
            if false_at & 1:
                ok = any(masks.get(ai, psi) >> idx & 1 and not refuted(phi, psi) for psi in formulas)
                if not ok:
                    return fails(CharacterizationFailure(phi, dict(zip(free, _unrank(a, idx, len(free))))),
                                 u.bound)
            false_at >>= 1
            idx += 1
    return holds(u.bound)


# ------------------------------------------------------------- Robinson

class Scope(Enum):
    LOCAL = "local"
    GLOBAL = "global"


@dataclass(frozen=True)
class RobinsonFailure:
    left: int
    left_tuple: tuple
    right: int
    right_tuple: tuple
    direction: str

    def describe(self):
        return (f"tpqf{self.left_tuple} in member #{self.left} is contained in "
                f"tpqf{self.right_tuple} in member #{self.right}, but {self.direction}")


def _ordered_tuples(a, cap):
    """Tuples of length ``cap``: injective first, richer atomic type first, then lexicographic."""
    tups = list(itertools.product(range(a.size), repeat=cap))
    types = {t: tpqf(a, t) for t in tups}
    tups.sort(key=lambda t: (len(set(t)) != len(t), -len(types[t]), t))
    return tups, types


def check_robinson(u, tuple_cap, scope=Scope.GLOBAL):
    """Atomic-type containment between tuples of pc members forces equal types."""
    if tuple_cap < 1:
        raise PreconditionError("tuple cap must be at least 1")
    pc = pc_indices(u)
    if not pc:
        raise Inconclusive(f"no pc member up to size {u.bound}")
    data = {i: _ordered_tuples(u.members[i], tuple_cap) for i in pc}
    if scope is Scope.LOCAL:
        pairs = [(i, i) for i in pc]
    else:
        pairs = [(i, j) for i in pc for j in pc]
    memo = {}

    def leq(i, xs, j, ys):
        key = (i, xs, j, ys)
        hit = memo.get(key)
        if hit is None:
            hit = bool(tp_leq(u.members[i], xs, u.members[j], ys))
            memo[key] = hit
        return hit

    for i, j in pairs:
        tups_i, types_i = data[i]
        tups_j, types_j = data[j]
        for xs in tups_i:
            for ys in tups_j:
                if not types_i[xs] <= types_j[ys]:
                    continue
                if not leq(i, xs, j, ys):
                    return fails(RobinsonFailure(i, xs, j, ys, "tp(left) is not contained in tp(right)"),
                                 u.bound)
                if not leq(j, ys, i, xs):
                    return fails(RobinsonFailure(i, xs, j, ys, "tp(right) is not contained in tp(left)"),
                                 u.bound)
    return holds(u.bound)


# ------------------------------------------------------------------- QE

def qe_check(u, phi, frag):
    """First quantifier-free fragment formula agreeing with ``phi`` on every pc member."""
    pcs = pc_members(u)
    if not pcs:
        raise Inconclusive(f"no pc member up to size {u.bound}")
    free = free_vars(phi)
    qf = FormulaFragment(len(free), 0, frag.k, frag.disjunction, True, tuple(free))
    target = [sat_mask(a, phi, free) for a in pcs]
    for psi in enumerate_fragment(u.theory.sig, qf):
        if all(sat_mask(a, psi, free) == t for a, t in zip(pcs, target)):
            return psi
    return None
