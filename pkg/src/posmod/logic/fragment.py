"""Finite formula fragments and quantifier-free types of tuples."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .syntax import FALSE, TRUE, Atom, Const, Eq, Var, conj, disj, exists


@dataclass(frozen=True)
class FormulaFragment:
    """Positive formulas with at most ``m`` free variables, ``v`` bound variables
    and ``k`` atoms; disjunctions (of at most ``k`` atoms in total) optional.

    ``free_names`` overrides the default free variable names ``x1..xm``.
    ``truth_constants`` toggles whether ``true``/``false`` are emitted.
    """

    m: int = 3
    v: int = 3
    k: int = 3
    disjunction: bool = False
    truth_constants: bool = True
    free_names: tuple | None = None

    def __post_init__(self):
        if min(self.m, self.v, self.k) < 0:
            raise ValueError("fragment parameters must be non-negative")
        if self.free_names is not None and len(self.free_names) != self.m:
            raise ValueError("free_names must list exactly m names")

    @property
    def free(self):
        if self.free_names is not None:
            return tuple(self.free_names)
        return tuple(f"x{i}" for i in range(1, self.m + 1))

    @property
    def bound(self):
        taken = set(self.free)
        out, i = [], 1
        while len(out) < self.v:
            name = f"y{i}"
            while name in taken:
                name = "_" + name
            out.append(name)
            i += 1
        return tuple(out)

    def with_free(self, names):
        return FormulaFragment(len(names), self.v, self.k, self.disjunction,
                               self.truth_constants, tuple(names))

    @classmethod
    def parse(cls, text):
        """``m,v,k[,or]`` as accepted on the command line."""
        parts = [p.strip() for p in text.split(",") if p.strip()]
        if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] != "or"):
            raise ValueError(f"fragment must be m,v,k[,or], got {text!r}")
        m, v, k = (int(p) for p in parts[:3])
        return cls(m, v, k, len(parts) == 4)


def _atom_pool(sig, n_free, n_bound):
    """Atom keys over term indices: free 0..f-1, bound f..f+b-1, constants after."""
    nterms = n_free + n_bound + len(sig.constants)
    pool = []
    for ri, (_, arity) in enumerate(sig.relations):
        for args in itertools.product(range(nterms), repeat=arity):
            pool.append((0, ri, args))
    for i in range(nterms):
        for j in range(i + 1, nterms):
            pool.append((1, 0, (i, j)))
    return pool


def _rename(atoms, perm, n_free, n_bound):
    out = []
    for kind, ri, args in atoms:
        args = tuple(perm[a - n_free] + n_free if n_free <= a < n_free + n_bound else a for a in args)
        if kind == 1 and args[0] > args[1]:
            args = (args[1], args[0])
        out.append((kind, ri, args))
    return tuple(sorted(out))


@lru_cache(maxsize=64)
def _pp_keys(sig, m, v, k):
    """Sorted atom-key tuples of pp formulas, one per bound-renaming class."""
    out = []
    for size in range(1, k + 1):
        for j in range(0, v + 1):
            pool = _atom_pool(sig, m, j)
            perms = list(itertools.permutations(range(j)))
            for combo in itertools.combinations(pool, size):
                used = set()
                for _, _, args in combo:
                    used.update(a for a in args if m <= a < m + j)
                if len(used) != j:
                    continue
                if j > 1 and any(_rename(combo, p, m, j) < combo for p in perms[1:]):
                    continue
                out.append((size, j, combo))
    return tuple(out)


def _build(sig, keys, free, bound, j):
    m = len(free)
    consts = sig.constants
    names = list(free) + list(bound[:j])

    def term(i):
        if i < m + j:
            return Var(names[i])
        return Const(consts[i - m - j])

    atoms = []
    for kind, ri, args in keys:
        if kind == 0:
            atoms.append(Atom(sig.relations[ri][0], tuple(term(a) for a in args)))
        else:
            atoms.append(Eq(term(args[0]), term(args[1])))
    return exists(tuple(bound[:j]), conj(atoms))


def enumerate_fragment(sig, frag):
    """Every fragment formula once (modulo bound-variable renaming), in a fixed order.

    Order: true, false, then pp formulas by (atom count, bound variables used,
    atom list), then disjunctions by (total atoms, disjunct indices).
    """
    if frag.truth_constants:
        yield TRUE
        yield FALSE
    keys = _pp_keys(sig, frag.m, frag.v, frag.k)
    free, bound = frag.free, frag.bound
    for _, j, combo in keys:
        yield _build(sig, combo, free, bound, j)
    if frag.disjunction:
        sizes = [s for s, _, _ in keys]
        for total in range(2, frag.k + 1):
            for r in range(2, total + 1):
                for idx in itertools.combinations(range(len(keys)), r):
                    if sum(sizes[i] for i in idx) != total:
                        continue
                    yield disj(_build(sig, keys[i][2], free, bound, keys[i][1]) for i in idx)


def fragment_formulas(sig, frag):
    return list(enumerate_fragment(sig, frag))


# ------------------------------------------------------------------- tpqf

def tpqf(a, tup):
    """Atomic formulas (over positions ``p1..`` and constants) true of ``tup`` in ``a``.

    Containment of quantifier-free positive types reduces to containment of
    these sets, since conjunction and disjunction are determined by atoms.
    """
    terms = [(Var(f"p{i + 1}"), x) for i, x in enumerate(tup)]
    terms += [(Const(c), a.consts[c]) for c in a.sig.constants]
    out = set()
    for name, arity in a.sig.relations:
        table = a.rels[name]
        for combo in itertools.product(terms, repeat=arity):
            if tuple(x for _, x in combo) in table:
                out.add(Atom(name, tuple(t for t, _ in combo)))
    for i, (s, x) in enumerate(terms):
        for t, y in terms[i:]:
            if x == y:
                out.add(Eq(s, t))
    return frozenset(out)
