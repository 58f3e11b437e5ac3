"""Fragment oracle for immersions: reflection of formulas checked by evaluation.

A homomorphism reflects every formula of a fragment (m free, v bound, k
atoms) iff it reflects

* the equality atoms among free variables and constants, and
* every conjunction of at most k relation atoms over at most m free and v
  bound variables in which every variable occurs, taken up to renaming of the
  free and of the bound variables.

Everything else in the fragment is implied: ``true``/``false`` trivially,
disjunctions by their disjuncts, an equality with a bound variable by
substituting it away, and an equality between free variables by
injectivity plus the substituted conjunction. Evaluation here is a plain
search over assignments and never calls the homomorphism engine.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

from .canon import canonical_key
from .logic.syntax import Atom, Const, Eq, Var, conj, exists
from .structures import FiniteStructure, Signature


@lru_cache(maxsize=32)
def reflection_patterns(sig, m, v, k):
    """Tuples ``(r, j, atoms)`` with atoms over term ids: free 0..r-1, bound r..r+j-1, constants after."""
    out = []
    seen = set()
    marker_sig = Signature(sig.relations + (("__free", 1),), sig.constants)
    nconst = len(sig.constants)
    for r in range(m + 1):
        for j in range(v + 1):
            nvars = r + j
            nterms = nvars + nconst
            pool = [(ri, args) for ri, (_, ar) in enumerate(sig.relations)
                    for args in itertools.product(range(nterms), repeat=ar)]
            for size in range(1, k + 1):
                for combo in itertools.combinations(pool, size):
                    used = set()
                    for _, args in combo:
                        used.update(a for a in args if a < nvars)
                    if len(used) != nvars:
                        continue
                    key = _pattern_key(marker_sig, sig, r, nvars, combo)
                    if key in seen:
                        continue
                    seen.add(key)
                    out.append((r, j, combo))
    return tuple(out)


def _pattern_key(marker_sig, sig, r, nvars, combo):
    nconst = len(sig.constants)
    size = max(nvars + nconst, 1)
    rels = {name: set() for name, _ in sig.relations}
    for ri, args in combo:
        rels[sig.relations[ri][0]].add(args)
    rels["__free"] = {(i,) for i in range(r)}
    consts = {c: nvars + i for i, c in enumerate(sig.constants)}
    # (r, nvars) in the key keeps patterns with different variable counts apart
    return (r, nvars, canonical_key(FiniteStructure(marker_sig, size, rels, consts)))


def pattern_formula(sig, r, j, combo):
    free = [f"x{i + 1}" for i in range(r)]
    bound = [f"y{i + 1}" for i in range(j)]
    names = free + bound

    def term(i):
        return Var(names[i]) if i < r + j else Const(sig.constants[i - r - j])

    atoms = [Atom(sig.relations[ri][0], tuple(term(a) for a in args)) for ri, args in combo]
    return exists(tuple(bound), conj(atoms))


def _satisfying(x, sig, r, j, combo):
    """Set of r-tuples of ``x`` at which the pattern holds."""
    nvars = r + j
    consts = [x.consts[c] for c in sig.constants]
    tables = [x.rels[name] for name, _ in sig.relations]
    checks = [[] for _ in range(max(nvars, 1))]
    ground = []
    for ri, args in combo:
        var_ids = [a for a in args if a < nvars]
        if var_ids:
            checks[max(var_ids)].append((ri, args))
        else:
            ground.append((ri, args))
    val = [0] * nvars

    def value(a):
        return val[a] if a < nvars else consts[a - nvars]

    def ok(i):
        return all(tuple(value(a) for a in args) in tables[ri] for ri, args in checks[i])

    if not all(tuple(value(a) for a in args) in tables[ri] for ri, args in ground):
        return set()

    def extend(i):
        if i == nvars:
            return True
        for e in range(x.size):
            val[i] = e
            if ok(i) and extend(i + 1):
                return True
        return False

    sat = set()

    def free_rec(i):
        if i == r:
            if extend(r):
                sat.add(tuple(val[:r]))
            return
        for e in range(x.size):
            val[i] = e
            if ok(i):
                free_rec(i + 1)

    free_rec(0)
    return sat


_TYPE_CACHE = {}


def type_vectors(x, m, v, k):
    """Per m-tuple of ``x`` (lexicographic order), a bitmask of satisfied patterns."""
    key = (x, m, v, k)
    hit = _TYPE_CACHE.get(key)
    if hit is not None:
        return hit
    pats = reflection_patterns(x.sig, m, v, k)
    tuples = list(itertools.product(range(x.size), repeat=m))
    bits = [[] for _ in tuples]
    width = x.size
    for pid, (r, j, combo) in enumerate(pats):
        sat = _satisfying(x, x.sig, r, j, combo)
        if not sat:
            continue
        for ti, t in enumerate(tuples):
            if t[:r] in sat:
                bits[ti].append(pid)
    vectors = []
    for ids in bits:
        acc = 0
        for pid in ids:
            acc |= 1 << pid
        vectors.append(acc)
    if len(_TYPE_CACHE) > 4096:
        _TYPE_CACHE.clear()
    _TYPE_CACHE[key] = vectors
    return vectors


def oracle_reflection_failure(f, frag):
    """First fragment formula and tuple witnessing non-reflection, or None."""
    from .morphisms import ImmersionFailure

    a, b = f.source, f.target
    sig = a.sig
    m, v, k = frag.m, frag.v, frag.k
    if k >= 1:
        for x in range(a.size):
            for y in range(x + 1, a.size):
                if m >= 2 and f.map[x] == f.map[y]:
                    return ImmersionFailure(Eq(Var("x1"), Var("x2")), {"x1": x, "x2": y}, "oracle")
        if m >= 1:
            for c in sig.constants:
                for x in range(a.size):
                    if f.map[x] == b.consts[c] and x != a.consts[c]:
                        return ImmersionFailure(Eq(Var("x1"), Const(c)), {"x1": x}, "oracle")
        for c, d in itertools.combinations(sig.constants, 2):
            if b.consts[c] == b.consts[d] and a.consts[c] != a.consts[d]:
                return ImmersionFailure(Eq(Const(c), Const(d)), {}, "oracle")
    ta = type_vectors(a, m, v, k)
    tb = type_vectors(b, m, v, k)
    pats = reflection_patterns(sig, m, v, k)
    nb = b.size
    for ti, t in enumerate(itertools.product(range(a.size), repeat=m)):
        img = 0
        for y in (f.map[z] for z in t):
            img = img * nb + y
        extra = tb[img] & ~ta[ti]
        if extra:
            pid = (extra & -extra).bit_length() - 1
            r, j, combo = pats[pid]
            phi = pattern_formula(sig, r, j, combo)
            return ImmersionFailure(phi, {f"x{i + 1}": t[i] for i in range(r)}, "oracle")
    return None
