"""Finite model finding for h-inductive theories.

Two complete strategies, both deduplicating by canonical key:

``extend``
    Grows structures one element at a time. Level k holds every structure of
    size k (up to isomorphism) satisfying the theory's universal sentences,
    those whose conclusion is quantifier-free; that class is closed under
    induced substructures, so extending each level-k representative by one
    element in all ways reaches every level-(k+1) structure. Sentences with
    existential conclusions are checked on the output only.

``search``
    Decides ground atoms one at a time with propagation over the grounded
    theory. Elements not yet mentioned by a true atom or a constant are
    interchangeable, so a decision on an atom touching them branches on
    "some atom of its orbit is true" (take the representative on the least
    fresh elements) versus "the whole orbit is false".
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

from ..canon import canonical_key
from ..errors import BudgetExceeded
from ..logic.normal import pp_normal_form
from ..logic.semantics import compile_sentence, satisfies
from ..logic.syntax import Atom, Var
from ..structures import FiniteStructure

log = logging.getLogger(__name__)


# ------------------------------------------------------------ compiled rules

@dataclass
class _Disjunct:
    nbound: int
    atoms: list      # (rel, terms)
    eqs: list        # (term, term)


@dataclass
class _Rule:
    label: str
    nuniv: int
    nvars: int
    prem: list       # (rel, terms) with terms ('v', i) | ('c', name)
    prem_eqs: list
    concl: list      # of _Disjunct; bound vars indexed from nvars
    universal: bool  # conclusion quantifier-free
    seedable: bool   # every premise variable occurs in a premise atom and the conclusion has no relation atoms


def _compile(theory):
    out = []
    for label, s in theory.axioms:
        for rule in compile_sentence(label, s):
            idx = {v: i for i, v in enumerate(rule.vars)}

            def term(t, local):
                if isinstance(t, Var):
                    return ("v", local[t.name])
                return ("c", t.name)

            prem, prem_eqs = [], []
            for a in rule.atoms:
                if isinstance(a, Atom):
                    prem.append((a.rel, tuple(term(t, idx) for t in a.args)))
                else:
                    prem_eqs.append((term(a.left, idx), term(a.right, idx)))
            concl = []
            for pp in pp_normal_form(rule.conclusion):
                local = dict(idx)
                for i, v in enumerate(pp.bound):
                    local[v] = len(rule.vars) + i
                atoms, eqs = [], []
                for a in pp.atoms:
                    if isinstance(a, Atom):
                        atoms.append((a.rel, tuple(term(t, local) for t in a.args)))
                    else:
                        eqs.append((term(a.left, local), term(a.right, local)))
                concl.append(_Disjunct(len(pp.bound), atoms, eqs))
            covered = {t[1] for _, ts in prem for t in ts if t[0] == "v"}
            universal = all(d.nbound == 0 for d in concl)
            seedable = (len(covered) == len(rule.vars) and bool(prem)
                        and all(not d.atoms for d in concl))
            out.append(_Rule(label, len(rule.universal), len(rule.vars), prem, prem_eqs, concl,
                             universal, seedable))
    return out


def _val(t, asg, consts):
    return asg[t[1]] if t[0] == "v" else consts[t[1]]


def _conclusion_holds(rule, asg, n, tables, consts):
    for d in rule.concl:
        if _disjunct_holds(d, rule.nvars, asg, n, tables, consts):
            return True
    return False


def _disjunct_holds(d, base, asg, n, tables, consts):
    if d.nbound == 0:
        return (all(_val(a, asg, consts) == _val(b, asg, consts) for a, b in d.eqs)
                and all(tuple(_val(t, asg, consts) for t in ts) in tables[r] for r, ts in d.atoms))
    ext = list(asg) + [None] * d.nbound
    for vals in itertools.product(range(n), repeat=d.nbound):
        ext[base:] = vals
        if (all(_val(a, ext, consts) == _val(b, ext, consts) for a, b in d.eqs)
                and all(tuple(_val(t, ext, consts) for t in ts) in tables[r] for r, ts in d.atoms)):
            return True
    return False


def _premise_matches(rule, n, tables, consts, seed=None):
    """Assignments satisfying the premise; ``seed=(i, tuple)`` forces atom i onto that tuple."""
    asg = [None] * rule.nvars
    atoms = list(range(len(rule.prem)))
    if seed is not None:
        i, tup = seed
        _, ts = rule.prem[i]
        for t, x in zip(ts, tup):
            if t[0] == "c":
                if consts[t[1]] != x:
                    return
            elif asg[t[1]] is None:
                asg[t[1]] = x
            elif asg[t[1]] != x:
                return
        atoms.remove(i)

    def pick(remaining):
        best, score = None, -1
        for i in remaining:
            _, ts = rule.prem[i]
            s = sum(1 for t in ts if t[0] == "c" or asg[t[1]] is not None)
            if s > score:
                best, score = i, s
        return best

    def rec(remaining):
        if not remaining:
            free = [v for v in range(rule.nvars) if asg[v] is None]
            for vals in itertools.product(range(n), repeat=len(free)):
                for v, x in zip(free, vals):
                    asg[v] = x
                if all(_val(a, asg, consts) == _val(b, asg, consts) for a, b in rule.prem_eqs):
                    yield asg
            for v in free:
                asg[v] = None
            return
        i = pick(remaining)
        rest = [j for j in remaining if j != i]
        r, ts = rule.prem[i]
        for tup in tables[r]:
            newly = []
            ok = True
            for t, x in zip(ts, tup):
                if t[0] == "c":
                    if consts[t[1]] != x:
                        ok = False
                        break
                elif asg[t[1]] is None:
                    asg[t[1]] = x
                    newly.append(t[1])
                elif asg[t[1]] != x:
                    ok = False
                    break
            if ok:
                yield from rec(rest)
            for v in newly:
                asg[v] = None

    yield from rec(atoms)


def _violated(rule, n, tables, consts, seed=None):
    for asg in _premise_matches(rule, n, tables, consts, seed):
        if not _conclusion_holds(rule, asg, n, tables, consts):
            return True
    return False


class _Budget:
    def __init__(self, limit):
        self.limit = limit
        self.used = 0

    def tick(self, k=1):
        self.used += k
        if self.limit is not None and self.used > self.limit:
            raise BudgetExceeded("atom assignments", self.limit)


# ------------------------------------------------------- strategy: extend

def _constant_layouts(consts):
    """Restricted-growth assignments of constants to 0..p-1."""
    if not consts:
        yield {}
        return

    def rec(i, cur, top):
        if i == len(consts):
            yield dict(cur)
            return
        for v in range(top + 2):
            cur[consts[i]] = v
            yield from rec(i + 1, cur, max(top, v))
        del cur[consts[i]]

    yield from rec(0, {}, -1)


def _grow(rules, size, tables, consts, new_atoms, budget):
    """DFS over ``new_atoms`` (each (rel, tuple)); yields completed tables."""
    urules = [r for r in rules if r.universal]
    quick = [r for r in urules if r.seedable]
    slow = [r for r in urules if not r.seedable]
    by_rel = {}
    for r in quick:
        for i, (rel, _) in enumerate(r.prem):
            by_rel.setdefault(rel, []).append((r, i))
    n = size

    def rec(pos):
        if pos == len(new_atoms):
            if any(_violated(r, n, tables, consts) for r in slow):
                return
            yield {k: set(v) for k, v in tables.items()}
            return
        budget.tick()
        rel, tup = new_atoms[pos]
        yield from rec(pos + 1)
        tables[rel].add(tup)
        if not any(_violated(r, n, tables, consts, (i, tup)) for r, i in by_rel.get(rel, ())):
            yield from rec(pos + 1)
        tables[rel].discard(tup)

    yield from rec(0)


def _new_atoms(sig, n, new):
    out = []
    for rel, arity in sig.relations:
        for tup in itertools.product(range(n), repeat=arity):
            if any(x in new for x in tup):
                out.append((rel, tup))
    return out


def _level_candidates(sig, rules, rep, budget):
    n = rep.size + 1
    tables = {r: set(ts) for r, ts in rep.rels.items()}
    consts = dict(rep.consts)
    out = []
    for t in _grow(rules, n, tables, consts, _new_atoms(sig, n, {n - 1}), budget):
        s = FiniteStructure(sig, n, t, consts)
        out.append((canonical_key(s), s))
    return out


def _base_candidates(sig, rules, size, layout, budget):
    tables = {r: set() for r in sig.relation_names}
    out = []
    for t in _grow(rules, size, tables, layout, _new_atoms(sig, size, set(range(size))), budget):
        s = FiniteStructure(sig, size, t, layout)
        out.append((canonical_key(s), s))
    return out


def _extend_worker(args):
    sig, rules, rep, limit = args
    return _level_candidates(sig, rules, rep, _Budget(limit))


def enumerate_by_extension(theory, bound, budget=None, jobs=1):
    """Yield ``(size, models)`` for sizes 1..bound; models sorted by canonical key."""
    sig = theory.sig
    rules = _compile(theory)
    layouts = list(_constant_layouts(list(sig.constants)))
    budget = budget if isinstance(budget, _Budget) else _Budget(budget)
    level = {}
    for k in range(1, bound + 1):
        cands = {}
        for layout in layouts:
            if (max(layout.values()) + 1 if layout else 1) == k:
                for key, s in _base_candidates(sig, rules, k, layout, budget):
                    cands.setdefault(key, s)
        reps = [level[key] for key in sorted(level)]
        if jobs > 1 and len(reps) > 1:
            from concurrent.futures import ProcessPoolExecutor

            remaining = None if budget.limit is None else budget.limit - budget.used
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_extend_worker, [(sig, rules, rep, remaining) for rep in reps]))
        else:
            results = [_level_candidates(sig, rules, rep, budget) for rep in reps]
        for res in results:
            for key, s in res:
                cands.setdefault(key, s)
        level = cands
        models = [(key, s) for key, s in sorted(cands.items()) if satisfies(s, theory)]
        log.debug("extend: size %d, %d universal-part structures, %d models", k, len(cands), len(models))
        yield k, models


# ------------------------------------------------------- strategy: search

class _Ground:
    def __init__(self, sig, rules, n, consts):
        self.n = n
        self.offset = {}
        total = 0
        for rel, arity in sig.relations:
            self.offset[rel] = (total, arity)
            total += n ** arity
        self.natoms = total
        self.sig = sig
        self.insts = []
        self.watch = [[] for _ in range(total)]
        self.conflict = False
        seen = set()
        for rule in rules:
            self._ground_rule(rule, consts, seen)
            if self.conflict:
                break
        self.atom_elems = [self.elements(a) for a in range(total)]

    def atom_id(self, rel, tup):
        off, _ = self.offset[rel]
        idx = 0
        for x in tup:
            idx = idx * self.n + x
        return off + idx

    def decode(self, a):
        for rel, (off, arity) in self.offset.items():
            if off <= a < off + self.n ** arity:
                idx = a - off
                tup = []
                for _ in range(arity):
                    tup.append(idx % self.n)
                    idx //= self.n
                return rel, tuple(reversed(tup))
        raise IndexError(a)

    def elements(self, a):
        return self.decode(a)[1]

    def _ground_rule(self, rule, consts, seen):
        n = self.n
        for asg in itertools.product(range(n), repeat=rule.nvars):
            if not all(_val(a, asg, consts) == _val(b, asg, consts) for a, b in rule.prem_eqs):
                continue
            prem = tuple(sorted({self.atom_id(r, tuple(_val(t, asg, consts) for t in ts)) for r, ts in rule.prem}))
            terms = []
            satisfied = False
            for d in rule.concl:
                for vals in itertools.product(range(n), repeat=d.nbound):
                    ext = tuple(asg) + vals
                    if not all(_val(a, ext, consts) == _val(b, ext, consts) for a, b in d.eqs):
                        continue
                    term = tuple(sorted({self.atom_id(r, tuple(_val(t, ext, consts) for t in ts))
                                         for r, ts in d.atoms}))
                    if not term:
                        satisfied = True
                        break
                    terms.append(term)
                if satisfied:
                    break
            if satisfied:
                continue
            terms = tuple(sorted(set(terms)))
            key = (prem, terms)
            if key in seen:
                continue
            seen.add(key)
            if not prem and not terms:
                self.conflict = True
                continue
            i = len(self.insts)
            self.insts.append(key)
            for a in set(prem) | {a for t in terms for a in t}:
                self.watch[a].append(i)


class _Search:
    """Propagation search over one grounding.

    Instances whose conclusion disjuncts are single atoms are clauses and use
    two watched literals (literal 2a says atom a is true, 2a+1 that it is
    false); the rest are rechecked whenever one of their atoms is decided.
    """

    def __init__(self, ground, consts, budget):
        self.g = ground
        self.val = bytearray(ground.natoms)
        self.truth = bytearray(2 * ground.natoms)
        self.trail = []
        self.touched_count = [0] * ground.n
        for v in consts.values():
            self.touched_count[v] += 1
        self.budget = budget
        self.clauses = []
        self.units = []
        self.watches = {}
        self.complex = []
        self.watch_true = [[] for _ in range(ground.natoms)]
        self.watch_false = [[] for _ in range(ground.natoms)]
        for prem, terms in ground.insts:
            if all(len(t) == 1 for t in terms):
                lits = list(dict.fromkeys([2 * a + 1 for a in prem] + [2 * t[0] for t in terms]))
                if any(x ^ 1 in lits for x in lits):
                    continue
                if len(lits) == 1:
                    self.units.append(lits[0])
                    continue
                ci = len(self.clauses)
                self.clauses.append(lits)
                self.watches.setdefault(lits[0], []).append(ci)
                self.watches.setdefault(lits[1], []).append(ci)
            else:
                ci = len(self.complex)
                self.complex.append((prem, terms))
                for a in prem:
                    self.watch_true[a].append(ci)
                for t in terms:
                    for a in t:
                        self.watch_false[a].append(ci)
        self.oblig = [i for i, c in enumerate(self.clauses) if sum(1 for x in c if not x & 1) >= 2]
        self.oblig_complex = [i for i, (p, t) in enumerate(self.complex) if len(t) >= 2]

    def lit_value(self, lit):
        return self.truth[lit]

    def assign(self, a, v, queue):
        self.val[a] = v
        self.truth[2 * a] = v
        self.truth[2 * a + 1] = 3 - v
        self.trail.append(a)
        if v == 1:
            for x in set(self.g.atom_elems[a]):
                self.touched_count[x] += 1
        queue.append(a)

    def assign_lit(self, lit, queue):
        self.assign(lit >> 1, 2 if lit & 1 else 1, queue)

    def undo(self, mark):
        while len(self.trail) > mark:
            a = self.trail.pop()
            if self.val[a] == 1:
                for x in set(self.g.atom_elems[a]):
                    self.touched_count[x] -= 1
            self.val[a] = 0
            self.truth[2 * a] = 0
            self.truth[2 * a + 1] = 0

    def check(self, i, queue):
        prem, terms = self.complex[i]
        val = self.val
        unknown = -1
        nunk = 0
        for a in prem:
            v = val[a]
            if v == 2:
                return True
            if v == 0:
                nunk += 1
                unknown = a
        live = []
        for term in terms:
            state = 1
            for a in term:
                v = val[a]
                if v == 2:
                    state = 2
                    break
                if v == 0:
                    state = 0
            if state == 1:
                return True
            if state == 0:
                live.append(term)
        if nunk == 0:
            if not live:
                return False
            if len(live) == 1:
                for a in live[0]:
                    if val[a] == 0:
                        self.assign(a, 1, queue)
        elif nunk == 1 and not live:
            self.assign(unknown, 2, queue)
        return True

    def _visit_clauses(self, false_lit, queue):
        ws = self.watches.get(false_lit)
        if not ws:
            return True
        truth = self.truth
        clauses = self.clauses
        watches = self.watches
        j = 0
        n = len(ws)
        i = 0
        ok = True
        while i < n:
            ci = ws[i]
            i += 1
            lits = clauses[ci]
            if lits[0] == false_lit:
                lits[0] = lits[1]
                lits[1] = false_lit
            first = truth[lits[0]]
            if first != 1:
                for k in range(2, len(lits)):
                    lk = lits[k]
                    if truth[lk] != 2:
                        lits[1] = lk
                        lits[k] = false_lit
                        w = watches.get(lk)
                        if w is None:
                            watches[lk] = [ci]
                        else:
                            w.append(ci)
                        break
                else:
                    ws[j] = ci
                    j += 1
                    if first == 2:
                        ok = False
                        while i < n:
                            ws[j] = ws[i]
                            j += 1
                            i += 1
                        break
                    self.assign_lit(lits[0], queue)
                continue
            ws[j] = ci
            j += 1
        del ws[j:]
        return ok

    def propagate(self, queue):
        while queue:
            a = queue.pop()
            if self.val[a] == 1:
                if not self._visit_clauses(2 * a + 1, queue):
                    return False
                for i in self.watch_true[a]:
                    if not self.check(i, queue):
                        return False
            else:
                if not self._visit_clauses(2 * a, queue):
                    return False
                for i in self.watch_false[a]:
                    if not self.check(i, queue):
                        return False
        return True

    def initial(self):
        queue = []
        for lit in self.units:
            v = self.lit_value(lit)
            if v == 2:
                return False
            if v == 0:
                self.assign_lit(lit, queue)
        for i in range(len(self.complex)):
            if not self.check(i, queue):
                return False
        if not self.propagate(queue):
            return False
        # clauses whose watched literals were decided before watching began
        for lits in self.clauses:
            vals = [self.lit_value(x) for x in lits]
            if 1 in vals:
                continue
            open_ = [x for x, v in zip(lits, vals) if v == 0]
            if not open_:
                return False
            if len(open_) == 1:
                self.assign_lit(open_[0], queue)
                if not self.propagate(queue):
                    return False
        return True

    def choose(self):
        val = self.val
        best, best_live = None, None
        for ci in self.oblig:
            lits = self.clauses[ci]
            live = []
            skip = False
            for x in lits:
                v = self.lit_value(x)
                if v == 1 or (x & 1 and v == 0):
                    skip = True
                    break
                if not x & 1 and v == 0:
                    live.append(x >> 1)
            if skip or len(live) < 2:
                continue
            if best is None or len(live) < best_live:
                best, best_live = live[0], len(live)
                if best_live == 2:
                    return best
        for i in self.oblig_complex:
            prem, terms = self.complex[i]
            if any(val[a] != 1 for a in prem):
                continue
            live = []
            done = False
            for term in terms:
                st = 1
                for a in term:
                    if val[a] == 2:
                        st = 2
                        break
                    if val[a] == 0:
                        st = 0
                if st == 1:
                    done = True
                    break
                if st == 0:
                    live.append(term)
            if done or len(live) < 2:
                continue
            if best is None or len(live) < best_live:
                best, best_live = next(a for a in live[0] if val[a] == 0), len(live)
        if best is not None:
            return best
        fresh_best, pick = None, None
        for a in range(self.g.natoms):
            if val[a] == 0:
                k = sum(1 for x in set(self.g.atom_elems[a]) if self.touched_count[x] == 0)
                if fresh_best is None or k < fresh_best:
                    fresh_best, pick = k, a
                    if k == 0:
                        break
        return pick

    def orbit(self, a):
        """Canonical representative of ``a`` and its orbit under permutations of fresh elements."""
        rel, tup = self.g.decode(a)
        fresh = [x for x in range(self.g.n) if self.touched_count[x] == 0]
        mine = list(dict.fromkeys(x for x in tup if self.touched_count[x] == 0))
        if not mine:
            return a, [a]
        rep_map = dict(zip(mine, fresh))
        rep = self.g.atom_id(rel, tuple(rep_map.get(x, x) for x in tup))
        orbit = []
        for image in itertools.permutations(fresh, len(mine)):
            m = dict(zip(mine, image))
            orbit.append(self.g.atom_id(rel, tuple(m.get(x, x) for x in tup)))
        return rep, orbit

    def run(self):
        if not self.initial():
            return
        yield from self._rec()

    def _rec(self):
        a = self.choose()
        if a is None:
            yield bytes(self.val)
            return
        rep, orbit = self.orbit(a)
        mark = len(self.trail)
        self.budget.tick()
        queue = []
        self.assign(rep, 1, queue)
        if self.propagate(queue):
            yield from self._rec()
        self.undo(mark)
        self.budget.tick()
        queue = []
        for b in orbit:
            if self.val[b] == 0:
                self.assign(b, 2, queue)
            elif self.val[b] == 1:
                raise AssertionError("orbit member already true")
        if self.propagate(queue):
            yield from self._rec()
        self.undo(mark)


def enumerate_by_search(theory, bound, budget=None):
    """Yield ``(size, models)`` for sizes 1..bound; models sorted by canonical key."""
    sig = theory.sig
    rules = sorted(_compile(theory), key=lambda r: r.nvars)
    budget = budget if isinstance(budget, _Budget) else _Budget(budget)
    for n in range(1, bound + 1):
        found = {}
        for layout in _constant_layouts(list(sig.constants)):
            if layout and max(layout.values()) >= n:
                continue
            ground = _Ground(sig, rules, n, layout)
            if ground.conflict:
                continue
            search = _Search(ground, layout, budget)
            for vals in search.run():
                tables = {r: set() for r in sig.relation_names}
                for a, v in enumerate(vals):
                    if v == 1:
                        rel, tup = ground.decode(a)
                        tables[rel].add(tup)
                s = FiniteStructure(sig, n, tables, layout)
                key = canonical_key(s)
                if key in found:
                    continue
                if not satisfies(s, theory):
                    raise AssertionError("search produced a non-model")
                found[key] = s
        log.debug("search: size %d, %d models", n, len(found))
        yield n, sorted(found.items())


def grounding_size(theory, n):
    rules = _compile(theory)
    return max((n ** r.nvars for r in rules), default=0)


def choose_strategy(theory, bound):
    rules = _compile(theory)
    if all(r.universal for r in rules):
        return "extend"
    if grounding_size(theory, bound) <= 2_000_000:
        return "search"
    return "extend"
