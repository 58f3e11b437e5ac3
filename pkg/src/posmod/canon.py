"""Canonical labelling by colour refinement and individualisation.

``canonical_key(a) == canonical_key(b)`` iff ``a`` and ``b`` are isomorphic.
The key is the least encoding among the leaves of the
individualisation-refinement tree; since refinement is isomorphism
invariant, isomorphic inputs explore image trees and reach the same minimum.
Subtrees that are images of explored ones under a discovered automorphism
fixing the current path are skipped.
"""

from __future__ import annotations


def _incidence(a):
    inc = [[] for _ in range(a.size)]
    for ri, name in enumerate(a.sig.relation_names):
        for t in a.rels[name]:
            for x in set(t):
                inc[x].append((ri, t))
    return inc


def _initial_colours(a):
    names = [[] for _ in range(a.size)]
    for c in a.sig.constants:
        names[a.consts[c]].append(c)
    sigs = [tuple(sorted(ns)) for ns in names]
    return _relabel(sigs)


def _relabel(sigs):
    index = {s: i for i, s in enumerate(sorted(set(sigs)))}
    return [index[s] for s in sigs]


def _refine(colours, inc):
    ncol = len(set(colours))
    while True:
        sigs = []
        for x, entries in enumerate(inc):
            nb = sorted((ri, tuple(-1 if y == x else colours[y] for y in t)) for ri, t in entries)
            sigs.append((colours[x], tuple(nb)))
        colours = _relabel(sigs)
        k = len(set(colours))
        if k == ncol:
            return colours
        ncol = k


def _encode(a, perm):
    rels = tuple(tuple(sorted(tuple(perm[x] for x in t) for t in a.rels[r])) for r in a.sig.relation_names)
    consts = tuple(perm[a.consts[c]] for c in a.sig.constants)
    return (a.size, rels, consts)


def _orbits(cands, gens, n):
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for g in gens:
        for x in range(n):
            rx, ry = find(x), find(g[x])
            if rx != ry:
                parent[max(rx, ry)] = min(rx, ry)
    return find


def canonical_labeling(a):
    """Return ``(key, labelling)`` where labelling maps old element -> canonical index."""
    inc = _incidence(a)
    n = a.size
    best = [None, None]
    seen = {}
    gens = []

    def search(colours, path):
        if len(set(colours)) == n:
            enc = _encode(a, colours)
            if best[0] is None or enc < best[0]:
                best[0], best[1] = enc, list(colours)
            prev = seen.get(enc)
            if prev is None:
                seen[enc] = list(colours)
            else:
                inv_prev = [0] * n
                for x, c in enumerate(prev):
                    inv_prev[c] = x
                gens.append([inv_prev[colours[x]] for x in range(n)])
            return
        cells = {}
        for x, c in enumerate(colours):
            cells.setdefault(c, []).append(x)
        target = min(c for c, xs in cells.items() if len(xs) > 1)
        done = []
        for x in cells[target]:
            fixing = [g for g in gens if all(g[p] == p for p in path)]
            if done and fixing:
                find = _orbits(done, fixing, n)
                if any(find(x) == find(y) for y in done):
                    continue
            done.append(x)
            ind = _relabel([(c, 0 if y == x else 1) for y, c in enumerate(colours)])
            search(_refine(ind, inc), path + [x])

    search(_refine(_initial_colours(a), inc), [])
    key = repr(best[0]).encode()
    return key, best[1]


def canonical_key(a):
    return canonical_labeling(a)[0]


def canonical_structure_of(a):
    """The canonical representative (relabelled copy) of ``a``."""
    key, lab = canonical_labeling(a)
    return a.relabel(lab)
