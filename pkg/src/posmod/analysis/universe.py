"""Model universes: every model of a theory up to a size bound, modulo isomorphism."""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field

from ..canon import canonical_key, canonical_structure_of
from ..errors import BudgetExceeded, PosmodError, PreconditionError
from ..logic.semantics import satisfies
from ..structures import parse_structure, serialize_structure
from . import finder

log = logging.getLogger(__name__)

FORMAT_VERSION = 1


@dataclass
class ModelUniverse:
    """Canonical representatives sorted by (size, canonical key).

    ``flags`` caches per-member answers, e.g. ``flags[i]["pc"] = True``.
    """

    theory: object
    bound: int
    members: list
    keys: list
    strategy: str = "auto"
    flags: list = field(default_factory=list)

    def __post_init__(self):
        if not self.flags:
            self.flags = [{} for _ in self.members]
        self._index = {k: i for i, k in enumerate(self.keys)}

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i):
        return self.members[i]

    def index_of(self, a):
        """Index of the member isomorphic to ``a``, or None."""
        if a.sig != self.theory.sig or a.size > self.bound:
            return None
        return self._index.get(canonical_key(a))

    def by_size(self, size):
        return [m for m in self.members if m.size == size]

    def flag(self, i, name):
        return self.flags[i].get(name)

    def set_flag(self, i, name, value):
        self.flags[i].setdefault(name, value)


def _collect(theory, bound, budget, jobs, strategy):
    if strategy == "auto":
        strategy = finder.choose_strategy(theory, bound)
    if strategy == "extend":
        gen = finder.enumerate_by_extension(theory, bound, budget, jobs)
    elif strategy == "search":
        gen = finder.enumerate_by_search(theory, bound, budget)
    elif strategy == "naive":
        gen = naive_models(theory, bound)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    done = []
    try:
        for _, models in gen:
            done.extend(models)
    except BudgetExceeded as e:
        partial = [canonical_structure_of(s) for _, s in done]
        raise BudgetExceeded(e.what, e.limit, partial) from None
    return strategy, done


def enumerate_models(theory, bound, budget=None, jobs=1, strategy="auto"):
    """All models of ``theory`` with at most ``bound`` elements, up to isomorphism.

    ``budget`` caps atom decisions; exceeding it raises BudgetExceeded whose
    ``partial`` holds the members of every size completed so far.
    """
    if bound < 1:
        raise PreconditionError("the size bound must be at least 1")
    used, found = _collect(theory, bound, budget, jobs, strategy)
    members = [canonical_structure_of(s) for _, s in found]
    keys = [k for k, _ in found]
    return ModelUniverse(theory, bound, members, keys, used)


def naive_models(theory, bound):
    """Generate-and-filter over every table on sizes 1..bound (for cross-checks only)."""
    import itertools

    from ..structures import FiniteStructure

    sig = theory.sig
    for n in range(1, bound + 1):
        found = {}
        cells = [(r, t) for r, k in sig.relations for t in itertools.product(range(n), repeat=k)]
        for consts in itertools.product(range(n), repeat=len(sig.constants)):
            cmap = dict(zip(sig.constants, consts))
            for bits in itertools.product((False, True), repeat=len(cells)):
                tables = {r: set() for r in sig.relation_names}
                for on, (r, t) in zip(bits, cells):
                    if on:
                        tables[r].add(t)
                s = FiniteStructure(sig, n, tables, cmap)
                if satisfies(s, theory):
                    found.setdefault(canonical_key(s), s)
        yield n, sorted(found.items())


# -------------------------------------------------------------- persistence

def save_universe(u, directory):
    os.makedirs(directory, exist_ok=True)
    names = []
    for i, m in enumerate(u.members):
        name = f"member_{i:04d}.pms"
        with open(os.path.join(directory, name), "w") as fh:
            fh.write(serialize_structure(m))
        names.append(name)
    manifest = {
        "format_version": FORMAT_VERSION,
        "theory": u.theory.name,
        "theory_hash": u.theory.digest(),
        "bound": u.bound,
        "strategy": u.strategy,
        "members": names,
        "flags": [{k: v for k, v in sorted(f.items()) if isinstance(v, bool)} for f in u.flags],
    }
    with open(os.path.join(directory, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_universe(directory, theory):
    path = os.path.join(directory, "manifest.json")
    try:
        with open(path) as fh:
            manifest = json.load(fh)
    except (OSError, ValueError) as e:
        raise PosmodError(f"cannot read universe manifest {path}: {e}") from None
    if manifest.get("format_version") != FORMAT_VERSION:
        raise PosmodError(f"unsupported universe format {manifest.get('format_version')!r}")
    if manifest.get("theory_hash") != theory.digest():
        raise PosmodError("stored universe was built for a different theory")
    members = []
    for name in manifest["members"]:
        with open(os.path.join(directory, name)) as fh:
            members.append(parse_structure(fh.read(), theory.sig))
    keys = [canonical_key(m) for m in members]
    order = [(m.size, k) for m, k in zip(members, keys)]
    if order != sorted(order) or len(set(keys)) != len(keys):
        raise PosmodError("stored universe members are not in canonical order")
    flags = manifest.get("flags") or [{} for _ in members]
    return ModelUniverse(theory, manifest["bound"], members, keys, manifest.get("strategy", "auto"),
                         [dict(f) for f in flags])
