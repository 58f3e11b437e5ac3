"""Generators for the example theories and structures: cycle theories, pointed
abelian groups and the successor language."""

from __future__ import annotations

from .errors import PreconditionError
from .logic.syntax import parse_theory, theory_text
from .structures import FiniteStructure, Signature, disjoint_sum

GRAPH = Signature((("S", 2),), ())
GROUP = Signature((("P", 3),), ("e", "a"))
SUCC = Signature((("F", 2),), ())

_T_AXIOMS = [
    ("no-2-cycle", "(not (exists (x y) (and (S x y) (S y x))))"),
    ("in-functional", "(forall (x y z) (=> (and (S x z) (S y z)) (= x y)))"),
]


def _cycle_body(m):
    xs = [f"x{i}" for i in range(1, m + 1)]
    edges = [f"(S {xs[i]} {xs[(i + 1) % m]})" for i in range(m)]
    return xs, f"(and {' '.join(edges)})"


def no_cycle_axiom(m):
    xs, body = _cycle_body(m)
    return f"(not (exists ({' '.join(xs)}) {body}))"


def collapse_axiom(m):
    """Every closed m-walk repeats a vertex."""
    xs, body = _cycle_body(m)
    eqs = [f"(= {xs[i]} {xs[j]})" for i in range(m) for j in range(i + 1, m)]
    return f"(forall ({' '.join(xs)}) (=> {body} (or {' '.join(eqs)})))"


def _theory(name, sig_decl, axioms, header=None):
    body = "\n".join(f"  (axiom {label} {text})" for label, text in axioms)
    t = parse_theory(f"(theory {name} {sig_decl}\n{body})")
    return t, theory_text(t, header)


def cycle(p):
    return FiniteStructure(GRAPH, p, {"S": {(i, (i + 1) % p) for i in range(p)}}, {})


def chain(n):
    """Directed path on n elements."""
    return FiniteStructure(GRAPH, n, {"S": {(i, i + 1) for i in range(n - 1)}}, {})


def isolated(n):
    return FiniteStructure(GRAPH, n, {"S": set()}, {})


def cycle_samples():
    return {
        "C3": cycle(3),
        "C4": cycle(4),
        "C5": cycle(5),
        "C3+C5": disjoint_sum(cycle(3), cycle(5)),
        "chain2": chain(2),
        "two-points": isolated(2),
    }


def corpus_cycles(variant, n=None, cap=None):
    """Theory and sample structures for ``T``, ``Tprime`` or ``Tn``.

    For ``Tn`` the collapse schema is emitted for n < m <= cap; larger cycles
    cannot occur in structures of at most ``cap`` elements.
    """
    axioms = list(_T_AXIOMS)
    header = None
    if variant == "T":
        name = "T"
    elif variant in ("Tprime", "T'"):
        name = "Tprime"
        axioms.append(("no-4-cycle", no_cycle_axiom(4)))
    elif variant == "Tn":
        if n is None or n <= 3:
            raise PreconditionError("Tn needs an integer n > 3")
        if cap is None:
            raise PreconditionError("Tn needs a schema cap (the universe bound it will be used with)")
        name = f"T{n}"
        axioms.append(("no-4-cycle", no_cycle_axiom(4)))
        for m in range(n + 1, cap + 1):
            axioms.append((f"collapse-{m}", collapse_axiom(m)))
        header = (f"collapse schema instantiated for {n} < m <= {cap}; complete for structures "
                  f"with at most {cap} elements")
    else:
        raise PreconditionError(f"unknown cycle theory variant {variant!r}")
    theory, text = _theory(name, "(sig (rel S 2))", axioms, header)
    return theory, text, cycle_samples()


# ------------------------------------------------------------------ groups

_GROUP_AXIOMS = [
    ("total", "(forall (x y) (=> true (exists (z) (P x y z))))"),
    ("functional", "(forall (x y z w) (=> (and (P x y z) (P x y w)) (= z w)))"),
    ("associative", "(forall (x y z u v w) (=> (and (P x y u) (P u z w) (P y z v)) (P x v w)))"),
    ("commutative", "(forall (x y z) (=> (P x y z) (P y x z)))"),
    ("identity", "(forall (x) (=> true (P e x x)))"),
    ("inverse", "(forall (x) (=> true (exists (y) (P x y e))))"),
    ("nontrivial", "(not (= a e))"),
]


def group_theory():
    return _theory("Tag+", "(sig (rel P 3) (const e) (const a))", _GROUP_AXIOMS,
                   "abelian groups with a distinguished element a != e; P(x,y,z) iff xy = z")


def _is_prime(p):
    return p >= 2 and all(p % d for d in range(2, int(p ** 0.5) + 1))


def cyclic_group(order, g):
    return FiniteStructure(GROUP, order,
                           {"P": {(x, y, (x + y) % order) for x in range(order) for y in range(order)}},
                           {"e": 0, "a": g % order})


def corpus_group(p, k, g):
    if not _is_prime(p):
        raise PreconditionError(f"{p} is not prime")
    if k < 1:
        raise PreconditionError("exponent must be at least 1")
    order = p ** k
    if g % order == 0:
        raise PreconditionError("the distinguished element must not be the identity")
    theory, text = group_theory()
    return theory, text, cyclic_group(order, g)


# --------------------------------------------------------------- successor

def functional_cycle(p):
    return FiniteStructure(SUCC, p, {"F": {(i, (i + 1) % p) for i in range(p)}}, {})


def corpus_successor():
    axioms = [
        ("total", "(forall (x) (=> true (exists (y) (F x y))))"),
        ("functional", "(forall (x y z) (=> (and (F x y) (F x z)) (= y z)))"),
        ("no-fixed-point", "(not (exists (x) (F x x)))"),
    ]
    theory, text = _theory("Succ", "(sig (rel F 2))", axioms, "unary function f encoded as its graph F")
    return theory, text, {f"C{p}": functional_cycle(p) for p in (2, 3, 5)}
