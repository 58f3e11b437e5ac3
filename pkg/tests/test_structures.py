import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from posmod.canon import canonical_key, canonical_structure_of
from posmod.corpus import chain, cycle, isolated
from posmod.errors import ParseError, SignatureError, StructureError
from posmod.morphisms import Homomorphism
from posmod.structures import (FiniteStructure, Signature, canonical_form, disjoint_sum,
                               induced_substructure, isomorphic, parse_structure, product,
                               serialize_structure, singleton)

from strategies import GRAPH, POINTED, relabelled, structures


def test_parse_cycle():
    a = parse_structure("(structure (universe 3) (rel S (0 1) (1 2) (2 0)))")
    assert a == cycle(3)
    assert a.sig == GRAPH


def test_parse_singleton_with_signature():
    a = parse_structure("(structure (universe 1))", GRAPH)
    assert a.size == 1 and a.rels["S"] == frozenset()


def test_parse_out_of_range():
    with pytest.raises(ParseError, match="element 3 out of range"):
        parse_structure("(structure (universe 3) (rel S (0 3)))")


def test_parse_errors():
    with pytest.raises(ParseError):
        parse_structure("(structure (universe 2) (rel S (0 1))")
    with pytest.raises(ParseError, match="unknown relation"):
        parse_structure("(structure (universe 2) (rel T (0 1)))", GRAPH)
    with pytest.raises(ParseError, match="unassigned constant"):
        parse_structure("(structure (universe 2) (rel R (0 1)) (rel U (0)))", POINTED)
    with pytest.raises(ParseError, match="duplicate tuple"):
        parse_structure("(structure (universe 2) (rel S (0 1) (0 1)))")


def test_parse_error_position():
    with pytest.raises(ParseError) as e:
        parse_structure("(structure (universe 2)\n  (rel S (0 5)))")
    assert e.value.pos[0] == 2


def test_signature_invariants():
    with pytest.raises(SignatureError):
        Signature((("S", 2), ("S", 1)), ())
    with pytest.raises(SignatureError):
        Signature((("S", 0),), ())
    with pytest.raises(SignatureError):
        Signature((("S", 2),), ("S",))


def test_structure_invariants():
    with pytest.raises(StructureError):
        FiniteStructure(GRAPH, 2, {"S": {(0, 2)}}, {})
    with pytest.raises(StructureError):
        FiniteStructure(GRAPH, 0, {}, {})
    with pytest.raises(StructureError):
        FiniteStructure(POINTED, 2, {}, {})


def test_isomorphic_examples():
    c3 = cycle(3)
    assert isomorphic(c3, c3.relabel((1, 2, 0))) is not None
    assert isomorphic(c3, cycle(5)) is None
    assert isomorphic(isolated(2), chain(2)) is None
    with pytest.raises(SignatureError):
        isomorphic(c3, singleton(POINTED))


def test_constructions():
    s = disjoint_sum(cycle(3), cycle(3))
    assert s.size == 6 and len(s.rels["S"]) == 6
    p = product(cycle(3), cycle(5))
    # C3 x C5 is C15
    assert isomorphic(p, cycle(15)) is not None
    sub = induced_substructure(cycle(3), [0, 1])
    assert sub == chain(2)


@given(structures(POINTED))
def test_serialize_round_trip(a):
    text = serialize_structure(a)
    assert parse_structure(text, a.sig) == a


@given(relabelled())
def test_relabel_is_isomorphic(pair):
    a, perm = pair
    b = a.relabel(perm)
    bij = isomorphic(a, b)
    assert bij is not None
    assert a.relabel(bij) == b
    assert canonical_key(a) == canonical_key(b)


@settings(max_examples=150)
@given(structures(max_size=4), structures(max_size=4))
def test_canonical_key_matches_brute_force(a, b):
    same_key = canonical_key(a) == canonical_key(b)
    assert same_key == (canonical_form(a) == canonical_form(b))
    assert same_key == (isomorphic(a, b) is not None)


@given(structures(POINTED, max_size=4))
def test_canonical_structure_is_isomorphic(a):
    c = canonical_structure_of(a)
    assert isomorphic(a, c) is not None
    assert canonical_structure_of(c) == c


@given(structures(max_size=3), structures(max_size=3))
def test_product_projections_are_homs(a, b):
    p = product(a, b)
    m = b.size
    Homomorphism(p, a, tuple(x // m for x in range(p.size)))
    Homomorphism(p, b, tuple(x % m for x in range(p.size)))


@given(structures(max_size=3), structures(max_size=3))
def test_sum_injections_are_homs(a, b):
    s = disjoint_sum(a, b)
    Homomorphism(a, s, tuple(range(a.size)))
    Homomorphism(b, s, tuple(a.size + y for y in range(b.size)))


@given(structures(max_size=4), st.data())
def test_induced_substructure(a, data):
    keep = sorted(data.draw(st.sets(st.integers(0, a.size - 1), min_size=1)))
    sub = induced_substructure(a, keep)
    inc = Homomorphism(sub, a, tuple(keep))
    for t in a.rels["S"]:
        if all(x in keep for x in t):
            assert tuple(keep.index(x) for x in t) in sub.rels["S"]
    assert inc.is_injective()
