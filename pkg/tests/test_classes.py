import pytest

from posmod.analysis import (Amalgam, AmalgamFailure, JointFailure, asymmetric_amalgam, glue,
                             h_maximal_members, hmax_indices, is_amalgamation_basis, is_complete,
                             is_core, is_h_maximal, is_pc, pc_continuation, pc_indices, pc_members)
from posmod.corpus import chain, cycle, cyclic_group, isolated
from posmod.errors import NotAModel, PreconditionError
from posmod.logic import eval_formula
from posmod.morphisms import Homomorphism, first_homomorphism, is_embedding
from posmod.structures import disjoint_sum, isomorphic
from posmod.verdict import Kind

from conftest import group_universe


def test_t4_pc_and_hmax(t4_6):
    pcs = pc_members(t4_6)
    assert len(pcs) == 1 and isomorphic(pcs[0], cycle(3)) is not None
    hm = h_maximal_members(t4_6)
    expected = [isolated(1), chain(2), cycle(3)]
    assert [t4_6.index_of(a) for a in expected] == hmax_indices(t4_6)
    assert len(hm) == 3


def test_is_pc_holds_and_fails(t4_6):
    v = is_pc(cycle(3), t4_6)
    assert v.kind is Kind.HOLDS_WITHIN and v.bound == 6
    v = is_pc(chain(2), t4_6)
    assert v.kind is Kind.FAILS
    w = v.witness
    assert str(w.reason.formula) == "(exists (y2) (S x1 y2))"
    # replay: the formula holds at the image and not in the source
    target = t4_6[w.member]
    asg = {k: w.hom.map[x] for k, x in w.reason.assignment.items()}
    assert eval_formula(target, w.reason.formula, asg)
    assert not eval_formula(chain(2), w.reason.formula, w.reason.assignment)


def test_not_a_model(t4_6):
    with pytest.raises(NotAModel, match="no-4-cycle"):
        is_pc(cycle(4), t4_6)


def test_pc_implies_hmax(t4_6, tprime_4):
    for u in (t4_6, tprime_4):
        assert set(pc_indices(u)) <= set(hmax_indices(u))


def test_two_points_not_hmax(tprime_4):
    v = is_h_maximal(isolated(2), tprime_4)
    assert v.kind is Kind.FAILS
    assert v.witness.reason.reason == "merge"
    assert not is_embedding(v.witness.hom)


def test_is_core():
    assert is_core(cycle(3))
    assert not is_core(disjoint_sum(cycle(3), cycle(3)))
    assert not is_core(isolated(2))
    assert is_core(chain(2))


def test_pc_continuation(t4_6):
    v = pc_continuation(chain(2), t4_6)
    assert v.holds
    c = v.witness
    assert isomorphic(t4_6[c.member], cycle(3)) is not None
    assert c.hom.map == (0, 2)


def test_glue_is_pushout():
    b, c = chain(2), chain(2)
    p, fb, fc = glue(b, c, [(1, 0)])
    assert isomorphic(p, chain(3)) is not None
    assert fb.map[1] == fc.map[0]


def test_amalgamation(t4_6):
    assert is_amalgamation_basis(cycle(3), t4_6).kind is Kind.HOLDS_WITHIN
    # two points sent to an edge in both directions would need a 2-cycle
    v = is_amalgamation_basis(isolated(2), t4_6)
    assert v.kind is Kind.FAILS and isinstance(v.witness, AmalgamFailure)
    w = v.witness
    p, _, _ = glue(w.f.target, w.g.target, list(zip(w.f.map, w.g.map)))
    assert all(first_homomorphism(p, d) is None for d in t4_6)


def test_asymmetric_amalgam(t4_6):
    a, b, c = isolated(1), chain(2), cycle(3)
    i = Homomorphism(a, b, (0,))
    f = Homomorphism(a, c, (0,))
    with pytest.raises(PreconditionError):
        asymmetric_amalgam(a, b, c, i, f, t4_6)
    # with an immersion on the left the amalgam exists
    i = Homomorphism(c, c, (1, 2, 0))
    f = Homomorphism(c, c, (0, 1, 2))
    v = asymmetric_amalgam(c, c, c, i, f, t4_6)
    assert v.holds and isinstance(v.witness, Amalgam)
    w = v.witness
    assert i.then(w.g).map == f.then(w.j).map


def test_completeness(t4_6):
    assert is_complete(t4_6).kind is Kind.HOLDS_WITHIN
    g = group_universe(5)
    v = is_complete(g)
    assert v.kind is Kind.FAILS and v.witness == JointFailure(0, 1)


def test_group_pc_at_bound_5():
    g = group_universe(5)
    assert [g[i].size for i in pc_indices(g)] == [3, 4, 5]
    assert is_pc(cyclic_group(4, 2), g).kind is Kind.HOLDS_WITHIN
    assert not is_pc(cyclic_group(2, 1), g)


@pytest.mark.parametrize("variant,bound,n,cap", [("Tprime", 4, None, None), ("Tn", 5, 4, 5), ("T", 4, None, None)])
def test_flags_match_exhaustive_checks(variant, bound, n, cap):
    # the flags skip non-cores; the direct checks do not
    from conftest import cycle_universe

    u = cycle_universe(variant, bound, n, cap)
    pc, hm = set(pc_indices(u)), set(hmax_indices(u))
    for i, a in enumerate(u):
        assert bool(is_pc(a, u)) == (i in pc)
        assert bool(is_h_maximal(a, u)) == (i in hm)
        if i in pc:
            assert i in hm and is_core(a)
