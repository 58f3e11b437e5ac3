import pytest

from posmod.analysis import (Countermodel, Scope, SentenceKind, check_robinson, companion_check, ctr,
                             ctr_characterization, enumerate_models, hmax_indices, kaiser_hull,
                             qe_check, sat_mask, theory_of, universal_companion)
from posmod.corpus import GRAPH, chain, cycle, isolated
from posmod.errors import Inconclusive, PreconditionError, SignatureError
from posmod.logic import (FormulaFragment, canonical_structure, eval_formula, parse_formula,
                          pp_normal_form, sentence_holds, to_text)
from posmod.structures import isomorphic
from posmod.verdict import Kind

from conftest import cycle_theory, cycle_universe


def f(text):
    return parse_formula(text, GRAPH)


def test_sat_mask():
    c3 = cycle(3)
    m = sat_mask(c3, f("(S x y)"), ("x", "y"))
    # tuples ranked x*3 + y: (0,1), (1,2), (2,0)
    assert m == (1 << 1) | (1 << 5) | (1 << 6)
    # a bound y shadows the free y
    assert sat_mask(c3, f("(exists (y) (S x y))"), ("x", "y")) == (1 << 9) - 1


def test_theory_of_cycle():
    sents = theory_of(cycle(3), FormulaFragment(1, 1, 1), SentenceKind.H_UNIVERSAL)
    assert [str(s) for s in sents] == ["(not (exists (x1) (S x1 x1)))"]
    sents = theory_of(cycle(3), FormulaFragment(1, 1, 1))
    assert "(forall (x1) (=> true (exists (y1) (S x1 y1))))" in [str(s) for s in sents]
    assert all(sentence_holds(cycle(3), s) for s in sents)


def test_theory_of_with_parameters():
    sents = theory_of(chain(2), FormulaFragment(0, 0, 1), SentenceKind.H_UNIVERSAL, with_params=True)
    texts = [str(s) for s in sents]
    assert "(not (S c1 c0))" in texts and "(not (S c0 c1))" not in texts


def test_kaiser_hull(t4_6):
    hull = kaiser_hull(t4_6, FormulaFragment(2, 1, 2))
    texts = [str(s) for s in hull]
    assert "(forall (x1) (=> true (exists (y1) (S x1 y1))))" in texts
    assert "(forall (x1) (=> true (exists (y1) (S y1 x1))))" in texts
    for s in hull:
        assert sentence_holds(cycle(3), s)


def test_universal_companion_contains_no_4_cycle():
    u = cycle_universe("Tprime", 5)
    sents = universal_companion(u, FormulaFragment(4, 0, 4))
    found = False
    for s in sents:
        (pp,) = pp_normal_form(s.premise)
        can, _ = canonical_structure(pp, [], GRAPH)
        if can.size == 4 and isomorphic(can, cycle(4)) is not None:
            found = True
    assert found
    assert all(sentence_holds(cycle(3), s) for s in sents)


def test_inconclusive_without_pc():
    from posmod.logic import parse_theory

    t = parse_theory("(theory Empty (sig (rel S 2)) (axiom bottom (not true)))")
    u = enumerate_models(t, 2)
    assert len(u) == 0
    with pytest.raises(Inconclusive):
        kaiser_hull(u, FormulaFragment(1, 1, 1))
    with pytest.raises(Inconclusive):
        check_robinson(u, 2)


def test_companion_check():
    v = companion_check(cycle_theory("Tn", 4, 6), cycle_theory("Tn", 4, 6), 5)
    assert v.kind is Kind.HOLDS_WITHIN
    v = companion_check(cycle_theory("T"), cycle_theory("Tprime"), 4)
    assert v.kind is Kind.FAILS and v.witness.pc_in == "T"
    assert isomorphic(v.witness.structure, cycle(4)) is not None
    from posmod.corpus import group_theory

    with pytest.raises(SignatureError):
        companion_check(cycle_theory("T"), group_theory()[0], 2)


def test_ctr_on_edges(t_5):
    phi = f("(S x y)")
    rep = ctr(cycle_theory("T"), phi, FormulaFragment(2, 1, 2), 5, universe=t_5)
    assert rep.status(f("(S y x)")).kind is Kind.NOT_REFUTED_UP_TO
    v = rep.status(f("(exists (y1) (S y y1))"))
    assert v.kind is Kind.REFUTED
    w = v.witness
    assert isinstance(w, Countermodel) and w.member == 4
    both = {"x": w.assignment["x"], "y": w.assignment["y"]}
    assert eval_formula(w.structure, phi, both)
    assert eval_formula(w.structure, f("(exists (y1) (S y y1))"), both)


def test_ctr_refutations_replay(t_5):
    phi = f("(S x y)")
    rep = ctr(cycle_theory("T"), phi, FormulaFragment(2, 1, 2), 5, universe=t_5)
    for psi, v in rep.entries:
        if v.kind is Kind.REFUTED:
            a = v.witness.structure
            assert eval_formula(a, phi, v.witness.assignment)
            assert eval_formula(a, psi, v.witness.assignment)
        else:
            assert all(sat_mask(m, phi, ("x", "y")) & sat_mask(m, psi, ("x", "y")) == 0 for m in t_5)


def test_ctr_complement_and_qf_basis(t4_6):
    rep = ctr(t4_6.theory, f("(= x y)"), FormulaFragment(2, 0, 2, True), 6, qf_basis=True,
              complement=True, universe=t4_6)
    assert to_text(rep.complement) == "(or (S x y) (S y x))"
    assert all(v is not None for v in rep.qf_basis.values())
    # the complement is exhaustive on every h-maximal member
    for i in hmax_indices(t4_6):
        a = t4_6[i]
        for x in range(a.size):
            for y in range(a.size):
                asg = {"x": x, "y": y}
                assert eval_formula(a, f("(= x y)"), asg) or eval_formula(a, rep.complement, asg)


def test_ctr_fragment_too_small(t_5):
    with pytest.raises(PreconditionError):
        ctr(cycle_theory("T"), f("(S x y)"), FormulaFragment(1, 1, 1), 5, universe=t_5)


def test_characterization(t4_5):
    frag = FormulaFragment(2, 2, 2)
    verdicts = [ctr_characterization(m, t4_5, frag).holds for m in t4_5]
    assert [i for i, ok in enumerate(verdicts) if ok] == hmax_indices(t4_5)


def test_robinson(t4_6):
    assert check_robinson(t4_6, 3, Scope.GLOBAL).kind is Kind.HOLDS_WITHIN
    with pytest.raises(PreconditionError):
        check_robinson(t4_6, 0)


def test_qe(t4_6):
    frag = FormulaFragment(3, 0, 2)
    assert qe_check(t4_6, f("(exists (y) (S x y))"), frag) == f("true")
    assert qe_check(t4_6, f("(exists (z) (and (S x z) (S z y)))"), frag) == f("(S y x)")
    # loops never occur
    assert qe_check(t4_6, f("(S x x)"), frag) == f("false")
