import pytest

from posmod.analysis import enumerate_models, is_pc, pc_indices
from posmod.corpus import (collapse_axiom, corpus_cycles, corpus_group, corpus_successor, cycle,
                           cyclic_group, functional_cycle, no_cycle_axiom)
from posmod.errors import PreconditionError
from posmod.logic import parse_sentence, parse_theory, satisfies, sentence_holds
from posmod.structures import isomorphic
from posmod.verdict import Kind


def test_cycle_axioms():
    s = parse_sentence(no_cycle_axiom(3))
    assert not sentence_holds(cycle(3), s) and sentence_holds(cycle(4), s)
    s = parse_sentence(collapse_axiom(5))
    assert not sentence_holds(cycle(5), s)
    assert sentence_holds(cycle(3), s) and sentence_holds(cycle(4), s)


def test_tn_requires_parameters():
    with pytest.raises(PreconditionError):
        corpus_cycles("Tn", 3, 5)
    with pytest.raises(PreconditionError):
        corpus_cycles("Tn", 4)
    with pytest.raises(PreconditionError):
        corpus_cycles("Tq")


def test_tn_text_round_trip():
    t, text, samples = corpus_cycles("Tn", 6, 8)
    assert text.startswith(";")
    assert parse_theory(text) == t
    assert [lab for lab, _ in t.axioms][-2:] == ["collapse-7", "collapse-8"]
    assert satisfies(samples["C3+C5"], t) and not satisfies(samples["C4"], t)


def test_group_generator():
    t, text, g = corpus_group(2, 2, 2)
    assert isomorphic(g, cyclic_group(4, 2)) is not None
    assert satisfies(g, t)
    for bad in [(4, 1, 1), (3, 0, 1), (3, 1, 3)]:
        with pytest.raises(PreconditionError):
            corpus_group(*bad)


def test_successor():
    t, _, samples = corpus_successor()
    assert all(satisfies(s, t) for s in samples.values())
    u = enumerate_models(t, 5)
    # within five elements C3 still maps into C2 + C3 and C5 is alone
    from posmod.structures import disjoint_sum

    pcs = [u[i] for i in pc_indices(u)]
    expected = [functional_cycle(5), disjoint_sum(functional_cycle(2), functional_cycle(3))]
    assert sorted(u.index_of(a) for a in expected) == pc_indices(u)
    assert len(pcs) == 2
    assert is_pc(functional_cycle(5), u).kind is Kind.HOLDS_WITHIN
    assert not is_pc(functional_cycle(3), u)
    assert is_pc(functional_cycle(3), enumerate_models(t, 4)).kind is Kind.HOLDS_WITHIN
