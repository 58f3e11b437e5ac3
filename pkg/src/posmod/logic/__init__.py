"""Positive formulas: syntax, semantics, normal forms, fragments."""

from .fragment import FormulaFragment, enumerate_fragment, fragment_formulas, tpqf
from .normal import PPFormula, canonical_structure, pp_normal_form
from .semantics import (AxiomViolation, UnboundVariable, compile_sentence, eval_formula,
                        find_violation, satisfies, sentence_holds)
from .syntax import (FALSE, TRUE, And, Atom, Const, Eq, Exists, Falsity, Formula, HSentence, Or,
                     Theory, Truth, Var, atoms_of, conj, disj, exists, formula_from_sexpr,
                     free_vars, is_quantifier_free, parse_formula, parse_sentence, parse_theory,
                     sentence_text, substitute, theory_text, to_text)
