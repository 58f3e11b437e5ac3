"""Model finding and class-level decisions relative to a model universe."""

from .classes import (Amalgam, AmalgamFailure, Continuation, HomFailure, JointFailure,
                      asymmetric_amalgam, glue, h_maximal_members, hmax_indices, is_amalgamation_basis,
                      is_complete, is_core, is_h_maximal, is_pc, pc_continuation, pc_indices,
                      pc_members)
from .theories import (CharacterizationFailure, CompanionFailure, Countermodel, CtrReport,
                       RobinsonFailure, Scope, SentenceKind, check_robinson, companion_check, ctr,
                       ctr_characterization, ctr_fragment, kaiser_hull, qe_check, sat_mask,
                       theory_of, universal_companion)
from .universe import ModelUniverse, enumerate_models, load_universe, naive_models, save_universe
