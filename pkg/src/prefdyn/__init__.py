"""Preferential dynamic modal logic workbench."""

from .entailment import (
    MODES, EmptyFamilyError, ModelFamily, Query, Verdict, Witness, decide, dynamically_entails,
    find_countermodel, preferentially_entails, reverify, statically_entails,
)
from .formula import (
    And, Bottom, Box, Diamond, Discourse, Equality, FOAtom, Formula, FormulaError, NegLiteral,
    OpType, Or, Pref, PropAtom, Term, boxed, desugar, formula, parse_discourse, parse_formula,
    to_text,
)
from .model import (
    Finding, InformationModel, Layer, ModelError, RuleSet, supports, validate_preferential_model,
    validate_preorder,
)
from .principles import PRINCIPLES, check_all, check_principle
from .semantics import (
    eval_static, o_meaning, preferential_meaning, priority_reading, relational_meaning,
    sequence_meaning,
)

__version__ = "0.1.0"
