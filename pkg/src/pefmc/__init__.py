"""Model checking for positive equality-free first-order logic.

Sentences built from relational atoms with only ``forall``, ``exists``,
``&`` and ``|`` are evaluated on finite structures and on symbolic templates
over ``(Q;=)``, ``(Q;<)`` and the Random Graph.  On top of the evaluators
sit tools for the complexity of the model-checking problem: breaking
witnesses, forall-exists surjective hyper-endomorphisms, a four-way
classifier, and the reduction from quantified 1-in-3 SAT.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .classify import (
    Budget,
    BreakKind,
    BreakWitness,
    ClassLabel,
    Label,
    NotFoundWithinBudget,
    Shop,
    SplitSentence,
    breaks_and,
    breaks_or,
    classify,
    classify_promise,
    find_forall_exists_she,
    search_break_witness,
    small_sentences,
    strategy_agreement,
)
from .engine import evaluate
from .errors import (
    BudgetError,
    CertificateError,
    FragmentError,
    ParseError,
    PefError,
    PolicyError,
    SignatureError,
    TransformError,
    UnboundVariableError,
)
from .finite import eval_by_atom_pushing, eval_finite, eval_finite_guarded
from .formula import (
    EXISTS,
    FORALL,
    And,
    Atom,
    Const,
    Guard,
    Or,
    PrenexSentence,
    Quant,
    Quantifier,
    dual_formula,
    parse_formula,
    parse_prenex,
    parse_sentence,
    render,
    swap_quantifiers,
    symmetrize,
    to_prenex,
)
from .infinite import (
    ExistentialPolicy,
    UniversalPolicy,
    eval_infinite,
    eval_restricted,
    find_certificate,
    verify_certificate,
)
from .reductions import PromiseVerdict, Q13Instance, brute_force_q13, compile_q13, parse_q13, pmc_eval
from .templates import (
    Base,
    Configuration,
    FiniteStructure,
    New,
    Reuse,
    SymbolicTemplate,
    dual,
    dual_structure,
    dual_template,
    enumerate_extensions,
    extend_configuration,
    load_template,
)
