"""One entry point for evaluating a sentence on any kind of template."""

from __future__ import annotations

from .errors import TransformError
from .finite import eval_finite, eval_finite_guarded
from .formula import Formula, PrenexSentence, as_prenex, has_guards, to_prenex
from .infinite import eval_infinite
from .templates import FiniteStructure, SymbolicTemplate



def evaluate(template, s: PrenexSentence | Formula) -> bool:
    """Truth of sentence ``s`` on a finite structure or symbolic template."""
    if isinstance(template, FiniteStructure):
        formula = s.to_formula() if isinstance(s, PrenexSentence) else s
        if has_guards(formula):
            return eval_finite_guarded(template, formula)
        try:
            prenex = as_prenex(s)
        except TransformError:
            prenex = to_prenex(formula)
        return eval_finite(template, prenex).verdict
    if isinstance(template, SymbolicTemplate):
        return eval_infinite(template, s)
    raise TypeError(f"not a template: {template!r}")


def template_id(template) -> str:
    if template.name:
        return template.name
    if isinstance(template, FiniteStructure):
        return f"finite[{template.domain}]"
    return f"symbolic[{template.base.value}]"
