from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import random_sentence, random_structure
from pefmc.errors import FragmentError, ParseError, TransformError, UnboundVariableError
from pefmc.finite import all_structures, eval_finite, eval_formula
from pefmc.formula import (
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
    as_prenex,
    conjoin,
    disjoin,
    dual_formula,
    fully_swap,
    occurring_vars,
    parse_formula,
    parse_prenex,
    parse_sentence,
    quantifier_count,
    render,
    rename,
    swap_quantifiers,
    symmetrize,
    to_prenex,
    wrap_prefix,
)
from pefmc.templates import FiniteStructure


def test_parse_nested_quantifiers():
    f = parse_sentence("forall x exists y E(x,y)")
    assert f == Quant(FORALL, "x", Quant(EXISTS, "y", Atom("E", ("x", "y"))))


def test_parse_guarded_quantifier():
    f = parse_sentence("forall!= y forall x E(x,y)")
    assert f.q == Quantifier(True, Guard.NEQ)
    assert f.body.q == FORALL


@pytest.mark.parametrize("lexeme,guard", [("forall<", Guard.BELOW), ("forall>", Guard.ABOVE), ("existsE", Guard.E), ("existsN", Guard.N)])
def test_parse_every_guard(lexeme, guard):
    f = parse_sentence(f"{lexeme} x R(x)")
    assert f.q.guard is guard


def test_unicode_symbols():
    assert parse_sentence("∀x ∃y (E(x,y) ∧ E(y,x)) ∨ E(x,x)") == parse_sentence("forall x exists y E(x,y) & E(y,x) | E(x,x)")


@pytest.mark.parametrize(
    "text",
    ["exists x not E(x,x)", "exists x ~E(x,x)", "exists x y = x", "forall x (E(x,x) -> E(x,x))", "exists x ¬E(x,x)"],
)
def test_fragment_violations(text):
    with pytest.raises(FragmentError):
        parse_sentence(text)


def test_unbound_variable():
    with pytest.raises(UnboundVariableError):
        parse_sentence("forall x E(x,y)")


def test_free_variables_may_be_declared():
    f = parse_formula("exists y E(x,y)", free=["x"])
    assert occurring_vars(f) == ["x", "y"]


def test_syntax_error_reports_position():
    with pytest.raises(ParseError) as info:
        parse_sentence("forall x\n  E(x,x) &")
    assert info.value.line == 2


def test_shadowing_is_rejected():
    with pytest.raises(ParseError):
        parse_sentence("forall x exists x E(x,x)")


def test_and_binds_tighter_than_or():
    f = parse_sentence("exists x R(x) | S(x) & T(x)")
    assert f.body == Or(Atom("R", ("x",)), And(Atom("S", ("x",)), Atom("T", ("x",))))


def test_comments_are_ignored():
    assert parse_sentence("# header\nexists x R(x) # trailing\n") == parse_sentence("exists x R(x)")


def test_render_examples():
    assert render(parse_sentence("forall x exists y (E(x,y) | E(y,x)) & E(x,x)")) == "forall x exists y (E(x,y) | E(y,x)) & E(x,x)"
    assert str(Quantifier(True, Guard.NEQ)) == "forall!="


def test_to_prenex_renames_apart():
    f = parse_sentence("(exists x R(x)) & (exists x S(x))")
    s = to_prenex(f)
    assert [q for q, _ in s.prefix] == [EXISTS, EXISTS]
    (_, a), (_, b) = s.prefix
    assert a == "x" and b != "x"
    assert s.matrix == And(Atom("R", ("x",)), Atom("S", (b,)))


def test_to_prenex_keeps_prenex_input():
    f = parse_sentence("forall x exists y E(x,y)")
    assert to_prenex(f).to_formula() == f


def test_to_prenex_refuses_guards():
    with pytest.raises(TransformError):
        to_prenex(parse_sentence("forall x forall!= y E(x,y)"))


def test_to_prenex_disjunction_of_universals_equivalent():
    f = parse_sentence("(forall x R(x)) | (forall y S(y))")
    s = to_prenex(f)
    assert render(s) == "forall x forall y R(x) | S(y)"
    for m in (1, 2, 3):
        for b in all_structures(m, {"R": 1, "S": 1}):
            assert eval_formula(b, f) == eval_finite(b, s).verdict


def test_prefix_length_equals_quantifier_count():
    f = parse_sentence("forall x ((exists y E(x,y)) | (forall y exists z E(y,z)))")
    assert len(to_prenex(f).prefix) == quantifier_count(f) == 4


def test_to_prenex_is_deterministic():
    f = parse_sentence("(exists x R(x)) & (exists x S(x)) & (exists x R(x))")
    assert to_prenex(f) == to_prenex(f)
    assert [v for _, v in to_prenex(f).prefix] == ["x", "v1", "v2"]


def test_prenex_sentence_validation():
    with pytest.raises(ValueError):
        PrenexSentence(((FORALL, "x"), (EXISTS, "x")), Atom("E", ("x", "x")))
    with pytest.raises(ValueError):
        PrenexSentence(((FORALL, "x"),), Quant(EXISTS, "y", Atom("E", ("x", "y"))))


def test_dual_formula_examples():
    assert dual_formula(parse_sentence("exists x E(x,x)")) == parse_sentence("forall x E(x,x)")
    assert dual_formula(parse_sentence("forall x exists y (E(x,y) & R(y))")) == parse_sentence(
        "exists x forall y (E(x,y) | R(y))"
    )
    assert dual_formula(Const(True)) == Const(False)


def test_dual_keeps_guards():
    f = parse_sentence("forall!= x existsE y E(x,y)")
    assert dual_formula(f).q == Quantifier(False, Guard.NEQ)
    assert dual_formula(f).body.q == Quantifier(True, Guard.E)


def test_empty_junctions():
    assert conjoin([]) == Const(True)
    assert disjoin([]) == Const(False)


def test_symmetrize_two_variables():
    f = parse_formula("Lt(v1,v2)", free=["v1", "v2"])
    assert symmetrize(f, ["v1", "v2"]) == Or(Atom("Lt", ("v1", "v2")), Atom("Lt", ("v2", "v1")))


def test_symmetrize_single_variable_is_identity():
    f = parse_formula("R(v1)", free=["v1"])
    assert symmetrize(f, ["v1"]) == f


def test_symmetrize_cap_and_arity_errors():
    with pytest.raises(TransformError):
        symmetrize(parse_formula("R(v1)", free=["v1", "v2"]), ["v1", "v2"])
    names = [f"v{i}" for i in range(7)]
    with pytest.raises(TransformError):
        symmetrize(parse_formula(" & ".join(f"R({v})" for v in names), free=names), names)


def _weak_orders(n: int):
    """Every weak order on n points, as rank tuples with ranks 0..r-1 all used."""
    seen = set()
    for ranks in itertools.product(range(n), repeat=n):
        used = sorted(set(ranks))
        canon = tuple(used.index(r) for r in ranks)
        if canon not in seen:
            seen.add(canon)
            yield canon


def _lt_value(f, values):
    m = max(values) + 1
    b = FiniteStructure(m, {"Lt": (2, frozenset((a, c) for a in range(m) for c in range(m) if a < c))})
    return eval_formula(b, f, dict(zip(["v1", "v2", "v3", "v4"], values)))


def test_weak_order_count():
    assert len(list(_weak_orders(3))) == 13


def test_symmetrize_is_permutation_invariant_on_weak_orders():
    f = parse_formula("Lt(v1,v2) & Lt(v2,v3)", free=["v1", "v2", "v3"])
    g = symmetrize(f, ["v1", "v2", "v3"])
    for ranks in _weak_orders(3):
        values = {_lt_value(g, list(p)) for p in itertools.permutations(ranks)}
        assert len(values) == 1


@pytest.mark.parametrize("n", [2, 3, 4])
def test_symmetrized_order_formula_is_constant_on_distinct_tuples(n):
    rng = random.Random(n)
    names = [f"v{i}" for i in range(1, n + 1)]
    for _ in range(20):
        atoms = [Atom("Lt", tuple(rng.sample(names, 2))) for _ in range(rng.randint(1, 3))]
        f = conjoin(atoms) if rng.random() < 0.5 else disjoin(atoms)
        if set(occurring_vars(f)) != set(names):
            continue
        g = symmetrize(f, names)
        assert len({_lt_value(g, list(p)) for p in itertools.permutations(range(n))}) == 1


def test_symmetrized_order_formula_can_see_more_than_equality_pattern():
    # With repeated values the symmetrisation still distinguishes order:
    # (1,1,0) and (0,0,1) share an equality pattern but not the truth value.
    f = parse_formula("Lt(v3,v1) & Lt(v3,v2)", free=["v1", "v2", "v3"])
    g = symmetrize(f, ["v1", "v2", "v3"])
    assert _lt_value(g, [1, 1, 0]) is True
    assert _lt_value(g, [0, 0, 1]) is False


def test_swap_quantifiers_examples():
    s = parse_prenex("forall x exists y E(x,y)")
    assert render(swap_quantifiers(s)) == "exists y forall x E(x,y)"
    with pytest.raises(TransformError):
        swap_quantifiers(parse_prenex("exists y forall x E(x,y)"))


def test_swap_hoists_innermost_existential_one_step():
    s = parse_prenex("forall a exists b forall c exists d E(a,b) & E(c,d)")
    assert [v for _, v in swap_quantifiers(s).prefix] == ["a", "b", "d", "c"]
    assert [q.universal for q, _ in fully_swap(s).prefix] == [False, False, True, True]


def test_rename_only_touches_free_occurrences():
    f = And(Atom("E", ("x", "y")), Quant(EXISTS, "y", Atom("E", ("y", "x"))))
    assert render(rename(f, {"y": "z"})) == "E(x,z) & (exists y E(y,x))"


# ---------------------------------------------------------------- properties

NAMES = ["a", "b", "c", "d", "e"]


@st.composite
def formulas(draw, depth: int = 0, bound: tuple[str, ...] = ()):
    choices = ["atom", "and", "or"] + (["quant"] if len(bound) < len(NAMES) else [])
    kind = draw(st.sampled_from(choices)) if depth < 4 else "atom"
    if kind == "atom":
        if not bound:
            return Const(draw(st.booleans()))
        arity = draw(st.integers(1, 2))
        return Atom("R" if arity == 1 else "E", tuple(draw(st.sampled_from(bound)) for _ in range(arity)))
    if kind == "quant":
        var = next(v for v in NAMES if v not in bound)
        guard = draw(st.sampled_from([None, None, None, Guard.NEQ, Guard.E]))
        return Quant(Quantifier(draw(st.booleans()), guard), var, draw(formulas(depth + 1, bound + (var,))))
    join = And if kind == "and" else Or
    return join(draw(formulas(depth + 1, bound)), draw(formulas(depth + 1, bound)))


@given(formulas())
@settings(max_examples=300, deadline=None)
def test_render_parse_round_trip(f):
    assert parse_sentence(render(f)) == f


@given(formulas())
@settings(max_examples=200, deadline=None)
def test_dual_is_an_involution(f):
    assert dual_formula(dual_formula(f)) == f


def test_to_prenex_preserves_truth_on_random_structures():
    rng = random.Random(11)
    signature = {"E": 2, "R": 1}
    for _ in range(300):
        s = random_sentence(rng, signature, max_vars=5, max_atoms=4)
        # scatter the prefix back into the matrix so there is work to do
        f = s.to_formula()
        if isinstance(s.matrix, (And, Or)) and s.prefix:
            q, v = s.prefix[-1]
            join = type(s.matrix)
            inner = join(Quant(q, v, s.matrix.left), Quant(q, v, s.matrix.right))
            f = wrap_prefix(s.prefix[:-1], inner)
        b = random_structure(rng, rng.randint(1, 3), signature)
        assert eval_formula(b, f) == eval_finite(b, to_prenex(f)).verdict


def test_as_prenex_rejects_nested():
    with pytest.raises(TransformError):
        as_prenex(parse_sentence("(exists x R(x)) & (exists y R(y))"))
