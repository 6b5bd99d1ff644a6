"""Breaking witnesses, forall-exists surjective hyper-endomorphisms and the
four-way complexity labelling of templates.

A prenex sentence ``Q1 v1 ... Qk vk (phi1 & phi2)`` *breaks conjunction* on a
template when both one-sided sentences ``Q... phi1`` and ``Q... phi2`` are
true but the conjunction is false; dually a disjunction is broken when the
disjunction is true but both sides are false.  Witnesses of both kinds make
model checking Pspace-hard, one kind alone NP- or co-NP-hard.  The search
here is bounded and only ever sound: a returned witness has been verified by
the exact evaluator, while "not found" says nothing beyond the budget.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Sequence

from .engine import evaluate, template_id
from .errors import BudgetError
from .formula import (
    EXISTS,
    FORALL,
    And,
    Atom,
    Formula,
    Or,
    PrenexSentence,
    Quant,
    Quantifier,
    conjoin,
    disjoin,
    dual_formula,
    free_vars,
    has_guards,
    occurring_vars,
    render,
    split_prefix,
    wrap_prefix,
    _bound_names,
)
from .infinite import ExistentialPolicy, UniversalPolicy, eval_infinite, eval_restricted
from .templates import Base, FiniteStructure, SymbolicTemplate

DEFAULT_SHE_CAP = 5


class Connective(str, Enum):
    AND = "and"
    OR = "or"


class BreakKind(str, Enum):
    BREAKS_AND = "BreaksAnd"
    BREAKS_OR = "BreaksOr"

    @property
    def connective(self) -> Connective:
        return Connective.AND if self is BreakKind.BREAKS_AND else Connective.OR


def _prefix_text(prefix) -> str:
    return " ".join(f"{q} {v}" for q, v in prefix)


@dataclass(frozen=True)
class SplitSentence:
    """A prefix over a two-part conjunction or disjunction."""

    prefix: tuple[tuple[Quantifier, str], ...]
    left: Formula
    right: Formula
    connective: Connective

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(self.prefix))
        object.__setattr__(self, "connective", Connective(self.connective))
        if not self.prefix:
            raise ValueError("a split sentence needs a non-empty prefix")
        names = [v for _, v in self.prefix]
        if len(set(names)) != len(names):
            raise ValueError("prefix variables must be distinct")
        if any(q.guard is not None for q, _ in self.prefix) or has_guards(self.left) or has_guards(self.right):
            raise ValueError("split sentences are unguarded")
        last = self.prefix[-1][0]
        if self.connective is Connective.AND and last.universal:
            raise ValueError("a conjunction split must end its prefix with an existential")
        if self.connective is Connective.OR and not last.universal:
            raise ValueError("a disjunction split must end its prefix with a universal")
        for part in (self.left, self.right):
            extra = free_vars(part) - set(names)
            if extra:
                raise ValueError(f"variables {sorted(extra)} are not bound by the prefix")
            if _bound_names(part) & set(names):
                raise ValueError("inner quantifiers may not rebind prefix variables")

    @classmethod
    def from_sentence(cls, f: Formula | PrenexSentence) -> SplitSentence:
        """Split at the outermost connective below the leading quantifiers."""
        if isinstance(f, PrenexSentence):
            f = f.to_formula()
        prefix, body = split_prefix(f)
        if isinstance(body, And):
            return cls(prefix, body.left, body.right, Connective.AND)
        if isinstance(body, Or):
            return cls(prefix, body.left, body.right, Connective.OR)
        raise ValueError("sentence body below the prefix is not a conjunction or disjunction")

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(v for _, v in self.prefix)

    @property
    def body(self) -> Formula:
        join = And if self.connective is Connective.AND else Or
        return join(self.left, self.right)

    def sentence(self) -> Formula:
        return wrap_prefix(self.prefix, self.body)

    def left_sentence(self) -> Formula:
        return wrap_prefix(self.prefix, self.left)

    def right_sentence(self) -> Formula:
        return wrap_prefix(self.prefix, self.right)

    def dual(self) -> SplitSentence:
        connective = Connective.OR if self.connective is Connective.AND else Connective.AND
        prefix = tuple((q.dual(), v) for q, v in self.prefix)
        return SplitSentence(prefix, dual_formula(self.left), dual_formula(self.right), connective)

    def to_json(self) -> dict:
        return {
            "prefix": _prefix_text(self.prefix),
            "connective": self.connective.value,
            "left": render(self.left),
            "right": render(self.right),
        }

    def __str__(self) -> str:
        return render(self.sentence())


class _Evaluator:
    """Memoised sentence evaluation on a fixed template."""

    def __init__(self, template):
        self.template = template
        self.cache: dict[Formula, bool] = {}

    def __call__(self, f: Formula) -> bool:
        hit = self.cache.get(f)
        if hit is None:
            hit = self.cache[f] = evaluate(self.template, f)
        return hit


def _breaks(ev, split: SplitSentence) -> bool:
    if split.connective is Connective.AND:
        # cheapest refutations first: the whole sentence, then each side
        return not ev(split.sentence()) and ev(split.left_sentence()) and ev(split.right_sentence())
    return ev(split.sentence()) and not ev(split.left_sentence()) and not ev(split.right_sentence())


def breaks_and(template, split: SplitSentence) -> bool:
    """True iff the conjunction is false while both one-sided sentences are true."""
    if split.connective is not Connective.AND:
        raise ValueError("breaks_and needs a conjunction split")
    return _breaks(_Evaluator(template), split)


def breaks_or(template, split: SplitSentence) -> bool:
    """True iff the disjunction is true while both one-sided sentences are false."""
    if split.connective is not Connective.OR:
        raise ValueError("breaks_or needs a disjunction split")
    return _breaks(_Evaluator(template), split)


def breaks(template, split: SplitSentence, kind: BreakKind) -> bool:
    kind = BreakKind(kind)
    if split.connective is not kind.connective:
        return False
    return _breaks(_Evaluator(template), split)


@dataclass(frozen=True)
class BreakWitness:
    split: SplitSentence
    kind: BreakKind
    verified_on: tuple[str, ...]

    def verify(self, template) -> bool:
        return breaks(template, self.split, self.kind)

    def to_json(self) -> dict:
        return {
            "type": self.kind.value,
            "sentence": str(self.split),
            "split": self.split.to_json(),
            "verifiedOn": list(self.verified_on),
        }


def certify_break(templates, split: SplitSentence, kind: BreakKind) -> BreakWitness | None:
    """A witness if ``split`` breaks ``kind`` on every given template, else None."""
    if not isinstance(templates, (list, tuple)):
        templates = [templates]
    kind = BreakKind(kind)
    if all(breaks(t, split, kind) for t in templates):
        return BreakWitness(split, kind, tuple(template_id(t) for t in templates))
    return None


# ---------------------------------------------------------------- bounded search


@dataclass(frozen=True)
class Budget:
    """Size bounds for witness search and for small-sentence suites."""

    max_vars: int = 3
    max_atoms: int = 3
    nested: bool = False

    def __post_init__(self):
        if self.max_vars < 1 or self.max_atoms < 2:
            raise ValueError("budget needs at least one variable and two atoms")


@dataclass(frozen=True)
class NotFoundWithinBudget:
    kind: BreakKind
    budget: Budget
    candidates: int

    def __bool__(self) -> bool:
        return False


def variable_names(n: int) -> list[str]:
    return [f"x{i}" for i in range(1, n + 1)]


def all_atoms(signature: dict[str, int], variables: Sequence[str]) -> list[Atom]:
    """Every atom over ``variables``, ordered by relation name then arguments."""
    return [
        Atom(rel, args)
        for rel in sorted(signature)
        for args in itertools.product(variables, repeat=signature[rel])
    ]


def _junctions(atoms: Sequence[Atom], k: int) -> list[Formula]:
    if k == 1:
        return list(atoms)
    out: list[Formula] = []
    for combo in itertools.combinations(atoms, k):
        out.append(conjoin(combo))
        out.append(disjoin(combo))
    return out


def _sides(signature, variables: Sequence[str], k: int, nested: bool, room: bool) -> list[Formula]:
    sides = _junctions(all_atoms(signature, variables), k)
    if nested and room:
        inner = "y1"
        with_inner = [a for a in all_atoms(signature, [*variables, inner]) if inner in a.args]
        plain = [a for a in all_atoms(signature, [*variables, inner]) if inner not in a.args]
        for q in (FORALL, EXISTS):
            for body in _junctions(plain + with_inner, k):
                if inner in occurring_vars(body):
                    sides.append(Quant(q, inner, body))
    return sides


def candidate_splits(signature: dict[str, int], kind: BreakKind, budget: Budget) -> Iterator[SplitSentence]:
    """Split sentences in order of total size (variables plus atoms).

    Within one size the order is: number of variables, quantifier pattern,
    atom split, then left/right parts in atom order.  Both parts must be
    different and together mention every prefix variable.
    """
    kind = BreakKind(kind)
    last = EXISTS if kind is BreakKind.BREAKS_AND else FORALL
    for total in range(3, budget.max_vars + budget.max_atoms + 1):
        for n in range(1, budget.max_vars + 1):
            a = total - n
            if a < 2 or a > budget.max_atoms:
                continue
            names = variable_names(n)
            room = n < budget.max_vars
            by_size = {k: _sides(signature, names, k, budget.nested, room) for k in range(1, a)}
            for pattern in itertools.product((FORALL, EXISTS), repeat=n - 1):
                prefix = tuple(zip((*pattern, last), names))
                for k_left in range(1, a // 2 + 1):
                    k_right = a - k_left
                    lefts, rights = by_size[k_left], by_size[k_right]
                    for i, left in enumerate(lefts):
                        for j, right in enumerate(rights):
                            if k_left == k_right and j <= i:
                                continue
                            if len(free_vars(left) | free_vars(right)) != n:
                                continue
                            yield SplitSentence(prefix, left, right, kind.connective)


def search_break_witness(
    template, kind: BreakKind, budget: Budget = Budget(), also: Sequence = ()
) -> BreakWitness | NotFoundWithinBudget:
    """First split within ``budget`` that breaks ``kind`` on ``template`` (and on every ``also``)."""
    kind = BreakKind(kind)
    templates = [template, *also]
    signature = template.signature
    for other in also:
        if other.signature != signature:
            raise ValueError("templates searched together must share a signature")
    evaluators = [_Evaluator(t) for t in templates]
    count = 0
    for split in candidate_splits(signature, kind, budget):
        count += 1
        try:
            if all(_breaks(ev, split) for ev in evaluators):
                return BreakWitness(split, kind, tuple(template_id(t) for t in templates))
        except BudgetError as exc:
            raise BudgetError(f"{exc} while checking candidate {split}", split) from exc
    return NotFoundWithinBudget(kind, budget, count)


# ---------------------------------------------------------------- hyper-endomorphisms


@dataclass(frozen=True)
class Shop:
    """A surjective hyper-operation: element ``x`` maps to ``images[x]``."""

    images: tuple[frozenset[int], ...]

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(frozenset(s) for s in self.images))

    def verify(self, b: FiniteStructure) -> bool:
        return is_forall_exists_she(b, self.images)

    def to_json(self) -> dict:
        return {"type": "Shop", "images": {str(x): sorted(img) for x, img in enumerate(self.images)}}


def preserves(b: FiniteStructure, images: Sequence[frozenset[int]]) -> bool:
    """Every tuple of every relation maps, coordinatewise, into the relation."""
    for _, tuples in b.relations.values():
        for t in tuples:
            for image in itertools.product(*(images[x] for x in t)):
                if image not in tuples:
                    return False
    return True


def is_forall_exists_she(b: FiniteStructure, images: Sequence[Iterable[int]]) -> bool:
    """Surjective, relation-preserving, with a full image and a shared element."""
    images = [frozenset(s) for s in images]
    domain = frozenset(range(b.domain))
    if len(images) != b.domain or any(not s or not s <= domain for s in images):
        return False
    if frozenset().union(*images) != domain:
        return False
    if domain not in images or not frozenset.intersection(*images):
        return False
    return preserves(b, images)


def iter_hyperoperations(m: int) -> Iterator[tuple[frozenset[int], ...]]:
    """All ``(2**m - 1) ** m`` maps from elements to non-empty subsets."""
    subsets = [frozenset(x for x in range(m) if mask >> x & 1) for mask in range(1, 1 << m)]
    return itertools.product(subsets, repeat=m)


def find_forall_exists_she(b: FiniteStructure, cap: int = DEFAULT_SHE_CAP) -> Shop | None:
    """A verified forall-exists surjective hyper-endomorphism of ``b``, or None.

    Shrinking images never breaks preservation, so ``b`` has such a map iff
    it has one of the form ``x0 -> everything, x -> {y0}`` otherwise; trying
    those ``m**2`` maps decides existence over the whole space.  A hit is
    then grown greedily, element by element, to a maximal one.
    """
    m = b.domain
    if m > cap:
        raise BudgetError(f"domain size {m} exceeds the hyper-endomorphism search cap {cap}")
    domain = frozenset(range(m))
    for x0, y0 in itertools.product(range(m), repeat=2):
        images = [domain if x == x0 else frozenset({y0}) for x in range(m)]
        if preserves(b, images):
            break
    else:
        return None
    supersets = sorted((frozenset(x for x in range(m) if mask >> x & 1) for mask in range(1, 1 << m)), key=_mask_desc)
    for x in range(m):
        for candidate in supersets:
            if candidate > images[x]:
                trial = images[:x] + [candidate] + images[x + 1:]
                if preserves(b, trial):
                    images = trial
                    break
    shop = Shop(tuple(images))
    assert shop.verify(b)
    return shop


def _mask_desc(s: frozenset[int]) -> int:
    return -sum(1 << x for x in s)


# ---------------------------------------------------------------- strategy agreement


def small_sentences(signature: dict[str, int], max_vars: int, max_atoms: int) -> Iterator[PrenexSentence]:
    """Every prenex sentence with distinct atoms in which each variable occurs.

    Matrices are single atoms, conjunctions or disjunctions of distinct
    atoms, and (with three atoms) the mixed shapes ``(a & b) | c`` and
    ``(a | b) & c``.  Variables are ``x1..xn`` quantified in that order.
    """
    if max_atoms > 3:
        raise ValueError("small sentence suites support at most three atoms")
    for n in range(1, max_vars + 1):
        names = variable_names(n)
        matrices = [m for m in _matrices(all_atoms(signature, names), max_atoms) if len(set(occurring_vars(m))) == n]
        for pattern in itertools.product((FORALL, EXISTS), repeat=n):
            prefix = tuple(zip(pattern, names))
            for matrix in matrices:
                yield PrenexSentence(prefix, matrix)


def _matrices(atoms: Sequence[Atom], max_atoms: int) -> Iterator[Formula]:
    yield from atoms
    if max_atoms >= 2:
        for a, b in itertools.combinations(atoms, 2):
            yield And(a, b)
            yield Or(a, b)
    if max_atoms >= 3:
        for a, b, c in itertools.combinations(atoms, 3):
            yield conjoin((a, b, c))
            yield disjoin((a, b, c))
        for a, b in itertools.combinations(atoms, 2):
            for c in atoms:
                if c not in (a, b):
                    yield Or(And(a, b), c)
                    yield And(Or(a, b), c)


@dataclass(frozen=True)
class StrategyAgreement:
    """Restricted play agreed with exact play on every sentence of a suite."""

    universal: UniversalPolicy
    existential: ExistentialPolicy
    sentences: int
    max_vars: int
    max_atoms: int
    mismatches: tuple[str, ...] = field(default=(), compare=False)

    @property
    def agrees(self) -> bool:
        return not self.mismatches

    def to_json(self) -> dict:
        return {
            "type": "StrategyAgreement",
            "universal": self.universal.value,
            "existential": self.existential.value,
            "sentences": self.sentences,
            "maxVars": self.max_vars,
            "maxAtoms": self.max_atoms,
            "mismatches": list(self.mismatches),
        }


def strategy_agreement(
    t: SymbolicTemplate,
    up: UniversalPolicy,
    ep: ExistentialPolicy,
    max_vars: int = 3,
    max_atoms: int = 3,
    stop_at: int | None = None,
) -> StrategyAgreement:
    """Compare restricted and exact values on every small sentence."""
    up, ep = UniversalPolicy(up), ExistentialPolicy(ep)
    mismatches: list[str] = []
    count = 0
    for s in small_sentences(t.signature, max_vars, max_atoms):
        count += 1
        if eval_restricted(t, s, up, ep) != eval_infinite(t, s):
            mismatches.append(str(s))
            if stop_at is not None and len(mismatches) >= stop_at:
                break
    return StrategyAgreement(up, ep, count, max_vars, max_atoms, tuple(mismatches))


#: Policies that fix a single move on each base, tried in this order.
FIXED_MOVE_POLICIES = {
    Base.EQUALITY: ([UniversalPolicy.ALL_DIFFERENT], [ExistentialPolicy.EXISTS_DIFFERENT]),
    Base.ORDER: (
        [UniversalPolicy.ALL_BELOW, UniversalPolicy.ALL_ABOVE],
        [ExistentialPolicy.EXISTS_BELOW, ExistentialPolicy.EXISTS_ABOVE],
    ),
    Base.GRAPH: (
        [UniversalPolicy.ALL_N, UniversalPolicy.ALL_E],
        [ExistentialPolicy.EXISTS_E, ExistentialPolicy.EXISTS_N],
    ),
}


# ---------------------------------------------------------------- labels


class Label(str, Enum):
    LOGSPACE = "Logspace"
    NP_COMPLETE = "NPcomplete"
    CONP_COMPLETE = "coNPcomplete"
    PSPACE_COMPLETE = "PspaceComplete"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class ClassLabel:
    label: Label
    conditional: bool
    evidence: tuple = ()
    detail: str = ""

    def to_json(self) -> dict:
        return {
            "label": self.label.value,
            "conditional": self.conditional,
            "evidence": [e.to_json() for e in self.evidence],
            "detail": self.detail,
        }


def classify(template, budget: Budget = Budget(), she_cap: int = DEFAULT_SHE_CAP) -> ClassLabel:
    """Label ``template`` by bounded witness search plus a tractability certificate."""
    try:
        and_w = search_break_witness(template, BreakKind.BREAKS_AND, budget)
        or_w = search_break_witness(template, BreakKind.BREAKS_OR, budget)
    except BudgetError as exc:
        return ClassLabel(Label.UNKNOWN, True, (), f"budget exhausted: {exc}")
    if and_w and or_w:
        return ClassLabel(Label.PSPACE_COMPLETE, False, (and_w, or_w))
    if and_w:
        return ClassLabel(Label.NP_COMPLETE, True, (and_w,), "no disjunction-breaking witness within budget")
    if or_w:
        return ClassLabel(Label.CONP_COMPLETE, True, (or_w,), "no conjunction-breaking witness within budget")
    if isinstance(template, FiniteStructure):
        try:
            shop = find_forall_exists_she(template, she_cap)
        except BudgetError as exc:
            return ClassLabel(Label.UNKNOWN, True, (), f"no witness within budget; {exc}")
        if shop is not None:
            return ClassLabel(Label.LOGSPACE, False, (shop,))
        return ClassLabel(Label.UNKNOWN, True, (), "no witness within budget and no forall-exists surjective hyper-endomorphism")
    if template.base is Base.GRAPH and not template.is_expansion_of_e:
        return ClassLabel(Label.UNKNOWN, True, (), "random-graph template that is not an expansion of (V;E)")
    ups, eps = FIXED_MOVE_POLICIES[template.base]
    tried = []
    for up, ep in itertools.product(ups, eps):
        agreement = strategy_agreement(template, up, ep, budget.max_vars, budget.max_atoms, stop_at=1)
        if agreement.agrees:
            return ClassLabel(Label.LOGSPACE, True, (agreement,), "no witness within budget; fixed strategies agree with exact play")
        tried.append(f"{up.value}/{ep.value}")
    return ClassLabel(Label.UNKNOWN, True, (), "no witness within budget; no fixed strategy pair agrees (" + ", ".join(tried) + ")")


def classify_promise(a: FiniteStructure, b: FiniteStructure, budget: Budget = Budget()) -> ClassLabel:
    """Label the promise problem by witnesses that break on both structures at once."""
    if a.signature != b.signature:
        raise ValueError("promise templates must share a signature")
    and_w = search_break_witness(a, BreakKind.BREAKS_AND, budget, also=[b])
    or_w = search_break_witness(a, BreakKind.BREAKS_OR, budget, also=[b])
    if and_w and or_w:
        return ClassLabel(Label.PSPACE_COMPLETE, False, (and_w, or_w))
    found = [w for w in (and_w, or_w) if w]
    kinds = ", ".join(w.kind.value for w in found) or "none"
    return ClassLabel(Label.UNKNOWN, True, tuple(found), f"common witnesses within budget: {kinds}")
