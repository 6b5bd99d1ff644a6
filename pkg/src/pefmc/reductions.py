"""Quantified monotone 1-in-3 SAT and its compilation into model checking.

Given a conjunction-breaking witness ``Q.. (phi1 & phi2)`` and a
disjunction-breaking witness ``Q'.. (psi1 | psi2)`` on a template, every
boolean variable becomes a block of copies of the witness prefix, and
"variable is true" / "variable is false" become the left / right side of the
witness on that block.  A clause ``(p, q, r)`` turns into the disjunction of
its three exactly-one rows.  The compiled sentence is true on the template
iff the quantified formula is a yes-instance.

Q13 text format, one item per line (``#`` starts a comment)::

    a x        # universal variable x
    e y        # existential variable y
    c x y y    # clause: exactly one of x, y, y is true
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .classify import BreakKind, BreakWitness, breaks
from .engine import evaluate
from .errors import BudgetError, ParseError, SignatureError
from .formula import (
    EXISTS,
    FORALL,
    Formula,
    PrenexSentence,
    Quantifier,
    conjoin,
    disjoin,
    is_quantifier_free,
    rename,
    to_prenex,
    wrap_prefix,
)
from .templates import FiniteStructure

Q13_VARIABLE_CAP = 20
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")


@dataclass(frozen=True)
class Q13Instance:
    prefix: tuple[tuple[Quantifier, str], ...]
    clauses: tuple[tuple[str, str, str], ...]

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(self.prefix))
        object.__setattr__(self, "clauses", tuple(tuple(c) for c in self.clauses))
        names = [v for _, v in self.prefix]
        if len(set(names)) != len(names):
            raise ValueError("prefix variables must be distinct")
        if any(q.guard is not None for q, _ in self.prefix):
            raise ValueError("Q13 quantifiers are unguarded")
        for clause in self.clauses:
            if len(clause) != 3:
                raise ValueError(f"clause {clause} does not have three variables")
            missing = set(clause) - set(names)
            if missing:
                raise ValueError(f"clause variables {sorted(missing)} are not quantified")

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(v for _, v in self.prefix)

    def to_text(self) -> str:
        lines = [f"{'a' if q.universal else 'e'} {v}" for q, v in self.prefix]
        lines += ["c " + " ".join(c) for c in self.clauses]
        return "\n".join(lines) + "\n"


def parse_q13(text: str) -> Q13Instance:
    """Parse the line-based Q13 format; prefix lines must precede clauses."""
    prefix: list[tuple[Quantifier, str]] = []
    clauses: list[tuple[str, str, str]] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        tokens = line.split()
        if not tokens:
            continue
        column = raw.index(tokens[0]) + 1
        head, args = tokens[0], tokens[1:]
        for name in args:
            if not _NAME.match(name):
                raise ParseError(f"bad variable name {name!r}", lineno, raw.index(name) + 1)
        if head in ("a", "e"):
            if clauses:
                raise ParseError("quantifier line after a clause", lineno, column)
            if not args:
                raise ParseError(f"'{head}' needs at least one variable", lineno, column)
            # several tokens on one line, e.g. "e p e q" or "e p q", are accepted
            pending = head
            for tok in args:
                if tok in ("a", "e"):
                    pending = tok
                    continue
                if tok in seen:
                    raise ParseError(f"variable {tok} quantified twice", lineno, raw.index(tok) + 1)
                seen.add(tok)
                prefix.append((FORALL if pending == "a" else EXISTS, tok))
        elif head == "c":
            if len(args) != 3:
                raise ParseError(f"a clause needs exactly three variables, got {len(args)}", lineno, column)
            for name in args:
                if name not in seen:
                    raise ParseError(f"clause variable {name} is not quantified", lineno, raw.index(name) + 1)
            clauses.append((args[0], args[1], args[2]))
        else:
            raise ParseError(f"unknown line type {head!r} (expected a, e or c)", lineno, column)
    if clauses and not prefix:
        raise ParseError("clauses without a quantifier prefix")
    return Q13Instance(tuple(prefix), tuple(clauses))


def brute_force_q13(inst: Q13Instance, cap: int = Q13_VARIABLE_CAP) -> bool:
    """Game value with Existential winning iff every clause has exactly one true variable."""
    n = len(inst.prefix)
    if n > cap:
        raise BudgetError(f"{n} variables exceed the brute-force cap {cap}")
    index = {v: i for i, (_, v) in enumerate(inst.prefix)}
    clauses = [tuple(index[v] for v in c) for c in inst.clauses]
    values = [False] * n

    def node(pos: int) -> bool:
        if pos == n:
            return all(values[a] + values[b] + values[c] == 1 for a, b, c in clauses)
        results = []
        for value in (False, True):
            values[pos] = value
            results.append(node(pos + 1))
        return all(results) if inst.prefix[pos][0].universal else any(results)

    return node(0)


def _block_name(var: str, existential: bool, i: int) -> str:
    return f"{var}__{'v' if existential else 'w'}{i}"


def compile_q13(
    inst: Q13Instance, and_w: BreakWitness | None, or_w: BreakWitness | None, template=None
) -> PrenexSentence | Formula:
    """Build the model-checking sentence for ``inst`` from the two witnesses.

    An existential-only instance needs only ``and_w`` and a universal-only
    one only ``or_w``.  With ``template`` given, the witnesses are
    re-verified on it first.
    """
    has_e = any(not q.universal for q, _ in inst.prefix)
    has_a = any(q.universal for q, _ in inst.prefix)
    if has_e and (and_w is None or and_w.kind is not BreakKind.BREAKS_AND):
        raise ValueError("existential variables need a conjunction-breaking witness")
    if has_a and (or_w is None or or_w.kind is not BreakKind.BREAKS_OR):
        raise ValueError("universal variables need a disjunction-breaking witness")
    if template is not None:
        for w, needed in ((and_w, has_e), (or_w, has_a)):
            if needed and not breaks(template, w.split, w.kind):
                raise ValueError(f"witness {w.split} does not break {w.kind.connective.value} on the template")

    prefix: list[tuple[Quantifier, str]] = []
    markers: dict[str, tuple[Formula, Formula]] = {}
    for q, var in inst.prefix:
        witness = or_w if q.universal else and_w
        split = witness.split
        mapping = {v: _block_name(var, not q.universal, i) for i, (_, v) in enumerate(split.prefix, start=1)}
        prefix += [(wq, mapping[v]) for wq, v in split.prefix]
        markers[var] = (rename(split.left, mapping), rename(split.right, mapping))

    def row(clause: Sequence[str], true_at: int) -> Formula:
        return conjoin(markers[v][0] if k == true_at else markers[v][1] for k, v in enumerate(clause))

    matrix = conjoin(disjoin(row(c, i) for i in range(3)) for c in inst.clauses)
    if is_quantifier_free(matrix):
        return PrenexSentence(tuple(prefix), matrix)
    return to_prenex(wrap_prefix(prefix, matrix))


class Verdict(str, Enum):
    YES = "Yes"
    NO = "No"
    GAP = "Gap"


@dataclass(frozen=True)
class PromiseVerdict:
    true_on_a: bool
    true_on_b: bool
    verdict: Verdict

    def to_json(self) -> dict:
        return {"trueOnA": self.true_on_a, "trueOnB": self.true_on_b, "verdict": self.verdict.value}


def promise_verdict(true_on_a: bool, true_on_b: bool) -> Verdict:
    # truth on A decides first: such inputs must be answered yes
    if true_on_a:
        return Verdict.YES
    if not true_on_b:
        return Verdict.NO
    return Verdict.GAP


def pmc_eval(a: FiniteStructure, b: FiniteStructure, s: PrenexSentence | Formula) -> PromiseVerdict:
    """Evaluate ``s`` on both promise structures."""
    if a.signature != b.signature:
        raise SignatureError(f"promise structures differ in signature: {a.signature} vs {b.signature}")
    on_a, on_b = evaluate(a, s), evaluate(b, s)
    return PromiseVerdict(on_a, on_b, promise_verdict(on_a, on_b))
