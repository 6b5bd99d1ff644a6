"""Positive equality-free formulas: AST, parser, printer and syntactic transforms.

The fragment has only ``forall``, ``exists``, ``&`` and ``|`` over named
relations.  Quantifiers may carry a guard restricting the range of the bound
variable relative to the elements already in play:

==========  ===========================================================
guard       meaning of the new element
==========  ===========================================================
``!=``      distinct from every element already played
``<``       strictly below every element already played (order base)
``>``       strictly above every element already played (order base)
``E``       distinct, with an E-edge to every element already played
``N``       distinct, with an N-edge (non-edge) to every element played
==========  ===========================================================
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Sequence, Union

from .errors import FragmentError, ParseError, TransformError, UnboundVariableError


class Guard(str, Enum):
    NEQ = "!="
    BELOW = "<"
    ABOVE = ">"
    E = "E"
    N = "N"


@dataclass(frozen=True)
class Quantifier:
    universal: bool
    guard: Guard | None = None

    def dual(self) -> Quantifier:
        return Quantifier(not self.universal, self.guard)

    def unguarded(self) -> Quantifier:
        return Quantifier(self.universal)

    def __str__(self) -> str:
        word = "forall" if self.universal else "exists"
        return word + (self.guard.value if self.guard else "")


FORALL = Quantifier(True)
EXISTS = Quantifier(False)


@dataclass(frozen=True)
class Atom:
    rel: str
    args: tuple[str, ...]

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True)
class Const:
    """Truth constant; only produced for empty conjunctions/disjunctions."""

    value: bool

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True)
class And:
    left: Formula
    right: Formula

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True)
class Or:
    left: Formula
    right: Formula

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True)
class Quant:
    q: Quantifier
    var: str
    body: Formula

    def __str__(self) -> str:
        return render(self)


Formula = Union[Atom, Const, And, Or, Quant]


@dataclass(frozen=True)
class PrenexSentence:
    """Quantifier prefix over a quantifier-free matrix."""

    prefix: tuple[tuple[Quantifier, str], ...]
    matrix: Formula
    free: tuple[str, ...] = ()

    def __post_init__(self):
        names = [v for _, v in self.prefix]
        if len(set(names)) != len(names):
            raise ValueError(f"repeated prefix variable in {names}")
        if set(names) & set(self.free):
            raise ValueError("prefix variables overlap free variables")
        if not is_quantifier_free(self.matrix):
            raise ValueError("matrix must be quantifier-free")

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(v for _, v in self.prefix)

    def to_formula(self) -> Formula:
        return wrap_prefix(self.prefix, self.matrix)

    def has_guards(self) -> bool:
        return any(q.guard is not None for q, _ in self.prefix)

    def __str__(self) -> str:
        return render(self.to_formula())


# ---------------------------------------------------------------- utilities


def conjoin(parts: Iterable[Formula]) -> Formula:
    parts = list(parts)
    if not parts:
        return Const(True)
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disjoin(parts: Iterable[Formula]) -> Formula:
    parts = list(parts)
    if not parts:
        return Const(False)
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def wrap_prefix(prefix: Sequence[tuple[Quantifier, str]], matrix: Formula) -> Formula:
    out = matrix
    for q, v in reversed(prefix):
        out = Quant(q, v, out)
    return out


def atoms(f: Formula) -> Iterator[Atom]:
    if isinstance(f, Atom):
        yield f
    elif isinstance(f, (And, Or)):
        yield from atoms(f.left)
        yield from atoms(f.right)
    elif isinstance(f, Quant):
        yield from atoms(f.body)


def relations_used(f: Formula) -> dict[str, int]:
    """Relation name -> arity for every atom of ``f``."""
    out: dict[str, int] = {}
    for a in atoms(f):
        if out.setdefault(a.rel, len(a.args)) != len(a.args):
            raise ValueError(f"relation {a.rel} used with two arities")
    return out


def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, Atom):
        return frozenset(f.args)
    if isinstance(f, Const):
        return frozenset()
    if isinstance(f, (And, Or)):
        return free_vars(f.left) | free_vars(f.right)
    return free_vars(f.body) - {f.var}


def occurring_vars(f: Formula) -> list[str]:
    """Variables occurring in atoms, in order of first occurrence."""
    seen: dict[str, None] = {}
    for a in atoms(f):
        for v in a.args:
            seen.setdefault(v)
    return list(seen)


def quantifier_count(f: Formula) -> int:
    if isinstance(f, (Atom, Const)):
        return 0
    if isinstance(f, (And, Or)):
        return quantifier_count(f.left) + quantifier_count(f.right)
    return 1 + quantifier_count(f.body)


def size(f: Formula) -> int:
    if isinstance(f, (Atom, Const)):
        return 1
    if isinstance(f, (And, Or)):
        return 1 + size(f.left) + size(f.right)
    return 1 + size(f.body)


def is_quantifier_free(f: Formula) -> bool:
    return quantifier_count(f) == 0


def has_guards(f: Formula) -> bool:
    if isinstance(f, (Atom, Const)):
        return False
    if isinstance(f, (And, Or)):
        return has_guards(f.left) or has_guards(f.right)
    return f.q.guard is not None or has_guards(f.body)


def rename(f: Formula, mapping: dict[str, str]) -> Formula:
    """Rename free occurrences of variables.  Caller guarantees no capture."""
    if isinstance(f, Atom):
        return Atom(f.rel, tuple(mapping.get(v, v) for v in f.args))
    if isinstance(f, Const):
        return f
    if isinstance(f, (And, Or)):
        return type(f)(rename(f.left, mapping), rename(f.right, mapping))
    inner = {k: v for k, v in mapping.items() if k != f.var}
    return Quant(f.q, f.var, rename(f.body, inner))


def split_prefix(f: Formula) -> tuple[tuple[tuple[Quantifier, str], ...], Formula]:
    prefix = []
    while isinstance(f, Quant):
        prefix.append((f.q, f.var))
        f = f.body
    return tuple(prefix), f


def as_prenex(f: Formula | PrenexSentence, free: Sequence[str] = ()) -> PrenexSentence:
    """View an already-prenex formula as a :class:`PrenexSentence`.

    Raises ``TransformError`` when quantifiers remain below the prefix; use
    :func:`to_prenex` for those.
    """
    if isinstance(f, PrenexSentence):
        return f
    prefix, matrix = split_prefix(f)
    if not is_quantifier_free(matrix):
        raise TransformError("formula is not in prenex form")
    return PrenexSentence(prefix, matrix, tuple(free))


# ---------------------------------------------------------------- printing


def _wrap(s: str) -> str:
    return f"({s})"


def render(f: Formula | PrenexSentence) -> str:
    if isinstance(f, PrenexSentence):
        f = f.to_formula()
    if isinstance(f, Atom):
        return f"{f.rel}({','.join(f.args)})"
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Quant):
        return f"{f.q} {f.var} {render(f.body)}"
    left, right = render(f.left), render(f.right)
    if isinstance(f, Or):
        if isinstance(f.left, Quant):
            left = _wrap(left)
        if isinstance(f.right, (Or, Quant)):
            right = _wrap(right)
        return f"{left} | {right}"
    if isinstance(f.left, (Or, Quant)):
        left = _wrap(left)
    if isinstance(f.right, (And, Or, Quant)):
        right = _wrap(right)
    return f"{left} & {right}"


# ---------------------------------------------------------------- parsing

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+|\#[^\n]*)
  | (?P<nl>\n)
  | (?P<quant>(?:forall|exists)(?:!=|<|>|(?:E|N)(?![A-Za-z0-9_']))?(?![A-Za-z0-9_'])
             |[∀∃](?:!=|<|>|(?:E|N)(?![A-Za-z0-9_']))?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<comma>,)
  | (?P<and>&|∧)
  | (?P<or>\||∨)
  | (?P<banned>->|<->|!=|[!~¬=<>→↔])
    """,
    re.VERBOSE,
)

_BANNED_WORDS = {"not", "implies", "iff"}


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        lexeme = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "banned":
            raise FragmentError(f"{lexeme!r} is outside the positive equality-free fragment", line, col)
        elif kind == "ident" and lexeme in _BANNED_WORDS:
            raise FragmentError(f"{lexeme!r} is outside the positive equality-free fragment", line, col)
        elif kind != "ws":
            toks.append(_Tok(kind, lexeme, line, col))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


def _quantifier_from(lexeme: str) -> Quantifier:
    lexeme = lexeme.replace("∀", "forall").replace("∃", "exists")
    universal = lexeme.startswith("forall")
    rest = lexeme[6:]
    return Quantifier(universal, Guard(rest) if rest else None)


class _Parser:
    def __init__(self, text: str, free: Sequence[str]):
        self.toks = _tokenize(text)
        self.i = 0
        self.scope: list[str] = list(free)

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self, kind: str) -> _Tok:
        tok = self.toks[self.i]
        if tok.kind != kind:
            shown = tok.text or "end of input"
            raise ParseError(f"expected {kind}, found {shown!r}", tok.line, tok.col)
        self.i += 1
        return tok

    def sentence(self) -> Formula:
        tok = self.peek()
        if tok.kind == "quant":
            self.i += 1
            q = _quantifier_from(tok.text)
            var = self.take("ident")
            if var.text in self.scope:
                raise ParseError(f"variable {var.text!r} is already bound", var.line, var.col)
            self.scope.append(var.text)
            body = self.sentence()
            self.scope.pop()
            return Quant(q, var.text, body)
        return self.disj()

    def disj(self) -> Formula:
        f = self.conj()
        while self.peek().kind == "or":
            self.i += 1
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unit()
        while self.peek().kind == "and":
            self.i += 1
            f = And(f, self.unit())
        return f

    def unit(self) -> Formula:
        tok = self.peek()
        if tok.kind == "lparen":
            self.i += 1
            f = self.sentence()
            self.take("rparen")
            return f
        if tok.kind == "quant":
            raise ParseError("quantifier inside a connective must be parenthesised", tok.line, tok.col)
        name = self.take("ident")
        if name.text in ("true", "false") and self.peek().kind != "lparen":
            return Const(name.text == "true")
        self.take("lparen")
        args = [self._var()]
        while self.peek().kind == "comma":
            self.i += 1
            args.append(self._var())
        self.take("rparen")
        return Atom(name.text, tuple(args))

    def _var(self) -> str:
        tok = self.take("ident")
        if tok.text not in self.scope:
            raise UnboundVariableError(f"variable {tok.text!r} is not bound", tok.line, tok.col)
        return tok.text


def parse_formula(text: str, free: Sequence[str] = ()) -> Formula:
    """Parse ``text`` into a formula whose free variables are among ``free``."""
    p = _Parser(text, free)
    f = p.sentence()
    tok = p.peek()
    if tok.kind != "eof":
        raise ParseError(f"unexpected {tok.text!r}", tok.line, tok.col)
    return f


def parse_sentence(text: str) -> Formula:
    return parse_formula(text, ())


def parse_prenex(text: str, free: Sequence[str] = ()) -> PrenexSentence:
    f = parse_formula(text, free)
    try:
        return as_prenex(f, free)
    except TransformError:
        return to_prenex(f, free)


# ---------------------------------------------------------------- transforms


class _Fresh:
    def __init__(self, taken: Iterable[str]):
        self.taken = set(taken)
        self.k = 0

    def __call__(self, base: str) -> str:
        if base not in self.taken:
            self.taken.add(base)
            return base
        while True:
            self.k += 1
            name = f"v{self.k}"
            if name not in self.taken:
                self.taken.add(name)
                return name


def to_prenex(f: Formula, free: Sequence[str] = ()) -> PrenexSentence:
    """Pull every quantifier to the front, renaming bound variables apart.

    Extraction is left to right: the prefix of ``A & B`` is the prefix of ``A``
    followed by that of ``B``.  A bound variable keeps its name unless the
    name is already taken, in which case it becomes the first unused ``vK``.
    """
    if has_guards(f):
        raise TransformError("guarded quantifiers do not commute with plain ones; refusing to prenex")
    fresh = _Fresh(free)

    def go(g: Formula, env: dict[str, str]):
        if isinstance(g, Atom):
            return [], Atom(g.rel, tuple(env.get(v, v) for v in g.args))
        if isinstance(g, Const):
            return [], g
        if isinstance(g, Quant):
            name = fresh(g.var)
            prefix, matrix = go(g.body, {**env, g.var: name})
            return [(g.q, name)] + prefix, matrix
        pl, ml = go(g.left, env)
        pr, mr = go(g.right, env)
        return pl + pr, type(g)(ml, mr)

    prefix, matrix = go(f, {})
    return PrenexSentence(tuple(prefix), matrix, tuple(free))


def dual_formula(f):
    """Swap forall/exists and &/|, keeping atoms (read in the dual structure)."""
    if isinstance(f, PrenexSentence):
        return PrenexSentence(tuple((q.dual(), v) for q, v in f.prefix), dual_formula(f.matrix), f.free)
    if isinstance(f, Atom):
        return f
    if isinstance(f, Const):
        return Const(not f.value)
    if isinstance(f, And):
        return Or(dual_formula(f.left), dual_formula(f.right))
    if isinstance(f, Or):
        return And(dual_formula(f.left), dual_formula(f.right))
    return Quant(f.q.dual(), f.var, dual_formula(f.body))


SYMMETRIZE_CAP = 6


def symmetrize(f: Formula, variables: Sequence[str], cap: int = SYMMETRIZE_CAP) -> Formula:
    """Disjunction of ``f`` over every permutation of ``variables``.

    Syntactically identical disjuncts are merged, first occurrence kept.
    """
    variables = list(variables)
    n = len(variables)
    if n > cap:
        raise TransformError(f"symmetrize over {n} variables exceeds cap {cap}")
    if free_vars(f) != set(variables) or len(set(variables)) != n:
        raise TransformError("free variables of the formula must be exactly the given variables")
    seen: dict[Formula, None] = {}
    for perm in itertools.permutations(variables):
        g = _simultaneous_rename(f, dict(zip(variables, perm)))
        seen.setdefault(g)
    return disjoin(seen)


def _simultaneous_rename(f: Formula, mapping: dict[str, str]) -> Formula:
    if _bound_names(f) & set(mapping.values()):
        raise TransformError("renaming would capture a bound variable")
    return rename(f, mapping)


def _bound_names(f: Formula) -> set[str]:
    out = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Quant):
            out.add(g.var)
            stack.append(g.body)
        elif isinstance(g, (And, Or)):
            stack.extend((g.left, g.right))
    return out


def swap_quantifiers(s: PrenexSentence) -> PrenexSentence:
    """Hoist the innermost existential past the nearest universal before it.

    ``forall x exists z exists y M`` becomes ``exists y forall x exists z M``.
    Sound only where disjunction does not break; the transform itself is
    purely syntactic.
    """
    prefix = list(s.prefix)
    for j in range(len(prefix) - 1, -1, -1):
        if prefix[j][0].universal:
            continue
        outer = [i for i in range(j) if prefix[i][0].universal]
        if outer:
            i = outer[-1]
            moved = prefix.pop(j)
            prefix.insert(i, moved)
            return PrenexSentence(tuple(prefix), s.matrix, s.free)
    raise TransformError("no existential quantifier follows a universal one")


def fully_swap(s: PrenexSentence) -> PrenexSentence:
    """Iterate :func:`swap_quantifiers` until the prefix is exists* forall*."""
    while True:
        try:
            s = swap_quantifiers(s)
        except TransformError:
            return s
