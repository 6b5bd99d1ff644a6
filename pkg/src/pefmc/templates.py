"""Finite structures, symbolic infinite templates and the configuration calculus.

A symbolic template is one of the three homogeneous base structures
(``(Q;=)``, ``(Q;<)``, the Random Graph) together with named relations given
by quantifier-free definitions over the base atoms.  Because the bases are
homogeneous, the truth of an atom on played elements depends only on the
*configuration*: the isomorphism type of the tuple played so far.
"""

from __future__ import annotations

import itertools
import json
import os
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Mapping, Sequence, Union

from .errors import BudgetError, ParseError, SignatureError

DEFAULT_GRAPH_CAP = 16


def graph_cap() -> int:
    """Adjacency cap for Random Graph extension enumeration (env ``PEFMC_CAP_R``)."""
    raw = os.environ.get("PEFMC_CAP_R")
    return int(raw) if raw else DEFAULT_GRAPH_CAP


# ---------------------------------------------------------------- finite


@dataclass(frozen=True)
class FiniteStructure:
    """Relational structure over the domain ``{0, ..., m-1}``."""

    domain: int
    relations: Mapping[str, tuple[int, frozenset]]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.domain < 1:
            raise ValueError("domain size must be positive")
        rels = {}
        for rel, (arity, tuples) in self.relations.items():
            if arity < 1:
                raise ValueError(f"relation {rel} must have positive arity")
            ts = frozenset(tuple(t) for t in tuples)
            for t in ts:
                if len(t) != arity:
                    raise ValueError(f"tuple {t} of {rel} has wrong arity")
                if any(not 0 <= x < self.domain for x in t):
                    raise ValueError(f"tuple {t} of {rel} leaves the domain")
            rels[rel] = (arity, ts)
        object.__setattr__(self, "relations", dict(sorted(rels.items())))

    @classmethod
    def build(cls, domain: int, name: str = "", **relations: Iterable[Sequence[int]]) -> FiniteStructure:
        """Convenience constructor: ``FiniteStructure.build(2, E=[(0, 1), (1, 0)])``."""
        rels = {}
        for rel, tuples in relations.items():
            tuples = [tuple(t) if not isinstance(t, int) else (t,) for t in tuples]
            if not tuples:
                raise ValueError(f"cannot infer arity of empty relation {rel}; use the constructor")
            rels[rel] = (len(tuples[0]), frozenset(tuples))
        return cls(domain, rels, name)

    @property
    def signature(self) -> dict[str, int]:
        return {rel: arity for rel, (arity, _) in self.relations.items()}

    def holds(self, rel: str, args: Sequence[int]) -> bool:
        return tuple(args) in self.relations[rel][1]

    def __hash__(self):
        return hash((self.domain, tuple((r, a, tuple(sorted(ts))) for r, (a, ts) in self.relations.items())))


def dual_structure(b: FiniteStructure) -> FiniteStructure:
    """Complement every relation within ``B^k``."""
    rels = {}
    for rel, (arity, tuples) in b.relations.items():
        everything = itertools.product(range(b.domain), repeat=arity)
        rels[rel] = (arity, frozenset(t for t in everything if t not in tuples))
    return FiniteStructure(b.domain, rels, b.name + "~" if b.name else "")


# ---------------------------------------------------------------- definitions


class Base(str, Enum):
    EQUALITY = "equality"
    ORDER = "order"
    GRAPH = "graph"


BASE_PREDICATES = {
    Base.EQUALITY: {"eq"},
    Base.ORDER: {"eq", "lt"},
    Base.GRAPH: {"eq", "E", "N"},
}


@dataclass(frozen=True)
class Literal:
    pred: str  # eq | lt | E | N
    i: int  # 0-based definition variable indices
    j: int
    positive: bool = True

    def __str__(self) -> str:
        return f"{'' if self.positive else '!'}{self.pred}(u{self.i + 1},u{self.j + 1})"


# DNF: a disjunction of conjunctions of literals.
Dnf = tuple[tuple[Literal, ...], ...]


@dataclass(frozen=True)
class _DAtom:
    lit: Literal


@dataclass(frozen=True)
class _DNot:
    arg: "_DNode"


@dataclass(frozen=True)
class _DBin:
    op: str  # "&" | "|"
    left: "_DNode"
    right: "_DNode"


@dataclass(frozen=True)
class _DConst:
    value: bool


_DNode = Union[_DAtom, _DNot, _DBin, _DConst]

_DEF_TOKEN = re.compile(r"\s*(?:(?P<atom>(eq|lt|E|N)\(\s*u(\d+)\s*,\s*u(\d+)\s*\))|(?P<const>true|false)|(?P<sym>[!&|()]))")


def _parse_definition(text: str) -> _DNode:
    toks = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _DEF_TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"bad relation definition near {text[pos:]!r}")
        if m.group("atom"):
            toks.append(("atom", Literal(m.group(2), int(m.group(3)) - 1, int(m.group(4)) - 1)))
        elif m.group("const"):
            toks.append(("const", m.group("const") == "true"))
        else:
            toks.append((m.group("sym"), None))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    toks.append(("eof", None))
    i = 0

    def disj():
        nonlocal i
        node = conj()
        while toks[i][0] == "|":
            i += 1
            node = _DBin("|", node, conj())
        return node

    def conj():
        nonlocal i
        node = unary()
        while toks[i][0] == "&":
            i += 1
            node = _DBin("&", node, unary())
        return node

    def unary():
        nonlocal i
        kind, val = toks[i]
        i += 1
        if kind == "!":
            return _DNot(unary())
        if kind == "atom":
            return _DAtom(val)
        if kind == "const":
            return _DConst(val)
        if kind == "(":
            node = disj()
            if toks[i][0] != ")":
                raise ParseError(f"unbalanced parentheses in definition {text!r}")
            i += 1
            return node
        raise ParseError(f"unexpected {kind!r} in definition {text!r}")

    node = disj()
    if toks[i][0] != "eof":
        raise ParseError(f"trailing input in definition {text!r}")
    return node


def _dnf(node: _DNode, negate: bool = False) -> list[frozenset[Literal]]:
    if isinstance(node, _DConst):
        return [frozenset()] if node.value != negate else []
    if isinstance(node, _DAtom):
        lit = node.lit
        if negate:
            lit = Literal(lit.pred, lit.i, lit.j, not lit.positive)
        return [frozenset([lit])]
    if isinstance(node, _DNot):
        return _dnf(node.arg, not negate)
    is_and = (node.op == "&") != negate
    left, right = _dnf(node.left, negate), _dnf(node.right, negate)
    if is_and:
        return [a | b for a in left for b in right]
    return left + right


def _normalize(clauses: Iterable[frozenset[Literal]]) -> Dnf:
    out: dict[tuple[Literal, ...], None] = {}
    for clause in clauses:
        out.setdefault(tuple(sorted(clause, key=lambda lit: (lit.pred, lit.i, lit.j, not lit.positive))))
    return tuple(out)


@dataclass(frozen=True)
class Definition:
    """Quantifier-free definition of a k-ary relation, kept in DNF."""

    arity: int
    dnf: Dnf

    @classmethod
    def parse(cls, arity: int, text: str, base: Base) -> Definition:
        node = _parse_definition(text)
        dnf = _normalize(_dnf(node))
        allowed = BASE_PREDICATES[base]
        for clause in dnf:
            for lit in clause:
                if lit.pred not in allowed:
                    raise ParseError(f"base atom {lit.pred} is not available over base {base.value}")
                if not (0 <= lit.i < arity and 0 <= lit.j < arity):
                    raise ParseError(f"definition of arity {arity} mentions u{max(lit.i, lit.j) + 1}")
        return cls(arity, dnf)

    def negated(self) -> Definition:
        clauses: list[frozenset[Literal]] = [frozenset()]
        for clause in self.dnf:
            flipped = [Literal(l.pred, l.i, l.j, not l.positive) for l in clause]
            clauses = [c | {lit} for c in clauses for lit in flipped]
        return Definition(self.arity, _normalize(clauses))

    def evaluate(self, args: Sequence, base_truth: Callable[[str, object, object], bool]) -> bool:
        for clause in self.dnf:
            if all(base_truth(l.pred, args[l.i], args[l.j]) == l.positive for l in clause):
                return True
        return False

    def __str__(self) -> str:
        if not self.dnf:
            return "false"
        parts = []
        for clause in self.dnf:
            parts.append(" & ".join(map(str, clause)) if clause else "true")
        return " | ".join(f"({p})" if " & " in p and len(parts) > 1 else p for p in parts)


@dataclass(frozen=True)
class SymbolicTemplate:
    base: Base
    relations: Mapping[str, Definition]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "base", Base(self.base))
        object.__setattr__(self, "relations", dict(sorted(self.relations.items())))

    @classmethod
    def build(cls, base: Base | str, name: str = "", **defs: tuple[int, str]) -> SymbolicTemplate:
        """``SymbolicTemplate.build("equality", Neq=(2, "!eq(u1,u2)"))``."""
        base = Base(base)
        return cls(base, {rel: Definition.parse(k, text, base) for rel, (k, text) in defs.items()}, name)

    @property
    def signature(self) -> dict[str, int]:
        return {rel: d.arity for rel, d in self.relations.items()}

    @property
    def is_expansion_of_e(self) -> bool:
        """True when some relation is defined exactly as ``E(u1,u2)``."""
        edge = ((Literal("E", 0, 1),),)
        return self.base is Base.GRAPH and any(d.arity == 2 and d.dnf == edge for d in self.relations.values())

    def __hash__(self):
        return hash((self.base, tuple(self.relations.items())))


def dual_template(t: SymbolicTemplate) -> SymbolicTemplate:
    """Complement every defined relation (the dual of an infinite template)."""
    return SymbolicTemplate(t.base, {r: d.negated() for r, d in t.relations.items()}, t.name + "~" if t.name else "")


def dual(template):
    if isinstance(template, FiniteStructure):
        return dual_structure(template)
    return dual_template(template)


def realize_finite(t: SymbolicTemplate, size: int) -> FiniteStructure:
    """Interpret an equality or order template on ``{0..size-1}`` with the usual = and <."""
    if t.base is Base.GRAPH:
        raise ValueError("graph templates have no finite realisation")

    def truth(pred, a, b):
        return a == b if pred == "eq" else a < b

    rels = {}
    for rel, d in t.relations.items():
        tuples = frozenset(
            tup for tup in itertools.product(range(size), repeat=d.arity) if d.evaluate(tup, truth)
        )
        rels[rel] = (d.arity, tuples)
    return FiniteStructure(size, rels, f"{t.name or t.base.value}[{size}]")


# ---------------------------------------------------------------- configurations


@dataclass(frozen=True)
class Reuse:
    index: int


@dataclass(frozen=True)
class New:
    """Fresh class.  ``placement`` is None (equality), a gap index (order:
    0 = below everything, r = above everything) or an adjacency tuple
    with True for E and False for N (graph)."""

    placement: object = None


ExtensionChoice = Union[Reuse, New]


@dataclass(frozen=True)
class Configuration:
    """Isomorphism type of the variables played so far.

    ``assignment`` lists ``(variable, class)`` in play order.  For the
    equality and graph bases classes are numbered by first use; for the
    order base the class index *is* its rank.  ``adjacency[i]`` holds the
    E/N pattern of class ``i`` towards classes ``0..i-1`` (graph only).
    """

    base: Base
    assignment: tuple[tuple[str, int], ...] = ()
    adjacency: tuple[tuple[bool, ...], ...] = ()

    @property
    def class_count(self) -> int:
        return len({c for _, c in self.assignment})

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.assignment)

    def class_of(self, var: str) -> int:
        for v, c in self.assignment:
            if v == var:
                return c
        raise KeyError(var)

    def edge(self, i: int, j: int) -> bool:
        if i == j:
            return False
        hi, lo = max(i, j), min(i, j)
        return self.adjacency[hi][lo]

    def base_truth(self, pred: str, i: int, j: int) -> bool:
        if pred == "eq":
            return i == j
        if pred == "lt":
            return i < j
        if pred == "E":
            return i != j and self.edge(i, j)
        if pred == "N":
            return i != j and not self.edge(i, j)
        raise ValueError(pred)

    def key(self) -> bytes:
        """Canonical byte encoding; equal configurations have equal keys."""
        payload = [self.base.value, [list(p) for p in self.assignment], [list(map(int, r)) for r in self.adjacency]]
        return json.dumps(payload, separators=(",", ":")).encode()

    def restrict(self, variables: Iterable[str]) -> Configuration:
        keep = set(variables)
        return canonical(self.base, [(v, c) for v, c in self.assignment if v in keep], self.edge)

    def reorder(self, order: Sequence[str]) -> Configuration:
        """Same type with the variables listed in ``order`` (re-canonicalised)."""
        classes = dict(self.assignment)
        return canonical(self.base, [(v, classes[v]) for v in order], self.edge)

    @classmethod
    def from_values(
        cls, base: Base, pairs: Sequence[tuple[str, object]], edge: Callable[[object, object], bool] | None = None
    ) -> Configuration:
        """Type of concrete elements: rationals for order, vertices + ``edge`` for graphs."""
        return canonical(Base(base), list(pairs), edge)


def canonical(base: Base, pairs: Sequence[tuple[str, object]], edge: Callable | None = None) -> Configuration:
    """Canonical configuration of ``(variable, element)`` pairs.

    Elements may be arbitrary labels; equal labels are one class.  For
    the order base labels must be comparable, for the graph base ``edge``
    gives the adjacency between distinct labels.
    """
    if base is Base.ORDER:
        ranks = {x: r for r, x in enumerate(sorted({x for _, x in pairs}))}
        return Configuration(base, tuple((v, ranks[x]) for v, x in pairs))
    index: dict[object, int] = {}
    for _, x in pairs:
        index.setdefault(x, len(index))
    assignment = tuple((v, index[x]) for v, x in pairs)
    adjacency: tuple[tuple[bool, ...], ...] = ()
    if base is Base.GRAPH:
        labels = list(index)
        adjacency = tuple(tuple(bool(edge(labels[i], labels[j])) for j in range(i)) for i in range(len(labels)))
    return Configuration(base, assignment, adjacency)


def enumerate_extensions(c: Configuration, base: Base | None = None, cap: int | None = None) -> list[ExtensionChoice]:
    """Every 1-point extension type of ``c``, duplicate-free, in canonical order."""
    base = Base(base) if base is not None else c.base
    r = c.class_count
    reuse: list[ExtensionChoice] = [Reuse(i) for i in range(r)]
    if base is Base.EQUALITY:
        return reuse + [New()]
    if base is Base.ORDER:
        return reuse + [New(g) for g in range(r + 1)]
    cap = graph_cap() if cap is None else cap
    if r > cap:
        raise BudgetError(f"random-graph configuration with {r} classes exceeds cap {cap}")
    return reuse + [New(vec) for vec in itertools.product((False, True), repeat=r)]


def is_valid_choice(c: Configuration, choice: ExtensionChoice) -> bool:
    r = c.class_count
    if isinstance(choice, Reuse):
        return 0 <= choice.index < r
    if c.base is Base.EQUALITY:
        return choice.placement is None
    if c.base is Base.ORDER:
        return isinstance(choice.placement, int) and 0 <= choice.placement <= r
    p = choice.placement
    return isinstance(p, tuple) and len(p) == r and all(isinstance(b, bool) for b in p)


def extend_configuration(c: Configuration, choice: ExtensionChoice, var: str) -> Configuration:
    if var in c.variables:
        raise ValueError(f"variable {var} already played")
    if not is_valid_choice(c, choice):
        raise ValueError(f"invalid extension {choice} for configuration with {c.class_count} classes")
    if isinstance(choice, Reuse):
        return Configuration(c.base, c.assignment + ((var, choice.index),), c.adjacency)
    r = c.class_count
    if c.base is Base.ORDER:
        g = choice.placement
        shifted = tuple((v, k + 1 if k >= g else k) for v, k in c.assignment)
        return Configuration(c.base, shifted + ((var, g),))
    adjacency = c.adjacency
    if c.base is Base.GRAPH:
        adjacency = adjacency + (tuple(choice.placement),)
    return Configuration(c.base, c.assignment + ((var, r),), adjacency)


def atom_truth(c: Configuration, template: SymbolicTemplate, rel: str, classes: Sequence[int]) -> bool:
    """Truth of ``rel`` on the given classes of ``c``."""
    if rel not in template.relations:
        raise SignatureError(f"unknown relation {rel}")
    d = template.relations[rel]
    if len(classes) != d.arity:
        raise SignatureError(f"{rel} has arity {d.arity}, got {len(classes)} arguments")
    r = c.class_count
    if any(not 0 <= k < r for k in classes):
        raise ValueError(f"class index out of range in {tuple(classes)}")
    return d.evaluate(classes, c.base_truth)


# ---------------------------------------------------------------- I/O


def template_from_json(data: Mapping) -> FiniteStructure | SymbolicTemplate:
    kind = data.get("kind")
    name = data.get("name", "")
    try:
        if kind == "finite":
            rels = {}
            for rel, entry in data["relations"].items():
                rels[rel] = (int(entry["arity"]), frozenset(tuple(t) for t in entry["tuples"]))
            return FiniteStructure(int(data["domain"]), rels, name)
        if kind == "symbolic":
            base = Base(data["base"])
            defs = {rel: Definition.parse(int(entry["arity"]), entry["def"], base) for rel, entry in data["relations"].items()}
            t = SymbolicTemplate(base, defs, name)
            if data.get("expansionOfE") and not t.is_expansion_of_e:
                raise ParseError("template is flagged as an expansion of (V;E) but no relation is E(u1,u2)")
            return t
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"malformed template: {exc}") from exc
    raise ParseError(f"unknown template kind {kind!r}")


def template_to_json(t: FiniteStructure | SymbolicTemplate) -> dict:
    if isinstance(t, FiniteStructure):
        rels = {
            rel: {"arity": arity, "tuples": [list(x) for x in sorted(tuples)]}
            for rel, (arity, tuples) in t.relations.items()
        }
        out = {"kind": "finite", "domain": t.domain, "relations": rels}
    else:
        rels = {rel: {"arity": d.arity, "def": str(d)} for rel, d in t.relations.items()}
        out = {"kind": "symbolic", "base": t.base.value, "relations": rels}
        if t.is_expansion_of_e:
            out["expansionOfE"] = True
    if t.name:
        out["name"] = t.name
    return out


def load_template(path: str | os.PathLike) -> FiniteStructure | SymbolicTemplate:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: {exc.msg}", exc.lineno, exc.colno) from exc
    t = template_from_json(data)
    if not t.name:
        object.__setattr__(t, "name", os.path.splitext(os.path.basename(str(path)))[0])
    return t


def dump_template(t: FiniteStructure | SymbolicTemplate, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(template_to_json(t), fh, indent=2, sort_keys=True)
        fh.write("\n")
