"""Evaluation of positive equality-free sentences on finite structures."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from .errors import PolicyError, SignatureError
from .formula import (
    And,
    Atom,
    Const,
    Formula,
    Guard,
    Or,
    PrenexSentence,
    as_prenex,
    free_vars,
    occurring_vars,
    relations_used,
)
from .templates import FiniteStructure


class Method(str, Enum):
    BRUTE_FORCE = "BruteForce"
    ATOM_PUSHING = "AtomPushing"
    SWAP_REDUCED = "SwapReduced"


@dataclass(frozen=True)
class EvalReport:
    verdict: bool
    nodes_visited: int
    method: Method = Method.BRUTE_FORCE


def check_signature(signature: dict[str, int], f: Formula) -> None:
    for rel, arity in relations_used(f).items():
        if rel not in signature:
            raise SignatureError(f"relation {rel} is not in the template signature {sorted(signature)}")
        if signature[rel] != arity:
            raise SignatureError(f"relation {rel} has arity {signature[rel]} but is used with {arity}")


def compile_matrix(matrix: Formula, index: dict[str, int], holds: Callable[[str, tuple], bool]):
    """Turn a quantifier-free matrix into a predicate over a value list."""
    if isinstance(matrix, Atom):
        rel, idx = matrix.rel, tuple(index[v] for v in matrix.args)
        return lambda vals: holds(rel, tuple(vals[i] for i in idx))
    if isinstance(matrix, Const):
        value = matrix.value
        return lambda vals: value
    left = compile_matrix(matrix.left, index, holds)
    right = compile_matrix(matrix.right, index, holds)
    if isinstance(matrix, And):
        return lambda vals: left(vals) and right(vals)
    if isinstance(matrix, Or):
        return lambda vals: left(vals) or right(vals)
    raise ValueError("matrix must be quantifier-free")


def eval_finite(b: FiniteStructure, s: PrenexSentence | Formula, memo: bool = True) -> EvalReport:
    """Game value of a prenex sentence on ``b``.

    Existential nodes are ORs and universal nodes ANDs over the ``m``
    elements.  With ``memo`` the value of a node is cached under its prefix
    position and the values of the already-played variables that still occur
    in the matrix.  ``nodes_visited`` counts matrix evaluations, so it never
    exceeds ``m ** n``.
    """
    s = as_prenex(s)
    if s.free:
        raise ValueError("eval_finite expects a sentence")
    if s.has_guards():
        raise PolicyError("guarded quantifiers need eval_finite_guarded")
    check_signature(b.signature, s.matrix)
    n = len(s.prefix)
    index = {v: i for i, (_, v) in enumerate(s.prefix)}
    rels = b.relations
    matrix = compile_matrix(s.matrix, index, lambda rel, t: t in rels[rel][1])
    in_matrix = set(occurring_vars(s.matrix))
    live = [tuple(i for i in range(pos) if s.prefix[i][1] in in_matrix) for pos in range(n + 1)]
    universal = [q.universal for q, _ in s.prefix]
    domain = range(b.domain)
    vals = [0] * n
    cache: dict = {}
    visited = 0

    def node(pos: int) -> bool:
        nonlocal visited
        if pos == n:
            visited += 1
            return matrix(vals)
        if memo:
            key = (pos, tuple(vals[i] for i in live[pos]))
            hit = cache.get(key)
            if hit is not None:
                return hit
        if s.prefix[pos][1] not in in_matrix:
            result = node(pos + 1)
        elif universal[pos]:
            result = True
            for x in domain:
                vals[pos] = x
                if not node(pos + 1):
                    result = False
                    break
        else:
            result = False
            for x in domain:
                vals[pos] = x
                if node(pos + 1):
                    result = True
                    break
        if memo:
            cache[key] = result
        return result

    return EvalReport(node(0), visited)


def eval_formula(b: FiniteStructure, f: Formula, env: dict[str, int] | None = None) -> bool:
    """Recursive evaluation of an arbitrary (nested, possibly guarded) formula.

    A ``!=`` guard ranges over the elements distinct from every variable
    bound in ``env`` at that point; with no such element a universal is
    vacuously true and an existential false.
    """
    env = dict(env or {})
    missing = free_vars(f) - env.keys()
    if missing:
        raise ValueError(f"unassigned free variables {sorted(missing)}")
    check_signature(b.signature, f)
    return _eval(b, f, env)


def _eval(b: FiniteStructure, f: Formula, env: dict[str, int]) -> bool:
    if isinstance(f, Atom):
        return tuple(env[v] for v in f.args) in b.relations[f.rel][1]
    if isinstance(f, Const):
        return f.value
    if isinstance(f, And):
        return _eval(b, f.left, env) and _eval(b, f.right, env)
    if isinstance(f, Or):
        return _eval(b, f.left, env) or _eval(b, f.right, env)
    if f.q.guard is None:
        candidates = range(b.domain)
    elif f.q.guard is Guard.NEQ:
        used = set(env.values())
        candidates = [x for x in range(b.domain) if x not in used]
    else:
        raise PolicyError(f"guard {f.q.guard.value} is not supported on finite structures")
    test = all if f.q.universal else any
    return test(_eval(b, f.body, {**env, f.var: x}) for x in candidates)


def eval_finite_guarded(b: FiniteStructure, f: Formula | PrenexSentence) -> bool:
    if isinstance(f, PrenexSentence):
        f = f.to_formula()
    if free_vars(f):
        raise ValueError("eval_finite_guarded expects a sentence")
    return eval_formula(b, f)


def quantified_atom(s: PrenexSentence, atom: Atom) -> PrenexSentence:
    """The atom under the sentence's quantifiers restricted to its own variables."""
    keep = set(atom.args)
    return PrenexSentence(tuple((q, v) for q, v in s.prefix if v in keep), atom)


def eval_by_atom_pushing(b: FiniteStructure, s: PrenexSentence | Formula, certificate=None) -> tuple[bool, bool]:
    """Evaluate by pushing every quantifier down onto the atoms.

    Each atom ``R(z...)`` is replaced by the truth of the sentence that
    quantifies just its variables, in their original prefix order; the
    remaining Boolean combination is then evaluated.  This is only correct
    when neither conjunction nor disjunction breaks on ``b``, so the second
    component reports whether ``certificate`` (an object with
    ``verify(b) -> bool``, e.g. a forall-exists surjective hyper-endomorphism)
    vouches for that.
    """
    s = as_prenex(s)
    check_signature(b.signature, s.matrix)
    table: dict[PrenexSentence, bool] = {}

    def value(f: Formula) -> bool:
        if isinstance(f, Atom):
            q = quantified_atom(s, f)
            if q not in table:
                table[q] = eval_finite(b, q).verdict
            return table[q]
        if isinstance(f, Const):
            return f.value
        if isinstance(f, And):
            return value(f.left) and value(f.right)
        return value(f.left) or value(f.right)

    valid = certificate is not None and bool(certificate.verify(b))
    return value(s.matrix), valid


def all_structures(domain: int, signature: dict[str, int]):
    """Every structure with the given domain size and signature (small inputs only)."""
    names = sorted(signature)
    spaces = [list(itertools.product(range(domain), repeat=signature[r])) for r in names]
    for masks in itertools.product(*[range(1 << len(sp)) for sp in spaces]):
        rels = {}
        for r, sp, mask in zip(names, spaces, masks):
            rels[r] = (signature[r], frozenset(t for k, t in enumerate(sp) if mask >> k & 1))
        yield FiniteStructure(domain, rels)
