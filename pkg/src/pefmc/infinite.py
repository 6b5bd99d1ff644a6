"""Type-based game solving on the symbolic templates.

Players choose 1-point extension types of the current configuration instead
of concrete elements.  Guards (and the strategy policies built on them)
restrict a quantifier to fresh classes of a particular shape; on the three
homogeneous bases each guarded move except ``!=`` over order/graph has a
unique type.
"""

from __future__ import annotations

from enum import Enum
from typing import Sequence

from .errors import CertificateError, PolicyError, TransformError
from .finite import check_signature
from .formula import (
    And,
    Atom,
    Const,
    Formula,
    Guard,
    Or,
    PrenexSentence,
    Quantifier,
    as_prenex,
    has_guards,
    occurring_vars,
    to_prenex,
)
from .templates import (
    Base,
    Configuration,
    ExtensionChoice,
    New,
    SymbolicTemplate,
    enumerate_extensions,
    extend_configuration,
    is_valid_choice,
)

GUARDS_BY_BASE = {
    Base.EQUALITY: {Guard.NEQ},
    Base.ORDER: {Guard.NEQ, Guard.BELOW, Guard.ABOVE},
    Base.GRAPH: {Guard.NEQ, Guard.E, Guard.N},
}


class UniversalPolicy(str, Enum):
    UNRESTRICTED = "none"
    ALL_DIFFERENT = "alldiff"
    ALL_BELOW = "below"
    ALL_ABOVE = "above"
    ALL_N = "allN"
    ALL_E = "allE"

    @property
    def guard(self) -> Guard | None:
        return _POLICY_GUARDS[self.value]


class ExistentialPolicy(str, Enum):
    UNRESTRICTED = "none"
    EXISTS_E = "existsE"
    EXISTS_N = "existsN"
    EXISTS_DIFFERENT = "existsdiff"
    EXISTS_BELOW = "existsbelow"
    EXISTS_ABOVE = "existsabove"

    @property
    def guard(self) -> Guard | None:
        return _POLICY_GUARDS[self.value]


_POLICY_GUARDS = {
    "none": None,
    "alldiff": Guard.NEQ,
    "below": Guard.BELOW,
    "above": Guard.ABOVE,
    "allN": Guard.N,
    "allE": Guard.E,
    "existsE": Guard.E,
    "existsN": Guard.N,
    "existsdiff": Guard.NEQ,
    "existsbelow": Guard.BELOW,
    "existsabove": Guard.ABOVE,
}

Certificate = Sequence[ExtensionChoice]


def guarded_choices(c: Configuration, guard: Guard | None, cap: int | None = None) -> list[ExtensionChoice]:
    """Extension types of ``c`` allowed by ``guard``."""
    r = c.class_count
    if guard is None:
        return enumerate_extensions(c, cap=cap)
    if guard not in GUARDS_BY_BASE[c.base]:
        raise PolicyError(f"guard {guard.value} is not available over base {c.base.value}")
    if guard is Guard.BELOW:
        return [New(0)]
    if guard is Guard.ABOVE:
        return [New(r)]
    if guard is Guard.E:
        return [New((True,) * r)]
    if guard is Guard.N:
        return [New((False,) * r)]
    return [ch for ch in enumerate_extensions(c, cap=cap) if isinstance(ch, New)]


def _prenex(s: PrenexSentence | Formula) -> PrenexSentence:
    if isinstance(s, PrenexSentence):
        return s
    try:
        return as_prenex(s)
    except TransformError:
        if has_guards(s):
            raise
        return to_prenex(s)


def _check_guards(t: SymbolicTemplate, s: PrenexSentence) -> None:
    for q, _ in s.prefix:
        if q.guard is not None and q.guard not in GUARDS_BY_BASE[t.base]:
            raise PolicyError(f"guard {q.guard.value} is not available over base {t.base.value}")


def _compile(matrix: Formula, t: SymbolicTemplate):
    if isinstance(matrix, Atom):
        d, args = t.relations[matrix.rel], matrix.args

        def atom(c: Configuration, cls: dict[str, int]) -> bool:
            return d.evaluate([cls[v] for v in args], c.base_truth)

        return atom
    if isinstance(matrix, Const):
        value = matrix.value
        return lambda c, cls: value
    left, right = _compile(matrix.left, t), _compile(matrix.right, t)
    if isinstance(matrix, And):
        return lambda c, cls: left(c, cls) and right(c, cls)
    if isinstance(matrix, Or):
        return lambda c, cls: left(c, cls) or right(c, cls)
    raise ValueError("matrix must be quantifier-free")


def matrix_truth(t: SymbolicTemplate, matrix: Formula, c: Configuration) -> bool:
    """Truth of a quantifier-free formula whose variables are all played in ``c``."""
    check_signature(t.signature, matrix)
    return _compile(matrix, t)(c, dict(c.assignment))


def _solve(t: SymbolicTemplate, s: PrenexSentence, config: Configuration | None, cap: int | None) -> bool:
    check_signature(t.signature, s.matrix)
    _check_guards(t, s)
    if config is None:
        config = Configuration(t.base)
    if config.base is not t.base:
        raise ValueError("configuration and template have different bases")
    missing = set(s.free) - set(config.variables)
    if missing:
        raise ValueError(f"free variables {sorted(missing)} are not in the configuration")
    if set(s.variables) & set(config.variables):
        raise ValueError("prefix variables clash with the configuration")
    in_matrix = set(occurring_vars(s.matrix))
    matrix = _compile(s.matrix, t)
    prefix = s.prefix
    n = len(prefix)
    cache: dict[tuple[int, Configuration], bool] = {}

    def node(pos: int, c: Configuration) -> bool:
        if pos == n:
            return matrix(c, dict(c.assignment))
        key = (pos, c)
        hit = cache.get(key)
        if hit is not None:
            return hit
        q, var = prefix[pos]
        if var not in in_matrix:
            result = node(pos + 1, c)
        else:
            children = (node(pos + 1, extend_configuration(c, ch, var)) for ch in guarded_choices(c, q.guard, cap))
            result = all(children) if q.universal else any(children)
        cache[key] = result
        return result

    return node(0, config.restrict(in_matrix))


def eval_infinite(
    t: SymbolicTemplate,
    s: PrenexSentence | Formula,
    config: Configuration | None = None,
    cap: int | None = None,
) -> bool:
    """Exact game value over the configuration space of ``t``.

    ``config`` supplies the type of the free variables, if any.  Guarded
    quantifiers in the sentence are honoured.
    """
    return _solve(t, _prenex(s), config, cap)


def apply_policies(
    s: PrenexSentence, up: UniversalPolicy = UniversalPolicy.UNRESTRICTED, ep: ExistentialPolicy = ExistentialPolicy.UNRESTRICTED
) -> PrenexSentence:
    """Guard every unguarded quantifier with the matching policy's guard."""
    up, ep = UniversalPolicy(up), ExistentialPolicy(ep)
    prefix = []
    for q, v in s.prefix:
        if q.guard is None:
            q = Quantifier(q.universal, up.guard if q.universal else ep.guard)
        prefix.append((q, v))
    return PrenexSentence(tuple(prefix), s.matrix, s.free)


def check_policies(t: SymbolicTemplate, up: UniversalPolicy, ep: ExistentialPolicy) -> None:
    for policy in (UniversalPolicy(up), ExistentialPolicy(ep)):
        if policy.guard is not None and policy.guard not in GUARDS_BY_BASE[t.base]:
            raise PolicyError(f"policy {policy.value} is not compatible with base {t.base.value}")


def eval_restricted(
    t: SymbolicTemplate,
    s: PrenexSentence | Formula,
    up: UniversalPolicy = UniversalPolicy.UNRESTRICTED,
    ep: ExistentialPolicy = ExistentialPolicy.UNRESTRICTED,
    config: Configuration | None = None,
    cap: int | None = None,
) -> bool:
    """Game value when Universal and/or Existential follow a fixed strategy."""
    check_policies(t, up, ep)
    return _solve(t, apply_policies(_prenex(s), up, ep), config, cap)


def _universal_move(c: Configuration, q: Quantifier, up: UniversalPolicy, step: int) -> ExtensionChoice:
    guard = q.guard if q.guard is not None else up.guard
    if guard is None:
        raise PolicyError("certificates need a universal policy")
    choices = guarded_choices(c, guard)
    if len(choices) != 1:
        raise PolicyError(f"policy {up.value} does not fix a unique universal move at step {step}")
    return choices[0]


def verify_certificate(
    t: SymbolicTemplate, s: PrenexSentence | Formula, up: UniversalPolicy, cert: Certificate
) -> bool:
    """Replay the single universal line against the certified existential moves."""
    s = _prenex(s)
    up = UniversalPolicy(up)
    if s.free:
        raise ValueError("certificates are for sentences")
    check_policies(t, up, ExistentialPolicy.UNRESTRICTED)
    check_signature(t.signature, s.matrix)
    n_exists = sum(1 for q, _ in s.prefix if not q.universal)
    if len(cert) != n_exists:
        raise CertificateError(f"certificate has {len(cert)} moves, sentence has {n_exists} existentials", len(cert))
    c = Configuration(t.base)
    k = 0
    for q, var in s.prefix:
        if q.universal:
            choice = _universal_move(c, q, up, k)
        else:
            choice = cert[k]
            if not is_valid_choice(c, choice):
                raise CertificateError(f"{choice} is not an extension of a {c.class_count}-class configuration", k)
            if q.guard is not None and choice not in guarded_choices(c, q.guard):
                raise CertificateError(f"{choice} violates the guard {q.guard.value}", k)
            k += 1
        c = extend_configuration(c, choice, var)
    return matrix_truth(t, s.matrix, c)


def find_certificate(t: SymbolicTemplate, s: PrenexSentence | Formula, up: UniversalPolicy) -> list[ExtensionChoice] | None:
    """Exhaustive depth-first search for a certificate; None if none exists."""
    s = _prenex(s)
    up = UniversalPolicy(up)
    check_policies(t, up, ExistentialPolicy.UNRESTRICTED)
    check_signature(t.signature, s.matrix)
    prefix = s.prefix

    def search(pos: int, c: Configuration, moves: list[ExtensionChoice]):
        if pos == len(prefix):
            return list(moves) if matrix_truth(t, s.matrix, c) else None
        q, var = prefix[pos]
        if q.universal:
            return search(pos + 1, extend_configuration(c, _universal_move(c, q, up, len(moves)), var), moves)
        for choice in guarded_choices(c, q.guard):
            moves.append(choice)
            found = search(pos + 1, extend_configuration(c, choice, var), moves)
            moves.pop()
            if found is not None:
                return found
        return None

    return search(0, Configuration(t.base), [])
