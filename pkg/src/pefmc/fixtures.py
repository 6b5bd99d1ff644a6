"""Small named templates used throughout the tests, docs and CLI samples.

Finite domains are ``{0..m-1}``; where a structure is usually written over
``{1..m}`` its elements are shifted down by one.
"""

from __future__ import annotations

from .templates import Base, FiniteStructure, SymbolicTemplate

#: The complete graph on two vertices.
K2 = FiniteStructure.build(2, "K2", E=[(0, 1), (1, 0)])

#: One element, every relation full.
SINGLETON_FULL = FiniteStructure.build(1, "singleton", E=[(0, 0)], U=[(0,)])

#: Two elements, total binary relation.
FULL2 = FiniteStructure.build(2, "full2", E=[(a, b) for a in range(2) for b in range(2)])

#: Promise pair with three unary relations; the first ("A") is the smaller.
PROMISE_A = FiniteStructure.build(4, "promiseA", U1=[(0,)], U2=[(1,), (2,)], U3=[(2,), (3,)])
PROMISE_B = FiniteStructure.build(6, "promiseB", U1=[(0,), (1,), (2,)], U2=[(2,), (3,), (4,)], U3=[(3,), (4,), (5,)])

#: Promise pair whose unary relations are singletons on A and their complements on B.
TRIPLE_A = FiniteStructure.build(3, "tripleA", U1=[(0,)], U2=[(1,)], U3=[(2,)])
TRIPLE_B = FiniteStructure.build(3, "tripleB", U1=[(1,), (2,)], U2=[(0,), (2,)], U3=[(0,), (1,)])

#: (Q;=) with the equality relation named.
EQ = SymbolicTemplate.build(Base.EQUALITY, "Q_eq", Eq=(2, "eq(u1,u2)"))

#: (Q;!=).
NEQ = SymbolicTemplate.build(Base.EQUALITY, "Q_neq", Neq=(2, "!eq(u1,u2)"))

#: (Q;<).
LT = SymbolicTemplate.build(Base.ORDER, "Q_lt", Lt=(2, "lt(u1,u2)"))

#: The Random Graph with its edge relation.
GRAPH_E = SymbolicTemplate.build(Base.GRAPH, "V_E", E=(2, "E(u1,u2)"))

#: The Random Graph with only the non-edge relation (not an expansion of (V;E)).
GRAPH_N = SymbolicTemplate.build(Base.GRAPH, "V_N", N=(2, "N(u1,u2)"))

FINITE = {t.name: t for t in (K2, SINGLETON_FULL, FULL2, PROMISE_A, PROMISE_B, TRIPLE_A, TRIPLE_B)}
SYMBOLIC = {t.name: t for t in (EQ, NEQ, LT, GRAPH_E, GRAPH_N)}
