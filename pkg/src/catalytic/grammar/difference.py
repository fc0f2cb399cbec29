"""Strongly connected system through level-to-level differences.

Raising start, end and floor of a path count by one can only add paths,
because step sets grow with the level.  Writing each excursion count as the
floor-0 excursion plus its successive increments (``D_j``) and each
level-returning walk as the level-0 walk plus increments (``B_j``), and
expressing every increment by the difference of two decompositions that
match term by term, yields a positive system in which the floor-0 excursion
depends on everything it feeds.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import networkx as nx

from ..algebra import Monomial, PositivePolynomialSystem, merge_monomials, var_key
from ..errors import MonotonicityError
from ..model import StepTable
from .finite import DecompositionRules
from .primewalks import PrimeWalkClassification
from .variables import AbarVar, AVar, BVar, DiffVar, DVar, FVar


@dataclass
class DifferenceSystem:
    system: PositivePolynomialSystem  # everything reachable from the roots
    core: tuple  # strongly connected component of the root
    root: object
    strongly_connected: bool
    removed_zero: tuple = ()
    chains: dict = field(default_factory=dict)  # chain variable -> (base, increments)

    def core_system(self) -> PositivePolynomialSystem:
        core = set(self.core)
        return PositivePolynomialSystem({v: self.system.rhs[v] for v in self.core}, self.core) if all(
            w in core for v in self.core for m in self.system.rhs[v] for w in m.vars
        ) else self.system.restrict(self.core)


class _Builder:
    def __init__(self, table: StepTable, cls: PrimeWalkClassification):
        self.rules = DecompositionRules(table, cls)
        self.cls = cls
        self.K = cls.floor
        self.typed = table.d > 1
        self.types = range(1, table.d + 1)

    # level shift -----------------------------------------------------------
    def up(self, v):
        if isinstance(v, FVar):
            return self.rules.F(v.s, v.t, v.k1 + 1, v.k2 + 1, v.k + 1)
        if isinstance(v, AVar):
            return self.rules.A(v.s, v.t, v.k + 1, v.i)
        if isinstance(v, AbarVar):
            return self.rules.Ab(v.s, v.t, v.k + 1, v.i)
        raise TypeError(v)

    def down(self, v):
        """The variable whose upward shift is ``v``; None at floor 0."""
        if isinstance(v, FVar):
            return FVar(v.s, v.t, v.k1 - 1, v.k2 - 1, v.k - 1, v.typed) if v.k >= 1 else None
        if isinstance(v, AVar):
            return AVar(v.s, v.t, v.k - 1, v.i, v.typed) if v.k >= 1 else None
        if isinstance(v, AbarVar):
            return AbarVar(v.s, v.t, v.k - 1, v.i, v.typed) if v.k - v.i >= 1 else None
        return None

    # chains ------------------------------------------------------------------
    def chain(self, v):
        """(base, increments) when v is an excursion or a returning walk above 0."""
        if isinstance(v, FVar) and v.k1 == v.k2 == v.k and 1 <= v.k <= self.K:
            base = FVar(v.s, v.t, 0, 0, 0, self.typed)
            return base, [DVar(v.s, v.t, j, self.typed) for j in range(1, v.k + 1)]
        if isinstance(v, AVar) and v.i == 0 and 1 <= v.k <= self.K:
            base = AVar(v.s, v.t, 0, 0, self.typed)
            return base, [BVar(v.s, v.t, j, self.typed) for j in range(1, v.k + 1)]
        return None

    def delta(self, v):
        """Name of ``v - down(v)``."""
        if isinstance(v, FVar) and v.k1 == v.k2 == v.k:
            return DVar(v.s, v.t, v.k, self.typed)
        if isinstance(v, AVar) and v.i == 0:
            return BVar(v.s, v.t, v.k, self.typed)
        return DiffVar(v)

    def upper_of(self, dv):
        if isinstance(dv, DVar):
            return FVar(dv.s, dv.t, dv.j, dv.j, dv.j, self.typed)
        if isinstance(dv, BVar):
            return AVar(dv.s, dv.t, dv.j, 0, self.typed)
        return dv.upper

    # equations -----------------------------------------------------------------
    def raw(self, v) -> list[Monomial]:
        return list(merge_monomials(self.rules.raw_rhs(v)))

    def expand(self, monos) -> list[Monomial]:
        """Substitute known walks and split chain variables into increments."""
        monos = self.rules.substitute(monos)
        out = []
        for m in monos:
            terms = [Monomial(m.coef, m.xexp)]
            for w in m.vars:
                ch = self.chain(w)
                parts = [w] if ch is None else [ch[0]] + ch[1]
                terms = [t.times(1, 0, (p,)) for t in terms for p in parts]
            out.extend(terms)
        return list(merge_monomials(out))

    def difference(self, U) -> list[Monomial]:
        """Right-hand side of ``U - down(U)`` as a positive expression."""
        P = self.down(U)
        upper = {(m.xexp, m.vars): m.coef for m in self.raw(U)}
        used: dict = {}
        out = []
        for m in self.raw(P):
            shifted = tuple(sorted((self.up(w) for w in m.vars), key=var_key))
            key = (m.xexp, shifted)
            avail = upper.get(key, 0) - used.get(key, 0)
            if avail < m.coef:
                raise MonotonicityError(f"term {m} of {P} has no counterpart in the equation of {U}")
            used[key] = used.get(key, 0) + m.coef
            # new_1 ... new_{i-1} * delta_i * old_{i+1} ... old_r
            olds = list(m.vars)
            news = [self.up(w) for w in olds]
            for i, (o, n) in enumerate(zip(olds, news)):
                if o == n:
                    continue
                out.append(Monomial(m.coef, m.xexp, tuple(news[:i]) + (self.delta(n),) + tuple(olds[i + 1 :])))
        for (e, vars_), c in upper.items():
            rest = c - used.get((e, vars_), 0)
            if rest:
                out.append(Monomial(rest, e, vars_))
        return out

    def equation(self, v) -> list[Monomial]:
        if isinstance(v, (DVar, BVar, DiffVar)):
            return self.expand(self.difference(self.upper_of(v)))
        return self.expand(self.raw(v))


def _nonzero_variables(rhs: dict) -> set:
    alive: set = set()
    changed = True
    while changed:
        changed = False
        for v, monos in rhs.items():
            if v not in alive and any(all(w in alive for w in m.vars) for m in monos):
                alive.add(v)
                changed = True
    return alive


def build_difference_system(
    table: StepTable,
    cls: PrimeWalkClassification,
    roots: list | None = None,
    extra: dict | None = None,
) -> DifferenceSystem:
    """Closure of the increment equations from the floor-0 excursion.

    ``extra`` maps additional variables to raw right-hand sides in terms of
    path and walk variables (for instance a weighted combination of path
    counts); they are expanded like every other equation.  The first root
    designates the component that is returned as core.
    """
    b = _Builder(table, cls)
    typed = table.d > 1
    root = FVar(1, 1, 0, 0, 0, typed)
    roots = list(roots) if roots else [root]
    extra = dict(extra or {})
    rhs: dict = {}
    queue = deque(roots + list(extra))
    while queue:
        v = queue.popleft()
        if v in rhs:
            continue
        monos = b.expand(extra[v]) if v in extra else b.equation(v)
        rhs[v] = monos
        for m in monos:
            for w in m.vars:
                if w not in rhs:
                    queue.append(w)
    alive = _nonzero_variables(rhs)
    removed = tuple(sorted((v for v in rhs if v not in alive), key=var_key))
    pruned = {
        v: [m for m in monos if all(w in alive for w in m.vars)] for v, monos in rhs.items() if v in alive
    }
    system = PositivePolynomialSystem(pruned)
    graph = nx.DiGraph()
    graph.add_nodes_from(system.variables)
    for v in system.variables:
        for w in system.dependencies(v):
            graph.add_edge(v, w)
    designated = roots[0]
    core = ()
    sc = False
    if designated in graph:
        comp = next(c for c in nx.strongly_connected_components(graph) if designated in c)
        core = tuple(sorted(comp, key=var_key))
        sub = graph.subgraph(core)
        sc = nx.is_strongly_connected(sub) and (len(core) > 1 or sub.has_edge(designated, designated))
    chains = {}
    for v in list(rhs):
        for w in [v] + [x for m in rhs[v] for x in m.vars]:
            if isinstance(w, (DVar, BVar)):
                upper = b.upper_of(w)
                chains[upper] = b.chain(upper)
    return DifferenceSystem(system, core, designated, sc, removed, chains)
