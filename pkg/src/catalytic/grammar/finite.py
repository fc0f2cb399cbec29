"""First-passage decompositions and the finite positive system.

Every path counted by ``F^{>=k}_{s,t;k1,k2}`` is split at its first return
to a level at most k1 (a descending first-passage walk followed by a shorter
path), or, if it never returns, at the first visit of its lowest later level
(an ascending first-passage walk followed by a path with a higher floor).
First-passage walks are split into first step, an interior path with a
raised floor, and last step.  Together with the shift invariance above the
stable floor this closes up into finitely many equations.
"""

from __future__ import annotations

from collections import deque
from ..algebra import (
    Monomial,
    PositivePolynomialSystem,
    SeriesSolution,
    TruncatedSeries,
    merge_monomials,
)
from ..errors import ClosureError, InvalidQueryError
from ..model import StepTable
from .primewalks import EXPLICIT, ZERO, PrimeWalkClassification
from .variables import AbarVar, AVar, FVar, WALK_TYPES


class DecompositionRules:
    """Raw right-hand sides with walk variables not yet substituted."""

    def __init__(self, table: StepTable, cls: PrimeWalkClassification):
        self.table = table
        self.cls = cls
        self.types = range(1, table.d + 1)
        self.typed = table.d > 1

    # variable constructors (always normalized) -------------------------
    def F(self, s, t, k1, k2, k) -> FVar:
        return self.cls.normalize_f(FVar(s, t, k1, k2, k, self.typed))

    def A(self, s, t, k, i):
        return self.cls.normalize_walk(AVar(s, t, k, i, self.typed))

    def Ab(self, s, t, k, i):
        return self.cls.normalize_walk(AbarVar(s, t, k, i, self.typed))

    # raw equations -------------------------------------------------------
    def raw_rhs(self, v, split: str = "first") -> list[Monomial]:
        if isinstance(v, FVar):
            if split == "last" and v.k1 < v.k2:
                return self._f_last(v)
            return self._f_first(v)
        if isinstance(v, AVar):
            return self._walk_up(v)
        if isinstance(v, AbarVar):
            return self._walk_down(v)
        raise TypeError(f"no decomposition for {v!r}")

    def _f_first(self, v: FVar) -> list[Monomial]:
        s, t, k1, k2, k = v.s, v.t, v.k1, v.k2, v.k
        out = []
        if k1 == k2 and s == t:
            out.append(Monomial(1, 0))
        for t0 in self.types:
            for m in range(k, k1 + 1):
                out.append(Monomial(1, 0, (self.Ab(s, t0, k1, k1 - m), self.F(t0, t, m, k2, k))))
            for m in range(k1 + 1, k2 + 1):
                out.append(Monomial(1, 0, (self.A(s, t0, k1, m - k1), self.F(t0, t, m, k2, m))))
        return out

    def _f_last(self, v: FVar) -> list[Monomial]:
        # split at the last visit of a level <= k2 before the end
        s, t, k1, k2, k = v.s, v.t, v.k1, v.k2, v.k
        out = []
        for t0 in self.types:
            for m in range(k, k2 + 1):
                out.append(Monomial(1, 0, (self.F(s, t0, k1, m, k), self.A(t0, t, m, k2 - m))))
        return out

    def _walk_up(self, v: AVar) -> list[Monomial]:
        s, t, k, i = v.s, v.t, v.k, v.i
        tb = self.table
        out = [Monomial(st.weight, st.width) for st in tb.steps(s, t, k) if st.rise == i]
        for first in tb.steps_from(s, k):
            i1 = first.rise
            if i1 <= i:
                continue
            for t1 in self.types:
                for i2 in range(i + 1, i + tb.J + 1):
                    for last in tb.steps(t1, t, k + i2):
                        if last.rise != -(i2 - i):
                            continue
                        inner = self.F(first.target, t1, k + i1, k + i2, k + i + 1)
                        out.append(Monomial(first.weight * last.weight, first.width + last.width, (inner,)))
        return out

    def _walk_down(self, v: AbarVar) -> list[Monomial]:
        s, t, k, i = v.s, v.t, v.k, v.i
        if i == 0:
            return self._walk_up(AVar(s, t, k, 0, v.typed))
        tb = self.table
        out = []
        if k >= i:
            out = [Monomial(st.weight, st.width) for st in tb.steps(s, t, k) if st.rise == -i]
        for first in tb.steps_from(s, k):
            i1 = first.rise
            if i1 <= 0:
                continue
            for t1 in self.types:
                for i2 in range(1, tb.J + 1):
                    if k - i < 0:
                        continue
                    for last in tb.steps(t1, t, k + i2):
                        if last.rise != -(i + i2):
                            continue
                        inner = self.F(first.target, t1, k + i1, k + i2, k + 1)
                        out.append(Monomial(first.weight * last.weight, first.width + last.width, (inner,)))
        return out

    # substitution of known walks -----------------------------------------
    def substitute(self, monos) -> list[Monomial]:
        out = []
        for m in monos:
            terms = [Monomial(m.coef, m.xexp)]
            for w in m.vars:
                if isinstance(w, WALK_TYPES):
                    st = self.cls.status(w)
                    if st.kind == ZERO:
                        terms = []
                        break
                    if st.kind == EXPLICIT:
                        terms = [t.times(c, e) for t in terms for e, c in st.poly.terms()]
                        continue
                    w = self.cls.normalize_walk(w)
                terms = [t.times(1, 0, (w,)) for t in terms]
            out.extend(terms)
        return list(merge_monomials(out))


def finite_index_bounds(table: StepTable) -> dict:
    """Index ranges: starting ranges for the roots and the closure limits."""
    L, J = table.L, table.J
    return {
        "root_k1": L + J,
        "root_k2": max(2 * J, 1),
        "limit_k1": L + J + 1,
        "limit_k2": max(2 * J, J + 1),
    }


def finite_roots(table: StepTable, cls: PrimeWalkClassification) -> list:
    rules = DecompositionRules(table, cls)
    b = finite_index_bounds(table)
    roots = []
    seen = set()
    types = range(1, table.d + 1)
    for s in types:
        for t in types:
            for k1 in range(b["root_k1"]):
                for k2 in range(b["root_k2"]):
                    for k in range(min(cls.floor, k1, k2) + 1):
                        v = rules.F(s, t, k1, k2, k)
                        if v not in seen:
                            seen.add(v)
                            roots.append(v)
            for j in range(cls.floor + 1):
                v = rules.F(s, t, j, j, j)
                if v not in seen:
                    seen.add(v)
                    roots.append(v)
    roots.extend(cls.unknowns)
    return roots


def closure_system(
    table: StepTable,
    cls: PrimeWalkClassification,
    roots,
    extra: dict | None = None,
    split: str = "first",
    limits: dict | None = None,
) -> PositivePolynomialSystem:
    """All equations reachable from ``roots`` and the ``extra`` right-hand sides.

    With ``limits`` a path variable outside the index range raises
    :class:`ClosureError`.
    """
    rules = DecompositionRules(table, cls)
    extra = dict(extra or {})
    rhs: dict = {}
    queue = deque(list(roots) + list(extra))
    while queue:
        v = queue.popleft()
        if v in rhs:
            continue
        if v in extra:
            monos = rules.substitute(extra[v])
        else:
            if limits and isinstance(v, FVar) and (v.k1 >= limits["limit_k1"] or v.k2 >= limits["limit_k2"]):
                raise ClosureError(f"variable {v} falls outside the finite index range", v)
            monos = rules.substitute(rules.raw_rhs(v, split))
        rhs[v] = monos
        for m in monos:
            for w in m.vars:
                if w not in rhs:
                    queue.append(w)
    return PositivePolynomialSystem(rhs)


def build_finite_system(table: StepTable, cls: PrimeWalkClassification, split: str = "first") -> PositivePolynomialSystem:
    """The finite positive system containing all roots and their dependencies.

    ``split="last"`` uses the decomposition at the final first-passage walk
    for paths that end above their start; it yields the same solution.
    """
    return closure_system(table, cls, finite_roots(table, cls), split=split, limits=finite_index_bounds(table))


# ---------------------------------------------------------------------------
# extension to arbitrary indices


class Extender:
    """Series of any ``F^{>=k}_{s,t;k1,k2}`` from a solved finite system.

    Uses the decompositions with the self-referential walk moved to the
    other side: ``F^{>=m}_{s,t;m,m}`` plays the role of ``1/(1 - A_{m,0})``.
    Only products and sums of known series are formed.
    """

    def __init__(self, sol: SeriesSolution, table: StepTable, cls: PrimeWalkClassification, N: int):
        self.rules = DecompositionRules(table, cls)
        self.sol = sol
        self.cls = cls
        self.N = N
        self.d = table.d
        self.memo: dict = {}
        self.zero = TruncatedSeries.zero(N)

    def _known(self, v) -> TruncatedSeries:
        if v not in self.sol:
            raise ClosureError(f"{v} is missing from the solved finite system", v)
        return self.sol[v].truncate(self.N)

    def walk(self, v) -> TruncatedSeries:
        st = self.cls.status(v)
        if st.kind == ZERO:
            return self.zero
        if st.kind == EXPLICIT:
            return TruncatedSeries.from_polynomial(st.poly, self.N)
        return self._known(self.cls.normalize_walk(v))

    def excursion(self, s: int, t: int, m: int) -> TruncatedSeries:
        return self._known(self.rules.F(s, t, m, m, m))

    def __call__(self, target: FVar) -> TruncatedSeries:
        s, t, k1, k2, k = target.s, target.t, target.k1, target.k2, target.k
        if k > min(k1, k2) or min(k1, k2, k) < 0:
            raise InvalidQueryError(f"floor {k} lies above an endpoint of ({k1}, {k2})")
        key = (s, t, k1, k2, k)
        if key in self.memo:
            return self.memo[key]
        types = range(1, self.d + 1)
        rules = self.rules
        if k1 == k:
            if k2 == k1:
                res = self.excursion(s, t, k)
            else:
                res = self._ascending(s, t, k1, k2, k)
        elif k1 == k2:
            inner = {}
            for t0 in types:
                acc = TruncatedSeries.one(self.N) if t0 == t else self.zero
                for t1 in types:
                    for m in range(k, k1):
                        acc = acc + self.walk(rules.Ab(t0, t1, k1, k1 - m)) * self(FVar(t1, t, m, k2, k))
                inner[t0] = acc
            res = self.zero
            for t0 in types:
                res = res + self.excursion(s, t0, k1) * inner[t0]
        elif k1 < k2:
            res = self._ascending(s, t, k1, k2, k)
        else:
            res = self.zero
            for t0 in types:
                acc = self.zero
                for t1 in types:
                    for m in range(k, k1):
                        acc = acc + self.walk(rules.Ab(t0, t1, k1, k1 - m)) * self(FVar(t1, t, m, k2, k))
                res = res + self.excursion(s, t0, k1) * acc
        self.memo[key] = res
        return res

    def _ascending(self, s, t, k1, k2, k) -> TruncatedSeries:
        # last first-passage walk split; the walk ending at k2 from k2 itself
        # is folded into the trailing excursion factor
        types = range(1, self.d + 1)
        rules = self.rules
        res = self.zero
        for t1 in types:
            acc = self.zero
            for t0 in types:
                for m in range(k, k2):
                    acc = acc + self(FVar(s, t0, k1, m, k)) * self.walk(rules.A(t0, t1, m, k2 - m))
            res = res + acc * self.excursion(t1, t, k2)
        return res


def extend_function(sol: SeriesSolution, table: StepTable, cls: PrimeWalkClassification, target: FVar, N: int) -> TruncatedSeries:
    return Extender(sol, table, cls, N)(target)
