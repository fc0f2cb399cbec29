"""Exact arithmetic kernel: polynomials, truncated series, positive systems.

Everything here works with :class:`fractions.Fraction` coefficients. The
solver for positive polynomial systems computes the series solution order by
order, which gives the same result as plain fixed-point iteration from the
zero vector but needs only one sweep per coefficient.
"""

from __future__ import annotations

import math
import operator
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Iterator, Mapping, Sequence

from .errors import DivergenceError, OrderMismatchError, ValidationError

Rational = Fraction

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")


def as_rational(value) -> Fraction:
    """Convert ints, Fractions or strings like ``"3/4"`` to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValidationError(f"not a rational number: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        m = _RATIONAL_RE.match(value)
        if not m:
            raise ValidationError(f"not a rational number: {value!r}")
        den = int(m.group(2)) if m.group(2) else 1
        if den == 0:
            raise ValidationError(f"zero denominator in {value!r}")
        return Fraction(int(m.group(1)), den)
    raise ValidationError(f"not a rational number: {value!r}")


def format_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# polynomials


@dataclass(frozen=True)
class UniPolynomial:
    """Univariate polynomial in x with trimmed coefficient tuple."""

    coeffs: tuple[Fraction, ...] = ()

    def __post_init__(self):
        c = [as_rational(v) for v in self.coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def monomial(cls, coef, exponent: int) -> "UniPolynomial":
        return cls((0,) * exponent + (coef,))

    @property
    def degree(self) -> float:
        return len(self.coeffs) - 1 if self.coeffs else -math.inf

    def is_zero(self) -> bool:
        return not self.coeffs

    def __getitem__(self, n: int) -> Fraction:
        return self.coeffs[n] if 0 <= n < len(self.coeffs) else Fraction(0)

    def terms(self) -> Iterator[tuple[int, Fraction]]:
        for e, c in enumerate(self.coeffs):
            if c:
                yield e, c

    def __add__(self, other: "UniPolynomial") -> "UniPolynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        return UniPolynomial(tuple(self[i] + other[i] for i in range(n)))

    def __mul__(self, other: "UniPolynomial") -> "UniPolynomial":
        if self.is_zero() or other.is_zero():
            return UniPolynomial()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in self.terms():
            for j, b in other.terms():
                out[i + j] += a * b
        return UniPolynomial(tuple(out))

    def shift(self, k: int) -> "UniPolynomial":
        if self.is_zero():
            return self
        return UniPolynomial((Fraction(0),) * k + self.coeffs)

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        parts = []
        for e, c in self.terms():
            cs = format_rational(c)
            if e == 0:
                parts.append(cs)
            else:
                xs = "x" if e == 1 else f"x^{e}"
                parts.append(xs if c == 1 else f"{cs} {xs}")
        return " + ".join(parts)


# ---------------------------------------------------------------------------
# truncated power series


@dataclass(frozen=True)
class TruncatedSeries:
    """Coefficients a_0..a_N of a power series; nothing beyond N is kept."""

    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("a truncated series needs at least one coefficient")
        object.__setattr__(self, "coeffs", tuple(as_rational(c) for c in self.coeffs))

    @classmethod
    def zero(cls, N: int) -> "TruncatedSeries":
        return cls((Fraction(0),) * (N + 1))

    @classmethod
    def one(cls, N: int) -> "TruncatedSeries":
        return cls((Fraction(1),) + (Fraction(0),) * N)

    @classmethod
    def from_polynomial(cls, p: UniPolynomial, N: int) -> "TruncatedSeries":
        return cls(tuple(p[n] for n in range(N + 1)))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, n):
        return self.coeffs[n]

    def __len__(self) -> int:
        return len(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs)

    def _check(self, other: "TruncatedSeries"):
        if other.order != self.order:
            raise OrderMismatchError(f"truncation orders differ: {self.order} vs {other.order}")

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check(other)
        return TruncatedSeries(tuple(map(operator.add, self.coeffs, other.coeffs)))

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check(other)
        return TruncatedSeries(tuple(map(operator.sub, self.coeffs, other.coeffs)))

    def __mul__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check(other)
        a, b = self.coeffs, other.coeffs
        N = self.order
        nz_a = [i for i, c in enumerate(a) if c]
        out = [Fraction(0)] * (N + 1)
        for i in nz_a:
            ai = a[i]
            for j in range(N + 1 - i):
                if b[j]:
                    out[i + j] += ai * b[j]
        return TruncatedSeries(tuple(out))

    def scale(self, c) -> "TruncatedSeries":
        c = as_rational(c)
        return TruncatedSeries(tuple(c * a for a in self.coeffs))

    def shift(self, k: int) -> "TruncatedSeries":
        if k < 0:
            raise ValueError("shift amount must be nonnegative")
        N = self.order
        return TruncatedSeries(((Fraction(0),) * k + self.coeffs)[: N + 1])

    def truncate(self, N: int) -> "TruncatedSeries":
        if N > self.order:
            raise OrderMismatchError(f"cannot extend a series of order {self.order} to {N}")
        return TruncatedSeries(self.coeffs[: N + 1])

    def is_nonnegative(self) -> bool:
        return all(c >= 0 for c in self.coeffs)

    def __str__(self) -> str:
        return "[" + ", ".join(format_rational(c) for c in self.coeffs) + "]"


def series_combine(op: str, a: TruncatedSeries, b) -> TruncatedSeries:
    """Dispatch ``add``, ``mul``, ``scale`` or ``shift`` on truncated series."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "scale":
        return a.scale(b)
    if op == "shift":
        if not isinstance(b, int) or b < 0:
            raise ValueError("shift takes a nonnegative integer")
        return a.shift(b)
    raise ValueError(f"unknown series operation {op!r}")


# ---------------------------------------------------------------------------
# positive polynomial systems

_NATURAL_SPLIT = re.compile(r"(\d+)")


def var_key(v) -> tuple:
    """Natural sort key on the printed name (``F_2`` before ``F_10``)."""
    parts = _NATURAL_SPLIT.split(str(v))
    return tuple((0, int(p)) if p.isdigit() else (1, p) for p in parts if p != "")


@dataclass(frozen=True)
class Monomial:
    """``coef * x**xexp * prod(vars)``; ``vars`` is a sorted multiset."""

    coef: Fraction
    xexp: int
    vars: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "coef", as_rational(self.coef))
        object.__setattr__(self, "vars", tuple(sorted(self.vars, key=var_key)))
        if self.xexp < 0:
            raise ValueError("negative x exponent")

    @property
    def key(self) -> tuple:
        return (self.xexp, tuple(var_key(v) for v in self.vars))

    def times(self, coef, xexp: int, extra: Sequence = ()) -> "Monomial":
        return Monomial(self.coef * coef, self.xexp + xexp, self.vars + tuple(extra))


def merge_monomials(monos: Iterable[Monomial]) -> tuple[Monomial, ...]:
    """Combine like terms, drop zero terms and sort deterministically."""
    acc: dict[tuple, list] = {}
    for m in monos:
        k = (m.xexp, m.vars)
        if k in acc:
            acc[k][0] += m.coef
        else:
            acc[k] = [m.coef, m]
    out = [Monomial(c, m.xexp, m.vars) for c, m in acc.values() if c != 0]
    out.sort(key=lambda m: m.key)
    return tuple(out)


class PositivePolynomialSystem:
    """Equations ``y_v = sum of monomials`` with nonnegative coefficients."""

    def __init__(self, rhs: Mapping[Hashable, Iterable[Monomial]], variables: Sequence | None = None):
        if variables is None:
            variables = sorted(rhs, key=var_key)
        self.variables: tuple = tuple(variables)
        if len(set(self.variables)) != len(self.variables):
            raise ValidationError("duplicate variable declaration")
        missing = set(rhs) - set(self.variables)
        if missing:
            raise ValidationError(f"equations for undeclared variables: {sorted(map(str, missing))}")
        self.rhs: dict = {v: merge_monomials(rhs.get(v, ())) for v in self.variables}
        declared = set(self.variables)
        for v, monos in self.rhs.items():
            for m in monos:
                if m.coef < 0:
                    raise ValidationError(f"negative coefficient in the equation for {v}")
                for w in m.vars:
                    if w not in declared:
                        raise ValidationError(f"{v} references undeclared variable {w}")

    def __len__(self) -> int:
        return len(self.variables)

    def __contains__(self, v) -> bool:
        return v in self.rhs

    def __eq__(self, other) -> bool:
        # declaration order is presentation only
        return isinstance(other, PositivePolynomialSystem) and self.rhs == other.rhs

    def __repr__(self) -> str:
        return f"PositivePolynomialSystem({len(self.variables)} variables)"

    def dependencies(self, v) -> set:
        return {w for m in self.rhs[v] for w in m.vars}

    def dependency_graph(self) -> dict:
        return {v: self.dependencies(v) for v in self.variables}

    def closure(self, roots: Iterable) -> list:
        seen: list = []
        mark = set()
        stack = list(roots)
        while stack:
            v = stack.pop()
            if v in mark:
                continue
            mark.add(v)
            seen.append(v)
            stack.extend(self.dependencies(v))
        return [v for v in self.variables if v in mark]

    def restrict(self, roots: Iterable) -> "PositivePolynomialSystem":
        """Subsystem of everything the given roots depend on."""
        keep = self.closure(roots)
        return PositivePolynomialSystem({v: self.rhs[v] for v in keep}, keep)

    def is_linear_in(self, group: Iterable) -> bool:
        group = set(group)
        return all(sum(w in group for w in m.vars) <= 1 for v in group for m in self.rhs[v])

    def max_variable_free_degree(self) -> int:
        return max((m.xexp for ms in self.rhs.values() for m in ms), default=0)


class SeriesSolution(dict):
    """Map variable -> TruncatedSeries, all of the same order."""

    def __init__(self, values: Mapping, order: int):
        super().__init__(values)
        self.order = order

    def by_name(self, name: str) -> TruncatedSeries:
        for v, s in self.items():
            if str(v) == name:
                return s
        raise KeyError(name)


def evaluate_monomials(monos: Iterable[Monomial], lookup: Callable, N: int) -> TruncatedSeries:
    """Evaluate a polynomial in x and variables whose series ``lookup`` returns."""
    total = [Fraction(0)] * (N + 1)
    for m in monos:
        if m.xexp > N:
            continue
        prod = TruncatedSeries.one(N)
        for v in m.vars:
            prod = prod * lookup(v)
        for n in range(N + 1 - m.xexp):
            if prod[n]:
                total[n + m.xexp] += m.coef * prod[n]
    return TruncatedSeries(tuple(total))


# ---------------------------------------------------------------------------
# the order-by-order solver


class ProductPlan:
    """Compiled evaluation structure shared by the exact and float solvers.

    Slots ``0..V-1`` hold variables; later slots hold binary products
    ``left * right`` where ``left`` is a slot and ``right`` a variable.
    Monomials refer to the slot of their variable product (or ``None``).
    """

    def __init__(self, system: PositivePolynomialSystem):
        self.system = system
        self.variables = system.variables
        self.index = {v: i for i, v in enumerate(self.variables)}
        V = len(self.variables)
        self.products: list[tuple[int, int]] = []
        prefix_slot: dict[tuple, int] = {}
        self.monomials: list[list[tuple[Fraction, int, int | None]]] = []
        for v in self.variables:
            row = []
            for m in system.rhs[v]:
                idx = sorted(self.index[w] for w in m.vars)
                slot = None
                if idx:
                    slot = idx[0]
                    for j in range(1, len(idx)):
                        key = tuple(idx[: j + 1])
                        if key not in prefix_slot:
                            prefix_slot[key] = V + len(self.products)
                            self.products.append((slot, idx[j]))
                        slot = prefix_slot[key]
                row.append((m.coef, m.xexp, slot))
            self.monomials.append(row)
        self.n_slots = V + len(self.products)

    def slot_name(self, slot: int) -> str:
        if slot < len(self.variables):
            return str(self.variables[slot])
        a, b = self.products[slot - len(self.variables)]
        return f"({self.slot_name(a)}*{self.slot_name(b)})"

    def constant_terms(self, zero, add, mul, from_rational) -> list:
        """Order-zero values via at most V+1 sweeps of the x^0 part."""
        V = len(self.variables)
        y = [zero] * V

        def sweep(y):
            slots = list(y) + [zero] * len(self.products)
            for p, (a, b) in enumerate(self.products):
                slots[V + p] = mul(slots[a], slots[b])
            new = []
            for row in self.monomials:
                acc = zero
                for c, e, s in row:
                    if e == 0:
                        acc = add(acc, mul(from_rational(c), slots[s]) if s is not None else from_rational(c))
                new.append(acc)
            return new

        for _ in range(V + 1):
            nxt = sweep(y)
            if nxt == y:
                return y
            y = nxt
        raise DivergenceError(
            "the constant terms do not stabilize; some x-free cycle keeps growing",
            cycle=tuple(self._constant_cycle()),
        )

    def _constant_cycle(self) -> list:
        graph = {i: set() for i in range(len(self.variables))}
        for i, row in enumerate(self.monomials):
            for c, e, s in row:
                if e == 0 and s is not None:
                    graph[i].update(self._vars_of_slot(s))
        return [self.variables[i] for i in _find_cycle(graph)]

    def _vars_of_slot(self, s: int) -> list[int]:
        V = len(self.variables)
        if s < V:
            return [s]
        a, b = self.products[s - V]
        return self._vars_of_slot(a) + [b]

    def sweep_order(self, constants: Sequence, is_zero) -> list[int]:
        """Topological order of slots for the coefficient at any order n >= 1.

        Slot u must follow slot w when the n-th coefficient of u needs the
        n-th coefficient of w.  A cycle means the solution is not determined
        order by order and is reported as divergence.
        """
        V = len(self.variables)
        slot0 = list(constants) + [None] * len(self.products)
        for p, (a, b) in enumerate(self.products):
            slot0[V + p] = slot0[a] * slot0[b]
        deps: dict[int, set[int]] = {u: set() for u in range(self.n_slots)}
        for i, row in enumerate(self.monomials):
            for c, e, s in row:
                if e == 0 and s is not None:
                    deps[i].add(s)
        for p, (a, b) in enumerate(self.products):
            u = V + p
            if not is_zero(slot0[a]):
                deps[u].add(b)
            if not is_zero(slot0[b]):
                deps[u].add(a)
        order: list[int] = []
        state = [0] * self.n_slots
        for root in range(self.n_slots):
            if state[root]:
                continue
            stack = [(root, iter(sorted(deps[root])))]
            state[root] = 1
            while stack:
                u, it = stack[-1]
                nxt = next(it, None)
                if nxt is None:
                    state[u] = 2
                    order.append(u)
                    stack.pop()
                elif state[nxt] == 0:
                    state[nxt] = 1
                    stack.append((nxt, iter(sorted(deps[nxt]))))
                elif state[nxt] == 1:
                    cyc = [w for w, _ in stack[[w for w, _ in stack].index(nxt):]]
                    names = [self.variables[w] for w in cyc if w < V]
                    raise DivergenceError(
                        "x-free cycle in the system: " + " -> ".join(map(str, names)),
                        cycle=tuple(names),
                    )
        return order


def _find_cycle(graph: Mapping[int, set]) -> list:
    color = {u: 0 for u in graph}
    for root in graph:
        if color[root]:
            continue
        stack = [(root, iter(sorted(graph[root])))]
        color[root] = 1
        while stack:
            u, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[u] = 2
                stack.pop()
            elif color[nxt] == 0:
                color[nxt] = 1
                stack.append((nxt, iter(sorted(graph[nxt]))))
            elif color[nxt] == 1:
                path = [w for w, _ in stack]
                return path[path.index(nxt):]
    return []


def _integer_scale(system: PositivePolynomialSystem) -> int | None:
    """Scale D such that x -> D x turns the system into one over the integers.

    Returns None when some x-free coefficient is not an integer.
    """
    D = 1
    for monos in system.rhs.values():
        for m in monos:
            if m.xexp == 0:
                if m.coef.denominator != 1:
                    return None
            else:
                D = math.lcm(D, m.coef.denominator)
    return D


def fixed_point_solve(system: PositivePolynomialSystem, N: int) -> SeriesSolution:
    """Unique power-series solution of ``y = Phi(x, y)`` up to order N.

    The result coincides with the limit of ``y <- Phi(x, y)`` started from
    zero; see :func:`picard_iterates` for the literal iteration.
    """
    if N < 0:
        raise ValueError("truncation order must be nonnegative")
    plan = ProductPlan(system)
    V = len(plan.variables)
    D = _integer_scale(system)
    if D is not None:
        # b_n = a_n D^n are integers; work with Python ints throughout
        coefs = [[(int(c * D**e), e, s) for c, e, s in row] for row in plan.monomials]
        to_num = int
    else:
        D = 1
        coefs = plan.monomials
        to_num = Fraction
    const = plan.constant_terms(to_num(0), operator.add, operator.mul, lambda c: to_num(c))
    order = plan.sweep_order(const, lambda z: z == 0)
    products = plan.products
    S: list[list] = [[c] for c in const]
    for a, b in products:
        S.append([S[a][0] * S[b][0]])
    is_var = [u < V for u in range(plan.n_slots)]
    for n in range(1, N + 1):
        for u in order:
            if is_var[u]:
                acc = 0
                for c, e, s in coefs[u]:
                    if e > n:
                        continue
                    if s is None:
                        if e == n:
                            acc += c
                    else:
                        val = S[s][n - e]
                        if val:
                            acc += c * val
                S[u].append(acc)
            else:
                a, b = products[u - V]
                A, B = S[a], S[b]
                acc = sum(map(operator.mul, A[1:n], B[n - 1 : 0 : -1])) if n > 1 else 0
                if A[0]:
                    acc += A[0] * B[n]
                if B[0]:
                    acc += A[n] * B[0]
                S[u].append(acc)
    out = {}
    for i, v in enumerate(plan.variables):
        if D == 1:
            out[v] = TruncatedSeries(tuple(S[i]))
        else:
            out[v] = TruncatedSeries(tuple(Fraction(b, D**n) for n, b in enumerate(S[i])))
    return SeriesSolution(out, N)


def picard_iterates(system: PositivePolynomialSystem, N: int) -> Iterator[SeriesSolution]:
    """The iterates ``y_0 = 0, y_{k+1} = Phi(x, y_k)`` truncated at order N."""
    cur = SeriesSolution({v: TruncatedSeries.zero(N) for v in system.variables}, N)
    while True:
        yield cur
        cur = SeriesSolution(
            {v: evaluate_monomials(system.rhs[v], cur.__getitem__, N) for v in system.variables}, N
        )


def residual_check(system: PositivePolynomialSystem, sol: Mapping) -> list:
    """Variables whose equation is not satisfied exactly by ``sol``."""
    N = next(iter(sol.values())).order if sol else 0
    bad = []
    for v in system.variables:
        if evaluate_monomials(system.rhs[v], sol.__getitem__, N) != sol[v]:
            bad.append(v)
    return bad
