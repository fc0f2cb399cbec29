"""Catalytic systems: input format, validation, step tables, infinite system.

A system of d equations

    F_s(x,u) = P_s(x,u) + x * sum_t sum_l Q_{s,t,l}(x,u) * Delta^l F_t(x,u)

is stored through the coefficients ``Q[(s,t,l,j)] = [u^j] Q_{s,t,l}``.  Each
nonzero coefficient ``[x^r]`` of such a polynomial becomes a lattice step of
width ``1+r`` and rise ``l-j`` that is allowed from every level ``k >= j``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

from .algebra import (
    Monomial,
    PositivePolynomialSystem,
    TruncatedSeries,
    UniPolynomial,
    as_rational,
    fixed_point_solve,
    format_rational,
)
from .errors import TrivialSystemError, ValidationError

FORMAT_VERSION = 1


@dataclass(frozen=True)
class CatalyticSystem:
    d: int
    L: int
    J: int
    Q: Mapping[tuple[int, int, int, int], UniPolynomial]
    P: Mapping[tuple[int, int], UniPolynomial]

    def __eq__(self, other):
        return (
            isinstance(other, CatalyticSystem)
            and (self.d, self.L, self.J) == (other.d, other.L, other.J)
            and dict(self.Q) == dict(other.Q)
            and dict(self.P) == dict(other.P)
        )

    def __hash__(self):
        return hash((self.d, self.L, self.J, tuple(sorted(self.Q.items()))))

    def p_degree(self, s: int) -> int:
        return max((m for (t, m) in self.P if t == s), default=-1)

    def p_poly(self, s: int, m: int) -> UniPolynomial:
        return self.P.get((s, m), UniPolynomial())


# ---------------------------------------------------------------------------
# parsing and serialization

_TOP_FIELDS = {"d", "L", "J", "Q", "P"}
_Q_FIELDS = {"s", "t", "l", "j", "poly"}
_P_FIELDS = {"s", "m", "poly"}


def _int_field(obj: dict, key: str, where: str, low: int = 0) -> int:
    if key not in obj:
        raise ValidationError(f"missing field {key!r}", where)
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ValidationError(f"field {key!r} must be an integer", where)
    if v < low:
        raise ValidationError(f"field {key!r} must be >= {low}, got {v}", where)
    return v


def _poly_field(obj: dict, where: str) -> UniPolynomial:
    raw = obj.get("poly")
    if not isinstance(raw, list):
        raise ValidationError("field 'poly' must be an array of rationals", where)
    coeffs = []
    for r, c in enumerate(raw):
        try:
            q = as_rational(c)
        except ValidationError as exc:
            raise ValidationError(f"coefficient of x^{r}: {exc}", where) from None
        if q < 0:
            raise ValidationError(f"negative coefficient {format_rational(q)} at x^{r}", where)
        coeffs.append(q)
    return UniPolynomial(tuple(coeffs))


def parse_catalytic_system(document: str | bytes) -> CatalyticSystem:
    """Parse and check the JSON description of a catalytic system."""
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})") from None
    if not isinstance(data, dict):
        raise ValidationError("the document must be a JSON object")
    unknown = set(data) - _TOP_FIELDS
    if unknown:
        raise ValidationError(f"unknown fields {sorted(unknown)}")
    d = _int_field(data, "d", "document", 1)
    L = _int_field(data, "L", "document", 0)
    J = _int_field(data, "J", "document", 0)
    if not isinstance(data.get("Q"), list):
        raise ValidationError("field 'Q' must be an array", "document")
    Q: dict = {}
    for n, entry in enumerate(data["Q"]):
        where = f"Q[{n}]"
        if not isinstance(entry, dict):
            raise ValidationError("entry must be an object", where)
        unknown = set(entry) - _Q_FIELDS
        if unknown:
            raise ValidationError(f"unknown fields {sorted(unknown)}", where)
        s = _int_field(entry, "s", where, 1)
        t = _int_field(entry, "t", where, 1)
        l = _int_field(entry, "l", where)
        j = _int_field(entry, "j", where)
        where = f"Q(s={s},t={t},l={l},j={j})"
        if s > d or t > d:
            raise ValidationError(f"type index out of range 1..{d}", where)
        if l > L:
            raise ValidationError(f"l exceeds the declared order L={L}", where)
        if j > J:
            raise ValidationError(f"j exceeds the declared bound J={J}", where)
        if (s, t, l, j) in Q:
            raise ValidationError("duplicate entry", where)
        Q[(s, t, l, j)] = _poly_field(entry, where)
    P: dict = {}
    if "P" in data:
        if not isinstance(data["P"], list):
            raise ValidationError("field 'P' must be an array", "document")
        for n, entry in enumerate(data["P"]):
            where = f"P[{n}]"
            if not isinstance(entry, dict):
                raise ValidationError("entry must be an object", where)
            unknown = set(entry) - _P_FIELDS
            if unknown:
                raise ValidationError(f"unknown fields {sorted(unknown)}", where)
            s = _int_field(entry, "s", where, 1)
            m = _int_field(entry, "m", where)
            where = f"P(s={s},m={m})"
            if s > d:
                raise ValidationError(f"type index out of range 1..{d}", where)
            if (s, m) in P:
                raise ValidationError("duplicate entry", where)
            P[(s, m)] = _poly_field(entry, where)
    else:
        P = {(s, 0): UniPolynomial((1,)) for s in range(1, d + 1)}
    Q = {k: v for k, v in sorted(Q.items()) if not v.is_zero()}
    P = {k: v for k, v in sorted(P.items()) if not v.is_zero()}
    return CatalyticSystem(d, L, J, Q, P)


def serialize_catalytic_system(sys: CatalyticSystem) -> str:
    def poly(p: UniPolynomial) -> list[str]:
        return [format_rational(c) for c in p.coeffs]

    doc = {
        "d": sys.d,
        "L": sys.L,
        "J": sys.J,
        "Q": [
            {"s": s, "t": t, "l": l, "j": j, "poly": poly(p)}
            for (s, t, l, j), p in sorted(sys.Q.items())
        ],
        "P": [{"s": s, "m": m, "poly": poly(p)} for (s, m), p in sorted(sys.P.items())],
    }
    return json.dumps(doc, indent=2) + "\n"


def canonicalize_and_validate(sys: CatalyticSystem) -> tuple[CatalyticSystem, list[str]]:
    """Tighten L and J to the data and report degenerate features."""
    if not sys.Q:
        raise TrivialSystemError("all Q polynomials vanish; the solution is F = P and nothing is compiled")
    notes = []
    L = max(l for (_, _, l, _) in sys.Q)
    J = max(j for (_, _, _, j) in sys.Q)
    if L != sys.L:
        notes.append(f"declared L={sys.L} tightened to L={L}")
    if J != sys.J:
        notes.append(f"declared J={sys.J} tightened to J={J}")
    if L == 0:
        notes.append("no step rises; levels above the start are never visited")
    sources = {s for (s, _, _, _) in sys.Q}
    targets = {t for (_, t, _, _) in sys.Q}
    for s in range(1, sys.d + 1):
        if s not in sources:
            notes.append(f"equation {s} has no catalytic part (F_{s} = P_{s})")
        if s not in targets and s not in sources:
            notes.append(f"type {s} is unused")
    Q = dict(sorted(sys.Q.items()))
    P = dict(sorted(sys.P.items()))
    return CatalyticSystem(sys.d, L, J, Q, P), notes


def load_system(document: str | bytes) -> tuple[CatalyticSystem, list[str]]:
    return canonicalize_and_validate(parse_catalytic_system(document))


# ---------------------------------------------------------------------------
# steps


@dataclass(frozen=True)
class Step:
    width: int
    rise: int
    weight: Fraction
    source: int
    target: int
    origin: tuple[int, int, int]  # (l, j, r)

    @property
    def min_level(self) -> int:
        """Lowest level from which the step is allowed (its u-degree j)."""
        return self.origin[1]


@dataclass(frozen=True)
class StepTable:
    """Step multisets ``S_{s,t,k}`` for k = 0..J; level J is used above J."""

    d: int
    L: int
    J: int
    levels: tuple  # levels[k][(s,t)] -> tuple of Step

    @property
    def stable_level(self) -> int:
        return self.J

    def steps(self, s: int, t: int, k: int) -> tuple:
        return self.levels[min(k, self.J)].get((s, t), ())

    def steps_from(self, s: int, k: int) -> list:
        lev = self.levels[min(k, self.J)]
        return [st for t in range(1, self.d + 1) for st in lev.get((s, t), ())]

    def all_steps(self) -> list:
        return [st for lev in (self.levels[self.J],) for v in lev.values() for st in v]

    @property
    def max_rise(self) -> int:
        return max((st.rise for st in self.all_steps()), default=0)

    @property
    def max_fall(self) -> int:
        return max((-st.rise for st in self.all_steps()), default=0)

    def aggregated(self, s: int, t: int, k: int, min_rise: int | None = None) -> dict:
        """Total weight per (width, rise) of S_{s,t,k}, optionally filtered."""
        out: dict = {}
        for st in self.steps(s, t, k):
            if min_rise is not None and st.rise < min_rise:
                continue
            key = (st.width, st.rise)
            out[key] = out.get(key, 0) + st.weight
        return out

    def stable_floor(self) -> int:
        """Smallest floor from which counts with a floor are shift invariant.

        A path that stays at or above floor ``K`` and is currently ``h``
        levels above it can use exactly the steps of ``S_{K+h}`` with rise at
        least ``-h``.  If that filtered multiset agrees with the one at the
        stable level J for every h, then counts with floor ``k >= K`` depend
        only on the start and end levels relative to the floor.
        """
        pairs = [(s, t) for s in range(1, self.d + 1) for t in range(1, self.d + 1)]
        for K in range(self.J + 1):
            if all(
                self.aggregated(s, t, K + h, -h) == self.aggregated(s, t, self.J, -h)
                for h in range(self.J - K + 1)
                for (s, t) in pairs
            ):
                return K
        return self.J

    def step_polynomial(self, s: int, t: int, k: int, rise: int) -> UniPolynomial:
        """Sum of ``weight * x^width`` over steps of S_{s,t,k} with the given rise."""
        p = UniPolynomial()
        for st in self.steps(s, t, k):
            if st.rise == rise:
                p = p + UniPolynomial.monomial(st.weight, st.width)
        return p


def build_step_table(sys: CatalyticSystem) -> StepTable:
    levels = []
    for k in range(sys.J + 1):
        lev: dict = {}
        for (s, t, l, j), poly in sorted(sys.Q.items()):
            if j > k:
                continue
            for r, w in poly.terms():
                lev.setdefault((s, t), []).append(Step(1 + r, l - j, w, s, t, (l, j, r)))
        levels.append({key: tuple(v) for key, v in sorted(lev.items())})
    return StepTable(sys.d, sys.L, sys.J, tuple(levels))


# ---------------------------------------------------------------------------
# the truncated infinite linear system


@dataclass(frozen=True)
class SectionVar:
    """The u-coefficient ``F_{s;k}(x) = [u^k] F_s(x,u)``."""

    s: int
    k: int
    typed: bool = field(default=True, compare=False)

    def __str__(self):
        return f"f_{self.s}_{self.k}" if self.typed else f"f_{self.k}"


@dataclass(frozen=True)
class LinearEquation:
    lhs: SectionVar
    constant: UniPolynomial
    terms: tuple  # ((coefficient polynomial including the factor x, SectionVar), ...)

    def __str__(self):
        parts = [] if self.constant.is_zero() else [str(self.constant)]
        for poly, v in self.terms:
            c = str(poly)
            parts.append(f"{v}" if c == "1" else f"{c} {v}" if "+" not in c else f"({c}) {v}")
        return f"{self.lhs} = " + (" + ".join(parts) if parts else "0")


def expand_infinite_system(sys: CatalyticSystem, Kmax: int) -> list[LinearEquation]:
    """Equations for F_{s;k}, k <= Kmax; unknowns above Kmax are boundary terms."""
    typed = sys.d > 1
    eqs = []
    for s in range(1, sys.d + 1):
        for k in range(Kmax + 1):
            terms = []
            for (s0, t, l, j), poly in sorted(sys.Q.items(), key=lambda kv: (kv[0][0], kv[0][2], kv[0][3], kv[0][1])):
                if s0 != s or j > min(k, sys.J):
                    continue
                terms.append((poly.shift(1), SectionVar(t, k + l - j, typed)))
            eqs.append(LinearEquation(SectionVar(s, k, typed), sys.p_poly(s, k), tuple(terms)))
    return eqs


def infinite_system_as_positive(eqs: list[LinearEquation]) -> PositivePolynomialSystem:
    rhs: dict = {}
    boundary = set()
    for eq in eqs:
        monos = [Monomial(c, e) for e, c in eq.constant.terms()]
        for poly, v in eq.terms:
            monos.extend(Monomial(c, e, (v,)) for e, c in poly.terms())
            boundary.add(v)
        rhs[eq.lhs] = monos
    for v in boundary - set(rhs):
        rhs[v] = []
    return PositivePolynomialSystem(rhs)


def solve_sections(sys: CatalyticSystem, N: int, kmax: int) -> dict:
    """Series F_{s;k} for k <= kmax, exact to order N, from the truncated system."""
    Kmax = kmax + N * max(sys.L, 1) + 1
    pps = infinite_system_as_positive(expand_infinite_system(sys, Kmax))
    sol = fixed_point_solve(pps, N)
    return {(v.s, v.k): sol[v] for v in pps.variables if v.k <= kmax}


# ---------------------------------------------------------------------------
# reduction of a general inhomogeneous part to path counts


@dataclass(frozen=True)
class RecombinationPlan:
    """``F_{s;k} = sum over terms (t, m, P_{t,m}) of P_{t,m} * F^{>=0}_{s,t;k,m}``.

    Path counts include the empty path when start and end level agree and
    the start type equals the end type.  The empty path ending at level m
    then reproduces ``P_{s,m}`` for ``k = m``, so no separate constant is
    needed.
    """

    terms: tuple  # ((t, m, UniPolynomial), ...)

    def apply(self, s: int, k: int, path_series: Callable[[int, int, int, int], TruncatedSeries], N: int) -> TruncatedSeries:
        total = TruncatedSeries.zero(N)
        for t, m, poly in self.terms:
            total = total + TruncatedSeries.from_polynomial(poly, N) * path_series(s, t, k, m)
        return total

    def required(self, s: int, k: int) -> list[tuple[int, int, int, int]]:
        return [(s, t, k, m) for t, m, _ in self.terms]


def build_recombination_plan(sys: CatalyticSystem) -> RecombinationPlan:
    return RecombinationPlan(tuple((t, m, poly) for (t, m), poly in sorted(sys.P.items())))
