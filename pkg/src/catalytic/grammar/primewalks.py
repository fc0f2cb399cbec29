"""Level bounds for first-passage walks and their zero/explicit/unknown status.

A walk counted by ``A_{s,t;k,i}`` goes from level k to level k+i and stays
strictly above k+i in between; ``Ab_{s,t;k,i}`` goes from k down to k-i and
stays strictly above k in between.  Such a walk is a single step unless it
first climbs and later comes back down, which can be ruled out from the step
table alone.  Whatever cannot be ruled out stays an unknown of the grammar.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..algebra import UniPolynomial, var_key
from ..model import StepTable
from .variables import AbarVar, AVar, FVar

ZERO = "ZERO"
EXPLICIT = "EXPLICIT"
UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class PrimeWalkBounds:
    """Largest rise and largest fall among steps of S_{s,t,k}, per level 0..J.

    ``None`` marks an empty step set.
    """

    d: int
    J: int
    dbar: dict  # (s, t, k) -> int | None
    dlow: dict

    def up(self, s: int, t: int, k: int):
        return self.dbar[(s, t, min(k, self.J))]

    def down(self, s: int, t: int, k: int):
        return self.dlow[(s, t, min(k, self.J))]


def compute_prime_walk_bounds(table: StepTable) -> PrimeWalkBounds:
    dbar, dlow = {}, {}
    for s in range(1, table.d + 1):
        for t in range(1, table.d + 1):
            for k in range(table.J + 1):
                rises = [st.rise for st in table.steps(s, t, k)]
                dbar[(s, t, k)] = max(rises) if rises else None
                dlow[(s, t, k)] = max(-r for r in rises) if rises else None
    return PrimeWalkBounds(table.d, table.J, dbar, dlow)


@dataclass(frozen=True)
class WalkStatus:
    kind: str
    poly: UniPolynomial | None = None

    def __str__(self):
        return self.kind if self.kind != EXPLICIT else f"{self.kind}({self.poly})"


class PrimeWalkClassification:
    """Status of every first-passage walk after identification of equal ones.

    ``floor`` is the smallest level from which counts are invariant under
    shifting start, end and floor together (see ``StepTable.stable_floor``);
    all walk and path variables are normalized so their floor is at most it.
    """

    def __init__(self, table: StepTable, statuses: dict, floor: int):
        self.table = table
        self.statuses = statuses
        self.floor = floor
        self.typed = table.d > 1

    # -- normalization ---------------------------------------------------
    def normalize_f(self, v: FVar) -> FVar:
        if v.k > min(v.k1, v.k2):
            raise ValueError(f"floor of {v} lies above an endpoint")
        shift = max(0, v.k - self.floor)
        return FVar(v.s, v.t, v.k1 - shift, v.k2 - shift, v.k - shift, self.typed)

    def normalize_walk(self, v):
        if isinstance(v, AbarVar):
            if v.i == 0:
                return self.normalize_walk(AVar(v.s, v.t, v.k, 0, self.typed))
            base = v.k - v.i
            shift = max(0, base - self.floor)
            return AbarVar(v.s, v.t, v.k - shift, v.i, self.typed)
        return AVar(v.s, v.t, min(v.k, self.floor), v.i, self.typed)

    def status(self, v) -> WalkStatus:
        w = self.normalize_walk(v)
        return self.statuses.get(w, WalkStatus(ZERO))

    @property
    def unknowns(self) -> list:
        return sorted((v for v, st in self.statuses.items() if st.kind == UNKNOWN), key=var_key)

    def explicit(self) -> dict:
        return {v: st.poly for v, st in self.statuses.items() if st.kind == EXPLICIT}


def _classify_up(table: StepTable, s: int, t: int, k: int, i: int) -> WalkStatus:
    types = range(1, table.d + 1)
    climbs = any(st.rise > i for st in table.steps_from(s, k))
    returns = any(
        st.rise == -(i2 - i)
        for i2 in range(i + 1, i + table.J + 1)
        for t1 in types
        for st in table.steps(t1, t, k + i2)
    )
    direct = table.step_polynomial(s, t, k, i)
    if climbs and returns:
        return WalkStatus(UNKNOWN)
    return WalkStatus(EXPLICIT, direct) if not direct.is_zero() else WalkStatus(ZERO)


def _classify_down(table: StepTable, s: int, t: int, k: int, i: int) -> WalkStatus:
    types = range(1, table.d + 1)
    climbs = any(st.rise > 0 for st in table.steps_from(s, k))
    returns = any(
        st.rise == -(i + i2)
        for i2 in range(1, table.J + 1)
        for t1 in types
        for st in table.steps(t1, t, k + i2)
    )
    direct = table.step_polynomial(s, t, k, -i) if k >= i else UniPolynomial()
    if climbs and returns and k >= i:
        return WalkStatus(UNKNOWN)
    return WalkStatus(EXPLICIT, direct) if not direct.is_zero() else WalkStatus(ZERO)


def classify_prime_walks(table: StepTable, bounds: PrimeWalkBounds | None = None) -> PrimeWalkClassification:
    """Classify every walk variable with floor at most the stable floor.

    A walk is UNKNOWN when it could consist of more than one step: some step
    out of the start climbs past the target level and some step into the
    end type descends onto it from above.  Otherwise it is the single-step
    polynomial (EXPLICIT) or vanishes (ZERO).  Walks outside the enumerated
    range vanish because their rise or fall exceeds every step.
    """
    if bounds is None:
        bounds = compute_prime_walk_bounds(table)
    K = table.stable_floor()
    typed = table.d > 1
    up = max(0, table.max_rise)
    down = max(0, table.max_fall)
    statuses: dict = {}
    for s in range(1, table.d + 1):
        for t in range(1, table.d + 1):
            for k in range(K + 1):
                for i in range(up + 1):
                    statuses[AVar(s, t, k, i, typed)] = _classify_up(table, s, t, k, i)
            for i in range(1, down + 1):
                for base in range(K + 1):
                    statuses[AbarVar(s, t, base + i, i, typed)] = _classify_down(table, s, t, base + i, i)
    return PrimeWalkClassification(table, statuses, K)
