"""Grammar against oracle comparisons shared by the command line and tests."""

from __future__ import annotations

from dataclasses import dataclass, field

from .algebra import SeriesSolution, TruncatedSeries, fixed_point_solve
from .grammar import AbarVar, AVar, BVar, DiffVar, DVar, Extender, FVar, build_finite_system, classify_prime_walks
from .grammar.difference import _Builder
from .model import CatalyticSystem, SectionVar, build_recombination_plan, build_step_table, solve_sections
from .paths import PathOracle, PathQuery


def oracle_series(oracle: PathOracle, v) -> TruncatedSeries:
    """Brute-force series of a path or first-passage walk variable."""
    N = oracle.nmax
    if isinstance(v, FVar):
        return oracle.count(PathQuery(v.s, v.t, v.k1, v.k2, v.k, N))
    if isinstance(v, AVar):
        return oracle.prime_walk(v.s, v.t, v.k, v.k + v.i, v.k + v.i + 1)
    if isinstance(v, AbarVar):
        return oracle.prime_walk(v.s, v.t, v.k, v.k - v.i, v.k + 1)
    raise TypeError(f"no oracle for {v!r}")


def difference_oracle(oracle: PathOracle, builder: _Builder, v) -> TruncatedSeries:
    """Like :func:`oracle_series`, also covering increment variables."""
    if isinstance(v, (DVar, BVar, DiffVar)):
        upper = builder.upper_of(v)
        return oracle_series(oracle, upper) - oracle_series(oracle, builder.down(upper))
    return oracle_series(oracle, v)


@dataclass
class Mismatch:
    variable: str
    grammar: list
    oracle: list


@dataclass
class CheckReport:
    order: int
    checked: list = field(default_factory=list)
    mismatches: list = field(default_factory=list)
    negative: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches and not self.negative


def section_series(sys: CatalyticSystem, sol: SeriesSolution, N: int, s: int = 1, k: int = 0) -> TruncatedSeries:
    """``F_{s;k}`` assembled from the solved finite system."""
    table = build_step_table(sys)
    cls = classify_prime_walks(table)
    ext = Extender(sol, table, cls, N)
    typed = sys.d > 1
    return build_recombination_plan(sys).apply(s, k, lambda a, b, c, d: ext(FVar(a, b, c, d, 0, typed)), N)


def check_against_oracle(sys: CatalyticSystem, N: int) -> CheckReport:
    """Solve the finite system to order N and compare every variable.

    The sections ``F_{s;0}`` are also rebuilt from the grammar and compared
    with the truncated infinite linear system.
    """
    table = build_step_table(sys)
    cls = classify_prime_walks(table)
    finite = build_finite_system(table, cls)
    sol = fixed_point_solve(finite, N)
    oracle = PathOracle(table, N)
    report = CheckReport(N)
    for v in finite.variables:
        got, ref = sol[v], oracle_series(oracle, v)
        report.checked.append(str(v))
        if got != ref:
            report.mismatches.append(Mismatch(str(v), list(got), list(ref)))
        if not got.is_nonnegative():
            report.negative.append(str(v))
    direct = solve_sections(sys, N, 0)
    for s in range(1, sys.d + 1):
        got = section_series(sys, sol, N, s, 0)
        name = str(SectionVar(s, 0, sys.d > 1))
        report.checked.append(name)
        if got != direct[(s, 0)]:
            report.mismatches.append(Mismatch(name, list(got), list(direct[(s, 0)])))
    return report
