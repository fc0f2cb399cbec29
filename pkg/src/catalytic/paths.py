"""Brute-force weighted path counting and level reachability.

The counts here never touch the grammar code; they are the reference the
compiled systems are checked against.  Weights are kept as exact integers
by scaling each step weight with ``D**width`` where D clears all
denominators, so the dynamic program runs on Python ints.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import networkx as nx

from .algebra import TruncatedSeries
from .errors import InvalidQueryError
from .model import StepTable


@dataclass(frozen=True)
class PathQuery:
    """Paths from ``(start_type, k1)`` to ``(end_type, k2)`` never below ``floor``.

    ``None`` for a type means "sum over all types".
    """

    start_type: int | None
    end_type: int | None
    k1: int
    k2: int
    floor: int
    nmax: int

    def __post_init__(self):
        if min(self.k1, self.k2, self.floor, self.nmax) < 0:
            raise InvalidQueryError("levels, floor and length must be nonnegative")
        if self.floor > min(self.k1, self.k2):
            raise InvalidQueryError(f"floor {self.floor} lies above a path endpoint ({self.k1}, {self.k2})")


def _scale_of(table: StepTable) -> int:
    D = 1
    for st in table.all_steps():
        D = math.lcm(D, st.weight.denominator)
    return D


def _unscale(values: list[int], D: int) -> TruncatedSeries:
    if D == 1:
        return TruncatedSeries(tuple(Fraction(v) for v in values))
    return TruncatedSeries(tuple(Fraction(v, D**n) for n, v in enumerate(values)))


class PathOracle:
    """Memoized dynamic programs over (width used, type, level)."""

    def __init__(self, table: StepTable, nmax: int):
        self.table = table
        self.nmax = nmax
        self.D = _scale_of(table)
        self._steps: dict = {}
        self._cache: dict = {}

    def _scaled_steps(self, s: int, k: int) -> list[tuple[int, int, int, int]]:
        key = (s, min(k, self.table.J))
        if key not in self._steps:
            D = self.D
            self._steps[key] = [
                (st.width, st.rise, st.target, int(st.weight * D**st.width))
                for st in self.table.steps_from(s, k)
            ]
        return self._steps[key]

    def _types(self, t: int | None) -> list[int]:
        return list(range(1, self.table.d + 1)) if t is None else [t]

    def from_start(self, s: int, k1: int, floor: int) -> dict:
        """Map (end type, end level) -> scaled coefficient list, for one start."""
        key = ("walk", s, k1, floor)
        if key in self._cache:
            return self._cache[key]
        N = self.nmax
        cap = k1 + N * max(self.table.L, 0)
        layers: list[dict] = [dict() for _ in range(N + 1)]
        layers[0][(s, k1)] = 1
        for n in range(N + 1):
            for (t, h), w in sorted(layers[n].items()):
                for width, rise, t2, sw in self._scaled_steps(t, h):
                    n2 = n + width
                    h2 = h + rise
                    if n2 > N or h2 < floor or h2 > cap:
                        continue
                    tgt = layers[n2]
                    tgt[(t2, h2)] = tgt.get((t2, h2), 0) + w * sw
        out: dict = {}
        for n, layer in enumerate(layers):
            for key2, w in layer.items():
                out.setdefault(key2, [0] * (N + 1))[n] += w
        self._cache[key] = out
        return out

    def count(self, q: PathQuery) -> TruncatedSeries:
        if q.nmax > self.nmax:
            raise InvalidQueryError(f"query length {q.nmax} exceeds oracle depth {self.nmax}")
        total = [0] * (q.nmax + 1)
        for s in self._types(q.start_type):
            table = self.from_start(s, q.k1, q.floor)
            for t in self._types(q.end_type):
                vals = table.get((t, q.k2))
                if vals:
                    for n in range(q.nmax + 1):
                        total[n] += vals[n]
        return _unscale(total, self.D)

    def prime_walk(self, s: int, t: int, start: int, end: int, interior_floor: int) -> TruncatedSeries:
        """Nonempty paths ``(s,start) -> (t,end)`` whose interior stays >= interior_floor.

        Requires ``end < interior_floor`` and ``start < interior_floor``: the
        walk stops the first time it drops below the interior floor.
        """
        key = ("prime", s, start, interior_floor)
        if key not in self._cache:
            N = self.nmax
            cap = max(start, interior_floor) + N * max(self.table.L, 0)
            layers: list[dict] = [dict() for _ in range(N + 1)]
            finished: dict = {}
            layers[0][(s, start)] = 1
            for n in range(N + 1):
                for (u, h), w in sorted(layers[n].items()):
                    for width, rise, u2, sw in self._scaled_steps(u, h):
                        n2 = n + width
                        h2 = h + rise
                        if n2 > N or h2 > cap:
                            continue
                        if h2 >= interior_floor:
                            layers[n2][(u2, h2)] = layers[n2].get((u2, h2), 0) + w * sw
                        else:
                            finished.setdefault((u2, h2), [0] * (N + 1))[n2] += w * sw
            self._cache[key] = finished
        vals = self._cache[key].get((t, end), [0] * (self.nmax + 1))
        return _unscale(vals, self.D)


def oracle_count(table: StepTable, q: PathQuery) -> TruncatedSeries:
    return PathOracle(table, q.nmax).count(q)


def enumerate_paths(table: StepTable, s: int, k1: int, floor: int, nmax: int):
    """Yield every allowed path ``(steps, end_type, end_level, width)`` exhaustively."""

    def rec(t, h, width, trail):
        yield trail, t, h, width
        for st in table.steps_from(t, h):
            if width + st.width <= nmax and h + st.rise >= floor:
                yield from rec(st.target, h + st.rise, width + st.width, trail + (st,))

    yield from rec(s, k1, 0, ())


def naive_count(table: StepTable, q: PathQuery) -> TruncatedSeries:
    """Exhaustive enumeration; exponential, used to cross-check the DP."""
    total = [Fraction(0)] * (q.nmax + 1)
    starts = range(1, table.d + 1) if q.start_type is None else [q.start_type]
    for s in starts:
        for trail, t, h, width in enumerate_paths(table, s, q.k1, q.floor, q.nmax):
            if h != q.k2 or (q.end_type is not None and t != q.end_type):
                continue
            w = Fraction(1)
            for st in trail:
                w *= st.weight
            total[width] += w
    return TruncatedSeries(tuple(total))


def replay_path(table: StepTable, start: tuple[int, int], steps, floor: int = 0) -> tuple[int, int]:
    """Check that ``steps`` form an allowed path from ``start``; return the end node."""
    t, h = start
    for st in steps:
        if st.source != t or st not in table.steps(t, st.target, h):
            raise ValueError(f"step {st} is not allowed at type {t}, level {h}")
        t, h = st.target, h + st.rise
        if h < floor:
            raise ValueError(f"path drops below level {floor}")
    return t, h


# ---------------------------------------------------------------------------
# strong connectivity of the infinite system


@dataclass
class ConnectivityVerdict:
    strongly_connected: bool
    cap: int
    window: tuple[int, int]
    witnesses: dict = field(default_factory=dict)  # ((t,h),(t2,h2)) -> tuple of Step
    counterexample: tuple | None = None
    note: str = ""


def _level_graph(table: StepTable, cap: int) -> nx.MultiDiGraph:
    g = nx.DiGraph()
    for t in range(1, table.d + 1):
        for h in range(cap + 1):
            g.add_node((t, h))
    for t in range(1, table.d + 1):
        for h in range(cap + 1):
            for st in table.steps_from(t, h):
                h2 = h + st.rise
                if 0 <= h2 <= cap and not g.has_edge((t, h), (st.target, h2)):
                    g.add_edge((t, h), (st.target, h2), step=st)
    return g


def _window_partition(g, window_nodes) -> frozenset:
    comp_of = {}
    for i, comp in enumerate(nx.strongly_connected_components(g)):
        for v in comp:
            comp_of[v] = i
    groups: dict = {}
    for v in window_nodes:
        groups.setdefault(comp_of[v], set()).add(v)
    return frozenset(frozenset(x) for x in groups.values())


def _bfs_path(g, a, b) -> tuple | None:
    if a == b:
        return ()
    prev = {a: None}
    dq = deque([a])
    while dq:
        u = dq.popleft()
        for v in sorted(g.successors(u)):
            if v not in prev:
                prev[v] = u
                if v == b:
                    steps = []
                    while v != a:
                        p = prev[v]
                        steps.append(g.edges[p, v]["step"])
                        v = p
                    return tuple(reversed(steps))
                dq.append(v)
    return None


def check_strong_connectivity(table: StepTable, max_cap: int = 1024) -> ConnectivityVerdict:
    """Decide whether every (type, level) node reaches every other one.

    Nodes above the stable level behave like translates of each other, so
    it suffices that all nodes of the window of levels 0..J+L lie in one
    strongly connected component of some finite truncation: translating a
    witness path upwards keeps it allowed.  The truncation grows until the
    window partition stops changing.
    """
    J, L, d = table.J, table.max_rise, table.d
    window = (0, J + max(L, 1))
    window_nodes = [(t, h) for t in range(1, d + 1) for h in range(window[0], window[1] + 1)]
    cap = 2 * (J + max(L, 1))
    g = _level_graph(table, cap)
    part = _window_partition(g, window_nodes)
    while cap < max_cap:
        cap2 = cap * 2
        g2 = _level_graph(table, cap2)
        part2 = _window_partition(g2, window_nodes)
        cap, g = cap2, g2
        if part2 == part:
            break
        part = part2
    root = window_nodes[0]
    if len(part) == 1:
        witnesses = {}
        for v in window_nodes:
            if v == root:
                continue
            witnesses[(root, v)] = _bfs_path(g, root, v)
            witnesses[(v, root)] = _bfs_path(g, v, root)
        return ConnectivityVerdict(True, cap, window, witnesses)
    for a in window_nodes:
        for b in window_nodes:
            if a != b and _bfs_path(g, a, b) is None:
                return ConnectivityVerdict(False, cap, window, {}, (a, b), f"no path from {a} to {b} within levels 0..{cap}")
    # every window pair is connected but through different components: impossible
    return ConnectivityVerdict(False, cap, window, {}, None, "window split across components")
