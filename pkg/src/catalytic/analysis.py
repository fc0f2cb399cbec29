"""Dominant singularity, period and coefficient asymptotics of positive systems.

Numerics are plain double precision; certificates use interval arithmetic
from :mod:`mpmath`.  For a strongly connected nonlinear system the smallest
positive singularity is a critical point of ``y = Phi(x, y)``, where
``I - dPhi/dy`` becomes singular.  It is located by bracketing (Newton's
method from zero converges below the singularity and breaks down above it)
and refined on the extended system

    y = Phi(x, y),   (I - Phi_y) v = 0,   w . v = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import networkx as nx
import numba
import numpy as np
from mpmath import iv

from .algebra import PositivePolynomialSystem, ProductPlan, var_key
from .errors import AnalysisError, UnsupportedCaseError

FORMAT_VERSION = 1
NEWTON_TOL = 1e-13
CERTIFICATE_TOL = 1e-10


# ---------------------------------------------------------------------------
# condensation


@dataclass
class ComponentDAG:
    components: list  # tuples of variables, dependencies before dependents
    edges: set  # (i, j): component i uses component j
    designated: int | None
    index: dict  # variable -> component number

    def component_of(self, v) -> tuple:
        return self.components[self.index[v]]

    def below(self, i: int) -> set:
        """Components that component i depends on, itself included."""
        out = {i}
        stack = [i]
        while stack:
            a = stack.pop()
            for x, y in self.edges:
                if x == a and y not in out:
                    out.add(y)
                    stack.append(y)
        return out


def dependency_graph(system: PositivePolynomialSystem) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(system.variables)
    for v in system.variables:
        for w in system.dependencies(v):
            g.add_edge(v, w)
    return g


def scc_condensation(system: PositivePolynomialSystem, designated=None) -> ComponentDAG:
    g = dependency_graph(system)
    cond = nx.condensation(g)
    # reverse topological order of "uses" edges puts dependencies first
    order = list(reversed(list(nx.lexicographical_topological_sort(
        cond, key=lambda c: min(var_key(v) for v in cond.nodes[c]["members"])
    ))))
    renumber = {c: i for i, c in enumerate(order)}
    comps = [tuple(sorted(cond.nodes[c]["members"], key=var_key)) for c in order]
    edges = {(renumber[a], renumber[b]) for a, b in cond.edges}
    index = {v: i for i, comp in enumerate(comps) for v in comp}
    des = index.get(designated) if designated is not None else None
    return ComponentDAG(comps, edges, des, index)


def is_strongly_connected_component(system: PositivePolynomialSystem, comp) -> bool:
    g = dependency_graph(system).subgraph(comp)
    if len(comp) == 1:
        v = next(iter(comp))
        return g.has_edge(v, v)
    return nx.is_strongly_connected(g)


# ---------------------------------------------------------------------------
# numeric evaluation with derivatives


class NumericSystem:
    """Evaluation of ``Phi`` and its derivatives for any number type.

    The same code runs on floats and on ``mpmath.iv`` intervals.
    """

    def __init__(self, system: PositivePolynomialSystem):
        self.system = system
        self.variables = system.variables
        self.index = {v: i for i, v in enumerate(self.variables)}
        self.n = len(self.variables)
        self.terms = [
            [(m.coef, m.xexp, tuple(self.index[w] for w in m.vars)) for m in system.rhs[v]]
            for v in self.variables
        ]
        self.fterms = [[(float(c), e, idx) for c, e, idx in row] for row in self.terms]

    def _rows(self, interval: bool):
        if interval:
            return [[(iv.mpf(c.numerator) / c.denominator, e, idx) for c, e, idx in row] for row in self.terms]
        return self.fterms

    @staticmethod
    def _prod(y, idx, skip=()):
        p = 1
        for q, j in enumerate(idx):
            if q not in skip:
                p = p * y[j]
        return p

    def phi(self, x, y, interval=False):
        out = []
        for row in self._rows(interval):
            acc = 0
            for c, e, idx in row:
                acc = acc + c * x**e * self._prod(y, idx)
            out.append(acc)
        return out

    def phi_x(self, x, y, interval=False):
        out = []
        for row in self._rows(interval):
            acc = 0
            for c, e, idx in row:
                if e:
                    acc = acc + c * e * x ** (e - 1) * self._prod(y, idx)
            out.append(acc)
        return out

    def jacobian(self, x, y, interval=False):
        n = self.n
        J = [[0] * n for _ in range(n)]
        for i, row in enumerate(self._rows(interval)):
            for c, e, idx in row:
                ce = c * x**e
                for p, j in enumerate(idx):
                    J[i][j] = J[i][j] + ce * self._prod(y, idx, (p,))
        return J

    def phi_xy_v(self, x, y, v, interval=False):
        out = []
        for row in self._rows(interval):
            acc = 0
            for c, e, idx in row:
                if e:
                    ce = c * e * x ** (e - 1)
                    for p, j in enumerate(idx):
                        acc = acc + ce * v[j] * self._prod(y, idx, (p,))
            out.append(acc)
        return out

    def hessian_v(self, x, y, v, interval=False):
        """Matrix ``H[i][j] = sum_k d2 Phi_i / dy_j dy_k * v_k``."""
        n = self.n
        H = [[0] * n for _ in range(n)]
        for i, row in enumerate(self._rows(interval)):
            for c, e, idx in row:
                if len(idx) < 2:
                    continue
                ce = c * x**e
                for p, j in enumerate(idx):
                    for q, k in enumerate(idx):
                        if p != q:
                            H[i][j] = H[i][j] + ce * v[k] * self._prod(y, idx, (p, q))
        return H

    def hessian_vv(self, x, y, v):
        H = np.array(self.hessian_v(x, y, v), dtype=float)
        return H @ np.asarray(v, dtype=float)

    # float conveniences
    def F(self, x, y) -> np.ndarray:
        return np.array(self.phi(x, list(y)), dtype=float)

    def Jy(self, x, y) -> np.ndarray:
        return np.array(self.jacobian(x, list(y)), dtype=float).reshape(self.n, self.n)


def spectral_radius(M: np.ndarray) -> float:
    if M.size == 0:
        return 0.0
    return float(max(abs(np.linalg.eigvals(M))))


def perron_vector(M: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eig(M)
    k = int(np.argmax(vals.real))
    v = np.abs(vecs[:, k].real)
    return v / v.sum() if v.sum() > 0 else v


def minimal_solution(ns: NumericSystem, x: float, max_iter: int = 300) -> np.ndarray | None:
    """Least nonnegative solution at x by Newton's method from zero, or None.

    Below the singularity the iterates increase to the solution and the
    Jacobian stays subcritical; otherwise the iteration breaks down.
    """
    n = ns.n
    y = np.zeros(n)
    I = np.eye(n)
    for _ in range(max_iter):
        F = ns.F(x, y) - y
        scale = 1.0 + float(np.max(np.abs(y))) if n else 1.0
        if not n or float(np.max(np.abs(F))) <= 1e-15 * scale:
            return y
        Jm = ns.Jy(x, y)
        if spectral_radius(Jm) >= 1.0:
            return None
        try:
            step = np.linalg.solve(I - Jm, F)
        except np.linalg.LinAlgError:
            return None
        y_new = y + step
        if not np.all(np.isfinite(y_new)) or float(np.max(np.abs(y_new))) > 1e12:
            return None
        if float(np.max(np.abs(step))) <= 1e-16 * scale:
            return y_new
        y = y_new
    return None


def feasibility_bracket(ns: NumericSystem, rel_tol: float = 1e-11, x_max: float = 1e6) -> tuple[float, float]:
    """``(lo, hi)`` with the least solution existing at lo and not at hi."""
    lo, hi = 0.0, 0.25
    while minimal_solution(ns, hi) is not None:
        lo, hi = hi, hi * 2
        if hi > x_max:
            raise AnalysisError("no singularity found: the solution looks entire (polynomial)")
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if minimal_solution(ns, mid) is None:
            hi = mid
        else:
            lo = mid
    return lo, hi


# ---------------------------------------------------------------------------
# critical point


@dataclass
class CriticalPoint:
    rho: float
    y: np.ndarray
    v: np.ndarray  # right null vector of I - Phi_y
    u: np.ndarray  # left null vector
    kind: str  # "square-root" or "pole"
    bracket: tuple
    rho_interval: tuple
    certified: bool
    residuals: dict = field(default_factory=dict)
    variables: tuple = ()

    def value(self, var) -> float:
        return float(self.y[self.variables.index(var)])


def _extended_residual(ns, z, w):
    n = ns.n
    x, y, v = z[0], z[1 : n + 1], z[n + 1 :]
    Jm = ns.Jy(x, y)
    return np.concatenate([y - ns.F(x, y), v - Jm @ v, [w @ v - 1.0]])


def _extended_jacobian(ns, z, w):
    n = ns.n
    x, y, v = z[0], list(z[1 : n + 1]), list(z[n + 1 :])
    Jm = ns.Jy(x, y)
    I = np.eye(n)
    G = np.zeros((2 * n + 1, 2 * n + 1))
    G[:n, 0] = -np.array(ns.phi_x(x, y), dtype=float)
    G[:n, 1 : n + 1] = I - Jm
    G[n : 2 * n, 0] = -np.array(ns.phi_xy_v(x, y, v), dtype=float)
    G[n : 2 * n, 1 : n + 1] = -np.array(ns.hessian_v(x, y, v), dtype=float).reshape(n, n)
    G[n : 2 * n, n + 1 :] = I - Jm
    G[2 * n, n + 1 :] = w
    return G


def _interval_extended(ns, Z, w):
    """Interval residual and Jacobian of the extended system over box Z."""
    n = ns.n
    x, y, v = Z[0], Z[1 : n + 1], Z[n + 1 :]
    wi = [iv.mpf(float(a)) for a in w]
    phi = ns.phi(x, y, True)
    Jm = ns.jacobian(x, y, True)
    res = [y[i] - phi[i] for i in range(n)]
    res += [v[i] - sum((Jm[i][j] * v[j] for j in range(n)), iv.mpf(0)) for i in range(n)]
    res.append(sum((wi[j] * v[j] for j in range(n)), iv.mpf(0)) - 1)
    return res, Jm, phi


def _krawczyk(ns, z: np.ndarray, w: np.ndarray, radius: float):
    """Return the contracted box if Krawczyk's test proves a unique zero."""
    n = ns.n
    m = 2 * n + 1
    C = np.linalg.inv(_extended_jacobian(ns, z, w))
    zc = [iv.mpf(float(a)) for a in z]
    r = [radius * max(1.0, abs(float(a))) for a in z]
    Z = [iv.mpf([float(a) - ri, float(a) + ri]) for a, ri in zip(z, r)]
    Gc, _, _ = _interval_extended(ns, zc, w)
    # interval extended Jacobian over Z
    x, y, v = Z[0], Z[1 : n + 1], Z[n + 1 :]
    Jm = ns.jacobian(x, y, True)
    px = ns.phi_x(x, y, True)
    pxv = ns.phi_xy_v(x, y, v, True)
    Hv = ns.hessian_v(x, y, v, True)
    JG = [[iv.mpf(0)] * m for _ in range(m)]
    for i in range(n):
        JG[i][0] = -px[i]
        JG[n + i][0] = -pxv[i]
        for j in range(n):
            d = (1 if i == j else 0) - Jm[i][j]
            JG[i][1 + j] = d
            JG[n + i][1 + j] = -Hv[i][j]
            JG[n + i][n + 1 + j] = d
    for j in range(n):
        JG[2 * n][n + 1 + j] = iv.mpf(float(w[j]))
    Ci = [[iv.mpf(float(C[i][j])) for j in range(m)] for i in range(m)]
    dZ = [Z[j] - zc[j] for j in range(m)]
    K = []
    for i in range(m):
        cg = sum((Ci[i][j] * Gc[j] for j in range(m)), iv.mpf(0))
        acc = zc[i] - cg
        # (I - C JG) row i applied to dZ
        row = []
        for j in range(m):
            s = sum((Ci[i][k] * JG[k][j] for k in range(m) if JG[k][j] != 0), iv.mpf(0))
            row.append((1 if i == j else 0) - s)
        acc = acc + sum((row[j] * dZ[j] for j in range(m)), iv.mpf(0))
        if not (acc.a > Z[i].a and acc.b < Z[i].b):
            return None
        K.append(acc)
    return K


def residual_certificate(ns: NumericSystem, rho: float, y: np.ndarray, max_det_dim: int = 30) -> dict:
    """Interval bounds on ``|y - Phi(rho, y)|`` and ``|det(I - Phi_y)|`` at the point.

    Above ``max_det_dim`` variables the determinant is evaluated in floating
    point only, since interval elimination becomes slow and overly wide.
    """
    n = ns.n
    x = iv.mpf(float(rho))
    yi = [iv.mpf(float(a)) for a in y]
    phi = ns.phi(x, yi, True)
    fp = max((abs(yi[i] - phi[i]).b for i in range(n)), default=0)
    if n > max_det_dim:
        det = abs(float(np.linalg.det(np.eye(n) - ns.Jy(rho, y))))
        return {"fixed_point_residual": float(fp), "det_bound": det, "det_method": "float"}
    Jm = ns.jacobian(x, yi, True)
    M = iv.matrix(n, n)
    for i in range(n):
        for j in range(n):
            M[i, j] = (1 if i == j else 0) - Jm[i][j]
    det = iv.mpf(iv.det(M)) if n else iv.mpf(1)
    return {
        "fixed_point_residual": float(fp),
        "det_bound": float(max(abs(det.a), abs(det.b))),
        "det_method": "interval",
    }


def find_dominant_singularity(
    system: PositivePolynomialSystem,
    component=None,
    certify: bool = True,
    max_certify_dim: int = 61,
) -> CriticalPoint:
    """Smallest positive singularity of the least solution of a closed system.

    ``component`` names the strongly connected component whose behaviour is
    of interest; when it is linear in its own variables the singularity is
    a pole located where the spectral radius of its block reaches one.
    """
    ns = NumericSystem(system)
    n = ns.n
    lo, hi = feasibility_bracket(ns)
    y_lo = minimal_solution(ns, lo)
    comp = list(component) if component is not None else list(system.variables)
    Jm = ns.Jy(lo, y_lo)
    if system.is_linear_in(comp):
        idx = [ns.index[v] for v in comp]
        if spectral_radius(Jm[np.ix_(idx, idx)]) > 1 - 1e-4:
            return _pole(ns, comp, lo, hi, y_lo)
    v0 = perron_vector(Jm)
    w = v0 / float(v0 @ v0)
    z = np.concatenate([[lo], y_lo, v0])
    res = _extended_residual(ns, z, w)
    for _ in range(200):
        nrm = float(np.max(np.abs(res)))
        if nrm < NEWTON_TOL * 1e-2:
            break
        try:
            dz = np.linalg.solve(_extended_jacobian(ns, z, w), -res)
        except np.linalg.LinAlgError:
            raise AnalysisError(f"singular extended Jacobian; last bracket [{lo}, {hi}]") from None
        t = 1.0
        while t > 1e-6:
            z_new = z + t * dz
            res_new = _extended_residual(ns, z_new, w)
            if float(np.max(np.abs(res_new))) < nrm or nrm < NEWTON_TOL:
                break
            t *= 0.5
        if float(np.max(np.abs(z_new - z))) <= 1e-17 * max(1.0, float(np.max(np.abs(z)))):
            z, res = z_new, res_new
            break
        z, res = z_new, res_new
    nrm = float(np.max(np.abs(res)))
    rho = float(z[0])
    if nrm > NEWTON_TOL or not (lo - 1e-7 * hi <= rho <= hi + 1e-7 * hi):
        raise AnalysisError(
            f"critical point solve did not converge (residual {nrm:.3g}, x={rho}); last bracket [{lo}, {hi}]"
        )
    y = z[1 : n + 1]
    v = z[n + 1 :]
    if v.sum() < 0:
        v = -v
    M = np.eye(n) - ns.Jy(rho, y)
    U, S, Vt = np.linalg.svd(M)
    u = U[:, -1]
    if u.sum() < 0:
        u = -u
    sigma2 = float(S[-2]) if n > 1 else float("inf")
    residuals = {
        "extended_residual": nrm,
        "smallest_singular_value": float(S[-1]),
        "second_singular_value": sigma2,
        "condition_extended": float(np.linalg.cond(_extended_jacobian(ns, z, w))),
        "left_right_overlap": float(abs(u @ v) / (np.linalg.norm(u) * np.linalg.norm(v))),
    }
    if sigma2 < 1e-8 or residuals["left_right_overlap"] < 1e-12:
        raise UnsupportedCaseError(
            f"critical eigenvalue is not simple (second singular value {sigma2:.3g}, "
            f"overlap {residuals['left_right_overlap']:.3g})"
        )
    residuals.update(residual_certificate(ns, rho, y))
    interval = (lo, hi)
    certified = False
    if certify and 2 * n + 1 <= max_certify_dim:
        for radius in (1e-13, 1e-12, 1e-11):
            K = _krawczyk(ns, z, w, radius)
            if K is not None:
                interval = (float(K[0].a), float(K[0].b))
                certified = True
                break
    return CriticalPoint(rho, y, v, u, "square-root", (lo, hi), interval, certified, residuals, tuple(system.variables))


def _pole(ns, comp, lo, hi, y_lo) -> CriticalPoint:
    idx = [ns.index[v] for v in comp]
    rho = 0.5 * (lo + hi)
    y = y_lo.copy()
    y[idx] = np.inf
    zero = np.zeros(ns.n)
    block = ns.Jy(lo, y_lo)[np.ix_(idx, idx)]
    res = {"block_spectral_radius_below": spectral_radius(block)}
    return CriticalPoint(rho, y, zero, zero, "pole", (lo, hi), (lo, hi), False, res, tuple(ns.variables))


# ---------------------------------------------------------------------------
# period and constants


@dataclass(frozen=True)
class PeriodResult:
    M: int | None
    phase: int | None
    degenerate: bool


def _support(coeffs, start: int = 0) -> list[int]:
    return [n for n in range(start, len(coeffs)) if coeffs[n] != 0]


def compute_period(series, offset_window: int = 0) -> PeriodResult:
    """gcd of the gaps between exponents with nonzero coefficient.

    Fewer than two nonzero coefficients give a degenerate verdict.
    """
    supp = _support(list(series), offset_window)
    if len(supp) < 2:
        return PeriodResult(None, None, True)
    g = 0
    for a in supp[1:]:
        g = math.gcd(g, a - supp[0])
    return PeriodResult(g, supp[0] % g, False)


def singular_amplitude(system: PositivePolynomialSystem, cp: CriticalPoint) -> np.ndarray:
    """Coefficients b with ``y(x) ~ y(rho) - b sqrt(1 - x/rho)`` near rho."""
    ns = NumericSystem(system)
    y = list(cp.y)
    v = cp.v
    num = float(cp.u @ np.array(ns.phi_x(cp.rho, y), dtype=float))
    den = float(cp.u @ ns.hessian_vv(cp.rho, y, list(v)))
    if num <= 0 or den <= 0:
        raise UnsupportedCaseError(f"degenerate local expansion (u.Phi_x={num:.3g}, u.Phi_yy[v,v]={den:.3g})")
    beta = math.sqrt(2 * cp.rho * num / den)
    return beta * v


def asymptotic_constants(system: PositivePolynomialSystem, cp: CriticalPoint, var, period: PeriodResult) -> dict:
    """``c_m`` with ``[x^n] y_var ~ c_m rho^-n n^-3/2`` for ``n = m mod M``.

    With period M the M conjugate singularities on the circle of radius rho
    contribute equally on the occupied residue class and cancel elsewhere.
    """
    if cp.kind != "square-root":
        raise UnsupportedCaseError("constants are only defined at a square-root singularity")
    if period.degenerate:
        raise UnsupportedCaseError(f"{var} has a degenerate (polynomial-looking) series")
    b = singular_amplitude(system, cp)[system.variables.index(var)]
    M = period.M
    return {m: (M * float(b) / (2 * math.sqrt(math.pi)) if m == period.phase else 0.0) for m in range(M)}


# ---------------------------------------------------------------------------
# floating point series


@dataclass
class ScaledSeries:
    """Float coefficients ``b_n = a_n * scale**n``."""

    b: np.ndarray
    scale: float

    def log_coefficient(self, n: int) -> float:
        return math.log(self.b[n]) - n * math.log(self.scale)

    def nonzero(self, n: int) -> bool:
        return self.b[n] > 0

    def __len__(self):
        return len(self.b)


@numba.njit(cache=True, fastmath=True)
def _series_orders(S, N, V, A, B, mv, ms, me, mc, cv, ce, cc, R):
    n_slots = S.shape[0]
    P = A.shape[0]
    # W[:, N - n] mirrors S[:, n] so both convolution factors run forwards
    W = np.zeros_like(S)
    W[:, N] = S[:, 0]
    rhs = np.zeros(n_slots)
    for n in range(1, N + 1):
        rhs[:] = 0.0
        off = N - n
        for p in range(P):
            a, b = A[p], B[p]
            acc = 0.0
            for j in range(1, n):
                acc += S[a, j] * W[b, off + j]
            rhs[V + p] = acc
        for q in range(mv.shape[0]):
            if me[q] <= n:
                rhs[mv[q]] += mc[q] * S[ms[q], n - me[q]]
        for q in range(cv.shape[0]):
            if ce[q] == n:
                rhs[cv[q]] += cc[q]
        col = R @ rhs
        S[:, n] = col
        W[:, N - n] = col


def numeric_series(system: PositivePolynomialSystem, N: int, scale: float = 1.0) -> dict:
    """Float series solution of ``y(scale*x)`` to order N.

    At each order the new coefficients of all variables and product slots
    depend linearly (and acyclically) on each other through the terms
    without a power of x, so one precomputed resolvent solves every order.
    """
    plan = ProductPlan(system)
    V = len(plan.variables)
    n_slots = plan.n_slots
    const = plan.constant_terms(Fraction(0), lambda a, b: a + b, lambda a, b: a * b, lambda c: c)
    plan.sweep_order(const, lambda z: z == 0)  # raises on an instantaneous cycle
    S = np.zeros((n_slots, N + 1))
    S[:V, 0] = [float(c) for c in const]
    for p, (a, b) in enumerate(plan.products):
        S[V + p, 0] = S[a, 0] * S[b, 0]
    T = np.zeros((n_slots, n_slots))
    mv, ms, me, mc = [], [], [], []
    cv, ce, cc = [], [], []
    for i, row in enumerate(plan.monomials):
        for c, e, slot in row:
            w = float(c) * scale**e
            if slot is None:
                if e >= 1:
                    cv.append(i), ce.append(e), cc.append(w)
            elif e >= 1:
                mv.append(i), ms.append(slot), me.append(e), mc.append(w)
            else:
                T[i, slot] += w
    for p, (a, b) in enumerate(plan.products):
        T[V + p, b] += S[a, 0]
        T[V + p, a] += S[b, 0]
    # T is nilpotent: (I - T)^-1 = (I + T)(I + T^2)(I + T^4)...
    R = np.eye(n_slots)
    Tp = T
    while Tp.any():
        R = R + R @ Tp
        Tp = Tp @ Tp
    mv, ms, me, mc = (np.array(z, dtype=t) for z, t in ((mv, np.int64), (ms, np.int64), (me, np.int64), (mc, float)))
    cv, ce, cc = (np.array(z, dtype=t) for z, t in ((cv, np.int64), (ce, np.int64), (cc, float)))
    A = np.array([a for a, _ in plan.products], dtype=np.int64)
    B = np.array([b for _, b in plan.products], dtype=np.int64)
    _series_orders(S, N, V, A, B, mv, ms, me, mc, cv, ce, cc, np.ascontiguousarray(R))
    return {v: ScaledSeries(S[i].copy(), scale) for i, v in enumerate(plan.variables)}


# ---------------------------------------------------------------------------
# empirical checks


@dataclass
class EmpiricalEstimate:
    status: str  # "ok" or "insufficient-depth"
    constants: dict = field(default_factory=dict)
    exponent: float | None = None
    dominant_class: int | None = None
    detail: str = ""


def _log_coefficient(series, n: int) -> float | None:
    if isinstance(series, ScaledSeries):
        return series.log_coefficient(n) if series.b[n] > 0 else None
    a = series[n]
    if a <= 0:
        return None
    a = Fraction(a)
    return math.log(a.numerator) - math.log(a.denominator)


def _class_hat(series, rho: float, n: int, alpha: float) -> float | None:
    la = _log_coefficient(series, n)
    if la is None:
        return None
    return math.exp(la + n * math.log(rho) - alpha * math.log(n))


def empirical_asymptotics(
    series,
    rho: float,
    M: int,
    window: tuple[int, int] | None = None,
    exponent: float = -1.5,
) -> EmpiricalEstimate:
    """Richardson-extrapolated ``a_n rho^n n^{3/2}`` per residue class and a
    least-squares estimate of the polynomial exponent.
    """
    N = len(series) - 1
    consts = {}
    for m in range(M):
        idx = [n for n in range(max(m, 1), N + 1, 1) if n % M == m]
        nz = [n for n in idx if _log_coefficient(series, n) is not None]
        if not nz:
            consts[m] = 0.0
            continue
        if len(nz) < 16:
            return EmpiricalEstimate("insufficient-depth", detail=f"class {m} has {len(nz)} nonzero terms")
        q = ((N - m) // M) // 2
        n1, n2 = m + M * q, m + 2 * M * q
        h1 = _class_hat(series, rho, n1, exponent)
        h2 = _class_hat(series, rho, n2, exponent)
        if h1 is None or h2 is None:
            return EmpiricalEstimate("insufficient-depth", detail=f"class {m} has gaps at {n1}, {n2}")
        consts[m] = 2 * h2 - h1
    dom = max(consts, key=lambda m: consts[m])
    lo, hi = window if window else (max(1, N // 8), N)
    pts = [(math.log(n), _log_coefficient(series, n) + n * math.log(rho)) for n in range(lo, hi + 1)
           if n % M == dom and _log_coefficient(series, n) is not None]
    if len(pts) < 16:
        return EmpiricalEstimate("insufficient-depth", consts, None, dom, "too few points for the exponent fit")
    xs, ys = zip(*pts)
    slope = float(np.polyfit(xs, ys, 1)[0])
    return EmpiricalEstimate("ok", consts, slope, dom)


def is_polynomial_like(series, tail_fraction: float = 0.5) -> bool:
    N = len(series) - 1
    start = int(N * (1 - tail_fraction))
    if isinstance(series, ScaledSeries):
        return not np.any(series.b[start:] > 0)
    return all(series[n] == 0 for n in range(start, N + 1))


def ratio_test_rho(series) -> float | None:
    """Radius estimate from coefficient ratios along the occupied residue class."""
    N = len(series) - 1
    per = compute_period(series.b if isinstance(series, ScaledSeries) else list(series))
    if per.degenerate:
        return None
    M, ph = per.M, per.phase
    last = ph + M * ((N - ph) // M)

    def r(n):
        a, b = _log_coefficient(series, n - M), _log_coefficient(series, n)
        if a is None or b is None:
            return None
        return math.exp((a - b) / M)

    n2 = last
    n1 = ph + M * (((n2 - ph) // M) // 2)
    r1, r2 = r(n1), r(n2)
    if r1 is None or r2 is None:
        return None
    return 2 * r2 - r1 if n1 > 0 else r2


# ---------------------------------------------------------------------------
# report


@dataclass
class SingularityReport:
    target: str
    rho: float
    rho_interval: tuple
    certified: bool
    kind: str  # "square-root", "pole", or "empirical-only"
    period: int | None
    phase: int | None
    constants: dict
    exponent: float | None
    critical_vector: dict
    hypothesis_met: bool
    components: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    series: dict = field(default=None, repr=False, compare=False)  # float series, not serialized

    def to_json(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "target": self.target,
            "rho": self.rho,
            "rho_interval": list(self.rho_interval),
            "certified": self.certified,
            "singularity": self.kind,
            "period": self.period,
            "phase": self.phase,
            "constants": [{"m": m, "c": c} for m, c in sorted(self.constants.items())],
            "exponent": self.exponent,
            "strongly_connected_hypothesis": self.hypothesis_met,
            "critical_vector": self.critical_vector,
            "components": self.components,
            "diagnostics": self.diagnostics,
        }

    def render(self) -> str:
        lines = []
        if not self.hypothesis_met:
            lines.append("NOTE: the system is not strongly connected; the square-root law is not claimed")
            lines.append("      (exponents of the form 2^-k or -m 2^-k may occur; only an empirical estimate is given)")
        lines.append(f"target: {self.target}")
        lines.append(f"rho = {self.rho:.15g}  interval [{self.rho_interval[0]:.17g}, {self.rho_interval[1]:.17g}]"
                     + ("  (certified)" if self.certified else ""))
        lines.append(f"singularity: {self.kind}")
        if self.period is not None:
            lines.append(f"period M = {self.period} (phase {self.phase})")
        for m, c in sorted(self.constants.items()):
            lines.append(f"c_{m} = {c:.10g}")
        if self.exponent is not None:
            lines.append(f"exponent = {self.exponent:.6g}")
        for k, v in self.diagnostics.items():
            lines.append(f"{k}: {v}")
        return "\n".join(lines) + "\n"


def component_verdicts(system: PositivePolynomialSystem, dag: ComponentDAG, rel_tol: float = 1e-7) -> list[dict]:
    """Radius of convergence of every component, bottom-up, with its origin."""
    radii: dict = {}
    out = []
    for i, comp in enumerate(dag.components):
        sub = system.restrict(comp)
        below = [j for j in dag.below(i) if j != i]
        ns = NumericSystem(sub)
        try:
            lo, hi = feasibility_bracket(ns, rel_tol=1e-9)
            rho = 0.5 * (lo + hi)
        except AnalysisError:
            rho = math.inf
        radii[i] = rho
        inherited = [j for j in below if radii[j] <= rho * (1 + rel_tol)]
        if rho == math.inf:
            verdict = "entire"
        elif inherited:
            verdict = "inherited"
        elif is_strongly_connected_component(system, comp):
            verdict = "pole" if system.is_linear_in(comp) else "square-root"
        else:
            verdict = "inherited"
        out.append({
            "component": [str(v) for v in comp],
            "rho": rho if rho != math.inf else None,
            "verdict": verdict,
        })
    return out


def check_domination(system: PositivePolynomialSystem, solution) -> list:
    """Pairs (v, w) where ``[x^n] v < [x^n] (c x^e w)`` for some term of v's equation.

    Every equation ``v = c x^e w + rest`` with a nonnegative rest makes v
    dominate ``c x^e w`` coefficientwise; an empty list means this holds.
    """
    bad = []
    for v in system.variables:
        sv = solution[v]
        for m in system.rhs[v]:
            if len(m.vars) != 1:
                continue
            w = m.vars[0]
            part = solution[w].scale(m.coef).shift(m.xexp)
            if any(a < b for a, b in zip(sv, part)):
                bad.append((v, w))
    return bad


def propagation_check(series: dict, rho: float) -> dict:
    """Ratio-test radius of every non-polynomial series against rho."""
    worst, worst_var, checked = 0.0, None, 0
    for v, ser in series.items():
        if is_polynomial_like(ser):
            continue
        r = ratio_test_rho(ser)
        dev = abs(r - rho) / rho if r is not None else math.inf
        checked += 1
        if dev > worst or worst_var is None:
            worst, worst_var = dev, v
    return {"propagation_checked": checked, "propagation_max_rel_dev": worst,
            "propagation_worst": str(worst_var) if worst_var is not None else None}


def analyze_system(
    system: PositivePolynomialSystem,
    target,
    hypothesis_met: bool = True,
    empirical_depth: int = 4000,
    exact_depth: int = 96,
    certify: bool = True,
    per_component: bool = True,
) -> SingularityReport:
    """Full asymptotic report for one variable of a closed positive system.

    ``hypothesis_met=False`` skips the critical point analysis and reports
    only the radius and an empirical exponent.
    """
    from .algebra import fixed_point_solve

    system = system.restrict([target])
    dag = scc_condensation(system, target)
    designated = None
    for i in sorted(dag.below(dag.designated), reverse=True):
        comp = dag.components[i]
        if is_strongly_connected_component(system, comp):
            designated = comp
            break
    period = compute_period(fixed_point_solve(system, exact_depth)[target])
    M = period.M or 1
    diagnostics: dict = {}
    components = component_verdicts(system, dag) if per_component else []
    if not hypothesis_met or designated is None:
        ns = NumericSystem(system)
        lo, hi = feasibility_bracket(ns)
        rho = 0.5 * (lo + hi)
        series = numeric_series(system, empirical_depth, rho)
        est = empirical_asymptotics(series[target], rho, M, exponent=0.0)
        diagnostics["empirical_status"] = est.status
        diagnostics["empirical_depth"] = empirical_depth
        report = SingularityReport(
            str(target), rho, (lo, hi), False, "empirical-only", period.M, period.phase, {},
            est.exponent, {}, False, components, diagnostics,
        )
        report.series = series
        return report
    cp = find_dominant_singularity(system, designated, certify=certify)
    crit = {str(v): float(cp.y[i]) for i, v in enumerate(system.variables)}
    diagnostics.update(cp.residuals)
    series = numeric_series(system, empirical_depth, cp.rho)
    ser = series[target]
    diagnostics["empirical_depth"] = empirical_depth
    if cp.kind == "pole":
        est = empirical_asymptotics(ser, cp.rho, M, exponent=0.0)
        consts, exponent = {}, 0.0
    else:
        consts = asymptotic_constants(system, cp, target, period)
        est = empirical_asymptotics(ser, cp.rho, M)
        exponent = -1.5
    diagnostics["empirical_status"] = est.status
    diagnostics["empirical_constants"] = {str(m): c for m, c in est.constants.items()}
    diagnostics["empirical_exponent"] = est.exponent
    diagnostics["ratio_test_rho"] = ratio_test_rho(ser)
    diagnostics.update(propagation_check(series, cp.rho))
    report = SingularityReport(str(target), cp.rho, cp.rho_interval, cp.certified, cp.kind, period.M, period.phase,
                               consts, exponent, crit, True, components, diagnostics)
    report.series = series
    return report


# ---------------------------------------------------------------------------
# from a catalytic system


@dataclass
class TargetSystem:
    """A closed positive system containing the section ``F_{1;0}``."""

    system: PositivePolynomialSystem
    target: object
    strongly_connected: bool
    connectivity: object


def target_rhs(sys, table, cls) -> tuple[object, dict]:
    """Raw equation of ``F_{1;0}`` as a combination of path counts."""
    from .grammar import DecompositionRules
    from .model import SectionVar, build_recombination_plan
    from .algebra import Monomial

    rules = DecompositionRules(table, cls)
    target = SectionVar(1, 0, sys.d > 1)
    monos = []
    for t, m, poly in build_recombination_plan(sys).terms:
        f = rules.F(1, t, 0, m, 0)
        monos.extend(Monomial(c, e, (f,)) for e, c in poly.terms())
    return target, {target: monos}


def target_system(sys) -> TargetSystem:
    """Strongly connected difference system (or plain closure) with the target."""
    from .grammar import build_difference_system, classify_prime_walks, closure_system
    from .model import build_step_table
    from .paths import check_strong_connectivity

    table = build_step_table(sys)
    cls = classify_prime_walks(table)
    conn = check_strong_connectivity(table)
    target, extra = target_rhs(sys, table, cls)
    if conn.strongly_connected:
        diff = build_difference_system(table, cls, extra=extra)
        system = diff.system
    else:
        system = closure_system(table, cls, [], extra)
    if target not in system:
        system = PositivePolynomialSystem({**system.rhs, target: []})
    return TargetSystem(system, target, conn.strongly_connected, conn)


def analyze_catalytic(sys, empirical_depth: int = 4000, certify: bool = True) -> SingularityReport:
    """Asymptotic report for ``F_{1;0}(x) = [u^0] F_1(x, u)``."""
    ts = target_system(sys)
    return analyze_system(ts.system, ts.target, ts.strongly_connected, empirical_depth, certify=certify)
