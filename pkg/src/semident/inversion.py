"""Stepwise inversion of the covariance parametrization.

Walks the topological order one node at a time: at step i the column
Sigma_{[i],{i+1}} pins down the parent coefficients and sibling covariances
of node i+1 through a linear system whose solvability is exactly the rank
condition

    rank( Omega_{[i] \\ S(i), [i]} (I - Lambda)^{-1}_{[i], P(i)} ) = |P(i)|.

When a step is rank deficient by one, ``fiber_trace`` follows the solution
line symbolically and reports the structure of the fiber.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import linalg
from .errors import (
    CyclicDirectedPartError,
    InconsistentSystemError,
    NotPositiveDefiniteError,
    RankDeficientStepError,
    SemidentError,
    UnresolvedFiberError,
)
from .graphs import MixedGraph, find_directed_cycle, is_acyclic, siblings_below
from .params import i_minus_lambda_inv, phi

#: relative residual threshold deciding whether a step system is consistent
CONSISTENCY_REL_TOL = 1e-8


def _require_topological(g: MixedGraph) -> None:
    cycle = find_directed_cycle(g)
    if cycle is not None:
        raise CyclicDirectedPartError(cycle)
    if any(i >= j for i, j in g.directed):
        raise SemidentError("graph must carry topological labels (i -> j only for i < j)")


@dataclass
class StepRecord:
    """Rank condition evaluated at one inversion step.

    ``matrix`` is Omega_{[i] \\ S(i), [i]} (I - Lambda)^{-1}_{[i], P(i)};
    the step passes iff its rank equals |P(i)|. ``solution`` carries the
    recovered (lambda_{P(i)}, omega_{S(i)}, omega_{i+1,i+1}) when filled in
    by the inversion routine.
    """

    step: int
    matrix: np.ndarray
    rank: int
    required_rank: int
    solution: tuple | None = None

    @property
    def passed(self) -> bool:
        return self.rank == self.required_rank


def rank_condition(g: MixedGraph, lam: np.ndarray, omega: np.ndarray, i: int) -> StepRecord:
    """Evaluate the step-i rank condition at a parameter pair."""
    _require_topological(g)
    if not 1 <= i <= g.m - 1:
        raise SemidentError(f"step index {i} out of range 1..{g.m - 1}")
    inv = i_minus_lambda_inv(g, lam)
    p = sorted(v - 1 for v in g.parents(i + 1))
    s = set(v - 1 for v in siblings_below(g, i))
    rows = [r for r in range(i) if r not in s]
    mat = omega[np.ix_(rows, list(range(i)))] @ inv[np.ix_(list(range(i)), p)]
    return StepRecord(
        step=i,
        matrix=mat,
        rank=linalg.matrix_rank(mat),
        required_rank=len(p),
    )


def _step_system(lam, omega, sigma, g: MixedGraph, i: int):
    """Matrix A and right-hand side b of the step-i linear system.

    Columns of A correspond to the unknowns (lambda_{P(i)}, omega_{S(i)}).
    """
    backend = linalg.backend_of(sigma)
    p = sorted(v - 1 for v in g.parents(i + 1))
    s = sorted(v - 1 for v in siblings_below(g, i))
    gamma = linalg.identity(i, backend) - lam[:i, :i]
    ginv = linalg.mat_inv(gamma)
    gtpg = ginv.T @ omega[:i, :i] @ ginv
    a = np.concatenate([gtpg[:, p], ginv[s, :].T], axis=1)
    b = sigma[:i, i]
    return a, b, p, s, ginv, gtpg


def invert(g: MixedGraph, sigma: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Recover the unique (Lambda, Omega) with forward image ``sigma``.

    The backend follows the dtype of ``sigma``; on the rational backend the
    round trip through the forward map is an exact identity.

    Raises:
        RankDeficientStepError: a step system is underdetermined (the fiber
            may contain more than one point; see ``fiber_trace``).
        InconsistentSystemError: ``sigma`` is not in the model's image.
        NotPositiveDefiniteError: the recovered Omega is not PD.
    """
    _require_topological(g)
    backend = linalg.backend_of(sigma)
    m = g.m
    lam = linalg.zeros(m, m, backend)
    omega = linalg.zeros(m, m, backend)
    omega[0, 0] = sigma[0, 0]
    scale = max(1.0, linalg.max_abs(sigma))
    for i in range(1, m):
        a, b, p, s, ginv, gtpg = _step_system(lam, omega, sigma, g, i)
        # rank decision on the reduced matrix, not the raw step system
        rec = rank_condition(g, lam, omega, i)
        if not rec.passed:
            raise RankDeficientStepError(i)
        res = linalg.solve_linear(a, b)
        if res.solution is None or (
            backend == "float" and res.residual > CONSISTENCY_REL_TOL * scale
        ):
            raise InconsistentSystemError(i, res.residual)
        x = res.solution
        for k, col in enumerate(p):
            lam[col, i] = x[k]
        for k, col in enumerate(s):
            omega[col, i] = x[len(p) + k]
            omega[i, col] = x[len(p) + k]
        lamv = lam[:i, i]
        wv = omega[:i, i]
        omega[i, i] = sigma[i, i] - lamv @ gtpg @ lamv - 2 * (wv @ ginv @ lamv)
    if not linalg.is_pd(omega):
        raise NotPositiveDefiniteError("recovered omega is not positive definite")
    return lam, omega


# -- fiber tracing ----------------------------------------------------


@dataclass
class FiberFamily:
    """One-parameter family of fiber points.

    ``evaluate(t)`` returns the float (Lambda, Omega) at parameter value t;
    the open ``interval`` is where Omega(t) stays positive definite.
    """

    base: tuple
    direction: dict
    interval: tuple
    evaluate: Callable = field(repr=False, default=None)


@dataclass
class FiberDescription:
    """Structure of the fiber of a covariance matrix.

    ``kind`` is one of 'singleton', 'finite', 'family', 'unresolved'.
    """

    kind: str
    points: list
    family: FiberFamily | None = None
    deficient_step: int | None = None
    note: str = ""


def _to_rational_matrix(sigma: np.ndarray, sp):
    m = sigma.shape[0]
    if linalg.backend_of(sigma) == "rational":
        return sp.Matrix(m, m, lambda i, j: sp.Rational(sigma[i, j]))
    # snap floats to nearby rationals; exact image membership is assumed
    return sp.Matrix(
        m, m, lambda i, j: sp.Rational(Fraction(float(sigma[i, j])).limit_denominator(10**9))
    )


def fiber_trace(
    g: MixedGraph,
    sigma: np.ndarray,
    base: tuple | None = None,
    max_degree: int = 32,
) -> FiberDescription:
    """Describe the fiber of ``sigma`` under the forward map.

    Runs the stepwise inversion symbolically. At the first rank-deficient step
    (deficiency exactly one) the solution line is parametrized by a scalar t;
    every later step contributes polynomial constraints on t. The real roots
    of their greatest common divisor, intersected with positive definiteness
    of Omega(t), give the fiber points. No surviving constraint means a
    one-parameter family; deficiency two or a second deficient step gives
    'unresolved'.

    ``base``, when given, is only used to seed the reported family base point.
    """
    import sympy as sp

    _require_topological(g)
    m = g.m
    sig = _to_rational_matrix(sigma, sp)
    t = sp.Symbol("t")
    lam_s = sp.zeros(m, m)
    omg_s = sp.zeros(m, m)
    omg_s[0, 0] = sig[0, 0]
    deficient_step = None
    direction: dict | None = None
    constraints: list = []

    for i in range(1, m):
        p = sorted(v - 1 for v in g.parents(i + 1))
        s = sorted(v - 1 for v in siblings_below(g, i))
        gamma = sp.eye(i) - lam_s[:i, :i]
        ginv = gamma.inv()
        ginv = ginv.applyfunc(sp.cancel)
        gtpg = (ginv.T * omg_s[:i, :i] * ginv).applyfunc(sp.cancel)
        cols = [gtpg[:, c] for c in p] + [ginv[r, :].T for r in s]
        a = sp.Matrix.hstack(*cols) if cols else sp.zeros(i, 0)
        b = sig[:i, i]
        k = a.shape[1]

        if deficient_step is None:
            x = _solve_first_phase(sp, a, b, k, t, i)
            if x == "deficient>1":
                return FiberDescription(
                    "unresolved", [], deficient_step=i, note="deficiency exceeds one"
                )
            if isinstance(x, tuple):  # deficiency one: (particular + t * kernel)
                x, kernel = x
                deficient_step = i
                direction = _direction_dict(p, s, kernel, i)
        else:
            x, new_constraints, ok = _solve_later_phase(sp, a, b, k, t)
            if not ok:
                return FiberDescription(
                    "unresolved",
                    [],
                    deficient_step=deficient_step,
                    note=f"second rank-deficient step at {i}",
                )
            constraints.extend(new_constraints)

        for idx, col in enumerate(p):
            lam_s[col, i] = sp.cancel(x[idx])
        for idx, col in enumerate(s):
            omg_s[col, i] = sp.cancel(x[len(p) + idx])
            omg_s[i, col] = omg_s[col, i]
        lamv = lam_s[:i, i]
        wv = omg_s[:i, i]
        omg_s[i, i] = sp.cancel(
            sig[i, i] - (lamv.T * gtpg * lamv)[0, 0] - 2 * (wv.T * ginv * lamv)[0, 0]
        )
        if deficient_step is not None:
            degs = [
                _expr_degree(sp, e, t)
                for e in list(lam_s[:, i]) + list(omg_s[:, i]) + [omg_s[i, i]]
            ]
            if max(degs, default=0) > max_degree:
                return FiberDescription(
                    "unresolved", [], deficient_step=deficient_step, note="degree cap hit"
                )

    if deficient_step is None:
        point = _numeric_point(sp, lam_s, omg_s, t, 0.0, m)
        return FiberDescription("singleton", [point])

    constraints = [c for c in constraints if not c.is_zero]
    if not constraints:
        return _describe_family(
            sp, g, sigma, lam_s, omg_s, t, m, deficient_step, direction, base
        )

    gcd_poly = constraints[0]
    for c in constraints[1:]:
        gcd_poly = sp.gcd(gcd_poly, c)
    gcd_poly = sp.Poly(gcd_poly, t)
    if gcd_poly.degree() == 0:
        raise InconsistentSystemError(deficient_step)
    coeffs = [float(c) for c in gcd_poly.all_coeffs()]
    roots = np.roots(coeffs)
    real_roots = sorted(r.real for r in roots if abs(r.imag) < 1e-8)

    scale = max(1.0, linalg.max_abs(sigma))
    points = []
    for r in real_roots:
        try:
            lam_f, omg_f = _numeric_point(sp, lam_s, omg_s, t, r, m)
        except (ZeroDivisionError, ValueError):
            continue
        if not linalg.is_pd(omg_f):
            continue
        residual = linalg.max_abs_diff(phi(g, lam_f, omg_f), linalg.as_float(sigma))
        if residual > 1e-9 * scale:
            continue
        if any(
            linalg.max_abs_diff(lam_f, q[0]) < 1e-8
            and linalg.max_abs_diff(omg_f, q[1]) < 1e-8
            for q in points
        ):
            continue
        points.append((lam_f, omg_f))
    if not points:
        raise InconsistentSystemError(deficient_step)
    kind = "singleton" if len(points) == 1 else "finite"
    return FiberDescription(kind, points, deficient_step=deficient_step)


def _expr_degree(sp, expr, t) -> int:
    num, den = sp.fraction(sp.cancel(expr))
    return max(sp.degree(num, t), sp.degree(den, t)) if expr.has(t) else 0


def _solve_first_phase(sp, a, b, k, t, i):
    """Solve the step system with constant coefficients.

    Returns the solution vector, or (linear-in-t vector, kernel) for
    deficiency one, or the marker string for higher deficiency. Raises
    InconsistentSystemError when no solution exists.
    """
    if k == 0:
        if any(e != 0 for e in b):
            raise InconsistentSystemError(i)
        return sp.zeros(0, 1)
    try:
        sol, params = a.gauss_jordan_solve(b)
    except ValueError as exc:
        raise InconsistentSystemError(i) from exc
    taus = sorted(sol.free_symbols, key=str)
    if not taus:
        return sol
    if len(taus) > 1:
        return "deficient>1"
    tau = taus[0]
    kernel = sol.diff(tau)
    particular = sol.subs(tau, 0)
    return particular + t * kernel, kernel


def _solve_later_phase(sp, a, b, k, t):
    """Solve a step system with polynomial coefficients in t.

    Returns (solution vector of rational functions, constraint polynomials,
    ok flag). ok is False when the system is generically rank deficient
    (a second deficient step).
    """
    if k == 0:
        cons = [sp.Poly(sp.together(-e), t) for e in b if sp.simplify(e) != 0]
        return sp.zeros(0, 1), cons, True
    t0 = sp.Rational(3, 7)  # generic probe point
    a0 = a.subs(t, t0)
    if a0.rank() < k:
        # retry one more probe before declaring generic deficiency
        a0 = a.subs(t, sp.Rational(11, 13))
        if a0.rank() < k:
            return None, [], False
    # pick k generically independent rows via the probe's transpose pivots
    _, piv = a0.T.rref()
    rows = list(piv[:k])
    a_sq = a[rows, :]
    det_s = sp.cancel(a_sq.det())
    adj = a_sq.adjugate()
    b_sq = sp.Matrix([b[r] for r in rows])
    x_num = (adj * b_sq).applyfunc(sp.cancel)
    x = (x_num / det_s).applyfunc(sp.cancel)
    constraints = []
    for r in range(a.shape[0]):
        if r in rows:
            continue
        expr = sp.cancel(sp.expand((a[r, :] * x_num)[0, 0] - b[r] * det_s))
        num, _ = sp.fraction(sp.together(expr))
        num = sp.expand(num)
        if num != 0:
            constraints.append(sp.Poly(num, t))
    return x, constraints, True


def _direction_dict(p, s, kernel, i) -> dict:
    dlam = {(col + 1, i + 1): float(kernel[k]) for k, col in enumerate(p)}
    domg = {(col + 1, i + 1): float(kernel[len(p) + k]) for k, col in enumerate(s)}
    return {"lambda": dlam, "omega": domg, "step": i}


def _numeric_point(sp, lam_s, omg_s, t, tval, m):
    lam = np.zeros((m, m))
    omg = np.zeros((m, m))
    sub = {t: sp.Float(tval, 30)} if isinstance(tval, float) else {t: tval}
    for i in range(m):
        for j in range(m):
            le = lam_s[i, j]
            oe = omg_s[i, j]
            lam[i, j] = float(le.subs(sub)) if le != 0 else 0.0
            omg[i, j] = float(oe.subs(sub)) if oe != 0 else 0.0
    omg = (omg + omg.T) / 2
    return lam, omg


def _describe_family(sp, g, sigma, lam_s, omg_s, t, m, deficient_step, direction, base):
    """Locate the open PD interval of Omega(t) and package the family."""
    breakpoints: set[float] = set()
    denominators = []
    for i in range(m):
        for j in range(m):
            for e in (lam_s[i, j], omg_s[i, j]):
                if e != 0 and e.has(t):
                    _, den = sp.fraction(sp.together(e))
                    if den.has(t):
                        denominators.append(den)
    for k in range(1, m + 1):
        minor = sp.cancel(omg_s[:k, :k].det())
        num, den = sp.fraction(sp.together(minor))
        for poly_expr in (num, den):
            if poly_expr.has(t):
                denominators.append(poly_expr)
    for expr in denominators:
        try:
            coeffs = [float(c) for c in sp.Poly(sp.expand(expr), t).all_coeffs()]
        except sp.PolynomialError:
            continue
        if len(coeffs) > 1:
            for r in np.roots(coeffs):
                if abs(r.imag) < 1e-8:
                    breakpoints.add(float(r.real))
    marks = sorted(breakpoints)

    def pd_at(tv: float) -> bool:
        try:
            _, om = _numeric_point(sp, lam_s, omg_s, t, tv, m)
        except (ZeroDivisionError, ValueError):
            return False
        return linalg.is_pd(om)

    intervals = []
    edges = [-np.inf] + marks + [np.inf]
    for lo, hi in zip(edges[:-1], edges[1:]):
        if lo == hi:
            continue
        if np.isinf(lo) and np.isinf(hi):
            mid = 0.0
        elif np.isinf(lo):
            mid = hi - 1.0
        elif np.isinf(hi):
            mid = lo + 1.0
        else:
            mid = (lo + hi) / 2
        if pd_at(mid):
            intervals.append((lo, hi, mid))
    if not intervals:
        raise UnresolvedFiberError("no PD interval found for the family")
    chosen = next((iv for iv in intervals if iv[0] < 0.0 < iv[1] and pd_at(0.0)), intervals[0])
    lo, hi, mid = chosen
    t0 = 0.0 if lo < 0.0 < hi and pd_at(0.0) else mid

    def evaluate(tv: float):
        return _numeric_point(sp, lam_s, omg_s, t, float(tv), m)

    base_point = evaluate(t0)
    return FiberDescription(
        "family",
        [],
        family=FiberFamily(
            base=base_point, direction=direction, interval=(lo, hi), evaluate=evaluate
        ),
        deficient_step=deficient_step,
    )
