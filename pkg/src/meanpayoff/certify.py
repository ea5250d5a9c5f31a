"""Floating-point proposals that are accepted only with an exact certificate.

HiGHS (via :func:`scipy.optimize.linprog`) solves the program in doubles.
If it reports a solution, the point is rounded to nearby rationals and
checked constraint by constraint in exact arithmetic. If it reports
infeasibility, a Farkas vector is computed the same way and verified
exactly. Anything that fails a check is handed to the exact simplex, so the
float solver can only make things faster, never change an answer.
"""
from __future__ import annotations

from fractions import Fraction
import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix, hstack, vstack

from .lp import EQ, LpInstance, check_assignment

DENOMINATOR_LIMITS = (10**4, 10**8, 10**12)


def _rationalise(values: np.ndarray, limit: int) -> list[Fraction]:
    out = []
    for v in values:
        q = Fraction(float(v)).limit_denominator(limit)
        out.append(q)
    return out


def _matrices(lp: LpInstance):
    index = {v.name: j for j, v in enumerate(lp.variables)}
    eq, ge = [], []
    for c in lp.constraints:
        (eq if c.rel == EQ else ge).append(c)

    def sparse(rows):
        data, ri, ci = [], [], []
        for r, c in enumerate(rows):
            for v, k in c.coeffs.items():
                data.append(float(k))
                ri.append(r)
                ci.append(index[v])
        return csr_matrix((data, (ri, ci)), shape=(len(rows), len(index)))

    return index, eq, ge, sparse(eq), sparse(ge)


def _farkas_holds(eq, ge, u: list[Fraction], v: list[Fraction]) -> bool:
    """Exact check of ``u·A_eq + v·A_ge <= 0`` and ``u·b_eq + v·b_ge > 0`` with ``v >= 0``."""
    if any(x < 0 for x in v):
        return False
    column: dict[str, Fraction] = {}
    rhs = Fraction(0)
    for mult, rows in ((u, eq), (v, ge)):
        for y, c in zip(mult, rows):
            if not y:
                continue
            rhs += y * c.rhs
            for name, k in c.coeffs.items():
                column[name] = column.get(name, Fraction(0)) + y * k
    return rhs > 0 and all(val <= 0 for val in column.values())


def propose(lp: LpInstance) -> tuple[str, dict[str, Fraction] | None] | None:
    """Certified ``("feasible", point)`` or ``("infeasible", None)``; ``None`` if no certificate was found.

    Only feasibility problems are handled: an optimum would need a dual
    certificate as well, so programs with an objective return ``None``.
    """
    if lp.objective is not None:
        return None
    index, eq, ge, a_eq, a_ge = _matrices(lp)
    nvar = len(index)
    if nvar == 0:
        return None
    b_eq = np.array([float(c.rhs) for c in eq])
    b_ge = np.array([float(c.rhs) for c in ge])
    res = linprog(
        np.zeros(nvar),
        A_ub=-a_ge if ge else None,
        b_ub=-b_ge if ge else None,
        A_eq=a_eq if eq else None,
        b_eq=b_eq if eq else None,
        bounds=(0, None),
        method="highs",
    )
    if res.status == 0:
        for limit in DENOMINATOR_LIMITS:
            point = dict(zip(lp.names, _rationalise(res.x, limit)))
            if check_assignment(lp, point)[0]:
                return "feasible", point
    elif res.status == 2:
        # maximise u·b_eq + v·b_ge  s.t.  A_eq^T u + A_ge^T v <= 0,  u·b_eq + v·b_ge <= 1,  v >= 0
        m_eq, m_ge = len(eq), len(ge)

        ray_a = hstack([a_eq.T, a_ge.T]).tocsr()
        bvec = np.concatenate([b_eq, b_ge])
        ray_a = vstack([ray_a, csr_matrix(bvec.reshape(1, -1))]).tocsr()
        ray_b = np.concatenate([np.zeros(nvar), [1.0]])
        bounds = [(None, None)] * m_eq + [(0, None)] * m_ge
        ray = linprog(-bvec, A_ub=ray_a, b_ub=ray_b, bounds=bounds, method="highs")
        if ray.status == 0 and -ray.fun > 0.5:
            for limit in DENOMINATOR_LIMITS:
                y = _rationalise(ray.x, limit)
                if _farkas_holds(eq, ge, y[:m_eq], y[m_eq:]):
                    return "infeasible", None
    return None
