"""Certified LP helpers for the branch-and-bound.

Every constraint of a system, including variable bounds, is a row of
A x <= b, so a single duality argument backs both verdicts we need:

  * infeasibility: any y >= 0 gives  0 <= y.(b - Ax) for feasible x, hence
    y.b + sum_j |(A^T y)_j| B_j < 0 (B_j an a-priori magnitude enforced by
    the bound rows) contradicts feasibility.  The certifying y comes from
    the dual of the elastic LP  min tau  s.t.  Ax - tau <= b.

  * objective bound: for any y >= 0 and feasible x,
    c.x = (A^T y - r).x <= y.b + sum_j |r_j| B_j  with  r = A^T y - c.

The verification after the solve uses only y >= 0 and explicit float
arithmetic with a small absolute fudge, so a solver wobble can weaken a
verdict but never flip one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

_FUDGE = 1e-12


@dataclass(frozen=True)
class RowSystem:
    a: np.ndarray          # (rows, nvar)
    b: np.ndarray          # (rows,)
    var_bound: np.ndarray  # (nvar,), |x_j| <= var_bound[j] implied by rows

    @property
    def nvar(self) -> int:
        return self.a.shape[1]


def _dual_vector(res, nrows: int) -> np.ndarray | None:
    if res.status != 0 or res.ineqlin is None:
        return None
    y = -np.asarray(res.ineqlin.marginals, dtype=float)
    if y.shape != (nrows,):
        return None
    return np.clip(y, 0.0, None)


def certified_infeasible(system: RowSystem, tau_num: float) -> float | None:
    """Margin of a verified infeasibility certificate, or None.

    None means "could not certify" (the system may well be feasible); a
    float m >= tau_num means no point satisfies all rows, with slack m.
    """
    nrows, nvar = system.a.shape
    a_el = np.hstack([system.a, -np.ones((nrows, 1))])
    c = np.zeros(nvar + 1)
    c[-1] = 1.0
    res = linprog(c, A_ub=a_el, b_ub=system.b,
                  bounds=[(None, None)] * (nvar + 1), method="highs")
    if res.status != 0 or res.fun is None or res.fun <= tau_num:
        return None
    y = _dual_vector(res, nrows)
    if y is None:
        return None
    r = system.a.T @ y
    margin = -(float(y @ system.b)
               + float(np.abs(r) @ system.var_bound)
               + _FUDGE * (1.0 + float(np.abs(y @ system.b))))
    return margin if margin >= tau_num else None


def certified_max(system: RowSystem, c: np.ndarray) -> float | None:
    """Verified upper bound on max c.x over the row system, or None."""
    nrows = system.a.shape[0]
    res = linprog(-c, A_ub=system.a, b_ub=system.b,
                  bounds=[(None, None)] * system.nvar, method="highs")
    if res.status == 2:
        # empty feasible set: any claim holds, but callers treat the box by
        # the infeasibility path; return None to stay conservative here
        return None
    y = _dual_vector(res, nrows)
    if y is None:
        return None
    r = system.a.T @ y - c
    ub = (float(y @ system.b)
          + float(np.abs(r) @ system.var_bound)
          + _FUDGE * (1.0 + float(np.abs(y @ system.b))))
    return ub
