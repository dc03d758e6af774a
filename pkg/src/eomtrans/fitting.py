"""Small damped least-squares fitter for the 1-2 parameter calibration fits.

Levenberg-Marquardt contract: parameter-scaled damping on the normal
equations, steps accepted only when the residual norm decreases (so the
recorded history is monotone), damping inflated on rejection. All fits in
this package are low-dimensional and well conditioned once initialized
from a coarse grid scan (:func:`grid_scan_init`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import FitConvergenceError


@dataclass(frozen=True)
class FitResult:
    """Outcome of one least-squares fit."""

    parameter: str
    estimate: float
    unit: str
    stderr: float
    residual_norm: float
    converged: bool
    iterations: int
    history: tuple = ()  # accepted residual norms, nonincreasing
    flags: tuple = ()
    extra: dict = field(default_factory=dict)  # secondary fitted parameters

    def to_dict(self) -> dict:
        return {
            "parameter": self.parameter,
            "estimate": self.estimate,
            "unit": self.unit,
            "stderr": self.stderr,
            "residual_norm": self.residual_norm,
            "converged": self.converged,
            "iterations": self.iterations,
            "flags": list(self.flags),
            "extra": dict(self.extra),
        }


def _jacobian(residual_fn, p, r0, rel_step=1e-6):
    p = np.asarray(p, dtype=float)
    fallback = max(float(np.max(np.abs(p))), 1.0)  # scale for zero-valued entries
    jac = np.empty((r0.size, p.size))
    for k in range(p.size):
        step = rel_step * (abs(p[k]) if p[k] != 0.0 else fallback)
        bumped = p.copy()
        bumped[k] += step
        jac[:, k] = (residual_fn(bumped) - r0) / step
    return jac


def least_squares(
    residual_fn,
    p0,
    max_iter: int = 100,
    tol: float = 1e-12,
    lam0: float = 1e-3,
):
    """Minimize ||residual_fn(p)||^2; returns (p, stderr, norms, converged).

    ``stderr`` is the usual covariance estimate sqrt(diag((J^T J)^-1) * s^2)
    with s^2 the residual variance at the solution.
    """
    p = np.atleast_1d(np.asarray(p0, dtype=float)).copy()
    r = np.asarray(residual_fn(p), dtype=float)
    cost = float(r @ r)
    norms = [math.sqrt(cost)]
    lam = lam0
    converged = False
    for _ in range(max_iter):
        jac = _jacobian(residual_fn, p, r)
        jtj = jac.T @ jac
        jtr = jac.T @ r
        stepped = False
        for _ in range(50):
            damped = jtj + lam * np.diag(np.maximum(np.diag(jtj), 1e-300))
            try:
                delta = np.linalg.solve(damped, -jtr)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            trial = p + delta
            r_trial = np.asarray(residual_fn(trial), dtype=float)
            cost_trial = float(r_trial @ r_trial)
            if cost_trial <= cost:
                p, r, cost = trial, r_trial, cost_trial
                norms.append(math.sqrt(cost))
                lam = max(lam / 10.0, 1e-12)
                stepped = True
                break
            lam *= 10.0
        if not stepped:
            converged = True  # no descent direction left: at a minimum
            break
        rel_drop = (norms[-2] - norms[-1]) / max(norms[-2], 1e-300)
        if rel_drop < tol:
            converged = True
            break

    jac = _jacobian(residual_fn, p, r)
    jtj = jac.T @ jac
    dof = max(r.size - p.size, 1)
    s2 = cost / dof
    try:
        cov = np.linalg.inv(jtj) * s2
        stderr = np.sqrt(np.maximum(np.diag(cov), 0.0))
    except np.linalg.LinAlgError:
        stderr = np.full(p.size, math.inf)
    return p, stderr, norms, converged


def grid_scan_init(residual_fn, candidates) -> float:
    """Pick the candidate with the lowest residual norm as the start point."""
    best, best_cost = None, math.inf
    for cand in candidates:
        r = np.asarray(residual_fn(np.atleast_1d(float(cand))), dtype=float)
        cost = float(r @ r)
        if math.isfinite(cost) and cost < best_cost:
            best, best_cost = float(cand), cost
    if best is None:
        raise FitConvergenceError("grid scan found no finite residual")
    return best


def fit_single_parameter(
    residual_fn,
    parameter: str,
    unit: str,
    candidates,
    flags=(),
    max_iter: int = 100,
) -> FitResult:
    """Grid-scan initialization followed by damped least squares."""
    p0 = grid_scan_init(residual_fn, candidates)
    p, stderr, norms, converged = least_squares(residual_fn, [p0], max_iter=max_iter)
    return FitResult(
        parameter=parameter,
        estimate=float(p[0]),
        unit=unit,
        stderr=float(stderr[0]),
        residual_norm=norms[-1],
        converged=converged,
        iterations=len(norms) - 1,
        history=tuple(norms),
        flags=tuple(flags),
    )
