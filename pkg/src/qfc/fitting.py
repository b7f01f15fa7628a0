"""Levenberg-Marquardt least squares with Marquardt diagonal scaling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass
class LMResult:
    x: np.ndarray
    cost: float
    iterations: int
    converged: bool
    message: str


def levenberg_marquardt(
    residual: Callable[[np.ndarray], np.ndarray],
    jacobian: Callable[[np.ndarray], np.ndarray],
    x0,
    max_iter: int = 200,
    gtol: float = 1e-12,
    xtol: float = 1e-15,
    tau: float = 1e-3,
) -> LMResult:
    """
    Minimize 0.5·||r(x)||².

    Damping follows Nielsen's gain-ratio rule. ``gtol`` bounds the largest
    cosine between the residual vector and any Jacobian column, as in
    MINPACK, so it is scale-free.
    """
    x = np.asarray(x0, dtype=float).copy()
    r = residual(x)
    J = jacobian(x)
    cost = 0.5 * float(r @ r)
    A = J.T @ J
    grad = J.T @ r
    mu = tau * float(np.max(np.diag(A))) if A.size else 0.0
    nu = 2.0

    def cosine(J, r, grad):
        rn = np.linalg.norm(r)
        cn = np.linalg.norm(J, axis=0)
        if rn == 0.0:
            return 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            c = np.abs(grad) / (rn * cn)
        return float(np.nanmax(np.where(cn > 0, c, 0.0)))

    for it in range(1, max_iter + 1):
        if cosine(J, r, grad) <= gtol:
            return LMResult(x, cost, it - 1, True, "gradient tolerance reached")
        D = np.diag(np.maximum(np.diag(A), 1e-300))
        try:
            step = np.linalg.solve(A + mu * D, -grad)
        except np.linalg.LinAlgError:
            mu *= nu
            nu *= 2.0
            continue
        if np.linalg.norm(step) <= xtol * (np.linalg.norm(x) + xtol):
            return LMResult(x, cost, it, True, "step tolerance reached")
        x_new = x + step
        r_new = residual(x_new)
        cost_new = 0.5 * float(r_new @ r_new)
        predicted = -(step @ grad) - 0.5 * step @ (A @ step)
        rho = (cost - cost_new) / predicted if predicted > 0 else -1.0
        if rho > 0 and np.isfinite(cost_new):
            x, r, cost = x_new, r_new, cost_new
            J = jacobian(x)
            A = J.T @ J
            grad = J.T @ r
            mu *= max(1.0 / 3.0, 1.0 - (2.0 * rho - 1.0) ** 3)
            nu = 2.0
        else:
            mu *= nu
            nu *= 2.0
    return LMResult(x, cost, max_iter, False, "iteration limit reached")
