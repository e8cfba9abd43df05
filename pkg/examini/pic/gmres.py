"""
Restarted matrix-free GMRes with Givens-rotation least squares
"""

from typing import Callable, List, NamedTuple, Optional

import numpy as np
from loguru import logger

from ..core.errors import GmresNoConvergence

_BREAKDOWN = 1e-14


class GmresResult(NamedTuple):
    x: np.ndarray
    residuals: List[float]     # relative residual norms, initial one first
    breakdown: bool = False

    @property
    def iterations(self) -> int:
        return len(self.residuals) - 1

    @property
    def residual(self) -> float:
        return self.residuals[-1]


def _givens(a: float, b: float):
    if b == 0.0:
        return 1.0, 0.0
    r = np.hypot(a, b)
    return a / r, b / r


def gmres(apply_operator: Callable[[np.ndarray], np.ndarray], rhs: np.ndarray, x0: Optional[np.ndarray] = None,
          tolerance: float = 1e-8, restart: int = 20, max_iters: int = 400) -> GmresResult:
    """Solve A x = rhs to a relative residual <= tolerance

    A zero right-hand side is measured in absolute terms. A lucky breakdown
    returns the iterate that is exact in the current Krylov subspace.
    """
    b = np.asarray(rhs, dtype=float).ravel()
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float).ravel()
    b_norm = float(np.linalg.norm(b))
    scale = b_norm if b_norm > 0 else 1.0

    r = b - apply_operator(x)
    beta = float(np.linalg.norm(r))
    residuals = [beta / scale]
    if residuals[-1] <= tolerance:
        return GmresResult(x, residuals)

    total = 0
    while total < max_iters:
        m = min(restart, max_iters - total)
        basis = np.zeros((m + 1, b.size))
        h = np.zeros((m + 1, m))
        cs = np.zeros(m)
        sn = np.zeros(m)
        g = np.zeros(m + 1)
        g[0] = beta
        basis[0] = r / beta

        k = 0
        breakdown = False
        while k < m:
            w = apply_operator(basis[k])
            w_norm = float(np.linalg.norm(w))
            for i in range(k + 1):
                h[i, k] = float(np.dot(w, basis[i]))
                w = w - h[i, k] * basis[i]
            h[k + 1, k] = float(np.linalg.norm(w))
            breakdown = h[k + 1, k] <= _BREAKDOWN * w_norm
            if not breakdown:
                basis[k + 1] = w / h[k + 1, k]

            for i in range(k):
                hi, hj = h[i, k], h[i + 1, k]
                h[i, k] = cs[i] * hi + sn[i] * hj
                h[i + 1, k] = -sn[i] * hi + cs[i] * hj
            cs[k], sn[k] = _givens(h[k, k], h[k + 1, k])
            h[k, k] = cs[k] * h[k, k] + sn[k] * h[k + 1, k]
            h[k + 1, k] = 0.0
            g[k + 1] = -sn[k] * g[k]
            g[k] = cs[k] * g[k]

            k += 1
            total += 1
            residuals.append(abs(g[k]) / scale)
            if residuals[-1] <= tolerance or breakdown:
                break

        y = np.linalg.solve(np.triu(h[:k, :k]), g[:k])
        x = x + basis[:k].T @ y
        r = b - apply_operator(x)
        beta = float(np.linalg.norm(r))
        if residuals[-1] <= tolerance or breakdown:
            if breakdown:
                logger.debug(f"GMRes breakdown after {total} iterations (exact in subspace)")
            return GmresResult(x, residuals, breakdown)
        if beta / scale <= tolerance:
            residuals.append(beta / scale)
            return GmresResult(x, residuals)

    logger.warning(f"GMRes stopped after {total} iterations at residual {residuals[-1]:.3e}")
    raise GmresNoConvergence(residuals[-1], total)
