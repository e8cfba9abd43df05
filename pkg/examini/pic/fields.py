"""
Implicit-moment field solver on the periodic node grid (2D, three field components)
"""

from typing import Callable, List, Sequence, Tuple

import numpy as np
from loguru import logger

from .gmres import GmresResult, gmres
from .models import PRESSURE_COMPONENTS, FieldGrid, Moments

Spacing = Tuple[float, float]


def _ddx(f: np.ndarray, spacing: Spacing) -> np.ndarray:
    return (np.roll(f, -1, axis=-2) - np.roll(f, 1, axis=-2)) / (2.0 * spacing[0])


def _ddy(f: np.ndarray, spacing: Spacing) -> np.ndarray:
    return (np.roll(f, -1, axis=-1) - np.roll(f, 1, axis=-1)) / (2.0 * spacing[1])


def curl(a: np.ndarray, spacing: Spacing) -> np.ndarray:
    """Central-difference curl of a (3, nx, ny) field with d/dz = 0"""
    ax, ay, az = a
    return np.stack([_ddy(az, spacing), -_ddx(az, spacing), _ddx(ay, spacing) - _ddy(ax, spacing)])


def pressure_divergence(p: np.ndarray, spacing: Spacing) -> np.ndarray:
    """div of a symmetric tensor stored as (6, nx, ny) in PRESSURE_COMPONENTS order"""
    full = [[None] * 3 for _ in range(3)]
    for c, (a, b) in enumerate(PRESSURE_COMPONENTS):
        full[a][b] = full[b][a] = p[c]
    return np.stack([_ddx(full[0][k], spacing) + _ddy(full[1][k], spacing) for k in range(3)])


def explicit_cfl(spacing: Spacing, c: float = 1.0) -> float:
    """Light-wave stability limit of an explicit scheme"""
    return 1.0 / (c * np.sqrt(1.0 / spacing[0] ** 2 + 1.0 / spacing[1] ** 2))


def _alpha_apply(v: np.ndarray, b: np.ndarray, beta: float) -> np.ndarray:
    """Rotation tensor alpha acting on v: the solution of u = v + beta u x B"""
    bb = beta * b
    return (v + np.cross(v, bb, axis=0) + np.sum(v * bb, axis=0) * bb) / (1.0 + np.sum(bb * bb, axis=0))


class ImplicitFieldSolver:
    """Theta-scheme Maxwell solve with the implicit particle response folded into the operator

        E + (theta dt)^2 curl curl E + theta dt sum_s mu_s E = E^n + theta dt (curl B^n - J_hat)

    with mu_s E = (dt/2)(q/m)_s rho_s alpha_s E and J_hat = sum_s alpha_s (J_s - dt/2 div Pi_s).
    """

    def __init__(self, qoms: Sequence[float], dt: float, theta: float = 0.5, pressure_term: bool = True):
        self.qoms = list(qoms)
        self.dt = dt
        self.theta = theta
        self.pressure_term = pressure_term

    def operator(self, fields: FieldGrid, moments: Moments) -> Callable[[np.ndarray], np.ndarray]:
        shape = fields.e.shape
        spacing = fields.spacing
        td = self.theta * self.dt
        half = 0.5 * self.dt
        suscept: List[Tuple[np.ndarray, float]] = [
            (half * qom * moments.rho[s], 0.5 * qom * self.dt) for s, qom in enumerate(self.qoms)
        ]
        b = fields.b

        def apply(flat: np.ndarray) -> np.ndarray:
            e = flat.reshape(shape)
            out = e + td * td * curl(curl(e, spacing), spacing)
            for weight, beta in suscept:
                out = out + td * weight * _alpha_apply(e, b, beta)
            return out.ravel()

        return apply

    def implicit_current(self, fields: FieldGrid, moments: Moments) -> np.ndarray:
        j_hat = np.zeros_like(fields.e)
        for s, qom in enumerate(self.qoms):
            j = moments.j[s]
            if self.pressure_term:
                j = j - 0.5 * self.dt * pressure_divergence(moments.p[s], fields.spacing)
            j_hat += _alpha_apply(j, fields.b, 0.5 * qom * self.dt)
        return j_hat

    def source(self, fields: FieldGrid, moments: Moments) -> np.ndarray:
        td = self.theta * self.dt
        return fields.e + td * (curl(fields.b, fields.spacing) - self.implicit_current(fields, moments))

    def solve(self, fields: FieldGrid, moments: Moments, tolerance: float = 1e-8, restart: int = 20,
              max_iters: int = 400) -> Tuple[FieldGrid, FieldGrid, GmresResult]:
        """Return (fields at n+1, fields at n+theta for the mover, GMRes record)"""
        rhs = self.source(fields, moments).ravel()
        result = gmres(self.operator(fields, moments), rhs, x0=fields.e.ravel(), tolerance=tolerance,
                       restart=restart, max_iters=max_iters)
        e_theta = result.x.reshape(fields.e.shape)
        logger.debug(f"Field solve: {result.iterations} GMRes iterations, residual {result.residual:.2e}")

        e_new = (e_theta - (1.0 - self.theta) * fields.e) / self.theta
        b_new = fields.b - self.dt * curl(e_theta, fields.spacing)
        return FieldGrid(e_new, b_new, fields.spacing), FieldGrid(e_theta, fields.b, fields.spacing), result


def field_solve(fields: FieldGrid, moments: Moments, dt: float, theta: float, qoms: Sequence[float],
                tolerance: float = 1e-8, restart: int = 20, max_iters: int = 400,
                pressure_term: bool = True) -> FieldGrid:
    solver = ImplicitFieldSolver(qoms, dt, theta, pressure_term)
    return solver.solve(fields, moments, tolerance, restart, max_iters)[0]
