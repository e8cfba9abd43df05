"""
Implicit-midpoint particle mover
"""

from typing import Optional, Tuple

import numpy as np

from ..core.errors import NonFiniteParticle
from .models import FieldGrid, ParticleSet
from .particles import interpolate_to_particles, wrap_positions


def rotate(v: np.ndarray, b: np.ndarray, beta) -> np.ndarray:
    """Solve u = v + beta * u x B for u (norm-preserving Cayley form)"""
    bb = beta * b
    vxb = np.cross(v, bb, axis=0)
    vdb = np.sum(v * bb, axis=0)
    return (v + vxb + vdb * bb) / (1.0 + np.sum(bb * bb, axis=0))


def particle_mover(p: ParticleSet, fields: FieldGrid, dt: float, iterations: int = 3,
                   extent: Optional[Tuple[float, float]] = None) -> ParticleSet:
    """Advance one species by dt with a fixed number of midpoint iterations

    v_bar = v + (q dt / 2m)(E(x_bar) + v_bar x B(x_bar)), x_bar = x + v_bar dt / 2;
    then x <- x + v_bar dt, v <- 2 v_bar - v.
    """
    if iterations < 1:
        raise ValueError("mover needs at least one iteration")
    nx, ny = fields.cells
    if extent is None:
        extent = (nx * fields.spacing[0], ny * fields.spacing[1])
    beta = 0.5 * p.qom * dt
    v_bar = p.v
    for _ in range(iterations):
        x_bar = np.mod(p.x + 0.5 * dt * v_bar[0], extent[0])
        y_bar = np.mod(p.y + 0.5 * dt * v_bar[1], extent[1])
        e = interpolate_to_particles(fields.e, x_bar, y_bar, fields.spacing)
        b = interpolate_to_particles(fields.b, x_bar, y_bar, fields.spacing)
        v_bar = rotate(p.v + beta * e, b, beta)

    moved = ParticleSet(p.x + dt * v_bar[0], p.y + dt * v_bar[1], 2.0 * v_bar - p.v, p.q, p.qom, p.species)
    bad = ~(np.isfinite(moved.x) & np.isfinite(moved.y) & np.all(np.isfinite(moved.v), axis=0))
    if np.any(bad):
        raise NonFiniteParticle(int(np.flatnonzero(bad)[0]), p.species)
    wrap_positions(moved, extent)
    return moved


def gyro_angle(qom: float, b0: float, dt: float) -> float:
    """Rotation per step of the implicit-midpoint gyration in a uniform field"""
    return float(2.0 * np.arctan(0.5 * qom * b0 * dt))
