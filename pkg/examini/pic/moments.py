"""
Cloud-in-cell moment gatherer and energy diagnostics
"""

from typing import Sequence, Tuple

import numpy as np

from .models import PRESSURE_COMPONENTS, FieldGrid, Moments, ParticleSet
from .particles import cic_weights


def deposit(values: np.ndarray, x: np.ndarray, y: np.ndarray, cells: Tuple[int, int],
            spacing: Tuple[float, float]) -> np.ndarray:
    """Scatter per-particle values (k, n) to node densities (k, nx, ny)"""
    nx, ny = cells
    i0, j0, i1, j1, w00, w10, w01, w11 = cic_weights(x, y, cells, spacing)
    index = np.concatenate([i0 * ny + j0, i1 * ny + j0, i0 * ny + j1, i1 * ny + j1])
    weights = np.concatenate([w00, w10, w01, w11])
    volume = spacing[0] * spacing[1]
    out = np.empty((values.shape[0], nx, ny))
    for k, row in enumerate(values):
        out[k] = np.bincount(index, weights=weights * np.tile(row, 4), minlength=nx * ny).reshape(nx, ny)
    return out / volume


def gather_species(p: ParticleSet, cells: Tuple[int, int], spacing: Tuple[float, float]):
    q = p.q
    values = np.vstack([q[None, :], q * p.v] + [q * p.v[a] * p.v[b] for a, b in PRESSURE_COMPONENTS])
    nodes = deposit(values, p.x, p.y, cells, spacing)
    return nodes[0], nodes[1:4], nodes[4:]


def gather_moments(particles: Sequence[ParticleSet], cells: Tuple[int, int],
                   spacing: Tuple[float, float]) -> Moments:
    """Charge density, current and charge-weighted pressure tensor per species"""
    parts = [gather_species(p, cells, spacing) for p in particles]
    return Moments(
        np.stack([r for r, _, _ in parts]),
        np.stack([j for _, j, _ in parts]),
        np.stack([pt for _, _, pt in parts]),
    )


def field_energy(fields: FieldGrid) -> float:
    volume = fields.spacing[0] * fields.spacing[1]
    return float(0.5 * volume * (np.sum(fields.e ** 2) + np.sum(fields.b ** 2)))


def kinetic_energy(particles: Sequence[ParticleSet]) -> float:
    return float(sum(0.5 * np.sum(p.mass * np.sum(p.v ** 2, axis=0)) for p in particles))


def total_momentum(p: ParticleSet) -> np.ndarray:
    return np.sum(p.mass * p.v, axis=1)
