"""
Maxwellian particle loading and grid/particle interpolation weights
"""

from typing import List, Tuple

import numpy as np

from .models import FieldGrid, ParticleSet, PicConfig, SpeciesSpec


def _load_species(spec: SpeciesSpec, index: int, config: PicConfig, rng: np.random.Generator) -> ParticleSet:
    nx, ny = config.cells
    dx, dy = config.spacing
    per_cell = config.ppc // 2 if config.quiet_start else config.ppc
    cells = nx * ny
    count = per_cell * cells

    # per_cell particles in every cell, cells in C order
    ci = np.repeat(np.arange(nx), ny * per_cell)
    cj = np.tile(np.repeat(np.arange(ny), per_cell), nx)
    x = (ci + rng.random(count)) * dx
    y = (cj + rng.random(count)) * dy
    v = rng.normal(0.0, spec.vth, size=(3, count))
    if config.quiet_start:
        x = np.repeat(x, 2)
        y = np.repeat(y, 2)
        v = np.repeat(v, 2, axis=1)
        v[:, 1::2] *= -1.0
    v += np.asarray(spec.drift, dtype=float)[:, None]

    total = config.ppc * cells
    area = config.extent[0] * config.extent[1]
    q = np.full(total, spec.charge_density * area / total)
    return ParticleSet(x, y, v, q, spec.qom, index)


def init_maxwellian(config: PicConfig) -> Tuple[List[ParticleSet], FieldGrid]:
    """Uniform positions, Maxwellian velocities, zero initial fields

    The draw depends only on the seed, never on the rank count.
    """
    config.validate()
    rng = np.random.default_rng(config.seed)
    particles = [_load_species(spec, s, config, rng) for s, spec in enumerate(config.species)]
    return particles, FieldGrid.zeros(config.cells, config.spacing)


def cic_weights(x: np.ndarray, y: np.ndarray, cells: Tuple[int, int], spacing: Tuple[float, float]):
    """Lower node indices and bilinear weights of the four surrounding nodes

    Returns (i0, j0, i1, j1, w00, w10, w01, w11); node indices wrap periodically.
    """
    nx, ny = cells
    xi = x / spacing[0]
    yi = y / spacing[1]
    i0 = np.floor(xi).astype(np.int64)
    j0 = np.floor(yi).astype(np.int64)
    fx = xi - i0
    fy = yi - j0
    i0 %= nx
    j0 %= ny
    i1 = (i0 + 1) % nx
    j1 = (j0 + 1) % ny
    return i0, j0, i1, j1, (1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy


def interpolate_to_particles(field: np.ndarray, x: np.ndarray, y: np.ndarray,
                             spacing: Tuple[float, float]) -> np.ndarray:
    """Bilinear gather of a (k, nx, ny) node field to particle positions -> (k, n)"""
    i0, j0, i1, j1, w00, w10, w01, w11 = cic_weights(x, y, field.shape[1:], spacing)
    return (w00 * field[:, i0, j0] + w10 * field[:, i1, j0] + w01 * field[:, i0, j1] + w11 * field[:, i1, j1])


def wrap_positions(p: ParticleSet, extent: Tuple[float, float]) -> None:
    p.x = np.mod(p.x, extent[0])
    p.y = np.mod(p.y, extent[1])
    # mod may round up to the period itself for tiny negative inputs
    p.x[p.x >= extent[0]] = 0.0
    p.y[p.y >= extent[1]] = 0.0
