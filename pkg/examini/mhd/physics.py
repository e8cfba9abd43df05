"""
Ideal-MHD algebra: variable maps, physical fluxes, fast speeds and the CFL step

Arrays carry the variable index on axis 0. Flux routines work in the
"normal frame": component 1 of v and B is the face-normal one. `to_normal`
and `from_normal` permute a direction into and out of that frame.
"""

from typing import Optional, Sequence, Tuple

import numpy as np

from ..core.errors import NegativeDensity, NegativePressure
from .models import BX, BY, BZ, ENG, MX, MY, MZ, PRS, PSI, RHO, VX, VY, VZ

_PERMUTATIONS = {
    0: [RHO, VX, VY, VZ, PRS, BX, BY, BZ, PSI],
    1: [RHO, VY, VZ, VX, PRS, BY, BZ, BX, PSI],
    2: [RHO, VZ, VX, VY, PRS, BZ, BX, BY, PSI],
}


def _perm(axis: int, nvar: int) -> np.ndarray:
    return np.array(_PERMUTATIONS[axis][:nvar])


def to_normal(q: np.ndarray, axis: int) -> np.ndarray:
    return q[_perm(axis, q.shape[0])]


def from_normal(q: np.ndarray, axis: int) -> np.ndarray:
    return q[np.argsort(_perm(axis, q.shape[0]))]


def _first_bad(mask: np.ndarray) -> Tuple[int, ...]:
    return tuple(int(i) for i in np.unravel_index(int(np.argmax(mask)), mask.shape))


def prim_to_cons(w: np.ndarray, gamma: float) -> np.ndarray:
    """E = p/(gamma-1) + rho v^2/2 + B^2/2"""
    rho = w[RHO]
    if np.any(rho <= 0):
        bad = rho <= 0
        raise NegativeDensity("non-positive density", cell=_first_bad(bad), value=float(rho[bad].flat[0]))
    u = np.empty_like(w)
    u[RHO] = rho
    u[MX:MZ + 1] = rho * w[VX:VZ + 1]
    kinetic = 0.5 * rho * np.sum(w[VX:VZ + 1] ** 2, axis=0)
    magnetic = 0.5 * np.sum(w[BX:BZ + 1] ** 2, axis=0)
    u[ENG] = w[PRS] / (gamma - 1.0) + kinetic + magnetic
    u[BX:] = w[BX:]
    return u


def cons_to_prim(u: np.ndarray, gamma: float) -> np.ndarray:
    """Inverse of prim_to_cons; raises on unphysical cells"""
    return _recover(u, gamma, None)[0]


def cons_to_prim_floored(u: np.ndarray, gamma: float, floor: float) -> Tuple[np.ndarray, int]:
    """Like cons_to_prim, but non-positive pressures are raised to `floor` and counted"""
    return _recover(u, gamma, floor)


def _recover(u: np.ndarray, gamma: float, floor: Optional[float]) -> Tuple[np.ndarray, int]:
    rho = u[RHO]
    if np.any(rho <= 0) or not np.all(np.isfinite(rho)):
        bad = ~(rho > 0)
        raise NegativeDensity("non-positive density", cell=_first_bad(bad), value=float(rho[bad].flat[0]))
    w = np.empty_like(u)
    w[RHO] = rho
    w[VX:VZ + 1] = u[MX:MZ + 1] / rho
    kinetic = 0.5 * np.sum(u[MX:MZ + 1] ** 2, axis=0) / rho
    magnetic = 0.5 * np.sum(u[BX:BZ + 1] ** 2, axis=0)
    p = (gamma - 1.0) * (u[ENG] - kinetic - magnetic)
    bad = ~(p > 0)
    floored = 0
    if np.any(bad):
        if floor is None:
            raise NegativePressure("non-positive pressure", cell=_first_bad(bad), value=float(p[bad].flat[0]))
        floored = int(np.count_nonzero(bad))
        p = np.where(bad, floor, p)
    w[PRS] = p
    w[BX:] = u[BX:]
    return w, floored


def physical_flux(w: np.ndarray, gamma: float) -> np.ndarray:
    """Normal-frame ideal-MHD flux; the Bn and psi entries are zero"""
    rho, u, v, vz = w[RHO], w[VX], w[VY], w[VZ]
    bn, by, bz = w[BX], w[BY], w[BZ]
    b2 = bn * bn + by * by + bz * bz
    pt = w[PRS] + 0.5 * b2
    energy = w[PRS] / (gamma - 1.0) + 0.5 * rho * (u * u + v * v + vz * vz) + 0.5 * b2
    vb = u * bn + v * by + vz * bz

    f = np.zeros_like(w)
    f[RHO] = rho * u
    f[MX] = rho * u * u + pt - bn * bn
    f[MY] = rho * u * v - bn * by
    f[MZ] = rho * u * vz - bn * bz
    f[ENG] = (energy + pt) * u - bn * vb
    f[BY] = by * u - bn * v
    f[BZ] = bz * u - bn * vz
    return f


def fast_speed(w: np.ndarray, gamma: float, axis: int = 0) -> np.ndarray:
    """Fast magnetosonic speed along `axis` (lab-frame primitive input)"""
    rho = w[RHO]
    b2 = np.sum(w[BX:BZ + 1] ** 2, axis=0)
    gp = gamma * w[PRS]
    bn = w[BX + axis]
    a = (gp + b2) / rho
    disc = np.sqrt(np.maximum(a * a - 4.0 * gp * bn * bn / (rho * rho), 0.0))
    return np.sqrt(0.5 * (a + disc))


def max_signal_speed(w: np.ndarray, gamma: float) -> float:
    """max over cells and directions of |v_d| + c_f,d"""
    if w[RHO].size == 0:
        return 0.0
    return float(max(np.max(np.abs(w[VX + d]) + fast_speed(w, gamma, d)) for d in range(3)))


def cfl_timestep(w: np.ndarray, gamma: float, spacing: Sequence[float], cfl: float) -> float:
    """Local stable step: cfl / max_cells sum_d (|v_d| + c_f,d) / dx_d"""
    rate = sum((np.abs(w[VX + d]) + fast_speed(w, gamma, d)) / spacing[d] for d in range(3))
    peak = float(np.max(rate))
    return cfl / peak if peak > 0 else np.inf


def conserved_totals(u: np.ndarray, cell_volume: float) -> np.ndarray:
    """mass, momentum x/y/z and total energy of a block (owned cells only)"""
    return np.array([np.sum(u[RHO]), np.sum(u[MX]), np.sum(u[MY]), np.sum(u[MZ]), np.sum(u[ENG])]) * cell_volume
