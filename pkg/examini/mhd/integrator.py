"""
SSP-RK3 time integration and the per-rank semi-discrete MHD operator
"""

from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..core.errors import UnphysicalState
from ..core.ranks import RankContext
from .divergence import (
    ct_increments, divergence_cells, divergence_faces, edge_emf, face_points, glm_damping_factor,
    glm_interface, midpoints, normalized_divergence,
)
from .halo import halo_exchange
from .models import BX, BZ, PRS, PSI, RHO, FaceB, GridSpec, MhdConfig
from .physics import (
    cfl_timestep, conserved_totals, cons_to_prim_floored, from_normal, max_signal_speed, physical_flux,
    to_normal,
)
from .reconstruction import reconstruct_faces
from .riemann import riemann_flux

Arrays = List[np.ndarray]
StateLike = Union[np.ndarray, Sequence[np.ndarray]]


def rk3_step(state: StateLike, dt: float, rhs: Callable[[Arrays], Arrays],
             post_stage: Optional[Callable[[Arrays], None]] = None) -> StateLike:
    """Three-stage SSP Runge-Kutta step in increment form (weights 1, 1/4, 2/3)"""
    single = isinstance(state, np.ndarray)
    u0: Arrays = [state] if single else list(state)
    stage = 1
    try:
        l0 = _as_list(rhs(u0))
        u1 = [u + dt * a for u, a in zip(u0, l0)]
        if post_stage is not None:
            post_stage(u1)
        stage = 2
        l1 = _as_list(rhs(u1))
        u2 = [u + (0.25 * dt) * (a + b) for u, a, b in zip(u0, l0, l1)]
        if post_stage is not None:
            post_stage(u2)
        stage = 3
        l2 = _as_list(rhs(u2))
        u3 = [u + dt * (a / 6.0 + b / 6.0 + (2.0 / 3.0) * c) for u, a, b, c in zip(u0, l0, l1, l2)]
        if post_stage is not None:
            post_stage(u3)
    except UnphysicalState as exc:
        exc.add_context(stage=stage)
        raise
    return u3[0] if single else u3


def _as_list(value: StateLike) -> Arrays:
    return [value] if isinstance(value, np.ndarray) else list(value)


def _take(a: np.ndarray, axis: int, start: int, stop: int) -> np.ndarray:
    index = [slice(None)] * a.ndim
    index[axis] = slice(start, stop)
    return a[tuple(index)]


def _pad_faces(flux: np.ndarray, spatial: int) -> np.ndarray:
    """Place fluxes of faces 3 .. M-3 into an array holding all M + 1 faces (zeros elsewhere)"""
    shape = list(flux.shape)
    shape[spatial] += 6
    full = np.zeros(shape)
    index = [slice(None)] * full.ndim
    index[spatial] = slice(3, shape[spatial] - 3)
    full[tuple(index)] = flux
    return full


class MhdSolver:
    """Five-step pipeline of one rank: exchange, cons->prim, reconstruct, Riemann, update"""

    def __init__(self, ctx: RankContext, grid: GridSpec, config: MhdConfig):
        self.ctx = ctx
        self.grid = grid
        self.config = config
        self.ct = config.divb_mode == "CT"
        self.counters: Dict[str, int] = {"pressure_floor": 0, "hlld_fallback": 0}
        self.ch = 0.0
        self.face_points: Tuple[np.ndarray, ...] = ()
        self._fresh: Optional[Tuple[np.ndarray, np.ndarray]] = None

    # -- pipeline -----------------------------------------------------------------

    def refresh(self, arrays: Arrays) -> np.ndarray:
        """Fill ghosts, sync cell B from faces (CT) and recover primitives

        With CT the faces travel first so every owned cell can interpolate B with a
        centred stencil; the cell array then carries those values into the ghosts.
        """
        if self._fresh is not None and self._fresh[0] is arrays[0]:
            return self._fresh[1]
        ctx = self.ctx
        if self.ct:
            with ctx.region("boundary_exchange"):
                halo_exchange(ctx, self.grid, arrays[1:4], [0, 1, 2])
            with ctx.region("cons_to_prim"), ctx.compute():
                self.face_points = face_points(FaceB(*arrays[1:4]))
                arrays[0][BX:BZ + 1] = np.stack([midpoints(p, axis) for axis, p in enumerate(self.face_points)])
        with ctx.region("boundary_exchange"):
            halo_exchange(ctx, self.grid, arrays[:1])
        with ctx.region("cons_to_prim"), ctx.compute():
            prim, floored = cons_to_prim_floored(arrays[0], self.config.gamma, self.config.pressure_floor)
            self.counters["pressure_floor"] += floored
        self._fresh = (arrays[0], prim)
        return prim

    def _axis_flux(self, prim: np.ndarray, axis: int) -> Tuple[np.ndarray, Optional[np.ndarray]]:
        """Corrected fluxes on the block faces plus, with CT, the raw induction fluxes"""
        cfg = self.config
        spatial = 1 + axis
        m = prim.shape[spatial]
        ctx = self.ctx

        with ctx.region("reconstruct"), ctx.compute():
            wn = to_normal(prim, axis)
            wl, wr = reconstruct_faces(wn, spatial)
            # first-order states where the high-order ones are unphysical
            cell_l = _take(wn, spatial, 2, m - 3)
            cell_r = _take(wn, spatial, 3, m - 2)
            bad_l = (wl[RHO] <= 0) | (wl[PRS] <= 0)
            bad_r = (wr[RHO] <= 0) | (wr[PRS] <= 0)
            wl = np.where(bad_l, cell_l, wl)
            wr = np.where(bad_r, cell_r, wr)
            if self.ct:
                bn = _take(self.face_points[axis], axis, 3, m - 2)
                wl[BX] = bn
                wr[BX] = bn
            else:
                bn, psi = glm_interface(wl[BX], wr[BX], wl[PSI], wr[PSI], self.ch)
                wl[BX] = bn
                wr[BX] = bn

        with ctx.region("riemann"), ctx.compute():
            flux = riemann_flux(cfg.riemann, wl, wr, cfg.gamma, self.counters)
            raw = _pad_faces(from_normal(flux, axis)[BX:BZ + 1], spatial) if self.ct else None
            if not self.ct:
                flux[BX] = psi
                flux[PSI] = self.ch * self.ch * bn
            if cfg.flux_correction:
                centre = physical_flux(wn, cfg.gamma)
                if not self.ct:
                    centre[BX] = wn[PSI]
                    centre[PSI] = self.ch * self.ch * wn[BX]
                flux = flux - (_take(centre, spatial, 2, m - 3) - 2.0 * flux + _take(centre, spatial, 3, m - 2)) / 6.0
            full = _pad_faces(from_normal(flux, axis), spatial)
        return full, raw

    def rhs(self, arrays: Arrays) -> Arrays:
        ctx = self.ctx
        prim = self.refresh(arrays)
        fluxes, raw = zip(*(self._axis_flux(prim, axis) for axis in range(3)))

        g = self.grid.ghost_width
        owned = self.grid.owned()
        with ctx.region("rhs"), ctx.compute():
            dudt = np.zeros_like(arrays[0])
            for axis, flux in enumerate(fluxes):
                n = self.grid.local_cells[axis]
                index = [slice(None)] + list(owned)
                index[1 + axis] = slice(g, g + n + 1)
                dudt[(slice(None),) + owned] -= np.diff(flux[tuple(index)], axis=1 + axis) / self.grid.spacing[axis]
            if self.ct:
                dudt[BX:BZ + 1] = 0.0

        if not self.ct:
            return [dudt]
        with ctx.region("ct"), ctx.compute():
            emf = edge_emf(*raw)
            increments = list(ct_increments(emf, self.grid.spacing))
        return [dudt] + increments

    # -- step control -----------------------------------------------------------------

    def timestep(self, prim: np.ndarray) -> float:
        cfg = self.config
        owned = (slice(None),) + self.grid.owned()
        with self.ctx.region("timestep"):
            with self.ctx.compute():
                local_dt = cfl_timestep(prim[owned], cfg.gamma, self.grid.spacing, cfg.cfl)
                local_speed = max_signal_speed(prim[owned], cfg.gamma)
            dt, speed = self.ctx.allreduce((local_dt, local_speed), lambda a, b: (min(a[0], b[0]), max(a[1], b[1])))
        if not self.ct:
            self.ch = cfg.glm_ch_ratio * speed
            if self.ch > 0:
                dt = min(dt, cfg.cfl / sum(self.ch / d for d in self.grid.spacing))
        return dt

    def damp_psi(self, arrays: Arrays, dt: float) -> None:
        if self.ct or self.ch <= 0:
            return
        with self.ctx.region("glm"), self.ctx.compute():
            arrays[0][PSI] *= glm_damping_factor(dt, self.ch, min(self.grid.spacing), self.config.glm_damping)

    def diagnostics(self, arrays: Arrays) -> Dict[str, float]:
        """Global conserved totals, normalized max div B and counters"""
        prim = self.refresh(arrays)
        grid = self.grid
        owned = grid.owned()
        g = grid.ghost_width
        with self.ctx.region("diagnostics"):
            with self.ctx.compute():
                totals = conserved_totals(arrays[0][(slice(None),) + owned], float(np.prod(grid.spacing)))
                b_max = float(np.max(np.sqrt(np.sum(prim[(slice(BX, BZ + 1),) + owned] ** 2, axis=0))))
                if self.ct:
                    nx, ny, nz = grid.local_cells
                    faces = FaceB(
                        arrays[1][g:g + nx + 1, g:g + ny, g:g + nz],
                        arrays[2][g:g + nx, g:g + ny + 1, g:g + nz],
                        arrays[3][g:g + nx, g:g + ny, g:g + nz + 1],
                    )
                    div = divergence_faces(faces, grid.spacing)
                else:
                    div = divergence_cells(arrays[0][BX:BZ + 1], grid.spacing, periodic=False)[owned]
                div_max = float(np.max(np.abs(div))) if div.size else 0.0
            counters = np.array([self.counters["pressure_floor"], self.counters["hlld_fallback"]], dtype=np.int64)
            reduced = self.ctx.allgather((totals, b_max, div_max, counters))
        totals = sum(r[0] for r in reduced)
        b_max = max(r[1] for r in reduced)
        div_max = max(r[2] for r in reduced)
        counters = sum(r[3] for r in reduced)
        return {
            "mass": float(totals[0]), "momentum_x": float(totals[1]), "momentum_y": float(totals[2]),
            "momentum_z": float(totals[3]), "energy": float(totals[4]),
            "max_divb": normalized_divergence(np.array([div_max]), b_max, grid.spacing),
            "pressure_floors": int(counters[0]), "hlld_fallbacks": int(counters[1]),
        }
