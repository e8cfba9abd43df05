"""
Rank-parallel 3D ideal MHD solver (WENO-Z, HLLD, SSP-RK3, CT or GLM)
"""

from .divergence import ct_update, divergence_cells, divergence_faces, glm_step
from .halo import halo_exchange
from .integrator import MhdSolver, rk3_step
from .models import FaceB, GridSpec, MhdConfig, MhdState
from .physics import cfl_timestep, cons_to_prim, fast_speed, max_signal_speed, prim_to_cons
from .problems import alfven_period, init_cp_alfven, init_orszag_tang_3d
from .reconstruction import wenoz_reconstruct
from .riemann import hll_flux, hlld_flux
from .services import MhdRunResult, MhdService, get_mhd_service, run_mhd

__all__ = [
    "GridSpec", "MhdConfig", "MhdState", "FaceB", "prim_to_cons", "cons_to_prim", "fast_speed",
    "max_signal_speed", "cfl_timestep", "wenoz_reconstruct", "hll_flux", "hlld_flux", "rk3_step", "MhdSolver",
    "ct_update", "glm_step", "divergence_faces", "divergence_cells", "halo_exchange", "init_orszag_tang_3d",
    "init_cp_alfven", "alfven_period", "run_mhd", "MhdRunResult", "MhdService", "get_mhd_service",
]
