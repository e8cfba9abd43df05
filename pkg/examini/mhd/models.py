"""
MHD data model: grid/rank layout, solver configuration and block state
"""

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..core.errors import ConfigError, GridError

# primitive: rho, vx, vy, vz, p, Bx, By, Bz, (psi)
# conservative: rho, mx, my, mz, E, Bx, By, Bz, (psi)
RHO, VX, VY, VZ, PRS, BX, BY, BZ, PSI = range(9)
MX, MY, MZ, ENG = VX, VY, VZ, PRS
PRIM_NAMES = ("rho", "vx", "vy", "vz", "p", "Bx", "By", "Bz", "psi")
CONS_NAMES = ("rho", "mx", "my", "mz", "E", "Bx", "By", "Bz", "psi")

WENOZ_HALF_WIDTH = 3

Triple = Tuple[int, int, int]


@dataclass
class GridSpec:
    """Global Cartesian grid split into equal blocks, one per rank"""
    global_cells: Triple = (32, 32, 32)
    domain_extent: Tuple[Tuple[float, float], ...] = ((0.0, 1.0), (0.0, 1.0), (0.0, 1.0))
    rank_layout: Triple = (1, 1, 1)
    ghost_width: int = 3
    periodic: Tuple[bool, bool, bool] = (True, True, True)

    def __post_init__(self):
        self.global_cells = tuple(int(n) for n in self.global_cells)
        self.rank_layout = tuple(int(p) for p in self.rank_layout)
        self.domain_extent = tuple((float(lo), float(hi)) for lo, hi in self.domain_extent)
        self.periodic = tuple(bool(p) for p in self.periodic)

    @property
    def ranks(self) -> int:
        return int(np.prod(self.rank_layout))

    @property
    def local_cells(self) -> Triple:
        return tuple(n // p for n, p in zip(self.global_cells, self.rank_layout))

    @property
    def block_shape(self) -> Triple:
        """Local cell counts including ghosts"""
        return tuple(n + 2 * self.ghost_width for n in self.local_cells)

    @property
    def spacing(self) -> Tuple[float, float, float]:
        return tuple((hi - lo) / n for (lo, hi), n in zip(self.domain_extent, self.global_cells))

    def validate(self, min_ghost: int = WENOZ_HALF_WIDTH) -> "GridSpec":
        if len(self.global_cells) != 3 or any(n <= 0 for n in self.global_cells):
            raise GridError("global_cells must be three positive integers", global_cells=self.global_cells)
        if any(p <= 0 for p in self.rank_layout):
            raise GridError("rank_layout must be positive", rank_layout=self.rank_layout)
        for axis, (n, p) in enumerate(zip(self.global_cells, self.rank_layout)):
            if n % p:
                raise GridError(f"axis {axis}: {n} cells not divisible by {p} ranks", axis=axis)
        if any(hi <= lo for lo, hi in self.domain_extent):
            raise GridError("domain extent must have hi > lo", domain_extent=self.domain_extent)
        if self.ghost_width < min_ghost:
            raise GridError(f"ghost_width {self.ghost_width} below stencil half-width {min_ghost}")
        if any(n < self.ghost_width + 1 for n in self.local_cells):
            raise GridError("local blocks must hold at least ghost_width + 1 cells per axis",
                            local_cells=self.local_cells)
        return self

    def rank_coords(self, rank: int) -> Triple:
        px, py, pz = self.rank_layout
        return (rank // (py * pz), (rank // pz) % py, rank % pz)

    def rank_of(self, coords: Triple) -> int:
        px, py, pz = self.rank_layout
        return (coords[0] * py + coords[1]) * pz + coords[2]

    def offsets(self, rank: int) -> Triple:
        """Global index of the first owned cell"""
        return tuple(c * n for c, n in zip(self.rank_coords(rank), self.local_cells))

    def neighbor(self, rank: int, offset: Triple) -> Optional[int]:
        coords = []
        for axis, (c, o) in enumerate(zip(self.rank_coords(rank), offset)):
            p = self.rank_layout[axis]
            c2 = c + o
            if not 0 <= c2 < p:
                if not self.periodic[axis]:
                    return None
                c2 %= p
            coords.append(c2)
        return self.rank_of(tuple(coords))

    def cell_centers(self, rank: int, axis: int) -> np.ndarray:
        """Coordinates of every local cell (ghosts included) from global indices"""
        g = self.ghost_width
        lo = self.domain_extent[axis][0]
        index = np.arange(self.block_shape[axis]) - g + self.offsets(rank)[axis]
        return lo + (index + 0.5) * self.spacing[axis]

    def face_positions(self, rank: int, axis: int) -> np.ndarray:
        """Coordinates of the left faces of every local cell plus the last right face"""
        g = self.ghost_width
        lo = self.domain_extent[axis][0]
        index = np.arange(self.block_shape[axis] + 1) - g + self.offsets(rank)[axis]
        return lo + index * self.spacing[axis]

    def owned(self) -> Tuple[slice, slice, slice]:
        g = self.ghost_width
        return tuple(slice(g, g + n) for n in self.local_cells)

    def relayout(self, ranks: int) -> "GridSpec":
        """Grid with a rank layout of `ranks` blocks, minimizing the block surface"""
        best = None
        for px, py in itertools.product(range(1, ranks + 1), repeat=2):
            if ranks % (px * py):
                continue
            layout = (px, py, ranks // (px * py))
            if any(n % p or n // p < self.ghost_width + 1 for n, p in zip(self.global_cells, layout)):
                continue
            local = [n // p for n, p in zip(self.global_cells, layout)]
            surface = local[0] * local[1] + local[1] * local[2] + local[0] * local[2]
            key = (surface, layout)
            if best is None or key < best:
                best = key
        if best is None:
            raise GridError(f"no rank layout of {ranks} ranks fits the grid", global_cells=self.global_cells)
        return GridSpec(self.global_cells, self.domain_extent, best[1], self.ghost_width, self.periodic)

    def to_dict(self) -> Dict:
        return {
            "global_cells": list(self.global_cells),
            "domain_extent": [list(e) for e in self.domain_extent],
            "rank_layout": list(self.rank_layout),
            "ghost_width": self.ghost_width,
            "periodic": list(self.periodic),
        }


@dataclass
class MhdConfig:
    """Solver selections and physics parameters"""
    reconstruction: str = "WENOZ"
    riemann: str = "HLLD"
    time_stepper: str = "RK3"
    divb_mode: str = "CT"
    cfl: float = 0.3
    t_end: float = 1.0
    max_steps: int = 100
    gamma: float = 5.0 / 3.0
    glm_ch_ratio: float = 1.0
    glm_damping: float = 0.18
    flux_correction: bool = True
    pressure_floor: float = 1e-12
    problem: str = "orszag_tang"
    amplitude: float = 0.1
    wavevector: Triple = (1, 1, 1)
    history_every: int = 1
    dump_every: int = 0
    seed: int = 0

    def validate(self) -> "MhdConfig":
        problems: List[str] = []
        if self.reconstruction != "WENOZ":
            problems.append(f"reconstruction {self.reconstruction!r} unsupported")
        if self.riemann not in ("HLLD", "HLL"):
            problems.append(f"riemann {self.riemann!r} unsupported")
        if self.time_stepper != "RK3":
            problems.append(f"time_stepper {self.time_stepper!r} unsupported")
        if self.divb_mode not in ("CT", "GLM"):
            problems.append(f"divb_mode {self.divb_mode!r} unsupported")
        if not 0.0 < self.cfl < 1.0:
            problems.append("cfl must lie in (0, 1)")
        if self.gamma <= 1.0:
            problems.append("gamma must exceed 1")
        if self.max_steps < 0 or self.t_end < 0:
            problems.append("max_steps and t_end must be non-negative")
        if problems:
            raise ConfigError("; ".join(problems))
        return self

    @property
    def nvar(self) -> int:
        return 9 if self.divb_mode == "GLM" else 8


@dataclass
class FaceB:
    """Staggered magnetic field; face i along an axis is the left face of cell i"""
    bx: np.ndarray
    by: np.ndarray
    bz: np.ndarray

    def components(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (self.bx, self.by, self.bz)

    def copy(self) -> "FaceB":
        return FaceB(self.bx.copy(), self.by.copy(), self.bz.copy())


@dataclass
class MhdState:
    """Conservative block (variables first) with optional staggered field"""
    cons: np.ndarray
    faces: Optional[FaceB] = None
    time: float = 0.0
    step: int = 0
    counters: Dict[str, int] = field(default_factory=lambda: {"pressure_floor": 0, "hlld_fallback": 0})

    def arrays(self) -> List[np.ndarray]:
        if self.faces is None:
            return [self.cons]
        return [self.cons, *self.faces.components()]

    def with_arrays(self, arrays: List[np.ndarray]) -> "MhdState":
        faces = FaceB(*arrays[1:]) if len(arrays) > 1 else None
        return MhdState(arrays[0], faces, self.time, self.step, dict(self.counters))
