"""
PIC data model: species, particles, node fields, moments and run configuration
"""

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..core.errors import ConfigError

# pressure tensor component order
PRESSURE_COMPONENTS: Tuple[Tuple[int, int], ...] = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))
KERNELS = ("CalculateField", "ParticlesMover", "GatherMoments")


@dataclass
class SpeciesSpec:
    """One plasma species; charge_density is the signed background density q*n"""
    name: str
    qom: float
    charge_density: float
    vth: float = 0.1
    drift: Tuple[float, float, float] = (0.0, 0.0, 0.0)


def default_species() -> List[SpeciesSpec]:
    """Electron-ion pair with omega_pe = 1 and mass ratio 25"""
    return [
        SpeciesSpec("electrons", qom=-1.0, charge_density=-1.0, vth=0.1),
        SpeciesSpec("ions", qom=1.0 / 25.0, charge_density=1.0, vth=0.02),
    ]


@dataclass
class PicConfig:
    cells: Tuple[int, int] = (16, 16)
    extent: Tuple[float, float] = (1.6, 1.6)
    ppc: int = 16
    species: List[SpeciesSpec] = field(default_factory=default_species)
    dt: float = 0.1
    theta: float = 0.5
    mover_iterations: int = 3
    gmres_tolerance: float = 1e-8
    gmres_restart: int = 20
    gmres_max_iters: int = 400
    quiet_start: bool = True
    pressure_term: bool = True
    cycles: int = 4
    seed: int = 0

    def validate(self) -> "PicConfig":
        problems: List[str] = []
        if len(self.cells) != 2 or any(n < 2 for n in self.cells):
            problems.append("cells must be two integers >= 2")
        if any(length <= 0 for length in self.extent):
            problems.append("extent must be positive")
        if self.ppc < 1:
            problems.append("ppc must be positive")
        if self.quiet_start and self.ppc % 2:
            problems.append("quiet start needs an even ppc")
        if not 0.5 <= self.theta <= 1.0:
            problems.append("theta must lie in [0.5, 1]")
        if self.dt <= 0:
            problems.append("dt must be positive")
        if self.mover_iterations < 1:
            problems.append("mover_iterations must be >= 1")
        if self.gmres_tolerance <= 0 or self.gmres_restart < 1 or self.gmres_max_iters < 1:
            problems.append("gmres parameters must be positive")
        if not self.species:
            problems.append("at least one species is required")
        if self.cycles < 0:
            problems.append("cycles must be non-negative")
        if problems:
            raise ConfigError("; ".join(problems))
        return self

    @property
    def spacing(self) -> Tuple[float, float]:
        return (self.extent[0] / self.cells[0], self.extent[1] / self.cells[1])


@dataclass
class ParticleSet:
    """Macro-particles of one species"""
    x: np.ndarray
    y: np.ndarray
    v: np.ndarray            # (3, n)
    q: np.ndarray            # charge per macro-particle (statistical weight included)
    qom: float
    species: int = 0

    def __post_init__(self):
        n = self.x.shape[0]
        if self.y.shape[0] != n or self.v.shape != (3, n) or self.q.shape[0] != n:
            raise ValueError("particle attribute arrays differ in length")

    def __len__(self) -> int:
        return int(self.x.shape[0])

    @property
    def mass(self) -> np.ndarray:
        return self.q / self.qom

    def select(self, mask: np.ndarray) -> "ParticleSet":
        return ParticleSet(self.x[mask], self.y[mask], self.v[:, mask], self.q[mask], self.qom, self.species)

    @classmethod
    def concat(cls, parts: Sequence["ParticleSet"]) -> "ParticleSet":
        first = parts[0]
        return cls(
            np.concatenate([p.x for p in parts]), np.concatenate([p.y for p in parts]),
            np.concatenate([p.v for p in parts], axis=1), np.concatenate([p.q for p in parts]),
            first.qom, first.species,
        )

    def to_arrays(self, prefix: str) -> Dict[str, np.ndarray]:
        return {f"{prefix}_x": self.x, f"{prefix}_y": self.y, f"{prefix}_v": self.v, f"{prefix}_q": self.q}


@dataclass
class FieldGrid:
    """Node-centred E and B on a periodic lattice; only the nx*ny unique nodes are stored"""
    e: np.ndarray            # (3, nx, ny)
    b: np.ndarray            # (3, nx, ny)
    spacing: Tuple[float, float]

    @classmethod
    def zeros(cls, cells: Tuple[int, int], spacing: Tuple[float, float]) -> "FieldGrid":
        return cls(np.zeros((3,) + tuple(cells)), np.zeros((3,) + tuple(cells)), tuple(spacing))

    @property
    def cells(self) -> Tuple[int, int]:
        return tuple(self.e.shape[1:])

    def lattice(self, component: str = "e") -> np.ndarray:
        """(3, nx+1, ny+1) view with the periodic boundary nodes aliased"""
        data = self.e if component == "e" else self.b
        return np.pad(data, ((0, 0), (0, 1), (0, 1)), mode="wrap")

    def copy(self) -> "FieldGrid":
        return FieldGrid(self.e.copy(), self.b.copy(), self.spacing)


@dataclass
class Moments:
    """Per-species node densities: charge (ns, nx, ny), current (ns, 3, ...), pressure (ns, 6, ...)"""
    rho: np.ndarray
    j: np.ndarray
    p: np.ndarray

    @property
    def species(self) -> int:
        return int(self.rho.shape[0])

    def total_rho(self) -> np.ndarray:
        return self.rho.sum(axis=0)

    def total_j(self) -> np.ndarray:
        return self.j.sum(axis=0)

    def __add__(self, other: "Moments") -> "Moments":
        return Moments(self.rho + other.rho, self.j + other.j, self.p + other.p)
