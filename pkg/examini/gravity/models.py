"""
Gravity data model: bodies, key domain, oct-tree arrays and walk / SPH parameters
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from ..core.errors import ConfigError, DegenerateDomain

MAX_KEY_ORDER = 21


@dataclass
class Bodies:
    """Structure-of-arrays body set; ids survive every reordering"""
    pos: np.ndarray                  # (n, 3)
    mass: np.ndarray                 # (n,)
    vel: Optional[np.ndarray] = None
    active: Optional[np.ndarray] = None
    ids: Optional[np.ndarray] = None
    keys: Optional[np.ndarray] = None

    def __post_init__(self):
        self.pos = np.atleast_2d(np.asarray(self.pos, dtype=float))
        n = self.pos.shape[0]
        self.mass = np.broadcast_to(np.asarray(self.mass, dtype=float), (n,)).copy()
        if np.any(self.mass <= 0):
            raise ConfigError("body masses must be positive")
        self.vel = np.zeros((n, 3)) if self.vel is None else np.asarray(self.vel, dtype=float)
        self.active = np.ones(n, dtype=bool) if self.active is None else np.asarray(self.active, dtype=bool)
        self.ids = np.arange(n) if self.ids is None else np.asarray(self.ids)

    def __len__(self) -> int:
        return int(self.pos.shape[0])

    def take(self, order: np.ndarray) -> "Bodies":
        return Bodies(self.pos[order], self.mass[order], self.vel[order], self.active[order], self.ids[order],
                      None if self.keys is None else self.keys[order])

    def scaled(self, factor: float) -> "Bodies":
        return Bodies(self.pos * factor, self.mass, self.vel, self.active, self.ids)


@dataclass
class KeyDomain:
    """Cube [lo, lo + size]^3 discretized by the Hilbert keys"""
    lo: np.ndarray
    size: float

    def __post_init__(self):
        self.lo = np.asarray(self.lo, dtype=float)
        if not self.size > 0:
            raise DegenerateDomain("key domain has zero extent", size=self.size)

    @classmethod
    def around(cls, pos: np.ndarray, pad: float = 1e-9) -> "KeyDomain":
        """Smallest padded cube holding every position; a lone body gets a unit cube"""
        lo = pos.min(axis=0)
        hi = pos.max(axis=0)
        size = float(np.max(hi - lo))
        if size == 0.0:
            if pos.shape[0] > 1:
                raise DegenerateDomain("all bodies share one position", bodies=pos.shape[0])
            return cls(lo - 0.5, 1.0)
        return cls(lo - pad * size, size * (1.0 + 2.0 * pad))

    @property
    def hi(self) -> np.ndarray:
        return self.lo + self.size


@dataclass
class WalkParams:
    theta: float = 0.5
    softening: float = 1e-3
    group_size: int = 32
    direct_radius: float = 0.0

    def validate(self) -> "WalkParams":
        if self.theta < 0 or self.softening < 0 or self.group_size < 1 or self.direct_radius < 0:
            raise ConfigError("walk parameters out of range", theta=self.theta, softening=self.softening,
                              group_size=self.group_size)
        return self


@dataclass
class SphParams:
    n_ngb: float = 32.0
    kernel: str = "cubic_spline"
    tolerance: float = 1e-4
    max_iterations: int = 100

    def validate(self) -> "SphParams":
        # the self term alone contributes 32/3 kernel-weighted neighbours
        if self.n_ngb <= 32.0 / 3.0:
            raise ConfigError("n_ngb must exceed the self contribution 32/3", n_ngb=self.n_ngb)
        if self.tolerance <= 0 or self.kernel != "cubic_spline":
            raise ConfigError("unsupported SPH settings", kernel=self.kernel, tolerance=self.tolerance)
        return self


@dataclass
class OctTree:
    """Flat node arrays over Hilbert-sorted bodies; node 0 is the root

    children[k] holds -1 for absent octants; leaves own bodies[start:end].
    """
    bodies: Bodies
    domain: KeyDomain
    center: np.ndarray
    half: np.ndarray
    mass: np.ndarray
    com: np.ndarray
    children: np.ndarray
    start: np.ndarray
    end: np.ndarray
    leaf: np.ndarray
    depth: np.ndarray
    leaf_capacity: int = 8

    @property
    def nodes(self) -> int:
        return int(self.mass.shape[0])

    def leaves(self) -> np.ndarray:
        return np.flatnonzero(self.leaf)


@dataclass
class GravityConfig:
    n_bodies: int = 1000
    distribution: str = "uniform_sphere"
    walk: str = "grouped"
    params: WalkParams = field(default_factory=WalkParams)
    leaf_capacity: int = 8
    key_order: int = MAX_KEY_ORDER
    seed: int = 0
    sph: Optional[SphParams] = None

    def validate(self) -> "GravityConfig":
        problems: List[str] = []
        if self.n_bodies < 1:
            problems.append("n_bodies must be positive")
        if self.distribution not in ("uniform_sphere", "uniform_cube"):
            problems.append(f"distribution {self.distribution!r} unsupported")
        if self.walk not in ("bh", "grouped"):
            problems.append(f"walk {self.walk!r} unsupported")
        if not 1 <= self.key_order <= MAX_KEY_ORDER:
            problems.append(f"key_order must lie in [1, {MAX_KEY_ORDER}]")
        if self.leaf_capacity < 1:
            problems.append("leaf_capacity must be positive")
        if problems:
            raise ConfigError("; ".join(problems))
        self.params.validate()
        if self.sph is not None:
            self.sph.validate()
        return self

    def to_dict(self) -> Dict:
        return {"n_bodies": self.n_bodies, "distribution": self.distribution, "walk": self.walk,
                "theta": self.params.theta, "softening": self.params.softening,
                "group_size": self.params.group_size, "direct_radius": self.params.direct_radius,
                "leaf_capacity": self.leaf_capacity, "key_order": self.key_order, "seed": self.seed}
