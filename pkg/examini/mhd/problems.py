"""
Benchmark initial conditions: 3D Orszag-Tang vortex and circularly polarized Alfven wave
"""

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .divergence import face_to_cell
from .models import BX, BY, BZ, PRS, RHO, VX, VY, VZ, FaceB, GridSpec, MhdConfig, MhdState
from .physics import prim_to_cons

Field3 = Tuple[np.ndarray, np.ndarray, np.ndarray]


@dataclass
class Problem:
    """Point-value initial data plus a vector potential for the perturbed field"""
    name: str
    primitive: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
    potential: Callable[[np.ndarray, np.ndarray, np.ndarray], Field3]
    uniform_b: Tuple[float, float, float] = (0.0, 0.0, 0.0)


def orszag_tang_problem(perturbation: float = 0.01) -> Problem:
    """Classic 2D vortex replicated in z with a small sinusoidal vz"""
    b0 = 1.0 / np.sqrt(4.0 * np.pi)
    two_pi = 2.0 * np.pi

    def primitive(x, y, z):
        w = np.zeros((8,) + np.broadcast(x, y, z).shape)
        w[RHO] = 25.0 / (36.0 * np.pi)
        w[PRS] = 5.0 / (12.0 * np.pi)
        w[VX] = -np.sin(two_pi * y)
        w[VY] = np.sin(two_pi * x)
        w[VZ] = perturbation * np.sin(two_pi * z)
        w[BX] = -b0 * np.sin(two_pi * y)
        w[BY] = b0 * np.sin(2.0 * two_pi * x)
        return w

    def potential(x, y, z):
        shape = np.broadcast(x, y, z).shape
        az = b0 * (np.cos(two_pi * y) / two_pi + np.cos(2.0 * two_pi * x) / (2.0 * two_pi))
        return np.zeros(shape), np.zeros(shape), np.broadcast_to(az, shape)

    return Problem("orszag_tang", primitive, potential)


def _alfven_basis(k: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    n_hat = k / np.linalg.norm(k)
    trial = np.array([0.0, 0.0, 1.0]) if abs(n_hat[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    e1 = np.cross(n_hat, trial)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n_hat, e1)
    return n_hat, e1, e2


def cp_alfven_problem(extent: Sequence[Tuple[float, float]], amplitude: float = 0.1,
                      wavevector: Sequence[int] = (1, 1, 1), rho: float = 1.0, pressure: float = 0.1,
                      b_parallel: float = 1.0, time: float = 0.0) -> Problem:
    """Exact nonlinear wave: B = B_par n + A(sin phi e1 + cos phi e2), v = -dB/sqrt(rho)"""
    lengths = np.array([hi - lo for lo, hi in extent])
    k = 2.0 * np.pi * np.asarray(wavevector, dtype=float) / lengths
    k_norm = float(np.linalg.norm(k))
    n_hat, e1, e2 = _alfven_basis(k)
    omega = k_norm * b_parallel / np.sqrt(rho)

    def phase(x, y, z):
        return k[0] * x + k[1] * y + k[2] * z - omega * time

    def perturbation(x, y, z):
        phi = phase(x, y, z)
        s, c = np.sin(phi), np.cos(phi)
        return [amplitude * (s * e1[d] + c * e2[d]) for d in range(3)]

    def primitive(x, y, z):
        shape = np.broadcast(x, y, z).shape
        db = perturbation(x, y, z)
        w = np.zeros((8,) + shape)
        w[RHO] = rho
        w[PRS] = pressure
        for d in range(3):
            w[BX + d] = b_parallel * n_hat[d] + db[d]
            w[VX + d] = -db[d] / np.sqrt(rho)
        return w

    def potential(x, y, z):
        db = perturbation(x, y, z)
        return tuple(np.broadcast_to(component / k_norm, np.broadcast(x, y, z).shape) for component in db)

    return Problem("cp_alfven", primitive, potential, tuple(b_parallel * n_hat))


def alfven_period(extent: Sequence[Tuple[float, float]], wavevector: Sequence[int] = (1, 1, 1),
                  rho: float = 1.0, b_parallel: float = 1.0) -> float:
    lengths = np.array([hi - lo for lo, hi in extent])
    k_norm = float(np.linalg.norm(2.0 * np.pi * np.asarray(wavevector, dtype=float) / lengths))
    return 2.0 * np.pi / (k_norm * b_parallel / np.sqrt(rho))


def _mesh(grid: GridSpec, rank: int, staggered: Optional[int] = None, edge: Optional[int] = None):
    """Coordinates of cell centres, of faces normal to `staggered`, or of edges along `edge`"""
    axes = []
    for axis in range(3):
        centred = grid.cell_centers(rank, axis)
        faces = grid.face_positions(rank, axis)
        if staggered is not None:
            axes.append(faces if axis == staggered else centred)
        elif edge is not None:
            axes.append(centred if axis == edge else faces)
        else:
            axes.append(centred)
    return np.meshgrid(*axes, indexing="ij")


GAUSS_NODES = (-np.sqrt(0.6), 0.0, np.sqrt(0.6))
GAUSS_WEIGHTS = (5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0)


def _edge_average(problem: Problem, grid: GridSpec, rank: int, edge: int) -> np.ndarray:
    """Component `edge` of A averaged along its edges (three-point Gauss rule)"""
    mesh = _mesh(grid, rank, edge=edge)
    half = 0.5 * grid.spacing[edge]
    total = np.zeros(mesh[0].shape)
    for node, weight in zip(GAUSS_NODES, GAUSS_WEIGHTS):
        shifted = list(mesh)
        shifted[edge] = mesh[edge] + node * half
        total = total + weight * problem.potential(*shifted)[edge]
    return total


def face_field(problem: Problem, grid: GridSpec, rank: int) -> FaceB:
    """Face-averaged B = curl A from edge-averaged A, plus the uniform part (discretely div-free)"""
    dx, dy, dz = grid.spacing
    ax = _edge_average(problem, grid, rank, 0)   # (M, M+1, M+1)
    ay = _edge_average(problem, grid, rank, 1)   # (M+1, M, M+1)
    az = _edge_average(problem, grid, rank, 2)   # (M+1, M+1, M)
    b0 = problem.uniform_b

    bx = np.diff(az, axis=1) / dy - np.diff(ay, axis=2) / dz + b0[0]
    by = np.diff(ax, axis=2) / dz - np.diff(az, axis=0) / dx + b0[1]
    bz = np.diff(ay, axis=0) / dx - np.diff(ax, axis=1) / dy + b0[2]
    return FaceB(np.ascontiguousarray(bx), np.ascontiguousarray(by), np.ascontiguousarray(bz))


def initial_state(problem: Problem, grid: GridSpec, config: MhdConfig, rank: int = 0) -> MhdState:
    """Conservative block of one rank (ghosts included) from global cell coordinates"""
    w = problem.primitive(*_mesh(grid, rank))
    faces = None
    if config.divb_mode == "CT":
        faces = face_field(problem, grid, rank)
        w[BX:BZ + 1] = face_to_cell(faces)
    else:
        w = np.concatenate([w, np.zeros((1,) + w.shape[1:])])
    return MhdState(prim_to_cons(w, config.gamma), faces)


def init_orszag_tang_3d(grid: GridSpec, config: Optional[MhdConfig] = None, rank: int = 0,
                        perturbation: float = 0.01) -> MhdState:
    config = config or MhdConfig(problem="orszag_tang")
    return initial_state(orszag_tang_problem(perturbation), grid, config, rank)


def init_cp_alfven(grid: GridSpec, amplitude: float = 0.1, wavevector: Sequence[int] = (1, 1, 1),
                   config: Optional[MhdConfig] = None, rank: int = 0):
    """Initial block plus the analytic evaluator evaluator(t, x, y, z) -> primitive array"""
    config = config or MhdConfig(problem="cp_alfven")
    state = initial_state(cp_alfven_problem(grid.domain_extent, amplitude, wavevector), grid, config, rank)

    def evaluator(t: float, x, y, z) -> np.ndarray:
        return cp_alfven_problem(grid.domain_extent, amplitude, wavevector, time=t).primitive(x, y, z)

    return state, evaluator


def build_problem(config: MhdConfig, grid: GridSpec) -> Problem:
    if config.problem == "orszag_tang":
        return orszag_tang_problem()
    if config.problem == "cp_alfven":
        return cp_alfven_problem(grid.domain_extent, config.amplitude, config.wavevector)
    raise ValueError(f"unknown problem {config.problem!r}")
