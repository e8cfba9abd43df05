"""
SPH smoothing lengths and densities with the cubic-spline kernel

h is the kernel support radius: W(r, h) vanishes for r >= h.
"""

from typing import Optional

import numpy as np
from loguru import logger

from ..core.errors import ConfigError, HsmlNoConvergence
from .models import Bodies, OctTree, SphParams
from .tree import build_tree

_NORM = 8.0 / np.pi
_SELF_COUNT = 4.0 * np.pi / 3.0 * _NORM


def kernel_shape(u: np.ndarray) -> np.ndarray:
    """Dimensionless cubic spline w(u) on u = r / h, zero for u >= 1"""
    u = np.asarray(u, dtype=float)
    inner = 1.0 - 6.0 * u ** 2 + 6.0 * u ** 3
    outer = 2.0 * np.clip(1.0 - u, 0.0, None) ** 3
    return np.where(u < 0.5, inner, np.where(u < 1.0, outer, 0.0))


def kernel_w(r, h) -> np.ndarray:
    """W(r, h) = 8 / (pi h^3) w(r / h), normalized to unit volume integral"""
    h = np.asarray(h, dtype=float)
    return _NORM / h ** 3 * kernel_shape(np.asarray(r, dtype=float) / h)


def ball_query(tree: OctTree, point: np.ndarray, radius: float) -> np.ndarray:
    """Indices into tree.bodies strictly closer than radius to point"""
    hits = []
    stack = [0]
    while stack:
        node = stack.pop()
        gap = np.maximum(0.0, np.abs(point - tree.center[node]) - tree.half[node])
        if float(np.sum(gap * gap)) >= radius * radius:
            continue
        if tree.leaf[node]:
            hits.append(np.arange(tree.start[node], tree.end[node]))
        else:
            stack.extend(int(k) for k in tree.children[node] if k >= 0)
    if not hits:
        return np.zeros(0, dtype=np.int64)
    index = np.concatenate(hits)
    d2 = np.sum((tree.bodies.pos[index] - point) ** 2, axis=1)
    return index[d2 < radius * radius]


def neighbor_excess(distances: np.ndarray, h: float, n_ngb: float) -> float:
    """(4 pi / 3) h^3 n(h) - N_ngb; n(h) is the kernel-weighted neighbour number density"""
    return _SELF_COUNT * float(np.sum(kernel_shape(distances / h))) - n_ngb


def _solve_one(tree: OctTree, k: int, sph: SphParams, guess: float) -> float:
    point = tree.bodies.pos[k]
    body_id = int(tree.bodies.ids[k])
    iterations = 0

    def excess(h: float, distances: Optional[np.ndarray] = None) -> float:
        if distances is None:
            distances = np.linalg.norm(tree.bodies.pos[ball_query(tree, point, h)] - point, axis=1)
        return neighbor_excess(distances, h, sph.n_ngb)

    lo, hi = guess, guess
    if excess(guess) >= 0:
        while excess(lo) >= 0:
            hi, lo = lo, 0.5 * lo
            iterations += 1
            if iterations >= sph.max_iterations:
                raise HsmlNoConvergence(body_id, iterations)
    else:
        while excess(hi) < 0:
            lo, hi = hi, 2.0 * hi
            iterations += 1
            if iterations >= sph.max_iterations:
                raise HsmlNoConvergence(body_id, iterations)

    # candidates within the upper bracket never change during bisection
    distances = np.linalg.norm(tree.bodies.pos[ball_query(tree, point, hi)] - point, axis=1)
    while hi - lo > sph.tolerance * hi:
        mid = 0.5 * (lo + hi)
        if excess(mid, distances[distances < mid]) < 0:
            lo = mid
        else:
            hi = mid
        iterations += 1
        if iterations >= sph.max_iterations:
            raise HsmlNoConvergence(body_id, iterations)
    return 0.5 * (lo + hi)


def find_hsml(bodies: Bodies, sph: SphParams, tree: Optional[OctTree] = None) -> np.ndarray:
    """Smoothing length of every body (input order) by bracketed bisection over tree neighbours"""
    sph.validate()
    tree = build_tree(bodies) if tree is None else tree
    if len(tree.bodies) <= sph.n_ngb:
        raise ConfigError("find_hsml needs more bodies than n_ngb", bodies=len(tree.bodies), n_ngb=sph.n_ngb)
    guess = tree.domain.size * (sph.n_ngb / len(tree.bodies)) ** (1.0 / 3.0)
    h_tree = np.array([_solve_one(tree, k, sph, guess) for k in range(len(tree.bodies))])
    logger.debug(f"find_hsml: {len(bodies)} bodies, h in [{h_tree.min():.4g}, {h_tree.max():.4g}]")
    position = {int(i): k for k, i in enumerate(tree.bodies.ids)}
    return h_tree[[position[int(i)] for i in bodies.ids]]


def sph_density(bodies: Bodies, h: np.ndarray, tree: Optional[OctTree] = None) -> np.ndarray:
    """rho_i = sum_j m_j W(r_ij, h_i) including the self term"""
    h = np.asarray(h, dtype=float)
    tree = build_tree(bodies) if tree is None else tree
    rho = np.zeros(len(bodies))
    for i in range(len(bodies)):
        index = ball_query(tree, bodies.pos[i], h[i])
        r = np.linalg.norm(tree.bodies.pos[index] - bodies.pos[i], axis=1)
        rho[i] = float(np.sum(tree.bodies.mass[index] * kernel_w(r, h[i])))
    return rho
