"""
Force evaluation: direct summation oracle, classic Barnes-Hut walk and the grouped walk
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .models import Bodies, OctTree, WalkParams

_CHUNK = 256


def direct_sum(bodies: Bodies, softening: float = 0.0, targets: Optional[Bodies] = None) -> np.ndarray:
    """O(n^2) softened accelerations (G = 1) on `targets` (default: the bodies themselves)"""
    targets = bodies if targets is None else targets
    out = np.zeros((len(targets), 3))
    eps2 = softening * softening
    for lo in range(0, len(targets), _CHUNK):
        hi = min(lo + _CHUNK, len(targets))
        out[lo:hi] = _pair_sum(targets.pos[lo:hi], targets.ids[lo:hi], bodies.pos, bodies.mass, bodies.ids, eps2)
    return out


def _pair_sum(points: np.ndarray, point_ids: np.ndarray, src: np.ndarray, src_mass: np.ndarray,
              src_ids: np.ndarray, eps2: float) -> np.ndarray:
    diff = src[None, :, :] - points[:, None, :]
    r2 = np.sum(diff * diff, axis=2) + eps2
    same = src_ids[None, :] == point_ids[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        weight = np.where(same, 0.0, src_mass[None, :] / (r2 * np.sqrt(r2)))
    return np.einsum("ij,ijk->ik", weight, diff)


def _monopole_sum(points: np.ndarray, com: np.ndarray, mass: np.ndarray, eps2: float) -> np.ndarray:
    diff = com[None, :, :] - points[:, None, :]
    r2 = np.sum(diff * diff, axis=2) + eps2
    return np.einsum("ij,ijk->ik", mass[None, :] / (r2 * np.sqrt(r2)), diff)


@dataclass
class InteractionList:
    nodes: List[int] = field(default_factory=list)
    leaves: List[int] = field(default_factory=list)
    bodies: int = 0

    @property
    def length(self) -> int:
        return len(self.nodes) + self.bodies


def _box_gap(lo_a: np.ndarray, hi_a: np.ndarray, lo_b: np.ndarray, hi_b: np.ndarray) -> float:
    gap = np.maximum(0.0, np.maximum(lo_a - hi_b, lo_b - hi_a))
    return float(np.sqrt(np.sum(gap * gap)))


def interaction_list(tree: OctTree, lo: np.ndarray, hi: np.ndarray, theta: float,
                     direct_radius: float = 0.0) -> InteractionList:
    """Nodes accepted for every point of the box [lo, hi] plus the leaves summed directly

    A node is accepted only if size / d <= theta for the closest point of the box,
    its box does not touch the target box, and it lies beyond direct_radius.
    """
    result = InteractionList()
    stack = [0]
    while stack:
        node = stack.pop()
        if tree.leaf[node]:
            result.leaves.append(node)
            result.bodies += int(tree.end[node] - tree.start[node])
            continue
        c = tree.com[node]
        d = _box_gap(c, c, lo, hi)
        size = 2.0 * tree.half[node]
        node_lo = tree.center[node] - tree.half[node]
        node_hi = tree.center[node] + tree.half[node]
        touching = bool(np.all(node_lo <= hi) and np.all(lo <= node_hi))
        near = direct_radius > 0 and _box_gap(node_lo, node_hi, lo, hi) < direct_radius
        if not touching and not near and size <= theta * d:
            result.nodes.append(node)
        else:
            kids = tree.children[node]
            stack.extend(int(k) for k in kids[::-1] if k >= 0)
    return result


def _apply(tree: OctTree, ilist: InteractionList, points: np.ndarray, ids: np.ndarray, eps2: float) -> np.ndarray:
    acc = np.zeros((points.shape[0], 3))
    if ilist.nodes:
        nodes = np.array(ilist.nodes)
        acc += _monopole_sum(points, tree.com[nodes], tree.mass[nodes], eps2)
    if ilist.leaves:
        index = np.concatenate([np.arange(tree.start[k], tree.end[k]) for k in ilist.leaves])
        src = tree.bodies
        acc += _pair_sum(points, ids, src.pos[index], src.mass[index], src.ids[index], eps2)
    return acc


def bh_force(tree: OctTree, bodies: Bodies, params: WalkParams,
             counters: Optional[List[int]] = None) -> np.ndarray:
    """Classic per-body walk; inactive targets get zero acceleration"""
    eps2 = params.softening ** 2
    out = np.zeros((len(bodies), 3))
    for i in np.flatnonzero(bodies.active):
        p = bodies.pos[i]
        ilist = interaction_list(tree, p, p, params.theta)
        out[i] = _apply(tree, ilist, p[None, :], bodies.ids[i:i + 1], eps2)[0]
        if counters is not None:
            counters.append(ilist.length)
    return out


def hilbert_groups(bodies: Bodies, group_size: int) -> List[np.ndarray]:
    """Consecutive runs of active bodies in their (key) order"""
    active = np.flatnonzero(bodies.active)
    return [active[i:i + group_size] for i in range(0, active.size, group_size)]


def grouped_walk_force(tree: OctTree, bodies: Bodies, params: WalkParams,
                       counters: Optional[List[Tuple[int, int]]] = None) -> np.ndarray:
    """One shared interaction list per Hilbert-contiguous group of `bodies`

    `bodies` must be in key order (the tree's bodies or a contiguous run of them).
    `counters` receives (group list length, group size) per group; inactive
    targets get zero acceleration.
    """
    eps2 = params.softening ** 2
    out = np.zeros((len(bodies), 3))
    for group in hilbert_groups(bodies, params.group_size):
        pts = bodies.pos[group]
        ilist = interaction_list(tree, pts.min(axis=0), pts.max(axis=0), params.theta, params.direct_radius)
        out[group] = _apply(tree, ilist, pts, bodies.ids[group], eps2)
        if counters is not None:
            counters.append((ilist.length, int(group.size)))
    return out


def in_input_order(tree: OctTree, acc: np.ndarray, bodies: Bodies) -> np.ndarray:
    """Reorder tree-ordered accelerations to match `bodies` by id"""
    position = {int(i): k for k, i in enumerate(tree.bodies.ids)}
    return acc[[position[int(i)] for i in bodies.ids]]


def relative_error(approx: np.ndarray, exact: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(exact, axis=1)
    return np.linalg.norm(approx - exact, axis=1) / np.where(norm > 0, norm, 1.0)
