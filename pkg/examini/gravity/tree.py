"""
Oct-tree over Hilbert-contiguous key ranges, with point location and audit
"""

from typing import Dict, List, Optional

import numpy as np

from ..core.errors import GravityError
from .hilbert import cell_coords, hilbert_sort
from .models import MAX_KEY_ORDER, Bodies, KeyDomain, OctTree


def build_tree(bodies: Bodies, domain: Optional[KeyDomain] = None, leaf_capacity: int = 8,
               order: int = MAX_KEY_ORDER) -> OctTree:
    """Sort bodies by key and split key ranges into octants until leaves hold <= leaf_capacity bodies"""
    if len(bodies) == 0:
        raise GravityError("cannot build a tree without bodies")
    domain = domain or KeyDomain.around(bodies.pos)
    sorted_bodies = hilbert_sort(bodies, domain, order)
    keys = sorted_bodies.keys
    n = len(sorted_bodies)

    center: List[np.ndarray] = [domain.lo + 0.5 * domain.size]
    half: List[float] = [0.5 * domain.size]
    start: List[int] = [0]
    end: List[int] = [n]
    depth: List[int] = [0]
    children: List[List[int]] = [[-1] * 8]
    leaf: List[bool] = [False]

    stack = [(0, 0, 0)]      # node, level, key prefix
    while stack:
        node, level, prefix = stack.pop()
        lo_i, hi_i = start[node], end[node]
        if hi_i - lo_i <= leaf_capacity or level == order:
            leaf[node] = True
            continue
        span = 8 ** (order - level - 1)
        bounds = np.searchsorted(keys[lo_i:hi_i], np.array([(prefix * 8 + c) * span for c in range(9)],
                                                             dtype=np.uint64)) + lo_i
        bounds[8] = hi_i
        for c in range(8):
            a, b = int(bounds[c]), int(bounds[c + 1])
            if a == b:
                continue
            cell = cell_coords(sorted_bodies.pos[a], domain, level + 1)[0]
            width = domain.size / (1 << (level + 1))
            child = len(center)
            center.append(domain.lo + (cell + 0.5) * width)
            half.append(0.5 * width)
            start.append(a)
            end.append(b)
            depth.append(level + 1)
            children.append([-1] * 8)
            leaf.append(False)
            children[node][c] = child
            stack.append((child, level + 1, prefix * 8 + c))

    count = len(center)
    mass = np.zeros(count)
    com = np.zeros((count, 3))
    child_arr = np.array(children, dtype=np.int64)
    for node in range(count - 1, -1, -1):
        if leaf[node]:
            m = sorted_bodies.mass[start[node]:end[node]]
            mass[node] = m.sum()
            com[node] = m @ sorted_bodies.pos[start[node]:end[node]] / mass[node]
        else:
            kids = child_arr[node][child_arr[node] >= 0]
            mass[node] = mass[kids].sum()
            com[node] = mass[kids] @ com[kids] / mass[node]

    return OctTree(
        bodies=sorted_bodies, domain=domain, center=np.array(center), half=np.array(half), mass=mass, com=com,
        children=child_arr, start=np.array(start), end=np.array(end), leaf=np.array(leaf),
        depth=np.array(depth), leaf_capacity=leaf_capacity,
    )


def _inside(tree: OctTree, node: int, point: np.ndarray) -> bool:
    return bool(np.all(np.abs(point - tree.center[node]) <= tree.half[node] * (1 + 1e-12)))


def locate(tree: OctTree, point) -> int:
    """Leaf whose box holds the point, or -1 outside the root"""
    point = np.asarray(point, dtype=float)
    node = 0
    if not _inside(tree, node, point):
        return -1
    while not tree.leaf[node]:
        nxt = -1
        for child in tree.children[node]:
            if child >= 0 and _inside(tree, child, point):
                nxt = int(child)
                break
        if nxt < 0:
            return -1
        node = nxt
    return node


def audit_tree(tree: OctTree, bodies: Optional[Bodies] = None, rtol: float = 1e-12) -> Dict:
    """Mass closure, containment and single-ownership checks"""
    problems: List[str] = []
    for node in range(tree.nodes):
        if not tree.leaf[node]:
            kids = tree.children[node][tree.children[node] >= 0]
            if abs(tree.mass[kids].sum() - tree.mass[node]) > rtol * tree.mass[node]:
                problems.append(f"node {node}: children mass differs from node mass")
        if np.any(np.abs(tree.com[node] - tree.center[node]) > tree.half[node] * (1 + 1e-12)):
            problems.append(f"node {node}: centre of mass outside the box")

    owners = np.zeros(len(tree.bodies), dtype=np.int64)
    for node in tree.leaves():
        a, b = tree.start[node], tree.end[node]
        owners[a:b] += 1
        pts = tree.bodies.pos[a:b]
        if np.any(np.abs(pts - tree.center[node]) > tree.half[node] * (1 + 1e-12)):
            problems.append(f"leaf {node}: body outside its box")
    if np.any(owners != 1):
        problems.append("bodies not owned by exactly one leaf")

    reference = bodies.mass.sum() if bodies is not None else tree.bodies.mass.sum()
    leaf_mass = tree.mass[tree.leaves()].sum()
    if abs(leaf_mass - reference) > rtol * reference:
        problems.append("leaf masses do not add up to the body mass")

    return {"status": "ok" if not problems else "failed", "nodes": tree.nodes,
            "leaves": int(tree.leaf.sum()), "problems": problems}
