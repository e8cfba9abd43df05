"""
3D Hilbert keys (transpose form of the curve, vectorized over bodies)
"""

import numpy as np

from ..core.errors import OutOfDomain
from .models import MAX_KEY_ORDER, Bodies, KeyDomain


def cell_coords(pos: np.ndarray, domain: KeyDomain, order: int) -> np.ndarray:
    """Integer cell of every position at the given refinement level -> (n, 3) int64"""
    pos = np.atleast_2d(np.asarray(pos, dtype=float))
    outside = np.any((pos < domain.lo) | (pos > domain.hi), axis=1)
    if np.any(outside):
        first = int(np.flatnonzero(outside)[0])
        raise OutOfDomain(first, pos[first])
    cells = 1 << order
    scaled = np.floor((pos - domain.lo) / domain.size * cells).astype(np.int64)
    return np.clip(scaled, 0, cells - 1)


def hilbert_index(coords: np.ndarray, order: int) -> np.ndarray:
    """Hilbert index of integer cell coordinates (n, 3) at `order` bits per axis"""
    if not 1 <= order <= MAX_KEY_ORDER:
        raise ValueError(f"order must lie in [1, {MAX_KEY_ORDER}]")
    x = [np.array(coords[:, i], dtype=np.int64) for i in range(3)]

    # inverse undo of the excess work
    q = 1 << (order - 1)
    while q > 1:
        p = q - 1
        for i in range(3):
            high = (x[i] & q) != 0
            t = np.where(high, 0, (x[0] ^ x[i]) & p)
            x[0] = np.where(high, x[0] ^ p, x[0] ^ t)
            x[i] = x[i] ^ t
        q >>= 1

    # Gray encode
    for i in range(1, 3):
        x[i] = x[i] ^ x[i - 1]
    t = np.zeros_like(x[0])
    q = 1 << (order - 1)
    while q > 1:
        t = np.where((x[2] & q) != 0, t ^ (q - 1), t)
        q >>= 1
    x = [xi ^ t for xi in x]

    key = np.zeros(x[0].shape, dtype=np.uint64)
    for bit in range(order - 1, -1, -1):
        for i in range(3):
            key = (key << np.uint64(1)) | ((x[i] >> bit) & 1).astype(np.uint64)
    return key


def hilbert_key(pos: np.ndarray, domain: KeyDomain, order: int = MAX_KEY_ORDER) -> np.ndarray:
    """Key of the cell holding each position; all positions in one cell share a key"""
    return hilbert_index(cell_coords(pos, domain, order), order)


def hilbert_sort(bodies: Bodies, domain: KeyDomain, order: int = MAX_KEY_ORDER) -> Bodies:
    """Stable reorder by key; the returned set carries its keys"""
    keys = hilbert_key(bodies.pos, domain, order)
    ordering = np.argsort(keys, kind="stable")
    sorted_bodies = bodies.take(ordering)
    sorted_bodies.keys = keys[ordering]
    return sorted_bodies
