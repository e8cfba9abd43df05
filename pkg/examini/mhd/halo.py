"""
Ghost-zone exchange with all 26 neighbours of a block
"""

import itertools
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..core.ranks import RankContext
from .models import GridSpec

OFFSETS: List[Tuple[int, int, int]] = [o for o in itertools.product((-1, 0, 1), repeat=3) if o != (0, 0, 0)]
OFFSET_TAG = {o: i for i, o in enumerate(OFFSETS)}


def _axis_slice(o: int, n: int, g: int, staggered: bool, sending: bool) -> slice:
    """Index range along one axis for a ghost region (receive) or the matching interior (send)

    Staggered axes hold n + 2g + 1 faces; face g + n belongs to the +1 neighbour.
    """
    extra = 1 if staggered else 0
    if o == 0:
        return slice(g, g + n)
    if sending:
        # data travelling towards the neighbour at `o` fills its ghost region at -o
        return slice(n, n + g) if o > 0 else slice(g, 2 * g + extra)
    return slice(0, g) if o < 0 else slice(g + n, n + 2 * g + extra)


def region(offset: Sequence[int], local: Sequence[int], g: int, stagger: Optional[int],
           sending: bool) -> Tuple:
    return (Ellipsis,) + tuple(
        _axis_slice(o, n, g, stagger == axis, sending) for axis, (o, n) in enumerate(zip(offset, local))
    )


def fill_outflow(array: np.ndarray, grid: GridSpec, rank: int, stagger: Optional[int] = None) -> None:
    """Zero-gradient ghosts on non-periodic physical boundaries"""
    g = grid.ghost_width
    coords = grid.rank_coords(rank)
    spatial = array.ndim - 3
    for axis in range(3):
        if grid.periodic[axis]:
            continue
        n = grid.local_cells[axis]
        extra = 1 if stagger == axis else 0
        ax = spatial + axis
        if coords[axis] == 0:
            edge = np.take(array, [g], axis=ax)
            index = [slice(None)] * array.ndim
            index[ax] = slice(0, g)
            array[tuple(index)] = edge
        if coords[axis] == grid.rank_layout[axis] - 1:
            last = g + n - 1 + extra
            edge = np.take(array, [last], axis=ax)
            index = [slice(None)] * array.ndim
            index[ax] = slice(last + 1, n + 2 * g + extra)
            array[tuple(index)] = edge


def halo_exchange(ctx: RankContext, grid: GridSpec, arrays: Sequence[np.ndarray],
                  staggers: Optional[Sequence[Optional[int]]] = None) -> None:
    """Fill the ghost zones of every array in place

    All sends are posted before the first receive. `staggers[i]` names the axis
    along which array i is face-centred (None for cell-centred arrays).
    """
    staggers = list(staggers) if staggers is not None else [None] * len(arrays)
    g = grid.ghost_width
    local = grid.local_cells

    for offset in OFFSETS:
        dst = grid.neighbor(ctx.rank, offset)
        if dst is None:
            continue
        receiver_ghost = tuple(-o for o in offset)
        payload = [a[region(offset, local, g, s, sending=True)] for a, s in zip(arrays, staggers)]
        ctx.send(dst, OFFSET_TAG[receiver_ghost], payload)

    for offset in OFFSETS:
        src = grid.neighbor(ctx.rank, offset)
        if src is None:
            continue
        payload = ctx.recv(src, OFFSET_TAG[offset])
        for a, s, block in zip(arrays, staggers, payload):
            a[region(offset, local, g, s, sending=False)] = block

    for a, s in zip(arrays, staggers):
        fill_outflow(a, grid, ctx.rank, s)
