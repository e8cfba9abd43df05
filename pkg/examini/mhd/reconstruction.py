"""
WENO-Z interpolation of point values to cell faces
"""

from typing import Tuple

import numpy as np

EPSILON = 1e-40
POWER = 2
LINEAR_WEIGHTS = (1.0 / 16.0, 10.0 / 16.0, 5.0 / 16.0)


def _wenoz(vm2, vm1, v0, vp1, vp2, epsilon: float = EPSILON, power: int = POWER):
    """Value at x_{i+1/2} from point values v_{i-2} .. v_{i+2}"""
    q0 = 0.375 * vm2 - 1.25 * vm1 + 1.875 * v0
    q1 = -0.125 * vm1 + 0.75 * v0 + 0.375 * vp1
    q2 = 0.375 * v0 + 0.75 * vp1 - 0.125 * vp2

    b0 = 13.0 / 12.0 * (vm2 - 2.0 * vm1 + v0) ** 2 + 0.25 * (vm2 - 4.0 * vm1 + 3.0 * v0) ** 2
    b1 = 13.0 / 12.0 * (vm1 - 2.0 * v0 + vp1) ** 2 + 0.25 * (vm1 - vp1) ** 2
    b2 = 13.0 / 12.0 * (v0 - 2.0 * vp1 + vp2) ** 2 + 0.25 * (3.0 * v0 - 4.0 * vp1 + vp2) ** 2
    tau = np.abs(b0 - b2)

    d0, d1, d2 = LINEAR_WEIGHTS
    a0 = d0 * (1.0 + (tau / (b0 + epsilon)) ** power)
    a1 = d1 * (1.0 + (tau / (b1 + epsilon)) ** power)
    a2 = d2 * (1.0 + (tau / (b2 + epsilon)) ** power)
    return (a0 * q0 + a1 * q1 + a2 * q2) / (a0 + a1 + a2)


def wenoz_reconstruct(stencil: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(left face, right face) values of the centre cell of a 5-point stencil (axis 0)"""
    vm2, vm1, v0, vp1, vp2 = (np.asarray(stencil, dtype=float)[k] for k in range(5))
    right = _wenoz(vm2, vm1, v0, vp1, vp2)
    left = _wenoz(vp2, vp1, v0, vm1, vm2)
    return left, right


def _take(q: np.ndarray, axis: int, start: int, stop: int) -> np.ndarray:
    index = [slice(None)] * q.ndim
    index[axis] = slice(start, stop)
    return q[tuple(index)]


def reconstruct_faces(q: np.ndarray, axis: int) -> Tuple[np.ndarray, np.ndarray]:
    """Left/right states at faces 3 .. M-3 along `axis` (face f sits between cells f-1 and f)

    Returns arrays whose `axis` extent is M - 5.
    """
    m = q.shape[axis]
    count = m - 5
    shifted = [_take(q, axis, k, k + count) for k in range(6)]
    # face between cell c = 2 + j and c + 1
    left = _wenoz(shifted[0], shifted[1], shifted[2], shifted[3], shifted[4])
    right = _wenoz(shifted[5], shifted[4], shifted[3], shifted[2], shifted[1])
    return left, right
