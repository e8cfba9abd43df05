"""
Divergence control: constrained transport on the staggered field and GLM cleaning
"""

from typing import Sequence, Tuple

import numpy as np

from .models import FaceB

Emf = Tuple[np.ndarray, np.ndarray, np.ndarray]


def _take(a: np.ndarray, axis: int, start: int, stop: int) -> np.ndarray:
    index = [slice(None)] * a.ndim
    index[axis] = slice(start, stop)
    return a[tuple(index)]


def midpoints(a: np.ndarray, axis: int) -> np.ndarray:
    """Fourth-order values halfway between neighbouring point values (one-sided at both ends)"""
    n = a.shape[axis]
    inner = (9.0 * (_take(a, axis, 1, n - 2) + _take(a, axis, 2, n - 1))
             - (_take(a, axis, 0, n - 3) + _take(a, axis, 3, n))) / 16.0
    first = (5.0 * _take(a, axis, 0, 1) + 15.0 * _take(a, axis, 1, 2)
             - 5.0 * _take(a, axis, 2, 3) + _take(a, axis, 3, 4)) / 16.0
    last = (5.0 * _take(a, axis, n - 1, n) + 15.0 * _take(a, axis, n - 2, n - 1)
            - 5.0 * _take(a, axis, n - 3, n - 2) + _take(a, axis, n - 4, n - 3)) / 16.0
    return np.concatenate([first, inner, last], axis=axis)


def second_difference(a: np.ndarray, axis: int) -> np.ndarray:
    """a[k-1] - 2 a[k] + a[k+1], with the one-sided 2, -5, 4, -1 stencil at both ends"""
    n = a.shape[axis]
    inner = _take(a, axis, 0, n - 2) - 2.0 * _take(a, axis, 1, n - 1) + _take(a, axis, 2, n)
    first = (2.0 * _take(a, axis, 0, 1) - 5.0 * _take(a, axis, 1, 2)
             + 4.0 * _take(a, axis, 2, 3) - _take(a, axis, 3, 4))
    last = (2.0 * _take(a, axis, n - 1, n) - 5.0 * _take(a, axis, n - 2, n - 1)
            + 4.0 * _take(a, axis, n - 3, n - 2) - _take(a, axis, n - 4, n - 3))
    return np.concatenate([first, inner, last], axis=axis)


def _edge_component(first: np.ndarray, first_axis: int, second: np.ndarray, second_axis: int,
                    along: int) -> np.ndarray:
    """Average of the two face estimates of one EMF component, line-averaged along its edge

    `first` is interpolated along `first_axis`, `second` along `second_axis`.
    """
    a = midpoints(first, first_axis)
    b = midpoints(second, second_axis)
    shape = list(a.shape)
    shape[first_axis] += 2
    out = np.zeros(shape)
    inner = [slice(None)] * 3
    inner[first_axis] = slice(1, -1)
    inner[second_axis] = slice(1, -1)
    out[tuple(inner)] = 0.5 * (_take(a, second_axis, 1, a.shape[second_axis] - 1)
                               + _take(b, first_axis, 1, b.shape[first_axis] - 1))
    return out + second_difference(out, along) / 24.0


def edge_emf(fx: np.ndarray, fy: np.ndarray, fz: np.ndarray) -> Emf:
    """Line-averaged edge EMFs from the point-value induction fluxes

    fx, fy, fz are (3, ...) arrays holding the uncorrected Riemann fluxes of (Bx, By, Bz)
    through the x-, y- and z-faces. Each face estimate is interpolated to the edge with a
    fourth-order stencil, the two estimates are averaged and the result is converted to
    its average along the edge, so the CT update advances face averages to fourth order.
    Edge (i, j) of Ez sits at (x_{i-1/2}, y_{j-1/2}); edges next to the block border are
    not filled.
    """
    # Ez = -F_x(By) = F_y(Bx)
    ez = _edge_component(-fx[1], 1, fy[0], 0, along=2)
    # Ex = -F_y(Bz) = F_z(By)
    ex = _edge_component(-fy[2], 2, fz[1], 1, along=0)
    # Ey = F_x(Bz) = -F_z(Bx)
    ey = _edge_component(fx[2], 2, -fz[0], 0, along=1)
    return ex, ey, ez


def _diff(a: np.ndarray, axis: int, periodic: bool) -> np.ndarray:
    """Forward difference a[i+1] - a[i] (staggered extent shrinks by one unless periodic)"""
    if periodic:
        return np.roll(a, -1, axis=axis) - a
    return np.diff(a, axis=axis)


def ct_increments(emf: Emf, spacing: Sequence[float], periodic: bool = False) -> Tuple[np.ndarray, ...]:
    """-curl E on the faces"""
    ex, ey, ez = emf
    dx, dy, dz = spacing
    dbx = -(_diff(ez, 1, periodic) / dy - _diff(ey, 2, periodic) / dz)
    dby = -(_diff(ex, 2, periodic) / dz - _diff(ez, 0, periodic) / dx)
    dbz = -(_diff(ey, 0, periodic) / dx - _diff(ex, 1, periodic) / dy)
    return dbx, dby, dbz


def ct_update(face: FaceB, emf: Emf, dt: float, spacing: Sequence[float] = (1.0, 1.0, 1.0),
              periodic: bool = False) -> FaceB:
    """Advance the face field by -dt curl E; the face divergence changes only by round-off

    In periodic mode every array has the cell shape and differences wrap.
    """
    dbx, dby, dbz = ct_increments(emf, spacing, periodic)
    return FaceB(face.bx + dt * dbx, face.by + dt * dby, face.bz + dt * dbz)


def divergence_faces(face: FaceB, spacing: Sequence[float], periodic: bool = False) -> np.ndarray:
    """Face-difference divergence per cell"""
    dx, dy, dz = spacing
    return (_diff(face.bx, 0, periodic) / dx + _diff(face.by, 1, periodic) / dy
            + _diff(face.bz, 2, periodic) / dz)


def divergence_cells(b: np.ndarray, spacing: Sequence[float], periodic: bool = True) -> np.ndarray:
    """Central-difference divergence of a cell-centred field b[3, ...]"""
    div = np.zeros(b.shape[1:])
    for axis in range(3):
        if periodic:
            div += (np.roll(b[axis], -1, axis) - np.roll(b[axis], 1, axis)) / (2.0 * spacing[axis])
        else:
            inner = [slice(1, -1)] * 3
            hi = list(inner)
            lo = list(inner)
            hi[axis] = slice(2, None)
            lo[axis] = slice(None, -2)
            div[tuple(inner)] += (b[axis][tuple(hi)] - b[axis][tuple(lo)]) / (2.0 * spacing[axis])
    return div


def normalized_divergence(div: np.ndarray, b_max: float, spacing: Sequence[float]) -> float:
    """max |div B| in units of |B| / dx"""
    if div.size == 0 or b_max <= 0:
        return 0.0
    return float(np.max(np.abs(div)) * min(spacing) / b_max)


def face_points(face: FaceB) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Face-centre point values from face averages (fourth order in the two transverse directions)"""
    points = []
    for axis, component in enumerate(face.components()):
        transverse = [t for t in range(3) if t != axis]
        points.append(component - (second_difference(component, transverse[0])
                                   + second_difference(component, transverse[1])) / 24.0)
    return tuple(points)


def face_to_cell(face: FaceB) -> np.ndarray:
    """Cell-centre point values of B from the face averages"""
    return np.stack([midpoints(p, axis) for axis, p in enumerate(face_points(face))])


def glm_interface(bn_l, bn_r, psi_l, psi_r, ch: float):
    """Exact solution of the (Bn, psi) subsystem at the interface"""
    bn = 0.5 * (bn_l + bn_r) - (psi_r - psi_l) / (2.0 * ch)
    psi = 0.5 * (psi_l + psi_r) - 0.5 * ch * (bn_r - bn_l)
    return bn, psi


def glm_damping_factor(dt: float, ch: float, dmin: float, damping: float = 0.18) -> float:
    """psi decay over one step (parabolic part of the mixed correction)"""
    return float(np.exp(-dt * ch / (damping * dmin)))


def glm_step(b: np.ndarray, psi: np.ndarray, dt: float, ch: float, spacing: Sequence[float] = (1.0, 1.0, 1.0),
             damping: float = 0.18) -> Tuple[np.ndarray, np.ndarray]:
    """One upwind step of the periodic (B, psi) cleaning subsystem followed by damping"""
    b_new = b.copy()
    psi_new = psi.copy()
    for axis in range(3):
        bn_r = np.roll(b[axis], -1, axis)
        psi_r = np.roll(psi, -1, axis)
        bn_face, psi_face = glm_interface(b[axis], bn_r, psi, psi_r, ch)
        # flux through the right face of each cell
        f_b = psi_face
        f_psi = ch * ch * bn_face
        b_new[axis] -= dt / spacing[axis] * (f_b - np.roll(f_b, 1, axis))
        psi_new -= dt / spacing[axis] * (f_psi - np.roll(f_psi, 1, axis))
    psi_new *= glm_damping_factor(dt, ch, min(spacing), damping)
    return b_new, psi_new
