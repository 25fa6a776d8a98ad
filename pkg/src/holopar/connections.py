"""Covariant derivatives via frame-relative Christoffel symbols.

A connection is stored relative to a designated frame (both directions
of the parallelism equivalence are frame-native: "zero Christoffels in
a parallel frame"); coordinate Christoffels are a derived view. Index convention:
gamma[i, j, k] is Gamma^i_{jk} with nabla_{E_j} E_k = Gamma^i_{jk} E_i.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularFrameError
from .geometry import ChartPoint, Frame, TangentVector, coordinate_frame

DET_FLOOR = 1e-12


def zero_christoffels(n):
    def gamma(coords):
        coords = np.asarray(coords, dtype=float)
        return np.zeros(coords.shape[:-1] + (n, n, n))
    return gamma


def constant_christoffels(values):
    values = np.asarray(values, dtype=float)
    n = values.shape[0]

    def gamma(coords):
        coords = np.asarray(coords, dtype=float)
        return np.broadcast_to(values, coords.shape[:-1] + (n, n, n)).copy()
    return gamma


@dataclass(frozen=True)
class Connection:
    """Covariant derivative: frame plus frame-relative Christoffels.

    ``backing_parallelism`` marks connections constructed with zero
    Christoffels in a parallelism-parallel frame; their parallel
    translation equals the parallelism transfer exactly, which the
    transport module may use directly when the frame is only available
    through ODE integration.
    """

    frame: Frame
    gamma: object                       # (m, n) -> (m, n, n, n)
    backing_parallelism: object = None

    @property
    def dim(self):
        return self.frame.dim

    @staticmethod
    def flat(frame):
        return Connection(frame, zero_christoffels(frame.dim))

    def coordinate_christoffels_batch(self, coords):
        """Coordinate-frame symbols Gamma^a_{bc} at a batch of points."""
        coords = np.asarray(coords, dtype=float)
        E, dE = self.frame.matrix_jacobian_batch(coords)
        dets = np.linalg.det(E)
        if np.any(np.abs(dets) <= DET_FLOOR):
            raise SingularFrameError("singular frame in Christoffel transform")
        C = np.linalg.inv(E)
        gt = np.asarray(self.gamma(coords), dtype=float)
        # nabla_{E_j} E_k = E_j^b (d_b E_k^a + Gamma^a_{bc} E_k^c) d_a
        term = np.einsum("mijk,mai->majk", gt, E) - np.einsum("mdj,makd->majk", E, dE)
        return np.einsum("mjb,mkc,majk->mabc", C, C, term)

    def coordinate_christoffels(self, p):
        return self.coordinate_christoffels_batch(p.coords[None, :])[0]


def christoffels_in_frame(conn, new_frame, p):
    """Christoffel symbols of `conn` expressed relative to `new_frame`."""
    coords = p.coords[None, :]
    B, dB = new_frame.matrix_jacobian_batch(coords)
    B, dB = B[0], dB[0]
    if abs(np.linalg.det(B)) <= DET_FLOOR:
        raise SingularFrameError("singular target frame")
    C = np.linalg.inv(B)
    gamma_coord = conn.coordinate_christoffels(p)
    # nabla_{B_j} B_k = B_j^b (d_b B_k^a + Gamma^a_{bc} B_k^c)
    cov = np.einsum("bj,akb->ajk", B, dB) + np.einsum("abc,bj,ck->ajk", gamma_coord, B, B)
    return np.einsum("ia,ajk->ijk", C, cov)


def from_coordinate_christoffels(gamma, n, domain=None):
    """Connection given directly by coordinate-frame symbols."""
    return Connection(coordinate_frame(n, domain), gamma)


@dataclass(frozen=True)
class Endomorphism:
    base: ChartPoint
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=float))


def nabla_P(conn, parallelism, v):
    """Endomorphism w -> w^k v^j Gamma^i_{jk}(p) E_i(p) of the tangent space
    at the base of v, for Christoffels taken in a P-parallel frame.

    The matrix is returned in coordinate components.
    """
    p = v.base
    frame = parallelism.parallel_frame()
    gt = christoffels_in_frame(conn, frame, p)
    phi_p = frame.matrix(p)
    v_frame = np.linalg.solve(phi_p, v.components)
    m_frame = np.einsum("j,ijk->ik", v_frame, gt)
    return Endomorphism(p, phi_p @ m_frame @ np.linalg.inv(phi_p))


def covariant_derivative(conn, X, Y, p):
    """(nabla_X Y)(p) in coordinates."""
    coords = p.coords[None, :]
    xv = X.values_batch(coords)[0]
    yv, yj = Y.jacobian_batch(coords)
    yv, yj = yv[0], yj[0]
    gamma = conn.coordinate_christoffels(p)
    comps = yj @ xv + np.einsum("abc,b,c->a", gamma, xv, yv)
    return TangentVector(p, comps)


def torsion(conn, X, Y, p):
    """T(X,Y) = nabla_X Y - nabla_Y X - [X,Y], evaluated at p.

    The derivative terms of the covariant derivatives cancel the bracket
    exactly, leaving the antisymmetrized Christoffel contraction.
    """
    coords = p.coords[None, :]
    xv = X.values_batch(coords)[0]
    yv = Y.values_batch(coords)[0]
    gamma = conn.coordinate_christoffels(p)
    comps = (np.einsum("abc,b,c->a", gamma, xv, yv)
             - np.einsum("abc,b,c->a", gamma, yv, xv))
    return TangentVector(p, comps)
