"""The two constructive directions between connections and parallelisms.

Direction one: a parallelism from a connection by transporting along the
radial line segments of a convex chart region. Direction two: a
connection from a covering parallelism by declaring zero Christoffels in
each member's parallel frame and blending the coordinate symbols with a
partition of unity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .connections import Connection, zero_christoffels
from .errors import IntegrationBlowupError
from .geometry import Box, ChartPoint, coordinate_frame
from .parallelism import CoveringParallelism, Parallelism
from .transport import DEFAULT_STEP


@dataclass(frozen=True)
class ConvexChartRegion:
    """Open box around a center point (boxes are convex in coordinates)."""

    center: ChartPoint
    box: Box

    def __post_init__(self):
        if not self.box.contains(self.center.coords):
            raise ValueError("center must lie inside the region box")


def _radial_transport(conn, center, targets, step):
    """Transport matrices along the segments center -> target, batched.

    Integrates Phi' = A(s) Phi over s in [0,1] with positions
    center + s (target - center) and constant velocity target - center.
    """
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    m, n = targets.shape
    vel = targets - center
    steps = max(1, int(round(1.0 / step)))
    h = 1.0 / steps
    grid = np.linspace(0.0, 1.0, 2 * steps + 1)
    pos = center + grid[None, :, None] * vel[:, None, :]
    gamma = conn.coordinate_christoffels_batch(pos.reshape(-1, n))
    gamma = gamma.reshape(m, grid.size, n, n, n)
    A_all = -np.einsum("mj,mgijk->mgik", vel, gamma)
    phi = np.broadcast_to(np.eye(n), (m, n, n)).copy()
    for k in range(steps):
        A1 = A_all[:, 2 * k]
        A2 = A_all[:, 2 * k + 1]
        A4 = A_all[:, 2 * k + 2]
        k1 = A1 @ phi
        k2 = A2 @ (phi + 0.5 * h * k1)
        k3 = A2 @ (phi + 0.5 * h * k2)
        k4 = A4 @ (phi + h * k3)
        phi = phi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(phi)):
            raise IntegrationBlowupError("radial transport blow-up", t=(k + 1) * h)
    return phi


def parallelism_from_connection(conn, region, step=DEFAULT_STEP):
    """Parallelism whose trivialization is transport along radial segments.

    [phi_q] := P_{gamma_q} where gamma_q runs from the region center to q
    along the coordinate line segment; P(q1, q2) then composes through
    the center.
    """
    center = np.asarray(region.center.coords, dtype=float)

    def phi(coords):
        return _radial_transport(conn, center, coords, step)

    return Parallelism(region.box, phi, basepoint=center)


def connection_from_covering_parallelism(cover):
    """The blended covariant derivative of a covering parallelism.

    Each member gets zero Christoffels in its parallel frame; member
    coordinate symbols are combined pointwise with the partition
    weights. Single-member covers keep a reference to their parallelism
    so transport can use exact frame transfer.
    """
    n = cover.region.dim
    member_conns = [Connection(par.parallel_frame(), zero_christoffels(n))
                    for _, par in cover.members]

    def gamma(coords):
        coords = np.atleast_2d(np.asarray(coords, dtype=float))
        out = np.zeros(coords.shape[:-1] + (n, n, n))
        for (box, _), conn_a, weight in zip(cover.members, member_conns, cover.partition):
            w = np.asarray(weight(coords), dtype=float)
            active = w > 0.0
            if not np.any(active):
                continue
            ga = conn_a.coordinate_christoffels_batch(coords[active])
            out[active] += w[active, None, None, None] * ga
        return out

    backing = cover.members[0][1] if len(cover.members) == 1 else None
    return Connection(coordinate_frame(n, cover.region), gamma,
                      backing_parallelism=backing)


def decompose_box(box, per_axis=2, overlap=0.25):
    """Fixed decomposition of a box into overlapping sub-boxes.

    Each axis is split into `per_axis` pieces enlarged by `overlap`
    times their own width (25% linear overlap by default).
    """
    n = box.dim
    axis_pieces = []
    for d in range(n):
        lo, hi = box.lo[d], box.hi[d]
        width = (hi - lo) / per_axis
        pieces = []
        for k in range(per_axis):
            # overhang past the working region keeps bump weights bounded
            # away from zero on its closure (callers keep the region
            # strictly inside the chart)
            a = lo + k * width - overlap * width
            b = lo + (k + 1) * width + overlap * width
            pieces.append((a, b))
        axis_pieces.append(pieces)
    boxes = []

    def rec(d, los, his):
        if d == n:
            boxes.append(Box(tuple(los), tuple(his)))
            return
        for a, b in axis_pieces[d]:
            rec(d + 1, los + [a], his + [b])

    rec(0, [], [])
    return boxes


def covering_from_connection(conn, domain, per_axis=2, overlap=0.25,
                             step=DEFAULT_STEP):
    """Covering parallelism built from radial transports on a fixed
    overlapping box decomposition (the connection-to-parallelism direction
    of the equivalence)."""
    members = []
    for box in decompose_box(domain, per_axis, overlap):
        center = ChartPoint(0.5 * (np.asarray(box.lo) + np.asarray(box.hi)))
        region = ConvexChartRegion(center, box)
        members.append((box, parallelism_from_connection(conn, region, step)))
    return CoveringParallelism.build(members, domain)
