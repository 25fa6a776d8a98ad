"""Parallel translation along curves and the general matrix ODE.

Transport solves the matrix ODE Phi' = A(t) Phi, Phi(0) = I with
A^i_k(t) = -(velocity)^j Gamma^i_{jk}(position) in coordinates, i.e. all
n basis solutions in one pass, using classical fixed-step RK4 (default
step 1e-3) with step-halving error estimates. Curve ensembles integrate
in one vectorized sweep; coefficients are precomputed on the half-step
grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IntegrationBlowupError

DEFAULT_STEP = 1e-3
DET_FLOOR = 1e-12


@dataclass(frozen=True)
class TransportOperator:
    """Linear isomorphism from T_from to T_to, in coordinate components."""

    from_point: object
    to_point: object
    matrix: np.ndarray
    step_error: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=float))
        if abs(np.linalg.det(self.matrix)) <= DET_FLOOR:
            raise IntegrationBlowupError("transport operator is singular")

    def __call__(self, v):
        return self.matrix @ np.asarray(v, dtype=float)


@dataclass(frozen=True)
class MatrixCurve:
    """Sampled matrix curve (t, Phi(t)); Phi(0) must be the identity."""

    samples: tuple

    def __post_init__(self):
        t0, m0 = self.samples[0]
        if t0 != 0.0 or np.max(np.abs(np.asarray(m0) - np.eye(len(m0)))) > 1e-12:
            raise ValueError("matrix curve must start at (0, I)")

    @property
    def ts(self):
        return np.asarray([t for t, _ in self.samples])

    @property
    def matrices(self):
        return np.asarray([m for _, m in self.samples])


def _rk4_matrix(A_all, h, sample_idx):
    """Integrate Phi' = A Phi for a batch; A_all has shape (m, 2N+1, n, n)
    on the half-step grid. Returns Phi at the requested step indices."""
    m, G, n, _ = A_all.shape
    N = (G - 1) // 2
    phi = np.broadcast_to(np.eye(n), (m, n, n)).copy()
    out = {}
    if 0 in sample_idx:
        out[0] = phi.copy()
    for k in range(N):
        A1 = A_all[:, 2 * k]
        A2 = A_all[:, 2 * k + 1]
        A4 = A_all[:, 2 * k + 2]
        k1 = A1 @ phi
        k2 = A2 @ (phi + 0.5 * h * k1)
        k3 = A2 @ (phi + 0.5 * h * k2)
        k4 = A4 @ (phi + h * k3)
        phi = phi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(phi)):
            raise IntegrationBlowupError("transport blow-up", t=(k + 1) * h)
        if k + 1 in sample_idx:
            out[k + 1] = phi.copy()
    return out


def _coefficient_grid(conn, curves, t_end, steps):
    """A(t) on the half-step grid for every curve: (m, 2*steps+1, n, n)."""
    n = conn.dim
    grid = np.linspace(0.0, t_end, 2 * steps + 1)
    pos = np.empty((len(curves), grid.size, n))
    vel = np.empty_like(pos)
    for c, curve in enumerate(curves):
        pos[c], vel[c] = curve.positions_velocities(grid)
    gamma = conn.coordinate_christoffels_batch(pos.reshape(-1, n))
    gamma = gamma.reshape(len(curves), grid.size, n, n, n)
    return -np.einsum("mgj,mgijk->mgik", vel, gamma), pos


def transport_ensemble(conn, curves, sample_ts, step=DEFAULT_STEP, t_end=1.0):
    """Transport matrices for many curves at once.

    Returns (phis, positions0, sample_positions): phis has shape
    (ncurves, nsamples, n, n), sample_ts must be multiples of `step`.

    Connections flagged with a backing parallelism translate by exact
    frame transfer instead of integrating.
    """
    sample_ts = np.asarray(sample_ts, dtype=float)
    n = conn.dim
    m = len(curves)
    if conn.backing_parallelism is not None:
        par = conn.backing_parallelism
        pos0 = np.stack([c.positions(np.zeros(1))[0] for c in curves])
        pos_s = np.stack([c.positions(sample_ts) for c in curves])
        phi0 = par.phi(pos0)
        phis_s = par.phi(pos_s.reshape(-1, n)).reshape(m, sample_ts.size, n, n)
        phis = np.einsum("mtij,mjk->mtik", phis_s, np.linalg.inv(phi0))
        return phis, pos0, pos_s

    steps = max(1, int(round(t_end / step)))
    h = t_end / steps
    idx = np.rint(sample_ts / h).astype(int)
    if np.max(np.abs(idx * h - sample_ts)) > 1e-9:
        raise ValueError("sample times must be multiples of the step")
    A_all, pos = _coefficient_grid(conn, curves, t_end, steps)
    out = _rk4_matrix(A_all, h, set(idx.tolist()))
    phis = np.stack([np.stack([out[i][c] for i in idx]) for c in range(m)])
    pos0 = pos[:, 0]
    pos_s = pos[:, 2 * idx]
    return phis, pos0, pos_s


def parallel_transport(conn, curve, t=1.0, step=DEFAULT_STEP):
    """TransportOperator along `curve` from parameter 0 to t.

    Integrates at the requested step and at step/2; the finer run is the
    result and the max-entry difference is the Richardson error field.
    """
    if not 0.0 < t <= 1.0:
        raise ValueError("transport parameter must lie in (0, 1]")
    steps = max(1, int(round(t / step)))
    coarse, _, _ = transport_ensemble(conn, [curve], [t], step=t / steps, t_end=t)
    fine, _, _ = transport_ensemble(conn, [curve], [t], step=t / (2 * steps), t_end=t)
    err = float(np.max(np.abs(coarse[0, 0] - fine[0, 0])))
    return TransportOperator(curve.point(0.0), curve.point(t), fine[0, 0], err)


def matrix_ode_solve(A, t_end, step=DEFAULT_STEP):
    """RK4 solution of Phi' = A(t) Phi, Phi(0) = I, sampled at step multiples."""
    probe = np.asarray(A(0.0), dtype=float)
    n = probe.shape[0]
    steps = max(1, int(round(t_end / step)))
    h = t_end / steps
    phi = np.eye(n)
    samples = [(0.0, phi.copy())]
    for k in range(steps):
        t = k * h
        A1 = np.asarray(A(t), dtype=float)
        A2 = np.asarray(A(t + 0.5 * h), dtype=float)
        A4 = np.asarray(A(t + h), dtype=float)
        k1 = A1 @ phi
        k2 = A2 @ (phi + 0.5 * h * k1)
        k3 = A2 @ (phi + 0.5 * h * k2)
        k4 = A4 @ (phi + h * k3)
        phi = phi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(phi)):
            raise IntegrationBlowupError("matrix ODE blow-up", t=t + h)
        samples.append(((k + 1) * h, phi.copy()))
    return MatrixCurve(tuple(samples))


def phi_curve(parallelism, conn, curve, step=DEFAULT_STEP, samples=100):
    """The trivialized transport Phi(t) = phi(c(t))^-1 P_c^t phi(c(0)).

    For a parallelism-compatible pair this runs in the isometry group of
    the pushed-down norm; sampled at `samples` equispaced parameters.
    """
    ts = np.linspace(0.0, 1.0, samples + 1)
    ts = np.round(ts / step) * step
    ts[0] = 0.0
    ts = np.unique(ts)
    nonzero = ts[ts > 0]
    phis, pos0, pos_s = transport_ensemble(conn, [curve], nonzero, step=step)
    phi0 = parallelism.phi(pos0)[0]
    phi_t = parallelism.phi(pos_s[0])
    n = conn.dim
    mats = np.einsum("tij,tjk,kl->til", np.linalg.inv(phi_t), phis[0], phi0)
    out = [(0.0, np.eye(n))]
    out += [(float(t), mats[i]) for i, t in enumerate(nonzero)]
    return MatrixCurve(tuple(out))
