"""Numerical certification of the compatibility notions.

Every check returns a CheckReport: sample counts, worst absolute and
relative errors, the tolerance, a pass flag and a worst-case witness.
Reports are deterministic functions of (seed, inputs) and serialize to
the CLI's JSON schema.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .connections import nabla_P, torsion
from .constructions import (ConvexChartRegion, covering_from_connection,
                            connection_from_covering_parallelism,
                            parallelism_from_connection)
from .errors import PreconditionError
from .geometry import Box, ChartPoint, Curve, TangentVector, segment
from .jets import jcos, jsin
from .norms import ContinuousFamily, isometry_group_2x2, lie_algebra_member, unit_sphere
from .parallelism import CoveringParallelism, Parallelism
from .transport import DEFAULT_STEP, transport_ensemble

REL_FLOOR = 1e-12
DEFAULT_TS = tuple(np.round(np.linspace(0.1, 1.0, 10), 10))


@dataclass(frozen=True)
class CheckReport:
    check: str
    samples: int
    max_abs_error: float
    max_rel_error: float
    tolerance: float
    passed: bool
    witness: dict = field(default_factory=dict)
    seed: int = 0
    step: float = 0.0

    def __post_init__(self):
        # the pass flag is definitionally max_rel_error <= tolerance
        assert self.passed == (self.max_rel_error <= self.tolerance)

    def to_dict(self):
        return {
            "check": self.check,
            "samples": int(self.samples),
            "max_abs_error": float(self.max_abs_error),
            "max_rel_error": float(self.max_rel_error),
            "tolerance": float(self.tolerance),
            "pass": bool(self.passed),
            "witness": self.witness,
            "seed": int(self.seed),
            "step": float(self.step),
        }


def _report(name, samples, max_abs, max_rel, tol, witness, seed=0, step=0.0):
    return CheckReport(name, samples, float(max_abs), float(max_rel), float(tol),
                       bool(max_rel <= tol), witness, seed, step)


@dataclass(frozen=True)
class CurveGenerator:
    """Deterministic family of regular curves inside a box."""

    domain: Box
    seed: int = 42
    count: int = 100
    families: tuple = ("segment", "circle", "sine", "bezier")

    def curves(self):
        rng = np.random.default_rng(self.seed)
        inner = self.domain.shrink(0.1)
        out = []
        i = 0
        while len(out) < self.count:
            family = self.families[i % len(self.families)]
            curve = self._make(family, rng, inner)
            i += 1
            try:
                out.append(curve.validate())
            except Exception:
                continue
        return out

    def _make(self, family, rng, box):
        n = box.dim
        lo = np.asarray(box.lo, dtype=float)
        hi = np.asarray(box.hi, dtype=float)
        side = hi - lo
        if family == "segment":
            p0, p1 = box.sample(rng, 2)
            if np.linalg.norm(p1 - p0) < 1e-3:
                p1 = p0 + 0.1 * side
            return segment(p0, p1, domain=self.domain)
        if family == "circle":
            margin = 0.25 * float(np.min(side))
            c = [float(v) for v in box.shrink(0.25).sample(rng, 1)[0]]
            r = float(rng.uniform(0.2, 0.95) * margin)
            th0 = float(rng.uniform(0.0, 2.0 * np.pi))
            dth = float(rng.uniform(0.5 * np.pi, 2.0 * np.pi))
            axes = rng.permutation(n)[:2]

            def coords_fn(t, c=c, r=r, th0=th0, dth=dth, a0=int(axes[0]), a1=int(axes[1])):
                cs = [c[d] for d in range(n)]
                cs[a0] = c[a0] + r * jcos(th0 + dth * t)
                cs[a1] = c[a1] + r * jsin(th0 + dth * t)
                return cs

            return Curve(coords_fn, domain=self.domain,
                         params={"family": "circle", "center": c, "radius": r,
                                 "theta0": th0, "dtheta": dth})
        if family == "sine":
            p0, p1 = box.shrink(0.15).sample(rng, 2)
            d = p1 - p0
            if np.linalg.norm(d) < 1e-3:
                d = 0.1 * side
            perp = rng.normal(size=n)
            perp -= perp @ d / (d @ d) * d
            nrm = np.linalg.norm(perp)
            perp = perp / nrm if nrm > 1e-12 else np.zeros(n)
            amp = float(rng.uniform(0.02, 0.1) * np.min(side))
            omega = float(rng.uniform(1.0, 3.0) * np.pi)
            p0l = [float(v) for v in p0]
            dl = [float(v) for v in d]
            pl = [float(v) for v in amp * perp]

            def coords_fn(t, p0l=p0l, dl=dl, pl=pl, omega=omega):
                s = jsin(omega * t)
                return [p0l[i] + dl[i] * t + pl[i] * s for i in range(n)]

            return Curve(coords_fn, domain=self.domain,
                         params={"family": "sine", "p0": p0l, "d": dl,
                                 "perp": pl, "omega": omega})
        if family == "bezier":
            ctrl = box.shrink(0.1).sample(rng, 4)
            c0, c1, c2, c3 = ([float(v) for v in row] for row in ctrl)

            def coords_fn(t, c0=c0, c1=c1, c2=c2, c3=c3):
                u = 1.0 - t
                return [u * u * u * c0[i] + 3.0 * u * u * t * c1[i]
                        + 3.0 * u * t * t * c2[i] + t * t * t * c3[i]
                        for i in range(n)]

            return Curve(coords_fn, domain=self.domain,
                         params={"family": "bezier",
                                 "ctrl": [c0, c1, c2, c3]})
        raise ValueError(f"unknown curve family {family!r}")


def _resolve_curves(gen_or_curves):
    if isinstance(gen_or_curves, CurveGenerator):
        return gen_or_curves.curves(), gen_or_curves.seed
    return list(gen_or_curves), 0


def check_holonomy_invariance(norm_field, conn, gen, tol=1e-6, step=DEFAULT_STEP,
                              vectors=20, ts=DEFAULT_TS, seed=None,
                              name="holonomy_invariance"):
    """Max relative |F(P_c^t v) - F(v)| / max(F(v), eps) over generated
    curves, t-samples and random unit vectors."""
    curves, gseed = _resolve_curves(gen)
    seed = gseed if seed is None else seed
    n = conn.dim
    ts = np.asarray(ts, dtype=float)
    phis, pos0, pos_s = transport_ensemble(conn, curves, ts, step=step)
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(len(curves), vectors, n))
    v /= np.linalg.norm(v, axis=2, keepdims=True)

    f0 = norm_field(pos0[:, None, :], v)                              # (m, V)
    pv = np.einsum("mtij,mvj->mtvi", phis, v)                         # (m, T, V, n)
    ft = norm_field(np.broadcast_to(pos_s[:, :, None, :], pv.shape), pv)
    abs_err = np.abs(ft - f0[:, None, :])
    rel_err = abs_err / np.maximum(np.abs(f0[:, None, :]), REL_FLOOR)
    worst = np.unravel_index(np.argmax(rel_err), rel_err.shape)
    ci, tig, vi = worst
    witness = {
        "curve": curves[ci].params,
        "t": float(ts[tig]),
        "vector": v[ci, vi].tolist(),
        "F_before": float(f0[ci, vi]),
        "F_after": float(ft[ci, tig, vi]),
        "value_ratio": float(ft[ci, tig, vi] / f0[ci, vi]),
    }
    samples = int(rel_err.size)
    return _report(name, samples, np.max(abs_err), np.max(rel_err), tol,
                   witness, seed, step)


def check_parallelism_compat(norm_field, parallelism, pairs=200, vectors=20,
                             tol=1e-9, seed=42, name="parallelism_compat"):
    """F_q(P(p,q) v) must equal F_p(v) on sampled point pairs.

    `pairs` is a count (sampled in the parallelism's domain) or an
    explicit list of (p_coords, q_coords) pairs.
    """
    n = parallelism.dim
    if isinstance(pairs, int):
        rng = np.random.default_rng(seed)
        ps = parallelism.domain.sample(rng, pairs, margin=0.05)
        qs = parallelism.domain.sample(rng, pairs, margin=0.05)
    else:
        ps = np.asarray([p for p, _ in pairs], dtype=float)
        qs = np.asarray([q for _, q in pairs], dtype=float)
    count = ps.shape[0]
    v = unit_sphere(n, vectors)

    mats = parallelism.transfer(ps, qs)                               # (m, n, n)
    pv = np.einsum("mij,vj->mvi", mats, v)
    fp = norm_field(np.broadcast_to(ps[:, None, :], (count, vectors, n)),
                    np.broadcast_to(v, (count, vectors, n)))
    fq = norm_field(np.broadcast_to(qs[:, None, :], pv.shape), pv)
    abs_err = np.abs(fq - fp)
    rel_err = abs_err / np.maximum(np.abs(fp), REL_FLOOR)
    mi, vi = np.unravel_index(np.argmax(rel_err), rel_err.shape)
    witness = {
        "p": ps[mi].tolist(),
        "q": qs[mi].tolist(),
        "vector": v[vi].tolist(),
        "F_p": float(fp[mi, vi]),
        "F_q": float(fq[mi, vi]),
        "value_ratio": float(fq[mi, vi] / fp[mi, vi]),
    }
    return _report(name, int(rel_err.size), np.max(abs_err), np.max(rel_err),
                   tol, witness, seed)


def check_compalg_criterion(norm_field, parallelism, conn, samples=100,
                            tol=1e-8, seed=42, name="compalg_criterion"):
    """Infinitesimal criterion: (nabla P)_v lies in the Lie algebra of iso(F_p)."""
    n = parallelism.dim
    rng = np.random.default_rng(seed)
    pts = parallelism.domain.sample(rng, samples, margin=0.05)
    comps = rng.normal(size=(samples, n))
    worst = 0.0
    witness = {}
    for k in range(samples):
        p = ChartPoint(pts[k])
        v = TangentVector(p, comps[k])
        endo = nabla_P(conn, parallelism, v)
        ok, viol = lie_algebra_member(norm_field.at(p), endo.matrix, tol=tol)
        if viol > worst:
            worst = viol
            witness = {"p": pts[k].tolist(), "v": comps[k].tolist(),
                       "endomorphism": endo.matrix.tolist(), "violation": viol}
    return _report(name, samples, worst, worst, tol, witness, seed)


def berwald_obstruction(conn, domain, samples=50, seed=42):
    """Max coordinate sup-norm of the torsion over sampled points and
    frame field pairs; zero for (locally) Berwald-compatible derivatives."""
    rng = np.random.default_rng(seed)
    pts = domain.sample(rng, samples, margin=0.05)
    fields = conn.frame.fields
    worst = 0.0
    for k in range(samples):
        p = ChartPoint(pts[k])
        for i in range(len(fields)):
            for j in range(i + 1, len(fields)):
                t = torsion(conn, fields[i], fields[j], p)
                worst = max(worst, float(np.max(np.abs(t.components))))
    return worst


def check_uniqueness(norm_field, conn1, conn2, gen, tol=1e-6, step=DEFAULT_STEP,
                     ts=DEFAULT_TS, iso_discrete=None, name="uniqueness"):
    """Entrywise agreement of the two induced parallel translations.

    Preconditions (refused loudly, never silently skipped): both
    connections are individually holonomy invariant for F, and the
    isometry group of F at a sample point is discrete.
    """
    curves, seed = _resolve_curves(gen)
    for tag, conn in (("conn1", conn1), ("conn2", conn2)):
        rep = check_holonomy_invariance(norm_field, conn, curves, tol=tol,
                                        step=step, seed=seed)
        if not rep.passed:
            raise PreconditionError(
                f"{tag} is not holonomy invariant for F "
                f"(max rel err {rep.max_rel_error:.3e})")
    if iso_discrete is None:
        p0 = curves[0].point(0.0)
        group = isometry_group_2x2(norm_field.at(p0))
        iso_discrete = not isinstance(group, ContinuousFamily)
    if not iso_discrete:
        raise PreconditionError(
            "uniqueness is not applicable: iso(F_p) is a continuous family")

    ts = np.asarray(ts, dtype=float)
    phis1, _, _ = transport_ensemble(conn1, curves, ts, step=step)
    phis2, _, _ = transport_ensemble(conn2, curves, ts, step=step)
    diff = np.abs(phis1 - phis2)
    ci, tig = np.unravel_index(np.argmax(diff), diff.shape)[:2]
    witness = {"curve": curves[ci].params, "t": float(ts[tig])}
    worst = float(np.max(diff))
    return _report(name, int(diff.size), worst, worst, tol, witness, seed, step)


@dataclass(frozen=True)
class VerdictResult:
    verdict: str
    reports: tuple
    torsion_obstruction: float
    note: str


def generalized_berwald_verdict(norm_field, structure, domain=None,
                                tol=1e-6, step=DEFAULT_STEP, seed=42,
                                curves=30, compat_pairs=100):
    """Certify (or refuse to certify) the generalized Berwald property.

    Given a covering parallelism: member compatibility checks, then the
    synthesized connection's holonomy invariance. Given a connection:
    holonomy invariance, then per-region radial parallelisms and their
    compatibility checks (the connection-to-parallelism direction).
    """
    reports = []
    if isinstance(structure, CoveringParallelism):
        domain = domain or structure.region
        for idx, (box, par) in enumerate(structure.members):
            reports.append(check_parallelism_compat(
                norm_field, par, pairs=compat_pairs, tol=tol, seed=seed + idx,
                name=f"member_{idx}_compat"))
        conn = connection_from_covering_parallelism(structure)
        gen = CurveGenerator(domain.shrink(0.05), seed=seed, count=curves)
        reports.append(check_holonomy_invariance(norm_field, conn, gen,
                                                 tol=tol, step=step))
    else:
        conn = structure
        if domain is None:
            raise ValueError("a domain box is required with a connection input")
        gen = CurveGenerator(domain.shrink(0.05), seed=seed, count=curves)
        reports.append(check_holonomy_invariance(norm_field, conn, gen,
                                                 tol=tol, step=step))
        cover = covering_from_connection(conn, domain, step=step)
        for idx, (box, par) in enumerate(cover.members):
            reports.append(check_parallelism_compat(
                norm_field, par, pairs=compat_pairs, tol=tol, seed=seed + idx,
                name=f"region_{idx}_compat"))

    obstruction = berwald_obstruction(conn, domain, seed=seed)
    all_pass = all(r.passed for r in reports)
    verdict = "generalized Berwald (certified)" if all_pass else "not certified"
    if all_pass:
        note = ("not Berwald for this derivative (non-vanishing torsion)"
                if obstruction > 1e-9 else "torsion-free within tolerance")
    else:
        note = "compatibility failed; see reports"
    return VerdictResult(verdict, tuple(reports), obstruction, note)
