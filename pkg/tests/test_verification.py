"""Check runners, obstruction, uniqueness and verdicts."""

import numpy as np
import pytest

from holopar.connections import Connection, constant_christoffels, zero_christoffels
from holopar.constructions import connection_from_covering_parallelism
from holopar.errors import PreconditionError
from holopar.fixtures import rescaling_connection, section5_frame
from holopar.geometry import Box, coordinate_frame, point
from holopar.parallelism import CoveringParallelism, frame_parallelism, translation_parallelism
from holopar import report
from holopar.verification import (CheckReport, CurveGenerator, VerdictResult,
                                  berwald_obstruction, check_compalg_criterion,
                                  check_holonomy_invariance,
                                  check_parallelism_compat, check_uniqueness,
                                  generalized_berwald_verdict)

WORK = Box((-4.0, -4.0), (4.0, 4.0))


# ---------------------------------------------------------- invariance

def test_section5_invariance_passes(s5):
    gen = CurveGenerator(s5.domain.shrink(0.05), seed=1, count=20)
    rep = check_holonomy_invariance(s5.norm_field, s5.connection, gen,
                                    tol=1e-6, step=1e-3)
    assert rep.passed
    assert rep.samples == 20 * 10 * 20
    assert "value_ratio" in rep.witness


def test_flat_invariance_is_exact(flat2):
    gen = CurveGenerator(flat2.domain.shrink(0.05), seed=2, count=10)
    rep = check_holonomy_invariance(flat2.norm_field, flat2.connection, gen,
                                    tol=1e-6, step=1e-3)
    assert rep.passed and rep.max_abs_error <= 1e-12


def test_rescaling_connection_fails_invariance():
    from holopar.norms import constant_norm_field, euclidean_norm
    F = constant_norm_field(euclidean_norm(2))
    conn = rescaling_connection()
    gen = CurveGenerator(WORK.shrink(0.05), seed=3, count=10)
    rep = check_holonomy_invariance(F, conn, gen, tol=1e-6, step=1e-3)
    assert not rep.passed


# ---------------------------------------------------------- compat

def test_section5_compat_passes(s5):
    rep = check_parallelism_compat(s5.norm_field, s5.parallelism, pairs=200, tol=1e-9)
    assert rep.passed


def test_compat_at_coincident_points_is_trivial(s5):
    pairs = [((0.4, 0.4), (0.4, 0.4)), ((-2.0, 1.0), (-2.0, 1.0))]
    rep = check_parallelism_compat(s5.norm_field, s5.parallelism, pairs=pairs, tol=1e-12)
    assert rep.passed and rep.max_abs_error <= 1e-14


def test_scaled_field_fails_compat_with_witness(scaled):
    rep = check_parallelism_compat(scaled.norm_field, scaled.parallelism,
                                   pairs=[((0.0, 0.0), (1.0, 0.0))], tol=1e-9)
    assert not rep.passed
    assert rep.witness["value_ratio"] == pytest.approx(np.e, abs=1e-9)


# ---------------------------------------------------------- compalg

def test_section5_compalg_passes(s5):
    rep = check_compalg_criterion(s5.norm_field, s5.parallelism, s5.connection,
                                  samples=50, tol=1e-8)
    assert rep.passed and rep.max_abs_error <= 1e-10


def test_compalg_rejects_perturbed_connection(s5):
    gamma = np.zeros((2, 2, 2))
    gamma[0, 0, 0] = 1.0
    bad = Connection(s5.frame, constant_christoffels(gamma))
    rep = check_compalg_criterion(s5.norm_field, s5.parallelism, bad,
                                  samples=50, tol=1e-8)
    assert not rep.passed


# ---------------------------------------------------------- obstruction

def test_section5_obstruction_is_one(s5):
    assert berwald_obstruction(s5.connection, s5.domain) == pytest.approx(1.0, abs=1e-9)


def test_flat_obstruction_is_zero(flat2):
    assert berwald_obstruction(flat2.connection, flat2.domain) == 0.0


def test_blend_obstruction_is_positive(blend):
    assert berwald_obstruction(blend.connection, blend.domain) > 1e-3


# ---------------------------------------------------------- uniqueness

def test_uniqueness_of_connection_with_itself(s5):
    gen = CurveGenerator(s5.domain.shrink(0.05), seed=4, count=10)
    rep = check_uniqueness(s5.norm_field, s5.connection, s5.connection, gen, tol=1e-6)
    assert rep.passed and rep.max_abs_error == 0.0


def test_uniqueness_against_synthesized_connection(s5):
    cover = CoveringParallelism.build([(s5.domain, s5.parallelism)], WORK)
    synth = connection_from_covering_parallelism(cover)
    gen = CurveGenerator(WORK.shrink(0.05), seed=5, count=10)
    rep = check_uniqueness(s5.norm_field, s5.connection, synth, gen, tol=1e-6)
    assert rep.passed


def test_uniqueness_refuses_continuous_isometry_group(flat2, blend):
    gen = CurveGenerator(Box((-3.0, -3.0), (3.0, 3.0)).shrink(0.05), seed=6, count=5)
    with pytest.raises(PreconditionError, match="continuous"):
        check_uniqueness(flat2.norm_field, flat2.connection, blend.connection, gen)


def test_uniqueness_refuses_non_invariant_connection(s5):
    gen = CurveGenerator(WORK.shrink(0.05), seed=7, count=5)
    with pytest.raises(PreconditionError, match="not holonomy invariant"):
        check_uniqueness(s5.norm_field, s5.connection, rescaling_connection(), gen)


# ---------------------------------------------------------- verdicts

def test_section5_verdict_certified_not_berwald(s5):
    res = generalized_berwald_verdict(
        s5.norm_field, CoveringParallelism.build([(s5.domain, s5.parallelism)], WORK),
        curves=10, compat_pairs=50)
    assert isinstance(res, VerdictResult)
    assert res.verdict == "generalized Berwald (certified)"
    assert res.torsion_obstruction == pytest.approx(1.0, abs=1e-9)
    assert "not Berwald" in res.note


def test_section5_verdict_from_connection(s5):
    res = generalized_berwald_verdict(s5.norm_field, s5.connection, domain=WORK,
                                      curves=10, compat_pairs=50)
    assert res.verdict == "generalized Berwald (certified)"


def test_euclidean_verdict_certified_torsion_free(flat2):
    cover = CoveringParallelism.build([(flat2.domain, flat2.parallelism)], WORK)
    res = generalized_berwald_verdict(flat2.norm_field, cover,
                                      curves=10, compat_pairs=50)
    assert res.verdict == "generalized Berwald (certified)"
    assert res.torsion_obstruction <= 1e-9
    assert "torsion-free" in res.note


def test_scaled_verdict_not_certified(scaled):
    cover = CoveringParallelism.build([(scaled.domain, scaled.parallelism)],
                                      Box((-2.0, -2.0), (2.0, 2.0)))
    res = generalized_berwald_verdict(scaled.norm_field, cover,
                                      curves=5, compat_pairs=50)
    assert res.verdict == "not certified"
    assert any(not r.passed for r in res.reports)


# ---------------------------------------------------------- plumbing

def test_invariance_compat_equivalence_both_directions(s5):
    # invariant connection -> compatible built parallelism, and compatible
    # cover -> invariant synthesized connection, both at 1e-6
    from holopar.constructions import ConvexChartRegion, parallelism_from_connection
    region = ConvexChartRegion(point(0.0, 0.0), WORK)
    built = parallelism_from_connection(s5.connection, region, step=1e-3)
    assert check_parallelism_compat(s5.norm_field, built, pairs=50, tol=1e-6).passed
    cover = CoveringParallelism.build([(s5.domain, s5.parallelism)], WORK)
    synth = connection_from_covering_parallelism(cover)
    gen = CurveGenerator(WORK.shrink(0.05), seed=8, count=10)
    assert check_holonomy_invariance(s5.norm_field, synth, gen, tol=1e-6).passed


def test_reports_are_deterministic(s5):
    gen = CurveGenerator(s5.domain.shrink(0.05), seed=9, count=5)
    a = check_holonomy_invariance(s5.norm_field, s5.connection, gen)
    b = check_holonomy_invariance(s5.norm_field, s5.connection, gen)
    assert report.dumps(a.to_dict()) == report.dumps(b.to_dict())


def test_report_pass_flag_is_consistent():
    with pytest.raises(AssertionError):
        CheckReport("x", 1, 0.0, 2.0, 1.0, True)
    rep = CheckReport("x", 1, 0.0, 0.5, 1.0, True)
    d = rep.to_dict()
    assert d["pass"] is True and d["check"] == "x"


def test_curve_generator_is_deterministic_and_regular():
    gen = CurveGenerator(WORK.shrink(0.1), seed=10, count=12)
    a = gen.curves()
    b = gen.curves()
    assert len(a) == 12
    for ca, cb in zip(a, b):
        assert ca.params == cb.params
        ca.validate()
