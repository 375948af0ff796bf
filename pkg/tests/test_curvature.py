import csv
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import bracket_quarter, brieskorn_gram, chart_curvature, cohom1_chart_curvature

from cohomone.curvature import (
    HomogeneousCurvature,
    MetricOperator,
    PlaneSpec,
    ambient_tensor,
    area2,
    closed_form_EF,
    closed_form_thm31,
    closed_form_XF1,
    curvature_trace,
    engine_XF1,
    homogeneous_curvature,
    integrate_rk4,
    metric_operator,
    orbit_plane_curvature,
    orbit_plane_sectional,
    parallel_transport,
    plane_AB,
    radial_curvature,
    radial_sectional,
    rational_rotation,
    thm31_w,
    thm31_w_expected,
    write_trace_csv,
)
from cohomone.diagram import bi_invariant_diagram, brieskorn_diagram, theorem31_diagram
from cohomone.errors import DegenerateMetricError, InputError
from cohomone.harmonic import harmonic_rep
from cohomone.liealg import basis_element
from cohomone.metricmodel import MetricJet, random_admissible
from cohomone.obstruction import random_block_profile
from cohomone.presets import preset_round, preset_stiefel
from cohomone.selfcheck import random_reduced_jet


def random_jet(rng, t=0.4):
    """Positive definite jet with all six functions generic."""
    f1, f2, h1, h2 = rng.uniform(0.4, 1.4, size=4)
    vals = dict(f1=f1, f2=f2, h1=h1, h2=h2, f12=rng.uniform(-0.5, 0.5) * f1 * f2,
                h12=rng.uniform(-0.5, 0.5) * h1 * h2)
    for k in list(vals):
        vals[k + "_d1"], vals[k + "_d2"] = rng.normal(size=2)
    return MetricJet.from_values(t=t, **vals)


seeds = st.integers(0, 2**32 - 1)


# -- metric operator --------------------------------------------------------------------


def test_identity_gram_for_unit_jet():
    M = metric_operator(brieskorn_diagram(4, 3), MetricJet.from_values())
    assert np.array_equal(M.G, np.eye(6))


def test_xy_block_determinant():
    D = brieskorn_diagram(4, 3)
    j = MetricJet.from_values(f1=0.6, f2=1.3, f12=0.2)
    M = metric_operator(D, j)
    ix, iy = D.index("X"), D.index("Y")
    block = M.G[np.ix_([ix, iy], [ix, iy])]
    assert np.linalg.det(block) == pytest.approx(0.6**2 * 1.3**2 - 0.2**2)


def test_derivative_entry_for_f1():
    D = brieskorn_diagram(4, 3)
    M = metric_operator(D, MetricJet.from_values(h2=0.7, h2_d1=-0.3))
    i = D.index("F1")
    assert M.G1[i, i] == pytest.approx(2 * 0.7 * -0.3)


def test_inverse_accuracy(rng):
    M = metric_operator(brieskorn_diagram(5, 3), random_jet(rng))
    assert M.inverse_residual() < 1e-12


def test_degenerate_metric_names_minor():
    D = brieskorn_diagram(4, 3)
    with pytest.raises(DegenerateMetricError, match="minor"):
        metric_operator(D, MetricJet.from_values(f1=1.0, f2=1.0, f12=1.0))


def test_asymmetric_gram_rejected():
    with pytest.raises(InputError):
        MetricOperator.from_gram([[1.0, 0.1], [0.0, 1.0]])


# -- homogeneous curvature ---------------------------------------------------------------


def test_bi_invariant_so3_value():
    D = bi_invariant_diagram(3)
    M = MetricOperator.from_gram(np.eye(3))
    a, b = D.unit("E1,2"), D.unit("E1,3")
    assert HomogeneousCurvature(D, M).sectional(a, b) == pytest.approx(0.25, abs=1e-15)


@given(st.sampled_from([3, 4]), seeds)
def test_bi_invariant_quarter_bracket(n, seed):
    rng = np.random.default_rng(seed)
    D = bi_invariant_diagram(n)
    x, y = rng.normal(size=(2, D.dim))
    want = bracket_quarter(D, x, y) / (x @ x * (y @ y) - (x @ y) ** 2)
    got = HomogeneousCurvature(D, MetricOperator.from_gram(np.eye(D.dim))).sectional(x, y)
    assert got == pytest.approx(want, rel=1e-10, abs=1e-14)


@pytest.mark.parametrize("n,seed", [(4, 0), (4, 1), (5, 2)])
def test_homogeneous_engine_matches_chart_oracle(n, seed):
    rng = np.random.default_rng(seed)
    D = brieskorn_diagram(n, 3)
    M = metric_operator(D, random_jet(rng))
    R = chart_curvature(D, M.G)
    hom = HomogeneousCurvature(D, M)
    eye = np.eye(D.dim)
    got = np.array([[[[hom.tensor(eye[i], eye[j], eye[k], eye[l]) for l in range(D.dim)] for k in range(D.dim)]
                     for j in range(D.dim)] for i in range(D.dim)])
    assert np.abs(got - R).max() < 1e-7 * max(1.0, np.abs(R).max())


@pytest.mark.parametrize("seed,ansatz", [(1, "general"), (2, "reduced"), (5, "general")])
def test_full_curvature_matches_cohomogeneity_one_chart(seed, ansatz):
    p = random_admissible(4, 3, seed, ansatz=ansatz)
    D = brieskorn_diagram(4, 3)
    t = 0.4 * p.L
    R = cohom1_chart_curvature(D, lambda s: brieskorn_gram(D, p, s), t)
    M = metric_operator(D, p.jet(t))
    hom = HomogeneousCurvature(D, M)
    eye = np.eye(D.dim)
    tol = 1e-7 * max(1.0, np.abs(R).max())
    for i in range(D.dim):
        for j in range(D.dim):
            assert radial_curvature(D, M, eye[i] + eye[j]) == pytest.approx(
                R[i + 1, 0, 0, i + 1] + R[j + 1, 0, 0, j + 1] + 2 * R[i + 1, 0, 0, j + 1], abs=tol)
            for k in range(D.dim):
                for l in range(D.dim):
                    val = ambient_tensor(D, M, eye[i], eye[j], eye[k], eye[l], hom)
                    assert val == pytest.approx(R[i + 1, j + 1, k + 1, l + 1], abs=tol)


@given(seeds)
def test_curvature_symmetries_and_bianchi(seed):
    rng = np.random.default_rng(seed)
    D = brieskorn_diagram(4, 3)
    M = metric_operator(D, random_jet(rng))
    hom = HomogeneousCurvature(D, M)
    a, b, c, d = rng.normal(size=(4, D.dim))
    R = hom.tensor
    scale = max(1.0, abs(R(a, b, c, d)))
    assert R(a, b, c, d) == pytest.approx(-R(b, a, c, d), abs=1e-10 * scale)
    assert R(a, b, c, d) == pytest.approx(-R(a, b, d, c), abs=1e-10 * scale)
    assert R(a, b, c, d) == pytest.approx(R(c, d, a, b), abs=1e-10 * scale)
    assert abs(R(a, b, c, d) + R(b, c, a, d) + R(c, a, b, d)) <= 1e-10 * scale
    # the Gauss correction keeps the same symmetries
    T = lambda *v: ambient_tensor(D, M, *v, hom)  # noqa: E731
    assert abs(T(a, b, c, d) + T(b, c, a, d) + T(c, a, b, d)) <= 1e-10 * scale
    assert T(a, b, c, d) == pytest.approx(T(c, d, a, b), abs=1e-10 * scale)


def test_homogeneous_curvature_function(rng):
    D = brieskorn_diagram(4, 3)
    M = metric_operator(D, random_jet(rng))
    a, b = rng.normal(size=(2, D.dim))
    assert homogeneous_curvature(D, M, a, b, b, a) == HomogeneousCurvature(D, M).tensor(a, b, b, a)


# -- orbit planes, sphere oracle ------------------------------------------------------------


def test_round_sphere_orbit_planes(rng):
    p = preset_round(4)
    D = brieskorn_diagram(4, 1)
    A, B = plane_AB(D)
    for t in np.linspace(0.05, 0.95, 7) * p.L:
        jet = p.jet(t)
        M = metric_operator(D, jet)
        assert orbit_plane_curvature(D, jet, A, B) == pytest.approx(area2(M, A, B), rel=1e-10)
        u, v = rng.normal(size=(2, D.dim))
        assert orbit_plane_sectional(D, jet, u, v) == pytest.approx(1.0, abs=1e-6)


def test_round_sphere_radial(rng):
    p = preset_round(5)
    D = brieskorn_diagram(5, 1)
    for t in np.linspace(0.05, 0.95, 9) * p.L:
        assert radial_sectional(D, p.jet(t), rng.normal(size=D.dim)) == pytest.approx(1.0, abs=1e-6)


def test_stiefel_catalog_nonnegative():
    p = preset_stiefel(4)
    D = brieskorn_diagram(4, 2)
    rows = curvature_trace(D, p, np.linspace(0.02, 0.98, 40) * p.L)
    assert min(r.sectional for r in rows) >= -1e-9


def test_flat_orbit_plane_when_delta_vanishes():
    D = brieskorn_diagram(4, 3)
    jet = MetricJet.from_values(f1=0.8, f2=1.2, f12=0.1)
    assert orbit_plane_curvature(D, jet, *plane_AB(D)) == pytest.approx(0.0, abs=1e-14)


def test_dependent_plane_rejected():
    D = brieskorn_diagram(4, 3)
    u = D.unit("X")
    with pytest.raises(InputError):
        orbit_plane_sectional(D, MetricJet.from_values(), u, 2 * u)


# -- closed forms ---------------------------------------------------------------------------------


def test_printed_ef_example():
    jet = MetricJet.from_values(f1=0.3, f2=1.1, f12=0.05, h2=0.8, h2_d1=-0.2)
    assert closed_form_EF(jet, "printed") == pytest.approx(0.7631, abs=5e-5)


def test_ef_vanishes_at_delta_zero():
    jet = MetricJet.from_values(f1=0.3, f2=1.1, f12=0.05)
    assert closed_form_EF(jet, "printed") == 0.0
    assert closed_form_EF(jet, "corrected") == 0.0


def test_printed_xf1_at_delta_zero():
    f1, f2 = 0.7, 1.3
    R = closed_form_XF1(MetricJet.from_values(f1=f1, f2=f2), "printed")
    assert R[0, 0] == pytest.approx(f1**4 / 8)
    assert R[1, 1] == pytest.approx(f2**4 / 8)
    assert R[0, 1] == pytest.approx(f1**2 * f2**2 / 8)
    assert np.linalg.det(R) == pytest.approx(0.0, abs=1e-15)


@given(seeds)
def test_engine_matches_corrected_closed_forms(seed):
    rng = np.random.default_rng(seed)
    jet = random_reduced_jet(rng)
    D = brieskorn_diagram(int(rng.integers(4, 7)), int(rng.integers(3, 6)))
    A, B = plane_AB(D)
    want = closed_form_EF(jet, "corrected")
    assert orbit_plane_curvature(D, jet, A, B) == pytest.approx(want, rel=1e-8, abs=1e-12)
    np.testing.assert_allclose(engine_XF1(D, jet), closed_form_XF1(jet, "corrected"), rtol=1e-8, atol=1e-12)


def test_printed_and_corrected_differ_only_by_f12_sign():
    rng = np.random.default_rng(3)
    jet = random_reduced_jet(rng)
    flip = MetricJet(jet.t, {**jet.v, "f12": -jet.v["f12"]}, {**jet.d1, "f12": -jet.d1["f12"]}, jet.d2)
    R = closed_form_XF1(flip, "printed")
    R[0, 1] = R[1, 0] = -R[0, 1]
    np.testing.assert_allclose(R, closed_form_XF1(jet, "corrected"), rtol=1e-14)


def test_plane_ab_commute():
    D = brieskorn_diagram(5, 3)
    A, B = plane_AB(D)
    assert np.abs(D.structure.c.T @ B @ A).max() == 0.0 or np.allclose(np.einsum("i,j,ijk->k", A, B, D.structure.c), 0)


def test_closed_forms_reject_bad_variant():
    with pytest.raises(InputError):
        closed_form_EF(MetricJet.from_values(), "linear")


# -- radial curvature -------------------------------------------------------------------------------


def test_radial_diagonal_block():
    D = brieskorn_diagram(4, 3)
    jet = MetricJet.from_values(h2=0.7, h2_d1=-0.4, h2_d2=-0.9)
    F = D.unit("F1")
    assert radial_curvature(D, jet, F) == pytest.approx(0.9 * 0.7)
    assert radial_sectional(D, jet, F) == pytest.approx(0.9 / 0.7)


def test_radial_linear_h2_is_flat():
    D = brieskorn_diagram(4, 3)
    jet = MetricJet.from_values(h2=0.7, h2_d1=-0.4)
    assert radial_curvature(D, jet, D.unit("F1")) == pytest.approx(0.0, abs=1e-15)


# -- transport --------------------------------------------------------------------------------------


@pytest.fixture(scope="module")
def general_profile():
    return random_admissible(4, 3, 4, ansatz="general")


def test_transport_preserves_norm(general_profile):
    p, D = general_profile, brieskorn_diagram(4, 3)
    v = np.random.default_rng(0).normal(size=D.dim)
    t0, t1 = 0.1 * p.L, 0.9 * p.L
    w = parallel_transport(D, p, t0, t1, v)
    M0, M1 = metric_operator(D, p.jet(t0)), metric_operator(D, p.jet(t1))
    assert M1.norm(w) == pytest.approx(M0.norm(v), rel=1e-8)


def test_f1_over_h2_is_parallel():
    p, D = random_admissible(5, 3, 2), brieskorn_diagram(5, 3)
    t0, t1 = 0.2 * p.L, 0.8 * p.L
    F = D.unit("F1")
    w = parallel_transport(D, p, t0, t1, F / p.curves["h2"](t0))
    np.testing.assert_allclose(w, F / p.curves["h2"](t1), atol=1e-9)


def test_transport_keeps_m1_plus_m2(general_profile):
    p, D = general_profile, brieskorn_diagram(4, 3)
    v = D.vector(E1=0.3, F1=-1.2, E2=0.5)
    w = parallel_transport(D, p, 0.15 * p.L, 0.85 * p.L, v)
    assert abs(w[D.index("X")]) < 1e-12 and abs(w[D.index("Y")]) < 1e-12


def test_transport_holonomy_is_trivial(general_profile):
    p, D = general_profile, brieskorn_diagram(4, 3)
    v = np.random.default_rng(1).normal(size=D.dim)
    w, info = parallel_transport(D, p, 0.1 * p.L, 0.9 * p.L, v, return_info=True)
    back = parallel_transport(D, p, 0.9 * p.L, 0.1 * p.L, w)
    np.testing.assert_allclose(back, v, atol=1e-9)
    assert info.error_estimate <= 1e-9


def test_transport_interval_checked(general_profile):
    with pytest.raises(InputError):
        parallel_transport(brieskorn_diagram(4, 3), general_profile, 0.0, 0.5, np.ones(6))


def test_rk4_exponential():
    y, info = integrate_rk4(lambda t, y: -y, 0.0, 1.0, np.array([1.0]), tol=1e-12)
    assert y[0] == pytest.approx(math.exp(-1), rel=1e-11)


# -- w bracket identity ---------------------------------------------------------------------------------


@pytest.mark.parametrize("k", [5, 7, 9])
def test_w_identity_identity_rotation(k):
    a = np.eye(k - 1, dtype=int).astype(object)
    w = thm31_w(a, k, k + 2)
    assert w == basis_element(k - 1, k, k + 2).scale(2)


@pytest.mark.parametrize("k", [5, 7, 9])
def test_w_identity_rational_rotations(k):
    rng = np.random.default_rng(k)
    for _ in range(10):
        a = rational_rotation(k - 1, rng)
        assert (a.T @ a == np.eye(k - 1, dtype=int)).all()
        w = thm31_w(a, k, k + 2)
        assert w.exact
        assert w == thm31_w_expected(a, k, k + 2)


def test_w_needs_room():
    with pytest.raises(InputError):
        thm31_w(np.eye(4, dtype=int).astype(object), 5, 6)


def test_w_bound_at_delta_zero():
    D = theorem31_diagram(harmonic_rep(3, 2), 7)
    block = random_block_profile(0)
    M = block.operator(D, 0.3)
    a = np.eye(4, dtype=int).astype(object)
    assert closed_form_thm31(D, M, 0.0, 0.6, a) == pytest.approx(-0.25 * 0.36)


def test_w_bound_matches_engine():
    D = theorem31_diagram(harmonic_rep(3, 2), 7)
    block = random_block_profile(2)
    t = 0.3 * block.L
    M = block.operator(D, t)
    a = rational_rotation(4, np.random.default_rng(0))
    af = np.asarray(a, dtype=float)
    full = np.eye(7)
    full[:4, :4] = af
    ad = lambda z: full @ np.asarray(z.mat_part, dtype=float) @ full.T  # noqa: E731
    from cohomone.liealg import AlgElement

    X1 = AlgElement.from_matrix(ad(basis_element(4, 6, 7)), exact=False)
    X2 = AlgElement.from_matrix(ad(basis_element(4, 7, 7)), exact=False)
    Y1, Y2 = basis_element(5, 6, 7, exact=False), basis_element(5, 7, 7, exact=False)
    A, B = D.coords(X1 + Y2), D.coords(X2 + Y1)
    h, hp = block.h.jet(t)[:2]
    want = closed_form_thm31(D, M, 1 - h * h, -2 * h * hp, a)
    # both sides are unnormalized; the plane has area (1 + h^2)^2 in g_t
    assert orbit_plane_curvature(D, M, A, B) == pytest.approx(want, rel=1e-9, abs=1e-12)
    assert area2(M, A, B) == pytest.approx((1 + h * h) ** 2, rel=1e-12)


# -- planes and traces --------------------------------------------------------------------------------------


def test_plane_spec_validation():
    with pytest.raises(InputError):
        PlaneSpec(0.1, (1.0,), (0.0,), radial=True)
    with pytest.raises(InputError):
        PlaneSpec(0.1, (1.0,))


def test_plane_spec_roundtrip_and_sphere_value():
    p, D = preset_round(4), brieskorn_diagram(4, 1)
    spec = PlaneSpec(0.3 * p.L, tuple(D.unit("X")), tuple(D.unit("E1")), name="X,E1")
    assert PlaneSpec.from_dict(spec.to_dict()) == spec
    assert spec.sectional(D, p) == pytest.approx(1.0, abs=1e-9)
    rad = PlaneSpec(0.3 * p.L, tuple(D.unit("Y")), radial=True)
    assert rad.sectional(D, p) == pytest.approx(1.0, abs=1e-9)


def test_trace_csv(tmp_path):
    p, D = random_admissible(4, 3, 0), brieskorn_diagram(4, 3)
    rows = curvature_trace(D, p, np.linspace(0.1, 0.9, 5) * p.L)
    path = tmp_path / "trace.csv"
    write_trace_csv(rows, path)
    with open(path) as fh:
        table = list(csv.reader(fh))
    assert table[0] == ["t", "plane-id", "sectional-curvature", "residual-vs-closed-form"]
    assert len(table) == 1 + 4 * 5
    residuals = [float(r[3]) for r in table[1:] if r[3]]
    assert max(residuals) < 1e-10
