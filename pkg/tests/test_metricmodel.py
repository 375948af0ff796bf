import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cohomone.curves import HermiteCurve, PolyCurve, constant, curve_from_dict, sample_hermite
from cohomone.errors import DegenerateMetricError, InputError
from cohomone.metricmodel import (
    FUNCTIONS,
    MetricJet,
    MetricProfile,
    ProfileFormatError,
    load_profile,
    normalize,
    profile_from_dict,
    random_admissible,
    save_profile,
    smoothness_check,
    solve_t0,
)
from cohomone.presets import preset_round, preset_stiefel


def simple_profile(h1_0=1.0, L=1.0, h2_end=0.0, d=3):
    """Polynomial profile with prescribed h1(0) and h2(L)."""
    s = math.sqrt(2) / d
    curves = {
        "f1": PolyCurve([0.0, s, 0.2]),
        "f2": constant(1.0),
        "f12": constant(0.0),
        "h1": constant(h1_0),
        "h2": PolyCurve([h1_0, 0.0, (h2_end - h1_0) / L**2]),
        "h12": constant(0.0),
    }
    return MetricProfile(n=4, d=d, L=L, curves=curves, reduced=True)


# -- jets and curves -------------------------------------------------------------


def test_jet_defaults():
    j = MetricJet.from_values(f1=0.3, h2_d1=-0.2)
    assert j.v["f1"] == 0.3 and j.v["h1"] == 1.0 and j.v["f12"] == 0.0
    assert j.d1["h2"] == -0.2


def test_jet_rejects_unknown_keys():
    with pytest.raises(InputError):
        MetricJet.from_values(f3=1.0)


@pytest.mark.parametrize("kind", ["poly", "spline", "round"])
def test_jets_match_finite_differences(kind):
    if kind == "poly":
        p = random_admissible(4, 3, 2)
    elif kind == "spline":
        q = random_admissible(4, 3, 2)
        curves = {k: sample_hermite(c, (0.0, q.L), 201) for k, c in q.curves.items()}
        p = MetricProfile(4, 3, q.L, curves, reduced=True)
    else:
        p = preset_round(4)
    h = 1e-4
    for t in np.linspace(0.2, 0.8, 5) * p.L:
        for name in FUNCTIONS:
            v, d1, d2 = p.curves[name].jet(t)
            vp, vm = p.curves[name](t + h), p.curves[name](t - h)
            assert (vp - vm) / (2 * h) == pytest.approx(d1, abs=1e-6)
            assert (vp - 2 * v + vm) / h**2 == pytest.approx(d2, abs=1e-4)


def test_curve_dict_roundtrip_is_bit_stable():
    c = HermiteCurve([0.0, 0.5, 1.0], [0.1, 0.3, 0.7], [1.0, 0.2, -0.1])
    doc = c.to_dict()
    again = curve_from_dict(json.loads(json.dumps(doc))).to_dict()
    assert again == doc


def test_curve_dict_validation():
    with pytest.raises(ValueError):
        curve_from_dict({"type": "spline", "knots": [0, 1], "values": [1]})
    with pytest.raises(ValueError):
        curve_from_dict({"type": "bezier"})


# -- smoothness --------------------------------------------------------------------


def test_slope_target_d3():
    rep = smoothness_check(random_admissible(4, 3, 0))
    assert rep.f1_slope_target == pytest.approx(0.4714, abs=1e-4)


def test_round_preset_passes_d1():
    rep = smoothness_check(preset_round(4), tol=1e-8)
    assert rep.passed and rep.d == 1


def test_stiefel_preset_passes_d2():
    p = preset_stiefel(4)
    rep = smoothness_check(p, tol=1e-8)
    assert rep.passed and rep.d == 2
    assert abs(p.jet(p.L).v["h2"]) <= 1e-8


def test_h2_at_L_residual():
    rep = smoothness_check(simple_profile(h2_end=0.1))
    c = rep.clause("h2(L)=0")
    assert not c.passed and c.residual == pytest.approx(0.1, abs=1e-12)
    assert not rep.passed


def test_positive_definiteness_reported():
    p = simple_profile()
    curves = dict(p.curves)
    curves["f12"] = constant(5.0)
    rep = smoothness_check(MetricProfile(4, 3, 1.0, curves))
    assert not rep.positive_definite and not rep.passed


def test_presets_bounded_by_two():
    for p in (preset_round(4), preset_stiefel(5)):
        for name in FUNCTIONS:
            vals = p.values(name, p.grid(400))[0]
            assert np.abs(vals).max() <= 2.0


def test_presets_positive_definite():
    for p in (preset_round(5), preset_stiefel(4)):
        assert p.positive_definite_on(p.grid(1002)[1:-1])[0]


# -- normalize --------------------------------------------------------------------


def test_normalize_halves_domain():
    q = normalize(simple_profile(h1_0=2.0, L=1.0, h2_end=0.0))
    assert q.L == pytest.approx(0.5)
    assert q.jet(0.0).v["h1"] == pytest.approx(1.0)
    assert q.is_normalized


def test_normalize_identity_when_already_normalized():
    p = simple_profile()
    assert normalize(p) is p


@given(st.floats(0.2, 5.0))
def test_normalize_keeps_f1_slope_and_is_idempotent(h10):
    p = simple_profile(h1_0=h10)
    q = normalize(p)
    assert q.jet(0.0).d1["f1"] == pytest.approx(p.jet(0.0).d1["f1"], rel=1e-12)
    assert normalize(q).jet(0.0).v["h1"] == pytest.approx(1.0, rel=1e-14)


def test_normalize_rejects_degenerate():
    with pytest.raises(DegenerateMetricError):
        normalize(simple_profile(h1_0=0.0))


# -- random profiles -------------------------------------------------------------


@given(st.integers(4, 6), st.integers(3, 5), st.integers(0, 10_000))
def test_random_admissible_passes_smoothness(n, d, seed):
    p = random_admissible(n, d, seed)
    rep = smoothness_check(p)
    assert rep.passed, [c for c in rep.clauses if not c.passed]
    assert p.positive_definite_on(p.grid(1000))[0] or p.positive_definite_on(p.grid(1002)[1:-1])[0]


def test_random_admissible_4_3_1():
    assert smoothness_check(random_admissible(4, 3, 1)).passed


def test_random_admissible_deterministic():
    a, b = random_admissible(5, 3, 9), random_admissible(5, 3, 9)
    assert a.to_json() == b.to_json()


def test_random_admissible_slope_exact():
    assert random_admissible(5, 4, 7).jet(0.0).d1["f1"] == math.sqrt(2) / 4


def test_general_ansatz_is_admissible():
    p = random_admissible(4, 3, 3, ansatz="general")
    assert smoothness_check(p).passed and not p.reduced


def test_random_admissible_rejects_small_d():
    with pytest.raises(InputError):
        random_admissible(4, 2, 0)


# -- files -------------------------------------------------------------------------


def test_profile_file_roundtrip(tmp_path):
    p = random_admissible(4, 3, 5)
    path = tmp_path / "p.json"
    save_profile(p, path)
    q = load_profile(path)
    assert q.to_json() == p.to_json()
    save_profile(q, tmp_path / "q.json")
    assert (tmp_path / "q.json").read_text() == path.read_text()


def test_preset_file_roundtrip_keeps_smoothness(tmp_path):
    path = tmp_path / "round.json"
    save_profile(preset_round(4), path)
    assert smoothness_check(load_profile(path), tol=1e-8).passed


def test_malformed_json_reports_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"n": 4,\n "d": }')
    with pytest.raises(ProfileFormatError, match="line 2"):
        load_profile(path)


def test_missing_function_reports_field():
    doc = json.loads(random_admissible(4, 3, 0).to_json())
    del doc["functions"]["h12"]
    with pytest.raises(ProfileFormatError, match="functions.h12"):
        profile_from_dict(doc)


@pytest.mark.parametrize("d,t0", [(2, math.sqrt(0.5)), (4, math.sqrt((math.sqrt(5) - 1) / 2))])
def test_solve_t0(d, t0):
    assert solve_t0(d) == pytest.approx(t0, abs=1e-13)
