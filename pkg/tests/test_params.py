import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ellipticalou.params import (
    ComplexAR1Params,
    EllipticalParams,
    GeometricParams,
    ParameterError,
    eccentricity,
    proper_ar1_map,
    to_elliptical,
    to_geometric,
    wrap_orientation,
)

LEFT = EllipticalParams(0.02, 1.0, -0.5, -0.3, 2.0)
RIGHT = EllipticalParams(0.002, 0.5, 0.3, 0.3, 0.15)


def test_left_panel_geometry():
    g = to_geometric(LEFT)
    assert g.alpha == 0.02
    assert g.beta == pytest.approx(0.81240, abs=5e-6)
    assert g.rho == pytest.approx(0.71636, abs=5e-6)
    assert g.psi == pytest.approx(0.51519, abs=5e-6)
    assert g.a2 == pytest.approx(1.62481, abs=5e-6)


def test_left_panel_forward_map_recovers_inputs():
    # independent check: push the geometric values back through the left-column map
    back = to_elliptical(to_geometric(LEFT))
    for name in ("alpha1", "beta1", "alpha2", "beta2", "sigma2"):
        assert getattr(back, name) == pytest.approx(getattr(LEFT, name), rel=1e-10, abs=1e-14)


def test_right_panel_rho_is_fourth_root_formula():
    expected = ((0.5 - math.sqrt(0.18)) / (0.5 + math.sqrt(0.18))) ** 0.25
    assert to_geometric(RIGHT).rho == pytest.approx(expected, rel=1e-14)
    # the value is 0.535..., not 0.541 as sometimes quoted
    assert expected == pytest.approx(0.5350279558785596, rel=1e-14)


def test_redundant_r_reproduces_caption_values():
    r_left = to_elliptical(to_geometric(LEFT)).r
    r_right = to_elliptical(to_geometric(RIGHT)).r
    assert abs(r_left - (0.6 + 1j)) < 1e-12
    assert abs(r_right - (-0.09 - 0.09j)) < 1e-12


def test_circular_special_case_both_ways():
    g = to_geometric(EllipticalParams(0.3, -1.7, 0.0, 0.0, 4.0))
    assert (g.alpha, g.beta, g.rho, g.psi, g.a2) == (0.3, -1.7, 1.0, 0.0, 4.0)
    p = to_elliptical(GeometricParams(0.3, 2.0, 1.0, 0.7, 5.0))
    assert (p.alpha1, p.beta1, p.alpha2, p.beta2, p.sigma2, p.r) == (0.3, 2.0, 0.0, 0.0, 5.0, 0j)


@pytest.mark.parametrize(
    "bad, word",
    [
        (EllipticalParams(0.0, 1.0, 0.1, 0.1, 1.0), "alpha1"),
        (EllipticalParams(-0.1, 1.0, 0.1, 0.1, 1.0), "alpha1"),
        (EllipticalParams(0.1, 0.5, 0.4, 0.3, 1.0), "ellipse"),
        (EllipticalParams(0.1, 0.5, 0.3, 0.4, 1.0), "ellipse"),
    ],
)
def test_constraint_violations_name_the_constraint(bad, word):
    with pytest.raises(ParameterError, match=word):
        to_geometric(bad)


def test_beta1_zero_rejected():
    with pytest.raises(ParameterError):
        to_geometric(EllipticalParams(0.1, 0.0, 0.0, 0.0, 1.0))


@pytest.mark.parametrize("rho", [0.0, -0.2, 1.0000001])
def test_bad_rho_rejected(rho):
    with pytest.raises(ParameterError):
        to_elliptical(GeometricParams(0.1, 1.0, rho, 0.0, 1.0))


def test_sigma2_below_abs_r_rejected():
    with pytest.raises(ParameterError, match="sigma2"):
        EllipticalParams(0.1, 1.0, 0.2, 0.2, 1.0, r=2 + 0j).validate()


def test_eccentricity_values():
    assert eccentricity(EllipticalParams(0.1, 3.0, 0.0, 0.0, 1.0)) == 0.0
    assert eccentricity(LEFT) == pytest.approx(0.85828, abs=5e-6)
    assert eccentricity(LEFT) == pytest.approx(math.sqrt(1 - to_geometric(LEFT).rho ** 4), rel=1e-12)
    near_line = EllipticalParams(0.1, 1.0, 0.0, 1 - 1e-9, 1.0)
    assert eccentricity(near_line) > 0.9999


def test_eccentricity_monotone_in_coupling():
    radii = np.linspace(0, 0.99, 50)
    e = [eccentricity(EllipticalParams(0.1, 1.0, m * 0.6, m * 0.8, 1.0)) for m in radii]
    assert np.all(np.diff(e) >= 0)
    assert 0 <= min(e) and max(e) < 1


def test_wrap_puts_minus_half_pi_at_plus_half_pi():
    assert wrap_orientation(-math.pi / 2) == pytest.approx(math.pi / 2)
    assert wrap_orientation(math.pi / 2) == pytest.approx(math.pi / 2)
    assert wrap_orientation(0.3 + math.pi) == pytest.approx(0.3)


def test_json_round_trip_is_exact():
    p = to_elliptical(to_geometric(LEFT))
    q = EllipticalParams.from_dict(json.loads(json.dumps(p.to_dict())))
    assert q == p
    g = to_geometric(RIGHT)
    assert GeometricParams.from_dict(json.loads(json.dumps(g.to_dict()))) == g


def test_drift_matrix_matches_complex_form():
    p = LEFT
    z = 0.3 - 1.2j
    dz = (-p.alpha1 + 1j * p.beta1) * z + (-p.alpha2 + 1j * p.beta2) * np.conj(z)
    v = p.drift_matrix() @ [z.real, z.imag]
    assert v[0] == pytest.approx(dz.real) and v[1] == pytest.approx(dz.imag)


# --- AR(1) -------------------------------------------------------------------


def test_ar1_map_values():
    ar = proper_ar1_map(EllipticalParams(0.02, 1.0, 0.0, 0.0, 2.0), 1.0)
    assert ar.lam == pytest.approx(math.exp(-0.02), rel=1e-15)
    assert ar.lam == pytest.approx(0.98020, abs=5e-6)
    assert ar.sigma2_ar == pytest.approx(1.96053, abs=5e-6)
    assert ar.zeta == 1.0
    assert ar.coefficient == pytest.approx(math.exp(-0.02) * complex(math.cos(1), math.sin(1)))


def test_ar1_zero_damping_limit():
    ar = proper_ar1_map(EllipticalParams(0.0, 1.0, 0.0, 0.0, 2.0), 0.5)
    assert ar.lam == 1.0
    assert ar.sigma2_ar == 1.0


def test_ar1_small_delta_continuity():
    ar = proper_ar1_map(EllipticalParams(0.3, 1.0, 0.0, 0.0, 2.0), 1e-9)
    assert ar.lam == pytest.approx(1.0, abs=1e-8)
    assert ar.sigma2_ar == pytest.approx(2e-9, rel=1e-6)


def test_ar1_rejects_improper_input():
    with pytest.raises(ParameterError, match="proper"):
        proper_ar1_map(LEFT, 1.0)


def test_ar1_params_store_rotation_rate():
    ar = ComplexAR1Params(0.9, 2.0, 1.0, delta=0.25)
    assert ar.coefficient == pytest.approx(0.9 * complex(math.cos(0.5), math.sin(0.5)))


# --- properties --------------------------------------------------------------

geo = st.builds(
    GeometricParams,
    alpha=st.floats(1e-6, 1.0),
    beta=st.one_of(st.floats(-math.pi, -1e-3), st.floats(1e-3, math.pi)),
    rho=st.floats(0.05, 1.0),
    psi=st.floats(-math.pi / 2, math.pi / 2),
    a2=st.floats(1e-6, 10.0),
)


def _psi_close(a, b, tol):
    d = (a - b + math.pi / 2) % math.pi - math.pi / 2
    return abs(d) <= tol


@settings(max_examples=300, deadline=None)
@given(geo)
def test_round_trip_property(g):
    back = to_geometric(to_elliptical(g))
    assert back.alpha == g.alpha
    assert math.copysign(1, back.beta) == math.copysign(1, g.beta)
    for name in ("beta", "rho", "a2"):
        assert getattr(back, name) == pytest.approx(getattr(g, name), rel=1e-10)
    if g.rho < 1 - 1e-6:
        assert _psi_close(back.psi, g.psi, 1e-9)


@settings(max_examples=200, deadline=None)
@given(geo)
def test_consistency_after_to_elliptical(g):
    assert to_elliptical(g).is_consistent()
