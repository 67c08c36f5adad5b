"""Unit tests for the polynomial center-manifold graph and reduced flow."""

import numpy as np
import pytest

from solitonshoot.center_manifold import (
    VALIDITY_RADIUS,
    CenterPoly,
    biaxial_expansion_check,
    invariance_defect,
    reduced_flow,
    solve_center_poly,
)
from solitonshoot.errors import DomainError


def test_degree_two_coefficients_are_frozen_rationals():
    poly = solve_center_poly(2)
    assert poly.degree == 2
    c = poly.coeffs
    assert c[(2, 0, 0)] == pytest.approx(0.5)
    assert c[(0, 2, 0)] == pytest.approx(-0.5)
    assert c[(0, 0, 2)] == pytest.approx(-0.5)
    assert c.get((0, 1, 1), 0.0) == pytest.approx(1.0)


def test_higher_degrees_extend_lower_ones():
    p2 = solve_center_poly(2)
    p4 = solve_center_poly(4)
    for key, val in p2.coeffs.items():
        assert p4.coeffs[key] == pytest.approx(val)
    with pytest.raises(DomainError):
        solve_center_poly(5)
    with pytest.raises(DomainError):
        solve_center_poly(1)


def test_cubic_terms_absent():
    # the graph is even to the orders solved here: no odd monomials
    p3 = solve_center_poly(3)
    odd = [k for k in p3.coeffs if sum(k) == 3 and p3.coeffs[k] != 0.0]
    assert odd == []


def test_invariance_defect_order_of_accuracy():
    rng = np.random.default_rng(1)
    y = rng.uniform(-1.0, 1.0, size=3)
    y /= np.linalg.norm(y)
    ratios = {}
    for deg, expected in ((2, 16.0), (4, 64.0)):
        poly = solve_center_poly(deg)
        d_big = invariance_defect(poly, 0.02 * y)
        d_small = invariance_defect(poly, 0.01 * y)
        ratios[deg] = d_big / d_small
        # defect of the degree-d graph scales like radius^(d+2)
        assert ratios[deg] == pytest.approx(expected, rel=0.35)
    assert ratios[4] > ratios[2]


def test_biaxial_expansion_check():
    report = biaxial_expansion_check(solve_center_poly(4))
    assert report["ci_exact"] and report["cj_exact"]


def test_reduced_flow_stays_in_ball_and_validates():
    poly = solve_center_poly(2)
    y0 = np.array([0.02, 0.015, 0.01])
    sol = reduced_flow(poly, y0, 50.0)
    assert np.all(np.linalg.norm(sol.y, axis=0) <= VALIDITY_RADIUS + 1e-12)
    with pytest.raises(DomainError):
        reduced_flow(poly, np.array([0.2, 0.0, 0.0]), 1.0)


def test_poly_symmetry_and_serialisation(tmp_path):
    poly = solve_center_poly(2)
    y = np.array([0.03, -0.01, 0.02])
    vals = poly(y)
    rolled = poly(np.roll(y, 1))
    # equivariance under cyclic relabeling of the axes
    assert np.allclose(np.roll(vals, 1), rolled, atol=1e-14)
    path = tmp_path / "poly.json"
    poly.to_json(path)
    import json

    blob = json.loads(path.read_text())
    assert blob["degree"] == 2
    assert blob["coefficients"]["2 0 0"] == pytest.approx(0.5)
    assert all(len(k) == 3 for k in poly.coeffs)
