"""Unit tests for metric reconstruction, residuals and reference metrics."""

import numpy as np
import pytest

from solitonshoot.errors import DomainError, GridError, ReconstructionError
from solitonshoot.geometry import (
    MetricProfile,
    eguchi_hanson,
    eguchi_hanson_profile,
    reconstruct_profile,
    smoothness_check,
    soliton_residual,
    taub_bolt,
    taub_bolt_profile,
)
from solitonshoot.pipeline import shoot_primal
from solitonshoot.state_core import ShootParams


def _constant_profile(c=2.0, num=41):
    r = np.linspace(0.0, 4.0, num)
    ones = np.full(num, c)
    return MetricProfile(r=r, f1=ones, f2=ones, f3=ones,
                         u_prime=np.zeros(num), n=1)


def test_profile_validation():
    with pytest.raises(DomainError):
        MetricProfile(r=np.array([0.0, 0.0, 1.0]), f1=np.ones(3),
                      f2=np.ones(3), f3=np.ones(3), u_prime=np.zeros(3), n=1)
    with pytest.raises(DomainError):
        MetricProfile(r=np.linspace(0, 1, 3), f1=np.array([1.0, -1.0, 1.0]),
                      f2=np.ones(3), f3=np.ones(3), u_prime=np.zeros(3), n=1)


def test_constant_profile_residual_closed_form():
    # constant f = (c, c, c) with u' = 0 leaves exactly the curvature term
    # 1/(2 c^2) in each second-order equation
    c = 2.0
    res = soliton_residual(_constant_profile(c), lam=0.0)
    assert res == pytest.approx(1.0 / (2.0 * c * c), rel=1e-12)


def test_residual_needs_enough_samples():
    p = _constant_profile(num=4)
    with pytest.raises(GridError):
        soliton_residual(p, lam=0.0)
    nonuniform = MetricProfile(
        r=np.array([0.0, 0.1, 0.2, 0.9, 1.0, 1.1, 1.2]),
        f1=np.ones(7), f2=np.ones(7), f3=np.ones(7),
        u_prime=np.zeros(7), n=1,
    )
    with pytest.raises(GridError):
        soliton_residual(nonuniform, lam=0.0)


def test_taub_bolt_closed_form_solves_equations():
    assert taub_bolt(np.array([2.5]))[0][0] > 0
    with pytest.raises(DomainError):
        taub_bolt(np.array([1.5]))
    profile = taub_bolt_profile(2.5, 6.0, 201)
    assert soliton_residual(profile, lam=0.0) < 1e-6


def test_eguchi_hanson_closed_form_solves_equations():
    profile = eguchi_hanson_profile(1.0, 5.0, 201)
    assert soliton_residual(profile, lam=0.0) < 1e-6
    g_rr, f1_sq, f2_sq = eguchi_hanson(np.array([1.0]))
    assert g_rr[0] == pytest.approx(4.0 / np.sqrt(2.0))
    assert f1_sq[0] == pytest.approx(1.0 / np.sqrt(2.0))
    assert f2_sq[0] == pytest.approx(np.sqrt(2.0))


def test_residual_converges_under_grid_refinement():
    coarse = soliton_residual(taub_bolt_profile(2.5, 6.0, 101), lam=0.0)
    fine = soliton_residual(taub_bolt_profile(2.5, 6.0, 201), lam=0.0)
    # fourth-order stencils: halving h divides the residual by about 16
    assert 12.0 < coarse / fine < 20.0


def test_reconstruct_profile_and_smoothness():
    params = ShootParams(n=3, alpha=0.6, beta=0.8)
    r_grid = np.linspace(1e-4, 1.0, 500)
    traj = shoot_primal(params, 1.0, t_eval=r_grid)
    profile = reconstruct_profile(traj)
    assert profile.n == 3
    assert profile.f.shape == (len(profile.r), 3)
    report = smoothness_check(profile, 3)
    assert report["pass"]
    assert report["f1_over_r_sq_limit"] == pytest.approx(9.0 / 4.0, rel=0.05)


def test_reconstruct_rejects_nonpositive_r_components():
    from solitonshoot.integrator import Trajectory

    y = np.tile(np.array([1.0, 0.5, 0.5, 0.5, -0.1, 0.5, 0.5]), (10, 1))
    traj = Trajectory(chart="primal", t=np.linspace(0.1, 1.0, 10), y=y,
                      events=())
    with pytest.raises(ReconstructionError):
        reconstruct_profile(traj)


def test_profile_csv_round_trip(tmp_path):
    p = _constant_profile()
    f1, f2 = tmp_path / "a.csv", tmp_path / "b.csv"
    p.to_csv(f1)
    p.to_csv(f2)
    assert f1.read_bytes() == f2.read_bytes()
    assert f1.read_text().splitlines()[0] == "r_arc,f1,f2,f3,u_prime"
