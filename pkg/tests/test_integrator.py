"""Unit tests for the event-driven integrator and trajectory containers."""

import numpy as np
import pytest

from solitonshoot.errors import DomainError
from solitonshoot.integrator import (
    ComponentExceeds,
    StateNormExceeds,
    XiZero,
    YNormBelow,
    continue_trajectory,
    integrate,
    save_trajectory_json,
    trajectory_to_csv,
    trajectory_to_json,
)


def _decay(y):
    return -y


def _linear_down(y):
    # y0' = -1: crosses zero at t = y0(0)
    return np.array([-1.0, 0.0])


def _grow(y):
    return y


def test_xi_zero_event_on_linear_crossing():
    traj = integrate(
        _linear_down,
        np.array([1.0, 0.5]),
        5.0,
        events=(XiZero(),),
        log_conserved=False,
    )
    assert traj.terminated
    ev = traj.terminal_event()
    assert ev.kind == "XiZero"
    assert ev.t == pytest.approx(1.0, abs=1e-9)
    assert traj.has_event("XiZero")


def test_component_exceeds_event():
    traj = integrate(
        _grow,
        np.array([1.0, 0.1]),
        10.0,
        events=(ComponentExceeds((0,), 5.0, kind="XBlowUp"),),
        log_conserved=False,
    )
    ev = traj.terminal_event()
    assert ev.kind == "XBlowUp"
    assert ev.t == pytest.approx(np.log(5.0), abs=1e-8)


def test_finite_time_blowup_is_flagged_not_raised():
    stiff = lambda y: y * y  # blows up at t = 1
    traj = integrate(
        stiff,
        np.array([1.0]),
        2.0,
        events=(),
        log_conserved=False,
    )
    ev = traj.terminal_event()
    assert ev is not None and ev.kind == "BlowUpSuspected"
    assert traj.t[-1] < 1.01

    guarded = integrate(
        stiff,
        np.array([1.0]),
        2.0,
        events=(StateNormExceeds(1e3),),
        log_conserved=False,
    )
    assert guarded.terminal_event().kind == "StateNormExceeds"
    assert guarded.terminal_event().t == pytest.approx(1.0 - 1e-3, abs=1e-6)


def test_input_validation():
    with pytest.raises(DomainError):
        integrate(_decay, np.array([np.nan]), 1.0, events=())
    with pytest.raises(DomainError):
        integrate(_decay, np.array([1.0]), 1.0, events=(), rtol=-1e-8)
    with pytest.raises(DomainError):
        integrate(_decay, np.array([1.0]), 0.0, events=(), t0=1.0)
    with pytest.raises(DomainError):
        StateNormExceeds(-1.0)
    with pytest.raises(DomainError):
        YNormBelow(0.0)


def test_tolerance_convergence():
    errs = []
    for rtol in (1e-6, 1e-9):
        traj = integrate(
            _decay,
            np.array([1.0]),
            2.0,
            events=(),
            rtol=rtol,
            atol=1e-14,
            log_conserved=False,
        )
        errs.append(abs(traj.final_state()[0] - np.exp(-2.0)))
    assert errs[1] < errs[0] * 1e-1


def test_y_norm_below_event_is_nonterminal():
    traj = integrate(
        _decay,
        np.ones(7),
        20.0,
        events=(YNormBelow(1e-3, indices=(4, 5, 6)),),
        log_conserved=False,
    )
    assert not traj.terminated
    assert traj.has_event("YNormBelow")
    ev = next(e for e in traj.events if e.kind == "YNormBelow")
    assert np.linalg.norm(ev.y[4:7]) == pytest.approx(1e-3, rel=1e-6)
    assert traj.t[-1] == pytest.approx(20.0)


def test_continue_trajectory_extends_and_refuses_terminated():
    traj = integrate(
        _decay,
        np.array([1.0]),
        1.0,
        events=(),
        log_conserved=False,
    )
    longer = continue_trajectory(traj, 1.0)
    assert longer.t[-1] == pytest.approx(2.0)
    assert abs(longer.final_state()[0] - np.exp(-2.0)) < 1e-8
    assert np.all(np.diff(longer.t) > 0)

    stopped = integrate(
        _linear_down,
        np.array([1.0, 0.5]),
        5.0,
        events=(XiZero(),),
        log_conserved=False,
    )
    cont = continue_trajectory(stopped, 10.0)
    assert cont.meta.get("continuation_refused") == "XiZero"
    assert cont.t[-1] == stopped.t[-1]


def test_csv_and_json_round_trip(tmp_path):
    traj = integrate(
        _decay,
        np.ones(7),
        1.0,
        events=(),
        chart="primal",
        log_conserved=True,
        t_eval=np.linspace(0, 1, 11),
    )
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    trajectory_to_csv(traj, p1)
    trajectory_to_csv(traj, p2)
    assert p1.read_bytes() == p2.read_bytes()  # deterministic bytes
    header = p1.read_text().splitlines()[0]
    assert header == "r,xi,L1,L2,L3,R1,R2,R3,C,Z"
    assert len(p1.read_text().splitlines()) == 12

    blob = trajectory_to_json(traj)
    assert blob["chart"] == "primal"
    assert blob["n_samples"] == 11
    jpath = tmp_path / "t.json"
    save_trajectory_json(traj, jpath)
    save_trajectory_json(traj, tmp_path / "t2.json")
    assert jpath.read_bytes() == (tmp_path / "t2.json").read_bytes()


def test_conserved_log_layout():
    # a biaxially symmetric primal state keeps C finite; a generic one
    # leaves C blank (NaN)
    y_sym = np.array([2.0, 0.3, -0.1, -0.1, 0.2, 0.5, 0.5])
    traj = integrate(
        _decay, y_sym, 0.1, events=(), chart="primal", log_conserved=True
    )
    assert traj.conserved.shape == (len(traj.t), 3)
    assert np.isfinite(traj.conserved[0, 0])
    y_gen = np.array([2.0, 0.3, -0.1, 0.4, 0.2, 0.7, 0.5])
    traj2 = integrate(
        _decay, y_gen, 0.1, events=(), chart="primal", log_conserved=True
    )
    assert np.isnan(traj2.conserved[0, 0])
    assert np.isfinite(traj2.conserved[0, 1])
