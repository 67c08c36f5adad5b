"""Drivers composing startup, integration and chart switching.

The standard classification run works in the compact chart, where complete
trajectories stay bounded.  A trajectory whose X block explodes is heading
for the xi = 0 crossing; the run is then confirmed in the primal chart,
where the crossing is a clean terminal event, and the XiZero event is
attached to the returned trajectory.
"""

from __future__ import annotations

from dataclasses import replace
from functools import partial

import numpy as np

from . import startup
from .integrator import (
    DEFAULT_ATOL,
    DEFAULT_RTOL,
    ComponentExceeds,
    EventRecord,
    StateNormExceeds,
    Trajectory,
    XiZero,
    integrate,
)
from .state_core import (
    ShootParams,
    rhs_biaxial_compact,
    rhs_biaxial_primal,
    rhs_compact,
    rhs_primal,
)

__all__ = ["shoot_compact", "shoot_primal", "extend_shoot"]

# X components larger than this signal an imminent xi = 0 crossing
X_GUARD = 50.0
# Y/Lcal escape guard: ALF-type complete metrics blow up here instead
Y_GUARD = 1e6


def _compact_setup(params: ShootParams):
    if params.biaxial:
        rhs = partial(rhs_biaxial_compact, lam=params.lam)
        chart = "biaxial_compact"
        x_idx, y_idx = (1, 2), (0, 3, 4)
    else:
        rhs = partial(rhs_compact, lam=params.lam)
        chart = "compact"
        x_idx, y_idx = (1, 2, 3), (0, 4, 5, 6)
    return rhs, chart, x_idx, y_idx


def _primal_setup(params: ShootParams):
    if params.biaxial:
        return partial(rhs_biaxial_primal, lam=params.lam), "biaxial_primal"
    return partial(rhs_primal, lam=params.lam), "primal"


def _compact_events(x_idx, y_idx):
    return (
        ComponentExceeds(x_idx, X_GUARD, kind="XBlowUp"),
        ComponentExceeds(y_idx, Y_GUARD, kind="EscapeToInfinity"),
    )


# a xi = 0 crossing is genuine (transversal, xi' = -sum L^2 - lam < 0) only
# when the shape operator has not already decayed; an asymptotically locally
# flat end has xi -> 0+ with L -> 0 and produces spurious numerical crossings
GENUINE_CROSS_L2_MIN = 1e-4


def _confirm_xi_zero(params: ShootParams, guard: EventRecord, max_r: float,
                     rtol: float, atol: float) -> EventRecord | str:
    """Follow a guard state in the primal chart until xi crosses zero.

    The systems are autonomous, so the confirmation leg runs on its own
    clock starting at 0.  Returns an XiZero event stamped with the compact
    time of the guard when a genuine transversal crossing occurs within
    ``max_r``; otherwise the string "EscapeToInfinity" (xi -> 0 with the
    shape operator decayed: a complete asymptotic end) or "BlowUp".
    """
    rhs, chart = _primal_setup(params)
    lcal = guard.y[0]
    y0 = np.concatenate([[1.0 / lcal], guard.y[1:] / lcal])
    leg = integrate(
        rhs,
        y0,
        max_r,
        events=(XiZero(), StateNormExceeds()),
        rtol=rtol,
        atol=atol,
        chart=chart,
        lam=params.lam,
        params=params,
        log_conserved=False,
    )
    for ev in leg.events:
        if ev.kind == "XiZero":
            n_l = 3 if not params.biaxial else 2
            l_sq = float(np.sum(ev.y[1:1 + n_l] ** 2))
            if l_sq >= GENUINE_CROSS_L2_MIN:
                return EventRecord(kind="XiZero", t=guard.t, y=ev.y, terminal=True)
            return "EscapeToInfinity"
    term = leg.terminal_event()
    if term is not None and term.kind != "XiZero":
        return "BlowUp"
    return "EscapeToInfinity"


def shoot_compact(
    params: ShootParams,
    s_horizon: float,
    *,
    epsilon: float = startup.DEFAULT_EPSILON,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    confirm_r: float = 1e4,
    method: str = "RK45",
    extra_events=(),
) -> Trajectory:
    """Launch and integrate a trajectory in the compact chart up to s_horizon."""
    ser = startup.launch(params, epsilon)
    y_prim = ser.state_at_eps.as_array()
    if not params.biaxial:
        y0_full = np.concatenate([[1.0 / y_prim[0]], y_prim[1:] / y_prim[0]])
        y0 = y0_full
    else:
        y5 = np.array([y_prim[0], y_prim[1], y_prim[2], y_prim[4], y_prim[5]])
        y0 = np.concatenate([[1.0 / y5[0]], y5[1:] / y5[0]])
    rhs, chart, x_idx, y_idx = _compact_setup(params)
    traj = integrate(
        rhs,
        y0,
        s_horizon,
        events=_compact_events(x_idx, y_idx) + tuple(extra_events),
        rtol=rtol,
        atol=atol,
        chart=chart,
        lam=params.lam,
        params=params,
        method=method,
        meta={"epsilon": epsilon, "s_horizon": s_horizon},
    )
    guard = traj.terminal_event()
    if guard is not None and guard.kind == "XBlowUp":
        outcome = _confirm_xi_zero(params, guard, confirm_r, rtol, atol)
        if isinstance(outcome, EventRecord):
            traj = replace(traj, events=tuple(list(traj.events) + [outcome]))
        else:
            relabeled = EventRecord(
                kind=outcome, t=guard.t, y=guard.y, terminal=True
            )
            events = tuple(
                relabeled if ev is guard else ev for ev in traj.events
            )
            traj = replace(traj, events=events)
    return traj


def shoot_primal(
    params: ShootParams,
    r_horizon: float,
    *,
    epsilon: float = startup.DEFAULT_EPSILON,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    t_eval=None,
    extra_events=(),
) -> Trajectory:
    """Launch and integrate in the primal chart over r (XiZero terminal)."""
    ser = startup.launch(params, epsilon)
    y_prim = ser.state_at_eps.as_array()
    rhs, chart = _primal_setup(params)
    if params.biaxial:
        y0 = np.array([y_prim[0], y_prim[1], y_prim[2], y_prim[4], y_prim[5]])
    else:
        y0 = y_prim
    return integrate(
        rhs,
        y0,
        r_horizon,
        t0=epsilon,
        events=(XiZero(), StateNormExceeds()) + tuple(extra_events),
        rtol=rtol,
        atol=atol,
        t_eval=t_eval,
        chart=chart,
        lam=params.lam,
        params=params,
        meta={"epsilon": epsilon},
    )


def extend_shoot(traj: Trajectory, new_horizon: float, params: ShootParams,
                 confirm_r: float = 1e4) -> Trajectory:
    """Re-run a compact shoot to a longer horizon (fresh, deterministic)."""
    return shoot_compact(
        params,
        new_horizon,
        epsilon=traj.meta.get("epsilon", startup.DEFAULT_EPSILON),
        rtol=traj.rtol,
        atol=traj.atol,
        confirm_r=confirm_r,
    )
