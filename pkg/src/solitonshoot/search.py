"""Bisection search for critical shooting directions.

The shooting directions on the unit sphere are parameterised by the arc

    alpha = sqrt(1 - gamma^2) cos(pi t / 2),
    beta  = sqrt(1 - gamma^2) sin(pi t / 2),        t in [0, 1],

at fixed gamma.  Along this arc the trajectory sign structure is monotone:
+1 (complete, connected to the t = 0 branch) near one end and -1 (incomplete,
xi crosses zero) near the other.  ``find_critical`` brackets the sign change
by bisection; trajectories too close to criticality to decide at the current
horizon are re-integrated with doubled horizons.

The integration horizon needed to decide a sign grows roughly like the
inverse square root of the bracket width (the escape from the critical set
is algebraic), so the starting horizon at each bisection step is predicted
from the current width and doubled on demand.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .classifier import (
    ALLZERO_THRESHOLD,
    DEFAULT_BALL,
    DEFAULT_SETTLE_TIME,
    Classification,
    classify,
    critical_pattern,
    f_sign,
)
from .errors import SearchError
from .integrator import DEFAULT_ATOL, DEFAULT_RTOL, Trajectory
from .pipeline import shoot_compact
from .state_core import ShootParams, conserved_quantities

__all__ = [
    "CriticalBracket",
    "arc_params",
    "trajectory_sign",
    "find_critical",
    "sweep_gamma",
    "verify_soliton_candidate",
    "conserved_drift_report",
    "DEFAULT_TOL",
    "BASE_HORIZON",
    "MAX_HORIZON",
]

DEFAULT_TOL = 1e-9
BASE_HORIZON = 60.0
MAX_HORIZON = 8e5
# calibration constant of the horizon predictor: deciding a sign at bracket
# width w needs s of order HORIZON_SCALE / sqrt(w)
HORIZON_SCALE = 8.0

# early-decision gate for the complete side: once the X block has settled
# below this and some Y_j exceeds Y_1 by the margin, the trajectory has
# left the critical set towards the complete branch (along the critical
# orbit Y_1 dominates for all late times, so the gate cannot fire there)
COMPLETE_X_GATE = 0.01
# once X has settled, the critical orbit keeps Y_1 - Y_2 at a few times
# Y_1 itself, so a small positive margin on the excess is unambiguous
COMPLETE_E_MARGIN = 5e-5


class CompleteSideSettled:
    """Terminal event deciding the complete (+1) side early.

    Fires when the X block has settled inside a small gate while the excess
    max_j(Y_j - Y_1) crosses a positive margin.  Incomplete trajectories
    blow up in X before the gate opens, and along the critical orbit the
    excess stays negative once X has settled, so a firing is unambiguous.
    """

    kind = "CompleteSide"
    terminal = True
    direction = 1.0

    def __init__(self, biaxial: bool,
                 x_gate: float = COMPLETE_X_GATE,
                 e_margin: float = COMPLETE_E_MARGIN):
        if biaxial:
            self.x_idx, self.y1_idx, self.yj_idx = [1, 2], 3, [4]
        else:
            self.x_idx, self.y1_idx, self.yj_idx = [1, 2, 3], 4, [5, 6]
        self.x_gate = x_gate
        self.e_margin = e_margin

    def __call__(self, t, y):
        settled = self.x_gate - float(np.max(np.abs(y[self.x_idx])))
        excess = float(np.max(y[self.yj_idx]) - y[self.y1_idx])
        return min(settled, excess - self.e_margin)


@dataclass(frozen=True)
class CriticalBracket:
    """A sign-change bracket [t_lo, t_hi] on the shooting arc."""

    n: int
    gamma: float
    t_lo: float
    t_hi: float
    sign_lo: int
    sign_hi: int
    probes: int
    max_horizon_used: float
    elapsed: float
    lam: float = 0.0

    @property
    def width(self) -> float:
        return self.t_hi - self.t_lo

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.t_lo + self.t_hi)

    def params_at(self, t_arc: float) -> ShootParams:
        return arc_params(self.n, self.gamma, t_arc, lam=self.lam)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "gamma": self.gamma,
            "lam": self.lam,
            "t_lo": self.t_lo,
            "t_hi": self.t_hi,
            "width": self.width,
            "midpoint": self.midpoint,
            "sign_lo": self.sign_lo,
            "sign_hi": self.sign_hi,
            "probes": self.probes,
            "max_horizon_used": self.max_horizon_used,
            "elapsed": self.elapsed,
        }


def arc_params(n: int, gamma: float, t_arc: float, *, lam: float = 0.0) -> ShootParams:
    """Shooting parameters at arc position t in [0, 1] on the gamma slice."""
    if not 0.0 <= t_arc <= 1.0:
        raise SearchError(f"arc position must lie in [0, 1], got {t_arc!r}")
    rho = np.sqrt(max(0.0, 1.0 - gamma * gamma))
    alpha = float(rho * np.cos(0.5 * np.pi * t_arc))
    beta = float(rho * np.sin(0.5 * np.pi * t_arc))
    return ShootParams(n=n, alpha=alpha, beta=beta, gamma=gamma, lam=lam)


def trajectory_sign(
    params: ShootParams,
    horizon: float,
    *,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    ball: float = DEFAULT_BALL,
    early_events: bool = True,
) -> tuple[int, Trajectory]:
    """Integrate one direction and return (sign, trajectory).

    With ``early_events`` a biaxial run carries a terminal event that
    decides the complete side as soon as the trajectory visibly leaves the
    critical set, so neither sign needs a full-horizon integration.  The
    event is restricted to gamma = 0 slices: on triaxial slices the
    critical background itself has a settled X block with a positive Y
    excess, so the gate would misfire there.
    """
    extra = (
        (CompleteSideSettled(params.biaxial),)
        if early_events and params.biaxial
        else ()
    )
    traj = shoot_compact(params, horizon, rtol=rtol, atol=atol,
                         extra_events=extra)
    kinds = {ev.kind for ev in traj.events}
    if "CompleteSide" in kinds or "EscapeToInfinity" in kinds:
        return 1, traj
    return f_sign(traj, ball=ball), traj


def _decided_sign(
    n: int,
    gamma: float,
    t_arc: float,
    width_hint: float,
    *,
    lam: float,
    rtol: float,
    atol: float,
    ball: float,
    max_horizon: float,
) -> tuple[int, float]:
    """Sign at an arc point, doubling the horizon until it is decided."""
    # decided probes terminate at their own event time, so a generous
    # horizon only costs anything on the rare undecided probes
    horizon = min(
        max_horizon,
        max(BASE_HORIZON, 2.0 * HORIZON_SCALE / np.sqrt(max(width_hint, 1e-14))),
    )
    params = arc_params(n, gamma, t_arc, lam=lam)
    while True:
        sign, _ = trajectory_sign(
            params, horizon, rtol=rtol, atol=atol, ball=ball
        )
        if sign != 0 or horizon >= max_horizon:
            return sign, horizon
        horizon = min(max_horizon, 4.0 * horizon)


def find_critical(
    n: int,
    gamma: float = 0.0,
    tol: float = DEFAULT_TOL,
    *,
    lam: float = 0.0,
    t_lo: float = 0.0,
    t_hi: float = 1.0,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    ball: float = DEFAULT_BALL,
    max_horizon: float = MAX_HORIZON,
) -> CriticalBracket:
    """Bracket the critical arc position on the gamma slice to width < tol.

    Raises SearchError when the arc endpoints carry no sign change (the
    n <= 2 branches, where both endpoints are complete) or when a midpoint
    stays undecided at the maximum horizon before the target width is
    reached.
    """
    started = time.time()
    probes = 0
    horizon_used = BASE_HORIZON

    sign_lo, h = _decided_sign(
        n, gamma, t_lo, t_hi - t_lo,
        lam=lam, rtol=rtol, atol=atol, ball=ball, max_horizon=max_horizon,
    )
    probes += 1
    horizon_used = max(horizon_used, h)
    sign_hi, h = _decided_sign(
        n, gamma, t_hi, t_hi - t_lo,
        lam=lam, rtol=rtol, atol=atol, ball=ball, max_horizon=max_horizon,
    )
    probes += 1
    horizon_used = max(horizon_used, h)
    if sign_lo * sign_hi >= 0:
        raise SearchError(
            f"no sign change on the arc for n={n}, gamma={gamma}: "
            f"f({t_lo})={sign_lo}, f({t_hi})={sign_hi}"
        )
    if sign_lo < 0:  # orient so the +1 side sits at t_lo
        t_lo, t_hi = t_hi, t_lo
        sign_lo, sign_hi = sign_hi, sign_lo

    while abs(t_hi - t_lo) > tol:
        mid = 0.5 * (t_lo + t_hi)
        if mid == t_lo or mid == t_hi:
            break  # float resolution of the arc parameter
        query = mid
        sign_mid, h = _decided_sign(
            n, gamma, query, abs(t_hi - t_lo),
            lam=lam, rtol=rtol, atol=atol, ball=ball, max_horizon=max_horizon,
        )
        probes += 1
        horizon_used = max(horizon_used, h)
        # A query undecided at the maximum horizon sits within a sliver of
        # the critical point itself; shift the query off-center so it is
        # guaranteed to be decidable, at the price of a slower shrink.
        attempts = 0
        while sign_mid == 0 and attempts < 6:
            query = 0.5 * (query + t_hi)
            sign_mid, h = _decided_sign(
                n, gamma, query, abs(query - mid),
                lam=lam, rtol=rtol, atol=atol, ball=ball, max_horizon=max_horizon,
            )
            probes += 1
            horizon_used = max(horizon_used, h)
            attempts += 1
        if sign_mid == 0:
            raise SearchError(
                f"undecided sign near t={mid!r} (bracket width "
                f"{abs(t_hi - t_lo):.3e}) at maximum horizon {max_horizon:g}"
            )
        if sign_mid > 0:
            t_lo = query
        else:
            t_hi = query

    lo, hi = (t_lo, t_hi) if t_lo < t_hi else (t_hi, t_lo)
    slo, shi = (sign_lo, sign_hi) if t_lo < t_hi else (sign_hi, sign_lo)
    return CriticalBracket(
        n=n,
        gamma=gamma,
        t_lo=lo,
        t_hi=hi,
        sign_lo=slo,
        sign_hi=shi,
        probes=probes,
        max_horizon_used=horizon_used,
        elapsed=time.time() - started,
        lam=lam,
    )


def verify_soliton_candidate(
    bracket: CriticalBracket,
    *,
    horizon: float = 4e5,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    ball: float = DEFAULT_BALL,
    allzero_tol: float = ALLZERO_THRESHOLD,
    reconstruct: bool = True,
) -> dict:
    """Integrate the bracket midpoint long and report its soliton credentials.

    The report contains the verdict and pattern, xi limit, tail X norm,
    conserved-quantity drift, and (optionally) the reconstructed metric
    profile.  A midpoint that classifies IncompleteXiNegative marks the
    bracket as unresolved.
    """
    params = bracket.params_at(bracket.midpoint)
    traj = shoot_compact(params, horizon, rtol=rtol, atol=atol)
    cls = classify(traj, ball=ball, allzero_tol=allzero_tol)
    report = {
        "bracket": bracket.to_dict(),
        "params": params.to_dict(),
        "horizon": horizon,
        "classification": cls.to_dict(),
        "resolved": cls.verdict != "IncompleteXiNegative",
    }
    drift = _conserved_drift(traj)
    report.update(drift)
    if reconstruct and cls.verdict == "Complete":
        from .geometry import reconstruct_profile

        prim = shoot_compact(params, min(horizon, 30.0), rtol=rtol, atol=atol)
        report["profile"] = reconstruct_profile(prim)
    return report


def conserved_drift_report(traj: Trajectory) -> dict:
    """Drift of the conserved quantities along the trajectory samples.

    C is a cancellation of terms of size xi^2, so deviations are quoted
    relative to the local term scale max(1, xi^2); near the singular orbit
    the raw values carry an irreducible xi^2 * eps representation noise.
    """
    prim = traj.primal_samples()
    scale = np.maximum(1.0, prim[:, 0] ** 2)
    c_vals, z_vals = [], []
    for row in prim:
        rep = conserved_quantities(row, lam=traj.lam)
        c_vals.append(rep.c if rep.c_applicable else np.nan)
        z_vals.append(rep.z)
    c_vals = np.asarray(c_vals)
    z_vals = np.asarray(z_vals)
    out = {}
    if np.all(np.isfinite(c_vals)):
        c_ref = float(np.median(c_vals))
        out["c_drift"] = float((np.abs(c_vals - c_ref) / scale).max())
        out["c_value"] = c_ref
    else:
        out["c_drift"] = None
        out["c_value"] = None
    out["z_max"] = float((np.abs(z_vals) / scale).max())
    return out


_conserved_drift = conserved_drift_report


def sweep_gamma(
    gamma_grid,
    tol: float = DEFAULT_TOL,
    *,
    n: int = 4,
    lam: float = 0.0,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    verify_horizon: float = 4e4,
    max_horizon: float = MAX_HORIZON,
) -> list[dict]:
    """Run find_critical on each gamma slice; failures are recorded, not fatal.

    Returns one record per gamma with the bracket (or the SearchError
    message) and the midpoint classification at ``verify_horizon``.
    """
    results = []
    for gamma in gamma_grid:
        record = {"n": n, "gamma": float(gamma), "tol": tol}
        try:
            bracket = find_critical(
                n, float(gamma), tol,
                lam=lam, rtol=rtol, atol=atol, max_horizon=max_horizon,
            )
        except SearchError as exc:
            record["error"] = str(exc)
            results.append(record)
            continue
        record["bracket"] = bracket.to_dict()
        params = bracket.params_at(bracket.midpoint)
        traj = shoot_compact(params, verify_horizon, rtol=rtol, atol=atol)
        cls = classify(traj)
        record["midpoint_classification"] = cls.to_dict()
        record["midpoint_pattern"] = critical_pattern(traj)
        results.append(record)
    return results


def sweep_to_json(results: list[dict], path) -> None:
    """Write a gamma-sweep manifest as JSON."""
    with open(path, "w") as fh:
        json.dump({"sweep": results}, fh, indent=2)
        fh.write("\n")
