"""Trajectory classification: complete vs incomplete, and tail asymptotics.

A trajectory in the compact chart is classified from its terminal events and
from a tail window of late samples:

* an XiZero event means the primal variable xi crossed zero, so the metric
  closes up before infinity and is incomplete;
* escape of (Lcal, Y) to the guard radius with bounded X is the signature of
  an asymptotically locally flat end (the Taub-Bolt branch) and counts as
  complete;
* trajectories that settle into a small ball in X with at least one small Y
  component are complete solitons with a cone-like or paraboloid-like end;
* anything else at the horizon is undetermined and should be re-run with a
  longer horizon.

The classification also extracts the asymptotic pattern of the Y variables:
which pair converges together and which component dies, the numerical
surrogate for the shooting map's sign.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .integrator import Trajectory

__all__ = [
    "Classification",
    "classify",
    "asymptotic_pattern",
    "critical_pattern",
    "f_sign",
    "DEFAULT_BALL",
    "DEFAULT_SETTLE_TIME",
    "DEFAULT_TAIL_FRACTION",
    "ALLZERO_THRESHOLD",
]

DEFAULT_BALL = 0.05
DEFAULT_SETTLE_TIME = 30.0
DEFAULT_TAIL_FRACTION = 0.2
ALLZERO_THRESHOLD = 5e-3

_COMPLETE = "Complete"
_INCOMPLETE = "IncompleteXiNegative"
_BLOWUP = "BlowUp"
_UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class Classification:
    """Verdict and tail asymptotics of a single trajectory."""

    verdict: str  # Complete | IncompleteXiNegative | BlowUp | Undetermined
    pattern: str  # Biaxial23 | Pair12 | Pair13 | AllZero | None
    y_limits: tuple[float, float, float]
    xi_limit: float
    event_time: float | None = None  # for IncompleteXiNegative / BlowUp
    horizon: float | None = None  # for Undetermined
    tail_x_norm: float = float("nan")
    tail_e_value: float = float("nan")  # min over tail of max(Y2-Y1, Y3-Y1)
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "pattern": self.pattern,
            "y_limits": list(self.y_limits),
            "xi_limit": self.xi_limit,
            "event_time": self.event_time,
            "horizon": self.horizon,
            "tail_x_norm": self.tail_x_norm,
            "tail_e_value": self.tail_e_value,
        }


def _tail_window(traj: Trajectory, settle_time: float, tail_fraction: float):
    """Samples in the trailing window, as (lcal, X-block, Y-block) arrays."""
    t_end = traj.t[-1]
    t_start = max(settle_time, (1.0 - tail_fraction) * t_end)
    mask = traj.t >= t_start
    if not mask.any():
        mask = traj.t >= traj.t[len(traj.t) // 2]
    y = traj.y[mask]
    if traj.chart == "compact":
        return y[:, 0], y[:, 1:4], y[:, 4:7]
    if traj.chart == "biaxial_compact":
        x = np.column_stack([y[:, 1], y[:, 2], y[:, 2]])
        yy = np.column_stack([y[:, 3], y[:, 4], y[:, 4]])
        return y[:, 0], x, yy
    raise DomainError(
        f"classification expects a compact-chart trajectory, got {traj.chart!r}"
    )


def _pattern_from_tail(y_tail: np.ndarray, allzero_tol: float) -> tuple[str, float]:
    """Pattern label and its score from tail-averaged Y values."""
    y_avg = y_tail.mean(axis=0)
    if np.all(np.abs(y_avg) < allzero_tol):
        return "AllZero", float(np.max(np.abs(y_avg)))
    y1, y2, y3 = y_avg
    scores = {
        "Biaxial23": abs(y2 - y3) + abs(y1),
        "Pair12": abs(y1 - y2) + abs(y3),
        "Pair13": abs(y1 - y3) + abs(y2),
    }
    best = min(scores, key=scores.get)
    return best, float(scores[best])


def asymptotic_pattern(
    traj: Trajectory,
    *,
    settle_time: float = DEFAULT_SETTLE_TIME,
    tail_fraction: float = DEFAULT_TAIL_FRACTION,
    allzero_tol: float = ALLZERO_THRESHOLD,
) -> tuple[str, tuple[float, float, float]]:
    """Tail pattern of Y and the tail-averaged limits.

    Returns the permutation pattern minimising |Y_i - Y_j| + |Y_k| over the
    tail window, or AllZero when every component is below ``allzero_tol``.
    """
    _, _, y_tail = _tail_window(traj, settle_time, tail_fraction)
    pattern, _ = _pattern_from_tail(y_tail, allzero_tol)
    y_avg = y_tail.mean(axis=0)
    return pattern, (float(y_avg[0]), float(y_avg[1]), float(y_avg[2]))


def critical_pattern(
    traj: Trajectory,
    *,
    ball: float = DEFAULT_BALL,
    settle_time: float = DEFAULT_SETTLE_TIME,
    allzero_tol: float = ALLZERO_THRESHOLD,
) -> dict:
    """Best pair pattern attained along the settled segment of a trajectory.

    A near-critical trajectory lingers close to its limiting pair
    configuration before the transverse instability ejects it.  The dying
    Y component approaches its limit algebraically (like c/s), so raw tail
    values are floored by the ejection time; the limits are instead
    estimated by the two-point extrapolation

        Y_lim = (s2 Y(s2) - s1 Y(s1)) / (s2 - s1),

    which is exact for Y = a + c/s.  The pattern is read off where the
    score min over pairs of |Y_i - Y_j| + |Y_k| of the estimated limits is
    smallest among samples with a settled X block.  Returns the pattern,
    its score, the time at which it is attained and the estimated limits.
    """
    if traj.chart == "compact":
        x = traj.y[:, 1:4]
        yy = traj.y[:, 4:7]
    elif traj.chart == "biaxial_compact":
        x = np.column_stack([traj.y[:, 1], traj.y[:, 2], traj.y[:, 2]])
        yy = np.column_stack([traj.y[:, 3], traj.y[:, 4], traj.y[:, 4]])
    else:
        raise DomainError(
            f"pattern extraction expects a compact-chart trajectory, "
            f"got {traj.chart!r}"
        )
    settled = np.abs(x).max(axis=1) < ball
    best = None
    for i in np.nonzero(traj.t >= 2.0 * settle_time)[0]:
        if not settled[i]:
            continue
        j = int(np.searchsorted(traj.t, 0.8 * traj.t[i]))
        if j >= i or not settled[j] or traj.t[j] < settle_time:
            continue
        lim = (traj.t[i] * yy[i] - traj.t[j] * yy[j]) / (traj.t[i] - traj.t[j])
        pattern, score = _pattern_from_tail(lim[None, :], allzero_tol)
        if best is None or score < best[1]:
            best = (pattern, score, traj.t[i], lim)
    if best is None:
        return {"pattern": "None", "score": float("inf"), "s": None,
                "y": None}
    pattern, score, s_val, lim = best
    return {
        "pattern": pattern,
        "score": float(score),
        "s": float(s_val),
        "y": [float(v) for v in lim],
    }


def classify(
    traj: Trajectory,
    ball: float = DEFAULT_BALL,
    settle_time: float = DEFAULT_SETTLE_TIME,
    *,
    tail_fraction: float = DEFAULT_TAIL_FRACTION,
    allzero_tol: float = ALLZERO_THRESHOLD,
) -> Classification:
    """Classify a compact-chart trajectory.

    ``ball`` is the settling radius for the X block and for the dying Y
    component; ``settle_time`` is the earliest time admitted into the tail
    window.  A trajectory only classifies Complete from tail behaviour if it
    was integrated past ``settle_time``.
    """
    lcal_tail, x_tail, y_tail = _tail_window(traj, settle_time, tail_fraction)
    y_avg = y_tail.mean(axis=0)
    y_limits = (float(y_avg[0]), float(y_avg[1]), float(y_avg[2]))
    xi_limit = float(1.0 / lcal_tail[-1]) if lcal_tail[-1] > 0 else float("inf")
    x_norm = float(np.abs(x_tail).max())
    e_samples = np.maximum(y_tail[:, 1] - y_tail[:, 0], y_tail[:, 2] - y_tail[:, 0])
    e_value = float(e_samples.min()) if len(e_samples) else float("nan")

    common = dict(
        y_limits=y_limits,
        xi_limit=xi_limit,
        tail_x_norm=x_norm,
        tail_e_value=e_value,
    )

    xi_ev = next((e for e in traj.events if e.kind == "XiZero"), None)
    if xi_ev is not None:
        return Classification(
            verdict=_INCOMPLETE, pattern="None", event_time=xi_ev.t, **common
        )

    term = traj.terminal_event()
    if term is not None:
        if term.kind == "EscapeToInfinity":
            # (Lcal, Y) escaping with bounded X: asymptotically locally flat
            # complete end; Y has no finite pattern there.
            return Classification(verdict=_COMPLETE, pattern="None", **common)
        return Classification(
            verdict=_BLOWUP, pattern="None", event_time=term.t, **common
        )

    if traj.t[-1] < settle_time:
        return Classification(
            verdict=_UNDETERMINED, pattern="None", horizon=traj.t[-1], **common
        )

    pattern, _ = _pattern_from_tail(y_tail, allzero_tol)
    settled_x = x_norm < ball
    dying_y = float(np.abs(y_tail).min(axis=0).min()) < ball
    if settled_x and pattern == "AllZero":
        return Classification(verdict=_COMPLETE, pattern=pattern, **common)
    if settled_x and dying_y and e_value > 0.0:
        return Classification(verdict=_COMPLETE, pattern=pattern, **common)
    return Classification(
        verdict=_UNDETERMINED, pattern="None", horizon=traj.t[-1], **common
    )


def f_sign(
    traj: Trajectory,
    *,
    ball: float = DEFAULT_BALL,
    settle_time: float = DEFAULT_SETTLE_TIME,
    tail_fraction: float = DEFAULT_TAIL_FRACTION,
    allzero_tol: float = ALLZERO_THRESHOLD,
) -> int:
    """Sign of the shooting map along this trajectory.

    The sign tracks the excess E = max(Y2 - Y1, Y3 - Y1): +1 for complete
    trajectories whose tail keeps E > 0 (the side connected to the round
    complete solitons), and for trajectories blowing up in one of the
    2/3 components; -1 for trajectories blowing up in the 1 component
    (biaxial incompleteness always takes this channel); 0 when undetermined
    or exactly critical at the horizon.  Zeros of the sign are the critical
    directions whose trajectories neither keep E > 0 nor collapse through
    the 1 component.
    """
    cls = classify(
        traj,
        ball,
        settle_time,
        tail_fraction=tail_fraction,
        allzero_tol=allzero_tol,
    )
    if cls.verdict in (_INCOMPLETE, _BLOWUP):
        # the excess at the blow-up state identifies the collapse channel
        comp = traj.compact_samples()
        y1, y2, y3 = comp[-1, 4:7]
        return 1 if max(y2 - y1, y3 - y1) > 0.0 else -1
    if cls.verdict == _COMPLETE and cls.pattern != "AllZero" and cls.tail_e_value > 0.0:
        return +1
    if cls.verdict == _COMPLETE and cls.pattern == "None":
        # escape-to-infinity branch: complete with no sign-carrying tail
        return +1
    return 0
