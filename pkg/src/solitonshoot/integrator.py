"""Adaptive Runge-Kutta integration with event detection and logging.

Thin layer over ``scipy.integrate.solve_ivp`` (RK45, an embedded 5(4) pair
with quartic dense output).  Events are small callable objects carrying the
attributes scipy expects; trajectories are immutable-by-convention records
of samples, events and conserved-quantity logs, and serialise to CSV/JSON.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError
from .state_core import (
    ShootParams,
    conserved_c,
    conserved_z,
    embed_biaxial_primal,
)

__all__ = [
    "EventRecord",
    "XiZero",
    "StateNormExceeds",
    "ComponentExceeds",
    "YNormBelow",
    "Trajectory",
    "integrate",
    "continue_trajectory",
    "trajectory_to_csv",
    "trajectory_to_json",
    "DEFAULT_RTOL",
    "DEFAULT_ATOL",
    "BLOWUP_NORM",
]

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12
BLOWUP_NORM = 1e6


class XiZero:
    """Downward crossing of xi (first state component) through zero.

    Terminal: past this point the metric is incomplete.
    """

    kind = "XiZero"
    terminal = True
    direction = -1.0

    def __call__(self, t, y):
        return y[0]


class StateNormExceeds:
    """Sup-norm of the state exceeding a blow-up guard (terminal)."""

    kind = "StateNormExceeds"

    def __init__(self, bound: float = BLOWUP_NORM, terminal: bool = True):
        if bound <= 0.0:
            raise DomainError("blow-up bound must be positive")
        self.bound = bound
        self.terminal = terminal
        self.direction = 1.0

    def __call__(self, t, y):
        return float(np.max(np.abs(y))) - self.bound


class ComponentExceeds:
    """A selected slice of the state exceeding a bound in sup-norm."""

    kind = "ComponentExceeds"

    def __init__(self, indices, bound: float, kind: str | None = None, terminal: bool = True):
        if bound <= 0.0:
            raise DomainError("bound must be positive")
        self.indices = tuple(indices)
        self.bound = bound
        self.terminal = terminal
        self.direction = 1.0
        if kind is not None:
            self.kind = kind

    def __call__(self, t, y):
        return float(np.max(np.abs(y[list(self.indices)]))) - self.bound


class YNormBelow:
    """Norm of the Y block dropping below a threshold (non-terminal)."""

    kind = "YNormBelow"

    def __init__(self, threshold: float, indices=(4, 5, 6), terminal: bool = False):
        if threshold <= 0.0:
            raise DomainError("threshold must be positive")
        self.threshold = threshold
        self.indices = tuple(indices)
        self.terminal = terminal
        self.direction = -1.0

    def __call__(self, t, y):
        return float(np.linalg.norm(y[list(self.indices)])) - self.threshold


@dataclass(frozen=True)
class EventRecord:
    kind: str
    t: float
    y: np.ndarray
    terminal: bool = False


@dataclass(frozen=True)
class Trajectory:
    """Time-stamped solution samples plus events and conserved logs.

    ``chart`` is one of ``primal``, ``compact``, ``biaxial_primal``,
    ``biaxial_compact`` or ``generic``.  ``conserved`` holds rows
    ``(C, Z, xi - trace L)`` per sample for soliton charts, else ``None``.
    """

    chart: str
    t: np.ndarray
    y: np.ndarray  # (n_samples, dim)
    events: tuple
    lam: float = 0.0
    params: ShootParams | None = None
    conserved: np.ndarray | None = None
    rtol: float = DEFAULT_RTOL
    atol: float = DEFAULT_ATOL
    meta: dict = field(default_factory=dict)
    rhs: object = field(default=None, repr=False, compare=False)
    event_specs: tuple = field(default=(), repr=False, compare=False)

    @property
    def terminated(self) -> bool:
        return any(ev.terminal for ev in self.events)

    def terminal_event(self) -> EventRecord | None:
        for ev in self.events:
            if ev.terminal:
                return ev
        return None

    def has_event(self, kind: str) -> bool:
        return any(ev.kind == kind for ev in self.events)

    def final_state(self) -> np.ndarray:
        return self.y[-1]

    def primal_samples(self) -> np.ndarray:
        """Samples as full 7-component primal states (conversion as needed)."""
        return _to_primal_block(self.chart, self.y)

    def compact_samples(self) -> np.ndarray:
        """Samples as full 7-component compact states (conversion as needed)."""
        return _to_compact_block(self.chart, self.y)


def _to_primal_block(chart: str, y: np.ndarray) -> np.ndarray:
    if chart == "primal":
        return y
    if chart == "biaxial_primal":
        return np.stack([embed_biaxial_primal(row) for row in y])
    if chart in ("compact", "biaxial_compact"):
        full = y if chart == "compact" else np.stack([embed_biaxial_compact_row(row) for row in y])
        xi = 1.0 / full[:, 0]
        return np.column_stack([xi, full[:, 1:] * xi[:, None]])
    raise DomainError(f"chart {chart!r} has no primal interpretation")


def _to_compact_block(chart: str, y: np.ndarray) -> np.ndarray:
    if chart == "compact":
        return y
    if chart == "biaxial_compact":
        return np.stack([embed_biaxial_compact_row(row) for row in y])
    if chart in ("primal", "biaxial_primal"):
        full = _to_primal_block(chart, y)
        xi = full[:, 0]
        return np.column_stack([1.0 / xi, full[:, 1:] / xi[:, None]])
    raise DomainError(f"chart {chart!r} has no compact interpretation")


def embed_biaxial_compact_row(row: np.ndarray) -> np.ndarray:
    return np.array([row[0], row[1], row[2], row[2], row[3], row[4], row[4]])


def _conserved_rows(chart: str, y: np.ndarray, lam: float) -> np.ndarray | None:
    if chart not in ("primal", "biaxial_primal", "compact", "biaxial_compact"):
        return None
    prim = _to_primal_block(chart, y)
    rows = np.empty((prim.shape[0], 3))
    biaxial = chart.startswith("biaxial")
    for i, p in enumerate(prim):
        scale = 1.0 + np.linalg.norm(p)
        ok = biaxial or abs(p[2] - p[3]) + abs(p[5] - p[6]) < 1e-9 * scale
        rows[i, 0] = conserved_c(p) if ok else np.nan
        rows[i, 1] = conserved_z(p, lam)
        rows[i, 2] = p[0] - p[1] - p[2] - p[3]
    return rows


def integrate(
    rhs,
    y0,
    horizon: float,
    *,
    t0: float = 0.0,
    events=(),
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    t_eval=None,
    chart: str = "generic",
    lam: float = 0.0,
    params: ShootParams | None = None,
    method: str = "RK45",
    log_conserved: bool = True,
    meta: dict | None = None,
) -> Trajectory:
    """Integrate ``y' = rhs(y)`` from ``t0`` to ``horizon`` with events.

    Integration stops at the first terminal event; an underflowing step or
    non-finite state yields a terminal ``BlowUpSuspected`` event rather
    than an exception.
    """
    y0 = np.asarray(y0, dtype=float)
    if not np.all(np.isfinite(y0)):
        raise DomainError(f"non-finite initial state: {y0!r}")
    if rtol <= 0.0 or atol <= 0.0:
        raise DomainError("rtol and atol must be positive")
    if horizon <= t0:
        raise DomainError("horizon must exceed the initial time")

    events = tuple(events)

    def fun(t, y):
        return rhs(y)

    sol = solve_ivp(
        fun,
        (t0, horizon),
        y0,
        method=method,
        rtol=rtol,
        atol=atol,
        events=list(events) or None,
        t_eval=t_eval,
        dense_output=True,
    )

    t = np.asarray(sol.t, dtype=float)
    y = np.asarray(sol.y, dtype=float).T
    recs: list[EventRecord] = []
    if events:
        for spec, te, ye in zip(events, sol.t_events, sol.y_events):
            for tt, yy in zip(te, ye):
                recs.append(
                    EventRecord(kind=spec.kind, t=float(tt), y=np.asarray(yy, float),
                                terminal=bool(getattr(spec, "terminal", False)))
                )
    if sol.status == -1:
        recs.append(EventRecord(kind="BlowUpSuspected", t=float(t[-1]), y=y[-1], terminal=True))
    recs.sort(key=lambda ev: ev.t)

    conserved = _conserved_rows(chart, y, lam) if log_conserved else None
    info = dict(meta or {})
    info.setdefault("solver_status", sol.status)
    info.setdefault("solver_message", sol.message)
    info.setdefault("method", method)
    return Trajectory(
        chart=chart,
        t=t,
        y=y,
        events=tuple(recs),
        lam=lam,
        params=params,
        conserved=conserved,
        rtol=rtol,
        atol=atol,
        meta=info,
        rhs=rhs,
        event_specs=events,
    )


def continue_trajectory(traj: Trajectory, extra_horizon: float) -> Trajectory:
    """Extend an integration past its current end by ``extra_horizon``.

    A trajectory already closed by a terminal event is returned unchanged
    with ``meta['continuation_refused']`` set.
    """
    if extra_horizon <= 0.0:
        raise DomainError("extra_horizon must be positive")
    if traj.terminated:
        info = dict(traj.meta)
        info["continuation_refused"] = traj.terminal_event().kind
        return replace(traj, meta=info)
    if traj.rhs is None:
        raise DomainError("trajectory carries no RHS; cannot continue")
    tail = integrate(
        traj.rhs,
        traj.y[-1],
        traj.t[-1] + extra_horizon,
        t0=traj.t[-1],
        events=traj.event_specs,
        rtol=traj.rtol,
        atol=traj.atol,
        chart=traj.chart,
        lam=traj.lam,
        params=traj.params,
        log_conserved=traj.conserved is not None,
        meta=traj.meta,
    )
    conserved = None
    if traj.conserved is not None and tail.conserved is not None:
        conserved = np.vstack([traj.conserved, tail.conserved[1:]])
    return replace(
        tail,
        t=np.concatenate([traj.t, tail.t[1:]]),
        y=np.vstack([traj.y, tail.y[1:]]),
        events=tuple(list(traj.events) + list(tail.events)),
        conserved=conserved,
    )


_CSV_HEADERS = {
    "primal": ["r", "xi", "L1", "L2", "L3", "R1", "R2", "R3"],
    "biaxial_primal": ["r", "xi", "L1", "L2", "R1", "R2"],
    "compact": ["s", "Lcal", "X1", "X2", "X3", "Y1", "Y2", "Y3"],
    "biaxial_compact": ["s", "Lcal", "X1", "X2", "Y1", "Y2"],
}


def _fmt(x: float) -> str:
    return f"{x:.17e}"


def trajectory_to_csv(traj: Trajectory, path) -> None:
    """One row per sample: time, state components, then C and Z when logged.

    Quantities that do not apply (e.g. C off the biaxial subspace) are
    written as empty fields.
    """
    header = _CSV_HEADERS.get(traj.chart)
    if header is None:
        header = ["t"] + [f"y{i}" for i in range(traj.y.shape[1])]
    header = header + ["C", "Z"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(len(traj.t)):
            row = [_fmt(traj.t[i])] + [_fmt(v) for v in traj.y[i]]
            if traj.conserved is not None:
                c, z, _ = traj.conserved[i]
                row += ["" if np.isnan(c) else _fmt(c), _fmt(z)]
            else:
                row += ["", ""]
            writer.writerow(row)


def trajectory_to_json(traj: Trajectory) -> dict:
    """Event list, parameters and metadata as a JSON-ready dict."""
    params = None
    if traj.params is not None:
        params = {
            "n": traj.params.n,
            "alpha": traj.params.alpha,
            "beta": traj.params.beta,
            "gamma": traj.params.gamma,
            "lambda": traj.params.lam,
        }
    return {
        "chart": traj.chart,
        "lambda": traj.lam,
        "rtol": traj.rtol,
        "atol": traj.atol,
        "n_samples": int(len(traj.t)),
        "t_start": float(traj.t[0]),
        "t_end": float(traj.t[-1]),
        "params": params,
        "events": [
            {"kind": ev.kind, "t": ev.t, "state": [float(v) for v in ev.y],
             "terminal": ev.terminal}
            for ev in traj.events
        ],
        "meta": {k: v for k, v in traj.meta.items() if isinstance(v, (str, int, float, bool))},
    }


def save_trajectory_json(traj: Trajectory, path) -> None:
    with open(path, "w") as fh:
        json.dump(trajectory_to_json(traj), fh, indent=2, sort_keys=True)
        fh.write("\n")
