"""State spaces, right-hand sides, chart conversions and conserved quantities.

Two charts are used throughout:

* primal chart, state ``(xi, L1, L2, L3, R1, R2, R3)`` in the arclength
  variable ``r``;
* compact chart, state ``(Lcal, X1, X2, X3, Y1, Y2, Y3)`` in the rescaled
  time ``s``, related by ``Lcal = 1/xi``, ``X_i = L_i/xi``, ``Y_i = R_i/xi``.

Biaxial (U(2)-invariant) trajectories use the reduced five-component
layouts ``(xi, L1, L2, R1, R2)`` and ``(Lcal, X1, X2, Y1, Y2)``, where the
second index stands for the duplicated pair.

All functions are pure and operate on plain float arrays; small frozen
dataclasses wrap them for the user-facing API.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConversionError, DomainError

__all__ = [
    "ShootParams",
    "PrimalState",
    "CompactState",
    "ConservedReport",
    "rhs_primal",
    "rhs_compact",
    "rhs_biaxial_primal",
    "rhs_biaxial_compact",
    "primal_to_compact",
    "compact_to_primal",
    "primal_array_to_compact",
    "compact_array_to_primal",
    "embed_biaxial_primal",
    "embed_biaxial_compact",
    "restrict_primal_to_biaxial",
    "conserved_c",
    "conserved_z",
    "conserved_quantities",
    "BIAXIAL_MATCH_TOL",
]

# cyclic index triples (i, j, k) for the three-sphere directions
_IJK = ((0, 1, 2), (1, 2, 0), (2, 0, 1))

# relative tolerance deciding whether a triaxial state counts as biaxial
BIAXIAL_MATCH_TOL = 1e-9

_SPHERE_TOL = 1e-12


@dataclass(frozen=True)
class ShootParams:
    """Shooting data: isotropy order n, Einstein constant and direction.

    The direction ``(alpha, beta, gamma)`` lies on the unit sphere;
    ``gamma != 0`` is only meaningful for ``n = 4``.
    """

    n: int
    alpha: float
    beta: float
    gamma: float = 0.0
    lam: float = 0.0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n}")
        norm2 = self.alpha**2 + self.beta**2 + self.gamma**2
        if abs(norm2 - 1.0) > 1e-10:
            raise DomainError(
                f"(alpha, beta, gamma) must lie on the unit sphere, |.|^2 = {norm2!r}"
            )
        if self.beta < 0.0:
            raise DomainError("beta must be non-negative")
        if self.gamma != 0.0 and self.n != 4:
            raise DomainError("gamma != 0 requires n = 4")

    @property
    def biaxial(self) -> bool:
        return self.gamma == 0.0

    def with_direction(self, alpha: float, beta: float, gamma: float = 0.0) -> "ShootParams":
        return ShootParams(n=self.n, alpha=alpha, beta=beta, gamma=gamma, lam=self.lam)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "alpha": self.alpha,
            "beta": self.beta,
            "gamma": self.gamma,
            "lam": self.lam,
        }


def _as_state_array(state, size: int) -> np.ndarray:
    y = np.asarray(state, dtype=float)
    if y.shape != (size,):
        raise DomainError(f"expected a {size}-component state, got shape {y.shape}")
    if not np.all(np.isfinite(y)):
        raise DomainError(f"non-finite state: {y!r}")
    return y


@dataclass(frozen=True)
class PrimalState:
    """First-chart state at arclength ``r``: (xi, L1..L3, R1..R3)."""

    r: float
    xi: float
    L: tuple
    R: tuple

    def __post_init__(self) -> None:
        _as_state_array(self.as_array(), 7)

    def as_array(self) -> np.ndarray:
        return np.array([self.xi, *self.L, *self.R], dtype=float)

    @classmethod
    def from_array(cls, r: float, y) -> "PrimalState":
        y = _as_state_array(y, 7)
        return cls(r=float(r), xi=float(y[0]), L=tuple(y[1:4]), R=tuple(y[4:7]))

    @property
    def u_prime(self) -> float:
        return sum(self.L) - self.xi

    def is_biaxial(self, tol: float = BIAXIAL_MATCH_TOL) -> bool:
        scale = 1.0 + float(np.linalg.norm(self.as_array()))
        return abs(self.L[1] - self.L[2]) + abs(self.R[1] - self.R[2]) < tol * scale


@dataclass(frozen=True)
class CompactState:
    """Second-chart state at rescaled time ``s``: (Lcal, X1..X3, Y1..Y3)."""

    s: float
    lcal: float
    X: tuple
    Y: tuple

    def __post_init__(self) -> None:
        _as_state_array(self.as_array(), 7)

    def as_array(self) -> np.ndarray:
        return np.array([self.lcal, *self.X, *self.Y], dtype=float)

    @classmethod
    def from_array(cls, s: float, y) -> "CompactState":
        y = _as_state_array(y, 7)
        return cls(s=float(s), lcal=float(y[0]), X=tuple(y[1:4]), Y=tuple(y[4:7]))


@dataclass(frozen=True)
class ConservedReport:
    """Conserved/residual quantities of a primal state.

    ``c`` is only meaningful on the biaxial subsystem; ``c_applicable``
    records whether the state was biaxial to tolerance.  ``z`` is the
    Einstein residual and ``xi_minus_trace = xi - L1 - L2 - L3 = -u'``.
    """

    c: float
    c_applicable: bool
    z: float
    xi_minus_trace: float


# ---------------------------------------------------------------------------
# right-hand sides
# ---------------------------------------------------------------------------

def rhs_primal(state, lam: float = 0.0) -> np.ndarray:
    """Derivative of (xi, L, R) with respect to arclength r."""
    y = state.as_array() if isinstance(state, PrimalState) else _as_state_array(state, 7)
    xi = y[0]
    L = y[1:4]
    R = y[4:7]
    out = np.empty(7)
    out[0] = -(L @ L) - lam
    for i, j, k in _IJK:
        out[1 + i] = -xi * L[i] + 0.5 * R[i] ** 2 - 0.5 * (R[j] - R[k]) ** 2 - lam
        out[4 + i] = R[i] * (L[i] - L[j] - L[k])
    return out


def rhs_compact(state, lam: float = 0.0) -> np.ndarray:
    """Derivative of (Lcal, X, Y) with respect to the rescaled time s."""
    y = state.as_array() if isinstance(state, CompactState) else _as_state_array(state, 7)
    lcal = y[0]
    X = y[1:4]
    Y = y[4:7]
    q = X @ X + lam * lcal**2
    out = np.empty(7)
    out[0] = lcal * q
    for i, j, k in _IJK:
        out[1 + i] = (
            0.5 * Y[i] ** 2 - 0.5 * (Y[j] - Y[k]) ** 2 - X[i] - lam * lcal**2 + X[i] * q
        )
        out[4 + i] = Y[i] * (X[i] - X[j] - X[k] + q)
    return out


def rhs_biaxial_primal(state, lam: float = 0.0) -> np.ndarray:
    """Reduced primal derivative for (xi, L1, L2, R1, R2) with L3=L2, R3=R2."""
    y = _as_state_array(state, 5)
    xi, l1, l2, r1, r2 = y
    return np.array(
        [
            -l1**2 - 2.0 * l2**2 - lam,
            -xi * l1 + 0.5 * r1**2 - lam,
            -xi * l2 + r1 * r2 - 0.5 * r1**2 - lam,
            r1 * (l1 - 2.0 * l2),
            -r2 * l1,
        ]
    )


def rhs_biaxial_compact(state, lam: float = 0.0) -> np.ndarray:
    """Reduced compact derivative for (Lcal, X1, X2, Y1, Y2) with X3=X2, Y3=Y2."""
    y = _as_state_array(state, 5)
    lcal, x1, x2, y1, y2 = y
    q = x1**2 + 2.0 * x2**2 + lam * lcal**2
    return np.array(
        [
            lcal * q,
            0.5 * y1**2 - x1 - lam * lcal**2 + x1 * q,
            y1 * y2 - 0.5 * y1**2 - x2 - lam * lcal**2 + x2 * q,
            y1 * (x1 - 2.0 * x2 + q),
            y2 * (-x1 + q),
        ]
    )


# ---------------------------------------------------------------------------
# chart conversions and symmetry embeddings
# ---------------------------------------------------------------------------

def primal_array_to_compact(y) -> np.ndarray:
    y = _as_state_array(y, 7)
    xi = y[0]
    if xi <= 0.0:
        raise ConversionError(f"compact chart requires xi > 0, got xi = {xi!r}")
    return np.concatenate([[1.0 / xi], y[1:] / xi])


def compact_array_to_primal(y) -> np.ndarray:
    y = _as_state_array(y, 7)
    lcal = y[0]
    if lcal <= 0.0:
        raise ConversionError(f"primal chart requires Lcal > 0, got Lcal = {lcal!r}")
    xi = 1.0 / lcal
    return np.concatenate([[xi], y[1:] * xi])


def primal_to_compact(state: PrimalState, s: float = 0.0) -> CompactState:
    return CompactState.from_array(s, primal_array_to_compact(state.as_array()))


def compact_to_primal(state: CompactState, r: float = 0.0) -> PrimalState:
    return PrimalState.from_array(r, compact_array_to_primal(state.as_array()))


def embed_biaxial_primal(y5) -> np.ndarray:
    """(xi, L1, L2, R1, R2) -> full 7-component state with index 3 = index 2."""
    y = _as_state_array(y5, 5)
    return np.array([y[0], y[1], y[2], y[2], y[3], y[4], y[4]])


def embed_biaxial_compact(y5) -> np.ndarray:
    y = _as_state_array(y5, 5)
    return np.array([y[0], y[1], y[2], y[2], y[3], y[4], y[4]])


def restrict_primal_to_biaxial(y7) -> np.ndarray:
    """Project a biaxially symmetric 7-state onto the 5-component layout."""
    y = _as_state_array(y7, 7)
    return np.array([y[0], y[1], 0.5 * (y[2] + y[3]), y[4], 0.5 * (y[5] + y[6])])


# ---------------------------------------------------------------------------
# conserved quantities
# ---------------------------------------------------------------------------

def conserved_c(y) -> float:
    """Biaxial first integral 2*R1*R2 - R1^2/2 + L1^2 + 2*L2^2 - xi^2.

    Constant on lambda = 0 biaxial trajectories; zero exactly on the
    Ricci-flat branch.  Accepts the 7-component layout (uses the (2,3)
    averages) or the 5-component biaxial layout.
    """
    y = np.asarray(y, dtype=float)
    if y.shape == (7,):
        y = restrict_primal_to_biaxial(y)
    xi, l1, l2, r1, r2 = _as_state_array(y, 5)
    return 2.0 * r1 * r2 - 0.5 * r1**2 + l1**2 + 2.0 * l2**2 - xi**2


def conserved_z(y, lam: float = 0.0) -> float:
    """Einstein residual; vanishes identically on the alpha = 0 branch."""
    y = np.asarray(y, dtype=float)
    if y.shape == (5,):
        y = embed_biaxial_primal(y)
    y = _as_state_array(y, 7)
    xi = y[0]
    L = y[1:4]
    R = y[4:7]
    total = 0.0
    for i, j, k in _IJK:
        total += 0.5 * R[i] ** 2 - 0.5 * (R[j] - R[k]) ** 2 + L[i] ** 2
    return total - 2.0 * lam - xi**2


def conserved_quantities(state, lam: float = 0.0) -> ConservedReport:
    """Evaluate C (when applicable), Z and xi - sum(L) for a primal state."""
    if isinstance(state, PrimalState):
        y = state.as_array()
    else:
        y = np.asarray(state, dtype=float)
        if y.shape == (5,):
            y = embed_biaxial_primal(y)
        y = _as_state_array(y, 7)
    scale = 1.0 + float(np.linalg.norm(y))
    applicable = abs(y[2] - y[3]) + abs(y[5] - y[6]) < BIAXIAL_MATCH_TOL * scale
    c = conserved_c(y) if applicable else math.nan
    return ConservedReport(
        c=c,
        c_applicable=applicable,
        z=conserved_z(y, lam),
        xi_minus_trace=float(y[0] - y[1] - y[2] - y[3]),
    )
