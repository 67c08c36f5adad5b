"""Series launches from the singular orbit r -> 0.

The soliton systems are singular at r = 0; trajectories are started from a
first-order Frobenius-type series around the singular orbit and handed off
to the regular integrator at a small radius epsilon.

Triaxial launches (n = 4) write the state as a fixed singular profile plus
a correction eta,

    xi = 1/r + eta0,  L1 = 1/r + eta1,  L2 = gamma + eta2,  L3 = -gamma + eta3,
    R1 = eta4,        R2 = 1/(2r) + gamma + eta5,  R3 = 1/(2r) - gamma + eta6,

where eta solves eta' = A eta / r + K + (analytic terms vanishing at eta=0).
With A = P D P^-1 the linear slopes c of the diagonalised correction
solve (I - D) c = P^-1 K on eigendirections with eigenvalue != 1; the two
eigenvalue-1 slopes are free and encode the shooting parameters beta and
(through a linear matching condition) alpha.

Biaxial launches work the same way for any n >= 1 with the reduced
five-component correction; the normalisation is beta = lim R1/r.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DomainError
from .state_core import PrimalState, ShootParams

__all__ = [
    "SingularLinearization",
    "SeriesLaunch",
    "build_linearization",
    "first_order_coeffs",
    "launch_triaxial",
    "launch_biaxial",
    "launch",
    "biaxial_linearization",
    "biaxial_first_order_coeffs",
    "TRIAXIAL_EIGENVALUES",
]

DEFAULT_EPSILON = 1e-4

# eigenvalues of the 7x7 singular linearisation, in the order of D
TRIAXIAL_EIGENVALUES = (-2.0, -2.0, -1.0, -1.0, 0.0, 1.0, 1.0)

_A = np.array(
    [
        [0.0, -2.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [-1.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, -1.0, 0.0, 0.5, 0.5, -0.5],
        [0.0, 0.0, 0.0, -1.0, 0.5, -0.5, 0.5],
        [0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
        [0.0, -0.5, 0.5, -0.5, 0.0, -1.0, 0.0],
        [0.0, -0.5, -0.5, 0.5, 0.0, 0.0, -1.0],
    ]
)

_P = np.array(
    [
        [1.0, 1.0, 0.0, 0.0, 0.0, 8.0, 0.0],
        [1.0, 1.0, 0.0, 0.0, 0.0, -4.0, 0.0],
        [0.5, -0.5, 0.0, 1.0, -1.0, 0.0, 0.25],
        [-0.5, 0.5, 0.0, 1.0, 1.0, 0.0, 0.25],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        [0.0, 1.0, 1.0, 0.0, -1.0, 1.0, 0.0],
        [1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0],
    ]
)

_PINV = np.array(
    [
        [1.0 / 6.0, 1.0 / 3.0, 0.25, -0.25, 0.0, -0.25, 0.25],
        [1.0 / 6.0, 1.0 / 3.0, -0.25, 0.25, 0.0, 0.25, -0.25],
        [-0.25, -0.25, 0.0, 0.0, 0.0, 0.5, 0.5],
        [0.0, 0.0, 0.5, 0.5, -0.25, 0.0, 0.0],
        [0.0, 0.0, -0.25, 0.25, 0.0, -0.25, 0.25],
        [1.0 / 12.0, -1.0 / 12.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
    ]
)


@dataclass(frozen=True)
class SingularLinearization:
    """Constant data of the singular startup system: A = P D P^-1 and K."""

    A: np.ndarray
    K: np.ndarray
    D: np.ndarray
    P: np.ndarray
    Pinv: np.ndarray

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.diagonal(self.D)


@dataclass(frozen=True)
class SeriesLaunch:
    """A launched trajectory: slopes of the series and the handoff state."""

    params: ShootParams
    epsilon: float
    eta_slope: np.ndarray  # diagonalised (tilde) slopes, 7 components
    state_at_eps: PrimalState


def build_linearization(lam: float = 0.0, gamma: float = 0.0) -> SingularLinearization:
    """Assemble A, K(lam, gamma), D, P, P^-1 of the triaxial startup system."""
    k = np.array(
        [
            -lam - 2.0 * gamma**2,
            -lam - 2.0 * gamma**2,
            -lam,
            -lam,
            0.0,
            2.0 * gamma**2,
            2.0 * gamma**2,
        ]
    )
    return SingularLinearization(
        A=_A.copy(), K=k, D=np.diag(TRIAXIAL_EIGENVALUES), P=_P.copy(), Pinv=_PINV.copy()
    )


def first_order_coeffs(lin: SingularLinearization, alpha: float, beta: float) -> np.ndarray:
    """Slopes c of the diagonalised correction eta_tilde ~ c * r.

    Determined components solve (I - D) c = P^-1 K; the eigenvalue-1
    component aligned with R1 carries beta directly and the remaining free
    component is fixed by the linear matching condition
    alpha = slope of (xi - L1 - L2 - L3).
    """
    d = lin.eigenvalues
    k = lin.Pinv @ lin.K
    c = np.zeros(7)
    for i in range(7):
        if d[i] != 1.0:
            c[i] = k[i] / (1.0 - d[i])
    # slope of xi - L1 - L2 - L3 in the original coordinates is v . c
    v = lin.P[0] - lin.P[1] - lin.P[2] - lin.P[3]
    c[6] = beta
    c[5] = (alpha - v @ c) / v[5]
    return c


def _triaxial_base(r: float, gamma: float) -> np.ndarray:
    return np.array(
        [
            1.0 / r,
            1.0 / r,
            gamma,
            -gamma,
            0.0,
            0.5 / r + gamma,
            0.5 / r - gamma,
        ]
    )


def launch_triaxial(params: ShootParams, epsilon: float = DEFAULT_EPSILON) -> SeriesLaunch:
    """Launch an n = 4 trajectory with direction (alpha, beta, gamma)."""
    if params.n != 4:
        raise DomainError("triaxial launches require n = 4")
    if not (0.0 < epsilon <= 0.01):
        raise DomainError(f"epsilon must lie in (0, 0.01], got {epsilon!r}")
    lin = build_linearization(params.lam, params.gamma)
    c = first_order_coeffs(lin, params.alpha, params.beta)
    eta = (lin.P @ c) * epsilon
    y = _triaxial_base(epsilon, params.gamma) + eta
    return SeriesLaunch(
        params=params,
        epsilon=epsilon,
        eta_slope=c,
        state_at_eps=PrimalState.from_array(epsilon, y),
    )


# ---------------------------------------------------------------------------
# biaxial startup (general n)
# ---------------------------------------------------------------------------

def biaxial_linearization(n: int, lam: float = 0.0):
    """Matrix A_b and constant K_b of the reduced startup system.

    Correction ordering (eta0, eta1, eta2, eta4, eta5) for
    xi = 1/r + eta0, L1 = 1/r + eta1, L2 = eta2, R1 = eta4,
    R2 = 2/(n r) + eta5.
    """
    two_n = 2.0 / n
    a = np.array(
        [
            [0.0, -2.0, 0.0, 0.0, 0.0],
            [-1.0, -1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, -1.0, two_n, 0.0],
            [0.0, 0.0, 0.0, 1.0, 0.0],
            [0.0, -two_n, 0.0, 0.0, -1.0],
        ]
    )
    k = np.array([-lam, -lam, -lam, 0.0, 0.0])
    return a, k


def biaxial_first_order_coeffs(n: int, lam: float, alpha: float, beta: float) -> np.ndarray:
    """Slopes of the reduced correction, fixed by alpha and beta.

    Solves (I - A_b) c = K_b; the two-dimensional solution family is pinned
    by beta = slope of R1 and alpha = slope of (xi - L1 - 2 L2).
    """
    a_mat, k = biaxial_linearization(n, lam)
    m = np.eye(5) - a_mat
    c_part, *_ = np.linalg.lstsq(m, k, rcond=None)
    if np.linalg.norm(m @ c_part - k) > 1e-10 * (1.0 + np.linalg.norm(k)):
        raise DomainError("inconsistent startup slope system")  # pragma: no cover
    w = scipy.linalg.null_space(m)
    if w.shape[1] != 2:  # pragma: no cover
        raise DomainError("unexpected kernel dimension in startup slope system")
    # alpha matching direction: slope of xi - L1 - 2 L2
    a_vec = np.array([1.0, -1.0, -2.0, 0.0, 0.0])
    b_vec = np.array([0.0, 0.0, 0.0, 1.0, 0.0])
    mat = np.array([a_vec @ w, b_vec @ w])
    rhs = np.array([alpha - a_vec @ c_part, beta - b_vec @ c_part])
    t = np.linalg.solve(mat, rhs)
    return c_part + w @ t


def launch_biaxial(params: ShootParams, epsilon: float = DEFAULT_EPSILON) -> SeriesLaunch:
    """Launch a biaxial (gamma = 0) trajectory for any n >= 1."""
    if params.gamma != 0.0:
        raise DomainError("biaxial launches require gamma = 0")
    if not (0.0 < epsilon <= 0.01):
        raise DomainError(f"epsilon must lie in (0, 0.01], got {epsilon!r}")
    c5 = biaxial_first_order_coeffs(params.n, params.lam, params.alpha, params.beta)
    base = np.array([1.0 / epsilon, 1.0 / epsilon, 0.0, 0.0, 0.0, 0.0, 0.0])
    base[5] = base[6] = 2.0 / (params.n * epsilon)
    eta7 = np.array([c5[0], c5[1], c5[2], c5[2], c5[3], c5[4], c5[4]]) * epsilon
    y = base + eta7
    return SeriesLaunch(
        params=params,
        epsilon=epsilon,
        eta_slope=np.array([c5[0], c5[1], c5[2], c5[2], c5[3], c5[4], c5[4]]),
        state_at_eps=PrimalState.from_array(epsilon, y),
    )


def launch(params: ShootParams, epsilon: float = DEFAULT_EPSILON) -> SeriesLaunch:
    """Dispatch to the biaxial or triaxial launch based on gamma."""
    if params.gamma == 0.0:
        return launch_biaxial(params, epsilon)
    return launch_triaxial(params, epsilon)
