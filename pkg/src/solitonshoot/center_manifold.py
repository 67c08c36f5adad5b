"""Polynomial center-manifold graph of the origin of the (X, Y) subsystem.

At lambda = 0 the compact-chart equations for (X, Y) close among themselves:

    X_i' = Y_i^2/2 - (Y_j - Y_k)^2/2 - X_i + X_i Q,
    Y_i' = Y_i (X_i - X_j - X_k + Q),          Q = X_1^2 + X_2^2 + X_3^2.

The origin has the three X directions stable and the three Y directions
neutral, so there is a center manifold X_i = C_i(Y) tangent to the Y
hyperplane.  By the cyclic symmetry of the system the three graphs are
permuted copies of a single function C, symmetric in its last two
arguments:

    C_1 = C(y_1, y_2, y_3), C_2 = C(y_2, y_3, y_1), C_3 = C(y_3, y_1, y_2).

The invariance equation

    S_i(y) - C_i + C_i Q(C) = sum_m dC_i/dy_m * y_m'(C, y),
    S_i = y_i^2/2 - (y_j - y_k)^2/2,

is solved order by order; because the neutral block has zero linear part
and the stable block is -Id, the degree-m coefficients are given explicitly
by lower-order data, with no linear system to invert.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import sympy as sp

from .errors import DomainError

__all__ = [
    "CenterPoly",
    "solve_center_poly",
    "reduced_flow",
    "biaxial_expansion_check",
    "invariance_defect",
    "VALIDITY_RADIUS",
]

VALIDITY_RADIUS = 0.1
_Y = sp.symbols("y1 y2 y3")


def _cyclic(expr: sp.Expr, shift: int) -> sp.Expr:
    """Apply the cyclic substitution y_m -> y_{m+shift}."""
    y1, y2, y3 = _Y
    perm = {0: (y1, y2, y3), 1: (y2, y3, y1), 2: (y3, y1, y2)}[shift % 3]
    return expr.subs(dict(zip(_Y, perm)), simultaneous=True)


def _truncate(expr: sp.Expr, degree: int) -> sp.Poly:
    poly = sp.Poly(sp.expand(expr), *_Y)
    kept = {
        mono: coeff
        for mono, coeff in poly.terms()
        if sum(mono) <= degree
    }
    return sp.Poly.from_dict(kept, *_Y) if kept else sp.Poly(0, *_Y)


def _homogeneous_part(expr: sp.Expr, degree: int) -> sp.Expr:
    poly = sp.Poly(sp.expand(expr), *_Y)
    return sum(
        (coeff * sp.prod(y**e for y, e in zip(_Y, mono))
         for mono, coeff in poly.terms() if sum(mono) == degree),
        sp.Integer(0),
    )


@dataclass(frozen=True)
class CenterPoly:
    """Truncated center-manifold graph C and its permuted copies."""

    degree: int
    coeffs: dict  # (e1, e2, e3) -> float, for C = C_1

    def expr(self, shift: int = 0) -> sp.Expr:
        """C_{1+shift} as a sympy expression in (y1, y2, y3)."""
        base = sum(
            sp.Rational(c).limit_denominator(10**12)
            * _Y[0] ** e[0] * _Y[1] ** e[1] * _Y[2] ** e[2]
            for e, c in self.coeffs.items()
        )
        return sp.expand(_cyclic(base, shift))

    def __call__(self, y: np.ndarray) -> np.ndarray:
        """Evaluate (C_1, C_2, C_3) at a point y."""
        y = np.asarray(y, dtype=float)
        out = np.zeros(3)
        for i in range(3):
            yi = np.roll(y, -i)
            for (e1, e2, e3), c in self.coeffs.items():
                out[i] += c * yi[0] ** e1 * yi[1] ** e2 * yi[2] ** e3
        return out

    def to_json(self, path) -> None:
        payload = {
            "degree": self.degree,
            "coefficients": {
                " ".join(map(str, exps)): float(c) for exps, c in self.coeffs.items()
            },
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _exact_center_coeffs(degree: int) -> dict:
    """Coefficients of C as exact rationals, by order-by-order matching."""
    y1, y2, y3 = _Y
    s1 = y1**2 / 2 - (y2 - y3) ** 2 / 2
    c1 = sp.Integer(0)
    for m in range(2, degree + 1):
        c_list = [_cyclic(c1, k) for k in range(3)]
        q = sum(ci**2 for ci in c_list)
        yprime = [
            _Y[i] * (c_list[i] - c_list[(i + 1) % 3] - c_list[(i + 2) % 3] + q)
            for i in range(3)
        ]
        transport = sum(sp.diff(c1, _Y[i]) * yprime[i] for i in range(3))
        rhs = (s1 if m == 2 else sp.Integer(0)) + c1 * q - transport
        c1 = c1 + _homogeneous_part(rhs, m)
    poly = sp.Poly(sp.expand(c1), *_Y)
    return {tuple(mono): coeff for mono, coeff in poly.terms()}


def solve_center_poly(degree: int) -> CenterPoly:
    """Center-manifold graph up to the requested degree (2, 3 or 4).

    The degree-2 part is y1^2/2 - (y2 - y3)^2/2; odd orders vanish by the
    y -> -y symmetry of the system.
    """
    if degree not in (2, 3, 4):
        raise DomainError(f"supported center-poly degrees are 2, 3, 4; got {degree!r}")
    exact = _exact_center_coeffs(degree)
    coeffs = {exps: float(c) for exps, c in exact.items()}
    return CenterPoly(degree=degree, coeffs=coeffs)


def reduced_flow(
    poly: CenterPoly,
    y0,
    horizon: float,
    *,
    radius: float = VALIDITY_RADIUS,
    rtol: float = 1e-10,
    atol: float = 1e-12,
):
    """Integrate the reduced center-manifold dynamics y' = y (C_i - C_j - C_k + Q).

    Terminates when the trajectory leaves the validity ball of the
    polynomial approximation.  Returns the scipy integration result with
    fields t and y (shape 3 x N).
    """
    from scipy.integrate import solve_ivp

    y0 = np.asarray(y0, dtype=float)
    if np.linalg.norm(y0) > radius:
        raise DomainError(
            f"initial point lies outside the validity ball (radius {radius})"
        )

    def rhs(_s, y):
        c = poly(y)
        q = float(c @ c)
        tot = c.sum()
        return y * (2.0 * c - tot + q)

    def leave_ball(_s, y):
        return float(np.linalg.norm(y) - radius)

    leave_ball.terminal = True
    leave_ball.direction = 1.0

    return solve_ivp(
        rhs, (0.0, horizon), y0, method="RK45",
        rtol=rtol, atol=atol, dense_output=True, events=leave_ball,
    )


def invariance_defect(poly: CenterPoly, y) -> float:
    """Defect of the graph in the stable directions at a point y.

    Evaluates X' - dC/dy . y' at (C(y), y); for an exact invariant graph
    this vanishes, for the degree-d truncation it is O(|y|^(d+1)).
    """
    y = np.asarray(y, dtype=float)
    c = poly(y)
    q = float(c @ c)
    x_dot = np.empty(3)
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        x_dot[i] = 0.5 * y[i] ** 2 - 0.5 * (y[j] - y[k]) ** 2 - c[i] + c[i] * q
    tot = c.sum()
    y_dot = y * (2.0 * c - tot + q)
    grad = np.zeros((3, 3))
    for i in range(3):
        for (e1, e2, e3), cf in poly.coeffs.items():
            exps = (e1, e2, e3)
            for m in range(3):
                em = exps[(m - i) % 3]
                if em == 0:
                    continue
                term = cf * em
                for pos, e in enumerate(exps):
                    yv = y[(i + pos) % 3]
                    p = e - 1 if (i + pos) % 3 == m else e
                    term *= yv**p
                grad[i, m] += term
    return float(np.abs(x_dot - grad @ y_dot).max())


def biaxial_expansion_check(poly: CenterPoly) -> dict:
    """Restrict C to the slice y2 = y3 and compare with the known expansions.

    On the slice, C_i(y_i, y_j, y_j) = y_i^2/2 exactly at quadratic order,
    and the quadratic part of C_j is y_i y_j - y_i^2/2.
    """
    yi, yj = sp.symbols("yi yj")
    # C_1 on the slice (y1, y2, y3) = (yi, yj, yj); C_2 = C(y2, y3, y1)
    # becomes C(yj, yj, yi) there.
    c1 = poly.expr(0).subs({_Y[0]: yi, _Y[1]: yj, _Y[2]: yj})
    c2 = poly.expr(1).subs({_Y[0]: yi, _Y[1]: yj, _Y[2]: yj})
    c1_quad = _quad_part(c1, yi, yj)
    c2_quad = _quad_part(c2, yi, yj)
    dev_ci = sp.expand(c1_quad - yi**2 / 2)
    dev_cj = sp.expand(c2_quad - (yi * yj - yi**2 / 2))
    return {
        "ci_slice_quadratic": str(c1_quad),
        "cj_slice_quadratic": str(sp.expand(c2_quad)),
        "ci_deviation": str(dev_ci),
        "cj_deviation": str(dev_cj),
        "ci_exact": dev_ci == 0,
        "cj_exact": dev_cj == 0,
    }


def _quad_part(expr: sp.Expr, *symbols) -> sp.Expr:
    poly = sp.Poly(sp.expand(expr), *symbols)
    return sum(
        (coeff * sp.prod(s**e for s, e in zip(symbols, mono))
         for mono, coeff in poly.terms() if sum(mono) == 2),
        sp.Integer(0),
    )
