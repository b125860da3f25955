"""Certified analytic bounds on the bound-state count and existence.

Two independent, non-FEM routes to spectral information:

* a Dirichlet-box lower bound on the number of bound states: inscribing
  a rotated box in the guide and minimizing its explicit eigenvalues
  over the box width gives every index j whose box eigenvalue stays
  below the essential-spectrum threshold 1,
* a variational existence certificate: an explicit trial function on
  the reference strip whose energy quotient drops below the threshold,
  certifying at least one bound state for every opening angle.

Both are evaluated with explicit formulas plus high-order quadrature —
no matrices, no eigensolver — so they cross-validate the FEM spectrum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "box_eigenvalue",
    "optimal_alpha",
    "BoxBound",
    "box_bound",
    "CountBound",
    "count_lower_bound",
    "smooth_step",
    "plateau_window",
    "CertificateTerms",
    "certificate_terms",
    "QuadratureConvergenceError",
    "existence_certificate",
    "minimal_certificate_n",
]


def box_eigenvalue(theta: float, j: int, alpha: float) -> float:
    """j-th eigenvalue of the Dirichlet box inscribed in the guide:

        cos^2(theta) / (4 (1 - alpha sin(theta))^2) + j^2 / alpha^2

    where alpha is the box half-width in units of pi.  By domain
    monotonicity this dominates the j-th guide eigenvalue.
    """
    if not 0.0 < theta < math.pi / 2.0:
        raise ValueError("theta must lie in (0, pi/2)")
    if j < 1:
        raise ValueError("j must be >= 1")
    if not 0.0 < alpha < 1.0 / math.sin(theta):
        raise ValueError(
            f"alpha = {alpha} outside the admissible interval (0, {1.0 / math.sin(theta)})"
        )
    c = math.cos(theta)
    return c * c / (4.0 * (1.0 - alpha * math.sin(theta)) ** 2) + j * j / (alpha * alpha)


def optimal_alpha(theta: float, j: int) -> float:
    """Asymptotically optimal box half-width 4^(1/3) j^(2/3) sin^(-1/3)(theta).

    Inadmissible (>= 1/sin(theta)) exactly when the reduced variable
    Z = 4^(1/3) j^(2/3) sin^(2/3)(theta) reaches 1, in which case the
    box argument certifies nothing for this (theta, j).
    """
    if not 0.0 < theta < math.pi / 2.0:
        raise ValueError("theta must lie in (0, pi/2)")
    if j < 1:
        raise ValueError("j must be >= 1")
    s = math.sin(theta)
    alpha = 4.0 ** (1.0 / 3.0) * j ** (2.0 / 3.0) * s ** (-1.0 / 3.0)
    if alpha >= 1.0 / s:
        raise ValueError(
            f"optimal box width inadmissible for theta={theta}, j={j}: "
            "the box bound carries no information here"
        )
    return alpha


@dataclass(frozen=True)
class BoxBound:
    """One evaluated box bound, with the derived quantities attached."""

    theta: float
    j: int
    alpha: float
    beta: float
    lambda_box: float
    z: float
    z_root: float


def box_bound(theta: float, j: int, alpha: float | None = None) -> BoxBound:
    """Assemble the full box-bound record; alpha defaults to the
    asymptotic minimizer."""
    if alpha is None:
        alpha = optimal_alpha(theta, j)
    lam = box_eigenvalue(theta, j, alpha)
    s, c = math.sin(theta), math.cos(theta)
    beta = (1.0 - alpha * s) / c
    z = 4.0 ** (1.0 / 3.0) * j ** (2.0 / 3.0) * s ** (2.0 / 3.0)
    return BoxBound(theta, j, alpha, beta, lam, z, _critical_z())


def _critical_z() -> float:
    """First root in (0, 1) of (1/4)(1/(1-Z)^2 + Z) = 1, by bisection.

    The left side is strictly increasing on (0, 1), so the root is
    unique; the box eigenvalue at the optimal width stays below the
    threshold exactly for Z below this root.
    """

    def excess(z: float) -> float:
        return 0.25 * (1.0 / (1.0 - z) ** 2 + z) - 1.0

    lo, hi = 0.0, 1.0 - 1e-9
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


class CountBound(NamedTuple):
    j_min: int
    z_root: float


def count_lower_bound(theta: float) -> CountBound:
    """Certified lower bound on the number of bound states.

    Counts the indices j for which the reduced variable
    Z(j) = 4^(1/3) j^(2/3) sin^(2/3)(theta) stays at or below the
    critical root, checking the inequality explicitly at the floor
    candidate and its successor rather than trusting rounded constants.
    Grows like 0.16 / sin(theta) as the angle closes.
    """
    if not 0.0 < theta < math.pi / 2.0:
        raise ValueError("theta must lie in (0, pi/2)")
    z_root = _critical_z()
    s = math.sin(theta)

    def admissible(j: int) -> bool:
        return j >= 1 and 4.0 ** (1.0 / 3.0) * j ** (2.0 / 3.0) * s ** (2.0 / 3.0) <= z_root

    j = max(0, math.floor(z_root**1.5 / (2.0 * s)))
    while admissible(j + 1):
        j += 1
    while j > 0 and not admissible(j):
        j -= 1
    return CountBound(j, z_root)


# ---------------------------------------------------------------------------
# Variational existence certificate on the reference strip.
#
# Trial function: psi_n(x, y) = ramp(x/n) sin(y), a slowly released
# transverse ground mode, plus a corner perturbation
# phi(x, y) = w(x) f(y) with f(y) = w(y - pi) cos(y - pi), where w is a
# plateau window supported in (-pi, 0).  The quadratic form per unit
# coupling is evaluated by panelized Gauss-Legendre quadrature over the
# corner triangle {-pi < x < 0, 0 < y < x + pi} and the strip
# {0 < x < n, 0 < y < pi}; beyond x = n the transverse integral of
# cos(2y) vanishes identically, so the tail contributes nothing.
# ---------------------------------------------------------------------------


def smooth_step(s):
    """C^2 ramp: 1 for s <= 0, 0 for s >= 1, 1 - s^3(10 - 15s + 6s^2)
    between (the quintic smoothstep, flat to second order at both ends)."""
    arr = np.asarray(s, dtype=float)
    t = np.clip(arr, 0.0, 1.0)
    out = 1.0 - t**3 * (10.0 - 15.0 * t + 6.0 * t * t)
    if arr.ndim == 0:
        return float(out)
    return out


def _smooth_step_deriv(s):
    arr = np.asarray(s, dtype=float)
    inside = (arr > 0.0) & (arr < 1.0)
    t = np.where(inside, arr, 0.5)
    out = np.where(inside, -30.0 * t * t * (1.0 - t) ** 2, 0.0)
    return out


_THIRD = math.pi / 3.0


def plateau_window(x):
    """C^2 window supported in (-pi, 0): ramps up on the first third,
    holds 1 on the middle third, ramps down on the last third."""
    arr = np.asarray(x, dtype=float)
    up = smooth_step((-2.0 * _THIRD - arr) / _THIRD)
    down = smooth_step((arr + _THIRD) / _THIRD)
    out = np.where(arr < -2.0 * _THIRD, up, np.where(arr > -_THIRD, down, 1.0))
    out = np.where((arr <= -math.pi) | (arr >= 0.0), 0.0, out)
    if arr.ndim == 0:
        return float(out)
    return out


def _plateau_window_deriv(x):
    arr = np.asarray(x, dtype=float)
    up = _smooth_step_deriv((-2.0 * _THIRD - arr) / _THIRD) * (-1.0 / _THIRD)
    down = _smooth_step_deriv((arr + _THIRD) / _THIRD) * (1.0 / _THIRD)
    out = np.where(arr < -2.0 * _THIRD, up, np.where(arr > -_THIRD, down, 0.0))
    out = np.where((arr <= -math.pi) | (arr >= 0.0), 0.0, out)
    return out


def _transverse_factor(y):
    """f(y) = w(y - pi) cos(y - pi) and its derivative."""
    shifted = np.asarray(y, dtype=float) - math.pi
    w = plateau_window(shifted)
    dw = _plateau_window_deriv(shifted)
    f = w * np.cos(shifted)
    df = dw * np.cos(shifted) - w * np.sin(shifted)
    return f, df


class QuadratureConvergenceError(RuntimeError):
    """Panel quadrature failed to settle: doubling the point count moved
    the value by more than the tolerance."""


def _gauss_panel(a: float, b: float, m: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(m)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * nodes, half * weights


def _form_value(theta: float, n: int, eps: float, m: int) -> float:
    """Energy excess of the trial function: the anisotropic Dirichlet
    form minus the squared norm, by tensor Gauss-Legendre on panels that
    keep every cutoff piece smooth."""
    t2 = math.tan(theta) ** 2

    def excess_density(x, y):
        # v = psi_n + eps * phi with the closed-form derivatives.
        s = x / n
        ramp = smooth_step(s)
        dramp = _smooth_step_deriv(s) / n
        sin_y, cos_y = np.sin(y), np.cos(y)
        v = ramp * sin_y
        vx = dramp * sin_y
        vy = ramp * cos_y
        if eps != 0.0:
            f, df = _transverse_factor(y)
            w = plateau_window(x)
            dw = _plateau_window_deriv(x)
            v = v + eps * w * f
            vx = vx + eps * dw * f
            vy = vy + eps * w * df
        return t2 * vx * vx + vy * vy - v * v

    total = 0.0
    # Corner triangle {-pi < x < 0, 0 < y < x + pi}: the window
    # breakpoints -2pi/3 and -pi/3 land on the slanted edge at y = pi/3
    # and 2pi/3, splitting the region into three full rectangles and
    # three slant-cut cells.
    xb = [-math.pi, -2.0 * _THIRD, -_THIRD, 0.0]
    yb = [0.0, _THIRD, 2.0 * _THIRD]
    rects = [
        (xb[1], xb[2], 0.0, yb[1]),
        (xb[2], xb[3], 0.0, yb[1]),
        (xb[2], xb[3], yb[1], yb[2]),
    ]
    for x0, x1, y0, y1 in rects:
        gx, wx = _gauss_panel(x0, x1, m)
        gy, wy = _gauss_panel(y0, y1, m)
        vals = excess_density(gx[:, None], gy[None, :])
        total += float(wx @ vals @ wy)
    for k in range(3):
        # Cell with x in (xb[k], xb[k+1]), y from yb[k] up to the slant.
        gx, wx = _gauss_panel(xb[k], xb[k + 1], m)
        gt, wt = _gauss_panel(0.0, 1.0, m)
        y_lo = yb[k]
        height = (gx + math.pi - y_lo)[:, None]
        y = y_lo + height * gt[None, :]
        vals = excess_density(gx[:, None], y) * height
        total += float(wx @ vals @ wt)
    # Strip {0 < x < n, 0 < y < pi}: the ramp releases over (0, n).
    gx, wx = _gauss_panel(0.0, float(n), m)
    gy, wy = _gauss_panel(0.0, math.pi, m)
    vals = excess_density(gx[:, None], gy[None, :])
    total += float(wx @ vals @ wy)
    return total


def _converged_form_value(theta: float, n: int, eps: float, m: int = 20) -> float:
    coarse = _form_value(theta, n, eps, m)
    fine = _form_value(theta, n, eps, 2 * m)
    if abs(coarse - fine) > 1e-8:
        raise QuadratureConvergenceError(
            f"quadrature disagreement {abs(coarse - fine):.2e} at {m} vs {2 * m} points"
        )
    return fine


@dataclass(frozen=True)
class CertificateTerms:
    """Pieces of the quadratic expansion in the coupling eps:

    value(eps) = released_energy + 2 eps * cross_term + eps^2 * corner_energy.
    """

    theta: float
    n: int
    released_energy: float  # energy excess of the released mode alone; equals (10 pi/7) tan^2(theta) / (2 n)
    cross_term: float  # coupling between released mode and corner bump; negative, n-independent
    corner_energy: float  # energy excess of the corner bump alone

    @property
    def tuned_coupling(self) -> float:
        """Minimizer of the quadratic: -cross/corner (guarded)."""
        if self.corner_energy <= 0.0:
            # The bump alone is already negative-energy; any large
            # coupling certifies, take 1.
            return 1.0
        return -self.cross_term / self.corner_energy

    def value(self, eps: float) -> float:
        return self.released_energy + 2.0 * eps * self.cross_term + eps**2 * self.corner_energy


def certificate_terms(theta: float, n: int, m: int = 20) -> CertificateTerms:
    if not 0.0 < theta < math.pi / 2.0:
        raise ValueError("theta must lie in (0, pi/2)")
    if n < 1:
        raise ValueError("n must be >= 1")
    q_psi = _converged_form_value(theta, n, 0.0, m)
    q_plus = _converged_form_value(theta, n, 1.0, m)
    q_minus = _converged_form_value(theta, n, -1.0, m)
    cross = 0.25 * (q_plus - q_minus)
    corner = 0.5 * (q_plus + q_minus) - q_psi
    return CertificateTerms(theta, n, q_psi, cross, corner)


def existence_certificate(theta: float, n: int, epsilon: float | None = None) -> float:
    """Energy excess of the certified trial function; a negative return
    value proves a bound state exists at this opening angle.

    With epsilon = None the coupling is tuned to the quadratic minimum
    -cross/corner.  The released mode alone has excess
    (10 pi / 7) tan^2(theta) / (2n), positive but O(1/n); the corner
    bump buys a fixed negative cross term, so large n always certifies.
    """
    terms = certificate_terms(theta, n)
    eps = terms.tuned_coupling if epsilon is None else epsilon
    return _converged_form_value(theta, n, eps)


def minimal_certificate_n(theta: float) -> int:
    """Smallest ramp length n for which the tuned certificate is
    negative: ceil of released-rate / (cross^2/corner), from the closed
    form of the released energy."""
    terms = certificate_terms(theta, 1)
    gain = terms.cross_term**2 / terms.corner_energy
    if gain <= 0.0:
        raise ValueError("certificate cannot be driven negative: no coupling gain")
    rate = terms.released_energy  # equals K/2 with K = (10 pi/7) tan^2(theta)
    n = max(1, math.ceil(rate / gain))
    while existence_certificate(theta, n) >= 0.0:
        n += 1
    return n
