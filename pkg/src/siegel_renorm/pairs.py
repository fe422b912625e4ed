"""Symmetric almost-commuting pairs stored through their factors.

A pair ``(eta, xi)`` with critical points at the origin is kept as
``eta = phi o q2`` and ``xi = psi o q2`` where ``q2(z) = z**2``.  The
factor ``phi`` lives on the disk ``U`` and ``psi`` on ``V``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ProjectionSingularError
from .series import Disk, TaylorDisk, compose, derivative, evaluate, l1_norm

PHI_DISK = Disk(0.5672961438978619 - 0.1229664702397770j, 0.636)
PSI_DISK = Disk(-0.2188497414079558 - 0.2328147240271490j, 0.3640985354093064)
PHI_EXT_DISK = Disk(0.6 + 0.09j, 0.937)
PSI_EXT_DISK = Disk(PSI_DISK.center, 0.874)

THETA = (math.sqrt(5.0) - 1.0) / 2.0
AC_TOL = 1e-12
DET_TOL = 1e-8


@dataclass(frozen=True)
class FactorPair:
    phi: TaylorDisk
    psi: TaylorDisk

    def eta(self, z):
        return evaluate(self.phi, np.square(z))

    def xi(self, z):
        return evaluate(self.psi, np.square(z))

    @property
    def orders(self) -> tuple[int, int]:
        return self.phi.order, self.psi.order

    def __add__(self, other: FactorPair) -> FactorPair:
        return FactorPair(self.phi + other.phi, self.psi + other.psi)

    def __sub__(self, other: FactorPair) -> FactorPair:
        return FactorPair(self.phi - other.phi, self.psi - other.psi)

    def __mul__(self, scalar: complex) -> FactorPair:
        return FactorPair(self.phi * scalar, self.psi * scalar)

    __rmul__ = __mul__

    def l1(self) -> float:
        return l1_norm(self.phi) + l1_norm(self.psi)

    def zeros_like(self) -> FactorPair:
        return FactorPair(self.phi * 0, self.psi * 0)


@dataclass(frozen=True)
class CommutationResiduals:
    r0: complex
    r2: complex
    rnorm: complex

    def max_abs(self) -> float:
        return max(abs(self.r0), abs(self.r2), abs(self.rnorm))

    def almost_commuting(self, tol: float = AC_TOL) -> bool:
        return self.max_abs() < tol


@dataclass(frozen=True)
class ProjectionCoeffs:
    a: complex
    b: complex
    c: complex


def golden_quadratic(z):
    """The quadratic ``e(theta) z - e(theta) z**2 / 2`` with golden-mean rotation ``e(theta)``."""
    rot = np.exp(2j * np.pi * THETA)
    z = np.asarray(z, dtype=complex)
    return rot * z - 0.5 * rot * z * z


def golden_factor(domain: Disk, order: int) -> TaylorDisk:
    """Factor of the golden quadratic recentred at its critical point and normalised.

    With ``F(z) = P(1 + z) - 1`` the critical point sits at 0, and rescaling by
    ``s = F(0)`` gives ``F(s z) / s = f(z**2)`` with ``f`` affine and ``f(0) = 1``.
    """
    rot = np.exp(2j * np.pi * THETA)
    s = 0.5 * rot - 1.0
    return TaylorDisk.from_polynomial([(0.5 * rot - 1.0) / s, -0.5 * rot * s], domain, order)


def initial_pair(n1: int, n2: int) -> FactorPair:
    """Level-one commuting pair ``(p, p)`` built from the normalised golden quadratic.

    This is the first renormalization of the level-zero pair ``(p, id)``;
    the identity has no critical point and so has no factor representation.
    """
    return FactorPair(golden_factor(PHI_DISK, n1), golden_factor(PSI_DISK, n2))


def residuals(p: FactorPair) -> CommutationResiduals:
    """Order-zero and order-two commutation defects and the normalisation defect."""
    phi, psi = p.phi, p.psi
    dphi, dpsi = derivative(phi), derivative(psi)
    p0, s0 = evaluate(phi, 0.0), evaluate(psi, 0.0)
    r0 = evaluate(phi, s0 * s0) - evaluate(psi, p0 * p0)
    r2 = evaluate(dphi, s0 * s0) * s0 * evaluate(dpsi, 0.0) - evaluate(dpsi, p0 * p0) * p0 * evaluate(dphi, 0.0)
    return CommutationResiduals(complex(r0), complex(r2), complex(s0 - 1.0))


def first_derivative_residual(p: FactorPair) -> complex:
    """Order-one commutation defect; vanishes identically for factorised pairs."""
    d_phi, d_psi = derivative(p.phi), derivative(p.psi)
    eta0, xi0 = p.eta(0.0), p.xi(0.0)

    def d_eta(z):
        return evaluate(d_phi, z * z) * 2 * z

    def d_xi(z):
        return evaluate(d_psi, z * z) * 2 * z

    return complex(d_eta(xi0) * d_xi(0.0) - d_xi(eta0) * d_eta(0.0))


def commutator_series(p: FactorPair, order: int, radius: float | None = None) -> TaylorDisk:
    """Series of ``phi(psi(w)**2) - psi(phi(w)**2)`` in ``w = z**2`` around ``w = 0``."""
    if radius is None:
        room = p.psi.radius - abs(p.psi.center)
        radius = 0.5 * room if room > 0 else 1e-2
    w = TaylorDisk.identity(Disk(0.0, radius), order)
    inner_psi = compose(p.psi, w, order=order, check_range=False)
    inner_phi = compose(p.phi, w, order=order, check_range=False)
    left = compose(p.phi, inner_psi * inner_psi, order=order, check_range=False)
    right = compose(p.psi, inner_phi * inner_phi, order=order, check_range=False)
    return left - right


def higher_commutator_coeffs(p: FactorPair, k: int) -> list[complex]:
    """Taylor coefficients of order 0..k at the origin of ``eta o xi - xi o eta``."""
    m = k // 2
    series = commutator_series(p, max(m, 1))
    rho = series.radius
    even = [complex(series.coeffs[j] / rho**j) for j in range(m + 1)]
    out = [0j] * (k + 1)
    for j, value in enumerate(even):
        out[2 * j] = value
    return out


def projection_system(p: FactorPair) -> tuple[np.ndarray, np.ndarray, complex, complex]:
    """Matrix, right-hand side, shift ``c`` and shifted value ``psi(0) + c`` of the projection."""
    phi, psi = p.phi, p.psi
    c = 1.0 - complex(evaluate(psi, 0.0))
    psi_hat = psi + c
    dphi, dpsi = derivative(phi), derivative(psi_hat)
    s = complex(evaluate(psi_hat, 0.0))
    ds = complex(evaluate(dpsi, 0.0))
    p0 = complex(evaluate(phi, 0.0))
    p1 = complex(evaluate(dphi, 0.0))
    m = np.array(
        [
            [s**4, s**6],
            [2 * s**3 * ds, 3 * s**5 * ds],
        ],
        dtype=complex,
    )
    rhs = np.array(
        [
            evaluate(psi_hat, p0 * p0) - evaluate(phi, s * s),
            evaluate(dpsi, p0 * p0) * p0 * p1 - evaluate(dphi, s * s) * s * ds,
        ],
        dtype=complex,
    )
    return m, rhs, c, s


def add_monomials(phi: TaylorDisk, a: complex, b: complex) -> TaylorDisk:
    """``phi + a z**2 + b z**3`` on the disk of ``phi``."""
    return phi + TaylorDisk.from_polynomial([0.0, 0.0, a, b], phi.domain, phi.order)


def project(p: FactorPair, det_tol: float = DET_TOL) -> tuple[FactorPair, ProjectionCoeffs]:
    """Closest almost-commuting normalised pair along ``(a z**2 + b z**3, c)``.

    ``c`` has a closed form; given ``c`` the conditions are linear in ``(a, b)``
    because the added monomials leave ``phi(0)`` and ``phi'(0)`` unchanged.
    """
    m, rhs, c, _ = projection_system(p)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if abs(det) <= det_tol:
        raise ProjectionSingularError(f"projection system is singular (|det| = {abs(det):.3g})", complex(det))
    a = (rhs[0] * m[1, 1] - m[0, 1] * rhs[1]) / det
    b = (m[0, 0] * rhs[1] - rhs[0] * m[1, 0]) / det
    pair = FactorPair(add_monomials(p.phi, a, b), p.psi + c)
    return pair, ProjectionCoeffs(complex(a), complex(b), complex(c))
