"""Renormalization of factor pairs and its composition with the projection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateScalingError
from .pairs import FactorPair, ProjectionCoeffs, project
from .series import TaylorDisk, compose, conj_variable, evaluate

LAMBDA_MIN = 1e-8
INCLUSION_SAMPLES = 256


@dataclass(frozen=True)
class RenormalizabilityReport:
    inc1_ok: bool
    inc2_ok: bool
    inc3_ok: bool
    inc1_margin: float
    inc2_margin: float
    inc3_margin: float

    @property
    def ok(self) -> bool:
        return self.inc1_ok and self.inc2_ok and self.inc3_ok


def scaling_factor(p: FactorPair) -> complex:
    """The rescaling ``eta(0) = phi(0)``."""
    return complex(evaluate(p.phi, 0.0))


def _margin(points: np.ndarray, disk) -> float:
    return float(disk.radius - np.max(np.abs(points - disk.center)))


def check_renormalizable(p: FactorPair, samples: int = INCLUSION_SAMPLES, lam: complex | None = None) -> RenormalizabilityReport:
    """Sampled compact-inclusion margins of the three renormalizability conditions.

    With ``Z`` and ``W`` the square-root preimages of the factor disks, the
    inclusions reduce to statements about the factor disks themselves:
    ``lam**2 conj(V)`` inside ``U``, ``lam**2 conj(U)`` inside ``V``, and
    ``psi(lam**2 conj(U))**2`` inside ``U``.  Margins are signed distances.
    """
    lam = scaling_factor(p) if lam is None else complex(lam)
    u, v = p.phi.domain, p.psi.domain
    sq = lam * lam
    m1 = _margin(sq * np.conj(v.boundary(samples)), u)
    m2 = _margin(sq * np.conj(u.boundary(samples)), v)
    inner = sq * np.conj(u.boundary(samples))
    # inc3 is only meaningful once the inner points land where psi is defined
    if m2 > 0:
        m3 = _margin(np.square(evaluate(p.psi, inner)), u)
    else:
        m3 = -np.inf
    return RenormalizabilityReport(m1 > 0, m2 > 0, m3 > 0, m1, m2, float(m3))


def renormalize(p: FactorPair, work_order: int | None = None) -> FactorPair:
    """Rescaled, conjugated return pair ``(eta o xi, eta)`` re-expanded on the same disks.

    In factor form the new factors are
    ``conj(phi(psi(lam**2 conj z)**2) / lam)`` and ``conj(phi(lam**2 conj z) / lam)``.
    """
    lam = scaling_factor(p)
    if abs(lam) < LAMBDA_MIN:
        raise DegenerateScalingError(f"scaling factor too small: |lambda| = {abs(lam):.3g}")
    n1, n2 = p.orders
    w = work_order or max(n1, n2)
    u_bar = p.phi.domain.conjugate()
    v_bar = p.psi.domain.conjugate()
    sq = lam * lam

    inner = compose(p.psi, TaylorDisk.from_polynomial([0.0, sq], u_bar, w), order=w, check_range=False)
    outer = compose(p.phi, inner * inner, order=w, check_range=False) / lam
    new_phi = conj_variable(outer).truncate(n1)

    lin_v = TaylorDisk.from_polynomial([0.0, sq], v_bar, w)
    new_psi = conj_variable(compose(p.phi, lin_v, order=w, check_range=False) / lam).truncate(n2)
    return FactorPair(new_phi, new_psi)


def rg(p: FactorPair) -> tuple[FactorPair, ProjectionCoeffs, complex]:
    """Renormalize then project; returns the scaling factor of the input pair."""
    lam = scaling_factor(p)
    pair, coeffs = project(renormalize(p))
    return pair, coeffs, lam
