"""Differential of the renormalization, its real matrix, Newton iteration and certificates.

Tangent vectors are real arrays laid out as
``[Re phi_0..phi_N1, Re psi_0..psi_N2, Im phi_0..phi_N1, Im psi_0..psi_N2]``
which are the coordinates over the basis
``(l_phi^k, 0), (0, l_psi^k), (i l_phi^k, 0), (0, i l_psi^k)``.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DifferentialSingularError, SiegelRenormError
from .pairs import DET_TOL, FactorPair, initial_pair, project, projection_system
from .renorm import renormalize, rg, scaling_factor
from .series import TaylorDisk, compose, derivative, evaluate, conj_variable

log = logging.getLogger(__name__)

RG_WARMUP = 12
NEWTON_TOL = 1e-10


# coordinates


def to_vector(p: FactorPair) -> np.ndarray:
    a, b = p.phi.coeffs, p.psi.coeffs
    return np.concatenate([a.real, b.real, a.imag, b.imag])


def from_vector(x: np.ndarray, template: FactorPair) -> FactorPair:
    n1, n2 = template.phi.order + 1, template.psi.order + 1
    x = np.asarray(x, dtype=float)
    if x.size != 2 * (n1 + n2):
        raise SiegelRenormError(f"tangent vector has length {x.size}, expected {2 * (n1 + n2)}")
    re_phi, re_psi = x[:n1], x[n1 : n1 + n2]
    im_phi, im_psi = x[n1 + n2 : 2 * n1 + n2], x[2 * n1 + n2 :]
    return FactorPair(template.phi.with_coeffs(re_phi + 1j * im_phi), template.psi.with_coeffs(re_psi + 1j * im_psi))


def complex_structure(n1: int, n2: int) -> np.ndarray:
    """Real matrix of multiplication by ``i`` in tangent coordinates."""
    half = n1 + n2 + 2
    j = np.zeros((2 * half, 2 * half))
    j[half:, :half] = np.eye(half)
    j[:half, half:] = -np.eye(half)
    return j


def basis_vector(index: int, template: FactorPair) -> FactorPair:
    x = np.zeros(2 * (template.phi.order + template.psi.order + 2))
    x[index] = 1.0
    return from_vector(x, template)


# differential


@dataclass
class Linearization:
    """Compositions at a base pair reused by every application of the differential."""

    base: FactorPair
    work_order: int
    lam: complex = field(init=False)

    def __post_init__(self) -> None:
        p, w = self.base, self.work_order
        self.lam = lam = scaling_factor(p)
        sq = lam * lam
        u_bar = p.phi.domain.conjugate()
        v_bar = p.psi.domain.conjugate()
        self.lin_u = TaylorDisk.from_polynomial([0.0, sq], u_bar, w)
        self.id_u = TaylorDisk.identity(u_bar, w)
        self.lin_v = TaylorDisk.from_polynomial([0.0, sq], v_bar, w)
        self.id_v = TaylorDisk.identity(v_bar, w)
        dphi, dpsi = derivative(p.phi), derivative(p.psi)
        self.inner = compose(p.psi, self.lin_u, order=w, check_range=False)
        self.inner_d = compose(dpsi, self.lin_u, order=w, check_range=False)
        self.square = self.inner * self.inner
        self.outer = compose(p.phi, self.square, order=w, check_range=False)
        self.outer_d = compose(dphi, self.square, order=w, check_range=False)
        self.phi_v = compose(p.phi, self.lin_v, order=w, check_range=False)
        self.phi_v_d = compose(dphi, self.lin_v, order=w, check_range=False)
        self.renormalized = FactorPair(
            conj_variable(self.outer / lam).truncate(p.phi.order),
            conj_variable(self.phi_v / lam).truncate(p.psi.order),
        )
        self.projected, self.coeffs = project(self.renormalized)

    def renorm_apply(self, d: FactorPair) -> FactorPair:
        """Differential of the unprojected renormalization along ``d``."""
        p, w, lam = self.base, self.work_order, self.lam
        u, v = d.phi, d.psi
        dlam = complex(evaluate(u, 0.0))
        # moving lam moves the inner argument lam**2 z by 2 lam dlam z
        shift = 2 * lam * dlam
        u_sq = compose(u, self.square, order=w, check_range=False)
        v_in = compose(v, self.lin_u, order=w, check_range=False)
        d_inner = v_in + self.inner_d * self.id_u * shift
        d_outer = u_sq + self.outer_d * 2 * self.inner * d_inner
        d_f = (d_outer - self.outer * (dlam / lam)) / lam
        u_v = compose(u, self.lin_v, order=w, check_range=False)
        d_g = (u_v + self.phi_v_d * self.id_v * shift - self.phi_v * (dlam / lam)) / lam
        return FactorPair(
            conj_variable(d_f).truncate(p.phi.order),
            conj_variable(d_g).truncate(p.psi.order),
        )

    def apply(self, d: FactorPair) -> FactorPair:
        return projection_differential(self.renormalized, self.renorm_apply(d))


def projection_differential(p: FactorPair, d: FactorPair) -> FactorPair:
    """Derivative of the projection at ``p`` along ``d``.

    The shift ``c`` moves by ``-v(0)`` so the normalised value stays 1; the
    correction ``(a, b)`` moves by the solution of the linearised 2x2 system.
    """
    m, rhs, c, s = projection_system(p)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if abs(det) <= DET_TOL:
        raise DifferentialSingularError(f"linearised projection is singular (|det| = {abs(det):.3g})")
    a, b = np.linalg.solve(m, rhs)
    phi, psi_hat = p.phi, p.psi + c
    u, v = d.phi, d.psi
    dc = -complex(evaluate(v, 0.0))
    v_hat = v + dc
    dphi, dpsi, ddpsi = derivative(phi), derivative(psi_hat), derivative(psi_hat, 2)
    du, dv = derivative(u), derivative(v)
    p0, p1 = complex(evaluate(phi, 0.0)), complex(evaluate(dphi, 0.0))
    q0 = p0 * p0
    dp0, dp1 = complex(evaluate(u, 0.0)), complex(evaluate(du, 0.0))
    ds0 = complex(evaluate(dpsi, 0.0))
    dphi_hat_s = complex(evaluate(dphi, s * s)) + 2 * a * s * s + 3 * b * s**4
    g1 = evaluate(u, s * s) - evaluate(v_hat, q0) - evaluate(dpsi, q0) * 2 * p0 * dp0
    g2 = (
        evaluate(du, s * s) * s * ds0
        + dphi_hat_s * s * complex(evaluate(dv, 0.0))
        - evaluate(dv, q0) * p0 * p1
        - evaluate(ddpsi, q0) * 2 * p0 * dp0 * p0 * p1
        - evaluate(dpsi, q0) * (dp0 * p1 + p0 * dp1)
    )
    da, db = np.linalg.solve(m, -np.array([g1, g2], dtype=complex))
    poly = TaylorDisk.from_polynomial([0.0, 0.0, da, db], phi.domain, phi.order)
    return FactorPair(u + poly, v_hat)


def differential_apply(p: FactorPair, d: FactorPair, work_order: int | None = None) -> FactorPair:
    """Real-linear (indeed anti-linear) differential of renormalize-then-project at ``p``."""
    w = work_order or max(p.orders)
    return Linearization(p, w).apply(d)


@dataclass(frozen=True)
class DifferentialMatrix:
    matrix: np.ndarray
    n1: int
    n2: int

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


def build_L0(p: FactorPair, n1: int | None = None, n2: int | None = None, workers: int = 1) -> DifferentialMatrix:
    """Column ``k`` is the differential applied to basis vector ``k``, flattened."""
    n1 = p.phi.order if n1 is None else n1
    n2 = p.psi.order if n2 is None else n2
    base = FactorPair(p.phi.truncate(n1), p.psi.truncate(n2))
    lin = Linearization(base, max(n1, n2))
    size = 2 * (n1 + n2 + 2)
    out = np.empty((size, size))

    def column(k: int) -> np.ndarray:
        return to_vector(lin.apply(basis_vector(k, base)))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for k, col in enumerate(pool.map(column, range(size))):
                out[:, k] = col
    else:
        for k in range(size):
            out[:, k] = column(k)
    return DifferentialMatrix(out, n1, n2)


# Newton map and fixed point


def rg_vector(x: np.ndarray, template: FactorPair) -> np.ndarray:
    return to_vector(rg(from_vector(x, template))[0])


@dataclass
class NewtonMap:
    """``zeta -> zeta + F(x0 + M zeta) - (x0 + M zeta)`` with ``M = (I - L0)^-1``."""

    base: FactorPair
    L0: DifferentialMatrix
    residual_tol: float = 1e-8

    def __post_init__(self) -> None:
        self.x0 = to_vector(self.base)
        a = np.eye(self.L0.size) - self.L0.matrix
        self._lu = scipy.linalg.lu_factor(a, check_finite=True)
        probe = np.ones(self.L0.size)
        res = np.abs(a @ self.solve(probe) - probe).sum() / probe.size
        if not np.isfinite(res) or res > self.residual_tol:
            raise SiegelRenormError(f"I - L0 is numerically singular (solve residual {res:.3g})")

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return scipy.linalg.lu_solve(self._lu, rhs)

    def point(self, zeta: np.ndarray) -> np.ndarray:
        return self.x0 + self.solve(zeta)

    def __call__(self, zeta: np.ndarray) -> np.ndarray:
        x = self.point(zeta)
        return zeta + rg_vector(x, self.base) - x


def newton_map(p0: FactorPair, L0: DifferentialMatrix, zeta: np.ndarray) -> np.ndarray:
    return NewtonMap(p0, L0)(zeta)


@dataclass
class FixedPointResult:
    pair: FactorPair
    lam: complex
    converged: bool
    iterations: int
    steps: list[float]
    history: list[FactorPair]
    elapsed: float


def solve_fixed_point(
    n1: int = 40,
    n2: int = 50,
    warmup: int = RG_WARMUP,
    max_iters: int = 25,
    tol: float = NEWTON_TOL,
    workers: int = 1,
    start: FactorPair | None = None,
    keep_history: bool = False,
) -> FixedPointResult:
    """Warm up with plain renormalization, then switch to Newton steps.

    Every iteration (warm-up or Newton) counts against ``max_iters``;
    convergence means an l1 step below ``tol``.
    """
    t0 = time.perf_counter()
    p = start if start is not None else initial_pair(n1, n2)
    steps: list[float] = []
    history: list[FactorPair] = []
    it = 0
    converged = False
    while it < max_iters:
        if it < warmup:
            q = rg(p)[0]
        else:
            lin = Linearization(p, max(n1, n2))
            size = 2 * (n1 + n2 + 2)
            l0 = build_L0(p, workers=workers).matrix
            x = to_vector(p)
            f = to_vector(lin.projected)
            dx = np.linalg.solve(np.eye(size) - l0, f - x)
            q = from_vector(x + dx, p)
        step = (q - p).l1()
        it += 1
        steps.append(step)
        if keep_history:
            history.append(q)
        log.info("iteration %d: step %.3e lambda %s", it, step, scaling_factor(q))
        p = q
        if it > warmup and step < tol:
            converged = True
            break
    return FixedPointResult(p, scaling_factor(p), converged, it, steps, history, time.perf_counter() - t0)


# certificate


@dataclass(frozen=True)
class Certificate:
    epsilon: float
    contraction: float
    delta: float
    verdict: bool

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "contraction": self.contraction, "delta": self.delta, "verdict": self.verdict}


def certify(
    p0: FactorPair,
    L0: DifferentialMatrix,
    delta: float,
    seed: int = 0,
    points: int = 8,
    directions: int = 16,
    safety: float = 2.0,
    fd_step: float | None = None,
) -> Certificate:
    """Contraction-mapping certificate for the Newton map on the l1 ball of radius ``delta``.

    ``epsilon`` is the size of the first Newton image; the contraction bound is a
    sampled estimate of the derivative norm of the Newton map, scaled by ``safety``.
    """
    nm = NewtonMap(p0, L0)
    epsilon = float(np.abs(nm(np.zeros(L0.size))).sum())
    if not delta > 0:
        return Certificate(epsilon, float("inf"), float(delta), False)
    rng = np.random.default_rng(seed)
    centers = [np.zeros(L0.size)]
    for _ in range(points):
        d = rng.standard_normal(L0.size)
        centers.append(delta * d / np.abs(d).sum())
    h = fd_step if fd_step is not None else min(1e-6, delta)
    worst = 0.0
    for z in centers:
        for _ in range(directions):
            d = rng.standard_normal(L0.size)
            d /= np.abs(d).sum()
            diff = (nm(z + h * d) - nm(z - h * d)) / (2 * h)
            worst = max(worst, float(np.abs(diff).sum()))
    contraction = safety * worst
    verdict = bool(epsilon < (1.0 - contraction) * delta)
    return Certificate(epsilon, contraction, float(delta), verdict)
