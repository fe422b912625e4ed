"""Spectrum of the differential matrix, projected contraction, invariant lines and cone fields."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import BasisError, DegenerateLineError, SpectralError
from .newton import DifferentialMatrix
from .pairs import PHI_DISK, FactorPair
from .renorm import scaling_factor
from .series import derivative, evaluate

ALPHA_0 = math.acos(0.71)
ALPHA_SQ = math.acos(0.5967)
CONE_RAYS = 64
CONE_MARGIN = 1e-3


# spectrum


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    unstable: tuple[complex, ...]
    pairing_defect: float
    max_stable_modulus: float

    @property
    def unstable_pairs(self) -> int:
        return len(self.unstable) // 2


def pairing_defect(eigenvalues: np.ndarray) -> float:
    """Greedy matching of each eigenvalue with the closest unmatched negated partner."""
    ev = list(np.asarray(eigenvalues, dtype=complex))
    order = np.argsort(-np.abs(ev), kind="stable")
    used = np.zeros(len(ev), dtype=bool)
    worst = 0.0
    for i in order:
        if used[i]:
            continue
        used[i] = True
        cand = [j for j in range(len(ev)) if not used[j]]
        if not cand:
            worst = max(worst, abs(2 * ev[i]))
            break
        dist = [abs(ev[i] + ev[j]) for j in cand]
        k = int(np.argmin(dist))
        used[cand[k]] = True
        worst = max(worst, dist[k])
    return float(worst)


def spectrum(L0: DifferentialMatrix | np.ndarray) -> SpectrumReport:
    """Eigenvalues sorted by decreasing modulus, the unstable ones and the pairing defect."""
    m = L0.matrix if isinstance(L0, DifferentialMatrix) else np.asarray(L0, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise SpectralError("matrix must be square")
    try:
        ev = scipy.linalg.eigvals(m)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SpectralError(str(exc)) from exc
    if not np.all(np.isfinite(ev)):
        raise SpectralError("eigensolver returned non-finite values")
    ev = ev[np.lexsort((ev.imag, ev.real, -np.round(np.abs(ev), 12)))]
    mod = np.abs(ev)
    unstable = tuple(complex(x) for x in ev[mod > 1.0])
    stable = mod[mod <= 1.0]
    return SpectrumReport(ev, unstable, pairing_defect(ev), float(stable.max()) if stable.size else 0.0)


def power_iteration(a: np.ndarray, iters: int = 2000, tol: float = 1e-14, seed: int = 0) -> float:
    """Dominant eigenvalue modulus by normalised power iteration with a Rayleigh quotient."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(a.shape[0])
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(iters):
        y = a @ x
        new = float(x @ y)
        ny = np.linalg.norm(y)
        if ny == 0:
            return 0.0
        x = y / ny
        if abs(new - lam) <= tol * max(1.0, abs(new)):
            lam = new
            break
        lam = new
    return abs(lam)


def unstable_eigenvectors(L0: DifferentialMatrix | np.ndarray, steps: int = 3) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Right and left eigenvectors of the eigenvalues outside the unit disk.

    The QR eigensolve seeds a few steps of inverse iteration so that the
    vectors do not depend on the solver's ordering.
    """
    m = L0.matrix if isinstance(L0, DifferentialMatrix) else np.asarray(L0, dtype=float)
    ev, vl, vr = scipy.linalg.eig(m, left=True, right=True)
    idx = [i for i in np.argsort(-np.abs(ev), kind="stable") if abs(ev[i]) > 1.0]
    n = m.shape[0]
    rights, lefts = [], []
    for i in idx:
        mu = ev[i]
        shift = m - mu * (1 + 1e-10) * np.eye(n)
        lu = scipy.linalg.lu_factor(shift)
        lut = scipy.linalg.lu_factor(shift.conj().T)
        r, l = vr[:, i], vl[:, i]
        for _ in range(steps):
            r = scipy.linalg.lu_solve(lu, r)
            r /= np.linalg.norm(r)
            l = scipy.linalg.lu_solve(lut, l)
            l /= np.linalg.norm(l)
        rights.append(r)
        lefts.append(l)
    return ev[idx], np.array(rights).T if rights else np.zeros((n, 0)), np.array(lefts).T if lefts else np.zeros((n, 0))


def spectral_projectors(rights: np.ndarray, lefts: np.ndarray) -> list[np.ndarray]:
    """Rank-one projectors ``r l^H / (l^H r)`` onto the given eigendirections."""
    out = []
    for k in range(rights.shape[1]):
        r, l = rights[:, k], lefts[:, k]
        denom = np.vdot(l, r)
        if abs(denom) < 1e-12:
            raise BasisError(f"left/right eigenvector pairing is singular ({abs(denom):.3g})")
        out.append(np.outer(r, l.conj()) / denom)
    return out


def induced_l1(a: np.ndarray) -> float:
    """Operator norm induced by the l1 vector norm: maximal column absolute sum."""
    return float(np.abs(a).sum(axis=0).max())


def eigenbasis(L0: DifferentialMatrix | np.ndarray, n1: int, n2: int, e1: int, e2: int, cond_max: float = 1e14) -> np.ndarray:
    """Basis change replacing the low-order coordinates by leading real eigenvectors.

    The ``2 (e1 + 1) + 2 (e2 + 1)`` coordinates of orders up to ``e1`` in the
    first factor and ``e2`` in the second are replaced, in tangent order, by the
    real and imaginary parts of the eigenvectors of largest modulus, each of unit
    l1 norm.  The remaining coordinates keep the monomial basis.
    """
    m = L0.matrix if isinstance(L0, DifferentialMatrix) else np.asarray(L0, dtype=float)
    size = m.shape[0]
    if size != 2 * (n1 + n2 + 2) or not (0 <= e1 <= n1 and 0 <= e2 <= n2):
        raise BasisError("eigenbasis dimensions do not fit the tangent space")
    ev, vecs = scipy.linalg.eig(m)
    order = np.argsort(-np.abs(ev), kind="stable")
    half = n1 + n2 + 2
    low = list(range(e1 + 1)) + list(range(n1 + 1, n1 + 2 + e2))
    slots = low + [i + half for i in low]
    cols: list[np.ndarray] = []
    k = 0
    while len(cols) < len(slots) and k < size:
        i = order[k]
        v = vecs[:, i]
        if abs(ev[i].imag) > 1e-12:
            cols += [v.real, v.imag]
            k += 2
        else:
            cols.append(v.real)
            k += 1
    b = np.eye(size)
    b[:, slots] = np.array([c / np.abs(c).sum() for c in cols[: len(slots)]]).T
    if not np.isfinite(np.linalg.cond(b)) or np.linalg.cond(b) > cond_max:
        raise BasisError("eigenbasis matrix is numerically singular")
    return b


def projected_operator(
    L0: DifferentialMatrix | np.ndarray,
    D_bound_matrix: np.ndarray | None = None,
    e0: np.ndarray | None = None,
    e1: np.ndarray | None = None,
    P: np.ndarray | None = None,
    basis: np.ndarray | None = None,
) -> np.ndarray:
    """``T = (I - S0 - S1) D (P - S0 - S1)``, optionally written in the coordinates of ``basis``."""
    m = L0.matrix if isinstance(L0, DifferentialMatrix) else np.asarray(L0, dtype=float)
    d = m if D_bound_matrix is None else D_bound_matrix
    n = m.shape[0]
    s = np.zeros((n, n), dtype=complex)
    for e in (e0, e1):
        if e is not None:
            s = s + e
    p = np.eye(n) if P is None else P
    t = (np.eye(n) - s) @ d @ (p - s)
    if np.max(np.abs(t.imag)) < 1e-10 * max(1.0, np.max(np.abs(t.real))):
        t = t.real
    if basis is not None:
        try:
            t = scipy.linalg.solve(basis, t @ basis)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise BasisError(str(exc)) from exc
    return t


def projected_contraction(
    L0: DifferentialMatrix | np.ndarray,
    D_bound_matrix: np.ndarray | None = None,
    e0: np.ndarray | None = None,
    e1: np.ndarray | None = None,
    P: np.ndarray | None = None,
    basis: np.ndarray | None = None,
) -> float:
    """Induced l1 norm of ``T**3``.

    ``e0`` and ``e1`` are projector matrices onto the unstable directions (or
    ``None`` for no projection).  ``D`` defaults to ``L0`` and ``P`` to the identity.
    """
    t = projected_operator(L0, D_bound_matrix, e0, e1, P, basis)
    return induced_l1(t @ t @ t)


def perron_root(a: np.ndarray) -> float:
    """Spectral radius of ``|a|``: the infimum of induced norms over diagonally weighted l1 norms."""
    return float(np.max(np.abs(np.linalg.eigvals(np.abs(a)))))


# invariant lines


@dataclass(frozen=True)
class InvariantLines:
    a_plus: float
    a_minus: float

    @property
    def v_plus(self) -> complex:
        return complex(1, self.a_plus) / abs(complex(1, self.a_plus))

    @property
    def v_minus(self) -> complex:
        return complex(1, self.a_minus) / abs(complex(1, self.a_minus))


def line_quadratic(a: float, lam: complex) -> float:
    return a * a * lam.imag + 2 * a * lam.real - lam.imag


def invariant_lines(lam: complex) -> InvariantLines:
    """Slopes of the two real lines through 0 mapped to themselves by ``z -> lam conj(z)``."""
    lam = complex(lam)
    if lam.imag == 0:
        raise DegenerateLineError("invariant lines need a non-real scaling factor")
    ap = (-lam.real + abs(lam)) / lam.imag
    am = (-lam.real - abs(lam)) / lam.imag
    return InvariantLines(ap, am)


# cone bounds


def _eta_prime(p: FactorPair):
    dphi = derivative(p.phi)

    def f(z):
        return evaluate(dphi, z * z) * 2 * z

    return f


def item3_terms(p: FactorPair, lam: complex, n_terms: int) -> np.ndarray:
    """``|arg eta'(xi(lam conj(|lam|**(2n))))|`` for ``n = 1..n_terms``."""
    deta = _eta_prime(p)
    r2 = abs(lam) ** 2
    pts = [p.xi(lam * r2**n) for n in range(1, n_terms + 1)]
    return np.array([abs(np.angle(deta(x))) for x in pts])


def rotation_bound(p: FactorPair, lam: complex, z: complex) -> float:
    """Growth-theorem bound on the argument change of a univalent field between ``xi(0)`` and ``xi(lam conj z)``.

    The point ``xi(lam conj z)**2`` is pulled back to the unit disk by the chart
    of ``U`` and the disk automorphism sending ``1`` to 0; the bound is
    ``log((1 + |w|) / (1 - |w|))`` at the resulting ``w``.
    """
    c, r = PHI_DISK.center, PHI_DISK.radius
    a = (1.0 - c) / r
    y = p.xi(lam * np.conj(z)) ** 2
    t = (y - c) / r
    w = abs((t - a) / (1 - np.conj(a) * t))
    if w >= 1:
        return float("inf")
    return float(math.log((1 + w) / (1 - w)))


@dataclass(frozen=True)
class ConeReport:
    item1_residual: float
    item2_arg: float
    item3_tailsum: float
    item3_terms: tuple[float, ...]
    item4_args: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "item1_residual": self.item1_residual,
            "item2_arg": self.item2_arg,
            "item3_tailsum": self.item3_tailsum,
            "item3_terms": list(self.item3_terms),
            "item4_args": list(self.item4_args),
        }


def cone_bounds(p_star: FactorPair, lam: complex | None = None, N_terms: int = 10, grid: int = 64) -> ConeReport:
    """Numerical values of the four bounds on the fixed point used by the cone-field argument."""
    if N_terms < 1:
        raise ValueError("N_terms must be positive")
    lam = scaling_factor(p_star) if lam is None else complex(lam)
    deta = _eta_prime(p_star)
    r2 = abs(lam) ** 2
    item1 = abs(deta(p_star.xi(0.0)) - r2**-1)
    item2 = abs(np.angle(deta(r2)))
    terms = item3_terms(p_star, lam, N_terms)
    # geometric tail with ratio |lam|**2 per step
    tail = terms[-1] * r2 / (1 - r2)
    zs = np.linspace(0.0, r2 * r2, grid)
    sup4 = max(rotation_bound(p_star, lam, z) for z in zs)
    first4 = rotation_bound(p_star, lam, r2)
    return ConeReport(float(item1), float(item2), float(terms.sum() + tail), tuple(float(t) for t in terms), (first4, sup4))


# cone field


def angle_between(x: complex, v: complex) -> float:
    return abs(float(np.angle(x / v)))


@dataclass(frozen=True)
class Cone:
    axis: complex
    aperture: float

    def rays(self, n: int = CONE_RAYS) -> np.ndarray:
        """``n`` unit vectors spanning the closed cone, boundary rays included."""
        t = np.linspace(-self.aperture, self.aperture, n)
        return self.axis / abs(self.axis) * np.exp(1j * t)

    def spread(self, points: np.ndarray) -> float:
        return float(np.max(np.abs(np.angle(points / self.axis))))


@dataclass(frozen=True)
class ContainmentCheck:
    point: str
    margin: float
    strict: bool

    @property
    def ok(self) -> bool:
        return self.margin > CONE_MARGIN if self.strict else self.margin > -1e-12


@dataclass
class ConeInvarianceReport:
    checks: list[ContainmentCheck] = field(default_factory=list)
    alpha_one: float = 0.0
    v_plus: complex = 0j

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def margin(self, point: str) -> float:
        return min(c.margin for c in self.checks if c.point == point and c.strict)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "alpha_one": self.alpha_one,
            "v_plus": [self.v_plus.real, self.v_plus.imag],
            "checks": [{"point": c.point, "margin": c.margin, "strict": c.strict, "ok": c.ok} for c in self.checks],
        }


def cone_invariance_check(
    p_star: FactorPair,
    lam: complex | None = None,
    angles: tuple[float, float] = (ALPHA_0, ALPHA_SQ),
    levels: int = 8,
    rays: int = CONE_RAYS,
    n_terms: int = 40,
) -> ConeInvarianceReport:
    """Push sampled cone rays through the linear action of the induced operator at ``0``, ``1`` and ``|lam|**(2n)``.

    The cone at ``|lam|**2`` has aperture ``angles[1]`` about the invariant
    direction of ``lam~ o c``; the cone at 0 has aperture ``angles[0]``; cones at
    deeper points are widened by the tail sums of item 3.  At ``1`` the
    reachable set is the image of the ``|lam|**2`` cone under
    ``x -> c(lam^-1 (x + c(lam~^-1 x)))``; deeper points near ``1`` are
    widened by the rotation bound at that point.
    """
    lam = scaling_factor(p_star) if lam is None else complex(lam)
    a0, a_sq = angles
    deta = _eta_prime(p_star)
    r2 = abs(lam) ** 2
    lam_t = lam / np.conj(deta(r2))
    v = invariant_lines(lam_t).v_plus

    def cl(x):
        return np.conj(x / lam)

    report = ConeInvarianceReport(v_plus=v)

    # point 1: x in the |lam|^2 cone goes to c(lam^-1 (x + c(lam~^-1 x)))
    literal_one = Cone(cl(v), a_sq)
    x = Cone(v, a_sq).rays(rays)
    image_one = cl(x + np.conj(x / lam_t))
    reach = literal_one.spread(image_one)
    report.alpha_one = reach
    report.checks.append(ContainmentCheck("1", a_sq - reach, True))

    # point 0: c(lam^-1 u(1)) must fall inside the cone at 0, even after the item-4 thickening
    terms = item3_terms(p_star, lam, n_terms)
    tails = np.cumsum(terms[::-1])[::-1]  # tails[i] = sum_{k >= i+1} terms
    eps = max(rotation_bound(p_star, lam, z) for z in np.linspace(0.0, r2 * r2, rays))
    thick = Cone(cl(v), reach + eps).rays(rays)
    cone0 = Cone(v, a0)
    report.checks.append(ContainmentCheck("0", a0 - cone0.spread(cl(thick)), True))

    def aperture(n: int) -> float:
        if n == 0:
            return a0
        if n == 1:
            return a_sq
        return a0 + float(tails[n - 1]) if n - 1 < len(tails) else a0

    for n in range(1, levels + 1):
        target = Cone(v, aperture(n))
        eps_n = rotation_bound(p_star, lam, r2**n)
        first = cl(Cone(cl(v), reach + eps_n).rays(rays))
        report.checks.append(ContainmentCheck(f"|lam|^{2 * n}", target.spread(first) * -1 + target.aperture, True))
        deriv = deta(p_star.xi(lam * r2**n))
        second = np.conj(deriv) * Cone(v, aperture(n + 1)).rays(rays) / r2
        report.checks.append(ContainmentCheck(f"|lam|^{2 * n}", target.aperture - target.spread(second), n == 1))
    return report
