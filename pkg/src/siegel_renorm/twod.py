"""Pairs of two-dimensional maps with weak dependence on the second variable, and their renormalization.

The first variable of a map lives on the square-root preimage of a factor
disk, which is not a disk.  A component ``F(x, y)`` is therefore stored as
``P(x**2, y) + x Q(x**2, y)`` with ``P`` and ``Q`` expanded on the bidisk
``disk x D_R`` in the scaled variables ``(x**2 - c) / r`` and ``y / R``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np

from .errors import CoordinateChangeError, ProjectionError, SiegelRenormError
from .pairs import PHI_DISK, PSI_DISK, FactorPair
from .quasiarc import ETA, renorm_words
from .series import SUP_GRID, Disk, TaylorDisk

Y_RADIUS = 0.2
Y_DEGREE = 8
X_DEGREE = 24
NEWTON_TOL = 1e-14
NEWTON_ITERS = 60
FD_STEP = 1e-7
STALL_TOL = 1e-11
SECOND_STEP = 1e-4
LOCAL_RADIUS = 0.05
LOCAL_SAMPLES = 64


class Map2D(Protocol):
    def __call__(self, x, y) -> tuple[np.ndarray, np.ndarray]: ...


# representation


@dataclass(frozen=True)
class Polydisk:
    disk: Disk
    y_radius: float = Y_RADIUS

    def to_dict(self) -> dict:
        c = self.disk.center
        return {"center": [c.real, c.imag], "radius": self.disk.radius, "y_radius": self.y_radius}


def _horner2(coeffs: np.ndarray, s: np.ndarray, t: np.ndarray) -> np.ndarray:
    """``sum coeffs[j, k] s**j t**k`` for broadcastable ``s`` and ``t``."""
    used = np.nonzero(np.any(coeffs != 0, axis=0))[0]
    ky = int(used[-1]) + 1 if used.size else 1
    out = np.zeros(np.broadcast(s, t).shape, dtype=complex)
    for k in range(ky - 1, -1, -1):
        col = coeffs[:, k]
        acc = np.full(s.shape, col[-1], dtype=complex)
        for a in col[-2::-1]:
            acc = acc * s + a
        out = out * t + acc
    return out


@dataclass(frozen=True, eq=False)
class BiDiskMap:
    """Map ``(x, y) -> (F1, F2)``; ``even[i]`` and ``odd[i]`` hold the grids of component ``i``."""

    domain: Polydisk
    even: np.ndarray
    odd: np.ndarray

    def __post_init__(self) -> None:
        e = np.array(self.even, dtype=complex)
        o = np.array(self.odd, dtype=complex)
        if e.ndim != 3 or e.shape[0] != 2 or e.shape != o.shape:
            raise SiegelRenormError("coefficient grids must have shape (2, nx + 1, ny + 1)")
        e.setflags(write=False)
        o.setflags(write=False)
        object.__setattr__(self, "even", e)
        object.__setattr__(self, "odd", o)

    @property
    def degrees(self) -> tuple[int, int]:
        return self.even.shape[1] - 1, self.even.shape[2] - 1

    def component(self, i: int, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        x, y = np.broadcast_arrays(x, y)
        s = (x * x - self.domain.disk.center) / self.domain.disk.radius
        t = y / self.domain.y_radius
        out = _horner2(self.even[i], s, t)
        if np.any(self.odd[i] != 0):
            out = out + x * _horner2(self.odd[i], s, t)
        return out

    def __call__(self, x, y) -> tuple[np.ndarray, np.ndarray]:
        return self.component(0, x, y), self.component(1, x, y)

    def to_dict(self) -> dict:
        def grid(a):
            return [[[float(v.real), float(v.imag)] for v in row] for row in a]

        return {
            "domain": self.domain.to_dict(),
            "coeffs": [grid(self.even[i]) for i in (0, 1)],
            "odd_coeffs": [grid(self.odd[i]) for i in (0, 1)],
        }

    @classmethod
    def from_dict(cls, data: dict) -> BiDiskMap:
        d = data["domain"]
        domain = Polydisk(Disk(complex(*d["center"]), d["radius"]), d["y_radius"])

        def grid(a):
            arr = np.asarray(a, dtype=float)
            return arr[..., 0] + 1j * arr[..., 1]

        return cls(domain, grid(data["coeffs"]), grid(data["odd_coeffs"]))


def fit_map(func: Map2D, domain: Polydisk, nx: int, ny: int, oversample: int = 2) -> BiDiskMap:
    """Coefficient grids of a map analytic on a neighbourhood of the closed bidisk, by FFT on the torus."""
    mw = oversample * (nx + 1) + 2
    my = oversample * (ny + 1) + 2
    disk = domain.disk
    w = disk.center + disk.radius * np.exp(2j * np.pi * np.arange(mw) / mw)
    y = domain.y_radius * np.exp(2j * np.pi * np.arange(my) / my)
    root = np.sqrt(w)[:, None]
    yy = np.broadcast_to(y[None, :], (mw, my))
    plus = func(np.broadcast_to(root, (mw, my)), yy)
    minus = func(np.broadcast_to(-root, (mw, my)), yy)
    even = np.empty((2, nx + 1, ny + 1), dtype=complex)
    odd = np.empty_like(even)
    for i in (0, 1):
        pe = 0.5 * (plus[i] + minus[i])
        po = 0.5 * (plus[i] - minus[i]) / root
        even[i] = (np.fft.fft2(pe) / (mw * my))[: nx + 1, : ny + 1]
        odd[i] = (np.fft.fft2(po) / (mw * my))[: nx + 1, : ny + 1]
    return BiDiskMap(domain, even, odd)


@dataclass(frozen=True)
class Pair2D:
    A: Map2D
    B: Map2D

    @property
    def delta(self) -> float:
        """Sampled sup of the ``y``-dependence of the second components."""
        return max(_y_variation(self.A, 1, _domain_of(self.A, PHI_DISK)), _y_variation(self.B, 1, _domain_of(self.B, PSI_DISK)))


def _domain_of(m: Map2D, fallback: Disk) -> Polydisk:
    return m.domain if isinstance(m, BiDiskMap) else Polydisk(fallback)


def _torus(domain: Polydisk, nw: int = 48, ny: int = 12) -> tuple[np.ndarray, np.ndarray]:
    w = domain.disk.center + domain.disk.radius * np.exp(2j * np.pi * np.arange(nw) / nw)
    x = np.concatenate([np.sqrt(w), -np.sqrt(w)])
    y = domain.y_radius * np.exp(2j * np.pi * np.arange(ny) / ny)
    return np.broadcast_to(x[:, None], (x.size, ny)), np.broadcast_to(y[None, :], (x.size, ny))


def _y_variation(m: Map2D, i: int, domain: Polydisk) -> float:
    x, y = _torus(domain)
    return float(np.max(np.abs(m(x, y)[i] - m(x, np.zeros_like(y))[i])))


# embedding


def embed(p: FactorPair, ny: int = Y_DEGREE, y_radius: float = Y_RADIUS) -> Pair2D:
    """``(eta, xi) -> ((x, y) -> (eta(x), eta(x)), (x, y) -> (xi(x), xi(x)))`` with exact coefficients."""

    def lift(f: TaylorDisk) -> BiDiskMap:
        even = np.zeros((2, f.order + 1, ny + 1), dtype=complex)
        even[0, :, 0] = f.coeffs
        even[1, :, 0] = f.coeffs
        return BiDiskMap(Polydisk(f.domain, y_radius), even, np.zeros_like(even))

    return Pair2D(lift(p.phi), lift(p.psi))


def collapse(s: Pair2D) -> FactorPair:
    """First components at ``y = 0`` as a factor pair; requires fitted maps with vanishing odd parts."""
    out = []
    for m in (s.A, s.B):
        if not isinstance(m, BiDiskMap):
            raise SiegelRenormError("collapse needs fitted maps")
        if np.any(m.odd[0][:, 0] != 0):
            raise SiegelRenormError("first component is not even in x")
        out.append(TaylorDisk(m.domain.disk, m.even[0][:, 0]))
    return FactorPair(out[0], out[1])


def norm_2d(s: Pair2D, samples: int = SUP_GRID) -> float:
    """Half the sum of the sup norms of the two maps, with the max-modulus on the target."""
    total = 0.0
    for m, fallback in ((s.A, PHI_DISK), (s.B, PSI_DISK)):
        x, y = _torus(_domain_of(m, fallback), nw=samples)
        u, v = m(x, y)
        total += float(np.max(np.maximum(np.abs(u), np.abs(v))))
    return 0.5 * total


def pair_distance(s1: Pair2D, s2: Pair2D, domains: tuple[Polydisk, Polydisk] | None = None) -> float:
    """Sampled version of half the sum of the two sup distances."""
    da, db = domains or (_domain_of(s1.A, PHI_DISK), _domain_of(s1.B, PSI_DISK))
    total = 0.0
    for m1, m2, d in ((s1.A, s2.A, da), (s1.B, s2.B, db)):
        x, y = _torus(d)
        u1, v1 = m1(x, y)
        u2, v2 = m2(x, y)
        total += float(np.max(np.maximum(np.abs(u1 - u2), np.abs(v1 - v2))))
    return 0.5 * total


def distance_to_embedding(s: Pair2D, domains: tuple[Polydisk, Polydisk] | None = None) -> float:
    """Sampled distance to the pair with both components replaced by the first one at ``y = 0``."""
    da, db = domains or (_domain_of(s.A, PHI_DISK), _domain_of(s.B, PSI_DISK))
    total = 0.0
    for m, d in ((s.A, da), (s.B, db)):
        x, y = _torus(d)
        u, v = m(x, y)
        u0 = m(x, np.zeros_like(y))[0]
        total += float(np.max(np.maximum(np.abs(u - u0), np.abs(v - u0))))
    return 0.5 * total


def first_second_gap(s: Pair2D) -> float:
    """Sampled ``||pi_1 S - pi_2 S||`` in the pair norm."""
    total = 0.0
    for m, d in ((s.A, _domain_of(s.A, PHI_DISK)), (s.B, _domain_of(s.B, PSI_DISK))):
        x, y = _torus(d)
        u, v = m(x, y)
        total += float(np.max(np.abs(u - v)))
    return 0.5 * total


# scalar solvers


def _fd(func: Callable, x: np.ndarray) -> np.ndarray:
    h = FD_STEP * (1.0 + np.abs(x))
    return (func(x + h) - func(x - h)) / (2 * h)


def newton_1d(func: Callable, target, x0, tol: float = NEWTON_TOL, iters: int = NEWTON_ITERS) -> np.ndarray:
    """Vectorised solve of ``func(x) = target`` from ``x0`` by second-order Taylor steps.

    The step is the smaller root of the local quadratic model, which stays
    defined next to a critical point where a plain Newton step blows up.
    """
    x = np.array(x0, dtype=complex)
    target = np.asarray(target, dtype=complex)
    last = np.inf
    for _ in range(iters):
        f0 = func(x)
        r = f0 - target
        h = SECOND_STEP * (1.0 + np.abs(x))
        fp, fm = func(x + h), func(x - h)
        d = (fp - fm) / (2 * h)
        d2 = (fp - 2 * f0 + fm) / (h * h)
        disc = np.sqrt(d * d - 2 * d2 * r)
        den = np.where(np.abs(d + disc) >= np.abs(d - disc), d + disc, d - disc)
        solved = np.abs(r) <= 1e-16 * (1.0 + np.abs(target))
        if np.any((den == 0) & ~solved) or not np.all(np.isfinite(den)):
            raise CoordinateChangeError("degenerate local model in an inversion")
        step = np.where(solved, 0.0, 2 * r / np.where(den == 0, 1.0, den))
        x = x - step
        size = float(np.max(np.abs(step) / (1.0 + np.abs(x)), initial=0.0))
        # rounding floor: accept once steps are tiny and no longer shrinking
        if size <= tol or (size < STALL_TOL and size >= 0.5 * last):
            return x
        last = size
    raise CoordinateChangeError("one-dimensional inversion did not converge")


def chord_solve(func: Callable, target, x0, slope, tol: float = NEWTON_TOL, iters: int = 4 * NEWTON_ITERS) -> np.ndarray:
    """Fixed-slope iteration for ``func(x) = target``; needs no derivative of ``func``."""
    x = np.array(x0, dtype=complex)
    last = np.inf
    for _ in range(iters):
        step = (func(x) - target) / slope
        x = x - step
        size = float(np.max(np.abs(step) / (1.0 + np.abs(x)), initial=0.0))
        if size <= tol or (size < STALL_TOL and size >= 0.9 * last):
            return x
        last = size
    raise CoordinateChangeError("fixed-slope inversion did not converge")


def local_taylor(func: Callable, center: complex = 0.0, order: int = 6, radius: float = LOCAL_RADIUS) -> np.ndarray:
    """Derivatives ``f^(k)(center) / k!`` for ``k <= order`` by FFT on a small circle."""
    m = LOCAL_SAMPLES
    z = center + radius * np.exp(2j * np.pi * np.arange(m) / m)
    c = np.fft.fft(func(z)) / m
    return c[: order + 1] / radius ** np.arange(order + 1)


def critical_point(func: Callable, guess: complex = 0.0, window: float = 0.2, tol: float = 1e-13) -> complex:
    """Zero of ``func'`` near ``guess`` by Newton on local Taylor data; must stay inside the window."""
    x = complex(guess)
    for _ in range(NEWTON_ITERS):
        c = local_taylor(func, x, order=3)
        if c[2] == 0:
            raise ProjectionError("degenerate critical point")
        step = c[1] / (2 * c[2])
        x -= step
        if abs(x) > window:
            raise ProjectionError(f"no critical point within |x| < {window}")
        if abs(step) < tol:
            return x
    raise ProjectionError("critical point search did not converge")


# coordinate change


def zero_preimage(a0: Callable) -> complex:
    """Zero of ``x -> a0(x)`` with nonnegative real part, from the quadratic approximation."""
    c = local_taylor(a0, 0.0, order=2, radius=0.1)
    guess = np.sqrt(-c[0] / c[2])
    x = complex(newton_1d(a0, 0.0, np.array(guess)))
    return x if (x.real, x.imag) >= (0.0, 0.0) or x.real > 0 else -x


class CoordinateChange:
    """``H(x, y) = (a_y(x), w^-1_{g_0^-1(y)}(y))`` with ``w_z = g_z o phi_z^-1`` and ``phi_y = a(b(., y), g(., y))``.

    The second component reduces to ``a(b(u, z), y)`` where ``g(z, 0) = y`` and
    ``g(u, z) = y``.  Both inversions of ``g`` start at ``hint``, by default
    ``a(0, 0)``; inside a composition the point fed to ``B`` is passed instead.
    The inverse is triangular.  Next to the critical value of ``g`` the branch
    choice makes the second component non-smooth at order ``delta**1.5``, so
    its inversion iterates with the slope of ``a(., 0)`` instead of its own.
    """

    def __init__(self, s: Pair2D):
        self.s = s
        self.ref = complex(s.A(0j, 0j)[0])
        self.root = zero_preimage(lambda u: self._a(u, np.zeros_like(u)))

    def _a(self, x, y):
        return self.s.A(x, y)[0]

    def _b(self, x, y):
        return self.s.B(x, y)[0]

    def _g(self, x, y):
        return self.s.B(x, y)[1]

    def second(self, y, hint=None) -> np.ndarray:
        y = np.asarray(y, dtype=complex)
        start = np.full(y.shape, self.ref) if hint is None else np.asarray(hint, dtype=complex)
        z = newton_1d(lambda u: self._g(u, np.zeros_like(u)), y, start)
        u = newton_1d(lambda u: self._g(u, z), y, z)
        return self._a(self._b(u, z), y)

    def __call__(self, x, y, hint=None) -> tuple[np.ndarray, np.ndarray]:
        x, y = np.broadcast_arrays(np.asarray(x, dtype=complex), np.asarray(y, dtype=complex))
        return self._a(x, y), self.second(y, hint)

    def inverse(self, x, y) -> tuple[np.ndarray, np.ndarray]:
        x, y = np.broadcast_arrays(np.asarray(x, dtype=complex), np.asarray(y, dtype=complex))
        a0 = lambda u: self._a(u, np.zeros_like(u))  # noqa: E731
        start = np.full(x.shape, self.root)
        v0 = newton_1d(a0, y, start)
        v = chord_solve(self.second, y, v0, _fd(a0, v0))
        u = newton_1d(lambda t: self._a(t, v), x, newton_1d(a0, x, start))
        return u, v

    def residual(self, x, y) -> float:
        u, v = self.inverse(x, y)
        f1, f2 = self(u, v)
        return float(np.max(np.abs(f1 - x) + np.abs(f2 - y)))


def inverse_grid(domain: Polydisk, scale: complex = 1.0, size: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Tensor grid of ``size x size`` points inside the scaled domain used to check the inversion."""
    k = np.arange(size)
    w = domain.disk.center + 0.5 * domain.disk.radius * np.exp(2j * np.pi * k / size)
    x = scale * np.sqrt(w)
    y = scale * 0.5 * domain.y_radius * np.exp(2j * np.pi * (k + 0.5) / size)
    return np.meshgrid(x, y, indexing="ij")


# renormalization


def _apply_word(s: Pair2D, letters: str, x, y):
    for letter in letters:
        x, y = (s.A if letter == ETA else s.B)(x, y)
    return x, y


class _Composite:
    def __init__(self, func: Callable):
        self.func = func

    def __call__(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=complex), np.asarray(y, dtype=complex))
        return self.func(x, y)


@dataclass(frozen=True)
class PreRenormalized:
    pair: Pair2D
    ell: complex
    coordinate_change: CoordinateChange
    level: int


def _hat_words(n: int) -> tuple[str, str]:
    if n < 2:
        raise SiegelRenormError("pre-renormalization needs level n >= 2")
    s, t = (w.letters() for w in renorm_words(n))
    if not (s.endswith("xe") and t.endswith("xe")):
        raise SiegelRenormError("renormalization words must end with a return through both maps")
    return ETA + s[:-2] + "x", ETA + t[:-2] + "x"


def prerenorm_2d(s: Pair2D, n: int = 2) -> PreRenormalized:
    """``H o (B o S^l o A, B o S^m o A) o H^-1`` with ``ell = pi_1 Bbar(0, 0)``."""
    hs, ht = _hat_words(n)
    change = CoordinateChange(s)

    def conj(word: str):
        def f(x, y):
            u, v = change.inverse(x, y)
            u, v = _apply_word(s, word[:-1], u, v)
            # the point entering B fixes the branch of g^-1 near its critical value
            return change(*s.B(u, v), hint=u)

        return _Composite(f)

    pair = Pair2D(conj(hs), conj(ht))
    ell = complex(pair.B(0j, 0j)[0])
    return PreRenormalized(pair, ell, change, n)


def rescale(s: Pair2D, ell: complex) -> Pair2D:
    """Conjugation by ``(x, y) -> (ell x, ell y)``."""

    def conj(m: Map2D):
        return _Composite(lambda x, y: tuple(c / ell for c in m(ell * x, ell * y)))

    return Pair2D(conj(s.A), conj(s.B))


@dataclass(frozen=True)
class CriticalShift:
    pair: Pair2D
    c1: complex
    c2: complex


def project_critical(s: Pair2D, window: float = 0.2) -> CriticalShift:
    """Translate in ``x`` so that both compositions have their critical point at the origin."""
    c1 = critical_point(lambda x: s.B(*s.A(x, np.zeros_like(x)))[0], window=window)
    c2 = critical_point(lambda x: s.A(*s.B(x + c1, np.zeros_like(x)))[0] - c1, window=window)

    def a_new(x, y):
        u, v = s.A(x + c1, y)
        return u - c1 - c2, v

    def b_new(x, y):
        u, v = s.B(x + c1 + c2, y)
        return u - c1, v

    return CriticalShift(Pair2D(_Composite(a_new), _Composite(b_new)), complex(c1), complex(c2))


@dataclass(frozen=True)
class AcShift:
    pair: Pair2D
    a: complex
    b: complex
    c: complex
    iterations: int


def _ac_family(s: Pair2D, a: complex, b: complex, c: complex) -> Pair2D:
    def a_new(x, y):
        u, v = s.A(x, y)
        x2 = x * x
        bump = a * x2 * x2 + b * x2 * x2 * x2
        return u + bump, v + bump

    def b_new(x, y):
        u, v = s.B(x, y)
        return u + c, v + c

    return Pair2D(_Composite(a_new), _Composite(b_new))


def ac_conditions(s: Pair2D) -> np.ndarray:
    """Commutator value and second derivative at the origin along ``y = 0``, and ``pi_1 B(0, 0) - 1``."""

    def comm(x):
        y = np.zeros_like(x)
        return s.A(*s.B(x, y))[0] - s.B(*s.A(x, y))[0]

    t = local_taylor(comm, 0.0, order=2)
    return np.array([t[0], 2 * t[2], complex(s.B(0j, 0j)[0]) - 1.0])


def printed_jacobian(s: Pair2D) -> np.ndarray:
    """Leading-order Jacobian of the conditions in ``(a, b, c)`` for a pair critical at the origin."""
    eta = lambda x: s.A(x, np.zeros_like(x))[0]  # noqa: E731
    xi = lambda x: s.B(x, np.zeros_like(x))[0]  # noqa: E731
    xt = local_taylor(xi, 0.0, order=2)
    x0 = complex(xt[0])
    et = local_taylor(eta, x0, order=3)
    d1, d2 = et[1], 2 * et[2]
    xi1, xi2 = xt[1], 2 * xt[2]
    return np.array(
        [
            [x0**4, x0**6, d1 - 1.0],
            [12 * x0**2 * xi1**2 + 4 * x0**3 * xi2, 30 * x0**4 * xi1**2 + 6 * x0**5 * xi2, 6 * et[3] * xi1 + d2 * xi2],
            [0.0, 0.0, 1.0],
        ],
        dtype=complex,
    )


def project_ac_2d(s: Pair2D, tol: float = 1e-13, max_iters: int = 40) -> AcShift:
    """Add ``a x^4 + b x^6`` to both components of ``A`` and ``c`` to both of ``B`` so the conditions vanish.

    Broyden iteration started from the leading-order Jacobian.
    """
    jac = printed_jacobian(s)
    if abs(np.linalg.det(jac)) < 1e-10:
        raise ProjectionError("leading-order Jacobian is singular")
    p = np.zeros(3, dtype=complex)
    f = ac_conditions(s)
    for it in range(1, max_iters + 1):
        step = -np.linalg.solve(jac, f)
        p = p + step
        f_new = ac_conditions(_ac_family(s, *p))
        if np.max(np.abs(f_new)) < tol or np.max(np.abs(step)) < tol:
            return AcShift(_ac_family(s, *p), complex(p[0]), complex(p[1]), complex(p[2]), it)
        jac = jac + np.outer(f_new - f - jac @ step, step.conj()) / np.vdot(step, step)
        f = f_new
    raise ProjectionError("almost-commuting projection did not converge")


@dataclass(frozen=True)
class Rg2DResult:
    pair: Pair2D
    ell: complex
    shift: CriticalShift
    ac: AcShift


def rg_2d(
    s: Pair2D,
    n: int = 2,
    domains: tuple[Polydisk, Polydisk] | None = None,
    degrees: tuple[int, int, int] | None = None,
) -> Rg2DResult:
    """Pre-renormalize, rescale by ``ell``, move critical points, project, and fit onto the bidisks.

    The normalisation ``pi_1 B(0, 0) = 1`` is imposed in rescaled coordinates.
    """
    da, db = domains or (_domain_of(s.A, PHI_DISK), _domain_of(s.B, PSI_DISK))
    if degrees is None:
        na = s.A.degrees[0] if isinstance(s.A, BiDiskMap) else X_DEGREE
        nb = s.B.degrees[0] if isinstance(s.B, BiDiskMap) else X_DEGREE
        ny = s.A.degrees[1] if isinstance(s.A, BiDiskMap) else Y_DEGREE
        degrees = (na, nb, ny)
    pre = prerenorm_2d(s, n)
    scaled = rescale(pre.pair, pre.ell)
    shift = project_critical(scaled)
    ac = project_ac_2d(shift.pair)
    na, nb, ny = degrees
    out = Pair2D(fit_map(ac.pair.A, da, na, ny), fit_map(ac.pair.B, db, nb, ny))
    return Rg2DResult(out, pre.ell, shift, ac)


# membership and spectral checks


@dataclass(frozen=True)
class Membership:
    delta: float
    min_h_slope: float
    min_g_slope: float
    delta_max: float

    @property
    def ok(self) -> bool:
        return self.delta <= self.delta_max and self.min_h_slope > 0 and self.min_g_slope > 0


def membership(s: Pair2D, delta_max: float = 1e-2, q_radius: float = 0.05, samples: int = 64) -> Membership:
    """Sampled check that ``y``-dependence is small and ``h``, ``g`` have no critical points outside ``|x| <= q_radius``."""
    slopes = []
    for m, fallback in ((s.A, PHI_DISK), (s.B, PSI_DISK)):
        d = _domain_of(m, fallback)
        x, _ = _torus(d, nw=samples, ny=1)
        x = x[:, 0]
        # radial segments from the boundary towards Q
        pts = np.concatenate([x * t for t in np.linspace(1.0, 0.0, 9)[:-1]])
        pts = pts[np.abs(pts) > q_radius]
        slopes.append(float(np.min(np.abs(_fd(lambda u: m(u, np.zeros_like(u))[1], pts)))))
    return Membership(s.delta, slopes[0], slopes[1], delta_max)


def y_perturbation(s: Pair2D, delta: float, gap: float = 0.0, first: float | None = None) -> Pair2D:
    """Add ``delta * y / R`` to ``h``, ``first * y / R`` to ``a`` and ``gap * x**2`` to ``h``.

    ``first`` defaults to ``delta * R``, so ``a`` gains ``delta * y``; a larger
    share moves ``ell`` enough to break renormalizability at ``delta = 1e-2``.

    Only the first map carries the perturbation; ``y``-dependence in ``g``
    makes the coordinate change singular next to the critical value of ``g``.
    """
    m = s.A
    if not isinstance(m, BiDiskMap):
        raise SiegelRenormError("perturbations need fitted maps")
    e = np.array(m.even)
    e[0, 0, 1] += delta * m.domain.y_radius if first is None else first
    e[1, 0, 1] += delta
    # x**2 = c + r s in the scaled variable
    e[1, 0, 0] += gap * m.domain.disk.center
    e[1, 1, 0] += gap * m.domain.disk.radius
    return Pair2D(BiDiskMap(m.domain, e, m.odd), s.B)


def coefficient_vector(s: Pair2D) -> np.ndarray:
    parts = []
    for m in (s.A, s.B):
        if not isinstance(m, BiDiskMap):
            raise SiegelRenormError("coefficient vectors need fitted maps")
        parts += [np.ravel(m.even), np.ravel(m.odd)]
    return np.concatenate(parts)


def directional_derivative(s: Pair2D, direction: Pair2D, n: int = 2, eps: float = 1e-5) -> np.ndarray:
    """Central difference of ``rg_2d`` along ``direction`` in coefficient coordinates."""

    def shifted(sign: float) -> Pair2D:
        maps = [
            BiDiskMap(m.domain, m.even + sign * eps * d.even, m.odd + sign * eps * d.odd)
            for m, d in ((s.A, direction.A), (s.B, direction.B))
        ]
        return Pair2D(*maps)

    plus = coefficient_vector(rg_2d(shifted(1.0), n).pair)
    minus = coefficient_vector(rg_2d(shifted(-1.0), n).pair)
    return (plus - minus) / (2 * eps)


def _pure_y(s: Pair2D, which: int) -> Pair2D:
    maps = []
    for i, m in enumerate((s.A, s.B)):
        e = np.zeros_like(m.even)
        if i == which:
            e[1, 0, 1] = 1.0
        maps.append(BiDiskMap(m.domain, e, np.zeros_like(e)))
    return Pair2D(*maps)


@dataclass(frozen=True)
class CoincidenceReport:
    level: int
    eigenvalues: list[complex]
    growth: list[float]
    relative_errors: list[float]
    y_ratios: list[float]
    zero_derivative: float

    @property
    def ok(self) -> bool:
        return max(self.relative_errors, default=0.0) < 1e-3 and max(self.y_ratios, default=0.0) < 1.0

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues],
            "growth": self.growth,
            "relative_errors": self.relative_errors,
            "y_ratios": self.y_ratios,
            "zero_derivative": self.zero_derivative,
        }


def spectral_coincidence(p_star: FactorPair, n: int = 2, k_dirs: int = 4, L0=None, eps: float = 1e-5) -> CoincidenceReport:
    """Finite-difference growth of ``rg_2d`` at the embedded fixed point.

    Embedded real eigendirections of the one-dimensional differential should
    grow by the ``n``-th power of the eigenvalue; pure ``y`` directions in the
    second components should contract.
    """
    from .newton import build_L0, from_vector
    from .spectral import unstable_eigenvectors

    if not 1 <= k_dirs <= 12:
        raise SiegelRenormError("direction count must lie in 1..12")
    L0 = build_L0(p_star) if L0 is None else L0
    base = embed(p_star)
    eigvals, rights, _ = unstable_eigenvectors(L0)
    values, growth, errors = [], [], []
    for k in range(min(rights.shape[1], k_dirs)):
        mu = complex(eigvals[k])
        v = np.real_if_close(rights[:, k])
        if np.iscomplexobj(v):
            continue
        d = embed(from_vector(v / np.abs(v).sum(), p_star))
        image = directional_derivative(base, d, n, eps)
        ref = coefficient_vector(d)
        g = float(np.abs(image).sum() / np.abs(ref).sum())
        values.append(mu)
        growth.append(g)
        errors.append(abs(g / abs(mu) ** n - 1.0))
    y_ratios = []
    for which in (0, 1):
        d = _pure_y(base, which)
        image = directional_derivative(base, d, n, eps)
        y_ratios.append(float(np.abs(image).sum() / np.abs(coefficient_vector(d)).sum()))
    zero = Pair2D(*(BiDiskMap(m.domain, 0 * m.even, 0 * m.odd) for m in (base.A, base.B)))
    z = float(np.abs(directional_derivative(base, zero, n, eps)).sum())
    return CoincidenceReport(n, values, growth, errors, y_ratios, z)
