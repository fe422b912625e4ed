"""Truncated Taylor series on complex disks.

A :class:`TaylorDisk` stores the coefficients of ``f(z) = sum a_k l(z)**k``
where ``l(z) = (z - c) / r`` maps its disk onto the unit disk.  With this
scaling the weighted l1 norm is the plain sum of coefficient magnitudes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .errors import ConfigurationError, DegenerateInputError, RangeWarning, SingularDerivativeError

SUP_GRID = 512


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise DegenerateInputError(f"disk radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "radius", float(self.radius))

    def scale(self, z):
        """Affine chart onto the unit disk."""
        return (np.asarray(z) - self.center) / self.radius

    def unscale(self, t):
        return self.center + self.radius * np.asarray(t)

    def contains(self, z, margin: float = 0.0) -> bool:
        return bool(np.all(np.abs(np.asarray(z) - self.center) < self.radius - margin))

    def conjugate(self) -> Disk:
        return Disk(self.center.conjugate(), self.radius)

    def boundary(self, n: int, fraction: float = 1.0) -> np.ndarray:
        """``n`` equally spaced points on the circle of radius ``fraction * radius``."""
        t = np.exp(2j * np.pi * np.arange(n) / n)
        return self.center + fraction * self.radius * t


@dataclass(frozen=True, eq=False)
class TaylorDisk:
    domain: Disk
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        c = np.array(self.coeffs, dtype=complex).ravel()
        if c.size == 0:
            raise ConfigurationError("a series needs at least one coefficient")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # constructors

    @classmethod
    def constant(cls, value: complex, domain: Disk, order: int) -> TaylorDisk:
        c = np.zeros(order + 1, dtype=complex)
        c[0] = value
        return cls(domain, c)

    @classmethod
    def identity(cls, domain: Disk, order: int) -> TaylorDisk:
        """The map ``z -> z`` expanded on ``domain``."""
        return cls.from_polynomial([0.0, 1.0], domain, order)

    @classmethod
    def from_polynomial(cls, poly, domain: Disk, order: int) -> TaylorDisk:
        """Re-expand ``sum poly[j] z**j`` in the scaled variable of ``domain``."""
        z = np.zeros(order + 1, dtype=complex)
        z[0] = domain.center
        if order >= 1:
            z[1] = domain.radius
        out = np.zeros(order + 1, dtype=complex)
        for p in reversed(list(poly)):
            out = _mul(out, z, order)
            out[0] += p
        return cls(domain, out)

    @classmethod
    def from_function(cls, func, domain: Disk, order: int, samples: int | None = None) -> TaylorDisk:
        """Coefficients of a function analytic on a neighbourhood of the closed disk, by FFT on the boundary."""
        m = samples or max(4 * (order + 1), 64)
        values = np.asarray(func(domain.boundary(m)), dtype=complex)
        coeffs = np.fft.fft(values) / m
        return cls(domain, coeffs[: order + 1])

    # accessors

    @property
    def center(self) -> complex:
        return self.domain.center

    @property
    def radius(self) -> float:
        return self.domain.radius

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, z):
        return evaluate(self, z)

    def truncate(self, order: int) -> TaylorDisk:
        c = np.zeros(order + 1, dtype=complex)
        n = min(order, self.order) + 1
        c[:n] = self.coeffs[:n]
        return TaylorDisk(self.domain, c)

    def with_coeffs(self, coeffs) -> TaylorDisk:
        return TaylorDisk(self.domain, coeffs)

    # arithmetic on a common disk

    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, TaylorDisk):
            if other.domain != self.domain:
                raise ConfigurationError("series live on different disks")
            if other.order != self.order:
                raise ConfigurationError(f"truncation orders differ: {self.order} vs {other.order}")
            return other.coeffs
        c = np.zeros_like(self.coeffs)
        c[0] = complex(other)
        return c

    def __add__(self, other) -> TaylorDisk:
        return self.with_coeffs(self.coeffs + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other) -> TaylorDisk:
        return self.with_coeffs(self.coeffs - self._coerce(other))

    def __rsub__(self, other) -> TaylorDisk:
        return self.with_coeffs(self._coerce(other) - self.coeffs)

    def __neg__(self) -> TaylorDisk:
        return self.with_coeffs(-self.coeffs)

    def __mul__(self, other) -> TaylorDisk:
        if isinstance(other, TaylorDisk):
            return self.with_coeffs(_mul(self.coeffs, self._coerce(other), self.order))
        return self.with_coeffs(self.coeffs * complex(other))

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> TaylorDisk:
        return self.with_coeffs(self.coeffs / complex(scalar))

    def __repr__(self) -> str:
        return f"TaylorDisk(center={self.center!r}, radius={self.radius!r}, order={self.order})"


def _mul(a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
    out = np.zeros(order + 1, dtype=complex)
    prod = np.convolve(a, b)[: order + 1]
    out[: prod.size] = prod
    return out


def _horner(coeffs: np.ndarray, t):
    t = np.asarray(t, dtype=complex)
    acc = np.full(t.shape, coeffs[-1], dtype=complex)
    for a in coeffs[-2::-1]:
        acc = acc * t + a
    return acc if acc.ndim else complex(acc)


def evaluate(f: TaylorDisk, z):
    """Horner evaluation in the scaled variable; accepts scalars or arrays.

    Points outside the disk are not rejected; the value is then an
    unvalidated extrapolation of the truncated series.
    """
    return _horner(f.coeffs, f.domain.scale(z))


def range_bound(g: TaylorDisk) -> tuple[complex, float]:
    """Center value and l1 radius enclosing the image of the disk under ``g``."""
    return complex(g.coeffs[0]), float(l1_norm(g.with_coeffs(np.r_[0, g.coeffs[1:]])))


def compose(f: TaylorDisk, g: TaylorDisk, order: int | None = None, check_range: bool = True) -> TaylorDisk:
    """Series of ``f o g`` on the disk of ``g``, truncated at ``order``.

    Without an explicit ``order`` both series must share their truncation.
    """
    if order is None:
        if f.order != g.order:
            raise ConfigurationError(f"truncation orders differ: {f.order} vs {g.order}")
        order = g.order
    if check_range:
        c0, spread = range_bound(g)
        if abs(c0 - f.center) + spread >= f.radius:
            warnings.warn(
                f"range of inner series (|g(c)-c_f| + spread = {abs(c0 - f.center) + spread:.6g}) "
                f"leaves the outer disk of radius {f.radius:.6g}",
                RangeWarning,
                stacklevel=2,
            )
    h = np.zeros(order + 1, dtype=complex)
    n = min(order, g.order) + 1
    h[:n] = g.coeffs[:n]
    h[0] -= f.center
    h /= f.radius
    out = np.zeros(order + 1, dtype=complex)
    for a in f.coeffs[::-1]:
        out = _mul(out, h, order)
        out[0] += a
    return TaylorDisk(g.domain, out)


def rescale(f: TaylorDisk, factor: complex, domain: Disk, order: int | None = None) -> TaylorDisk:
    """Series of ``z -> f(factor * z)`` on ``domain``."""
    order = f.order if order is None else order
    lin = TaylorDisk.from_polynomial([0.0, factor], domain, order)
    return compose(f, lin, order=order, check_range=False)


def derivative(f: TaylorDisk, order: int = 1) -> TaylorDisk:
    """Termwise differentiation in ``z``; each step divides by the radius."""
    if order < 1:
        raise DegenerateInputError("derivative order must be at least 1")
    if order > f.order:
        raise DegenerateInputError(f"derivative order {order} exceeds truncation order {f.order}")
    c = f.coeffs
    for _ in range(order):
        k = np.arange(1, c.size)
        c = c[1:] * k / f.radius
    return TaylorDisk(f.domain, c)


def antiderivative(f: TaylorDisk, base: complex | None = None) -> TaylorDisk:
    """Primitive vanishing at ``base`` (the disk center by default); order grows by one."""
    k = np.arange(1, f.order + 2)
    c = np.zeros(f.order + 2, dtype=complex)
    c[1:] = f.coeffs * f.radius / k
    out = TaylorDisk(f.domain, c)
    if base is not None:
        out = out - evaluate(out, base)
    return out


def conj_variable(f: TaylorDisk) -> TaylorDisk:
    """Series of ``z -> conj(f(conj(z)))`` on the conjugate disk."""
    return TaylorDisk(f.domain.conjugate(), np.conj(f.coeffs))


def reciprocal(f: TaylorDisk) -> TaylorDisk:
    a = f.coeffs
    if a[0] == 0:
        raise SingularDerivativeError("series with zero constant term has no reciprocal")
    out = np.zeros_like(a)
    out[0] = 1.0 / a[0]
    for k in range(1, a.size):
        out[k] = -np.dot(a[1 : k + 1], out[k - 1 :: -1][:k]) / a[0]
    return f.with_coeffs(out)


def series_exp(f: TaylorDisk) -> TaylorDisk:
    """``exp`` of a series through the recurrence ``E' = E f'``."""
    g = f.coeffs
    e = np.zeros_like(g)
    e[0] = np.exp(g[0])
    j = np.arange(g.size)
    for k in range(1, g.size):
        e[k] = np.dot(j[1 : k + 1] * g[1 : k + 1], e[k - 1 :: -1][:k]) / k
    return f.with_coeffs(e)


def l1_norm(f: TaylorDisk) -> float:
    return float(np.sum(np.abs(f.coeffs.real) + np.abs(f.coeffs.imag)))


def sup_norm(f: TaylorDisk, grid: int = SUP_GRID) -> float:
    """Boundary maximum; the maximum-modulus principle makes this the disk supremum."""
    t = np.exp(2j * np.pi * np.arange(grid) / grid)
    return float(np.max(np.abs(_horner(f.coeffs, t))))


@dataclass(frozen=True)
class PairNorms:
    l1: float
    sup: float


class _HasFactors(Protocol):
    phi: TaylorDisk
    psi: TaylorDisk


def norms(pair: _HasFactors, grid: int = SUP_GRID) -> PairNorms:
    """Weighted l1 norm (sum over both factors) and the sup of the two boundary maxima."""
    l1 = l1_norm(pair.phi) + l1_norm(pair.psi)
    sup = max(sup_norm(pair.phi, grid), sup_norm(pair.psi, grid))
    return PairNorms(l1, sup)


def nonlinearity(alpha: TaylorDisk, tol: float = 1e-12) -> TaylorDisk:
    """``alpha'' / alpha'`` as a series; its order is two below the input."""
    d1 = derivative(alpha, 1)
    if abs(d1.coeffs[0]) < tol:
        raise SingularDerivativeError(f"alpha' vanishes at the center (|alpha'(c)| = {abs(d1.coeffs[0]):.3g})")
    d2 = derivative(alpha, 2)
    return d2 * reciprocal(d1.truncate(d2.order))


def nonlinearity_inverse(g: TaylorDisk) -> TaylorDisk:
    """The map ``x -> int_0^x exp(int_0^z g)`` with value 0 and slope 1 at the origin."""
    if not g.domain.contains(0.0):
        raise DegenerateInputError("the origin must lie in the disk")
    inner = antiderivative(g, base=0.0)
    return antiderivative(series_exp(inner), base=0.0)
