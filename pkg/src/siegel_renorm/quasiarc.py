"""Multi-index words, the rigid rotation pair, dynamical partitions and the invariant arc."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import OrderingError, SiegelRenormError
from .pairs import PHI_DISK, PSI_DISK, THETA, FactorPair
from .renorm import scaling_factor
from .series import evaluate

ETA, XI = "e", "x"
POLYLINE_SAMPLES = 128


# words


@dataclass(frozen=True)
class MultiIndex:
    """Exponents ``(a1, b1, ..., an, bn)`` of ``xi**bn o eta**an o ... o xi**b1 o eta**a1``.

    Inner ``b`` entries are positive and inner ``a`` entries past the first are
    positive.  The final pair is only required to be non-negative, which lets
    proper prefixes such as ``(0, 1, 0, 0)`` be represented.
    """

    word: tuple[int, ...]

    def __post_init__(self) -> None:
        w = tuple(int(x) for x in self.word)
        if len(w) == 0 or len(w) % 2:
            raise SiegelRenormError("a multi-index has an even, positive number of entries")
        if any(x < 0 for x in w):
            raise SiegelRenormError("multi-index entries are non-negative")
        n = len(w) // 2
        for j in range(n - 1):
            if w[2 * j + 1] < 1 or (j >= 1 and w[2 * j] < 1):
                raise SiegelRenormError(f"inner exponents must be positive: {w}")
        object.__setattr__(self, "word", w)

    @property
    def n(self) -> int:
        return len(self.word) // 2

    def letters(self) -> str:
        """Letters in application order: ``e`` for ``eta`` and ``x`` for ``xi``."""
        out = []
        for j in range(self.n):
            out.append(ETA * self.word[2 * j])
            out.append(XI * self.word[2 * j + 1])
        return "".join(out)

    def counts(self) -> tuple[int, int]:
        return sum(self.word[0::2]), sum(self.word[1::2])

    @classmethod
    def from_letters(cls, letters: str) -> MultiIndex:
        """Canonical exponents of a letter sequence; an empty sequence gives ``(0, 0)``."""
        word: list[int] = []
        i = 0
        want = ETA
        while i < len(letters):
            k = 0
            while i < len(letters) and letters[i] == want:
                k += 1
                i += 1
            word.append(k)
            want = XI if want == ETA else ETA
        if len(word) % 2:
            word.append(0)
        return cls(tuple(word) or (0, 0))

    def __str__(self) -> str:
        return "(" + ",".join(str(x) for x in self.word) + ")"


def precedes(t: MultiIndex, s: MultiIndex) -> int | None:
    """Return ``k`` when ``s`` follows ``t`` in the partial order, otherwise ``None``."""
    sw, tw = s.word, t.word
    k = t.n - 1
    if k >= s.n or sw[: 2 * k] != tw[: 2 * k]:
        return None
    c, d = tw[-2], tw[-1]
    a, b = sw[2 * k], sw[2 * k + 1]
    if (c < a and d == 0) or (c == a and d < b):
        return k
    return None


def word_subtract(s: MultiIndex, t: MultiIndex, literal: bool = False) -> MultiIndex:
    """The word ``q`` with ``zeta**q o zeta**t = zeta**s``.

    In the second case the tail continues with ``a_{k+2}``.  With
    ``literal=True`` the tail instead repeats ``a_{k+1}``, which breaks the
    composition law whenever the two exponents differ.
    """
    k = precedes(t, s)
    if k is None:
        raise OrderingError(f"{s} does not follow {t}")
    sw = s.word
    c, d = t.word[-2], t.word[-1]
    if d == 0 and c < sw[2 * k]:
        return MultiIndex((sw[2 * k] - c,) + sw[2 * k + 1 :])
    head = (0, sw[2 * k + 1] - d)
    tail = list(sw[2 * k + 2 :])
    if literal and tail:
        tail[0] = sw[2 * k]
    out = head + tuple(tail)
    if len(out) % 2:
        out += (0,)
    return MultiIndex(out)


def prefixes(s: MultiIndex) -> list[MultiIndex]:
    """All ``w`` preceding ``s``; these are the proper letter prefixes, shortest first."""
    out = []
    for k in range(s.n):
        a, b = s.word[2 * k], s.word[2 * k + 1]
        base = s.word[: 2 * k]
        for c in range(a):
            out.append(MultiIndex(base + (c, 0)))
        for d in range(b):
            out.append(MultiIndex(base + (a, d)))
    return out


@lru_cache(maxsize=None)
def _words(n: int) -> tuple[str, str]:
    if n == 0:
        return ETA, XI
    s, t = _words(n - 1)
    # (eta, xi) -> (eta o xi, eta): xi acts first
    return t + s, s


def renorm_words(n: int) -> tuple[MultiIndex, MultiIndex]:
    """Words of the two maps of the ``n``-th pre-renormalization in the original pair."""
    if n < 1:
        raise ValueError("level must be at least 1")
    s, t = _words(n)
    return MultiIndex.from_letters(s), MultiIndex.from_letters(t)


def fibonacci(n: int) -> int:
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


# rigid pair


@dataclass(frozen=True)
class RigidPair:
    theta: float = THETA

    def long_step(self, x):
        return np.asarray(x) + 2 * self.theta - 1

    def short_step(self, x):
        return np.asarray(x) + self.theta - 1

    @property
    def left_interval(self) -> tuple[float, float]:
        return (float(self.short_step(0.0)), 0.0)

    @property
    def right_interval(self) -> tuple[float, float]:
        return (0.0, float(self.long_step(0.0)))

    def apply(self, w: MultiIndex, x):
        e, k = w.counts()
        return np.asarray(x) + e * (2 * self.theta - 1) + k * (self.theta - 1)


def rotation_orbit_point(k: int, theta: float = THETA) -> float:
    """``k``-th orbit point of 0 under rotation by ``theta``, represented in ``[theta - 1, 2 theta - 1)``."""
    x = math.fmod(k * theta, 1.0)
    return x - 1.0 if x >= 2 * theta - 1 else x


def compose_words(pair, w: MultiIndex, x):
    """Apply ``zeta**w`` letter by letter; ``pair`` provides ``eta`` and ``xi``."""
    z = np.asarray(x, dtype=complex) if np.iscomplexobj(x) else np.asarray(x, dtype=float)
    for letter in w.letters():
        z = pair.eta(z) if letter == ETA else pair.xi(z)
    return z


class _RigidAsPair:
    def __init__(self, rigid: RigidPair):
        self.rigid = rigid

    def eta(self, x):
        return self.rigid.long_step(x)

    def xi(self, x):
        return self.rigid.short_step(x)


# partitions


@dataclass
class Cell:
    word: MultiIndex
    tag: str
    interval: tuple[float, float] | None = None
    boundary: np.ndarray | None = None
    skeleton: tuple[complex, complex] | None = None
    flagged: bool = False

    @property
    def center(self) -> complex:
        if self.boundary is not None:
            return complex(np.mean(self.boundary))
        lo, hi = self.interval
        return 0.5 * (lo + hi)

    @property
    def diameter(self) -> float:
        if self.boundary is not None:
            b = self.boundary
            return float(np.max(np.abs(b[:, None] - b[None, :])))
        return abs(self.interval[1] - self.interval[0])


@dataclass
class Partition:
    level: int
    kind: str
    cells: list[Cell] = field(default_factory=list)

    def sorted_cells(self) -> list[Cell]:
        return sorted(self.cells, key=lambda c: min(c.interval))


def _span(a: float, b: float) -> tuple[float, float]:
    return (min(a, b), max(a, b))


def partition_model(n: int, rigid: RigidPair | None = None) -> Partition:
    """Level-``n`` partition of ``I u J`` by images of the rescaled intervals under preceding words."""
    if not 1 <= n <= 20:
        raise ValueError("level must be between 1 and 20")
    rigid = rigid or RigidPair()
    s, t = renorm_words(n)
    g_n = float(rigid.apply(t, 0.0))
    f_n = float(rigid.apply(s, 0.0))
    out = Partition(n, "model")
    for words, end, tag in ((prefixes(s), g_n, "I"), (prefixes(t), f_n, "J")):
        for w in words:
            a, b = rigid.apply(w, 0.0), rigid.apply(w, end)
            out.cells.append(Cell(w, tag, interval=_span(float(a), float(b))))
    return out


def coverage_defects(part: Partition, rigid: RigidPair | None = None) -> tuple[float, float]:
    """Largest gap and largest overlap between consecutive intervals, including the outer ends."""
    rigid = rigid or RigidPair()
    cells = part.sorted_cells()
    lo, hi = rigid.left_interval[0], rigid.right_interval[1]
    gap = max(abs(cells[0].interval[0] - lo), abs(cells[-1].interval[1] - hi))
    overlap = 0.0
    for left, right in zip(cells, cells[1:]):
        d = right.interval[0] - left.interval[1]
        gap = max(gap, d)
        overlap = max(overlap, -d)
    return float(max(gap, 0.0)), float(overlap)


# dynamical partition


def _rescale_power(lam: complex, n: int, z):
    """``n``-fold composition of ``z -> lam conj(z)``."""
    z = np.asarray(z, dtype=complex)
    m = abs(lam) ** (2 * (n // 2))
    return m * (lam * np.conj(z)) if n % 2 else m * z


def square_root_domain(center: complex, radius: float, samples: int = POLYLINE_SAMPLES) -> np.ndarray:
    """Closed boundary of ``{z : z**2 in disk}`` for a disk containing the origin."""
    if abs(center) >= radius:
        raise SiegelRenormError("the disk must contain the origin")
    s = np.linspace(0.0, 4 * np.pi, samples, endpoint=False)
    w = center + radius * np.exp(1j * s)
    arg = np.unwrap(np.angle(w))
    return np.sqrt(np.abs(w)) * np.exp(0.5j * arg)


def _in_factor_disk(z: np.ndarray, letter: str, tol: float = 1e-9) -> bool:
    disk = PHI_DISK if letter == ETA else PSI_DISK
    return bool(np.all(np.abs(np.square(z) - disk.center) <= disk.radius + tol))


def _push(pair: FactorPair, w: MultiIndex, z: np.ndarray) -> tuple[np.ndarray, bool]:
    flagged = False
    for letter in w.letters():
        if not _in_factor_disk(z, letter):
            flagged = True
        z = pair.eta(z) if letter == ETA else pair.xi(z)
    return z, flagged


def partition_dynamical(p_star: FactorPair, n: int, samples: int = POLYLINE_SAMPLES) -> Partition:
    """Images of the rescaled factor-disk preimages under the preceding words, as polylines.

    A cell is flagged when some letter is applied outside the disk on which its
    factor is expanded.
    """
    if not 1 <= n <= 6:
        raise ValueError("level must be between 1 and 6")
    lam = scaling_factor(p_star)
    s, t = renorm_words(n)
    z_n = _rescale_power(lam, n, square_root_domain(PHI_DISK.center, PHI_DISK.radius, samples))
    w_n = _rescale_power(lam, n, square_root_domain(PSI_DISK.center, PSI_DISK.radius, samples))
    g_end = compose_words(p_star, t, 0j)
    f_end = compose_words(p_star, s, 0j)
    out = Partition(n, "dynamical")
    for words, base, end, tag in ((prefixes(s), z_n, g_end, "Z"), (prefixes(t), w_n, f_end, "W")):
        for w in words:
            poly, flagged = _push(p_star, w, base)
            ends = compose_words(p_star, w, np.array([0j, end]))
            out.cells.append(Cell(w, tag, boundary=poly, skeleton=(complex(ends[0]), complex(ends[1])), flagged=flagged))
    return out


def model_adjacency(part: Partition) -> list[tuple[int, int, int, int]]:
    """Pairs of model cells sharing an endpoint, as ``(cell, end, cell, end)`` indices."""
    pts = []
    for i, c in enumerate(part.cells):
        lo, hi = c.interval
        for j, x in enumerate(_skeleton_model(c)):
            pts.append((x, i, j))
    out = []
    for a in range(len(pts)):
        for b in range(a + 1, len(pts)):
            if pts[a][1] != pts[b][1] and abs(pts[a][0] - pts[b][0]) < 1e-12:
                out.append((pts[a][1], pts[a][2], pts[b][1], pts[b][2]))
    return out


def _skeleton_model(cell: Cell, rigid: RigidPair | None = None) -> tuple[float, float]:
    """Endpoint images of 0 and of the far end, matching the dynamical skeleton order."""
    return cell.skeleton if cell.skeleton is not None else cell.interval


def skeleton_model(n: int, rigid: RigidPair | None = None) -> Partition:
    """Model partition whose cells record endpoints in the same order as the dynamical skeleton."""
    rigid = rigid or RigidPair()
    part = partition_model(n, rigid)
    s, t = renorm_words(n)
    ends = {"I": float(rigid.apply(t, 0.0)), "J": float(rigid.apply(s, 0.0))}
    for c in part.cells:
        c.skeleton = (float(rigid.apply(c.word, 0.0)), float(rigid.apply(c.word, ends[c.tag])))
    return part


def adjacency_defect(p_star: FactorPair, n: int) -> float:
    """Largest distance between skeleton points of dynamical cells whose model cells share an endpoint."""
    model = skeleton_model(n)
    dyn = partition_dynamical(p_star, n)
    worst = 0.0
    for i, a, j, b in model_adjacency(model):
        worst = max(worst, abs(dyn.cells[i].skeleton[a] - dyn.cells[j].skeleton[b]))
    return worst


def _inside(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Even-odd ray casting against a closed polyline."""
    x, y = points.real[:, None], points.imag[:, None]
    ax, ay = poly.real[None, :], poly.imag[None, :]
    bx, by = np.roll(poly.real, -1)[None, :], np.roll(poly.imag, -1)[None, :]
    cross = (ay > y) != (by > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xi = ax + (y - ay) * (bx - ax) / (by - ay)
    return np.sum(cross & (x < xi), axis=1) % 2 == 1


def polylines_intersect(a: np.ndarray, b: np.ndarray) -> bool:
    return bool(np.any(_inside(a, b)) or np.any(_inside(b, a)))


def commensurability(part: Partition) -> float:
    """Largest diameter ratio over intersecting cells of a dynamical partition."""
    worst = 1.0
    cells = part.cells
    for i in range(len(cells)):
        for j in range(i + 1, len(cells)):
            if polylines_intersect(cells[i].boundary, cells[j].boundary):
                da, db = cells[i].diameter, cells[j].diameter
                worst = max(worst, max(da, db) / min(da, db))
    return worst


# arc


def address(x: float, n: int) -> int:
    """Index of the level-``n`` model cell containing ``x``; ties go to the cell starting at ``x``."""
    cells = partition_model(n).cells
    best = None
    for i, c in enumerate(cells):
        lo, hi = c.interval
        if lo - 1e-13 <= x <= hi + 1e-13:
            if best is None or lo >= cells[best].interval[0]:
                best = i
    if best is None:
        raise SiegelRenormError(f"{x} lies outside the model segment")
    return best


def arc_points(p_star: FactorPair, depth: int, resolution: int) -> list[tuple[float, complex]]:
    """Samples ``(x, y)`` of the invariant arc: ``y`` is the center of the cell whose model cell contains ``x``."""
    if not 1 <= depth <= 6:
        raise ValueError("depth must be between 1 and 6")
    rigid = RigidPair()
    lo, hi = rigid.left_interval[0], rigid.right_interval[1]
    xs = np.linspace(lo, hi, resolution)
    if not np.any(xs == 0.0):
        xs = np.sort(np.r_[xs, 0.0])
    dyn = partition_dynamical(p_star, depth)
    return [(float(x), dyn.cells[address(float(x), depth)].center) for x in xs]
