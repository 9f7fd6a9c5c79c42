"""Fubini-Study geometry and the statistics layer: volume-calibrated cell
partitions, empirical measures of point sets, discrepancy, tube mass near the
real locus, and log-log growth regressions.

Cells live in the standard fundamental domains (each projective point is
normalized by its largest-modulus coordinate, landing in a unit polydisk, one
domain per chart). Boxes are polar-coordinate products, so volumes come from
tensor Gauss-Legendre quadrature of the FS density with the angular factors
integrated exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

TWO_PI = 2.0 * math.pi


def _gl_nodes(a: float, b: float, n: int = 32):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


@dataclass(frozen=True)
class Cell:
    """A polar box inside one chart fundamental domain.

    CP1: (r, theta) bounds. CP2: (r1, th1, r2, th2) bounds. Intervals are
    half-open on the right; theta lives in [-pi, pi).
    """

    chart: int
    bounds: tuple                      # ((lo, hi), ...) per axis
    fs_volume: float = 0.0

    def contains(self, coords) -> bool:
        for (lo, hi), c in zip(self.bounds, coords):
            if not (lo <= c < hi):
                return False
        return True


def _cell_volume(space: str, bounds) -> float:
    if space == "CP1":
        (rl, rh), (tl, th) = bounds
        r, w = _gl_nodes(rl, rh, 32)
        rad = np.sum(w * r / (1.0 + r * r) ** 2)
        return float((th - tl) / math.pi * rad)
    (r1l, r1h), (t1l, t1h), (r2l, r2h), (t2l, t2h) = bounds
    r1, w1 = _gl_nodes(r1l, r1h, 32)
    r2, w2 = _gl_nodes(r2l, r2h, 32)
    R1, R2 = np.meshgrid(r1, r2, indexing="ij")
    W = np.outer(w1, w2)
    rad = np.sum(W * R1 * R2 / (1.0 + R1 * R1 + R2 * R2) ** 3)
    return float((t1h - t1l) * (t2h - t2l) * 2.0 / math.pi ** 2 * rad)


@dataclass
class CellPartition:
    """Volume-calibrated cells covering the space up to measure zero."""

    space: str
    cells: list = field(default_factory=list)

    @property
    def K(self) -> int:
        return len(self.cells)

    def total_volume(self) -> float:
        return float(sum(c.fs_volume for c in self.cells))

    def locate(self, point) -> int:
        """Cell index of a homogeneous point; boundary ties go to the cell whose
        half-open box claims the coordinates (deterministic)."""
        coords = _domain_coords(self.space, point)
        for i, c in enumerate(self.cells):
            if c.chart == coords[0] and c.contains(coords[1]):
                return i
        raise AssertionError(f"point escaped all fundamental domains: {point}")


def _domain_coords(space: str, point):
    p = np.asarray(point, dtype=complex)
    if space == "CP1":
        k = int(np.argmax(np.abs(p)))
        z = p[1 - k] / p[k]
        r = abs(z)
        th = math.atan2(z.imag, z.real)
        if th >= math.pi:
            th = -math.pi
        return k, (min(r, np.nextafter(1.0, 0.0)), th)
    if space == "CP2":
        k = int(np.argmax(np.abs(p)))
        rest = [i for i in range(3) if i != k]
        out = []
        for i in rest:
            z = p[i] / p[k]
            r = abs(z)
            th = math.atan2(z.imag, z.real)
            if th >= math.pi:
                th = -math.pi
            out.extend([min(r, np.nextafter(1.0, 0.0)), th])
        return k, tuple(out)
    raise ValueError("partitions are implemented on CP1 and CP2")


def build_partition(space: str, K: int) -> CellPartition:
    """Split the fundamental domains into ~K polar boxes of balanced FS volume.

    Deterministic: the largest-volume cell splits at the midpoint of its widest
    axis (axis widths measured relative to the full axis range) until the count
    reaches K. Cell volumes come from Gauss-Legendre quadrature of the FS
    density; angular integration is exact.
    """
    if K < 2:
        raise ValueError("need at least two cells")
    ncharts = 2 if space == "CP1" else 3
    if space == "CP1":
        boxes = [((0.0, 1.0), (-math.pi, math.pi))] * ncharts
        ranges = [1.0, TWO_PI]
    else:
        boxes = [((0.0, 1.0), (-math.pi, math.pi), (0.0, 1.0), (-math.pi, math.pi))] * ncharts
        ranges = [1.0, TWO_PI, 1.0, TWO_PI]
    cells = [Cell(ch, b, _cell_volume(space, b)) for ch, b in enumerate(boxes)]
    while len(cells) < K:
        i = max(range(len(cells)), key=lambda j: (cells[j].fs_volume, -j))
        c = cells.pop(i)
        widths = [(hi - lo) / rng for (lo, hi), rng in zip(c.bounds, ranges)]
        ax = int(np.argmax(widths))
        lo, hi = c.bounds[ax]
        mid = 0.5 * (lo + hi)
        for part in ((lo, mid), (mid, hi)):
            b = tuple(part if k == ax else c.bounds[k] for k in range(len(c.bounds)))
            cells.append(Cell(c.chart, b, _cell_volume(space, b)))
    cells.sort(key=lambda c: (c.chart, c.bounds))
    return CellPartition(space, cells)


@dataclass
class EmpiricalMeasure:
    """Binned counting measure over a fixed partition, aggregated over trials."""

    partition: CellPartition
    counts: np.ndarray = None
    total: int = 0
    trials: int = 0

    def __post_init__(self):
        if self.counts is None:
            self.counts = np.zeros(self.partition.K, dtype=np.int64)

    def merge(self, other: "EmpiricalMeasure") -> "EmpiricalMeasure":
        assert self.partition is other.partition or self.partition.K == other.partition.K
        return EmpiricalMeasure(self.partition, self.counts + other.counts,
                                self.total + other.total, self.trials + other.trials)


def accumulate(measure: EmpiricalMeasure, points) -> EmpiricalMeasure:
    """Bin a point set (critical point set or raw homogeneous rows) into the
    measure; count conservation is asserted."""
    rows = getattr(points, "points", points)
    counts = measure.counts.copy()
    for p in rows:
        counts[measure.partition.locate(p)] += 1
    out = EmpiricalMeasure(measure.partition, counts,
                           measure.total + len(rows), measure.trials + 1)
    assert out.counts.sum() == out.total
    return out


def discrepancy(measure: EmpiricalMeasure, partition: CellPartition | None = None):
    """Sup-cell and L1 distance between the empirical cell masses and the FS
    volumes."""
    partition = partition or measure.partition
    if measure.total <= 0:
        raise ValueError("empty measure")
    emp = measure.counts / measure.total
    vol = np.array([c.fs_volume for c in partition.cells])
    diff = np.abs(emp - vol)
    return {"sup": float(np.max(diff)), "l1": float(np.sum(diff))}


# ---------------------------------------------------------------------------
# test functions


@dataclass(frozen=True)
class TestFunction:
    """Cell indicator or a C^2 radial bump with closed-form Laplacian.

    The bump is (1 - (rho/R)^2)^3 inside radius R of the chart-coordinate
    center: C^2 at the rim, values in [0, 1], maximum one at the center.
    """

    kind: str                          # "indicator" | "bump"
    cell_index: int = -1
    center: complex = 0j
    radius: float = 1.0

    def __call__(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        t = np.abs(z - self.center) ** 2 / self.radius ** 2
        return np.where(t < 1.0, (1.0 - np.minimum(t, 1.0)) ** 3, 0.0)

    def laplacian(self, z: np.ndarray) -> np.ndarray:
        """2d Laplacian of the bump in chart coordinates, closed form."""
        z = np.asarray(z, dtype=complex)
        R2 = self.radius ** 2
        rho2 = np.abs(z - self.center) ** 2
        t = rho2 / R2
        inside = t < 1.0
        val = -12.0 / R2 * (1.0 - t) ** 2 + 24.0 * rho2 / R2 ** 2 * (1.0 - t)
        return np.where(inside, val, 0.0)


@dataclass(frozen=True)
class SumTestFunction:
    """Finite sum of bumps; used to exercise linearity of the pairings."""

    components: tuple

    def __call__(self, z):
        return sum(c(z) for c in self.components)

    def laplacian(self, z):
        return sum(c.laplacian(z) for c in self.components)


def indicator_test_function(partition: CellPartition, cell_index: int):
    def chi(points):
        rows = getattr(points, "points", points)
        return np.array([1.0 if partition.locate(p) == cell_index else 0.0
                         for p in rows])
    return chi


def integrate_test_function(chi, points) -> float:
    """Per-trial pairing <nu, chi> = average of chi over the point set.

    `chi` may be a TestFunction acting on chart coordinates (CP1 usage) or any
    callable mapping homogeneous rows to values.
    """
    rows = getattr(points, "points", points)
    if len(rows) == 0:
        raise ValueError("empty point set")
    vals = chi(rows)
    return float(np.mean(vals))


def tube_mass(points, width: float) -> float:
    """Fraction of points within the width-`width` tube of the real locus:
    distance to the conjugate point at most 2 * width."""
    if width <= 0:
        raise ValueError("width must be positive")
    from .critpoints import distance_to_conjugate
    dist = getattr(points, "dist_conj", None)
    if dist is None:
        rows = getattr(points, "points", points)
        dist = np.array([distance_to_conjugate(p) for p in rows])
    if len(dist) == 0:
        raise ValueError("empty point set")
    return float(np.mean(dist <= 2.0 * width))


def growth_regression(rows):
    """Weighted least squares of log(mean) on log(d).

    `rows` holds (d, mean, stderr) triples; Gaussian error propagation gives
    var(log mean) = (stderr/mean)^2 as weights, with equal weights when no
    positive stderr is supplied (exact synthetic data). Returns slope,
    intercept and a 95% t confidence interval on the slope.
    """
    rows = list(rows)
    ds = np.array([r[0] for r in rows], dtype=float)
    means = np.array([r[1] for r in rows], dtype=float)
    errs = np.array([r[2] if len(r) > 2 else 0.0 for r in rows], dtype=float)
    if len(ds) < 4 or len(np.unique(ds)) < 4:
        raise ValueError("need at least 4 distinct degrees")
    if np.any(means <= 0):
        raise ValueError("means must be positive for a log-log fit")
    x = np.log(ds)
    y = np.log(means)
    if np.all(errs > 0):
        w = (means / errs) ** 2
    else:
        w = np.ones_like(y)
    W = np.sum(w)
    xb = np.sum(w * x) / W
    yb = np.sum(w * y) / W
    sxx = np.sum(w * (x - xb) ** 2)
    slope = np.sum(w * (x - xb) * (y - yb)) / sxx
    intercept = yb - slope * xb
    resid = y - (intercept + slope * x)
    dof = len(x) - 2
    s2 = np.sum(w * resid ** 2) / dof if dof > 0 else 0.0
    se = math.sqrt(s2 / sxx) if sxx > 0 else 0.0
    tq = stats.t.ppf(0.975, dof) if dof > 0 else 0.0
    return {"slope": float(slope), "intercept": float(intercept),
            "slope_ci": (float(slope - tq * se), float(slope + tq * se)),
            "slope_se": float(se)}


# ---------------------------------------------------------------------------
# FS-uniform oracle sampler (inverse CDF on the fundamental domains)


def fs_uniform_points(space: str, n: int, rng: np.random.Generator) -> np.ndarray:
    """Exactly FS-uniform random points, by inverse-CDF sampling in the polar
    coordinates of a uniformly chosen fundamental domain.

    Independent of the ensemble machinery: this is the calibration oracle for
    partitions and discrepancy floors.
    """
    if space == "CP1":
        k = rng.integers(0, 2, size=n)
        u = rng.random(n)
        s = u / (2.0 - u)                      # CDF of r^2 restricted to the disk
        th = rng.random(n) * TWO_PI
        z = np.sqrt(s) * np.exp(1j * th)
        pts = np.ones((n, 2), dtype=complex)
        pts[np.arange(n), 1 - k] = z
        return pts
    if space != "CP2":
        raise ValueError("oracle sampler covers CP1 and CP2")
    k = rng.integers(0, 3, size=n)
    u1 = rng.random(n)
    # marginal of s = r1^2: (1+s)(2+s) = 1 / (1/2 - u/3), closed-form inverse
    c = 0.5 - u1 / 3.0
    s = 0.5 * (-3.0 + np.sqrt(1.0 + 4.0 / c))
    u2 = rng.random(n)
    a = (1.0 + s) ** -2
    b = (2.0 + s) ** -2
    t = ((a - u2 * (a - b)) ** -0.5) - (1.0 + s)
    th1 = rng.random(n) * TWO_PI
    th2 = rng.random(n) * TWO_PI
    z1 = np.sqrt(s) * np.exp(1j * th1)
    z2 = np.sqrt(t) * np.exp(1j * th2)
    pts = np.ones((n, 3), dtype=complex)
    rest = np.array([[1, 2], [0, 2], [0, 1]])
    for ch in range(3):
        m = k == ch
        pts[np.ix_(m, rest[ch])] = np.stack([z1[m], z2[m]], axis=1)
    return pts
