"""Homogeneous and affine polynomial arithmetic on CP^1, CP^2 and CP^1 x CP^1.

A homogeneous polynomial is a sparse multi-index -> coefficient map; affine chart
representatives are dense coefficient arrays for the solvers. Values are immutable
after construction and safe to share across trial workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

SPACES = ("CP1", "CP2", "CP1xCP1")
_NVARS = {"CP1": 2, "CP2": 3, "CP1xCP1": 4}

#: unit roundoff of IEEE double
_U = 2.0 ** -53


def nvars(space: str) -> int:
    if space not in _NVARS:
        raise ValueError(f"unknown space {space!r}")
    return _NVARS[space]


def _bidegree(space, degree):
    if space == "CP1xCP1":
        return tuple(degree) if isinstance(degree, (tuple, list)) else (degree, degree)
    return degree


def valid_multiindex(space: str, degree, alpha) -> bool:
    alpha = tuple(alpha)
    if len(alpha) != nvars(space) or any(a < 0 for a in alpha):
        return False
    if space == "CP1xCP1":
        d1, d2 = _bidegree(space, degree)
        return alpha[0] + alpha[1] == d1 and alpha[2] + alpha[3] == d2
    return sum(alpha) == degree


def monomial_basis(space: str, degree) -> list[tuple]:
    """All valid multi-indices in a fixed deterministic (lexicographic) order.

    The position of a multi-index in this list is its rank, used to key the
    counter-based sampling streams.
    """
    if space == "CP1":
        return [(a, degree - a) for a in range(degree + 1)]
    if space == "CP2":
        out = []
        for a in range(degree + 1):
            for b in range(degree - a + 1):
                out.append((a, b, degree - a - b))
        return out
    d1, d2 = _bidegree(space, degree)
    return [(a, d1 - a, b, d2 - b) for a in range(d1 + 1) for b in range(d2 + 1)]


@dataclass(frozen=True)
class HomogeneousPolynomial:
    """A section of O(d) (or O(d1,d2)) in the monomial basis."""

    space: str
    degree: object                      # int, or (d1, d2) on CP1xCP1
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        deg = _bidegree(self.space, self.degree)
        object.__setattr__(self, "degree", deg)
        clean = {}
        for alpha, c in self.coeffs.items():
            alpha = tuple(int(a) for a in alpha)
            if not valid_multiindex(self.space, deg, alpha):
                raise ValueError(f"multi-index {alpha} invalid for {self.space} degree {deg}")
            c = complex(c)
            if c != 0:
                clean[alpha] = c
        object.__setattr__(self, "coeffs", clean)

    @property
    def is_real(self) -> bool:
        return all(c.imag == 0.0 for c in self.coeffs.values())

    @property
    def nvars(self) -> int:
        return nvars(self.space)

    def sup_norm(self) -> float:
        return max((abs(c) for c in self.coeffs.values()), default=0.0)

    def __call__(self, point):
        return evaluate(self, point)

    def scaled(self, factor) -> "HomogeneousPolynomial":
        return HomogeneousPolynomial(
            self.space, self.degree, {a: c * factor for a, c in self.coeffs.items()})

    def real_coeffs_exact(self) -> dict:
        """Coefficients as exact rationals (real polynomials only)."""
        if not self.is_real:
            raise ValueError("polynomial has non-real coefficients")
        return {a: Fraction(c.real) for a, c in self.coeffs.items()}

    def to_json_dict(self) -> dict:
        deg = self.degree
        if self.space == "CP1xCP1":
            if deg[0] != deg[1]:
                raise ValueError("only bidegree (d, d) serializes")
            deg = deg[0]
        return {
            "space": self.space,
            "degree": int(deg),
            "coeffs": [
                {"alpha": list(a), "re": c.real, "im": c.imag}
                for a, c in sorted(self.coeffs.items())
            ],
        }

    @staticmethod
    def from_json_dict(d: dict) -> "HomogeneousPolynomial":
        coeffs = {tuple(e["alpha"]): complex(e["re"], e["im"]) for e in d["coeffs"]}
        return HomogeneousPolynomial(d["space"], d["degree"], coeffs)


@dataclass(frozen=True)
class AffinePolynomial:
    """Chart representative: dense coefficients in chart coordinates.

    1-variable charts (CP1) use a 1-d array c[i] for u^i; 2-variable charts use
    c[i, j] for u^i v^j.
    """

    space: str
    chart: object
    coeffs: np.ndarray
    degree_bound: int = 0

    def __post_init__(self):
        a = np.asarray(self.coeffs, dtype=complex)
        object.__setattr__(self, "coeffs", a)
        if not self.degree_bound:
            object.__setattr__(self, "degree_bound", sum(s - 1 for s in a.shape))

    @property
    def nvars(self) -> int:
        return self.coeffs.ndim

    def __call__(self, point):
        return evaluate(self, point)

    def evaluate_many(self, *grids) -> np.ndarray:
        """Vectorized Horner evaluation on array arguments."""
        c = self.coeffs
        if c.ndim == 1:
            (z,) = grids
            v = np.full_like(np.asarray(z, complex), c[-1])
            for k in range(len(c) - 2, -1, -1):
                v = v * z + c[k]
            return v
        u, v = (np.asarray(g, complex) for g in grids)
        acc = np.zeros(np.broadcast(u, v).shape, complex)
        for i in range(c.shape[0] - 1, -1, -1):
            row = np.full_like(acc, c[i, -1])
            for j in range(c.shape[1] - 2, -1, -1):
                row = row * v + c[i, j]
            acc = acc * u + row
        return acc


# ---------------------------------------------------------------------------
# operations


def charts(space: str) -> list:
    if space == "CP1":
        return [0, 1]
    if space == "CP2":
        return [0, 1, 2]
    return [(0, 2), (0, 3), (1, 2), (1, 3)]


def lift(space: str, chart, point) -> tuple:
    """Chart coordinates -> homogeneous coordinates with the chart variable at 1."""
    point = tuple(point)
    if space in ("CP1", "CP2"):
        out = list(point)
        out.insert(chart, 1.0)
        return tuple(out)
    k1, k2 = chart
    out = [None] * 4
    out[k1], out[k2] = 1.0, 1.0
    rest = [i for i in range(4) if i not in (k1, k2)]
    out[rest[0]], out[rest[1]] = point[0], point[1]
    return tuple(out)


def dehomogenize(P: HomogeneousPolynomial, chart) -> AffinePolynomial:
    """Set the chart variable(s) to one; evaluation commutes with `lift`."""
    if chart not in charts(P.space):
        raise ValueError(f"chart {chart!r} invalid for {P.space}")
    if P.space == "CP1":
        other = 1 - chart
        c = np.zeros(P.degree + 1, complex)
        for a, v in P.coeffs.items():
            c[a[other]] += v
        return AffinePolynomial(P.space, chart, c)
    if P.space == "CP2":
        rest = [i for i in range(3) if i != chart]
        c = np.zeros((P.degree + 1, P.degree + 1), complex)
        for a, v in P.coeffs.items():
            c[a[rest[0]], a[rest[1]]] += v
        return AffinePolynomial(P.space, chart, c)
    k1, k2 = chart
    r1 = 1 - k1          # remaining variable of the first factor
    r2 = 5 - k2          # remaining variable of the second factor (2 or 3)
    d1, d2 = P.degree
    c = np.zeros((d1 + 1, d2 + 1), complex)
    for a, v in P.coeffs.items():
        c[a[r1], a[r2]] += v
    return AffinePolynomial(P.space, chart, c)


def partial_derivative(P: HomogeneousPolynomial, var: int) -> HomogeneousPolynomial:
    """d/dx_var; the result drops the matching (bi)degree component by one."""
    out = {}
    for a, c in P.coeffs.items():
        if a[var] == 0:
            continue
        b = list(a)
        b[var] -= 1
        out[tuple(b)] = c * a[var]
    if P.space == "CP1xCP1":
        d1, d2 = P.degree
        deg = (d1 - 1, d2) if var < 2 else (d1, d2 - 1)
        if not out:
            deg = (max(deg[0], 0), max(deg[1], 0))
    else:
        deg = max(P.degree - 1, 0)
    return HomogeneousPolynomial(P.space, deg, out)


def evaluate(P, point):
    """Value at a point (chart coordinates for AffinePolynomial, homogeneous
    coordinates otherwise)."""
    if isinstance(P, AffinePolynomial):
        if P.coeffs.ndim == 1:
            z = point[0] if np.ndim(point) else point
            return complex(P.evaluate_many(np.asarray(z, complex)))
        return complex(P.evaluate_many(point[0], point[1]))
    acc = 0j
    pt = [complex(x) for x in point]
    for a, c in P.coeffs.items():
        t = c
        for x, e in zip(pt, a):
            if e:
                t *= x ** e
        acc += t
    return acc


def evaluate_with_bound(P, point):
    """Value plus a rigorous unit-roundoff accumulation bound on its error."""
    if isinstance(P, AffinePolynomial):
        v = evaluate(P, point)
        c = np.abs(P.coeffs)
        pt = np.abs(np.atleast_1d(np.asarray(point, complex)))
        if P.coeffs.ndim == 1:
            s = sum(float(ci) * float(pt[0]) ** i for i, ci in enumerate(c))
        else:
            s = sum(float(c[i, j]) * float(pt[0]) ** i * float(pt[1]) ** j
                    for i in range(c.shape[0]) for j in range(c.shape[1]))
        ops = P.coeffs.size + P.degree_bound
        return v, 4.0 * ops * _U * s
    acc = 0j
    s = 0.0
    pt = [complex(x) for x in point]
    for a, c in P.coeffs.items():
        t = c
        for x, e in zip(pt, a):
            if e:
                t *= x ** e
        acc += t
        s += abs(t)
    ops = len(P.coeffs) + sum(max(a) for a in P.coeffs) if P.coeffs else 1
    return acc, 4.0 * ops * _U * s


def conjugate_section(P: HomogeneousPolynomial) -> HomogeneousPolynomial:
    """Coefficient conjugation: the pullback of P under the real structure."""
    return HomogeneousPolynomial(
        P.space, P.degree, {a: c.conjugate() for a, c in P.coeffs.items()})
