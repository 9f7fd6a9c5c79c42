"""Gaussian ensembles of sections with Fubini-Study L^2 weights.

The Hermitian L^2 product on sections diagonalizes in the monomial basis; on
CP^n the variances are multinomial coefficients (the Kostlan ensemble), and on
CP^1 x CP^1 products of binomials. That identification is not taken on faith:
`fs_monomial_inner_product` integrates h^d(z^a, z^b) against the Fubini-Study
volume numerically, and the test suite gates the weights on it.

Sampling is counter-based (Philox keyed by master seed and trial index), so a
trial's section is a pure function of (spec, trial_index) no matter how trials
are scheduled across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .poly import HomogeneousPolynomial, monomial_basis, nvars

_SQRT_HALF = math.sqrt(0.5)


def kostlan_weight(d: int, alpha) -> float:
    """Variance of the monomial coefficient: multinomial d!/(a0! a1! ...) on CP^n,
    a product of per-factor binomials on CP^1 x CP^1 (alpha of length 4).

    Normalized so pure powers get weight one. Falls back to log-space when the
    exact integer overflows a double.
    """
    alpha = tuple(int(a) for a in alpha)
    if any(a < 0 for a in alpha):
        raise ValueError("negative exponent")
    if len(alpha) == 4:
        return kostlan_weight(d, alpha[:2]) * kostlan_weight(d, alpha[2:])
    if sum(alpha) != d:
        raise ValueError(f"multi-index {alpha} does not have degree {d}")
    num = math.factorial(d)
    den = math.prod(math.factorial(a) for a in alpha)
    w = num // den if num % den == 0 else num / den
    try:
        return float(w)
    except OverflowError:
        lg = math.lgamma(d + 1) - sum(math.lgamma(a + 1) for a in alpha)
        return math.exp(lg)


@dataclass(frozen=True)
class EnsembleSpec:
    """Ambient space, degree, coefficient field and master seed of an ensemble."""

    space: str
    degree: int
    field: str = "complex"              # "real" | "complex"
    master_seed: int = 0

    def __post_init__(self):
        if self.field not in ("real", "complex"):
            raise ValueError("field must be 'real' or 'complex'")
        if self.degree < 1:
            raise ValueError("degree must be >= 1")
        nvars(self.space)

    @property
    def monomials(self) -> list[tuple]:
        return monomial_basis(self.space, self.degree)

    @property
    def N_d(self) -> int:
        n = len(self.monomials)
        assert n > 0
        return n

    def weights(self) -> dict:
        return {a: kostlan_weight(self.degree, a) for a in self.monomials}

    def to_json_dict(self) -> dict:
        return {"space": self.space, "degree": self.degree,
                "field": self.field, "master_seed": self.master_seed}

    @staticmethod
    def from_json_dict(d) -> "EnsembleSpec":
        return EnsembleSpec(d["space"], d["degree"], d["field"], d["master_seed"])


def sample_section(spec: EnsembleSpec, trial_index: int) -> HomogeneousPolynomial:
    """Draw one Gaussian section.

    Coefficient of monomial alpha is sqrt(w_alpha) * g_alpha with g_alpha a
    standard Gaussian of variance 1/2 per real component, matching the density
    exp(-||sigma||^2). The stream is keyed by (master_seed, trial_index) and the
    monomial rank fixes the draw order, so samples are bit-reproducible and
    independent of worker scheduling.
    """
    basis = spec.monomials
    bits = np.random.Philox(key=np.array(
        [spec.master_seed & (2**64 - 1), trial_index & (2**64 - 1)], dtype=np.uint64))
    rng = np.random.Generator(bits)
    n = len(basis)
    if spec.field == "complex":
        g = rng.standard_normal(2 * n)
        gc = (g[0::2] + 1j * g[1::2]) * _SQRT_HALF
    else:
        gc = rng.standard_normal(n) * _SQRT_HALF
    coeffs = {}
    for a, gv in zip(basis, gc):
        coeffs[a] = math.sqrt(kostlan_weight(spec.degree, a)) * gv
    return HomogeneousPolynomial(spec.space, spec.degree, coeffs)


def l2_inner_product(P: HomogeneousPolynomial, Q: HomogeneousPolynomial) -> complex:
    """<P, Q> = sum conj(p_a) q_a / w_a, the FS product normalized so pure powers
    are unit vectors."""
    if P.space != Q.space or P.degree != Q.degree:
        raise ValueError("inner product needs matching space and degree")
    d = P.degree if P.space != "CP1xCP1" else P.degree[0]
    acc = 0j
    for a, pc in P.coeffs.items():
        qc = Q.coeffs.get(a)
        if qc is not None:
            acc += pc.conjugate() * qc / kostlan_weight(d, a)
    return acc


def l2_norm(P: HomogeneousPolynomial) -> float:
    return math.sqrt(max(l2_inner_product(P, P).real, 0.0))


# ---------------------------------------------------------------------------
# Fubini-Study integration oracle


def _radial_nodes(n: int):
    # Gauss-Legendre on (0, 1), mapped to (0, inf) by r = t/(1-t)
    x, w = np.polynomial.legendre.leggauss(n)
    t = 0.5 * (x + 1.0)
    wt = 0.5 * w
    r = t / (1.0 - t)
    jac = 1.0 / (1.0 - t) ** 2
    return r, wt * jac


def fs_monomial_inner_product(space: str, d: int, alpha, beta,
                              radial_nodes: int = 160, angular_nodes: int | None = None) -> complex:
    """Numerical integral of h^d(z^alpha, z^beta) over the space against the
    normalized Fubini-Study volume (curvature of O(1), total mass one).

    This is the independent quadrature oracle used to certify the closed-form
    Kostlan weights; it never consults `kostlan_weight`.
    """
    alpha, beta = tuple(alpha), tuple(beta)
    if angular_nodes is None:
        angular_nodes = 4 * d + 8
    th = 2.0 * np.pi * np.arange(angular_nodes) / angular_nodes
    wth = 2.0 * np.pi / angular_nodes

    def angular(da):
        return wth * np.sum(np.exp(1j * da * th))

    r, wr = _radial_nodes(radial_nodes)

    if space == "CP1":
        a, b = alpha[0], beta[0]
        ang = angular(a - b)
        rad = np.sum(wr * r ** (a + b + 1) * (1.0 + r * r) ** (-(d + 2)))
        return complex(ang * rad / np.pi)
    if space == "CP2":
        ang = angular(alpha[0] - beta[0]) * angular(alpha[1] - beta[1])
        R1, R2 = np.meshgrid(r, r, indexing="ij")
        W = np.outer(wr, wr)
        rad = np.sum(W * R1 ** (alpha[0] + beta[0] + 1) * R2 ** (alpha[1] + beta[1] + 1)
                     * (1.0 + R1 * R1 + R2 * R2) ** (-(d + 3.0)))
        return complex(ang * rad * 2.0 / np.pi ** 2)
    if space == "CP1xCP1":
        f1 = fs_monomial_inner_product("CP1", d, alpha[:2], beta[:2], radial_nodes, angular_nodes)
        f2 = fs_monomial_inner_product("CP1", d, alpha[2:], beta[2:], radial_nodes, angular_nodes)
        return f1 * f2
    raise ValueError(f"unknown space {space!r}")
