"""Critical points of the reference Lefschetz pencil restricted to a random curve.

On CP^2 the pencil is the projection [x:y:z] -> [y:z] away from the base point
[1:0:0]; its fibers are the lines through the base point and the fiber direction
is d/dx. Critical points of the restriction to {f=0} are the solutions of
{f = 0, df/dx = 0}: the resultant in x is a binary form R(y,z) of degree d(d-1)
whose simple roots are the critical fibers; back-substitution in x and a Newton
polish of the full system certify each point with residuals. On CP^1 x CP^1 the
pencil is the first-factor projection (no base locus) and the same elimination
runs in the second-factor coordinate; after deflating the spurious infinity
factor the count is the Riemann-Hurwitz number 2d(d-1).

Trials whose certificates fail (near-multiple resultant roots, residuals, base
point on the curve) raise DegenerateInstance; callers resample and log.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import exact
from .poly import HomogeneousPolynomial, partial_derivative
from .uniroots import DegenerateInstance, complex_roots

CLUSTER_RADIUS = 1e-6       # resultant roots closer than this -> degenerate trial
MATCH_TOL = 1e-6            # pairing tolerance for back-substituted roots
RESIDUAL_TOL = 1e-8
BASE_TOL = 1e-10            # |f(base)| / ||f|| below this -> degenerate
STURM_CERT_MAX_DEGREE = 200  # full Sturm chains on R up to here, exact sign tests beyond


@dataclass(frozen=True)
class PencilModel:
    """The fixed pencil: CP^2 projection from [1:0:0], or the first-factor
    projection on CP^1 x CP^1."""

    space: str = "CP2"

    @property
    def base_point(self):
        return (1.0, 0.0, 0.0) if self.space == "CP2" else None

    @property
    def fiber_variable(self) -> int:
        # the variable whose coordinate field spans ker(dp) in the default chart
        return 0 if self.space == "CP2" else 2

    @property
    def expected_count(self):
        # CP2: Bezout of (d, d-1). Product: Riemann-Hurwitz for the degree-d
        # cover of CP1 cut out by a smooth (d,d) curve of genus (d-1)^2.
        def n(d):
            return d * (d - 1) if self.space == "CP2" else 2 * d * (d - 1)
        return n


@dataclass
class CriticalPointSet:
    """R_sigma with residual certificates and reality data."""

    space: str
    degree: int
    points: np.ndarray                  # (N, 3) or (N, 4) unit-normalized complex
    fiber: np.ndarray                   # (N,) affine fiber value (y/z, resp. x0/x1)
    xval: np.ndarray                    # (N,) fiber-direction coordinate of the point
    residuals: np.ndarray               # (N,) max of the two system residuals
    is_real: np.ndarray = None          # (N,) bool, set by classify_real
    dist_conj: np.ndarray = None        # (N,) FS distance to the conjugate point
    degenerate: bool = False
    ambiguous: bool = False             # reality classification inconclusive
    recert_method: str = ""

    def __post_init__(self):
        n = len(self.points)
        if self.is_real is None:
            self.is_real = np.zeros(n, dtype=bool)
        if self.dist_conj is None:
            self.dist_conj = np.array([distance_to_conjugate(p) for p in self.points])

    def __len__(self):
        return len(self.points)

    @property
    def real_count(self) -> int:
        return int(np.sum(self.is_real))

    def csv_rows(self, trial_index: int):
        for i in range(len(self)):
            f, x = self.fiber[i], self.xval[i]
            yield (trial_index, i, f.real, f.imag, x.real, x.imag,
                   float(self.residuals[i]), int(self.is_real[i]),
                   float(self.dist_conj[i]))


def distance_to_conjugate(point) -> float:
    """FS geodesic distance arccos|<v, conj v>| between a point and its image
    under coordinate conjugation; zero exactly on the real locus.

    The cosine is the ratio |sum v_i^2| / sum |v_i|^2, which is identically one
    for real vectors (term-by-term the same sums), so real points return 0.0
    rather than the sqrt(roundoff) floor a pre-normalized acos would give.
    """
    v = np.asarray(point, dtype=complex)

    def factor(u):
        q = abs(np.sum(u * u)) / np.sum(np.abs(u) ** 2)
        return math.acos(min(q, 1.0))

    if len(v) == 4:  # product metric on CP1 x CP1
        return math.hypot(factor(v[:2]), factor(v[2:]))
    return factor(v)


def critical_system(f: HomogeneousPolynomial, pencil: PencilModel | None = None,
                    chart_variable: int | None = None):
    """(f, df(v)) where v is the pencil's fiber-direction coordinate field.

    CP^2: v = d/dx globally on the standard chart family. CP^1 x CP^1: v is the
    second-factor chart field d/dy0 (pass chart_variable=3 for the mirror chart).
    """
    if not f.coeffs:
        raise ValueError("zero section")
    pencil = pencil or PencilModel(f.space)
    var = pencil.fiber_variable if chart_variable is None else chart_variable
    return f, partial_derivative(f, var)


# ---------------------------------------------------------------------------
# resultant elimination


def _x_coefficient_forms(f: HomogeneousPolynomial):
    """f = sum_i A_i(y, z) x^i: dense binary-form coefficients A[i][j] y^j z^(d-i-j)."""
    d = f.degree
    A = [np.zeros(d - i + 1, dtype=complex) for i in range(d + 1)]
    for (a, b, c), v in f.coeffs.items():
        A[a][b] += v
    return A


def _w_coefficient_forms(f: HomogeneousPolynomial):
    """Product case, chart y1 = 1: f = sum_j C_j(x0, x1) w^j with w = y0."""
    d1, d2 = f.degree
    C = [np.zeros(d1 + 1, dtype=complex) for _ in range(d2 + 1)]
    for (a, b, c, e), v in f.coeffs.items():
        C[c][a] += v
    return C


def _eval_forms_on_circle(forms, M: int):
    """Evaluate each binary form at (t_j, 1), t_j the M-th roots of unity."""
    t = np.exp(2j * np.pi * np.arange(M) / M)
    maxdeg = max(len(c) for c in forms) - 1
    powers = t[:, None] ** np.arange(maxdeg + 1)[None, :]
    return [powers[:, : len(c)] @ c for c in forms], t


def _sylvester_dets(acoef, bcoef):
    """Batched determinant of the Sylvester matrix of two x-polynomials whose
    coefficients (lists of length-M arrays, low->high in x) vary over M nodes."""
    m = len(acoef) - 1
    n = len(bcoef) - 1
    s = m + n
    M = len(acoef[0])
    S = np.zeros((M, s, s), dtype=complex)
    for r in range(n):
        for i in range(m + 1):
            S[:, r, r + (m - i)] = acoef[i]
    for r in range(m):
        for i in range(n + 1):
            S[:, n + r, r + (n - i)] = bcoef[i]
    return np.linalg.det(S)


def resultant_fiber_form(f: HomogeneousPolynomial) -> np.ndarray:
    """Res_x(f, f_x) as a binary form in the fiber coordinates, degree d(d-1).

    Sylvester determinants are evaluated at >= 2 deg + 1 points on the unit
    circle and interpolated by inverse FFT; sampling on the circle keeps the
    interpolation unitary. (CP^1 x CP^1: Res_w, degree d(2d-1).)
    """
    if f.space == "CP2":
        d = f.degree
        D = d * (d - 1)
        A = _x_coefficient_forms(f)
        B = [(i + 1) * A[i + 1] for i in range(d)]
    else:
        d = f.degree[0]
        D = d * (2 * d - 1)
        A = _w_coefficient_forms(f)
        B = [(j + 1) * A[j + 1] for j in range(len(A) - 1)]
    M = max(2 * d * d + 1, D + 2)
    av, _ = _eval_forms_on_circle(A, M)
    bv, _ = _eval_forms_on_circle(B, M)
    vals = _sylvester_dets(av, bv)
    # values at the M-th roots of unity; forward DFT / M recovers coefficients
    coeffs = np.fft.fft(vals) / M
    tail = np.max(np.abs(coeffs[D + 1:])) if D + 1 < M else 0.0
    scale = np.max(np.abs(coeffs[: D + 1]))
    if scale == 0 or tail > 1e-8 * scale:
        raise DegenerateInstance("resultant interpolation lost the degree structure")
    return coeffs[: D + 1]


def exact_resultant_leading(f: HomogeneousPolynomial) -> Fraction:
    """Leading coefficient of Res_x(f, f_x)(t, 1) in exact rational arithmetic.

    Lagrange interpolation at integer nodes with fraction-free determinant
    evaluations; nonzero iff the resultant has full degree d(d-1). Intended for
    the symbolic degree audit at small d.
    """
    if f.space != "CP2":
        raise ValueError("exact degree audit is for CP2")
    if not f.is_real:
        raise ValueError("exact audit expects a real section")
    d = f.degree
    D = d * (d - 1)
    A = _x_coefficient_forms(f)
    Aq = [[Fraction(x.real) for x in ai] for ai in A]

    def form_at(coeffs, t):
        acc = Fraction(0)
        tp = Fraction(1)
        for c in coeffs:
            acc += c * tp
            tp *= t
        return acc

    def det_fraction(Mrows):
        n = len(Mrows)
        M = [row[:] for row in Mrows]
        det = Fraction(1)
        for k in range(n):
            piv = next((r for r in range(k, n) if M[r][k] != 0), None)
            if piv is None:
                return Fraction(0)
            if piv != k:
                M[k], M[piv] = M[piv], M[k]
                det = -det
            det *= M[k][k]
            inv = M[k][k]
            for r in range(k + 1, n):
                fac = M[r][k] / inv
                if fac:
                    for cidx in range(k, n):
                        M[r][cidx] -= fac * M[k][cidx]
        return det

    nodes = [Fraction(j) for j in range(D + 1)]
    vals = []
    for t in nodes:
        a = [form_at(Aq[i], t) for i in range(d + 1)]
        b = [(i + 1) * a[i + 1] for i in range(d)]
        m, n = d, d - 1
        s = m + n
        S = [[Fraction(0)] * s for _ in range(s)]
        for r in range(n):
            for i in range(m + 1):
                S[r][r + (m - i)] = a[i]
        for r in range(m):
            for i in range(n + 1):
                S[n + r][r + (n - i)] = b[i]
        vals.append(det_fraction(S))
    lead = Fraction(0)
    for j, t in enumerate(nodes):
        denom = Fraction(1)
        for i, u in enumerate(nodes):
            if i != j:
                denom *= (t - u)
        lead += vals[j] / denom
    return lead


def _projective_roots_of_form(coeffs: np.ndarray):
    """All projective roots [t : 1] / [1 : s] of a binary form given by its
    chart-1 coefficients (low->high in t), formal degree len-1.

    Chart 1 keeps |t| <= 1, the reversed chart covers the rest: every root is
    found in a chart where it has modulus at most one.
    """
    D = len(coeffs) - 1
    out = []
    rs1 = complex_roots(coeffs)
    for z, r in zip(rs1.roots, rs1.residuals):
        if abs(z) <= 1.0:
            out.append(((complex(z), 1.0 + 0j), float(r)))
    rs2 = complex_roots(coeffs[::-1])
    for z, r in zip(rs2.roots, rs2.residuals):
        if abs(z) < 1.0:
            out.append(((1.0 + 0j, complex(z)), float(r)))
    if len(out) != D:
        raise DegenerateInstance(
            f"projective root count {len(out)} != formal degree {D}")
    return out


def _fiber_separation_check(fibers):
    v = np.array([np.array(yz, complex) / np.linalg.norm(np.array(yz, complex))
                  for yz, _ in fibers])
    n = len(v)
    if n < 2:
        return
    # chordal distance |y_i z_j - y_j z_i| on unit pairs
    cross = np.abs(v[:, None, 0] * v[None, :, 1] - v[None, :, 0] * v[:, None, 1])
    np.fill_diagonal(cross, np.inf)
    if np.min(cross) < CLUSTER_RADIUS:
        raise DegenerateInstance(
            f"resultant has a near-multiple root (separation {np.min(cross):.2e})")


def _binary_form_value(A, y, z):
    """Evaluate a list of binary forms (each homogeneous of degree len-1) at (y, z)."""
    top = max(len(a) for a in A)
    ypow = y ** np.arange(top)
    zpow = z ** np.arange(top)
    return np.array([np.sum(a * ypow[: len(a)] * zpow[: len(a)][::-1]) for a in A])


def _matched_common_root(r1, r2) -> complex:
    """The unique common root of the two root lists, matched within MATCH_TOL.

    On a simple critical fiber the restricted f has a double root at the
    tangency and f_x a simple one, so matches are clustered by location: exactly
    one distinct matched location is the acceptance condition.
    """
    if not len(r1) or not len(r2):
        raise DegenerateInstance("back-substitution found no roots to match")
    d = np.abs(r1[:, None] - r2[None, :])
    lim = MATCH_TOL * np.maximum(1.0, np.abs(r1))[:, None]
    ii, jj = np.nonzero(d < lim)
    if len(ii) == 0:
        raise DegenerateInstance("back-substitution matched no common root")
    cand = 0.5 * (r1[ii] + r2[jj])
    ref = cand[0]
    if np.any(np.abs(cand - ref) > 2 * MATCH_TOL * max(1.0, abs(ref))):
        raise DegenerateInstance("back-substitution matched several x locations")
    return complex(np.mean(cand))


def solve_critical_points(f: HomogeneousPolynomial,
                          pencil: PencilModel | None = None) -> CriticalPointSet:
    """Compute R_sigma = Crit(p|_{f=0}) with residual certificates.

    Accepted CP^2 trials carry exactly d(d-1) simple points (d(2d-1) on the
    product); anything less certified raises DegenerateInstance for resampling.
    """
    pencil = pencil or PencilModel(f.space)
    if f.space != pencil.space:
        raise ValueError("pencil/space mismatch")
    if f.space == "CP2":
        return _solve_cp2(f)
    return _solve_p1p1(f)


def _solve_cp2(f: HomogeneousPolynomial) -> CriticalPointSet:
    d = f.degree
    if d < 2:
        raise ValueError("critical systems need degree >= 2")
    sup = f.sup_norm()
    if sup == 0:
        raise ValueError("zero section")
    fn = f.scaled(1.0 / sup)
    base_val = fn.coeffs.get((d, 0, 0), 0j)
    if abs(base_val) < BASE_TOL:
        raise DegenerateInstance("curve passes through the pencil base point")

    R = resultant_fiber_form(fn)
    fibers = _projective_roots_of_form(R)
    _fiber_separation_check(fibers)

    A = _x_coefficient_forms(fn)
    B = [(i + 1) * A[i + 1] for i in range(d)]

    # seed x from the simple f_x root where |f| is smallest: the double root of
    # the restricted f is too split-sensitive to match before the fiber is
    # polished, the f_x root is not
    pts = []
    for (y0, z0), _ in fibers:
        a = _binary_form_value(A, y0, z0)
        b = _binary_form_value(B, y0, z0)
        rs_g = complex_roots(b)
        fv = np.abs(_poly_values(a, rs_g.roots))
        fv /= np.maximum(1.0, np.abs(rs_g.roots)) ** d
        x0 = rs_g.roots[int(np.argmin(fv))]
        pts.append(np.array([x0, y0, z0], dtype=complex))

    pts = _newton_polish_cp2(fn, np.array(pts))
    pts /= np.linalg.norm(pts, axis=1)[:, None]

    # the spec's matching gate, applied at the polished fibers where the
    # tangency double root has collapsed back together
    for p in pts:
        a = _binary_form_value(A, p[1], p[2])
        b = _binary_form_value(B, p[1], p[2])
        _matched_common_root(complex_roots(a).roots, complex_roots(b).roots)

    res = _system_residuals(fn, pts)
    if np.max(res) >= RESIDUAL_TOL:
        raise DegenerateInstance(f"polished residual {np.max(res):.2e} too large")
    if len(pts) != d * (d - 1):
        raise DegenerateInstance("critical point count off")
    _distinctness_check(pts)
    fib = np.where(np.abs(pts[:, 2]) > 0, pts[:, 1] / pts[:, 2], np.inf)
    xv = np.where(np.abs(pts[:, 2]) > 0, pts[:, 0] / pts[:, 2], np.inf)
    return CriticalPointSet(f.space, d, pts, fib, xv, res)


def _poly_values(coeffs, z):
    v = np.full_like(np.asarray(z, complex), coeffs[-1])
    for k in range(len(coeffs) - 2, -1, -1):
        v = v * z + coeffs[k]
    return v


def _distinctness_check(pts: np.ndarray):
    if len(pts) < 2:
        return
    g = np.abs(pts @ np.conj(pts).T)
    np.fill_diagonal(g, 0.0)
    if np.max(g) > 1.0 - 1e-14:
        worst = math.sqrt(max(1.0 - np.max(g) ** 2, 0.0))
        raise DegenerateInstance(f"two critical points coincide (sep {worst:.2e})")


def _chart_arrays_cp2(f: HomogeneousPolynomial):
    """Dense chart-2 (z=1) and chart-1 (y=1) arrays of f and the partials used
    by the Newton polish: (g, g_x, g_t, g_xx, g_xt) per chart."""
    from .poly import dehomogenize
    fx = partial_derivative(f, 0)
    fxx = partial_derivative(fx, 0)
    fy = partial_derivative(f, 1)
    fz = partial_derivative(f, 2)
    fxy = partial_derivative(fx, 1)
    fxz = partial_derivative(fx, 2)
    charts = {}
    for chart, tvar in ((2, fy), (1, fz)):
        gxt = fxy if chart == 2 else fxz
        charts[chart] = tuple(dehomogenize(p, chart) for p in (f, fx, tvar, fxx, gxt))
    return charts


def _guarded_newton_2d(arrs, u, t, iters: int = 8):
    """Damped Newton on the 2x2 system (g, g_u) with backtracking line search;
    a step is only taken when it reduces the residual."""
    g, gu, gt, guu, gut = arrs

    def resid(uu, tt):
        return np.maximum(np.abs(g.evaluate_many(uu, tt)),
                          np.abs(gu.evaluate_many(uu, tt)))

    r = resid(u, t)
    for _ in range(iters):
        F1 = g.evaluate_many(u, t)
        F2 = gu.evaluate_many(u, t)
        J11 = gu.evaluate_many(u, t)
        J12 = gt.evaluate_many(u, t)
        J21 = guu.evaluate_many(u, t)
        J22 = gut.evaluate_many(u, t)
        det = J11 * J22 - J12 * J21
        ok = np.abs(det) > 1e-300
        du = np.where(ok, (F1 * J22 - F2 * J12) / det, 0)
        dt = np.where(ok, (J11 * F2 - J21 * F1) / det, 0)
        step = 1.0
        any_improved = np.zeros(len(u), dtype=bool)
        for _bt in range(4):
            cu, ct = u - step * du, t - step * dt
            rc = resid(cu, ct)
            better = (rc < r) & ~any_improved
            u = np.where(better, cu, u)
            t = np.where(better, ct, t)
            r = np.where(better, rc, r)
            any_improved |= better
            if np.all(any_improved):
                break
            step *= 0.5
        if not np.any(any_improved):
            break
    return u, t


def _newton_polish_cp2(f: HomogeneousPolynomial, pts: np.ndarray, iters: int = 8):
    """Polish (f, f_x) = 0 jointly in (x, fiber) chart coordinates."""
    charts = _chart_arrays_cp2(f)
    out = pts.copy()
    for chart in (2, 1):
        if chart == 2:
            sel = np.abs(pts[:, 2]) >= np.abs(pts[:, 1])
        else:
            sel = np.abs(pts[:, 2]) < np.abs(pts[:, 1])
        if not np.any(sel):
            continue
        w = pts[sel]
        denom = w[:, chart]
        u = w[:, 0] / denom
        t = (w[:, 1] / denom) if chart == 2 else (w[:, 2] / denom)
        # chart coords of dehomogenize are the remaining vars in index order:
        # chart 2 -> (x, y); chart 1 -> (x, z)
        u, t = _guarded_newton_2d(charts[chart], u, t, iters)
        if chart == 2:
            new = np.stack([u, t, np.ones_like(u)], axis=1)
        else:
            new = np.stack([u, np.ones_like(u), t], axis=1)
        out[sel] = new
    return out


def _system_residuals(f: HomogeneousPolynomial, pts: np.ndarray) -> np.ndarray:
    fx = partial_derivative(f, 0)
    rf = _homog_values(f, pts)
    rg = _homog_values(fx, pts)
    nf = max(abs(c) for c in f.coeffs.values())
    ng = max(abs(c) for c in fx.coeffs.values())
    return np.maximum(np.abs(rf) / nf, np.abs(rg) / ng)


def _homog_values(P: HomogeneousPolynomial, pts: np.ndarray) -> np.ndarray:
    """Vectorized evaluation of a homogeneous polynomial at unit points."""
    vals = np.zeros(len(pts), dtype=complex)
    n = pts.shape[1]
    deg = P.degree if not isinstance(P.degree, tuple) else None
    maxexp = [0] * n
    for a in P.coeffs:
        for i in range(n):
            maxexp[i] = max(maxexp[i], a[i])
    pows = [
        pts[:, i][:, None] ** np.arange(maxexp[i] + 1)[None, :]
        for i in range(n)
    ]
    for a, c in P.coeffs.items():
        term = np.full(len(pts), c, dtype=complex)
        for i, e in enumerate(a):
            if e:
                term = term * pows[i][:, e]
        vals += term
    return vals


# ---------------------------------------------------------------------------
# CP1 x CP1


def _deflate_binary_form(R: np.ndarray, D: np.ndarray) -> np.ndarray:
    """Exact-degree division of binary forms, R = Q * D, returning Q.

    Performs the synthetic division from whichever end of D has the larger
    coefficient; a noticeable remainder means the assumed factor is absent.
    """
    q_len = len(R) - len(D) + 1
    if q_len <= 0:
        raise DegenerateInstance("deflation degree mismatch")
    flip = abs(D[0]) > abs(D[-1])
    Rw = R[::-1].copy() if flip else R.copy()
    Dw = D[::-1] if flip else D
    Q = np.zeros(q_len, dtype=complex)
    for k in range(q_len - 1, -1, -1):
        Q[k] = Rw[len(Dw) - 1 + k] / Dw[-1]
        Rw[k: k + len(Dw)] -= Q[k] * Dw
    rem = np.max(np.abs(Rw[: len(Dw) - 1])) if len(Dw) > 1 else 0.0
    if rem > 1e-7 * max(np.max(np.abs(R)), 1e-300):
        raise DegenerateInstance(f"deflation remainder {rem:.2e} too large")
    return Q[::-1] if flip else Q


def _solve_p1p1(f: HomogeneousPolynomial) -> CriticalPointSet:
    d = f.degree[0]
    if f.degree[0] != f.degree[1] or d < 1:
        raise ValueError("expected bidegree (d, d) with d >= 1")
    fn = f.scaled(1.0 / f.sup_norm())
    Cforms = _w_coefficient_forms(fn)
    if np.max(np.abs(Cforms[-1])) < BASE_TOL:
        raise DegenerateInstance("restriction to the infinity section degenerates")
    R = resultant_fiber_form(fn)
    # Res_w(f, f_w) also vanishes on the d fibers meeting C on {y1 = 0}, where
    # both leading w-coefficients vanish without a tangency; the spurious factor
    # is exactly the top coefficient form C_d, deflated here.
    R = _deflate_binary_form(R, Cforms[-1])
    fibers = _projective_roots_of_form(R)
    _fiber_separation_check(fibers)

    C = Cforms
    Cw = [(j + 1) * C[j + 1] for j in range(len(C) - 1)]
    Crev = C[::-1]
    Cwrev = [(j + 1) * Crev[j + 1] for j in range(len(Crev) - 1)]
    pts = []
    for (x0, x1), _ in fibers:
        # seed from the f_w roots of both factor-2 charts; |f| normalized at the
        # unit lift makes the two candidate pools directly comparable
        best, best_m = None, np.inf
        for forms, dforms, rev in ((C, Cw, False), (Crev, Cwrev, True)):
            a = _binary_form_value(forms, x0, x1)
            b = _binary_form_value(dforms, x0, x1)
            rs_g = complex_roots(b)
            if not len(rs_g.roots):
                continue
            fv = np.abs(_poly_values(a, rs_g.roots))
            fv /= (1.0 + np.abs(rs_g.roots) ** 2) ** (d / 2.0)
            i = int(np.argmin(fv))
            if fv[i] < best_m:
                best_m = fv[i]
                w = rs_g.roots[i]
                nm = math.hypot(abs(w), 1.0)
                best = (1.0 / nm, w / nm) if rev else (w / nm, 1.0 / nm)
        if best is None:
            raise DegenerateInstance("no back-substitution seed on a fiber")
        pts.append(np.array([x0, x1, best[0], best[1]], dtype=complex))
    pts = np.array(pts)
    pts = _newton_polish_p1p1(fn, pts)
    pts[:, :2] /= np.linalg.norm(pts[:, :2], axis=1)[:, None]
    pts[:, 2:] /= np.linalg.norm(pts[:, 2:], axis=1)[:, None]

    Crev = C[::-1]                      # chart y0 = 1, coordinate w' = y1
    Cwrev = [(j + 1) * Crev[j + 1] for j in range(len(Crev) - 1)]
    for p in pts:
        if abs(p[3]) >= abs(p[2]):
            a = _binary_form_value(C, p[0], p[1])
            b = _binary_form_value(Cw, p[0], p[1])
        else:
            a = _binary_form_value(Crev, p[0], p[1])
            b = _binary_form_value(Cwrev, p[0], p[1])
        _matched_common_root(complex_roots(a).roots, complex_roots(b).roots)

    res = _p1p1_residuals(fn, pts)
    if np.max(res) >= RESIDUAL_TOL:
        raise DegenerateInstance(f"polished residual {np.max(res):.2e} too large")
    if len(pts) != 2 * d * (d - 1):
        raise DegenerateInstance("critical point count off")
    fib = np.where(np.abs(pts[:, 1]) > 0, pts[:, 0] / pts[:, 1], np.inf)
    wv = np.where(np.abs(pts[:, 3]) > 0, pts[:, 2] / pts[:, 3], np.inf)
    full = np.concatenate([pts[:, :2], pts[:, 2:]], axis=1)
    return CriticalPointSet(f.space, d, full, fib, wv, res)


def _newton_polish_p1p1(f: HomogeneousPolynomial, pts: np.ndarray, iters: int = 8):
    """Polish (f, df/dw) = 0 per chart pair; factor charts are chosen by the
    coordinate of larger modulus so no point sits near a chart's infinity."""
    from .poly import dehomogenize
    out = pts.copy()
    for c1 in (1, 0):
        sel1 = (np.abs(pts[:, 1]) >= np.abs(pts[:, 0])) if c1 == 1 else \
               (np.abs(pts[:, 1]) < np.abs(pts[:, 0]))
        for c2 in (3, 2):
            sel = sel1 & ((np.abs(pts[:, 3]) >= np.abs(pts[:, 2])) if c2 == 3
                          else (np.abs(pts[:, 3]) < np.abs(pts[:, 2])))
            if not np.any(sel):
                continue
            wv = 5 - c2                  # free factor-2 variable: the w coordinate
            tv = 1 - c1                  # free factor-1 variable: fiber parameter
            fw = partial_derivative(f, wv)
            fww = partial_derivative(fw, wv)
            ft = partial_derivative(f, tv)
            fwt = partial_derivative(fw, tv)
            chart = (c1, c2)
            arrs = tuple(dehomogenize(p, chart) for p in (f, fw, ft, fww, fwt))
            w0 = pts[sel]
            t = w0[:, tv] / w0[:, c1]
            w = w0[:, wv] / w0[:, c2]
            # dehomogenize orders the chart coords (factor-1 var, factor-2 var);
            # the guarded solver treats the first slot as the f_u variable, so
            # swap roles: here the "u" of the system is w
            g, gw, gt, gww, gwt = arrs
            sys_arrs = (_Swapped(g), _Swapped(gw), _Swapped(gt), _Swapped(gww), _Swapped(gwt))
            w, t = _guarded_newton_2d(sys_arrs, w, t, iters)
            cols = [None] * 4
            cols[c1] = np.ones_like(t)
            cols[tv] = t
            cols[c2] = np.ones_like(w)
            cols[wv] = w
            out[sel] = np.stack(cols, axis=1)
    return out


class _Swapped:
    """Evaluate a two-variable AffinePolynomial with its arguments swapped."""

    def __init__(self, ap):
        self._ap = ap

    def evaluate_many(self, u, t):
        return self._ap.evaluate_many(t, u)


def _p1p1_residuals(f, pts):
    fw = partial_derivative(f, 2)
    rf = _homog_values(f, pts)
    rg = _homog_values(fw, pts)
    nf = max(abs(c) for c in f.coeffs.values())
    ng = max(abs(c) for c in fw.coeffs.values())
    return np.maximum(np.abs(rf) / nf, np.abs(rg) / ng)


# ---------------------------------------------------------------------------
# reality classification


def classify_real(points: CriticalPointSet, f: HomogeneousPolynomial) -> CriticalPointSet:
    """Set reality flags on a critical point set of a real section.

    A point is flagged real when its FS distance to the coordinate конjugate is
    below eps = max(1e-7, 10 residual); distances in [eps, 10 eps) leave the
    whole trial flagged ambiguous (excluded from real-count statistics). Flagged
    points are re-certified exactly: the real resultant form must have a real
    root in a matching isolating window (localized Sturm count, or an exact
    dyadic sign change beyond degree 200), and the back-substituted x must be
    certified by Sturm on the restriction to the fiber.
    """
    if not f.is_real:
        raise ValueError("classify_real expects a real section")
    if points.space != "CP2":
        return _classify_real_p1p1(points, f)
    d = f.degree
    fn = f.scaled(1.0 / f.sup_norm())
    dist = points.dist_conj
    eps = np.maximum(1e-7, 10.0 * points.residuals)
    flagged = dist < eps
    ambiguous = bool(np.any((dist >= eps) & (dist < 10.0 * eps)))

    R = resultant_fiber_form(fn)
    im_scale = np.max(np.abs(R.imag)) / np.max(np.abs(R.real))
    if im_scale > 1e-9:
        raise DegenerateInstance("resultant of a real section came out non-real")
    Rr = R.real

    method = "sturm-window" if len(Rr) - 1 <= STURM_CERT_MAX_DEGREE else "sign-change"
    chain_fwd = chain_rev = None
    ints_fwd = exact.trim(exact.dyadic_ints(list(Rr)))
    ints_rev = exact.trim(exact.dyadic_ints(list(Rr[::-1])))
    if method == "sturm-window":
        chain_fwd = exact.sturm_chain(ints_fwd)
        chain_rev = exact.sturm_chain(ints_rev)

    A = _x_coefficient_forms(fn)
    B = [(i + 1) * A[i + 1] for i in range(d)]
    is_real = np.zeros(len(points), dtype=bool)
    for i in np.nonzero(flagged)[0]:
        p = _realign_phase(points.points[i])
        y0, z0 = p[1].real, p[2].real
        if abs(z0) >= abs(y0):
            t0 = y0 / z0
            ok = _certify_real_fiber(ints_fwd, chain_fwd, t0)
            ok = ok and _certify_real_x(B, Fraction(t0), Fraction(1), p[0].real / z0)
        else:
            s0 = z0 / y0
            ok = _certify_real_fiber(ints_rev, chain_rev, s0)
            ok = ok and _certify_real_x(B, Fraction(1), Fraction(s0), p[0].real / y0)
        if ok:
            is_real[i] = True
        else:
            ambiguous = True

    # conjugation pairing: non-real points pair up, so N - #real is even
    if (len(points) - int(is_real.sum())) % 2 != 0:
        ambiguous = True
    return replace_points(points, is_real=is_real, ambiguous=points.ambiguous or ambiguous,
                          recert_method=method)


def replace_points(ps: CriticalPointSet, **kw) -> CriticalPointSet:
    out = CriticalPointSet(
        ps.space, ps.degree, ps.points, ps.fiber, ps.xval, ps.residuals,
        is_real=kw.get("is_real", ps.is_real),
        dist_conj=ps.dist_conj, degenerate=ps.degenerate,
        ambiguous=kw.get("ambiguous", ps.ambiguous),
        recert_method=kw.get("recert_method", ps.recert_method))
    return out


def _realign_phase(p: np.ndarray) -> np.ndarray:
    """Rotate a near-real projective point so its coordinates are real."""
    k = int(np.argmax(np.abs(p)))
    ph = p[k] / abs(p[k])
    return p / ph


_CERT_HALF_WIDTH = Fraction(1, 2 ** 21)  # ~5e-7, under half the cluster radius


def _certify_real_fiber(ints, chain, t0: float) -> bool:
    t = Fraction(t0)
    lo, hi = t - _CERT_HALF_WIDTH, t + _CERT_HALF_WIDTH
    if chain is not None:
        n = exact.count_real_roots(chain, lo, hi)
        if exact.sign_at(ints, lo) == 0:
            n += 1
        return n >= 1
    slo, shi = exact.sign_at(ints, lo), exact.sign_at(ints, hi)
    return slo == 0 or shi == 0 or slo != shi


def _certify_real_x(B, y: Fraction, z: Fraction, x0: float) -> bool:
    """Sturm-certify a real back-substituted x: the fiber restriction of f_x
    must have a real root in a window around the numeric candidate.

    The f_x root is the stable carrier of the tangency: the f restriction has a
    double root exactly at the critical fiber value, which generic rational
    fiber values split off the axis, so reality of the point is certified by
    the fiber root of R together with this root and the system residuals.
    """
    if not np.isfinite(x0):
        return False
    out = []
    for form in B:
        acc = Fraction(0)
        deg_i = len(form) - 1
        for j, c in enumerate(form):
            acc += Fraction(c.real) * y ** j * z ** (deg_i - j)
        out.append(acc)
    q = exact.trim(exact.dyadic_ints(out))
    if exact.degree(q) < 1:
        return False
    w = Fraction(1, 2 ** 16)
    lo, hi = Fraction(x0) - w, Fraction(x0) + w
    chain = exact.sturm_chain(q)
    n = exact.count_real_roots(chain, lo, hi)
    if exact.sign_at(q, lo) == 0:
        n += 1
    return n >= 1


def _classify_real_p1p1(points: CriticalPointSet, f) -> CriticalPointSet:
    # product case: distance test with the same thresholds; exact recertification
    # runs on the factor-1 resultant only (sign-change route)
    fn = f.scaled(1.0 / f.sup_norm())
    dist = points.dist_conj
    eps = np.maximum(1e-7, 10.0 * points.residuals)
    flagged = dist < eps
    ambiguous = bool(np.any((dist >= eps) & (dist < 10.0 * eps)))
    R = resultant_fiber_form(fn)
    if np.max(np.abs(R.imag)) > 1e-9 * np.max(np.abs(R.real)):
        raise DegenerateInstance("resultant of a real section came out non-real")
    ints_fwd = exact.trim(exact.dyadic_ints(list(R.real)))
    ints_rev = exact.trim(exact.dyadic_ints(list(R.real[::-1])))
    is_real = np.zeros(len(points), dtype=bool)
    for i in np.nonzero(flagged)[0]:
        p = _realign_phase(points.points[i][:2])
        if abs(p[1]) >= abs(p[0]):
            ok = _certify_real_fiber(ints_fwd, None, p[0].real / p[1].real)
        else:
            ok = _certify_real_fiber(ints_rev, None, p[1].real / p[0].real)
        if ok:
            is_real[i] = True
        else:
            ambiguous = True
    if (len(points) - int(is_real.sum())) % 2 != 0:
        ambiguous = True
    return replace_points(points, is_real=is_real,
                          ambiguous=points.ambiguous or ambiguous,
                          recert_method="sign-change")
