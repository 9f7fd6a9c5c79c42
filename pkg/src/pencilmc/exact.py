"""Exact integer/rational polynomial arithmetic: dyadic conversion, Sturm chains,
real-root counting and isolation.

Coefficient lists are ordered low degree -> high degree. Internally everything is
scaled to gmpy2 integers; double-precision inputs convert losslessly (a float is a
dyadic rational), so every count below is exact for the polynomial as represented
in the samples.
"""

from __future__ import annotations

from fractions import Fraction

import gmpy2
from gmpy2 import mpz

_divexact = gmpy2.divexact


def dyadic_ints(coeffs) -> list[mpz]:
    """Scale float (or Fraction) coefficients by a common power of two to integers.

    The polynomial is replaced by 2^E * p, which has the same roots and the same
    sign everywhere; the conversion is exact.
    """
    fracs = []
    for c in coeffs:
        if isinstance(c, Fraction):
            fracs.append((c.numerator, c.denominator))
        else:
            fracs.append(float(c).as_integer_ratio())
    # float denominators are powers of two; Fractions from floats too
    exps = [den.bit_length() - 1 for _, den in fracs]
    E = max(exps, default=0)
    return [mpz(num) << (E - e) for (num, den), e in zip(fracs, exps)]


def trim(p: list) -> list:
    while p and p[-1] == 0:
        p.pop()
    return p


def degree(p) -> int:
    return len(p) - 1


def derivative(p):
    return [p[i] * i for i in range(1, len(p))]


def poly_content(p) -> mpz:
    g = mpz(0)
    for c in p:
        if c:
            g = gmpy2.gcd(g, c)
            if g == 1:
                return g
    return g if g else mpz(1)


def primitive_part(p):
    g = poly_content(p)
    return [c // g for c in p] if g > 1 else list(p)


def poly_divexact(num, den):
    """Exact division of integer polynomials (num = q * den must hold in Q[x])."""
    num = [Fraction(int(c)) for c in num]
    den_f = [Fraction(int(c)) for c in den]
    q = [Fraction(0)] * (len(num) - len(den_f) + 1)
    r = list(num)
    for k in range(len(q) - 1, -1, -1):
        q[k] = r[len(den_f) - 1 + k] / den_f[-1]
        if q[k]:
            for j in range(len(den_f)):
                r[j + k] -= q[k] * den_f[j]
    if any(abs(c) > Fraction(0) for c in r[: len(den_f) - 1]):
        raise ArithmeticError("division is not exact")
    scale = 1
    for c in q:
        scale = scale * c.denominator // gmpy2.gcd(scale, c.denominator)
    out = [mpz(c.numerator) * (scale // c.denominator) for c in q]
    return primitive_part(out)


def _prem(A, B):
    """Pseudo-remainder lc(B)^(deg A - deg B + 1) * A  mod  B."""
    R = list(A)
    dB = len(B) - 1
    lB = B[-1]
    for _ in range(len(A) - len(B) + 1):
        q = R.pop()
        if q:
            for j in range(1, dB + 1):
                R[-j] = lB * R[-j] - q * B[dB - j]
            for j in range(len(R) - dB):
                R[j] = lB * R[j]
        else:
            for j in range(len(R)):
                R[j] = lB * R[j]
    return trim(R)


def sturm_chain(p) -> list[list]:
    """Generalized Sturm sequence of (p, p') over the integers.

    Built from the subresultant PRS (Collins), which keeps coefficient growth
    linear, with signs adjusted so that each member equals a positive multiple of
    the classical Sturm remainder -rem(prev, cur). Terminates at gcd(p, p'), so
    sign variations count *distinct* real roots even for non-squarefree input.
    """
    p = trim([mpz(c) for c in p])
    if degree(p) <= 0:
        return [p] if p else [[mpz(0)]]
    raw = [p, derivative(p)]
    eps = [1, 1]
    A, B = raw[0], raw[1]
    delta = degree(A) - degree(B)
    beta = mpz((-1) ** (delta + 1))
    psi = mpz(-1)
    while degree(B) >= 1:
        delta = degree(A) - degree(B)
        lB = B[-1]
        R = _prem(A, B)
        if not R:
            break
        R = [_divexact(c, beta) for c in R]
        # raw member R = (lc(B)^(delta+1)/beta) * rem(A, B); a generalized Sturm
        # sequence needs q_{i+1} = -(positive) * rem(q_{i-1}, q_i)
        s_m = (1 if lB > 0 else (-1) ** (delta + 1)) * (1 if beta > 0 else -1)
        eps.append(-eps[-2] * s_m)
        raw.append(R)
        # Collins recurrences for the next division
        if delta > 1:
            psi = _divexact((-lB) ** delta, psi ** (delta - 1))
        elif delta == 1:
            psi = -lB
        beta = -lB * psi ** (degree(B) - degree(R))
        A, B = B, R
    return [q if e > 0 else [-c for c in q] for q, e in zip(raw, eps)]


def _variations(signs) -> int:
    v, prev = 0, 0
    for s in signs:
        if s == 0:
            continue
        if prev and s != prev:
            v += 1
        prev = s
    return v


def sign_at(p, x: Fraction) -> int:
    """Exact sign of p at the rational point x (integer coefficients)."""
    a, b = mpz(x.numerator), mpz(x.denominator)
    acc = mpz(p[-1])
    pw = mpz(1)
    for c in reversed(p[:-1]):
        pw *= b
        acc = acc * a + c * pw
    return (acc > 0) - (acc < 0)


def _sign_inf(p, positive: bool) -> int:
    s = 1 if p[-1] > 0 else -1
    if not positive and degree(p) % 2 == 1:
        s = -s
    return s


def variations_at(chain, x) -> int:
    """Sign variations of the chain at x (a Fraction, or +/-inf as the strings)."""
    if x == "+inf":
        return _variations([_sign_inf(q, True) for q in chain])
    if x == "-inf":
        return _variations([_sign_inf(q, False) for q in chain])
    return _variations([sign_at(q, x) for q in chain])


def count_real_roots(chain, a=None, b=None) -> int:
    """Distinct real roots in (a, b] (whole line when a and b are omitted)."""
    va = variations_at(chain, "-inf" if a is None else a)
    vb = variations_at(chain, "+inf" if b is None else b)
    return va - vb


def root_bound(p) -> Fraction:
    """Cauchy bound: all real roots lie in (-B, B], B a power of two."""
    lc = abs(p[-1])
    m = max((abs(c) for c in p[:-1]), default=mpz(0))
    if m == 0:
        return Fraction(1)
    # 1 + m/lc  <=  2^k with  k = bitlen(m) - bitlen(lc) + 2
    k = max(int(m.bit_length()) - int(lc.bit_length()) + 2, 1)
    return Fraction(2) ** k


def squarefree_part(p):
    """p / gcd(p, p'), primitive over the integers."""
    p = trim([mpz(c) for c in p])
    chain = sturm_chain(p)
    g = chain[-1]
    if degree(g) <= 0:
        return primitive_part(p)
    return poly_divexact(p, g)


def isolate_roots(p, refine_width: Fraction = Fraction(1, 2**34)):
    """Disjoint rational isolating intervals, one per distinct real root.

    Intervals are half-open (a, b]; each carries a Sturm count of exactly one and
    is bisected below `refine_width`. The input is replaced by its squarefree part
    first, so multiple roots isolate once.
    """
    p = squarefree_part(p)
    if degree(p) <= 0:
        return []
    chain = sturm_chain(p)
    B = root_bound(p)
    out = []
    stack = [(-B, B, variations_at(chain, -B), variations_at(chain, B))]
    while stack:
        a, b, va, vb = stack.pop()
        n = va - vb
        if n == 0:
            continue
        if n == 1:
            while b - a > refine_width:
                m = (a + b) / 2
                vm = variations_at(chain, m)
                if va - vm == 1:
                    b, vb = m, vm
                else:
                    a, va = m, vm
            out.append((a, b))
            continue
        m = (a + b) / 2
        vm = variations_at(chain, m)
        stack.append((a, m, va, vm))
        stack.append((m, b, vm, vb))
    out.sort()
    return out
