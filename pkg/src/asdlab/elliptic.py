"""Weierstrass curves over Q and quadratic fields.

Reduction and naive point counting, extension-field counts via the trace
recursion, division polynomials, Velu isogenies, the de Rham pullback of
an isogeny, the CM eigenbasis computation, and the hypergeometric 1/pi
evaluation attached to a CM Legendre curve.

Internally the CM eigenbasis pipeline works with sympy radical arithmetic
(the Legendre example needs the biquadratic compositum of the base field
and the CM field); results are converted back to exact Rational/QuadElem
scalars at the boundary whenever they live in a quadratic field.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import sympy as sp
from gmpy2 import mpq

from .exactnum import QuadElem, kronecker

_x = sp.Symbol("x")


class SingularCurve(ValueError):
    pass


class BadReduction(ValueError):
    pass


class NonIntegralModel(ValueError):
    pass


class InvalidKernel(ValueError):
    pass


class NoKernelFound(ValueError):
    pass


class NotAnEndomorphism(ValueError):
    pass


class RepeatedEigenvalues(ValueError):
    pass


class NotNearInteger(ValueError):
    pass


class DivergentParameter(ValueError):
    pass


def _to_sympy(v):
    if isinstance(v, QuadElem):
        return sp.Rational(str(v.a)) + sp.Rational(str(v.b)) * sp.sqrt(v.d)
    return sp.Rational(str(mpq(v)))


def from_sympy(expr):
    """Convert a sympy number back to mpq or QuadElem if it lies in a quadratic field."""
    expr = sp.nsimplify(sp.radsimp(sp.simplify(expr)))
    if expr.is_rational:
        return mpq(str(expr))
    expr = sp.expand(expr)
    if expr.has(sp.I):
        re, im = expr.as_real_imag()
        if re.is_rational and im.is_rational:
            return QuadElem(mpq(str(re)), mpq(str(im)), -1)
    roots = sorted(
        {a for a in expr.atoms(sp.Pow) if a.exp == sp.Rational(1, 2) and a.base.is_Integer},
        key=str,
    )
    if len(roots) == 1:
        r = roots[0]
        d = int(r.base)
        poly = sp.Poly(expr, r)
        if poly.degree() <= 1:
            b = poly.coeff_monomial(r)
            a = poly.coeff_monomial(1)
            if a.is_rational and b.is_rational:
                return QuadElem(mpq(str(a)), mpq(str(b)), d)
    return expr


@dataclass(frozen=True)
class Curve:
    """y^2 + a1 xy + a3 y = lead x^3 + a2 x^2 + a4 x + a6 (lead defaults to 1)."""

    a1: object = 0
    a2: object = 0
    a3: object = 0
    a4: object = 0
    a6: object = 0
    lead: object = 1

    def invariants_scaled(self):
        """a-invariants of the standard model reached by (x,y) -> (lead*x, lead*y)."""
        c = self.lead
        return (self.a1, self.a2, self.a3 * c, self.a4 * c, self.a6 * c * c)

    def b_invariants(self):
        a1, a2, a3, a4, a6 = self.invariants_scaled()
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8

    def discriminant(self):
        b2, b4, b6, b8 = self.b_invariants()
        return -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    def j_invariant(self):
        b2, b4, b6, b8 = self.b_invariants()
        c4 = b2 * b2 - 24 * b4
        disc = self.discriminant()
        return _div(c4 * c4 * c4, disc)


def _div(a, b):
    if isinstance(a, sp.Expr) or isinstance(b, sp.Expr):
        return sp.simplify(sp.sympify(a) / sp.sympify(b))
    if isinstance(a, QuadElem) or isinstance(b, QuadElem):
        if not isinstance(a, QuadElem):
            a = QuadElem(mpq(a), 0, b.d)
        return a / b
    return mpq(a) / mpq(b)


@dataclass(frozen=True)
class ShortCurve:
    """y^2 = x^3 + A x + B with the recorded transform from the original model.

    transform = (scale, r, s, t): x_short = scale*x + r, y_short = scale*y + s*x + t.
    """

    A: object
    B: object
    transform: tuple = (1, 0, 0, 0)

    def discriminant(self):
        return -16 * (4 * _pow3(self.A) + 27 * self.B * self.B)

    def j_invariant(self):
        A, B = self.A, self.B
        num = 4 * _pow3(A)
        return _div(1728 * num, num + 27 * B * B)


def _pow3(v):
    return v * v * v


def to_short(curve: Curve) -> ShortCurve:
    """Complete the square and depress the cubic, recording the isomorphism."""
    if _is_zero(curve.discriminant()):
        raise SingularCurve("zero discriminant")
    c = curve.lead
    a1, a2, a3, a4, a6 = curve.invariants_scaled()
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    # (y + (a1 x + a3)/2)^2 = x^3 + (b2/4) x^2 + (b4/2) x + b6/4, then x -> x - b2/12
    r = _div(b2, 12)
    A = _div(b4, 2) - _div(b2 * b2, 48)
    B = _div(b6, 4) - _div(b2 * b4, 24) + _div(b2 * b2 * b2, 864)
    s = _div(a1 * c, 2)
    t = _div(a3 * c, 2)
    return ShortCurve(A, B, (c, r, s, t))


def _is_zero(v):
    if isinstance(v, QuadElem):
        return v.a == 0 and v.b == 0
    return mpq(v) == 0


# ---------------------------------------------------------------------------
# point counting
# ---------------------------------------------------------------------------


def reduce_and_count(curve: Curve, p: int) -> tuple[int, int]:
    """(a_p, #E(F_p)) by the naive quadratic-character sum; p odd, good reduction."""
    if p == 2:
        raise ValueError("p must be odd")
    for v in (curve.a1, curve.a2, curve.a3, curve.a4, curve.a6, curve.lead):
        if isinstance(v, QuadElem):
            raise NonIntegralModel("counting requires a rational model")
        if mpq(v).denominator % p == 0:
            raise NonIntegralModel(f"coefficient {v} is not p-integral at p={p}")
    disc = curve.discriminant()
    if mpq(disc) == 0 or _valnum(mpq(disc), p) > 0:
        raise BadReduction(f"p={p} divides the discriminant")
    a1, a2, a3, a4, a6, c = (
        _modp(curve.a1, p),
        _modp(curve.a2, p),
        _modp(curve.a3, p),
        _modp(curve.a4, p),
        _modp(curve.a6, p),
        _modp(curve.lead, p),
    )
    # (2y + a1 x + a3)^2 = 4(c x^3 + a2 x^2 + a4 x + a6) + (a1 x + a3)^2
    count = 1  # point at infinity
    nonres = [kronecker(v, p) for v in range(p)]
    for xv in range(p):
        rhs = (4 * (((c * xv + a2) * xv + a4) * xv + a6) + (a1 * xv + a3) ** 2) % p
        count += 1 + nonres[rhs]
    a_p = p + 1 - count
    assert a_p * a_p <= 4 * p, f"Hasse bound violated: a_p={a_p}, p={p}"
    return a_p, count


def _modp(v, p: int) -> int:
    v = mpq(v)
    return int(v.numerator) * pow(int(v.denominator), -1, p) % p


def _valnum(x: mpq, p: int) -> int:
    if x == 0:
        return 10**9
    v = 0
    num, den = int(x.numerator), int(x.denominator)
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def count_ext(a_p: int, p: int, r: int) -> int:
    """#E(F_{p^r}) from a_p via the trace recursion t_j = a_p t_{j-1} - p t_{j-2}."""
    if r < 1:
        raise ValueError("r must be >= 1")
    t_prev, t_cur = 2, a_p
    for _ in range(r - 1):
        t_prev, t_cur = t_cur, a_p * t_cur - p * t_prev
    return p**r + 1 - t_cur


def frobenius_trace_power(a_p: int, p: int, r: int) -> int:
    """t_r = alpha^r + beta^r for the Frobenius roots of T^2 - a_p T + p."""
    t_prev, t_cur = 2, a_p
    for _ in range(r - 1):
        t_prev, t_cur = t_cur, a_p * t_cur - p * t_prev
    return t_cur if r >= 1 else 2


# ---------------------------------------------------------------------------
# division polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DivPoly:
    m: int
    xpart: object  # sympy Poly in x
    has_y_factor: bool


def division_poly(short: ShortCurve, m: int) -> DivPoly:
    """The m-th division polynomial of y^2 = x^3 + Ax + B (x-part; even m carry a factor y)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    A = _to_sympy(short.A) if not isinstance(short.A, sp.Expr) else short.A
    B = _to_sympy(short.B) if not isinstance(short.B, sp.Expr) else short.B
    P = _divpoly_xparts(A, B, m)
    return DivPoly(m, sp.Poly(sp.expand(P[m]), _x), m % 2 == 0)


def _divpoly_xparts(A, B, m_max: int):
    """P[m] = psi_m with the y factored out for even m (so P[m] in K[x])."""
    x = _x
    f = x**3 + A * x + B  # y^2
    P = {
        0: sp.Integer(0),
        1: sp.Integer(1),
        2: sp.Integer(2),
        3: 3 * x**4 + 6 * A * x**2 + 12 * B * x - A * A,
        4: 4 * (x**6 + 5 * A * x**4 + 20 * B * x**3 - 5 * A * A * x**2 - 4 * A * B * x - 8 * B * B - A**3),
    }
    for m in range(5, m_max + 1):
        if m in P:
            continue
        n = m // 2
        if m % 2 == 1:
            # psi_{2n+1} = psi_{n+2} psi_n^3 - psi_{n-1} psi_{n+1}^3, with y^4 -> f^2
            if n % 2 == 0:
                P[m] = sp.expand(f * f * P[n + 2] * P[n] ** 3 - P[n - 1] * P[n + 1] ** 3)
            else:
                P[m] = sp.expand(P[n + 2] * P[n] ** 3 - f * f * P[n - 1] * P[n + 1] ** 3)
        else:
            P[m] = sp.expand(P[n] * (P[n + 2] * P[n - 1] ** 2 - P[n - 2] * P[n + 1] ** 2) / 2)
    return P


# ---------------------------------------------------------------------------
# isogenies
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Isogeny:
    domain: ShortCurve
    codomain: ShortCurve
    degree: int
    kernel_xpoly: object  # sympy Poly (monic) in x
    alpha: object = 1  # pullback scalar of dx/y (Velu-normalized: 1)
    kernel_xsum: object = 0


@dataclass(frozen=True)
class DeRhamVec:
    """The class c1 dx/y + c2 x dx/y modulo exact forms."""

    c1: object
    c2: object


def velu(short: ShortCurve, kernel) -> Isogeny:
    """Velu isogeny with the given kernel x-polynomial (sympy expr/Poly) or 2-torsion x0."""
    A = _to_sympy(short.A) if not isinstance(short.A, sp.Expr) else sp.sympify(short.A)
    B = _to_sympy(short.B) if not isinstance(short.B, sp.Expr) else sp.sympify(short.B)
    f = _x**3 + A * _x + B
    if isinstance(kernel, sp.Poly):
        kernel = kernel.as_expr()
    elif not isinstance(kernel, sp.Expr):
        kernel = _x - _to_sympy(kernel)
    ker = sp.Poly(sp.expand(sp.sympify(kernel)), _x)
    ker = ker.monic()
    g = ker.degree()
    if g < 1:
        raise InvalidKernel("kernel polynomial must be nonconstant")
    # power sums of the kernel roots
    coeffs = ker.all_coeffs()
    e1 = -coeffs[1] if g >= 1 else 0
    e2 = coeffs[2] if g >= 2 else 0
    e3 = -coeffs[3] if g >= 3 else 0
    p1 = e1
    p2 = e1 * p1 - 2 * e2
    p3 = e1 * p2 - e2 * p1 + 3 * e3
    rem = sp.rem(f, ker.as_expr(), _x)
    is_two_torsion = g == 1 and sp.simplify(rem) == 0
    if is_two_torsion:
        x0 = e1
        tQ = 3 * x0 * x0 + A
        t_sum = tQ
        w_sum = x0 * tQ  # u_Q = 2 y^2 = 0 on 2-torsion
        degree = 2
        xsum = x0
    else:
        # each root carries two kernel points (P and -P)
        if g >= 1 and sp.simplify(sp.gcd(ker.as_expr(), f)) != 1:
            raise InvalidKernel("kernel mixes 2-torsion with odd-order points")
        t_sum = 2 * (3 * p2 + g * A)
        w_sum = 2 * (5 * p3 + 3 * A * p1 + 2 * g * B)
        degree = 2 * g + 1
        xsum = 2 * p1
    At = sp.expand(A - 5 * t_sum)
    Bt = sp.expand(B - 7 * w_sum)
    codomain = ShortCurve(At, Bt)
    return Isogeny(short, codomain, degree, ker, 1, sp.expand(xsum))


def pullback_second(iso: Isogeny) -> DeRhamVec:
    """Pullback of X dX/Y: (deg/alpha) x dx/y - (kernel_xsum/alpha) dx/y + exact."""
    alpha = sp.sympify(iso.alpha)
    return DeRhamVec(sp.simplify(-sp.sympify(iso.kernel_xsum) / alpha), sp.simplify(iso.degree / alpha))


def kernel_search(short: ShortCurve, ell: int, extensions=()) -> list:
    """Monic degree-(ell-1)/2 factors of psi_ell over the field generated by
    ``extensions`` (sympy radicals), each verified by exact trial division."""
    if ell > 13 or ell % 2 == 0 or not sp.isprime(ell):
        raise ValueError("ell must be an odd prime <= 13")
    psi = division_poly(short, ell).xpart
    target_deg = (ell - 1) // 2
    ext = [e for e in extensions if e is not None]
    if ext:
        fl = sp.factor_list(psi.as_expr(), extension=ext)
    else:
        fl = sp.factor_list(psi.as_expr())
    out = []
    for fac, mult in fl[1]:
        P = sp.Poly(fac, _x).monic()
        if P.degree() == target_deg:
            q, r = sp.div(psi.as_expr(), P.as_expr(), _x)
            if sp.simplify(r) != 0:
                raise ArithmeticError("factor does not divide the division polynomial")
            out.append(P)
    return sorted(out, key=lambda P: str(P.as_expr()))


def _norm_prime(pi: QuadElem):
    """Smallest odd prime ell = N(a + b*pi) with b != 0, plus the next one."""
    found = []
    for bound in range(2, 60):
        for a in range(-bound, bound + 1):
            for b in range(1, bound + 1):
                val = a + b * pi  # QuadElem supports int + QuadElem
                n = val.norm()
                if n.denominator == 1:
                    n = int(n)
                    if n > 2 and sp.isprime(n) and n not in found:
                        found.append(n)
        if len(found) >= 2:
            break
    if not found:
        raise NotAnEndomorphism("no small norm-form prime for the given generator")
    return sorted(found)[:2]


def cm_eigenbasis(curve: Curve, pi: QuadElem, ell: int | None = None):
    """Eigenbasis of the CM action on the de Rham classes (c1, c2) of ``curve``.

    ``pi`` generates the CM order (trusted input, verified a posteriori by the
    existence of a kernel whose Velu codomain reproduces j).  Returns two
    DeRhamVec in the coordinates of the original model, each normalized to
    c1 = 1 when c1 != 0 (else c2 = 1).
    """
    if curve.a1 != 0 or curve.a3 != 0:
        raise ValueError("de Rham transport implemented for models with a1 = a3 = 0")
    short = to_short(curve)
    A = _to_sympy(short.A)
    B = _to_sympy(short.B)
    if A == 0 or B == 0:
        raise ValueError("j in {0, 1728} excluded")
    if ell is None:
        ell = _norm_prime(pi)[0]
    # extensions: curve field and CM field generators
    exts = set()
    for v in (curve.a2, curve.a4, curve.a6, curve.lead):
        if isinstance(v, QuadElem):
            exts.add(sp.sqrt(v.d))
    exts.add(sp.sqrt(pi.d))
    kernels = kernel_search(ShortCurve(A, B), ell, sorted(exts, key=str))
    jE = sp.nsimplify(sp.simplify(ShortCurve(A, B).j_invariant()))
    results = []
    for ker in kernels:
        iso = velu(ShortCurve(A, B), ker)
        jC = sp.simplify(iso.codomain.j_invariant())
        if sp.simplify(jC - jE) != 0:
            continue
        At, Bt = sp.sympify(iso.codomain.A), sp.sympify(iso.codomain.B)
        v2 = sp.simplify(At * B / (A * Bt))  # v^2 for the iso codomain -> E, K-rational
        S = sp.sympify(iso.kernel_xsum)
        lam2 = sp.simplify(v2 * iso.degree)
        if sp.simplify(lam2 - 1) == 0:
            raise RepeatedEigenvalues("endomorphism acts as a scalar on de Rham classes")
        # rescaled K-rational matrix [[1, -v2*S], [0, v2*deg]]; eigenvectors:
        # (1, 0) and (C1, C2) with C1/C2 = v2*S/(1 - v2*deg)
        if sp.simplify(S) == 0:
            C1, C2 = sp.Integer(0), sp.Integer(1)
        else:
            C1 = sp.simplify(v2 * S / (1 - lam2))
            C2 = sp.Integer(1)
        results.append((C1, C2))
    if not results:
        raise NotAnEndomorphism(f"no degree-{ell} kernel reproduces j; pi is not an endomorphism generator")
    # all candidate kernels must agree
    base = results[0]
    for other in results[1:]:
        if sp.simplify(base[0] * other[1] - base[1] * other[0]) != 0:
            raise ArithmeticError("kernel candidates produced inconsistent eigenvectors")
    scale, r, _, _ = short.transform
    scale_s, r_s = _to_sympy(scale), _to_sympy(r)
    out = []
    for C1, C2 in [(sp.Integer(1), sp.Integer(0)), base]:
        c1 = sp.simplify(C1 + C2 * r_s)
        c2 = sp.simplify(scale_s * C2)
        if sp.simplify(c1) != 0:
            c2 = sp.radsimp(sp.simplify(c2 / c1))
            c1 = sp.Integer(1)
        else:
            c1 = sp.Integer(0)
            c2 = sp.Integer(1)
        out.append(DeRhamVec(from_sympy(c1), from_sympy(c2)))
    return tuple(out)


# ---------------------------------------------------------------------------
# named families
# ---------------------------------------------------------------------------


def family_thm16(u) -> Curve:
    """y^2 = 4x^3 - (1+14u+u^2)/12 x + (1-33u-33u^2+u^3)/216."""
    u = u if isinstance(u, QuadElem) else mpq(u)
    one = 1
    a4 = _div(-(one + 14 * u + u * u), 12)
    a6 = _div(one - 33 * u - 33 * u * u + u * u * u, 216)
    return Curve(0, 0, 0, a4, a6, lead=4)


def family_ex13(u) -> Curve:
    """y^2 + (1-u^2) xy - u^2 y = x^3 - u^2 x^2."""
    u = mpq(u)
    return Curve(1 - u * u, -u * u, -u * u, 0, 0)


def family_thm17(jval) -> Curve:
    """y^2 + xy = x^3 - 36/(j-1728) x - 1/(j-1728)."""
    jval = mpq(jval)
    if jval == 1728:
        raise SingularCurve("j = 1728 is excluded")
    d = jval - 1728
    return Curve(1, 0, 0, mpq(-36) / d, mpq(-1) / d)


def family_legendre(u) -> Curve:
    """y^2 = x(1-x)(1-ux) = u x^3 - (1+u) x^2 + x (lead = u)."""
    uq = u if isinstance(u, QuadElem) else mpq(u)
    return Curve(0, -(1 + uq), 0, 1, 0, lead=uq)


# ---------------------------------------------------------------------------
# CM j-values and the 1/pi formula
# ---------------------------------------------------------------------------


def cm_j_from_disc(a: int, b: int, D: int, precision: int = 30, n_terms: int = 60) -> int:
    """j(alpha) rounded to the nearest integer, alpha = (-b + sqrt(-D))/(2a).

    Evaluates the exact j-expansion at q = e^(2 pi i alpha) in high-precision
    floating point and insists the result is within 1e-6 of an integer.
    """
    import mpmath as mp

    from .modforms import build

    with mp.workdps(precision):
        alpha = (-b + mp.sqrt(-D)) / (2 * a)
        q = mp.e ** (2j * mp.pi * alpha)
        j = build("j", n_terms)
        val = mp.mpc(0)
        for idx in range(j.lo, j.trunc):
            c = j.coeff_index(idx)
            if c != 0:
                val += mp.mpf(int(c.numerator)) / int(c.denominator) * q**idx
        nearest = mp.nint(val.real)
        if abs(val - nearest) > 1e-6:
            raise NotNearInteger(f"j(alpha) = {val} is not near an integer")
        return int(nearest)


def ramanujan_pi(u, c1, c2, K: int):
    """Exact (a, lambda) and the K-term partial sum of
    sum_k (1 + a k) ((1/2)_k^3 / k!^3) lambda^k  (which converges to alpha_u/pi).

    a = -c2 (1+u)/u and lambda = -4u/(1-u)^2, i.e. 4u'(1-u') at the isomorphic
    Legendre parameter u' = u/(u-1); requires |u| < 1, |u/(u-1)| < 1, and
    |lambda| < 1 under the real embedding.
    """
    import mpmath as mp

    us = _to_sympy(u)
    c2s = _to_sympy(c2)
    a = sp.radsimp(sp.simplify(-c2s * (1 + us) / us))
    lam = sp.radsimp(sp.simplify(-4 * us / (1 - us) ** 2))
    uf = float(us)
    if not (abs(uf) < 1 and abs(uf / (uf - 1)) < 1 and abs(float(lam)) < 1):
        raise DivergentParameter("parameter outside the convergence region")
    with mp.workdps(40):
        af = mp.mpf(str(sp.N(a, 40)))
        lf = mp.mpf(str(sp.N(lam, 40)))
        total = mp.mpf(0)
        term = mp.mpf(1)  # (1/2)_k^3 / k!^3 * lam^k at k=0
        for k in range(K + 1):
            total += (1 + af * k) * term
            term *= ((mp.mpf(1) / 2 + k) / (k + 1)) ** 3 * lf
        return from_sympy(a), from_sympy(lam), total
