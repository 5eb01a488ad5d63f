"""Truncated Laurent/Puiseux series in q^(1/mu) with exact coefficients.

A QSeries stores dense coefficients for exponent indices lo .. trunc-1,
where index n represents the monomial q^(n/mu).  Accessing an index at or
beyond the truncation order is a hard error -- silent zeros could fabricate
congruence verdicts downstream.

Multiplication of rational-coefficient series goes through Kronecker
substitution on common-denominator integer vectors (one big-integer GMP
multiply); inversion and square roots use Newton iteration on top of that.
"""

from __future__ import annotations

from math import gcd

import gmpy2
from gmpy2 import mpq, mpz

from .exactnum import QuadElem

__all__ = [
    "QSeries",
    "TruncationError",
    "NonUnitLeading",
    "NotASquare",
    "IncompatibleGrading",
    "prod_expand",
    "divisor_series",
]


class TruncationError(IndexError):
    """Coefficient requested at or beyond the valid truncation order."""


class NonUnitLeading(ValueError):
    pass


class NotASquare(ValueError):
    pass


class IncompatibleGrading(ValueError):
    pass


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


def _mul_nonneg(u: list[int], v: list[int], bits: int, need: int) -> list[int]:
    """Product of two nonnegative integer coefficient vectors, first ``need`` entries."""
    if not u or not v:
        return [0] * need
    a = gmpy2.pack([mpz(x) for x in u], bits)
    b = gmpy2.pack([mpz(x) for x in v], bits)
    out = gmpy2.unpack(a * b, bits)
    out = [int(x) for x in out[:need]]
    out += [0] * (need - len(out))
    return out


def _mul_int_vectors(u: list[int], v: list[int], need: int) -> list[int]:
    """Truncated convolution of integer vectors via Kronecker substitution."""
    if not u or not v or need <= 0:
        return [0] * max(need, 0)
    u = u[:need]
    v = v[:need]
    up = [x if x > 0 else 0 for x in u]
    un = [-x if x < 0 else 0 for x in u]
    vp = [x if x > 0 else 0 for x in v]
    vn = [-x if x < 0 else 0 for x in v]
    mu = max(max(up, default=0), max(un, default=0))
    mv = max(max(vp, default=0), max(vn, default=0))
    if mu == 0 or mv == 0:
        return [0] * need
    bits = (mu * mv * min(len(u), len(v))).bit_length() + 1
    pp = _mul_nonneg(up, vp, bits, need)
    nn = _mul_nonneg(un, vn, bits, need)
    pn = _mul_nonneg(up, vn, bits, need)
    np_ = _mul_nonneg(un, vp, bits, need)
    return [a + b - c - d for a, b, c, d in zip(pp, nn, pn, np_)]


def _is_mpq(x) -> bool:
    return isinstance(x, (mpq, mpz, int))


def _common_den(coeffs) -> int:
    d = 1
    for c in coeffs:
        if isinstance(c, (int, mpz)):
            continue
        d = _lcm(d, int(c.denominator))
    return d


class QSeries:
    """Exact truncated series sum_{lo <= n < trunc} c_n q^(n/mu)."""

    __slots__ = ("mu", "lo", "coeffs", "trunc")

    def __init__(self, mu: int, lo: int, coeffs, trunc: int, normalize: bool = True):
        if mu < 1:
            raise ValueError("mu must be >= 1")
        coeffs = [c if isinstance(c, QuadElem) else mpq(c) for c in coeffs]
        if normalize:
            while coeffs and _is_zero(coeffs[0]):
                coeffs.pop(0)
                lo += 1
            while len(coeffs) > max(trunc - lo, 0):
                coeffs.pop()
        if len(coeffs) != max(trunc - lo, 0):
            raise ValueError("coefficient vector length mismatch")
        if not coeffs:
            lo = trunc
        self.mu = mu
        self.lo = lo
        self.coeffs = coeffs
        self.trunc = trunc

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, mu: int, trunc: int) -> "QSeries":
        return cls(mu, trunc, [], trunc)

    @classmethod
    def constant(cls, c, trunc: int, mu: int = 1) -> "QSeries":
        return cls(mu, 0, [c] + [0] * (trunc - 1), trunc)

    @classmethod
    def monomial(cls, c, n: int, trunc: int, mu: int = 1) -> "QSeries":
        """c * q^(n/mu), valid below trunc (in 1/mu units)."""
        if n >= trunc:
            raise ValueError("monomial exponent beyond truncation")
        return cls(mu, n, [c] + [0] * (trunc - n - 1), trunc)

    @classmethod
    def from_dict(cls, d: dict[int, object], trunc: int, mu: int = 1) -> "QSeries":
        if not d:
            return cls.zero(mu, trunc)
        lo = min(d)
        coeffs = [0] * (trunc - lo)
        for n, c in d.items():
            if n < trunc:
                coeffs[n - lo] = c
        return cls(mu, lo, coeffs, trunc)

    # -- basic accessors ---------------------------------------------------

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def valuation(self):
        """Leading exponent as an exact rational (or None for zero series)."""
        if self.is_zero():
            return None
        return mpq(self.lo, self.mu)

    def coeff(self, n):
        """Coefficient of q^n for rational n.  Hard error at/beyond truncation."""
        idx = mpq(n) * self.mu
        if idx.denominator != 1:
            raise TruncationError(f"exponent {n} not representable in grading 1/{self.mu}")
        idx = int(idx)
        if idx >= self.trunc:
            raise TruncationError(f"coefficient q^{n} is beyond truncation order {self.trunc}/{self.mu}")
        if idx < self.lo:
            return mpq(0)
        return self.coeffs[idx - self.lo]

    def coeff_index(self, idx: int):
        """Coefficient at raw index (units of 1/mu)."""
        if idx >= self.trunc:
            raise TruncationError(f"index {idx} beyond truncation {self.trunc}")
        if idx < self.lo:
            return mpq(0)
        return self.coeffs[idx - self.lo]

    def compare_upto(self, other: "QSeries", n_terms) -> bool:
        """True iff self and other agree on all exponents < n_terms (rational bound)."""
        bound = mpq(n_terms)
        if bound > mpq(self.trunc, self.mu) or bound > mpq(other.trunc, other.mu):
            raise TruncationError("comparison bound exceeds truncation of an operand")
        m = _lcm(self.mu, other.mu)
        a, b = self.rebase(m), other.rebase(m)
        top = int(bound * m)
        for idx in range(min(a.lo, b.lo), top):
            if not _eq_scalar(a.coeff_index(idx), b.coeff_index(idx)):
                return False
        return True

    def __repr__(self):
        terms = []
        for i, c in enumerate(self.coeffs[:8]):
            if not _is_zero(c):
                e = mpq(self.lo + i, self.mu)
                terms.append(f"{c}*q^{e}")
        body = " + ".join(terms) if terms else "0"
        return f"QSeries({body} + ... ; mu={self.mu}, trunc={self.trunc})"

    # -- grading -----------------------------------------------------------

    def rebase(self, new_mu: int) -> "QSeries":
        """Re-express in a finer grading; new_mu must be a multiple of mu."""
        if new_mu == self.mu:
            return self
        if new_mu % self.mu != 0:
            raise IncompatibleGrading(f"{new_mu} is not a multiple of {self.mu}")
        k = new_mu // self.mu
        coeffs = [0] * (len(self.coeffs) * k)
        # known up to exponent trunc/mu exclusive => index trunc*k exclusive
        coeffs = coeffs[: (self.trunc - self.lo) * k]
        for i, c in enumerate(self.coeffs):
            coeffs[i * k] = c
        out = QSeries(new_mu, self.lo * k, coeffs, self.trunc * k, normalize=False)
        return out

    def substitute_power(self, m: int) -> "QSeries":
        """Compose with q -> q^m (exponents multiplied by m, same grading)."""
        if m < 1:
            raise ValueError("m must be >= 1")
        if m == 1:
            return self
        coeffs = [0] * ((len(self.coeffs) - 1) * m + 1) if self.coeffs else []
        for i, c in enumerate(self.coeffs):
            coeffs[i * m] = c
        new_trunc = self.trunc * m
        if self.coeffs:
            coeffs += [0] * (new_trunc - self.lo * m - len(coeffs))
        return QSeries(self.mu, self.lo * m, coeffs, new_trunc, normalize=False)

    def truncate(self, new_trunc: int) -> "QSeries":
        """Restrict validity to a smaller truncation index."""
        if new_trunc > self.trunc:
            raise TruncationError("cannot extend truncation")
        if new_trunc == self.trunc:
            return self
        return QSeries(self.mu, self.lo, self.coeffs[: max(new_trunc - self.lo, 0)], new_trunc)

    # -- ring operations ---------------------------------------------------

    def _align(self, other: "QSeries"):
        m = _lcm(self.mu, other.mu)
        return self.rebase(m), other.rebase(m)

    def __add__(self, other):
        if not isinstance(other, QSeries):
            other = QSeries.constant(other, self.trunc, self.mu)
        a, b = self._align(other)
        trunc = min(a.trunc, b.trunc)
        if a.is_zero():
            return b.truncate(trunc)
        if b.is_zero():
            return a.truncate(trunc)
        lo = min(a.lo, b.lo)
        coeffs = [0] * (trunc - lo)
        for i, c in enumerate(a.coeffs):
            n = a.lo + i
            if n < trunc:
                coeffs[n - lo] = coeffs[n - lo] + c
        for i, c in enumerate(b.coeffs):
            n = b.lo + i
            if n < trunc:
                coeffs[n - lo] = coeffs[n - lo] + c
        return QSeries(a.mu, lo, coeffs, trunc)

    def __radd__(self, other):
        return self + other

    def __neg__(self):
        return QSeries(self.mu, self.lo, [-c for c in self.coeffs], self.trunc, normalize=False)

    def __sub__(self, other):
        if not isinstance(other, QSeries):
            other = QSeries.constant(other, self.trunc, self.mu)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scalar_mul(self, c) -> "QSeries":
        if _is_zero_scalar(c):
            return QSeries.zero(self.mu, self.trunc)
        return QSeries(self.mu, self.lo, [c * x for x in self.coeffs], self.trunc, normalize=False)

    def __mul__(self, other):
        if not isinstance(other, QSeries):
            return self.scalar_mul(other)
        a, b = self._align(other)
        if a.is_zero() or b.is_zero():
            # product valid to min(t1+v2, t2+v1); with a zero factor use the
            # conservative bound from the zero's truncation
            trunc = min(a.trunc + b.lo, b.trunc + a.lo) if (a.coeffs or b.coeffs) else min(a.trunc, b.trunc)
            if a.is_zero() and b.is_zero():
                trunc = min(a.trunc, b.trunc)
            elif a.is_zero():
                trunc = a.trunc + b.lo
            else:
                trunc = b.trunc + a.lo
            return QSeries.zero(a.mu, trunc)
        trunc = min(a.trunc + b.lo, b.trunc + a.lo)
        lo = a.lo + b.lo
        need = trunc - lo
        ca, cb = a.coeffs, b.coeffs
        if all(_is_mpq(c) or isinstance(c, mpq) for c in ca) and all(
            _is_mpq(c) or isinstance(c, mpq) for c in cb
        ):
            coeffs = _mul_rational(ca, cb, need)
        else:
            coeffs = _mul_generic(ca, cb, need)
        return QSeries(a.mu, lo, coeffs, trunc)

    def __rmul__(self, other):
        return self.scalar_mul(other)

    def __pow__(self, n: int) -> "QSeries":
        if n < 0:
            return self.invert() ** (-n)
        if n == 0:
            return QSeries.constant(1, self.trunc - (self.lo if self.lo < 0 else 0), self.mu)
        result = None
        base = self
        while n:
            if n & 1:
                result = base if result is None else result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def invert(self) -> "QSeries":
        """Multiplicative inverse; requires invertible leading coefficient."""
        if self.is_zero():
            raise NonUnitLeading("cannot invert the zero series")
        c0 = self.coeffs[0]
        if _is_zero(c0):
            raise NonUnitLeading("leading coefficient is zero")
        n_terms = self.trunc - self.lo
        # unit part h = self / (c0 q^lo): h = 1 + ...
        inv_c0 = _inv_scalar(c0)
        h = [inv_c0 * c for c in self.coeffs]
        g = _newton_invert(h, n_terms)
        coeffs = [inv_c0 * c for c in g]
        return QSeries(self.mu, -self.lo, coeffs, -self.lo + n_terms, normalize=False)

    def __truediv__(self, other):
        if isinstance(other, QSeries):
            return self * other.invert()
        return self.scalar_mul(_inv_scalar(other if isinstance(other, QuadElem) else mpq(other)))

    def theta_deriv(self) -> "QSeries":
        """q d/dq: multiply the coefficient of q^(n/mu) by n/mu."""
        coeffs = [c * mpq(self.lo + i, self.mu) for i, c in enumerate(self.coeffs)]
        return QSeries(self.mu, self.lo, coeffs, self.trunc)

    def sqrt(self) -> "QSeries":
        """Principal square root; leading exponent must be even (after mu-doubling)."""
        if self.is_zero():
            raise NotASquare("square root of a zero truncated series is undetermined")
        f = self
        if f.lo % 2 != 0:
            f = f.rebase(2 * f.mu)
        if f.lo % 2 != 0:
            raise NotASquare("odd leading exponent")
        c0 = f.coeffs[0]
        s0 = _sqrt_scalar(c0)
        n_terms = f.trunc - f.lo
        inv_c0 = _inv_scalar(c0)
        h = [inv_c0 * c for c in f.coeffs]  # 1 + ...
        y = _newton_inv_sqrt(h, n_terms)
        # sqrt(h) = h * y
        sq = _mul_any(h, y, n_terms)
        coeffs = [s0 * c for c in sq]
        return QSeries(f.mu, f.lo // 2, coeffs, f.lo // 2 + n_terms, normalize=False)

    def integrate_theta(self) -> "QSeries":
        """Inverse of theta_deriv on series with no constant term."""
        coeffs = []
        for i, c in enumerate(self.coeffs):
            n = self.lo + i
            if n == 0:
                if not _is_zero(c):
                    raise ValueError("cannot integrate a constant term")
                coeffs.append(mpq(0))
            else:
                coeffs.append(c * mpq(self.mu, n))
        return QSeries(self.mu, self.lo, coeffs, self.trunc)

    def exp(self) -> "QSeries":
        """exp of a series with positive valuation, by Newton iteration."""
        if self.is_zero():
            return QSeries.constant(1, self.trunc, self.mu)
        if self.lo <= 0:
            raise ValueError("exp requires positive valuation")
        n_terms = self.trunc
        s = [mpq(0)] * n_terms
        for i, c in enumerate(self.coeffs):
            if self.lo + i < n_terms:
                s[self.lo + i] = c
        e = _newton_exp(s, n_terms)
        return QSeries(self.mu, 0, e, n_terms, normalize=False)


# ---------------------------------------------------------------------------
# scalar helpers
# ---------------------------------------------------------------------------


def _is_zero(c) -> bool:
    if isinstance(c, QuadElem):
        return c.a == 0 and c.b == 0
    return c == 0


def _is_zero_scalar(c) -> bool:
    return _is_zero(c if isinstance(c, QuadElem) else mpq(c))


def _eq_scalar(a, b) -> bool:
    if isinstance(a, QuadElem) or isinstance(b, QuadElem):
        if not isinstance(a, QuadElem):
            a, b = b, a
        if isinstance(b, QuadElem):
            return a.d == b.d and a.a == b.a and a.b == b.b
        return a.b == 0 and a.a == mpq(b)
    return mpq(a) == mpq(b)


def _inv_scalar(c):
    if isinstance(c, QuadElem):
        return QuadElem(1, 0, c.d) / c
    c = mpq(c)
    if c == 0:
        raise NonUnitLeading("zero scalar has no inverse")
    return 1 / c


def _sqrt_scalar(c):
    if isinstance(c, QuadElem):
        raise NotASquare("square roots of quadratic-field leading coefficients unsupported")
    c = mpq(c)
    if c < 0:
        raise NotASquare(f"negative leading coefficient {c}")
    num, den = mpz(c.numerator), mpz(c.denominator)
    sn, rn = gmpy2.isqrt_rem(num)
    sd, rd = gmpy2.isqrt_rem(den)
    if rn != 0 or rd != 0:
        raise NotASquare(f"{c} is not a square")
    return mpq(sn, sd)


# ---------------------------------------------------------------------------
# dense kernel routines (lists of scalars, index 0 = lowest exponent)
# ---------------------------------------------------------------------------


def _mul_rational(a, b, need: int):
    """Truncated product of mpq coefficient vectors via integer Kronecker."""
    da = _common_den(a)
    db = _common_den(b)
    ia = [int(c * da) if not isinstance(c, (int, mpz)) else int(c) * da for c in a]
    ib = [int(c * db) if not isinstance(c, (int, mpz)) else int(c) * db for c in b]
    prod = _mul_int_vectors(ia, ib, need)
    d = mpq(1, da * db)
    return [mpq(x) * d for x in prod]


def _mul_generic(a, b, need: int):
    out = [mpq(0)] * need
    for i, ai in enumerate(a):
        if i >= need:
            break
        if _is_zero(ai):
            continue
        for j, bj in enumerate(b):
            if i + j >= need:
                break
            if _is_zero(bj):
                continue
            out[i + j] = out[i + j] + ai * bj
    return out


def _mul_any(a, b, need: int):
    if all(not isinstance(c, QuadElem) for c in a) and all(not isinstance(c, QuadElem) for c in b):
        return _mul_rational(a, b, need)
    return _mul_generic(a, b, need)


def _newton_invert(h, n_terms: int):
    """Inverse of h with h[0] = 1, to n_terms coefficients."""
    g = [mpq(1)]
    k = 1
    while k < n_terms:
        k = min(2 * k, n_terms)
        hg = _mul_any(h[:k], g, k)
        # g <- g*(2 - h*g)
        two_minus = [(2 if i == 0 else 0) - c for i, c in enumerate(hg)]
        g = _mul_any(g, two_minus, k)
    return g[:n_terms]


def _newton_inv_sqrt(h, n_terms: int):
    """1/sqrt(h) with h[0] = 1."""
    y = [mpq(1)]
    k = 1
    half = mpq(1, 2)
    while k < n_terms:
        k = min(2 * k, n_terms)
        y2 = _mul_any(y, y, k)
        hy2 = _mul_any(h[:k], y2, k)
        # y <- y*(3 - h*y^2)/2
        t = [((3 if i == 0 else 0) - c) * half for i, c in enumerate(hy2)]
        y = _mul_any(y, t, k)
    return y[:n_terms]


def _newton_exp(s, n_terms: int):
    """exp(s) with s[0] = 0, via e <- e*(1 + s - log e)."""
    e = [mpq(1)]
    k = 1
    while k < n_terms:
        k = min(2 * k, n_terms)
        ek = e + [mpq(0)] * (k - len(e))
        # log e = integrate(e'/e) where ' is d/dq on raw indices
        inv_e = _newton_invert(ek, k)
        de = [ek[i] * i for i in range(k)]  # q d/dq
        dlog = _mul_any(de, inv_e, k)
        log_e = [mpq(0)] + [dlog[i] / i for i in range(1, k)]
        corr = [(s[i] if i < len(s) else mpq(0)) - log_e[i] for i in range(k)]
        corr[0] = corr[0] + 1
        e = _mul_any(ek, corr, k)
    return e[:n_terms]


# ---------------------------------------------------------------------------
# product and divisor-sum constructors
# ---------------------------------------------------------------------------


def prod_expand(prefactor_exp: int, scale, sign: int, step: int, exponent, N: int, mu: int = 1) -> QSeries:
    """scale * q^prefactor * prod_{n>=1} (1 + sign*q^(step*n))^exponent(n), to order N.

    Exponents are in units of 1/mu.  ``exponent`` is a callable n -> int.
    The product has integer coefficients; it is reconstructed from its
    logarithmic derivative, whose coefficients are sieved exactly:
    q d/dq log(1 + s q^d)^e = e*d*sum_k (-1)^(k-1) s^k q^(dk).
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    ell = [0] * N
    n = 1
    while step * n < N:
        e = exponent(n)
        if e:
            d = step * n
            k = 1
            m = d
            while m < N:
                ell[m] += e * d * (-1) ** (k - 1) * sign**k
                k += 1
                m += d
        n += 1
    p = _solve_logderiv(ell, N)
    out = QSeries(mu, 0, [mpq(x) for x in p], N).scalar_mul(scale)
    return QSeries(mu, out.lo + prefactor_exp, out.coeffs, out.trunc + prefactor_exp, normalize=False)


def _solve_logderiv(ell: list[int], N: int) -> list[int]:
    """Integer series P with P(0)=1 and q P' = L P, L = sum ell[m] q^m.

    Solved blockwise: cross-block contributions by one Kronecker convolution
    per block, within-block by schoolbook recurrence  m p_m = sum_j ell[j] p_{m-j}.
    """
    p = [0] * N
    p[0] = 1
    B = max(64, gmpy2.isqrt(N) + 1)
    a = 1
    while a < N:
        b = min(a + B, N)
        base = _mul_int_vectors(ell, p[:a], b)
        for m in range(a, b):
            tot = base[m]
            for j in range(1, m - a + 1):
                lj = ell[j]
                if lj:
                    tot += lj * p[m - j]
            q, r = divmod(tot, m)
            if r:
                raise ArithmeticError("non-integral product expansion")
            p[m] = q
        a = b
    return p


def divisor_series(constant_term, weight_fn, N: int, mu: int = 1) -> QSeries:
    """constant + sum_{n>=1} (sum_{d|n} weight_fn(d, n)) q^n, to order N."""
    acc = [mpq(0)] * N
    for d in range(1, N):
        n = d
        while n < N:
            w = weight_fn(d, n)
            if w:
                acc[n] = acc[n] + w
            n += d
    acc[0] = mpq(constant_term)
    return QSeries(mu, 0, acc, N)
