"""Exact arithmetic substrate.

Arbitrary-precision rationals (gmpy2.mpq), quadratic field elements,
finite fields F_p / F_{p^r}, truncated p-adic integers with Hensel
lifting, and quadratic residue symbols.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2
from gmpy2 import mpq, mpz

# Rational scalars are gmpy2.mpq values: always reduced, denominator >= 1.
Rational = mpq

INF = math.inf


class NonResidue(ValueError):
    """Square root requested of a quadratic non-residue."""


class SupersingularInput(ValueError):
    """Unit root requested for p | a_p."""


class NoSolution(ValueError):
    """Hensel system has no solution with the required leading residue."""


def kronecker(a, n) -> int:
    """Kronecker symbol (a|n); n must be nonzero."""
    if n == 0:
        raise ValueError("kronecker: n must be nonzero")
    return int(gmpy2.kronecker(mpz(a), mpz(n)))


def valuation(x, p) -> int | float:
    """p-adic valuation of a rational; +inf for 0."""
    x = mpq(x)
    if x == 0:
        return INF
    num, den = x.numerator, x.denominator
    v = 0
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def _int_valuation(n: int, p: int) -> tuple[int, int]:
    """(v, unit) with n = p^v * unit, for n != 0."""
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v, n


# ---------------------------------------------------------------------------
# p-adic numbers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PadicNum:
    """p^val * unit with unit known modulo p^prec (unit a p-unit, or zero).

    ``residue`` stores the unit part reduced mod p^prec.  The exact zero is
    represented with residue 0 and val 0.
    """

    p: int
    prec: int
    residue: int
    val: int = 0

    def __post_init__(self):
        if self.prec < 1:
            raise ValueError("precision must be >= 1")
        r = self.residue % self.p**self.prec
        object.__setattr__(self, "residue", r)
        if r != 0 and r % self.p == 0:
            # normalize: pull p-powers out of the residue into val
            v, u = _int_valuation(r, self.p)
            if self.prec - v < 1:
                raise ValueError("residue divisible by p^prec; value indistinguishable from 0")
            object.__setattr__(self, "prec", self.prec - v)
            object.__setattr__(self, "residue", u % self.p ** (self.prec))
            object.__setattr__(self, "val", self.val + v)

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_rational(cls, x, p: int, prec: int) -> "PadicNum":
        x = mpq(x)
        if x == 0:
            return cls(p, prec, 0, 0)
        vn = valuation(x, p)
        unit = x / mpq(p) ** vn
        num, den = int(unit.numerator), int(unit.denominator)
        mod = p**prec
        res = num * pow(den, -1, mod) % mod
        return cls(p, prec, res, int(vn))

    # -- helpers -----------------------------------------------------------

    def is_zero(self) -> bool:
        return self.residue == 0

    def is_unit(self) -> bool:
        return self.residue != 0 and self.val == 0

    @property
    def valuation(self) -> int | float:
        return INF if self.residue == 0 else self.val

    def _check(self, other: "PadicNum"):
        if self.p != other.p:
            raise ValueError("mixed primes")

    # -- ring operations ---------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        self._check(other)
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        v = min(self.val, other.val)
        # absolute known precision: val + prec for each operand
        abs_prec = min(self.val + self.prec, other.val + other.prec)
        prec = abs_prec - v
        if prec < 1:
            raise ValueError("insufficient precision in addition")
        mod = self.p**prec
        r = (self.residue * self.p ** (self.val - v) + other.residue * self.p ** (other.val - v)) % mod
        if r == 0:
            return PadicNum(self.p, prec, 0, 0)
        return PadicNum(self.p, prec, r, v)

    def __neg__(self):
        return PadicNum(self.p, self.prec, -self.residue % self.p**self.prec, self.val)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __mul__(self, other):
        other = self._coerce(other)
        self._check(other)
        if self.is_zero() or other.is_zero():
            return PadicNum(self.p, min(self.prec, other.prec), 0, 0)
        prec = min(self.prec, other.prec)
        mod = self.p**prec
        return PadicNum(self.p, prec, self.residue * other.residue % mod, self.val + other.val)

    def __truediv__(self, other):
        other = self._coerce(other)
        self._check(other)
        if other.is_zero():
            raise ZeroDivisionError("division by zero PadicNum")
        prec = min(self.prec, other.prec)
        mod = self.p**prec
        inv = pow(other.residue, -1, mod)
        if self.is_zero():
            return PadicNum(self.p, prec, 0, 0)
        return PadicNum(self.p, prec, self.residue * inv % mod, self.val - other.val)

    def __pow__(self, n: int):
        if n < 0:
            return (PadicNum(self.p, self.prec, 1, 0) / self) ** (-n)
        result = PadicNum(self.p, self.prec, 1, 0)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def _coerce(self, other):
        if isinstance(other, PadicNum):
            return other
        return PadicNum.from_rational(other, self.p, self.prec)

    def __radd__(self, other):
        return self._coerce(other) + self

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __rmul__(self, other):
        return self._coerce(other) * self

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __eq__(self, other):
        """Equality to the shared precision."""
        if not isinstance(other, PadicNum):
            other = self._coerce(other)
        if self.p != other.p:
            return False
        d = self - other
        return d.is_zero()

    def __hash__(self):
        return hash((self.p, self.prec, self.residue, self.val))

    def lift(self) -> mpq:
        """Smallest-nonnegative-unit rational lift p^val * residue."""
        return mpq(self.residue) * mpq(self.p) ** self.val

    def __repr__(self):
        if self.is_zero():
            return f"O({self.p}^{self.prec})"
        if self.val:
            return f"{self.p}^{self.val}*{self.residue} + O({self.p}^{self.val + self.prec})"
        return f"{self.residue} + O({self.p}^{self.prec})"


def hensel_sqrt(a, p: int, prec: int) -> PadicNum:
    """Square root of a rational in Q_p (p odd), to ``prec`` digits.

    Of the two roots, returns the one whose leading residue is <= (p-1)/2.
    """
    if p == 2:
        raise ValueError("p must be odd")
    a = mpq(a)
    if a == 0:
        return PadicNum(p, prec, 0, 0)
    v = valuation(a, p)
    if v % 2 != 0:
        raise NonResidue(f"odd valuation {v} at p={p}")
    unit = a / mpq(p) ** v
    mod = p**prec
    u0 = int(unit.numerator) * pow(int(unit.denominator), -1, mod) % mod
    if kronecker(u0 % p, p) != 1:
        raise NonResidue(f"{u0 % p} is not a square mod {p}")
    # Tonelli–Shanks mod p, then Newton lifting
    x = _sqrt_mod_p(u0 % p, p)
    k = 1
    while k < prec:
        k = min(2 * k, prec)
        m = p**k
        x = (x + u0 * pow(x, -1, m)) * pow(2, -1, m) % m
    if x % p > (p - 1) // 2:
        x = (-x) % mod
    return PadicNum(p, prec, x, v // 2)


def _sqrt_mod_p(a: int, p: int) -> int:
    if a == 0:
        return 0
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    # Tonelli–Shanks
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while kronecker(z, p) != -1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, tt = 0, t
        while tt != 1:
            tt = tt * tt % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


def unit_root(a_p: int, p: int, prec: int) -> PadicNum:
    """The unit root of T^2 - a_p T + p for an ordinary prime (p does not divide a_p)."""
    if a_p % p == 0:
        raise SupersingularInput(f"p={p} divides a_p={a_p}")
    mod = p**prec
    x = a_p % p
    # Newton iteration on f(T) = T^2 - a_p T + p; f'(T) = 2T - a_p
    k = 1
    while k < prec:
        k = min(2 * k, prec)
        m = p**k
        fx = (x * x - a_p * x + p) % m
        dfx = (2 * x - a_p) % m
        x = (x - fx * pow(dfx, -1, m)) % m
    assert (x * x - a_p * x + p) % mod == 0
    return PadicNum(p, prec, x % mod, 0)


def gamma_p(D, nu: int, p: int, prec: int, sigma="id") -> PadicNum:
    """The constant solving gamma^nu = D^p / sigma(D) with gamma = 1 mod p.

    ``D`` is a rational p-adic unit (or QuadElem with sigma="conj" when p
    splits); ``sigma`` is "id" or "conj".
    """
    if nu % p == 0:
        raise ValueError("p must not divide nu")
    if isinstance(D, QuadElem):
        if sigma == "conj":
            target_q = D**p / D.conj()  # in K; embed below
        else:
            target_q = D**p / D
        emb = target_q.embed(p, prec)
        target = emb
    else:
        D = mpq(D)
        if valuation(D, p) != 0:
            raise ValueError("D must be a p-adic unit")
        target = PadicNum.from_rational(D ** (p - 1) if sigma == "id" else D**p / D, p, prec)
    if not target.is_unit():
        raise NoSolution("target D^p/sigma(D) is not a p-adic unit")
    t = target.residue % (p**prec)
    if t % p != 1:
        raise NoSolution("D^p/sigma(D) is not congruent to 1 mod p; no root = 1 mod p")
    # Solve x^nu = t with x = 1 mod p by Newton iteration.
    mod = p**prec
    x = 1
    k = 1
    while k < prec:
        k = min(2 * k, prec)
        m = p**k
        fx = (pow(x, nu, m) - t) % m
        dfx = nu * pow(x, nu - 1, m) % m
        x = (x - fx * pow(dfx, -1, m)) % m
    assert pow(x, nu, mod) == t % mod and x % p == 1
    return PadicNum(p, prec, x, 0)


# ---------------------------------------------------------------------------
# Quadratic field elements
# ---------------------------------------------------------------------------


def _squarefree(d: int) -> bool:
    if d in (0, 1):
        return False
    d = abs(d)
    k = 2
    while k * k <= d:
        if d % (k * k) == 0:
            return False
        k += 1
    return True


@dataclass(frozen=True)
class QuadElem:
    """a + b*sqrt(d) with rational a, b and squarefree d not in {0, 1}."""

    a: mpq
    b: mpq
    d: int

    def __post_init__(self):
        object.__setattr__(self, "a", mpq(self.a))
        object.__setattr__(self, "b", mpq(self.b))
        if not _squarefree(self.d):
            raise ValueError(f"d={self.d} must be squarefree and != 0, 1")

    def _coerce(self, other):
        if isinstance(other, QuadElem):
            if other.d != self.d:
                raise ValueError("mixed quadratic fields")
            return other
        return QuadElem(mpq(other), mpq(0), self.d)

    def __add__(self, other):
        o = self._coerce(other)
        return QuadElem(self.a + o.a, self.b + o.b, self.d)

    def __sub__(self, other):
        o = self._coerce(other)
        return QuadElem(self.a - o.a, self.b - o.b, self.d)

    def __neg__(self):
        return QuadElem(-self.a, -self.b, self.d)

    def __mul__(self, other):
        o = self._coerce(other)
        return QuadElem(self.a * o.a + self.b * o.b * self.d, self.a * o.b + self.b * o.a, self.d)

    def __truediv__(self, other):
        o = self._coerce(other)
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero QuadElem")
        c = self * o.conj()
        return QuadElem(c.a / n, c.b / n, self.d)

    def __pow__(self, n: int):
        if n < 0:
            return (QuadElem(1, 0, self.d) / self) ** (-n)
        r = QuadElem(1, 0, self.d)
        base = self
        while n:
            if n & 1:
                r = r * base
            base = base * base
            n >>= 1
        return r

    __radd__ = __add__
    __rmul__ = __mul__

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def conj(self) -> "QuadElem":
        return QuadElem(self.a, -self.b, self.d)

    def norm(self) -> mpq:
        return self.a * self.a - self.b * self.b * self.d

    def trace(self) -> mpq:
        return 2 * self.a

    def is_rational(self) -> bool:
        return self.b == 0

    def embed(self, p: int, prec: int) -> PadicNum:
        """Embed into Q_p via the canonical hensel_sqrt(d) (requires (d|p) = 1)."""
        if kronecker(self.d, p) != 1:
            raise NonResidue(f"p={p} does not split: ({self.d}|{p}) != 1")
        s = hensel_sqrt(self.d, p, prec)
        return PadicNum.from_rational(self.a, p, prec) + PadicNum.from_rational(self.b, p, prec) * s

    def __repr__(self):
        return f"({self.a} + {self.b}*sqrt({self.d}))"


# ---------------------------------------------------------------------------
# Finite fields
# ---------------------------------------------------------------------------


class Fq:
    """F_{p^r} with the lexicographically first irreducible monic modulus.

    Elements are tuples of ints of length r (coefficients of 1, x, ..,
    x^{r-1}).  Supports add/mul/inverse and exhaustive iteration.
    """

    def __init__(self, p: int, r: int = 1):
        if p**r > 10**6:
            raise ValueError("field too large to enumerate")
        self.p = p
        self.r = r
        self.modulus = self._find_modulus()

    def _find_modulus(self):
        p, r = self.p, self.r
        if r == 1:
            return (0, 1)
        # monic degree-r polys in lexicographic order of (c_0, .., c_{r-1})
        for idx in range(p**r):
            coeffs = []
            n = idx
            for _ in range(r):
                coeffs.append(n % p)
                n //= p
            poly = tuple(coeffs) + (1,)
            if self._is_irreducible(poly):
                return poly
        raise RuntimeError("no irreducible polynomial found")

    def _is_irreducible(self, poly) -> bool:
        """Rabin test: x^(p^r) = x mod f, and gcd(x^(p^(r/q)) - x, f) = 1
        for each prime q | r."""
        p, r = self.p, self.r

        def mul_mod(a, b):
            res = [0] * (2 * r - 1)
            for i, ai in enumerate(a):
                if ai:
                    for j, bj in enumerate(b):
                        res[i + j] = (res[i + j] + ai * bj) % p
            for i in range(len(res) - 1, r - 1, -1):
                c = res[i]
                if c:
                    for j in range(r + 1):
                        res[i - r + j] = (res[i - r + j] - c * poly[j]) % p
            return res[:r]

        def frob(a):
            result = [1] + [0] * (r - 1)
            base, n = a, p
            while n:
                if n & 1:
                    result = mul_mod(result, base)
                base = mul_mod(base, base)
                n >>= 1
            return result

        def gcd_nonconst(a):
            def norm(v):
                while v and v[-1] == 0:
                    v.pop()
                return v

            f, g = norm(list(poly)), norm(list(a))
            while g:
                inv = pow(g[-1], -1, p)
                while len(f) >= len(g) and f:
                    c = f[-1] * inv % p
                    shift = len(f) - len(g)
                    for j, y in enumerate(g):
                        f[shift + j] = (f[shift + j] - c * y) % p
                    norm(f)
                f, g = g, f
            return len(f) > 1

        x = [0, 1] + [0] * (r - 2)
        powers = [x]  # x^(p^k) for k = 0..r
        for _ in range(r):
            powers.append(frob(powers[-1]))
        if powers[r] != x:
            return False
        q = 2
        rr = r
        prime_divs = set()
        while q * q <= rr:
            if rr % q == 0:
                prime_divs.add(q)
                while rr % q == 0:
                    rr //= q
            q += 1
        if rr > 1:
            prime_divs.add(rr)
        for q in prime_divs:
            diff = list(powers[r // q])
            diff[1] = (diff[1] - 1) % p
            if gcd_nonconst(diff):
                return False
        return True

    def zero(self):
        return (0,) * self.r

    def one(self):
        return (1,) + (0,) * (self.r - 1)

    def add(self, a, b):
        return tuple((x + y) % self.p for x, y in zip(a, b))

    def neg(self, a):
        return tuple((-x) % self.p for x in a)

    def mul(self, a, b):
        p, r = self.p, self.r
        res = [0] * (2 * r - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    res[i + j] = (res[i + j] + ai * bj) % p
        for i in range(len(res) - 1, r - 1, -1):
            c = res[i]
            if c:
                for j in range(r + 1):
                    res[i - r + j] = (res[i - r + j] - c * self.modulus[j]) % p
        return tuple(res[:r])

    def pow(self, a, n: int):
        result = self.one()
        base = a
        while n:
            if n & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            n >>= 1
        return result

    def inv(self, a):
        if a == self.zero():
            raise ZeroDivisionError("inverse of zero")
        return self.pow(a, self.p**self.r - 2)

    def from_int(self, n: int):
        return (n % self.p,) + (0,) * (self.r - 1)

    def elements(self):
        p, r = self.p, self.r
        for idx in range(p**r):
            coeffs = []
            n = idx
            for _ in range(r):
                coeffs.append(n % p)
                n //= p
            yield tuple(coeffs)

    def __len__(self):
        return self.p**self.r


def fq_arith(p: int, r: int = 1) -> Fq:
    """Construct F_{p^r}."""
    return Fq(p, r)
