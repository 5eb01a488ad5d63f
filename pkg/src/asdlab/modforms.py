"""Catalog of concrete modular forms as exact QSeries constructors.

Includes the fixed catalog (theta powers, hauptmoduls, Eisenstein series,
eta-type products), the parameterized meromorphic weight-3/4/5 builders,
the genus-0 subgroup forms in the q^(1/2) grading, and a suite of exact
series identities used as self-tests.

All analytic derivatives (1/2pi i) d/dtau are realized as q d/dq on
expansions.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

from gmpy2 import mpq

from .exactnum import kronecker
from .qseries import QSeries, divisor_series, prod_expand

__all__ = [
    "FormId",
    "build",
    "clear_cache",
    "apery_numbers",
    "apery_form_definitional",
    "mero_weight3",
    "mero_weight3_g",
    "mero_weight4",
    "mero_weight4_g",
    "mero_weight4_h",
    "mero_weight5_remark",
    "gamma2_form",
    "level1_form",
    "ex19_pair",
    "verify_identity",
    "IDENTITY_NAMES",
    "PoleAtCuspParameter",
    "SingularJ",
]

_MARGIN = 8


class PoleAtCuspParameter(ValueError):
    pass


class SingularJ(ValueError):
    pass


@dataclass(frozen=True)
class FormId:
    """Stable identifier for a catalog form: name plus exact parameters."""

    name: str
    params: tuple = field(default_factory=tuple)

    @property
    def key(self) -> str:
        if not self.params:
            return self.name
        inner = ",".join(f"{k}={v}" for k, v in self.params)
        return f"{self.name}[{inner}]"

    @classmethod
    def of(cls, name: str, **params) -> "FormId":
        return cls(name, tuple(sorted((k, mpq(v) if not isinstance(v, str) else v) for k, v in params.items())))


_cache: dict[tuple[str, int], QSeries] = {}
_cache_lock = threading.Lock()


def clear_cache():
    with _cache_lock:
        _cache.clear()


def build(form, N: int, **params) -> QSeries:
    """Exact expansion of the identified form, valid to index N in its grading."""
    if isinstance(form, str):
        form = FormId.of(form, **params)
    elif params:
        raise ValueError("pass parameters either in the FormId or as kwargs, not both")
    key = (form.key, N)
    with _cache_lock:
        if key in _cache:
            return _cache[key]
    series = _construct(form, N)
    with _cache_lock:
        _cache.setdefault(key, series)
    return series


def _construct(form: FormId, N: int) -> QSeries:
    name = form.name
    p = dict(form.params)
    if name in _CATALOG:
        if p:
            raise ValueError(f"{name} takes no parameters")
        return _CATALOG[name](N)
    if name == "mero_w3":
        return mero_weight3(p["u"], N)
    if name == "mero_w3_g":
        return mero_weight3_g(p["u"], p["c1"], p["c2"], N)
    if name == "mero_w4":
        return mero_weight4(p["u"], N)
    if name == "mero_w4_g":
        return mero_weight4_g(p["u"], p["c1"], p["c2"], N)
    if name == "mero_w4_h":
        return mero_weight4_h(p["u"], p["c1"], p["c2"], N)
    if name == "mero_w5_remark":
        return mero_weight5_remark(N)
    if name == "gamma2":
        return gamma2_form(p["u"], N)
    if name == "level1":
        return level1_form(int(p["k"]), p["jval"], N)
    raise KeyError(f"unknown form id {form.key}")


# ---------------------------------------------------------------------------
# fixed catalog
# ---------------------------------------------------------------------------


def _theta(N: int) -> QSeries:
    d = {0: mpq(1)}
    n = 1
    while n * n < N:
        d[n * n] = mpq(2)
        n += 1
    return QSeries.from_dict(d, N)


def _theta_pow(N: int, e: int) -> QSeries:
    th = build("theta1_internal", N + _MARGIN)
    return (th**e).truncate(N)


def _lambda(N: int) -> QSeries:
    M = N + _MARGIN
    a = prod_expand(1, 16, 1, 2, lambda n: 16, M)
    b = prod_expand(0, 1, 1, 1, lambda n: -8, M)
    return (a * b).truncate(N)


def _E(N: int, k: int) -> QSeries:
    factor = {2: -24, 4: 240, 6: -504}[k]
    return divisor_series(1, lambda d, n: factor * d ** (k - 1), N)


def _delta(N: int) -> QSeries:
    return prod_expand(1, 1, -1, 1, lambda n: 24, N)


def _j(N: int) -> QSeries:
    M = N + _MARGIN
    e4 = build("E4", M)
    delta = build("delta", M)
    return ((e4**3) * delta.invert()).truncate(N)


def _A_form(N: int) -> QSeries:
    return prod_expand(1, 1, 1, 1, lambda n: 24, N)


def _phi0(N: int) -> QSeries:
    # 1 + 24 sum_m m q^m/(1+q^m) = 1 + 24 sum_n (sum_{d|n} d (-1)^(n/d+1)) q^n
    return divisor_series(1, lambda d, n: 24 * d * (-1) ** (n // d + 1), N)


def _C4(N: int) -> QSeries:
    M = N + _MARGIN
    a = build("A", M)
    phi0 = build("phi0", M)
    e4 = build("E4", M)
    inner = phi0 * phi0 * 4 - e4
    pref = a * (a * 192 + 3).invert()
    return (pref * inner).truncate(N)


def _t_haupt(N: int) -> QSeries:
    return prod_expand(1, 1, -1, 1, lambda n: 5 * kronecker(n, 5), N)


def _t2(N: int) -> QSeries:
    # q^(1/2) grading: index n <-> q^(n/2); N counts half-integral steps
    t = build("t", (N + 1) // 2 + 1)
    return t.sqrt().truncate(N)


def apery_numbers(n_max: int) -> list[int]:
    """a_n = sum_k C(n,k)^2 C(n+k,k) for n = 0..n_max."""
    from math import comb

    return [sum(comb(n, k) ** 2 * comb(n + k, k) for k in range(n + 1)) for n in range(n_max + 1)]


def apery_form_definitional(N: int) -> QSeries:
    """(q dt/dq) * sum_n a_n t^n with Apery a_n -- the defining route (slow)."""
    t = build("t", N + _MARGIN)
    a = apery_numbers(N)
    # Horner: S = a_N; S = S*t + a_n
    S = QSeries.constant(a[N], N + _MARGIN)
    for n in range(N - 1, -1, -1):
        S = (S * t).truncate(N + _MARGIN) + a[n]
    F = t.theta_deriv() * S
    return F.truncate(N)


_APERY_WEIGHTS = {0: 0, 1: 1, 2: -2, 3: 2, 4: -1}


def _aperyF(N: int) -> QSeries:
    # closed form: F = sum_n (sum_{d|n} w(d mod 5) d^2) q^n, w = (0,1,-2,2,-1);
    # exact agreement with the definitional route is asserted in tests
    return divisor_series(0, lambda d, n: _APERY_WEIGHTS[d % 5] * d * d, N)


def _h2(N: int) -> QSeries:
    # q^(1/2) grading; the index-2 cusp form F / t2 (leading term q^(1/2)).
    # Computed as q^(-1/2) * (F / w) with w = sqrt(t/q) entirely in the integer
    # grading: half the series length and one dyadic-denominator product.
    Nq = N // 2 + 2
    F = build("aperyF", Nq)
    series_q = (F * _sqrt_t_unit(Nq).invert()).rebase(2)
    shifted = QSeries(2, series_q.lo - 1, list(series_q.coeffs), series_q.trunc - 1)
    return shifted.truncate(N)


def _sqrt_t_unit(Nq: int) -> QSeries:
    """sqrt(t/q) as a unit series in the integer grading, trunc Nq."""
    t = build("t", Nq + 1)
    t_over_q = QSeries(1, t.lo - 1, list(t.coeffs), t.trunc - 1)
    return t_over_q.sqrt()


def _eta4_6(N: int) -> QSeries:
    return prod_expand(1, 1, -1, 4, lambda n: 6, N)


_CATALOG = {
    "theta1_internal": _theta,
    "theta2": lambda N: _theta_pow(N, 2),
    "theta4": lambda N: _theta_pow(N, 4),
    "theta6": lambda N: _theta_pow(N, 6),
    "lambda": _lambda,
    "E2": lambda N: _E(N, 2),
    "E4": lambda N: _E(N, 4),
    "E6": lambda N: _E(N, 6),
    "E8": lambda N: (build("E4", N) ** 2).truncate(N),
    "E10": lambda N: (build("E4", N) * build("E6", N)).truncate(N),
    "E14": lambda N: (build("E4", N) ** 2 * build("E6", N)).truncate(N),
    "delta": _delta,
    "j": _j,
    "A": _A_form,
    "phi0": _phi0,
    "C4": _C4,
    "t": _t_haupt,
    "t2": _t2,
    "aperyF": _aperyF,
    "h2": _h2,
    "eta4_6": _eta4_6,
}


# ---------------------------------------------------------------------------
# meromorphic builders
# ---------------------------------------------------------------------------


def _check_u(u):
    u = mpq(u)
    if u in (0, 1):
        raise PoleAtCuspParameter(f"u={u} is a cusp value of the hauptmodul")
    return u


def mero_weight3(u, N: int) -> QSeries:
    """theta^2 * (q dlambda/dq) / (lambda - u), weight 3 with a simple pole at lambda=u."""
    u = _check_u(u)
    M = N + _MARGIN
    th2 = build("theta2", M)
    lam = build("lambda", M)
    f = th2 * lam.theta_deriv() * (lam - u).invert()
    return f.truncate(N)


def mero_weight3_g(u, c1, c2, N: int) -> QSeries:
    """Weight-3 companion with a double pole:
    [c2 u(1-u)/(lambda-u)^2 + (c1 - c2(5u-1)/12)/(lambda-u)] theta^2 (q dlambda/dq)."""
    u = _check_u(u)
    c1, c2 = mpq(c1), mpq(c2)
    M = N + _MARGIN
    th2 = build("theta2", M)
    lam = build("lambda", M)
    dlam = lam.theta_deriv()
    inv = (lam - u).invert()
    part = inv * inv * (c2 * u * (1 - u)) + inv * (c1 - c2 * mpq(5 * u - 1, 12))
    return (part * th2 * dlam).truncate(N)


def mero_weight4(u, N: int) -> QSeries:
    """theta^4 * (q dlambda/dq) / (lambda - u), weight 4."""
    u = _check_u(u)
    M = N + _MARGIN
    th4 = build("theta4", M)
    lam = build("lambda", M)
    return (th4 * lam.theta_deriv() * (lam - u).invert()).truncate(N)


def mero_weight4_g(u, c1, c2, N: int) -> QSeries:
    """Weight-4 companion with a double pole:
    [c2 u(1-u)/(2(lambda-u)^2) + (c1 - c2(5u-1)/12)/(lambda-u)] theta^4 (q dlambda/dq)."""
    u = _check_u(u)
    c1, c2 = mpq(c1), mpq(c2)
    M = N + _MARGIN
    th4 = build("theta4", M)
    lam = build("lambda", M)
    inv = (lam - u).invert()
    part = inv * inv * (c2 * u * (1 - u) / 2) + inv * (c1 - c2 * mpq(5 * u - 1, 12))
    return (part * th4 * lam.theta_deriv()).truncate(N)


def poly_P(u):
    u = mpq(u)
    return (61 * u * u - 46 * u + 1) / 144


def poly_Q(u):
    u = mpq(u)
    return -u * (1 - u) * (17 * u - 7) / 12


def mero_weight4_h(u, c1, c2, N: int) -> QSeries:
    """Weight-4 companion with a triple pole:
    [c2^2 u^2(1-u)^2/(lambda-u)^3 + (c2^2 Q(u)+c1 c2 u(1-u))/(lambda-u)^2
     + (c2^2 P(u)+c1^2-(5u-1)c1c2/6)/(lambda-u)] theta^4 (q dlambda/dq)."""
    u = _check_u(u)
    c1, c2 = mpq(c1), mpq(c2)
    M = N + _MARGIN
    th4 = build("theta4", M)
    lam = build("lambda", M)
    inv = (lam - u).invert()
    inv2 = inv * inv
    part = (
        inv2 * inv * (c2 * c2 * u * u * (1 - u) * (1 - u))
        + inv2 * (c2 * c2 * poly_Q(u) + c1 * c2 * u * (1 - u))
        + inv * (c2 * c2 * poly_P(u) + c1 * c1 - mpq(5 * u - 1, 6) * c1 * c2)
    )
    return (part * th4 * lam.theta_deriv()).truncate(N)


def mero_weight5_remark(N: int) -> QSeries:
    """theta^6 * (q dlambda/dq) / (1 - 2 lambda), weight 5 with pole at lambda=1/2."""
    M = N + _MARGIN
    th6 = build("theta6", M)
    lam = build("lambda", M)
    return (th6 * lam.theta_deriv() * (1 - lam * 2).invert()).truncate(N)


def gamma2_form(u, N: int) -> QSeries:
    """s2 * F / (s2 - u) with s2 = 1/t2, in the q^(1/2) grading.

    s2 is the hauptmodul normalized with a pole at the infinite cusp; the
    series equals F/(1 - u*t2) = F*(1 + u*t2 + u^2*t2^2 + ...), leading term q,
    with coefficients in Z[1/(10u)].
    """
    u = mpq(u)
    if u == 0:
        raise PoleAtCuspParameter("u=0 is the cusp value")
    # F/(1 - u*t2) = F(1 + u*t2)/(1 - u^2*t): even part G = F/(1 - u^2 t) and odd
    # part u*sqrt(t)*G, both computed in the integer grading for speed.
    Nq = N // 2 + 2
    F = build("aperyF", Nq)
    t = build("t", Nq)
    G = F * (1 - t * (u * u)).invert()
    odd_q = ((_sqrt_t_unit(Nq).truncate(Nq - 1) * G) * u).rebase(2)
    odd = QSeries(2, odd_q.lo + 1, list(odd_q.coeffs), odd_q.trunc + 1)
    return (G.rebase(2) + odd).truncate(N)


def level1_form(k: int, jval, N: int) -> QSeries:
    """E_k / (j - jval): the rational avatar of the level-1 meromorphic form.

    The two-term congruence verdicts are invariant under p-unit scaling, so
    the omitted CM-point period constant is irrelevant to the checks.
    """
    jval = mpq(jval)
    if k not in (4, 6, 8, 10, 14):
        raise ValueError("k must be in {4, 6, 8, 10, 14}")
    if jval in (0, 1728):
        raise SingularJ(f"jval={jval} is a singular j-invariant")
    M = N + _MARGIN
    ek = build(f"E{k}", M)
    j = build("j", M)
    return (ek * (j - jval).invert()).truncate(N)


def ex19_pair(N: int) -> tuple[QSeries, QSeries]:
    """(f, g) with f = theta^2 (q dlambda/dq)/(lambda-2), g = f (lambda+2)/(lambda-2)."""
    M = N + _MARGIN
    f = mero_weight3(2, M)
    lam = build("lambda", M)
    g = f * (lam + 2) * (lam - 2).invert()
    return f.truncate(N), g.truncate(N)


# ---------------------------------------------------------------------------
# identity suite
# ---------------------------------------------------------------------------

IDENTITY_NAMES = (
    "L6.2.1",
    "L6.2.2",
    "L6.4.1",
    "L6.4.2",
    "L6.6.1",
    "L6.6.2",
    "L6.6.3",
    "L6.13",
)


def verify_identity(name: str, N: int) -> bool:
    """Check one of the exact series identities to order N."""
    if N < 20:
        raise ValueError("N must be >= 20")
    M = N + _MARGIN
    lam = build("lambda", M)
    th4 = build("theta4", M)
    if name == "L6.2.1":
        lhs = build("E4", M)
        rhs = (1 + lam * 14 + lam * lam) * (th4 * th4)
        return lhs.compare_upto(rhs, N)
    if name == "L6.2.2":
        lhs = build("E6", M)
        rhs = (1 - lam * 33 - lam * lam * 33 + lam**3) * (th4 * th4 * th4)
        return lhs.compare_upto(rhs, N)
    if name == "L6.4.1":
        lhs = lam.theta_deriv()
        rhs = lam * (1 - lam) * th4
        return lhs.compare_upto(rhs, N)
    if name == "L6.4.2":
        # s = 1: D theta^2 = ((5 lam - 1)/12) theta^6 + (1/12) theta^2 E2
        th2 = build("theta2", M)
        e2 = build("E2", M)
        lhs = th2.theta_deriv()
        rhs = (lam * 5 - 1) * th2 * th4 * mpq(1, 12) + th2 * e2 * mpq(1, 12)
        return lhs.compare_upto(rhs, N)
    if name == "L6.6.1":
        e2 = build("E2", M)
        dlam = lam.theta_deriv()
        lhs = dlam.theta_deriv()
        rhs = dlam * ((5 - lam * 7) * th4 + e2) * mpq(1, 6)
        return lhs.compare_upto(rhs, N)
    if name == "L6.6.2":
        e2 = build("E2", M)
        th8 = th4 * th4
        lhs = e2.theta_deriv()
        rhs = e2 * e2 * mpq(1, 12) - (1 + lam * 14 + lam * lam) * th8 * mpq(1, 12)
        return lhs.compare_upto(rhs, N)
    if name == "L6.6.3":
        e2 = build("E2", M)
        th8 = th4 * th4
        dlam = lam.theta_deriv()
        lhs = dlam.theta_deriv().theta_deriv()
        rhs = dlam * (
            (lam * lam * 37 - lam * 58 + 13) * th8 * mpq(1, 4)
            + (5 - lam * 7) * th4 * e2 * mpq(1, 2)
            + e2 * e2 * mpq(1, 4)
        ) * mpq(1, 6)
        return lhs.compare_upto(rhs, N)
    if name == "L6.13":
        # E_k E_{14-k} = -Delta * (q dj/dq), checked for k in {4, 6}
        delta = build("delta", M)
        dj = build("j", M + 2).theta_deriv().truncate(M)
        rhs = -(delta * dj)
        ok4 = (build("E4", M) * build("E10", M)).compare_upto(rhs, N)
        ok6 = (build("E6", M) * build("E8", M)).compare_upto(rhs, N)
        return ok4 and ok6
    raise KeyError(f"unknown identity {name}")
