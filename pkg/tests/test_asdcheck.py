"""Congruence engine: exact Hecke recurrences, scale invariance, mutation
sensitivity, guard stability, determinism, fitting, and the characteristic
polynomial helpers."""

import json

import pytest
from gmpy2 import mpq

from asdlab import asdcheck as ac
from asdlab import elliptic as el
from asdlab import modforms as mf
from asdlab.asdcheck import (
    CoeffSeq,
    CongruenceReport,
    FitError,
    InsufficientCoefficients,
    NonIntegralAtP,
    RecurrenceSpec,
    UnknownScenario,
    check_cross_term,
    check_recurrence,
    check_two_term,
    fit_cross_multiplier,
    is_good_prime,
    j_shift,
    pole_factor,
    scenario,
    scenario_names,
)
from asdlab.exactnum import QuadElem, unit_root
from asdlab.qseries import divisor_series


# ---------------------------------------------------------------------------
# CoeffSeq basics
# ---------------------------------------------------------------------------


def _sigma3_seq(N):
    s = divisor_series(0, lambda d, n: d**3, N + 1)
    return CoeffSeq.from_qseries(s, "sigma3")


def test_coeffseq_conventions():
    seq = CoeffSeq("t", 1, [mpq(5), mpq(7)])
    assert seq.value(0) == 0
    assert seq.value(-3) == 0
    assert seq.value(2) == 7
    with pytest.raises(InsufficientCoefficients):
        seq.value(3)


def test_coeffseq_integrality_guard():
    seq = CoeffSeq("t", 1, [mpq(1, 5)])
    with pytest.raises(NonIntegralAtP):
        seq.assert_p_integral(5)
    seq.assert_p_integral(7)
    assert seq.denominator_support() == {5}


# ---------------------------------------------------------------------------
# exact Hecke recurrence: sigma_3 (weight-4 Eisenstein coefficients)
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("p", [2, 3, 5, 7, 11])
def test_sigma3_hecke_recurrence_is_exactly_zero(p):
    seq = _sigma3_seq(p**2 * 20)
    spec = RecurrenceSpec(p=p, r=1, k=4, A=(1, -(1 + p**3), p**3), shift=0,
                          divided=True)
    rep = check_recurrence(seq, spec, m_max=15, s_max=2)
    assert rep.checks
    for c in rep.checks:
        # exact zero: achieved valuation is the cap required + guard
        assert c["pass"]
        assert c["achieved"] == c["required"] + ac.GUARD


# ---------------------------------------------------------------------------
# scale invariance of verdicts under p-unit scaling
# ---------------------------------------------------------------------------


def _strip_meta(rep):
    return [(c["m"], c["s"], c["required"], c["achieved"], c["pass"])
            for c in rep.finalize().checks]


def test_scale_invariance_three_scenarios():
    # (1) weight-3 two-term at p=5
    p = 5
    f = mf.mero_weight3(2, 300)
    seq = CoeffSeq.from_qseries(f, "w3")
    a_p, _ = el.reduce_and_count(el.family_thm16(2), p)
    mu = int(unit_root(a_p, p, 14).lift())
    base = check_two_term(seq, mu, lambda s: 2 * s, p, 10, 2)
    scaled = check_two_term(seq.scaled(mpq(3, 7)), mu, lambda s: 2 * s, p, 10, 2)
    assert _strip_meta(base) == _strip_meta(scaled)

    # (2) half-integral grading recurrence at p=7
    h2 = CoeffSeq.from_qseries(mf.build("h2", 350), "h2")
    B7 = int(mf.build("eta4_6", 8).coeff(7))
    spec = RecurrenceSpec(p=7, r=1, k=3, A=(1, -B7, -49), shift=0, divided=True)
    base = check_recurrence(h2, spec, 10, 2)
    scaled = check_recurrence(h2.scaled(mpq(2, 3)), spec, 10, 2)
    assert _strip_meta(base) == _strip_meta(scaled)

    # (3) C4-type two-term at p=5
    c4 = CoeffSeq.from_qseries(mf.build("C4", 300), "C4")
    base = check_two_term(c4, 5, lambda s: 3 * s, 5, 10, 2)
    scaled = check_two_term(c4.scaled(mpq(9, 11)), 5, lambda s: 3 * s, 5, 10, 2)
    assert _strip_meta(base) == _strip_meta(scaled)


# ---------------------------------------------------------------------------
# mutation sensitivity and guard stability
# ---------------------------------------------------------------------------


def _w3_fixture(p=5, N=300):
    f = mf.mero_weight3(2, N)
    seq = CoeffSeq.from_qseries(f, "w3")
    a_p, _ = el.reduce_and_count(el.family_thm16(2), p)
    mu = int(unit_root(a_p, p, 16).lift())
    return seq, mu, p


def test_mutated_multiplier_fails():
    seq, mu, p = _w3_fixture()
    good = check_two_term(seq, mu, lambda s: 2 * s, p, 10, 2)
    assert all(c["pass"] for c in good.checks)
    # perturb by p^(E-1): must break the s = 2 checks (required 4, mutation at 3)
    bad = check_two_term(seq, mu + p**3, lambda s: 2 * s, p, 10, 2)
    broken = [c for c in bad.checks if not c["pass"]]
    assert broken
    assert all(c["s"] == 2 for c in broken)
    assert all(c["achieved"] == 3 for c in broken)


def test_guard_doubling_does_not_change_verdicts():
    seq, mu, p = _w3_fixture()
    a = check_two_term(seq, mu, lambda s: 2 * s, p, 10, 2, guard=ac.GUARD)
    b = check_two_term(seq, mu, lambda s: 2 * s, p, 10, 2, guard=2 * ac.GUARD)
    for ca, cb in zip(a.finalize().checks, b.finalize().checks):
        assert ca["pass"] == cb["pass"]
        # non-capped achieved valuations are identical; capped ones only grow
        if ca["achieved"] < ca["required"] + ac.GUARD:
            assert cb["achieved"] == ca["achieved"]


# ---------------------------------------------------------------------------
# divided vs undivided recurrence formulations agree
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("p", [5, 7])
def test_divided_and_undivided_consistent(p):
    u = mpq(2)
    seq = CoeffSeq.from_qseries(mf.mero_weight3(u, 620), "w3")
    a_p, _ = el.reduce_and_count(el.family_thm16(u), p)
    div = RecurrenceSpec(p=p, r=1, k=3, A=(1, -a_p, p), shift=-1, divided=True)
    undiv = RecurrenceSpec(p=p, r=1, k=3, A=(p**3, -p * a_p, 1), shift=2,
                           divided=False)
    assert undiv.required(1, 1) == div.required(1, 1) + 3
    rd = check_recurrence(seq, div, 8, 2)
    ru = check_recurrence(seq, undiv, 8, 2)
    for cd, cu in zip(rd.finalize().checks, ru.finalize().checks):
        assert (cd["m"], cd["s"]) == (cu["m"], cu["s"])
        assert cd["pass"] == cu["pass"]
        # the undivided left side carries exactly three extra powers of p
        if cd["achieved"] < cd["required"] + ac.GUARD:
            assert cu["achieved"] == cd["achieved"] + 3


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------


def test_fit_cross_multiplier_recovers_constant():
    p, c = 7, 1234
    N = 400
    base = [mpq(n * n + 1) for n in range(1, N + 1)]
    vals = list(base)
    for s in (1, 2):
        for m in range(1, N // p**s + 1):
            # a(m p^s) = c * a(m p^(s-1)) + p^(2s) * noise
            vals[m * p**s - 1] = c * vals[m * p ** (s - 1) - 1] + p ** (2 * s) * m
    seqA = CoeffSeq("A", 1, vals)
    seqB = CoeffSeq("B", 1, vals)
    # limit below p^3 so only the constructed s = 1, 2 relations constrain c
    got, digits = fit_cross_multiplier(seqA, seqB, p, 340)
    assert digits >= 2
    assert (got - c) % p**digits == 0


def test_fit_cross_multiplier_detects_inconsistency():
    p = 5
    vals = [mpq(1)] * 130
    vals[4] = mpq(2)    # a(5) = 2 a(1)
    vals[49] = mpq(30)  # a(50) = 30 a(10): 30 != 2 mod 25
    seq = CoeffSeq("A", 1, vals)
    with pytest.raises(FitError):
        fit_cross_multiplier(seq, seq, p, 130)


def test_cross_term_step2():
    # two-step relation on a geometric sequence
    p = 3
    vals = [mpq(5) ** (len(bin(n)) if False else 0) for n in range(1, 200)]
    vals = [mpq(7) ** _v3(n) for n in range(1, 200)]
    seq = CoeffSeq("A", 1, vals)
    rep = check_cross_term(seq, seq, 49, lambda s: 5, p, 10, 4, step=2)
    assert rep.checks and all(c["pass"] for c in rep.checks)


def _v3(n):
    v = 0
    while n % 3 == 0:
        n //= 3
        v += 1
    return v


# ---------------------------------------------------------------------------
# characteristic polynomial helpers
# ---------------------------------------------------------------------------


def test_pole_factor_examples():
    assert pole_factor(3, 5, 1, -2) == [1, 10, 125]
    assert pole_factor(3, 5, 1, 0) == [1, 0, 125]


def test_pole_factor_k4_numeric_oracle():
    import itertools

    import mpmath as mp

    for p, a_p in [(5, -2), (7, 1), (13, 6)]:
        got = pole_factor(4, p, 1, a_p)
        with mp.workdps(40):
            disc = mp.mpc(a_p * a_p - 4 * p)
            alpha = (a_p + mp.sqrt(disc)) / 2
            beta = (a_p - mp.sqrt(disc)) / 2
            roots = [p * alpha**j * beta ** (2 - j) for j in range(3)]
            # elementary symmetric functions of the numeric roots
            e1 = sum(roots)
            e2 = sum(x * y for x, y in itertools.combinations(roots, 2))
            e3 = roots[0] * roots[1] * roots[2]
            for exact, approx in zip(got, [1, -e1, e2, -e3]):
                assert abs(mp.mpc(exact) - approx) < mp.mpf("1e-20")


def test_pole_factor_monic_and_functional():
    poly = pole_factor(5, 7, 1, 2)
    assert poly[0] == 1 and len(poly) == 5
    # product of the roots p * alpha^j beta^(k-2-j) is p^(k-1) * p^((k-1)(k-2)/2)
    assert abs(poly[-1]) == 7 ** (4 + 6)
    assert pole_factor(3, 7, 1, 1) == [1, -7, 343]


def test_j_shift_cases():
    assert j_shift(3, 1, 0, 5) == 2
    assert j_shift(3, 3, 0, 5) == 0
    assert j_shift(4, 3, 0, 5) == 1
    assert j_shift(4, 6, 1, 5) == -1  # -ord_5(5!)
    assert j_shift(4, 6, 1, 7) == 0


def test_is_good_prime_clauses():
    ok, reasons = is_good_prime(4, 3, 5, [mpq(2)], 7)
    assert ok and not reasons
    ok, reasons = is_good_prime(4, 3, 5, [mpq(2)], 5)
    assert not ok and any("ramified" in r for r in reasons)
    ok, reasons = is_good_prime(4, 3, 5, [mpq(2), mpq(9)], 7)
    assert not ok and any("collide" in r for r in reasons)
    ok, reasons = is_good_prime(4, 6, 5, [mpq(2)], 3)
    assert not ok and any("2M(k-2)!" in r for r in reasons)
    ok, reasons = is_good_prime(4, 3, 5, [mpq(1, 7)], 7)
    assert not ok and any("integral" in r for r in reasons)
    # quadratic pole parameter requires a split prime
    ok, reasons = is_good_prime(1, 3, 2, [QuadElem(17, -12, 2)], 5)
    assert not ok and any("embeddable" in r for r in reasons)
    ok, reasons = is_good_prime(1, 3, 2, [QuadElem(17, -12, 2)], 7)
    assert ok


# ---------------------------------------------------------------------------
# reports: determinism, JSON schema, observation semantics
# ---------------------------------------------------------------------------


def test_report_determinism_byte_identical():
    a = scenario("sec8.3-ALL", p_list=(7, 13), m_max=6, s_max=2, N=700)
    b = scenario("sec8.3-ALL", p_list=(13, 7), m_max=6, s_max=2, N=700)
    assert a.to_json() == b.to_json()


def test_report_schema_round_trip():
    rep = scenario("ex1.2", u_list=(2,), p_list=(5,), m_max=4, s_max=1, N=60)
    data = json.loads(rep.to_json())
    assert set(data) == {"scenario", "params", "checks", "skipped", "summary"}
    for c in data["checks"]:
        assert {"m", "s", "required", "achieved", "pass", "p"} <= set(c)
    assert data["summary"]["pass"] == sum(1 for c in data["checks"] if c["pass"])


def test_observation_checks_do_not_fail_report():
    rep = CongruenceReport("t", {})
    rep.add(p=5, m=1, s=1, required=2, achieved=0, ok=False, observation=True)
    rep.add(p=5, m=2, s=1, required=2, achieved=3, ok=True)
    assert rep.all_pass
    rep.add(p=5, m=3, s=1, required=2, achieved=0, ok=False)
    assert not rep.all_pass


def test_unknown_scenario_raises():
    with pytest.raises(UnknownScenario):
        scenario("not-a-scenario")
    assert "thm1.6.1" in scenario_names()


# ---------------------------------------------------------------------------
# background observation: vanishing Hecke values at inert primes
# ---------------------------------------------------------------------------


def test_eta_coefficients_vanish_at_inert_primes():
    import sympy as sp

    eta = mf.build("eta4_6", 201)
    for p in sp.primerange(3, 201):
        if p % 4 == 3:
            assert eta.coeff(int(p)) == 0
