"""Form catalog: frozen expansions, brute-force counting oracles, dual-route
agreement, and the exact series identity suite."""

import pytest
from gmpy2 import mpq

from asdlab import modforms as mf
from asdlab.modforms import (
    IDENTITY_NAMES,
    FormId,
    PoleAtCuspParameter,
    SingularJ,
    apery_form_definitional,
    apery_numbers,
    build,
    verify_identity,
)


# ---------------------------------------------------------------------------
# theta series vs representation counts
# ---------------------------------------------------------------------------


def _r2(n):
    count = 0
    a = 0
    while a * a <= n:
        b2 = n - a * a
        b = int(b2**0.5)
        while b * b < b2:
            b += 1
        if b * b == b2:
            count += (2 if a else 1) * (2 if b else 1)
        a += 1
    return count


def test_theta2_counts_two_squares():
    N = 120
    th2 = build("theta2", N)
    for n in range(N):
        assert th2.coeff_index(n) == _r2(n)


def test_theta4_counts_four_squares():
    N = 80
    th4 = build("theta4", N)
    for n in range(N):
        want = sum(_r2(k) * _r2(n - k) for k in range(n + 1))
        assert th4.coeff_index(n) == want


def test_theta_powers_consistent():
    N = 60
    th2, th4, th6 = build("theta2", N), build("theta4", N), build("theta6", N)
    assert (th2 * th2).compare_upto(th4, N - 1)
    assert (th2 * th4).compare_upto(th6, N - 1)


# ---------------------------------------------------------------------------
# frozen classical expansions
# ---------------------------------------------------------------------------

FROZEN = {
    "E2": [1, -24, -72, -96, -168, -144, -288],
    "E4": [1, 240, 2160, 6720, 17520, 30240, 60480],
    "E6": [1, -504, -16632, -122976, -532728, -1575504, -4058208],
    "delta": [0, 1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643],
    "lambda": [0, 16, -128, 704, -3072, 11488, -38400, 117632],
    "C4": [0, 1, -56, 2076, -65984, 1941630, -54527520, 1483886936],
}


@pytest.mark.parametrize("name", sorted(FROZEN))
def test_frozen_expansions(name):
    want = FROZEN[name]
    s = build(name, len(want))
    for n, c in enumerate(want):
        assert s.coeff_index(n) == c, (name, n)


def test_j_expansion():
    j = build("j", 4)
    assert j.lo == -1
    assert j.coeff(-1) == 1
    assert j.coeff(0) == 744
    assert j.coeff(1) == 196884
    assert j.coeff(2) == 21493760
    assert j.coeff(3) == 864299970


def test_eta4_6_brute_force():
    N = 200
    s = build("eta4_6", N)
    # q * prod (1 - q^(4n))^6 by naive repeated multiplication
    co = [mpq(0)] * N
    co[1] = mpq(1)
    n = 1
    while 4 * n < N:
        for _ in range(6):
            for i in range(N - 1, 4 * n - 1, -1):
                co[i] -= co[i - 4 * n]
        n += 1
    for i in range(N):
        assert s.coeff_index(i) == co[i]


def test_eta4_6_known_hecke_values():
    # a_p for the weight-3 CM newform eta(4 tau)^6: a_p = 2(a^2 - b^2) for
    # p = a^2 + b^2 with a odd, sign a = 1 mod 4; zero for p = 3 mod 4
    s = build("eta4_6", 30)
    assert s.coeff(5) == -6
    assert s.coeff(13) == 10
    assert s.coeff(17) == -30
    assert s.coeff(11) == 0
    assert s.coeff(7) == 0


# ---------------------------------------------------------------------------
# Apery-weighted form: dual route
# ---------------------------------------------------------------------------


def test_apery_numbers():
    assert apery_numbers(4) == [1, 3, 19, 147, 1251]


def test_apery_form_dual_route():
    N = 300
    assert build("aperyF", N).compare_upto(apery_form_definitional(N), N)


def test_h2_frozen():
    want = [1, 0, mpq(-9, 2), 0, mpq(27, 8), 0, mpq(147, 16)]
    h2 = build("h2", 9)
    assert h2.mu == 2
    assert h2.lo == 1
    for i, c in enumerate(want):
        assert h2.coeff_index(1 + i) == c


def test_gamma2_form_frozen():
    want = [1, 1, -6, mpq(-17, 2), 8, mpq(219, 8), 30]
    b = mf.gamma2_form(1, 20)
    assert b.mu == 2
    assert b.lo == 2
    for i, c in enumerate(want):
        assert b.coeff_index(2 + i) == c


# ---------------------------------------------------------------------------
# meromorphic builders
# ---------------------------------------------------------------------------


def test_ex19_pair_frozen():
    a_f = [-8, 32, 192, -896, -4304, 20736, 99456, -478720, -2302536,
           11076416, 53283648, -256318464]
    a_g = [8, 96, -704, -4736, 28880, 168704, -954496, -5278208, 28697160,
           153946560, -817047872, -4298347520]
    f, g = mf.ex19_pair(13)
    for n in range(1, 13):
        assert f.coeff_index(n) == a_f[n - 1]
        assert g.coeff_index(n) == a_g[n - 1]


def test_mero_weight3_leading():
    f = mf.mero_weight3(2, 30)
    assert f.lo == 1
    assert f.coeff(1) == -8  # -16/u at u=2


def test_pole_at_cusp_rejected():
    with pytest.raises(PoleAtCuspParameter):
        mf.mero_weight3(0, 10)
    with pytest.raises(PoleAtCuspParameter):
        mf.mero_weight4(1, 10)


def test_level1_form_rejects_singular_j():
    with pytest.raises(SingularJ):
        mf.level1_form(4, 0, 10)
    with pytest.raises(SingularJ):
        mf.level1_form(4, 1728, 10)
    with pytest.raises(ValueError):
        mf.level1_form(5, -3375, 10)


def test_level1_form_shape():
    s = mf.level1_form(4, -3375, 40)
    assert s.lo == 1  # E4/(j - jval) ~ q at the cusp
    assert s.coeff(1) == 1


# ---------------------------------------------------------------------------
# build cache and form ids
# ---------------------------------------------------------------------------


def test_build_cache_returns_same_object():
    a = build("E4", 64)
    b = build("E4", 64)
    assert a is b
    mf.clear_cache()
    c = build("E4", 64)
    assert c is not a
    assert c.compare_upto(a, 64)


def test_form_id_keys_stable():
    fid = FormId.of("mero_w4_h", u=2, c1=1, c2=4)
    assert fid.key == "mero_w4_h[c1=1,c2=4,u=2]"
    assert FormId.of("theta2").key == "theta2"


def test_build_rejects_param_mismatch():
    with pytest.raises(ValueError):
        build("theta2", 10, u=2)
    with pytest.raises(KeyError):
        build("no_such_form", 10)


# ---------------------------------------------------------------------------
# identity suite
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("name", IDENTITY_NAMES)
def test_identities_hold(name):
    assert verify_identity(name, 100)


def test_identity_rejects_tiny_n():
    with pytest.raises(ValueError):
        verify_identity(IDENTITY_NAMES[0], 5)
