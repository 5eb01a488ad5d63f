"""asdlab: exact-arithmetic toolkit for Atkin–Swinnerton-Dyer-type
congruence verification on modular form expansions, elliptic curve
families, and p-adic constants."""

__version__ = "0.1.0"
