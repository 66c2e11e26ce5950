"""Modulus of the eccentric annulus {|z| < 1, |z - c| > rho} via a disc automorphism.

z -> (z - a)/(1 - a z) with real a fixes the unit circle and maps the inner
circle to a circle centred at 0 when a solves a^2 c - a(1 + c^2 - rho^2) + c = 0.
"""
from mpmath import mp, mpf, sqrt, fabs

mp.dps = 40


def modulus(c, rho):
    c, rho = mpf(c), mpf(rho)
    s = 1 + c * c - rho * rho
    a = (s - sqrt(s * s - 4 * c * c)) / (2 * c)
    m = lambda z: (z - a) / (1 - a * z)
    r1, r2 = fabs(m(c + rho)), fabs(m(c - rho))
    assert fabs(r1 - r2) < mpf(10) ** -30
    return r1


if __name__ == "__main__":
    print(mp.nstr(modulus("0.2", "0.3"), 25))
