#!/usr/bin/env python3
"""Independent reference values for the shooting solver.

Integrates the radial Lane-Emden family

    (r^{d-1} f')' + r^{d-1} f_+^q = 0,   q = d/(d-2),
    f(gamma) = 1,  f'(gamma) = -gamma/d,

with scipy's DOP853 (8th order, adaptive, its own event root-finder),
which shares no code with the C++ integrator.  Prints R(gamma), the
radial mass  gamma^d/d + int_gamma^R r^{d-1} f_+^q dr, the variation
derivative dM/dgamma = -R^{d-1} w'(R), and the critical-mass numbers
used as frozen expected values in the test suite.

Usage: python3 tools/reference_shooting.py
"""

import math

import numpy as np
from scipy.integrate import solve_ivp

RTOL, ATOL = 1e-13, 5e-14


def rhs(d, q):
    def f(r, y):
        fv, g, _ = y
        fp = max(fv, 0.0) ** q
        return [g, -(d - 1) / r * g - fp, r ** (d - 1) * fp]

    return f


def shoot(d, gamma, taylor_to=1e-3):
    q = d / (d - 2)
    if gamma == 0.0:
        r0 = taylor_to
        y0 = [1.0 - r0 * r0 / (2 * d), -r0 / d, r0**d / d]
    else:
        r0 = gamma
        y0 = [1.0, -gamma / d, gamma**d / d]
    ev = lambda r, y: y[0]
    ev.terminal, ev.direction = True, -1
    sol = solve_ivp(rhs(d, q), (r0, 1e4), y0, method="DOP853",
                    rtol=RTOL, atol=ATOL, events=ev, dense_output=True)
    assert sol.status == 1, f"no zero found d={d} gamma={gamma}"
    R = sol.t_events[0][0]
    fR, gR, mass = sol.y_events[0][0]
    return R, mass, gR


def variation(d, gamma):
    """Co-integrate (f, f', M, w, w') and return -R^{d-1} w'(R)."""
    q = d / (d - 2)

    def f(r, y):
        fv, g, _, w, wp = y
        fpos = max(fv, 0.0)
        return [g,
                -(d - 1) / r * g - fpos**q,
                r ** (d - 1) * fpos**q,
                wp,
                -(d - 1) / r * wp - q * fpos ** (q - 1) * w]

    y0 = [1.0, -gamma / d, gamma**d / d, gamma / d, 0.0]
    ev = lambda r, y: y[0]
    ev.terminal, ev.direction = True, -1
    sol = solve_ivp(f, (gamma, 1e4), y0, method="DOP853",
                    rtol=RTOL, atol=ATOL, events=ev)
    R = sol.t_events[0][0]
    wpR = sol.y_events[0][0][4]
    return -R ** (d - 1) * wpR


def direct_profile_mass(d):
    """Mass of the solution of  (m/(m-1)) Dh + h^q = 0, h(0)=1, h'(0)=0."""
    q = d / (d - 2)
    m = 2.0 - 2.0 / d
    c = (m - 1.0) / m

    def f(r, y):
        hv, g, _ = y
        hp = max(hv, 0.0) ** q
        return [g, -(d - 1) / r * g - c * hp, r ** (d - 1) * hp]

    r0 = 1e-3
    y0 = [1.0 - c * r0 * r0 / (2 * d), -c * r0 / d, r0**d / d]
    ev = lambda r, y: y[0]
    ev.terminal, ev.direction = True, -1
    sol = solve_ivp(f, (r0, 1e4), y0, method="DOP853",
                    rtol=RTOL, atol=ATOL, events=ev)
    R = sol.t_events[0][0]
    mass = sol.y_events[0][0][2]
    sigma_d = 2.0 * np.pi ** (d / 2.0) / math.gamma(d / 2.0)
    return R, sigma_d * mass


def main():
    np.set_printoptions(precision=17)
    print("# shoot(d, gamma): R, radial_mass, f'(R)")
    for d in (3, 4, 5):
        for gamma in (0.0, 0.3, 1.0):
            R, mass, gR = shoot(d, gamma)
            two_ways = mass + R ** (d - 1) * gR
            print(f"d={d} gamma={gamma:<4} R={R:.15e} M={mass:.15e} "
                  f"two_ways={two_ways:.2e}")

    print("\n# variation dM/dgamma (d=3) vs centered finite difference")
    for gamma in (0.2, 0.5, 1.0):
        dm = variation(3, gamma)
        h = 1e-5
        fd = (shoot(3, gamma + h)[1] - shoot(3, gamma - h)[1]) / (2 * h)
        print(f"gamma={gamma} dM/dgamma={dm:.15e} fd={fd:.15e} "
              f"rel={abs(dm - fd) / abs(dm):.2e}")

    print("\n# d=4 mass-curve flatness near gamma=0")
    M0 = shoot(4, 0.0)[1]
    for gamma in (1e-6, 1e-3, 1e-2, 0.1):
        Mg = shoot(4, gamma)[1]
        print(f"gamma={gamma:<6} M-M0={Mg - M0:+.3e}")

    print("\n# critical masses, d=3")
    R3, M3 = shoot(3, 0.0)[:2]
    mu_q = ((2.0 * (3 - 1)) / (3 - 2)) ** (3 / (3 - 2) * (3 - 2) / 2.0)
    print(f"shoot(3,0): R={R3:.15e} Mr={M3:.15e}")
    print(f"critical_mass_sub(3) = 32*pi*Mr = {32 * np.pi * M3:.15e}")
    Rd, Md = direct_profile_mass(3)
    print(f"direct_profile(3):  R={Rd:.15e} M={Md:.15e}")
    print(f"rel diff = {abs(Md - 32 * np.pi * M3) / Md:.2e}  (mu^q={mu_q})")

    print("\n# d=4, d=5 critical masses")
    for d in (4, 5):
        q = d / (d - 2)
        m = 2.0 - 2.0 / d
        mu_q = (m / (m - 1.0)) ** ((d - 2) / 2.0 * q)
        sigma_d = 2.0 * np.pi ** (d / 2.0) / math.gamma(d / 2.0)
        Mr = shoot(d, 0.0)[1]
        Rd, Md = direct_profile_mass(d)
        print(f"d={d}: sigma*mu^q*Mr={sigma_d * mu_q * Mr:.15e} "
              f"direct={Md:.15e} rel={abs(Md - sigma_d * mu_q * Mr) / Md:.2e}")


if __name__ == "__main__":
    main()
