#!/usr/bin/env python3
"""Straight-line two-ray evaluation with mpmath, used to freeze reference values for the tests.

Usage: two_ray_reference.py d2D hTx hRx [txPowerDbm freqHz epsilonR]
"""
import sys

import mpmath as mp

mp.mp.dps = 50


def two_ray_dbm(d, htx, hrx, pt_dbm=10, freq=5.9e9, eps=1.003):
    d, htx, hrx = mp.mpf(d), mp.mpf(htx), mp.mpf(hrx)
    lam = mp.mpf(299792458) / mp.mpf(freq)
    los = mp.sqrt(d**2 + (htx - hrx) ** 2)
    gnd = mp.sqrt(d**2 + (htx + hrx) ** 2)
    sin_t = (htx + hrx) / gnd
    root = mp.sqrt(mp.mpf(eps) - (1 - sin_t**2))
    r = (sin_t - root) / (sin_t + root)
    e0 = mp.sqrt(30 * mp.power(10, (mp.mpf(pt_dbm) - 30) / 10))
    k = 2 * mp.pi / lam
    field = e0 / los * mp.expj(-k * los) + r * e0 / gnd * mp.expj(-k * gnd)
    watts = abs(field) ** 2 * lam**2 / (480 * mp.pi**2)
    return 10 * mp.log10(watts) + 30


if __name__ == "__main__":
    args = [float(a) for a in sys.argv[1:]]
    print(mp.nstr(two_ray_dbm(*args), 17))
