"""50-digit reference evaluations with mpmath, independent of the numpy code paths."""

import mpmath as mp

mp.mp.dps = 50


def f(L, x):
    return mp.log(1 + mp.mpf(L) * (mp.exp(x) - 1))


def f_prime(L, x):
    L = mp.mpf(L)
    return L * mp.exp(x) / (1 + L * (mp.exp(x) - 1))


def coefficients(L, anchor, y):
    anchor, y = mp.mpf(anchor), mp.mpf(y)
    a = ((f(L, anchor) - f(L, y)) / (anchor - y) - f_prime(L, y)) / (anchor - y)
    b = f_prime(L, y) - 2 * a * y
    c = f(L, anchor) - a * anchor ** 2 - b * anchor
    return a, b, c


def radicand(L, anchor, y, m1, L0, fee):
    a, b, c = coefficients(L, anchor, y)
    m1 = mp.mpf(m1)
    return -m1 ** 2 + ((mp.mpf(L0) - b) / a) * m1 - (c - mp.mpf(fee)) / a


def grid_sup_radicand(L, anchor, lo, hi, m1, L0, fee, points=2001, rounds=3):
    """Best radicand on a uniform grid over [lo, hi], re-gridded around the best point."""
    lo, hi = mp.mpf(lo), mp.mpf(hi)
    best_y, best = None, None
    for _ in range(rounds):
        step = (hi - lo) / (points - 1)
        for i in range(points):
            y = lo + i * step
            if abs(y - anchor) < mp.mpf("1e-7"):
                continue
            value = radicand(L, anchor, y, m1, L0, fee)
            if best is None or value > best:
                best_y, best = y, value
        lo, hi = max(lo, best_y - 2 * step), min(hi, best_y + 2 * step)
    return best_y, best
