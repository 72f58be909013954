"""Brute-force reference implementations: naive loops, no shared machinery.

These exist solely to cross-check the vectorized evaluators; they take flat
value arrays and coordinate lists and loop over everything.  Keep them slow
and obvious.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["gagliardo", "level_set_inner", "bbm_morrey", "herz_local", "pair_measure"]


def gagliardo(values, coords, vol, s, p):
    """Double loop over ordered cell pairs of |f(x)-f(y)|^p / |x-y|^(sp+n)."""
    n = coords.shape[1]
    total = 0.0
    m = len(values)
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            d = 0.0
            for k in range(n):
                d += (coords[i, k] - coords[j, k]) ** 2
            d = math.sqrt(d)
            total += abs(values[i] - values[j]) ** p / d ** (s * p + n) * vol * vol
    return total ** (1.0 / p)


def level_set_inner(values, coords, vol, lam, gamma, p):
    """Per-cell sum over y of |x-y|^(gamma-n) where |f(x)-f(y)| > lam |x-y|^(1+gamma/p)."""
    n = coords.shape[1]
    m = len(values)
    out = np.zeros(m)
    for i in range(m):
        acc = 0.0
        for j in range(m):
            if i == j:
                continue
            d = 0.0
            for k in range(n):
                d += (coords[i, k] - coords[j, k]) ** 2
            d = math.sqrt(d)
            if abs(values[i] - values[j]) > lam * d ** (1.0 + gamma / p):
                acc += d ** (gamma - n) * vol
        out[i] = acc
    return out


def bbm_morrey(values, coords, vol, q, p, r, tau, nu_range):
    """Triple loop over levels, cube positions, and cells of the dyadic assembly."""
    n = coords.shape[1]
    level_terms = []
    for nu in range(nu_range[0], nu_range[1] + 1):
        side = 2.0 ** nu
        cube_vals = []
        mins = coords.min(axis=0)
        maxs = coords.max(axis=0)
        ranges = [range(math.floor(mins[k] / side) - 1, math.ceil(maxs[k] / side) + 1)
                  for k in range(n)]
        import itertools

        for m in itertools.product(*ranges):
            acc = 0.0
            for i in range(len(values)):
                ok = True
                for k in range(n):
                    lo = side * m[k]
                    if not (coords[i, k] > lo and coords[i, k] <= lo + side):
                        ok = False
                        break
                if ok:
                    acc += abs(values[i]) ** q * vol
            if acc > 0.0:
                cube_vals.append((side ** n) ** (1.0 / p - 1.0 / q) * acc ** (1.0 / q))
        if not cube_vals:
            level_terms.append(0.0)
        elif math.isinf(r):
            level_terms.append(max(cube_vals))
        else:
            level_terms.append(sum(v ** r for v in cube_vals) ** (1.0 / r))
    if math.isinf(tau):
        return max(level_terms) if level_terms else 0.0
    return sum(t ** tau for t in level_terms) ** (1.0 / tau)


def herz_local(values, coords, vol, p, q, a, xi):
    """Annulus-by-annulus sums around xi with weight (2^k)^a."""
    n = coords.shape[1]
    xi = np.asarray(xi if not np.isscalar(xi) else [xi] * n, dtype=float)
    sums: dict[int, float] = {}
    for i in range(len(values)):
        d = 0.0
        for k in range(n):
            d += (coords[i, k] - xi[k]) ** 2
        d = math.sqrt(d)
        if d == 0.0:
            continue
        k = -200
        while 2.0 ** k <= d:
            k += 1
        # smallest k with 2^k > d, so the cell sits in annulus [2^(k-1), 2^k)
        sums[k] = sums.get(k, 0.0) + abs(values[i]) ** p * vol
    total = 0.0
    for k, mass in sums.items():
        total += ((2.0 ** k) ** a * mass ** (1.0 / p)) ** q
    return total ** (1.0 / q)


def pair_measure(values, coords, vol, lam, gamma, p):
    """Level-set pair measure: kernel-weighted count over ordered pairs."""
    n = coords.shape[1]
    m = len(values)
    total = 0.0
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            d = float(np.linalg.norm(coords[i] - coords[j]))
            if abs(values[i] - values[j]) > lam * d ** (1.0 + gamma / p):
                total += d ** (gamma - n) * vol * vol
    return total
