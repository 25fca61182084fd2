"""Independent numeric oracles.

Nothing here imports the package: invariants are brute-force sums over
subsets, x-derivatives come from Cauchy integrals on small circles, and the
metric on x-space is written down from the pairing of fundamental weights.
"""

from fractions import Fraction
from itertools import combinations, permutations

import numpy as np


def pairing(l, a, b):
    """Inner product of fundamental weights of A_l (1-based)."""
    return Fraction(min(a, b)) - Fraction(a * b, l + 1)


def tau(l, k):
    return [[Fraction(k + 1, k), Fraction(-1)], [Fraction(-1), Fraction(l - k + 1, l - k)]]


def ytilde(l, k, x):
    """(ytilde_1 .. ytilde_{l+2}) by explicit subset sums."""
    x = np.asarray(x, dtype=complex)
    xi = [np.exp(2j * np.pi * x[0])]
    xi += [np.exp(2j * np.pi * (x[j] - x[j - 1])) for j in range(1, l)]
    xi += [np.exp(-2j * np.pi * x[l - 1])]
    out = []
    for j in range(1, l + 1):
        s = sum(np.prod([xi[i] for i in idx]) for idx in combinations(range(l + 1), j))
        phase = float(pairing(l, j, k)) * x[l] + float(pairing(l, j, k + 1)) * x[l + 1]
        out.append(np.exp(2j * np.pi * phase) * s)
    out += [np.exp(2j * np.pi * x[l]), np.exp(2j * np.pi * x[l + 1])]
    return np.array(out)


def y_point(l, k, x):
    """y-chart coordinates: the invariants with the last two replaced by 2 pi i x."""
    y = ytilde(l, k, x)
    y[l] = 2j * np.pi * x[l]
    y[l + 1] = 2j * np.pi * x[l + 1]
    return y


def cauchy_jacobian(f, x, r=0.05, nodes=48):
    """J[i, a] = d f_i / d x_a for an entire function, by the Cauchy integral formula."""
    x = np.asarray(x, dtype=complex)
    w = np.exp(2j * np.pi * np.arange(nodes) / nodes)
    cols = []
    for a in range(len(x)):
        acc = 0
        for wn in w:
            xp = x.copy()
            xp[a] += r * wn
            acc = acc + f(xp) / (r * wn)
        cols.append(acc / nodes)
    return np.array(cols).T


def x_metric(l, k):
    """4 pi^2 (dx_a, dx_b): pairing block for a, b <= l, then minus the tau block."""
    n = l + 2
    G = np.zeros((n, n))
    for a in range(1, l + 1):
        for b in range(1, l + 1):
            G[a - 1, b - 1] = float(pairing(l, a, b))
    t = tau(l, k)
    for i in range(2):
        for j in range(2):
            G[l + i, l + j] = -float(t[i][j])
    return G / (4 * np.pi ** 2)


def intersection_form(l, k, x):
    """g^{ij} at the point x, as a numeric matrix."""
    J = cauchy_jacobian(lambda p: y_point(l, k, p), x)
    return J @ x_metric(l, k) @ J.T


def leibniz_det(m):
    """Determinant by the permutation expansion (exact for Fractions)."""
    n = len(m)
    total = 0
    for perm in permutations(range(n)):
        sign = 1
        p = list(perm)
        for i in range(n):
            while p[i] != i:
                j = p[i]
                p[i], p[j] = p[j], p[i]
                sign = -sign
        term = sign
        for i in range(n):
            term = term * m[i][perm[i]]
        total = total + term
    return total


def quadratic_remainder_coeffs(l, k):
    """Coefficients of (t^k)^2, t^k t^{k+1}, (t^{k+1})^2 in L_E F - 2F."""
    return Fraction(l, 2 * k * (l - k)), Fraction(1, l - k), Fraction(l - k + 1, 2 * (l - k))
