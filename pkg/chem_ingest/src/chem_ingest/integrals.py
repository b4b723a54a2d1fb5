"""Molecular integrals over contracted Cartesian Gaussians.

McMurchie-Davidson scheme: products of Gaussians are expanded in
Hermite Gaussians (coefficients E), and Coulomb-type integrals reduce
to derivatives of the Boys function (auxiliary table R).
"""

from __future__ import annotations

import numpy as np
from scipy.special import hyp1f1

from .basis import BasisFunction


def boys(n_max: int, x: float) -> np.ndarray:
    """F_n(x) for n = 0..n_max."""
    ns = np.arange(n_max + 1)
    return hyp1f1(ns + 0.5, ns + 1.5, -x) / (2.0 * ns + 1.0)


def hermite_expansion(i: int, j: int, a: float, b: float, ab: float) -> np.ndarray:
    """E_t coefficients (t = 0..i+j) for a 1-D Gaussian product.

    ``ab`` is the center separation A - B along this axis.
    """
    p = a + b
    coefs = np.zeros((i + 1, j + 1, i + j + 3))
    coefs[0, 0, 0] = np.exp(-a * b / p * ab * ab)
    pa = -b / p * ab  # P - A
    pb = a / p * ab   # P - B
    for ii in range(1, i + 1):
        for t in range(ii + 1):
            coefs[ii, 0, t] = (
                (coefs[ii - 1, 0, t - 1] / (2.0 * p) if t > 0 else 0.0)
                + pa * coefs[ii - 1, 0, t]
                + (t + 1) * coefs[ii - 1, 0, t + 1])
    for jj in range(1, j + 1):
        for ii in range(i + 1):
            for t in range(ii + jj + 1):
                coefs[ii, jj, t] = (
                    (coefs[ii, jj - 1, t - 1] / (2.0 * p) if t > 0 else 0.0)
                    + pb * coefs[ii, jj - 1, t]
                    + (t + 1) * coefs[ii, jj - 1, t + 1])
    return coefs[i, j, :i + j + 1]


def hermite_coulomb(tmax: int, umax: int, vmax: int, p: float,
                    pc: np.ndarray) -> np.ndarray:
    """R_{tuv} table (order-0 auxiliaries) for all t<=tmax, u<=umax, v<=vmax."""
    n_max = tmax + umax + vmax
    x = p * float(pc @ pc)
    f = boys(n_max, x)
    base = ((-2.0 * p) ** np.arange(n_max + 1)) * f
    # r[n, t, u, v]; the (t, u, v) loops ascend so every entry referenced at
    # order n + 1 is already filled
    r = np.zeros((n_max + 1, tmax + 1, umax + 1, vmax + 1))
    r[:, 0, 0, 0] = base
    for t in range(tmax + 1):
        for u in range(umax + 1):
            for v in range(vmax + 1):
                if t == u == v == 0:
                    continue
                for n in range(n_max - (t + u + v) + 1):
                    if t > 0:
                        val = pc[0] * r[n + 1, t - 1, u, v]
                        if t > 1:
                            val += (t - 1) * r[n + 1, t - 2, u, v]
                    elif u > 0:
                        val = pc[1] * r[n + 1, t, u - 1, v]
                        if u > 1:
                            val += (u - 1) * r[n + 1, t, u - 2, v]
                    else:
                        val = pc[2] * r[n + 1, t, u, v - 1]
                        if v > 1:
                            val += (v - 1) * r[n + 1, t, u, v - 2]
                    r[n, t, u, v] = val
    return r[0]


def _pair_expansions(f1: BasisFunction, f2: BasisFunction, a: float, b: float):
    return tuple(
        hermite_expansion(f1.lmn[d], f2.lmn[d], a, b,
                          f1.center[d] - f2.center[d])
        for d in range(3))


def overlap(f1: BasisFunction, f2: BasisFunction) -> float:
    total = 0.0
    for ca, a in zip(f1.coefficients, f1.exponents):
        for cb, b in zip(f2.coefficients, f2.exponents):
            ex, ey, ez = _pair_expansions(f1, f2, a, b)
            total += ca * cb * ex[0] * ey[0] * ez[0] * (np.pi / (a + b)) ** 1.5
    return total


def _kinetic_1d(i: int, j: int, a: float, b: float, ab: float) -> float:
    """<g_i| -1/2 d^2/dx^2 |g_j> divided by sqrt(pi/p)."""
    def s(ii, jj):
        if ii < 0 or jj < 0:
            return 0.0
        return hermite_expansion(ii, jj, a, b, ab)[0]

    term = b * (2 * j + 1) * s(i, j) - 2.0 * b * b * s(i, j + 2)
    if j >= 2:
        term -= 0.5 * j * (j - 1) * s(i, j - 2)
    return term


def kinetic(f1: BasisFunction, f2: BasisFunction) -> float:
    total = 0.0
    for ca, a in zip(f1.coefficients, f1.exponents):
        for cb, b in zip(f2.coefficients, f2.exponents):
            pref = (np.pi / (a + b)) ** 1.5
            parts = []
            svals = []
            for d in range(3):
                ab = f1.center[d] - f2.center[d]
                svals.append(hermite_expansion(f1.lmn[d], f2.lmn[d], a, b, ab)[0])
                parts.append(_kinetic_1d(f1.lmn[d], f2.lmn[d], a, b, ab))
            total += ca * cb * pref * (
                parts[0] * svals[1] * svals[2]
                + svals[0] * parts[1] * svals[2]
                + svals[0] * svals[1] * parts[2])
    return total


def nuclear_attraction(f1: BasisFunction, f2: BasisFunction,
                       charges, centers) -> float:
    total = 0.0
    for ca, a in zip(f1.coefficients, f1.exponents):
        for cb, b in zip(f2.coefficients, f2.exponents):
            p = a + b
            big_p = (a * f1.center + b * f2.center) / p
            ex, ey, ez = _pair_expansions(f1, f2, a, b)
            for charge, center in zip(charges, centers):
                r = hermite_coulomb(len(ex) - 1, len(ey) - 1, len(ez) - 1,
                                    p, big_p - center)
                acc = np.einsum("t,u,v,tuv->", ex, ey, ez, r)
                total -= charge * ca * cb * (2.0 * np.pi / p) * acc
    return total


def electron_repulsion(f1, f2, f3, f4) -> float:
    """(f1 f2 | f3 f4) in chemist notation."""
    total = 0.0
    for c1, a1 in zip(f1.coefficients, f1.exponents):
        for c2, a2 in zip(f2.coefficients, f2.exponents):
            p = a1 + a2
            big_p = (a1 * f1.center + a2 * f2.center) / p
            e1 = _pair_expansions(f1, f2, a1, a2)
            for c3, a3 in zip(f3.coefficients, f3.exponents):
                for c4, a4 in zip(f4.coefficients, f4.exponents):
                    q = a3 + a4
                    big_q = (a3 * f3.center + a4 * f4.center) / q
                    e2 = _pair_expansions(f3, f4, a3, a4)
                    alpha = p * q / (p + q)
                    r = hermite_coulomb(
                        len(e1[0]) + len(e2[0]) - 2,
                        len(e1[1]) + len(e2[1]) - 2,
                        len(e1[2]) + len(e2[2]) - 2,
                        alpha, big_p - big_q)
                    # contract bra Hermite indices with shifted ket indices;
                    # ket side carries (-1)^(tau+nu+phi)
                    acc = 0.0
                    for t in range(len(e1[0])):
                        for u in range(len(e1[1])):
                            for v in range(len(e1[2])):
                                coef_b = e1[0][t] * e1[1][u] * e1[2][v]
                                if coef_b == 0.0:
                                    continue
                                for tt in range(len(e2[0])):
                                    for uu in range(len(e2[1])):
                                        for vv in range(len(e2[2])):
                                            sign = -1.0 if (tt + uu + vv) % 2 else 1.0
                                            acc += (coef_b * sign
                                                    * e2[0][tt] * e2[1][uu] * e2[2][vv]
                                                    * r[t + tt, u + uu, v + vv])
                    total += (c1 * c2 * c3 * c4 * acc
                              * 2.0 * np.pi ** 2.5
                              / (p * q * np.sqrt(p + q)))
    return total


def build_integrals(aos: list[BasisFunction], charges, centers):
    """Assemble S, T, V and the full (pq|rs) tensor."""
    n = len(aos)
    s = np.zeros((n, n))
    t = np.zeros((n, n))
    v = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            s[i, j] = s[j, i] = overlap(aos[i], aos[j])
            t[i, j] = t[j, i] = kinetic(aos[i], aos[j])
            v[i, j] = v[j, i] = nuclear_attraction(aos[i], aos[j], charges, centers)

    eri = np.zeros((n, n, n, n))
    for i in range(n):
        for j in range(i + 1):
            ij = i * (i + 1) // 2 + j
            for k in range(n):
                for l in range(k + 1):
                    kl = k * (k + 1) // 2 + l
                    if ij < kl:
                        continue
                    val = electron_repulsion(aos[i], aos[j], aos[k], aos[l])
                    for a, b in ((i, j), (j, i)):
                        for c, d in ((k, l), (l, k)):
                            eri[a, b, c, d] = val
                            eri[c, d, a, b] = val
    return s, t, v, eri


def nuclear_repulsion(charges, centers) -> float:
    e = 0.0
    for i in range(len(charges)):
        for j in range(i):
            e += charges[i] * charges[j] / np.linalg.norm(
                np.asarray(centers[i]) - np.asarray(centers[j]))
    return e
