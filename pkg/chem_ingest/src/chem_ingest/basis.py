"""Contracted Gaussian basis sets.

Only STO-3G for the elements needed here (H, He, Be and the first row
up to F cover the intended use).  Each atomic shell is stored as
primitive exponents plus contraction coefficients for s and, when the
shell is of sp type, p functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# STO-3G primitive data: element -> list of shells.
# Each shell: ("S" | "SP", exponents, s-coefficients[, p-coefficients])
STO3G = {
    "H": [
        ("S", (3.425250914, 0.6239137298, 0.1688554040),
         (0.1543289673, 0.5353281423, 0.4446345422)),
    ],
    "He": [
        ("S", (6.362421394, 1.158922999, 0.3136497915),
         (0.1543289673, 0.5353281423, 0.4446345422)),
    ],
    "Li": [
        ("S", (16.11957475, 2.936200663, 0.7946504870),
         (0.1543289673, 0.5353281423, 0.4446345422)),
        ("SP", (0.6362897469, 0.1478600533, 0.0480886784),
         (-0.09996722919, 0.3995128261, 0.7001154689),
         (0.1559162750, 0.6076837186, 0.3919573931)),
    ],
    "Be": [
        ("S", (30.16787069, 5.495115306, 1.487192653),
         (0.1543289673, 0.5353281423, 0.4446345422)),
        ("SP", (1.314833110, 0.3055389383, 0.09937074560),
         (-0.09996722919, 0.3995128261, 0.7001154689),
         (0.1559162750, 0.6076837186, 0.3919573931)),
    ],
    "B": [
        ("S", (48.79111318, 8.887362172, 2.405267040),
         (0.1543289673, 0.5353281423, 0.4446345422)),
        ("SP", (2.236956142, 0.5198204999, 0.1690617600),
         (-0.09996722919, 0.3995128261, 0.7001154689),
         (0.1559162750, 0.6076837186, 0.3919573931)),
    ],
    "C": [
        ("S", (71.61683735, 13.04509632, 3.530512160),
         (0.1543289673, 0.5353281423, 0.4446345422)),
        ("SP", (2.941249355, 0.6834830964, 0.2222899159),
         (-0.09996722919, 0.3995128261, 0.7001154689),
         (0.1559162750, 0.6076837186, 0.3919573931)),
    ],
    "N": [
        ("S", (99.10616896, 18.05231239, 4.885660238),
         (0.1543289673, 0.5353281423, 0.4446345422)),
        ("SP", (3.780455879, 0.8784966449, 0.2857143744),
         (-0.09996722919, 0.3995128261, 0.7001154689),
         (0.1559162750, 0.6076837186, 0.3919573931)),
    ],
    "O": [
        ("S", (130.7093214, 23.80886605, 6.443608313),
         (0.1543289673, 0.5353281423, 0.4446345422)),
        ("SP", (5.033151319, 1.169596125, 0.3803889600),
         (-0.09996722919, 0.3995128261, 0.7001154689),
         (0.1559162750, 0.6076837186, 0.3919573931)),
    ],
    "F": [
        ("S", (166.6791340, 30.36081233, 8.216820672),
         (0.1543289673, 0.5353281423, 0.4446345422)),
        ("SP", (6.464803249, 1.502281245, 0.4885884864),
         (-0.09996722919, 0.3995128261, 0.7001154689),
         (0.1559162750, 0.6076837186, 0.3919573931)),
    ],
}

ATOMIC_NUMBER = {
    "H": 1, "He": 2, "Li": 3, "Be": 4, "B": 5, "C": 6, "N": 7, "O": 8, "F": 9,
}

BASIS_SETS = {"sto-3g": STO3G}


def _double_factorial(k: int) -> int:
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


def primitive_norm(alpha: float, lmn: tuple[int, int, int]) -> float:
    l, m, n = lmn
    num = (2.0 * alpha / np.pi) ** 0.75 * (4.0 * alpha) ** ((l + m + n) / 2.0)
    den = np.sqrt(float(
        _double_factorial(2 * l - 1)
        * _double_factorial(2 * m - 1)
        * _double_factorial(2 * n - 1)))
    return num / den


@dataclass
class BasisFunction:
    """One contracted Cartesian Gaussian: sum_i c_i N_i x^l y^m z^n exp(-a_i r^2)."""

    center: np.ndarray
    lmn: tuple[int, int, int]
    exponents: np.ndarray
    coefficients: np.ndarray  # includes primitive norms; contracted-normalized

    @property
    def angular(self) -> int:
        return sum(self.lmn)


def _contracted(center, lmn, exps, coeffs) -> BasisFunction:
    exps = np.asarray(exps, dtype=float)
    coeffs = np.asarray(coeffs, dtype=float).copy()
    coeffs *= np.array([primitive_norm(a, lmn) for a in exps])
    # renormalize the contraction so <phi|phi> = 1
    l, m, n = lmn
    L = l + m + n
    pref = (np.pi ** 1.5 * _double_factorial(2 * l - 1)
            * _double_factorial(2 * m - 1) * _double_factorial(2 * n - 1))
    self_overlap = 0.0
    for ci, ai in zip(coeffs, exps):
        for cj, aj in zip(coeffs, exps):
            self_overlap += ci * cj * pref / (2.0 ** L * (ai + aj) ** (L + 1.5))
    coeffs /= np.sqrt(self_overlap)
    return BasisFunction(np.asarray(center, dtype=float), lmn, exps, coeffs)


def build_basis(symbols, coords_bohr, basis_name: str) -> list[BasisFunction]:
    """Expand a geometry into the ordered AO list.

    Order: atoms in input order; per atom, shells in tabulated order; per
    sp shell, the s function then p_x, p_y, p_z.
    """
    key = basis_name.lower()
    if key not in BASIS_SETS:
        raise ValueError(f"unknown basis set {basis_name!r} "
                         f"(available: {sorted(BASIS_SETS)})")
    table = BASIS_SETS[key]
    aos: list[BasisFunction] = []
    for sym, xyz in zip(symbols, coords_bohr):
        if sym not in table:
            raise ValueError(f"element {sym!r} not tabulated in {basis_name}")
        for shell in table[sym]:
            kind, exps = shell[0], shell[1]
            aos.append(_contracted(xyz, (0, 0, 0), exps, shell[2]))
            if kind == "SP":
                for lmn in ((1, 0, 0), (0, 1, 0), (0, 0, 1)):
                    aos.append(_contracted(xyz, lmn, exps, shell[3]))
    return aos
