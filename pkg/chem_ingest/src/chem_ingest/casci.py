"""Active-space reduction and exact diagonalization.

Starting from converged RHF orbitals, the lowest (n_elec - n_active)/2
spatial orbitals are frozen into the core and the next n_orbitals form
the active space.  Core contributions fold into an effective one-body
operator and a scalar; the remainder is exported as spin-orbital
tensors matching

    H = sum h_PQ a+_P a_Q + sum g_PQRS a+_P a+_Q a_R a_S + core

with spin orbitals in block order (alpha block then beta block) and the
two-body coefficient multiplying the operator string exactly as
written.  FCI energies are computed by enumerating determinants of the
requested spin sector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class ActiveSpaceResult:
    n_spin_orbitals: int
    one_body: np.ndarray      # spin-orbital h_PQ
    two_body: np.ndarray      # spin-orbital g_PQRS
    core_energy: float
    n_alpha: int
    n_beta: int


def mo_transform(hcore, eri, c):
    """AO -> MO transform of the one-body matrix and (pq|rs) tensor."""
    h_mo = c.T @ hcore @ c
    eri_mo = np.einsum("pqrs,pi,qj,rk,sl->ijkl", eri, c, c, c, c, optimize=True)
    return h_mo, eri_mo


def active_space_tensors(hcore, eri, c, e_nuclear, n_electrons,
                         n_active_electrons, n_active_orbitals) -> ActiveSpaceResult:
    if (n_electrons - n_active_electrons) % 2:
        raise ValueError("inactive electron count must be even (closed-shell core)")
    n_core = (n_electrons - n_active_electrons) // 2
    n_mo = c.shape[1]
    if n_core + n_active_orbitals > n_mo:
        raise ValueError(
            f"active space ({n_active_electrons}e,{n_active_orbitals}o) plus "
            f"{n_core} core orbitals exceeds {n_mo} molecular orbitals")

    h_mo, eri_mo = mo_transform(hcore, eri, c)
    core = list(range(n_core))
    active = list(range(n_core, n_core + n_active_orbitals))

    e_core = e_nuclear
    for i in core:
        e_core += 2.0 * h_mo[i, i]
        for j in core:
            e_core += 2.0 * eri_mo[i, i, j, j] - eri_mo[i, j, j, i]

    m = n_active_orbitals
    h_eff = np.zeros((m, m))
    for a, p in enumerate(active):
        for b, q in enumerate(active):
            val = h_mo[p, q]
            for i in core:
                val += 2.0 * eri_mo[p, q, i, i] - eri_mo[p, i, i, q]
            h_eff[a, b] = val

    g_act = eri_mo[np.ix_(active, active, active, active)]

    n_so = 2 * m
    spin = np.arange(n_so) // m
    orb = np.arange(n_so) % m
    h_so = np.zeros((n_so, n_so))
    same_spin = spin[:, None] == spin[None, :]
    h_so[same_spin] = h_eff[orb[:, None], orb[None, :]][same_spin]

    # H two-body term: sum_PQRS g a+P a+Q aR aS with
    # g_PQRS = 1/2 (ps|qr) delta(sP,sS) delta(sQ,sR)  (spatial chemist tensor)
    g_so = np.zeros((n_so, n_so, n_so, n_so))
    sp, sq, sr, ss = np.ix_(spin, spin, spin, spin)
    op, oq, orr, os_ = np.ix_(orb, orb, orb, orb)
    mask = (sp == ss) & (sq == sr)
    g_so[mask] = (0.5 * g_act[op, os_, oq, orr])[mask]

    n_act_alpha = n_active_electrons // 2 + n_active_electrons % 2
    n_act_beta = n_active_electrons // 2
    return ActiveSpaceResult(n_so, h_so, g_so, float(e_core),
                             n_act_alpha, n_act_beta)


# ---------------------------------------------------------------------------
# Determinant-basis exact diagonalization
# ---------------------------------------------------------------------------

def _apply_ladder(state: int, j: int, create: bool):
    bit = 1 << j
    occupied = bool(state & bit)
    if create == occupied:
        return None, 0
    sign = -1 if bin(state & (bit - 1)).count("1") % 2 else 1
    return state ^ bit, sign


def sector_basis(n_so: int, n_alpha: int, n_beta: int) -> list[int]:
    m = n_so // 2
    alpha_mask = (1 << m) - 1
    out = []
    for state in range(1 << n_so):
        if (bin(state & alpha_mask).count("1") == n_alpha
                and bin(state >> m).count("1") == n_beta):
            out.append(state)
    return out


def fci_ground_energy(asr: ActiveSpaceResult) -> float:
    """Lowest eigenvalue of the active-space operator in its spin sector."""
    basis = sector_basis(asr.n_spin_orbitals, asr.n_alpha, asr.n_beta)
    index = {state: k for k, state in enumerate(basis)}
    dim = len(basis)
    mat = np.zeros((dim, dim))
    one_idx = np.argwhere(asr.one_body != 0.0)
    two_idx = np.argwhere(asr.two_body != 0.0)
    for col, state in enumerate(basis):
        for p, q in one_idx:
            s1, sg1 = _apply_ladder(state, q, create=False)
            if s1 is None:
                continue
            s2, sg2 = _apply_ladder(s1, p, create=True)
            if s2 is None:
                continue
            mat[index[s2], col] += asr.one_body[p, q] * sg1 * sg2
        for p, q, r, s in two_idx:
            st, sg = _apply_ladder(state, s, create=False)
            if st is None:
                continue
            st, sg2 = _apply_ladder(st, r, create=False)
            if st is None:
                continue
            sg *= sg2
            st, sg2 = _apply_ladder(st, q, create=True)
            if st is None:
                continue
            sg *= sg2
            st, sg2 = _apply_ladder(st, p, create=True)
            if st is None:
                continue
            sg *= sg2
            mat[index[st], col] += asr.two_body[p, q, r, s] * sg
    if dim == 0:
        raise ValueError("empty determinant basis for the requested sector")
    return float(np.linalg.eigvalsh(mat)[0]) + asr.core_energy
