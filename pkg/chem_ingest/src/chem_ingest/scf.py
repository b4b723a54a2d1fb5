"""Restricted Hartree-Fock with DIIS acceleration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ScfError(RuntimeError):
    """Self-consistent field iteration failed to converge."""


@dataclass
class ScfResult:
    energy: float            # total energy including nuclear repulsion
    mo_coefficients: np.ndarray   # columns are MOs in the AO basis
    mo_energies: np.ndarray
    n_occupied: int
    iterations: int


def _canonical_signs(c: np.ndarray) -> np.ndarray:
    """Flip each MO so its largest-magnitude AO coefficient is positive."""
    out = c.copy()
    for k in range(out.shape[1]):
        lead = np.argmax(np.abs(out[:, k]))
        if out[lead, k] < 0:
            out[:, k] = -out[:, k]
    return out


def restricted_hartree_fock(s, hcore, eri, n_electrons, e_nuclear,
                            max_iterations=200, energy_tol=1e-12,
                            gradient_tol=1e-10, diis_depth=8) -> ScfResult:
    if n_electrons % 2:
        raise ScfError(f"restricted SCF needs an even electron count, got {n_electrons}")
    n_occ = n_electrons // 2

    s_vals, s_vecs = np.linalg.eigh(s)
    if s_vals.min() < 1e-10:
        raise ScfError(f"overlap matrix nearly singular (min eigenvalue {s_vals.min():.3e})")
    x = s_vecs @ np.diag(s_vals ** -0.5) @ s_vecs.T

    def diagonalize(fock):
        f_ortho = x.T @ fock @ x
        eps, c_ortho = np.linalg.eigh(f_ortho)
        return eps, _canonical_signs(x @ c_ortho)

    eps, c = diagonalize(hcore)
    density = 2.0 * c[:, :n_occ] @ c[:, :n_occ].T
    energy = 0.0
    fock_history: list[np.ndarray] = []
    error_history: list[np.ndarray] = []

    for iteration in range(1, max_iterations + 1):
        coulomb = np.einsum("pqrs,rs->pq", eri, density)
        exchange = np.einsum("prqs,rs->pq", eri, density)
        fock = hcore + coulomb - 0.5 * exchange

        error = x.T @ (fock @ density @ s - s @ density @ fock) @ x
        fock_history.append(fock)
        error_history.append(error)
        if len(fock_history) > diis_depth:
            fock_history.pop(0)
            error_history.pop(0)

        if len(fock_history) >= 2:
            m = len(fock_history)
            b = -np.ones((m + 1, m + 1))
            b[m, m] = 0.0
            for i in range(m):
                for j in range(m):
                    b[i, j] = np.sum(error_history[i] * error_history[j])
            rhs = np.zeros(m + 1)
            rhs[m] = -1.0
            try:
                weights = np.linalg.solve(b, rhs)[:m]
                fock = sum(w * f for w, f in zip(weights, fock_history))
            except np.linalg.LinAlgError:
                pass  # fall back to the plain Fock matrix this cycle

        new_energy = 0.5 * np.sum(density * (hcore + fock_history[-1])) + e_nuclear
        eps, c = diagonalize(fock)
        density = 2.0 * c[:, :n_occ] @ c[:, :n_occ].T

        gradient_norm = np.abs(error_history[-1]).max()
        if abs(new_energy - energy) < energy_tol and gradient_norm < gradient_tol:
            return ScfResult(float(new_energy), c, eps, n_occ, iteration)
        energy = new_energy

    raise ScfError(
        f"SCF did not converge in {max_iterations} iterations "
        f"(last energy change {abs(new_energy - energy):.3e}, "
        f"gradient {gradient_norm:.3e})")
