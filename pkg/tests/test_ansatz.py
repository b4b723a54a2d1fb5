import itertools

import numpy as np
import pytest
from scipy.linalg import expm

from mitivqe.ansatz import (
    AnsatzSpec,
    append_pauli_exponential,
    build_efficient_su2,
    build_uccsd,
    uccsd_excitations,
    uccsd_generators,
)
from mitivqe.circuits import Circuit, ParamRef, statevector
from mitivqe.errors import DimensionError
from mitivqe.fermion import (
    ParticleSector,
    hf_occupations,
    hf_tapered_label,
    jordan_wigner,
    map_and_taper,
    read_fermionic_file,
)
from mitivqe.pauli import PAULI_MATRICES, PauliString, expectation_dense, to_dense

I2 = np.eye(2, dtype=complex)
X2 = PAULI_MATRICES["X"]
Y2 = PAULI_MATRICES["Y"]
Z2 = PAULI_MATRICES["Z"]


def kron_chain(factors):
    out = np.array([[1.0 + 0j]])
    for f in factors:
        out = np.kron(out, f)
    return out


def oracle_gate_matrix(gate, angle, n):
    if gate.kind == "CNOT":
        c, t = gate.qubits
        p0 = np.diag([1.0 + 0j, 0.0])
        p1 = np.diag([0.0, 1.0 + 0j])
        branch0 = [p0 if q == c else I2 for q in range(n)]
        branch1 = [p1 if q == c else (X2 if q == t else I2) for q in range(n)]
        return kron_chain(branch0) + kron_chain(branch1)
    if gate.kind == "RY":
        u = np.cos(angle / 2) * I2 - 1j * np.sin(angle / 2) * Y2
    elif gate.kind == "RZ":
        u = np.cos(angle / 2) * I2 - 1j * np.sin(angle / 2) * Z2
    elif gate.kind == "X":
        u = X2
    else:
        raise AssertionError(gate.kind)
    return kron_chain([u if q == gate.qubits[0] else I2 for q in range(n)])


def circuit_unitary(circuit, values=None):
    """Full dense unitary, composed gate by gate from the oracle matrices."""
    vals = np.asarray(values if values is not None else [], dtype=float)
    u = np.eye(1 << circuit.n_qubits, dtype=complex)
    for g in circuit.gates:
        u = oracle_gate_matrix(g, circuit.resolve(g, vals), circuit.n_qubits) @ u
    return u


def pauli_dense(label):
    return kron_chain([PAULI_MATRICES[ch] for ch in label])


def excitation_oracle(n, sector):
    """All level-1 and level-2 sector determinants relative to the HF reference."""
    m = n // 2
    hf = set(hf_occupations(n, sector))
    singles, doubles = set(), set()
    for occ_a in itertools.combinations(range(m), sector.n_alpha):
        for occ_b in itertools.combinations(range(m, n), sector.n_beta):
            det = set(occ_a) | set(occ_b)
            gone = tuple(sorted(hf - det))
            new = tuple(sorted(det - hf))
            if len(gone) == 1:
                singles.add((gone, new))
            elif len(gone) == 2:
                doubles.add((gone, new))
    return singles, doubles


@pytest.fixture(scope="module")
def beh2():
    f, sector = read_fermionic_file("fixtures/beh2_sto3g_2e3o.int")
    return f, sector, map_and_taper(f, sector)


class TestEfficientSu2:
    def test_four_qubit_single_rep_layout(self):
        c = build_efficient_su2(4, 1)
        assert c.n_parameters == 16
        assert len(c.gates) == 19
        assert sum(g.kind == "CNOT" for g in c.gates) == 3

    def test_parameter_count_formula(self):
        for n in (2, 3, 5):
            for reps in (1, 2, 3):
                c = build_efficient_su2(n, reps)
                assert c.n_parameters == 2 * n * (reps + 1)
                assert sum(g.kind == "CNOT" for g in c.gates) == (n - 1) * reps
                assert len(c.gates) == 2 * n * (reps + 1) + (n - 1) * reps

    def test_zero_parameters_give_all_zero_state(self):
        c = build_efficient_su2(2, 1)
        state = statevector(c, np.zeros(c.n_parameters))
        expect = np.zeros(4, dtype=complex)
        expect[0] = 1.0
        assert np.allclose(state, expect, atol=1e-12)

    def test_layer_major_qubit_minor_order(self):
        c = build_efficient_su2(3, 2)
        rotations = [g for g in c.gates if g.kind in ("RY", "RZ")]
        expected_kinds = (["RY"] * 3 + ["RZ"] * 3) * 3
        assert [g.kind for g in rotations] == expected_kinds
        assert [g.param.index for g in rotations] == list(range(18))
        assert [g.qubits[0] for g in rotations] == [0, 1, 2] * 6
        # entangling chain between rotation layers, ascending pairs
        cnots = [g.qubits for g in c.gates if g.kind == "CNOT"]
        assert cnots == [(0, 1), (1, 2)] * 2

    def test_deterministic(self):
        a = build_efficient_su2(4, 2)
        b = build_efficient_su2(4, 2)
        assert a.gates == b.gates
        assert a.parameters == b.parameters

    def test_matches_oracle_unitary(self, rng):
        c = build_efficient_su2(3, 1)
        theta = rng.uniform(-np.pi, np.pi, size=c.n_parameters)
        want = circuit_unitary(c, theta)[:, 0]
        assert np.allclose(statevector(c, theta), want, atol=1e-10)

    def test_argument_validation(self):
        with pytest.raises(DimensionError):
            build_efficient_su2(1, 1)
        with pytest.raises(ValueError):
            build_efficient_su2(4, 0)


class TestPauliExponential:
    def test_single_qubit_axes(self):
        for label, mat in (("X", X2), ("Y", Y2), ("Z", Z2)):
            c = Circuit(1, [], ["t"])
            append_pauli_exponential(c, PauliString.from_label(label), 0.7, 0)
            theta = np.array([0.9])
            want = expm(1j * theta[0] * 0.7 * mat)
            assert np.allclose(circuit_unitary(c, theta), want, atol=1e-12)

    def test_random_strings_match_matrix_exponential(self, rng):
        for _ in range(25):
            n = int(rng.integers(2, 5))
            label = "".join(rng.choice(list("IXYZ"), size=n))
            if set(label) == {"I"}:
                continue
            coeff = float(rng.uniform(-2, 2))
            c = Circuit(n, [], ["t"])
            append_pauli_exponential(c, PauliString.from_label(label), coeff, 0)
            theta = float(rng.uniform(-np.pi, np.pi))
            want = expm(1j * theta * coeff * pauli_dense(label))
            assert np.allclose(circuit_unitary(c, [theta]), want, atol=1e-10)

    def test_identity_string_appends_nothing(self):
        c = Circuit(2, [], ["t"])
        append_pauli_exponential(c, PauliString.from_label("II"), 1.0, 0)
        assert c.gates == []

    def test_parameter_scale_is_negative_twice_coefficient(self):
        c = Circuit(2, [], ["t"])
        append_pauli_exponential(c, PauliString.from_label("ZZ"), 0.25, 0)
        rz = [g for g in c.gates if isinstance(g.param, ParamRef)]
        assert len(rz) == 1
        assert rz[0].param == ParamRef(0, -0.5)


class TestUccsdExcitations:
    def test_minimal_sector_listing(self):
        got = [(e.occupied, e.virtual) for e in uccsd_excitations(6, ParticleSector(1, 1))]
        assert got == [
            ((0,), (1,)), ((0,), (2,)), ((3,), (4,)), ((3,), (5,)),
            ((0, 3), (1, 4)), ((0, 3), (1, 5)), ((0, 3), (2, 4)), ((0, 3), (2, 5)),
        ]

    def test_enumeration_covers_sector_determinants(self):
        for n, sector in ((6, ParticleSector(1, 1)), (8, ParticleSector(2, 2)),
                          (8, ParticleSector(2, 1)), (6, ParticleSector(2, 2))):
            singles, doubles = excitation_oracle(n, sector)
            got = uccsd_excitations(n, sector)
            got_singles = {(e.occupied, e.virtual) for e in got if e.rank == 1}
            got_doubles = {(e.occupied, e.virtual) for e in got if e.rank == 2}
            assert got_singles == singles
            assert got_doubles == doubles
            assert len(got) == len(singles) + len(doubles)

    def test_singles_come_first_and_blocks_are_sorted(self):
        got = uccsd_excitations(8, ParticleSector(2, 2))
        ranks = [e.rank for e in got]
        assert ranks == sorted(ranks)
        for rank in (1, 2):
            block = [(e.occupied, e.virtual) for e in got if e.rank == rank]
            assert block == sorted(block)

    def test_infeasible_sector_rejected(self):
        with pytest.raises(DimensionError):
            uccsd_excitations(6, ParticleSector(4, 0))


class TestUccsdCircuit:
    def test_parameter_count_and_register_sizes(self):
        sector = ParticleSector(1, 1)
        tapered = build_uccsd(6, sector, "parity_tapered")
        assert tapered.n_qubits == 4
        assert tapered.n_parameters == 8
        jw = build_uccsd(6, sector, "jordan_wigner")
        assert jw.n_qubits == 6
        assert jw.n_parameters == 8

    def test_zero_parameters_prepare_reference_jw(self):
        sector = ParticleSector(1, 1)
        c = build_uccsd(6, sector, "jordan_wigner")
        state = statevector(c, np.zeros(8))
        index = int("100100", 2)
        assert abs(state[index] - 1.0) < 1e-12
        assert abs(np.vdot(state, state) - 1.0) < 1e-12

    def test_zero_parameters_prepare_reference_tapered(self):
        sector = ParticleSector(1, 1)
        c = build_uccsd(6, sector, "parity_tapered")
        state = statevector(c, np.zeros(8))
        index = int(hf_tapered_label(6, sector), 2)
        assert abs(state[index] - 1.0) < 1e-12

    def test_generator_terms_commute_within_excitation(self):
        sector = ParticleSector(1, 1)
        for mapping in ("jordan_wigner", "parity_tapered"):
            for g in uccsd_generators(6, sector, mapping):
                strings = [s for _, s in g.terms]
                for a, b in itertools.combinations(strings, 2):
                    assert a.commutes_with(b)

    def test_exponential_blocks_match_matrix_exponential(self, rng):
        sector = ParticleSector(1, 1)
        for mapping, n in (("parity_tapered", 4), ("jordan_wigner", 6)):
            gens = uccsd_generators(6, sector, mapping)
            for g in gens[:3] + gens[-2:]:
                c = Circuit(n, [], ["t"])
                for coeff, string in g.terms:
                    append_pauli_exponential(c, string, coeff.imag, 0)
                theta = float(rng.uniform(-1.5, 1.5))
                want = expm(theta * to_dense(g))
                assert np.allclose(circuit_unitary(c, [theta]), want, atol=1e-9)

    def test_particle_number_conserved_jw(self, rng):
        sector = ParticleSector(1, 1)
        c = build_uccsd(6, sector, "jordan_wigner")
        alpha_mask = int("111000", 2)
        beta_mask = int("000111", 2)
        for _ in range(3):
            theta = rng.uniform(-1.0, 1.0, size=8)
            state = statevector(c, theta)
            leaked = 0.0
            for idx in range(64):
                good = (bin(idx & alpha_mask).count("1") == 1
                        and bin(idx & beta_mask).count("1") == 1)
                if not good:
                    leaked += abs(state[idx]) ** 2
            assert leaked < 1e-10

    def test_reference_energy_on_fixture(self, beh2):
        f, sector, h = beh2
        c = build_uccsd(6, sector, "parity_tapered")
        state = statevector(c, np.zeros(8))
        energy = expectation_dense(h, state).real
        reference = np.zeros(16, dtype=complex)
        reference[int(hf_tapered_label(6, sector), 2)] = 1.0
        assert abs(energy - expectation_dense(h, reference).real) < 1e-10
        assert abs(energy - (-15.56033)) < 1e-4

    def test_tapered_and_jw_energies_agree(self, beh2, rng):
        f, sector, h = beh2
        h_jw = jordan_wigner(f)
        ct = build_uccsd(6, sector, "parity_tapered")
        cj = build_uccsd(6, sector, "jordan_wigner")
        for _ in range(3):
            theta = rng.uniform(-0.8, 0.8, size=8)
            et = expectation_dense(h, statevector(ct, theta)).real
            ej = expectation_dense(h_jw, statevector(cj, theta)).real
            assert abs(et - ej) < 1e-10

    def test_deterministic(self):
        sector = ParticleSector(1, 1)
        a = build_uccsd(6, sector, "parity_tapered")
        b = build_uccsd(6, sector, "parity_tapered")
        assert a.gates == b.gates

    def test_unknown_mapping_rejected(self):
        with pytest.raises(ValueError):
            build_uccsd(6, ParticleSector(1, 1), "bravyi_kitaev")


class TestAnsatzSpec:
    def test_dispatch(self):
        spec = AnsatzSpec("efficient_su2", n_qubits=4, reps=1)
        assert spec.build().n_parameters == 16
        spec = AnsatzSpec("uccsd", n_spin_orbitals=6, sector=ParticleSector(1, 1))
        assert spec.build().n_qubits == 4

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            AnsatzSpec("hardware_native").build()

    def test_uccsd_requires_sector(self):
        with pytest.raises(ValueError):
            AnsatzSpec("uccsd", n_spin_orbitals=6).build()
