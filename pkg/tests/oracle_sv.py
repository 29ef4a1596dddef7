"""Brute-force statevector simulator used as an independent oracle in tests.

Gate matrices are built from first principles (explicit matrices and matrix
exponentials), deliberately sharing no code with the tableau simulator or the
native-gate table under test.
"""

import numpy as np
from scipy.linalg import expm

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S = np.diag([1, 1j]).astype(complex)
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}

CX_MAT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
CZ_MAT = np.diag([1, 1, 1, -1]).astype(complex)
SWAP_MAT = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


def u1q_matrix(theta, phi):
    return expm(-1j * (np.cos(phi) * X + np.sin(phi) * Y) * theta / 2)


def rz_matrix(lam):
    return expm(-1j * Z * lam / 2)


def rzz_matrix(theta):
    return expm(-1j * np.kron(Z, Z) * theta / 2)


def gate_matrix(name, params=()):
    fixed = {"h": H, "s": S, "sdg": S.conj().T, "x": X, "y": Y, "z": Z,
             "cx": CX_MAT, "cz": CZ_MAT, "swap": SWAP_MAT}
    if name in fixed:
        return fixed[name]
    if name == "u1q":
        return u1q_matrix(*params)
    if name == "rz":
        return rz_matrix(*params)
    if name == "rzz":
        return rzz_matrix(*params)
    raise ValueError(name)


class StateVector:
    """Dense n-qubit state; tensor axes are qubit indices."""

    def __init__(self, n):
        self.n = n
        self.psi = np.zeros((2,) * n, dtype=complex)
        self.psi[(0,) * n] = 1.0

    def apply(self, mat, qubits):
        k = len(qubits)
        mat = mat.reshape((2,) * (2 * k))
        self.psi = np.tensordot(mat, self.psi, axes=(list(range(k, 2 * k)), list(qubits)))
        # tensordot moves the contracted axes to the front; restore order
        self.psi = np.moveaxis(self.psi, list(range(k)), list(qubits))

    def apply_gate(self, name, qubits, params=()):
        self.apply(gate_matrix(name, params), qubits)

    def prob_one(self, q):
        marg = np.abs(self.psi) ** 2
        return float(marg.sum(axis=tuple(i for i in range(self.n) if i != q))[1])

    def project_z(self, q, bit):
        """Project qubit q onto |bit>, renormalize; returns the branch probability."""
        idx = [slice(None)] * self.n
        idx[q] = 1 - bit
        p_other = float((np.abs(self.psi[tuple(idx)]) ** 2).sum())
        p = 1.0 - p_other
        self.psi[tuple(idx)] = 0.0
        if p <= 1e-12:
            raise ValueError("zero-amplitude branch")
        self.psi /= np.sqrt(p)
        return p

    def measure_z(self, q, rng):
        p1 = self.prob_one(q)
        bit = 1 if rng.random() < p1 else 0
        self.project_z(q, bit)
        return bit

    def pauli_expect(self, op):
        """Expectation of a toricsim PauliOperator."""
        phi = StateVector(self.n)
        phi.psi = self.psi.copy()
        for q in range(self.n):
            ax = op.axis(q)
            if ax != "I":
                phi.apply(PAULI[ax], (q,))
        val = np.vdot(self.psi.reshape(-1), phi.psi.reshape(-1)) * op.phase
        return complex(val)

    def reduced_density(self, subset):
        subset = sorted(subset)
        rest = [q for q in range(self.n) if q not in subset]
        perm = subset + rest
        mat = np.transpose(self.psi, perm).reshape(2 ** len(subset), -1)
        return mat @ mat.conj().T

    def renyi2(self, subset):
        rho = self.reduced_density(subset)
        purity = float(np.real(np.trace(rho @ rho)))
        return -np.log(purity)

    def probabilities(self):
        return (np.abs(self.psi) ** 2).reshape(-1)


def run_circuit_sv(circuit, rng, forced=None):
    """Execute a toricsim Circuit densely. forced, if given, is the list of
    measurement outcomes (bits, in program order) to post-select on."""
    sv = StateVector(circuit.n_qubits)
    clbits = [0] * circuit.n_clbits
    m_idx = 0
    for ins in circuit.instructions:
        if ins.kind == "gate":
            sv.apply_gate(ins.gate, ins.qubits, ins.params)
        elif ins.kind == "measure":
            if forced is not None:
                bit = forced[m_idx]
                m_idx += 1
                sv.project_z(ins.qubits[0], bit)
            else:
                bit = sv.measure_z(ins.qubits[0], rng)
            clbits[ins.clbit] = bit
        elif ins.kind == "reset":
            bit = sv.measure_z(ins.qubits[0], rng) if forced is None else None
            if forced is not None:
                p1 = sv.prob_one(ins.qubits[0])
                bit = 1 if p1 > 0.5 else 0  # deterministic enough for test circuits
                sv.project_z(ins.qubits[0], bit)
            if bit:
                sv.apply_gate("x", ins.qubits)
        elif ins.kind == "cond_gate":
            value = 0
            for b in ins.cond_bits:
                value ^= clbits[b]
            if value == ins.cond_parity:
                sv.apply_gate(ins.gate, ins.qubits, ins.params)
    return sv, clbits
