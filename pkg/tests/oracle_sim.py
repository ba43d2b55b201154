"""Independent dense-matrix reference simulator for the test suite.

Builds full 2**n x 2**n unitaries with Kronecker products and applies them
by matrix multiplication.  Deliberately naive: no bit tricks shared with
the production code, so agreement is meaningful.
"""

import numpy as np

I2 = np.eye(2, dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
P0 = np.array([[1, 0], [0, 0]], dtype=np.complex128)
P1 = np.array([[0, 0], [0, 1]], dtype=np.complex128)

_PAULI = {"x": X, "y": Y, "z": Z}


def rotation_matrix(axis: str, theta: float) -> np.ndarray:
    pauli = _PAULI[axis]
    return np.cos(theta / 2) * I2 - 1j * np.sin(theta / 2) * pauli


def kron_chain(factors) -> np.ndarray:
    out = np.array([[1.0]], dtype=np.complex128)
    for f in factors:
        out = np.kron(out, f)
    return out


def single_qubit_unitary(num_qubits: int, qubit: int, u: np.ndarray) -> np.ndarray:
    factors = [I2] * num_qubits
    factors[qubit] = u
    return kron_chain(factors)


def cnot_unitary(num_qubits: int, control: int, target: int) -> np.ndarray:
    idle = [I2] * num_qubits
    branch0 = list(idle)
    branch0[control] = P0
    branch1 = list(idle)
    branch1[control] = P1
    branch1[target] = X
    return kron_chain(branch0) + kron_chain(branch1)


def controlled_rot_unitary(
    num_qubits: int, control: int, target: int, axis: str, theta: float, control_value: int
) -> np.ndarray:
    fire = [I2] * num_qubits
    fire[control] = P1 if control_value == 1 else P0
    fire[target] = rotation_matrix(axis, theta)
    idle = [I2] * num_qubits
    idle[control] = P0 if control_value == 1 else P1
    return kron_chain(fire) + kron_chain(idle)


def z_expectation(num_qubits: int, qubit: int, state: np.ndarray) -> float:
    op = single_qubit_unitary(num_qubits, qubit, Z)
    return float(np.real(np.conj(state) @ (op @ state)))
