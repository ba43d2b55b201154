"""Dense state-vector simulator for up to 16 qubits.

Implements exactly the gate set a QCNN needs: RX/RY/RZ rotations, CNOT,
value-controlled rotations, Z-expectation readout, and a density-matrix
partial-trace oracle used for verification.

Conventions:
  - Qubit 0 is the most significant bit of the basis index, so the basis
    state |b0 b1 ... b_{n-1}> sits at index sum(b_k * 2**(n-1-k)).
  - Rotations use the half-angle form R_A(theta) = exp(-i*theta*A/2).

States are 1-D complex128 arrays of length 2**num_qubits.  Every gate also
accepts arrays of shape (..., 2**num_qubits) and applies the same gate to
each state along the last axis; rotation angles may then be scalars or
arrays broadcasting against the leading axes.  Gates mutate the array in
place and return it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_QUBITS = 16

ROTATION_AXES = ("x", "y", "z")


def zero_state(num_qubits: int) -> np.ndarray:
    """All-qubits-|0> state."""
    if not 1 <= num_qubits <= MAX_QUBITS:
        raise ValueError(f"num_qubits must be in [1, {MAX_QUBITS}], got {num_qubits}")
    state = np.zeros(1 << num_qubits, dtype=np.complex128)
    state[0] = 1.0
    return state


def num_qubits_of(state: np.ndarray) -> int:
    dim = state.shape[-1]
    n = int(dim).bit_length() - 1
    if dim != 1 << n or not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"state length {dim} is not a supported power of two")
    return n


def _check_qubit(num_qubits: int, qubit: int) -> None:
    if not 0 <= qubit < num_qubits:
        raise ValueError(f"qubit {qubit} out of range for {num_qubits} qubits")


@lru_cache(maxsize=None)
def _pair_indices(num_qubits: int, qubit: int) -> tuple[np.ndarray, np.ndarray]:
    """Index pairs (i0, i1) differing only in the qubit's bit (0 vs 1)."""
    pos = num_qubits - 1 - qubit
    idx = np.arange(1 << num_qubits)
    i0 = idx[(idx >> pos) & 1 == 0]
    return i0, i0 + (1 << pos)


@lru_cache(maxsize=None)
def _controlled_pair_indices(
    num_qubits: int, control: int, target: int, control_value: int
) -> tuple[np.ndarray, np.ndarray]:
    """Target-bit pairs restricted to basis states where control == control_value."""
    cpos = num_qubits - 1 - control
    tpos = num_qubits - 1 - target
    idx = np.arange(1 << num_qubits)
    sel = ((idx >> cpos) & 1 == control_value) & ((idx >> tpos) & 1 == 0)
    i0 = idx[sel]
    return i0, i0 + (1 << tpos)


@lru_cache(maxsize=None)
def _z_signs(num_qubits: int, qubit: int) -> np.ndarray:
    pos = num_qubits - 1 - qubit
    idx = np.arange(1 << num_qubits)
    return np.where((idx >> pos) & 1 == 0, 1.0, -1.0)


def _rotation_elements(axis: str, theta):
    """2x2 matrix elements (m00, m01, m10, m11) of exp(-i*theta*A/2)."""
    theta = np.asarray(theta, dtype=np.float64)
    half = 0.5 * theta
    c = np.cos(half)
    s = np.sin(half)
    if axis == "x":
        return c, -1j * s, -1j * s, c
    if axis == "y":
        return c, -s, s, c
    if axis == "z":
        zero = np.zeros_like(c)
        return np.exp(-1j * half), zero, zero, np.exp(1j * half)
    raise ValueError(f"unknown rotation axis {axis!r}")


def _apply_on_pairs(state: np.ndarray, i0: np.ndarray, i1: np.ndarray, elements) -> np.ndarray:
    m00, m01, m10, m11 = (np.asarray(m)[..., None] if np.ndim(m) else m for m in elements)
    a = state[..., i0]
    b = state[..., i1]
    state[..., i0] = m00 * a + m01 * b
    state[..., i1] = m10 * a + m11 * b
    return state


def apply_rotation(state: np.ndarray, qubit: int, axis: str, theta) -> np.ndarray:
    n = num_qubits_of(state)
    _check_qubit(n, qubit)
    i0, i1 = _pair_indices(n, qubit)
    return _apply_on_pairs(state, i0, i1, _rotation_elements(axis, theta))


def apply_rx(state: np.ndarray, qubit: int, theta) -> np.ndarray:
    return apply_rotation(state, qubit, "x", theta)


def apply_ry(state: np.ndarray, qubit: int, theta) -> np.ndarray:
    return apply_rotation(state, qubit, "y", theta)


def apply_rz(state: np.ndarray, qubit: int, theta) -> np.ndarray:
    return apply_rotation(state, qubit, "z", theta)


def apply_cnot(state: np.ndarray, control: int, target: int) -> np.ndarray:
    n = num_qubits_of(state)
    _check_qubit(n, control)
    _check_qubit(n, target)
    if control == target:
        raise ValueError("control and target must differ")
    i0, i1 = _controlled_pair_indices(n, control, target, 1)
    a = state[..., i0]
    state[..., i0] = state[..., i1]
    state[..., i1] = a
    return state


def apply_controlled_rot(
    state: np.ndarray,
    control: int,
    target: int,
    axis: str,
    theta,
    control_value: int,
) -> np.ndarray:
    """Rotate the target qubit only where the control qubit equals control_value."""
    n = num_qubits_of(state)
    _check_qubit(n, control)
    _check_qubit(n, target)
    if control == target:
        raise ValueError("control and target must differ")
    if control_value not in (0, 1):
        raise ValueError(f"control_value must be 0 or 1, got {control_value}")
    i0, i1 = _controlled_pair_indices(n, control, target, control_value)
    return _apply_on_pairs(state, i0, i1, _rotation_elements(axis, theta))


def expectation_z(state: np.ndarray, qubit: int):
    """<Z> on one qubit: sum of |amplitude|^2 weighted +1 (bit 0) / -1 (bit 1).

    Returns a float for a single state, an array for batched states.
    """
    n = num_qubits_of(state)
    _check_qubit(n, qubit)
    probs = state.real**2 + state.imag**2
    value = probs @ _z_signs(n, qubit)
    return float(value) if np.ndim(value) == 0 else value


def reduced_expectation_z(state: np.ndarray, qubit: int, traced_qubits) -> float:
    """<Z> on `qubit` computed through an explicit reduced density matrix.

    Traces out `traced_qubits` by building the reduced density matrix of the
    remaining register.  Exponentially sized in the kept register; intended
    as a verification oracle, not a production path.
    """
    if state.ndim != 1:
        raise ValueError("reduced_expectation_z expects a single (1-D) state")
    n = num_qubits_of(state)
    traced = sorted(set(int(q) for q in traced_qubits))
    for q in traced:
        _check_qubit(n, q)
    _check_qubit(n, qubit)
    if qubit in traced:
        raise ValueError(f"measured qubit {qubit} cannot be traced out")
    kept = [q for q in range(n) if q not in traced]
    psi = state.reshape([2] * n).transpose(kept + traced)
    mat = psi.reshape(1 << len(kept), -1)
    rho = mat @ mat.conj().T
    diag = rho.diagonal().real
    pos = len(kept) - 1 - kept.index(qubit)
    signs = np.where((np.arange(diag.size) >> pos) & 1 == 0, 1.0, -1.0)
    return float(diag @ signs)


@dataclass(frozen=True)
class GateSpec:
    """One gate of the QCNN gate set, in data form.

    kind is one of "rx", "ry", "rz", "cnot", "controlled_rot".  Rotations
    need `angle`; "controlled_rot" additionally needs `axis` and
    `control_value`.  `qubits` is (target,) for single-qubit gates and
    (control, target) for two-qubit gates.
    """

    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None
    axis: str | None = None
    control_value: int | None = None


def apply_gate(state: np.ndarray, gate: GateSpec) -> np.ndarray:
    if gate.kind in ("rx", "ry", "rz"):
        (qubit,) = gate.qubits
        return apply_rotation(state, qubit, gate.kind[-1], gate.angle)
    if gate.kind == "cnot":
        control, target = gate.qubits
        return apply_cnot(state, control, target)
    if gate.kind == "controlled_rot":
        control, target = gate.qubits
        return apply_controlled_rot(
            state, control, target, gate.axis, gate.angle, gate.control_value
        )
    raise ValueError(f"unknown gate kind {gate.kind!r}")
