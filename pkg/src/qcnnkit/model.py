"""QCNN circuit construction and forward evaluation.

A model with L layers runs on 2**L qubits.  Each layer applies a
convolution (two-qubit blocks of RY rotations plus a CNOT, arranged in two
brick-wall sublayers) followed by a pooling step (value-controlled RZ/RX on
each adjacent pair) that drops the control qubit of every pair from the
active register.  Dropped qubits are never touched again, which for a
Z-readout on a surviving qubit is exactly equivalent to tracing them out.

With `uploading` enabled, a fresh block of features is rotated into the
surviving qubits before each convolution after the first, so an L-layer
model consumes 2*(2**L - 1) features instead of 2**L.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .simulator import (
    apply_cnot,
    apply_controlled_rot,
    apply_ry,
    expectation_z,
    zero_state,
)

MAX_LAYERS = 4  # 2**4 = 16 qubits, the simulator cap


def parameter_count(num_layers: int) -> int:
    """Trainable angle count: sum over layer widths w of 2(w-1) conv + w pool."""
    return 6 * (2**num_layers - 1) - 2 * num_layers


def feature_count(num_layers: int, uploading: bool) -> int:
    return 2 * (2**num_layers - 1) if uploading else 2**num_layers


@dataclass(frozen=True)
class Architecture:
    """Static layout of one QCNN model: qubit, parameter and feature bookkeeping."""

    num_layers: int
    uploading: bool
    total_qubits: int
    param_count: int
    feature_count: int
    feature_blocks: tuple[int, ...]
    active_qubits: tuple[tuple[int, ...], ...]
    final_qubit: int


def build_architecture(num_layers: int, uploading: bool) -> Architecture:
    if not 1 <= num_layers <= MAX_LAYERS:
        raise ValueError(f"num_layers must be in [1, {MAX_LAYERS}], got {num_layers}")
    total = 2**num_layers
    active: list[tuple[int, ...]] = []
    current = tuple(range(total))
    for _ in range(num_layers):
        active.append(current)
        current = current[1::2]  # pooling keeps the second qubit of each pair
    (final_qubit,) = current
    if uploading:
        blocks = tuple(len(layer) for layer in active)
    else:
        blocks = (total,)
    return Architecture(
        num_layers=num_layers,
        uploading=uploading,
        total_qubits=total,
        param_count=parameter_count(num_layers),
        feature_count=sum(blocks),
        feature_blocks=blocks,
        active_qubits=tuple(active),
        final_qubit=final_qubit,
    )


def param_slices(arch: Architecture) -> list[tuple[slice, slice]]:
    """Per-layer (conv, pool) slices into the flat parameter vector."""
    slices = []
    start = 0
    for layer in arch.active_qubits:
        w = len(layer)
        conv = slice(start, start + 2 * (w - 1))
        pool = slice(conv.stop, conv.stop + w)
        slices.append((conv, pool))
        start = pool.stop
    return slices


def encode(state: np.ndarray, qubits, features) -> np.ndarray:
    """Rotate features into qubits: RY(2*x_i) on qubit q_i.

    From |0...0> this prepares the product state of cos(x_i)|0> + sin(x_i)|1>;
    mid-circuit it is a data-dependent rotation of the current state.
    Features must lie in [0, pi/2].  For batched states, `features` has the
    batch shape plus a trailing axis of length len(qubits).
    """
    qubits = list(qubits)
    feats = np.asarray(features, dtype=np.float64)
    if feats.shape[-1] != len(qubits):
        raise ValueError(
            f"feature slice has length {feats.shape[-1]}, expected {len(qubits)}"
        )
    if np.any(feats < 0.0) or np.any(feats > math.pi / 2):
        raise ValueError("features must lie in [0, pi/2]")
    for i, qubit in enumerate(qubits):
        apply_ry(state, qubit, 2.0 * feats[..., i])
    return state


def _conv_pairs(active) -> list[tuple[int, int]]:
    w = len(active)
    pairs = [(active[i], active[i + 1]) for i in range(0, w - 1, 2)]
    pairs += [(active[i], active[i + 1]) for i in range(1, w - 1, 2)]
    return pairs


def conv_layer(state: np.ndarray, active_qubits, params) -> np.ndarray:
    """Brick-wall convolution over the active register; w-1 two-qubit blocks.

    Sublayer A covers pairs (q0,q1),(q2,q3),...; sublayer B the offset pairs
    (q1,q2),(q3,q4),...  Each block has its own (theta1, theta2): RY(theta1)
    on the first qubit, RY(theta2) on the second, then CNOT(first -> second).
    """
    active = list(active_qubits)
    params = np.asarray(params, dtype=np.float64)
    pairs = _conv_pairs(active)
    if params.shape != (2 * len(pairs),):
        raise ValueError(
            f"conv layer on {len(active)} qubits needs {2 * len(pairs)} parameters, "
            f"got {params.shape}"
        )
    for i, (first, second) in enumerate(pairs):
        apply_ry(state, first, params[2 * i])
        apply_ry(state, second, params[2 * i + 1])
        apply_cnot(state, first, second)
    return state


def pool_layer(state: np.ndarray, active_qubits, params) -> tuple[np.ndarray, list[int]]:
    """Pooling over adjacent pairs; halves the active register.

    For each pair (control, target): RZ(theta1) on the target fires when the
    control is |1>, then RX(theta2) fires when the control is |0>.  The
    control qubit is dropped from the active set and never addressed again.
    """
    active = list(active_qubits)
    w = len(active)
    if w % 2 != 0:
        raise ValueError(f"pool layer needs an even register, got {w} qubits")
    params = np.asarray(params, dtype=np.float64)
    if params.shape != (w,):
        raise ValueError(f"pool layer on {w} qubits needs {w} parameters, got {params.shape}")
    survivors = []
    for i in range(0, w, 2):
        control, target = active[i], active[i + 1]
        apply_controlled_rot(state, control, target, "z", params[i], control_value=1)
        apply_controlled_rot(state, control, target, "x", params[i + 1], control_value=0)
        survivors.append(target)
    return state, survivors


def forward(arch: Architecture, params, features):
    """Run the circuit from |0...0> and read out the surviving qubit.

    Returns (z, p0, p1) with p0 = (1+z)/2 and p1 = (1-z)/2.  `features` may
    be a single vector or an array of shape (..., feature_count); outputs
    are then floats or arrays of the batch shape.
    """
    params = np.asarray(params, dtype=np.float64)
    if params.shape != (arch.param_count,):
        raise ValueError(
            f"expected {arch.param_count} parameters, got shape {params.shape}"
        )
    feats = np.asarray(features, dtype=np.float64)
    if feats.shape[-1] != arch.feature_count:
        raise ValueError(
            f"expected {arch.feature_count} features, got {feats.shape[-1]}"
        )

    batch_shape = feats.shape[:-1]
    if batch_shape:
        state = np.zeros(batch_shape + (1 << arch.total_qubits,), dtype=np.complex128)
        state[..., 0] = 1.0
    else:
        state = zero_state(arch.total_qubits)

    slices = param_slices(arch)
    offset = 0
    for layer_index, active in enumerate(arch.active_qubits):
        if layer_index == 0 or arch.uploading:
            width = len(active)
            encode(state, active, feats[..., offset : offset + width])
            offset += width
        conv_slice, pool_slice = slices[layer_index]
        conv_layer(state, active, params[conv_slice])
        state, _ = pool_layer(state, active, params[pool_slice])

    z = expectation_z(state, arch.final_qubit)
    p0 = (1.0 + z) / 2.0
    p1 = (1.0 - z) / 2.0
    return z, p0, p1
