"""Compilation of the Clifford gate set into the device-native gates.

Native gates: U1q(theta, phi) = exp(-i (cos phi X + sin phi Y) theta / 2)
with theta restricted to {pi/2, pi}, Rz(lambda) = exp(-i Z lambda / 2), and
the entangling RZZ(theta) = exp(-i theta/2 Z x Z). Every rewrite below is
exact up to global phase; tests verify each one against dense unitaries built
independently from matrix exponentials.

CX compiles to H_target CZ H_target and CZ to one RZZ(pi/2) plus frame
Rz(-pi/2) rotations, so every two-qubit Clifford gate costs exactly one
native entangler and the reported n_2q is the RZZ count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .circuit import Circuit, CircuitError, Instruction

PI = math.pi

# native sequences in time order; (name, qubit slot, params)
_H_SEQ = (("u1q", 0, (PI, 0.0)), ("u1q", 0, (PI / 2, -PI / 2)))
_1Q_TABLE = {
    "h": _H_SEQ,
    "s": (("rz", 0, (PI / 2,)),),
    "sdg": (("rz", 0, (-PI / 2,)),),
    "x": (("u1q", 0, (PI, 0.0)),),
    "y": (("u1q", 0, (PI, PI / 2)),),
    "z": (("rz", 0, (PI,)),),
}
_CZ_SEQ = (("rz", 0, (-PI / 2,)), ("rz", 1, (-PI / 2,)), ("rzz", (0, 1), (PI / 2,)))


@dataclass(frozen=True)
class NativeGateCounts:
    n_1q: int
    n_2q: int
    depth_1q_equivalent: int

    def __post_init__(self):
        if self.n_1q < 0 or self.n_2q < 0 or self.depth_1q_equivalent < 0:
            raise ValueError("gate counts must be nonnegative")


def _emit(native: Circuit, seq, qubits):
    for name, slot, params in seq:
        if isinstance(slot, tuple):
            native.gate(name, *(qubits[s] for s in slot), params=params)
        else:
            native.gate(name, qubits[slot], params=params)


def _compile_gate(native: Circuit, gate: str, qubits: tuple[int, ...]) -> None:
    if gate in _1Q_TABLE:
        _emit(native, _1Q_TABLE[gate], qubits)
    elif gate == "cz":
        _emit(native, _CZ_SEQ, qubits)
    elif gate == "cx":
        c, t = qubits
        _emit(native, _H_SEQ, (t,))
        _emit(native, _CZ_SEQ, (c, t))
        _emit(native, _H_SEQ, (t,))
    elif gate == "swap":
        a, b = qubits
        for c, t in ((a, b), (b, a), (a, b)):
            _compile_gate(native, "cx", (c, t))
    elif gate in ("u1q", "rz", "rzz"):
        raise CircuitError("circuit is already native")
    else:
        raise CircuitError(f"unknown gate {gate!r}")


def compile_to_native(circuit: Circuit, qasm2_conditions: bool = False) -> tuple[Circuit, NativeGateCounts]:
    """Rewrite a Clifford circuit over the native gate set and count gates.

    Conditional Paulis become conditional native one-qubit gates (classical
    control is free on the entangler count). With qasm2_conditions=True the
    returned circuit is unchanged but each conditional gate is counted
    2**(n_clbits - 1) times: emulating a register-wide equality condition, as
    forced by classical-control models that cannot condition on individual
    bits, requires one gate per register value with the right parity.
    """
    circuit.validate()
    native = Circuit(circuit.n_qubits, circuit.n_clbits)
    cond_gates = 0
    for ins in circuit.instructions:
        if ins.kind == "gate":
            _compile_gate(native, ins.gate, ins.qubits)
        elif ins.kind in ("measure", "reset"):
            native.instructions.append(ins)
        elif ins.kind == "cond_gate":
            seq = _1Q_TABLE[ins.gate] if ins.gate in _1Q_TABLE else ((ins.gate, 0, ins.params),)
            for name, _slot, params in seq:
                native.cond_gate(name, ins.qubits[0], ins.cond_bits, ins.cond_parity, params=params)
                cond_gates += 1
        else:
            raise CircuitError(f"cannot compile instruction kind {ins.kind!r}")
    plain_1q = sum(
        1 for i in native.instructions if i.kind == "gate" and i.gate in ("u1q", "rz")
    )
    n_2q = sum(1 for i in native.instructions if i.kind == "gate" and i.gate == "rzz")
    if qasm2_conditions and cond_gates:
        fan = 2 ** max(native.n_clbits - 1, 0)
        n_1q = plain_1q + cond_gates * fan
    else:
        n_1q = plain_1q + cond_gates
    counts = NativeGateCounts(n_1q=n_1q, n_2q=n_2q, depth_1q_equivalent=native.depth_2q())
    return native, counts
