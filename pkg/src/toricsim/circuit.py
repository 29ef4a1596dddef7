"""Circuit IR with mid-circuit measurement and XOR-conditioned feed-forward.

Instructions execute in program order against a stabilizer tableau. A
conditional gate applies a single-qubit Pauli iff the XOR of the listed
classical bits equals its parity target; this is the only classical control
the protocols need, and it keeps the IR analyzable.

The text form is line-based (UTF-8, LF, '#' comments), one instruction per
line, preceded by `qubits N` / `clbits M` headers:

    h q3
    cz q0 q5
    measure q2 -> c4
    reset q2
    ifxor c1 c3 == 1 : z q7
    u1q(1.5707963267948966,-1.5707963267948966) q0

parse() and serialize() are mutually inverse (serialize . parse is the
identity on canonical text).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .pauli import PauliOperator
from .tableau import StabilizerTableau, GATES_1Q, GATES_2Q

CLIFFORD_GATES = set(GATES_1Q) | set(GATES_2Q)
NATIVE_GATES = {"u1q": (1, 2), "rz": (1, 1), "rzz": (2, 1)}  # name -> (qubits, params)
COND_GATES = {"x", "y", "z", "u1q", "rz"}


@dataclass(frozen=True)
class Instruction:
    kind: str                       # gate | measure | reset | cond_gate
    gate: str | None = None
    qubits: tuple[int, ...] = ()
    clbit: int | None = None
    cond_bits: tuple[int, ...] = ()
    cond_parity: int = 0
    params: tuple[float, ...] = ()


class CircuitError(ValueError):
    pass


class ParseError(CircuitError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass
class Circuit:
    n_qubits: int
    n_clbits: int = 0
    instructions: list[Instruction] = field(default_factory=list)

    # -- builders ----------------------------------------------------------

    def _check_qubits(self, qubits: tuple[int, ...]):
        for q in qubits:
            if not 0 <= q < self.n_qubits:
                raise CircuitError(f"qubit {q} out of range")
        if len(set(qubits)) != len(qubits):
            raise CircuitError("repeated qubit index")

    def gate(self, name: str, *qubits: int, params: tuple[float, ...] = ()) -> "Circuit":
        name = name.lower()
        if name in CLIFFORD_GATES:
            arity, n_params = (1 if name in GATES_1Q else 2), 0
        elif name in NATIVE_GATES:
            arity, n_params = NATIVE_GATES[name]
        else:
            raise CircuitError(f"unknown gate {name!r}")
        if len(qubits) != arity or len(params) != n_params:
            raise CircuitError(f"{name} takes {arity} qubit(s), {n_params} param(s)")
        self._check_qubits(qubits)
        self.instructions.append(Instruction("gate", name, tuple(qubits), params=tuple(params)))
        return self

    def measure(self, qubit: int, clbit: int) -> "Circuit":
        self._check_qubits((qubit,))
        if not 0 <= clbit < self.n_clbits:
            raise CircuitError(f"clbit {clbit} out of range")
        self.instructions.append(Instruction("measure", qubits=(qubit,), clbit=clbit))
        return self

    def reset(self, qubit: int) -> "Circuit":
        self._check_qubits((qubit,))
        self.instructions.append(Instruction("reset", qubits=(qubit,)))
        return self

    def cond_gate(self, name: str, qubit: int, cond_bits, parity: int,
                  params: tuple[float, ...] = ()) -> "Circuit":
        name = name.lower()
        if name not in COND_GATES:
            raise CircuitError("conditional gates apply single-qubit Paulis only")
        self._check_qubits((qubit,))
        bits = tuple(sorted(set(int(b) for b in cond_bits)))
        if not bits:
            raise CircuitError("condition needs at least one clbit")
        for b in bits:
            if not 0 <= b < self.n_clbits:
                raise CircuitError(f"clbit {b} out of range")
        if parity not in (0, 1):
            raise CircuitError("parity must be 0 or 1")
        self.instructions.append(
            Instruction("cond_gate", name, (qubit,), cond_bits=bits, cond_parity=parity, params=tuple(params))
        )
        return self

    def extend(self, other: "Circuit") -> "Circuit":
        if other.n_qubits > self.n_qubits or other.n_clbits > self.n_clbits:
            raise CircuitError("fragment does not fit target circuit")
        self.instructions.extend(other.instructions)
        return self

    # -- validation ----------------------------------------------------------

    def validate(self) -> None:
        """Check index ranges and that conditions only read clbits written earlier."""
        written: set[int] = set()
        for i, ins in enumerate(self.instructions):
            for q in ins.qubits:
                if not 0 <= q < self.n_qubits:
                    raise CircuitError(f"instruction {i}: qubit {q} out of range")
            if ins.kind == "measure":
                if ins.clbit is None or not 0 <= ins.clbit < self.n_clbits:
                    raise CircuitError(f"instruction {i}: bad clbit")
                written.add(ins.clbit)
            if ins.kind == "cond_gate":
                missing = [b for b in ins.cond_bits if b not in written]
                if missing:
                    raise CircuitError(f"instruction {i}: condition reads unwritten clbits {missing}")

    def two_qubit_layers(self) -> list[int]:
        """Greedy layer index per instruction (only 2q gates occupy layers).

        Returns -1 for instructions that are not two-qubit gates. The number
        of layers (max+1) is the depth-1-time count used by the memory-noise
        model.
        """
        avail = [0] * self.n_qubits
        layers = []
        for ins in self.instructions:
            if ins.kind == "gate" and len(ins.qubits) == 2:
                a, b = ins.qubits
                layer = max(avail[a], avail[b])
                avail[a] = avail[b] = layer + 1
                layers.append(layer)
            else:
                layers.append(-1)
        return layers

    def depth_2q(self) -> int:
        layers = self.two_qubit_layers()
        return max(layers, default=-1) + 1

    def count_2q(self) -> int:
        return sum(1 for ins in self.instructions if ins.kind == "gate" and len(ins.qubits) == 2)

    # -- text form -----------------------------------------------------------

    def serialize(self) -> str:
        lines = [f"qubits {self.n_qubits}", f"clbits {self.n_clbits}"]
        for ins in self.instructions:
            lines.append(_format_instruction(ins))
        return "\n".join(lines) + "\n"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Circuit):
            return NotImplemented
        return (
            self.n_qubits == other.n_qubits
            and self.n_clbits == other.n_clbits
            and self.instructions == other.instructions
        )


def _format_gate_name(ins: Instruction) -> str:
    if ins.params:
        body = ",".join(repr(float(p)) for p in ins.params)
        return f"{ins.gate}({body})"
    return ins.gate


def _format_instruction(ins: Instruction) -> str:
    if ins.kind == "gate":
        return f"{_format_gate_name(ins)} " + " ".join(f"q{q}" for q in ins.qubits)
    if ins.kind == "measure":
        return f"measure q{ins.qubits[0]} -> c{ins.clbit}"
    if ins.kind == "reset":
        return f"reset q{ins.qubits[0]}"
    if ins.kind == "cond_gate":
        bits = " ".join(f"c{b}" for b in ins.cond_bits)
        return f"ifxor {bits} == {ins.cond_parity} : {_format_gate_name(ins)} q{ins.qubits[0]}"
    raise CircuitError(f"unknown instruction kind {ins.kind!r}")


def _parse_gate_token(token: str, line_no: int) -> tuple[str, tuple[float, ...]]:
    if "(" in token:
        name, _, rest = token.partition("(")
        if not rest.endswith(")"):
            raise ParseError(line_no, f"unterminated parameter list in {token!r}")
        try:
            params = tuple(float(p) for p in rest[:-1].split(",") if p.strip() != "")
        except ValueError:
            raise ParseError(line_no, f"bad parameter in {token!r}") from None
        return name.lower(), params
    return token.lower(), ()


def _parse_index(token: str, prefix: str, line_no: int) -> int:
    if not token.startswith(prefix) or not token[len(prefix):].isdigit():
        raise ParseError(line_no, f"expected {prefix}<index>, got {token!r}")
    return int(token[len(prefix):])


def parse(text: str) -> Circuit:
    """Parse the text form; raises ParseError with a line number on bad input."""
    n_qubits = n_clbits = None
    circuit: Circuit | None = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        head = tokens[0].lower()
        if head == "qubits":
            if len(tokens) != 2 or not tokens[1].isdigit():
                raise ParseError(line_no, "qubits header needs one integer")
            n_qubits = int(tokens[1])
            continue
        if head == "clbits":
            if len(tokens) != 2 or not tokens[1].isdigit():
                raise ParseError(line_no, "clbits header needs one integer")
            n_clbits = int(tokens[1])
            continue
        if circuit is None:
            if n_qubits is None:
                raise ParseError(line_no, "missing qubits header")
            circuit = Circuit(n_qubits, n_clbits or 0)
        try:
            _parse_instruction(circuit, tokens, line_no)
        except CircuitError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(line_no, str(exc)) from None
    if circuit is None:
        if n_qubits is None:
            raise ParseError(1, "empty circuit text")
        circuit = Circuit(n_qubits, n_clbits or 0)
    circuit.validate()
    return circuit


def _parse_instruction(circuit: Circuit, tokens: list[str], line_no: int) -> None:
    head = tokens[0].lower()
    if head == "measure":
        if len(tokens) != 4 or tokens[2] != "->":
            raise ParseError(line_no, "measure syntax: measure q<i> -> c<j>")
        circuit.measure(_parse_index(tokens[1], "q", line_no), _parse_index(tokens[3], "c", line_no))
        return
    if head == "reset":
        if len(tokens) != 2:
            raise ParseError(line_no, "reset syntax: reset q<i>")
        circuit.reset(_parse_index(tokens[1], "q", line_no))
        return
    if head == "ifxor":
        try:
            eq = tokens.index("==")
            colon = tokens.index(":")
        except ValueError:
            raise ParseError(line_no, "ifxor syntax: ifxor c<i> ... == <0|1> : <gate> q<j>") from None
        bits = [_parse_index(t, "c", line_no) for t in tokens[1:eq]]
        if colon != eq + 2 or tokens[eq + 1] not in ("0", "1"):
            raise ParseError(line_no, "ifxor parity must be 0 or 1")
        rest = tokens[colon + 1:]
        if len(rest) != 2:
            raise ParseError(line_no, "ifxor applies one single-qubit gate")
        name, params = _parse_gate_token(rest[0], line_no)
        circuit.cond_gate(name, _parse_index(rest[1], "q", line_no), bits, int(tokens[eq + 1]), params=params)
        return
    name, params = _parse_gate_token(tokens[0], line_no)
    if name not in CLIFFORD_GATES and name not in NATIVE_GATES:
        raise ParseError(line_no, f"unknown mnemonic {tokens[0]!r}")
    qubits = [_parse_index(t, "q", line_no) for t in tokens[1:]]
    circuit.gate(name, *qubits, params=params)


# -- interpreter -------------------------------------------------------------


def execute(
    circuit: Circuit,
    state: StabilizerTableau | int,
    noise=None,
    rng: np.random.Generator | None = None,
) -> tuple[StabilizerTableau, list[int]]:
    """Run a circuit on a tableau (or on |0..0> of the given size).

    Returns the final state and the classical bit values. Fully deterministic
    given (circuit, noise, rng state); noise objects follow the contract of
    :class:`toricsim.noise.NoiseModel`. Native parametrized gates are not
    executable here and raise CircuitError.
    """
    circuit.validate()
    if isinstance(state, int):
        state = StabilizerTableau(state)
    if state.n < circuit.n_qubits:
        raise CircuitError("state has fewer qubits than the circuit")
    needs_rng = noise is not None or any(i.kind in ("measure", "reset") for i in circuit.instructions)
    if rng is None:
        if needs_rng:
            raise CircuitError("circuit involves randomness; pass an rng")
        rng = np.random.default_rng(0)

    clbits = [0] * circuit.n_clbits
    layers = circuit.two_qubit_layers() if noise is not None else None
    current_layer = 0

    def flush_memory(up_to: int):
        nonlocal current_layer
        while current_layer < up_to:
            err = noise.sample_memory_round(state.n, rng)
            if err is not None:
                state.apply_pauli(err)
            current_layer += 1

    for idx, ins in enumerate(circuit.instructions):
        if ins.kind == "gate":
            if ins.gate in NATIVE_GATES:
                raise CircuitError(f"cannot execute native gate {ins.gate!r} on the tableau")
            if noise is not None and layers[idx] >= 0:
                flush_memory(layers[idx])
            state.apply(ins.gate, ins.qubits)
            if noise is not None:
                err = noise.sample_gate_error(ins.gate, ins.qubits, state.n, rng)
                if err is not None:
                    state.apply_pauli(err)
        elif ins.kind == "measure":
            bit = state.measure_z(ins.qubits[0], rng)
            if noise is not None:
                bit = noise.apply_readout_flip(bit, rng)
            clbits[ins.clbit] = bit
        elif ins.kind == "reset":
            state.reset(ins.qubits[0], rng)
        elif ins.kind == "cond_gate":
            value = 0
            for b in ins.cond_bits:
                value ^= clbits[b]
            if value == ins.cond_parity:
                state.apply(ins.gate, ins.qubits)
                if noise is not None:
                    err = noise.sample_gate_error(ins.gate, ins.qubits, state.n, rng)
                    if err is not None:
                        state.apply_pauli(err)
        else:
            raise CircuitError(f"unknown instruction kind {ins.kind!r}")
    if noise is not None:
        flush_memory(circuit.depth_2q())
    return state, clbits
