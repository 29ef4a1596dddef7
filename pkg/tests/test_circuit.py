import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from toricsim.circuit import Circuit, CircuitError, ParseError, execute, parse
from toricsim.pauli import PauliOperator

from oracle_sv import run_circuit_sv


def feedforward_circuit():
    c = Circuit(2, 1)
    c.gate("x", 0)
    c.measure(0, 0)
    c.cond_gate("x", 1, [0], 1)
    return c


def test_feedforward_moves_excitation():
    state, clbits = execute(feedforward_circuit(), 2, rng=np.random.default_rng(0))
    assert clbits == [1]
    assert state.expect_pauli(PauliOperator.single(2, "Z", 1)) == -1


def test_execute_is_deterministic():
    c = Circuit(3, 3)
    for q in range(3):
        c.gate("h", q)
        c.measure(q, q)
    runs = [execute(c, 3, rng=np.random.default_rng([5, 1]))[1] for _ in range(2)]
    assert runs[0] == runs[1]


def test_condition_on_unwritten_clbit_rejected():
    c = Circuit(1, 1)
    c.cond_gate("z", 0, [0], 1)  # condition precedes any measurement
    with pytest.raises(CircuitError):
        c.validate()
    with pytest.raises(CircuitError):
        execute(c, 1, rng=np.random.default_rng(0))


def test_rng_required_for_measurement():
    c = Circuit(1, 1)
    c.gate("h", 0)
    c.measure(0, 0)
    with pytest.raises(CircuitError):
        execute(c, 1)


def test_gate_validation():
    c = Circuit(2, 0)
    with pytest.raises(CircuitError):
        c.gate("cx", 0, 0)
    with pytest.raises(CircuitError):
        c.gate("h", 5)
    with pytest.raises(CircuitError):
        c.gate("nope", 0)
    with pytest.raises(CircuitError):
        c.cond_gate("cx", 0, [0], 1)


CANONICAL = """qubits 3
clbits 2
h q0
cx q0 q1
measure q1 -> c0
reset q1
ifxor c0 == 1 : z q2
u1q(3.141592653589793,0.0) q2
rz(1.5707963267948966) q0
rzz(1.5707963267948966) q0 q2
"""


def test_parse_serialize_canonical_round_trip():
    circ = parse(CANONICAL)
    assert circ.serialize() == CANONICAL
    assert parse(circ.serialize()) == circ


def test_parse_handles_comments_and_blank_lines():
    text = "# header\nqubits 2\nclbits 1\n\nh q0   # apply\nmeasure q0 -> c0\n"
    circ = parse(text)
    assert len(circ.instructions) == 2


def test_parse_multi_bit_condition():
    circ = parse("qubits 8\nclbits 4\nmeasure q0 -> c1\nmeasure q1 -> c3\nifxor c1 c3 == 1 : z q7\n")
    ins = circ.instructions[-1]
    assert ins.kind == "cond_gate" and ins.cond_bits == (1, 3) and ins.cond_parity == 1


def test_parse_single_bit_condition_grammar():
    circ = parse("qubits 1\nclbits 1\nmeasure q0 -> c0\nifxor c0 == 1 : z q0\n")
    ins = circ.instructions[-1]
    assert ins.cond_bits == (0,) and ins.cond_parity == 1 and ins.gate == "z"


def test_parse_errors_carry_line_numbers():
    with pytest.raises(ParseError) as err:
        parse("qubits 2\nclbits 0\nqq q0\n")
    assert err.value.line_no == 3
    with pytest.raises(ParseError) as err:
        parse("qubits 2\nh q9\n")
    assert err.value.line_no == 2
    with pytest.raises(ParseError):
        parse("h q0\n")  # missing header


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_round_trip_random_circuits(seed):
    rng = np.random.default_rng(seed)
    n, m = int(rng.integers(1, 6)), int(rng.integers(1, 5))
    c = Circuit(n, m)
    written = []
    for _ in range(15):
        kind = rng.integers(0, 4)
        if kind == 0:
            c.gate(str(rng.choice(["h", "s", "sdg", "x", "y", "z"])), int(rng.integers(n)))
        elif kind == 1 and n > 1:
            a, b = map(int, rng.choice(n, size=2, replace=False))
            c.gate(str(rng.choice(["cx", "cz", "swap"])), a, b)
        elif kind == 2:
            bit = int(rng.integers(m))
            c.measure(int(rng.integers(n)), bit)
            written.append(bit)
        elif kind == 3 and written:
            k = int(rng.integers(1, min(3, len(written)) + 1))
            bits = list(rng.choice(sorted(set(written)), size=k, replace=False))
            c.cond_gate(str(rng.choice(["x", "y", "z"])), int(rng.integers(n)), bits, int(rng.integers(2)))
    assert parse(c.serialize()) == c


def test_interpreter_matches_hand_application():
    c = Circuit(3, 0)
    c.gate("h", 0)
    c.gate("cx", 0, 1)
    c.gate("s", 2)
    state, _ = execute(c, 3)
    from toricsim.tableau import new_state, states_equal

    manual = new_state(3)
    manual.h(0)
    manual.cx(0, 1)
    manual.s(2)
    assert states_equal(state, manual)


@pytest.mark.parametrize("seed", range(5))
def test_execute_matches_statevector_with_forced_outcomes(seed):
    rng = np.random.default_rng((13, seed))
    n = int(rng.integers(2, 5))
    c = Circuit(n, n)
    for _ in range(12):
        r = rng.integers(0, 3)
        if r == 0:
            c.gate(str(rng.choice(["h", "s", "x"])), int(rng.integers(n)))
        elif r == 1 and n > 1:
            a, b = map(int, rng.choice(n, size=2, replace=False))
            c.gate(str(rng.choice(["cx", "cz"])), a, b)
        else:
            q = int(rng.integers(n))
            c.measure(q, q)
    state, clbits = execute(c, n, rng=np.random.default_rng((21, seed)))
    forced = [clbits[i.clbit] for i in c.instructions if i.kind == "measure"]
    sv, sv_clbits = run_circuit_sv(c, None, forced=forced)
    assert sv_clbits == clbits
    for i in range(n):
        got = state.expect_pauli(PauliOperator.single(n, "Z", i))
        want = sv.pauli_expect(PauliOperator.single(n, "Z", i)).real
        assert abs(got - want) < 1e-9


def test_two_qubit_layering():
    c = Circuit(4, 0)
    c.gate("cx", 0, 1)
    c.gate("cx", 2, 3)  # parallel with the first
    c.gate("cx", 1, 2)  # must wait
    assert c.two_qubit_layers() == [0, 0, 1]
    assert c.depth_2q() == 2
