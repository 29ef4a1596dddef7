import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from toricsim.pauli import PauliOperator
from toricsim.tableau import StabilizerTableau, new_state, states_equal

from oracle_sv import StateVector


class CountingRng:
    """Wraps a Generator and counts random draws (for the no-randomness check)."""

    def __init__(self, seed=0):
        self.rng = np.random.default_rng(seed)
        self.calls = 0

    def integers(self, *a, **k):
        self.calls += 1
        return self.rng.integers(*a, **k)

    def random(self, *a, **k):
        self.calls += 1
        return self.rng.random(*a, **k)


def test_new_state_zeros():
    s = new_state(3)
    for q in range(3):
        assert s.expect_pauli(PauliOperator.single(3, "Z", q)) == 1
    assert s.expect_pauli(PauliOperator.single(3, "X", 0)) == 0
    s16 = new_state(16)
    assert all(s16.expect_pauli(PauliOperator.single(16, "Z", q)) == 1 for q in range(16))


def test_new_state_rejects_zero():
    with pytest.raises(ValueError):
        new_state(0)


def test_basic_gate_actions():
    s = new_state(1)
    s.h(0)
    assert s.expect_pauli(PauliOperator.from_label("X")) == 1
    s.s(0)
    assert s.expect_pauli(PauliOperator.from_label("Y")) == 1
    b = new_state(2)
    b.h(0)
    b.cx(0, 1)
    assert b.expect_pauli(PauliOperator.from_label("XX")) == 1
    assert b.expect_pauli(PauliOperator.from_label("ZZ")) == 1
    assert b.expect_pauli(PauliOperator.from_label("XZ")) == 0


def test_two_qubit_gate_errors():
    s = new_state(2)
    with pytest.raises(ValueError):
        s.apply("cx", (1, 1))
    with pytest.raises(ValueError):
        s.apply("h", (0, 1))
    with pytest.raises(ValueError):
        s.apply("qq", (0,))


def test_measure_deterministic_consumes_no_randomness():
    s = new_state(2)
    rng = CountingRng()
    assert s.measure_pauli(PauliOperator.single(2, "Z", 0), rng) == 1
    assert rng.calls == 0
    s.h(0)
    s.measure_pauli(PauliOperator.single(2, "X", 0), rng)
    assert rng.calls == 0  # |+> is an X eigenstate
    s.measure_pauli(PauliOperator.single(2, "Z", 0), rng)
    assert rng.calls == 1


def test_measure_projection_idempotent():
    rng = np.random.default_rng(11)
    s = new_state(4)
    p = PauliOperator.from_label("XXXX")
    first = s.measure_pauli(p, rng)
    second = s.measure_pauli(p, rng)
    assert first == second
    s.validate()


def test_measure_x_on_zero_is_unbiased():
    counts = 0
    for shot in range(1000):
        rng = np.random.default_rng((42, shot))
        s = new_state(1)
        if s.measure_pauli(PauliOperator.from_label("X"), rng) == 1:
            counts += 1
    assert abs(counts / 1000 - 0.5) < 0.05


def test_measure_rejects_imaginary_phase():
    s = new_state(1)
    bad = PauliOperator.from_label("X") * PauliOperator.from_label("Z")
    with pytest.raises(ValueError):
        s.measure_pauli(bad, np.random.default_rng(0))
    with pytest.raises(ValueError):
        s.expect_pauli(bad)


def test_project_forced_and_contradiction():
    s = new_state(2)
    s.project(PauliOperator.from_label("XX"), -1)
    assert s.expect_pauli(PauliOperator.from_label("XX")) == -1
    # ZZ is still +1 in the projected state; forcing -1 hits a dead branch
    assert s.expect_pauli(PauliOperator.from_label("ZZ")) == 1
    with pytest.raises(ValueError):
        s.project(PauliOperator.from_label("ZZ"), -1)


def test_renyi2_bell_and_product():
    b = new_state(2)
    b.h(0)
    b.cx(0, 1)
    assert abs(b.renyi2_exact([0]) - math.log(2)) < 1e-12
    assert abs(b.renyi2_exact([1]) - math.log(2)) < 1e-12
    p = new_state(3)
    p.h(1)
    assert p.renyi2_exact([0, 1]) == 0.0
    assert p.renyi2_exact([]) == 0.0


def test_renyi2_complement_symmetry():
    rng = np.random.default_rng(3)
    s = random_clifford_state(6, 40, rng)
    for _ in range(10):
        size = int(rng.integers(1, 6))
        subset = list(rng.choice(6, size=size, replace=False))
        comp = [q for q in range(6) if q not in subset]
        assert abs(s.renyi2_exact(subset) - s.renyi2_exact(comp)) < 1e-12


def test_states_equal_basics():
    a = new_state(1)
    a.h(0)
    a.h(0)
    assert states_equal(a, new_state(1))
    b1 = new_state(2)
    b1.h(0)
    b1.cx(0, 1)
    b2 = new_state(2)
    b2.h(0)
    b2.cx(0, 1)
    b2.z_gate(0)
    assert not states_equal(b1, b2)
    assert states_equal(b1, b1)


GATE_POOL_1Q = ["h", "s", "sdg", "x", "y", "z"]
GATE_POOL_2Q = ["cx", "cz", "swap"]


def random_clifford_state(n, depth, rng):
    s = new_state(n)
    for _ in range(depth):
        if n > 1 and rng.random() < 0.4:
            a, b = rng.choice(n, size=2, replace=False)
            s.apply(str(rng.choice(GATE_POOL_2Q)), (int(a), int(b)))
        else:
            s.apply(str(rng.choice(GATE_POOL_1Q)), (int(rng.integers(n)),))
    return s


def random_gate_list(n, depth, rng):
    gates = []
    for _ in range(depth):
        if n > 1 and rng.random() < 0.4:
            a, b = rng.choice(n, size=2, replace=False)
            gates.append((str(rng.choice(GATE_POOL_2Q)), (int(a), int(b))))
        else:
            gates.append((str(rng.choice(GATE_POOL_1Q)), (int(rng.integers(n)),)))
    return gates


def random_pauli(n, rng):
    letters = rng.choice(list("IXYZ"), size=n)
    if all(l == "I" for l in letters):
        letters[rng.integers(n)] = "X"
    return PauliOperator.from_label("".join(letters))


@pytest.mark.parametrize("seed", range(8))
def test_expectations_match_statevector(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 6))
    gates = random_gate_list(n, 25, rng)
    tab = new_state(n)
    sv = StateVector(n)
    for g, qubits in gates:
        tab.apply(g, qubits)
        sv.apply_gate(g, qubits)
    tab.validate()
    for _ in range(12):
        p = random_pauli(n, rng)
        got = tab.expect_pauli(p)
        want = sv.pauli_expect(p)
        assert abs(want.imag) < 1e-9
        assert abs(got - want.real) < 1e-9


@pytest.mark.parametrize("seed", range(6))
def test_renyi2_matches_statevector(seed):
    rng = np.random.default_rng((7, seed))
    n = int(rng.integers(2, 7))
    gates = random_gate_list(n, 30, rng)
    tab = new_state(n)
    sv = StateVector(n)
    for g, qubits in gates:
        tab.apply(g, qubits)
        sv.apply_gate(g, qubits)
    size = int(rng.integers(1, n))
    subset = sorted(int(q) for q in rng.choice(n, size=size, replace=False))
    assert abs(tab.renyi2_exact(subset) - sv.renyi2(subset)) < 1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_tableau_valid_after_random_ops(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    s = random_clifford_state(n, 20, rng)
    for _ in range(3):
        s.measure_pauli(random_pauli(n, rng), rng)
    s.validate()


def test_apply_pauli_flips_anticommuting_rows():
    s = new_state(4)
    s.apply_pauli(PauliOperator.single(4, "X", 2))
    assert s.expect_pauli(PauliOperator.single(4, "Z", 2)) == -1
    assert s.expect_pauli(PauliOperator.single(4, "Z", 1)) == 1
