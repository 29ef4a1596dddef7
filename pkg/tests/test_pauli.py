import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from toricsim.pauli import PauliOperator

from oracle_sv import PAULI


def dense(op: PauliOperator) -> np.ndarray:
    mat = np.array([[1.0 + 0j]])
    for q in range(op.n):
        mat = np.kron(mat, PAULI[op.axis(q)])
    return op.phase * mat


LABELS = ["I", "X", "Y", "Z"]


@pytest.mark.parametrize("a", LABELS)
@pytest.mark.parametrize("b", LABELS)
def test_single_qubit_products_match_dense(a, b):
    pa, pb = PauliOperator.from_label(a), PauliOperator.from_label(b)
    np.testing.assert_allclose(dense(pa * pb), dense(pa) @ dense(pb), atol=1e-12)


def test_phase_values():
    x, y, z = (PauliOperator.from_label(s) for s in "XYZ")
    assert (x * y).phase == 1j and (x * y).label() == "Z"
    assert (y * x).phase == -1j
    assert (z * y).phase == -1j and (z * y).label() == "X"
    assert PauliOperator.from_label("Y").phase == 1


def test_commutes_matches_symplectic_rule():
    a = PauliOperator.from_label("XXIZ")
    b = PauliOperator.from_label("ZXYI")
    # qubit 0: X vs Z anti; qubit 2: I vs Y; qubit 3: Z vs I
    assert not a.commutes(b)
    assert a.commutes(a)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from(LABELS), min_size=1, max_size=5),
       st.lists(st.sampled_from(LABELS), min_size=1, max_size=5))
def test_product_matches_dense(la, lb):
    n = max(len(la), len(lb))
    la += ["I"] * (n - len(la))
    lb += ["I"] * (n - len(lb))
    pa = PauliOperator.from_label("".join(la))
    pb = PauliOperator.from_label("".join(lb))
    np.testing.assert_allclose(dense(pa * pb), dense(pa) @ dense(pb), atol=1e-12)
    # commutation agrees with dense matrices
    comm = np.allclose(dense(pa) @ dense(pb), dense(pb) @ dense(pa))
    assert pa.commutes(pb) == comm


@settings(max_examples=40, deadline=None)
@given(st.lists(st.sampled_from(LABELS), min_size=1, max_size=4).map("".join),
       st.lists(st.sampled_from(LABELS), min_size=1, max_size=4).map("".join),
       st.lists(st.sampled_from(LABELS), min_size=1, max_size=4).map("".join))
def test_associativity(a, b, c):
    n = max(len(a), len(b), len(c))
    ops = [PauliOperator.from_label(s.ljust(n, "I")) for s in (a, b, c)]
    assert (ops[0] * ops[1]) * ops[2] == ops[0] * (ops[1] * ops[2])


def test_group_closure_phase_in_group():
    rng = np.random.default_rng(5)
    for _ in range(50):
        la = "".join(rng.choice(list("IXYZ"), size=6))
        lb = "".join(rng.choice(list("IXYZ"), size=6))
        prod = PauliOperator.from_label(la) * PauliOperator.from_label(lb)
        assert prod.phase in (1, -1, 1j, -1j)


def test_constructors_and_accessors():
    p = PauliOperator.from_axes(6, {0: "X", 3: "Z", 5: "Y"})
    assert p.support() == [0, 3, 5]
    assert p.weight() == 3
    assert p.axis(1) == "I"
    assert p.label() == "XIIZIY"
    q = PauliOperator.z_string(4, [0, 1, 2, 3])
    assert q.label() == "ZZZZ"
    s = PauliOperator.single(3, "X", 1, sign=-1)
    assert s.sign == -1


def test_compact_round_trip():
    p = PauliOperator.from_axes(16, {0: "X", 1: "X", 4: "X", 5: "X"})
    assert p.compact() == "XXXX@[0,1,4,5]"
    assert PauliOperator.from_compact(p.compact(), 16) == p
    m = -PauliOperator.from_axes(8, {2: "Y", 7: "Z"})
    assert PauliOperator.from_compact(m.compact(), 8) == m


def test_imaginary_phase_detected():
    x, z = PauliOperator.from_label("X"), PauliOperator.from_label("Z")
    xz = x * z
    assert not xz.has_real_phase()
    with pytest.raises(ValueError):
        _ = xz.sign


def test_bad_inputs():
    with pytest.raises(ValueError):
        PauliOperator.from_label("XQ")
    with pytest.raises(ValueError):
        PauliOperator.from_axes(2, {5: "X"})
    with pytest.raises(ValueError):
        PauliOperator.from_label("XX") * PauliOperator.from_label("X")
