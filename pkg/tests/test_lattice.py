import itertools

import numpy as np
import pytest

from toricsim.lattice import (
    AnyonConfig,
    Lattice,
    build_defect_lattice,
    build_torus,
    derive_defect_stabilizers,
    logical_expectations,
    predict_anyon_config,
)
from toricsim.pauli import PauliOperator
from toricsim.prep import target_state
from toricsim.tableau import new_state


@pytest.fixture(scope="module")
def torus():
    return build_torus()


@pytest.fixture(scope="module")
def defect():
    return build_defect_lattice()


class TestTorus:
    def test_x_type_labels(self, torus):
        assert sorted(l for l, _ in torus.x_plaquettes) == [1, 3, 4, 6, 9, 11, 12, 14]

    def test_z_type_labels_are_complement(self, torus):
        z = sorted(l for l, _ in torus.z_plaquettes)
        assert z == [0, 2, 5, 7, 8, 10, 13, 15]

    def test_plaquette_3_support_wraps(self, torus):
        assert sorted(torus.plaquette(3).support()) == [0, 3, 4, 7]

    def test_logical_strings(self, torus):
        assert torus.logical_ops["Z_hori_0"].compact() == "ZZZZ@[0,1,2,3]"
        assert torus.logical_ops["Z_vert_0"].compact() == "ZZZZ@[0,4,8,12]"

    def test_every_qubit_in_two_of_each_type(self, torus):
        for q in range(16):
            probe_z = PauliOperator.single(16, "Z", q)
            probe_x = PauliOperator.single(16, "X", q)
            n_x = sum(1 for _, op in torus.x_plaquettes if not probe_z.commutes(op))
            n_z = sum(1 for _, op in torus.z_plaquettes if not probe_x.commutes(op))
            assert n_x == 2 and n_z == 2

    def test_plaquette_products_are_identity(self, torus):
        for group in (torus.x_plaquettes, torus.z_plaquettes):
            prod = PauliOperator.identity(16)
            for _, op in group:
                prod = prod * op
            assert prod.weight() == 0 and prod.phase == 1

    def test_odd_dimensions_rejected(self):
        with pytest.raises(ValueError):
            build_torus(3, 4)
        with pytest.raises(ValueError):
            build_torus(4, 6 + 1)

    def test_commutativity_and_logicals(self, torus):
        torus.validate()  # pairwise commutation plus logical compatibility

    def test_general_even_torus(self):
        lat = build_torus(4, 6)
        lat.validate()
        assert lat.n_qubits == 24
        assert len(lat.x_plaquettes) == 12

    def test_z5_flips_exactly_plaquettes_1_and_4(self, torus):
        state = target_state(torus)
        state.apply_pauli(PauliOperator.single(16, "Z", 5))
        flipped = [l for l, op in torus.x_plaquettes if state.expect_pauli(op) == -1]
        assert sorted(flipped) == [1, 4]
        assert all(state.expect_pauli(op) == 1 for _, op in torus.z_plaquettes)

    def test_single_x_flips_one_logical_row(self, torus):
        state = target_state(torus)
        state.apply_pauli(PauliOperator.single(16, "X", 0))
        le = logical_expectations(state, torus)
        assert le["Z_hori_0"] == -1.0
        assert le["Z_hori_1"] == le["Z_hori_2"] == le["Z_hori_3"] == 1.0


class TestDefectLattice:
    def test_qubit_count(self, defect):
        assert defect.n_qubits == 15

    def test_labels_match_measurement_settings(self, defect):
        # four-setting readout plan uses labels 0..14 without 9
        assert defect.labels() == [0, 1, 2, 3, 4, 5, 6, 7, 8, 10, 11, 12, 13, 14]

    def test_pentagon_stabilizers(self, defect):
        ops = dict(defect.defect_plaquettes)
        assert sorted(ops) == [5, 6]
        for op in ops.values():
            axes = {op.axis(q) for q in op.support()}
            assert op.weight() == 5
            assert "X" in axes and "Z" in axes  # transmuting content
            assert op.sign == 1

    def test_all_stabilizers_commute(self, defect):
        ops = defect.all_plaquettes()
        for (la, a), (lb, b) in itertools.combinations(ops, 2):
            assert a.commutes(b), (la, lb)

    def test_independent_generator_count(self, defect):
        # 14 plaquettes on 15 qubits: rank computed over the symplectic rows
        from toricsim._bits import rank_gf2, to_int

        rows = []
        for _, op in defect.all_plaquettes():
            rows.append(to_int(op.x) | (to_int(op.z) << 64))
        assert rank_gf2(rows, 128) == 14

    def test_solver_rejects_inconsistent_input(self, defect):
        bad_regular = [(0, PauliOperator.single(15, "X", 5)), (1, PauliOperator.single(15, "Z", 5))]
        with pytest.raises(ValueError):
            derive_defect_stabilizers(bad_regular, [[5, 6, 9]], 15)

    def test_json_round_trip(self, defect):
        loaded = Lattice.from_json(defect.to_json())
        assert loaded.labels() == defect.labels()
        for lab, op in defect.all_plaquettes():
            assert loaded.plaquette(lab) == op


class TestAnyonConfig:
    def test_unknown_label_rejected(self, torus):
        cfg = AnyonConfig(torus)
        with pytest.raises(KeyError):
            cfg[99] = -1
        with pytest.raises(ValueError):
            cfg[1] = 0

    def test_predict_counts_anticommutation(self, defect):
        moves = [PauliOperator.single(15, "X", 12)]
        cfg = predict_anyon_config(defect, moves)
        assert sorted(l for l, s in cfg.items() if s == -1) == [8, 12]
