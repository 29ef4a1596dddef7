"""Defect-lattice experiments: anyon transmutation, QND tracing, braiding.

The transmutation sequence X12 X13 Z6 Z5 creates a flux pair on plaquettes
(8, 12), moves one flux into the right pentagon (6), converts it to a charge
on plaquette 1 and parks it on plaquette 4; the partner stays on 8
throughout. The braid experiment Hadamard-tests the loop Z10 Z8 Z4 Z7 around
the composite created by Y10: with the fermion present the controlled loop
anticommutes with the creation operator and the ancilla reads -1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, execute
from .estimators import MeasurementSetting, default_plan, expectation_report
from .lattice import AnyonConfig, Lattice, predict_anyon_config
from .noise import NoiseSpec, make_noise
from .pauli import PauliOperator
from .prep import PrepStrategy, build_parity_check_ancilla, build_preparation_circuit, default_strategy
from .report import ExperimentReport, mean_and_se
from .runner import DestructiveShots, collect_destructive

TRANSMUTATION_MOVES: tuple[tuple[str, int], ...] = (("x", 12), ("x", 13), ("z", 6), ("z", 5))
QND_PLAQUETTES: tuple[int, ...] = (1, 4, 6, 8, 12)
BRAID_LOOP_QUBITS: tuple[int, ...] = (10, 8, 4, 7)
COMPOSITE_QUBIT = 10


@dataclass(frozen=True)
class DynamicsScript:
    """Ordered single-qubit Pauli moves plus measurement checkpoints."""

    moves: tuple[tuple[str, int], ...]
    checkpoints: tuple[dict, ...] = ()

    def to_json(self) -> str:
        return json.dumps(
            {"moves": [list(m) for m in self.moves], "checkpoints": list(self.checkpoints)},
            indent=2,
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "DynamicsScript":
        doc = json.loads(text)
        return cls(
            moves=tuple((g, int(q)) for g, q in doc["moves"]),
            checkpoints=tuple(doc.get("checkpoints", ())),
        )


def transmutation_script() -> DynamicsScript:
    return DynamicsScript(
        moves=TRANSMUTATION_MOVES,
        checkpoints=({"plaquettes": list(QND_PLAQUETTES), "mode": "qnd"},),
    )


def _moves_to_paulis(lattice: Lattice, moves) -> list[PauliOperator]:
    return [PauliOperator.single(lattice.n_qubits, g.upper(), q) for g, q in moves]


@dataclass
class TransmutationStep:
    step: int
    moves: tuple[tuple[str, int], ...]
    expected: AnyonConfig
    report: ExperimentReport


def run_transmutation(
    lattice: Lattice,
    noise_spec: NoiseSpec | None,
    seed: int,
    shots_per_setting: int = 600,
    moves: tuple[tuple[str, int], ...] = TRANSMUTATION_MOVES,
    strategy: PrepStrategy | None = None,
) -> list[TransmutationStep]:
    """Destructive per-step readout: fresh preparations for every move prefix.

    Step k applies the first k moves. Doubly-covered plaquettes (corners and
    pentagons) accumulate two samples per shot round, matching the uneven
    per-plaquette sample counts of the four-setting plan.
    """
    if not lattice.defect_plaquettes:
        raise ValueError("transmutation runs on the defect lattice")
    steps = []
    for k in range(len(moves) + 1):
        prefix = tuple(moves[:k])
        shots = collect_destructive(
            lattice, strategy, noise_spec, seed + k, shots_per_setting, moves=prefix
        )
        report = expectation_report(
            shots, shots.plan, lattice, command="transmute", seed=seed,
            metadata={"step": k, "moves": [list(m) for m in prefix]},
        )
        expected = predict_anyon_config(lattice, _moves_to_paulis(lattice, prefix))
        steps.append(TransmutationStep(k, prefix, expected, report))
    return steps


# -- QND tracing ----------------------------------------------------------------


@dataclass
class QndTrace:
    plaquettes: tuple[int, ...]
    moves: tuple[tuple[str, int], ...]
    records: list[dict]
    final_plan: list[MeasurementSetting]

    def save_jsonl(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for rec in self.records:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")

    def checkpoint_means(self, checkpoint: int) -> dict[int, float]:
        vals: dict[int, list[int]] = {p: [] for p in self.plaquettes}
        for rec in self.records:
            if rec["herald"]:
                continue
            for p, v in zip(self.plaquettes, rec["checkpoints"][checkpoint]):
                vals[p].append(v)
        return {p: float(np.mean(v)) if v else float("nan") for p, v in vals.items()}


def run_qnd_trace(
    lattice: Lattice,
    noise_spec: NoiseSpec | None,
    seed: int,
    shots: int,
    moves: tuple[tuple[str, int], ...] = TRANSMUTATION_MOVES[:3],
    plaquettes: tuple[int, ...] = QND_PLAQUETTES,
    strategy: PrepStrategy | None = None,
) -> QndTrace:
    """One circuit per shot: prepare, then move/QND-measure repeatedly, then
    read the remaining stabilizers destructively.

    The same ancillas used for preparation are reset and reused at every
    checkpoint, so the whole trajectory costs a single preparation. The final
    destructive setting cycles through the four-setting plan across shots.
    """
    if not lattice.defect_plaquettes:
        raise ValueError("QND tracing runs on the defect lattice")
    if strategy is None:
        strategy = default_strategy(lattice)
    prep = build_preparation_circuit(lattice, strategy)
    if len(prep.ancilla_qubits) < len(plaquettes):
        raise ValueError(
            f"ancilla shortage: need {len(plaquettes)}, have {len(prep.ancilla_qubits)}"
        )
    noise = make_noise(noise_spec)
    plan = default_plan(lattice)
    n_data = lattice.n_qubits
    n_check = len(plaquettes) * len(moves)

    variants = []
    for setting in plan:
        circ = Circuit(prep.circuit.n_qubits, prep.circuit.n_clbits + n_check + n_data)
        circ.instructions.extend(prep.circuit.instructions)
        cb = prep.circuit.n_clbits
        for gate, qubit in moves:
            circ.gate(gate, qubit)
            for p, anc in zip(plaquettes, prep.ancilla_qubits):
                circ.reset(anc)
                circ.extend(
                    build_parity_check_ancilla(
                        lattice.plaquette(p), anc, cb, circ.n_qubits, circ.n_clbits
                    )
                )
                cb += 1
        from .runner import _BASIS_ROTATION

        for q, axis in enumerate(setting.bases):
            for g in _BASIS_ROTATION[axis]:
                circ.gate(g, q)
        for q in range(n_data):
            circ.measure(q, cb + q)
        circ.validate()
        variants.append((setting, circ))

    records = []
    for shot in range(shots):
        setting, circ = variants[shot % len(variants)]
        rng = np.random.default_rng([int(seed), int(shot)])
        _, clbits = execute(circ, circ.n_qubits, noise, rng)
        herald = prep.syndrome_from_clbits(clbits).herald
        base = prep.circuit.n_clbits
        checkpoints = []
        for ci in range(len(moves)):
            row = clbits[base + ci * len(plaquettes) : base + (ci + 1) * len(plaquettes)]
            checkpoints.append([1 - 2 * b for b in row])
        data_bits = clbits[base + n_check :]
        final = {}
        for label in setting.plaquettes:
            support = lattice.plaquette(label).support()
            final[str(label)] = 1 - 2 * (sum(data_bits[q] for q in support) % 2)
        records.append(
            {
                "shot": shot,
                "herald": bool(herald),
                "checkpoints": checkpoints,
                "final_setting": setting.name,
                "final": final,
            }
        )
    return QndTrace(tuple(plaquettes), tuple(moves), records, plan)


# -- braiding interferometry ------------------------------------------------------


def build_braid_circuit(lattice: Lattice, with_fermion: bool,
                        strategy: PrepStrategy | None = None):
    """Preparation plus the Hadamard test of the controlled plaquette loop.

    The ancilla starts in |+>, controls Z on the four loop qubits, and is
    read in Z after a final H, so its expectation is Re<psi|U_braid|psi>.
    """
    if strategy is None:
        strategy = default_strategy(lattice)
    prep = build_preparation_circuit(lattice, strategy)
    anc = prep.ancilla_qubits[0]
    circ = Circuit(prep.circuit.n_qubits, prep.circuit.n_clbits + 1)
    circ.instructions.extend(prep.circuit.instructions)
    circ.reset(anc)
    circ.gate("h", anc)
    if with_fermion:
        circ.gate("y", COMPOSITE_QUBIT)
    for q in BRAID_LOOP_QUBITS:
        circ.gate("cz", anc, q)
    if with_fermion:
        circ.gate("y", COMPOSITE_QUBIT)
    circ.gate("h", anc)
    anc_clbit = prep.circuit.n_clbits
    circ.measure(anc, anc_clbit)
    circ.validate()
    return prep, circ, anc_clbit


def run_braid_interferometry(
    lattice: Lattice,
    with_fermion: bool,
    noise_spec: NoiseSpec | None,
    seed: int,
    shots: int,
    strategy: PrepStrategy | None = None,
) -> ExperimentReport:
    """Ancilla <Z> of the Hadamard-tested braid loop over retained shots."""
    if not lattice.defect_plaquettes:
        raise ValueError("braiding runs on the defect lattice")
    prep, circ, anc_clbit = build_braid_circuit(lattice, with_fermion, strategy)
    noise = make_noise(noise_spec)
    samples = []
    heralded = 0
    for shot in range(shots):
        rng = np.random.default_rng([int(seed), int(shot)])
        _, clbits = execute(circ, circ.n_qubits, noise, rng)
        if prep.syndrome_from_clbits(clbits).herald:
            heralded += 1
            continue
        samples.append(1.0 - 2.0 * clbits[anc_clbit])
    report = ExperimentReport(
        command="braid",
        seed=seed,
        shots=shots,
        discard_fraction=heralded / shots if shots else 0.0,
        metadata={"with_fermion": with_fermion, "loop_qubits": list(BRAID_LOOP_QUBITS)},
    )
    report.add_observable("Z_ancilla", samples)
    return report
