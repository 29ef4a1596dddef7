"""Three-step ground-state preparation with feed-forward.

Step one initializes every qubit in |0>, satisfying all Z-type plaquettes.
Step two measures the remaining stabilizers: plaquettes flagged
``ancilla_free_modified`` run a six-entangler in-place parity check whose
minus branch auto-corrects the measured plaquette and displaces any anyon
through the target qubit into an ancilla-measured neighbor; the others use
one ancilla each (four entanglers per weight-4 plaquette, five for the
pentagon stabilizers). Step three decodes the ancilla outcomes and applies
parity-conditioned Z corrections inside the circuit, so the retained output
state is the same pure state for every random outcome pattern.

Shots whose syndrome bits violate the global parity constraint are heralded
and discarded by the callers.

The lookup decoder is built at construction time by GF(2) elimination: for
each even syndrome it stores the minimum-weight Z-correction (ties broken by
lexicographically smallest qubit set) that flips exactly the flagged
plaquettes while commuting with the auto-corrected ones. The in-circuit form
is the linear decoder: corrections for adjacent syndrome pairs combined by
prefix parities, one XOR-conditioned gate per correction qubit, which is what
keeps the conditional-gate count linear in system size.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from . import _bits
from .circuit import Circuit
from .lattice import Lattice
from .pauli import PauliOperator
from .tableau import StabilizerTableau, new_state

METHODS = ("ancilla", "ancilla_free_modified", "all_ancilla_reuse", "inferred")
DECODERS = ("lookup_qasm2", "lookup_optimized", "inferred_parity")


@dataclass(frozen=True)
class PrepStrategy:
    """Per-plaquette measurement method plus decoder choice."""

    plaquette_methods: tuple[tuple[int, str], ...]
    decoder: str = "lookup_optimized"
    free_targets: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.decoder not in DECODERS:
            raise ValueError(f"unknown decoder {self.decoder!r}")
        for label, method in self.plaquette_methods:
            if method not in METHODS:
                raise ValueError(f"unknown method {method!r} on plaquette {label}")
        labels = [l for l, _ in self.plaquette_methods]
        if len(labels) != len(set(labels)):
            raise ValueError("duplicate plaquette label in strategy")
        inferred = [l for l, m in self.plaquette_methods if m == "inferred"]
        if len(inferred) > 1:
            raise ValueError("at most one plaquette may be inferred")
        if inferred and self.decoder != "inferred_parity":
            raise ValueError("inferred plaquette requires the inferred_parity decoder")
        if self.decoder == "inferred_parity" and not inferred:
            raise ValueError("inferred_parity decoder needs one inferred plaquette")

    def methods(self) -> dict[int, str]:
        return dict(self.plaquette_methods)

    def targets(self) -> dict[int, int]:
        return dict(self.free_targets)

    def to_json(self) -> str:
        return json.dumps(
            {
                "plaquette_methods": {str(l): m for l, m in self.plaquette_methods},
                "decoder": self.decoder,
                "free_targets": {str(l): t for l, t in self.free_targets},
            },
            indent=2,
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "PrepStrategy":
        doc = json.loads(text)
        return cls(
            plaquette_methods=tuple(sorted((int(l), m) for l, m in doc["plaquette_methods"].items())),
            decoder=doc.get("decoder", "lookup_optimized"),
            free_targets=tuple(sorted((int(l), int(t)) for l, t in doc.get("free_targets", {}).items())),
        )


def measured_plaquettes(lattice: Lattice) -> list[tuple[int, PauliOperator]]:
    """The stabilizers that need active measurement (X-type and defect)."""
    return sorted(lattice.x_plaquettes + lattice.defect_plaquettes)


def _default_free_target(lattice: Lattice, label: int, ancilla_labels: set[int]) -> int:
    """Pick the measured qubit so displaced anyons land on an ancilla plaquette.

    Candidates are support qubits whose other X/Y-content stabilizer is
    ancilla-measured; the plaquette's own (upper-left) label qubit is
    preferred when eligible.
    """
    op = lattice.plaquette(label)
    measured = dict(measured_plaquettes(lattice))
    candidates = []
    for q in op.support():
        probe = PauliOperator.single(lattice.n_qubits, "Z", q)
        partners = [
            lab for lab, p in measured.items()
            if lab != label and not probe.commutes(p)
        ]
        if len(partners) == 1 and partners[0] in ancilla_labels:
            candidates.append(q)
    if not candidates:
        raise ValueError(f"no valid ancilla-free target on plaquette {label}")
    return label if label in candidates else min(candidates)


def default_strategy(lattice: Lattice, decoder: str = "lookup_optimized") -> PrepStrategy:
    """The split used on the device: half ancilla-based, half modified ancilla-free.

    On the torus the ancilla-free plaquettes are the X-type blocks with odd
    row and even column; on the defect lattice they are the three regular
    X-plaquettes not adjacent to the pentagons (10, 11, 13).
    """
    measured = measured_plaquettes(lattice)
    methods = {}
    for label, _ in measured:
        coord = lattice.coord(label)
        if lattice.plaquette_kind(label) == "defect":
            methods[label] = "ancilla"
        elif coord[0] % 2 == 1 and coord[1] % 2 == 0:
            methods[label] = "ancilla_free_modified"
        else:
            methods[label] = "ancilla"
    anc_labels = {l for l, m in methods.items() if m == "ancilla"}
    targets = {
        l: _default_free_target(lattice, l, anc_labels)
        for l, m in methods.items()
        if m == "ancilla_free_modified"
    }
    return PrepStrategy(
        plaquette_methods=tuple(sorted(methods.items())),
        decoder=decoder,
        free_targets=tuple(sorted(targets.items())),
    )


def all_ancilla_strategy(lattice: Lattice, n_ancillas: int = 4) -> PrepStrategy:
    methods = {label: "all_ancilla_reuse" for label, _ in measured_plaquettes(lattice)}
    return PrepStrategy(plaquette_methods=tuple(sorted(methods.items())), decoder="lookup_optimized")


def inferred_strategy(lattice: Lattice, skip_label: int | None = None) -> PrepStrategy:
    base = default_strategy(lattice)
    methods = base.methods()
    anc = sorted(l for l, m in methods.items() if m == "ancilla")
    if skip_label is None:
        skip_label = anc[-1]
    if methods.get(skip_label) != "ancilla":
        raise ValueError("only an ancilla-measured plaquette can be inferred")
    methods[skip_label] = "inferred"
    return PrepStrategy(
        plaquette_methods=tuple(sorted(methods.items())),
        decoder="inferred_parity",
        free_targets=base.free_targets,
    )


# -- parity-check fragments ---------------------------------------------------


def build_parity_check_ancilla(op: PauliOperator, ancilla: int, clbit: int,
                               n_qubits: int, n_clbits: int) -> Circuit:
    """Ancilla-based check of a commuting-stabilizer Pauli.

    Prepares the ancilla in |+>, applies one controlled factor per support
    qubit, rotates back and measures: clbit 0/1 corresponds to outcome +1/-1
    and the data channel is (I +/- op)/2.
    """
    if ancilla in op.support():
        raise ValueError("ancilla overlaps the plaquette support")
    frag = Circuit(n_qubits, n_clbits)
    frag.gate("h", ancilla)
    for q in op.support():
        axis = op.axis(q)
        if axis == "X":
            frag.gate("cx", ancilla, q)
        elif axis == "Z":
            frag.gate("cz", ancilla, q)
        else:
            frag.gate("sdg", q)
            frag.gate("cx", ancilla, q)
            frag.gate("s", q)
    frag.gate("h", ancilla)
    frag.measure(ancilla, clbit)
    return frag


def build_parity_check_ancilla_free(op: PauliOperator, target: int, modified: bool,
                                    clbit: int, n_qubits: int, n_clbits: int) -> Circuit:
    """In-place parity check of an X-type plaquette through one data qubit.

    Folds the other support qubits onto the target with CX gates, reads the
    target in the X basis, feed-forward-resets it, and unfolds: six
    two-qubit gates for a weight-4 plaquette. The unmodified variant restores
    the projector (I +/- op)/2 exactly with a trailing conditional Z; the
    modified variant omits it, so the -1 branch acts as Z_target (I - op)/2,
    leaving the measured plaquette at +1 and handing any anyon to the
    diagonal neighbor through the target.
    """
    support = op.support()
    if target not in support:
        raise ValueError("target must belong to the plaquette support")
    if any(op.axis(q) != "X" for q in support):
        raise ValueError("ancilla-free checks support X-type plaquettes only")
    others = [q for q in support if q != target]
    frag = Circuit(n_qubits, n_clbits)
    for q in others:
        frag.gate("cx", target, q)
    frag.gate("h", target)
    frag.measure(target, clbit)
    frag.cond_gate("x", target, [clbit], 1)
    frag.gate("h", target)
    for q in reversed(others):
        frag.gate("cx", target, q)
    if not modified:
        frag.cond_gate("z", target, [clbit], 1)
    return frag


# -- decoding -----------------------------------------------------------------


@dataclass
class Syndrome:
    """Outcome bits per measured plaquette (1 means -1) plus the herald flag."""

    bits: dict[int, int]
    herald: bool = field(init=False)
    parity_target: int = 0

    def __post_init__(self):
        total = sum(self.bits.values()) & 1
        self.herald = total != self.parity_target

    def minus_labels(self) -> frozenset[int]:
        return frozenset(l for l, b in self.bits.items() if b)


class Decoder:
    """Precomputed correction tables for one (lattice, strategy) pair."""

    def __init__(self, lattice: Lattice, strategy: PrepStrategy):
        self.lattice = lattice
        self.strategy = strategy
        methods = strategy.methods()
        measured = measured_plaquettes(lattice)
        if set(methods) != {l for l, _ in measured}:
            raise ValueError("strategy must assign a method to every measured plaquette")
        self.decode_labels = sorted(
            l for l, m in methods.items() if m in ("ancilla", "all_ancilla_reuse", "inferred")
        )
        self.pinned_labels = sorted(l for l, m in methods.items() if m == "ancilla_free_modified")
        self.inferred_label = next((l for l, m in methods.items() if m == "inferred"), None)

        n = lattice.n_qubits
        ops = dict(measured)
        # flip matrix: entry (label, q) = 1 iff Z_q anticommutes with the stabilizer
        self._rows = {}
        for label, op in ops.items():
            row = 0
            for q in range(n):
                probe = PauliOperator.single(n, "Z", q)
                if not probe.commutes(op):
                    row |= 1 << q
            self._rows[label] = row

        # global parity of all measured outcomes: the product of the measured
        # stabilizers evaluated on |0...0>
        product = PauliOperator.identity(n)
        for _, op in measured:
            product = product * op
        v0 = new_state(n).expect_pauli(product)
        if v0 == 0:
            raise AssertionError("measured-stabilizer product is not Z-type")
        self.parity_target = 0 if v0 == 1 else 1

        self._row_order = self.decode_labels + self.pinned_labels
        self._kernel = _bits.kernel_gf2([self._rows[l] for l in self._row_order], n)
        self.table: dict[frozenset[int], tuple[int, ...]] = {}
        m = len(self.decode_labels)
        for pattern in range(1 << m):
            if bin(pattern).count("1") % 2 != self.parity_target:
                continue
            minus = frozenset(self.decode_labels[i] for i in range(m) if (pattern >> i) & 1)
            self.table[minus] = self._solve_min_weight(minus)

    def _solve_min_weight(self, minus: frozenset[int]) -> tuple[int, ...]:
        n = self.lattice.n_qubits
        rows = [self._rows[l] for l in self._row_order]
        rhs = [1 if l in minus else 0 for l in self.decode_labels] + [0] * len(self.pinned_labels)
        x0 = _bits.solve_gf2(rows, rhs, n)
        if x0 is None:
            raise ValueError(f"syndrome {sorted(minus)} is not correctable")
        best = None
        for combo in range(1 << len(self._kernel)):
            x = x0
            for i, k in enumerate(self._kernel):
                if (combo >> i) & 1:
                    x ^= k
            qubits = tuple(q for q in range(n) if (x >> q) & 1)
            key = (len(qubits), qubits)
            if best is None or key < best[0]:
                best = (key, qubits)
        return best[1]

    def decode(self, syndrome: Syndrome) -> list[int]:
        """Z-correction qubits for an even-parity syndrome; heralded input is rejected."""
        if syndrome.herald:
            raise ValueError("heralded syndrome (odd anyon parity) cannot be decoded")
        minus = frozenset(l for l in self.decode_labels if syndrome.bits.get(l, 0))
        return list(self.table[minus])

    def pair_basis(self) -> list[tuple[tuple[int, int], tuple[int, ...]]]:
        """Corrections for adjacent decode-label pairs; basis of the linear decoder."""
        out = []
        for a, b in itertools.pairwise(self.decode_labels):
            out.append(((a, b), self.table[frozenset((a, b))]))
        return out


def decode_lookup(syndrome: Syndrome, lattice: Lattice, strategy: PrepStrategy | None = None) -> list[int]:
    if strategy is None:
        strategy = default_strategy(lattice)
    return Decoder(lattice, strategy).decode(syndrome)


# -- full preparation circuit --------------------------------------------------


@dataclass
class PrepCircuit:
    circuit: Circuit
    lattice: Lattice
    strategy: PrepStrategy
    decoder: Decoder
    clbit_of_label: dict[int, int]
    n_ancillas: int
    ancilla_qubits: list[int]

    def syndrome_from_clbits(self, clbits: list[int]) -> Syndrome:
        """Decoder-visible bits only: the raw ancilla-free outcomes are
        uniformly random (their in-fragment feed-forward breaks the outcome
        product rule) and carry no parity information."""
        bits = {}
        for label in self.decoder.decode_labels:
            if label == self.decoder.inferred_label:
                continue
            bits[label] = clbits[self.clbit_of_label[label]]
        if self.decoder.inferred_label is not None:
            others = sum(bits.values()) & 1
            bits[self.decoder.inferred_label] = others ^ self.decoder.parity_target
            # with one bit inferred the parity constraint holds by
            # construction, so heralding is unavailable for this strategy
        return Syndrome(bits, parity_target=self.decoder.parity_target)


def build_preparation_circuit(lattice: Lattice, strategy: PrepStrategy | None = None) -> PrepCircuit:
    """Assemble fragments plus the in-circuit linear decoder.

    Ancilla-free fragments run first so that displaced anyons are picked up
    by the subsequent ancilla measurements and the decoder sees the full
    anyon pattern through the ancilla bits alone.
    """
    if strategy is None:
        strategy = default_strategy(lattice)
    decoder = Decoder(lattice, strategy)
    methods = strategy.methods()
    targets = strategy.targets()
    n_data = lattice.n_qubits

    free = sorted(l for l, m in methods.items() if m == "ancilla_free_modified")
    plain_anc = sorted(l for l, m in methods.items() if m == "ancilla")
    reuse_anc = sorted(l for l, m in methods.items() if m == "all_ancilla_reuse")

    if reuse_anc and (free or plain_anc or decoder.inferred_label is not None):
        raise ValueError("all_ancilla_reuse applies to every plaquette or none")
    n_anc = 4 if reuse_anc else len(plain_anc)
    n_qubits = n_data + n_anc
    ancillas = list(range(n_data, n_qubits))

    labels_in_order = free + (plain_anc or reuse_anc)
    clbit_of_label = {label: i for i, label in enumerate(labels_in_order)}
    circ = Circuit(n_qubits, len(labels_in_order))

    for label in free:
        op = lattice.plaquette(label)
        target = targets.get(label)
        if target is None:
            raise ValueError(f"no ancilla-free target set for plaquette {label}")
        circ.extend(
            build_parity_check_ancilla_free(op, target, True, clbit_of_label[label], n_qubits, circ.n_clbits)
        )
    if reuse_anc:
        groups = [reuse_anc[i: i + n_anc] for i in range(0, len(reuse_anc), n_anc)]
        for gi, group in enumerate(groups):
            for label, anc in zip(group, ancillas):
                if gi > 0:
                    circ.reset(anc)
                circ.extend(
                    build_parity_check_ancilla(lattice.plaquette(label), anc, clbit_of_label[label], n_qubits, circ.n_clbits)
                )
    else:
        for label, anc in zip(plain_anc, ancillas):
            circ.extend(
                build_parity_check_ancilla(lattice.plaquette(label), anc, clbit_of_label[label], n_qubits, circ.n_clbits)
            )

    _emit_linear_corrections(circ, decoder, clbit_of_label)
    circ.validate()
    return PrepCircuit(circ, lattice, strategy, decoder, clbit_of_label, n_anc, ancillas)


def _emit_linear_corrections(circ: Circuit, decoder: Decoder, clbit_of_label: dict[int, int]) -> None:
    """One XOR-conditioned Z per correction qubit, from prefix-parity coefficients."""
    labels = decoder.decode_labels
    if len(labels) < 2:
        return

    # each decode label's bit as (clbit set, constant) over physical bits
    expr: dict[int, tuple[frozenset[int], int]] = {}
    for label in labels:
        if label == decoder.inferred_label:
            bits = frozenset(clbit_of_label[l] for l in labels if l != label)
            expr[label] = (bits, decoder.parity_target)
        else:
            expr[label] = (frozenset((clbit_of_label[label],)), 0)

    qubit_condition: dict[int, tuple[set[int], int]] = {}
    prefix: set[int] = set()
    prefix_const = 0
    for (a, b), correction in decoder.pair_basis():
        bits_a, const_a = expr[a]
        prefix ^= set(bits_a)
        prefix_const ^= const_a
        for q in correction:
            bits, const = qubit_condition.setdefault(q, (set(), 0))
            bits ^= prefix
            const ^= prefix_const
            qubit_condition[q] = (bits, const)
    for q in sorted(qubit_condition):
        bits, const = qubit_condition[q]
        if not bits:
            if const:  # unconditional correction; cannot happen for parity-even tables
                circ.gate("z", q)
            continue
        circ.cond_gate("z", q, sorted(bits), 1 ^ const)


# -- shot loop -----------------------------------------------------------------


@dataclass
class PrepResult:
    prep: PrepCircuit
    n_shots: int
    syndromes: list[Syndrome]
    retained_indices: list[int]
    states: list[StabilizerTableau]

    @property
    def discard_fraction(self) -> float:
        return 1.0 - len(self.retained_indices) / self.n_shots if self.n_shots else 0.0


def prepare_ground_state(
    lattice: Lattice,
    strategy: PrepStrategy | None,
    noise,
    seed: int,
    shots: int,
    keep_states: bool = True,
) -> PrepResult:
    """Run the preparation shot loop; heralded shots are dropped from states.

    noise is a NoiseModel or None. Each shot uses the stream (seed, shot), so
    results do not depend on execution order or parallel chunking.
    """
    from .circuit import execute
    from .report import shot_rng

    prep = build_preparation_circuit(lattice, strategy)
    syndromes: list[Syndrome] = []
    retained: list[int] = []
    states: list[StabilizerTableau] = []
    for shot in range(shots):
        rng = shot_rng(seed, shot)
        state, clbits = execute(prep.circuit, prep.circuit.n_qubits, noise, rng)
        syn = prep.syndrome_from_clbits(clbits)
        syndromes.append(syn)
        if not syn.herald:
            retained.append(shot)
            if keep_states:
                _normalize_ancillas(state, prep.ancilla_qubits)
                states.append(state)
    return PrepResult(prep, shots, syndromes, retained, states)


def _normalize_ancillas(state: StabilizerTableau, ancillas: list[int]) -> None:
    """Return measured ancillas to |0> so states compare on the data register."""
    for q in ancillas:
        v = state.expect_pauli(PauliOperator.single(state.n, "Z", q))
        if v == 0:
            raise AssertionError(f"ancilla {q} left entangled")
        if v == -1:
            state.x_gate(q)


def target_state(lattice: Lattice, n_total: int | None = None) -> StabilizerTableau:
    """The unique all-stabilizers-+1 state in the +1 logical sector.

    Built independently of the feed-forward path by projecting each measured
    stabilizer onto +1 from |0...0>. Extra qubits beyond the lattice (when
    n_total is given) stay in |0>, matching normalized ancillas.
    """
    n = n_total if n_total is not None else lattice.n_qubits
    if n < lattice.n_qubits:
        raise ValueError("n_total smaller than the lattice")
    state = new_state(n)
    for _, op in measured_plaquettes(lattice):
        axes = {q: op.axis(q) for q in op.support()}
        state.project(PauliOperator.from_axes(n, axes, sign=op.sign), 1)
    return state
