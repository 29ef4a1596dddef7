"""Stochastic Pauli noise calibrated to the trapped-ion device datasheet.

Errors are sampled in the native two-qubit (RZZ) frame and conjugated through
the tail of each gate's native decomposition before insertion: a CX compiles
to H_target CZ H_target, so the target component of a sampled error is passed
through a Hadamard. This is what turns the Z-biased two-qubit noise into bit
flips on data qubits and reproduces the device's asymmetry between X- and
Z-type plaquette expectations.

Readout errors flip the recorded classical bit while the post-measurement
state follows the true outcome; state-preparation error is folded into the
1->0 flip probability. Memory errors hit every qubit once per two-qubit depth
layer.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .pauli import PauliOperator

_AXES = ("X", "Y", "Z")

# nonidentity Pauli pairs in a fixed order; the Z-type triple comes first
_PAIRS_Z = (("I", "Z"), ("Z", "I"), ("Z", "Z"))
_PAIRS_OTHER = tuple(
    (a, b)
    for a in ("I", "X", "Y", "Z")
    for b in ("I", "X", "Y", "Z")
    if (a, b) != ("I", "I") and (a, b) not in _PAIRS_Z
)

# conjugation applied to each error component before insertion, per gate
_H_MAP = {"I": "I", "X": "Z", "Z": "X", "Y": "Y"}
_FRAMES = {"cx": (None, _H_MAP), "cz": (None, None), "swap": (None, None)}


@dataclass
class NoiseSpec:
    """Device noise parameters; all probabilities in [0, 1].

    spam holds the readout transition probabilities (p01, p10): the chance of
    reading |0> as 1 and |1> as 0. spam_error is the aggregate
    state-preparation-and-measurement infidelity quoted by the datasheet; it
    feeds only the closed-form error budget, while (p01, p10) drive the
    sampled readout flips and the mitigation matrix.
    """

    p2: float = 0.003
    z_bias: float = 0.6
    p1: float = 4e-5
    spam: tuple[float, float] = (0.001, 0.005)
    mem: float = 3e-4
    spam_error: float = 0.004

    def __post_init__(self):
        for name in ("p2", "z_bias", "p1", "mem", "spam_error"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        p01, p10 = self.spam
        if not (0.0 <= p01 <= 1.0 and 0.0 <= p10 <= 1.0):
            raise ValueError("spam probabilities outside [0, 1]")
        self.spam = (float(p01), float(p10))

    @classmethod
    def zero(cls) -> "NoiseSpec":
        return cls(p2=0.0, z_bias=0.0, p1=0.0, spam=(0.0, 0.0), mem=0.0, spam_error=0.0)

    def is_zero(self) -> bool:
        return self.p2 == self.p1 == self.mem == 0.0 and self.spam == (0.0, 0.0)

    def transition_matrix(self) -> np.ndarray:
        """Single-qubit readout transition matrix A with A[i,j] = P(read i | true j)."""
        p01, p10 = self.spam
        return np.array([[1.0 - p01, p10], [p01, 1.0 - p10]])

    def to_json(self) -> str:
        return json.dumps(
            {
                "p2": self.p2,
                "z_bias": self.z_bias,
                "p1": self.p1,
                "spam": list(self.spam),
                "mem": self.mem,
                "spam_error": self.spam_error,
            },
            indent=2,
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "NoiseSpec":
        doc = json.loads(text)
        return cls(
            p2=doc.get("p2", 0.0),
            z_bias=doc.get("z_bias", 0.0),
            p1=doc.get("p1", 0.0),
            spam=tuple(doc.get("spam", (0.0, 0.0))),
            mem=doc.get("mem", 0.0),
            spam_error=doc.get("spam_error", 0.0),
        )


def load_noise_spec(source: str | None) -> NoiseSpec | None:
    """Resolve a noise source: 'none' -> None, else a JSON file.

    Relative names are tried against the working directory, then
    $TORICSIM_CONFIG_DIR, then the package data directory (which ships the
    device defaults as h1-1.json).
    """
    if source is None or source == "none":
        return None
    candidates = [source]
    cfg_dir = os.environ.get("TORICSIM_CONFIG_DIR")
    if cfg_dir:
        candidates.append(os.path.join(cfg_dir, source))
    for path in candidates:
        if os.path.isfile(path):
            with open(path, "r", encoding="utf-8") as fh:
                return NoiseSpec.from_json(fh.read())
    name = source if source.endswith(".json") else source + ".json"
    pkg_file = resources.files("toricsim").joinpath("data", name)
    if pkg_file.is_file():
        return NoiseSpec.from_json(pkg_file.read_text(encoding="utf-8"))
    raise FileNotFoundError(f"noise spec {source!r} not found")


class NoiseModel:
    """Sampling front-end over a NoiseSpec, consumed by circuit.execute."""

    def __init__(self, spec: NoiseSpec):
        self.spec = spec
        z3 = spec.z_bias / 3.0
        other = (1.0 - spec.z_bias) / 12.0
        self._pair_probs = np.array([z3] * 3 + [other] * 12)
        self._pair_cum = np.cumsum(self._pair_probs)
        self._pairs = _PAIRS_Z + _PAIRS_OTHER

    def sample_gate_error(self, gate: str, qubits: tuple[int, ...], n: int,
                          rng: np.random.Generator) -> PauliOperator | None:
        """Optional Pauli error inserted after a gate, already frame-conjugated."""
        if len(qubits) == 1:
            if self.spec.p1 == 0.0 or rng.random() >= self.spec.p1:
                return None
            axis = _AXES[int(rng.integers(0, 3))]
            return PauliOperator.from_axes(n, {qubits[0]: axis})
        if self.spec.p2 == 0.0 or rng.random() >= self.spec.p2:
            return None
        idx = int(np.searchsorted(self._pair_cum, rng.random(), side="right"))
        idx = min(idx, len(self._pairs) - 1)
        pair = self._pairs[idx]
        frames = _FRAMES.get(gate, (None, None))
        axes = {}
        for q, letter, frame in zip(qubits, pair, frames):
            mapped = frame[letter] if frame else letter
            if mapped != "I":
                axes[q] = mapped
        if not axes:
            return None
        return PauliOperator.from_axes(n, axes)

    def apply_readout_flip(self, bit: int, rng: np.random.Generator) -> int:
        p01, p10 = self.spec.spam
        p = p01 if bit == 0 else p10
        if p > 0.0 and rng.random() < p:
            return bit ^ 1
        return bit

    def sample_memory_round(self, n: int, rng: np.random.Generator) -> PauliOperator | None:
        """Uniform Pauli on each qubit independently with probability mem."""
        if self.spec.mem == 0.0:
            return None
        hits = np.nonzero(rng.random(n) < self.spec.mem)[0]
        if len(hits) == 0:
            return None
        axes = {int(q): _AXES[int(rng.integers(0, 3))] for q in hits}
        return PauliOperator.from_axes(n, axes)


def make_noise(spec: NoiseSpec | None) -> NoiseModel | None:
    if spec is None or spec.is_zero():
        return None
    return NoiseModel(spec)


def error_budget(counts, n_qubits: int, n_spam_events: int, spec: NoiseSpec) -> float:
    """Closed-form damping factor from gate, memory, and SPAM error rates.

    (1-p2)^n_2q * (1-p1)^n_1q * (1-mem)^(depth*n_qubits) * (1-spam_error)^n_spam
    """
    if n_qubits < 0 or n_spam_events < 0:
        raise ValueError("counts must be nonnegative")
    return (
        (1.0 - spec.p2) ** counts.n_2q
        * (1.0 - spec.p1) ** counts.n_1q
        * (1.0 - spec.mem) ** (counts.depth_1q_equivalent * n_qubits)
        * (1.0 - spec.spam_error) ** n_spam_events
    )
