"""Destabilizer/stabilizer tableau simulation of pure stabilizer states.

The tableau keeps 2n generator rows (n destabilizers, then n stabilizers) in
the packed symplectic form of :mod:`toricsim.pauli`: row k is the operator
i**r[k] * X^x[k] Z^z[k]. In this form the Clifford conjugation rules are

    H:  swap x/z,  r += 2*x*z          CX: x_t ^= x_c, z_c ^= z_t
    S:  z ^= x,    r += x              CZ: z_t ^= x_c, z_c ^= x_t, r += 2*x_c*x_t
    X:  r += 2*z   Z: r += 2*x   Y: r += 2*(x^z)

and row products need only the crossing count of left-factor Z's with
right-factor X's. Rows carry a real sign at rest; intermediate products may
pass through +/-i.

Measurement follows the Aaronson-Gottesman scheme generalized to arbitrary
Pauli observables: if some stabilizer anticommutes with the observable the
outcome is a fresh random bit and the tableau is updated in place; otherwise
the outcome is computed from the destabilizer pattern and the state is left
untouched (no randomness is consumed).
"""

from __future__ import annotations

import math

import numpy as np

from . import _bits
from .pauli import PauliOperator

GATES_1Q = ("h", "s", "sdg", "x", "y", "z")
GATES_2Q = ("cx", "cz", "swap")


class StabilizerTableau:
    """Pure stabilizer state on n qubits, initialized to |0...0>."""

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("need at least one qubit")
        self.n = n
        w = _bits.n_words(n)
        self.x = np.zeros((2 * n, w), dtype=np.uint64)
        self.z = np.zeros((2 * n, w), dtype=np.uint64)
        self.r = np.zeros(2 * n, dtype=np.uint8)
        for q in range(n):
            _bits.set_bit(self.x[q], q, 1)          # destabilizer q = X_q
            _bits.set_bit(self.z[n + q], q, 1)      # stabilizer q = Z_q

    def copy(self) -> "StabilizerTableau":
        out = StabilizerTableau.__new__(StabilizerTableau)
        out.n = self.n
        out.x = self.x.copy()
        out.z = self.z.copy()
        out.r = self.r.copy()
        return out

    # -- row access ------------------------------------------------------

    def stabilizer(self, i: int) -> PauliOperator:
        return PauliOperator(self.n, self.x[self.n + i], self.z[self.n + i], int(self.r[self.n + i]))

    def destabilizer(self, i: int) -> PauliOperator:
        return PauliOperator(self.n, self.x[i], self.z[i], int(self.r[i]))

    def stabilizers(self) -> list[PauliOperator]:
        return [self.stabilizer(i) for i in range(self.n)]

    def __str__(self) -> str:
        return "\n".join(repr(s) for s in self.stabilizers())

    # -- gates -------------------------------------------------------------

    def apply(self, gate: str, qubits: tuple[int, ...]) -> None:
        gate = gate.lower()
        method = _GATE_METHODS.get(gate)
        if method is None:
            raise ValueError(f"unknown gate {gate!r}")
        arity = 1 if gate in GATES_1Q else 2
        if len(qubits) != arity:
            raise ValueError(f"{gate} takes {arity} qubit(s)")
        if arity == 2 and qubits[0] == qubits[1]:
            raise ValueError(f"{gate} needs distinct qubits")
        getattr(self, method)(*qubits)

    def _col(self, q: int):
        if not 0 <= q < self.n:
            raise ValueError(f"qubit {q} out of range")
        return q >> 6, np.uint64(q & 63), np.uint64(1) << np.uint64(q & 63)

    def h(self, q: int) -> None:
        w, b, m = self._col(q)
        xc = self.x[:, w] & m
        zc = self.z[:, w] & m
        self.r = (self.r + 2 * ((xc & zc) >> b).astype(np.uint8)) & 3
        self.x[:, w] ^= xc ^ zc
        self.z[:, w] ^= xc ^ zc

    def s(self, q: int) -> None:
        w, b, m = self._col(q)
        xc = self.x[:, w] & m
        self.r = (self.r + (xc >> b).astype(np.uint8)) & 3
        self.z[:, w] ^= xc

    def sdg(self, q: int) -> None:
        w, b, m = self._col(q)
        xc = self.x[:, w] & m
        self.r = (self.r + 3 * (xc >> b).astype(np.uint8)) & 3
        self.z[:, w] ^= xc

    def x_gate(self, q: int) -> None:
        w, b, m = self._col(q)
        self.r = (self.r + 2 * ((self.z[:, w] & m) >> b).astype(np.uint8)) & 3

    def y_gate(self, q: int) -> None:
        w, b, m = self._col(q)
        flip = ((self.x[:, w] ^ self.z[:, w]) & m) >> b
        self.r = (self.r + 2 * flip.astype(np.uint8)) & 3

    def z_gate(self, q: int) -> None:
        w, b, m = self._col(q)
        self.r = (self.r + 2 * ((self.x[:, w] & m) >> b).astype(np.uint8)) & 3

    def cx(self, c: int, t: int) -> None:
        if c == t:
            raise ValueError("control equals target")
        wc, bc, mc = self._col(c)
        wt, bt, mt = self._col(t)
        xc = (self.x[:, wc] & mc) >> bc
        zt = (self.z[:, wt] & mt) >> bt
        self.x[:, wt] ^= xc << bt
        self.z[:, wc] ^= zt << bc

    def cz(self, c: int, t: int) -> None:
        if c == t:
            raise ValueError("control equals target")
        wc, bc, mc = self._col(c)
        wt, bt, mt = self._col(t)
        xc = (self.x[:, wc] & mc) >> bc
        xt = (self.x[:, wt] & mt) >> bt
        self.r = (self.r + 2 * (xc & xt).astype(np.uint8)) & 3
        self.z[:, wt] ^= xc << bt
        self.z[:, wc] ^= xt << bc

    def swap(self, a: int, b: int) -> None:
        if a == b:
            raise ValueError("swap needs distinct qubits")
        wa, ba, ma = self._col(a)
        wb, bb, mb = self._col(b)
        for arr in (self.x, self.z):
            va = (arr[:, wa] & ma) >> ba
            vb = (arr[:, wb] & mb) >> bb
            arr[:, wa] ^= (va ^ vb) << ba
            arr[:, wb] ^= (va ^ vb) << bb

    def apply_pauli(self, p: PauliOperator) -> None:
        """Apply a Pauli as a gate: rows anticommuting with it flip sign."""
        self._check_pauli(p, allow_imaginary=True)
        anti = self._anti_mask(p)
        self.r = (self.r + 2 * anti.astype(np.uint8)) & 3

    # -- measurement -------------------------------------------------------

    def _check_pauli(self, p: PauliOperator, allow_imaginary: bool = False) -> None:
        if p.n != self.n:
            raise ValueError("operator size does not match state")
        if not allow_imaginary and not p.has_real_phase():
            raise ValueError("operator must carry a +/-1 phase")

    def _anti_mask(self, p: PauliOperator) -> np.ndarray:
        """Boolean (2n,) mask of rows anticommuting with p."""
        cross = (self.x & p.z[None, :]) ^ (self.z & p.x[None, :])
        return (np.bitwise_count(cross).sum(axis=1) & 1).astype(bool)

    def _rowmult_into(self, rows: np.ndarray, src: int) -> None:
        """row_j := row_j * row_src for every j in rows (vectorized)."""
        kappa = (np.bitwise_count(self.z[rows] & self.x[src][None, :]).sum(axis=1) & 1).astype(np.uint8)
        self.r[rows] = (self.r[rows] + self.r[src] + 2 * kappa) & 3
        self.x[rows] ^= self.x[src][None, :]
        self.z[rows] ^= self.z[src][None, :]

    def _deterministic_exponent(self, p: PauliOperator, anti: np.ndarray) -> int:
        """Phase exponent of (product of stabilizers matching p) minus p's.

        Caller guarantees no stabilizer anticommutes with p, so the product of
        stabilizer rows flagged by the destabilizer pattern equals +/-p.
        """
        acc_x = _bits.zeros(self.n)
        acc_z = _bits.zeros(self.n)
        acc_r = 0
        for i in np.nonzero(anti[: self.n])[0]:
            s = self.n + int(i)
            acc_r = (acc_r + int(self.r[s]) + 2 * _bits.parity(acc_z & self.x[s])) & 3
            acc_x ^= self.x[s]
            acc_z ^= self.z[s]
        if not (np.array_equal(acc_x, p.x) and np.array_equal(acc_z, p.z)):
            raise AssertionError("destabilizer pattern did not reproduce the observable")
        return (acc_r - p.r) & 3

    def expect_pauli(self, p: PauliOperator) -> int:
        """Exact expectation of a +/-1-phase Pauli: +1, -1, or 0."""
        self._check_pauli(p)
        anti = self._anti_mask(p)
        if anti[self.n:].any():
            return 0
        d = self._deterministic_exponent(p, anti)
        if d == 0:
            return 1
        if d == 2:
            return -1
        raise AssertionError("imaginary relative phase in deterministic branch")

    def measure_pauli(self, p: PauliOperator, rng: np.random.Generator) -> int:
        """Projectively measure a +/-1-phase Pauli; returns +1 or -1.

        Deterministic outcomes leave the state untouched and consume no
        randomness; random outcomes draw one bit from rng and collapse the
        state so that outcome*p joins the stabilizer group.
        """
        self._check_pauli(p)
        anti = self._anti_mask(p)
        stab_anti = np.nonzero(anti[self.n:])[0]
        if len(stab_anti) == 0:
            d = self._deterministic_exponent(p, anti)
            return 1 if d == 0 else -1
        pivot = self.n + int(stab_anti[0])
        outcome = 1 if int(rng.integers(0, 2)) == 0 else -1
        self._collapse(p, anti, pivot, outcome)
        return outcome

    def project(self, p: PauliOperator, outcome: int) -> None:
        """Force the state into the given eigenspace of p (post-selection).

        Raises if the requested branch has zero amplitude.
        """
        self._check_pauli(p)
        if outcome not in (1, -1):
            raise ValueError("outcome must be +/-1")
        anti = self._anti_mask(p)
        stab_anti = np.nonzero(anti[self.n:])[0]
        if len(stab_anti) == 0:
            d = self._deterministic_exponent(p, anti)
            actual = 1 if d == 0 else -1
            if actual != outcome:
                raise ValueError("projection onto a zero-amplitude branch")
            return
        self._collapse(p, anti, self.n + int(stab_anti[0]), outcome)

    def _collapse(self, p: PauliOperator, anti: np.ndarray, pivot: int, outcome: int) -> None:
        fix = anti.copy()
        fix[pivot] = False
        rows = np.nonzero(fix)[0]
        if len(rows):
            self._rowmult_into(rows, pivot)
        dest = pivot - self.n
        self.x[dest] = self.x[pivot]
        self.z[dest] = self.z[pivot]
        self.r[dest] = self.r[pivot]
        self.x[pivot] = p.x
        self.z[pivot] = p.z
        self.r[pivot] = p.r if outcome == 1 else (p.r + 2) & 3

    def measure_z(self, q: int, rng: np.random.Generator) -> int:
        """Computational-basis measurement of one qubit; returns the bit."""
        v = self.measure_pauli(PauliOperator.single(self.n, "Z", q), rng)
        return 0 if v == 1 else 1

    def reset(self, q: int, rng: np.random.Generator) -> None:
        if self.measure_z(q, rng):
            self.x_gate(q)

    # -- entropy and comparison --------------------------------------------

    def renyi2_exact(self, subset) -> float:
        """Renyi-2 entropy of a qubit subset, in nats.

        Equals (|A| - g) ln 2 with g the number of independent stabilizer
        group elements supported entirely inside A; for stabilizer states all
        Renyi orders coincide.
        """
        subset = sorted(set(subset))
        if any(q < 0 or q >= self.n for q in subset):
            raise ValueError("subset out of range")
        if not subset:
            return 0.0
        outside = [q for q in range(self.n) if q not in subset]
        rows = []
        for i in range(self.n):
            s = self.n + i
            val = 0
            for j, q in enumerate(outside):
                val |= _bits.get_bit(self.x[s], q) << (2 * j)
                val |= _bits.get_bit(self.z[s], q) << (2 * j + 1)
            rows.append(val)
        g = self.n - _bits.rank_gf2(rows, 2 * len(outside))
        return (len(subset) - g) * math.log(2.0)

    def canonical_stabilizers(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Phase-tracked RREF of the stabilizer rows (unique per state)."""
        t = self.copy()
        n = t.n
        rows = list(range(n, 2 * n))

        def bit(kind, row, q):
            arr = t.x if kind == 0 else t.z
            return _bits.get_bit(arr[row], q)

        def mult(h, i):
            kappa = 2 * _bits.parity(t.z[h] & t.x[i])
            t.r[h] = (int(t.r[h]) + int(t.r[i]) + kappa) & 3
            t.x[h] ^= t.x[i]
            t.z[h] ^= t.z[i]

        pivot = 0
        for kind in (0, 1):
            for q in range(n):
                hit = next((k for k in range(pivot, n) if bit(kind, rows[k], q)), None)
                if hit is None:
                    continue
                rows[pivot], rows[hit] = rows[hit], rows[pivot]
                for k in range(n):
                    if k != pivot and bit(kind, rows[k], q):
                        mult(rows[k], rows[pivot])
                pivot += 1
        order = rows
        return (
            np.stack([t.x[i] for i in order]),
            np.stack([t.z[i] for i in order]),
            np.array([t.r[i] for i in order], dtype=np.uint8),
        )

    # -- checks --------------------------------------------------------------

    def validate(self) -> None:
        """Debug validator for the tableau invariants; raises on violation."""
        n = self.n
        ints = [_bits.to_int(self.x[i]) | (_bits.to_int(self.z[i]) << (64 * _bits.n_words(n))) for i in range(2 * n)]
        if _bits.rank_gf2(ints, 2 * 64 * _bits.n_words(n)) != 2 * n:
            raise AssertionError("tableau rows are not symplectically independent")
        for i in range(2 * n):
            y_count = _bits.popcount(self.x[i] & self.z[i])
            if (int(self.r[i]) - y_count) & 1:
                raise AssertionError(f"row {i} has an imaginary sign")
        for i in range(n):
            for j in range(n):
                si = self.stabilizer(i)
                if not si.commutes(self.stabilizer(j)):
                    raise AssertionError(f"stabilizers {i},{j} anticommute")
                want = i != j
                if self.destabilizer(j).commutes(si) != want:
                    raise AssertionError(f"destabilizer {j} vs stabilizer {i} pattern broken")


# the Pauli gate names collide with the x/z bit arrays, hence the mapping
_GATE_METHODS = {
    "h": "h",
    "s": "s",
    "sdg": "sdg",
    "x": "x_gate",
    "y": "y_gate",
    "z": "z_gate",
    "cx": "cx",
    "cz": "cz",
    "swap": "swap",
}


def new_state(n: int) -> StabilizerTableau:
    """Fresh |0...0> state on n qubits."""
    return StabilizerTableau(n)


def states_equal(a: StabilizerTableau, b: StabilizerTableau) -> bool:
    """True iff the two tableaus stabilize the same pure state (incl. signs)."""
    if a.n != b.n:
        raise ValueError("qubit counts differ")
    ax, az, ar = a.canonical_stabilizers()
    bx, bz, br = b.canonical_stabilizers()
    return np.array_equal(ax, bx) and np.array_equal(az, bz) and np.array_equal(ar, br)
