"""n-qubit Pauli operators in symplectic (x|z) form with exact phase tracking.

A Pauli is stored as two packed bit vectors plus a phase exponent r with the
operator equal to i**r * prod_q X_q^{x_q} Z_q^{z_q}. Under this convention
(x=1, z=1) is X*Z = -iY, so Y on one qubit is represented by x=z=1, r=1.
Products track phases exactly over {+1, +i, -1, -i}; simulator APIs reject
operators whose overall phase is imaginary.
"""

from __future__ import annotations

from typing import Iterable, Mapping

import numpy as np

from . import _bits

_PHASES = {0: 1, 1: 1j, 2: -1, 3: -1j}
_AXIS_XZ = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


def _axis_phase(letter: str) -> int:
    # Y = i * X*Z, so a Y factor adds one to the i-exponent.
    return 1 if letter == "Y" else 0


class PauliOperator:
    """Immutable-by-convention Pauli on n qubits.

    Attributes:
        n: qubit count.
        x, z: packed uint64 bit vectors (length ceil(n/64)).
        r: phase exponent, operator = i**r * X^x Z^z.
    """

    __slots__ = ("n", "x", "z", "r")

    def __init__(self, n: int, x: np.ndarray, z: np.ndarray, r: int = 0):
        if n < 1:
            raise ValueError("PauliOperator needs n >= 1")
        self.n = n
        self.x = np.array(x, dtype=np.uint64)
        self.z = np.array(z, dtype=np.uint64)
        self.r = r & 3
        if len(self.x) != _bits.n_words(n) or len(self.z) != _bits.n_words(n):
            raise ValueError("bit vector length does not match qubit count")

    # -- constructors -------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "PauliOperator":
        return cls(n, _bits.zeros(n), _bits.zeros(n), 0)

    @classmethod
    def from_label(cls, label: str, sign: int = 1) -> "PauliOperator":
        """Build from a string like "XIZY" (qubit 0 is the leftmost letter)."""
        n = len(label)
        p = cls.identity(n)
        r = 0
        for q, letter in enumerate(label.upper()):
            if letter not in _AXIS_XZ:
                raise ValueError(f"bad Pauli letter {letter!r}")
            xb, zb = _AXIS_XZ[letter]
            _bits.set_bit(p.x, q, xb)
            _bits.set_bit(p.z, q, zb)
            r += _axis_phase(letter)
        p.r = (r + (2 if sign == -1 else 0)) & 3
        return p

    @classmethod
    def from_axes(cls, n: int, axes: Mapping[int, str], sign: int = 1) -> "PauliOperator":
        """Build from {qubit: letter}; unlisted qubits are identity."""
        p = cls.identity(n)
        r = 0
        for q, letter in axes.items():
            xb, zb = _AXIS_XZ[letter.upper()]
            if not 0 <= q < n:
                raise ValueError(f"qubit {q} out of range")
            _bits.set_bit(p.x, q, xb)
            _bits.set_bit(p.z, q, zb)
            r += _axis_phase(letter.upper())
        p.r = (r + (2 if sign == -1 else 0)) & 3
        return p

    @classmethod
    def single(cls, n: int, axis: str, qubit: int, sign: int = 1) -> "PauliOperator":
        return cls.from_axes(n, {qubit: axis}, sign)

    @classmethod
    def z_string(cls, n: int, qubits: Iterable[int], sign: int = 1) -> "PauliOperator":
        return cls.from_axes(n, {q: "Z" for q in qubits}, sign)

    @classmethod
    def x_string(cls, n: int, qubits: Iterable[int], sign: int = 1) -> "PauliOperator":
        return cls.from_axes(n, {q: "X" for q in qubits}, sign)

    # -- basic queries -------------------------------------------------

    @property
    def phase(self) -> complex:
        """Overall scalar prefactor, with Y factors already absorbed.

        For example from_label("Y").phase == 1 even though the internal
        exponent is 1: the exposed phase is relative to the standard
        {I, X, Y, Z} tensor basis.
        """
        y_count = _bits.popcount(self.x & self.z)
        return _PHASES[(self.r - y_count) & 3]

    @property
    def sign(self) -> int:
        ph = self.phase
        if ph == 1:
            return 1
        if ph == -1:
            return -1
        raise ValueError("Pauli has imaginary phase")

    def has_real_phase(self) -> bool:
        return ((self.r - _bits.popcount(self.x & self.z)) & 3) in (0, 2)

    def axis(self, q: int) -> str:
        xb = _bits.get_bit(self.x, q)
        zb = _bits.get_bit(self.z, q)
        return "IXZY"[xb + 2 * zb]

    def support(self) -> list[int]:
        nz = self.x | self.z
        return [q for q in range(self.n) if _bits.get_bit(nz, q)]

    def weight(self) -> int:
        return _bits.popcount(self.x | self.z)

    def commutes(self, other: "PauliOperator") -> bool:
        """True iff the symplectic inner product of the bit vectors is even."""
        if self.n != other.n:
            raise ValueError("qubit counts differ")
        return _bits.parity((self.x & other.z) ^ (self.z & other.x)) == 0

    # -- algebra -------------------------------------------------------

    def __mul__(self, other: "PauliOperator") -> "PauliOperator":
        if self.n != other.n:
            raise ValueError("qubit counts differ")
        r = (self.r + other.r + phase_exponent(self.x, self.z, other.x, other.z)) & 3
        return PauliOperator(self.n, self.x ^ other.x, self.z ^ other.z, r)

    def __neg__(self) -> "PauliOperator":
        return PauliOperator(self.n, self.x, self.z, (self.r + 2) & 3)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliOperator):
            return NotImplemented
        return (
            self.n == other.n
            and self.r == other.r
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.z, other.z)
        )

    def __hash__(self) -> int:
        return hash((self.n, self.r, self.x.tobytes(), self.z.tobytes()))

    def same_content(self, other: "PauliOperator") -> bool:
        """Equal up to overall phase."""
        return (
            self.n == other.n
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.z, other.z)
        )

    # -- formatting ----------------------------------------------------

    def label(self) -> str:
        return "".join(self.axis(q) for q in range(self.n))

    def compact(self) -> str:
        """Support-only form like "XXXX@[0,1,4,5]" with a sign prefix if -1."""
        supp = self.support()
        letters = "".join(self.axis(q) for q in supp)
        prefix = "-" if self.sign == -1 else ""
        return f"{prefix}{letters}@[{','.join(str(q) for q in supp)}]"

    @classmethod
    def from_compact(cls, text: str, n: int) -> "PauliOperator":
        text = text.strip()
        sign = 1
        if text.startswith("-"):
            sign = -1
            text = text[1:]
        elif text.startswith("+"):
            text = text[1:]
        letters, _, rest = text.partition("@")
        rest = rest.strip()
        if not (rest.startswith("[") and rest.endswith("]")):
            raise ValueError(f"bad compact Pauli {text!r}")
        qubits = [int(t) for t in rest[1:-1].split(",") if t.strip() != ""]
        if len(qubits) != len(letters):
            raise ValueError("letter/qubit count mismatch")
        return cls.from_axes(n, dict(zip(qubits, letters)), sign)

    def __repr__(self) -> str:
        ph = {1: "+", -1: "-", 1j: "+i", -1j: "-i"}[_PHASES[(self.r - _bits.popcount(self.x & self.z)) & 3]]
        return f"{ph}{self.label()}"


def phase_exponent(x1: np.ndarray, z1: np.ndarray, x2: np.ndarray, z2: np.ndarray) -> int:
    """i-exponent picked up when multiplying (X^x1 Z^z1) * (X^x2 Z^z2).

    Reordering to canonical X^x Z^z form moves each Z of the left factor past
    each X of the right factor on the same qubit, at -1 apiece.
    """
    return (2 * _bits.popcount(z1 & x2)) & 3
