"""The 24 single-qubit Cliffords, as measurement-basis rotations.

Each element is generated as a shortest word in {H, S}, deduplicated by its
action on (X, Z), and the full group is sorted into a stable index 0..23 by
that action. For randomized measurements only two views matter: the gate
word to append before a computational-basis readout, and the signed Pauli
axis P with U^dag Z U = sign * P, i.e. which observable the readout samples.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

_CONJ = {
    # gate -> {axis: (axis', sign')}
    "h": {"X": ("Z", 1), "Y": ("Y", -1), "Z": ("X", 1)},
    "s": {"X": ("Y", 1), "Y": ("X", -1), "Z": ("Z", 1)},
}


def _conjugate(word: tuple[str, ...], axis: str, sign: int) -> tuple[str, int]:
    """Image of sign*axis under U . U^dag, with U the word applied left-to-right."""
    for gate in word:
        axis, s = _CONJ[gate][axis]
        sign *= s
    return axis, sign


@dataclass(frozen=True)
class SingleQubitClifford:
    index: int
    word: tuple[str, ...]            # gates in application order
    x_image: tuple[str, int]         # U X U^dag
    z_image: tuple[str, int]         # U Z U^dag
    meas_axis: str                   # U^dag Z U = meas_sign * meas_axis
    meas_sign: int


def _build_group() -> list[SingleQubitClifford]:
    seen: dict[tuple, tuple[str, ...]] = {}
    queue = deque([()])
    while queue:
        word = queue.popleft()
        key = (_conjugate(word, "X", 1), _conjugate(word, "Z", 1))
        if key in seen:
            continue
        seen[key] = word
        for gate in ("h", "s"):
            queue.append(word + (gate,))
    assert len(seen) == 24
    ordered = sorted(seen.items(), key=lambda kv: kv[0])
    out = []
    for index, ((x_img, z_img), word) in enumerate(ordered):
        # find the signed axis that U maps onto Z: U P U^dag = s Z  =>  U^dag Z U = s P
        for axis in "XYZ":
            img_axis, img_sign = _conjugate(word, axis, 1)
            if img_axis == "Z":
                meas_axis, meas_sign = axis, img_sign
                break
        out.append(SingleQubitClifford(index, word, x_img, z_img, meas_axis, meas_sign))
    return out


CLIFFORD_24: list[SingleQubitClifford] = _build_group()

# indices of the three Cliffords that rotate a plain X/Y/Z measurement onto Z,
# with positive sign: used when callers ask for basis tags instead of indices
BASIS_TAG_INDEX: dict[str, int] = {}
for _c in CLIFFORD_24:
    if _c.meas_sign == 1 and _c.meas_axis not in BASIS_TAG_INDEX:
        # prefer the shortest word for each axis
        cur = BASIS_TAG_INDEX.get(_c.meas_axis)
        BASIS_TAG_INDEX[_c.meas_axis] = _c.index
for _axis in "XYZ":
    candidates = [c for c in CLIFFORD_24 if c.meas_axis == _axis and c.meas_sign == 1]
    BASIS_TAG_INDEX[_axis] = min(candidates, key=lambda c: (len(c.word), c.index)).index
del _c, _axis, candidates


def clifford(index: int) -> SingleQubitClifford:
    return CLIFFORD_24[index]


def measured_basis(index: int) -> tuple[str, int]:
    c = CLIFFORD_24[index]
    return c.meas_axis, c.meas_sign
