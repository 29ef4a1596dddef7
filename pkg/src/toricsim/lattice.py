"""Plaquette geometry for the 4x4 torus and the 15-qubit defect lattice.

Qubits sit on the vertices of a square grid with periodic boundaries and are
indexed row-major; a plaquette is the 2x2 block labeled by its upper-left
qubit, supported on (r,c),(r,c+1),(r+1,c),(r+1,c+1) with wraparound. Blocks
with odd r+c carry X-type stabilizers, even r+c Z-type, so every qubit sits
in exactly two plaquettes of each type.

The defect lattice removes one interior site. The four broken blocks around
it merge pairwise (vertically) into two pentagon stabilizers that mix X and Z
content; their exact Pauli content is derived by a constraint solver rather
than hard-coded, see :func:`derive_defect_stabilizers`.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

from .pauli import PauliOperator
from .tableau import StabilizerTableau


@dataclass
class Lattice:
    name: str
    rows: int
    cols: int
    n_qubits: int
    qubit_index: dict[tuple[int, int], int]
    x_plaquettes: list[tuple[int, PauliOperator]]
    z_plaquettes: list[tuple[int, PauliOperator]]
    defect_plaquettes: list[tuple[int, PauliOperator]] = field(default_factory=list)
    logical_ops: dict[str, PauliOperator] = field(default_factory=dict)
    removed_sites: list[tuple[int, int]] = field(default_factory=list)

    # -- lookups -----------------------------------------------------------

    def coord(self, qubit: int) -> tuple[int, int]:
        for rc, q in self.qubit_index.items():
            if q == qubit:
                return rc
        raise KeyError(qubit)

    def all_plaquettes(self) -> list[tuple[int, PauliOperator]]:
        return sorted(
            self.x_plaquettes + self.z_plaquettes + self.defect_plaquettes,
            key=lambda t: t[0],
        )

    def plaquette(self, label: int) -> PauliOperator:
        for lab, op in self.all_plaquettes():
            if lab == label:
                return op
        raise KeyError(f"no plaquette labeled {label}")

    def plaquette_kind(self, label: int) -> str:
        for lab, _ in self.x_plaquettes:
            if lab == label:
                return "x"
        for lab, _ in self.z_plaquettes:
            if lab == label:
                return "z"
        for lab, _ in self.defect_plaquettes:
            if lab == label:
                return "defect"
        raise KeyError(label)

    def labels(self) -> list[int]:
        return [lab for lab, _ in self.all_plaquettes()]

    def block_qubits(self, r: int, c: int) -> list[int]:
        """The 2x2 block at (r,c) with wraparound; raises if a site is missing."""
        sites = [
            (r % self.rows, c % self.cols),
            (r % self.rows, (c + 1) % self.cols),
            ((r + 1) % self.rows, c % self.cols),
            ((r + 1) % self.rows, (c + 1) % self.cols),
        ]
        try:
            return [self.qubit_index[s] for s in sites]
        except KeyError as exc:
            raise KeyError(f"block ({r},{c}) touches removed site {exc.args[0]}") from exc

    def validate(self) -> None:
        ops = self.all_plaquettes()
        for (la, a), (lb, b) in itertools.combinations(ops, 2):
            if not a.commutes(b):
                raise AssertionError(f"plaquettes {la} and {lb} anticommute")
        for name, op in self.logical_ops.items():
            for lab, p in ops:
                if not op.commutes(p):
                    raise AssertionError(f"logical {name} anticommutes with plaquette {lab}")

    # -- serialization -------------------------------------------------------

    def to_json(self) -> str:
        doc = {
            "name": self.name,
            "rows": self.rows,
            "cols": self.cols,
            "n_qubits": self.n_qubits,
            "removed_sites": [list(s) for s in self.removed_sites],
            "x_plaquettes": {str(l): op.compact() for l, op in self.x_plaquettes},
            "z_plaquettes": {str(l): op.compact() for l, op in self.z_plaquettes},
            "defect_plaquettes": {str(l): op.compact() for l, op in self.defect_plaquettes},
            "logicals": {k: v.compact() for k, v in self.logical_ops.items()},
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Lattice":
        doc = json.loads(text)
        n = doc["n_qubits"]
        removed = {tuple(s) for s in doc["removed_sites"]}
        index = {}
        q = 0
        for r in range(doc["rows"]):
            for c in range(doc["cols"]):
                if (r, c) in removed:
                    continue
                index[(r, c)] = q
                q += 1

        def load(key):
            return [(int(l), PauliOperator.from_compact(s, n)) for l, s in sorted(doc[key].items(), key=lambda kv: int(kv[0]))]

        return cls(
            name=doc["name"],
            rows=doc["rows"],
            cols=doc["cols"],
            n_qubits=n,
            qubit_index=index,
            x_plaquettes=load("x_plaquettes"),
            z_plaquettes=load("z_plaquettes"),
            defect_plaquettes=load("defect_plaquettes"),
            logical_ops={k: PauliOperator.from_compact(s, n) for k, s in doc["logicals"].items()},
            removed_sites=sorted(removed),
        )


def build_torus(rows: int = 4, cols: int = 4) -> Lattice:
    """Even-by-even torus with row-major qubit ids and checkerboard plaquettes."""
    if rows % 2 or cols % 2 or rows < 2 or cols < 2:
        raise ValueError("torus needs even rows and cols >= 2")
    n = rows * cols
    index = {(r, c): r * cols + c for r in range(rows) for c in range(cols)}
    xp, zp = [], []
    for r in range(rows):
        for c in range(cols):
            label = index[(r, c)]
            support = [
                index[(r, c)],
                index[(r, (c + 1) % cols)],
                index[((r + 1) % rows, c)],
                index[((r + 1) % rows, (c + 1) % cols)],
            ]
            if (r + c) % 2 == 1:
                xp.append((label, PauliOperator.x_string(n, support)))
            else:
                zp.append((label, PauliOperator.z_string(n, support)))
    logicals: dict[str, PauliOperator] = {}
    for r in range(rows):
        logicals[f"Z_hori_{r}"] = PauliOperator.z_string(n, [index[(r, c)] for c in range(cols)])
    for c in range(cols):
        logicals[f"Z_vert_{c}"] = PauliOperator.z_string(n, [index[(r, c)] for r in range(rows)])
    lat = Lattice(
        name=f"torus{rows}x{cols}",
        rows=rows,
        cols=cols,
        n_qubits=n,
        qubit_index=index,
        x_plaquettes=xp,
        z_plaquettes=zp,
        logical_ops=logicals,
    )
    lat.validate()
    return lat


def derive_defect_stabilizers(
    regular: list[tuple[int, PauliOperator]],
    supports: list[list[int]],
    n: int,
) -> list[PauliOperator]:
    """Solve for the pentagon stabilizers on the given supports.

    Each returned operator is nonidentity on every site of its support,
    commutes with every regular plaquette and with the other defect operator.
    Among valid sign/content choices ties break to the lexicographically
    smallest (x_bits, z_bits); the phase is fixed to +1.
    """
    letter_sets = []
    for support in supports:
        found = []
        for letters in itertools.product("XYZ", repeat=len(support)):
            cand = PauliOperator.from_axes(n, dict(zip(support, letters)))
            if all(cand.commutes(op) for _, op in regular):
                found.append(cand)
        if not found:
            raise ValueError(f"no stabilizer exists on support {support}")
        letter_sets.append(found)
    pairs = [
        (a, b)
        for a in letter_sets[0]
        for b in letter_sets[1]
        if a.commutes(b)
    ]
    if not pairs:
        raise ValueError("no mutually commuting defect pair exists")
    key = lambda p: (p.x.tobytes(), p.z.tobytes())
    return list(min(pairs, key=lambda ab: (key(ab[0]), key(ab[1]))))


def build_defect_lattice() -> Lattice:
    """4x4 grid with the central site (2,2) removed; 15 qubits, 14 plaquettes.

    The removed site and the 0..14 relabeling are fixed so that the paper's
    operator indices transfer literally; the four broken blocks merge
    vertically into pentagon stabilizers labeled 5 (left) and 6 (right).
    """
    rows = cols = 4
    removed = (2, 2)
    index: dict[tuple[int, int], int] = {}
    q = 0
    for r in range(rows):
        for c in range(cols):
            if (r, c) == removed:
                continue
            index[(r, c)] = q
            q += 1
    n = q  # 15

    xp, zp = [], []
    for r in range(rows):
        for c in range(cols):
            sites = [(r, c), (r, (c + 1) % cols), ((r + 1) % rows, c), ((r + 1) % rows, (c + 1) % cols)]
            if removed in sites or (r, c) == removed:
                continue
            label = index[(r, c)]
            support = [index[s] for s in sites]
            if (r + c) % 2 == 1:
                xp.append((label, PauliOperator.x_string(n, support)))
            else:
                zp.append((label, PauliOperator.z_string(n, support)))

    # broken blocks around the removed site, merged vertically: the left
    # defect joins blocks (1,1)+(2,1), the right one (1,2)+(2,2)
    r0, c0 = removed

    def remaining(br, bc):
        sites = [(br, bc), (br, bc + 1), (br + 1, bc), (br + 1, bc + 1)]
        return [index[s] for s in sites if s != removed]

    left_support = sorted(set(remaining(r0 - 1, c0 - 1) + remaining(r0, c0 - 1)))
    right_support = sorted(set(remaining(r0 - 1, c0) + remaining(r0, c0)))
    defects = derive_defect_stabilizers(xp + zp, [left_support, right_support], n)
    labels = [index[(r0 - 1, c0 - 1)], index[(r0 - 1, c0)]]
    defect_plaquettes = list(zip(labels, defects))

    lat = Lattice(
        name="defect15",
        rows=rows,
        cols=cols,
        n_qubits=n,
        qubit_index=index,
        x_plaquettes=sorted(xp),
        z_plaquettes=sorted(zp),
        defect_plaquettes=defect_plaquettes,
        removed_sites=[removed],
    )
    lat.validate()
    return lat


class AnyonConfig(dict):
    """Expected plaquette signs, {label: +1 or -1}; +1 entries may be omitted."""

    def __init__(self, lattice: Lattice, signs: dict[int, int] | None = None):
        super().__init__()
        self._labels = set(lattice.labels())
        for label, sign in (signs or {}).items():
            self[label] = sign

    def __setitem__(self, label: int, sign: int):
        if label not in self._labels:
            raise KeyError(f"no plaquette labeled {label}")
        if sign not in (1, -1):
            raise ValueError("sign must be +/-1")
        super().__setitem__(label, sign)

    def sign(self, label: int) -> int:
        return self.get(label, 1)


def predict_anyon_config(lattice: Lattice, moves: list[PauliOperator]) -> AnyonConfig:
    """Plaquette signs after applying single-qubit moves to the ground state."""
    cfg = AnyonConfig(lattice)
    for label, op in lattice.all_plaquettes():
        flips = sum(0 if m.commutes(op) else 1 for m in moves)
        if flips % 2:
            cfg[label] = -1
    return cfg


def logical_expectations(state: StabilizerTableau, lattice: Lattice) -> dict[str, float]:
    """Exact expectations of every logical string plus translation averages."""
    if state.n != lattice.n_qubits:
        raise ValueError("state size does not match lattice")
    out: dict[str, float] = {}
    groups: dict[str, list[float]] = {}
    for name, op in lattice.logical_ops.items():
        val = float(state.expect_pauli(op))
        out[name] = val
        stem = name.rsplit("_", 1)[0]
        groups.setdefault(stem, []).append(val)
    for stem, vals in groups.items():
        out[f"{stem}_avg"] = sum(vals) / len(vals)
    return out
