"""Statistical post-processing: purities, entropies, TEE, SPAM, shadows.

Purity follows the randomized-measurement estimator: for each local-basis
setting the Hamming-weighted double sum

    X_u = 2^{N_A} sum_{s,s'} (-2)^{-D(s,s')} P(s) P(s')

with the diagonal P^2 replaced by the unbiased P(P*M - 1)/(M - 1), and the
purity is the average of X_u over settings. The kernel factorizes per qubit,
so X_u is evaluated by contracting the restricted outcome distribution with
[[1, -1/2], [-1/2, 1]] along each axis.

Basis settings are single-qubit Cliffords, which for these second-moment
estimators are equivalent to uniformly random X/Y/Z measurements. They keep
everything inside the stabilizer formalism at the price of substantially
larger fluctuations than continuous local unitaries: a weight-w stabilizer
correlation is only visible in a setting whose bases match it axis-by-axis,
which happens with probability 3^-w per setting. Entropy estimates inherit
that lumpiness through the logarithm; see the notes on tee_region_mean.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _bits
from .cliffords import CLIFFORD_24, BASIS_TAG_INDEX, measured_basis
from .lattice import Lattice
from .pauli import PauliOperator
from .report import ExperimentReport, mean_and_se
from .tableau import StabilizerTableau

_KERNEL = np.array([[1.0, -0.5], [-0.5, 1.0]])


# -- randomized-measurement dataset -------------------------------------------


@dataclass
class RandomizedMeasurementDataset:
    """(setting, shot) -> bitstring records with per-qubit Clifford bases."""

    n_qubits: int
    settings: list[tuple[int, ...]]
    bitstrings: list[np.ndarray]
    retained: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        if not self.retained:
            self.retained = [np.ones(len(b), dtype=bool) for b in self.bitstrings]
        self.validate()

    def validate(self) -> None:
        if len(self.settings) != len(self.bitstrings):
            raise ValueError("settings and bitstring blocks differ in length")
        n_m = {len(b) for b in self.bitstrings}
        if len(n_m) > 1:
            raise ValueError("every setting must hold the same number of records")
        for s, b, r in zip(self.settings, self.bitstrings, self.retained):
            if len(s) != self.n_qubits or b.shape[1] != self.n_qubits:
                raise ValueError("bitstring length does not match qubit count")
            if len(r) != len(b):
                raise ValueError("retained mask length mismatch")

    @property
    def n_settings(self) -> int:
        return len(self.settings)

    @property
    def shots_per_setting(self) -> int:
        return len(self.bitstrings[0]) if self.bitstrings else 0

    def bases(self, setting_id: int) -> list[tuple[str, int]]:
        """Signed measured Pauli axis per qubit for one setting."""
        return [measured_basis(c) for c in self.settings[setting_id]]

    def kept(self, setting_id: int, keep_all: bool = False) -> np.ndarray:
        bits = self.bitstrings[setting_id]
        return bits if keep_all else bits[self.retained[setting_id]]

    def save_ndjson(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for sid, (setting, block, kept) in enumerate(zip(self.settings, self.bitstrings, self.retained)):
                for row, keep in zip(block, kept):
                    rec = {
                        "setting_id": sid,
                        "bases": list(map(int, setting)),
                        "bitstring": "".join(str(int(b)) for b in row),
                    }
                    if not keep:
                        rec["herald"] = True
                    fh.write(json.dumps(rec, sort_keys=True) + "\n")

    @classmethod
    def load_ndjson(cls, path: str) -> "RandomizedMeasurementDataset":
        settings: dict[int, tuple[int, ...]] = {}
        rows: dict[int, list] = {}
        kept: dict[int, list] = {}
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                rec = json.loads(line)
                sid = rec["setting_id"]
                settings.setdefault(sid, tuple(rec["bases"]))
                rows.setdefault(sid, []).append([int(ch) for ch in rec["bitstring"]])
                kept.setdefault(sid, []).append(not rec.get("herald", False))
        ids = sorted(settings)
        n = len(settings[ids[0]])
        return cls(
            n_qubits=n,
            settings=[settings[i] for i in ids],
            bitstrings=[np.array(rows[i], dtype=np.uint8) for i in ids],
            retained=[np.array(kept[i], dtype=bool) for i in ids],
        )


def draw_settings(rng: np.random.Generator, n_settings: int, n_qubits: int) -> list[tuple[int, ...]]:
    draws = rng.integers(0, len(CLIFFORD_24), size=(n_settings, n_qubits))
    return [tuple(int(c) for c in row) for row in draws]


# -- purity and entropy --------------------------------------------------------


def _kernel_quadratic(p: np.ndarray, k: int) -> float:
    q = p.reshape((2,) * k)
    for ax in range(k):
        q = np.moveaxis(np.tensordot(_KERNEL, q, axes=(1, ax)), 0, ax)
    return float((q * p.reshape((2,) * k)).sum())


def purity_setting_values(dataset: RandomizedMeasurementDataset, subset,
                          keep_all: bool = False) -> np.ndarray:
    """Per-setting purity contributions X_u for a qubit subset."""
    subset = sorted(set(subset))
    if any(q < 0 or q >= dataset.n_qubits for q in subset):
        raise ValueError("subset out of range")
    k = len(subset)
    if k == 0:
        return np.ones(dataset.n_settings)
    weights = (1 << np.arange(k)).astype(np.int64)
    out = np.empty(dataset.n_settings)
    for sid in range(dataset.n_settings):
        bits = dataset.kept(sid, keep_all)[:, subset].astype(np.int64)
        m = len(bits)
        if m < 2:
            raise ValueError("need at least two retained shots per setting")
        idx = bits @ weights
        p = np.bincount(idx, minlength=1 << k).astype(float) / m
        quad = _kernel_quadratic(p, k)
        unbiased_diag = (p * (p * m - 1.0) / (m - 1.0) - p * p).sum()
        out[sid] = (2.0 ** k) * (quad + unbiased_diag)
    return out


def purity_estimate(dataset: RandomizedMeasurementDataset, subset,
                    keep_all: bool = False) -> float:
    """Tr rho_A^2 estimate: average of the per-setting X_u."""
    return float(purity_setting_values(dataset, subset, keep_all).mean())


PURITY_FLOOR = 1e-9


def entropy_from_purity(purity: float) -> float:
    """Renyi-2 entropy in nats; estimates below the floor are clipped."""
    if purity < PURITY_FLOOR:
        warnings.warn("purity estimate at or below zero; clipping", stacklevel=2)
        purity = PURITY_FLOOR
    return -math.log(purity)


def subsystem_entropy(dataset: RandomizedMeasurementDataset, subset,
                      keep_all: bool = False) -> float:
    return entropy_from_purity(purity_estimate(dataset, subset, keep_all))


def tee(entropies) -> float:
    """Topological entanglement entropy from the 7 subsystem entropies.

    Order: (S_A, S_B, S_C, S_AB, S_AC, S_BC, S_ABC); the combination is
    symmetric under relabeling A/B/C.
    """
    e = list(entropies)
    if len(e) != 7:
        raise ValueError("tee needs exactly 7 entropies")
    return -(e[0] + e[1] + e[2] - e[3] - e[4] - e[5] + e[6])


# -- regions -------------------------------------------------------------------


@dataclass(frozen=True)
class Region:
    """A/B/C partition of a contiguous lattice region."""

    name: str
    a: tuple[int, ...]
    b: tuple[int, ...]
    c: tuple[int, ...]

    def qubits(self) -> tuple[int, ...]:
        return tuple(sorted(self.a + self.b + self.c))

    def subsystems(self) -> list[tuple[int, ...]]:
        a, b, c = (tuple(sorted(p)) for p in (self.a, self.b, self.c))
        return [
            a, b, c,
            tuple(sorted(a + b)),
            tuple(sorted(a + c)),
            tuple(sorted(b + c)),
            tuple(sorted(a + b + c)),
        ]


def regions_2x2(lattice: Lattice, rotations: bool = False) -> list[Region]:
    """One region per 2x2 block: two diagonal-corner singles and the rest.

    With rotations=True each block yields the four cyclic role assignments,
    matching the rotation-averaged analysis of the block regions.
    """
    out = []
    for r in range(lattice.rows):
        for c in range(lattice.cols):
            try:
                ul, ur, ll, lr = lattice.block_qubits(r, c)
            except KeyError:
                continue
            cycle = (ul, ur, lr, ll)
            n_rot = 4 if rotations else 1
            for k in range(n_rot):
                a, b = cycle[k], cycle[(k + 1) % 4]
                rest = tuple(q for q in cycle if q not in (a, b))
                suffix = f"_rot{k}" if rotations else ""
                out.append(Region(f"block_{r}{c}{suffix}", (a,), (b,), rest))
    return out


def regions_2x3(lattice: Lattice) -> list[Region]:
    """Two vertically adjacent blocks: top row / middle-left / remaining three."""
    out = []
    for r in range(lattice.rows):
        for c in range(lattice.cols):
            try:
                top = lattice.block_qubits(r, c)
                bottom = lattice.block_qubits(r + 1, c)
            except KeyError:
                continue
            ul, ur, ml, mr = top
            _, _, bl, br = bottom
            out.append(Region(f"tall_{r}{c}", (ul, ur), (ml,), (mr, bl, br)))
    return out


def tee_exact(state: StabilizerTableau, region: Region) -> float:
    return tee([state.renyi2_exact(sub) for sub in region.subsystems()])


def tee_estimate(dataset: RandomizedMeasurementDataset, region: Region,
                 keep_all: bool = False) -> float:
    return tee([subsystem_entropy(dataset, sub, keep_all) for sub in region.subsystems()])


def tee_region_statistic(dataset: RandomizedMeasurementDataset, regions: list[Region],
                         keep_all: bool = False):
    """Callable(setting indices) -> region-averaged gamma, for bootstrapping.

    Per-setting purity contributions are cached per subsystem, so resampling
    only re-averages X_u rows. Estimates are plug-in -ln of the averaged
    purity; with few settings and local-Clifford bases this carries the
    visibility bias discussed in the module docstring.
    """
    cache: dict[tuple[int, ...], np.ndarray] = {}
    region_subs = []
    for region in regions:
        subs = [tuple(s) for s in region.subsystems()]
        region_subs.append(subs)
        for sub in subs:
            if sub not in cache:
                cache[sub] = purity_setting_values(dataset, sub, keep_all)

    def statistic(indices: np.ndarray) -> float:
        gammas = []
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for subs in region_subs:
                ents = [entropy_from_purity(float(cache[sub][indices].mean())) for sub in subs]
                gammas.append(tee(ents))
        return float(np.mean(gammas))

    return statistic


def tee_region_mean(dataset: RandomizedMeasurementDataset, regions: list[Region],
                    keep_all: bool = False) -> float:
    stat = tee_region_statistic(dataset, regions, keep_all)
    return stat(np.arange(dataset.n_settings))


# -- bootstrap -----------------------------------------------------------------


def bootstrap_error(dataset: RandomizedMeasurementDataset, statistic, n_resamples: int,
                    rng: np.random.Generator | None = None) -> float:
    """Std of the statistic over bootstrap resamples of the settings.

    The resampling unit is the randomized-measurement setting; statistic is a
    callable over an index array into the settings.
    """
    if n_resamples < 100:
        raise ValueError("use at least 100 resamples")
    if rng is None:
        rng = np.random.default_rng(0)
    n = dataset.n_settings
    vals = np.empty(n_resamples)
    for i in range(n_resamples):
        vals[i] = statistic(rng.integers(0, n, size=n))
    return float(vals.std(ddof=1))


# -- SPAM mitigation -------------------------------------------------------------


def _as_prob_tensor(dist, k: int | None = None) -> np.ndarray:
    if isinstance(dist, dict):
        keys = list(dist)
        width = len(keys[0])
        arr = np.zeros((2,) * width)
        for key, val in dist.items():
            idx = tuple(int(ch) for ch in key)
            arr[idx] = val
        return arr
    arr = np.asarray(dist, dtype=float)
    if arr.ndim == 1:
        width = int(round(math.log2(arr.size)))
        if 2 ** width != arr.size:
            raise ValueError("flat distribution length must be a power of two")
        return arr.reshape((2,) * width)
    return arr


def _apply_factorwise(arr: np.ndarray, mat: np.ndarray) -> np.ndarray:
    out = arr
    for ax in range(arr.ndim):
        out = np.moveaxis(np.tensordot(mat, out, axes=(1, ax)), 0, ax)
    return out


def spam_forward(dist, a_matrix: np.ndarray) -> np.ndarray:
    """Apply the readout transition matrix factorwise: P_noise = A^(x)n P_ideal."""
    return _apply_factorwise(_as_prob_tensor(dist), np.asarray(a_matrix, dtype=float))


def spam_mitigate(dist, a_matrix: np.ndarray, clip: bool = False) -> np.ndarray:
    """Invert the per-qubit transition matrix on a measured distribution.

    Works axis-by-axis on the marginal's probability tensor, never building
    the 2^n x 2^n matrix. Small negative entries are reported via a warning
    and returned as-is unless clip=True, which projects onto the simplex.
    """
    a = np.asarray(a_matrix, dtype=float)
    if abs(np.linalg.det(a)) < 1e-12:
        raise ValueError("transition matrix is singular")
    out = _apply_factorwise(_as_prob_tensor(dist), np.linalg.inv(a))
    if (out < -1e-15).any():
        warnings.warn(
            f"mitigated distribution has {(out < -1e-15).sum()} negative entries",
            stacklevel=2,
        )
        if clip:
            out = _project_simplex(out)
    return out


def _project_simplex(arr: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (shape preserved)."""
    flat = arr.reshape(-1)
    srt = np.sort(flat)[::-1]
    cum = np.cumsum(srt) - 1.0
    rho = np.nonzero(srt - cum / (np.arange(len(srt)) + 1) > 0)[0][-1]
    tau = cum[rho] / (rho + 1.0)
    return np.maximum(flat - tau, 0.0).reshape(arr.shape)


def expectation_from_distribution(dist: np.ndarray) -> float:
    """<Z...Z> of a distribution tensor: sum_s p(s) (-1)^(sum of bits)."""
    arr = _as_prob_tensor(dist)
    signs = np.array([1.0, -1.0])
    out = arr
    for ax in range(arr.ndim):
        out = np.tensordot(signs, out, axes=(0, 0))
    return float(out)


# -- shadow fidelity --------------------------------------------------------------


def _stabilizer_group_arrays(state: StabilizerTableau):
    """All 2^n group elements as (x, z, value) uint64 arrays via Gray code.

    Limited to n <= 48 qubits, far beyond anything this package simulates.
    """
    n = state.n
    if n > 48:
        raise ValueError("stabilizer-group enumeration limited to 48 qubits")
    gens = [(_bits.to_int(state.x[n + i]), _bits.to_int(state.z[n + i]), int(state.r[n + i])) for i in range(n)]
    size = 1 << n
    xs = np.zeros(size, dtype=np.uint64)
    zs = np.zeros(size, dtype=np.uint64)
    vals = np.zeros(size, dtype=np.int8)
    cx = cz = 0
    cr = 0
    prev_gray = 0
    vals[0] = 1
    for i in range(1, size):
        gray = i ^ (i >> 1)
        bit = (gray ^ prev_gray).bit_length() - 1
        prev_gray = gray
        gx, gz, gr = gens[bit]
        # product phase in X^x Z^z form: crossing count of acc Z with gen X
        kappa = 2 * (bin(cz & gx).count("1") & 1)
        cr = (cr + gr + kappa) & 3
        cx ^= gx
        cz ^= gz
        y_count = bin(cx & cz).count("1")
        sign_exp = (cr - y_count) & 3
        if sign_exp not in (0, 2):
            raise AssertionError("group element with imaginary sign")
        xs[i], zs[i], vals[i] = cx, cz, (1 if sign_exp == 0 else -1)
    return xs, zs, vals


def shadow_setting_values(dataset: RandomizedMeasurementDataset, target: StabilizerTableau,
                          keep_all: bool = False) -> np.ndarray:
    """Per-setting means of <target| rho_snapshot |target>."""
    if target.n != dataset.n_qubits:
        raise ValueError("target size does not match dataset")
    n = dataset.n_qubits
    xs, zs, vals = _stabilizer_group_arrays(target)
    supp = xs | zs
    weights = np.bitwise_count(supp).astype(np.int64)
    out = np.empty(dataset.n_settings)
    shot_weights = (np.uint64(1) << np.arange(n, dtype=np.uint64))
    for sid in range(dataset.n_settings):
        bases = dataset.bases(sid)
        sx = np.uint64(sum(1 << q for q, (ax, _s) in enumerate(bases) if ax in ("X", "Y")))
        sz = np.uint64(sum(1 << q for q, (ax, _s) in enumerate(bases) if ax in ("Y", "Z")))
        neg = np.uint64(sum(1 << q for q, (_ax, s) in enumerate(bases) if s == -1))
        matched = np.nonzero((xs == (sx & supp)) & (zs == (sz & supp)))[0]
        bits = dataset.kept(sid, keep_all)
        ints = (bits.astype(np.uint64) * shot_weights[None, :]).sum(axis=1)
        acc = np.zeros(len(bits))
        for i in matched:
            s_i = supp[i]
            sign = -1.0 if int(np.bitwise_count(s_i & neg)) & 1 else 1.0
            base = (3.0 ** int(weights[i])) * float(vals[i]) * sign
            parities = np.bitwise_count(ints & s_i) & np.uint64(1)
            acc += base * np.where(parities.astype(bool), -1.0, 1.0)
        out[sid] = acc.mean() / (2.0 ** n)
    return out


def shadow_fidelity(dataset: RandomizedMeasurementDataset, target: StabilizerTableau,
                    keep_all: bool = False) -> float:
    """Overlap <target| rho |target> from local-Clifford shadows."""
    return float(shadow_setting_values(dataset, target, keep_all).mean())


# -- destructive stabilizer readout ---------------------------------------------


@dataclass(frozen=True)
class MeasurementSetting:
    """One destructive readout setting: plaquettes read and per-qubit bases."""

    name: str
    plaquettes: tuple[int, ...]
    bases: tuple[str, ...]
    logicals: tuple[str, ...] = ()


def derive_bases(lattice: Lattice, labels) -> tuple[str, ...]:
    """Per-qubit measurement axes that read out all listed plaquettes at once."""
    bases = ["Z"] * lattice.n_qubits
    fixed = [False] * lattice.n_qubits
    for label in labels:
        op = lattice.plaquette(label)
        for q in op.support():
            axis = op.axis(q)
            if fixed[q] and bases[q] != axis:
                raise ValueError(f"setting {labels} needs both {bases[q]} and {axis} on qubit {q}")
            bases[q] = axis
            fixed[q] = True
    return tuple(bases)


DEFECT_SETTING_PLAQUETTES = ((0, 2, 5, 7, 14), (3, 5, 10, 11, 13), (1, 3, 4, 6, 11), (0, 6, 8, 12, 14))


def default_plan(lattice: Lattice) -> list[MeasurementSetting]:
    """Torus: one all-X and one all-Z setting; defect lattice: four settings
    covering all 14 plaquettes with the corner and pentagon plaquettes read
    twice."""
    if lattice.defect_plaquettes:
        plan = []
        for i, labels in enumerate(DEFECT_SETTING_PLAQUETTES):
            plan.append(
                MeasurementSetting(f"setting_{i + 1}", tuple(labels), derive_bases(lattice, labels))
            )
        return plan
    x_labels = tuple(l for l, _ in lattice.x_plaquettes)
    z_labels = tuple(l for l, _ in lattice.z_plaquettes)
    return [
        MeasurementSetting("x_basis", x_labels, derive_bases(lattice, x_labels)),
        MeasurementSetting(
            "z_basis", z_labels, derive_bases(lattice, z_labels), tuple(sorted(lattice.logical_ops))
        ),
    ]


def plan_coverage(plan, lattice: Lattice) -> dict[int, int]:
    counts = {label: 0 for label in lattice.labels()}
    for setting in plan:
        for label in setting.plaquettes:
            counts[label] += 1
    return counts


def expectation_report(
    shots,
    plan: list[MeasurementSetting],
    lattice: Lattice,
    keep_all: bool = False,
    mitigate: np.ndarray | None = None,
    command: str = "prepare",
    seed: int = 0,
    metadata: dict | None = None,
) -> ExperimentReport:
    """Stabilizer and logical means from destructive single-basis shots.

    shots provides, per setting, a (S, n) bit array and a herald mask (see
    runner.DestructiveShots). Plaquettes read in several settings pool their
    samples. With mitigate set to a 2x2 transition matrix, means come from
    factorwise-inverted support marginals instead (standard errors then keep
    the unmitigated shot-noise scale).
    """
    coverage = plan_coverage(plan, lattice)
    uncovered = [l for l, c in coverage.items() if c == 0]
    if uncovered:
        raise ValueError(f"plan does not cover plaquettes {uncovered}")

    samples: dict[int, list[np.ndarray]] = {label: [] for label in lattice.labels()}
    logical_samples: dict[str, list[np.ndarray]] = {}
    mitigated_terms: dict[int, list[float]] = {label: [] for label in lattice.labels()}
    total = kept_total = 0
    for setting, bits, heralds in zip(plan, shots.bits, shots.heralds):
        keep = np.ones(len(bits), dtype=bool) if keep_all else ~heralds
        total += len(bits)
        kept_total += int(keep.sum())
        rows = bits[keep]
        for label in setting.plaquettes:
            support = lattice.plaquette(label).support()
            par = rows[:, support].sum(axis=1) % 2
            samples[label].append(1.0 - 2.0 * par)
            if mitigate is not None:
                k = len(support)
                idx = rows[:, support].astype(np.int64) @ (1 << np.arange(k))
                p = np.bincount(idx, minlength=1 << k).astype(float) / max(len(rows), 1)
                corrected = spam_mitigate(p, mitigate)
                mitigated_terms[label].append(expectation_from_distribution(corrected))
        for name in setting.logicals:
            op = lattice.logical_ops[name]
            par = rows[:, op.support()].sum(axis=1) % 2
            logical_samples.setdefault(name, []).append(1.0 - 2.0 * par)

    report = ExperimentReport(
        command=command,
        seed=seed,
        shots=total,
        discard_fraction=1.0 - kept_total / total if total else 0.0,
        metadata=metadata or {},
    )
    kind_prefix = {"x": "A", "z": "B", "defect": "D"}
    kind_means: dict[str, list[float]] = {"x": [], "z": [], "defect": []}
    for label in sorted(samples):
        pooled = np.concatenate(samples[label]) if samples[label] else np.array([])
        kind = lattice.plaquette_kind(label)
        name = f"{kind_prefix[kind]}_{label}"
        report.add_observable(name, pooled)
        if mitigate is not None and mitigated_terms[label]:
            weights = [len(s) for s in samples[label]]
            mit_mean = float(np.average(mitigated_terms[label], weights=weights))
            report.observables[name]["mean"] = mit_mean
            report.observables[name]["mitigated"] = True
        kind_means[kind].append(report.observables[name]["mean"])
    for name in sorted(logical_samples):
        report.add_observable(name, np.concatenate(logical_samples[name]))

    all_means = [m for means in kind_means.values() for m in means]
    report.derived["plaquette_mean"] = float(np.mean(all_means))
    report.derived["energy_density"] = -report.derived["plaquette_mean"]
    if kind_means["x"]:
        report.derived["x_plaquette_mean"] = float(np.mean(kind_means["x"]))
    if kind_means["z"]:
        report.derived["z_plaquette_mean"] = float(np.mean(kind_means["z"]))
    if kind_means["defect"]:
        report.derived["defect_plaquette_mean"] = float(np.mean(kind_means["defect"]))
    stems = {}
    for name in logical_samples:
        stems.setdefault(name.rsplit("_", 1)[0], []).append(report.observables[name]["mean"])
    for stem, vals in stems.items():
        report.derived[f"{stem}_avg"] = float(np.mean(vals))
    return report
