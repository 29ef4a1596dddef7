"""Batch command-line front-end.

Every command takes an explicit --seed (no wall-clock seeding) and writes a
schema-versioned JSON report; plots are left to downstream tools, which get
plot-ready CSV via --csv. Exit codes: 0 success, 2 configuration error,
1 runtime failure.
"""

from __future__ import annotations

import json
import math
import sys

import click
import numpy as np

from .dynamics import run_braid_interferometry, run_qnd_trace, run_transmutation
from .estimators import (
    bootstrap_error,
    default_plan,
    expectation_report,
    regions_2x2,
    regions_2x3,
    tee_exact,
    tee_region_mean,
    tee_region_statistic,
)
from .lattice import build_defect_lattice, build_torus
from .native import compile_to_native
from .noise import NoiseSpec, error_budget, load_noise_spec
from .prep import (
    PrepStrategy,
    all_ancilla_strategy,
    build_preparation_circuit,
    default_strategy,
    inferred_strategy,
    target_state,
)
from .report import ExperimentReport
from .runner import DestructiveShots, collect_destructive, collect_randomized

LATTICES = {"torus4x4": build_torus, "defect15": build_defect_lattice}


def _lattice(name: str):
    try:
        return LATTICES[name]()
    except KeyError:
        raise click.BadParameter(f"unknown lattice {name!r}; choose from {sorted(LATTICES)}")


def _strategy(lattice, name: str, decoder: str | None):
    presets = {
        "default": lambda: default_strategy(lattice, decoder or "lookup_optimized"),
        "all_ancilla": lambda: all_ancilla_strategy(lattice),
        "inferred": lambda: inferred_strategy(lattice),
    }
    if name in presets:
        return presets[name]()
    try:
        with open(name, "r", encoding="utf-8") as fh:
            return PrepStrategy.from_json(fh.read())
    except FileNotFoundError:
        raise click.BadParameter(f"strategy {name!r} is neither a preset nor a file")


def _noise(source: str):
    try:
        return load_noise_spec(source)
    except FileNotFoundError as exc:
        raise click.BadParameter(str(exc))


def _emit(report: ExperimentReport, out: str | None, csv: str | None, canonical: bool):
    text = report.to_json(canonical=canonical)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        click.echo(text)
    if csv:
        with open(csv, "w", encoding="utf-8") as fh:
            fh.write(report.to_csv())


def _common_metadata(lattice, noise_spec, strategy=None):
    meta = {
        "lattice": lattice.name,
        "noise": json.loads(noise_spec.to_json()) if noise_spec else "none",
    }
    if strategy is not None:
        meta["strategy"] = json.loads(strategy.to_json())
    return meta


@click.group()
def main():
    """Stabilizer-circuit toolkit: feed-forward toric-code preparation,
    defect-lattice anyon dynamics, and randomized-measurement estimators."""


@main.command()
@click.option("--lattice", "lattice_name", default="torus4x4", show_default=True)
@click.option("--strategy", "strategy_name", default="default", show_default=True)
@click.option("--decoder", type=click.Choice(["lookup_optimized", "lookup_qasm2"]), default=None)
@click.option("--noise", default="none", show_default=True, help="NoiseSpec JSON path, bundled name (h1-1), or 'none'")
@click.option("--seed", type=int, required=True)
@click.option("--shots", type=int, default=1240, show_default=True, help="total shots, split over the readout settings")
@click.option("--keep-all", is_flag=True, help="keep heralded shots instead of discarding")
@click.option("--qasm2-conditions", is_flag=True, help="count conditional gates with register-value fan-out")
@click.option("--save-shots", type=click.Path(), default=None, help="persist raw shot records (NDJSON)")
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--out", type=click.Path(), default=None)
@click.option("--csv", type=click.Path(), default=None)
@click.option("--canonical", is_flag=True, help="omit the timestamp for byte-identical reports")
def prepare(lattice_name, strategy_name, decoder, noise, seed, shots, keep_all,
            qasm2_conditions, save_shots, threads, out, csv, canonical):
    """Prepare the ground state repeatedly and report stabilizer expectations."""
    lattice = _lattice(lattice_name)
    strategy = _strategy(lattice, strategy_name, decoder)
    noise_spec = _noise(noise)
    plan = default_plan(lattice)
    per_setting = max(shots // len(plan), 1)
    data = collect_destructive(lattice, strategy, noise_spec, seed, per_setting, plan, threads=threads)
    if save_shots:
        data.save_ndjson(save_shots)
    report = expectation_report(
        data, plan, lattice, keep_all=keep_all, command="prepare", seed=seed,
        metadata=_common_metadata(lattice, noise_spec, strategy),
    )
    prep = build_preparation_circuit(lattice, strategy)
    _, counts = compile_to_native(prep.circuit, qasm2_conditions=qasm2_conditions)
    report.metadata["native_gate_counts"] = {
        "n_1q": counts.n_1q, "n_2q": counts.n_2q, "depth_1q_equivalent": counts.depth_1q_equivalent,
    }
    report.metadata["shots_per_setting"] = per_setting
    _emit(report, out, csv, canonical)


@main.command()
@click.option("--lattice", "lattice_name", default="torus4x4", show_default=True)
@click.option("--noise", default="none", show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--n-settings", type=int, default=72, show_default=True)
@click.option("--shots-per-setting", type=int, default=256, show_default=True)
@click.option("--dataset", type=click.Path(), default=None, help="persist the dataset (NDJSON)")
@click.option("--keep-all", is_flag=True)
@click.option("--out", type=click.Path(), default=None)
@click.option("--csv", type=click.Path(), default=None)
@click.option("--canonical", is_flag=True)
def entropy(lattice_name, noise, seed, n_settings, shots_per_setting, dataset, keep_all, out, csv, canonical):
    """Randomized measurements; report subsystem entropies per block region."""
    from .estimators import subsystem_entropy

    lattice = _lattice(lattice_name)
    noise_spec = _noise(noise)
    ds = collect_randomized(lattice, None, noise_spec, seed, n_settings, shots_per_setting)
    if dataset:
        ds.save_ndjson(dataset)
    report = ExperimentReport(
        command="entropy", seed=seed, shots=n_settings * shots_per_setting,
        metadata=_common_metadata(lattice, noise_spec) | {"n_settings": n_settings, "shots_per_setting": shots_per_setting},
    )
    ref = target_state(lattice) if noise_spec is None else None
    for region in regions_2x2(lattice):
        for sub in region.subsystems():
            key = f"S2_{region.name}_" + "q" + "-".join(map(str, sub))
            report.derived[key] = subsystem_entropy(ds, sub, keep_all)
            if ref is not None:
                report.derived[key + "_exact"] = ref.renyi2_exact(sub)
    _emit(report, out, csv, canonical)


@main.command()
@click.option("--lattice", "lattice_name", default="torus4x4", show_default=True)
@click.option("--noise", default="none", show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--n-settings", type=int, default=72, show_default=True)
@click.option("--shots-per-setting", type=int, default=256, show_default=True)
@click.option("--regions", "region_kind", type=click.Choice(["2x2", "2x3", "both"]), default="both", show_default=True)
@click.option("--bootstrap", "n_boot", type=int, default=200, show_default=True)
@click.option("--keep-all", is_flag=True)
@click.option("--out", type=click.Path(), default=None)
@click.option("--csv", type=click.Path(), default=None)
@click.option("--canonical", is_flag=True)
def tee(lattice_name, noise, seed, n_settings, shots_per_setting, region_kind, n_boot, keep_all, out, csv, canonical):
    """Topological entanglement entropy: exact and estimated, with bootstrap."""
    lattice = _lattice(lattice_name)
    noise_spec = _noise(noise)
    ds = collect_randomized(lattice, None, noise_spec, seed, n_settings, shots_per_setting)
    report = ExperimentReport(
        command="tee", seed=seed, shots=n_settings * shots_per_setting,
        metadata=_common_metadata(lattice, noise_spec) | {"n_settings": n_settings, "shots_per_setting": shots_per_setting},
    )
    ref = target_state(lattice)
    groups = []
    if region_kind in ("2x2", "both"):
        groups.append(("2x2", regions_2x2(lattice, rotations=True)))
    if region_kind in ("2x3", "both"):
        groups.append(("2x3", regions_2x3(lattice)))
    for name, regions in groups:
        est = tee_region_mean(ds, regions, keep_all)
        stat = tee_region_statistic(ds, regions, keep_all)
        err = bootstrap_error(ds, stat, n_boot, np.random.default_rng([seed, 99]))
        report.derived[f"gamma_{name}_over_ln2"] = est / math.log(2)
        report.derived[f"gamma_{name}_bootstrap_err_over_ln2"] = err / math.log(2)
        report.derived[f"gamma_{name}_exact_over_ln2"] = float(
            np.mean([tee_exact(ref, r) for r in regions]) / math.log(2)
        )
    _emit(report, out, csv, canonical)


@main.command()
@click.option("--noise", default="none", show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--shots-per-setting", type=int, default=600, show_default=True)
@click.option("--out", type=click.Path(), default=None)
@click.option("--csv", type=click.Path(), default=None)
@click.option("--canonical", is_flag=True)
def transmute(noise, seed, shots_per_setting, out, csv, canonical):
    """Anyon transmutation: per-step stabilizer expectations on the defect lattice."""
    lattice = build_defect_lattice()
    noise_spec = _noise(noise)
    steps = run_transmutation(lattice, noise_spec, seed, shots_per_setting)
    combined = ExperimentReport(
        command="transmute", seed=seed,
        shots=sum(s.report.shots for s in steps),
        metadata=_common_metadata(lattice, noise_spec),
    )
    rows = ["step,observable,mean,std_err,expected"]
    for st in steps:
        for name, obs in sorted(st.report.observables.items()):
            label = int(name.split("_")[1])
            combined.derived[f"step{st.step}_{name}"] = obs["mean"]
            rows.append(f"{st.step},{name},{obs['mean']:.10g},{obs['std_err']:.10g},{st.expected.sign(label)}")
        combined.metadata[f"step{st.step}_expected_minus"] = sorted(
            l for l, s in st.expected.items() if s == -1
        )
        combined.metadata[f"step{st.step}_discard_fraction"] = st.report.discard_fraction
    text = combined.to_json(canonical=canonical)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        click.echo(text)
    if csv:
        with open(csv, "w", encoding="utf-8") as fh:
            fh.write("\n".join(rows) + "\n")


@main.command()
@click.option("--noise", default="none", show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--shots", type=int, default=200, show_default=True)
@click.option("--trajectories", type=click.Path(), default=None, help="per-shot JSON-lines output")
@click.option("--out", type=click.Path(), default=None)
@click.option("--canonical", is_flag=True)
def qnd(noise, seed, shots, trajectories, out, canonical):
    """Non-demolition anyon tracing: full trajectory from one preparation per shot."""
    lattice = build_defect_lattice()
    noise_spec = _noise(noise)
    trace = run_qnd_trace(lattice, noise_spec, seed, shots)
    if trajectories:
        trace.save_jsonl(trajectories)
    report = ExperimentReport(
        command="qnd", seed=seed, shots=shots,
        discard_fraction=float(np.mean([r["herald"] for r in trace.records])),
        metadata=_common_metadata(lattice, noise_spec) | {"plaquettes": list(trace.plaquettes)},
    )
    for ci in range(len(trace.moves)):
        for p, v in trace.checkpoint_means(ci).items():
            report.derived[f"checkpoint{ci}_plaquette{p}"] = v
    _emit(report, out, None, canonical)


@main.command()
@click.option("--fermion/--no-fermion", default=True, show_default=True)
@click.option("--noise", default="none", show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--shots", type=int, default=10000, show_default=True)
@click.option("--out", type=click.Path(), default=None)
@click.option("--csv", type=click.Path(), default=None)
@click.option("--canonical", is_flag=True)
def braid(fermion, noise, seed, shots, out, csv, canonical):
    """Hadamard-test braiding: ancilla <Z> equals Re<psi|U_braid|psi>."""
    lattice = build_defect_lattice()
    noise_spec = _noise(noise)
    report = run_braid_interferometry(lattice, fermion, noise_spec, seed, shots)
    report.metadata.update(_common_metadata(lattice, noise_spec))
    _emit(report, out, csv, canonical)


@main.command()
@click.option("--n2q", type=int, required=True)
@click.option("--n1q", type=int, required=True)
@click.option("--depth", type=int, required=True)
@click.option("--qubits", type=int, required=True)
@click.option("--spam-events", type=int, required=True)
@click.option("--noise", default="h1-1", show_default=True)
@click.option("--out", type=click.Path(), default=None)
@click.option("--canonical", is_flag=True)
def budget(n2q, n1q, depth, qubits, spam_events, noise, out, canonical):
    """Closed-form damping factor from gate counts and device error rates."""
    from .native import NativeGateCounts

    noise_spec = _noise(noise)
    if noise_spec is None:
        noise_spec = NoiseSpec.zero()
    counts = NativeGateCounts(n_1q=n1q, n_2q=n2q, depth_1q_equivalent=depth)
    value = error_budget(counts, qubits, spam_events, noise_spec)
    click.echo(f"{value:.6f}")
    if out:
        report = ExperimentReport(command="budget", seed=0, shots=0,
                                  metadata={"noise": json.loads(noise_spec.to_json())})
        report.derived["damping_factor"] = value
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(report.to_json(canonical=canonical) + "\n")


@main.command()
@click.option("--lattice", "lattice_name", default="torus4x4", show_default=True)
@click.option("--field", "field_name", type=click.Choice(["p2", "p1", "mem", "z_bias"]), required=True)
@click.option("--values", required=True, help="comma-separated parameter values")
@click.option("--noise", default="h1-1", show_default=True, help="base NoiseSpec to vary")
@click.option("--seed", type=int, required=True)
@click.option("--shots", type=int, default=2000, show_default=True)
@click.option("--csv", type=click.Path(), required=True)
def sweep(lattice_name, field_name, values, noise, seed, shots, csv):
    """Vary one noise field and emit energy density vs parameter as CSV."""
    lattice = _lattice(lattice_name)
    base = _noise(noise) or NoiseSpec.zero()
    try:
        vals = [float(v) for v in values.split(",") if v.strip() != ""]
    except ValueError:
        raise click.BadParameter("--values must be comma-separated numbers")
    plan = default_plan(lattice)
    per_setting = max(shots // len(plan), 1)
    rows = ["value,energy_density,discard_fraction"]
    for v in vals:
        doc = json.loads(base.to_json())
        doc[field_name] = v
        spec = NoiseSpec.from_json(json.dumps(doc))
        data = collect_destructive(lattice, None, spec if not spec.is_zero() else None, seed, per_setting, plan)
        rep = expectation_report(data, plan, lattice, command="sweep", seed=seed)
        rows.append(f"{v},{rep.derived['energy_density']:.10g},{rep.discard_fraction:.10g}")
    with open(csv, "w", encoding="utf-8") as fh:
        fh.write("\n".join(rows) + "\n")
    click.echo(f"wrote {csv}")


@main.command()
@click.option("--shots-file", type=click.Path(exists=True), required=True, help="NDJSON from prepare --save-shots")
@click.option("--lattice", "lattice_name", default="torus4x4", show_default=True)
@click.option("--noise", default="h1-1", show_default=True, help="source of the readout transition matrix")
@click.option("--seed", type=int, required=True)
@click.option("--keep-all", is_flag=True)
@click.option("--out", type=click.Path(), default=None)
@click.option("--csv", type=click.Path(), default=None)
@click.option("--canonical", is_flag=True)
def mitigate(shots_file, lattice_name, noise, seed, keep_all, out, csv, canonical):
    """Re-evaluate saved shots with readout-error mitigation."""
    lattice = _lattice(lattice_name)
    noise_spec = _noise(noise)
    if noise_spec is None:
        raise click.BadParameter("mitigation needs a noise spec for the transition matrix")
    data = DestructiveShots.load_ndjson(shots_file)
    raw = expectation_report(data, data.plan, lattice, keep_all=keep_all, command="mitigate", seed=seed)
    mit = expectation_report(
        data, data.plan, lattice, keep_all=keep_all,
        mitigate=noise_spec.transition_matrix(), command="mitigate", seed=seed,
        metadata=_common_metadata(lattice, noise_spec),
    )
    mit.derived["energy_density_raw"] = raw.derived["energy_density"]
    _emit(mit, out, csv, canonical)


def run_main(argv=None) -> int:
    try:
        main.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except (click.UsageError,) as exc:
        exc.show()
        return 2
    except Exception as exc:  # runtime failure
        click.echo(f"error: {exc}", err=True)
        return 1


if __name__ == "__main__":
    sys.exit(run_main())
