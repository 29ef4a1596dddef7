"""Stabilizer-circuit simulator and protocol toolkit: feed-forward toric-code
preparation, defect-lattice anyon dynamics, and randomized-measurement
estimators, all exactly reproducible from explicit seeds."""

from .pauli import PauliOperator
from .tableau import StabilizerTableau, new_state, states_equal
from .lattice import (
    AnyonConfig,
    Lattice,
    build_defect_lattice,
    build_torus,
    derive_defect_stabilizers,
    logical_expectations,
    predict_anyon_config,
)
from .circuit import Circuit, CircuitError, Instruction, ParseError, execute, parse
from .native import NativeGateCounts, compile_to_native
from .noise import NoiseModel, NoiseSpec, error_budget, load_noise_spec, make_noise
from .prep import (
    Decoder,
    PrepStrategy,
    Syndrome,
    all_ancilla_strategy,
    build_parity_check_ancilla,
    build_parity_check_ancilla_free,
    build_preparation_circuit,
    decode_lookup,
    default_strategy,
    inferred_strategy,
    prepare_ground_state,
    target_state,
)
from .estimators import (
    MeasurementSetting,
    RandomizedMeasurementDataset,
    Region,
    bootstrap_error,
    default_plan,
    expectation_report,
    purity_estimate,
    regions_2x2,
    regions_2x3,
    shadow_fidelity,
    spam_forward,
    spam_mitigate,
    subsystem_entropy,
    tee,
    tee_estimate,
    tee_exact,
    tee_region_mean,
)
from .runner import DestructiveShots, collect_destructive, collect_randomized
from .dynamics import (
    DynamicsScript,
    run_braid_interferometry,
    run_qnd_trace,
    run_transmutation,
    transmutation_script,
)
from .report import ExperimentReport

__version__ = "0.1.0"
