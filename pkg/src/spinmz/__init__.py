"""Adiabatic Mach-Zehnder interferometry on a transverse-field Ising chain.

Simulates NOON-state preparation by two-step adiabatic sweeps, free phase
accumulation, reversed-sweep recombination and Heisenberg-limited phase
readout for a chain of N spin-1/2 particles with power-law couplings.
"""

from .statevec import (
    BasisMismatchError,
    DimensionCapError,
    SpinBasis,
    StateVector,
    make_noon_state,
    make_product_x_state,
    overlap,
)
from .hamiltonian import (
    FreeEvolutionParams,
    IsingParams,
    apply_free_hamiltonian,
    apply_hamiltonian,
    build_dense,
    coupling_matrix,
)
from .evolve import (
    EvolutionTrace,
    PropagationError,
    PropagatorConfig,
    Schedule,
    Segment,
    propagate,
    propagate_free,
    reverse_schedule,
    schedule_constant,
    schedule_single_step_B,
    schedule_single_step_J,
    schedule_two_step,
)
from .observables import (
    SpectrumResult,
    exact_spectrum,
    fm_populations,
    noon_fidelity,
    noon_overlap,
    parity_expectation,
)
from .interferometer import (
    BiasScanResult,
    FlatFringeError,
    FringeScan,
    InterferometerConfig,
    UnitsConfig,
    bias_scan,
    default_phi_grid,
    excited_state_population,
    fringe_scan,
    ideal_fringe,
    phase_sensitivity,
    phi_to_free_time,
    run_bs1,
    run_bs1_trace,
    run_bs2,
    run_sequence,
    sequence_duration_us,
    to_dimensionless,
    to_physical_us,
)

__version__ = "0.1.0"
