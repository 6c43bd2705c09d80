"""Mach-Zehnder sequence on the Ising chain and its readout quantities.

The sequence is: BS1 (two-step sweep from the paramagnetic to the
ferromagnetic limit, preparing the NOON state), free precession for a
time T, then BS2 (the reversed sweep). The readout population is defined
through the antisymmetric GHZ combination just before BS2,

    p1 = |<GHZ-|psi>|^2,   GHZ- = (|up..up> - |down..down>)/sqrt(2),

which is unitarily identical to projecting the post-BS2 state onto the
BS2 image of GHZ- and sidesteps any ambiguity in picking a single state
out of the degenerate excited manifold of the readout Hamiltonian.

Phase bookkeeping: with sigma_z eigenvalues +-1 the two NOON branches
de-phase at rate 2*N*omega0, so the fringe phase phi entering
sin^2(N*phi/2) corresponds to a free-evolution time T = phi / (2*omega0).
(Writing the precession Hamiltonian with spin-1/2 operators instead would
give the often-quoted phi = omega0*T; only the phi <-> T conversion
changes, never the fringe itself.)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .evolve import (
    EvolutionTrace,
    PropagatorConfig,
    propagate,
    propagate_free,
    reverse_schedule,
    schedule_two_step,
)
from .hamiltonian import FreeEvolutionParams
from .statevec import SpinBasis, StateVector, make_noon_state, make_product_x_state
from .observables import _fm_populations_arr, _noon_fidelity_arr

# sample cadence for pipeline propagations where only the endpoint matters
_ENDPOINT_ONLY = 10**9


class FlatFringeError(RuntimeError):
    """Fringe has no usable slope anywhere; the interferometer failed."""


@dataclass(frozen=True)
class InterferometerConfig:
    """Settings for the full sequence.

    ``tau`` is the per-step sweep duration (each beam splitter lasts
    2*tau). ``delta_bias`` is the longitudinal bias applied during the
    sweeps: a scalar biases both legs, a pair biases them individually.
    """

    n_spins: int
    tau: float
    j0: float = 1.0
    b0: float = 1.0
    omega0: float = 1.0
    propagator: PropagatorConfig = field(default_factory=PropagatorConfig)
    delta_bias: float | tuple[float, float] = 0.0

    def __post_init__(self):
        if self.n_spins < 2:
            raise ValueError(f"need at least two spins, got {self.n_spins}")
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not math.isfinite(self.omega0):
            raise ValueError("omega0 must be finite")

    @property
    def basis(self) -> SpinBasis:
        return SpinBasis(self.n_spins)

    def sweep_schedule(self):
        return schedule_two_step(self.tau, self.j0, self.b0, delta=self.delta_bias)


@dataclass(frozen=True, eq=False)
class FringeScan:
    """Sampled fringe phi -> p1 plus the analytic reference and the
    sensitivity extracted from the numeric fringe."""

    phi_values: np.ndarray
    p1_values: np.ndarray
    p1_analytic: np.ndarray
    sensitivity_at_optimum: float


@dataclass(frozen=True)
class UnitsConfig:
    """Physical units: energies in units of a reference coupling (kHz),
    times in units of its inverse. With the default 50 kHz, dimensionless
    tau = 5 is 100 microseconds.

    ``angular`` divides times by 2*pi for rad/s-consistent bookkeeping;
    the default plain convention matches tau=5 <-> 100 us directly.
    """

    j0_khz: float = 50.0
    angular: bool = False

    def __post_init__(self):
        if not (self.j0_khz > 0 and math.isfinite(self.j0_khz)):
            raise ValueError(f"reference coupling must be positive, got {self.j0_khz}")


def to_physical_us(units: UnitsConfig, t: float) -> float:
    """Dimensionless time -> microseconds."""
    factor = 1000.0 / units.j0_khz
    if units.angular:
        factor /= 2.0 * math.pi
    return t * factor


def to_dimensionless(units: UnitsConfig, t_us: float) -> float:
    """Microseconds -> dimensionless time."""
    factor = 1000.0 / units.j0_khz
    if units.angular:
        factor /= 2.0 * math.pi
    return t_us / factor


def sequence_duration_us(units: UnitsConfig, cfg: InterferometerConfig,
                         free_time: float = 0.0) -> float:
    """Wall time of BS1 + free evolution + BS2 in microseconds."""
    return to_physical_us(units, 4.0 * cfg.tau + free_time)


def excited_state_population(psi: StateVector) -> float:
    """Overlap-squared with GHZ- = (|up..up> - |down..down>)/sqrt(2)."""
    amp = psi.amplitudes
    return float(abs(amp[-1] - amp[0]) ** 2 / 2.0)


def phi_to_free_time(cfg: InterferometerConfig, phi: float) -> float:
    """Free-evolution time accumulating fringe phase ``phi``.

    The branch splitting rate is 2*omega0 per spin (sigma_z = +-1), so
    T = phi / (2*omega0).
    """
    if cfg.omega0 == 0:
        raise ValueError("omega0 must be nonzero to map phase to time")
    return phi / (2.0 * cfg.omega0)


def run_bs1(cfg: InterferometerConfig, sample_every: int = _ENDPOINT_ONLY,
            ) -> StateVector:
    """First beam splitter: sweep |x..x> into the (approximate) NOON state."""
    return run_bs1_trace(cfg, sample_every).final_state


def run_bs1_trace(cfg: InterferometerConfig,
                  sample_every: int = 10) -> EvolutionTrace:
    """Like :func:`run_bs1` but returning the full evolution trace."""
    psi0 = make_product_x_state(cfg.basis, +1)
    return propagate(psi0, cfg.sweep_schedule(), cfg.propagator,
                     sample_every=sample_every)


def run_bs2(cfg: InterferometerConfig, psi: StateVector) -> StateVector:
    """Second beam splitter: the exact reversed sweep (bias included)."""
    sched = reverse_schedule(cfg.sweep_schedule())
    return propagate(psi, sched, cfg.propagator,
                     sample_every=_ENDPOINT_ONLY).final_state


def run_sequence(cfg: InterferometerConfig, free_time: float,
                 ) -> tuple[StateVector, float]:
    """Full sequence BS1 -> free(T) -> BS2.

    Returns the final state and the excited-state population p1 (taken in
    the transported basis just before BS2; see module docstring).
    """
    if free_time < 0:
        raise ValueError(f"free evolution time must be >= 0, got {free_time}")
    psi1 = run_bs1(cfg)
    psi2 = propagate_free(
        psi1, FreeEvolutionParams(cfg.n_spins, cfg.omega0), free_time
    )
    p1 = excited_state_population(psi2)
    psi3 = run_bs2(cfg, psi2)
    return psi3, p1


def default_phi_grid(n_spins: int, points: int = 64) -> np.ndarray:
    """Evenly spaced phases over one fringe period 2*pi/N, inclusive."""
    if points < 2:
        raise ValueError("need at least two grid points")
    return np.linspace(0.0, 2.0 * np.pi / n_spins, points)


def _branch_fringe(c_down: complex, c_up: complex, n_spins: int,
                   phi: np.ndarray) -> np.ndarray:
    """p1 over the grid given the two ferromagnetic branch amplitudes."""
    half = 0.5 * n_spins * phi  # omega0*T per branch = phi/2
    branch_up = c_up * np.exp(-1j * half)
    branch_down = c_down * np.exp(+1j * half)
    return np.abs(branch_up - branch_down) ** 2 / 2.0


def _assemble_scan(c_down, c_up, n_spins, phi) -> FringeScan:
    p1 = _branch_fringe(c_down, c_up, n_spins, phi)
    analytic = np.sin(0.5 * n_spins * phi) ** 2
    span = float(phi.max() - phi.min())
    if phi.size >= 3 and span >= (2.0 * np.pi / n_spins) * (1.0 - 1e-9):
        sens = phase_sensitivity(FringeScan(phi, p1, analytic, math.nan), n_spins)
    else:
        sens = math.nan
    return FringeScan(phi, p1, analytic, sens)


def ideal_fringe(n_spins: int, phi_grid: np.ndarray) -> FringeScan:
    """Fringe for an exact NOON input, valid for any N >= 1.

    No sweep is involved, so this also covers the single-spin case the
    full interferometer cannot represent.
    """
    if n_spins < 1:
        raise ValueError(f"need at least one spin, got {n_spins}")
    phi = np.asarray(phi_grid, dtype=np.float64)
    if phi.size == 0:
        raise ValueError("phase grid must be nonempty")
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    return _assemble_scan(inv_sqrt2, inv_sqrt2, n_spins, phi)


def fringe_scan(cfg: InterferometerConfig, phi_grid: np.ndarray,
                ideal_input: bool = False) -> FringeScan:
    """p1 versus fringe phase, for an ideal NOON input or the swept one.

    The input state is prepared once (it does not depend on phi); each
    grid point then applies the exact diagonal free evolution with
    T = phi/(2*omega0) and reads p1 before BS2, which is unitarily
    identical to running the whole sequence per point.
    """
    phi = np.asarray(phi_grid, dtype=np.float64)
    if phi.size == 0:
        raise ValueError("phase grid must be nonempty")
    if ideal_input:
        psi1 = make_noon_state(cfg.basis, 0.0)
    else:
        psi1 = run_bs1(cfg)
    return _assemble_scan(psi1.amplitudes[0], psi1.amplitudes[-1],
                          cfg.n_spins, phi)


def phase_sensitivity(scan: FringeScan, n_spins: int) -> float:
    """Best phase sensitivity sqrt(p1(1-p1)) / |dp1/dphi| over the fringe.

    The derivative is taken by central differences on the grid interior;
    points where the slope vanishes (fringe extremes, where the quotient
    is a removable 0/0) are excluded. For the ideal fringe this returns
    1/N up to discretization error.
    """
    phi = scan.phi_values
    p1 = scan.p1_values
    if phi.size < 3:
        raise ValueError("need at least three grid points for a derivative")
    span = float(phi.max() - phi.min())
    if span < (2.0 * np.pi / n_spins) * (1.0 - 1e-9):
        raise ValueError(
            f"grid spans {span:.4g} rad, less than one fringe period "
            f"{2 * np.pi / n_spins:.4g}"
        )
    deriv = np.gradient(p1, phi)[1:-1]
    noise = np.sqrt(np.clip(p1[1:-1] * (1.0 - p1[1:-1]), 0.0, None))
    slope_floor = max(1e-12, 1e-9 * float(np.abs(deriv).max()))
    valid = np.abs(deriv) > slope_floor
    if not np.any(valid):
        raise FlatFringeError("fringe slope below threshold everywhere")
    return float(np.min(noise[valid] / np.abs(deriv[valid])))


@dataclass(frozen=True, eq=False)
class BiasScanResult:
    """BS1 outcome versus the longitudinal bias (all arrays aligned)."""

    delta_over_j0: np.ndarray
    p_up: np.ndarray
    p_down: np.ndarray
    noon_fidelity: np.ndarray


def bias_scan(cfg: InterferometerConfig, delta_grid: np.ndarray) -> BiasScanResult:
    """Sweep-and-measure for each bias value: run BS1 with that bias over
    the full 2*tau sweep and record FM populations and NOON fidelity.

    Dimensionless bias values are already delta/J0 (energies are measured
    in units of the maximum coupling).
    """
    deltas = np.asarray(delta_grid, dtype=np.float64)
    if deltas.size == 0 or not np.all(np.isfinite(deltas)):
        raise ValueError("bias grid must be nonempty and finite")
    p_up = np.empty_like(deltas)
    p_down = np.empty_like(deltas)
    fid = np.empty_like(deltas)
    for i, d in enumerate(deltas):
        psi = run_bs1(replace(cfg, delta_bias=float(d)))
        p_up[i], p_down[i] = _fm_populations_arr(psi.amplitudes)
        fid[i] = _noon_fidelity_arr(psi.amplitudes)
    return BiasScanResult(deltas, p_up, p_down, fid)
