"""Measurement functionals on chain states and small exact spectra.

All functionals are pure and read-only. The ferromagnetic populations,
NOON fidelity and global-parity expectation are the quantities tracked
along sweeps; the dense eigensolver serves readout-basis construction and
cross-checks for small chains.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hamiltonian import IsingParams, build_dense
from .statevec import SpinBasis, StateVector

# Eigenvalues closer than this (scaled by the spectral range) are treated
# as one degenerate cluster and canonicalized together.
_CLUSTER_TOL = 1e-10


def _fm_populations_arr(amp: np.ndarray) -> tuple[float, float]:
    return float(abs(amp[-1]) ** 2), float(abs(amp[0]) ** 2)


def _noon_fidelity_arr(amp: np.ndarray) -> float:
    return float((abs(amp[0]) + abs(amp[-1])) ** 2 / 2.0)


def _parity_arr(amp: np.ndarray) -> float:
    # global spin flip reverses the bit pattern: ~b = (2**N - 1) - b
    return float(np.vdot(amp[::-1], amp).real)


def fm_populations(psi: StateVector) -> tuple[float, float]:
    """Populations (p_up, p_down) of the two ferromagnetic product states."""
    return _fm_populations_arr(psi.amplitudes)


def noon_fidelity(psi: StateVector) -> float:
    """Best overlap-squared with a NOON state over its relative phase.

    F = max_theta |<NOON(theta)|psi>|^2 = (|c_0| + |c_max|)^2 / 2. The
    phase optimization makes the figure insensitive to the benign relative
    phase a sweep may imprint between the two branches.
    """
    return _noon_fidelity_arr(psi.amplitudes)


def noon_overlap(psi: StateVector, relative_phase: float = 0.0) -> float:
    """Fixed-phase overlap |<NOON(theta)|psi>|^2 (diagnostic)."""
    amp = psi.amplitudes
    ov = (np.conj(1.0) * amp[0] + np.exp(-1j * relative_phase) * amp[-1]) / np.sqrt(2.0)
    return float(abs(ov) ** 2)


def parity_expectation(psi: StateVector) -> float:
    """Expectation of the global spin-flip operator P = prod_i sigma_x^i."""
    return _parity_arr(psi.amplitudes)


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    """Lowest eigenpairs of the dense Hamiltonian, ascending."""

    eigenvalues: np.ndarray
    eigenvectors: tuple[StateVector, ...]
    params: IsingParams


def _phase_fix(col: np.ndarray) -> np.ndarray:
    """Rotate a global phase so the largest-magnitude entry is real positive."""
    idx = int(np.argmax(np.abs(col)))
    ph = col[idx]
    if abs(ph) > 0:
        col = col * (np.conj(ph) / abs(ph))
    return col


def _split_by_operator(block: np.ndarray, opdiag_action) -> np.ndarray:
    """Rotate a degenerate block to eigenvectors of a commuting operator.

    ``opdiag_action(block)`` must return the operator applied to each
    column. Returns the rotated block, columns ordered by ascending
    operator expectation.
    """
    m = block.shape[1]
    if m == 1:
        return block
    op_small = block.conj().T @ opdiag_action(block)
    op_small = 0.5 * (op_small + op_small.conj().T)
    _, rot = np.linalg.eigh(op_small)
    return block @ rot


def _canonicalize_cluster(block: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis for one degenerate eigenspace.

    Diagonalizes parity within the block, then an index-weighting operator
    inside each parity sub-block to pin any remaining freedom, then fixes
    phases. Columns are ordered by (parity expectation, dominant basis
    index), both ascending.
    """
    dim = block.shape[0]
    block = _split_by_operator(block, lambda v: v[::-1, :])
    parities = np.real(np.einsum("bk,bk->k", block[::-1, :].conj(), block))

    # same-parity sub-blocks: split with a fixed generic diagonal operator
    weights = np.arange(dim, dtype=np.float64) / dim
    cols = []
    order = np.argsort(np.round(parities, 9), kind="stable")
    block = block[:, order]
    parities = parities[order]
    i = 0
    m = block.shape[1]
    while i < m:
        j = i + 1
        while j < m and abs(parities[j] - parities[i]) < 1e-6:
            j += 1
        sub = _split_by_operator(block[:, i:j], lambda v: weights[:, None] * v)
        cols.extend(_phase_fix(sub[:, c]) for c in range(sub.shape[1]))
        i = j

    keys = [
        (round(float(np.vdot(c[::-1], c).real), 9), int(np.argmax(np.abs(c))))
        for c in cols
    ]
    order = sorted(range(len(cols)), key=lambda i: keys[i])
    return np.column_stack([cols[i] for i in order])


def exact_spectrum(params: IsingParams, k: int) -> SpectrumResult:
    """Lowest ``k`` eigenpairs of the dense Hamiltonian.

    Degenerate clusters are returned in a deterministic orthonormal basis
    (see :func:`_canonicalize_cluster`); isolated eigenvectors get a fixed
    global phase. Limited to chains the dense builder accepts.
    """
    basis = SpinBasis(params.n_spins)
    if not 1 <= k <= basis.dim:
        raise ValueError(f"k must be in [1, {basis.dim}], got {k}")
    h = build_dense(params)
    w, v = np.linalg.eigh(h)

    tol = _CLUSTER_TOL * max(1.0, float(np.abs(w).max()))
    i = 0
    while i < min(k, len(w)):
        j = i + 1
        while j < len(w) and w[j] - w[j - 1] <= tol:
            j += 1
        if j - i > 1:
            v[:, i:j] = _canonicalize_cluster(v[:, i:j])
        else:
            v[:, i] = _phase_fix(v[:, i])
        i = j

    vectors = tuple(StateVector(basis, v[:, c]) for c in range(k))
    return SpectrumResult(eigenvalues=w[:k].copy(), eigenvectors=vectors,
                          params=params)
