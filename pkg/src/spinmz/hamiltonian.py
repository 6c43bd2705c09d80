"""Transverse-field Ising Hamiltonian with power-law couplings.

    H = - sum_{i<j} J_ij sigma_z^i sigma_z^j  -  B sum_i sigma_x^i
        + delta sum_i sigma_z^i,          J_ij = J / |i - j|**alpha

on an open chain (no periodic images). Sign conventions fixed here and
relied on everywhere else: sigma_z |up> = +|up>, sigma_z |down> = -|down>,
so a positive bias ``delta`` raises the energy of the all-up state. All
couplings are dimensionless; physical units enter only in
:mod:`spinmz.interferometer`.

Two independent construction routes are provided on purpose:
``apply_hamiltonian`` is matrix-free (bit arithmetic over basis indices),
``build_dense`` assembles the matrix from Kronecker products. Tests hold
them against each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .statevec import BasisMismatchError, DimensionCapError, SpinBasis, StateVector

DENSE_MAX_SPINS = 12


@dataclass(frozen=True)
class IsingParams:
    """Snapshot of the chain couplings.

    Args:
        n_spins: chain length N.
        j_nn: nearest-neighbor coupling J >= 0 (ferromagnetic).
        b_field: transverse field B, any sign.
        delta_bias: longitudinal bias delta (imperfection term), default 0.
        exponent: power-law decay exponent alpha > 0, default 3 (dipolar).
    """

    n_spins: int
    j_nn: float
    b_field: float
    delta_bias: float = 0.0
    exponent: float = 3.0

    def __post_init__(self):
        if self.n_spins < 1:
            raise ValueError(f"need at least one spin, got {self.n_spins}")
        if self.exponent <= 0:
            raise ValueError(f"power-law exponent must be > 0, got {self.exponent}")
        if self.j_nn < 0:
            raise ValueError(f"coupling must be >= 0, got {self.j_nn}")
        for name in ("j_nn", "b_field", "delta_bias", "exponent"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


@dataclass(frozen=True)
class FreeEvolutionParams:
    """Free-precession Hamiltonian H0 = omega0 * sum_i sigma_z^i."""

    n_spins: int
    omega0: float

    def __post_init__(self):
        if self.n_spins < 1:
            raise ValueError(f"need at least one spin, got {self.n_spins}")
        if not math.isfinite(self.omega0):
            raise ValueError("omega0 must be finite")


def coupling_matrix(params: IsingParams) -> np.ndarray:
    """Full coupling matrix J_ij = J / |i-j|**alpha, zero diagonal."""
    n = params.n_spins
    idx = np.arange(n)
    dist = np.abs(idx[:, None] - idx[None, :]).astype(np.float64)
    np.fill_diagonal(dist, np.inf)
    jmat = params.j_nn / dist**params.exponent
    np.fill_diagonal(jmat, 0.0)
    return jmat


class IsingKernel:
    """Matrix-free application of H over a fixed basis and exponent.

    Precomputes the J=1 coupling diagonal and the magnetization diagonal
    once; the scalars (J, B, delta) only rescale them, which is what makes
    time-dependent sweeps cheap. Instances are read-only after
    construction and safe to share.
    """

    def __init__(self, basis: SpinBasis, exponent: float = 3.0):
        self.basis = basis
        self.exponent = exponent
        n = basis.n_spins
        # zz_unit[b] = - sum_{i<j} s_i(b) s_j(b) / |i-j|**alpha
        zz = np.zeros(basis.dim, dtype=np.float64)
        for i in range(n):
            s_i = basis.spin_values(i)
            for j in range(i + 1, n):
                zz -= (1.0 / (j - i) ** exponent) * s_i * basis.spin_values(j)
        self.zz_unit = zz
        self.mz = basis.magnetization()
        self.zz_unit.flags.writeable = False
        self.mz.flags.writeable = False

    def diagonal(self, j_nn: float, delta: float, out: np.ndarray | None = None) -> np.ndarray:
        """Diagonal of H for scalars (J, delta): J*zz_unit + delta*mz."""
        if out is None:
            out = np.empty(self.basis.dim, dtype=np.float64)
        np.multiply(self.zz_unit, j_nn, out=out)
        if delta != 0.0:
            out += delta * self.mz
        return out

    def apply_with_diagonal(
        self, diag: np.ndarray, b_field: float, psi: np.ndarray, out: np.ndarray
    ) -> np.ndarray:
        """out = H psi with the diagonal part supplied precomputed."""
        np.multiply(diag, psi, out=out)
        if b_field != 0.0:
            n = self.basis.n_spins
            for i in range(n):
                block = 1 << i
                p = psi.reshape(-1, 2, block)
                o = out.reshape(-1, 2, block)
                # -B sigma_x^i: couple b and b with bit i flipped
                o[:, 0, :] -= b_field * p[:, 1, :]
                o[:, 1, :] -= b_field * p[:, 0, :]
        return out

    def apply(
        self, j_nn: float, b_field: float, delta: float, psi: np.ndarray, out: np.ndarray
    ) -> np.ndarray:
        diag = self.diagonal(j_nn, delta)
        return self.apply_with_diagonal(diag, b_field, psi, out)


def apply_hamiltonian(params: IsingParams, psi: StateVector) -> StateVector:
    """Operator application H|psi>, computed matrix-free.

    The result is not normalized (it is not a state in general).
    """
    if params.n_spins != psi.n_spins:
        raise BasisMismatchError(
            f"params have {params.n_spins} spins, state has {psi.n_spins}"
        )
    kernel = IsingKernel(psi.basis, params.exponent)
    out = np.empty(psi.basis.dim, dtype=np.complex128)
    kernel.apply(params.j_nn, params.b_field, params.delta_bias, psi.amplitudes, out)
    return StateVector(psi.basis, out)


def apply_free_hamiltonian(params: FreeEvolutionParams, psi: StateVector) -> StateVector:
    """Operator application H0|psi> = omega0 * m_z(b) * c_b (diagonal)."""
    if params.n_spins != psi.n_spins:
        raise BasisMismatchError(
            f"params have {params.n_spins} spins, state has {psi.n_spins}"
        )
    mz = psi.basis.magnetization()
    return StateVector(psi.basis, params.omega0 * mz * psi.amplitudes)


def _site_operator(op: np.ndarray, site: int, n_spins: int) -> np.ndarray:
    """Embed a single-site 2x2 operator at ``site`` (site 0 = LSB)."""
    mat = np.eye(1)
    for k in range(n_spins - 1, -1, -1):
        mat = np.kron(mat, op if k == site else np.eye(2))
    return mat


def _site_z_diagonal(site: int, n_spins: int) -> np.ndarray:
    """Diagonal of sigma_z at ``site`` via Kronecker products of [-1, +1]."""
    zdiag = np.array([-1.0, 1.0])
    v = np.ones(1)
    for k in range(n_spins - 1, -1, -1):
        v = np.kron(v, zdiag if k == site else np.ones(2))
    return v


def build_dense(params: IsingParams) -> np.ndarray:
    """Dense Hermitian matrix of H, assembled from Kronecker products.

    Independent of the matrix-free path; intended as its cross-check and
    as input to the dense eigensolver. Limited to small chains.
    """
    n = params.n_spins
    if n > DENSE_MAX_SPINS:
        raise DimensionCapError(
            f"dense matrix limited to {DENSE_MAX_SPINS} spins, got {n}"
        )
    dim = 1 << n
    jmat = coupling_matrix(params)

    diag = np.zeros(dim, dtype=np.float64)
    zdiags = [_site_z_diagonal(i, n) for i in range(n)]
    for i in range(n):
        if params.delta_bias != 0.0:
            diag += params.delta_bias * zdiags[i]
        for j in range(i + 1, n):
            diag -= jmat[i, j] * zdiags[i] * zdiags[j]

    h = np.zeros((dim, dim), dtype=np.complex128)
    h[np.diag_indices(dim)] = diag
    if params.b_field != 0.0:
        sigma_x = np.array([[0.0, 1.0], [1.0, 0.0]])
        for i in range(n):
            h -= params.b_field * _site_operator(sigma_x, i, n)
    return h
