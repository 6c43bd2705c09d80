"""Spin-1/2 chain basis conventions and the state-vector container.

Basis convention used everywhere in this package: a basis index ``b`` in
``[0, 2**N)`` encodes the z-projection of every spin, with bit ``i`` of
``b`` equal to 1 when spin ``i`` points up. Spin 0 is the least
significant bit. Global phase is never canonicalized; comparisons go
through overlaps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_MAX_SPINS = 20


class DimensionCapError(ValueError):
    """Requested chain length exceeds the configured memory cap."""


class BasisMismatchError(ValueError):
    """Two states (or a state and an operator) live on different bases."""


@dataclass(frozen=True)
class SpinBasis:
    """Computational (sigma-z) basis of an N-spin chain.

    Args:
        n_spins: number of spins N, 1 <= N <= max_spins.
        max_spins: cap on N; 2**N complex amplitudes must fit in memory.
    """

    n_spins: int
    max_spins: int = DEFAULT_MAX_SPINS

    def __post_init__(self):
        if self.n_spins < 1:
            raise ValueError(f"need at least one spin, got {self.n_spins}")
        if self.n_spins > self.max_spins:
            raise DimensionCapError(
                f"n_spins={self.n_spins} exceeds cap {self.max_spins}"
            )

    @property
    def dim(self) -> int:
        return 1 << self.n_spins

    def indices(self) -> np.ndarray:
        """All basis indices, ascending."""
        return np.arange(self.dim, dtype=np.int64)

    def spin_values(self, site: int) -> np.ndarray:
        """sigma-z eigenvalues (+1 up, -1 down) of one site over the basis."""
        b = self.indices()
        return (2 * ((b >> site) & 1) - 1).astype(np.float64)

    def magnetization(self) -> np.ndarray:
        """Total sigma-z eigenvalue sum(s_i) per basis state."""
        b = self.indices()
        return (2 * np.bitwise_count(b).astype(np.int64) - self.n_spins).astype(
            np.float64
        )


@dataclass(frozen=True, eq=False)
class StateVector:
    """Complex amplitudes over the 2**N computational basis.

    Amplitudes are copied on construction and frozen; states are safe to
    share across threads. Operator applications (which return unnormalized
    vectors) use the same container.
    """

    basis: SpinBasis
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.amplitudes, dtype=np.complex128, copy=True)
        if arr.shape != (self.basis.dim,):
            raise ValueError(
                f"amplitude array has shape {arr.shape}, expected ({self.basis.dim},)"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "amplitudes", arr)

    @property
    def n_spins(self) -> int:
        return self.basis.n_spins

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.basis, self.amplitudes / n)


def _require_same_basis(a: StateVector, b: StateVector) -> None:
    if a.basis.n_spins != b.basis.n_spins:
        raise BasisMismatchError(
            f"basis mismatch: {a.basis.n_spins} vs {b.basis.n_spins} spins"
        )


def make_product_x_state(basis: SpinBasis, direction: int) -> StateVector:
    """Product state of all spins aligned along +x or -x.

    ``direction=+1`` gives the uniform superposition  2**(-N/2) on every
    basis state (all spins in (|down> + |up>)/sqrt(2)); ``direction=-1``
    attaches a sign (-1)**popcount(b) instead.
    """
    if direction not in (+1, -1):
        raise ValueError(f"direction must be +1 or -1, got {direction}")
    dim = basis.dim
    amp = np.full(dim, 2.0 ** (-basis.n_spins / 2.0), dtype=np.complex128)
    if direction == -1:
        signs = 1.0 - 2.0 * (np.bitwise_count(basis.indices()) & 1)
        amp *= signs
    return StateVector(basis, amp)


def make_noon_state(basis: SpinBasis, relative_phase: float = 0.0) -> StateVector:
    """GHZ/NOON state (|down...down> + e^{i phase} |up...up>)/sqrt(2)."""
    amp = np.zeros(basis.dim, dtype=np.complex128)
    amp[0] = 1.0 / np.sqrt(2.0)
    amp[-1] = np.exp(1j * relative_phase) / np.sqrt(2.0)
    return StateVector(basis, amp)


def overlap(a: StateVector, b: StateVector) -> complex:
    """Inner product <a|b> = sum(conj(a_b) * b_b)."""
    _require_same_basis(a, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes))
