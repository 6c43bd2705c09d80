import numpy as np
import pytest

from spinmz.hamiltonian import IsingParams, build_dense
from spinmz.observables import (
    exact_spectrum,
    fm_populations,
    noon_fidelity,
    noon_overlap,
    parity_expectation,
)
from spinmz.statevec import SpinBasis, StateVector, make_noon_state, make_product_x_state

from goldens import EIGENVALUES_N3_MIDPOINT


def random_state(n, rng):
    amp = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return StateVector(SpinBasis(n), amp / np.linalg.norm(amp))


def basis_state(n, index):
    amp = np.zeros(1 << n, dtype=complex)
    amp[index] = 1.0
    return StateVector(SpinBasis(n), amp)


def test_fm_populations():
    pu, pd = fm_populations(make_noon_state(SpinBasis(3), 0.0))
    assert abs(pu - 0.5) < 1e-15 and abs(pd - 0.5) < 1e-15
    pu, pd = fm_populations(make_product_x_state(SpinBasis(4), +1))
    assert abs(pu - 1 / 16) < 1e-15 and abs(pd - 1 / 16) < 1e-15
    assert fm_populations(basis_state(3, 7)) == (1.0, 0.0)


def test_noon_fidelity_cases():
    for phase in (0.0, 1.0, np.pi):
        assert abs(noon_fidelity(make_noon_state(SpinBasis(3), phase)) - 1) < 1e-15
    assert abs(noon_fidelity(basis_state(3, 7)) - 0.5) < 1e-15
    assert abs(noon_fidelity(make_product_x_state(SpinBasis(2), +1)) - 0.5) < 1e-15


def test_noon_overlap_phase_sensitive():
    psi = make_noon_state(SpinBasis(3), np.pi)
    assert abs(noon_overlap(psi, np.pi) - 1.0) < 1e-15
    assert noon_overlap(psi, 0.0) < 1e-15
    assert abs(noon_fidelity(psi) - 1.0) < 1e-15


def test_noon_fidelity_bounds_random():
    rng = np.random.default_rng(2)
    for _ in range(50):
        psi = random_state(4, rng)
        f = noon_fidelity(psi)
        pu, pd = fm_populations(psi)
        assert (pu + pd) / 2 - 1e-12 <= f <= 1.0 + 1e-12


def test_fm_population_bounds_random():
    rng = np.random.default_rng(4)
    for _ in range(20):
        pu, pd = fm_populations(random_state(3, rng))
        assert 0 <= pu <= 1 and 0 <= pd <= 1 and pu + pd <= 1 + 1e-12


def test_parity_expectation_cases():
    assert abs(parity_expectation(make_product_x_state(SpinBasis(3), +1)) - 1) < 1e-15
    assert abs(parity_expectation(make_noon_state(SpinBasis(3), 0.0)) - 1) < 1e-15
    assert abs(parity_expectation(make_noon_state(SpinBasis(3), np.pi)) + 1) < 1e-15
    assert abs(parity_expectation(basis_state(2, 1))) < 1e-15


# ------------------------------------------------------------ exact spectrum


def test_spectrum_single_spin():
    spec = exact_spectrum(IsingParams(1, 0.0, 1.0), 2)
    assert np.allclose(spec.eigenvalues, [-1.0, 1.0])
    ground = spec.eigenvectors[0].amplitudes
    assert np.allclose(ground, [1 / np.sqrt(2), 1 / np.sqrt(2)])


def test_spectrum_degenerate_fm_pair():
    spec = exact_spectrum(IsingParams(2, 1.0, 0.0), 2)
    assert np.allclose(spec.eigenvalues, [-1.0, -1.0])
    # canonical order inside the cluster: parity -1 first, then +1
    p0 = parity_expectation(spec.eigenvectors[0])
    p1 = parity_expectation(spec.eigenvectors[1])
    assert abs(p0 + 1) < 1e-10 and abs(p1 - 1) < 1e-10
    s = 1 / np.sqrt(2)
    assert np.allclose(spec.eigenvectors[0].amplitudes, [s, 0, 0, -s])
    assert np.allclose(spec.eigenvectors[1].amplitudes, [s, 0, 0, s])


def test_spectrum_midpoint_matches_oracle():
    spec = exact_spectrum(IsingParams(3, 1.0, 1.0), 8)
    assert np.max(np.abs(spec.eigenvalues - EIGENVALUES_N3_MIDPOINT)) < 1e-9


def test_spectrum_residuals_and_orthonormality():
    rng = np.random.default_rng(8)
    for _ in range(5):
        n = int(rng.integers(1, 5))
        params = IsingParams(n, rng.uniform(0, 2), rng.uniform(-2, 2),
                             rng.uniform(-0.3, 0.3))
        k = int(rng.integers(1, (1 << n) + 1))
        spec = exact_spectrum(params, k)
        h = build_dense(params)
        vecs = np.column_stack([v.amplitudes for v in spec.eigenvectors])
        gram = vecs.conj().T @ vecs
        assert np.max(np.abs(gram - np.eye(k))) < 1e-10
        for lam, v in zip(spec.eigenvalues, spec.eigenvectors):
            assert np.linalg.norm(h @ v.amplitudes - lam * v.amplitudes) < 1e-9
        assert np.all(np.diff(spec.eigenvalues) >= -1e-12)


def test_spectrum_parity_definite_without_bias():
    params = IsingParams(4, 1.0, 0.7)
    spec = exact_spectrum(params, 16)
    w = spec.eigenvalues
    for i, v in enumerate(spec.eigenvectors):
        gap_ok = (i == 0 or w[i] - w[i - 1] > 1e-8) and (
            i == len(w) - 1 or w[i + 1] - w[i] > 1e-8
        )
        if gap_ok:
            assert abs(abs(parity_expectation(v)) - 1.0) < 1e-8


def test_spectrum_deterministic():
    a = exact_spectrum(IsingParams(3, 0.0, 1.0), 8)  # heavily degenerate
    b = exact_spectrum(IsingParams(3, 0.0, 1.0), 8)
    for va, vb in zip(a.eigenvectors, b.eigenvectors):
        assert np.array_equal(va.amplitudes, vb.amplitudes)


def test_spectrum_validation():
    with pytest.raises(ValueError):
        exact_spectrum(IsingParams(2, 1.0, 1.0), 0)
    with pytest.raises(ValueError):
        exact_spectrum(IsingParams(2, 1.0, 1.0), 5)
