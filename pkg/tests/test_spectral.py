import numpy as np
import pytest
from scipy.linalg import eigh, expm

from vacdetect.spectral import ArrowheadSpectrum


def arrowhead(apex, poles, couplings):
    n = poles.size + 1
    h = np.zeros((n, n))
    h[0, 0] = apex
    h[0, 1:] = h[1:, 0] = couplings
    h[np.arange(1, n), np.arange(1, n)] = poles
    return h


def cases():
    rng = np.random.default_rng(7)
    d = np.linspace(-3, 3, 41)
    z = rng.uniform(0.01, 0.3, d.size)
    yield "generic", 0.1, d, z
    yield "degenerate pairs", 0.1, np.concatenate([d, d]), np.concatenate([z, 0.5 * z])
    zz = np.concatenate([np.zeros(d.size), z])
    yield "zero couplings", -0.2, np.concatenate([d, d]), zz
    yield "tiny coupling", 0.0, np.append(d, 0.05), np.append(z, 1e-7)
    yield "uncoupled apex", 0.3, d, np.zeros(d.size)


@pytest.mark.parametrize("name, apex, poles, couplings", list(cases()), ids=[c[0] for c in cases()])
def test_matches_dense_eigh(name, apex, poles, couplings):
    spec = ArrowheadSpectrum(apex, poles, couplings)
    h = arrowhead(apex, poles, couplings)
    v = spec.dense()
    assert spec.size == h.shape[0]
    np.testing.assert_allclose(v.T @ v, np.eye(spec.size), atol=1e-12)
    np.testing.assert_allclose(h @ v, v * spec.eigenvalues, atol=1e-12)
    np.testing.assert_allclose(np.sort(spec.eigenvalues), eigh(h, eigvals_only=True), atol=1e-12)
    assert spec.orthogonality_defect() < 1e-12


def test_bilinear_is_matrix_exponential_entry():
    rng = np.random.default_rng(3)
    d = np.linspace(-2, 2, 31)
    z = rng.uniform(0.05, 0.2, d.size)
    spec = ArrowheadSpectrum(0.2, d, z)
    h = arrowhead(0.2, d, z)
    x = rng.standard_normal(spec.size)
    y = rng.standard_normal(spec.size)
    times = np.array([0.0, 0.7, 3.1])
    got = spec.bilinear(spec.project(x), spec.project(y), times)
    want = [x @ expm(-1j * h * t) @ y for t in times]
    np.testing.assert_allclose(got, want, atol=1e-12)


def test_apply_accepts_matrix_of_coefficients():
    d = np.linspace(-1, 1, 11)
    spec = ArrowheadSpectrum(0.0, d, np.full(d.size, 0.1))
    c = np.random.default_rng(0).standard_normal((spec.size, 3))
    batched = spec.apply(c)
    for j in range(3):
        np.testing.assert_allclose(batched[:, j], spec.apply(c[:, j]), atol=1e-14)


def test_evolve_is_phase():
    d = np.linspace(-1, 1, 5)
    spec = ArrowheadSpectrum(0.0, d, np.full(5, 0.2))
    c = np.ones(spec.size)
    np.testing.assert_allclose(spec.evolve(c, 2.0), np.exp(-2j * spec.eigenvalues))


def test_shape_errors():
    spec = ArrowheadSpectrum(0.0, np.array([1.0, 2.0]), np.array([0.1, 0.1]))
    with pytest.raises(ValueError):
        spec.project(np.ones(5))
    with pytest.raises(ValueError):
        spec.apply(np.ones(2))


def test_large_flat_band_stays_orthogonal():
    d = np.linspace(-40, 40, 2001)
    spec = ArrowheadSpectrum(0.0, np.concatenate([d, d, [0.0]]), np.concatenate([np.full(2001, 0.08), np.full(2001, 0.05), [1e-4]]))
    assert spec.orthogonality_defect() < 1e-12
