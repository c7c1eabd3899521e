import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from oracles import brute_dft2, brute_idft2
from killrefine.denoise import (
    DenoiseConfig,
    MaskKind,
    Spectrum,
    dft2,
    filter_matrix,
    idft2,
    lowpass_mask,
    minmax_normalize,
    refine,
)
from killrefine.enhance import BooleanKillMatrix, EnhancedKillMatrix
from killrefine.errors import EmptyMatrix, NonNegligibleImaginary

IDENTITY = DenoiseConfig(0.75)


def test_dft2_identity_example():
    np.testing.assert_allclose(dft2([[1, 0], [0, 1]]).coefficients, [[2, 0], [0, 2]], atol=1e-12)


def test_dft2_constant():
    f = dft2(np.full((3, 5), 2.5)).coefficients
    assert f[0, 0] == pytest.approx(2.5 * 15)
    rest = f.copy()
    rest[0, 0] = 0
    assert np.abs(rest).max() < 1e-12


def test_dft2_rejects_empty():
    with pytest.raises(EmptyMatrix):
        dft2(np.zeros((0, 3)))


def test_idft2_examples():
    np.testing.assert_allclose(idft2(Spectrum(np.array([[2, 0], [0, 2]], dtype=complex))), [[1, 0], [0, 1]],
                               atol=1e-12)
    assert not idft2(Spectrum(np.zeros((3, 4), dtype=complex))).any()
    dc = np.zeros((3, 4), dtype=complex)
    dc[0, 0] = 12 * 0.7
    np.testing.assert_allclose(idft2(Spectrum(dc)), np.full((3, 4), 0.7))


def test_idft2_flags_non_hermitian_spectrum():
    f = np.zeros((4, 4), dtype=complex)
    f[0, 1] = 1.0  # no conjugate partner at (0, 3)
    with pytest.raises(NonNegligibleImaginary):
        idft2(Spectrum(f))


@pytest.mark.parametrize("shape", [(1, 1), (2, 3), (4, 4), (5, 7), (8, 3)])
def test_dft2_matches_direct_evaluation(shape):
    rng = np.random.default_rng(sum(shape))
    m = rng.normal(size=shape)
    np.testing.assert_allclose(dft2(m).coefficients, np.array(brute_dft2(m.tolist())), atol=1e-9)
    back = np.array(brute_idft2(brute_dft2(m.tolist())))
    np.testing.assert_allclose(back.real, m, atol=1e-9)


def test_mask_4x4_ideal():
    mask = lowpass_mask(4, 4, DenoiseConfig(0.3))
    kept = {tuple(int(i) for i in ij) for ij in np.argwhere(mask == 1)}
    assert kept == {(0, 0), (0, 1), (0, 3), (1, 0), (3, 0)}
    assert set(np.unique(mask)) == {0.0, 1.0}


@pytest.mark.parametrize("n_rows, n_cols", [(1, 1), (4, 4), (7, 3), (10, 50), (2, 9)])
def test_full_passband(n_rows, n_cols):
    assert (lowpass_mask(n_rows, n_cols, DenoiseConfig(0.75)) == 1).all()


@pytest.mark.parametrize("kind", list(MaskKind))
@pytest.mark.parametrize("d0", [0.01, 0.3, 1.0])
def test_dc_always_passes(kind, d0):
    assert lowpass_mask(6, 5, DenoiseConfig(d0, kind))[0, 0] == 1.0


def test_gaussian_values():
    mask = lowpass_mask(4, 4, DenoiseConfig(0.3, MaskKind.GAUSSIAN))
    # f = (0.25, 0.25): exp(-0.125 / 0.18)
    assert mask[1, 1] == pytest.approx(np.exp(-0.125 / 0.18))
    assert mask[2, 0] == pytest.approx(np.exp(-0.25 / 0.18))


@pytest.mark.parametrize("kind", list(MaskKind))
@pytest.mark.parametrize("shape", [(4, 4), (5, 6), (9, 2), (16, 11)])
def test_mask_symmetric_under_negation(kind, shape):
    mask = lowpass_mask(*shape, DenoiseConfig(0.27, kind))
    neg = mask[(-np.arange(shape[0])) % shape[0]][:, (-np.arange(shape[1])) % shape[1]]
    np.testing.assert_array_equal(mask, neg)


@pytest.mark.parametrize("bad", [0.0, -0.1, 1.5])
def test_cutoff_bounds(bad):
    with pytest.raises(ValueError):
        DenoiseConfig(bad)


def test_minmax_examples():
    np.testing.assert_allclose(minmax_normalize([[0, 1], [2, 3]]), [[0, 1 / 3], [2 / 3, 1]])
    np.testing.assert_array_equal(minmax_normalize([[5, 5]]), [[0, 0]])


def test_refine_identity_filter_on_enhanced_values():
    cells = np.array([[0, 1, 2], [2, 0, 1]])
    m = EnhancedKillMatrix(("a", "b"), ("x", "y", "z"), cells, [1, 0, 0])
    out = refine(m, IDENTITY)
    np.testing.assert_allclose(out.cells, cells / 2, atol=1e-12)
    assert out.rows == m.rows and out.cols == m.cols
    np.testing.assert_array_equal(out.fail_vector, m.fail_vector)


def test_refine_zero_and_scalar():
    z = BooleanKillMatrix(("a", "b"), ("x",), np.zeros((2, 1), dtype=int), [1])
    assert not refine(z).cells.any()
    one = BooleanKillMatrix(("a",), ("x",), np.array([[1]]), [1])
    np.testing.assert_array_equal(refine(one).cells, [[0.0]])


def test_low_cutoff_smooths_an_isolated_spike():
    cells = np.zeros((16, 16))
    cells[3, 3] = 1
    m = BooleanKillMatrix(tuple(map(str, range(16))), tuple(map(str, range(16))), cells, np.zeros(16))
    out = refine(m, DenoiseConfig(0.2)).cells
    assert out[3, 3] == 1.0  # spike remains the peak
    assert out[3, 4] > out[3, 8]  # energy spreads to neighbours first


matrices = hnp.arrays(np.float64, hnp.array_shapes(min_dims=2, max_dims=2, min_side=1, max_side=24),
                      elements=st.floats(-10, 10, allow_nan=False))


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_round_trip_and_parseval(m):
    f = dft2(m)
    np.testing.assert_allclose(idft2(f), m, atol=1e-9)
    energy = float(np.sum(m**2))
    spectral = float(np.sum(np.abs(f.coefficients) ** 2)) / m.size
    assert spectral == pytest.approx(energy, rel=1e-9, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(matrices, st.floats(0.01, 1.0), st.sampled_from(list(MaskKind)))
def test_filtering_stays_real_and_in_range(m, d0, kind):
    cfg = DenoiseConfig(d0, kind)
    spec = np.fft.ifft2(np.fft.fft2(m) * lowpass_mask(*m.shape, cfg))
    assert np.abs(spec.imag).max() < 1e-6
    filtered = filter_matrix(m, cfg)
    out = minmax_normalize(filtered)
    assert out.min() >= 0.0 and out.max() <= 1.0


@settings(max_examples=40, deadline=None)
@given(matrices)
def test_identity_filter_equals_minmax(m):
    k = EnhancedKillMatrix(tuple(map(str, range(m.shape[0]))), tuple(map(str, range(m.shape[1]))), m)
    np.testing.assert_allclose(refine(k, IDENTITY).cells, minmax_normalize(m), atol=1e-9)
