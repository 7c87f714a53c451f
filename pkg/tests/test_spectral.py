import math

import numpy as np
import pytest

from backend.stratsim.core.numerics.spectral import Symbol
from backend.stratsim.core.numerics.spectral import SpectralField
from backend.stratsim.core.numerics.spectral import VectorField
from backend.stratsim.core.numerics.spectral import apply_symbol
from backend.stratsim.core.numerics.spectral import dealias
from backend.stratsim.core.numerics.spectral import forward_transform
from backend.stratsim.core.numerics.spectral import inverse_transform
from backend.stratsim.core.numerics.spectral import make_grid
from backend.stratsim.core.numerics.spectral import pad
from backend.stratsim.core.numerics.spectral import symbol_values
from backend.stratsim.core.numerics.spectral import truncate
from backend.stratsim.foundation.exceptions import GridMismatchError
from backend.stratsim.foundation.exceptions import InvalidArgumentError
from backend.stratsim.foundation.exceptions import NonzeroMeanError


@pytest.mark.parametrize(
    ("n", "length", "fraction"),
    [(12, 1.0, 0.5), (4, 1.0, 0.5), (16, 0.0, 0.5), (16, math.inf, 0.5), (16, 1.0, 0.0), (16, 1.0, 1.5)],
)
def test_make_grid_rejects_invalid_geometry(n, length, fraction):
    with pytest.raises(InvalidArgumentError):
        make_grid(n, length, fraction)


def test_mode_index_is_in_fft_order():
    grid = make_grid(8, 1.0)
    assert grid.mode_index.tolist() == [0, 1, 2, 3, -4, -3, -2, -1]
    assert grid.frequency_spacing == pytest.approx(2.0 * math.pi)


def test_odd_frequencies_vanish_on_the_nyquist_index(grid):
    xi1, xi2 = grid.xi
    odd1, odd2 = grid.odd_xi
    nyquist = grid.n // 2
    assert xi1[nyquist, 0] == -nyquist * grid.frequency_spacing
    assert np.all(odd1[nyquist, :] == 0)
    assert np.all(odd2[:, nyquist] == 0)
    assert np.array_equal(odd1[1:nyquist], xi1[1:nyquist])


def test_zero_mode_is_the_mean(sampled):
    field = sampled(lambda x1, x2: 3.0 + np.cos(x1) * np.sin(2.0 * x2))
    assert field.mean.real == pytest.approx(3.0, abs=1e-14)
    assert not field.is_mean_zero()
    assert field.without_mean().is_mean_zero()


def test_inverse_transform_recovers_samples(grid, rng):
    samples = rng.standard_normal((grid.n, grid.n))
    restored = inverse_transform(forward_transform(samples, grid))
    assert np.allclose(restored, samples, atol=1e-13)


def test_parseval_norm_and_inner_product(sampled):
    field = sampled(lambda x1, x2: np.cos(x1))
    # integral of cos^2 over the 2 pi box is 2 pi^2
    assert field.l2_norm() == pytest.approx(math.sqrt(2.0) * math.pi, rel=1e-13)
    assert field.inner(field) == pytest.approx(2.0 * math.pi**2, rel=1e-13)


def test_forward_transform_rejects_bad_samples(grid):
    with pytest.raises(GridMismatchError):
        forward_transform(np.zeros((grid.n, grid.n + 1)), grid)
    with pytest.raises(InvalidArgumentError):
        forward_transform(np.zeros((grid.n, grid.n), dtype=complex), grid)


def test_spectral_field_validation(grid):
    with pytest.raises(GridMismatchError):
        SpectralField(grid, np.zeros((grid.n // 2, grid.n // 2)))
    coeffs = np.zeros((grid.n, grid.n), dtype=complex)
    coeffs[0, 0] = 1.0
    with pytest.raises(NonzeroMeanError):
        SpectralField(grid, coeffs, zero_mode_policy=True)


def test_fields_on_different_grids_do_not_mix(grid):
    other = make_grid(grid.n, 2.0 * grid.domain_length)
    with pytest.raises(GridMismatchError):
        SpectralField.zeros(grid) + SpectralField.zeros(other)


def test_hermitian_defect(grid, random_field):
    assert random_field().hermitian_defect() < 1e-14
    coeffs = np.zeros((grid.n, grid.n), dtype=complex)
    coeffs[1, 0] = 1.0
    assert SpectralField(grid, coeffs).hermitian_defect() == pytest.approx(1.0)


def test_partial_derivative_of_sine(grid, sampled):
    x1, _ = grid.coordinates
    derivative = apply_symbol(sampled(lambda x1, x2: np.sin(x1)), Symbol.partial(1))
    assert np.allclose(derivative.to_physical(), np.cos(x1), atol=1e-13)


def test_riesz_transform_turns_cosine_into_sine(grid, sampled):
    x1, _ = grid.coordinates
    transformed = apply_symbol(sampled(lambda x1, x2: np.cos(x1)), Symbol.riesz(1))
    assert np.allclose(transformed.to_physical(), np.sin(x1), atol=1e-13)


def test_mod_nabla_and_inverse_laplacian(grid, sampled):
    x1, x2 = grid.coordinates
    wave = sampled(lambda x1, x2: np.cos(3.0 * x1 + 4.0 * x2))
    assert np.allclose(apply_symbol(wave, Symbol.mod_nabla(1)).to_physical(), 5.0 * np.cos(3.0 * x1 + 4.0 * x2), atol=1e-12)
    pair = sampled(lambda x1, x2: np.cos(x1) + np.cos(2.0 * x2))
    expected = -np.cos(x1) - 0.25 * np.cos(2.0 * x2)
    assert np.allclose(apply_symbol(pair, Symbol.inv_laplace()).to_physical(), expected, atol=1e-13)


def test_perp_gradient_is_a_vector_field(grid, sampled):
    x1, _ = grid.coordinates
    velocity = apply_symbol(sampled(lambda x1, x2: np.cos(x1)), Symbol.perp_grad_inv_mod())
    assert isinstance(velocity, VectorField)
    assert np.allclose(velocity.first.to_physical(), 0.0, atol=1e-13)
    assert np.allclose(velocity.second.to_physical(), -np.sin(x1), atol=1e-13)


def test_negative_powers_need_mean_zero_data(sampled):
    field = sampled(lambda x1, x2: 1.0 + np.cos(x1))
    with pytest.raises(NonzeroMeanError):
        apply_symbol(field, Symbol.mod_nabla(-1))
    with pytest.raises(NonzeroMeanError):
        apply_symbol(field, Symbol.inv_laplace())
    # zero-order symbols accept any data
    apply_symbol(field, Symbol.riesz(2))


def test_dispersion_symbol_kappa_override(grid):
    field = SpectralField(grid, np.ones((grid.n, grid.n)))
    overridden = apply_symbol(field.without_mean(), Symbol.dispersion(1.0), kappa=3.0)
    assert np.array_equal(overridden.coeffs, symbol_values(grid, Symbol.dispersion(3.0)) * field.without_mean().coeffs)


def test_invalid_axis_is_rejected():
    with pytest.raises(InvalidArgumentError):
        Symbol.riesz(3)
    with pytest.raises(InvalidArgumentError):
        Symbol.partial(0)


def test_symbol_values_are_read_only(grid):
    values = symbol_values(grid, Symbol.riesz(1))
    with pytest.raises(ValueError, match="read-only"):
        values[0, 0] = 1.0


def test_dealias_removes_high_modes_and_is_idempotent(sampled):
    high = sampled(lambda x1, x2: np.cos(15.0 * x1))
    low = sampled(lambda x1, x2: np.cos(3.0 * x2))
    assert np.allclose(dealias(high).coeffs, 0.0)
    once = dealias(low + high)
    assert np.allclose(once.coeffs, low.coeffs, atol=1e-15)
    assert np.array_equal(dealias(once).coeffs, once.coeffs)


def test_pad_and_truncate(random_field):
    field = random_field()
    padded = pad(field, 2 * field.grid.n)
    assert padded.grid.n == 2 * field.grid.n
    assert padded.l2_norm() == pytest.approx(field.l2_norm(), rel=1e-14)
    assert np.array_equal(truncate(padded, field.grid.n).coeffs, field.coeffs)
    with pytest.raises(InvalidArgumentError):
        pad(field, field.grid.n // 2)
    with pytest.raises(InvalidArgumentError):
        truncate(field, 2 * field.grid.n)
