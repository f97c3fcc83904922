import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phasespace.errors import GridError, GridMismatchError, ValidationError
from phasespace.numerics import (Kind, PhaseSpaceFunction, fourier_shift, gaussian_convolve_2d,
                                 integrate_1d, integrate_2d, make_grid, require_same_grid, rms,
                                 sample_at, spectral_derivative, spectral_upsample)


# --- grids -----------------------------------------------------------------

@given(q_min=st.floats(-50, 50), length=st.floats(0.5, 100), exponent=st.integers(3, 10),
       hbar=st.floats(0.01, 10))
def test_grid_conjugacy(q_min, length, exponent, hbar):
    grid = make_grid(q_min, q_min + length, 2 ** exponent, hbar)
    assert grid.dq * grid.dp * grid.n_q == pytest.approx(2 * math.pi * hbar, rel=1e-12)
    assert grid.p[grid.n_p // 2] == 0.0


@pytest.mark.parametrize('args', [
    (-8, 8, 500, 1.0),
    (8, -8, 512, 1.0),
    (-8, 8, 4, 1.0),
    (-8, 8, 512, 0.0),
    (-8, float('inf'), 512, 1.0),
])
def test_invalid_grid_rejected(args):
    with pytest.raises(GridError):
        make_grid(*args)


def test_mesh_layout(desk_grid):
    q, p = desk_grid.mesh()
    assert q.shape == (512, 512)
    assert np.all(q[:, 0] == desk_grid.q)
    assert np.all(p[0, :] == desk_grid.p)


def test_grid_mismatch(desk_grid, wide_grid):
    require_same_grid(desk_grid, make_grid(-8, 8, 512))
    with pytest.raises(GridMismatchError):
        require_same_grid(desk_grid, wide_grid)
    with pytest.raises(GridMismatchError):
        require_same_grid(desk_grid, make_grid(-8, 8, 512, hbar=0.5))


def test_values_shape_checked(desk_grid):
    with pytest.raises(GridError):
        PhaseSpaceFunction(desk_grid, np.zeros((512, 256)))


# --- integration -----------------------------------------------------------

def test_integrate_gaussian(desk_grid):
    assert integrate_1d(np.exp(-desk_grid.q ** 2), desk_grid.dq) == pytest.approx(math.sqrt(math.pi), abs=1e-10)

    q, p = desk_grid.mesh()
    F = PhaseSpaceFunction(desk_grid, np.exp(-q ** 2 - p ** 2) / math.pi)
    assert integrate_2d(F) == pytest.approx(1.0, abs=1e-10)


def test_integrate_empty():
    with pytest.raises(ValidationError):
        integrate_1d([], 0.1)


# --- spectral helpers ------------------------------------------------------

def test_spectral_derivative_periodic():
    x = 2 * np.pi * np.arange(64) / 64
    assert np.max(np.abs(spectral_derivative(np.sin(3 * x), x[1], 1) - 3 * np.cos(3 * x))) < 1e-10
    assert np.max(np.abs(spectral_derivative(np.sin(3 * x), x[1], 2) + 9 * np.sin(3 * x))) < 1e-9


def test_fourier_shift_whole_cells(desk_grid):
    values = np.exp(-(desk_grid.q - 0.3) ** 2)
    shifted = fourier_shift(values, 5 * desk_grid.dq, desk_grid.dq)
    assert np.max(np.abs(shifted - np.roll(values, 5))) < 1e-12


@given(shift=st.floats(-2, 2))
@settings(max_examples=25)
def test_fourier_shift_subcell(shift):
    grid = make_grid(-8, 8, 256)
    shifted = fourier_shift(np.exp(-grid.q ** 2), shift, grid.dq)
    assert np.max(np.abs(shifted - np.exp(-(grid.q - shift) ** 2))) < 1e-10


def test_fourier_shift_per_row(desk_grid):
    q = desk_grid.q[:, None]
    field = np.exp(-q ** 2) * np.exp(-desk_grid.p[None, :] ** 2 / 16)
    sheared = fourier_shift(field, 0.5 * desk_grid.q, desk_grid.dp, axis=1)
    expected = np.exp(-q ** 2) * np.exp(-(desk_grid.p[None, :] - 0.5 * q) ** 2 / 16)
    assert np.max(np.abs(sheared - expected)) < 1e-10


def test_spectral_upsample(desk_grid):
    values = np.exp(-desk_grid.q ** 2)
    fine = spectral_upsample(values, 2)
    assert fine.shape == (1024,)
    assert np.max(np.abs(fine[::2] - values)) < 1e-12
    midpoints = desk_grid.q + 0.5 * desk_grid.dq
    assert np.max(np.abs(fine[1::2] - np.exp(-midpoints ** 2))) < 1e-10


# --- interpolation and smoothing -------------------------------------------

def test_sample_at_linear_field(desk_grid):
    q, p = desk_grid.mesh()
    F = PhaseSpaceFunction(desk_grid, 2 * q + 3 * p)
    points_q = np.array([0.123, -1.77, 3.01])
    points_p = np.array([4.4, -0.91, 12.3])
    assert np.allclose(sample_at(F, points_q, points_p), 2 * points_q + 3 * points_p, atol=1e-10)
    assert sample_at(F, np.array([50.0]), np.array([0.0]))[0] == 0.0


def test_gaussian_convolution_preserves_mass(desk_grid):
    q, p = desk_grid.mesh()
    F = PhaseSpaceFunction(desk_grid, np.exp(-q ** 2 - p ** 2) / math.pi)
    smoothed = gaussian_convolve_2d(F, 0.4, 1.2)
    assert integrate_2d(smoothed) == pytest.approx(integrate_2d(F), abs=1e-12)
    assert smoothed.values.min() > -1e-12
    assert smoothed.values.max() < F.values.max()


@given(first=st.floats(0.2, 1.0), second=st.floats(0.2, 1.0))
@settings(max_examples=20, deadline=None)
def test_gaussian_convolution_semigroup(first, second):
    grid = make_grid(-8, 8, 256)
    q, p = grid.mesh()
    F = PhaseSpaceFunction(grid, np.exp(-q ** 2 - p ** 2))
    twice = gaussian_convolve_2d(gaussian_convolve_2d(F, first, 0.0), second, 0.0)
    once = gaussian_convolve_2d(F, math.hypot(first, second), 0.0)
    assert np.max(np.abs(twice.values - once.values)) < 1e-10


def test_gaussian_convolution_rejects_negative_width(desk_grid):
    F = PhaseSpaceFunction(desk_grid, np.zeros((512, 512)))
    with pytest.raises(ValidationError):
        gaussian_convolve_2d(F, -0.1, 0.1)


def test_with_values_keeps_grid(desk_grid):
    F = PhaseSpaceFunction(desk_grid, np.ones((512, 512)), Kind.HUSIMI, 1.0)
    G = F.with_values(np.zeros((512, 512)))
    assert G.grid is desk_grid and G.kind == Kind.HUSIMI and G.parameter == 1.0
    assert rms(F.values, G.values) == 1.0
