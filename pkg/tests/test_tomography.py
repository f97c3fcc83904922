import logging
import math

import numpy as np
import pytest

from phasespace.errors import ValidationError
from phasespace.numerics import Kind, rms
from phasespace.states import Coherent, Fock, Mixture, TwoGaussian, build_density, build_wavefunction
from phasespace.tomography import (BeamSplitter, DetectorModel, QuadratureHistogram, angular_artifact_level,
                                   default_angles, eight_port_measure, free_evolution_angle,
                                   free_evolution_quadrature, inverse_radon, loss_matrix, lossy_detection,
                                   radon_project, resample_histogram, ring_grid, ring_method, ring_method_on_grid)
from phasespace.wigner import husimi, marginals, s_parameterized, wigner_from_density, wigner_from_wavefunction


def _wigner(spec, grid, frame):
    return wigner_from_wavefunction(build_wavefunction(spec, frame, grid))


def _vacuum(q, p):
    return np.exp(-q ** 2 - p ** 2) / math.pi


# --- Radon transform -------------------------------------------------------

def test_axis_slices_are_marginals(square_grid, frame):
    W = _wigner(Coherent(1 + 0.5j), square_grid, frame)
    hist = radon_project(W, [0.0, math.pi / 2])
    position, momentum = marginals(W)
    assert np.max(np.abs(hist.values[0] - position)) < 1e-12
    assert np.max(np.abs(hist.values[1] - momentum)) < 1e-8


def test_slices_are_normalized(square_grid, frame):
    hist = radon_project(_wigner(TwoGaussian(2.0, 0.3), square_grid, frame), default_angles(8))
    assert np.allclose(hist.slice_norms(), 1.0, atol=1e-6)


def test_back_projection_recovers_cat(square_grid, frame):
    W = _wigner(TwoGaussian(2.0), square_grid, frame)
    hist = radon_project(W, default_angles(64))
    recovered = inverse_radon(hist, square_grid)
    assert recovered.kind == Kind.WIGNER
    assert rms(recovered.values, W.values) < 1e-2
    # negative fringes survive the reconstruction
    assert recovered.values.min() < -0.1


def test_back_projection_recovers_vacuum(desk_grid, frame):
    W = _wigner(Fock(0), desk_grid, frame)
    recovered = inverse_radon(radon_project(W, default_angles(32)), desk_grid)
    assert rms(recovered.values, W.values) < 1e-3


def test_back_projection_is_zero_outside_the_slices(desk_grid, frame):
    hist = radon_project(_wigner(Coherent(1.0), desk_grid, frame), default_angles(32))
    recovered = inverse_radon(hist, desk_grid)
    q, p = desk_grid.mesh()
    assert not recovered.values[np.hypot(q, p) > 8.0].any()


def test_back_projection_of_zero_histogram(square_grid):
    x = square_grid.q
    hist = QuadratureHistogram(default_angles(16), x, np.zeros((16, x.size)))
    assert not inverse_radon(hist, square_grid).values.any()


def test_back_projection_is_linear(square_grid, frame):
    angles = default_angles(32)
    first = radon_project(_wigner(Coherent(1.0), square_grid, frame), angles)
    second = radon_project(_wigner(Fock(1), square_grid, frame), angles)
    mixed = radon_project(wigner_from_density(build_density(
        Mixture(((0.3, Coherent(1.0)), (0.7, Fock(1)))), frame, square_grid)), angles)
    expected = (0.3 * inverse_radon(first, square_grid).values
                + 0.7 * inverse_radon(second, square_grid).values)
    assert np.max(np.abs(inverse_radon(mixed, square_grid).values - expected)) < 1e-8


def test_few_angles_warn(square_grid, frame, caplog):
    hist = radon_project(_wigner(Fock(0), square_grid, frame), default_angles(8))
    with caplog.at_level(logging.WARNING, logger='phasespace.tomography'):
        recovered = inverse_radon(hist, square_grid)
    assert recovered.kind == Kind.WIGNER
    assert 'streak artifacts' in caplog.text
    # the vacuum looks the same from every angle
    assert angular_artifact_level(hist) < 1e-6


def test_back_projection_arguments(square_grid):
    x = square_grid.q
    hist = QuadratureHistogram(default_angles(16), x, np.zeros((16, x.size)))
    with pytest.raises(ValidationError):
        inverse_radon(hist, square_grid, cutoff=1.5)
    shifted = QuadratureHistogram(default_angles(16) + 0.5, x, np.zeros((16, x.size)))
    with pytest.raises(ValidationError):
        inverse_radon(shifted, square_grid)


def test_histogram_validation():
    with pytest.raises(ValidationError):
        QuadratureHistogram([0.0], [0.0, 0.1, 0.3], np.zeros((1, 3)))
    with pytest.raises(ValidationError):
        QuadratureHistogram([0.0, 1.0], [0.0, 0.1, 0.2], np.zeros((1, 3)))


# --- detection models ------------------------------------------------------

def test_detector_and_beam_splitter():
    assert DetectorModel(0.5).s == -1.0
    assert BeamSplitter(0.3).R == pytest.approx(0.7)
    with pytest.raises(ValidationError):
        DetectorModel(0.0)
    with pytest.raises(ValidationError):
        BeamSplitter(0.3, 0.3)
    with pytest.raises(ValidationError):
        BeamSplitter(1.0)


def test_perfect_detector_is_identity(wide_grid, frame):
    W = _wigner(Fock(1), wide_grid, frame)
    assert lossy_detection(W, DetectorModel(1.0)) is W


@pytest.mark.parametrize('eta', [0.5, 0.8])
def test_lossy_vacuum_stays_vacuum(wide_grid, frame, eta):
    W = _wigner(Fock(0), wide_grid, frame)
    detected = lossy_detection(W, DetectorModel(eta), frame=frame)
    q, p = wide_grid.mesh()
    assert rms(detected.values, _vacuum(q, p)) < 1e-6
    unscaled = lossy_detection(W, DetectorModel(eta), rescale=False, frame=frame)
    assert unscaled.kind == Kind.S_PARAM and unscaled.parameter == pytest.approx(-(1 - eta) / eta)


def test_balanced_eight_port_gives_husimi(wide_grid, frame):
    W = _wigner(Fock(1), wide_grid, frame)
    measured = eight_port_measure(W, BeamSplitter(0.5), frame=frame)
    assert measured.kind == Kind.HUSIMI
    assert np.allclose(measured.values, husimi(W, frame.omega, frame).values, atol=1e-12)


def test_lossy_eight_port_is_smoother(wide_grid, frame):
    W = _wigner(Fock(1), wide_grid, frame)
    measured = eight_port_measure(W, BeamSplitter(0.5), efficiency=0.8, frame=frame)
    assert measured.kind == Kind.S_PARAM and measured.parameter == pytest.approx(-1.5)
    assert np.allclose(measured.values, s_parameterized(W, -1.5, frame).values, atol=1e-12)


def test_eight_port_rejections(wide_grid, frame):
    W = _wigner(Fock(0), wide_grid, frame)
    with pytest.raises(ValidationError):
        eight_port_measure(W, BeamSplitter(0.3), efficiency=0.9)
    with pytest.raises(ValidationError):
        eight_port_measure(husimi(W, 1.0), BeamSplitter(0.5))


@pytest.mark.parametrize('eta', [0.3, 0.75, 1.0])
def test_loss_matrix_is_stochastic(eta):
    L = loss_matrix(eta, 12)
    assert np.allclose(L.sum(axis=0), 1.0)
    assert np.all(np.triu(L) == L)


# --- photon counting -------------------------------------------------------

@pytest.mark.parametrize('spec, expected', [
    (Fock(0), lambda q, p: _vacuum(q, p)),
    (Fock(1), lambda q, p: (2 * (q ** 2 + p ** 2) - 1) * _vacuum(q, p)),
])
def test_ring_method_matches_wigner(desk_grid, frame, spec, expected):
    psi = build_wavefunction(spec, frame, desk_grid)
    q_points = np.array([0.0, 0.5, -1.3])
    p_points = np.array([-0.7, 0.0, 1.0])
    result = ring_method(psi, q_points, p_points)
    q, p = np.meshgrid(q_points, p_points, indexing='ij')
    assert np.allclose(result['values'], expected(q, p), atol=1e-8)
    assert not result['insufficient'].any()
    assert result['s'] == 0.0


@pytest.mark.parametrize('spec', [Fock(0), Coherent(1.0), TwoGaussian(1.5)])
def test_ring_method_on_sample_lattice(wide_grid, frame, spec):
    psi = build_wavefunction(spec, frame, wide_grid)
    W = wigner_from_wavefunction(psi)
    # 41 x 41 grid nodes around the origin
    rows = 256 + 6 * np.arange(-20, 21)
    cols = 256 + np.arange(-20, 21)
    result = ring_method(psi, wide_grid.q[rows], wide_grid.p[cols], cutoff=64)
    assert np.max(np.abs(result['values'] - W.values[np.ix_(rows, cols)])) < 1e-3
    assert np.max(np.abs(result['values'])) <= 1 / math.pi + 1e-9


def test_ring_method_on_density(desk_grid, frame):
    rho = build_density(Fock(1), frame, desk_grid)
    result = ring_method(rho, [0.0], [0.0])
    assert result['values'][0, 0] == pytest.approx(-1 / math.pi, abs=1e-8)


def test_lossy_ring_method_at_origin(desk_grid, frame):
    psi = build_wavefunction(Fock(0), frame, desk_grid)
    result = ring_method(psi, [0.0], [0.0], efficiency=0.8, transmission=0.625)
    assert result['s'] == pytest.approx(-1.0)
    assert result['values'][0, 0] == pytest.approx(0.5 / math.pi, abs=1e-8)


def test_ring_method_flags_truncated_statistics(desk_grid, frame):
    psi = build_wavefunction(Fock(0), frame, desk_grid)
    result = ring_method(psi, [3.0], [0.0], cutoff=4)
    assert result['insufficient'][0, 0]
    assert result['tail'][0, 0] > 0.1


def test_ring_method_on_grid(desk_grid, frame):
    psi = build_wavefunction(Fock(0), frame, desk_grid)
    reconstructed = ring_method_on_grid(psi, n_points=8)
    assert reconstructed.grid == ring_grid(8)
    assert reconstructed.grid.dq == pytest.approx(reconstructed.grid.dp)
    q, p = reconstructed.grid.mesh()
    assert np.allclose(reconstructed.values, _vacuum(q, p), atol=1e-8)


def test_ring_method_arguments(desk_grid, frame):
    psi = build_wavefunction(Fock(0), frame, desk_grid)
    with pytest.raises(ValidationError):
        ring_method(psi, [0.0], [0.0], cutoff=0)
    with pytest.raises(ValidationError):
        ring_method(psi, [0.0], [0.0], efficiency=1.5)


# --- free flight and sampling ----------------------------------------------

def test_free_evolution_angle():
    assert free_evolution_angle(0.0, 1.0, 1.0) == 0.0
    assert free_evolution_angle(1.0, 1.0, 1.0) == pytest.approx(math.pi / 4)
    assert free_evolution_angle(1e9, 1.0, 1.0) == pytest.approx(math.pi / 2)
    with pytest.raises(ValidationError):
        free_evolution_angle(-1.0, 1.0, 1.0)


def test_free_flight_samples_rotated_quadrature(square_grid, frame):
    W = _wigner(Coherent(1 + 1j), square_grid, frame)
    flown = free_evolution_quadrature(W, 0.5)
    theta = float(flown.angles[0])
    assert theta == pytest.approx(math.atan(0.5))
    projected = radon_project(W, [theta])
    assert np.max(np.abs(flown.values[0] - projected.values[0])) < 1e-2


def test_resampling_is_seeded(square_grid, frame):
    hist = radon_project(_wigner(Fock(1), square_grid, frame), default_angles(4))
    first = resample_histogram(hist, 5000, seed=3)
    second = resample_histogram(hist, 5000, seed=3)
    assert np.array_equal(first.values, second.values)
    assert not np.array_equal(first.values, resample_histogram(hist, 5000, seed=4).values)
    assert np.allclose(first.slice_norms(), 1.0, atol=1e-3)
    with pytest.raises(ValidationError):
        resample_histogram(hist, 0)
