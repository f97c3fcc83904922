#!/usr/bin/env python3
"""
Quadrature tomography and measurement models
Radon projection, filtered back-projection, lossy homodyne and eight-port
detection, photon-counting (ring method) reconstruction and histogram noise
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Union

import numpy as np
from scipy import stats

from config import Config
from phasespace.dynamics import SymplecticMap2D, apply_symplectic
from phasespace.errors import ValidationError
from phasespace.numerics import (Kind, PhaseSpaceFunction, QuadratureGrid, fourier_shift,
                                 gaussian_convolve_2d, integrate_1d, integrate_2d, make_grid,
                                 sample_at)
from phasespace.states import DensityMatrix, OscillatorFrame, WaveFunction, frame_for, hermite_functions
from phasespace.wigner import marginals, s_parameterized

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class QuadratureHistogram:
    """pr(x, θ) sampled at angles[i] and positions x[j]"""

    angles: np.ndarray
    x: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        angles = np.atleast_1d(np.asarray(self.angles, dtype=float))
        x = np.asarray(self.x, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if x.ndim != 1 or x.size < 2:
            raise ValidationError("histogram positions must be a 1D array of at least two points")
        if not np.allclose(np.diff(x), x[1] - x[0], rtol=1e-9, atol=0.0):
            raise ValidationError("histogram positions must be uniformly spaced")
        if values.shape != (angles.size, x.size):
            raise ValidationError(f"histogram shape {values.shape} does not match "
                                  f"({angles.size} angles, {x.size} positions)")
        object.__setattr__(self, 'angles', angles)
        object.__setattr__(self, 'x', x)
        object.__setattr__(self, 'values', values)

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    def slice_norms(self) -> np.ndarray:
        return np.array([integrate_1d(row, self.dx) for row in self.values])


@dataclass(frozen=True)
class DetectorModel:
    efficiency: float = 1.0

    def __post_init__(self):
        if not 0 < self.efficiency <= 1:
            raise ValidationError(f"detector efficiency must lie in (0, 1], got {self.efficiency}")

    @property
    def s(self) -> float:
        """Ordering of the distribution a homodyne detector of this efficiency samples"""
        return -(1.0 - self.efficiency) / self.efficiency


@dataclass(frozen=True)
class BeamSplitter:
    T: float
    R: Optional[float] = None

    def __post_init__(self):
        R = 1.0 - self.T if self.R is None else float(self.R)
        if not (0 < self.T < 1 and 0 < R < 1):
            raise ValidationError(f"beam-splitter coefficients must lie in (0, 1), got T={self.T}, R={R}")
        if abs(self.T + R - 1.0) > 1e-12:
            raise ValidationError(f"T + R must equal 1, got {self.T + R!r}")
        object.__setattr__(self, 'R', R)

    @property
    def balanced(self) -> bool:
        return abs(self.T - 0.5) < 1e-12


def default_angles(count: Optional[int] = None) -> np.ndarray:
    count = Config.DEFAULT_ANGLES if count is None else int(count)
    if count < 1:
        raise ValidationError(f"need at least one angle, got {count}")
    return np.pi * np.arange(count) / count


def radon_project(W: PhaseSpaceFunction, angles: Sequence[float]) -> QuadratureHistogram:
    """
    pr(x, θ) = ∫ W(x cosθ − p sinθ, x sinθ + p cosθ) dp on the grid's q axis

    Each slice is the position marginal of W rotated by −θ.
    """
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    rows = []
    for angle in angles:
        rotated = apply_symplectic(W, SymplecticMap2D.rotation(-angle))
        rows.append(marginals(rotated)[0])
    histogram = QuadratureHistogram(angles, W.grid.q, np.array(rows))
    logger.debug(f"🔍 Projected W onto {angles.size} quadrature angles")
    return histogram


def _ram_lak_response(size: int) -> np.ndarray:
    """Frequency response of the band-limited ramp kernel, 2|ν| in cycles per sample"""
    n = np.concatenate((np.arange(1, size // 2 + 1, 2), np.arange(size // 2 - 1, 0, -2)))
    kernel = np.zeros(size)
    kernel[0] = 0.25
    kernel[1::2] = -1.0 / (np.pi * n) ** 2
    return 2.0 * np.real(np.fft.fft(kernel))


def inverse_radon(hist: QuadratureHistogram, grid: QuadratureGrid,
                  cutoff: Optional[float] = None) -> PhaseSpaceFunction:
    """
    Filtered back-projection of a quadrature histogram onto a phase-space grid

    Args:
        hist: Slices over θ in [0, π), uniformly spaced
        grid: Target grid
        cutoff: Hann window cutoff as a fraction of the Nyquist wavenumber

    Returns:
        Reconstructed Wigner function, zero outside the disc the slices cover
    """
    angles = hist.angles
    if np.any(angles < 0) or np.any(angles >= np.pi + 1e-12):
        raise ValidationError("tomography angles must lie in [0, π)")
    cutoff = Config.HANN_CUTOFF if cutoff is None else float(cutoff)
    if not 0 < cutoff <= 1:
        raise ValidationError(f"Hann cutoff must lie in (0, 1], got {cutoff}")
    if angles.size < Config.MIN_TOMOGRAPHY_ANGLES:
        logger.warning(f"⚠️ Back-projection from {angles.size} angles (fewer than "
                       f"{Config.MIN_TOMOGRAPHY_ANGLES}); expect streak artifacts near "
                       f"{angular_artifact_level(hist):.1e} of the peak value")

    n_x = hist.x.size
    size = 2 ** int(math.ceil(math.log2(2 * n_x)))
    dx = hist.dx
    ramp = np.pi * _ram_lak_response(size) / dx
    k = np.abs(2.0 * np.pi * np.fft.fftfreq(size, d=dx))
    k_cut = cutoff * np.pi / dx
    window = np.where(k <= k_cut, 0.5 * (1.0 + np.cos(np.pi * k / k_cut)), 0.0)
    response = ramp * window

    padded = np.zeros((angles.size, size))
    padded[:, :n_x] = hist.values
    filtered = np.real(np.fft.ifft(np.fft.fft(padded, axis=1) * response[None, :], axis=1))[:, :n_x]

    q, p = grid.mesh()
    values = np.zeros(q.shape)
    for angle, row in zip(angles, filtered):
        t = q * math.cos(angle) + p * math.sin(angle)
        values += np.interp(t, hist.x, row, left=0.0, right=0.0)
    values /= 2.0 * angles.size
    values[np.hypot(q, p) > np.max(np.abs(hist.x))] = 0.0
    return PhaseSpaceFunction(grid, values, Kind.WIGNER)


def angular_artifact_level(hist: QuadratureHistogram) -> float:
    """Half the largest change between neighbouring slices, relative to the peak of pr"""
    if hist.angles.size < 2:
        return 1.0
    peak = float(np.max(np.abs(hist.values)))
    if peak == 0.0:
        return 0.0
    steps = np.abs(np.diff(hist.values, axis=0))
    return 0.5 * float(np.max(steps)) / peak


def lossy_detection(W: PhaseSpaceFunction, det: DetectorModel, rescale: bool = True,
                    frame: Optional[OscillatorFrame] = None) -> PhaseSpaceFunction:
    """
    Phase-space density sampled by a homodyne detector of efficiency η

    W is smoothed to s = −(1 − η)/η; with rescale the result is read on the
    detector's scale, η⁻¹F(x/√η, p/√η), which maps the vacuum onto itself.
    """
    if det.efficiency == 1.0:
        return W
    smoothed = s_parameterized(W, det.s, frame)
    if not rescale:
        return smoothed
    q, p = W.grid.mesh()
    root = math.sqrt(det.efficiency)
    values = sample_at(smoothed, q / root, p / root, order=3) / det.efficiency
    return smoothed.with_values(values)


def eight_port_measure(W: PhaseSpaceFunction, bs: BeamSplitter, efficiency: float = 1.0,
                       frame: Optional[OscillatorFrame] = None) -> PhaseSpaceFunction:
    """
    Joint (q, p) distribution of an eight-port homodyne detector

    pr(q, p) = π⁻¹ ∫∫ W(q′, p′) exp[−T(q′ − q)²/R − R(p′ − p)²/T] in oscillator
    units; efficiency adds (1 − η)/η to both dimensionless variances.
    """
    if not 0 < efficiency <= 1:
        raise ValidationError(f"detector efficiency must lie in (0, 1], got {efficiency}")
    if efficiency < 1 and not bs.balanced:
        raise ValidationError("efficiency correction is defined for the balanced eight-port detector only")
    if W.kind != Kind.WIGNER:
        raise ValidationError(f"eight-port detection needs a Wigner function, got {W.kind.name}")
    frame = frame_for(W.grid, frame)
    extra = (1.0 - efficiency) / efficiency
    var_q = bs.R / (2.0 * bs.T) + extra
    var_p = bs.T / (2.0 * bs.R) + extra
    sigma_q = math.sqrt(var_q) / frame.kappa
    sigma_p = math.sqrt(var_p) * frame.hbar * frame.kappa
    measured = gaussian_convolve_2d(W, sigma_q, sigma_p)
    drift = abs(float(integrate_2d(measured)) - float(integrate_2d(W)))
    if drift > 1e-6:
        logger.warning(f"⚠️ Eight-port output normalization drifted by {drift:.2e}")
    if efficiency < 1:
        return measured.with_values(measured.values, Kind.S_PARAM, -(2.0 - efficiency) / efficiency)
    return measured.with_values(measured.values, Kind.HUSIMI, frame.omega * bs.T / bs.R)


def _displaced_populations(state: Union[WaveFunction, DensityMatrix], basis: np.ndarray,
                           q0: float, p0: float) -> np.ndarray:
    """Photon-number distribution of D†(q₀, p₀) applied to the state"""
    grid = state.grid
    phase = np.exp(-1j * p0 * grid.q / grid.hbar)
    if isinstance(state, WaveFunction):
        shifted = phase * fourier_shift(state.values.astype(complex), -q0, grid.dq)
        return np.abs(basis @ shifted * grid.dq) ** 2
    shifted = fourier_shift(fourier_shift(state.values, -q0, grid.dq, axis=0), -q0, grid.dq, axis=1)
    shifted = phase[:, None] * shifted * np.conj(phase)[None, :]
    return np.real(np.einsum('ni,ij,nj->n', basis, shifted, basis)) * grid.dq ** 2


def loss_matrix(efficiency: float, cutoff: int) -> np.ndarray:
    """L[n, m] = C(m, n) ηⁿ (1 − η)^{m−n}, the binomial photon-loss channel"""
    m = np.arange(cutoff)[None, :]
    n = np.arange(cutoff)[:, None]
    return stats.binom.pmf(n, m, efficiency)


def ring_method(state: Union[WaveFunction, DensityMatrix], q_points: Sequence[float],
                p_points: Sequence[float], cutoff: Optional[int] = None, efficiency: float = 1.0,
                transmission: float = 1.0, frame: Optional[OscillatorFrame] = None) -> Dict:
    """
    Photon-counting reconstruction W(q, p) = (πħ)⁻¹ Σ (−1)ⁿ Pₙ(q, p)

    Args:
        state: Wavefunction or density matrix
        q_points, p_points: Sample axes; the result is evaluated on their product
        cutoff: Photon-number truncation
        efficiency, transmission: Detector efficiency and beam-splitter
            transmission; together they set the binomial loss η' = ηT
        frame: Oscillator frame of the Fock basis

    Returns:
        Dict with 'values' (len(q) x len(p)), the truncated 'tail', the
        'insufficient' mask where the tail exceeds the statistics tolerance,
        and the ordering 's' the lossy sum samples
    """
    cutoff = Config.RING_CUTOFF if cutoff is None else int(cutoff)
    if cutoff < 1:
        raise ValidationError(f"photon-number cutoff must be positive, got {cutoff}")
    for name, value in (('efficiency', efficiency), ('transmission', transmission)):
        if not 0 < value <= 1:
            raise ValidationError(f"{name} must lie in (0, 1], got {value}")
    frame = frame_for(state.grid, frame)
    eta = efficiency * transmission
    q_points = np.atleast_1d(np.asarray(q_points, dtype=float))
    p_points = np.atleast_1d(np.asarray(p_points, dtype=float))
    Q, _ = frame.to_dimensionless(state.grid.q, 0.0)
    basis = hermite_functions(Q, cutoff, frame.kappa)
    losses = loss_matrix(eta, cutoff) if eta < 1 else None
    signs = (-1.0) ** np.arange(cutoff)
    prefactor = eta / (np.pi * frame.hbar)

    values = np.zeros((q_points.size, p_points.size))
    tail = np.zeros_like(values)
    for i, q0 in enumerate(q_points):
        for j, p0 in enumerate(p_points):
            populations = _displaced_populations(state, basis, q0, p0)
            tail[i, j] = max(1.0 - populations.sum(), 0.0)
            if losses is not None:
                populations = losses @ populations
            values[i, j] = prefactor * float(signs @ populations)

    insufficient = tail > Config.STATS_TAIL_TOLERANCE
    if insufficient.any():
        logger.warning(f"⚠️ Ring method: {int(insufficient.sum())} sample points lose more than "
                       f"{Config.STATS_TAIL_TOLERANCE:g} of the photon statistics beyond n = {cutoff}")
    return {'values': values, 'tail': tail, 'insufficient': insufficient, 's': -(1.0 - eta) / eta}


def ring_grid(n_points: int, hbar: float = 1.0) -> QuadratureGrid:
    """Square sample grid with Δq = Δp = √(2πħ/n)"""
    half = 0.5 * math.sqrt(2.0 * np.pi * hbar * n_points)
    return make_grid(-half, half, n_points, hbar)


def ring_method_on_grid(state: Union[WaveFunction, DensityMatrix], n_points: int = 64,
                        cutoff: Optional[int] = None, efficiency: float = 1.0, transmission: float = 1.0,
                        frame: Optional[OscillatorFrame] = None) -> PhaseSpaceFunction:
    """Ring-method reconstruction laid out on a square phase-space grid"""
    grid = ring_grid(n_points, state.grid.hbar)
    result = ring_method(state, grid.q, grid.p, cutoff, efficiency, transmission, frame)
    eta = efficiency * transmission
    kind = Kind.WIGNER if eta == 1.0 else Kind.S_PARAM
    return PhaseSpaceFunction(grid, result['values'], kind, result['s'])


def free_evolution_angle(t_d: float, m: float, x0: float, hbar: float = 1.0) -> float:
    """θ = arctan(t_d ħ / (m x₀²)), the quadrature angle reached by free flight"""
    if t_d < 0:
        raise ValidationError(f"flight time must be nonnegative, got {t_d}")
    if not (m > 0 and x0 > 0):
        raise ValidationError("mass and length scale must be positive")
    return math.atan2(t_d * hbar, m * x0 ** 2)


def free_evolution_quadrature(W: PhaseSpaceFunction, t_d: float, m: float = 1.0,
                              x0: float = 1.0) -> QuadratureHistogram:
    """
    Quadrature slice obtained from a position measurement after free flight

    The flight shears W by t_d/m; the position distribution rescaled by
    x₀/cosθ is pr(X, θ) on the grid's q axis in units of x₀.
    """
    grid = W.grid
    theta = free_evolution_angle(t_d, m, x0, grid.hbar)
    flown = apply_symplectic(W, SymplecticMap2D.free_flight(t_d, m))
    position = marginals(flown)[0]
    scale = x0 / math.cos(theta)
    values = scale * np.interp(scale * grid.q, grid.q, position, left=0.0, right=0.0)
    return QuadratureHistogram(np.array([theta]), grid.q, values[None, :])


def resample_histogram(hist: QuadratureHistogram, counts: int, seed: Optional[int] = None) -> QuadratureHistogram:
    """Replace each slice by the empirical density of `counts` multinomial draws"""
    if counts < 1:
        raise ValidationError(f"sample count must be positive, got {counts}")
    rng = np.random.default_rng(Config.SEED if seed is None else seed)
    dx = hist.dx
    rows = []
    for row in hist.values:
        probabilities = np.clip(row, 0.0, None) * dx
        total = probabilities.sum()
        if total <= 0:
            rows.append(np.zeros_like(row))
            continue
        draws = rng.multinomial(counts, probabilities / total)
        rows.append(draws / (counts * dx))
    return QuadratureHistogram(hist.angles, hist.x, np.array(rows))
