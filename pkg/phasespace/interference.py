#!/usr/bin/env python3
"""
Interference and nonclassicality
Two-beam Wigner functions, which-path filtering, the Aharonov-Bohm fringe
shift, photon statistics and the semiclassical area-of-overlap estimate
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple, Union

import numpy as np
from scipy import ndimage

from config import Config
from phasespace.errors import NumericalToleranceError, ValidationError
from phasespace.numerics import Kind, PhaseSpaceFunction, QuadratureGrid, integrate_1d, integrate_2d, sample_at
from phasespace.states import (Coherent, DensityMatrix, Mixture, OscillatorFrame, Squeezed, StateSpec,
                               TwoGaussian, WaveFunction, build_density, build_wavefunction, frame_for,
                               state_builder)
from phasespace.wigner import density_from_wigner, expectation, wigner_from_density, wigner_from_wavefunction

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TwoBeamSpec:
    """Two Gaussian beams at Q = ±d, the one at −d carrying the relative phase"""

    d: float
    relative_phase: float = 0.0
    coherent: bool = True

    def __post_init__(self):
        if not self.d >= 0:
            raise ValidationError(f"beam half-separation must be nonnegative, got {self.d}")


@dataclass(frozen=True, eq=False)
class MomentumTransferModel:
    """Momentum-kick distribution W_t(q, p) of a which-path device"""

    W_t: PhaseSpaceFunction

    def __post_init__(self):
        if self.W_t.is_complex:
            raise ValidationError("momentum-transfer distribution must be real")

    @classmethod
    def no_kick(cls, grid: QuadratureGrid) -> 'MomentumTransferModel':
        values = np.zeros((grid.n_q, grid.n_p))
        values[:, grid.n_p // 2] = 1.0 / grid.dp
        return cls(PhaseSpaceFunction(grid, values, Kind.CLASSICAL))

    @classmethod
    def gaussian(cls, grid: QuadratureGrid, sigma_p: float) -> 'MomentumTransferModel':
        """Position-independent Gaussian kick, normalized in p for every q"""
        if sigma_p < 0:
            raise ValidationError(f"kick width must be nonnegative, got {sigma_p}")
        if sigma_p == 0:
            return cls.no_kick(grid)
        profile = np.exp(-0.5 * (grid.p / sigma_p) ** 2)
        profile /= profile.sum() * grid.dp
        return cls(PhaseSpaceFunction(grid, np.tile(profile, (grid.n_q, 1)), Kind.CLASSICAL))


@dataclass(frozen=True, eq=False)
class PhotonStatistics:
    probabilities: np.ndarray
    cutoff: int
    tail: float = 0.0

    def __post_init__(self):
        probabilities = np.asarray(self.probabilities, dtype=float)
        if np.any(probabilities < -1e-12):
            raise ValidationError("photon-number probabilities must be nonnegative")
        if probabilities.sum() > 1.0 + 1e-6:
            raise ValidationError(f"photon-number probabilities sum to {probabilities.sum():.8f} > 1")
        object.__setattr__(self, 'probabilities', np.clip(probabilities, 0.0, None))

    @property
    def certified(self) -> bool:
        return self.tail <= Config.STATS_TAIL_TOLERANCE

    def mean(self) -> float:
        n = np.arange(self.probabilities.size)
        return float(n @ self.probabilities)

    def as_dict(self) -> Dict:
        return {
            'status': 'certified' if self.certified else 'uncertain_tail',
            'probabilities': self.probabilities.tolist(),
            'cutoff': self.cutoff,
            'tail': self.tail,
        }


def two_gaussian_wdf(spec: TwoBeamSpec, grid: QuadratureGrid,
                     frame: Optional[OscillatorFrame] = None) -> PhaseSpaceFunction:
    """
    Closed form W = W₀e^{−P²}{e^{−(Q−d)²} + e^{−(Q+d)²} + 2e^{−Q²}cos(2Pd + φ)}

    The incoherent variant keeps the two outer terms only.
    """
    frame = frame_for(grid, frame)
    q, p = grid.mesh()
    Q, P = frame.to_dimensionless(q, p)
    d, phi = spec.d, spec.relative_phase
    outer = np.exp(-(Q - d) ** 2) + np.exp(-(Q + d) ** 2)
    if spec.coherent:
        w0 = 1.0 / (2.0 * np.pi * (1.0 + math.exp(-d ** 2) * math.cos(phi)))
        bracket = outer + 2.0 * np.exp(-Q ** 2) * np.cos(2.0 * P * d + phi)
    else:
        w0 = 1.0 / (2.0 * np.pi)
        bracket = outer
    return PhaseSpaceFunction(grid, w0 * np.exp(-P ** 2) * bracket / frame.hbar, Kind.WIGNER)


def two_beam_state(spec: TwoBeamSpec) -> StateSpec:
    if spec.coherent:
        return TwoGaussian(spec.d, spec.relative_phase)
    alpha = spec.d / math.sqrt(2.0)
    return Mixture(((0.5, Coherent(complex(alpha))), (0.5, Coherent(complex(-alpha)))))


def two_gaussian_numeric(spec: TwoBeamSpec, grid: QuadratureGrid,
                         frame: Optional[OscillatorFrame] = None) -> PhaseSpaceFunction:
    """Wigner transform of the sampled two-beam field"""
    frame = frame_for(grid, frame)
    state = two_beam_state(spec)
    if spec.coherent:
        return wigner_from_wavefunction(build_wavefunction(state, frame, grid))
    return wigner_from_density(build_density(state, frame, grid))


def superposition_squeezing(d: float) -> Tuple[float, float]:
    """
    ((Δq)², (Δk)²) of two unit-width Gaussians separated by d

    The components sit at ±d/2; (Δk)² dips below ½ for every d > 0.
    """
    if d < 0:
        raise ValidationError(f"separation must be nonnegative, got {d}")
    a2 = (0.5 * d) ** 2
    overlap = math.exp(-a2)
    return 0.5 + a2 / (1.0 + overlap), 0.5 - a2 * overlap / (1.0 + overlap)


def photon_statistics_exact(state: Union[WaveFunction, DensityMatrix], frame: Optional[OscillatorFrame] = None,
                            cutoff: int = 64) -> PhotonStatistics:
    """Pₙ = |⟨n|ψ⟩|² or ⟨n|ρ|n⟩ for n < cutoff, with the unresolved tail"""
    frame = frame_for(state.grid, frame)
    if isinstance(state, WaveFunction):
        coefficients = state_builder.fock_coefficients(state, frame, cutoff, strict=False)
        probabilities = np.abs(coefficients) ** 2
        norm = state.norm()
    else:
        probabilities = state_builder.fock_populations(state, frame, cutoff)
        norm = state.trace()
    tail = float(max(norm - probabilities.sum(), 0.0))
    return PhotonStatistics(probabilities, cutoff, tail)


def mandel_q(stats: PhotonStatistics) -> float:
    """Q = (⟨n(n−1)⟩ − ⟨n⟩²)/⟨n⟩"""
    if not stats.certified:
        raise NumericalToleranceError(
            f"photon statistics tail {stats.tail:.2e} exceeds {Config.STATS_TAIL_TOLERANCE:g}; raise the cutoff")
    n = np.arange(stats.probabilities.size)
    mean = float(n @ stats.probabilities)
    if mean <= 0:
        raise ValidationError("Mandel Q is undefined for a state with no photons")
    factorial_moment = float((n * (n - 1)) @ stats.probabilities)
    return (factorial_moment - mean ** 2) / mean


def quadrature_s(state: Union[WaveFunction, DensityMatrix], theta: float,
                 frame: Optional[OscillatorFrame] = None) -> float:
    """Normally ordered quadrature variance S = Var(X_θ) − 1 with X_θ = √2(Q cosθ − P sinθ)"""
    frame = frame_for(state.grid, frame)
    if isinstance(state, WaveFunction):
        W = wigner_from_wavefunction(state)
    else:
        W = wigner_from_density(state)
    norm = expectation(W, 0, 0)
    moments = {key: expectation(W, *key) / norm for key in ((1, 0), (0, 1), (2, 0), (0, 2), (1, 1))}
    kappa, hbar = frame.kappa, frame.hbar
    var_q = (moments[2, 0] - moments[1, 0] ** 2) * kappa ** 2
    var_p = (moments[0, 2] - moments[0, 1] ** 2) / (hbar * kappa) ** 2
    cov = (moments[1, 1] - moments[1, 0] * moments[0, 1]) / hbar
    c, s = math.cos(theta), math.sin(theta)
    return 2.0 * (c * c * var_q + s * s * var_p - 2.0 * c * s * cov) - 1.0


def _node_index(grid: QuadratureGrid, q: float) -> int:
    position = (q - grid.q_min) / grid.dq
    index = int(round(position))
    if abs(position - index) > 1e-6 or not 0 <= index < grid.n_q:
        raise ValidationError(f"q = {q} is not a grid node")
    return index


def g1(source: Union[PhaseSpaceFunction, DensityMatrix, WaveFunction], q1: float, q2: float) -> complex:
    """
    Normalized first-order coherence between two grid positions

    G(q₁, q₂) = ∫dp e^{ip(q₁−q₂)/ħ} W((q₁+q₂)/2, p) = ρ(q₁, q₂).
    """
    if isinstance(source, PhaseSpaceFunction):
        rho = density_from_wigner(source)
    elif isinstance(source, WaveFunction):
        rho = DensityMatrix.from_wavefunction(source)
    else:
        rho = source
    i, j = _node_index(rho.grid, q1), _node_index(rho.grid, q2)
    intensity_1 = float(np.real(rho.values[i, i]))
    intensity_2 = float(np.real(rho.values[j, j]))
    if intensity_1 <= 0 or intensity_2 <= 0:
        raise ValidationError(f"zero intensity at q = {q1 if intensity_1 <= 0 else q2}")
    return complex(rho.values[i, j] / math.sqrt(intensity_1 * intensity_2))


def visibility(g1_value: complex, I1: float, I2: float) -> float:
    """V = 2√(I₁I₂)/(I₁ + I₂)·|g⁽¹⁾|"""
    if I1 <= 0 or I2 <= 0:
        raise ValidationError(f"intensities must be positive, got ({I1}, {I2})")
    return 2.0 * math.sqrt(I1 * I2) / (I1 + I2) * abs(g1_value)


def which_path_filter(W_i: PhaseSpaceFunction, model: MomentumTransferModel) -> PhaseSpaceFunction:
    """W_f(q, p) = ∫dp′ W_i(q, p − p′) W_t(q, p′), a circular convolution along p"""
    grid = W_i.grid
    if not grid.matches(model.W_t.grid):
        raise ValidationError("which-path model lives on a different grid")
    kernel = np.fft.ifftshift(model.W_t.values, axes=1)
    spectrum = np.fft.fft(W_i.values, axis=1) * np.fft.fft(kernel, axis=1)
    filtered = np.fft.ifft(spectrum, axis=1) * grid.dp
    return W_i.with_values(filtered if W_i.is_complex else filtered.real)


def visibility_after_transfer(model: MomentumTransferModel, d: float) -> complex:
    """V = ∫dp P_nonloc(p) e^{ipd/ħ} with P_nonloc(p) = W_t(0, p)"""
    grid = model.W_t.grid
    p = grid.p
    nonlocal_kick = sample_at(model.W_t, np.zeros_like(p), p, order=1)
    return complex(integrate_1d(nonlocal_kick * np.exp(1j * p * d / grid.hbar), grid.dp))


def which_way_knowledge(V: complex) -> float:
    """K = √(1 − |V|²), the path knowledge complementary to a pure-state visibility"""
    return math.sqrt(max(1.0 - abs(V) ** 2, 0.0))


def aharonov_bohm_shift(spec: TwoBeamSpec, delta_phi: float, grid: QuadratureGrid,
                        frame: Optional[OscillatorFrame] = None) -> PhaseSpaceFunction:
    """
    Two-beam Wigner function after an extra phase Δφ on the beam at −d

    Each beam keeps its own normalization, so the outer terms do not depend on
    Δφ; only the interference term moves.
    """
    if not spec.coherent:
        raise ValidationError("the Aharonov-Bohm shift acts on a coherent two-beam field")
    frame = frame_for(grid, frame)
    alpha = spec.d / math.sqrt(2.0)
    upper = build_wavefunction(Coherent(complex(alpha)), frame, grid)
    lower = build_wavefunction(Coherent(complex(-alpha)), frame, grid)
    phase = np.exp(1j * (spec.relative_phase + delta_phi))
    values = (upper.values + phase * lower.values) / math.sqrt(2.0)
    W = wigner_from_wavefunction(WaveFunction(grid, values))
    drift = abs(float(integrate_2d(W)) - 1.0)
    if drift > 1e-6:
        logger.warning(f"⚠️ Aharonov-Bohm field normalization is {1.0 + drift:.6f}: beam overlap not negligible")
    return W


def _counting_grid(lower: float, upper: float, resolution: int) -> Tuple[np.ndarray, float]:
    step = (upper - lower) / resolution
    return lower + step * (np.arange(resolution) + 0.5), step


def _segment_area(Q0: float, radius: float, resolution: int) -> float:
    """Area bounded by the line Q = Q0, the circle of the given radius and the Q axis (P ≥ 0)"""
    Q0 = abs(Q0)
    if radius <= Q0:
        return 0.0
    Qs, dQ = _counting_grid(Q0, radius, resolution)
    Ps, dP = _counting_grid(0.0, radius, resolution)
    inside = Qs[:, None] ** 2 + Ps[None, :] ** 2 <= radius ** 2
    return float(inside.sum()) * dQ * dP


def area_overlap_estimate(n: int, target: StateSpec, resolution: Optional[int] = None) -> Tuple[float, Optional[float]]:
    """
    Semiclassical Pₙ from the overlap of the Fock band with the target's error region

    Args:
        n: Photon number
        target: Coherent (error disc) or Squeezed with real displacement (error ellipse)
        resolution: Counting cells per axis

    Returns:
        (Pₙ estimate, phase φₙ); the phase is None for a single overlap region
    """
    if n < 0 or int(n) != n:
        raise ValidationError(f"photon number must be a nonnegative integer, got {n}")
    resolution = Config.OVERLAP_RESOLUTION if resolution is None else int(resolution)
    if isinstance(target, Coherent):
        alpha = complex(target.alpha)
        semi_q = semi_p = math.sqrt(2.0)
    elif isinstance(target, Squeezed):
        alpha = complex(target.alpha)
        if abs(alpha.imag) > 1e-12:
            raise ValidationError("area of overlap for squeezed states needs a real displacement")
        semi_q, semi_p = math.sqrt(2.0 / target.s), math.sqrt(2.0 * target.s)
    else:
        raise ValidationError(f"area of overlap is defined for coherent and squeezed targets, got {target!r}")

    Q0, P0 = math.sqrt(2.0) * alpha.real, math.sqrt(2.0) * alpha.imag
    Qs, dQ = _counting_grid(Q0 - semi_q, Q0 + semi_q, resolution)
    Ps, dP = _counting_grid(P0 - semi_p, P0 + semi_p, resolution)
    Q, P = np.meshgrid(Qs, Ps, indexing='ij')
    ellipse = ((Q - Q0) / semi_q) ** 2 + ((P - P0) / semi_p) ** 2 <= 1.0
    radius2 = Q ** 2 + P ** 2
    band = (radius2 >= 2.0 * n) & (radius2 < 2.0 * (n + 1))
    overlap = ellipse & band
    _, regions = ndimage.label(overlap)
    area = float(overlap.sum()) * dQ * dP
    logger.debug(f"🔍 Overlap n={n}: {regions} region(s), area {area:.5f} (cell {dQ * dP:.2e})")

    if regions == 0:
        return 0.0, None
    if regions == 1 or isinstance(target, Coherent):
        return area / (2.0 * np.pi), None
    phase = _segment_area(Q0, math.sqrt(2.0 * (n + 0.5)), resolution) - np.pi / 4.0
    single = 0.5 * area
    return 4.0 * single / (2.0 * np.pi) * math.cos(phase) ** 2, phase
