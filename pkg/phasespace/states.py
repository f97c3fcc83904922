#!/usr/bin/env python3
"""
Reference states on a quadrature grid
Fock, coherent, squeezed, cat and two-Gaussian wavefunctions, plus thermal and
incoherent mixtures as density matrices
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple, Union

import numpy as np
from scipy import integrate
from scipy.linalg import eigvalsh

from config import Config
from phasespace.errors import GridMismatchError, TruncationError, ValidationError
from phasespace.numerics import QuadratureGrid, integrate_1d

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OscillatorFrame:
    """Mass, frequency and ħ of the oscillator; κ = √(mω/ħ) sets the dimensionless scale"""

    mass: float = 1.0
    omega: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ('mass', 'omega', 'hbar'):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValidationError(f"frame {name} must be positive, got {value}")

    @property
    def kappa(self) -> float:
        return float(np.sqrt(self.mass * self.omega / self.hbar))

    def to_dimensionless(self, q, p):
        """(q, p) -> (Q, P) = (κq, p/ħκ)"""
        return self.kappa * np.asarray(q), np.asarray(p) / (self.hbar * self.kappa)

    def from_dimensionless(self, Q, P):
        return np.asarray(Q) / self.kappa, np.asarray(P) * self.hbar * self.kappa


def frame_for(grid: QuadratureGrid, frame: Optional[OscillatorFrame] = None) -> OscillatorFrame:
    """Default frame (m = ω = 1) matching the grid's ħ, or the given frame after a consistency check"""
    if frame is None:
        return OscillatorFrame(hbar=grid.hbar)
    if not np.isclose(frame.hbar, grid.hbar, rtol=1e-12, atol=0.0):
        raise GridMismatchError(f"frame hbar={frame.hbar} differs from grid hbar={grid.hbar}")
    return frame


# --- state specifications -------------------------------------------------

@dataclass(frozen=True)
class Fock:
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise ValidationError(f"Fock index must be a nonnegative integer, got {self.n}")
        object.__setattr__(self, 'n', int(self.n))


@dataclass(frozen=True)
class Coherent:
    alpha: complex


@dataclass(frozen=True)
class Squeezed:
    alpha: complex = 0j
    s: float = 1.0

    def __post_init__(self):
        if not self.s > 0:
            raise ValidationError(f"squeeze parameter must be positive, got {self.s}")


@dataclass(frozen=True)
class Cat:
    alpha: complex
    theta: float


@dataclass(frozen=True)
class TwoGaussian:
    """Vacuum-width Gaussians at Q = ±d, the one at -d carrying phase e^{i·phi}"""
    d: float
    phi: float = 0.0

    def __post_init__(self):
        if self.d < 0:
            raise ValidationError(f"half-separation must be nonnegative, got {self.d}")


@dataclass(frozen=True)
class Superposition:
    terms: Tuple[Tuple[complex, 'StateSpec'], ...]

    def __post_init__(self):
        if not self.terms:
            raise ValidationError("superposition needs at least one term")
        if all(abs(coefficient) == 0 for coefficient, _ in self.terms):
            raise ValidationError("superposition coefficients are all zero")
        for _, spec in self.terms:
            if not is_pure(spec):
                raise ValidationError("superposition terms must be pure states")


@dataclass(frozen=True)
class ThermalMixture:
    nbar: float
    cutoff: Optional[int] = None

    def __post_init__(self):
        if not self.nbar >= 0:
            raise ValidationError(f"mean occupation must be nonnegative, got {self.nbar}")
        if self.cutoff is not None and (int(self.cutoff) != self.cutoff or self.cutoff < 1):
            raise ValidationError(f"thermal cutoff must be a positive integer, got {self.cutoff}")


@dataclass(frozen=True)
class Mixture:
    """Incoherent mixture; weights are normalized to unit sum"""
    terms: Tuple[Tuple[float, 'StateSpec'], ...]

    def __post_init__(self):
        if not self.terms:
            raise ValidationError("mixture needs at least one term")
        weights = [weight for weight, _ in self.terms]
        if any(weight < 0 for weight in weights) or sum(weights) <= 0:
            raise ValidationError(f"mixture weights must be nonnegative with positive sum, got {weights}")


StateSpec = Union[Fock, Coherent, Squeezed, Cat, TwoGaussian, Superposition, ThermalMixture, Mixture]


def is_pure(spec: StateSpec) -> bool:
    return not isinstance(spec, (ThermalMixture, Mixture))


# --- sampled states -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class WaveFunction:
    """Complex samples ψ(q_i)"""

    grid: QuadratureGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.n_q,):
            raise ValidationError(f"wavefunction has {values.shape} samples, grid has {self.grid.n_q}")
        object.__setattr__(self, 'values', values)

    def norm(self) -> float:
        return float(integrate_1d(np.abs(self.values) ** 2, self.grid.dq))

    def normalized(self) -> 'WaveFunction':
        norm = self.norm()
        if not norm > 0:
            raise ValidationError("cannot normalize a vanishing wavefunction")
        return WaveFunction(self.grid, self.values / np.sqrt(norm))

    def momentum_amplitude(self) -> np.ndarray:
        """φ(p_j) = (2πħ)^{-1/2} ∫ e^{-ip q/ħ} ψ(q) dq on the grid's p axis"""
        grid = self.grid
        phase = np.exp(-1j * grid.p * grid.q_min / grid.hbar)
        spectrum = np.fft.fftshift(np.fft.fft(self.values))
        return grid.dq * phase * spectrum / np.sqrt(2.0 * np.pi * grid.hbar)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Complex samples ρ(q_i, q_j)"""

    grid: QuadratureGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        n = self.grid.n_q
        if values.shape != (n, n):
            raise ValidationError(f"density matrix has shape {values.shape}, grid needs ({n}, {n})")
        object.__setattr__(self, 'values', values)

    def trace(self) -> float:
        return float(integrate_1d(np.real(np.diag(self.values)), self.grid.dq))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.values - self.values.conj().T)))

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues of the integral operator (kernel times Δq)"""
        hermitian = 0.5 * (self.values + self.values.conj().T)
        return eigvalsh(hermitian * self.grid.dq)

    @classmethod
    def from_wavefunction(cls, psi: WaveFunction) -> 'DensityMatrix':
        return cls(psi.grid, np.outer(psi.values, psi.values.conj()))


def hermite_functions(Q: np.ndarray, count: int, kappa: float = 1.0) -> np.ndarray:
    """
    Oscillator eigenfunctions ψ_0..ψ_{count-1} at dimensionless positions Q

    Two-term recurrence ψ_{n+1} = √(2/(n+1))·Q·ψ_n − √(n/(n+1))·ψ_{n−1}; rows
    are normalized in q (amplitude carries κ^{1/2}).
    """
    Q = np.asarray(Q, dtype=float)
    table = np.zeros((count,) + Q.shape)
    if count == 0:
        return table
    table[0] = (kappa ** 2 / np.pi) ** 0.25 * np.exp(-0.5 * Q ** 2)
    if count > 1:
        table[1] = np.sqrt(2.0) * Q * table[0]
    for n in range(1, count - 1):
        table[n + 1] = np.sqrt(2.0 / (n + 1)) * Q * table[n] - np.sqrt(n / (n + 1)) * table[n - 1]
    return table


def cat_normalization_formula(alpha: float, theta: float, squared_exponent: bool = True) -> float:
    """
    Closed-form normalization N of (N/√2)(|αe^{iθ}⟩ + |αe^{−iθ}⟩) for real α

    squared_exponent=False evaluates the variant with exp(−2α sin²θ).
    """
    weight = alpha ** 2 if squared_exponent else alpha
    overlap = np.cos(alpha ** 2 * np.sin(2 * theta)) * np.exp(-2.0 * weight * np.sin(theta) ** 2)
    return float((1.0 + overlap) ** -0.5)


class StateBuilder:
    """Builds sampled wavefunctions and density matrices from state specifications"""

    def __init__(self):
        """Initialize the builder with tolerances from Config"""
        self.edge_tolerance = Config.EDGE_TOLERANCE
        self.thermal_tail = 1e-10
        self.tail_tolerance = Config.TAIL_TOLERANCE

    # -- wavefunctions --

    def build_wavefunction(self, spec: StateSpec, frame: OscillatorFrame, grid: QuadratureGrid) -> WaveFunction:
        """
        Sample a pure state on the grid and normalize it

        Args:
            spec: Pure-state specification
            frame: Oscillator frame (its ħ must equal the grid's)
            grid: Quadrature grid; |ψ| must fall below the edge tolerance at both ends

        Returns:
            Normalized WaveFunction
        """
        frame = frame_for(grid, frame)
        if not is_pure(spec):
            raise ValidationError(f"{type(spec).__name__} is a mixed state; use build_density")
        if isinstance(spec, Fock):
            self._check_fock_extent(spec.n, frame, grid)
        psi = WaveFunction(grid, self._sample(spec, frame, grid)).normalized()
        self._check_edges(np.abs(psi.values), spec)
        return psi

    def _sample(self, spec: StateSpec, frame: OscillatorFrame, grid: QuadratureGrid) -> np.ndarray:
        """Unnormalized samples of a pure state"""
        Q = frame.kappa * grid.q
        amplitude = (frame.kappa ** 2 / np.pi) ** 0.25
        if isinstance(spec, Fock):
            return hermite_functions(Q, spec.n + 1, frame.kappa)[spec.n].astype(complex)
        if isinstance(spec, Coherent):
            return self._coherent(Q, complex(spec.alpha), amplitude)
        if isinstance(spec, Squeezed):
            alpha = complex(spec.alpha)
            shift = np.sqrt(2.0) * alpha.real
            return amplitude * np.exp(-0.5 * spec.s * (Q - shift) ** 2 + 1j * np.sqrt(2.0) * alpha.imag * Q)
        if isinstance(spec, Cat):
            alpha = complex(spec.alpha)
            return (self._coherent(Q, alpha * np.exp(1j * spec.theta), amplitude)
                    + self._coherent(Q, alpha * np.exp(-1j * spec.theta), amplitude))
        if isinstance(spec, TwoGaussian):
            return amplitude * (np.exp(-0.5 * (Q - spec.d) ** 2)
                                + np.exp(1j * spec.phi) * np.exp(-0.5 * (Q + spec.d) ** 2))
        if isinstance(spec, Superposition):
            total = np.zeros(grid.n_q, dtype=complex)
            for coefficient, term in spec.terms:
                if isinstance(term, Fock):
                    self._check_fock_extent(term.n, frame, grid)
                component = WaveFunction(grid, self._sample(term, frame, grid)).normalized()
                total += complex(coefficient) * component.values
            if integrate_1d(np.abs(total) ** 2, grid.dq) < 1e-24:
                raise ValidationError("superposition cancels to zero on this grid")
            return total
        raise ValidationError(f"unsupported state specification: {spec!r}")

    @staticmethod
    def _coherent(Q: np.ndarray, alpha: complex, amplitude: float) -> np.ndarray:
        # ψ_α(Q) ∝ exp[−(Q − √2α)²/2 + (α² − |α|²)/2]; ⟨P⟩ = √2 Im α
        exponent = -0.5 * (Q - np.sqrt(2.0) * alpha) ** 2 + 0.5 * (alpha ** 2 - abs(alpha) ** 2)
        return amplitude * np.exp(exponent)

    def _check_fock_extent(self, n: int, frame: OscillatorFrame, grid: QuadratureGrid) -> None:
        turning = np.sqrt(2 * n + 1) / frame.kappa
        if turning >= min(-grid.q_min, grid.q_max):
            raise TruncationError(
                f"Fock n={n} too large for grid [{grid.q_min}, {grid.q_max}): turning point at ±{turning:.3f}")

    def _check_edges(self, magnitude: np.ndarray, spec) -> None:
        edge = max(magnitude[0], magnitude[-1])
        if edge >= self.edge_tolerance:
            raise TruncationError(
                f"state {spec!r} leaks off the grid: edge amplitude {edge:.3e} >= {self.edge_tolerance:.1e}")

    def cat_normalization(self, spec: Cat, frame: OscillatorFrame, grid: QuadratureGrid) -> Dict:
        """Compare the numerically determined cat normalization with the closed forms"""
        frame = frame_for(grid, frame)
        raw = WaveFunction(grid, self._sample(spec, frame, grid) / np.sqrt(2.0))
        numeric = float(1.0 / np.sqrt(raw.norm()))
        alpha = float(np.real(spec.alpha))
        squared = cat_normalization_formula(alpha, spec.theta, squared_exponent=True)
        linear = cat_normalization_formula(alpha, spec.theta, squared_exponent=False)
        report = {
            'numeric': numeric,
            'squared_exponent': squared,
            'linear_exponent': linear,
            'squared_discrepancy': abs(numeric - squared),
            'linear_discrepancy': abs(numeric - linear),
        }
        if report['linear_discrepancy'] > 1e-6:
            logger.info(f"🔍 Cat normalization: numeric {numeric:.9f}, exp(-2a sin²θ) form {linear:.9f} "
                        f"(discrepancy {report['linear_discrepancy']:.2e})")
        return report

    # -- density matrices --

    def build_density(self, spec: StateSpec, frame: OscillatorFrame, grid: QuadratureGrid) -> DensityMatrix:
        """Density matrix of any state specification, pure or mixed, with unit trace"""
        frame = frame_for(grid, frame)
        if is_pure(spec):
            return DensityMatrix.from_wavefunction(self.build_wavefunction(spec, frame, grid))
        if isinstance(spec, ThermalMixture):
            rho = self._thermal(spec, frame, grid)
        else:
            weights = np.array([weight for weight, _ in spec.terms], dtype=float)
            weights /= weights.sum()
            values = np.zeros((grid.n_q, grid.n_q), dtype=complex)
            for weight, (_, term) in zip(weights, spec.terms):
                values += weight * self.build_density(term, frame, grid).values
            rho = DensityMatrix(grid, values)
        diagonal_edge = np.sqrt(max(abs(rho.values[0, 0]), abs(rho.values[-1, -1])))
        if diagonal_edge >= self.edge_tolerance:
            raise TruncationError(f"mixed state {spec!r} leaks off the grid: edge amplitude {diagonal_edge:.3e}")
        return DensityMatrix(grid, rho.values / rho.trace())

    def thermal_weights(self, spec: ThermalMixture) -> np.ndarray:
        """Bose–Einstein weights pₙ = n̄ⁿ/(1+n̄)^{n+1} up to the cutoff"""
        ratio = spec.nbar / (1.0 + spec.nbar)
        if spec.cutoff is None:
            cutoff = 1 if ratio == 0 else int(np.ceil(np.log(self.thermal_tail) / np.log(ratio)))
        else:
            cutoff = int(spec.cutoff)
        neglected = ratio ** cutoff
        if neglected >= self.thermal_tail:
            raise ValidationError(
                f"thermal cutoff N={cutoff} too small for nbar={spec.nbar}: neglected weight {neglected:.2e}")
        return (1.0 - ratio) * ratio ** np.arange(cutoff)

    def _thermal(self, spec: ThermalMixture, frame: OscillatorFrame, grid: QuadratureGrid) -> DensityMatrix:
        weights = self.thermal_weights(spec)
        basis = hermite_functions(frame.kappa * grid.q, len(weights), frame.kappa)
        values = np.einsum('n,ni,nj->ij', weights, basis, basis).astype(complex)
        logger.debug(f"Thermal state nbar={spec.nbar} with {len(weights)} Fock terms")
        return DensityMatrix(grid, values)

    # -- Fock-basis analysis --

    def fock_coefficients(self, psi: WaveFunction, frame: OscillatorFrame, cutoff: int,
                          tolerance: Optional[float] = None, strict: bool = True) -> np.ndarray:
        """
        Expansion coefficients c_n = ⟨n|ψ⟩ for n < cutoff

        Raises TruncationError when strict and the tail 1 − Σ|c_n|² exceeds the tolerance.
        """
        frame = frame_for(psi.grid, frame)
        if cutoff < 1:
            raise ValidationError(f"Fock cutoff must be positive, got {cutoff}")
        basis = hermite_functions(frame.kappa * psi.grid.q, cutoff, frame.kappa)
        coefficients = psi.grid.dq * (basis @ psi.values)
        tail = fock_tail(coefficients, psi.norm())
        tolerance = self.tail_tolerance if tolerance is None else tolerance
        if strict and tail > tolerance:
            raise TruncationError(f"Fock cutoff N={cutoff} insufficient: tail {tail:.2e} > {tolerance:.1e}")
        return coefficients

    def fock_populations(self, rho: DensityMatrix, frame: OscillatorFrame, cutoff: int) -> np.ndarray:
        """Diagonal ⟨n|ρ|n⟩ for n < cutoff"""
        frame = frame_for(rho.grid, frame)
        basis = hermite_functions(frame.kappa * rho.grid.q, cutoff, frame.kappa)
        dq = rho.grid.dq
        return np.real(np.einsum('ni,ij,nj->n', basis, rho.values, basis)) * dq * dq


def fock_tail(coefficients: np.ndarray, norm: float = 1.0) -> float:
    return float(max(norm - np.sum(np.abs(coefficients) ** 2), 0.0))


def purity(rho: DensityMatrix) -> float:
    """Tr ρ² = ∫∫|ρ(q, q′)|² dq dq′"""
    dq = rho.grid.dq
    return float(integrate.trapezoid(integrate.trapezoid(np.abs(rho.values) ** 2, dx=dq, axis=1), dx=dq))


state_builder = StateBuilder()


def build_wavefunction(spec: StateSpec, frame: OscillatorFrame, grid: QuadratureGrid) -> WaveFunction:
    return state_builder.build_wavefunction(spec, frame, grid)


def build_density(spec: StateSpec, frame: OscillatorFrame, grid: QuadratureGrid) -> DensityMatrix:
    return state_builder.build_density(spec, frame, grid)


def fock_coefficients(psi: WaveFunction, frame: OscillatorFrame, cutoff: int,
                      tolerance: Optional[float] = None) -> np.ndarray:
    return state_builder.fock_coefficients(psi, frame, cutoff, tolerance)
