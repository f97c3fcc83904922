#!/usr/bin/env python3
"""
Phase-space dynamics
Moyal and Liouville evolution for polynomial potentials, linear symplectic
transport, moment invariants and a split-step Schrödinger reference solver
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.fft import next_fast_len

from config import Config
from phasespace.errors import NumericalToleranceError, ValidationError
from phasespace.numerics import (PhaseSpaceFunction, fourier_shift, integrate_2d, sample_at,
                                 wavenumbers)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PolynomialPotential:
    """V(q) = Σ c_k q^k with degree at most six"""

    coefficients: Tuple[float, ...]

    def __post_init__(self):
        coefficients = tuple(float(c) for c in self.coefficients) or (0.0,)
        if not all(np.isfinite(coefficients)):
            raise ValidationError(f"potential coefficients must be finite, got {coefficients}")
        while len(coefficients) > 1 and coefficients[-1] == 0.0:
            coefficients = coefficients[:-1]
        if len(coefficients) - 1 > Config.MAX_POTENTIAL_DEGREE:
            raise ValidationError(
                f"potential degree {len(coefficients) - 1} exceeds {Config.MAX_POTENTIAL_DEGREE}")
        object.__setattr__(self, 'coefficients', coefficients)

    @classmethod
    def parse(cls, text: str) -> 'PolynomialPotential':
        """Parse 'c0,c1,...' as written on the command line"""
        try:
            return cls(tuple(float(item) for item in text.split(',') if item.strip()))
        except ValueError:
            raise ValidationError(f"cannot parse potential coefficients '{text}'")

    @classmethod
    def harmonic(cls, mass: float = 1.0, omega: float = 1.0) -> 'PolynomialPotential':
        return cls((0.0, 0.0, 0.5 * mass * omega ** 2))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, q):
        return P.polyval(np.asarray(q, dtype=float), self.coefficients)

    def derivative(self, order: int = 1) -> 'PolynomialPotential':
        if order > self.degree:
            return PolynomialPotential((0.0,))
        return PolynomialPotential(tuple(P.polyder(self.coefficients, order)))


@dataclass(frozen=True)
class HamiltonianSpec:
    """H(q, p) = p²/2m + V(q)"""

    mass: float
    potential: PolynomialPotential

    def __post_init__(self):
        if not self.mass > 0:
            raise ValidationError(f"mass must be positive, got {self.mass}")


@dataclass(frozen=True)
class SymplecticMap2D:
    """Linear canonical map [[A, B], [C, D]] acting on (q, p)"""

    A: float
    B: float
    C: float
    D: float

    def __post_init__(self):
        determinant = self.A * self.D - self.B * self.C
        if abs(determinant - 1.0) > 1e-12:
            raise ValidationError(f"map is not symplectic: AD - BC = {determinant!r}")

    @classmethod
    def from_matrix(cls, matrix) -> 'SymplecticMap2D':
        (a, b), (c, d) = np.asarray(matrix, dtype=float)
        return cls(float(a), float(b), float(c), float(d))

    @classmethod
    def identity(cls) -> 'SymplecticMap2D':
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def rotation(cls, angle: float) -> 'SymplecticMap2D':
        """Counter-clockwise rotation of the (q, p) plane"""
        c, s = math.cos(angle), math.sin(angle)
        return cls(c, -s, s, c)

    @classmethod
    def free_flight(cls, t: float, mass: float = 1.0) -> 'SymplecticMap2D':
        return cls(1.0, t / mass, 0.0, 1.0)

    @classmethod
    def squeeze(cls, factor: float) -> 'SymplecticMap2D':
        if not factor > 0:
            raise ValidationError(f"squeeze factor must be positive, got {factor}")
        return cls(factor, 0.0, 0.0, 1.0 / factor)

    @classmethod
    def harmonic_flow(cls, t: float, mass: float = 1.0, omega: float = 1.0) -> 'SymplecticMap2D':
        c, s = math.cos(omega * t), math.sin(omega * t)
        return cls(c, s / (mass * omega), -mass * omega * s, c)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.A, self.B], [self.C, self.D]])

    def inverse(self) -> 'SymplecticMap2D':
        return SymplecticMap2D(self.D, -self.B, -self.C, self.A)

    def __matmul__(self, other: 'SymplecticMap2D') -> 'SymplecticMap2D':
        (a, b), (c, d) = self.matrix @ other.matrix
        # products of unit-determinant maps drift by rounding only
        scale = 1.0 / math.sqrt(abs(a * d - b * c))
        return SymplecticMap2D(a * scale, b * scale, c * scale, d * scale)

    def is_identity(self, tolerance: float = 1e-14) -> bool:
        return bool(np.allclose(self.matrix, np.eye(2), rtol=0.0, atol=tolerance))


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float
    steps: int
    quantum_terms: bool = True

    def __post_init__(self):
        if not self.dt > 0:
            raise ValidationError(f"time step must be positive, got {self.dt}")
        if int(self.steps) != self.steps or self.steps < 0:
            raise ValidationError(f"step count must be a nonnegative integer, got {self.steps}")

    @property
    def duration(self) -> float:
        return self.dt * self.steps


def support_momentum(W: PhaseSpaceFunction, tolerance: float) -> float:
    """
    Largest |p| where W still carries weight

    A momentum column counts when its largest |W| exceeds tolerance times the
    peak of |W|. Never less than one momentum step.
    """
    grid = W.grid
    column_peaks = np.max(np.abs(W.values), axis=0)
    peak = float(np.max(column_peaks))
    if peak == 0.0:
        return grid.dp
    occupied = np.abs(grid.p[column_peaks > tolerance * peak])
    return max(float(np.max(occupied)), grid.dp)


class MoyalPropagator:
    """RK4 integration of the truncated Moyal equation with spectral derivatives"""

    def __init__(self):
        """Initialize the propagator with stability settings from Config"""
        self.stability_limit = Config.RK4_STABILITY_LIMIT
        self.drift_tolerance = Config.NORM_DRIFT_TOLERANCE
        self.support_tolerance = Config.EDGE_TOLERANCE

    def evolve(self, W: PhaseSpaceFunction, H: HamiltonianSpec, cfg: EvolutionConfig) -> PhaseSpaceFunction:
        grid = W.grid
        q, p = grid.q, grid.p
        limit = grid.dq * H.mass / support_momentum(W, self.support_tolerance)
        if cfg.dt > limit:
            raise ValidationError(f"time step {cfg.dt} violates the CFL bound dt <= dq*m/p_max = {limit:.4g}")
        p_max = float(np.max(np.abs(p)))

        terms = self._series(H, q, grid.hbar, cfg.quantum_terms)
        k_q = wavenumbers(grid.n_q, grid.dq)
        k_p = wavenumbers(grid.n_p, grid.dp)
        rate = p_max * np.max(np.abs(k_q)) / H.mass
        rate += sum(np.max(np.abs(coefficient)) * np.max(np.abs(k_p)) ** order
                    for order, coefficient in terms)
        substeps = max(1, int(math.ceil(cfg.dt * rate / self.stability_limit)))
        if substeps > 1:
            logger.info(f"⚠️ Moyal step {cfg.dt} split into {substeps} substeps for RK4 stability")
        h = cfg.dt / substeps

        drift_q = (-p / H.mass)[None, :]
        ikq = (1j * k_q)[:, None]
        derivative_factors = [((1j * k_p) ** order)[None, :] for order, _ in terms]

        def rhs(values: np.ndarray) -> np.ndarray:
            result = drift_q * np.fft.ifft(ikq * np.fft.fft(values, axis=0), axis=0).real
            spectrum = np.fft.fft(values, axis=1)
            for (order, coefficient), factor in zip(terms, derivative_factors):
                result += coefficient[:, None] * np.fft.ifft(factor * spectrum, axis=1).real
            return result

        values = np.array(W.values, dtype=float)
        mass0 = float(values.sum())
        peak0 = float(np.max(np.abs(values)))
        for step in range(cfg.steps * substeps):
            k1 = rhs(values)
            k2 = rhs(values + 0.5 * h * k1)
            k3 = rhs(values + 0.5 * h * k2)
            k4 = rhs(values + h * k3)
            values = values + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            elapsed = (step + 1) * h
            drift = abs(values.sum() - mass0) * grid.dq * grid.dp
            peak = float(np.max(np.abs(values)))
            if not np.isfinite(peak) or peak > 10.0 * peak0 or drift > self.drift_tolerance * max(1.0, elapsed):
                logger.error(f"❌ Moyal evolution unstable at t={elapsed:.4g}: drift {drift:.2e}, peak {peak:.3g}")
                raise NumericalToleranceError(
                    f"Moyal evolution blew up at t={elapsed:.4g} (norm drift {drift:.2e}, peak {peak:.3g})")
        return W.with_values(values)

    @staticmethod
    def _series(H: HamiltonianSpec, q: np.ndarray, hbar: float, quantum_terms: bool) -> List[Tuple[int, np.ndarray]]:
        """(order r, coefficient (ħ/2i)^{r−1} V^{(r)}(q) / r!) for the odd p-derivative terms"""
        orders = (1, 3, 5) if quantum_terms else (1,)
        terms = []
        for order in orders:
            if order > H.potential.degree:
                break
            prefactor = np.real((hbar / 2j) ** (order - 1)) / math.factorial(order)
            terms.append((order, prefactor * H.potential.derivative(order)(q)))
        return terms


moyal_propagator = MoyalPropagator()


def moyal_evolve(W: PhaseSpaceFunction, H: HamiltonianSpec, cfg: EvolutionConfig) -> PhaseSpaceFunction:
    """
    ∂W/∂t = −(p/m)∂W/∂q + Σ_{n≤2} (ħ/2i)^{2n}/(2n+1)! · V^{(2n+1)} ∂^{2n+1}W/∂p^{2n+1}

    quantum_terms=False keeps only the classical n = 0 term.
    """
    return moyal_propagator.evolve(W, H, cfg)


def liouville_evolve(W: PhaseSpaceFunction, H: HamiltonianSpec, t: float, step: float = 0.01) -> PhaseSpaceFunction:
    """Classical transport W(q, p; t) = W₀(q(−t), p(−t)) along backward characteristics"""
    grid = W.grid
    q, p = grid.mesh()
    force = H.potential.derivative(1)
    count = max(1, int(math.ceil(abs(t) / step)))
    h = -t / count

    def flow(qs, ps):
        return ps / H.mass, -force(qs)

    for _ in range(count):
        k1q, k1p = flow(q, p)
        k2q, k2p = flow(q + 0.5 * h * k1q, p + 0.5 * h * k1p)
        k3q, k3p = flow(q + 0.5 * h * k2q, p + 0.5 * h * k2p)
        k4q, k4p = flow(q + h * k3q, p + h * k3p)
        q = q + (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
        p = p + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)

    result = W.with_values(sample_at(W, q, p, order=1))
    loss = float(np.real(integrate_2d(W) - integrate_2d(result)))
    if loss > 1e-6:
        logger.warning(f"⚠️ Liouville transport lost {loss:.2e} of the mass through the grid edge")
    return result


def _shear_path(M: SymplecticMap2D) -> List[Tuple[str, float]]:
    """
    Factor M into elementary shears, applied in list order

    'L' is (q, p) -> (q, p + γq) and 'U' is (q, p) -> (q + βp, p). The
    direct three-shear form needs B != 0; a quarter turn is split off when it
    gives smaller shears.
    """
    def three(A, B, C, D):
        return [('L', (A - 1.0) / B), ('U', B), ('L', (D - 1.0) / B)]

    candidates = []
    if abs(M.B) > 1e-12:
        candidates.append(three(M.A, M.B, M.C, M.D))
    quarter = SymplecticMap2D.rotation(math.pi / 2)
    rest = M @ quarter.inverse()
    if abs(rest.B) > 1e-12:
        candidates.append(three(0.0, -1.0, 1.0, 0.0) + three(rest.A, rest.B, rest.C, rest.D))
    return min(candidates, key=lambda path: max(abs(amount) for _, amount in path))


def _padding(W: PhaseSpaceFunction, path: List[Tuple[str, float]]) -> Tuple[int, int]:
    """Rows and columns to add on each side so no intermediate shear wraps the support around"""
    grid = W.grid
    magnitude = np.abs(W.values)
    rows, cols = np.nonzero(magnitude > 1e-14 * max(float(magnitude.max()), 1e-300))
    if rows.size == 0:
        return 0, 0
    q_lo, q_hi = grid.q[rows.min()], grid.q[rows.max()]
    p_lo, p_hi = grid.p[cols.min()], grid.p[cols.max()]
    corners = np.array([[q_lo, q_lo, q_hi, q_hi], [p_lo, p_hi, p_lo, p_hi]], dtype=float)
    need_q, need_p = [corners[0]], [corners[1]]
    for which, amount in path:
        if which == 'L':
            corners = np.array([corners[0], corners[1] + amount * corners[0]])
        else:
            corners = np.array([corners[0] + amount * corners[1], corners[1]])
        need_q.append(corners[0])
        need_p.append(corners[1])
    need_q, need_p = np.concatenate(need_q), np.concatenate(need_p)
    pad_q = max(grid.q_min - need_q.min(), need_q.max() - grid.q[-1], 0.0) / grid.dq
    pad_p = max(grid.p_min - need_p.min(), need_p.max() - grid.p[-1], 0.0) / grid.dp
    margin = 8
    return int(math.ceil(pad_q)) + margin, int(math.ceil(pad_p)) + margin


def apply_symplectic(W: PhaseSpaceFunction, M: SymplecticMap2D, interpolation: str = 'fourier') -> PhaseSpaceFunction:
    """
    Transport W^f(x) = W^i(M⁻¹x)

    Args:
        W: Phase-space function of any kind
        M: Unit-determinant linear map
        interpolation: 'fourier' (exact spectral shears) or 'bilinear'

    Returns:
        Transformed function on the same grid
    """
    if M.is_identity():
        return W.with_values(np.array(W.values, copy=True))
    if interpolation == 'bilinear':
        inverse = M.inverse()
        q, p = W.grid.mesh()
        source_q = inverse.A * q + inverse.B * p
        source_p = inverse.C * q + inverse.D * p
        return W.with_values(sample_at(W, source_q, source_p, order=1))
    if interpolation != 'fourier':
        raise ValidationError(f"unknown interpolation '{interpolation}'")

    grid = W.grid
    path = _shear_path(M)
    pad_q, pad_p = _padding(W, path)
    rows = next_fast_len(grid.n_q + 2 * pad_q)
    cols = next_fast_len(grid.n_p + 2 * pad_p)
    field = np.pad(W.values, ((pad_q, rows - grid.n_q - pad_q), (pad_p, cols - grid.n_p - pad_p)))
    q = grid.q_min + grid.dq * (np.arange(rows) - pad_q)
    p = grid.p_min + grid.dp * (np.arange(cols) - pad_p)
    for which, amount in path:
        if which == 'L':
            field = fourier_shift(field, amount * q, grid.dp, axis=1)
        else:
            field = fourier_shift(field, amount * p, grid.dq, axis=0)
    cropped = field[pad_q:pad_q + grid.n_q, pad_p:pad_p + grid.n_p]
    lost = float(np.sum(np.abs(field)) - np.sum(np.abs(cropped))) * grid.dq * grid.dp
    if lost > 1e-6:
        logger.warning(f"⚠️ Symplectic transport pushed {lost:.2e} of |W| outside the grid")
    return W.with_values(cropped)


def wdf_moments(W: PhaseSpaceFunction, k_max: int = 4) -> List[float]:
    """I_k = (k / 2^{k−1}) ∫∫ W^k dq dp / 2π for k = 1..k_max"""
    if not 1 <= k_max <= 4:
        raise ValidationError(f"k_max must lie in 1..4, got {k_max}")
    values = np.real(W.values)
    return [float(k / 2 ** (k - 1) * integrate_2d(W.with_values(values ** k)) / (2.0 * np.pi))
            for k in range(1, k_max + 1)]


def split_step_schrodinger(psi, H: HamiltonianSpec, t: float, dt: float):
    """
    Strang-split propagation: half potential kick, kinetic drift in momentum space, half kick

    Raises NumericalToleranceError if the norm drifts by more than 1e−8 per step.
    """
    from phasespace.states import WaveFunction

    if not dt > 0:
        raise ValidationError(f"time step must be positive, got {dt}")
    grid = psi.grid
    steps = max(1, int(round(abs(t) / dt)))
    h = t / steps
    k = wavenumbers(grid.n_q, grid.dq)
    half_kick = np.exp(-0.5j * h * H.potential(grid.q) / grid.hbar)
    drift = np.exp(-0.5j * h * grid.hbar * k ** 2 / H.mass)
    values = np.array(psi.values, dtype=complex)
    norm0 = psi.norm()
    for step in range(steps):
        values = half_kick * np.fft.ifft(drift * np.fft.fft(half_kick * values))
        norm = float(np.sum(np.abs(values) ** 2) * grid.dq)
        if abs(norm - norm0) > 1e-8 * (step + 1):
            raise NumericalToleranceError(f"split-step norm drift {abs(norm - norm0):.2e} after {step + 1} steps")
    return WaveFunction(grid, values)


def energy(psi, H: HamiltonianSpec) -> float:
    """⟨H⟩ = ∫ |∂ψ|² ħ²/2m + V|ψ|²"""
    grid = psi.grid
    k = wavenumbers(grid.n_q, grid.dq)
    gradient = np.fft.ifft(1j * k * np.fft.fft(psi.values))
    kinetic = grid.hbar ** 2 / (2.0 * H.mass) * np.sum(np.abs(gradient) ** 2) * grid.dq
    potential = np.sum(H.potential(grid.q) * np.abs(psi.values) ** 2) * grid.dq
    return float(kinetic + potential)
