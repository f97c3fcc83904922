#!/usr/bin/env python3
"""
Quasiprobability transforms
Wigner functions from wavefunctions and density matrices, the s-ordered,
Husimi, Kirkwood and Weyl relatives, moments and validity diagnostics
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate
from scipy.linalg import eigvalsh

from config import Config
from phasespace.dynamics import PolynomialPotential
from phasespace.errors import (NumericalToleranceError, UnsupportedDirectionError,
                               ValidationError)
from phasespace.numerics import (Kind, PhaseSpaceFunction, QuadratureGrid, gaussian_convolve_2d,
                                 integrate_2d, require_same_grid, sample_at,
                                 spectral_derivative, spectral_upsample, wavenumbers)
from phasespace.states import DensityMatrix, OscillatorFrame, WaveFunction, frame_for

logger = logging.getLogger(__name__)


def _chord_indices(n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Half-grid indices of q ± x/2 for every q node and chord offset k in [-n, n)"""
    centre = 2 * np.arange(n)[:, None]
    offsets = np.arange(-n, n)[None, :]
    plus, minus = centre + offsets, centre - offsets
    valid = (plus >= 0) & (plus < 2 * n) & (minus >= 0) & (minus < 2 * n)
    return np.clip(plus, 0, 2 * n - 1), np.clip(minus, 0, 2 * n - 1), valid


def _chords_to_momentum(chords: np.ndarray, grid: QuadratureGrid) -> np.ndarray:
    """(2πħ)^{-1}∫dx e^{-ipx/ħ} f(q, x) for chords sampled at x = kΔq, k in [-n, n)"""
    n = grid.n_q
    folded = chords[:, :n] + chords[:, n:]
    spectrum = np.fft.fftshift(np.fft.fft(folded, axis=1), axes=1)
    return grid.dq / (2.0 * np.pi * grid.hbar) * spectrum


class WignerTransformer:
    """Chord-product Wigner transforms with a realness guard"""

    def __init__(self):
        """Initialize the transformer with tolerances from Config"""
        self.realness_tolerance = Config.REALNESS_TOLERANCE

    def from_wavefunction(self, psi: WaveFunction) -> PhaseSpaceFunction:
        values = self._transform(psi.values, psi.values, psi.grid)
        return PhaseSpaceFunction(psi.grid, self._real_part(values, 'wavefunction'), Kind.WIGNER)

    def from_density(self, rho: DensityMatrix) -> PhaseSpaceFunction:
        grid = rho.grid
        fine = spectral_upsample(spectral_upsample(rho.values, 2, axis=0), 2, axis=1)
        plus, minus, valid = _chord_indices(grid.n_q)
        chords = np.where(valid, fine[plus, minus], 0.0)
        values = _chords_to_momentum(chords, grid)
        return PhaseSpaceFunction(grid, self._real_part(values, 'density matrix'), Kind.WIGNER)

    def cross(self, psi_n: WaveFunction, psi_m: WaveFunction) -> PhaseSpaceFunction:
        """W_nm kernel with ψ_n*(q − x/2) ψ_m(q + x/2); complex in general"""
        require_same_grid(psi_n.grid, psi_m.grid)
        return PhaseSpaceFunction(psi_n.grid, self._transform(psi_n.values, psi_m.values, psi_n.grid),
                                  Kind.WIGNER)

    @staticmethod
    def _transform(lower: np.ndarray, upper: np.ndarray, grid: QuadratureGrid) -> np.ndarray:
        fine_lower = spectral_upsample(np.asarray(lower, dtype=complex), 2)
        fine_upper = spectral_upsample(np.asarray(upper, dtype=complex), 2)
        plus, minus, valid = _chord_indices(grid.n_q)
        chords = np.where(valid, np.conj(fine_lower[minus]) * fine_upper[plus], 0.0)
        return _chords_to_momentum(chords, grid)

    def _real_part(self, values: np.ndarray, source: str) -> np.ndarray:
        residue = float(np.max(np.abs(values.imag)))
        if residue > self.realness_tolerance:
            logger.error(f"❌ Wigner transform of {source} left imaginary residue {residue:.2e}")
            raise NumericalToleranceError(
                f"imaginary residue {residue:.2e} exceeds {self.realness_tolerance:.1e}")
        return values.real


wigner_transformer = WignerTransformer()


def wigner_from_wavefunction(psi: WaveFunction) -> PhaseSpaceFunction:
    """W(q,p) = (2πħ)^{-1}∫dx e^{-ipx/ħ} ψ*(q − x/2) ψ(q + x/2)"""
    return wigner_transformer.from_wavefunction(psi)


def wigner_from_density(rho: DensityMatrix) -> PhaseSpaceFunction:
    """W(q,p) = (2πħ)^{-1}∫dx e^{-ipx/ħ} ⟨q + x/2|ρ|q − x/2⟩"""
    return wigner_transformer.from_density(rho)


def cross_wigner(psi_n: WaveFunction, psi_m: WaveFunction) -> PhaseSpaceFunction:
    return wigner_transformer.cross(psi_n, psi_m)


def _require_kind(W: PhaseSpaceFunction, *kinds: Kind) -> None:
    if W.kind not in kinds:
        names = ', '.join(kind.name for kind in kinds)
        raise ValidationError(f"expected a {names} function, got {W.kind.name}")


def marginals(W: PhaseSpaceFunction) -> Tuple[np.ndarray, np.ndarray]:
    """(∫W dp, ∫W dq) on the grid's q and p axes"""
    _require_kind(W, Kind.WIGNER)
    position = integrate.trapezoid(W.values, dx=W.grid.dp, axis=1)
    momentum = integrate.trapezoid(W.values, dx=W.grid.dq, axis=0)
    return position, momentum


def overlap(W1: PhaseSpaceFunction, W2: PhaseSpaceFunction) -> float:
    """Tr(ρ₁ρ₂) = 2πħ ∫∫ W₁W₂ dq dp"""
    _require_kind(W1, Kind.WIGNER)
    _require_kind(W2, Kind.WIGNER)
    require_same_grid(W1.grid, W2.grid)
    product = W1.with_values(W1.values * W2.values)
    return float(2.0 * np.pi * W1.grid.hbar * np.real(integrate_2d(product)))


def density_from_wigner(W: PhaseSpaceFunction) -> DensityMatrix:
    """
    ρ(u, v) = ∫dp e^{ip(u−v)/ħ} W((u+v)/2, p)

    Midpoints fall on a half-spaced q grid obtained by band-limited
    interpolation; chords |u − v| of half the grid length or more are not
    representable and are set to zero.
    """
    _require_kind(W, Kind.WIGNER, Kind.CLASSICAL)
    grid = W.grid
    n = grid.n_q
    fine = spectral_upsample(W.values, 2, axis=0)
    chords = grid.dp * n * np.fft.ifft(np.fft.ifftshift(fine, axes=1), axis=1)
    a = np.arange(n)[:, None]
    b = np.arange(n)[None, :]
    values = np.where(np.abs(a - b) < n // 2, chords[a + b, (a - b) % n], 0.0)
    return DensityMatrix(grid, values)


def s_parameterized(W: PhaseSpaceFunction, s: float, frame: Optional[OscillatorFrame] = None) -> PhaseSpaceFunction:
    """
    Smooth a Wigner (or s₀-ordered) function to ordering s

    Args:
        W: Wigner function, or an S_PARAM function carrying its s₀ as parameter
        s: Target ordering, s <= s₀ <= 0
        frame: Oscillator frame fixing the smoothing widths (m = ω = 1 by default)

    Returns:
        S_PARAM function, or W itself when s equals its current ordering
    """
    _require_kind(W, Kind.WIGNER, Kind.S_PARAM)
    frame = frame_for(W.grid, frame)
    current = 0.0 if W.kind == Kind.WIGNER else W.parameter
    if s > 0:
        raise UnsupportedDirectionError(f"s = {s} > 0 distributions are singular and not evaluated")
    if s > current:
        raise UnsupportedDirectionError(f"cannot sharpen an s = {current} function to s = {s}")
    if s == current:
        return W
    amount = current - s
    sigma_q = np.sqrt(amount * frame.hbar / (2.0 * frame.mass * frame.omega))
    sigma_p = np.sqrt(amount * frame.mass * frame.hbar * frame.omega / 2.0)
    return _retag(gaussian_convolve_2d(W, sigma_q, sigma_p), Kind.S_PARAM, float(s))


def _retag(F: PhaseSpaceFunction, kind: Kind, parameter: float) -> PhaseSpaceFunction:
    return F.with_values(F.values, kind, parameter)


def husimi(W: PhaseSpaceFunction, zeta: float, frame: Optional[OscillatorFrame] = None) -> PhaseSpaceFunction:
    """Smooth W with the minimum-uncertainty Gaussian of width parameter ζ (ζ = ω gives Q)"""
    _require_kind(W, Kind.WIGNER)
    if not zeta > 0:
        raise ValidationError(f"zeta must be positive, got {zeta}")
    frame = frame_for(W.grid, frame)
    sigma_q = np.sqrt(frame.hbar / (2.0 * frame.mass * zeta))
    sigma_p = np.sqrt(frame.hbar * frame.mass * zeta / 2.0)
    return _retag(gaussian_convolve_2d(W, sigma_q, sigma_p), Kind.HUSIMI, float(zeta))


def kirkwood(W: PhaseSpaceFunction, b: float) -> PhaseSpaceFunction:
    """b-ordered distribution: multiply the double Fourier transform of W by exp(−iħbuv/2)"""
    _require_kind(W, Kind.WIGNER)
    grid = W.grid
    if b == 0:
        return PhaseSpaceFunction(grid, W.values.astype(complex), Kind.KIRKWOOD, 0.0)
    u = wavenumbers(grid.n_q, grid.dq)[:, None]
    v = wavenumbers(grid.n_p, grid.dp)[None, :]
    kernel = np.exp(-0.5j * grid.hbar * b * u * v)
    values = np.fft.ifft2(np.fft.fft2(W.values) * kernel)
    return PhaseSpaceFunction(grid, values, Kind.KIRKWOOD, float(b))


def weyl_function(W: PhaseSpaceFunction) -> PhaseSpaceFunction:
    """
    W̃(Q, P) = ∫∫ W(q, p) e^{−i(Pq − pQ)/ħ} dq dp

    Output lives on the centred grid with the same spacings: Q along the
    first axis, P along the second, W̃(0, 0) = Tr ρ.
    """
    _require_kind(W, Kind.WIGNER, Kind.CLASSICAL)
    grid = W.grid
    n = grid.n_q
    out = grid.centered()
    big_p = out.p
    along_q = np.fft.fftshift(np.fft.fft(W.values, axis=0), axes=0)
    along_q *= np.exp(-1j * big_p * grid.q_min / grid.hbar)[:, None]
    along_p = n * np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(along_q, axes=1), axis=1), axes=1)
    return PhaseSpaceFunction(out, grid.dq * grid.dp * along_p.T, Kind.WEYL)


def characteristic(weyl: PhaseSpaceFunction, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """χ(u, v) = Tr[ρ e^{i(uq + vp)}], read bilinearly off a Weyl function"""
    hbar = weyl.grid.hbar
    return sample_at(weyl, hbar * np.asarray(v), -hbar * np.asarray(u), order=1)


def _edge_mass(W: PhaseSpaceFunction, width: int = 4) -> float:
    mask = np.zeros(W.values.shape, dtype=bool)
    mask[:width, :] = mask[-width:, :] = True
    mask[:, :width] = mask[:, -width:] = True
    return float(np.sum(np.abs(W.values[mask])) * W.grid.dq * W.grid.dp)


def expectation(W: PhaseSpaceFunction, a: int, b: int) -> float:
    """Weyl-ordered moment ⟨qᵃpᵇ⟩ = ∫∫ qᵃ pᵇ W dq dp for a + b <= 4"""
    if a < 0 or b < 0 or int(a) != a or int(b) != b:
        raise ValidationError(f"moment exponents must be nonnegative integers, got ({a}, {b})")
    if a + b > 4:
        raise ValidationError(f"moment order {a + b} exceeds 4")
    tail = _edge_mass(W)
    if tail > Config.TAIL_TOLERANCE:
        raise NumericalToleranceError(f"moment unreliable: {tail:.2e} of |W| sits at the grid edge")
    q, p = W.grid.mesh()
    return float(np.real(integrate_2d(W.with_values(q ** a * p ** b * W.values))))


def uncertainty(W: PhaseSpaceFunction) -> Tuple[float, float, float]:
    """(Δq, Δp, ΔqΔp)"""
    _require_kind(W, Kind.WIGNER)
    norm = expectation(W, 0, 0)
    mean_q = expectation(W, 1, 0) / norm
    mean_p = expectation(W, 0, 1) / norm
    delta_q = np.sqrt(max(expectation(W, 2, 0) / norm - mean_q ** 2, 0.0))
    delta_p = np.sqrt(max(expectation(W, 0, 2) / norm - mean_p ** 2, 0.0))
    return float(delta_q), float(delta_p), float(delta_q * delta_p)


def negativity_volume(W: PhaseSpaceFunction) -> float:
    """∫∫ max(−W, 0) dq dp for a Wigner or smoothed (s ≤ 0) distribution"""
    _require_kind(W, Kind.WIGNER, Kind.S_PARAM, Kind.HUSIMI)
    return float(integrate_2d(W.with_values(np.maximum(-np.real(W.values), 0.0))))


def stationary_residuals(W: PhaseSpaceFunction, V: PolynomialPotential, E: float,
                         m: float = 1.0) -> Tuple[float, float]:
    """
    Relative residuals ‖L₁W‖/‖W‖ and ‖L₂W‖/‖W‖ of the stationary phase-space equations

    L₁ = −(p/m)∂q + Σ_{r odd} (1/r!)(iħ/2)^{r−1} V^{(r)} ∂p^r
    L₂ = p²/2m + V − E − (ħ²/8m)∂q² + Σ_{r even ≥ 2} (1/r!)(iħ/2)^r V^{(r)} ∂p^r
    """
    if not m > 0:
        raise ValidationError(f"mass must be positive, got {m}")
    grid = W.grid
    hbar = grid.hbar
    q, p = grid.mesh()
    values = np.real(W.values)
    first = -(p / m) * spectral_derivative(values, grid.dq, 1, axis=0)
    second = (p ** 2 / (2.0 * m) + V(q) - E) * values
    second -= hbar ** 2 / (8.0 * m) * spectral_derivative(values, grid.dq, 2, axis=0)
    factorial = 1.0
    for order in range(1, V.degree + 1):
        factorial *= order
        dv = V.derivative(order)(q)
        dp_values = spectral_derivative(values, grid.dp, order, axis=1)
        if order % 2 == 1:
            first += np.real((0.5j * hbar) ** (order - 1)) / factorial * dv * dp_values
        else:
            second += np.real((0.5j * hbar) ** order) / factorial * dv * dp_values
    norm = np.linalg.norm(values)
    return float(np.linalg.norm(first) / norm), float(np.linalg.norm(second) / norm)


def positivity_points(grid: QuadratureGrid, count: int, seed: int = 0,
                            spread: Optional[int] = None) -> List[Tuple[float, float]]:
    """
    Fixed-seed (u, v) points whose pairwise differences land on Weyl-grid nodes

    u steps by Δp/ħ and v by Δq/ħ, each drawn from ±spread nodes.
    """
    rng = np.random.default_rng(seed)
    spread = grid.n_q // 8 if spread is None else spread
    steps = rng.integers(-spread, spread + 1, size=(count, 2))
    return [(float(i * grid.dp / grid.hbar), float(j * grid.dq / grid.hbar)) for i, j in steps]


def hbar_positivity_check(W: PhaseSpaceFunction, points: Sequence[Tuple[float, float]],
                          tol: float = 1e-8) -> Dict:
    """
    Matrix test that W is the Wigner function of a positive operator

    Builds M_jk = χ(a_k − a_j)·exp[iħ(u_j v_k − u_k v_j)/2] from the
    characteristic function and checks its eigenvalues against −tol.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    if not 1 <= len(points) <= 16:
        raise ValidationError(f"positivity check takes 1 to 16 points, got {len(points)}")
    weyl = weyl_function(W)
    hbar = W.grid.hbar
    u, v = points[:, 0], points[:, 1]
    du = u[None, :] - u[:, None]
    dv = v[None, :] - v[:, None]
    big_q, big_p = hbar * dv, -hbar * du
    out = weyl.grid
    if (np.any(big_q < out.q[0]) or np.any(big_q > out.q[-1])
            or np.any(big_p < out.p[0]) or np.any(big_p > out.p[-1])):
        raise ValidationError("point differences fall outside the Weyl-function support")
    phase = np.exp(0.5j * hbar * (u[:, None] * v[None, :] - u[None, :] * v[:, None]))
    matrix = characteristic(weyl, du, dv) * phase
    eigenvalues = eigvalsh(0.5 * (matrix + matrix.conj().T))
    minimum = float(eigenvalues.min())
    passed = minimum >= -tol
    if not passed:
        logger.info(f"🔍 hbar-positivity failed: min eigenvalue {minimum:.3e} over {len(points)} points")
    return {
        'passed': passed,
        'min_eigenvalue': minimum,
        'eigenvalues': eigenvalues,
        'points': len(points),
    }


def critical_s(state: Union[WaveFunction, DensityMatrix], resolution: float = 0.05,
               frame: Optional[OscillatorFrame] = None) -> Dict:
    """
    Bisect for the ordering s_c at which the s-parameterized function stops being negative

    Args:
        state: WaveFunction or DensityMatrix
        resolution: Final bracket width, at most 0.05
        frame: Oscillator frame for the smoothing widths

    Returns:
        Dict with 'status' ('determined' or 'undetermined (> 0)'), 's_c' and 'bracket'
    """
    if not 0 < resolution <= 0.05:
        raise ValidationError(f"resolution must lie in (0, 0.05], got {resolution}")
    W = wigner_from_wavefunction(state) if isinstance(state, WaveFunction) else wigner_from_density(state)
    tolerance = Config.NEGATIVITY_TOLERANCE
    if W.values.min() >= -tolerance:
        return {'status': 'undetermined (> 0)', 's_c': None, 'bracket': None}

    def nonnegative(s: float) -> bool:
        return s_parameterized(W, s, frame).values.min() >= -tolerance

    low, high = -1.0, 0.0
    if not nonnegative(low):
        logger.warning("⚠️ s = -1 function still negative on this grid; bracket pinned at -1")
    while high - low > resolution:
        middle = 0.5 * (low + high)
        if nonnegative(middle):
            low = middle
        else:
            high = middle
    return {'status': 'determined', 's_c': 0.5 * (low + high), 'bracket': (low, high)}
