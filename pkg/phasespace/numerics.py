#!/usr/bin/env python3
"""
Numerical core of the phase-space toolkit
Quadrature grids, trapezoid integration, spectral helpers and Gaussian smoothing
"""

import logging
from dataclasses import dataclass, replace
from enum import IntEnum
from typing import Optional, Tuple, Union

import numpy as np
from scipy import integrate, ndimage

from phasespace.errors import GridError, GridMismatchError, ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuadratureGrid:
    """Uniform position axis [q_min, q_max) plus its FFT-conjugate momentum axis"""

    q_min: float
    q_max: float
    n_q: int
    hbar: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.q_min) or not np.isfinite(self.q_max):
            raise GridError("grid limits must be finite")
        if self.q_max <= self.q_min:
            raise GridError(f"inverted range: q_max={self.q_max} <= q_min={self.q_min}")
        if int(self.n_q) != self.n_q or self.n_q < 8 or (int(self.n_q) & (int(self.n_q) - 1)) != 0:
            raise GridError(f"n_q must be a power of two >= 8, got {self.n_q}")
        if not self.hbar > 0:
            raise GridError(f"hbar must be positive, got {self.hbar}")
        object.__setattr__(self, 'n_q', int(self.n_q))

    @property
    def n_p(self) -> int:
        return self.n_q

    @property
    def dq(self) -> float:
        return (self.q_max - self.q_min) / self.n_q

    @property
    def dp(self) -> float:
        return 2.0 * np.pi * self.hbar / (self.n_q * self.dq)

    @property
    def length(self) -> float:
        return self.q_max - self.q_min

    @property
    def q(self) -> np.ndarray:
        return self.q_min + self.dq * np.arange(self.n_q)

    @property
    def p(self) -> np.ndarray:
        return self.dp * (np.arange(self.n_q) - self.n_q // 2)

    @property
    def p_min(self) -> float:
        return -self.dp * (self.n_q // 2)

    @property
    def p_max(self) -> float:
        return self.dp * (self.n_q // 2)

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        """(q, p) arrays broadcast to the (n_q, n_p) layout of phase-space values"""
        return np.meshgrid(self.q, self.p, indexing='ij')

    def matches(self, other: 'QuadratureGrid', rtol: float = 1e-12) -> bool:
        return (self.n_q == other.n_q
                and np.isclose(self.q_min, other.q_min, rtol=rtol, atol=rtol)
                and np.isclose(self.q_max, other.q_max, rtol=rtol, atol=rtol)
                and np.isclose(self.hbar, other.hbar, rtol=rtol, atol=0.0))

    def centered(self) -> 'QuadratureGrid':
        """Grid with the same spacings whose q axis is centred on zero"""
        half = 0.5 * self.length
        return QuadratureGrid(-half, half, self.n_q, self.hbar)


def make_grid(q_min: float, q_max: float, n_q: int, hbar: float = 1.0) -> QuadratureGrid:
    """
    Build a quadrature grid with its conjugate momentum axis

    Args:
        q_min: Lower edge of the position axis (included)
        q_max: Upper edge of the position axis (excluded)
        n_q: Number of samples, a power of two >= 8
        hbar: Action quantum (normalized wavelength in optics mode)

    Returns:
        QuadratureGrid with Δp·Δq·n_q = 2πħ
    """
    return QuadratureGrid(float(q_min), float(q_max), n_q, float(hbar))


def require_same_grid(first: QuadratureGrid, second: QuadratureGrid) -> None:
    if not first.matches(second):
        raise GridMismatchError(
            f"grid mismatch: [{first.q_min}, {first.q_max}) x {first.n_q} (hbar={first.hbar}) vs "
            f"[{second.q_min}, {second.q_max}) x {second.n_q} (hbar={second.hbar})")


class Kind(IntEnum):
    """Kind tag of a phase-space function; values double as file codes"""
    WIGNER = 0
    S_PARAM = 1
    HUSIMI = 2
    KIRKWOOD = 3
    WEYL = 4
    CLASSICAL = 5


@dataclass(frozen=True, eq=False)
class PhaseSpaceFunction:
    """Samples F(q_i, p_j) laid out as values[i, j] with q outer"""

    grid: QuadratureGrid
    values: np.ndarray
    kind: Kind = Kind.WIGNER
    parameter: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.shape != (self.grid.n_q, self.grid.n_p):
            raise GridError(f"values shape {values.shape} does not match grid "
                            f"({self.grid.n_q}, {self.grid.n_p})")
        if not np.iscomplexobj(values):
            values = values.astype(float, copy=False)
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'kind', Kind(self.kind))

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)

    def with_values(self, values: np.ndarray, kind: Optional[Kind] = None,
                    parameter: Optional[float] = None) -> 'PhaseSpaceFunction':
        changes = {'values': values}
        if kind is not None:
            changes['kind'] = kind
        if parameter is not None:
            changes['parameter'] = parameter
        return replace(self, **changes)


def integrate_1d(samples: Union[np.ndarray, list], spacing: float) -> Union[float, complex]:
    """Trapezoid rule on uniformly spaced samples"""
    samples = np.asarray(samples)
    if samples.size == 0:
        raise ValidationError("cannot integrate an empty sample set")
    return integrate.trapezoid(samples, dx=spacing)


def integrate_2d(F) -> Union[float, complex]:
    """Trapezoid rule over both axes of a phase-space function"""
    values = np.asarray(F.values)
    if values.size == 0:
        raise ValidationError("cannot integrate an empty phase-space function")
    inner = integrate.trapezoid(values, dx=F.grid.dp, axis=1)
    return integrate.trapezoid(inner, dx=F.grid.dq)


def wavenumbers(n: int, spacing: float) -> np.ndarray:
    """Angular wavenumbers in FFT order"""
    return 2.0 * np.pi * np.fft.fftfreq(n, d=spacing)


def periodic_offsets(n: int, spacing: float) -> np.ndarray:
    """Signed displacements of a periodic axis in FFT order"""
    return spacing * ((np.arange(n) + n // 2) % n - n // 2)


def _keep_real(result: np.ndarray, like: np.ndarray) -> np.ndarray:
    return result if np.iscomplexobj(like) else result.real


def spectral_derivative(values: np.ndarray, spacing: float, order: int = 1, axis: int = -1) -> np.ndarray:
    """Derivative of the given order along one axis by FFT"""
    if order == 0:
        return np.array(values, copy=True)
    n = values.shape[axis]
    k = wavenumbers(n, spacing)
    factor = (1j * k) ** order
    if order % 2 == 1 and n % 2 == 0:
        factor[n // 2] = 0.0
    shape = [1] * values.ndim
    shape[axis] = n
    result = np.fft.ifft(np.fft.fft(values, axis=axis) * factor.reshape(shape), axis=axis)
    return _keep_real(result, values)


def fourier_shift(values: np.ndarray, shift: Union[float, np.ndarray], spacing: float, axis: int = -1) -> np.ndarray:
    """
    Shift samples along one axis by an arbitrary (sub-cell) amount: out(x) = in(x - shift)

    shift may be an array indexed by the remaining axes, so that each row or
    column of a 2D field moves by its own amount.
    """
    values = np.asarray(values)
    axis = axis % values.ndim
    k = wavenumbers(values.shape[axis], spacing)
    moved = np.moveaxis(values, axis, -1)
    shift = np.asarray(shift, dtype=float)
    if shift.ndim:
        shift = shift[..., None]
    result = np.fft.ifft(np.fft.fft(moved, axis=-1) * np.exp(-1j * k * shift), axis=-1)
    return _keep_real(np.moveaxis(result, -1, axis), values)


def spectral_upsample(values: np.ndarray, factor: int = 2, axis: int = -1) -> np.ndarray:
    """
    Band-limited interpolation onto a grid `factor` times finer along one axis

    Sample 0 stays in place; the Nyquist coefficient is split between the
    positive and negative frequency slots.
    """
    values = np.asarray(values)
    axis = axis % values.ndim
    n = values.shape[axis]
    m = n * factor
    spectrum = np.moveaxis(np.fft.fft(values, axis=axis), axis, -1)
    padded = np.zeros(spectrum.shape[:-1] + (m,), dtype=complex)
    half = n // 2
    padded[..., :half] = spectrum[..., :half]
    padded[..., m - half + 1:] = spectrum[..., half + 1:]
    padded[..., half] = 0.5 * spectrum[..., half]
    padded[..., m - half] = 0.5 * spectrum[..., half]
    result = np.moveaxis(np.fft.ifft(padded, axis=-1) * factor, -1, axis)
    return _keep_real(result, values)


def sample_at(F, q_points: np.ndarray, p_points: np.ndarray, order: int = 1) -> np.ndarray:
    """
    Interpolate a phase-space function at arbitrary (q, p) points

    Points outside the sampled rectangle contribute 0. order=1 is bilinear,
    order=3 cubic spline.
    """
    grid = F.grid
    rows = (np.asarray(q_points, dtype=float) - grid.q_min) / grid.dq
    cols = (np.asarray(p_points, dtype=float) - grid.p[0]) / grid.dp
    coords = np.array([rows, cols])
    values = np.asarray(F.values)
    kwargs = dict(order=order, mode='constant', cval=0.0, prefilter=order > 1)
    if np.iscomplexobj(values):
        return (ndimage.map_coordinates(values.real, coords, **kwargs)
                + 1j * ndimage.map_coordinates(values.imag, coords, **kwargs))
    return ndimage.map_coordinates(values, coords, **kwargs)


def _gaussian_kernel_spectrum(n: int, spacing: float, sigma: float) -> np.ndarray:
    """FFT of a sampled, periodized, unit-sum Gaussian kernel"""
    kernel = np.zeros(n)
    if sigma == 0:
        kernel[0] = 1.0
    else:
        offsets = periodic_offsets(n, spacing)
        kernel = np.exp(-0.5 * (offsets / sigma) ** 2)
        kernel /= kernel.sum()
    return np.fft.fft(kernel)


def gaussian_convolve_2d(F, sigma_q: float, sigma_p: float):
    """
    Convolve a phase-space function with a normalized Gaussian kernel

    The kernel is separable and applied in the Fourier domain; its unit sum
    keeps the total integral, and its positivity keeps nonnegative inputs
    nonnegative.
    """
    if sigma_q < 0 or sigma_p < 0:
        raise ValidationError(f"Gaussian widths must be nonnegative, got ({sigma_q}, {sigma_p})")
    if sigma_q == 0 and sigma_p == 0:
        return F.with_values(np.array(F.values, copy=True))
    grid = F.grid
    kq = _gaussian_kernel_spectrum(grid.n_q, grid.dq, sigma_q)
    kp = _gaussian_kernel_spectrum(grid.n_p, grid.dp, sigma_p)
    smoothed = np.fft.ifft2(np.fft.fft2(F.values) * kq[:, None] * kp[None, :])
    return F.with_values(_keep_real(smoothed, F.values))


def rms(first: np.ndarray, second: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.abs(np.asarray(first) - np.asarray(second)) ** 2)))
