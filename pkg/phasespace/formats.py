#!/usr/bin/env python3
"""
File formats for grids, histograms, states and images
PSQ1 binary, CSV with `# key=value` headers, P5 PGM rasters and .npz state containers
"""

import csv
import logging
import os
import zipfile
from typing import List, Optional, Tuple, Union

import numpy as np
from PIL import Image

from phasespace.errors import FormatError, ValidationError
from phasespace.numerics import Kind, PhaseSpaceFunction, make_grid
from phasespace.states import DensityMatrix, OscillatorFrame, WaveFunction
from phasespace.tomography import QuadratureHistogram

logger = logging.getLogger(__name__)

MAGIC = b'PSQ1'

HEADER_DTYPE = np.dtype([
    ('magic', 'S4'),
    ('n_q', '<u4'),
    ('n_p', '<u4'),
    ('q_min', '<f8'),
    ('q_max', '<f8'),
    ('p_min', '<f8'),
    ('p_max', '<f8'),
    ('hbar', '<f8'),
    ('kind', 'u1'),
    ('complex', 'u1'),
    ('parameter', '<f8'),
])


def _number(value: float) -> str:
    return f"{value:.17g}"


def _cell(value: Union[float, complex]) -> str:
    if isinstance(value, complex):
        return f"{value.real:.17g}{value.imag:+.17g}j"
    return _number(value)


# --- PSQ1 binary -----------------------------------------------------------

def write_binary(F: PhaseSpaceFunction, path: str) -> None:
    """Write a PSQ1 file: fixed little-endian header, then row-major values (q outer)"""
    grid = F.grid
    header = np.zeros(1, dtype=HEADER_DTYPE)
    header[0] = (MAGIC, grid.n_q, grid.n_p, grid.q_min, grid.q_max, grid.p_min, grid.p_max,
                 grid.hbar, int(F.kind), int(F.is_complex), F.parameter)
    if F.is_complex:
        body = np.ascontiguousarray(F.values, dtype='<c16')
    else:
        body = np.ascontiguousarray(F.values, dtype='<f8')
    with open(path, 'wb') as handle:
        handle.write(header.tobytes())
        handle.write(body.tobytes())


def read_binary(path: str) -> PhaseSpaceFunction:
    """Read a PSQ1 file; FormatError carries the byte offset of the first bad field"""
    with open(path, 'rb') as handle:
        data = handle.read()
    if len(data) < HEADER_DTYPE.itemsize:
        raise FormatError(f"{path}: truncated header ({len(data)} bytes)", offset=len(data))
    header = np.frombuffer(data, dtype=HEADER_DTYPE, count=1)[0]
    if header['magic'] != MAGIC:
        raise FormatError(f"{path}: bad magic {bytes(header['magic'])!r}", offset=0)
    n_q, n_p = int(header['n_q']), int(header['n_p'])
    if n_q != n_p:
        raise FormatError(f"{path}: n_p={n_p} differs from n_q={n_q}", offset=8)
    try:
        kind = Kind(int(header['kind']))
    except ValueError:
        raise FormatError(f"{path}: unknown kind code {int(header['kind'])}", offset=HEADER_DTYPE.fields['kind'][1])
    try:
        grid = make_grid(header['q_min'], header['q_max'], n_q, header['hbar'])
    except ValidationError as e:
        raise FormatError(f"{path}: invalid grid: {e}", offset=4)
    if not (np.isclose(header['p_min'], grid.p_min, rtol=1e-9, atol=1e-12)
            and np.isclose(header['p_max'], grid.p_max, rtol=1e-9, atol=1e-12)):
        raise FormatError(f"{path}: momentum axis [{header['p_min']}, {header['p_max']}) is not conjugate "
                          f"to the position axis", offset=HEADER_DTYPE.fields['p_min'][1])
    is_complex = bool(header['complex'])
    dtype = np.dtype('<c16' if is_complex else '<f8')
    expected = HEADER_DTYPE.itemsize + n_q * n_p * dtype.itemsize
    if len(data) != expected:
        raise FormatError(f"{path}: expected {expected} bytes, found {len(data)}", offset=min(len(data), expected))
    values = np.frombuffer(data, dtype=dtype, offset=HEADER_DTYPE.itemsize).reshape(n_q, n_p)
    return PhaseSpaceFunction(grid, values.astype(complex if is_complex else float), kind, float(header['parameter']))


# --- CSV -------------------------------------------------------------------

def _read_headers(lines: List[str], path: str) -> Tuple[dict, int]:
    headers = {}
    index = 0
    while index < len(lines) and lines[index].startswith('#'):
        body = lines[index][1:].strip()
        if '=' not in body:
            raise FormatError(f"{path}: header must read '# key=value'", line=index + 1)
        key, value = body.split('=', 1)
        headers[key.strip()] = value.strip()
        index += 1
    return headers, index


def _parse_cells(cells: List[str], path: str, line: int, as_complex: bool) -> np.ndarray:
    try:
        if as_complex:
            return np.array([complex(cell.strip()) for cell in cells])
        return np.array([float(cell) for cell in cells])
    except ValueError:
        raise FormatError(f"{path}: unparsable number", line=line)


def write_csv(F: PhaseSpaceFunction, path: str) -> None:
    """
    Write a grid as CSV

    `# key=value` header lines, a first row holding the p axis, then one row per q:
    the q value followed by F(q, p_j), all at 17 significant digits.
    """
    grid = F.grid
    with open(path, 'w', newline='') as handle:
        for key, value in (('format', 'psq-grid'), ('q_min', _number(grid.q_min)), ('q_max', _number(grid.q_max)),
                           ('n_q', grid.n_q), ('hbar', _number(grid.hbar)), ('kind', F.kind.name),
                           ('parameter', _number(F.parameter)), ('complex', int(F.is_complex))):
            handle.write(f"# {key}={value}\n")
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow([_number(p) for p in grid.p])
        for q, row in zip(grid.q, F.values):
            writer.writerow([_number(q)] + [_cell(complex(v) if F.is_complex else float(v)) for v in row])


def read_csv(path: str) -> PhaseSpaceFunction:
    """Read a CSV grid; FormatError carries the 1-based line of the first bad row"""
    with open(path, newline='') as handle:
        lines = handle.read().splitlines()
    headers, start = _read_headers(lines, path)
    if headers.get('format') != 'psq-grid':
        raise FormatError(f"{path}: not a phase-space grid file", line=1)
    try:
        grid = make_grid(float(headers['q_min']), float(headers['q_max']), int(headers['n_q']), float(headers['hbar']))
        kind = Kind[headers['kind']]
        parameter = float(headers['parameter'])
        is_complex = bool(int(headers['complex']))
    except (KeyError, ValueError) as e:
        raise FormatError(f"{path}: missing or invalid header {e}", line=start)
    rows = list(csv.reader(lines[start:]))
    if len(rows) != grid.n_q + 1:
        raise FormatError(f"{path}: expected {grid.n_q + 1} data rows, found {len(rows)}", line=start + len(rows))
    p_axis = _parse_cells(rows[0], path, start + 1, False)
    if p_axis.size != grid.n_p or not np.allclose(p_axis, grid.p, rtol=1e-12, atol=1e-12):
        raise FormatError(f"{path}: momentum row does not match the grid", line=start + 1)
    values = np.zeros((grid.n_q, grid.n_p), dtype=complex if is_complex else float)
    for i, row in enumerate(rows[1:]):
        line = start + i + 2
        if len(row) != grid.n_p + 1:
            raise FormatError(f"{path}: expected {grid.n_p + 1} cells, found {len(row)}", line=line)
        cells = _parse_cells(row, path, line, is_complex)
        if not np.isclose(cells[0].real, grid.q[i], rtol=1e-12, atol=1e-12):
            raise FormatError(f"{path}: row position {cells[0].real} does not match q = {grid.q[i]}", line=line)
        values[i] = cells[1:]
    return PhaseSpaceFunction(grid, values, kind, parameter)


def write_histogram(hist: QuadratureHistogram, path: str) -> None:
    """
    Write quadrature histograms as CSV

    One header line `# angles=<n> x_min=<..> x_max=<..> n_x=<..>`, then one row per
    angle: θ followed by the pr values at x_min .. x_max (both included).
    """
    with open(path, 'w', newline='') as handle:
        handle.write(f"# angles={hist.angles.size} x_min={_number(hist.x[0])} "
                     f"x_max={_number(hist.x[-1])} n_x={hist.x.size}\n")
        writer = csv.writer(handle, lineterminator='\n')
        for angle, row in zip(hist.angles, hist.values):
            writer.writerow([_number(angle)] + [_number(v) for v in row])


def _histogram_header(line: str, path: str) -> Tuple[int, np.ndarray]:
    if not line.startswith('#'):
        raise FormatError(f"{path}: not a quadrature histogram file", line=1)
    try:
        fields = dict(item.split('=', 1) for item in line[1:].split())
        count, n_x = int(fields['angles']), int(fields['n_x'])
        x_min, x_max = float(fields['x_min']), float(fields['x_max'])
    except (KeyError, ValueError):
        raise FormatError(f"{path}: header must read '# angles=<n> x_min=<..> x_max=<..> n_x=<..>'", line=1)
    if count < 1 or n_x < 2 or not x_max > x_min:
        raise FormatError(f"{path}: invalid histogram header '{line}'", line=1)
    return count, np.linspace(x_min, x_max, n_x)


def read_histogram(path: str) -> QuadratureHistogram:
    """Read a histogram CSV written by write_histogram (or by hand in the same layout)"""
    with open(path, newline='') as handle:
        lines = [line for line in handle.read().splitlines() if line.strip()]
    if not lines:
        raise FormatError(f"{path}: empty histogram file", line=1)
    count, x = _histogram_header(lines[0], path)
    rows = list(csv.reader(lines[1:]))
    if len(rows) != count:
        raise FormatError(f"{path}: header announces {count} angles, found {len(rows)}", line=len(rows) + 1)
    angles, values = [], []
    for i, row in enumerate(rows):
        line = i + 2
        if len(row) != x.size + 1:
            raise FormatError(f"{path}: expected {x.size + 1} cells, found {len(row)}", line=line)
        cells = _parse_cells(row, path, line, False)
        angles.append(cells[0])
        values.append(cells[1:])
    try:
        return QuadratureHistogram(np.array(angles), x, np.array(values))
    except ValidationError as e:
        raise FormatError(f"{path}: {e}", line=2)


# --- grid dispatch ----------------------------------------------------------

def write_phase_space(F: PhaseSpaceFunction, path: str, fmt: Optional[str] = None) -> str:
    """Write in the format given, or the one implied by the extension; returns the format used"""
    fmt = fmt or _format_from_extension(path)
    if fmt == 'bin':
        write_binary(F, path)
    elif fmt == 'csv':
        write_csv(F, path)
    elif fmt == 'pgm':
        write_pgm(F, path)
    else:
        raise ValidationError(f"unknown output format '{fmt}'")
    logger.info(f"✅ Wrote {F.kind.name} grid ({F.grid.n_q}x{F.grid.n_p}) to {path} [{fmt}]")
    return fmt


def _format_from_extension(path: str) -> str:
    extension = os.path.splitext(path)[1].lower().lstrip('.')
    return extension if extension in ('csv', 'pgm') else 'bin'


def read_phase_space(path: str) -> PhaseSpaceFunction:
    """Read a PSQ1 or CSV grid file, detected from its first bytes"""
    with open(path, 'rb') as handle:
        head = handle.read(4)
    if head == MAGIC:
        return read_binary(path)
    if head.startswith(b'#'):
        return read_csv(path)
    raise FormatError(f"{path}: neither a PSQ1 nor a CSV grid file", offset=0)


# --- PGM -------------------------------------------------------------------

def part_of(values: np.ndarray, part: str = 'real') -> np.ndarray:
    """Real part, imaginary part or modulus of grid values"""
    if part == 'real':
        return np.real(values)
    if part == 'imag':
        return np.imag(values)
    if part == 'abs':
        return np.abs(values)
    raise ValidationError(f"unknown part '{part}' (expected real, imag or abs)")


def to_pixels(F: PhaseSpaceFunction, part: str = 'real') -> Tuple[np.ndarray, float, float]:
    """8-bit raster with q across and p increasing upwards, plus the mapped range"""
    values = part_of(F.values, part)
    low, high = float(values.min()), float(values.max())
    if high > low:
        scaled = np.round((values - low) / (high - low) * 255.0)
    else:
        scaled = np.zeros_like(values)
    return scaled.astype(np.uint8).T[::-1], low, high


def write_pgm(F: PhaseSpaceFunction, path: str, part: str = 'real') -> Tuple[float, float]:
    """P5 8-bit image with a `<path>.range` sidecar holding the linear map's min and max"""
    pixels, low, high = to_pixels(F, part)
    Image.fromarray(np.ascontiguousarray(pixels), mode='L').save(path, format='PPM')
    with open(f"{path}.range", 'w') as handle:
        handle.write(f"min={low:.17g} max={high:.17g}\n")
    return low, high


def read_pgm(path: str) -> np.ndarray:
    """Pixels of an 8-bit PGM, top row first"""
    with Image.open(path) as image:
        if image.mode != 'L':
            raise FormatError(f"{path}: expected an 8-bit grayscale image, got mode {image.mode}", offset=0)
        return np.array(image)


def read_range(path: str) -> Tuple[float, float]:
    """(min, max) from the `.range` sidecar of a rendered image"""
    with open(f"{path}.range") as handle:
        text = handle.read().split()
    try:
        fields = dict(item.split('=', 1) for item in text)
        return float(fields['min']), float(fields['max'])
    except (KeyError, ValueError):
        raise FormatError(f"{path}.range: expected 'min=<value> max=<value>'", line=1)


# --- state containers -------------------------------------------------------

def write_state(state: Union[WaveFunction, DensityMatrix], frame: OscillatorFrame, path: str) -> None:
    """Store a wavefunction or density matrix with its grid and frame in an .npz container"""
    grid = state.grid
    kind = 'wavefunction' if isinstance(state, WaveFunction) else 'density'
    with open(path, 'wb') as handle:
        np.savez(handle, values=state.values, kind=np.array(kind),
                 grid=np.array([grid.q_min, grid.q_max, grid.n_q, grid.hbar]),
                 frame=np.array([frame.mass, frame.omega, frame.hbar]))
    logger.info(f"✅ Wrote {kind} on {grid.n_q} points to {path}")


def read_state(path: str) -> Tuple[Union[WaveFunction, DensityMatrix], OscillatorFrame]:
    """Load a state container written by write_state"""
    try:
        with np.load(path, allow_pickle=False) as data:
            values = data['values']
            kind = str(data['kind'])
            q_min, q_max, n_q, hbar = data['grid']
            mass, omega, frame_hbar = data['frame']
    except (KeyError, ValueError, OSError, zipfile.BadZipFile) as e:
        raise FormatError(f"{path}: not a state container ({e})", offset=0)
    grid = make_grid(q_min, q_max, int(n_q), hbar)
    frame = OscillatorFrame(float(mass), float(omega), float(frame_hbar))
    if kind == 'wavefunction':
        return WaveFunction(grid, values), frame
    if kind == 'density':
        return DensityMatrix(grid, values), frame
    raise FormatError(f"{path}: unknown state kind '{kind}'", offset=0)


def is_state_file(path: str) -> bool:
    """True for .npz (zip) containers"""
    with open(path, 'rb') as handle:
        return handle.read(2) == b'PK'
