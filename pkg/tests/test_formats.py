import numpy as np
import pytest

from phasespace.errors import FormatError, ValidationError
from phasespace.formats import (is_state_file, part_of, read_binary, read_csv, read_histogram, read_pgm,
                                read_phase_space, read_range, read_state, to_pixels, write_binary, write_csv,
                                write_histogram, write_pgm, write_phase_space, write_state)
from phasespace.numerics import Kind, PhaseSpaceFunction
from phasespace.states import Coherent, Fock, OscillatorFrame, ThermalMixture, build_density, build_wavefunction
from phasespace.tomography import QuadratureHistogram, default_angles
from phasespace.wigner import kirkwood, wigner_from_wavefunction


@pytest.fixture
def wigner(small_grid, frame):
    return wigner_from_wavefunction(build_wavefunction(Coherent(0.5 + 0.5j), frame, small_grid))


@pytest.fixture
def histogram(small_grid):
    x = small_grid.q
    angles = default_angles(4)
    values = np.exp(-(x[None, :] - np.cos(angles)[:, None]) ** 2) / np.sqrt(np.pi)
    return QuadratureHistogram(angles, x, values)


# --- binary ----------------------------------------------------------------

def test_binary_round_trip(tmp_path, wigner):
    path = str(tmp_path / 'w.bin')
    write_binary(wigner, path)
    loaded = read_binary(path)
    assert loaded.grid == wigner.grid
    assert loaded.kind == Kind.WIGNER
    assert np.array_equal(loaded.values, wigner.values)


def test_binary_keeps_complex_values(tmp_path, wigner):
    K = kirkwood(wigner, -1.0)
    path = str(tmp_path / 'k.bin')
    write_binary(K, path)
    loaded = read_binary(path)
    assert loaded.is_complex and loaded.kind == Kind.KIRKWOOD and loaded.parameter == -1.0
    assert np.array_equal(loaded.values, K.values)


def test_binary_bad_magic(tmp_path, wigner):
    path = tmp_path / 'w.bin'
    write_binary(wigner, str(path))
    data = bytearray(path.read_bytes())
    data[:4] = b'XXXX'
    path.write_bytes(bytes(data))
    with pytest.raises(FormatError) as excinfo:
        read_binary(str(path))
    assert excinfo.value.offset == 0


def test_binary_truncated_body(tmp_path, wigner):
    path = tmp_path / 'w.bin'
    write_binary(wigner, str(path))
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(FormatError) as excinfo:
        read_binary(str(path))
    assert excinfo.value.offset is not None


def test_binary_truncated_header(tmp_path):
    path = tmp_path / 'short.bin'
    path.write_bytes(b'PSQ1\x00')
    with pytest.raises(FormatError) as excinfo:
        read_binary(str(path))
    assert excinfo.value.offset == 5


# --- CSV -------------------------------------------------------------------

def test_csv_round_trip(tmp_path, wigner):
    path = str(tmp_path / 'w.csv')
    write_csv(wigner, path)
    loaded = read_csv(path)
    assert loaded.grid == wigner.grid
    assert np.array_equal(loaded.values, wigner.values)


def test_csv_complex_round_trip(tmp_path, wigner):
    K = kirkwood(wigner, 1.0)
    path = str(tmp_path / 'k.csv')
    write_csv(K, path)
    assert np.array_equal(read_csv(path).values, K.values)


def test_csv_bad_cell_reports_line(tmp_path, wigner):
    path = tmp_path / 'w.csv'
    write_csv(wigner, str(path))
    lines = path.read_text().splitlines()
    # eight header lines, the momentum row, then data rows
    cells = lines[12].split(',')
    cells[5] = 'oops'
    lines[12] = ','.join(cells)
    path.write_text('\n'.join(lines) + '\n')
    with pytest.raises(FormatError) as excinfo:
        read_csv(str(path))
    assert excinfo.value.line == 13


def test_csv_bad_header(tmp_path):
    path = tmp_path / 'w.csv'
    path.write_text('# format psq-grid\n1,2\n')
    with pytest.raises(FormatError) as excinfo:
        read_csv(str(path))
    assert excinfo.value.line == 1


def test_csv_missing_rows(tmp_path, wigner):
    path = tmp_path / 'w.csv'
    write_csv(wigner, str(path))
    lines = path.read_text().splitlines()
    path.write_text('\n'.join(lines[:-3]) + '\n')
    with pytest.raises(FormatError):
        read_csv(str(path))


# --- dispatch --------------------------------------------------------------

@pytest.mark.parametrize('name, fmt', [('w.bin', 'bin'), ('w.psq', 'bin'), ('w.csv', 'csv')])
def test_dispatch_by_extension_and_content(tmp_path, wigner, name, fmt):
    path = str(tmp_path / name)
    assert write_phase_space(wigner, path) == fmt
    assert np.array_equal(read_phase_space(path).values, wigner.values)


def test_dispatch_rejects_unknown(tmp_path, wigner):
    with pytest.raises(ValidationError):
        write_phase_space(wigner, str(tmp_path / 'w.out'), 'hdf5')
    path = tmp_path / 'junk.dat'
    path.write_bytes(b'\x00\x01\x02\x03\x04')
    with pytest.raises(FormatError):
        read_phase_space(str(path))


# --- PGM -------------------------------------------------------------------

def test_pgm_with_range_sidecar(tmp_path, wigner):
    path = str(tmp_path / 'w.pgm')
    low, high = write_pgm(wigner, path)
    pixels = read_pgm(path)
    assert pixels.shape == (wigner.grid.n_p, wigner.grid.n_q)
    assert pixels.dtype == np.uint8
    assert pixels.min() == 0 and pixels.max() == 255
    assert read_range(path) == (low, high)
    assert (low, high) == (wigner.values.min(), wigner.values.max())


def test_pixels_put_high_momentum_on_top(small_grid):
    q, p = small_grid.mesh()
    pixels, _, _ = to_pixels(PhaseSpaceFunction(small_grid, p))
    assert np.all(pixels[0] == 255)
    assert np.all(pixels[-1] == 0)


def test_flat_field_renders_black(small_grid):
    pixels, low, high = to_pixels(PhaseSpaceFunction(small_grid, np.full((128, 128), 0.25)))
    assert low == high == 0.25
    assert not pixels.any()


def test_parts_of_complex_values():
    values = np.array([3 + 4j])
    assert part_of(values, 'imag')[0] == 4.0
    assert part_of(values, 'abs')[0] == 5.0
    with pytest.raises(ValidationError):
        part_of(values, 'phase')


def test_broken_range_sidecar(tmp_path, wigner):
    path = str(tmp_path / 'w.pgm')
    write_pgm(wigner, path)
    (tmp_path / 'w.pgm.range').write_text('lo=0 hi=1\n')
    with pytest.raises(FormatError):
        read_range(path)


# --- histograms and states -------------------------------------------------

def test_histogram_round_trip(tmp_path, histogram):
    path = tmp_path / 'h.csv'
    write_histogram(histogram, str(path))
    assert path.read_text().splitlines()[0].startswith('# angles=4 x_min=-7 x_max=')
    loaded = read_histogram(str(path))
    assert np.array_equal(loaded.angles, histogram.angles)
    assert np.allclose(loaded.x, histogram.x, rtol=0, atol=1e-12)
    assert np.array_equal(loaded.values, histogram.values)


def test_histogram_written_by_hand(tmp_path):
    path = tmp_path / 'h.csv'
    path.write_text('# angles=2 x_min=-4 x_max=4 n_x=5\n'
                    '0,0,0.1,0.2,0.1,0\n'
                    '1.5707963267948966,0.05,0.1,0.1,0.1,0.05\n')
    hist = read_histogram(str(path))
    assert np.array_equal(hist.x, [-4.0, -2.0, 0.0, 2.0, 4.0])
    assert hist.angles[1] == pytest.approx(np.pi / 2)
    assert hist.values[0, 2] == 0.2


@pytest.mark.parametrize('text, line', [
    ('# format=psq-histogram\n0,1,2\n', 1),
    ('0,1,2\n', 1),
    ('# angles=1 x_min=1 x_max=-1 n_x=2\n0,1,2\n', 1),
    ('# angles=1 x_min=-1 x_max=1 n_x=2\n0,1\n', 2),
    ('# angles=1 x_min=-1 x_max=1 n_x=2\n0,1,x\n', 2),
])
def test_malformed_histograms(tmp_path, text, line):
    path = tmp_path / 'h.csv'
    path.write_text(text)
    with pytest.raises(FormatError) as excinfo:
        read_histogram(str(path))
    assert excinfo.value.line == line


def test_histogram_angle_count_checked(tmp_path, histogram):
    path = tmp_path / 'h.csv'
    write_histogram(histogram, str(path))
    lines = path.read_text().splitlines()
    path.write_text('\n'.join(lines[:-1]) + '\n')
    with pytest.raises(FormatError) as excinfo:
        read_histogram(str(path))
    assert excinfo.value.line is not None


def test_histogram_is_not_a_grid(tmp_path, histogram):
    path = str(tmp_path / 'h.csv')
    write_histogram(histogram, path)
    with pytest.raises(FormatError):
        read_csv(path)


def test_state_containers(tmp_path, small_grid, frame):
    psi = build_wavefunction(Fock(2), frame, small_grid)
    path = str(tmp_path / 'psi.npz')
    write_state(psi, frame, path)
    assert is_state_file(path)
    loaded, loaded_frame = read_state(path)
    assert loaded.grid == small_grid and loaded_frame == frame
    assert np.array_equal(loaded.values, psi.values)

    rho = build_density(ThermalMixture(0.5), OscillatorFrame(), small_grid)
    write_state(rho, frame, path)
    loaded, _ = read_state(path)
    assert np.array_equal(loaded.values, rho.values)


def test_foreign_state_file(tmp_path, wigner):
    path = str(tmp_path / 'w.bin')
    write_binary(wigner, path)
    assert not is_state_file(path)
    with pytest.raises(FormatError):
        read_state(path)
