#!/usr/bin/env python3
"""
Command-line surface of the phase-space toolkit
state, wigner, evolve, project, reconstruct, measure, analyze, render and noise
"""

import logging
import math
import os
from typing import List, Optional, Tuple, Union

import click
import numpy as np

from config import Config
from phasespace.dynamics import EvolutionConfig, HamiltonianSpec, PolynomialPotential, moyal_evolve, wdf_moments
from phasespace.errors import (EXIT_OK, EXIT_USAGE, NumericalToleranceError, PhaseSpaceError,
                               ValidationError, exit_code_for)
from phasespace.formats import (is_state_file, read_histogram, read_phase_space, read_state,
                                write_histogram, write_pgm, write_phase_space, write_state)
from phasespace.interference import mandel_q, photon_statistics_exact
from phasespace.numerics import Kind, PhaseSpaceFunction, integrate_2d, sample_at
from phasespace.run_config import RunConfig, load_run_config
from phasespace.states import (DensityMatrix, OscillatorFrame, WaveFunction, build_density,
                               build_wavefunction, is_pure, purity)
from phasespace.tomography import (BeamSplitter, DetectorModel, angular_artifact_level, default_angles,
                                   eight_port_measure, inverse_radon, lossy_detection, radon_project,
                                   resample_histogram, ring_method_on_grid)
from phasespace.utils import parse_state_spec, validate_output_format
from phasespace.wigner import (critical_s, density_from_wigner, husimi, kirkwood, negativity_volume,
                               s_parameterized, stationary_residuals, uncertainty, weyl_function,
                               wigner_from_density, wigner_from_wavefunction)

logger = logging.getLogger(__name__)

State = Union[WaveFunction, DensityMatrix]


def _output_path(run_config: RunConfig, path: str) -> str:
    if os.path.isabs(path) or run_config.output_dir in ('', '.'):
        return path
    os.makedirs(run_config.output_dir, exist_ok=True)
    return os.path.join(run_config.output_dir, path)


def _grid_format(run_config: RunConfig, path: str) -> str:
    extension = os.path.splitext(path)[1].lower().lstrip('.')
    if extension in ('csv', 'pgm'):
        return extension
    if extension in ('bin', 'psq'):
        return 'bin'
    return run_config.format


def load_state(source: str, run_config: RunConfig) -> Tuple[State, OscillatorFrame]:
    """A state from a .npz container, or built from a specification string on the run grid"""
    if os.path.exists(source):
        if not is_state_file(source):
            raise ValidationError(f"{source} is not a state file")
        return read_state(source)
    spec = parse_state_spec(source)
    frame, grid = run_config.frame(), run_config.grid()
    if is_pure(spec):
        return build_wavefunction(spec, frame, grid), frame
    return build_density(spec, frame, grid), frame


def load_source(source: str, run_config: RunConfig) -> Tuple[PhaseSpaceFunction, Optional[State], OscillatorFrame]:
    """(W, state or None, frame) from a grid file, a state file or a specification string"""
    if os.path.exists(source) and not is_state_file(source):
        W = read_phase_space(source)
        frame = run_config.frame()
        if not math.isclose(frame.hbar, W.grid.hbar, rel_tol=1e-12):
            frame = OscillatorFrame(run_config.mass, run_config.omega, W.grid.hbar)
        return W, None, frame
    state, frame = load_state(source, run_config)
    return wigner_of(state), state, frame


def wigner_of(state: State) -> PhaseSpaceFunction:
    if isinstance(state, WaveFunction):
        return wigner_from_wavefunction(state)
    return wigner_from_density(state)


def build_root(config_class=Config) -> click.Group:
    """The command group; global flags layer over Config and the optional config file"""

    @click.group(name='phasespace')
    @click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False),
                  help='Plain-text key = value configuration file')
    @click.option('--q-min', type=float)
    @click.option('--q-max', type=float)
    @click.option('--n-q', type=int)
    @click.option('--hbar', type=float)
    @click.option('--lambda-bar', type=float, help='Normalized wavelength; alias of --hbar')
    @click.option('--mass', type=float)
    @click.option('--omega', type=float)
    @click.option('--format', 'format', type=str, help='Grid output format: bin, csv or pgm')
    @click.option('--output-dir', type=str)
    @click.option('--seed', type=int)
    @click.option('--log-level', type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR'], case_sensitive=False))
    @click.pass_context
    def root(ctx, config_path, **overrides):
        if overrides.get('format') is not None:
            is_valid, message = validate_output_format(overrides['format'], config_class.OUTPUT_FORMATS)
            if not is_valid:
                raise click.BadParameter(message, param_hint='--format')
        run_config = load_run_config(config_path, overrides)
        logging.basicConfig(level=getattr(logging, run_config.log_level.upper(), logging.INFO),
                            format='%(levelname)s %(name)s: %(message)s')
        run_config.apply_tolerances()
        ctx.obj = run_config

    return root


@click.command(name='state')
@click.argument('spec')
@click.option('-o', '--output', required=True, help='Destination .npz state file')
@click.pass_obj
def cmd_state(run_config: RunConfig, spec: str, output: str):
    """Build a wavefunction or density matrix from a state specification"""
    state, frame = load_state(spec, run_config)
    write_state(state, frame, _output_path(run_config, output))


@click.command(name='wigner')
@click.argument('source')
@click.option('-o', '--output', required=True)
@click.option('--s', 's_value', type=float, help='s-parameterized ordering (s <= 0)')
@click.option('--zeta', type=float, help='Husimi width parameter')
@click.option('--b', 'b_value', type=float, help='Kirkwood ordering parameter')
@click.option('--weyl', is_flag=True, help='Weyl (ambiguity) function')
@click.pass_obj
def cmd_wigner(run_config: RunConfig, source: str, output: str, s_value: Optional[float],
               zeta: Optional[float], b_value: Optional[float], weyl: bool):
    """Wigner function of a state, or one of its relatives"""
    selected = [flag for flag, value in (('--s', s_value), ('--zeta', zeta), ('--b', b_value))
                if value is not None] + (['--weyl'] if weyl else [])
    if len(selected) > 1:
        raise click.UsageError(f"choose at most one of {', '.join(selected)}")
    W, _, frame = load_source(source, run_config)
    if s_value is not None:
        W = s_parameterized(W, s_value, frame)
    elif zeta is not None:
        W = husimi(W, zeta, frame)
    elif b_value is not None:
        W = kirkwood(W, b_value)
    elif weyl:
        W = weyl_function(W)
    path = _output_path(run_config, output)
    write_phase_space(W, path, _grid_format(run_config, path))


@click.command(name='evolve')
@click.argument('source')
@click.option('-o', '--output', required=True)
@click.option('--potential', required=True, help="Polynomial coefficients 'c0,c1,...'")
@click.option('--t', 't_final', type=float, required=True)
@click.option('--dt', type=float, required=True)
@click.option('--classical', is_flag=True, help='Drop the quantum correction terms')
@click.pass_obj
def cmd_evolve(run_config: RunConfig, source: str, output: str, potential: str, t_final: float,
               dt: float, classical: bool):
    """Propagate a Wigner function with the Moyal equation"""
    W, _, frame = load_source(source, run_config)
    hamiltonian = HamiltonianSpec(frame.mass, PolynomialPotential.parse(potential))
    steps = int(round(t_final / dt))
    if steps < 0 or not math.isclose(steps * dt, t_final, rel_tol=1e-9, abs_tol=1e-12):
        raise ValidationError(f"t = {t_final} is not a nonnegative multiple of dt = {dt}")
    W = moyal_evolve(W, hamiltonian, EvolutionConfig(dt, steps, quantum_terms=not classical))
    path = _output_path(run_config, output)
    write_phase_space(W, path, _grid_format(run_config, path))


@click.command(name='project')
@click.argument('source')
@click.option('-o', '--output', required=True, help='Destination histogram CSV')
@click.option('--angles', type=int, default=None, help='Number of angles over [0, π)')
@click.pass_obj
def cmd_project(run_config: RunConfig, source: str, output: str, angles: Optional[int]):
    """Quadrature histograms (Radon projections) of a Wigner function"""
    W, _, _ = load_source(source, run_config)
    angles = default_angles(angles)
    hist = radon_project(W, angles)
    if angles.size < Config.MIN_TOMOGRAPHY_ANGLES:
        logger.warning(f"⚠️ {angles.size} angles are fewer than {Config.MIN_TOMOGRAPHY_ANGLES}; a reconstruction "
                       f"will carry streaks near {angular_artifact_level(hist):.1e} of the peak")
    path = _output_path(run_config, output)
    write_histogram(hist, path)
    logger.info(f"✅ Wrote {angles.size} quadrature slices to {path}")


@click.command(name='reconstruct')
@click.argument('histogram')
@click.option('-o', '--output', required=True)
@click.option('--cutoff', type=float, default=None, help='Hann cutoff as a fraction of Nyquist')
@click.pass_obj
def cmd_reconstruct(run_config: RunConfig, histogram: str, output: str, cutoff: Optional[float]):
    """Filtered back-projection of a quadrature histogram onto the run grid"""
    W = inverse_radon(read_histogram(histogram), run_config.grid(), cutoff)
    path = _output_path(run_config, output)
    write_phase_space(W, path, _grid_format(run_config, path))


@click.command(name='measure')
@click.argument('source')
@click.option('-o', '--output', required=True)
@click.option('--eta', type=float, help='Detector efficiency')
@click.option('--T', 'transmission', type=float, help='Eight-port beam-splitter transmission')
@click.option('--ring', is_flag=True, help='Photon-counting reconstruction')
@click.option('--ring-points', type=int, default=None)
@click.option('--cutoff', type=int, default=None, help='Photon-number cutoff for --ring')
@click.option('--no-rescale', is_flag=True, help='Report the smoothed function without the η rescaling')
@click.pass_obj
def cmd_measure(run_config: RunConfig, source: str, output: str, eta: Optional[float],
                transmission: Optional[float], ring: bool, ring_points: Optional[int],
                cutoff: Optional[int], no_rescale: bool):
    """Simulated detection: lossy homodyne (--eta), eight-port (--T) or ring method (--ring)"""
    W, state, frame = load_source(source, run_config)
    efficiency = 1.0 if eta is None else eta
    if ring:
        if state is None:
            state = density_from_wigner(W)
        points = Config.RING_POINTS if ring_points is None else ring_points
        T = 1.0 if transmission is None else transmission
        result = ring_method_on_grid(state, points, cutoff, efficiency, T, frame)
    elif transmission is not None:
        result = eight_port_measure(W, BeamSplitter(transmission), efficiency, frame)
    elif eta is not None:
        result = lossy_detection(W, DetectorModel(eta), rescale=not no_rescale, frame=frame)
    else:
        raise click.UsageError("choose one of --eta, --T or --ring")
    path = _output_path(run_config, output)
    write_phase_space(result, path, _grid_format(run_config, path))


def _attempt(label: str, compute):
    try:
        return compute()
    except (NumericalToleranceError, ValidationError) as e:
        logger.warning(f"⚠️ {label} unavailable: {e}")
        return f"unavailable ({e})"


def analysis_report(W: PhaseSpaceFunction, state: Optional[State], frame: OscillatorFrame,
                    cutoff: int = 64, potential: Optional[PolynomialPotential] = None,
                    energy: Optional[float] = None) -> List[Tuple[str, object]]:
    """Ordered (label, value) pairs describing a phase-space function"""
    grid = W.grid
    real = W if not W.is_complex else W.with_values(np.real(W.values))
    rows = [('kind', W.kind.name), ('normalization', float(np.real(integrate_2d(W)))),
            ('W(0,0)', float(np.real(sample_at(W, np.array(0.0), np.array(0.0)))))]
    if state is None:
        rows.append(('purity', 2.0 * np.pi * grid.hbar * float(integrate_2d(real.with_values(real.values ** 2)))))
    elif isinstance(state, WaveFunction):
        rows.append(('purity', 1.0))
    else:
        rows.append(('purity', purity(state)))
    if W.kind == Kind.WIGNER:
        spread = _attempt('uncertainty', lambda: uncertainty(W))
        if isinstance(spread, tuple):
            rows += [('delta_q', spread[0]), ('delta_p', spread[1]), ('delta_q*delta_p', spread[2])]
        else:
            rows.append(('uncertainty', spread))
    rows.append(('negativity_volume', _attempt('negativity volume', lambda: negativity_volume(real))))
    if state is not None:
        rows.append(('mandel_q', _attempt('Mandel Q', lambda: mandel_q(photon_statistics_exact(state, frame, cutoff)))))
        s_c = _attempt('critical s', lambda: critical_s(state, frame=frame))
        rows.append(('s_c', s_c['s_c'] if isinstance(s_c, dict) and s_c['s_c'] is not None
                     else (s_c['status'] if isinstance(s_c, dict) else s_c)))
    for k, value in enumerate(wdf_moments(real), start=1):
        rows.append((f"I_{k}", value))
    if potential is not None and energy is not None:
        first, second = stationary_residuals(real, potential, energy, frame.mass)
        rows += [('residual_1', first), ('residual_2', second)]
    return rows


@click.command(name='analyze')
@click.argument('source')
@click.option('--report', type=str, default=None, help='Also write the report to this file')
@click.option('--cutoff', type=int, default=64, help='Fock cutoff for photon statistics')
@click.option('--potential', type=str, default=None, help="Potential 'c0,c1,...' for stationary residuals")
@click.option('--energy', type=float, default=None)
@click.pass_obj
def cmd_analyze(run_config: RunConfig, source: str, report: Optional[str], cutoff: int,
                potential: Optional[str], energy: Optional[float]):
    """Text report: normalization, purity, spreads, negativity, Mandel Q, s_c, I_k, residuals"""
    W, state, frame = load_source(source, run_config)
    V = PolynomialPotential.parse(potential) if potential else None
    lines = []
    for label, value in analysis_report(W, state, frame, cutoff, V, energy):
        text = f"{value:.10g}" if isinstance(value, float) else str(value)
        lines.append(f"{label}: {text}")
    click.echo('\n'.join(lines))
    if report:
        with open(_output_path(run_config, report), 'w') as handle:
            handle.write('\n'.join(lines) + '\n')


@click.command(name='render')
@click.argument('source')
@click.option('-o', '--output', required=True, help='Destination .pgm image')
@click.option('--part', type=click.Choice(['real', 'imag', 'abs']), default='real')
@click.pass_obj
def cmd_render(run_config: RunConfig, source: str, output: str, part: str):
    """8-bit grayscale image of a grid file, with a .range sidecar"""
    W, _, _ = load_source(source, run_config)
    path = _output_path(run_config, output)
    low, high = write_pgm(W, path, part)
    logger.info(f"✅ Rendered {W.kind.name} to {path} (range {low:.4g} .. {high:.4g})")


@click.command(name='noise')
@click.argument('histogram')
@click.option('-o', '--output', required=True)
@click.option('--counts', type=int, required=True, help='Samples drawn per angle')
@click.pass_obj
def cmd_noise(run_config: RunConfig, histogram: str, output: str, counts: int):
    """Replace each quadrature slice by a finite-count multinomial sample"""
    noisy = resample_histogram(read_histogram(histogram), counts, run_config.seed)
    write_histogram(noisy, _output_path(run_config, output))


COMMANDS = [cmd_state, cmd_wigner, cmd_evolve, cmd_project, cmd_reconstruct, cmd_measure,
            cmd_analyze, cmd_render, cmd_noise]


def main(argv: Optional[List[str]] = None) -> int:
    """Run the command line and map the outcome onto an exit code"""
    from phasespace import create_cli

    cli = create_cli()
    try:
        result = cli.main(args=argv, prog_name='phasespace', standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except click.Abort:
        return EXIT_USAGE
    except (PhaseSpaceError, OSError) as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        click.echo(f"Error: {e}", err=True)
        return exit_code_for(e)
    return result if isinstance(result, int) else EXIT_OK
