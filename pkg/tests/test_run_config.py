import pytest

from config import Config
from phasespace.dynamics import moyal_propagator
from phasespace.errors import ConfigError, GridError, ValidationError
from phasespace.run_config import RunConfig, load_run_config, parse_config_text
from phasespace.states import state_builder
from phasespace.wigner import wigner_transformer


def test_defaults_come_from_config():
    run_config = RunConfig()
    assert (run_config.q_min, run_config.q_max, run_config.n_q) == (Config.Q_MIN, Config.Q_MAX, Config.N_Q)
    assert run_config.grid().n_q == Config.N_Q
    assert run_config.frame().hbar == Config.HBAR


def test_parse_config_text():
    text = """
    # desk grid
    q_min = -6
    q_max = 6   # trailing comment
    n_q = 256
    lambda_bar = 0.5
    format = csv
    """
    assert parse_config_text(text) == {'q_min': -6.0, 'q_max': 6.0, 'n_q': 256, 'hbar': 0.5, 'format': 'csv'}


@pytest.mark.parametrize('text, line', [
    ('q_min = -6\nwidth = 3\n', 2),
    ('q_min = -6\n\nn_q = many\n', 3),
    ('n_q 128\n', 1),
])
def test_config_errors_carry_line(text, line):
    with pytest.raises(ConfigError) as excinfo:
        parse_config_text(text)
    assert excinfo.value.line == line
    assert f"line {line}" in str(excinfo.value)


def test_layering(tmp_path):
    path = tmp_path / 'run.conf'
    path.write_text('n_q = 256\nq_max = 6\nseed = 7\n')
    run_config = load_run_config(str(path), {'q_max': 10.0, 'q_min': None, 'lambda_bar': 0.25})
    assert run_config.n_q == 256
    assert run_config.q_max == 10.0
    assert run_config.q_min == Config.Q_MIN
    assert run_config.hbar == 0.25
    assert run_config.seed == 7


def test_invalid_file_grid(tmp_path):
    path = tmp_path / 'run.conf'
    path.write_text('n_q = 100\n')
    with pytest.raises(ConfigError):
        load_run_config(str(path))


def test_invalid_overrides():
    with pytest.raises(ValidationError):
        RunConfig().with_overrides({'colour': 'red'})
    with pytest.raises(GridError):
        RunConfig().with_overrides({'q_min': 9.0})
    with pytest.raises(ValidationError):
        RunConfig(format='tiff')
    with pytest.raises(ValidationError):
        RunConfig(edge_tolerance=0.0)


def test_tolerances_reach_services(monkeypatch):
    for attribute in ('EDGE_TOLERANCE', 'REALNESS_TOLERANCE', 'TAIL_TOLERANCE', 'STATS_TAIL_TOLERANCE',
                      'NEGATIVITY_TOLERANCE', 'NORM_DRIFT_TOLERANCE'):
        monkeypatch.setattr(Config, attribute, getattr(Config, attribute))
    monkeypatch.setattr(state_builder, 'edge_tolerance', state_builder.edge_tolerance)
    monkeypatch.setattr(state_builder, 'tail_tolerance', state_builder.tail_tolerance)
    monkeypatch.setattr(wigner_transformer, 'realness_tolerance', wigner_transformer.realness_tolerance)
    monkeypatch.setattr(moyal_propagator, 'drift_tolerance', moyal_propagator.drift_tolerance)
    monkeypatch.setattr(moyal_propagator, 'support_tolerance', moyal_propagator.support_tolerance)

    RunConfig(edge_tolerance=1e-6, stats_tail_tolerance=1e-4, norm_drift_tolerance=1e-5).apply_tolerances()
    assert Config.EDGE_TOLERANCE == 1e-6
    assert Config.STATS_TAIL_TOLERANCE == 1e-4
    assert state_builder.edge_tolerance == 1e-6
    assert moyal_propagator.drift_tolerance == 1e-5
    assert moyal_propagator.support_tolerance == 1e-6


def test_conflicting_hbar_aliases():
    assert RunConfig().with_overrides({'hbar': 0.5, 'lambda_bar': 0.5}).hbar == 0.5
    with pytest.raises(ValidationError):
        RunConfig().with_overrides({'hbar': 1.0, 'lambda_bar': 0.5})
    with pytest.raises(ConfigError) as excinfo:
        parse_config_text('hbar = 1\nlambda_bar = 0.5\n')
    assert excinfo.value.line == 2
