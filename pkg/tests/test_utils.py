import math

import pytest
from hypothesis import given, strategies as st

from phasespace.errors import ValidationError
from phasespace.states import (Cat, Coherent, Fock, Mixture, Squeezed, Superposition, ThermalMixture,
                               TwoGaussian)
from phasespace.utils import format_state_spec, parse_state_spec, validate_output_format, validate_state_text


@pytest.mark.parametrize('text, expected', [
    ('fock:n=3', Fock(3)),
    ('coherent:re=1,im=0.5', Coherent(1 + 0.5j)),
    ('coherent:re=-2', Coherent(-2 + 0j)),
    ('squeezed:re=1,im=0,s=3', Squeezed(1 + 0j, 3.0)),
    ('squeezed:s=0.5', Squeezed(0j, 0.5)),
    ('cat:alpha=2,theta=1.5708', Cat(2 + 0j, 1.5708)),
    ('twogauss:d=2', TwoGaussian(2.0, 0.0)),
    ('thermal:nbar=1,N=60', ThermalMixture(1.0, 60)),
    (' Fock : n = 1 ', Fock(1)),
])
def test_parse_single_states(text, expected):
    assert parse_state_spec(text) == expected


def test_parse_superposition_and_mixture():
    sup = parse_state_spec('sup:(1)fock:n=0+(0.5+0.5j)coherent:re=1,im=0')
    assert sup == Superposition(((1 + 0j, Fock(0)), (0.5 + 0.5j, Coherent(1 + 0j))))
    mix = parse_state_spec('mix:(3)fock:n=0+(1)thermal:nbar=0.5')
    assert mix == Mixture(((3.0, Fock(0)), (1.0, ThermalMixture(0.5))))


@pytest.mark.parametrize('text', [
    '',
    'fock',
    'fock:m=1',
    'fock:n=1.5',
    'fock:',
    'coherent:re=x',
    'laser:power=1',
    'sup:(1)fock:n=0+(1)sup:(1)fock:n=1',
    'sup:(1fock:n=0',
    'sup:fock:n=0',
    'mix:(a)fock:n=0',
    'cat:alpha=2',
])
def test_parse_errors(text):
    with pytest.raises(ValidationError):
        parse_state_spec(text)


@pytest.mark.parametrize('spec', [
    Fock(4),
    Coherent(0.25 - 1.5j),
    Squeezed(1.5 + 0j, 2.0),
    Cat(1.5 + 0j, math.pi / 3),
    TwoGaussian(2.5, 0.1),
    ThermalMixture(0.7),
    ThermalMixture(0.7, 90),
    Superposition(((1 + 0j, Fock(0)), (-0.5j, Fock(3)))),
    Mixture(((0.25, Fock(1)), (0.75, Coherent(1j)))),
])
def test_format_round_trip(spec):
    assert parse_state_spec(format_state_spec(spec)) == spec


@given(re=st.floats(-5, 5), im=st.floats(-5, 5))
def test_coherent_round_trip(re, im):
    spec = Coherent(complex(re, im))
    assert parse_state_spec(format_state_spec(spec)) == spec


def test_validate_state_text():
    assert validate_state_text('  fock: n=2 ') == (True, 'fock:n=2')
    assert not validate_state_text('   ')[0]


def test_validate_output_format():
    assert validate_output_format('csv', ['bin', 'csv']) == (True, 'csv')
    is_valid, message = validate_output_format('tiff', ['bin', 'csv'])
    assert not is_valid and 'tiff' in message
