#!/usr/bin/env python3
"""
Input validation and state-specification parsing for the command layer
"""

import logging
from typing import Dict, List, Tuple

from phasespace.errors import ValidationError
from phasespace.states import (Cat, Coherent, Fock, Mixture, Squeezed, StateSpec, Superposition,
                               ThermalMixture, TwoGaussian)

logger = logging.getLogger(__name__)

# name -> (required keys, optional keys with defaults)
STATE_KEYS = {
    'fock': (('n',), {}),
    'coherent': (('re',), {'im': '0'}),
    'squeezed': (('s',), {'re': '0', 'im': '0'}),
    'cat': (('alpha', 'theta'), {}),
    'twogauss': (('d',), {'phi': '0'}),
    'thermal': (('nbar',), {'N': None}),
}


def validate_state_text(text: str) -> Tuple[bool, str]:
    """Validate and clean a state specification string"""
    if not text or not text.strip():
        return False, "Please give a state specification such as 'fock:n=1'"
    cleaned = ''.join(text.split())
    if ':' not in cleaned:
        return False, f"State specification '{cleaned}' needs the form name:key=value,..."
    return True, cleaned


def _parameters(name: str, body: str) -> Dict[str, str]:
    required, optional = STATE_KEYS[name]
    values = dict(optional)
    for item in filter(None, body.split(',')):
        if '=' not in item:
            raise ValidationError(f"{name}: expected key=value, got '{item}'")
        key, value = item.split('=', 1)
        if key not in required and key not in optional:
            raise ValidationError(f"{name}: unknown parameter '{key}'")
        values[key] = value
    missing = [key for key in required if key not in values]
    if missing:
        raise ValidationError(f"{name}: missing parameter(s) {', '.join(missing)}")
    return values


def _number(name: str, key: str, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ValidationError(f"{name}: parameter {key}='{value}' is not a number")


def _integer(name: str, key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ValidationError(f"{name}: parameter {key}='{value}' is not an integer")


def _matching_paren(text: str) -> int:
    depth = 0
    for index, char in enumerate(text):
        depth += char == '('
        depth -= char == ')'
        if depth == 0:
            return index
    raise ValidationError(f"unbalanced parentheses in '{text}'")


def _split_terms(body: str) -> List[Tuple[str, str]]:
    """'(c1)spec1+(c2)spec2' -> [('c1', 'spec1'), ('c2', 'spec2')], splitting on '+(' at depth 0"""
    terms, depth, start = [], 0, 0
    pieces = []
    for index, char in enumerate(body):
        if char == '(':
            depth += 1
        elif char == ')':
            depth -= 1
            if depth < 0:
                raise ValidationError(f"unbalanced parentheses in '{body}'")
        elif char == '+' and depth == 0 and body[index + 1:index + 2] == '(':
            pieces.append(body[start:index])
            start = index + 1
    if depth != 0:
        raise ValidationError(f"unbalanced parentheses in '{body}'")
    pieces.append(body[start:])
    for piece in pieces:
        if not piece.startswith('(') or ')' not in piece:
            raise ValidationError(f"term '{piece}' must read (coefficient)spec")
        close = _matching_paren(piece)
        terms.append((piece[1:close], piece[close + 1:]))
    return terms


def parse_state_spec(text: str) -> StateSpec:
    """
    Parse the textual state syntax

    fock:n=3, coherent:re=1,im=0.5, squeezed:re=1,im=0,s=3,
    cat:alpha=2,theta=1.5708, twogauss:d=2,phi=0, thermal:nbar=1[,N=60],
    sup:(c1)spec1+(c2)spec2 and mix:(w1)spec1+(w2)spec2 (one level, no nesting)
    """
    is_valid, cleaned = validate_state_text(text)
    if not is_valid:
        raise ValidationError(cleaned)
    name, body = cleaned.split(':', 1)
    name = name.lower()
    if name in ('sup', 'mix'):
        terms = []
        for weight_text, inner in _split_terms(body):
            if inner.split(':', 1)[0].lower() in ('sup', 'mix'):
                raise ValidationError(f"nested '{inner}' inside {name} is not supported")
            try:
                weight = complex(weight_text) if name == 'sup' else float(weight_text)
            except ValueError:
                raise ValidationError(f"{name}: bad coefficient '{weight_text}'")
            terms.append((weight, parse_state_spec(inner)))
        return Superposition(tuple(terms)) if name == 'sup' else Mixture(tuple(terms))
    if name not in STATE_KEYS:
        raise ValidationError(f"unknown state '{name}' (expected {', '.join(list(STATE_KEYS) + ['sup', 'mix'])})")

    values = _parameters(name, body)
    if name == 'fock':
        return Fock(_integer(name, 'n', values['n']))
    if name == 'coherent':
        return Coherent(complex(_number(name, 're', values['re']), _number(name, 'im', values['im'])))
    if name == 'squeezed':
        alpha = complex(_number(name, 're', values['re']), _number(name, 'im', values['im']))
        return Squeezed(alpha, _number(name, 's', values['s']))
    if name == 'cat':
        return Cat(complex(_number(name, 'alpha', values['alpha'])), _number(name, 'theta', values['theta']))
    if name == 'twogauss':
        return TwoGaussian(_number(name, 'd', values['d']), _number(name, 'phi', values['phi']))
    cutoff = None if values['N'] is None else _integer(name, 'N', values['N'])
    return ThermalMixture(_number(name, 'nbar', values['nbar']), cutoff)


def format_state_spec(spec: StateSpec) -> str:
    """Inverse of parse_state_spec"""
    if isinstance(spec, Fock):
        return f"fock:n={spec.n}"
    if isinstance(spec, Coherent):
        alpha = complex(spec.alpha)
        return f"coherent:re={alpha.real!r},im={alpha.imag!r}"
    if isinstance(spec, Squeezed):
        alpha = complex(spec.alpha)
        return f"squeezed:re={alpha.real!r},im={alpha.imag!r},s={spec.s!r}"
    if isinstance(spec, Cat):
        return f"cat:alpha={complex(spec.alpha).real!r},theta={spec.theta!r}"
    if isinstance(spec, TwoGaussian):
        return f"twogauss:d={spec.d!r},phi={spec.phi!r}"
    if isinstance(spec, ThermalMixture):
        suffix = '' if spec.cutoff is None else f",N={spec.cutoff}"
        return f"thermal:nbar={spec.nbar!r}{suffix}"
    name = 'sup' if isinstance(spec, Superposition) else 'mix'
    return f"{name}:" + '+'.join(f"({_weight_text(weight)}){format_state_spec(term)}" for weight, term in spec.terms)


def _weight_text(weight) -> str:
    if isinstance(weight, complex):
        return repr(weight).strip('()')
    return repr(float(weight))


def validate_output_format(fmt: str, allowed: List[str]) -> Tuple[bool, str]:
    if fmt not in allowed:
        return False, f"Unknown format '{fmt}' (expected one of {', '.join(allowed)})"
    return True, fmt
