#
# Copyright (c) 2015-2024 Thierry Florac <tflorac AT ulthar.net>
# All Rights Reserved.
#
# This software is subject to the provisions of the Zope Public License,
# Version 2.1 (ZPL).  A copy of the ZPL should accompany this distribution.
# THIS SOFTWARE IS PROVIDED "AS IS" AND ANY AND ALL EXPRESS OR IMPLIED
# WARRANTIES ARE DISCLAIMED, INCLUDING, BUT NOT LIMITED TO, THE IMPLIED
# WARRANTIES OF TITLE, MERCHANTABILITY, AGAINST INFRINGEMENT, AND FITNESS
# FOR A PARTICULAR PURPOSE.
#

"""SepMarg.cli.files module

This module reads and writes the JSON files used by commands. Every file
carries a version tag; complex numbers are [re, im] pairs, and sets are
keyed by their comma-joined sorted site labels:

    >>> import numpy as np
    >>> from sepmarg.cli.files import matrix_from_pairs, matrix_to_pairs
    >>> matrix_to_pairs(np.array([[1, 1j], [-1j, 0]]))
    [[[1.0, 0.0], [0.0, 1.0]], [[0.0, -1.0], [0.0, 0.0]]]
    >>> complex(matrix_from_pairs([[[1, 0], [0, 1]], [[0, -1], [0, 0]]])[0, 1])
    1j
"""

import json

import numpy as np
from zope.schema import ValidationError

from sepmarg.classical import DiscreteDistribution
from sepmarg.cli.interfaces import BOUNDARY_KEY, CLIQUES_KEY, CLIQUE_MAP_KEY, DIMS_KEY, \
    DISTRIBUTION_KEY, FileFormatError, HIERARCHY_KEY, KIND_KEY, LEVEL_KEY, MARGINALS_KEY, \
    MATRIX_KEY, OFFSET_KEY, PARAMS_KEY, PRIVATE_KEY, SCENARIO_KEY, SETS_KEY, SITES_KEY, \
    SIZES_KEY, STATES_KEY, TABLE_KEY, TERMS_KEY, VARIABLES_KEY, VERSION_KEY, VIOLATION_KEY
from sepmarg.ensemble import StateEnsemble, set_key
from sepmarg.hierarchy import Witness
from sepmarg.interfaces import COMPAT_TOL, CUSTOM_SCENARIO, OPEN_BOUNDARY, SCHEMA_VERSION, \
    SepMargError
from sepmarg.models import PauliHamiltonian, format_pauli_string
from sepmarg.qops import HermitianOperator
from sepmarg.scenarios import MarginalScenario, sorted_sites


__docformat__ = 'restructuredtext'


#
# Primitives
#

def site_label(value):
    """Site label from its JSON form, digit strings becoming integers"""
    if isinstance(value, int):
        return value
    value = str(value)
    return int(value) if value.lstrip('-').isdigit() else value


def parse_set_key(key):
    """Sorted set of sites from its text key"""
    return sorted_sites(site_label(label.strip()) for label in key.split(','))


def matrix_to_pairs(matrix):
    """Row-major [re, im] pairs of a complex matrix"""
    matrix = np.asarray(matrix, dtype=complex)
    return [[[float(value.real), float(value.imag)] for value in row] for row in matrix]


def matrix_from_pairs(pairs, name='matrix'):
    """Complex matrix from row-major [re, im] pairs"""
    try:
        array = np.asarray(pairs, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FileFormatError(f"{name}: invalid matrix entries") from exc
    if array.ndim != 3 or array.shape[2] != 2 or array.shape[0] != array.shape[1]:
        raise FileFormatError(f"{name}: expected a square matrix of [re, im] pairs")
    return array[..., 0] + 1j * array[..., 1]


def _check_version(data, name):
    if not isinstance(data, dict):
        raise FileFormatError(f"{name}: expected a JSON object")
    version = data.get(VERSION_KEY)
    if version != SCHEMA_VERSION:
        raise FileFormatError(f"{name}: unsupported version {version!r}")
    return data


def load_json(path):
    """Load a versioned JSON file"""
    try:
        with open(path, encoding='utf-8') as stream:
            data = json.load(stream)
    except (OSError, json.JSONDecodeError) as exc:
        raise FileFormatError(f"{path}: {exc}") from exc
    return _check_version(data, path)


def dump_json(data, path):
    """Write a JSON file"""
    with open(path, 'w', encoding='utf-8') as stream:
        json.dump(data, stream, indent=2)
        stream.write('\n')


#
# Scenarios and ensembles
#

def scenario_from_dict(data, name='scenario'):
    """Marginal scenario from a file mapping"""
    try:
        dims = {site_label(site): int(dim) for site, dim in data[DIMS_KEY].items()}
        scenario = data[SCENARIO_KEY]
        sets = [[site_label(site) for site in members] for members in scenario[SETS_KEY]]
        return MarginalScenario(dims, sets, kind=scenario.get(KIND_KEY, CUSTOM_SCENARIO),
                                **scenario.get(PARAMS_KEY, {}))
    except (KeyError, TypeError, AttributeError, ValueError, ValidationError) as exc:
        if isinstance(exc, SepMargError):
            raise
        raise FileFormatError(f"{name}: missing or invalid scenario ({exc!r})") from exc


def scenario_to_dict(scenario):
    """File mapping of a marginal scenario"""
    result = {
        VERSION_KEY: SCHEMA_VERSION,
        DIMS_KEY: {str(site): dim for site, dim in scenario.dims.items()},
        SCENARIO_KEY: {
            KIND_KEY: scenario.kind,
            SETS_KEY: [list(members) for members in scenario.sets]
        }
    }
    if scenario.params:
        result[SCENARIO_KEY][PARAMS_KEY] = dict(scenario.params)
    return result


def ensemble_from_dict(data, tol=COMPAT_TOL, name='ensemble'):
    """State ensemble and private sites from a file mapping"""
    scenario = scenario_from_dict(data, name)
    try:
        states = {parse_set_key(key): matrix_from_pairs(value, f'{name}[{key}]')
                  for key, value in data[STATES_KEY].items()}
    except (KeyError, AttributeError) as exc:
        raise FileFormatError(f"{name}: missing states") from exc
    for key, matrix in states.items():
        if not np.allclose(matrix, matrix.conj().T, atol=tol):
            raise FileFormatError(f"{name}[{set_key(key)}]: matrix is not Hermitian")
    private_sites = {parse_set_key(key): site_label(site)
                     for key, site in data.get(PRIVATE_KEY, {}).items()}
    return StateEnsemble(scenario, states, tol), private_sites


def ensemble_to_dict(ensemble, private_sites=None):
    """File mapping of a state ensemble"""
    result = scenario_to_dict(ensemble.scenario)
    result[STATES_KEY] = {set_key(members): matrix_to_pairs(state.matrix)
                          for members, state in ensemble.states.items()}
    if private_sites:
        result[PRIVATE_KEY] = {set_key(members): site
                               for members, site in private_sites.items()}
    return result


#
# Hamiltonians
#

def hamiltonian_from_dict(data, name='hamiltonian'):
    """Pauli Hamiltonian from a file mapping, given by terms or by a dense matrix"""
    try:
        if MATRIX_KEY in data:
            return PauliHamiltonian.from_matrix(matrix_from_pairs(data[MATRIX_KEY], name))
        return PauliHamiltonian(int(data[SITES_KEY]),
                                [(coefficient, string) for coefficient, string in data[TERMS_KEY]],
                                data.get(BOUNDARY_KEY, OPEN_BOUNDARY))
    except (KeyError, TypeError, ValueError, ValidationError) as exc:
        if isinstance(exc, SepMargError):
            raise
        raise FileFormatError(f"{name}: invalid hamiltonian ({exc})") from exc


def hamiltonian_to_dict(h):
    """File mapping of a Pauli Hamiltonian"""
    return {
        VERSION_KEY: SCHEMA_VERSION,
        SITES_KEY: h.n,
        BOUNDARY_KEY: h.boundary,
        TERMS_KEY: [[coefficient, format_pauli_string(string)]
                    for coefficient, string in h.terms]
    }


#
# Distributions
#

def distribution_from_dict(data, name='distribution'):
    """Discrete distribution from a file mapping"""
    try:
        return DiscreteDistribution([site_label(site) for site in data[VARIABLES_KEY]],
                                    data[SIZES_KEY], data[TABLE_KEY])
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SepMargError):
            raise
        raise FileFormatError(f"{name}: invalid distribution ({exc})") from exc


def distribution_to_dict(p):
    """File mapping of a discrete distribution, with a row-major flat table"""
    return {
        VARIABLES_KEY: list(p.variables),
        SIZES_KEY: list(p.sizes),
        TABLE_KEY: [float(value) for value in p.table.reshape(-1)]
    }


def marginals_from_dict(data, name='marginals'):
    """Ordered clique marginals from a file mapping"""
    try:
        return [distribution_from_dict(item, f'{name}[{index}]')
                for index, item in enumerate(data[MARGINALS_KEY])]
    except (KeyError, TypeError) as exc:
        raise FileFormatError(f"{name}: missing marginals") from exc


def glued_to_dict(p):
    """File mapping of a glued global distribution"""
    return {
        VERSION_KEY: SCHEMA_VERSION,
        DISTRIBUTION_KEY: distribution_to_dict(p)
    }


def glued_from_dict(data, name='glued'):
    """Global distribution from a glued distribution file mapping"""
    try:
        item = data[DISTRIBUTION_KEY]
    except (KeyError, TypeError) as exc:
        raise FileFormatError(f"{name}: missing distribution") from exc
    return distribution_from_dict(item, name)


#
# Results
#

def completion_to_dict(scenario, graph, clique_map):
    """File mapping of a chordal completion"""
    result = scenario_to_dict(scenario)
    result[SCENARIO_KEY] = {
        KIND_KEY: CUSTOM_SCENARIO,
        SETS_KEY: [list(clique) for clique in graph.graph[CLIQUES_KEY]]
    }
    result[CLIQUES_KEY] = [list(clique) for clique in graph.graph[CLIQUES_KEY]]
    result[CLIQUE_MAP_KEY] = {set_key(members): list(clique)
                              for members, clique in clique_map.items()}
    return result


def witness_to_dict(witness):
    """File mapping of an entanglement witness"""
    result = {VERSION_KEY: SCHEMA_VERSION}
    result.update(witness.to_dict())
    return result


def witness_from_dict(data, name='witness'):
    """Entanglement witness from a file mapping"""
    try:
        dims = data.get(DIMS_KEY, {})
        terms = {}
        for key, value in data[TERMS_KEY].items():
            matrix = matrix_from_pairs(value, f'{name}[{key}]')
            terms[parse_set_key(key)] = HermitianOperator(matrix, dims.get(key),
                                                          name=f'{name}[{key}]')
        return Witness(terms, float(data.get(OFFSET_KEY, 0.0)),
                       float(data.get(VIOLATION_KEY, 0.0)),
                       data.get(HIERARCHY_KEY), data.get(LEVEL_KEY))
    except (KeyError, TypeError, AttributeError, ValueError) as exc:
        if isinstance(exc, SepMargError):
            raise
        raise FileFormatError(f"{name}: invalid witness ({exc})") from exc
