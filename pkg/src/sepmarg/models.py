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

"""SepMarg.models module

This module provides spin models given as sums of Pauli strings, their
thermal and ground states by exact diagonalization, separable energy
bounds and scans of the critical inverse temperature below which thermal
marginals admit a separable extension.

Sites are numbered from 1:

    >>> from sepmarg.models import heisenberg_model
    >>> h = heisenberg_model(2)
    >>> h.terms
    [(1.0, {1: 'X', 2: 'X'}), (1.0, {1: 'Y', 2: 'Y'}), (1.0, {1: 'Z', 2: 'Z'})]
    >>> [round(float(e), 10) for e in h.eigenvalues()]
    [-3.0, 1.0, 1.0, 1.0]
"""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from functools import reduce

import numpy as np
from scipy import sparse
from zope.interface import implementer
from zope.schema import Float, getFieldNames
from zope.schema.fieldproperty import FieldProperty

from sepmarg.ensemble import StateEnsemble
from sepmarg.hierarchy import HierarchyOptions, build_hierarchy, check_instance
from sepmarg.interfaces import BadIndex, HBAR_HIERARCHY, H_HIERARCHY, \
    IBetaScanResult, INCONCLUSIVE, IPauliHamiltonian, IScanOptions, ISolverOptions, \
    LINE_HIERARCHY, LINE_SCENARIO, NoConvergence, OPEN_BOUNDARY, OPTIMAL, \
    PAULI_LETTERS_VOCABULARY, PERIODIC_BOUNDARY, RING_HIERARCHY, RING_SCENARIO, \
    ShapeMismatch, TI1D_HIERARCHY, TI1D_SCENARIO, TI2D_HIERARCHY, TI2D_SCENARIO, TooLarge
from sepmarg.linalg import check_hermitian, herm_eig
from sepmarg.qops import partial_trace_matrix, partial_transpose_matrix
from sepmarg.scenarios import MarginalScenario, sorted_sites
from sepmarg.sdp import SolverOptions, solve


__docformat__ = 'restructuredtext'


LOGGER = logging.getLogger('SepMarg (models)')

MAX_SITES = 12
DEGENERACY_TOL = 1e-9
RETRY_STEP_FRACTION = 0.9

PAULI_MATRICES = {
    'I': np.eye(2, dtype=complex),
    'X': np.array([[0, 1], [1, 0]], dtype=complex),
    'Y': np.array([[0, -1j], [1j, 0]], dtype=complex),
    'Z': np.array([[1, 0], [0, -1]], dtype=complex)
}

FOOTNOTE_MATRIX = np.array([
    [1.3398, 0.9526, 0.2617, 1.8461],
    [0.9526, 0.8519, 0.2829, -1.1422],
    [0.2617, 0.2829, -2.2228, 0.7696],
    [1.8461, -1.1422, 0.7696, 0.0476]
])


def parse_pauli_string(text):
    """Pauli string from its text form

    >>> from sepmarg.models import parse_pauli_string
    >>> parse_pauli_string('X1 Z3')
    {1: 'X', 3: 'Z'}
    """
    result = {}
    for token in text.split():
        letter, site = token[0].upper(), token[1:]
        if letter not in PAULI_LETTERS_VOCABULARY or not site.isdigit():
            raise BadIndex(f"Invalid Pauli token {token!r}")
        if letter != 'I':
            result[int(site)] = letter
    return result


def format_pauli_string(string):
    """Text form of a Pauli string"""
    return ' '.join(f'{letter}{site}' for site, letter in sorted(string.items()))


@implementer(IPauliHamiltonian)
class PauliHamiltonian:
    """Hamiltonian of qubits given as a sum of weighted Pauli strings

    Every term is a (coefficient, string) tuple, the string mapping sites to
    one of the X, Y or Z letters; an empty string is an identity term.
    """

    boundary = FieldProperty(IPauliHamiltonian['boundary'])

    def __init__(self, n, terms, boundary=OPEN_BOUNDARY):
        self.n = int(n)
        self.boundary = boundary
        self.terms = []
        for coefficient, string in terms:
            if isinstance(string, str):
                string = parse_pauli_string(string)
            coefficient = float(coefficient)
            if not math.isfinite(coefficient):
                raise ShapeMismatch(f"Coefficient {coefficient!r} is not finite")
            string = {int(site): letter.upper() for site, letter in string.items()
                      if letter.upper() != 'I'}
            for site, letter in string.items():
                if not 1 <= site <= self.n:
                    raise BadIndex(f"Site {site} out of range 1..{self.n}")
                if letter not in PAULI_LETTERS_VOCABULARY:
                    raise BadIndex(f"Invalid Pauli letter {letter!r}")
            self.terms.append((coefficient, dict(sorted(string.items()))))

    def __repr__(self):
        return f'<PauliHamiltonian n={self.n} terms={len(self.terms)}>'

    @property
    def constant(self):
        """Sum of identity terms coefficients"""
        return sum(coefficient for coefficient, string in self.terms if not string)

    @staticmethod
    def string_matrix(string, sites):
        """Dense matrix of a Pauli string on given sites"""
        return reduce(np.kron, [PAULI_MATRICES[string.get(site, 'I')] for site in sites],
                      np.eye(1, dtype=complex))

    def local_terms(self):
        """Non identity terms grouped by support, as dense matrices on their support"""
        result = {}
        for coefficient, string in self.terms:
            if not string:
                continue
            support = sorted_sites(string)
            matrix = coefficient * self.string_matrix(string, support)
            result[support] = result.get(support, 0) + matrix
        return result

    def sparse_matrix(self):
        """Sparse matrix on the whole chain"""
        if self.n > MAX_SITES:
            raise TooLarge(f"{self.n} sites exceed exact diagonalization limit of {MAX_SITES}")
        result = sparse.csr_matrix((2 ** self.n, 2 ** self.n), dtype=complex)
        for coefficient, string in self.terms:
            factors = [sparse.csr_matrix(PAULI_MATRICES[string.get(site, 'I')])
                       for site in range(1, self.n + 1)]
            result = result + coefficient * reduce(
                lambda a, b: sparse.kron(a, b, format='csr'), factors)
        return result

    def matrix(self):
        """Dense matrix on the whole chain"""
        return self.sparse_matrix().toarray()

    def eigenvalues(self):
        """Sorted spectrum"""
        return herm_eig(self.matrix())[0]

    @classmethod
    def from_matrix(cls, matrix, tol=1e-12):
        """Pauli decomposition of a dense Hermitian matrix on qubits"""
        matrix = check_hermitian(np.asarray(matrix, dtype=complex), name='hamiltonian')
        n = int(round(math.log2(matrix.shape[0])))
        if 2 ** n != matrix.shape[0]:
            raise ShapeMismatch(f"Matrix of size {matrix.shape[0]} doesn't act on qubits")
        sites = range(1, n + 1)
        terms = []
        for letters in itertools.product('IXYZ', repeat=n):
            string = {site: letter for site, letter in zip(sites, letters) if letter != 'I'}
            coefficient = float(np.trace(cls.string_matrix(string, sites) @ matrix).real) / 2 ** n
            if abs(coefficient) > tol:
                terms.append((coefficient, string))
        return cls(n, terms)


#
# Model factories
#

def _bonds(n, boundary):
    bonds = [(j, j + 1) for j in range(1, n)]
    if boundary == PERIODIC_BOUNDARY and n > 2:
        bonds.append((n, 1))
    return bonds


def xy_model(n, boundary=PERIODIC_BOUNDARY):
    """H = -1/2 sum X_j Y_j+1"""
    terms = [(-0.5, {j: 'X', k: 'Y'}) for j, k in _bonds(n, boundary)]
    return PauliHamiltonian(n, terms, boundary)


def heisenberg_model(n, coefficients=None, boundary=OPEN_BOUNDARY):
    """H = sum a_j (X_j X_j+1 + Y_j Y_j+1 + Z_j Z_j+1)"""
    bonds = _bonds(n, boundary)
    if coefficients is None:
        coefficients = np.ones(len(bonds))
    if len(coefficients) != len(bonds):
        raise ShapeMismatch(f"Expected {len(bonds)} coefficients, got {len(coefficients)}")
    terms = [(float(alpha), {j: letter, k: letter})
             for alpha, (j, k) in zip(coefficients, bonds)
             for letter in 'XYZ']
    return PauliHamiltonian(n, terms, boundary)


def spin_glass_sample(n, seed=None):
    """Heisenberg chain with couplings sampled uniformly in [0, 1]"""
    if n < 2:
        raise BadIndex("A spin glass needs at least 2 sites")
    rng = np.random.default_rng(seed)
    return heisenberg_model(n, rng.uniform(0.0, 1.0, n - 1))


def footnote_hamiltonian():
    """Two-qubit Hamiltonian whose thermal state changes separability several times"""
    return PauliHamiltonian.from_matrix(FOOTNOTE_MATRIX)


#
# Thermal and ground states
#

def _scenario_of(h, scenario):
    if isinstance(scenario, MarginalScenario):
        return scenario
    return MarginalScenario({site: 2 for site in range(1, h.n + 1)}, scenario)


def thermal_state(h, beta, spectrum=None):
    """Dense thermal state exp(-beta H) / Z

    :raise TooLarge: if the chain is too long for exact diagonalization
    """
    energies, vectors = spectrum if spectrum is not None else herm_eig(h.matrix())
    weights = np.exp(-beta * (energies - energies[0]))
    weights /= weights.sum()
    return (vectors * weights) @ vectors.conj().T


def thermal_marginals(h, beta, scenario):
    """Ensemble of the marginals of the thermal state on scenario sets"""
    scenario = _scenario_of(h, scenario)
    return StateEnsemble.from_global(thermal_state(h, beta), scenario)


def ground_state_marginals(h, scenario, tol=DEGENERACY_TOL):
    """Ensemble of the marginals of the uniform mixture of ground states"""
    scenario = _scenario_of(h, scenario)
    energies, vectors = herm_eig(h.matrix())
    ground = vectors[:, energies <= energies[0] + tol]
    state = ground @ ground.conj().T / ground.shape[1]
    return StateEnsemble.from_global(state, scenario)


def ppt_sweep(h, betas, members=(1, 2)):
    """Minimal eigenvalue of the partial transpose of a thermal marginal, along betas"""
    sites = list(range(1, h.n + 1))
    keep = [sites.index(site) for site in members]
    spectrum = herm_eig(h.matrix())
    result = []
    for beta in betas:
        marginal = partial_trace_matrix(thermal_state(h, beta, spectrum), (2,) * h.n, keep)
        transposed = partial_transpose_matrix(marginal, (2,) * len(keep), [0])
        result.append(float(np.linalg.eigvalsh(transposed)[0]))
    return np.array(result)


#
# Separable energy
#

def default_hierarchy(scenario, private_sites=None):
    """Hierarchy matching a scenario kind"""
    if private_sites:
        return HBAR_HIERARCHY
    return {
        LINE_SCENARIO: LINE_HIERARCHY,
        RING_SCENARIO: RING_HIERARCHY,
        TI1D_SCENARIO: TI1D_HIERARCHY,
        TI2D_SCENARIO: TI2D_HIERARCHY
    }.get(scenario.kind, H_HIERARCHY)


def separable_energy(h, scenario, level=1, hierarchy=None, private_sites=None,
                     solver_options=None):
    """Lower bound of the energy of separable states, from the relaxation of given level

    Returns the bound and a mapping of solver information.

    :raise UnsupportedTerm: if a term isn't supported by a set of the scenario
    :raise NoConvergence: if the solver doesn't reach an optimal solution
    """
    scenario = _scenario_of(h, scenario)
    options = HierarchyOptions(level=level,
                               hierarchy=hierarchy or default_hierarchy(scenario, private_sites))
    inst = build_hierarchy(scenario, options, private_sites, h.local_terms())
    sol = solve(inst, solver_options)
    if sol.status != OPTIMAL:
        raise NoConvergence(f"Separable energy solve ended with status {sol.status!r}")
    value = sol.primal_objective + h.constant
    LOGGER.info("Separable energy bound at level %d: %.8f", level, value)
    return value, {
        'status': sol.status,
        'iterations': sol.iterations,
        'gap': sol.gap,
        'dual_bound': sol.dual_objective + h.constant,
        'hierarchy': options.hierarchy,
        'level': level
    }


#
# Critical inverse temperature
#

@implementer(IScanOptions)
class ScanOptions:
    """Inverse temperature scan options"""

    beta_min = FieldProperty(IScanOptions['beta_min'])
    beta_max = FieldProperty(IScanOptions['beta_max'])
    step = FieldProperty(IScanOptions['step'])
    resolution = FieldProperty(IScanOptions['resolution'])
    max_workers = FieldProperty(IScanOptions['max_workers'])

    def __init__(self, **kwargs):
        for name, value in kwargs.items():
            if value is None:
                continue
            if isinstance(IScanOptions.get(name), Float):
                value = float(value)
            setattr(self, name, value)

    @property
    def grid(self):
        """Grid of inverse temperatures"""
        count = int(math.floor((self.beta_max - self.beta_min) / self.step + 1e-9))
        return [self.beta_min + index * self.step for index in range(count + 1)]


@implementer(IBetaScanResult)
class BetaScanResult:
    """Scan result"""

    verdicts = FieldProperty(IBetaScanResult['verdicts'])

    def __init__(self, betas, verdicts, transitions, level):
        self.betas = betas
        self.verdicts = list(verdicts)
        self.transitions = transitions
        self.level = level

    def __repr__(self):
        return f'<BetaScanResult points={len(self.betas)} transitions={len(self.transitions)}>'

    def table(self):
        """(beta, verdict) rows"""
        return list(zip(self.betas, self.verdicts))


def thermal_verdict(h, beta, scenario, options, private_sites=None, solver_options=None):
    """Relaxation verdict on the thermal marginals at given inverse temperature"""
    ensemble = thermal_marginals(h, beta, scenario)
    verdict, _sol = check_instance(build_hierarchy(ensemble, options, private_sites),
                                   solver_options)
    LOGGER.debug("beta=%.6f: %s", beta, verdict)
    return verdict


def _retry_options(solver_options):
    """Solver options used again on inconclusive points

    Iterations are doubled and steps shortened.
    """
    solver_options = solver_options or SolverOptions()
    retry = SolverOptions(**{name: getattr(solver_options, name)
                             for name in getFieldNames(ISolverOptions)})
    retry.max_iter = 2 * solver_options.max_iter
    retry.step_fraction = min(solver_options.step_fraction, RETRY_STEP_FRACTION)
    return retry


def critical_beta_scan(h, scenario, level=1, options=None, hierarchy=None,
                       private_sites=None, solver_options=None):
    """Verdicts of the relaxation along a grid of inverse temperatures

    Inconclusive solves are retried once with more conservative solver
    options. Every change of verdict between consecutive grid points, an
    inconclusive verdict included, is then refined by bisection down to the
    requested resolution; transitions are (low, high, verdict below,
    verdict above) tuples sorted by inverse temperature.
    """
    scenario = _scenario_of(h, scenario)
    options = options or ScanOptions()
    hierarchy_options = HierarchyOptions(
        level=level, hierarchy=hierarchy or default_hierarchy(scenario, private_sites))
    retry_options = _retry_options(solver_options)

    def verdict_at(beta):
        verdict = thermal_verdict(h, beta, scenario, hierarchy_options, private_sites,
                                  solver_options)
        if verdict == INCONCLUSIVE:
            verdict = thermal_verdict(h, beta, scenario, hierarchy_options, private_sites,
                                      retry_options)
            if verdict == INCONCLUSIVE:
                LOGGER.warning("Inconclusive solve at beta=%.6f", beta)
        return verdict

    betas = options.grid
    with ThreadPoolExecutor(max_workers=options.max_workers) as executor:
        verdicts = list(executor.map(verdict_at, betas))
    pending = [(low, below, high, above)
               for (low, below), (high, above) in zip(zip(betas, verdicts),
                                                      zip(betas[1:], verdicts[1:]))
               if below != above]
    transitions = []
    while pending:
        low, below, high, above = pending.pop()
        while high - low > options.resolution:
            middle = (low + high) / 2
            verdict = verdict_at(middle)
            if verdict == below:
                low = middle
            elif verdict == above:
                high = middle
            else:
                pending.append((middle, verdict, high, above))
                high, above = middle, verdict
        transitions.append((low, high, below, above))
    transitions.sort()
    LOGGER.info("Scan found %d transitions on %d points", len(transitions), len(betas))
    return BetaScanResult(betas, verdicts, transitions, level)


def ppt_transitions(values, betas):
    """Intervals of betas where the sign of a PPT sweep changes"""
    signs = np.asarray(values) >= 0
    return [(betas[index], betas[index + 1])
            for index in np.nonzero(signs[:-1] != signs[1:])[0]]
