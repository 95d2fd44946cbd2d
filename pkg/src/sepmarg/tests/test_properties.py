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

"""
Property based test cases for sepmarg
"""

__docformat__ = 'restructuredtext'

import itertools
import unittest
from functools import reduce

import networkx as nx
import numpy as np
from hypothesis import assume, given, settings
from hypothesis.strategies import integers, lists, sampled_from, tuples

from sepmarg.bounds import epsilon, jacobi_parameters, jacobi_roots, jacobi_roots_bisection
from sepmarg.classical import DiscreteDistribution, clique_marginals, glue_chordal, \
    has_global_extension_bruteforce, marginalize
from sepmarg.ensemble import StateEnsemble
from sepmarg.hierarchy import build_H, build_Hbar, build_line, build_ring, build_ti1d, \
    build_ti2d_reflect, check_instance, extract_witness
from sepmarg.interfaces import FEASIBLE, INFEASIBLE
from sepmarg.linalg import embed_real
from sepmarg.models import PauliHamiltonian, separable_energy
from sepmarg.qops import HermitianOperator, kron, partial_trace, partial_transpose
from sepmarg.scenarios import MarginalScenario, chordal_complete, is_chordal, line_scenario, \
    ring_scenario, running_intersection_ok, star_scenario


SEEDS = integers(min_value=0, max_value=2 ** 32 - 1)

PAIR = MarginalScenario({1: 2, 2: 2}, [(1, 2)])


def random_state(rng, size, rank):
    """Random density matrix of given rank"""
    g = rng.normal(size=(size, rank)) + 1j * rng.normal(size=(size, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_pure(rng, size):
    """Random pure density matrix"""
    return random_state(rng, size, 1)


def random_unitary(rng, size):
    """Random unitary matrix"""
    q, r = np.linalg.qr(rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


#
# Operators
#

class TestOperators(unittest.TestCase):
    """Partial trace and transposition properties"""

    @given(SEEDS, integers(2, 3), integers(2, 3))
    def test_partial_trace_of_product(self, seed, d1, d2):
        rng = np.random.default_rng(seed)
        a = HermitianOperator(random_state(rng, d1, d1), (d1,))
        b = HermitianOperator(random_state(rng, d2, d2), (d2,))
        product = kron(a, b)
        self.assertTrue(np.allclose(partial_trace(product, [0]).matrix, a.matrix))
        self.assertTrue(np.allclose(partial_trace(product, [1]).matrix, b.matrix))

    @given(SEEDS)
    def test_partial_transpose_preserves_spectrum_of_products(self, seed):
        rng = np.random.default_rng(seed)
        a = HermitianOperator(random_pure(rng, 2), (2,))
        b = HermitianOperator(random_pure(rng, 3), (3,))
        product = kron(a, b)
        self.assertGreaterEqual(partial_transpose(product, [0]).min_eigenvalue(), -1e-12)

    @given(SEEDS, integers(1, 6), integers(-2, 2))
    def test_real_embedding_keeps_sign(self, seed, size, shift):
        rng = np.random.default_rng(seed)
        matrix = random_state(rng, size, size) + (shift / (2 * size)) * np.eye(size)
        lowest = np.linalg.eigvalsh(matrix)[0]
        embedded = np.linalg.eigvalsh(embed_real(matrix, size))
        self.assertAlmostEqual(embedded[0], lowest, places=10)
        self.assertEqual(embedded.shape, (2 * size,))


#
# Hierarchies
#

class TestPPTEquivalence(unittest.TestCase):
    """On two qubits, level 1 is exactly the PPT criterion"""

    @settings(max_examples=60, deadline=None)
    @given(SEEDS, integers(1, 4))
    def test_level_one_matches_ppt(self, seed, rank):
        rng = np.random.default_rng(seed)
        rho = random_state(rng, 4, rank)
        negativity = partial_transpose(HermitianOperator(rho, (2, 2)), [0]).min_eigenvalue()
        verdict, _sol = check_instance(build_H(StateEnsemble(PAIR, {(1, 2): rho}), 1))
        self.assertEqual(verdict, FEASIBLE if negativity > 0 else INFEASIBLE)

    @settings(max_examples=40, deadline=None)
    @given(SEEDS, sampled_from([1e-3, 3e-3, 1e-2, 3e-2]), sampled_from([-1, 1]))
    def test_near_boundary_werner_states(self, seed, gap, side):
        rng = np.random.default_rng(seed)
        # rotating the singlet locally keeps the partial transpose spectrum
        u = np.kron(random_unitary(rng, 2), random_unitary(rng, 2))
        psi = np.array([0, 1, -1, 0]) / np.sqrt(2)
        visibility = (1 + side * 4 * gap) / 3
        rho = visibility * np.outer(psi, psi) + (1 - visibility) * np.eye(4) / 4
        rho = u @ rho @ u.conj().T
        verdict, sol = check_instance(build_H(StateEnsemble(PAIR, {(1, 2): rho}), 1))
        self.assertEqual(verdict, INFEASIBLE if side > 0 else FEASIBLE, sol.status)


class TestSeparableMixtures(unittest.TestCase):
    """Marginals of separable mixtures pass every hierarchy"""

    @settings(max_examples=8, deadline=None)
    @given(SEEDS, integers(1, 3))
    def test_finite_scenarios(self, seed, terms):
        rng = np.random.default_rng(seed)
        sites = 4
        weights = rng.dirichlet(np.ones(terms))
        state = sum(weight * reduce(np.kron, [random_pure(rng, 2) for _site in range(sites)])
                    for weight in weights)
        state = 0.9 * state + 0.1 * np.eye(2 ** sites) / 2 ** sites
        line = StateEnsemble.from_global(state, line_scenario(sites))
        ring = StateEnsemble.from_global(state, ring_scenario(sites))
        instances = [build_H(line, 1), build_H(line, 2), build_line(line, 2),
                     build_Hbar(line, 2, {(1, 2): 1, (3, 4): 4}), build_ring(ring, 2)]
        for inst in instances:
            verdict, sol = check_instance(inst)
            self.assertEqual(verdict, FEASIBLE, (inst.metadata['hierarchy'], sol.status))

    @settings(max_examples=5, deadline=None)
    @given(SEEDS, integers(1, 3))
    def test_translation_invariant_mixtures(self, seed, terms):
        rng = np.random.default_rng(seed)
        weights = rng.dirichlet(np.ones(terms))
        locals_ = [0.9 * random_pure(rng, 2) + 0.05 * np.eye(2) for _term in weights]
        window = sum(weight * np.kron(local, local) for weight, local in zip(weights, locals_))
        plaquette = sum(weight * reduce(np.kron, [local] * 4)
                        for weight, local in zip(weights, locals_))
        verdict, sol = check_instance(build_ti1d(HermitianOperator(window, (2, 2)), 2))
        self.assertEqual(verdict, FEASIBLE, sol.status)
        verdict, sol = check_instance(
            build_ti2d_reflect(HermitianOperator(plaquette, (2, 2, 2, 2)), 1))
        self.assertEqual(verdict, FEASIBLE, sol.status)


class TestHierarchyOrder(unittest.TestCase):
    """Levels are nested, and the simplified hierarchy is weaker than the full one"""

    @settings(max_examples=10, deadline=None)
    @given(SEEDS, integers(2, 8))
    def test_star_ensembles(self, seed, rank):
        rng = np.random.default_rng(seed)
        state = random_state(rng, 8, rank)
        ensemble = StateEnsemble.from_global(state, star_scenario(3))
        first, _sol = check_instance(build_H(ensemble, 1))
        second, _sol = check_instance(build_H(ensemble, 2))
        simplified, _sol = check_instance(build_Hbar(ensemble, 2, {(1, 2): 2, (1, 3): 3}))
        if second == FEASIBLE:
            self.assertNotEqual(first, INFEASIBLE)
        if second == FEASIBLE:
            self.assertNotEqual(simplified, INFEASIBLE)
        if simplified == FEASIBLE:
            self.assertNotEqual(first, INFEASIBLE)


class TestWitnessSoundness(unittest.TestCase):
    """Witnesses are violated by their input and nonnegative on product states"""

    @settings(max_examples=10, deadline=None)
    @given(SEEDS)
    def test_witness_of_entangled_pure_state(self, seed):
        rng = np.random.default_rng(seed)
        rho = random_pure(rng, 4)
        negativity = partial_transpose(HermitianOperator(rho, (2, 2)), [0]).min_eigenvalue()
        assume(negativity < -1e-3)
        ensemble = StateEnsemble(PAIR, {(1, 2): rho})
        inst = build_H(ensemble, 1)
        verdict, sol = check_instance(inst)
        self.assertEqual(verdict, INFEASIBLE)
        witness = extract_witness(inst, sol, ensemble)
        self.assertAlmostEqual(witness.violation, 1.0, places=5)
        for _index in range(20):
            product = np.kron(random_pure(rng, 2), random_pure(rng, 2))
            value = witness.evaluate(StateEnsemble(PAIR, {(1, 2): product}))
            self.assertGreaterEqual(value, -1e-5)


class TestEnergyMonotonicity(unittest.TestCase):
    """Higher levels give higher lower bounds, below any product state energy"""

    @settings(max_examples=5, deadline=None)
    @given(SEEDS)
    def test_levels_are_monotonic(self, seed):
        rng = np.random.default_rng(seed)
        terms = [(float(rng.normal()), {1: first, 2: second})
                 for first, second in itertools.product('XYZ', repeat=2)]
        h = PauliHamiltonian(2, terms)
        low, _info = separable_energy(h, [(1, 2)], level=1)
        high, _info = separable_energy(h, [(1, 2)], level=2)
        self.assertLessEqual(low, high + 1e-6)
        for _index in range(10):
            product = np.kron(random_pure(rng, 2), random_pure(rng, 2))
            energy = float(np.trace(h.matrix() @ product).real)
            self.assertLessEqual(high, energy + 1e-6)


#
# Classical marginal problem
#

class TestMarginals(unittest.TestCase):
    """Marginalization and gluing properties"""

    @given(SEEDS, lists(integers(2, 3), min_size=2, max_size=4),
           sampled_from([0, 1]))
    def test_marginalize_tower(self, seed, sizes, skip):
        variables = tuple(range(1, len(sizes) + 1))
        p = DiscreteDistribution.random(variables, sizes, rng=seed)
        outer = variables[:-1]
        inner = outer[skip:]
        two_steps = marginalize(marginalize(p, outer), inner)
        one_step = marginalize(p, inner)
        self.assertEqual(two_steps.variables, one_step.variables)
        self.assertTrue(np.allclose(two_steps.table, one_step.table))

    @settings(max_examples=20, deadline=None)
    @given(SEEDS, integers(3, 5))
    def test_glue_matches_brute_force_on_lines(self, seed, count):
        variables = tuple(range(1, count + 1))
        p = DiscreteDistribution.random(variables, (2,) * count, rng=seed)
        cliques = [(j, j + 1) for j in range(1, count)]
        marginals = clique_marginals(p, cliques)
        glued = glue_chordal(marginals)
        for clique, marginal in marginals.items():
            self.assertTrue(np.allclose(marginalize(glued, clique).table, marginal.table))
        self.assertTrue(has_global_extension_bruteforce(marginals))


#
# Chordal completion
#

class TestChordalCompletion(unittest.TestCase):
    """Completed scenarios are chordal, with cliques covering every set"""

    @given(lists(tuples(integers(1, 7), integers(1, 7)), min_size=1, max_size=12))
    def test_completion(self, edges):
        sets = [tuple(sorted(edge)) for edge in edges if edge[0] != edge[1]]
        assume(sets)
        sites = sorted({site for members in sets for site in members})
        scenario = MarginalScenario({site: 2 for site in sites}, sets)
        graph, clique_map = chordal_complete(scenario)
        self.assertTrue(is_chordal(graph)[0])
        self.assertTrue(nx.is_chordal(graph))
        cliques = graph.graph['cliques']
        self.assertTrue(running_intersection_ok(cliques))
        for members in scenario.sets:
            self.assertTrue(set(members) <= set(clique_map[members]))


#
# Bounds
#

class TestBounds(unittest.TestCase):
    """Jacobi roots and radii"""

    @given(integers(1, 12), integers(2, 5))
    def test_roots_agree(self, level, dim):
        alpha, beta, degree = jacobi_parameters(level, dim)
        self.assertTrue(np.allclose(jacobi_roots(alpha, beta, degree),
                                    jacobi_roots_bisection(alpha, beta, degree),
                                    atol=1e-9))

    @given(integers(1, 20), integers(2, 5))
    def test_radius_decreases(self, level, dim):
        self.assertGreater(epsilon(level, dim), epsilon(level + 1, dim))
        self.assertGreater(epsilon(level, dim), 0.0)


if __name__ == '__main__':
    unittest.main()
