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

"""SepMarg.ensemble module

This module defines ensembles of reduced states over a marginal scenario.
"""

from functools import reduce

import numpy as np
from zope.interface import implementer

from sepmarg.interfaces import COMPAT_TOL, IStateEnsemble, IncompatibleEnsemble, \
    ShapeMismatch
from sepmarg.linalg import trace_norm
from sepmarg.qops import HermitianOperator, partial_trace
from sepmarg.scenarios import sorted_sites


__docformat__ = 'restructuredtext'


def set_key(members):
    """Text key of a set: comma-joined labels"""
    return ','.join(str(site) for site in members)


def marginal_of(state, members, keep):
    """Reduced operator of a set state on a subset of its sites"""
    positions = [members.index(site) for site in keep]
    return partial_trace(state, positions)


@implementer(IStateEnsemble)
class StateEnsemble:
    """Ensemble of reduced states

    States are checked on construction: every state must be a density
    matrix within `tol`, and overlapping states must agree within `tol` in
    trace norm.
    """

    def __init__(self, scenario, states, tol=COMPAT_TOL, check=True):
        self.scenario = scenario
        self.tol = tol
        self.states = {}
        states = {sorted_sites(members): value for members, value in states.items()}
        for members in scenario.sets:
            if members not in states:
                raise ShapeMismatch(f"Missing state for set {set_key(members)}")
            value = states[members]
            dims = scenario.set_dims(members)
            matrix = getattr(value, 'matrix', value)
            self.states[members] = HermitianOperator(matrix, dims, name=set_key(members))
        for members in states:
            if members not in self.states:
                raise ShapeMismatch(f"State given for unknown set {set_key(members)}")
        if check:
            for members, state in self.states.items():
                if not state.is_state(tol):
                    raise IncompatibleEnsemble(f"State of set {set_key(members)} is not a "
                                               f"density matrix")
            deviation = self.compatibility()
            if deviation > tol:
                raise IncompatibleEnsemble(f"Marginals are not locally compatible "
                                           f"(deviation {deviation:.3e})")

    def __repr__(self):
        return f'<StateEnsemble sets={list(self.states)}>'

    def __getitem__(self, members):
        return self.states[sorted_sites(members)]

    def deviations(self):
        """Trace norm deviation of every overlapping pair of sets"""
        result = {}
        for first, second, common in self.scenario.overlaps():
            left = marginal_of(self.states[first], first, common)
            right = marginal_of(self.states[second], second, common)
            result[first, second] = trace_norm(left.matrix - right.matrix)
        return result

    def compatibility(self):
        """Maximal trace norm deviation between overlapping marginals"""
        return max(self.deviations().values(), default=0.0)

    def local_compatibility(self):
        """Compatibility report: (compatible, maximal deviation, worst pair)"""
        deviations = self.deviations()
        if not deviations:
            return True, 0.0, None
        worst = max(deviations, key=deviations.get)
        return deviations[worst] <= self.tol, deviations[worst], worst

    @classmethod
    def from_global(cls, state, scenario, tol=COMPAT_TOL):
        """Ensemble of the marginals of a global state on all scenario sites"""
        matrix = getattr(state, 'matrix', state)
        dims = tuple(scenario.dim(site) for site in scenario.sites)
        state = HermitianOperator(matrix, dims, name='global state')
        states = {members: marginal_of(state, list(scenario.sites), members)
                  for members in scenario.sets}
        return cls(scenario, states, tol)


def product_ensemble(scenario, local_states, tol=COMPAT_TOL):
    """Ensemble of the marginals of a product of local states"""
    states = {}
    for members in scenario.sets:
        matrices = [np.asarray(getattr(local_states[site], 'matrix', local_states[site]),
                               dtype=complex)
                    for site in members]
        states[members] = reduce(np.kron, matrices)
    return StateEnsemble(scenario, states, tol)


def maximally_mixed_ensemble(scenario):
    """Ensemble of maximally mixed states"""
    return product_ensemble(scenario,
                            {site: np.eye(scenario.dim(site)) / scenario.dim(site)
                             for site in sorted_sites(scenario.sites)})
