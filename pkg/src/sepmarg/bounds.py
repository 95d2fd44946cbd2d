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

"""SepMarg.bounds module

This module computes the trace distance guarantees of the extension
hierarchies: an ensemble passing level L is close to an ensemble of
separable states, within a radius given by the largest root of a Jacobi
polynomial.

    >>> from sepmarg.bounds import epsilon
    >>> round(epsilon(1, 2), 12)
    0.666666666667
    >>> round(epsilon(2, 2), 12)
    0.42264973081
"""

import math

import numpy as np
import scipy.linalg
import scipy.optimize
import scipy.special
from zope.interface import implementer

from sepmarg.interfaces import BadIndex, IConvergenceBound
from sepmarg.scenarios import sorted_sites


__docformat__ = 'restructuredtext'


BISECTION_GRID = 20000
BISECTION_TOL = 1e-14


def jacobi_parameters(L, d):  # pylint: disable=invalid-name
    """Jacobi polynomial (alpha, beta, degree) of a level and local dimension"""
    if L < 1 or d < 2:
        raise BadIndex(f"Invalid level {L} or local dimension {d}")
    return d - 2, L % 2, L // 2 + 1


def jacobi_recurrence(alpha, beta, n):
    """Diagonal and subdiagonal of the Jacobi matrix of P^(alpha, beta)_n"""
    k = np.arange(n, dtype=float)
    total = alpha + beta
    with np.errstate(divide='ignore', invalid='ignore'):
        diagonal = (beta ** 2 - alpha ** 2) / ((2 * k + total) * (2 * k + total + 2))
    diagonal[0] = (beta - alpha) / (total + 2.0)
    k = np.arange(1, n, dtype=float)
    offdiagonal = np.sqrt(4 * k * (k + alpha) * (k + beta) * (k + total) /
                          ((2 * k + total) ** 2 * (2 * k + total + 1) * (2 * k + total - 1)))
    return diagonal, offdiagonal


def jacobi_roots(alpha, beta, n):
    """Roots of P^(alpha, beta)_n, as eigenvalues of its Jacobi matrix

    >>> from sepmarg.bounds import jacobi_roots
    >>> [round(float(x), 12) for x in jacobi_roots(0, 0, 2)]
    [-0.57735026919, 0.57735026919]
    """
    diagonal, offdiagonal = jacobi_recurrence(alpha, beta, n)
    if n == 1:
        return diagonal.copy()
    return scipy.linalg.eigh_tridiagonal(diagonal, offdiagonal, eigvals_only=True)


def jacobi_roots_bisection(alpha, beta, n, grid=BISECTION_GRID):
    """Roots of P^(alpha, beta)_n, bracketed on a Chebyshev grid and refined"""
    points = np.cos(np.linspace(np.pi, 0, grid))
    values = scipy.special.eval_jacobi(n, alpha, beta, points)
    roots = []
    for index in np.nonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0)[0]:
        roots.append(scipy.optimize.brentq(
            lambda x: scipy.special.eval_jacobi(n, alpha, beta, x),
            points[index], points[index + 1], xtol=BISECTION_TOL))
    return np.array(roots)


def jacobi_min_root_gap(L, d):  # pylint: disable=invalid-name
    """Distance from 1 of the largest root of the Jacobi polynomial of level L"""
    alpha, beta, n = jacobi_parameters(L, d)
    return float(1 - np.max(jacobi_roots(alpha, beta, n)))


def epsilon(L, d):  # pylint: disable=invalid-name
    """Trace distance factor of a site of dimension d extended to L copies"""
    return d / (2 * (d - 1)) * jacobi_min_root_gap(L, d)


@implementer(IConvergenceBound)
class ConvergenceBound:
    """Trace norm radius of every set at given level"""

    def __init__(self, level, bounds):
        self.level = level
        self.bounds = bounds

    def __repr__(self):
        return f'<ConvergenceBound level={self.level}>'

    def __getitem__(self, members):
        return self.bounds[sorted_sites(members)]

    @property
    def worst(self):
        """Largest radius"""
        return max(self.bounds.values(), default=0.0)


def set_bound(dims, level, excluded=()):
    """Trace norm radius of a set with given local dimensions

    Sites listed in `excluded` (by position) are not extended.
    """
    product = math.prod(1 - epsilon(level, d)
                        for index, d in enumerate(dims) if index not in excluded)
    return min(2.0, max(0.0, 2 * (1 - product)))


def prop1_bound(scenario, level, private_sites=None):
    """Trace norm radius of every set of a scenario passing given level

    With `private_sites`, the private site of every set is left out of the
    product, as for the simplified hierarchy; otherwise every site counts.
    """
    private_sites = {sorted_sites(members): site
                     for members, site in (private_sites or {}).items()}
    bounds = {}
    for members in scenario.sets:
        excluded = ()
        if members in private_sites:
            excluded = (members.index(private_sites[members]),)
        bounds[members] = set_bound(scenario.set_dims(members), level, excluded)
    return ConvergenceBound(level, bounds)
