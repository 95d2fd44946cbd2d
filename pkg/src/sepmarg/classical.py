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

"""SepMarg.classical module

This module handles the classical marginal problem on discrete variables:
marginals, local compatibility, gluing of marginals over chordal scenarios
and exhaustive search of a global extension.

    >>> from sepmarg.classical import DiscreteDistribution, marginalize
    >>> p = DiscreteDistribution((1, 2), (2, 2), [[0.5, 0.], [0., 0.5]])
    >>> marginalize(p, [1]).table.tolist()
    [0.5, 0.5]
"""

import itertools
import logging

import numpy as np
from scipy import sparse
from zope.interface import implementer

from sepmarg.interfaces import AlphabetMismatch, BadIndex, CLASSICAL_TOL, \
    IDiscreteDistribution, IllFormed, Incompatible, NoConvergence, NotRunningIntersection, \
    OPTIMAL, PRIMAL_INFEASIBLE, ShapeMismatch, TooLarge
from sepmarg.scenarios import running_intersection_ok, sorted_sites
from sepmarg.sdp import SdpInstance, solve


__docformat__ = 'restructuredtext'


LOGGER = logging.getLogger('SepMarg (classical)')

NORMALIZATION_TOL = 1e-12
BRUTEFORCE_MAX_SITES = 12
BRUTEFORCE_MAX_ALPHABET = 3


@implementer(IDiscreteDistribution)
class DiscreteDistribution:
    """Probability distribution of discrete variables

    The table has one axis per variable, in the order of `variables`.
    """

    def __init__(self, variables, sizes, table, tol=NORMALIZATION_TOL):
        self.variables = tuple(variables)
        self.sizes = tuple(int(size) for size in sizes)
        if len(self.variables) != len(self.sizes) or \
                len(set(self.variables)) != len(self.variables):
            raise ShapeMismatch(f"Variables {self.variables} don't match sizes {self.sizes}")
        table = np.asarray(table, dtype=float)
        if table.size != int(np.prod(self.sizes)):
            raise ShapeMismatch(f"Table of size {table.size} doesn't match sizes {self.sizes}")
        self.table = table.reshape(self.sizes)
        if np.any(self.table < -tol):
            raise IllFormed("Probabilities must be nonnegative")
        if abs(self.table.sum() - 1) > max(tol, NORMALIZATION_TOL * table.size):
            raise IllFormed(f"Probabilities sum to {self.table.sum()!r}")

    def __repr__(self):
        return f'<DiscreteDistribution variables={self.variables}>'

    def size_of(self, variable):
        """Alphabet size of given variable"""
        try:
            return self.sizes[self.variables.index(variable)]
        except ValueError as exc:
            raise BadIndex(f"Unknown variable {variable!r}") from exc

    def transposed(self, variables):
        """Same distribution with variables in another order"""
        variables = tuple(variables)
        order = [self.variables.index(variable) for variable in variables]
        return DiscreteDistribution(variables, [self.sizes[index] for index in order],
                                    self.table.transpose(order))

    @classmethod
    def random(cls, variables, sizes, rng=None, concentration=1.0):
        """Dirichlet sample over the joint alphabet"""
        rng = np.random.default_rng(rng)
        count = int(np.prod(sizes))
        table = rng.dirichlet(np.full(count, concentration))
        return cls(variables, sizes, table)

    @classmethod
    def product(cls, distributions):
        """Product of independent distributions"""
        variables, sizes, table = (), (), np.ones(())
        for distribution in distributions:
            variables += distribution.variables
            sizes += distribution.sizes
            table = np.multiply.outer(table, distribution.table)
        return cls(variables, sizes, table)


def marginalize(p, keep):
    """Marginal distribution of variables `keep`, in sorted order

    :raise BadIndex: if a variable is unknown
    """
    keep = sorted_sites(set(keep))
    unknown = set(keep) - set(p.variables)
    if unknown:
        raise BadIndex(f"Unknown variables {sorted_sites(unknown)}")
    axes = tuple(index for index, variable in enumerate(p.variables) if variable not in keep)
    table = p.table.sum(axis=axes)
    remaining = [variable for variable in p.variables if variable in keep]
    order = [remaining.index(variable) for variable in keep]
    return DiscreteDistribution(keep, [p.size_of(variable) for variable in keep],
                                np.transpose(table, order))


def _alphabets(distributions):
    sizes = {}
    for distribution in distributions:
        for variable, size in zip(distribution.variables, distribution.sizes):
            if sizes.setdefault(variable, size) != size:
                raise AlphabetMismatch(f"Variable {variable!r} has alphabet sizes "
                                       f"{sizes[variable]} and {size}")
    return sizes


def check_local_compat(ps, tol=CLASSICAL_TOL):
    """Check that overlapping marginals agree

    Returns a (compatible, maximal deviation) tuple.

    :raise AlphabetMismatch: if a variable has several alphabet sizes
    """
    distributions = list(ps.values()) if isinstance(ps, dict) else list(ps)
    _alphabets(distributions)
    deviation = 0.0
    for first, second in itertools.combinations(distributions, 2):
        common = set(first.variables) & set(second.variables)
        if not common:
            continue
        left = marginalize(first, common).table
        right = marginalize(second, common).table
        deviation = max(deviation, float(np.max(np.abs(left - right))))
    return deviation <= tol, deviation


def _expand(p, variables, sizes):
    """Table of p broadcast over the axes of `variables`"""
    own = [variable for variable in variables if variable in p.variables]
    table = p.transposed(own).table if own else p.table
    shape = [sizes[variable] if variable in p.variables else 1 for variable in variables]
    return table.reshape(shape)


def glue_chordal(ps, tol=CLASSICAL_TOL):
    """Global distribution extending marginals given in running intersection order

    Every step multiplies the current distribution by the next clique
    marginal and divides by the marginal of their intersection; 0/0 is
    taken as 0.

    :raise NotRunningIntersection: if cliques are not in running intersection order
    :raise Incompatible: if marginals are not locally compatible
    """
    distributions = list(ps.values()) if isinstance(ps, dict) else list(ps)
    if not distributions:
        raise ShapeMismatch("No marginal to glue")
    if not running_intersection_ok([p.variables for p in distributions]):
        raise NotRunningIntersection("Cliques are not in running intersection order")
    compatible, deviation = check_local_compat(distributions, tol)
    if not compatible:
        raise Incompatible(f"Marginals are not locally compatible (deviation {deviation:.3e})")
    sizes = _alphabets(distributions)
    result = distributions[0]
    for clique in distributions[1:]:
        variables = result.variables + tuple(variable for variable in clique.variables
                                             if variable not in result.variables)
        common = set(result.variables) & set(clique.variables)
        numerator = _expand(result, variables, sizes) * _expand(clique, variables, sizes)
        if common:
            denominator = np.broadcast_to(_expand(marginalize(clique, common), variables, sizes),
                                          numerator.shape)
            table = np.divide(numerator, denominator, out=np.zeros_like(numerator),
                              where=denominator > 0)
        else:
            table = numerator
        table /= table.sum()
        result = DiscreteDistribution(variables, [sizes[variable] for variable in variables],
                                      table)
    return result.transposed(sorted_sites(result.variables))


def marginalization_matrix(variables, sizes, keep):
    """Sparse matrix mapping a joint table to the marginal table of `keep`"""
    positions = [variables.index(variable) for variable in keep]
    indices = np.indices(sizes).reshape(len(sizes), -1)
    marginal_sizes = [sizes[position] for position in positions]
    if positions:
        rows = np.ravel_multi_index(indices[positions], marginal_sizes)
    else:
        rows = np.zeros(indices.shape[1], dtype=int)
    count = int(np.prod(marginal_sizes))
    return sparse.csr_matrix((np.ones(indices.shape[1]), (rows, np.arange(indices.shape[1]))),
                             shape=(count, indices.shape[1]))


def has_global_extension_bruteforce(ps, max_sites=BRUTEFORCE_MAX_SITES,
                                    max_alphabet=BRUTEFORCE_MAX_ALPHABET, solver_options=None):
    """Check existence of a global distribution with given marginals

    The joint table is the variable of a linear program, solved as an SDP
    with a diagonal cone.

    :raise TooLarge: if the joint alphabet exceeds the given limits
    """
    distributions = list(ps.values()) if isinstance(ps, dict) else list(ps)
    alphabets = _alphabets(distributions)
    variables = sorted_sites(alphabets)
    sizes = [alphabets[variable] for variable in variables]
    if len(variables) > max_sites or max(sizes, default=1) > max_alphabet:
        raise TooLarge(f"{len(variables)} variables with alphabets up to {max(sizes)} "
                       f"exceed brute force limits")
    inst = SdpInstance()
    group = inst.add_group(int(np.prod(sizes)), label='joint')
    inst.add_diagonal_cone(group, label='joint')
    for p in distributions:
        keep = sorted_sites(p.variables)
        inst.add_rows({group: marginalization_matrix(list(variables), sizes, keep)},
                      p.transposed(keep).table.reshape(-1),
                      provenance=[('marginal', ','.join(map(str, keep)), index)
                                  for index in range(p.table.size)])
    sol = solve(inst, solver_options)
    if sol.status not in (OPTIMAL, PRIMAL_INFEASIBLE):
        raise NoConvergence(f"Linear program ended with status {sol.status!r}")
    LOGGER.debug("Brute force extension over %d variables: %s", len(variables), sol.status)
    return sol.status == OPTIMAL


def check_lti_1d(p, tol=CLASSICAL_TOL):
    """Check local translation invariance of a distribution of consecutive sites

    The marginal of the first k - 1 sites must equal the marginal of the
    last k - 1 sites.
    """
    if len(p.variables) < 2:
        return True
    if len(set(p.sizes)) != 1:
        return False
    first = p.table.sum(axis=-1)
    last = p.table.sum(axis=0)
    return bool(np.max(np.abs(first - last)) <= tol)


def clique_marginals(p, cliques):
    """Marginals of a distribution on every clique"""
    return {tuple(clique): marginalize(p, clique) for clique in cliques}


def triangle_anticorrelated():
    """Locally compatible but globally inconsistent triangle of perfect anticorrelations"""
    table = [[0.0, 0.5], [0.5, 0.0]]
    return {pair: DiscreteDistribution(pair, (2, 2), table)
            for pair in ((1, 2), (2, 3), (1, 3))}
