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

"""SepMarg.scenarios module

This module defines marginal scenarios and the graph tools behind finite
scenarios: dependency graphs, chordality test with perfect elimination
ordering, maximal cliques in running intersection order and chordal
completion.

    >>> from sepmarg.scenarios import build_graph, chordal_complete, ring_scenario
    >>> ring = ring_scenario(6)
    >>> graph, clique_map = chordal_complete(ring)
    >>> graph.graph['cliques']
    [(1, 2, 3), (1, 3, 4), (1, 4, 5), (1, 5, 6)]
    >>> clique_map[(1, 6)]
    (1, 5, 6)
"""

import itertools
import logging

import networkx as nx
from zope.interface import implementer
from zope.schema.fieldproperty import FieldProperty

from sepmarg.interfaces import BadIndex, CUSTOM_SCENARIO, IMarginalScenario, \
    InfiniteScenario, LINE_SCENARIO, NotChordal, RING_SCENARIO, STAR_SCENARIO, \
    TI1D_SCENARIO, TI2D_SCENARIO, TI_SCENARIOS


__docformat__ = 'restructuredtext'


LOGGER = logging.getLogger('SepMarg (scenarios)')


def site_key(label):
    """Sort key of site labels, integers first"""
    if isinstance(label, int):
        return 0, label, ''
    return 1, 0, str(label)


def sorted_sites(labels):
    """Site labels sorted with integers first"""
    return tuple(sorted(labels, key=site_key))


@implementer(IMarginalScenario)
class MarginalScenario:
    """Marginal scenario

    A scenario is a family of sets over labelled sites with local dimensions.
    Translation invariant kinds use symbolic sites standing for one window
    of the infinite system.
    """

    kind = FieldProperty(IMarginalScenario['kind'])

    def __init__(self, dims, sets, kind=CUSTOM_SCENARIO, **params):
        self.kind = kind
        self.sites = sorted_sites(dims)
        self.dims = {site: int(dims[site]) for site in self.sites}
        for site, dim in self.dims.items():
            if dim < 1:
                raise BadIndex(f"Site {site!r} has invalid dimension {dim}")
        result = []
        for members in sets:
            members = set(members)
            if not members:
                raise BadIndex("Empty set in scenario")
            unknown = members - set(self.sites)
            if unknown:
                raise BadIndex(f"Unknown sites {sorted_sites(unknown)} in scenario set")
            members = sorted_sites(members)
            if members not in result:
                result.append(members)
        self.sets = result
        covered = set(itertools.chain.from_iterable(result))
        for site in self.sites:
            if site not in covered:
                raise BadIndex(f"Site {site!r} belongs to no set")
        self.params = params

    def __repr__(self):
        return f'<MarginalScenario kind={self.kind} sets={self.sets}>'

    def dim(self, site):
        """Local dimension of a site"""
        try:
            return self.dims[site]
        except KeyError as exc:
            raise BadIndex(f"Unknown site {site!r}") from exc

    def set_dims(self, members):
        """Local dimensions of a set"""
        return tuple(self.dim(site) for site in members)

    @property
    def finite(self):
        """Finite scenario flag"""
        return self.kind not in TI_SCENARIOS

    def overlaps(self):
        """Iterate over pairs of overlapping sets with their common sites"""
        for first, second in itertools.combinations(self.sets, 2):
            common = sorted_sites(set(first) & set(second))
            if common:
                yield first, second, common


#
# Scenario factories
#

def _uniform(count, d):
    return {site: d for site in range(1, count + 1)}


def star_scenario(n, d=2):
    """Star: sets {1, j} for j = 2..n"""
    return MarginalScenario(_uniform(n, d), [(1, j) for j in range(2, n + 1)],
                            kind=STAR_SCENARIO)


def line_scenario(n, d=2):
    """Open line: sets {j, j + 1}"""
    return MarginalScenario(_uniform(n, d), [(j, j + 1) for j in range(1, n)],
                            kind=LINE_SCENARIO)


def ring_scenario(n, d=2):
    """Ring: sets {j, j + 1} and {1, n}"""
    if n < 3:
        raise BadIndex("A ring needs at least 3 sites")
    sets = [(j, j + 1) for j in range(1, n)] + [(1, n)]
    return MarginalScenario(_uniform(n, d), sets, kind=RING_SCENARIO)


def triangle_scenario(d=2):
    """Triangle: the three pairs of three sites"""
    return MarginalScenario(_uniform(3, d), [(1, 2), (2, 3), (1, 3)])


def ti1d_scenario(k, d=2):
    """Window of k consecutive sites of a translation invariant chain"""
    return MarginalScenario(_uniform(k, d), [tuple(range(1, k + 1))], kind=TI1D_SCENARIO,
                            window=k)


def ti2d_scenario(rows, d=2):
    """Plaquette of `rows` x 2 sites of a translation invariant lattice

    Sites are numbered row by row: (1, 1), (1, 2), (2, 1)...
    """
    count = 2 * rows
    return MarginalScenario(_uniform(count, d), [tuple(range(1, count + 1))],
                            kind=TI2D_SCENARIO, rows=rows)


#
# Graphs
#

def build_graph(scenario):
    """Dependency graph of a finite scenario

    :raise InfiniteScenario: for translation invariant scenarios
    """
    if not scenario.finite:
        raise InfiniteScenario(f"Scenario of kind {scenario.kind!r} has no finite "
                               f"dependency graph")
    graph = nx.Graph()
    graph.add_nodes_from(scenario.sites)
    for members in scenario.sets:
        graph.add_edges_from(itertools.combinations(members, 2))
    return graph


def _node_order(graph):
    return {node: index for index, node in enumerate(sorted_sites(graph.nodes))}


def maximum_cardinality_search(graph):
    """Visit order of a maximum cardinality search, lowest label on ties"""
    order = _node_order(graph)
    weight = {node: 0 for node in graph}
    visited = []
    remaining = set(graph.nodes)
    while remaining:
        node = min(remaining, key=lambda n: (-weight[n], order[n]))
        remaining.remove(node)
        visited.append(node)
        for neighbour in graph[node]:
            if neighbour in remaining:
                weight[neighbour] += 1
    return visited


def is_chordal(graph):
    """Chordality test

    Returns a (chordal, peo) tuple; the perfect elimination ordering is the
    reversed maximum cardinality search order, or None if graph is not
    chordal.

    >>> import networkx as nx
    >>> from sepmarg.scenarios import is_chordal
    >>> is_chordal(nx.path_graph([1, 2, 3, 4]))
    (True, [4, 3, 2, 1])
    >>> is_chordal(nx.cycle_graph([1, 2, 3, 4]))
    (False, None)
    """
    peo = list(reversed(maximum_cardinality_search(graph)))
    position = {node: index for index, node in enumerate(peo)}
    for node in peo:
        later = [n for n in graph[node] if position[n] > position[node]]
        if not later:
            continue
        follower = min(later, key=position.get)
        for other in later:
            if other != follower and not graph.has_edge(follower, other):
                return False, None
    return True, peo


def maximal_cliques_chordal(graph, peo=None):
    """Maximal cliques of a chordal graph in running intersection order

    :raise NotChordal: if graph is not chordal
    """
    if peo is None:
        chordal, peo = is_chordal(graph)
        if not chordal:
            raise NotChordal("Graph is not chordal")
    position = {node: index for index, node in enumerate(peo)}
    candidates = []
    for node in reversed(peo):
        later = {n for n in graph[node] if position[n] > position[node]}
        for other in later:
            for third in later:
                if other != third and not graph.has_edge(other, third):
                    raise NotChordal("Given ordering is not a perfect elimination ordering")
        candidates.append(frozenset(later | {node}))
    cliques = []
    for candidate in candidates:
        if any(candidate < other for other in candidates):
            continue
        if candidate in cliques:
            continue
        cliques.append(candidate)
    result = [sorted_sites(clique) for clique in cliques]
    if not running_intersection_ok(result):
        raise NotChordal("Cliques don't satisfy running intersection property")
    return result


def running_intersection_ok(cliques):
    """Check running intersection property of an ordered list of cliques

    >>> from sepmarg.scenarios import running_intersection_ok
    >>> running_intersection_ok([(1, 2), (2, 3), (3, 4)])
    True
    >>> running_intersection_ok([(1, 2), (3, 4), (2, 3)])
    False
    """
    union = set()
    for index, clique in enumerate(cliques):
        clique = set(clique)
        if index:
            common = clique & union
            if not any(common <= set(previous) for previous in cliques[:index]):
                return False
        union |= clique
    return True


def fan_completion(n):
    """Ring of n sites completed by edges from site 1"""
    graph = nx.cycle_graph(range(1, n + 1))
    graph.add_edges_from((1, j) for j in range(3, n))
    return graph


def min_fill_completion(graph):
    """Greedy minimum fill-in chordal completion, lowest label on ties"""
    order = _node_order(graph)
    result = graph.copy()
    work = graph.copy()
    while work.number_of_nodes():
        def fill(node):
            neighbours = list(work[node])
            return sum(1 for a, b in itertools.combinations(neighbours, 2)
                       if not work.has_edge(a, b))
        node = min(work.nodes, key=lambda n: (fill(n), order[n]))
        neighbours = list(work[node])
        for a, b in itertools.combinations(neighbours, 2):
            if not work.has_edge(a, b):
                work.add_edge(a, b)
                result.add_edge(a, b)
        work.remove_node(node)
    return result


def chordal_complete(scenario):
    """Chordal completion of the dependency graph of a scenario

    Returns the completed graph, with its maximal cliques in running
    intersection order stored in `graph.graph['cliques']`, and a mapping
    of every scenario set to the first clique containing it. Rings use the
    fan completion from site 1; other non chordal graphs use the greedy
    minimum fill-in heuristic.
    """
    graph = build_graph(scenario)
    chordal, _peo = is_chordal(graph)
    if not chordal:
        if scenario.kind == RING_SCENARIO and set(graph.nodes) == set(range(1, len(graph) + 1)):
            completed = fan_completion(len(graph))
            completed.add_edges_from(graph.edges)
        else:
            completed = min_fill_completion(graph)
        LOGGER.debug("Chordal completion added %d edges",
                     completed.number_of_edges() - graph.number_of_edges())
        graph = completed
    cliques = maximal_cliques_chordal(graph)
    graph.graph['cliques'] = cliques
    clique_map = {}
    for members in scenario.sets:
        clique_map[members] = next(clique for clique in cliques if set(members) <= set(clique))
    return graph, clique_map


def completed_scenario(scenario):
    """Scenario whose sets are the cliques of the chordal completion"""
    graph, _clique_map = chordal_complete(scenario)
    return MarginalScenario(scenario.dims, graph.graph['cliques'], kind=CUSTOM_SCENARIO)
