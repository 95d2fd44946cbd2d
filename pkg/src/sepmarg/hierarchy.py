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

"""SepMarg.hierarchy module

This module builds the SDP relaxations deciding whether an ensemble of
reduced states can be the marginals of a separable state, and extracts
entanglement witnesses from infeasibility certificates.

Every relaxation is made of blocks: a block holds the extension of one set
of sites, each site carrying a number of copies (the level, or one copy for
the private sites of the simplified hierarchy) and living on the symmetric
subspace of its copies. Blocks are parametrized by the coordinates of a
Hermitian matrix; positivity of the block and of its partial
transpositions are the cones of the instance, while equality rows match
single-copy marginals to the ensemble and make overlapping blocks agree.

When no ensemble is given, the instance is built in "energy" mode: each
block only gets a trace normalization and an objective may be attached to
single-copy marginals.
"""

import itertools
import logging
import math

import numpy as np
from beaker.cache import cache_region
from scipy import sparse
from zope.interface import implementer
from zope.schema import Float
from zope.schema.fieldproperty import FieldProperty

from sepmarg import CACHE_REGION
from sepmarg.ensemble import StateEnsemble, set_key
from sepmarg.interfaces import BadIndex, COMPAT_TOL, HBAR_HIERARCHY, \
    H_HIERARCHY, IHierarchyOptions, INFEASIBLE, IWitness, IncompatibleEnsemble, \
    LINE_HIERARCHY, LINE_SCENARIO, NotPrivate, NotReflectionSymmetric, PRIMAL_INFEASIBLE, \
    REFLECTION_TOL, RING_HIERARCHY, RING_SCENARIO, STATUS_VERDICT, ShapeMismatch, \
    TI1D_HIERARCHY, TI1D_SCENARIO, TI2D_HIERARCHY, TI2D_SCENARIO, UnsupportedTerm, \
    WrongKind, WrongStatus
from sepmarg.linalg import embedded_images, herm_to_vec, real_superop, vec_to_herm
from sepmarg.qops import HermitianOperator, IDENTITY_MAP, SINGLE_COPY_MAP, TRACE_MAP, \
    TRANSPOSE_MAP, multisite_superop, permute_subsystems, ppt_cuts, site_output_dim, \
    site_superop, sym_dim
from sepmarg.scenarios import MarginalScenario, chordal_complete, sorted_sites, \
    ti1d_scenario, ti2d_scenario
from sepmarg.sdp import SdpInstance, extract_farkas, solve


__docformat__ = 'restructuredtext'


LOGGER = logging.getLogger('SepMarg (hierarchy)')

ROW_RANK_TOL = 1e-10


@implementer(IHierarchyOptions)
class HierarchyOptions:
    """Hierarchy options"""

    level = FieldProperty(IHierarchyOptions['level'])
    hierarchy = FieldProperty(IHierarchyOptions['hierarchy'])
    compat_tol = FieldProperty(IHierarchyOptions['compat_tol'])
    extra_cuts = FieldProperty(IHierarchyOptions['extra_cuts'])

    def __init__(self, **kwargs):
        for name, value in kwargs.items():
            if value is None:
                continue
            if isinstance(IHierarchyOptions.get(name), Float):
                value = float(value)
            if name == 'extra_cuts':
                value = tuple(value)
            setattr(self, name, value)


#
# Cached maps
#

@cache_region(CACHE_REGION)
def reduction_map(dims, copies, kinds):
    """Real matrix of a product of per-site maps, in Hermitian coordinates

    Maps the coordinates of a block operator to the coordinates of its
    image; `kinds` gives the map applied to every site (identity, single
    copy reduction or trace).
    """
    superops = [site_superop(d, n, kind) for d, n, kind in zip(dims, copies, kinds)]
    in_dims = [sym_dim(n, d) for d, n in zip(dims, copies)]
    out_dims = [site_output_dim(d, n, kind) for d, n, kind in zip(dims, copies, kinds)]
    superop = multisite_superop(superops, out_dims, in_dims)
    result = real_superop(superop, math.prod(out_dims), math.prod(in_dims))
    result.flags.writeable = False
    return result


@cache_region(CACHE_REGION)
def cone_template(dims, copies, cut):
    """Sparse real embedded images of the block basis through a partial transposition

    An all-zero cut gives the block positivity cone itself.
    """
    superops = [site_superop(d, n, TRANSPOSE_MAP, k) for d, n, k in zip(dims, copies, cut)]
    in_dims = [sym_dim(n, d) for d, n in zip(dims, copies)]
    out_dims = [site_output_dim(d, n, TRANSPOSE_MAP, k) for d, n, k in zip(dims, copies, cut)]
    superop = multisite_superop(superops, out_dims, in_dims)
    return embedded_images(superop, math.prod(out_dims), math.prod(in_dims))


def _row_space(matrix):
    """Orthonormal basis of the row space of a dense matrix"""
    if matrix.size == 0:
        return np.zeros((0, matrix.shape[1]))
    _u, sigma, vt = np.linalg.svd(matrix, full_matrices=False)
    if sigma.size == 0 or sigma[0] == 0:
        return np.zeros((0, matrix.shape[1]))
    rank = int(np.sum(sigma > ROW_RANK_TOL * sigma[0]))
    return vt[:rank]


def coordinates_permutation(size, index):
    """Rows of P(X) - X = 0 for the relabelling X'[i, j] = X[index[i], index[j]]

    `index` must be an involution; rows are returned as a sparse matrix on
    Hermitian coordinates.
    """
    rows, cols = np.triu_indices(size, 1)
    count = rows.shape[0]
    position = {(i, j): n for n, (i, j) in enumerate(zip(rows, cols))}
    source = np.empty(size * size, dtype=int)
    sign = np.ones(size * size)
    source[:size] = index
    for n, (i, j) in enumerate(zip(rows, cols)):
        u, v = index[i], index[j]
        if u < v:
            target = position[u, v]
        else:
            target = position[v, u]
            sign[size + count + n] = -1.0
        source[size + n] = size + target
        source[size + count + n] = size + count + target
    entries = []
    for coordinate in range(size * size):
        origin = source[coordinate]
        if origin == coordinate:
            if sign[coordinate] < 0:
                entries.append(((coordinate, 1.0),))
        elif origin > coordinate:
            entries.append(((origin, sign[coordinate]), (coordinate, -1.0)))
    data, row_index, col_index = [], [], []
    for row, entry in enumerate(entries):
        for col, value in entry:
            data.append(value)
            row_index.append(row)
            col_index.append(col)
    return sparse.csr_matrix((data, (row_index, col_index)), shape=(len(entries), size * size))


#
# Blocks and instance builder
#

class Block:
    """Extension block of a set of sites"""

    def __init__(self, label, sites, dims, copies):
        self.label = label
        self.sites = tuple(sites)
        self.dims = tuple(int(d) for d in dims)
        self.copies = tuple(int(n) for n in copies)
        self.size = math.prod(sym_dim(n, d) for d, n in zip(self.dims, self.copies))
        self.group = None
        self.fixed = None

    def __repr__(self):
        return f'<Block {self.label} copies={self.copies} size={self.size}>'

    @property
    def params(self):
        """Real parameters count"""
        return self.size * self.size

    def marginal_map(self, members):
        """Coordinates map to the single-copy marginal of `members`"""
        kinds = tuple(SINGLE_COPY_MAP if site in members else TRACE_MAP for site in self.sites)
        return reduction_map(self.dims, self.copies, kinds)

    def keep_map(self, keep):
        """Coordinates map to the reduction keeping all copies of `keep` sites"""
        kinds = tuple(IDENTITY_MAP if site in keep else TRACE_MAP for site in self.sites)
        return reduction_map(self.dims, self.copies, kinds)

    def site_positions(self, members):
        """Positions of given sites inside the block"""
        return [self.sites.index(site) for site in members]


class HierarchyBuilder:
    """Relaxation instance builder"""

    def __init__(self, hierarchy, level, extra_cuts=()):
        self.inst = SdpInstance()
        self.blocks = []
        self.extra_cuts = tuple(extra_cuts)
        self.inst.metadata.update(hierarchy=hierarchy, level=level, blocks=[], cuts={},
                                  marginals=[], sets={})

    def block(self, sites):
        """First block containing all given sites"""
        for block in self.blocks:
            if set(sites) <= set(block.sites):
                return block
        raise UnsupportedTerm(f"No block contains sites {set_key(sites)}")

    def _block_cuts(self, block):
        extra = []
        for mapping in self.extra_cuts:
            mapping = dict(mapping)
            if set(mapping) <= set(block.sites):
                extra.append(tuple(int(mapping.get(site, 0)) for site in block.sites))
        return ppt_cuts(block.copies, extra)

    def add_block(self, label, sites, dims, copies):
        """Add a block with its positivity and partial transposition cones"""
        block = Block(label, sites, dims, copies)
        block.group = self.inst.add_group(block.params, label=label)
        self.inst.add_cone(block.group, cone_template(block.dims, block.copies,
                                                      (0,) * len(block.sites)),
                           label=label)
        cuts = self._block_cuts(block)
        for cut in cuts:
            self.inst.add_cone(block.group, cone_template(block.dims, block.copies, cut),
                               label=f'{label} T{cut}')
        self.blocks.append(block)
        self.inst.metadata['blocks'].append({'label': label, 'sites': block.sites,
                                             'copies': block.copies, 'size': block.size})
        self.inst.metadata['cuts'][label] = cuts
        LOGGER.debug("Block %s: size %d, %d cuts", label, block.size, len(cuts))
        return block

    def fix_marginals(self, block, assigned):
        """Match single-copy marginals of the block to given states

        `assigned` is a list of (members, HermitianOperator) pairs; rows of
        all members are orthonormalized together, and the back map needed to
        express multipliers per set is stored in the instance metadata.
        """
        maps = [block.marginal_map(members) for members, _state in assigned]
        matrix = np.vstack(maps)
        rhs = np.concatenate([herm_to_vec(state.matrix) for _members, state in assigned])
        u, sigma, vt = np.linalg.svd(matrix, full_matrices=False)
        rank = int(np.sum(sigma > ROW_RANK_TOL * sigma[0]))
        rows = vt[:rank]
        backmap = u[:, :rank] / sigma[:rank]
        start = len(self.inst.rows)
        self.inst.add_rows({block.group: rows}, backmap.T @ rhs,
                           provenance=[('marginal', block.label, index)
                                       for index in range(rank)])
        block.fixed = rows
        sets = []
        offset = 0
        for members, state in assigned:
            count = state.matrix.shape[0] ** 2
            sets.append((members, offset, count, state.dims))
            offset += count
        self.inst.metadata['marginals'].append({'block': block.label,
                                                'rows': (start, start + rank),
                                                'backmap': backmap,
                                                'sets': sets})

    def fix_trace(self, block):
        """Unit trace row of a block"""
        row = np.zeros(block.params)
        row[:block.size] = 1.0
        self.inst.add_rows({block.group: row[None]}, [1.0],
                           provenance=[('trace', block.label, 0)])
        block.fixed = row[None] / np.sqrt(block.size)

    def link(self, first, second, common):
        """Equate the reductions of two blocks on their common sites

        Functionals already fixed on both sides by marginal or trace rows
        are projected out.
        """
        left = first.keep_map(common)
        right = second.keep_map(common)
        projected = []
        for block, mapping in ((first, left), (second, right)):
            if block.fixed is None:
                projected.append(mapping)
            else:
                projected.append(mapping - (mapping @ block.fixed.T) @ block.fixed)
        u, sigma, _vt = np.linalg.svd(np.hstack(projected), full_matrices=False)
        if sigma.size == 0 or sigma[0] <= ROW_RANK_TOL:
            return 0
        rank = int(np.sum(sigma > ROW_RANK_TOL * max(1.0, sigma[0])))
        basis = u[:, :rank].T
        self.inst.add_rows({first.group: basis @ left, second.group: -basis @ right},
                           np.zeros(rank),
                           provenance=[('overlap', first.label, second.label, set_key(common),
                                        index) for index in range(rank)])
        return rank

    def link_all(self):
        """Overlap rows between every pair of blocks, skipping implied links"""
        pairs = []
        for first, second in itertools.combinations(self.blocks, 2):
            common = sorted_sites(set(first.sites) & set(second.sites))
            if common:
                pairs.append((first, second, common))
        commons = sorted({common for _first, _second, common in pairs},
                         key=lambda c: (-len(c), set_key(c)))
        parents = {common: {block.label: block.label for block in self.blocks}
                   for common in commons}

        def find(common, label):
            tree = parents[common]
            while tree[label] != label:
                tree[label] = tree[tree[label]]
                label = tree[label]
            return label

        links = 0
        for common in commons:
            for first, second, shared in pairs:
                if shared != common:
                    continue
                if find(common, first.label) == find(common, second.label):
                    continue
                self.link(first, second, common)
                links += 1
                for other in commons:
                    if set(other) <= set(common):
                        tree = parents[other]
                        tree[find(other, first.label)] = find(other, second.label)
        LOGGER.debug("%d overlap links between %d blocks", links, len(self.blocks))

    def homogeneous(self, block, matrix, kind):
        """Add rows `matrix` x = 0 on a block"""
        rows = matrix if sparse.issparse(matrix) else _row_space(np.asarray(matrix))
        if rows.shape[0] == 0:
            return
        self.inst.add_rows({block.group: rows}, np.zeros(rows.shape[0]),
                           provenance=[(kind, block.label, index)
                                       for index in range(rows.shape[0])])

    def add_objective(self, objective):
        """Attach sum of tr(h_I rho_I) over single-copy marginals"""
        for members, operator in (objective or {}).items():
            members = sorted_sites(members)
            block = self.block(members)
            matrix = np.asarray(getattr(operator, 'matrix', operator), dtype=complex)
            dims = tuple(block.dims[index] for index in block.site_positions(members))
            operator = HermitianOperator(matrix, dims, name=f'objective {set_key(members)}')
            self.inst.set_objective(block.group,
                                    block.marginal_map(members).T @ herm_to_vec(operator.matrix))


#
# Builders
#

def _split_source(source):
    if isinstance(source, StateEnsemble):
        return source.scenario, source
    if isinstance(source, MarginalScenario):
        return source, None
    raise ShapeMismatch(f"Expected a scenario or an ensemble, got {source!r}")


def _build_blocks(hierarchy, scenario, ensemble, level, block_sets, copies_of, objective,
                  extra_cuts, assignment=None):
    builder = HierarchyBuilder(hierarchy, level, extra_cuts)
    builder.inst.metadata['scenario'] = scenario
    for members in block_sets:
        copies = tuple(copies_of(members, site) for site in members)
        block = builder.add_block(set_key(members), members, scenario.set_dims(members), copies)
        hosted = assignment[members] if assignment is not None else [members]
        if ensemble is not None and hosted:
            builder.fix_marginals(block, [(I, ensemble[I]) for I in hosted])
        else:
            builder.fix_trace(block)
    builder.link_all()
    builder.add_objective(objective)
    LOGGER.info("%s relaxation at level %d: %d blocks, %d rows", hierarchy, level,
                len(builder.blocks), len(builder.inst.rows))
    return builder.inst


def build_H(source, level=1, objective=None, extra_cuts=()):  # pylint: disable=invalid-name
    """Symmetric extension hierarchy with partial transpositions

    `source` is a StateEnsemble, or a MarginalScenario for energy
    minimization with an `objective` mapping sets to Hermitian operators.
    """
    scenario, ensemble = _split_source(source)
    return _build_blocks(H_HIERARCHY, scenario, ensemble, level, scenario.sets,
                         lambda members, site: level, objective, extra_cuts)


def build_Hbar(source, level=1, private_sites=None, objective=None,  # pylint: disable=invalid-name
               extra_cuts=()):
    """Simplified hierarchy, where one private site per set is not extended

    :raise NotPrivate: if a private site belongs to another set
    """
    scenario, ensemble = _split_source(source)
    private_sites = {sorted_sites(members): site
                     for members, site in (private_sites or {}).items()}
    for members, site in private_sites.items():
        if members not in scenario.sets:
            raise BadIndex(f"Unknown set {set_key(members)}")
        if site not in members:
            raise BadIndex(f"Private site {site!r} doesn't belong to set {set_key(members)}")
        for other in scenario.sets:
            if other != members and site in other:
                raise NotPrivate(f"Site {site!r} of set {set_key(members)} also belongs to "
                                 f"set {set_key(other)}")
    inst = _build_blocks(HBAR_HIERARCHY, scenario, ensemble, level, scenario.sets,
                         lambda members, site: 1 if private_sites.get(members) == site
                         else level,
                         objective, extra_cuts)
    inst.metadata['private_sites'] = private_sites
    return inst


def build_line(source, level=1, objective=None, extra_cuts=()):
    """Open line hierarchy

    :raise WrongKind: if scenario is not a line
    """
    scenario, ensemble = _split_source(source)
    if scenario.kind != LINE_SCENARIO:
        raise WrongKind(f"Expected a line scenario, got {scenario.kind!r}")
    return _build_blocks(LINE_HIERARCHY, scenario, ensemble, level, scenario.sets,
                         lambda members, site: level, objective, extra_cuts)


def build_ring(source, level=1, objective=None, extra_cuts=()):
    """Ring hierarchy, built on the cliques of the fan completion

    :raise WrongKind: if scenario is not a ring
    """
    scenario, ensemble = _split_source(source)
    if scenario.kind != RING_SCENARIO:
        raise WrongKind(f"Expected a ring scenario, got {scenario.kind!r}")
    graph, clique_map = chordal_complete(scenario)
    cliques = graph.graph['cliques']
    assignment = {clique: [members for members in scenario.sets
                           if clique_map[members] == clique]
                  for clique in cliques}
    inst = _build_blocks(RING_HIERARCHY, scenario, ensemble, level, cliques,
                         lambda members, site: level, objective, extra_cuts, assignment)
    inst.metadata['cliques'] = cliques
    return inst


def _uniform_state(state, count=None):
    operator = state if isinstance(state, HermitianOperator) else None
    if operator is None:
        raise ShapeMismatch("Expected a HermitianOperator with subsystem dimensions")
    dims = operator.dims
    if len(set(dims)) != 1 or (count is not None and len(dims) != count):
        raise ShapeMismatch(f"Expected a window of identical sites, got dimensions {dims}")
    return operator, len(dims), dims[0]


def _ti_source(state, window, dim, tol):
    if state is None:
        if window is None or dim is None:
            raise ShapeMismatch("Window size and local dimension are required without state")
        return None, window, dim
    operator, count, d = _uniform_state(state)
    if not operator.is_state(tol):
        raise IncompatibleEnsemble("Plaquette operator is not a density matrix")
    return operator, count, d


def build_ti1d(state=None, level=1, window=None, dim=None, objective=None, extra_cuts=(),
               tol=COMPAT_TOL):
    """Translation invariant chain hierarchy

    `state` is the reduced state of k consecutive sites; without state, an
    energy instance is built for a window of `window` sites of dimension
    `dim`. The extension must give the same reduction when its first or
    its last site is traced out.
    """
    state, count, d = _ti_source(state, window, dim, tol)
    scenario = ti1d_scenario(count, d)
    members = scenario.sets[0]
    builder = HierarchyBuilder(TI1D_HIERARCHY, level, extra_cuts)
    builder.inst.metadata['scenario'] = scenario
    block = builder.add_block(set_key(members), members, (d,) * count, (level,) * count)
    if state is not None:
        builder.fix_marginals(block, [(members, state)])
    else:
        builder.fix_trace(block)
    if count > 1:
        builder.homogeneous(block, block.keep_map(members[1:]) - block.keep_map(members[:-1]),
                            'lti')
    builder.add_objective(objective)
    return builder.inst


def column_swap(count):
    """Site order exchanging the two columns of a plaquette"""
    return [index ^ 1 for index in range(count)]


def build_ti2d_reflect(state=None, level=1, rows=None, dim=None, objective=None,
                       extra_cuts=(), tol=COMPAT_TOL):
    """Translation invariant lattice hierarchy with vertical reflection symmetry

    `state` lives on a plaquette of `rows` x 2 sites numbered row by row.
    The extension is invariant under the exchange of columns, and gives the
    same reduction when its first or its last row is traced out.

    :raise NotReflectionSymmetric: if state is not invariant under the
        exchange of columns
    """
    state, count, d = _ti_source(state, None if rows is None else 2 * rows, dim, tol)
    if count % 2:
        raise ShapeMismatch("A plaquette has two columns")
    order = column_swap(count)
    if state is not None:
        swapped = permute_subsystems(state, order)
        error = np.linalg.norm(swapped.matrix - state.matrix)
        if error > REFLECTION_TOL * max(1.0, np.linalg.norm(state.matrix)):
            raise NotReflectionSymmetric(f"Plaquette state is not symmetric under columns "
                                         f"exchange (error {error:.3e})")
    scenario = ti2d_scenario(count // 2, d)
    members = scenario.sets[0]
    builder = HierarchyBuilder(TI2D_HIERARCHY, level, extra_cuts)
    builder.inst.metadata['scenario'] = scenario
    block = builder.add_block(set_key(members), members, (d,) * count, (level,) * count)
    if state is not None:
        builder.fix_marginals(block, [(members, state)])
    else:
        builder.fix_trace(block)
    if count > 2:
        builder.homogeneous(block, block.keep_map(members[2:]) - block.keep_map(members[:-2]),
                            'lti')
    local = sym_dim(level, d)
    index = np.arange(block.size).reshape((local,) * count).transpose(order).reshape(-1)
    builder.homogeneous(block, coordinates_permutation(block.size, index), 'swap')
    builder.add_objective(objective)
    return builder.inst


def build_hierarchy(source, options=None, private_sites=None, objective=None):
    """Build the relaxation selected by hierarchy options"""
    options = options or HierarchyOptions()
    level, cuts = options.level, options.extra_cuts or ()
    builders = {
        H_HIERARCHY: lambda: build_H(source, level, objective, cuts),
        HBAR_HIERARCHY: lambda: build_Hbar(source, level, private_sites, objective, cuts),
        LINE_HIERARCHY: lambda: build_line(source, level, objective, cuts),
        RING_HIERARCHY: lambda: build_ring(source, level, objective, cuts)
    }
    if options.hierarchy in builders:
        return builders[options.hierarchy]()
    scenario, ensemble = _split_source(source)
    state = None
    if ensemble is not None:
        state = ensemble[scenario.sets[0]]
    members = scenario.sets[0]
    if options.hierarchy == TI1D_HIERARCHY:
        if scenario.kind != TI1D_SCENARIO:
            raise WrongKind(f"Expected a translation invariant chain, got {scenario.kind!r}")
        return build_ti1d(state, level, len(members), scenario.dim(members[0]), objective,
                          cuts, options.compat_tol)
    if scenario.kind != TI2D_SCENARIO:
        raise WrongKind(f"Expected a translation invariant plaquette, got {scenario.kind!r}")
    return build_ti2d_reflect(state, level, len(members) // 2, scenario.dim(members[0]),
                              objective, cuts, options.compat_tol)


#
# Decisions and witnesses
#

def check_instance(inst, solver_options=None):
    """Solve a feasibility instance, returning the verdict and the solution"""
    sol = solve(inst, solver_options)
    return STATUS_VERDICT[sol.status], sol


def plaquette_reflections(dimension):
    """Site orders of the reflections of a {1, 2}^D hypercube plaquette"""
    count = 2 ** dimension
    result = []
    for axis in range(dimension):
        bit = 1 << (dimension - 1 - axis)
        result.append([index ^ bit for index in range(count)])
    return result


def plaquette_trivial_test(state, dimension, level=1, solver_options=None):
    """Decide a hypercube plaquette marginal problem under reflection symmetry

    The plaquette state must be invariant under the reflection of every
    axis, and the plaquette itself must pass the full separability test of
    given level.
    """
    operator = state if isinstance(state, HermitianOperator) else \
        HermitianOperator(state, (2,) * 2 ** dimension)
    if len(operator.dims) != 2 ** dimension:
        raise ShapeMismatch(f"Expected {2 ** dimension} sites, got {len(operator.dims)}")
    for order in plaquette_reflections(dimension):
        error = np.linalg.norm(permute_subsystems(operator, order).matrix - operator.matrix)
        if error > REFLECTION_TOL * max(1.0, np.linalg.norm(operator.matrix)):
            LOGGER.info("Plaquette is not reflection symmetric (error %.3e)", error)
            return INFEASIBLE
    sites = tuple(range(1, len(operator.dims) + 1))
    scenario = MarginalScenario(dict(zip(sites, operator.dims)), [sites])
    verdict, _sol = check_instance(build_H(StateEnsemble(scenario, {sites: operator}), level),
                                   solver_options)
    return verdict


@implementer(IWitness)
class Witness:
    """Entanglement witness sum_I tr(W_I rho_I) >= offset"""

    def __init__(self, terms, offset=0.0, violation=0.0, hierarchy=None, level=None):
        self.terms = terms
        self.offset = offset
        self.violation = violation
        self.hierarchy = hierarchy
        self.level = level

    def __repr__(self):
        return f'<Witness sets={list(self.terms)} violation={self.violation:.3e}>'

    def evaluate(self, ensemble):
        """Witness value on an ensemble, minus offset"""
        value = 0.0
        for members, term in self.terms.items():
            state = ensemble[members]
            value += float(np.trace(term.matrix @ state.matrix).real)
        return value - self.offset

    def to_dict(self):
        """Serializable mapping, with matrices as row-major [re, im] pairs"""
        return {
            'hierarchy': self.hierarchy,
            'level': self.level,
            'offset': float(self.offset),
            'violation': float(self.violation),
            'dims': {set_key(members): list(term.dims) for members, term in self.terms.items()},
            'terms': {set_key(members): [[[float(value.real), float(value.imag)] for value in row]
                                          for row in term.matrix]
                      for members, term in self.terms.items()}
        }


def extract_witness(inst, sol, ensemble=None):
    """Entanglement witness from an infeasibility certificate

    Multipliers of the marginal rows give one operator per set; the witness
    is nonnegative on every ensemble passing the relaxation.

    :raise WrongStatus: if solution is not primal infeasible
    """
    if sol.status != PRIMAL_INFEASIBLE:
        raise WrongStatus(f"Can't extract a witness from a {sol.status!r} solution")
    ray = extract_farkas(sol, inst)
    terms = {}
    for entry in inst.metadata.get('marginals', ()):
        start, stop = entry['rows']
        multipliers = entry['backmap'] @ ray.y[start:stop]
        for members, offset, count, dims in entry['sets']:
            size = int(round(math.sqrt(count)))
            matrix = -vec_to_herm(multipliers[offset:offset + count], size)
            terms[members] = HermitianOperator(matrix, dims, name=f'witness {set_key(members)}')
    if not terms:
        raise WrongStatus("Instance has no marginal rows to build a witness from")
    witness = Witness(terms, 0.0, 1.0, inst.metadata.get('hierarchy'),
                      inst.metadata.get('level'))
    if ensemble is not None:
        witness.violation = -witness.evaluate(ensemble)
    LOGGER.debug("Witness violation: %.6e", witness.violation)
    return witness
