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

"""SepMarg.qops module

This module provides quantum operator algebra on multipartite spaces: tensor
products, partial traces and transpositions, symmetric subspace isometries,
and the per-site superoperators from which relaxation blocks are assembled.

Subsystems are indexed from 0, the first tensor factor being the slowest
varying index:

    >>> import numpy as np
    >>> from sepmarg.qops import HermitianOperator, kron
    >>> z = HermitianOperator(np.diag([1., -1.]))
    >>> kron(z, z).matrix.diagonal().real.tolist()
    [1.0, -1.0, -1.0, 1.0]
    >>> kron(z, z).dims
    (2, 2)
"""

import itertools
import math
from functools import reduce

import numpy as np
from beaker.cache import cache_region
from scipy import sparse
from scipy.special import comb
from zope.interface import implementer

from sepmarg import CACHE_REGION
from sepmarg.interfaces import BadIndex, HERMITIAN_TOL, IHermitianOperator, STATE_TOL, \
    ShapeMismatch
from sepmarg.linalg import as_matrix, check_hermitian, min_eigenvalue


__docformat__ = 'restructuredtext'


@implementer(IHermitianOperator)
class HermitianOperator:
    """Dense Hermitian operator tagged with its subsystem dimensions"""

    def __init__(self, matrix, dims=None, tol=HERMITIAN_TOL, name='operator'):
        matrix = as_matrix(matrix)
        if dims is None:
            dims = (matrix.shape[0],)
        dims = tuple(int(d) for d in dims)
        if any(d < 1 for d in dims) or math.prod(dims) != matrix.shape[0]:
            raise ShapeMismatch(f"{name}: dimensions {dims} don't match matrix "
                                f"of size {matrix.shape[0]}")
        self.matrix = check_hermitian(matrix, tol, name)
        self.dims = dims

    def __repr__(self):
        return f'<HermitianOperator dims={self.dims}>'

    @property
    def size(self):
        """Matrix rows count"""
        return self.matrix.shape[0]

    def trace(self):
        """Real trace"""
        return float(np.trace(self.matrix).real)

    def min_eigenvalue(self):
        """Smallest eigenvalue"""
        return min_eigenvalue(self.matrix)

    def is_state(self, tol=STATE_TOL):
        """Check for unit trace and positive semidefiniteness"""
        return abs(self.trace() - 1) <= tol and self.min_eigenvalue() >= -tol

    def expectation(self, observable):
        """Real expectation value tr(rho O)"""
        observable = getattr(observable, 'matrix', observable)
        return float(np.trace(self.matrix @ np.asarray(observable)).real)


def _check_indices(indices, count):
    indices = tuple(indices)
    for index in indices:
        if not 0 <= index < count:
            raise BadIndex(f"Subsystem index {index} out of range 0..{count - 1}")
    return sorted(set(indices))


#
# Array level primitives
#

def partial_trace_matrix(matrix, dims, keep):
    """Trace out every subsystem not listed in `keep`, order of kept ones preserved"""
    dims = tuple(dims)
    count = len(dims)
    keep = _check_indices(keep, count)
    tensor = np.asarray(matrix).reshape(dims + dims)
    row_labels = list(range(count))
    col_labels = [index if index not in keep else count + index for index in range(count)]
    out_labels = keep + [count + index for index in keep]
    size = math.prod(dims[index] for index in keep)
    return np.einsum(tensor, row_labels + col_labels, out_labels).reshape(size, size)


def partial_transpose_matrix(matrix, dims, flip):
    """Transpose the listed tensor factors"""
    dims = tuple(dims)
    count = len(dims)
    flip = _check_indices(flip, count)
    tensor = np.asarray(matrix).reshape(dims + dims)
    axes = list(range(2 * count))
    for index in flip:
        axes[index], axes[count + index] = count + index, index
    size = math.prod(dims)
    return tensor.transpose(axes).reshape(size, size)


def permute_matrix(matrix, dims, order):
    """Reorder tensor factors; new factor i is old factor order[i]"""
    dims = tuple(dims)
    count = len(dims)
    order = list(order)
    if sorted(order) != list(range(count)):
        raise BadIndex(f"{order} is not a permutation of {count} subsystems")
    tensor = np.asarray(matrix).reshape(dims + dims)
    size = math.prod(dims)
    return tensor.transpose(order + [count + index for index in order]).reshape(size, size)


#
# Operator level operations
#

def kron(a, b):
    """Tensor product of two Hermitian operators"""
    return HermitianOperator(np.kron(a.matrix, b.matrix), a.dims + b.dims)


def partial_trace(m, keep):
    """Reduced operator on subsystems `keep`

    >>> import numpy as np
    >>> from sepmarg.qops import HermitianOperator, partial_trace
    >>> phi = np.zeros(4); phi[[0, 3]] = 1 / np.sqrt(2)
    >>> bell = HermitianOperator(np.outer(phi, phi), (2, 2))
    >>> np.round(partial_trace(bell, [0]).matrix.real, 12).tolist()
    [[0.5, 0.0], [0.0, 0.5]]
    """
    keep = _check_indices(keep, len(m.dims))
    matrix = partial_trace_matrix(m.matrix, m.dims, keep)
    return HermitianOperator(matrix, tuple(m.dims[index] for index in keep))


def partial_transpose(m, flip):
    """Partial transposition of subsystems `flip`"""
    return HermitianOperator(partial_transpose_matrix(m.matrix, m.dims, flip), m.dims)


def permute_subsystems(m, order):
    """Operator with reordered tensor factors"""
    matrix = permute_matrix(m.matrix, m.dims, order)
    return HermitianOperator(matrix, tuple(m.dims[index] for index in order))


#
# Symmetric subspace
#

def sym_dim(L, d):  # pylint: disable=invalid-name
    """Dimension of the symmetric subspace of L copies of C^d

    >>> from sepmarg.qops import sym_dim
    >>> sym_dim(2, 2), sym_dim(3, 2), sym_dim(2, 3)
    (3, 4, 6)
    """
    return int(comb(L + d - 1, d - 1, exact=True))


@cache_region(CACHE_REGION)
def sym_isometry(L, d):  # pylint: disable=invalid-name
    """Isometry from the occupation number basis into (C^d)^L

    Columns are indexed by sorted L-tuples of symbols; each column is the
    normalized sum of the distinct permutations of its tuple. The returned
    array is read-only.
    """
    multisets = list(itertools.combinations_with_replacement(range(d), L))
    columns = {multiset: index for index, multiset in enumerate(multisets)}
    norms = {}
    for multiset in multisets:
        counts = np.bincount(multiset, minlength=d)
        permutations = math.factorial(L) // math.prod(math.factorial(c) for c in counts)
        norms[multiset] = 1 / math.sqrt(permutations)
    isometry = np.zeros((d ** L, len(multisets)))
    for row, symbols in enumerate(itertools.product(range(d), repeat=L)):
        multiset = tuple(sorted(symbols))
        isometry[row, columns[multiset]] = norms[multiset]
    isometry.flags.writeable = False
    return isometry


def lift_to_sym(op, isometry):
    """Compression V^H O V of an operator onto the symmetric subspace"""
    matrix = np.asarray(getattr(op, 'matrix', op))
    if matrix.shape != (isometry.shape[0], isometry.shape[0]):
        raise ShapeMismatch(f"Operator of shape {matrix.shape} can't be compressed "
                            f"by an isometry of shape {isometry.shape}")
    return isometry.conj().T @ matrix @ isometry


def expand_from_sym(op, isometry):
    """Embedding V O V^H of a symmetric subspace operator"""
    matrix = np.asarray(getattr(op, 'matrix', op))
    if matrix.shape != (isometry.shape[1], isometry.shape[1]):
        raise ShapeMismatch(f"Operator of shape {matrix.shape} doesn't act on the "
                            f"range of an isometry of shape {isometry.shape}")
    return isometry @ matrix @ isometry.conj().T


#
# Partial transposition cuts
#

def ppt_cuts(copies, extra=()):
    """Canonical partial transposition cuts of a block

    `copies` gives the copy count of every site of the block. A cut is a
    tuple giving, per site, how many leading copies are transposed. Single
    and two-site cuts with k in 1..n//2 or k == n are generated; a cut and
    its complement give the same spectrum and are merged.

    >>> from sepmarg.qops import ppt_cuts
    >>> ppt_cuts((1, 1))
    [(1, 0)]
    >>> ppt_cuts((2, 2))
    [(1, 0), (2, 0), (0, 1), (1, 1)]
    >>> ppt_cuts((2, 1))
    [(1, 0), (2, 0)]
    """
    copies = tuple(copies)
    options = [sorted(set(range(1, n // 2 + 1)) | {n}) for n in copies]
    candidates = []
    for site, choices in enumerate(options):
        for k in choices:
            cut = [0] * len(copies)
            cut[site] = k
            candidates.append(tuple(cut))
    for first, second in itertools.combinations(range(len(copies)), 2):
        for k, l in itertools.product(options[first], options[second]):
            cut = [0] * len(copies)
            cut[first], cut[second] = k, l
            candidates.append(tuple(cut))
    for cut in extra:
        cut = tuple(int(k) for k in cut)
        if len(cut) != len(copies) or any(not 0 <= k <= n for k, n in zip(cut, copies)):
            raise BadIndex(f"Invalid cut {cut} for copies {copies}")
        candidates.append(cut)
    result = []
    seen = set()
    for cut in candidates:
        complement = tuple(n - k for k, n in zip(cut, copies))
        if not any(cut) or not any(complement):
            continue
        key = min(cut, complement)
        if key in seen:
            continue
        seen.add(key)
        result.append(cut)
    return result


#
# Superoperators
#

IDENTITY_MAP = 'identity'
SINGLE_COPY_MAP = 'single'
TRACE_MAP = 'trace'
TRANSPOSE_MAP = 'transpose'


def _superop_from(func, size):
    """Matrix of a linear map on size x size matrices, on row-major vectors"""
    columns = []
    for row, col in itertools.product(range(size), repeat=2):
        unit = np.zeros((size, size), dtype=complex)
        unit[row, col] = 1
        columns.append(np.asarray(func(unit)).reshape(-1))
    return np.stack(columns, axis=1)


def site_output_dim(d, copies, kind, k=0):
    """Output dimension of a per-site map"""
    if kind == IDENTITY_MAP:
        return sym_dim(copies, d)
    if kind == SINGLE_COPY_MAP:
        return d
    if kind == TRACE_MAP:
        return 1
    if 0 < k < copies:
        return sym_dim(k, d) * sym_dim(copies - k, d)
    return sym_dim(copies, d)


@cache_region(CACHE_REGION)
def site_superop(d, copies, kind, k=0):
    """Per-site map on the symmetric subspace of `copies` copies of C^d

    Kinds are identity, single (reduction to one copy), trace and transpose
    (transposition of the first k copies, recompressed on the product of the
    symmetric subspaces of the transposed and untouched copies).
    """
    size = sym_dim(copies, d)
    isometry = sym_isometry(copies, d)
    if kind == IDENTITY_MAP or (kind == TRANSPOSE_MAP and k == 0):
        result = np.eye(size * size, dtype=complex)
    elif kind == TRACE_MAP:
        result = np.eye(size, dtype=complex).reshape(1, size * size)
    elif kind == SINGLE_COPY_MAP:
        dims = (d,) * copies
        result = _superop_from(
            lambda unit: partial_trace_matrix(isometry @ unit @ isometry.T, dims, [0]), size)
    elif k == copies:
        result = _superop_from(lambda unit: unit.T, size)
    else:
        dims = (d,) * copies
        target = np.kron(sym_isometry(k, d), sym_isometry(copies - k, d))
        result = _superop_from(
            lambda unit: target.T @ partial_transpose_matrix(isometry @ unit @ isometry.T,
                                                             dims, range(k)) @ target,
            size)
    result.flags.writeable = False
    return result


def _row_major_index(index, dims):
    """Map (row_1, col_1, row_2, col_2, ...) indices to (row_1, row_2, ..., col_1, ...)"""
    shape = [size for dim in dims for size in (dim, dim)]
    digits = np.unravel_index(index, shape)
    order = [2 * axis for axis in range(len(dims))] + [2 * axis + 1 for axis in range(len(dims))]
    return np.ravel_multi_index([digits[axis] for axis in order],
                                [shape[axis] for axis in order])


def multisite_superop(superops, out_dims, in_dims):
    """Tensor product of per-site maps, acting on row-major vectors of the block

    The Kronecker product of per-site maps acts on vectors indexed by
    (row_1, col_1, row_2, col_2, ...); indices are permuted to the row-major
    layout (row_1, row_2, ..., col_1, col_2, ...) on both sides. The result
    is a sparse CSR matrix.
    """
    out_dims, in_dims = tuple(out_dims), tuple(in_dims)
    full = reduce(lambda first, second: sparse.kron(first, second, format='coo'),
                  [sparse.coo_matrix(np.asarray(superop)) for superop in superops])
    full = sparse.coo_matrix(full)
    out_size = math.prod(out_dims) ** 2
    in_size = math.prod(in_dims) ** 2
    return sparse.csr_matrix((full.data, (_row_major_index(full.row, out_dims),
                                          _row_major_index(full.col, in_dims))),
                             shape=(out_size, in_size))
