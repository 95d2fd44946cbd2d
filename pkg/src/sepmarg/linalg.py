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

"""SepMarg.linalg module

This module provides the linear algebra primitives used by all other
modules: checked Hermitian eigendecomposition, trace norm, coordinates of
Hermitian matrices in a fixed orthonormal basis, and sparse real images of
that basis through linear maps.

Coordinates follow a fixed layout: the n diagonal entries first, then
sqrt(2) times the real parts of the upper triangle, then sqrt(2) times the
imaginary parts of the upper triangle (row-major order):

    >>> import numpy as np
    >>> from sepmarg.linalg import herm_to_vec, vec_to_herm
    >>> m = np.array([[1, 2 + 1j], [2 - 1j, 3]])
    >>> np.round(herm_to_vec(m), 6).tolist()
    [1.0, 3.0, 2.828427, 1.414214]
    >>> np.allclose(vec_to_herm(herm_to_vec(m), 2), m)
    True
"""

import numpy as np
from beaker.cache import cache_region
from scipy import sparse

from sepmarg import CACHE_REGION
from sepmarg.interfaces import HERMITIAN_TOL, NoConvergence, NonSquare, NotHermitian, \
    ZERO_FLOOR


__docformat__ = 'restructuredtext'


def as_matrix(m):
    """Get given input as a complex square matrix"""
    matrix = np.asarray(m, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise NonSquare(f"Expected a square matrix, got shape {matrix.shape}")
    return matrix


def hermiticity_error(m):
    """Relative Frobenius distance of a matrix to its adjoint"""
    matrix = as_matrix(m)
    scale = max(np.linalg.norm(matrix), ZERO_FLOOR)
    return np.linalg.norm(matrix - matrix.conj().T) / scale


def check_hermitian(m, tol=HERMITIAN_TOL, name='matrix'):
    """Check Hermiticity and return the Hermitian part of given matrix

    :raise NotHermitian: when relative asymmetry exceeds tolerance
    """
    matrix = as_matrix(m)
    error = hermiticity_error(matrix)
    if error > tol:
        raise NotHermitian(f"{name} is not Hermitian (relative error {error:.3e})")
    return (matrix + matrix.conj().T) / 2


def herm_eig(m, tol=HERMITIAN_TOL):
    """Eigendecomposition of a Hermitian matrix

    Returns ascending eigenvalues and a unitary matrix of eigenvectors.

    >>> import numpy as np
    >>> from sepmarg.linalg import herm_eig
    >>> w, v = herm_eig(np.diag([3., 1.]))
    >>> w.tolist()
    [1.0, 3.0]
    >>> np.abs(v).tolist()
    [[0.0, 1.0], [1.0, 0.0]]

    >>> herm_eig([[0, 1], [0, 0]])
    Traceback (most recent call last):
    ...
    sepmarg.interfaces.NotHermitian: matrix is not Hermitian (relative error 1.414e+00)
    """
    matrix = check_hermitian(m, tol)
    try:
        return np.linalg.eigh(matrix)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc


def trace_norm(m):
    """Sum of singular values

    >>> from sepmarg.linalg import trace_norm
    >>> float(trace_norm([[1, 0], [0, -1]]))
    2.0
    """
    matrix = as_matrix(m)
    try:
        return float(np.sum(np.linalg.svd(matrix, compute_uv=False)))
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc


def min_eigenvalue(m):
    """Smallest eigenvalue of the Hermitian part of given matrix"""
    matrix = as_matrix(m)
    return float(np.linalg.eigvalsh((matrix + matrix.conj().T) / 2)[0])


def embed_real(m, n=None):
    """Real symmetric embedding [[X, -Y], [Y, X]] of Hermitian matrix X + iY

    The embedding of an n x n matrix has size 2n and carries every
    eigenvalue twice, so both matrices are PSD together.

    >>> import numpy as np
    >>> from sepmarg.linalg import embed_real
    >>> block = embed_real([[1, 1j], [-1j, 1]])
    >>> block.tolist()
    [[1.0, 0.0, 0.0, -1.0], [0.0, 1.0, 1.0, 0.0], [0.0, 1.0, 1.0, 0.0], [-1.0, 0.0, 0.0, 1.0]]
    >>> (np.round(np.linalg.eigvalsh(block), 6) + 0.0).tolist()
    [0.0, 0.0, 2.0, 2.0]

    >>> embed_real(np.eye(2), 3)
    Traceback (most recent call last):
    ...
    sepmarg.interfaces.NonSquare: Expected a 3 x 3 matrix, got shape (2, 2)
    """
    matrix = check_hermitian(m)
    if n is not None and matrix.shape[0] != n:
        raise NonSquare(f"Expected a {n} x {n} matrix, got shape {matrix.shape}")
    return np.block([[matrix.real, -matrix.imag],
                     [matrix.imag, matrix.real]]) + 0.0


#
# Hermitian coordinates
#

def herm_to_vec(m):
    """Coordinates of a Hermitian matrix in the orthonormal Hermitian basis"""
    matrix = np.asarray(m, dtype=complex)
    n = matrix.shape[0]
    rows, cols = np.triu_indices(n, 1)
    upper = matrix[rows, cols]
    return np.concatenate((matrix.diagonal().real,
                           np.sqrt(2) * upper.real,
                           np.sqrt(2) * upper.imag))


def vec_to_herm(v, n):
    """Hermitian matrix from its coordinates"""
    v = np.asarray(v, dtype=float)
    if v.shape[0] != n * n:
        raise NonSquare(f"Expected {n * n} coordinates, got {v.shape[0]}")
    rows, cols = np.triu_indices(n, 1)
    count = rows.shape[0]
    matrix = np.diag(v[:n]).astype(complex)
    upper = (v[n:n + count] + 1j * v[n + count:]) / np.sqrt(2)
    matrix[rows, cols] = upper
    matrix[cols, rows] = upper.conj()
    return matrix


@cache_region(CACHE_REGION)
def herm_basis_transform(n):
    """Sparse matrix whose columns are the row-major vectorized basis matrices

    For any Hermitian X, vec(X) = T @ herm_to_vec(X) and
    herm_to_vec(X) = Re(T^H @ vec(X)).
    """
    rows, cols = np.triu_indices(n, 1)
    count = rows.shape[0]
    diag = np.arange(n)
    inv_sqrt2 = 1 / np.sqrt(2)
    upper = rows * n + cols
    lower = cols * n + rows
    real_cols = n + np.arange(count)
    imag_cols = n + count + np.arange(count)
    entries = np.concatenate((np.ones(n),
                              np.full(count, inv_sqrt2), np.full(count, inv_sqrt2),
                              np.full(count, 1j * inv_sqrt2), np.full(count, -1j * inv_sqrt2)))
    vec_index = np.concatenate((diag * n + diag, upper, lower, upper, lower))
    basis_index = np.concatenate((diag, real_cols, real_cols, imag_cols, imag_cols))
    return sparse.csr_matrix((entries, (vec_index, basis_index)), shape=(n * n, n * n))


def real_superop(superop, n_out, n_in):
    """Real matrix of a Hermiticity preserving map in Hermitian coordinates

    `superop` acts on row-major vectorized matrices, shape (n_out**2, n_in**2);
    it may be dense or sparse, the result is dense.
    """
    images = sparse.csr_matrix(superop) @ herm_basis_transform(n_in)
    return np.asarray((herm_basis_transform(n_out).conj().T @ images).real.toarray())


def embedded_images(superop, n_out, n_in):
    """Real embeddings of the images of the Hermitian basis through a map

    Returns a sparse (4 * n_out**2, n_in**2) matrix; column k is the
    row-major vectorized embedding [[X, -Y], [Y, X]] of the image X + iY of
    basis matrix k.

    >>> import numpy as np
    >>> from sepmarg.linalg import embedded_images
    >>> transpose = np.eye(4)[[0, 2, 1, 3]]
    >>> images = embedded_images(transpose, 2, 2)
    >>> images.shape
    (16, 4)
    >>> images[:, 3].toarray().reshape(4, 4).round(6).tolist()
    [[0.0, 0.0, 0.0, 0.707107], [0.0, 0.0, -0.707107, 0.0], [0.0, -0.707107, 0.0, 0.0], [0.707107, 0.0, 0.0, 0.0]]
    """
    images = sparse.coo_matrix(sparse.csr_matrix(superop) @ herm_basis_transform(n_in))
    rows, cols = np.divmod(images.row, n_out)
    size = 2 * n_out
    positions = np.concatenate((rows * size + cols,
                                rows * size + cols + n_out,
                                (rows + n_out) * size + cols,
                                (rows + n_out) * size + cols + n_out))
    data = np.concatenate((images.data.real, -images.data.imag,
                           images.data.imag, images.data.real))
    data[np.abs(data) < ZERO_FLOOR] = 0.0
    result = sparse.csc_matrix((data, (positions, np.tile(images.col, 4))),
                               shape=(size * size, images.shape[1]))
    result.eliminate_zeros()
    return result
