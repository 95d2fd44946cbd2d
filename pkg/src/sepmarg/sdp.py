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

"""SepMarg.sdp module

This module provides a primal-dual interior point solver for semidefinite
programs given in linear matrix inequality form::

    minimize    c.x
    subject to  A x = b
                s_j = F_j x_g(j) + f0_j  >= 0     for every cone j

where x is split into variable groups and every cone depends on a single
group. Cones are real symmetric matrix blocks (complex Hermitian blocks are
embedded before they reach the solver) or diagonal blocks, the latter being
plain nonnegativity constraints on a whole group.

The dual problem reads::

    maximize    -b.y - sum_j <f0_j, z_j>
    subject to  A^T y - sum_j F_j^T z_j + c = 0,  z_j >= 0

Iterates live in the homogeneous self-dual embedding; directions use
Nesterov-Todd scaling and a Mehrotra predictor-corrector scheme. Infeasibility
certificates are read from the embedding when tau vanishes against kappa;
when the iterates only approach a certificate, the residual of the dual ray
is absorbed by a least norm change of the cone multipliers, and the
repaired ray is reported if it stays in the cones.

    >>> import numpy as np
    >>> from sepmarg.sdp import SdpInstance, solve
    >>> inst = SdpInstance()
    >>> group = inst.add_group(1)
    >>> _ = inst.add_cone(group, np.eye(2)[None], offset=np.array([[0., 1.], [1., 0.]]))
    >>> inst.set_objective(group, [1.])
    >>> sol = solve(inst)
    >>> sol.status, round(sol.primal_objective, 6)
    ('optimal', 1.0)
"""

import logging
import math

import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.sparse.linalg import splu
from zope.interface import implementer
from zope.schema import Float
from zope.schema.fieldproperty import FieldProperty

from sepmarg.interfaces import DUAL_INFEASIBLE, IFarkasRay, ISdpInstance, ISdpSolution, \
    ISolverOptions, IllFormed, MAX_ITER, NumericalBreakdown, OPTIMAL, PRIMAL_INFEASIBLE, \
    WrongStatus
from sepmarg.linalg import embed_real


__docformat__ = 'restructuredtext'


LOGGER = logging.getLogger('SepMarg (sdp)')

DENSE_SCHUR_LIMIT = 5000
PREPROCESS_MAX_ROWS = 5000
STALL_ITERATIONS = 15
MIN_STEP = 1e-10
GRAM_CHUNK_ENTRIES = 1 << 22
CERTIFICATE_GATE = 1e-3


@implementer(ISolverOptions)
class SolverOptions:
    """Solver options"""

    tol = FieldProperty(ISolverOptions['tol'])
    max_iter = FieldProperty(ISolverOptions['max_iter'])
    step_fraction = FieldProperty(ISolverOptions['step_fraction'])
    regularization = FieldProperty(ISolverOptions['regularization'])
    rank_threshold = FieldProperty(ISolverOptions['rank_threshold'])
    tau_kappa_ratio = FieldProperty(ISolverOptions['tau_kappa_ratio'])
    preprocess = FieldProperty(ISolverOptions['preprocess'])

    def __init__(self, **kwargs):
        for name, value in kwargs.items():
            if value is None:
                continue
            if isinstance(ISolverOptions.get(name), Float):
                value = float(value)
            setattr(self, name, value)


#
# Instances
#

class Cone:
    """Linear matrix inequality on one variable group

    `images` holds the row-major vectorized images F_j e_k of the group unit
    vectors, as the columns of a sparse (dim * dim, group size) matrix; it is
    None for diagonal cones, which constrain the whole group to be nonnegative.
    """

    def __init__(self, group, dim, images=None, offset=None, label=''):
        self.group = group
        self.dim = dim
        self.images = images
        self.offset = offset
        self.label = label
        self._padded = None

    @property
    def diagonal(self):
        """Diagonal (linear programming) cone flag"""
        return self.images is None

    def apply(self, x):
        """F x"""
        if self.diagonal:
            return x
        return np.asarray(self.images @ x).reshape(self.dim, self.dim)

    def adjoint(self, z):
        """F^T z"""
        if self.diagonal:
            return z
        return np.asarray(self.images.T @ np.asarray(z).reshape(-1))

    def image(self, index):
        """Dense image of the unit vector of given group index"""
        return self.images[:, index].toarray().reshape(self.dim, self.dim)

    def gram(self):
        """Sparse matrix of F^T F"""
        if self.diagonal:
            return sparse.identity(self.dim, format='csc')
        return (self.images.T @ self.images).tocsc()

    def _padded_entries(self):
        """Per column (row, col, value) entries of the images, padded to equal counts"""
        if self._padded is None:
            images = self.images.tocsc()
            counts = np.diff(images.indptr)
            width = max(1, int(counts.max()) if counts.size else 1)
            size = images.shape[1]
            positions = np.zeros((size, width), dtype=int)
            values = np.zeros((size, width))
            slots = np.arange(images.nnz) - np.repeat(images.indptr[:-1], counts)
            columns = np.repeat(np.arange(size), counts)
            positions[columns, slots] = images.indices
            values[columns, slots] = images.data
            rows, cols = np.divmod(positions, self.dim)
            self._padded = (rows, cols, values)
        return self._padded

    def add_weighted_gram(self, winv, out):
        """Add the matrix of x -> F^T (W^-1 (F x) W^-1) to `out`

        Every image is a short sum of unit matrices, so that W^-1 F e_k W^-1
        is computed as a low rank product; columns are handled by chunks
        holding at most GRAM_CHUNK_ENTRIES dense entries.
        """
        rows, cols, values = self._padded_entries()
        size = rows.shape[0]
        chunk = max(1, GRAM_CHUNK_ENTRIES // (self.dim * self.dim))
        transposed = self.images.T.tocsr()
        for start in range(0, size, chunk):
            stop = min(size, start + chunk)
            left = winv[rows[start:stop]] * values[start:stop, :, None]
            right = winv[cols[start:stop]]
            weighted = np.swapaxes(left, 1, 2) @ right
            out[:, start:stop] += transposed @ weighted.reshape(stop - start, -1).T

    def identity(self):
        """Cone unit element"""
        if self.diagonal:
            return np.ones(self.dim)
        return np.eye(self.dim)

    def zero(self):
        """Cone zero element"""
        if self.diagonal:
            return np.zeros(self.dim)
        return np.zeros((self.dim, self.dim))

    def offset_or_zero(self):
        """Cone offset, zero when missing"""
        return self.zero() if self.offset is None else self.offset

    def min_eigenvalue(self, value):
        """Smallest eigenvalue of a cone element

        :raise NumericalBreakdown: if eigenvalues can't be computed
        """
        if self.diagonal:
            return float(np.min(value)) if value.size else 0.0
        try:
            return float(np.linalg.eigvalsh(value)[0])
        except np.linalg.LinAlgError as exc:
            raise NumericalBreakdown(f"Cone {self.label!r}: {exc}") from exc


@implementer(ISdpInstance)
class SdpInstance:
    """SDP instance builder and container"""

    def __init__(self):
        self.groups = []
        self.group_labels = []
        self.cones = []
        self.rows = []
        self.metadata = {}
        self._row_parts = []
        self._rhs = []
        self._objective = {}
        self._cache = None

    def __repr__(self):
        return (f'<SdpInstance groups={len(self.groups)} cones={len(self.cones)} '
                f'rows={len(self.rows)}>')

    @property
    def size(self):
        """Total variables count"""
        return sum(self.groups)

    def group_slice(self, group):
        """Slice of given group in the variables vector"""
        start = sum(self.groups[:group])
        return slice(start, start + self.groups[group])

    def add_group(self, size, label=''):
        """Add a variables group, returning its index"""
        if size < 1:
            raise IllFormed("Empty variables group")
        self.groups.append(int(size))
        self.group_labels.append(label)
        self._cache = None
        return len(self.groups) - 1

    def add_cone(self, group, basis, offset=None, label=''):
        """Add a matrix cone s = sum_k x_k basis[k] + offset >= 0

        `basis` is either a dense (group size, dim, dim) stack of symmetric
        matrices, or a sparse (dim * dim, group size) matrix whose columns
        are the row-major vectorized basis matrices. A complex dense stack
        of Hermitian matrices is replaced by its real embedding, and so is
        a complex offset.
        """
        if not sparse.issparse(basis) and np.iscomplexobj(basis):
            basis = np.stack([embed_real(matrix) for matrix in basis])
            if offset is not None:
                offset = embed_real(offset)
        if sparse.issparse(basis):
            images = sparse.csc_matrix(basis, dtype=float)
            dim = math.isqrt(images.shape[0])
            if dim * dim != images.shape[0]:
                raise IllFormed(f"Cone {label!r}: {images.shape[0]} rows is not a square size")
            count = images.shape[1]
        else:
            basis = np.asarray(basis, dtype=float)
            if basis.ndim != 3 or basis.shape[1] != basis.shape[2]:
                raise IllFormed(f"Cone {label!r}: basis must be a stack of square matrices")
            count, dim = basis.shape[0], basis.shape[1]
            images = sparse.csc_matrix(basis.reshape(count, -1).T)
        if count != self.groups[group]:
            raise IllFormed(f"Cone {label!r}: {count} basis matrices for a group "
                            f"of size {self.groups[group]}")
        if offset is not None:
            offset = np.asarray(offset, dtype=float)
            if offset.shape != (dim, dim):
                raise IllFormed(f"Cone {label!r}: offset shape {offset.shape}")
            offset = (offset + offset.T) / 2
        self.cones.append(Cone(group, dim, images, offset, label))
        self._cache = None
        return len(self.cones) - 1

    def add_diagonal_cone(self, group, offset=None, label=''):
        """Add the nonnegativity constraint x_g + offset >= 0"""
        dim = self.groups[group]
        if offset is not None:
            offset = np.asarray(offset, dtype=float)
            if offset.shape != (dim,):
                raise IllFormed(f"Cone {label!r}: offset shape {offset.shape}")
        self.cones.append(Cone(group, dim, None, offset, label))
        self._cache = None
        return len(self.cones) - 1

    def add_rows(self, coefficients, rhs, provenance=None):
        """Add equality rows

        `coefficients` maps group indices to dense or sparse (rows, group size)
        matrices; `provenance` gives one tuple per row, used to map
        certificates back to their origin.
        """
        rhs = np.atleast_1d(np.asarray(rhs, dtype=float))
        count = rhs.shape[0]
        if count == 0:
            return
        parts = {}
        for group, matrix in coefficients.items():
            matrix = sparse.csr_matrix(matrix)
            if matrix.shape != (count, self.groups[group]):
                raise IllFormed(f"Rows block shape {matrix.shape} doesn't match "
                                f"({count}, {self.groups[group]})")
            parts[group] = matrix
        if provenance is None:
            provenance = [('row', len(self.rows) + index) for index in range(count)]
        if len(provenance) != count:
            raise IllFormed("Rows provenance doesn't match rows count")
        self._row_parts.append(parts)
        self._rhs.append(rhs)
        self.rows.extend(provenance)
        self._cache = None

    def set_objective(self, group, vector):
        """Add a linear objective term on given group"""
        vector = np.asarray(vector, dtype=float)
        if vector.shape != (self.groups[group],):
            raise IllFormed(f"Objective shape {vector.shape} for group of size "
                            f"{self.groups[group]}")
        self._objective[group] = self._objective.get(group, 0) + vector
        self._cache = None

    def _assemble(self):
        if self._cache is not None:
            return self._cache
        starts = np.cumsum([0] + self.groups)
        blocks = []
        for parts in self._row_parts:
            count = next(iter(parts.values())).shape[0] if parts else 0
            row = []
            for group, size in enumerate(self.groups):
                row.append(parts.get(group, sparse.csr_matrix((count, size))))
            blocks.append(sparse.hstack(row, format='csr'))
        if blocks:
            matrix = sparse.vstack(blocks, format='csr')
            rhs = np.concatenate(self._rhs)
        else:
            matrix = sparse.csr_matrix((0, int(starts[-1])))
            rhs = np.zeros(0)
        objective = np.zeros(int(starts[-1]))
        for group, vector in self._objective.items():
            objective[starts[group]:starts[group + 1]] = vector
        self._cache = (matrix, rhs, objective)
        return self._cache

    @property
    def A(self):  # pylint: disable=invalid-name
        """Equality rows matrix"""
        return self._assemble()[0]

    @property
    def b(self):
        """Equality rows right hand side"""
        return self._assemble()[1]

    @property
    def c(self):
        """Objective vector"""
        return self._assemble()[2]

    def validate(self):
        """Check instance consistency

        :raise IllFormed: when a group is not constrained by any cone, or mixes
            diagonal and matrix cones
        """
        kinds = {}
        for cone in self.cones:
            if not 0 <= cone.group < len(self.groups):
                raise IllFormed(f"Cone {cone.label!r} refers to unknown group {cone.group}")
            kinds.setdefault(cone.group, set()).add(cone.diagonal)
        for group, size in enumerate(self.groups):
            if group not in kinds:
                raise IllFormed(f"Group {group} ({self.group_labels[group]!r}) has no cone")
            if len(kinds[group]) > 1:
                raise IllFormed(f"Group {group} mixes diagonal and matrix cones")
            if True in kinds[group] and sum(1 for cone in self.cones
                                            if cone.group == group) > 1:
                raise IllFormed(f"Group {group} has more than one diagonal cone")
        if not np.all(np.isfinite(self.b)) or not np.all(np.isfinite(self.c)):
            raise IllFormed("Non finite right hand side or objective")
        return True

    def apply(self, x):
        """Cone values F x + f0 for a primal point"""
        result = []
        for cone in self.cones:
            result.append(cone.apply(x[self.group_slice(cone.group)]) + cone.offset_or_zero())
        return result

    def adjoint(self, z):
        """F^T z, as a full variables vector"""
        result = np.zeros(self.size)
        for cone, value in zip(self.cones, z):
            result[self.group_slice(cone.group)] += cone.adjoint(value)
        return result


#
# Solutions and certificates
#

@implementer(ISdpSolution)
class SdpSolution:  # pylint: disable=too-many-instance-attributes
    """Solver result"""

    def __init__(self, status, x, y, z, s, **kwargs):
        self.status = status
        self.x = x
        self.y = y
        self.z = z
        self.s = s
        self.gap = float(kwargs.get('gap', np.nan))
        self.primal_residual = float(kwargs.get('primal_residual', np.nan))
        self.dual_residual = float(kwargs.get('dual_residual', np.nan))
        self.primal_objective = float(kwargs.get('primal_objective', np.nan))
        self.dual_objective = float(kwargs.get('dual_objective', np.nan))
        self.iterations = kwargs.get('iterations', 0)
        self.tol = kwargs.get('tol', np.nan)

    def __repr__(self):
        return f'<SdpSolution status={self.status} iterations={self.iterations}>'

    @property
    def blocks(self):
        """Primal cone values"""
        return self.s


@implementer(IFarkasRay)
class FarkasRay:
    """Primal infeasibility certificate

    `y` and `Z` satisfy A^T y + F^T Z = 0, Z >= 0 and b.y - <f0, Z> = 1, so
    that no point can satisfy both the equality rows and the cones.
    """

    def __init__(self, y, Z):  # pylint: disable=invalid-name
        self.y = y
        self.Z = Z  # pylint: disable=invalid-name

    def margin(self, inst):
        """b.y - <f0, Z>"""
        value = float(inst.b @ self.y)
        for cone, block in zip(inst.cones, self.Z):
            if cone.offset is not None:
                value -= float(np.sum(cone.offset * block))
        return value

    def residual(self, inst):
        """Norm of A^T y + F^T Z"""
        return float(np.linalg.norm(inst.A.T @ self.y + inst.adjoint(self.Z)))

    def min_eigenvalue(self, inst):
        """Smallest eigenvalue among cone multipliers"""
        values = [cone.min_eigenvalue(block) for cone, block in zip(inst.cones, self.Z)]
        return min(values) if values else 0.0

    def verify(self, inst, tol):
        """Check certificate conditions at given tolerance"""
        scale = max(1.0, float(np.linalg.norm(inst.c)))
        z_scale = max([1.0] + [float(np.linalg.norm(block)) for block in self.Z])
        return (self.margin(inst) > 0 and
                self.residual(inst) <= tol * scale * max(1.0, abs(self.margin(inst))) and
                self.min_eigenvalue(inst) >= -tol * z_scale)


def extract_farkas(sol, inst):
    """Get the Farkas ray of a primal infeasible solution

    :raise WrongStatus: if solution is not primal infeasible
    """
    if sol.status != PRIMAL_INFEASIBLE:
        raise WrongStatus(f"Can't extract a Farkas ray from a {sol.status!r} solution")
    y = -np.asarray(sol.y, dtype=float)
    Z = [np.array(block, dtype=float) for block in sol.z]  # pylint: disable=invalid-name
    ray = FarkasRay(y, Z)
    margin = ray.margin(inst)
    if margin <= 0:
        raise WrongStatus("Solution multipliers don't certify infeasibility")
    ray.y /= margin
    ray.Z = [block / margin for block in ray.Z]
    return ray


#
# Interior point method
#

class _Scaling:
    """Nesterov-Todd scaling of one cone"""

    def __init__(self, cone, s, z):
        self.diagonal = cone.diagonal
        if self.diagonal:
            if np.any(s <= 0) or np.any(z <= 0):
                raise NumericalBreakdown(f"Cone {cone.label!r} left the interior")
            self.r = (s / z) ** 0.25
            self.lam = np.sqrt(s * z)
            return
        try:
            ls = np.linalg.cholesky(s)
            lz = np.linalg.cholesky(z)
            u, d, vt = np.linalg.svd(lz.T @ ls)
        except np.linalg.LinAlgError as exc:
            raise NumericalBreakdown(f"Cone {cone.label!r} left the interior") from exc
        inv_sqrt = 1 / np.sqrt(d)
        self.R = ls @ vt.T * inv_sqrt  # pylint: disable=invalid-name
        self.Rinv = (u * inv_sqrt).T @ lz.T  # pylint: disable=invalid-name
        self.winv = self.Rinv.T @ self.Rinv
        self.w = self.R @ self.R.T
        self.lam = d

    def weighted(self, value):
        """W^-1 value W^-1"""
        if self.diagonal:
            return value / self.r ** 4
        return self.winv @ value @ self.winv

    def scale_s(self, value):
        """R^-1 value R^-T"""
        if self.diagonal:
            return value / self.r ** 2
        return self.Rinv @ value @ self.Rinv.T

    def scale_z(self, value):
        """R^T value R"""
        if self.diagonal:
            return value * self.r ** 2
        return self.R.T @ value @ self.R

    def unscale(self, value):
        """R value R^T"""
        if self.diagonal:
            return value * self.r ** 2
        return self.R @ value @ self.R.T

    def w_apply(self, value):
        """W value W"""
        if self.diagonal:
            return value * self.r ** 4
        return self.w @ value @ self.w

    def lam_divide(self, value):
        """Solve lambda o U = value"""
        if self.diagonal:
            return value / self.lam
        return 2 * value / (self.lam[:, None] + self.lam[None, :])

    def lam_square(self):
        """lambda o lambda"""
        if self.diagonal:
            return self.lam ** 2
        return np.diag(self.lam ** 2)

    def max_step(self, scaled):
        """Largest step keeping lambda + alpha * scaled in the cone"""
        if self.diagonal:
            ratios = scaled / self.lam
            lowest = np.min(ratios) if ratios.size else 0.0
        else:
            inv_sqrt = 1 / np.sqrt(self.lam)
            try:
                lowest = np.linalg.eigvalsh(inv_sqrt[:, None] * scaled * inv_sqrt[None, :])[0]
            except np.linalg.LinAlgError as exc:
                raise NumericalBreakdown(f"Step length: {exc}") from exc
        if not np.isfinite(lowest):
            raise NumericalBreakdown("Step length is not finite")
        return np.inf if lowest >= 0 else -1 / lowest


def _inner(cones, first, second):
    return sum(float(np.sum(a * b)) for a, b in zip(first, second))


def _sym_product(cone, first, second):
    if cone.diagonal:
        return first * second
    product = first @ second
    return (product + product.T) / 2


def _symmetrize(cone, value):
    if cone.diagonal:
        return value
    return (value + value.T) / 2


class _KKTSystem:
    """Reduced Newton system [[H, A^T], [A, 0]] factored by Schur complement"""

    def __init__(self, inst, A, scalings, regularization):  # pylint: disable=invalid-name
        self.inst = inst
        self.A = A  # pylint: disable=invalid-name
        self.m = A.shape[0]
        self.slices = [inst.group_slice(group) for group in range(len(inst.groups))]
        self.hessians = []
        self.factors = []
        for group, size in enumerate(inst.groups):
            cones = [(index, cone) for index, cone in enumerate(inst.cones)
                     if cone.group == group]
            if cones[0][1].diagonal:
                index, cone = cones[0]
                scaling = scalings[index]
                diag = 1 / scaling.r ** 4 + regularization
                self.hessians.append(diag)
                self.factors.append(None)
                continue
            hessian = np.zeros((size, size))
            for index, cone in cones:
                cone.add_weighted_gram(scalings[index].winv, hessian)
            hessian += regularization * max(1.0, float(np.max(np.diag(hessian)))) * \
                np.eye(size)
            try:
                factor = scipy.linalg.cho_factor(hessian, lower=True, check_finite=False)
            except np.linalg.LinAlgError as exc:
                raise NumericalBreakdown(f"Group {group} Hessian is singular") from exc
            self.hessians.append(hessian)
            self.factors.append(factor)
        self.schur = None
        if self.m:
            self._factor_schur(regularization)

    def _hinv(self, group, value):
        if self.factors[group] is None:
            if value.ndim == 2:
                return value / self.hessians[group][:, None]
            return value / self.hessians[group]
        return scipy.linalg.cho_solve(self.factors[group], value, check_finite=False)

    def _hmul(self, group, value):
        if self.factors[group] is None:
            return self.hessians[group] * value
        return self.hessians[group] @ value

    def _factor_schur(self, regularization):
        dense = self.m <= DENSE_SCHUR_LIMIT
        schur = np.zeros((self.m, self.m)) if dense else None
        pieces = []
        csc = self.A.tocsc()
        for group, slc in enumerate(self.slices):
            block = csc[:, slc]
            if self.factors[group] is None:
                weighted = block @ sparse.diags(1 / self.hessians[group])
                local = (weighted @ block.T).tocoo()
                if dense:
                    np.add.at(schur, (local.row, local.col), local.data)
                else:
                    pieces.append(local)
                continue
            rows = np.unique(block.nonzero()[0])
            if rows.size == 0:
                continue
            local_rows = block[rows].toarray()
            local = local_rows @ self._hinv(group, local_rows.T)
            if dense:
                schur[np.ix_(rows, rows)] += local
            else:
                grid_rows, grid_cols = np.meshgrid(rows, rows, indexing='ij')
                pieces.append(sparse.coo_matrix((local.ravel(),
                                                 (grid_rows.ravel(), grid_cols.ravel())),
                                                shape=(self.m, self.m)))
        if dense:
            schur += regularization * max(1.0, float(np.max(np.diag(schur)))) * np.eye(self.m)
            try:
                self.schur = ('dense', scipy.linalg.cho_factor(schur, lower=True,
                                                               check_finite=False))
            except np.linalg.LinAlgError as exc:
                raise NumericalBreakdown("Schur complement is not positive definite") from exc
        else:
            matrix = sparse.csc_matrix((self.m, self.m))
            for piece in pieces:
                matrix = matrix + piece.tocsc()
            scale = max(1.0, float(matrix.diagonal().max()))
            matrix = matrix + regularization * scale * sparse.identity(self.m, format='csc')
            try:
                self.schur = ('sparse', splu(matrix.tocsc()))
            except RuntimeError as exc:
                raise NumericalBreakdown("Schur complement is singular") from exc

    def _schur_solve(self, rhs):
        kind, factor = self.schur
        if kind == 'dense':
            return scipy.linalg.cho_solve(factor, rhs, check_finite=False)
        return factor.solve(rhs)

    def _hinv_all(self, vector):
        result = np.empty_like(vector)
        for group, slc in enumerate(self.slices):
            result[slc] = self._hinv(group, vector[slc])
        return result

    def _solve_once(self, f, g):
        if not self.m:
            return self._hinv_all(f), np.zeros(0)
        dy = self._schur_solve(self.A @ self._hinv_all(f) - g)
        dx = self._hinv_all(f - self.A.T @ dy)
        return dx, dy

    def solve(self, f, g):
        """Solve H dx + A^T dy = f, A dx = g with one refinement step"""
        dx, dy = self._solve_once(f, g)
        hdx = np.empty_like(dx)
        for group, slc in enumerate(self.slices):
            hdx[slc] = self._hmul(group, dx[slc])
        res_f = f - hdx - self.A.T @ dy
        res_g = g - self.A @ dx
        cx, cy = self._solve_once(res_f, res_g)
        return dx + cx, dy + cy


def _preprocess(inst, opts):
    """Select independent equality rows

    Returns kept row indices and, when a dependent row contradicts the
    kept ones, a (row, weights, mismatch) triple describing the conflict.
    """
    A, b = inst.A, inst.b  # pylint: disable=invalid-name
    m = A.shape[0]
    everything = np.arange(m)
    if not opts.preprocess or m == 0 or m > PREPROCESS_MAX_ROWS:
        return everything, None
    gram = np.asarray((A @ A.T).todense())
    diag = np.diag(gram)
    zero_rows = np.where(diag <= opts.rank_threshold * max(1.0, float(np.max(diag))))[0]
    _q, r, pivots = scipy.linalg.qr(gram, pivoting=True)
    pivot_sizes = np.abs(np.diag(r))
    if pivot_sizes.size == 0 or pivot_sizes[0] == 0:
        kept = np.zeros(0, dtype=int)
    else:
        rank = int(np.sum(pivot_sizes > opts.rank_threshold * pivot_sizes[0]))
        kept = np.sort(pivots[:rank])
    kept = np.setdiff1d(kept, zero_rows)
    removed = np.setdiff1d(everything, kept)
    if removed.size == 0:
        return kept, None
    LOGGER.debug("Removing %d dependent rows out of %d", removed.size, m)
    if kept.size:
        weights = scipy.linalg.lstsq(gram[np.ix_(kept, kept)], gram[np.ix_(kept, removed)])[0]
        mismatch = b[removed] - weights.T @ b[kept]
    else:
        weights = np.zeros((0, removed.size))
        mismatch = b[removed].copy()
    scale = 10 * opts.tol * np.maximum(1.0, np.abs(b[removed]))
    worst = int(np.argmax(np.abs(mismatch) / scale))
    if abs(mismatch[worst]) > scale[worst]:
        return kept, (int(removed[worst]), weights[:, worst], float(mismatch[worst]))
    return kept, None


def _conflict_solution(inst, kept, conflict, opts):
    row, weights, mismatch = conflict
    y = np.zeros(inst.A.shape[0])
    y[row] = 1.0
    y[kept] = -weights
    # solver convention: b.y + <f0, z> < 0
    y *= -np.sign(mismatch) / abs(mismatch)
    LOGGER.info("Equality rows are inconsistent (row %d, mismatch %.3e)", row, mismatch)
    return SdpSolution(PRIMAL_INFEASIBLE, np.zeros(inst.size), y,
                       [cone.zero() for cone in inst.cones],
                       [cone.zero() for cone in inst.cones],
                       iterations=0, tol=opts.tol)


class _GramSolver:
    """Least norm corrections dZ of cone multipliers with F^T dZ = -r"""

    def __init__(self, inst):
        self.inst = inst
        self.factors = []
        for group in range(len(inst.groups)):
            cones = [cone for cone in inst.cones if cone.group == group]
            if cones[0].diagonal:
                self.factors.append(None)
                continue
            gram = cones[0].gram()
            for cone in cones[1:]:
                gram = gram + cone.gram()
            try:
                self.factors.append(splu(sparse.csc_matrix(gram)))
            except RuntimeError:
                LOGGER.debug("Group %d images are not independent", group)
                self.factors.append(False)

    def corrections(self, residual):
        """Cone corrections absorbing given residual, None when not available"""
        solutions = {}
        for group, factor in enumerate(self.factors):
            part = residual[self.inst.group_slice(group)]
            if factor is False:
                return None
            solutions[group] = part if factor is None else factor.solve(part)
        result = []
        for cone in self.inst.cones:
            solution = solutions[cone.group]
            result.append(-solution if cone.diagonal else -cone.apply(solution))
        return result


def _repair_certificate(inst, A, b, y, z, grams, opts):  # pylint: disable=invalid-name,too-many-arguments
    """Exact Farkas ray next to approximate solver multipliers

    The residual of A^T y' + F^T Z is absorbed by a least norm change of Z;
    the result is kept only if every multiplier stays in its cone and the
    margin stays positive. Returns solver convention multipliers (y, z),
    normalized to a unit margin, or None.
    """
    cones = inst.cones
    f0 = [cone.offset_or_zero() for cone in cones]
    margin = -(float(b @ y) + _inner(cones, f0, z))
    if not margin > 0:
        return None
    ray_y = -y / margin
    ray_z = [zi / margin for zi in z]
    residual = A.T @ ray_y + inst.adjoint(ray_z)
    corrections = grams.corrections(residual)
    if corrections is None:
        return None
    ray_z = [_symmetrize(cone, zi + dzi) for cone, zi, dzi in zip(cones, ray_z, corrections)]
    for cone, block in zip(cones, ray_z):
        scale = max(1.0, float(np.linalg.norm(block)))
        if cone.min_eigenvalue(block) < -opts.tol * scale:
            return None
    margin = float(b @ ray_y) - _inner(cones, f0, ray_z)
    if not margin > 0:
        return None
    ray_y = ray_y / margin
    ray_z = [zi / margin for zi in ray_z]
    error = float(np.linalg.norm(A.T @ ray_y + inst.adjoint(ray_z)))
    if not error <= opts.tol * max(1.0, float(np.linalg.norm(inst.c))):
        return None
    return -ray_y, ray_z


def _finite(x, y, s, z, tau, kappa):  # pylint: disable=too-many-arguments
    return (np.isfinite(tau) and np.isfinite(kappa) and
            np.all(np.isfinite(x)) and np.all(np.isfinite(y)) and
            all(np.all(np.isfinite(value)) for value in s) and
            all(np.all(np.isfinite(value)) for value in z))


def solve(inst, opts=None, **kwargs):  # pylint: disable=too-many-locals,too-many-statements,too-many-branches
    """Solve an SDP instance

    Options can be given as a `SolverOptions` instance or as keyword
    arguments (`tol`, `max_iter`...).

    :raise IllFormed: on inconsistent instance
    :raise NumericalBreakdown: if the first Newton system can't be factored
    """
    if opts is None:
        opts = SolverOptions(**kwargs)
    inst.validate()
    kept, conflict = _preprocess(inst, opts)
    if conflict is not None:
        return _conflict_solution(inst, kept, conflict, opts)
    A = inst.A[kept] if kept.size != inst.A.shape[0] else inst.A  # pylint: disable=invalid-name
    b = inst.b[kept]
    c = inst.c
    cones = inst.cones
    m, n = A.shape
    nu = sum(cone.dim for cone in cones)
    f0 = [cone.offset_or_zero() for cone in cones]
    resx0 = max(1.0, float(np.linalg.norm(c)))
    resy0 = max(1.0, float(np.linalg.norm(b)))
    resz0 = max(1.0, float(np.sqrt(_inner(cones, f0, f0))))
    LOGGER.debug("Solving SDP: %d variables, %d rows, %d cones (nu=%d)",
                  n, m, len(cones), nu)

    x = np.zeros(n)
    y = np.zeros(m)
    s = [cone.identity() for cone in cones]
    z = [cone.identity() for cone in cones]
    tau = kappa = 1.0

    def apply_f(vector):
        return [cone.apply(vector[inst.group_slice(cone.group)]) for cone in cones]

    def adjoint_f(values):
        return inst.adjoint(values)

    grams = None

    def certify(multipliers, duals):
        nonlocal grams
        if grams is None:
            grams = _GramSolver(inst)
        try:
            return _repair_certificate(inst, A, b, multipliers, duals, grams, opts)
        except NumericalBreakdown:
            return None

    best = None
    lowest = [np.inf, np.inf, np.inf]
    candidate = None
    candidate_residual = np.inf
    stalled = 0
    status = MAX_ITER
    info = {}
    iteration = 0
    for iteration in range(opts.max_iter + 1):
        if not _finite(x, y, s, z, tau, kappa):
            LOGGER.info("Iterates are not finite at iteration %d", iteration)
            break
        fx = apply_f(x)
        rx = A.T @ y - adjoint_f(z) + c * tau
        ry = b * tau - A @ x
        rz = [si - fi - oi * tau for si, fi, oi in zip(s, fx, f0)]
        cx, by, hz = float(c @ x), float(b @ y), _inner(cones, f0, z)
        rt = kappa + cx + by + hz
        gap = _inner(cones, s, z)
        mu = (gap + tau * kappa) / (nu + 1)
        pcost = cx / tau
        dcost = -(by + hz) / tau
        pres = max(np.linalg.norm(ry) / resy0,
                   np.sqrt(_inner(cones, rz, rz)) / resz0) / tau
        dres = np.linalg.norm(rx) / resx0 / tau
        relgap = gap / tau ** 2 / max(1.0, abs(pcost), abs(dcost))
        info = dict(gap=gap / tau ** 2, primal_residual=pres, dual_residual=dres,
                    primal_objective=pcost, dual_objective=dcost)
        LOGGER.debug("%3d: pcost=% .8e dcost=% .8e pres=%.2e dres=%.2e gap=%.2e tau/kappa=%.2e",
                     iteration, pcost, dcost, pres, dres, gap / tau ** 2, tau / kappa)

        if pres <= opts.tol and dres <= opts.tol and relgap <= opts.tol:
            status = OPTIMAL
            break
        # infeasibility measures are invariant under scaling of the iterates
        pinfres = dinfres = np.inf
        if by + hz < 0:
            pinfres = np.linalg.norm(A.T @ y - adjoint_f(z)) / resx0 / -(by + hz)
            if pinfres < candidate_residual:
                candidate_residual = pinfres
                candidate = (y.copy(), [v.copy() for v in z])
            if pinfres <= opts.tol and tau <= opts.tau_kappa_ratio * kappa:
                status = PRIMAL_INFEASIBLE
                break
            if pinfres <= CERTIFICATE_GATE and tau <= kappa:
                repaired = certify(y, z)
                if repaired is not None:
                    y, z = repaired
                    status = PRIMAL_INFEASIBLE
                    break
        if cx < 0:
            homogeneous = [si - fi for si, fi in zip(s, fx)]
            dinfres = max(np.linalg.norm(A @ x) / resy0,
                          np.sqrt(_inner(cones, homogeneous, homogeneous)) / resz0) / -cx
            if dinfres <= opts.tol and tau <= opts.tau_kappa_ratio * kappa:
                status = DUAL_INFEASIBLE
                break
        if iteration == opts.max_iter:
            break

        # progress on optimality or on either certificate resets the stall counter
        measures = (max(pres, dres, relgap), pinfres, dinfres)
        if measures[0] < 0.9 * lowest[0]:
            best = (x.copy(), y.copy(), [v.copy() for v in s], [v.copy() for v in z],
                    tau, kappa, dict(info))
        if any(value < 0.9 * bound for value, bound in zip(measures, lowest)):
            stalled = 0
        else:
            stalled += 1
            if stalled >= STALL_ITERATIONS:
                LOGGER.info("Solver stalled at iteration %d", iteration)
                break
        lowest = [min(value, bound) for value, bound in zip(measures, lowest)]

        try:
            scalings = [_Scaling(cone, si, zi) for cone, si, zi in zip(cones, s, z)]
            kkt = _KKTSystem(inst, A, scalings, opts.regularization)
        except NumericalBreakdown:
            if iteration == 0:
                raise
            LOGGER.info("Numerical breakdown at iteration %d", iteration)
            break
        x2, y2 = kkt.solve(-c - adjoint_f([sc.weighted(oi) for sc, oi in zip(scalings, f0)]),
                           b)
        z2 = [sc.weighted(-fi - oi)
              for sc, fi, oi in zip(scalings, apply_f(x2), f0)]
        denominator = float(c @ x2 + b @ y2) + _inner(cones, f0, z2) - kappa / tau

        def direction(eta, targets, rk):
            # pylint: disable=cell-var-from-loop
            rcs = [sc.unscale(sc.lam_divide(target)) for sc, target in zip(scalings, targets)]
            rhs = [rc + eta * rzi for rc, rzi in zip(rcs, rz)]
            f1 = -eta * rx + adjoint_f([sc.weighted(value) for sc, value in zip(scalings, rhs)])
            x1, y1 = kkt.solve(f1, eta * ry)
            z1 = [sc.weighted(value - fi)
                  for sc, value, fi in zip(scalings, rhs, apply_f(x1))]
            numerator = (-eta * rt - rk / tau - float(c @ x1 + b @ y1) -
                         _inner(cones, f0, z1))
            dtau = numerator / denominator
            dkappa = (rk - kappa * dtau) / tau
            dz = [_symmetrize(cone, z1i + dtau * z2i) for cone, z1i, z2i in zip(cones, z1, z2)]
            ds = [_symmetrize(cone, rc - sc.w_apply(dzi))
                  for cone, rc, sc, dzi in zip(cones, rcs, scalings, dz)]
            return x1 + dtau * x2, y1 + dtau * y2, dz, ds, dtau, dkappa

        def max_step(step):
            _dx, _dy, dz, ds, dtau, dkappa = step
            alpha = np.inf
            for sc, dsi, dzi in zip(scalings, ds, dz):
                alpha = min(alpha, sc.max_step(sc.scale_s(dsi)), sc.max_step(sc.scale_z(dzi)))
            if dtau < 0:
                alpha = min(alpha, -tau / dtau)
            if dkappa < 0:
                alpha = min(alpha, -kappa / dkappa)
            return alpha

        try:
            lam2 = [sc.lam_square() for sc in scalings]
            affine = direction(1.0, [-value for value in lam2], -tau * kappa)
            alpha = min(1.0, max_step(affine))
            sigma = (1 - alpha) ** 3
            ds_aff = [sc.scale_s(value) for sc, value in zip(scalings, affine[3])]
            dz_aff = [sc.scale_z(value) for sc, value in zip(scalings, affine[2])]
            targets = [sigma * mu * cone.identity() - l2 - _sym_product(cone, dsa, dza)
                       for cone, l2, dsa, dza in zip(cones, lam2, ds_aff, dz_aff)]
            rk = sigma * mu - tau * kappa - affine[4] * affine[5]
            step = direction(1 - sigma, targets, rk)
            alpha = min(1.0, opts.step_fraction * max_step(step))
        except NumericalBreakdown:
            LOGGER.info("Numerical breakdown in step computation at iteration %d", iteration)
            break
        if alpha < MIN_STEP:
            LOGGER.info("Step length vanished at iteration %d", iteration)
            break
        dx, dy, dz, ds, dtau, dkappa = step
        x = x + alpha * dx
        y = y + alpha * dy
        s = [_symmetrize(cone, si + alpha * dsi) for cone, si, dsi in zip(cones, s, ds)]
        z = [_symmetrize(cone, zi + alpha * dzi) for cone, zi, dzi in zip(cones, z, dz)]
        tau += alpha * dtau
        kappa += alpha * dkappa

    if status == MAX_ITER and candidate is not None:
        repaired = certify(*candidate)
        if repaired is not None:
            LOGGER.info("Infeasibility certificate recovered after %d iterations", iteration)
            y, z = repaired
            status = PRIMAL_INFEASIBLE

    full_y = np.zeros(inst.A.shape[0])
    if status == OPTIMAL:
        full_y[kept] = y / tau
        result = SdpSolution(OPTIMAL, x / tau, full_y, [zi / tau for zi in z],
                             [si / tau for si in s], iterations=iteration, tol=opts.tol, **info)
    elif status == PRIMAL_INFEASIBLE:
        scale = -(float(b @ y) + _inner(cones, f0, z))
        full_y[kept] = y / scale
        result = SdpSolution(PRIMAL_INFEASIBLE, x, full_y, [zi / scale for zi in z], s,
                             iterations=iteration, tol=opts.tol, **info)
    elif status == DUAL_INFEASIBLE:
        scale = -float(c @ x)
        full_y[kept] = y
        result = SdpSolution(DUAL_INFEASIBLE, x / scale, full_y, z,
                             [si / scale for si in s], iterations=iteration, tol=opts.tol,
                             **info)
    else:
        if best is not None:
            x, y, s, z, tau, kappa, info = best
        full_y[kept] = y / tau
        result = SdpSolution(MAX_ITER, x / tau, full_y, [zi / tau for zi in z],
                             [si / tau for si in s], iterations=iteration, tol=opts.tol, **info)
    LOGGER.info("SDP solved: status=%s after %d iterations", result.status, iteration)
    return result
