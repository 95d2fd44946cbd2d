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

"""SepMarg.sdpa module

This module writes SDP instances in the sparse SDPA text format, to
cross-check results with external solvers.

The SDPA primal form is: minimize c.x subject to sum_i x_i F_i - F_0 >= 0.
Every cone becomes a block, with F_0 = -f0; equality rows are written as
one diagonal block holding both A x - b >= 0 and b - A x >= 0:

    >>> import io
    >>> import numpy as np
    >>> from sepmarg.sdp import SdpInstance
    >>> from sepmarg.sdpa import dump_sdpa
    >>> inst = SdpInstance()
    >>> group = inst.add_group(1)
    >>> _ = inst.add_cone(group, np.eye(2)[None], offset=np.array([[0., 1.], [1., 0.]]))
    >>> inst.set_objective(group, [1.])
    >>> output = io.StringIO()
    >>> dump_sdpa(inst, output)
    >>> print(output.getvalue().strip())
    * sepmarg instance: 1 variables, 0 equality rows, 1 cones
    1
    1
    2
    1.0
    0 1 1 2 -1.0
    1 1 1 1 1.0
    1 1 2 2 1.0
"""

import numpy as np

from sepmarg.sdp import SdpInstance


__docformat__ = 'restructuredtext'


def _format(value):
    return repr(float(value))


def _matrix_entries(matrix):
    """Nonzero upper triangle entries of a symmetric matrix, 1-based"""
    rows, cols = np.nonzero(np.triu(matrix))
    for row, col in zip(rows, cols):
        yield row + 1, col + 1, matrix[row, col]


def sdpa_lines(inst: SdpInstance):
    """Iterate over the lines of the SDPA representation of an instance"""
    A, b, c = inst.A, inst.b, inst.c  # pylint: disable=invalid-name
    m = A.shape[0]
    yield (f'* sepmarg instance: {inst.size} variables, {m} equality rows, '
           f'{len(inst.cones)} cones')
    yield str(inst.size)
    blocks = [-cone.dim if cone.diagonal else cone.dim for cone in inst.cones]
    if m:
        blocks.append(-2 * m)
    yield str(len(blocks))
    yield ' '.join(str(size) for size in blocks)
    yield ' '.join(_format(value) for value in c)
    # constant matrix
    for index, cone in enumerate(inst.cones, start=1):
        if cone.offset is None:
            continue
        if cone.diagonal:
            for row in np.nonzero(cone.offset)[0]:
                yield f'0 {index} {row + 1} {row + 1} {_format(-cone.offset[row])}'
        else:
            for row, col, value in _matrix_entries(cone.offset):
                yield f'0 {index} {row} {col} {_format(-value)}'
    rows_block = len(inst.cones) + 1
    for row in np.nonzero(b)[0]:
        yield f'0 {rows_block} {row + 1} {row + 1} {_format(b[row])}'
        yield f'0 {rows_block} {m + row + 1} {m + row + 1} {_format(-b[row])}'
    # variables matrices
    columns = A.tocsc()
    for group, size in enumerate(inst.groups):
        start = inst.group_slice(group).start
        cones = [(index, cone) for index, cone in enumerate(inst.cones, start=1)
                 if cone.group == group]
        for local in range(size):
            variable = start + local + 1
            for index, cone in cones:
                if cone.diagonal:
                    yield f'{variable} {index} {local + 1} {local + 1} 1.0'
                else:
                    for row, col, value in _matrix_entries(cone.image(local)):
                        yield f'{variable} {index} {row} {col} {_format(value)}'
            column = columns[:, start + local]
            for row, value in zip(column.indices, column.data):
                yield f'{variable} {rows_block} {row + 1} {row + 1} {_format(value)}'
                yield (f'{variable} {rows_block} {m + row + 1} {m + row + 1} '
                       f'{_format(-value)}')


def dump_sdpa(inst, output):
    """Write SDPA representation of an instance to a path or an open text stream"""
    if isinstance(output, str):
        with open(output, 'w', encoding='utf-8') as stream:
            dump_sdpa(inst, stream)
        return
    for line in sdpa_lines(inst):
        output.write(line)
        output.write('\n')
