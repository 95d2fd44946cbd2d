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
Numerical robustness test cases for sepmarg
"""

__docformat__ = 'restructuredtext'

import unittest

import numpy as np
from scipy import sparse

from sepmarg.hierarchy import build_ti2d_reflect, check_instance, cone_template
from sepmarg.interfaces import INFEASIBLE, NumericalBreakdown
from sepmarg.qops import HermitianOperator
from sepmarg.sdp import Cone, SdpInstance, _Scaling


class TestBreakdowns(unittest.TestCase):
    """Linear algebra failures are reported as solver breakdowns"""

    def setUp(self):
        inst = SdpInstance()
        group = inst.add_group(3)
        basis = np.zeros((3, 2, 2))
        basis[0, 0, 0] = basis[2, 1, 1] = 1.0
        basis[1, 0, 1] = basis[1, 1, 0] = 1.0
        inst.add_cone(group, basis, label='plain')
        self.cone = inst.cones[0]

    def test_scaling_outside_cone(self):
        with self.assertRaises(NumericalBreakdown):
            _Scaling(self.cone, -np.eye(2), np.eye(2))

    def test_non_finite_step(self):
        scaling = _Scaling(self.cone, np.eye(2), np.eye(2))
        with self.assertRaises(NumericalBreakdown):
            scaling.max_step(np.full((2, 2), np.nan))

    def test_diagonal_step(self):
        diagonal = Cone(0, 2)
        scaling = _Scaling(diagonal, np.ones(2), np.ones(2))
        with self.assertRaises(NumericalBreakdown):
            scaling.max_step(np.array([np.nan, 1.0]))


class TestLattice(unittest.TestCase):
    """Second level of the lattice hierarchy on a two by two plaquette"""

    def test_sparse_templates(self):
        template = cone_template((2, 2, 2, 2), (2, 2, 2, 2), (1, 1, 0, 0))
        self.assertTrue(sparse.issparse(template))
        self.assertEqual(template.shape[1], 81 * 81)

    def test_noisy_ghz_plaquette(self):
        ghz = np.zeros(16)
        ghz[[0, 15]] = 1 / np.sqrt(2)
        state = 0.5 * np.outer(ghz, ghz) + 0.5 * np.eye(16) / 16
        inst = build_ti2d_reflect(HermitianOperator(state, (2, 2, 2, 2)), 2)
        self.assertEqual([block['size'] for block in inst.metadata['blocks']], [81])
        verdict, sol = check_instance(inst)
        self.assertEqual(verdict, INFEASIBLE, sol.status)


if __name__ == '__main__':
    unittest.main()
