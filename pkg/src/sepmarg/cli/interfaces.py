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

"""SepMarg.cli.interfaces module

This module defines command line exit codes and the keys of the files
read and written by commands.
"""

from sepmarg.interfaces import FEASIBLE, INCONCLUSIVE, INFEASIBLE, SepMargError


__docformat__ = 'restructuredtext'


#
# Exit codes
#

EXIT_FEASIBLE = 0
EXIT_PARSE_ERROR = 1
EXIT_BREAKDOWN = 2
EXIT_INFEASIBLE = 3
EXIT_INCONCLUSIVE = 4

VERDICT_EXIT_CODES = {
    FEASIBLE: EXIT_FEASIBLE,
    INFEASIBLE: EXIT_INFEASIBLE,
    INCONCLUSIVE: EXIT_INCONCLUSIVE
}


#
# Files
#

VERSION_KEY = 'version'
DIMS_KEY = 'dims'
SCENARIO_KEY = 'scenario'
KIND_KEY = 'kind'
SETS_KEY = 'sets'
PARAMS_KEY = 'params'
STATES_KEY = 'states'
PRIVATE_KEY = 'private_sites'
TERMS_KEY = 'terms'
MATRIX_KEY = 'matrix'
SITES_KEY = 'n'
BOUNDARY_KEY = 'boundary'
MARGINALS_KEY = 'marginals'
DISTRIBUTION_KEY = 'distribution'
VARIABLES_KEY = 'variables'
SIZES_KEY = 'sizes'
TABLE_KEY = 'table'
CLIQUES_KEY = 'cliques'
CLIQUE_MAP_KEY = 'clique_map'
HIERARCHY_KEY = 'hierarchy'
LEVEL_KEY = 'level'
OFFSET_KEY = 'offset'
VIOLATION_KEY = 'violation'

WITNESS_SUFFIX = '.witness.json'


class FileFormatError(SepMargError, ValueError):
    """Malformed input file"""
