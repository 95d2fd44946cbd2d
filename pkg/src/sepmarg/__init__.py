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

"""Separable quantum marginals package

Semidefinite relaxation hierarchies deciding whether an ensemble of reduced
density matrices is compatible with a globally separable state.
"""

__docformat__ = 'restructuredtext'

from beaker.cache import cache_regions
from pyramid.i18n import TranslationStringFactory


_ = TranslationStringFactory('sepmarg')


CACHE_REGION = 'sepmarg'

# applications may configure the region themselves
cache_regions.setdefault(CACHE_REGION, {
    'type': 'memory',
    'expire': 3600
})
