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
Generic test case for sepmarg docstrings
"""

__docformat__ = 'restructuredtext'

import doctest
import os
import unittest

from sepmarg.tests import get_package_dir


CURRENT_DIR = os.path.abspath(os.path.dirname(__file__))


def doc_suite(test_dir, globs=None):
    """Returns a test suite, based on doc tests strings found in package modules"""
    suite = []
    flags = (doctest.ELLIPSIS | doctest.NORMALIZE_WHITESPACE |
             doctest.REPORT_ONLY_FIRST_FAILURE)

    package_dir = get_package_dir(test_dir)

    # filtering files on extension, sub-packages included
    docs = []
    for root, _dirs, files in os.walk(package_dir):
        if os.path.basename(root) in ('tests', 'doctests'):
            continue
        for name in sorted(files):
            if name.endswith('.py') and \
                    not (name.startswith('__') and os.path.samefile(root, package_dir)):
                docs.append(os.path.join(root, name))

    for path in sorted(docs):
        with open(path, encoding='utf-8') as fd:  # pylint: disable=invalid-name
            content = fd.read()
        if '>>> ' not in content:
            continue
        relative = os.path.relpath(path, package_dir).replace('.py', '')
        parts = ['sepmarg'] + [part for part in relative.split(os.sep) if part != '__init__']
        suite.append(doctest.DocTestSuite('.'.join(parts), optionflags=flags,
                                          globs=globs))

    return unittest.TestSuite(suite)


def test_suite():
    """returns the test suite"""
    return doc_suite(CURRENT_DIR)


if __name__ == '__main__':
    unittest.main(defaultTest='test_suite')
