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
This module contains SepMarg separable quantum marginals package
"""

import os
from setuptools import setup, find_packages


DOCS = os.path.join(os.path.dirname(__file__),
                    'docs')

README = os.path.join(DOCS, 'README.rst')
HISTORY = os.path.join(DOCS, 'HISTORY.rst')

version = '1.0.0'
long_description = open(README).read() + '\n\n' + open(HISTORY).read()

tests_require = [
    'hypothesis',
    'zope.testrunner'
]

setup(name='sepmarg',
      version=version,
      description="Semidefinite hierarchies for the separable quantum marginal problem",
      long_description=long_description,
      classifiers=[
          "License :: OSI Approved :: Zope Public License",
          "Development Status :: 4 - Beta",
          "Programming Language :: Python",
          "Intended Audience :: Science/Research",
          "Topic :: Scientific/Engineering :: Physics",
      ],
      keywords='quantum entanglement separability SDP marginal',
      author='Thierry Florac',
      author_email='tflorac@ulthar.net',
      license='ZPL',
      packages=find_packages('src'),
      package_dir={'': 'src'},
      namespace_packages=[],
      include_package_data=True,
      package_data={'': ['*.txt', '*.rst']},
      zip_safe=False,
      # uncomment this to be able to run tests with setup.py
      test_suite="sepmarg.tests.test_utilsdocs.test_suite",
      tests_require=tests_require,
      extras_require=dict(test=tests_require),
      install_requires=[
          'setuptools',
          # -*- Extra requirements: -*-
          'beaker',
          'networkx',
          'numpy',
          'pyramid >= 2.0.0',
          'scipy >= 1.7',
          'zope.interface',
          'zope.schema'
      ],
      entry_points={
          'console_scripts': [
              'sepmarg = sepmarg.cli:main'
          ]
      })
