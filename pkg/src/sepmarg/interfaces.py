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

"""SepMarg.interfaces module

This module defines package interfaces, configuration schemas, vocabularies,
shared constants and exceptions.
"""

from zope.interface import Attribute, Interface
from zope.schema import Bool, Choice, Float, Int, List, Tuple
from zope.schema.vocabulary import SimpleTerm, SimpleVocabulary

from sepmarg import _


__docformat__ = 'restructuredtext'


#
# Numerical tolerances
#

HERMITIAN_TOL = 1e-12
ZERO_FLOOR = 1e-14
STATE_TOL = 1e-10
COMPAT_TOL = 1e-8
REFLECTION_TOL = 1e-10
CLASSICAL_TOL = 1e-10

DEFAULT_SOLVER_TOL = 1e-8
DEFAULT_MAX_ITER = 200
DEFAULT_STEP_FRACTION = 0.99
DEFAULT_REGULARIZATION = 1e-12
DEFAULT_RANK_THRESHOLD = 1e-10
DEFAULT_TAU_KAPPA_RATIO = 1e-6

DEFAULT_SCAN_RESOLUTION = 1e-3

SCHEMA_VERSION = 'sepmarg/1'


#
# Solver statuses
#

OPTIMAL = 'optimal'
PRIMAL_INFEASIBLE = 'primal_infeasible'
DUAL_INFEASIBLE = 'dual_infeasible'
MAX_ITER = 'max_iter'

SOLVER_STATUS = {
    OPTIMAL: _("Optimal"),
    PRIMAL_INFEASIBLE: _("Primal infeasible"),
    DUAL_INFEASIBLE: _("Dual infeasible"),
    MAX_ITER: _("Maximum iterations reached")
}

SOLVER_STATUS_VOCABULARY = SimpleVocabulary([
    SimpleTerm(v, title=t) for v, t in SOLVER_STATUS.items()
])


#
# Verdicts
#

FEASIBLE = 'feasible'
INFEASIBLE = 'infeasible'
INCONCLUSIVE = 'inconclusive'

VERDICTS = {
    FEASIBLE: _("Separable extension may exist at this level"),
    INFEASIBLE: _("Entangled: rejected by the relaxation"),
    INCONCLUSIVE: _("Solver did not converge")
}

VERDICTS_VOCABULARY = SimpleVocabulary([
    SimpleTerm(v, title=t) for v, t in VERDICTS.items()
])

STATUS_VERDICT = {
    OPTIMAL: FEASIBLE,
    PRIMAL_INFEASIBLE: INFEASIBLE,
    DUAL_INFEASIBLE: FEASIBLE,
    MAX_ITER: INCONCLUSIVE
}


#
# Scenario kinds
#

CUSTOM_SCENARIO = 'custom'
STAR_SCENARIO = 'star'
LINE_SCENARIO = 'line'
RING_SCENARIO = 'ring'
TI1D_SCENARIO = 'ti1d'
TI2D_SCENARIO = 'ti2d'

TI_SCENARIOS = (TI1D_SCENARIO, TI2D_SCENARIO)

SCENARIO_KINDS = {
    CUSTOM_SCENARIO: _("Custom family of sets"),
    STAR_SCENARIO: _("Star"),
    LINE_SCENARIO: _("Open line"),
    RING_SCENARIO: _("Ring"),
    TI1D_SCENARIO: _("Translation invariant chain"),
    TI2D_SCENARIO: _("Translation invariant lattice with vertical reflection")
}

SCENARIO_KINDS_VOCABULARY = SimpleVocabulary([
    SimpleTerm(v, title=t) for v, t in SCENARIO_KINDS.items()
])


#
# Hierarchies
#

H_HIERARCHY = 'H'
HBAR_HIERARCHY = 'Hbar'
LINE_HIERARCHY = 'line'
RING_HIERARCHY = 'ring'
TI1D_HIERARCHY = 'ti1d'
TI2D_HIERARCHY = 'ti2d'

HIERARCHIES = {
    H_HIERARCHY: _("Symmetric extensions with partial transpositions"),
    HBAR_HIERARCHY: _("Simplified hierarchy with private sites"),
    LINE_HIERARCHY: _("Open line hierarchy"),
    RING_HIERARCHY: _("Ring hierarchy on the fan completion"),
    TI1D_HIERARCHY: _("Translation invariant chain hierarchy"),
    TI2D_HIERARCHY: _("Translation invariant plaquette hierarchy")
}

HIERARCHIES_VOCABULARY = SimpleVocabulary([
    SimpleTerm(v, title=t) for v, t in HIERARCHIES.items()
])


#
# Boundary conditions
#

OPEN_BOUNDARY = 'open'
PERIODIC_BOUNDARY = 'periodic'

BOUNDARIES = {
    OPEN_BOUNDARY: _("Open boundary"),
    PERIODIC_BOUNDARY: _("Periodic boundary")
}

BOUNDARIES_VOCABULARY = SimpleVocabulary([
    SimpleTerm(v, title=t) for v, t in BOUNDARIES.items()
])


#
# Pauli letters
#

PAULI_LETTERS = {
    'I': _("Identity"),
    'X': _("Pauli X"),
    'Y': _("Pauli Y"),
    'Z': _("Pauli Z")
}

PAULI_LETTERS_VOCABULARY = SimpleVocabulary([
    SimpleTerm(v, title=t) for v, t in PAULI_LETTERS.items()
])


#
# Errors
#

class SepMargError(Exception):
    """Base package error"""


class NotHermitian(SepMargError, ValueError):
    """Matrix is not Hermitian within tolerance"""


class NoConvergence(SepMargError):
    """Iterative method hit its iteration cap"""


class NonSquare(SepMargError, ValueError):
    """Matrix is not square"""


class BadIndex(SepMargError, IndexError):
    """Subsystem or site index out of range"""


class ShapeMismatch(SepMargError, ValueError):
    """Operator shape doesn't match the declared subsystems"""


class IllFormed(SepMargError, ValueError):
    """Ill-formed SDP instance or input data"""


class NumericalBreakdown(SepMargError):
    """Interior point iteration broke down"""


class WrongStatus(SepMargError):
    """Operation requires another solver status"""


class InfiniteScenario(SepMargError, ValueError):
    """Operation is only defined on finite scenarios"""


class NotChordal(SepMargError, ValueError):
    """Graph is not chordal"""


class IncompatibleEnsemble(SepMargError, ValueError):
    """Quantum marginals are not locally compatible"""


class NotPrivate(SepMargError, ValueError):
    """Site declared private occurs in another set"""


class WrongKind(SepMargError, ValueError):
    """Scenario kind doesn't match the requested builder"""


class NotReflectionSymmetric(SepMargError, ValueError):
    """Plaquette state is not invariant under the required reflection"""


class AlphabetMismatch(SepMargError, ValueError):
    """Overlapping distributions disagree on alphabet sizes"""


class NotRunningIntersection(SepMargError, ValueError):
    """Cliques are not given in running intersection order"""


class Incompatible(SepMargError, ValueError):
    """Classical marginals are not locally compatible"""


class TooLarge(SepMargError, ValueError):
    """Instance exceeds the brute force or diagonalization budget"""


class UnsupportedTerm(SepMargError, ValueError):
    """Hamiltonian term is not supported by any set of the scenario"""


#
# Configuration schemas
#

def is_positive(value):
    """Strictly positive numbers constraint"""
    return value > 0


class ISolverOptions(Interface):
    """Interior point solver options"""

    tol = Float(title=_("Tolerance"),
                description=_("Feasibility, gap and certificate tolerance"),
                min=0.0,
                default=DEFAULT_SOLVER_TOL,
                required=True)

    max_iter = Int(title=_("Maximum iterations"),
                   min=1,
                   default=DEFAULT_MAX_ITER,
                   required=True)

    step_fraction = Float(title=_("Step fraction"),
                          description=_("Fraction of the step to the cone boundary"),
                          min=0.5,
                          max=1.0,
                          default=DEFAULT_STEP_FRACTION,
                          required=True)

    regularization = Float(title=_("Static regularization"),
                           description=_("Added to the Schur complement diagonal"),
                           min=0.0,
                           default=DEFAULT_REGULARIZATION,
                           required=True)

    rank_threshold = Float(title=_("Rank threshold"),
                           description=_("Relative pivot size below which an equality row "
                                         "is considered dependent"),
                           min=0.0,
                           default=DEFAULT_RANK_THRESHOLD,
                           required=True)

    tau_kappa_ratio = Float(title=_("Tau/kappa ratio"),
                            description=_("Self-dual embedding ratio under which "
                                          "infeasibility is reported"),
                            min=0.0,
                            default=DEFAULT_TAU_KAPPA_RATIO,
                            required=True)

    preprocess = Bool(title=_("Preprocess rows"),
                      description=_("Remove dependent equality rows before solving"),
                      default=True,
                      required=True)


class IHierarchyOptions(Interface):
    """Relaxation hierarchy options"""

    level = Int(title=_("Level"),
                description=_("Number of symmetric copies of every extended site"),
                min=1,
                default=1,
                required=True)

    hierarchy = Choice(title=_("Hierarchy"),
                       vocabulary=HIERARCHIES_VOCABULARY,
                       default=H_HIERARCHY,
                       required=True)

    compat_tol = Float(title=_("Compatibility tolerance"),
                       description=_("Trace norm tolerance of local compatibility and "
                                     "state validity checks"),
                       min=0.0,
                       default=COMPAT_TOL,
                       required=True)

    extra_cuts = Tuple(title=_("Extra cuts"),
                       description=_("Additional partial transpositions, as mappings of "
                                     "site labels to transposed copy counts"),
                       required=False,
                       default=())


class IScanOptions(Interface):
    """Inverse temperature scan options"""

    beta_min = Float(title=_("Minimum inverse temperature"),
                     min=0.0,
                     default=0.0,
                     required=True)

    beta_max = Float(title=_("Maximum inverse temperature"),
                     min=0.0,
                     default=2.0,
                     required=True)

    step = Float(title=_("Grid step"),
                 constraint=is_positive,
                 default=0.05,
                 required=True)

    resolution = Float(title=_("Resolution"),
                       description=_("Bisection stops at this bracket width"),
                       constraint=is_positive,
                       default=DEFAULT_SCAN_RESOLUTION,
                       required=True)

    max_workers = Int(title=_("Workers"),
                      description=_("Grid points solved concurrently"),
                      min=1,
                      default=1,
                      required=True)


#
# Data interfaces
#

class IHermitianOperator(Interface):
    """Hermitian operator on a multipartite space"""

    dims = Attribute("Ordered local dimensions")

    matrix = Attribute("Dense complex matrix")

    def trace(self):
        """Get operator trace"""

    def is_state(self, tol=STATE_TOL):
        """Check for unit trace and positivity"""


class IMarginalScenario(Interface):
    """Marginal scenario interface"""

    kind = Choice(title=_("Scenario kind"),
                  vocabulary=SCENARIO_KINDS_VOCABULARY,
                  default=CUSTOM_SCENARIO)

    sites = Attribute("Ordered site labels")

    dims = Attribute("Mapping of site labels to local dimensions")

    sets = Attribute("Family of index sets, as sorted tuples")

    def dim(self, site):
        """Get local dimension of given site"""


class IStateEnsemble(Interface):
    """Ensemble of reduced states"""

    scenario = Attribute("Marginal scenario")

    states = Attribute("Mapping of sets to Hermitian operators")

    def compatibility(self):
        """Get maximal trace norm deviation between overlapping marginals"""


class ISdpInstance(Interface):
    """SDP instance in linear matrix inequality form"""

    groups = Attribute("Variable group sizes")

    cones = Attribute("Cone list")

    A = Attribute("Sparse equality rows")

    b = Attribute("Equality right hand side")

    c = Attribute("Objective vector")

    rows = Attribute("Equality rows provenance")

    metadata = Attribute("Builder metadata")


class ISdpSolution(Interface):
    """SDP solution interface"""

    status = Choice(title=_("Status"),
                    vocabulary=SOLVER_STATUS_VOCABULARY)

    x = Attribute("Primal variables")

    y = Attribute("Equality multipliers")

    z = Attribute("Cone multipliers")

    gap = Attribute("Duality gap")

    primal_residual = Attribute("Primal residual")

    dual_residual = Attribute("Dual residual")


class IFarkasRay(Interface):
    """Primal infeasibility certificate"""

    y = Attribute("Equality rows multipliers")

    Z = Attribute("Cone multipliers")

    def verify(self, instance, tol):
        """Check certificate conditions"""


class IWitness(Interface):
    """Entanglement witness"""

    terms = Attribute("Mapping of sets to Hermitian operators")

    offset = Attribute("Constant bound")

    violation = Attribute("Violation margin on the rejected ensemble")

    def evaluate(self, ensemble):
        """Get witness value on given ensemble, minus offset"""


class IDiscreteDistribution(Interface):
    """Discrete probability distribution"""

    variables = Attribute("Ordered site labels")

    sizes = Attribute("Alphabet sizes")

    table = Attribute("Probability table")


class IConvergenceBound(Interface):
    """Trace distance convergence bound"""

    level = Attribute("Hierarchy level")

    bounds = Attribute("Mapping of sets to trace norm radius")


class IPauliHamiltonian(Interface):
    """Pauli strings Hamiltonian"""

    n = Attribute("Number of sites")

    terms = Attribute("List of (coefficient, pauli string) terms")

    boundary = Choice(title=_("Boundary condition"),
                      vocabulary=BOUNDARIES_VOCABULARY,
                      default=OPEN_BOUNDARY)

    def matrix(self):
        """Get dense matrix"""


class IBetaScanResult(Interface):
    """Critical inverse temperature scan result"""

    betas = Attribute("Grid of inverse temperatures")

    verdicts = List(title=_("Verdicts"),
                    description=_("Verdict at every grid point"),
                    value_type=Choice(vocabulary=VERDICTS_VOCABULARY))

    transitions = Attribute("Bracketing intervals of verdict changes")

    level = Attribute("Hierarchy level")
