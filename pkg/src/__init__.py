"""
iqprob - imprecise joint probabilities for non-commuting quantum events.
Lower/upper probability operators for projector pairs, their CS-decomposition
geometry, classical imprecise-measure checks and reproducible property suites.
"""

__version__ = "1.0.0"
__author__ = "Mohammad R"
__description__ = "Lower and upper joint probabilities for non-commuting projectors"

from .classical_ip import (
    CredalSet,
    EventSpace,
    ImpreciseMeasure,
    check_axioms_classical,
    check_derived_inequalities,
    envelope,
)
from .errors import IQProbError, NumericalError, ValidationError
from .examples_spin import reproduce_tables, spin1_catalog, spin_half_catalog
from .hermitian_core import (
    DensityMatrix,
    HermitianOperator,
    Projector,
    Tolerances,
    validate_density,
    validate_projector,
)
from .imprecise_probability import (
    ProbabilityInterval,
    check_axioms,
    conditional_interval,
    dominance_spectrum,
    interval_distance,
    lower_operator,
    probability_interval,
    sure_dominance,
    upper_operator,
)
from .measurement_models import (
    MeasurementOrder,
    ProjectiveResolution,
    marginal_defect,
    no_go_certificate,
    two_time_mean,
    two_time_probability,
)
from .projector_geometry import (
    IntersectionMethod,
    cs_decompose,
    intersection_projector,
    principal_angles,
)
from .property_suite import PropertySuiteRunner

__all__ = [
    'CredalSet',
    'DensityMatrix',
    'EventSpace',
    'HermitianOperator',
    'IQProbError',
    'ImpreciseMeasure',
    'IntersectionMethod',
    'MeasurementOrder',
    'NumericalError',
    'ProbabilityInterval',
    'Projector',
    'ProjectiveResolution',
    'PropertySuiteRunner',
    'Tolerances',
    'ValidationError',
    'check_axioms',
    'check_axioms_classical',
    'check_derived_inequalities',
    'conditional_interval',
    'cs_decompose',
    'dominance_spectrum',
    'envelope',
    'intersection_projector',
    'interval_distance',
    'lower_operator',
    'marginal_defect',
    'no_go_certificate',
    'principal_angles',
    'probability_interval',
    'reproduce_tables',
    'spin1_catalog',
    'spin_half_catalog',
    'sure_dominance',
    'two_time_mean',
    'two_time_probability',
    'upper_operator',
    'validate_density',
    'validate_projector',
]
