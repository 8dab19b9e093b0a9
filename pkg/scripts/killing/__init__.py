"""
Exact prolongation-projection analysis of Killing tensors (polynomial integrals
of the geodesic flow) for stationary axisymmetric metrics.
"""

from .errors import (
    BranchError,
    ExactAlgebraError,
    ExpressionParseError,
    InternalConsistencyError,
    KillingAnalysisError,
    MetricError,
    MetricFileError,
    MetricValidationError,
    NonGenericPointError,
    SingularMetricError,
    UnknownMetricError,
    ZeroDenominatorError,
)
from .exact_rank import RankCertificate, certify_rank, kernel_basis, rank_exact, rank_mod_p
from .killing_system import (
    BranchSpec,
    EquationId,
    LinearForm,
    UnknownId,
    equations,
    meqns,
    nvars,
    static_split_plan,
    trivial_family,
    trivials_count,
)
from .metric_catalog import BUILTIN_METRICS, MetricSpec, builtin
from .metric_file import format_metric_file, load_metric_file, parse_metric_file
from .momentum_poly import MomPoly, poisson
from .pipeline import AnalysisOptions, BoundReport, BranchResult, analyze_branch, full_analysis
from .prolongation import PointSystem, ProlongedSystem, SparseIntMatrix, prolong

__all__ = [
    'AnalysisOptions',
    'BoundReport',
    'BranchError',
    'BranchResult',
    'BranchSpec',
    'BUILTIN_METRICS',
    'EquationId',
    'ExactAlgebraError',
    'ExpressionParseError',
    'InternalConsistencyError',
    'KillingAnalysisError',
    'LinearForm',
    'MetricError',
    'MetricFileError',
    'MetricSpec',
    'MetricValidationError',
    'MomPoly',
    'NonGenericPointError',
    'PointSystem',
    'ProlongedSystem',
    'RankCertificate',
    'SingularMetricError',
    'SparseIntMatrix',
    'UnknownId',
    'UnknownMetricError',
    'ZeroDenominatorError',
    'analyze_branch',
    'builtin',
    'certify_rank',
    'equations',
    'format_metric_file',
    'full_analysis',
    'kernel_basis',
    'load_metric_file',
    'meqns',
    'nvars',
    'parse_metric_file',
    'poisson',
    'prolong',
    'rank_exact',
    'rank_mod_p',
    'static_split_plan',
    'trivial_family',
    'trivials_count',
]
