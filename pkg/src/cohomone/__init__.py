"""Curvature and obstruction toolkit for cohomogeneity one manifolds."""

from .curvature import HomogeneousCurvature, MetricOperator, metric_operator, orbit_plane_sectional, radial_sectional
from .diagram import GroupDiagram, bi_invariant_diagram, brieskorn_diagram, theorem31_diagram
from .errors import CohomoneError
from .harmonic import check_theorem31_conditions, harmonic_rep
from .liealg import AlgElement, QFormParams, basis_element, bracket, q_inner
from .metricmodel import MetricJet, MetricProfile, normalize, random_admissible, smoothness_check
from .obstruction import SearchParams, WitnessCertificate, find_witness
from .presets import preset_round, preset_stiefel

__version__ = "0.1.0"

__all__ = [
    "AlgElement", "CohomoneError", "GroupDiagram", "HomogeneousCurvature", "MetricJet", "MetricOperator",
    "MetricProfile", "QFormParams", "SearchParams", "WitnessCertificate", "basis_element", "bi_invariant_diagram",
    "bracket", "brieskorn_diagram", "check_theorem31_conditions", "find_witness", "harmonic_rep", "metric_operator",
    "normalize", "orbit_plane_sectional", "preset_round", "preset_stiefel", "q_inner", "radial_sectional",
    "random_admissible", "smoothness_check", "theorem31_diagram",
]
