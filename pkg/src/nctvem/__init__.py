"""Nonconforming Trefftz virtual elements for the 2D Helmholtz impedance problem."""

from .analytic import ExactSolution, bessel_j0y0j1y1, eval_exact, hankel1_01, impedance_data
from .element import (AdmissibilityCheck, ElementOperators, build_element, build_gram,
                      build_local_stiffness, build_projector, build_stabilization,
                      check_admissibility)
from .errors import interpolation_dofs, projected_l2_error
from .exceptions import (ConfigError, DegenerateElementError, IllConditioningWarning,
                         InadmissibleElementWarning, MeshFormatError, MeshTopologyError,
                         NcTVEMError, NegativeStabilizationWarning, SolverError)
from .mesh import (PolygonalMesh, audit_regularity, generate_voronoi_lloyd, load_mesh,
                   parse_mesh, rectangle_mesh, save_mesh)
from .planewave import DirectionSet, EdgeBasis, filter_edge, make_directions
from .system import (DofMap, GlobalSystem, assemble, build_dof_map, build_edge_bases,
                     build_operators, solve, write_matrix_market)

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityCheck", "ConfigError", "DegenerateElementError", "DirectionSet", "DofMap",
    "EdgeBasis", "ElementOperators", "ExactSolution", "GlobalSystem", "IllConditioningWarning",
    "InadmissibleElementWarning", "MeshFormatError", "MeshTopologyError", "NcTVEMError",
    "NegativeStabilizationWarning", "PolygonalMesh", "SolverError", "assemble",
    "audit_regularity", "bessel_j0y0j1y1", "build_dof_map", "build_edge_bases",
    "build_element", "build_gram", "build_local_stiffness", "build_operators",
    "build_projector", "build_stabilization", "check_admissibility", "eval_exact",
    "filter_edge", "generate_voronoi_lloyd", "hankel1_01", "impedance_data",
    "interpolation_dofs", "load_mesh", "make_directions", "parse_mesh", "projected_l2_error",
    "rectangle_mesh", "save_mesh", "solve", "write_matrix_market",
]
