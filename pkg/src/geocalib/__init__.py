"""Numerical checks for the split special Lagrangian calibration on the
space of oriented geodesics of hyperbolic space."""

from .exterior_core import (CausalClass, GeometryInputError, InnerProduct,
                            classify_gram, form_on_blade, gram_matrix, gram_volume)
from .foliation import (AdmissibilityError, FoliationChart, UnitFieldSpec,
                        builtin_field, chart_to_line, gauss_jacobians, graph_map,
                        s_chart, ter_margin, transversality)
from .geodesic_space import (JacobiData, LineTangent, OrientedLine, killing_norm,
                             line_inner, push_line_tangent)
from .hyperbolic import (Geodesic, covariant_derivative, endpoint, geodesic_eval,
                         jacobi_eval, model_convert, parallel_transport,
                         reference_hypersurface)
from .psi_calibration import (CalibConstants, ChartizedSubmanifold,
                              NotSpacelikeError, OutsideDomainError,
                              PerturbationSpec, QuadratureGrid, VolumeReport,
                              calib_constants, frame_A, maximization_report,
                              mo_chart, perturb_mo, psi_eval, psi_flux,
                              region_volume)
from .split_space import (GraphPlane, SplitVector, phi_c_eval,
                          sample_spacelike_graph, special_lagrangian_defect,
                          split_inner)

__version__ = "0.1.0"
