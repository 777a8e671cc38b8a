"""matherlab: invariant measures of Hamiltonian flows, computably.

Occupation measures and rotation vectors of integrated orbits, the Mather
alpha-function by linear programming over transition measures, Clarke
subdifferential numerics, Lagrange flux / period-group / kappa / pb+
estimators, and the four built-in experiments (superconductivity channel,
planar annulus, pendulum alpha-scan, pathological integrable profile).
"""

from .phase import (ClosedOneForm, HamiltonianSystem, PlanePoint,
                    TorusCotangentPoint, angle_form, annulus_system,
                    channel_system, cross_term_system, dtheta,
                    hamiltonian_vector_field, pair_form_with_field,
                    pathological_system, pendulum_system, system_from_config)
from .integrate import (EscapeEvent, Trajectory, detect_escape, integrate,
                        integrate_batch)
from .measure import (OccupationMeasure, RotationVector, action_of_measure,
                      convex_combine, occupation_measure, rotation_vector,
                      support_clearance)
from .mather import (AlphaResult, DiscreteLagrangian, alpha_lax_oleinik,
                     alpha_lp, beta_conjugate, discretize_lagrangian,
                     subdifferential_contains_rotation)
from .subdiff import (ConvexPolytope, SampledFunction, clarke_subdifferential,
                      dini_lower_derivative, lebourg_witness)
from .shape import (LagrangeIsotopy, PeriodGroupInput, gamma_generator,
                    kappa_circle_estimate, kappa_graph_estimate,
                    lagrange_flux, pb_plus_estimate, shape_witness_circle)
from .scenarios import (ScenarioReport, run_annulus, run_channel,
                        run_pathological, run_pendulum_alpha)

__version__ = "0.1.0"
