"""Stabilized semi-implicit Cahn-Hilliard stepping with max-norm and energy stability checks."""

from .field import Field, TorusGrid, norms_and_mean, spectral_laplacian, transform, inverse_transform
from .graph import (GraphLaplacianOp, ResolventProblem, apply_biharmonic, central_difference_1d,
                    five_point_2d, resolvent_solve)
from .kernels import general_kernel, kernel_1d_periodic, maximize_linear_meanzero, sharp_meanzero_constant
from .stepper import (EnergyReport, StepperState, dissipation_report, energy, find_critical_tau,
                      invariant_region_step, step_graph, step_spectral)
from .theory import (SchemeParams, StabilityCertificate, bound_window, certify, critical_A, cubic_envelope,
                     splitting_beta, unstabilized_tau_heuristic)
