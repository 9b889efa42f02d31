"""Pucci extremal operators: exact evaluation, radial solutions, monotone
finite differences and a harness for small-diffusion and short-time limits."""

from .errors import (ConfigurationError, CurvatureConditionError, DomainError, FitError,
                     GeometryError, InputError, MultiContactError, ParameterError,
                     PucciError, SolverError)
from .pucci import (PucciParams, SymMatrix, beta_gamma, eigenvalues, game_p_laplacian,
                    game_sandwich_params, pucci, pucci_minus, pucci_minus_sup_inf,
                    pucci_plus, pucci_plus_sup_inf, radial_hessian, radial_pucci)
from .special import (ProfileParams, QuadratureReport, erfc_fn, f_asymptotic_large,
                      f_asymptotic_small, f_profile, g_asymptotic_large, g_profile,
                      gamma_fn, ode_residual_check)
from .radial import (RadialEllipticSolution, ball_solution, elliptic_barrier_above,
                     elliptic_barrier_below, exterior_solution, parabolic_barrier_above,
                     parabolic_barrier_below, phi_global, radial_table)
from .geometry import (Annulus, Ball, ConvexPolygon, ContactData, ExteriorBall,
                       ImplicitDomain, ModulusOfContinuity, contact_ball, domain_from_dict,
                       psi_omega)
from .fd import (GridConfig, ScalarField, discrete_pucci, residual_report, solve_elliptic,
                 solve_parabolic, solve_radial_parabolic)
from .asym import (AsymStudy, QMeanResult, big_c_constant, c_constant, elliptic_qmean_limit,
                   parabolic_qmean_limit, q_mean, varadhan_sweep)

__version__ = "0.1.0"
