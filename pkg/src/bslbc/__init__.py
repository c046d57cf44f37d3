"""Finite-difference Black-Scholes operators with a linear boundary condition,
their maximum-norm stability and theta-method time stepping."""

from .analytic import (CallOption, call_price, call_price_time_derivative,
                       call_second_derivative, call_third_derivative, eta, kappa,
                       payoff_vector, truncation_errors)
from .grid import Grid, build_sinh_grid, build_uniform_grid
from .linalg import expm, log_norm_inf, norm_inf, solve_tridiagonal
from .operator import (DiscreteOperator, ModelParams, Scheme, Treatment, Verdict, assemble,
                       check_stability_condition, forward_fraction, mixed_select)
from .stability import (exp_tC_closed_form, max_norm_sweep, norm_exp_tC, phi_power_norm_C,
                        theoretical_inclusion, verify_discrete_inclusion,
                        verify_semidiscrete_inclusion)
from .timestepper import ThetaConfig, fit_order, measure_time_order, solve, theta_step

__version__ = "0.1.0"
