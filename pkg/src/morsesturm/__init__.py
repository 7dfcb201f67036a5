"""Morse indices, nullities, and Bott-type index functions for complex
Morse-Sturm systems of metric index 1."""

from .system import (CirclePoint, MetricForm, MonodromyMap, MorseSturmSystem,
                     is_singular, iterated_data, load_system, operator_A,
                     positive_metric, system_from_json, validate)
from .paths import CallablePath, ConstantPath, SampledPath, TrigPath
from .ode import (PoincareData, fundamental_matrix, nullity_star,
                  nullity_zero, pairing_drift, poincare, solve_jacobi)
from .galerkin import (Mesh, NonconvergenceError, assemble_constraints,
                       assemble_form, epsilon, lambda_with_refinement,
                       restricted_index)
from .bott import (DiscreteField, IdentityViolation, IndexProfile,
                   build_report, classify, fourier_check, growth_stats,
                   iterate_indices, jump_table, psi_transform, scan_circle,
                   upsilon_transform)
from . import generators

__version__ = "0.1.0"
