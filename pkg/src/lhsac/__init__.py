"""Hermitian-sphere aggregation with adaptive coupling gains."""
from ._kernels import BACKEND
from .core import (
    CouplingLaw,
    DegenerateStateError,
    Ensemble,
    InitRecipe,
    ModelParams,
    RejectionBudgetError,
    correlation,
    gamma0_eval,
    hermitian_inner,
    project_to_sphere,
    sample_initial,
)
from .diagnostics import (
    DiagnosticsRecord,
    HypothesisReport,
    check_theorem,
    diameter_D,
    dL_dt_analytic,
    fit_decay_rate,
    kappa_upper_bound,
    lambda_tilde_closed_form,
    lyapunov_L,
    riccati_envelope,
    sl_pair_defect,
)
from .dynamics import Derivative, Variant
from .integrate import (
    IntegratorSettings,
    NumericalError,
    Trajectory,
    matrix_exponential,
    simulate,
    splitting_compose,
    step_rk4,
)

__version__ = "0.1.0"
