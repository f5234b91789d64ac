"""Ймовірнісні рангові схеми для квазілінійних параболічних рівнянь."""

from __future__ import annotations

from importlib import metadata

from .measure import (
    QuantileProfile,
    StepCDF,
    quantile,
    tail_fn,
    wasserstein_pp_double_integral,
    wasserstein_pp_quantile,
    wasserstein_pp_samples_vs_profile,
    wasserstein_pp_sorted,
)
from .model import (
    CoefficientModel,
    ConditionReport,
    antiderivative,
    builtin_from_spec,
    check_conditions,
    from_callables,
    from_polynomials,
    make_builtin,
)
from .particle import (
    CnRule,
    CoupledState,
    Ensemble,
    SimConfig,
    coupled_contraction_run,
    em_step,
    init_ensemble,
    rank_fractions,
    reordered_step,
    simulate,
)
from .pde import (
    dissipation_identity_check,
    dissipation_rate,
    fd_solve,
    quantile_pde_solve,
    weighted_l2,
)
from .stationary import (
    centering_offset,
    degenerate_family,
    hardy_poincare_check,
    psi,
    psi_inverse,
    stationary_cdf,
    stationary_first_moment,
    stationary_residual,
)

try:
    __version__ = metadata.version("quasilinear")
except metadata.PackageNotFoundError:
    __version__ = "0.1.0"
