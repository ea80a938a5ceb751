"""Phase-shift optimization for IRS-aided MIMO links.

The main entry points are :func:`dsm_solve` (closed-form coordinate ascent
on the sum path gain), :func:`ga_solve`, :func:`grid_search` and
:func:`end_to_end_rate`.
"""

from .channel import (
    ChannelSet,
    SystemConfig,
    db_to_linear,
    gen_channel_set,
    gen_rayleigh,
    gen_rician,
    trial_seed,
    ula_steering,
)
from .mimo import (
    EigenDecomposition,
    RateResult,
    end_to_end_rate,
    logdet_capacity,
    precoder,
    sum_capacity,
    svd_decompose,
    water_filling,
)
from .solvers import (
    DEFAULT_GA_STEPS,
    GridBudgetError,
    SolveOutcome,
    SolverOptions,
    dsm_solve,
    ga_solve,
    grid_search,
    tune_ga_step,
)
from .spgm import (
    SpgmCache,
    build_cache,
    coordinate_argmax,
    effective_channel,
    sinusoid_params,
    spgm_gradient,
    spgm_objective,
    wrap_phases,
)

__version__ = "0.1.0"
