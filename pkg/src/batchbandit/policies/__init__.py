from .base import (
    DTS,
    RHO,
    GaussianTS,
    HistorySummary,
    Myopic,
    OracleBetaBernoulliTS,
    Policy,
    PolicySpec,
    SuccessiveElimination,
    TopTwoTS,
    Uniform,
)
from .classic import (
    beta_posterior,
    confidence_width,
    oracle_bb_ts_step,
    successive_elimination_step,
    uniform_allocation,
)
from .gaussian import (
    dts_allocation,
    dts_index,
    gaussian_ts_allocation,
    myopic_allocation,
    rho_policy_step,
    top_two_ts_allocation,
)
