from .environments import (
    BatchOutcome,
    EnvironmentSpec,
    Instance,
    centered_observation,
    draw_instance,
    gumbel_scale,
    matched_gaussian_prior,
    sample_batch,
    sample_rewards,
)
from .runner import (
    PolicyError,
    Trajectory,
    run_experiment,
    run_limit_experiment,
    run_trajectory,
    simple_regret,
)
from .streams import stream
