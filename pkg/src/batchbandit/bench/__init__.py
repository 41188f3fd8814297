from .harness import (
    DEFAULT_SE_GRID,
    ExperimentConfig,
    TrialRecord,
    replication_seed,
    run_benchmark,
    scaling_study,
    sort_records,
)
from .records import COLUMNS, read_records, write_records
from .summary import Histogram, RegretSummary, format_table, ks_distance, regret_histogram, relative_gain
