//! Metrics, histories, multi-trial averaging and the example reruns.

mod history;
mod metrics;
mod reproduce;
mod trials;

pub use self::history::{
    median, read_history_csv, write_history_csv, write_spread_csv, write_tidy_csv, AveragedHistory,
    AveragedRow, HistoryRecord, HistoryRow, IterationHistory, Spread, HISTORY_HEADER,
    SPREAD_HEADER, TIDY_HEADER,
};
pub(crate) use self::metrics::MetricContext;
pub use self::metrics::{rel_error, rel_residual, rel_residual_consistent, rel_residual_normal};
pub use self::reproduce::{
    build_problem, reproduce, summary_table, wine_problem, Example, ReproduceOptions,
    ReproduceReport, Scale, DEFAULT_TRIAL_SEED, EXAMPLE_LAMBDA,
};
pub use self::trials::{run_trials, run_trials_raw, trial_seed};
