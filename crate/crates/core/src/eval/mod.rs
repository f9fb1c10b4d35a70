//! Rolling-origin evaluation: splits, per-record metrics, the run driver,
//! and leaderboard / rank-history aggregation.

mod leaderboard;
mod metrics;
mod record;
mod runner;
mod splits;

pub use leaderboard::{
    aggregate_leaderboard, aggregate_score, rank_scores, rolling_rank_history, LeaderboardRow, RankHistoryPoint,
};
pub use metrics::{compute_metrics, mase_scale, MetricError};
pub use record::MetricRecord;
pub use runner::{run_evaluation, EvalOutcome, Incident, ModelSpec, FALLBACK_LAST_VALUE};
pub use splits::{make_rolling_splits, splits_for_range, usable_range, SplitTask};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("series {0} is too short for any rolling origin")]
    SeriesTooShort(String),
    #[error("unknown series {0}")]
    UnknownSeries(String),
    #[error("no series has a valid rolling origin")]
    NoEvaluableSeries,
    #[error("invalid evaluation config: {0}")]
    ConfigInvalid(String),
    #[error("no records for the requested grouping")]
    EmptyGroup,
    #[error("rank history needs {need} origins, found {got}")]
    TooFewOrigins { need: usize, got: usize },
}
