//! Core of the dbits benchmark: FRED-MD ingestion, in-process baseline
//! forecasters, the external adapter protocol, the rolling-origin
//! evaluation engine and the on-disk results store.
//!
//! The HTTP service and CLI live in sibling crates and only use the
//! surface re-exported here.

pub mod adapter;
pub mod config;
pub mod eval;
pub mod forecasters;
pub mod ingest;
pub mod refresh;
pub mod registry;
pub mod store;

pub use adapter::{AdapterError, AdapterManifest, ConformanceReport};
pub use config::{ConfigError, EvalConfig, Metric, Settings, Space};
pub use eval::{
    aggregate_leaderboard, rolling_rank_history, run_evaluation, EvalError, EvalOutcome, Incident, LeaderboardRow,
    MetricRecord, ModelSpec, RankHistoryPoint,
};
pub use forecasters::{
    builtin, builtin_models, ForecastError, ForecastOutput, ForecastTask, Forecaster, ModelDescriptor, ModelKind,
};
pub use ingest::{
    build_transformed_panel, fetch_vintage, parse_fredmd, FetchOutcome, IngestError, SeriesPanel, TransformedPanel,
    Vintage,
};
pub use refresh::{refresh_cycle, RefreshOutcome};
pub use registry::{register_from_path, RegisterError};
pub use store::{RecordFilter, RunManifest, Store, StoreError};
