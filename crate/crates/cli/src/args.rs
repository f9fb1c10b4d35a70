use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use dbits_core::store::ROOT_ENV;
use dbits_core::{Metric, Settings, Space};

#[derive(Debug, Parser)]
#[command(name = "dbits", version, about = "Live forecasting benchmark on FRED-MD vintages")]
pub struct Cli {
    /// Store root directory.
    #[arg(long, global = true, env = ROOT_ENV, default_value = "dbits-store")]
    pub store: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fetch a vintage and keep it in the store when its content is new.
    Ingest {
        #[command(flatten)]
        settings: SettingsArgs,
    },
    /// Evaluate the registered models on a vintage and commit the run.
    Eval {
        #[command(flatten)]
        settings: SettingsArgs,
        /// Stored vintage to evaluate when no source is given; defaults to the latest.
        #[arg(long)]
        vintage: Option<String>,
    },
    /// Run one refresh cycle: fetch, and evaluate when anything changed.
    Refresh {
        #[command(flatten)]
        settings: SettingsArgs,
    },
    /// Print the leaderboard of a committed run.
    Rank {
        #[arg(long)]
        metric: Metric,
        #[arg(long)]
        horizon: usize,
        /// Defaults to the most recent vintage with a run.
        #[arg(long)]
        vintage: Option<String>,
        /// Print the rows as JSON, exactly as the HTTP API does.
        #[arg(long)]
        json: bool,
    },
    /// Run the conformance probes against an adapter manifest.
    AdapterTest {
        manifest: PathBuf,
        #[command(flatten)]
        settings: SettingsArgs,
    },
    /// Add a model to the registry from a manifest file or directory.
    Register {
        manifest: PathBuf,
        #[command(flatten)]
        settings: SettingsArgs,
    },
    /// List registered models.
    Models,
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: std::net::IpAddr,
        /// Static UI assets to serve at `/`.
        #[arg(long)]
        static_dir: Option<PathBuf>,
        /// Do not run the periodic refresh loop.
        #[arg(long)]
        no_refresh: bool,
        /// Accept refresh requests from non-loopback peers.
        #[arg(long)]
        allow_remote_refresh: bool,
        #[command(flatten)]
        settings: SettingsArgs,
    },
}

/// A settings file plus per-key overrides.
#[derive(Debug, Clone, Default, Args)]
pub struct SettingsArgs {
    /// Settings file (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Vintage source: URL, file:// URL or path.
    #[arg(long)]
    pub source: Option<String>,
    #[arg(long)]
    pub lookback: Option<usize>,
    /// Comma-separated, ascending.
    #[arg(long, value_delimiter = ',')]
    pub horizons: Option<Vec<usize>>,
    #[arg(long)]
    pub stride: Option<usize>,
    /// Comma-separated metric names.
    #[arg(long, value_delimiter = ',')]
    pub metrics: Option<Vec<Metric>>,
    #[arg(long)]
    pub primary_metric: Option<Metric>,
    #[arg(long)]
    pub season: Option<usize>,
    #[arg(long)]
    pub space: Option<Space>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub refresh_interval_secs: Option<u64>,
    #[arg(long)]
    pub history_window: Option<usize>,
}

impl SettingsArgs {
    pub fn resolve(&self) -> Result<Settings> {
        let mut s = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::default(),
        };
        if let Some(v) = &self.source {
            s.source = Some(v.clone());
        }
        let e = &mut s.eval;
        if let Some(v) = self.lookback {
            e.lookback = v;
        }
        if let Some(v) = &self.horizons {
            e.horizons = v.clone();
        }
        if let Some(v) = self.stride {
            e.stride = v;
        }
        if let Some(v) = &self.metrics {
            e.metrics = v.clone();
        }
        if let Some(v) = self.primary_metric {
            e.primary_metric = v;
        }
        if let Some(v) = self.season {
            e.season = v;
        }
        if let Some(v) = self.space {
            e.space = v;
        }
        if let Some(v) = self.seed {
            e.seed = v;
        }
        if let Some(v) = self.refresh_interval_secs {
            s.refresh_interval_secs = v;
        }
        if let Some(v) = self.history_window {
            s.history_window = v;
        }
        s.eval.validate().context("invalid evaluation settings")?;
        Ok(s)
    }
}
