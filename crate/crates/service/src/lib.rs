//! HTTP leaderboard service.
//!
//! Handlers read from an immutable [`Snapshot`] of the committed runs. A
//! refresh builds a new snapshot off to the side and swaps it in, so a
//! response is always computed against exactly one set of committed runs.

mod api;
mod snapshot;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};
use std::time::Duration;

use dbits_core::{refresh_cycle, RefreshOutcome, Settings, Store};
use thiserror::Error;

pub use api::router;
pub use snapshot::{ServedRun, Snapshot};

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("port {0} is already in use")]
    PortInUse(u16),
    #[error("store unreadable: {0}")]
    StoreUnreadable(String),
    #[error("server error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub settings: Settings,
    /// Accept `POST /api/refresh` from non-loopback peers.
    pub allow_remote_refresh: bool,
    /// Directory of static UI assets served at `/`.
    pub static_dir: Option<PathBuf>,
    /// Run the periodic refresh loop.
    pub background_refresh: bool,
}

impl ServiceConfig {
    pub fn new(settings: Settings) -> Self {
        Self {
            settings,
            allow_remote_refresh: false,
            static_dir: None,
            background_refresh: true,
        }
    }
}

/// State shared by every handler.
#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

struct Inner {
    store: Store,
    config: ServiceConfig,
    snapshot: RwLock<Arc<Snapshot>>,
    refresh_lock: tokio::sync::Mutex<()>,
}

impl AppState {
    /// Loads the initial snapshot from `store`.
    pub fn new(store: Store, config: ServiceConfig) -> Result<Self, ServeError> {
        let snapshot =
            Snapshot::load(&store, &config.settings).map_err(|e| ServeError::StoreUnreadable(e.to_string()))?;
        Ok(Self {
            inner: Arc::new(Inner {
                store,
                config,
                snapshot: RwLock::new(Arc::new(snapshot)),
                refresh_lock: tokio::sync::Mutex::new(()),
            }),
        })
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.inner.snapshot.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.inner.config
    }

    /// Rebuilds the snapshot from the store and swaps it in.
    pub async fn reload(&self) -> Result<(), String> {
        let store = self.inner.store.clone();
        let settings = self.inner.config.settings.clone();
        let fresh = tokio::task::spawn_blocking(move || Snapshot::load(&store, &settings))
            .await
            .map_err(|e| e.to_string())?
            .map_err(|e| e.to_string())?;
        *self.inner.snapshot.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(fresh);
        Ok(())
    }

    /// One refresh cycle, serialized against any other in flight.
    pub async fn refresh(&self) -> RefreshOutcome {
        let _guard = self.inner.refresh_lock.lock().await;
        let store = self.inner.store.clone();
        let settings = self.inner.config.settings.clone();
        let outcome = match tokio::task::spawn_blocking(move || refresh_cycle(&settings, &store)).await {
            Ok(outcome) => outcome,
            Err(e) => RefreshOutcome::Failed(format!("refresh task panicked: {e}")),
        };
        if matches!(outcome, RefreshOutcome::Refreshed { .. }) {
            if let Err(e) = self.reload().await {
                tracing::error!("snapshot reload failed: {e}");
            }
        }
        outcome
    }
}

async fn refresh_loop(state: AppState) {
    let secs = state.config().settings.refresh_interval_secs.max(1);
    let mut ticker = tokio::time::interval(Duration::from_secs(secs));
    ticker.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
    loop {
        ticker.tick().await;
        state.refresh().await;
    }
}

/// Binds `addr`, serves until ctrl-c, and runs the refresh loop when a
/// source is configured.
pub async fn serve(store_root: PathBuf, config: ServiceConfig, addr: SocketAddr) -> Result<(), ServeError> {
    let store = Store::open_existing(&store_root).map_err(|e| ServeError::StoreUnreadable(e.to_string()))?;
    let state = AppState::new(store, config)?;
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| match e.kind() {
        std::io::ErrorKind::AddrInUse => ServeError::PortInUse(addr.port()),
        _ => ServeError::Io(e),
    })?;
    tracing::info!("listening on {}", listener.local_addr()?);
    if state.config().background_refresh && state.config().settings.source.is_some() {
        tokio::spawn(refresh_loop(state.clone()));
    }
    let app = router(state).into_make_service_with_connect_info::<SocketAddr>();
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
