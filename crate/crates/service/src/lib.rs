//! HTTP facade over `adscribe-core`.
//!
//! Every mutation goes through the store's single writer, so a response to a
//! successful write always reflects committed state. Ingest and generation
//! run as background jobs polled through `GET /jobs/{id}`.

pub mod error;
pub mod jobs;
mod routes;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::Router;
use parking_lot::Mutex;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

use adscribe_core::config::AppConfig;
use adscribe_core::genai::{GenerationOptions, ModelProvider};
use adscribe_core::io::load_project;
use adscribe_core::{SharedStore, Store, Timestamp, VariationId};

pub use error::{ApiError, ApiResult};
pub use jobs::{Job, JobKind, JobState};

/// Pending proposals older than this are dropped.
pub const PROPOSAL_TTL: Duration = Duration::from_secs(24 * 60 * 60);
const EXPIRY_SWEEP: Duration = Duration::from_secs(60);

pub struct AppState {
    pub store: SharedStore,
    pub config: AppConfig,
    provider: Option<(Arc<dyn ModelProvider>, GenerationOptions)>,
    pub jobs: jobs::JobRegistry,
    generation_locks: Mutex<HashMap<VariationId, Arc<Mutex<()>>>>,
    media_dir: PathBuf,
}

impl AppState {
    /// `provider` may be absent; endpoints that need a model then answer 503.
    pub fn new(
        store: SharedStore,
        config: AppConfig,
        provider: Option<(Arc<dyn ModelProvider>, GenerationOptions)>,
        media_dir: PathBuf,
    ) -> Arc<Self> {
        Arc::new(AppState {
            store,
            config,
            provider,
            jobs: jobs::JobRegistry::default(),
            generation_locks: Mutex::default(),
            media_dir,
        })
    }

    fn provider(&self) -> ApiResult<(Arc<dyn ModelProvider>, GenerationOptions)> {
        self.provider
            .clone()
            .ok_or_else(ApiError::provider_unavailable)
    }

    /// Generation for one variation runs one job at a time.
    fn generation_lock(&self, id: &VariationId) -> Arc<Mutex<()>> {
        self.generation_locks
            .lock()
            .entry(id.clone())
            .or_default()
            .clone()
    }

    /// Drops proposals past [`PROPOSAL_TTL`]. Commits only when something
    /// actually expires.
    pub fn expire_proposals(&self) -> adscribe_core::Result<usize> {
        let (cutoff, stale) = {
            let s = self.store.read();
            let cutoff = Timestamp::from_micros(
                s.current_time().as_micros() - PROPOSAL_TTL.as_micros() as i64,
            );
            let stale = s.pending_proposals().any(|p| p.created_at < cutoff);
            (cutoff, stale)
        };
        if !stale {
            return Ok(0);
        }
        self.store.commit(|s| Ok(s.expire_proposals(cutoff)))
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    routes::router(state)
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("cannot bind {addr}: {source}")]
    BindFailure {
        addr: String,
        source: std::io::Error,
    },
    #[error("cannot load project: {0}")]
    ProjectLoadFailure(adscribe_core::Error),
    #[error("cannot set up model provider: {0}")]
    Provider(adscribe_core::Error),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::BindFailure { .. } => "BindFailure",
            ServiceError::ProjectLoadFailure(_) => "ProjectLoadFailure",
            ServiceError::Provider(e) => e.code(),
        }
    }
}

pub struct ServerOptions {
    /// Created on first save when it does not exist yet.
    pub project_path: PathBuf,
    pub bind: String,
    pub config: AppConfig,
    /// Serve the offline mock provider.
    pub mock: bool,
    /// Which `[[provider]]` entry to use; the first one by default.
    pub provider_name: Option<String>,
}

pub struct ServerHandle {
    pub addr: SocketAddr,
    state: Arc<AppState>,
    stop: Option<oneshot::Sender<()>>,
    task: JoinHandle<()>,
}

impl ServerHandle {
    pub fn state(&self) -> &Arc<AppState> {
        &self.state
    }

    /// Stops accepting requests, lets in-flight ones finish and writes the
    /// project file.
    pub async fn shutdown(mut self) -> adscribe_core::Result<()> {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        let _ = (&mut self.task).await;
        self.state.store.flush()
    }

    /// Runs until Ctrl-C, then shuts down gracefully.
    pub async fn run_until_ctrl_c(self) -> adscribe_core::Result<()> {
        let _ = tokio::signal::ctrl_c().await;
        log::info!("shutting down");
        self.shutdown().await
    }
}

pub async fn start_server(options: ServerOptions) -> Result<ServerHandle, ServiceError> {
    let store = if options.project_path.exists() {
        load_project(&options.project_path).map_err(ServiceError::ProjectLoadFailure)?
    } else {
        Store::new()
    };
    let provider = if options.mock || !options.config.providers.is_empty() {
        Some(
            options
                .config
                .make_provider(options.provider_name.as_deref(), options.mock)
                .map_err(ServiceError::Provider)?,
        )
    } else {
        log::warn!("no model provider configured; generation endpoints are disabled");
        None
    };
    let media_dir = options.config.media_dir(&options.project_path);
    let state = AppState::new(
        SharedStore::with_autosave(store, &options.project_path),
        options.config,
        provider,
        media_dir,
    );
    let listener = tokio::net::TcpListener::bind(&options.bind)
        .await
        .map_err(|source| ServiceError::BindFailure {
            addr: options.bind.clone(),
            source,
        })?;
    let addr = listener
        .local_addr()
        .map_err(|source| ServiceError::BindFailure {
            addr: options.bind.clone(),
            source,
        })?;

    let sweeper = {
        let state = state.clone();
        tokio::spawn(async move {
            let mut tick = tokio::time::interval(EXPIRY_SWEEP);
            loop {
                tick.tick().await;
                let state = state.clone();
                match tokio::task::spawn_blocking(move || state.expire_proposals()).await {
                    Ok(Ok(n)) if n > 0 => log::info!("expired {n} pending proposals"),
                    Ok(Err(e)) => log::warn!("proposal expiry failed: {e}"),
                    _ => {}
                }
            }
        })
    };

    let (stop, stopped) = oneshot::channel::<()>();
    let app = router(state.clone());
    let task = tokio::spawn(async move {
        let served = axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = stopped.await;
            })
            .await;
        if let Err(e) = served {
            log::error!("server error: {e}");
        }
        sweeper.abort();
    });
    log::info!("listening on http://{addr}");
    Ok(ServerHandle {
        addr,
        state,
        stop: Some(stop),
        task,
    })
}
