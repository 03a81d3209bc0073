//! JSON-over-HTTP service for playing Max-Welter against a perfect engine and
//! for analysing positions.

use std::path::PathBuf;
use std::sync::Arc;

use axum::routing::{get, post};
use axum::Router;
use tower_http::services::ServeDir;

use maxwelter::Oracle;

pub mod api;
pub mod error;
pub mod session;

pub use error::ApiError;
pub use session::{GameSession, Player, SessionStore, State};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub session_cap: usize,
    /// Directory of static files served for every path outside `/api`.
    pub static_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            session_cap: session::DEFAULT_SESSION_CAP,
            static_dir: None,
        }
    }
}

#[derive(Debug)]
pub struct AppState {
    pub sessions: SessionStore,
    pub oracle: Oracle,
}

impl AppState {
    pub fn new(session_cap: usize) -> Self {
        AppState {
            sessions: SessionStore::new(session_cap),
            oracle: Oracle::new(),
        }
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/games", post(api::create_game))
        .route("/api/games/{id}", get(api::get_game))
        .route("/api/games/{id}/moves", post(api::human_move))
        .route("/api/games/{id}/engine-move", post(api::engine_move))
        .route("/api/analyze", get(api::analyze))
        .with_state(state)
}

/// The full application: API routes plus the optional static bundle.
pub fn app(config: &ServiceConfig) -> (Router, Arc<AppState>) {
    let state = Arc::new(AppState::new(config.session_cap));
    let mut router = router(Arc::clone(&state));
    if let Some(dir) = &config.static_dir {
        router = router.fallback_service(ServeDir::new(dir));
    }
    (router, state)
}
