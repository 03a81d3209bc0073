use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State as AxumState};
use axum::http::StatusCode;
use axum::Json;
use serde::{Deserialize, Serialize};

use maxwelter::closedform;
use maxwelter::position;
use maxwelter::reduce;
use maxwelter::{Convention, Move, Outcome, Position, Ruleset, Square};

use crate::error::ApiError;
use crate::session::{self, GameSession, PlayError, Player, State};
use crate::AppState;

/// Largest square a session or analysis request may use. Keeps
/// `legal_targets` and the oracle's work bounded per request.
pub const MAX_SERVICE_SQUARE: Square = 4096;

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Debug, Deserialize)]
pub struct CreateGame {
    pub squares: Vec<Square>,
    #[serde(default)]
    pub ruleset: Option<String>,
    #[serde(default)]
    pub convention: Option<String>,
    #[serde(default)]
    pub human_plays_first: Option<bool>,
}

#[derive(Debug, Deserialize)]
pub struct HumanMove {
    pub target: Square,
    /// Coin to move; defaults to the largest, which reaches every legal target.
    #[serde(default)]
    pub from: Option<Square>,
}

#[derive(Debug, Deserialize)]
pub struct EngineMoveQuery {
    #[serde(default)]
    pub annotate: Option<bool>,
}

#[derive(Debug, Deserialize)]
pub struct AnalyzeQuery {
    pub squares: String,
    #[serde(default)]
    pub ruleset: Option<String>,
    #[serde(default)]
    pub convention: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct GameCreated {
    pub id: String,
    pub state: State,
}

#[derive(Debug, Serialize)]
pub struct GameState {
    pub state: State,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveJson {
    pub from: Square,
    pub to: Square,
}

impl From<Move> for MoveJson {
    fn from(mv: Move) -> Self {
        MoveJson {
            from: mv.from,
            to: mv.to,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Annotation {
    pub grundy: u64,
    pub outcome: &'static str,
}

#[derive(Debug, Serialize)]
pub struct EngineMoved {
    #[serde(rename = "move")]
    pub mv: MoveJson,
    pub state: State,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub annotation: Option<Annotation>,
}

/// Closed-form predictions for the analysed position; `null` where no closed
/// form covers the ruleset or coin count.
#[derive(Debug, Serialize)]
pub struct ClosedForm {
    pub p_match: Option<bool>,
    pub value1_match: Option<bool>,
    pub corollary_value: Option<u64>,
}

#[derive(Debug, Serialize)]
pub struct Analysis {
    pub squares: Vec<Square>,
    pub ruleset: &'static str,
    pub convention: &'static str,
    pub grundy: u64,
    pub outcome: &'static str,
    pub winning_targets: Vec<Square>,
    pub winning_moves: Vec<MoveJson>,
    pub closed_form: ClosedForm,
    /// Value-preserving reduced form; normal-play Max-Welter only.
    pub canonical_form: Option<Vec<Square>>,
}

fn parse_ruleset(s: Option<&str>) -> Result<Ruleset, ApiError> {
    s.map_or(Ok(Ruleset::MaxWelter), |s| {
        s.parse().map_err(ApiError::from)
    })
}

fn parse_convention(s: Option<&str>) -> Result<Convention, ApiError> {
    s.map_or(Ok(Convention::Normal), |s| {
        s.parse().map_err(ApiError::from)
    })
}

fn checked_position(squares: Vec<Square>) -> Result<Position, ApiError> {
    if let Some(&s) = squares.iter().find(|&&s| s > MAX_SERVICE_SQUARE) {
        return Err(ApiError::bad_request(format!(
            "square {s} exceeds the service limit of {MAX_SERVICE_SQUARE}"
        )));
    }
    Ok(Position::new(squares)?)
}

fn json_body<T>(body: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    body.map(|Json(t)| t)
        .map_err(|e| ApiError::bad_request(e.body_text()))
}

fn query<T>(q: Result<Query<T>, QueryRejection>) -> Result<T, ApiError> {
    q.map(|Query(t)| t)
        .map_err(|e| ApiError::bad_request(e.body_text()))
}

fn play_error(e: PlayError) -> ApiError {
    match e {
        PlayError::GameOver | PlayError::WrongTurn(_) => ApiError::conflict(e.to_string()),
        PlayError::Illegal(inner) => ApiError::unprocessable(inner.to_string()),
    }
}

/// Oracle work runs off the async executor.
async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
}

pub async fn create_game(
    AxumState(app): AxumState<Arc<AppState>>,
    body: Result<Json<CreateGame>, JsonRejection>,
) -> ApiResult<GameCreated> {
    let req = json_body(body)?;
    let ruleset = parse_ruleset(req.ruleset.as_deref())?;
    let convention = parse_convention(req.convention.as_deref())?;
    let position = checked_position(req.squares)?;
    let id = uuid::Uuid::new_v4().simple().to_string();
    let game = GameSession::new(
        id.clone(),
        position,
        ruleset,
        convention,
        req.human_plays_first.unwrap_or(true),
    );
    let state = game.state();
    app.sessions.insert(game);
    Ok(Json(GameCreated { id, state }))
}

pub async fn get_game(
    AxumState(app): AxumState<Arc<AppState>>,
    Path(id): Path<String>,
) -> ApiResult<GameState> {
    let game = app
        .sessions
        .get(&id)
        .ok_or_else(|| ApiError::not_found(&id))?;
    let state = game.lock().state();
    Ok(Json(GameState { state }))
}

pub async fn human_move(
    AxumState(app): AxumState<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Json<HumanMove>, JsonRejection>,
) -> ApiResult<GameState> {
    let game = app
        .sessions
        .get(&id)
        .ok_or_else(|| ApiError::not_found(&id))?;
    let req = json_body(body)?;
    let mut game = game.lock();
    let from = req.from.unwrap_or_else(|| game.position.max_square());
    game.play(Player::Human, Move::new(from, req.target))
        .map_err(play_error)?;
    Ok(Json(GameState {
        state: game.state(),
    }))
}

pub async fn engine_move(
    AxumState(app): AxumState<Arc<AppState>>,
    Path(id): Path<String>,
    q: Result<Query<EngineMoveQuery>, QueryRejection>,
) -> ApiResult<EngineMoved> {
    let game = app
        .sessions
        .get(&id)
        .ok_or_else(|| ApiError::not_found(&id))?;
    let annotate = query(q)?.annotate.unwrap_or(false);
    blocking(move || {
        let mut game = game.lock();
        if game.is_terminal() {
            return Err(play_error(PlayError::GameOver));
        }
        if game.to_move != Player::Engine {
            return Err(play_error(PlayError::WrongTurn(game.to_move)));
        }
        let annotation = if annotate {
            let (grundy, outcome) =
                session::with_oracle(&app.oracle, |o| session::annotation(o, &game))?;
            Some(Annotation {
                grundy,
                outcome: outcome.as_str(),
            })
        } else {
            None
        };
        let mv = session::with_oracle(&app.oracle, |o| {
            session::engine_choice(o, &game.position, game.ruleset, game.convention)
        })?;
        game.play(Player::Engine, mv).map_err(play_error)?;
        Ok(Json(EngineMoved {
            mv: mv.into(),
            state: game.state(),
            annotation,
        }))
    })
    .await
}

pub async fn analyze(
    AxumState(app): AxumState<Arc<AppState>>,
    q: Result<Query<AnalyzeQuery>, QueryRejection>,
) -> ApiResult<Analysis> {
    let q = query(q)?;
    let ruleset = parse_ruleset(q.ruleset.as_deref())?;
    let convention = parse_convention(q.convention.as_deref())?;
    let position = checked_position(position::parse_squares(&q.squares)?)?;
    blocking(move || Ok(Json(analysis(&app.oracle, &position, ruleset, convention)?))).await
}

pub fn analysis(
    oracle: &maxwelter::Oracle,
    p: &Position,
    r: Ruleset,
    c: Convention,
) -> Result<Analysis, ApiError> {
    let grundy = session::with_oracle(oracle, |o| o.grundy(p, r, c))?;
    let winning_moves = if position::is_terminal(p, r) {
        Vec::new()
    } else {
        session::with_oracle(oracle, |o| o.optimal_moves(p, r, c))?
    };
    let mut winning_targets: Vec<Square> = winning_moves.iter().map(|mv| mv.to).collect();
    winning_targets.sort_unstable();
    winning_targets.dedup();
    Ok(Analysis {
        squares: p.squares().to_vec(),
        ruleset: r.as_str(),
        convention: c.as_str(),
        grundy,
        outcome: Outcome::of(grundy).as_str(),
        winning_targets,
        winning_moves: winning_moves.into_iter().map(MoveJson::from).collect(),
        closed_form: closed_form(p, r, c),
        canonical_form: (r == Ruleset::MaxWelter && c == Convention::Normal)
            .then(|| reduce::canonicalize(p).into_squares()),
    })
}

fn closed_form(p: &Position, r: Ruleset, c: Convention) -> ClosedForm {
    if r != Ruleset::MaxWelter || p.len() < 2 {
        return ClosedForm {
            p_match: None,
            value1_match: None,
            corollary_value: None,
        };
    }
    let (p_match, value1_match) = match c {
        Convention::Normal => (
            closedform::is_p_position_normal(p).ok(),
            closedform::has_value_one_normal(p).ok(),
        ),
        Convention::Misere => (
            closedform::is_p_position_misere(p).ok(),
            closedform::has_value_one_misere(p).ok(),
        ),
    };
    // Misère values agree with normal ones except that 0 and 1 swap.
    let corollary_value = closedform::corollary_value(p)
        .ok()
        .flatten()
        .map(|v| match c {
            Convention::Normal => v,
            Convention::Misere if v < 2 => 1 - v,
            Convention::Misere => v,
        });
    ClosedForm {
        p_match,
        value1_match,
        corollary_value,
    }
}
