//! Game sessions, the engine's move policy and the in-memory session store.

use std::sync::Arc;

use indexmap::IndexMap;
use parking_lot::Mutex;
use serde::Serialize;

use maxwelter::closedform;
use maxwelter::grundy::{GrundyValue, Oracle};
use maxwelter::position::{self, is_legal, legal_moves};
use maxwelter::{Convention, Error, Move, Position, Result, Ruleset, Square};

pub const DEFAULT_SESSION_CAP: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    Human,
    Engine,
}

impl Player {
    pub fn as_str(self) -> &'static str {
        match self {
            Player::Human => "human",
            Player::Engine => "engine",
        }
    }

    pub fn other(self) -> Player {
        match self {
            Player::Human => Player::Engine,
            Player::Engine => Player::Human,
        }
    }
}

impl std::fmt::Display for Player {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlayError {
    #[error("the game is over")]
    GameOver,
    #[error("it is the {0}'s turn")]
    WrongTurn(Player),
    #[error(transparent)]
    Illegal(Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameSession {
    pub id: String,
    pub initial: Position,
    pub position: Position,
    pub ruleset: Ruleset,
    pub convention: Convention,
    pub to_move: Player,
    pub history: Vec<Move>,
}

/// The wire form of a session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct State {
    pub squares: Vec<Square>,
    pub to_move: Player,
    pub terminal: bool,
    pub legal_targets: Vec<Square>,
    pub winner: Option<Player>,
}

impl GameSession {
    pub fn new(
        id: String,
        position: Position,
        ruleset: Ruleset,
        convention: Convention,
        human_plays_first: bool,
    ) -> Self {
        GameSession {
            id,
            initial: position.clone(),
            position,
            ruleset,
            convention,
            to_move: if human_plays_first {
                Player::Human
            } else {
                Player::Engine
            },
            history: Vec::new(),
        }
    }

    pub fn is_terminal(&self) -> bool {
        position::is_terminal(&self.position, self.ruleset)
    }

    /// Under normal play the player stuck at a terminal position loses; under
    /// misère that player wins.
    pub fn winner(&self) -> Option<Player> {
        if !self.is_terminal() {
            return None;
        }
        Some(match self.convention {
            Convention::Normal => self.to_move.other(),
            Convention::Misere => self.to_move,
        })
    }

    /// Squares some coin can move to. Every such square is below the top
    /// coin, so this is the same set under both rulesets.
    pub fn legal_targets(&self) -> Vec<Square> {
        position::empty_squares_below(&self.position, self.position.max_square())
    }

    pub fn state(&self) -> State {
        State {
            squares: self.position.squares().to_vec(),
            to_move: self.to_move,
            terminal: self.is_terminal(),
            legal_targets: self.legal_targets(),
            winner: self.winner(),
        }
    }

    /// Plays `mv` for `who`. Turn and game-over checks come before legality.
    pub fn play(&mut self, who: Player, mv: Move) -> std::result::Result<(), PlayError> {
        if self.is_terminal() {
            return Err(PlayError::GameOver);
        }
        if self.to_move != who {
            return Err(PlayError::WrongTurn(self.to_move));
        }
        if !is_legal(&self.position, self.ruleset, mv) {
            // apply_move names the precise defect; a wrong mover is the rest.
            self.position.apply(mv).map_err(PlayError::Illegal)?;
            return Err(PlayError::Illegal(Error::IllegalMove {
                from: mv.from,
                to: mv.to,
                reason: "only the coin on the largest square may move",
            }));
        }
        self.position = self.position.apply(mv).map_err(PlayError::Illegal)?;
        self.history.push(mv);
        self.to_move = self.to_move.other();
        Ok(())
    }

    /// The position reached by replaying `history` from the starting position.
    pub fn replay(&self) -> Result<Position> {
        self.history
            .iter()
            .try_fold(self.initial.clone(), |p, &mv| p.apply(mv))
    }
}

/// The engine's choice at a non-terminal position.
///
/// With a winning move available it plays one: the closed-form move for
/// Max-Welter under normal play, else the first optimal move. From a
/// P-position it plays the legal move with the largest target, taking the
/// coin on the largest square when several coins can reach it.
pub fn engine_choice(oracle: &Oracle, p: &Position, r: Ruleset, c: Convention) -> Result<Move> {
    if position::is_terminal(p, r) {
        return Err(Error::Terminal(p.to_string()));
    }
    if r == Ruleset::MaxWelter && c == Convention::Normal && p.len() >= 2 {
        match closedform::winning_move_closed_form(p) {
            Ok(mv) => return Ok(mv),
            Err(Error::AlreadyLosing(_)) => return Ok(stalling_move(p, r)),
            Err(e) => return Err(e),
        }
    }
    match oracle.optimal_moves(p, r, c)?.first() {
        Some(&mv) => Ok(mv),
        None => Ok(stalling_move(p, r)),
    }
}

fn stalling_move(p: &Position, r: Ruleset) -> Move {
    legal_moves(p, r)
        .into_iter()
        .max_by_key(|mv| (mv.to, mv.from))
        .expect("non-terminal position has a move")
}

/// Runs `f` against the oracle, emptying the memo once and retrying if the
/// budget runs out. The memo only grows while the server is up, so a full
/// table usually holds mostly stale entries.
pub fn with_oracle<T>(oracle: &Oracle, f: impl Fn(&Oracle) -> Result<T>) -> Result<T> {
    match f(oracle) {
        Err(Error::ResourceLimit { .. }) if oracle.entries() > 0 => {
            oracle.clear();
            f(oracle)
        }
        other => other,
    }
}

pub fn annotation(oracle: &Oracle, s: &GameSession) -> Result<(GrundyValue, maxwelter::Outcome)> {
    let g = oracle.grundy(&s.position, s.ruleset, s.convention)?;
    Ok((g, maxwelter::Outcome::of(g)))
}

pub type SharedSession = Arc<Mutex<GameSession>>;

/// Sessions in least- to most-recently-used order, capped with LRU eviction.
#[derive(Debug)]
pub struct SessionStore {
    cap: usize,
    sessions: Mutex<IndexMap<String, SharedSession>>,
}

impl SessionStore {
    pub fn new(cap: usize) -> Self {
        assert!(cap > 0, "session cap must be positive");
        SessionStore {
            cap,
            sessions: Mutex::new(IndexMap::new()),
        }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn insert(&self, session: GameSession) -> SharedSession {
        let id = session.id.clone();
        let shared = Arc::new(Mutex::new(session));
        let mut map = self.sessions.lock();
        while map.len() >= self.cap {
            map.shift_remove_index(0);
        }
        map.insert(id, Arc::clone(&shared));
        shared
    }

    /// Looks up a session and marks it most recently used.
    pub fn get(&self, id: &str) -> Option<SharedSession> {
        let mut map = self.sessions.lock();
        let ix = map.get_index_of(id)?;
        let last = map.len() - 1;
        map.move_index(ix, last);
        map.get_index(last).map(|(_, s)| Arc::clone(s))
    }
}

impl Default for SessionStore {
    fn default() -> Self {
        SessionStore::new(DEFAULT_SESSION_CAP)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pos(s: &[Square]) -> Position {
        Position::new(s.to_vec()).unwrap()
    }

    fn session(s: &[Square], c: Convention, human_first: bool) -> GameSession {
        GameSession::new("t".into(), pos(s), Ruleset::MaxWelter, c, human_first)
    }

    #[test]
    fn legal_targets_complement_below_max() {
        let s = session(&[2, 5, 6, 8, 10], Convention::Normal, true);
        assert_eq!(s.legal_targets(), vec![0, 1, 3, 4, 7, 9]);
    }

    #[test]
    fn terminal_start_winner_follows_convention() {
        let s = session(&[0, 1, 2], Convention::Normal, true);
        assert!(s.is_terminal());
        assert_eq!(s.winner(), Some(Player::Engine));
        let s = session(&[0, 1, 2], Convention::Misere, true);
        assert_eq!(s.winner(), Some(Player::Human));
    }

    #[test]
    fn human_moves() {
        let mut s = session(&[1, 2, 5], Convention::Normal, true);
        s.play(Player::Human, Move::new(5, 0)).unwrap();
        assert_eq!(s.position, pos(&[0, 1, 2]));
        assert_eq!(s.winner(), Some(Player::Human));
        assert_eq!(
            s.play(Player::Engine, Move::new(2, 0)),
            Err(PlayError::GameOver)
        );

        let mut s = session(&[1, 2, 5], Convention::Normal, true);
        s.play(Player::Human, Move::new(5, 3)).unwrap();
        assert_eq!(s.to_move, Player::Engine);
        assert!(s.play(Player::Human, Move::new(3, 0)).is_err());

        let mut s = session(&[1, 2, 5], Convention::Normal, true);
        assert!(matches!(
            s.play(Player::Human, Move::new(5, 2)),
            Err(PlayError::Illegal(Error::IllegalMove { .. }))
        ));
        assert!(matches!(
            s.play(Player::Human, Move::new(2, 0)),
            Err(PlayError::Illegal(Error::IllegalMove { .. }))
        ));
        assert_eq!(
            s.play(Player::Engine, Move::new(5, 0)),
            Err(PlayError::WrongTurn(Player::Human))
        );
    }

    #[test]
    fn engine_policy_examples() {
        let o = Oracle::new();
        let n = Convention::Normal;
        let r = Ruleset::MaxWelter;
        assert_eq!(
            engine_choice(&o, &pos(&[1, 2, 5]), r, n).unwrap(),
            Move::new(5, 0)
        );
        assert_eq!(
            engine_choice(&o, &pos(&[2, 3]), r, n).unwrap(),
            Move::new(3, 1)
        );
        assert_eq!(
            engine_choice(&o, &pos(&[9]), r, n).unwrap(),
            Move::new(9, 0)
        );
        // Classical Welter from a P-position: target 1 is reachable from 2
        // and 3; the larger coin moves.
        let w = pos(&[2, 3]);
        assert_eq!(o.grundy(&w, Ruleset::Welter, n).unwrap(), 0);
        assert_eq!(
            engine_choice(&o, &w, Ruleset::Welter, n).unwrap(),
            Move::new(3, 1)
        );
        assert!(engine_choice(&o, &pos(&[0, 1]), r, n).is_err());
    }

    #[test]
    fn store_evicts_least_recently_used() {
        let store = SessionStore::new(2);
        for id in ["a", "b"] {
            store.insert(GameSession::new(
                id.into(),
                pos(&[1, 2]),
                Ruleset::MaxWelter,
                Convention::Normal,
                true,
            ));
        }
        assert!(store.get("a").is_some());
        store.insert(GameSession::new(
            "c".into(),
            pos(&[1, 2]),
            Ruleset::MaxWelter,
            Convention::Normal,
            true,
        ));
        assert_eq!(store.len(), 2);
        assert!(store.get("b").is_none());
        assert!(store.get("a").is_some());
        assert!(store.get("c").is_some());
    }
}
