//! Positions on the semi-infinite strip and the two move rules.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Label of a square on the strip; squares are numbered 0, 1, 2, ... from the left end.
pub type Square = u64;

/// A set of occupied squares, stored strictly increasing.
///
/// Holds at least one coin. All constructors sort their input and reject
/// duplicates, so two equal positions always have equal representations.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Position(Vec<Square>);

impl Position {
    pub fn new(squares: impl Into<Vec<Square>>) -> Result<Self> {
        let mut squares = squares.into();
        if squares.is_empty() {
            return Err(Error::EmptyPosition);
        }
        squares.sort_unstable();
        if let Some(w) = squares.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateSquare(w[0]));
        }
        Ok(Position(squares))
    }

    /// The packed prefix `(0, 1, ..., k-1)`, terminal under both rulesets.
    pub fn packed(k: usize) -> Self {
        assert!(k > 0, "packed position needs at least one coin");
        Position((0..k as Square).collect())
    }

    /// Caller guarantees strictly increasing, non-empty input.
    pub(crate) fn from_sorted_unchecked(squares: Vec<Square>) -> Self {
        debug_assert!(!squares.is_empty());
        debug_assert!(squares.windows(2).all(|w| w[0] < w[1]));
        Position(squares)
    }

    /// `prefix` followed by `top`; `top` must exceed every prefix square.
    pub fn with_top(prefix: &[Square], top: Square) -> Result<Self> {
        let mut squares = Vec::with_capacity(prefix.len() + 1);
        squares.extend_from_slice(prefix);
        squares.push(top);
        if squares.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!(
                "prefix must be strictly increasing and below {top}"
            )));
        }
        Ok(Position(squares))
    }

    pub fn squares(&self) -> &[Square] {
        &self.0
    }

    pub fn into_squares(self) -> Vec<Square> {
        self.0
    }

    /// Number of coins, `k`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn max_square(&self) -> Square {
        *self.0.last().expect("position is never empty")
    }

    pub fn min_square(&self) -> Square {
        self.0[0]
    }

    pub fn contains(&self, s: Square) -> bool {
        self.0.binary_search(&s).is_ok()
    }

    /// The coin `a_i` using the 1-based indexing of the usual `(a_1, ..., a_k)` notation.
    pub fn coin(&self, i: usize) -> Square {
        self.0[i - 1]
    }

    /// Every coin shifted right by `by` squares.
    pub fn translate(&self, by: Square) -> Position {
        Position(self.0.iter().map(|&s| s + by).collect())
    }

    pub fn is_packed_prefix(&self) -> bool {
        self.max_square() as usize == self.len() - 1
    }

    pub fn apply(&self, mv: Move) -> Result<Position> {
        apply_move(self, mv)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl FromStr for Position {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Position::new(parse_squares(s)?)
    }
}

impl TryFrom<Vec<Square>> for Position {
    type Error = Error;

    fn try_from(v: Vec<Square>) -> Result<Self> {
        Position::new(v)
    }
}

/// Parses the textual syntax `2,5,6,8,10` without sorting or validating.
pub fn parse_squares(s: &str) -> Result<Vec<Square>> {
    let s = s.trim();
    let s = s
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .unwrap_or(s);
    if s.trim().is_empty() {
        return Err(Error::EmptyPosition);
    }
    s.split(',')
        .map(|tok| {
            let tok = tok.trim();
            tok.parse::<Square>()
                .map_err(|_| Error::Parse(format!("`{tok}` is not a nonnegative integer")))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ruleset {
    /// Only the coin on the largest occupied square may move.
    MaxWelter,
    /// Any coin may move.
    Welter,
}

impl Ruleset {
    pub fn as_str(self) -> &'static str {
        match self {
            Ruleset::MaxWelter => "max-welter",
            Ruleset::Welter => "welter",
        }
    }
}

impl fmt::Display for Ruleset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Ruleset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "max-welter" | "maxwelter" | "max_welter" => Ok(Ruleset::MaxWelter),
            "welter" => Ok(Ruleset::Welter),
            other => Err(Error::Parse(format!(
                "unknown ruleset `{other}` (expected max-welter or welter)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Convention {
    /// The last player to move wins.
    Normal,
    /// The last player to move loses.
    Misere,
}

impl Convention {
    pub fn as_str(self) -> &'static str {
        match self {
            Convention::Normal => "normal",
            Convention::Misere => "misere",
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_lowercase().as_str() {
            "normal" => Ok(Convention::Normal),
            "misere" | "misère" => Ok(Convention::Misere),
            other => Err(Error::Parse(format!(
                "unknown convention `{other}` (expected normal or misere)"
            ))),
        }
    }
}

/// A coin moved from `from` to the empty square `to < from`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Move {
    pub from: Square,
    pub to: Square,
}

impl Move {
    pub fn new(from: Square, to: Square) -> Self {
        Move { from, to }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.from, self.to)
    }
}

/// Empty squares strictly left of `s`, ascending.
pub fn empty_squares_below(p: &Position, s: Square) -> Vec<Square> {
    let mut out = Vec::new();
    let mut next = 0;
    for &c in p.squares() {
        if c >= s {
            break;
        }
        out.extend(next..c);
        next = c + 1;
    }
    out.extend(next..s);
    out
}

pub fn legal_moves(p: &Position, r: Ruleset) -> Vec<Move> {
    match r {
        Ruleset::MaxWelter => {
            let top = p.max_square();
            empty_squares_below(p, top)
                .into_iter()
                .map(|to| Move::new(top, to))
                .collect()
        }
        Ruleset::Welter => {
            let mut out = Vec::new();
            for &c in p.squares() {
                out.extend(
                    empty_squares_below(p, c)
                        .into_iter()
                        .map(|to| Move::new(c, to)),
                );
            }
            out
        }
    }
}

pub fn is_legal(p: &Position, r: Ruleset, mv: Move) -> bool {
    let mover_ok = match r {
        Ruleset::MaxWelter => mv.from == p.max_square(),
        Ruleset::Welter => p.contains(mv.from),
    };
    mover_ok && mv.to < mv.from && !p.contains(mv.to)
}

/// Moves the coin on `mv.from` to `mv.to`, re-sorting the result.
///
/// Does not check which coin the ruleset allows to move; see [`is_legal`].
pub fn apply_move(p: &Position, mv: Move) -> Result<Position> {
    let illegal = |reason| Error::IllegalMove {
        from: mv.from,
        to: mv.to,
        reason,
    };
    let Ok(idx) = p.0.binary_search(&mv.from) else {
        return Err(illegal("source square is empty"));
    };
    if mv.to >= mv.from {
        return Err(illegal("coins only move left"));
    }
    let Err(ins) = p.0.binary_search(&mv.to) else {
        return Err(illegal("target square is occupied"));
    };
    // ins <= idx since to < from; shift the block [ins, idx) right by one.
    let mut squares = p.0.clone();
    squares.copy_within(ins..idx, ins + 1);
    squares[ins] = mv.to;
    Ok(Position(squares))
}

/// True iff no move is available; for both rulesets this is exactly the packed prefix.
pub fn is_terminal(p: &Position, _r: Ruleset) -> bool {
    p.is_packed_prefix()
}
