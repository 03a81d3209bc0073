//! Exact game engine for Max-Welter, the Welter's-game variant in which only
//! the coin on the largest occupied square may move.
//!
//! The crate is split along the lines of what each piece computes:
//!
//! - [`position`]: positions, rulesets and move generation.
//! - [`grundy`]: the memoized brute-force Sprague-Grundy oracle (normal and misère).
//! - [`closedform`]: search-free classifiers for values 0 and 1 and the
//!   constructive winning move.
//! - [`reduce`]: value-preserving simplifications of positions.
//! - [`welter`]: the classical Welter function via the mating method.
//! - [`periodicity`]: Grundy-sequence analyzers.
//! - [`verify`]: exhaustive cross-checking of the closed forms against the oracle.

pub mod closedform;
pub mod error;
pub mod grundy;
pub mod periodicity;
pub mod position;
pub mod reduce;
pub mod verify;
pub mod welter;

pub use error::{Error, Result};
pub use grundy::{GrundyValue, Oracle, Outcome};
pub use position::{Convention, Move, Position, Ruleset, Square};
