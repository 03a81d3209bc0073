//! Brute-force Sprague-Grundy oracle.
//!
//! Values are computed by explicit-stack depth-first expansion of the game DAG
//! and memoized in a concurrent table, one per `(ruleset, convention)`.
//! Positions whose squares all lie below 128 are keyed by a `u128` bitmask;
//! anything wider falls back to the square sequence itself.

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;

use dashmap::DashMap;

use crate::error::{Error, Result};
use crate::position::{self, Convention, Move, Position, Ruleset, Square};

pub type GrundyValue = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    /// The previous player wins (value 0).
    P,
    /// The next player wins.
    N,
}

impl Outcome {
    pub fn of(value: GrundyValue) -> Self {
        if value == 0 {
            Outcome::P
        } else {
            Outcome::N
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::P => "P",
            Outcome::N => "N",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Smallest nonnegative integer not in `values`.
pub fn mex<I: IntoIterator<Item = GrundyValue>>(values: I) -> GrundyValue {
    let values: Vec<GrundyValue> = values.into_iter().collect();
    mex_slice(&values)
}

fn mex_slice(values: &[GrundyValue]) -> GrundyValue {
    let mut low: u128 = 0;
    let mut any_high = false;
    for &v in values {
        if v < 128 {
            low |= 1 << v;
        } else {
            any_high = true;
        }
    }
    if low != u128::MAX || !any_high {
        return (!low).trailing_zeros().min(128) as GrundyValue;
    }
    // Only reachable with at least 128 distinct successor values.
    let mut seen = vec![false; values.len() + 1];
    for &v in values {
        if let Some(slot) = seen.get_mut(v as usize) {
            *slot = true;
        }
    }
    seen.iter().position(|&s| !s).unwrap_or(seen.len()) as GrundyValue
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Key {
    Packed(u128),
    Wide(Box<[Square]>),
}

impl Key {
    fn of(squares: &[Square]) -> Key {
        match squares.last() {
            Some(&top) if top < 128 => {
                Key::Packed(squares.iter().fold(0u128, |m, &s| m | (1u128 << s)))
            }
            _ => Key::Wide(squares.into()),
        }
    }

    fn successors(&self, r: Ruleset, out: &mut Vec<Key>) {
        match self {
            Key::Packed(mask) => packed_successors(*mask, r, out),
            Key::Wide(squares) => {
                let p = Position::from_sorted_unchecked(squares.to_vec());
                for mv in position::legal_moves(&p, r) {
                    let next = position::apply_move(&p, mv).expect("generated move is legal");
                    out.push(Key::of(next.squares()));
                }
            }
        }
    }
}

fn packed_successors(mask: u128, r: Ruleset, out: &mut Vec<Key>) {
    let mut push_moves_of = |coin: u32| {
        let base = mask & !(1u128 << coin);
        let mut empty = !mask & ((1u128 << coin) - 1);
        while empty != 0 {
            let j = empty.trailing_zeros();
            empty &= empty - 1;
            out.push(Key::Packed(base | (1u128 << j)));
        }
    };
    match r {
        Ruleset::MaxWelter => push_moves_of(127 - mask.leading_zeros()),
        Ruleset::Welter => {
            let mut coins = mask;
            while coins != 0 {
                let c = coins.trailing_zeros();
                coins &= coins - 1;
                push_moves_of(c);
            }
        }
    }
}

fn table_index(r: Ruleset, c: Convention) -> usize {
    let r = match r {
        Ruleset::MaxWelter => 0,
        Ruleset::Welter => 1,
    };
    let c = match c {
        Convention::Normal => 0,
        Convention::Misere => 1,
    };
    2 * r + c
}

/// Value of a position with no moves: 0 in normal play, 1 in misère play
/// (misère play adds one extra move from the terminal position to a fresh sink).
pub fn terminal_value(c: Convention) -> GrundyValue {
    match c {
        Convention::Normal => 0,
        Convention::Misere => 1,
    }
}

/// Memoizing Grundy oracle, safe to share between threads.
pub struct Oracle {
    tables: [DashMap<Key, GrundyValue>; 4],
    budget: usize,
    entries: AtomicUsize,
}

impl Default for Oracle {
    fn default() -> Self {
        Self::new()
    }
}

impl fmt::Debug for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Oracle")
            .field("budget", &self.budget)
            .field("entries", &self.entries())
            .finish()
    }
}

impl Oracle {
    pub const DEFAULT_BUDGET: usize = 10_000_000;

    pub fn new() -> Self {
        Self::with_budget(Self::DEFAULT_BUDGET)
    }

    pub fn with_budget(budget: usize) -> Self {
        Oracle {
            tables: Default::default(),
            budget,
            entries: AtomicUsize::new(0),
        }
    }

    /// Process-wide oracle with the default budget.
    pub fn shared() -> &'static Oracle {
        static SHARED: OnceLock<Oracle> = OnceLock::new();
        SHARED.get_or_init(Oracle::new)
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Number of memoized positions across all tables.
    pub fn entries(&self) -> usize {
        self.entries.load(Ordering::Relaxed)
    }

    pub fn clear(&self) {
        for t in &self.tables {
            t.clear();
        }
        self.entries.store(0, Ordering::Relaxed);
    }

    pub fn grundy(&self, p: &Position, r: Ruleset, c: Convention) -> Result<GrundyValue> {
        self.value_of(Key::of(p.squares()), r, c)
    }

    pub fn outcome(&self, p: &Position, r: Ruleset, c: Convention) -> Result<Outcome> {
        self.grundy(p, r, c).map(Outcome::of)
    }

    /// Every legal move into a position of value 0; empty iff `p` is a P-position.
    pub fn optimal_moves(&self, p: &Position, r: Ruleset, c: Convention) -> Result<Vec<Move>> {
        if position::is_terminal(p, r) {
            return Err(Error::Terminal(p.to_string()));
        }
        let mut out = Vec::new();
        for mv in position::legal_moves(p, r) {
            if self.grundy(&p.apply(mv)?, r, c)? == 0 {
                out.push(mv);
            }
        }
        Ok(out)
    }

    /// Values of every successor, in `legal_moves` order.
    pub fn successor_values(
        &self,
        p: &Position,
        r: Ruleset,
        c: Convention,
    ) -> Result<Vec<(Move, GrundyValue)>> {
        position::legal_moves(p, r)
            .into_iter()
            .map(|mv| Ok((mv, self.grundy(&p.apply(mv)?, r, c)?)))
            .collect()
    }

    fn value_of(&self, key: Key, r: Ruleset, c: Convention) -> Result<GrundyValue> {
        let table = &self.tables[table_index(r, c)];
        if let Some(v) = table.get(&key) {
            return Ok(*v);
        }

        let mut stack = vec![key.clone()];
        let mut succ = Vec::new();
        let mut values = Vec::new();
        while let Some(top) = stack.last().cloned() {
            if table.contains_key(&top) {
                stack.pop();
                continue;
            }
            succ.clear();
            top.successors(r, &mut succ);
            let value = if succ.is_empty() {
                terminal_value(c)
            } else {
                values.clear();
                let mut pending = false;
                for s in succ.drain(..) {
                    // Copy the value out before any insert on the same shard.
                    let known = table.get(&s).map(|v| *v);
                    match known {
                        Some(v) => values.push(v),
                        None => {
                            stack.push(s);
                            pending = true;
                        }
                    }
                }
                if pending {
                    continue;
                }
                mex_slice(&values)
            };
            stack.pop();
            self.record(table, top, value)?;
        }
        Ok(*table.get(&key).expect("root value recorded"))
    }

    fn record(
        &self,
        table: &DashMap<Key, GrundyValue>,
        key: Key,
        value: GrundyValue,
    ) -> Result<()> {
        if self.entries.fetch_add(1, Ordering::Relaxed) >= self.budget {
            self.entries.fetch_sub(1, Ordering::Relaxed);
            return Err(Error::ResourceLimit {
                budget: self.budget,
            });
        }
        if let Some(previous) = table.insert(key, value) {
            // Another thread got here first; both computed the same value.
            debug_assert_eq!(previous, value);
            self.entries.fetch_sub(1, Ordering::Relaxed);
        }
        Ok(())
    }
}

/// [`Oracle::grundy`] on the shared oracle.
pub fn grundy(p: &Position, r: Ruleset, c: Convention) -> Result<GrundyValue> {
    Oracle::shared().grundy(p, r, c)
}

pub fn outcome(p: &Position, r: Ruleset, c: Convention) -> Result<Outcome> {
    Oracle::shared().outcome(p, r, c)
}

pub fn optimal_moves(p: &Position, r: Ruleset, c: Convention) -> Result<Vec<Move>> {
    Oracle::shared().optimal_moves(p, r, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Convention::*;
    use Ruleset::*;

    fn pos(s: &[Square]) -> Position {
        Position::new(s.to_vec()).unwrap()
    }

    #[test]
    fn mex_examples() {
        assert_eq!(mex([]), 0);
        assert_eq!(mex([0, 1, 2]), 3);
        assert_eq!(mex([0, 2]), 1);
        assert_eq!(mex([1, 1, 0, 5]), 2);
        assert_eq!(mex(0..200), 200);
        assert_eq!(mex((0..200).filter(|&v| v != 150)), 150);
    }

    #[test]
    fn grundy_examples() {
        let o = Oracle::new();
        assert_eq!(o.grundy(&pos(&[1, 2, 5]), MaxWelter, Normal).unwrap(), 3);
        assert_eq!(o.grundy(&pos(&[0, 1]), MaxWelter, Misere).unwrap(), 1);
        assert_eq!(o.grundy(&pos(&[1, 2]), Welter, Normal).unwrap(), 2);
        for m in 1..=10 {
            assert_eq!(o.grundy(&pos(&[0, m]), MaxWelter, Normal).unwrap(), m - 1);
        }
    }

    #[test]
    fn outcome_examples() {
        let o = Oracle::new();
        assert_eq!(
            o.outcome(&pos(&[2, 3]), MaxWelter, Normal).unwrap(),
            Outcome::P
        );
        assert_eq!(
            o.outcome(&pos(&[3, 4]), MaxWelter, Normal).unwrap(),
            Outcome::N
        );
        assert_eq!(
            o.outcome(&pos(&[2, 3]), MaxWelter, Misere).unwrap(),
            Outcome::N
        );
    }

    #[test]
    fn optimal_moves_examples() {
        let o = Oracle::new();
        assert_eq!(
            o.optimal_moves(&pos(&[1, 2, 5]), MaxWelter, Normal)
                .unwrap(),
            vec![Move::new(5, 0)]
        );
        assert!(o
            .optimal_moves(&pos(&[2, 3]), MaxWelter, Normal)
            .unwrap()
            .is_empty());
        assert!(o
            .optimal_moves(&pos(&[1, 2]), MaxWelter, Misere)
            .unwrap()
            .is_empty());
        assert!(o
            .optimal_moves(&pos(&[0, 2]), MaxWelter, Misere)
            .unwrap()
            .is_empty());
        assert_eq!(
            o.optimal_moves(&pos(&[2, 3]), MaxWelter, Misere).unwrap(),
            vec![Move::new(3, 0), Move::new(3, 1)]
        );
        assert!(matches!(
            o.optimal_moves(&pos(&[0, 1, 2]), MaxWelter, Normal),
            Err(Error::Terminal(_))
        ));
    }

    #[test]
    fn long_chain_does_not_recurse() {
        let o = Oracle::new();
        assert_eq!(o.grundy(&pos(&[0, 2000]), MaxWelter, Normal).unwrap(), 1999);
        assert_eq!(
            o.grundy(&pos(&[0, 1, 130]), MaxWelter, Normal).unwrap(),
            128
        );
    }

    #[test]
    fn wide_and_packed_keys_agree() {
        let o = Oracle::new();
        // (1,2,x) with x >= 4 has value x-2; x=130 mixes wide and packed successors.
        assert_eq!(
            o.grundy(&pos(&[1, 2, 130]), MaxWelter, Normal).unwrap(),
            128
        );
        assert_eq!(o.grundy(&pos(&[1, 2, 100]), MaxWelter, Normal).unwrap(), 98);
        assert_eq!(
            o.grundy(&pos(&[1, 2, 129]), MaxWelter, Misere).unwrap(),
            127
        );
    }

    #[test]
    fn budget_is_enforced() {
        let o = Oracle::with_budget(10);
        assert_eq!(
            o.grundy(&pos(&[0, 50]), MaxWelter, Normal),
            Err(Error::ResourceLimit { budget: 10 })
        );
        assert!(o.entries() <= 10);
        // Values recorded before the budget ran out stay valid.
        assert_eq!(o.grundy(&pos(&[0, 5]), MaxWelter, Normal).unwrap(), 4);
    }

    #[test]
    fn memo_is_warm_order_independent() {
        let a = Oracle::new();
        let b = Oracle::new();
        let ps: Vec<_> = [[0, 3, 9], [1, 2, 7], [4, 6, 11], [2, 3, 10]]
            .iter()
            .map(|s| pos(s))
            .collect();
        let fwd: Vec<_> = ps
            .iter()
            .map(|p| a.grundy(p, MaxWelter, Normal).unwrap())
            .collect();
        let mut rev: Vec<_> = ps
            .iter()
            .rev()
            .map(|p| b.grundy(p, MaxWelter, Normal).unwrap())
            .collect();
        rev.reverse();
        assert_eq!(fwd, rev);
    }
}
