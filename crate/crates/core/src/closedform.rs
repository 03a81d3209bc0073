//! Search-free classification of Max-Welter positions.
//!
//! Nothing in this module calls the Grundy oracle. Each predicate is checked
//! against the oracle by the [`crate::verify`] harness.

use std::fmt;

use crate::error::{Error, Result};
use crate::grundy::GrundyValue;
use crate::position::{Move, Position, Square};

fn require(p: &Position, needed: usize) -> Result<()> {
    if p.len() < needed {
        Err(Error::too_few(needed, p.len()))
    } else {
        Ok(())
    }
}

/// `a_k = a_{k-1} + 1`: the two top coins are neighbours.
fn top_pair_adjacent(p: &Position) -> bool {
    let s = p.squares();
    let k = s.len();
    s[k - 1] == s[k - 2] + 1
}

/// Parity of `a_{k-1} + k`.
fn top_parity_even(p: &Position) -> bool {
    let s = p.squares();
    let k = s.len() as Square;
    (s[s.len() - 2] + k).is_multiple_of(2)
}

/// `(0, 1, ..., l, l+2, ..., k)`: the squares `0..=k` with one hole strictly
/// inside, i.e. at some `h` with `1 <= h <= k-1`.
pub fn is_packed_with_hole(p: &Position) -> bool {
    let s = p.squares();
    let k = s.len() as Square;
    if k < 2 || p.max_square() != k || s[0] != 0 {
        return false;
    }
    // Exactly one of 0..=k is missing and it is neither 0 nor k.
    true
}

/// The family `(0, 1, ..., k-2, k+i)` with `i >= 0` carved out of the
/// value-two statements: a packed prefix with the top coin at least two
/// squares clear of it.
pub fn is_excluded_form(p: &Position) -> bool {
    let s = p.squares();
    let k = s.len();
    k >= 2 && s[k - 2] as usize == k - 2 && s[k - 1] as usize >= k
}

/// P-position test for normal play: `a_k = a_{k-1}+1` and `a_{k-1}+k` even.
pub fn is_p_position_normal(p: &Position) -> Result<bool> {
    require(p, 2)?;
    Ok(top_pair_adjacent(p) && top_parity_even(p))
}

/// Value-one test for normal play: packed-with-hole, or an adjacent top pair
/// with `a_{k-1}+k` odd.
pub fn has_value_one_normal(p: &Position) -> Result<bool> {
    require(p, 2)?;
    Ok(is_packed_with_hole(p) || (top_pair_adjacent(p) && !top_parity_even(p)))
}

/// `a_k - a_{k-1}` when `a_{k-2}+1 = a_{k-1} <= a_k - 2` and `p` is not of the
/// excluded form; `None` when that rule says nothing.
pub fn corollary_value(p: &Position) -> Result<Option<GrundyValue>> {
    require(p, 3)?;
    let s = p.squares();
    let k = s.len();
    let (low, mid, top) = (s[k - 3], s[k - 2], s[k - 1]);
    if is_excluded_form(p) || low + 1 != mid || mid + 2 > top {
        return Ok(None);
    }
    Ok(Some(top - mid))
}

/// Whether the value-two gap property holds at `p`, given its normal-play
/// value `g`: excluded form, or `g != 2`, or `a_k - a_{k-1} = 2`.
pub fn check_value_two_gap(p: &Position, g: GrundyValue) -> Result<bool> {
    require(p, 3)?;
    let s = p.squares();
    let k = s.len();
    Ok(is_excluded_form(p) || g != 2 || s[k - 1] - s[k - 2] == 2)
}

/// A move from an N-position into a P-position, built by case analysis on the
/// top three coins rather than by search.
///
/// Prefers `a_{k-1}+1`; otherwise goes to `a_{k-1}-1` when that square is
/// free, and failing that to the smallest empty square below `a_{k-2}`.
/// With two coins there is no `a_{k-2}`, so `a_{k-1}-1` is always free.
pub fn winning_move_closed_form(p: &Position) -> Result<Move> {
    require(p, 2)?;
    if p.is_packed_prefix() {
        return Err(Error::Terminal(p.to_string()));
    }
    if is_p_position_normal(p)? {
        return Err(Error::AlreadyLosing(p.to_string()));
    }
    let s = p.squares();
    let k = s.len();
    let top = s[k - 1];
    let second = s[k - 2];

    // Landing on second+1 makes the top pair adjacent; the parity of
    // second + k decides whether that is a P-position.
    if top > second + 1 && (second + k as Square).is_multiple_of(2) {
        return Ok(Move::new(top, second + 1));
    }
    // Here second + k is odd, so the P-position must have its top pair one
    // square lower: either (second-1, second) or (third, second) with third
    // = second-1 already in place.
    let third = (k >= 3).then(|| s[k - 3]);
    match third {
        Some(third) if third + 1 == second => {
            let hole = crate::position::empty_squares_below(p, third)
                .first()
                .copied()
                .expect("a non-packed prefix below an odd-parity pair has a hole");
            Ok(Move::new(top, hole))
        }
        _ => Ok(Move::new(top, second - 1)),
    }
}

/// P-position test for misère play; the same family as [`has_value_one_normal`].
pub fn is_p_position_misere(p: &Position) -> Result<bool> {
    has_value_one_normal(p)
}

/// Value-one test for misère play; the same family as [`is_p_position_normal`].
pub fn has_value_one_misere(p: &Position) -> Result<bool> {
    is_p_position_normal(p)
}

/// Which closed-form family a position belongs to in normal play.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// Adjacent top pair with `a_{k-1}+k` even; value 0.
    AdjacentEven,
    /// `(0, 1, ..., l, l+2, ..., k)`; value 1.
    PackedWithHole,
    /// Adjacent top pair with `a_{k-1}+k` odd; value 1.
    AdjacentOdd,
    None,
}

impl Rule {
    /// Report tag used by the CLI.
    pub fn tag(self) -> &'static str {
        match self {
            Rule::AdjacentEven => "thm2.1",
            Rule::PackedWithHole => "thm3.1a",
            Rule::AdjacentOdd => "thm3.1b",
            Rule::None => "none",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

pub fn matching_rule(p: &Position) -> Result<Rule> {
    require(p, 2)?;
    Ok(if is_p_position_normal(p)? {
        Rule::AdjacentEven
    } else if is_packed_with_hole(p) {
        Rule::PackedWithHole
    } else if top_pair_adjacent(p) {
        Rule::AdjacentOdd
    } else {
        Rule::None
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Zero,
    One,
    AtLeastTwo,
}

/// What the closed forms alone say about a normal-play value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValueClass {
    pub kind: ValueKind,
    /// Present when a closed form pins the value exactly.
    pub exact: Option<GrundyValue>,
}

pub fn classify(p: &Position) -> Result<ValueClass> {
    require(p, 2)?;
    let class = if is_p_position_normal(p)? {
        ValueClass {
            kind: ValueKind::Zero,
            exact: Some(0),
        }
    } else if has_value_one_normal(p)? {
        ValueClass {
            kind: ValueKind::One,
            exact: Some(1),
        }
    } else {
        let exact = if p.len() >= 3 {
            corollary_value(p)?
        } else {
            None
        };
        ValueClass {
            kind: ValueKind::AtLeastTwo,
            exact,
        }
    };
    Ok(class)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pos(s: &[Square]) -> Position {
        Position::new(s.to_vec()).unwrap()
    }

    #[test]
    fn p_position_examples() {
        assert!(is_p_position_normal(&pos(&[2, 3])).unwrap());
        assert!(!is_p_position_normal(&pos(&[1, 2])).unwrap());
        for k in 2..=4 {
            assert!(is_p_position_normal(&Position::packed(k)).unwrap());
        }
        assert!(matches!(
            is_p_position_normal(&pos(&[4])),
            Err(Error::TooFewCoins { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn value_one_examples() {
        assert!(has_value_one_normal(&pos(&[0, 2])).unwrap());
        assert!(has_value_one_normal(&pos(&[3, 4])).unwrap());
        assert!(!has_value_one_normal(&pos(&[0, 1, 4])).unwrap());
        assert!(has_value_one_normal(&pos(&[0, 1, 3])).unwrap());
        assert!(has_value_one_normal(&pos(&[0, 2, 3])).unwrap());
        assert!(has_value_one_normal(&pos(&[1, 2, 3])).unwrap());
        assert!(has_value_one_normal(&pos(&[1, 2])).unwrap());
    }

    #[test]
    fn packed_with_hole_shapes() {
        assert!(is_packed_with_hole(&pos(&[0, 2])));
        assert!(is_packed_with_hole(&pos(&[0, 1, 2, 4])));
        assert!(!is_packed_with_hole(&pos(&[1, 2])));
        assert!(!is_packed_with_hole(&pos(&[0, 1, 2])));
        assert!(!is_packed_with_hole(&pos(&[0, 1, 4])));
        assert!(!is_packed_with_hole(&pos(&[2])));
    }

    #[test]
    fn corollary_examples() {
        assert_eq!(corollary_value(&pos(&[1, 2, 5])).unwrap(), Some(3));
        assert_eq!(corollary_value(&pos(&[0, 1, 5])).unwrap(), None);
        assert_eq!(corollary_value(&pos(&[0, 3, 4, 9])).unwrap(), Some(5));
        assert_eq!(corollary_value(&pos(&[1, 3, 5])).unwrap(), None);
        assert_eq!(corollary_value(&pos(&[1, 2, 3])).unwrap(), None);
        assert!(corollary_value(&pos(&[1, 2])).is_err());
    }

    #[test]
    fn value_two_gap_examples() {
        assert!(check_value_two_gap(&pos(&[1, 2, 4]), 2).unwrap());
        assert!(check_value_two_gap(&pos(&[0, 1, 4]), 2).unwrap());
        assert!(!check_value_two_gap(&pos(&[1, 2, 5]), 2).unwrap());
        assert!(check_value_two_gap(&pos(&[2, 3]), 2).is_err());
    }

    #[test]
    fn excluded_form() {
        assert!(is_excluded_form(&pos(&[0, 1, 5])));
        assert!(is_excluded_form(&pos(&[0, 1, 3])));
        assert!(!is_excluded_form(&pos(&[0, 1, 2])));
        assert!(!is_excluded_form(&pos(&[0, 2, 5])));
    }

    #[test]
    fn winning_move_examples() {
        assert_eq!(
            winning_move_closed_form(&pos(&[1, 2, 5])).unwrap(),
            Move::new(5, 0)
        );
        assert_eq!(
            winning_move_closed_form(&pos(&[0, 4])).unwrap(),
            Move::new(4, 1)
        );
        assert_eq!(
            winning_move_closed_form(&pos(&[3, 4])).unwrap(),
            Move::new(4, 2)
        );
        assert!(matches!(
            winning_move_closed_form(&pos(&[2, 3])),
            Err(Error::AlreadyLosing(_))
        ));
        assert!(matches!(
            winning_move_closed_form(&pos(&[0, 1, 2])),
            Err(Error::Terminal(_))
        ));
    }

    #[test]
    fn winning_move_lands_on_p_position() {
        for p in [
            &[0, 2, 7][..],
            &[1, 3, 4, 9],
            &[0, 5],
            &[2, 4, 5],
            &[0, 1, 2, 6, 7],
        ] {
            let p = pos(p);
            let mv = winning_move_closed_form(&p).unwrap();
            assert!(
                is_p_position_normal(&p.apply(mv).unwrap()).unwrap(),
                "{p} via {mv}"
            );
        }
    }

    #[test]
    fn misere_examples() {
        assert!(is_p_position_misere(&pos(&[0, 2])).unwrap());
        assert!(is_p_position_misere(&pos(&[1, 2])).unwrap());
        assert!(!is_p_position_misere(&pos(&[2, 3])).unwrap());
        assert!(has_value_one_misere(&pos(&[2, 3])).unwrap());
        assert!(has_value_one_misere(&pos(&[0, 1])).unwrap());
        assert!(!has_value_one_misere(&pos(&[0, 2])).unwrap());
    }

    #[test]
    fn rule_tags() {
        assert_eq!(matching_rule(&pos(&[2, 3])).unwrap().tag(), "thm2.1");
        assert_eq!(matching_rule(&pos(&[0, 2])).unwrap().tag(), "thm3.1a");
        assert_eq!(matching_rule(&pos(&[3, 4])).unwrap().tag(), "thm3.1b");
        assert_eq!(matching_rule(&pos(&[1, 2, 5])).unwrap().tag(), "none");
        let c = classify(&pos(&[1, 2, 5])).unwrap();
        assert_eq!(c.kind, ValueKind::AtLeastTwo);
        assert_eq!(c.exact, Some(3));
    }
}
