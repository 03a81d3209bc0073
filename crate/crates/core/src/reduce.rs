//! Value-preserving simplifications for normal-play Max-Welter.
//!
//! Misère values are not claimed to survive these rewrites.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::position::{Position, Square};

/// Removes the smallest coin when it can never move (`a_1 <= k-1`), shifting
/// the remaining coins one square left.
pub fn drop_small_coin(p: &Position) -> Result<Option<Position>> {
    let k = p.len();
    if k < 3 {
        return Err(Error::too_few(3, k));
    }
    if p.min_square() as usize > k - 1 {
        return Ok(None);
    }
    let rest = p.squares()[1..].iter().map(|&s| s - 1).collect();
    Ok(Some(Position::from_sorted_unchecked(rest)))
}

/// 1-based indices `i` with `a_i >= i` and `a_{i+1} = a_i + 1`.
pub fn pair_indices(p: &Position) -> Vec<usize> {
    let s = p.squares();
    (1..s.len())
        .filter(|&i| s[i - 1] >= i as Square && s[i] == s[i - 1] + 1)
        .collect()
}

/// Replaces the coins below `a_i` by `b`, keeping `a_i, ..., a_k`.
///
/// Requires `k >= 3`, `a_i >= i`, `a_{i+1} = a_i + 1`, `b` strictly
/// increasing below `a_i`, `|b| < a_i` and `|b| + i - 1` even.
pub fn replace_prefix(p: &Position, i: usize, b: &[Square]) -> Result<Position> {
    let s = p.squares();
    let k = s.len();
    let fail = |what: String| Err(Error::Hypothesis(what));
    if k < 3 {
        return Err(Error::too_few(3, k));
    }
    if i == 0 || i >= k {
        return fail(format!(
            "index i={i} must satisfy 1 <= i <= k-1 = {}",
            k - 1
        ));
    }
    let ai = s[i - 1];
    if ai < i as Square {
        return fail(format!("a_{i} = {ai} < {i}"));
    }
    if s[i] != ai + 1 {
        return fail(format!("a_{} = {} is not a_{i} + 1", i + 1, s[i]));
    }
    if b.windows(2).any(|w| w[0] >= w[1]) {
        return fail("replacement prefix is not strictly increasing".into());
    }
    if b.last().is_some_and(|&last| last >= ai) {
        return fail(format!("replacement prefix must lie below a_{i} = {ai}"));
    }
    let j = b.len();
    if j as Square >= ai {
        return fail(format!("prefix length {j} is not below a_{i} = {ai}"));
    }
    if !(j + i - 1).is_multiple_of(2) {
        return fail(format!("j + i - 1 = {} is odd", j + i - 1));
    }
    let mut out = Vec::with_capacity(j + k - i + 1);
    out.extend_from_slice(b);
    out.extend_from_slice(&s[i - 1..]);
    Ok(Position::from_sorted_unchecked(out))
}

/// Every admissible `(i, b)` for [`replace_prefix`], in a fixed order.
pub fn admissible_replacements(p: &Position) -> Vec<(usize, Vec<Square>)> {
    if p.len() < 3 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for i in pair_indices(p) {
        let ai = p.coin(i);
        for j in (0..ai as usize).filter(|j| (j + i - 1) % 2 == 0) {
            for b in (0..ai).combinations(j) {
                out.push((i, b));
            }
        }
    }
    out
}

/// Number of entries [`admissible_replacements`] would return, without building them.
pub fn admissible_replacement_count(p: &Position) -> u128 {
    if p.len() < 3 {
        return 0;
    }
    pair_indices(p)
        .into_iter()
        .map(|i| {
            let ai = p.coin(i) as u128;
            (0..ai)
                .filter(|j| (*j as usize + i - 1).is_multiple_of(2))
                .map(|j| binomial(ai, j))
                .sum::<u128>()
        })
        .sum()
}

fn binomial(n: u128, r: u128) -> u128 {
    let r = r.min(n - r);
    (0..r).fold(1u128, |acc, t| acc.saturating_mul(n - t) / (t + 1))
}

/// Applies [`drop_small_coin`] and the empty-prefix form of [`replace_prefix`]
/// (largest admissible odd `i > 1`) until neither changes the position.
///
/// Drops are tried first. Every step lowers the coin count, so this terminates.
pub fn canonicalize(p: &Position) -> Position {
    let mut cur = p.clone();
    loop {
        if cur.len() < 3 {
            return cur;
        }
        if let Some(next) = drop_small_coin(&cur).expect("k >= 3 checked") {
            cur = next;
            continue;
        }
        let best = pair_indices(&cur)
            .into_iter()
            .filter(|&i| i % 2 == 1 && i > 1)
            .max();
        match best {
            Some(i) => {
                cur = replace_prefix(&cur, i, &[]).expect("index is admissible");
            }
            None => return cur,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pos(s: &[Square]) -> Position {
        Position::new(s.to_vec()).unwrap()
    }

    #[test]
    fn drop_examples() {
        assert_eq!(
            drop_small_coin(&pos(&[0, 2, 5])).unwrap(),
            Some(pos(&[1, 4]))
        );
        assert_eq!(drop_small_coin(&pos(&[3, 4, 8])).unwrap(), None);
        assert_eq!(
            drop_small_coin(&pos(&[0, 1, 5])).unwrap(),
            Some(pos(&[0, 4]))
        );
        assert!(matches!(
            drop_small_coin(&pos(&[0, 2])),
            Err(Error::TooFewCoins { needed: 3, got: 2 })
        ));
    }

    #[test]
    fn replace_examples() {
        let p = pos(&[0, 3, 4, 9]);
        assert_eq!(replace_prefix(&p, 2, &[1]).unwrap(), pos(&[1, 3, 4, 9]));
        assert_eq!(replace_prefix(&p, 2, &[2]).unwrap(), pos(&[2, 3, 4, 9]));
        assert_eq!(
            replace_prefix(&pos(&[0, 2, 3, 4, 8]), 3, &[]).unwrap(),
            pos(&[3, 4, 8])
        );
    }

    #[test]
    fn replace_hypothesis_errors() {
        let p = pos(&[0, 3, 4, 9]);
        let msg = |r: Result<Position>| match r {
            Err(Error::Hypothesis(m)) => m,
            other => panic!("expected hypothesis error, got {other:?}"),
        };
        assert!(msg(replace_prefix(&p, 1, &[])).contains("a_1 = 0 < 1"));
        assert!(msg(replace_prefix(&pos(&[1, 3, 4, 9]), 1, &[])).contains("a_2 = 3"));
        assert!(msg(replace_prefix(&p, 2, &[])).contains("odd"));
        assert!(msg(replace_prefix(&p, 2, &[3])).contains("below"));
        assert!(msg(replace_prefix(&p, 2, &[2, 1, 0])).contains("increasing"));
        assert!(msg(replace_prefix(&p, 4, &[])).contains("k-1"));
        assert!(msg(replace_prefix(&pos(&[0, 1, 2, 7]), 2, &[0])).contains("a_2 = 1 < 2"));
        assert!(replace_prefix(&pos(&[2, 3]), 1, &[]).is_err());
    }

    #[test]
    fn admissible_listing_matches_count() {
        for p in [
            &[0, 3, 4, 9][..],
            &[3, 4, 6, 8],
            &[1, 2, 5],
            &[0, 4, 5, 7, 8],
        ] {
            let p = pos(p);
            let all = admissible_replacements(&p);
            assert_eq!(all.len() as u128, admissible_replacement_count(&p), "{p}");
            for (i, b) in all {
                replace_prefix(&p, i, &b).unwrap();
            }
        }
        // i=2 with j in {1}: b in {(0),(1),(2)}.
        assert_eq!(admissible_replacements(&pos(&[0, 3, 4, 9])).len(), 3);
    }

    #[test]
    fn canonicalize_examples() {
        assert_eq!(canonicalize(&pos(&[0, 1, 5])), pos(&[0, 4]));
        assert_eq!(canonicalize(&pos(&[3, 4, 8])), pos(&[3, 4, 8]));
        assert_eq!(canonicalize(&pos(&[0, 2, 3, 4, 8])), pos(&[1, 5]));
        assert_eq!(
            canonicalize(&pos(&[0, 5, 6, 7, 8, 12])),
            pos(&[4, 5, 6, 10])
        );
        assert_eq!(canonicalize(&pos(&[5, 6, 8, 9, 13])), pos(&[8, 9, 13]));
        assert_eq!(canonicalize(&Position::packed(5)), pos(&[0, 1]));
    }
}
