//! The Welter function (Grundy function of classical Welter's game),
//! computed by the mating method.

use crate::error::{Error, Result};
use crate::grundy::GrundyValue;
use crate::position::{Position, Square};

/// Carry-free binary addition.
pub fn nim_add(a: u64, b: u64) -> u64 {
    a ^ b
}

/// `[a|b] = (a ⊕ b) - 1`, the value of a two-coin Welter position.
pub fn pair_value(a: Square, b: Square) -> Result<GrundyValue> {
    if a == b {
        return Err(Error::InvalidArgument(format!(
            "pair value needs distinct squares, got {a} twice"
        )));
    }
    Ok(nim_add(a, b) - 1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatingResult {
    pub pairs: Vec<(Square, Square)>,
    pub spinster: Option<Square>,
    pub value: GrundyValue,
}

/// Largest `t` with `a ≡ b (mod 2^t)`.
fn congruence(a: Square, b: Square) -> u32 {
    (a ^ b).trailing_zeros()
}

/// Pairs entries greedily by highest power-of-two congruence; among equally
/// good pairs the lexicographically first `(index, index)` wins.
pub fn mate(p: &Position) -> MatingResult {
    mate_by(p, |_| 0)
}

/// Like [`mate`] but `pick` chooses among all equally good candidate pairs at
/// each step (listed in lexicographic index order). Any choice gives the same
/// value; this exists to check exactly that.
pub fn mate_by(p: &Position, mut pick: impl FnMut(&[(Square, Square)]) -> usize) -> MatingResult {
    let mut left: Vec<Square> = p.squares().to_vec();
    let mut pairs = Vec::with_capacity(left.len() / 2);
    let mut candidates = Vec::new();
    while left.len() >= 2 {
        let mut best = 0;
        candidates.clear();
        for x in 0..left.len() {
            for y in x + 1..left.len() {
                let c = congruence(left[x], left[y]);
                if candidates.is_empty() || c > best {
                    candidates.clear();
                    best = c;
                    candidates.push((x, y));
                } else if c == best {
                    candidates.push((x, y));
                }
            }
        }
        let shown: Vec<_> = candidates
            .iter()
            .map(|&(x, y)| (left[x], left[y]))
            .collect();
        let (x, y) = candidates[pick(&shown).min(candidates.len() - 1)];
        pairs.push((left[x], left[y]));
        left.remove(y);
        left.remove(x);
    }
    let spinster = left.pop();
    let value = pairs
        .iter()
        .map(|&(a, b)| pair_value(a, b).expect("entries are distinct"))
        .chain(spinster)
        .fold(0, nim_add);
    MatingResult {
        pairs,
        spinster,
        value,
    }
}

pub fn welter_value(p: &Position) -> GrundyValue {
    mate(p).value
}
