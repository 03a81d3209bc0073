//! Grundy-sequence analyzers: additive periodicity as the top coin moves
//! right, translation invariance, and empirical period detection for
//! translated families.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grundy::{GrundyValue, Oracle};
use crate::position::{Convention, Position, Ruleset, Square};

/// A detected period is only trusted when this many full periods fit between
/// the preperiod start and the horizon.
pub const MIN_VERIFIED_PERIODS: u64 = 3;

/// `s_{n+period} = s_n + additive_step` for `preperiod_start <= n <= horizon - period`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodReport {
    pub preperiod_start: u64,
    pub period: u64,
    /// 0 for ordinary periodicity.
    pub additive_step: u64,
    pub horizon: u64,
    pub verified_at_horizon: bool,
    pub counterexample: Option<u64>,
}

/// Smallest period whose tail holds for at least `min_periods` periods.
///
/// `seq[n]` is the term at index `n`, so the horizon is `seq.len() - 1`. When
/// no period meets the threshold, the candidate covering the most periods is
/// returned unverified.
pub fn detect_period(seq: &[GrundyValue], additive_step: u64, min_periods: u64) -> PeriodReport {
    assert!(
        !seq.is_empty(),
        "cannot detect a period in an empty sequence"
    );
    let len = seq.len() as u64;
    let horizon = len - 1;
    let unverified = |n0, p| PeriodReport {
        preperiod_start: n0,
        period: p,
        additive_step,
        horizon,
        verified_at_horizon: false,
        counterexample: None,
    };
    if len < 2 {
        return unverified(0, 1);
    }

    // (ratio numerator, p, n0) of the best unverified candidate.
    let mut fallback: Option<(u64, u64, u64)> = None;
    for p in 1..len {
        let n0 = tail_start(seq, p as usize, additive_step);
        let covered = len - n0;
        if covered >= min_periods * p {
            return PeriodReport {
                verified_at_horizon: true,
                ..unverified(n0, p)
            };
        }
        // Compare covered/p across candidates without division.
        let better = match fallback {
            None => true,
            Some((c, bp, _)) => covered * bp > c * p,
        };
        if better {
            fallback = Some((covered, p, n0));
        }
    }
    let (_, p, n0) = fallback.expect("at least one candidate");
    unverified(n0, p)
}

/// Smallest `n0` such that the law holds for every `n >= n0` in range.
fn tail_start(seq: &[GrundyValue], p: usize, step: u64) -> u64 {
    (0..seq.len() - p)
        .rev()
        .find(|&n| seq[n + p] != seq[n] + step)
        .map_or(0, |n| n as u64 + 1)
}

fn normal_value(oracle: &Oracle, p: &Position) -> Result<GrundyValue> {
    oracle.grundy(p, Ruleset::MaxWelter, Convention::Normal)
}

/// Finds the smallest `n` in `1..=a_k` with `G(prefix, a_k + n) = a_k`, then
/// checks `G(prefix, a_k + n + i) = a_k + i` for `0 <= i <= horizon`.
///
/// The report indexes the sequence `s_x = G(prefix, a_k + x)`; a failing `i`
/// shows up as `counterexample = Some(n + i)`.
pub fn find_additive_shift(
    oracle: &Oracle,
    prefix: &[Square],
    a_k: Square,
    horizon: u64,
) -> Result<(u64, PeriodReport)> {
    if prefix.is_empty() {
        return Err(Error::too_few(2, 1));
    }
    Position::with_top(prefix, a_k)?;
    let at = |x: Square| Position::with_top(prefix, a_k + x).and_then(|p| normal_value(oracle, &p));

    let mut shift = None;
    for n in 1..=a_k {
        if at(n)? == a_k {
            shift = Some(n);
            break;
        }
    }
    let Some(n) = shift else {
        return Err(Error::ShiftNotFound {
            position: Position::with_top(prefix, a_k)?.to_string(),
            bound: a_k,
        });
    };

    let mut counterexample = None;
    for i in 0..=horizon {
        if at(n + i)? != a_k + i {
            counterexample = Some(n + i);
            break;
        }
    }
    let report = PeriodReport {
        preperiod_start: n,
        period: 1,
        additive_step: 1,
        horizon: n + horizon,
        verified_at_horizon: counterexample.is_none(),
        counterexample,
    };
    Ok((n, report))
}

/// Hypothesis of translation invariance: `k >= 3`, `a_k > a_{k-1} + 1`, and
/// some `i <= k-2` with `a_i >= k-2` and `a_{i+1} = a_i + 1`.
pub fn translation_hypothesis(p: &Position) -> bool {
    let s = p.squares();
    let k = s.len();
    if k < 3 || s[k - 1] <= s[k - 2] + 1 {
        return false;
    }
    (1..=k - 2).any(|i| s[i - 1] >= (k - 2) as Square && s[i] == s[i - 1] + 1)
}

/// `Some(G(p + 1) == G(p))` when [`translation_hypothesis`] holds, else `None`.
pub fn check_translation_invariance(oracle: &Oracle, p: &Position) -> Result<Option<bool>> {
    if p.len() < 3 {
        return Err(Error::too_few(3, p.len()));
    }
    if !translation_hypothesis(p) {
        return Ok(None);
    }
    let here = normal_value(oracle, p)?;
    let shifted = normal_value(oracle, &p.translate(1))?;
    Ok(Some(here == shifted))
}

/// `G(p + i)` for `0 <= i <= horizon`, computed in parallel.
pub fn translated_sequence(
    oracle: &Oracle,
    p: &Position,
    horizon: u64,
) -> Result<Vec<GrundyValue>> {
    (0..=horizon)
        .into_par_iter()
        .map(|i| normal_value(oracle, &p.translate(i)))
        .collect()
}

/// Hypothesis of the period-one translation scan: `k >= 3`, `a_k > a_{k-1}+1`
/// and two consecutive gaps that differ somewhere.
pub fn translation_scan_hypothesis(p: &Position) -> bool {
    let s = p.squares();
    let k = s.len();
    k >= 3 && s[k - 1] > s[k - 2] + 1 && s.windows(3).any(|w| w[1] - w[0] != w[2] - w[1])
}

/// Period of `G(p + i)` over `0 <= i <= horizon` (expected: 1).
pub fn scan_translation_period(
    oracle: &Oracle,
    p: &Position,
    horizon: u64,
) -> Result<PeriodReport> {
    if !translation_scan_hypothesis(p) {
        return Err(Error::Hypothesis(format!(
            "{p}: need k >= 3, a_k > a_(k-1) + 1 and two unequal consecutive gaps"
        )));
    }
    let seq = translated_sequence(oracle, p, horizon)?;
    Ok(detect_period(&seq, 0, MIN_VERIFIED_PERIODS))
}

/// The position `(a, a+m, ..., a+km)`.
pub fn progression(a: Square, m: Square, k: u64) -> Result<Position> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "common difference m must be positive".into(),
        ));
    }
    if k == 0 {
        return Err(Error::too_few(2, 1));
    }
    Position::new((0..=k).map(|t| a + t * m).collect::<Vec<_>>())
}

/// Period of `G(a+i, a+m+i, ..., a+km+i)` over `0 <= i <= horizon` (expected: 2m).
pub fn scan_arithmetic_progression(
    oracle: &Oracle,
    a: Square,
    m: Square,
    k: u64,
    horizon: u64,
) -> Result<PeriodReport> {
    let base = progression(a, m, k)?;
    let seq = translated_sequence(oracle, &base, horizon)?;
    Ok(detect_period(&seq, 0, MIN_VERIFIED_PERIODS))
}

/// One structured line per scan, e.g.
/// `kind=conj6.2 a=0 m=2 k=1 horizon=100 n0=5 period=4 verified=true`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanRecord {
    pub kind: &'static str,
    pub params: Vec<(&'static str, String)>,
    pub report: PeriodReport,
}

impl ScanRecord {
    pub fn progression(a: Square, m: Square, k: u64, horizon: u64, report: PeriodReport) -> Self {
        ScanRecord {
            kind: "conj6.2",
            params: vec![
                ("a", a.to_string()),
                ("m", m.to_string()),
                ("k", k.to_string()),
                ("horizon", horizon.to_string()),
            ],
            report,
        }
    }

    pub fn translation(p: &Position, horizon: u64, report: PeriodReport) -> Self {
        ScanRecord {
            kind: "conj6.1",
            params: vec![("squares", p.to_string()), ("horizon", horizon.to_string())],
            report,
        }
    }

    pub fn additive_shift(p: &Position, shift: u64, horizon: u64, report: PeriodReport) -> Self {
        ScanRecord {
            kind: "thm6.1",
            params: vec![
                ("squares", p.to_string()),
                ("shift", shift.to_string()),
                ("horizon", horizon.to_string()),
            ],
            report,
        }
    }
}

impl fmt::Display for ScanRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "kind={}", self.kind)?;
        for (k, v) in &self.params {
            write!(f, " {k}={v}")?;
        }
        write!(
            f,
            " n0={} period={} verified={}",
            self.report.preperiod_start, self.report.period, self.report.verified_at_horizon
        )?;
        if self.report.additive_step != 0 {
            write!(f, " step={}", self.report.additive_step)?;
        }
        if let Some(c) = self.report.counterexample {
            write!(f, " counterexample={c}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pos(s: &[Square]) -> Position {
        Position::new(s.to_vec()).unwrap()
    }

    #[test]
    fn detect_simple_periods() {
        let alt: Vec<_> = (0..=100).map(|i| i % 2).collect();
        let r = detect_period(&alt, 0, 3);
        assert_eq!(
            (r.preperiod_start, r.period, r.verified_at_horizon),
            (0, 2, true)
        );

        let mut tail = vec![9, 7, 5];
        tail.extend(std::iter::repeat_n(4, 20));
        let r = detect_period(&tail, 0, 3);
        assert_eq!(
            (r.preperiod_start, r.period, r.verified_at_horizon),
            (3, 1, true)
        );

        let lin: Vec<_> = (10..40).collect();
        let r = detect_period(&lin, 1, 3);
        assert_eq!(
            (r.preperiod_start, r.period, r.verified_at_horizon),
            (0, 1, true)
        );
    }

    #[test]
    fn short_horizon_is_unverified() {
        // Period 4 needs 12 terms past n0; only 8 are available.
        let seq = [0, 1, 2, 3, 0, 1, 2, 3];
        let r = detect_period(&seq, 0, 3);
        assert!(!r.verified_at_horizon);
        assert_eq!(r.horizon, 7);
    }

    #[test]
    fn additive_shift_examples() {
        let o = Oracle::new();
        let (n, r) = find_additive_shift(&o, &[0], 1, 50).unwrap();
        assert_eq!(n, 1);
        assert!(r.verified_at_horizon);
        let (n, r) = find_additive_shift(&o, &[1], 2, 50).unwrap();
        assert_eq!(n, 1);
        assert!(r.verified_at_horizon);
        let (n, r) = find_additive_shift(&o, &[0, 1], 2, 50).unwrap();
        assert_eq!(n, 2);
        assert!(r.verified_at_horizon && n <= 2);
        assert!(find_additive_shift(&o, &[3], 2, 5).is_err());
        assert!(find_additive_shift(&o, &[], 2, 5).is_err());
    }

    #[test]
    fn translation_invariance_examples() {
        let o = Oracle::new();
        assert_eq!(
            check_translation_invariance(&o, &pos(&[2, 3, 6])).unwrap(),
            Some(true)
        );
        assert_eq!(
            check_translation_invariance(&o, &pos(&[1, 2, 3])).unwrap(),
            None
        );
        assert_eq!(
            check_translation_invariance(&o, &pos(&[0, 2, 5])).unwrap(),
            None
        );
        assert!(check_translation_invariance(&o, &pos(&[2, 5])).is_err());
    }

    #[test]
    fn scan_hypotheses() {
        assert!(translation_scan_hypothesis(&pos(&[0, 2, 5])));
        assert!(translation_scan_hypothesis(&pos(&[0, 1, 4])));
        assert!(!translation_scan_hypothesis(&pos(&[0, 2, 4])));
        assert!(!translation_scan_hypothesis(&pos(&[0, 3, 4])));
        let o = Oracle::new();
        assert!(matches!(
            scan_translation_period(&o, &pos(&[0, 2, 4]), 10),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn progression_scan_adjacent_pairs() {
        let o = Oracle::new();
        let r = scan_arithmetic_progression(&o, 0, 1, 1, 100).unwrap();
        assert_eq!(
            (r.preperiod_start, r.period, r.verified_at_horizon),
            (0, 2, true)
        );
        let rec = ScanRecord::progression(0, 1, 1, 100, r);
        assert_eq!(
            rec.to_string(),
            "kind=conj6.2 a=0 m=1 k=1 horizon=100 n0=0 period=2 verified=true"
        );
        assert!(progression(0, 0, 1).is_err());
        assert!(progression(0, 1, 0).is_err());
    }
}
