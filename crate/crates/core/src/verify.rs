//! Exhaustive cross-checking of the closed forms against the brute-force oracle.
//!
//! A suite applies one predicate to every position of a [`PositionSpace`],
//! counting positions outside the predicate's hypotheses as skipped and
//! collecting every counterexample rather than stopping at the first.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;
use std::time::{Duration, Instant};

use itertools::Itertools;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::closedform;
use crate::error::{Error, Result};
use crate::grundy::{GrundyValue, Oracle};
use crate::periodicity;
use crate::position::{Convention, Position, Ruleset, Square};
use crate::reduce;
use crate::welter;

pub const DEFAULT_SEED: u64 = 0x5EED;
pub const DEFAULT_REPLACEMENT_CAP: usize = 200;
pub const DEFAULT_SHIFT_HORIZON: u64 = 50;

/// All strictly increasing `k`-subsets of `{0, ..., max_square}` for each `k` in range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionSpace {
    pub k_min: usize,
    pub k_max: usize,
    pub max_square: Square,
}

impl PositionSpace {
    pub fn new(k_range: RangeInclusive<usize>, max_square: Square) -> Result<Self> {
        let (k_min, k_max) = (*k_range.start(), *k_range.end());
        if k_min == 0 || k_min > k_max {
            return Err(Error::EmptySpace(format!(
                "coin-count range {k_min}..{k_max}"
            )));
        }
        if (max_square as u128) + 1 < k_max as u128 {
            return Err(Error::EmptySpace(format!(
                "{k_max} coins do not fit on squares 0..={max_square}"
            )));
        }
        Ok(PositionSpace {
            k_min,
            k_max,
            max_square,
        })
    }

    /// Lexicographic within each `k`, ascending `k`.
    pub fn enumerate(&self) -> impl Iterator<Item = Position> + '_ {
        (self.k_min..=self.k_max).flat_map(move |k| {
            (0..=self.max_square)
                .combinations(k)
                .map(Position::from_sorted_unchecked)
        })
    }

    pub fn size(&self) -> u128 {
        let n = self.max_square as u128 + 1;
        (self.k_min..=self.k_max)
            .map(|k| {
                let k = k as u128;
                (0..k).fold(1u128, |acc, t| acc * (n - t) / (t + 1))
            })
            .sum()
    }
}

impl fmt::Display for PositionSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "k={}..{} max_square={}",
            self.k_min, self.k_max, self.max_square
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    /// Value-0 classifier vs normal-play oracle.
    PPositions,
    /// Value-1 classifier vs normal-play oracle.
    ValueOne,
    /// Exact value for an adjacent second and third coin.
    GapValue,
    /// Value 2 forces a top gap of 2.
    ValueTwoGap,
    /// Dropping an immovable smallest coin.
    DropSmallCoin,
    /// Replacing the prefix below an adjacent pair.
    ReplacePrefix,
    /// `G(prefix, a_k + n + i) = a_k + i`.
    AdditiveShift,
    /// `G(p + 1) = G(p)` under the pair hypothesis.
    TranslationInvariance,
    /// Misère value-0 classifier.
    MisereP,
    /// Misère value-1 classifier.
    MisereOne,
    /// Normal and misère values agree up to swapping 0 and 1.
    MisereSwap,
    /// Mating method vs classical Welter oracle.
    WelterMating,
}

impl Suite {
    pub const ALL: [Suite; 12] = [
        Suite::PPositions,
        Suite::ValueOne,
        Suite::GapValue,
        Suite::ValueTwoGap,
        Suite::DropSmallCoin,
        Suite::ReplacePrefix,
        Suite::AdditiveShift,
        Suite::TranslationInvariance,
        Suite::MisereP,
        Suite::MisereOne,
        Suite::MisereSwap,
        Suite::WelterMating,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Suite::PPositions => "thm2.1",
            Suite::ValueOne => "thm3.1",
            Suite::GapValue => "cor3.2",
            Suite::ValueTwoGap => "prop4",
            Suite::DropSmallCoin => "thm5.1",
            Suite::ReplacePrefix => "thm5.2",
            Suite::AdditiveShift => "thm6.1",
            Suite::TranslationInvariance => "thm6.2",
            Suite::MisereP => "thm7.1",
            Suite::MisereOne => "thm7.2",
            Suite::MisereSwap => "thm7.4",
            Suite::WelterMating => "welter-mating",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.id() == s)
            .ok_or_else(|| Error::UnknownSuite(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteOptions {
    /// Seed for the capped sample of prefix replacements.
    pub seed: u64,
    pub replacement_cap: usize,
    pub shift_horizon: u64,
    /// Worker threads; `None` uses the ambient rayon pool.
    pub jobs: Option<usize>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seed: DEFAULT_SEED,
            replacement_cap: DEFAULT_REPLACEMENT_CAP,
            shift_horizon: DEFAULT_SHIFT_HORIZON,
            jobs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Counterexample {
    pub position: Position,
    pub expected: String,
    pub actual: String,
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite_id: String,
    pub space: String,
    pub seed: u64,
    pub positions_checked: u64,
    pub positions_skipped: u64,
    /// Individual assertions; exceeds `positions_checked` when a suite tests
    /// several cases per position.
    pub cases_checked: u64,
    pub counterexamples: Vec<Counterexample>,
    pub notes: Vec<String>,
    pub elapsed: Duration,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "suite={} {} seed={:#x} checked={} skipped={} cases={} counterexamples={} elapsed_ms={}",
            self.suite_id,
            self.space,
            self.seed,
            self.positions_checked,
            self.positions_skipped,
            self.cases_checked,
            self.counterexamples.len(),
            self.elapsed.as_millis()
        )?;
        for note in &self.notes {
            write!(f, "\nnote suite={} {note}", self.suite_id)?;
        }
        for c in &self.counterexamples {
            write!(
                f,
                "\ncounterexample suite={} position={} expected={} actual={}",
                self.suite_id, c.position, c.expected, c.actual
            )?;
        }
        Ok(())
    }
}

enum Outcome {
    Skipped,
    Checked {
        cases: u64,
        failures: Vec<Counterexample>,
        /// Suite-specific tallies, summed into notes.
        tally: [u64; 2],
    },
}

impl Outcome {
    fn single(
        ok: bool,
        p: &Position,
        expected: impl FnOnce() -> String,
        actual: impl FnOnce() -> String,
    ) -> Self {
        let failures = if ok {
            Vec::new()
        } else {
            vec![Counterexample {
                position: p.clone(),
                expected: expected(),
                actual: actual(),
            }]
        };
        Outcome::Checked {
            cases: 1,
            failures,
            tally: [0; 2],
        }
    }
}

fn normal(oracle: &Oracle, p: &Position) -> Result<GrundyValue> {
    oracle.grundy(p, Ruleset::MaxWelter, Convention::Normal)
}

fn misere(oracle: &Oracle, p: &Position) -> Result<GrundyValue> {
    oracle.grundy(p, Ruleset::MaxWelter, Convention::Misere)
}

fn position_seed(seed: u64, p: &Position) -> u64 {
    // splitmix64 over the squares; independent of enumeration order.
    let mut h = seed;
    for &s in p.squares() {
        h = h.wrapping_add(s).wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = h;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h = z ^ (z >> 31);
    }
    h
}

/// The `(i, b)` pairs the prefix-replacement suite tests at `p`: all of
/// them up to `cap`, otherwise a seeded sample of `cap`.
pub fn sampled_replacements(p: &Position, cap: usize, seed: u64) -> Vec<(usize, Vec<Square>)> {
    let all = reduce::admissible_replacements(p);
    if all.len() <= cap {
        return all;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(position_seed(seed, p));
    let mut picked = index::sample(&mut rng, all.len(), cap).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|ix| all[ix].clone()).collect()
}

fn check(oracle: &Oracle, suite: Suite, p: &Position, opts: &SuiteOptions) -> Result<Outcome> {
    let k = p.len();
    let out = match suite {
        Suite::PPositions => {
            if k < 2 {
                return Ok(Outcome::Skipped);
            }
            let claim = closedform::is_p_position_normal(p)?;
            let g = normal(oracle, p)?;
            Outcome::single(
                claim == (g == 0),
                p,
                || format!("p_position={claim}"),
                || format!("grundy={g}"),
            )
        }
        Suite::ValueOne => {
            if k < 2 {
                return Ok(Outcome::Skipped);
            }
            let claim = closedform::has_value_one_normal(p)?;
            let g = normal(oracle, p)?;
            Outcome::single(
                claim == (g == 1),
                p,
                || format!("value_one={claim}"),
                || format!("grundy={g}"),
            )
        }
        Suite::GapValue => {
            if k < 3 {
                return Ok(Outcome::Skipped);
            }
            let Some(v) = closedform::corollary_value(p)? else {
                return Ok(Outcome::Skipped);
            };
            let g = normal(oracle, p)?;
            Outcome::single(
                v == g,
                p,
                || format!("grundy={v}"),
                || format!("grundy={g}"),
            )
        }
        Suite::ValueTwoGap => {
            if k < 3 {
                return Ok(Outcome::Skipped);
            }
            let g = normal(oracle, p)?;
            let ok = closedform::check_value_two_gap(p, g)?;
            let gap = p.max_square() - p.coin(k - 1);
            Outcome::single(ok, p, || "gap=2".into(), || format!("grundy={g} gap={gap}"))
        }
        Suite::DropSmallCoin => {
            if k < 3 {
                return Ok(Outcome::Skipped);
            }
            let Some(smaller) = reduce::drop_small_coin(p)? else {
                return Ok(Outcome::Skipped);
            };
            let (g, h) = (normal(oracle, p)?, normal(oracle, &smaller)?);
            Outcome::single(
                g == h,
                p,
                || format!("grundy={g}"),
                || format!("grundy({smaller})={h}"),
            )
        }
        Suite::ReplacePrefix => {
            let cases = sampled_replacements(p, opts.replacement_cap, opts.seed);
            if cases.is_empty() {
                return Ok(Outcome::Skipped);
            }
            let g = normal(oracle, p)?;
            let mut failures = Vec::new();
            // [shrinking-or-equal failures, growing failures]
            let mut tally = [0u64; 2];
            for (i, b) in &cases {
                let q = reduce::replace_prefix(p, *i, b)?;
                let h = normal(oracle, &q)?;
                if g != h {
                    tally[usize::from(b.len() + 1 > *i)] += 1;
                    failures.push(Counterexample {
                        position: p.clone(),
                        expected: format!("grundy={g}"),
                        actual: format!("i={i} b=({}) grundy({q})={h}", b.iter().join(",")),
                    });
                }
            }
            Outcome::Checked {
                cases: cases.len() as u64,
                failures,
                tally,
            }
        }
        Suite::AdditiveShift => {
            if k < 2 {
                return Ok(Outcome::Skipped);
            }
            let (prefix, top) = (&p.squares()[..k - 1], p.max_square());
            match periodicity::find_additive_shift(oracle, prefix, top, opts.shift_horizon) {
                Ok((n, report)) => Outcome::single(
                    n <= top && report.verified_at_horizon,
                    p,
                    || format!("shift<={top} law_holds=true"),
                    || format!("shift={n} first_failure={:?}", report.counterexample),
                ),
                Err(Error::ShiftNotFound { .. }) => Outcome::single(
                    false,
                    p,
                    || format!("shift<={top}"),
                    || "no shift found".into(),
                ),
                Err(e) => return Err(e),
            }
        }
        Suite::TranslationInvariance => {
            if k < 3 {
                return Ok(Outcome::Skipped);
            }
            match periodicity::check_translation_invariance(oracle, p)? {
                None => return Ok(Outcome::Skipped),
                Some(ok) => Outcome::single(
                    ok,
                    p,
                    || "invariant".into(),
                    || {
                        let a = normal(oracle, p).unwrap_or(u64::MAX);
                        let b = normal(oracle, &p.translate(1)).unwrap_or(u64::MAX);
                        format!("grundy={a} shifted={b}")
                    },
                ),
            }
        }
        Suite::MisereP => {
            if k < 2 {
                return Ok(Outcome::Skipped);
            }
            let claim = closedform::is_p_position_misere(p)?;
            let g = misere(oracle, p)?;
            Outcome::single(
                claim == (g == 0),
                p,
                || format!("misere_p={claim}"),
                || format!("misere_grundy={g}"),
            )
        }
        Suite::MisereOne => {
            if k < 2 {
                return Ok(Outcome::Skipped);
            }
            let claim = closedform::has_value_one_misere(p)?;
            let g = misere(oracle, p)?;
            Outcome::single(
                claim == (g == 1),
                p,
                || format!("misere_one={claim}"),
                || format!("misere_grundy={g}"),
            )
        }
        Suite::MisereSwap => {
            let (g, gm) = (normal(oracle, p)?, misere(oracle, p)?);
            let expected = match g {
                0 => 1,
                1 => 0,
                v => v,
            };
            Outcome::single(
                gm == expected,
                p,
                || format!("misere_grundy={expected}"),
                || format!("grundy={g} misere_grundy={gm}"),
            )
        }
        Suite::WelterMating => {
            let mated = welter::welter_value(p);
            let g = oracle.grundy(p, Ruleset::Welter, Convention::Normal)?;
            let two_coin = if k == 2 {
                welter::pair_value(p.coin(1), p.coin(2))? == g
            } else {
                true
            };
            Outcome::single(
                mated == g && two_coin,
                p,
                || format!("welter_grundy={mated}"),
                || format!("welter_grundy={g}"),
            )
        }
    };
    Ok(out)
}

/// Runs `suite` over every position of `space`.
pub fn run_suite(
    oracle: &Oracle,
    suite: Suite,
    space: &PositionSpace,
    opts: &SuiteOptions,
) -> Result<SuiteReport> {
    let positions: Vec<Position> = space.enumerate().collect();
    run_suite_over(oracle, suite, &positions, &space.to_string(), opts)
}

/// Runs `suite` over an explicit list of positions; `label` describes them in the report.
pub fn run_suite_over(
    oracle: &Oracle,
    suite: Suite,
    positions: &[Position],
    label: &str,
    opts: &SuiteOptions,
) -> Result<SuiteReport> {
    let start = Instant::now();
    let work = || -> Result<Vec<Outcome>> {
        positions
            .par_iter()
            .map(|p| check(oracle, suite, p, opts))
            .collect()
    };
    let outcomes = match opts.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };

    let mut report = SuiteReport {
        suite_id: suite.id().to_string(),
        space: label.to_string(),
        seed: opts.seed,
        positions_checked: 0,
        positions_skipped: 0,
        cases_checked: 0,
        counterexamples: Vec::new(),
        notes: Vec::new(),
        elapsed: Duration::ZERO,
    };
    let mut tally = [0u64; 2];
    for o in outcomes {
        match o {
            Outcome::Skipped => report.positions_skipped += 1,
            Outcome::Checked {
                cases,
                failures,
                tally: t,
            } => {
                report.positions_checked += 1;
                report.cases_checked += cases;
                report.counterexamples.extend(failures);
                tally[0] += t[0];
                tally[1] += t[1];
            }
        }
    }
    report.counterexamples.sort();
    if suite == Suite::ReplacePrefix {
        report.notes.push(format!(
            "shrinking_or_equal_prefix_failures={} growing_prefix_failures={} cap={}",
            tally[0], tally[1], opts.replacement_cap
        ));
    }
    report.elapsed = start.elapsed();
    Ok(report)
}

/// Positions `(prefix, max(prefix) + gap)` for every prefix of
/// `prefix_coins` coins drawn from `0..=prefix_max` and every gap in `gaps`.
pub fn additive_shift_space(
    prefix_coins: RangeInclusive<usize>,
    prefix_max: Square,
    gaps: RangeInclusive<Square>,
) -> Vec<Position> {
    let mut out = Vec::new();
    for c in prefix_coins {
        for prefix in (0..=prefix_max).combinations(c) {
            let top = *prefix.last().expect("at least one prefix coin");
            for g in gaps.clone() {
                out.push(Position::with_top(&prefix, top + g).expect("gap is positive"));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerate_examples() {
        let s = PositionSpace::new(2..=2, 2).unwrap();
        let all: Vec<_> = s.enumerate().map(|p| p.to_string()).collect();
        assert_eq!(all, vec!["0,1", "0,2", "1,2"]);
        assert_eq!(PositionSpace::new(3..=3, 3).unwrap().enumerate().count(), 4);
        let five = PositionSpace::new(5..=5, 16).unwrap();
        assert_eq!(five.enumerate().count(), 6188);
        assert_eq!(five.size(), 6188);
    }

    #[test]
    #[allow(clippy::reversed_empty_ranges)]
    fn empty_spaces_rejected() {
        assert!(matches!(
            PositionSpace::new(3..=2, 9),
            Err(Error::EmptySpace(_))
        ));
        assert!(matches!(
            PositionSpace::new(0..=2, 9),
            Err(Error::EmptySpace(_))
        ));
        assert!(matches!(
            PositionSpace::new(2..=5, 3),
            Err(Error::EmptySpace(_))
        ));
    }

    #[test]
    fn suite_ids_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.id().parse::<Suite>().unwrap(), s);
        }
        assert!(matches!(
            "thm9.9".parse::<Suite>(),
            Err(Error::UnknownSuite(_))
        ));
    }

    #[test]
    fn small_suites_pass() {
        let o = Oracle::new();
        let space = PositionSpace::new(2..=4, 9).unwrap();
        for suite in [
            Suite::PPositions,
            Suite::ValueOne,
            Suite::MisereSwap,
            Suite::WelterMating,
        ] {
            let r = run_suite(&o, suite, &space, &SuiteOptions::default()).unwrap();
            assert!(r.passed(), "{r}");
            assert_eq!(
                r.positions_checked + r.positions_skipped,
                space.size() as u64
            );
        }
    }

    #[test]
    fn replacement_sampling_is_capped_and_deterministic() {
        let p: Position = "0,12,13,14".parse().unwrap();
        assert!(reduce::admissible_replacement_count(&p) > 200);
        let a = sampled_replacements(&p, 200, DEFAULT_SEED);
        let b = sampled_replacements(&p, 200, DEFAULT_SEED);
        assert_eq!(a.len(), 200);
        assert_eq!(a, b);
        assert_ne!(a, sampled_replacements(&p, 200, 1));
    }

    #[test]
    fn shift_space_size() {
        // (9 + 36 + 84) prefixes times 4 gaps.
        assert_eq!(additive_shift_space(1..=3, 8, 1..=4).len(), 516);
    }
}
