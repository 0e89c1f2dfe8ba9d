//! Ordinal pattern extraction and permutation entropy.
//!
//! A series `(x_1, ..., x_n)` is scanned with an order `m` and a time delay
//! `tau`: each of the `k = n - (m-1)*tau` tuples `(x_j, x_{j+tau}, ...,
//! x_{j+(m-1)tau})` is reduced to the permutation describing the relative
//! order of its values. Counting how often each of the `m!` permutations
//! occurs gives a distribution whose Shannon entropy (base 2) is the
//! permutation entropy. Dividing by `log2(m!)` normalizes it into `[0, 1]`,
//! which makes values comparable across orders: 0 for a perfectly monotone
//! series, 1 when every pattern is equally likely.
//!
//! Counting is integer-exact; probabilities only appear at entropy
//! evaluation, so long records accumulate no float error.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::scalar::Scalar;

/// Largest supported pattern order; `12!` still fits comfortably in the
/// integer count table.
pub const MAX_ORDER: usize = 12;

const FACTORIALS: [u64; 13] = [
    1, 1, 2, 6, 24, 120, 720, 5040, 40320, 362880, 3628800, 39916800, 479001600,
];

/// Number of distinct ordinal patterns for a given order: `order!`.
pub fn pattern_count(order: usize) -> u64 {
    FACTORIALS[order]
}

#[derive(Debug, Error, PartialEq)]
pub enum OrdinalError {
    #[error("pattern order must be in 2..={MAX_ORDER}, got {0}")]
    InvalidOrder(usize),
    #[error("time delay must be >= 1")]
    InvalidDelay,
    #[error("tuple has {actual} elements, pattern order is {expected}")]
    WrongTupleLength { expected: usize, actual: usize },
    #[error("series of length {n} too short for order {order}, delay {delay} (needs {min})")]
    SeriesTooShort {
        n: usize,
        order: usize,
        delay: usize,
        min: usize,
    },
    #[error("not a probability distribution: {0}")]
    NotADistribution(String),
    #[error("cannot merge distributions with different parameters")]
    ParamsMismatch,
}

/// How equal values inside a tuple are ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieRule {
    /// The earlier position gets the smaller rank. Deterministic default.
    StableRank,
    /// Equal values are separated by adding deterministic pseudo-random
    /// perturbations of magnitude at most `1e-12 * (max - min)` of the tuple
    /// before ranking (ChaCha8 keyed by `seed`). Perturbations this small
    /// never reorder values whose gap exceeds that scale; a tuple with zero
    /// range falls back to stable ranking.
    Noise { seed: u64 },
}

/// Pattern extraction parameters: order `m`, delay `tau`, tie handling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternParams {
    order: usize,
    delay: usize,
    tie_rule: TieRule,
}

impl PatternParams {
    /// Validates `2 <= order <= 12` and `delay >= 1`; ties default to
    /// [`TieRule::StableRank`].
    pub fn new(order: usize, delay: usize) -> Result<Self, OrdinalError> {
        if !(2..=MAX_ORDER).contains(&order) {
            return Err(OrdinalError::InvalidOrder(order));
        }
        if delay < 1 {
            return Err(OrdinalError::InvalidDelay);
        }
        Ok(Self {
            order,
            delay,
            tie_rule: TieRule::StableRank,
        })
    }

    pub fn with_tie_rule(mut self, tie_rule: TieRule) -> Self {
        self.tie_rule = tie_rule;
        self
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn delay(&self) -> usize {
        self.delay
    }

    pub fn tie_rule(&self) -> TieRule {
        self.tie_rule
    }

    /// Number of tuples a series of length `n` yields: `n - (order-1)*delay`,
    /// or an error when that is not at least 1.
    pub fn tuple_count(&self, n: usize) -> Result<usize, OrdinalError> {
        let span = (self.order - 1) * self.delay;
        if n <= span {
            return Err(OrdinalError::SeriesTooShort {
                n,
                order: self.order,
                delay: self.delay,
                min: span + 1,
            });
        }
        Ok(n - span)
    }
}

/// The ordinal pattern of one tuple.
///
/// `ranks[i]` is the rank of the i-th tuple element (1 = smallest), so
/// `(9, 4, 7)` has ranks `(3, 1, 2)`. `lex_index` is the position of that
/// rank vector in the lexicographic enumeration of all `m!` permutations of
/// `(1, ..., m)`, starting at 0 for the identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrdinalPattern {
    pub ranks: Vec<u8>,
    pub lex_index: usize,
}

/// Maps a tuple of `params.order()` values to its ordinal pattern.
pub fn encode_pattern<F: Scalar>(
    tuple: &[F],
    params: &PatternParams,
) -> Result<OrdinalPattern, OrdinalError> {
    if tuple.len() != params.order {
        return Err(OrdinalError::WrongTupleLength {
            expected: params.order,
            actual: tuple.len(),
        });
    }
    Ok(encode_unchecked(tuple, params.tie_rule, 0))
}

/// Tuple salt decorrelates the noise tie rule across tuples of one series
/// while keeping the whole run reproducible from a single seed.
fn encode_unchecked<F: Scalar>(tuple: &[F], tie_rule: TieRule, salt: u64) -> OrdinalPattern {
    let m = tuple.len();
    let mut keys: Vec<f64> = tuple
        .iter()
        .map(|v| v.to_f64().unwrap_or(f64::NAN))
        .collect();

    if let TieRule::Noise { seed } = tie_rule {
        let lo = keys.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = keys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let scale = 1e-12 * (hi - lo);
        if scale > 0.0 {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            for key in keys.iter_mut() {
                *key += rng.gen::<f64>() * scale;
            }
        }
    }

    // Stable sort of positions by value; remaining ties (equal keys) keep
    // position order, which is exactly the stable-rank rule.
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        keys[a]
            .partial_cmp(&keys[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut ranks = vec![0u8; m];
    for (rank, &pos) in order.iter().enumerate() {
        ranks[pos] = (rank + 1) as u8;
    }

    let lex_index = lex_index_of(&ranks);
    OrdinalPattern { ranks, lex_index }
}

/// Lexicographic rank of a permutation of `(1, ..., m)` via its Lehmer code.
fn lex_index_of(ranks: &[u8]) -> usize {
    let m = ranks.len();
    let mut index = 0u64;
    for i in 0..m {
        let smaller_after = ranks[i + 1..].iter().filter(|&&r| r < ranks[i]).count() as u64;
        index += smaller_after * FACTORIALS[m - 1 - i];
    }
    index as usize
}

/// Counts over the `m!` ordinal patterns of one series.
#[derive(Debug, Clone, PartialEq)]
pub struct OrdinalDistribution {
    params: PatternParams,
    counts: Vec<u64>,
    total: u64,
}

impl OrdinalDistribution {
    pub fn params(&self) -> &PatternParams {
        &self.params
    }

    /// Per-pattern counts indexed by `lex_index`; length is `order!`.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Number of tuples counted, `n - (order-1)*delay`.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Pattern probabilities `counts / total`.
    pub fn probabilities<F: Scalar>(&self) -> Vec<F> {
        let total = F::from_u64(self.total).unwrap();
        self.counts
            .iter()
            .map(|&c| F::from_u64(c).unwrap() / total)
            .collect()
    }

    /// Shannon entropy of the pattern distribution in bits, evaluated from
    /// the exact counts as `(k*log2(k) - sum(c*log2(c))) / k`. A single
    /// occupied pattern gives exactly 0.
    pub fn entropy_bits<F: Scalar>(&self) -> F {
        let k = F::from_u64(self.total).unwrap();
        let occupied: F = self
            .counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let c = F::from_u64(c).unwrap();
                c * c.log2()
            })
            .sum();
        ((k * k.log2() - occupied) / k).max(F::zero())
    }

    /// Entropy divided by `log2(order!)`, clamped into `[0, 1]`.
    pub fn normalized_entropy<F: Scalar>(&self) -> F {
        let h: F = self.entropy_bits();
        let max = F::from_u64(pattern_count(self.params.order))
            .unwrap()
            .log2();
        (h / max).min(F::one()).max(F::zero())
    }

    /// Adds another distribution's counts. Merging is associative and
    /// commutative, so per-window distributions may be computed in parallel
    /// and combined in any order.
    pub fn merge(&mut self, other: &OrdinalDistribution) -> Result<(), OrdinalError> {
        if self.params != other.params {
            return Err(OrdinalError::ParamsMismatch);
        }
        for (c, o) in self.counts.iter_mut().zip(&other.counts) {
            *c += o;
        }
        self.total += other.total;
        Ok(())
    }
}

/// Scans the series and counts each tuple's ordinal pattern.
pub fn pattern_distribution<F: Scalar>(
    series: &[F],
    params: &PatternParams,
) -> Result<OrdinalDistribution, OrdinalError> {
    let k = params.tuple_count(series.len())?;
    let m = params.order;
    let tau = params.delay;

    let mut counts = vec![0u64; pattern_count(m) as usize];
    let mut tuple = vec![F::zero(); m];
    for j in 0..k {
        for (i, slot) in tuple.iter_mut().enumerate() {
            *slot = series[j + i * tau];
        }
        let pattern = encode_unchecked(&tuple, params.tie_rule, j as u64);
        counts[pattern.lex_index] += 1;
    }

    Ok(OrdinalDistribution {
        params: *params,
        counts,
        total: k as u64,
    })
}

/// Shannon entropy in bits of an explicit probability distribution:
/// `-sum(p * log2 p)` over nonzero entries.
///
/// Requires every `p >= 0` and the total within `1e-9` of 1 (checked in
/// double precision regardless of `F`).
pub fn shannon_entropy<F: Scalar>(probabilities: &[F]) -> Result<F, OrdinalError> {
    let mut sum = 0.0f64;
    for (i, &p) in probabilities.iter().enumerate() {
        let pf = p.to_f64().unwrap_or(f64::NAN);
        if !pf.is_finite() || pf < 0.0 {
            return Err(OrdinalError::NotADistribution(format!(
                "entry {i} is {pf}, expected a nonnegative finite value"
            )));
        }
        sum += pf;
    }
    if (sum - 1.0).abs() > 1e-9 {
        return Err(OrdinalError::NotADistribution(format!(
            "probabilities sum to {sum}, expected 1 within 1e-9"
        )));
    }
    let h: F = probabilities
        .iter()
        .filter(|p| **p > F::zero())
        .map(|&p| -(p * p.log2()))
        .sum();
    Ok(h.max(F::zero()))
}

/// Permutation entropy of a series in bits, or divided by `log2(order!)`
/// when `normalized` (the normalized value lies in `[0, 1]`).
pub fn permutation_entropy<F: Scalar>(
    series: &[F],
    params: &PatternParams,
    normalized: bool,
) -> Result<F, OrdinalError> {
    let dist = pattern_distribution(series, params)?;
    Ok(if normalized {
        dist.normalized_entropy()
    } else {
        dist.entropy_bits()
    })
}
