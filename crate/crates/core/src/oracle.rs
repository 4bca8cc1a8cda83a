//! Brute-force ground truth: block counts of `Ω_{a,b}`, a growth-based label,
//! and orbit checks against the hole.
//!
//! Nothing here shares code with the automaton or the classifier.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, Zero};

use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::word::EpWord;

/// Largest block length `block_count` accepts.
pub const MAX_BLOCK_LEN: usize = 22;
/// Largest `N` accepted by `brute_classify`.
pub const MAX_CLASSIFY_LEN: usize = 20;

const SHARD_LEN: usize = 8;

// Suffixes still equal to a prefix of their bound, by start index.
#[derive(Clone)]
struct Walk<'w> {
    a: &'w EpWord,
    b: &'w EpWord,
    word: Vec<u8>,
    open: Vec<usize>,
}

impl<'w> Walk<'w> {
    fn new(a: &'w EpWord, b: &'w EpWord) -> Self {
        Walk { a, b, word: Vec::new(), open: Vec::new() }
    }

    /// Appends `x`, or returns `None` if some suffix now leaves its bound.
    fn push(&self, x: u8) -> Option<Walk<'w>> {
        let p = self.word.len();
        let mut open = Vec::with_capacity(self.open.len() + 1);
        for &i in self.open.iter().chain(std::iter::once(&p)) {
            let lead = if i == p { x } else { self.word[i] };
            let c = if lead == 0 { self.a.letter(p - i) } else { self.b.letter(p - i) };
            if x == c {
                open.push(i);
            } else if (lead == 0) == (x > c) {
                // a 0-suffix above a, or a 1-suffix below b
                return None;
            }
        }
        let mut word = self.word.clone();
        word.push(x);
        Some(Walk { a: self.a, b: self.b, word, open })
    }

    fn extends(&self, k: usize) -> bool {
        k == 0 || (0..2).any(|x| self.push(x).is_some_and(|w| w.extends(k - 1)))
    }
}

fn slack(a: &EpWord, b: &EpWord) -> usize {
    4 * (a.pre().len() + a.per().len() + b.pre().len() + b.per().len()) + 8
}

fn count_below(w: &Walk, n: usize, slack: usize) -> u64 {
    if w.word.len() == n {
        return w.extends(slack) as u64;
    }
    (0..2).filter_map(|x| w.push(x)).map(|w| count_below(&w, n, slack)).sum()
}

fn check_bounds(a: &EpWord, b: &EpWord) -> Result<()> {
    if a.first() != 0 || b.first() != 1 {
        return Err(Error::Precondition(format!("need a starting with 0 and b with 1, got {a}, {b}")));
    }
    Ok(())
}

/// `A_n`: the number of length-`n` blocks occurring in `Ω_{a,b}`.
///
/// Every block is checked suffix by suffix against `a` and `b`, then must
/// extend by a fixed slack of further letters under the same test.
pub fn block_count(a: &EpWord, b: &EpWord, n: usize) -> Result<u64> {
    block_count_with(a, b, n, Execution::default())
}

pub fn block_count_with(a: &EpWord, b: &EpWord, n: usize, exec: Execution) -> Result<u64> {
    if n > MAX_BLOCK_LEN {
        return Err(Error::Guard(format!("block length {n} exceeds {MAX_BLOCK_LEN}")));
    }
    check_bounds(a, b)?;
    let k = slack(a, b);
    let mut shards = vec![Walk::new(a, b)];
    for _ in 0..SHARD_LEN.min(n) {
        shards = shards.iter().flat_map(|w| (0..2).filter_map(|x| w.push(x))).collect();
    }
    Ok(par::map(&shards, exec, |w| count_below(w, n, k)).into_iter().sum())
}

/// `A_1, ..., A_N` together with the indices where `A_n² < A_{n-1} A_{n+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockCountTable {
    /// `counts[n - 1] = A_n`.
    pub counts: Vec<u64>,
    pub log_convexity_violations: Vec<usize>,
}

impl BlockCountTable {
    pub fn compute(a: &EpWord, b: &EpWord, n_max: usize) -> Result<Self> {
        let counts = (1..=n_max).map(|n| block_count(a, b, n)).collect::<Result<Vec<_>>>()?;
        let log_convexity_violations = (2..n_max)
            .filter(|&n| {
                let (l, m, r) = (counts[n - 2] as u128, counts[n - 1] as u128, counts[n] as u128);
                m * m < l * r
            })
            .collect();
        Ok(BlockCountTable { counts, log_convexity_violations })
    }

    pub fn get(&self, n: usize) -> u64 {
        self.counts[n - 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GrowthClass {
    TrivialLike,
    SubexponentialLike,
    ExponentialLike,
}

/// Polynomial degree beyond which growth counts as exponential.
pub const DEGREE_CAP: f64 = 2.5;

/// Labels `A_n` growth from `A_{N-8}, A_{N-4}, A_N`.
///
/// `A_N = 2` is trivial. Otherwise the local degree
/// `d_n = ln(A_n / A_{n-4}) / ln(n / (n-4))` is read at `N` and `N - 4`:
/// polynomial growth keeps it bounded and non-increasing, while
/// exponential growth makes it climb roughly linearly in `n`.
pub fn brute_classify(a: &EpWord, b: &EpWord, n: usize) -> Result<GrowthClass> {
    if !(12..=MAX_CLASSIFY_LEN).contains(&n) {
        return Err(Error::Guard(format!("classification length {n} outside 12..={MAX_CLASSIFY_LEN}")));
    }
    let c = |m| block_count(a, b, m).map(|v| v as f64);
    let (lo, mid, hi) = (c(n - 8)?, c(n - 4)?, c(n)?);
    if hi == 2.0 {
        return Ok(GrowthClass::TrivialLike);
    }
    let degree = |x: f64, y: f64, m: usize| (y / x).ln() / (m as f64 / (m - 4) as f64).ln();
    let (d_mid, d_hi) = (degree(lo, mid, n - 4), degree(mid, hi, n));
    Ok(if d_hi <= DEGREE_CAP && d_hi <= d_mid + 0.25 {
        GrowthClass::SubexponentialLike
    } else {
        GrowthClass::ExponentialLike
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Membership {
    In,
    Out,
    Boundary,
}

fn rational(x: f64) -> BigRational {
    BigRational::from_f64(x).expect("finite base")
}

// π(i w) = (i + π(w)) / q_i, so π(w) for periodic w solves a linear equation.
fn pi_exact(q: &[BigRational; 2], u: &EpWord) -> BigRational {
    let step = |x: BigRational, d: u8| (BigRational::from_integer(BigInt::from(d)) + x) / &q[d as usize];
    // π(per^∞) = c + s π(per^∞), with the affine map built right to left
    let (mut c, mut s) = (BigRational::zero(), BigRational::one());
    for &d in u.per().iter().rev() {
        c = step(c, d);
        s /= &q[d as usize];
    }
    let tail = c / (BigRational::one() - s);
    u.pre().iter().rev().fold(tail, |x, &d| step(x, d))
}

/// Checks `π(σ^k u) ∉ [1/q1, 1/(q0(q1-1))]` for `k = 0..=n` with exact
/// rational arithmetic.
///
/// `Boundary` when no orbit point lies inside the hole by more than `tol`
/// but some point is within `tol` of an endpoint.
pub fn verify_membership(q0: f64, q1: f64, u: &EpWord, n: usize, tol: f64) -> Membership {
    assert!(q0 > 1.0 && q1 > 1.0, "bases must exceed 1");
    let q = [rational(q0), rational(q1)];
    let one = BigRational::one();
    let left = &one / &q[1];
    let right = &one / (&q[0] * (&q[1] - &one));
    let tol = rational(tol);
    let mut near = false;
    for k in 0..=n.min(u.pre().len() + u.per().len()) {
        let x = pi_exact(&q, &u.shift(k));
        let (dl, dr) = (&x - &left, &right - &x);
        if dl.abs() <= tol || dr.abs() <= tol {
            near = true;
        } else if dl.is_positive() && dr.is_positive() {
            return Membership::Out;
        }
    }
    if near {
        Membership::Boundary
    } else {
        Membership::In
    }
}
