//! Quasi-greedy and quasi-lazy expansions, and the cardinality classifiers
//! for `Ω_{a,b}`, `Σ_{a,b}` and `U_{q0,q1}`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

use crate::critical::{generalized_golden_ratio_with, komornik_loreti_with, CriticalCase};
use crate::error::{Error, Result};
use crate::eval::SolveOptions;
use crate::substitution::{s_map, s_map_stream_default, DirectiveSequence, SMap, Sub, Tail};
use crate::word::{EpWord, WordStream};

/// Digits of an expansion with a per-digit boundary flag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitRun {
    pub digits: Vec<u8>,
    /// `boundary[k]` is set when step `k` was within tolerance of the switch point.
    pub boundary: Vec<bool>,
}

impl DigitRun {
    pub fn first_boundary(&self) -> Option<usize> {
        self.boundary.iter().position(|&b| b)
    }

    /// Digits before the first flagged one.
    pub fn certain_prefix(&self) -> &[u8] {
        &self.digits[..self.first_boundary().unwrap_or(self.digits.len())]
    }

    fn reflect(mut self) -> Self {
        for d in &mut self.digits {
            *d = 1 - *d;
        }
        self
    }
}

impl fmt::Display for DigitRun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (d, b) in self.digits.iter().zip(&self.boundary) {
            write!(f, "{d}")?;
            if *b {
                write!(f, "?")?;
            }
        }
        Ok(())
    }
}

fn rat(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::Precondition(format!("not a finite number: {x}")))
}

fn check_regular(q0: f64, q1: f64) -> Result<()> {
    if !(q0 > 1.0 && q1 > 1.0 && q0.is_finite() && q1.is_finite()) {
        return Err(Error::Precondition(format!("bases must exceed 1, got ({q0}, {q1})")));
    }
    if q0 + q1 < q0 * q1 {
        return Err(Error::Precondition(format!("({q0}, {q1}) is not regular: q0 + q1 < q0 q1")));
    }
    Ok(())
}

fn greedy_exact(q0: &BigRational, q1: &BigRational, mut x: BigRational, n: usize, tol: &BigRational) -> DigitRun {
    let one = BigRational::one();
    let mut digits = Vec::with_capacity(n);
    let mut boundary = Vec::with_capacity(n);
    for _ in 0..n {
        let t = q1 * &x - &one;
        boundary.push(t.abs() <= *tol);
        if t.is_positive() {
            digits.push(1);
            x = t;
        } else {
            digits.push(0);
            x = q0 * &x;
        }
        // keep the rationals from growing without bound; 256 bits is far
        // below the flagging tolerance
        if x.denom().bits() > 4096 {
            let scale = BigInt::one() << 256u32;
            x = BigRational::new((x * BigRational::from_integer(scale.clone())).floor().to_integer(), scale);
        }
    }
    DigitRun { digits, boundary }
}

fn attractor_check(q1: f64, x: &BigRational, q1r: &BigRational) -> Result<()> {
    let top = BigRational::one() / (q1r - BigRational::one());
    if x.is_negative() || *x > top {
        return Err(Error::Precondition(format!(
            "x = {} is outside [0, 1/(q1-1)] = [0, {}]",
            x.to_f64().unwrap_or(f64::NAN),
            1.0 / (q1 - 1.0)
        )));
    }
    Ok(())
}

/// First `n` digits of the quasi-greedy `(q0, q1)`-expansion of `x`.
pub fn quasi_greedy(q0: f64, q1: f64, x: f64, n: usize, tol: f64) -> Result<DigitRun> {
    check_regular(q0, q1)?;
    let (q0r, q1r, xr) = (rat(q0)?, rat(q1)?, rat(x)?);
    attractor_check(q1, &xr, &q1r)?;
    Ok(greedy_exact(&q0r, &q1r, xr, n, &rat(tol)?))
}

/// First `n` digits of the quasi-lazy `(q0, q1)`-expansion of `x`.
pub fn quasi_lazy(q0: f64, q1: f64, x: f64, n: usize, tol: f64) -> Result<DigitRun> {
    check_regular(q0, q1)?;
    let (q0r, q1r, xr) = (rat(q0)?, rat(q1)?, rat(x)?);
    attractor_check(q1, &xr, &q1r)?;
    Ok(lazy_exact(&q0r, &q1r, xr, n, &rat(tol)?))
}

fn lazy_exact(q0: &BigRational, q1: &BigRational, x: BigRational, n: usize, tol: &BigRational) -> DigitRun {
    let one = BigRational::one();
    let mirrored = (&one - (q1 - &one) * x) / (q0 - &one);
    greedy_exact(q1, q0, mirrored, n, tol).reflect()
}

/// Prefix of `a_{q0,q1}`, the quasi-greedy expansion of `1/q1`.
pub fn expansion_a(q0: f64, q1: f64, n: usize, tol: f64) -> Result<DigitRun> {
    check_regular(q0, q1)?;
    let (q0r, q1r) = (rat(q0)?, rat(q1)?);
    let x = BigRational::one() / &q1r;
    let mut run = greedy_exact(&q0r, &q1r, x, n, &rat(tol)?);
    // the first digit sits on the switch point by definition and is always 0
    if let Some(b) = run.boundary.first_mut() {
        *b = false;
    }
    Ok(run)
}

/// Prefix of `b_{q0,q1}`, the quasi-lazy expansion of `1/(q0(q1-1))`.
pub fn expansion_b(q0: f64, q1: f64, n: usize, tol: f64) -> Result<DigitRun> {
    check_regular(q0, q1)?;
    let (q0r, q1r) = (rat(q0)?, rat(q1)?);
    let x = BigRational::one() / (&q0r * (&q1r - BigRational::one()));
    let mut run = lazy_exact(&q0r, &q1r, x, n, &rat(tol)?);
    if let Some(b) = run.boundary.first_mut() {
        *b = false;
    }
    Ok(run)
}

/// Cardinality class of `Ω_{a,b}` or `U_{q0,q1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    Trivial,
    CountableNontrivial,
    UncountableZeroEntropy,
    PositiveEntropy,
    Undecided(usize),
}

impl Classification {
    /// Position in the order Trivial < CountableNontrivial < uncountable.
    pub fn rank(self) -> Option<u8> {
        match self {
            Classification::Trivial => Some(0),
            Classification::CountableNontrivial => Some(1),
            Classification::UncountableZeroEntropy | Classification::PositiveEntropy => Some(2),
            Classification::Undecided(_) => None,
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::Undecided(d) => write!(f, "Undecided({d})"),
            other => write!(f, "{other:?}"),
        }
    }
}

/// Cardinality class of `Σ_{a,b}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SigmaClass {
    Empty,
    Countable,
    UncountableZeroEntropy,
    PositiveEntropy,
    Undecided(usize),
}

impl fmt::Display for SigmaClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SigmaClass::Undecided(d) => write!(f, "Undecided({d})"),
            other => write!(f, "{other:?}"),
        }
    }
}

/// A bound `a` or `b` of `Ω_{a,b}`.
#[derive(Debug, Clone)]
pub enum Bound {
    Word(EpWord),
    /// The limit word `𝛔(seed^∞)`.
    Limit { directive: DirectiveSequence, seed: u8 },
    Stream(WordStream),
}

impl From<EpWord> for Bound {
    fn from(w: EpWord) -> Self {
        Bound::Word(w)
    }
}

impl Bound {
    fn first(&self) -> Option<u8> {
        match self {
            Bound::Word(w) => Some(w.first()),
            Bound::Limit { seed, .. } => Some(*seed),
            Bound::Stream(s) => s.prefix(1).first().copied(),
        }
    }

    fn s_map(&self, max_depth: usize) -> SMap {
        match self {
            Bound::Word(w) => s_map(w, max_depth),
            Bound::Stream(s) => s_map_stream_default(s, max_depth),
            Bound::Limit { directive, seed } => {
                let d = match directive.tail() {
                    Tail::Finite => {
                        let tail = if *seed == 0 { Tail::RepeatL } else { Tail::RepeatR };
                        DirectiveSequence::new(directive.head().to_vec(), tail).expect("constant tail")
                    }
                    _ => directive.clone(),
                };
                SMap { directive: d.normalized_for_seed(*seed), truncated: false }
            }
        }
    }
}

fn letter(s: &SMap, i: usize) -> Option<Sub> {
    if s.truncated && i >= s.directive.head().len() {
        None
    } else {
        s.directive.letter(i)
    }
}

fn block_len(d: &DirectiveSequence) -> usize {
    match d.tail() {
        Tail::Periodic(b) => b.len(),
        _ => 1,
    }
}

/// Classifies `Ω_{a,b}` from the s-map images of `a` and `b`.
pub fn classify_omega(a: &Bound, b: &Bound, max_depth: usize) -> Result<Classification> {
    if a.first() != Some(0) {
        return Err(Error::Precondition("a must start with 0".into()));
    }
    if b.first() != Some(1) {
        return Err(Error::Precondition("b must start with 1".into()));
    }
    let sa = a.s_map(max_depth);
    let sb = b.s_map(max_depth);
    Ok(compare_directives(&sa, &sb, max_depth))
}

/// Convenience wrapper for eventually periodic bounds.
pub fn classify_omega_words(a: &EpWord, b: &EpWord, max_depth: usize) -> Result<Classification> {
    classify_omega(&Bound::Word(a.clone()), &Bound::Word(b.clone()), max_depth)
}

fn compare_directives(sa: &SMap, sb: &SMap, max_depth: usize) -> Classification {
    use Classification::*;
    let exact = !sa.truncated && !sb.truncated;
    if exact && sa.directive == sb.directive {
        return match sa.directive.is_primitive() {
            Some(true) => UncountableZeroEntropy,
            _ => CountableNontrivial,
        };
    }
    let bound = if exact {
        let (da, db) = (&sa.directive, &sb.directive);
        da.head().len().max(db.head().len()) + block_len(da) * block_len(db) + 2
    } else {
        usize::MAX
    };
    // Trivial needs the first difference after a common prefix in {L,R}*.
    let mut lr_prefix = true;
    for i in 0..bound {
        let (x, y) = match (letter(sa, i), letter(sb, i)) {
            (Some(x), Some(y)) => (x, y),
            _ => return Undecided(max_depth),
        };
        if x == y {
            if x == Sub::M {
                lr_prefix = false;
            }
            continue;
        }
        return if x > y {
            PositiveEntropy
        } else if lr_prefix {
            Trivial
        } else {
            CountableNontrivial
        };
    }
    CountableNontrivial
}

/// Classifies `Σ_{a,b}` through `Ω_{0b, 1a}`.
pub fn classify_sigma(a: &EpWord, b: &EpWord, max_depth: usize) -> Result<SigmaClass> {
    let zb = b.prepend(&[0]);
    let oa = a.prepend(&[1]);
    Ok(match classify_omega_words(&zb, &oa, max_depth)? {
        Classification::Trivial => SigmaClass::Empty,
        Classification::CountableNontrivial => SigmaClass::Countable,
        Classification::UncountableZeroEntropy => SigmaClass::UncountableZeroEntropy,
        Classification::PositiveEntropy => SigmaClass::PositiveEntropy,
        Classification::Undecided(d) => SigmaClass::Undecided(d),
    })
}

/// Classifies `U_{q0,q1}` by locating `q1` relative to `𝒢(q0)` and `𝒦(q0)`.
pub fn classify_univoque(q0: f64, q1: f64, tol: f64, max_depth: usize) -> Result<Classification> {
    let opts = SolveOptions { tol, max_depth, ..Default::default() };
    classify_univoque_with(q0, q1, &opts)
}

pub fn classify_univoque_with(q0: f64, q1: f64, opts: &SolveOptions) -> Result<Classification> {
    if !(q0 > 1.0 && q1 > 1.0 && q0.is_finite() && q1.is_finite()) {
        return Err(Error::Precondition(format!("bases must exceed 1, got ({q0}, {q1})")));
    }
    if q0 + q1 < q0 * q1 {
        return Ok(Classification::PositiveEntropy);
    }
    let tol = opts.tol;
    let g = generalized_golden_ratio_with(q0, opts)?;
    if q1 < g.value.lo - tol {
        return Ok(Classification::Trivial);
    }
    let formula = |c: CriticalCase| matches!(c, CriticalCase::LeftFormula | CriticalCase::RightFormula);
    if q1 <= g.value.hi + tol {
        // U_{q0,𝒢(q0)} is trivial unless q0 is a Sturmian μ point.
        return Ok(if formula(g.case) { Classification::Trivial } else { Classification::Undecided(opts.max_depth) });
    }
    let k = komornik_loreti_with(q0, opts)?;
    if q1 < k.value.lo - tol {
        return Ok(Classification::CountableNontrivial);
    }
    if q1 > k.value.hi + tol {
        return Ok(Classification::PositiveEntropy);
    }
    if !formula(k.case) {
        return Ok(Classification::Undecided(opts.max_depth));
    }
    let coincide = (k.value.mid() - g.value.mid()).abs() <= tol + k.value.width() + g.value.width();
    Ok(if coincide { Classification::Trivial } else { Classification::CountableNontrivial })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> EpWord {
        EpWord::parse(s).unwrap()
    }

    fn digits(s: &str) -> Vec<u8> {
        s.bytes().map(|c| c - b'0').collect()
    }

    #[test]
    fn quasi_greedy_examples() {
        let r = quasi_greedy(2.0, 1.5, 1.0 / 1.5, 8, 1e-12).unwrap();
        assert_eq!(r.digits, digits("01101010"));
        assert_eq!(quasi_greedy(2.0, 2.0, 0.5, 5, 1e-12).unwrap().digits, digits("01111"));
        assert_eq!(quasi_greedy(1.5, 2.0, 0.5, 6, 1e-12).unwrap().digits, digits("010101"));
    }

    #[test]
    fn quasi_lazy_examples() {
        let b = |q0: f64, q1: f64, n| expansion_b(q0, q1, n, 1e-12).unwrap().digits;
        assert_eq!(b(2.0, 1.5, 6), digits("101010"));
        assert_eq!(b(1.5, 2.0, 6), digits("100101"));
        assert_eq!(b(2.0, 2.0, 4), digits("1000"));
        assert_eq!(quasi_lazy(2.0, 2.0, 0.5, 4, 1e-12).unwrap().digits, digits("1000"));
    }

    #[test]
    fn expansion_errors() {
        assert!(quasi_greedy(2.0, 2.0, 1.5, 4, 1e-12).is_err());
        assert!(quasi_greedy(3.0, 3.0, 0.1, 4, 1e-12).is_err());
        assert!(quasi_greedy(0.5, 3.0, 0.1, 4, 1e-12).is_err());
    }

    #[test]
    fn boundary_flags() {
        // x = 1/q1 exactly: the switch point
        let r = quasi_greedy(2.0, 2.0, 0.5, 3, 1e-12).unwrap();
        assert_eq!(r.first_boundary(), Some(0));
        assert_eq!(expansion_a(2.0, 2.0, 6, 1e-12).unwrap().first_boundary(), None);
        assert_eq!(format!("{r}"), "0?11");
    }

    #[test]
    fn omega_examples() {
        let c = |a: &str, b: &str| classify_omega_words(&w(a), &w(b), 48).unwrap();
        assert_eq!(c("01(0)", "1(0)"), Classification::CountableNontrivial);
        assert_eq!(c("(0)", "(10)"), Classification::Trivial);
        assert_eq!(c("0(1)", "(10)"), Classification::PositiveEntropy);
        assert_eq!(c("(01)", "(10)"), Classification::CountableNontrivial);
        assert_eq!(c("(01)", "1(0)"), Classification::PositiveEntropy);
        assert_eq!(c("0(1)", "1(0)"), Classification::PositiveEntropy);
        assert!(classify_omega_words(&w("(10)"), &w("(10)"), 48).is_err());
    }

    #[test]
    fn omega_on_limit_words() {
        let tm = DirectiveSequence::parse("(M)").unwrap();
        let a = Bound::Limit { directive: tm.clone(), seed: 0 };
        let b = Bound::Limit { directive: tm.clone(), seed: 1 };
        assert_eq!(classify_omega(&a, &b, 48).unwrap(), Classification::UncountableZeroEntropy);
        let fib = DirectiveSequence::parse("(LR)").unwrap();
        let a = Bound::Limit { directive: fib.clone(), seed: 0 };
        let b = Bound::Limit { directive: fib, seed: 1 };
        assert_eq!(classify_omega(&a, &b, 48).unwrap(), Classification::UncountableZeroEntropy);
        // streams without exact structure stay undecided at the depth limit
        let sa = Bound::Stream(tm.limit(0).stream());
        let sb = Bound::Stream(tm.limit(1).stream());
        assert_eq!(classify_omega(&sa, &sb, 12).unwrap(), Classification::Undecided(12));
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(classify_sigma(&w("(01)"), &w("(10)"), 48).unwrap(), SigmaClass::Countable);
        assert_eq!(classify_sigma(&w("1(0)"), &w("0(1)"), 48).unwrap(), SigmaClass::Empty);
        assert_eq!(classify_sigma(&w("(0)"), &w("(1)"), 48).unwrap(), SigmaClass::PositiveEntropy);
    }

    #[test]
    fn univoque_diagonal() {
        let c = |q: f64| classify_univoque(q, q, 1e-10, 48).unwrap();
        assert_eq!(c(1.6), Classification::Trivial);
        assert_eq!(c(1.7), Classification::CountableNontrivial);
        assert_eq!(c(2.0), Classification::PositiveEntropy);
        assert_eq!(classify_univoque(1.5, 3.5, 1e-10, 48).unwrap(), Classification::PositiveEntropy);
    }

    fn arb_a() -> impl Strategy<Value = EpWord> {
        (proptest::collection::vec(0u8..2, 0..=4), proptest::collection::vec(0u8..2, 1..=4))
            .prop_map(|(mut p, q)| {
                p.insert(0, 0);
                EpWord::new(p, q).unwrap()
            })
    }

    fn arb_b() -> impl Strategy<Value = EpWord> {
        arb_a().prop_map(|a| a.reflect())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn a_and_b_prefixes(q1 in 1.05f64..1.95, t in 0.0f64..1.0) {
            // q0 anywhere in the regular range
            let q0 = 1.05 + t * (q1 / (q1 - 1.0) - 1.1);
            let a = expansion_a(q0, q1, 8, 1e-12).unwrap();
            let b = expansion_b(q0, q1, 8, 1e-12).unwrap();
            prop_assert_eq!(&a.digits[..2], &[0, 1]);
            prop_assert_eq!(&b.digits[..2], &[1, 0]);
        }

        #[test]
        fn expansions_monotone_in_q1(q1 in 1.2f64..2.2, d in 0.001f64..0.05) {
            let q0 = 1.8;
            let q1b = q1 + d;
            prop_assume!(q0 + q1b >= q0 * q1b);
            let a1 = expansion_a(q0, q1, 64, 1e-12).unwrap();
            let a2 = expansion_a(q0, q1b, 64, 1e-12).unwrap();
            prop_assume!(a1.first_boundary().is_none() && a2.first_boundary().is_none());
            prop_assert!(a2.digits >= a1.digits);
            let b1 = expansion_b(q0, q1, 64, 1e-12).unwrap();
            let b2 = expansion_b(q0, q1b, 64, 1e-12).unwrap();
            prop_assume!(b1.first_boundary().is_none() && b2.first_boundary().is_none());
            prop_assert!(b2.digits <= b1.digits);
        }

        #[test]
        fn omega_monotone(a in arb_a(), a2 in arb_a(), b in arb_b(), b2 in arb_b()) {
            // enlarging a and shrinking b never lowers the label
            let (lo_a, hi_a) = if a <= a2 { (a, a2) } else { (a2, a) };
            let (lo_b, hi_b) = if b <= b2 { (b, b2) } else { (b2, b) };
            let small = classify_omega_words(&lo_a, &hi_b, 48).unwrap().rank();
            let large = classify_omega_words(&hi_a, &lo_b, 48).unwrap().rank();
            if let (Some(s), Some(l)) = (small, large) {
                prop_assert!(s <= l);
            }
        }
    }
}
