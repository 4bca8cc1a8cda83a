//! Evaluation of π, π̃, f, f̃ and the bisection solvers for g, g̃ and μ.
//!
//! Words are evaluated through affine maps: reading the letter `i` maps a
//! value `y` to `(i + y) / q_i`, so a finite word is a composition of such
//! maps and a periodic tail is the fixed point of its period's map. Images
//! `σ(base)` are evaluated without expanding them, which keeps the cost linear
//! in the length of σ even though the image words grow exponentially.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub as OpSub};

use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::substitution::{DirectiveSequence, Limit, Sub, SymbolicWord, Tail};
use crate::word::EpWord;

/// Floating point type used by the numeric kernels.
pub trait Real:
    Copy
    + PartialOrd
    + fmt::Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + OpSub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn of(x: f64) -> Self;
    /// Largest f64 not above the value.
    fn down(self) -> f64;
    /// Smallest f64 not below the value.
    fn up(self) -> f64;
    /// Relative unit roundoff.
    fn eps() -> f64;

    fn abs(self) -> Self {
        if self < Self::of(0.0) {
            -self
        } else {
            self
        }
    }

    fn half(a: Self, b: Self) -> Self {
        a + (b - a) / Self::of(2.0)
    }
}

impl Real for f64 {
    fn of(x: f64) -> Self {
        x
    }
    fn down(self) -> f64 {
        self
    }
    fn up(self) -> f64 {
        self
    }
    fn eps() -> f64 {
        f64::EPSILON
    }
}

/// Double-double number. Wraps [`TwoFloat`] for its accurate sums and
/// products; division is done by long division because the crate's own
/// quotient keeps only double precision.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct DoubleDouble(pub TwoFloat);

impl DoubleDouble {
    pub fn hi(self) -> f64 {
        self.0.hi()
    }
    pub fn lo(self) -> f64 {
        self.0.lo()
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        DoubleDouble(self.0 + o.0)
    }
}

impl OpSub for DoubleDouble {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        DoubleDouble(self.0 - o.0)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        DoubleDouble(self.0 * o.0)
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let b = o.0;
        let q1 = self.0.hi() / b.hi();
        let r = self.0 - b * q1;
        let q2 = r.hi() / b.hi();
        let r = r - b * q2;
        let q3 = r.hi() / b.hi();
        DoubleDouble(TwoFloat::from(q1) + q2 + q3)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        DoubleDouble(-self.0)
    }
}

impl Real for DoubleDouble {
    fn of(x: f64) -> Self {
        DoubleDouble(TwoFloat::from(x))
    }
    fn down(self) -> f64 {
        if self.lo() < 0.0 {
            self.hi().next_down()
        } else {
            self.hi()
        }
    }
    fn up(self) -> f64 {
        if self.lo() > 0.0 {
            self.hi().next_up()
        } else {
            self.hi()
        }
    }
    fn eps() -> f64 {
        1e-31
    }
}

/// Working precision of the solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    /// Hardware doubles, about 16 significant digits.
    Double,
    /// Double-double arithmetic, about 31 significant digits.
    DoubleDouble,
}

impl Precision {
    pub fn from_digits(digits: u32) -> Precision {
        if digits <= 16 {
            Precision::Double
        } else {
            Precision::DoubleDouble
        }
    }
}

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_DEPTH: usize = 48;
pub const DEFAULT_PRECISION_DIGITS: u32 = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_depth: usize,
    pub precision: Precision,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: DEFAULT_TOL,
            max_depth: DEFAULT_MAX_DEPTH,
            precision: Precision::from_digits(DEFAULT_PRECISION_DIGITS),
        }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolveOptions { tol, ..Default::default() }
    }
}

/// A closed enclosure `[lo, hi]` of a real number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub tol: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64, tol: f64) -> Self {
        Bracket { lo, hi, tol }
    }

    pub fn point(x: f64) -> Self {
        Bracket { lo: x, hi: x, tol: 0.0 }
    }

    fn of<T: Real>(lo: T, hi: T, tol: f64) -> Self {
        Bracket { lo: lo.down(), hi: hi.up(), tol }
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Distance from `x` to the bracket (0 inside).
    pub fn distance(&self, x: f64) -> f64 {
        if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            0.0
        }
    }
}

impl fmt::Display for Bracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.17}, {:.17}]", self.lo, self.hi)
    }
}

/// Value of `g_u(q0)`: either the root bracket or the degenerate value 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GValue {
    Root(Bracket),
    /// `f_u(q0, 1) <= 0`, so `g_u(q0) = 1`.
    BelowOne,
}

impl GValue {
    pub fn bracket(&self) -> Bracket {
        match self {
            GValue::Root(b) => *b,
            GValue::BelowOne => Bracket::point(1.0),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Affine<T> {
    s: T,
    t: T,
}

impl<T: Real> Affine<T> {
    fn then(self, inner: Affine<T>) -> Affine<T> {
        // self ∘ inner
        Affine { s: self.s * inner.s, t: self.t + self.s * inner.t }
    }

    fn identity() -> Self {
        Affine { s: T::of(1.0), t: T::of(0.0) }
    }

    fn apply(self, y: T) -> T {
        self.t + self.s * y
    }

    fn fixed_point(self) -> T {
        self.t / (T::of(1.0) - self.s)
    }
}

/// The maps of `σ(0)` and `σ(1)` for the bases (q0, q1).
fn image_maps<T: Real>(q0: T, q1: T, sigma: &[Sub]) -> [Affine<T>; 2] {
    let one = T::of(1.0);
    let mut m = [
        Affine { s: one / q0, t: T::of(0.0) },
        Affine { s: one / q1, t: one / q1 },
    ];
    for s in sigma {
        let word_map = |c: u8| {
            s.image(c).iter().fold(Affine::identity(), |acc, &j| acc.then(m[j as usize]))
        };
        m = [word_map(0), word_map(1)];
    }
    m
}

fn word_map<T: Real>(m: &[Affine<T>; 2], w: &[u8]) -> Affine<T> {
    w.iter().fold(Affine::identity(), |acc, &c| acc.then(m[c as usize]))
}

/// `π_{q0,q1}(σ(base))` in working precision.
pub fn pi_sym<T: Real>(q0: T, q1: T, w: &SymbolicWord) -> T {
    let m = image_maps(q0, q1, &w.sigma);
    let tail = word_map(&m, w.base.per()).fixed_point();
    word_map(&m, w.base.pre()).apply(tail)
}

/// `π̃_{q0,q1}(σ(base)) = π_{q1,q0}` of the reflected word.
pub fn pi_tilde_sym<T: Real>(q0: T, q1: T, w: &SymbolicWord) -> T {
    pi_sym(q1, q0, &reflect_sym(w))
}

/// Reflection commutes with substitutions up to conjugation L ↔ R.
pub fn reflect_sym(w: &SymbolicWord) -> SymbolicWord {
    SymbolicWord::new(w.sigma.iter().map(|s| s.conjugate()).collect(), w.base.reflect())
}

/// π of a limit word, truncated once the remaining contribution is below
/// working precision; returns the value and an error bound.
pub fn pi_limit<T: Real>(q0: T, q1: T, limit: &Limit) -> (T, T) {
    match limit {
        Limit::Exact(w) => (pi_sym(q0, q1, w), T::of(0.0)),
        Limit::Primitive { directive, seed } => {
            let one = T::of(1.0);
            // π of any word lies in [0, 1/(q1-1)].
            let span = one / (q1 - one);
            let mut m = image_maps(q0, q1, &[]);
            for i in 0..100_000 {
                let s = directive.letter(i).expect("primitive directives are infinite");
                let word_map = |c: u8| {
                    s.image(c).iter().fold(Affine::identity(), |acc, &j| acc.then(m[j as usize]))
                };
                m = [word_map(0), word_map(1)];
                let a = m[*seed as usize];
                if a.s * span < T::of(T::eps() * 1e-3) * a.t.abs() || a.s < T::of(1e-300) {
                    break;
                }
            }
            let a = m[*seed as usize];
            (a.apply(span / T::of(2.0)), a.s * span / T::of(2.0))
        }
    }
}

pub fn pi(q0: f64, q1: f64, u: &EpWord) -> f64 {
    pi_sym(q0, q1, &SymbolicWord::exact(u.clone()))
}

pub fn pi_tilde(q0: f64, q1: f64, v: &EpWord) -> f64 {
    pi(q1, q0, &v.reflect())
}

/// `f_u(q0, q1) = q0 (q1 π(u) - 1)`.
pub fn f(u: &EpWord, q0: f64, q1: f64) -> f64 {
    q0 * (q1 * pi(q0, q1, u) - 1.0)
}

/// `f̃_v(q0, q1) = q1 (q0 π̃(v) - 1)`.
pub fn f_tilde(v: &EpWord, q0: f64, q1: f64) -> f64 {
    q1 * (q0 * pi_tilde(q0, q1, v) - 1.0)
}

fn f_sym<T: Real>(u: &SymbolicWord, q0: T, q1: T) -> T {
    q0 * (q1 * pi_sym(q0, q1, u) - T::of(1.0))
}

fn f_tilde_sym<T: Real>(v: &SymbolicWord, q0: T, q1: T) -> T {
    q1 * (q0 * pi_tilde_sym(q0, q1, v) - T::of(1.0))
}

/// Bisection for the root of a decreasing function on `[lo, hi]` with
/// `h(lo) > 0 >= h(hi)`.
fn bisect_decreasing<T: Real>(mut lo: T, mut hi: T, tol: T, h: impl Fn(T) -> T) -> (T, T) {
    let zero = T::of(0.0);
    for _ in 0..400 {
        if hi - lo <= tol {
            break;
        }
        let mid = T::half(lo, hi);
        if !(lo < mid && mid < hi) {
            break;
        }
        if h(mid) > zero {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Enclosure of `g_u(q0)` in working precision; `(1, 1)` encodes BelowOne.
pub(crate) fn g_raw<T: Real>(u: &SymbolicWord, q0: T, tol: T) -> (T, T) {
    let one = T::of(1.0);
    if f_sym(u, q0, one) <= T::of(0.0) {
        return (one, one);
    }
    let hi = q0 / (q0 - one);
    bisect_decreasing(one, hi, tol, |q1| f_sym(u, q0, q1))
}

/// Enclosure of `g̃_v(q0)` in working precision.
pub(crate) fn g_tilde_raw<T: Real>(v: &SymbolicWord, q0: T, tol: T) -> (T, T) {
    let one = T::of(1.0);
    let hi = q0 / (q0 - one);
    bisect_decreasing(one, hi, tol, |q1| f_tilde_sym(v, q0, q1))
}

fn check_q0(q0: f64) -> Result<()> {
    if q0.is_finite() && q0 > 1.0 {
        Ok(())
    } else {
        Err(Error::Precondition(format!("base must exceed 1, got {q0}")))
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Error::Precondition(format!("tolerance must be positive, got {tol}")))
    }
}

fn require_w(u: &EpWord) -> Result<()> {
    if u.in_w() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{u} is not in W (need sup0(u) = u, not eventually constant)")))
    }
}

fn require_w_tilde(v: &EpWord) -> Result<()> {
    if v.in_w_tilde() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{v} is not in W~ (need inf1(v) = v, not eventually constant)")))
    }
}

pub(crate) fn g_value<T: Real>(u: &SymbolicWord, q0: f64, tol: f64) -> GValue {
    let (lo, hi) = g_raw(u, T::of(q0), T::of(tol));
    if lo == T::of(1.0) && hi == T::of(1.0) {
        GValue::BelowOne
    } else {
        GValue::Root(Bracket::of(lo, hi, tol))
    }
}

pub(crate) fn g_tilde_value<T: Real>(v: &SymbolicWord, q0: f64, tol: f64) -> Bracket {
    let (lo, hi) = g_tilde_raw(v, T::of(q0), T::of(tol));
    Bracket::of(lo, hi, tol)
}

/// `g_u(q0)`: the root in `q1` of `f_u(q0, q1) = 0`.
pub fn g(u: &EpWord, q0: f64, tol: f64) -> Result<GValue> {
    g_with(u, q0, &SolveOptions::with_tol(tol))
}

pub fn g_with(u: &EpWord, q0: f64, opts: &SolveOptions) -> Result<GValue> {
    check_q0(q0)?;
    check_tol(opts.tol)?;
    require_w(u)?;
    let w = SymbolicWord::exact(u.clone());
    Ok(match opts.precision {
        Precision::Double => g_value::<f64>(&w, q0, opts.tol),
        Precision::DoubleDouble => g_value::<DoubleDouble>(&w, q0, opts.tol),
    })
}

/// `g̃_v(q0)`: the root in `q1` of `f̃_v(q0, q1) = 0`.
pub fn g_tilde(v: &EpWord, q0: f64, tol: f64) -> Result<Bracket> {
    g_tilde_with(v, q0, &SolveOptions::with_tol(tol))
}

pub fn g_tilde_with(v: &EpWord, q0: f64, opts: &SolveOptions) -> Result<Bracket> {
    check_q0(q0)?;
    check_tol(opts.tol)?;
    require_w_tilde(v)?;
    let w = SymbolicWord::exact(v.clone());
    Ok(match opts.precision {
        Precision::Double => g_tilde_value::<f64>(&w, q0, opts.tol),
        Precision::DoubleDouble => g_tilde_value::<DoubleDouble>(&w, q0, opts.tol),
    })
}

/// Sign of `g_u(x) - g̃_v(x)` from enclosures: `Some(true)` if positive,
/// `Some(false)` if negative, `None` if the enclosures overlap.
pub(crate) fn g_minus_gt_positive<T: Real>(
    u: &SymbolicWord,
    v: &SymbolicWord,
    x: T,
    tol: T,
) -> Option<bool> {
    let (gl, gh) = g_raw(u, x, tol);
    let (tl, th) = g_tilde_raw(v, x, tol);
    if gl > th {
        Some(true)
    } else if gh < tl {
        Some(false)
    } else {
        None
    }
}

fn mu_raw<T: Real>(u: &SymbolicWord, v: &SymbolicWord, tol: f64) -> Result<Bracket> {
    let inner = T::of((tol * 1e-4).max(T::eps() * 16.0));
    let sign = |x: f64| g_minus_gt_positive(u, v, T::of(x), inner);
    // Left end: g_u blows up as x -> 1 while g̃_v stays bounded.
    let mut lo = 1.5;
    let mut steps = 0;
    while sign(lo) != Some(true) {
        lo = 1.0 + (lo - 1.0) / 2.0;
        steps += 1;
        if steps > 60 {
            return Err(Error::NoSignChange(format!("g_{u} - g~_{v} is not positive near 1")));
        }
    }
    // Right end: beyond q_u the function g_u is identically 1 < g̃_v.
    let mut hi = 2.0;
    steps = 0;
    while sign(hi) != Some(false) {
        hi = 1.0 + (hi - 1.0) * 2.0;
        steps += 1;
        if steps > 60 {
            return Err(Error::NoSignChange(format!("g_{u} - g~_{v} is not negative for large q0")));
        }
    }
    if hi < lo {
        return Err(Error::NoSignChange(format!("sign pattern of g_{u} - g~_{v} is not single-crossing")));
    }
    let (mut lo, mut hi) = (T::of(lo), T::of(hi));
    while hi - lo > T::of(tol) {
        let mid = T::half(lo, hi);
        if !(lo < mid && mid < hi) {
            break;
        }
        match g_minus_gt_positive(u, v, mid, inner) {
            Some(true) => lo = mid,
            Some(false) => hi = mid,
            None => {
                // Enclosures overlap: the root is within the resolution of
                // the inner solves. Shrink from both sides around mid.
                let d = T::of(tol / 4.0);
                match (g_minus_gt_positive(u, v, mid - d, inner), g_minus_gt_positive(u, v, mid + d, inner)) {
                    (Some(true), Some(false)) => {
                        lo = mid - d;
                        hi = mid + d;
                    }
                    _ => break,
                }
            }
        }
    }
    Ok(Bracket::of(lo, hi, tol))
}

pub(crate) fn mu_sym(u: &SymbolicWord, v: &SymbolicWord, opts: &SolveOptions) -> Result<Bracket> {
    match opts.precision {
        Precision::Double => mu_raw::<f64>(u, v, opts.tol),
        Precision::DoubleDouble => mu_raw::<DoubleDouble>(u, v, opts.tol),
    }
}

fn desubstitute(s: Sub, u: &EpWord) -> Option<EpWord> {
    // Parse u as a concatenation of images s(0), s(1); for eventually
    // periodic words the parse becomes periodic once the phase in the period repeats.
    let n = u.pre().len() + 4 * u.per().len() + 8;
    let letters = u.prefix(n + 4 * u.per().len() + 8);
    let mut out = Vec::new();
    let mut pos = 0usize;
    let mut seen: Vec<(usize, usize)> = Vec::new();
    loop {
        if pos >= u.pre().len() {
            let phase = (pos - u.pre().len()) % u.per().len();
            if let Some(&(p0, k0)) = seen.iter().find(|&&(p, _)| (p - u.pre().len()) % u.per().len() == phase)
            {
                if pos > p0 {
                    let pre = out[..k0].to_vec();
                    let per = out[k0..].to_vec();
                    return EpWord::new(pre, per).ok();
                }
            }
            seen.push((pos, out.len()));
        }
        if pos + 2 > letters.len() {
            return None;
        }
        let c = if letters[pos..].starts_with(s.image(0)) && !letters[pos..].starts_with(s.image(1)) {
            0
        } else if letters[pos..].starts_with(s.image(1)) && !letters[pos..].starts_with(s.image(0)) {
            1
        } else {
            return None;
        };
        out.push(c);
        pos += s.image(c).len();
    }
}

/// Checks that u and v are both images of a common node `σM` with σ in {L,R}*.
pub fn common_node(u: &EpWord, v: &EpWord) -> Option<Vec<Sub>> {
    let mut sigma = Vec::new();
    let (mut u, mut v) = (u.clone(), v.clone());
    for _ in 0..64 {
        if desubstitute(Sub::M, &u).is_some() && desubstitute(Sub::M, &v).is_some() {
            return Some(sigma);
        }
        let mut next = None;
        for s in [Sub::L, Sub::R] {
            if let (Some(a), Some(b)) = (desubstitute(s, &u), desubstitute(s, &v)) {
                next = Some((s, a, b));
                break;
            }
        }
        let (s, a, b) = next?;
        if a == u && b == v {
            return None;
        }
        sigma.push(s);
        u = a;
        v = b;
    }
    None
}

/// `μ_{u,v}`: the unique `q0 > 1` with `g_u(q0) = g̃_v(q0)`.
pub fn mu(u: &EpWord, v: &EpWord, tol: f64) -> Result<Bracket> {
    mu_with(u, v, &SolveOptions::with_tol(tol))
}

pub fn mu_with(u: &EpWord, v: &EpWord, opts: &SolveOptions) -> Result<Bracket> {
    check_tol(opts.tol)?;
    require_w(u)?;
    require_w_tilde(v)?;
    if common_node(u, v).is_none() {
        return Err(Error::Precondition(format!(
            "{u} and {v} are not images of a common node σM with σ in {{L,R}}*"
        )));
    }
    mu_sym(&SymbolicWord::exact(u.clone()), &SymbolicWord::exact(v.clone()), opts)
}

/// `μ_{𝛔(0̄), 𝛔(1̄)}` for a primitive directive sequence. The limit words
/// are replaced by long images `σ1...σn(0̄)`, `σ1...σn(1̄)`, whose values agree
/// with the limit to working precision.
pub fn mu_limit(d: &DirectiveSequence, opts: &SolveOptions) -> Result<Bracket> {
    if !matches!(d.tail(), Tail::Periodic(_)) {
        return Err(Error::Precondition(format!("{d} is not primitive")));
    }
    let n = d.head().len() + 12 * (1 + opts.max_depth.min(64));
    let sigma = d.prefix(n);
    let u = SymbolicWord::new(sigma.clone(), EpWord::constant(0));
    let v = SymbolicWord::new(sigma, EpWord::constant(1));
    mu_sym(&u, &v, opts)
}

/// Affine identification of the digit system {(d0, q0), (d1, q1)} with the
/// system {(0, q0), (1, q1)}: value = offset + scale · π_{q0,q1}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reduction {
    pub offset: f64,
    pub scale: f64,
}

pub fn reduce_system(d0: f64, q0: f64, d1: f64, q1: f64) -> Result<Reduction> {
    check_q0(q0)?;
    check_q0(q1)?;
    let offset = d0 / (q0 - 1.0);
    let scale = d1 - d0 * (q1 - 1.0) / (q0 - 1.0);
    if scale == 0.0 {
        return Err(Error::Degenerate);
    }
    Ok(Reduction { offset, scale })
}
