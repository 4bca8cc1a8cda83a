//! The substitutions L, M, R, their limit words, the node boundary words of
//! the directive tree and the s-map.
//!
//! A finite directive `σ = σ1 σ2 ... σk` acts as the composition
//! `σ1 ∘ σ2 ∘ ... ∘ σk`, so `σk` is applied first.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::word::{EpWord, StreamOrdering, WordStream, DEFAULT_STREAM_DEPTH};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sub {
    L,
    M,
    R,
}

impl Sub {
    pub fn image(self, c: u8) -> &'static [u8] {
        match (self, c) {
            (Sub::L, 0) => &[0],
            (Sub::L, _) => &[1, 0],
            (Sub::M, 0) => &[0, 1],
            (Sub::M, _) => &[1, 0],
            (Sub::R, 0) => &[0, 1],
            (Sub::R, _) => &[1],
        }
    }

    /// Conjugation by the letter exchange 0 ↔ 1.
    pub fn conjugate(self) -> Sub {
        match self {
            Sub::L => Sub::R,
            Sub::M => Sub::M,
            Sub::R => Sub::L,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Sub::L => 'L',
            Sub::M => 'M',
            Sub::R => 'R',
        }
    }

    pub fn from_char(c: char) -> Result<Sub> {
        match c {
            'L' => Ok(Sub::L),
            'M' => Ok(Sub::M),
            'R' => Ok(Sub::R),
            _ => Err(Error::Parse(format!("bad directive letter {c:?}"))),
        }
    }
}

pub fn subs_to_string(s: &[Sub]) -> String {
    s.iter().map(|x| x.as_char()).collect()
}

pub fn parse_subs(s: &str) -> Result<Vec<Sub>> {
    s.chars().map(Sub::from_char).collect()
}

/// `σ(w)` for a finite binary word.
pub fn apply_letters(sigma: &[Sub], w: &[u8]) -> Vec<u8> {
    let mut cur = w.to_vec();
    for s in sigma.iter().rev() {
        cur = cur.iter().flat_map(|&c| s.image(c).iter().copied()).collect();
    }
    cur
}

/// First `n` letters of `σ(x)`, where `src(m)` yields the first `m` letters of `x`.
/// Every image is nonempty, so `n` letters of the argument always suffice.
pub fn image_prefix(sigma: &[Sub], src: impl FnOnce(usize) -> Vec<u8>, n: usize) -> Vec<u8> {
    let mut cur = src(n);
    cur.truncate(n);
    for s in sigma.iter().rev() {
        let mut next = Vec::with_capacity(n);
        for &c in &cur {
            if next.len() >= n {
                break;
            }
            next.extend_from_slice(s.image(c));
        }
        next.truncate(n);
        cur = next;
    }
    cur
}

/// Exact image `σ(u)` of an eventually periodic word. The result has length
/// growing exponentially with the number of M letters; use [`SymbolicWord`]
/// when σ is long.
pub fn apply(sigma: &[Sub], u: &EpWord) -> EpWord {
    EpWord::new(apply_letters(sigma, u.pre()), apply_letters(sigma, u.per()))
        .expect("images of nonempty periods are nonempty")
}

/// Numbers of 0s and 1s in `σ(c)`, saturating.
pub fn letter_counts(sigma: &[Sub], c: u8) -> [u128; 2] {
    // counts[j][i] = |τ(j)|_i for the prefix τ of σ processed so far.
    let mut counts = [[1u128, 0], [0, 1]];
    for s in sigma {
        let mut next = [[0u128; 2]; 2];
        for (j, row) in next.iter_mut().enumerate() {
            for &d in s.image(j as u8) {
                row[0] = row[0].saturating_add(counts[d as usize][0]);
                row[1] = row[1].saturating_add(counts[d as usize][1]);
            }
        }
        counts = next;
    }
    counts[c as usize]
}

/// Letter counts of `σ(w)` for a finite word `w`.
pub fn word_counts(sigma: &[Sub], w: &[u8]) -> [u128; 2] {
    let c0 = letter_counts(sigma, 0);
    let c1 = letter_counts(sigma, 1);
    let mut out = [0u128; 2];
    for &c in w {
        let c = if c == 0 { c0 } else { c1 };
        out[0] = out[0].saturating_add(c[0]);
        out[1] = out[1].saturating_add(c[1]);
    }
    out
}

fn image_len(sigma: &[Sub], w: &[u8]) -> u128 {
    let c = word_counts(sigma, w);
    c[0].saturating_add(c[1])
}

/// The word `σ(base)` kept unexpanded.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SymbolicWord {
    pub sigma: Vec<Sub>,
    pub base: EpWord,
}

impl SymbolicWord {
    pub fn new(sigma: Vec<Sub>, base: EpWord) -> Self {
        SymbolicWord { sigma, base }
    }

    pub fn exact(base: EpWord) -> Self {
        SymbolicWord { sigma: Vec::new(), base }
    }

    pub fn prefix(&self, n: usize) -> Vec<u8> {
        image_prefix(&self.sigma, |m| self.base.prefix(m), n)
    }

    pub fn first(&self) -> u8 {
        self.base.first()
    }

    /// The expanded word; exponential in the number of M letters of σ.
    pub fn materialize(&self) -> EpWord {
        apply(&self.sigma, &self.base)
    }

    /// Lengths of the image preperiod and period (not necessarily minimal).
    pub fn structure_lengths(&self) -> (u128, u128) {
        (image_len(&self.sigma, self.base.pre()), image_len(&self.sigma, self.base.per()))
    }

    /// Exact lexicographic comparison with an eventually periodic word.
    pub fn compare_ep(&self, u: &EpWord) -> Ordering {
        let (p, q) = self.structure_lengths();
        let bound = p
            .max(u.pre().len() as u128)
            .saturating_add(q)
            .saturating_add(u.per().len() as u128);
        self.compare_with(|n| u.prefix(n), bound).unwrap_or(Ordering::Equal)
    }

    /// Compares against a stream up to `depth` letters.
    pub fn compare_stream(&self, u: &WordStream, depth: usize) -> StreamOrdering {
        if let Some(w) = u.exact() {
            return self.compare_ep(w).reverse().into();
        }
        let a = u.prefix(depth);
        match self.compare_with(|n| a[..n.min(a.len())].to_vec(), a.len() as u128) {
            Some(o) => o.reverse().into(),
            None => StreamOrdering::Undecided(a.len()),
        }
    }

    // Ordering of self against the other word, or None if they agree on `bound` letters.
    fn compare_with(&self, other: impl Fn(usize) -> Vec<u8>, bound: u128) -> Option<Ordering> {
        let mut checked = 0usize;
        let mut n = 64usize;
        loop {
            let m = (n as u128).min(bound) as usize;
            let a = self.prefix(m);
            let b = other(m);
            let upto = m.min(b.len());
            for i in checked..upto {
                if a[i] != b[i] {
                    return Some(a[i].cmp(&b[i]));
                }
            }
            if upto as u128 >= bound || upto < m {
                return None;
            }
            checked = upto;
            n = n.saturating_mul(2);
        }
    }
}

impl fmt::Display for SymbolicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sigma.is_empty() {
            write!(f, "{}", self.base)
        } else {
            write!(f, "{}[{}]", subs_to_string(&self.sigma), self.base)
        }
    }
}

impl fmt::Debug for SymbolicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Tail {
    Finite,
    RepeatL,
    RepeatR,
    Periodic(Vec<Sub>),
}

/// A finite or infinite word over {L, M, R}: `head` followed by `tail`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DirectiveSequence {
    head: Vec<Sub>,
    tail: Tail,
}

impl DirectiveSequence {
    pub fn new(head: Vec<Sub>, tail: Tail) -> Result<Self> {
        if let Tail::Periodic(b) = &tail {
            if b.is_empty() {
                return Err(Error::Parse("empty periodic directive block".into()));
            }
        }
        Ok(Self::canonical(head, tail))
    }

    pub fn finite(head: Vec<Sub>) -> Self {
        DirectiveSequence { head, tail: Tail::Finite }
    }

    fn canonical(mut head: Vec<Sub>, tail: Tail) -> Self {
        let tail = match tail {
            Tail::Periodic(block) => {
                let n = block.len();
                let d = (1..=n)
                    .find(|&d| n % d == 0 && (d..n).all(|i| block[i] == block[i - d]))
                    .unwrap();
                let mut block = block[..d].to_vec();
                match block.as_slice() {
                    [Sub::L] => Tail::RepeatL,
                    [Sub::R] => Tail::RepeatR,
                    _ => {
                        while head.last().is_some() && head.last() == block.last() {
                            head.pop();
                            block.rotate_right(1);
                        }
                        Tail::Periodic(block)
                    }
                }
            }
            t => t,
        };
        match tail {
            Tail::RepeatL => {
                while head.last() == Some(&Sub::L) {
                    head.pop();
                }
            }
            Tail::RepeatR => {
                while head.last() == Some(&Sub::R) {
                    head.pop();
                }
            }
            _ => {}
        }
        DirectiveSequence { head, tail }
    }

    /// Parses `LM(R)`, `(M)`, `(LR)` or a finite word such as `LMR`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        match t.find('(') {
            None => Ok(Self::finite(parse_subs(t)?)),
            Some(open) => {
                if !t.ends_with(')') || t[open + 1..t.len() - 1].contains(['(', ')']) {
                    return Err(Error::Parse(format!("expected HEAD(BLOCK), got {t:?}")));
                }
                let head = parse_subs(&t[..open])?;
                let block = parse_subs(&t[open + 1..t.len() - 1])?;
                Self::new(head, Tail::Periodic(block))
            }
        }
    }

    pub fn head(&self) -> &[Sub] {
        &self.head
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    pub fn is_finite(&self) -> bool {
        self.tail == Tail::Finite
    }

    /// Primitive means no constant L or R tail; `None` for finite words.
    pub fn is_primitive(&self) -> Option<bool> {
        match self.tail {
            Tail::Finite => None,
            Tail::RepeatL | Tail::RepeatR => Some(false),
            Tail::Periodic(_) => Some(true),
        }
    }

    fn block(&self) -> Option<Vec<Sub>> {
        match &self.tail {
            Tail::Finite => None,
            Tail::RepeatL => Some(vec![Sub::L]),
            Tail::RepeatR => Some(vec![Sub::R]),
            Tail::Periodic(b) => Some(b.clone()),
        }
    }

    /// Letter `i`, or `None` past the end of a finite word.
    pub fn letter(&self, i: usize) -> Option<Sub> {
        if i < self.head.len() {
            return Some(self.head[i]);
        }
        self.block().map(|b| b[(i - self.head.len()) % b.len()])
    }

    pub fn prefix(&self, n: usize) -> Vec<Sub> {
        (0..n).map_while(|i| self.letter(i)).collect()
    }

    /// Lexicographic comparison with L < M < R; a finite word counts as
    /// smaller than its proper extensions.
    pub fn compare(&self, other: &DirectiveSequence) -> Ordering {
        let per = |d: &DirectiveSequence| d.block().map_or(0, |b| b.len());
        let n = self.head.len().max(other.head.len()) + per(self) + per(other);
        for i in 0..n {
            match (self.letter(i), other.letter(i)) {
                (Some(a), Some(b)) if a == b => {}
                (Some(a), Some(b)) => return a.cmp(&b),
                (None, None) => return Ordering::Equal,
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
            }
        }
        Ordering::Equal
    }

    /// Rewrites a junction `L·R̄` or `R·L̄`, which is not in the codomain of
    /// the s-map. On the constant seed words `LR̄ = RL̄ = M L̄` for seed 0 and
    /// `M R̄` for seed 1, so the rewrite depends on the seed.
    pub fn normalized_for_seed(&self, seed: u8) -> DirectiveSequence {
        let junction = matches!(
            (self.head.last(), &self.tail),
            (Some(Sub::L), Tail::RepeatR) | (Some(Sub::R), Tail::RepeatL)
        );
        if !junction {
            return self.clone();
        }
        let mut head = self.head[..self.head.len() - 1].to_vec();
        head.push(Sub::M);
        let tail = if seed == 0 { Tail::RepeatL } else { Tail::RepeatR };
        DirectiveSequence::canonical(head, tail)
    }

    /// The limit word `𝛔(seed^∞)`.
    pub fn limit(&self, seed: u8) -> Limit {
        let base = |b: EpWord| Limit::Exact(SymbolicWord::new(self.head.clone(), b));
        match &self.tail {
            Tail::Finite => base(EpWord::constant(seed)),
            Tail::RepeatL => base(if seed == 0 {
                EpWord::constant(0)
            } else {
                EpWord::with_constant_tail(&[1], 0)
            }),
            Tail::RepeatR => base(if seed == 0 {
                EpWord::with_constant_tail(&[0], 1)
            } else {
                EpWord::constant(1)
            }),
            Tail::Periodic(_) => Limit::Primitive { directive: self.clone(), seed },
        }
    }

    pub fn limit_word(&self, seed: u8, n: usize) -> Vec<u8> {
        self.limit(seed).prefix(n)
    }
}

impl fmt::Display for DirectiveSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = subs_to_string(&self.head);
        match &self.tail {
            Tail::Finite => write!(f, "{h}"),
            Tail::RepeatL => write!(f, "{h}(L)"),
            Tail::RepeatR => write!(f, "{h}(R)"),
            Tail::Periodic(b) => write!(f, "{h}({})", subs_to_string(b)),
        }
    }
}

impl fmt::Debug for DirectiveSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl std::str::FromStr for DirectiveSequence {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        DirectiveSequence::parse(s)
    }
}

/// A limit word: eventually periodic (given symbolically) or the aperiodic
/// limit of a primitive directive sequence.
#[derive(Debug, Clone)]
pub enum Limit {
    Exact(SymbolicWord),
    Primitive { directive: DirectiveSequence, seed: u8 },
}

impl Limit {
    pub fn prefix(&self, n: usize) -> Vec<u8> {
        match self {
            Limit::Exact(w) => w.prefix(n),
            Limit::Primitive { directive, seed } => {
                // σ1...σk(seed) is a prefix of the limit word since σ(i) starts with i.
                let mut k = directive.head.len() + 1;
                loop {
                    let sigma = directive.prefix(k);
                    let len = letter_counts(&sigma, *seed);
                    if len[0].saturating_add(len[1]) >= n as u128 {
                        return image_prefix(&sigma, |_| vec![*seed], n);
                    }
                    k += 1;
                }
            }
        }
    }

    pub fn stream(&self) -> WordStream {
        match self {
            Limit::Exact(w) if w.sigma.len() <= 16 => WordStream::from(w.materialize()),
            _ => {
                let me = self.clone();
                WordStream::new(move |n| me.prefix(n))
            }
        }
    }
}

/// The six boundary words of the node `σ = wM`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeBoundaries {
    pub s0: EpWord,
    pub s010: EpWord,
    pub s01: EpWord,
    pub s10: EpWord,
    pub s101: EpWord,
    pub s1: EpWord,
}

/// Base words `0̄, 010̄, 01̄, 10̄, 101̄, 1̄` in the order of [`NodeBoundaries`].
pub fn boundary_bases() -> [EpWord; 6] {
    [
        EpWord::constant(0),
        EpWord::with_constant_tail(&[0, 1], 0),
        EpWord::with_constant_tail(&[0], 1),
        EpWord::with_constant_tail(&[1], 0),
        EpWord::with_constant_tail(&[1, 0], 1),
        EpWord::constant(1),
    ]
}

/// Node word `wM(base)` kept symbolic.
pub fn node_word(w: &[Sub], base: &EpWord) -> SymbolicWord {
    let mut sigma = w.to_vec();
    sigma.push(Sub::M);
    SymbolicWord::new(sigma, base.clone())
}

pub fn node_boundaries(w: &[Sub]) -> NodeBoundaries {
    let [s0, s010, s01, s10, s101, s1] = boundary_bases().map(|b| node_word(w, &b).materialize());
    NodeBoundaries { s0, s010, s01, s10, s101, s1 }
}

/// Result of the s-map; `truncated` marks a descent stopped before a tail was found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SMap {
    pub directive: DirectiveSequence,
    pub truncated: bool,
}

impl SMap {
    fn done(head: Vec<Sub>, tail: Tail) -> SMap {
        SMap { directive: DirectiveSequence::canonical(head, tail), truncated: false }
    }

    fn cut(head: Vec<Sub>) -> SMap {
        SMap { directive: DirectiveSequence::finite(head), truncated: true }
    }
}

fn ep(pre: &[u8], per: &[u8]) -> EpWord {
    EpWord::new(pre.to_vec(), per.to_vec()).unwrap()
}

/// The s-map of an eventually periodic word.
pub fn s_map(u: &EpWord, max_depth: usize) -> SMap {
    s_map_with(u.first(), |x| x.compare_ep(u).reverse().into(), max_depth)
}

/// The s-map of a stream, comparing at most `cmp_depth` letters per step.
pub fn s_map_stream(u: &WordStream, max_depth: usize, cmp_depth: usize) -> SMap {
    if let Some(w) = u.exact() {
        return s_map(w, max_depth);
    }
    let first = u.prefix(1);
    if first.is_empty() {
        return SMap::cut(Vec::new());
    }
    s_map_with(first[0], |x| x.compare_stream(u, cmp_depth), max_depth)
}

pub fn s_map_stream_default(u: &WordStream, max_depth: usize) -> SMap {
    s_map_stream(u, max_depth, DEFAULT_STREAM_DEPTH)
}

// `cmp(x)` orders u against the word x.
fn s_map_with(first: u8, cmp: impl Fn(&SymbolicWord) -> StreamOrdering, max_depth: usize) -> SMap {
    use StreamOrdering::*;
    let at = |tau: &[Sub], base: &EpWord| cmp(&SymbolicWord::new(tau.to_vec(), base.clone()));
    let mut tau: Vec<Sub> = Vec::new();
    if first == 0 {
        match at(&tau, &ep(&[0, 1], &[0])) {
            Less | Equal => return SMap::done(tau, Tail::RepeatL),
            Undecided(_) => return SMap::cut(tau),
            Greater => {}
        }
        match at(&tau, &ep(&[0], &[1])) {
            Equal => return SMap::done(tau, Tail::RepeatR),
            Undecided(_) => return SMap::cut(tau),
            _ => {}
        }
        let (x1, x2, x3) = (ep(&[], &[0, 1]), ep(&[0, 1, 1, 0], &[0, 1]), ep(&[0, 1], &[1, 0]));
        while tau.len() < max_depth {
            let next = match at(&tau, &x1) {
                Less => Sub::L,
                Undecided(_) => return SMap::cut(tau),
                _ => match at(&tau, &x2) {
                    Less | Equal => {
                        tau.push(Sub::M);
                        return SMap::done(tau, Tail::RepeatL);
                    }
                    Undecided(_) => return SMap::cut(tau),
                    Greater => match at(&tau, &x3) {
                        Less => Sub::M,
                        Equal => {
                            tau.push(Sub::M);
                            return SMap::done(tau, Tail::RepeatR);
                        }
                        Greater => Sub::R,
                        Undecided(_) => return SMap::cut(tau),
                    },
                },
            };
            tau.push(next);
        }
    } else {
        match at(&tau, &ep(&[1, 0], &[1])) {
            Greater | Equal => return SMap::done(tau, Tail::RepeatR),
            Undecided(_) => return SMap::cut(tau),
            Less => {}
        }
        match at(&tau, &ep(&[1], &[0])) {
            Equal => return SMap::done(tau, Tail::RepeatL),
            Undecided(_) => return SMap::cut(tau),
            _ => {}
        }
        let (y1, y2, y3) = (ep(&[], &[1, 0]), ep(&[1, 0, 0, 1], &[1, 0]), ep(&[1, 0], &[0, 1]));
        while tau.len() < max_depth {
            let next = match at(&tau, &y1) {
                Greater => Sub::R,
                Undecided(_) => return SMap::cut(tau),
                _ => match at(&tau, &y2) {
                    Greater | Equal => {
                        tau.push(Sub::M);
                        return SMap::done(tau, Tail::RepeatR);
                    }
                    Undecided(_) => return SMap::cut(tau),
                    Less => match at(&tau, &y3) {
                        Greater => Sub::M,
                        Equal => {
                            tau.push(Sub::M);
                            return SMap::done(tau, Tail::RepeatL);
                        }
                        Less => Sub::L,
                        Undecided(_) => return SMap::cut(tau),
                    },
                },
            };
            tau.push(next);
        }
    }
    SMap::cut(tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> EpWord {
        EpWord::parse(s).unwrap()
    }

    fn d(s: &str) -> DirectiveSequence {
        DirectiveSequence::parse(s).unwrap()
    }

    fn subs(s: &str) -> Vec<Sub> {
        parse_subs(s).unwrap()
    }

    #[test]
    fn apply_examples() {
        assert_eq!(apply(&subs("M"), &w("(0)")), w("(01)"));
        assert_eq!(apply(&subs("LM"), &w("(0)")), w("(010)"));
        assert_eq!(apply(&subs("M"), &w("1(0)")), w("10(01)"));
        assert_eq!(apply_letters(&subs("LM"), &[0]), vec![0, 1, 0]);
    }

    #[test]
    fn limit_examples() {
        assert_eq!(d("(L)").limit_word(1, 6), vec![1, 0, 0, 0, 0, 0]);
        assert_eq!(d("(R)").limit_word(0, 5), vec![0, 1, 1, 1, 1]);
        assert_eq!(d("(M)").limit_word(0, 8), vec![0, 1, 1, 0, 1, 0, 0, 1]);
        let tm: Vec<u8> = "0110100110010110".bytes().map(|b| b - b'0').collect();
        assert_eq!(d("(M)").limit_word(0, 16), tm);
        match d("LM(R)").limit(0) {
            Limit::Exact(x) => assert_eq!(x.materialize(), apply(&subs("LM"), &w("0(1)"))),
            _ => panic!(),
        }
    }

    #[test]
    fn directive_canonical_forms() {
        assert_eq!(d("LML(L)").to_string(), "LM(L)");
        assert_eq!(d("(LL)").to_string(), "(L)");
        assert_eq!(d("M(RM)").to_string(), "(MR)");
        assert_eq!(d("(MM)").to_string(), "(M)");
        assert_eq!(d("LM(R)").head(), &subs("LM")[..]);
        assert!(DirectiveSequence::parse("L(X)").is_err());
        assert!(DirectiveSequence::parse("L()").is_err());
    }

    #[test]
    fn primitivity() {
        assert_eq!(d("(M)").is_primitive(), Some(true));
        assert_eq!(d("LM(R)").is_primitive(), Some(false));
        assert_eq!(d("(LR)").is_primitive(), Some(true));
        assert_eq!(d("LMR").is_primitive(), None);
    }

    #[test]
    fn junction_normalization() {
        assert_eq!(d("L(R)").normalized_for_seed(0), d("M(L)"));
        assert_eq!(d("L(R)").normalized_for_seed(1), d("M(R)"));
        assert_eq!(d("MR(L)").normalized_for_seed(0), d("MM(L)"));
        for (x, seed) in [("L(R)", 0u8), ("L(R)", 1), ("R(L)", 0), ("R(L)", 1)] {
            let a = d(x).limit_word(seed, 64);
            let b = d(x).normalized_for_seed(seed).limit_word(seed, 64);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn node_boundaries_examples() {
        let nb = node_boundaries(&[]);
        assert_eq!(nb.s0, w("(01)"));
        assert_eq!(nb.s010, w("0110(01)"));
        assert_eq!(nb.s01, w("01(10)"));
        assert_eq!(nb.s10, w("10(01)"));
        assert_eq!(nb.s101, w("1001(10)"));
        assert_eq!(nb.s1, w("(10)"));
        assert!(nb.s01 < nb.s10);
        let nb = node_boundaries(&subs("L"));
        assert_eq!(nb.s0, w("01(001)"));
        assert_eq!(nb.s01, w("01(010)"));
    }

    #[test]
    fn s_map_examples() {
        assert_eq!(s_map(&w("(0)"), 48).directive, d("(L)"));
        assert_eq!(s_map(&w("(01)"), 48).directive, d("M(L)"));
        assert_eq!(s_map(&w("0(1)"), 48).directive, d("(R)"));
        assert_eq!(s_map(&w("(1)"), 48).directive, d("(R)"));
        assert_eq!(s_map(&w("1(0)"), 48).directive, d("(L)"));
        assert_eq!(s_map(&w("(10)"), 48).directive, d("M(R)"));
        assert_eq!(s_map(&w("10(01)"), 48).directive, d("M(L)"));
        assert_eq!(s_map(&w("01(10)"), 48).directive, d("M(R)"));
        assert_eq!(s_map(&w("0110(01)"), 48).directive, d("M(L)"));
        assert_eq!(s_map(&w("(010)"), 48).directive, d("LM(L)"));
        assert_eq!(s_map(&w("(0110)"), 48).directive, d("MM(L)"));
    }

    #[test]
    fn s_map_on_streams() {
        let tm = d("(M)").limit(0).stream();
        let r = s_map_stream(&tm, 10, 4096);
        assert!(r.truncated);
        assert_eq!(r.directive.head(), &subs("MMMMMMMMMM")[..]);
        let short = WordStream::from_prefix(vec![0, 1, 0, 1, 0, 1]);
        assert!(s_map_stream(&short, 10, 4096).truncated);
    }

    #[test]
    fn letter_counts_match_images() {
        let s = subs("LMRMRL");
        for c in 0..2u8 {
            let img = apply_letters(&s, &[c]);
            let n1 = img.iter().filter(|&&x| x == 1).count() as u128;
            assert_eq!(letter_counts(&s, c), [img.len() as u128 - n1, n1]);
        }
    }

    #[test]
    fn symbolic_compare_deep() {
        let sigma = subs(&"M".repeat(30));
        let x = SymbolicWord::new(sigma, w("(0)"));
        assert_eq!(x.compare_ep(&w("(01)")), Ordering::Greater);
        assert_eq!(x.compare_ep(&w("0111(0)")), Ordering::Less);
    }

    fn arb_subs(max: usize) -> impl Strategy<Value = Vec<Sub>> {
        proptest::collection::vec(prop_oneof![Just(Sub::L), Just(Sub::M), Just(Sub::R)], 0..=max)
    }

    fn arb_word() -> impl Strategy<Value = EpWord> {
        (
            proptest::collection::vec(0u8..2, 0..=6),
            proptest::collection::vec(0u8..2, 1..=6),
        )
            .prop_map(|(p, q)| EpWord::new(p, q).unwrap())
    }

    proptest! {
        #[test]
        fn node_monotonicity(w1 in arb_subs(6), w2 in arb_subs(6)) {
            let n = w1.len().min(w2.len());
            let (w1, w2) = (&w1[..n], &w2[..n]);
            prop_assume!(w1 < w2);
            let (a, b) = (node_boundaries(w1), node_boundaries(w2));
            prop_assert!(a.s01 < b.s0);
            prop_assert!(a.s1 < b.s10);
        }

        #[test]
        fn boundary_ordering(w1 in arb_subs(6)) {
            let b = node_boundaries(&w1);
            prop_assert!(b.s0 <= b.s010 && b.s010 <= b.s01 && b.s01 < b.s10);
            prop_assert!(b.s10 <= b.s101 && b.s101 <= b.s1);
        }

        #[test]
        fn s_map_round_trip(head in arb_subs(6), right in any::<bool>(), seed in 0u8..2) {
            let tail = if right { Tail::RepeatR } else { Tail::RepeatL };
            let dir = DirectiveSequence::new(head, tail).unwrap();
            let u = match dir.limit(seed) {
                Limit::Exact(x) => x.materialize(),
                _ => unreachable!(),
            };
            let got = s_map(&u, 48);
            prop_assert!(!got.truncated);
            prop_assert_eq!(got.directive, dir.normalized_for_seed(seed));
        }

        #[test]
        fn sup_inf_commute_with_substitutions(sigma in arb_subs(5), u in arb_word()) {
            if u.first() == 0 {
                let lhs = apply(&sigma, &u).sup0().unwrap();
                prop_assert_eq!(lhs, apply(&sigma, &u.sup0().unwrap()));
            } else {
                let lhs = apply(&sigma, &u).inf1().unwrap();
                prop_assert_eq!(lhs, apply(&sigma, &u.inf1().unwrap()));
            }
        }

        #[test]
        fn s_map_is_monotone(u in arb_word(), v in arb_word()) {
            prop_assume!(u.first() == v.first() && u <= v);
            let (a, b) = (s_map(&u, 48), s_map(&v, 48));
            prop_assert!(a.directive.compare(&b.directive) != Ordering::Greater);
        }

        #[test]
        fn s_map_cell_contains_word(u in arb_word()) {
            let r = s_map(&u, 48);
            prop_assert!(!r.truncated);
            let (lo, hi) = if u.first() == 0 { ("(0)", "0(1)") } else { ("1(0)", "(1)") };
            // Constant tails act on the cell endpoints through the fixed words
            // L̄: 0̄, 01̄, 10̄, 1̄ -> 0̄, 010̄, 10̄, 10̄ and R̄: -> 01̄, 01̄, 101̄, 1̄.
            let tail_image = |x: &str| -> EpWord {
                let out = match (r.directive.tail(), x) {
                    (Tail::RepeatL, "(0)") => "(0)",
                    (Tail::RepeatL, "0(1)") => "01(0)",
                    (Tail::RepeatL, _) => "1(0)",
                    (Tail::RepeatR, "(1)") => "(1)",
                    (Tail::RepeatR, "1(0)") => "10(1)",
                    (Tail::RepeatR, _) => "0(1)",
                    _ => unreachable!(),
                };
                apply(r.directive.head(), &w(out))
            };
            prop_assert!(tail_image(lo) <= u && u <= tail_image(hi));
        }
    }
}
