//! Eventually periodic binary words and lazily generated letter streams.
//!
//! Words are written `PRE(PER)`, so `01(10)` is 0110101010... and `(0)` is
//! the constant word of zeros.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Default number of letters compared before a stream comparison gives up.
pub const DEFAULT_STREAM_DEPTH: usize = 4096;

/// An infinite binary word `pre · per · per · ...` kept in canonical form:
/// the period is primitive and the preperiod is as short as possible.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EpWord {
    pre: Vec<u8>,
    per: Vec<u8>,
}

pub type EventuallyPeriodicWord = EpWord;

fn primitive_root(per: &[u8]) -> &[u8] {
    let n = per.len();
    for d in 1..n {
        if n.is_multiple_of(d) && (d..n).all(|i| per[i] == per[i - d]) {
            return &per[..d];
        }
    }
    per
}

impl EpWord {
    /// Builds the canonical word equal to `pre · per^∞`.
    pub fn new(pre: Vec<u8>, per: Vec<u8>) -> Result<Self> {
        if per.is_empty() {
            return Err(Error::Parse("empty period".into()));
        }
        if pre.iter().chain(per.iter()).any(|&c| c > 1) {
            return Err(Error::Parse("letters must be 0 or 1".into()));
        }
        Ok(Self::canonical(pre, per))
    }

    fn canonical(mut pre: Vec<u8>, per: Vec<u8>) -> Self {
        let mut per = primitive_root(&per).to_vec();
        while let Some(&last) = pre.last() {
            if last != *per.last().unwrap() {
                break;
            }
            pre.pop();
            per.rotate_right(1);
        }
        EpWord { pre, per }
    }

    /// The constant word `c^∞`.
    pub fn constant(c: u8) -> Self {
        EpWord { pre: Vec::new(), per: vec![c] }
    }

    /// `prefix · c^∞`.
    pub fn with_constant_tail(prefix: &[u8], c: u8) -> Self {
        Self::canonical(prefix.to_vec(), vec![c])
    }

    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        let open = t
            .find('(')
            .ok_or_else(|| Error::Parse(format!("expected PRE(PER), got {t:?}")))?;
        if !t.ends_with(')') || t[open + 1..t.len() - 1].contains(['(', ')']) {
            return Err(Error::Parse(format!("expected PRE(PER), got {t:?}")));
        }
        let letters = |s: &str| -> Result<Vec<u8>> {
            s.chars()
                .map(|c| match c {
                    '0' => Ok(0),
                    '1' => Ok(1),
                    _ => Err(Error::Parse(format!("bad letter {c:?} in {t:?}"))),
                })
                .collect()
        };
        let pre = letters(&t[..open])?;
        let per = letters(&t[open + 1..t.len() - 1])?;
        Self::new(pre, per)
    }

    pub fn pre(&self) -> &[u8] {
        &self.pre
    }

    pub fn per(&self) -> &[u8] {
        &self.per
    }

    pub fn letter(&self, i: usize) -> u8 {
        if i < self.pre.len() {
            self.pre[i]
        } else {
            self.per[(i - self.pre.len()) % self.per.len()]
        }
    }

    pub fn prefix(&self, n: usize) -> Vec<u8> {
        (0..n).map(|i| self.letter(i)).collect()
    }

    pub fn first(&self) -> u8 {
        self.letter(0)
    }

    /// True for `w 0^∞` and `w 1^∞`.
    pub fn is_eventually_constant(&self) -> bool {
        self.per.len() == 1
    }

    /// Lexicographic comparison of the infinite words.
    pub fn compare(&self, other: &EpWord) -> Ordering {
        // Past both preperiods the words are periodic, so agreement on
        // |per_u| + |per_v| further letters forces equality.
        let n = self.pre.len().max(other.pre.len()) + self.per.len() + other.per.len();
        for i in 0..n {
            match self.letter(i).cmp(&other.letter(i)) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        Ordering::Equal
    }

    pub fn reflect(&self) -> EpWord {
        EpWord {
            pre: self.pre.iter().map(|c| 1 - c).collect(),
            per: self.per.iter().map(|c| 1 - c).collect(),
        }
    }

    pub fn shift(&self, n: usize) -> EpWord {
        if n <= self.pre.len() {
            return EpWord { pre: self.pre[n..].to_vec(), per: self.per.clone() };
        }
        let mut per = self.per.clone();
        let r = (n - self.pre.len()) % per.len();
        per.rotate_left(r);
        EpWord { pre: Vec::new(), per }
    }

    /// `c · self`.
    pub fn prepend(&self, prefix: &[u8]) -> EpWord {
        let mut pre = prefix.to_vec();
        pre.extend_from_slice(&self.pre);
        Self::canonical(pre, self.per.clone())
    }

    fn extremal_suffix(&self, c: u8, want: Ordering) -> Option<EpWord> {
        let mut best: Option<EpWord> = None;
        for k in 0..self.pre.len() + self.per.len() {
            if self.letter(k) != c {
                continue;
            }
            let s = self.shift(k);
            if best.as_ref().is_none_or(|b| s.compare(b) == want) {
                best = Some(s);
            }
        }
        best
    }

    /// Largest suffix starting with 0, or `None` for `(1)`.
    pub fn sup0(&self) -> Option<EpWord> {
        self.extremal_suffix(0, Ordering::Greater)
    }

    /// Smallest suffix starting with 1, or `None` for `(0)`.
    pub fn inf1(&self) -> Option<EpWord> {
        self.extremal_suffix(1, Ordering::Less)
    }

    /// Membership in W: `sup0(u) = u` and u is not eventually constant.
    pub fn in_w(&self) -> bool {
        self.first() == 0 && !self.is_eventually_constant() && self.sup0().as_ref() == Some(self)
    }

    /// Membership in W̃: `inf1(v) = v` and v is not eventually constant.
    pub fn in_w_tilde(&self) -> bool {
        self.first() == 1 && !self.is_eventually_constant() && self.inf1().as_ref() == Some(self)
    }
}

impl PartialOrd for EpWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for EpWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.compare(other)
    }
}

pub fn letters_to_string(w: &[u8]) -> String {
    w.iter().map(|&c| if c == 0 { '0' } else { '1' }).collect()
}

impl fmt::Display for EpWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", letters_to_string(&self.pre), letters_to_string(&self.per))
    }
}

impl fmt::Debug for EpWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl std::str::FromStr for EpWord {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        EpWord::parse(s)
    }
}

/// Outcome of comparing words that are only known through finite prefixes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamOrdering {
    Less,
    Equal,
    Greater,
    /// The prefixes agree up to the given depth.
    Undecided(usize),
}

impl From<Ordering> for StreamOrdering {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Less => StreamOrdering::Less,
            Ordering::Equal => StreamOrdering::Equal,
            Ordering::Greater => StreamOrdering::Greater,
        }
    }
}

type Generator = dyn Fn(usize) -> Vec<u8> + Send + Sync;

/// A deterministic infinite word known through its prefixes.
#[derive(Clone)]
pub struct WordStream {
    gen: Arc<Generator>,
    exact: Option<EpWord>,
}

impl WordStream {
    /// `gen(n)` must return at least `n` letters, and prefixes must nest.
    pub fn new(gen: impl Fn(usize) -> Vec<u8> + Send + Sync + 'static) -> Self {
        WordStream { gen: Arc::new(gen), exact: None }
    }

    /// A stream that only knows a finite prefix; reading past it yields `None`.
    pub fn from_prefix(letters: Vec<u8>) -> Self {
        let letters = Arc::new(letters);
        WordStream {
            gen: Arc::new(move |n| letters[..n.min(letters.len())].to_vec()),
            exact: None,
        }
    }

    pub fn exact(&self) -> Option<&EpWord> {
        self.exact.as_ref()
    }

    /// Up to `n` letters; shorter only for streams built with [`WordStream::from_prefix`].
    pub fn prefix(&self, n: usize) -> Vec<u8> {
        let mut p = (self.gen)(n);
        p.truncate(n);
        p
    }

    pub fn compare(&self, other: &WordStream, depth: usize) -> StreamOrdering {
        if let (Some(a), Some(b)) = (&self.exact, &other.exact) {
            return a.compare(b).into();
        }
        let a = self.prefix(depth);
        let b = other.prefix(depth);
        for (x, y) in a.iter().zip(b.iter()) {
            if x != y {
                return x.cmp(y).into();
            }
        }
        StreamOrdering::Undecided(a.len().min(b.len()))
    }
}

impl From<EpWord> for WordStream {
    fn from(w: EpWord) -> Self {
        let w2 = w.clone();
        WordStream { gen: Arc::new(move |n| w2.prefix(n)), exact: Some(w) }
    }
}

impl fmt::Debug for WordStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.exact {
            Some(w) => write!(f, "WordStream({w})"),
            None => write!(f, "WordStream({}...)", letters_to_string(&self.prefix(24))),
        }
    }
}
