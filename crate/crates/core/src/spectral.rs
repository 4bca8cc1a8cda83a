//! Automata presenting `Ω_{a,b}` for eventually periodic bounds, entropy
//! through the Perron root, and dimension lower bounds for `π(U_{q0,q1})`.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::classify::{expansion_a, expansion_b};
use crate::critical::komornik_loreti_with;
use crate::error::{Error, Result};
use crate::eval::SolveOptions;
use crate::substitution::{s_map_stream, word_counts, Sub, SymbolicWord};
use crate::word::{EpWord, StreamOrdering, WordStream};

/// Deterministic trimmed automaton whose finite paths from `start` spell
/// exactly the finite factors of `Ω_{a,b}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubshiftAutomaton {
    pub start: usize,
    /// `trans[s][x]` is the successor of `s` on letter `x`, if any.
    pub trans: Vec<[Option<usize>; 2]>,
}

// Open comparisons after reading a prefix: offsets into a (for suffixes
// that started with 0) and into b (for suffixes that started with 1).
type Key = (Vec<u32>, Vec<u32>);

fn wrap(i: usize, w: &EpWord) -> usize {
    let top = w.pre().len() + w.per().len();
    if i >= top {
        i - w.per().len()
    } else {
        i
    }
}

fn step(key: &Key, x: u8, a: &EpWord, b: &EpWord) -> Option<Key> {
    let mut na = Vec::with_capacity(key.0.len() + 1);
    for &i in &key.0 {
        let c = a.letter(i as usize);
        if x > c {
            return None;
        }
        if x == c {
            na.push(wrap(i as usize + 1, a) as u32);
        }
    }
    let mut nb = Vec::with_capacity(key.1.len() + 1);
    for &j in &key.1 {
        let c = b.letter(j as usize);
        if x < c {
            return None;
        }
        if x == c {
            nb.push(wrap(j as usize + 1, b) as u32);
        }
    }
    if x == 0 {
        na.push(wrap(1, a) as u32);
    } else {
        nb.push(wrap(1, b) as u32);
    }
    na.sort_unstable();
    na.dedup();
    nb.sort_unstable();
    nb.dedup();
    Some((na, nb))
}

/// Subset construction for `Ω_{a,b}`, followed by trimming and minimization.
pub fn build_automaton(a: &EpWord, b: &EpWord) -> Result<SubshiftAutomaton> {
    if a.first() != 0 {
        return Err(Error::Precondition(format!("a = {a} must start with 0")));
    }
    if b.first() != 1 {
        return Err(Error::Precondition(format!("b = {b} must start with 1")));
    }
    let mut index: HashMap<Key, usize> = HashMap::new();
    let mut keys: Vec<Key> = vec![(Vec::new(), Vec::new())];
    index.insert(keys[0].clone(), 0);
    let mut trans: Vec<[Option<usize>; 2]> = vec![[None, None]];
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        for x in 0..2u8 {
            if let Some(k) = step(&keys[s].clone(), x, a, b) {
                let t = *index.entry(k.clone()).or_insert_with(|| {
                    keys.push(k);
                    trans.push([None, None]);
                    queue.push_back(keys.len() - 1);
                    keys.len() - 1
                });
                trans[s][x as usize] = Some(t);
            }
        }
    }
    Ok(minimize(trim(SubshiftAutomaton { start: 0, trans })))
}

/// Removes states without an infinite future.
fn trim(m: SubshiftAutomaton) -> SubshiftAutomaton {
    let n = m.trans.len();
    let mut alive = vec![true; n];
    loop {
        let mut changed = false;
        for s in 0..n {
            if alive[s] && !m.trans[s].iter().any(|t| t.is_some_and(|t| alive[t])) {
                alive[s] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut new_id = vec![usize::MAX; n];
    let mut k = 0;
    for s in 0..n {
        if alive[s] {
            new_id[s] = k;
            k += 1;
        }
    }
    let trans = (0..n)
        .filter(|&s| alive[s])
        .map(|s| m.trans[s].map(|t| t.filter(|&t| alive[t]).map(|t| new_id[t])))
        .collect();
    SubshiftAutomaton { start: new_id[m.start], trans }
}

/// Moore partition refinement; all states accept.
fn minimize(m: SubshiftAutomaton) -> SubshiftAutomaton {
    let n = m.trans.len();
    let mut class: Vec<usize> = m.trans.iter().map(|t| t[0].is_some() as usize + 2 * t[1].is_some() as usize).collect();
    loop {
        let mut sig: HashMap<(usize, Option<usize>, Option<usize>), usize> = HashMap::new();
        let next: Vec<usize> = (0..n)
            .map(|s| {
                let key = (class[s], m.trans[s][0].map(|t| class[t]), m.trans[s][1].map(|t| class[t]));
                let len = sig.len();
                *sig.entry(key).or_insert(len)
            })
            .collect();
        let count_old = class.iter().collect::<std::collections::HashSet<_>>().len();
        class = next;
        if sig.len() == count_old {
            break;
        }
    }
    let k = class.iter().max().map_or(0, |&c| c + 1);
    let mut trans = vec![[None, None]; k];
    for s in 0..n {
        trans[class[s]] = m.trans[s].map(|t| t.map(|t| class[t]));
    }
    SubshiftAutomaton { start: class[m.start], trans }
}

impl SubshiftAutomaton {
    pub fn states(&self) -> usize {
        self.trans.len()
    }

    /// `adj[s][t]` = number of letters leading from `s` to `t`.
    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let n = self.states();
        let mut adj = vec![vec![0u32; n]; n];
        for (s, t) in self.trans.iter().enumerate() {
            for t in t.iter().flatten() {
                adj[s][*t] += 1;
            }
        }
        adj
    }

    /// `A_n`: the number of length-`n` words read from the start state.
    pub fn count_paths(&self, n: usize) -> u128 {
        *self.path_counts(n).last().unwrap()
    }

    /// `[A_0, A_1, ..., A_n]`.
    pub fn path_counts(&self, n: usize) -> Vec<u128> {
        let mut v = vec![0u128; self.states()];
        v[self.start] = 1;
        let mut out = vec![1u128];
        for _ in 0..n {
            let mut w = vec![0u128; self.states()];
            for (s, &c) in v.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for t in self.trans[s].iter().flatten() {
                    w[*t] = w[*t].saturating_add(c);
                }
            }
            v = w;
            out.push(v.iter().fold(0u128, |acc, &c| acc.saturating_add(c)));
        }
        out
    }

    pub fn accepts(&self, word: &[u8]) -> bool {
        let mut s = self.start;
        for &x in word {
            match self.trans[s][x as usize] {
                Some(t) => s = t,
                None => return false,
            }
        }
        true
    }

    /// One line `state letter -> state` per transition.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "start {}", self.start);
        for (s, t) in self.trans.iter().enumerate() {
            for (x, t) in t.iter().enumerate() {
                if let Some(t) = t {
                    let _ = writeln!(out, "{s} {x} -> {t}");
                }
            }
        }
        out
    }
}

/// Perron root of an irreducible nonnegative matrix by power iteration on
/// `I + A`, stopped when the Collatz–Wielandt bounds agree to `tol`.
fn perron_root(adj: &[Vec<f64>], tol: f64) -> f64 {
    let n = adj.len();
    let mut x = vec![1.0; n];
    let mut est = 0.0;
    for _ in 0..200_000 {
        let y: Vec<f64> = (0..n).map(|i| x[i] + (0..n).map(|j| adj[i][j] * x[j]).sum::<f64>()).collect();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let r = y[i] / x[i];
            lo = lo.min(r);
            hi = hi.max(r);
        }
        est = 0.5 * (lo + hi) - 1.0;
        let norm = y.iter().cloned().fold(0.0, f64::max);
        x = y.into_iter().map(|v| v / norm).collect();
        if hi - lo <= tol * lo {
            break;
        }
    }
    est
}

/// Topological entropy (natural log) of the presented subshift.
pub fn entropy(m: &SubshiftAutomaton, tol: f64) -> f64 {
    let n = m.states();
    let mut g = DiGraph::<(), ()>::with_capacity(n, 2 * n);
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for (s, t) in m.trans.iter().enumerate() {
        for t in t.iter().flatten() {
            g.add_edge(nodes[s], nodes[*t], ());
        }
    }
    let mut rho = 0.0f64;
    for comp in tarjan_scc(&g) {
        let ids: Vec<usize> = comp.iter().map(|v| v.index()).collect();
        let pos: HashMap<usize, usize> = ids.iter().enumerate().map(|(k, &s)| (s, k)).collect();
        let mut sub = vec![vec![0.0; ids.len()]; ids.len()];
        let mut edges = 0usize;
        for (k, &s) in ids.iter().enumerate() {
            for t in m.trans[s].iter().flatten() {
                if let Some(&l) = pos.get(t) {
                    sub[k][l] += 1.0;
                    edges += 1;
                }
            }
        }
        let r = if edges == 0 {
            0.0
        } else if edges == ids.len() {
            // every state has a single internal edge: one cycle
            1.0
        } else {
            perron_root(&sub, tol)
        };
        rho = rho.max(r);
    }
    if rho <= 1.0 {
        0.0
    } else {
        rho.ln()
    }
}

/// Entropy of `Ω_{a,b}` from its automaton.
pub fn omega_entropy(a: &EpWord, b: &EpWord) -> Result<f64> {
    Ok(entropy(&build_automaton(a, b)?, 1e-12))
}

/// Similarity dimension: the `λ > 0` with `r0^λ + r1^λ = 1`.
pub fn ifs_dimension(r0: f64, r1: f64, tol: f64) -> Result<f64> {
    if !(r0 > 0.0 && r0 < 1.0 && r1 > 0.0 && r1 < 1.0) {
        return Err(Error::Precondition(format!("ratios must lie in (0, 1), got ({r0}, {r1})")));
    }
    let h = |l: f64| r0.powf(l) + r1.powf(l) - 1.0;
    let (mut lo, mut hi) = (0.0, 1.0);
    while h(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Upper and lower entropy bounds for `U_{q0,q1}` from truncated expansion
/// words: `Ω_{a⁻,b⁺} ⊆ Ω_{a,b} ⊆ Ω_{a⁺,b⁻}` with `a± = a[..m] c̄`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyBounds {
    pub lower: f64,
    pub upper: f64,
    /// Number of expansion digits actually used.
    pub digits: usize,
}

pub fn univoque_entropy_bounds(q0: f64, q1: f64, m: usize) -> Result<EntropyBounds> {
    let a = expansion_a(q0, q1, m, 1e-13)?;
    let b = expansion_b(q0, q1, m, 1e-13)?;
    let k = a.certain_prefix().len().min(b.certain_prefix().len()).max(1);
    let (ap, bp) = (&a.digits[..k], &b.digits[..k]);
    let upper = omega_entropy(&EpWord::with_constant_tail(ap, 1), &EpWord::with_constant_tail(bp, 0))?;
    let lower = omega_entropy(&EpWord::with_constant_tail(ap, 0), &EpWord::with_constant_tail(bp, 1))?;
    Ok(EntropyBounds { lower, upper, digits: k })
}

/// The subsystem `{σ(g0), σ(g1)}^∞` behind a dimension lower bound.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionWitness {
    /// The substitution `σ`.
    pub node: Vec<Sub>,
    pub k: usize,
    /// `g0, g1` before applying `σ`.
    pub generators: [Vec<u8>; 2],
    pub ratios: [f64; 2],
    pub dimension: f64,
}

const DIM_DIGITS: usize = 400;

fn ratio(q0: f64, q1: f64, sigma: &[Sub], w: &[u8]) -> f64 {
    let c = word_counts(sigma, w);
    (-(c[0] as f64) * q0.ln() - (c[1] as f64) * q1.ln()).exp()
}

fn repeat(prefix: &[u8], block: &[u8], k: usize) -> Vec<u8> {
    let mut v = prefix.to_vec();
    for _ in 0..k {
        v.extend_from_slice(block);
    }
    v
}

/// Lower bound for the Hausdorff dimension of `π_{q0,q1}(U_{q0,q1})` for
/// `q1 > 𝒦(q0)`, from a two-map subsystem found at the node where the
/// directive sequences of `a_{q0,q1}` and `b_{q0,q1}` split.
pub fn univoque_dimension_lower_bound(q0: f64, q1: f64) -> Result<f64> {
    univoque_dimension_witness(q0, q1).map(|w| w.dimension)
}

pub fn univoque_dimension_witness(q0: f64, q1: f64) -> Result<DimensionWitness> {
    let k = komornik_loreti_with(q0, &SolveOptions::default())?;
    if !(q1 > k.value.hi) {
        return Err(Error::Precondition(format!("q1 = {q1} is not above K({q0}) = {}", k.value)));
    }
    if q0 + q1 < q0 * q1 {
        // U is the full shift: the two letters themselves form the subsystem
        let d = ifs_dimension(1.0 / q0, 1.0 / q1, 1e-12)?;
        return Ok(DimensionWitness {
            node: Vec::new(),
            k: 0,
            generators: [vec![0], vec![1]],
            ratios: [1.0 / q0, 1.0 / q1],
            dimension: d,
        });
    }
    if q0 + q1 == q0 * q1 {
        // a = 01̄ and b = 10̄; blocks 01 and 10 never produce three equal letters
        let r = 1.0 / (q0 * q1);
        return Ok(DimensionWitness {
            node: Vec::new(),
            k: 0,
            generators: [vec![0, 1], vec![1, 0]],
            ratios: [r, r],
            dimension: ifs_dimension(r, r, 1e-12)?,
        });
    }
    let a = expansion_a(q0, q1, DIM_DIGITS, 1e-13)?;
    let b = expansion_b(q0, q1, DIM_DIGITS, 1e-13)?;
    let (sa_stream, sb_stream) =
        (WordStream::from_prefix(a.certain_prefix().to_vec()), WordStream::from_prefix(b.certain_prefix().to_vec()));
    let sa = s_map_stream(&sa_stream, 64, DIM_DIGITS);
    let sb = s_map_stream(&sb_stream, 64, DIM_DIGITS);
    let mut node = Vec::new();
    let mut split = None;
    for i in 0..64 {
        let known = |s: &crate::substitution::SMap| {
            if s.truncated && i >= s.directive.head().len() {
                None
            } else {
                s.directive.letter(i)
            }
        };
        match (known(&sa), known(&sb)) {
            (Some(x), Some(y)) if x == y => node.push(x),
            (Some(x), Some(y)) => {
                split = Some((x, y));
                break;
            }
            _ => break,
        }
    }
    let (x, y) = split.ok_or_else(|| Error::Precondition("expansion words do not split within resolution".into()))?;
    if x < y {
        return Err(Error::Precondition(format!("s(a) < s(b) at ({q0}, {q1}): entropy is zero")));
    }
    // b below σM(10̄) = σ(10(01)^∞), or a above σM(01̄) = σ(01(10)^∞)
    let (pre, block, c, other, upper) = if y == Sub::L {
        (&[0u8][..], &[0u8, 1][..], 1u8, &sb_stream, true)
    } else {
        (&[1u8][..], &[1u8, 0][..], 0u8, &sa_stream, false)
    };
    for kk in 0..200 {
        let g = repeat(pre, block, kk);
        let probe = SymbolicWord::new(node.clone(), EpWord::new(vec![c], g.clone()).unwrap());
        let ord = probe.compare_stream(other, DIM_DIGITS);
        let ok = if upper { ord == StreamOrdering::Greater } else { ord == StreamOrdering::Less };
        if ok {
            let g2 = repeat(pre, block, kk + 1);
            let ratios = [ratio(q0, q1, &node, &g), ratio(q0, q1, &node, &g2)];
            let dimension = ifs_dimension(ratios[0], ratios[1], 1e-12)?;
            return Ok(DimensionWitness { node, k: kk, generators: [g, g2], ratios, dimension });
        }
    }
    Err(Error::Precondition("no admissible generator pair found within resolution".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{classify_omega_words, Classification};
    use proptest::prelude::*;

    fn w(s: &str) -> EpWord {
        EpWord::parse(s).unwrap()
    }

    #[test]
    fn automaton_examples() {
        let full = build_automaton(&w("0(1)"), &w("1(0)")).unwrap();
        assert_eq!(full.states(), 1);
        assert_eq!(full.trans[0], [Some(0), Some(0)]);
        assert!((entropy(&full, 1e-12) - 2f64.ln()).abs() <= 1e-12);

        let m = build_automaton(&w("(01)"), &w("1(0)")).unwrap();
        assert!(!m.accepts(&[0, 1, 1]));
        assert!(m.accepts(&[1, 1, 0, 1, 0]));
        assert_eq!(m.states(), 3);
        // a leading run of 1s, then no 11: golden mean growth
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((entropy(&m, 1e-12) - phi.ln()).abs() < 1e-10);

        let m = build_automaton(&w("(01)"), &w("(10)")).unwrap();
        assert_eq!(m.count_paths(4), 8);
        assert_eq!(entropy(&m, 1e-12), 0.0);
    }

    #[test]
    fn trivial_pair_has_two_words() {
        let m = build_automaton(&w("(0)"), &w("(10)")).unwrap();
        assert_eq!(m.count_paths(6), 2);
        assert!(m.accepts(&[0; 6]) && m.accepts(&[1; 6]));
    }

    #[test]
    fn dump_lists_transitions() {
        let m = build_automaton(&w("0(1)"), &w("1(0)")).unwrap();
        assert_eq!(m.dump(), "start 0\n0 0 -> 0\n0 1 -> 0\n");
    }

    #[test]
    fn ifs_examples() {
        assert!((ifs_dimension(0.5, 0.5, 1e-12).unwrap() - 1.0).abs() < 1e-11);
        assert!((ifs_dimension(0.25, 0.25, 1e-12).unwrap() - 0.5).abs() < 1e-11);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((ifs_dimension(0.5, 0.25, 1e-12).unwrap() - phi.ln() / 2f64.ln()).abs() < 1e-11);
        assert!(ifs_dimension(1.0, 0.5, 1e-12).is_err());
    }

    #[test]
    fn dimension_examples() {
        let d = univoque_dimension_lower_bound(2.0, 2.0).unwrap();
        assert!((d - 0.5).abs() < 1e-11, "{d}");
        let full = univoque_dimension_lower_bound(2.0, 3.0).unwrap();
        assert!((0.5f64.powf(full) + (1.0 / 3.0f64).powf(full) - 1.0).abs() < 1e-10);
        assert!(univoque_dimension_lower_bound(1.9, 1.8).unwrap() > 0.0);
        assert!(univoque_dimension_lower_bound(1.7, 1.5).is_err());
    }

    #[test]
    fn entropy_bounds_straddle_k() {
        let k = komornik_loreti_with(1.9, &SolveOptions::default()).unwrap().value.mid();
        let below = univoque_entropy_bounds(1.9, k - 0.03, 48).unwrap();
        assert!(below.upper < 0.02, "{below:?}");
        let above = univoque_entropy_bounds(1.9, k + 0.05, 48).unwrap();
        assert!(above.lower > 0.05, "{above:?}");
        assert!(above.lower <= above.upper);
    }

    fn arb_a() -> impl Strategy<Value = EpWord> {
        (proptest::collection::vec(0u8..2, 0..=4), proptest::collection::vec(0u8..2, 1..=4)).prop_map(|(mut p, q)| {
            p.insert(0, 0);
            EpWord::new(p, q).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ifs_symmetric_and_monotone(r0 in 0.05f64..0.95, r1 in 0.05f64..0.95, d in 0.001f64..0.04) {
            let x = ifs_dimension(r0, r1, 1e-12).unwrap();
            prop_assert!((x - ifs_dimension(r1, r0, 1e-12).unwrap()).abs() < 1e-10);
            if r0 + d < 1.0 {
                prop_assert!(ifs_dimension(r0 + d, r1, 1e-12).unwrap() > x);
            }
        }

        #[test]
        fn counts_obey_growth_bounds(a in arb_a(), b in arb_a()) {
            let b = b.reflect();
            let m = build_automaton(&a, &b).unwrap();
            let c = m.path_counts(12);
            prop_assert!(c[1] <= 2);
            for n in 1..12 {
                prop_assert!(c[n + 1] <= 2 * c[n] && c[n + 1] >= c[n]);
            }
        }

        #[test]
        fn zero_entropy_iff_countable(a in arb_a(), b in arb_a()) {
            let b = b.reflect();
            let h = omega_entropy(&a, &b).unwrap();
            match classify_omega_words(&a, &b, 64).unwrap() {
                Classification::Trivial | Classification::CountableNontrivial => prop_assert_eq!(h, 0.0),
                Classification::PositiveEntropy => prop_assert!(h > 0.0),
                _ => {}
            }
        }
    }
}
