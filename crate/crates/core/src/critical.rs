//! The generalized golden ratio `𝒢(q0)` and the generalized Komornik–Loreti
//! constant `𝒦(q0)` by descent in the directive tree.
//!
//! At a node `σ = wM` the position of `q0` relative to the interval ends
//! `μ_{u,v}` is read off from the sign of `g_u(q0) - g̃_v(q0)`, which is
//! positive exactly below `μ_{u,v}`. This costs one root solve per boundary
//! word instead of a nested solve per interval end.

use std::fmt;
use std::io;
use std::str::FromStr;

use crate::classify::{expansion_a, expansion_b};
use crate::error::{Error, Result};
use crate::eval::{g_raw, g_tilde_raw, Bracket, DoubleDouble, Precision, Real, SolveOptions};
use crate::par::{self, Execution};
use crate::substitution::{parse_subs, s_map_stream, subs_to_string, Sub, SymbolicWord};
use crate::word::{EpWord, StreamOrdering, WordStream};

/// How the value of a critical map was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CriticalCase {
    LeftFormula,
    RightFormula,
    /// The enclosure at the reached node is already within tolerance:
    /// `q0` cannot be separated from a primitive point at this resolution.
    PrimitiveLimit,
    DepthExhausted,
}

impl fmt::Display for CriticalCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for CriticalCase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "LeftFormula" => Ok(CriticalCase::LeftFormula),
            "RightFormula" => Ok(CriticalCase::RightFormula),
            "PrimitiveLimit" => Ok(CriticalCase::PrimitiveLimit),
            "DepthExhausted" => Ok(CriticalCase::DepthExhausted),
            _ => Err(Error::Parse(format!("unknown case {s:?}"))),
        }
    }
}

/// Which critical map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Which {
    G,
    K,
}

impl fmt::Display for Which {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Which::G => "G",
            Which::K => "K",
        })
    }
}

impl FromStr for Which {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "G" | "gr" => Ok(Which::G),
            "K" | "kl" => Ok(Which::K),
            _ => Err(Error::Parse(format!("unknown curve {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalResult {
    pub q0: f64,
    pub value: Bracket,
    /// The node `σ = wM` is reported by `w`.
    pub node: Vec<Sub>,
    pub case: CriticalCase,
    /// Boundary word whose `g` or `g̃` gives the value, for formula cases.
    pub word: Option<SymbolicWord>,
    /// Enclosure of `(q0 - 1)(value - 1)`.
    pub witness: Bracket,
}

impl CriticalResult {
    pub fn node_string(&self) -> String {
        subs_to_string(&self.node)
    }
}

impl fmt::Display for CriticalResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}  node={} case={}", self.value, self.node_string(), self.case)
    }
}

fn base(pre: &[u8], c: u8) -> EpWord {
    EpWord::with_constant_tail(pre, c)
}

/// Root brackets of `g` and `g̃` at a fixed `q0`.
struct Probe<T> {
    q0: T,
    tol: T,
}

impl<T: Real> Probe<T> {
    fn g(&self, sigma: &[Sub], b: &EpWord) -> (T, T) {
        g_raw(&SymbolicWord::new(sigma.to_vec(), b.clone()), self.q0, self.tol)
    }

    fn gt(&self, sigma: &[Sub], b: &EpWord) -> (T, T) {
        g_tilde_raw(&SymbolicWord::new(sigma.to_vec(), b.clone()), self.q0, self.tol)
    }

    /// `[max(g_{w0̄}, g̃_{w1̄}), min(g_{w01̄}, g̃_{w10̄})]`: every value the
    /// critical map can take at points below the prefix `w`.
    fn enclosure(&self, w: &[Sub]) -> (T, T) {
        let lo1 = self.g(w, &EpWord::constant(0)).0;
        let lo2 = self.gt(w, &EpWord::constant(1)).0;
        let hi1 = self.g(w, &base(&[0], 1)).1;
        let hi2 = self.gt(w, &base(&[1], 0)).1;
        (if lo1 > lo2 { lo1 } else { lo2 }, if hi1 < hi2 { hi1 } else { hi2 })
    }
}

fn below<T: Real>(x: (T, T), y: (T, T)) -> bool {
    x.1 < y.0
}

fn definitely_above<T: Real>(x: (T, T), y: (T, T)) -> bool {
    x.0 > y.1
}

enum Step {
    Push(Sub),
    Formula(Vec<Sub>, EpWord, bool),
}

fn finish<T: Real>(q0: f64, node: Vec<Sub>, case: CriticalCase, word: Option<SymbolicWord>, v: (T, T), tol: f64) -> CriticalResult {
    let value = Bracket::new(v.0.down(), v.1.up(), tol);
    let qm = T::of(q0) - T::of(1.0);
    let witness = Bracket::new((qm * (v.0 - T::of(1.0))).down(), (qm * (v.1 - T::of(1.0))).up(), tol);
    CriticalResult { q0, value, node, case, word, witness }
}

fn check_q0(q0: f64) -> Result<()> {
    if q0.is_finite() && q0 > 1.0 {
        Ok(())
    } else {
        Err(Error::Precondition(format!("q0 must exceed 1, got {q0}")))
    }
}

fn inner_tol<T: Real>(tol: f64) -> T {
    T::of((tol * 1e-3).max(T::eps() * 64.0))
}

// Enclosures are tried only from this depth on; above it formula cases are
// the norm and the extra solves would be wasted.
const ENCLOSURE_FROM: usize = 6;

fn descend<T: Real>(q0: f64, opts: &SolveOptions, which: Which) -> CriticalResult {
    let p = Probe { q0: T::of(q0), tol: inner_tol::<T>(opts.tol) };
    let (b0, b010, b01, b10, b101, b1) =
        (EpWord::constant(0), base(&[0, 1], 0), base(&[0], 1), base(&[1], 0), base(&[1, 0], 1), EpWord::constant(1));
    let mut w: Vec<Sub> = Vec::new();
    loop {
        if w.len() >= ENCLOSURE_FROM || w.len() >= opts.max_depth {
            let e = p.enclosure(&w);
            if (e.1 - e.0).up() <= opts.tol {
                return finish(q0, w, CriticalCase::PrimitiveLimit, None, e, opts.tol);
            }
            if w.len() >= opts.max_depth {
                return finish(q0, w, CriticalCase::DepthExhausted, None, e, opts.tol);
            }
        }
        let mut sigma = w.clone();
        sigma.push(Sub::M);
        let step = match which {
            Which::G => {
                let g0 = p.g(&sigma, &b0);
                let t10 = p.gt(&sigma, &b10);
                if definitely_above(g0, t10) {
                    Step::Push(Sub::L)
                } else {
                    let g01 = p.g(&sigma, &b01);
                    let t1 = p.gt(&sigma, &b1);
                    if below(g01, t1) {
                        Step::Push(Sub::R)
                    } else if g0.0 + g0.1 >= t1.0 + t1.1 {
                        Step::Formula(sigma, b0.clone(), true)
                    } else {
                        Step::Formula(sigma, b1.clone(), false)
                    }
                }
            }
            Which::K => {
                let g0 = p.g(&sigma, &b0);
                let t10 = p.gt(&sigma, &b10);
                if definitely_above(g0, t10) {
                    Step::Push(Sub::L)
                } else if !below(p.g(&sigma, &b010), t10) {
                    Step::Formula(sigma, b10.clone(), false)
                } else {
                    let g01 = p.g(&sigma, &b01);
                    let t1 = p.gt(&sigma, &b1);
                    if below(g01, t1) {
                        Step::Push(Sub::R)
                    } else if !definitely_above(g01, p.gt(&sigma, &b101)) {
                        Step::Formula(sigma, b01.clone(), true)
                    } else {
                        Step::Push(Sub::M)
                    }
                }
            }
        };
        match step {
            Step::Push(s) => w.push(s),
            Step::Formula(sigma, b, use_g) => {
                let word = SymbolicWord::new(sigma, b);
                // value brackets at the requested tolerance are nested in the
                // tighter decision brackets, so re-solving is not needed
                let v = if use_g { g_raw(&word, p.q0, p.tol) } else { g_tilde_raw(&word, p.q0, p.tol) };
                let case = match (which, use_g) {
                    (Which::G, true) | (Which::K, false) => CriticalCase::LeftFormula,
                    _ => CriticalCase::RightFormula,
                };
                return finish(q0, w, case, Some(word), v, opts.tol);
            }
        }
    }
}

fn critical(q0: f64, opts: &SolveOptions, which: Which) -> Result<CriticalResult> {
    check_q0(q0)?;
    if !(opts.tol > 0.0) {
        return Err(Error::Precondition(format!("tolerance must be positive, got {}", opts.tol)));
    }
    Ok(match opts.precision {
        Precision::Double => descend::<f64>(q0, opts, which),
        Precision::DoubleDouble => descend::<DoubleDouble>(q0, opts, which),
    })
}

/// `𝒢(q0)`: the infimum of the `q1` for which `U_{q0,q1}` is nontrivial.
pub fn generalized_golden_ratio(q0: f64, tol: f64, max_depth: usize) -> Result<CriticalResult> {
    generalized_golden_ratio_with(q0, &SolveOptions { tol, max_depth, ..Default::default() })
}

pub fn generalized_golden_ratio_with(q0: f64, opts: &SolveOptions) -> Result<CriticalResult> {
    critical(q0, opts, Which::G)
}

/// `𝒦(q0)`: the infimum of the `q1` for which `U_{q0,q1}` is uncountable.
pub fn komornik_loreti(q0: f64, tol: f64, max_depth: usize) -> Result<CriticalResult> {
    komornik_loreti_with(q0, &SolveOptions { tol, max_depth, ..Default::default() })
}

pub fn komornik_loreti_with(q0: f64, opts: &SolveOptions) -> Result<CriticalResult> {
    critical(q0, opts, Which::K)
}

pub fn critical_value(which: Which, q0: f64, opts: &SolveOptions) -> Result<CriticalResult> {
    critical(q0, opts, which)
}

/// Number of expansion digits fed to the s-map by [`ks_crosscheck`].
pub const KS_DIGITS: usize = 2048;

/// Orders `s(a_{q0,q1})` against `s(b_{q0,q1})`, using expansion digits up to
/// the first one that lies within rounding of the switch point.
pub fn ks_crosscheck(q0: f64, q1: f64, depth: usize) -> Result<StreamOrdering> {
    let tol = 1e-12;
    let a = expansion_a(q0, q1, KS_DIGITS, tol)?;
    let b = expansion_b(q0, q1, KS_DIGITS, tol)?;
    let sa = s_map_stream(&WordStream::from_prefix(a.certain_prefix().to_vec()), depth, KS_DIGITS);
    let sb = s_map_stream(&WordStream::from_prefix(b.certain_prefix().to_vec()), depth, KS_DIGITS);
    let known = |s: &crate::substitution::SMap, i: usize| {
        if s.truncated && i >= s.directive.head().len() {
            None
        } else {
            s.directive.letter(i)
        }
    };
    if !sa.truncated && !sb.truncated && sa.directive == sb.directive {
        return Ok(StreamOrdering::Equal);
    }
    for i in 0..=depth {
        match (known(&sa, i), known(&sb, i)) {
            (Some(x), Some(y)) if x == y => continue,
            (Some(x), Some(y)) => return Ok(x.cmp(&y).into()),
            _ => return Ok(StreamOrdering::Undecided(i)),
        }
    }
    Ok(StreamOrdering::Undecided(depth))
}

/// Common prefix of `s(a)` and `s(b)` as far as [`ks_crosscheck`] resolves it.
pub fn ks_common_prefix(q0: f64, q1: f64, depth: usize) -> Result<Vec<Sub>> {
    let tol = 1e-12;
    let a = expansion_a(q0, q1, KS_DIGITS, tol)?;
    let b = expansion_b(q0, q1, KS_DIGITS, tol)?;
    let sa = s_map_stream(&WordStream::from_prefix(a.certain_prefix().to_vec()), depth, KS_DIGITS);
    let sb = s_map_stream(&WordStream::from_prefix(b.certain_prefix().to_vec()), depth, KS_DIGITS);
    let mut out = Vec::new();
    for i in 0..depth {
        match (sa.directive.letter(i), sb.directive.letter(i)) {
            (Some(x), Some(y)) if x == y => out.push(x),
            _ => break,
        }
    }
    Ok(out)
}

/// Which curves [`sample_curve`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveSelection {
    G,
    K,
    Both,
}

impl CurveSelection {
    fn members(self) -> &'static [Which] {
        match self {
            CurveSelection::G => &[Which::G],
            CurveSelection::K => &[Which::K],
            CurveSelection::Both => &[Which::G, Which::K],
        }
    }
}

impl FromStr for CurveSelection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gr" | "G" => Ok(CurveSelection::G),
            "kl" | "K" => Ok(CurveSelection::K),
            "both" => Ok(CurveSelection::Both),
            _ => Err(Error::Parse(format!("unknown curve selection {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub which: Which,
    pub result: CriticalResult,
}

/// Uniform grid of `n` points on `[lo, hi]`, endpoints included.
pub fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect()
}

/// Evaluates the selected critical maps on a uniform grid. Rows are ordered
/// by `q0`, with `G` before `K` at equal `q0`.
pub fn sample_curve(
    q0_lo: f64,
    q0_hi: f64,
    n: usize,
    which: CurveSelection,
    opts: &SolveOptions,
    exec: Execution,
) -> Result<Vec<CurveRow>> {
    if !(q0_lo > 1.0 && q0_lo < q0_hi && q0_hi.is_finite()) {
        return Err(Error::Precondition(format!("need 1 < from < to, got [{q0_lo}, {q0_hi}]")));
    }
    if n < 2 {
        return Err(Error::Precondition("need at least 2 samples".into()));
    }
    let jobs: Vec<(f64, Which)> =
        grid(q0_lo, q0_hi, n).into_iter().flat_map(|q| which.members().iter().map(move |&w| (q, w))).collect();
    par::map(&jobs, exec, |&(q0, w)| critical(q0, opts, w).map(|result| CurveRow { which: w, result }))
        .into_iter()
        .collect()
}

/// One CSV line: `q0,which,value_lo,value_hi,node,case`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRecord {
    pub q0: f64,
    pub which: Which,
    pub value_lo: f64,
    pub value_hi: f64,
    pub node: String,
    pub case: CriticalCase,
}

impl From<&CurveRow> for CsvRecord {
    fn from(r: &CurveRow) -> Self {
        CsvRecord {
            q0: r.result.q0,
            which: r.which,
            value_lo: r.result.value.lo,
            value_hi: r.result.value.hi,
            node: r.result.node_string(),
            case: r.result.case,
        }
    }
}

pub const CSV_HEADER: [&str; 6] = ["q0", "which", "value_lo", "value_hi", "node", "case"];

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(format!("csv: {e}"))
}

/// Writes rows with shortest round-trip float formatting.
pub fn write_csv<W: io::Write>(rows: &[CurveRow], out: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(out);
    wr.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        let c = CsvRecord::from(r);
        wr.write_record([
            c.q0.to_string(),
            c.which.to_string(),
            c.value_lo.to_string(),
            c.value_hi.to_string(),
            c.node,
            c.case.to_string(),
        ])
        .map_err(csv_err)?;
    }
    wr.flush().map_err(|e| Error::Parse(format!("csv: {e}")))
}

pub fn read_csv<R: io::Read>(input: R) -> Result<Vec<CsvRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers().map_err(csv_err)?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Parse(format!("unexpected csv header {header:?}")));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("csv number {s:?}: {e}")));
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != 6 {
            return Err(Error::Parse(format!("csv row has {} fields", rec.len())));
        }
        parse_subs(&rec[4])?;
        out.push(CsvRecord {
            q0: num(&rec[0])?,
            which: rec[1].parse()?,
            value_lo: num(&rec[2])?,
            value_hi: num(&rec[3])?,
            node: rec[4].to_string(),
            case: rec[5].parse()?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::substitution::parse_subs;

    const PHI: f64 = 1.618_033_988_749_895;

    fn opts() -> SolveOptions {
        SolveOptions::default()
    }

    #[test]
    fn golden_ratio_examples() {
        let r = generalized_golden_ratio_with(1.55, &opts()).unwrap();
        assert_eq!(r.case, CriticalCase::LeftFormula);
        assert!(r.node.is_empty());
        assert!(r.value.distance(1.0 / 0.55) < 1e-12, "{r}");
        let r = generalized_golden_ratio_with(1.75, &opts()).unwrap();
        assert_eq!(r.case, CriticalCase::RightFormula);
        assert!(r.value.distance(2.75 / 1.75) < 1e-12, "{r}");
        let r = generalized_golden_ratio_with(PHI, &opts()).unwrap();
        assert!(r.value.distance(PHI) < 1e-12, "{r}");
    }

    #[test]
    fn golden_ratio_deeper_nodes() {
        // σ = LM on [μ_{σ(0̄),σ(10̄)}, μ_{σ(0̄),σ(1̄)}]: 1/(q0 (q0 - 1))
        let q0 = 1.3;
        let r = generalized_golden_ratio_with(q0, &opts()).unwrap();
        assert_eq!(r.node, parse_subs("L").unwrap());
        assert!(r.value.distance(1.0 / (q0 * (q0 - 1.0))) < 1e-12, "{r}");
    }

    #[test]
    fn komornik_loreti_examples() {
        let r = komornik_loreti_with(1.5, &opts()).unwrap();
        assert!(r.value.distance(2.0) < 1e-12, "{r}");
        assert_eq!(r.case, CriticalCase::LeftFormula);
        let r = komornik_loreti_with(1.9, &opts()).unwrap();
        assert!(r.value.distance(2.8 / (1.9 * 0.9)) < 1e-12, "{r}");
        assert_eq!(r.case, CriticalCase::RightFormula);
    }

    #[test]
    fn komornik_loreti_near_thue_morse_point() {
        let r = komornik_loreti_with(1.7872, &opts()).unwrap();
        assert!(r.node.len() >= 3 && r.node.iter().take(3).all(|&s| s == Sub::M), "{r}");
        assert!((r.value.mid() - 1.7872).abs() < 1e-3);
    }

    #[test]
    fn chain_and_involution() {
        for q0 in grid(1.1, 3.0, 12) {
            let g = generalized_golden_ratio_with(q0, &opts()).unwrap();
            let k = komornik_loreti_with(q0, &opts()).unwrap();
            let gg = generalized_golden_ratio_with(g.value.mid(), &opts()).unwrap();
            let kk = komornik_loreti_with(k.value.mid(), &opts()).unwrap();
            assert!((gg.value.mid() - q0).abs() < 1e-8, "q0={q0} {g} {gg}");
            assert!((kk.value.mid() - q0).abs() < 1e-8, "q0={q0} {k} {kk}");
            assert!(g.witness.lo <= 0.5 + 1e-12 && k.witness.hi >= 0.5 - 1e-12);
            assert!(g.value.lo <= k.value.hi);
            assert!(k.value.hi < q0 / (q0 - 1.0) + 1e-12);
        }
    }

    #[test]
    fn monotone_along_grid() {
        let qs = grid(1.2, 2.6, 15);
        for which in [Which::G, Which::K] {
            let v: Vec<f64> = qs.iter().map(|&q| critical_value(which, q, &opts()).unwrap().value.mid()).collect();
            assert!(v.windows(2).all(|p| p[1] < p[0]), "{which}: {v:?}");
        }
    }

    #[test]
    fn ks_examples() {
        assert_eq!(ks_crosscheck(1.9, 1.70, 40).unwrap(), StreamOrdering::Greater);
        assert_eq!(ks_crosscheck(1.9, 1.55, 40).unwrap(), StreamOrdering::Less);
        assert!(matches!(ks_crosscheck(2.0, 1.5, 40).unwrap(), StreamOrdering::Undecided(_) | StreamOrdering::Equal));
    }

    #[test]
    fn node_matches_ks_prefix() {
        for q0 in [1.55, 1.72, 1.8, 2.3] {
            let k = komornik_loreti_with(q0, &opts()).unwrap();
            let mut expected = k.node.clone();
            expected.push(Sub::M);
            let prefix = ks_common_prefix(q0, k.value.mid(), 40).unwrap();
            assert!(prefix.starts_with(&k.node), "q0={q0}: {k} vs {}", subs_to_string(&prefix));
        }
    }

    #[test]
    fn curve_examples() {
        let rows = sample_curve(1.5, 2.0, 3, CurveSelection::G, &opts(), Execution::Parallel).unwrap();
        let v: Vec<f64> = rows.iter().map(|r| r.result.value.mid()).collect();
        assert!((v[0] - 2.0).abs() < 1e-11 && (v[1] - 11.0 / 7.0).abs() < 1e-11 && (v[2] - 1.5).abs() < 1e-11);
        let rows = sample_curve(1.5, 2.0, 3, CurveSelection::K, &opts(), Execution::Sequential).unwrap();
        let g175 = 11.0 / 7.0;
        let k175 = rows[1].result.value.mid();
        assert!(k175 > g175 && k175 < 1.75 / 0.75);
        assert!(sample_curve(2.0, 1.5, 3, CurveSelection::K, &opts(), Execution::Sequential).is_err());
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let a = sample_curve(1.3, 2.4, 9, CurveSelection::Both, &opts(), Execution::Parallel).unwrap();
        let b = sample_curve(1.3, 2.4, 9, CurveSelection::Both, &opts(), Execution::Sequential).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn csv_round_trip() {
        let rows = sample_curve(1.3, 2.4, 7, CurveSelection::Both, &opts(), Execution::Parallel).unwrap();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("q0,which,value_lo,value_hi,node,case\n"));
        let back = read_csv(&buf[..]).unwrap();
        let expected: Vec<CsvRecord> = rows.iter().map(CsvRecord::from).collect();
        assert_eq!(back.len(), expected.len());
        for (x, y) in back.iter().zip(&expected) {
            assert_eq!(x.q0.to_bits(), y.q0.to_bits());
            assert_eq!(x.value_lo.to_bits(), y.value_lo.to_bits());
            assert_eq!(x.value_hi.to_bits(), y.value_hi.to_bits());
            assert_eq!((&x.node, x.which, x.case), (&y.node, y.which, y.case));
        }
    }
}
