#![allow(dead_code)]

use std::collections::BTreeSet;

use twobase::EpWord;

/// Canonical eventually periodic words starting with `first` and written
/// with at most `max_len` letters in total.
pub fn canonical_words(first: u8, max_len: usize) -> Vec<EpWord> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for total in 1..=max_len {
        for pre_len in 0..total {
            for bits in 0u32..1 << total {
                let v: Vec<u8> = (0..total).map(|i| (bits >> i & 1) as u8).collect();
                let w = EpWord::new(v[..pre_len].to_vec(), v[pre_len..].to_vec()).unwrap();
                if w.first() == first && seen.insert(w.to_string()) {
                    out.push(w);
                }
            }
        }
    }
    out
}

/// All pairs `(a, b)` with `a` starting 0, `b` starting 1, each of size at most 4.
pub fn corpus() -> Vec<(EpWord, EpWord)> {
    let (az, bz) = (canonical_words(0, 4), canonical_words(1, 4));
    az.iter().flat_map(|a| bz.iter().map(move |b| (a.clone(), b.clone()))).collect()
}

/// Root of an increasing function on `[lo, hi]` by bisection.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    assert!(f(lo) <= 0.0 && f(hi) >= 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}
