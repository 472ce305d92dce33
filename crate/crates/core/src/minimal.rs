//! Finite central windows of minimal sequences: two-sided words whose
//! Birkhoff sums Re(gamma_n) stay nonnegative, and checks of their growth.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::substitution::{birkhoff_gamma, Letter, Substitution, SubstitutionError, TwoSidedWindow, Word};

/// Slack for accumulated rounding in sums over up to 10^6 symbols.
pub const EPS_MIN: f64 = 1e-9;
/// Default bound on |arg(beta_0^n)|.
pub const DEFAULT_MAX_ARG: f64 = 0.2;

#[derive(Debug, Error)]
pub enum MinimalError {
    #[error("Re(gamma) has no letters of both signs")]
    NoSignChange,
    #[error("no word a w b found in sigma^k images for k <= {0}")]
    NoOccurrence(usize),
    #[error("no exponent n <= {n_max} with |arg(beta_0^n)| < {max_arg} and length >= {min_len}")]
    NoExponent { n_max: usize, max_arg: f64, min_len: u128 },
    #[error("minimality fails at n = {n}: Re(gamma_n) = {value}")]
    NotMinimal { n: i64, value: f64 },
    #[error(transparent)]
    Substitution(#[from] SubstitutionError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedLetters {
    pub a: Letter,
    pub b: Letter,
    /// The word a w b.
    pub word: Word,
    /// sigma^level(source) contains the word.
    pub level: usize,
    pub source: Letter,
}

/// First letters a, b with Re(gamma_a) < 0 < Re(gamma_b), and a shortest
/// a w b occurring in some sigma^k(c), k <= max_level.
pub fn find_seed_letters(sigma: &Substitution, gamma: &[Complex64], max_level: usize) -> Result<SeedLetters, MinimalError> {
    let a = (0..gamma.len()).find(|&i| gamma[i].re < 0.0).ok_or(MinimalError::NoSignChange)? as Letter;
    let b = (0..gamma.len()).find(|&i| gamma[i].re > 0.0).ok_or(MinimalError::NoSignChange)? as Letter;
    let mut best: Option<SeedLetters> = None;
    for level in 0..=max_level {
        for c in 0..sigma.size() as Letter {
            let img = sigma.iterate(&[c], level);
            let mut last_a: Option<usize> = None;
            for (i, &x) in img.iter().enumerate() {
                if x == b {
                    if let Some(j) = last_a {
                        let len = i - j + 1;
                        if best.as_ref().is_none_or(|s| len < s.word.len()) {
                            best = Some(SeedLetters { a, b, word: img[j..=i].to_vec(), level, source: c });
                        }
                    }
                }
                if x == a {
                    last_a = Some(i);
                }
            }
        }
    }
    best.ok_or(MinimalError::NoOccurrence(max_level))
}

/// Length of the prefix of w minimizing Re(v(prefix)); ties go to the shortest.
pub fn minimal_prefix(w: &[Letter], v: &[Complex64]) -> usize {
    let mut best = 0;
    let mut best_val = 0.0;
    let mut acc = 0.0;
    for (i, &l) in w.iter().enumerate() {
        acc += v[l as usize].re;
        if acc < best_val {
            best_val = acc;
            best = i + 1;
        }
    }
    best
}

/// Exponents n <= n_max with |arg(beta_0^n)| < max_arg.
pub fn exponent_candidates(beta: Complex64, n_max: usize, max_arg: f64) -> Vec<usize> {
    let th = beta.arg();
    (0..=n_max)
        .filter(|&n| {
            let a = (n as f64 * th + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI) - std::f64::consts::PI;
            a.abs() < max_arg
        })
        .collect()
}

/// Smallest admissible exponent whose image of the seed has at least min_len symbols.
pub fn choose_exponent(
    sigma: &Substitution,
    seed: &[Letter],
    beta: Complex64,
    min_len: u128,
    max_arg: f64,
    n_max: usize,
) -> Result<usize, MinimalError> {
    exponent_candidates(beta, n_max, max_arg)
        .into_iter()
        .find(|&n| sigma.iterate_len(seed, n) >= min_len)
        .ok_or(MinimalError::NoExponent { n_max, max_arg, min_len })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinimalWindow {
    pub window: TwoSidedWindow,
    pub gamma: Vec<Complex64>,
    /// Range [lo, hi] of n over which Re(gamma_n) >= -EPS_MIN was checked.
    pub certified: (i64, i64),
    pub seed: Word,
    pub exponent: usize,
    /// Origin position inside sigma^n(seed).
    pub split: usize,
    pub theta: Option<f64>,
}

impl MinimalWindow {
    /// Central part with at most `left` symbols before the origin and `right` from it on.
    pub fn trimmed(&self, left: usize, right: usize) -> MinimalWindow {
        let window = self.window.trimmed(left, right);
        let (lo, hi) = window.gamma_range();
        MinimalWindow { window, certified: (lo.max(self.certified.0), hi.min(self.certified.1)), ..self.clone() }
    }

    /// Sidecar metadata without the symbols.
    pub fn sidecar_json(&self, sigma: &Substitution) -> serde_json::Value {
        serde_json::json!({
            "seed": sigma.spell(&self.seed),
            "exponent": self.exponent,
            "split": self.split,
            "theta": self.theta,
            "left": self.window.left_len(),
            "right": self.window.right_len(),
            "certified": [self.certified.0, self.certified.1],
        })
    }
}

/// sigma^n(seed) split at its minimal prefix with respect to gamma, keeping
/// at most `keep` symbols on each side of the origin. Minimality is checked
/// on the whole of sigma^n(seed) before trimming.
pub fn minimal_window(
    sigma: &Substitution,
    gamma: &[Complex64],
    seed: &[Letter],
    n: usize,
    keep: Option<usize>,
) -> Result<MinimalWindow, MinimalError> {
    let symbols = sigma.iterate(seed, n);
    let split = minimal_prefix(&symbols, gamma);
    let full = TwoSidedWindow::new(symbols, split);
    let (worst, at) = scan_minimality(&full, gamma);
    if worst < -EPS_MIN {
        return Err(MinimalError::NotMinimal { n: at, value: worst });
    }
    let window = match keep {
        Some(k) => full.trimmed(k, k),
        None => full,
    };
    let certified = window.gamma_range();
    Ok(MinimalWindow { window, gamma: gamma.to_vec(), certified, seed: seed.to_vec(), exponent: n, split, theta: None })
}

/// (worst value, its n) of Re(gamma_n) over the window, in one pass.
fn scan_minimality(window: &TwoSidedWindow, gamma: &[Complex64]) -> (f64, i64) {
    let re: Vec<f64> = gamma.iter().map(|z| z.re).collect();
    let mut acc = 0.0;
    let mut prefix_at_origin = 0.0;
    let mut sums_min = (f64::INFINITY, 0i64);
    // first pass: Re gamma of the part left of the origin
    for (i, &l) in window.symbols.iter().enumerate() {
        if i == window.origin {
            prefix_at_origin = acc;
        }
        acc += re[l as usize];
    }
    if window.origin == window.symbols.len() {
        prefix_at_origin = acc;
    }
    let lo = window.gamma_range().0;
    let mut acc = 0.0;
    for k in 0..=window.symbols.len() {
        let v = acc - prefix_at_origin;
        if v < sums_min.0 {
            sums_min = (v, lo + k as i64);
        }
        if k < window.symbols.len() {
            acc += re[window.symbols[k] as usize];
        }
    }
    sums_min
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimalityVerdict {
    pub ok: bool,
    pub worst_n: i64,
    pub worst_value: f64,
    pub pairs_checked: usize,
    pub pairs_ok: bool,
}

/// Re(gamma_n) >= -eps on the whole window, and for random n <= -1, m >= n:
/// Re(gamma(w_n..w_{-1})) <= Re(gamma(w_n..w_m)).
pub fn verify_minimality(window: &TwoSidedWindow, gamma: &[Complex64], eps: f64, pairs: usize, seed: u64) -> Result<MinimalityVerdict, MinimalError> {
    let (worst_value, worst_n) = scan_minimality(window, gamma);
    let sums = birkhoff_gamma(window, gamma)?;
    let (lo, hi) = window.gamma_range();
    // S(k) = Re gamma(w_0..w_{k-1}) relative to the origin, indexed from lo
    let s = |k: i64| sums[(k - lo) as usize].re;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs_ok = true;
    let mut checked = 0;
    if lo <= -1 && hi >= 1 {
        for _ in 0..pairs {
            let n = rng.gen_range(lo..=-1);
            let m = rng.gen_range(n..hi);
            // gamma(w_n..w_{-1}) = S(0) - S(n); gamma(w_n..w_m) = S(m+1) - S(n)
            if s(0) - s(n) > s(m + 1) - s(n) + eps {
                pairs_ok = false;
            }
            checked += 1;
        }
    }
    Ok(MinimalityVerdict { ok: worst_value >= -eps && pairs_ok, worst_n, worst_value, pairs_checked: checked, pairs_ok })
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    pub rho: f64,
    pub range: (i64, i64),
    pub min_ratio: f64,
    pub argmin_n: i64,
    pub passed: bool,
}

/// min over 2 <= |n| within range of Re(gamma_n) / |n|^rho.
pub fn growth_check(window: &TwoSidedWindow, gamma: &[Complex64], rho: f64, range: Option<(i64, i64)>) -> Result<GrowthReport, MinimalError> {
    let sums = birkhoff_gamma(window, gamma)?;
    let (wlo, whi) = window.gamma_range();
    let (lo, hi) = range.map(|(a, b)| (a.max(wlo), b.min(whi))).unwrap_or((wlo, whi));
    let (argmin_n, min_ratio) = (lo..=hi)
        .into_par_iter()
        .filter(|n| n.abs() >= 2)
        .map(|n| (n, sums[(n - wlo) as usize].re / (n.abs() as f64).powf(rho)))
        .reduce(|| (0, f64::INFINITY), |x, y| if y.1 < x.1 || (y.1 == x.1 && y.0 < x.0) { y } else { x });
    Ok(GrowthReport { rho, range: (lo, hi), min_ratio, argmin_n, passed: min_ratio > 0.0 && min_ratio.is_finite() })
}

/// log|beta| / log(1/alpha).
pub fn rho_max(alpha: f64, beta: Complex64) -> f64 {
    beta.norm().ln() / (1.0 / alpha).ln()
}

#[derive(Clone, Debug, Serialize)]
pub struct LiminfRow {
    pub tau_theta: f64,
    pub a: f64,
    /// min over k <= k_max of A^k |arg(tau / beta_0^k)|
    pub min_value: f64,
    pub min_k: usize,
    /// the same minimum over k_max/2 <= k <= k_max
    pub tail_min: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LiminfCertificate {
    pub k_max: usize,
    pub rows: Vec<LiminfRow>,
    /// Every tail minimum is at least 1.
    pub passed: bool,
}

/// Bounded evidence that A^k dist(tau, beta_0^k) stays away from 0
/// for the given directions tau = e^{i theta}.
pub fn liminf_certificate(beta: Complex64, tau_thetas: &[f64], amps: &[f64], k_max: usize) -> LiminfCertificate {
    let th = beta.arg();
    let ang = |x: f64| {
        let p = std::f64::consts::PI;
        ((x + p).rem_euclid(2.0 * p) - p).abs()
    };
    let mut rows = Vec::new();
    for &t in tau_thetas {
        for &a in amps {
            let vals: Vec<f64> = (1..=k_max).map(|k| a.powi(k as i32) * ang(t - k as f64 * th)).collect();
            let (mi, mv) = vals.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
            let tail_min = vals[k_max / 2..].iter().cloned().fold(f64::INFINITY, f64::min);
            rows.push(LiminfRow { tau_theta: t, a, min_value: mv, min_k: mi + 1, tail_min });
        }
    }
    let passed = rows.iter().all(|r| r.tail_min >= 1.0);
    LiminfCertificate { k_max, rows, passed }
}

/// Window as one line of symbols with a middle dot at the origin.
pub fn window_text(w: &TwoSidedWindow, sigma: &Substitution) -> String {
    let mut s = w.display(sigma);
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rot() -> (Substitution, Vec<Complex64>) {
        let s = Substitution::new(&[('a', "ab"), ('b', "a")]).unwrap();
        (s, vec![Complex64::new(-1.0, 0.0), Complex64::new(1.5, 0.0)])
    }

    #[test]
    fn prefix_of_positive_weights_is_empty() {
        let v = vec![Complex64::new(1.0, 0.0); 2];
        assert_eq!(minimal_prefix(&[0, 1, 0], &v), 0);
    }

    #[test]
    fn prefix_matches_running_sum_oracle() {
        let (_, v) = rot();
        let w = [1, 0, 0, 1, 0, 0, 0, 1];
        let mut sums = vec![0.0];
        for &l in &w {
            sums.push(sums.last().unwrap() + v[l as usize].re);
        }
        let oracle = (0..sums.len()).min_by(|&i, &j| sums[i].total_cmp(&sums[j]).then(i.cmp(&j))).unwrap();
        assert_eq!(minimal_prefix(&w, &v), oracle);
    }

    #[test]
    fn base_case_window() {
        let (s, v) = rot();
        let w = minimal_window(&s, &v, &[0, 1], 0, None).unwrap();
        assert_eq!(w.split, 1);
        assert!(verify_minimality(&w.window, &v, EPS_MIN, 10, 1).unwrap().ok);
    }

    #[test]
    fn off_split_window_fails() {
        let (s, v) = rot();
        let w = minimal_window(&s, &v, &[0, 0, 1], 0, None).unwrap();
        let bad = w.window.shifted(-1);
        let r = verify_minimality(&bad, &v, EPS_MIN, 10, 1).unwrap();
        assert!(!r.ok && r.worst_value < 0.0);
    }

    #[test]
    fn growth_at_tiny_rho_is_min_sum() {
        let (s, v) = rot();
        let w = minimal_window(&s, &v, &[0, 0, 1, 1], 0, None).unwrap();
        let g = growth_check(&w.window, &v, 1e-12, None).unwrap();
        let sums = birkhoff_gamma(&w.window, &v).unwrap();
        let lo = w.window.gamma_range().0;
        let m = sums
            .iter()
            .enumerate()
            .filter(|(i, _)| (*i as i64 + lo).abs() >= 2)
            .map(|(_, z)| z.re)
            .fold(f64::INFINITY, f64::min);
        assert!((g.min_ratio - m).abs() < 1e-9);
    }

    #[test]
    fn exponents_near_zero_argument() {
        let b = Complex64::from_polar(2.0, 1.0);
        for n in exponent_candidates(b, 50, 0.2) {
            let z = b.powi(n as i32);
            assert!(z.arg().abs() < 0.2 + 1e-9);
        }
    }
}
