//! Interval exchange maps, affine interval exchange maps, codings and first-return induction.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numberfield::IntMatrix;
use crate::substitution::{Letter, Substitution, TwoSidedWindow, Word};

/// Points closer than this to a breakpoint count as hitting it.
pub const BOUNDARY_TOL: f64 = 1e-14;
/// Gaps and overlaps below this are rounding when checking tilings.
pub const TILING_TOL: f64 = 1e-12;
pub const DEFAULT_RETURN_BUDGET: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IemError {
    #[error("point {t} outside the domain [0, {end})")]
    OutOfDomain { t: f64, end: f64 },
    #[error("lengths must be positive and sum to 1 (sum {sum})")]
    BadLengths { sum: f64 },
    #[error("orderings are not permutations of the alphabet")]
    BadPermutation,
    #[error("pieces do not tile the domain near {at}")]
    NotBijective { at: f64 },
    #[error("slope {0} is not positive")]
    BadSlope(f64),
    #[error("orbit hits a breakpoint at step {m}")]
    BoundaryHit { m: i64 },
    #[error("return budget exhausted after {steps} steps with {returned} pieces returned")]
    BudgetExhausted { steps: usize, returned: usize },
    #[error("cut {0} must lie in (0, 1]")]
    BadCut(f64),
    #[error("bad json: {0}")]
    Json(String),
}

/// t in [start, end) maps to image_start + slope * (t - start).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffinePiece {
    pub start: f64,
    pub end: f64,
    pub slope: f64,
    pub image_start: f64,
    pub letter: Letter,
}

impl AffinePiece {
    pub fn apply(&self, t: f64) -> f64 {
        self.image_start + self.slope * (t - self.start)
    }

    pub fn image_end(&self) -> f64 {
        self.image_start + self.slope * (self.end - self.start)
    }

    pub fn intercept(&self) -> f64 {
        self.image_start - self.slope * self.start
    }
}

/// A bijection of [0, domain) that is affine with positive slope on each piece.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineIem {
    pub alphabet: Vec<char>,
    pub domain: f64,
    pub pieces: Vec<AffinePiece>,
    #[serde(skip)]
    by_image: Vec<usize>,
}

impl AffineIem {
    pub fn new(alphabet: Vec<char>, domain: f64, mut pieces: Vec<AffinePiece>) -> Result<Self, IemError> {
        pieces.sort_by(|a, b| a.start.total_cmp(&b.start));
        let mut pos = 0.0;
        for p in &pieces {
            if !(p.slope > 0.0) {
                return Err(IemError::BadSlope(p.slope));
            }
            if (p.start - pos).abs() > TILING_TOL || p.end <= p.start {
                return Err(IemError::NotBijective { at: p.start });
            }
            pos = p.end;
        }
        if (pos - domain).abs() > TILING_TOL {
            return Err(IemError::NotBijective { at: pos });
        }
        let mut by_image: Vec<usize> = (0..pieces.len()).collect();
        by_image.sort_by(|&a, &b| pieces[a].image_start.total_cmp(&pieces[b].image_start));
        let mut pos = 0.0;
        for &k in &by_image {
            let p = &pieces[k];
            if (p.image_start - pos).abs() > TILING_TOL * 10.0 {
                return Err(IemError::NotBijective { at: p.image_start });
            }
            pos = p.image_end();
        }
        if (pos - domain).abs() > TILING_TOL * 10.0 {
            return Err(IemError::NotBijective { at: pos });
        }
        Ok(AffineIem { alphabet, domain, pieces, by_image })
    }

    /// Rebuilds derived data after deserialization.
    pub fn validated(self) -> Result<Self, IemError> {
        Self::new(self.alphabet, self.domain, self.pieces)
    }

    pub fn piece_index(&self, t: f64) -> usize {
        self.pieces.partition_point(|p| p.start <= t).saturating_sub(1)
    }

    pub fn piece_at(&self, t: f64) -> &AffinePiece {
        &self.pieces[self.piece_index(t)]
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.piece_at(t).apply(t)
    }

    pub fn evaluate(&self, t: f64) -> Result<f64, IemError> {
        if !(0.0..self.domain).contains(&t) {
            return Err(IemError::OutOfDomain { t, end: self.domain });
        }
        Ok(self.eval(t))
    }

    pub fn inverse(&self, y: f64) -> f64 {
        let k = self
            .by_image
            .partition_point(|&k| self.pieces[k].image_start <= y)
            .saturating_sub(1);
        let p = &self.pieces[self.by_image[k]];
        p.start + (y - p.image_start) / p.slope
    }

    /// Interior points where the map is (potentially) discontinuous.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces.iter().skip(1).map(|p| p.start).collect()
    }

    pub fn slopes(&self) -> Vec<f64> {
        self.pieces.iter().map(|p| p.slope).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("affine map serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, IemError> {
        let m: AffineIem = serde_json::from_str(s).map_err(|e| IemError::Json(e.to_string()))?;
        m.validated()
    }
}

impl AsRef<AffineIem> for AffineIem {
    fn as_ref(&self) -> &AffineIem {
        self
    }
}

/// An interval exchange: letters ordered by pi0 before and by pi1 after.
#[derive(Clone, Debug, PartialEq)]
pub struct Iem {
    pub alphabet: Vec<char>,
    pub lengths: Vec<f64>,
    pub pi0: Vec<Letter>,
    pub pi1: Vec<Letter>,
    map: AffineIem,
}

#[derive(Serialize, Deserialize)]
struct IemJson {
    alphabet: Vec<String>,
    lambda: Vec<String>,
    pi0: Vec<String>,
    pi1: Vec<String>,
}

impl Iem {
    pub fn new(alphabet: Vec<char>, lengths: Vec<f64>, pi0: Vec<Letter>, pi1: Vec<Letter>) -> Result<Self, IemError> {
        let n = alphabet.len();
        let sum: f64 = lengths.iter().sum();
        if lengths.len() != n || lengths.iter().any(|&l| !(l > 0.0)) || (sum - 1.0).abs() > 1e-12 {
            return Err(IemError::BadLengths { sum });
        }
        let is_perm = |p: &[Letter]| {
            let mut s: Vec<usize> = p.iter().map(|&x| x as usize).collect();
            s.sort();
            s == (0..n).collect::<Vec<_>>()
        };
        if !is_perm(&pi0) || !is_perm(&pi1) {
            return Err(IemError::BadPermutation);
        }
        let starts = |order: &[Letter]| {
            let mut out = vec![0.0; n];
            let mut pos = 0.0;
            for &a in order {
                out[a as usize] = pos;
                pos += lengths[a as usize];
            }
            out
        };
        let top = starts(&pi0);
        let bottom = starts(&pi1);
        let pieces = pi0
            .iter()
            .map(|&a| {
                let a_ = a as usize;
                AffinePiece {
                    start: top[a_],
                    end: top[a_] + lengths[a_],
                    slope: 1.0,
                    image_start: bottom[a_],
                    letter: a,
                }
            })
            .collect();
        let map = AffineIem::new(alphabet.clone(), 1.0, pieces)?;
        Ok(Iem { alphabet, lengths, pi0, pi1, map })
    }

    /// Two-interval exchange with lengths (l, 1 - l): a rotation by 1 - l.
    pub fn rotation(l: f64) -> Result<Self, IemError> {
        Self::new(vec!['a', 'b'], vec![l, 1.0 - l], vec![0, 1], vec![1, 0])
    }

    pub fn map(&self) -> &AffineIem {
        &self.map
    }

    /// delta_a with T(t) = t + delta_a on I_a.
    pub fn translations(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.alphabet.len()];
        for p in &self.map.pieces {
            d[p.letter as usize] = p.image_start - p.start;
        }
        d
    }

    pub fn evaluate(&self, t: f64) -> Result<f64, IemError> {
        self.map.evaluate(t)
    }

    /// The partition into the intervals I_a.
    pub fn partition(&self) -> Partition {
        Partition::new(
            self.alphabet.clone(),
            self.map.pieces.iter().map(|p| (p.start, p.letter)).collect(),
            1.0,
        )
    }

    pub fn to_json(&self) -> String {
        let spell = |p: &[Letter]| p.iter().map(|&a| self.alphabet[a as usize].to_string()).collect();
        let j = IemJson {
            alphabet: self.alphabet.iter().map(|c| c.to_string()).collect(),
            lambda: self.lengths.iter().map(|l| format!("{l:?}")).collect(),
            pi0: spell(&self.pi0),
            pi1: spell(&self.pi1),
        };
        serde_json::to_string_pretty(&j).expect("iem serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, IemError> {
        let j: IemJson = serde_json::from_str(s).map_err(|e| IemError::Json(e.to_string()))?;
        let one = |s: &String| -> Result<char, IemError> {
            let mut cs = s.chars();
            match (cs.next(), cs.next()) {
                (Some(c), None) => Ok(c),
                _ => Err(IemError::Json(format!("{s:?} is not a single letter"))),
            }
        };
        let alphabet: Vec<char> = j.alphabet.iter().map(one).collect::<Result<_, _>>()?;
        let idx = |s: &String| -> Result<Letter, IemError> {
            let c = one(s)?;
            alphabet
                .iter()
                .position(|&x| x == c)
                .map(|i| i as Letter)
                .ok_or(IemError::BadPermutation)
        };
        let lengths = j
            .lambda
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|e| IemError::Json(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let pi0 = j.pi0.iter().map(idx).collect::<Result<_, _>>()?;
        let pi1 = j.pi1.iter().map(idx).collect::<Result<_, _>>()?;
        Self::new(alphabet, lengths, pi0, pi1)
    }
}

impl AsRef<AffineIem> for Iem {
    fn as_ref(&self) -> &AffineIem {
        &self.map
    }
}

/// Labelled half-open intervals [starts[i], starts[i+1]) covering [0, end).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub alphabet: Vec<char>,
    pub starts: Vec<f64>,
    pub labels: Vec<Letter>,
    pub end: f64,
}

impl Partition {
    pub fn new(alphabet: Vec<char>, mut intervals: Vec<(f64, Letter)>, end: f64) -> Self {
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        Partition {
            alphabet,
            starts: intervals.iter().map(|x| x.0).collect(),
            labels: intervals.iter().map(|x| x.1).collect(),
            end,
        }
    }

    /// Letters placed left to right with the given lengths.
    pub fn from_lengths(alphabet: Vec<char>, order: &[Letter], lengths: &[f64]) -> Self {
        let mut pos = 0.0;
        let mut iv = Vec::new();
        for &a in order {
            iv.push((pos, a));
            pos += lengths[a as usize];
        }
        Partition::new(alphabet, iv, 1.0)
    }

    pub fn index_at(&self, t: f64) -> usize {
        self.starts.partition_point(|&s| s <= t).saturating_sub(1)
    }

    pub fn letter_at(&self, t: f64) -> Letter {
        self.labels[self.index_at(t)]
    }

    pub fn interval(&self, i: usize) -> (f64, f64) {
        let hi = self.starts.get(i + 1).copied().unwrap_or(self.end);
        (self.starts[i], hi)
    }

    /// All intervals carrying letter a (usually one).
    pub fn intervals_of(&self, a: Letter) -> Vec<(f64, f64)> {
        (0..self.starts.len())
            .filter(|&i| self.labels[i] == a)
            .map(|i| self.interval(i))
            .collect()
    }

    pub fn boundaries(&self) -> Vec<f64> {
        self.starts.iter().skip(1).copied().collect()
    }
}

fn near_any(t: f64, pts: &[f64]) -> bool {
    let k = pts.partition_point(|&p| p < t);
    let d1 = pts.get(k).map(|p| (p - t).abs()).unwrap_or(f64::INFINITY);
    let d0 = if k > 0 { (t - pts[k - 1]).abs() } else { f64::INFINITY };
    d0.min(d1) <= BOUNDARY_TOL
}

fn sorted_breaks(map: &AffineIem, partition: &Partition) -> Vec<f64> {
    let mut b = map.breakpoints();
    b.extend(partition.boundaries());
    b.sort_by(f64::total_cmp);
    b
}

/// Coding of T^m(t) for -n_back <= m < n_fwd under the left-closed
/// convention, with the steps m whose point lies on a breakpoint.
pub fn itinerary_lenient(
    map: &AffineIem,
    t: f64,
    n_back: usize,
    n_fwd: usize,
    partition: &Partition,
) -> Result<(TwoSidedWindow, Vec<i64>), IemError> {
    if !(0.0..map.domain).contains(&t) {
        return Err(IemError::OutOfDomain { t, end: map.domain });
    }
    let breaks = sorted_breaks(map, partition);
    let mut hits = Vec::new();
    let mut fwd = Vec::with_capacity(n_fwd);
    let mut x = t;
    for m in 0..n_fwd {
        if near_any(x, &breaks) {
            hits.push(m as i64);
        }
        fwd.push(partition.letter_at(x));
        x = map.eval(x);
    }
    let mut back = Vec::with_capacity(n_back);
    let mut x = t;
    for m in 1..=n_back {
        x = map.inverse(x);
        if near_any(x, &breaks) {
            hits.push(-(m as i64));
        }
        back.push(partition.letter_at(x));
    }
    back.reverse();
    let origin = back.len();
    back.extend(fwd);
    hits.sort();
    Ok((TwoSidedWindow::new(back, origin), hits))
}

/// Like `itinerary_lenient` but an orbit touching a breakpoint is an error.
pub fn itinerary(
    map: &AffineIem,
    t: f64,
    n_back: usize,
    n_fwd: usize,
    partition: &Partition,
) -> Result<TwoSidedWindow, IemError> {
    let (w, hits) = itinerary_lenient(map, t, n_back, n_fwd, partition)?;
    match hits.first() {
        Some(&m) => Err(IemError::BoundaryHit { m }),
        None => Ok(w),
    }
}

/// How the intervals I_b of the partition are carried into [0, cut):
/// I_b^(1) = scale * ((I_b + rotation) mod 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Renormalization {
    pub scale: f64,
    pub rotation: f64,
}

impl Renormalization {
    pub fn scaling(scale: f64) -> Self {
        Renormalization { scale, rotation: 0.0 }
    }

    /// phi(y) = y / scale - rotation mod 1, sending [0, scale) onto [0, 1).
    pub fn unscale(&self, y: f64) -> f64 {
        (y / self.scale - self.rotation).rem_euclid(1.0)
    }

    fn image_of(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        let a = (lo + self.rotation).rem_euclid(1.0);
        let b = a + (hi - lo);
        if b <= 1.0 + TILING_TOL {
            vec![(a * self.scale, b.min(1.0) * self.scale)]
        } else {
            vec![(a * self.scale, self.scale), (0.0, (b - 1.0) * self.scale)]
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReturnPiece {
    pub start: f64,
    pub end: f64,
    pub image_start: f64,
    pub slope: f64,
    pub label: Letter,
    pub return_time: usize,
    pub word: Word,
}

#[derive(Clone, Debug, Serialize)]
pub struct FirstReturn {
    pub cut: f64,
    pub pieces: Vec<ReturnPiece>,
    pub induced: AffineIem,
    /// R[a][b] counts visits to I_a of the return orbit of I_b^(1); absent
    /// when some I_b^(1) splits into pieces with different return words.
    pub matrix: Option<IntMatrix>,
    pub words: Option<Vec<Word>>,
}

struct Tracked {
    orig_lo: f64,
    orig_hi: f64,
    cur_lo: f64,
    cur_hi: f64,
    label: Letter,
    word: Word,
}

/// First return of T to [0, cut), with the partition intervals carried into
/// [0, cut) by `renorm` (default: scaling by `cut`).
pub fn first_return(
    map: &AffineIem,
    partition: &Partition,
    cut: f64,
    renorm: Option<Renormalization>,
    budget: usize,
) -> Result<FirstReturn, IemError> {
    if !(cut > 0.0 && cut <= map.domain + TILING_TOL) {
        return Err(IemError::BadCut(cut));
    }
    let renorm = renorm.unwrap_or(Renormalization::scaling(cut));
    let n_letters = partition.alphabet.len();
    let mut breaks = sorted_breaks(map, partition);
    breaks.push(cut);
    breaks.sort_by(f64::total_cmp);

    let mut stack: Vec<Tracked> = Vec::new();
    for i in (0..partition.starts.len()).rev() {
        let (lo, hi) = partition.interval(i);
        for (a, b) in renorm.image_of(lo, hi) {
            if b - a > TILING_TOL {
                stack.push(Tracked {
                    orig_lo: a,
                    orig_hi: b,
                    cur_lo: a,
                    cur_hi: b,
                    label: partition.labels[i],
                    word: Vec::new(),
                });
            }
        }
    }

    let mut done: Vec<ReturnPiece> = Vec::new();
    let mut steps = 0usize;
    while let Some(tr) = stack.pop() {
        let k = tr.word.len();
        if k >= 1 && tr.cur_hi <= cut + TILING_TOL && tr.cur_lo >= -TILING_TOL {
            done.push(ReturnPiece {
                start: tr.orig_lo,
                end: tr.orig_hi,
                image_start: tr.cur_lo.max(0.0),
                slope: (tr.cur_hi - tr.cur_lo) / (tr.orig_hi - tr.orig_lo),
                label: tr.label,
                return_time: k,
                word: tr.word,
            });
            continue;
        }
        if k >= budget {
            return Err(IemError::BudgetExhausted { steps, returned: done.len() });
        }
        steps += 1;
        // split the current interval at breakpoints
        let lo_i = breaks.partition_point(|&b| b <= tr.cur_lo + BOUNDARY_TOL);
        let hi_i = breaks.partition_point(|&b| b < tr.cur_hi - BOUNDARY_TOL);
        let mut cuts = vec![tr.cur_lo];
        cuts.extend_from_slice(&breaks[lo_i..hi_i.max(lo_i)]);
        cuts.push(tr.cur_hi);
        let ratio = (tr.orig_hi - tr.orig_lo) / (tr.cur_hi - tr.cur_lo);
        for w in cuts.windows(2).rev() {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let oa = tr.orig_lo + (a - tr.cur_lo) * ratio;
            let ob = tr.orig_lo + (b - tr.cur_lo) * ratio;
            if k >= 1 && b <= cut + TILING_TOL {
                stack.push(Tracked { orig_lo: oa, orig_hi: ob, cur_lo: a, cur_hi: b, label: tr.label, word: tr.word.clone() });
                continue;
            }
            let mid = 0.5 * (a + b);
            let mut word = tr.word.clone();
            word.push(partition.letter_at(mid));
            let p = map.piece_at(mid);
            stack.push(Tracked {
                orig_lo: oa,
                orig_hi: ob,
                cur_lo: p.apply(a),
                cur_hi: p.apply(b),
                label: tr.label,
                word,
            });
        }
    }
    done.sort_by(|a, b| a.start.total_cmp(&b.start));

    // merge neighbours that continue each other
    let mut merged: Vec<ReturnPiece> = Vec::new();
    for p in done {
        if let Some(q) = merged.last_mut() {
            let cont = q.label == p.label
                && q.word == p.word
                && (q.end - p.start).abs() <= TILING_TOL
                && (q.image_start + q.slope * (p.start - q.start) - p.image_start).abs() <= TILING_TOL
                && (q.slope - p.slope).abs() <= 1e-9 * q.slope;
            if cont {
                q.end = p.end;
                continue;
            }
        }
        merged.push(p);
    }

    // return words per letter, when constant on each renormalized interval
    let mut words: Vec<Option<Word>> = vec![None; n_letters];
    let mut constant = true;
    for p in &merged {
        match &words[p.label as usize] {
            None => words[p.label as usize] = Some(p.word.clone()),
            Some(w) if *w == p.word => {}
            Some(_) => constant = false,
        }
    }
    let words: Option<Vec<Word>> = constant.then(|| words.into_iter().map(|w| w.unwrap_or_default()).collect());
    let matrix = words.as_ref().map(|words| {
        let mut m = IntMatrix::zeros(n_letters);
        for (b, w) in words.iter().enumerate() {
            for &a in w {
                let v = m.get(a as usize, b) + BigInt::from(1);
                m.set(a as usize, b, v);
            }
        }
        m
    });
    let induced = AffineIem::new(
        partition.alphabet.clone(),
        cut,
        merged
            .iter()
            .map(|p| AffinePiece {
                start: p.start,
                end: p.end,
                slope: p.slope,
                image_start: p.image_start,
                letter: p.label,
            })
            .collect(),
    )?;
    Ok(FirstReturn { cut, pieces: merged, induced, matrix, words })
}

#[derive(Clone, Debug, Serialize)]
pub struct SelfSimilarityReport {
    pub is_scaled_copy: bool,
    pub max_residual: f64,
    pub worst_sample: f64,
    pub matrix: Option<IntMatrix>,
    pub substitution_json: String,
    #[serde(skip)]
    pub substitution: Option<Substitution>,
}

/// Checks T(phi(y)) = phi(T_1(y)) on a sample grid of [0, scale), where T_1 is
/// the first return to [0, scale) and phi undoes the renormalization.
pub fn self_similarity_check(
    map: &AffineIem,
    partition: &Partition,
    renorm: Renormalization,
    samples: usize,
) -> Result<SelfSimilarityReport, IemError> {
    let fr = first_return(map, partition, renorm.scale, Some(renorm), DEFAULT_RETURN_BUDGET)?;
    let circle = renorm.rotation != 0.0;
    let mut worst = (0.0f64, 0.0f64);
    for i in 0..samples {
        let y = (i as f64 + 0.5) / samples as f64 * renorm.scale;
        let lhs = map.eval(renorm.unscale(y));
        let rhs = renorm.unscale(fr.induced.eval(y));
        let mut d = (lhs - rhs).abs();
        if circle {
            d = d.min(1.0 - d);
        }
        if d > worst.0 {
            worst = (d, y);
        }
    }
    let sub = fr.words.clone().and_then(|w| Substitution::from_images(partition.alphabet.clone(), w).ok());
    let m_ok = match (&sub, &fr.matrix) {
        (Some(s), Some(m)) => s.abelianization() == m.transpose(),
        _ => false,
    };
    Ok(SelfSimilarityReport {
        is_scaled_copy: worst.0 <= 1e-9 && m_ok,
        max_residual: worst.0,
        worst_sample: worst.1,
        matrix: fr.matrix,
        substitution_json: sub.as_ref().map(|s| s.to_json()).unwrap_or_default(),
        substitution: sub,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_evaluates() {
        let t = Iem::rotation(0.7).unwrap();
        assert!((t.evaluate(0.1).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(t.translations(), vec![0.30000000000000004, -0.7]);
        assert!((t.evaluate(0.0).unwrap() - t.translations()[0]).abs() < 1e-15);
        assert!(t.evaluate(1.0).is_err());
    }

    #[test]
    fn rotation_itinerary() {
        let t = Iem::rotation(0.7).unwrap();
        let (w, hits) = itinerary_lenient(t.map(), 0.1, 0, 3, &t.partition()).unwrap();
        assert_eq!(w.symbols, vec![0, 0, 1]);
        // 0.1 + 0.3 + 0.3 lands on the breakpoint 0.7
        assert_eq!(hits, vec![2]);
        assert!(itinerary(t.map(), 0.1, 0, 3, &t.partition()).is_err());
        let w = itinerary(t.map(), 0.0, 0, 1, &t.partition());
        assert_eq!(w.unwrap().symbols, vec![t.pi0[0]]);
    }

    #[test]
    fn cut_one_is_identity_induction() {
        let t = Iem::rotation(0.61).unwrap();
        let fr = first_return(t.map(), &t.partition(), 1.0, None, DEFAULT_RETURN_BUDGET).unwrap();
        assert_eq!(fr.matrix, Some(IntMatrix::identity(2)));
        assert_eq!(fr.words, Some(vec![vec![0], vec![1]]));
        for i in 0..100 {
            let x = i as f64 / 100.0 + 0.003;
            assert!((fr.induced.eval(x) - t.map().eval(x)).abs() < 1e-14);
        }
    }

    #[test]
    fn json_round_trip() {
        let t = Iem::rotation(0.7).unwrap();
        let back = Iem::from_json(&t.to_json()).unwrap();
        assert_eq!(back, t);
        let f = AffineIem::from_json(&t.map().to_json()).unwrap();
        assert_eq!(f.pieces, t.map().pieces);
    }

    #[test]
    fn non_tiling_rejected() {
        let bad = vec![
            AffinePiece { start: 0.0, end: 0.5, slope: 1.0, image_start: 0.0, letter: 0 },
            AffinePiece { start: 0.5, end: 1.0, slope: 1.0, image_start: 0.4, letter: 1 },
        ];
        assert!(AffineIem::new(vec!['a', 'b'], 1.0, bad).is_err());
    }
}
