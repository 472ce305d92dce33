//! Words, substitutions, prefix-suffix decompositions and gamma-weighted sums.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numberfield::{FieldElement, IntMatrix};

/// Letters are indexes into an alphabet.
pub type Letter = u8;
pub type Word = Vec<Letter>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SubstitutionError {
    #[error("image of {0:?} is empty")]
    EmptyImage(char),
    #[error("letter {0:?} is not in the alphabet")]
    UnknownSymbol(char),
    #[error("letter index {0} is outside the weight vector")]
    UnknownLetter(Letter),
    #[error("alphabet is empty or has more than 255 letters")]
    AlphabetSize,
    #[error("chain breaks at position {0}")]
    BrokenChain(usize),
    #[error("index {n} outside window range [{lo}, {hi}]")]
    OutsideWindow { n: i64, lo: i64, hi: i64 },
    #[error("window too short to desubstitute at level {level}")]
    WindowTooShort { level: usize },
    #[error("ambiguous desubstitution at level {level}")]
    Ambiguous { level: usize },
    #[error("window cannot be parsed into images at level {level}")]
    NotInLanguage { level: usize },
    #[error("bad substitution json: {0}")]
    Json(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Substitution {
    alphabet: Vec<char>,
    images: Vec<Word>,
}

impl Substitution {
    /// Builds from (letter, image) pairs; the alphabet is the sorted set of letters.
    pub fn new(rules: &[(char, &str)]) -> Result<Self, SubstitutionError> {
        let map: BTreeMap<char, &str> = rules.iter().cloned().collect();
        let alphabet: Vec<char> = map.keys().cloned().collect();
        if alphabet.is_empty() || alphabet.len() > 255 {
            return Err(SubstitutionError::AlphabetSize);
        }
        let index = |c: char| {
            alphabet
                .iter()
                .position(|&x| x == c)
                .map(|i| i as Letter)
                .ok_or(SubstitutionError::UnknownSymbol(c))
        };
        let mut images = Vec::with_capacity(alphabet.len());
        for (&a, img) in &map {
            if img.is_empty() {
                return Err(SubstitutionError::EmptyImage(a));
            }
            images.push(img.chars().map(index).collect::<Result<Word, _>>()?);
        }
        Ok(Substitution { alphabet, images })
    }

    /// Builds from an alphabet and the image of each letter, in alphabet order.
    pub fn from_images(alphabet: Vec<char>, images: Vec<Word>) -> Result<Self, SubstitutionError> {
        if alphabet.is_empty() || alphabet.len() > 255 || images.len() != alphabet.len() {
            return Err(SubstitutionError::AlphabetSize);
        }
        for (a, img) in alphabet.iter().zip(&images) {
            if img.is_empty() {
                return Err(SubstitutionError::EmptyImage(*a));
            }
            if let Some(&l) = img.iter().find(|&&l| l as usize >= alphabet.len()) {
                return Err(SubstitutionError::UnknownLetter(l));
            }
        }
        Ok(Substitution { alphabet, images })
    }

    pub fn from_json(s: &str) -> Result<Self, SubstitutionError> {
        let map: BTreeMap<String, String> =
            serde_json::from_str(s).map_err(|e| SubstitutionError::Json(e.to_string()))?;
        let mut rules = Vec::new();
        for (k, v) in &map {
            let mut cs = k.chars();
            match (cs.next(), cs.next()) {
                (Some(c), None) => rules.push((c, v.as_str())),
                _ => return Err(SubstitutionError::Json(format!("key {k:?} is not one letter"))),
            }
        }
        Self::new(&rules)
    }

    pub fn to_json(&self) -> String {
        let map: BTreeMap<String, String> = self
            .alphabet
            .iter()
            .zip(&self.images)
            .map(|(a, w)| (a.to_string(), self.spell(w)))
            .collect();
        serde_json::to_string(&map).expect("string map serializes")
    }

    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    pub fn size(&self) -> usize {
        self.alphabet.len()
    }

    pub fn image(&self, a: Letter) -> &Word {
        &self.images[a as usize]
    }

    pub fn letter(&self, c: char) -> Result<Letter, SubstitutionError> {
        self.alphabet
            .iter()
            .position(|&x| x == c)
            .map(|i| i as Letter)
            .ok_or(SubstitutionError::UnknownSymbol(c))
    }

    pub fn parse(&self, s: &str) -> Result<Word, SubstitutionError> {
        s.chars().map(|c| self.letter(c)).collect()
    }

    pub fn spell(&self, w: &[Letter]) -> String {
        w.iter().map(|&l| self.alphabet[l as usize]).collect()
    }

    pub fn apply(&self, w: &[Letter]) -> Word {
        let mut out = Vec::with_capacity(w.len() * 2);
        for &l in w {
            out.extend_from_slice(&self.images[l as usize]);
        }
        out
    }

    pub fn iterate(&self, w: &[Letter], n: usize) -> Word {
        let mut cur = w.to_vec();
        for _ in 0..n {
            cur = self.apply(&cur);
        }
        cur
    }

    /// Length of sigma^n(w) without building the word.
    pub fn iterate_len(&self, w: &[Letter], n: usize) -> u128 {
        let mut counts = vec![0u128; self.size()];
        for &l in w {
            counts[l as usize] += 1;
        }
        for _ in 0..n {
            let mut next = vec![0u128; self.size()];
            for (a, &c) in counts.iter().enumerate() {
                for &b in &self.images[a] {
                    next[b as usize] += c;
                }
            }
            counts = next;
        }
        counts.iter().sum()
    }

    pub fn power(&self, k: usize) -> Substitution {
        Substitution {
            alphabet: self.alphabet.clone(),
            images: (0..self.size()).map(|a| self.iterate(&[a as Letter], k)).collect(),
        }
    }

    /// M[a][b] = number of occurrences of b in sigma(a).
    pub fn abelianization(&self) -> IntMatrix {
        let n = self.size();
        let mut m = IntMatrix::zeros(n);
        for (a, img) in self.images.iter().enumerate() {
            for &b in img {
                let v = m.get(a, b as usize) + BigInt::from(1);
                m.set(a, b as usize, v);
            }
        }
        m
    }

    /// Least n <= n_max with M^n strictly positive.
    pub fn primitivity_exponent(&self, n_max: u32) -> Option<u32> {
        let m = self.abelianization();
        let mut p = m.clone();
        for n in 1..=n_max {
            if p.is_strictly_positive() {
                return Some(n);
            }
            p = p.mul(&m);
        }
        None
    }

    pub fn is_primitive(&self, n_max: u32) -> bool {
        self.primitivity_exponent(n_max).is_some()
    }

    /// All splittings sigma(a) = p c s, ordered by |p|.
    pub fn decompositions(&self, a: Letter) -> Vec<PssTriple> {
        let img = &self.images[a as usize];
        (0..img.len())
            .map(|k| PssTriple {
                parent: a,
                prefix: img[..k].to_vec(),
                center: img[k],
                suffix: img[k + 1..].to_vec(),
            })
            .collect()
    }
}

/// sigma(parent) = prefix . center . suffix
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PssTriple {
    pub parent: Letter,
    pub prefix: Word,
    pub center: Letter,
    pub suffix: Word,
}

impl PssTriple {
    pub fn is_valid(&self, sigma: &Substitution) -> bool {
        let mut w = self.prefix.clone();
        w.push(self.center);
        w.extend_from_slice(&self.suffix);
        (self.parent as usize) < sigma.size() && *sigma.image(self.parent) == w
    }

    pub fn display(&self, sigma: &Substitution) -> String {
        format!(
            "({},{},{})",
            sigma.spell(&self.prefix),
            sigma.alphabet()[self.center as usize],
            sigma.spell(&self.suffix)
        )
    }
}

/// An element of the path space rooted at `parent`: a finite chain, or
/// `head` followed by `period` repeated forever.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PssPath {
    pub parent: Letter,
    pub head: Vec<PssTriple>,
    pub period: Vec<PssTriple>,
}

impl PssPath {
    pub fn finite(sigma: &Substitution, parent: Letter, head: Vec<PssTriple>) -> Result<Self, SubstitutionError> {
        let p = PssPath { parent, head, period: Vec::new() };
        p.validate(sigma)?;
        Ok(p)
    }

    pub fn eventually_periodic(
        sigma: &Substitution,
        parent: Letter,
        head: Vec<PssTriple>,
        period: Vec<PssTriple>,
    ) -> Result<Self, SubstitutionError> {
        let p = PssPath { parent, head, period };
        p.validate(sigma)?;
        Ok(p)
    }

    /// Extends a finite chain by empty prefixes, c_{m+1} the first letter of
    /// sigma(c_m), until the center letters cycle.
    pub fn with_empty_prefix_tail(
        sigma: &Substitution,
        parent: Letter,
        head: Vec<PssTriple>,
    ) -> Result<Self, SubstitutionError> {
        let start = head.last().map(|t| t.center).unwrap_or(parent);
        let mut seen: Vec<Letter> = vec![start];
        let mut tail: Vec<PssTriple> = Vec::new();
        let mut c = start;
        loop {
            let t = sigma.decompositions(c).into_iter().next().expect("images are nonempty");
            c = t.center;
            tail.push(t);
            if let Some(pos) = seen.iter().position(|&x| x == c) {
                let mut full = head;
                full.extend(tail[..pos].iter().cloned());
                let period = tail[pos..].to_vec();
                return Self::eventually_periodic(sigma, parent, full, period);
            }
            seen.push(c);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.period.is_empty()
    }

    pub fn validate(&self, sigma: &Substitution) -> Result<(), SubstitutionError> {
        let mut prev = self.parent;
        let seq = self.head.iter().chain(&self.period).chain(self.period.first());
        for (k, t) in seq.enumerate() {
            if t.parent != prev || !t.is_valid(sigma) {
                return Err(SubstitutionError::BrokenChain(k));
            }
            prev = t.center;
        }
        Ok(())
    }

    /// First n triples, unrolling the period as needed.
    pub fn truncate(&self, n: usize) -> Vec<PssTriple> {
        let mut out: Vec<PssTriple> = self.head.iter().take(n).cloned().collect();
        while out.len() < n && !self.period.is_empty() {
            let k = (out.len() - self.head.len()) % self.period.len();
            out.push(self.period[k].clone());
        }
        out
    }

    pub fn display(&self, sigma: &Substitution) -> String {
        let mut s: String = self.head.iter().map(|t| t.display(sigma)).collect();
        if !self.period.is_empty() {
            s.push('[');
            s.extend(self.period.iter().map(|t| t.display(sigma)));
            s.push_str("]*");
        }
        s
    }
}

/// gamma(w) = gamma_{w_0} + ... + gamma_{w_{n-1}}
pub fn gamma_weight<F: FieldElement>(w: &[Letter], gamma: &[F]) -> Result<F, SubstitutionError> {
    let mut acc = F::zero();
    for &l in w {
        let g = gamma.get(l as usize).ok_or(SubstitutionError::UnknownLetter(l))?;
        acc = acc.add(g);
    }
    Ok(acc)
}

/// A finite view of a two-sided sequence; `symbols[origin]` is omega_0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoSidedWindow {
    pub symbols: Word,
    pub origin: usize,
}

impl TwoSidedWindow {
    pub fn new(symbols: Word, origin: usize) -> Self {
        assert!(origin <= symbols.len(), "origin past the end of the window");
        TwoSidedWindow { symbols, origin }
    }

    /// Smallest and largest n for which gamma_n is defined.
    pub fn gamma_range(&self) -> (i64, i64) {
        (-(self.origin as i64), (self.symbols.len() - self.origin) as i64)
    }

    pub fn get(&self, n: i64) -> Option<Letter> {
        let i = self.origin as i64 + n;
        if i < 0 {
            return None;
        }
        self.symbols.get(i as usize).copied()
    }

    pub fn left_len(&self) -> usize {
        self.origin
    }

    pub fn right_len(&self) -> usize {
        self.symbols.len() - self.origin
    }

    /// Keeps at most `left` symbols before and `right` symbols from the origin on.
    pub fn trimmed(&self, left: usize, right: usize) -> TwoSidedWindow {
        let lo = self.origin.saturating_sub(left);
        let hi = (self.origin + right).min(self.symbols.len());
        TwoSidedWindow::new(self.symbols[lo..hi].to_vec(), self.origin - lo)
    }

    /// The origin moved `k` symbols to the right.
    pub fn shifted(&self, k: i64) -> TwoSidedWindow {
        let o = (self.origin as i64 + k).clamp(0, self.symbols.len() as i64) as usize;
        TwoSidedWindow::new(self.symbols.clone(), o)
    }

    pub fn display(&self, sigma: &Substitution) -> String {
        format!(
            "{}\u{b7}{}",
            sigma.spell(&self.symbols[..self.origin]),
            sigma.spell(&self.symbols[self.origin..])
        )
    }
}

/// gamma_n(omega) for every n in the window range, starting at n = lo.
pub fn birkhoff_gamma(window: &TwoSidedWindow, gamma: &[Complex64]) -> Result<Vec<Complex64>, SubstitutionError> {
    let mut prefix = Vec::with_capacity(window.symbols.len() + 1);
    prefix.push(Complex64::new(0.0, 0.0));
    let mut acc = Complex64::new(0.0, 0.0);
    for &l in &window.symbols {
        acc += gamma.get(l as usize).ok_or(SubstitutionError::UnknownLetter(l))?;
        prefix.push(acc);
    }
    let base = prefix[window.origin];
    Ok(prefix.into_iter().map(|p| p - base).collect())
}

/// gamma_n(omega) for a single n.
pub fn gamma_n(window: &TwoSidedWindow, gamma: &[Complex64], n: i64) -> Result<Complex64, SubstitutionError> {
    let (lo, hi) = window.gamma_range();
    if n < lo || n > hi {
        return Err(SubstitutionError::OutsideWindow { n, lo, hi });
    }
    let o = window.origin;
    if n >= 0 {
        gamma_weight(&window.symbols[o..o + n as usize], gamma)
    } else {
        let s = gamma_weight(&window.symbols[(o as i64 + n) as usize..o], gamma)?;
        Ok(-s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecognizabilityConfig {
    /// Window radius needed at depth d is `factor * growth^d`.
    pub factor: f64,
    pub growth: f64,
}

impl RecognizabilityConfig {
    pub fn for_substitution(perron: f64) -> Self {
        RecognizabilityConfig { factor: 4.0, growth: perron }
    }

    pub fn radius(&self, depth: usize) -> usize {
        (self.factor * self.growth.powi(depth as i32)).ceil() as usize
    }
}

/// Counts of parses of `w` into sigma-images, where the first and last
/// images may be cut by the window edges. `fwd[p]` counts parses of w[..p]
/// ending with a cut at p, `bwd[p]` counts completions from a cut at p.
struct ParseCounts {
    fwd: Vec<u128>,
    bwd: Vec<u128>,
    total: u128,
}

fn image_matches(sigma: &Substitution, w: &[Letter], x: Letter, start: i64) -> bool {
    let n = w.len() as i64;
    sigma.image(x).iter().enumerate().all(|(k, &c)| {
        let p = start + k as i64;
        p < 0 || p >= n || w[p as usize] == c
    })
}

fn count_parses(sigma: &Substitution, w: &[Letter]) -> ParseCounts {
    let n = w.len();
    let letters = 0..sigma.size() as Letter;
    let mut bwd = vec![0u128; n + 1];
    bwd[n] = 1;
    for pos in (0..n).rev() {
        let mut c = 0u128;
        for x in letters.clone() {
            if image_matches(sigma, w, x, pos as i64) {
                let end = (pos + sigma.image(x).len()).min(n);
                c = c.saturating_add(bwd[end]);
            }
        }
        bwd[pos] = c;
    }
    let mut fwd = vec![0u128; n + 1];
    fwd[0] = 1;
    let mut total = 0u128;
    // first image cut by the left edge
    for x in letters.clone() {
        let len = sigma.image(x).len() as i64;
        for off in 1..len {
            if image_matches(sigma, w, x, -off) {
                let end = len - off;
                if end >= n as i64 {
                    total = total.saturating_add(1);
                } else {
                    fwd[end as usize] = fwd[end as usize].saturating_add(1);
                }
            }
        }
    }
    for pos in 0..n {
        if fwd[pos] == 0 {
            continue;
        }
        for x in letters.clone() {
            if image_matches(sigma, w, x, pos as i64) {
                let end = pos + sigma.image(x).len();
                if end >= n {
                    total = total.saturating_add(fwd[pos]);
                } else {
                    fwd[end] = fwd[end].saturating_add(fwd[pos]);
                }
            }
        }
    }
    ParseCounts { fwd, bwd, total }
}

/// Desubstitutes the window `depth` times around its origin. Element m of
/// the result is (p_m, c_m, s_m) with parent c_{m+1}.
pub fn prefix_suffix_decompose(
    sigma: &Substitution,
    window: &TwoSidedWindow,
    depth: usize,
) -> Result<Vec<PssTriple>, SubstitutionError> {
    let mut chain = Vec::with_capacity(depth);
    let mut word = window.symbols.clone();
    let mut origin = window.origin;
    for level in 0..depth {
        let n = word.len();
        if origin >= n {
            return Err(SubstitutionError::WindowTooShort { level });
        }
        let pc = count_parses(sigma, &word);
        if pc.total == 0 {
            return Err(SubstitutionError::NotInLanguage { level });
        }
        if pc.total == u128::MAX {
            return Err(SubstitutionError::Ambiguous { level });
        }
        // number of parses using the full image of x at `start`
        let through = |x: Letter, start: usize| -> u128 {
            let end = start + sigma.image(x).len();
            if end > n || !image_matches(sigma, &word, x, start as i64) {
                return 0;
            }
            pc.fwd[start].saturating_mul(pc.bwd[end])
        };
        let max_len = (0..sigma.size()).map(|a| sigma.image(a as Letter).len()).max().unwrap_or(1);
        let mut covering = Vec::new();
        for start in origin.saturating_sub(max_len - 1)..=origin {
            for x in 0..sigma.size() as Letter {
                if start + sigma.image(x).len() > origin {
                    let c = through(x, start);
                    if c > 0 {
                        covering.push((x, start, c));
                    }
                }
            }
        }
        let (ox, ostart) = match covering.as_slice() {
            [(x, s, c)] if *c == pc.total => (*x, *s),
            [] => return Err(SubstitutionError::WindowTooShort { level }),
            _ => return Err(SubstitutionError::Ambiguous { level }),
        };
        // the image ending at `end` (or starting at `start`) used by every parse
        let shared_ending = |end: usize| -> Option<(Letter, usize)> {
            (0..sigma.size() as Letter).find_map(|x| {
                let len = sigma.image(x).len();
                (end >= len && through(x, end - len) == pc.total).then(|| (x, end - len))
            })
        };
        let shared_starting = |start: usize| -> Option<Letter> {
            (0..sigma.size() as Letter).find(|&x| through(x, start) == pc.total)
        };
        let mut left = Vec::new();
        let mut cut = ostart;
        while let Some((x, s)) = shared_ending(cut) {
            left.push(x);
            cut = s;
        }
        left.reverse();
        let mut next = left.clone();
        next.push(ox);
        let mut cut = ostart + sigma.image(ox).len();
        while let Some(x) = shared_starting(cut) {
            next.push(x);
            cut += sigma.image(x).len();
        }
        let img = sigma.image(ox);
        let k = origin - ostart;
        chain.push(PssTriple {
            parent: ox,
            prefix: img[..k].to_vec(),
            center: img[k],
            suffix: img[k + 1..].to_vec(),
        });
        origin = left.len();
        word = next;
    }
    Ok(chain)
}

/// sigma^{k}(p_k) ... sigma(p_1) p_0 and c_0 s_0 sigma(s_1) ... sigma^k(s_k)
/// for a decomposed chain; the left part ends just before the origin.
pub fn central_part(sigma: &Substitution, chain: &[PssTriple]) -> (Word, Word) {
    let mut left = Vec::new();
    let mut right = Vec::new();
    if let Some(t0) = chain.first() {
        right.push(t0.center);
    }
    for (m, t) in chain.iter().enumerate() {
        let mut l = sigma.iterate(&t.prefix, m);
        l.extend_from_slice(&left);
        left = l;
        right.extend(sigma.iterate(&t.suffix, m));
    }
    (left, right)
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .alphabet
            .iter()
            .zip(&self.images)
            .map(|(a, w)| format!("{a}->{}", self.spell(w)))
            .collect();
        write!(f, "{}", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn fib() -> Substitution {
        Substitution::new(&[('a', "ab"), ('b', "a")]).unwrap()
    }

    #[test]
    fn abelianization_examples() {
        let m = fib().abelianization();
        assert_eq!(m, IntMatrix::from_rows(&[vec![1, 1], vec![1, 0]]).unwrap());
        let id = Substitution::new(&[('a', "a"), ('b', "b")]).unwrap();
        assert_eq!(id.abelianization(), IntMatrix::identity(2));
        assert!(!id.is_primitive(10));
        assert_eq!(fib().primitivity_exponent(10), Some(2));
    }

    #[test]
    fn decompositions_one_per_position() {
        let s = Substitution::new(&[('a', "abc"), ('b', "a"), ('c', "b")]).unwrap();
        let d = s.decompositions(0);
        assert_eq!(d.len(), 3);
        assert!(d.iter().all(|t| t.is_valid(&s)));
        assert_eq!(d[0].prefix.len(), 0);
        assert_eq!(d[2].suffix.len(), 0);
    }

    #[test]
    fn birkhoff_example() {
        let s = fib();
        let w = TwoSidedWindow::new(s.parse("abba").unwrap(), 2);
        let g = [Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0)];
        let sums = birkhoff_gamma(&w, &g).unwrap();
        let (lo, _) = w.gamma_range();
        let at = |n: i64| sums[(n - lo) as usize];
        assert_eq!(at(0), Complex64::new(0.0, 0.0));
        assert_eq!(at(2), Complex64::new(1.0, -1.0));
        assert_eq!(at(-1), Complex64::new(0.0, 1.0));
        assert_eq!(gamma_n(&w, &g, -1).unwrap(), Complex64::new(0.0, 1.0));
        assert!(gamma_n(&w, &g, 5).is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = fib();
        let j = s.to_json();
        assert_eq!(j, r#"{"a":"ab","b":"a"}"#);
        assert_eq!(Substitution::from_json(&j).unwrap(), s);
    }

    #[test]
    fn aligned_image_decomposes_with_empty_prefixes() {
        let s = fib();
        let w = s.iterate(&[0], 12);
        // keep a margin on the left so the origin is recognizable
        let pre = s.iterate(&[1], 12);
        let mut sym = pre.clone();
        sym.extend(&w);
        // b.a is a legal two-sided word: the fixed point of sigma^2 passes through it
        let win = TwoSidedWindow::new(sym, pre.len());
        let chain = prefix_suffix_decompose(&s, &win, 6).unwrap();
        assert!(chain.iter().all(|t| t.prefix.is_empty()));
        let (l, r) = central_part(&s, &chain);
        let o = win.origin;
        assert_eq!(&win.symbols[o - l.len()..o], &l[..]);
        assert_eq!(&win.symbols[o..o + r.len()], &r[..]);
    }

    #[test]
    fn empty_prefix_tail_is_periodic() {
        let s = fib();
        let p = PssPath::with_empty_prefix_tail(&s, 1, vec![]).unwrap();
        assert!(!p.is_finite());
        assert!(p.truncate(7).iter().all(|t| t.prefix.is_empty()));
        assert_eq!(s.iterate_len(&[0], 10).to_u64(), Some(s.iterate(&[0], 10).len() as u64));
    }
}
