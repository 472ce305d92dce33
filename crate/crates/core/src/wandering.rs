//! From a minimal sequence to an affine interval exchange with a wandering
//! interval: locate the coded point, put an atomic measure on its orbit,
//! blow up the atoms into gaps and read off the affine map.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::iem::{AffineIem, AffinePiece, IemError, Partition, BOUNDARY_TOL};
use crate::substitution::{birkhoff_gamma, Letter, SubstitutionError, TwoSidedWindow};

/// Gaps shorter than this are not used for pointwise checks.
pub const GAP_FLOOR: f64 = 1e-12;
/// Absolute resolution of g, a running sum of at most ~10^5 terms in [0, 1].
pub const MASS_ROUNDING: f64 = 64.0 * f64::EPSILON;

#[derive(Debug, Error)]
pub enum WanderingError {
    #[error("no point has the window's itinerary (empty after {0} symbols)")]
    EmptyCylinder(usize),
    #[error("window covers n in [{lo}, {hi}], needs |n| <= {n}")]
    WindowTooShort { lo: i64, hi: i64, n: usize },
    #[error("weight at n = {0} is not a positive finite number")]
    BadWeight(i64),
    #[error("orbit points at n = {0} and n = {1} coincide")]
    OrbitCollision(i64, i64),
    #[error("itinerary of the located point differs from the window at n = {0}")]
    ItineraryMismatch(i64),
    #[error(transparent)]
    Iem(#[from] IemError),
    #[error(transparent)]
    Substitution(#[from] SubstitutionError),
}

/// Pieces on which T is a translation and the partition letter is constant.
pub fn refined_pieces(map: &AffineIem, partition: &Partition) -> Vec<(f64, f64, Letter)> {
    let mut cuts: Vec<f64> = map.breakpoints();
    cuts.extend(partition.boundaries());
    cuts.push(0.0);
    cuts.push(map.domain);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() <= BOUNDARY_TOL);
    cuts.windows(2)
        .map(|w| (w[0], w[1], partition.letter_at(0.5 * (w[0] + w[1]))))
        .collect()
}

/// Image of [lo, hi) under the map, split where it is discontinuous.
fn image_intervals(map: &AffineIem, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut a = lo;
    while a < hi - BOUNDARY_TOL {
        let p = map.piece_at(a);
        let b = p.end.min(hi);
        out.push((p.apply(a), p.apply(a) + p.slope * (b - a)));
        a = b;
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct LocatedPoint {
    pub t: f64,
    /// Width of the cylinder the point was taken from.
    pub width: f64,
    pub symbols_used: usize,
}

/// The point whose itinerary over window positions [from, from + len) matches;
/// returned as the position of index 0.
pub fn locate_point(
    map: &AffineIem,
    partition: &Partition,
    window: &TwoSidedWindow,
    from: i64,
    len: usize,
) -> Result<LocatedPoint, WanderingError> {
    let (lo, hi) = window.gamma_range();
    if len == 0 || from < lo || from + len as i64 > hi {
        return Err(WanderingError::WindowTooShort { lo, hi, n: len });
    }
    let letter = |m: usize| window.get(from + m as i64).expect("inside window");
    let mut u = partition.intervals_of(letter(0));
    for m in 1..len {
        let targets = partition.intervals_of(letter(m));
        let mut next = Vec::new();
        for &(a, b) in &u {
            for (c, d) in image_intervals(map, a, b) {
                for &(x, y) in &targets {
                    let (p, q) = (c.max(x), d.min(y));
                    if q - p > BOUNDARY_TOL {
                        next.push((p, q));
                    }
                }
            }
        }
        if next.is_empty() {
            return Err(WanderingError::EmptyCylinder(m));
        }
        u = next;
    }
    let &(a, b) = u
        .iter()
        .max_by(|x, y| (x.1 - x.0).total_cmp(&(y.1 - y.0)))
        .expect("nonempty");
    let mut t = 0.5 * (a + b);
    // t is the position of index from + len - 1; move it to index 0
    let steps = from + len as i64 - 1;
    if steps > 0 {
        for _ in 0..steps {
            t = map.inverse(t);
        }
    } else {
        for _ in 0..(-steps) {
            t = map.eval(t);
        }
    }
    Ok(LocatedPoint { t, width: b - a, symbols_used: len })
}

#[derive(Clone, Debug, Serialize)]
pub struct Atom {
    pub n: i64,
    pub x: f64,
    /// Normalized mass exp(-Re gamma_n) / K.
    pub weight: f64,
    pub letter: Letter,
}

#[derive(Clone, Debug, Serialize)]
pub struct AtomicMeasure {
    pub base: f64,
    pub n: usize,
    /// Atoms for n = -N..=N in order of n.
    pub atoms: Vec<Atom>,
    /// Truncated normalization sum of exp(-Re gamma_n).
    pub k_total: f64,
    /// Normalized masses of the two extreme atoms n = -N and n = N.
    pub edge_mass: [f64; 2],
    /// Largest normalized mass among atoms with |n| > N/2.
    pub outer_mass: f64,
}

impl AtomicMeasure {
    pub fn atom(&self, n: i64) -> Option<&Atom> {
        let i = n + self.n as i64;
        if i < 0 {
            return None;
        }
        self.atoms.get(i as usize)
    }

    /// Bound on the transport error caused by truncation.
    pub fn tail_mass(&self) -> f64 {
        self.edge_mass[0] + self.edge_mass[1]
    }
}

pub fn build_measure(
    map: &AffineIem,
    partition: &Partition,
    t: f64,
    window: &TwoSidedWindow,
    gamma: &[Complex64],
    n: usize,
) -> Result<AtomicMeasure, WanderingError> {
    let (lo, hi) = window.gamma_range();
    let ni = n as i64;
    if lo > -ni || hi < ni + 1 {
        return Err(WanderingError::WindowTooShort { lo, hi, n });
    }
    let sums = birkhoff_gamma(window, gamma)?;
    let re = |k: i64| sums[(k - lo) as usize].re;
    let mut xs = vec![0.0; 2 * n + 1];
    xs[n] = t;
    for k in 1..=n {
        xs[n + k] = map.eval(xs[n + k - 1]);
        xs[n - k] = map.inverse(xs[n - k + 1]);
    }
    let raw: Vec<f64> = (-ni..=ni).map(|k| (-re(k)).exp()).collect();
    for (i, w) in raw.iter().enumerate() {
        if !(w.is_finite() && *w > 0.0) {
            return Err(WanderingError::BadWeight(i as i64 - ni));
        }
    }
    let k_total: f64 = raw.iter().sum();
    let mut atoms: Vec<Atom> = (0..raw.len())
        .map(|i| Atom { n: i as i64 - ni, x: xs[i], weight: raw[i] / k_total, letter: partition.letter_at(xs[i]) })
        .collect();
    for a in &atoms {
        if window.get(a.n) != Some(a.letter) {
            return Err(WanderingError::ItineraryMismatch(a.n));
        }
    }
    let mut order: Vec<usize> = (0..atoms.len()).collect();
    order.sort_by(|&i, &j| atoms[i].x.total_cmp(&atoms[j].x));
    for w in order.windows(2) {
        if atoms[w[1]].x - atoms[w[0]].x <= 0.0 {
            return Err(WanderingError::OrbitCollision(atoms[w[0]].n, atoms[w[1]].n));
        }
    }
    let edge_mass = [atoms[0].weight, atoms[2 * n].weight];
    let outer_mass = atoms
        .iter()
        .filter(|a| a.n.unsigned_abs() as usize > n / 2)
        .map(|a| a.weight)
        .fold(0.0, f64::max);
    atoms.shrink_to_fit();
    Ok(AtomicMeasure { base: t, n, atoms, k_total, edge_mass, outer_mass })
}

/// g(t) = mu([0, t)) and its monotone inverse h, for a finite atomic measure.
#[derive(Clone, Debug, Serialize)]
pub struct ConjugacyPair {
    /// Atom positions in increasing order.
    pub xs: Vec<f64>,
    /// n of each sorted atom.
    pub ns: Vec<i64>,
    /// g just before each sorted atom; the gap of atom i is [starts[i], starts[i] + weights[i]).
    pub starts: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ConjugacyPair {
    pub fn g(&self, t: f64) -> f64 {
        let k = self.xs.partition_point(|&x| x < t);
        if k == self.xs.len() {
            self.starts.last().map(|s| s + self.weights.last().unwrap()).unwrap_or(0.0)
        } else {
            self.starts[k]
        }
    }

    /// Sorted index of the atom whose gap contains y.
    pub fn gap_index(&self, y: f64) -> usize {
        self.starts.partition_point(|&s| s <= y).saturating_sub(1)
    }

    pub fn h(&self, y: f64) -> f64 {
        self.xs[self.gap_index(y)]
    }

    /// (start, end, n) of every gap in increasing order.
    pub fn gaps(&self) -> Vec<(f64, f64, i64)> {
        (0..self.xs.len()).map(|i| (self.starts[i], self.starts[i] + self.weights[i], self.ns[i])).collect()
    }

    pub fn gap_of(&self, n: i64) -> Option<(f64, f64)> {
        self.ns.iter().position(|&m| m == n).map(|i| (self.starts[i], self.starts[i] + self.weights[i]))
    }
}

pub fn build_conjugacy(mu: &AtomicMeasure) -> ConjugacyPair {
    let mut order: Vec<usize> = (0..mu.atoms.len()).collect();
    order.sort_by(|&i, &j| mu.atoms[i].x.total_cmp(&mu.atoms[j].x));
    let mut starts = Vec::with_capacity(order.len());
    let mut acc = 0.0;
    for &i in &order {
        starts.push(acc);
        acc += mu.atoms[i].weight;
    }
    ConjugacyPair {
        xs: order.iter().map(|&i| mu.atoms[i].x).collect(),
        ns: order.iter().map(|&i| mu.atoms[i].n).collect(),
        weights: order.iter().map(|&i| mu.atoms[i].weight).collect(),
        starts,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SlopeRow {
    pub letter: char,
    pub slope: f64,
    pub expected: f64,
    pub rel_error: f64,
    pub domain_len: f64,
    pub image_len: f64,
    /// Relative rounding error of the piece's endpoints: eps / min(domain, image).
    pub condition: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Synthesis {
    pub f: AffineIem,
    pub rows: Vec<SlopeRow>,
    pub max_rel_error: f64,
}

/// f = h^{-1} T h: on the blow-up of each translation piece of T, the affine
/// map onto the blow-up of its image.
pub fn synthesize_affine(
    map: &AffineIem,
    partition: &Partition,
    conj: &ConjugacyPair,
    gamma: &[Complex64],
) -> Result<Synthesis, WanderingError> {
    let mut pieces = Vec::new();
    let mut rows = Vec::new();
    for (s, e, a) in refined_pieces(map, partition) {
        let d0 = conj.g(s);
        let d1 = conj.g(e);
        if d1 - d0 <= 0.0 {
            continue;
        }
        let ts = map.eval(s);
        let i0 = conj.g(ts);
        let i1 = conj.g(ts + (e - s));
        let slope = (i1 - i0) / (d1 - d0);
        let expected = (-gamma[a as usize].re).exp();
        rows.push(SlopeRow {
            letter: partition.alphabet[a as usize],
            slope,
            expected,
            rel_error: (slope / expected - 1.0).abs(),
            domain_len: d1 - d0,
            image_len: i1 - i0,
            condition: f64::EPSILON / (d1 - d0).min(i1 - i0),
        });
        pieces.push(AffinePiece { start: d0, end: d1, slope, image_start: i0, letter: a });
    }
    // close the last piece exactly at the total mass
    let total = conj.g(f64::INFINITY);
    if let Some(p) = pieces.last_mut() {
        p.end = total;
    }
    let f = AffineIem::new(partition.alphabet.clone(), total, pieces)?;
    let max_rel_error = rows.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    Ok(Synthesis { f, rows, max_rel_error })
}

#[derive(Clone, Debug, Serialize)]
pub struct SemiConjugacyReport {
    pub checked: usize,
    pub skipped: usize,
    pub max_residual: f64,
    pub worst_n: i64,
}

/// max over atoms of |h(f(y)) - T(h(y))| with y the midpoint of the atom's gap.
pub fn semi_conjugacy_check(map: &AffineIem, f: &AffineIem, mu: &AtomicMeasure, conj: &ConjugacyPair) -> SemiConjugacyReport {
    let res: Vec<Option<(f64, i64)>> = (0..conj.xs.len())
        .into_par_iter()
        .map(|i| {
            let n = conj.ns[i];
            let next = mu.atom(n + 1)?;
            if conj.weights[i] < GAP_FLOOR || next.weight < GAP_FLOOR {
                return None;
            }
            let y = conj.starts[i] + 0.5 * conj.weights[i];
            let r = (conj.h(f.eval(y)) - map.eval(conj.h(y))).abs();
            Some((r, n))
        })
        .collect();
    let checked = res.iter().flatten().count();
    let (max_residual, worst_n) = res.iter().flatten().fold((0.0, 0), |acc, &(r, n)| if r > acc.0 { (r, n) } else { acc });
    SemiConjugacyReport { checked, skipped: res.len() - checked, max_residual, worst_n }
}

#[derive(Clone, Debug, Serialize)]
pub struct TransportReport {
    pub samples: usize,
    /// max of |mu(TJ) - l_a mu(J)| - 1e-6 l_a mu(J), to be compared with the tail mass.
    pub max_excess: f64,
    /// Over samples with l_a mu(J) >= GAP_FLOOR.
    pub max_rel_error: f64,
    pub tail_mass: f64,
    pub rounding: f64,
    pub passed: bool,
}

/// mu(T J) = l_a mu(J) for random unions J of consecutive atoms inside one piece with letter a.
pub fn transport_check(
    map: &AffineIem,
    partition: &Partition,
    conj: &ConjugacyPair,
    mu: &AtomicMeasure,
    gamma: &[Complex64],
    samples: usize,
    seed: u64,
) -> TransportReport {
    let pieces = refined_pieces(map, partition);
    let piece_of = |x: f64| pieces.partition_point(|p| p.0 <= x).saturating_sub(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = conj.xs.len();
    let mut max_excess = f64::NEG_INFINITY;
    let mut max_rel = 0.0f64;
    let mut done = 0;
    let mut tries = 0;
    while done < samples && tries < 100 * samples && m >= 2 {
        tries += 1;
        let i = rng.gen_range(0..m - 1);
        let j = (i + rng.gen_range(1..=20)).min(m - 1);
        let p = piece_of(conj.xs[i]);
        if piece_of(conj.xs[j]) != p || pieces[p].0 > conj.xs[i] {
            continue;
        }
        let (lo, hi) = (conj.xs[i], conj.xs[j]);
        let mu_j: f64 = conj.weights[i..j].iter().sum();
        let tl = map.eval(lo);
        let mu_tj = conj.g(tl + (hi - lo)) - conj.g(tl);
        let l = (-gamma[pieces[p].2 as usize].re).exp();
        let err = (mu_tj - l * mu_j).abs();
        max_excess = max_excess.max(err - 1e-6 * l * mu_j);
        if l * mu_j >= GAP_FLOOR {
            max_rel = max_rel.max(err / (l * mu_j));
        }
        done += 1;
    }
    let tail_mass = mu.tail_mass();
    TransportReport {
        samples: done,
        max_excess,
        max_rel_error: max_rel,
        tail_mass,
        rounding: MASS_ROUNDING,
        passed: done > 0 && max_excess <= tail_mass + MASS_ROUNDING,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WanderingReport {
    pub gap: (f64, f64),
    pub gap_atom: i64,
    pub n_orbit: usize,
    /// max over k of the endpoint distance between f^{±1}(G_k) and G_{k±1},
    /// G_k being the gap of atom gap_atom + k
    pub step_residual: f64,
    pub disjoint: bool,
    pub first_overlap: Option<(i64, i64)>,
    pub total_length: f64,
    /// max | |G_n| - |J| prod of slopes along the orbit |, absolute since
    /// short gaps carry the rounding of their endpoints
    pub length_residual: f64,
    /// max |h(f^n J) - T^n(h(J))|
    pub collapse_residual: f64,
    /// Largest endpoint drift of f^n(J) computed by plain iteration; informational.
    pub iteration_drift: f64,
    pub passed: bool,
}

/// Image of [a, b) under an affine IEM, assuming it lies in one piece.
fn interval_image(f: &AffineIem, a: f64, b: f64) -> (f64, f64, f64) {
    let p = f.piece_at(a);
    let s = p.apply(a);
    (s, s + p.slope * (b - a), p.slope)
}

fn interval_preimage(f: &AffineIem, a: f64, b: f64) -> (f64, f64, f64) {
    let s = f.inverse(a);
    let p = f.piece_at(s);
    (s, s + (b - a) / p.slope, p.slope)
}

/// Step tolerance for matching f(G_k) with G_{k+1}.
pub const STEP_TOL: f64 = 1e-12;

/// The orbit f^n(J), |n| <= n_orbit, of the gap J of atom `gap_atom`, built
/// one step at a time from the gaps of the neighbouring atoms.
pub fn verify_wandering(
    f: &AffineIem,
    map: &AffineIem,
    conj: &ConjugacyPair,
    gap_atom: i64,
    n_orbit: usize,
) -> Option<WanderingReport> {
    let gap = conj.gap_of(gap_atom)?;
    let k_max = n_orbit as i64;
    // gaps of the atoms along the orbit, when present
    let gaps: Vec<(i64, (f64, f64))> = (-k_max..=k_max).filter_map(|k| conj.gap_of(gap_atom + k).map(|g| (k, g))).collect();
    let gap_at = |k: i64| gaps.iter().find(|x| x.0 == k).map(|x| x.1);
    let mut orbit: Vec<(i64, f64, f64)> = vec![(0, gap.0, gap.1)];
    let mut step_residual = 0.0f64;
    let mut log_slope_fwd = 0.0;
    let mut log_slope_bwd = 0.0;
    let mut length_residual = 0.0f64;
    let j_len = gap.1 - gap.0;
    for k in 1..=k_max {
        if let Some(g) = gap_at(k - 1) {
            let (a, b, sl) = interval_image(f, g.0, g.1);
            log_slope_fwd += sl.ln();
            if let Some(h) = gap_at(k) {
                step_residual = step_residual.max((a - h.0).abs().max((b - h.1).abs()));
                length_residual = length_residual.max(((h.1 - h.0) - j_len * log_slope_fwd.exp()).abs());
            }
            orbit.push((k, a, b));
        }
        if let Some(g) = gap_at(1 - k) {
            let (a, b, sl) = interval_preimage(f, g.0, g.1);
            log_slope_bwd -= sl.ln();
            if let Some(h) = gap_at(-k) {
                step_residual = step_residual.max((a - h.0).abs().max((b - h.1).abs()));
                length_residual = length_residual.max(((h.1 - h.0) - j_len * log_slope_bwd.exp()).abs());
            }
            orbit.push((-k, a, b));
        }
    }
    let base = conj.h(0.5 * (gap.0 + gap.1));
    let mut collapse_residual = 0.0f64;
    let (mut fw, mut bw) = (base, base);
    let mut tn = vec![(0i64, base)];
    for k in 1..=k_max {
        fw = map.eval(fw);
        bw = map.inverse(bw);
        tn.push((k, fw));
        tn.push((-k, bw));
    }
    for &(k, a, b) in &orbit {
        if let Some(&(_, x)) = tn.iter().find(|t| t.0 == k) {
            collapse_residual = collapse_residual.max((conj.h(0.5 * (a + b)) - x).abs());
        }
    }
    // plain iteration, for the record
    let mut iteration_drift = 0.0f64;
    let (mut a, mut b) = gap;
    for k in 1..=k_max {
        let (x, y, _) = interval_image(f, a, b);
        (a, b) = (x, y);
        if let Some(h) = gap_at(k) {
            iteration_drift = iteration_drift.max((a - h.0).abs().max((b - h.1).abs()));
        }
    }
    let mut sorted = orbit.clone();
    sorted.sort_by(|x, y| x.1.total_cmp(&y.1));
    let first_overlap = sorted
        .windows(2)
        .find(|w| w[0].2 - w[1].1 > GAP_FLOOR)
        .map(|w| (w[0].0, w[1].0));
    let total_length: f64 = orbit.iter().map(|o| o.2 - o.1).sum();
    let disjoint = first_overlap.is_none();
    Some(WanderingReport {
        gap,
        gap_atom,
        n_orbit,
        step_residual,
        disjoint,
        first_overlap,
        total_length,
        length_residual,
        collapse_residual,
        iteration_drift,
        passed: disjoint && total_length < 1.0 && step_residual <= STEP_TOL,
    })
}

/// The atom with the largest mass.
pub fn largest_gap_atom(mu: &AtomicMeasure) -> i64 {
    mu.atoms
        .iter()
        .fold((0i64, f64::NEG_INFINITY), |acc, a| {
            if a.weight > acc.1 || (a.weight == acc.1 && a.n.abs() < acc.0.abs()) {
                (a.n, a.weight)
            } else {
                acc
            }
        })
        .0
}

/// |<log l, lambda>|
pub fn slope_orthogonality(l: &[f64], lambda: &[f64]) -> f64 {
    l.iter().zip(lambda).map(|(x, y)| x.ln() * y).sum::<f64>().abs()
}

/// Everything the pipeline needs about a self-similar interval exchange.
#[derive(Clone, Debug)]
pub struct PipelineInput {
    pub sigma: crate::substitution::Substitution,
    pub map: AffineIem,
    pub partition: Partition,
    pub gamma: Vec<Complex64>,
    pub beta: Complex64,
    pub lengths: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineParams {
    pub n: usize,
    pub n_orbit: usize,
    pub max_arg: f64,
    pub min_window: u128,
    pub transport_samples: usize,
    pub seed: u64,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams { n: 5000, n_orbit: 500, max_arg: crate::minimal::DEFAULT_MAX_ARG, min_window: 10_000, transport_samples: 100, seed: 1 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineReport {
    pub seed_word: String,
    pub exponent: usize,
    pub window_left: usize,
    pub window_right: usize,
    pub located: LocatedPoint,
    pub k_total: f64,
    pub edge_mass: [f64; 2],
    pub slopes: Vec<SlopeRow>,
    pub max_slope_error: f64,
    pub slopes_ok: bool,
    pub orthogonality: f64,
    pub orthogonality_ok: bool,
    pub semi_conjugacy: SemiConjugacyReport,
    pub semi_conjugacy_ok: bool,
    pub transport: TransportReport,
    pub wandering: WanderingReport,
    pub passed: bool,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Minimal(#[from] crate::minimal::MinimalError),
    #[error(transparent)]
    Wandering(#[from] WanderingError),
}

/// Minimal window, coded point, measure, conjugacy, affine map and all checks.
pub fn run_pipeline(input: &PipelineInput, params: &PipelineParams) -> Result<(PipelineReport, AffineIem), PipelineError> {
    use crate::minimal::{choose_exponent, find_seed_letters, minimal_window};
    let seed = find_seed_letters(&input.sigma, &input.gamma, 8)?;
    let need = params.min_window.max(2 * params.n as u128 + 3);
    let e = choose_exponent(&input.sigma, &seed.word, input.beta, need, params.max_arg, 200)?;
    let mw = minimal_window(&input.sigma, &input.gamma, &seed.word, e, Some(2 * params.n + 100))?;
    let n = params.n;
    let located = locate_point(&input.map, &input.partition, &mw.window, -(n as i64) - 1, 2 * n + 3)?;
    let mu = build_measure(&input.map, &input.partition, located.t, &mw.window, &input.gamma, n)?;
    let conj = build_conjugacy(&mu);
    let syn = synthesize_affine(&input.map, &input.partition, &conj, &input.gamma)?;
    let semi = semi_conjugacy_check(&input.map, &syn.f, &mu, &conj);
    let transport = transport_check(&input.map, &input.partition, &conj, &mu, &input.gamma, params.transport_samples, params.seed);
    let gap_atom = largest_gap_atom(&mu);
    let wandering = verify_wandering(&syn.f, &input.map, &conj, gap_atom, params.n_orbit.min(n))
        .expect("largest gap belongs to an atom");
    let l: Vec<f64> = input.gamma.iter().map(|z| (-z.re).exp()).collect();
    let orthogonality = slope_orthogonality(&l, &input.lengths);
    let slopes_ok = syn.max_rel_error <= 1e-6;
    let orthogonality_ok = orthogonality <= 1e-10;
    let semi_conjugacy_ok = semi.max_residual <= 1e-9;
    let passed = slopes_ok && orthogonality_ok && semi_conjugacy_ok && transport.passed && wandering.passed;
    let report = PipelineReport {
        seed_word: input.sigma.spell(&seed.word),
        exponent: e,
        window_left: mw.window.left_len(),
        window_right: mw.window.right_len(),
        located,
        k_total: mu.k_total,
        edge_mass: mu.edge_mass,
        slopes: syn.rows,
        max_slope_error: syn.max_rel_error,
        slopes_ok,
        orthogonality,
        orthogonality_ok,
        semi_conjugacy: semi,
        semi_conjugacy_ok,
        transport,
        wandering,
        passed,
    };
    Ok((report, syn.f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iem::Iem;

    fn rotation() -> Iem {
        Iem::rotation(0.7).unwrap()
    }

    #[test]
    fn single_letter_is_its_interval() {
        let r = rotation();
        let w = TwoSidedWindow::new(vec![0], 0);
        let p = locate_point(r.map(), &r.partition(), &w, 0, 1).unwrap();
        assert!((p.width - 0.7).abs() < 1e-15);
        assert!((p.t - 0.35).abs() < 1e-15);
    }

    #[test]
    fn rotation_cylinder_aab() {
        // I_a = [0, .7), T x = x + .3 mod 1: a a b needs x < .4 and x + .6 >= .7
        let r = rotation();
        let w = TwoSidedWindow::new(vec![0, 0, 1], 0);
        let p = locate_point(r.map(), &r.partition(), &w, 0, 3).unwrap();
        assert!((p.width - 0.3).abs() < 1e-12);
        assert!(p.t >= 0.1 && p.t < 0.4);
    }

    #[test]
    fn single_atom_measure() {
        let r = rotation();
        let w = TwoSidedWindow::new(vec![0, 1], 0);
        let g = vec![Complex64::new(0.5, 0.0), Complex64::new(-0.5, 0.0)];
        let mu = build_measure(r.map(), &r.partition(), 0.2, &w, &g, 0).unwrap();
        assert_eq!(mu.atoms.len(), 1);
        assert!((mu.k_total - 1.0).abs() < 1e-15);
        let c = build_conjugacy(&mu);
        assert_eq!(c.g(0.2), 0.0);
        assert_eq!(c.g(0.21), 1.0);
    }

    #[test]
    fn two_atom_steps() {
        let c = ConjugacyPair { xs: vec![0.2, 0.6], ns: vec![0, 1], starts: vec![0.0, 0.5], weights: vec![0.5, 0.5] };
        assert_eq!(c.g(0.1), 0.0);
        assert_eq!(c.g(0.3), 0.5);
        assert_eq!(c.g(0.7), 1.0);
        assert_eq!(c.h(0.25), 0.2);
        assert_eq!(c.h(0.75), 0.6);
    }

    #[test]
    fn orthogonality_controls() {
        assert_eq!(slope_orthogonality(&[1.0, 1.0], &[0.3, 0.7]), 0.0);
        assert!(slope_orthogonality(&[2.0, 1.5], &[0.3, 0.7]) > 0.1);
    }
}
