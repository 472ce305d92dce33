//! Fractals attached to a substitution and a complex eigenvector: truncated
//! clouds, directional minima (support functions), extreme points and the
//! directions where two first-level subfractals share the minimum.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::dedup_points;
use crate::numberfield::FieldElement;
use crate::substitution::{gamma_weight, Letter, PssPath, PssTriple, Substitution, SubstitutionError};

/// Two minimizers closer than this in value are the same extreme value.
pub const CLUSTER_TOL: f64 = 1e-9;
pub const DEFAULT_GAP_TOL: f64 = 1e-7;
pub const DEFAULT_POINT_BUDGET: usize = 1 << 22;
/// Cloud points closer than this are merged.
pub const DEDUP_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FractalError {
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error("cloud of letter {letter} at depth {depth} has {count} points, over the budget {budget}; use the branch-and-bound queries instead")]
    OverBudget { letter: char, depth: usize, count: u128, budget: usize },
    #[error("beta is not invertible")]
    SingularBeta,
    #[error(transparent)]
    Substitution(#[from] SubstitutionError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Direction {
    pub theta: f64,
    pub tau: Complex64,
}

impl Direction {
    pub fn new(theta: f64) -> Self {
        Direction { theta, tau: Complex64::from_polar(1.0, theta) }
    }

    /// Uniform grid of k directions starting at angle 0.
    pub fn grid(k: usize) -> Vec<Direction> {
        (0..k).map(|i| Direction::new(2.0 * PI * i as f64 / k as f64)).collect()
    }
}

#[derive(Clone, Debug)]
struct Decomp {
    triple: PssTriple,
    gp: Complex64,
}

/// A substitution with a weight vector and the expansion factor beta.
#[derive(Clone, Debug)]
pub struct FractalSystem {
    pub sigma: Substitution,
    pub gamma: Vec<Complex64>,
    pub beta: Complex64,
    decomps: Vec<Vec<Decomp>>,
    max_prefix: f64,
}

/// z_a(x) for a finite or eventually periodic path, in any field:
/// sum_m beta^{-m} gamma(p_m), the periodic tail summed in closed form.
pub fn value_of_path<F: FieldElement>(path: &PssPath, gamma: &[F], beta: &F) -> Result<F, FractalError> {
    let binv = beta.inv().ok_or(FractalError::SingularBeta)?;
    let mut acc = F::zero();
    let mut pw = F::one();
    for t in &path.head {
        pw = pw.mul(&binv);
        acc = acc.add(&pw.mul(&gamma_weight(&t.prefix, gamma)?));
    }
    if !path.period.is_empty() {
        let mut per = F::zero();
        let mut q = F::one();
        for t in &path.period {
            q = q.mul(&binv);
            per = per.add(&q.mul(&gamma_weight(&t.prefix, gamma)?));
        }
        let denom = F::one().sub(&q).inv().ok_or(FractalError::SingularBeta)?;
        acc = acc.add(&pw.mul(&per).mul(&denom));
    }
    Ok(acc)
}

#[derive(Clone, Debug, Serialize)]
pub struct FractalCloud {
    pub letter: Letter,
    pub depth: usize,
    pub points: Vec<Complex64>,
    /// Decomposition index chosen at each level.
    pub paths: Vec<Vec<u8>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Argmin {
    pub z: Complex64,
    pub path: Vec<u8>,
    /// Index of the first triple among the decompositions of the letter.
    pub label: usize,
    pub label_text: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtremeReport {
    pub letter: Letter,
    pub direction: Direction,
    pub depth: usize,
    pub value: f64,
    pub argmins: Vec<Argmin>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuationResult {
    pub ok: bool,
    pub worst_residual: f64,
    pub offending_path: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpApproxRow {
    pub n: usize,
    pub v: f64,
    pub diff: f64,
    pub scaled: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpApproxReport {
    pub rows: Vec<ExpApproxRow>,
    pub c_est: f64,
    /// Upper estimate of max over letters and directions of -v_b.
    pub c_bound: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PsiCandidate {
    pub theta: f64,
    pub labels: [String; 2],
    pub gap: f64,
    pub separation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DerivativeRow {
    pub h: f64,
    pub right: f64,
    pub left: f64,
    pub right_residual: f64,
    pub left_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DerivativeReport {
    pub expected_right: f64,
    pub expected_left: f64,
    pub rows: Vec<DerivativeRow>,
    pub residual_at_smallest_h: f64,
}

impl FractalSystem {
    pub fn new(sigma: Substitution, gamma: Vec<Complex64>, beta: Complex64) -> Result<Self, FractalError> {
        let mut decomps = Vec::with_capacity(sigma.size());
        let mut max_prefix: f64 = 0.0;
        for a in 0..sigma.size() as Letter {
            let mut ds = Vec::new();
            for t in sigma.decompositions(a) {
                let gp = gamma_weight(&t.prefix, &gamma)?;
                max_prefix = max_prefix.max(gp.norm());
                ds.push(Decomp { triple: t, gp });
            }
            decomps.push(ds);
        }
        Ok(FractalSystem { sigma, gamma, beta, decomps, max_prefix })
    }

    /// Same system with gamma multiplied by z.
    pub fn scaled(&self, z: Complex64) -> Self {
        let gamma = self.gamma.iter().map(|g| g * z).collect();
        FractalSystem::new(self.sigma.clone(), gamma, self.beta).expect("letters unchanged")
    }

    pub fn decompositions(&self, a: Letter) -> Vec<PssTriple> {
        self.decomps[a as usize].iter().map(|d| d.triple.clone()).collect()
    }

    /// gamma(p) for the k-th decomposition of a.
    pub fn prefix_weight(&self, a: Letter, k: usize) -> Complex64 {
        self.decomps[a as usize][k].gp
    }

    pub fn max_prefix_weight(&self) -> f64 {
        self.max_prefix
    }

    /// beta^{-m} for m = 0..=n, by repeated multiplication.
    pub fn inverse_powers(&self, n: usize) -> Vec<Complex64> {
        let binv = self.beta.inv();
        let mut out = Vec::with_capacity(n + 1);
        let mut p = Complex64::new(1.0, 0.0);
        out.push(p);
        for _ in 0..n {
            p *= binv;
            out.push(p);
        }
        out
    }

    /// Upper bound on the modulus of any point of any fractal.
    pub fn radius_bound(&self) -> f64 {
        self.max_prefix / (self.beta.norm() - 1.0)
    }

    fn child(&self, a: Letter, k: usize) -> Letter {
        self.decomps[a as usize][k].triple.center
    }

    pub fn triples_of(&self, a: Letter, path: &[u8]) -> Vec<PssTriple> {
        let mut cur = a;
        path.iter()
            .map(|&k| {
                let t = self.decomps[cur as usize][k as usize].triple.clone();
                cur = t.center;
                t
            })
            .collect()
    }

    pub fn path_string(&self, a: Letter, path: &[u8]) -> String {
        self.triples_of(a, path).iter().map(|t| t.display(&self.sigma)).collect()
    }

    pub fn label_text(&self, a: Letter, k: usize) -> String {
        self.decomps[a as usize][k].triple.display(&self.sigma)
    }

    /// Value of a finite decomposition-index path.
    pub fn point_of(&self, a: Letter, path: &[u8]) -> Complex64 {
        let pw = self.inverse_powers(path.len());
        let mut z = Complex64::new(0.0, 0.0);
        let mut cur = a;
        for (m, &k) in path.iter().enumerate() {
            let d = &self.decomps[cur as usize][k as usize];
            z += pw[m + 1] * d.gp;
            cur = d.triple.center;
        }
        z
    }

    /// Number of depth-n paths from each letter.
    pub fn path_counts(&self, n: usize) -> Vec<u128> {
        let mut c = vec![1u128; self.sigma.size()];
        for _ in 0..n {
            c = (0..self.sigma.size())
                .map(|a| self.decomps[a].iter().map(|d| c[d.triple.center as usize]).fold(0u128, |s, x| s.saturating_add(x)))
                .collect();
        }
        c
    }

    fn expand(&self, a: Letter, depth: usize, pw: &[Complex64], start: (Complex64, Vec<u8>, Letter), out: &mut Vec<(Complex64, Vec<u8>)>) {
        let (z, path, cur) = start;
        let m = path.len();
        if m == depth {
            out.push((z, path));
            return;
        }
        for (k, d) in self.decomps[cur as usize].iter().enumerate() {
            let mut p = path.clone();
            p.push(k as u8);
            self.expand(a, depth, pw, (z + pw[m + 1] * d.gp, p, d.triple.center), out);
        }
    }

    /// All depth-n points of the fractal of a, in lexicographic path order,
    /// with points within DEDUP_TOL of an earlier one removed.
    pub fn cloud(&self, a: Letter, n: usize, budget: usize) -> Result<FractalCloud, FractalError> {
        if n == 0 {
            return Err(FractalError::ZeroDepth);
        }
        let count = self.path_counts(n)[a as usize];
        if count > budget as u128 {
            return Err(FractalError::OverBudget {
                letter: self.sigma.alphabet()[a as usize],
                depth: n,
                count,
                budget,
            });
        }
        let pw = self.inverse_powers(n);
        // split into subtrees for parallel expansion
        let split = n.min(6);
        let mut seeds = Vec::new();
        self.expand(a, split, &pw, (Complex64::new(0.0, 0.0), Vec::new(), a), &mut seeds);
        let seeds: Vec<(Complex64, Vec<u8>, Letter)> = seeds
            .into_iter()
            .map(|(z, p)| {
                let cur = self.triples_of(a, &p).last().map(|t| t.center).unwrap_or(a);
                (z, p, cur)
            })
            .collect();
        let parts: Vec<Vec<(Complex64, Vec<u8>)>> = seeds
            .into_par_iter()
            .map(|s| {
                let mut out = Vec::new();
                self.expand(a, n, &pw, s, &mut out);
                out
            })
            .collect();
        let all: Vec<(Complex64, Vec<u8>)> = parts.into_iter().flatten().collect();
        let pts: Vec<Complex64> = all.iter().map(|x| x.0).collect();
        let keep = dedup_points(&pts, DEDUP_TOL);
        let mut points = Vec::with_capacity(keep.len());
        let mut paths = Vec::with_capacity(keep.len());
        for i in keep {
            points.push(all[i].0);
            paths.push(all[i].1.clone());
        }
        Ok(FractalCloud { letter: a, depth: n, points, paths })
    }

    /// tail[k] = sum_{m=k+1}^{n} |beta|^{-m} max|gamma(p)|
    fn tails(&self, n: usize) -> Vec<f64> {
        let r = 1.0 / self.beta.norm();
        let mut t = vec![0.0; n + 1];
        for k in (0..n).rev() {
            t[k] = t[k + 1] + self.max_prefix * r.powi(k as i32 + 1);
        }
        t
    }

    /// Minimum of Re(tau z) over the depth-n cloud of a, optionally restricted
    /// to paths whose first triple is decomposition `first`, with every path
    /// attaining it within CLUSTER_TOL.
    pub fn v_min_restricted(&self, a: Letter, n: usize, dir: Direction, first: Option<usize>) -> ExtremeReport {
        let pw = self.inverse_powers(n);
        let tail = self.tails(n);
        let tau = dir.tau;
        let mut best = f64::INFINITY;
        let mut hits: Vec<(f64, Complex64, Vec<u8>)> = Vec::new();
        let mut stack: Vec<(Complex64, Letter, Vec<u8>)> = Vec::new();
        let roots: Vec<usize> = match first {
            Some(k) => vec![k],
            None => (0..self.decomps[a as usize].len()).collect(),
        };
        for &k in roots.iter().rev() {
            let d = &self.decomps[a as usize][k];
            stack.push((pw[1] * d.gp, d.triple.center, vec![k as u8]));
        }
        while let Some((z, cur, path)) = stack.pop() {
            let m = path.len();
            let val = (tau * z).re;
            if m == n {
                if val <= best + CLUSTER_TOL {
                    if val < best {
                        best = val;
                        hits.retain(|h| h.0 <= best + CLUSTER_TOL);
                    }
                    hits.push((val, z, path));
                }
                continue;
            }
            if val - tail[m] > best + CLUSTER_TOL {
                continue;
            }
            for (k, d) in self.decomps[cur as usize].iter().enumerate().rev() {
                let mut p = path.clone();
                p.push(k as u8);
                stack.push((z + pw[m + 1] * d.gp, d.triple.center, p));
            }
        }
        hits.retain(|h| h.0 <= best + CLUSTER_TOL);
        hits.sort_by(|x, y| x.2.cmp(&y.2));
        let argmins = hits
            .into_iter()
            .map(|(_, z, path)| {
                let label = path[0] as usize;
                Argmin { z, label_text: self.label_text(a, label), label, path }
            })
            .collect();
        ExtremeReport { letter: a, direction: dir, depth: n, value: best, argmins }
    }

    pub fn v_min(&self, a: Letter, n: usize, dir: Direction) -> ExtremeReport {
        self.v_min_restricted(a, n, dir, None)
    }

    pub fn continuation_check(&self, report: &ExtremeReport) -> ContinuationResult {
        let n = report.depth;
        let mut worst = 0.0f64;
        let mut offending = None;
        if n < 2 {
            return ContinuationResult { ok: true, worst_residual: 0.0, offending_path: None };
        }
        let a = report.letter;
        let beta0 = self.beta / self.beta.norm();
        let tau2 = report.direction.tau / beta0;
        let dir2 = Direction::new(tau2.arg());
        let binv = self.beta.inv();
        for am in &report.argmins {
            let k = am.path[0] as usize;
            let c1 = self.child(a, k);
            let shifted = self.point_of(c1, &am.path[1..]);
            let v2 = self.v_min(c1, n - 1, dir2).value;
            let r1 = (tau2 * shifted).re - v2;
            let lhs = (report.direction.tau * self.point_of(a, &am.path)).re;
            let rhs = (report.direction.tau * binv * self.prefix_weight(a, k)).re + v2 / self.beta.norm();
            let r2 = (lhs - rhs).abs();
            let r = r1.abs().max(r2);
            if r > worst {
                worst = r;
                if r > CLUSTER_TOL {
                    offending = Some(self.path_string(a, &am.path));
                }
            }
        }
        ContinuationResult { ok: worst <= CLUSTER_TOL, worst_residual: worst, offending_path: offending }
    }

    /// Compares v^(n) with v^(n_max) against C |beta|^{-n}.
    pub fn exp_approx_check(&self, a: Letter, dir: Direction, n_max: usize, grid: usize) -> ExpApproxReport {
        let vs: Vec<f64> = (1..=n_max).into_par_iter().map(|n| self.v_min(a, n, dir).value).collect();
        let vmax = vs[n_max - 1];
        let b = self.beta.norm();
        let rows: Vec<ExpApproxRow> = vs
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let n = i + 1;
                let diff = (v - vmax).abs();
                ExpApproxRow { n, v, diff, scaled: diff * b.powi(n as i32) }
            })
            .collect();
        let c_est = rows.iter().map(|r| r.scaled).fold(0.0, f64::max);
        let dirs = Direction::grid(grid);
        let letters: Vec<Letter> = (0..self.sigma.size() as Letter).collect();
        let c_grid = letters
            .par_iter()
            .flat_map(|&l| dirs.par_iter().map(move |&d| (l, d)))
            .map(|(l, d)| -self.v_min(l, n_max, d).value)
            .reduce(|| 0.0, f64::max);
        // v_b is Lipschitz in the angle with constant the cloud radius
        let dtheta = 2.0 * PI / grid as f64;
        let c_bound = (c_grid + self.radius_bound() * dtheta / 2.0) / (1.0 - b.powi(-(n_max as i32)));
        ExpApproxReport { passed: c_est.is_finite() && c_est <= c_bound, rows, c_est, c_bound }
    }

    /// Directions on a grid refinement where two first-level subfractals of a
    /// attain the minimum at distinct points.
    pub fn psi_scan(&self, a: Letter, grid: usize, n: usize, gap_tol: f64) -> Vec<PsiCandidate> {
        let nd = self.decomps[a as usize].len();
        if nd < 2 {
            return Vec::new();
        }
        let dirs = Direction::grid(grid);
        let table: Vec<Vec<f64>> = dirs
            .par_iter()
            .map(|&d| (0..nd).map(|k| self.v_min_restricted(a, n, d, Some(k)).value).collect())
            .collect();
        let best = |row: &[f64]| (0..row.len()).min_by(|&i, &j| row[i].total_cmp(&row[j])).unwrap();
        let mut brackets = Vec::new();
        for i in 0..grid {
            let j = (i + 1) % grid;
            let (bi, bj) = (best(&table[i]), best(&table[j]));
            if bi != bj {
                let hi = if j == 0 { 2.0 * PI } else { dirs[j].theta };
                brackets.push((dirs[i].theta, hi, bi, bj));
            }
        }
        let mut out: Vec<PsiCandidate> = brackets
            .par_iter()
            .filter_map(|&(mut lo, mut hi, d1, d2)| {
                let f = |th: f64| {
                    let dir = Direction::new(th);
                    self.v_min_restricted(a, n, dir, Some(d1)).value - self.v_min_restricted(a, n, dir, Some(d2)).value
                };
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if f(mid) <= 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo < 1e-15 {
                        break;
                    }
                }
                let th = 0.5 * (lo + hi);
                let dir = Direction::new(th);
                let r1 = self.v_min_restricted(a, n, dir, Some(d1));
                let r2 = self.v_min_restricted(a, n, dir, Some(d2));
                let overall = self.v_min(a, n, dir).value;
                let gap = (r1.value - r2.value).abs();
                if gap > gap_tol || r1.value.min(r2.value) > overall + gap_tol {
                    return None;
                }
                let separation = r1
                    .argmins
                    .iter()
                    .flat_map(|x| r2.argmins.iter().map(move |y| (x.z - y.z).norm()))
                    .fold(f64::INFINITY, f64::min);
                if separation <= CLUSTER_TOL {
                    return None;
                }
                Some(PsiCandidate {
                    theta: th.rem_euclid(2.0 * PI),
                    labels: [self.label_text(a, d1), self.label_text(a, d2)],
                    gap,
                    separation,
                })
            })
            .collect();
        out.sort_by(|x, y| x.theta.total_cmp(&y.theta));
        out
    }

    pub fn one_sided_derivative_check(&self, a: Letter, dir: Direction, n: usize, hs: &[f64]) -> DerivativeReport {
        let rep = self.v_min(a, n, dir);
        let tau = dir.tau;
        let ims: Vec<f64> = rep.argmins.iter().map(|m| (tau * m.z).im).collect();
        let e_plus = ims.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e_minus = ims.iter().cloned().fold(f64::INFINITY, f64::min);
        let expected_right = -e_plus;
        let expected_left = -e_minus;
        let rows: Vec<DerivativeRow> = hs
            .iter()
            .map(|&h| {
                let vr = self.v_min(a, n, Direction::new(dir.theta + h)).value;
                let vl = self.v_min(a, n, Direction::new(dir.theta - h)).value;
                let right = (vr - rep.value) / h;
                let left = (rep.value - vl) / h;
                DerivativeRow {
                    h,
                    right,
                    left,
                    right_residual: (right - expected_right).abs(),
                    left_residual: (left - expected_left).abs(),
                }
            })
            .collect();
        let residual_at_smallest_h = rows
            .iter()
            .min_by(|x, y| x.h.total_cmp(&y.h))
            .map(|r| r.right_residual.max(r.left_residual))
            .unwrap_or(0.0);
        DerivativeReport { expected_right, expected_left, rows, residual_at_smallest_h }
    }
}

/// Checks chain[m].parent == chain[m+1].center and each triple decomposes its parent.
pub fn validate_chain(sigma: &Substitution, chain: &[PssTriple]) -> Result<(), SubstitutionError> {
    for (m, t) in chain.iter().enumerate() {
        if !t.is_valid(sigma) {
            return Err(SubstitutionError::BrokenChain(m));
        }
        if let Some(next) = chain.get(m + 1) {
            if t.parent != next.center {
                return Err(SubstitutionError::BrokenChain(m));
            }
        }
    }
    Ok(())
}

/// The first k elements of a prefix-suffix chain read backwards, as a path
/// rooted at c_k, continued by empty prefixes.
pub fn reverse_prefix_suffix(sigma: &Substitution, chain: &[PssTriple], k: usize) -> Result<PssPath, SubstitutionError> {
    validate_chain(sigma, chain)?;
    if k == 0 || k > chain.len() {
        return Err(SubstitutionError::BrokenChain(k));
    }
    let head: Vec<PssTriple> = chain[..k].iter().rev().cloned().collect();
    PssPath::with_empty_prefix_tail(sigma, chain[k - 1].parent, head)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> FractalSystem {
        let s = Substitution::new(&[('a', "ab"), ('b', "a")]).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        FractalSystem::new(s, vec![Complex64::new(1.0, 0.3), Complex64::new(-0.4, 0.8)], Complex64::new(phi, 0.0)).unwrap()
    }

    #[test]
    fn depth_one_cloud() {
        let f = toy();
        let c = f.cloud(0, 1, 100).unwrap();
        assert_eq!(c.points.len(), 2);
        assert_eq!(c.points[0], Complex64::new(0.0, 0.0));
        assert!((c.points[1] - f.gamma[0] / f.beta).norm() < 1e-15);
        assert!(matches!(f.cloud(0, 30, 1000), Err(FractalError::OverBudget { .. })));
    }

    #[test]
    fn v_min_matches_cloud_minimum() {
        let f = toy();
        for d in Direction::grid(16) {
            let c = f.cloud(0, 12, 1 << 20).unwrap();
            let m = c.points.iter().map(|z| (d.tau * z).re).fold(f64::INFINITY, f64::min);
            let r = f.v_min(0, 12, d);
            assert!((r.value - m).abs() < 1e-12);
            assert!(r.value <= 0.0);
        }
    }

    #[test]
    fn reversal_rules() {
        let s = Substitution::new(&[('a', "ab"), ('b', "a")]).unwrap();
        let chain = vec![
            PssTriple { parent: 0, prefix: vec![0], center: 1, suffix: vec![] },
            PssTriple { parent: 0, prefix: vec![], center: 0, suffix: vec![1] },
            PssTriple { parent: 1, prefix: vec![], center: 0, suffix: vec![] },
        ];
        let p = reverse_prefix_suffix(&s, &chain, 1).unwrap();
        assert_eq!(p.head[0], chain[0]);
        let p3 = reverse_prefix_suffix(&s, &chain, 3).unwrap();
        let back: Vec<PssTriple> = p3.head[..3].iter().rev().cloned().collect();
        assert_eq!(back, chain);
        let mut broken = chain.clone();
        broken[1].parent = 1;
        assert!(reverse_prefix_suffix(&s, &broken, 2).is_err());
    }

    #[test]
    fn corrupted_argmin_fails_continuation() {
        let f = toy();
        let mut r = f.v_min(0, 10, Direction::new(0.7));
        assert!(f.continuation_check(&r).ok);
        let far = f.v_min(0, 10, Direction::new(0.7 + PI));
        r.argmins = far.argmins;
        assert!(!f.continuation_check(&r).ok);
    }
}
