//! The cubic Arnoux-Yoccoz map: its 9-letter substitution, eigendata,
//! refinement partition, tribonacci boundary arcs and the catalogue of
//! identities its fractals satisfy.

use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::fractal::{value_of_path, FractalError, FractalSystem};
use crate::geometry::{clusters, hausdorff, min_distance, PointSet};
use crate::iem::{first_return, AffineIem, AffinePiece, IemError, Partition, Renormalization, DEFAULT_RETURN_BUDGET};
use crate::numberfield::{alpha, beta, eigen_pair, CubicNumber, IntMatrix, IntPoly};
use crate::substitution::{Letter, PssPath, PssTriple, Substitution};

#[derive(Debug, Error)]
pub enum AyError {
    #[error("no ordering of the nine intervals codes the map by the substitution")]
    NoCompatibleOrdering,
    #[error("digit sequence contains 111")]
    Forbidden111,
    #[error("letter {0} out of range 1..9")]
    BadLetter(usize),
    #[error(transparent)]
    Iem(#[from] IemError),
    #[error(transparent)]
    Fractal(#[from] FractalError),
}

pub const LETTERS: [char; 9] = ['1', '2', '3', '4', '5', '6', '7', '8', '9'];

pub fn substitution() -> Substitution {
    Substitution::new(&[
        ('1', "35"),
        ('2', "45"),
        ('3', "46"),
        ('4', "17"),
        ('5', "18"),
        ('6', "19"),
        ('7', "29"),
        ('8', "2"),
        ('9', "3"),
    ])
    .expect("table is well formed")
}

pub fn matrix() -> IntMatrix {
    substitution().abelianization()
}

/// (1 - t^3)(t^3 + t^2 + t - 1)(-t^3 + t^2 + t + 1)
pub fn expected_char_poly() -> IntPoly {
    IntPoly::from_i64(&[1, 0, 0, -1])
        .mul(&IntPoly::from_i64(&[-1, 1, 1, 1]))
        .mul(&IntPoly::from_i64(&[1, 1, 1, -1]))
}

fn b() -> CubicNumber {
    CubicNumber::t()
}

/// beta^k in the field.
pub fn beta_pow(k: i32) -> CubicNumber {
    b().pow(k).expect("beta is a unit")
}

/// The beta-eigenvector, exactly.
pub fn gamma_exact() -> Vec<CubicNumber> {
    vec![
        CubicNumber::from_ints(1, 1, 1),
        CubicNumber::from_ints(0, -1, 0),
        CubicNumber::from_ints(0, -1, 0),
        CubicNumber::from_ints(-1, -1, -1),
        CubicNumber::from_ints(1, 1, 0),
        CubicNumber::from_ints(1, 1, 0),
        CubicNumber::from_ints(-2, -1, -1),
        CubicNumber::from_int(-1),
        CubicNumber::from_int(-1),
    ]
}

pub fn gamma() -> Vec<Complex64> {
    gamma_exact().iter().map(|g| g.embed_beta()).collect()
}

/// Perron eigenvector of M^t, normalized to sum 1: the interval lengths.
pub fn perron_lengths() -> Vec<f64> {
    static L: OnceLock<Vec<f64>> = OnceLock::new();
    L.get_or_init(|| {
        let e = eigen_pair(&matrix().transpose(), Complex64::new(1.0 / alpha(), 0.0)).expect("Perron root is simple");
        let v: Vec<f64> = e.vector.iter().map(|z| z.re).collect();
        let s: f64 = v.iter().sum();
        v.iter().map(|x| x / s).collect()
    })
    .clone()
}

pub fn fractal_system() -> FractalSystem {
    FractalSystem::new(substitution(), gamma(), beta()).expect("AY data is consistent")
}

/// Fractal system for gamma rotated by e^{i theta}.
pub fn fractal_system_rotated(theta: f64) -> FractalSystem {
    fractal_system().scaled(Complex64::from_polar(1.0, theta))
}

/// Exchanges the two halves of [t0, t1); identity elsewhere.
pub fn half_exchange(t: f64, t0: f64, t1: f64) -> f64 {
    let m = 0.5 * (t0 + t1);
    let h = 0.5 * (t1 - t0);
    if t0 <= t && t < m {
        t + h
    } else if m <= t && t < t1 {
        t - h
    } else {
        t
    }
}

fn stages() -> [(f64, f64); 4] {
    let a = alpha();
    let a2 = a * a;
    [(a + a2, 1.0), (a, a + a2), (0.0, a), (0.0, 1.0)]
}

/// T = G_{0,1} G_{0,a} G_{a,a+a^2} G_{a+a^2,1}, rightmost first.
pub fn ay_map(t: f64) -> f64 {
    stages().iter().fold(t, |x, &(t0, t1)| half_exchange(x, t0, t1))
}

/// T as an affine interval exchange with its continuity pieces, labelled A, B, ...
pub fn ay_affine() -> AffineIem {
    static M: OnceLock<AffineIem> = OnceLock::new();
    M.get_or_init(|| {
        let st = stages();
        let mut cand: Vec<f64> = Vec::new();
        for (k, &(t0, t1)) in st.iter().enumerate() {
            let mut pts = vec![t0, 0.5 * (t0 + t1), t1];
            // pull back through the stages applied before this one (each an involution)
            for &(s0, s1) in st[..k].iter().rev() {
                pts = pts.iter().flat_map(|&y| [y, half_exchange(y, s0, s1)]).collect();
            }
            cand.extend(pts);
        }
        let delta = |x: f64| ay_map(x) - x;
        let mut breaks: Vec<f64> = cand
            .into_iter()
            .filter(|&x| x > 1e-9 && x < 1.0 - 1e-9 && (delta(x - 1e-9) - delta(x + 1e-9)).abs() > 1e-6)
            .collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
        let mut ends = vec![0.0];
        ends.extend(&breaks);
        ends.push(1.0);
        let pieces: Vec<AffinePiece> = ends
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let mid = 0.5 * (w[0] + w[1]);
                AffinePiece { start: w[0], end: w[1], slope: 1.0, image_start: w[0] + delta(mid), letter: i as Letter }
            })
            .collect();
        let alphabet = (0..pieces.len()).map(|i| (b'A' + i as u8) as char).collect();
        AffineIem::new(alphabet, 1.0, pieces).expect("AY map is an interval exchange")
    })
    .clone()
}

/// Breakpoints of T that remain discontinuities on the circle R/Z.
pub fn circle_discontinuities() -> Vec<f64> {
    let m = ay_affine();
    m.breakpoints()
        .into_iter()
        .filter(|&x| {
            let l = m.eval(x - 1e-9) + 1e-9;
            let r = m.eval(x);
            let d = (l - r).rem_euclid(1.0);
            d.min(1.0 - d) > 1e-9
        })
        .collect()
}

/// The rotation that, composed with scaling by alpha, carries T onto its
/// first return to [0, alpha).
pub fn renormalization() -> Renormalization {
    let a = alpha();
    Renormalization { scale: a, rotation: 0.5 * (1.0 + a * a * a) }
}

#[derive(Clone, Debug, Serialize)]
pub struct AyPartition {
    pub partition: Partition,
    pub order: Vec<Letter>,
    pub lengths: Vec<f64>,
    pub renorm: Renormalization,
    pub orderings_tested: usize,
    pub solutions: usize,
}

fn search_partition() -> Result<AyPartition, AyError> {
    let lengths = perron_lengths();
    let discs = circle_discontinuities();
    let map = ay_affine();
    let sigma = substitution();
    let renorm = renormalization();
    let mut found: Vec<Vec<Letter>> = Vec::new();
    let mut tested = 0usize;
    let mut stack: Vec<(Vec<Letter>, f64)> = vec![(Vec::new(), 0.0)];
    while let Some((order, pos)) = stack.pop() {
        if order.len() == 9 {
            tested += 1;
            let part = Partition::from_lengths(LETTERS.to_vec(), &order, &lengths);
            if let Ok(fr) = first_return(&map, &part, renorm.scale, Some(renorm), DEFAULT_RETURN_BUDGET) {
                if fr.words.as_ref().is_some_and(|w| (0..9).all(|b| w[b] == *sigma.image(b as Letter))) {
                    found.push(order);
                }
            }
            continue;
        }
        for l in (0..9u8).rev() {
            if order.contains(&l) {
                continue;
            }
            let next = pos + lengths[l as usize];
            if discs.iter().any(|&d| pos < d - 1e-9 && next > d + 1e-9) {
                continue;
            }
            let mut o = order.clone();
            o.push(l);
            stack.push((o, next));
        }
    }
    let order = found.first().cloned().ok_or(AyError::NoCompatibleOrdering)?;
    Ok(AyPartition {
        partition: Partition::from_lengths(LETTERS.to_vec(), &order, &lengths),
        order,
        lengths,
        renorm,
        orderings_tested: tested,
        solutions: found.len(),
    })
}

/// The nine-interval refinement coded by the substitution, found by search.
pub fn ay_partition() -> Result<AyPartition, AyError> {
    static P: OnceLock<Result<AyPartition, String>> = OnceLock::new();
    P.get_or_init(|| search_partition().map_err(|e| e.to_string()))
        .clone()
        .map_err(|_| AyError::NoCompatibleOrdering)
}

/// Input for the wandering-interval pipeline with gamma rotated by e^{i theta}.
pub fn pipeline_input(theta: f64) -> Result<crate::wandering::PipelineInput, AyError> {
    let p = ay_partition()?;
    let rot = Complex64::from_polar(1.0, theta);
    Ok(crate::wandering::PipelineInput {
        sigma: substitution(),
        map: ay_affine(),
        partition: p.partition,
        gamma: gamma().iter().map(|z| z * rot).collect(),
        beta: beta(),
        lengths: p.lengths,
    })
}

// ---------------------------------------------------------------- tribonacci

/// sum_{m >= 3} beta^{-m} a_{m-2} over the given digits a_1, a_2, ...
pub fn trib_value(digits: &[u8]) -> Result<Complex64, AyError> {
    if digits.windows(3).any(|w| w == [1, 1, 1]) {
        return Err(AyError::Forbidden111);
    }
    let binv = beta().inv();
    let mut pw = binv * binv;
    let mut z = Complex64::new(0.0, 0.0);
    for &d in digits {
        pw *= binv;
        if d == 1 {
            z += pw;
        }
    }
    Ok(z)
}

/// All values of digit strings of length n with no 111.
pub fn trib_cloud(n: usize) -> Vec<Complex64> {
    let binv = beta().inv();
    let mut out = Vec::new();
    // (value, run of trailing ones, power)
    let mut stack = vec![(Complex64::new(0.0, 0.0), 0u8, binv * binv, 0usize)];
    while let Some((z, run, pw, len)) = stack.pop() {
        if len == n {
            out.push(z);
            continue;
        }
        let p = pw * binv;
        if run < 2 {
            stack.push((z + p, run + 1, p, len + 1));
        }
        stack.push((z, 0, p, len + 1));
    }
    out
}

/// z -> mul * z + add, exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactAffine {
    pub mul: CubicNumber,
    pub add: CubicNumber,
}

impl ExactAffine {
    pub fn apply(&self, z: &CubicNumber) -> CubicNumber {
        &(&self.mul * z) + &self.add
    }

    pub fn apply_c(&self, z: Complex64) -> Complex64 {
        self.mul.embed_beta() * z + self.add.embed_beta()
    }

    /// Fixed point add / (1 - mul).
    pub fn fixed_point(&self) -> CubicNumber {
        let one = CubicNumber::from_int(1);
        self.add.checked_div(&(&one - &self.mul)).expect("contraction has a fixed point")
    }
}

/// kappa_0, kappa_1, kappa_2.
pub fn kappa_maps() -> [ExactAffine; 3] {
    let one = CubicNumber::from_int(1);
    let k1_add = &(&beta_pow(-4) + &beta_pow(-6))
        + &beta_pow(-10).checked_div(&(&one - &beta_pow(-3))).expect("nonzero");
    [
        ExactAffine { mul: beta_pow(-3), add: beta_pow(-4) },
        ExactAffine { mul: -beta_pow(-4), add: k1_add },
        ExactAffine { mul: beta_pow(-3), add: &beta_pow(-3) + &beta_pow(-4) },
    ]
}

/// z_0 = beta^{-4} / (1 - beta^{-3})
pub fn z0_exact() -> CubicNumber {
    beta_pow(-4).checked_div(&(&CubicNumber::from_int(1) - &beta_pow(-3))).expect("nonzero")
}

/// kappa(0) and kappa(1), as fixed points of kappa_0 and kappa_2.
pub fn kappa_endpoints_exact() -> (CubicNumber, CubicNumber) {
    let k = kappa_maps();
    (k[0].fixed_point(), k[2].fixed_point())
}

/// kappa_{a_1} o ... o kappa_{a_d}(z_0)
pub fn kappa_digits(digits: &[u8]) -> Complex64 {
    static KC: OnceLock<[(Complex64, Complex64); 3]> = OnceLock::new();
    let kc = KC.get_or_init(|| {
        let k = kappa_maps();
        [0, 1, 2].map(|i| (k[i].mul.embed_beta(), k[i].add.embed_beta()))
    });
    let mut z = z0_exact().embed_beta();
    for &d in digits.iter().rev() {
        let (m, a) = kc[d as usize];
        z = m * z + a;
    }
    z
}

/// kappa(t) from the first d base-3 digits of t in [0, 1].
pub fn kappa(t: f64, d: usize) -> Complex64 {
    let digits: Vec<u8> = if t >= 1.0 {
        vec![2; d]
    } else {
        let mut x = t.max(0.0);
        (0..d)
            .map(|_| {
                x *= 3.0;
                let k = (x.floor() as u8).min(2);
                x -= k as f64;
                k
            })
            .collect()
    };
    kappa_digits(&digits)
}

/// kappa(k / 3^d) - z_0 for k = 0..=3^d: the arc K sampled in parameter order.
pub fn k_curve(d: usize) -> Vec<Complex64> {
    let z0 = z0_exact().embed_beta();
    let n = 3usize.pow(d as u32);
    let mut pts: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut digits = vec![0u8; d];
            let mut r = k;
            for i in (0..d).rev() {
                digits[i] = (r % 3) as u8;
                r /= 3;
            }
            kappa_digits(&digits) - z0
        })
        .collect();
    pts.push(kappa_endpoints_exact().1.embed_beta() - z0);
    pts
}

#[derive(Clone, Debug, Serialize)]
pub struct TribReport {
    pub depth: usize,
    /// Hausdorff distance between K and (kappa(1) - z_0) - K.
    pub symmetry: f64,
    /// Hausdorff distance between K and its three-piece decomposition.
    pub decomposition: f64,
    /// Largest distance from a point of K' to the r-cloud and to the r-cloud + beta^{-1}.
    pub inclusion: [f64; 2],
    pub r_depth: usize,
}

/// Sampled checks of the arc K: symmetry, self-similar decomposition,
/// and K' inside r and r + beta^{-1}.
pub fn verify_trib(depth: usize, r_depth: usize) -> TribReport {
    let k = k_curve(depth);
    let e = (&kappa_endpoints_exact().1 - &z0_exact()).embed_beta();
    let sym: Vec<Complex64> = k.iter().map(|z| e - z).collect();
    let symmetry = hausdorff(&k, &sym);
    let b3 = beta_pow(-3).embed_beta();
    let b4 = beta_pow(-4).embed_beta();
    let k_next = k_curve(depth + 1);
    let pieces: Vec<Complex64> = k
        .iter()
        .flat_map(|&z| [b3 * z, b4 * z + b3, b3 * z + b3])
        .collect();
    let decomposition = hausdorff(&k_next, &pieces);
    let r = trib_cloud(r_depth);
    let binv = beta().inv();
    let rs = PointSet::new(r.clone());
    let rs_shift = PointSet::new(r.iter().map(|z| z + binv).collect());
    let z0 = z0_exact().embed_beta();
    let kp: Vec<Complex64> = k.iter().map(|z| z + z0).collect();
    let inclusion = [
        crate::geometry::directed_hausdorff(&kp, &rs),
        crate::geometry::directed_hausdorff(&kp, &rs_shift),
    ];
    TribReport { depth, symmetry, decomposition, inclusion, r_depth }
}

// ---------------------------------------------------------------- boundary curves

#[derive(Clone, Debug, Serialize)]
pub struct Segment {
    /// scale * K + translation
    pub scale_power: i32,
    pub translation: CubicNumber,
}

impl Segment {
    fn endpoints(&self) -> [CubicNumber; 2] {
        let z0 = z0_exact();
        let k1 = &kappa_endpoints_exact().1 - &z0;
        let s = beta_pow(self.scale_power);
        [self.translation.clone(), &(&s * &k1) + &self.translation]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundaryCurve {
    pub letter: char,
    pub segments: Vec<Segment>,
    pub polyline: Vec<Complex64>,
}

fn seg(p: i32, c0: i64, c1: i64, c2: i64, den: i64) -> Segment {
    Segment { scale_power: p, translation: CubicNumber::from_ratio(c0, c1, c2, den) }
}

/// Segments of the boundary curve of letter a (1-based), in order along the curve.
pub fn boundary_segments(a: usize) -> Result<Vec<Segment>, AyError> {
    let s = match a {
        1 => vec![
            seg(-1, 0, 0, 0, 1),
            seg(-2, 1, 1, 1, 1),
            seg(0, 3, 4, 3, 2),
            seg(-2, 3, 4, 3, 2),
            seg(-1, 1, 2, 1, 2),
            seg(0, 1, 2, 1, 2),
        ],
        2 | 3 => vec![seg(0, 0, 0, 0, 1), seg(1, 0, -1, 0, 1), seg(0, 1, 0, 1, 2), seg(1, 1, 0, 1, 2)],
        4 => vec![
            seg(1, 0, 0, 0, 1),
            seg(-1, 1, 1, 0, 1),
            seg(-3, 1, 1, 0, 1),
            seg(-2, -1, -1, -1, 1),
            seg(-2, 3, 2, 1, 2),
            seg(-1, 3, 2, 1, 2),
        ],
        5 | 6 => vec![seg(1, 0, 0, 0, 1), seg(-1, 1, 1, 0, 1), seg(1, 3, 2, 1, 2), seg(-1, 3, 2, 1, 2)],
        7 => vec![
            seg(-1, 0, 0, 0, 1),
            seg(0, -1, 0, 0, 1),
            seg(-2, -1, 0, 0, 1),
            seg(-1, -2, -1, -1, 1),
            seg(-2, 1, 2, 1, 2),
            seg(0, 1, 2, 1, 2),
        ],
        // the third piece is printed without its arc; it is beta^{-1} K translated
        8 | 9 => vec![seg(-1, 0, 0, 0, 1), seg(0, -1, 0, 0, 1), seg(-1, 1, 2, 1, 2), seg(0, 1, 2, 1, 2)],
        _ => return Err(AyError::BadLetter(a)),
    };
    Ok(s)
}

/// Consecutive segments (cyclically) share exactly one endpoint, exactly.
pub fn segments_form_closed_chain(segs: &[Segment]) -> bool {
    let n = segs.len();
    (0..n).all(|i| {
        let e1 = segs[i].endpoints();
        let e2 = segs[(i + 1) % n].endpoints();
        let shared = e1.iter().filter(|p| e2.contains(p)).count();
        shared == 1
    })
}

pub fn boundary_curve(a: usize, depth: usize) -> Result<BoundaryCurve, AyError> {
    let segments = boundary_segments(a)?;
    let k = k_curve(depth);
    let mut polyline: Vec<Complex64> = Vec::new();
    let n = segments.len();
    for (i, s) in segments.iter().enumerate() {
        let sc = beta_pow(s.scale_power).embed_beta();
        let tr = s.translation.embed_beta();
        let mut pts: Vec<Complex64> = k.iter().map(|z| sc * z + tr).collect();
        // orient so that this segment ends where the next one begins
        let next = segments[(i + 1) % n].endpoints();
        let end = s.endpoints()[1].clone();
        if !next.contains(&end) {
            pts.reverse();
        }
        if !polyline.is_empty() {
            pts.remove(0);
        }
        polyline.extend(pts);
    }
    Ok(BoundaryCurve { letter: LETTERS[a - 1], segments, polyline })
}

// ---------------------------------------------------------------- IFS

/// F_left = union of beta^{-1}(shift + F_child).
#[derive(Clone, Debug)]
pub struct IfsEquation {
    pub name: String,
    pub left: Letter,
    pub terms: Vec<(CubicNumber, Letter)>,
}

/// The six set equations, letters 0-based.
pub fn ifs_equations() -> Vec<IfsEquation> {
    let z = CubicNumber::from_int(0);
    let mb = CubicNumber::from_ints(0, -1, 0);
    let binv = beta_pow(-1);
    let eq = |name: &str, left: Letter, terms: Vec<(CubicNumber, Letter)>| IfsEquation { name: name.into(), left, terms };
    vec![
        eq("F1 = b^-1 F2 u b^-1(-b + F5)", 0, vec![(z.clone(), 1), (mb.clone(), 4)]),
        eq("F2 = b^-1 F4 u b^-1(-b^-1 + F5)", 1, vec![(z.clone(), 3), (-&binv, 4)]),
        eq("F4 = b^-1 F1 u b^-1(b^-1 + F7)", 3, vec![(z.clone(), 0), (binv.clone(), 6)]),
        eq("F5 = b^-1 F1 u b^-1(b^-1 + F8)", 4, vec![(z.clone(), 0), (binv.clone(), 7)]),
        eq("F7 = b^-1 F2 u b^-1(-b + F8)", 6, vec![(z.clone(), 1), (mb, 7)]),
        eq("F8 = b^-1 F2", 7, vec![(z, 1)]),
    ]
}

#[derive(Clone, Debug, Serialize)]
pub struct IfsResidual {
    pub name: String,
    /// Both sides truncated so that they are the same finite set.
    pub matched: f64,
    /// Right side built from depth-n clouds: distance between depths n and n + 1.
    pub lagged: f64,
    pub bound: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct IfsReport {
    pub depth: usize,
    pub constant: f64,
    pub constant_depth: usize,
    pub residuals: Vec<IfsResidual>,
    pub passed: bool,
}

/// 2 max |z| over the clouds at `depth`: a Hausdorff constant for truncation.
pub fn truncation_constant(sys: &FractalSystem, depth: usize) -> Result<f64, AyError> {
    let mut r: f64 = 0.0;
    for a in 0..9u8 {
        let c = sys.cloud(a, depth, usize::MAX)?;
        r = r.max(c.points.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    Ok(2.0 * r)
}

pub fn verify_ifs(depth: usize, tol: f64, constant_depth: usize) -> Result<IfsReport, AyError> {
    let sys = fractal_system();
    let c = truncation_constant(&sys, constant_depth)?;
    let clouds: Vec<Vec<Complex64>> = (0..9u8)
        .into_par_iter()
        .map(|a| sys.cloud(a, depth, usize::MAX).map(|c| c.points))
        .collect::<Result<_, _>>()?;
    let shallow: Vec<Vec<Complex64>> = (0..9u8)
        .into_par_iter()
        .map(|a| sys.cloud(a, depth - 1, usize::MAX).map(|c| c.points))
        .collect::<Result<_, _>>()?;
    let deep: Vec<Vec<Complex64>> = (0..9u8)
        .into_par_iter()
        .map(|a| sys.cloud(a, depth + 1, usize::MAX).map(|c| c.points))
        .collect::<Result<_, _>>()?;
    let bound = c * beta().norm().powi(-(depth as i32)) + tol;
    let binv = beta().inv();
    let rhs = |eq: &IfsEquation, src: &Vec<Vec<Complex64>>| -> Vec<Complex64> {
        eq.terms
            .iter()
            .flat_map(|(s, child)| {
                let s = s.embed_beta();
                src[*child as usize].iter().map(move |z| binv * (s + z))
            })
            .collect()
    };
    let mut residuals = Vec::new();
    for eq in ifs_equations() {
        let matched = hausdorff(&clouds[eq.left as usize], &rhs(&eq, &shallow));
        let lagged = hausdorff(&clouds[eq.left as usize], &rhs(&eq, &clouds));
        residuals.push(IfsResidual {
            passed: matched <= bound && lagged <= bound,
            name: eq.name,
            matched,
            lagged,
            bound,
        });
    }
    for (x, y) in [(1usize, 2usize), (4, 5), (7, 8)] {
        let matched = hausdorff(&clouds[x], &clouds[y]);
        let lagged = hausdorff(&clouds[x], &deep[y]);
        residuals.push(IfsResidual {
            name: format!("F{} = F{}", x + 1, y + 1),
            passed: matched <= bound && lagged <= bound,
            matched,
            lagged,
            bound,
        });
    }
    let passed = residuals.iter().all(|r| r.passed);
    Ok(IfsReport { depth, constant: c, constant_depth, residuals, passed })
}

// ---------------------------------------------------------------- URP witnesses

#[derive(Clone, Debug, Serialize)]
pub struct UrpRow {
    pub case: String,
    pub letter: char,
    pub witness: usize,
    pub path: String,
    pub expected: CubicNumber,
    pub computed: CubicNumber,
    pub exact_match: bool,
    pub value: Complex64,
    /// Distances to the two subfractals the value is claimed to join,
    /// from their depth-14 clouds.
    pub cloud_distances: [f64; 2],
    /// Upper bounds on the distances to the full subfractals.
    pub deep_distances: [f64; 2],
}

#[derive(Clone, Debug, Serialize)]
pub struct UrpReport {
    pub rows: Vec<UrpRow>,
    pub cloud_depth: usize,
    pub exact_ok: bool,
    pub cloud_ok: bool,
    pub deep_ok: bool,
}

fn tr(sigma: &Substitution, parent: char, p: &str, c: char, s: &str) -> PssTriple {
    PssTriple {
        parent: sigma.letter(parent).expect("letter"),
        prefix: sigma.parse(p).expect("word"),
        center: sigma.letter(c).expect("letter"),
        suffix: sigma.parse(s).expect("word"),
    }
}

/// Builds a path from (p, c, s) triples given as strings, parents inferred.
fn chain(sigma: &Substitution, parent: char, triples: &[(&str, char, &str)]) -> Vec<PssTriple> {
    let mut cur = parent;
    triples
        .iter()
        .map(|&(p, c, s)| {
            let t = tr(sigma, cur, p, c, s);
            cur = c;
            t
        })
        .collect()
}

/// (case, letter, witness number, path, expected value)
pub fn urp_witnesses() -> Vec<(String, char, usize, PssPath, CubicNumber)> {
    let s = substitution();
    let fin = |parent: char, t: &[(&str, char, &str)]| {
        PssPath::with_empty_prefix_tail(&s, s.letter(parent).unwrap(), chain(&s, parent, t)).expect("valid witness")
    };
    let per = |parent: char, head: &[(&str, char, &str)], period: &[(&str, char, &str)]| {
        let h = chain(&s, parent, head);
        let last = h.last().map(|t| s.alphabet()[t.center as usize]).unwrap_or(parent);
        let p = chain(&s, last, period);
        PssPath::eventually_periodic(&s, s.letter(parent).unwrap(), h, p).expect("valid witness")
    };
    let q = CubicNumber::from_ratio;
    let i = CubicNumber::from_ints;
    vec![
        ("i".into(), '1', 1, fin('1', &[("3", '5', "")]), i(-1, 0, 0)),
        (
            "i".into(),
            '1',
            2,
            per('1', &[("", '3', "5"), ("", '4', "6")], &[("1", '7', ""), ("", '2', "9"), ("", '4', "5")]),
            q(-3, -2, -1, 2),
        ),
        ("ii".into(), '2', 1, fin('2', &[("4", '5', "")]), i(-2, -2, -1)),
        ("ii".into(), '2', 2, fin('2', &[("4", '5', ""), ("1", '8', "")]), i(2, 1, 1)),
        ("iii".into(), '3', 1, fin('3', &[("4", '6', "")]), i(-2, -2, -1)),
        ("iii".into(), '3', 2, fin('3', &[("4", '6', ""), ("1", '9', "")]), i(2, 1, 1)),
        ("iv".into(), '4', 1, fin('4', &[("1", '7', "")]), i(2, 2, 1)),
        ("iv".into(), '4', 2, fin('4', &[("", '1', "7"), ("3", '5', "")]), i(-1, -1, -1)),
        ("v".into(), '5', 1, fin('5', &[("1", '8', "")]), i(2, 2, 1)),
        (
            "v".into(),
            '5',
            2,
            per('5', &[("", '1', "8"), ("3", '5', ""), ("", '1', "8")], &[("", '3', "5"), ("4", '6', ""), ("", '1', "9")]),
            q(7, 6, 3, 2),
        ),
        ("vi".into(), '6', 1, fin('6', &[("1", '9', "")]), i(2, 2, 1)),
        (
            "vi".into(),
            '6',
            2,
            per('6', &[("", '1', "9"), ("3", '5', ""), ("", '1', "8")], &[("", '3', "5"), ("4", '6', ""), ("", '1', "9")]),
            q(7, 6, 3, 2),
        ),
        ("vii".into(), '7', 1, fin('7', &[("2", '9', "")]), i(-1, 0, 0)),
        (
            "vii".into(),
            '7',
            2,
            per('7', &[("", '2', "9"), ("4", '5', ""), ("", '1', "8")], &[("", '3', "5"), ("4", '6', ""), ("", '1', "9")]),
            q(1, 2, 1, 2),
        ),
    ]
}

/// Upper bound on the distance from w to the full fractal of letter a,
/// by branch and bound down to resolution `eps`.
pub fn distance_to_fractal(sys: &FractalSystem, a: Letter, w: Complex64, eps: f64) -> f64 {
    let r = sys.radius_bound();
    let binv = sys.beta.inv();
    let shrink = 1.0 / sys.beta.norm();
    let mut best = w.norm();
    // (point, letter, beta^{-m}, remaining radius)
    let mut stack = vec![(Complex64::new(0.0, 0.0), a, Complex64::new(1.0, 0.0), r)];
    while let Some((z, c, pw, rad)) = stack.pop() {
        let d = (w - z).norm();
        best = best.min(d);
        if d - rad > best || rad < eps {
            continue;
        }
        let npw = pw * binv;
        for k in 0..sys.decompositions(c).len() {
            let child = sys.decompositions(c)[k].center;
            stack.push((z + npw * sys.prefix_weight(c, k), child, npw, rad * shrink));
        }
    }
    best
}

pub fn verify_urp_witnesses(cloud_depth: usize, tol: f64) -> Result<UrpReport, AyError> {
    let sigma = substitution();
    let sys = fractal_system();
    let g = gamma_exact();
    let bx = b();
    let rows: Vec<UrpRow> = urp_witnesses()
        .into_par_iter()
        .map(|(case, letter, witness, path, expected)| {
            let computed = value_of_path(&path, &g, &bx).expect("beta invertible");
            let value = computed.embed_beta();
            let a = sigma.letter(letter).expect("letter");
            let img = sigma.image(a);
            // the two subfractals beta^{-1} F_{b} and beta^{-1}(gamma_b + F_c), sigma(a) = bc
            let subs = [(Complex64::new(0.0, 0.0), img[0]), (sys.gamma[img[0] as usize], img[1])];
            let mut cloud_distances = [0.0; 2];
            let mut deep_distances = [0.0; 2];
            for (k, &(shift, child)) in subs.iter().enumerate() {
                let w = sys.beta * value - shift;
                let cloud = sys.cloud(child, cloud_depth - 1, usize::MAX).expect("small cloud");
                let ps = PointSet::new(cloud.points);
                cloud_distances[k] = ps.nearest(w).0 / sys.beta.norm();
                deep_distances[k] = distance_to_fractal(&sys, child, w, tol * 1e-2) / sys.beta.norm();
            }
            UrpRow {
                case,
                letter,
                witness,
                path: path.display(&sigma),
                exact_match: computed == expected,
                expected,
                computed,
                value,
                cloud_distances,
                deep_distances,
            }
        })
        .collect();
    let exact_ok = rows.iter().all(|r| r.exact_match);
    let cloud_ok = rows.iter().all(|r| r.cloud_distances.iter().all(|&d| d <= tol));
    let deep_ok = rows.iter().all(|r| r.deep_distances.iter().all(|&d| d <= tol));
    Ok(UrpReport { rows, cloud_depth, exact_ok, cloud_ok, deep_ok })
}

// ---------------------------------------------------------------- boundary lemmas

#[derive(Clone, Debug, Serialize)]
pub struct BoundaryReport {
    pub depth: usize,
    pub tol: f64,
    pub separations: [f64; 3],
    pub margin: f64,
    pub separations_ok: bool,
    /// Largest |p| over points of K within tol of each affine image.
    pub rauzy3_spread: [f64; 2],
    /// Distance of the closest such point to 0.
    pub rauzy3_nearest_zero: [f64; 2],
    pub rauzy3_ok: bool,
    pub rauzy2_clusters: usize,
    pub rauzy2_radius: f64,
    pub rauzy2_ok: bool,
    pub passed: bool,
}

fn close_points(a: &[Complex64], b: &PointSet, tol: f64) -> Vec<Complex64> {
    a.par_iter().filter(|&&z| b.nearest(z).0 <= tol).cloned().collect()
}

pub fn verify_boundary_lemmas(depth: usize, tol: f64, margin: f64) -> BoundaryReport {
    let rcloud = trib_cloud(depth + 6);
    let k = k_curve(depth);
    let z0 = z0_exact().embed_beta();
    let kp: Vec<Complex64> = k.iter().map(|z| z + z0).collect();
    let c = |x: CubicNumber| x.embed_beta();
    let r_set = PointSet::new(rcloud.clone());
    let shifted = |s: Complex64| PointSet::new(rcloud.iter().map(|z| z + s).collect());
    let sep1 = min_distance(&rcloud, &shifted(c(CubicNumber::from_ratio(-1, 0, 1, 2))));
    let sep2 = min_distance(&kp, &shifted(c(CubicNumber::from_ratio(3, 2, 1, 2))));
    let b2 = beta_pow(-2).embed_beta();
    let sep3 = min_distance(&kp, &PointSet::new(rcloud.iter().map(|z| b2 * z).collect()));
    drop(r_set);
    let separations = [sep1, sep2, sep3];
    let separations_ok = separations.iter().all(|&s| s > margin);

    let bb = beta();
    let images = [
        k.iter().map(|z| bb * z + c(CubicNumber::from_ratio(1, 0, 1, 2))).collect::<Vec<_>>(),
        k.iter().map(|z| bb * bb * z + c(CubicNumber::from_ratio(1, 0, -1, 2))).collect::<Vec<_>>(),
    ];
    let mut spread = [0.0; 2];
    let mut nearest = [0.0; 2];
    for (i, img) in images.iter().enumerate() {
        let close = close_points(&k, &PointSet::new(img.clone()), tol);
        spread[i] = close.iter().map(|z| z.norm()).fold(0.0, f64::max);
        nearest[i] = PointSet::new(img.clone()).nearest(Complex64::new(0.0, 0.0)).0;
    }
    // a neighbourhood of 0 of the size of the sampling tolerance
    let rauzy3_ok = spread.iter().all(|&s| s <= 10.0 * tol);

    let s1 = c(CubicNumber::from_ints(-4, -3, -2));
    let s2 = c(CubicNumber::from_ratio(-7, -4, -3, 2));
    let a1: Vec<Complex64> = k.iter().map(|z| z + s1).collect();
    let a2 = PointSet::new(k.iter().map(|z| z + s2).collect());
    let close = close_points(&a1, &a2, tol);
    let cl = clusters(&close, 10.0 * tol);
    let radius = cl
        .iter()
        .map(|g| {
            let cen: Complex64 = g.iter().map(|&i| close[i]).sum::<Complex64>() / g.len() as f64;
            g.iter().map(|&i| (close[i] - cen).norm()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    let rauzy2_ok = cl.len() == 1;
    BoundaryReport {
        depth,
        tol,
        separations,
        margin,
        separations_ok,
        rauzy3_spread: spread,
        rauzy3_nearest_zero: nearest,
        rauzy3_ok,
        rauzy2_clusters: cl.len(),
        rauzy2_radius: radius,
        rauzy2_ok,
        passed: separations_ok && rauzy3_ok && rauzy2_ok,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_at_zero() {
        let a = alpha();
        assert!((ay_map(0.0) - (1.0 + a) / 2.0).abs() < 1e-15);
        assert_eq!(half_exchange(0.25, 0.0, 1.0), 0.75);
    }

    #[test]
    fn continuity_pieces() {
        let m = ay_affine();
        assert_eq!(m.pieces.len(), 7);
        assert_eq!(circle_discontinuities().len(), 5);
        for i in 0..1000 {
            let x = (i as f64 + 0.37) / 1000.0;
            assert!((m.eval(x) - ay_map(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn gamma_is_eigenvector_exactly() {
        let g = gamma_exact();
        let mg = matrix().apply_cubic(&g);
        let bg: Vec<CubicNumber> = g.iter().map(|x| &b() * x).collect();
        assert_eq!(mg, bg);
    }

    #[test]
    fn closed_forms() {
        assert_eq!(z0_exact(), CubicNumber::from_ratio(-3, -2, -1, 2));
        let (k0, k1) = kappa_endpoints_exact();
        assert_eq!(&k0 - &z0_exact(), CubicNumber::from_int(0));
        assert_eq!(&k1 - &z0_exact(), CubicNumber::from_ratio(-1, -2, -1, 2));
        assert_eq!(beta_pow(-2), CubicNumber::from_ints(2, 2, 1));
    }

    #[test]
    fn curves_close_up() {
        for a in 1..=9 {
            let s = boundary_segments(a).unwrap();
            assert!(segments_form_closed_chain(&s), "curve {a}");
        }
        assert_eq!(boundary_segments(8).unwrap().len(), 4);
        assert_eq!(boundary_segments(1).unwrap().len(), 6);
    }

    #[test]
    fn trib_basics() {
        assert_eq!(trib_value(&[0, 0, 0]).unwrap(), Complex64::new(0.0, 0.0));
        let b3 = beta().powi(-3);
        assert!((trib_value(&[1, 0, 0]).unwrap() - b3).norm() < 1e-15);
        assert!(trib_value(&[1, 1, 1]).is_err());
    }
}
