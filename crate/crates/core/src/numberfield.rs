//! Exact arithmetic in Q[t]/(t^3 + t^2 + t - 1) and integer-matrix eigendata.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("division by zero in the cubic field")]
    DivisionByZero,
    #[error("cannot parse rational {0:?}")]
    Parse(String),
    #[error("matrix must be square, got {rows} rows with a row of length {len}")]
    NotSquare { rows: usize, len: usize },
    #[error("eigenvalue iteration did not converge from seed {seed}")]
    NoConvergence { seed: Complex64 },
    #[error("eigenvector residual {residual:e} exceeds tolerance")]
    EigenResidual { residual: f64 },
}

/// Minimal operations shared by exact cubic numbers and complex doubles.
pub trait FieldElement: Clone {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn inv(&self) -> Option<Self>;
}

impl FieldElement for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn inv(&self) -> Option<Self> {
        if self.norm() == 0.0 {
            None
        } else {
            Some(self.inv())
        }
    }
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // huge numerators: fall back on a scaled division
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// c0 + c1 t + c2 t^2 modulo t^3 + t^2 + t - 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CubicNumber {
    pub c: [BigRational; 3],
}

impl CubicNumber {
    pub fn new(c0: BigRational, c1: BigRational, c2: BigRational) -> Self {
        CubicNumber { c: [c0, c1, c2] }
    }

    pub fn from_ints(c0: i64, c1: i64, c2: i64) -> Self {
        Self::new(rat(c0), rat(c1), rat(c2))
    }

    /// (c0 + c1 t + c2 t^2) / den
    pub fn from_ratio(c0: i64, c1: i64, c2: i64, den: i64) -> Self {
        let d = rat(den);
        Self::new(rat(c0) / &d, rat(c1) / &d, rat(c2) / d)
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_ints(n, 0, 0)
    }

    /// The generator t, embedded as alpha (real) or beta (complex).
    pub fn t() -> Self {
        Self::from_ints(0, 1, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    fn reduce(d: [BigRational; 5]) -> Self {
        // t^3 = 1 - t - t^2, t^4 = 2t - 1
        let [d0, d1, d2, d3, d4] = d;
        let c0 = d0 + &d3 - &d4;
        let c1 = d1 - &d3 + d4 * rat(2);
        let c2 = d2 - d3;
        Self::new(c0, c1, c2)
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        Self::new(&self.c[0] * k, &self.c[1] * k, &self.c[2] * k)
    }

    pub fn checked_inv(&self) -> Result<Self, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        // columns: self * 1, self * t, self * t^2
        let cols = [
            self.clone(),
            self * &Self::t(),
            self * &Self::from_ints(0, 0, 1),
        ];
        let mut a: Vec<Vec<BigRational>> = (0..3)
            .map(|r| {
                let mut row: Vec<BigRational> = cols.iter().map(|c| c.c[r].clone()).collect();
                row.push(if r == 0 { rat(1) } else { rat(0) });
                row
            })
            .collect();
        for col in 0..3 {
            let piv = (col..3)
                .find(|&r| !a[r][col].is_zero())
                .ok_or(FieldError::DivisionByZero)?;
            a.swap(col, piv);
            let p = a[col][col].clone();
            for x in a[col].iter_mut() {
                *x = &*x / &p;
            }
            for r in 0..3 {
                if r != col && !a[r][col].is_zero() {
                    let f = a[r][col].clone();
                    for k in 0..4 {
                        let v = &a[col][k] * &f;
                        a[r][k] = &a[r][k] - v;
                    }
                }
            }
        }
        Ok(Self::new(a[0][3].clone(), a[1][3].clone(), a[2][3].clone()))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, FieldError> {
        Ok(self * &other.checked_inv()?)
    }

    /// Integer power; negative exponents invert first.
    pub fn pow(&self, n: i32) -> Result<Self, FieldError> {
        let base = if n < 0 { self.checked_inv()? } else { self.clone() };
        let mut out = Self::from_int(1);
        for _ in 0..n.unsigned_abs() {
            out = &out * &base;
        }
        Ok(out)
    }

    pub fn embed(&self, root: Complex64) -> Complex64 {
        let c: Vec<f64> = self.c.iter().map(rat_to_f64).collect();
        Complex64::new(c[0], 0.0) + root * c[1] + root * root * c[2]
    }

    pub fn embed_alpha(&self) -> f64 {
        self.embed(Complex64::new(alpha(), 0.0)).re
    }

    pub fn embed_beta(&self) -> Complex64 {
        self.embed(beta())
    }
}

/// Real root of t^3 + t^2 + t - 1.
pub fn alpha() -> f64 {
    static A: OnceLock<f64> = OnceLock::new();
    *A.get_or_init(|| {
        let mut x = 0.5f64;
        for _ in 0..60 {
            let f = ((x + 1.0) * x + 1.0) * x - 1.0;
            let df = (3.0 * x + 2.0) * x + 1.0;
            x -= f / df;
        }
        x
    })
}

/// Complex root of t^3 + t^2 + t - 1 with positive imaginary part.
pub fn beta() -> Complex64 {
    static B: OnceLock<Complex64> = OnceLock::new();
    *B.get_or_init(|| {
        let a = alpha();
        let re = (-1.0 - a) / 2.0;
        let im = (1.0 / a - re * re).sqrt();
        let mut z = Complex64::new(re, im);
        for _ in 0..4 {
            let f = ((z + 1.0) * z + 1.0) * z - 1.0;
            let df = (z * 3.0 + 2.0) * z + 1.0;
            z -= f / df;
        }
        z
    })
}

impl FieldElement for CubicNumber {
    fn zero() -> Self {
        Self::from_int(0)
    }
    fn one() -> Self {
        Self::from_int(1)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn inv(&self) -> Option<Self> {
        self.checked_inv().ok()
    }
}

impl<'a> Add<&'a CubicNumber> for &'a CubicNumber {
    type Output = CubicNumber;
    fn add(self, o: &CubicNumber) -> CubicNumber {
        CubicNumber::new(&self.c[0] + &o.c[0], &self.c[1] + &o.c[1], &self.c[2] + &o.c[2])
    }
}

impl<'a> Sub<&'a CubicNumber> for &'a CubicNumber {
    type Output = CubicNumber;
    fn sub(self, o: &CubicNumber) -> CubicNumber {
        CubicNumber::new(&self.c[0] - &o.c[0], &self.c[1] - &o.c[1], &self.c[2] - &o.c[2])
    }
}

impl<'a> Mul<&'a CubicNumber> for &'a CubicNumber {
    type Output = CubicNumber;
    fn mul(self, o: &CubicNumber) -> CubicNumber {
        let mut d: [BigRational; 5] = std::array::from_fn(|_| rat(0));
        for i in 0..3 {
            if self.c[i].is_zero() {
                continue;
            }
            for j in 0..3 {
                d[i + j] = &d[i + j] + &self.c[i] * &o.c[j];
            }
        }
        CubicNumber::reduce(d)
    }
}

impl Neg for &CubicNumber {
    type Output = CubicNumber;
    fn neg(self) -> CubicNumber {
        CubicNumber::new(-&self.c[0], -&self.c[1], -&self.c[2])
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<CubicNumber> for CubicNumber {
            type Output = CubicNumber;
            fn $m(self, o: CubicNumber) -> CubicNumber {
                $tr::$m(&self, &o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for CubicNumber {
    type Output = CubicNumber;
    fn neg(self) -> CubicNumber {
        -&self
    }
}

impl fmt::Display for CubicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["", "b", "b^2"];
        let mut first = true;
        for (k, c) in self.c.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            match (k, a.is_one()) {
                (0, _) => write!(f, "{a}")?,
                (_, true) => write!(f, "{}", names[k])?,
                (_, false) => write!(f, "{a}*{}", names[k])?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

fn parse_rational(s: &str) -> Result<BigRational, FieldError> {
    let err = || FieldError::Parse(s.to_string());
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| err())?;
            let d: BigInt = d.trim().parse().map_err(|_| err())?;
            if d.is_zero() {
                return Err(err());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.trim().parse().map_err(|_| err())?)),
    }
}

impl Serialize for CubicNumber {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<String> = self.c.iter().map(|x| x.to_string()).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CubicNumber {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v: Vec<String> = Vec::deserialize(d)?;
        if v.len() != 3 {
            return Err(serde::de::Error::custom("cubic number needs 3 coefficients"));
        }
        let mut c = Vec::with_capacity(3);
        for s in &v {
            c.push(parse_rational(s).map_err(serde::de::Error::custom)?);
        }
        Ok(CubicNumber::new(c[0].clone(), c[1].clone(), c[2].clone()))
    }
}

/// Integer polynomial, coefficients from the constant term upward.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntPoly {
    pub coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(BigInt::zero());
        }
        IntPoly { coeffs }
    }

    pub fn from_i64(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_zero()
    }

    pub fn mul(&self, o: &IntPoly) -> IntPoly {
        let mut out = vec![BigInt::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }

    pub fn derivative(&self) -> IntPoly {
        if self.coeffs.len() == 1 {
            return IntPoly::from_i64(&[0]);
        }
        IntPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigInt::from(k))
                .collect(),
        )
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c.to_f64().unwrap_or(f64::NAN))
    }

    /// Sum of |c_k| |z|^k, the scale against which a vanishing value is judged.
    pub fn eval_scale(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * r + c.to_f64().unwrap_or(f64::NAN).abs())
    }

    /// Primitive gcd over the rationals, normalized to a positive leading coefficient.
    pub fn gcd(&self, o: &IntPoly) -> IntPoly {
        let to_rat = |p: &IntPoly| -> Vec<BigRational> {
            p.coeffs.iter().map(|c| BigRational::from_integer(c.clone())).collect()
        };
        let mut a = to_rat(self);
        let mut b = to_rat(o);
        let trim = |v: &mut Vec<BigRational>| {
            while v.len() > 1 && v.last().is_some_and(|c| c.is_zero()) {
                v.pop();
            }
        };
        trim(&mut a);
        trim(&mut b);
        let is_zero = |v: &Vec<BigRational>| v.iter().all(|c| c.is_zero());
        while !is_zero(&b) {
            // a mod b
            let mut r = a.clone();
            let lb = b.last().unwrap().clone();
            while r.len() >= b.len() && !is_zero(&r) {
                let f = r.last().unwrap() / &lb;
                let shift = r.len() - b.len();
                for (k, c) in b.iter().enumerate() {
                    r[shift + k] = &r[shift + k] - &f * c;
                }
                r.pop();
                trim(&mut r);
                if r.len() < b.len() {
                    break;
                }
            }
            if r.is_empty() {
                r.push(rat(0));
            }
            a = b;
            b = r;
        }
        // clear denominators and content
        let lcm = a
            .iter()
            .fold(BigInt::one(), |l, c| num_integer::Integer::lcm(&l, c.denom()));
        let ints: Vec<BigInt> = a.iter().map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer()).collect();
        let content = ints
            .iter()
            .fold(BigInt::zero(), |g, c| num_integer::Integer::gcd(&g, c));
        let mut ints: Vec<BigInt> = if content.is_zero() {
            ints
        } else {
            ints.into_iter().map(|c| c / &content).collect()
        };
        if ints.last().is_some_and(|c| c.is_negative()) {
            ints = ints.into_iter().map(|c| -c).collect();
        }
        IntPoly::new(ints)
    }

    /// Exact division; returns None when the remainder is nonzero or not integral.
    pub fn div_exact(&self, d: &IntPoly) -> Option<IntPoly> {
        if d.is_zero() || d.degree() > self.degree() {
            return if self.is_zero() { Some(self.clone()) } else { None };
        }
        let mut r = self.coeffs.clone();
        let n = self.degree() - d.degree();
        let mut q = vec![BigInt::zero(); n + 1];
        let ld = d.coeffs.last().unwrap();
        for k in (0..=n).rev() {
            let top = &r[k + d.degree()];
            if !(top % ld).is_zero() {
                return None;
            }
            let f = top / ld;
            for (j, c) in d.coeffs.iter().enumerate() {
                r[k + j] -= &f * c;
            }
            q[k] = f;
        }
        if r.iter().all(|c| c.is_zero()) {
            Some(IntPoly::new(q))
        } else {
            None
        }
    }

    pub fn squarefree_part(&self) -> IntPoly {
        let g = self.gcd(&self.derivative());
        if g.degree() == 0 {
            return self.clone();
        }
        self.div_exact(&g).unwrap_or_else(|| self.clone())
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() && !(first && k == 0) {
                continue;
            }
            if !first {
                write!(f, "{}", if c.is_negative() { " - " } else { " + " })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            first = false;
            let a = c.abs();
            match k {
                0 => write!(f, "{a}")?,
                1 if a.is_one() => write!(f, "t")?,
                1 => write!(f, "{a}t")?,
                _ if a.is_one() => write!(f, "t^{k}")?,
                _ => write!(f, "{a}t^{k}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for IntPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v: Vec<String> = Vec::deserialize(d)?;
        let c: Result<Vec<BigInt>, _> = v.iter().map(|s| s.parse::<BigInt>()).collect();
        Ok(IntPoly::new(c.map_err(serde::de::Error::custom)?))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    n: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self, FieldError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(FieldError::NotSquare { rows: n, len: r.len() });
            }
            data.extend(r.iter().map(|&x| BigInt::from(x)));
        }
        Ok(IntMatrix { n, data })
    }

    pub fn zeros(n: usize) -> Self {
        IntMatrix { n, data: vec![BigInt::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.n + j] = v;
    }

    pub fn mul(&self, o: &IntMatrix) -> IntMatrix {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * o.get(k, j);
                }
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> IntMatrix {
        (0..k).fold(Self::identity(self.n), |acc, _| acc.mul(self))
    }

    pub fn transpose(&self) -> IntMatrix {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.get(i, j).clone();
            }
        }
        out
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.data.iter().all(|x| x.is_positive())
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).to_f64().unwrap_or(f64::NAN)).collect())
            .collect()
    }

    pub fn apply_complex(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.to_f64()
            .iter()
            .map(|row| row.iter().zip(v).map(|(a, x)| x * *a).sum())
            .collect()
    }

    /// Exact product with a vector of cubic numbers.
    pub fn apply_cubic(&self, v: &[CubicNumber]) -> Vec<CubicNumber> {
        (0..self.n)
            .map(|i| {
                (0..self.n).fold(CubicNumber::from_int(0), |acc, j| {
                    let a = BigRational::from_integer(self.get(i, j).clone());
                    &acc + &v[j].scale(&a)
                })
            })
            .collect()
    }
}

impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).to_string()).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows: Vec<Vec<String>> = Vec::deserialize(d)?;
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in &rows {
            if r.len() != n {
                return Err(serde::de::Error::custom("matrix must be square"));
            }
            for s in r {
                data.push(s.parse::<BigInt>().map_err(serde::de::Error::custom)?);
            }
        }
        Ok(IntMatrix { n, data })
    }
}

/// det(tI - M) by Faddeev-LeVerrier; every division is exact.
pub fn char_poly(m: &IntMatrix) -> IntPoly {
    let n = m.dim();
    let mut c = vec![BigInt::zero(); n + 1];
    c[n] = BigInt::one();
    let mut mk = IntMatrix::zeros(n);
    for k in 1..=n {
        let mut next = m.mul(&mk);
        for i in 0..n {
            next.data[i * n + i] += &c[n - k + 1];
        }
        mk = next;
        let am = m.mul(&mk);
        let tr: BigInt = (0..n).map(|i| am.get(i, i).clone()).sum();
        c[n - k] = -tr / BigInt::from(k as i64);
    }
    IntPoly::new(c)
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenPair {
    pub value: Complex64,
    pub vector: Vec<Complex64>,
    pub multiplicity: usize,
}

fn is_root(p: &IntPoly, z: Complex64) -> bool {
    let sf = p.squarefree_part();
    if sf.degree() == 0 {
        return false;
    }
    sf.eval(z).norm() <= 1e-8 * sf.eval_scale(z).max(1.0)
}

/// Solve A x = b by Gaussian elimination with partial pivoting.
pub(crate) fn solve_complex(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Vec<Complex64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        let mut p = a[col][col];
        if p.norm() == 0.0 {
            p = Complex64::new(f64::MIN_POSITIVE, 0.0);
            a[col][col] = p;
        }
        for r in col + 1..n {
            let f = a[r][col] / p;
            if f.norm() == 0.0 {
                continue;
            }
            for k in col..n {
                let v = a[col][k];
                a[r][k] -= f * v;
            }
            let v = b[col];
            b[r] -= f * v;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let s: Complex64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

fn normalize_max(v: &mut [Complex64]) {
    let k = (0..v.len())
        .max_by(|&i, &j| v[i].norm().total_cmp(&v[j].norm()))
        .unwrap_or(0);
    let s = v[k];
    if s.norm() > 0.0 {
        for x in v.iter_mut() {
            *x /= s;
        }
    }
}

/// Refines an eigenvalue near `seed` and returns an eigenvector scaled so its
/// largest coordinate is 1.
pub fn eigen_pair(m: &IntMatrix, seed: Complex64) -> Result<EigenPair, FieldError> {
    let p = char_poly(m);
    let sf = p.squarefree_part();
    let dsf = sf.derivative();
    let mut z = seed;
    let mut converged = false;
    for _ in 0..200 {
        let d = dsf.eval(z);
        if d.norm() == 0.0 {
            break;
        }
        let step = sf.eval(z) / d;
        z -= step;
        if step.norm() <= 1e-15 * z.norm().max(1.0) {
            converged = true;
            break;
        }
    }
    if !converged && !is_root(&sf, z) {
        return Err(FieldError::NoConvergence { seed });
    }
    if z.im.abs() < 1e-13 * z.norm().max(1.0) {
        z.im = 0.0;
    }

    let mut multiplicity = 0;
    let mut g = p.clone();
    while g.degree() > 0 && is_root(&g, z) {
        multiplicity += 1;
        g = g.gcd(&g.derivative());
    }

    let n = m.dim();
    let a = m.to_f64();
    let shift = z + Complex64::new(1e-10 * z.norm().max(1.0), 0.0);
    let shifted: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Complex64::new(a[i][j], 0.0) - if i == j { shift } else { Complex64::new(0.0, 0.0) })
                .collect()
        })
        .collect();
    let mut v: Vec<Complex64> = (0..n).map(|i| Complex64::new(1.0 + 0.1 * i as f64, 0.03 * i as f64)).collect();
    for _ in 0..4 {
        v = solve_complex(shifted.clone(), v);
        normalize_max(&mut v);
    }
    let mv = m.apply_complex(&v);
    let residual = mv
        .iter()
        .zip(&v)
        .map(|(a, b)| (a - z * b).norm())
        .fold(0.0, f64::max);
    if residual > 1e-10 {
        return Err(FieldError::EigenResidual { residual });
    }
    Ok(EigenPair { value: z, vector: v, multiplicity })
}

/// Least n <= n_max with (z/|z|)^n real to 1e-9, if any.
pub fn root_of_unity_check(z: Complex64, n_max: u32) -> Option<u32> {
    let theta = z.arg();
    (1..=n_max).find(|&n| (n as f64 * theta).sin().abs() < 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_identities() {
        let t = CubicNumber::t();
        let t2 = &t * &t;
        assert_eq!(&t * &t2, CubicNumber::from_ints(1, -1, -1));
        assert_eq!(t.checked_inv().unwrap(), CubicNumber::from_ints(1, 1, 1));
        let x = CubicNumber::from_ratio(3, -2, 5, 7);
        assert_eq!(&x * &CubicNumber::from_int(1), x);
        assert_eq!(&x * &x.checked_inv().unwrap(), CubicNumber::from_int(1));
        assert_eq!(CubicNumber::from_int(0).checked_inv(), Err(FieldError::DivisionByZero));
    }

    #[test]
    fn embeddings_are_roots() {
        let a = alpha();
        assert!((a + a * a + a * a * a - 1.0).abs() < 1e-15);
        let b = beta();
        assert!((((b + 1.0) * b + 1.0) * b - 1.0).norm() < 1e-14);
        assert!((a * b.norm_sqr() - 1.0).abs() < 1e-12);
        assert!((b - Complex64::new(-0.771845, 1.11514)).norm() < 5e-6);
    }

    #[test]
    fn char_poly_small_cases() {
        assert_eq!(char_poly(&IntMatrix::identity(2)), IntPoly::from_i64(&[1, -2, 1]));
        let fib = IntMatrix::from_rows(&[vec![1, 1], vec![1, 0]]).unwrap();
        assert_eq!(char_poly(&fib), IntPoly::from_i64(&[-1, -1, 1]));
    }

    #[test]
    fn identity_eigen_multiplicity() {
        let e = eigen_pair(&IntMatrix::identity(3), Complex64::new(1.0, 0.0)).unwrap();
        assert!((e.value - 1.0).norm() < 1e-12);
        assert_eq!(e.multiplicity, 3);
    }

    #[test]
    fn root_of_unity_examples() {
        assert_eq!(root_of_unity_check(Complex64::new(0.0, 1.0), 16), Some(2));
        assert_eq!(root_of_unity_check(Complex64::new(-1.5, 0.0), 4), Some(1));
        assert_eq!(root_of_unity_check(beta(), 360), None);
    }

    #[test]
    fn gcd_detects_repeated_factor() {
        let p = IntPoly::from_i64(&[-1, 1]).mul(&IntPoly::from_i64(&[-1, 1])).mul(&IntPoly::from_i64(&[2, 1]));
        assert_eq!(p.gcd(&p.derivative()), IntPoly::from_i64(&[-1, 1]));
        assert_eq!(p.squarefree_part(), IntPoly::from_i64(&[-2, 1, 1]));
    }

    #[test]
    fn serde_round_trip() {
        let x = CubicNumber::from_ratio(-1, -2, -3, 2);
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"["-1/2","-1","-3/2"]"#);
        assert_eq!(serde_json::from_str::<CubicNumber>(&s).unwrap(), x);
        let m = IntMatrix::from_rows(&[vec![1, 2], vec![3, 4]]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<IntMatrix>(&s).unwrap(), m);
    }
}
