//! Cross-checks of the cubic field, integer eigendata and substitution
//! machinery against independent oracles.

use num_complex::Complex64;
use proptest::prelude::*;

use wandering_iem::ay;
use wandering_iem::numberfield::{alpha, beta, char_poly, eigen_pair, root_of_unity_check, CubicNumber};
use wandering_iem::substitution::{central_part, gamma_weight, prefix_suffix_decompose, TwoSidedWindow};

fn small() -> impl Strategy<Value = CubicNumber> {
    (-9i64..=9, -9i64..=9, -9i64..=9, 1i64..=7).prop_map(|(a, b, c, d)| CubicNumber::from_ratio(a, b, c, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn embedding_is_multiplicative(x in small(), y in small()) {
        let p = (&x * &y).embed_beta();
        let q = x.embed_beta() * y.embed_beta();
        prop_assert!((p - q).norm() <= 1e-12 * q.norm().max(1.0));
        let s = (&x + &y).embed_alpha();
        prop_assert!((s - x.embed_alpha() - y.embed_alpha()).abs() <= 1e-12 * s.abs().max(1.0));
    }

    #[test]
    fn inverse_is_exact(x in small()) {
        prop_assume!(!x.is_zero());
        let inv = x.checked_inv().unwrap();
        prop_assert_eq!(&x * &inv, CubicNumber::from_int(1));
    }
}

#[test]
fn char_poly_vanishes_at_embedded_roots() {
    let p = char_poly(&ay::matrix());
    for z in [Complex64::new(alpha(), 0.0), beta(), Complex64::new(1.0 / alpha(), 0.0)] {
        assert!(p.eval(z).norm() <= 1e-10 * p.eval_scale(z), "{z}");
    }
}

#[test]
fn eigenvector_at_beta_is_proportional_to_gamma() {
    let e = eigen_pair(&ay::matrix(), Complex64::new(-0.77, 1.11)).unwrap();
    assert!((e.value - beta()).norm() < 1e-12);
    let g = ay::gamma();
    let k = e.vector[0] / g[0];
    for (v, w) in e.vector.iter().zip(&g) {
        assert!((v - k * w).norm() < 1e-10);
    }
}

#[test]
fn perron_pair_matches_power_iteration() {
    let m = ay::matrix();
    let e = eigen_pair(&m, Complex64::new(1.84, 0.0)).unwrap();
    assert!((e.value.re - 1.0 / alpha()).abs() < 1e-12 && e.value.im.abs() < 1e-12);
    let a = m.to_f64();
    let mut v = vec![1.0f64; 9];
    let mut lam = 0.0;
    for _ in 0..500 {
        let w: Vec<f64> = (0..9).map(|i| (0..9).map(|j| a[i][j] * v[j]).sum()).collect();
        lam = w.iter().cloned().fold(0.0, f64::max);
        v = w.iter().map(|x| x / lam).collect();
    }
    assert!((lam - e.value.re).abs() < 1e-9);
    for (x, y) in e.vector.iter().zip(&v) {
        assert!(x.re > 0.0 && x.im.abs() < 1e-12);
        assert!((x.re - y).abs() < 1e-8);
    }
}

#[test]
fn beta_direction_is_not_a_root_of_unity() {
    assert_eq!(root_of_unity_check(beta(), 360), None);
}

#[test]
fn abelianization_of_powers() {
    let s = ay::substitution();
    let m = s.abelianization();
    for k in 1..=4 {
        assert_eq!(s.power(k).abelianization(), m.pow(k as u32));
    }
}

#[test]
fn image_of_one_matches_beta_gamma_one() {
    let s = ay::substitution();
    let g = ay::gamma_exact();
    let lhs = gamma_weight(s.image(0), &g).unwrap();
    assert_eq!(lhs, CubicNumber::from_int(1));
    assert_eq!(&CubicNumber::t() * &g[0], lhs);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn gamma_weight_is_additive(u in prop::collection::vec(0u8..9, 0..20), v in prop::collection::vec(0u8..9, 0..20)) {
        let g = ay::gamma();
        let mut uv = u.clone();
        uv.extend(&v);
        let d = gamma_weight(&uv, &g).unwrap() - gamma_weight(&u, &g).unwrap() - gamma_weight(&v, &g).unwrap();
        prop_assert!(d.norm() < 1e-12);
    }

    #[test]
    fn functional_equation_twice(w in prop::collection::vec(0u8..9, 1..=6)) {
        let s = ay::substitution();
        let g = ay::gamma();
        let b = beta();
        let d = gamma_weight(&s.iterate(&w, 2), &g).unwrap() - b * b * gamma_weight(&w, &g).unwrap();
        prop_assert!(d.norm() <= 1e-10);
    }

    /// Desubstituting a window cut from a long image and re-expanding the
    /// chain reproduces the window around its origin.
    #[test]
    fn central_part_reproduces_window(letter in 0u8..9, pos in 2000usize..6000) {
        let s = ay::substitution();
        let word = s.iterate(&[letter], 16);
        prop_assume!(word.len() > pos + 2000);
        let depth = 3;
        let win = TwoSidedWindow::new(word[pos - 1500..pos + 1500].to_vec(), 1500);
        let chain = prefix_suffix_decompose(&s, &win, depth).unwrap();
        let (left, right) = central_part(&s, &chain);
        prop_assert!(left.len() <= 1500 && right.len() <= 1500);
        prop_assert_eq!(&word[pos - left.len()..pos], &left[..]);
        prop_assert_eq!(&word[pos..pos + right.len()], &right[..]);
    }
}
