//! Interval exchanges and the Arnoux-Yoccoz map checked by direct simulation.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wandering_iem::ay;
use wandering_iem::iem::{first_return, itinerary_lenient, self_similarity_check, Iem, Renormalization, DEFAULT_RETURN_BUDGET};
use wandering_iem::numberfield::alpha;

fn random_iem() -> impl Strategy<Value = Iem> {
    (2usize..7)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(0.05f64..1.0, n),
                Just((0..n as u8).collect::<Vec<u8>>()).prop_shuffle(),
            )
        })
        .prop_map(|(w, pi1)| {
            let s: f64 = w.iter().sum();
            let mut l: Vec<f64> = w.iter().map(|x| x / s).collect();
            let last = 1.0 - l[..l.len() - 1].iter().sum::<f64>();
            *l.last_mut().unwrap() = last;
            let n = l.len();
            Iem::new(('a'..).take(n).collect(), l, (0..n as u8).collect(), pi1).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exchanges_are_bijective_on_a_grid(t in random_iem()) {
        let n = 10_000;
        let mut imgs: Vec<f64> = (0..n).map(|i| t.evaluate((i as f64 + 0.5) / n as f64).unwrap()).collect();
        for (i, &y) in imgs.iter().enumerate() {
            prop_assert!((0.0..1.0).contains(&y));
            let x = (i as f64 + 0.5) / n as f64;
            prop_assert!((t.map().inverse(y) - x).abs() < 1e-12);
        }
        imgs.sort_by(f64::total_cmp);
        prop_assert!(imgs.windows(2).all(|w| w[1] > w[0]));
        for p in &t.map().pieces {
            prop_assert!(((p.image_end() - p.image_start) - (p.end - p.start)).abs() < 1e-15);
        }
    }
}

#[test]
fn rotation_first_return_matches_simulation() {
    let t = Iem::rotation(0.7).unwrap();
    let cut = 0.7;
    let fr = first_return(t.map(), &t.partition(), cut, None, DEFAULT_RETURN_BUDGET).unwrap();
    for i in 0..700 {
        let x = (i as f64 + 0.25) / 1000.0;
        let mut y = t.map().eval(x);
        while y >= cut {
            y = t.map().eval(y);
        }
        assert!((fr.induced.eval(x) - y).abs() < 1e-12);
    }
}

#[test]
fn golden_rotation_renormalizes_to_itself() {
    // two continued-fraction steps: the first return to [0, g) is the scaled inverse
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let t = Iem::rotation(g * g).unwrap();
    let rep = self_similarity_check(t.map(), &t.partition(), Renormalization::scaling(g * g), 1000).unwrap();
    assert!(rep.is_scaled_copy, "{}", rep.max_residual);
    assert_eq!(rep.matrix.as_ref().map(|m| m.dim()), Some(2));
    let one_step = self_similarity_check(t.map(), &t.partition(), Renormalization::scaling(g), 1000).unwrap();
    assert!(!one_step.is_scaled_copy);
}

#[test]
fn generic_rotation_is_not_self_similar() {
    let t = Iem::rotation(0.3137).unwrap();
    let rep = self_similarity_check(t.map(), &t.partition(), Renormalization::scaling(0.55), 1000).unwrap();
    assert!(!rep.is_scaled_copy);
}

#[test]
fn ay_map_is_a_bijection_preserving_lengths() {
    let n = 10_000;
    let mut imgs: Vec<f64> = (0..n).map(|i| ay::ay_map((i as f64 + 0.5) / n as f64)).collect();
    imgs.sort_by(f64::total_cmp);
    assert!(imgs.windows(2).all(|w| w[1] > w[0]));
    assert!(imgs[0] >= 0.0 && imgs[n - 1] < 1.0);
    let f = ay::ay_affine();
    for p in &f.pieces {
        let mid = 0.5 * (p.start + p.end);
        assert!((f.eval(mid) - ay::ay_map(mid)).abs() < 1e-14);
    }
    assert!((ay::ay_map(0.0) - 0.5 * (1.0 + alpha())).abs() < 1e-15);
}

#[test]
fn ay_return_matrix_is_transposed_abelianization() {
    let p = ay::ay_partition().unwrap();
    assert_eq!(p.solutions, 1);
    assert!((p.lengths.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    let fr = first_return(&ay::ay_affine(), &p.partition, p.renorm.scale, Some(p.renorm), DEFAULT_RETURN_BUDGET).unwrap();
    assert_eq!(fr.matrix, Some(ay::matrix().transpose()));
    let rep = self_similarity_check(&ay::ay_affine(), &p.partition, p.renorm, 2000).unwrap();
    assert!(rep.is_scaled_copy, "{}", rep.max_residual);
}

/// The orbit of the renormalized point spells the substitution applied to the
/// orbit of the original point.
#[test]
fn ay_coding_refines_under_the_substitution() {
    let p = ay::ay_partition().unwrap();
    let f = ay::ay_affine();
    let sigma = ay::substitution();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    for _ in 0..100 {
        let t: f64 = rng.gen();
        let (w, hits) = itinerary_lenient(&f, t, 0, 30, &p.partition).unwrap();
        let y = p.renorm.scale * (t + p.renorm.rotation).rem_euclid(1.0);
        let image = sigma.apply(&w.symbols);
        let (v, hits2) = itinerary_lenient(&f, y, 0, image.len(), &p.partition).unwrap();
        if !hits.is_empty() || !hits2.is_empty() {
            continue;
        }
        assert_eq!(v.symbols, image, "t = {t}");
        checked += 1;
    }
    assert!(checked >= 95);
}
