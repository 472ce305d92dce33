//! Minimal windows and the wandering-interval pipeline on the
//! Arnoux-Yoccoz system.

use num_complex::Complex64;

use wandering_iem::ay;
use wandering_iem::iem::AffineIem;
use wandering_iem::minimal::{self, MinimalError};
use wandering_iem::numberfield::beta;
use wandering_iem::wandering::*;

#[test]
fn seed_letters_have_opposite_real_parts() {
    let sigma = ay::substitution();
    let g = ay::gamma();
    let s = minimal::find_seed_letters(&sigma, &g, 8).unwrap();
    assert_eq!((s.a, s.b), (0, 1));
    assert!((g[0].re + 0.4196).abs() < 1e-4 && (g[1].re - 0.7718).abs() < 1e-4);
    assert_eq!(sigma.spell(&s.word), "19352");
    let positive = vec![Complex64::new(1.0, 0.0); 9];
    assert!(matches!(minimal::find_seed_letters(&sigma, &positive, 4), Err(MinimalError::NoSignChange)));
}

#[test]
fn minimal_prefix_of_one_two() {
    let g = ay::gamma();
    assert_eq!(minimal::minimal_prefix(&[0, 1], &g), 1);
    assert!(((g[0] + g[1]).re - 0.3522).abs() < 1e-4);
}

/// Along exponents with Re(beta_0^n) > 0 both sides of the window grow and
/// consecutive windows share a growing central block.
#[test]
fn windows_converge_along_the_subsequence() {
    let sigma = ay::substitution();
    let g = ay::gamma();
    let seed = minimal::find_seed_letters(&sigma, &g, 8).unwrap();
    let ns: Vec<usize> = minimal::exponent_candidates(beta(), 20, 1.0);
    let mut prev: Option<minimal::MinimalWindow> = None;
    let mut agreed = Vec::new();
    for n in ns {
        let w = minimal::minimal_window(&sigma, &g, &seed.word, n, None).unwrap();
        if let Some(p) = &prev {
            assert!(w.window.left_len() >= p.window.left_len());
            assert!(w.window.right_len() >= p.window.right_len());
            let mut k = 0i64;
            while p.window.get(k).is_some() && p.window.get(k) == w.window.get(k) && p.window.get(-k - 1) == w.window.get(-k - 1) {
                k += 1;
            }
            agreed.push(k);
        }
        prev = Some(w);
    }
    assert!(agreed.windows(2).all(|x| x[1] >= x[0]));
    assert!(*agreed.last().unwrap() >= 10_000);
}

#[test]
fn located_cylinders_shrink() {
    let input = ay::pipeline_input(0.0).unwrap();
    let seed = minimal::find_seed_letters(&input.sigma, &input.gamma, 8).unwrap();
    let mw = minimal::minimal_window(&input.sigma, &input.gamma, &seed.word, 26, Some(2000)).unwrap();
    // cylinders of an exchange of nine intervals shrink like 1/length
    let widths: Vec<f64> = [40, 400, 1600]
        .iter()
        .map(|&len| locate_point(&input.map, &input.partition, &mw.window, 0, len).unwrap().width)
        .collect();
    assert!(widths[0] < 1.0 / 40.0, "{widths:?}");
    assert!(widths[1] < widths[0] && widths[2] < widths[1], "{widths:?}");
}

fn measure(n: usize) -> (PipelineInput, AtomicMeasure) {
    let input = ay::pipeline_input(0.0).unwrap();
    let seed = minimal::find_seed_letters(&input.sigma, &input.gamma, 8).unwrap();
    let mw = minimal::minimal_window(&input.sigma, &input.gamma, &seed.word, 26, Some(2 * n + 100)).unwrap();
    let lp = locate_point(&input.map, &input.partition, &mw.window, -(n as i64) - 1, 2 * n + 3).unwrap();
    let mu = build_measure(&input.map, &input.partition, lp.t, &mw.window, &input.gamma, n).unwrap();
    (input, mu)
}

#[test]
fn normalization_converges() {
    let (_, a) = measure(2000);
    let (_, b) = measure(4000);
    assert!((a.k_total - b.k_total).abs() < 1e-6 * b.k_total);
    assert!(a.tail_mass() < 1e-6);
}

#[test]
fn conjugacy_inverts_on_atoms_and_is_monotone() {
    let (_, mu) = measure(2000);
    let c = build_conjugacy(&mu);
    // atoms lighter than the resolution of g share their gap start with a neighbour
    let mut checked = 0;
    for a in mu.atoms.iter().filter(|a| a.weight > GAP_FLOOR) {
        assert_eq!(c.h(c.g(a.x)), a.x);
        checked += 1;
    }
    assert!(checked > 1000);
    let m = 100_000;
    let gs: Vec<f64> = (0..m).map(|i| c.g(i as f64 / m as f64)).collect();
    let hs: Vec<f64> = (0..m).map(|i| c.h(i as f64 / m as f64)).collect();
    assert!(gs.windows(2).all(|w| w[1] >= w[0]));
    assert!(hs.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn affine_map_has_expected_slopes_and_wandering_gap() {
    for theta in [0.0, 0.3] {
        let input = ay::pipeline_input(theta).unwrap();
        let (rep, f) = run_pipeline(&input, &PipelineParams::default()).unwrap();
        assert!(rep.passed, "theta {theta}");
        for row in &rep.slopes {
            assert!(row.rel_error <= 1e-6);
        }
        assert!(rep.transport.passed);
        assert!(rep.wandering.step_residual <= STEP_TOL);
        assert!(rep.wandering.length_residual <= 1e-12);
        let back = AffineIem::from_json(&f.to_json()).unwrap();
        assert_eq!(back.pieces, f.pieces);
    }
}

#[test]
fn empty_orbit_is_trivially_disjoint() {
    let (input, mu) = measure(500);
    let c = build_conjugacy(&mu);
    let syn = synthesize_affine(&input.map, &input.partition, &c, &input.gamma).unwrap();
    let w = verify_wandering(&syn.f, &input.map, &c, largest_gap_atom(&mu), 0).unwrap();
    assert!(w.disjoint && w.passed);
}
