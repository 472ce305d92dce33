//! `wiem`: build and check fractals, minimal sequences and affine interval
//! exchanges with wandering intervals for the cubic Arnoux-Yoccoz map.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use wandering_iem::export::{self, Shape, SvgLayer};
use wandering_iem::fractal::{Direction, DEFAULT_GAP_TOL};
use wandering_iem::minimal::{self, EPS_MIN};
use wandering_iem::numberfield::{alpha, beta};
use wandering_iem::wandering::{run_pipeline, PipelineParams};
use wandering_iem::ay;

/// Every knob of a run. Written next to the outputs so a run can be repeated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// gamma = e^{i theta} Gamma
    pub theta: f64,
    pub letter: char,
    pub cloud_depth: usize,
    pub extreme_depth: usize,
    pub boundary_depth: usize,
    pub verify_depth: usize,
    pub constant_depth: usize,
    pub urp_cloud_depth: usize,
    pub directions: usize,
    pub psi_grid: usize,
    pub psi_depth: usize,
    pub tol: f64,
    pub urp_tol: f64,
    pub boundary_tol: f64,
    pub boundary_margin: f64,
    pub gap_tol: f64,
    pub growth_rho: f64,
    pub n: usize,
    pub n_orbit: usize,
    pub window_keep: usize,
    pub liminf_k: usize,
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            theta: 0.0,
            letter: '1',
            cloud_depth: 14,
            extreme_depth: 14,
            boundary_depth: 10,
            verify_depth: 12,
            constant_depth: 16,
            urp_cloud_depth: 14,
            directions: 64,
            psi_grid: 256,
            psi_depth: 12,
            tol: 1e-9,
            urp_tol: 1e-6,
            boundary_tol: 1e-4,
            boundary_margin: 1e-3,
            gap_tol: DEFAULT_GAP_TOL,
            growth_rho: 0.4,
            n: 5000,
            n_orbit: 500,
            window_keep: 20_000,
            liminf_k: 200,
            seed: 1,
            out: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("tol", self.tol),
            ("urp_tol", self.urp_tol),
            ("boundary_tol", self.boundary_tol),
            ("boundary_margin", self.boundary_margin),
            ("gap_tol", self.gap_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        if !self.theta.is_finite() {
            return Err("theta must be finite".into());
        }
        if !('1'..='9').contains(&self.letter) {
            return Err(format!("letter must be 1..9, got {}", self.letter));
        }
        if !(self.growth_rho > 0.0 && self.growth_rho < 0.5) {
            return Err(format!("growth_rho must lie in (0, 1/2), got {}", self.growth_rho));
        }
        if self.verify_depth < 8 {
            return Err("verify_depth must be at least 8".into());
        }
        if self.cloud_depth == 0 || self.extreme_depth == 0 || self.psi_depth == 0 {
            return Err("depths must be positive".into());
        }
        if self.window_keep < 2 * self.n + 100 {
            return Err(format!("window_keep must be at least 2 N + 100 = {}", 2 * self.n + 100));
        }
        Ok(())
    }

    fn letter_index(&self) -> u8 {
        self.letter as u8 - b'1'
    }
}

#[derive(Parser, Debug)]
#[command(name = "wiem", version, about = "Fractals and wandering intervals for the cubic Arnoux-Yoccoz map")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    /// JSON run configuration; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    letter: Option<char>,
    #[arg(long, global = true)]
    depth: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    theta: Option<f64>,
    #[arg(long = "N", global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq)]
enum Verb {
    /// Point cloud of a fractal with its boundary curve
    RenderFractal,
    /// Extreme points over a grid of directions
    ExtremePoints,
    /// Directions with extreme points in two first-level subfractals
    PsiScan,
    /// Central window of a minimal sequence
    MinimalWindow,
    /// Affine interval exchange with a wandering interval
    BuildAffine,
    /// Set equations of the fractals
    VerifyIfs,
    /// Witness values of the unique representation property
    VerifyUrp,
    /// Tribonacci arc and boundary lemmas
    VerifyBoundary,
    /// Every verification, aggregated
    Report,
}

struct Outcome {
    name: &'static str,
    passed: bool,
    certificate: Value,
    summary: String,
}

fn load_config(cli: &Cli) -> Result<RunConfig, String> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let s = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            serde_json::from_str(&s).map_err(|e| format!("{}: {e}", p.display()))?
        }
        None => RunConfig::default(),
    };
    if let Some(l) = cli.letter {
        cfg.letter = l;
    }
    if let Some(t) = cli.theta {
        cfg.theta = t;
    }
    if let Some(n) = cli.n {
        cfg.n = n;
        cfg.window_keep = cfg.window_keep.max(2 * n + 100);
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    if let Some(t) = cli.tol {
        cfg.tol = t;
    }
    if let Some(d) = cli.depth {
        match cli.verb {
            Verb::RenderFractal => cfg.cloud_depth = d,
            Verb::ExtremePoints => cfg.extreme_depth = d,
            Verb::PsiScan => cfg.psi_depth = d,
            Verb::VerifyIfs => cfg.verify_depth = d,
            Verb::VerifyUrp => cfg.urp_cloud_depth = d,
            Verb::VerifyBoundary => cfg.boundary_depth = d,
            Verb::MinimalWindow | Verb::BuildAffine | Verb::Report => {}
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), String> {
    export::write(dir, name, contents).map(|_| ()).map_err(|e| format!("{}: {e}", dir.join(name).display()))
}

fn render_fractal(cfg: &RunConfig) -> Result<Outcome, String> {
    let sys = ay::fractal_system_rotated(cfg.theta);
    let a = cfg.letter_index();
    let cloud = sys.cloud(a, cfg.cloud_depth, usize::MAX).map_err(|e| e.to_string())?;
    let paths: Vec<String> = cloud.paths.iter().map(|p| sys.path_string(a, p)).collect();
    let rot = Complex64::from_polar(1.0, cfg.theta);
    let curve = ay::boundary_curve(a as usize + 1, cfg.boundary_depth.min(8)).map_err(|e| e.to_string())?;
    let boundary: Vec<Complex64> = curve.polyline.iter().map(|z| z * rot).collect();
    let layers = [
        SvgLayer { points: cloud.points.clone(), color: "#1f4e9c".into(), shape: Shape::Dots { radius: 0.6 } },
        SvgLayer { points: boundary, color: "#c0392b".into(), shape: Shape::Polyline { closed: true, width: 1.2 } },
    ];
    write(&cfg.out, &format!("fractal_{}.csv", cfg.letter), &export::points_csv(&cloud.points, &paths))?;
    write(&cfg.out, &format!("fractal_{}.svg", cfg.letter), &export::svg(&layers))?;
    let cert = json!({
        "letter": cfg.letter,
        "depth": cfg.cloud_depth,
        "theta": cfg.theta,
        "points": cloud.points.len(),
        "boundary_segments": curve.segments.len(),
    });
    let summary = format!("fractal {}: {} points at depth {}", cfg.letter, cloud.points.len(), cfg.cloud_depth);
    Ok(Outcome { name: "render-fractal", passed: true, certificate: cert, summary })
}

fn extreme_points(cfg: &RunConfig) -> Result<Outcome, String> {
    use rayon::prelude::*;
    let sys = ay::fractal_system_rotated(cfg.theta);
    let a = cfg.letter_index();
    let dirs = Direction::grid(cfg.directions);
    let rows: Vec<Value> = dirs
        .par_iter()
        .map(|&d| {
            let rep = sys.v_min(a, cfg.extreme_depth, d);
            let cont = sys.continuation_check(&rep);
            let prev = sys.v_min(a, cfg.extreme_depth - 1, d).value;
            json!({
                "theta": d.theta,
                "value": rep.value,
                "monotone": rep.value <= prev + 1e-12,
                "argmins": rep.argmins.iter().map(|m| json!({
                    "re": m.z.re, "im": m.z.im, "path": sys.path_string(a, &m.path), "first": m.label_text,
                })).collect::<Vec<_>>(),
                "continuation": cont,
            })
        })
        .collect();
    let passed = rows.iter().all(|r| r["continuation"]["ok"] == true && r["monotone"] == true);
    let pts: Vec<Complex64> = rows
        .iter()
        .flat_map(|r| r["argmins"].as_array().unwrap().iter().map(|m| Complex64::new(m["re"].as_f64().unwrap(), m["im"].as_f64().unwrap())))
        .collect();
    let cloud = sys.cloud(a, cfg.extreme_depth.min(12), usize::MAX).map_err(|e| e.to_string())?;
    let layers = [
        SvgLayer { points: cloud.points, color: "#9db4d8".into(), shape: Shape::Dots { radius: 0.5 } },
        SvgLayer { points: pts, color: "#c0392b".into(), shape: Shape::Dots { radius: 3.0 } },
    ];
    write(&cfg.out, &format!("extreme_{}.svg", cfg.letter), &export::svg(&layers))?;
    let cert = json!({ "letter": cfg.letter, "depth": cfg.extreme_depth, "theta": cfg.theta, "directions": rows, "passed": passed });
    let summary = format!("extreme points of {} over {} directions: continuation and monotonicity {}", cfg.letter, cfg.directions, verdict(passed));
    Ok(Outcome { name: "extreme-points", passed, certificate: cert, summary })
}

fn psi_scan(cfg: &RunConfig) -> Result<Outcome, String> {
    let sys = ay::fractal_system_rotated(cfg.theta);
    let a = cfg.letter_index();
    let cands = sys.psi_scan(a, cfg.psi_grid, cfg.psi_depth, cfg.gap_tol);
    let thetas: Vec<f64> = cands.iter().map(|c| c.theta).collect();
    let cert_liminf = minimal::liminf_certificate(beta(), &thetas, &[1.05, 1.2, beta().norm()], cfg.liminf_k);
    let passed = cert_liminf.passed;
    let cert = json!({ "letter": cfg.letter, "depth": cfg.psi_depth, "grid": cfg.psi_grid, "theta": cfg.theta, "candidates": cands, "liminf": cert_liminf });
    let summary = format!("psi scan of {}: {} candidate directions, liminf certificate {}", cfg.letter, thetas.len(), verdict(passed));
    Ok(Outcome { name: "psi-scan", passed, certificate: cert, summary })
}

fn minimal_window(cfg: &RunConfig) -> Result<Outcome, String> {
    let input = ay::pipeline_input(cfg.theta).map_err(|e| e.to_string())?;
    let seed = minimal::find_seed_letters(&input.sigma, &input.gamma, 8).map_err(|e| e.to_string())?;
    let n = minimal::choose_exponent(&input.sigma, &seed.word, input.beta, cfg.window_keep as u128, minimal::DEFAULT_MAX_ARG, 200)
        .map_err(|e| e.to_string())?;
    let mut w = minimal::minimal_window(&input.sigma, &input.gamma, &seed.word, n, Some(cfg.window_keep)).map_err(|e| e.to_string())?;
    w.theta = Some(cfg.theta);
    let ver = minimal::verify_minimality(&w.window, &input.gamma, EPS_MIN, 200, cfg.seed).map_err(|e| e.to_string())?;
    let growth = minimal::growth_check(&w.window, &input.gamma, cfg.growth_rho, None).map_err(|e| e.to_string())?;
    let rho_max = minimal::rho_max(alpha(), beta());
    let vieta = (alpha() * beta().norm_sqr() - 1.0).abs();
    let passed = ver.ok && growth.passed && vieta <= 1e-12;
    write(&cfg.out, "window.txt", &minimal::window_text(&w.window, &input.sigma))?;
    let mut side = w.sidecar_json(&input.sigma);
    side["seed_letters"] = json!([input.sigma.alphabet()[seed.a as usize], input.sigma.alphabet()[seed.b as usize]]);
    write(&cfg.out, "window.json", &export::json(&side))?;
    let cert = json!({
        "sidecar": side,
        "minimality": ver,
        "growth": growth,
        "rho_max": rho_max,
        "alpha_beta2_minus_1": vieta,
        "passed": passed,
    });
    let summary = format!(
        "minimal window: seed {} n={} length {}, min Re(gamma_n) {:.3e}, growth({}) min {:.4} -> {}",
        input.sigma.spell(&seed.word),
        n,
        w.window.symbols.len(),
        ver.worst_value,
        cfg.growth_rho,
        growth.min_ratio,
        verdict(passed)
    );
    Ok(Outcome { name: "minimal-window", passed, certificate: cert, summary })
}

fn build_affine(cfg: &RunConfig) -> Result<Outcome, String> {
    let input = ay::pipeline_input(cfg.theta).map_err(|e| e.to_string())?;
    let params = PipelineParams { n: cfg.n, n_orbit: cfg.n_orbit, seed: cfg.seed, ..PipelineParams::default() };
    let (rep, f) = run_pipeline(&input, &params).map_err(|e| e.to_string())?;
    write(&cfg.out, "affine.json", &format!("{}\n", f.to_json()))?;
    let orbit_rows = gap_orbit_rows(&f, rep.wandering.gap, cfg.n_orbit.min(60));
    write(&cfg.out, "wandering.svg", &export::intervals_svg(&orbit_rows, "#1f4e9c"))?;
    let passed = rep.passed;
    let summary = format!(
        "affine map: slopes rel err {:.2e}, <log l, lambda> {:.1e}, semi-conjugacy {:.1e}, gap orbit |n|<={} disjoint={} total {:.6} -> {}",
        rep.max_slope_error,
        rep.orthogonality,
        rep.semi_conjugacy.max_residual,
        rep.wandering.n_orbit,
        rep.wandering.disjoint,
        rep.wandering.total_length,
        verdict(passed)
    );
    let cert = serde_json::to_value(&rep).expect("serializable");
    write(&cfg.out, "wandering.json", &export::json(&cert))?;
    Ok(Outcome { name: "build-affine", passed, certificate: cert, summary })
}

/// Rows f^n(J) for n = -k..k, one interval per row.
fn gap_orbit_rows(f: &wandering_iem::iem::AffineIem, gap: (f64, f64), k: usize) -> Vec<Vec<(f64, f64)>> {
    let step = |(a, b): (f64, f64), fwd: bool| {
        if fwd {
            let p = f.piece_at(a);
            let s = p.apply(a);
            (s, s + p.slope * (b - a))
        } else {
            let s = f.inverse(a);
            let p = f.piece_at(s);
            (s, s + (b - a) / p.slope)
        }
    };
    let mut back = vec![gap];
    for _ in 0..k {
        back.push(step(*back.last().unwrap(), false));
    }
    let mut fwd = vec![gap];
    for _ in 0..k {
        fwd.push(step(*fwd.last().unwrap(), true));
    }
    back.reverse();
    back.extend(fwd.into_iter().skip(1));
    back.into_iter().map(|x| vec![x]).collect()
}

fn verify_ifs(cfg: &RunConfig) -> Result<Outcome, String> {
    let rep = ay::verify_ifs(cfg.verify_depth, cfg.tol, cfg.constant_depth).map_err(|e| e.to_string())?;
    let summary = format!(
        "set equations at depth {}: worst lagged residual {:.3e} vs bound {:.3e} -> {}",
        rep.depth,
        rep.residuals.iter().map(|r| r.lagged).fold(0.0, f64::max),
        rep.residuals.first().map(|r| r.bound).unwrap_or(0.0),
        verdict(rep.passed)
    );
    Ok(Outcome { name: "verify-ifs", passed: rep.passed, certificate: serde_json::to_value(&rep).unwrap(), summary })
}

fn verify_urp(cfg: &RunConfig) -> Result<Outcome, String> {
    let rep = ay::verify_urp_witnesses(cfg.urp_cloud_depth, cfg.urp_tol).map_err(|e| e.to_string())?;
    let passed = rep.exact_ok && rep.deep_ok;
    let mut summary = format!(
        "witness values: {} rows, exact {}, in both subfractals {}, within {} of depth-{} clouds {}",
        rep.rows.len(),
        rep.exact_ok,
        rep.deep_ok,
        cfg.urp_tol,
        rep.cloud_depth,
        rep.cloud_ok
    );
    for r in &rep.rows {
        summary.push_str(&format!(
            "\n  ({:>3}) x{} {:<14} {}",
            r.case,
            r.witness,
            r.computed.to_string(),
            if r.exact_match { "ok" } else { "MISMATCH" }
        ));
    }
    Ok(Outcome { name: "verify-urp", passed, certificate: serde_json::to_value(&rep).unwrap(), summary })
}

fn verify_boundary(cfg: &RunConfig) -> Result<Outcome, String> {
    let lemmas = ay::verify_boundary_lemmas(cfg.boundary_depth, cfg.boundary_tol, cfg.boundary_margin);
    let trib = ay::verify_trib(cfg.boundary_depth.min(9), 22);
    let chains: Vec<bool> = (1..=9)
        .map(|a| ay::boundary_segments(a).map(|s| ay::segments_form_closed_chain(&s)).unwrap_or(false))
        .collect();
    let (k0, k1) = ay::kappa_endpoints_exact();
    let z0 = ay::z0_exact();
    let endpoints_ok = (&k0 - &z0).is_zero()
        && &k1 - &z0 == wandering_iem::numberfield::CubicNumber::from_ratio(-1, -2, -1, 2)
        && z0 == wandering_iem::numberfield::CubicNumber::from_ratio(-3, -2, -1, 2);
    let passed = lemmas.passed && chains.iter().all(|&c| c) && endpoints_ok && trib.symmetry <= 1e-8 && trib.decomposition <= 1e-8;
    let cert = json!({ "lemmas": lemmas, "trib": trib, "closed_chains": chains, "endpoints_ok": endpoints_ok, "passed": passed });
    let summary = format!(
        "boundary: separations {:?}, rauzy3 spread {:?}, rauzy2 clusters {}, K symmetry {:.1e}, decomposition {:.1e} -> {}",
        lemmas.separations,
        lemmas.rauzy3_spread,
        lemmas.rauzy2_clusters,
        trib.symmetry,
        trib.decomposition,
        verdict(passed)
    );
    Ok(Outcome { name: "verify-boundary", passed, certificate: cert, summary })
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn run(verb: Verb, cfg: &RunConfig) -> Result<Vec<Outcome>, String> {
    let one = |o: Result<Outcome, String>| o.map(|x| vec![x]);
    match verb {
        Verb::RenderFractal => one(render_fractal(cfg)),
        Verb::ExtremePoints => one(extreme_points(cfg)),
        Verb::PsiScan => one(psi_scan(cfg)),
        Verb::MinimalWindow => one(minimal_window(cfg)),
        Verb::BuildAffine => one(build_affine(cfg)),
        Verb::VerifyIfs => one(verify_ifs(cfg)),
        Verb::VerifyUrp => one(verify_urp(cfg)),
        Verb::VerifyBoundary => one(verify_boundary(cfg)),
        Verb::Report => {
            let mut v = Vec::new();
            for f in [verify_ifs, verify_urp, verify_boundary, minimal_window, build_affine, extreme_points] {
                v.push(f(cfg)?);
            }
            Ok(v)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("wiem: bad configuration: {e}");
            return ExitCode::from(2);
        }
    };
    let outcomes = match run(cli.verb, &cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("wiem: {e}");
            return ExitCode::from(1);
        }
    };
    let passed = outcomes.iter().all(|o| o.passed);
    let mut certs = serde_json::Map::new();
    for o in &outcomes {
        certs.insert(o.name.into(), json!({ "passed": o.passed, "certificate": o.certificate }));
    }
    let doc = json!({ "config": cfg, "passed": passed, "results": certs });
    let name = match cli.verb {
        Verb::Report => "report".to_string(),
        _ => outcomes[0].name.replace('-', "_"),
    };
    let summary: String = outcomes.iter().map(|o| format!("[{}] {}\n", verdict(o.passed), o.summary)).collect();
    let res = write(&cfg.out, &format!("{name}.json"), &export::json(&doc))
        .and_then(|_| write(&cfg.out, "config.json", &export::json(&cfg)))
        .and_then(|_| if cli.verb == Verb::Report { write(&cfg.out, "report.txt", &summary) } else { Ok(()) });
    if let Err(e) = res {
        eprintln!("wiem: {e}");
        return ExitCode::from(1);
    }
    print!("{summary}");
    if passed {
        ExitCode::SUCCESS
    } else {
        if let Some(o) = outcomes.iter().find(|o| !o.passed) {
            eprintln!("{}", export::json(&json!({ "failed": o.name, "diagnostics": o.certificate })));
        }
        ExitCode::from(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips() {
        let c = RunConfig { theta: 0.1 + 0.2, tol: 3e-11, ..RunConfig::default() };
        let s = serde_json::to_string(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn nonpositive_tolerance_rejected() {
        let c = RunConfig { tol: 0.0, ..RunConfig::default() };
        assert!(c.validate().is_err());
        assert!(RunConfig::default().validate().is_ok());
    }
}
