//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

#![allow(clippy::needless_range_loop)]

use std::path::Path;
use std::time::Instant;

use kmtlab::{run_experiment, ExperimentConfig, ExperimentKind};
use kmtlab_core::coupling::quantile::poisson_pmf;
use kmtlab_core::coupling::{couple_poisson_to_gaussian, rootwhite_cell_laws};
use kmtlab_core::function_spaces::{family, quadrature};
use kmtlab_core::gof::{chi_square, ks_p_value, ks_statistic};
use kmtlab_core::normal;
use kmtlab_core::*;
use rand::Rng;

type Outcome = std::result::Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

macro_rules! check {
    ($cond:expr, $($fmt:tt)*) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)*));
        }
    };
}

const LEVEL: f64 = 0.01;

fn config(kind: ExperimentKind, out: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::from_toml(&format!("kind = \"{}\"\nseed = 20240917\n", kind.as_str())).unwrap();
    cfg.out = out.to_path_buf();
    cfg
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64)
}

/// |sample variance − σ²| within 3 standard errors for Gaussian data.
fn variance_ok(v: &[f64], want: f64) -> (bool, f64) {
    let (_, var) = mean_var(v);
    let se = want * (2.0 / (v.len() - 1) as f64).sqrt();
    ((var - want).abs() <= 3.0 * se, var)
}

fn kmt_scaling() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cfg = config(ExperimentKind::KmtIid, dir.path());
    cfg.ns = vec![64, 256, 1024, 4096];
    cfg.reps = 400;
    let report = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let fit = &report.aggregate.rate_fits[0];
    let med: Vec<String> = report
        .aggregate
        .groups
        .iter()
        .map(|g| format!("n={} sqrt(n)sup={:.4} n*sup={:.4}", g.n, g.median_sqrt_n_sup, g.median_n_sup))
        .collect();
    check!(fit.fit.relative_residual < 0.15, "relative residual {:.4}; {}", fit.fit.relative_residual, med.join(", "));
    check!(
        (1.4..=2.6).contains(&fit.extreme_ratio),
        "median ratio {:.3}; {}",
        fit.extreme_ratio,
        med.join(", ")
    );
    Ok(format!(
        "d = {:.4}, relative residual {:.4}, median ratio n=4096/n=64 {:.3} (ratio of logs 2.0)",
        fit.fit.d, fit.fit.relative_residual, fit.extreme_ratio
    ))
}

fn gaussian_target_laws() -> Outcome {
    let reps = 10_000;
    let mut notes = Vec::new();
    for id in ["uniform", "haar:0.5"] {
        let f = family::by_id(id).unwrap();
        let n = 128;
        for &(s, t) in &[(0.25, 0.625), (0.0, 1.0)] {
            let inc: Vec<f64> = (0..reps)
                .map(|r| {
                    let mut rng = seed_stream(101, r, StreamRole::Gaussian);
                    let w = gaussian_cdf_process(&f, n, &mut rng, 5).unwrap();
                    w.at_time(t).unwrap() - w.at_time(s).unwrap()
                })
                .collect();
            let want = f.mass(s, t) / n as f64;
            let (ok, var) = variance_ok(&inc, want);
            check!(ok, "{id}: Var W(t)-W(s) on [{s}, {t}] = {var:.4e}, want {want:.4e}");
        }
        let ends: Vec<f64> = (0..reps)
            .map(|r| {
                let mut rng = seed_stream(102, r, StreamRole::Gaussian);
                white_noise_drift_path(&f, n, &mut rng, 5).unwrap().last()
            })
            .collect();
        let want = 0.25 / n as f64;
        let (ok, var) = variance_ok(&ends, want);
        check!(ok, "{id}: Var W~(1) = {var:.4e}, want {want:.4e}");
        notes.push(format!("{id}: Var W~(1) = {var:.4e} vs {want:.4e}"));
    }
    Ok(notes.join("; "))
}

fn exact_match_trend() -> Outcome {
    let params = AssumptionParams::default();
    let mut notes = Vec::new();
    for nd in family::builtin() {
        if !check_assumption(&nd.density, Assumption::A, &params).unwrap().pass {
            continue;
        }
        let freq = |n: u64| {
            (0..500u64)
                .filter(|&r| {
                    let mut rng = seed_stream(103, r, StreamRole::Coupler);
                    couple_poisson_to_rootwhite(&nd.density, n, 6, &mut rng).unwrap().corrected
                })
                .count() as f64
                / 500.0
        };
        let (lo, hi) = (freq(64), freq(1024));
        check!(hi < lo, "{}: correction frequency {hi:.3} at n=1024 not below {lo:.3} at n=64", nd.id);
        notes.push(format!("{} {lo:.3} -> {hi:.3}", nd.id));
    }
    check!(!notes.is_empty(), "no built-in density satisfies assumption A");
    Ok(notes.join(", "))
}

fn derandomizer_exactness() -> Outcome {
    let mut rng = seed_stream(104, 0, StreamRole::Auxiliary);
    let mut worst_push = 0.0f64;
    let mut worst_tv = 0.0f64;
    let weights = |rng: &mut StreamRng, k: usize| -> Vec<f64> {
        let mut w: Vec<f64> =
            (0..k).map(|_| if rng.random::<f64>() < 0.25 { 0.0 } else { rng.random::<f64>() }).collect();
        let i = rng.random_range(0..k);
        w[i] += 0.01;
        let s: f64 = w.iter().sum();
        w.iter().map(|x| x / s).collect()
    };
    for _ in 0..100 {
        let m = rng.random_range(1..=16);
        let k = rng.random_range(1..=16);
        let source = weights(&mut rng, k);
        let target = weights(&mut rng, m);
        let rows: Vec<Vec<f64>> = (0..k).map(|_| weights(&mut rng, m)).collect();
        // Achieved law by explicit matrix product.
        let achieved: Vec<f64> =
            (0..m).map(|y| (0..k).map(|x| source[x] * rows[x][y]).sum()).collect();
        let q = FiniteKernel::new(rows.clone()).map_err(|e| e.to_string())?;
        let d = derandomize_kernel(
            &FiniteDist::from_weights(&target).unwrap(),
            &FiniteDist::from_weights(&achieved).unwrap(),
            &q,
        )
        .map_err(|e| e.to_string())?;
        for z in 0..m {
            let mut p = 0.0;
            for x in 0..k {
                for y in 0..m {
                    p += source[x] * rows[x][y] * d.corrector.row(y)[z];
                }
            }
            worst_push = worst_push.max((p - target[z]).abs());
        }
        let tv = 0.5 * target.iter().zip(&achieved).map(|(a, b)| (a - b).abs()).sum::<f64>();
        worst_tv = worst_tv.max((d.correction_prob - tv).abs());
    }
    check!(worst_push <= 1e-12, "pushforward error {worst_push:.3e}");
    check!(worst_tv <= 1e-12, "correction probability off TV by {worst_tv:.3e}");
    Ok(format!("max pushforward error {worst_push:.2e}, max |correction prob - TV| {worst_tv:.2e}"))
}

fn besov_closed_forms() -> Outcome {
    let pyr = haar_approximants(&family::uniform(), 17).unwrap();
    let c = besov_norm(&pyr, 0.5, 2.0, 16).unwrap().value;
    check!(c == 1.0, "constant density norm {c}");
    let pyr = haar_approximants(&family::haar_bump(0.5), 17).unwrap();
    let b = besov_norm(&pyr, 0.5, 2.0, 16).unwrap().value;
    let exact = 1.25f64.sqrt();
    check!((b - exact).abs() <= 1e-9, "bump norm {b:.12} vs sqrt(5)/2");
    check!((b - 1.118034).abs() <= 1e-6, "bump norm {b:.12} vs 1.118034");
    let mut worst = 0.0f64;
    for nd in family::builtin() {
        let pyr = haar_approximants(&nd.density, 12).unwrap();
        for k in 0..12 {
            let (coarse, fine) = (pyr.level(k), pyr.level(k + 1));
            for (l, &v) in coarse.iter().enumerate() {
                worst = worst.max((v - 0.5 * (fine[2 * l] + fine[2 * l + 1])).abs());
            }
        }
    }
    check!(worst <= 1e-12, "pyramid inconsistency {worst:.3e}");
    Ok(format!("constant 1 exactly, bump {b:.10}, pyramid consistency {worst:.1e} at J=12"))
}

fn functional_identity() -> Outcome {
    let f = family::by_id("cosine:0.4").unwrap();
    let mut xr = seed_stream(105, 0, StreamRole::Auxiliary);
    let mut worst = 0.0f64;
    for r in 0..100 {
        let mut rng = seed_stream(105, r, StreamRole::Sampler);
        let n = rng.random_range(4..500);
        let s = if r % 2 == 0 { sample_iid(&f, n, &mut rng) } else { sample_poisson_process(&f, n, &mut rng) }
            .unwrap();
        let x: f64 = xr.random();
        let q = BvFunction::indicator(x).unwrap();
        let want = empirical_cdf(&s, x).unwrap() - f.cdf(x).unwrap();
        worst = worst.max((bridge_functional(&s, &f, &q) - want).abs());
    }
    check!(worst <= 1e-12, "indicator functional off by {worst:.3e}");
    for seed in 0..1000 {
        let mut rng = seed_stream(seed, 0, StreamRole::Sampler);
        let s = sample_iid(&f, 97, &mut rng).unwrap();
        let end = empirical_bridge(&s, &f, 7).unwrap().last();
        check!(end == 0.0, "iid Z(1) = {end:e} for seed {seed}");
        let one = BvFunction::constant(1.0);
        check!(bridge_functional(&s, &f, &one).abs() <= 1e-15, "iid Z(1) functional nonzero, seed {seed}");
        let s = sample_poisson_process(&f, 97, &mut rng).unwrap();
        let end = empirical_bridge(&s, &f, 7).unwrap().last();
        check!(end == s.len() as f64 / 97.0 - 1.0, "poisson Z(1) = {end} with N = {}", s.len());
    }
    Ok(format!("max indicator error {worst:.1e}; Z(1) = 0 (iid) and N/n - 1 (poisson) over 1000 seeds"))
}

fn tv_bound_trend() -> Outcome {
    let mut notes = Vec::new();
    for id in ["uniform", "haar:0.25", "haar:0.5"] {
        let f = family::by_id(id).unwrap();
        let bounds: Vec<f64> = [64u64, 256, 1024]
            .iter()
            .map(|&n| {
                let laws = rootwhite_cell_laws(&f, n, 5);
                let a: Vec<Law1d> = laws.iter().map(|l| l.achieved()).collect();
                let b: Vec<Law1d> = laws.iter().map(|l| l.target()).collect();
                tv_product_bound(&a, &b).unwrap()
            })
            .collect();
        check!(bounds.windows(2).all(|w| w[1] < w[0]), "{id}: bounds {bounds:?} not decreasing");
        notes.push(format!("{id} {:.4}/{:.4}/{:.4}", bounds[0], bounds[1], bounds[2]));
    }
    Ok(notes.join(", "))
}

/// CDF of Y/D with Y ~ N(0, σ²) and D ~ N(1, 1/n) independent, the law of any
/// linear functional of the Gaussian bridge with Brownian-bridge variance nσ².
fn ratio_cdf(x: f64, sigma: f64, n: f64) -> f64 {
    let sd = 1.0 / n.sqrt();
    let dens = |d: f64| (-(d - 1.0).powi(2) / (2.0 * sd * sd)).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt());
    let pos = quadrature::integrate(|d| dens(d) * normal::cdf(x * d / sigma), 0.0, 1.0 + 12.0 * sd, 1e-12);
    let neg = quadrature::integrate(|d| dens(d) * normal::sf(x * d / sigma), 1.0 - 12.0 * sd, 0.0, 1e-12);
    pos + neg
}

fn marginal_correctness() -> Outcome {
    let reps = 10_000u64;
    let mut worst = 1.0f64;
    let mut record = |name: &str, p: f64| -> std::result::Result<(), String> {
        worst = worst.min(p);
        if p < LEVEL {
            Err(format!("{name}: p = {p:.4}"))
        } else {
            Ok(())
        }
    };

    // Iid coupling: cell counts on (0,¼], (¼,½], (½,1] are multinomial, and
    // the Gaussian side has bridge laws.
    let f = family::by_id("haar:0.5").unwrap();
    let n = 24u64;
    let cuts = [0.25, 0.5, 1.0];
    let probs = [f.cdf(0.25).unwrap(), f.mass(0.25, 0.5), f.mass(0.5, 1.0)];
    let mut joint = vec![0u64; ((n + 1) * (n + 1)) as usize];
    let (mut g_half, mut g_sum) = (Vec::new(), Vec::new());
    for r in 0..reps {
        let mut rng = seed_stream(106, r, StreamRole::Coupler);
        let p = couple_empirical_to_bridge(&f, n, 5, &mut rng).unwrap();
        let counts: Vec<u64> = cuts
            .iter()
            .map(|&t| ((p.discrete.at_time(t).unwrap() + f.cdf(t).unwrap()) * n as f64).round() as u64)
            .collect();
        joint[(counts[0] * (n + 1) + (counts[1] - counts[0])) as usize] += 1;
        g_half.push(p.gaussian.at_time(0.5).unwrap());
        g_sum.push(p.gaussian.at_time(0.25).unwrap() + p.gaussian.at_time(0.75).unwrap());
    }
    let fact = |k: u64| (1..=k).map(|i| i as f64).product::<f64>();
    let mut expected = vec![0.0; joint.len()];
    for a in 0..=n {
        for b in 0..=(n - a) {
            let c = n - a - b;
            expected[(a * (n + 1) + b) as usize] = fact(n) / (fact(a) * fact(b) * fact(c))
                * probs[0].powi(a as i32)
                * probs[1].powi(b as i32)
                * probs[2].powi(c as i32);
        }
    }
    record("iid multinomial cells", chi_square(&joint, &expected).p_value)?;
    // Brownian-bridge variances: t(1−t) at ½; ¼·¾·2 + 2·¼·¼ at ¼ + ¾, under F.
    let (fa, fb) = (f.cdf(0.25).unwrap(), f.cdf(0.75).unwrap());
    let s_half = (f.cdf(0.5).unwrap() * (1.0 - f.cdf(0.5).unwrap()) / n as f64).sqrt();
    let s_sum = ((fa * (1.0 - fa) + fb * (1.0 - fb) + 2.0 * fa * (1.0 - fb)) / n as f64).sqrt();
    for (name, v, s) in [("bridge at 1/2", &g_half, s_half), ("bridge at 1/4 + 3/4", &g_sum, s_sum)] {
        let d = ks_statistic(v, |x| ratio_cdf(x, s, n as f64));
        record(name, ks_p_value(d, v.len()))?;
    }

    // Poissonized coupling: N(t) ~ Poisson(nF(t)); Gaussian side N(0, F(t)/n).
    let n = 40u64;
    let mut half = vec![0u64; 120];
    let mut whole = vec![0u64; 120];
    let mut gauss = Vec::new();
    for r in 0..reps {
        let mut rng = seed_stream(107, r, StreamRole::Coupler);
        let p = couple_poisson_to_gaussian(&f, n, 4, &mut rng).unwrap();
        let c = ((p.discrete.at_time(0.5).unwrap() + f.cdf(0.5).unwrap()) * n as f64).round() as usize;
        half[c.min(119)] += 1;
        whole[(p.detail.total_count as usize).min(119)] += 1;
        gauss.push(p.gaussian.at_time(0.5).unwrap());
    }
    let lam = n as f64 * f.cdf(0.5).unwrap();
    record("poisson N(1/2)", chi_square(&half, &(0..120).map(|x| poisson_pmf(lam, x)).collect::<Vec<_>>()).p_value)?;
    record("poisson N(1)", chi_square(&whole, &(0..120).map(|x| poisson_pmf(n as f64, x)).collect::<Vec<_>>()).p_value)?;
    let sd = (f.cdf(0.5).unwrap() / n as f64).sqrt();
    record("poisson Gaussian side", ks_p_value(ks_statistic(&gauss, |x| normal::cdf(x / sd)), gauss.len()))?;

    // Root-white coupling: two cells jointly Poisson; W~ at ½ and 1 Gaussian.
    let n = 64u64;
    let laws = rootwhite_cell_laws(&f, n, 3);
    let k = 40usize;
    let mut pair = vec![0u64; k * k];
    let (mut w_half, mut w_one) = (Vec::new(), Vec::new());
    let scale = ((n * 8) as f64).sqrt();
    for r in 0..reps {
        let mut rng = seed_stream(208, r, StreamRole::Coupler);
        let p = couple_poisson_to_rootwhite(&f, n, 3, &mut rng).unwrap();
        let cell = |j: usize| {
            let inc = (p.discrete.at(j + 1) - p.discrete.at(j)) * scale;
            ((inc * inc).round() as usize).min(k - 1)
        };
        pair[cell(1) * k + cell(6)] += 1;
        w_half.push(p.gaussian.at_time(0.5).unwrap() - f.root_cdf(0.5).unwrap());
        w_one.push(p.gaussian.last() - f.root_cdf(1.0).unwrap());
    }
    let expected: Vec<f64> = (0..k * k)
        .map(|i| poisson_pmf(laws[1].lambda, (i / k) as u64) * poisson_pmf(laws[6].lambda, (i % k) as u64))
        .collect();
    record("root-white cell pair", chi_square(&pair, &expected).p_value)?;
    for (name, v, t) in [("white noise at 1/2", &w_half, 0.5), ("white noise at 1", &w_one, 1.0)] {
        let sd = (t / (4.0 * n as f64)).sqrt();
        record(name, ks_p_value(ks_statistic(v, |x| normal::cdf(x / sd)), v.len()))?;
    }
    Ok(format!("10 goodness-of-fit tests at the 1% level, smallest p = {worst:.3}"))
}

fn determinism() -> Outcome {
    let mut notes = Vec::new();
    for kind in [ExperimentKind::KmtIid, ExperimentKind::Rootwhite, ExperimentKind::Derandomizer, ExperimentKind::Norms] {
        let dirs: Vec<tempfile::TempDir> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
        for (dir, workers) in dirs.iter().zip([1usize, 4, 4]) {
            let mut cfg = config(kind, dir.path());
            cfg.ns = vec![64, 128, 256];
            cfg.reps = 40;
            cfg.instances = 20;
            cfg.densities = vec!["uniform".into(), "haar:0.25".into()];
            cfg.workers = Some(workers);
            run_experiment(&cfg).map_err(|e| e.to_string())?;
        }
        let mut files: Vec<String> = std::fs::read_dir(dirs[0].path())
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        files.sort();
        for name in &files {
            let a = std::fs::read(dirs[0].path().join(name)).unwrap();
            for other in &dirs[1..] {
                let b = std::fs::read(other.path().join(name)).map_err(|e| format!("{name}: {e}"))?;
                check!(a == b, "{}: {name} differs between runs", kind.as_str());
            }
        }
        notes.push(format!("{} ({} files)", kind.as_str(), files.len()));
    }
    Ok(format!("byte-identical across 1 and 4 workers: {}", notes.join(", ")))
}

fn main() {
    let criteria: [Check; 9] = [
        ("1 KMT scaling trend", kmt_scaling),
        ("2 Gaussian target laws", gaussian_target_laws),
        ("3 exact-match trend", exact_match_trend),
        ("4 derandomizer exactness", derandomizer_exactness),
        ("5 Besov closed forms", besov_closed_forms),
        ("6 functional identity", functional_identity),
        ("7 TV-bound trend", tv_bound_trend),
        ("8 marginal correctness", marginal_correctness),
        ("9 determinism", determinism),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !only.is_empty() && !only.iter().any(|o| name.contains(o.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {name}: PASS ({secs:.1}s) {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {name}: FAIL ({secs:.1}s) {msg}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
