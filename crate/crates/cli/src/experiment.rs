//! Deterministic parallel experiment runs and their output bundle.

use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{CliError, Result};
use crate::svg::{emit_svg, Plot, Series, Style};
use kmtlab_core::coupling::{couple_poisson_to_gaussian, rootwhite_cell_laws, CorrectionDetail, PairMetadata};
use kmtlab_core::function_spaces::family;
use kmtlab_core::metrics::{exceedance_from_values, median, wilson_interval};
use kmtlab_core::process::fmt17;
use kmtlab_core::*;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance stamped into every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub core_version: String,
    pub kind: ExperimentKind,
    pub config_hash: String,
    pub seed: u64,
}

impl Meta {
    pub fn new(cfg: &ExperimentConfig) -> Self {
        Meta {
            tool: "kmtlab".into(),
            version: VERSION.into(),
            core_version: kmtlab_core::VERSION.into(),
            kind: cfg.kind,
            config_hash: cfg.hash(),
            seed: cfg.seed,
        }
    }

    fn comment(&self) -> String {
        format!(
            "# {} {} core={} kind={} config={} seed={}",
            self.tool,
            self.version,
            self.core_version,
            self.kind.as_str(),
            self.config_hash,
            self.seed
        )
    }
}

/// One coupled replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRow {
    pub density: String,
    pub n: u64,
    pub depth: u32,
    pub rep: u64,
    pub stream_id: u64,
    pub sup: f64,
    pub argmax: f64,
    pub corrected: bool,
    pub detail: CorrectionDetail,
}

impl ReplicationRow {
    pub fn sqrt_n_sup(&self) -> f64 {
        (self.n as f64).sqrt() * self.sup
    }

    pub fn n_sup(&self) -> f64 {
        self.n as f64 * self.sup
    }
}

/// Summary of all replications sharing a density and n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub density: String,
    pub n: u64,
    pub depth: u32,
    pub reps: u64,
    pub median_sqrt_n_sup: f64,
    pub median_n_sup: f64,
    /// Exceedance of √n·sup.
    pub exceedance: ExceedanceCurve,
    pub correction_frequency: f64,
    pub correction_interval: (f64, f64),
    pub degenerate_resamples: u64,
    /// Hellinger-product bound on the total variation between the
    /// per-cell laws of the two sides (root-white only). A bound, not a value.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tv_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityFit {
    pub density: String,
    /// Medians of n·sup = √n·(√n·sup) regressed on ln n through the origin.
    pub transform: String,
    pub fit: RateFit,
    /// Median at the largest n over the median at the smallest n.
    pub extreme_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerandRow {
    pub instance: usize,
    pub source_atoms: usize,
    pub atoms: usize,
    pub tv: f64,
    pub correction_prob: f64,
    pub max_pushforward_error: f64,
    pub mc_moved_frequency: f64,
    pub exact_moved_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormsRow {
    pub density: String,
    pub inf_f: f64,
    pub besov_half_2: f64,
    pub besov_half_4: f64,
    pub lipschitz: f64,
    pub sobolev: f64,
    pub pass_a: bool,
    pub pass_a_prime: bool,
    pub pass_b: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub meta: Meta,
    pub config: ExperimentConfig,
    pub groups: Vec<GroupSummary>,
    pub rate_fits: Vec<DensityFit>,
    pub derandomizer: Vec<DerandRow>,
    pub norms: Vec<NormsRow>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub aggregate: Aggregate,
    pub rows: Vec<ReplicationRow>,
}

struct Task {
    density: usize,
    n: u64,
    depth: u32,
    rep: u64,
    stream_id: u64,
}

fn run_task(cfg: &ExperimentConfig, densities: &[DensitySpec], t: &Task) -> Result<(ReplicationRow, PairMetadata)> {
    let f = &densities[t.density];
    let mut rng = seed_stream(cfg.seed, t.stream_id, StreamRole::Coupler);
    let pair = match cfg.kind {
        ExperimentKind::KmtIid => couple_empirical_to_bridge(f, t.n, t.depth, &mut rng)?,
        ExperimentKind::BmPoisson => couple_poisson_to_gaussian(f, t.n, t.depth, &mut rng)?,
        ExperimentKind::Rootwhite => couple_poisson_to_rootwhite(f, t.n, t.depth, &mut rng)?,
        _ => unreachable!("not a coupling experiment"),
    };
    let row = ReplicationRow {
        density: cfg.densities[t.density].clone(),
        n: t.n,
        depth: t.depth,
        rep: t.rep,
        stream_id: t.stream_id,
        sup: pair.sup,
        argmax: pair.argmax,
        corrected: pair.corrected,
        detail: pair.detail.clone(),
    };
    Ok((row, pair.metadata()))
}

fn pool(cfg: &ExperimentConfig) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.workers {
        b = b.num_threads(w);
    }
    b.build().map_err(|e| CliError::Config(format!("worker pool: {e}")))
}

/// Runs all coupling replications. Replication `r` of group `g` uses stream
/// `g·reps + r`; results are collected in that order whatever the worker count.
pub fn run_replications(cfg: &ExperimentConfig) -> Result<Vec<(ReplicationRow, PairMetadata)>> {
    let densities = cfg
        .densities
        .iter()
        .map(|id| family::by_id(id))
        .collect::<kmtlab_core::Result<Vec<_>>>()?;
    let mut tasks = Vec::new();
    let mut group = 0u64;
    for d in 0..densities.len() {
        for &n in &cfg.ns {
            let depth = cfg.depth_for(n);
            for rep in 0..cfg.reps {
                tasks.push(Task { density: d, n, depth, rep, stream_id: group * cfg.reps + rep });
            }
            group += 1;
        }
    }
    pool(cfg)?.install(|| tasks.par_iter().map(|t| run_task(cfg, &densities, t)).collect())
}

fn summarize(cfg: &ExperimentConfig, rows: &[ReplicationRow]) -> Result<(Vec<GroupSummary>, Vec<DensityFit>)> {
    let mut groups = Vec::new();
    let mut fits = Vec::new();
    for id in &cfg.densities {
        let f = family::by_id(id)?;
        let mut meds = Vec::new();
        for &n in &cfg.ns {
            let g: Vec<&ReplicationRow> = rows.iter().filter(|r| &r.density == id && r.n == n).collect();
            let depth = cfg.depth_for(n);
            let scaled: Vec<f64> = g.iter().map(|r| r.sqrt_n_sup()).collect();
            let n_sup: Vec<f64> = g.iter().map(|r| r.n_sup()).collect();
            let corrected = g.iter().filter(|r| r.corrected).count();
            let mut exceed = exceedance_from_values(&scaled, &cfg.thresholds);
            exceed.n = Some(n);
            exceed.depth = Some(depth);
            exceed.family = Some(id.clone());
            let tv_bound = if cfg.kind == ExperimentKind::Rootwhite {
                let laws = rootwhite_cell_laws(&f, n, depth);
                let a: Vec<Law1d> = laws.iter().map(|l| l.achieved()).collect();
                let b: Vec<Law1d> = laws.iter().map(|l| l.target()).collect();
                Some(tv_product_bound(&a, &b)?)
            } else {
                None
            };
            meds.push(median(&n_sup));
            groups.push(GroupSummary {
                density: id.clone(),
                n,
                depth,
                reps: g.len() as u64,
                median_sqrt_n_sup: median(&scaled),
                median_n_sup: median(&n_sup),
                exceedance: exceed,
                correction_frequency: corrected as f64 / g.len() as f64,
                correction_interval: wilson_interval(corrected, g.len()),
                degenerate_resamples: g.iter().map(|r| r.detail.degenerate_resamples as u64).sum(),
                tv_bound,
            });
        }
        let mut distinct = cfg.ns.clone();
        distinct.sort_unstable();
        distinct.dedup();
        if cfg.kind != ExperimentKind::Rootwhite && distinct.len() >= 3 {
            let fit = rate_fit(&cfg.ns, &meds)?;
            let (imin, imax) = extreme_indices(&cfg.ns);
            fits.push(DensityFit {
                density: id.clone(),
                transform: "median(n*sup) ~ d*ln(n)".into(),
                fit,
                extreme_ratio: meds[imax] / meds[imin],
            });
        }
    }
    Ok((groups, fits))
}

fn extreme_indices(ns: &[u64]) -> (usize, usize) {
    let imin = (0..ns.len()).min_by_key(|&i| ns[i]).unwrap();
    let imax = (0..ns.len()).max_by_key(|&i| ns[i]).unwrap();
    (imin, imax)
}

fn random_weights<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    let mut w: Vec<f64> =
        (0..k).map(|_| if rng.random::<f64>() < 0.2 { 0.0 } else { rng.random::<f64>() }).collect();
    let i = rng.random_range(0..k);
    w[i] += 0.05;
    w
}

fn derandomizer_instance(cfg: &ExperimentConfig, instance: usize) -> Result<DerandRow> {
    let mut rng = seed_stream(cfg.seed, instance as u64, StreamRole::Auxiliary);
    let atoms = rng.random_range(2..=cfg.atoms);
    let source_atoms = rng.random_range(2..=cfg.atoms);
    let source = FiniteDist::from_weights(&random_weights(&mut rng, source_atoms))?;
    let target = FiniteDist::from_weights(&random_weights(&mut rng, atoms))?;
    let rows = (0..source_atoms)
        .map(|_| FiniteDist::from_weights(&random_weights(&mut rng, atoms)).map(|d| d.probs().to_vec()))
        .collect::<kmtlab_core::Result<Vec<_>>>()?;
    let q = FiniteKernel::new(rows)?;
    let achieved = FiniteDist::from_weights(&q.pushforward(&source)?)?;
    let d = derandomize_kernel(&target, &achieved, &q)?;
    let push = d.corrected_map.pushforward(&source)?;
    let max_pushforward_error =
        push.iter().zip(target.probs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let exact_moved_probability: f64 = achieved
        .probs()
        .iter()
        .enumerate()
        .map(|(y, p)| p * (1.0 - d.corrector.row(y)[y]))
        .sum();
    let mut mc = seed_stream(cfg.seed, instance as u64, StreamRole::Corrector);
    let moved = (0..cfg.reps)
        .filter(|_| {
            let x = source.sample(&mut mc);
            apply_corrected_map(x, &q, &d.corrector, &mut mc).moved()
        })
        .count();
    Ok(DerandRow {
        instance,
        source_atoms,
        atoms,
        tv: tv_finite(&target, &achieved)?,
        correction_prob: d.correction_prob,
        max_pushforward_error,
        mc_moved_frequency: moved as f64 / cfg.reps as f64,
        exact_moved_probability,
    })
}

pub fn norms_table(ids: &[String]) -> Result<Vec<NormsRow>> {
    let params = AssumptionParams::default();
    ids.iter()
        .map(|id| {
            let f = family::by_id(id)?;
            let a = check_assumption(&f, Assumption::A, &params)?;
            let ap = check_assumption(&f, Assumption::APrime, &params)?;
            let b = check_assumption(&f, Assumption::B, &params)?;
            Ok(NormsRow {
                density: id.clone(),
                inf_f: a.inf_f,
                besov_half_2: a.besov_half_2.unwrap_or(f64::NAN),
                besov_half_4: a.besov_half_4.unwrap_or(f64::NAN),
                lipschitz: b.lipschitz.unwrap_or(f64::NAN),
                sobolev: ap.sobolev.unwrap_or(f64::NAN),
                pass_a: a.pass,
                pass_a_prime: ap.pass,
                pass_b: b.pass,
            })
        })
        .collect()
}

fn csv_header(meta: &Meta, columns: &str) -> String {
    format!("{}\n{columns}\n", meta.comment())
}

fn replications_csv(meta: &Meta, rows: &[ReplicationRow]) -> String {
    let mut s = csv_header(
        meta,
        "density,n,depth,rep,stream_id,sup,sqrt_n_sup,n_sup,argmax,corrected,degenerate_resamples,total_count,keep_probability,residual_proposals,cells_moved",
    );
    for r in rows {
        let keep = r.detail.keep_probability.map(fmt17).unwrap_or_default();
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.density,
            r.n,
            r.depth,
            r.rep,
            r.stream_id,
            fmt17(r.sup),
            fmt17(r.sqrt_n_sup()),
            fmt17(r.n_sup()),
            fmt17(r.argmax),
            r.corrected,
            r.detail.degenerate_resamples,
            r.detail.total_count,
            keep,
            r.detail.residual_proposals,
            r.detail.cells_moved
        ));
    }
    s
}

fn derand_csv(meta: &Meta, rows: &[DerandRow]) -> String {
    let mut s = csv_header(
        meta,
        "instance,source_atoms,atoms,tv,correction_prob,max_pushforward_error,mc_moved_frequency,exact_moved_probability",
    );
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.instance,
            r.source_atoms,
            r.atoms,
            fmt17(r.tv),
            fmt17(r.correction_prob),
            fmt17(r.max_pushforward_error),
            fmt17(r.mc_moved_frequency),
            fmt17(r.exact_moved_probability)
        ));
    }
    s
}

fn norms_csv(meta: &Meta, rows: &[NormsRow]) -> String {
    let mut s = csv_header(
        meta,
        "density,inf_f,besov_half_2,besov_half_4,lipschitz,sobolev,pass_a,pass_a_prime,pass_b",
    );
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.density,
            fmt17(r.inf_f),
            fmt17(r.besov_half_2),
            fmt17(r.besov_half_4),
            fmt17(r.lipschitz),
            fmt17(r.sobolev),
            r.pass_a,
            r.pass_a_prime,
            r.pass_b
        ));
    }
    s
}

fn plots(meta: &Meta, agg: &Aggregate) -> Vec<(&'static str, Plot)> {
    let stamp = format!("kmtlab {} config={} seed={}", meta.version, meta.config_hash, meta.seed);
    let mut out = Vec::new();
    if !agg.groups.is_empty() {
        let series = agg
            .groups
            .iter()
            .map(|g| Series {
                name: format!("{} n={}", g.density, g.n),
                points: g.exceedance.thresholds.iter().copied().zip(g.exceedance.survival.iter().copied()).collect(),
                style: Style::Line,
            })
            .collect();
        out.push((
            "exceedance.svg",
            Plot {
                title: "P(sqrt(n) sup > threshold)".into(),
                x_label: "threshold".into(),
                y_label: "exceedance probability".into(),
                series,
                metadata: stamp.clone(),
                ..Default::default()
            },
        ));
    }
    if !agg.rate_fits.is_empty() {
        let mut series = Vec::new();
        for f in &agg.rate_fits {
            let pts: Vec<(f64, f64)> =
                f.fit.ns.iter().map(|&n| (n as f64).ln()).zip(f.fit.medians.iter().copied()).collect();
            let line = pts.iter().map(|&(x, _)| (x, f.fit.d * x)).collect();
            series.push(Series { name: format!("{} median n*sup", f.density), points: pts, style: Style::Markers });
            series.push(Series { name: format!("{} d={:.4}", f.density, f.fit.d), points: line, style: Style::Line });
        }
        out.push((
            "rate_fit.svg",
            Plot {
                title: "median n*sup against ln n".into(),
                x_label: "ln n".into(),
                y_label: "median n*sup".into(),
                series,
                metadata: stamp.clone(),
                ..Default::default()
            },
        ));
    }
    if agg.groups.iter().any(|g| g.tv_bound.is_some()) {
        let mut tv = Vec::new();
        let mut freq = Vec::new();
        for id in &agg.config.densities {
            let gs: Vec<&GroupSummary> = agg.groups.iter().filter(|g| &g.density == id).collect();
            tv.push(Series {
                name: id.clone(),
                points: gs.iter().map(|g| (g.n as f64, g.tv_bound.unwrap_or(f64::NAN))).collect(),
                style: Style::LineAndMarkers,
            });
            freq.push(Series {
                name: id.clone(),
                points: gs.iter().map(|g| (g.n as f64, g.correction_frequency)).collect(),
                style: Style::LineAndMarkers,
            });
        }
        for (file, title, y, series) in [
            ("tv_bound.svg", "Hellinger TV bound between cell laws", "TV bound", tv),
            ("correction.svg", "Corrector firing frequency", "frequency", freq),
        ] {
            out.push((
                file,
                Plot {
                    title: title.into(),
                    x_label: "n".into(),
                    y_label: y.into(),
                    log_x: true,
                    series,
                    metadata: stamp.clone(),
                    ..Default::default()
                },
            ));
        }
    }
    if !agg.derandomizer.is_empty() {
        out.push((
            "derandomizer.svg",
            Plot {
                title: "Corrector moves: Monte Carlo against exact".into(),
                x_label: "exact probability".into(),
                y_label: "MC frequency".into(),
                series: vec![Series {
                    name: "instances".into(),
                    points: agg
                        .derandomizer
                        .iter()
                        .map(|r| (r.exact_moved_probability, r.mc_moved_frequency))
                        .collect(),
                    style: Style::Markers,
                }],
                metadata: stamp,
                ..Default::default()
            },
        ));
    }
    out
}

fn write(dir: &Path, name: &str, content: &str, files: &mut Vec<PathBuf>) -> Result<()> {
    let p = dir.join(name);
    fs::write(&p, content)?;
    files.push(p);
    Ok(())
}

/// Runs the experiment and writes `replications.csv`, `pairs.jsonl`,
/// `aggregate.json` and SVG plots into `cfg.out`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let meta = Meta::new(cfg);
    let (rows, pair_meta, derand, norms) = match cfg.kind {
        ExperimentKind::KmtIid | ExperimentKind::BmPoisson | ExperimentKind::Rootwhite => {
            let (rows, metas): (Vec<_>, Vec<_>) = run_replications(cfg)?.into_iter().unzip();
            (rows, metas, Vec::new(), Vec::new())
        }
        ExperimentKind::Derandomizer => {
            let rows = pool(cfg)?.install(|| {
                (0..cfg.instances).into_par_iter().map(|i| derandomizer_instance(cfg, i)).collect::<Result<Vec<_>>>()
            })?;
            (Vec::new(), Vec::new(), rows, Vec::new())
        }
        ExperimentKind::Norms => (Vec::new(), Vec::new(), Vec::new(), norms_table(&cfg.densities)?),
    };
    let (groups, rate_fits) = if rows.is_empty() { (Vec::new(), Vec::new()) } else { summarize(cfg, &rows)? };
    let aggregate =
        Aggregate { meta: meta.clone(), config: cfg.clone(), groups, rate_fits, derandomizer: derand, norms };

    fs::create_dir_all(&cfg.out)?;
    let mut files = Vec::new();
    let csv = match cfg.kind {
        ExperimentKind::Derandomizer => derand_csv(&meta, &aggregate.derandomizer),
        ExperimentKind::Norms => norms_csv(&meta, &aggregate.norms),
        _ => replications_csv(&meta, &rows),
    };
    write(&cfg.out, "replications.csv", &csv, &mut files)?;
    let mut jsonl = serde_json::to_string(&serde_json::json!({ "meta": &meta }))?;
    jsonl.push('\n');
    for (r, m) in rows.iter().zip(&pair_meta) {
        let line = serde_json::json!({ "density": r.density, "rep": r.rep, "stream_id": r.stream_id, "pair": m });
        jsonl.push_str(&serde_json::to_string(&line)?);
        jsonl.push('\n');
    }
    write(&cfg.out, "pairs.jsonl", &jsonl, &mut files)?;
    let mut agg_json = serde_json::to_string_pretty(&aggregate)?;
    agg_json.push('\n');
    write(&cfg.out, "aggregate.json", &agg_json, &mut files)?;
    for (name, plot) in plots(&meta, &aggregate) {
        write(&cfg.out, name, &emit_svg(&plot)?, &mut files)?;
    }
    Ok(RunReport { out_dir: cfg.out.clone(), files, aggregate, rows })
}

/// Reads `aggregate.json` back from an output directory.
pub fn load_aggregate(dir: &Path) -> Result<Aggregate> {
    let text = fs::read_to_string(dir.join("aggregate.json"))?;
    Ok(serde_json::from_str(&text)?)
}
