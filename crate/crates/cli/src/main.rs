use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use kmtlab::{load_aggregate, norms_table, run_experiment, CliError, ExperimentConfig, Result};
use kmtlab_core::coupling::couple_poisson_to_gaussian;
use kmtlab_core::function_spaces::family;
use kmtlab_core::*;

#[derive(Parser)]
#[command(name = "kmtlab", version, about = "Strong approximation coupling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        reps: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Print norms and assumption checks for densities.
    Norms {
        /// Density ids; defaults to the built-in family.
        #[arg(long = "density")]
        densities: Vec<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build one coupled pair and write it as CSV plus JSON metadata.
    Couple {
        #[arg(long, value_enum, default_value = "kmt-iid")]
        kind: CoupleKind,
        #[arg(long, default_value = "uniform")]
        density: String,
        #[arg(long, default_value_t = 256)]
        n: u64,
        #[arg(long)]
        j: Option<u32>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        rep: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Corrector for a target and achieved law on a finite space.
    Derand {
        /// Comma-separated target probabilities.
        #[arg(long)]
        target: String,
        /// Comma-separated achieved probabilities.
        #[arg(long)]
        achieved: String,
    },
    /// Summarize an output directory.
    Report {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CoupleKind {
    KmtIid,
    BmPoisson,
    Rootwhite,
}

fn parse_probs(s: &str) -> Result<FiniteDist> {
    let v = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| CliError::Config(format!("not a number: '{x}'"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(FiniteDist::new(v)?)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, seed, reps, out, workers } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(r) = reps {
                cfg.reps = r;
            }
            if let Some(o) = out {
                cfg.out = o;
            }
            if workers.is_some() {
                cfg.workers = workers;
            }
            let report = run_experiment(&cfg)?;
            println!("config {} seed {}", report.aggregate.meta.config_hash, cfg.seed);
            for f in &report.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Norms { mut densities, config, out } => {
            if let Some(path) = config {
                densities.extend(ExperimentConfig::load(&path)?.densities);
            }
            if densities.is_empty() {
                densities = family::builtin().into_iter().map(|d| d.id.to_string()).collect();
            }
            let rows = norms_table(&densities)?;
            println!(
                "{:<12} {:>8} {:>12} {:>12} {:>12} {:>12}  A  A' B",
                "density", "inf f", "B(1/2,2)", "B(1/2,4)", "Lip", "Sobolev"
            );
            for r in &rows {
                let mark = |b: bool| if b { "y" } else { "n" };
                println!(
                    "{:<12} {:>8.4} {:>12.6} {:>12.6} {:>12.4} {:>12.6}  {}  {}  {}",
                    r.density,
                    r.inf_f,
                    r.besov_half_2,
                    r.besov_half_4,
                    r.lipschitz,
                    r.sobolev,
                    mark(r.pass_a),
                    mark(r.pass_a_prime),
                    mark(r.pass_b)
                );
            }
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                std::fs::write(dir.join("norms.json"), serde_json::to_string_pretty(&rows)? + "\n")?;
            }
        }
        Command::Couple { kind, density, n, j, seed, rep, out } => {
            let f = family::by_id(&density)?;
            let depth = j.unwrap_or(match kind {
                CoupleKind::Rootwhite => 6,
                _ => default_depth(n),
            });
            let mut rng = seed_stream(seed, rep, StreamRole::Coupler);
            let pair = match kind {
                CoupleKind::KmtIid => couple_empirical_to_bridge(&f, n, depth, &mut rng)?,
                CoupleKind::BmPoisson => couple_poisson_to_gaussian(&f, n, depth, &mut rng)?,
                CoupleKind::Rootwhite => couple_poisson_to_rootwhite(&f, n, depth, &mut rng)?,
            };
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join("pair.csv"), pair.to_csv())?;
            let meta = serde_json::json!({
                "density": density, "seed": seed, "rep": rep, "version": kmtlab::experiment::VERSION,
                "pair": pair.metadata(),
            });
            std::fs::write(out.join("pair.json"), serde_json::to_string_pretty(&meta)? + "\n")?;
            println!("sup {:.6e} at t = {} corrected = {}", pair.sup, pair.argmax, pair.corrected);
        }
        Command::Derand { target, achieved } => {
            let (t, a) = (parse_probs(&target)?, parse_probs(&achieved)?);
            let d = derandomize_kernel(&t, &a, &FiniteKernel::identity(t.len()))?;
            println!("{}", serde_json::to_string_pretty(&serde_json::json!({
                "correction_prob": d.correction_prob,
                "corrector": (0..t.len()).map(|y| d.corrector.row(y).to_vec()).collect::<Vec<_>>(),
            }))?);
        }
        Command::Report { out } => {
            let agg = load_aggregate(&out)?;
            println!(
                "{} {} config={} seed={}",
                agg.meta.kind.as_str(),
                agg.meta.version,
                agg.meta.config_hash,
                agg.meta.seed
            );
            for g in &agg.groups {
                let tv = g.tv_bound.map(|v| format!(" tv_bound={v:.4}")).unwrap_or_default();
                println!(
                    "{} n={} J={} reps={} median sqrt(n)sup={:.4} median n*sup={:.4} corrected={:.3}{}",
                    g.density, g.n, g.depth, g.reps, g.median_sqrt_n_sup, g.median_n_sup, g.correction_frequency, tv
                );
            }
            for f in &agg.rate_fits {
                println!(
                    "{}: d={:.4} relative residual={:.4} ratio={:.3}",
                    f.density, f.fit.d, f.fit.relative_residual, f.extreme_ratio
                );
            }
            if !agg.derandomizer.is_empty() {
                let worst = agg.derandomizer.iter().map(|r| r.max_pushforward_error).fold(0.0, f64::max);
                println!("{} derandomizer instances, max pushforward error {worst:.3e}", agg.derandomizer.len());
            }
            for r in &agg.norms {
                println!("{}: A={} A'={} B={}", r.density, r.pass_a, r.pass_a_prime, r.pass_b);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
