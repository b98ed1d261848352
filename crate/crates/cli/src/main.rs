use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use driftwalk::report::MartingaleFamily;
use driftwalk::report::{
    bound_curve, build_potential, compute_spectrum, default_bound_times, relaxation_cutoff, series, write_curve_csv,
    write_series_csv, OutputFormat,
};
use driftwalk::{
    bfs_distances, build_graph, conjecture_sweep, defect_report, embed, run, simulate, simulate_martingale, srw_kernel,
    verify_martingale_lemmas, BoundCurve, Error, MartingaleSpec, Result, RunConfig, Verdict,
};

#[derive(Parser)]
#[command(
    name = "driftwalk",
    version,
    about = "Escape-rate bounds and random-walk checks on finite Cayley graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Size, degree and distance profile of the configured graph.
    Graph(Common),
    /// Second eigenvalue and relaxation time.
    Spectrum(Common),
    /// Lower-bound curve of the configured potential.
    Bound(Common),
    /// Embedding identities; CSV output writes the embedding rows.
    Harmonic(Common),
    /// Walk statistics without checks.
    Simulate(Common),
    /// Full pipeline with the configured checks.
    Verify(Common),
    /// Synthetic martingale summary and lemma checks.
    Martingale(Common),
    /// Exploratory diffusive-window sweep.
    Sweep(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the walk seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl Common {
    fn load(&self) -> Result<RunConfig> {
        let text = fs::read_to_string(&self.config)?;
        let mut config = RunConfig::from_json(&text)?;
        if let Some(seed) = self.seed {
            config.walk.seed = seed;
        }
        if let Some(f) = self.format {
            config.output.format = match f {
                Format::Json => OutputFormat::Json,
                Format::Csv => OutputFormat::Csv,
            };
        }
        if let Some(out) = &self.out {
            config.output.path = Some(out.display().to_string());
        }
        Ok(config)
    }
}

fn sink(config: &RunConfig) -> Result<Box<dyn Write>> {
    Ok(match &config.output.path {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit_json(config: &RunConfig, value: &serde_json::Value) -> Result<()> {
    let mut w = sink(config)?;
    writeln!(w, "{}", serde_json::to_string_pretty(value)?)?;
    w.flush()?;
    Ok(())
}

fn json_only(config: &RunConfig, command: &str) -> Result<()> {
    if config.output.format == OutputFormat::Csv {
        return Err(Error::Config(format!("{command} has no CSV output")));
    }
    Ok(())
}

fn execute(command: &Command) -> Result<i32> {
    let (common, name) = match command {
        Command::Graph(c) => (c, "graph"),
        Command::Spectrum(c) => (c, "spectrum"),
        Command::Bound(c) => (c, "bound"),
        Command::Harmonic(c) => (c, "harmonic"),
        Command::Simulate(c) => (c, "simulate"),
        Command::Verify(c) => (c, "verify"),
        Command::Martingale(c) => (c, "martingale"),
        Command::Sweep(c) => (c, "sweep"),
    };
    let config = common.load()?;
    let csv = config.output.format == OutputFormat::Csv;

    match command {
        Command::Graph(_) => {
            json_only(&config, name)?;
            let graph = build_graph(&config.graph)?;
            let field = bfs_distances(&graph, 0)?;
            let mut profile = vec![0u64; field.max() as usize + 1];
            field.dist.iter().for_each(|&d| profile[d as usize] += 1);
            emit_json(
                &config,
                &json!({
                    "family": graph.family().name(),
                    "n": graph.n(),
                    "degree": graph.degree(),
                    "self_loops": config.graph.self_loops,
                    "diameter": field.max(),
                    "sphere_sizes": profile,
                }),
            )?;
        }
        Command::Spectrum(_) => {
            json_only(&config, name)?;
            let graph = build_graph(&config.graph)?;
            let kernel = srw_kernel(&graph);
            let (_, info) = compute_spectrum(&graph, &kernel, &config.defaults)?;
            emit_json(&config, &json!({ "spectrum": info, "p_star": kernel.p_star() }))?;
        }
        Command::Bound(_) => {
            let graph = build_graph(&config.graph)?;
            let kernel = srw_kernel(&graph);
            let (spectral, info) = compute_spectrum(&graph, &kernel, &config.defaults)?;
            let (psi, potential, _) = build_potential(&graph, &kernel, &config.potential, &spectral)?;
            let cutoff = relaxation_cutoff(spectral.lambda);
            let times: Vec<u64> = config
                .bound_times
                .clone()
                .unwrap_or_else(|| default_bound_times(config.walk.t_max))
                .into_iter()
                .filter(|&t| t <= cutoff)
                .collect();
            let curve: BoundCurve = bound_curve(&kernel, &psi, spectral.lambda, &times)?;
            if csv {
                write_curve_csv(&curve, sink(&config)?)?;
            } else {
                emit_json(
                    &config,
                    &json!({ "spectrum": info, "potential": potential, "curve": curve }),
                )?;
            }
        }
        Command::Harmonic(_) => {
            let graph = build_graph(&config.graph)?;
            let kernel = srw_kernel(&graph);
            let (spectral, _) = compute_spectrum(&graph, &kernel, &config.defaults)?;
            let (psi, potential, _) = build_potential(&graph, &kernel, &config.potential, &spectral)?;
            let emb = embed(&graph, &kernel, &psi)?;
            if csv {
                emb.write_csv(sink(&config)?)?;
            } else {
                let r = defect_report(&graph, &kernel, &emb)?;
                emit_json(
                    &config,
                    &json!({
                        "potential": potential,
                        "norm_const": emb.norm_const(),
                        "max_energy_error": r.max_energy_error(),
                        "defect": r.defect,
                        "defect_samples": r.defect_samples,
                        "defect_spread": r.defect_spread,
                        "lipschitz": r.lipschitz,
                        "lipschitz_bound": r.lipschitz_bound,
                    }),
                )?;
            }
        }
        Command::Simulate(_) => {
            let graph = build_graph(&config.graph)?;
            let kernel = srw_kernel(&graph);
            let summary = simulate(&kernel, &graph, &config.walk)?;
            if csv {
                write_series_csv(&series(&summary, &BoundCurve::default()), sink(&config)?)?;
            } else {
                emit_json(&config, &serde_json::to_value(&summary)?)?;
            }
        }
        Command::Verify(_) => {
            let report = run(&config)?;
            if csv {
                report.write_csv(sink(&config)?)?;
            } else {
                let mut w = sink(&config)?;
                writeln!(w, "{}", report.to_json()?)?;
                w.flush()?;
            }
            for failure in report.failures() {
                eprintln!("check failed: {failure}");
            }
            return Ok(report.exit_code());
        }
        Command::Martingale(_) => {
            json_only(&config, name)?;
            let mc = config
                .martingale
                .as_ref()
                .ok_or_else(|| Error::Config("martingale section missing".into()))?;
            let params = mc.params(config.walk.seed, &config.defaults, config.walk.workers);
            let horizon = mc.l1_horizon.max(mc.occ_horizon).max(1);
            let (summary, checks) = match mc.family {
                MartingaleFamily::SrwOnIntegers => {
                    let spec = MartingaleSpec::SrwOnIntegers;
                    (
                        simulate_martingale(spec, horizon, params.n_samples, params.seed, params.workers)?,
                        verify_martingale_lemmas(spec, &params)?,
                    )
                }
                MartingaleFamily::LazySrw { holding } => {
                    let spec = MartingaleSpec::LazySrw { holding };
                    (
                        simulate_martingale(spec, horizon, params.n_samples, params.seed, params.workers)?,
                        verify_martingale_lemmas(spec, &params)?,
                    )
                }
                MartingaleFamily::Embedded => {
                    let graph = build_graph(&config.graph)?;
                    let kernel = srw_kernel(&graph);
                    let (spectral, _) = compute_spectrum(&graph, &kernel, &config.defaults)?;
                    let (psi, _, _) = build_potential(&graph, &kernel, &config.potential, &spectral)?;
                    let emb = embed(&graph, &kernel, &psi)?;
                    let spec = MartingaleSpec::Embedded {
                        kernel: &kernel,
                        embedding: &emb,
                        x0: config.walk.x0,
                    };
                    (
                        simulate_martingale(spec, horizon, params.n_samples, params.seed, params.workers)?,
                        verify_martingale_lemmas(spec, &params)?,
                    )
                }
            };
            let failed = checks.iter().any(|c| c.verdict == Verdict::Fail);
            for c in checks.iter().filter(|c| c.verdict == Verdict::Fail) {
                eprintln!("check failed: {}", c.name);
            }
            emit_json(&config, &json!({ "summary": summary, "checks": checks }))?;
            return Ok(failed as i32);
        }
        Command::Sweep(_) => {
            json_only(&config, name)?;
            let sc = config
                .sweep
                .as_ref()
                .ok_or_else(|| Error::Config("sweep section missing".into()))?;
            let entries = conjecture_sweep(
                &sc.families,
                &sc.eps0_grid,
                sc.n_samples,
                config.walk.seed,
                config.walk.workers,
            )?;
            emit_json(&config, &json!({ "seed": config.walk.seed, "entries": entries }))?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
