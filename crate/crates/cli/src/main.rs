//! Config-driven front end: builds scenarios from declarative JSON files,
//! runs evaluations, sweeps, and consistency checks, and writes results,
//! CSV tables, plot data, and a hashed manifest.
//!
//! Exit codes: 0 success, 1 input or schema error, 2 consistency-check
//! failure (diagnostics in the written report).

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pblab_core::cover::{cap_embedding, BuiltCover, DiscreteCover, EmbeddingOptions};
use pblab_core::experiments::{
    minimize_pb, monotonicity_report, pb_curve_sweep, polterovich_consistency, reduction_check,
    CheckRecord, ConsistencyReport, SweepTable,
};
use pblab_core::partition::{
    canonical_partition_continuous, canonical_partition_discrete, verify_continuous,
    verify_discrete, BumpProfile, ParametricFamily,
};
use pblab_core::pbnorm::{pb_of_continuous, pb_of_discrete};
use pblab_core::scenarios;
use pblab_core::spacefill::HilbertCurve;
use pblab_core::surface::SurfaceKind;
use pblab_core::ChartedSurface;

use config::{CheckSpec, RunConfig, CONFIG_VERSION};
use output::OutputWriter;

#[derive(Parser)]
#[command(
    name = "pblab",
    about = "Poisson bracket invariants of symplectic disk covers",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's out_dir; default "out").
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker thread count (defaults to the core count).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate pb of the canonical partition of a cover.
    Pbeval(RunArgs),
    /// Minimize pb over the bump family of a discrete cover.
    Minimize(RunArgs),
    /// Sweep pb(c) over capacities with a cover template.
    Sweep(RunArgs),
    /// Run a consistency check (exit 2 on failure).
    Check(RunArgs),
    /// Export Hilbert curve samples and exact cell measures.
    Hilbert(RunArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (expected_kind, args) = match &cli.command {
        Command::Pbeval(a) => ("pbeval", a),
        Command::Minimize(a) => ("minimize", a),
        Command::Sweep(a) => ("sweep", a),
        Command::Check(a) => ("check", a),
        Command::Hilbert(a) => ("hilbert", a),
    };
    match run(expected_kind, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

/// Returns Ok(true) on success, Ok(false) when a consistency check failed.
fn run(expected_kind: &str, args: &RunArgs) -> anyhow::Result<bool> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("thread pool")?;
    }
    let raw = std::fs::read(&args.config)
        .with_context(|| format!("reading config {}", args.config.display()))?;
    let cfg: RunConfig = serde_json::from_slice(&raw).map_err(|e| {
        anyhow::anyhow!(
            "config schema violation at line {}, column {}: {e}",
            e.line(),
            e.column()
        )
    })?;
    if cfg.version() != CONFIG_VERSION {
        bail!(
            "config schema violation at /version: expected {CONFIG_VERSION}, got {}",
            cfg.version()
        );
    }
    if cfg.kind_name() != expected_kind {
        bail!(
            "config schema violation at /kind: config is \"{}\" but the subcommand is \"{expected_kind}\"",
            cfg.kind_name()
        );
    }
    let seed = args.seed.or(cfg.seed()).ok_or_else(|| {
        anyhow::anyhow!("config schema violation at /seed: required for {expected_kind}")
    })?;
    let out_dir = args
        .out
        .clone()
        .or_else(|| cfg.out_dir().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let started = Instant::now();
    let mut writer = OutputWriter::new(&out_dir, &raw, seed)?;

    let all_passed = match cfg {
        RunConfig::Pbeval {
            cover,
            profile,
            pb,
            ..
        } => {
            let pb_cfg = pb.to_config(seed);
            let profile = profile.unwrap_or_default();
            match cover.build()? {
                BuiltCover::Discrete(c) => {
                    let p = canonical_partition_discrete(&c, &profile)?;
                    let verify = verify_discrete(&p);
                    let report = pb_of_discrete(&p, &pb_cfg)?;
                    writer.write_pb_result(&report, &verify, p.fields(), &p.weights())?;
                }
                BuiltCover::Continuous(c) => {
                    let p = canonical_partition_continuous(&c, &profile)?;
                    let verify = verify_continuous(&p);
                    let report = pb_of_continuous(&p, &pb_cfg)?;
                    writer.write_pb_result(&report, &verify, p.fields(), &p.weights())?;
                }
            }
            true
        }
        RunConfig::Minimize {
            cover,
            optimizer,
            pb,
            ..
        } => {
            let pb_cfg = pb.to_config(seed);
            let opt_cfg = optimizer.to_config(seed);
            let built = match cover.build()? {
                BuiltCover::Discrete(c) => c,
                BuiltCover::Continuous(_) => {
                    bail!("config schema violation at /cover: minimize needs a discrete cover")
                }
            };
            let family = ParametricFamily::for_discrete(&built, opt_cfg.use_offsets);
            let result = minimize_pb(&built, &family, &opt_cfg, &pb_cfg)?;
            let partition = family.partition(&built, &result.theta)?;
            writer.write_minimize_result(&result, partition.fields(), &partition.weights())?;
            true
        }
        RunConfig::Sweep {
            surface,
            capacities,
            template,
            eta,
            optimizer,
            pb,
            monotonicity_tol,
            ..
        } => {
            let pb_cfg = pb.to_config(seed);
            let opt_cfg = optimizer.to_config(seed);
            let surf = surface.build()?;
            let table = pb_curve_sweep(&surf, &capacities, template, eta, &opt_cfg, &pb_cfg)?;
            let violations = monotonicity_report(&table, monotonicity_tol);
            writer.write_sweep_result(&table, &violations)?;
            if !violations.is_empty() {
                eprintln!(
                    "note: {} monotonicity violation(s) at tolerance {monotonicity_tol}",
                    violations.len()
                );
            }
            true
        }
        RunConfig::Check { spec, pb, .. } => {
            let pb_cfg = pb.to_config(seed);
            let report = run_check(&spec, seed, &pb_cfg)?;
            let passed = report.pass_all();
            writer.write_check_result(&report)?;
            if !passed {
                eprintln!("consistency check failed; see the written report");
            }
            passed
        }
        RunConfig::Hilbert {
            dimension,
            order,
            samples,
            report_level,
            ..
        } => {
            let curve = HilbertCurve::new(dimension, order)?;
            let level = report_level.unwrap_or_else(|| order.min(3));
            let measures = curve.measure_report(level)?;
            writer.write_hilbert_result(&curve, samples, &measures)?;
            true
        }
    };

    writer.finish(started.elapsed().as_secs_f64())?;
    Ok(all_passed)
}

fn run_check(
    spec: &CheckSpec,
    seed: u64,
    pb_cfg: &pblab_core::pbnorm::PbConfig,
) -> anyhow::Result<ConsistencyReport> {
    let mut report = ConsistencyReport::default();
    match spec {
        CheckSpec::TwoSet { configs, grid } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in 0..*configs {
                let s = ChartedSurface::make(
                    SurfaceKind::Sphere,
                    4.0 * std::f64::consts::PI,
                    pblab_core::GridSpec::new(*grid, *grid),
                    None,
                )?;
                let capacity = rng.gen_range(2.25..2.6) * std::f64::consts::PI;
                let colat: f64 = rng.gen_range(0.5..std::f64::consts::PI - 0.5);
                let azim = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
                let axis = [
                    colat.sin() * azim.cos(),
                    colat.sin() * azim.sin(),
                    colat.cos(),
                ];
                let opts = EmbeddingOptions {
                    allow_band_overlap: true,
                };
                let cover = DiscreteCover::new(vec![
                    cap_embedding(&s, s.chart_of_unit(axis), capacity, 0.05, opts)?,
                    cap_embedding(
                        &s,
                        s.chart_of_unit([-axis[0], -axis[1], -axis[2]]),
                        capacity,
                        0.05,
                        opts,
                    )?,
                ])?;
                let p = canonical_partition_discrete(&cover, &BumpProfile::default())?;
                let r = pb_of_discrete(&p, pb_cfg)?;
                report
                    .checks
                    .push(CheckRecord::leq(
                        format!("two-set config {i}: pb < 1e-12"),
                        r.value,
                        1e-12,
                    ));
            }
        }
        CheckSpec::HalfArea { capacity, grid } => {
            let c = capacity.unwrap_or(2.2 * std::f64::consts::PI);
            let (_, p) = scenarios::sphere_two_cap(*grid, *grid, c, 0.0)?;
            let r = pb_of_discrete(&p, pb_cfg)?;
            report.checks.push(CheckRecord::leq(
                format!("two caps of {c:.4}: pb < 1e-12"),
                r.value,
                1e-12,
            ));
        }
        CheckSpec::Polterovich { scenario } => {
            let (cover, partition) = match scenario.as_str() {
                "sphere-tetra" => {
                    scenarios::sphere_tetra(256, 256, 1.5 * std::f64::consts::PI, 0.0)?
                }
                "sphere-octa" => scenarios::sphere_octa(128, 128, std::f64::consts::PI, 0.0)?,
                "sphere-pyramid" => scenarios::sphere_pyramid(256, 256, 0.0)?,
                other => bail!(
                    "config schema violation at /scenario: unknown scenario \"{other}\" (use sphere-tetra, sphere-octa or sphere-pyramid)"
                ),
            };
            report = polterovich_consistency(&cover, &partition, pb_cfg)?;
        }
        CheckSpec::Reduction { grid, n_weights } => {
            let t = scenarios::torus_surface(*grid)?;
            let cover = pblab_core::cover::SquareCover::from_center_map(
                &t,
                1,
                0.45,
                0.1,
                |t1, t2| [t1, t2],
                EmbeddingOptions::default(),
            )?;
            let partition = pblab_core::partition::canonical_partition_square(
                &cover,
                &BumpProfile::default(),
            )?;
            let curve = HilbertCurve::new(2, 1)?;
            let cfg = config::reduction_config(*n_weights, seed);
            report = reduction_check(&partition, &curve, &cfg, pb_cfg)?;
        }
        CheckSpec::Monotonicity { table, tol_rel } => {
            let raw = std::fs::read_to_string(table)
                .with_context(|| format!("reading sweep table {table}"))?;
            let parsed: SweepTable = serde_json::from_str(&raw)
                .with_context(|| format!("parsing sweep table {table}"))?;
            let violations = monotonicity_report(&parsed, *tol_rel);
            report.checks.push(CheckRecord::leq(
                format!("monotonicity violations at tol {tol_rel}"),
                violations.len() as f64,
                0.0,
            ));
        }
    }
    Ok(report)
}
