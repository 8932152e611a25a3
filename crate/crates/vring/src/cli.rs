//! Command-line front end: `simulate`, `study`, `kernel-probe`, and `limit`
//! subcommands over the library, with JSON configs, named presets, and
//! deterministic CSV/manifest output.
//!
//! Exit codes: 0 on success, 2 for configuration problems, 3 for numerical
//! failures. Errors are reported on stderr as one JSON object with `error`
//! (machine-readable category) and `message` fields.

use crate::config::{parse_config, preset, ExperimentConfig};
use crate::dynamics::run;
use crate::error::{Error, Result};
use crate::kernels::{kernel_h, kernel_k, kernel_l, kernel_remainder, Regularization};
use crate::limits::{ode_integrate, LimitState, LimitTrajectory};
use crate::output::{
    fmt_float, limit_csv, manifest_json, particles_csv, ring_csv, write_output, Manifest,
    ResolvedSettings,
};
use crate::quadrature::QuadratureSpec;
use crate::study::{least_squares, run_study, study_csv, study_summary_json};
use crate::vec2::Vec2;
use clap::{Args, Parser, Subcommand};
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(
    name = "vring",
    about = "Lagrangian vortex-particle simulator for axisymmetric flow without swirl"
)]
pub struct Cli {
    /// Size of the worker thread pool (default: one per core).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

/// Config source and output directory shared by the run-style subcommands.
#[derive(Debug, Args)]
pub struct RunArgs {
    /// Path to a JSON config; a manifest from a previous run also works.
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Name of a built-in configuration.
    #[arg(long)]
    pub preset: Option<String>,
    /// Directory the CSVs and manifest are written into.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    /// Target point as "z,r" (strictly above the axis).
    #[arg(long, value_parser = parse_point)]
    pub x: Vec2,
    /// Source point as "z,r".
    #[arg(long, value_parser = parse_point)]
    pub y: Vec2,
    /// Blob regularization parameter δ.
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a particle system and export per-ring diagnostics.
    Simulate(RunArgs),
    /// Re-run one ring across an ε-grid and extrapolate its speed.
    Study(RunArgs),
    /// Print the kernel decomposition H = K + L + R at one point pair.
    KernelProbe(ProbeArgs),
    /// Integrate a limiting point-vortex model.
    Limit(RunArgs),
}

fn parse_point(text: &str) -> std::result::Result<Vec2, String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected \"z,r\", got \"{text}\""));
    }
    let z: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|e| format!("bad z coordinate: {e}"))?;
    let r: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|e| format!("bad r coordinate: {e}"))?;
    Ok(Vec2::new(z, r))
}

fn load_config(args: &RunArgs) -> Result<ExperimentConfig> {
    let cfg = match (&args.config, &args.preset) {
        (Some(path), None) => parse_config(&fs::read_to_string(path)?)?,
        (None, Some(name)) => preset(name)?,
        _ => {
            return Err(Error::Config(
                "pass exactly one of --config <path> or --preset <name>".into(),
            ))
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

fn write_manifest(
    dir: &Path,
    cfg: &ExperimentConfig,
    resolved: ResolvedSettings,
    outputs: Vec<String>,
    status: &str,
) -> Result<()> {
    let manifest = Manifest {
        config: cfg.clone(),
        resolved,
        outputs,
        status: status.to_string(),
    };
    fs::create_dir_all(dir)?;
    fs::write(dir.join("manifest.json"), manifest_json(&manifest)?)?;
    Ok(())
}

fn cmd_simulate(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let state = cfg.build_system()?;
    let mode = cfg.run_mode()?;
    let trajectory = run(&state, &cfg.integrator, &mode, &cfg.diagnostics);

    let mut outputs = Vec::new();
    for ring in 0..state.rings.len() {
        write_output(
            out,
            &format!("ring_{ring}.csv"),
            &ring_csv(&trajectory, ring),
            &mut outputs,
        )?;
    }
    if cfg.particle_snapshots {
        for (k, frame) in trajectory.frames.iter().enumerate() {
            write_output(
                out,
                &format!("particles_{k:04}.csv"),
                &particles_csv(&frame.state),
                &mut outputs,
            )?;
        }
    }
    let status = trajectory
        .error
        .as_ref()
        .map_or_else(|| "completed".to_string(), |e| e.category().to_string());
    write_manifest(
        out,
        cfg,
        ResolvedSettings {
            delta: state.reg.delta,
            particles_per_ring: state.rings.iter().map(|r| r.particles.len()).collect(),
            step_count: cfg.integrator.step_count(),
        },
        outputs,
        &status,
    )?;

    if let Some(frame) = trajectory.frames.last() {
        let rec = &frame.records[0];
        println!(
            "final t={} z_B={} r_B={}",
            fmt_float(frame.time),
            fmt_float(rec.center.x),
            fmt_float(rec.center.y),
        );
    }
    println!("wrote {}", out.join("manifest.json").display());
    match trajectory.error {
        None => Ok(()),
        Some(e) => Err(e),
    }
}

fn cmd_study(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let mut outputs = Vec::new();
    let result = run_study(cfg, |index, _eps, trajectory| {
        let name = format!("eps_{index}/ring_0.csv");
        write_output(
            &out.join(format!("eps_{index}")),
            "ring_0.csv",
            &ring_csv(trajectory, 0),
            &mut Vec::new(),
        )?;
        outputs.push(name);
        Ok(())
    })?;

    let table = study_csv(&result);
    write_output(out, "study.csv", &table, &mut outputs)?;
    write_output(out, "study_summary.json", &study_summary_json(&result)?, &mut outputs)?;
    write_manifest(
        out,
        cfg,
        ResolvedSettings {
            delta: cfg.resolved_delta(),
            particles_per_ring: cfg.rings.iter().map(|r| r.particle_count).collect(),
            step_count: cfg.integrator.step_count(),
        },
        outputs,
        "completed",
    )?;

    print!("{table}");
    println!("reference_speed,{}", fmt_float(result.reference_speed));
    if let Some(fit) = result.fit {
        println!("fit_intercept,{}", fmt_float(fit.intercept));
        println!("fit_slope,{}", fmt_float(fit.slope));
    }
    if result.rows.iter().all(|r| !r.succeeded()) {
        return Err(Error::Domain("every epsilon run of the study failed".into()));
    }
    Ok(())
}

/// Estimated rotation period of a two-vortex configuration about its center
/// of vorticity: least-squares angular speed of the unwrapped relative angle.
fn corotation_period(trajectory: &LimitTrajectory, intensities: &[f64]) -> Option<f64> {
    if trajectory.frames.len() < 3 || intensities.len() != 2 {
        return None;
    }
    let total: f64 = intensities.iter().sum();
    if total == 0.0 {
        return None;
    }
    let mut times = Vec::with_capacity(trajectory.frames.len());
    let mut angles = Vec::with_capacity(trajectory.frames.len());
    let mut prev: Option<f64> = None;
    for frame in &trajectory.frames {
        let center =
            (frame.positions[0] * intensities[0] + frame.positions[1] * intensities[1]) * (1.0 / total);
        let rel = frame.positions[0] - center;
        let mut angle = rel.y.atan2(rel.x);
        if let Some(p) = prev {
            while angle - p > PI {
                angle -= 2.0 * PI;
            }
            while angle - p < -PI {
                angle += 2.0 * PI;
            }
        }
        prev = Some(angle);
        times.push(frame.time);
        angles.push(angle);
    }
    let (_, omega) = least_squares(&times, &angles)?;
    if omega.abs() < 1e-12 {
        None
    } else {
        Some(2.0 * PI / omega.abs())
    }
}

fn cmd_limit(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let spec = cfg
        .limit
        .as_ref()
        .ok_or_else(|| Error::Config("limit command needs a `limit` section".into()))?;
    let start = LimitState::new(spec.positions.clone(), spec.intensities.clone())?;
    let trajectory = ode_integrate(&start, &cfg.integrator, spec.model);

    let mut outputs = Vec::new();
    write_output(out, "limit.csv", &limit_csv(&trajectory), &mut outputs)?;

    let period = corotation_period(&trajectory, &spec.intensities);
    let summary = serde_json::json!({
        "model": spec.model,
        "final_time": trajectory.frames.last().map(|f| f.time),
        "final_positions": trajectory.frames.last().map(|f| f.positions.clone()),
        "corotation_period": period,
    });
    write_output(
        out,
        "limit_summary.json",
        &serde_json::to_string_pretty(&summary)?,
        &mut outputs,
    )?;
    let status = trajectory
        .error
        .as_ref()
        .map_or_else(|| "completed".to_string(), |e| e.category().to_string());
    write_manifest(
        out,
        cfg,
        ResolvedSettings {
            delta: 0.0,
            particles_per_ring: Vec::new(),
            step_count: cfg.integrator.step_count(),
        },
        outputs,
        &status,
    )?;

    if let Some(p) = period {
        println!("corotation_period,{}", fmt_float(p));
    }
    println!("wrote {}", out.join("limit.csv").display());
    match trajectory.error {
        None => Ok(()),
        Some(e) => Err(e),
    }
}

fn cmd_kernel_probe(args: &ProbeArgs) -> Result<()> {
    let reg = Regularization::new(args.delta);
    if args.x == args.y && reg.is_exact() {
        return Err(Error::Domain(
            "coincident points need a positive --delta".into(),
        ));
    }
    let quad = QuadratureSpec::default();
    let h = kernel_h(args.x, args.y, &quad, reg)?;
    let k = kernel_k(args.x - args.y, reg);
    let l = kernel_l(args.x, args.y, reg)?;
    let r = kernel_remainder(args.x, args.y, &quad, reg)?;
    let residual = h - (k + l + r);
    println!("quantity,z,r");
    for (name, v) in [("H", h), ("K", k), ("L", l), ("R", r), ("residual", residual)] {
        println!("{name},{},{}", fmt_float(v.x), fmt_float(v.y));
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate(args) => cmd_simulate(&load_config(args)?, &args.out),
        Command::Study(args) => cmd_study(&load_config(args)?, &args.out),
        Command::KernelProbe(args) => cmd_kernel_probe(args),
        Command::Limit(args) => cmd_limit(&load_config(args)?, &args.out),
    }
}

/// Parse arguments, run, and translate the outcome into an exit code.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        // Build the global pool up front; ignore the error if one exists.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            let payload = serde_json::json!({
                "error": e.category(),
                "message": e.to_string(),
            });
            eprintln!("{payload}");
            e.exit_code()
        }
    }
}
