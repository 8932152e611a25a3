//! Deterministic on-disk output: per-ring diagnostics CSVs, optional particle
//! snapshots, limit-model trajectories, and the run manifest.
//!
//! Every float is printed with 17 significant digits so files are
//! byte-reproducible and round-trip exactly through `f64`.

use crate::config::ExperimentConfig;
use crate::dynamics::Trajectory;
use crate::error::Result;
use crate::field::SystemState;
use crate::limits::LimitTrajectory;
use serde::Serialize;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// 17 significant digits: enough to reproduce any `f64` exactly.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header of the per-ring diagnostics CSV.
pub const RING_CSV_HEADER: &str = "t,z_B,r_B,I,m_R,mu_Rh,R_t,M0,M2,E,qz,qr";

/// Header of the per-snapshot particle CSV.
pub const PARTICLE_CSV_HEADER: &str = "ring,id,z,r,weight,omega";

/// Header of the limit-model trajectory CSV.
pub const LIMIT_CSV_HEADER: &str = "t,i,z1,z2";

/// Render the diagnostics trajectory of one ring as CSV text.
pub fn ring_csv(trajectory: &Trajectory, ring: usize) -> String {
    let mut out = String::from(RING_CSV_HEADER);
    out.push('\n');
    for frame in &trajectory.frames {
        let r = &frame.records[ring];
        let cols = [
            r.time,
            r.center.x,
            r.center.y,
            r.moment,
            r.outside_mass.first().map_or(f64::NAN, |&(_, m)| m),
            r.mollified_outside.first().map_or(f64::NAN, |&(_, m)| m),
            r.support_radius,
            r.mass,
            r.radial_moment,
            r.energy,
            r.concentration.x,
            r.concentration.y,
        ];
        let row: Vec<String> = cols.iter().map(|&c| fmt_float(c)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Render one snapshot's particles as CSV text.
pub fn particles_csv(state: &SystemState) -> String {
    let mut out = String::from(PARTICLE_CSV_HEADER);
    out.push('\n');
    for (ring_index, ring) in state.rings.iter().enumerate() {
        for (id, p) in ring.particles.iter().enumerate() {
            let _ = writeln!(
                out,
                "{ring_index},{id},{},{},{},{}",
                fmt_float(p.pos.x),
                fmt_float(p.pos.y),
                fmt_float(p.weight),
                fmt_float(p.omega()),
            );
        }
    }
    out
}

/// Render a limit-model trajectory as CSV text: one row per vortex per frame.
pub fn limit_csv(trajectory: &LimitTrajectory) -> String {
    let mut out = String::from(LIMIT_CSV_HEADER);
    out.push('\n');
    for frame in &trajectory.frames {
        for (i, z) in frame.positions.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{i},{},{}",
                fmt_float(frame.time),
                fmt_float(z.x),
                fmt_float(z.y),
            );
        }
    }
    out
}

/// Quantities fixed at run start, recorded alongside the config.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedSettings {
    /// Blob parameter actually used.
    pub delta: f64,
    /// Particles per ring.
    pub particles_per_ring: Vec<usize>,
    /// Number of integration steps taken on success.
    pub step_count: usize,
}

/// Reproducibility record written next to the data files. Contains the full
/// config (so the manifest itself can be passed back to `--config`), the
/// resolved settings, the produced files, and the final status.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    pub resolved: ResolvedSettings,
    pub outputs: Vec<String>,
    /// "completed", or the error category of an aborted run.
    pub status: String,
}

/// Write `text` into `dir/name`, creating the directory if needed, and
/// remember the relative name in `outputs`.
pub fn write_output(
    dir: &Path,
    name: &str,
    text: &str,
    outputs: &mut Vec<String>,
) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, text)?;
    outputs.push(name.to_string());
    Ok(path)
}

/// Serialize the manifest as pretty JSON (stable field order, no timestamps).
pub fn manifest_json(manifest: &Manifest) -> Result<String> {
    Ok(serde_json::to_string_pretty(manifest)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::preset;
    use crate::diagnostics::DiagnosticsSpec;
    use crate::dynamics::{run, RunMode};
    use crate::limits::{ode_integrate, LimitModel, LimitState};
    use crate::vec2::Vec2;

    #[test]
    fn float_formatting_round_trips() {
        for &x in &[
            0.1,
            -3.25e-17,
            1.0 / 3.0,
            std::f64::consts::PI * 1e8,
            f64::MIN_POSITIVE,
        ] {
            let text = fmt_float(x);
            let back: f64 = text.parse().unwrap();
            assert_eq!(back, x, "{text} did not round-trip");
        }
        assert_eq!(fmt_float(f64::NAN), "NaN");
    }

    fn small_run() -> (crate::config::ExperimentConfig, Trajectory) {
        let mut cfg = preset("single-ring-eps0.1").unwrap();
        cfg.rings[0].particle_count = 40;
        cfg.integrator.t_end = 0.01;
        cfg.integrator.snapshot_every = 1;
        let state = cfg.build_system().unwrap();
        let traj = run(&state, &cfg.integrator, &RunMode::Monolithic, &cfg.diagnostics);
        (cfg, traj)
    }

    #[test]
    fn ring_csv_has_expected_shape() {
        let (_, traj) = small_run();
        assert!(traj.completed());
        let text = ring_csv(&traj, 0);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), RING_CSV_HEADER);
        let first = lines.next().unwrap();
        let cols: Vec<&str> = first.split(',').collect();
        assert_eq!(cols.len(), 12);
        let t: f64 = cols[0].parse().unwrap();
        assert_eq!(t, 0.0);
        let r_b: f64 = cols[2].parse().unwrap();
        assert!((r_b - 1.0).abs() < 0.05, "blob center near r=1, got {r_b}");
        // One header plus one row per snapshot frame.
        assert_eq!(text.lines().count(), 1 + traj.frames.len());
    }

    #[test]
    fn particle_csv_lists_every_particle() {
        let (cfg, traj) = small_run();
        let text = particles_csv(&traj.frames[0].state);
        assert_eq!(
            text.lines().count(),
            1 + cfg.rings[0].particle_count,
            "header plus one row per particle"
        );
        let row = text.lines().nth(1).unwrap();
        assert!(row.starts_with("0,0,"));
    }

    #[test]
    fn limit_csv_orders_frames_then_vortices() {
        let start = LimitState::new(
            vec![Vec2::new(0.0, 0.5), Vec2::new(0.0, -0.5)],
            vec![1.0, 1.0],
        )
        .unwrap();
        let spec = crate::dynamics::IntegratorSpec {
            scheme: crate::dynamics::Scheme::Rk4,
            dt: 0.1,
            t_end: 0.2,
            snapshot_every: 1,
        };
        let traj = ode_integrate(&start, &spec, LimitModel::PointVortex);
        assert!(traj.completed());
        let text = limit_csv(&traj);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], LIMIT_CSV_HEADER);
        assert_eq!(lines.len(), 1 + 3 * 2);
        assert!(lines[1].split(',').nth(1) == Some("0"));
        assert!(lines[2].split(',').nth(1) == Some("1"));
    }

    #[test]
    fn manifest_serializes_without_timestamps() {
        let (cfg, _) = small_run();
        let manifest = Manifest {
            resolved: ResolvedSettings {
                delta: cfg.resolved_delta(),
                particles_per_ring: vec![40],
                step_count: 2,
            },
            config: cfg,
            outputs: vec!["ring_0.csv".into()],
            status: "completed".into(),
        };
        let text = manifest_json(&manifest).unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(value.get("config").is_some());
        assert!(value.get("resolved").is_some());
        assert_eq!(value["status"], "completed");
        // Rendering twice gives identical bytes (nothing time-dependent).
        assert_eq!(text, manifest_json(&manifest).unwrap());
        // And the manifest itself parses back into the same config.
        let back = crate::config::parse_config(&text).unwrap();
        assert_eq!(back, manifest.config);
    }

    #[test]
    fn diagnostics_spec_default_radius_matches_csv_columns() {
        // The m_R / mu_Rh columns bind to the first configured radius.
        let spec = DiagnosticsSpec::default();
        assert_eq!(spec.radii.first(), Some(&0.05));
    }
}
