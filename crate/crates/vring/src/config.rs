//! Experiment configuration: the JSON schema the CLI consumes, validation,
//! named presets, and the translation into live simulation objects.

use crate::diagnostics::DiagnosticsSpec;
use crate::dynamics::{IntegratorSpec, RunMode, Scheme};
use crate::error::{Error, Result};
use crate::field::{make_system, KernelMode, Profile, RingSpec, SystemState};
use crate::kernels::Regularization;
use crate::limits::LimitModel;
use crate::quadrature::QuadratureSpec;
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// How the rings are coupled during a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CouplingMode {
    #[serde(rename = "monolithic")]
    Monolithic,
    #[serde(rename = "reduced-per-ring")]
    ReducedPerRing,
}

/// ε-grid for a convergence study over the first ring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySpec {
    /// Strictly decreasing disk radii, one simulation each.
    pub epsilons: Vec<f64>,
}

/// Point-vortex / large-ring model input for the `limit` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSpec {
    pub model: LimitModel,
    pub positions: Vec<Vec2>,
    pub intensities: Vec<f64>,
}

/// Everything a run depends on. Serialized verbatim into the output manifest
/// so results can be reproduced from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Ring recipes; may be empty for pure `limit` configs.
    #[serde(default)]
    pub rings: Vec<RingSpec>,
    /// Scale each ring's mass by 1/|log ε| (the concentration normalization).
    #[serde(default = "default_true")]
    pub log_eps_scaling: bool,
    #[serde(default = "default_kernel_mode")]
    pub kernel_mode: KernelMode,
    /// Blob parameter δ; `null` picks 2× the mean inter-particle spacing.
    #[serde(default)]
    pub regularization: Option<f64>,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    pub integrator: IntegratorSpec,
    #[serde(default = "default_coupling")]
    pub mode: CouplingMode,
    /// Blend diameter of the inter-ring kernel; required in reduced mode.
    #[serde(default)]
    pub cutoff: Option<f64>,
    #[serde(default)]
    pub diagnostics: DiagnosticsSpec,
    #[serde(default)]
    pub study: Option<StudySpec>,
    #[serde(default)]
    pub limit: Option<LimitSpec>,
    /// Recorded in the manifest; current pipelines are fully deterministic,
    /// so this only matters for future stochastic extensions.
    #[serde(default)]
    pub seed: u64,
    /// Also dump per-snapshot particle CSVs.
    #[serde(default)]
    pub particle_snapshots: bool,
}

fn default_true() -> bool {
    true
}

fn default_kernel_mode() -> KernelMode {
    KernelMode::ExactH
}

fn default_coupling() -> CouplingMode {
    CouplingMode::Monolithic
}

impl ExperimentConfig {
    /// Schema-level checks shared by every subcommand.
    pub fn validate(&self) -> Result<()> {
        self.integrator.validate()?;
        self.diagnostics.validate()?;
        if let Some(d) = self.regularization {
            if !(d >= 0.0) || !d.is_finite() {
                return Err(Error::Config(format!(
                    "regularization must be a non-negative number, got {d}"
                )));
            }
        }
        if self.mode == CouplingMode::ReducedPerRing {
            match self.cutoff {
                Some(c) if c > 0.0 && c.is_finite() => {}
                other => {
                    return Err(Error::Config(format!(
                        "reduced-per-ring mode needs a positive cutoff, got {other:?}"
                    )));
                }
            }
        }
        if let Some(study) = &self.study {
            if study.epsilons.is_empty() {
                return Err(Error::Config("study needs a non-empty epsilon grid".into()));
            }
            for pair in study.epsilons.windows(2) {
                if !(pair[1] < pair[0]) {
                    return Err(Error::Config(format!(
                        "study epsilons must be strictly decreasing, got {:?}",
                        study.epsilons
                    )));
                }
            }
            for &e in &study.epsilons {
                if !(e > 0.0) || (self.log_eps_scaling && e >= 1.0) {
                    return Err(Error::Config(format!("study epsilon {e} out of range")));
                }
            }
        }
        if let Some(limit) = &self.limit {
            if limit.positions.len() != limit.intensities.len() {
                return Err(Error::Config(format!(
                    "limit model has {} positions but {} intensities",
                    limit.positions.len(),
                    limit.intensities.len()
                )));
            }
        }
        Ok(())
    }

    /// Checks needed before building a particle system.
    pub fn validate_for_particles(&self) -> Result<()> {
        self.validate()?;
        if self.rings.is_empty() {
            return Err(Error::Config(
                "this command needs at least one ring in `rings`".into(),
            ));
        }
        Ok(())
    }

    /// The δ actually used: the configured value, or 2× the mean
    /// inter-particle spacing across rings when unset.
    pub fn resolved_delta(&self) -> f64 {
        match self.regularization {
            Some(d) => d,
            None => {
                if self.rings.is_empty() {
                    return 0.0;
                }
                let mean: f64 = self
                    .rings
                    .iter()
                    .map(|r| r.mean_spacing())
                    .sum::<f64>()
                    / self.rings.len() as f64;
                2.0 * mean
            }
        }
    }

    /// Build the initial particle system this config describes.
    pub fn build_system(&self) -> Result<SystemState> {
        self.validate_for_particles()?;
        make_system(
            &self.rings,
            Regularization::new(self.resolved_delta()),
            self.quadrature,
            self.kernel_mode,
            self.log_eps_scaling,
        )
    }

    /// The dynamics coupling this config asks for.
    pub fn run_mode(&self) -> Result<RunMode> {
        match self.mode {
            CouplingMode::Monolithic => Ok(RunMode::Monolithic),
            CouplingMode::ReducedPerRing => {
                let cutoff = self.cutoff.ok_or_else(|| {
                    Error::Config("reduced-per-ring mode needs a cutoff".into())
                })?;
                Ok(RunMode::ReducedPerRing { cutoff })
            }
        }
    }
}

/// Parse a config from JSON text; a manifest (with the config nested under
/// a `config` key) is accepted as well, so outputs reproduce themselves.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let config_value = match value.get("config") {
        Some(inner) if value.is_object() => inner.clone(),
        _ => value,
    };
    Ok(serde_json::from_value(config_value)?)
}

fn base_single_ring(epsilon: f64, particle_count: usize) -> RingSpec {
    RingSpec {
        center: Vec2::new(0.0, 1.0),
        epsilon,
        intensity: 1.0,
        profile: Profile::Uniform,
        particle_count,
    }
}

fn base_config(rings: Vec<RingSpec>, integrator: IntegratorSpec) -> ExperimentConfig {
    ExperimentConfig {
        rings,
        log_eps_scaling: true,
        kernel_mode: KernelMode::ExactH,
        regularization: None,
        quadrature: QuadratureSpec::default(),
        integrator,
        mode: CouplingMode::Monolithic,
        cutoff: None,
        diagnostics: DiagnosticsSpec::default(),
        study: None,
        limit: None,
        seed: 0,
        particle_snapshots: false,
    }
}

/// Named ready-to-run configurations.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    match name {
        "single-ring-eps0.1" => Ok(base_config(
            vec![base_single_ring(0.1, 600)],
            IntegratorSpec {
                scheme: Scheme::Rk4,
                dt: 5e-3,
                t_end: 0.1,
                snapshot_every: 4,
            },
        )),
        "study-default" => {
            let mut cfg = base_config(
                vec![base_single_ring(0.1, 2000)],
                IntegratorSpec {
                    scheme: Scheme::Rk4,
                    dt: 5e-3,
                    t_end: 0.5,
                    snapshot_every: 1,
                },
            );
            cfg.diagnostics.energy_every = 0;
            cfg.study = Some(StudySpec {
                epsilons: vec![0.1, 0.05, 0.02],
            });
            Ok(cfg)
        }
        "two-rings-reduced" => {
            let mut cfg = base_config(
                vec![
                    base_single_ring(0.05, 500),
                    RingSpec {
                        center: Vec2::new(1.0, 1.0),
                        ..base_single_ring(0.05, 500)
                    },
                ],
                IntegratorSpec {
                    scheme: Scheme::Rk4,
                    dt: 1e-3,
                    t_end: 0.2,
                    snapshot_every: 20,
                },
            );
            cfg.mode = CouplingMode::ReducedPerRing;
            cfg.cutoff = Some(0.5);
            cfg.diagnostics.energy_every = 0;
            Ok(cfg)
        }
        "two-vortex-corotation" => {
            let mut cfg = base_config(
                Vec::new(),
                IntegratorSpec {
                    scheme: Scheme::Rk4,
                    dt: 1e-3,
                    t_end: 1.0,
                    snapshot_every: 1,
                },
            );
            cfg.limit = Some(LimitSpec {
                model: LimitModel::PointVortex,
                positions: vec![Vec2::new(-0.5, 0.0), Vec2::new(0.5, 0.0)],
                intensities: vec![2.0 * PI, 2.0 * PI],
            });
            Ok(cfg)
        }
        "large-ring-single" => {
            let mut cfg = base_config(
                Vec::new(),
                IntegratorSpec {
                    scheme: Scheme::Rk4,
                    dt: 1e-2,
                    t_end: 1.0,
                    snapshot_every: 10,
                },
            );
            cfg.limit = Some(LimitSpec {
                model: LimitModel::LargeRing,
                positions: vec![Vec2::new(0.0, 0.0)],
                intensities: vec![1.0],
            });
            Ok(cfg)
        }
        other => Err(Error::Config(format!(
            "unknown preset `{other}`; available: single-ring-eps0.1, study-default, \
             two-rings-reduced, two-vortex-corotation, large-ring-single"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for name in [
            "single-ring-eps0.1",
            "study-default",
            "two-rings-reduced",
            "two-vortex-corotation",
            "large-ring-single",
        ] {
            let cfg = preset(name).unwrap();
            cfg.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(preset("no-such-thing").is_err());
    }

    #[test]
    fn json_round_trip_preserves_config() {
        let cfg = preset("two-rings-reduced").unwrap();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back = parse_config(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn manifest_style_input_unwraps_the_config() {
        let cfg = preset("single-ring-eps0.1").unwrap();
        let manifest = serde_json::json!({
            "config": serde_json::to_value(&cfg).unwrap(),
            "resolved": { "delta": 0.1 },
            "outputs": ["ring_0.csv"],
        });
        let back = parse_config(&manifest.to_string()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{
            "rings": [],
            "integrator": { "dt": 0.01, "t_end": 0.0 },
            "not_a_real_knob": 3
        }"#;
        assert!(parse_config(text).is_err());
    }

    #[test]
    fn validation_catches_bad_setups() {
        let mut cfg = preset("single-ring-eps0.1").unwrap();
        cfg.mode = CouplingMode::ReducedPerRing;
        assert!(cfg.validate().is_err(), "reduced mode without cutoff");
        cfg.cutoff = Some(0.5);
        cfg.validate().unwrap();

        let mut bad_grid = preset("study-default").unwrap();
        bad_grid.study = Some(StudySpec {
            epsilons: vec![0.05, 0.1],
        });
        assert!(bad_grid.validate().is_err(), "increasing grid");

        let mut no_rings = preset("single-ring-eps0.1").unwrap();
        no_rings.rings.clear();
        assert!(no_rings.validate_for_particles().is_err());

        let mut bad_reg = preset("single-ring-eps0.1").unwrap();
        bad_reg.regularization = Some(-0.1);
        assert!(bad_reg.validate().is_err());
    }

    #[test]
    fn delta_defaults_to_twice_mean_spacing() {
        let cfg = preset("single-ring-eps0.1").unwrap();
        let expect = 2.0 * 0.1 * (PI / 600.0).sqrt();
        assert!((cfg.resolved_delta() - expect).abs() < 1e-15);

        let mut fixed = cfg;
        fixed.regularization = Some(0.03);
        assert_eq!(fixed.resolved_delta(), 0.03);
    }

    #[test]
    fn build_system_and_run_mode() {
        let cfg = preset("two-rings-reduced").unwrap();
        let state = cfg.build_system().unwrap();
        assert_eq!(state.rings.len(), 2);
        assert_eq!(state.reg.delta, cfg.resolved_delta());
        match cfg.run_mode().unwrap() {
            RunMode::ReducedPerRing { cutoff } => assert_eq!(cutoff, 0.5),
            other => panic!("expected reduced mode, got {other:?}"),
        }
    }
}
