//! The two limiting ODE models the particle system approaches as the blobs
//! concentrate: the planar point-vortex system, and its large-ring variant
//! where every vortex additionally self-propels along the axis at a speed
//! proportional to its own intensity.

use crate::dynamics::{IntegratorSpec, Scheme};
use crate::error::{Error, Result};
use crate::kernels::{kernel_k, Regularization};
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};

/// Configuration of ideal vortices in the plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitState {
    pub positions: Vec<Vec2>,
    pub intensities: Vec<f64>,
    pub time: f64,
}

impl LimitState {
    pub fn new(positions: Vec<Vec2>, intensities: Vec<f64>) -> Result<Self> {
        let s = LimitState {
            positions,
            intensities,
            time: 0.0,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.positions.len() != self.intensities.len() {
            return Err(Error::Config(format!(
                "{} positions vs {} intensities",
                self.positions.len(),
                self.intensities.len()
            )));
        }
        if self.positions.is_empty() {
            return Err(Error::Config("at least one vortex required".into()));
        }
        for (i, p) in self.positions.iter().enumerate() {
            if !p.is_finite() || !self.intensities[i].is_finite() {
                return Err(Error::Config(format!("vortex {i} is not finite")));
            }
            for (j, q) in self.positions.iter().enumerate().skip(i + 1) {
                if p == q {
                    return Err(Error::Config(format!(
                        "vortices {i} and {j} coincide at {p:?}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Smallest pairwise distance; infinite for a single vortex.
    pub fn min_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, p) in self.positions.iter().enumerate() {
            for q in self.positions.iter().skip(i + 1) {
                best = best.min(p.distance(*q));
            }
        }
        best
    }
}

/// Which limiting ODE drives the vortices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LimitModel {
    /// ż_i = Σ_{j≠i} A_j K(z_i − z_j).
    #[serde(rename = "point-vortex")]
    PointVortex,
    /// The point-vortex field plus a self-term A_i·(1,0) per vortex.
    #[serde(rename = "large-ring")]
    LargeRing,
}

fn pairwise_guard(s: &LimitState, floor: f64) -> Result<()> {
    for (i, p) in s.positions.iter().enumerate() {
        for (j, q) in s.positions.iter().enumerate().skip(i + 1) {
            let dist = p.distance(*q);
            if dist < floor {
                return Err(Error::Collision {
                    i,
                    j,
                    dist,
                    floor,
                    time: s.time,
                });
            }
        }
    }
    Ok(())
}

/// Velocities of the planar point-vortex system, with the exact (δ = 0)
/// planar kernel. Errors with a collision report when any pair sits closer
/// than `floor`.
pub fn point_vortex_rhs(s: &LimitState, floor: f64) -> Result<Vec<Vec2>> {
    pairwise_guard(s, floor)?;
    let n = s.positions.len();
    let mut out = vec![Vec2::ZERO; n];
    for i in 0..n {
        let zi = s.positions[i];
        let mut v = Vec2::ZERO;
        for j in 0..n {
            if j == i {
                continue;
            }
            v += kernel_k(zi - s.positions[j], Regularization::EXACT) * s.intensities[j];
        }
        out[i] = v;
    }
    Ok(out)
}

/// Velocities of the large-ring model: the point-vortex field plus each
/// vortex's own axial drive `A_i · (1, 0)`.
pub fn large_ring_rhs(s: &LimitState, floor: f64) -> Result<Vec<Vec2>> {
    let mut out = point_vortex_rhs(s, floor)?;
    for (v, a) in out.iter_mut().zip(&s.intensities) {
        v.x += a;
    }
    Ok(out)
}

/// Snapshots of an ODE integration; `error` is set when a collision (or an
/// invalid state/spec) stopped it early, with the partial history retained.
#[derive(Debug)]
pub struct LimitTrajectory {
    pub frames: Vec<LimitState>,
    pub error: Option<Error>,
}

impl LimitTrajectory {
    pub fn completed(&self) -> bool {
        self.error.is_none()
    }
}

fn rhs_for(model: LimitModel, s: &LimitState, floor: f64) -> Result<Vec<Vec2>> {
    match model {
        LimitModel::PointVortex => point_vortex_rhs(s, floor),
        LimitModel::LargeRing => large_ring_rhs(s, floor),
    }
}

fn shifted(s: &LimitState, dir: &[Vec2], factor: f64, time: f64) -> LimitState {
    LimitState {
        positions: s
            .positions
            .iter()
            .zip(dir)
            .map(|(p, d)| *p + *d * factor)
            .collect(),
        intensities: s.intensities.clone(),
        time,
    }
}

/// Advance the chosen model with the configured fixed-step scheme, recording
/// a frame every `snapshot_every` steps (plus first and last). The collision
/// floor is 10⁻⁶ × the initial minimum pairwise distance; a collapse aborts
/// the run and is reported, never smoothed over.
pub fn ode_integrate(
    start: &LimitState,
    spec: &IntegratorSpec,
    model: LimitModel,
) -> LimitTrajectory {
    if let Err(e) = start.validate().and_then(|_| spec.validate()) {
        return LimitTrajectory {
            frames: Vec::new(),
            error: Some(e),
        };
    }
    let floor = if start.positions.len() > 1 {
        1e-6 * start.min_distance()
    } else {
        0.0
    };
    let mut frames = vec![start.clone()];
    let mut current = start.clone();
    let t0 = start.time;
    let dt = spec.dt;
    let n_steps = spec.step_count();

    for n in 1..=n_steps {
        let stepped = (|| -> Result<LimitState> {
            let next_time = t0 + n as f64 * dt;
            match spec.scheme {
                Scheme::Euler => {
                    let k1 = rhs_for(model, &current, floor)?;
                    Ok(shifted(&current, &k1, dt, next_time))
                }
                Scheme::Rk4 => {
                    let k1 = rhs_for(model, &current, floor)?;
                    let s2 = shifted(&current, &k1, 0.5 * dt, current.time + 0.5 * dt);
                    let k2 = rhs_for(model, &s2, floor)?;
                    let s3 = shifted(&current, &k2, 0.5 * dt, current.time + 0.5 * dt);
                    let k3 = rhs_for(model, &s3, floor)?;
                    let s4 = shifted(&current, &k3, dt, current.time + dt);
                    let k4 = rhs_for(model, &s4, floor)?;
                    let combined: Vec<Vec2> = (0..k1.len())
                        .map(|i| k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i])
                        .collect();
                    Ok(shifted(&current, &combined, dt / 6.0, next_time))
                }
            }
        })();
        match stepped {
            Ok(next) => current = next,
            Err(e) => {
                return LimitTrajectory {
                    frames,
                    error: Some(e),
                };
            }
        }
        if n % spec.snapshot_every == 0 || n == n_steps {
            frames.push(current.clone());
        }
    }
    LimitTrajectory {
        frames,
        error: None,
    }
}
