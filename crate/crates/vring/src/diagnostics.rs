//! Scalar and vector functionals observed along a simulation: center of
//! vorticity, moment of inertia, outside-mass measures (sharp and mollified),
//! support radius, concentration center, and the conserved quantities
//! (total mass, radial moment, kinetic energy).

use crate::error::{Error, Result};
use crate::field::{FlatSources, ParticleField, SystemState};
use crate::kernels::g_eval;
use crate::vec2::Vec2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Quintic smoothstep: 0 at u ≤ 0, 1 at u ≥ 1, C² across both ends.
#[inline]
pub(crate) fn quintic_smoothstep(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
    }
}

/// Radial cutoff bump: 1 on the disk of `radius`, 0 beyond `radius + halo`,
/// a quintic smoothstep ramp in between (C², radial by construction).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mollifier {
    radius: f64,
    halo: f64,
}

impl Mollifier {
    /// Derivative-bound constant: both `|W'| ≤ GRADIENT_CONSTANT / halo` and
    /// `|W''| ≤ GRADIENT_CONSTANT / halo²` hold for the quintic ramp, whose
    /// extreme slopes are 15/8 and 10/√3 respectively; this is the larger.
    pub const GRADIENT_CONSTANT: f64 = 5.773502691896258;

    /// Requires `radius ≥ 2·halo > 0`.
    pub fn new(radius: f64, halo: f64) -> Result<Self> {
        if !(halo > 0.0) || !(radius >= 2.0 * halo) || !radius.is_finite() {
            return Err(Error::Domain(format!(
                "mollifier needs radius >= 2*halo > 0, got radius {radius}, halo {halo}"
            )));
        }
        Ok(Mollifier { radius, halo })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn halo(&self) -> f64 {
        self.halo
    }

    /// Profile value at distance `s` from the center.
    pub fn value(&self, s: f64) -> f64 {
        1.0 - quintic_smoothstep((s.abs() - self.radius) / self.halo)
    }
}

/// What to record at each snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSpec {
    /// Radii for the sharp outside-mass measure (and the mollified one, each
    /// paired with `halo`). The first entry feeds the trajectory CSV.
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
    /// Ramp width of the mollified measure; every radius must be ≥ 2·halo.
    #[serde(default = "default_halo")]
    pub halo: f64,
    /// Search radius for the concentration center; `None` uses √ε per ring.
    #[serde(default)]
    pub q_rho: Option<f64>,
    /// Compute the (O(P²)) energy on every k-th snapshot; 0 disables it.
    #[serde(default = "default_energy_every")]
    pub energy_every: usize,
}

fn default_radii() -> Vec<f64> {
    vec![0.05]
}

fn default_halo() -> f64 {
    0.025
}

fn default_energy_every() -> usize {
    1
}

impl Default for DiagnosticsSpec {
    fn default() -> Self {
        DiagnosticsSpec {
            radii: default_radii(),
            halo: default_halo(),
            q_rho: None,
            energy_every: default_energy_every(),
        }
    }
}

impl DiagnosticsSpec {
    pub fn validate(&self) -> Result<()> {
        if self.radii.is_empty() {
            return Err(Error::Config("diagnostics needs at least one radius".into()));
        }
        for &r in &self.radii {
            Mollifier::new(r, self.halo)?;
        }
        if let Some(rho) = self.q_rho {
            if !(rho > 0.0) {
                return Err(Error::Config(format!(
                    "concentration search radius must be positive, got {rho}"
                )));
            }
        }
        Ok(())
    }
}

/// Snapshot measurements for one ring. `mass` and `radial_moment` are the
/// ring's own sums (each exactly conserved); `energy` is the whole system's
/// kinetic energy — it couples rings and is reported identically on each, as
/// NaN when not computed (disabled, skipped this snapshot, or δ = 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub time: f64,
    /// Center of vorticity (weighted mean position).
    pub center: Vec2,
    /// Moment of inertia about the center.
    pub moment: f64,
    /// (radius, weight outside that disk around the center), per configured radius.
    pub outside_mass: Vec<(f64, f64)>,
    /// (radius, mollified outside weight at the configured halo), per radius.
    pub mollified_outside: Vec<(f64, f64)>,
    /// Largest particle distance from the center.
    pub support_radius: f64,
    /// Concentration center: particle position holding the most weight nearby.
    pub concentration: Vec2,
    /// Ring total weight.
    pub mass: f64,
    /// Ring Σ w r².
    pub radial_moment: f64,
    /// System kinetic energy (NaN when not computed).
    pub energy: f64,
}

/// The three conserved quantities of the full system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conserved {
    /// Total vorticity mass Σ w.
    pub m0: f64,
    /// Radial moment Σ w r².
    pub m2: f64,
    /// Kinetic energy (pairwise stream-kernel sum, prefactor π).
    pub e: f64,
}

fn weighted_center(ring: &ParticleField) -> Option<Vec2> {
    let total: f64 = ring.particles.iter().map(|p| p.weight).sum();
    if total == 0.0 {
        return None;
    }
    let mut sum = Vec2::ZERO;
    for p in &ring.particles {
        sum += p.pos * p.weight;
    }
    Some(sum * (1.0 / total))
}

/// Weighted mean particle position. Errors when the ring carries no net mass.
pub fn center_of_vorticity(ring: &ParticleField) -> Result<Vec2> {
    weighted_center(ring).ok_or(Error::ZeroMass)
}

/// Weighted second moment about the center of vorticity. Small values mean a
/// sharply concentrated ring.
pub fn moment_of_inertia(ring: &ParticleField) -> Result<f64> {
    let b = center_of_vorticity(ring)?;
    Ok(moment_about(ring, b))
}

fn moment_about(ring: &ParticleField, q: Vec2) -> f64 {
    ring.particles
        .iter()
        .map(|p| p.weight * (p.pos - q).norm_sq())
        .sum()
}

/// Total weight strictly outside the disk of `radius` around the center.
pub fn mass_outside(ring: &ParticleField, radius: f64) -> Result<f64> {
    let b = center_of_vorticity(ring)?;
    Ok(mass_outside_about(ring, b, radius))
}

fn mass_outside_about(ring: &ParticleField, b: Vec2, radius: f64) -> f64 {
    ring.particles
        .iter()
        .filter(|p| p.pos.distance(b) > radius)
        .map(|p| p.weight)
        .sum()
}

/// Smoothed outside mass Σ w_j (1 − W(|pos_j − B|)). For positive weights it
/// sandwiches the sharp measure: μ(R,h) ≤ m(R) ≤ μ(R−h,h).
pub fn mollified_mass(ring: &ParticleField, mollifier: &Mollifier) -> Result<f64> {
    let b = center_of_vorticity(ring)?;
    Ok(mollified_mass_about(ring, b, mollifier))
}

fn mollified_mass_about(ring: &ParticleField, b: Vec2, mollifier: &Mollifier) -> f64 {
    ring.particles
        .iter()
        .map(|p| p.weight * (1.0 - mollifier.value(p.pos.distance(b))))
        .sum()
}

/// Largest distance of any particle from the center of vorticity.
pub fn support_radius(ring: &ParticleField) -> Result<f64> {
    let b = center_of_vorticity(ring)?;
    Ok(support_radius_about(ring, b))
}

fn support_radius_about(ring: &ParticleField, b: Vec2) -> f64 {
    ring.particles
        .iter()
        .fold(0.0f64, |m, p| m.max(p.pos.distance(b)))
}

/// The particle position whose surrounding disk of radius `rho` captures the
/// most weight (weight is counted toward the ring's sign, so rings of either
/// orientation find their bulk). Ties resolve to the smallest particle index.
pub fn concentration_center(ring: &ParticleField, rho: f64) -> Result<Vec2> {
    let total: f64 = ring.particles.iter().map(|p| p.weight).sum();
    if total == 0.0 {
        return Err(Error::ZeroMass);
    }
    let sign = total.signum();
    let rho_sq = rho * rho;
    let scored = ring
        .particles
        .par_iter()
        .map(|candidate| {
            let mut inside = 0.0;
            for p in &ring.particles {
                if (p.pos - candidate.pos).norm_sq() <= rho_sq {
                    inside += p.weight;
                }
            }
            sign * inside
        })
        .collect::<Vec<_>>();
    let mut best = 0usize;
    for (k, score) in scored.iter().enumerate() {
        if *score > scored[best] {
            best = k;
        }
    }
    Ok(ring.particles[best].pos)
}

/// Total mass, radial moment, and kinetic energy of the whole system.
///
/// The energy is the all-pairs stream-kernel sum (self terms included) at the
/// system's regularization, so it requires δ > 0; only its drift over time is
/// meaningful, not its absolute normalization.
pub fn conserved_quantities(state: &SystemState) -> Result<Conserved> {
    if !(state.reg.delta > 0.0) {
        return Err(Error::Domain(
            "the energy sum needs a positive regularization delta".into(),
        ));
    }
    let (m0, m2) = mass_moments(state);
    Ok(Conserved {
        m0,
        m2,
        e: energy(state),
    })
}

fn mass_moments(state: &SystemState) -> (f64, f64) {
    let mut m0 = 0.0;
    let mut m2 = 0.0;
    for ring in &state.rings {
        for p in &ring.particles {
            m0 += p.weight;
            m2 = (p.weight * p.pos.y).mul_add(p.pos.y, m2);
        }
    }
    (m0, m2)
}

/// All-pairs energy sum; parallel across rows with a sequential final
/// reduction so the result is independent of the thread count.
fn energy(state: &SystemState) -> f64 {
    let flat = FlatSources::from_state(state);
    let delta = state.reg.delta;
    let n = flat.len();
    let row_sums: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|j| {
            let xj = flat.pos[j];
            let mut s = 0.0;
            for k in 0..n {
                s = (flat.w[k] * g_eval(xj, flat.pos[k], delta)).mul_add(1.0, s);
            }
            flat.w[j] * s
        })
        .collect();
    PI * row_sums.iter().sum::<f64>()
}

/// Where the ring should be at time `t` if it translated at the ideal speed
/// `intensity / (4π r)` along the axis, starting from `start`.
pub fn predicted_center(start: Vec2, intensity: f64, t: f64) -> Vec2 {
    Vec2::new(start.x + intensity / (4.0 * PI * start.y) * t, start.y)
}

/// Build one record per ring for the current state.
///
/// Zero-mass rings (all weights zero) fall back to the unweighted mean
/// position as center so trajectories of passive configurations still export;
/// their concentration center echoes the fallback center.
pub fn snapshot_records(
    state: &SystemState,
    spec: &DiagnosticsSpec,
    with_energy: bool,
) -> Vec<DiagnosticsRecord> {
    let energy_value = if with_energy && state.reg.delta > 0.0 {
        energy(state)
    } else {
        f64::NAN
    };
    state
        .rings
        .iter()
        .map(|ring| {
            let center = weighted_center(ring).unwrap_or_else(|| mean_position(ring));
            let rho = spec.q_rho.unwrap_or_else(|| ring.spec.epsilon.sqrt());
            let concentration = concentration_center(ring, rho).unwrap_or(center);
            let outside_mass = spec
                .radii
                .iter()
                .map(|&r| (r, mass_outside_about(ring, center, r)))
                .collect();
            let mollified_outside = spec
                .radii
                .iter()
                .map(|&r| {
                    let m = Mollifier::new(r, spec.halo).expect("validated diagnostics spec");
                    (r, mollified_mass_about(ring, center, &m))
                })
                .collect();
            let mass: f64 = ring.particles.iter().map(|p| p.weight).sum();
            let radial_moment: f64 = ring
                .particles
                .iter()
                .map(|p| p.weight * p.pos.y * p.pos.y)
                .sum();
            DiagnosticsRecord {
                time: state.time,
                center,
                moment: moment_about(ring, center),
                outside_mass,
                mollified_outside,
                support_radius: support_radius_about(ring, center),
                concentration,
                mass,
                radial_moment,
                energy: energy_value,
            }
        })
        .collect()
}

fn mean_position(ring: &ParticleField) -> Vec2 {
    let n = ring.particles.len().max(1) as f64;
    let mut sum = Vec2::ZERO;
    for p in &ring.particles {
        sum += p.pos;
    }
    sum * (1.0 / n)
}
