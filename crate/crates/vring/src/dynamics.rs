//! Time integration of the particle system: classical fixed-step RK4 (or
//! forward Euler), with velocities re-evaluated at every stage, a hard guard
//! against axis crossings, and an optional reduced mode where each ring feels
//! the others only through a smoothly cut-off interaction kernel.

use crate::diagnostics::{quintic_smoothstep, snapshot_records, DiagnosticsRecord, DiagnosticsSpec};
use crate::error::{Error, Result};
use crate::field::{sum_velocity_exact, FlatSources, SystemState};
use crate::kernels::h_eval;
use crate::vec2::Vec2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "rk4")]
    Rk4,
    #[serde(rename = "euler")]
    Euler,
}

/// Fixed-step integration plan. `t_end` is rounded to the nearest whole
/// number of steps of size `dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSpec {
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: usize,
}

fn default_scheme() -> Scheme {
    Scheme::Rk4
}

fn default_snapshot_every() -> usize {
    1
}

impl IntegratorSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::Config(format!(
                "t_end must be non-negative, got {}",
                self.t_end
            )));
        }
        if self.snapshot_every == 0 {
            return Err(Error::Config("snapshot_every must be at least 1".into()));
        }
        Ok(())
    }

    pub fn step_count(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

/// Declared bounds for an external field, when the caller knows them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssumptionBounds {
    /// Claimed sup of |F|·|log ε|.
    pub velocity_bound: f64,
    /// Claimed Lipschitz constant of F·|log ε|.
    pub lipschitz_bound: f64,
}

/// A prescribed velocity field added on top of the particle-induced one.
#[derive(Clone)]
pub struct ExternalField {
    eval: Arc<dyn Fn(Vec2, f64) -> Vec2 + Send + Sync>,
    pub meta: Option<AssumptionBounds>,
}

impl ExternalField {
    pub fn new(f: impl Fn(Vec2, f64) -> Vec2 + Send + Sync + 'static) -> Self {
        ExternalField {
            eval: Arc::new(f),
            meta: None,
        }
    }

    pub fn with_bounds(
        f: impl Fn(Vec2, f64) -> Vec2 + Send + Sync + 'static,
        meta: AssumptionBounds,
    ) -> Self {
        ExternalField {
            eval: Arc::new(f),
            meta: Some(meta),
        }
    }

    pub fn zero() -> Self {
        ExternalField::new(|_, _| Vec2::ZERO)
    }

    pub fn eval(&self, x: Vec2, t: f64) -> Vec2 {
        (self.eval)(x, t)
    }
}

impl fmt::Debug for ExternalField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExternalField")
            .field("meta", &self.meta)
            .finish_non_exhaustive()
    }
}

/// How `run` couples the rings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunMode {
    /// One big summation: every particle feels every other through the exact
    /// kernel.
    Monolithic,
    /// Each ring feels itself exactly and the other rings through the
    /// cut-off kernel with the given blend diameter.
    ReducedPerRing { cutoff: f64 },
}

/// One stored snapshot: the instant, a deep copy of the state, and one
/// diagnostics record per ring.
#[derive(Debug, Clone)]
pub struct Frame {
    pub time: f64,
    pub state: SystemState,
    pub records: Vec<DiagnosticsRecord>,
}

/// Snapshots collected by `run`; `error` is set when the run aborted early,
/// with every frame up to the failure retained.
#[derive(Debug)]
pub struct Trajectory {
    pub frames: Vec<Frame>,
    pub error: Option<Error>,
}

impl Trajectory {
    pub fn completed(&self) -> bool {
        self.error.is_none()
    }
}

/// Cut-off kernel: the exact kernel at separations ≥ cutoff/2, frozen at
/// separation cutoff/4 (same direction) underneath, with a quintic C² blend
/// on the annulus in between. Bounded on all of the half-plane.
///
/// If the frozen evaluation point would leave the half-plane (source within
/// cutoff/4 of the axis) the inner value is taken as zero; supported setups
/// keep rings farther from the axis than the cutoff.
pub(crate) fn h_tilde(x: Vec2, y: Vec2, delta: f64, cutoff: f64) -> Vec2 {
    let d = x - y;
    let s = d.norm();
    let half = 0.5 * cutoff;
    let quarter = 0.25 * cutoff;
    if s >= half {
        return h_eval(x, y, delta);
    }
    let dir = if s == 0.0 {
        Vec2::new(1.0, 0.0)
    } else {
        d * (1.0 / s)
    };
    let frozen_point = y + dir * quarter;
    let frozen = if frozen_point.y > 0.0 {
        h_eval(frozen_point, y, delta)
    } else {
        Vec2::ZERO
    };
    if s <= quarter {
        return frozen;
    }
    let blend = quintic_smoothstep((s - quarter) / quarter);
    frozen * (1.0 - blend) + h_eval(x, y, delta) * blend
}

/// Cut-off kernel summation over a source slice.
#[inline]
fn sum_velocity_blended(pos: &[Vec2], w: &[f64], x: Vec2, delta: f64, cutoff: f64) -> Vec2 {
    let mut vz = 0.0f64;
    let mut vr = 0.0f64;
    for (y, wj) in pos.iter().zip(w) {
        let h = h_tilde(x, *y, delta, cutoff);
        vz = wj.mul_add(h.x, vz);
        vr = wj.mul_add(h.y, vr);
    }
    Vec2::new(vz, vr)
}

/// The velocity the particles of every other ring induce at `x`, through the
/// cut-off kernel. The other rings' particles are frozen at their current
/// positions when this is built.
pub fn interaction_field(
    state: &SystemState,
    ring_index: usize,
    cutoff: f64,
) -> Result<ExternalField> {
    if ring_index >= state.rings.len() {
        return Err(Error::Domain(format!(
            "ring index {ring_index} out of range ({} rings)",
            state.rings.len()
        )));
    }
    if !(cutoff > 0.0) {
        return Err(Error::Domain(format!("cutoff must be positive, got {cutoff}")));
    }
    let delta = state.reg.delta;
    let mut pos = Vec::new();
    let mut w = Vec::new();
    for (j, ring) in state.rings.iter().enumerate() {
        if j == ring_index {
            continue;
        }
        for p in &ring.particles {
            pos.push(p.pos);
            w.push(p.weight);
        }
    }
    Ok(ExternalField::new(move |x, _t| {
        sum_velocity_blended(&pos, &w, x, delta, cutoff)
    }))
}

/// Monte-Carlo estimate of the external-field bounds: the sup of
/// `|F|·|log ε|` over sampled points and the largest Lipschitz quotient
/// `|F(x)−F(y)|·|log ε| / |x−y|` over all sampled pairs. A measurement on a
/// finite sample, never a proof. Fields are probed at t = 0 with a fixed
/// internal seed, so reports are reproducible.
pub fn verify_assumption_f(
    field: &ExternalField,
    epsilon: f64,
    sample_box: (Vec2, Vec2),
    n_samples: usize,
) -> Result<AssumptionReport> {
    if n_samples < 2 {
        return Err(Error::Domain(format!(
            "need at least 2 samples, got {n_samples}"
        )));
    }
    if !(epsilon > 0.0) || epsilon == 1.0 {
        return Err(Error::Domain(format!(
            "epsilon must be positive and distinct from 1, got {epsilon}"
        )));
    }
    let (lo, hi) = sample_box;
    if !(hi.x >= lo.x && hi.y >= lo.y) {
        return Err(Error::Domain("sample box corners are out of order".into()));
    }
    let log_factor = epsilon.ln().abs();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0bbe_5eed);
    let points: Vec<Vec2> = (0..n_samples)
        .map(|_| {
            Vec2::new(
                if hi.x > lo.x { rng.gen_range(lo.x..hi.x) } else { lo.x },
                if hi.y > lo.y { rng.gen_range(lo.y..hi.y) } else { lo.y },
            )
        })
        .collect();
    let values: Vec<Vec2> = points.iter().map(|&p| field.eval(p, 0.0)).collect();

    let mut velocity_constant = 0.0f64;
    for v in &values {
        velocity_constant = velocity_constant.max(v.norm() * log_factor);
    }
    let mut lipschitz_constant = 0.0f64;
    for i in 0..n_samples {
        for j in (i + 1)..n_samples {
            let gap = points[i].distance(points[j]);
            if gap > 0.0 {
                let quotient = (values[i] - values[j]).norm() * log_factor / gap;
                lipschitz_constant = lipschitz_constant.max(quotient);
            }
        }
    }
    Ok(AssumptionReport {
        velocity_constant,
        lipschitz_constant,
    })
}

/// Measured field bounds from `verify_assumption_f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    /// Largest observed |F|·|log ε|.
    pub velocity_constant: f64,
    /// Largest observed |F(x)−F(y)|·|log ε|/|x−y|.
    pub lipschitz_constant: f64,
}

/// Interior buffers for one advance: flattened positions/weights plus the
/// ring id of every flat slot.
struct Engine<'a> {
    weights: &'a [f64],
    starts: &'a [usize],
    ring_ids: &'a [usize],
    delta: f64,
}

impl Engine<'_> {
    /// Fill `out[i]` with the velocity of particle `i` given the stage
    /// positions. Parallel across targets; each target sums its sources
    /// sequentially in flat order, so results are thread-count independent.
    fn velocities(
        &self,
        pos: &[Vec2],
        t: f64,
        mode: &RunMode,
        f_ext: Option<&ExternalField>,
        out: &mut [Vec2],
    ) {
        let nrings = self.starts.len() - 1;
        out.par_iter_mut().enumerate().for_each(|(i, v)| {
            let x = pos[i];
            let mut vel = match *mode {
                RunMode::ReducedPerRing { cutoff } if nrings > 1 => {
                    let mine = self.ring_ids[i];
                    let mut acc = Vec2::ZERO;
                    for ring in 0..nrings {
                        let range = self.starts[ring]..self.starts[ring + 1];
                        let contribution = if ring == mine {
                            sum_velocity_exact(
                                &pos[range.clone()],
                                &self.weights[range],
                                x,
                                self.delta,
                            )
                        } else {
                            sum_velocity_blended(
                                &pos[range.clone()],
                                &self.weights[range],
                                x,
                                self.delta,
                                cutoff,
                            )
                        };
                        acc += contribution;
                    }
                    acc
                }
                _ => sum_velocity_exact(pos, self.weights, x, self.delta),
            };
            if let Some(f) = f_ext {
                vel += f.eval(x, t);
            }
            *v = vel;
        });
    }
}

/// First flat slot at or below the axis, if any, as (ring, particle, r).
fn axis_violation(pos: &[Vec2], starts: &[usize], ring_ids: &[usize]) -> Option<(usize, usize, f64)> {
    pos.iter()
        .position(|p| !(p.y > 0.0) || !p.is_finite())
        .map(|i| (ring_ids[i], i - starts[ring_ids[i]], pos[i].y))
}

fn guard(pos: &[Vec2], starts: &[usize], ring_ids: &[usize], time: f64) -> Result<()> {
    if let Some((ring, particle, r)) = axis_violation(pos, starts, ring_ids) {
        return Err(Error::AxisCrossing {
            ring,
            particle,
            r,
            time,
        });
    }
    Ok(())
}

fn saxpy(base: &[Vec2], dir: &[Vec2], factor: f64, out: &mut Vec<Vec2>) {
    out.clear();
    out.extend(base.iter().zip(dir).map(|(b, d)| *b + *d * factor));
}

/// Advance flattened positions by one step. Every stage position is checked
/// to stay in the open half-plane before the kernel sees it; a violation
/// rejects the whole step.
fn advance_positions(
    pos: &[Vec2],
    engine: &Engine<'_>,
    spec: &IntegratorSpec,
    mode: &RunMode,
    f_ext: Option<&ExternalField>,
    time: f64,
) -> Result<Vec<Vec2>> {
    let starts = engine.starts;
    let ids = engine.ring_ids;
    guard(pos, starts, ids, time)?;
    let n = pos.len();
    let dt = spec.dt;
    let mut k1 = vec![Vec2::ZERO; n];
    engine.velocities(pos, time, mode, f_ext, &mut k1);
    match spec.scheme {
        Scheme::Euler => {
            let mut next = Vec::with_capacity(n);
            saxpy(pos, &k1, dt, &mut next);
            guard(&next, starts, ids, time)?;
            Ok(next)
        }
        Scheme::Rk4 => {
            let mut stage = Vec::with_capacity(n);
            let mut k2 = vec![Vec2::ZERO; n];
            let mut k3 = vec![Vec2::ZERO; n];
            let mut k4 = vec![Vec2::ZERO; n];

            saxpy(pos, &k1, 0.5 * dt, &mut stage);
            guard(&stage, starts, ids, time)?;
            engine.velocities(&stage, time + 0.5 * dt, mode, f_ext, &mut k2);

            saxpy(pos, &k2, 0.5 * dt, &mut stage);
            guard(&stage, starts, ids, time)?;
            engine.velocities(&stage, time + 0.5 * dt, mode, f_ext, &mut k3);

            saxpy(pos, &k3, dt, &mut stage);
            guard(&stage, starts, ids, time)?;
            engine.velocities(&stage, time + dt, mode, f_ext, &mut k4);

            let sixth = dt / 6.0;
            let next: Vec<Vec2> = (0..n)
                .map(|i| pos[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * sixth)
                .collect();
            guard(&next, starts, ids, time)?;
            Ok(next)
        }
    }
}

fn ring_ids_from_starts(starts: &[usize]) -> Vec<usize> {
    let mut ids = Vec::with_capacity(*starts.last().unwrap_or(&0));
    for ring in 0..starts.len().saturating_sub(1) {
        ids.extend(std::iter::repeat(ring).take(starts[ring + 1] - starts[ring]));
    }
    ids
}

fn write_back(state: &mut SystemState, pos: &[Vec2]) {
    let mut i = 0;
    for ring in &mut state.rings {
        for p in &mut ring.particles {
            p.pos = pos[i];
            i += 1;
        }
    }
}

/// One monolithic step of the whole system under its own induced velocity
/// plus an optional external field. The returned state's clock advances by
/// `dt`; weights and initial data are untouched (the pointwise vorticity is
/// always reconstructed from them).
pub fn step(
    state: &SystemState,
    spec: &IntegratorSpec,
    f_ext: Option<&ExternalField>,
) -> Result<SystemState> {
    spec.validate()?;
    let flat = FlatSources::from_state(state);
    let ids = ring_ids_from_starts(&flat.starts);
    let engine = Engine {
        weights: &flat.w,
        starts: &flat.starts,
        ring_ids: &ids,
        delta: state.reg.delta,
    };
    let next_pos = advance_positions(
        &flat.pos,
        &engine,
        spec,
        &RunMode::Monolithic,
        f_ext,
        state.time,
    )?;
    let mut next = state.clone();
    write_back(&mut next, &next_pos);
    next.time = state.time + spec.dt;
    Ok(next)
}

/// Integrate from `state` to `t_end`, collecting a frame every
/// `snapshot_every` steps (plus the initial and final instants). In reduced
/// mode the rings advance simultaneously, each feeling the others through the
/// cut-off kernel at the current stage positions.
///
/// An axis crossing (or invalid spec) stops the run; everything recorded up
/// to that point is returned alongside the error.
pub fn run(
    state: &SystemState,
    spec: &IntegratorSpec,
    mode: &RunMode,
    diag: &DiagnosticsSpec,
) -> Trajectory {
    if let Err(e) = spec.validate().and_then(|_| diag.validate()) {
        return Trajectory {
            frames: Vec::new(),
            error: Some(e),
        };
    }
    if let RunMode::ReducedPerRing { cutoff } = mode {
        if !(*cutoff > 0.0) {
            return Trajectory {
                frames: Vec::new(),
                error: Some(Error::Config(format!(
                    "reduced mode cutoff must be positive, got {cutoff}"
                ))),
            };
        }
    }

    let mut frames = Vec::new();
    let mut snapshot_ordinal = 0usize;
    let mut push_frame = |s: &SystemState, ordinal: &mut usize| {
        let with_energy = diag.energy_every > 0 && *ordinal % diag.energy_every == 0;
        frames.push(Frame {
            time: s.time,
            state: s.clone(),
            records: snapshot_records(s, diag, with_energy),
        });
        *ordinal += 1;
    };

    let mut current = state.clone();
    let t0 = state.time;
    push_frame(&current, &mut snapshot_ordinal);

    let n_steps = spec.step_count();
    for n in 1..=n_steps {
        let flat = FlatSources::from_state(&current);
        let ids = ring_ids_from_starts(&flat.starts);
        let engine = Engine {
            weights: &flat.w,
            starts: &flat.starts,
            ring_ids: &ids,
            delta: current.reg.delta,
        };
        match advance_positions(&flat.pos, &engine, spec, mode, None, current.time) {
            Ok(next_pos) => {
                write_back(&mut current, &next_pos);
                current.time = t0 + n as f64 * spec.dt;
            }
            Err(e) => {
                return Trajectory {
                    frames,
                    error: Some(e),
                };
            }
        }
        if n % spec.snapshot_every == 0 || n == n_steps {
            push_frame(&current, &mut snapshot_ordinal);
        }
    }
    Trajectory {
        frames,
        error: None,
    }
}
