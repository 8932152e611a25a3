//! ε-convergence study: rerun one ring recipe across a grid of shrinking core
//! radii, estimate the translation speed for each, and extrapolate the limit.
//!
//! The speed estimate v̂(ε) is the least-squares slope of the axial center
//! coordinate over the middle 80% of the realized time window (the ends are
//! dropped to be robust against the initial transient and any aborted tail).
//! v̂ is then fit linearly against 1/|log ε|; the intercept is the
//! extrapolated ε→0 speed, to be compared with a/(4π r*).

use crate::config::ExperimentConfig;
use crate::dynamics::{run, Trajectory};
use crate::error::{Error, Result};
use crate::output::fmt_float;
use serde::Serialize;
use std::f64::consts::PI;

/// One ε of the study table.
#[derive(Debug, Clone, Serialize)]
pub struct StudyRow {
    pub epsilon: f64,
    /// |log ε|.
    pub abs_log_eps: f64,
    /// Least-squares axial speed of the vorticity center.
    pub v_hat: f64,
    /// |v̂ − a/(4π r*)|.
    pub v_err: f64,
    /// max_t |B_r(t) − r*|: radial drift of the center.
    pub max_r_dev: f64,
    /// sup_t I(t)·|log ε|²: scaled concentration moment.
    pub sup_moment_scaled: f64,
    /// Error category and message when this ε's run failed.
    pub error: Option<String>,
}

impl StudyRow {
    pub fn succeeded(&self) -> bool {
        self.error.is_none()
    }

    fn failed(epsilon: f64, err: &Error) -> Self {
        StudyRow {
            epsilon,
            abs_log_eps: epsilon.ln().abs(),
            v_hat: f64::NAN,
            v_err: f64::NAN,
            max_r_dev: f64::NAN,
            sup_moment_scaled: f64::NAN,
            error: Some(format!("{}: {err}", err.category())),
        }
    }
}

/// Linear fit of v̂ against 1/|log ε|.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct VelocityFit {
    /// Extrapolated speed at ε → 0.
    pub intercept: f64,
    pub slope: f64,
}

/// Full study output.
#[derive(Debug, Clone, Serialize)]
pub struct StudyResult {
    /// a/(4π r*) for the template ring: the predicted limit speed.
    pub reference_speed: f64,
    pub rows: Vec<StudyRow>,
    /// Present when at least two ε-runs succeeded.
    pub fit: Option<VelocityFit>,
}

/// Ordinary least squares: returns (intercept, slope), or None when the
/// abscissas don't span an interval.
pub(crate) fn least_squares(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((my - slope * mx, slope))
}

fn row_from_trajectory(epsilon: f64, traj: &Trajectory, reference_speed: f64, r_star: f64) -> StudyRow {
    let abs_log_eps = epsilon.ln().abs();
    let t0 = traj.frames.first().map_or(0.0, |f| f.time);
    let t1 = traj.frames.last().map_or(0.0, |f| f.time);
    let span = t1 - t0;
    let (lo, hi) = (t0 + 0.1 * span, t0 + 0.9 * span);

    let mut times = Vec::new();
    let mut axial = Vec::new();
    let mut max_r_dev: f64 = 0.0;
    let mut sup_moment: f64 = 0.0;
    for frame in &traj.frames {
        let rec = &frame.records[0];
        if frame.time >= lo && frame.time <= hi {
            times.push(frame.time);
            axial.push(rec.center.x);
        }
        max_r_dev = max_r_dev.max((rec.center.y - r_star).abs());
        sup_moment = sup_moment.max(rec.moment);
    }

    match least_squares(&times, &axial) {
        Some((_, v_hat)) => StudyRow {
            epsilon,
            abs_log_eps,
            v_hat,
            v_err: (v_hat - reference_speed).abs(),
            max_r_dev,
            sup_moment_scaled: sup_moment * abs_log_eps * abs_log_eps,
            error: None,
        },
        None => StudyRow::failed(
            epsilon,
            &Error::Domain("too few snapshots inside the fit window for a slope".into()),
        ),
    }
}

/// Run the study described by `cfg` (which must contain exactly one template
/// ring and a `study` grid of at least 3 ε values).
///
/// `per_run` is invoked with (index, ε, trajectory) after every ε-run —
/// including aborted ones — so callers can export per-ε artifacts without the
/// study retaining all trajectories; an error from the callback aborts the
/// study. Failed runs become rows with `error` set and the study continues.
pub fn run_study(
    cfg: &ExperimentConfig,
    mut per_run: impl FnMut(usize, f64, &Trajectory) -> Result<()>,
) -> Result<StudyResult> {
    cfg.validate_for_particles()?;
    let study = cfg
        .study
        .as_ref()
        .ok_or_else(|| Error::Config("study command needs a `study` section".into()))?;
    if study.epsilons.len() < 3 {
        return Err(Error::Config(format!(
            "study needs at least 3 epsilon values, got {}",
            study.epsilons.len()
        )));
    }
    if cfg.rings.len() != 1 {
        return Err(Error::Config(format!(
            "study uses a single template ring, config has {}",
            cfg.rings.len()
        )));
    }

    let template = cfg.rings[0].clone();
    let reference_speed = template.intensity / (4.0 * PI * template.center.y);
    let mode = cfg.run_mode()?;

    let mut rows = Vec::with_capacity(study.epsilons.len());
    for (index, &epsilon) in study.epsilons.iter().enumerate() {
        let mut sub = cfg.clone();
        sub.rings[0].epsilon = epsilon;
        let row = match sub.build_system() {
            Ok(state) => {
                let traj = run(&state, &cfg.integrator, &mode, &cfg.diagnostics);
                per_run(index, epsilon, &traj)?;
                match &traj.error {
                    None => row_from_trajectory(epsilon, &traj, reference_speed, template.center.y),
                    Some(e) => StudyRow::failed(epsilon, e),
                }
            }
            Err(e) => StudyRow::failed(epsilon, &e),
        };
        rows.push(row);
    }

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for row in rows.iter().filter(|r| r.succeeded()) {
        xs.push(1.0 / row.abs_log_eps);
        ys.push(row.v_hat);
    }
    let fit = least_squares(&xs, &ys).map(|(intercept, slope)| VelocityFit { intercept, slope });

    Ok(StudyResult {
        reference_speed,
        rows,
        fit,
    })
}

/// Header of the study table CSV.
pub const STUDY_CSV_HEADER: &str = "eps,abs_log_eps,v_hat,v_err,max_r_dev,sup_I_logsq,status";

/// Render the study table as CSV text.
pub fn study_csv(result: &StudyResult) -> String {
    let mut out = String::from(STUDY_CSV_HEADER);
    out.push('\n');
    for row in &result.rows {
        let status = match &row.error {
            None => "ok".to_string(),
            Some(e) => format!("failed ({})", e.split(':').next().unwrap_or("error")),
        };
        let cols = [
            fmt_float(row.epsilon),
            fmt_float(row.abs_log_eps),
            fmt_float(row.v_hat),
            fmt_float(row.v_err),
            fmt_float(row.max_r_dev),
            fmt_float(row.sup_moment_scaled),
            status,
        ];
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}

/// Render the study summary (rows + fit + reference speed) as pretty JSON.
pub fn study_summary_json(result: &StudyResult) -> Result<String> {
    Ok(serde_json::to_string_pretty(result)?)
}
