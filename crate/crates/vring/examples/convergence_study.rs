//! Shrink the core radius across a grid and extrapolate the ring's speed to
//! eps -> 0. The speed depends on eps through 1/|log eps|, so a linear fit in
//! that variable recovers the limit a/(4*pi*r*) as the intercept.
//!
//! This is a scaled-down version of `vring study --preset study-default`
//! (fewer particles, shorter horizon) so it finishes in seconds.
//!
//! Run with: cargo run --example convergence_study

use std::f64::consts::PI;
use vring::config::{preset, StudySpec};
use vring::study::{run_study, study_csv};

fn main() -> Result<(), vring::Error> {
    let mut cfg = preset("study-default")?;
    cfg.rings[0].particle_count = 500;
    cfg.integrator.dt = 0.01;
    cfg.integrator.t_end = 0.3;
    cfg.study = Some(StudySpec {
        epsilons: vec![0.1, 0.05, 0.02],
    });

    let result = run_study(&cfg, |index, eps, trajectory| {
        println!(
            "run {index}: eps = {eps}, {} snapshots{}",
            trajectory.frames.len(),
            if trajectory.completed() { "" } else { " (aborted)" },
        );
        Ok(())
    })?;

    println!();
    print!("{}", study_csv(&result));
    println!();

    let fit = result.fit.expect("all three runs succeed");
    let target = 1.0 / (4.0 * PI);
    println!("extrapolated intercept  {:.6}", fit.intercept);
    println!("slope in 1/|log eps|    {:.6}", fit.slope);
    println!("predicted limit        {target:.6}  (= 1/(4*pi) for a = 1, r* = 1)");
    println!(
        "relative intercept error {:.2}%",
        100.0 * ((fit.intercept - target) / target).abs()
    );
    Ok(())
}
