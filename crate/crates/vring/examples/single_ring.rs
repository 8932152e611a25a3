//! Simulate one thin vortex ring and compare its measured translation speed
//! with the classical prediction: a core of radius eps around r* moves along
//! the axis at roughly a/(4*pi*r*) * (log(8 r*/eps) - 1/4) / |log eps|, which
//! tends to a/(4*pi*r*) as the core shrinks.
//!
//! Run with: cargo run --example single_ring

use std::f64::consts::PI;
use vring::config::preset;
use vring::dynamics::{run, RunMode};
use vring::output::fmt_float;

fn main() -> Result<(), vring::Error> {
    let mut cfg = preset("single-ring-eps0.1")?;
    cfg.rings[0].particle_count = 400;
    cfg.integrator.t_end = 0.2;
    cfg.integrator.snapshot_every = 8;

    let ring = cfg.rings[0].clone();
    let state = cfg.build_system()?;
    println!(
        "ring at (z, r) = ({}, {}), eps = {}, {} particles, delta = {:.4e}",
        ring.center.x,
        ring.center.y,
        ring.epsilon,
        state.particle_count(),
        state.reg.delta,
    );

    let trajectory = run(&state, &cfg.integrator, &RunMode::Monolithic, &cfg.diagnostics);
    if let Some(e) = &trajectory.error {
        return Err(vring::Error::Domain(format!("run aborted: {e}")));
    }

    println!();
    println!("{:>8}  {:>23}  {:>23}  {:>12}", "t", "z_B", "r_B", "I*|log eps|^2");
    let log2 = ring.epsilon.ln().powi(2);
    for frame in &trajectory.frames {
        let rec = &frame.records[0];
        println!(
            "{:>8.4}  {:>23}  {:>23}  {:>12.6e}",
            frame.time,
            fmt_float(rec.center.x),
            fmt_float(rec.center.y),
            rec.moment * log2,
        );
    }

    let first = trajectory.frames.first().unwrap().records[0].center;
    let last_frame = trajectory.frames.last().unwrap();
    let last = last_frame.records[0].center;
    let measured = (last.x - first.x) / last_frame.time;
    let kelvin = ring.intensity / (4.0 * PI * ring.center.y)
        * ((8.0 * ring.center.y / ring.epsilon).ln() - 0.25)
        / ring.epsilon.ln().abs();
    let limit = ring.intensity / (4.0 * PI * ring.center.y);

    println!();
    println!("measured speed        {measured:.6}");
    println!("thin-core prediction  {kelvin:.6}");
    println!("eps -> 0 limit        {limit:.6}");
    Ok(())
}
