//! The two limiting ODE models of concentrated rings.
//!
//! Point-vortex model: ring centers interact like planar point vortices,
//! dz_i/dt = sum_{j != i} A_j K(z_i - z_j). Two equal vortices co-rotate:
//! with A = 2*pi and distance 1 the period is exactly pi.
//!
//! Large-ring model: each ring additionally self-propels at unit rate times
//! its intensity, dz_i/dt += A_i * (1, 0); a single ring translates exactly.
//!
//! Run with: cargo run --example point_vortex_limits

use std::f64::consts::PI;
use vring::dynamics::{IntegratorSpec, Scheme};
use vring::limits::{ode_integrate, LimitModel, LimitState};
use vring::vec2::Vec2;

fn main() -> Result<(), vring::Error> {
    let spec = IntegratorSpec {
        scheme: Scheme::Rk4,
        dt: 1e-3,
        t_end: PI,
        snapshot_every: 500,
    };

    // --- co-rotating pair -------------------------------------------------
    let pair = LimitState::new(
        vec![Vec2::new(-0.5, 0.0), Vec2::new(0.5, 0.0)],
        vec![2.0 * PI, 2.0 * PI],
    )?;
    let trajectory = ode_integrate(&pair, &spec, LimitModel::PointVortex);
    assert!(trajectory.completed());

    println!("two equal point vortices, A = 2*pi, distance 1:");
    println!("{:>8}  {:>24}  {:>10}", "t", "z_1", "|z_1| (radius)");
    for frame in &trajectory.frames {
        let z = frame.positions[0];
        println!("{:>8.4}  ({:>10.6}, {:>10.6})  {:>10.8}", frame.time, z.x, z.y, z.norm());
    }
    let last = trajectory.frames.last().unwrap();
    let return_error = (last.positions[0] - pair.positions[0]).norm();
    println!("after t = pi each vortex is back where it started: error {return_error:.3e}");

    // --- momentum is conserved -------------------------------------------
    let weighted = |s: &LimitState| {
        s.positions
            .iter()
            .zip(&s.intensities)
            .fold(Vec2::ZERO, |acc, (z, a)| acc + *z * *a)
    };
    let drift = (weighted(last) - weighted(&pair)).norm();
    println!("center of vorticity drift: {drift:.3e}");

    // --- large-ring model --------------------------------------------------
    let single = LimitState::new(vec![Vec2::new(0.0, 0.0)], vec![0.7])?;
    let spec = IntegratorSpec {
        scheme: Scheme::Rk4,
        dt: 0.05,
        t_end: 2.0,
        snapshot_every: 8,
    };
    let trajectory = ode_integrate(&single, &spec, LimitModel::LargeRing);
    assert!(trajectory.completed());
    println!();
    println!("single vortex in the large-ring model (A = 0.7) translates as z = A*t:");
    for frame in &trajectory.frames {
        let z = frame.positions[0];
        println!(
            "  t = {:>5.2}   z = ({:>7.4}, {:>7.4})   error {:.3e}",
            frame.time,
            z.x,
            z.y,
            (z - Vec2::new(0.7 * frame.time, 0.0)).norm(),
        );
    }
    Ok(())
}
