//! Split the axisymmetric velocity kernel into its three parts and watch how
//! each behaves as the two points approach: the planar part K blows up like
//! 1/s, the axial log part L like log(1/s), while the remainder R stays
//! bounded. The identity H = K + L + R holds at every separation.
//!
//! Run with: cargo run --example kernel_decomposition

use vring::kernels::{kernel_h, kernel_k, kernel_l, kernel_remainder, Regularization};
use vring::quadrature::QuadratureSpec;
use vring::vec2::Vec2;

fn main() -> Result<(), vring::Error> {
    let quad = QuadratureSpec::default();
    let reg = Regularization::EXACT;
    let x = Vec2::new(0.0, 1.0);
    let direction = Vec2::new(0.6, 0.8);

    println!("target x = ({}, {}), source y = x - s * ({}, {})", x.x, x.y, direction.x, direction.y);
    println!();
    println!("{:>10}  {:>13}  {:>13}  {:>13}  {:>13}", "s", "|K|", "|L|", "|R|", "identity err");

    for k in 0..7 {
        let s = 1.0 * 0.1f64.powf(k as f64 / 2.0);
        let y = x - direction * s;
        let h = kernel_h(x, y, &quad, reg)?;
        let kk = kernel_k(x - y, reg);
        let l = kernel_l(x, y, reg)?;
        let r = kernel_remainder(x, y, &quad, reg)?;
        let err = (h - (kk + l + r)).norm();
        println!(
            "{:>10.4e}  {:>13.6e}  {:>13.6e}  {:>13.6e}  {:>13.2e}",
            s,
            kk.norm(),
            l.norm(),
            r.norm(),
            err
        );
    }

    println!();
    println!("K grows like 1/(2*pi*s) and L like log(1/s)/(4*pi); R is the part");
    println!("small enough to survive the thin-ring limit as a finite correction.");
    Ok(())
}
