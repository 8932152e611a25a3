//! Adaptive one-dimensional quadrature.
//!
//! A nested Gauss(7)/Kronrod(15) pair supplies both an integral estimate and
//! an error estimate per segment; segments with the largest error are bisected
//! until the global estimate meets the requested tolerance or the subdivision
//! budget runs out. The kernel θ-integrals this crate evaluates are smooth but
//! develop a sharp peak at θ = 0 as the two points approach, which is exactly
//! the regime adaptive bisection handles well.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Tolerances and budget for adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Absolute tolerance on the integral.
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    /// Relative tolerance on the integral.
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    /// Maximum number of segment bisections before giving up.
    #[serde(default = "default_max_subdivisions")]
    pub max_subdivisions: usize,
}

fn default_abs_tol() -> f64 {
    1e-10
}
fn default_rel_tol() -> f64 {
    1e-8
}
fn default_max_subdivisions() -> usize {
    200
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: default_abs_tol(),
            rel_tol: default_rel_tol(),
            max_subdivisions: default_max_subdivisions(),
        }
    }
}

// 15-point Kronrod abscissae on [-1, 1]; odd indices are the embedded 7-point
// Gauss nodes. Public-domain QUADPACK constants.
const XGK: [f64; 8] = [
    0.991_455_371_120_813,
    0.949_107_912_342_759,
    0.864_864_423_359_769,
    0.741_531_185_599_394,
    0.586_087_235_467_691,
    0.405_845_151_377_397,
    0.207_784_955_007_898,
    0.000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529,
    0.063_092_092_629_979,
    0.104_790_010_322_250,
    0.140_653_259_715_525,
    0.169_004_726_639_267,
    0.190_350_578_064_785,
    0.204_432_940_075_298,
    0.209_482_141_084_728,
];

const WG: [f64; 4] = [
    0.129_484_966_168_870,
    0.279_705_391_489_277,
    0.381_830_050_505_119,
    0.417_959_183_673_469,
];

/// QUADPACK-style conservative error rescaling.
fn rescale_error(err: f64, result_abs: f64, result_asc: f64) -> f64 {
    let mut err = err.abs();
    if result_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / result_asc).powf(1.5);
        err = if scale < 1.0 { result_asc * scale } else { result_asc };
    }
    let min_err = 50.0 * f64::EPSILON * result_abs;
    if min_err > err {
        err = min_err;
    }
    err
}

/// One Gauss–Kronrod 7/15 panel; returns (integral, error estimate).
fn qk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut resg = WG[3] * fc;
    let mut resk = WGK[7] * fc;
    let mut resabs = resk.abs();
    let mut fv1 = [0.0f64; 7];
    let mut fv2 = [0.0f64; 7];

    for j in 0..3 {
        let jtw = 2 * j + 1;
        let absc = half * XGK[jtw];
        let v1 = f(center - absc);
        let v2 = f(center + absc);
        fv1[jtw] = v1;
        fv2[jtw] = v2;
        resg += WG[j] * (v1 + v2);
        resk += WGK[jtw] * (v1 + v2);
        resabs += WGK[jtw] * (v1.abs() + v2.abs());
    }
    for j in 0..4 {
        let jtwm1 = 2 * j;
        if jtwm1 == 7 {
            continue;
        }
        let absc = half * XGK[jtwm1];
        let v1 = f(center - absc);
        let v2 = f(center + absc);
        fv1[jtwm1] = v1;
        fv2[jtwm1] = v2;
        resk += WGK[jtwm1] * (v1 + v2);
        resabs += WGK[jtwm1] * (v1.abs() + v2.abs());
    }

    let reskh = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - reskh).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }

    let result = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let err = rescale_error((resk - resg) * half, resabs, resasc);
    (result, err)
}

/// Integrate `f` over `[a, b]` to the requested tolerance.
///
/// Errors with [`Error::QuadratureConvergence`] when the subdivision budget is
/// exhausted before the combined error estimate meets
/// `max(abs_tol, rel_tol * |integral|)`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }

    struct Segment {
        a: f64,
        b: f64,
        value: f64,
        err: f64,
    }

    let (value, err) = qk15(&f, a, b);
    let mut segments = vec![Segment { a, b, value, err }];
    let mut subdivisions = 0usize;

    loop {
        let total: f64 = segments.iter().map(|s| s.value).sum();
        let total_err: f64 = segments.iter().map(|s| s.err).sum();
        let tol = spec.abs_tol.max(spec.rel_tol * total.abs());
        if total_err <= tol {
            return Ok(total);
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::QuadratureConvergence {
                achieved: total_err,
                requested: tol,
                subdivisions,
            });
        }

        let worst = segments
            .iter()
            .enumerate()
            .max_by(|(_, s), (_, t)| s.err.total_cmp(&t.err))
            .map(|(i, _)| i)
            .expect("segment list is never empty");
        let Segment { a, b, .. } = segments.swap_remove(worst);
        let mid = 0.5 * (a + b);
        let (v1, e1) = qk15(&f, a, mid);
        let (v2, e2) = qk15(&f, mid, b);
        segments.push(Segment {
            a,
            b: mid,
            value: v1,
            err: e1,
        });
        segments.push(Segment {
            a: mid,
            b,
            value: v2,
            err: e2,
        });
        subdivisions += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn defaults_match_documented_tolerances() {
        let spec = QuadratureSpec::default();
        assert_eq!(spec.abs_tol, 1e-10);
        assert_eq!(spec.rel_tol, 1e-8);
        assert_eq!(spec.max_subdivisions, 200);
    }

    #[test]
    fn integrates_smooth_functions() {
        let spec = QuadratureSpec::default();
        let sin_int = integrate(|x| x.sin(), 0.0, PI, &spec).unwrap();
        assert!((sin_int - 2.0).abs() < 1e-12, "got {sin_int}");

        let poly = integrate(|x| x * x, 0.0, 1.0, &spec).unwrap();
        assert!((poly - 1.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn resolves_a_sharp_peak() {
        // 1/sqrt(x + c) with c = 1e-6 mimics the kernel integrand near
        // coincident points: integrable but steeply peaked at the endpoint.
        let c = 1e-6;
        let spec = QuadratureSpec::default();
        let got = integrate(|x| 1.0 / (x + c).sqrt(), 0.0, 1.0, &spec).unwrap();
        let exact = 2.0 * ((1.0 + c).sqrt() - c.sqrt());
        assert!((got - exact).abs() < 1e-9, "got {got}, want {exact}");
    }

    #[test]
    fn empty_interval_is_zero() {
        let spec = QuadratureSpec::default();
        assert_eq!(integrate(|x| x.exp(), 1.5, 1.5, &spec).unwrap(), 0.0);
    }

    #[test]
    fn reports_convergence_failure_when_budget_exhausted() {
        let spec = QuadratureSpec {
            abs_tol: 1e-14,
            rel_tol: 1e-14,
            max_subdivisions: 2,
        };
        let err = integrate(|x| 1.0 / (x + 1e-9).sqrt(), 0.0, 1.0, &spec).unwrap_err();
        match err {
            Error::QuadratureConvergence {
                achieved,
                subdivisions,
                ..
            } => {
                assert!(achieved > 0.0);
                assert_eq!(subdivisions, 2);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }
}
