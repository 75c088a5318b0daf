//! Direct numerical integration of the phase-covariant success probability.
//!
//! The integrand is written in terms of the beam-splitter amplitudes
//! `t₁, r₁, r₂`, independently of the Bessel closed form it validates:
//!
//! ```text
//! P(S) = (2π)⁻¹ ∫ exp[−2η₁α²t₁²(1 − cos θ)]
//!              · (1 − exp{−η₂α²r₂²[1 − 2r₁²(1 − r₁²)(1 − cos θ)]/r₁²}) dθ
//! ```

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::optics::AmplifierConfig;

pub const START_INTERVALS: usize = 4096;
pub const MAX_INTERVALS: usize = 1 << 20;
pub const RELATIVE_TOLERANCE: f64 = 1e-10;

/// Composite Simpson rule with `intervals` (even) subintervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize) -> f64 {
    assert!(
        intervals >= 2 && intervals.is_multiple_of(2),
        "need an even interval count"
    );
    let h = (b - a) / intervals as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..intervals {
        let y = f(a + i as f64 * h);
        if i % 2 == 1 {
            odd += y;
        } else {
            even += y;
        }
    }
    h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even)
}

/// Doubles the interval count from [`START_INTERVALS`] until two successive
/// estimates differ by less than [`RELATIVE_TOLERANCE`] relative.
pub fn simpson_until_converged<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64> {
    let mut n = START_INTERVALS;
    let mut prev = simpson(&f, a, b, n);
    while n < MAX_INTERVALS {
        n *= 2;
        let next = simpson(&f, a, b, n);
        if (next - prev).abs() <= RELATIVE_TOLERANCE * next.abs() {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::QuadratureNotConverged {
        max_intervals: MAX_INTERVALS,
    })
}

/// Phase-averaged success probability by quadrature. `eta1_override` replaces
/// the comparison detector efficiency; passing `η₁ + G − t₂²` yields the joint
/// probability of success and passing the fidelity test. The efficiency of
/// the subtraction detector is taken from `cfg`.
pub fn phase_quadrature_oracle(
    alpha: f64,
    cfg: &AmplifierConfig,
    eta1_override: Option<f64>,
) -> Result<f64> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::invalid(
            "alpha",
            format!("must be finite and positive, got {alpha}"),
        ));
    }
    let eta1 = eta1_override.unwrap_or(cfg.d1().eta());
    let eta2 = cfg.d2().eta();
    let a2 = alpha * alpha;
    let (t1, r1, r2) = (cfg.t1(), cfg.r1(), cfg.r2());
    let integrand = |theta: f64| {
        let one_minus_cos = 1.0 - theta.cos();
        let comparison_dark = (-2.0 * eta1 * a2 * t1 * t1 * one_minus_cos).exp();
        let subtraction_intensity =
            a2 * r2 * r2 * (1.0 - 2.0 * r1 * r1 * (1.0 - r1 * r1) * one_minus_cos) / (r1 * r1);
        comparison_dark * -(-eta2 * subtraction_intensity).exp_m1()
    };
    Ok(simpson_until_converged(integrand, -PI, PI)? / TAU)
}
