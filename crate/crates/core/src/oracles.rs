//! Reference computations that validate the production code paths and
//! regenerate the committed fixtures. None of the closed forms or the
//! simulator call into this module.

use std::f64::consts::{PI, TAU};

use crate::analytic::{fidelity_test_prob, success_prob_given};
use crate::error::{Error, Result};
use crate::experiments::oracle::simpson_until_converged;
use crate::optics::{AmplifierConfig, ComplexAmplitude};

/// `I₀(x) = Σ_{k<terms} (x²/4)^k / (k!)²`.
pub fn bessel_i0_series(x: f64, terms: usize) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 0..terms {
        if k > 0 {
            let kf = k as f64;
            term *= q / (kf * kf);
        }
        sum += term;
    }
    sum
}

/// `e^{−x}I₀(x)` from the 40-term power series.
pub fn bessel_i0_scaled_series(x: f64) -> f64 {
    (-x).exp() * bessel_i0_series(x, 40)
}

/// Large-argument expansion
/// `e^{−x}I₀(x) ≈ (2πx)^{−1/2} Σ_{k<terms} ((2k−1)!!)² / (k!(8x)^k)`.
pub fn bessel_i0_scaled_asymptotic(x: f64, terms: usize) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 0..terms {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            term *= odd * odd / (k as f64 * 8.0 * x);
        }
        sum += term;
    }
    sum / (TAU * x).sqrt()
}

/// Asymptotic expansion summed until its terms stop shrinking (at least three
/// terms, at most thirty).
pub fn bessel_i0_scaled_asymptotic_optimal(x: f64) -> f64 {
    let mut term: f64 = 1.0;
    let mut sum = 1.0;
    for k in 1..30 {
        let odd = (2 * k - 1) as f64;
        let next = term * odd * odd / (k as f64 * 8.0 * x);
        if k > 3 && next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
    }
    sum / (TAU * x).sqrt()
}

/// Binary-ensemble `(P(S), P(T,S))` as the two-point average of the generic
/// pure-state probabilities over Alice's `±α`, with Bob's `guess`.
pub fn binary_ensemble_average(
    alpha: f64,
    guess: ComplexAmplitude,
    cfg: &AmplifierConfig,
) -> (f64, f64) {
    let mut p_s = 0.0;
    let mut p_ts = 0.0;
    for sign in [1.0, -1.0] {
        let a = ComplexAmplitude::real(sign * alpha).expect("finite amplitude");
        let s = success_prob_given(a, guess, cfg);
        p_s += 0.5 * s;
        p_ts += 0.5 * s * fidelity_test_prob(a, guess, cfg);
    }
    (p_s, p_ts)
}

/// Phase-covariant `(P(S), P(T,S))` by quadrature of the generic pure-state
/// probabilities around the input ring, with Bob's `guess`. Uses the
/// amplitude-level overlap rather than the efficiency substitution.
pub fn phase_ring_average(
    alpha: f64,
    guess: ComplexAmplitude,
    cfg: &AmplifierConfig,
) -> Result<(f64, f64)> {
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::invalid("alpha", "must be positive"));
    }
    let at = |theta: f64| ComplexAmplitude::from_polar(alpha, theta).expect("finite amplitude");
    let p_s = simpson_until_converged(|th| success_prob_given(at(th), guess, cfg), -PI, PI)?;
    let p_ts = simpson_until_converged(
        |th| {
            let a = at(th);
            success_prob_given(a, guess, cfg) * fidelity_test_prob(a, guess, cfg)
        },
        -PI,
        PI,
    )?;
    Ok((p_s / TAU, p_ts / TAU))
}
