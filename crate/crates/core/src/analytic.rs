//! Exact performance metrics of the amplifier.
//!
//! Two levels are provided. [`success_prob_given`] and [`fidelity_test_prob`]
//! evaluate a single pair of pure coherent inputs by propagating amplitudes
//! through the circuit. The ensemble functions evaluate the closed forms for
//! Bob's optimal guess `β = t₁α/r₁` with Alice drawing from the binary set
//! `{±α}` or from the phase-covariant ring `|α| = const`.
//!
//! With `k = 1 − 2t₂²/G` the binary closed forms read
//!
//! ```text
//! X = 1 − exp(−η₂Gα²(1/t₂² − 1))            subtraction click, correct branch
//! Y = exp(−4η₁α²(1 − t₂²/G))                comparison silent, wrong branch
//! Z = 1 − exp(−η₂Gα²(1/t₂² − 1)k²)          subtraction click, wrong branch
//! W = exp(−4Gα²(1 − t₂²/G)²)                wrong-branch output passes the test
//! P(S) = ½(X + YZ),  P(T,S) = ½(X + YZW)
//! ```
//!
//! and the phase-covariant success probability is
//! `e^{−A}I₀(A) − e^{−A−B+C}I₀(A−C)` with
//! `A = 2η₁α²(1 − t₂²/G)`, `B = η₂α²G(1/t₂² − 1)`, `C = 2η₂α²(1 − t₂²)(1 − t₂²/G)`.
//! The joint probability of success and passing the fidelity test is the same
//! expression with `η₁ → η₁ + G − t₂²`.
//!
//! The ensemble closed forms assume dark-count-free detectors and reject
//! configurations that carry dark counts; use the Monte Carlo path for those.

use crate::bessel::i0e;
use crate::error::{Error, Result};
use crate::optics::{
    beam_splitter_transform, coherent_overlap, no_click_probability, AmplifierConfig,
    ComplexAmplitude,
};

/// Binary-ensemble figures of merit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryMetrics {
    pub p_success: f64,
    /// Probability of success and passing the fidelity test.
    pub p_joint: f64,
    pub fidelity: f64,
    pub p_plus_given_s: f64,
    pub p_minus_given_s: f64,
}

/// `x₁ = (â + â†)/√2` statistics of the conditioned binary output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureMoments {
    pub mean_x1: f64,
    pub mean_x1_sq: f64,
    pub variance: f64,
    pub snr_out: f64,
    pub noise_figure: f64,
}

/// Phase-covariant figures of merit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseCovariantMetrics {
    pub p_success: f64,
    pub p_joint: f64,
    pub fidelity: f64,
}

/// Input SNR `2|α|` of the `x₁` quadrature for a real coherent amplitude.
pub fn input_snr(alpha: f64) -> f64 {
    2.0 * alpha.abs()
}

/// Probability that the comparison detector stays dark and the subtraction
/// detector clicks for pure inputs `|α⟩` (Alice) and `|β⟩` (Bob). Dark counts
/// of both detectors are included.
pub fn success_prob_given(
    alpha: ComplexAmplitude,
    beta: ComplexAmplitude,
    cfg: &AmplifierConfig,
) -> f64 {
    let (kept, comparison) = beam_splitter_transform(alpha, beta, cfg.bs1());
    let (_, subtraction) = beam_splitter_transform(ComplexAmplitude::VACUUM, kept, cfg.bs2());
    no_click_probability(comparison, cfg.d1()) * (1.0 - no_click_probability(subtraction, cfg.d2()))
}

/// Output amplitude `t₂(t₁β + r₁α)` of the device for pure inputs.
pub fn output_amplitude(
    alpha: ComplexAmplitude,
    beta: ComplexAmplitude,
    cfg: &AmplifierConfig,
) -> ComplexAmplitude {
    let (kept, _) = beam_splitter_transform(alpha, beta, cfg.bs1());
    let (out, _) = beam_splitter_transform(ComplexAmplitude::VACUUM, kept, cfg.bs2());
    out
}

/// Overlap of the device output with `|gα_in⟩`, the amplified version of
/// Alice's actual input (not of Bob's guess).
pub fn fidelity_test_prob(
    alpha_in: ComplexAmplitude,
    beta: ComplexAmplitude,
    cfg: &AmplifierConfig,
) -> f64 {
    let target = alpha_in.scale(cfg.amplitude_gain());
    coherent_overlap(output_amplitude(alpha_in, beta, cfg), target)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::invalid(
            "alpha",
            format!("must be finite and positive, got {alpha}"),
        ));
    }
    Ok(())
}

fn check_dark_free(cfg: &AmplifierConfig) -> Result<()> {
    if cfg.has_dark_counts() {
        return Err(Error::invalid(
            "dark_prob",
            "closed forms assume dark-count-free detectors; use the Monte Carlo path",
        ));
    }
    Ok(())
}

struct BinaryTerms {
    x: f64,
    y: f64,
    z: f64,
    w: f64,
}

fn binary_terms(alpha: f64, cfg: &AmplifierConfig) -> BinaryTerms {
    let gain = cfg.intensity_gain();
    let t2_sq = cfg.t2_sq();
    let (eta1, eta2) = (cfg.d1().eta(), cfg.d2().eta());
    let a2 = alpha * alpha;
    let k = 1.0 - 2.0 * t2_sq / gain;
    let t1_sq = 1.0 - t2_sq / gain;
    let subtraction = eta2 * gain * a2 * (1.0 / t2_sq - 1.0);
    BinaryTerms {
        x: -(-subtraction).exp_m1(),
        y: (-4.0 * eta1 * a2 * t1_sq).exp(),
        z: -(-subtraction * k * k).exp_m1(),
        w: (-4.0 * gain * a2 * t1_sq * t1_sq).exp(),
    }
}

/// Closed-form success probability, fidelity and input posteriors for the
/// binary alphabet `{|α⟩, |−α⟩}` with Bob's guess fixed at `+t₁α/r₁`.
pub fn binary_metrics(alpha: f64, cfg: &AmplifierConfig) -> Result<BinaryMetrics> {
    check_alpha(alpha)?;
    check_dark_free(cfg)?;
    let BinaryTerms { x, y, z, w } = binary_terms(alpha, cfg);
    let wrong = y * z;
    let total = x + wrong;
    if total <= 0.0 {
        return Err(Error::NeverSucceeds);
    }
    let p_success = 0.5 * total;
    let p_joint = 0.5 * (x + wrong * w);
    Ok(BinaryMetrics {
        p_success,
        p_joint,
        fidelity: ((x + wrong * w) / total).min(1.0),
        p_plus_given_s: x / total,
        p_minus_given_s: wrong / total,
    })
}

/// Conditional `x₁` moments and noise figure for the binary alphabet.
///
/// The variance is evaluated as `½ + 2Gα²P(+α|S)P(−α|S)(1 − k)²`, which is
/// algebraically `⟨x₁²⟩ − ⟨x₁⟩²` without the cancellation.
pub fn binary_quadrature_moments(alpha: f64, cfg: &AmplifierConfig) -> Result<QuadratureMoments> {
    let m = binary_metrics(alpha, cfg)?;
    let gain = cfg.intensity_gain();
    let g = cfg.amplitude_gain();
    let k = 1.0 - 2.0 * cfg.t2_sq() / gain;
    let (pp, pm) = (m.p_plus_given_s, m.p_minus_given_s);
    let mean_x1 = std::f64::consts::SQRT_2 * g * alpha * (pp + k * pm);
    let mean_x1_sq = 0.5 * (1.0 + 4.0 * gain * alpha * alpha * (pp + k * k * pm));
    let variance = 0.5 + 2.0 * gain * alpha * alpha * pp * pm * (1.0 - k) * (1.0 - k);
    let snr_out = mean_x1 / variance.sqrt();
    Ok(QuadratureMoments {
        mean_x1,
        mean_x1_sq,
        variance,
        snr_out,
        noise_figure: snr_out / input_snr(alpha),
    })
}

/// `e^{−A}I₀(A) − e^{−A−B+C}I₀(A−C)` evaluated with bounded exponents.
///
/// The second term is `e^{−B}·[e^{−(A−C)}I₀(A−C)]`. For `A < C` the exponent
/// left outside the scaled Bessel value is `−B + 2(C − A)`, which is still
/// non-positive because `B − 2C` is the subtraction-arm intensity at `θ = π`.
fn phase_closed_form(alpha_sq: f64, eta1: f64, eta2: f64, gain: f64, t2_sq: f64) -> f64 {
    let t1_sq = 1.0 - t2_sq / gain;
    let a = 2.0 * eta1 * alpha_sq * t1_sq;
    let b = eta2 * alpha_sq * gain * (1.0 / t2_sq - 1.0);
    let c = 2.0 * eta2 * alpha_sq * (1.0 - t2_sq) * t1_sq;
    let d = a - c;
    let second = (-b - d + d.abs()).exp() * i0e(d);
    (i0e(a) - second).clamp(0.0, 1.0)
}

/// Closed-form success probability for the phase-covariant ensemble.
pub fn phase_covariant_success_prob(alpha: f64, cfg: &AmplifierConfig) -> Result<f64> {
    check_alpha(alpha)?;
    check_dark_free(cfg)?;
    Ok(phase_closed_form(
        alpha * alpha,
        cfg.d1().eta(),
        cfg.d2().eta(),
        cfg.intensity_gain(),
        cfg.t2_sq(),
    ))
}

/// Joint probability of success and passing the fidelity test: the success
/// probability with `η₁ → η₁ + G − t₂²`.
pub fn phase_covariant_joint_prob(alpha: f64, cfg: &AmplifierConfig) -> Result<f64> {
    check_alpha(alpha)?;
    check_dark_free(cfg)?;
    let gain = cfg.intensity_gain();
    Ok(phase_closed_form(
        alpha * alpha,
        cfg.d1().eta() + gain - cfg.t2_sq(),
        cfg.d2().eta(),
        gain,
        cfg.t2_sq(),
    ))
}

pub fn phase_covariant_metrics(alpha: f64, cfg: &AmplifierConfig) -> Result<PhaseCovariantMetrics> {
    let p_success = phase_covariant_success_prob(alpha, cfg)?;
    if p_success <= 0.0 {
        return Err(Error::NeverSucceeds);
    }
    let p_joint = phase_covariant_joint_prob(alpha, cfg)?.min(p_success);
    Ok(PhaseCovariantMetrics {
        p_success,
        p_joint,
        fidelity: p_joint / p_success,
    })
}

/// Fidelity of the phase-covariant amplifier.
pub fn phase_covariant_fidelity(alpha: f64, cfg: &AmplifierConfig) -> Result<f64> {
    phase_covariant_metrics(alpha, cfg).map(|m| m.fidelity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::DetectorModel;

    fn cfg(gain: f64, t2_sq: f64, eta1: f64, eta2: f64) -> AmplifierConfig {
        AmplifierConfig::new(gain, t2_sq).unwrap().with_detectors(
            DetectorModel::with_efficiency(eta1).unwrap(),
            DetectorModel::with_efficiency(eta2).unwrap(),
        )
    }

    fn amp(re: f64) -> ComplexAmplitude {
        ComplexAmplitude::real(re).unwrap()
    }

    #[test]
    fn correct_guess_success_probability() {
        // 1 − exp(−η₂Gα²(1/t₂² − 1)) with G = 2, t₂² = 0.9, α = 1.
        let c = cfg(2.0, 0.9, 1.0, 1.0);
        let p = success_prob_given(amp(1.0), c.optimal_guess(amp(1.0)), &c);
        let expected = -(-0.1f64 / 0.45).exp_m1();
        assert!((p - expected).abs() < 1e-14, "{p} vs {expected}");
        assert!((p - 0.19926).abs() < 5e-6);
    }

    #[test]
    fn dark_subtraction_arm_never_succeeds() {
        let c = cfg(3.0, 0.9, 1.0, 1.0);
        // t₁β + r₁α = 0
        let beta = amp(-c.r1() / c.t1());
        assert!(success_prob_given(amp(1.0), beta, &c).abs() < 1e-15);
    }

    #[test]
    fn blind_heralding_detector() {
        let c = cfg(3.0, 0.9, 1.0, 0.0);
        assert_eq!(success_prob_given(amp(0.8), amp(1.7), &c), 0.0);
        assert!(matches!(binary_metrics(0.8, &c), Err(Error::NeverSucceeds)));
        assert!(matches!(
            binary_quadrature_moments(0.8, &c),
            Err(Error::NeverSucceeds)
        ));
        assert_eq!(phase_covariant_success_prob(0.8, &c).unwrap(), 0.0);
        assert!(matches!(
            phase_covariant_fidelity(0.8, &c),
            Err(Error::NeverSucceeds)
        ));
    }

    #[test]
    fn dark_counts_enter_generic_path() {
        let d1 = DetectorModel::new(1.0, 0.1).unwrap();
        let d2 = DetectorModel::new(1.0, 0.2).unwrap();
        let c = AmplifierConfig::new(2.0, 0.9)
            .unwrap()
            .with_detectors(d1, d2);
        let ideal = AmplifierConfig::new(2.0, 0.9).unwrap();
        let (a, b) = (amp(0.5), amp(0.9));
        let expected = 0.9
            * (-(a.re() * ideal.t1() - b.re() * ideal.r1()).powi(2)).exp()
            * (1.0
                - 0.8
                    * (-ideal.r2().powi(2) * (ideal.t1() * b.re() + ideal.r1() * a.re()).powi(2))
                        .exp());
        assert!((success_prob_given(a, b, &c) - expected).abs() < 1e-15);
        assert!(binary_metrics(0.5, &c).is_err());
        assert!(phase_covariant_success_prob(0.5, &c).is_err());
    }

    #[test]
    fn correct_guess_passes_fidelity_test() {
        let c = cfg(5.0, 0.9, 1.0, 1.0);
        let a = ComplexAmplitude::new(0.4, -0.3).unwrap();
        assert!((fidelity_test_prob(a, c.optimal_guess(a), &c) - 1.0).abs() < 1e-14);
        assert_eq!(
            fidelity_test_prob(ComplexAmplitude::VACUUM, ComplexAmplitude::VACUUM, &c),
            1.0
        );
    }

    #[test]
    fn wrong_branch_fidelity_matches_closed_form_factor() {
        for &(gain, a2) in &[(1.5, 0.3), (4.0, 0.5), (9.0, 1.0)] {
            let c = cfg(gain, 0.9, 1.0, 1.0);
            let alpha = f64::sqrt(a2);
            let generic = fidelity_test_prob(amp(-alpha), c.optimal_guess(amp(alpha)), &c);
            let t1_sq = 1.0 - 0.9 / gain;
            let closed = (-4.0 * gain * a2 * t1_sq * t1_sq).exp();
            assert!(
                (generic - closed).abs() <= 1e-13 * closed.max(1e-300),
                "{gain} {a2}"
            );
            assert!((binary_terms(alpha, &c).w - closed).abs() <= 1e-15);
        }
    }

    #[test]
    fn perfect_amplification_point() {
        for &a2 in &[0.1f64, 0.5, 1.0, 3.0] {
            for &eta in &[0.5, 1.0] {
                let c = cfg(1.8, 0.9, eta, eta);
                let m = binary_metrics(a2.sqrt(), &c).unwrap();
                assert!((m.fidelity - 1.0).abs() < 1e-12);
                assert_eq!(m.p_minus_given_s, 0.0);
            }
        }
    }

    #[test]
    fn high_gain_fidelity_limit() {
        let m = binary_metrics(1.0, &cfg(400.0, 0.9, 1.0, 1.0)).unwrap();
        assert!((m.fidelity - 1.0 / (1.0 + (-4f64).exp())).abs() < 1e-3);
        let m = binary_metrics(1.0, &cfg(400.0, 0.9, 0.5, 1.0)).unwrap();
        assert!((m.fidelity - 1.0 / (1.0 + (-2f64).exp())).abs() < 1e-2);
    }

    #[test]
    fn noise_figure_at_perfect_point() {
        for &a2 in &[0.1, 0.5, 1.0] {
            let q = binary_quadrature_moments(f64::sqrt(a2), &cfg(1.8, 0.9, 1.0, 1.0)).unwrap();
            assert!((q.noise_figure - 1.8f64.sqrt()).abs() < 1e-9);
            assert!((q.variance - 0.5).abs() < 1e-12);
        }
        assert_eq!(input_snr(0.5), 1.0);
    }

    #[test]
    fn variance_identity() {
        for &gain in &[0.95, 1.2, 1.8, 3.0, 7.0, 40.0] {
            for &a2 in &[0.05, 0.5, 2.0] {
                let q =
                    binary_quadrature_moments(f64::sqrt(a2), &cfg(gain, 0.9, 1.0, 0.7)).unwrap();
                let direct = q.mean_x1_sq - q.mean_x1 * q.mean_x1;
                assert!((q.variance - direct).abs() < 1e-12 * q.mean_x1_sq.max(1.0));
                assert!(q.variance >= 0.5);
            }
        }
    }

    #[test]
    fn phase_fidelity_is_one_at_degenerate_gain() {
        let c = cfg(0.95, 0.95, 1.0, 1.0);
        let m = phase_covariant_metrics(0.7, &c).unwrap();
        assert!((m.fidelity - 1.0).abs() < 1e-14);
    }

    #[test]
    fn phase_fidelity_ordering_in_alpha() {
        let c = cfg(4.0, 0.95, 1.0, 1.0);
        let f: Vec<f64> = [0.1f64, 0.5, 1.0]
            .iter()
            .map(|a2| phase_covariant_fidelity(a2.sqrt(), &c).unwrap())
            .collect();
        assert!(f[0] > f[1] && f[1] > f[2], "{f:?}");
    }

    #[test]
    fn phase_success_dips_just_above_degenerate_gain() {
        // The ring contributes comparison clicks as soon as t₁ > 0, so P(S)
        // first falls before the growing subtraction probability takes over.
        let p = |gain: f64| phase_covariant_success_prob(1.0, &cfg(gain, 0.95, 1.0, 1.0)).unwrap();
        assert!(p(1.0) < p(0.96));
        assert!(p(1.4) < p(1.0));
        assert!(p(1.6) > p(1.45));
    }

    #[test]
    fn closed_forms_stay_finite_at_extremes() {
        for &gain in &[1.0, 10.0, 1e2, 1e3, 1e4] {
            for &a2 in &[1e-4, 1.0, 10.0, 1e2] {
                for &eta in &[0.5, 1.0] {
                    let c = cfg(gain, 0.9, eta, eta);
                    let alpha = f64::sqrt(a2);
                    let b = binary_metrics(alpha, &c).unwrap();
                    let q = binary_quadrature_moments(alpha, &c).unwrap();
                    let p = phase_covariant_metrics(alpha, &c).unwrap();
                    for v in [
                        b.p_success,
                        b.fidelity,
                        q.noise_figure,
                        p.p_success,
                        p.fidelity,
                    ] {
                        assert!(v.is_finite(), "G={gain} a2={a2}");
                    }
                    assert!((0.0..=1.0).contains(&p.fidelity));
                }
            }
        }
    }

    #[test]
    fn rejects_bad_alpha() {
        let c = cfg(2.0, 0.9, 1.0, 1.0);
        assert!(binary_metrics(0.0, &c).is_err());
        assert!(phase_covariant_success_prob(-1.0, &c).is_err());
        assert!(binary_quadrature_moments(f64::NAN, &c).is_err());
    }
}
