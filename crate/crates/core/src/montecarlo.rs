//! Shot-by-shot simulation of the amplifier.
//!
//! Each trial draws Alice's amplitude from the ensemble, propagates it with
//! Bob's guess through both beam splitters, samples the two detectors and keeps
//! the trial when the comparison detector is silent and the subtraction
//! detector clicks. Accepted trials contribute the exact overlap of their
//! output with `|gα_in⟩` (rather than a sampled pass/fail of the test) and, for
//! the binary ensemble, the exact `x₁` moments of their output coherent state:
//! mean `√2·Re(out)` and second moment `½ + 2·Re(out)²`.
//!
//! Randomness is counter based: trial `i` under seed `s` uses the ChaCha8
//! stream `i` of the generator keyed by `s`, so a trial's outcome depends only
//! on `(s, i)` and the parameters. Tallies are kept as fixed-point integer
//! sums, which makes merging exact, associative and commutative; any partition
//! of the trial range over any number of workers yields the same summary bit
//! for bit.
//!
//! Standard errors:
//! * success probability: binomial, `√(p(1 − p)/n)`;
//! * conditional means over accepted trials (fidelity, `x₁` moments): the
//!   delta-method error of the ratio estimator `Σ aᵢwᵢ / Σ aᵢ`, which reduces to
//!   `√(Σ_acc (wᵢ − w̄)²) / n_acc`;
//! * noise figure `m₁ / (2α√(m₂ − m₁²))`: first-order delta method using the
//!   sample covariance of the per-trial `(x₁, x₁²)` moments.

use std::f64::consts::SQRT_2;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::optics::{
    beam_splitter_transform, coherent_overlap, no_click_probability, AmplifierConfig,
    ComplexAmplitude, DetectorModel, EnsembleKind, InputEnsemble,
};

const BLOCK: u64 = 1 << 12;

/// How detector clicks are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DetectionSampling {
    /// One Bernoulli draw with the exact no-click probability.
    #[default]
    Exact,
    /// Poissonian photon number, binomial efficiency thinning and an
    /// independent dark-count draw. Slower; kept to cross-check the exact path.
    PhotonCounting,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub accepted: bool,
    pub input_amp: ComplexAmplitude,
    pub output_amp: ComplexAmplitude,
    /// `|⟨out|gα_in⟩|²`; present only for accepted trials.
    pub fidelity_weight: Option<f64>,
    /// Sampled outcome of the fidelity test; present only for accepted trials.
    pub passed_test: Option<bool>,
}

fn clicks<R: Rng + ?Sized>(
    rng: &mut R,
    amp: ComplexAmplitude,
    det: DetectorModel,
    sampling: DetectionSampling,
) -> bool {
    match sampling {
        DetectionSampling::Exact => rng.random::<f64>() >= no_click_probability(amp, det),
        DetectionSampling::PhotonCounting => {
            let mean = amp.norm_sqr();
            let photons = if mean > 0.0 {
                Poisson::new(mean)
                    .expect("finite positive mean")
                    .sample(rng) as u64
            } else {
                0
            };
            let detected = if photons > 0 && det.eta() > 0.0 {
                Binomial::new(photons, det.eta())
                    .expect("efficiency in [0, 1]")
                    .sample(rng)
            } else {
                0
            };
            let dark = rng.random::<f64>() < det.dark_prob();
            detected > 0 || dark
        }
    }
}

/// Runs one trial with exact click probabilities.
pub fn run_trial<R: Rng + ?Sized>(
    rng: &mut R,
    ensemble: &InputEnsemble,
    guess: ComplexAmplitude,
    cfg: &AmplifierConfig,
) -> TrialOutcome {
    run_trial_with(rng, ensemble, guess, cfg, DetectionSampling::Exact)
}

pub fn run_trial_with<R: Rng + ?Sized>(
    rng: &mut R,
    ensemble: &InputEnsemble,
    guess: ComplexAmplitude,
    cfg: &AmplifierConfig,
    sampling: DetectionSampling,
) -> TrialOutcome {
    let input = ensemble.amplitude_at(rng.random::<f64>());
    let (kept, comparison) = beam_splitter_transform(input, guess, cfg.bs1());
    let (output, subtraction) = beam_splitter_transform(ComplexAmplitude::VACUUM, kept, cfg.bs2());
    let d1_click = clicks(rng, comparison, cfg.d1(), sampling);
    let d2_click = clicks(rng, subtraction, cfg.d2(), sampling);
    let u_test = rng.random::<f64>();
    let accepted = !d1_click && d2_click;
    let (fidelity_weight, passed_test) = if accepted {
        let w = coherent_overlap(output, input.scale(cfg.amplitude_gain()));
        (Some(w), Some(u_test < w))
    } else {
        (None, None)
    };
    TrialOutcome {
        accepted,
        input_amp: input,
        output_amp: output,
        fidelity_weight,
        passed_test,
    }
}

/// Mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
}

impl Estimate {
    /// `(mean − reference)/std_err`; zero when both the error and the
    /// difference vanish, infinite when only the error does.
    pub fn z_score(&self, reference: f64) -> f64 {
        let diff = self.mean - reference;
        if self.std_err > 0.0 {
            diff / self.std_err
        } else if diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateSummary {
    pub n_trials: u64,
    pub n_accepted: u64,
    pub p_success: Estimate,
    /// Conditional mean of the exact overlap over accepted trials.
    pub fidelity: Option<Estimate>,
    /// Fraction of accepted trials whose sampled fidelity test passed.
    pub fidelity_sampled: Option<Estimate>,
    pub mean_x1: Option<Estimate>,
    pub mean_x1_sq: Option<Estimate>,
    pub noise_figure: Option<Estimate>,
    pub seed: u64,
}

/// Fixed-point accumulator with `2⁻⁴⁰` resolution. Integer addition keeps
/// merges exact in any order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct FixedSum(i128);

impl FixedSum {
    const SCALE: f64 = (1u64 << 40) as f64;

    fn add(&mut self, v: f64) {
        self.0 += (v * Self::SCALE).round() as i128;
    }

    fn value(self) -> f64 {
        self.0 as f64 / Self::SCALE
    }
}

impl std::ops::AddAssign for FixedSum {
    fn add_assign(&mut self, rhs: Self) {
        self.0 += rhs.0;
    }
}

/// Sufficient statistics of a set of trials.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    n_trials: u64,
    n_accepted: u64,
    n_passed: u64,
    w: FixedSum,
    w_sq: FixedSum,
    x1: FixedSum,
    x1_sq: FixedSum,
    q: FixedSum,
    q_sq: FixedSum,
    x1_q: FixedSum,
}

impl Tally {
    pub fn record(&mut self, outcome: &TrialOutcome) {
        self.n_trials += 1;
        if !outcome.accepted {
            return;
        }
        self.n_accepted += 1;
        if outcome.passed_test == Some(true) {
            self.n_passed += 1;
        }
        let w = outcome.fidelity_weight.unwrap_or(0.0);
        self.w.add(w);
        self.w_sq.add(w * w);
        let re = outcome.output_amp.re();
        let x1 = SQRT_2 * re;
        let q = 0.5 + 2.0 * re * re;
        self.x1.add(x1);
        self.x1_sq.add(x1 * x1);
        self.q.add(q);
        self.q_sq.add(q * q);
        self.x1_q.add(x1 * q);
    }

    pub fn merge(mut self, other: Tally) -> Tally {
        self.n_trials += other.n_trials;
        self.n_accepted += other.n_accepted;
        self.n_passed += other.n_passed;
        self.w += other.w;
        self.w_sq += other.w_sq;
        self.x1 += other.x1;
        self.x1_sq += other.x1_sq;
        self.q += other.q;
        self.q_sq += other.q_sq;
        self.x1_q += other.x1_q;
        self
    }

    pub fn n_trials(&self) -> u64 {
        self.n_trials
    }

    pub fn n_accepted(&self) -> u64 {
        self.n_accepted
    }

    /// Turns the sums into estimates. `x₁` moments and the noise figure are
    /// reported for the binary ensemble only.
    pub fn summarize(&self, ensemble: &InputEnsemble, seed: u64) -> EstimateSummary {
        let n = self.n_trials as f64;
        let p = if self.n_trials > 0 {
            self.n_accepted as f64 / n
        } else {
            0.0
        };
        let p_success = Estimate {
            mean: p,
            std_err: if self.n_trials > 0 {
                (p * (1.0 - p) / n).sqrt()
            } else {
                0.0
            },
        };
        let mut summary = EstimateSummary {
            n_trials: self.n_trials,
            n_accepted: self.n_accepted,
            p_success,
            fidelity: None,
            fidelity_sampled: None,
            mean_x1: None,
            mean_x1_sq: None,
            noise_figure: None,
            seed,
        };
        if self.n_accepted == 0 {
            return summary;
        }
        let na = self.n_accepted as f64;
        let mean_and_var = |sum: FixedSum, sum_sq: FixedSum| {
            let m = sum.value() / na;
            let var = (sum_sq.value() / na - m * m).max(0.0);
            (m, var)
        };
        let conditional = |(m, var): (f64, f64)| Estimate {
            mean: m,
            std_err: (var / na).sqrt(),
        };

        summary.fidelity = Some(conditional(mean_and_var(self.w, self.w_sq)));
        let pass = self.n_passed as f64 / na;
        summary.fidelity_sampled = Some(Estimate {
            mean: pass,
            std_err: (pass * (1.0 - pass) / na).sqrt(),
        });

        if ensemble.kind() == EnsembleKind::Binary {
            let (m1, s11) = mean_and_var(self.x1, self.x1_sq);
            let (m2, s22) = mean_and_var(self.q, self.q_sq);
            let s12 = self.x1_q.value() / na - m1 * m2;
            summary.mean_x1 = Some(conditional((m1, s11)));
            summary.mean_x1_sq = Some(conditional((m2, s22)));
            let v = m2 - m1 * m1;
            if v > 0.0 {
                let two_alpha = 2.0 * ensemble.alpha();
                let nf = m1 / (two_alpha * v.sqrt());
                let denom = two_alpha * v * v.sqrt();
                let g1 = m2 / denom;
                let g2 = -0.5 * m1 / denom;
                let var_nf = (g1 * g1 * s11 + g2 * g2 * s22 + 2.0 * g1 * g2 * s12).max(0.0) / na;
                summary.noise_figure = Some(Estimate {
                    mean: nf,
                    std_err: var_nf.sqrt(),
                });
            }
        }
        summary
    }
}

/// Deterministic simulation of one device configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Simulation {
    ensemble: InputEnsemble,
    cfg: AmplifierConfig,
    guess: ComplexAmplitude,
    sampling: DetectionSampling,
}

impl Simulation {
    /// Bob guesses `t₁α/r₁` for the ensemble's reference amplitude `+α`.
    pub fn new(ensemble: InputEnsemble, cfg: AmplifierConfig) -> Self {
        Self {
            ensemble,
            cfg,
            guess: cfg.optimal_guess(ensemble.reference()),
            sampling: DetectionSampling::Exact,
        }
    }

    /// Overrides Bob's guess amplitude.
    pub fn with_guess(mut self, guess: ComplexAmplitude) -> Self {
        self.guess = guess;
        self
    }

    pub fn with_sampling(mut self, sampling: DetectionSampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn ensemble(&self) -> &InputEnsemble {
        &self.ensemble
    }

    pub fn config(&self) -> &AmplifierConfig {
        &self.cfg
    }

    pub fn guess(&self) -> ComplexAmplitude {
        self.guess
    }

    fn base_rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn trial_from(&self, base: &ChaCha8Rng, index: u64) -> TrialOutcome {
        let mut rng = base.clone();
        rng.set_stream(index);
        run_trial_with(
            &mut rng,
            &self.ensemble,
            self.guess,
            &self.cfg,
            self.sampling,
        )
    }

    /// Outcome of trial `index` under `seed`.
    pub fn trial(&self, seed: u64, index: u64) -> TrialOutcome {
        self.trial_from(&Self::base_rng(seed), index)
    }

    /// Tally of the trials with indices in `range`, run sequentially.
    pub fn tally(&self, seed: u64, range: Range<u64>) -> Tally {
        let base = Self::base_rng(seed);
        let mut tally = Tally::default();
        for i in range {
            tally.record(&self.trial_from(&base, i));
        }
        tally
    }

    /// Runs trials `0..n_trials` on the current rayon pool.
    pub fn estimate(&self, n_trials: u64, seed: u64) -> Result<EstimateSummary> {
        if n_trials == 0 {
            return Err(Error::invalid("n_trials", "must be at least 1"));
        }
        let n_blocks = n_trials.div_ceil(BLOCK);
        let tally = (0..n_blocks)
            .into_par_iter()
            .map(|b| self.tally(seed, b * BLOCK..((b + 1) * BLOCK).min(n_trials)))
            .reduce(Tally::default, Tally::merge);
        Ok(tally.summarize(&self.ensemble, seed))
    }
}

/// Estimates the figures of merit with Bob's optimal guess and exact click
/// sampling.
pub fn estimate(
    ensemble: &InputEnsemble,
    cfg: &AmplifierConfig,
    n_trials: u64,
    seed: u64,
) -> Result<EstimateSummary> {
    Simulation::new(*ensemble, *cfg).estimate(n_trials, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{binary_metrics, phase_covariant_metrics};

    fn binary(a2: f64) -> InputEnsemble {
        InputEnsemble::from_alpha_sq(EnsembleKind::Binary, a2).unwrap()
    }

    fn phase(a2: f64) -> InputEnsemble {
        InputEnsemble::from_alpha_sq(EnsembleKind::PhaseCovariant, a2).unwrap()
    }

    #[test]
    fn blind_heralding_detector_rejects_everything() {
        let cfg = AmplifierConfig::new(3.0, 0.9).unwrap().with_detectors(
            DetectorModel::IDEAL,
            DetectorModel::with_efficiency(0.0).unwrap(),
        );
        let sim = Simulation::new(binary(1.0), cfg);
        for i in 0..2000 {
            assert!(!sim.trial(7, i).accepted);
        }
        let s = sim.estimate(5000, 7).unwrap();
        assert_eq!(s.n_accepted, 0);
        assert!(s.fidelity.is_none() && s.noise_figure.is_none());
    }

    #[test]
    fn perfect_point_accepts_only_the_correct_branch() {
        let cfg = AmplifierConfig::new(1.8, 0.9).unwrap();
        let e = binary(0.5);
        let sim = Simulation::new(e, cfg);
        let mut accepted = 0;
        for i in 0..20_000 {
            let t = sim.trial(11, i);
            if t.accepted {
                accepted += 1;
                assert_eq!(t.input_amp.re(), e.alpha());
                assert!((t.fidelity_weight.unwrap() - 1.0).abs() < 1e-14);
            }
        }
        assert!(accepted > 100);
    }

    #[test]
    fn trials_are_reproducible() {
        let sim = Simulation::new(phase(0.5), AmplifierConfig::new(2.0, 0.95).unwrap());
        let a: Vec<_> = (0..100).map(|i| sim.trial(42, i)).collect();
        let b: Vec<_> = (0..100).map(|i| sim.trial(42, i)).collect();
        assert_eq!(a, b);
        let c: Vec<_> = (0..100).map(|i| sim.trial(43, i)).collect();
        assert_ne!(a, c);
    }

    #[test]
    fn single_trial_summary_is_stable() {
        let sim = Simulation::new(binary(1.0), AmplifierConfig::new(4.0, 0.9).unwrap());
        let one = sim.estimate(1, 5).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap();
        assert_eq!(pool.install(|| sim.estimate(1, 5).unwrap()), one);
        assert_eq!(one.n_trials, 1);
    }

    #[test]
    fn zero_trials_rejected() {
        let sim = Simulation::new(binary(1.0), AmplifierConfig::new(4.0, 0.9).unwrap());
        assert!(sim.estimate(0, 1).is_err());
    }

    #[test]
    fn merge_is_exact_for_any_partition() {
        let sim = Simulation::new(binary(0.5), AmplifierConfig::new(2.5, 0.9).unwrap());
        let whole = sim.tally(3, 0..3000);
        for &cuts in &[&[1500u64][..], &[1, 2, 2999], &[700, 701, 1999, 2500]] {
            let mut bounds = vec![0u64];
            bounds.extend_from_slice(cuts);
            bounds.push(3000);
            let parts: Vec<Tally> = bounds
                .windows(2)
                .map(|w| sim.tally(3, w[0]..w[1]))
                .collect();
            let forward = parts.iter().copied().fold(Tally::default(), Tally::merge);
            let backward = parts
                .iter()
                .rev()
                .copied()
                .fold(Tally::default(), Tally::merge);
            assert_eq!(forward, whole);
            assert_eq!(backward, whole);
        }
    }

    #[test]
    fn exact_and_photon_counting_paths_agree() {
        let d1 = DetectorModel::new(0.8, 0.01).unwrap();
        let d2 = DetectorModel::new(0.6, 0.02).unwrap();
        let cfg = AmplifierConfig::new(3.0, 0.9)
            .unwrap()
            .with_detectors(d1, d2);
        for e in [binary(0.5), phase(1.0)] {
            let fast = Simulation::new(e, cfg).estimate(200_000, 9).unwrap();
            let slow = Simulation::new(e, cfg)
                .with_sampling(DetectionSampling::PhotonCounting)
                .estimate(200_000, 10)
                .unwrap();
            let diff = fast.p_success.mean - slow.p_success.mean;
            let se = fast.p_success.std_err.hypot(slow.p_success.std_err);
            assert!(diff.abs() < 4.0 * se, "{e:?}: {diff} vs {se}");
            let (ff, sf) = (fast.fidelity.unwrap(), slow.fidelity.unwrap());
            assert!((ff.mean - sf.mean).abs() < 4.0 * ff.std_err.hypot(sf.std_err));
        }
    }

    #[test]
    fn sampled_fidelity_test_agrees_with_weights() {
        let cfg = AmplifierConfig::new(4.0, 0.9).unwrap();
        let s = estimate(&binary(0.5), &cfg, 300_000, 21).unwrap();
        let (w, t) = (s.fidelity.unwrap(), s.fidelity_sampled.unwrap());
        assert!((w.mean - t.mean).abs() < 4.0 * t.std_err);
        assert!(t.std_err >= w.std_err);
    }

    #[test]
    fn coarse_agreement_with_closed_forms() {
        let cfg = AmplifierConfig::new(4.0, 0.9).unwrap();
        let s = estimate(&binary(0.5), &cfg, 200_000, 1).unwrap();
        let m = binary_metrics(0.5f64.sqrt(), &cfg).unwrap();
        assert!(s.p_success.z_score(m.p_success).abs() < 4.0);
        assert!(s.fidelity.unwrap().z_score(m.fidelity).abs() < 4.0);

        let cfg = AmplifierConfig::new(2.0, 0.95).unwrap();
        let s = estimate(&phase(0.5), &cfg, 200_000, 1).unwrap();
        let m = phase_covariant_metrics(0.5f64.sqrt(), &cfg).unwrap();
        assert!(s.p_success.z_score(m.p_success).abs() < 4.0);
        assert!(s.fidelity.unwrap().z_score(m.fidelity).abs() < 4.0);
        assert!(s.noise_figure.is_none());
    }

    #[test]
    fn z_score_edge_cases() {
        let e = Estimate {
            mean: 1.0,
            std_err: 0.0,
        };
        assert_eq!(e.z_score(1.0), 0.0);
        assert!(e.z_score(0.5).is_infinite());
        let e = Estimate {
            mean: 1.0,
            std_err: 0.5,
        };
        assert_eq!(e.z_score(0.0), 2.0);
    }
}
