//! Coherent amplitudes, the two beam splitters, threshold detectors and the
//! device configuration.
//!
//! Coherent states stay coherent under linear optics, so the whole circuit is
//! tracked as a handful of complex amplitudes. Photodetection of a coherent
//! amplitude `a` by a detector of efficiency `η` with dark-click probability `d`
//! registers no click with probability `(1 − d)·exp(−η|a|²)`.
//!
//! Beam-splitter convention: for inputs `(upper, lower)` the detector arm
//! receives `t·upper − r·lower` and the kept arm receives `r·upper + t·lower`.
//! At the first beam splitter Alice's state enters the upper port and Bob's
//! guess the lower port, so the comparison amplitude is `t₁α − r₁β`. At the
//! second beam splitter the signal enters the lower port against vacuum, giving
//! `−r₂x` on the subtraction detector and `t₂x` at the output. Any other choice
//! of global phases leaves every probability and overlap unchanged.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use crate::error::{Error, Result};

/// Complex amplitude of a coherent state; `|a|²` is its mean photon number.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ComplexAmplitude {
    re: f64,
    im: f64,
}

impl ComplexAmplitude {
    pub const VACUUM: ComplexAmplitude = ComplexAmplitude { re: 0.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !re.is_finite() || !im.is_finite() {
            return Err(Error::invalid(
                "amplitude",
                format!("components must be finite, got ({re}, {im})"),
            ));
        }
        Ok(Self { re, im })
    }

    pub fn real(re: f64) -> Result<Self> {
        Self::new(re, 0.0)
    }

    pub fn from_polar(magnitude: f64, phase: f64) -> Result<Self> {
        let (s, c) = phase.sin_cos();
        Self::new(magnitude * c, magnitude * s)
    }

    pub fn re(self) -> f64 {
        self.re
    }

    pub fn im(self) -> f64 {
        self.im
    }

    /// Mean photon number `|a|²`.
    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn scale(self, k: f64) -> Self {
        Self {
            re: self.re * k,
            im: self.im * k,
        }
    }
}

impl Add for ComplexAmplitude {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            re: self.re + rhs.re,
            im: self.im + rhs.im,
        }
    }
}

impl Sub for ComplexAmplitude {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self {
            re: self.re - rhs.re,
            im: self.im - rhs.im,
        }
    }
}

impl Neg for ComplexAmplitude {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl Mul<ComplexAmplitude> for f64 {
    type Output = ComplexAmplitude;
    fn mul(self, rhs: ComplexAmplitude) -> ComplexAmplitude {
        rhs.scale(self)
    }
}

/// Lossless beam splitter with real, non-negative transmission and reflection
/// amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitter {
    t: f64,
    r: f64,
}

impl BeamSplitter {
    /// Builds from the intensity transmission `t²`.
    pub fn from_transmissivity(t_sq: f64) -> Result<Self> {
        check_unit_interval("t_sq", t_sq)?;
        Ok(Self {
            t: t_sq.sqrt(),
            r: (1.0 - t_sq).sqrt(),
        })
    }

    /// Builds from the intensity reflection `r²`.
    pub fn from_reflectivity(r_sq: f64) -> Result<Self> {
        check_unit_interval("r_sq", r_sq)?;
        Ok(Self {
            t: (1.0 - r_sq).sqrt(),
            r: r_sq.sqrt(),
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn r(&self) -> f64 {
        self.r
    }
}

fn check_unit_interval(name: &'static str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::invalid(name, format!("must lie in [0, 1], got {v}")));
    }
    Ok(())
}

/// Threshold (click/no-click) photodetector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel {
    eta: f64,
    dark_prob: f64,
}

impl DetectorModel {
    pub const IDEAL: DetectorModel = DetectorModel {
        eta: 1.0,
        dark_prob: 0.0,
    };

    /// `eta` is the quantum efficiency, `dark_prob` the probability of at
    /// least one dark count in a detection window.
    pub fn new(eta: f64, dark_prob: f64) -> Result<Self> {
        check_unit_interval("eta", eta)?;
        if !(0.0..1.0).contains(&dark_prob) {
            return Err(Error::invalid(
                "dark_prob",
                format!("must lie in [0, 1), got {dark_prob}"),
            ));
        }
        Ok(Self { eta, dark_prob })
    }

    pub fn with_efficiency(eta: f64) -> Result<Self> {
        Self::new(eta, 0.0)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn dark_prob(&self) -> f64 {
        self.dark_prob
    }
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self::IDEAL
    }
}

/// Full parameterization of the amplifier.
///
/// The gain is given as the intensity gain `G = g²`. The first beam splitter is
/// derived from it: `r₁ = t₂/g`, which requires `t₂² ≤ G`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplifierConfig {
    intensity_gain: f64,
    t2_sq: f64,
    bs1: BeamSplitter,
    bs2: BeamSplitter,
    d1: DetectorModel,
    d2: DetectorModel,
}

impl AmplifierConfig {
    /// Ideal detectors on both arms.
    pub fn new(intensity_gain: f64, t2_sq: f64) -> Result<Self> {
        if !(intensity_gain.is_finite() && intensity_gain > 0.0) {
            return Err(Error::invalid(
                "intensity_gain",
                format!("must be finite and positive, got {intensity_gain}"),
            ));
        }
        if !(t2_sq > 0.0 && t2_sq < 1.0) {
            return Err(Error::invalid(
                "t2_sq",
                format!("must lie in (0, 1), got {t2_sq}"),
            ));
        }
        if t2_sq > intensity_gain {
            return Err(Error::invalid(
                "intensity_gain",
                format!("must be at least t2_sq = {t2_sq} (r1 <= 1), got {intensity_gain}"),
            ));
        }
        Ok(Self {
            intensity_gain,
            t2_sq,
            bs1: BeamSplitter::from_reflectivity(t2_sq / intensity_gain)?,
            bs2: BeamSplitter::from_transmissivity(t2_sq)?,
            d1: DetectorModel::IDEAL,
            d2: DetectorModel::IDEAL,
        })
    }

    /// Replaces the comparison (`d1`) and subtraction (`d2`) detectors.
    pub fn with_detectors(mut self, d1: DetectorModel, d2: DetectorModel) -> Self {
        self.d1 = d1;
        self.d2 = d2;
        self
    }

    pub fn intensity_gain(&self) -> f64 {
        self.intensity_gain
    }

    pub fn amplitude_gain(&self) -> f64 {
        self.intensity_gain.sqrt()
    }

    pub fn t2_sq(&self) -> f64 {
        self.t2_sq
    }

    pub fn bs1(&self) -> BeamSplitter {
        self.bs1
    }

    pub fn bs2(&self) -> BeamSplitter {
        self.bs2
    }

    pub fn t1(&self) -> f64 {
        self.bs1.t
    }

    pub fn r1(&self) -> f64 {
        self.bs1.r
    }

    pub fn t2(&self) -> f64 {
        self.bs2.t
    }

    pub fn r2(&self) -> f64 {
        self.bs2.r
    }

    pub fn d1(&self) -> DetectorModel {
        self.d1
    }

    pub fn d2(&self) -> DetectorModel {
        self.d2
    }

    pub fn has_dark_counts(&self) -> bool {
        self.d1.dark_prob > 0.0 || self.d2.dark_prob > 0.0
    }

    /// Guess `t₁α/r₁` that nulls the comparison port for input `α`.
    pub fn optimal_guess(&self, alpha: ComplexAmplitude) -> ComplexAmplitude {
        alpha.scale(self.t1() / self.r1())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EnsembleKind {
    /// `{|α⟩, |−α⟩}` with equal weights.
    Binary,
    /// `|αe^{iθ}⟩` with `θ` uniform on `[0, 2π)`.
    PhaseCovariant,
}

impl EnsembleKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EnsembleKind::Binary => "binary",
            EnsembleKind::PhaseCovariant => "phase",
        }
    }
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl serde::Serialize for EnsembleKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(EnsembleKind::Binary),
            "phase" | "phase-covariant" => Ok(EnsembleKind::PhaseCovariant),
            other => Err(Error::invalid(
                "ensemble",
                format!("expected `binary` or `phase`, got `{other}`"),
            )),
        }
    }
}

/// Alice's input distribution, parameterized by a real amplitude `α > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputEnsemble {
    kind: EnsembleKind,
    alpha: f64,
}

impl InputEnsemble {
    pub fn new(kind: EnsembleKind, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::invalid(
                "alpha",
                format!("must be finite and positive, got {alpha}"),
            ));
        }
        Ok(Self { kind, alpha })
    }

    pub fn from_alpha_sq(kind: EnsembleKind, alpha_sq: f64) -> Result<Self> {
        if !(alpha_sq.is_finite() && alpha_sq > 0.0) {
            return Err(Error::invalid(
                "alpha_sq",
                format!("must be finite and positive, got {alpha_sq}"),
            ));
        }
        Self::new(kind, alpha_sq.sqrt())
    }

    pub fn binary(alpha: f64) -> Result<Self> {
        Self::new(EnsembleKind::Binary, alpha)
    }

    pub fn phase_covariant(alpha: f64) -> Result<Self> {
        Self::new(EnsembleKind::PhaseCovariant, alpha)
    }

    pub fn kind(&self) -> EnsembleKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The reference amplitude `+α` that Bob's guess is built from.
    pub fn reference(&self) -> ComplexAmplitude {
        ComplexAmplitude {
            re: self.alpha,
            im: 0.0,
        }
    }

    /// Maps a uniform variate `u ∈ [0, 1)` to an input amplitude: `+α` for
    /// `u < ½` and `−α` otherwise (binary), or `αe^{2πiu}` (phase-covariant).
    pub fn amplitude_at(&self, u: f64) -> ComplexAmplitude {
        match self.kind {
            EnsembleKind::Binary => {
                let sign = if u < 0.5 { 1.0 } else { -1.0 };
                ComplexAmplitude {
                    re: sign * self.alpha,
                    im: 0.0,
                }
            }
            EnsembleKind::PhaseCovariant => {
                let (s, c) = (TAU * u).sin_cos();
                ComplexAmplitude {
                    re: self.alpha * c,
                    im: self.alpha * s,
                }
            }
        }
    }
}

/// Returns `(kept, detector)` = `(r·upper + t·lower, t·upper − r·lower)`.
pub fn beam_splitter_transform(
    a_upper: ComplexAmplitude,
    a_lower: ComplexAmplitude,
    bs: BeamSplitter,
) -> (ComplexAmplitude, ComplexAmplitude) {
    let kept = a_upper.scale(bs.r) + a_lower.scale(bs.t);
    let detector = a_upper.scale(bs.t) - a_lower.scale(bs.r);
    (kept, detector)
}

/// Probability that `det` registers no click when illuminated by `amp`.
pub fn no_click_probability(amp: ComplexAmplitude, det: DetectorModel) -> f64 {
    (1.0 - det.dark_prob) * (-det.eta * amp.norm_sqr()).exp()
}

/// `|⟨a|b⟩|² = exp(−|a − b|²)`.
pub fn coherent_overlap(a: ComplexAmplitude, b: ComplexAmplitude) -> f64 {
    (-(a - b).norm_sqr()).exp()
}
