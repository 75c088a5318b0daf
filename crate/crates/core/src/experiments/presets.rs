//! Bundled sweep configurations for the standard figure tables.
//!
//! Gain grids are conventions chosen here, not values read from any plot:
//! binary presets use 60 log-spaced gains over `[1.05·t₂², 10]` with
//! `t₂² = 0.9`; phase-covariant presets use 60 log-spaced gains over `[1.5, 8]`
//! with `t₂² = 0.95`. The phase-covariant range stays clear of the shallow
//! success-probability minimum at `G ≈ 1.4` and of the `G ≳ 8.5` region where
//! the α² = 0.5 and α² = 1 fidelity curves cross.
//!
//! Each preset can check its qualitative shape on the sampled points with
//! [`Preset::check_shape`].

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::experiments::sweep::{GainGrid, Mode, Source, SweepRow, SweepSpec};
use crate::optics::EnsembleKind;

pub const ALPHA_SQ: [f64; 3] = [0.1, 0.5, 1.0];
pub const BINARY_T2_SQ: f64 = 0.9;
pub const PHASE_T2_SQ: f64 = 0.95;
pub const STEPS: usize = 60;
pub const EFFICIENCIES: [f64; 2] = [1.0, 0.5];

/// Gain above which success probabilities are expected to rise monotonically.
const MONOTONE_FROM: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Binary fidelity versus gain, η ∈ {1, 0.5}.
    Fig3,
    /// Binary success probability versus gain, η ∈ {1, 0.5}.
    Fig4,
    /// Binary noise figure versus gain, η = 1.
    NoiseFigure,
    /// Phase-covariant fidelity versus gain, η ∈ {1, 0.5}.
    FigS2,
    /// Phase-covariant success probability versus gain, η ∈ {1, 0.5}.
    FigS3,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::Fig3,
        Preset::Fig4,
        Preset::NoiseFigure,
        Preset::FigS2,
        Preset::FigS3,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::NoiseFigure => "nf",
            Preset::FigS2 => "figS2",
            Preset::FigS3 => "figS3",
        }
    }

    pub fn ensemble(&self) -> EnsembleKind {
        match self {
            Preset::Fig3 | Preset::Fig4 | Preset::NoiseFigure => EnsembleKind::Binary,
            Preset::FigS2 | Preset::FigS3 => EnsembleKind::PhaseCovariant,
        }
    }

    pub fn t2_sq(&self) -> f64 {
        match self.ensemble() {
            EnsembleKind::Binary => BINARY_T2_SQ,
            EnsembleKind::PhaseCovariant => PHASE_T2_SQ,
        }
    }

    pub fn gain_grid(&self) -> GainGrid {
        match self.ensemble() {
            EnsembleKind::Binary => GainGrid::LogSpaced {
                min: 1.05 * BINARY_T2_SQ,
                max: 10.0,
                steps: STEPS,
            },
            EnsembleKind::PhaseCovariant => GainGrid::LogSpaced {
                min: 1.5,
                max: 8.0,
                steps: STEPS,
            },
        }
    }

    pub fn efficiencies(&self) -> &'static [f64] {
        match self {
            Preset::NoiseFigure => &EFFICIENCIES[..1],
            _ => &EFFICIENCIES,
        }
    }

    /// One analytic spec per detector efficiency (both detectors share it).
    pub fn specs(&self) -> Vec<SweepSpec> {
        self.efficiencies()
            .iter()
            .map(|&eta| SweepSpec {
                eta1: eta,
                eta2: eta,
                ..SweepSpec::new(
                    self.ensemble(),
                    ALPHA_SQ.to_vec(),
                    self.gain_grid(),
                    self.t2_sq(),
                )
            })
            .collect()
    }

    /// Same as [`Preset::specs`] with a sampling mode, trial count and seed.
    pub fn specs_with(&self, mode: Mode, n_trials: u64, seed: u64) -> Vec<SweepSpec> {
        self.specs()
            .into_iter()
            .map(|s| SweepSpec {
                mode,
                n_trials,
                seed,
                ..s
            })
            .collect()
    }

    /// Checks the preset's qualitative shape on the analytic rows of a sweep
    /// produced from [`Preset::specs`]. Returns one message per violation.
    pub fn check_shape(&self, rows: &[SweepRow]) -> Vec<String> {
        let mut violations = Vec::new();
        for (key, curve) in curves(rows) {
            let label = format!("{} eta={} alpha_sq={}", self.name(), key.1, key.0);
            match self {
                Preset::Fig3 => check_dip_unity_decay(&label, &curve, &mut violations),
                Preset::Fig4 | Preset::FigS3 => {
                    let from = if *self == Preset::Fig4 {
                        MONOTONE_FROM
                    } else {
                        0.0
                    };
                    let pts: Vec<(f64, f64)> = curve
                        .iter()
                        .filter(|r| r.intensity_gain >= from)
                        .map(|r| (r.intensity_gain, r.p_success))
                        .collect();
                    for w in pts.windows(2) {
                        if w[1].1.partial_cmp(&w[0].1) != Some(Ordering::Greater) {
                            violations.push(format!(
                                "{label}: P(S) not increasing between G={} and G={}",
                                w[0].0, w[1].0
                            ));
                        }
                    }
                }
                Preset::NoiseFigure => {
                    for r in curve.iter().filter(|r| r.intensity_gain >= MONOTONE_FROM) {
                        match r.noise_figure {
                            Some(nf) if nf > 1.0 => {}
                            other => violations.push(format!(
                                "{label}: NF {other:?} not above 1 at G={}",
                                r.intensity_gain
                            )),
                        }
                    }
                }
                Preset::FigS2 => {}
            }
        }
        if *self == Preset::FigS2 {
            check_alpha_ordering(rows, &mut violations);
        }
        violations
    }
}

/// Analytic rows grouped by `(alpha_sq, eta1)`, each sorted by gain.
fn curves(rows: &[SweepRow]) -> Vec<((f64, f64), Vec<&SweepRow>)> {
    let mut out: Vec<((f64, f64), Vec<&SweepRow>)> = Vec::new();
    for r in rows.iter().filter(|r| r.source == Source::Analytic) {
        let key = (r.alpha_sq, r.eta1);
        match out.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r),
            None => out.push((key, vec![r])),
        }
    }
    for (_, v) in &mut out {
        v.sort_by(|a, b| a.intensity_gain.total_cmp(&b.intensity_gain));
    }
    out
}

fn check_dip_unity_decay(label: &str, curve: &[&SweepRow], violations: &mut Vec<String>) {
    let f: Vec<f64> = curve
        .iter()
        .map(|r| r.fidelity.unwrap_or(f64::NAN))
        .collect();
    if f.len() < 3 || f.iter().any(|v| v.is_nan()) {
        violations.push(format!("{label}: incomplete fidelity curve"));
        return;
    }
    let peak = (0..f.len()).max_by(|&a, &b| f[a].total_cmp(&f[b])).unwrap();
    let dip = (0..peak).min_by(|&a, &b| f[a].total_cmp(&f[b]));
    match dip {
        Some(d) if f[d] < f[0] && d > 0 => {}
        _ => violations.push(format!("{label}: no initial fidelity dip")),
    }
    if f[peak] < 1.0 - 1e-4 {
        violations.push(format!("{label}: peak fidelity {} short of unity", f[peak]));
    }
    if f[f.len() - 1] >= f[peak] || peak == f.len() - 1 {
        violations.push(format!("{label}: no decay after the peak"));
    }
}

fn check_alpha_ordering(rows: &[SweepRow], violations: &mut Vec<String>) {
    let mut keys: Vec<(f64, u64)> = rows
        .iter()
        .filter(|r| r.source == Source::Analytic)
        .map(|r| (r.eta1, r.intensity_gain.to_bits()))
        .collect();
    keys.dedup();
    for (eta, gain_bits) in keys {
        let mut at: Vec<&SweepRow> = rows
            .iter()
            .filter(|r| {
                r.source == Source::Analytic
                    && r.eta1 == eta
                    && r.intensity_gain.to_bits() == gain_bits
            })
            .collect();
        at.sort_by(|a, b| a.alpha_sq.total_cmp(&b.alpha_sq));
        for w in at.windows(2) {
            let (lo, hi) = (w[0].fidelity, w[1].fidelity);
            if !matches!((lo, hi), (Some(a), Some(b)) if a > b) {
                violations.push(format!(
                    "figS2 eta={eta} G={}: F(alpha_sq={}) = {lo:?} not above F(alpha_sq={}) = {hi:?}",
                    f64::from_bits(gain_bits),
                    w[0].alpha_sq,
                    w[1].alpha_sq
                ));
            }
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                Error::invalid(
                    "preset",
                    format!("expected one of fig3, fig4, nf, figS2, figS3, got `{s}`"),
                )
            })
    }
}
