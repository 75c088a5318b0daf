use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{binary_metrics, binary_quadrature_moments, phase_covariant_metrics};
use crate::error::{Error, Result};
use crate::montecarlo::estimate;
use crate::optics::{AmplifierConfig, DetectorModel, EnsembleKind, InputEnsemble};

/// Intensity-gain axis of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum GainGrid {
    /// `steps` logarithmically spaced points from `min` to `max` inclusive.
    LogSpaced {
        min: f64,
        max: f64,
        steps: usize,
    },
    Explicit(Vec<f64>),
}

impl GainGrid {
    pub fn points(&self) -> Vec<f64> {
        match self {
            GainGrid::LogSpaced { min, max, steps } => match *steps {
                0 => Vec::new(),
                1 => vec![*min],
                n => {
                    let (lo, hi) = (min.ln(), max.ln());
                    (0..n)
                        .map(|i| {
                            if i == n - 1 {
                                *max
                            } else if i == 0 {
                                *min
                            } else {
                                (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp()
                            }
                        })
                        .collect()
                }
            },
            GainGrid::Explicit(points) => points.clone(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            GainGrid::LogSpaced { steps, .. } => *steps,
            GainGrid::Explicit(points) => points.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Analytic,
    MonteCarlo,
    Both,
}

impl Mode {
    fn sources(self) -> &'static [Source] {
        match self {
            Mode::Analytic => &[Source::Analytic],
            Mode::MonteCarlo => &[Source::MonteCarlo],
            Mode::Both => &[Source::Analytic, Source::MonteCarlo],
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Mode::Analytic),
            "mc" | "montecarlo" => Ok(Mode::MonteCarlo),
            "both" => Ok(Mode::Both),
            other => Err(Error::invalid(
                "mode",
                format!("expected analytic, mc or both, got `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Source {
    #[serde(rename = "analytic")]
    Analytic,
    #[serde(rename = "mc")]
    MonteCarlo,
}

impl Source {
    pub fn as_str(&self) -> &'static str {
        match self {
            Source::Analytic => "analytic",
            Source::MonteCarlo => "mc",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Source::Analytic),
            "mc" => Ok(Source::MonteCarlo),
            other => Err(Error::Parse(format!("unknown source `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub ensemble: EnsembleKind,
    pub alpha_sq_list: Vec<f64>,
    pub gain_grid: GainGrid,
    pub t2_sq: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub dark1: f64,
    pub dark2: f64,
    pub mode: Mode,
    pub n_trials: u64,
    pub seed: u64,
}

impl SweepSpec {
    /// A single-η analytic sweep with ideal, dark-count-free detectors.
    pub fn new(
        ensemble: EnsembleKind,
        alpha_sq_list: Vec<f64>,
        gain_grid: GainGrid,
        t2_sq: f64,
    ) -> Self {
        Self {
            ensemble,
            alpha_sq_list,
            gain_grid,
            t2_sq,
            eta1: 1.0,
            eta2: 1.0,
            dark1: 0.0,
            dark2: 0.0,
            mode: Mode::Analytic,
            n_trials: 0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha_sq_list.is_empty() {
            return Err(Error::invalid("alpha_sq", "at least one value is required"));
        }
        for &a2 in &self.alpha_sq_list {
            if !(a2.is_finite() && a2 > 0.0) {
                return Err(Error::invalid(
                    "alpha_sq",
                    format!("must be positive, got {a2}"),
                ));
            }
        }
        if !(self.t2_sq > 0.0 && self.t2_sq < 1.0) {
            return Err(Error::invalid(
                "t2_sq",
                format!("must lie in (0, 1), got {}", self.t2_sq),
            ));
        }
        self.detectors()?;
        if let GainGrid::LogSpaced { min, max, steps } = self.gain_grid {
            if steps == 0 {
                return Err(Error::invalid("gain_steps", "must be at least 1"));
            }
            if steps > 1 && max.partial_cmp(&min) != Some(Ordering::Greater) {
                return Err(Error::invalid(
                    "gain_max",
                    format!("must exceed gain_min = {min}, got {max}"),
                ));
            }
        }
        let points = self.gain_grid.points();
        if points.is_empty() {
            return Err(Error::invalid("gain", "the gain grid is empty"));
        }
        if points
            .windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(Ordering::Greater))
        {
            return Err(Error::invalid(
                "gain",
                "gain grid must be strictly increasing",
            ));
        }
        for &g in &points {
            if !(g.is_finite() && g > self.t2_sq) {
                return Err(Error::invalid(
                    "intensity_gain",
                    format!("every gain must exceed t2_sq = {}, got {g}", self.t2_sq),
                ));
            }
        }
        if self.mode != Mode::MonteCarlo && (self.dark1 > 0.0 || self.dark2 > 0.0) {
            return Err(Error::invalid(
                "dark",
                "closed forms are dark-count-free; use Monte Carlo mode with dark counts",
            ));
        }
        if self.mode != Mode::Analytic && self.n_trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        Ok(())
    }

    fn detectors(&self) -> Result<(DetectorModel, DetectorModel)> {
        Ok((
            DetectorModel::new(self.eta1, self.dark1)?,
            DetectorModel::new(self.eta2, self.dark2)?,
        ))
    }

    pub fn config(&self, intensity_gain: f64) -> Result<AmplifierConfig> {
        let (d1, d2) = self.detectors()?;
        Ok(AmplifierConfig::new(intensity_gain, self.t2_sq)?.with_detectors(d1, d2))
    }

    /// `|alpha_sq_list| × steps × sources`.
    pub fn row_count(&self) -> usize {
        self.alpha_sq_list.len() * self.gain_grid.len() * self.mode.sources().len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub ensemble: EnsembleKind,
    pub alpha_sq: f64,
    pub intensity_gain: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub t2_sq: f64,
    pub source: Source,
    pub p_success: f64,
    pub p_success_se: Option<f64>,
    /// Absent when the device never succeeds (or no trial was accepted).
    pub fidelity: Option<f64>,
    pub fidelity_se: Option<f64>,
    /// Binary ensemble only.
    pub noise_figure: Option<f64>,
    pub noise_figure_se: Option<f64>,
}

/// Stafford's SplitMix64 finalizer; decorrelates the per-point seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the Monte Carlo run at flat grid index `point`.
pub fn point_seed(seed: u64, point: u64) -> u64 {
    mix(seed ^ mix(point))
}

fn analytic_row(spec: &SweepSpec, alpha_sq: f64, cfg: &AmplifierConfig) -> Result<SweepRow> {
    let alpha = alpha_sq.sqrt();
    let mut row = blank_row(spec, alpha_sq, cfg, Source::Analytic);
    match spec.ensemble {
        EnsembleKind::Binary => match binary_metrics(alpha, cfg) {
            Ok(m) => {
                row.p_success = m.p_success;
                row.fidelity = Some(m.fidelity);
                row.noise_figure = Some(binary_quadrature_moments(alpha, cfg)?.noise_figure);
            }
            Err(Error::NeverSucceeds) => {}
            Err(e) => return Err(e),
        },
        EnsembleKind::PhaseCovariant => match phase_covariant_metrics(alpha, cfg) {
            Ok(m) => {
                row.p_success = m.p_success;
                row.fidelity = Some(m.fidelity);
            }
            Err(Error::NeverSucceeds) => {}
            Err(e) => return Err(e),
        },
    }
    Ok(row)
}

fn mc_row(spec: &SweepSpec, alpha_sq: f64, cfg: &AmplifierConfig, seed: u64) -> Result<SweepRow> {
    let ensemble = InputEnsemble::from_alpha_sq(spec.ensemble, alpha_sq)?;
    let s = estimate(&ensemble, cfg, spec.n_trials, seed)?;
    let mut row = blank_row(spec, alpha_sq, cfg, Source::MonteCarlo);
    row.p_success = s.p_success.mean;
    row.p_success_se = Some(s.p_success.std_err);
    row.fidelity = s.fidelity.map(|e| e.mean);
    row.fidelity_se = s.fidelity.map(|e| e.std_err);
    row.noise_figure = s.noise_figure.map(|e| e.mean);
    row.noise_figure_se = s.noise_figure.map(|e| e.std_err);
    Ok(row)
}

fn blank_row(spec: &SweepSpec, alpha_sq: f64, cfg: &AmplifierConfig, source: Source) -> SweepRow {
    SweepRow {
        ensemble: spec.ensemble,
        alpha_sq,
        intensity_gain: cfg.intensity_gain(),
        eta1: spec.eta1,
        eta2: spec.eta2,
        t2_sq: spec.t2_sq,
        source,
        p_success: 0.0,
        p_success_se: None,
        fidelity: None,
        fidelity_se: None,
        noise_figure: None,
        noise_figure_se: None,
    }
}

/// Evaluates every `(alpha_sq, gain, source)` point of `spec`.
///
/// Rows come out ordered by α² (in list order), then gain, then source with
/// analytic before Monte Carlo. Grid points run in parallel; each Monte Carlo
/// point uses [`point_seed`] of its flat index, so the output depends only on
/// the spec.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let gains = spec.gain_grid.points();
    let points: Vec<(usize, f64, f64)> = spec
        .alpha_sq_list
        .iter()
        .flat_map(|&a2| gains.iter().map(move |&g| (a2, g)))
        .enumerate()
        .map(|(i, (a2, g))| (i, a2, g))
        .collect();
    let per_point: Vec<Vec<SweepRow>> = points
        .par_iter()
        .map(|&(i, a2, g)| {
            let cfg = spec.config(g)?;
            spec.mode
                .sources()
                .iter()
                .map(|source| match source {
                    Source::Analytic => analytic_row(spec, a2, &cfg),
                    Source::MonteCarlo => mc_row(spec, a2, &cfg, point_seed(spec.seed, i as u64)),
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_point.into_iter().flatten().collect())
}

/// Concatenates the sweeps of several specs in order.
pub fn sweep_all(specs: &[SweepSpec]) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for spec in specs {
        rows.extend(sweep(spec)?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(mode: Mode) -> SweepSpec {
        SweepSpec {
            mode,
            n_trials: 2000,
            seed: 3,
            ..SweepSpec::new(
                EnsembleKind::Binary,
                vec![0.1, 0.5],
                GainGrid::LogSpaced {
                    min: 1.0,
                    max: 4.0,
                    steps: 3,
                },
                0.9,
            )
        }
    }

    #[test]
    fn log_grid_endpoints_are_exact() {
        let pts = GainGrid::LogSpaced {
            min: 0.945,
            max: 10.0,
            steps: 60,
        }
        .points();
        assert_eq!(pts.len(), 60);
        assert_eq!(pts[0], 0.945);
        assert_eq!(pts[59], 10.0);
        assert!(pts.windows(2).all(|w| w[1] > w[0]));
        let mid = GainGrid::LogSpaced {
            min: 1.0,
            max: 4.0,
            steps: 3,
        }
        .points();
        assert!((mid[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn row_counts_and_order() {
        let rows = sweep(&spec(Mode::Both)).unwrap();
        assert_eq!(rows.len(), spec(Mode::Both).row_count());
        assert_eq!(rows.len(), 2 * 3 * 2);
        assert_eq!(rows[0].source, Source::Analytic);
        assert_eq!(rows[1].source, Source::MonteCarlo);
        assert_eq!(rows[0].intensity_gain, rows[1].intensity_gain);
        assert!(rows[2].intensity_gain > rows[0].intensity_gain);
        assert_eq!(rows[6].alpha_sq, 0.5);
        assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.p_success)));
    }

    #[test]
    fn sweeps_are_deterministic() {
        assert_eq!(
            sweep(&spec(Mode::Both)).unwrap(),
            sweep(&spec(Mode::Both)).unwrap()
        );
    }

    #[test]
    fn rejects_gain_at_or_below_t2() {
        let mut s = spec(Mode::Analytic);
        s.gain_grid = GainGrid::Explicit(vec![0.9, 2.0]);
        assert!(s.validate().is_err());
        s.gain_grid = GainGrid::Explicit(vec![2.0, 1.5]);
        assert!(s.validate().is_err());
        s.gain_grid = GainGrid::Explicit(vec![]);
        assert!(s.validate().is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut s = spec(Mode::MonteCarlo);
        s.n_trials = 0;
        assert!(s.validate().is_err());
        let mut s = spec(Mode::Analytic);
        s.dark1 = 1e-3;
        assert!(s.validate().is_err());
        s.mode = Mode::MonteCarlo;
        assert!(s.validate().is_ok());
        let mut s = spec(Mode::Analytic);
        s.eta2 = 1.5;
        assert!(s.validate().is_err());
        let mut s = spec(Mode::Analytic);
        s.alpha_sq_list = vec![];
        assert!(s.validate().is_err());
    }

    #[test]
    fn never_succeeding_points_have_no_fidelity() {
        let mut s = spec(Mode::Analytic);
        s.eta2 = 0.0;
        let rows = sweep(&s).unwrap();
        assert!(rows
            .iter()
            .all(|r| r.p_success == 0.0 && r.fidelity.is_none()));
    }

    #[test]
    fn point_seeds_differ() {
        assert_ne!(point_seed(42, 0), point_seed(42, 1));
        assert_ne!(point_seed(42, 0), point_seed(43, 0));
    }
}
