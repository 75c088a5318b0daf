//! Regression fixtures: oracle outputs committed as CSV and re-derived on
//! demand.
//!
//! Every record names the oracle that produced it. [`generate`] recomputes the
//! full set from the oracles alone; [`check_drift`] compares a regenerated set
//! with the committed one, and [`evaluate_production`] evaluates the production
//! code path a record is meant to pin down. Tolerances are relative.
//!
//! The file uses the sweep CSV dialect (17 significant digits, empty fields for
//! absent values) with `provenance` and `tolerance` columns.

use std::fmt;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::str::FromStr;

use crate::analytic::{
    binary_metrics, phase_covariant_joint_prob, phase_covariant_success_prob, success_prob_given,
};
use crate::bessel::bessel_i0_scaled;
use crate::error::{Error, Result};
use crate::experiments::oracle::phase_quadrature_oracle;
use crate::experiments::table::{opt_real, parse_opt_real, parse_real, real};
use crate::montecarlo::{DetectionSampling, Simulation};
use crate::optics::{
    AmplifierConfig, ComplexAmplitude, DetectorModel, EnsembleKind, InputEnsemble,
};
use crate::oracles::{
    bessel_i0_scaled_asymptotic_optimal, bessel_i0_scaled_series, binary_ensemble_average,
};

pub const FIXTURE_HEADER: [&str; 13] = [
    "id",
    "quantity",
    "ensemble",
    "alpha_sq",
    "intensity_gain",
    "eta1",
    "eta2",
    "t2_sq",
    "x",
    "expected",
    "provenance",
    "tolerance",
    "description",
];

/// Location of the committed fixture file in the source tree.
pub fn committed_path() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/derived.csv"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    Trivial,
    /// Quoted from the published source.
    Published,
    /// Produced by the named oracle.
    Derived(String),
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Trivial => f.write_str("trivial"),
            Provenance::Published => f.write_str("published"),
            Provenance::Derived(oracle) => write!(f, "derived+{oracle}"),
        }
    }
}

impl FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trivial" => Ok(Provenance::Trivial),
            "published" => Ok(Provenance::Published),
            _ => match s.strip_prefix("derived+") {
                Some(oracle) if !oracle.is_empty() => Ok(Provenance::Derived(oracle.to_string())),
                _ => Err(Error::Parse(format!(
                    "untagged or unknown provenance `{s}`"
                ))),
            },
        }
    }
}

/// The production quantity a fixture pins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    BesselI0Scaled,
    SuccessGiven,
    BinarySuccess,
    BinaryJoint,
    PhaseSuccess,
    PhaseJoint,
}

impl Quantity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Quantity::BesselI0Scaled => "bessel_i0_scaled",
            Quantity::SuccessGiven => "success_prob_given",
            Quantity::BinarySuccess => "binary_p_success",
            Quantity::BinaryJoint => "binary_p_joint",
            Quantity::PhaseSuccess => "phase_p_success",
            Quantity::PhaseJoint => "phase_p_joint",
        }
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Quantity::BesselI0Scaled,
            Quantity::SuccessGiven,
            Quantity::BinarySuccess,
            Quantity::BinaryJoint,
            Quantity::PhaseSuccess,
            Quantity::PhaseJoint,
        ]
        .into_iter()
        .find(|q| q.as_str() == s)
        .ok_or_else(|| Error::Parse(format!("unknown quantity `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureRecord {
    pub id: String,
    pub quantity: Quantity,
    pub ensemble: Option<EnsembleKind>,
    pub alpha_sq: Option<f64>,
    pub intensity_gain: Option<f64>,
    pub eta1: Option<f64>,
    pub eta2: Option<f64>,
    pub t2_sq: Option<f64>,
    pub x: Option<f64>,
    pub expected: f64,
    pub provenance: Provenance,
    pub tolerance: f64,
    pub description: String,
}

impl FixtureRecord {
    fn device(&self) -> Result<(f64, AmplifierConfig)> {
        let missing =
            |name: &'static str| Error::invalid(name, format!("fixture `{}` lacks it", self.id));
        let a2 = self.alpha_sq.ok_or_else(|| missing("alpha_sq"))?;
        let gain = self
            .intensity_gain
            .ok_or_else(|| missing("intensity_gain"))?;
        let t2 = self.t2_sq.ok_or_else(|| missing("t2_sq"))?;
        let d1 = DetectorModel::with_efficiency(self.eta1.unwrap_or(1.0))?;
        let d2 = DetectorModel::with_efficiency(self.eta2.unwrap_or(1.0))?;
        Ok((
            a2.sqrt(),
            AmplifierConfig::new(gain, t2)?.with_detectors(d1, d2),
        ))
    }

    /// `|value − expected| ≤ tolerance·|expected|`.
    pub fn accepts(&self, value: f64) -> bool {
        (value - self.expected).abs() <= self.tolerance * self.expected.abs()
    }
}

/// Parameter grids the fixtures are generated on.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureGrid {
    pub bessel_series_x: Vec<f64>,
    pub bessel_asymptotic_x: Vec<f64>,
    /// `(alpha_sq, gain, eta1)` with `t₂² = 0.95`, `η₂ = 1`.
    pub phase_points: Vec<(f64, f64, f64)>,
    /// `(alpha_sq, gain)` with `t₂² = 0.9`, ideal detectors.
    pub binary_points: Vec<(f64, f64)>,
    pub slow_mc_trials: u64,
}

impl Default for FixtureGrid {
    fn default() -> Self {
        let alpha_sq = [0.1, 0.5, 1.0];
        let mut phase_points = Vec::new();
        for &a2 in &alpha_sq {
            for &g in &[1.2, 2.0, 4.0, 8.0] {
                for &eta1 in &[0.5, 1.0] {
                    phase_points.push((a2, g, eta1));
                }
            }
        }
        let mut binary_points = Vec::new();
        for &a2 in &alpha_sq {
            for &g in &[1.5, 2.0, 4.0, 8.0] {
                binary_points.push((a2, g));
            }
        }
        Self {
            bessel_series_x: vec![0.0, 0.5, 1.0, 2.0, 5.0, 8.0, 10.0],
            bessel_asymptotic_x: vec![30.0, 50.0, 100.0],
            phase_points,
            binary_points,
            slow_mc_trials: 200_000,
        }
    }
}

const PHASE_T2_SQ: f64 = 0.95;
const BINARY_T2_SQ: f64 = 0.9;
const SLOW_MC_SEED: u64 = 20_240_501;

fn blank(
    id: String,
    quantity: Quantity,
    expected: f64,
    oracle: &str,
    tolerance: f64,
) -> FixtureRecord {
    FixtureRecord {
        id,
        quantity,
        ensemble: None,
        alpha_sq: None,
        intensity_gain: None,
        eta1: None,
        eta2: None,
        t2_sq: None,
        x: None,
        expected,
        provenance: Provenance::Derived(oracle.to_string()),
        tolerance,
        description: String::new(),
    }
}

/// Recomputes every fixture from its oracle.
pub fn generate(grid: &FixtureGrid) -> Result<Vec<FixtureRecord>> {
    let mut out = Vec::new();

    for &x in &grid.bessel_series_x {
        let mut r = blank(
            format!("bessel_series/x={x}"),
            Quantity::BesselI0Scaled,
            bessel_i0_scaled_series(x),
            "bessel_power_series_40",
            1e-12,
        );
        r.x = Some(x);
        r.description = "exp(-x) I0(x) from the 40-term power series".into();
        out.push(r);
    }

    for &x in &grid.bessel_asymptotic_x {
        let mut r = blank(
            format!("bessel_asymptotic/x={x}"),
            Quantity::BesselI0Scaled,
            bessel_i0_scaled_asymptotic_optimal(x),
            "bessel_asymptotic_series",
            1e-6,
        );
        r.x = Some(x);
        r.description = "exp(-x) I0(x) from the large-x expansion".into();
        out.push(r);
    }

    for &(a2, gain, eta1) in &grid.phase_points {
        let cfg = AmplifierConfig::new(gain, PHASE_T2_SQ)?
            .with_detectors(DetectorModel::with_efficiency(eta1)?, DetectorModel::IDEAL);
        let alpha = a2.sqrt();
        for (quantity, override_eta, what) in [
            (Quantity::PhaseSuccess, None, "success probability"),
            (
                Quantity::PhaseJoint,
                Some(eta1 + gain - PHASE_T2_SQ),
                "success-and-test joint probability",
            ),
        ] {
            let mut r = blank(
                format!("{}/a2={a2}/G={gain}/eta1={eta1}", quantity.as_str()),
                quantity,
                phase_quadrature_oracle(alpha, &cfg, override_eta)?,
                "phase_simpson_quadrature",
                1e-9,
            );
            r.ensemble = Some(EnsembleKind::PhaseCovariant);
            r.alpha_sq = Some(a2);
            r.intensity_gain = Some(gain);
            r.eta1 = Some(eta1);
            r.eta2 = Some(1.0);
            r.t2_sq = Some(PHASE_T2_SQ);
            r.description = format!("phase-covariant {what} by Simpson quadrature");
            out.push(r);
        }
    }

    for &(a2, gain) in &grid.binary_points {
        let cfg = AmplifierConfig::new(gain, BINARY_T2_SQ)?;
        let alpha = a2.sqrt();
        let guess = cfg.optimal_guess(ComplexAmplitude::real(alpha)?);
        let (p_s, p_ts) = binary_ensemble_average(alpha, guess, &cfg);
        for (quantity, value) in [
            (Quantity::BinarySuccess, p_s),
            (Quantity::BinaryJoint, p_ts),
        ] {
            let mut r = blank(
                format!("{}/a2={a2}/G={gain}", quantity.as_str()),
                quantity,
                value,
                "two_point_ensemble_average",
                1e-12,
            );
            r.ensemble = Some(EnsembleKind::Binary);
            r.alpha_sq = Some(a2);
            r.intensity_gain = Some(gain);
            r.eta1 = Some(1.0);
            r.eta2 = Some(1.0);
            r.t2_sq = Some(BINARY_T2_SQ);
            r.description = "binary average of the pure-state probabilities over +/-alpha".into();
            out.push(r);
        }
    }

    {
        // 1 − exp(−η₂Gα²(1/t₂² − 1)) at α = 1, G = 2, t₂² = 0.9, correct guess.
        let mut r = blank(
            "success_given/a=1/G=2".into(),
            Quantity::SuccessGiven,
            -(-2.0f64 * (1.0 / 0.9 - 1.0)).exp_m1(),
            "hand_substitution",
            1e-14,
        );
        r.alpha_sq = Some(1.0);
        r.intensity_gain = Some(2.0);
        r.eta1 = Some(1.0);
        r.eta2 = Some(1.0);
        r.t2_sq = Some(BINARY_T2_SQ);
        r.description = "pure-state success probability with the nulling guess".into();
        out.push(r);
    }

    if grid.slow_mc_trials > 0 {
        let (a2, gain) = (0.5, 4.0);
        let cfg = AmplifierConfig::new(gain, BINARY_T2_SQ)?;
        let ensemble = InputEnsemble::from_alpha_sq(EnsembleKind::Binary, a2)?;
        let s = Simulation::new(ensemble, cfg)
            .with_sampling(DetectionSampling::PhotonCounting)
            .estimate(grid.slow_mc_trials, SLOW_MC_SEED)?;
        let mut r = blank(
            format!("slow_mc_binary_p_success/a2={a2}/G={gain}"),
            Quantity::BinarySuccess,
            s.p_success.mean,
            "photon_counting_monte_carlo",
            4.0 * s.p_success.std_err / s.p_success.mean,
        );
        r.ensemble = Some(EnsembleKind::Binary);
        r.alpha_sq = Some(a2);
        r.intensity_gain = Some(gain);
        r.eta1 = Some(1.0);
        r.eta2 = Some(1.0);
        r.t2_sq = Some(BINARY_T2_SQ);
        r.description = format!(
            "photon-counting Monte Carlo, {} trials, seed {SLOW_MC_SEED}; tolerance is 4 standard errors",
            grid.slow_mc_trials
        );
        out.push(r);
    }

    Ok(out)
}

/// Value of the production code path that `record` pins.
pub fn evaluate_production(record: &FixtureRecord) -> Result<f64> {
    match record.quantity {
        Quantity::BesselI0Scaled => {
            bessel_i0_scaled(record.x.ok_or_else(|| Error::invalid("x", "missing"))?)
        }
        Quantity::SuccessGiven => {
            let (alpha, cfg) = record.device()?;
            let a = ComplexAmplitude::real(alpha)?;
            Ok(success_prob_given(a, cfg.optimal_guess(a), &cfg))
        }
        Quantity::BinarySuccess => {
            let (alpha, cfg) = record.device()?;
            binary_metrics(alpha, &cfg).map(|m| m.p_success)
        }
        Quantity::BinaryJoint => {
            let (alpha, cfg) = record.device()?;
            binary_metrics(alpha, &cfg).map(|m| m.p_joint)
        }
        Quantity::PhaseSuccess => {
            let (alpha, cfg) = record.device()?;
            phase_covariant_success_prob(alpha, &cfg)
        }
        Quantity::PhaseJoint => {
            let (alpha, cfg) = record.device()?;
            phase_covariant_joint_prob(alpha, &cfg)
        }
    }
}

/// Compares regenerated fixtures with committed ones. Reports ids that are
/// missing on either side and values that moved beyond the committed
/// tolerance.
pub fn check_drift(committed: &[FixtureRecord], regenerated: &[FixtureRecord]) -> Vec<String> {
    let mut problems = Vec::new();
    for c in committed {
        match regenerated.iter().find(|r| r.id == c.id) {
            None => problems.push(format!("{}: no longer generated", c.id)),
            Some(r) if !c.accepts(r.expected) => problems.push(format!(
                "{}: committed {} regenerated {} (tolerance {})",
                c.id, c.expected, r.expected, c.tolerance
            )),
            Some(_) => {}
        }
    }
    for r in regenerated {
        if !committed.iter().any(|c| c.id == r.id) {
            problems.push(format!("{}: not committed", r.id));
        }
    }
    problems
}

pub fn write_fixtures<W: Write>(records: &[FixtureRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(FIXTURE_HEADER)?;
    for r in records {
        w.write_record([
            r.id.clone(),
            r.quantity.as_str().to_string(),
            r.ensemble
                .map(|e| e.as_str().to_string())
                .unwrap_or_default(),
            opt_real(r.alpha_sq),
            opt_real(r.intensity_gain),
            opt_real(r.eta1),
            opt_real(r.eta2),
            opt_real(r.t2_sq),
            opt_real(r.x),
            real(r.expected),
            r.provenance.to_string(),
            real(r.tolerance),
            r.description.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_fixtures<R: Read>(reader: R) -> Result<Vec<FixtureRecord>> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.clone();
    if header.iter().ne(FIXTURE_HEADER.iter().copied()) {
        return Err(Error::Parse(format!(
            "unexpected fixture header {header:?}"
        )));
    }
    let mut out = Vec::new();
    for record in r.records() {
        let rec = record?;
        out.push(FixtureRecord {
            id: rec[0].to_string(),
            quantity: rec[1].parse()?,
            ensemble: if rec[2].is_empty() {
                None
            } else {
                Some(rec[2].parse()?)
            },
            alpha_sq: parse_opt_real(&rec[3])?,
            intensity_gain: parse_opt_real(&rec[4])?,
            eta1: parse_opt_real(&rec[5])?,
            eta2: parse_opt_real(&rec[6])?,
            t2_sq: parse_opt_real(&rec[7])?,
            x: parse_opt_real(&rec[8])?,
            expected: parse_real(&rec[9])?,
            provenance: rec[10].parse()?,
            tolerance: parse_real(&rec[11])?,
            description: rec[12].to_string(),
        });
    }
    Ok(out)
}

pub fn to_csv_string(records: &[FixtureRecord]) -> Result<String> {
    let mut buf = Vec::new();
    write_fixtures(records, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid() -> FixtureGrid {
        FixtureGrid {
            phase_points: vec![(0.5, 2.0, 1.0)],
            binary_points: vec![(0.5, 4.0)],
            slow_mc_trials: 0,
            ..FixtureGrid::default()
        }
    }

    #[test]
    fn provenance_tags_parse() {
        for tag in ["trivial", "published", "derived+phase_simpson_quadrature"] {
            assert_eq!(tag.parse::<Provenance>().unwrap().to_string(), tag);
        }
        assert!("derived+".parse::<Provenance>().is_err());
        assert!("".parse::<Provenance>().is_err());
    }

    #[test]
    fn appending_a_grid_point_adds_one_fixture() {
        let base = generate(&small_grid()).unwrap().len();
        let mut grid = small_grid();
        grid.bessel_series_x.push(7.0);
        assert_eq!(generate(&grid).unwrap().len(), base + 1);
    }

    #[test]
    fn zero_tolerance_detects_drift() {
        let regenerated = generate(&small_grid()).unwrap();
        let mut committed = regenerated.clone();
        assert!(check_drift(&committed, &regenerated).is_empty());
        let victim = committed
            .iter_mut()
            .find(|r| r.quantity == Quantity::PhaseSuccess)
            .unwrap();
        victim.expected *= 1.0 + 1e-12;
        assert!(check_drift(&committed, &regenerated).is_empty());
        for r in &mut committed {
            r.tolerance = 0.0;
        }
        assert_eq!(check_drift(&committed, &regenerated).len(), 1);
    }

    #[test]
    fn missing_and_extra_ids_are_reported() {
        let regenerated = generate(&small_grid()).unwrap();
        let committed = regenerated[1..].to_vec();
        assert_eq!(check_drift(&committed, &regenerated).len(), 1);
        assert_eq!(check_drift(&regenerated, &committed).len(), 1);
    }

    #[test]
    fn csv_round_trip() {
        let records = generate(&small_grid()).unwrap();
        let text = to_csv_string(&records).unwrap();
        assert_eq!(read_fixtures(text.as_bytes()).unwrap(), records);
    }
}
