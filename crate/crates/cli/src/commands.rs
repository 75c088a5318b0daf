use std::io::Write;

use anyhow::Result;
use serde::Serialize;

use sca_core::analytic::{
    binary_metrics, binary_quadrature_moments, phase_covariant_joint_prob, phase_covariant_metrics,
    phase_covariant_success_prob,
};
use sca_core::experiments::sweep::point_seed;
use sca_core::experiments::{
    phase_quadrature_oracle, sweep_all, write_csv, GainGrid, Mode, Preset, SweepRow, SweepSpec,
};
use sca_core::montecarlo::{estimate, Estimate};
use sca_core::oracles::binary_ensemble_average;
use sca_core::{AmplifierConfig, ComplexAmplitude, DetectorModel, EnsembleKind, InputEnsemble};

use crate::args::{
    CompareArgs, DeviceArgs, EvalArgs, Format, OracleArgs, SamplingArgs, SimulateArgs, SweepArgs,
};
use crate::exit::{Mismatch, Usage};
use crate::output::{emit, opt_real, opt_short, real, short, writer, Record};

const DEFAULT_ALPHA_SQ: [f64; 3] = [0.1, 0.5, 1.0];
const DEFAULT_GAINS: [f64; 4] = [1.5, 2.0, 4.0, 8.0];
/// Largest tolerated |z| between a closed form and its Monte Carlo estimate.
const Z_LIMIT: f64 = 4.0;
/// Largest tolerated relative gap between a closed form and its oracle.
const ORACLE_TOLERANCE: f64 = 1e-9;

/// Validated grid of points shared by every subcommand.
struct Grid {
    spec: SweepSpec,
}

impl Grid {
    fn new(
        device: &DeviceArgs,
        mode: Mode,
        sampling: Option<&SamplingArgs>,
        defaults: bool,
    ) -> Result<Self> {
        let ensemble = device.ensemble()?;
        let alpha_sq = match (device.alpha_sq.is_empty(), defaults) {
            (false, _) => device.alpha_sq.clone(),
            (true, true) => DEFAULT_ALPHA_SQ.to_vec(),
            (true, false) => return Err(Usage("--alpha-sq is required".into()).into()),
        };
        let gains = match (device.gain_grid(), defaults) {
            (Some(g), _) => g,
            (None, true) => GainGrid::Explicit(DEFAULT_GAINS.to_vec()),
            (None, false) => {
                return Err(Usage(
                    "--intensity-gain or --gain-min/--gain-max/--gain-steps is required".into(),
                )
                .into())
            }
        };
        let mut spec = SweepSpec::new(ensemble, alpha_sq, gains, device.t2_sq(ensemble));
        spec.eta1 = device.eta1;
        spec.eta2 = device.eta2;
        spec.dark1 = device.dark1;
        spec.dark2 = device.dark2;
        spec.mode = mode;
        if let Some(s) = sampling {
            spec.n_trials = s.trials;
            spec.seed = s.seed;
        }
        spec.validate()?;
        Ok(Self { spec })
    }

    /// `(flat index, alpha_sq, config)` in sweep order.
    fn points(&self) -> Result<Vec<(u64, f64, AmplifierConfig)>> {
        let gains = self.spec.gain_grid.points();
        let mut out = Vec::new();
        for &a2 in &self.spec.alpha_sq_list {
            for &g in &gains {
                out.push((out.len() as u64, a2, self.spec.config(g)?));
            }
        }
        Ok(out)
    }
}

fn format_or(f: Option<Format>, default: Format) -> Format {
    f.unwrap_or(default)
}

#[derive(Debug, Serialize)]
pub struct EvalRecord {
    ensemble: EnsembleKind,
    alpha_sq: f64,
    intensity_gain: f64,
    t2_sq: f64,
    eta1: f64,
    eta2: f64,
    p_success: f64,
    p_joint: f64,
    fidelity: f64,
    p_plus_given_s: Option<f64>,
    p_minus_given_s: Option<f64>,
    noise_figure: Option<f64>,
}

impl Record for EvalRecord {
    const HEADER: &'static [&'static str] = &[
        "ensemble",
        "alpha_sq",
        "intensity_gain",
        "t2_sq",
        "eta1",
        "eta2",
        "p_success",
        "p_joint",
        "fidelity",
        "p_plus_given_s",
        "p_minus_given_s",
        "noise_figure",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.ensemble.to_string(),
            real(self.alpha_sq),
            real(self.intensity_gain),
            real(self.t2_sq),
            real(self.eta1),
            real(self.eta2),
            real(self.p_success),
            real(self.p_joint),
            real(self.fidelity),
            opt_real(self.p_plus_given_s),
            opt_real(self.p_minus_given_s),
            opt_real(self.noise_figure),
        ]
    }

    fn human(&self) -> String {
        let mut line = format!(
            "{} alpha^2={} G={} t2^2={} eta1={} eta2={}: P(S)={} P(T,S)={} fidelity={}",
            self.ensemble,
            self.alpha_sq,
            self.intensity_gain,
            self.t2_sq,
            self.eta1,
            self.eta2,
            short(self.p_success),
            short(self.p_joint),
            short(self.fidelity),
        );
        if let (Some(p), Some(m), Some(nf)) =
            (self.p_plus_given_s, self.p_minus_given_s, self.noise_figure)
        {
            line += &format!(
                " P(+a|S)={} P(-a|S)={} NF={}",
                short(p),
                short(m),
                short(nf)
            );
        }
        line
    }
}

pub fn eval(args: &EvalArgs) -> Result<()> {
    let grid = Grid::new(&args.device, Mode::Analytic, None, false)?;
    let spec = &grid.spec;
    let mut records = Vec::new();
    for (_, a2, cfg) in grid.points()? {
        let alpha = a2.sqrt();
        let mut r = EvalRecord {
            ensemble: spec.ensemble,
            alpha_sq: a2,
            intensity_gain: cfg.intensity_gain(),
            t2_sq: spec.t2_sq,
            eta1: spec.eta1,
            eta2: spec.eta2,
            p_success: 0.0,
            p_joint: 0.0,
            fidelity: 0.0,
            p_plus_given_s: None,
            p_minus_given_s: None,
            noise_figure: None,
        };
        match spec.ensemble {
            EnsembleKind::Binary => {
                let m = binary_metrics(alpha, &cfg)?;
                let q = binary_quadrature_moments(alpha, &cfg)?;
                r.p_success = m.p_success;
                r.p_joint = m.p_joint;
                r.fidelity = m.fidelity;
                r.p_plus_given_s = Some(m.p_plus_given_s);
                r.p_minus_given_s = Some(m.p_minus_given_s);
                r.noise_figure = Some(q.noise_figure);
            }
            EnsembleKind::PhaseCovariant => {
                let m = phase_covariant_metrics(alpha, &cfg)?;
                r.p_success = m.p_success;
                r.p_joint = m.p_joint;
                r.fidelity = m.fidelity;
            }
        }
        records.push(r);
    }
    emit(
        &records,
        format_or(args.output.format, Format::Human),
        &args.output,
    )
}

#[derive(Debug, Serialize)]
pub struct SimulateRecord {
    ensemble: EnsembleKind,
    alpha_sq: f64,
    intensity_gain: f64,
    t2_sq: f64,
    eta1: f64,
    eta2: f64,
    dark1: f64,
    dark2: f64,
    seed: u64,
    n_trials: u64,
    n_accepted: u64,
    p_success: Estimate,
    fidelity: Option<Estimate>,
    fidelity_sampled: Option<Estimate>,
    noise_figure: Option<Estimate>,
}

fn est_fields(e: Option<Estimate>) -> [String; 2] {
    [opt_real(e.map(|e| e.mean)), opt_real(e.map(|e| e.std_err))]
}

fn est_human(e: Option<Estimate>) -> String {
    match e {
        Some(e) => format!("{} ± {}", short(e.mean), short(e.std_err)),
        None => "-".into(),
    }
}

impl Record for SimulateRecord {
    const HEADER: &'static [&'static str] = &[
        "ensemble",
        "alpha_sq",
        "intensity_gain",
        "t2_sq",
        "eta1",
        "eta2",
        "dark1",
        "dark2",
        "seed",
        "n_trials",
        "n_accepted",
        "p_success",
        "p_success_se",
        "fidelity",
        "fidelity_se",
        "fidelity_sampled",
        "fidelity_sampled_se",
        "noise_figure",
        "noise_figure_se",
    ];

    fn fields(&self) -> Vec<String> {
        let mut f = vec![
            self.ensemble.to_string(),
            real(self.alpha_sq),
            real(self.intensity_gain),
            real(self.t2_sq),
            real(self.eta1),
            real(self.eta2),
            real(self.dark1),
            real(self.dark2),
            self.seed.to_string(),
            self.n_trials.to_string(),
            self.n_accepted.to_string(),
        ];
        for e in [
            Some(self.p_success),
            self.fidelity,
            self.fidelity_sampled,
            self.noise_figure,
        ] {
            f.extend(est_fields(e));
        }
        f
    }

    fn human(&self) -> String {
        format!(
            "{} alpha^2={} G={} ({} trials, {} accepted, seed {}): P(S)={} fidelity={} sampled test={} NF={}",
            self.ensemble,
            self.alpha_sq,
            self.intensity_gain,
            self.n_trials,
            self.n_accepted,
            self.seed,
            est_human(Some(self.p_success)),
            est_human(self.fidelity),
            est_human(self.fidelity_sampled),
            est_human(self.noise_figure),
        )
    }
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let grid = Grid::new(&args.device, Mode::MonteCarlo, Some(&args.sampling), false)?;
    let spec = &grid.spec;
    let mut records = Vec::new();
    for (i, a2, cfg) in grid.points()? {
        let seed = point_seed(spec.seed, i);
        let ensemble = InputEnsemble::from_alpha_sq(spec.ensemble, a2)?;
        let s = estimate(&ensemble, &cfg, spec.n_trials, seed)?;
        records.push(SimulateRecord {
            ensemble: spec.ensemble,
            alpha_sq: a2,
            intensity_gain: cfg.intensity_gain(),
            t2_sq: spec.t2_sq,
            eta1: spec.eta1,
            eta2: spec.eta2,
            dark1: spec.dark1,
            dark2: spec.dark2,
            seed,
            n_trials: s.n_trials,
            n_accepted: s.n_accepted,
            p_success: s.p_success,
            fidelity: s.fidelity,
            fidelity_sampled: s.fidelity_sampled,
            noise_figure: s.noise_figure,
        });
    }
    emit(
        &records,
        format_or(args.output.format, Format::Human),
        &args.output,
    )
}

fn sweep_human(r: &SweepRow) -> String {
    format!(
        "{:<7} {:>6} {:>10.6} {:>4} {:>4} {:>5} {:<8} P(S)={} F={} NF={}",
        r.ensemble.as_str(),
        r.alpha_sq,
        r.intensity_gain,
        r.eta1,
        r.eta2,
        r.t2_sq,
        r.source.as_str(),
        short(r.p_success),
        opt_short(r.fidelity),
        opt_short(r.noise_figure),
    )
}

pub fn sweep(args: &SweepArgs) -> Result<()> {
    let mode = Mode::from(args.mode);
    let specs = match args.preset {
        Some(p) => Preset::from(p).specs_with(mode, args.sampling.trials, args.sampling.seed),
        None => vec![Grid::new(&args.device, mode, Some(&args.sampling), false)?.spec],
    };
    for s in &specs {
        s.validate()?;
    }
    let rows = sweep_all(&specs)?;
    let mut w = writer(&args.output)?;
    match format_or(args.output.format, Format::Csv) {
        Format::Csv => write_csv(&rows, &mut w)?,
        Format::Jsonl => {
            for r in &rows {
                writeln!(w, "{}", serde_json::to_string(r)?)?;
            }
        }
        Format::Human => {
            for r in &rows {
                writeln!(w, "{}", sweep_human(r))?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct CheckRecord {
    ensemble: EnsembleKind,
    alpha_sq: f64,
    intensity_gain: f64,
    quantity: &'static str,
    analytic: f64,
    reference: f64,
    /// Standard error of the reference (Monte Carlo only).
    reference_se: Option<f64>,
    /// z-score for Monte Carlo references, relative gap for oracles.
    score: f64,
    pass: bool,
}

impl Record for CheckRecord {
    const HEADER: &'static [&'static str] = &[
        "ensemble",
        "alpha_sq",
        "intensity_gain",
        "quantity",
        "analytic",
        "reference",
        "reference_se",
        "score",
        "pass",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.ensemble.to_string(),
            real(self.alpha_sq),
            real(self.intensity_gain),
            self.quantity.to_string(),
            real(self.analytic),
            real(self.reference),
            opt_real(self.reference_se),
            real(self.score),
            self.pass.to_string(),
        ]
    }

    fn human(&self) -> String {
        let score = match self.reference_se {
            Some(se) => format!("± {} z={:+.3}", short(se), self.score),
            None => format!("rel={:.3e}", self.score),
        };
        format!(
            "{} {} {} alpha^2={} G={}: analytic={:.10} reference={:.10} {score}",
            if self.pass { "ok  " } else { "FAIL" },
            self.ensemble,
            self.quantity,
            self.alpha_sq,
            self.intensity_gain,
            self.analytic,
            self.reference,
        )
    }
}

fn finish_checks(
    records: &[CheckRecord],
    format: Format,
    args: &crate::args::OutputArgs,
) -> Result<()> {
    emit(records, format, args)?;
    let failed = records.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        return Err(Mismatch(format!("{failed} of {} checks disagree", records.len())).into());
    }
    Ok(())
}

pub fn compare(args: &CompareArgs) -> Result<()> {
    let grid = Grid::new(&args.device, Mode::Both, Some(&args.sampling), true)?;
    let spec = &grid.spec;
    let mc_d1 = match args.inject_mc_eta1 {
        Some(eta) => Some(DetectorModel::new(eta, spec.dark1)?),
        None => None,
    };
    let mut records = Vec::new();
    for (i, a2, cfg) in grid.points()? {
        let alpha = a2.sqrt();
        let (p, f, nf) = match spec.ensemble {
            EnsembleKind::Binary => {
                let m = binary_metrics(alpha, &cfg)?;
                let q = binary_quadrature_moments(alpha, &cfg)?;
                (m.p_success, m.fidelity, Some(q.noise_figure))
            }
            EnsembleKind::PhaseCovariant => {
                let m = phase_covariant_metrics(alpha, &cfg)?;
                (m.p_success, m.fidelity, None)
            }
        };
        let mc_cfg = match mc_d1 {
            Some(d1) => cfg.with_detectors(d1, cfg.d2()),
            None => cfg,
        };
        let ensemble = InputEnsemble::from_alpha_sq(spec.ensemble, a2)?;
        let s = estimate(&ensemble, &mc_cfg, spec.n_trials, point_seed(spec.seed, i))?;
        let mut check = |quantity: &'static str, analytic: f64, mc: Option<Estimate>| {
            let (reference, se, z) = match mc {
                Some(e) => (e.mean, Some(e.std_err), e.z_score(analytic)),
                None => (f64::NAN, None, f64::INFINITY),
            };
            records.push(CheckRecord {
                ensemble: spec.ensemble,
                alpha_sq: a2,
                intensity_gain: cfg.intensity_gain(),
                quantity,
                analytic,
                reference,
                reference_se: se,
                score: z,
                pass: z.abs() <= Z_LIMIT,
            });
        };
        check("p_success", p, Some(s.p_success));
        check("fidelity", f, s.fidelity);
        if let Some(nf) = nf {
            check("noise_figure", nf, s.noise_figure);
        }
    }
    finish_checks(
        &records,
        format_or(args.output.format, Format::Human),
        &args.output,
    )
}

pub fn oracle(args: &OracleArgs) -> Result<()> {
    let grid = Grid::new(&args.device, Mode::Analytic, None, true)?;
    let spec = &grid.spec;
    let mut records = Vec::new();
    for (_, a2, cfg) in grid.points()? {
        let alpha = a2.sqrt();
        let pairs: [(&'static str, f64, f64); 2] = match spec.ensemble {
            EnsembleKind::Binary => {
                let m = binary_metrics(alpha, &cfg)?;
                let guess = cfg.optimal_guess(ComplexAmplitude::real(alpha)?);
                let (ps, pts) = binary_ensemble_average(alpha, guess, &cfg);
                [("p_success", m.p_success, ps), ("p_joint", m.p_joint, pts)]
            }
            EnsembleKind::PhaseCovariant => {
                let shifted = cfg.d1().eta() + cfg.intensity_gain() - cfg.t2_sq();
                [
                    (
                        "p_success",
                        phase_covariant_success_prob(alpha, &cfg)?,
                        phase_quadrature_oracle(alpha, &cfg, None)?,
                    ),
                    (
                        "p_joint",
                        phase_covariant_joint_prob(alpha, &cfg)?,
                        phase_quadrature_oracle(alpha, &cfg, Some(shifted))?,
                    ),
                ]
            }
        };
        for (quantity, analytic, reference) in pairs {
            let gap = if reference == 0.0 {
                analytic.abs()
            } else {
                ((analytic - reference) / reference).abs()
            };
            records.push(CheckRecord {
                ensemble: spec.ensemble,
                alpha_sq: a2,
                intensity_gain: cfg.intensity_gain(),
                quantity,
                analytic,
                reference,
                reference_se: None,
                score: gap,
                pass: gap <= ORACLE_TOLERANCE,
            });
        }
    }
    finish_checks(
        &records,
        format_or(args.output.format, Format::Human),
        &args.output,
    )
}
