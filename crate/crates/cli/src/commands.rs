//! `evolve` and `sweep-tc`.

use std::fmt::Write as _;

use ising_ge::analysis::{
    critical_time, fit_decay_in, normalized, run_ensemble, run_saturation, saturation_stats,
    scaling_exponent, CriticalTime, EnsembleResult, FitOutcome, SaturationStats,
};
use ising_ge::model::binomial;
use ising_ge::{spectral_scales, ModelParams, Regime};

use crate::config::{ExperimentConfig, Format, Point};
use crate::output::{raw_csv, series_csv, OutputDir, Summary, TC_HEADER};
use crate::AppError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    P1,
    P2,
}

impl Measure {
    pub const BOTH: [Measure; 2] = [Measure::P1, Measure::P2];

    pub fn as_str(&self) -> &'static str {
        match self {
            Measure::P1 => "P1",
            Measure::P2 => "P2",
        }
    }

    pub fn series<'a>(&self, r: &'a EnsembleResult) -> &'a [f64] {
        match self {
            Measure::P1 => &r.p1.mean,
            Measure::P2 => &r.p2.mean,
        }
    }
}

/// Critical time of the mean series rescaled by its initial value.
pub fn rescaled_critical_time(
    r: &EnsembleResult,
    m: Measure,
    threshold: f64,
) -> Result<CriticalTime, AppError> {
    Ok(critical_time(&r.times, &normalized(m.series(r))?, threshold)?)
}

pub struct EvolveReport {
    pub result: EnsembleResult,
    pub saturation: SaturationStats,
    pub extensions: usize,
    pub summary: Summary,
}

fn fit_lines(s: &mut Summary, key: &str, outcome: ising_ge::Result<FitOutcome>) {
    match outcome {
        Ok(FitOutcome::NoDecay) => {
            s.push(format!("{key}.model"), "none");
            s.push(format!("{key}.regime"), Regime::Perturbative);
        }
        Ok(FitOutcome::Fitted(f)) => {
            s.push(format!("{key}.model"), f.model.as_str());
            s.push(format!("{key}.rate"), f.rate);
            s.push_opt(format!("{key}.constant"), f.constant);
            s.push(format!("{key}.residual"), f.residual);
            s.push(format!("{key}.exp_rate"), f.exp_rate);
            s.push(format!("{key}.exp_residual"), f.exp_residual);
            s.push(format!("{key}.gauss_rate"), f.gauss_rate);
            s.push(format!("{key}.gauss_residual"), f.gauss_residual);
            s.push(format!("{key}.window_start"), f.window.0);
            s.push(format!("{key}.window_end"), f.window.1);
            s.push(format!("{key}.points"), f.points);
        }
        Err(e) => s.push(format!("{key}.model"), format!("error: {e}")),
    }
}

/// Runs one ensemble and assembles the fit, crossing and plateau summary.
pub fn run_evolve(cfg: &ExperimentConfig, point: Point) -> Result<EvolveReport, AppError> {
    let ens = cfg.ensemble_config(point)?;
    let (result, saturation, extensions) = if cfg.evolution.extensions > 0 {
        run_saturation(&ens, cfg.analysis.rescaling, cfg.evolution.extensions)?
    } else {
        let r = run_ensemble(&ens)?;
        let s = saturation_stats(&r, cfg.analysis.rescaling)?;
        (r, s, 0)
    };
    let sc = &result.scales;
    let mut s = Summary::default();
    s.push("n", sc.n);
    s.push("rows", cfg.lattice.rows);
    s.push("cols", cfg.lattice.cols);
    s.push("Delta", cfg.model.splitting);
    s.push("delta", point.delta);
    s.push("J", point.coupling);
    s.push("state", &cfg.state.designator);
    s.push("realizations", cfg.ensemble.realizations);
    s.push("seed", cfg.ensemble.seed);
    s.push("backend", result.backend.as_str());
    s.push("error_estimate", result.error_estimate);
    s.push("t_max", result.times[result.times.len() - 1]);
    s.push("samples", result.times.len());
    s.push("band.k", sc.k);
    s.push("band.E_B", sc.band_energy);
    s.push("band.N_B", sc.band_degeneracy);
    s.push("band.Delta_B", sc.band_width);
    s.push_opt("Gamma_F", sc.gamma_fgr);
    s.push("Gamma_E", sc.gamma_ergodic);
    s.push_opt("J_c", sc.j_critical);
    s.push_opt("J_E", sc.j_ergodic);
    s.push("regime", sc.regime);
    s.push("P1_0", result.p1.mean[0]);
    s.push("P2_0", result.p2.mean[0]);
    let window = &cfg.analysis.fit_window;
    fit_lines(&mut s, "fit.P1", fit_decay_in(&result.times, &result.p1.mean, sc, window));
    fit_lines(&mut s, "fit.P2", fit_decay_in(&result.times, &result.p2.mean, sc, window));
    fit_lines(&mut s, "fit.F", fit_decay_in(&result.times, &result.fidelity.mean, sc, window));
    s.push("K", cfg.analysis.threshold);
    for m in Measure::BOTH {
        match rescaled_critical_time(&result, m, cfg.analysis.threshold) {
            Ok(tc) => {
                s.push(format!("tc.{}", m.as_str()), tc.value());
                s.push(format!("tc.{}.censored", m.as_str()), tc.is_censored());
            }
            Err(e) => s.push(format!("tc.{}", m.as_str()), format!("error: {e}")),
        }
    }
    let sat = &saturation;
    s.push("saturation.P1_inf", sat.p1_inf.mean);
    s.push("saturation.P1_inf_sem", sat.p1_inf.sem);
    s.push("saturation.xi_inf", sat.xi_inf.mean);
    s.push("saturation.xi_inf_sem", sat.xi_inf.sem);
    s.push("saturation.I_inf", sat.ipr_inf.mean);
    s.push("saturation.I_inf_sem", sat.ipr_inf.sem);
    s.push("saturation.N_inf", sat.n_inf);
    s.push("saturation.P1_pred", sat.p1_pred);
    s.push("saturation.xi_pred", sat.xi_pred);
    s.push("saturation.I_pred", sat.ipr_pred);
    s.push("saturation.P1_ratio", sat.p1_inf.mean / sat.p1_pred);
    s.push("saturation.I_ratio", sat.ipr_inf.mean / sat.ipr_pred);
    s.push("saturation.I_minus_1", sat.ipr_minus_one);
    s.push("saturation.R", sat.rescaling);
    s.push("saturation.rescaled_inverse_P1", sat.rescaled_inverse_p1);
    s.push("saturation.plateau", sat.plateau);
    s.push("saturation.drift_P1", sat.drift_p1);
    s.push("saturation.drift_xi", sat.drift_xi);
    s.push("saturation.extensions", extensions);
    if !sat.plateau {
        s.push("saturation.notice", "no plateau detected; extend t_max or raise evolution.extensions");
    }
    Ok(EvolveReport { result, saturation, extensions, summary: s })
}

/// Writes `series.csv`, `summary.txt` and, if requested, per-realization files.
pub fn write_evolve(
    out: &mut OutputDir,
    prefix: &str,
    cfg: &ExperimentConfig,
    report: &EvolveReport,
) -> Result<(), AppError> {
    let r = &report.result;
    if cfg.output.wants(Format::Csv) {
        out.write(&format!("{prefix}series.csv"), &series_csv(r))?;
    }
    if cfg.output.wants(Format::Summary) {
        out.write(&format!("{prefix}summary.txt"), &report.summary.render())?;
    }
    if cfg.output.wants(Format::Raw) {
        for real in &r.realizations {
            out.write(&format!("{prefix}raw/realization_{:04}.csv", real.index), &raw_csv(&r.times, real))?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TcRow {
    pub delta: f64,
    pub coupling: f64,
    pub regime: Regime,
    pub tc: CriticalTime,
    pub measure: Measure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Fgr,
    Ergodic,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Fgr => "fgr",
            Branch::Ergodic => "ergodic",
        }
    }

    fn of(regime: Regime) -> Option<Branch> {
        match regime {
            Regime::Perturbative => None,
            Regime::Fgr => Some(Branch::Fgr),
            Regime::Ergodic => Some(Branch::Ergodic),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeRow {
    pub delta: f64,
    pub measure: Measure,
    pub branch: Branch,
    /// `None` when fewer than three uncensored points fall on the branch.
    pub slope: Option<(f64, f64)>,
    pub points: usize,
    pub censored: usize,
}

pub struct SweepReport {
    pub rows: Vec<TcRow>,
    pub slopes: Vec<SlopeRow>,
    pub failures: Vec<String>,
    pub summary: Summary,
}

impl SweepReport {
    pub fn slope(&self, delta: f64, measure: Measure, branch: Branch) -> Option<f64> {
        self.slopes
            .iter()
            .find(|s| s.delta == delta && s.measure == measure && s.branch == branch)
            .and_then(|s| s.slope.map(|(m, _)| m))
    }

    pub fn tc_csv(&self) -> String {
        let mut s = String::from(TC_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.delta,
                r.coupling,
                r.coupling / r.delta,
                r.tc.value(),
                r.tc.is_censored(),
                r.measure.as_str()
            );
        }
        s
    }
}

/// Critical times over every `(δ, J)` point, with log-log slopes per branch.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepReport, AppError> {
    let points = cfg.points()?;
    let n = cfg.lattice()?.n();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for p in &points {
        let outcome = (|| -> Result<Vec<TcRow>, AppError> {
            let r = run_ensemble(&cfg.ensemble_config(*p)?)?;
            Measure::BOTH
                .iter()
                .map(|&m| {
                    Ok(TcRow {
                        delta: p.delta,
                        coupling: p.coupling,
                        regime: r.scales.regime,
                        tc: rescaled_critical_time(&r, m, cfg.analysis.threshold)?,
                        measure: m,
                    })
                })
                .collect()
        })();
        match outcome {
            Ok(mut r) => rows.append(&mut r),
            Err(e) => failures.push(format!("delta={} J={}: {e}", p.delta, p.coupling)),
        }
    }

    let mut summary = Summary::default();
    summary.push("n", n);
    summary.push("state", &cfg.state.designator);
    summary.push("Delta", cfg.model.splitting);
    summary.push("K", cfg.analysis.threshold);
    summary.push("realizations", cfg.ensemble.realizations);
    summary.push("seed", cfg.ensemble.seed);
    summary.push("points", points.len());
    let mut deltas: Vec<f64> = points.iter().map(|p| p.delta).collect();
    deltas.dedup();
    let mut slopes = Vec::new();
    for &delta in &deltas {
        let params = ModelParams::new(cfg.model.splitting, delta, 0.0)?;
        let sc = spectral_scales(&params, n, n / 2)?;
        summary.push_opt(format!("delta={delta}.J_c"), sc.j_critical);
        summary.push_opt(format!("delta={delta}.J_E"), sc.j_ergodic);
        for m in Measure::BOTH {
            let mine: Vec<&TcRow> =
                rows.iter().filter(|r| r.delta == delta && r.measure == m).collect();
            if !mine.is_empty() && mine.iter().all(|r| r.tc.is_censored()) {
                summary.push(
                    format!("delta={delta}.{}.notice", m.as_str()),
                    "all critical times censored; slopes omitted",
                );
                continue;
            }
            for branch in [Branch::Fgr, Branch::Ergodic] {
                let pts: Vec<(f64, CriticalTime)> = mine
                    .iter()
                    .filter(|r| Branch::of(r.regime) == Some(branch))
                    .map(|r| (r.coupling, r.tc))
                    .collect();
                let censored = pts.iter().filter(|(_, t)| t.is_censored()).count();
                let fit = scaling_exponent(&pts).ok();
                let key = format!("delta={delta}.{}.{}", m.as_str(), branch.as_str());
                match &fit {
                    Some(f) => {
                        summary.push(format!("{key}.slope"), f.fit.slope);
                        summary.push(format!("{key}.slope_stderr"), f.fit.slope_stderr);
                    }
                    None => summary.push(format!("{key}.slope"), "none"),
                }
                summary.push(format!("{key}.points"), pts.len() - censored);
                summary.push(format!("{key}.censored"), censored);
                slopes.push(SlopeRow {
                    delta,
                    measure: m,
                    branch,
                    slope: fit.map(|f| (f.fit.slope, f.fit.slope_stderr)),
                    points: pts.len() - censored,
                    censored,
                });
            }
        }
    }
    for (i, f) in failures.iter().enumerate() {
        summary.push(format!("failure.{i}"), f);
    }
    Ok(SweepReport { rows, slopes, failures, summary })
}

pub fn write_sweep(
    out: &mut OutputDir,
    prefix: &str,
    cfg: &ExperimentConfig,
    report: &SweepReport,
) -> Result<(), AppError> {
    if cfg.output.wants(Format::Csv) {
        out.write(&format!("{prefix}tc.csv"), &report.tc_csv())?;
    }
    if cfg.output.wants(Format::Summary) {
        out.write(&format!("{prefix}summary.txt"), &report.summary.render())?;
    }
    Ok(())
}

/// `C (J/δ)² N_B(n/2)`, the guide line drawn against saturated `I − 1`.
pub fn saturation_guide(c: f64, coupling: f64, delta: f64, n: usize) -> f64 {
    c * (coupling / delta).powi(2) * binomial(n, n / 2)
}
