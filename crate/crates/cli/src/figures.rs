//! Preset experiments behind `figure <id>`.

use std::fmt::Write as _;
use std::str::FromStr;

use ising_ge::analysis::{log_grid, normalized};
use ising_ge::model::binomial;
use ising_ge::{spectral_scales, Error, ModelParams};

use crate::commands::{run_evolve, run_sweep, saturation_guide, write_evolve, write_sweep, EvolveReport};
use crate::config::{
    ExperimentConfig, Horizon, JGrid, LatticeSection, ModelSection, OneOrMany, Point,
    StateSection, MAX_RUN_QUBITS,
};
use crate::output::{OutputDir, Summary};
use crate::AppError;

/// Guide constant for the saturation line.
pub const GUIDE_C: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "fig1" => Ok(FigureId::Fig1),
            "fig2" => Ok(FigureId::Fig2),
            "fig3" => Ok(FigureId::Fig3),
            "fig4" => Ok(FigureId::Fig4),
            other => Err(Error::InvalidParams(format!("unknown figure `{other}` (fig1..fig4)"))),
        }
    }
}

/// Everything a preset run produced besides its files.
#[derive(Default)]
pub struct FigureRun {
    pub configs: Vec<ExperimentConfig>,
    pub failures: Vec<String>,
    pub summary: Summary,
}

impl FigureRun {
    fn record<T>(&mut self, label: &str, r: Result<T, AppError>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.failures.push(format!("{label}: {e}"));
                None
            }
        }
    }
}

fn preset(n: usize, splitting: f64, delta: OneOrMany, coupling: OneOrMany, state: &str) -> ExperimentConfig {
    ExperimentConfig {
        lattice: LatticeSection { rows: 2, cols: n / 2 },
        model: ModelSection { splitting, delta, coupling: Some(coupling), coupling_grid: None },
        state: StateSection { designator: state.into() },
        evolution: Default::default(),
        ensemble: Default::default(),
        analysis: Default::default(),
        output: Default::default(),
    }
}

fn sweep_preset(n: usize, splitting: f64, deltas: Vec<f64>, state: &str) -> ExperimentConfig {
    let mut cfg = preset(n, splitting, OneOrMany::Many(deltas), OneOrMany::One(0.0), state);
    cfg.model.coupling = None;
    cfg.model.coupling_grid = Some(JGrid::default());
    cfg
}

fn check_n(n: usize) -> Result<(), AppError> {
    if n < 4 || n % 2 == 1 || n > MAX_RUN_QUBITS {
        return Err(Error::InvalidParams(format!(
            "figure presets need an even n in 4..={MAX_RUN_QUBITS}, got {n}"
        ))
        .into());
    }
    Ok(())
}

pub fn run_figure(id: FigureId, n: usize, out: &mut OutputDir) -> Result<FigureRun, AppError> {
    check_n(n)?;
    let mut run = FigureRun::default();
    run.summary.push("n", n);
    match id {
        FigureId::Fig1 => fig1(n, out, &mut run)?,
        FigureId::Fig2 => fig2(n, out, &mut run)?,
        FigureId::Fig3 => fig3(n, out, &mut run)?,
        FigureId::Fig4 => fig4(n, out, &mut run)?,
    }
    for (i, f) in run.failures.iter().enumerate() {
        run.summary.push(format!("failure.{i}"), f);
    }
    out.write("summary.txt", &run.summary.render())?;
    Ok(run)
}

fn evolve_into(
    out: &mut OutputDir,
    run: &mut FigureRun,
    label: &str,
    cfg: ExperimentConfig,
    point: Point,
) -> Result<Option<EvolveReport>, AppError> {
    let report = run.record(label, run_evolve(&cfg, point));
    if let Some(r) = &report {
        write_evolve(out, &format!("{label}/"), &cfg, r)?;
        run.summary.extend_prefixed(label, r.summary.clone());
    }
    run.configs.push(cfg);
    Ok(report)
}

/// Critical-time sweeps at four disorder strengths, plus the two decay shapes.
fn fig1(n: usize, out: &mut OutputDir, run: &mut FigureRun) -> Result<(), AppError> {
    let cfg = sweep_preset(n, 1.0, vec![0.02, 0.05, 0.1, 0.2], "central");
    if let Some(rep) = run.record("sweep", run_sweep(&cfg)) {
        write_sweep(out, "sweep/", &cfg, &rep)?;
        run.failures.extend(rep.failures.iter().map(|f| format!("sweep: {f}")));
        run.summary.extend_prefixed("sweep", rep.summary);
    }
    run.configs.push(cfg);
    for (label, coupling) in [("inset_fgr", 0.01), ("inset_ergodic", 0.1)] {
        let mut cfg = preset(n, 1.0, OneOrMany::One(0.1), OneOrMany::One(coupling), "central");
        cfg.evolution.samples = 1000;
        evolve_into(out, run, label, cfg, Point { delta: 0.1, coupling })?;
    }
    Ok(())
}

/// `count` log-spaced couplings covering `[J_c, J_E)`.
pub fn fgr_couplings(delta: f64, n: usize, count: usize) -> Result<Vec<f64>, AppError> {
    let sc = spectral_scales(&ModelParams::new(1.0, delta, 0.0)?, n, n / 2)?;
    match (sc.j_critical, sc.j_ergodic) {
        (Some(jc), Some(je)) => {
            let mut grid = log_grid(jc, je, count + 1)?;
            grid.pop();
            Ok(grid)
        }
        _ => Err(Error::InvalidParams("the golden-rule window needs delta > 0".into()).into()),
    }
}

/// Saturated participation and purity against the random-superposition estimates.
fn fig2(n: usize, out: &mut OutputDir, run: &mut FigureRun) -> Result<(), AppError> {
    let mut csv = String::from(
        "delta,J,J_over_delta,I_minus_1,I_sem,rescaled_inverse_P1,P1_inf,P1_sem,xi_inf,N_inf,guide,plateau\n",
    );
    for delta in [0.05, 0.1, 0.2] {
        for coupling in fgr_couplings(delta, n, 6)? {
            let mut cfg = preset(n, 1.0, OneOrMany::One(delta), OneOrMany::One(coupling), "central");
            cfg.evolution.widths = 40.0;
            cfg.evolution.extensions = 2;
            cfg.output.formats.clear();
            let label = format!("saturation/delta={delta}/J={coupling}");
            if let Some(rep) = evolve_into(out, run, &label, cfg, Point { delta, coupling })? {
                let s = &rep.saturation;
                let _ = writeln!(
                    csv,
                    "{delta},{coupling},{},{},{},{},{},{},{},{},{},{}",
                    coupling / delta,
                    s.ipr_minus_one,
                    s.ipr_inf.sem,
                    s.rescaled_inverse_p1,
                    s.p1_inf.mean,
                    s.p1_inf.sem,
                    s.xi_inf.mean,
                    s.n_inf,
                    saturation_guide(GUIDE_C, coupling, delta, n),
                    s.plateau
                );
            }
        }
    }
    out.write("saturation.csv", &csv)?;

    let mut inset = String::from("n,I,I_sem,P1_inverse,P1_I,N_B,N_B_over_3,plateau\n");
    for m in [8usize, 10, 12] {
        let mut cfg = preset(m, 1.0, OneOrMany::One(0.0), OneOrMany::One(0.1), "central");
        cfg.evolution.t_max = Horizon::Fixed(4000.0);
        cfg.output.formats.clear();
        let label = format!("inset/n={m}");
        if let Some(rep) = evolve_into(out, run, &label, cfg, Point { delta: 0.0, coupling: 0.1 })? {
            let s = &rep.saturation;
            let nb = binomial(m, m / 2);
            let _ = writeln!(
                inset,
                "{m},{},{},{},{},{nb},{},{}",
                s.ipr_inf.mean,
                s.ipr_inf.sem,
                1.0 / s.p1_inf.mean,
                s.p1_inf.mean * s.ipr_inf.mean,
                nb / 3.0,
                s.plateau
            );
        }
    }
    out.write("inset.csv", &inset)?;
    Ok(())
}

/// The alternating pattern with its last two qubits swapped, and with its
/// last qubit replaced by `|+⟩`.
fn separable_variants(n: usize) -> [String; 2] {
    let base: String = "01".repeat(n / 2);
    let swapped = format!("{}10", &base[..n - 2]);
    let plus = format!("{}+", &base[..n - 1]);
    [swapped, plus]
}

fn columns_csv(times: &[f64], names: &[String], cols: &[Vec<f64>]) -> String {
    let mut s = String::from("t");
    for name in names {
        s.push(',');
        s.push_str(name);
    }
    s.push('\n');
    for (k, t) in times.iter().enumerate() {
        let _ = write!(s, "{t}");
        for c in cols {
            let _ = write!(s, ",{}", c[k]);
        }
        s.push('\n');
    }
    s
}

/// Local purity for Bell-paired, W and other separable initial states.
fn fig3(n: usize, out: &mut OutputDir, run: &mut FigureRun) -> Result<(), AppError> {
    let mut initial = String::from("state,Delta,P1_0,P2_0,expected_P1_0\n");
    for (regime, coupling) in [("fgr", 0.01), ("ergodic", 0.1)] {
        let sc = spectral_scales(&ModelParams::new(1.0, 0.1, coupling)?, n, n / 2)?;
        let t_max = 10.0 / sc.decay_width();
        let mut states: Vec<(String, f64)> =
            (0..=3.min(n / 2)).map(|b| (format!("bell:{b}"), 1.0)).collect();
        states.push(("w".into(), 0.0));
        if regime == "fgr" {
            for s in separable_variants(n) {
                states.push((format!("product:{s}"), 1.0));
            }
        }
        let (mut names, mut cols) = (Vec::new(), Vec::new());
        let mut times = Vec::new();
        for (state, splitting) in states {
            let mut cfg = preset(n, splitting, OneOrMany::One(0.1), OneOrMany::One(coupling), &state);
            cfg.evolution.t_max = Horizon::Fixed(t_max);
            let label = format!("{regime}/{}", state.replace(':', "_"));
            let Some(rep) = evolve_into(out, run, &label, cfg, Point { delta: 0.1, coupling })? else {
                continue;
            };
            let r = &rep.result;
            if regime == "fgr" {
                let expected = state
                    .strip_prefix("bell:")
                    .and_then(|b| b.parse::<f64>().ok())
                    .map(|b| (1.0 - 2.0 * b / n as f64).to_string())
                    .unwrap_or_else(|| "".into());
                let _ = writeln!(initial, "{state},{splitting},{},{},{expected}", r.p1.mean[0], r.p2.mean[0]);
            }
            times = r.times.clone();
            names.push(state);
            cols.push(normalized(&r.p1.mean)?);
        }
        out.write(&format!("{regime}_rescaled.csv"), &columns_csv(&times, &names, &cols))?;
    }
    out.write("initial.csv", &initial)?;
    Ok(())
}

/// Critical times of `P1` and `P2` for entangled initial states.
fn fig4(n: usize, out: &mut OutputDir, run: &mut FigureRun) -> Result<(), AppError> {
    let mut states: Vec<(String, f64)> =
        (1..=3.min(n / 2)).map(|b| (format!("bell:{b}"), 1.0)).collect();
    states.push(("w".into(), 0.0));
    for (state, splitting) in &states {
        let cfg = sweep_preset(n, *splitting, vec![0.1], state);
        let label = format!("sweep_{}", state.replace(':', "_"));
        if let Some(rep) = run.record(&label, run_sweep(&cfg)) {
            write_sweep(out, &format!("{label}/"), &cfg, &rep)?;
            run.failures.extend(rep.failures.iter().map(|f| format!("{label}: {f}")));
            run.summary.extend_prefixed(&label, rep.summary);
        }
        run.configs.push(cfg);
    }
    for (regime, coupling) in [("fgr", 0.01), ("ergodic", 0.1)] {
        let sc = spectral_scales(&ModelParams::new(1.0, 0.1, coupling)?, n, n / 2)?;
        let (mut names, mut cols, mut times) = (Vec::new(), Vec::new(), Vec::new());
        for b in 0..=3.min(n / 2) {
            let state = format!("bell:{b}");
            let mut cfg = preset(n, 1.0, OneOrMany::One(0.1), OneOrMany::One(coupling), &state);
            cfg.evolution.t_max = Horizon::Fixed(10.0 / sc.decay_width());
            cfg.output.formats.clear();
            let label = format!("inset_{regime}/bell_{b}");
            if let Some(rep) = evolve_into(out, run, &label, cfg, Point { delta: 0.1, coupling })? {
                times = rep.result.times.clone();
                names.push(state);
                cols.push(rep.result.p2.mean.clone());
            }
        }
        out.write(&format!("inset_{regime}_P2.csv"), &columns_csv(&times, &names, &cols))?;
    }
    Ok(())
}
