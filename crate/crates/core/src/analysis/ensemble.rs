use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::observe;
use crate::model::{
    build_hamiltonian, sample_disorder, spectral_scales, LatticeSpec, ModelParams, SpectralScales,
};
use crate::propagator::{propagate, Backend, EvolveOptions, TimeGrid};
use crate::states::{StateDesignator, StateVector};

pub const DEFAULT_REALIZATIONS: usize = 10;
pub const DEFAULT_THRESHOLD: f64 = 0.9;
pub const DEFAULT_SAMPLES: usize = 400;
pub const DEFAULT_WIDTHS: f64 = 10.0;
/// Horizon used when no decay width exists (`J = 0`).
pub const FALLBACK_T_MAX: f64 = 100.0;

/// How the sample times of an ensemble run are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "policy")]
pub enum TimePolicy {
    /// `samples` points up to `widths / Γ`, with `Γ` the regime's decay width.
    Auto { widths: f64, samples: usize },
    Fixed { t_max: f64, samples: usize },
    Explicit { times: Vec<f64> },
}

impl Default for TimePolicy {
    fn default() -> Self {
        TimePolicy::Auto { widths: DEFAULT_WIDTHS, samples: DEFAULT_SAMPLES }
    }
}

impl TimePolicy {
    pub fn grid(&self, scales: &SpectralScales) -> Result<TimeGrid> {
        match self {
            TimePolicy::Auto { widths, samples } => {
                let gamma = scales.decay_width();
                let t_max = if gamma > 0.0 { widths / gamma } else { FALLBACK_T_MAX };
                TimeGrid::uniform(t_max, *samples)
            }
            TimePolicy::Fixed { t_max, samples } => TimeGrid::uniform(*t_max, *samples),
            TimePolicy::Explicit { times } => TimeGrid::new(times.clone()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EnsembleConfig {
    pub lattice: LatticeSpec,
    pub params: ModelParams,
    pub state: StateDesignator,
    pub time: TimePolicy,
    pub realizations: usize,
    pub seed: u64,
    pub threshold: f64,
    pub evolve: EvolveOptions,
}

impl EnsembleConfig {
    pub fn new(lattice: LatticeSpec, params: ModelParams, state: StateDesignator) -> Self {
        Self {
            lattice,
            params,
            state,
            time: TimePolicy::default(),
            realizations: DEFAULT_REALIZATIONS,
            seed: 0,
            threshold: DEFAULT_THRESHOLD,
            evolve: EvolveOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.realizations == 0 {
            return Err(Error::InvalidParams("need at least one realization".into()));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::InvalidParams(format!("threshold {} outside (0, 1)", self.threshold)));
        }
        Ok(())
    }

    /// Initial state and the band it occupies.
    pub fn initial_state(&self) -> Result<(StateVector, usize)> {
        let n = self.lattice.n();
        let psi0 = self.state.build(n)?;
        let k = ((n as f64 - psi0.magnetization()) / 2.0).round().clamp(0.0, n as f64) as usize;
        Ok((psi0, k))
    }

    pub fn scales(&self) -> Result<SpectralScales> {
        let (_, k) = self.initial_state()?;
        spectral_scales(&self.params, self.lattice.n(), k)
    }
}

/// Pointwise mean and standard error over realizations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesStats {
    pub mean: Vec<f64>,
    pub sem: Vec<f64>,
}

impl SeriesStats {
    /// `sem` is the sample standard deviation over `√N_r`; zero for one realization.
    pub fn from_rows<'a, I>(rows: I, len: usize) -> Self
    where
        I: IntoIterator<Item = &'a [f64]> + Clone,
    {
        let count = rows.clone().into_iter().count();
        let mut mean = vec![0.0; len];
        for row in rows.clone() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= count as f64);
        let mut sem = vec![0.0; len];
        if count > 1 {
            for row in rows {
                for ((s, v), m) in sem.iter_mut().zip(row).zip(&mean) {
                    *s += (v - m) * (v - m);
                }
            }
            let scale = 1.0 / ((count - 1) as f64 * count as f64);
            sem.iter_mut().for_each(|s| *s = (*s * scale).sqrt());
        }
        Self { mean, sem }
    }
}

/// Observables along one disorder realization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealizationSeries {
    pub index: u64,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub fidelity: Vec<f64>,
    pub xi: Vec<f64>,
    pub error_estimate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleResult {
    pub times: Vec<f64>,
    pub p1: SeriesStats,
    pub p2: SeriesStats,
    pub fidelity: SeriesStats,
    pub xi: SeriesStats,
    pub scales: SpectralScales,
    pub backend: Backend,
    /// Worst per-trajectory error estimate reported by the propagator.
    pub error_estimate: f64,
    pub realizations: Vec<RealizationSeries>,
}

fn run_realization(
    cfg: &EnsembleConfig,
    psi0: &StateVector,
    grid: &TimeGrid,
    index: u64,
) -> Result<(RealizationSeries, Backend)> {
    let len = grid.len();
    let mut series = RealizationSeries {
        index,
        p1: Vec::with_capacity(len),
        p2: Vec::with_capacity(len),
        fidelity: Vec::with_capacity(len),
        xi: Vec::with_capacity(len),
        error_estimate: 0.0,
    };
    let mut reached = 0.0;
    let outcome = (|| {
        let real = sample_disorder(&cfg.lattice, &cfg.params, cfg.seed, index)?;
        let h = build_hamiltonian(&cfg.lattice, &cfg.params, &real)?;
        propagate(&h, psi0, grid, &cfg.evolve, |_, t, psi| {
            reached = t;
            let o = observe(psi, psi0, &cfg.lattice.pairing)?;
            series.p1.push(o.p1);
            series.p2.push(o.p2);
            series.fidelity.push(o.fidelity);
            series.xi.push(o.xi);
            Ok(())
        })
    })();
    match outcome {
        Ok(stats) => {
            series.error_estimate = stats.error_estimate;
            Ok((series, stats.backend))
        }
        Err(e) => Err(Error::Realization { realization: index, time: reached, source: Box::new(e) }),
    }
}

/// Evolves `N_r` disorder realizations and averages the observables pointwise.
///
/// Realization `r` draws its disorder from stream `r` of the master seed, and
/// results are merged in index order, so the output is bitwise independent of
/// how many workers ran it.
pub fn run_ensemble(cfg: &EnsembleConfig) -> Result<EnsembleResult> {
    cfg.validate()?;
    let (psi0, k) = cfg.initial_state()?;
    let scales = spectral_scales(&cfg.params, cfg.lattice.n(), k)?;
    let grid = cfg.time.grid(&scales)?;

    let indices: Vec<u64> = (0..cfg.realizations as u64).collect();
    #[cfg(feature = "parallel")]
    let runs: Vec<Result<(RealizationSeries, Backend)>> = {
        use rayon::prelude::*;
        indices.par_iter().map(|&r| run_realization(cfg, &psi0, &grid, r)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let runs: Vec<Result<(RealizationSeries, Backend)>> =
        indices.iter().map(|&r| run_realization(cfg, &psi0, &grid, r)).collect();

    let mut realizations = Vec::with_capacity(runs.len());
    let mut backend = cfg.evolve.resolve(cfg.lattice.n());
    for run in runs {
        let (series, b) = run?;
        backend = b;
        realizations.push(series);
    }
    let len = grid.len();
    let stats = |pick: fn(&RealizationSeries) -> &[f64]| {
        SeriesStats::from_rows(realizations.iter().map(pick), len)
    };
    let p1 = stats(|r| &r.p1);
    let p2 = stats(|r| &r.p2);
    let fidelity = stats(|r| &r.fidelity);
    let xi = stats(|r| &r.xi);
    let error_estimate = realizations.iter().map(|r| r.error_estimate).fold(0.0, f64::max);
    Ok(EnsembleResult {
        times: grid.times().to_vec(),
        p1,
        p2,
        fidelity,
        xi,
        scales,
        backend,
        error_estimate,
        realizations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_lattice;

    fn config(delta: f64, coupling: f64) -> EnsembleConfig {
        let mut cfg = EnsembleConfig::new(
            build_lattice(2, 3).unwrap(),
            ModelParams::new(1.0, delta, coupling).unwrap(),
            StateDesignator::Central,
        );
        cfg.time = TimePolicy::Fixed { t_max: 50.0, samples: 41 };
        cfg.realizations = 4;
        cfg
    }

    #[test]
    fn single_realization_has_zero_error_bars() {
        let mut cfg = config(0.1, 0.05);
        cfg.realizations = 1;
        let res = run_ensemble(&cfg).unwrap();
        assert_eq!(res.p1.mean, res.realizations[0].p1);
        assert!(res.p1.sem.iter().chain(&res.xi.sem).all(|&s| s == 0.0));
    }

    #[test]
    fn uncoupled_ensemble_is_frozen() {
        let res = run_ensemble(&config(0.3, 0.0)).unwrap();
        for s in [&res.p1, &res.p2, &res.fidelity, &res.xi] {
            assert!(s.mean.iter().all(|v| (v - 1.0).abs() < 1e-10));
        }
    }

    #[test]
    fn rerun_is_bitwise_identical() {
        let cfg = config(0.1, 0.1);
        let a = run_ensemble(&cfg).unwrap();
        let b = run_ensemble(&cfg).unwrap();
        assert_eq!(a.p1, b.p1);
        assert_eq!(a.xi, b.xi);
    }

    #[test]
    fn realization_prefix_is_stable() {
        let mut cfg = config(0.1, 0.1);
        let four = run_ensemble(&cfg).unwrap();
        cfg.realizations = 2;
        let two = run_ensemble(&cfg).unwrap();
        assert_eq!(four.realizations[..2], two.realizations[..]);
    }

    #[test]
    fn sem_matches_textbook_formula() {
        let rows: [&[f64]; 3] = [&[1.0, 0.0], &[2.0, 0.0], &[4.0, 3.0]];
        let s = SeriesStats::from_rows(rows.iter().copied(), 2);
        assert!((s.mean[0] - 7.0 / 3.0).abs() < 1e-15);
        // sample variance of {1,2,4} is 7/3
        assert!((s.sem[0] - (7.0f64 / 3.0 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn auto_grid_follows_regime_width() {
        let cfg = config(0.1, 0.01);
        let scales = cfg.scales().unwrap();
        let grid = TimePolicy::default().grid(&scales).unwrap();
        assert_eq!(grid.len(), DEFAULT_SAMPLES);
        assert!((grid.t_max() - 10.0 / scales.gamma_fgr.unwrap()).abs() < 1e-9);
    }
}
