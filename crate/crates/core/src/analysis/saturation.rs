use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{local_purity, participation_number};
use crate::model::{binomial, Regime, SpectralScales};
use crate::states::StateVector;

use super::ensemble::{run_ensemble, EnsembleConfig, EnsembleResult, TimePolicy};

/// Presentation factor applied to `P1⁻¹ − 1`.
pub const DEFAULT_RESCALING: f64 = 7.0;
/// Largest relative change between the last two quarter-window means for a plateau.
pub const PLATEAU_DRIFT: f64 = 0.05;

/// Mean over realizations with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub sem: f64,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let m = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / m;
        let sem = if xs.len() > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0) / m).sqrt()
        } else {
            0.0
        };
        Self { mean, sem }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaturationStats {
    pub p1_inf: Estimate,
    pub xi_inf: Estimate,
    pub ipr_inf: Estimate,
    pub n_inf: f64,
    pub p1_pred: f64,
    pub xi_pred: f64,
    pub ipr_pred: f64,
    /// `(1/P1_inf − 1)·R`.
    pub rescaled_inverse_p1: f64,
    pub ipr_minus_one: f64,
    pub rescaling: f64,
    pub plateau: bool,
    /// Relative change of the windowed `P1` and `ξ` means between the last two quarters.
    pub drift_p1: f64,
    pub drift_xi: f64,
}

/// Number of basis states the evolved state is expected to spread over:
/// `(Γ_F/Δ_B)·N_B` capped at `N_B`, and `N_B` outright in the ergodic regime.
pub fn accessible_states(scales: &SpectralScales) -> f64 {
    let nb = scales.band_degeneracy;
    match scales.gamma_fgr {
        Some(g) if scales.regime != Regime::Ergodic && scales.band_width > 0.0 => {
            (g / scales.band_width * nb).clamp(1.0, nb)
        }
        _ => nb,
    }
}

fn quarter_means(series: &[f64]) -> (f64, f64) {
    let len = series.len();
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    (mean(&series[len / 2..3 * len / 4]), mean(&series[3 * len / 4..]))
}

fn relative_drift(series: &[f64]) -> f64 {
    let (third, last) = quarter_means(series);
    if last == 0.0 {
        if third == 0.0 { 0.0 } else { f64::INFINITY }
    } else {
        ((last - third) / last).abs()
    }
}

/// Late-time plateau values averaged over the final quarter of the grid,
/// set against the random-superposition predictions.
pub fn saturation_stats(result: &EnsembleResult, rescaling: f64) -> Result<SaturationStats> {
    let len = result.times.len();
    if len < 8 {
        return Err(Error::Analysis(format!("{len} samples are too few for plateau windows")));
    }
    if result.realizations.is_empty() {
        return Err(Error::Analysis("no realizations".into()));
    }
    let tail = 3 * len / 4;
    let avg = |s: &[f64]| s[tail..].iter().sum::<f64>() / (len - tail) as f64;
    let p1: Vec<f64> = result.realizations.iter().map(|r| avg(&r.p1)).collect();
    let xi: Vec<f64> = result.realizations.iter().map(|r| avg(&r.xi)).collect();
    let ipr: Vec<f64> = result
        .realizations
        .iter()
        .map(|r| avg(&r.xi.iter().map(|x| 1.0 / x).collect::<Vec<_>>()))
        .collect();
    let (p1_inf, xi_inf, ipr_inf) =
        (Estimate::from_samples(&p1), Estimate::from_samples(&xi), Estimate::from_samples(&ipr));
    let n_inf = accessible_states(&result.scales);
    let drift_p1 = relative_drift(&result.p1.mean);
    let drift_xi = relative_drift(&result.xi.mean);
    Ok(SaturationStats {
        p1_inf,
        xi_inf,
        ipr_inf,
        n_inf,
        p1_pred: 2.0 / n_inf,
        xi_pred: 3.0 / n_inf,
        ipr_pred: n_inf / 3.0,
        rescaled_inverse_p1: (1.0 / p1_inf.mean - 1.0) * rescaling,
        ipr_minus_one: ipr_inf.mean - 1.0,
        rescaling,
        plateau: drift_p1 < PLATEAU_DRIFT && drift_xi < PLATEAU_DRIFT,
        drift_p1,
        drift_xi,
    })
}

/// Runs the ensemble and doubles the horizon until a plateau is detected,
/// at most `max_extensions` times. Returns the last run, its statistics and
/// the number of extensions used.
pub fn run_saturation(
    cfg: &EnsembleConfig,
    rescaling: f64,
    max_extensions: usize,
) -> Result<(EnsembleResult, SaturationStats, usize)> {
    let mut cfg = cfg.clone();
    let mut extensions = 0;
    loop {
        let result = run_ensemble(&cfg)?;
        let stats = saturation_stats(&result, rescaling)?;
        if stats.plateau || extensions == max_extensions {
            return Ok((result, stats, extensions));
        }
        let t_max = 2.0 * result.times[result.times.len() - 1];
        cfg.time = TimePolicy::Fixed { t_max, samples: result.times.len() };
        extensions += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PorterThomasSample {
    pub qubits: usize,
    pub n_inf: usize,
    pub draws: usize,
    pub xi: Estimate,
    pub p1: Estimate,
}

/// Monte Carlo over random real superpositions of `n_inf` central-band states.
///
/// Each draw picks `n_inf` distinct basis states with `n/2` excitations, using
/// the smallest even `n` whose central band is large enough, and gives them
/// normalised Gaussian amplitudes.
pub fn porter_thomas_sample(n_inf: usize, draws: usize, seed: u64) -> Result<PorterThomasSample> {
    if n_inf == 0 || draws == 0 {
        return Err(Error::InvalidParams("need n_inf >= 1 and draws >= 1".into()));
    }
    let n = (1..=12usize)
        .map(|h| 2 * h)
        .find(|&n| binomial(n, n / 2) >= n_inf as f64)
        .ok_or_else(|| Error::InvalidParams(format!("n_inf = {n_inf} exceeds the 24-qubit central band")))?;
    let band: Vec<usize> =
        (0..1usize << n).filter(|q| q.count_ones() as usize == n / 2).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut xis, mut p1s) = (Vec::with_capacity(draws), Vec::with_capacity(draws));
    let mut amps = vec![num_complex::Complex64::new(0.0, 0.0); 1 << n];
    for _ in 0..draws {
        amps.iter_mut().for_each(|a| *a = 0.0.into());
        for i in sample(&mut rng, band.len(), n_inf) {
            let g: f64 = StandardNormal.sample(&mut rng);
            amps[band[i]] = g.into();
        }
        let mut psi = StateVector::from_amplitudes(n, amps.clone())?;
        psi.normalize();
        xis.push(participation_number(&psi).0);
        p1s.push(local_purity(&psi));
    }
    Ok(PorterThomasSample {
        qubits: n,
        n_inf,
        draws,
        xi: Estimate::from_samples(&xis),
        p1: Estimate::from_samples(&p1s),
    })
}
