use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SpectralScales;

/// Bounds of the decay window, relative to the initial value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitWindow {
    /// The window opens at the first sample at or below this value.
    pub top: f64,
    /// Hard lower edge.
    pub floor: f64,
    /// Fraction of the drop from `top` to the series minimum kept in the window.
    pub depth: f64,
}

impl Default for FitWindow {
    fn default() -> Self {
        Self { top: 0.95, floor: 0.2, depth: 0.5 }
    }
}

impl FitWindow {
    pub fn validate(&self) -> Result<()> {
        let ok = self.floor > 0.0 && self.floor < self.top && self.top < 1.0;
        if !ok || !(self.depth > 0.0 && self.depth <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "fit window needs 0 < floor < top < 1 and depth in (0, 1], got {self:?}"
            )));
        }
        Ok(())
    }

    /// Sample indices to fit, for a series normalised to start at 1.
    ///
    /// The window runs from the first sample at or below `top` while the
    /// series stays above the larger of `floor` and `y_min + depth·(top − y_min)`,
    /// `y_min` being the series minimum. Anchoring to the minimum keeps the
    /// late-time plateau out of the fit.
    pub fn select(&self, y: &[f64]) -> Option<std::ops::Range<usize>> {
        let start = y.iter().position(|&v| v <= self.top)?;
        let y_min = y.iter().copied().fold(f64::INFINITY, f64::min);
        let lower = self.floor.max(y_min + self.depth * (self.top - y_min));
        let len = y[start..].iter().take_while(|&&v| v >= lower).count();
        Some(start..start + len)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "t", rename_all = "lowercase")]
pub enum CriticalTime {
    Crossed(f64),
    /// No crossing up to the given horizon.
    Censored(f64),
}

impl CriticalTime {
    pub fn value(&self) -> f64 {
        match *self {
            CriticalTime::Crossed(t) | CriticalTime::Censored(t) => t,
        }
    }

    pub fn is_censored(&self) -> bool {
        matches!(self, CriticalTime::Censored(_))
    }
}

fn check_series(times: &[f64], series: &[f64]) -> Result<()> {
    if times.len() != series.len() {
        return Err(Error::Mismatch(format!("{} times vs {} values", times.len(), series.len())));
    }
    if times.is_empty() {
        return Err(Error::Analysis("empty series".into()));
    }
    Ok(())
}

/// First downward crossing of `k`, linearly interpolated.
pub fn critical_time(times: &[f64], series: &[f64], k: f64) -> Result<CriticalTime> {
    check_series(times, series)?;
    if series[0] <= k {
        return Err(Error::Analysis(format!(
            "threshold {k} is not below the initial value {}",
            series[0]
        )));
    }
    for i in 1..series.len() {
        if series[i] <= k {
            let (y0, y1) = (series[i - 1], series[i]);
            let (t0, t1) = (times[i - 1], times[i]);
            let frac = if y0 == y1 { 1.0 } else { (y0 - k) / (y0 - y1) };
            return Ok(CriticalTime::Crossed(t0 + frac * (t1 - t0)));
        }
    }
    Ok(CriticalTime::Censored(times[times.len() - 1]))
}

/// `series / series[0]`.
pub fn normalized(series: &[f64]) -> Result<Vec<f64>> {
    match series.first() {
        Some(&s0) if s0 > 0.0 => Ok(series.iter().map(|v| v / s0).collect()),
        _ => Err(Error::Analysis("series must start at a positive value".into())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayModel {
    Exponential,
    Gaussian,
}

impl DecayModel {
    pub fn as_str(&self) -> &'static str {
        match self {
            DecayModel::Exponential => "exponential",
            DecayModel::Gaussian => "gaussian",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeFit {
    pub model: DecayModel,
    /// `ln y ≈ −rate·t` (exponential) or `−rate·t²` (gaussian).
    pub rate: f64,
    /// `rate/Γ_F` or `rate/Γ_E²`; `None` when the width is undefined.
    pub constant: Option<f64>,
    pub residual: f64,
    pub exp_rate: f64,
    pub exp_residual: f64,
    pub gauss_rate: f64,
    pub gauss_residual: f64,
    pub window: (f64, f64),
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "lowercase")]
pub enum FitOutcome {
    /// The series never fell to the window top.
    NoDecay,
    Fitted(RegimeFit),
}

/// Least squares of `ln y = −r·x` through the origin; returns `(r, rms residual)`.
fn origin_fit(xs: &[f64], logs: &[f64]) -> (f64, f64) {
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(logs).map(|(x, y)| x * y).sum();
    let r = -sxy / sxx;
    let ss: f64 = xs.iter().zip(logs).map(|(x, y)| (y + r * x).powi(2)).sum();
    (r, (ss / xs.len() as f64).sqrt())
}

/// Fits `P(t)/P(0)` with both decay laws over the default window and keeps the better one.
pub fn fit_decay(times: &[f64], series: &[f64], scales: &SpectralScales) -> Result<FitOutcome> {
    fit_decay_in(times, series, scales, &FitWindow::default())
}

pub fn fit_decay_in(
    times: &[f64],
    series: &[f64],
    scales: &SpectralScales,
    window: &FitWindow,
) -> Result<FitOutcome> {
    check_series(times, series)?;
    window.validate()?;
    let y = normalized(series)?;
    let Some(range) = window.select(&y) else {
        return Ok(FitOutcome::NoDecay);
    };
    if range.len() < 3 {
        return Err(Error::Analysis(format!(
            "decay window holds {} samples; refine the time grid",
            range.len()
        )));
    }
    let ts = &times[range.clone()];
    let logs: Vec<f64> = y[range.clone()].iter().map(|v| v.ln()).collect();
    let t2: Vec<f64> = ts.iter().map(|t| t * t).collect();
    let (exp_rate, exp_residual) = origin_fit(ts, &logs);
    let (gauss_rate, gauss_residual) = origin_fit(&t2, &logs);
    let (model, rate, residual) = if exp_residual <= gauss_residual {
        (DecayModel::Exponential, exp_rate, exp_residual)
    } else {
        (DecayModel::Gaussian, gauss_rate, gauss_residual)
    };
    let constant = match model {
        DecayModel::Exponential => scales.gamma_fgr.map(|g| rate / g),
        DecayModel::Gaussian if scales.gamma_ergodic > 0.0 => {
            Some(rate / (scales.gamma_ergodic * scales.gamma_ergodic))
        }
        DecayModel::Gaussian => None,
    };
    Ok(FitOutcome::Fitted(RegimeFit {
        model,
        rate,
        constant,
        residual,
        exp_rate,
        exp_residual,
        gauss_rate,
        gauss_residual,
        window: (ts[0], ts[ts.len() - 1]),
        points: ts.len(),
    }))
}

/// Straight-line fit `ln y = a + slope·ln x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub slope_stderr: f64,
    pub r_squared: f64,
    pub points: usize,
}

pub fn power_law_fit(xs: &[f64], ys: &[f64]) -> Result<PowerLawFit> {
    if xs.len() != ys.len() {
        return Err(Error::Mismatch(format!("{} abscissae vs {} ordinates", xs.len(), ys.len())));
    }
    if xs.len() < 3 {
        return Err(Error::Analysis(format!("power-law fit needs 3 points, got {}", xs.len())));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::Analysis("power-law fit needs positive finite values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Analysis("power-law fit needs distinct abscissae".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(PowerLawFit {
        slope,
        intercept,
        slope_stderr: (sse / (m - 2.0) / sxx).sqrt(),
        r_squared: if syy > 0.0 { 1.0 - sse / syy } else { 1.0 },
        points: lx.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingExponent {
    pub fit: PowerLawFit,
    /// Couplings whose critical time was censored and left out.
    pub censored: Vec<f64>,
}

/// Log-log slope of `t_c` against `J` over the uncensored points.
pub fn scaling_exponent(points: &[(f64, CriticalTime)]) -> Result<ScalingExponent> {
    let censored = points.iter().filter(|(_, tc)| tc.is_censored()).map(|(j, _)| *j).collect();
    let (js, tcs): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter_map(|(j, tc)| match tc {
            CriticalTime::Crossed(t) => Some((*j, *t)),
            CriticalTime::Censored(_) => None,
        })
        .unzip();
    Ok(ScalingExponent { fit: power_law_fit(&js, &tcs)?, censored })
}

/// `count` logarithmically spaced values over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || count < 2 {
        return Err(Error::InvalidParams(format!("log grid needs 0 < lo < hi and 2+ points, got [{lo}, {hi}] × {count}")));
    }
    let ratio = (hi / lo).ln() / (count - 1) as f64;
    let mut out: Vec<f64> = (0..count).map(|i| lo * (ratio * i as f64).exp()).collect();
    out[count - 1] = hi;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{spectral_scales, ModelParams};

    fn grid(t_max: f64, samples: usize) -> Vec<f64> {
        (0..samples).map(|i| t_max * i as f64 / (samples - 1) as f64).collect()
    }

    fn scales() -> SpectralScales {
        spectral_scales(&ModelParams::new(1.0, 0.1, 0.01).unwrap(), 10, 5).unwrap()
    }

    #[test]
    fn constant_series_is_censored() {
        let t = grid(10.0, 11);
        let tc = critical_time(&t, &[1.0; 11], 0.9).unwrap();
        assert_eq!(tc, CriticalTime::Censored(10.0));
    }

    #[test]
    fn exponential_crossing_time() {
        let t = grid(3.0, 301);
        let y: Vec<f64> = t.iter().map(|t| (-t).exp()).collect();
        let tc = critical_time(&t, &y, (-1.0f64).exp()).unwrap();
        assert!((tc.value() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn first_crossing_wins() {
        let t = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y = [1.0, 0.8, 0.95, 0.7, 0.6];
        assert_eq!(critical_time(&t, &y, 0.9).unwrap(), CriticalTime::Crossed(0.5));
    }

    #[test]
    fn threshold_above_start_is_rejected() {
        assert!(critical_time(&[0.0, 1.0], &[0.6, 0.5], 0.9).is_err());
    }

    #[test]
    fn synthetic_exponential_is_recognised() {
        let t = grid(20.0, 401);
        let y: Vec<f64> = t.iter().map(|t| (-0.3 * t).exp()).collect();
        let FitOutcome::Fitted(fit) = fit_decay(&t, &y, &scales()).unwrap() else { panic!() };
        assert_eq!(fit.model, DecayModel::Exponential);
        assert!((fit.rate - 0.3).abs() < 0.003);
        assert!((fit.constant.unwrap() - 30.0).abs() < 0.3);
    }

    #[test]
    fn synthetic_gaussian_is_recognised() {
        let t = grid(30.0, 401);
        let y: Vec<f64> = t.iter().map(|t| (-0.01 * t * t).exp()).collect();
        let FitOutcome::Fitted(fit) = fit_decay(&t, &y, &scales()).unwrap() else { panic!() };
        assert_eq!(fit.model, DecayModel::Gaussian);
        assert!((fit.rate - 0.01).abs() < 1e-4);
    }

    #[test]
    fn plateau_is_excluded_from_window() {
        // Gaussian drop onto a 0.3 floor: the window must stop well above the floor.
        let t = grid(40.0, 801);
        let y: Vec<f64> = t.iter().map(|t| 0.3 + 0.7 * (-0.01 * t * t).exp()).collect();
        let r = FitWindow::default().select(&y).unwrap();
        assert!(y[r.end - 1] >= 0.3 + 0.5 * 0.65 - 1e-12);
        let FitOutcome::Fitted(fit) = fit_decay(&t, &y, &scales()).unwrap() else { panic!() };
        assert_eq!(fit.model, DecayModel::Gaussian);
    }

    #[test]
    fn no_decay_reports_no_fit() {
        let t = grid(10.0, 50);
        let y: Vec<f64> = t.iter().map(|t| 1.0 - 0.01 * t.sin().abs()).collect();
        assert_eq!(fit_decay(&t, &y, &scales()).unwrap(), FitOutcome::NoDecay);
    }

    #[test]
    fn exact_power_laws() {
        for (p, want) in [(2, -2.0), (1, -1.0)] {
            let pts: Vec<(f64, CriticalTime)> = [0.01, 0.02, 0.05, 0.1]
                .iter()
                .map(|&j| (j, CriticalTime::Crossed(3.0 / f64::powi(j, p))))
                .collect();
            let s = scaling_exponent(&pts).unwrap();
            assert!((s.fit.slope - want).abs() < 1e-12);
            assert!(s.fit.slope_stderr < 1e-9);
        }
    }

    #[test]
    fn censored_points_are_dropped_and_listed() {
        let mut pts: Vec<(f64, CriticalTime)> =
            [0.02, 0.04, 0.08].iter().map(|&j| (j, CriticalTime::Crossed(1.0 / j))).collect();
        pts.push((0.001, CriticalTime::Censored(1e4)));
        let s = scaling_exponent(&pts).unwrap();
        assert_eq!(s.censored, vec![0.001]);
        assert_eq!(s.fit.points, 3);
        pts.truncate(2);
        assert!(scaling_exponent(&pts).is_err());
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(0.01, 1.0, 3).unwrap();
        assert!((g[1] - 0.1).abs() < 1e-15);
        assert_eq!((g[0], g[2]), (0.01, 1.0));
    }
}
