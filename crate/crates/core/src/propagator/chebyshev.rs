//! Chebyshev expansion of `e^{-iHΔt}` built on the matrix-free apply.
//!
//! With `H̃ = (H − b)/a` mapped into `[-1, 1]`,
//!
//! ```text
//! e^{-iHΔt} = e^{-ibΔt} Σ_k (2 − δ_k0) (−i)^k J_k(aΔt) T_k(H̃)
//! ```
//!
//! and `T_k(H̃)ψ` follows the three-term recurrence.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::HamiltonianTerms;
use crate::states::StateVector;

use super::{SparseOperator, TimeGrid};

/// Largest expansion argument `aΔt` handled in one step; longer intervals are split.
const MAX_STEP_ARGUMENT: f64 = 64.0;

/// Hard cap on the number of expansion terms per step.
pub const MAX_ORDER: usize = 4096;

/// Bessel functions `J_0(x) … J_{kmax}(x)` of the first kind for `x ≥ 0`,
/// by Miller's backward recurrence normalised with `J_0 + 2 Σ J_{2k} = 1`.
pub fn bessel_j_sequence(x: f64, kmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    assert!(x > 0.0 && x.is_finite(), "bessel argument must be finite and non-negative");
    let top = kmax.max(x.ceil() as usize);
    let mut start = top + 20 + (40.0 * top as f64).sqrt() as usize;
    start += start % 2;

    let (mut above, mut cur) = (0.0f64, 1e-300f64);
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let below = 2.0 * k as f64 / x * cur - above;
        above = cur;
        cur = below;
        // `cur` now holds the unnormalised J_{k-1}.
        let idx = k - 1;
        if idx <= kmax {
            out[idx] = cur;
        }
        if idx > 0 && idx % 2 == 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            let s = 1e-250;
            cur *= s;
            above *= s;
            norm *= s;
            out.iter_mut().for_each(|v| *v *= s);
        }
    }
    norm += cur;
    out.iter_mut().for_each(|v| *v /= norm);
    out
}

/// Expansion coefficients `(2 − δ_k0) J_k(x)` truncated so the discarded
/// tail sums to at most `tol`. Returns the coefficients and that tail bound.
fn truncated_coefficients(x: f64, tol: f64) -> Result<(Vec<f64>, f64)> {
    let kmax = (x + 30.0 + 12.0 * x.cbrt()).ceil() as usize;
    if kmax > MAX_ORDER {
        return Err(Error::NoConvergence(format!(
            "step argument {x:.3} needs more than {MAX_ORDER} terms"
        )));
    }
    let j = bessel_j_sequence(x, kmax);
    let weights: Vec<f64> =
        j.iter().enumerate().map(|(k, v)| if k == 0 { *v } else { 2.0 * v }).collect();
    // Keep terms until the remaining tail (beyond the turning point k > x) is below tol.
    let mut tail = 0.0;
    let mut order = weights.len();
    for k in (0..weights.len()).rev() {
        let next = tail + weights[k].abs();
        if next > tol || (k as f64) <= x {
            order = k + 1;
            break;
        }
        tail = next;
    }
    if order >= weights.len() {
        return Err(Error::NoConvergence(format!(
            "tail at order {} still exceeds tolerance {tol:e} for argument {x:.3}",
            weights.len()
        )));
    }
    let mut coeffs = weights;
    coeffs.truncate(order);
    Ok((coeffs, tail))
}

/// Stepper for `e^{-iHΔt}` on a fixed Hamiltonian.
pub struct ChebyshevPropagator {
    op: SparseOperator,
    center: f64,
    half_width: f64,
    tol: f64,
    scratch: [Vec<Complex64>; 4],
    /// Accumulated truncation bound over all steps taken.
    pub truncation_error: f64,
    /// Largest `|‖ψ‖ − 1|` observed before renormalisation.
    pub max_norm_drift: f64,
    pub steps: usize,
    pub applications: usize,
}

impl ChebyshevPropagator {
    pub fn new(h: &HamiltonianTerms, tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::InvalidParams(format!("Chebyshev tolerance {tol} outside (0, 1)")));
        }
        let op = SparseOperator::new(h);
        let (lo, hi) = op.spectral_bounds();
        // Small margin keeps the spectrum strictly inside [-1, 1].
        let half_width = ((hi - lo) / 2.0).max(1e-12) * 1.01;
        let dim = op.dim();
        Ok(Self {
            op,
            center: (hi + lo) / 2.0,
            half_width,
            tol,
            scratch: std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); dim]),
            truncation_error: 0.0,
            max_norm_drift: 0.0,
            steps: 0,
            applications: 0,
        })
    }

    /// Advances `psi` by `dt` in place, splitting long intervals.
    pub fn advance(&mut self, psi: &mut StateVector, dt: f64) -> Result<()> {
        if dt < 0.0 || !dt.is_finite() {
            return Err(Error::InvalidGrid(format!("negative or non-finite step {dt}")));
        }
        if dt == 0.0 {
            return Ok(());
        }
        let pieces = (self.half_width * dt / MAX_STEP_ARGUMENT).ceil().max(1.0) as usize;
        let sub = dt / pieces as f64;
        for _ in 0..pieces {
            self.single_step(psi, sub)?;
        }
        Ok(())
    }

    fn single_step(&mut self, psi: &mut StateVector, dt: f64) -> Result<()> {
        let x = self.half_width * dt;
        let (coeffs, tail) = truncated_coefficients(x, self.tol)?;
        let amps = psi.amps_mut();
        let dim = amps.len();
        let [prev, cur, next, acc] = &mut self.scratch;
        debug_assert_eq!(acc.len(), dim);

        prev.copy_from_slice(amps);
        for (a, p) in acc.iter_mut().zip(prev.iter()) {
            *a = p * coeffs[0];
        }
        if coeffs.len() > 1 {
            self.op.apply_into(prev, cur);
            let (b, inv_a) = (self.center, 1.0 / self.half_width);
            for (c, p) in cur.iter_mut().zip(prev.iter()) {
                *c = (*c - p * b) * inv_a;
            }
            self.applications += 1;
            let phase = Complex64::new(0.0, -1.0);
            for (a, c) in acc.iter_mut().zip(cur.iter()) {
                *a += c * phase * coeffs[1];
            }
        }
        let mut phase = Complex64::new(0.0, -1.0);
        for &ck in coeffs.iter().skip(2) {
            phase *= Complex64::new(0.0, -1.0);
            self.op.apply_into(cur, next);
            let (b, inv_a) = (self.center, 1.0 / self.half_width);
            let w = phase * ck;
            for ((n, c), (p, a)) in next.iter_mut().zip(cur.iter()).zip(prev.iter().zip(acc.iter_mut())) {
                *n = (*n - c * b) * (2.0 * inv_a) - p;
                *a += *n * w;
            }
            self.applications += 1;
            std::mem::swap(prev, cur);
            std::mem::swap(cur, next);
        }

        let global = Complex64::from_polar(1.0, -self.center * dt);
        for (out, a) in amps.iter_mut().zip(acc.iter()) {
            *out = a * global;
        }
        let norm = psi.normalize();
        self.max_norm_drift = self.max_norm_drift.max((norm - 1.0).abs());
        self.truncation_error += tail;
        self.steps += 1;
        Ok(())
    }

    /// Evolves along `grid`, handing each state to `observe` in order.
    pub fn run<F>(&mut self, psi0: &StateVector, grid: &TimeGrid, mut observe: F) -> Result<()>
    where
        F: FnMut(usize, f64, &StateVector) -> Result<()>,
    {
        if psi0.dim() != self.op.dim() {
            return Err(Error::Mismatch(format!(
                "state dimension {} vs operator dimension {}",
                psi0.dim(),
                self.op.dim()
            )));
        }
        let mut psi = psi0.clone();
        let mut t_prev = 0.0;
        for (k, &t) in grid.times().iter().enumerate() {
            self.advance(&mut psi, t - t_prev)?;
            t_prev = t;
            observe(k, t, &psi)?;
        }
        Ok(())
    }
}
