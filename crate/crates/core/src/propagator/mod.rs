//! Exact time evolution `|ψ_t⟩ = e^{-iHt}|ψ_0⟩` (ħ = 1).
//!
//! Two backends share one streaming interface: [`dense`] diagonalises each
//! parity block of `H` once and is preferred up to [`DEFAULT_DENSE_CAP`]
//! qubits; [`chebyshev`] only needs the matrix-free apply and scales further.

pub mod chebyshev;
pub mod dense;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::HamiltonianTerms;
use crate::states::StateVector;

pub use chebyshev::ChebyshevPropagator;
pub use dense::DenseEvolver;

pub const DEFAULT_DENSE_CAP: usize = 12;
pub const DEFAULT_CHEBYSHEV_TOL: f64 = 1e-10;

/// Sample times, starting at 0 and strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        match times.first() {
            Some(&0.0) => {}
            _ => return Err(Error::InvalidGrid("grid must start at t = 0".into())),
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid("non-finite sample time".into()));
        }
        if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!("times not increasing at {} -> {}", w[0], w[1])));
        }
        Ok(Self { times })
    }

    /// `samples` points evenly spaced over `[0, t_max]`.
    pub fn uniform(t_max: f64, samples: usize) -> Result<Self> {
        if samples < 2 || !(t_max > 0.0) || !t_max.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "uniform grid needs t_max > 0 and >= 2 samples, got {t_max}, {samples}"
            )));
        }
        let step = t_max / (samples - 1) as f64;
        let mut times: Vec<f64> = (0..samples).map(|k| k as f64 * step).collect();
        times[samples - 1] = t_max;
        Self::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }
}

/// Precomputed diagonal and flip masks for the matrix-free kernel.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    n: usize,
    diag: Vec<f64>,
    flips: Vec<(usize, f64)>,
}

impl SparseOperator {
    pub fn new(h: &HamiltonianTerms) -> Self {
        Self { n: h.n, diag: h.diagonal(), flips: h.flip_masks() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn flips(&self) -> &[(usize, f64)] {
        &self.flips
    }

    /// `out = H · input`. Each output element is computed independently, in
    /// a fixed order, so results do not depend on threading.
    pub fn apply_into(&self, input: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(input.len(), self.diag.len());
        debug_assert_eq!(out.len(), self.diag.len());
        for (q, o) in out.iter_mut().enumerate() {
            let mut acc = input[q] * self.diag[q];
            for &(mask, w) in &self.flips {
                acc += input[q ^ mask] * w;
            }
            *o = acc;
        }
    }

    /// Interval containing the spectrum: the diagonal range widened by the
    /// total off-diagonal weight.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let off: f64 = self.flips.iter().map(|f| f.1.abs()).sum();
        let (lo, hi) = self
            .diag
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &d| (lo.min(d), hi.max(d)));
        (lo - off, hi + off)
    }
}

/// `H·v`, unnormalised.
pub fn apply_hamiltonian(h: &HamiltonianTerms, v: &StateVector) -> Result<StateVector> {
    if v.n() != h.n {
        return Err(Error::Mismatch(format!("{}-qubit state for a {}-qubit Hamiltonian", v.n(), h.n)));
    }
    let op = SparseOperator::new(h);
    let mut out = vec![Complex64::new(0.0, 0.0); v.dim()];
    op.apply_into(v.amps(), &mut out);
    StateVector::from_amplitudes(h.n, out)
}

/// `⟨ψ|H|ψ⟩`.
pub fn energy_expectation(h: &HamiltonianTerms, psi: &StateVector) -> Result<f64> {
    Ok(psi.inner(&apply_hamiltonian(h, psi)?).re)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Dense,
    Chebyshev,
}

impl Backend {
    pub fn as_str(&self) -> &'static str {
        match self {
            Backend::Dense => "dense",
            Backend::Chebyshev => "chebyshev",
        }
    }
}

/// How to pick and tune the backend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    /// `None` picks dense up to `dense_cap` qubits and Chebyshev beyond.
    pub backend: Option<Backend>,
    pub tol: f64,
    pub dense_cap: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { backend: None, tol: DEFAULT_CHEBYSHEV_TOL, dense_cap: DEFAULT_DENSE_CAP }
    }
}

impl EvolveOptions {
    pub fn resolve(&self, n: usize) -> Backend {
        self.backend
            .unwrap_or(if n <= self.dense_cap { Backend::Dense } else { Backend::Chebyshev })
    }
}

/// Error accounting reported by a finished trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolutionStats {
    pub backend: Backend,
    /// Dense: largest `|‖ψ_t‖ − 1|`. Chebyshev: accumulated truncation bound.
    pub error_estimate: f64,
    /// Largest norm deviation before renormalisation (zero for dense).
    pub norm_drift: f64,
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub stats: EvolutionStats,
}

/// Streams `ψ_t` for every grid time to `observe`, in grid order.
pub fn propagate<F>(
    h: &HamiltonianTerms,
    psi0: &StateVector,
    grid: &TimeGrid,
    opts: &EvolveOptions,
    mut observe: F,
) -> Result<EvolutionStats>
where
    F: FnMut(usize, f64, &StateVector) -> Result<()>,
{
    if psi0.n() != h.n {
        return Err(Error::Mismatch(format!("{}-qubit state for a {}-qubit Hamiltonian", psi0.n(), h.n)));
    }
    match opts.resolve(h.n) {
        Backend::Dense => {
            if h.n > opts.dense_cap {
                return Err(Error::DenseCapExceeded { n: h.n, cap: opts.dense_cap });
            }
            let evolver = DenseEvolver::new(h, psi0)?;
            let mut worst = 0.0f64;
            evolver.run(grid, |k, t, psi| {
                worst = worst.max((psi.norm() - 1.0).abs());
                observe(k, t, psi)
            })?;
            Ok(EvolutionStats { backend: Backend::Dense, error_estimate: worst, norm_drift: 0.0 })
        }
        Backend::Chebyshev => {
            let mut prop = ChebyshevPropagator::new(h, opts.tol)?;
            prop.run(psi0, grid, observe)?;
            Ok(EvolutionStats {
                backend: Backend::Chebyshev,
                error_estimate: prop.truncation_error,
                norm_drift: prop.max_norm_drift,
            })
        }
    }
}

fn collect(
    h: &HamiltonianTerms,
    psi0: &StateVector,
    grid: &TimeGrid,
    opts: &EvolveOptions,
) -> Result<EvolutionResult> {
    let mut states = Vec::with_capacity(grid.len());
    let stats = propagate(h, psi0, grid, opts, |k, _, psi| {
        // t = 0 is handed back bit-for-bit.
        states.push(if k == 0 && grid.times()[0] == 0.0 { psi0.clone() } else { psi.clone() });
        Ok(())
    })?;
    Ok(EvolutionResult { times: grid.times().to_vec(), states, stats })
}

/// Dense eigendecomposition backend; refuses lattices above `dense_cap`.
pub fn evolve_dense(
    h: &HamiltonianTerms,
    psi0: &StateVector,
    grid: &TimeGrid,
    dense_cap: usize,
) -> Result<EvolutionResult> {
    let opts = EvolveOptions { backend: Some(Backend::Dense), dense_cap, ..Default::default() };
    collect(h, psi0, grid, &opts)
}

/// Chebyshev backend with per-step truncation tolerance `tol`.
pub fn evolve_chebyshev(
    h: &HamiltonianTerms,
    psi0: &StateVector,
    grid: &TimeGrid,
    tol: f64,
) -> Result<EvolutionResult> {
    let opts = EvolveOptions { backend: Some(Backend::Chebyshev), tol, ..Default::default() };
    collect(h, psi0, grid, &opts)
}

/// `F(t_k) = |⟨ψ_0|ψ_{t_k}⟩|²`.
pub fn fidelity_series(psi0: &StateVector, evo: &EvolutionResult) -> Result<Vec<f64>> {
    evo.states
        .iter()
        .map(|s| {
            if s.dim() != psi0.dim() {
                return Err(Error::Mismatch("state dimensions differ".into()));
            }
            Ok(psi0.inner(s).norm_sqr().min(1.0))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_hamiltonian, build_lattice, sample_disorder, ModelParams};
    use crate::states::{central_band_state, computational_state};

    fn hamiltonian(rows: usize, cols: usize, delta: f64, j: f64, seed: u64) -> HamiltonianTerms {
        let l = build_lattice(rows, cols).unwrap();
        let p = ModelParams::new(1.0, delta, j).unwrap();
        build_hamiltonian(&l, &p, &sample_disorder(&l, &p, seed, 0).unwrap()).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(vec![0.0, 1.0, 1.0]).is_err());
        assert!(TimeGrid::new(vec![0.5, 1.0]).is_err());
        assert!(TimeGrid::new(vec![]).is_err());
        let g = TimeGrid::uniform(10.0, 11).unwrap();
        assert_eq!(g.times()[3], 3.0);
        assert_eq!(g.t_max(), 10.0);
    }

    #[test]
    fn diagonal_action_on_basis_states() {
        let h = hamiltonian(2, 2, 0.2, 0.0, 3);
        for q in [0, 5, 10, 15] {
            let v = computational_state(4, q).unwrap();
            let out = apply_hamiltonian(&h, &v).unwrap();
            let e: f64 = h.zterms.iter().map(|&(j, w)| if q >> j & 1 == 0 { w } else { -w }).sum();
            for (p, a) in out.amps().iter().enumerate() {
                let want = if p == q { e } else { 0.0 };
                assert!((a.re - want).abs() < 1e-14 && a.im == 0.0);
            }
        }
    }

    #[test]
    fn two_qubit_apply() {
        let l = build_lattice(1, 2).unwrap();
        let p = ModelParams::new(1.0, 0.0, 1.0).unwrap();
        let mut r = sample_disorder(&l, &p, 0, 0).unwrap();
        r.couplings[0] = 0.3;
        let h = build_hamiltonian(&l, &p, &r).unwrap();
        let out = apply_hamiltonian(&h, &computational_state(2, 0).unwrap()).unwrap();
        let re: Vec<f64> = out.amps().iter().map(|a| a.re).collect();
        assert_eq!(re, vec![2.0, 0.0, 0.0, 0.3]);
    }

    #[test]
    fn stationary_basis_state_under_dense() {
        let h = hamiltonian(2, 3, 0.1, 0.0, 1);
        let psi0 = central_band_state(6).unwrap();
        let grid = TimeGrid::uniform(50.0, 26).unwrap();
        let evo = evolve_dense(&h, &psi0, &grid, 12).unwrap();
        assert_eq!(evo.states[0], psi0);
        let e = h.diagonal_element(crate::states::central_band_index(6));
        for (t, s) in evo.times.iter().zip(&evo.states) {
            let a = s.amps()[crate::states::central_band_index(6)];
            let want = Complex64::from_polar(1.0, -e * t);
            assert!((a - want).norm() < 1e-10);
        }
        assert!(fidelity_series(&psi0, &evo).unwrap().iter().all(|f| (f - 1.0).abs() < 1e-10));
    }

    #[test]
    fn dense_cap_is_enforced() {
        let h = hamiltonian(2, 3, 0.1, 0.1, 1);
        let psi0 = central_band_state(6).unwrap();
        let grid = TimeGrid::uniform(1.0, 3).unwrap();
        assert!(matches!(evolve_dense(&h, &psi0, &grid, 4), Err(Error::DenseCapExceeded { .. })));
    }

    #[test]
    fn chebyshev_matches_dense_small() {
        let h = hamiltonian(2, 3, 0.1, 0.1, 2);
        let psi0 = central_band_state(6).unwrap();
        let grid = TimeGrid::uniform(30.0, 31).unwrap();
        let d = evolve_dense(&h, &psi0, &grid, 12).unwrap();
        let c = evolve_chebyshev(&h, &psi0, &grid, 1e-12).unwrap();
        assert_eq!(c.states[0], psi0);
        for (a, b) in d.states.iter().zip(&c.states) {
            assert!(a.distance(b) < 1e-9, "distance {}", a.distance(b));
        }
    }

    #[test]
    fn backend_resolution() {
        let opts = EvolveOptions::default();
        assert_eq!(opts.resolve(12), Backend::Dense);
        assert_eq!(opts.resolve(14), Backend::Chebyshev);
    }
}
