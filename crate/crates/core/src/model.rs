//! Lattice geometry, disorder sampling, the Pauli-term Hamiltonian and its
//! analytic spectral scales.
//!
//! The model is a random transverse-field Ising lattice
//!
//! ```text
//! H = Σ_j (Δ + δ_j) σ_z^(j) + Σ_<i,j> J_ij σ_x^(i) σ_x^(j)
//! ```
//!
//! with `δ_j ~ U[-δ, δ]` and `J_ij ~ U[-J, J]` on the nearest-neighbour bonds
//! of an open-boundary `rows × cols` grid.
//!
//! Sites are labelled column-major (`index = col * rows + row`) and qubit `j`
//! lives on bit `j` of a basis-state integer. Indices are 0-based throughout;
//! `|0⟩` is the `+1` eigenstate of `σ_z`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest lattice any routine in this crate will build a state space for.
pub const MAX_QUBITS: usize = 24;

/// Unordered nearest-neighbour pair, stored with `.0 < .1`.
pub type Bond = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub rows: usize,
    pub cols: usize,
    /// Horizontal and vertical adjacencies, open boundaries.
    pub bonds: Vec<Bond>,
    /// Perfect matching of the sites by bonds; the pair set of the bi-local algebra.
    pub pairing: Vec<Bond>,
}

impl LatticeSpec {
    pub fn n(&self) -> usize {
        self.rows * self.cols
    }

    pub fn site(&self, row: usize, col: usize) -> usize {
        col * self.rows + row
    }

    /// Default `2 × n/2` ladder.
    pub fn ladder(n: usize) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::InvalidLattice(format!(
                "ladder needs an even qubit count >= 2, got {n}"
            )));
        }
        build_lattice(2, n / 2)
    }

    pub fn is_bond(&self, a: usize, b: usize) -> bool {
        let key = (a.min(b), a.max(b));
        self.bonds.contains(&key)
    }

    /// Checks that `pairs` is a perfect matching of this lattice by bonds.
    pub fn validate_matching(&self, pairs: &[Bond]) -> Result<()> {
        let n = self.n();
        let mut seen = vec![false; n];
        for &(a, b) in pairs {
            if a >= n || b >= n || a == b {
                return Err(Error::InvalidMatching(format!("pair ({a}, {b}) out of range")));
            }
            if !self.is_bond(a, b) {
                return Err(Error::InvalidMatching(format!(
                    "pair ({a}, {b}) is not a nearest-neighbour bond"
                )));
            }
            for s in [a, b] {
                if std::mem::replace(&mut seen[s], true) {
                    return Err(Error::InvalidMatching(format!("site {s} appears twice")));
                }
            }
        }
        if let Some(s) = seen.iter().position(|&v| !v) {
            return Err(Error::InvalidMatching(format!("site {s} is unpaired")));
        }
        Ok(())
    }
}

/// Builds an open-boundary `rows × cols` grid.
///
/// The pairing takes consecutive labels `(2k, 2k+1)` (vertical rungs) when
/// `rows` is even, and horizontal neighbours `(row, 2m)–(row, 2m+1)`
/// otherwise; for a single row both rules coincide.
pub fn build_lattice(rows: usize, cols: usize) -> Result<LatticeSpec> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidLattice(format!("zero dimension {rows}x{cols}")));
    }
    let n = rows * cols;
    if n < 2 {
        return Err(Error::InvalidLattice("need at least two sites".into()));
    }
    if n % 2 != 0 {
        return Err(Error::InvalidLattice(format!(
            "{rows}x{cols} has an odd site count; no perfect pairing exists"
        )));
    }
    if n > MAX_QUBITS {
        return Err(Error::InvalidLattice(format!("{n} sites exceeds the {MAX_QUBITS}-qubit limit")));
    }

    let idx = |r: usize, c: usize| c * rows + r;
    let mut bonds = Vec::new();
    for c in 0..cols {
        for r in 0..rows {
            if r + 1 < rows {
                bonds.push((idx(r, c), idx(r + 1, c)));
            }
            if c + 1 < cols {
                bonds.push((idx(r, c), idx(r, c + 1)));
            }
        }
    }
    bonds.sort_unstable();

    let pairing = if rows % 2 == 0 {
        (0..n / 2).map(|k| (2 * k, 2 * k + 1)).collect()
    } else {
        let mut p = Vec::with_capacity(n / 2);
        for r in 0..rows {
            for m in 0..cols / 2 {
                p.push((idx(r, 2 * m), idx(r, 2 * m + 1)));
            }
        }
        p.sort_unstable();
        p
    };

    Ok(LatticeSpec { rows, cols, bonds, pairing })
}

/// Energy parameters; `delta` and `coupling` are disorder half-widths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    #[serde(rename = "Delta", alias = "splitting", default = "default_splitting")]
    pub splitting: f64,
    pub delta: f64,
    #[serde(rename = "J", alias = "coupling")]
    pub coupling: f64,
}

fn default_splitting() -> f64 {
    1.0
}

impl ModelParams {
    pub fn new(splitting: f64, delta: f64, coupling: f64) -> Result<Self> {
        let p = Self { splitting, delta, coupling };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.splitting.is_finite() && self.delta.is_finite() && self.coupling.is_finite();
        if !finite || self.delta < 0.0 || self.coupling < 0.0 {
            return Err(Error::InvalidParams(format!(
                "need finite Delta and delta, J >= 0; got {self:?}"
            )));
        }
        Ok(())
    }
}

/// One disorder draw. `couplings[b]` belongs to `lattice.bonds[b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderRealization {
    pub deltas: Vec<f64>,
    pub couplings: Vec<f64>,
    pub bonds: Vec<Bond>,
    pub seed: u64,
    pub index: u64,
}

/// Uniform sample on the closed interval `[-half, half]`.
fn symmetric_uniform<R: Rng>(rng: &mut R, half: f64) -> f64 {
    if half == 0.0 {
        0.0
    } else {
        rng.random_range(-half..=half)
    }
}

/// Draws realization `index` of the ensemble keyed by `seed`.
///
/// Each `(seed, index)` owns its own ChaCha stream; on-site shifts are drawn
/// first in site order, then couplings in bond order. The result does not
/// depend on which other realizations were drawn, or in what order.
pub fn sample_disorder(
    lattice: &LatticeSpec,
    params: &ModelParams,
    seed: u64,
    index: u64,
) -> Result<DisorderRealization> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let deltas = (0..lattice.n()).map(|_| symmetric_uniform(&mut rng, params.delta)).collect();
    let couplings = lattice
        .bonds
        .iter()
        .map(|_| symmetric_uniform(&mut rng, params.coupling))
        .collect();
    Ok(DisorderRealization {
        deltas,
        couplings,
        bonds: lattice.bonds.clone(),
        seed,
        index,
    })
}

/// `H` as a weighted sum of `σ_z^(i)` and `σ_x^(i) σ_x^(j)` strings.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianTerms {
    pub n: usize,
    pub zterms: Vec<(usize, f64)>,
    pub xxterms: Vec<(Bond, f64)>,
}

pub fn build_hamiltonian(
    lattice: &LatticeSpec,
    params: &ModelParams,
    real: &DisorderRealization,
) -> Result<HamiltonianTerms> {
    let n = lattice.n();
    if real.deltas.len() != n {
        return Err(Error::Mismatch(format!(
            "realization has {} on-site shifts for {n} sites",
            real.deltas.len()
        )));
    }
    if real.bonds != lattice.bonds || real.couplings.len() != lattice.bonds.len() {
        return Err(Error::Mismatch("realization bond set differs from lattice bonds".into()));
    }
    let zterms = real
        .deltas
        .iter()
        .enumerate()
        .map(|(i, d)| (i, params.splitting + d))
        .collect();
    let xxterms = lattice.bonds.iter().copied().zip(real.couplings.iter().copied()).collect();
    Ok(HamiltonianTerms { n, zterms, xxterms })
}

impl HamiltonianTerms {
    pub fn dim(&self) -> usize {
        1usize << self.n
    }

    pub fn term_count(&self) -> usize {
        self.zterms.len() + self.xxterms.len()
    }

    /// Diagonal element `⟨q|H|q⟩ = Σ_j (-1)^{bit_j(q)} w_j`.
    pub fn diagonal_element(&self, q: usize) -> f64 {
        self.zterms
            .iter()
            .map(|&(j, w)| if q >> j & 1 == 0 { w } else { -w })
            .sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut site_weight = vec![0.0; self.n];
        for &(j, w) in &self.zterms {
            site_weight[j] += w;
        }
        let dim = self.dim();
        let mut diag = vec![0.0; dim];
        diag[0] = site_weight.iter().sum();
        // Setting the lowest bit j of q lowers the element by 2 w_j.
        for q in 1..dim {
            let j = q.trailing_zeros() as usize;
            diag[q] = diag[q & (q - 1)] - 2.0 * site_weight[j];
        }
        diag
    }

    /// `(mask, weight)` pairs: each `σ_x σ_x` term maps `|q⟩` to `|q ^ mask⟩`.
    pub fn flip_masks(&self) -> Vec<(usize, f64)> {
        self.xxterms.iter().map(|&((i, j), w)| ((1 << i) | (1 << j), w)).collect()
    }

    /// Row-major dense matrix in the computational basis.
    pub fn to_dense(&self) -> Vec<f64> {
        let dim = self.dim();
        let mut m = vec![0.0; dim * dim];
        let diag = self.diagonal();
        let flips = self.flip_masks();
        for q in 0..dim {
            m[q * dim + q] = diag[q];
            for &(mask, w) in &flips {
                m[q * dim + (q ^ mask)] += w;
            }
        }
        m
    }

    /// Gershgorin bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        self.zterms.iter().map(|t| t.1.abs()).sum::<f64>()
            + self.xxterms.iter().map(|t| t.1.abs()).sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Perturbative,
    Fgr,
    Ergodic,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Perturbative => "perturbative",
            Regime::Fgr => "fgr",
            Regime::Ergodic => "ergodic",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Closed-form band and width estimates for band `k` of an `n`-qubit lattice.
///
/// Quantities that divide by `δ` are `None` when `δ = 0`; such systems are
/// classified ergodic outright.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralScales {
    pub n: usize,
    pub k: usize,
    pub band_energy: f64,
    pub band_degeneracy: f64,
    /// `δ √n`.
    pub band_width: f64,
    /// Fermi golden rule width `J² n / δ`.
    pub gamma_fgr: Option<f64>,
    /// Ergodic width, taken as `J`.
    pub gamma_ergodic: f64,
    /// `δ / n`.
    pub j_critical: Option<f64>,
    /// `δ / n^{1/4}`.
    pub j_ergodic: Option<f64>,
    pub regime: Regime,
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64).round()
}

pub fn spectral_scales(params: &ModelParams, n: usize, k: usize) -> Result<SpectralScales> {
    params.validate()?;
    if n == 0 || k > n {
        return Err(Error::InvalidParams(format!("band index k={k} outside 0..={n}")));
    }
    let nf = n as f64;
    let (delta, j) = (params.delta, params.coupling);
    let (gamma_fgr, j_critical, j_ergodic) = if delta > 0.0 {
        (Some(j * j * nf / delta), Some(delta / nf), Some(delta / nf.powf(0.25)))
    } else {
        (None, None, None)
    };
    let regime = match (j_critical, j_ergodic) {
        (Some(jc), Some(_)) if j < jc => Regime::Perturbative,
        (Some(_), Some(je)) if j < je => Regime::Fgr,
        _ => Regime::Ergodic,
    };
    Ok(SpectralScales {
        n,
        k,
        band_energy: params.splitting * (2.0 * k as f64 - nf),
        band_degeneracy: binomial(n, k),
        band_width: delta * nf.sqrt(),
        gamma_fgr,
        gamma_ergodic: j,
        j_critical,
        j_ergodic,
        regime,
    })
}

impl SpectralScales {
    /// Width that sets the decay time scale in this regime.
    pub fn decay_width(&self) -> f64 {
        match (self.regime, self.gamma_fgr) {
            (Regime::Ergodic, _) | (_, None) => self.gamma_ergodic,
            (_, Some(g)) => g,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_2x5() {
        let l = build_lattice(2, 5).unwrap();
        assert_eq!(l.n(), 10);
        assert_eq!(l.bonds.len(), 13);
        assert_eq!(l.pairing, vec![(0, 1), (2, 3), (4, 5), (6, 7), (8, 9)]);
        l.validate_matching(&l.pairing).unwrap();
    }

    #[test]
    fn smallest_lattice() {
        let l = build_lattice(1, 2).unwrap();
        assert_eq!(l.bonds, vec![(0, 1)]);
        assert_eq!(l.pairing, vec![(0, 1)]);
    }

    #[test]
    fn ladder_2x7_bond_count() {
        assert_eq!(build_lattice(2, 7).unwrap().bonds.len(), 19);
    }

    #[test]
    fn ladder_bond_formula() {
        for half in 1..=8 {
            let l = LatticeSpec::ladder(2 * half).unwrap();
            assert_eq!(l.bonds.len(), half + 2 * (half - 1));
        }
    }

    #[test]
    fn odd_rows_use_horizontal_pairs() {
        let l = build_lattice(3, 2).unwrap();
        l.validate_matching(&l.pairing).unwrap();
        assert_eq!(l.pairing, vec![(0, 3), (1, 4), (2, 5)]);
    }

    #[test]
    fn bonds_are_adjacent_and_unique() {
        for (r, c) in [(2, 5), (4, 4), (3, 4), (1, 8)] {
            let l = build_lattice(r, c).unwrap();
            let coords = |s: usize| (s % r, s / r);
            let mut seen = std::collections::HashSet::new();
            for &(a, b) in &l.bonds {
                let ((ra, ca), (rb, cb)) = (coords(a), coords(b));
                assert_eq!(ra.abs_diff(rb) + ca.abs_diff(cb), 1);
                assert!(seen.insert((a, b)));
            }
            assert_eq!(l.bonds.len(), r * (c - 1) + c * (r - 1));
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(build_lattice(3, 3).is_err());
        assert!(build_lattice(0, 4).is_err());
        assert!(build_lattice(1, 1).is_err());
    }

    #[test]
    fn matching_validation_errors() {
        let l = build_lattice(2, 2).unwrap();
        assert!(l.validate_matching(&[(0, 1)]).is_err());
        assert!(l.validate_matching(&[(0, 3), (1, 2)]).is_err());
        assert!(l.validate_matching(&[(0, 1), (1, 3)]).is_err());
        assert!(l.validate_matching(&[(0, 2), (1, 3)]).is_ok());
    }

    #[test]
    fn zero_width_disorder_is_exactly_zero() {
        let l = build_lattice(2, 5).unwrap();
        let p = ModelParams::new(1.0, 0.0, 0.3).unwrap();
        let r = sample_disorder(&l, &p, 9, 0).unwrap();
        assert!(r.deltas.iter().all(|&d| d == 0.0));
        assert!(r.couplings.iter().all(|&c| c.abs() <= 0.3));
    }

    #[test]
    fn disorder_is_deterministic_per_seed_and_index() {
        let l = build_lattice(2, 5).unwrap();
        let p = ModelParams::new(1.0, 0.1, 0.1).unwrap();
        let a = sample_disorder(&l, &p, 42, 3).unwrap();
        let b = sample_disorder(&l, &p, 42, 3).unwrap();
        assert_eq!(a, b);
        let c = sample_disorder(&l, &p, 42, 4).unwrap();
        assert_ne!(a.deltas, c.deltas);
    }

    #[test]
    fn disorder_matches_uniform_law() {
        let l = build_lattice(2, 5).unwrap();
        let p = ModelParams::new(1.0, 0.1, 0.0).unwrap();
        let mut all = Vec::new();
        for i in 0..1000 {
            all.extend(sample_disorder(&l, &p, 7, i).unwrap().deltas);
        }
        assert_eq!(all.len(), 10_000);
        assert!(all.iter().all(|d| d.abs() <= 0.1));
        let mean = all.iter().sum::<f64>() / all.len() as f64;
        // Uniform[-δ, δ] has standard deviation δ/√3.
        let sem = 0.1 / 3f64.sqrt() / (all.len() as f64).sqrt();
        assert!(mean.abs() < 3.0 * sem, "mean {mean} vs sem {sem}");
        let var = all.iter().map(|d| d * d).sum::<f64>() / all.len() as f64;
        assert!((var - 0.01 / 3.0).abs() < 0.05 * 0.01 / 3.0);
    }

    #[test]
    fn two_qubit_dense_form() {
        let l = build_lattice(1, 2).unwrap();
        let p = ModelParams::new(1.0, 0.0, 0.5).unwrap();
        let mut r = sample_disorder(&l, &p, 1, 0).unwrap();
        r.couplings[0] = 0.37;
        let h = build_hamiltonian(&l, &p, &r).unwrap();
        let m = h.to_dense();
        #[rustfmt::skip]
        let expect = [
            2.0, 0.0, 0.0, 0.37,
            0.0, 0.0, 0.37, 0.0,
            0.0, 0.37, 0.0, 0.0,
            0.37, 0.0, 0.0, -2.0,
        ];
        assert_eq!(m, expect);
    }

    #[test]
    fn diagonal_matches_elementwise() {
        let l = build_lattice(2, 3).unwrap();
        let p = ModelParams::new(1.0, 0.2, 0.1).unwrap();
        let h = build_hamiltonian(&l, &p, &sample_disorder(&l, &p, 5, 0).unwrap()).unwrap();
        let d = h.diagonal();
        for (q, &v) in d.iter().enumerate() {
            assert!((v - h.diagonal_element(q)).abs() < 1e-12);
        }
        assert_eq!(h.term_count(), 6 + 7);
    }

    #[test]
    fn mismatched_realization_rejected() {
        let l = build_lattice(2, 3).unwrap();
        let other = build_lattice(3, 2).unwrap();
        let p = ModelParams::new(1.0, 0.2, 0.1).unwrap();
        let r = sample_disorder(&other, &p, 5, 0).unwrap();
        assert!(matches!(build_hamiltonian(&l, &p, &r), Err(Error::Mismatch(_))));
    }

    #[test]
    fn central_band_scales() {
        let p = ModelParams::new(1.0, 0.1, 0.01).unwrap();
        let s = spectral_scales(&p, 10, 5).unwrap();
        assert_eq!(s.band_degeneracy, 252.0);
        assert_eq!(s.band_energy, 0.0);
        assert!((s.gamma_fgr.unwrap() - 0.01).abs() < 1e-15);
        assert!((s.j_critical.unwrap() - 0.01).abs() < 1e-15);
        assert!((s.j_ergodic.unwrap() - 0.056234).abs() < 1e-5);
        assert!((s.band_width - 0.316228).abs() < 1e-5);
        assert_eq!(s.regime, Regime::Fgr);
    }

    #[test]
    fn regime_boundaries() {
        let scale = |j: f64| spectral_scales(&ModelParams::new(1.0, 0.1, j).unwrap(), 10, 5).unwrap();
        assert_eq!(scale(0.1).regime, Regime::Ergodic);
        assert_eq!(scale(0.005).regime, Regime::Perturbative);
        assert_eq!(scale(0.03).regime, Regime::Fgr);
        let zero = spectral_scales(&ModelParams::new(1.0, 0.0, 0.1).unwrap(), 10, 5).unwrap();
        assert_eq!(zero.regime, Regime::Ergodic);
        assert!(zero.gamma_fgr.is_none() && zero.j_critical.is_none());
    }

    #[test]
    fn critical_couplings_ordered() {
        for n in 2..=16 {
            let s = spectral_scales(&ModelParams::new(1.0, 0.2, 0.01).unwrap(), n, 0).unwrap();
            assert!(s.j_critical.unwrap() < s.j_ergodic.unwrap());
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(10, 5), 252.0);
        assert_eq!(binomial(12, 6), 924.0);
        assert_eq!(binomial(14, 7), 3432.0);
        assert_eq!(binomial(4, 0), 1.0);
    }
}
