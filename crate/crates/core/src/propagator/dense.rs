//! Dense backend: `ψ_t = V e^{-iEt} Vᵀ ψ_0` from a full real-symmetric
//! eigendecomposition.
//!
//! `H` commutes with `Π_j σ_z^(j)`, so the even and odd parity sectors are
//! diagonalised separately and a sector is skipped when `ψ_0` has no weight in it.

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::HamiltonianTerms;
use crate::states::StateVector;

use super::TimeGrid;

/// Time samples evaluated per matrix product.
const TIME_CHUNK: usize = 64;

struct Sector {
    basis: Vec<usize>,
    energies: Vec<f64>,
    /// `None` when the sector is already diagonal.
    vectors: Option<Mat<f64>>,
    /// `Vᵀ ψ_0` restricted to the sector, split into real and imaginary parts.
    coeff_re: Vec<f64>,
    coeff_im: Vec<f64>,
}

fn sector_basis(n: usize, parity: u32) -> Vec<usize> {
    (0..1usize << n).filter(|q| q.count_ones() % 2 == parity).collect()
}

fn sector_matrix(h: &HamiltonianTerms, basis: &[usize]) -> Mat<f64> {
    let mut position = vec![usize::MAX; h.dim()];
    for (i, &q) in basis.iter().enumerate() {
        position[q] = i;
    }
    let diag = h.diagonal();
    let flips = h.flip_masks();
    let d = basis.len();
    let mut m = Mat::<f64>::zeros(d, d);
    for (i, &q) in basis.iter().enumerate() {
        m[(i, i)] = diag[q];
        for &(mask, w) in &flips {
            let j = position[q ^ mask];
            debug_assert!(j != usize::MAX, "flip left the parity sector");
            m[(i, j)] += w;
        }
    }
    m
}

fn diagonalize(m: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let energies = (0..s.nrows()).map(|k| s[k]).collect();
    Ok((energies, evd.U().to_owned()))
}

/// Full spectrum of `H` in ascending order.
pub fn eigenvalues(h: &HamiltonianTerms) -> Result<Vec<f64>> {
    let mut all = Vec::with_capacity(h.dim());
    for parity in 0..2 {
        let basis = sector_basis(h.n, parity);
        let m = sector_matrix(h, &basis);
        all.extend(
            m.self_adjoint_eigenvalues(Side::Lower)
                .map_err(|e| Error::Eigen(format!("{e:?}")))?,
        );
    }
    all.sort_by(f64::total_cmp);
    Ok(all)
}

/// A diagonalised Hamiltonian bound to one initial state.
pub struct DenseEvolver {
    n: usize,
    sectors: Vec<Sector>,
}

impl DenseEvolver {
    pub fn new(h: &HamiltonianTerms, psi0: &StateVector) -> Result<Self> {
        if psi0.n() != h.n {
            return Err(Error::Mismatch(format!("{}-qubit state for a {}-qubit Hamiltonian", psi0.n(), h.n)));
        }
        let mut sectors = Vec::with_capacity(2);
        for parity in 0..2 {
            let basis = sector_basis(h.n, parity);
            if basis.iter().all(|&q| psi0.amps()[q].norm_sqr() == 0.0) {
                continue;
            }
            if h.xxterms.iter().all(|t| t.1 == 0.0) {
                let diag = h.diagonal();
                sectors.push(Sector {
                    energies: basis.iter().map(|&q| diag[q]).collect(),
                    coeff_re: basis.iter().map(|&q| psi0.amps()[q].re).collect(),
                    coeff_im: basis.iter().map(|&q| psi0.amps()[q].im).collect(),
                    basis,
                    vectors: None,
                });
                continue;
            }
            let (energies, vectors) = diagonalize(&sector_matrix(h, &basis))?;
            let d = basis.len();
            let (mut coeff_re, mut coeff_im) = (vec![0.0; d], vec![0.0; d]);
            for k in 0..d {
                let (mut re, mut im) = (0.0, 0.0);
                for (i, &q) in basis.iter().enumerate() {
                    let v = vectors[(i, k)];
                    re += v * psi0.amps()[q].re;
                    im += v * psi0.amps()[q].im;
                }
                coeff_re[k] = re;
                coeff_im[k] = im;
            }
            let vectors = Some(vectors);
            sectors.push(Sector { basis, energies, vectors, coeff_re, coeff_im });
        }
        Ok(Self { n: h.n, sectors })
    }

    /// Eigenvalues of the sectors the initial state occupies.
    pub fn occupied_energies(&self) -> impl Iterator<Item = f64> + '_ {
        self.sectors.iter().flat_map(|s| s.energies.iter().copied())
    }

    pub fn run<F>(&self, grid: &TimeGrid, mut observe: F) -> Result<()>
    where
        F: FnMut(usize, f64, &StateVector) -> Result<()>,
    {
        let dim = 1usize << self.n;
        let times = grid.times();
        let mut states: Vec<Vec<Complex64>> = Vec::new();
        for (chunk_idx, chunk) in times.chunks(TIME_CHUNK).enumerate() {
            states.clear();
            states.resize_with(chunk.len(), || vec![Complex64::new(0.0, 0.0); dim]);
            for sector in &self.sectors {
                let d = sector.basis.len();
                // Phased coefficients for every time in the chunk, one column per time.
                let w_re = Mat::<f64>::from_fn(d, chunk.len(), |k, c| {
                    let (s, co) = (-sector.energies[k] * chunk[c]).sin_cos();
                    sector.coeff_re[k] * co - sector.coeff_im[k] * s
                });
                let w_im = Mat::<f64>::from_fn(d, chunk.len(), |k, c| {
                    let (s, co) = (-sector.energies[k] * chunk[c]).sin_cos();
                    sector.coeff_re[k] * s + sector.coeff_im[k] * co
                });
                let (out_re, out_im) = match &sector.vectors {
                    Some(v) => (v * &w_re, v * &w_im),
                    None => (w_re, w_im),
                };
                for (c, state) in states.iter_mut().enumerate() {
                    for (i, &q) in sector.basis.iter().enumerate() {
                        state[q] = Complex64::new(out_re[(i, c)], out_im[(i, c)]);
                    }
                }
            }
            for (c, amps) in states.drain(..).enumerate() {
                let k = chunk_idx * TIME_CHUNK + c;
                let psi = StateVector::from_amplitudes(self.n, amps)?;
                observe(k, times[k], &psi)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{binomial, build_hamiltonian, build_lattice, sample_disorder, ModelParams};

    #[test]
    fn clean_spectrum_has_binomial_bands() {
        let l = build_lattice(2, 3).unwrap();
        let p = ModelParams::new(1.0, 0.0, 0.0).unwrap();
        let h = build_hamiltonian(&l, &p, &sample_disorder(&l, &p, 0, 0).unwrap()).unwrap();
        let ev = eigenvalues(&h).unwrap();
        for k in 0..=6usize {
            let e = 2.0 * k as f64 - 6.0;
            let count = ev.iter().filter(|&&x| (x - e).abs() < 1e-12).count();
            assert_eq!(count as f64, binomial(6, k));
        }
    }

    #[test]
    fn uncoupled_spectrum_is_signed_sums() {
        let l = build_lattice(2, 2).unwrap();
        let p = ModelParams::new(1.0, 0.3, 0.0).unwrap();
        let h = build_hamiltonian(&l, &p, &sample_disorder(&l, &p, 4, 0).unwrap()).unwrap();
        let mut want: Vec<f64> = (0..16).map(|q| h.diagonal_element(q)).collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in eigenvalues(&h).unwrap().iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
