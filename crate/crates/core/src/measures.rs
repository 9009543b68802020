//! Observables on state vectors: local and bi-local purities, the
//! Meyer-Wallach measure, participation numbers and the decomposition of the
//! local purity around the survival probability.
//!
//! Expectation values are evaluated directly on the amplitudes with bit
//! masks; no operator matrices are built.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Bond, LatticeSpec};
use crate::states::{parity_sign, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
}

/// Pauli string in `i^{#Y} X^x Z^z` form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PauliString {
    pub x_mask: usize,
    pub z_mask: usize,
    pub y_count: u32,
}

impl PauliString {
    pub fn new(factors: &[(usize, Pauli)]) -> Self {
        let mut s = PauliString { x_mask: 0, z_mask: 0, y_count: 0 };
        for &(site, p) in factors {
            let bit = 1usize << site;
            match p {
                Pauli::I => {}
                Pauli::X => s.x_mask ^= bit,
                Pauli::Z => s.z_mask ^= bit,
                Pauli::Y => {
                    s.x_mask ^= bit;
                    s.z_mask ^= bit;
                    s.y_count += 1;
                }
            }
        }
        s
    }

    /// `⟨ψ|P|ψ⟩`; real for any Pauli string.
    pub fn expectation(&self, psi: &StateVector) -> f64 {
        let amps = psi.amps();
        let mut acc = Complex64::new(0.0, 0.0);
        for (q, a) in amps.iter().enumerate() {
            let b = amps[q ^ self.x_mask];
            let v = b.conj() * a;
            if (q & self.z_mask).count_ones() % 2 == 0 {
                acc += v;
            } else {
                acc -= v;
            }
        }
        let phase = match self.y_count % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        (phase * acc).re
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlochVector {
    pub site: usize,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn length_sqr(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }
}

fn check_site(psi: &StateVector, i: usize) -> Result<()> {
    if i >= psi.n() {
        return Err(Error::Mismatch(format!("site {i} outside a {}-qubit state", psi.n())));
    }
    Ok(())
}

pub fn single_qubit_bloch(psi: &StateVector, i: usize) -> Result<BlochVector> {
    check_site(psi, i)?;
    Ok(bloch_unchecked(psi.amps(), i))
}

fn bloch_unchecked(amps: &[Complex64], i: usize) -> BlochVector {
    let bit = 1usize << i;
    let (mut coh, mut z) = (Complex64::new(0.0, 0.0), 0.0);
    for q in (0..amps.len()).filter(|q| q & bit == 0) {
        let (a0, a1) = (amps[q], amps[q | bit]);
        coh += a0.conj() * a1;
        z += a0.norm_sqr() - a1.norm_sqr();
    }
    BlochVector { site: i, x: 2.0 * coh.re, y: 2.0 * coh.im, z }
}

pub fn bloch_vectors(psi: &StateVector) -> Vec<BlochVector> {
    (0..psi.n()).map(|i| bloch_unchecked(psi.amps(), i)).collect()
}

/// `P1 = (1/n) Σ_{i, α∈{x,y,z}} ⟨σ_α^(i)⟩²`.
pub fn local_purity(psi: &StateVector) -> f64 {
    let n = psi.n() as f64;
    bloch_vectors(psi).iter().map(BlochVector::length_sqr).sum::<f64>() / n
}

/// Meyer-Wallach global entanglement `Q = 1 − P1`.
pub fn meyer_wallach(psi: &StateVector) -> f64 {
    1.0 - local_purity(psi)
}

/// Sum of the 15 squared non-identity correlators `⟨σ_α^(i) σ_β^(j)⟩²`.
///
/// Strings sharing an X mask are accumulated in one sweep, four sweeps in all.
pub fn pair_correlation_sum(psi: &StateVector, (i, j): Bond) -> f64 {
    let amps = psi.amps();
    let (bi, bj) = (1usize << i, 1usize << j);
    let z_masks = [0, bi, bj, bi | bj];
    let mut total = 0.0;
    for x_mask in z_masks {
        let mut acc = [Complex64::new(0.0, 0.0); 4];
        for (q, a) in amps.iter().enumerate() {
            let v = amps[q ^ x_mask].conj() * a;
            for (slot, &z) in acc.iter_mut().zip(&z_masks) {
                if (q & z).count_ones() % 2 == 0 {
                    *slot += v;
                } else {
                    *slot -= v;
                }
            }
        }
        for (slot, &z) in acc.iter().zip(&z_masks) {
            if x_mask == 0 && z == 0 {
                continue;
            }
            // Each Y factor contributes a phase i; the square only sees its parity.
            let e = match (x_mask & z).count_ones() % 2 {
                0 => slot.re,
                _ => slot.im,
            };
            total += e * e;
        }
    }
    total
}

/// `P2 = (2/(3n)) Σ_pairs Σ̃_{α,β} ⟨σ_α^(i) σ_β^(j)⟩²` over a perfect matching.
pub fn bilocal_purity(psi: &StateVector, pairing: &[Bond]) -> Result<f64> {
    let n = psi.n();
    if pairing.len() * 2 != n {
        return Err(Error::InvalidMatching(format!(
            "{} pairs for {n} qubits",
            pairing.len()
        )));
    }
    let mut seen = vec![false; n];
    for &(a, b) in pairing {
        if a >= n || b >= n || a == b || seen[a] || seen[b] {
            return Err(Error::InvalidMatching(format!("pair ({a}, {b}) overlaps or is out of range")));
        }
        seen[a] = true;
        seen[b] = true;
    }
    let sum: f64 = pairing.iter().map(|&p| pair_correlation_sum(psi, p)).sum();
    Ok(2.0 * sum / (3.0 * n as f64))
}

/// Bi-local purity with the lattice's own pairing, checked against its bonds.
pub fn bilocal_purity_on(psi: &StateVector, lattice: &LatticeSpec) -> Result<f64> {
    lattice.validate_matching(&lattice.pairing)?;
    bilocal_purity(psi, &lattice.pairing)
}

/// `ξ = Σ_q |ψ_q|⁴` and `I = 1/ξ` in the computational basis.
pub fn participation_number(psi: &StateVector) -> (f64, f64) {
    let xi: f64 = psi.amps().iter().map(|a| a.norm_sqr().powi(2)).sum();
    (xi, 1.0 / xi)
}

/// `P1(t) = F² + (1/n) Σ_j (2 F (−)^{π_j(c)} α_j + α_j²)` for a trajectory
/// started in basis state `|c⟩`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PurityDecomposition {
    pub fidelity: f64,
    pub f2: f64,
    pub cross: f64,
    pub quad: f64,
    /// `α_j = Σ_{p≠c} |⟨p|ψ_t⟩|² (−)^{π_j(p)}`.
    pub alphas: Vec<f64>,
}

impl PurityDecomposition {
    pub fn total(&self) -> f64 {
        self.f2 + self.cross + self.quad
    }

    pub fn max_alpha(&self) -> f64 {
        self.alphas.iter().fold(0.0, |m, a| m.max(a.abs()))
    }
}

pub fn purity_decomposition(c: usize, psi: &StateVector) -> Result<PurityDecomposition> {
    let n = psi.n();
    if c >= psi.dim() {
        return Err(Error::Mismatch(format!("basis index {c} outside a {n}-qubit state")));
    }
    let amps = psi.amps();
    let fidelity = amps[c].norm_sqr();
    let mut alphas = vec![0.0; n];
    for (p, a) in amps.iter().enumerate() {
        if p == c {
            continue;
        }
        let w = a.norm_sqr();
        for (j, alpha) in alphas.iter_mut().enumerate() {
            *alpha += w * parity_sign(p, j);
        }
    }
    let nf = n as f64;
    let cross = alphas
        .iter()
        .enumerate()
        .map(|(j, a)| 2.0 * fidelity * parity_sign(c, j) * a)
        .sum::<f64>()
        / nf;
    let quad = alphas.iter().map(|a| a * a).sum::<f64>() / nf;
    Ok(PurityDecomposition { fidelity, f2: fidelity * fidelity, cross, quad, alphas })
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> f64 {
    a.inner(b).norm_sqr()
}

/// The four per-sample observables recorded along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Observables {
    pub p1: f64,
    pub p2: f64,
    pub fidelity: f64,
    pub xi: f64,
}

pub fn observe(psi: &StateVector, psi0: &StateVector, pairing: &[Bond]) -> Result<Observables> {
    Ok(Observables {
        p1: local_purity(psi),
        p2: bilocal_purity(psi, pairing)?,
        fidelity: fidelity(psi0, psi),
        xi: participation_number(psi).0,
    })
}
