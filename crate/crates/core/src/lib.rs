//! Exact dynamics of disordered spin-1/2 lattices and the generalized
//! entanglement measures used to classify them.
//!
//! The pipeline is: [`model`] builds a lattice, samples disorder and assembles
//! the Hamiltonian; [`states`] prepares initial vectors; [`propagator`] evolves
//! them exactly; [`measures`] evaluates purities, fidelity and participation;
//! [`analysis`] averages over disorder and fits decay laws, critical times and
//! saturation values.
//!
//! Qubits and sites are 0-based throughout. Qubit `j` is bit `j` of the basis
//! index and `|0⟩` is the `+1` eigenstate of `σ_z`.

pub mod analysis;
pub mod error;
pub mod measures;
pub mod model;
pub mod propagator;
pub mod states;

pub use error::{Error, Result};
pub use model::{
    build_hamiltonian, build_lattice, sample_disorder, spectral_scales, DisorderRealization,
    HamiltonianTerms, LatticeSpec, ModelParams, Regime, SpectralScales,
};
pub use states::{StateDesignator, StateVector};
