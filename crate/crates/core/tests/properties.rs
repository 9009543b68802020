use ising_ge::measures::{bilocal_purity, local_purity, participation_number, purity_decomposition};
use ising_ge::model::LatticeSpec;
use ising_ge::propagator::{
    apply_hamiltonian, evolve_chebyshev, evolve_dense, ChebyshevPropagator, TimeGrid,
};
use ising_ge::states::{central_band_index, central_band_state, computational_state};
use ising_ge::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn random_state(n: usize, seed: u64) -> StateVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps = (0..1usize << n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let mut psi = StateVector::from_amplitudes(n, amps).unwrap();
    psi.normalize();
    psi
}

/// Reduced density matrix on `sites` by explicit partial trace.
fn reduced(psi: &StateVector, sites: &[usize]) -> Vec<Vec<Complex64>> {
    let k = sites.len();
    let d = 1usize << k;
    let n = psi.n();
    let rest: Vec<usize> = (0..n).filter(|q| !sites.contains(q)).collect();
    let embed = |sub: usize, env: usize| -> usize {
        let mut q = 0;
        for (b, &s) in sites.iter().enumerate() {
            q |= ((sub >> b) & 1) << s;
        }
        for (b, &s) in rest.iter().enumerate() {
            q |= ((env >> b) & 1) << s;
        }
        q
    };
    let a = psi.amps();
    let mut rho = vec![vec![Complex64::new(0.0, 0.0); d]; d];
    for env in 0..1usize << rest.len() {
        for r in 0..d {
            for c in 0..d {
                rho[r][c] += a[embed(r, env)] * a[embed(c, env)].conj();
            }
        }
    }
    rho
}

fn purity(rho: &[Vec<Complex64>]) -> f64 {
    rho.iter().flatten().map(|z| z.norm_sqr()).sum()
}

fn oracle_p1(psi: &StateVector) -> f64 {
    let n = psi.n();
    (0..n).map(|i| 2.0 * purity(&reduced(psi, &[i])) - 1.0).sum::<f64>() / n as f64
}

fn oracle_p2(psi: &StateVector, pairs: &[(usize, usize)]) -> f64 {
    let n = psi.n() as f64;
    pairs.iter().map(|&(i, j)| 4.0 * purity(&reduced(psi, &[i, j])) - 1.0).sum::<f64>() * 2.0
        / (3.0 * n)
}

/// Applies an arbitrary SU(2) element to qubit `j`.
fn rotate(psi: &mut StateVector, j: usize, theta: f64, phi: f64, lambda: f64) {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let u = [
        [Complex64::new(c, 0.0), -Complex64::from_polar(s, lambda)],
        [Complex64::from_polar(s, phi), Complex64::from_polar(c, phi + lambda)],
    ];
    let m = 1usize << j;
    let a = psi.amps_mut();
    for q in 0..a.len() {
        if q & m == 0 {
            let (x0, x1) = (a[q], a[q | m]);
            a[q] = u[0][0] * x0 + u[0][1] * x1;
            a[q | m] = u[1][0] * x0 + u[1][1] * x1;
        }
    }
}

fn hamiltonian(n: usize, delta: f64, coupling: f64, seed: u64) -> (LatticeSpec, HamiltonianTerms) {
    let lattice = LatticeSpec::ladder(n).unwrap();
    let params = ModelParams::new(1.0, delta, coupling).unwrap();
    let real = sample_disorder(&lattice, &params, seed, 0).unwrap();
    let h = build_hamiltonian(&lattice, &params, &real).unwrap();
    (lattice, h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn purities_match_partial_traces(half in 1usize..=3, seed: u64) {
        let n = 2 * half;
        let psi = random_state(n, seed);
        let lattice = LatticeSpec::ladder(n).unwrap();
        prop_assert!((local_purity(&psi) - oracle_p1(&psi)).abs() < 1e-10);
        let p2 = bilocal_purity(&psi, &lattice.pairing).unwrap();
        prop_assert!((p2 - oracle_p2(&psi, &lattice.pairing)).abs() < 1e-10);
    }

    #[test]
    fn local_purity_ignores_local_unitaries(seed: u64, angles in prop::collection::vec(0.0..6.3f64, 12)) {
        let mut psi = random_state(4, seed);
        let before = local_purity(&psi);
        for j in 0..4 {
            rotate(&mut psi, j, angles[3 * j], angles[3 * j + 1], angles[3 * j + 2]);
        }
        prop_assert!((local_purity(&psi) - before).abs() < 1e-10);
    }

    #[test]
    fn hamiltonian_action_matches_dense_matrix(seed: u64, coupling in 0.0..0.5f64) {
        let (_, h) = hamiltonian(6, 0.2, coupling, seed);
        let psi = random_state(6, seed ^ 0x5eed);
        let hv = apply_hamiltonian(&h, &psi).unwrap();
        let m = h.to_dense();
        let dim = h.dim();
        for r in 0..dim {
            let expect: Complex64 = (0..dim).map(|c| psi.amps()[c] * m[r * dim + c]).sum();
            prop_assert!((hv.amps()[r] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn evolution_keeps_norm_and_parity(seed: u64, t in 0.0..200.0f64) {
        let (_, h) = hamiltonian(8, 0.1, 0.1, seed);
        let psi0 = central_band_state(8).unwrap();
        let grid = TimeGrid::new(vec![0.0, t]).unwrap();
        let evo = evolve_dense(&h, &psi0, &grid, 12).unwrap();
        let psi = &evo.states[1];
        prop_assert!((psi.norm() - 1.0).abs() < 1e-12);
        prop_assert!((psi.parity_expectation() - psi0.parity_expectation()).abs() < 1e-12);
    }

    #[test]
    fn backends_agree(seed: u64, coupling in 0.0..0.3f64) {
        let (_, h) = hamiltonian(6, 0.1, coupling, seed);
        let psi0 = central_band_state(6).unwrap();
        let grid = TimeGrid::uniform(50.0, 11).unwrap();
        let a = evolve_dense(&h, &psi0, &grid, 12).unwrap();
        let b = evolve_chebyshev(&h, &psi0, &grid, 1e-12).unwrap();
        for (x, y) in a.states.iter().zip(&b.states) {
            prop_assert!(x.distance(y) < 1e-8);
        }
    }

    #[test]
    fn chebyshev_steps_compose(seed: u64, t1 in 0.0..30.0f64, t2 in 0.0..30.0f64) {
        let (_, h) = hamiltonian(6, 0.1, 0.1, seed);
        let psi0 = central_band_state(6).unwrap();
        let mut once = psi0.clone();
        ChebyshevPropagator::new(&h, 1e-12).unwrap().advance(&mut once, t1 + t2).unwrap();
        let mut twice = psi0.clone();
        let mut prop = ChebyshevPropagator::new(&h, 1e-12).unwrap();
        prop.advance(&mut twice, t1).unwrap();
        prop.advance(&mut twice, t2).unwrap();
        prop_assert!(once.distance(&twice) < 1e-9);
    }

    #[test]
    fn decomposition_reassembles_local_purity(seed: u64, t in 0.0..50.0f64) {
        let (_, h) = hamiltonian(6, 0.1, 0.02, seed);
        let c = central_band_index(6);
        let psi0 = computational_state(6, c).unwrap();
        let evo = evolve_dense(&h, &psi0, &TimeGrid::new(vec![0.0, t]).unwrap(), 12).unwrap();
        let d = purity_decomposition(c, &evo.states[1]).unwrap();
        prop_assert!((d.total() - local_purity(&evo.states[1])).abs() < 1e-10);
    }
}

#[test]
fn participation_of_basis_and_uniform_states() {
    let basis = computational_state(4, 5).unwrap();
    assert_eq!(participation_number(&basis), (1.0, 1.0));
    let amp = Complex64::new(0.25, 0.0);
    let uniform = StateVector::from_amplitudes(4, vec![amp; 16]).unwrap();
    let (xi, ipr) = participation_number(&uniform);
    assert!((xi - 1.0 / 16.0).abs() < 1e-15 && (ipr - 16.0).abs() < 1e-12);
}

#[test]
fn alphas_bounded_by_energy_variance() {
    // |α_j| ≤ 1 − F ≤ Var(H) t² for a basis-state start.
    let (_, h) = hamiltonian(6, 0.1, 0.02, 3);
    let c = central_band_index(6);
    let psi0 = computational_state(6, c).unwrap();
    let variance: f64 = h.xxterms.iter().map(|t| t.1 * t.1).sum();
    let grid = TimeGrid::uniform(5.0, 51).unwrap();
    let evo = evolve_dense(&h, &psi0, &grid, 12).unwrap();
    for (t, psi) in grid.times().iter().zip(&evo.states) {
        let d = purity_decomposition(c, psi).unwrap();
        assert!(d.max_alpha() <= 1.0 - d.fidelity + 1e-14);
        assert!(d.max_alpha() <= variance * t * t + 1e-14, "t = {t}");
    }
}
