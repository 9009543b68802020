//! Initial states as normalized amplitude vectors over the computational basis.
//!
//! Amplitude `amps[q]` multiplies `|q⟩`, where qubit `j` (0-based) is bit `j`
//! of `q`. Symbol strings list qubits in index order, so the leftmost symbol
//! is qubit 0.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::MAX_QUBITS;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Wraps `amps` after checking the dimension; does not normalize.
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        if n > MAX_QUBITS || amps.len() != 1usize << n {
            return Err(Error::Mismatch(format!(
                "{} amplitudes for {n} qubits",
                amps.len()
            )));
        }
        Ok(Self { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amps(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Rescales to unit norm and returns the norm before rescaling.
    pub fn normalize(&mut self) -> f64 {
        let norm = self.norm();
        if norm > 0.0 {
            let inv = 1.0 / norm;
            self.amps.iter_mut().for_each(|a| *a *= inv);
        }
        norm
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Euclidean distance `‖self − other‖`.
    pub fn distance(&self, other: &StateVector) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Expectation of the global spin-flip parity `Π_j σ_z^(j)`.
    pub fn parity_expectation(&self) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(q, a)| if q.count_ones() % 2 == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum()
    }

    /// `⟨Σ_j σ_z^(j)⟩`.
    pub fn magnetization(&self) -> f64 {
        let n = self.n as i64;
        self.amps
            .iter()
            .enumerate()
            .map(|(q, a)| (n - 2 * q.count_ones() as i64) as f64 * a.norm_sqr())
            .sum()
    }

    pub fn nonzero_count(&self, eps: f64) -> usize {
        self.amps.iter().filter(|a| a.norm() > eps).count()
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::InvalidState(format!("qubit count {n} outside 1..={MAX_QUBITS}")));
    }
    Ok(())
}

/// `(-1)^{⌊q / 2^j⌋}`: `+1` when qubit `j` of `|q⟩` is `|0⟩`.
pub fn parity_sign(q: usize, j: usize) -> f64 {
    if q >> j & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn computational_state(n: usize, q: usize) -> Result<StateVector> {
    check_qubits(n)?;
    let dim = 1usize << n;
    if q >= dim {
        return Err(Error::InvalidState(format!("basis index {q} >= 2^{n}")));
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    amps[q] = Complex64::new(1.0, 0.0);
    Ok(StateVector { n, amps })
}

/// Basis index of `|0101…01⟩` (odd qubits up).
pub fn central_band_index(n: usize) -> usize {
    (0..n).filter(|j| j % 2 == 1).map(|j| 1usize << j).sum()
}

pub fn central_band_state(n: usize) -> Result<StateVector> {
    if n % 2 != 0 {
        return Err(Error::InvalidState(format!("central band needs even n, got {n}")));
    }
    computational_state(n, central_band_index(n))
}

/// Alternating pattern on the leading `n − 2 n_B` qubits followed by `n_B`
/// copies of `(|01⟩ + |10⟩)/√2` on consecutive pairs.
pub fn bell_pair_state(n: usize, n_bell: usize) -> Result<StateVector> {
    if n % 2 != 0 {
        return Err(Error::InvalidState(format!("Bell-pair state needs even n, got {n}")));
    }
    if n_bell > n / 2 {
        return Err(Error::InvalidState(format!("n_B = {n_bell} exceeds n/2 = {}", n / 2)));
    }
    check_qubits(n)?;
    let lead = n - 2 * n_bell;
    let base: usize = (0..lead).filter(|j| j % 2 == 1).map(|j| 1usize << j).sum();
    let amp = Complex64::new((0.5f64).powf(n_bell as f64 / 2.0), 0.0);
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    for choice in 0..1usize << n_bell {
        let mut q = base;
        for m in 0..n_bell {
            let a = lead + 2 * m;
            // bit m of `choice` selects |10⟩ over |01⟩ on pair (a, a+1)
            q |= if choice >> m & 1 == 0 { 1 << (a + 1) } else { 1 << a };
        }
        amps[q] = amp;
    }
    Ok(StateVector { n, amps })
}

/// Equal-weight, equal-phase superposition of the `n` single-excitation states.
pub fn w_state(n: usize) -> Result<StateVector> {
    if n < 2 {
        return Err(Error::InvalidState(format!("W state needs n >= 2, got {n}")));
    }
    check_qubits(n)?;
    let amp = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    for j in 0..n {
        amps[1 << j] = amp;
    }
    Ok(StateVector { n, amps })
}

/// Single-qubit factor of a product state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QubitFactor {
    Zero,
    One,
    Plus,
    Minus,
    /// `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
    Bloch { theta: f64, phi: f64 },
}

impl QubitFactor {
    pub fn amplitudes(&self) -> [Complex64; 2] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match *self {
            QubitFactor::Zero => [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            QubitFactor::One => [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            QubitFactor::Plus => [Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
            QubitFactor::Minus => [Complex64::new(h, 0.0), Complex64::new(-h, 0.0)],
            QubitFactor::Bloch { theta, phi } => [
                Complex64::new((theta / 2.0).cos(), 0.0),
                Complex64::from_polar((theta / 2.0).sin(), phi),
            ],
        }
    }

    fn symbol(&self) -> Option<char> {
        match self {
            QubitFactor::Zero => Some('0'),
            QubitFactor::One => Some('1'),
            QubitFactor::Plus => Some('+'),
            QubitFactor::Minus => Some('-'),
            QubitFactor::Bloch { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductSpec(pub Vec<QubitFactor>);

impl FromStr for ProductSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .enumerate()
            .map(|(i, c)| match c {
                '0' => Ok(QubitFactor::Zero),
                '1' => Ok(QubitFactor::One),
                '+' => Ok(QubitFactor::Plus),
                '-' => Ok(QubitFactor::Minus),
                other => Err(Error::InvalidState(format!(
                    "symbol {other:?} at position {i}; expected one of 0 1 + -"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(ProductSpec)
    }
}

impl fmt::Display for ProductSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in &self.0 {
            match (q.symbol(), q) {
                (Some(c), _) => write!(f, "{c}")?,
                (None, QubitFactor::Bloch { theta, phi }) => write!(f, "({theta},{phi})")?,
                _ => unreachable!(),
            }
        }
        Ok(())
    }
}

pub fn product_state(spec: &ProductSpec) -> Result<StateVector> {
    let n = spec.0.len();
    check_qubits(n)?;
    let mut amps = vec![Complex64::new(1.0, 0.0)];
    // Grow qubit by qubit: qubit j becomes bit j of the index.
    for factor in &spec.0 {
        let [a0, a1] = factor.amplitudes();
        let norm = (a0.norm_sqr() + a1.norm_sqr()).sqrt();
        if !(norm - 1.0).abs().lt(&1e-12) {
            return Err(Error::InvalidState(format!("factor {factor:?} is not normalized")));
        }
        let half = amps.len();
        amps.extend_from_within(..);
        for (q, a) in amps.iter_mut().enumerate() {
            *a *= if q < half { a0 } else { a1 };
        }
    }
    Ok(StateVector { n, amps })
}

/// Textual initial-state selector: `central`, `bell:<n_B>`, `w`,
/// `product:<symbols>` or `basis:<bitstring>`.
#[derive(Debug, Clone, PartialEq)]
pub enum StateDesignator {
    Central,
    Bell(usize),
    W,
    Product(ProductSpec),
    Basis(String),
}

impl StateDesignator {
    pub fn build(&self, n: usize) -> Result<StateVector> {
        match self {
            StateDesignator::Central => central_band_state(n),
            StateDesignator::Bell(nb) => bell_pair_state(n, *nb),
            StateDesignator::W => w_state(n),
            StateDesignator::Product(spec) => {
                if spec.0.len() != n {
                    return Err(Error::InvalidState(format!(
                        "product spec has {} symbols for {n} qubits",
                        spec.0.len()
                    )));
                }
                product_state(spec)
            }
            StateDesignator::Basis(bits) => {
                if bits.len() != n {
                    return Err(Error::InvalidState(format!(
                        "bitstring has {} symbols for {n} qubits",
                        bits.len()
                    )));
                }
                computational_state(n, basis_index(bits)?)
            }
        }
    }

    /// Basis index when the designator names a computational basis state.
    pub fn basis_index(&self, n: usize) -> Option<usize> {
        match self {
            StateDesignator::Central if n % 2 == 0 => Some(central_band_index(n)),
            StateDesignator::Bell(0) if n % 2 == 0 => Some(central_band_index(n)),
            StateDesignator::Basis(bits) if bits.len() == n => basis_index(bits).ok(),
            StateDesignator::Product(spec) if spec.0.len() == n => spec
                .0
                .iter()
                .map(|f| match f {
                    QubitFactor::Zero => Some("0"),
                    QubitFactor::One => Some("1"),
                    _ => None,
                })
                .collect::<Option<String>>()
                .and_then(|s| basis_index(&s).ok()),
            _ => None,
        }
    }
}

/// Index of a bitstring whose `j`-th symbol is qubit `j`.
pub fn basis_index(bits: &str) -> Result<usize> {
    if bits.len() > MAX_QUBITS {
        return Err(Error::InvalidState(format!("bitstring longer than {MAX_QUBITS}")));
    }
    bits.chars().enumerate().try_fold(0usize, |q, (j, c)| match c {
        '0' => Ok(q),
        '1' => Ok(q | 1 << j),
        other => Err(Error::InvalidState(format!("bit {other:?} at position {j}"))),
    })
}

impl FromStr for StateDesignator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        match (head, arg) {
            ("central", None) => Ok(StateDesignator::Central),
            ("w", None) => Ok(StateDesignator::W),
            ("bell", Some(a)) => a
                .parse()
                .map(StateDesignator::Bell)
                .map_err(|_| Error::InvalidState(format!("bad Bell-pair count {a:?}"))),
            ("product", Some(a)) => a.parse().map(StateDesignator::Product),
            ("basis", Some(a)) => {
                basis_index(a)?;
                Ok(StateDesignator::Basis(a.to_string()))
            }
            _ => Err(Error::InvalidState(format!(
                "unknown state designator {s:?}; expected central, bell:<n>, w, product:<s>, basis:<bits>"
            ))),
        }
    }
}

impl fmt::Display for StateDesignator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateDesignator::Central => f.write_str("central"),
            StateDesignator::Bell(nb) => write!(f, "bell:{nb}"),
            StateDesignator::W => f.write_str("w"),
            StateDesignator::Product(spec) => write!(f, "product:{spec}"),
            StateDesignator::Basis(bits) => write!(f, "basis:{bits}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn real_amps(s: &StateVector) -> Vec<f64> {
        s.amps().iter().map(|a| a.re).collect()
    }

    #[test]
    fn computational_basics() {
        assert_eq!(real_amps(&computational_state(2, 0).unwrap()), vec![1.0, 0.0, 0.0, 0.0]);
        let s = computational_state(10, 77).unwrap();
        assert_eq!(s.nonzero_count(0.0), 1);
        assert!(computational_state(3, 8).is_err());
    }

    #[test]
    fn central_band_has_zero_magnetization() {
        let s = central_band_state(10).unwrap();
        assert_eq!(s.nonzero_count(0.0), 1);
        assert_eq!(s.magnetization(), 0.0);
        assert_eq!(central_band_index(2), 0b10);
        assert_eq!(StateDesignator::Basis("0101010101".into()).build(10).unwrap(), s);
        assert!(central_band_state(5).is_err());
    }

    #[test]
    fn bell_pairs() {
        assert_eq!(bell_pair_state(10, 0).unwrap(), central_band_state(10).unwrap());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let two = bell_pair_state(2, 1).unwrap();
        for (a, e) in real_amps(&two).iter().zip([0.0, h, h, 0.0]) {
            assert!((a - e).abs() < TOL);
        }
        let s = bell_pair_state(10, 3).unwrap();
        assert_eq!(s.nonzero_count(1e-15), 8);
        for a in s.amps().iter().filter(|a| a.norm() > 0.0) {
            assert!((a.norm() - 0.5f64.powf(1.5)).abs() < TOL);
        }
        assert!((s.norm() - 1.0).abs() < TOL);
        assert_eq!(s.magnetization(), 0.0);
        assert!(bell_pair_state(10, 6).is_err());
    }

    #[test]
    fn w_state_shape() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let two = w_state(2).unwrap();
        for (a, e) in real_amps(&two).iter().zip([0.0, h, h, 0.0]) {
            assert!((a - e).abs() < TOL);
        }
        let w = w_state(10).unwrap();
        assert_eq!(w.nonzero_count(1e-15), 10);
        assert!((w.magnetization() - 8.0).abs() < TOL);
        assert!(w_state(1).is_err());
    }

    #[test]
    fn product_states() {
        let s = product_state(&"0101010110".parse().unwrap()).unwrap();
        assert_eq!(s.nonzero_count(0.0), 1);
        let s = product_state(&"010101010+".parse().unwrap()).unwrap();
        assert_eq!(s.nonzero_count(1e-15), 2);
        let plus = product_state(&"++++".parse().unwrap()).unwrap();
        assert!(plus.amps().iter().all(|a| (a.re - 0.25).abs() < TOL && a.im == 0.0));
        assert!("01x".parse::<ProductSpec>().is_err());
        let bloch = ProductSpec(vec![QubitFactor::Bloch { theta: 1.0, phi: 0.3 }, QubitFactor::One]);
        assert!((product_state(&bloch).unwrap().norm() - 1.0).abs() < TOL);
    }

    #[test]
    fn parity_sign_examples() {
        assert_eq!(parity_sign(5, 0), -1.0);
        assert_eq!(parity_sign(5, 1), 1.0);
        assert_eq!(parity_sign(5, 2), -1.0);
    }

    #[test]
    fn parity_sign_exhaustive() {
        for n in 1..=12usize {
            for q in 0..1usize << n {
                for j in 0..n {
                    let floor_parity = (q / (1 << j)) % 2;
                    let expect = if floor_parity == 0 { 1.0 } else { -1.0 };
                    assert_eq!(parity_sign(q, j), expect);
                }
            }
        }
    }

    #[test]
    fn designators_round_trip() {
        for s in ["central", "bell:2", "w", "product:01+-", "basis:0110"] {
            let d: StateDesignator = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
        assert!("bell:x".parse::<StateDesignator>().is_err());
        assert!("ghz".parse::<StateDesignator>().is_err());
        assert!("basis:012".parse::<StateDesignator>().is_err());
    }

    #[test]
    fn designator_basis_indices() {
        assert_eq!(StateDesignator::Central.basis_index(4), Some(0b1010));
        assert_eq!(StateDesignator::Basis("1100".into()).basis_index(4), Some(0b0011));
        assert_eq!(StateDesignator::W.basis_index(4), None);
        assert_eq!(StateDesignator::Bell(1).basis_index(4), None);
    }

    #[test]
    fn definite_parity_states() {
        for s in [bell_pair_state(8, 2).unwrap(), w_state(6).unwrap(), central_band_state(6).unwrap()] {
            assert!((s.parity_expectation().abs() - 1.0).abs() < TOL);
        }
    }
}
