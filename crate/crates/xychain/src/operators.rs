//! Model operators for the periodic XY chain in a transverse field.
//!
//! The Hamiltonian is
//!
//! ```text
//! H = -J Σ_{n=1..N} [ (1+γ)/2 σ_n^x σ_{n+1}^x + (1-γ)/2 σ_n^y σ_{n+1}^y ]
//!     - h Σ_{n=1..N} σ_n^z,          σ_{N+1} ≡ σ_1
//! ```
//!
//! with the boundary sum taken literally over `n = 1..N`. For `N = 2` this
//! counts the single bond twice; the doubled bond is intentional and kept.
//!
//! `H` commutes with the parity operator `P = Π_l σ_l^z`. At the factorizing
//! field `h_F = sqrt(1 - γ²)` the ground state is the exact product state
//! built by [`factorized_state`].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

/// Largest supported chain length for dense matrices (dimension `2^12 = 4096`).
pub const DENSE_SITE_CAP: usize = 12;

/// Relative Hermiticity tolerance for [`HermitianOperator`]:
/// `max|A - A†|` must not exceed this times `max|A|`.
pub const HERMITICITY_REL_TOL: f64 = 1e-12;

/// Absolute tolerance on `| ‖v‖ - 1 |` for [`StateVector`].
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Model parameters of one chain instance.
///
/// Validated on construction: `2 <= n_sites <= DENSE_SITE_CAP`,
/// `anisotropy ∈ [0, 1]`, `temperature >= 0`, all values finite. The Hilbert
/// space dimension is always computed from `n_sites`, never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSpec {
    n_sites: usize,
    coupling: f64,
    anisotropy: f64,
    field: f64,
    temperature: f64,
}

impl ChainSpec {
    /// New spec with unit coupling (`J = 1`).
    pub fn new(n_sites: usize, anisotropy: f64, field: f64, temperature: f64) -> Result<Self> {
        if n_sites < 2 {
            return Err(Error::InvalidChainSpec(format!(
                "n_sites = {n_sites}, need at least 2"
            )));
        }
        if n_sites > DENSE_SITE_CAP {
            return Err(Error::InvalidChainSpec(format!(
                "n_sites = {n_sites} exceeds the dense cap {DENSE_SITE_CAP}"
            )));
        }
        if !(0.0..=1.0).contains(&anisotropy) {
            return Err(Error::AnisotropyOutOfRange(anisotropy));
        }
        if !field.is_finite() {
            return Err(Error::InvalidChainSpec(format!("field = {field}")));
        }
        if !(temperature >= 0.0 && temperature.is_finite()) {
            return Err(Error::InvalidChainSpec(format!(
                "temperature = {temperature}, need a finite value >= 0"
            )));
        }
        Ok(Self {
            n_sites,
            coupling: 1.0,
            anisotropy,
            field,
            temperature,
        })
    }

    /// Same spec with a different coupling `J`. Any finite real is accepted.
    pub fn with_coupling(mut self, coupling: f64) -> Result<Self> {
        if !coupling.is_finite() {
            return Err(Error::InvalidChainSpec(format!("coupling = {coupling}")));
        }
        self.coupling = coupling;
        Ok(self)
    }

    /// Same spec at a different transverse field.
    pub fn at_field(mut self, field: f64) -> Result<Self> {
        if !field.is_finite() {
            return Err(Error::InvalidChainSpec(format!("field = {field}")));
        }
        self.field = field;
        Ok(self)
    }

    /// Same spec at a different temperature.
    pub fn at_temperature(mut self, temperature: f64) -> Result<Self> {
        if !(temperature >= 0.0 && temperature.is_finite()) {
            return Err(Error::InvalidChainSpec(format!(
                "temperature = {temperature}, need a finite value >= 0"
            )));
        }
        self.temperature = temperature;
        Ok(self)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn anisotropy(&self) -> f64 {
        self.anisotropy
    }

    pub fn field(&self) -> f64 {
        self.field
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// `2^n_sites`, computed on demand.
    pub fn hilbert_dim(&self) -> usize {
        1 << self.n_sites
    }
}

/// Dense complex matrix with an enforced Hermiticity contract.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    entries: DMatrix<Complex64>,
}

impl HermitianOperator {
    /// Wrap a square matrix, verifying `max|A - A†| <= 1e-12 · max|A|`.
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::InvalidArgument(format!(
                "matrix is {}x{}, need square",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let scale = entries.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
        let mut asym = 0.0_f64;
        for i in 0..entries.nrows() {
            for j in i..entries.ncols() {
                asym = asym.max((entries[(i, j)] - entries[(j, i)].conj()).norm());
            }
        }
        if asym > HERMITICITY_REL_TOL * scale {
            return Err(Error::NotHermitian(asym));
        }
        Ok(Self { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex64> {
        self.entries
    }

    /// `A |v>` as a raw vector.
    pub fn apply(&self, state: &StateVector) -> DVector<Complex64> {
        &self.entries * state.amplitudes()
    }

    /// `<v| A |v>`, real by Hermiticity.
    pub fn expectation(&self, state: &StateVector) -> f64 {
        state.amplitudes().dotc(&self.apply(state)).re
    }
}

/// Normalized complex state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<Complex64>,
}

impl StateVector {
    /// Wrap an amplitude vector, verifying `| ‖v‖ - 1 | <= 1e-12`.
    pub fn new(amplitudes: DVector<Complex64>) -> Result<Self> {
        let deviation = (amplitudes.norm() - 1.0).abs();
        if deviation > NORMALIZATION_TOL {
            return Err(Error::NotNormalized(deviation));
        }
        Ok(Self { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }
}

/// Pauli axis selector for [`pauli_on_site`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

/// Sign branch of the factorized state `|Ψ_F^±>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

fn check_site_count(n_sites: usize) -> Result<()> {
    if n_sites == 0 || n_sites > DENSE_SITE_CAP {
        return Err(Error::InvalidArgument(format!(
            "n_sites = {n_sites}, need 1..={DENSE_SITE_CAP}"
        )));
    }
    Ok(())
}

/// `I ⊗ … ⊗ σ^axis ⊗ … ⊗ I` acting on `site` of an `n_sites` chain.
///
/// Site `n` owns bit `n-1` of the basis index, with bit value 0 for spin up.
pub fn pauli_on_site(axis: PauliAxis, site: usize, n_sites: usize) -> Result<HermitianOperator> {
    check_site_count(n_sites)?;
    if site < 1 || site > n_sites {
        return Err(Error::SiteOutOfRange { site, n_sites });
    }
    let dim = 1usize << n_sites;
    let mask = 1usize << (site - 1);
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for col in 0..dim {
        let down = col & mask != 0;
        match axis {
            PauliAxis::X => m[(col ^ mask, col)] = Complex64::new(1.0, 0.0),
            // σ_y |up> = i |down>, σ_y |down> = -i |up>
            PauliAxis::Y => {
                m[(col ^ mask, col)] = Complex64::new(0.0, if down { -1.0 } else { 1.0 })
            }
            PauliAxis::Z => m[(col, col)] = Complex64::new(if down { -1.0 } else { 1.0 }, 0.0),
        }
    }
    HermitianOperator::new(m)
}

/// Dense XY-chain Hamiltonian for the given parameters.
///
/// The bond sum runs literally over `n = 1..N` with `σ_{N+1} ≡ σ_1`, so a
/// two-site chain carries its single bond twice.
pub fn build_hamiltonian(spec: &ChainSpec) -> HermitianOperator {
    let n = spec.n_sites();
    let dim = spec.hilbert_dim();
    let j = spec.coupling();
    let gamma = spec.anisotropy();
    let h = spec.field();
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for site in 1..=n {
        let neighbor = site % n + 1;
        let mask_a = 1usize << (site - 1);
        let mask_b = 1usize << (neighbor - 1);
        let both = mask_a | mask_b;
        for col in 0..dim {
            // xx and yy terms flip the same pair of bits; their combined
            // amplitude is -Jγ when the two bits agree and -J when they differ.
            let equal = (col & mask_a != 0) == (col & mask_b != 0);
            let amp = if equal { -j * gamma } else { -j };
            m[(col ^ both, col)] += Complex64::new(amp, 0.0);
            let z = if col & mask_a != 0 { -1.0 } else { 1.0 };
            m[(col, col)] += Complex64::new(-h * z, 0.0);
        }
    }
    HermitianOperator::new(m).expect("real symmetric by construction")
}

/// Parity operator `P = Π_l σ_l^z`, diagonal with entries `(-1)^popcount`.
pub fn build_parity(n_sites: usize) -> Result<HermitianOperator> {
    check_site_count(n_sites)?;
    let dim = 1usize << n_sites;
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for b in 0..dim {
        let sign = if b.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        m[(b, b)] = Complex64::new(sign, 0.0);
    }
    HermitianOperator::new(m)
}

/// The factorizing field `h_F = sqrt(1 - γ²)`, in units of `J`.
pub fn factorizing_field(gamma: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::AnisotropyOutOfRange(gamma));
    }
    Ok((1.0 - gamma * gamma).sqrt())
}

/// Tilt angle of the factorized state, `α = arccos sqrt((1-γ)/(1+γ))`.
pub fn factorized_state_angle(gamma: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::AnisotropyOutOfRange(gamma));
    }
    Ok(((1.0 - gamma) / (1.0 + gamma)).sqrt().acos())
}

/// The product state `|Ψ_F^±> = ⊗_l ( cos(α/2)|up> ± sin(α/2)|down> )`.
///
/// At `h = h_F` this is an exact ground state of the chain for every finite
/// `N`; the two branches together span the degenerate ground manifold.
pub fn factorized_state(n_sites: usize, gamma: f64, branch: Branch) -> Result<StateVector> {
    check_site_count(n_sites)?;
    let alpha = factorized_state_angle(gamma)?;
    let up = (alpha / 2.0).cos();
    let down = branch.sign() * (alpha / 2.0).sin();
    let dim = 1usize << n_sites;
    let mut amplitudes = DVector::<Complex64>::zeros(dim);
    for b in 0..dim {
        let flips = b.count_ones() as i32;
        let amp = up.powi(n_sites as i32 - flips) * down.powi(flips);
        amplitudes[b] = Complex64::new(amp, 0.0);
    }
    StateVector::new(amplitudes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn re(m: &DMatrix<Complex64>, i: usize, j: usize) -> f64 {
        m[(i, j)].re
    }

    #[test]
    fn pauli_z_single_site() {
        let p = pauli_on_site(PauliAxis::Z, 1, 1).unwrap();
        assert_eq!(p.dim(), 2);
        assert_eq!(re(p.entries(), 0, 0), 1.0);
        assert_eq!(re(p.entries(), 1, 1), -1.0);
        assert_eq!(re(p.entries(), 0, 1), 0.0);
    }

    #[test]
    fn pauli_x_flips_the_site_bit() {
        // x on site 2 of 2 sends basis index 0 to index 2
        let p = pauli_on_site(PauliAxis::X, 2, 2).unwrap();
        assert_eq!(re(p.entries(), 2, 0), 1.0);
        assert_eq!(re(p.entries(), 0, 0), 0.0);
    }

    #[test]
    fn pauli_squares_to_identity() {
        let p = pauli_on_site(PauliAxis::Y, 1, 2).unwrap();
        let sq = p.entries() * p.entries();
        let id = DMatrix::<Complex64>::identity(4, 4);
        assert!((sq - id).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn pauli_site_out_of_range() {
        assert!(matches!(
            pauli_on_site(PauliAxis::X, 3, 2),
            Err(Error::SiteOutOfRange {
                site: 3,
                n_sites: 2
            })
        ));
        assert!(pauli_on_site(PauliAxis::X, 0, 2).is_err());
    }

    #[test]
    fn chain_spec_validation() {
        assert!(ChainSpec::new(1, 0.5, 0.0, 0.0).is_err());
        assert!(ChainSpec::new(13, 0.5, 0.0, 0.0).is_err());
        assert!(matches!(
            ChainSpec::new(4, 1.5, 0.0, 0.0),
            Err(Error::AnisotropyOutOfRange(_))
        ));
        assert!(ChainSpec::new(4, 0.5, 0.0, -0.1).is_err());
        assert!(ChainSpec::new(4, 0.5, f64::NAN, 0.0).is_err());
        let spec = ChainSpec::new(4, 0.5, 0.3, 0.01).unwrap();
        assert_eq!(spec.hilbert_dim(), 16);
        assert_eq!(spec.coupling(), 1.0);
        let scaled = spec.with_coupling(2.5).unwrap();
        assert_eq!(scaled.coupling(), 2.5);
    }

    #[test]
    fn field_only_spectrum_is_binomial() {
        // J = 0: eigenvalues -h(N - 2k) with multiplicity C(N, k)
        let spec = ChainSpec::new(3, 0.7, 1.0, 0.0)
            .unwrap()
            .with_coupling(0.0)
            .unwrap();
        let h = build_hamiltonian(&spec);
        let mut diag: Vec<f64> = (0..8).map(|b| re(h.entries(), b, b)).collect();
        diag.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expected = [-3.0, -1.0, -1.0, -1.0, 1.0, 1.0, 1.0, 3.0];
        for (got, want) in diag.iter().zip(expected) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-14);
        }
    }

    #[test]
    fn two_site_chain_counts_the_bond_twice() {
        // N=2, γ=1, h=0: H = -2 σ1x σ2x, written out by hand:
        //   rows/cols ordered (uu, du, ud, dd); off-diagonal -2 on the
        //   anti-diagonal pairs (uu,dd) and (du,ud).
        let spec = ChainSpec::new(2, 1.0, 0.0, 0.0).unwrap();
        let h = build_hamiltonian(&spec);
        let expected = [
            [0.0, 0.0, 0.0, -2.0],
            [0.0, 0.0, -2.0, 0.0],
            [0.0, -2.0, 0.0, 0.0],
            [-2.0, 0.0, 0.0, 0.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_abs_diff_eq!(re(h.entries(), i, j), expected[i][j], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn parity_values() {
        let p = build_parity(1).unwrap();
        assert_eq!(re(p.entries(), 0, 0), 1.0);
        assert_eq!(re(p.entries(), 1, 1), -1.0);
        // both spins down: (-1)^2 = +1
        let p2 = build_parity(2).unwrap();
        assert_eq!(re(p2.entries(), 3, 3), 1.0);
        assert!(build_parity(0).is_err());
    }

    #[test]
    fn hamiltonian_commutes_with_parity() {
        let spec = ChainSpec::new(5, 0.3, 0.7, 0.0).unwrap();
        let h = build_hamiltonian(&spec);
        let p = build_parity(5).unwrap();
        let comm = h.entries() * p.entries() - p.entries() * h.entries();
        let max = comm.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
        assert!(max < 1e-12, "commutator norm {max}");
    }

    #[test]
    fn factorizing_field_values() {
        assert_eq!(factorizing_field(0.6).unwrap(), 0.8);
        assert_eq!(factorizing_field(1.0).unwrap(), 0.0);
        assert_eq!(factorizing_field(0.0).unwrap(), 1.0);
        assert!(factorizing_field(-0.1).is_err());
        assert!(factorizing_field(1.1).is_err());
    }

    #[test]
    fn factorized_state_angle_at_gamma_06_is_pi_over_3() {
        assert_abs_diff_eq!(
            factorized_state_angle(0.6).unwrap(),
            PI / 3.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn factorized_state_limits() {
        // γ = 0: α = 0, all spins up
        let v = factorized_state(3, 0.0, Branch::Plus).unwrap();
        assert_abs_diff_eq!(v.amplitudes()[0].re, 1.0, epsilon = 1e-15);
        // γ = 1, N = 1: (|up> ± |down>)/sqrt(2)
        for branch in [Branch::Plus, Branch::Minus] {
            let v = factorized_state(1, 1.0, branch).unwrap();
            assert_abs_diff_eq!(v.amplitudes()[0].re, FRAC_1_SQRT_2, epsilon = 1e-15);
            assert_abs_diff_eq!(
                v.amplitudes()[1].re,
                branch.sign() * FRAC_1_SQRT_2,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn factorized_state_is_normalized() {
        for n in [2, 4, 7] {
            for gamma in [0.1, 0.6, 0.9] {
                let v = factorized_state(n, gamma, Branch::Minus).unwrap();
                assert_abs_diff_eq!(v.amplitudes().norm(), 1.0, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn hermitian_wrapper_rejects_asymmetry() {
        let mut m = DMatrix::<Complex64>::identity(2, 2);
        m[(0, 1)] = Complex64::new(0.5, 0.0);
        assert!(matches!(
            HermitianOperator::new(m),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn state_vector_rejects_unnormalized() {
        let v = DVector::from_vec(vec![Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0)]);
        assert!(matches!(StateVector::new(v), Err(Error::NotNormalized(_))));
    }
}
