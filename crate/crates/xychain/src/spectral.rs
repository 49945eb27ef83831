//! Eigendecomposition, parity labeling, Gibbs states, and the parity-sector
//! level crossings of the chain.
//!
//! The lowest even- and odd-parity eigenvalues of the chain cross a finite
//! number of times below the critical field: `N/2` crossings for even `N` and
//! `⌊N/2⌋ + 1` for odd `N` (which is always degenerate at `h = 0`). The
//! largest crossing sits at the factorizing field `h_F`.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::operators::{build_hamiltonian, ChainSpec, HermitianOperator};
use crate::roots::{scan_sign_changes, SignChangeScan};
use crate::{Error, Result};

/// Critical field of the infinite chain, `h_C = 1`. Annotation only: nothing
/// in this crate switches behavior at `h_C`.
pub const CRITICAL_FIELD: f64 = 1.0;

/// Default absolute gap below which eigenvalues count as degenerate, in
/// units of `J`: below typical finite-N gaps, above eigensolver noise.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Largest residual `‖P v - s v‖` tolerated after parity rotation.
pub const PARITY_RESIDUAL_TOL: f64 = 1e-8;

const EIGH_ITER_PER_DIM: usize = 100;

/// Parity sector label, the eigenvalue of `P = Π_l σ_l^z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

impl std::fmt::Display for Parity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Parity::Even => write!(f, "even"),
            Parity::Odd => write!(f, "odd"),
        }
    }
}

/// Full eigendecomposition of a [`HermitianOperator`].
///
/// Eigenvalues are sorted ascending with matching orthonormal eigenvector
/// columns; `parity_labels` is populated by [`label_parity`].
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
    parity_labels: Option<Vec<Parity>>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.eigenvectors
    }

    pub fn parity_labels(&self) -> Option<&[Parity]> {
        self.parity_labels.as_deref()
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }
}

/// Dense eigendecomposition of a Hermitian operator.
///
/// Deterministic for identical input. Hermiticity is enforced by the input
/// type; non-convergence of the underlying tridiagonal QL iteration is
/// reported as [`Error::EighNonConvergence`].
pub fn eigh(op: &HermitianOperator) -> Result<SpectralDecomposition> {
    let dim = op.dim();
    let max_iterations = EIGH_ITER_PER_DIM * dim.max(4);
    let se = SymmetricEigen::try_new(op.entries().clone(), f64::EPSILON, max_iterations).ok_or(
        Error::EighNonConvergence {
            dim,
            max_iterations,
        },
    )?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        se.eigenvalues[a]
            .partial_cmp(&se.eigenvalues[b])
            .expect("real eigenvalues")
            .then(a.cmp(&b))
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut eigenvectors = DMatrix::<Complex64>::zeros(dim, dim);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &se.eigenvectors.column(src));
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        parity_labels: None,
    })
}

/// Rotate eigenvectors inside each degenerate cluster to simultaneous parity
/// eigenvectors and attach the ±1 labels.
///
/// Requires `[H, P] = 0` for the operator the decomposition came from.
/// Clusters are maximal runs of eigenvalues with consecutive gaps below
/// `degeneracy_tol`; within a cluster the rotated vectors are ordered odd
/// before even. Residual mixing above [`PARITY_RESIDUAL_TOL`] is an error.
pub fn label_parity(
    decomp: &SpectralDecomposition,
    parity: &HermitianOperator,
    degeneracy_tol: f64,
) -> Result<SpectralDecomposition> {
    if !degeneracy_tol.is_finite() || degeneracy_tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "degeneracy_tol = {degeneracy_tol}, need > 0"
        )));
    }
    let dim = decomp.dim();
    if parity.dim() != dim {
        return Err(Error::InvalidArgument(format!(
            "parity dim {} does not match decomposition dim {dim}",
            parity.dim()
        )));
    }
    let mut eigenvectors = decomp.eigenvectors.clone();
    let mut labels = vec![Parity::Even; dim];

    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && decomp.eigenvalues[end] - decomp.eigenvalues[end - 1] < degeneracy_tol {
            end += 1;
        }
        let k = end - start;
        let cluster = eigenvectors.columns(start, k).into_owned();
        // P restricted to the cluster span; its eigenvectors give the rotation.
        let restricted = cluster.adjoint() * parity.entries() * &cluster;
        let small = SymmetricEigen::try_new(restricted, f64::EPSILON, EIGH_ITER_PER_DIM * k.max(4))
            .ok_or(Error::EighNonConvergence {
                dim: k,
                max_iterations: EIGH_ITER_PER_DIM * k.max(4),
            })?;
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| {
            small.eigenvalues[a]
                .partial_cmp(&small.eigenvalues[b])
                .expect("real eigenvalues")
                .then(a.cmp(&b))
        });
        for (offset, &src) in order.iter().enumerate() {
            let rotated = &cluster * small.eigenvectors.column(src);
            let sign = small.eigenvalues[src];
            let label = if sign >= 0.0 {
                Parity::Even
            } else {
                Parity::Odd
            };
            let residual =
                (parity.entries() * &rotated - &rotated * Complex64::new(label.sign(), 0.0)).norm();
            if residual > PARITY_RESIDUAL_TOL {
                return Err(Error::ParityMixing {
                    residual,
                    tolerance: PARITY_RESIDUAL_TOL,
                });
            }
            eigenvectors.set_column(start + offset, &rotated);
            labels[start + offset] = label;
        }
        start = end;
    }

    Ok(SpectralDecomposition {
        eigenvalues: decomp.eigenvalues.clone(),
        eigenvectors,
        parity_labels: Some(labels),
    })
}

/// Lowest eigenvalue in each parity sector, `(E0_even, E0_odd)`.
pub fn sector_ground_energies(spec: &ChainSpec) -> Result<(f64, f64)> {
    sector_ground_energies_of(&build_hamiltonian(spec))
}

/// Sector ground energies of an already-built chain Hamiltonian.
///
/// Relies on the operator being exactly block diagonal over the two
/// popcount-parity index sets of the computational basis, which holds for
/// every [`build_hamiltonian`] output: bond terms flip two bits, field terms
/// none, so no matrix element connects the sectors.
pub fn sector_ground_energies_of(op: &HermitianOperator) -> Result<(f64, f64)> {
    let dim = op.dim();
    if !dim.is_power_of_two() || dim < 2 {
        return Err(Error::InvalidArgument(format!(
            "dimension {dim} is not a power of two >= 2"
        )));
    }
    let even: Vec<usize> = (0..dim).filter(|b| b.count_ones() % 2 == 0).collect();
    let odd: Vec<usize> = (0..dim).filter(|b| b.count_ones() % 2 == 1).collect();
    let min_of = |idx: &[usize]| -> f64 {
        let sub = DMatrix::<Complex64>::from_fn(idx.len(), idx.len(), |i, j| {
            op.entries()[(idx[i], idx[j])]
        });
        sub.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    };
    Ok((min_of(&even), min_of(&odd)))
}

/// Positive-semidefinite, unit-trace operator on an ordered set of sites.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    sites: Vec<usize>,
    entries: DMatrix<Complex64>,
}

/// Absolute Hermiticity tolerance of a density matrix.
pub const DM_HERMITICITY_TOL: f64 = 1e-12;
/// Absolute tolerance on `|tr ρ - 1|`.
pub const DM_TRACE_TOL: f64 = 1e-12;
/// Eigenvalues below this are a positivity violation; values in
/// `[DM_EIGENVALUE_FLOOR, 0)` count as eigensolver noise.
pub const DM_EIGENVALUE_FLOOR: f64 = -1e-10;

impl DensityMatrix {
    /// Wrap and fully validate (Hermiticity, unit trace, positivity).
    pub fn new(sites: Vec<usize>, entries: DMatrix<Complex64>) -> Result<Self> {
        let dm = Self { sites, entries };
        dm.validate()?;
        Ok(dm)
    }

    /// Construction path for internal states that satisfy the invariants by
    /// construction (Gibbs mixtures, partial traces of valid states).
    pub(crate) fn from_trusted(sites: Vec<usize>, entries: DMatrix<Complex64>) -> Self {
        debug_assert!(sites.windows(2).all(|w| w[0] < w[1]));
        debug_assert_eq!(entries.nrows(), 1usize << sites.len());
        Self { sites, entries }
    }

    /// Re-check all invariants: `sites` strictly increasing, entries square of
    /// dimension `2^|sites|`, Hermitian within 1e-12, unit trace within 1e-12,
    /// minimum eigenvalue at least -1e-10.
    pub fn validate(&self) -> Result<()> {
        if self.sites.is_empty() {
            return Err(Error::InvalidDensityMatrix("empty site list".into()));
        }
        if !self.sites.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidDensityMatrix(
                "site list is not strictly increasing".into(),
            ));
        }
        let dim = 1usize << self.sites.len();
        if self.entries.nrows() != dim || self.entries.ncols() != dim {
            return Err(Error::InvalidDensityMatrix(format!(
                "entries are {}x{}, expected {dim}x{dim}",
                self.entries.nrows(),
                self.entries.ncols()
            )));
        }
        let mut asym = 0.0_f64;
        for i in 0..dim {
            for j in i..dim {
                asym = asym.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        if asym > DM_HERMITICITY_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "Hermiticity violation {asym:.3e}"
            )));
        }
        let trace = self.entries.trace();
        if (trace.re - 1.0).abs() > DM_TRACE_TOL || trace.im.abs() > DM_TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace = {trace}, expected 1"
            )));
        }
        let min_eig = self
            .entries
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < DM_EIGENVALUE_FLOOR {
            return Err(Error::InvalidDensityMatrix(format!(
                "minimum eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(())
    }

    /// Site identifiers, strictly increasing.
    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }
}

/// Thermal (Gibbs) state `exp(-H/T)/Z` built from a decomposition of `H`.
///
/// Boltzmann weights are computed with the ground-energy shift so that
/// `T = 0.01` stays finite; at `T = 0` the state is the uniform mixture over
/// the ground manifold (within [`DEGENERACY_TOL`]). The decomposition must
/// come from a chain operator: its dimension fixes the site list `1..=N`.
pub fn gibbs_state(decomp: &SpectralDecomposition, temperature: f64) -> Result<DensityMatrix> {
    if !(temperature >= 0.0 && temperature.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "temperature = {temperature}, need a finite value >= 0"
        )));
    }
    let dim = decomp.dim();
    if !dim.is_power_of_two() || dim < 2 {
        return Err(Error::InvalidArgument(format!(
            "dimension {dim} is not a power of two >= 2"
        )));
    }
    let n_sites = dim.trailing_zeros() as usize;
    let e0 = decomp.ground_energy();
    let mut weights: Vec<f64> = if temperature == 0.0 {
        decomp
            .eigenvalues
            .iter()
            .map(|&e| if e - e0 <= DEGENERACY_TOL { 1.0 } else { 0.0 })
            .collect()
    } else {
        decomp
            .eigenvalues
            .iter()
            .map(|&e| (-(e - e0) / temperature).exp())
            .collect()
    };
    let z: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= z;
    }
    // ρ = A A† with A the occupied eigenvectors scaled by sqrt(p); states with
    // negligible weight are dropped.
    let occupied: Vec<usize> = (0..dim).filter(|&i| weights[i] > 1e-300).collect();
    let mut scaled = DMatrix::<Complex64>::zeros(dim, occupied.len());
    for (dst, &i) in occupied.iter().enumerate() {
        let col = decomp.eigenvectors.column(i) * Complex64::new(weights[i].sqrt(), 0.0);
        scaled.set_column(dst, &col);
    }
    let rho = &scaled * scaled.adjoint();
    Ok(DensityMatrix::from_trusted((1..=n_sites).collect(), rho))
}

/// Locations of the parity-sector level crossings for one `(N, γ)`.
#[derive(Debug, Clone)]
pub struct CrossingSet {
    fields: Vec<f64>,
    gamma: f64,
    n_sites: usize,
    tangencies: Vec<f64>,
}

impl CrossingSet {
    /// Validate and wrap: crossings must be strictly increasing and inside
    /// `[0, 1)`.
    pub fn new(fields: Vec<f64>, gamma: f64, n_sites: usize, tangencies: Vec<f64>) -> Result<Self> {
        if !fields.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Numerical(format!(
                "crossing list not strictly increasing: {fields:?}"
            )));
        }
        if let Some(bad) = fields.iter().find(|&&h| !(0.0..1.0).contains(&h)) {
            return Err(Error::Numerical(format!(
                "crossing at h = {bad} outside [0, 1)"
            )));
        }
        Ok(Self {
            fields,
            gamma,
            n_sites,
            tangencies,
        })
    }

    /// Crossing fields `h_i`, ascending.
    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Grid points where the gap touched zero without changing sign.
    pub fn tangencies(&self) -> &[f64] {
        &self.tangencies
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// The largest crossing, which is the factorizing field when present.
    pub fn last(&self) -> Option<f64> {
        self.fields.last().copied()
    }
}

/// Locate the zeros of the sector gap `Δ(h) = E0_odd(h) - E0_even(h)` on a
/// grid over `h_range`, refining each sign change by bisection.
///
/// `h = 0` (or any range endpoint) with `Δ` inside [`DEGENERACY_TOL`] of zero
/// is reported as a crossing; that is the odd-`N` degeneracy at zero field.
/// Interior grid zeros without a sign change are reported as tangencies, not
/// crossings.
pub fn find_parity_crossings(
    n_sites: usize,
    gamma: f64,
    h_range: (f64, f64),
    grid_points: usize,
    bisection_tol: f64,
) -> Result<CrossingSet> {
    validate_crossing_args(gamma, h_range, bisection_tol)?;
    if grid_points < 64 {
        return Err(Error::InvalidArgument(format!(
            "grid_points = {grid_points}, need at least 64"
        )));
    }
    // Validates n_sites as a side effect; h = 0 stands in for the whole range.
    let probe = ChainSpec::new(n_sites, gamma, 0.0, 0.0)?;
    let gap = |h: f64| -> Result<f64> {
        let (e_even, e_odd) = sector_ground_energies(&probe.at_field(h)?)?;
        Ok(e_odd - e_even)
    };
    let SignChangeScan { zeros, tangencies } =
        scan_sign_changes(&gap, h_range, grid_points, bisection_tol, DEGENERACY_TOL)?;
    CrossingSet::new(zeros, gamma, n_sites, tangencies)
}

pub(crate) fn validate_crossing_args(
    gamma: f64,
    h_range: (f64, f64),
    bisection_tol: f64,
) -> Result<()> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::AnisotropyOutOfRange(gamma));
    }
    let (lo, hi) = h_range;
    if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi && hi <= 1.5) {
        return Err(Error::InvalidArgument(format!(
            "h_range = ({lo}, {hi}), need 0 <= lo < hi <= 1.5"
        )));
    }
    if !(bisection_tol > 0.0 && bisection_tol.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "bisection_tol = {bisection_tol}, need > 0"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{build_parity, factorizing_field};
    use approx::assert_abs_diff_eq;

    fn hermitian(diag: &[f64]) -> HermitianOperator {
        let n = diag.len();
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        HermitianOperator::new(m).unwrap()
    }

    #[test]
    fn eigh_sorts_a_diagonal_matrix() {
        let d = eigh(&hermitian(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(d.eigenvalues(), &[1.0, 2.0, 3.0]);
        // permutation eigenvectors
        for (col, row) in [(0, 1), (1, 2), (2, 0)] {
            assert_abs_diff_eq!(d.eigenvectors()[(row, col)].norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn eigh_of_sigma_x() {
        let mut m = DMatrix::<Complex64>::zeros(2, 2);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        m[(1, 0)] = Complex64::new(1.0, 0.0);
        let d = eigh(&HermitianOperator::new(m).unwrap()).unwrap();
        assert_abs_diff_eq!(d.eigenvalues()[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d.eigenvalues()[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn eigh_reconstructs_a_chain_hamiltonian() {
        let spec = ChainSpec::new(4, 0.6, 0.5, 0.0).unwrap();
        let h = build_hamiltonian(&spec);
        let d = eigh(&h).unwrap();
        let v = d.eigenvectors();
        // V Λ V†
        let lambda = DMatrix::<Complex64>::from_fn(16, 16, |i, j| {
            if i == j {
                Complex64::new(d.eigenvalues()[i], 0.0)
            } else {
                Complex64::default()
            }
        });
        let rebuilt = v * lambda * v.adjoint();
        let scale = h.entries().iter().map(|z| z.norm()).fold(0.0, f64::max);
        let err = (&rebuilt - h.entries())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(err <= 1e-10 * scale, "reconstruction error {err}");
        let gram = v.adjoint() * v;
        let id = DMatrix::<Complex64>::identity(16, 16);
        let ortho = (gram - id).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(ortho <= 1e-10, "orthonormality defect {ortho}");
    }

    #[test]
    fn ground_is_even_in_the_polarized_phase() {
        let spec = ChainSpec::new(4, 0.6, 2.0, 0.0).unwrap();
        let d = eigh(&build_hamiltonian(&spec)).unwrap();
        let labeled = label_parity(&d, &build_parity(4).unwrap(), DEGENERACY_TOL).unwrap();
        assert_eq!(labeled.parity_labels().unwrap()[0], Parity::Even);
        let (e_even, e_odd) = sector_ground_energies(&spec).unwrap();
        assert!(e_even < e_odd);
    }

    #[test]
    fn crossing_cluster_carries_both_parities() {
        // h = 0.8 is the largest crossing for γ = 0.6: the two lowest
        // eigenvectors are degenerate and split into one even, one odd.
        let spec = ChainSpec::new(4, 0.6, 0.8, 0.0).unwrap();
        let d = eigh(&build_hamiltonian(&spec)).unwrap();
        let labeled = label_parity(&d, &build_parity(4).unwrap(), DEGENERACY_TOL).unwrap();
        let labels = labeled.parity_labels().unwrap();
        assert_eq!(labels[0], Parity::Odd);
        assert_eq!(labels[1], Parity::Even);
        assert!(labeled.eigenvalues()[1] - labeled.eigenvalues()[0] < DEGENERACY_TOL);
    }

    #[test]
    fn field_only_two_site_zero_cluster_is_doubly_odd() {
        let spec = ChainSpec::new(2, 0.0, 1.0, 0.0)
            .unwrap()
            .with_coupling(0.0)
            .unwrap();
        let d = eigh(&build_hamiltonian(&spec)).unwrap();
        let labeled = label_parity(&d, &build_parity(2).unwrap(), DEGENERACY_TOL).unwrap();
        let labels = labeled.parity_labels().unwrap();
        // spectrum (-2, 0, 0, 2): the zero cluster is the two single-flip states
        assert_eq!(labels[1], Parity::Odd);
        assert_eq!(labels[2], Parity::Odd);
    }

    #[test]
    fn sector_energies_degenerate_at_zero_field_for_odd_n() {
        let spec = ChainSpec::new(5, 0.6, 0.0, 0.0).unwrap();
        let (e_even, e_odd) = sector_ground_energies(&spec).unwrap();
        assert_abs_diff_eq!(e_even, e_odd, epsilon = 1e-10);
    }

    #[test]
    fn sector_energies_degenerate_at_the_factorizing_field() {
        let h_f = factorizing_field(0.6).unwrap();
        let spec = ChainSpec::new(4, 0.6, h_f, 0.0).unwrap();
        let (e_even, e_odd) = sector_ground_energies(&spec).unwrap();
        assert_abs_diff_eq!(e_even, e_odd, epsilon = 1e-10);
    }

    #[test]
    fn gibbs_high_temperature_is_maximally_mixed() {
        let spec = ChainSpec::new(3, 0.6, 0.4, 0.0).unwrap();
        let d = eigh(&build_hamiltonian(&spec)).unwrap();
        let rho = gibbs_state(&d, 1e9).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let want = if i == j { 0.125 } else { 0.0 };
                assert!((rho.entries()[(i, j)].norm() - want).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn gibbs_zero_temperature_is_the_ground_projector() {
        // polarized phase: nondegenerate ground state
        let spec = ChainSpec::new(3, 0.6, 2.0, 0.0).unwrap();
        let d = eigh(&build_hamiltonian(&spec)).unwrap();
        let rho = gibbs_state(&d, 0.0).unwrap();
        // rank 1 and idempotent
        let sq = rho.entries() * rho.entries();
        let err = (sq - rho.entries())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "not a projector: {err}");
    }

    #[test]
    fn gibbs_two_level_boltzmann_weight() {
        // single spin in field h = 1: H = -σ_z = diag(-1, +1)
        let d = eigh(&hermitian(&[-1.0, 1.0])).unwrap();
        let rho = gibbs_state(&d, 1.0).unwrap();
        let p_up = (1.0_f64).exp() / ((1.0_f64).exp() + (-1.0_f64).exp());
        assert_abs_diff_eq!(rho.entries()[(0, 0)].re, p_up, epsilon = 1e-12);
        assert_abs_diff_eq!(p_up, 0.8808, epsilon = 5e-5);
    }

    #[test]
    fn gibbs_rejects_negative_temperature() {
        let d = eigh(&hermitian(&[-1.0, 1.0])).unwrap();
        assert!(gibbs_state(&d, -0.5).is_err());
    }

    #[test]
    fn gibbs_energy_is_monotone_in_temperature() {
        let spec = ChainSpec::new(4, 0.6, 0.5, 0.0).unwrap();
        let h = build_hamiltonian(&spec);
        let d = eigh(&h).unwrap();
        let mut last = f64::NEG_INFINITY;
        for t in [0.0, 0.01, 0.05, 0.2, 1.0, 5.0, 100.0] {
            let rho = gibbs_state(&d, t).unwrap();
            let energy = (rho.entries() * h.entries()).trace().re;
            assert!(
                energy >= last - 1e-10,
                "Tr(ρH) decreased from {last} to {energy} at T = {t}"
            );
            last = energy;
        }
    }

    #[test]
    fn gibbs_outputs_are_valid_density_matrices() {
        for (n, gamma, h, t) in [
            (2, 0.0, 0.0, 0.0),
            (3, 1.0, 0.8, 0.01),
            (4, 0.6, 0.8, 0.05),
            (5, 0.3, 1.2, 1.0),
        ] {
            let spec = ChainSpec::new(n, gamma, h, t).unwrap();
            let d = eigh(&build_hamiltonian(&spec)).unwrap();
            let rho = gibbs_state(&d, t).unwrap();
            rho.validate().unwrap();
        }
    }

    #[test]
    fn four_site_crossings() {
        let set = find_parity_crossings(4, 0.6, (0.0, 1.0), 512, 1e-8).unwrap();
        assert_eq!(set.len(), 2);
        assert_abs_diff_eq!(set.fields()[0], 0.3454312820, epsilon = 1e-6);
        assert_abs_diff_eq!(set.fields()[1], 0.8, epsilon = 1e-8);
        assert!(set.tangencies().is_empty());
    }

    #[test]
    fn eigh_is_deterministic() {
        let spec = ChainSpec::new(4, 0.6, 0.37, 0.0).unwrap();
        let h = build_hamiltonian(&spec);
        let first = eigh(&h).unwrap();
        let second = eigh(&h).unwrap();
        assert_eq!(first.eigenvalues(), second.eigenvalues());
        assert_eq!(first.eigenvectors(), second.eigenvectors());
    }

    #[test]
    fn crossing_scan_respects_a_restricted_range() {
        let set = find_parity_crossings(4, 0.6, (0.5, 1.0), 512, 1e-8).unwrap();
        assert_eq!(set.len(), 1);
        assert_abs_diff_eq!(set.fields()[0], 0.8, epsilon = 1e-8);
    }

    #[test]
    fn two_site_chain_has_its_single_crossing_at_h_f() {
        // even sector -2*sqrt(h² + γ²) meets odd sector -2 exactly at h_F,
        // doubled bond notwithstanding
        let set = find_parity_crossings(2, 0.6, (0.0, 1.0), 512, 1e-8).unwrap();
        assert_eq!(set.len(), 1);
        assert_abs_diff_eq!(set.fields()[0], 0.8, epsilon = 1e-8);
    }

    #[test]
    fn odd_chains_cross_at_zero_field() {
        let set = find_parity_crossings(7, 0.6, (0.0, 1.0), 512, 1e-8).unwrap();
        assert_eq!(set.len(), 4);
        assert_eq!(set.fields()[0], 0.0);
        assert_abs_diff_eq!(set.fields()[1], 0.3670968417, epsilon = 1e-6);
        assert_abs_diff_eq!(set.fields()[2], 0.6571902529, epsilon = 1e-6);
        assert_abs_diff_eq!(set.fields()[3], 0.8, epsilon = 1e-6);
    }

    #[test]
    fn six_site_crossings() {
        let set = find_parity_crossings(6, 0.6, (0.0, 1.0), 512, 1e-8).unwrap();
        assert_eq!(set.len(), 3);
        assert_abs_diff_eq!(set.fields()[0], 0.2219768981, epsilon = 1e-6);
        assert_abs_diff_eq!(set.fields()[1], 0.6027511108, epsilon = 1e-6);
        assert_abs_diff_eq!(set.fields()[2], 0.8, epsilon = 1e-6);
    }

    #[test]
    fn largest_crossing_is_the_factorizing_field() {
        for gamma in [0.3, 0.6, 0.9] {
            let h_f = factorizing_field(gamma).unwrap();
            for n in 4..=7 {
                let set = find_parity_crossings(n, gamma, (0.0, 1.0), 512, 1e-8).unwrap();
                let last = set.last().expect("crossings exist");
                assert_abs_diff_eq!(last, h_f, epsilon = 1e-6);
                assert!(set.fields().iter().all(|&h| h <= h_f + 1e-6));
            }
        }
    }

    #[test]
    fn crossing_argument_validation() {
        assert!(find_parity_crossings(4, 0.6, (0.0, 2.0), 512, 1e-8).is_err());
        assert!(find_parity_crossings(4, 0.6, (0.0, 1.0), 32, 1e-8).is_err());
        assert!(find_parity_crossings(4, 0.6, (0.0, 1.0), 512, 0.0).is_err());
        assert!(find_parity_crossings(4, 1.2, (0.0, 1.0), 512, 1e-8).is_err());
    }
}
