//! Exact diagonalization of finite periodic XY spin chains in a transverse
//! field, and the genuine multipartite correlations of their thermal states.
//!
//! The crate builds the chain Hamiltonian and its parity operator densely
//! ([`operators`]), diagonalizes them and locates the parity-sector level
//! crossings ([`spectral`]), evaluates total and genuine correlations of
//! Gibbs states in bits ([`correlations`]), and cross-validates the dense
//! spectra against the free-fermion solution of the same chain
//! ([`freefermion`]). Field/temperature sweeps, minima detection, and the
//! file formats behind the `xychain` binary live in [`sweep`] and [`cli`].
//!
//! Conventions used throughout:
//!
//! * sites are numbered `1..=N`; computational basis index
//!   `b = Σ_n s_n 2^(n-1)` with `s_n = 0` for spin up (`σ_z = +1`),
//! * couplings and fields are in units of `J` with `k_B = 1`,
//! * all entropies and correlation measures are in bits (log base 2),
//! * everything is dense; the site count is capped at
//!   [`operators::DENSE_SITE_CAP`].

pub mod cli;
pub mod correlations;
pub mod freefermion;
pub mod operators;
mod roots;
pub mod spectral;
pub mod sweep;

pub use correlations::{
    genuine_classical_quantum, genuine_total, partial_trace, relative_entropy, total_information,
    von_neumann_entropy, Bipartition, ClassicalQuantumSplit, CorrelationReport, MeasureSide,
    OptimizerConfig,
};
pub use operators::{
    build_hamiltonian, build_parity, factorized_state, factorizing_field, pauli_on_site, Branch,
    ChainSpec, HermitianOperator, PauliAxis, StateVector,
};
pub use spectral::{
    eigh, find_parity_crossings, gibbs_state, label_parity, sector_ground_energies, CrossingSet,
    DensityMatrix, Parity, SpectralDecomposition,
};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("site {site} out of range 1..={n_sites}")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("anisotropy {0} outside [0, 1]")]
    AnisotropyOutOfRange(f64),

    #[error("invalid chain spec: {0}")]
    InvalidChainSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("state vector is not normalized (|norm - 1| = {0:.3e})")]
    NotNormalized(f64),

    #[error("not a density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("eigensolver did not converge within {max_iterations} iterations (dim {dim})")]
    EighNonConvergence { dim: usize, max_iterations: usize },

    #[error("residual parity mixing {residual:.3e} above {tolerance:.1e} after cluster rotation")]
    ParityMixing { residual: f64, tolerance: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
