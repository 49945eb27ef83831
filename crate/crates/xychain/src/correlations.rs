//! Partial traces, entropies, total information, genuine total correlations
//! over the optimal bipartite cut, and the measurement-optimized split into
//! genuine classical and quantum parts.
//!
//! All quantities are in bits. Total information is
//! `T(ρ) = Σ_n S(ρ_n) - S(ρ)`, equal to the relative entropy between `ρ` and
//! the product of its marginals; both routes are implemented and checked
//! against each other in the test suite. Genuine total correlations
//! `T^(N)` minimize the cut mutual information `S(ρ_a) + S(ρ_b) - S(ρ)` over
//! every bipartition, with the minimizing cut built from the marginals of
//! the total state.
//!
//! The classical/quantum split restricts measurements to products of
//! single-site projective measurements on one side of the cut (two angles
//! per site), the standard practice for multi-qubit discord. The reported
//! `J` is therefore a lower bound on the unrestricted classical
//! correlations, and `D` an upper bound on the quantum ones.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::spectral::{DensityMatrix, DM_EIGENVALUE_FLOOR};
use crate::{Error, Result};

/// Negative relative-entropy results beyond this magnitude are a numerical
/// failure rather than roundoff.
const NEGATIVITY_GUARD: f64 = 1e-8;

/// Eigenvalues of `σ` below this count as outside its support.
const SUPPORT_ZERO: f64 = 1e-12;

/// Weight of `ρ` on the null space of `σ` above this flags the
/// infinite-relative-entropy case.
const SUPPORT_TOL: f64 = 1e-10;

/// Measurement outcomes with probability below this are dropped from the
/// conditional-entropy average.
const OUTCOME_FLOOR: f64 = 1e-12;

/// A bipartite cut of `n_sites` parties, stored as a bitmask over the site
/// positions `0..n_sites` of a density matrix.
///
/// Canonical form: side `a` contains position 0 (the first site), so each
/// unordered cut is counted exactly once. There are `2^(N-1) - 1` canonical
/// cuts of `N` sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bipartition {
    n_sites: usize,
    side_a: u64,
}

impl Bipartition {
    pub fn new(n_sites: usize, side_a: u64) -> Result<Self> {
        if !(2..=63).contains(&n_sites) {
            return Err(Error::InvalidArgument(format!(
                "n_sites = {n_sites}, need 2..=63"
            )));
        }
        let full = (1u64 << n_sites) - 1;
        if side_a & !full != 0 {
            return Err(Error::InvalidArgument(format!(
                "side_a mask {side_a:#b} has bits beyond {n_sites} sites"
            )));
        }
        if side_a == 0 || side_a == full {
            return Err(Error::InvalidArgument(
                "side_a must be a nonempty proper subset".into(),
            ));
        }
        if side_a & 1 == 0 {
            return Err(Error::InvalidArgument(
                "canonical cuts keep the first site on side a".into(),
            ));
        }
        Ok(Self { n_sites, side_a })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn side_a(&self) -> u64 {
        self.side_a
    }

    pub fn side_b(&self) -> u64 {
        ((1u64 << self.n_sites) - 1) ^ self.side_a
    }

    /// Zero-based positions on side a, ascending.
    pub fn side_a_positions(&self) -> Vec<usize> {
        mask_positions(self.side_a)
    }

    pub fn side_b_positions(&self) -> Vec<usize> {
        mask_positions(self.side_b())
    }

    /// Every canonical cut of `n_sites` parties, ascending by mask.
    pub fn enumerate(n_sites: usize) -> impl Iterator<Item = Bipartition> {
        let full = (1u64 << n_sites) - 1;
        (1..full)
            .filter(|m| m & 1 == 1)
            .map(move |side_a| Bipartition { n_sites, side_a })
    }
}

fn mask_positions(mask: u64) -> Vec<usize> {
    (0..64).filter(|p| mask >> p & 1 == 1).collect()
}

/// Reduced state of `rho` on the listed sites.
///
/// `keep` holds site identifiers (members of `rho.sites()`, in any order,
/// no duplicates); the result is ordered ascending.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::InvalidArgument("keep must be nonempty".into()));
    }
    let mut keep_mask: u64 = 0;
    for &site in keep {
        let position = rho.sites().iter().position(|&s| s == site).ok_or_else(|| {
            Error::InvalidArgument(format!("site {site} is not part of this state"))
        })?;
        if keep_mask >> position & 1 == 1 {
            return Err(Error::InvalidArgument(format!("duplicate site {site}")));
        }
        keep_mask |= 1 << position;
    }
    let entries = ptrace_positions(rho.entries(), rho.n_sites(), keep_mask);
    let sites: Vec<usize> = mask_positions(keep_mask)
        .into_iter()
        .map(|p| rho.sites()[p])
        .collect();
    Ok(DensityMatrix::from_trusted(sites, entries))
}

/// Partial trace over positions: keeps the positions in `keep_mask`, traces
/// the rest. Reduced index bit `p` is the `p`-th kept position ascending.
pub(crate) fn ptrace_positions(
    entries: &DMatrix<Complex64>,
    n_positions: usize,
    keep_mask: u64,
) -> DMatrix<Complex64> {
    let keep: Vec<usize> = mask_positions(keep_mask)
        .into_iter()
        .filter(|&p| p < n_positions)
        .collect();
    let traced: Vec<usize> = (0..n_positions)
        .filter(|p| keep_mask >> p & 1 == 0)
        .collect();
    let scatter = |bits: usize, positions: &[usize]| -> usize {
        positions
            .iter()
            .enumerate()
            .fold(0, |acc, (p, &pos)| acc | (((bits >> p) & 1) << pos))
    };
    let kept_dim = 1usize << keep.len();
    let traced_dim = 1usize << traced.len();
    let row_base: Vec<usize> = (0..kept_dim).map(|b| scatter(b, &keep)).collect();
    let env: Vec<usize> = (0..traced_dim).map(|b| scatter(b, &traced)).collect();
    DMatrix::from_fn(kept_dim, kept_dim, |i, j| {
        env.iter()
            .map(|&t| entries[(row_base[i] | t, row_base[j] | t)])
            .sum()
    })
}

/// Entropy in bits from an eigenvalue list, with `0 log 0 = 0`.
///
/// Eigenvalues in `[-1e-10, 0)` are eigensolver noise and clamp to zero;
/// anything below the floor violates the density-matrix contract.
fn entropy_from_eigenvalues<'a>(eigenvalues: impl Iterator<Item = &'a f64>) -> Result<f64> {
    let mut s = 0.0;
    for &ev in eigenvalues {
        if ev < DM_EIGENVALUE_FLOOR {
            return Err(Error::InvalidDensityMatrix(format!(
                "eigenvalue {ev:.3e} below {DM_EIGENVALUE_FLOOR:.1e}"
            )));
        }
        if ev > 0.0 {
            s -= ev * ev.log2();
        }
    }
    Ok(s)
}

/// Entropy of an eigenvalue list whose small negative parts are clamped
/// without complaint. Used for measurement branches, where division by a
/// small outcome probability amplifies roundoff past the strict floor.
fn entropy_from_eigenvalues_lenient<'a>(eigenvalues: impl Iterator<Item = &'a f64>) -> f64 {
    eigenvalues
        .filter(|&&ev| ev > 0.0)
        .map(|&ev| -ev * ev.log2())
        .sum()
}

/// Von Neumann entropy `S(ρ) = -Tr ρ log₂ ρ` in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let evs = rho.entries().clone().symmetric_eigenvalues();
    entropy_from_eigenvalues(evs.iter())
}

fn entropy_of_entries(entries: &DMatrix<Complex64>) -> Result<f64> {
    let evs = entries.clone().symmetric_eigenvalues();
    entropy_from_eigenvalues(evs.iter())
}

/// Relative entropy `S(ρ‖σ) = Tr ρ log₂ ρ - Tr ρ log₂ σ` in bits.
///
/// Returns `f64::INFINITY` when `ρ` has weight on the null space of `σ`
/// (support violation); that is a flag value, not an error.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.sites() != sigma.sites() {
        return Err(Error::InvalidArgument(
            "relative entropy needs two states on the same sites".into(),
        ));
    }
    let rho_evs = rho.entries().clone().symmetric_eigenvalues();
    let tr_rho_log_rho: f64 = {
        let mut acc = 0.0;
        for &r in rho_evs.iter() {
            if r < DM_EIGENVALUE_FLOOR {
                return Err(Error::InvalidDensityMatrix(format!(
                    "eigenvalue {r:.3e} below {DM_EIGENVALUE_FLOOR:.1e}"
                )));
            }
            if r > 0.0 {
                acc += r * r.log2();
            }
        }
        acc
    };
    let sigma_eig = nalgebra::linalg::SymmetricEigen::new(sigma.entries().clone());
    // q_j = <w_j| ρ |w_j>, the weight of ρ on each eigenvector of σ
    let overlaps = sigma_eig.eigenvectors.adjoint() * rho.entries() * &sigma_eig.eigenvectors;
    let mut tr_rho_log_sigma = 0.0;
    for j in 0..sigma.dim() {
        let s = sigma_eig.eigenvalues[j];
        let q = overlaps[(j, j)].re;
        if s <= SUPPORT_ZERO {
            if q > SUPPORT_TOL {
                return Ok(f64::INFINITY);
            }
        } else if q > 0.0 {
            tr_rho_log_sigma += q * s.log2();
        }
    }
    let value = tr_rho_log_rho - tr_rho_log_sigma;
    if value < -NEGATIVITY_GUARD {
        return Err(Error::Numerical(format!(
            "relative entropy {value:.3e} below zero"
        )));
    }
    Ok(value.max(0.0))
}

/// Total information `T(ρ) = Σ_n S(ρ_n) - S(ρ)` in bits.
pub fn total_information(rho: &DensityMatrix) -> Result<f64> {
    require_multipartite(rho)?;
    let mut total = -von_neumann_entropy(rho)?;
    for p in 0..rho.n_sites() {
        let marginal = ptrace_positions(rho.entries(), rho.n_sites(), 1 << p);
        total += entropy_of_entries(&marginal)?;
    }
    clamp_roundoff(total)
}

/// Total information computed as the relative entropy to the product of the
/// marginals. Cross-check route for [`total_information`]; the two agree
/// within 1e-8.
pub fn total_information_via_relative_entropy(rho: &DensityMatrix) -> Result<f64> {
    require_multipartite(rho)?;
    let n = rho.n_sites();
    let mut product = DMatrix::<Complex64>::identity(1, 1);
    // fold from the highest position down so position 0 lands on the low bit
    for p in (0..n).rev() {
        let marginal = ptrace_positions(rho.entries(), n, 1 << p);
        product = product.kronecker(&marginal);
    }
    let pi = DensityMatrix::from_trusted(rho.sites().to_vec(), product);
    relative_entropy(rho, &pi)
}

/// Genuine total correlations `T^(N)` and the cut that attains them:
/// the minimum over all canonical bipartitions of
/// `S(ρ_a) + S(ρ_b) - S(ρ)`, ties broken by the smallest side-a bitmask.
pub fn genuine_total(rho: &DensityMatrix) -> Result<(f64, Bipartition)> {
    require_multipartite(rho)?;
    let n = rho.n_sites();
    let s_total = von_neumann_entropy(rho)?;
    let cuts: Vec<Bipartition> = Bipartition::enumerate(n).collect();
    let values: Vec<f64> = cuts
        .par_iter()
        .map(|cut| -> Result<f64> {
            let a = ptrace_positions(rho.entries(), n, cut.side_a());
            let b = ptrace_positions(rho.entries(), n, cut.side_b());
            Ok(entropy_of_entries(&a)? + entropy_of_entries(&b)? - s_total)
        })
        .collect::<Result<Vec<f64>>>()?;
    // sequential scan over the mask-ordered results keeps ties deterministic
    let mut best = values[0];
    let mut best_cut = cuts[0];
    for (cut, &value) in cuts.iter().zip(&values).skip(1) {
        if value < best {
            best = value;
            best_cut = *cut;
        }
    }
    Ok((clamp_roundoff(best)?, best_cut))
}

fn require_multipartite(rho: &DensityMatrix) -> Result<()> {
    if rho.n_sites() < 2 {
        return Err(Error::InvalidArgument(
            "correlation measures need at least 2 sites".into(),
        ));
    }
    Ok(())
}

fn clamp_roundoff(value: f64) -> Result<f64> {
    if value < -NEGATIVITY_GUARD {
        return Err(Error::Numerical(format!(
            "correlation measure {value:.3e} below zero"
        )));
    }
    Ok(value.max(0.0))
}

/// Which side of the cut carries the measurement in
/// [`genuine_classical_quantum`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureSide {
    SideA,
    SideB,
    /// Measure both sides independently and keep the larger classical part.
    Best,
}

/// Settings of the measurement optimizer.
#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    /// Multi-start count; the first start is always the z-basis.
    pub restarts: usize,
    /// Convergence tolerance on the objective, in bits.
    pub tolerance: f64,
    /// Iteration cap per local search.
    pub max_iters: usize,
    /// Seed of the restart sampler.
    pub seed: u64,
    pub measure_side: MeasureSide,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 16,
            tolerance: 1e-6,
            max_iters: 600,
            seed: 1,
            measure_side: MeasureSide::SideA,
        }
    }
}

/// Result of the classical/quantum split across one cut.
#[derive(Debug, Clone, Copy)]
pub struct ClassicalQuantumSplit {
    /// Genuine classical correlations `J^(N)` in bits.
    pub classical: f64,
    /// Genuine quantum correlations `D^(N)` in bits.
    pub quantum: f64,
    /// False when no local search met its tolerance; the values are then the
    /// best found rather than converged optima.
    pub converged: bool,
}

/// Split the cut mutual information into genuine classical and quantum parts.
///
/// `J = max_M [ S(ρ_b) - Σ_k p_k S(ρ_b|k) ]` over products of single-site
/// projective measurements on the measured side, and `D = I(a:b) - J`. On
/// pure global states both equal the entanglement entropy of the cut, which
/// is half the genuine total correlations.
pub fn genuine_classical_quantum(
    rho: &DensityMatrix,
    cut: &Bipartition,
    config: &OptimizerConfig,
) -> Result<ClassicalQuantumSplit> {
    require_multipartite(rho)?;
    if cut.n_sites() != rho.n_sites() {
        return Err(Error::InvalidArgument(format!(
            "cut is over {} sites, state over {}",
            cut.n_sites(),
            rho.n_sites()
        )));
    }
    let n = rho.n_sites();
    let s_a = entropy_of_entries(&ptrace_positions(rho.entries(), n, cut.side_a()))?;
    let s_b = entropy_of_entries(&ptrace_positions(rho.entries(), n, cut.side_b()))?;
    let mutual = clamp_roundoff(s_a + s_b - von_neumann_entropy(rho)?)?;

    let run = |measured: u64| -> Result<(f64, bool)> { optimize_classical(rho, measured, config) };
    let (classical, converged) = match config.measure_side {
        MeasureSide::SideA => run(cut.side_a())?,
        MeasureSide::SideB => run(cut.side_b())?,
        MeasureSide::Best => {
            let (ja, ca) = run(cut.side_a())?;
            let (jb, cb) = run(cut.side_b())?;
            if ja >= jb {
                (ja, ca)
            } else {
                (jb, cb)
            }
        }
    };
    let classical = classical.min(mutual);
    Ok(ClassicalQuantumSplit {
        classical,
        quantum: (mutual - classical).max(0.0),
        converged,
    })
}

/// Maximize `S(ρ_unmeasured) - Σ_k p_k S(ρ_unmeasured | k)` over the
/// measurement angles; returns `(J, converged)`.
fn optimize_classical(
    rho: &DensityMatrix,
    measured_mask: u64,
    config: &OptimizerConfig,
) -> Result<(f64, bool)> {
    let n = rho.n_sites();
    let other_mask = ((1u64 << n) - 1) ^ measured_mask;
    let s_other = entropy_of_entries(&ptrace_positions(rho.entries(), n, other_mask))?;
    let measured = mask_positions(measured_mask);
    let dims = 2 * measured.len();

    let objective = |angles: &[f64]| -> f64 {
        conditional_entropy(rho.entries(), n, &measured, other_mask, angles)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut starts: Vec<Vec<f64>> = vec![vec![0.0; dims]];
    for _ in 1..config.restarts.max(1) {
        starts.push(
            (0..dims)
                .map(|i| {
                    if i % 2 == 0 {
                        rng.random_range(0.0..PI)
                    } else {
                        rng.random_range(0.0..2.0 * PI)
                    }
                })
                .collect(),
        );
    }

    let results: Vec<(f64, bool)> = starts
        .par_iter()
        .map(|x0| {
            let (_, value, converged) =
                nelder_mead(&objective, x0, 0.4, config.tolerance, config.max_iters);
            (value, converged)
        })
        .collect();
    let mut best = f64::INFINITY;
    let mut best_converged = false;
    for (value, converged) in results {
        if value < best {
            best = value;
            best_converged = converged;
        }
    }
    Ok(((s_other - best).max(0.0), best_converged))
}

/// `Σ_k p_k S(ρ_other | k)` for the product projective measurement given by
/// `angles` (θ, φ per measured position).
fn conditional_entropy(
    entries: &DMatrix<Complex64>,
    n_positions: usize,
    measured: &[usize],
    other_mask: u64,
    angles: &[f64],
) -> f64 {
    let outcomes = 1usize << measured.len();
    let mut acc = 0.0;
    for outcome in 0..outcomes {
        let m = measurement_operator(n_positions, measured, angles, outcome);
        let selected = &m * entries;
        let p = selected.trace().re;
        if p < OUTCOME_FLOOR {
            continue;
        }
        let mut branch = ptrace_positions(&selected, n_positions, other_mask) / Complex64::from(p);
        // the branch inherits roundoff from the projector product; hermitize
        let adjoint = branch.adjoint();
        branch = (branch + adjoint) * Complex64::from(0.5);
        let evs = branch.symmetric_eigenvalues();
        acc += p * entropy_from_eigenvalues_lenient(evs.iter());
    }
    acc
}

/// `Π_{k_1}(θ_1, φ_1) ⊗ … ⊗ I ⊗ …`: projector onto one outcome string of the
/// product measurement, identity on unmeasured positions.
fn measurement_operator(
    n_positions: usize,
    measured: &[usize],
    angles: &[f64],
    outcome: usize,
) -> DMatrix<Complex64> {
    let mut op = DMatrix::<Complex64>::identity(1, 1);
    // high positions first so position 0 lands on the low bit
    for position in (0..n_positions).rev() {
        let factor = match measured.iter().position(|&m| m == position) {
            Some(i) => {
                let sign = if outcome >> i & 1 == 0 { 1.0 } else { -1.0 };
                projector(angles[2 * i], angles[2 * i + 1], sign)
            }
            None => DMatrix::<Complex64>::identity(2, 2),
        };
        op = op.kronecker(&factor);
    }
    op
}

/// `½ (I ± n̂·σ)` for the Bloch direction `(θ, φ)`.
fn projector(theta: f64, phi: f64, sign: f64) -> DMatrix<Complex64> {
    let nx = sign * theta.sin() * phi.cos();
    let ny = sign * theta.sin() * phi.sin();
    let nz = sign * theta.cos();
    DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.5 * (1.0 + nz), 0.0),
            Complex64::new(0.5 * nx, -0.5 * ny),
            Complex64::new(0.5 * nx, 0.5 * ny),
            Complex64::new(0.5 * (1.0 - nz), 0.0),
        ],
    )
}

/// Correlation content of one state: total, genuine total with its cut, and
/// optionally the classical/quantum split on that cut.
#[derive(Debug, Clone)]
pub struct CorrelationReport {
    pub total: f64,
    pub genuine_total: f64,
    pub optimal_cut: Bipartition,
    pub genuine_classical: Option<f64>,
    pub genuine_quantum: Option<f64>,
}

/// Evaluate every correlation measure on one state. The classical/quantum
/// split runs only when an optimizer config is supplied.
pub fn correlation_report(
    rho: &DensityMatrix,
    discord: Option<&OptimizerConfig>,
) -> Result<CorrelationReport> {
    let total = total_information(rho)?;
    let (genuine, cut) = genuine_total(rho)?;
    let (classical, quantum) = match discord {
        Some(config) => {
            let split = genuine_classical_quantum(rho, &cut, config)?;
            (Some(split.classical), Some(split.quantum))
        }
        None => (None, None),
    };
    Ok(CorrelationReport {
        total,
        genuine_total: genuine,
        optimal_cut: cut,
        genuine_classical: classical,
        genuine_quantum: quantum,
    })
}

/// Nelder–Mead downhill simplex. Returns `(x_best, f_best, converged)` where
/// convergence means the simplex f-spread dropped below `tol`.
fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: &F,
    x0: &[f64],
    step: f64,
    tol: f64,
    max_iters: usize,
) -> (Vec<f64>, f64, bool) {
    let dim = x0.len();
    let mut simplex: Vec<DVector<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(DVector::from_column_slice(x0));
    for i in 0..dim {
        let mut v = DVector::from_column_slice(x0);
        v[i] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| f(x.as_slice())).collect();

    let mut converged = false;
    for _ in 0..max_iters {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite objective"));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        if values[dim] - values[0] < tol {
            converged = true;
            break;
        }

        let centroid: DVector<f64> = simplex[..dim].iter().sum::<DVector<f64>>() / dim as f64;
        let reflected = &centroid * 2.0 - &simplex[dim];
        let f_reflected = f(reflected.as_slice());

        if f_reflected < values[0] {
            let expanded = &centroid * 3.0 - &simplex[dim] * 2.0;
            let f_expanded = f(expanded.as_slice());
            if f_expanded < f_reflected {
                simplex[dim] = expanded;
                values[dim] = f_expanded;
            } else {
                simplex[dim] = reflected;
                values[dim] = f_reflected;
            }
        } else if f_reflected < values[dim - 1] {
            simplex[dim] = reflected;
            values[dim] = f_reflected;
        } else {
            let contracted = (&centroid + &simplex[dim]) * 0.5;
            let f_contracted = f(contracted.as_slice());
            if f_contracted < values[dim] {
                simplex[dim] = contracted;
                values[dim] = f_contracted;
            } else {
                // shrink toward the best vertex
                for i in 1..=dim {
                    simplex[i] = (&simplex[i] + &simplex[0]) * 0.5;
                    values[i] = f(simplex[i].as_slice());
                }
            }
        }
    }
    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite objective"))
        .map(|(i, _)| i)
        .expect("nonempty simplex");
    (simplex[best].as_slice().to_vec(), values[best], converged)
}
