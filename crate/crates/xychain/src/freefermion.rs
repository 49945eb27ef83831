//! Free-fermion solution of the periodic XY chain, used as an independent
//! cross-check of the dense diagonalization.
//!
//! The Jordan–Wigner transformation maps the chain onto spinless fermions
//! whose boundary condition depends on the spin parity sector: antiperiodic
//! in the even sector, periodic in the odd sector. Each sector fills its
//! Bogoliubov vacuum subject to the fermion-number-parity constraint of the
//! sector. The dispersion prefactor, the signed treatment of the unpaired
//! `k ∈ {0, π}` modes, and the parity rule below were calibrated against the
//! dense `N = 3..8` spectra; the dense solver is the ground truth.
//!
//! Everything here is in units of `J` (couplings rescale as
//! `E(J, γ, h) = J · E(1, γ, h/J)`).

use std::f64::consts::PI;

use crate::roots::{scan_sign_changes, SignChangeScan};
use crate::spectral::{validate_crossing_args, CrossingSet, Parity, DEGENERACY_TOL};
use crate::{Error, Result};

/// Momenta within `(-π, π]` closer than this to `0` or `π` are the unpaired
/// modes whose Bogoliubov angle is fixed.
const UNPAIRED_K_TOL: f64 = 1e-9;

const CROSSING_GRID_POINTS: usize = 512;

/// Bogoliubov quasiparticle energy `ε(k) = 2 sqrt((h - cos k)² + γ² sin² k)`.
pub fn dispersion(k: f64, gamma: f64, h: f64) -> f64 {
    let a = h - k.cos();
    let b = gamma * k.sin();
    2.0 * (a * a + b * b).sqrt()
}

/// One quasiparticle mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiparticleEnergy {
    pub k: f64,
    pub epsilon: f64,
}

/// The momentum grid of one parity sector.
///
/// Even sector: antiperiodic quantization `k = (2m+1)π/N`; odd sector:
/// periodic quantization `k = 2πm/N`, which always contains `k = 0` and, for
/// even `N`, `k = π`. Both grids hold exactly `N` momenta in `(-π, π]`.
#[derive(Debug, Clone)]
pub struct SectorMomenta {
    n_sites: usize,
    parity: Parity,
    momenta: Vec<f64>,
}

impl SectorMomenta {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// Momenta in `(-π, π]`, ascending.
    pub fn momenta(&self) -> &[f64] {
        &self.momenta
    }
}

/// Momentum grid for one sector of an `n_sites` chain.
pub fn sector_momenta(n_sites: usize, parity: Parity) -> Result<SectorMomenta> {
    if n_sites < 2 {
        return Err(Error::InvalidArgument(format!(
            "n_sites = {n_sites}, need at least 2"
        )));
    }
    let n = n_sites as f64;
    let mut momenta: Vec<f64> = (0..n_sites)
        .map(|m| {
            let mut k = match parity {
                Parity::Even => (2 * m + 1) as f64 * PI / n,
                Parity::Odd => 2.0 * m as f64 * PI / n,
            };
            while k > PI + UNPAIRED_K_TOL {
                k -= 2.0 * PI;
            }
            k
        })
        .collect();
    momenta.sort_by(|a, b| a.partial_cmp(b).expect("finite momenta"));
    Ok(SectorMomenta {
        n_sites,
        parity,
        momenta,
    })
}

/// Quasiparticle modes of one sector at the given couplings.
pub fn sector_modes(
    n_sites: usize,
    parity: Parity,
    gamma: f64,
    h: f64,
) -> Result<Vec<QuasiparticleEnergy>> {
    let grid = sector_momenta(n_sites, parity)?;
    Ok(grid
        .momenta()
        .iter()
        .map(|&k| QuasiparticleEnergy {
            k,
            epsilon: dispersion(k, gamma, h),
        })
        .collect())
}

fn is_unpaired(k: f64) -> bool {
    k.abs() < UNPAIRED_K_TOL || (k - PI).abs() < UNPAIRED_K_TOL
}

/// Lowest eigenvalue of the chain restricted to one parity sector, from the
/// analytic solution.
///
/// The sector vacuum energy is `-½ Σ_k ε(k)`. Unpaired modes carry the signed
/// coefficient `2(h - cos k)` and are occupied in the minimal state when it
/// is negative; paired modes contribute even fermion number. When the
/// resulting fermion parity disagrees with the sector, the cheapest single
/// quasiparticle is added.
pub fn analytic_sector_ground_energy(
    n_sites: usize,
    gamma: f64,
    h: f64,
    parity: Parity,
) -> Result<f64> {
    if n_sites < 3 {
        return Err(Error::InvalidArgument(format!(
            "n_sites = {n_sites}, need at least 3 (the two-site chain has a doubled bond)"
        )));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::AnisotropyOutOfRange(gamma));
    }
    let modes = sector_modes(n_sites, parity, gamma, h)?;
    let mut energy: f64 = -0.5 * modes.iter().map(|m| m.epsilon).sum::<f64>();
    let occupied_unpaired = modes
        .iter()
        .filter(|m| is_unpaired(m.k) && 2.0 * (h - m.k.cos()) < 0.0)
        .count();
    let want_odd = parity == Parity::Odd;
    if (occupied_unpaired % 2 == 1) != want_odd {
        let cheapest = modes
            .iter()
            .map(|m| m.epsilon)
            .fold(f64::INFINITY, f64::min);
        energy += cheapest;
    }
    Ok(energy)
}

/// Analytic counterpart of
/// [`find_parity_crossings`](crate::spectral::find_parity_crossings): zeros of
/// the analytic sector gap, bisection-refined to `tol`.
pub fn analytic_crossings(
    n_sites: usize,
    gamma: f64,
    h_range: (f64, f64),
    tol: f64,
) -> Result<CrossingSet> {
    validate_crossing_args(gamma, h_range, tol)?;
    if n_sites < 3 {
        return Err(Error::InvalidArgument(format!(
            "n_sites = {n_sites}, need at least 3"
        )));
    }
    let gap = |h: f64| -> Result<f64> {
        Ok(
            analytic_sector_ground_energy(n_sites, gamma, h, Parity::Odd)?
                - analytic_sector_ground_energy(n_sites, gamma, h, Parity::Even)?,
        )
    };
    let SignChangeScan { zeros, tangencies } =
        scan_sign_changes(&gap, h_range, CROSSING_GRID_POINTS, tol, DEGENERACY_TOL)?;
    CrossingSet::new(zeros, gamma, n_sites, tangencies)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::ChainSpec;
    use crate::spectral::sector_ground_energies;
    use approx::assert_abs_diff_eq;

    #[test]
    fn dispersion_anchors() {
        // k = 0: magnitude 2|h - 1|
        assert_abs_diff_eq!(dispersion(0.0, 0.3, 0.25), 1.5, epsilon = 1e-14);
        // γ = 1, h = 0: flat band at 2
        for k in [-2.0, 0.3, 1.9] {
            assert_abs_diff_eq!(dispersion(k, 1.0, 0.0), 2.0, epsilon = 1e-14);
        }
        // γ = 0.6, h = 0.8, k = π/2
        assert_abs_diff_eq!(dispersion(PI / 2.0, 0.6, 0.8), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn dispersion_is_nonnegative_and_continuous_in_h() {
        for k in [-2.9, -1.0, 0.7, 2.2] {
            let mut last = dispersion(k, 0.4, 0.0);
            assert!(last >= 0.0);
            for i in 1..=60 {
                let h = i as f64 * 0.025;
                let e = dispersion(k, 0.4, h);
                assert!(e >= 0.0);
                assert!((e - last).abs() < 0.06, "jump at k={k}, h={h}");
                last = e;
            }
        }
    }

    #[test]
    fn momentum_grids() {
        let even = sector_momenta(4, Parity::Even).unwrap();
        let want = [-3.0 * PI / 4.0, -PI / 4.0, PI / 4.0, 3.0 * PI / 4.0];
        for (k, w) in even.momenta().iter().zip(want) {
            assert_abs_diff_eq!(*k, w, epsilon = 1e-12);
        }
        let odd = sector_momenta(4, Parity::Odd).unwrap();
        let want = [-PI / 2.0, 0.0, PI / 2.0, PI];
        for (k, w) in odd.momenta().iter().zip(want) {
            assert_abs_diff_eq!(*k, w, epsilon = 1e-12);
        }
        let odd3 = sector_momenta(3, Parity::Odd).unwrap();
        let want = [-2.0 * PI / 3.0, 0.0, 2.0 * PI / 3.0];
        for (k, w) in odd3.momenta().iter().zip(want) {
            assert_abs_diff_eq!(*k, w, epsilon = 1e-12);
        }
    }

    #[test]
    fn grids_have_n_momenta_in_range() {
        for n in 2..=9 {
            for parity in [Parity::Even, Parity::Odd] {
                let grid = sector_momenta(n, parity).unwrap();
                assert_eq!(grid.momenta().len(), n);
                assert!(grid.momenta().iter().all(|&k| -PI < k && k <= PI + 1e-12));
            }
        }
    }

    #[test]
    fn matches_dense_sector_energies() {
        for n in 3..=6 {
            for gamma in [0.2, 0.6, 1.0] {
                for h in [0.0, 0.5, 0.8, 1.5] {
                    let spec = ChainSpec::new(n, gamma, h, 0.0).unwrap();
                    let (dense_even, dense_odd) = sector_ground_energies(&spec).unwrap();
                    let even = analytic_sector_ground_energy(n, gamma, h, Parity::Even).unwrap();
                    let odd = analytic_sector_ground_energy(n, gamma, h, Parity::Odd).unwrap();
                    assert_abs_diff_eq!(even, dense_even, epsilon = 1e-9);
                    assert_abs_diff_eq!(odd, dense_odd, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn degenerate_at_zero_field_for_odd_n() {
        let even = analytic_sector_ground_energy(5, 0.6, 0.0, Parity::Even).unwrap();
        let odd = analytic_sector_ground_energy(5, 0.6, 0.0, Parity::Odd).unwrap();
        assert_abs_diff_eq!(even, odd, epsilon = 1e-9);
    }

    #[test]
    fn even_sector_holds_the_polarized_ground_state() {
        let spec = ChainSpec::new(6, 0.6, 1.5, 0.0).unwrap();
        let (dense_even, dense_odd) = sector_ground_energies(&spec).unwrap();
        let even = analytic_sector_ground_energy(6, 0.6, 1.5, Parity::Even).unwrap();
        assert_abs_diff_eq!(even, dense_even.min(dense_odd), epsilon = 1e-9);
    }

    #[test]
    fn rejects_small_chains() {
        assert!(analytic_sector_ground_energy(2, 0.6, 0.5, Parity::Even).is_err());
        assert!(sector_momenta(1, Parity::Even).is_err());
    }

    #[test]
    fn analytic_crossings_match_dense() {
        use crate::spectral::find_parity_crossings;
        for n in [4, 7] {
            let analytic = analytic_crossings(n, 0.6, (0.0, 1.0), 1e-8).unwrap();
            let dense = find_parity_crossings(n, 0.6, (0.0, 1.0), 512, 1e-8).unwrap();
            assert_eq!(analytic.len(), dense.len());
            for (a, d) in analytic.fields().iter().zip(dense.fields()) {
                assert_abs_diff_eq!(*a, *d, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn isotropic_crossings_match_dense() {
        use crate::spectral::find_parity_crossings;
        for n in 4..=6 {
            let analytic = analytic_crossings(n, 0.0, (0.0, 1.0), 1e-8).unwrap();
            let dense = find_parity_crossings(n, 0.0, (0.0, 1.0), 512, 1e-8).unwrap();
            assert_eq!(analytic.len(), dense.len(), "N = {n}");
            for (a, d) in analytic.fields().iter().zip(dense.fields()) {
                assert_abs_diff_eq!(*a, *d, epsilon = 1e-7);
                assert!((0.0..1.0).contains(a));
            }
        }
    }

    #[test]
    fn gap_vanishes_at_the_factorizing_field() {
        for n in 3..=8 {
            for gamma in [0.3, 0.6, 0.9] {
                let h_f = crate::operators::factorizing_field(gamma).unwrap();
                let even = analytic_sector_ground_energy(n, gamma, h_f, Parity::Even).unwrap();
                let odd = analytic_sector_ground_energy(n, gamma, h_f, Parity::Odd).unwrap();
                assert_abs_diff_eq!(even, odd, epsilon = 1e-9);
            }
        }
    }
}
