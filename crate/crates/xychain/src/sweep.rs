//! Field/temperature sweeps, minima detection, crossing and factorization
//! reports, and the CSV/JSONL output formats.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::correlations::{correlation_report, OptimizerConfig};
use crate::freefermion::analytic_crossings;
use crate::operators::{
    build_hamiltonian, factorized_state, factorized_state_angle, factorizing_field, Branch,
    ChainSpec, DENSE_SITE_CAP,
};
use crate::spectral::{
    eigh, find_parity_crossings, gibbs_state, sector_ground_energies_of, CrossingSet,
    CRITICAL_FIELD, DEGENERACY_TOL,
};
use crate::{Error, Result};

/// Minimum prominence (bits) separating a physical dip from grid noise in
/// low-temperature sweeps.
pub const DEFAULT_PROMINENCE: f64 = 0.005;

/// Stricter prominence used for the high-temperature washout check.
pub const WASHOUT_PROMINENCE: f64 = 0.01;

/// Grid resolution for crossing scans.
pub const DEFAULT_CROSSING_GRID: usize = 512;

/// Default bisection tolerance for crossing refinement.
pub const DEFAULT_BISECTION_TOL: f64 = 1e-8;

/// Dense and analytic crossing lists disagreeing beyond this are flagged.
pub const CROSSING_AGREEMENT_TOL: f64 = 1e-6;

/// Energy-variance ceiling for a factorization pass.
pub const FACTORIZATION_VARIANCE_TOL: f64 = 1e-10;

/// Ground-manifold overlap floor for a factorization pass.
pub const FACTORIZATION_OVERLAP_TOL: f64 = 1e-9;

/// Uniform field grid `start..=stop` with `points` samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl HGrid {
    pub fn new(start: f64, stop: f64, points: usize) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite() && start < stop) {
            return Err(Error::InvalidArgument(format!(
                "h grid ({start}, {stop}) needs finite start < stop"
            )));
        }
        if points < 2 {
            return Err(Error::InvalidArgument(format!(
                "h grid needs at least 2 points, got {points}"
            )));
        }
        Ok(Self {
            start,
            stop,
            points,
        })
    }

    pub fn step(&self) -> f64 {
        (self.stop - self.start) / (self.points - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points)
            .map(|i| self.start + i as f64 * self.step())
            .collect()
    }
}

impl Default for HGrid {
    fn default() -> Self {
        Self {
            start: 0.0,
            stop: 1.2,
            points: 241,
        }
    }
}

impl FromStr for HGrid {
    type Err = Error;

    /// Parse `start:stop:points`, e.g. `0:1.2:241`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidArgument(format!(
                "h grid '{s}' must be start:stop:points"
            )));
        }
        let start: f64 = parts[0]
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad grid start '{}'", parts[0])))?;
        let stop: f64 = parts[1]
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad grid stop '{}'", parts[1])))?;
        let points: usize = parts[2]
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad grid points '{}'", parts[2])))?;
        Self::new(start, stop, points)
    }
}

/// Output encoding of sweep records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Jsonl,
}

/// Everything one sweep run needs.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub n_sites: usize,
    pub gamma: f64,
    pub coupling: f64,
    pub temperatures: Vec<f64>,
    pub h_grid: HGrid,
    pub compute_discord: bool,
    pub optimizer: OptimizerConfig,
    pub prominence: f64,
    /// Output destination; `None` means stdout.
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    /// Annotation constant echoed into reports; nothing switches on it.
    pub critical_field: f64,
}

impl SweepConfig {
    /// Defaults: unit coupling, `T = 0.01`, the default grid, CSV, no discord.
    pub fn new(n_sites: usize, gamma: f64) -> Self {
        Self {
            n_sites,
            gamma,
            coupling: 1.0,
            temperatures: vec![0.01],
            h_grid: HGrid::default(),
            compute_discord: false,
            optimizer: OptimizerConfig::default(),
            prominence: DEFAULT_PROMINENCE,
            out: None,
            format: OutputFormat::Csv,
            critical_field: CRITICAL_FIELD,
        }
    }

    pub fn validate(&self) -> Result<()> {
        // ChainSpec repeats the n/γ checks; do them once up front
        ChainSpec::new(self.n_sites, self.gamma, self.h_grid.start, 0.0)?
            .with_coupling(self.coupling)?;
        if self.temperatures.is_empty() {
            return Err(Error::InvalidArgument(
                "at least one temperature is required".into(),
            ));
        }
        for &t in &self.temperatures {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "temperature = {t}, need a finite value >= 0"
                )));
            }
        }
        if !(self.prominence >= 0.0 && self.prominence.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "prominence = {}, need a finite value >= 0",
                self.prominence
            )));
        }
        HGrid::new(self.h_grid.start, self.h_grid.stop, self.h_grid.points)?;
        Ok(())
    }
}

/// One `(h, T)` evaluation of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub h: f64,
    pub temperature: f64,
    pub total_bits: f64,
    pub genuine_total_bits: f64,
    pub optimal_cut_mask: u64,
    #[serde(rename = "E0_even")]
    pub e0_even: f64,
    #[serde(rename = "E0_odd")]
    pub e0_odd: f64,
    /// `E0_odd - E0_even`, exactly as computed.
    pub gap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub genuine_classical_bits: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub genuine_quantum_bits: Option<f64>,
    /// Set when this point failed numerically; the value fields are NaN.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Evaluate the full `(T, h)` grid.
///
/// Points are evaluated in parallel; records come back in ascending `(T, h)`
/// order regardless. A numerical failure at one point flags that record and
/// the sweep continues.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRecord>> {
    config.validate()?;
    let mut temperatures = config.temperatures.clone();
    temperatures.sort_by(|a, b| a.partial_cmp(b).expect("validated finite"));
    let fields = config.h_grid.values();
    let pairs: Vec<(f64, f64)> = temperatures
        .iter()
        .flat_map(|&t| fields.iter().map(move |&h| (t, h)))
        .collect();
    Ok(pairs
        .par_iter()
        .map(|&(t, h)| evaluate_point(config, t, h))
        .collect())
}

fn evaluate_point(config: &SweepConfig, temperature: f64, h: f64) -> SweepRecord {
    match try_evaluate_point(config, temperature, h) {
        Ok(record) => record,
        Err(e) => SweepRecord {
            h,
            temperature,
            total_bits: f64::NAN,
            genuine_total_bits: f64::NAN,
            optimal_cut_mask: 0,
            e0_even: f64::NAN,
            e0_odd: f64::NAN,
            gap: f64::NAN,
            genuine_classical_bits: None,
            genuine_quantum_bits: None,
            error: Some(e.to_string()),
        },
    }
}

fn try_evaluate_point(config: &SweepConfig, temperature: f64, h: f64) -> Result<SweepRecord> {
    let spec = ChainSpec::new(config.n_sites, config.gamma, h, temperature)?
        .with_coupling(config.coupling)?;
    let hamiltonian = build_hamiltonian(&spec);
    let (e0_even, e0_odd) = sector_ground_energies_of(&hamiltonian)?;
    let decomp = eigh(&hamiltonian)?;
    let rho = gibbs_state(&decomp, temperature)?;
    let discord = config.compute_discord.then_some(&config.optimizer);
    let report = correlation_report(&rho, discord)?;
    Ok(SweepRecord {
        h,
        temperature,
        total_bits: report.total,
        genuine_total_bits: report.genuine_total,
        optimal_cut_mask: report.optimal_cut.side_a(),
        e0_even,
        e0_odd,
        gap: e0_odd - e0_even,
        genuine_classical_bits: report.genuine_classical,
        genuine_quantum_bits: report.genuine_quantum,
        error: None,
    })
}

/// One detected local minimum of a sweep curve.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Minimum {
    pub h: f64,
    pub value: f64,
    pub prominence: f64,
}

/// Interior local minima of `series` with prominence at or above the
/// threshold.
///
/// A minimum must sit strictly below both neighbors; endpoints are never
/// minima. Its prominence is the smaller of the climbs needed to escape it:
/// on each side, walk until a value at or below the minimum appears (or the
/// series ends) and take the highest barrier passed.
pub fn detect_minima(series: &[(f64, f64)], prominence_threshold: f64) -> Result<Vec<Minimum>> {
    if series.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "series has {} points, need at least 3",
            series.len()
        )));
    }
    if !series.windows(2).all(|w| w[0].0 < w[1].0) {
        return Err(Error::InvalidArgument(
            "series must be sorted by strictly increasing h".into(),
        ));
    }
    if !(prominence_threshold >= 0.0 && prominence_threshold.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "prominence threshold = {prominence_threshold}, need a finite value >= 0"
        )));
    }
    let values: Vec<f64> = series.iter().map(|&(_, v)| v).collect();
    let mut minima = Vec::new();
    for i in 1..values.len() - 1 {
        if !(values[i] < values[i - 1] && values[i] < values[i + 1]) {
            continue;
        }
        let barrier = |indices: &mut dyn Iterator<Item = usize>| -> f64 {
            let mut highest = f64::NEG_INFINITY;
            for j in indices {
                if values[j] <= values[i] {
                    break;
                }
                highest = highest.max(values[j]);
            }
            highest
        };
        let left = barrier(&mut (0..i).rev());
        let right = barrier(&mut (i + 1..values.len()));
        let prominence = left.min(right) - values[i];
        if prominence >= prominence_threshold {
            minima.push(Minimum {
                h: series[i].0,
                value: values[i],
                prominence,
            });
        }
    }
    Ok(minima)
}

/// Minima of one temperature slice of a sweep, alongside the refined
/// crossings and the factorizing field for the same `(N, γ)`.
#[derive(Debug, Clone)]
pub struct MinimaReport {
    pub temperature: f64,
    pub minima: Vec<Minimum>,
    pub crossings: CrossingSet,
    pub factorizing_field_value: f64,
}

/// Build the minima report for one temperature out of sweep records.
pub fn minima_report(
    records: &[SweepRecord],
    temperature: f64,
    config: &SweepConfig,
) -> Result<MinimaReport> {
    let series: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.temperature == temperature && r.error.is_none())
        .map(|r| (r.h, r.genuine_total_bits))
        .collect();
    // fewer than 3 points cannot hold an interior minimum
    let minima = if series.len() < 3 {
        Vec::new()
    } else {
        detect_minima(&series, config.prominence)?
    };
    let crossings = find_parity_crossings(
        config.n_sites,
        config.gamma,
        (0.0, 1.0),
        DEFAULT_CROSSING_GRID,
        DEFAULT_BISECTION_TOL,
    )?;
    Ok(MinimaReport {
        temperature,
        minima,
        crossings,
        factorizing_field_value: factorizing_field(config.gamma)?,
    })
}

/// Dense and analytic crossing lists side by side.
#[derive(Debug, Clone)]
pub struct CrossingReport {
    pub dense: CrossingSet,
    /// Absent for `N = 2`, where the doubled bond has no analytic twin.
    pub analytic: Option<CrossingSet>,
    pub factorizing_field: f64,
    pub critical_field: f64,
    /// Largest elementwise difference between the two lists.
    pub max_disagreement: Option<f64>,
    /// False when the lists differ in length or beyond
    /// [`CROSSING_AGREEMENT_TOL`].
    pub agree: bool,
}

/// Locate crossings by both routes and compare them.
pub fn report_crossings(
    n_sites: usize,
    gamma: f64,
    h_range: (f64, f64),
    tol: f64,
) -> Result<CrossingReport> {
    let dense = find_parity_crossings(n_sites, gamma, h_range, DEFAULT_CROSSING_GRID, tol)?;
    let analytic = if n_sites >= 3 {
        Some(analytic_crossings(n_sites, gamma, h_range, tol)?)
    } else {
        None
    };
    let (max_disagreement, agree) = match &analytic {
        Some(a) if a.len() == dense.len() => {
            let max = a
                .fields()
                .iter()
                .zip(dense.fields())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0_f64, f64::max);
            (Some(max), max <= CROSSING_AGREEMENT_TOL.max(2.0 * tol))
        }
        Some(_) => (None, false),
        None => (None, true),
    };
    Ok(CrossingReport {
        dense,
        analytic,
        factorizing_field: factorizing_field(gamma)?,
        critical_field: CRITICAL_FIELD,
        max_disagreement,
        agree,
    })
}

/// One branch of the factorized state checked against the spectrum.
#[derive(Debug, Clone, Copy)]
pub struct BranchCheck {
    pub branch: Branch,
    pub energy: f64,
    pub energy_variance: f64,
    /// Squared overlap with the degenerate lowest-energy manifold at `h_F`.
    pub manifold_overlap: f64,
}

/// Outcome of the exact-factorization check at `h = h_F(γ)`.
#[derive(Debug, Clone)]
pub struct FactorizationReport {
    pub n_sites: usize,
    pub gamma: f64,
    pub factorizing_field: f64,
    pub alpha: f64,
    pub ground_energy: f64,
    pub ground_manifold_dim: usize,
    pub branches: [BranchCheck; 2],
    /// γ ∈ {0, 1} degenerates the construction; reported without pass/fail.
    pub boundary: bool,
    /// `Some(true)` when both branches sit in the ground manifold with
    /// negligible energy variance; `None` on boundary cases.
    pub passed: Option<bool>,
}

/// Build `|Ψ_F^±>` at the factorizing field and measure how exactly they sit
/// in the ground manifold.
pub fn check_factorization(n_sites: usize, gamma: f64) -> Result<FactorizationReport> {
    if !(2..=DENSE_SITE_CAP).contains(&n_sites) {
        return Err(Error::InvalidArgument(format!(
            "n_sites = {n_sites}, need 2..={DENSE_SITE_CAP}"
        )));
    }
    let h_f = factorizing_field(gamma)?;
    let alpha = factorized_state_angle(gamma)?;
    let spec = ChainSpec::new(n_sites, gamma, h_f, 0.0)?;
    let hamiltonian = build_hamiltonian(&spec);
    let decomp = eigh(&hamiltonian)?;
    let ground_energy = decomp.ground_energy();
    let manifold_dim = decomp
        .eigenvalues()
        .iter()
        .take_while(|&&e| e - ground_energy <= DEGENERACY_TOL)
        .count();

    let mut branches = Vec::with_capacity(2);
    for branch in [Branch::Plus, Branch::Minus] {
        let state = factorized_state(n_sites, gamma, branch)?;
        let applied = hamiltonian.apply(&state);
        let energy = state.amplitudes().dotc(&applied).re;
        let energy_variance = applied.norm_squared() - energy * energy;
        let manifold_overlap: f64 = (0..manifold_dim)
            .map(|i| {
                decomp
                    .eigenvectors()
                    .column(i)
                    .dotc(state.amplitudes())
                    .norm_sqr()
            })
            .sum();
        branches.push(BranchCheck {
            branch,
            energy,
            energy_variance,
            manifold_overlap,
        });
    }
    let branches: [BranchCheck; 2] = [branches[0], branches[1]];

    let boundary = gamma == 0.0 || gamma == 1.0;
    let passed = (!boundary).then(|| {
        branches.iter().all(|b| {
            b.energy_variance <= FACTORIZATION_VARIANCE_TOL
                && b.manifold_overlap >= 1.0 - FACTORIZATION_OVERLAP_TOL
        })
    });
    Ok(FactorizationReport {
        n_sites,
        gamma,
        factorizing_field: h_f,
        alpha,
        ground_energy,
        ground_manifold_dim: manifold_dim,
        branches,
        boundary,
        passed,
    })
}

/// Header row of the sweep CSV.
pub const CSV_HEADER: &str = "h,temperature,total_bits,genuine_total_bits,optimal_cut_mask,E0_even,E0_odd,gap,genuine_classical_bits,genuine_quantum_bits";

/// Fixed 12-significant-digit float rendering used by the CSV writer.
/// Identical inputs always give byte-identical text.
pub fn format_numeric(x: f64) -> String {
    // +0.0 normalizes the -0.0 case
    format!("{:.11e}", x + 0.0)
}

struct CsvRow(String);

impl fmt::Display for CsvRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn csv_row(record: &SweepRecord) -> CsvRow {
    let opt = |v: Option<f64>| v.map(format_numeric).unwrap_or_default();
    let row = if record.error.is_some() {
        // flagged point: coordinates only, value fields left empty
        format!(
            "{},{},,,,,,,,",
            format_numeric(record.h),
            format_numeric(record.temperature),
        )
    } else {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            format_numeric(record.h),
            format_numeric(record.temperature),
            format_numeric(record.total_bits),
            format_numeric(record.genuine_total_bits),
            record.optimal_cut_mask,
            format_numeric(record.e0_even),
            format_numeric(record.e0_odd),
            format_numeric(record.gap),
            opt(record.genuine_classical_bits),
            opt(record.genuine_quantum_bits),
        )
    };
    CsvRow(row)
}

/// Write sweep records in the given format (LF line endings throughout).
pub fn write_records<W: Write>(
    records: &[SweepRecord],
    format: OutputFormat,
    out: &mut W,
) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            writeln!(out, "{CSV_HEADER}")?;
            for record in records {
                writeln!(out, "{}", csv_row(record))?;
            }
        }
        OutputFormat::Jsonl => {
            for record in records {
                let line = serde_json::to_string(record)
                    .map_err(|e| Error::Numerical(format!("jsonl encoding: {e}")))?;
                writeln!(out, "{line}")?;
            }
        }
    }
    Ok(())
}
