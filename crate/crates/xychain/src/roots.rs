//! Grid scan plus bisection refinement for sign changes of a scalar function.

use rayon::prelude::*;

use crate::Result;

/// Outcome of [`scan_sign_changes`]: refined zero locations plus any grid
/// points where the function touched zero without changing sign.
pub(crate) struct SignChangeScan {
    pub zeros: Vec<f64>,
    pub tangencies: Vec<f64>,
}

/// Scan `f` on a uniform grid over `range` and bisect every sign change down
/// to `bisection_tol`.
///
/// Grid values with `|f| < zero_tol` are treated as exact zeros. A zero run
/// at the lower range endpoint is a zero (the degeneracy sits at the start
/// of the scan); an interior run is a zero when the signs on its two sides
/// differ and a tangency when they agree; a run ending at the upper endpoint
/// is a tangency, since no sign change can be confirmed beyond the range.
pub(crate) fn scan_sign_changes<F>(
    f: &F,
    range: (f64, f64),
    grid_points: usize,
    bisection_tol: f64,
    zero_tol: f64,
) -> Result<SignChangeScan>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let (lo, hi) = range;
    let step = (hi - lo) / (grid_points - 1) as f64;
    let grid: Vec<f64> = (0..grid_points).map(|i| lo + i as f64 * step).collect();
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&h| f(h))
        .collect::<Result<Vec<f64>>>()?;

    let sign = |v: f64| -> i8 {
        if v.abs() < zero_tol {
            0
        } else if v > 0.0 {
            1
        } else {
            -1
        }
    };
    let signs: Vec<i8> = values.iter().map(|&v| sign(v)).collect();

    let mut zeros = Vec::new();
    let mut tangencies = Vec::new();
    let mut i = 0;
    while i < grid_points {
        if signs[i] == 0 {
            let start = i;
            while i < grid_points && signs[i] == 0 {
                i += 1;
            }
            let end = i; // run covers [start, end)
            let mid = 0.5 * (grid[start] + grid[end - 1]);
            let left = if start > 0 {
                Some(signs[start - 1])
            } else {
                None
            };
            let right = if end < grid_points {
                Some(signs[end])
            } else {
                None
            };
            match (left, right) {
                (None, _) => zeros.push(grid[start]),
                (_, None) => tangencies.push(grid[end - 1]),
                (Some(l), Some(r)) if l != r => zeros.push(mid),
                _ => tangencies.push(mid),
            }
        } else {
            if i + 1 < grid_points && signs[i + 1] != 0 && signs[i + 1] != signs[i] {
                zeros.push(bisect(f, grid[i], grid[i + 1], values[i], bisection_tol)?);
            }
            i += 1;
        }
    }
    Ok(SignChangeScan { zeros, tangencies })
}

fn bisect<F>(f: &F, mut lo: f64, mut hi: f64, mut f_lo: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
