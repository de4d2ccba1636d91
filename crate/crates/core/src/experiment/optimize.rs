//! One-dimensional maximisation of the key rate over the signal mean.

use serde::Serialize;

pub const MU_MIN: f64 = 1e-4;
pub const MU_MAX: f64 = 1.5;
pub const MU_TOL: f64 = 1e-4;
const GRID_POINTS: usize = 301;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizeResult {
    pub mu_opt: f64,
    pub value: f64,
    /// The objective is non-positive everywhere on the interval.
    pub zero_rate: bool,
    /// The grid scan was not unimodal; `mu_opt` is the grid argmax.
    pub non_unimodal: bool,
    pub evaluations: usize,
}

/// Maximises `objective` on `[MU_MIN, MU_MAX]`.
///
/// A coarse grid locates the peak and tests unimodality; golden-section
/// search then refines inside the bracketing grid cells.
pub fn optimize_mu(objective: impl Fn(f64) -> f64) -> OptimizeResult {
    optimize_on(objective, MU_MIN, MU_MAX, MU_TOL)
}

pub fn optimize_on(objective: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> OptimizeResult {
    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let grid: Vec<(f64, f64)> = (0..GRID_POINTS)
        .map(|k| {
            let mu = lo + step * k as f64;
            (mu, objective(mu))
        })
        .collect();
    let mut evaluations = GRID_POINTS;
    let (k_best, &(mu_grid, v_grid)) = grid
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .expect("grid is non-empty");
    let zero_rate = v_grid <= 0.0;

    if !is_unimodal(&grid) {
        return OptimizeResult {
            mu_opt: mu_grid,
            value: v_grid,
            zero_rate,
            non_unimodal: true,
            evaluations,
        };
    }

    let mut a = grid[k_best.saturating_sub(1)].0;
    let mut b = grid[(k_best + 1).min(GRID_POINTS - 1)].0;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (objective(c), objective(d));
    evaluations += 2;
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
        }
        evaluations += 1;
    }
    let mu = 0.5 * (a + b);
    let value = objective(mu);
    evaluations += 1;
    let (mu_opt, value) = if value >= v_grid { (mu, value) } else { (mu_grid, v_grid) };
    OptimizeResult {
        mu_opt,
        value,
        zero_rate,
        non_unimodal: false,
        evaluations,
    }
}

/// Rises then falls, allowing flat runs. A constant sequence is not
/// unimodal: it has no peak.
fn is_unimodal(grid: &[(f64, f64)]) -> bool {
    let max = grid.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let min = grid.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let eps = 1e-12 * max.abs().max(min.abs()).max(f64::MIN_POSITIVE);
    if max - min <= eps {
        return false;
    }
    let mut falling = false;
    for w in grid.windows(2) {
        let diff = w[1].1 - w[0].1;
        if diff > eps && falling {
            return false;
        }
        if diff < -eps {
            falling = true;
        }
    }
    true
}
