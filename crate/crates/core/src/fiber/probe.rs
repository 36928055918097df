use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::{fiber_singular_values, TorusGrid};

/// Estimate of `inf_z g(z)` for a continuous (or piecewise continuous)
/// non-negative function on the torus.
#[derive(Debug, Clone)]
pub struct InfimumProbe {
    pub grid_min: f64,
    pub grid_argmin: usize,
    /// Local minima after continuous refinement, ascending by value.
    pub refined: Vec<(Vec<f64>, f64)>,
    pub infimum: f64,
}

impl InfimumProbe {
    pub fn argmin(&self) -> Option<&[f64]> {
        self.refined.first().map(|(p, _)| p.as_slice())
    }
}

/// `k`-th largest singular value (1-based); zero when the matrix has fewer
/// than `k` singular values. `k = 0` yields `+∞`.
pub fn sigma_from_top(m: &DMatrix<Complex64>, k: usize) -> f64 {
    if k == 0 {
        return f64::INFINITY;
    }
    let sv = fiber_singular_values(m);
    if sv.len() < k {
        return 0.0;
    }
    sv[sv.len() - k]
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Samples `g` on the grid, then polishes the `starts` smallest lattice-local
/// minima by coordinate-wise golden-section search inside the surrounding
/// cell. Zeros that fall between lattice points are found to near machine
/// precision in the angle, which is what makes uniform-bound decisions
/// independent of whether a degeneracy point happens to lie on the grid.
pub fn probe_infimum<F>(grid: &TorusGrid, g: F, starts: usize) -> InfimumProbe
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let values: Vec<f64> = (0..grid.len()).into_par_iter().map(|i| g(&grid.angles(i))).collect();
    let (grid_argmin, grid_min) =
        values.iter().copied().enumerate().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap_or((0, f64::INFINITY));

    let mut local: Vec<usize> =
        (0..grid.len()).filter(|&i| grid.neighbors(i).iter().all(|&j| values[i] <= values[j])).collect();
    local.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    local.truncate(starts.max(1));

    let h = grid.spacing();
    let mut refined: Vec<(Vec<f64>, f64)> =
        local.par_iter().map(|&i| refine(&g, grid.angles(i), values[i], h)).collect();
    refined.sort_by(|a, b| a.1.total_cmp(&b.1));
    let infimum = refined.first().map_or(grid_min, |r| r.1.min(grid_min));
    InfimumProbe { grid_min, grid_argmin, refined, infimum }
}

fn refine<F: Fn(&[f64]) -> f64>(g: &F, mut x: Vec<f64>, mut fx: f64, h: f64) -> (Vec<f64>, f64) {
    let n = x.len();
    let mut width = h;
    for _sweep in 0..3 {
        for k in 0..n {
            let centre = x[k];
            let (mut a, mut b) = (centre - width, centre + width);
            let eval = |t: f64, x: &Vec<f64>| {
                let mut y = x.clone();
                y[k] = t;
                g(&y)
            };
            let mut c = b - GOLDEN * (b - a);
            let mut d = a + GOLDEN * (b - a);
            let (mut fc, mut fd) = (eval(c, &x), eval(d, &x));
            for _ in 0..120 {
                if (b - a).abs() <= 1e-17 * (1.0 + centre.abs()) {
                    break;
                }
                if fc <= fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - GOLDEN * (b - a);
                    fc = eval(c, &x);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + GOLDEN * (b - a);
                    fd = eval(d, &x);
                }
            }
            // endpoints matter when the minimum sits on the cell boundary
            for (t, ft) in [(c, fc), (d, fd), (a, eval(a, &x)), (b, eval(b, &x))] {
                if ft < fx {
                    fx = ft;
                    x[k] = t;
                }
            }
        }
        width *= 0.5;
    }
    (x, fx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_off_grid_zero() {
        let grid = TorusGrid::new(1, 64).unwrap();
        let z0 = 2.0 * std::f64::consts::PI / 3.0;
        let p = probe_infimum(&grid, |t| (t[0] - z0).abs().sqrt(), 4);
        assert!(p.grid_min > 1e-2);
        assert!(p.infimum < 1e-7, "refined {}", p.infimum);
        assert!((p.argmin().unwrap()[0] - z0).abs() < 1e-12);
    }

    #[test]
    fn bounded_below_stays_bounded() {
        let grid = TorusGrid::new(2, 16).unwrap();
        let p = probe_infimum(&grid, |t| 1.5 + t[0].cos() * t[1].sin() * 0.5, 8);
        assert!((p.infimum - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sigma_from_top_conventions() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(3.0, 0.0),
            Complex64::new(1.0, 0.0),
        ]));
        assert_eq!(sigma_from_top(&m, 1), 3.0);
        assert_eq!(sigma_from_top(&m, 2), 1.0);
        assert_eq!(sigma_from_top(&m, 3), 0.0);
        assert!(sigma_from_top(&m, 0).is_infinite());
    }
}
