//! The analytic side of the model: N(Z^n) acts on L²(T^n) by multiplication,
//! so a morphism of free modules is a matrix-valued function on the torus and
//! the von Neumann trace is integration against Haar measure.
//!
//! Everything here works on an equispaced tensor grid with uniform weights
//! (the trapezoid rule on T^n). Fibers are independent and are mapped in
//! parallel; outputs are collected in grid order, so results do not depend
//! on the thread count.

mod probe;
mod symbol;

pub use probe::{probe_infimum, sigma_from_top, InfimumProbe};
pub use symbol::{torus_distance_sq, Symbol};

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::laurent::{LaurentMatrix, TorusPoint};

/// Relative singular-value threshold separating algebraic rank drops from rounding.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Equispaced lattice `2πk/N` in each of `num_vars` coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusGrid {
    num_vars: usize,
    points_per_dim: usize,
}

impl TorusGrid {
    pub fn new(num_vars: usize, points_per_dim: usize) -> Result<Self> {
        if num_vars == 0 {
            return Err(Error::Domain("torus grid needs at least one variable".into()));
        }
        if points_per_dim < 2 {
            return Err(Error::Domain(format!("grid needs N >= 2, got {points_per_dim}")));
        }
        let total = (points_per_dim as u128).checked_pow(num_vars as u32);
        if total.is_none_or(|t| t > (1u128 << 32)) {
            return Err(Error::Domain(format!("grid {points_per_dim}^{num_vars} is too large")));
        }
        Ok(Self { num_vars, points_per_dim })
    }

    /// Default resolution: 4096 points for n = 1, 256 per axis for n = 2,
    /// 32 per axis for n = 3, 12 per axis beyond.
    pub fn default_for(num_vars: usize) -> Result<Self> {
        let n = match num_vars {
            1 => 4096,
            2 => 256,
            3 => 32,
            _ => 12,
        };
        Self::new(num_vars, n)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn points_per_dim(&self) -> usize {
        self.points_per_dim
    }

    pub fn spacing(&self) -> f64 {
        TAU / self.points_per_dim as f64
    }

    pub fn len(&self) -> usize {
        self.points_per_dim.pow(self.num_vars as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight of each point; the weights sum to one.
    pub fn weight(&self) -> f64 {
        1.0 / self.len() as f64
    }

    /// Lattice multi-index of a flat index (first coordinate fastest).
    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.num_vars);
        for _ in 0..self.num_vars {
            out.push(idx % self.points_per_dim);
            idx /= self.points_per_dim;
        }
        out
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi.iter().rev().fold(0, |acc, &i| acc * self.points_per_dim + i % self.points_per_dim)
    }

    pub fn angles(&self, idx: usize) -> Vec<f64> {
        let h = self.spacing();
        self.multi_index(idx).into_iter().map(|i| i as f64 * h).collect()
    }

    pub fn point(&self, idx: usize) -> TorusPoint {
        TorusPoint::new(self.angles(idx))
    }

    /// The 2n periodic lattice neighbours of a point.
    pub fn neighbors(&self, idx: usize) -> Vec<usize> {
        let m = self.multi_index(idx);
        let n = self.points_per_dim;
        let mut out = Vec::with_capacity(2 * self.num_vars);
        for k in 0..self.num_vars {
            for step in [1, n - 1] {
                let mut mm = m.clone();
                mm[k] = (mm[k] + step) % n;
                out.push(self.flat_index(&mm));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Index of the grid point nearest to the given angles.
    pub fn nearest_index(&self, angles: &[f64]) -> usize {
        let h = self.spacing();
        let multi: Vec<usize> =
            angles.iter().map(|t| ((t.rem_euclid(TAU) / h).round() as usize) % self.points_per_dim).collect();
        self.flat_index(&multi)
    }
}

/// Where the sampled values came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Laurent,
    ScalarSymbol,
}

/// Values of a matrix function at every grid point.
#[derive(Debug, Clone)]
pub struct SampledMatrix {
    pub grid: TorusGrid,
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<DMatrix<Complex64>>,
    pub provenance: Provenance,
}

/// Evaluates a Laurent matrix on every grid point.
pub fn sample(a: &LaurentMatrix, grid: &TorusGrid) -> Result<SampledMatrix> {
    sample_symbol(&Symbol::Laurent(a.clone()), grid)
}

pub fn sample_symbol(s: &Symbol, grid: &TorusGrid) -> Result<SampledMatrix> {
    if s.num_vars() != grid.num_vars() {
        return Err(Error::DimensionMismatch { expected: grid.num_vars(), found: s.num_vars() });
    }
    let values: Vec<DMatrix<Complex64>> = (0..grid.len()).into_par_iter().map(|i| s.eval(&grid.angles(i))).collect();
    let (rows, cols) = s.shape();
    let provenance = if s.is_laurent() { Provenance::Laurent } else { Provenance::ScalarSymbol };
    Ok(SampledMatrix { grid: *grid, rows, cols, values, provenance })
}

/// Singular values of one fiber in ascending order (`min(rows, cols)` of them).
pub fn fiber_singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Vec::new();
    }
    if r == 1 || c == 1 {
        return vec![m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()];
    }
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(f64::total_cmp);
    sv
}

/// Per-fiber singular values, each ascending.
pub fn singular_values(s: &SampledMatrix) -> Vec<Vec<f64>> {
    s.values.par_iter().map(fiber_singular_values).collect()
}

/// Singular values of a symbol on a grid without keeping the fiber matrices.
pub fn symbol_singular_values(s: &Symbol, grid: &TorusGrid) -> Result<Vec<Vec<f64>>> {
    if s.num_vars() != grid.num_vars() {
        return Err(Error::DimensionMismatch { expected: grid.num_vars(), found: s.num_vars() });
    }
    Ok((0..grid.len()).into_par_iter().map(|i| fiber_singular_values(&s.eval(&grid.angles(i)))).collect())
}

/// Fiberwise ranks of a sampled matrix function.
#[derive(Debug, Clone, PartialEq)]
pub struct RankProfile {
    pub generic_rank: usize,
    pub fiber_ranks: Vec<usize>,
    pub rank_tolerance: f64,
    /// Absolute cut-off actually applied: `rank_tolerance · max(1, largest σ)`.
    pub threshold: f64,
}

impl RankProfile {
    /// Number of fibers whose rank is below the generic rank.
    pub fn degenerate_count(&self) -> usize {
        self.fiber_ranks.iter().filter(|&&r| r < self.generic_rank).count()
    }
}

pub fn rank_profile(s: &SampledMatrix, rank_tol: f64) -> Result<RankProfile> {
    rank_profile_from_sv(&singular_values(s), rank_tol)
}

pub fn rank_profile_from_sv(sv: &[Vec<f64>], rank_tol: f64) -> Result<RankProfile> {
    if !(rank_tol > 0.0) {
        return Err(Error::Domain(format!("rank tolerance must be positive, got {rank_tol}")));
    }
    let largest = sv.iter().flat_map(|v| v.last().copied()).fold(0.0, f64::max);
    let threshold = rank_tol * largest.max(1.0);
    let fiber_ranks: Vec<usize> = sv.iter().map(|v| v.iter().filter(|&&x| x > threshold).count()).collect();
    let generic_rank = fiber_ranks.iter().copied().max().unwrap_or(0);
    Ok(RankProfile { generic_rank, fiber_ranks, rank_tolerance: rank_tol, threshold })
}

/// Generic (a.e.) rank of a symbol on the grid.
pub fn generic_rank(s: &Symbol, grid: &TorusGrid, rank_tol: f64) -> Result<usize> {
    if s.rows() == 0 || s.cols() == 0 {
        return Ok(0);
    }
    Ok(rank_profile_from_sv(&symbol_singular_values(s, grid)?, rank_tol)?.generic_rank)
}

/// von Neumann dimension of the kernel: `cols − generic rank`. For Laurent
/// input the fiber rank is constant off an algebraic null set, so the trace
/// integral is exactly this integer.
pub fn vn_dim_kernel(a: &LaurentMatrix, grid: &TorusGrid, rank_tol: f64) -> Result<f64> {
    let r = generic_rank(&Symbol::Laurent(a.clone()), grid, rank_tol)?;
    Ok((a.cols() - r) as f64)
}

/// von Neumann dimension of the closure of the image.
pub fn vn_dim_image_closure(a: &LaurentMatrix, grid: &TorusGrid, rank_tol: f64) -> Result<f64> {
    Ok(generic_rank(&Symbol::Laurent(a.clone()), grid, rank_tol)? as f64)
}

/// Per-fiber spectrum of a map `C^domain_dim → C^m`, used for density
/// functions. `values[p]` holds the singular values at grid point `p`.
#[derive(Debug, Clone)]
pub struct FiberSpectrum {
    pub grid: TorusGrid,
    pub domain_dim: usize,
    pub values: Vec<Vec<f64>>,
}

impl FiberSpectrum {
    pub fn of_symbol(s: &Symbol, grid: &TorusGrid) -> Result<Self> {
        Ok(Self { grid: *grid, domain_dim: s.cols(), values: symbol_singular_values(s, grid)? })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::LaurentPoly;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn torus2_d1() -> LaurentMatrix {
        LaurentMatrix::from_rows(2, vec![vec![LaurentPoly::var_minus_one(2, 0), LaurentPoly::var_minus_one(2, 1)]])
            .unwrap()
    }

    fn torus2_d2() -> LaurentMatrix {
        LaurentMatrix::from_rows(
            2,
            vec![vec![-&LaurentPoly::var_minus_one(2, 1)], vec![LaurentPoly::var_minus_one(2, 0)]],
        )
        .unwrap()
    }

    #[test]
    fn sample_z_minus_one_on_four_points() {
        let a = LaurentMatrix::scalar(LaurentPoly::var_minus_one(1, 0));
        let s = sample(&a, &TorusGrid::new(1, 4).unwrap()).unwrap();
        let expect = [c(0.0, 0.0), c(-1.0, 1.0), c(-2.0, 0.0), c(-1.0, -1.0)];
        for (v, e) in s.values.iter().zip(expect) {
            assert!((v[(0, 0)] - e).norm() < 1e-15);
        }
        assert_eq!(s.provenance, Provenance::Laurent);
    }

    #[test]
    fn identity_samples_to_identity() {
        let s = sample(&LaurentMatrix::identity(1, 2), &TorusGrid::new(1, 8).unwrap()).unwrap();
        assert!(s.values.iter().all(|m| *m == DMatrix::identity(2, 2)));
    }

    #[test]
    fn torus_row_samples_and_norm() {
        let grid = TorusGrid::new(2, 8).unwrap();
        let s = sample(&torus2_d1(), &grid).unwrap();
        assert_eq!(s.values.len(), 64);
        let sv = singular_values(&s);
        for (i, v) in sv.iter().enumerate() {
            let t = grid.angles(i);
            let direct = ((2.0 - 2.0 * t[0].cos()) + (2.0 - 2.0 * t[1].cos())).sqrt();
            assert_eq!(v.len(), 1);
            assert!((v[0] - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_values_of_scalars() {
        assert_eq!(fiber_singular_values(&DMatrix::from_element(1, 1, c(2.0, 0.0))), vec![2.0]);
        let a = LaurentMatrix::scalar(LaurentPoly::var_minus_one(1, 0));
        let v = a.eval_matrix(&TorusPoint::new(vec![PI])).unwrap();
        assert!((fiber_singular_values(&v)[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rank_profiles() {
        let a = LaurentMatrix::scalar(LaurentPoly::var_minus_one(1, 0));
        let p = rank_profile(&sample(&a, &TorusGrid::new(1, 4).unwrap()).unwrap(), 1e-8).unwrap();
        assert_eq!(p.fiber_ranks, vec![0, 1, 1, 1]);
        assert_eq!(p.generic_rank, 1);

        let z = LaurentMatrix::zeros(1, 2, 3);
        let p = rank_profile(&sample(&z, &TorusGrid::new(1, 4).unwrap()).unwrap(), 1e-8).unwrap();
        assert_eq!(p.generic_rank, 0);

        let grid = TorusGrid::new(2, 8).unwrap();
        let p = rank_profile(&sample(&torus2_d2(), &grid).unwrap(), 1e-8).unwrap();
        assert_eq!(p.generic_rank, 1);
        let dropped: Vec<usize> = (0..grid.len()).filter(|&i| p.fiber_ranks[i] == 0).collect();
        assert_eq!(dropped, vec![grid.flat_index(&[0, 0])]);
    }

    #[test]
    fn rank_tolerance_must_be_positive() {
        assert!(rank_profile_from_sv(&[vec![1.0]], 0.0).is_err());
    }

    #[test]
    fn von_neumann_dimensions() {
        let grid1 = TorusGrid::new(1, 64).unwrap();
        let zm1 = LaurentMatrix::scalar(LaurentPoly::var_minus_one(1, 0));
        assert_eq!(vn_dim_kernel(&zm1, &grid1, 1e-8).unwrap(), 0.0);
        assert_eq!(vn_dim_image_closure(&zm1, &grid1, 1e-8).unwrap(), 1.0);
        assert_eq!(vn_dim_kernel(&LaurentMatrix::zeros(1, 1, 1), &grid1, 1e-8).unwrap(), 1.0);
        assert_eq!(vn_dim_image_closure(&LaurentMatrix::identity(1, 3), &grid1, 1e-8).unwrap(), 3.0);

        let grid2 = TorusGrid::new(2, 16).unwrap();
        assert_eq!(vn_dim_kernel(&torus2_d2(), &grid2, 1e-8).unwrap(), 0.0);
        assert_eq!(vn_dim_image_closure(&torus2_d1(), &grid2, 1e-8).unwrap(), 1.0);
    }

    #[test]
    fn kernel_dimension_is_grid_independent() {
        let a = LaurentMatrix::block_diag(&[&torus2_d1(), &LaurentMatrix::zeros(2, 1, 2)]).unwrap();
        for n in [4, 8, 16] {
            let grid = TorusGrid::new(2, n).unwrap();
            assert_eq!(vn_dim_kernel(&a, &grid, 1e-8).unwrap(), 3.0, "N = {n}");
        }
    }

    #[test]
    fn grid_neighbors_wrap() {
        let g = TorusGrid::new(2, 4).unwrap();
        let n = g.neighbors(0);
        assert_eq!(n.len(), 4);
        assert!(n.contains(&g.flat_index(&[3, 0])));
        assert!(n.contains(&g.flat_index(&[0, 3])));
        assert_eq!(g.nearest_index(&[TAU - 0.01, 0.0]), 0);
        assert!(TorusGrid::new(1, 1).is_err());
    }
}
