//! Free chain complexes over the Laurent ring and their extended homology.
//!
//! The projective part of `H_i` is reduced L² homology, whose dimension is
//! `dim Z_i − rank ∂_{i+1}`. The torsion part is the torsion of the module
//! `(∂_{i+1}: C_{i+1} → C_i)`, so its density comes straight from the
//! singular values of `∂_{i+1}`. Cohomology is homology of [`dual_complex`].

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::ecat::{small_left_singular_basis, EcatMorphism};
use crate::error::{Error, Result};
use crate::fiber::{fiber_singular_values, generic_rank, rank_profile_from_sv, FiberSpectrum, Symbol, TorusGrid};
use crate::laurent::LaurentMatrix;
use crate::settings::Settings;
use crate::spectral::{density_from_spectrum, ns_estimate, NSFit, SpectralDensity};

/// Largest coefficient allowed in `∂_i ∘ ∂_{i+1}`.
pub const CHAIN_TOL: f64 = 1e-9;

/// `0 → C_top → … → C_1 → C_0 → 0` with `∂_i: C_i → C_{i−1}` a Laurent matrix
/// of shape `ranks[i−1] × ranks[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeChainComplex {
    num_vars: usize,
    ranks: Vec<usize>,
    /// `boundaries[i − 1] = ∂_i`.
    boundaries: Vec<LaurentMatrix>,
    /// Dimension of the closed orientable manifold this complex comes from, if any.
    manifold_dim: Option<usize>,
}

impl FreeChainComplex {
    /// Builds a complex from `∂_1, …, ∂_top`; shapes must chain.
    pub fn new(num_vars: usize, ranks: Vec<usize>, boundaries: Vec<LaurentMatrix>) -> Result<Self> {
        if ranks.is_empty() {
            return Err(Error::Domain("a chain complex needs at least one degree".into()));
        }
        if boundaries.len() != ranks.len() - 1 {
            return Err(Error::Domain(format!(
                "{} degrees need {} boundaries, got {}",
                ranks.len(),
                ranks.len() - 1,
                boundaries.len()
            )));
        }
        for (i, d) in boundaries.iter().enumerate() {
            if d.num_vars() != num_vars {
                return Err(Error::DimensionMismatch { expected: num_vars, found: d.num_vars() });
            }
            let want = (ranks[i], ranks[i + 1]);
            if d.shape() != want {
                return Err(Error::ShapeMismatch { op: "boundary", lhs: want, rhs: d.shape() });
            }
        }
        Ok(Self { num_vars, ranks, boundaries, manifold_dim: None })
    }

    /// Marks the complex as coming from a closed orientable manifold of the
    /// given dimension, which enables [`poincare_check`].
    pub fn with_manifold_dim(mut self, n: usize) -> Self {
        self.manifold_dim = Some(n);
        self
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn top(&self) -> usize {
        self.ranks.len() - 1
    }

    pub fn manifold_dim(&self) -> Option<usize> {
        self.manifold_dim
    }

    pub fn rank(&self, i: usize) -> usize {
        self.ranks.get(i).copied().unwrap_or(0)
    }

    /// `∂_i`, with the zero maps `∂_0` and `∂_{top+1}` filled in.
    pub fn boundary(&self, i: usize) -> LaurentMatrix {
        if i >= 1 && i <= self.top() {
            self.boundaries[i - 1].clone()
        } else {
            let rows = if i == 0 { 0 } else { self.rank(i - 1) };
            LaurentMatrix::zeros(self.num_vars, rows, self.rank(i))
        }
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.ranks.iter().enumerate().map(|(i, &r)| if i % 2 == 0 { r as i64 } else { -(r as i64) }).sum()
    }

    /// Entrywise involution `z ↦ z⁻¹` with conjugated coefficients, no transpose:
    /// the complex with coefficients in the conjugate bimodule.
    pub fn bar(&self) -> Self {
        Self { boundaries: self.boundaries.iter().map(LaurentMatrix::bar).collect(), ..self.clone() }
    }

    fn check_degree(&self, i: usize) -> Result<()> {
        if i > self.top() {
            return Err(Error::DegreeOutOfRange { degree: i, top: self.top() });
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let boundaries: Vec<Value> = self
            .boundaries
            .iter()
            .enumerate()
            .map(|(i, d)| json!({ "degree": i + 1, "matrix": d.to_json() }))
            .collect();
        let mut v = json!({ "num_vars": self.num_vars, "ranks": self.ranks, "boundaries": boundaries });
        if let Some(n) = self.manifold_dim {
            v["manifold_dim"] = json!(n);
        }
        v
    }

    /// Reads the JSON form; degrees without an entry get zero boundaries.
    pub fn from_json(v: &Value) -> Result<Self> {
        let num_vars = v
            .get("num_vars")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Parse("field `num_vars` must be a positive integer".into()))?
            as usize;
        let ranks: Vec<usize> = serde_json::from_value(
            v.get("ranks").cloned().ok_or_else(|| Error::Parse("missing field `ranks`".into()))?,
        )?;
        if ranks.is_empty() {
            return Err(Error::Parse("`ranks` must not be empty".into()));
        }
        let top = ranks.len() - 1;
        let mut boundaries: Vec<Option<LaurentMatrix>> = vec![None; top];
        let list = match v.get("boundaries") {
            None => Vec::new(),
            Some(b) => b.as_array().cloned().ok_or_else(|| Error::Parse("`boundaries` must be an array".into()))?,
        };
        for b in list {
            let degree = b
                .get("degree")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Parse("boundary entry needs an integer `degree`".into()))?
                as usize;
            if degree == 0 || degree > top {
                return Err(Error::Parse(format!("boundary degree {degree} outside 1..={top}")));
            }
            let m = LaurentMatrix::from_json(
                b.get("matrix").ok_or_else(|| Error::Parse("boundary entry needs a `matrix`".into()))?,
            )?;
            if boundaries[degree - 1].replace(m).is_some() {
                return Err(Error::Parse(format!("duplicate boundary for degree {degree}")));
            }
        }
        let boundaries = boundaries
            .into_iter()
            .enumerate()
            .map(|(i, m)| m.unwrap_or_else(|| LaurentMatrix::zeros(num_vars, ranks[i], ranks[i + 1])))
            .collect();
        let c = Self::new(num_vars, ranks, boundaries).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(match v.get("manifold_dim").and_then(Value::as_u64) {
            Some(n) => c.with_manifold_dim(n as usize),
            None => c,
        })
    }
}

/// Outcome of the chain-condition check.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainReport {
    /// First degree `i` with `∂_i ∘ ∂_{i+1} ≠ 0`.
    pub first_violation: Option<usize>,
    pub max_residual: f64,
}

impl ChainReport {
    pub fn is_ok(&self) -> bool {
        self.first_violation.is_none()
    }

    pub fn into_result(self) -> Result<()> {
        match self.first_violation {
            Some(degree) => Err(Error::ChainCondition { degree, residual: self.max_residual }),
            None => Ok(()),
        }
    }
}

/// Checks `∂_i ∘ ∂_{i+1} = 0` symbolically for every degree.
pub fn validate(c: &FreeChainComplex) -> ChainReport {
    let mut report = ChainReport { first_violation: None, max_residual: 0.0 };
    for i in 1..c.top() {
        let prod = c.boundaries[i - 1].matmul(&c.boundaries[i]).expect("shapes chain by construction");
        let r = prod.max_abs_coeff();
        if r >= CHAIN_TOL && report.first_violation.is_none() {
            report.first_violation = Some(i);
        }
        report.max_residual = report.max_residual.max(r);
    }
    report
}

/// Extended homology in one degree.
#[derive(Debug, Clone)]
pub struct HomologyEntry {
    pub degree: usize,
    /// Dimension of the projective part (reduced L² Betti number).
    pub betti: f64,
    /// `dim Z_i = rank C_i − rank ∂_i`.
    pub cycles_rank: usize,
    /// `rank ∂_{i+1}`.
    pub boundaries_rank: usize,
    pub torsion_density: SpectralDensity,
    /// `None` when the fit failed; `fit_note` says why.
    pub ns_fit: Option<NSFit>,
    pub fit_note: Option<String>,
}

impl HomologyEntry {
    pub fn torsion_is_trivial(&self) -> bool {
        self.torsion_density.is_zero()
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "degree": self.degree,
            "betti": self.betti,
            "cycles_rank": self.cycles_rank,
            "boundaries_rank": self.boundaries_rank,
            "torsion_trivial": self.torsion_is_trivial(),
        });
        match &self.ns_fit {
            Some(fit) => v["ns_fit"] = fit.to_json(),
            None => v["ns_fit"] = Value::Null,
        }
        if let Some(note) = &self.fit_note {
            v["fit_note"] = json!(note);
        }
        v
    }
}

/// Per-degree homology of a complex.
#[derive(Debug, Clone)]
pub struct HomologyReport {
    pub entries: Vec<HomologyEntry>,
}

impl HomologyReport {
    pub fn bettis(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.betti).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({ "degrees": self.entries.iter().map(HomologyEntry::to_json).collect::<Vec<_>>() })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("degree,betti,cycles_rank,boundaries_rank,ns,capacity\n");
        for e in &self.entries {
            let (ns, cap) = match &e.ns_fit {
                Some(f) => (fmt_real(f.ns), fmt_real(f.capacity)),
                None => (String::new(), String::new()),
            };
            s.push_str(&format!("{},{},{},{},{ns},{cap}\n", e.degree, e.betti, e.cycles_rank, e.boundaries_rank));
        }
        s
    }
}

fn fmt_real(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x}")
    }
}

fn laurent_rank(m: &LaurentMatrix, grid: &TorusGrid, tol: f64) -> Result<usize> {
    generic_rank(&Symbol::Laurent(m.clone()), grid, tol)
}

/// Density of the torsion module `(∂: C_{i+1} → C_i)`.
pub fn boundary_density(d: &LaurentMatrix, grid: &TorusGrid, settings: &Settings) -> Result<SpectralDensity> {
    let spectrum = FiberSpectrum::of_symbol(&Symbol::Laurent(d.clone()), grid)?;
    density_from_spectrum(&spectrum, &settings.lambdas(), settings.rank_tol)
}

/// Extended homology of `c` in degree `i`.
pub fn homology(c: &FreeChainComplex, i: usize, settings: &Settings) -> Result<HomologyEntry> {
    c.check_degree(i)?;
    validate(c).into_result()?;
    let grid = settings.grid(c.num_vars())?;
    let (d_i, d_next) = (c.boundary(i), c.boundary(i + 1));
    let cycles_rank = c.rank(i) - laurent_rank(&d_i, &grid, settings.rank_tol)?;
    let boundaries_rank = laurent_rank(&d_next, &grid, settings.rank_tol)?;
    let torsion_density = boundary_density(&d_next, &grid, settings)?;
    let (ns_fit, fit_note) = match ns_estimate(&torsion_density, settings.fit_window) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(HomologyEntry {
        degree: i,
        betti: cycles_rank
            .checked_sub(boundaries_rank)
            .ok_or(Error::ChainCondition { degree: i, residual: f64::NAN })? as f64,
        cycles_rank,
        boundaries_rank,
        torsion_density,
        ns_fit,
        fit_note,
    })
}

pub fn homology_report(c: &FreeChainComplex, settings: &Settings) -> Result<HomologyReport> {
    let entries = (0..=c.top()).map(|i| homology(c, i, settings)).collect::<Result<_>>()?;
    Ok(HomologyReport { entries })
}

/// The dual complex `D_j = C^{top − j}` with `∂^D_j = (∂_{top − j + 1})*`.
/// Degree `j` of the dual carries cohomology in degree `top − j`.
pub fn dual_complex(c: &FreeChainComplex) -> FreeChainComplex {
    let top = c.top();
    let ranks: Vec<usize> = c.ranks.iter().rev().copied().collect();
    let boundaries = (1..=top).map(|j| c.boundaries[top - j].adjoint()).collect();
    FreeChainComplex { num_vars: c.num_vars, ranks, boundaries, manifold_dim: c.manifold_dim }
}

/// Extended cohomology `H^i` as homology of the dual complex.
pub fn cohomology(c: &FreeChainComplex, i: usize, settings: &Settings) -> Result<HomologyEntry> {
    c.check_degree(i)?;
    let mut e = homology(&dual_complex(c), c.top() - i, settings)?;
    e.degree = i;
    Ok(e)
}

/// Absolute tolerance for comparing two sampled densities, and whether the
/// grid is coarse enough that the tolerance had to be relaxed.
pub fn density_tolerance(grid: &TorusGrid) -> (f64, bool) {
    let base: f64 = if grid.num_vars() == 1 { 1e-4 } else { 1e-3 };
    let n = grid.points_per_dim();
    if n < 16 {
        (base.max(4.0 / n as f64), true)
    } else {
        (base, false)
    }
}

/// One degree of a duality comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct DualityDegree {
    pub degree: usize,
    pub betti_lhs: f64,
    pub betti_rhs: f64,
    /// `max_λ |F_lhs − F_rhs|` of the paired torsion densities.
    pub density_diff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualityReport {
    pub degrees: Vec<DualityDegree>,
    pub tolerance: f64,
    pub coarse: bool,
}

impl DualityReport {
    pub fn passed(&self) -> bool {
        self.degrees.iter().all(|d| d.betti_lhs == d.betti_rhs && d.density_diff <= self.tolerance)
    }

    pub fn max_density_diff(&self) -> f64 {
        self.degrees.iter().map(|d| d.density_diff).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "passed": self.passed(),
            "tolerance": self.tolerance,
            "coarse": self.coarse,
            "degrees": self.degrees.iter().map(|d| json!({
                "degree": d.degree,
                "betti_lhs": d.betti_lhs,
                "betti_rhs": d.betti_rhs,
                "density_diff": d.density_diff,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Universal coefficients at the level of invariants: `betti(H^i) = betti(H_i)`
/// and the torsion density of `H^i` equals that of `H_{i−1}`.
pub fn universal_coefficients_check(c: &FreeChainComplex, settings: &Settings) -> Result<DualityReport> {
    validate(c).into_result()?;
    let grid = settings.grid(c.num_vars())?;
    let (tolerance, coarse) = density_tolerance(&grid);
    let dual = dual_complex(c);
    let top = c.top();
    let mut degrees = Vec::with_capacity(top + 1);
    for i in 0..=top {
        let hom = homology(c, i, settings)?;
        let coh = homology(&dual, top - i, settings)?;
        let lower = if i == 0 {
            boundary_density(&LaurentMatrix::zeros(c.num_vars(), c.rank(0), 0), &grid, settings)?
        } else {
            homology(c, i - 1, settings)?.torsion_density
        };
        degrees.push(DualityDegree {
            degree: i,
            betti_lhs: hom.betti,
            betti_rhs: coh.betti,
            density_diff: coh.torsion_density.max_abs_diff(&lower)?,
        });
    }
    Ok(DualityReport { degrees, tolerance, coarse })
}

/// Poincaré duality for a closed orientable manifold complex of dimension
/// `n`: `betti_i(C) = betti_{n−i}(C̄)` and the torsion of `H_i(C)` matches
/// that of `H_{n−i−1}(C̄)` (densities are invariant under torsion duality).
pub fn poincare_check(c: &FreeChainComplex, settings: &Settings) -> Result<DualityReport> {
    let n =
        c.manifold_dim.ok_or_else(|| Error::Domain("complex is not flagged as a closed orientable manifold".into()))?;
    if n != c.top() {
        return Err(Error::Domain(format!("manifold dimension {n} differs from top degree {}", c.top())));
    }
    validate(c).into_result()?;
    let grid = settings.grid(c.num_vars())?;
    let (tolerance, coarse) = density_tolerance(&grid);
    let cbar = c.bar();
    let mut degrees = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let lhs = homology(c, i, settings)?;
        let rhs = homology(&cbar, n - i, settings)?;
        let density_diff = if i < n {
            let other = homology(&cbar, n - i - 1, settings)?.torsion_density;
            lhs.torsion_density.max_abs_diff(&other)?
        } else {
            // nothing in degree n carries torsion
            lhs.torsion_density.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
        };
        degrees.push(DualityDegree { degree: i, betti_lhs: lhs.betti, betti_rhs: rhs.betti, density_diff });
    }
    Ok(DualityReport { degrees, tolerance, coarse })
}

/// Dimension comparison for an exact sequence `X′ → X → X″`: the middle
/// homology of the projective parts against the cokernel `H` of
/// `T(X) → T(X″)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveExactnessReport {
    /// Projective dimensions of `X′, X, X″`.
    pub projective_dims: [usize; 3],
    /// `dim ker(P(X) → P(X″)) − rank(P(X′) → P(X))`.
    pub middle_homology_dim: f64,
    /// Projective dimension of `H`.
    pub h_dim: f64,
}

impl ProjectiveExactnessReport {
    pub fn passed(&self) -> bool {
        self.middle_homology_dim == self.h_dim
    }
}

/// Compares the two sides fiberwise; the projective part of a module at
/// `z` is the orthogonal complement of `im α(z)`.
pub fn projective_parts_weak_exactness_check(
    first: &EcatMorphism,
    second: &EcatMorphism,
    settings: &Settings,
) -> Result<ProjectiveExactnessReport> {
    let nv = first.source.num_vars();
    if second.source.num_vars() != nv {
        return Err(Error::DimensionMismatch { expected: nv, found: second.source.num_vars() });
    }
    if first.target.alpha() != second.source.alpha() {
        return Err(Error::Domain("morphisms do not compose: middle modules differ".into()));
    }
    let grid = settings.grid(nv)?;
    let tol = settings.rank_tol;
    let (x1, x, x2) = (&first.source, &first.target, &second.target);
    let proj_dim =
        |m: &crate::ecat::VirtualModule| -> Result<usize> { Ok(m.rank_dst() - generic_rank(m.alpha(), &grid, tol)?) };
    let dims = [proj_dim(x1)?, proj_dim(x)?, proj_dim(x2)?];

    // induced maps on the projective parts, fiber by fiber
    let induced = |f: &Symbol,
                   from: &crate::ecat::VirtualModule,
                   to: &crate::ecat::VirtualModule,
                   d_from: usize,
                   d_to: usize,
                   t: &[f64]| {
        let u_from = small_left_singular_basis(&from.alpha().eval(t), d_from);
        let u_to = small_left_singular_basis(&to.alpha().eval(t), d_to);
        u_to.adjoint() * f.eval(t) * u_from
    };
    let rank_of = |build: &(dyn Fn(&[f64]) -> DMatrix<Complex64> + Sync)| -> Result<usize> {
        let sv: Vec<Vec<f64>> =
            (0..grid.len()).into_par_iter().map(|i| fiber_singular_values(&build(&grid.angles(i)))).collect();
        Ok(rank_profile_from_sv(&sv, tol)?.generic_rank)
    };
    let rank_p1 = rank_of(&|t| induced(&first.f, x1, x, dims[0], dims[1], t))?;
    let rank_p2 = rank_of(&|t| induced(&second.f, x, x2, dims[1], dims[2], t))?;
    let middle_homology_dim = (dims[1] - rank_p2) as f64 - rank_p1 as f64;

    // H = coker(T(X) → T(X″)) has projective dimension rank α″ − rank[α″ | f₂ Π_{im α}]
    let alpha2_rank = generic_rank(x2.alpha(), &grid, tol)?;
    let d_x = dims[1];
    let joint_rank = rank_of(&|t| {
        let a = x.alpha().eval(t);
        let u = small_left_singular_basis(&a, d_x);
        let proj_im = DMatrix::identity(a.nrows(), a.nrows()) - &u * u.adjoint();
        let a2 = x2.alpha().eval(t);
        let pushed = second.f.eval(t) * proj_im;
        let mut m = DMatrix::zeros(a2.nrows(), a2.ncols() + pushed.ncols());
        m.view_mut((0, 0), a2.shape()).copy_from(&a2);
        m.view_mut((0, a2.ncols()), pushed.shape()).copy_from(&pushed);
        m
    })?;
    let h_dim = joint_rank as f64 - alpha2_rank as f64;
    Ok(ProjectiveExactnessReport { projective_dims: dims, middle_homology_dim, h_dim })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecat::VirtualModule;
    use crate::laurent::LaurentPoly;
    use crate::spectral::closed_form_density;

    fn circle() -> FreeChainComplex {
        FreeChainComplex::new(1, vec![1, 1], vec![LaurentMatrix::scalar(LaurentPoly::var_minus_one(1, 0))])
            .unwrap()
            .with_manifold_dim(1)
    }

    fn torus2() -> FreeChainComplex {
        let (a, b) = (LaurentPoly::var_minus_one(2, 0), LaurentPoly::var_minus_one(2, 1));
        let d1 = LaurentMatrix::from_rows(2, vec![vec![a.clone(), b.clone()]]).unwrap();
        let d2 = LaurentMatrix::from_rows(2, vec![vec![-&b], vec![a]]).unwrap();
        FreeChainComplex::new(2, vec![1, 2, 1], vec![d1, d2]).unwrap().with_manifold_dim(2)
    }

    #[test]
    fn validate_examples() {
        assert!(validate(&circle()).is_ok());
        assert!(validate(&torus2()).is_ok());
        let one = LaurentMatrix::identity(1, 1);
        let bad = FreeChainComplex::new(1, vec![1, 1, 1], vec![one.clone(), one]).unwrap();
        let r = validate(&bad);
        assert_eq!(r.first_violation, Some(1));
        assert!(matches!(r.into_result(), Err(Error::ChainCondition { degree: 1, .. })));
        assert!(homology(&bad, 0, &Settings::with_points(8)).is_err());
    }

    #[test]
    fn shapes_are_checked() {
        let d = LaurentMatrix::zeros(1, 2, 1);
        assert!(FreeChainComplex::new(1, vec![1, 1], vec![d]).is_err());
        assert!(FreeChainComplex::new(1, vec![1, 1], vec![]).is_err());
    }

    #[test]
    fn circle_homology() {
        let s = Settings::with_points(4096);
        let r = homology_report(&circle(), &s).unwrap();
        assert_eq!(r.bettis(), vec![0.0, 0.0]);
        let f = &r.entries[0].torsion_density;
        let err = f
            .lambdas
            .iter()
            .zip(&f.values)
            .map(|(&l, &v)| (v - closed_form_density(1.0, l).unwrap()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-3, "{err}");
        assert!(r.entries[1].torsion_is_trivial());
        assert!(matches!(homology(&circle(), 2, &s), Err(Error::DegreeOutOfRange { degree: 2, top: 1 })));
    }

    #[test]
    fn torus_homology_and_euler() {
        let s = Settings::with_points(64);
        let c = torus2();
        let r = homology_report(&c, &s).unwrap();
        assert_eq!(r.bettis(), vec![0.0, 0.0, 0.0]);
        assert_eq!(c.euler_characteristic(), 0);
        let chi: f64 = r.bettis().iter().enumerate().map(|(i, b)| if i % 2 == 0 { *b } else { -b }).sum();
        assert_eq!(chi, c.euler_characteristic() as f64);
        assert!(r.entries[2].torsion_is_trivial());
    }

    #[test]
    fn zero_boundaries_give_ranks() {
        let c = FreeChainComplex::new(1, vec![2, 3], vec![LaurentMatrix::zeros(1, 2, 3)]).unwrap();
        let s = Settings::with_points(16);
        let r = homology_report(&c, &s).unwrap();
        assert_eq!(r.bettis(), vec![2.0, 3.0]);
        assert!(r.entries.iter().all(HomologyEntry::torsion_is_trivial));
        let u = universal_coefficients_check(&c, &s).unwrap();
        assert!(u.passed());
        assert_eq!(dual_complex(&c).ranks(), &[3, 2]);
    }

    #[test]
    fn dual_examples() {
        let d = dual_complex(&circle());
        let expect =
            LaurentMatrix::scalar(&LaurentPoly::monomial(vec![-1], Complex64::new(1.0, 0.0)) - &LaurentPoly::one(1));
        assert_eq!(d.boundary(1), expect);
        assert_eq!(dual_complex(&dual_complex(&torus2())), torus2());
    }

    #[test]
    fn universal_coefficients() {
        let r = universal_coefficients_check(&circle(), &Settings::with_points(4096)).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.degrees[1].density_diff < 1e-6);
        let r = universal_coefficients_check(&torus2(), &Settings::with_points(64)).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn poincare() {
        let r = poincare_check(&torus2(), &Settings::with_points(64)).unwrap();
        assert!(r.passed(), "{r:?}");
        let r = poincare_check(&circle(), &Settings::with_points(1024)).unwrap();
        assert!(r.passed(), "{r:?}");
        let plain = FreeChainComplex::new(1, vec![1], vec![]).unwrap();
        assert!(matches!(poincare_check(&plain, &Settings::with_points(8)), Err(Error::Domain(_))));
    }

    #[test]
    fn json_round_trip_and_defaults() {
        let c = torus2();
        assert_eq!(FreeChainComplex::from_json(&c.to_json()).unwrap(), c);
        let v = json!({"num_vars": 1, "ranks": [1, 2]});
        let z = FreeChainComplex::from_json(&v).unwrap();
        assert!(z.boundary(1).is_zero());
        let bad = json!({"num_vars": 1, "ranks": [1, 1], "boundaries": [{"degree": 3, "matrix": {}}]});
        assert!(matches!(FreeChainComplex::from_json(&bad), Err(Error::Parse(_))));
    }

    #[test]
    fn report_exports() {
        let r = homology_report(&circle(), &Settings::with_points(256)).unwrap();
        assert!(r.to_csv().starts_with("degree,betti,"));
        assert_eq!(r.to_json()["degrees"].as_array().unwrap().len(), 2);
    }

    fn x(nu: f64, theta: f64) -> VirtualModule {
        VirtualModule::abs_power(theta, nu).unwrap()
    }

    fn inclusion_projection(a: VirtualModule, b: VirtualModule) -> (EcatMorphism, EcatMorphism) {
        let (ka, kb) = (a.rank_dst(), b.rank_dst());
        let (ca, cb) = (a.alpha().cols(), b.alpha().cols());
        let sum = VirtualModule::direct_sum(&[a.clone(), b.clone()]).unwrap();
        let block = |rows: usize, cols: usize, off_r: usize, off_c: usize, k: usize| {
            let mut m = DMatrix::zeros(rows, cols);
            for i in 0..k {
                m[(off_r + i, off_c + i)] = Complex64::new(1.0, 0.0);
            }
            Symbol::constant(1, m)
        };
        let inc =
            EcatMorphism::new(a.clone(), sum.clone(), block(ka + kb, ka, 0, 0, ka), Some(block(ca + cb, ca, 0, 0, ca)))
                .unwrap();
        let proj =
            EcatMorphism::new(sum, b, block(kb, ka + kb, 0, ka, kb), Some(block(cb, ca + cb, 0, ca, cb))).unwrap();
        (inc, proj)
    }

    #[test]
    fn projective_exactness_examples() {
        let s = Settings::with_points(256);
        let (i, p) = inclusion_projection(x(1.0, 0.0), x(2.0, 1.0));
        i.validate(&s).unwrap();
        p.validate(&s).unwrap();
        let r = projective_parts_weak_exactness_check(&i, &p, &s).unwrap();
        assert_eq!(r.projective_dims, [0, 0, 0]);
        assert!(r.passed() && r.h_dim == 0.0);

        let (i, p) = inclusion_projection(VirtualModule::projective(1, 1), VirtualModule::projective(1, 2));
        let r = projective_parts_weak_exactness_check(&i, &p, &s).unwrap();
        assert_eq!(r.projective_dims, [1, 3, 2]);
        assert!(r.passed() && r.middle_homology_dim == 0.0);

        // composition X_{1} → X_{3} → X_{2}
        let (nu, nu2) = (1.0, 3.0);
        let m1 = EcatMorphism::new(x(nu, 0.0), x(nu2, 0.0), Symbol::abs_power(0.0, nu2 - nu).unwrap(), None).unwrap();
        let m2 = EcatMorphism::new(x(nu2, 0.0), x(nu2 - nu, 0.0), Symbol::identity(1, 1), None).unwrap();
        let r = projective_parts_weak_exactness_check(&m1, &m2, &s).unwrap();
        assert_eq!(r.projective_dims, [0, 0, 0]);
        assert!(r.passed() && r.h_dim == 0.0);

        let other = EcatMorphism::identity(&x(1.0, 2.0));
        assert!(projective_parts_weak_exactness_check(&m1, &other, &s).is_err());
    }
}
