//! Virtual Hilbertian modules: objects `(α: A′ → A)` of the extended
//! category, with the kernel/cokernel constructions, mono/epi tests, the
//! torsion/projective split and duality for torsion objects.
//!
//! A module is a symbol `α` of shape `rank_dst × cols`. Excision of the a.e.
//! kernel is bookkept as a count (`excised`) rather than by rewriting `α`:
//! pullbacks and kernels generally leave the class of free modules, so only
//! their invariants are computed, fiber by fiber.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fiber::{
    fiber_singular_values, probe_infimum, rank_profile_from_sv, sigma_from_top, symbol_singular_values, FiberSpectrum,
    RankProfile, Symbol, TorusGrid,
};
use crate::laurent::LaurentMatrix;
use crate::settings::Settings;

/// Number of lattice-local minima polished by the infimum probe.
const PROBE_STARTS: usize = 16;

/// Object `(α: A′ → A)` of the extended category.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualModule {
    alpha: Symbol,
    excised: usize,
}

impl VirtualModule {
    pub fn new(alpha: Symbol) -> Self {
        Self { alpha, excised: 0 }
    }

    pub fn from_laurent(alpha: LaurentMatrix) -> Self {
        Self::new(Symbol::Laurent(alpha))
    }

    /// `X_{ν,θ} = (|z − e^{iθ}|^ν : L²(S¹) → L²(S¹))`.
    pub fn abs_power(center_angle: f64, nu: f64) -> Result<Self> {
        Ok(Self::new(Symbol::abs_power(center_angle, nu)?))
    }

    /// The projective module `(0 → A)` with `A` free of rank `k`.
    pub fn projective(num_vars: usize, k: usize) -> Self {
        Self::new(Symbol::zeros(num_vars, k, 0))
    }

    pub fn direct_sum(parts: &[VirtualModule]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::Domain("empty direct sum".into()))?;
        let nv = first.num_vars();
        let blocks = parts.iter().map(|p| p.alpha.clone()).collect();
        Ok(Self { alpha: Symbol::block_diag(nv, blocks)?, excised: parts.iter().map(|p| p.excised).sum() })
    }

    pub fn alpha(&self) -> &Symbol {
        &self.alpha
    }

    pub fn num_vars(&self) -> usize {
        self.alpha.num_vars()
    }

    pub fn rank_src(&self) -> usize {
        self.alpha.cols() - self.excised
    }

    pub fn rank_dst(&self) -> usize {
        self.alpha.rows()
    }

    /// Kernel directions already excised from the source.
    pub fn excised(&self) -> usize {
        self.excised
    }

    /// Pointwise rescaling `c·α`.
    pub fn scaled(&self, c: Complex64) -> Self {
        Self { alpha: Symbol::scale(c, self.alpha.clone()), excised: self.excised }
    }

    pub fn to_json(&self) -> Result<Value> {
        Ok(json!({
            "rank_src": self.rank_src(),
            "rank_dst": self.rank_dst(),
            "alpha": alpha_to_json(&self.alpha)?,
        }))
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let alpha = alpha_from_json(v.get("alpha").ok_or_else(|| missing("alpha"))?)?;
        let rank_dst = get_usize(v, "rank_dst")?;
        let rank_src = get_usize(v, "rank_src")?;
        if rank_dst != alpha.rows() {
            return Err(Error::Parse(format!("rank_dst {rank_dst} disagrees with alpha rows {}", alpha.rows())));
        }
        if rank_src > alpha.cols() {
            return Err(Error::Parse(format!("rank_src {rank_src} exceeds alpha columns {}", alpha.cols())));
        }
        Ok(Self { excised: alpha.cols() - rank_src, alpha })
    }
}

fn missing(key: &str) -> Error {
    Error::Parse(format!("missing field `{key}`"))
}

fn get_usize(v: &Value, key: &str) -> Result<usize> {
    v.get(key)
        .and_then(Value::as_u64)
        .map(|x| x as usize)
        .ok_or_else(|| Error::Parse(format!("field `{key}` must be a non-negative integer")))
}

fn get_f64(v: &Value, key: &str) -> Result<f64> {
    v.get(key).and_then(Value::as_f64).ok_or_else(|| Error::Parse(format!("field `{key}` must be a number")))
}

fn alpha_to_json(s: &Symbol) -> Result<Value> {
    match s {
        Symbol::Laurent(m) => Ok(m.to_json()),
        Symbol::AbsPower { center, nu } if center.len() == 1 => {
            Ok(json!({ "symbol": "abs_power", "center_angle": center[0], "nu": nu }))
        }
        Symbol::Constant { num_vars, value } if value.iter().all(|z| *z == Complex64::default()) => {
            Ok(LaurentMatrix::zeros(*num_vars, value.nrows(), value.ncols()).to_json())
        }
        Symbol::BlockDiag { blocks, .. } => {
            let parts: Result<Vec<Value>> = blocks.iter().map(alpha_to_json).collect();
            Ok(json!({ "symbol": "direct_sum", "parts": parts? }))
        }
        _ => Err(Error::Domain("this symbol has no JSON representation".into())),
    }
}

fn alpha_from_json(v: &Value) -> Result<Symbol> {
    match v.get("symbol").and_then(Value::as_str) {
        None => Ok(Symbol::Laurent(LaurentMatrix::from_json(v)?)),
        Some("abs_power") => {
            Symbol::abs_power(get_f64(v, "center_angle")?, get_f64(v, "nu")?).map_err(|e| Error::Parse(e.to_string()))
        }
        Some("direct_sum") => {
            let parts = v
                .get("parts")
                .and_then(Value::as_array)
                .ok_or_else(|| missing("parts"))?
                .iter()
                .map(alpha_from_json)
                .collect::<Result<Vec<_>>>()?;
            let nv = parts.first().ok_or_else(|| Error::Parse("empty direct_sum".into()))?.num_vars();
            Symbol::block_diag(nv, parts).map_err(|e| Error::Parse(e.to_string()))
        }
        Some(other) => Err(Error::Parse(format!("unknown symbol kind `{other}`"))),
    }
}

/// Excises the a.e. kernel of `α`: afterwards `rank_src` equals the generic rank.
pub fn normalize(x: &VirtualModule, settings: &Settings) -> Result<VirtualModule> {
    let grid = settings.grid(x.num_vars())?;
    let r = crate::fiber::generic_rank(&x.alpha, &grid, settings.rank_tol)?;
    Ok(VirtualModule { alpha: x.alpha.clone(), excised: x.alpha.cols() - r })
}

/// Torsion/projective decomposition data of a module.
#[derive(Debug, Clone)]
pub struct SplitReport {
    pub projective_dim: f64,
    pub generic_rank: usize,
    pub rank_profile: RankProfile,
    pub is_torsion: bool,
    pub is_null: bool,
    /// Estimated `inf_z σ_{rank_dst}(α(z))`; zero when `α` is not generically onto.
    pub min_sigma: f64,
}

pub fn split(x: &VirtualModule, settings: &Settings) -> Result<SplitReport> {
    let grid = settings.grid(x.num_vars())?;
    let k = x.rank_dst();
    let sv = symbol_singular_values(&x.alpha, &grid)?;
    let rank_profile = rank_profile_from_sv(&sv, settings.rank_tol)?;
    let generic_rank = rank_profile.generic_rank;
    let is_torsion = generic_rank == k;
    let min_sigma = if k == 0 {
        f64::INFINITY
    } else if is_torsion {
        uniform_lower_bound(&grid, |t| sigma_from_top(&x.alpha.eval(t), k))
    } else {
        0.0
    };
    Ok(SplitReport {
        projective_dim: (k - generic_rank) as f64,
        generic_rank,
        rank_profile,
        is_torsion,
        is_null: is_torsion && min_sigma > settings.invertible_tol,
        min_sigma,
    })
}

fn uniform_lower_bound<F: Fn(&[f64]) -> f64 + Sync>(grid: &TorusGrid, g: F) -> f64 {
    probe_infimum(grid, g, PROBE_STARTS).infimum
}

/// Morphism `[f]: (α: A′ → A) → (β: B′ → B)`, optionally with a witness
/// `g: A′ → B′` for `f∘α = β∘g`.
#[derive(Debug, Clone)]
pub struct EcatMorphism {
    pub source: VirtualModule,
    pub target: VirtualModule,
    pub f: Symbol,
    pub witness_g: Option<Symbol>,
}

impl EcatMorphism {
    pub fn new(source: VirtualModule, target: VirtualModule, f: Symbol, witness_g: Option<Symbol>) -> Result<Self> {
        if source.num_vars() != target.num_vars() {
            return Err(Error::DimensionMismatch { expected: source.num_vars(), found: target.num_vars() });
        }
        let want = (target.rank_dst(), source.rank_dst());
        if f.shape() != want {
            return Err(Error::ShapeMismatch { op: "morphism f", lhs: want, rhs: f.shape() });
        }
        if let Some(g) = &witness_g {
            let want = (target.alpha.cols(), source.alpha.cols());
            if g.shape() != want {
                return Err(Error::ShapeMismatch { op: "morphism witness g", lhs: want, rhs: g.shape() });
            }
        }
        Ok(Self { source, target, f, witness_g })
    }

    pub fn identity(x: &VirtualModule) -> Self {
        let nv = x.num_vars();
        Self {
            source: x.clone(),
            target: x.clone(),
            f: Symbol::identity(nv, x.rank_dst()),
            witness_g: Some(Symbol::identity(nv, x.alpha.cols())),
        }
    }

    pub fn zero(source: &VirtualModule, target: &VirtualModule) -> Result<Self> {
        let nv = source.num_vars();
        Self::new(
            source.clone(),
            target.clone(),
            Symbol::zeros(nv, target.rank_dst(), source.rank_dst()),
            Some(Symbol::zeros(nv, target.alpha.cols(), source.alpha.cols())),
        )
    }

    /// Largest entry of `f∘α − β∘g` over the grid; zero when no witness is stored.
    pub fn commutation_residual(&self, settings: &Settings) -> Result<f64> {
        let Some(g) = &self.witness_g else { return Ok(0.0) };
        let grid = settings.grid(self.source.num_vars())?;
        Ok((0..grid.len())
            .into_par_iter()
            .map(|i| {
                let t = grid.angles(i);
                let lhs = self.f.eval(&t) * self.source.alpha.eval(&t);
                let rhs = self.target.alpha.eval(&t) * g.eval(&t);
                (lhs - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max))
    }

    /// Errors when the stored witness fails to commute to 1e-9.
    pub fn validate(&self, settings: &Settings) -> Result<()> {
        let r = self.commutation_residual(settings)?;
        if r > 1e-9 {
            return Err(Error::Domain(format!("square does not commute: residual {r:e}")));
        }
        Ok(())
    }
}

/// Cokernel object `((β, −f): B′ ⊕ A → B)`.
pub fn cokernel(m: &EcatMorphism) -> Result<VirtualModule> {
    let beta = m.target.alpha.clone();
    let neg_f = Symbol::scale(Complex64::new(-1.0, 0.0), m.f.clone());
    Ok(VirtualModule::new(Symbol::hstack(vec![beta, neg_f])?))
}

/// Invariants of the kernel object `(γ: P′ → P)`, where `P` and `P′` are the
/// fiberwise pullbacks of `A → B ← B′` and `A′ → B ← B′`.
#[derive(Debug, Clone)]
pub struct KernelData {
    pub dim_p: usize,
    pub dim_p_prime: usize,
    pub generic_rank_gamma: usize,
    pub projective_dim: f64,
    /// Singular values of `γ(z)` per grid point, for the torsion density.
    pub spectrum: FiberSpectrum,
    pub min_sigma: f64,
    pub is_null: bool,
}

/// Orthonormal basis (as columns) spanned by the right singular vectors of
/// the `d` smallest singular values of `m`, and whether the nullity of `m`
/// exceeds `d` (the fiber sits on the jump set of the kernel).
fn small_right_singular_basis(m: &DMatrix<Complex64>, d: usize, rank_tol: f64) -> (DMatrix<Complex64>, bool) {
    let (r, c) = m.shape();
    if c == 0 {
        return (DMatrix::zeros(0, 0), false);
    }
    // zero rows make the SVD return a full set of right singular vectors
    let mut sq = DMatrix::zeros(r.max(c), c);
    sq.view_mut((0, 0), (r, c)).copy_from(m);
    let svd = sq.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[a].total_cmp(&sv[b]));
    let mut out = DMatrix::zeros(c, d);
    for (j, &i) in order.iter().take(d).enumerate() {
        out.set_column(j, &v_t.row(i).adjoint());
    }
    let threshold = rank_tol * sv.max().max(1.0);
    let jumped = order.get(d).is_some_and(|&i| sv[i] <= threshold);
    (out, jumped)
}

/// Orthonormal basis of the `d` weakest left singular directions of `m`;
/// for `d = rows − rank` this spans the complement of the range.
pub(crate) fn small_left_singular_basis(m: &DMatrix<Complex64>, d: usize) -> DMatrix<Complex64> {
    small_right_singular_basis(&m.adjoint(), d, f64::MIN_POSITIVE).0
}

/// Kernel-data fiber `γ(z) = Q_P(z)* · diag(α(z), 1) · Q_P′(z)`, flagged when
/// `z` lies on the measure-zero set where `P` or `P′` jumps in dimension.
fn pullback_fiber(m: &EcatMorphism, t: &[f64], d_p: usize, d_pp: usize, rank_tol: f64) -> (DMatrix<Complex64>, bool) {
    let f = m.f.eval(t);
    let alpha = m.source.alpha.eval(t);
    let beta = m.target.alpha.eval(t);
    let (kb, kbp) = beta.shape();
    let (ka, kap) = alpha.shape();
    let mut mp = DMatrix::zeros(kb, ka + kbp);
    mp.view_mut((0, 0), (kb, ka)).copy_from(&f);
    mp.view_mut((0, ka), (kb, kbp)).copy_from(&(-&beta));
    let fa = &f * &alpha;
    let mut mpp = DMatrix::zeros(kb, kap + kbp);
    mpp.view_mut((0, 0), (kb, kap)).copy_from(&fa);
    mpp.view_mut((0, kap), (kb, kbp)).copy_from(&(-&beta));
    let (q, jump_p) = small_right_singular_basis(&mp, d_p, rank_tol);
    let (qp, jump_pp) = small_right_singular_basis(&mpp, d_pp, rank_tol);
    // (a′, b′) ↦ (α a′, b′)
    let mut lift = DMatrix::zeros(ka + kbp, kap + kbp);
    lift.view_mut((0, 0), (ka, kap)).copy_from(&alpha);
    for i in 0..kbp {
        lift[(ka + i, kap + i)] = Complex64::new(1.0, 0.0);
    }
    (q.adjoint() * lift * qp, jump_p || jump_pp)
}

fn block_rank(grid: &TorusGrid, rank_tol: f64, build: impl Fn(&[f64]) -> DMatrix<Complex64> + Sync) -> Result<usize> {
    let sv: Vec<Vec<f64>> =
        (0..grid.len()).into_par_iter().map(|i| fiber_singular_values(&build(&grid.angles(i)))).collect();
    Ok(rank_profile_from_sv(&sv, rank_tol)?.generic_rank)
}

pub fn kernel_data(m: &EcatMorphism, settings: &Settings) -> Result<KernelData> {
    let grid = settings.grid(m.source.num_vars())?;
    let kbp = m.target.alpha.cols();
    let (ka, kap) = m.source.alpha.shape();
    let tol = settings.rank_tol;
    let neg = Complex64::new(-1.0, 0.0);
    let f_neg_beta = Symbol::hstack(vec![m.f.clone(), Symbol::scale(neg, m.target.alpha.clone())])?;
    let fa_neg_beta = Symbol::hstack(vec![
        Symbol::product(m.f.clone(), m.source.alpha.clone())?,
        Symbol::scale(neg, m.target.alpha.clone()),
    ])?;
    let dim_p = ka + kbp - block_rank(&grid, settings.rank_tol, |t| f_neg_beta.eval(t))?;
    let dim_p_prime = kap + kbp - block_rank(&grid, settings.rank_tol, |t| fa_neg_beta.eval(t))?;

    let values: Vec<Vec<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|i| fiber_singular_values(&pullback_fiber(m, &grid.angles(i), dim_p, dim_p_prime, tol).0))
        .collect();
    let generic_rank_gamma =
        if dim_p == 0 || dim_p_prime == 0 { 0 } else { rank_profile_from_sv(&values, settings.rank_tol)?.generic_rank };
    let min_sigma = if dim_p == 0 {
        f64::INFINITY
    } else if generic_rank_gamma < dim_p {
        0.0
    } else {
        uniform_lower_bound(&grid, |t| match pullback_fiber(m, t, dim_p, dim_p_prime, tol) {
            (_, true) => f64::INFINITY,
            (gamma, false) => sigma_from_top(&gamma, dim_p),
        })
    };
    Ok(KernelData {
        dim_p,
        dim_p_prime,
        generic_rank_gamma,
        projective_dim: (dim_p - generic_rank_gamma) as f64,
        spectrum: FiberSpectrum { grid, domain_dim: dim_p_prime, values },
        min_sigma,
        is_null: generic_rank_gamma == dim_p && min_sigma > settings.invertible_tol,
    })
}

/// Condition `α(A′) ⊃ f⁻¹(β(B′))`, decided as nullity of the kernel object.
pub fn is_mono(m: &EcatMorphism, settings: &Settings) -> Result<bool> {
    Ok(kernel_data(m, settings)?.is_null)
}

/// Condition `B = β(B′) + f(A)`: `[β | f]` must be onto with a uniformly
/// bounded right inverse.
pub fn is_epi(m: &EcatMorphism, settings: &Settings) -> Result<bool> {
    Ok(epi_margin(m, settings)? > settings.invertible_tol)
}

/// `inf_z σ_{rank B}([β(z) | f(z)])`, zero when `[β | f]` is not generically onto.
pub fn epi_margin(m: &EcatMorphism, settings: &Settings) -> Result<f64> {
    let kb = m.target.rank_dst();
    if kb == 0 {
        return Ok(f64::INFINITY);
    }
    let grid = settings.grid(m.source.num_vars())?;
    let block = Symbol::hstack(vec![m.target.alpha.clone(), m.f.clone()])?;
    if crate::fiber::generic_rank(&block, &grid, settings.rank_tol)? < kb {
        return Ok(0.0);
    }
    Ok(uniform_lower_bound(&grid, |t| sigma_from_top(&block.eval(t), kb)))
}

/// Duality for torsion objects: `e(α: A′ → A) = (α*: A* → A′*)`.
pub fn dual_torsion(x: &VirtualModule, settings: &Settings) -> Result<VirtualModule> {
    let s = split(x, settings)?;
    if !s.is_torsion {
        return Err(Error::Domain(format!(
            "dual_torsion needs a torsion module; projective part has dimension {}",
            s.projective_dim
        )));
    }
    if s.generic_rank != x.alpha.cols() {
        return Err(Error::Domain(
            "dual_torsion needs an a.e. injective representative; excise the kernel first".into(),
        ));
    }
    Ok(VirtualModule::new(x.alpha.adjoint()))
}

/// Classification of one candidate morphism `X_{ν,θ0} → X_{ν,θ1}` given by a
/// multiplier `f` on the target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CandidateVerdict {
    /// `h = f/|z − z1|^ν` is bounded, so `[f]` is the zero morphism.
    Zero { sup_h: f64 },
    /// `g = f·|z − z0|^ν / |z − z1|^ν` is unbounded: no bounded `g` makes the square commute.
    Invalid { growth: f64 },
    /// A genuine nonzero morphism.
    Nonzero { sup_g: f64 },
}

#[derive(Debug, Clone)]
pub struct HomProbeReport {
    pub verdicts: Vec<CandidateVerdict>,
    /// True iff the angles differ and every candidate is zero or invalid.
    pub all_zero: bool,
}

/// Probes `Hom(X_{ν,θ0}, X_{ν,θ1})` over a finite family of candidate
/// multipliers. This is a finite check, not a proof that `Hom` vanishes.
pub fn hom_vanishing_probe(
    theta0: f64,
    theta1: f64,
    nu: f64,
    candidates: &[Symbol],
    settings: &Settings,
) -> Result<HomProbeReport> {
    let grid = settings.grid(1)?;
    let src = Symbol::abs_power(theta0, nu)?;
    let dst = Symbol::abs_power(theta1, nu)?;
    let mut verdicts = Vec::with_capacity(candidates.len());
    for f in candidates {
        if f.shape() != (1, 1) || f.num_vars() != 1 {
            return Err(Error::Domain("candidates must be scalar symbols in one variable".into()));
        }
        let scalar = |s: &Symbol, t: f64| s.eval(&[t])[(0, 0)];
        let h = |t: f64| scalar(f, t).norm() / scalar(&dst, t).re;
        let g = |t: f64| (scalar(f, t) * scalar(&src, t)).norm() / scalar(&dst, t).re;
        let singular = [theta1, theta0];
        let (g_bounded, g_sup, g_growth) = bounded_near(&grid, &g, &singular);
        if !g_bounded {
            verdicts.push(CandidateVerdict::Invalid { growth: g_growth });
            continue;
        }
        let (h_bounded, h_sup, _) = bounded_near(&grid, &h, &singular);
        verdicts.push(if h_bounded {
            CandidateVerdict::Zero { sup_h: h_sup }
        } else {
            CandidateVerdict::Nonzero { sup_g: g_sup }
        });
    }
    let distinct = ((theta0 - theta1).rem_euclid(TAU)).min((theta1 - theta0).rem_euclid(TAU)) > 1e-12;
    let all_zero = distinct && verdicts.iter().all(|v| !matches!(v, CandidateVerdict::Nonzero { .. }));
    Ok(HomProbeReport { verdicts, all_zero })
}

/// Essential boundedness of `u` near the given angles: the function is
/// sampled on the grid and along `θ ± 2^{-k}`; a value that keeps growing as
/// `k` goes from 20 to 50 (or is non-finite) means unbounded.
fn bounded_near(grid: &TorusGrid, u: &dyn Fn(f64) -> f64, singular: &[f64]) -> (bool, f64, f64) {
    let mut sup: f64 = 0.0;
    for i in 0..grid.len() {
        let v = u(grid.angles(i)[0]);
        if v.is_finite() {
            sup = sup.max(v);
        }
    }
    let mut growth: f64 = 1.0;
    for &s in singular {
        for sign in [1.0, -1.0] {
            let at = |k: i32| u(s + sign * 2f64.powi(-k));
            let (near, nearer) = (at(20), at(50));
            if !nearer.is_finite() || !near.is_finite() {
                return (false, f64::INFINITY, f64::INFINITY);
            }
            for k in 1..=50 {
                sup = sup.max(at(k));
            }
            if near > 0.0 {
                growth = growth.max(nearer / near);
            } else if nearer > 0.0 {
                growth = f64::INFINITY;
            }
        }
    }
    (growth < 4.0, sup, growth)
}
