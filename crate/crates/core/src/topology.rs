//! Preset cell complexes of tori, twisted coefficients, TOR over `C[Z^n]`,
//! bounds for the minimal number of generators, and Morse inequalities.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::ecat::{epi_margin, small_left_singular_basis, split, EcatMorphism, VirtualModule};
use crate::error::{Error, Result};
use crate::fiber::{
    fiber_singular_values, probe_infimum, rank_profile_from_sv, sigma_from_top, symbol_singular_values, Symbol,
    TorusGrid,
};
use crate::homology::{cohomology, homology, validate, FreeChainComplex};
use crate::laurent::{LaurentMatrix, LaurentPoly};
use crate::settings::Settings;
use crate::spectral::{dilatationally_equivalent, SpectralDensity};

/// Tolerance for unitarity and commutation of representation generators.
pub const REP_TOL: f64 = 1e-10;

/// A named cell complex together with the chain complex of its universal cover.
#[derive(Debug, Clone, PartialEq)]
pub struct CWPreset {
    pub name: String,
    /// Rank `n` of the fundamental group `Z^n`.
    pub fundamental_group_rank: usize,
    pub complex: FreeChainComplex,
    pub orientable_manifold: bool,
    pub top_dim: usize,
}

/// Names accepted by [`preset_complex`].
pub const PRESET_NAMES: [&str; 4] = ["circle", "circle_subdivided", "torus2", "torus3"];

/// Looks up a preset: `circle`, `circle_subdivided`, or `torus<n>` /
/// `torus(<n>)` for `1 <= n <= 4`.
pub fn preset_complex(name: &str) -> Result<CWPreset> {
    let n = match name {
        "circle" => 1,
        "circle_subdivided" => {
            let z = LaurentPoly::var(1, 0);
            let one = LaurentPoly::one(1);
            let d1 = LaurentMatrix::from_rows(1, vec![vec![-&one, z], vec![one.clone(), -&one]])?;
            let complex = FreeChainComplex::new(1, vec![2, 2], vec![d1])?.with_manifold_dim(1);
            return Ok(CWPreset {
                name: name.into(),
                fundamental_group_rank: 1,
                complex,
                orientable_manifold: true,
                top_dim: 1,
            });
        }
        other => other
            .strip_prefix("torus")
            .map(|s| s.trim_start_matches('(').trim_end_matches(')'))
            .and_then(|s| s.parse::<usize>().ok())
            .filter(|n| (1..=4).contains(n))
            .ok_or_else(|| Error::Domain(format!("unknown preset `{other}`")))?,
    };
    Ok(CWPreset {
        name: name.into(),
        fundamental_group_rank: n,
        complex: koszul(n),
        orientable_manifold: true,
        top_dim: n,
    })
}

/// Koszul complex of the trivial module over `C[Z^n]`, which is also the
/// cellular chain complex of the universal cover of the n-torus. Degree `k`
/// has one generator per `k`-subset `S`, and
/// `∂e_S = Σ_{j ∈ S} (−1)^{pos(j, S)} (z_j − 1) e_{S∖j}`.
pub fn koszul(n: usize) -> FreeChainComplex {
    let subsets: Vec<Vec<Vec<usize>>> = (0..=n).map(|k| k_subsets(n, k)).collect();
    let index: Vec<BTreeMap<Vec<usize>, usize>> =
        subsets.iter().map(|s| s.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect()).collect();
    let mut boundaries = Vec::with_capacity(n);
    for k in 1..=n {
        let mut d = LaurentMatrix::zeros(n, subsets[k - 1].len(), subsets[k].len());
        for (col, s) in subsets[k].iter().enumerate() {
            for (pos, &j) in s.iter().enumerate() {
                let face: Vec<usize> = s.iter().copied().filter(|&x| x != j).collect();
                let row = index[k - 1][&face];
                let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
                let p = LaurentPoly::var_minus_one(n, j).scale(Complex64::new(sign, 0.0));
                d.set(row, col, p).expect("indices in range");
            }
        }
        boundaries.push(d);
    }
    let ranks = subsets.iter().map(Vec::len).collect();
    FreeChainComplex::new(n, ranks, boundaries).expect("Koszul shapes chain").with_manifold_dim(n)
}

fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in start..n {
            cur.push(j);
            go(j + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Length-one complex `C[Z^n]^{k′} --R--> C[Z^n]^k` from a presentation matrix.
pub fn presentation_complex(r: &LaurentMatrix) -> Result<FreeChainComplex> {
    FreeChainComplex::new(r.num_vars(), vec![r.rows(), r.cols()], vec![r.clone()])
}

/// Finite-dimensional unitary representation of `Z^n`: one commuting unitary per generator.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryRep {
    dim: usize,
    generators: Vec<DMatrix<Complex64>>,
}

impl UnitaryRep {
    pub fn new(generators: Vec<DMatrix<Complex64>>) -> Result<Self> {
        let dim = generators
            .first()
            .map(|g| g.nrows())
            .ok_or_else(|| Error::Domain("a representation needs one generator per torus variable".into()))?;
        for (k, g) in generators.iter().enumerate() {
            if g.shape() != (dim, dim) {
                return Err(Error::Domain(format!("generator {k} is not {dim}x{dim}")));
            }
            let err = (g.adjoint() * g - DMatrix::identity(dim, dim)).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if err > REP_TOL {
                return Err(Error::Domain(format!("generator {k} is not unitary (error {err:e})")));
            }
        }
        for a in 0..generators.len() {
            for b in a + 1..generators.len() {
                let c = &generators[a] * &generators[b] - &generators[b] * &generators[a];
                let err = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
                if err > REP_TOL {
                    return Err(Error::Domain(format!("generators {a} and {b} do not commute (error {err:e})")));
                }
            }
        }
        Ok(Self { dim, generators })
    }

    pub fn trivial(num_vars: usize, dim: usize) -> Self {
        Self { dim, generators: vec![DMatrix::identity(dim, dim); num_vars] }
    }

    /// Every generator acts by `−1`.
    pub fn sign(num_vars: usize) -> Self {
        Self { dim: 1, generators: vec![DMatrix::from_element(1, 1, Complex64::new(-1.0, 0.0)); num_vars] }
    }

    /// One-dimensional character sending generator `k` to `exp(i·angles[k])`.
    pub fn character(angles: &[f64]) -> Self {
        Self {
            dim: 1,
            generators: angles.iter().map(|&t| DMatrix::from_element(1, 1, Complex64::from_polar(1.0, t))).collect(),
        }
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.num_vars() != other.num_vars() {
            return Err(Error::DimensionMismatch { expected: self.num_vars(), found: other.num_vars() });
        }
        let d = self.dim + other.dim;
        let generators = self
            .generators
            .iter()
            .zip(&other.generators)
            .map(|(a, b)| {
                let mut m = DMatrix::zeros(d, d);
                m.view_mut((0, 0), a.shape()).copy_from(a);
                m.view_mut((self.dim, self.dim), b.shape()).copy_from(b);
                m
            })
            .collect();
        Ok(Self { dim: d, generators })
    }

    /// Parses `trivial<d>` (e.g. `trivial2`) or `sign`.
    pub fn preset(name: &str, num_vars: usize) -> Result<Self> {
        if name == "sign" {
            return Ok(Self::sign(num_vars));
        }
        name.strip_prefix("trivial")
            .map(|d| if d.is_empty() { Ok(1) } else { d.parse::<usize>() })
            .and_then(|d| d.ok())
            .filter(|&d| d >= 1)
            .map(|d| Self::trivial(num_vars, d))
            .ok_or_else(|| Error::Domain(format!("unknown representation `{name}`")))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_vars(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[DMatrix<Complex64>] {
        &self.generators
    }

    /// `ρ(γ_k)^m`, using the adjoint for negative powers.
    fn power(&self, k: usize, m: i32) -> DMatrix<Complex64> {
        let g = if m < 0 { self.generators[k].adjoint() } else { self.generators[k].clone() };
        let mut out = DMatrix::identity(self.dim, self.dim);
        for _ in 0..m.unsigned_abs() {
            out = &out * &g;
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let gens: Vec<Value> = self
            .generators
            .iter()
            .map(|g| {
                Value::Array(
                    (0..g.nrows())
                        .map(|r| Value::Array((0..g.ncols()).map(|c| json!([g[(r, c)].re, g[(r, c)].im])).collect()))
                        .collect(),
                )
            })
            .collect();
        json!({ "dim": self.dim, "generators": gens })
    }

    /// `{ "dim": d, "generators": [[[entry, ...], ...], ...] }`; an entry is
    /// a real number or a `[re, im]` pair.
    pub fn from_json(v: &Value) -> Result<Self> {
        let dim = v
            .get("dim")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Parse("field `dim` must be a positive integer".into()))? as usize;
        let gens = v
            .get("generators")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("field `generators` must be an array".into()))?;
        let parse_entry = |e: &Value| -> Result<Complex64> {
            if let Some(x) = e.as_f64() {
                return Ok(Complex64::new(x, 0.0));
            }
            match e.as_array().map(|a| a.iter().map(Value::as_f64).collect::<Vec<_>>()) {
                Some(p) if p.len() == 2 && p.iter().all(Option::is_some) => {
                    Ok(Complex64::new(p[0].unwrap_or(0.0), p[1].unwrap_or(0.0)))
                }
                _ => Err(Error::Parse(format!("bad matrix entry {e}"))),
            }
        };
        let mut generators = Vec::with_capacity(gens.len());
        for g in gens {
            let rows = g.as_array().ok_or_else(|| Error::Parse("generator must be an array of rows".into()))?;
            if rows.len() != dim {
                return Err(Error::Parse(format!("generator has {} rows, expected {dim}", rows.len())));
            }
            let mut m = DMatrix::zeros(dim, dim);
            for (r, row) in rows.iter().enumerate() {
                let row = row
                    .as_array()
                    .filter(|a| a.len() == dim)
                    .ok_or_else(|| Error::Parse(format!("generator rows must have {dim} entries")))?;
                for (c, e) in row.iter().enumerate() {
                    m[(r, c)] = parse_entry(e)?;
                }
            }
            generators.push(m);
        }
        Self::new(generators).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Twisted coefficients: substitutes `z_k ↦ z_k·ρ(γ_k)`, inflating every
/// entry to a `d × d` block.
pub fn twist(c: &FreeChainComplex, rho: &UnitaryRep) -> Result<FreeChainComplex> {
    if rho.num_vars() != c.num_vars() {
        return Err(Error::DimensionMismatch { expected: c.num_vars(), found: rho.num_vars() });
    }
    let d = rho.dim();
    let nv = c.num_vars();
    let boundaries = (1..=c.top())
        .map(|i| {
            let b = c.boundary(i);
            let mut out = LaurentMatrix::zeros(nv, b.rows() * d, b.cols() * d);
            let mut blocks: BTreeMap<(usize, usize), Vec<Vec<LaurentPoly>>> = BTreeMap::new();
            for r in 0..b.rows() {
                for col in 0..b.cols() {
                    let mut block = vec![vec![LaurentPoly::zero(nv); d]; d];
                    for (exp, &coef) in b.get(r, col).terms() {
                        let mut m: DMatrix<Complex64> = DMatrix::identity(d, d);
                        for (k, &e) in exp.iter().enumerate() {
                            m *= rho.power(k, e);
                        }
                        for (a, row) in block.iter_mut().enumerate() {
                            for (bb, p) in row.iter_mut().enumerate() {
                                let c = coef * m[(a, bb)];
                                if c != Complex64::default() {
                                    *p = &*p + &LaurentPoly::monomial(exp.clone(), c);
                                }
                            }
                        }
                    }
                    blocks.insert((r, col), block);
                }
            }
            for ((r, col), block) in blocks {
                for (a, row) in block.into_iter().enumerate() {
                    for (bb, p) in row.into_iter().enumerate() {
                        out.set(r * d + a, col * d + bb, p).expect("indices in range");
                    }
                }
            }
            out
        })
        .collect();
    let ranks = c.ranks().iter().map(|r| r * d).collect();
    let t = FreeChainComplex::new(nv, ranks, boundaries)?;
    Ok(match c.manifold_dim() {
        Some(n) => t.with_manifold_dim(n),
        None => t,
    })
}

/// Invariants of `TOR_q` computed from a free resolution.
#[derive(Debug, Clone)]
pub struct TorEntry {
    pub q: usize,
    pub projective_dim: f64,
    pub torsion_density: SpectralDensity,
    pub is_zero: bool,
}

/// `TOR_q(ℓ²(Z^n), N)` for the module `N` resolved by `resolution`: the
/// q-th homology of the resolution read as a complex of Hilbertian modules.
pub fn tor(q: usize, resolution: &FreeChainComplex, settings: &Settings) -> Result<TorEntry> {
    validate(resolution).into_result()?;
    if q > resolution.top() {
        let grid = settings.grid(resolution.num_vars())?;
        let zero =
            crate::homology::boundary_density(&LaurentMatrix::zeros(resolution.num_vars(), 0, 0), &grid, settings)?;
        return Ok(TorEntry { q, projective_dim: 0.0, torsion_density: zero, is_zero: true });
    }
    let h = homology(resolution, q, settings)?;
    Ok(TorEntry {
        q,
        projective_dim: h.betti,
        is_zero: h.betti == 0.0 && h.torsion_is_trivial(),
        torsion_density: h.torsion_density,
    })
}

/// Dimension and density comparison for the short exact sequence
/// `0 → TOR₁(H_{p−1}) → H_p → TOR₀(H_p) → 0` over `π = Z`.
#[derive(Debug, Clone)]
pub struct TorSequenceReport {
    pub p: usize,
    pub betti_h: f64,
    pub tor1_dim: f64,
    pub tor0_betti: f64,
    /// `max_λ |F_{T(H_p)} − F_{TOR₀}|`.
    pub density_diff: f64,
    /// Smallest dilatation constant relating the two torsion densities, if any up to 10³.
    pub dilatation: Option<f64>,
}

impl TorSequenceReport {
    pub const DENSITY_TOL: f64 = 1e-3;
    pub const MAX_DILATATION: f64 = 4.0;

    pub fn dimensions_add_up(&self) -> bool {
        self.betti_h == self.tor1_dim + self.tor0_betti
    }

    pub fn densities_agree(&self) -> bool {
        self.density_diff <= Self::DENSITY_TOL || self.dilatation.is_some_and(|c| c <= Self::MAX_DILATATION)
    }

    pub fn passed(&self) -> bool {
        self.dimensions_add_up() && self.densities_agree()
    }
}

/// `presentation_p` presents `H_p` of the universal cover; `presentation_prev`
/// presents `H_{p−1}` (`None` for `p = 0`).
pub fn tor_sequence_check(
    c: &FreeChainComplex,
    p: usize,
    presentation_p: &LaurentMatrix,
    presentation_prev: Option<&LaurentMatrix>,
    settings: &Settings,
) -> Result<TorSequenceReport> {
    if c.num_vars() != 1 {
        return Err(Error::Domain("sequence check needs a single torus variable".into()));
    }
    let h = homology(c, p, settings)?;
    let tor0 = tor(0, &presentation_complex(presentation_p)?, settings)?;
    let tor1_dim = match presentation_prev {
        Some(r) => tor(1, &presentation_complex(r)?, settings)?.projective_dim,
        None => 0.0,
    };
    Ok(TorSequenceReport {
        p,
        betti_h: h.betti,
        tor1_dim,
        tor0_betti: tor0.projective_dim,
        density_diff: h.torsion_density.max_abs_diff(&tor0.torsion_density)?,
        dilatation: dilatationally_equivalent(&h.torsion_density, &tor0.torsion_density, 1e3),
    })
}

/// Lower bound for the minimal number of generators: the largest corank of
/// `α(z)` over the grid and over the continuously refined minimizers of the
/// smallest singular value, and at least 1 for a non-null module.
pub fn mu_lower(x: &VirtualModule, settings: &Settings) -> Result<usize> {
    let k = x.rank_dst();
    if k == 0 {
        return Ok(0);
    }
    let grid = settings.grid(x.num_vars())?;
    let sv = symbol_singular_values(x.alpha(), &grid)?;
    let profile = rank_profile_from_sv(&sv, settings.rank_tol)?;
    let mut best = profile.fiber_ranks.iter().map(|&r| k - r).max().unwrap_or(0);
    if best == k {
        return Ok(k);
    }
    let probe = probe_infimum(&grid, |t| sigma_from_top(&x.alpha().eval(t), k), 16);
    // refined points sit within rounding of the locus, so use a looser cut-off
    let loose = settings.rank_tol.sqrt() * (profile.threshold / settings.rank_tol);
    for (t, _) in &probe.refined {
        let v = fiber_singular_values(&x.alpha().eval(t));
        best = best.max(k - v.iter().filter(|&&s| s > loose).count());
    }
    if best == 0 && !split(x, settings)?.is_null {
        best = 1;
    }
    Ok(best)
}

/// Bounds for the minimal number of generators.
#[derive(Debug, Clone, PartialEq)]
pub struct MuBounds {
    pub lower: usize,
    pub upper: Option<usize>,
    /// Description of the verified epimorphism behind `upper`.
    pub certificate: Option<String>,
}

impl MuBounds {
    pub fn to_json(&self) -> Value {
        json!({ "lower": self.lower, "upper": self.upper, "certificate": self.certificate })
    }
}

/// Relative singular-value level marking the neighbourhood of the degeneracy locus.
const CLUSTER_LEVEL: f64 = 0.05;
/// Cluster points sampled when building a cluster's subspace.
const CLUSTER_SAMPLE: usize = 512;

/// Upper bound from a piecewise-constant generator map: the near-degenerate
/// fibers are grouped into grid-connected clusters, each cluster gets the
/// span of its weak left singular directions, and `[α | f]` is checked to
/// be onto with a uniformly bounded right inverse.
pub fn mu_bounds(x: &VirtualModule, settings: &Settings) -> Result<MuBounds> {
    let lower = mu_lower(x, settings)?;
    let k = x.rank_dst();
    if split(x, settings)?.is_null {
        return Ok(MuBounds { lower, upper: Some(0), certificate: Some("null module".into()) });
    }
    let grid = settings.grid(x.num_vars())?;
    let sv = symbol_singular_values(x.alpha(), &grid)?;
    let sigma_max = sv.iter().flat_map(|v| v.last().copied()).fold(0.0, f64::max);
    let level = CLUSTER_LEVEL * sigma_max.max(1.0);
    let corank_at = |v: &[f64]| k - v.iter().filter(|&&s| s > level).count();
    let flagged: Vec<bool> = sv.iter().map(|v| corank_at(v) > 0).collect();

    let mut clusters = grid_clusters(&grid, &flagged);
    // a degeneracy between lattice points may leave no flagged fiber nearby
    let probe = probe_infimum(&grid, |t| sigma_from_top(&x.alpha().eval(t), k), 16);
    let mut extra: Vec<Vec<f64>> = Vec::new();
    for (t, val) in &probe.refined {
        if *val <= level && !flagged[grid.nearest_index(t)] {
            extra.push(t.clone());
        }
    }

    let mut centers: Vec<Vec<f64>> = Vec::new();
    let mut bases: Vec<DMatrix<Complex64>> = Vec::new();
    for c in clusters.iter_mut() {
        let step = c.len().div_ceil(CLUSTER_SAMPLE).max(1);
        let pts: Vec<Vec<f64>> = c.iter().step_by(step).map(|&i| grid.angles(i)).collect();
        bases.push(weak_span(x.alpha(), &pts, level));
        centers.extend(c.iter().map(|&i| grid.angles(i)));
    }
    let mut owner: Vec<usize> = clusters.iter().enumerate().flat_map(|(ci, c)| vec![ci; c.len()]).collect();
    for t in extra {
        bases.push(weak_span(x.alpha(), std::slice::from_ref(&t), level));
        owner.push(bases.len() - 1);
        centers.push(t);
    }
    let m = bases.iter().map(|b| b.ncols()).max().unwrap_or(0);
    if m == 0 || m < lower {
        return Ok(MuBounds { lower, upper: None, certificate: None });
    }
    let pieces: Vec<DMatrix<Complex64>> = owner
        .iter()
        .map(|&ci| {
            let mut p = DMatrix::zeros(k, m);
            p.view_mut((0, 0), bases[ci].shape()).copy_from(&bases[ci]);
            p
        })
        .collect();
    let f = Symbol::piecewise(centers, pieces)?;
    let free = VirtualModule::projective(x.num_vars(), m);
    let morphism = EcatMorphism::new(free, x.clone(), f, None)?;
    let margin = epi_margin(&morphism, settings)?;
    if margin > settings.invertible_tol {
        let certificate = format!(
            "piecewise-constant map from {m} generator(s) over {} cluster(s); inf sigma_{k}([alpha | f]) = {margin:.3e}",
            bases.len()
        );
        Ok(MuBounds { lower, upper: Some(m), certificate: Some(certificate) })
    } else {
        Ok(MuBounds { lower, upper: None, certificate: None })
    }
}

/// Grid-connected components (periodic adjacency) of the flagged points.
fn grid_clusters(grid: &TorusGrid, flagged: &[bool]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; flagged.len()];
    let mut out = Vec::new();
    for start in 0..flagged.len() {
        if !flagged[start] || seen[start] {
            continue;
        }
        let mut comp = Vec::new();
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            comp.push(i);
            for j in grid.neighbors(i) {
                if flagged[j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Orthonormal basis of the span of the left singular directions with
/// singular value `<= level` at the given points.
fn weak_span(alpha: &Symbol, pts: &[Vec<f64>], level: f64) -> DMatrix<Complex64> {
    let k = alpha.rows();
    let cols: Vec<DMatrix<Complex64>> = pts
        .par_iter()
        .map(|t| {
            let a = alpha.eval(t);
            let sv = fiber_singular_values(&a);
            let weak = k - sv.iter().filter(|&&s| s > level).count();
            small_left_singular_basis(&a, weak)
        })
        .collect();
    let total: usize = cols.iter().map(|c| c.ncols()).sum();
    if total == 0 {
        return DMatrix::zeros(k, 0);
    }
    let mut stack = DMatrix::zeros(k, total);
    let mut c0 = 0;
    for c in &cols {
        stack.view_mut((0, c0), c.shape()).copy_from(c);
        c0 += c.ncols();
    }
    let svd = stack.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > 1e-6 * smax).collect();
    let mut out = DMatrix::zeros(k, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        out.set_column(j, &u.column(i));
    }
    out
}

/// `Y_i = ([∂_{i+1} | ∂_i*]: C_{i+1} ⊕ C_{i−1} → C_i)`, isomorphic to
/// `H_i ⊕ T(H_{i−1})` up to torsion duality of the second summand.
pub fn morse_module(c: &FreeChainComplex, i: usize) -> Result<VirtualModule> {
    let up = c.boundary(i + 1);
    let down = c.boundary(i).adjoint();
    let alpha = LaurentMatrix::hstack(&[&up, &down])?;
    Ok(VirtualModule::from_laurent(alpha))
}

/// Morse lower bound for one index.
#[derive(Debug, Clone, PartialEq)]
pub struct MorseEntry {
    pub index: usize,
    pub mu_lower: usize,
    pub mu_upper: Option<usize>,
    /// `⌈μ_lower / d⌉`.
    pub bound: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MorseReport {
    pub rep_dim: usize,
    pub entries: Vec<MorseEntry>,
}

impl MorseReport {
    pub fn bounds(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.bound).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "rep_dim": self.rep_dim,
            "indices": self.entries.iter().map(|e| json!({
                "index": e.index,
                "mu_lower": e.mu_lower,
                "mu_upper": e.mu_upper,
                "bound": e.bound,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Lower bounds on the number of critical points of each index for a Morse
/// function on the complex, with coefficients twisted by `rho`.
pub fn morse_bounds(c: &FreeChainComplex, rho: &UnitaryRep, settings: &Settings) -> Result<MorseReport> {
    validate(c).into_result()?;
    let t = twist(c, rho)?;
    let d = rho.dim();
    let entries = (0..=t.top())
        .map(|i| {
            let y = morse_module(&t, i)?;
            let mu = mu_lower(&y, settings)?;
            Ok(MorseEntry { index: i, mu_lower: mu, mu_upper: None, bound: mu.div_ceil(d) })
        })
        .collect::<Result<_>>()?;
    Ok(MorseReport { rep_dim: d, entries })
}

/// Degree-zero behaviour for an amenable infinite group: `H_0` carries
/// torsion and `H^0` vanishes.
#[derive(Debug, Clone, PartialEq)]
pub struct BrooksReport {
    pub h0_torsion_nontrivial: bool,
    pub h0_dual_betti: f64,
}

impl BrooksReport {
    pub fn passed(&self) -> bool {
        self.h0_torsion_nontrivial && self.h0_dual_betti == 0.0
    }
}

pub fn brooks_h0_check(c: &FreeChainComplex, settings: &Settings) -> Result<BrooksReport> {
    let h0 = homology(c, 0, settings)?;
    let coh0 = cohomology(c, 0, settings)?;
    Ok(BrooksReport { h0_torsion_nontrivial: !h0.torsion_is_trivial(), h0_dual_betti: coh0.betti })
}
