//! Spectral density functions, Novikov–Shubin invariants and capacities.
//!
//! The density of a module `(α: A′ → A)` is read off the fiberwise singular
//! values of `α`: at each grid point the number of singular values `<= λ` is
//! counted, the a.e. kernel is discounted, and the counts are averaged with
//! the uniform quadrature weight. Counts are integers, so the result is
//! monotone in `λ` and independent of summation order.

use std::f64::consts::PI;

use serde_json::{json, Value};

use crate::ecat::VirtualModule;
use crate::error::{Error, Result};
use crate::fiber::{rank_profile_from_sv, FiberSpectrum, TorusGrid};
use crate::settings::Settings;

/// Minimum number of `(ln λ, ln F)` points in a Novikov–Shubin fit.
pub const MIN_FIT_POINTS: usize = 8;
/// Upper end of the default fit window.
pub const DEFAULT_FIT_HI: f64 = 0.5;
/// Candidate dilatation constants per decade.
pub const DILATATION_STEPS_PER_DECADE: i32 = 32;
/// Relative slack of the capacity sandwich check.
pub const CAPACITY_SLACK: f64 = 0.05;

/// Sampled spectral density `λ ↦ F(λ)` of the torsion part of a module.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensity {
    pub lambdas: Vec<f64>,
    pub values: Vec<f64>,
    /// A.e. kernel dimension removed from the raw counts.
    pub kernel_offset: usize,
    /// Quadrature grid, `None` for closed forms.
    pub grid: Option<TorusGrid>,
}

impl SpectralDensity {
    /// Exact density of `X_{ν,θ}` on the given λ values.
    pub fn closed_form(nu: f64, lambdas: &[f64]) -> Result<Self> {
        let values = lambdas.iter().map(|&l| closed_form_density(nu, l)).collect::<Result<_>>()?;
        Ok(Self { lambdas: lambdas.to_vec(), values, kernel_offset: 0, grid: None })
    }

    /// Smallest nonzero value a quadrature sum can take; zero for closed forms.
    pub fn quadrature_weight(&self) -> f64 {
        self.grid.map_or(0.0, |g| g.weight())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Pointwise sum, as for a direct sum of modules. Both densities must share λ values.
    pub fn sum(&self, other: &Self) -> Result<Self> {
        if self.lambdas != other.lambdas {
            return Err(Error::Domain("densities are sampled on different lambda grids".into()));
        }
        Ok(Self {
            lambdas: self.lambdas.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            kernel_offset: self.kernel_offset + other.kernel_offset,
            grid: self.grid.or(other.grid),
        })
    }

    /// Linear interpolation in `ln λ`; `None` outside the sampled range.
    pub fn value_at(&self, lambda: f64) -> Option<f64> {
        let (first, last) = (*self.lambdas.first()?, *self.lambdas.last()?);
        if !(lambda >= first && lambda <= last) {
            return None;
        }
        let j = self.lambdas.partition_point(|&l| l < lambda);
        if self.lambdas[j] == lambda || j == 0 {
            return Some(self.values[j]);
        }
        let (l0, l1) = (self.lambdas[j - 1].ln(), self.lambdas[j].ln());
        let t = (lambda.ln() - l0) / (l1 - l0);
        Some(self.values[j - 1] + t * (self.values[j] - self.values[j - 1]))
    }

    /// Largest pointwise difference; both densities must share λ values.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.lambdas != other.lambdas {
            return Err(Error::Domain("densities are sampled on different lambda grids".into()));
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("lambda,F\n");
        for (l, v) in self.lambdas.iter().zip(&self.values) {
            s.push_str(&format!("{l:e},{v:e}\n"));
        }
        s
    }

    pub fn to_json(&self) -> Value {
        json!({
            "lambdas": self.lambdas,
            "values": self.values,
            "kernel_offset": self.kernel_offset,
            "points_per_dim": self.grid.map(|g| g.points_per_dim()),
        })
    }
}

/// `π⁻¹ cos⁻¹(1 − λ^{2/ν}/2)`, and 1 once `λ^{2/ν} >= 4`.
pub fn closed_form_density(nu: f64, lambda: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::Domain(format!("closed-form density needs nu > 0, got {nu}")));
    }
    if lambda <= 0.0 {
        return Ok(0.0);
    }
    let x = lambda.powf(2.0 / nu);
    if x >= 4.0 {
        return Ok(1.0);
    }
    // cos⁻¹(1 − x/2) = 2 sin⁻¹(√x/2), stable for small λ
    Ok(2.0 * (x.sqrt() / 2.0).asin() / PI)
}

/// Density of a fiber spectrum. Singular values at or below the rank
/// threshold count as zeros; the a.e. kernel (`domain_dim − generic rank`)
/// is subtracted so `F(λ) → 0` as `λ → 0`.
pub fn density_from_spectrum(spectrum: &FiberSpectrum, lambdas: &[f64], rank_tol: f64) -> Result<SpectralDensity> {
    if lambdas.is_empty() {
        return Err(Error::Domain("empty lambda grid".into()));
    }
    if lambdas.windows(2).any(|w| !(w[0] < w[1])) || !(lambdas[0] > 0.0) {
        return Err(Error::Domain("lambda grid must be positive and strictly ascending".into()));
    }
    let profile = rank_profile_from_sv(&spectrum.values, rank_tol)?;
    let generic = profile.generic_rank;
    let mut base: u64 = 0;
    let mut positive: Vec<f64> = Vec::new();
    for (v, &rank) in spectrum.values.iter().zip(&profile.fiber_ranks) {
        base += (generic - rank) as u64;
        positive.extend(v.iter().copied().filter(|&s| s > profile.threshold));
    }
    positive.sort_by(f64::total_cmp);
    let w = spectrum.grid.weight();
    let values = lambdas.iter().map(|&l| (base + positive.partition_point(|&s| s <= l) as u64) as f64 * w).collect();
    Ok(SpectralDensity {
        lambdas: lambdas.to_vec(),
        values,
        kernel_offset: spectrum.domain_dim - generic,
        grid: Some(spectrum.grid),
    })
}

/// Density of the torsion part of `x` on the settings' grid and λ values.
pub fn density(x: &VirtualModule, settings: &Settings) -> Result<SpectralDensity> {
    density_on(x, &settings.lambdas(), settings)
}

pub fn density_on(x: &VirtualModule, lambdas: &[f64], settings: &Settings) -> Result<SpectralDensity> {
    let grid = settings.grid(x.num_vars())?;
    let spectrum = FiberSpectrum::of_symbol(x.alpha(), &grid)?;
    density_from_spectrum(&spectrum, lambdas, settings.rank_tol)
}

/// Result of a Novikov–Shubin fit.
#[derive(Debug, Clone, PartialEq)]
pub struct NSFit {
    pub ns: f64,
    pub capacity: f64,
    pub window: (f64, f64),
    pub stderr: f64,
    pub n_points: usize,
    /// Set when the fitted slope was `<= 0` and `ns` was clamped to 0.
    pub nonpositive_slope: bool,
}

impl NSFit {
    fn trivial(window: (f64, f64)) -> Self {
        Self { ns: f64::INFINITY, capacity: 0.0, window, stderr: 0.0, n_points: 0, nonpositive_slope: false }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "ns": json_real(self.ns),
            "capacity": json_real(self.capacity),
            "window": [self.window.0, self.window.1],
            "stderr": json_real(self.stderr),
        })
    }
}

/// Infinite values serialize as the string `"inf"`.
pub fn json_real(x: f64) -> Value {
    if x.is_infinite() {
        json!("inf")
    } else {
        json!(x)
    }
}

/// Default fit window `[10·λ_res, 0.5]`, where `λ_res` is the first sampled
/// λ with `F(λ)` above twice the quadrature weight.
pub fn default_fit_window(f: &SpectralDensity) -> Option<(f64, f64)> {
    let floor = 2.0 * f.quadrature_weight();
    let i = f.values.iter().position(|&v| v > floor)?;
    Some((10.0 * f.lambdas[i], DEFAULT_FIT_HI))
}

/// Least-squares slope of `ln F` against `ln λ` over a window.
pub fn ns_estimate(f: &SpectralDensity, window: Option<(f64, f64)>) -> Result<NSFit> {
    let lo_hi =
        (f.lambdas.first().copied().unwrap_or(0.0), f.lambdas.last().copied().unwrap_or(0.0).min(DEFAULT_FIT_HI));
    if f.is_zero() {
        return Ok(NSFit::trivial(window.unwrap_or(lo_hi)));
    }
    let window = match window {
        Some(w) => w,
        None => default_fit_window(f)
            .ok_or_else(|| Error::Fit("density never rises above the quadrature floor; refine the grid".into()))?,
    };
    let in_window = |l: f64| l >= window.0 && l <= window.1;
    if f.lambdas.iter().zip(&f.values).all(|(&l, &v)| !in_window(l) || v == 0.0) {
        return Ok(NSFit::trivial(window));
    }
    let pts: Vec<(f64, f64)> = f
        .lambdas
        .iter()
        .zip(&f.values)
        .filter(|(&l, &v)| in_window(l) && v > 0.0)
        .map(|(&l, &v)| (l.ln(), v.ln()))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::Fit(format!(
            "only {} usable points in fit window [{:e}, {:e}], need {MIN_FIT_POINTS}",
            pts.len(),
            window.0,
            window.1
        )));
    }
    let (slope, stderr) = least_squares_slope(&pts);
    let (ns, capacity, nonpositive_slope) =
        if slope <= 0.0 { (0.0, f64::INFINITY, true) } else { (slope, 1.0 / slope, false) };
    Ok(NSFit { ns, capacity, window, stderr, n_points: pts.len(), nonpositive_slope })
}

fn least_squares_slope(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let resid: f64 = pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
    let stderr = if pts.len() > 2 { (resid / (n - 2.0) / sxx).sqrt() } else { f64::INFINITY };
    (slope, stderr)
}

/// Novikov–Shubin fit of a module's density with the settings' window.
pub fn ns_of(x: &VirtualModule, settings: &Settings) -> Result<NSFit> {
    ns_estimate(&density(x, settings)?, settings.fit_window)
}

pub fn capacity_of(x: &VirtualModule, settings: &Settings) -> Result<f64> {
    Ok(ns_of(x, settings)?.capacity)
}

/// Smallest `C = 10^{k/32}`, `1 <= k`, with `C <= c_max`, such that
/// `F(λ) <= G(Cλ)` and `G(λ) <= F(Cλ)` on the first decade of the common
/// λ range. Points where `Cλ` leaves the sampled range are skipped.
pub fn dilatationally_equivalent(f: &SpectralDensity, g: &SpectralDensity, c_max: f64) -> Option<f64> {
    let lo = f.lambdas.first()?.max(*g.lambdas.first()?);
    let hi = f.lambdas.last()?.min(*g.lambdas.last()?);
    if !(lo < hi) {
        return None;
    }
    let eps = (10.0 * lo).min(hi);
    let holds = |c: f64| bounded_by(f, g, c, lo, eps) && bounded_by(g, f, c, lo, eps);
    (1..)
        .map(|k| 10f64.powf(k as f64 / DILATATION_STEPS_PER_DECADE as f64))
        .take_while(|&c| c <= c_max * (1.0 + 1e-12))
        .find(|&c| holds(c))
}

/// `a(λ) <= b(cλ)` at every sample of `a` in `[lo, eps]`.
fn bounded_by(a: &SpectralDensity, b: &SpectralDensity, c: f64, lo: f64, eps: f64) -> bool {
    a.lambdas.iter().zip(&a.values).filter(|(&l, _)| l >= lo && l <= eps).all(|(&l, &v)| match b.value_at(c * l) {
        Some(w) => v <= w + 1e-15,
        None => true,
    })
}

/// Capacity sandwich `max(c_sub, c_quot) <= c_total <= c_sub + c_quot`
/// for a short exact sequence, with 5% slack on each side.
pub fn exact_sequence_capacity_check(c_sub: f64, c_total: f64, c_quot: f64) -> bool {
    let k = 1.0 + CAPACITY_SLACK;
    let left = c_sub.max(c_quot) <= c_total * k || c_sub.max(c_quot) == c_total;
    let right = c_total <= (c_sub + c_quot) * k || c_total == c_sub + c_quot;
    left && right
}
