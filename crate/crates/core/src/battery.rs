//! Property checks run by `l2ext check`.

use std::f64::consts::PI;

use serde_json::{json, Value};

use crate::ecat::{dual_torsion, VirtualModule};
use crate::error::Result;
use crate::homology::{
    density_tolerance, dual_complex, homology_report, poincare_check, universal_coefficients_check, validate,
    FreeChainComplex,
};
use crate::settings::Settings;
use crate::spectral::density;
use crate::topology::mu_lower;

/// Grid sizes used for the integrality check.
pub const INTEGRALITY_GRIDS: [usize; 3] = [4, 8, 16];
/// Pointwise tolerance for densities that should agree exactly.
pub const EXACT_DENSITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatteryReport {
    pub checks: Vec<CheckResult>,
    /// Set when density tolerances were relaxed for a coarse grid.
    pub coarse: bool,
}

impl BatteryReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "passed": self.passed(),
            "coarse": self.coarse,
            "checks": self.checks.iter().map(|c| json!({
                "name": c.name, "passed": c.passed, "detail": c.detail,
            })).collect::<Vec<_>>(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            s.push_str(&format!("{} {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail));
        }
        if self.coarse {
            s.push_str("note: coarse grid, density tolerances relaxed\n");
        }
        s
    }
}

fn push(checks: &mut Vec<CheckResult>, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
    checks.push(CheckResult { name: name.into(), passed, detail: detail.into() });
}

/// Runs the battery on the given complexes (each labelled) plus the
/// module-level checks. Complexes violating `∂∘∂ = 0` produce an error.
pub fn run_battery(complexes: &[(&str, &FreeChainComplex)], settings: &Settings) -> Result<BatteryReport> {
    let mut checks = Vec::new();
    let mut coarse = false;
    for (label, c) in complexes {
        validate(c).into_result()?;
        let grid = settings.grid(c.num_vars())?;
        let (_, is_coarse) = density_tolerance(&grid);
        coarse |= is_coarse;

        let involutive = (1..=c.top()).all(|i| c.boundary(i).adjoint().adjoint() == c.boundary(i))
            && dual_complex(&dual_complex(c)) == **c;
        push(&mut checks, format!("{label}: adjoint involution"), involutive, "∂** = ∂ and dual∘dual = id");

        let report = homology_report(c, settings)?;
        let mut mono = true;
        for e in &report.entries {
            let f = &e.torsion_density.values;
            let bound = c.rank(e.degree + 1) as f64;
            mono &= f.windows(2).all(|w| w[0] <= w[1]) && f.iter().all(|&v| v >= 0.0 && v <= bound + 1e-12);
        }
        push(&mut checks, format!("{label}: density monotonicity"), mono, "0 <= F nondecreasing <= rank");

        let uct = universal_coefficients_check(c, settings)?;
        push(
            &mut checks,
            format!("{label}: dual-density invariance"),
            uct.passed(),
            format!("max |F(H^i) - F(H_(i-1))| = {:.2e} (tol {:.0e})", uct.max_density_diff(), uct.tolerance),
        );

        let mut vectors = Vec::new();
        for n in INTEGRALITY_GRIDS {
            vectors.push(homology_report(c, &Settings { points_per_dim: Some(n), ..settings.clone() })?.bettis());
        }
        let integral = vectors.iter().flatten().all(|b| b.fract() == 0.0);
        let stable = vectors.windows(2).all(|w| w[0] == w[1]);
        push(
            &mut checks,
            format!("{label}: betti integrality"),
            integral && stable,
            format!("betti at N = 4, 8, 16: {vectors:?}"),
        );

        if c.manifold_dim().is_some() {
            let p = poincare_check(c, settings)?;
            push(
                &mut checks,
                format!("{label}: Poincare duality"),
                p.passed(),
                format!("max density gap {:.2e} (tol {:.0e})", p.max_density_diff(), p.tolerance),
            );
        }
    }

    let modules = [
        VirtualModule::abs_power(0.0, 1.0)?,
        VirtualModule::abs_power(PI, 2.0)?,
        VirtualModule::direct_sum(&[VirtualModule::abs_power(0.0, 1.0)?, VirtualModule::abs_power(0.0, 0.5)?])?,
    ];
    let mut worst: f64 = 0.0;
    for m in &modules {
        let d = dual_torsion(m, settings)?;
        worst = worst.max(density(m, settings)?.max_abs_diff(&density(&d, settings)?)?);
    }
    push(
        &mut checks,
        "modules: torsion dual density",
        worst <= EXACT_DENSITY_TOL,
        format!("max |F(e X) - F(X)| = {worst:.2e}"),
    );

    let mut sandwich = true;
    let mut detail = Vec::new();
    for a in &modules {
        for b in &modules {
            let (ma, mb) = (mu_lower(a, settings)?, mu_lower(b, settings)?);
            let m = mu_lower(&VirtualModule::direct_sum(&[a.clone(), b.clone()])?, settings)?;
            sandwich &= ma.max(mb) <= m && m <= ma + mb;
            detail.push(format!("({ma},{mb})->{m}"));
        }
    }
    push(&mut checks, "modules: mu_lower sandwich", sandwich, detail.join(" "));

    Ok(BatteryReport { checks, coarse })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::LaurentMatrix;
    use crate::topology::preset_complex;

    #[test]
    fn battery_passes_on_circle_and_torus() {
        let circle = preset_complex("circle").unwrap().complex;
        let torus = preset_complex("torus2").unwrap().complex;
        let r = run_battery(&[("circle", &circle), ("torus2", &torus)], &Settings::with_points(64)).unwrap();
        assert!(r.passed(), "{}", r.to_text());
        assert!(!r.coarse);
    }

    #[test]
    fn coarse_grid_is_flagged() {
        let circle = preset_complex("circle").unwrap().complex;
        let r = run_battery(&[("circle", &circle)], &Settings::with_points(4)).unwrap();
        assert!(r.passed(), "{}", r.to_text());
        assert!(r.coarse);
        assert!(r.to_text().contains("coarse"));
    }

    #[test]
    fn broken_complex_is_an_error() {
        let one = LaurentMatrix::identity(1, 1);
        let bad = FreeChainComplex::new(1, vec![1, 1, 1], vec![one.clone(), one]).unwrap();
        assert!(run_battery(&[("bad", &bad)], &Settings::with_points(8)).is_err());
    }
}
