//! Inputs shared by the benchmarks.

use std::f64::consts::PI;

use l2ext_core::topology::preset_complex;
use l2ext_core::{FreeChainComplex, Settings, VirtualModule};

/// Preset complexes with the grid size each bench runs them at.
pub fn complexes() -> Vec<(&'static str, FreeChainComplex, Settings)> {
    [("circle", 4096), ("torus2", 128), ("torus3", 16)]
        .into_iter()
        .map(|(name, n)| (name, preset_complex(name).expect("preset exists").complex, Settings::with_points(n)))
        .collect()
}

/// `X_{1,0} ⊕ X_{2,2π/3}`, a module with two degeneracy points.
pub fn two_point_module() -> VirtualModule {
    VirtualModule::direct_sum(&[
        VirtualModule::abs_power(0.0, 1.0).expect("valid exponent"),
        VirtualModule::abs_power(2.0 * PI / 3.0, 2.0).expect("valid exponent"),
    ])
    .expect("same number of variables")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        assert_eq!(complexes().len(), 3);
        assert_eq!(two_point_module().rank_dst(), 2);
    }
}
