//! Fixtures shared by the criterion benches.

use std::sync::Arc;

use lfun_core::fock::{build_poly_operator, thermal_state};
use lfun_core::{FockOperator, FockSpace, ModeSet, PolyCoefficients, Spectrum, C64};

pub fn space(omegas: &[f64], n_max: usize) -> Arc<FockSpace> {
    FockSpace::new(ModeSet::from_frequencies(omegas).expect("modes"), n_max, 1.0).expect("space")
}

pub fn thermal(space: &Arc<FockSpace>, temperature: f64) -> FockOperator {
    thermal_state(space, temperature, 0.0).expect("thermal state")
}

/// `H₀ + g Σ v(k) a⁺a` and its spectrum.
pub fn diagonal_spectrum(space: &Arc<FockSpace>, g: f64) -> Spectrum {
    let n = space.n_modes();
    let v: Vec<f64> = (0..n).map(|k| 1.0 - 0.2 * k as f64).collect();
    let h = PolyCoefficients::free(space.modes()).plus(&PolyCoefficients::diagonal(&v).scaled(C64::new(g, 0.0)));
    Spectrum::new(&build_poly_operator(space, &h, true).expect("operator")).expect("spectrum")
}

pub fn pairing(n_modes: usize) -> PolyCoefficients {
    let mut p = PolyCoefficients::new();
    for k in 0..n_modes {
        p.add_term(&[k, k], &[], C64::new(0.5, 0.0));
        p.add_term(&[], &[k, k], C64::new(0.5, 0.0));
    }
    p
}
