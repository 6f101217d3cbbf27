//! Seeded random operators for property tests and benchmarks.

use std::sync::Arc;

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::fock::{FockOperator, FockSpace, Matrix, PolyCoefficients, C64};

pub fn complex_normal<R: Rng>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Ginibre matrix supported on states with at most `max_total` quanta.
pub fn random_operator<R: Rng>(space: &Arc<FockSpace>, max_total: usize, rng: &mut R) -> FockOperator {
    let idx = space.sector_indices(max_total);
    let d = space.dim();
    let mut m = Matrix::zeros(d, d);
    for &i in &idx {
        for &j in &idx {
            m[(i, j)] = complex_normal(rng);
        }
    }
    FockOperator::from_matrix(space, m).expect("square matrix of space dimension")
}

/// Positive trace-one matrix supported on states with at most `max_total` quanta.
pub fn random_density<R: Rng>(space: &Arc<FockSpace>, max_total: usize, rng: &mut R) -> FockOperator {
    let g = random_operator(space, max_total, rng);
    let rho = g.mul(&g.adjoint());
    let tr = rho.trace();
    rho.scale(C64::new(1.0 / tr.re, 0.0))
}

/// Normalised random vector supported on states with at most `max_total` quanta.
pub fn random_state<R: Rng>(space: &Arc<FockSpace>, max_total: usize, rng: &mut R) -> DVector<C64> {
    let mut v = DVector::zeros(space.dim());
    for i in space.sector_indices(max_total) {
        v[i] = complex_normal(rng);
    }
    let n = v.norm();
    v / C64::new(n, 0.0)
}

/// Haar-distributed unitary of size `n` (QR of a Ginibre matrix with phase fix).
pub fn haar_unitary<R: Rng>(n: usize, rng: &mut R) -> Matrix {
    let z = Matrix::from_fn(n, n, |_, _| complex_normal(rng));
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// Hermitian polynomial Hamiltonian with random coefficients on the given
/// `(creators, annihilators)` shapes; each shape is paired with its adjoint.
pub fn random_hermitian_poly<R: Rng>(
    n_modes: usize,
    shapes: &[(usize, usize)],
    n_terms: usize,
    rng: &mut R,
) -> Result<PolyCoefficients> {
    let mut p = PolyCoefficients::new();
    for _ in 0..n_terms {
        for &(nc, na) in shapes {
            let cr: Vec<usize> = (0..nc).map(|_| rng.gen_range(0..n_modes)).collect();
            let an: Vec<usize> = (0..na).map(|_| rng.gen_range(0..n_modes)).collect();
            let c = complex_normal(rng);
            let mut sc = cr.clone();
            let mut sa = an.clone();
            sc.sort_unstable();
            sa.sort_unstable();
            if sc == sa {
                p.add_term(&cr, &an, C64::new(c.re, 0.0));
            } else {
                p.add_term(&cr, &an, c);
                p.add_term(&an, &cr, c.conj());
            }
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::ModeSet;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = haar_unitary(5, &mut rng);
        assert!((u.adjoint() * &u - Matrix::identity(5, 5)).norm() < 1e-12);
    }

    #[test]
    fn random_density_is_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = FockSpace::new(ModeSet::from_frequencies(&[1.0, 2.0]).unwrap(), 3, 1.0).unwrap();
        let rho = random_density(&s, 2, &mut rng);
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        assert!(rho.hermiticity_defect() < 1e-12);
        let p = random_hermitian_poly(2, &[(2, 2), (1, 0)], 3, &mut rng).unwrap();
        assert!(p.hermiticity_defect() < 1e-12);
    }
}
