//! Sparse polynomials in the doubled variables `(α_1..α_M, α*_1..α*_M)`.
//!
//! `α` and `α*` are treated as independent indeterminates; pointwise
//! evaluation sets `α*_k = conj(α_k)`.

use std::collections::BTreeMap;

use crate::fock::{C64, ONE, ZERO};

/// Exponents of `α^p α*^q`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub alpha: Vec<u8>,
    pub alpha_conj: Vec<u8>,
}

impl Monomial {
    pub fn one(n_modes: usize) -> Self {
        Self { alpha: vec![0; n_modes], alpha_conj: vec![0; n_modes] }
    }

    pub fn new(alpha: Vec<u8>, alpha_conj: Vec<u8>) -> Self {
        debug_assert_eq!(alpha.len(), alpha_conj.len());
        Self { alpha, alpha_conj }
    }

    pub fn alpha_degree(&self) -> usize {
        self.alpha.iter().map(|&e| e as usize).sum()
    }

    pub fn conj_degree(&self) -> usize {
        self.alpha_conj.iter().map(|&e| e as usize).sum()
    }

    pub fn degree(&self) -> usize {
        self.alpha_degree() + self.conj_degree()
    }

    /// `Π p_k! · Π q_k!`.
    pub fn factorial_weight(&self) -> f64 {
        self.alpha.iter().chain(&self.alpha_conj).map(|&e| factorial(e as usize)).product()
    }

    /// `Σ_k w_k (q_k − p_k)`.
    pub fn charge(&self, weights: &[f64]) -> f64 {
        self.alpha
            .iter()
            .zip(&self.alpha_conj)
            .zip(weights)
            .map(|((&p, &q), &w)| w * (q as f64 - p as f64))
            .sum()
    }

    pub fn swapped(&self) -> Self {
        Self { alpha: self.alpha_conj.clone(), alpha_conj: self.alpha.clone() }
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|j| j as f64).product()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    n_modes: usize,
    terms: BTreeMap<Monomial, C64>,
}

impl Poly {
    pub fn zero(n_modes: usize) -> Self {
        Self { n_modes, terms: BTreeMap::new() }
    }

    pub fn one(n_modes: usize) -> Self {
        Self::constant(n_modes, ONE)
    }

    pub fn constant(n_modes: usize, c: C64) -> Self {
        let mut p = Self::zero(n_modes);
        p.add_term(Monomial::one(n_modes), c);
        p
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> C64 {
        self.terms.get(m).copied().unwrap_or(ZERO)
    }

    pub fn add_term(&mut self, m: Monomial, c: C64) {
        if c == ZERO {
            return;
        }
        let e = self.terms.entry(m).or_insert(ZERO);
        *e += c;
    }

    pub fn constant_term(&self) -> C64 {
        self.coefficient(&Monomial::one(self.n_modes))
    }

    pub fn max_degree(&self) -> usize {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn axpy(&mut self, c: C64, other: &Poly) {
        debug_assert_eq!(self.n_modes, other.n_modes);
        for (m, &v) in &other.terms {
            self.add_term(m.clone(), c * v);
        }
    }

    pub fn scaled(&self, c: C64) -> Poly {
        Poly { n_modes: self.n_modes, terms: self.terms.iter().map(|(m, &v)| (m.clone(), v * c)).collect() }
    }

    pub fn truncated(mut self, max_degree: usize) -> Poly {
        self.terms.retain(|m, _| m.degree() <= max_degree);
        self
    }

    pub fn map_coefficients(&self, f: impl Fn(&Monomial, C64) -> C64) -> Poly {
        Poly { n_modes: self.n_modes, terms: self.terms.iter().map(|(m, &v)| (m.clone(), f(m, v))).collect() }
    }

    /// Multiply by `α_k` (`conj == false`) or `α*_k`.
    pub fn mul_var(&self, k: usize, conj: bool) -> Poly {
        let terms = self
            .terms
            .iter()
            .map(|(m, &v)| {
                let mut m = m.clone();
                if conj {
                    m.alpha_conj[k] += 1;
                } else {
                    m.alpha[k] += 1;
                }
                (m, v)
            })
            .collect();
        Poly { n_modes: self.n_modes, terms }
    }

    /// `∂/∂α_k` or `∂/∂α*_k`.
    pub fn derivative(&self, k: usize, conj: bool) -> Poly {
        let mut out = Poly::zero(self.n_modes);
        for (m, &v) in &self.terms {
            let e = if conj { m.alpha_conj[k] } else { m.alpha[k] };
            if e == 0 {
                continue;
            }
            let mut m = m.clone();
            if conj {
                m.alpha_conj[k] -= 1;
            } else {
                m.alpha[k] -= 1;
            }
            out.add_term(m, v * e as f64);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.n_modes);
        for (m1, &v1) in &self.terms {
            for (m2, &v2) in &other.terms {
                let m = Monomial {
                    alpha: m1.alpha.iter().zip(&m2.alpha).map(|(a, b)| a + b).collect(),
                    alpha_conj: m1.alpha_conj.iter().zip(&m2.alpha_conj).map(|(a, b)| a + b).collect(),
                };
                out.add_term(m, v1 * v2);
            }
        }
        out
    }

    /// Value at `(α*, α)` with independent arguments.
    pub fn evaluate_split(&self, alpha: &[C64], alpha_conj: &[C64]) -> C64 {
        self.terms
            .iter()
            .map(|(m, &v)| {
                let mut x = v;
                for k in 0..self.n_modes {
                    x *= alpha[k].powu(m.alpha[k] as u32) * alpha_conj[k].powu(m.alpha_conj[k] as u32);
                }
                x
            })
            .sum()
    }

    pub fn evaluate(&self, alpha: &[C64]) -> C64 {
        let conj: Vec<C64> = alpha.iter().map(|a| a.conj()).collect();
        self.evaluate_split(alpha, &conj)
    }

    /// Multiply each monomial by `exp(−i·t·Σ_k w_k (q_k − p_k))`.
    pub fn rotated(&self, weights: &[f64], t: f64) -> Poly {
        self.map_coefficients(|m, v| v * C64::from_polar(1.0, -t * m.charge(weights)))
    }

    /// Largest coefficient difference over monomials of degree `<= max_degree`.
    pub fn max_diff(&self, other: &Poly, max_degree: usize) -> f64 {
        let mut worst = 0.0f64;
        for (m, &v) in &self.terms {
            if m.degree() <= max_degree {
                worst = worst.max((v - other.coefficient(m)).norm());
            }
        }
        for (m, &v) in &other.terms {
            if m.degree() <= max_degree && !self.terms.contains_key(m) {
                worst = worst.max(v.norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Drop coefficients with modulus below `tol`.
    pub fn pruned(mut self, tol: f64) -> Poly {
        self.terms.retain(|_, v| v.norm() > tol);
        self
    }
}

/// All exponent vectors of length `n` with total at most `max_total`.
pub fn multi_indices(n: usize, max_total: usize) -> Vec<Vec<u8>> {
    fn rec(pos: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur[pos] = e as u8;
            rec(pos + 1, left - e, cur, out);
        }
        cur[pos] = 0;
    }
    let mut out = Vec::new();
    rec(0, max_total, &mut vec![0; n], &mut out);
    out.sort_by_key(|v| v.iter().map(|&e| e as usize).sum::<usize>());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leibniz_rule() {
        let mut p = Poly::zero(2);
        p.add_term(Monomial::new(vec![2, 0], vec![1, 1]), C64::new(0.5, 1.0));
        p.add_term(Monomial::new(vec![0, 1], vec![0, 0]), C64::new(-2.0, 0.0));
        for k in 0..2 {
            for conj in [false, true] {
                // ∂(x·p) = p·[same var] + x·∂p checked on a commuting variable pair
                let lhs = p.mul_var(k, conj).derivative(k, conj);
                let mut rhs = p.derivative(k, conj).mul_var(k, conj);
                rhs.axpy(ONE, &p);
                assert!(lhs.max_diff(&rhs, 10) < 1e-14);
            }
        }
    }

    #[test]
    fn multi_index_count() {
        // C(3+2, 2)
        assert_eq!(multi_indices(2, 3).len(), 10);
        assert_eq!(multi_indices(3, 0), vec![vec![0, 0, 0]]);
    }

    #[test]
    fn evaluation_matches_hand_value() {
        let mut p = Poly::zero(1);
        p.add_term(Monomial::new(vec![1], vec![2]), C64::new(2.0, 0.0));
        let a = C64::new(0.3, 0.4);
        let v = p.evaluate(&[a]);
        assert!((v - a * a.conj() * a.conj() * 2.0).norm() < 1e-15);
    }
}
