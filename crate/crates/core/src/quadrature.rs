//! Composite Gauss–Legendre rules on panels split at breakpoints.

use gauss_quad::legendre::GaussLegendre;

use crate::error::{Error, Result};
use crate::fock::C64;

/// Nodes and weights of a composite rule.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PanelRule {
    /// `per_panel` Gauss–Legendre points on each interval between consecutive
    /// sorted, deduplicated `breakpoints`, with every interval further split
    /// into pieces no longer than `max_width`.
    pub fn new(breakpoints: &[f64], per_panel: usize, max_width: f64) -> Result<Self> {
        let rule = GaussLegendre::new(per_panel.max(2))
            .map_err(|e| Error::InvalidParameter { name: "per_panel", reason: e.to_string() })?;
        let mut b: Vec<f64> = breakpoints.iter().copied().filter(|x| x.is_finite()).collect();
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for w in b.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let pieces = ((hi - lo) / max_width).ceil().max(1.0) as usize;
            let h = (hi - lo) / pieces as f64;
            for j in 0..pieces {
                let a = lo + j as f64 * h;
                for &(x, wt) in rule.as_node_weight_pairs() {
                    nodes.push(a + 0.5 * h * (x + 1.0));
                    weights.push(0.5 * h * wt);
                }
            }
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }

    pub fn integrate_complex(&self, f: impl Fn(f64) -> C64) -> C64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| f(t) * w).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_oscillatory_integrals() {
        let r = PanelRule::new(&[0.0, 1.0, 3.0], 8, 0.5).unwrap();
        assert!((r.integrate(|x| x * x) - 9.0).abs() < 1e-13);
        let c = r.integrate_complex(|x| C64::from_polar(1.0, 2.0 * x));
        let exact = (C64::from_polar(1.0, 6.0) - 1.0) / C64::new(0.0, 2.0);
        assert!((c - exact).norm() < 1e-12);
    }
}
