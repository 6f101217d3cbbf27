//! L-functionals `L_K(α*, α) = Tr e^{−α·a⁺} e^{α*·a} K` and the two commuting
//! actions of the Weyl algebra on them.
//!
//! Two representations are provided:
//!
//! * [`CorrelationTable`], a polynomial truncated by total degree whose
//!   monomial coefficients are tied to normal-ordered correlation functions by
//!   `c(p|q) = Tr a⁺^p a^q K = (−1)^{|p|} p! q! f_{p,q}`;
//! * [`GaussPolyL`], a polynomial prefactor times a Gaussian.
//!
//! The generators act as `b⁺ = ħα* − ∂_α`, `b = ∂_{α*}`,
//! `b̃⁺ = −ħα + ∂_{α*}`, `b̃ = −∂_α`, so that `bL_K = L_{aK}`,
//! `b⁺L_K = L_{a⁺K}`, `b̃L_K = L_{Ka⁺}` and `b̃⁺L_K = L_{Ka}`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::fock::{build_ladder, displacement_generator, FockOperator, FockSpace, Ladder, Matrix, ModeSet, C64, ONE, ZERO};
use crate::poly::{factorial, multi_indices, Monomial, Poly};

/// Label of the four generators acting on L-functionals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sigma {
    /// `b⁺`, left multiplication by `a⁺`.
    BPlus = 1,
    /// `b`, left multiplication by `a`.
    B = 2,
    /// `b̃⁺`, right multiplication by `a`.
    BTildePlus = 3,
    /// `b̃`, right multiplication by `a⁺`.
    BTilde = 4,
}

impl Sigma {
    pub const ALL: [Sigma; 4] = [Sigma::BPlus, Sigma::B, Sigma::BTildePlus, Sigma::BTilde];

    /// Position 0..4 in propagator matrices.
    pub fn index(self) -> usize {
        self as usize - 1
    }

    pub fn from_index(i: usize) -> Sigma {
        Self::ALL[i]
    }

    pub fn is_tilde(self) -> bool {
        matches!(self, Sigma::BTildePlus | Sigma::BTilde)
    }

    /// `+1` when the free generator rotates as `e^{+iωt}`, else `−1`.
    pub fn phase_sign(self) -> f64 {
        match self {
            Sigma::BPlus | Sigma::BTilde => 1.0,
            Sigma::B | Sigma::BTildePlus => -1.0,
        }
    }

    /// Fock-space ladder operator this generator multiplies by.
    pub fn ladder(self) -> Ladder {
        match self {
            Sigma::BPlus | Sigma::BTilde => Ladder::Create,
            Sigma::B | Sigma::BTildePlus => Ladder::Annihilate,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sigma::BPlus => "b+",
            Sigma::B => "b",
            Sigma::BTildePlus => "bt+",
            Sigma::BTilde => "bt",
        }
    }
}

impl fmt::Display for Sigma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Raw generator action on a polynomial, without any truncation.
pub fn apply_sigma_poly(p: &Poly, sigma: Sigma, mode: usize, hbar: f64) -> Poly {
    let h = C64::new(hbar, 0.0);
    match sigma {
        Sigma::B => p.derivative(mode, true),
        Sigma::BTilde => p.derivative(mode, false).scaled(-ONE),
        Sigma::BPlus => {
            let mut out = p.mul_var(mode, true).scaled(h);
            out.axpy(-ONE, &p.derivative(mode, false));
            out
        }
        Sigma::BTildePlus => {
            let mut out = p.mul_var(mode, false).scaled(-h);
            out.axpy(ONE, &p.derivative(mode, true));
            out
        }
    }
}

/// Common interface of L-functional representations closed under the
/// generator actions.
pub trait LFunctional: Clone {
    fn n_modes(&self) -> usize;
    fn hbar(&self) -> f64;
    fn apply_generator(&self, sigma: Sigma, mode: usize) -> Result<Self>;
    /// `L(0, 0)`, the expectation functional `⟨·⟩_L` applied to the identity.
    fn value_at_origin(&self) -> C64;
    fn scaled(&self, c: C64) -> Self;
    /// `self + c·other`. Both must share their non-polynomial structure.
    fn axpy(&self, c: C64, other: &Self) -> Result<Self>;
    /// Multiply every monomial `α^p α*^q` of the polynomial part by
    /// `exp(−i t Σ_k w_k (q_k − p_k))`.
    fn rotated(&self, weights: &[f64], t: f64) -> Self;
    fn evaluate(&self, alpha: &[C64]) -> C64;
}

/// Polynomial L-functional truncated by total degree.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTable {
    poly: Poly,
    hbar: f64,
    /// Coefficients are exact up to this total degree and absent above it;
    /// `None` marks a complete polynomial (all higher coefficients vanish).
    exact_degree: Option<usize>,
}

impl CorrelationTable {
    pub fn from_poly(poly: Poly, hbar: f64, exact_degree: Option<usize>) -> Self {
        let poly = match exact_degree {
            Some(d) => poly.truncated(d),
            None => poly,
        };
        Self { poly, hbar, exact_degree }
    }

    /// The functional `L = 1` (Fock vacuum).
    pub fn one(n_modes: usize, hbar: f64) -> Self {
        Self::from_poly(Poly::one(n_modes), hbar, None)
    }

    /// Build from normal-ordered correlations `c(p|q)` given per monomial.
    pub fn from_correlations(
        n_modes: usize,
        hbar: f64,
        exact_degree: Option<usize>,
        correlations: impl IntoIterator<Item = (Monomial, C64)>,
    ) -> Self {
        let mut poly = Poly::zero(n_modes);
        for (m, c) in correlations {
            let sign = if m.alpha_degree() % 2 == 0 { 1.0 } else { -1.0 };
            let f = c * (sign / m.factorial_weight());
            poly.add_term(m, f);
        }
        Self::from_poly(poly, hbar, exact_degree)
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn exact_degree(&self) -> Option<usize> {
        self.exact_degree
    }

    pub fn is_complete(&self) -> bool {
        self.exact_degree.is_none()
    }

    /// Degree up to which two tables can be compared.
    pub fn common_degree(&self, other: &Self) -> usize {
        match (self.exact_degree, other.exact_degree) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => self.poly.max_degree().max(other.poly.max_degree()),
        }
    }

    /// `c(p|q) = Tr a⁺^p a^q K`, where `p` are the `a⁺` (α) exponents and `q`
    /// the `a` (α*) exponents.
    pub fn correlation(&self, m: &Monomial) -> C64 {
        let sign = if m.alpha_degree() % 2 == 0 { 1.0 } else { -1.0 };
        self.poly.coefficient(m) * (sign * m.factorial_weight())
    }

    pub fn correlations(&self) -> impl Iterator<Item = (&Monomial, C64)> + '_ {
        self.poly.terms().map(move |(m, _)| (m, self.correlation(m)))
    }

    /// Largest difference of correlations up to the common exact degree.
    pub fn max_correlation_diff(&self, other: &Self) -> f64 {
        let deg = self.common_degree(other);
        let mut worst = 0.0f64;
        for (m, c) in self.correlations().chain(other.correlations()) {
            if m.degree() <= deg {
                let _ = c;
                worst = worst.max((self.correlation(m) - other.correlation(m)).norm());
            }
        }
        worst
    }

    /// Tilde involution `L̃(α*, α) = L*(−α, −α*)`, i.e. `L̃_K = L_{K⁺}`.
    pub fn involution(&self) -> Self {
        let mut poly = Poly::zero(self.poly.n_modes());
        for (m, &v) in self.poly.terms() {
            let sign = if m.degree() % 2 == 0 { 1.0 } else { -1.0 };
            poly.add_term(m.swapped(), v.conj() * sign);
        }
        Self { poly, hbar: self.hbar, exact_degree: self.exact_degree }
    }

    fn lowered_exactness(&self, by: usize, what: &str) -> Result<Option<usize>> {
        match self.exact_degree {
            None => Ok(None),
            Some(d) if d >= by => Ok(Some(d - by)),
            Some(d) => Err(Error::DegreeOverflow(format!("{what} needs {by} degrees of headroom, table is exact to {d}"))),
        }
    }

    /// Apply a raw polynomial map that consumes `headroom` degrees of exactness.
    pub(crate) fn map_poly(&self, headroom: usize, what: &str, f: impl FnOnce(&Poly) -> Poly) -> Result<Self> {
        let exact = self.lowered_exactness(headroom, what)?;
        Ok(Self::from_poly(f(&self.poly), self.hbar, exact))
    }

    /// Action of a word in the Weyl algebra.
    pub fn apply_word(&self, word: &Word, side: Side) -> Result<Self> {
        let len = word.len();
        let headroom = match side {
            Side::Sandwich => 2 * len,
            _ => len,
        };
        let hbar = self.hbar;
        self.map_poly(headroom, "word action", |p| apply_word_poly(p, word, side, hbar))
    }

    /// `⟨A⟩_L = (A L)(0, 0)`.
    pub fn expectation(&self, word: &Word) -> Result<C64> {
        Ok(self.apply_word(word, Side::Left)?.value_at_origin())
    }

    pub fn pruned(&self, tol: f64) -> Self {
        Self { poly: self.poly.clone().pruned(tol), hbar: self.hbar, exact_degree: self.exact_degree }
    }
}

fn combine_exactness(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    }
}

impl LFunctional for CorrelationTable {
    fn n_modes(&self) -> usize {
        self.poly.n_modes()
    }

    fn hbar(&self) -> f64 {
        self.hbar
    }

    fn apply_generator(&self, sigma: Sigma, mode: usize) -> Result<Self> {
        if mode >= self.n_modes() {
            return Err(Error::UnknownMode(format!("#{mode}")));
        }
        let hbar = self.hbar;
        self.map_poly(1, "generator", |p| apply_sigma_poly(p, sigma, mode, hbar))
    }

    fn value_at_origin(&self) -> C64 {
        self.poly.constant_term()
    }

    fn scaled(&self, c: C64) -> Self {
        Self { poly: self.poly.scaled(c), hbar: self.hbar, exact_degree: self.exact_degree }
    }

    fn axpy(&self, c: C64, other: &Self) -> Result<Self> {
        let mut poly = self.poly.clone();
        poly.axpy(c, &other.poly);
        Ok(Self::from_poly(poly, self.hbar, combine_exactness(self.exact_degree, other.exact_degree)))
    }

    fn rotated(&self, weights: &[f64], t: f64) -> Self {
        Self { poly: self.poly.rotated(weights, t), hbar: self.hbar, exact_degree: self.exact_degree }
    }

    fn evaluate(&self, alpha: &[C64]) -> C64 {
        self.poly.evaluate(alpha)
    }
}

/// Product of ladder symbols, written left to right.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Word(pub Vec<(usize, Ladder)>);

impl Word {
    pub fn identity() -> Self {
        Self(Vec::new())
    }

    pub fn single(mode: usize, kind: Ladder) -> Self {
        Self(vec![(mode, kind)])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dagger(&self) -> Self {
        Self(self.0.iter().rev().map(|&(m, l)| (m, l.dagger())).collect())
    }

    pub fn then(&self, other: &Word) -> Self {
        Self(self.0.iter().chain(&other.0).copied().collect())
    }

    /// Matrix of the word on a Fock space.
    pub fn to_operator(&self, space: &Arc<FockSpace>) -> Result<FockOperator> {
        let mut op = FockOperator::identity(space);
        for &(m, l) in &self.0 {
            op = op.mul(&build_ladder(space, m, l)?);
        }
        Ok(op)
    }
}

/// Which action of a Weyl word to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `L_K ↦ L_{AK}`.
    Left,
    /// `L_K ↦ L_{KA⁺}`.
    Tilde,
    /// `L_K ↦ L_{AKA⁺}`.
    Sandwich,
}

fn apply_word_poly(p: &Poly, word: &Word, side: Side, hbar: f64) -> Poly {
    let left = |mut q: Poly| {
        for &(m, l) in word.0.iter().rev() {
            let s = match l {
                Ladder::Create => Sigma::BPlus,
                Ladder::Annihilate => Sigma::B,
            };
            q = apply_sigma_poly(&q, s, m, hbar);
        }
        q
    };
    let tilde = |mut q: Poly| {
        for &(m, l) in word.0.iter().rev() {
            let s = match l {
                Ladder::Create => Sigma::BTildePlus,
                Ladder::Annihilate => Sigma::BTilde,
            };
            q = apply_sigma_poly(&q, s, m, hbar);
        }
        q
    };
    match side {
        Side::Left => left(p.clone()),
        Side::Tilde => tilde(p.clone()),
        Side::Sandwich => tilde(left(p.clone())),
    }
}

/// Correlation table of a trace-class operator on a truncated Fock space.
///
/// A degree cut of `2·n_max` or more captures every non-zero correlation, so
/// the table is marked complete.
pub fn l_from_density(k: &FockOperator, degree_cut: usize) -> Result<CorrelationTable> {
    let space = k.space();
    let n_max = space.n_max();
    if degree_cut > 2 * n_max {
        return Err(Error::DegreeTooLarge { requested: degree_cut, limit: 2 * n_max });
    }
    let m = space.n_modes();
    let side_max = degree_cut.min(n_max);
    let indices = multi_indices(m, side_max);
    let ladders: Vec<FockOperator> = (0..m).map(|j| build_ladder(space, j, Ladder::Annihilate)).collect::<Result<_>>()?;
    // a^p for every multi-index with |p| <= side_max, built incrementally.
    let mut powers: Vec<Matrix> = Vec::with_capacity(indices.len());
    for idx in &indices {
        let pos = idx.iter().position(|&e| e > 0);
        let mat = match pos {
            None => Matrix::identity(space.dim(), space.dim()),
            Some(j) => {
                let mut prev = idx.clone();
                prev[j] -= 1;
                let pi = indices.iter().position(|v| *v == prev).expect("prefix present");
                ladders[j].matrix() * &powers[pi]
            }
        };
        powers.push(mat);
    }
    let with_k: Vec<Matrix> = powers.iter().map(|p| p * k.matrix()).collect();
    let mut table = Vec::new();
    for (ip, p) in indices.iter().enumerate() {
        let dp: usize = p.iter().map(|&e| e as usize).sum();
        for (iq, q) in indices.iter().enumerate() {
            let dq: usize = q.iter().map(|&e| e as usize).sum();
            if dp + dq > degree_cut {
                continue;
            }
            // Tr (a^p)† a^q K = Σ conj(A)∘B
            let c: C64 = powers[ip].iter().zip(with_k[iq].iter()).map(|(x, y)| x.conj() * y).sum();
            if c != ZERO {
                table.push((Monomial::new(p.clone(), q.clone()), c));
            }
        }
    }
    let exact = if degree_cut >= 2 * n_max { None } else { Some(degree_cut) };
    Ok(CorrelationTable::from_correlations(m, space.hbar(), exact, table))
}

/// `Tr e^{−α·a⁺} e^{α*·a} K` by direct matrix products on the truncated space.
pub fn trace_functional(k: &FockOperator, alpha: &[C64]) -> Result<C64> {
    let space = k.space();
    let zero = C64::new(0.0, 0.0);
    let create = displacement_generator(space, alpha, -ONE, zero)?;
    let annihilate = displacement_generator(space, alpha, zero, ONE)?;
    Ok((create.exp() * annihilate.exp() * k.matrix()).trace())
}

/// Gaussian functional `exp(α*Aα* + α*Bα + αCα)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianL {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
}

impl GaussianL {
    pub fn unit(n_modes: usize) -> Self {
        let z = Matrix::zeros(n_modes, n_modes);
        Self { a: z.clone(), b: z.clone(), c: z }
    }

    /// Diagonal stationary form `exp(−Σ n(k) α*_k α_k)`.
    pub fn diagonal(occupations: &[f64]) -> Self {
        let m = occupations.len();
        let mut g = Self::unit(m);
        for (k, &n) in occupations.iter().enumerate() {
            g.b[(k, k)] = C64::new(-n, 0.0);
        }
        g
    }

    pub fn n_modes(&self) -> usize {
        self.b.nrows()
    }

    /// `n(k)` when `A = C = 0` and `B` is diagonal.
    pub fn occupations(&self) -> Option<Vec<f64>> {
        let m = self.n_modes();
        let tol = 1e-14;
        if self.a.norm() > tol || self.c.norm() > tol {
            return None;
        }
        for i in 0..m {
            for j in 0..m {
                if i != j && self.b[(i, j)].norm() > tol {
                    return None;
                }
            }
            if self.b[(i, i)].im.abs() > tol {
                return None;
            }
        }
        Some((0..m).map(|k| -self.b[(k, k)].re).collect())
    }

    /// Quadratic form `Q` as a polynomial.
    pub fn exponent(&self) -> Poly {
        let m = self.n_modes();
        let mut q = Poly::zero(m);
        for i in 0..m {
            for j in 0..m {
                let mut ac = vec![0u8; m];
                ac[i] += 1;
                ac[j] += 1;
                q.add_term(Monomial::new(vec![0; m], ac.clone()), self.a[(i, j)]);
                q.add_term(Monomial::new(ac, vec![0; m]), self.c[(i, j)]);
                let mut al = vec![0u8; m];
                let mut alc = vec![0u8; m];
                al[j] += 1;
                alc[i] += 1;
                q.add_term(Monomial::new(al, alc), self.b[(i, j)]);
            }
        }
        q
    }

    /// `∂Q/∂α*_k` (`conj = true`) or `∂Q/∂α_k`.
    pub fn gradient(&self, k: usize, conj: bool) -> Poly {
        self.exponent().derivative(k, conj)
    }

    pub fn evaluate(&self, alpha: &[C64]) -> C64 {
        self.exponent().evaluate(alpha).exp()
    }

    /// Taylor polynomial of `exp(Q)` through total degree `degree`.
    pub fn to_table(&self, degree: usize, hbar: f64) -> CorrelationTable {
        let m = self.n_modes();
        let q = self.exponent();
        let mut sum = Poly::one(m);
        let mut term = Poly::one(m);
        for j in 1..=degree / 2 {
            term = term.mul(&q).truncated(degree).scaled(C64::new(1.0 / j as f64, 0.0));
            sum.axpy(ONE, &term);
        }
        CorrelationTable::from_poly(sum, hbar, Some(degree))
    }
}

/// Bose occupation `n = ħ / (e^{ħ(ω−μ)/T} − 1)`.
pub fn bose_occupation(omega: f64, temperature: f64, mu: f64, hbar: f64) -> f64 {
    hbar / (hbar * (omega - mu) / temperature).exp_m1()
}

/// Equilibrium functional `exp(−Σ n(k) α*_k α_k)` of the free Hamiltonian.
pub fn equilibrium_gaussian(modes: &ModeSet, temperature: f64, mu: f64, hbar: f64) -> Result<GaussianL> {
    if !(temperature > 0.0) {
        return Err(Error::InvalidParameter { name: "temperature", reason: format!("{temperature} is not > 0") });
    }
    if !(hbar > 0.0) {
        return Err(Error::InvalidParameter { name: "hbar", reason: format!("{hbar} is not > 0") });
    }
    let mut n = Vec::with_capacity(modes.len());
    for k in 0..modes.len() {
        let gap = modes.omega(k) - mu;
        if !(gap > 0.0) {
            return Err(Error::Gapless { mode: k, gap });
        }
        n.push(bose_occupation(modes.omega(k), temperature, mu, hbar));
    }
    Ok(GaussianL::diagonal(&n))
}

/// `P(α*, α)·exp(Q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussPolyL {
    pub gaussian: GaussianL,
    pub poly: Poly,
    pub hbar: f64,
}

impl GaussPolyL {
    pub fn new(gaussian: GaussianL, hbar: f64) -> Self {
        let m = gaussian.n_modes();
        Self { gaussian, poly: Poly::one(m), hbar }
    }

    pub fn with_prefactor(gaussian: GaussianL, poly: Poly, hbar: f64) -> Self {
        Self { gaussian, poly, hbar }
    }

    /// Taylor table of the product through `degree`.
    pub fn to_table(&self, degree: usize) -> CorrelationTable {
        let g = self.gaussian.to_table(degree, self.hbar);
        let prod = self.poly.mul(g.poly()).truncated(degree);
        CorrelationTable::from_poly(prod, self.hbar, Some(degree))
    }
}

impl LFunctional for GaussPolyL {
    fn n_modes(&self) -> usize {
        self.gaussian.n_modes()
    }

    fn hbar(&self) -> f64 {
        self.hbar
    }

    fn apply_generator(&self, sigma: Sigma, mode: usize) -> Result<Self> {
        if mode >= self.n_modes() {
            return Err(Error::UnknownMode(format!("#{mode}")));
        }
        let h = C64::new(self.hbar, 0.0);
        // ∂(P e^Q) = (∂P + P ∂Q) e^Q
        let d = |conj: bool| {
            let mut out = self.poly.derivative(mode, conj);
            out.axpy(ONE, &self.poly.mul(&self.gaussian.gradient(mode, conj)));
            out
        };
        let poly = match sigma {
            Sigma::B => d(true),
            Sigma::BTilde => d(false).scaled(-ONE),
            Sigma::BPlus => {
                let mut out = self.poly.mul_var(mode, true).scaled(h);
                out.axpy(-ONE, &d(false));
                out
            }
            Sigma::BTildePlus => {
                let mut out = self.poly.mul_var(mode, false).scaled(-h);
                out.axpy(ONE, &d(true));
                out
            }
        };
        Ok(Self { gaussian: self.gaussian.clone(), poly, hbar: self.hbar })
    }

    fn value_at_origin(&self) -> C64 {
        self.poly.constant_term()
    }

    fn scaled(&self, c: C64) -> Self {
        Self { gaussian: self.gaussian.clone(), poly: self.poly.scaled(c), hbar: self.hbar }
    }

    fn axpy(&self, c: C64, other: &Self) -> Result<Self> {
        if self.gaussian != other.gaussian {
            return Err(Error::Dimension("Gaussian factors differ".into()));
        }
        let mut poly = self.poly.clone();
        poly.axpy(c, &other.poly);
        Ok(Self { gaussian: self.gaussian.clone(), poly, hbar: self.hbar })
    }

    /// Only the prefactor is rotated; the Gaussian must be invariant under
    /// the same rotation (true for the diagonal stationary form).
    fn rotated(&self, weights: &[f64], t: f64) -> Self {
        Self { gaussian: self.gaussian.clone(), poly: self.poly.rotated(weights, t), hbar: self.hbar }
    }

    fn evaluate(&self, alpha: &[C64]) -> C64 {
        self.poly.evaluate(alpha) * self.gaussian.evaluate(alpha)
    }
}

/// Smallest eigenvalue of the Gram matrix `G_ij = ⟨A_i⁺ A_j⟩_L`.
pub fn positivity_residual(l: &CorrelationTable, probes: &[Word]) -> Result<f64> {
    let r = probes.len();
    if r == 0 {
        return Ok(0.0);
    }
    let mut g = Matrix::zeros(r, r);
    for i in 0..r {
        for j in 0..r {
            g[(i, j)] = l.expectation(&probes[i].dagger().then(&probes[j]))?;
        }
    }
    let herm = (&g + g.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    Ok(eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min))
}

/// Coefficient vector helper for tests and the CLI: `(α-exponents, α*-exponents, c)`.
pub fn correlation_rows(l: &CorrelationTable) -> Vec<(Vec<u8>, Vec<u8>, C64)> {
    l.correlations().map(|(m, c)| (m.alpha.clone(), m.alpha_conj.clone(), c)).collect()
}

/// Normalised vector as a density matrix.
pub fn pure_density(space: &Arc<FockSpace>, psi: &DVector<C64>) -> FockOperator {
    FockOperator::outer(space, psi, psi)
}

/// `m!`-weighted thermal moment `c(k^m|k^m) = m! n^m` of a single mode.
pub fn thermal_moment(m: usize, n: f64) -> f64 {
    factorial(m) * n.powi(m as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, thermal_state, vacuum_projector};

    fn single(n_max: usize, hbar: f64, omega: f64) -> Arc<FockSpace> {
        FockSpace::new(ModeSet::from_frequencies(&[omega]).unwrap(), n_max, hbar).unwrap()
    }

    fn mono(p: u8, q: u8) -> Monomial {
        Monomial::new(vec![p], vec![q])
    }

    #[test]
    fn vacuum_functional_is_one() {
        let s = single(6, 1.0, 1.0);
        let l = l_from_density(&vacuum_projector(&s), 5).unwrap();
        assert_eq!(l.poly().len(), 1);
        assert!((l.value_at_origin() - ONE).norm() < 1e-15);
        assert!((l.evaluate(&[C64::new(0.4, -0.2)]) - ONE).norm() < 1e-15);
    }

    #[test]
    fn coherent_functional() {
        let s = single(20, 1.0, 1.0);
        let beta = C64::new(0.2, 0.1);
        let l = l_from_density(&coherent_state(&s, &[beta]).unwrap(), 6).unwrap();
        // c(p|q) = conj(β)^p β^q; L = exp(α*β − αβ*)
        for p in 0..=3u8 {
            for q in 0..=3u8 {
                let expect = beta.conj().powu(p as u32) * beta.powu(q as u32);
                assert!((l.correlation(&mono(p, q)) - expect).norm() < 1e-9);
            }
        }
        let a = C64::new(0.3, -0.1);
        let exact = (a.conj() * beta - a * beta.conj()).exp();
        assert!((l.evaluate(&[a]) - exact).norm() < 1e-6);
    }

    #[test]
    fn thermal_moments() {
        let s = single(30, 1.0, 1.0);
        let k = thermal_state(&s, 1.0, 0.0).unwrap();
        let l = l_from_density(&k, 6).unwrap();
        let n = bose_occupation(1.0, 1.0, 0.0, 1.0);
        for m in 0..=3u8 {
            let c = l.correlation(&mono(m, m));
            assert!((c.re - thermal_moment(m as usize, n)).abs() < 1e-9 * (1.0 + c.re));
        }
        assert!(l.correlation(&mono(1, 0)).norm() < 1e-15);
    }

    #[test]
    fn evaluation_at_origin_is_trace() {
        let s = single(5, 1.0, 1.0);
        let k = thermal_state(&s, 0.7, 0.0).unwrap();
        let l = l_from_density(&k, 4).unwrap();
        assert!((l.evaluate(&[ZERO]) - k.trace()).norm() < 1e-14);
    }

    #[test]
    fn thermal_value_against_direct_trace() {
        let s = single(30, 1.0, 1.0);
        let k = thermal_state(&s, 1.0, 0.0).unwrap();
        let n = bose_occupation(1.0, 1.0, 0.0, 1.0);
        assert!((n - 0.5819767).abs() < 1e-7);
        let a = [C64::new(0.3, 0.0)];
        let direct = trace_functional(&k, &a).unwrap();
        let gauss = GaussPolyL::new(GaussianL::diagonal(&[n]), 1.0).evaluate(&a);
        assert!((gauss.re - 0.948970).abs() < 1e-6);
        assert!((direct - gauss).norm() / gauss.norm() < 1e-6);
    }

    #[test]
    fn equilibrium_parameters() {
        let m = ModeSet::from_frequencies(&[1.0]).unwrap();
        let g = equilibrium_gaussian(&m, 1.0, 0.0, 1.0).unwrap();
        assert!((g.occupations().unwrap()[0] - 1.0 / (1f64.exp() - 1.0)).abs() < 1e-15);
        let g2 = equilibrium_gaussian(&m, 2.0, 0.0, 2.0).unwrap();
        assert!((g2.occupations().unwrap()[0] - 2.0 / (1f64.exp() - 1.0)).abs() < 1e-15);
        let cold = equilibrium_gaussian(&m, 1e-3, 0.0, 1.0).unwrap();
        assert!(cold.occupations().unwrap()[0] < 1e-300);
        assert!(matches!(equilibrium_gaussian(&m, 1.0, 1.0, 1.0), Err(Error::Gapless { .. })));
        assert!(equilibrium_gaussian(&m, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn creation_on_unit_functional() {
        let l = CorrelationTable::one(1, 1.0);
        let b = l.apply_generator(Sigma::B, 0).unwrap();
        assert!(b.poly().is_empty());
        let bp = l.apply_generator(Sigma::BPlus, 0).unwrap();
        assert!((bp.poly().coefficient(&mono(0, 1)) - ONE).norm() < 1e-15);
        assert_eq!(bp.poly().len(), 1);
        let s = single(4, 1.0, 1.0);
        let ad = build_ladder(&s, 0, Ladder::Create).unwrap();
        let oracle = l_from_density(&ad.mul(&vacuum_projector(&s)), 8).unwrap();
        assert!(bp.max_correlation_diff(&oracle) < 1e-15);
    }

    #[test]
    fn degree_overflow_is_reported() {
        let l = CorrelationTable::from_poly(Poly::one(1), 1.0, Some(0));
        assert!(matches!(l.apply_generator(Sigma::B, 0), Err(Error::DegreeOverflow(_))));
        assert!(l.apply_generator(Sigma::B, 2).is_err());
    }

    #[test]
    fn physical_functionals_are_involution_fixed_points() {
        let s = single(8, 1.3, 1.0);
        let k = thermal_state(&s, 1.0, 0.0).unwrap();
        let l = l_from_density(&k, 6).unwrap();
        assert!(l.involution().max_correlation_diff(&l) < 1e-14);
    }

    #[test]
    fn involution_of_non_hermitian_operator() {
        let s = single(4, 1.0, 1.0);
        let ad = build_ladder(&s, 0, Ladder::Create).unwrap();
        let k = ad.mul(&vacuum_projector(&s));
        let l = l_from_density(&k, 8).unwrap();
        let ld = l_from_density(&k.adjoint(), 8).unwrap();
        assert!(l.involution().max_correlation_diff(&ld) < 1e-15);
        assert!(l.involution().max_correlation_diff(&l) > 0.1);
    }

    #[test]
    fn sandwich_with_creation_on_vacuum() {
        let l = CorrelationTable::one(1, 1.0);
        let w = Word::single(0, Ladder::Create);
        let s = l.apply_word(&w, Side::Sandwich).unwrap();
        assert!((s.value_at_origin() - ONE).norm() < 1e-15);
        let l2 = CorrelationTable::one(1, 2.5);
        let s2 = l2.apply_word(&w, Side::Sandwich).unwrap();
        assert!((s2.value_at_origin().re - 2.5).abs() < 1e-15);
        let id = l.apply_word(&Word::identity(), Side::Sandwich).unwrap();
        assert_eq!(id, l);
    }

    #[test]
    fn gram_positivity_examples() {
        let one = CorrelationTable::one(1, 1.0);
        let probes = [Word::identity(), Word::single(0, Ladder::Annihilate)];
        assert!(positivity_residual(&one, &probes).unwrap().abs() < 1e-15);

        let s = single(30, 1.0, 1.0);
        let lt = l_from_density(&thermal_state(&s, 1.0, 0.0).unwrap(), 6).unwrap();
        let probes3 = [Word::identity(), Word::single(0, Ladder::Annihilate), Word::single(0, Ladder::Create)];
        assert!(positivity_residual(&lt, &probes3).unwrap() >= -1e-12);

        let bad = CorrelationTable::from_correlations(1, 1.0, Some(2), [(mono(0, 0), ONE), (mono(1, 1), C64::new(-0.5, 0.0))]);
        assert!(positivity_residual(&bad, &probes).unwrap() < -0.1);
    }

    #[test]
    fn gauss_poly_matches_its_taylor_table() {
        let g = GaussianL::diagonal(&[0.4]);
        let gp = GaussPolyL::new(g, 1.0);
        for s in Sigma::ALL {
            let direct = gp.apply_generator(s, 0).unwrap().to_table(5);
            let via_table = gp.to_table(6).apply_generator(s, 0).unwrap();
            assert!(direct.max_correlation_diff(&via_table) < 1e-14, "{s}");
        }
    }
}
