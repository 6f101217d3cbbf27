//! Truncated multimode bosonic Fock spaces with ħ-scaled ladder operators.
//!
//! Everything here is dense and exact up to the total-particle-number cutoff.
//! The ladder operators satisfy `[a_k, a⁺_l] = ħ δ_kl` on every state whose
//! total occupation is strictly below `n_max`; the top sector violates the
//! relation because `a⁺` maps it out of the space.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Matrix = DMatrix<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub label: String,
    /// Lattice momentum in `[0, 2π)`, or 0 for modes without one.
    pub momentum: f64,
    pub omega: f64,
}

/// Ordered set of bosonic modes together with their dispersion.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    modes: Vec<Mode>,
    lattice: Option<usize>,
}

impl ModeSet {
    pub fn new(modes: Vec<Mode>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidModeSet("no modes".into()));
        }
        for (i, m) in modes.iter().enumerate() {
            if !m.omega.is_finite() || !m.momentum.is_finite() {
                return Err(Error::InvalidModeSet(format!("mode `{}` not finite", m.label)));
            }
            if modes[..i].iter().any(|o| o.label == m.label) {
                return Err(Error::InvalidModeSet(format!("duplicate label `{}`", m.label)));
            }
        }
        Ok(Self { modes, lattice: None })
    }

    /// Modes with the given frequencies, labelled `m0, m1, ...`.
    pub fn from_frequencies(omegas: &[f64]) -> Result<Self> {
        Self::new(
            omegas
                .iter()
                .enumerate()
                .map(|(i, &omega)| Mode { label: format!("m{i}"), momentum: 0.0, omega })
                .collect(),
        )
    }

    /// Periodic 1-D lattice of `size` sites: momenta `2πj/size`, labels `k0, k1, ...`.
    pub fn lattice(size: usize, dispersion: impl Fn(f64) -> f64) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidModeSet("empty lattice".into()));
        }
        let modes = (0..size)
            .map(|j| {
                let k = 2.0 * PI * j as f64 / size as f64;
                Mode { label: format!("k{j}"), momentum: k, omega: dispersion(k) }
            })
            .collect();
        let mut set = Self::new(modes)?;
        set.lattice = Some(size);
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn omega(&self, mode: usize) -> f64 {
        self.modes[mode].omega
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.omega).collect()
    }

    pub fn lattice_size(&self) -> Option<usize> {
        self.lattice
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| m.label == label)
            .ok_or_else(|| Error::UnknownMode(label.to_string()))
    }

    pub fn check(&self, mode: usize) -> Result<()> {
        if mode < self.modes.len() {
            Ok(())
        } else {
            Err(Error::UnknownMode(format!("#{mode}")))
        }
    }

    /// Lattice index of `-k` (mod 2π). Non-lattice sets map every mode to itself.
    pub fn negate(&self, mode: usize) -> usize {
        match self.lattice {
            Some(l) => (l - mode % l) % l,
            None => mode,
        }
    }

    /// Index of `k_1 + ... + k_n (mod 2π)` on the lattice.
    pub fn momentum_sum(&self, modes: &[usize]) -> Option<usize> {
        self.lattice.map(|l| modes.iter().sum::<usize>() % l)
    }
}

/// Fock space truncated by total particle number.
#[derive(Debug, Clone)]
pub struct FockSpace {
    modes: ModeSet,
    n_max: usize,
    hbar: f64,
    states: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
}

impl FockSpace {
    pub fn new(modes: ModeSet, n_max: usize, hbar: f64) -> Result<Arc<Self>> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidParameter { name: "hbar", reason: format!("{hbar} is not > 0") });
        }
        if n_max > u8::MAX as usize {
            return Err(Error::InvalidParameter { name: "n_max", reason: "cutoff above 255".into() });
        }
        let mut states = Vec::new();
        for total in 0..=n_max {
            let mut occ = vec![0u8; modes.len()];
            compositions(total, 0, &mut occ, &mut states);
        }
        let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(Arc::new(Self { modes, n_max, hbar, states, index }))
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, i: usize) -> &[u8] {
        &self.states[i]
    }

    pub fn states(&self) -> &[Vec<u8>] {
        &self.states
    }

    pub fn index_of(&self, occupation: &[u8]) -> Option<usize> {
        self.index.get(occupation).copied()
    }

    pub fn total(&self, i: usize) -> usize {
        self.states[i].iter().map(|&n| n as usize).sum()
    }

    /// Basis indices with total occupation at most `max_total`.
    pub fn sector_indices(&self, max_total: usize) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.total(i) <= max_total).collect()
    }

    pub fn vacuum_index(&self) -> usize {
        0
    }

    /// Unit vector of the occupation state `occupation`, if it lies inside the cutoff.
    pub fn basis_vector(&self, occupation: &[u8]) -> Option<nalgebra::DVector<C64>> {
        let i = self.index_of(occupation)?;
        let mut v = nalgebra::DVector::zeros(self.dim());
        v[i] = C64::new(1.0, 0.0);
        Some(v)
    }
}

// Lexicographically decreasing in the first mode, which puts |n,0,...> first.
fn compositions(remaining: usize, pos: usize, occ: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if pos + 1 == occ.len() {
        occ[pos] = remaining as u8;
        out.push(occ.clone());
        return;
    }
    for n in (0..=remaining).rev() {
        occ[pos] = n as u8;
        compositions(remaining - n, pos + 1, occ, out);
    }
    occ[pos] = 0;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ladder {
    Annihilate,
    Create,
}

impl Ladder {
    pub fn dagger(self) -> Self {
        match self {
            Ladder::Annihilate => Ladder::Create,
            Ladder::Create => Ladder::Annihilate,
        }
    }
}

/// An operator on a truncated Fock space, stored densely in the occupation basis.
#[derive(Debug, Clone)]
pub struct FockOperator {
    space: Arc<FockSpace>,
    matrix: Matrix,
}

impl FockOperator {
    pub fn from_matrix(space: &Arc<FockSpace>, matrix: Matrix) -> Result<Self> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::Dimension(format!(
                "{}x{} matrix on a space of dimension {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { space: Arc::clone(space), matrix })
    }

    pub fn zero(space: &Arc<FockSpace>) -> Self {
        let d = space.dim();
        Self { space: Arc::clone(space), matrix: Matrix::zeros(d, d) }
    }

    pub fn identity(space: &Arc<FockSpace>) -> Self {
        let d = space.dim();
        Self { space: Arc::clone(space), matrix: Matrix::identity(d, d) }
    }

    /// `|ψ⟩⟨φ|`.
    pub fn outer(space: &Arc<FockSpace>, psi: &nalgebra::DVector<C64>, phi: &nalgebra::DVector<C64>) -> Self {
        Self { space: Arc::clone(space), matrix: psi * phi.adjoint() }
    }

    pub fn space(&self) -> &Arc<FockSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    fn with(&self, matrix: Matrix) -> Self {
        Self { space: Arc::clone(&self.space), matrix }
    }

    pub fn adjoint(&self) -> Self {
        self.with(self.matrix.adjoint())
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.with(&self.matrix * &other.matrix)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.with(&self.matrix + &other.matrix)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.with(&self.matrix - &other.matrix)
    }

    pub fn scale(&self, c: C64) -> Self {
        self.with(&self.matrix * c)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.with(&self.matrix * &other.matrix - &other.matrix * &self.matrix)
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).norm()
    }

    /// Block of the matrix on states with total occupation `<= max_total`.
    pub fn restricted(&self, max_total: usize) -> Matrix {
        let idx = self.space.sector_indices(max_total);
        Matrix::from_fn(idx.len(), idx.len(), |i, j| self.matrix[(idx[i], idx[j])])
    }

    /// Frobenius norm of the block with total occupation `<= max_total`.
    pub fn restricted_norm(&self, max_total: usize) -> f64 {
        self.restricted(max_total).norm()
    }
}

/// Ladder operator for `mode`: `a|n⟩ = √(ħn)|n−1⟩`, `a⁺` its adjoint.
pub fn build_ladder(space: &Arc<FockSpace>, mode: usize, kind: Ladder) -> Result<FockOperator> {
    space.modes().check(mode)?;
    let d = space.dim();
    let mut m = Matrix::zeros(d, d);
    for (j, occ) in space.states().iter().enumerate() {
        let n = occ[mode];
        if n == 0 {
            continue;
        }
        let mut lower = occ.clone();
        lower[mode] -= 1;
        let i = space.index_of(&lower).expect("lowered state is in the space");
        m[(i, j)] = C64::new((space.hbar() * n as f64).sqrt(), 0.0);
    }
    let a = FockOperator { space: Arc::clone(space), matrix: m };
    Ok(match kind {
        Ladder::Annihilate => a,
        Ladder::Create => a.adjoint(),
    })
}

/// Bare occupation number `a⁺a / ħ` of a mode (diagonal).
pub fn number_operator(space: &Arc<FockSpace>, mode: usize) -> Result<FockOperator> {
    space.modes().check(mode)?;
    let d = space.dim();
    let m = Matrix::from_fn(d, d, |i, j| if i == j { C64::new(space.state(i)[mode] as f64, 0.0) } else { ZERO });
    Ok(FockOperator { space: Arc::clone(space), matrix: m })
}

/// Coefficients `H_{m,n}(k_1..k_m | l_1..l_n)` of a normal-ordered polynomial
/// `Σ H a⁺_{k_1}…a⁺_{k_m} a_{l_1}…a_{l_n}`.
///
/// Tuples are stored sorted; inserting the same monomial twice accumulates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PolyCoefficients {
    terms: BTreeMap<(Vec<usize>, Vec<usize>), C64>,
}

impl PolyCoefficients {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_term(&mut self, creators: &[usize], annihilators: &[usize], coeff: C64) -> &mut Self {
        let mut c = creators.to_vec();
        let mut a = annihilators.to_vec();
        c.sort_unstable();
        a.sort_unstable();
        *self.terms.entry((c, a)).or_insert(ZERO) += coeff;
        self
    }

    /// `Σ_k ω(k) a⁺_k a_k`.
    pub fn free(modes: &ModeSet) -> Self {
        let mut p = Self::new();
        for k in 0..modes.len() {
            p.add_term(&[k], &[k], C64::new(modes.omega(k), 0.0));
        }
        p
    }

    /// `Σ_k v(k) a⁺_k a_k`.
    pub fn diagonal(v: &[f64]) -> Self {
        let mut p = Self::new();
        for (k, &vk) in v.iter().enumerate() {
            p.add_term(&[k], &[k], C64::new(vk, 0.0));
        }
        p
    }

    /// Momentum-conserving contact interaction `(u/L) Σ a⁺_{k1}a⁺_{k2}a_{k3}a_{k4}`
    /// with `k1+k2 = k3+k4` on a lattice (each ordered tuple counted once).
    pub fn contact_quartic(modes: &ModeSet, u: f64) -> Result<Self> {
        let l = modes
            .lattice_size()
            .ok_or_else(|| Error::InvalidModeSet("contact interaction needs a lattice".into()))?;
        let mut p = Self::new();
        let scale = C64::new(u / l as f64, 0.0);
        for k1 in 0..l {
            for k2 in 0..l {
                for k3 in 0..l {
                    let k4 = (k1 + k2 + l - k3) % l;
                    p.add_term(&[k1, k2], &[k3, k4], scale);
                }
            }
        }
        Ok(p)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize], &[usize], C64)> {
        self.terms.iter().map(|((c, a), &v)| (c.as_slice(), a.as_slice(), v))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self { terms: self.terms.iter().map(|(k, &v)| (k.clone(), v * s)).collect() }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (c, a, v) in other.terms() {
            out.add_term(c, a, v);
        }
        out
    }

    pub fn max_degree(&self) -> usize {
        self.terms.keys().map(|(c, a)| c.len() + a.len()).max().unwrap_or(0)
    }

    pub fn is_number_conserving(&self) -> bool {
        self.terms.keys().all(|(c, a)| c.len() == a.len())
    }

    /// Largest `|H(k|l) − conj H(l|k)|` over all monomials.
    pub fn hermiticity_defect(&self) -> f64 {
        self.terms
            .iter()
            .map(|((c, a), v)| {
                let partner = self.terms.get(&(a.clone(), c.clone())).copied().unwrap_or(ZERO);
                (v - partner.conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn check_modes(&self, modes: &ModeSet) -> Result<()> {
        for (c, a) in self.terms.keys() {
            for &m in c.iter().chain(a) {
                modes.check(m)?;
            }
        }
        Ok(())
    }

    /// True when every term satisfies `Σk = Σl` modulo the lattice.
    pub fn conserves_momentum(&self, modes: &ModeSet) -> bool {
        self.terms.keys().all(|(c, a)| modes.momentum_sum(c) == modes.momentum_sum(a))
    }
}

/// Matrix of the normal-ordered polynomial. With `hermitian` set the
/// coefficients are validated first.
pub fn build_poly_operator(space: &Arc<FockSpace>, coeffs: &PolyCoefficients, hermitian: bool) -> Result<FockOperator> {
    coeffs.check_modes(space.modes())?;
    if hermitian {
        let defect = coeffs.hermiticity_defect();
        if defect > 1e-12 {
            return Err(Error::NonHermitian { defect });
        }
    }
    let d = space.dim();
    let hbar = space.hbar();
    let mut m = Matrix::zeros(d, d);
    for (creators, annihilators, coeff) in coeffs.terms() {
        for (j, occ) in space.states().iter().enumerate() {
            let mut state = occ.clone();
            let mut amp = 1.0;
            let mut alive = true;
            for &l in annihilators.iter().rev() {
                if state[l] == 0 {
                    alive = false;
                    break;
                }
                amp *= (hbar * state[l] as f64).sqrt();
                state[l] -= 1;
            }
            if !alive {
                continue;
            }
            for &k in creators.iter().rev() {
                state[k] += 1;
                amp *= (hbar * state[k] as f64).sqrt();
            }
            if let Some(i) = space.index_of(&state) {
                m[(i, j)] += coeff * amp;
            }
        }
    }
    Ok(FockOperator { space: Arc::clone(space), matrix: m })
}

/// `exp(−α·a⁺ + α*·a)` by a dense matrix exponential.
pub fn weyl_displacement(space: &Arc<FockSpace>, alpha: &[C64]) -> Result<FockOperator> {
    let gen = displacement_generator(space, alpha, C64::new(-1.0, 0.0), ONE)?;
    Ok(FockOperator { space: Arc::clone(space), matrix: gen.exp() })
}

/// `c_create·Σ α_k a⁺_k + c_annihilate·Σ α*_k a_k`.
pub(crate) fn displacement_generator(space: &Arc<FockSpace>, alpha: &[C64], c_create: C64, c_annihilate: C64) -> Result<Matrix> {
    if alpha.len() != space.n_modes() {
        return Err(Error::Dimension(format!("{} amplitudes for {} modes", alpha.len(), space.n_modes())));
    }
    let d = space.dim();
    let mut gen = Matrix::zeros(d, d);
    for (k, &ak) in alpha.iter().enumerate() {
        if ak == ZERO {
            continue;
        }
        let a = build_ladder(space, k, Ladder::Annihilate)?;
        let ad = a.adjoint();
        gen += ad.matrix() * (c_create * ak) + a.matrix() * (c_annihilate * ak.conj());
    }
    Ok(gen)
}

/// Normalised thermal density matrix `∝ exp(−(H₀ − μN)/T)` for the space's dispersion.
pub fn thermal_state(space: &Arc<FockSpace>, temperature: f64, mu: f64) -> Result<FockOperator> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::InvalidParameter { name: "temperature", reason: format!("{temperature} is not > 0") });
    }
    let modes = space.modes();
    for k in 0..modes.len() {
        let gap = modes.omega(k) - mu;
        if !(gap > 0.0) {
            return Err(Error::Gapless { mode: k, gap });
        }
    }
    let hbar = space.hbar();
    let logw: Vec<f64> = space
        .states()
        .iter()
        .map(|occ| {
            -occ.iter().enumerate().map(|(k, &n)| hbar * (modes.omega(k) - mu) * n as f64).sum::<f64>() / temperature
        })
        .collect();
    let top = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logw.iter().map(|l| (l - top).exp()).collect();
    let z: f64 = w.iter().sum();
    let d = space.dim();
    let m = Matrix::from_fn(d, d, |i, j| if i == j { C64::new(w[i] / z, 0.0) } else { ZERO });
    Ok(FockOperator { space: Arc::clone(space), matrix: m })
}

/// `|0⟩⟨0|`.
pub fn vacuum_projector(space: &Arc<FockSpace>) -> FockOperator {
    let d = space.dim();
    let mut m = Matrix::zeros(d, d);
    m[(0, 0)] = ONE;
    FockOperator { space: Arc::clone(space), matrix: m }
}

/// Largest norm deficit accepted by [`coherent_vector`].
pub const COHERENT_DEFICIT_TOL: f64 = 1e-6;

/// Normalised coherent vector with `a_k ψ = β_k ψ` (up to truncation).
///
/// The truncated vector is renormalised; if the weight lost to the cutoff,
/// `1 − e^{−Σ|β|²/ħ} Σ_{kept} Π |β_k|^{2n_k}/(ħ^{n_k} n_k!)`, exceeds
/// [`COHERENT_DEFICIT_TOL`] the request is rejected.
pub fn coherent_vector(space: &Arc<FockSpace>, beta: &[C64]) -> Result<nalgebra::DVector<C64>> {
    if beta.len() != space.n_modes() {
        return Err(Error::Dimension(format!("{} amplitudes for {} modes", beta.len(), space.n_modes())));
    }
    let hbar = space.hbar();
    let psi = nalgebra::DVector::from_iterator(
        space.dim(),
        space.states().iter().map(|occ| {
            occ.iter().zip(beta).fold(ONE, |acc, (&n, &b)| {
                let mut c = acc;
                for j in 1..=n as u32 {
                    c *= b / (hbar * j as f64).sqrt();
                }
                c
            })
        }),
    );
    let total: f64 = beta.iter().map(|b| b.norm_sqr()).sum::<f64>() / hbar;
    let kept = psi.norm_squared() * (-total).exp();
    let deficit = 1.0 - kept;
    if deficit > COHERENT_DEFICIT_TOL {
        return Err(Error::TruncationDominated { deficit });
    }
    let n = psi.norm();
    Ok(psi / C64::new(n, 0.0))
}

/// Projector `|β⟩⟨β|` onto a coherent state.
pub fn coherent_state(space: &Arc<FockSpace>, beta: &[C64]) -> Result<FockOperator> {
    let psi = coherent_vector(space, beta)?;
    Ok(FockOperator::outer(space, &psi, &psi))
}

/// Eigendecomposition of a Hermitian operator, reused for time evolution.
#[derive(Debug, Clone)]
pub struct Spectrum {
    space: Arc<FockSpace>,
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl Spectrum {
    pub fn new(h: &FockOperator) -> Result<Self> {
        let defect = h.hermiticity_defect();
        if defect > 1e-10 * (1.0 + h.norm()) {
            return Err(Error::NonHermitianOperator { defect });
        }
        let eig = h.matrix().clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let d = h.space().dim();
        let vectors = Matrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
        Ok(Self { space: Arc::clone(h.space()), values, vectors })
    }

    pub fn space(&self) -> &Arc<FockSpace> {
        &self.space
    }

    /// `exp(−iHt/ħ)`.
    pub fn propagator(&self, t: f64) -> Matrix {
        let hbar = self.space.hbar();
        let phases = nalgebra::DVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|&e| C64::from_polar(1.0, -e * t / hbar)),
        );
        let mut vd = self.vectors.clone();
        for (c, p) in phases.iter().enumerate() {
            vd.column_mut(c).scale_mut_complex(*p);
        }
        vd * self.vectors.adjoint()
    }

    /// `e^{iHt/ħ} op e^{−iHt/ħ}`.
    pub fn heisenberg(&self, op: &Matrix, t: f64) -> Matrix {
        let u = self.propagator(t);
        u.adjoint() * op * u
    }

    pub fn ground_state(&self) -> nalgebra::DVector<C64> {
        self.vectors.column(0).into_owned()
    }

    /// Normalised `exp(−H/T)`.
    pub fn gibbs(&self, temperature: f64) -> Result<FockOperator> {
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::InvalidParameter { name: "temperature", reason: format!("{temperature} is not > 0") });
        }
        let e0 = self.values.first().copied().unwrap_or(0.0);
        let w: Vec<f64> = self.values.iter().map(|e| (-(e - e0) / temperature).exp()).collect();
        let z: f64 = w.iter().sum();
        let mut vd = self.vectors.clone();
        for (c, wc) in w.iter().enumerate() {
            vd.column_mut(c).scale_mut_complex(C64::new(wc / z, 0.0));
        }
        FockOperator::from_matrix(&self.space, vd * self.vectors.adjoint())
    }
}

trait ScaleComplex {
    fn scale_mut_complex(&mut self, c: C64);
}

impl<S> ScaleComplex for nalgebra::Matrix<C64, nalgebra::Dyn, nalgebra::U1, S>
where
    S: nalgebra::StorageMut<C64, nalgebra::Dyn, nalgebra::U1>,
{
    fn scale_mut_complex(&mut self, c: C64) {
        for x in self.iter_mut() {
            *x *= c;
        }
    }
}

/// Heisenberg-picture operator `e^{iHt/ħ} op e^{−iHt/ħ}`.
pub fn heisenberg(op: &FockOperator, h: &FockOperator, t: f64) -> Result<FockOperator> {
    let spec = Spectrum::new(h)?;
    FockOperator::from_matrix(op.space(), spec.heisenberg(op.matrix(), t))
}
