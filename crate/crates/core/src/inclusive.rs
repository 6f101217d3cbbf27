//! Inclusive scattering matrix `Ŝ L_K = L_{S K S⁺}` and the coefficients
//! `σ̂_{m,m′}(k|k′) = Tr a⁺(k₁)…a⁺(k_m) a(k′₁)…a(k′_{m′}) S K S⁺`.
//!
//! Everything here uses `ħ = 1`.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::fock::{build_ladder, build_poly_operator, FockOperator, FockSpace, Ladder, Matrix, PolyCoefficients, Spectrum, C64, ZERO};
use crate::lfunctional::{l_from_density, CorrelationTable, LFunctional};
use crate::poly::{factorial, Monomial};

const UNITARITY_TOL: f64 = 1e-8;
const TAIL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Supplied,
    Adiabatic,
}

/// Unitary on a truncated Fock space.
#[derive(Debug, Clone)]
pub struct SMatrixOp {
    op: FockOperator,
    provenance: Provenance,
}

fn require_unit_hbar(space: &FockSpace) -> Result<()> {
    if (space.hbar() - 1.0).abs() > 0.0 {
        return Err(Error::InvalidParameter { name: "hbar", reason: format!("inclusive tables use ħ = 1, got {}", space.hbar()) });
    }
    Ok(())
}

impl SMatrixOp {
    pub fn new(op: FockOperator, provenance: Provenance) -> Result<Self> {
        require_unit_hbar(op.space())?;
        let d = op.space().dim();
        let defect = (op.matrix().adjoint() * op.matrix() - Matrix::identity(d, d)).norm();
        if defect > UNITARITY_TOL {
            return Err(Error::NotUnitary { defect });
        }
        Ok(Self { op, provenance })
    }

    pub fn identity(space: &Arc<FockSpace>) -> Result<Self> {
        Self::new(FockOperator::identity(space), Provenance::Supplied)
    }

    /// `exp(−i G)` for a Hermitian polynomial generator `G`.
    pub fn from_generator(space: &Arc<FockSpace>, g: &PolyCoefficients) -> Result<Self> {
        require_unit_hbar(space)?;
        let h = build_poly_operator(space, g, true)?;
        let u = Spectrum::new(&h)?.propagator(1.0);
        Self::new(FockOperator::from_matrix(space, u)?, Provenance::Supplied)
    }

    /// `exp(θ(a⁺_i a_j − a⁺_j a_i))`; `θ = π/4` is the 50/50 splitter.
    pub fn beamsplitter(space: &Arc<FockSpace>, i: usize, j: usize, theta: f64) -> Result<Self> {
        let mut g = PolyCoefficients::new();
        g.add_term(&[i], &[j], C64::new(0.0, theta));
        g.add_term(&[j], &[i], C64::new(0.0, -theta));
        Self::from_generator(space, &g)
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn operator(&self) -> &FockOperator {
        &self.op
    }

    pub fn space(&self) -> &Arc<FockSpace> {
        self.op.space()
    }

    pub fn apply_state(&self, psi: &DVector<C64>) -> DVector<C64> {
        self.op.matrix() * psi
    }

    pub fn sandwich(&self, k: &FockOperator) -> FockOperator {
        self.op.mul(k).mul(&self.op.adjoint())
    }
}

/// `Ŝ L_K = L_{S K S⁺}` up to degree `D`.
pub fn s_hat_apply(s: &SMatrixOp, k: &FockOperator, degree: usize) -> Result<CorrelationTable> {
    l_from_density(&s.sandwich(k), degree)
}

/// Sorted mode tuple `k₁ ≤ … ≤ k_m`.
pub type Tuple = Vec<usize>;

/// `σ̂_{m,m′}(k|k′)` keyed by sorted tuples; permuting within a tuple leaves the value unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct InclusiveTable {
    pub n_modes: usize,
    /// Largest `m + m′` present.
    pub degree: usize,
    pub entries: BTreeMap<(Tuple, Tuple), C64>,
    /// Norm squared of the final state on the truncation boundary.
    pub tail_mass: f64,
}

fn exponents(n_modes: usize, t: &[usize]) -> Vec<u8> {
    let mut e = vec![0u8; n_modes];
    for &k in t {
        e[k] += 1;
    }
    e
}

/// All sorted tuples of length `m` over `n_modes` modes.
pub fn sorted_tuples(n_modes: usize, m: usize) -> Vec<Tuple> {
    fn rec(start: usize, left: usize, n: usize, cur: &mut Tuple, out: &mut Vec<Tuple>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for k in start..n {
            cur.push(k);
            rec(k, left - 1, n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, n_modes, &mut Vec::new(), &mut out);
    out
}

/// Number of ordered tuples sharing the multiset of `t`.
pub fn multiplicity(n_modes: usize, t: &[usize]) -> f64 {
    factorial(t.len()) / exponents(n_modes, t).iter().map(|&e| factorial(e as usize)).product::<f64>()
}

impl InclusiveTable {
    pub fn get(&self, k: &[usize], kp: &[usize]) -> Result<C64> {
        let (mut a, mut b) = (k.to_vec(), kp.to_vec());
        a.sort_unstable();
        b.sort_unstable();
        self.entries
            .get(&(a, b))
            .copied()
            .ok_or_else(|| Error::MissingEntry(format!("σ̂({k:?}|{kp:?})")))
    }

    /// Largest `|σ̂_{m′,m}(k′|k) − conj σ̂_{m,m′}(k|k′)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.entries
            .iter()
            .map(|((a, b), v)| self.entries.get(&(b.clone(), a.clone())).map_or(0.0, |w| (w - v.conj()).norm()))
            .fold(0.0, f64::max)
    }

    /// Most negative diagonal `Re σ̂_{m,m}(k|k)`, or 0.
    pub fn diagonal_negativity(&self) -> f64 {
        self.entries
            .iter()
            .filter(|((a, b), _)| a == b)
            .map(|(_, v)| (-v.re).max(0.0))
            .fold(0.0, f64::max)
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .map(|(key, v)| (v - other.entries.get(key).copied().unwrap_or(ZERO)).norm())
            .chain(other.entries.iter().filter(|(key, _)| !self.entries.contains_key(*key)).map(|(_, v)| v.norm()))
            .fold(0.0, f64::max)
    }

    /// `(1/n!) Σ_{ordered k} σ̂_{n,n}(k|k)`; equals 1 for an `n`-particle final state.
    pub fn probability_sum(&self, n: usize) -> f64 {
        sorted_tuples(self.n_modes, n)
            .iter()
            .filter_map(|t| self.entries.get(&(t.clone(), t.clone())).map(|v| v.re * multiplicity(self.n_modes, t)))
            .sum::<f64>()
            / factorial(n)
    }

    /// Rows `(k, k′, σ̂)` in key order.
    pub fn rows(&self) -> impl Iterator<Item = (&Tuple, &Tuple, C64)> + '_ {
        self.entries.iter().map(|((a, b), &v)| (a, b, v))
    }
}

fn key_pairs(n_modes: usize, degree: usize) -> Vec<(Tuple, Tuple)> {
    let mut out = Vec::new();
    for m in 0..=degree {
        for mp in 0..=(degree - m) {
            for a in sorted_tuples(n_modes, m) {
                for b in sorted_tuples(n_modes, mp) {
                    out.push((a.clone(), b));
                }
            }
        }
    }
    out
}

/// Reads `σ̂_{m,m′}` off the expansion `Σ (−1)^m/(m!m′!) α^m α*^{m′} σ̂_{m,m′}`.
pub fn sigma_from_shat(table: &CorrelationTable, degree: usize) -> Result<InclusiveTable> {
    if let Some(d) = table.exact_degree() {
        if d < degree {
            return Err(Error::DegreeTooLarge { requested: degree, limit: d });
        }
    }
    if (table.hbar() - 1.0).abs() > 0.0 {
        return Err(Error::InvalidParameter { name: "hbar", reason: format!("inclusive tables use ħ = 1, got {}", table.hbar()) });
    }
    let n = table.n_modes();
    // c(p|q) is the value for every ordering of the tuples
    let entries = key_pairs(n, degree)
        .into_iter()
        .map(|(a, b)| {
            let m = Monomial { alpha: exponents(n, &a), alpha_conj: exponents(n, &b) };
            let v = table.correlation(&m);
            ((a, b), v)
        })
        .collect();
    Ok(InclusiveTable { n_modes: n, degree, entries, tail_mass: 0.0 })
}

fn boundary_mass(space: &FockSpace, psi: &DVector<C64>) -> f64 {
    (0..space.dim()).filter(|&i| space.total(i) == space.n_max()).map(|i| psi[i].norm_sqr()).sum()
}

/// Sum over final states `Σ_n Σ_p √((m+n)!)√((m′+n)!)/n! ⟨SΨ|k,p⟩ conj⟨SΨ|k′,p⟩`.
///
/// The ordered `p`-tuples are grouped by occupation with multiplicity
/// `n!/Π occ!`, and `|k₁…k_m⟩ = (m!)^{−1/2} a⁺(k₁)…a⁺(k_m)|0⟩`.
pub fn sigma_bruteforce(s: &SMatrixOp, psi: &DVector<C64>, degree: usize) -> Result<InclusiveTable> {
    let space = s.space();
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter { name: "psi", reason: format!("state norm {norm} is not 1") });
    }
    let n = space.n_modes();
    let out = s.apply_state(psi);
    let tail = boundary_mass(space, &out);
    if tail > TAIL_TOL {
        log::warn!("final state has weight {tail:e} on the truncation boundary");
    }
    // ⟨k,p|SΨ⟩ with |k,p⟩ the normalized tuple state
    let amplitude = |occ: &[u8], len: usize| -> C64 {
        match space.index_of(occ) {
            Some(i) => {
                let w: f64 = occ.iter().map(|&e| factorial(e as usize)).product();
                out[i] * (w / factorial(len)).sqrt()
            }
            None => ZERO,
        }
    };
    let n_total = space.n_max();
    let mut entries = BTreeMap::new();
    for (a, b) in key_pairs(n, degree) {
        let (ea, eb) = (exponents(n, &a), exponents(n, &b));
        let (m, mp) = (a.len(), b.len());
        let mut acc = ZERO;
        for np in 0..=n_total.saturating_sub(m.min(mp)) {
            let fact = (factorial(m + np) * factorial(mp + np)).sqrt() / factorial(np);
            for p in sorted_tuples(n, np) {
                let ep = exponents(n, &p);
                let oa: Vec<u8> = ea.iter().zip(&ep).map(|(x, y)| x + y).collect();
                let ob: Vec<u8> = eb.iter().zip(&ep).map(|(x, y)| x + y).collect();
                let (x, y) = (amplitude(&oa, m + np), amplitude(&ob, mp + np));
                if x == ZERO || y == ZERO {
                    continue;
                }
                acc += x.conj() * y * (fact * multiplicity(n, &p));
            }
        }
        entries.insert((a, b), acc);
    }
    Ok(InclusiveTable { n_modes: n, degree, entries, tail_mass: tail })
}

/// Inclusive cross-section `Ψ → k`, normalized as `σ̂_{m,m}(k|k)`.
pub fn inclusive_cross_section(table: &InclusiveTable, out: &[usize]) -> Result<f64> {
    Ok(table.get(out, out)?.re)
}

/// `σ̃` for momentum-eigenstate inputs on a lattice of `L` sites: the
/// Kronecker delta of total momenta carries a factor `L/2π`, so
/// `σ̃ = (2π/L) σ̂` on conserving pairs and `None` otherwise.
pub fn sigma_tilde(table: &InclusiveTable, space: &FockSpace, k: &[usize], kp: &[usize]) -> Result<Option<f64>> {
    let modes = space.modes();
    let l = modes
        .lattice_size()
        .ok_or_else(|| Error::InvalidModeSet("σ̃ needs lattice momenta".into()))?;
    match (modes.momentum_sum(k), modes.momentum_sum(kp)) {
        (Some(x), Some(y)) if x == y => Ok(Some(table.get(k, kp)?.re * std::f64::consts::TAU / l as f64)),
        _ => Ok(None),
    }
}

/// Heisenberg word `X₁(t₁)⋯X_r(t_r)` with ladder operators.
#[derive(Debug, Clone, PartialEq)]
pub struct TimedWord(pub Vec<(usize, Ladder, f64)>);

impl TimedWord {
    pub fn identity() -> Self {
        Self(Vec::new())
    }

    fn matrix(&self, space: &Arc<FockSpace>, spectrum: &Spectrum) -> Result<Matrix> {
        let d = space.dim();
        let mut m = Matrix::identity(d, d);
        for &(k, kind, t) in &self.0 {
            let a = build_ladder(space, k, kind)?;
            m *= spectrum.heisenberg(a.matrix(), t);
        }
        Ok(m)
    }

    fn is_monotone(&self, decreasing: bool) -> bool {
        self.0.windows(2).all(|w| if decreasing { w[0].2 >= w[1].2 } else { w[0].2 <= w[1].2 })
    }
}

/// `|⟨0|BA|0⟩ − Σ_n Σ_p ⟨0|B|p⟩⟨p|A|0⟩|` over the truncated tuple basis, with
/// `|0⟩` the ground state of `H`, `A` chronological and `B` antichronological.
pub fn completeness_check(a: &TimedWord, b: &TimedWord, h: &FockOperator) -> Result<f64> {
    if !a.is_monotone(true) {
        return Err(Error::Ordering { expected: "chronological" });
    }
    if !b.is_monotone(false) {
        return Err(Error::Ordering { expected: "antichronological" });
    }
    let space = h.space();
    let spectrum = Spectrum::new(h)?;
    let g = spectrum.ground_state();
    let am = a.matrix(space, &spectrum)?;
    let bm = b.matrix(space, &spectrum)?;
    let lhs = (g.adjoint() * &bm * &am * &g)[(0, 0)];
    let right = &am * &g;
    let left = bm.adjoint() * &g;
    let n = space.n_modes();
    let mut rhs = ZERO;
    for np in 0..=space.n_max() {
        for p in sorted_tuples(n, np) {
            let occ = exponents(n, &p);
            let Some(i) = space.index_of(&occ) else { continue };
            // |p⟩ = (n!)^{−1/2} a⁺(p)|vac⟩ = √(Π occ!/n!) |occ⟩
            let w: f64 = occ.iter().map(|&e| factorial(e as usize)).product::<f64>() / factorial(np);
            rhs += left[i].conj() * right[i] * (w * multiplicity(n, &p));
        }
    }
    Ok((lhs - rhs).norm())
}
