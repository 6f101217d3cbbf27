//! Free propagators, GGreen functions and Wick-contraction diagrams.
//!
//! Time-dependent generators are `b(k,t,σ) = e^{iĤ₀t/ħ} b_σ(k) e^{−iĤ₀t/ħ}`,
//! which for diagonal `H₀` is `e^{±iω(k)t} b_σ(k)` (sign from
//! [`Sigma::phase_sign`]). T-products put later times to the left; legs at
//! equal times keep the order in which they are written.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fock::{build_ladder, FockOperator, FockSpace, Ladder, Matrix, ModeSet, PolyCoefficients, Spectrum, C64, ZERO};
use crate::evolution::SwitchingProfile;
use crate::lfunctional::{GaussPolyL, GaussianL, LFunctional, Sigma};
use crate::quadrature::PanelRule;

/// One argument `(k, t, σ)` of a GGreen function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leg {
    pub mode: usize,
    pub time: f64,
    pub sigma: Sigma,
}

impl Leg {
    pub fn new(mode: usize, time: f64, sigma: Sigma) -> Self {
        Self { mode, time, sigma }
    }
}

/// Reference state of a GGreen function.
#[derive(Debug, Clone, PartialEq)]
pub enum Reference {
    Vacuum,
    Gaussian(GaussianL),
    Interacting,
}

/// Argument list of `G_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GGreenPoint {
    pub legs: Vec<Leg>,
    pub reference: Reference,
}

impl GGreenPoint {
    pub fn new(legs: Vec<Leg>, reference: Reference) -> Result<Self> {
        if legs.is_empty() {
            return Err(Error::InvalidParameter { name: "legs", reason: "a GGreen function needs at least one leg".into() });
        }
        Ok(Self { legs, reference })
    }
}

/// Indices of `legs` in T-order: latest first, ties by position.
fn chronological(legs: &[Leg]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..legs.len()).collect();
    idx.sort_by(|&i, &j| legs[j].time.partial_cmp(&legs[i].time).unwrap().then(i.cmp(&j)));
    idx
}

/// Closed-form propagator for the stationary Gaussians `exp(−Σ n(k) α*_k α_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FreePropagator {
    omegas: Vec<f64>,
    occupations: Vec<f64>,
    hbar: f64,
}

impl FreePropagator {
    pub fn new(modes: &ModeSet, occupations: &[f64], hbar: f64) -> Result<Self> {
        if occupations.len() != modes.len() {
            return Err(Error::Dimension(format!("{} occupations for {} modes", occupations.len(), modes.len())));
        }
        Ok(Self { omegas: modes.omegas(), occupations: occupations.to_vec(), hbar })
    }

    pub fn vacuum(modes: &ModeSet, hbar: f64) -> Self {
        Self { omegas: modes.omegas(), occupations: vec![0.0; modes.len()], hbar }
    }

    pub fn from_gaussian(modes: &ModeSet, lambda: &GaussianL, hbar: f64) -> Result<Self> {
        let n = lambda
            .occupations()
            .ok_or_else(|| Error::InvalidParameter { name: "lambda", reason: "closed form needs a diagonal stationary Gaussian".into() })?;
        Self::new(modes, &n, hbar)
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn occupations(&self) -> &[f64] {
        &self.occupations
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// `(b_x b_y Λ)(0, 0)` for a single mode.
    pub fn equal_time(&self, x: Sigma, y: Sigma, k: usize) -> f64 {
        use Sigma::*;
        let n = self.occupations[k];
        let h = self.hbar;
        match (x, y) {
            (BPlus, B) | (BTildePlus, BTilde) | (B, BTilde) | (BTilde, B) => n,
            (B, BPlus) | (BTilde, BTildePlus) | (BPlus, BTildePlus) | (BTildePlus, BPlus) => n + h,
            _ => 0.0,
        }
    }

    /// `⟨T b(k,t,σ₁) b(k,τ,σ₂)⟩_Λ`; at `t = τ` the first argument counts as later.
    pub fn value(&self, s1: Sigma, s2: Sigma, k: usize, t: f64, tau: f64) -> C64 {
        let m = if t >= tau { self.equal_time(s1, s2, k) } else { self.equal_time(s2, s1, k) };
        if m == 0.0 {
            return ZERO;
        }
        let w = self.omegas[k];
        C64::from_polar(m, w * (s1.phase_sign() * t + s2.phase_sign() * tau))
    }

    /// Contraction of two legs; `x_first` decides ties.
    pub fn contract(&self, x: &Leg, y: &Leg, x_first: bool) -> C64 {
        if x.mode != y.mode {
            return ZERO;
        }
        if x.time > y.time || (x.time == y.time && x_first) {
            self.value(x.sigma, y.sigma, x.mode, x.time, y.time)
        } else {
            self.value(y.sigma, x.sigma, x.mode, y.time, x.time)
        }
    }

    /// Full `4M × 4M` table at `(t, τ)`, rows `(σ₁, k)`, columns `(σ₂, k′)`.
    pub fn matrix(&self, t: f64, tau: f64) -> Matrix {
        let m = self.omegas.len();
        Matrix::from_fn(4 * m, 4 * m, |r, c| {
            let (s1, k1) = (Sigma::from_index(r / m), r % m);
            let (s2, k2) = (Sigma::from_index(c / m), c % m);
            if k1 == k2 {
                self.value(s1, s2, k1, t, tau)
            } else {
                ZERO
            }
        })
    }
}

/// `⟨T Π b(k_i,t_i,σ_i)⟩_Λ` for any Gaussian `Λ` stationary under diagonal
/// `H₀`, by applying the generators to `Λ` and evaluating at the origin.
pub fn free_ggreen_by_generators(legs: &[Leg], lambda: &GaussianL, omegas: &[f64], hbar: f64) -> Result<C64> {
    let order = chronological(legs);
    let mut l = GaussPolyL::new(lambda.clone(), hbar);
    let mut phase = 0.0;
    for &i in order.iter().rev() {
        let leg = &legs[i];
        if leg.mode >= omegas.len() {
            return Err(Error::UnknownMode(format!("#{}", leg.mode)));
        }
        l = l.apply_generator(leg.sigma, leg.mode)?;
        phase += leg.sigma.phase_sign() * omegas[leg.mode] * leg.time;
    }
    Ok(l.value_at_origin() * C64::from_polar(1.0, phase))
}

/// Propagator of two legs, closed form for diagonal `Λ`, generator calculus otherwise.
pub fn free_propagator(s1: Sigma, s2: Sigma, k: usize, t: f64, tau: f64, lambda: &GaussianL, modes: &ModeSet, hbar: f64) -> Result<C64> {
    modes.check(k)?;
    match FreePropagator::from_gaussian(modes, lambda, hbar) {
        Ok(p) => Ok(p.value(s1, s2, k, t, tau)),
        Err(_) => free_ggreen_by_generators(&[Leg::new(k, t, s1), Leg::new(k, tau, s2)], lambda, &modes.omegas(), hbar),
    }
}

/// `Tr(B A K)` with Heisenberg operators of `H`: left legs form the
/// chronological product `A`, right legs the antichronological product `B`.
pub fn ggreen_exact(legs: &[Leg], h: &FockOperator, k: &FockOperator) -> Result<C64> {
    ggreen_exact_with(legs, &Spectrum::new(h)?, k)
}

/// As [`ggreen_exact`] with a precomputed spectrum.
pub fn ggreen_exact_with(legs: &[Leg], spectrum: &Spectrum, k: &FockOperator) -> Result<C64> {
    let space: &Arc<FockSpace> = spectrum.space();
    let hm = {
        let mut d = Matrix::zeros(space.dim(), space.dim());
        for (j, &e) in spectrum.values.iter().enumerate() {
            d[(j, j)] = C64::new(e, 0.0);
        }
        &spectrum.vectors * d * spectrum.vectors.adjoint()
    };
    let comm = (&hm * k.matrix() - k.matrix() * &hm).norm();
    if comm > 1e-8 * (1.0 + k.norm()) {
        log::warn!("reference state is not stationary: ‖[K,H]‖ = {comm:e}");
    }
    let op = |leg: &Leg| -> Result<Matrix> {
        let kind = match leg.sigma {
            Sigma::BPlus | Sigma::BTilde => Ladder::Create,
            Sigma::B | Sigma::BTildePlus => Ladder::Annihilate,
        };
        let a = build_ladder(space, leg.mode, kind)?;
        Ok(spectrum.heisenberg(a.matrix(), leg.time))
    };
    let d = space.dim();
    let order = chronological(legs);
    let mut a = Matrix::identity(d, d);
    let mut b = Matrix::identity(d, d);
    for &i in &order {
        let leg = &legs[i];
        let m = op(leg)?;
        if leg.sigma.is_tilde() {
            // later legs sit further right in B
            b = m * b;
        } else {
            a *= m;
        }
    }
    Ok((b * a * k.matrix()).trace())
}

/// One normal-ordered piece of `Ĥ_int = V − Ṽ` as a product of generators.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexPiece {
    pub coeff: C64,
    /// Generators in written order (leftmost first).
    pub legs: Vec<(usize, Sigma)>,
}

/// `V(b⁺, b) − Ṽ(b̃⁺, b̃)` split into monomials.
pub fn vertex_pieces(v: &PolyCoefficients) -> Vec<VertexPiece> {
    let mut out = Vec::new();
    for (cr, an, h) in v.terms() {
        let mut legs: Vec<(usize, Sigma)> = cr.iter().map(|&k| (k, Sigma::BPlus)).collect();
        legs.extend(an.iter().map(|&k| (k, Sigma::B)));
        out.push(VertexPiece { coeff: h, legs });
        // K a⁺…a… = b̃⁺…b̃… L_K
        let mut tl: Vec<(usize, Sigma)> = an.iter().rev().map(|&k| (k, Sigma::BTildePlus)).collect();
        tl.extend(cr.iter().rev().map(|&k| (k, Sigma::BTilde)));
        out.push(VertexPiece { coeff: -h, legs: tl });
    }
    out
}

/// A Wick contraction pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagram {
    pub externals: Vec<Leg>,
    pub vertices: Vec<VertexPiece>,
    /// Pairs of leg indices: externals first, then vertex legs in order.
    pub pairing: Vec<(usize, usize)>,
    /// Combinatorial weight including the `1/p!` of the expansion.
    pub weight: f64,
}

impl Diagram {
    pub fn order(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_legs(&self) -> usize {
        self.externals.len() + self.vertices.iter().map(|v| v.legs.len()).sum::<usize>()
    }

    /// `(vertex, position)` of a leg, `None` for external legs.
    pub fn owner(&self, leg: usize) -> Option<(usize, usize)> {
        let mut i = leg.checked_sub(self.externals.len())?;
        for (j, v) in self.vertices.iter().enumerate() {
            if i < v.legs.len() {
                return Some((j, i));
            }
            i -= v.legs.len();
        }
        None
    }

    fn leg_at(&self, idx: usize, times: &[f64]) -> Leg {
        match self.owner(idx) {
            None => self.externals[idx],
            Some((j, p)) => {
                let (m, s) = self.vertices[j].legs[p];
                Leg::new(m, times[j], s)
            }
        }
    }

    /// Integrand at fixed vertex times, without `(−ig/ħ)^p`.
    pub fn integrand(&self, prop: &FreePropagator, times: &[f64]) -> C64 {
        let mut v = C64::new(self.weight, 0.0);
        for piece in &self.vertices {
            v *= piece.coeff;
        }
        for &(i, j) in &self.pairing {
            let x = self.leg_at(i, times);
            let y = self.leg_at(j, times);
            // i < j: externals precede vertices, and within a vertex the written order
            v *= prop.contract(&x, &y, true);
            if v == ZERO {
                return ZERO;
            }
        }
        v
    }

    /// Graph with one node per external leg and per vertex.
    pub fn adjacency(&self) -> (usize, Vec<(usize, usize)>) {
        let ne = self.externals.len();
        let node = |leg: usize| match self.owner(leg) {
            None => leg,
            Some((j, _)) => ne + j,
        };
        (ne + self.vertices.len(), self.pairing.iter().map(|&(a, b)| (node(a), node(b))).collect())
    }

    /// True when every vertex is linked to an external leg.
    pub fn is_connected_to_externals(&self) -> bool {
        let (n, edges) = self.adjacency();
        let ne = self.externals.len();
        let mut seen = vec![false; n];
        let mut stack: Vec<usize> = (0..ne).collect();
        for &s in &stack {
            seen[s] = true;
        }
        while let Some(u) = stack.pop() {
            for &(a, b) in &edges {
                for (x, y) in [(a, b), (b, a)] {
                    if x == u && !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        seen.iter().all(|&s| s)
    }
}

/// Largest number of contraction patterns [`wick_diagrams`] will produce.
pub const MAX_DIAGRAMS: usize = 2_000_000;

fn charge(s: Sigma) -> i32 {
    if s.phase_sign() > 0.0 {
        1
    } else {
        -1
    }
}

/// Perfect matchings with same mode and opposite charge on every pair.
fn matchings(legs: &[(usize, Sigma)], out: &mut Vec<Vec<(usize, usize)>>, limit: usize) -> Result<()> {
    fn rec(legs: &[(usize, Sigma)], used: &mut Vec<bool>, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>, limit: usize) -> Result<()> {
        let Some(i) = used.iter().position(|&u| !u) else {
            if out.len() >= limit {
                return Err(Error::EnumerationBound(format!("more than {limit} contraction patterns")));
            }
            out.push(cur.clone());
            return Ok(());
        };
        used[i] = true;
        for j in i + 1..legs.len() {
            if used[j] || legs[i].0 != legs[j].0 || charge(legs[i].1) + charge(legs[j].1) != 0 {
                continue;
            }
            used[j] = true;
            cur.push((i, j));
            rec(legs, used, cur, out, limit)?;
            cur.pop();
            used[j] = false;
        }
        used[i] = false;
        Ok(())
    }
    let mut used = vec![false; legs.len()];
    rec(legs, &mut used, &mut Vec::new(), out, limit)
}

/// Canonical key of a labelled diagram under permutations of its vertices.
fn canonical_key(pieces: &[usize], pairing: &[(usize, usize)], ne: usize, sizes: &[usize]) -> (Vec<usize>, Vec<(usize, usize)>) {
    let p = pieces.len();
    let mut perm: Vec<usize> = (0..p).collect();
    let mut best: Option<(Vec<usize>, Vec<(usize, usize)>)> = None;
    loop {
        // new position of each vertex
        let mut offs_old = vec![0; p];
        let mut acc = ne;
        for j in 0..p {
            offs_old[j] = acc;
            acc += sizes[pieces[j]];
        }
        let mut offs_new = vec![0; p];
        let mut acc = ne;
        for &old in &perm {
            offs_new[old] = acc;
            acc += sizes[pieces[old]];
        }
        let relabel = |leg: usize| -> usize {
            if leg < ne {
                return leg;
            }
            let j = (0..p).rev().find(|&j| leg >= offs_old[j]).unwrap();
            offs_new[j] + (leg - offs_old[j])
        };
        let mut pr: Vec<(usize, usize)> = pairing
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (relabel(a), relabel(b));
                (x.min(y), x.max(y))
            })
            .collect();
        pr.sort_unstable();
        let key = (perm.iter().map(|&j| pieces[j]).collect::<Vec<_>>(), pr);
        if best.as_ref().map_or(true, |b| key < *b) {
            best = Some(key);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    best.expect("at least the identity permutation")
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// All order-`p` contraction patterns for the given external legs.
///
/// Vertices are labelled; patterns related by relabelling are merged and
/// their weights summed. Each labelled pattern carries `1/p!`.
pub fn wick_diagrams(order: usize, externals: &[Leg], v: &PolyCoefficients) -> Result<Vec<Diagram>> {
    if order > 2 && v.max_degree() > 2 {
        return Err(Error::EnumerationBound(format!("order {order} with a degree-{} interaction", v.max_degree())));
    }
    let pieces = vertex_pieces(v);
    let sizes: Vec<usize> = pieces.iter().map(|p| p.legs.len()).collect();
    let ne = externals.len();
    let norm = 1.0 / crate::poly::factorial(order);
    let mut merged: BTreeMap<(Vec<usize>, Vec<(usize, usize)>), (Vec<usize>, Vec<(usize, usize)>, f64)> = BTreeMap::new();
    let mut choice = vec![0usize; order];
    let total = pieces.len().pow(order as u32);
    for code in 0..total {
        let mut c = code;
        for slot in choice.iter_mut() {
            *slot = c % pieces.len();
            c /= pieces.len();
        }
        let mut legs: Vec<(usize, Sigma)> = externals.iter().map(|l| (l.mode, l.sigma)).collect();
        for &j in &choice {
            legs.extend(pieces[j].legs.iter().copied());
        }
        let mut found = Vec::new();
        matchings(&legs, &mut found, MAX_DIAGRAMS)?;
        for pairing in found {
            let key = canonical_key(&choice, &pairing, ne, &sizes);
            let e = merged.entry(key).or_insert_with(|| (choice.clone(), pairing.clone(), 0.0));
            e.2 += norm;
            if merged.len() > MAX_DIAGRAMS {
                return Err(Error::EnumerationBound(format!("more than {MAX_DIAGRAMS} diagrams")));
            }
        }
    }
    Ok(merged
        .into_values()
        .map(|(ch, pairing, weight)| Diagram {
            externals: externals.to_vec(),
            vertices: ch.iter().map(|&j| pieces[j].clone()).collect(),
            pairing,
            weight,
        })
        .collect())
}

/// Quadrature settings for internal vertex times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeQuadrature {
    pub lo: f64,
    pub hi: f64,
    pub per_panel: usize,
    pub max_width: f64,
}

impl TimeQuadrature {
    /// Window `[min(t₀, t_min), t_max]` over the external times.
    pub fn covering(externals: &[Leg], reference_time: f64) -> Self {
        let lo = externals.iter().map(|l| l.time).fold(reference_time, f64::min);
        let hi = externals.iter().map(|l| l.time).fold(reference_time, f64::max);
        Self { lo, hi, per_panel: 12, max_width: 0.5 }
    }

    fn breaks(&self, externals: &[Leg], profile: Option<&SwitchingProfile>, lo: f64, hi: f64) -> Vec<f64> {
        let mut b = vec![lo, hi];
        b.extend(externals.iter().map(|l| l.time).filter(|&t| t > lo && t < hi));
        if let Some(p) = profile {
            b.extend(p.breakpoints().into_iter().filter(|&t| t > lo && t < hi));
        }
        b
    }

    fn rule(&self, externals: &[Leg], profile: Option<&SwitchingProfile>, lo: f64, hi: f64) -> Result<PanelRule> {
        if hi <= lo {
            return Ok(PanelRule { nodes: Vec::new(), weights: Vec::new() });
        }
        PanelRule::new(&self.breaks(externals, profile, lo, hi), self.per_panel, self.max_width)
    }
}

/// `∫ Π h(a t_j) · integrand` over the vertex times, times `(−i/ħ)^p`.
pub fn evaluate_diagram(d: &Diagram, prop: &FreePropagator, profile: Option<&SwitchingProfile>, quad: &TimeQuadrature) -> Result<C64> {
    evaluate_diagrams(std::slice::from_ref(d), prop, profile, quad)
}

/// Sum of several diagrams of the same order and external legs.
pub fn evaluate_diagrams(ds: &[Diagram], prop: &FreePropagator, profile: Option<&SwitchingProfile>, quad: &TimeQuadrature) -> Result<C64> {
    let Some(first) = ds.first() else {
        return Ok(ZERO);
    };
    let order = first.order();
    let ext = &first.externals;
    let hf = |t: f64| profile.map_or(1.0, |p| p.h(t));
    let f = C64::new(0.0, -1.0 / prop.hbar).powu(order as u32);
    let sum = |times: &[f64]| -> C64 { ds.iter().map(|d| d.integrand(prop, times)).sum() };
    let total = match order {
        0 => sum(&[]),
        1 => {
            let r = quad.rule(ext, profile, quad.lo, quad.hi)?;
            r.integrate_complex(|t| sum(&[t]) * hf(t))
        }
        2 => {
            let outer = quad.rule(ext, profile, quad.lo, quad.hi)?;
            let mut acc = ZERO;
            for (&t1, &w1) in outer.nodes.iter().zip(&outer.weights) {
                let h1 = hf(t1);
                if h1 == 0.0 {
                    continue;
                }
                // split the inner integral at the diagonal
                for (lo, hi) in [(quad.lo, t1), (t1, quad.hi)] {
                    let inner = quad.rule(ext, profile, lo, hi)?;
                    acc += inner.integrate_complex(|t2| sum(&[t1, t2]) * hf(t2)) * (w1 * h1);
                }
            }
            acc
        }
        _ => return Err(Error::OrderTooHigh { order, max: 2 }),
    };
    Ok(total * f)
}

/// `Σ_{j ≤ p} g^j G^{(j)}` from diagrams, with `h(at)` vertex factors when a
/// profile is given and plain vertices on the quadrature window otherwise.
pub fn ggreen_adiabatic(
    externals: &[Leg],
    prop: &FreePropagator,
    v: &PolyCoefficients,
    g: f64,
    profile: Option<&SwitchingProfile>,
    quad: &TimeQuadrature,
    order: usize,
) -> Result<C64> {
    let mut total = ZERO;
    let mut gj = 1.0;
    for j in 0..=order {
        let ds = wick_diagrams(j, externals, v)?;
        total += evaluate_diagrams(&ds, prop, profile, quad)? * gj;
        gj *= g;
    }
    Ok(total)
}

/// `∂_g G` at `g = 0` by a central difference of [`ggreen_exact`].
pub fn ggreen_exact_derivative(legs: &[Leg], h0: &FockOperator, v: &FockOperator, k: &FockOperator, step: f64) -> Result<C64> {
    let plus = ggreen_exact(legs, &h0.add(&v.scale(C64::new(step, 0.0))), k)?;
    let minus = ggreen_exact(legs, &h0.sub(&v.scale(C64::new(step, 0.0))), k)?;
    Ok((plus - minus) / (2.0 * step))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{build_poly_operator, thermal_state, vacuum_projector};
    use crate::lfunctional::{bose_occupation, GaussianL};
    use Sigma::*;

    fn lattice(l: usize) -> ModeSet {
        ModeSet::lattice(l, |p| 1.0 + 0.4 * (1.0 - p.cos())).unwrap()
    }

    #[test]
    fn closed_form_matches_generator_calculus_on_all_channels() {
        let modes = ModeSet::from_frequencies(&[1.3]).unwrap();
        for (temp, hbar) in [(0.5, 1.0), (1.0, 1.0), (2.0, 0.7)] {
            let n = bose_occupation(1.3, temp, 0.0, hbar);
            let lam = GaussianL::diagonal(&[n]);
            let prop = FreePropagator::new(&modes, &[n], hbar).unwrap();
            for (t, tau) in [(0.0, 0.0), (1.0, 0.3), (0.3, 1.0), (-2.0, 0.5), (2.5, -1.5)] {
                for s1 in Sigma::ALL {
                    for s2 in Sigma::ALL {
                        let closed = prop.value(s1, s2, 0, t, tau);
                        let gen = free_ggreen_by_generators(&[Leg::new(0, t, s1), Leg::new(0, tau, s2)], &lam, &[1.3], hbar).unwrap();
                        assert!((closed - gen).norm() < 1e-10, "{s1} {s2} {t} {tau}");
                    }
                }
            }
        }
    }

    #[test]
    fn vacuum_propagator_examples() {
        let modes = ModeSet::from_frequencies(&[2.0]).unwrap();
        let prop = FreePropagator::vacuum(&modes, 1.0);
        let tau = 0.4;
        let t = tau - std::f64::consts::PI / 4.0;
        // below the diagonal only the (n + ħ) branch survives, with phase e^{iω(t−τ)}
        assert!((prop.value(BPlus, B, 0, t, tau) - C64::new(0.0, -1.0)).norm() < 1e-14);
        assert!(prop.value(BPlus, B, 0, tau, t).norm() < 1e-15);
        assert!(prop.value(B, B, 0, 1.0, 0.0).norm() == 0.0);
        let thermal = FreePropagator::new(&modes, &[0.3], 1.0).unwrap();
        assert!((thermal.value(BPlus, BTildePlus, 0, 0.5, 0.5) - C64::new(1.3, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn tilde_channel_is_conjugate_of_plain_channel() {
        let modes = ModeSet::from_frequencies(&[1.1]).unwrap();
        let prop = FreePropagator::new(&modes, &[0.4], 1.0).unwrap();
        for (t, tau) in [(1.0, 0.2), (0.2, 1.0), (0.7, 0.7)] {
            let a = prop.value(BTildePlus, BTilde, 0, t, tau);
            let b = prop.value(BPlus, B, 0, t, tau);
            assert!((a - b.conj()).norm() < 1e-14);
        }
        let zero = Sigma::ALL.iter().flat_map(|&x| Sigma::ALL.map(move |y| (x, y))).filter(|&(x, y)| prop.value(x, y, 0, 0.3, 0.1) == ZERO).count();
        assert_eq!(zero, 8);
    }

    #[test]
    fn exact_function_reproduces_free_propagators() {
        let s = FockSpace::new(ModeSet::from_frequencies(&[1.0]).unwrap(), 30, 1.0).unwrap();
        let h0 = build_poly_operator(&s, &PolyCoefficients::free(s.modes()), true).unwrap();
        let k = thermal_state(&s, 1.0, 0.0).unwrap();
        let n = bose_occupation(1.0, 1.0, 0.0, 1.0);
        let prop = FreePropagator::new(s.modes(), &[n], 1.0).unwrap();
        for (t, tau) in [(0.9, 0.1), (0.1, 0.9), (0.4, 0.4)] {
            for s1 in Sigma::ALL {
                for s2 in Sigma::ALL {
                    let exact = ggreen_exact(&[Leg::new(0, t, s1), Leg::new(0, tau, s2)], &h0, &k).unwrap();
                    assert!((exact - prop.value(s1, s2, 0, t, tau)).norm() < 1e-9, "{s1} {s2}");
                }
            }
        }
        let eq = ggreen_exact(&[Leg::new(0, 0.2, BPlus), Leg::new(0, 0.2, B)], &h0, &k).unwrap();
        assert!((eq.re - n).abs() < 1e-9);
    }

    #[test]
    fn solvable_model_rotates_with_shifted_frequency() {
        let s = FockSpace::new(ModeSet::from_frequencies(&[1.0, 1.5]).unwrap(), 4, 1.0).unwrap();
        let v = [0.5, -0.2];
        let g = 0.3;
        let h = build_poly_operator(&s, &PolyCoefficients::free(s.modes()).plus(&PolyCoefficients::diagonal(&v).scaled(C64::new(g, 0.0))), true).unwrap();
        let k = vacuum_projector(&s);
        for m in 0..2 {
            let a = ggreen_exact(&[Leg::new(m, 1.7, B), Leg::new(m, 0.0, BPlus)], &h, &k).unwrap();
            let w = s.modes().omega(m) + g * v[m];
            assert!((a - C64::from_polar(1.0, -w * 1.7)).norm() < 1e-10);
        }
    }

    #[test]
    fn tilde_and_plain_legs_commute() {
        let s = FockSpace::new(lattice(2).clone(), 4, 1.0).unwrap();
        let coeffs = PolyCoefficients::free(s.modes()).plus(&PolyCoefficients::contact_quartic(s.modes(), 0.4).unwrap());
        let h = build_poly_operator(&s, &coeffs, true).unwrap();
        let k = thermal_state(&s, 1.0, 0.0).unwrap();
        let legs = [Leg::new(0, 0.3, BPlus), Leg::new(1, 0.8, BTilde), Leg::new(0, -0.2, B), Leg::new(1, 0.1, BTildePlus)];
        let a = ggreen_exact(&legs, &h, &k).unwrap();
        let perm = [legs[1], legs[0], legs[3], legs[2]];
        let b = ggreen_exact(&perm, &h, &k).unwrap();
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn zeroth_order_wick_sum_equals_generator_calculus() {
        let modes = lattice(2);
        let n = [0.3, 0.1];
        let prop = FreePropagator::new(&modes, &n, 1.0).unwrap();
        let legs = [Leg::new(0, 0.5, BPlus), Leg::new(1, 0.1, BTilde), Leg::new(0, -0.4, B), Leg::new(1, 0.9, BTildePlus), Leg::new(0, 0.2, BTildePlus), Leg::new(0, 0.7, BTilde)];
        let ds = wick_diagrams(0, &legs, &PolyCoefficients::new()).unwrap();
        let quad = TimeQuadrature::covering(&legs, 0.0);
        let wick = evaluate_diagrams(&ds, &prop, None, &quad).unwrap();
        let direct = free_ggreen_by_generators(&legs, &GaussianL::diagonal(&n), &modes.omegas(), 1.0).unwrap();
        assert!((wick - direct).norm() < 1e-12);
    }

    #[test]
    fn bare_two_point_diagram() {
        let modes = ModeSet::from_frequencies(&[1.0]).unwrap();
        let prop = FreePropagator::new(&modes, &[0.2], 1.0).unwrap();
        let legs = [Leg::new(0, 0.3, BPlus), Leg::new(0, 0.1, B)];
        let ds = wick_diagrams(0, &legs, &PolyCoefficients::new()).unwrap();
        assert_eq!(ds.len(), 1);
        let v = evaluate_diagram(&ds[0], &prop, None, &TimeQuadrature::covering(&legs, 0.0)).unwrap();
        assert!((v - prop.value(BPlus, B, 0, 0.3, 0.1)).norm() < 1e-15);
    }

    /// Labelled matchings counted without the mode/charge filter.
    fn brute_force_count(externals: &[Leg], v: &PolyCoefficients, order: usize) -> usize {
        fn all(n: usize) -> Vec<Vec<(usize, usize)>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for j in 1..n {
                for rest in all(n - 2) {
                    let map = |x: usize| if x + 1 < j { x + 1 } else { x + 2 };
                    let mut m = vec![(0, j)];
                    m.extend(rest.iter().map(|&(a, b)| (map(a), map(b))));
                    out.push(m);
                }
            }
            out
        }
        let pieces = vertex_pieces(v);
        let mut count = 0;
        let total = pieces.len().pow(order as u32);
        for code in 0..total {
            let mut legs: Vec<(usize, Sigma)> = externals.iter().map(|l| (l.mode, l.sigma)).collect();
            let mut c = code;
            for _ in 0..order {
                legs.extend(pieces[c % pieces.len()].legs.iter().copied());
                c /= pieces.len();
            }
            if legs.len() % 2 == 1 {
                continue;
            }
            let prop = FreePropagator::new(&ModeSet::from_frequencies(&vec![1.0; 4]).unwrap(), &[0.5; 4], 1.0).unwrap();
            for m in all(legs.len()) {
                let ok = m.iter().all(|&(a, b)| {
                    let x = Leg::new(legs[a].0, 0.3, legs[a].1);
                    let y = Leg::new(legs[b].0, 0.1, legs[b].1);
                    prop.contract(&x, &y, true) != ZERO || prop.contract(&y, &x, true) != ZERO
                });
                if ok {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn diagram_counts_match_exhaustive_enumeration() {
        let modes = lattice(2);
        let v = PolyCoefficients::contact_quartic(&modes, 1.0).unwrap();
        let two = [Leg::new(0, 0.3, BPlus), Leg::new(0, 0.1, B)];
        for (ext, order) in [(&two[..], 1usize), (&[][..], 1), (&two[..], 0)] {
            let ds = wick_diagrams(order, ext, &v).unwrap();
            let labelled: f64 = ds.iter().map(|d| d.weight).sum::<f64>() * crate::poly::factorial(order);
            assert_eq!(labelled.round() as usize, brute_force_count(ext, &v, order));
        }
        assert!(matches!(wick_diagrams(3, &two, &v), Err(Error::EnumerationBound(_))));
    }

    #[test]
    fn first_order_diagrams_equal_coupling_derivative_for_diagonal_model() {
        let s = FockSpace::new(ModeSet::from_frequencies(&[1.0, 1.4]).unwrap(), 12, 1.0).unwrap();
        let v = PolyCoefficients::diagonal(&[0.5, -0.3]);
        let h0 = build_poly_operator(&s, &PolyCoefficients::free(s.modes()), true).unwrap();
        let vop = build_poly_operator(&s, &v, true).unwrap();
        let k = thermal_state(&s, 0.5, 0.0).unwrap();
        let n: Vec<f64> = [1.0, 1.4].iter().map(|&w| bose_occupation(w, 0.5, 0.0, 1.0)).collect();
        let prop = FreePropagator::new(s.modes(), &n, 1.0).unwrap();
        let legs = [Leg::new(1, 1.2, BPlus), Leg::new(1, -0.3, B)];
        let fd = ggreen_exact_derivative(&legs, &h0, &vop, &k, 1e-4).unwrap();
        let ds = wick_diagrams(1, &legs, &v).unwrap();
        let quad = TimeQuadrature::covering(&legs, 0.0);
        let diag = evaluate_diagrams(&ds, &prop, None, &quad).unwrap();
        assert!((diag - fd).norm() / fd.norm() < 1e-4, "{diag} {fd}");
    }

    #[test]
    fn first_order_diagrams_equal_coupling_derivative_for_contact_model() {
        let s = FockSpace::new(lattice(4), 4, 1.0).unwrap();
        let v = PolyCoefficients::contact_quartic(s.modes(), 1.0).unwrap();
        let h0 = build_poly_operator(&s, &PolyCoefficients::free(s.modes()), true).unwrap();
        let vop = build_poly_operator(&s, &v, true).unwrap();
        let k = vacuum_projector(&s);
        let prop = FreePropagator::vacuum(s.modes(), 1.0);
        let legs = [Leg::new(1, 1.1, B), Leg::new(3, 0.9, B), Leg::new(0, -0.2, BPlus), Leg::new(0, 0.1, BPlus)];
        let fd = ggreen_exact_derivative(&legs, &h0, &vop, &k, 1e-4).unwrap();
        let ds = wick_diagrams(1, &legs, &v).unwrap();
        let diag = evaluate_diagrams(&ds, &prop, None, &TimeQuadrature::covering(&legs, 0.0)).unwrap();
        assert!(fd.norm() > 1e-3);
        assert!((diag - fd).norm() / fd.norm() < 1e-4, "{diag} {fd}");
    }
}
