//! Two-point GGreen functions in `(k, ε)` form, the Dyson equation
//! `G⁻¹ = G₀⁻¹ + M` and quasiparticle poles.
//!
//! Transforms use `G(ε) = ∫ dΔ e^{−iεΔ} e^{−η|Δ|} G(Δ)` with `Δ = t₁ − t₂`.
//! The block `{b⁺, b̃} × {b, b̃⁺}` then has its pole near `+ω(k)` and the
//! complementary block near `−ω(k)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fock::{build_ladder, FockOperator, Ladder, Matrix, ModeSet, PolyCoefficients, Spectrum, C64, ONE, ZERO};
use crate::keldysh::{wick_diagrams, Diagram, FreePropagator, Leg};
use crate::lfunctional::Sigma;
use crate::quadrature::PanelRule;

/// Window applied to the time series before the transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Apodization {
    /// `e^{−η|Δ|}` only.
    Exponential,
    /// `e^{−η|Δ|}` times a Hann taper over `[−T, T]`.
    Hann,
}

/// Time window and regularization of a finite-time transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParams {
    /// Half-span `T`; samples cover `[−T, T]`.
    pub t_max: f64,
    pub eta: f64,
    pub apodization: Apodization,
    pub per_panel: usize,
    pub max_width: f64,
    /// Largest accepted `|G(±T)| e^{−ηT}` relative to `|G(0)|`.
    pub leakage_threshold: f64,
}

impl SpectralParams {
    /// Span `20·2π/ω_min` and `η` with `e^{−ηT} = e^{−18}`.
    pub fn for_modes(modes: &ModeSet) -> Self {
        let w = modes.omegas().iter().fold(f64::INFINITY, |m, &x| m.min(x.abs())).max(1e-3);
        let wmax = modes.omegas().iter().fold(0.0f64, |m, &x| m.max(x.abs())).max(w);
        let t_max = 10.0 * std::f64::consts::TAU / w;
        Self { t_max, eta: 18.0 / t_max, apodization: Apodization::Exponential, per_panel: 12, max_width: 0.6 / wmax, leakage_threshold: 1e-6 }
    }

    fn check(&self, modes: &ModeSet) -> Result<()> {
        let w = modes.omegas().iter().fold(f64::INFINITY, |m, &x| m.min(x.abs()));
        let need = 20.0 * std::f64::consts::TAU / w;
        if 2.0 * self.t_max < need * (1.0 - 1e-12) {
            return Err(Error::InvalidParameter { name: "t_max", reason: format!("span {} is shorter than 20·2π/ω_min = {need}", 2.0 * self.t_max) });
        }
        if !(self.eta > 0.0) {
            return Err(Error::InvalidParameter { name: "eta", reason: format!("{} is not > 0", self.eta) });
        }
        Ok(())
    }

    fn window(&self, d: f64) -> f64 {
        let e = (-self.eta * d.abs()).exp();
        match self.apodization {
            Apodization::Exponential => e,
            Apodization::Hann => e * 0.5 * (1.0 + (std::f64::consts::PI * d / self.t_max).cos()),
        }
    }
}

/// `G(σ₁, σ₂; k, ε)` on a frequency grid; rows and columns follow [`Sigma::index`].
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPointG {
    pub k: usize,
    pub eps: Vec<f64>,
    pub values: Vec<Matrix>,
    pub eta: f64,
    pub t_max: f64,
}

impl TwoPointG {
    /// Transform of a sampled `4×4` time series `Δ ↦ G(Δ)`.
    pub fn from_time_series(k: usize, eps: &[f64], params: &SpectralParams, series: impl Fn(f64) -> Result<Matrix>) -> Result<Self> {
        let rule = PanelRule::new(&[-params.t_max, 0.0, params.t_max], params.per_panel, params.max_width)?;
        let samples: Vec<Matrix> = rule.nodes.iter().map(|&d| series(d)).collect::<Result<_>>()?;
        let g0 = series(0.0)?.norm().max(1e-300);
        let edge = series(params.t_max)?.norm().max(series(-params.t_max)?.norm()) * params.window(params.t_max);
        if edge / g0 > params.leakage_threshold {
            return Err(Error::SpectralLeakage { leakage: edge / g0, threshold: params.leakage_threshold });
        }
        let values = eps
            .iter()
            .map(|&e| {
                let mut acc = Matrix::zeros(4, 4);
                for ((&d, &w), s) in rule.nodes.iter().zip(&rule.weights).zip(&samples) {
                    acc += s * (C64::from_polar(w * params.window(d), -e * d));
                }
                acc
            })
            .collect();
        Ok(Self { k, eps: eps.to_vec(), values, eta: params.eta, t_max: params.t_max })
    }

    /// Analytic transform of the free propagator on the infinite line.
    pub fn free(prop: &FreePropagator, k: usize, eps: &[f64], eta: f64) -> Self {
        let w = prop.omegas()[k];
        let values = eps
            .iter()
            .map(|&e| {
                Matrix::from_fn(4, 4, |r, c| {
                    let (s1, s2) = (Sigma::from_index(r), Sigma::from_index(c));
                    let later = prop.equal_time(s1, s2, k);
                    let earlier = prop.equal_time(s2, s1, k);
                    let om = s1.phase_sign() * w;
                    if s1.phase_sign() + s2.phase_sign() != 0.0 {
                        return ZERO;
                    }
                    // ∫₀^∞ e^{i(Ω−ε)Δ−ηΔ} and ∫_{−∞}^0 e^{i(Ω−ε)Δ+ηΔ}
                    let x = C64::new(0.0, om - e);
                    C64::new(later, 0.0) / (C64::new(eta, 0.0) - x) + C64::new(earlier, 0.0) / (C64::new(eta, 0.0) + x)
                })
            })
            .collect();
        Self { k, eps: eps.to_vec(), values, eta, t_max: f64::INFINITY }
    }

    /// Determinant of the block of `G⁻¹` carrying the pole near `sign·ω`.
    pub fn block_inverse_det(&self, positive: bool, i: usize) -> C64 {
        block_det(&self.values[i], positive).map_or(ZERO, |d| ONE / d)
    }
}

fn block_rows(positive: bool) -> ([usize; 2], [usize; 2]) {
    if positive {
        ([Sigma::BPlus.index(), Sigma::BTilde.index()], [Sigma::B.index(), Sigma::BTildePlus.index()])
    } else {
        ([Sigma::B.index(), Sigma::BTildePlus.index()], [Sigma::BPlus.index(), Sigma::BTilde.index()])
    }
}

fn block_det(g: &Matrix, positive: bool) -> Option<C64> {
    let (r, c) = block_rows(positive);
    let d = g[(r[0], c[0])] * g[(r[1], c[1])] - g[(r[0], c[1])] * g[(r[1], c[0])];
    (d.norm() > 0.0).then_some(d)
}

/// Exact two-point function `G(σ₁,σ₂; Δ)` for legs `(k, Δ, σ₁)`, `(k, 0, σ₂)`,
/// evaluated in the eigenbasis of `H` at `O(d²)` per time.
pub struct TwoPointSeries {
    energies: Vec<f64>,
    hbar: f64,
    /// Per channel `(r, c)` and branch: weights `W` with `G = Σ W_ij e^{i(E_i−E_j)Δ/ħ}`.
    channels: Vec<(usize, usize, [Matrix; 2])>,
}

impl TwoPointSeries {
    pub fn new(spectrum: &Spectrum, k_state: &FockOperator, k: usize) -> Result<Self> {
        let space = spectrum.space();
        space.modes().check(k)?;
        let v = &spectrum.vectors;
        let to_eig = |m: &Matrix| v.adjoint() * m * v;
        let create = to_eig(build_ladder(space, k, Ladder::Create)?.matrix());
        let annihilate = to_eig(build_ladder(space, k, Ladder::Annihilate)?.matrix());
        let kt = to_eig(k_state.matrix());
        let op = |s: Sigma| match s {
            Sigma::BPlus | Sigma::BTilde => &create,
            Sigma::B | Sigma::BTildePlus => &annihilate,
        };
        let mut channels = Vec::new();
        for s1 in Sigma::ALL {
            for s2 in Sigma::ALL {
                if s1.phase_sign() + s2.phase_sign() != 0.0 {
                    continue;
                }
                // branch 0: leg 1 latest (Δ ≥ 0); branch 1: leg 2 latest
                let weights = |first_latest: bool| {
                    let (l1, l2) = if first_latest { ((s1, true), (s2, false)) } else { ((s2, false), (s1, true)) };
                    // Tr(P Q K) with A = (later)(earlier) and B = (earlier)(later)
                    let (p, q) = match (l1.0.is_tilde(), l2.0.is_tilde()) {
                        (false, false) | (true, false) => (l1, l2),
                        (true, true) | (false, true) => (l2, l1),
                    };
                    // the leg at time Δ is the one flagged true
                    let w = if p.1 { op(p.0).component_mul(&(op(q.0) * &kt).transpose()) } else { op(q.0).component_mul(&(&kt * op(p.0)).transpose()) };
                    w
                };
                channels.push((s1.index(), s2.index(), [weights(true), weights(false)]));
            }
        }
        Ok(Self { energies: spectrum.values.clone(), hbar: space.hbar(), channels })
    }

    pub fn at(&self, d: f64) -> Matrix {
        let n = self.energies.len();
        let ph: Vec<C64> = self.energies.iter().map(|&e| C64::from_polar(1.0, e * d / self.hbar)).collect();
        let mut out = Matrix::zeros(4, 4);
        for (r, c, br) in &self.channels {
            // ties count leg 1 as later
            let w = &br[usize::from(d < 0.0)];
            let mut acc = ZERO;
            for j in 0..n {
                for i in 0..n {
                    acc += w[(i, j)] * ph[i] * ph[j].conj();
                }
            }
            out[(*r, *c)] = acc;
        }
        out
    }
}

/// Transform of the exact two-point function of `H` in the state `K`.
///
/// Channels pairing equal charges vanish for the number-conserving models
/// used here and are not sampled.
pub fn g2_spectrum(spectrum: &Spectrum, k_state: &FockOperator, k: usize, eps: &[f64], params: &SpectralParams) -> Result<TwoPointG> {
    params.check(spectrum.space().modes())?;
    spectrum.space().modes().check(k)?;
    let series = TwoPointSeries::new(spectrum, k_state, k)?;
    TwoPointG::from_time_series(k, eps, params, |d| Ok(series.at(d)))
}

/// `M(k, ε)` per grid point; `None` where an inverse does not exist.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfEnergy {
    pub k: usize,
    pub eps: Vec<f64>,
    pub values: Vec<Option<Matrix>>,
}

impl SelfEnergy {
    pub fn masked(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().map(|m| m.iter().map(|x| x.norm()).fold(0.0, f64::max)).fold(0.0, f64::max)
    }
}

fn inverse(m: &Matrix) -> Option<Matrix> {
    let scale = m.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let inv = m.clone().try_inverse()?;
    let cond = inv.iter().map(|x| x.norm()).fold(0.0, f64::max) * scale;
    (cond.is_finite() && cond < 1e14).then_some(inv)
}

/// `M = G⁻¹ − G₀⁻¹`.
pub fn self_energy_extract(g: &TwoPointG, g0: &TwoPointG) -> Result<SelfEnergy> {
    if g.eps != g0.eps {
        return Err(Error::Dimension("frequency grids differ".into()));
    }
    let values: Vec<Option<Matrix>> = g
        .values
        .iter()
        .zip(&g0.values)
        .map(|(a, b)| Some(inverse(a)? - inverse(b)?))
        .collect();
    let masked = values.iter().filter(|v| v.is_none()).count();
    if masked > 0 {
        log::warn!("self-energy masked at {masked} of {} grid points", values.len());
    }
    Ok(SelfEnergy { k: g.k, eps: g.eps.clone(), values })
}

/// `G = (G₀⁻¹ + M)⁻¹`.
pub fn dyson_solve(g0: &TwoPointG, m: &SelfEnergy) -> Result<Vec<Option<Matrix>>> {
    if g0.eps != m.eps {
        return Err(Error::Dimension("frequency grids differ".into()));
    }
    Ok(g0.values.iter().zip(&m.values).map(|(a, s)| inverse(&(inverse(a)? + s.as_ref()?))).collect())
}

/// One amputated contraction pattern of the two-point kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct AmputatedDiagram {
    pub diagram: Diagram,
    /// Vertex legs that attach to the two amputated external lines.
    pub amputated: (usize, usize),
}

impl AmputatedDiagram {
    /// Vertex graph: nodes are the two external points then the vertices.
    fn graph(&self) -> (usize, Vec<(usize, usize)>, usize) {
        let d = &self.diagram;
        let (n, edges) = d.adjacency();
        (n, edges, 2)
    }

    /// 1PI by deleting each internal edge in turn and testing connectivity.
    pub fn is_one_particle_irreducible(&self) -> bool {
        let (n, edges, ne) = self.graph();
        if !connected(n, &edges, None) {
            return false;
        }
        (0..edges.len()).filter(|&e| edges[e].0 >= ne && edges[e].1 >= ne).all(|e| connected(n, &edges, Some(e)))
    }

    /// 1PI by bridge finding; external edges are allowed to be bridges.
    pub fn is_one_particle_irreducible_by_bridges(&self) -> bool {
        let (n, edges, ne) = self.graph();
        if !connected(n, &edges, None) {
            return false;
        }
        bridges(n, &edges).into_iter().all(|e| edges[e].0 < ne || edges[e].1 < ne)
    }
}

fn connected(n: usize, edges: &[(usize, usize)], skip: Option<usize>) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for (i, &(a, b)) in edges.iter().enumerate() {
            if Some(i) == skip {
                continue;
            }
            for (x, y) in [(a, b), (b, a)] {
                if x == u && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Tarjan low-link bridge search on a multigraph.
fn bridges(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (i, &(a, b)) in edges.iter().enumerate() {
        if a != b {
            adj[a].push((b, i));
            adj[b].push((a, i));
        }
    }
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut out = Vec::new();
    let mut timer = 0;
    fn dfs(u: usize, parent_edge: Option<usize>, adj: &[Vec<(usize, usize)>], disc: &mut [usize], low: &mut [usize], timer: &mut usize, out: &mut Vec<usize>) {
        disc[u] = *timer;
        low[u] = *timer;
        *timer += 1;
        for &(v, e) in &adj[u] {
            if Some(e) == parent_edge {
                continue;
            }
            if disc[v] == usize::MAX {
                dfs(v, Some(e), adj, disc, low, timer, out);
                low[u] = low[u].min(low[v]);
                if low[v] > disc[u] {
                    out.push(e);
                }
            } else {
                low[u] = low[u].min(disc[v]);
            }
        }
    }
    for s in 0..n {
        if disc[s] == usize::MAX {
            dfs(s, None, &adj, &mut disc, &mut low, &mut timer, &mut out);
        }
    }
    out
}

/// Amputated connected diagrams of the two-point kernel at order `p ≥ 1`.
///
/// Two placeholder externals of opposite charge choices are contracted to
/// vertex legs; each pattern is returned once per charge pair.
pub fn amputated_diagrams(order: usize, k: usize, v: &PolyCoefficients) -> Result<Vec<AmputatedDiagram>> {
    let mut out = Vec::new();
    for s1 in [Sigma::BPlus, Sigma::B] {
        for s2 in [Sigma::BPlus, Sigma::B] {
            let ext = [Leg::new(k, 0.0, s1), Leg::new(k, 0.0, s2)];
            for d in wick_diagrams(order, &ext, v)? {
                let mut a = None;
                let mut b = None;
                for &(i, j) in &d.pairing {
                    if i == 0 {
                        a = Some(j);
                    }
                    if i == 1 {
                        b = Some(j);
                    }
                }
                let (Some(a), Some(b)) = (a, b) else { continue };
                // both externals must land on vertices
                if a < 2 || b < 2 {
                    continue;
                }
                out.push(AmputatedDiagram { diagram: d, amputated: (a, b) });
            }
        }
    }
    Ok(out)
}

/// Amputated kernel value `K(σ_a, σ_b; ε)` of one diagram with the `e^{−η|Δ|}` regularization.
fn amputated_value(d: &AmputatedDiagram, prop: &FreePropagator, eps: f64, eta: f64) -> Result<(usize, usize, C64)> {
    let dg = &d.diagram;
    let (a, b) = d.amputated;
    let (va, pa) = dg.owner(a).expect("vertex leg");
    let (vb, pb) = dg.owner(b).expect("vertex leg");
    let sa = dg.vertices[va].legs[pa].1;
    let sb = dg.vertices[vb].legs[pb].1;
    let f = C64::new(0.0, -1.0 / prop.hbar()).powu(dg.order() as u32);
    let mut coeff = C64::new(dg.weight, 0.0) * f;
    for v in &dg.vertices {
        coeff *= v.coeff;
    }
    let leg = |idx: usize, times: &[f64]| {
        let (j, p) = dg.owner(idx).expect("vertex leg");
        let (m, s) = dg.vertices[j].legs[p];
        Leg::new(m, times[j], s)
    };
    let internal: Vec<(usize, usize)> = dg.pairing.iter().copied().filter(|&(i, _)| i >= 2).collect();
    let product = |times: &[f64]| -> C64 { internal.iter().map(|&(i, j)| prop.contract(&leg(i, times), &leg(j, times), true)).product() };
    let value = match dg.order() {
        1 => coeff * product(&[0.0]),
        2 => {
            // relative time of the two vertices, oriented from vertex 1 to vertex 0
            let mut omega = 0.0;
            for &(i, j) in &internal {
                let (x, y) = (leg(i, &[0.0, 0.0]), leg(j, &[0.0, 0.0]));
                let (ix, _) = dg.owner(i).unwrap();
                let (iy, _) = dg.owner(j).unwrap();
                if ix != iy {
                    let on0 = if ix == 0 { x } else { y };
                    omega += prop.omegas()[on0.mode] * on0.sigma.phase_sign();
                }
            }
            let plus = product(&[1.0, 0.0]) * C64::from_polar(1.0, -omega);
            let minus = product(&[0.0, 1.0]) * C64::from_polar(1.0, omega);
            // Δ = t₀ − t₁; the kernel depends on ε only when the amputation points sit on different vertices
            let e = if va == vb {
                0.0
            } else if va == 0 {
                eps
            } else {
                -eps
            };
            let x = C64::new(0.0, omega - e);
            coeff * (plus / (C64::new(eta, 0.0) - x) + minus / (C64::new(eta, 0.0) + x))
        }
        p => return Err(Error::OrderTooHigh { order: p, max: 2 }),
    };
    Ok((sa.index(), sb.index(), value))
}

/// `M(ε) = −Σ_{j ≤ p} g^j K_j(ε)` with `K_j` the 1PI amputated kernels.
pub fn self_energy_diagrams(prop: &FreePropagator, v: &PolyCoefficients, k: usize, eps: &[f64], g: f64, order: usize, eta: f64) -> Result<SelfEnergy> {
    if order > 2 {
        return Err(Error::OrderTooHigh { order, max: 2 });
    }
    let mut values = vec![Matrix::zeros(4, 4); eps.len()];
    let mut gj = 1.0;
    for j in 1..=order {
        gj *= g;
        let ds: Vec<AmputatedDiagram> = amputated_diagrams(j, k, v)?.into_iter().filter(|d| d.is_one_particle_irreducible()).collect();
        for (i, &e) in eps.iter().enumerate() {
            for d in &ds {
                let (a, b, val) = amputated_value(d, prop, e, eta)?;
                values[i][(a, b)] -= val * gj;
            }
        }
    }
    Ok(SelfEnergy { k, eps: eps.to_vec(), values: values.into_iter().map(Some).collect() })
}

/// Pole `ω(k|g)` of one charge block.
#[derive(Debug, Clone, PartialEq)]
pub struct Pole {
    /// `Re` is the energy, `−Im` the width beyond the regularization.
    pub value: C64,
    /// Both zeros of the fitted `det G⁻¹`.
    pub zeros: [C64; 2],
    /// Relative residual of the rational fit.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasiparticleDatum {
    pub k: usize,
    pub free_energy: f64,
    pub positive: Pole,
    pub negative: Pole,
}

/// Fit `D(x) ≈ (p₀ + p₁x + p₂x²)/(1 + qx)` by linear least squares.
fn pade21(x: &[f64], d: &[C64]) -> Result<([C64; 3], C64, f64)> {
    let n = x.len();
    if n < 4 {
        return Err(Error::InvalidParameter { name: "eps", reason: "pole fit needs at least four grid points in the bracket".into() });
    }
    let a = DMatrix::from_fn(n, 4, |i, j| match j {
        0 => ONE,
        1 => C64::new(x[i], 0.0),
        2 => C64::new(x[i] * x[i], 0.0),
        _ => -d[i] * x[i],
    });
    let rhs = DVector::from_iterator(n, d.iter().copied());
    let sol = a.clone().svd(true, true).solve(&rhs, 1e-14).map_err(|e| Error::InvalidParameter { name: "fit", reason: e.to_string() })?;
    let p = [sol[0], sol[1], sol[2]];
    let q = sol[3];
    let scale = d.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    let res = x
        .iter()
        .zip(d)
        .map(|(&xi, &di)| ((p[0] + p[1] * xi + p[2] * xi * xi) / (ONE + q * xi) - di).norm())
        .fold(0.0, f64::max)
        / scale;
    Ok((p, q, res))
}

fn polish(p: &[C64; 3], mut z: C64) -> C64 {
    for _ in 0..20 {
        let f = p[0] + p[1] * z + p[2] * z * z;
        let df = p[1] + p[2] * z * 2.0;
        if df.norm() == 0.0 {
            break;
        }
        let step = f / df;
        z -= step;
        if step.norm() < 1e-16 {
            break;
        }
    }
    z
}

fn fit_pole(eps: &[f64], dets: &[C64], center: f64, half_width: f64, eta: f64) -> Result<Pole> {
    let (xs, ds): (Vec<f64>, Vec<C64>) = eps
        .iter()
        .zip(dets)
        .filter(|(&e, _)| (e - center).abs() <= half_width)
        .map(|(&e, &d)| ((e - center) / half_width, d))
        .unzip();
    let (p, _q, residual) = pade21(&xs, &ds)?;
    let disc = (p[1] * p[1] - p[0] * p[2] * 4.0).sqrt();
    let mut z = [(-p[1] + disc) / (p[2] * 2.0), (-p[1] - disc) / (p[2] * 2.0)];
    for r in z.iter_mut() {
        *r = polish(&p, *r);
    }
    let zeros = z.map(|r| C64::new(center, 0.0) + r * half_width);
    let mid = (zeros[0] + zeros[1]) * 0.5;
    if !mid.re.is_finite() || (mid.re - center).abs() > half_width {
        return Err(Error::NoPole { lo: center - half_width, hi: center + half_width });
    }
    let half_sep = 0.5 * (zeros[0].im - zeros[1].im).abs();
    Ok(Pole { value: C64::new(mid.re, -(half_sep - eta)), zeros, residual })
}

/// Poles of `G` near `±ω(k)` within `[±ω(k) − Δ, ±ω(k) + Δ]`.
pub fn quasiparticle_poles(g: &TwoPointG, free_energy: f64, half_width: f64) -> Result<QuasiparticleDatum> {
    let pos: Vec<C64> = (0..g.eps.len()).map(|i| g.block_inverse_det(true, i)).collect();
    let neg: Vec<C64> = (0..g.eps.len()).map(|i| g.block_inverse_det(false, i)).collect();
    Ok(QuasiparticleDatum {
        k: g.k,
        free_energy,
        positive: fit_pole(&g.eps, &pos, free_energy, half_width, g.eta)?,
        negative: fit_pole(&g.eps, &neg, -free_energy, half_width, g.eta)?,
    })
}

/// Poles from `G₀` and `M`.
pub fn quasiparticle_poles_from_self_energy(g0: &TwoPointG, m: &SelfEnergy, free_energy: f64, half_width: f64) -> Result<QuasiparticleDatum> {
    let g = dyson_solve(g0, m)?;
    let values = g
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| Error::MissingEntry(format!("Dyson solution singular at ε = {}", g0.eps[i]))))
        .collect::<Result<_>>()?;
    let g = TwoPointG { k: g0.k, eps: g0.eps.clone(), values, eta: g0.eta, t_max: g0.t_max };
    quasiparticle_poles(&g, free_energy, half_width)
}

/// Uniform grid of `n` points on `[lo, hi]`.
pub fn frequency_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}
