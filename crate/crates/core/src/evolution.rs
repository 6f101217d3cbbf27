//! Equation of motion `iħ dL/dt = Ĥ L = (H − H̃) L`, adiabatic switching and
//! the adiabatic scattering superoperator.

use crate::error::{Error, Result};
use crate::fock::{ModeSet, PolyCoefficients, C64, ONE};
use crate::lfunctional::{apply_sigma_poly, CorrelationTable, LFunctional, Sigma};
use crate::poly::Poly;
use crate::quadrature::PanelRule;

/// A polynomial Hamiltonian together with its two lifts to the generators.
#[derive(Debug, Clone, PartialEq)]
pub struct HatHamiltonian {
    coeffs: PolyCoefficients,
    n_modes: usize,
    hbar: f64,
}

impl HatHamiltonian {
    pub fn new(coeffs: PolyCoefficients, modes: &ModeSet, hbar: f64) -> Result<Self> {
        coeffs.check_modes(modes)?;
        Ok(Self { coeffs, n_modes: modes.len(), hbar })
    }

    /// `Ĥ₀` of `Σ ω(k) a⁺_k a_k`.
    pub fn free(modes: &ModeSet, hbar: f64) -> Self {
        Self { coeffs: PolyCoefficients::free(modes), n_modes: modes.len(), hbar }
    }

    pub fn coefficients(&self) -> &PolyCoefficients {
        &self.coeffs
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Degrees of exactness consumed by one application.
    pub fn headroom(&self) -> usize {
        self.coeffs.max_degree().saturating_sub(2)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { coeffs: self.coeffs.scaled(C64::new(s, 0.0)), n_modes: self.n_modes, hbar: self.hbar }
    }

    pub fn plus(&self, other: &Self) -> Self {
        Self { coeffs: self.coeffs.plus(&other.coeffs), n_modes: self.n_modes, hbar: self.hbar }
    }

    /// `H(b⁺, b) P`, i.e. `L_K ↦ L_{HK}`.
    pub fn left_poly(&self, p: &Poly) -> Poly {
        let mut out = Poly::zero(self.n_modes);
        for (cr, an, h) in self.coeffs.terms() {
            let mut q = p.clone();
            for &l in an.iter().rev() {
                q = apply_sigma_poly(&q, Sigma::B, l, self.hbar);
            }
            for &k in cr.iter().rev() {
                q = apply_sigma_poly(&q, Sigma::BPlus, k, self.hbar);
            }
            out.axpy(h, &q);
        }
        out
    }

    /// `H̃ P`, i.e. `L_K ↦ L_{KH}`. Each term `h·A` contributes `h·Ã⁺`,
    /// which is a product of `b̃` for the creators and `b̃⁺` for the annihilators.
    pub fn tilde_poly(&self, p: &Poly) -> Poly {
        let mut out = Poly::zero(self.n_modes);
        for (cr, an, h) in self.coeffs.terms() {
            let mut q = p.clone();
            // K a⁺_{k1}..a⁺_{km} a_{l1}..a_{ln}: factors are appended to K in reading order
            for &k in cr {
                q = apply_sigma_poly(&q, Sigma::BTilde, k, self.hbar);
            }
            for &l in an {
                q = apply_sigma_poly(&q, Sigma::BTildePlus, l, self.hbar);
            }
            out.axpy(h, &q);
        }
        out
    }

    /// `(H − H̃) P` without truncation.
    pub fn apply_poly(&self, p: &Poly) -> Poly {
        let mut out = self.left_poly(p);
        out.axpy(-ONE, &self.tilde_poly(p));
        out
    }

    /// `Ĥ L_K = L_{HK − KH}`.
    pub fn hat_apply(&self, l: &CorrelationTable) -> Result<CorrelationTable> {
        self.check_table(l)?;
        l.map_poly(self.headroom(), "hat_apply", |p| self.apply_poly(p))
    }

    fn check_table(&self, l: &CorrelationTable) -> Result<()> {
        if l.n_modes() != self.n_modes {
            return Err(Error::Dimension(format!("table has {} modes, Hamiltonian {}", l.n_modes(), self.n_modes)));
        }
        Ok(())
    }

    /// `Ĥ L` on any representation closed under the generators.
    pub fn hat_apply_functional<L: LFunctional>(&self, l: &L) -> Result<L> {
        let mut out = l.scaled(C64::new(0.0, 0.0));
        for (cr, an, h) in self.coeffs.terms() {
            let mut left = l.clone();
            for &m in an.iter().rev() {
                left = left.apply_generator(Sigma::B, m)?;
            }
            for &m in cr.iter().rev() {
                left = left.apply_generator(Sigma::BPlus, m)?;
            }
            let mut right = l.clone();
            for &m in cr {
                right = right.apply_generator(Sigma::BTilde, m)?;
            }
            for &m in an {
                right = right.apply_generator(Sigma::BTildePlus, m)?;
            }
            out = out.axpy(h, &left)?.axpy(-h, &right)?;
        }
        Ok(out)
    }
}

/// Fixed-step RK4 with step control by repeated halving.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorParams {
    /// Initial step.
    pub dt: f64,
    /// Accepted Richardson error estimate, relative to the largest coefficient.
    pub tol: f64,
    pub max_halvings: usize,
}

impl IntegratorParams {
    /// `ω_max·dt = 0.05`.
    pub fn for_modes(modes: &ModeSet) -> Self {
        let w = modes.omegas().iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-3);
        Self { dt: 0.05 / w, tol: 1e-10, max_halvings: 8 }
    }
}

impl Default for IntegratorParams {
    fn default() -> Self {
        Self { dt: 0.05, tol: 1e-10, max_halvings: 8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOutcome<T> {
    pub state: T,
    pub error_estimate: f64,
    pub steps: usize,
}

fn lincomb(base: &[Poly], c: C64, k: &[Poly]) -> Vec<Poly> {
    base.iter()
        .zip(k)
        .map(|(b, d)| {
            let mut x = b.clone();
            x.axpy(c, d);
            x
        })
        .collect()
}

type Rhs<'a> = dyn Fn(f64, &[Poly]) -> Vec<Poly> + 'a;

fn rk4_run(y0: &[Poly], t0: f64, t1: f64, n: usize, rhs: &Rhs<'_>) -> Vec<Poly> {
    let h = (t1 - t0) / n as f64;
    let hc = C64::new(h, 0.0);
    let mut y = y0.to_vec();
    for s in 0..n {
        let t = t0 + s as f64 * h;
        let k1 = rhs(t, &y);
        let k2 = rhs(t + 0.5 * h, &lincomb(&y, hc * 0.5, &k1));
        let k3 = rhs(t + 0.5 * h, &lincomb(&y, hc * 0.5, &k2));
        let k4 = rhs(t + h, &lincomb(&y, hc, &k3));
        for i in 0..y.len() {
            y[i].axpy(hc / 6.0, &k1[i]);
            y[i].axpy(hc / 3.0, &k2[i]);
            y[i].axpy(hc / 3.0, &k3[i]);
            y[i].axpy(hc / 6.0, &k4[i]);
        }
    }
    y
}

pub(crate) fn integrate_controlled(
    y0: &[Poly],
    t0: f64,
    t1: f64,
    params: &IntegratorParams,
    rhs: &Rhs<'_>,
) -> Result<EvolveOutcome<Vec<Poly>>> {
    if !(params.dt > 0.0) {
        return Err(Error::InvalidParameter { name: "dt", reason: format!("{} is not > 0", params.dt) });
    }
    if t1 == t0 {
        return Ok(EvolveOutcome { state: y0.to_vec(), error_estimate: 0.0, steps: 0 });
    }
    let mut n = ((t1 - t0).abs() / params.dt).ceil().max(1.0) as usize;
    let mut coarse = rk4_run(y0, t0, t1, n, rhs);
    let mut err = f64::INFINITY;
    for _ in 0..=params.max_halvings {
        n *= 2;
        let fine = rk4_run(y0, t0, t1, n, rhs);
        let scale = fine.iter().map(Poly::max_abs).fold(1.0f64, f64::max);
        err = fine
            .iter()
            .zip(&coarse)
            .map(|(f, c)| f.max_diff(c, usize::MAX))
            .fold(0.0f64, f64::max)
            / 15.0
            / scale;
        if err <= params.tol {
            return Ok(EvolveOutcome { state: fine, error_estimate: err, steps: n });
        }
        coarse = fine;
    }
    Err(Error::StepSizeFailure { tol: params.tol, achieved: err })
}

fn truncation_for(l: &CorrelationTable, headroom: usize, what: &str) -> Result<Option<usize>> {
    match l.exact_degree() {
        None => Ok(None),
        Some(d) if headroom == 0 => Ok(Some(d)),
        Some(d) => Err(Error::DegreeOverflow(format!(
            "{what} with a degree-{} interaction needs a complete table, this one is exact to {d}",
            headroom + 2
        ))),
    }
}

fn cut(p: Poly, exact: Option<usize>) -> Poly {
    match exact {
        Some(d) => p.truncated(d),
        None => p,
    }
}

/// `L(t) = exp(−iĤt/ħ) L` by RK4.
///
/// Tables exact only up to a finite degree can be evolved under quadratic
/// Hamiltonians; higher-degree Hamiltonians need a complete table.
pub fn evolve(l: &CorrelationTable, hat: &HatHamiltonian, t: f64, params: &IntegratorParams) -> Result<EvolveOutcome<CorrelationTable>> {
    hat.check_table(l)?;
    let defect = hat.coeffs.hermiticity_defect();
    if defect > 1e-12 {
        return Err(Error::NonHermitian { defect });
    }
    let exact = truncation_for(l, hat.headroom(), "evolve")?;
    let f = C64::new(0.0, -1.0 / hat.hbar);
    let rhs = |_t: f64, y: &[Poly]| vec![cut(hat.apply_poly(&y[0]), exact).scaled(f)];
    let out = integrate_controlled(std::slice::from_ref(l.poly()), 0.0, t, params, &rhs)?;
    let poly = out.state.into_iter().next().expect("one component");
    Ok(EvolveOutcome {
        state: CorrelationTable::from_poly(poly, l.hbar(), exact),
        error_estimate: out.error_estimate,
        steps: out.steps,
    })
}

/// Smooth step `ψ(x)/(ψ(x)+ψ(1−x))` with `ψ(x) = e^{−1/x}`.
fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let p = (-1.0 / x).exp();
    let q = (-1.0 / (1.0 - x)).exp();
    p / (p + q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileShape {
    /// Equal to 1 on `|s| ≤ τ/4`, C∞ shoulders, zero for `|s| ≥ τ`.
    FlatBump,
    /// Identically zero.
    Off,
}

/// Switching function `h(a t)` with a finite integration window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchingProfile {
    pub tau: f64,
    pub a: f64,
    pub shape: ProfileShape,
    pub t_min: f64,
    pub t_max: f64,
}

impl SwitchingProfile {
    pub fn flat_bump(tau: f64, a: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::InvalidParameter { name: "tau", reason: format!("{tau} is not > 0") });
        }
        if !(a > 0.0) {
            return Err(Error::InvalidParameter { name: "a", reason: format!("{a} is not > 0") });
        }
        Ok(Self { tau, a, shape: ProfileShape::FlatBump, t_min: -tau / a, t_max: tau / a })
    }

    pub fn off(tau: f64, a: f64) -> Result<Self> {
        Ok(Self { shape: ProfileShape::Off, ..Self::flat_bump(tau, a)? })
    }

    /// Same profile with a different integration window.
    pub fn with_window(self, t_min: f64, t_max: f64) -> Result<Self> {
        let p = Self { t_min, t_max, ..self };
        p.validate()?;
        Ok(p)
    }

    pub fn with_rate(self, a: f64) -> Result<Self> {
        let base = Self::flat_bump(self.tau, a)?;
        Ok(Self { shape: self.shape, ..base })
    }

    /// Value of the switching function at lab time `t`.
    pub fn h(&self, t: f64) -> f64 {
        match self.shape {
            ProfileShape::Off => 0.0,
            ProfileShape::FlatBump => {
                let s = (self.a * t).abs();
                let plateau = 0.25 * self.tau;
                if s <= plateau {
                    1.0
                } else {
                    smooth_step((self.tau - s) / (self.tau - plateau))
                }
            }
        }
    }

    /// Support of `h(at)` in lab time.
    pub fn support(&self) -> (f64, f64) {
        (-self.tau / self.a, self.tau / self.a)
    }

    /// Where `h(at)` changes smoothness class.
    pub fn breakpoints(&self) -> Vec<f64> {
        let (lo, hi) = self.support();
        let mut b = vec![lo, 0.25 * lo, 0.0, 0.25 * hi, hi];
        b.retain(|&x| x >= self.t_min && x <= self.t_max);
        b.push(self.t_min);
        b.push(self.t_max);
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.dedup();
        b
    }

    pub fn validate(&self) -> Result<()> {
        for t in [self.t_min, self.t_max] {
            let v = self.h(t);
            if v > 1e-12 {
                return Err(Error::WindowTooSmall { value: v });
            }
        }
        if self.t_min >= self.t_max {
            return Err(Error::InvalidParameter { name: "window", reason: format!("[{}, {}] is empty", self.t_min, self.t_max) });
        }
        Ok(())
    }

    /// Composite Gauss–Legendre rule over `[lo, hi]` aligned with the profile.
    pub fn rule(&self, lo: f64, hi: f64, per_panel: usize, max_width: f64) -> Result<PanelRule> {
        let mut b: Vec<f64> = self.breakpoints().into_iter().filter(|&x| x > lo && x < hi).collect();
        b.push(lo);
        b.push(hi);
        PanelRule::new(&b, per_panel, max_width)
    }

    /// `∫ f(g·h(at)) dt` over the window.
    pub fn integrate_response(&self, f: impl Fn(f64) -> f64) -> Result<f64> {
        let rule = self.rule(self.t_min, self.t_max, 16, 0.5)?;
        Ok(rule.integrate(|t| f(self.h(t))))
    }
}

/// Schrödinger-picture evolution under `Ĥ₀ + g h(at) V̂` from `t_min` to `t`.
pub fn adiabatic_evolve(
    l: &CorrelationTable,
    h0: &HatHamiltonian,
    v: &HatHamiltonian,
    g: f64,
    profile: &SwitchingProfile,
    t: f64,
    params: &IntegratorParams,
) -> Result<EvolveOutcome<CorrelationTable>> {
    profile.validate()?;
    h0.check_table(l)?;
    v.check_table(l)?;
    for c in [&h0.coeffs, &v.coeffs] {
        let defect = c.hermiticity_defect();
        if defect > 1e-12 {
            return Err(Error::NonHermitian { defect });
        }
    }
    let head = h0.headroom().max(if g == 0.0 { 0 } else { v.headroom() });
    let exact = truncation_for(l, head, "adiabatic_evolve")?;
    let f = C64::new(0.0, -1.0 / h0.hbar);
    let rhs = |s: f64, y: &[Poly]| {
        let mut d = h0.apply_poly(&y[0]);
        let gh = g * profile.h(s);
        if gh != 0.0 {
            d.axpy(C64::new(gh, 0.0), &v.apply_poly(&y[0]));
        }
        vec![cut(d, exact).scaled(f)]
    };
    let out = integrate_controlled(std::slice::from_ref(l.poly()), profile.t_min, t, params, &rhs)?;
    let poly = out.state.into_iter().next().expect("one component");
    Ok(EvolveOutcome {
        state: CorrelationTable::from_poly(poly, l.hbar(), exact),
        error_estimate: out.error_estimate,
        steps: out.steps,
    })
}

/// `‖(Ĥ₀ + gV̂) L‖`, the largest coefficient of the result.
pub fn stationarity_residual(l: &CorrelationTable, h0: &HatHamiltonian, v: &HatHamiltonian, g: f64) -> Result<f64> {
    let h = h0.plus(&v.scaled(g));
    Ok(h.hat_apply(l)?.poly().max_abs())
}

/// Interaction picture vertex `Ĥ_int(t) = e^{iĤ₀t/ħ} V̂ e^{−iĤ₀t/ħ}` for
/// diagonal `H₀`.
fn interaction_vertex(v: &HatHamiltonian, omegas: &[f64], t: f64, p: &Poly) -> Poly {
    v.apply_poly(&p.rotated(omegas, t)).rotated(omegas, -t)
}

/// Perturbative expansion `Ŝ_a L = Σ_j g^j S_j L`.
#[derive(Debug, Clone, PartialEq)]
pub struct DysonSeries {
    pub orders: Vec<CorrelationTable>,
}

impl DysonSeries {
    /// `Σ_{j ≤ p} g^j S_j L`.
    pub fn sum(&self, g: f64, p: usize) -> Result<CorrelationTable> {
        let mut acc = self.orders[0].clone();
        let mut gj = 1.0;
        for term in self.orders.iter().take(p + 1).skip(1) {
            gj *= g;
            acc = acc.axpy(C64::new(gj, 0.0), term)?;
        }
        Ok(acc)
    }

    pub fn order(&self) -> usize {
        self.orders.len() - 1
    }
}

pub const MAX_DYSON_ORDER: usize = 3;

/// Terms of the time-ordered expansion of
/// `Ŝ_a = T exp(−(i/ħ) ∫ g h(at) Ĥ_int(t) dt)` up to order `p`, found by
/// integrating the coupled system `dS_j/dt = −(i/ħ) h(at) Ĥ_int(t) S_{j−1}`
/// over the profile window.
pub fn adiabatic_smatrix(
    l: &CorrelationTable,
    modes: &ModeSet,
    v: &HatHamiltonian,
    profile: &SwitchingProfile,
    order: usize,
    params: &IntegratorParams,
) -> Result<DysonSeries> {
    if order > MAX_DYSON_ORDER {
        return Err(Error::OrderTooHigh { order, max: MAX_DYSON_ORDER });
    }
    profile.validate()?;
    v.check_table(l)?;
    let omegas = modes.omegas();
    let head = v.headroom();
    let exact_of = |j: usize| -> Result<Option<usize>> {
        match l.exact_degree() {
            None => Ok(None),
            Some(d) if d >= j * head => Ok(Some(d - j * head)),
            Some(d) => Err(Error::DegreeOverflow(format!("order {j} needs {} degrees of headroom, table is exact to {d}", j * head))),
        }
    };
    let exacts: Vec<Option<usize>> = (0..=order).map(exact_of).collect::<Result<_>>()?;
    let f = C64::new(0.0, -1.0 / v.hbar);
    let rhs = |t: f64, y: &[Poly]| {
        let h = profile.h(t);
        let mut out = vec![Poly::zero(l.n_modes()); y.len()];
        if h != 0.0 {
            for j in 1..y.len() {
                out[j] = cut(interaction_vertex(v, &omegas, t, &y[j - 1]), exacts[j]).scaled(f * h);
            }
        }
        out
    };
    let mut y0 = vec![l.poly().clone()];
    y0.extend((0..order).map(|_| Poly::zero(l.n_modes())));
    let out = integrate_controlled(&y0, profile.t_min, profile.t_max, params, &rhs)?;
    let orders = out
        .state
        .into_iter()
        .zip(exacts)
        .map(|(p, e)| CorrelationTable::from_poly(p, l.hbar(), e))
        .collect();
    Ok(DysonSeries { orders })
}

/// Non-perturbative `Ŝ_a L`, integrated in the interaction picture.
pub fn adiabatic_scatter(
    l: &CorrelationTable,
    modes: &ModeSet,
    v: &HatHamiltonian,
    g: f64,
    profile: &SwitchingProfile,
    params: &IntegratorParams,
) -> Result<EvolveOutcome<CorrelationTable>> {
    profile.validate()?;
    v.check_table(l)?;
    let exact = truncation_for(l, if g == 0.0 { 0 } else { v.headroom() }, "adiabatic_scatter")?;
    let omegas = modes.omegas();
    let f = C64::new(0.0, -g / v.hbar);
    let rhs = |t: f64, y: &[Poly]| {
        let h = profile.h(t);
        if h == 0.0 || g == 0.0 {
            return vec![Poly::zero(l.n_modes())];
        }
        vec![cut(interaction_vertex(v, &omegas, t, &y[0]), exact).scaled(f * h)]
    };
    let out = integrate_controlled(std::slice::from_ref(l.poly()), profile.t_min, profile.t_max, params, &rhs)?;
    let poly = out.state.into_iter().next().expect("one component");
    Ok(EvolveOutcome {
        state: CorrelationTable::from_poly(poly, l.hbar(), exact),
        error_estimate: out.error_estimate,
        steps: out.steps,
    })
}

/// Phase dressing `V_a = exp i Σ r(k)(c₁⁺c₁ − c₂⁺c₂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DressOperator {
    pub rates: Vec<f64>,
}

impl DressOperator {
    pub fn identity(n_modes: usize) -> Self {
        Self { rates: vec![0.0; n_modes] }
    }

    /// `r(k) = ½ ∫ (ω(k | g h(at)) − ω(k)) dt`; the half accounts for the
    /// dressing being applied on both sides of `Ŝ_a`.
    pub fn from_shift(profile: &SwitchingProfile, n_modes: usize, g: f64, shift: impl Fn(usize, f64) -> f64) -> Result<Self> {
        let rates = (0..n_modes)
            .map(|k| profile.integrate_response(|h| shift(k, g * h)).map(|x| 0.5 * x))
            .collect::<Result<_>>()?;
        Ok(Self { rates })
    }

    /// Multiplies `α^p α*^q` by `exp(i Σ r(k)(q_k − p_k))`.
    pub fn apply(&self, l: &CorrelationTable) -> CorrelationTable {
        l.rotated(&self.rates, -1.0)
    }
}

/// `V_a Ŝ_a V_a L` for one value of `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct DressedPoint {
    pub a: f64,
    pub table: CorrelationTable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DressedTrend {
    pub points: Vec<DressedPoint>,
    /// Largest coefficient change between consecutive rates.
    pub increments: Vec<f64>,
    /// True when the increments shrink along the sequence.
    pub converging: bool,
}

impl DressedTrend {
    /// Richardson-style estimate assuming geometric decay of the increments.
    pub fn extrapolated_increment(&self) -> Option<f64> {
        let n = self.increments.len();
        if n < 2 || self.increments[n - 2] == 0.0 {
            return None;
        }
        let q = self.increments[n - 1] / self.increments[n - 2];
        (q < 1.0).then(|| self.increments[n - 1] * q / (1.0 - q))
    }
}

/// `V_a Ŝ_a V_a L` along a decreasing sequence of rates.
pub fn inclusive_smatrix_adiabatic(
    l: &CorrelationTable,
    modes: &ModeSet,
    v: &HatHamiltonian,
    g: f64,
    profile: &SwitchingProfile,
    rates: &[f64],
    shift: impl Fn(usize, f64) -> f64,
    params: &IntegratorParams,
) -> Result<DressedTrend> {
    let mut points = Vec::with_capacity(rates.len());
    for &a in rates {
        let p = profile.with_rate(a)?;
        let dress = DressOperator::from_shift(&p, modes.len(), g, &shift)?;
        let s = adiabatic_scatter(&dress.apply(l), modes, v, g, &p, params)?.state;
        points.push(DressedPoint { a, table: dress.apply(&s) });
    }
    let increments: Vec<f64> = points.windows(2).map(|w| w[1].table.max_correlation_diff(&w[0].table)).collect();
    let converging = increments.windows(2).all(|w| w[1] <= w[0]);
    if !converging {
        log::warn!("dressed S-matrix increments do not decrease: {increments:?}");
    }
    Ok(DressedTrend { points, increments, converging })
}
