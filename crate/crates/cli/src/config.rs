//! TOML run configuration.

use lfun_core::{ModeSet, PolyCoefficients, Sigma, C64};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
#[error("invalid config: {0}")]
pub struct ValidationError(pub String);

fn invalid(msg: impl Into<String>) -> ValidationError {
    ValidationError(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema_version: u32,
    pub model: Model,
    #[serde(default)]
    pub interaction: Interaction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub switching: Option<Switching>,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default)]
    pub propagator: PropagatorSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ggreen: Option<GgreenSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inclusive: Option<InclusiveSection>,
    #[serde(default)]
    pub evolve: EvolveSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Model {
    /// Explicit mode frequencies; exclusive with `lattice`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omegas: Option<Vec<f64>>,
    #[serde(default = "one")]
    pub hbar: f64,
    pub temperature: f64,
    #[serde(default)]
    pub mu: f64,
    /// Cutoff on total occupation.
    pub n_max: usize,
    /// Correlation degree cut for L-functional tables.
    pub degree: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<Lattice>,
}

/// Periodic chain with `ω(k) = ω₀ + 2J(1 − cos k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lattice {
    pub size: usize,
    pub omega0: f64,
    #[serde(default)]
    pub hopping: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InteractionKind {
    #[default]
    None,
    /// `Σ v(k) a⁺_k a_k`.
    Diagonal,
    /// Momentum-conserving contact term `(u/2L) Σ a⁺a⁺aa`.
    Quartic,
    /// `½ Σ (a⁺_k² + a_k²)`.
    Pairing,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interaction {
    #[serde(default)]
    pub kind: InteractionKind,
    #[serde(default)]
    pub g: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Switching {
    pub tau: f64,
    #[serde(default = "one")]
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub t_max: f64,
    pub t_step: f64,
    pub eps_points: usize,
    pub eps_half_width: f64,
}

impl Default for Grid {
    fn default() -> Self {
        Self { t_max: 5.0, t_step: 0.25, eps_points: 41, eps_half_width: 0.25 }
    }
}

impl Grid {
    /// `0, t_step, …` up to `t_max`.
    pub fn times(&self) -> Vec<f64> {
        let n = (self.t_max / self.t_step + 1e-9).floor() as usize;
        (0..=n).map(|i| i as f64 * self.t_step).collect()
    }

    /// Symmetric `−t_max..t_max` on the same step.
    pub fn symmetric_times(&self) -> Vec<f64> {
        let pos = self.times();
        pos.iter().rev().skip(1).map(|t| -t).chain(pos.iter().copied()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagatorSection {
    /// Pairs of generator symbols (`b+`, `b`, `bt+`, `bt`); all sixteen when empty.
    #[serde(default)]
    pub channels: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegSpec {
    pub mode: usize,
    pub time: f64,
    pub sigma: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GgreenSection {
    #[serde(default = "one_usize")]
    pub order: usize,
    pub legs: Vec<LegSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Identity,
    Beamsplitter,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InclusiveSection {
    pub preset: Preset,
    /// Incoming basis state, one occupation per mode.
    pub input: Vec<u8>,
    #[serde(default = "two")]
    pub degree: usize,
    #[serde(default = "quarter_pi")]
    pub theta: f64,
    #[serde(default = "first_pair")]
    pub pair: [usize; 2],
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Initial {
    #[default]
    Thermal,
    Vacuum,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveSection {
    #[serde(default)]
    pub initial: Initial,
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

fn two() -> usize {
    2
}

fn quarter_pi() -> f64 {
    std::f64::consts::FRAC_PI_4
}

fn first_pair() -> [usize; 2] {
    [0, 1]
}

pub fn parse_sigma(s: &str) -> Result<Sigma, ValidationError> {
    Sigma::ALL
        .into_iter()
        .find(|x| x.symbol() == s)
        .ok_or_else(|| invalid(format!("unknown generator {s:?}; expected one of b+, b, bt+, bt")))
}

fn finite(name: &str, x: f64) -> Result<(), ValidationError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} = {x} is not finite")))
    }
}

fn positive(name: &str, x: f64) -> Result<(), ValidationError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} = {x} must be positive and finite")))
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ValidationError> {
        let c: Config = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    /// Canonical TOML form; parsing it back gives an equal config.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical form, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    pub fn omegas(&self) -> Vec<f64> {
        match (&self.model.omegas, &self.model.lattice) {
            (Some(w), _) => w.clone(),
            (None, Some(l)) => (0..l.size)
                .map(|j| {
                    let k = 2.0 * std::f64::consts::PI * j as f64 / l.size as f64;
                    l.omega0 + 2.0 * l.hopping * (1.0 - k.cos())
                })
                .collect(),
            (None, None) => Vec::new(),
        }
    }

    pub fn modes(&self) -> lfun_core::Result<ModeSet> {
        match &self.model.lattice {
            Some(l) if self.model.omegas.is_none() => {
                let (w0, j) = (l.omega0, l.hopping);
                ModeSet::lattice(l.size, move |k| w0 + 2.0 * j * (1.0 - k.cos()))
            }
            _ => ModeSet::from_frequencies(&self.omegas()),
        }
    }

    /// Interaction polynomial `V`, without the coupling `g`.
    pub fn interaction(&self, modes: &ModeSet) -> lfun_core::Result<PolyCoefficients> {
        let i = &self.interaction;
        Ok(match i.kind {
            InteractionKind::None => PolyCoefficients::new(),
            InteractionKind::Diagonal => PolyCoefficients::diagonal(i.v.as_deref().unwrap_or(&[])),
            InteractionKind::Quartic => PolyCoefficients::contact_quartic(modes, i.u.unwrap_or(1.0))?,
            InteractionKind::Pairing => {
                let mut p = PolyCoefficients::new();
                for k in 0..modes.len() {
                    p.add_term(&[k, k], &[], C64::new(0.5, 0.0));
                    p.add_term(&[], &[k, k], C64::new(0.5, 0.0));
                }
                p
            }
        })
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", self.schema_version)));
        }
        let m = &self.model;
        positive("model.hbar", m.hbar)?;
        positive("model.temperature", m.temperature)?;
        finite("model.mu", m.mu)?;
        if m.n_max == 0 {
            return Err(invalid("model.n_max must be at least 1"));
        }
        if m.degree == 0 {
            return Err(invalid("model.degree must be at least 1"));
        }
        match (&m.omegas, &m.lattice) {
            (Some(_), Some(_)) => return Err(invalid("model.omegas and model.lattice are exclusive")),
            (None, None) => return Err(invalid("one of model.omegas or model.lattice is required")),
            (Some(w), None) if w.is_empty() => return Err(invalid("model.omegas is empty")),
            (None, Some(l)) => {
                if l.size == 0 {
                    return Err(invalid("model.lattice.size must be at least 1"));
                }
                finite("model.lattice.omega0", l.omega0)?;
                finite("model.lattice.hopping", l.hopping)?;
            }
            _ => {}
        }
        let omegas = self.omegas();
        for (k, &w) in omegas.iter().enumerate() {
            finite(&format!("omega[{k}]"), w)?;
        }
        let w_min = omegas.iter().copied().fold(f64::INFINITY, f64::min);
        if m.mu >= w_min {
            return Err(invalid(format!("mu = {} must lie below the smallest frequency {w_min}", m.mu)));
        }
        let n = omegas.len();

        let i = &self.interaction;
        finite("interaction.g", i.g)?;
        match i.kind {
            InteractionKind::Diagonal => match &i.v {
                Some(v) if v.len() == n => {
                    for (k, &x) in v.iter().enumerate() {
                        finite(&format!("interaction.v[{k}]"), x)?;
                    }
                }
                _ => return Err(invalid(format!("interaction.v needs {n} entries for a diagonal interaction"))),
            },
            InteractionKind::Quartic => {
                if m.lattice.is_none() {
                    return Err(invalid("a quartic interaction needs model.lattice"));
                }
                finite("interaction.u", i.u.unwrap_or(1.0))?;
            }
            InteractionKind::None | InteractionKind::Pairing => {}
        }

        if let Some(s) = &self.switching {
            positive("switching.tau", s.tau)?;
            positive("switching.a", s.a)?;
        }
        let g = &self.grid;
        positive("grid.t_max", g.t_max)?;
        positive("grid.t_step", g.t_step)?;
        if g.t_max / g.t_step > 1e5 {
            return Err(invalid("grid.t_max / grid.t_step exceeds 1e5 points"));
        }
        if g.eps_points < 5 {
            return Err(invalid("grid.eps_points must be at least 5"));
        }
        positive("grid.eps_half_width", g.eps_half_width)?;

        let check_mode = |what: &str, k: usize| {
            if k < n {
                Ok(())
            } else {
                Err(invalid(format!("{what} = {k} is out of range for {n} modes")))
            }
        };
        for [a, b] in &self.propagator.channels {
            parse_sigma(a)?;
            parse_sigma(b)?;
        }
        for &k in self.propagator.modes.iter().flatten() {
            check_mode("propagator.modes", k)?;
        }
        if let Some(gg) = &self.ggreen {
            if gg.legs.is_empty() {
                return Err(invalid("ggreen.legs is empty"));
            }
            for l in &gg.legs {
                check_mode("ggreen.legs.mode", l.mode)?;
                finite("ggreen.legs.time", l.time)?;
                parse_sigma(&l.sigma)?;
            }
        }
        if let Some(inc) = &self.inclusive {
            if inc.input.len() != n {
                return Err(invalid(format!("inclusive.input needs {n} occupations")));
            }
            let total: usize = inc.input.iter().map(|&x| x as usize).sum();
            if total > m.n_max {
                return Err(invalid(format!("inclusive.input has {total} quanta, above n_max = {}", m.n_max)));
            }
            if inc.degree > m.n_max {
                return Err(invalid(format!("inclusive.degree {} exceeds n_max = {}", inc.degree, m.n_max)));
            }
            finite("inclusive.theta", inc.theta)?;
            if inc.preset == Preset::Beamsplitter {
                check_mode("inclusive.pair", inc.pair[0])?;
                check_mode("inclusive.pair", inc.pair[1])?;
                if inc.pair[0] == inc.pair[1] {
                    return Err(invalid("inclusive.pair needs two distinct modes"));
                }
            }
            if m.hbar != 1.0 {
                return Err(invalid("inclusive tables need model.hbar = 1"));
            }
        }
        Ok(())
    }
}
