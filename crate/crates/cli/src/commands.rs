use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lfun_core::dyson::{frequency_grid, g2_spectrum, quasiparticle_poles, SpectralParams};
use lfun_core::evolution::{self, adiabatic_evolve, HatHamiltonian, IntegratorParams, SwitchingProfile};
use lfun_core::fock::{build_poly_operator, number_operator, thermal_state};
use lfun_core::inclusive::{sigma_bruteforce, Provenance, SMatrixOp};
use lfun_core::keldysh::{evaluate_diagrams, wick_diagrams, FreePropagator, Leg, TimeQuadrature};
use lfun_core::lfunctional::equilibrium_gaussian;
use lfun_core::sample::haar_unitary;
use lfun_core::{selfcheck, FockOperator, FockSpace, Ladder, ModeSet, PolyCoefficients, Sigma, Spectrum, Word, C64};

use crate::config::{parse_sigma, Config, Initial, Preset, ValidationError};
use crate::output::{complex, Cell, Plot, Report, Table};

#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Module(#[from] lfun_core::Error),
}

type Result<T> = std::result::Result<T, CommandError>;

fn momentum_cell(modes: &ModeSet, k: usize) -> Cell {
    Cell::Float(modes.modes()[k].momentum)
}

pub fn equilibrium(c: &Config) -> Result<Report> {
    let m = &c.model;
    let modes = c.modes()?;
    let gauss = equilibrium_gaussian(&modes, m.temperature, m.mu, m.hbar)?;
    let n = gauss.occupations().expect("diagonal Gaussian");

    let mut occ = Table::new("occupation", &["mode", "momentum", "omega", "n", "n_truncated"]);
    let mut lam = Table::new("gaussian_l", &["k", "kp", "n_re", "n_im"]);
    let mut points = Vec::new();
    for k in 0..modes.len() {
        // single-mode check against the truncated thermal trace
        let single = FockSpace::new(ModeSet::from_frequencies(&[modes.omega(k)])?, m.n_max, m.hbar)?;
        let rho = thermal_state(&single, m.temperature, m.mu)?;
        let nt = m.hbar * rho.mul(&number_operator(&single, 0)?).trace().re;
        occ.push(vec![k.into(), momentum_cell(&modes, k), modes.omega(k).into(), n[k].into(), nt.into()]);
        lam.push(vec![k.into(), k.into(), n[k].into(), 0.0.into()]);
        points.push((modes.omega(k), n[k]));
    }
    let plot = Plot::new("occupation", "omega", "n").series("Bose occupation", points);
    Ok(Report { tables: vec![occ, lam], plots: vec![plot] })
}

fn initial_table(c: &Config, modes: &ModeSet) -> Result<lfun_core::CorrelationTable> {
    let m = &c.model;
    Ok(match c.evolve.initial {
        Initial::Thermal => equilibrium_gaussian(modes, m.temperature, m.mu, m.hbar)?.to_table(m.degree, m.hbar),
        Initial::Vacuum => lfun_core::CorrelationTable::one(modes.len(), m.hbar),
    })
}

/// With a `[switching]` section the coupling is ramped by the profile from its
/// window start; otherwise it is switched on suddenly at `t = 0`.
pub fn evolve(c: &Config) -> Result<Report> {
    let modes = c.modes()?;
    let hbar = c.model.hbar;
    let g = c.interaction.g;
    let l0 = initial_table(c, &modes)?;
    let h0 = HatHamiltonian::free(&modes, hbar);
    let v = HatHamiltonian::new(c.interaction(&modes)?, &modes, hbar)?;
    let prof = match &c.switching {
        Some(s) => Some(SwitchingProfile::flat_bump(s.tau, s.a)?),
        None => None,
    };
    let quench = h0.plus(&v.scaled(g));
    let params = IntegratorParams::for_modes(&modes);

    let mut table = Table::new("evolve", &["t", "h", "mode", "n_re", "n_im", "error_estimate", "steps"]);
    let mut series = vec![Vec::new(); modes.len()];
    for s in c.grid.times() {
        let (t, h, out) = match &prof {
            Some(p) => {
                let t = p.t_min + s;
                if t > p.t_max + 1e-12 {
                    break;
                }
                (t, p.h(t), adiabatic_evolve(&l0, &h0, &v, g, p, t, &params)?)
            }
            None => (s, 1.0, evolution::evolve(&l0, &quench, s, &params)?),
        };
        for (k, pts) in series.iter_mut().enumerate() {
            let n = out.state.expectation(&Word(vec![(k, Ladder::Create), (k, Ladder::Annihilate)]))?;
            let [re, im] = complex(n);
            table.push(vec![t.into(), h.into(), k.into(), re, im, out.error_estimate.into(), out.steps.into()]);
            pts.push((t, n.re));
        }
    }
    let mut plot = Plot::new("evolve", "t", "<a+ a>");
    for (k, pts) in series.into_iter().enumerate() {
        plot = plot.series(format!("mode {k}"), pts);
    }
    Ok(Report { tables: vec![table], plots: vec![plot] })
}

fn thermal_propagator(c: &Config, modes: &ModeSet) -> Result<FreePropagator> {
    let m = &c.model;
    let gauss = equilibrium_gaussian(modes, m.temperature, m.mu, m.hbar)?;
    Ok(FreePropagator::from_gaussian(modes, &gauss, m.hbar)?)
}

pub fn propagator(c: &Config) -> Result<Report> {
    let modes = c.modes()?;
    let prop = thermal_propagator(c, &modes)?;
    let channels: Vec<(Sigma, Sigma)> = if c.propagator.channels.is_empty() {
        Sigma::ALL.into_iter().flat_map(|a| Sigma::ALL.into_iter().map(move |b| (a, b))).collect()
    } else {
        c.propagator
            .channels
            .iter()
            .map(|[a, b]| Ok((parse_sigma(a)?, parse_sigma(b)?)))
            .collect::<std::result::Result<_, ValidationError>>()?
    };
    let ks: Vec<usize> = c.propagator.modes.clone().unwrap_or_else(|| (0..modes.len()).collect());
    let times = c.grid.symmetric_times();

    let mut table = Table::new("propagator", &["mode", "sigma1", "sigma2", "t", "re", "im"]);
    let mut plot = Plot::new("propagator", "t1 - t2", "Re D");
    for &k in &ks {
        for &(s1, s2) in &channels {
            let mut pts = Vec::with_capacity(times.len());
            for &t in &times {
                let d = prop.value(s1, s2, k, t, 0.0);
                let [re, im] = complex(d);
                table.push(vec![k.into(), s1.symbol().into(), s2.symbol().into(), t.into(), re, im]);
                pts.push((t, d.re));
            }
            if k == ks[0] {
                plot = plot.series(format!("{s1},{s2}"), pts);
            }
        }
    }
    Ok(Report { tables: vec![table], plots: vec![plot] })
}

pub fn ggreen(c: &Config) -> Result<Report> {
    let section = c.ggreen.as_ref().ok_or_else(|| ValidationError("the ggreen command needs a [ggreen] section".into()))?;
    let modes = c.modes()?;
    let prop = thermal_propagator(c, &modes)?;
    let v = c.interaction(&modes)?;
    let legs = section
        .legs
        .iter()
        .map(|l| Ok(Leg::new(l.mode, l.time, parse_sigma(&l.sigma)?)))
        .collect::<std::result::Result<Vec<_>, ValidationError>>()?;
    let prof = match &c.switching {
        Some(s) => Some(SwitchingProfile::flat_bump(s.tau, s.a)?),
        None => None,
    };
    let quad = TimeQuadrature::covering(&legs, 0.0);

    let mut table = Table::new("ggreen", &["order", "diagrams", "term_re", "term_im", "sum_re", "sum_im"]);
    let mut total = C64::new(0.0, 0.0);
    let mut gj = 1.0;
    let mut pts = Vec::new();
    for j in 0..=section.order {
        let ds = wick_diagrams(j, &legs, &v)?;
        let term = evaluate_diagrams(&ds, &prop, prof.as_ref(), &quad)? * gj;
        total += term;
        gj *= c.interaction.g;
        let [tr, ti] = complex(term);
        let [sr, si] = complex(total);
        table.push(vec![j.into(), ds.len().into(), tr, ti, sr, si]);
        pts.push((j as f64, total.re));
    }
    let plot = Plot::new("ggreen", "order", "Re partial sum").series("G", pts);
    Ok(Report { tables: vec![table], plots: vec![plot] })
}

pub fn poles(c: &Config) -> Result<Report> {
    let m = &c.model;
    let modes = c.modes()?;
    let space = FockSpace::new(modes.clone(), m.n_max, m.hbar)?;
    let v = c.interaction(&modes)?;
    let h = PolyCoefficients::free(&modes).plus(&v.scaled(C64::new(c.interaction.g, 0.0)));
    let spectrum = Spectrum::new(&build_poly_operator(&space, &h, true)?)?;
    let k_state = if m.mu == 0.0 {
        spectrum.gibbs(m.temperature)?
    } else {
        if !v.is_number_conserving() {
            return Err(ValidationError("a nonzero mu needs a number-conserving interaction".into()).into());
        }
        let shifted = h.plus(&PolyCoefficients::diagonal(&vec![-m.mu; modes.len()]));
        Spectrum::new(&build_poly_operator(&space, &shifted, true)?)?.gibbs(m.temperature)?
    };
    let params = SpectralParams::for_modes(&modes);
    let hw = c.grid.eps_half_width;
    let n = c.grid.eps_points;

    let mut poles = Table::new("poles", &["mode", "momentum", "omega", "pole_re", "pole_im", "neg_re", "neg_im", "residual"]);
    let mut rows = Table::new("spectrum", &["mode", "eps", "g_re", "g_im"]);
    let mut disp = (Vec::new(), Vec::new());
    let mut spectra = Plot::new("spectrum", "eps", "|G(b+, b)|");
    for k in 0..modes.len() {
        let w = modes.omega(k);
        let mut eps = frequency_grid(-w - hw, -w + hw, n);
        eps.extend(frequency_grid(w - hw, w + hw, n));
        let g = g2_spectrum(&spectrum, &k_state, k, &eps, &params)?;
        let q = quasiparticle_poles(&g, w, hw)?;
        let [pr, pi] = complex(q.positive.value);
        let [nr, ni] = complex(q.negative.value);
        let residual = q.positive.residual.max(q.negative.residual);
        poles.push(vec![k.into(), momentum_cell(&modes, k), w.into(), pr, pi, nr, ni, residual.into()]);
        disp.0.push((k as f64, w));
        disp.1.push((k as f64, q.positive.value.re));
        let mut pts = Vec::new();
        for (e, gm) in g.eps.iter().zip(&g.values) {
            let z = gm[(Sigma::BPlus.index(), Sigma::B.index())];
            let [re, im] = complex(z);
            rows.push(vec![k.into(), (*e).into(), re, im]);
            if *e > 0.0 {
                pts.push((*e, z.norm()));
            }
        }
        spectra = spectra.series(format!("mode {k}"), pts);
    }
    let dispersion = Plot::new("dispersion", "mode", "energy").series("omega", disp.0).series("pole", disp.1);
    Ok(Report { tables: vec![poles, rows], plots: vec![dispersion, spectra] })
}

fn tuple_text(t: &[usize]) -> String {
    t.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn inclusive(c: &Config) -> Result<Report> {
    let section = c.inclusive.as_ref().ok_or_else(|| ValidationError("the inclusive command needs an [inclusive] section".into()))?;
    let space = FockSpace::new(c.modes()?, c.model.n_max, c.model.hbar)?;
    let s = match section.preset {
        Preset::Identity => SMatrixOp::identity(&space)?,
        Preset::Beamsplitter => SMatrixOp::beamsplitter(&space, section.pair[0], section.pair[1], section.theta)?,
        Preset::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(section.seed);
            SMatrixOp::new(FockOperator::from_matrix(&space, haar_unitary(space.dim(), &mut rng))?, Provenance::Supplied)?
        }
    };
    let psi = space
        .basis_vector(&section.input)
        .ok_or_else(|| ValidationError(format!("inclusive.input {:?} is outside the cutoff", section.input)))?;
    let sigma = sigma_bruteforce(&s, &psi, section.degree)?;

    let mut table = Table::new("inclusive", &["m", "n", "k", "kp", "re", "im"]);
    for (k, kp, v) in sigma.rows() {
        let [re, im] = complex(v);
        table.push(vec![k.len().into(), kp.len().into(), tuple_text(k).into(), tuple_text(kp).into(), re, im]);
    }
    let mut probs = Table::new("probability", &["n", "sum"]);
    let mut pts = Vec::new();
    for n in 0..=section.degree {
        let p = sigma.probability_sum(n);
        probs.push(vec![n.into(), p.into()]);
        pts.push((n as f64, p));
    }
    let plot = Plot::new("probability", "n", "sum of diagonal sigma").series("inclusive", pts);
    Ok(Report { tables: vec![table, probs], plots: vec![plot] })
}

/// Runs the oracle suite; the second value is true when every row passed.
pub fn selfcheck() -> (Report, bool) {
    let rows = selfcheck::run();
    let ok = rows.iter().all(|r| r.passed);
    let mut table = Table::new("selfcheck", &["name", "value", "tolerance", "status"]);
    for r in rows {
        table.push(vec![r.name.into(), r.value.into(), r.tolerance.into(), if r.passed { "pass" } else { "fail" }.into()]);
    }
    (Report { tables: vec![table], plots: vec![] }, ok)
}
