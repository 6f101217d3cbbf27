//! Acceptance suite: one line per criterion, nonzero exit on any failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use lfun_core::fock::*;
use lfun_core::lfunctional::*;
use lfun_core::sample::*;
use nalgebra::DVector;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = std::result::Result<String, String>;

fn ensure(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn space(omegas: &[f64], n_max: usize, hbar: f64) -> Arc<FockSpace> {
    FockSpace::new(ModeSet::from_frequencies(omegas).unwrap(), n_max, hbar).unwrap()
}

fn ladder(s: &Arc<FockSpace>, k: usize, kind: Ladder) -> Matrix {
    build_ladder(s, k, kind).unwrap().matrix().clone()
}

fn random_alpha(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<C64> {
    (0..n).map(|_| complex_normal(rng) * scale).collect()
}

// ---------------------------------------------------------------- 1

fn ccr_and_weyl() -> Outcome {
    let s = space(&[1.0, 1.5], 6, 0.7);
    let mut worst: f64 = 0.0;
    let safe: Vec<usize> = s.sector_indices(5);
    for k in 0..2 {
        for l in 0..2 {
            let a = ladder(&s, k, Ladder::Annihilate);
            let ad = ladder(&s, l, Ladder::Create);
            let c = &a * &ad - &ad * &a;
            let expect = if k == l { 0.7 } else { 0.0 };
            for &i in &safe {
                for &j in &safe {
                    let e = if i == j { expect } else { 0.0 };
                    worst = worst.max((c[(i, j)] - C64::new(e, 0.0)).norm());
                }
            }
            let al = ladder(&s, l, Ladder::Annihilate);
            worst = worst.max((&a * &al - &al * &a).norm());
        }
    }
    // e^{−αa⁺ + α*a} = e^{−ħ|α|²/2} e^{−αa⁺} e^{α*a} on the low sectors
    let hbar = 0.9;
    let s1 = space(&[1.0], 20, hbar);
    let a = ladder(&s1, 0, Ladder::Annihilate);
    let ad = ladder(&s1, 0, Ladder::Create);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut weyl: f64 = 0.0;
    for _ in 0..5 {
        let al = complex_normal(&mut rng) * 0.4;
        let w = weyl_displacement(&s1, &[al]).unwrap();
        let lhs = w.matrix();
        let right = (&ad * (-al)).exp() * (&a * al.conj()).exp() * C64::new((-0.5 * hbar * al.norm_sqr()).exp(), 0.0);
        let reference = (&ad * (-al) + &a * al.conj()).exp();
        for i in 0..=4 {
            for j in 0..=4 {
                weyl = weyl.max((right[(i, j)] - reference[(i, j)]).norm()).max((lhs[(i, j)] - reference[(i, j)]).norm());
            }
        }
    }
    ensure(worst < 1e-12 && weyl < 1e-8, format!("CCR defect {worst:.1e} (tol 1e-12), Weyl factorization {weyl:.1e} (tol 1e-8)"))
}

// ---------------------------------------------------------------- 2

fn l_map_fidelity() -> Outcome {
    let s = space(&[1.0, 1.3], 4, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let k = random_density(&s, 4, &mut rng);
        let l = l_from_density(&k, 8).unwrap();
        let alpha = random_alpha(&mut rng, 2, 0.6);
        let direct = trace_functional(&k, &alpha).unwrap();
        worst = worst.max((l.evaluate(&alpha) - direct).norm() / direct.norm().max(1e-300));
    }
    ensure(worst < 1e-8, format!("50 random (K, α): max rel error {worst:.1e} (tol 1e-8)"))
}

// ---------------------------------------------------------------- 3

fn generator_relations() -> Outcome {
    let hbar = 0.8;
    let s = space(&[1.0, 1.2], 5, hbar);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let deg = 8;
    let mut rel: f64 = 0.0;
    let mut ccr: f64 = 0.0;
    let mut cross: f64 = 0.0;
    for _ in 0..50 {
        // support two quanta below the cutoff so that a⁺K and Ka stay exact
        let k = random_operator(&s, 3, &mut rng);
        let l = l_from_density(&k, deg).unwrap();
        let p = l.poly();
        for mode in 0..2 {
            let a = build_ladder(&s, mode, Ladder::Annihilate).unwrap();
            let ad = build_ladder(&s, mode, Ladder::Create).unwrap();
            let targets = [
                (Sigma::BPlus, ad.mul(&k)),
                (Sigma::B, a.mul(&k)),
                (Sigma::BTildePlus, k.mul(&a)),
                (Sigma::BTilde, k.mul(&ad)),
            ];
            for (sigma, op) in targets {
                let got = apply_sigma_poly(p, sigma, mode, hbar);
                let want = l_from_density(&op, deg).unwrap();
                rel = rel.max(got.max_diff(want.poly(), deg - 1));
            }
            // [b, b⁺] = ħ and [b̃, b̃⁺] = ħ
            for (x, y) in [(Sigma::B, Sigma::BPlus), (Sigma::BTilde, Sigma::BTildePlus)] {
                let xy = apply_sigma_poly(&apply_sigma_poly(p, y, mode, hbar), x, mode, hbar);
                let yx = apply_sigma_poly(&apply_sigma_poly(p, x, mode, hbar), y, mode, hbar);
                let mut c = xy;
                c.axpy(C64::new(-1.0, 0.0), &yx);
                c.axpy(C64::new(-hbar, 0.0), p);
                ccr = ccr.max(c.truncated(deg - 2).max_abs());
            }
            // plain and tilde generators commute, also across modes
            for other in 0..2 {
                for x in [Sigma::B, Sigma::BPlus] {
                    for y in [Sigma::BTilde, Sigma::BTildePlus] {
                        let xy = apply_sigma_poly(&apply_sigma_poly(p, y, other, hbar), x, mode, hbar);
                        let yx = apply_sigma_poly(&apply_sigma_poly(p, x, mode, hbar), y, other, hbar);
                        cross = cross.max(xy.max_diff(&yx, deg - 2));
                    }
                }
            }
        }
    }
    ensure(
        rel < 1e-10 && ccr < 1e-12 && cross < 1e-12,
        format!("generator maps {rel:.1e} (tol 1e-10), CCR on tables {ccr:.1e} (tol 1e-12), tilde/plain commutation {cross:.1e} (tol 1e-12)"),
    )
}

// ---------------------------------------------------------------- 4

fn equilibrium() -> Outcome {
    use lfun_core::evolution::HatHamiltonian;
    let (w, temp, hbar) = (1.3, 1.0, 1.0);
    let s = space(&[w], 30, hbar);
    let k = thermal_state(&s, temp, 0.0).unwrap();
    let n = hbar / ((hbar * w / temp).exp() - 1.0);
    // relative to the largest correlation
    let l = l_from_density(&k, 8).unwrap();
    let gauss = GaussianL::diagonal(&[n]).to_table(8, hbar);
    let scale = l.correlations().map(|(_, c)| c.norm()).fold(0.0, f64::max);
    let gauss_diff = l.max_correlation_diff(&gauss) / scale;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut value_diff: f64 = 0.0;
    for _ in 0..10 {
        let al = random_alpha(&mut rng, 1, 0.5);
        let direct = trace_functional(&k, &al).unwrap();
        value_diff = value_diff.max((direct - C64::new((-n * al[0].norm_sqr()).exp(), 0.0)).norm());
    }
    let h0 = HatHamiltonian::free(s.modes(), hbar);
    let closed = h0.hat_apply_functional(&GaussPolyL::new(GaussianL::diagonal(&[n]), hbar)).unwrap().poly.max_abs();
    let table = h0.hat_apply(&l).unwrap().poly().max_abs();
    let a = ladder(&s, 0, Ladder::Annihilate);
    let f = C64::new((-hbar * w / temp).exp(), 0.0);
    let exchange = (&a * k.matrix() - k.matrix() * &a * f).norm();
    ensure(
        gauss_diff < 1e-10 && value_diff < 1e-10 && closed < 1e-10 && table < 1e-10 && exchange < 1e-8,
        format!("thermal table vs exp(−nα*α) {gauss_diff:.1e}, values {value_diff:.1e}, ĤL_T {closed:.1e}/{table:.1e} (tol 1e-10), exchange {exchange:.1e} (tol 1e-8)"),
    )
}

// ---------------------------------------------------------------- 5

fn propagator_table() -> Outcome {
    use lfun_core::keldysh::{free_ggreen_by_generators, FreePropagator, Leg};
    let w = 1.1;
    let modes = ModeSet::from_frequencies(&[w]).unwrap();
    let pairs = [(0.0, 0.0), (1.0, 0.3), (0.3, 1.0), (-2.0, 0.5), (2.5, -1.5), (0.7, 0.7), (3.1, 2.9), (-0.4, -1.9), (5.0, -5.0), (-1.2, 0.8)];
    let mut worst: f64 = 0.0;
    let mut zero: f64 = 0.0;
    let mut zero_channels = 0;
    for (temp, hbar) in [(0.5, 1.0), (1.0, 1.0), (2.0, 0.7)] {
        let n = bose_occupation(w, temp, 0.0, hbar);
        let lam = GaussianL::diagonal(&[n]);
        let prop = FreePropagator::new(&modes, &[n], hbar).unwrap();
        for s1 in Sigma::ALL {
            for s2 in Sigma::ALL {
                let mut channel_zero = true;
                for &(t, tau) in &pairs {
                    let closed = prop.value(s1, s2, 0, t, tau);
                    let oracle = free_ggreen_by_generators(&[Leg::new(0, t, s1), Leg::new(0, tau, s2)], &lam, &[w], hbar).unwrap();
                    worst = worst.max((closed - oracle).norm());
                    channel_zero &= oracle.norm() < 1e-14;
                }
                if channel_zero {
                    zero_channels += 1;
                    for &(t, tau) in &pairs {
                        zero = zero.max(prop.value(s1, s2, 0, t, tau).norm());
                    }
                }
            }
        }
    }
    ensure(
        worst < 1e-10 && zero < 1e-12 && zero_channels == 24,
        format!("16 channels × 10 time pairs × 3 temperatures: max error {worst:.1e} (tol 1e-10); {} zero channels per temperature, max {zero:.1e} (tol 1e-12)", zero_channels / 3),
    )
}

// ---------------------------------------------------------------- 6

fn first_order_diagrams() -> Outcome {
    use lfun_core::keldysh::*;
    use Sigma::*;
    let s = space(&[1.0, 1.4], 12, 1.0);
    let v = PolyCoefficients::diagonal(&[0.5, -0.3]);
    let h0 = build_poly_operator(&s, &PolyCoefficients::free(s.modes()), true).unwrap();
    let vop = build_poly_operator(&s, &v, true).unwrap();
    let k = thermal_state(&s, 0.5, 0.0).unwrap();
    let n: Vec<f64> = [1.0, 1.4].iter().map(|&w| bose_occupation(w, 0.5, 0.0, 1.0)).collect();
    let prop = FreePropagator::new(s.modes(), &n, 1.0).unwrap();
    let mut solvable: f64 = 0.0;
    for legs in [
        vec![Leg::new(1, 1.2, BPlus), Leg::new(1, -0.3, B)],
        vec![Leg::new(0, 0.4, BTilde), Leg::new(0, 1.5, B)],
        vec![Leg::new(0, -0.6, BTildePlus), Leg::new(0, 0.2, BTilde)],
    ] {
        let fd = ggreen_exact_derivative(&legs, &h0, &vop, &k, 1e-4).unwrap();
        let ds = wick_diagrams(1, &legs, &v).unwrap();
        let diag = evaluate_diagrams(&ds, &prop, None, &TimeQuadrature::covering(&legs, 0.0)).unwrap();
        solvable = solvable.max((diag - fd).norm() / fd.norm());
    }
    let lat = ModeSet::lattice(4, |p| 1.0 + 0.4 * (1.0 - p.cos())).unwrap();
    let s = FockSpace::new(lat, 4, 1.0).unwrap();
    let v = PolyCoefficients::contact_quartic(s.modes(), 1.0).unwrap();
    let h0 = build_poly_operator(&s, &PolyCoefficients::free(s.modes()), true).unwrap();
    let vop = build_poly_operator(&s, &v, true).unwrap();
    let k = vacuum_projector(&s);
    let prop = FreePropagator::vacuum(s.modes(), 1.0);
    let legs = [Leg::new(1, 1.1, B), Leg::new(3, 0.9, B), Leg::new(0, -0.2, BPlus), Leg::new(0, 0.1, BPlus)];
    let fd = ggreen_exact_derivative(&legs, &h0, &vop, &k, 1e-4).unwrap();
    let ds = wick_diagrams(1, &legs, &v).unwrap();
    let diag = evaluate_diagrams(&ds, &prop, None, &TimeQuadrature::covering(&legs, 0.0)).unwrap();
    let quartic = (diag - fd).norm() / fd.norm();
    ensure(
        solvable < 1e-4 && quartic < 1e-4 && fd.norm() > 1e-3,
        format!("order-1 diagrams vs ∂_g of exact: diagonal V {solvable:.1e}, contact quartic on L=4 {quartic:.1e} (tol 1e-4)"),
    )
}

// ---------------------------------------------------------------- 7

fn dyson_poles() -> Outcome {
    use lfun_core::dyson::*;
    use lfun_core::keldysh::FreePropagator;
    let omegas = [1.0, 1.4];
    let vk = [0.5, -0.3];
    let temp = 0.5;
    let s = space(&omegas, 12, 1.0);
    let k_state = thermal_state(&s, temp, 0.0).unwrap();
    let n: Vec<f64> = omegas.iter().map(|&w| bose_occupation(w, temp, 0.0, 1.0)).collect();
    let prop = FreePropagator::new(s.modes(), &n, 1.0).unwrap();
    let params = SpectralParams::for_modes(s.modes());
    let half = 0.25;
    let points = 41;
    let spacing = 2.0 * half / (points - 1) as f64;
    let tol = (1e-4f64).max(spacing / 10.0);
    let mut pole_err: f64 = 0.0;
    let mut round: f64 = 0.0;
    for g in [0.05, 0.1] {
        let h = PolyCoefficients::free(s.modes()).plus(&PolyCoefficients::diagonal(&vk).scaled(C64::new(g, 0.0)));
        let spectrum = Spectrum::new(&build_poly_operator(&s, &h, true).unwrap()).unwrap();
        for k in 0..2 {
            let w = omegas[k];
            let mut eps = frequency_grid(-w - half, -w + half, points);
            eps.extend(frequency_grid(w - half, w + half, points));
            let gi = g2_spectrum(&spectrum, &k_state, k, &eps, &params).unwrap();
            let g0 = TwoPointG::free(&prop, k, &eps, params.eta);
            let q = quasiparticle_poles(&gi, w, half).unwrap();
            let want = w + g * vk[k];
            pole_err = pole_err.max((q.positive.value.re - want).abs()).max((q.negative.value.re + want).abs());
            let m = self_energy_extract(&gi, &g0).unwrap();
            for (a, b) in dyson_solve(&g0, &m).unwrap().iter().zip(&gi.values) {
                let a = a.as_ref().ok_or("singular Dyson solution")?;
                round = round.max((a - b).norm() / b.norm());
            }
        }
    }
    ensure(
        pole_err < tol && round < 1e-8,
        format!("solvable poles at g ∈ {{0.05, 0.1}}, both modes: max error {pole_err:.1e} (tol {tol:.1e}); Dyson round trip {round:.1e} (tol 1e-8)"),
    )
}

// ---------------------------------------------------------------- 8

fn inclusive_equivalence() -> Outcome {
    use lfun_core::inclusive::*;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    let mut direct: f64 = 0.0;
    for i in 0..20 {
        let (modes, n_max) = if i % 2 == 0 { (2, 5) } else { (3, 4) };
        let omegas: Vec<f64> = (0..modes).map(|k| 1.0 + 0.25 * k as f64).collect();
        let s = space(&omegas, n_max, 1.0);
        let u = SMatrixOp::new(FockOperator::from_matrix(&s, haar_unitary(s.dim(), &mut rng)).unwrap(), Provenance::Supplied).unwrap();
        let psi = random_state(&s, 3, &mut rng);
        let deg = 4;
        let brute = sigma_bruteforce(&u, &psi, deg).unwrap();
        let via = sigma_from_shat(&s_hat_apply(&u, &pure_density(&s, &psi), deg).unwrap(), deg).unwrap();
        worst = worst.max(brute.max_diff(&via));
        // ⟨SΨ| a⁺(k) a(k′) |SΨ⟩ straight from matrices
        let out = u.apply_state(&psi);
        for k in 0..modes {
            for kp in 0..modes {
                let m = ladder(&s, k, Ladder::Create) * ladder(&s, kp, Ladder::Annihilate);
                let v = (out.adjoint() * m * &out)[(0, 0)];
                direct = direct.max((v - via.get(&[k], &[kp]).unwrap()).norm());
            }
        }
    }
    let s = space(&[1.0, 1.0], 3, 1.0);
    let bs = SMatrixOp::beamsplitter(&s, 0, 1, std::f64::consts::FRAC_PI_4).unwrap();
    let mut one = DVector::zeros(s.dim());
    one[s.index_of(&[1, 0]).unwrap()] = C64::new(1.0, 0.0);
    let table = sigma_from_shat(&s_hat_apply(&bs, &pure_density(&s, &one), 2).unwrap(), 2).unwrap();
    let split = (table.get(&[0], &[0]).unwrap() - 0.5).norm().max((table.get(&[1], &[1]).unwrap() - 0.5).norm());
    // number-conserving S = exp(−i Σ h_ij a⁺_i a_j) on a two-particle input
    let s3 = space(&[1.0, 1.1, 1.2], 3, 1.0);
    let mut h = PolyCoefficients::new();
    for i in 0..3 {
        for j in i..3 {
            let c = if i == j { C64::new(rng.gen_range(-1.0..1.0), 0.0) } else { complex_normal(&mut rng) };
            h.add_term(&[i], &[j], c);
            if i != j {
                h.add_term(&[j], &[i], c.conj());
            }
        }
    }
    let u = SMatrixOp::from_generator(&s3, &h).unwrap();
    let mut two = DVector::zeros(s3.dim());
    two[s3.index_of(&[1, 1, 0]).unwrap()] = C64::new(0.6, 0.0);
    two[s3.index_of(&[0, 0, 2]).unwrap()] = C64::new(0.0, 0.8);
    let t2 = sigma_bruteforce(&u, &two, 4).unwrap();
    let sum_rule = (t2.probability_sum(2) - 1.0).abs();
    ensure(
        worst < 1e-8 && direct < 1e-10 && split < 1e-12 && sum_rule < 1e-9,
        format!("20 random unitaries: σ̂ paths differ by {worst:.1e} (tol 1e-8), matrix check {direct:.1e}; beamsplitter |σ̂₁,₁ − 1/2| {split:.1e} (tol 1e-12); sum rule {sum_rule:.1e} (tol 1e-9)"),
    )
}

// ---------------------------------------------------------------- 9

fn completeness() -> Outcome {
    use lfun_core::inclusive::{completeness_check, TimedWord};
    let s = space(&[1.0, 1.3], 10, 1.0);
    let mut h = PolyCoefficients::free(s.modes());
    h.add_term(&[0], &[0], C64::new(0.2, 0.0));
    h.add_term(&[0], &[1], C64::new(0.05, 0.03));
    h.add_term(&[1], &[0], C64::new(0.05, -0.03));
    let hop = build_poly_operator(&s, &h, true).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let word = |decreasing: bool, rng: &mut ChaCha8Rng| {
        let len = rng.gen_range(1..=3);
        let mut times: Vec<f64> = (0..len).map(|_| rng.gen_range(-2.0..2.0)).collect();
        times.sort_by(|a, b| if decreasing { b.total_cmp(a) } else { a.total_cmp(b) });
        TimedWord(
            times
                .into_iter()
                .map(|t| (rng.gen_range(0..2), if rng.gen_bool(0.5) { Ladder::Create } else { Ladder::Annihilate }, t))
                .collect(),
        )
    };
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let a = word(true, &mut rng);
        let b = word(false, &mut rng);
        worst = worst.max(completeness_check(&a, &b, &hop).unwrap());
    }
    ensure(worst < 1e-9, format!("20 random word pairs at n_max = 10: max residual {worst:.1e} (tol 1e-9)"))
}

// ---------------------------------------------------------------- 10

fn strictly_decreasing(x: &[f64]) -> bool {
    x.windows(2).all(|w| w[1] < w[0])
}

fn adiabatic_trends() -> Outcome {
    use lfun_core::evolution::*;
    use lfun_core::keldysh::*;
    use lfun_core::poly::Poly;
    let rates = [0.5, 0.25, 0.125];
    let tau = 2.0;
    let modes = ModeSet::from_frequencies(&[1.0]).unwrap();
    // pairing V = (a⁺² + a²)/2 with quasiparticle energy √(1 − g²)
    let mut pair = PolyCoefficients::new();
    pair.add_term(&[0, 0], &[], C64::new(0.5, 0.0));
    pair.add_term(&[], &[0, 0], C64::new(0.5, 0.0));
    let v = HatHamiltonian::new(pair, &modes, 1.0).unwrap();
    let h0 = HatHamiltonian::free(&modes, 1.0);
    let g = 0.3;
    let deg = 6;
    let params = IntegratorParams { dt: 0.05, tol: 1e-11, max_halvings: 8 };
    let vac = CorrelationTable::from_poly(Poly::one(1), 1.0, Some(deg));
    let mut residuals = Vec::new();
    for &a in &rates {
        let p = SwitchingProfile::flat_bump(tau, a).unwrap();
        let st = adiabatic_evolve(&vac, &h0, &v, g, &p, 0.0, &params).unwrap();
        residuals.push(stationarity_residual(&st.state, &h0, &v, g).unwrap());
    }
    let s = FockSpace::new(modes.clone(), 12, 1.0).unwrap();
    let mut psi = DVector::zeros(s.dim());
    psi[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    psi[1] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let lk = l_from_density(&pure_density(&s, &psi), deg).unwrap();
    let lk = CorrelationTable::from_poly(lk.poly().clone(), 1.0, Some(deg));
    let profile = SwitchingProfile::flat_bump(tau, rates[0]).unwrap();
    let trend = inclusive_smatrix_adiabatic(&lk, &modes, &v, g, &profile, &rates, |_, gh| (1.0 - gh * gh).sqrt() - 1.0, &params).unwrap();
    let defects: Vec<f64> = trend
        .points
        .iter()
        .map(|pt| lk.correlations().filter(|(m, _)| m.degree() <= 2).map(|(m, c)| (pt.table.correlation(m) - c).norm()).fold(0.0, f64::max))
        .collect();
    // |G^a − G| at first order for the solvable diagonal model
    let sd = FockSpace::new(modes.clone(), 14, 1.0).unwrap();
    let vd = PolyCoefficients::diagonal(&[0.5]);
    let h0op = build_poly_operator(&sd, &PolyCoefficients::free(&modes), true).unwrap();
    let vop = build_poly_operator(&sd, &vd, true).unwrap();
    let k = thermal_state(&sd, 0.5, 0.0).unwrap();
    let prop = FreePropagator::new(&modes, &[bose_occupation(1.0, 0.5, 0.0, 1.0)], 1.0).unwrap();
    let legs = [Leg::new(0, 3.0, Sigma::BPlus), Leg::new(0, -3.0, Sigma::B)];
    let exact = ggreen_exact_derivative(&legs, &h0op, &vop, &k, 1e-4).unwrap();
    let ds = wick_diagrams(1, &legs, &vd).unwrap();
    let quad = TimeQuadrature::covering(&legs, 0.0);
    let mut gaps = Vec::new();
    for &a in &rates {
        let p = SwitchingProfile::flat_bump(tau, a).unwrap();
        gaps.push((evaluate_diagrams(&ds, &prop, Some(&p), &quad).unwrap() - exact).norm());
    }
    let fmt = |x: &[f64]| x.iter().map(|v| format!("{v:.1e}")).collect::<Vec<_>>().join(", ");
    ensure(
        strictly_decreasing(&residuals) && strictly_decreasing(&defects) && strictly_decreasing(&gaps),
        format!("a = 0.5, 0.25, 0.125: stationarity [{}], |G^a − G| [{}], dressed phase defect [{}]", fmt(&residuals), fmt(&gaps), fmt(&defects)),
    )
}

// ----------------------------------------------------------------

fn main() {
    let criteria: [(&str, f64, fn() -> Outcome); 10] = [
        ("CCR and Weyl representation", 5.0, ccr_and_weyl),
        ("L-map fidelity", 10.0, l_map_fidelity),
        ("generator relations", 10.0, generator_relations),
        ("equilibrium", 5.0, equilibrium),
        ("propagator table", 5.0, propagator_table),
        ("order-g diagrams", 60.0, first_order_diagrams),
        ("Dyson poles", 30.0, dyson_poles),
        ("inclusive equivalence", 30.0, inclusive_equivalence),
        ("completeness identity", 10.0, completeness),
        ("adiabatic trends", 120.0, adiabatic_trends),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        if only.is_some_and(|o| o != i + 1) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        let (ok, msg) = match result {
            Ok(m) if secs <= *budget => (true, m),
            Ok(m) => (false, format!("{m}; runtime over budget")),
            Err(m) => (false, m),
        };
        failed += usize::from(!ok);
        println!("criterion {:>2} {:<28} {} [{secs:.1} s / {budget:.0} s] {msg}", i + 1, name, if ok { "PASS" } else { "FAIL" });
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
