//! Acceptance criteria 1–10. Each test prints one `PASS`/`FAIL` line and
//! then asserts the verdict.

use std::f64::consts::TAU;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use egm_cli::scenario::DiagnosticKind;
use egm_cli::{exit, parse_scenario, simulate, RunOptions, RunStatus};
use egm_core::diagnostics::{
    charge_conservation_residual, current_energy, energy_momentum_bq, first_law_residual, integral_laws,
    interaction_energy, pair_energy, power_force_point, poynting_residual, wave_residual, Quadrature, Region,
    Snapshot,
};
use egm_core::evolution::step_rk4;
use egm_core::operators::{apply_box, apply_dminus, apply_dplus};
use egm_core::shock::{afield_jump_energy, afield_jump_residual, theta_jump_residual};
use egm_core::{
    AField, Biquaternion, BqField, CVec3, ChargeCurrent, CharacteristicSymbol, Complex, Dynamics, FieldPair,
    FrontData, Grid, Medium, Nabla, SimState, StepperConfig,
};
use nalgebra::{SMatrix, SVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

type C = Complex<f64>;
type Bq = Biquaternion<f64>;

const ALGEBRA_TOL: f64 = 1e-12;
const ALGEBRA_SAMPLES: usize = 1000;
const ALGEBRA_BUDGET: Duration = Duration::from_secs(1);
const FACTORIZATION_TOL: f64 = 1e-10;
const FACTORIZATION_BUDGET: Duration = Duration::from_secs(5);
const EIGENMODE_TOL: f64 = 1e-8;
const EIGENMODE_RATIO: (f64, f64) = (13.0, 19.0);
const EIGENMODE_BUDGET: Duration = Duration::from_secs(60);
const CONSERVATION_TOL: f64 = 1e-8;
const NEGATIVE_CONTROL_MIN: f64 = 0.1;
const WHOLE_BOX_CHARGE_TOL: f64 = 1e-9;
const HALF_BOX_TOL: f64 = 1e-5;
const FREE_FIELD_TOL: f64 = 1e-6;
const POWER_FORCE_TOL: f64 = 1e-12;
const STRONG_FIELD_TOL: f64 = 1e-8;
const FREENESS_TOL: f64 = 1e-6;
const DECOMPOSITION_TOL: f64 = 1e-13;
const ROOTS_TOL: f64 = 1e-12;
const JUMP_TOL: f64 = 1e-13;

/// Written to stderr directly so the line survives the harness's output
/// capture for passing tests.
fn verdict(id: &str, ok: bool, detail: String) {
    let line = format!("{} criterion {id}: {detail}\n", if ok { "PASS" } else { "FAIL" });
    std::io::stderr().write_all(line.as_bytes()).unwrap();
    assert!(ok, "criterion {id}: {detail}");
}

fn random_bq(rng: &mut ChaCha8Rng) -> Bq {
    Bq::from_components(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)))
}

fn random_c(rng: &mut ChaCha8Rng) -> C {
    C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn random_cvec(rng: &mut ChaCha8Rng) -> CVec3<f64> {
    CVec3::new(random_c(rng), random_c(rng), random_c(rng))
}

fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.1 && n <= 1.0 {
            return v.map(|x| x / n);
        }
    }
}

#[test]
fn criterion_01_algebra() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..ALGEBRA_SAMPLES {
        let (a, b, c) = (random_bq(&mut rng), random_bq(&mut rng), random_bq(&mut rng));
        let (al, be) = (random_c(&mut rng), random_c(&mut rng));
        let checks = [
            a.mul(&b).mul(&c) - a.mul(&b.mul(&c)),
            Bq::scaled_sum(&a, al, &b, be).mul(&c) - Bq::scaled_sum(&a.mul(&c), al, &b.mul(&c), be),
            c.mul(&Bq::scaled_sum(&a, al, &b, be)) - Bq::scaled_sum(&c.mul(&a), al, &c.mul(&b), be),
            a.scale(al).conj() - a.conj().scale(al.conj()),
            a.conj().conj() - a,
            (a + b).conj() - (a.conj() + b.conj()),
            a.mul(&b).conj() - b.conj().mul(&a.conj()),
        ];
        worst = checks.iter().fold(worst, |m, x| m.max(x.max_abs()));
    }
    let mut table = true;
    for k in 0..3 {
        let (l, m) = ((k + 1) % 3, (k + 2) % 3);
        table &= Bq::basis(k).mul(&Bq::basis(k)) == -Bq::one();
        table &= Bq::basis(k).mul(&Bq::basis(l)) == Bq::basis(m);
        table &= Bq::basis(l).mul(&Bq::basis(k)) == -Bq::basis(m);
    }
    let t = start.elapsed();
    verdict(
        "1",
        worst <= ALGEBRA_TOL && table && t < ALGEBRA_BUDGET,
        format!("{ALGEBRA_SAMPLES} samples, max error {worst:.2e} (tol {ALGEBRA_TOL:.0e}), basis table exact: {table}, {t:.2?}"),
    );
}

#[test]
fn criterion_02_operator_factorization() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 32;
    let g = Grid::cube(n, TAU, 0.01).unwrap();
    let nabla = Nabla::spectral(g);
    let lim = ((n - 1) / 3) as i32;
    let modes: Vec<([f64; 3], f64, Bq)> = (0..6)
        .map(|_| {
            let k = [0; 3].map(|_: i32| rng.gen_range(-lim..=lim) as f64);
            (k, rng.gen_range(-3.0..3.0), random_bq(&mut rng))
        })
        .collect();
    let field = |tau: f64, order: i32| {
        BqField::from_fn(g, |x| {
            modes.iter().fold(Bq::zero(), |acc, (k, w, a)| {
                let ph = C::from_polar(1.0, k[0] * x[0] + k[1] * x[1] + k[2] * x[2] - w * tau);
                acc + a.scale(ph * C::new(0.0, -w).powi(order))
            })
        })
    };
    let (f0, f1, f2) = (field(0.4, 0), field(0.4, 1), field(0.4, 2));
    let dp = apply_dplus(&nabla, &f0, &f1).unwrap();
    let dp_t = apply_dplus(&nabla, &f1, &f2).unwrap();
    let boxed = apply_box(&nabla, &f0, &f2).unwrap();
    let err = apply_dminus(&nabla, &dp, &dp_t).unwrap().sub(&boxed).linf();
    let t = start.elapsed();
    verdict(
        "2",
        err <= FACTORIZATION_TOL && t < FACTORIZATION_BUDGET,
        format!("|D-D+F - box F| = {err:.2e} (tol {FACTORIZATION_TOL:.0e}, |box F| = {:.1e}), n=32, {t:.2?}", boxed.linf()),
    );
}

fn eigenmode_scenario(cfl: f64) -> egm_cli::Scenario {
    let v = json!({
        "mode": "maxwell",
        "grid": { "n": 32, "length": TAU },
        "stepper": { "cfl": cfl },
        "duration": TAU,
        "initial_conditions": [
            { "target": "a", "preset": "plane_wave", "k": [0, 0, 1], "polarization": [[1, 0], [0, 1], [0, 0]] }
        ],
        "diagnostics": [
            { "name": "eigenmode" },
            { "name": "charge" },
            { "name": "poynting" }
        ]
    });
    parse_scenario(&v.to_string()).unwrap()
}

fn final_eigenmode_error(r: &egm_cli::RunReport) -> f64 {
    r.series(DiagnosticKind::Eigenmode).unwrap().last().unwrap().linf
}

#[test]
fn criterion_03_maxwell_eigenmode() {
    let start = Instant::now();
    let coarse = simulate(&eigenmode_scenario(0.25), &RunOptions::default()).unwrap();
    let t = start.elapsed();
    let fine = simulate(&eigenmode_scenario(0.125), &RunOptions::default()).unwrap();
    let (e1, e2) = (final_eigenmode_error(&coarse), final_eigenmode_error(&fine));
    assert!((coarse.tau_end - TAU).abs() < 1e-12);
    let ratio = e1 / e2;
    let converges = (EIGENMODE_RATIO.0..=EIGENMODE_RATIO.1).contains(&ratio);
    verdict(
        "3",
        e1 <= EIGENMODE_TOL && converges && t < EIGENMODE_BUDGET,
        format!(
            "one period at n=32, cfl=0.25: error {e1:.2e} (tol {EIGENMODE_TOL:.0e}); halved dtau: {e2:.2e}, ratio {ratio:.1}, {t:.2?}"
        ),
    );
}

#[test]
fn criterion_04_conservation_residuals() {
    let run = simulate(&eigenmode_scenario(0.25), &RunOptions::default()).unwrap();
    let charge = run.series(DiagnosticKind::Charge).unwrap().max_linf();
    let poynting = run.series(DiagnosticKind::Poynting).unwrap().max_linf();

    // Negative controls: a static diverging current, and the wave paired
    // with a current that is not its source.
    let g = Grid::cube(32, TAU, 0.05).unwrap();
    let nabla = Nabla::spectral(g);
    let medium = Medium::unit();
    let static_j = ChargeCurrent::from_fn(g, |x| Bq::new(C::new(0.0, 0.0), CVec3::from_real([x[0].cos(), 0.0, 0.0])));
    let bad_charge = charge_conservation_residual(&nabla, &[&static_j, &static_j, &static_j], 0.05).unwrap().linf;
    let wave = |tau: f64| {
        AField::from_fn(g, |x| {
            let ph = C::from_polar(1.0, x[2] - tau);
            CVec3::new(ph, C::i() * ph, C::new(0.0, 0.0))
        })
    };
    let (p, c, n) = (wave(-0.05), wave(0.0), wave(0.05));
    let wrong = ChargeCurrent::from_fn(g, |x| Bq::from_vector(c.at(g.index(0, 0, 0)).scale(C::new(x[0].cos(), 0.0))));
    let bad_poynting = poynting_residual(&nabla, &[&p, &c, &n], &wrong, &medium, 0.05).unwrap().linf;

    verdict(
        "4",
        charge <= CONSERVATION_TOL
            && poynting <= CONSERVATION_TOL
            && bad_charge >= NEGATIVE_CONTROL_MIN
            && bad_poynting >= NEGATIVE_CONTROL_MIN,
        format!(
            "eigenmode run: charge {charge:.2e}, poynting {poynting:.2e} (tol {CONSERVATION_TOL:.0e}); negative controls {bad_charge:.2e}, {bad_poynting:.2e}"
        ),
    );
}

fn gaussian_theta(g: Grid<f64>, center: [f64; 3], width: f64, sign: f64) -> ChargeCurrent<f64> {
    ChargeCurrent::from_fn(g, |x| {
        let r2: f64 = (0..3).map(|a| (x[a] - center[a]).powi(2)).sum();
        let f = (-r2 / (width * width)).exp();
        Bq::new(C::new(0.0, sign * f), CVec3::from_re_im([0.5 * f, 0.0, 0.0], [0.0, 0.3 * sign * f, 0.0]))
    })
}

fn gaussian_a(g: Grid<f64>, center: [f64; 3], width: f64) -> AField<f64> {
    AField::from_fn(g, |x| {
        let r2: f64 = (0..3).map(|a| (x[a] - center[a]).powi(2)).sum();
        let f = (-r2 / (width * width)).exp();
        CVec3::from_re_im([0.0, 0.4 * f, 0.0], [0.0, 0.0, 0.2 * f])
    })
}

#[test]
fn criterion_05_integral_laws() {
    let l = 16.0;
    let g = Grid::cube(32, l, 0.01).unwrap();
    let nabla = Nabla::spectral(g);
    let medium = Medium::unit();
    let c = [l / 2.0; 3];
    let mut s = SimState::new(
        vec![FieldPair { a: gaussian_a(g, c, 2.0), theta: gaussian_theta(g, c, 2.0, 1.0) }],
        medium,
    )
    .unwrap();
    let cfg = StepperConfig { dynamics: Dynamics::Maxwell, ..Default::default() };
    let mut levels = vec![s.clone()];
    for _ in 0..40 {
        s = step_rk4(&nabla, &s, &cfg).unwrap().state;
        levels.push(s.clone());
    }
    let snaps: Vec<Snapshot<f64>> =
        levels.iter().map(|s| Snapshot { tau: s.tau, a: &s.fields[0].a, theta: &s.fields[0].theta }).collect();
    let whole = integral_laws(&nabla, &snaps, Region::whole(&g), &medium, Quadrature::Spectral).unwrap();
    // The plane x = L/2 cuts through the pulse centre.
    let half_region = Region { lo: [0, 0, 0], hi: [16, 32, 32] };
    let half = integral_laws(&nabla, &snaps, half_region, &medium, Quadrature::Spectral).unwrap();
    let half_worst = half.charge.max(half.energy).max(half.circulation).max(half.volume);
    verdict(
        "5",
        whole.charge <= WHOLE_BOX_CHARGE_TOL && half_worst <= HALF_BOX_TOL,
        format!(
            "whole-box charge {:.2e} (tol {WHOLE_BOX_CHARGE_TOL:.0e}); half box charge {:.2e}, energy {:.2e}, circulation {:.2e}, volume {:.2e} (tol {HALF_BOX_TOL:.0e}), n=32",
            whole.charge, half.charge, half.energy, half.circulation, half.volume
        ),
    );
}

fn free_state(g: Grid<f64>, width: f64) -> SimState<f64> {
    let l = g.lengths()[0];
    SimState::new(
        vec![FieldPair { a: AField::zeros(g), theta: gaussian_theta(g, [l / 2.0; 3], width, 1.0) }],
        Medium::unit(),
    )
    .unwrap()
}

#[test]
fn criterion_06a_free_field_laws() {
    let g = Grid::cube(32, 16.0, 0.001).unwrap();
    let nabla = Nabla::spectral(g);
    let medium = Medium::unit();
    let cfg = StepperConfig { dynamics: Dynamics::FreeTheta, ..Default::default() };
    let mut s = free_state(g, 2.0);
    let mut hist = vec![s.fields[0].theta.clone()];
    let (mut boxed, mut law) = (0.0f64, 0.0f64);
    for step in 1..=100 {
        s = step_rk4(&nabla, &s, &cfg).unwrap().state;
        hist.push(s.fields[0].theta.clone());
        if hist.len() > 3 {
            hist.remove(0);
        }
        if hist.len() == 3 && step % 10 == 0 {
            let rho: Vec<Vec<C>> = hist.iter().map(|t| t.rho_field()).collect();
            let rr: Vec<&[C]> = rho.iter().map(|v| v.as_slice()).collect();
            boxed = boxed.max(wave_residual(&nabla, &rr, g.dtau()).unwrap().linf);
            let w: Vec<&ChargeCurrent<f64>> = hist.iter().collect();
            law = law.max(first_law_residual(&nabla, &w, None, &medium, g.dtau()).unwrap().linf);
        }
    }
    verdict(
        "6a",
        boxed <= FREE_FIELD_TOL && law <= FREE_FIELD_TOL,
        format!("gaussian Θ, n=32, dtau=1e-3: |box rho| {boxed:.2e}, dQ/dtau + U {law:.2e} (tol {FREE_FIELD_TOL:.0e})"),
    );
}

#[test]
fn criterion_06b_current_energy_non_increasing() {
    let width = 2.0;
    let l = 16.0;
    let g = Grid::cube(32, l, 0.05).unwrap();
    let nabla = Nabla::spectral(g);
    let medium = Medium::unit();
    let cfg = StepperConfig { dynamics: Dynamics::FreeTheta, ..Default::default() };
    let mut s = free_state(g, width);
    // Stop while the pulse (support about 3 widths) is still clear of the
    // periodic images.
    let wrap = l / 2.0 - 3.0 * width;
    let mut q = vec![(0.0, current_energy(&s.fields[0].theta, &medium).total())];
    while s.tau < wrap - 1e-12 {
        s = step_rk4(&nabla, &s, &cfg).unwrap().state;
        q.push((s.tau, current_energy(&s.fields[0].theta, &medium).total()));
    }
    let tol = 1e-12 * q[0].1;
    let first_rise = q.windows(2).find(|w| w[1].1 > w[0].1 + tol).map(|w| (w[1].0, w[1].1 - w[0].1));
    let detail = match first_rise {
        None => format!("Q non-increasing on τ ∈ [0, {wrap}] ({} samples)", q.len()),
        Some((tau, d)) => format!("Q rises by {d:.2e} at τ = {tau:.2} (before wraparound at τ = {wrap})"),
    };
    verdict("6b", first_rise.is_none(), detail);
}

fn physical_oracle(medium: &Medium<f64>, e: [f64; 3], h: [f64; 3], rho: (f64, f64), je: [f64; 3], jh: [f64; 3]) -> (C, [f64; 3], [f64; 3]) {
    let (eps, mu, c) = (medium.epsilon(), medium.mu(), medium.c());
    let d = e.map(|x| eps * x);
    let b = h.map(|x| mu * x);
    let cross = |a: [f64; 3], b: [f64; 3]| [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let (jxb, jxd, exj, hxj) = (cross(je, b), cross(jh, d), cross(e, je), cross(h, jh));
    let fh = std::array::from_fn(|k| rho.0 * e[k] + rho.1 * h[k] + jxb[k] - jxd[k]);
    let fe = std::array::from_fn(|k| c * (rho.0 * b[k] - rho.1 * d[k]) + (exj[k] + hxj[k]) / c);
    (C::new((dot(e, je) + dot(h, jh)) / c, dot(b, je) - dot(d, jh)), fh, fe)
}

fn forcing_matrix(a: CVec3<f64>, kappa: f64) -> SMatrix<f64, 8, 8> {
    let ab = Bq::from_vector(a);
    let mut m = SMatrix::<f64, 8, 8>::zeros();
    for j in 0..8 {
        let mut e = [0.0; 8];
        e[j] = 1.0;
        let col = (-Bq::from_components(e).mul(&ab).scale(C::new(1.0 / kappa, 0.0))).components();
        for i in 0..8 {
            m[(i, j)] = col[i];
        }
    }
    m
}

#[test]
fn criterion_07_interaction_physics() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut pf_err = 0.0f64;
    for _ in 0..100 {
        let medium = Medium::new(rng.gen_range(0.25..4.0), rng.gen_range(0.25..4.0), 1.0).unwrap();
        let v3 = |rng: &mut ChaCha8Rng| -> [f64; 3] { std::array::from_fn(|_| rng.gen_range(-1.0..1.0)) };
        let (e, h, je, jh) = (v3(&mut rng), v3(&mut rng), v3(&mut rng), v3(&mut rng));
        let rho = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let theta = Bq::new(C::i() * medium.complex_charge(rho.0, rho.1), medium.complex_current(je, jh));
        let pf = power_force_point(&theta, &medium.complex_strength(e, h));
        let (m, fh, fe) = physical_oracle(&medium, e, h, rho, je, jh);
        pf_err = pf_err.max((pf.power - m).norm());
        for k in 0..3 {
            pf_err = pf_err.max((pf.mass_force[k] - fh[k]).abs()).max((pf.electric_force[k] - fe[k]).abs());
        }
    }

    // Uniform strong-field run against the matrix exponential.
    let g = Grid::cube(2, 40.0, 0.01).unwrap();
    let nabla = Nabla::spectral(g);
    let medium = Medium::new(1.0, 1.0, 0.7).unwrap();
    let ap = CVec3::from_re_im([0.3, -0.8, 0.5], [0.6, 0.1, -0.4]);
    let c0 = [0.2, -0.1, 0.5, 0.3, -0.7, 0.1, 0.4, -0.2];
    let mut s = SimState::new(
        vec![FieldPair { a: AField::zeros(g), theta: ChargeCurrent::from_fn(g, |_| Bq::from_components(c0)) }],
        medium,
    )
    .unwrap()
    .with_external(AField::from_fn(g, |_| ap))
    .unwrap();
    let cfg = StepperConfig { dynamics: Dynamics::StrongField, ..Default::default() };
    let gen = forcing_matrix(ap, medium.kappa());
    let mut ode_err = 0.0f64;
    for _ in 0..100 {
        s = step_rk4(&nabla, &s, &cfg).unwrap().state;
        let want = (gen * s.tau).exp() * SVector::<f64, 8>::from(c0);
        let got = s.fields[0].theta.at(0).components();
        ode_err = (0..8).fold(ode_err, |m, k| m.max((got[k] - want[k]).abs()));
    }
    assert!((s.tau - 1.0).abs() < 1e-12);

    // The power identity is reported as a series on an interacting run.
    let sc = parse_scenario(
        &json!({
            "mode": "interaction",
            "grid": { "n": 8, "length": 8.0, "dtau": 0.02 },
            "duration": 0.2,
            "initial_conditions": [
                { "field": 0, "target": "theta", "preset": "gaussian_pulse", "center": [2, 2, 2], "width": 1.5,
                  "amplitude": [[0.5, 0], [0, 0.3], [0, 0]], "scalar": [0, 1] },
                { "field": 1, "target": "a", "preset": "gaussian_pulse", "center": [5, 5, 5], "width": 1.5,
                  "amplitude": [[0.2, 0], [0, 0.4], [0, 0]] }
            ],
            "diagnostics": [{ "name": "power_balance" }]
        })
        .to_string(),
    )
    .unwrap();
    let run = simulate(&sc, &RunOptions::default()).unwrap();
    let series = run.series(DiagnosticKind::PowerBalance).unwrap();
    let reported = series.samples.len() == 11 && series.samples.iter().all(|x| x.linf.is_finite());

    verdict(
        "7",
        pf_err <= POWER_FORCE_TOL && ode_err <= STRONG_FIELD_TOL && reported,
        format!(
            "power-force vs E,H oracle {pf_err:.2e} (tol {POWER_FORCE_TOL:.0e}); strong field vs exp(Mτ) {ode_err:.2e} (tol {STRONG_FIELD_TOL:.0e}); power identity series reported: {reported} (max {:.2e})",
            series.max_linf()
        ),
    );
}

#[test]
fn criterion_08_united_field() {
    let l = 16.0;
    let (c0, c1) = ([l / 4.0; 3], [0.75 * l; 3]);
    let sc = parse_scenario(
        &json!({
            "mode": "united",
            "grid": { "n": 32, "length": l, "dtau": 1e-3 },
            "duration": 0.1,
            "initial_conditions": [
                { "field": 0, "target": "theta", "preset": "gaussian_pulse", "center": c0, "width": 1.5,
                  "amplitude": [[0.5, 0], [0, 0.3], [0, 0]], "scalar": [0, 1] },
                { "field": 0, "target": "a", "preset": "gaussian_pulse", "center": c0, "width": 1.5,
                  "amplitude": [[0, 0], [0.4, 0], [0, 0.2]] },
                { "field": 1, "target": "theta", "preset": "gaussian_pulse", "center": c1, "width": 1.5,
                  "amplitude": [[0, 0], [0.2, 0], [0, -0.4]], "scalar": [0, -1] },
                { "field": 1, "target": "a", "preset": "gaussian_pulse", "center": c1, "width": 1.5,
                  "amplitude": [[0.3, 0], [0, 0], [0, 0.1]] }
            ],
            "diagnostics": [{ "name": "freeness", "every": 10 }]
        })
        .to_string(),
    )
    .unwrap();
    let run = simulate(&sc, &RunOptions::default()).unwrap();
    assert_eq!(run.status, RunStatus::Ok);
    let freeness = run.series(DiagnosticKind::Freeness).unwrap().max_linf();

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let g = Grid::cube(6, 2.0, 0.1).unwrap();
    let mut decomposition = 0.0f64;
    for m in [2, 3, 4] {
        let fields: Vec<AField<f64>> = (0..m)
            .map(|_| {
                let mut a = AField::zeros(g);
                for i in 0..g.len() {
                    a.set(i, random_cvec(&mut rng));
                }
                a
            })
            .collect();
        let refs: Vec<&AField<f64>> = fields.iter().collect();
        decomposition = decomposition.max(interaction_energy(&refs).unwrap().decomposition_error);
    }
    let mut a = AField::zeros(g);
    for i in 0..g.len() {
        a.set(i, random_cvec(&mut rng));
    }
    let mut twice = energy_momentum_bq(&a);
    twice.axpy(1.0, &energy_momentum_bq(&a));
    let identical = pair_energy(&a, &a).unwrap() == twice;

    verdict(
        "8",
        freeness <= FREENESS_TOL && decomposition <= DECOMPOSITION_TOL && identical,
        format!(
            "two pulses, n=32, dtau=1e-3: freeness {freeness:.2e} (tol {FREENESS_TOL:.0e}); decomposition {decomposition:.2e} (tol {DECOMPOSITION_TOL:.0e}); identical fields δΞ = 2Ξ exactly: {identical}"
        ),
    );
}

#[test]
fn criterion_09a_characteristic_roots() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let expected = [-1.0, 0.0, 0.0, 1.0];
    let mut worst = 0.0f64;
    let mut sample = [0.0; 4];
    for _ in 0..100 {
        let r = CharacteristicSymbol::new(random_unit(&mut rng)).unwrap().roots();
        let e = r.iter().zip(expected).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if e >= worst {
            worst = e;
            sample = r;
        }
    }
    verdict(
        "9a",
        worst <= ROOTS_TOL,
        format!("roots vs {{-1, 0, 0, +1}} over 100 unit m: max deviation {worst:.2e} (tol {ROOTS_TOL:.0e}); computed {sample:.3?}"),
    );
}

#[test]
fn criterion_09b_jump_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut admissible = 0.0f64;
    let mut split = 0.0f64;
    for _ in 0..1000 {
        let m = random_unit(&mut rng);
        let medium = Medium::new(rng.gen_range(0.25..4.0), rng.gen_range(0.25..4.0), 1.0).unwrap();
        let mv = CVec3::from_real(m);
        let y = random_cvec(&mut rng);
        let y = y - mv.scale(y.dot(&mv));
        let x = y - y.cross(&mv).scale(C::i());
        let d = FrontData::new(m, x, C::new(0.0, 0.0), CVec3::zero()).unwrap();
        let (r1, t) = afield_jump_residual(&d).unwrap();
        let (e, h) = medium.physical_strength(&x);
        let j = afield_jump_energy(&d, e, h, &medium);
        admissible = [r1.norm(), t.norm(), j.electric, j.magnetic, j.energy_flux, j.zero_ahead]
            .iter()
            .fold(admissible, |a, b| a.max(*b));
        // Arbitrary jumps: |r1|² equals the sum of the squared strength residuals.
        let z = random_cvec(&mut rng);
        let d = FrontData::new(m, z, C::new(0.0, 0.0), CVec3::zero()).unwrap();
        let (r1, _) = afield_jump_residual(&d).unwrap();
        let (e, h) = medium.physical_strength(&z);
        let j = afield_jump_energy(&d, e, h, &medium);
        split = split.max((r1.norm_sqr() - j.electric * j.electric - j.magnetic * j.magnetic).abs());
    }
    verdict(
        "9b",
        admissible <= JUMP_TOL && split <= JUMP_TOL,
        format!("admissible jumps: all forms {admissible:.2e}; arbitrary jumps |r1|² split {split:.2e} (tol {JUMP_TOL:.0e})"),
    );
}

#[test]
fn criterion_09c_scalar_jump_from_vector_jump() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let m = random_unit(&mut rng);
        let d = FrontData::new(m, CVec3::zero(), random_c(&mut rng), random_cvec(&mut rng)).unwrap();
        let (rs, rv) = theta_jump_residual(&d).unwrap();
        worst = worst.max((rv.dot(&CVec3::from_real(m)) - rs).norm());
    }
    verdict("9c", worst <= JUMP_TOL, format!("|(r_v, m) - r_s| = {worst:.2e} over 1000 random fronts"));
}

fn scenario_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios"))
}

fn egm_run(scenario: &Path, out: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_egm"))
        .arg("run")
        .arg(scenario)
        .arg("--out")
        .arg(out)
        .arg("--reference")
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

fn read_csvs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn criterion_10_cli_determinism_and_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let pass = scenario_dir().join("free_gaussian.json");
    let fail = scenario_dir().join("breach.json");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let codes = [egm_run(&pass, &a), egm_run(&pass, &b), egm_run(&fail, &tmp.path().join("c"))];
    let (ca, cb) = (read_csvs(&a), read_csvs(&b));
    let identical = !ca.is_empty() && ca == cb;
    verdict(
        "10",
        identical && codes == [exit::OK, exit::OK, exit::TOLERANCE],
        format!("{} CSV files byte-identical across reference runs: {identical}; exit codes pass/pass/breach = {codes:?}", ca.len()),
    );
}
