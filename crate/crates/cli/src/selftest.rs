//! Quick in-process invariant suite behind `egm selftest`.

use std::f64::consts::TAU;

use egm_core::diagnostics::interaction_energy;
use egm_core::evolution::step_rk4;
use egm_core::operators::{apply_box, apply_dminus, apply_dplus};
use egm_core::shock::{afield_jump_energy, afield_jump_residual, theta_jump_residual};
use egm_core::{
    AField, Biquaternion, BqField, CVec3, ChargeCurrent, CharacteristicSymbol, Complex, FieldPair, FrontData, Grid,
    Medium, Nabla, SimState, StepperConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C = Complex<f64>;

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value <= self.tolerance
    }
}

fn random_bq(rng: &mut ChaCha8Rng) -> Biquaternion<f64> {
    Biquaternion::from_components(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)))
}

fn algebra(rng: &mut ChaCha8Rng) -> f64 {
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let (a, b, c) = (random_bq(rng), random_bq(rng), random_bq(rng));
        worst = worst.max((a.mul(&b).mul(&c) - a.mul(&b.mul(&c))).max_abs());
        worst = worst.max((a.mul(&b).conj() - b.conj().mul(&a.conj())).max_abs());
    }
    worst
}

fn factorization() -> f64 {
    let g = Grid::cube(16, TAU, 0.1).unwrap();
    let nabla = Nabla::spectral(g);
    let (k, w) = ([1.0, -2.0, 3.0], 0.7);
    let amp = Biquaternion::from_components([0.3, -0.2, 0.5, 0.1, -0.4, 0.6, 0.2, -0.7]);
    let f = |order: i32| {
        BqField::from_fn(g, |x| {
            let ph = C::from_polar(1.0, k[0] * x[0] + k[1] * x[1] + k[2] * x[2]);
            amp.scale(ph * C::new(0.0, -w).powi(order))
        })
    };
    let (f0, f1, f2) = (f(0), f(1), f(2));
    let dp = apply_dplus(&nabla, &f0, &f1).unwrap();
    let dp_t = apply_dplus(&nabla, &f1, &f2).unwrap();
    let mp = apply_dminus(&nabla, &dp, &dp_t).unwrap();
    mp.sub(&apply_box(&nabla, &f0, &f2).unwrap()).linf()
}

fn plane_wave() -> f64 {
    let g = Grid::cube(8, TAU, TAU / 256.0).unwrap();
    let nabla = Nabla::spectral(g);
    let wave = |tau: f64| {
        AField::from_fn(g, |x| {
            let ph = C::from_polar(1.0, x[2] - tau);
            CVec3::new(ph, C::i() * ph, C::new(0.0, 0.0))
        })
    };
    let mut s = SimState::new(vec![FieldPair { a: wave(0.0), theta: ChargeCurrent::zeros(g) }], Medium::unit()).unwrap();
    let cfg = StepperConfig::default();
    for _ in 0..256 {
        s = step_rk4(&nabla, &s, &cfg).unwrap().state;
    }
    s.fields[0].a.sub(&wave(TAU)).linf()
}

fn roots(rng: &mut ChaCha8Rng) -> f64 {
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let v: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt().max(1e-3);
        let r = CharacteristicSymbol::new(v.map(|x| x / n)).unwrap().roots();
        for (got, want) in r.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            worst = worst.max((got - want).abs());
        }
    }
    worst
}

fn jumps(rng: &mut ChaCha8Rng) -> f64 {
    let mut worst = 0.0f64;
    let medium = Medium::new(2.0, 0.5, 1.0).unwrap();
    for _ in 0..100 {
        let v: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt().max(1e-3);
        let m = v.map(|x| x / n);
        let mv = CVec3::from_real(m);
        let y = CVec3::from_re_im(
            std::array::from_fn(|_| rng.gen_range(-1.0..1.0)),
            std::array::from_fn(|_| rng.gen_range(-1.0..1.0)),
        );
        let y = y - mv.scale(y.dot(&mv));
        let ja = y - y.cross(&mv).scale(C::i());
        let rho = C::new(rng.gen_range(-1.0..1.0), 0.0);
        let jj = mv.scale(rho) + y - mv.cross(&y).scale(C::i());
        let d = FrontData::new(m, ja, rho, jj).unwrap();
        let (r1, t) = afield_jump_residual(&d).unwrap();
        let (e, h) = medium.physical_strength(&ja);
        let en = afield_jump_energy(&d, e, h, &medium);
        let (rs, rv) = theta_jump_residual(&d).unwrap();
        for x in [r1.norm(), t.norm(), en.electric, en.magnetic, en.energy_flux, rs.norm(), rv.norm()] {
            worst = worst.max(x);
        }
    }
    worst
}

fn decomposition(rng: &mut ChaCha8Rng) -> f64 {
    let g = Grid::cube(4, 1.0, 0.1).unwrap();
    let mut fields = vec![AField::zeros(g), AField::zeros(g), AField::zeros(g)];
    for f in fields.iter_mut() {
        for i in 0..g.len() {
            let v = CVec3::from_re_im(
                std::array::from_fn(|_| rng.gen_range(-1.0..1.0)),
                std::array::from_fn(|_| rng.gen_range(-1.0..1.0)),
            );
            f.set(i, v);
        }
    }
    let refs: Vec<&AField<f64>> = fields.iter().collect();
    interaction_energy(&refs).unwrap().decomposition_error
}

pub fn run_all() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    vec![
        Check { name: "algebra", value: algebra(&mut rng), tolerance: 1e-12 },
        Check { name: "factorization", value: factorization(), tolerance: 1e-10 },
        Check { name: "plane_wave", value: plane_wave(), tolerance: 1e-7 },
        Check { name: "roots", value: roots(&mut rng), tolerance: 1e-12 },
        Check { name: "jumps", value: jumps(&mut rng), tolerance: 1e-13 },
        Check { name: "decomposition", value: decomposition(&mut rng), tolerance: 1e-13 },
    ]
}
