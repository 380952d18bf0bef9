//! Randomized invariants.

mod common;

use std::f64::consts::PI;

use common::*;
use num_complex::Complex64;
use nrflow::scenarios::*;
use nrflow::*;
use proptest::prelude::*;
use rand::Rng;

fn mat_close(a: &Matrix64, b: &Matrix64, tol: f64) -> bool {
    a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| (x - y).abs() <= tol)
}

fn mul(a: &Matrix64, b: &Matrix64) -> Matrix64 {
    let mut out = Matrix64::zeros(a.rows(), b.cols());
    for i in 0..a.rows() {
        for j in 0..b.cols() {
            out[(i, j)] = (0..a.cols()).map(|k| a[(i, k)] * b[(k, j)]).sum();
        }
    }
    out
}

/// Random `(A, B, C)` with `‖A‖_∞·T ≤ 2` and a well-conditioned `∂g/∂u`.
fn random_system(seed: u64, n: usize, m: usize, horizon: f64) -> Option<(Matrix64, Matrix64, Matrix64)> {
    let mut r = rng(seed);
    let mut a = random_matrix(&mut r, n, n, 2.0);
    let scale = a.norm_inf() * horizon / 2.0;
    if scale > 1.0 {
        a = a.scale(1.0 / scale);
    }
    let b = random_matrix(&mut r, n, m, 1.0);
    let c = random_matrix(&mut r, m, n, 1.0);
    let pred = LtiPredictor::new(a.clone(), b.clone(), c.clone(), horizon).ok()?;
    (pred.gain_u().rcond().ok()? > 1e-3).then_some((a, b, c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn expm_inverse_pair(seed in any::<u64>(), n in 1usize..5) {
        let mut r = rng(seed);
        let mut m = random_matrix(&mut r, n, n, 2.0);
        let nm = m.norm_inf();
        if nm > 3.0 {
            m = m.scale(3.0 / nm);
        }
        let prod = mul(&expm(&m).unwrap(), &expm(&m.scale(-1.0)).unwrap());
        prop_assert!(mat_close(&prod, &Matrix64::identity(n), 1e-8));
    }

    #[test]
    fn expm_integral_matches_inverse_formula(seed in any::<u64>(), n in 1usize..4, t in 0.05f64..1.5) {
        let mut r = rng(seed);
        let a = random_matrix(&mut r, n, n, 2.0);
        prop_assume!(a.determinant().unwrap().abs() > 1e-6);
        let mut e = expm(&a.scale(t)).unwrap();
        for i in 0..n {
            e[(i, i)] -= 1.0;
        }
        let want = mul(&a.inverse().unwrap(), &e);
        let got = expm_integral(&a, t).unwrap();
        let tol = 1e-9 * (1.0 + want.max_abs());
        prop_assert!(mat_close(&got, &want, tol));
    }

    #[test]
    fn target_line_is_exactly_d_away(
        lx in -10.0f64..10.0, ly in -10.0f64..10.0,
        fx in -10.0f64..10.0, fy in -10.0f64..10.0,
        d in 0.01f64..5.0, h in -PI..PI,
    ) {
        let tp = follower_target_line([lx, ly], [fx, fy], d, h);
        let sep = dist(&tp.point, &[lx, ly]);
        prop_assert!((sep - d).abs() <= 1e-12 * d.max(1.0) * 10.0);
    }

    #[test]
    fn projection_is_consistent(qx in -20.0f64..140.0, qy in -60.0f64..80.0) {
        let path = RoadBuilder {
            start: [0.0, 0.0],
            heading: 0.0,
            pieces: vec![
                PathPiece::Straight { length: 50.0 },
                PathPiece::Arc { radius: 20.0, turn: PI / 2.0 },
                PathPiece::Straight { length: 30.0 },
            ],
            resolution: 0.5,
        }
        .build()
        .unwrap();
        let (s, d) = nearest_point_arclength(&path, [qx, qy]);
        prop_assert!(d >= 0.0 && s >= 0.0 && s <= path.length());
        prop_assert!((dist(&path.point_at(s), &[qx, qy]) - d).abs() < 1e-9);
        for p in path.points() {
            prop_assert!(dist(p, &[qx, qy]) >= d - 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn unicycle_branches_meet(
        z1 in -5.0f64..5.0, z2 in -5.0f64..5.0, psi in -PI..PI, v in -2.0f64..2.0, sign in prop::bool::ANY,
    ) {
        let h = 0.25;
        let p = UnicyclePredictor::with_default_eps(h).unwrap();
        let eps = p.omega_eps();
        let w = if sign { eps } else { -eps };
        let curved = p.predict(&[z1, z2, psi], &[v, w]).unwrap();
        let straight = [z1 + v * h * psi.cos(), z2 + v * h * psi.sin()];
        prop_assert!(dist(&curved, &straight) <= v.abs() * h * h * eps + 1e-15);
    }

    #[test]
    fn scenario_plants_stay_finite(seed in any::<u64>()) {
        let mut r = rng(seed);
        let pend = pendulum_dynamics(PendulumParams::default()).unwrap();
        let x = [r.gen_range(-PI..PI), r.gen_range(-10.0..10.0)];
        pend.probe(&x, &[r.gen_range(-100.0..100.0)]).unwrap();

        let bike = bicycle_dynamics(BicycleParams::default()).unwrap();
        let x: Vec<f64> = vec![
            r.gen_range(-500.0..500.0),
            r.gen_range(-500.0..500.0),
            r.gen_range(-5.0..40.0),
            r.gen_range(-5.0..5.0),
            r.gen_range(-PI..PI),
            r.gen_range(-2.0..2.0),
        ];
        bike.probe(&x, &[r.gen_range(-5.0..5.0), r.gen_range(-0.5..0.5)]).unwrap();

        let uni = unicycle_dynamics::<f64>();
        let x = [r.gen_range(-5.0..5.0), r.gen_range(-5.0..5.0), r.gen_range(-PI..PI)];
        uni.probe(&x, &[r.gen_range(-2.0..2.0), r.gen_range(-3.0..3.0)]).unwrap();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn lti_and_numeric_predictors_agree(seed in any::<u64>()) {
        let h = 0.5;
        let sys = random_system(seed, 2, 1, h);
        prop_assume!(sys.is_some());
        let (a, b, c) = sys.unwrap();
        let lti = LtiPredictor::new(a.clone(), b.clone(), c.clone(), h).unwrap();
        let num = NumericPredictor::new(PlantModel::linear(&a, &b, &c).unwrap(), h, 10_000).unwrap();
        let mut r = rng(seed ^ 1);
        let x = [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)];
        let u = [r.gen_range(-1.0..1.0)];
        let (gl, gn) = (lti.predict(&x, &u).unwrap(), num.predict(&x, &u).unwrap());
        let scale = 1.0f64.max(norm(&gl));
        prop_assert!(dist(&gl, &gn) <= 5e-3 * scale, "{gl:?} vs {gn:?}");
    }

    #[test]
    fn fd_matches_analytic_dgdu(seed in any::<u64>()) {
        let h = 0.25;
        let sys = random_system(seed, 3, 2, h);
        prop_assume!(sys.is_some());
        let (a, b, c) = sys.unwrap();
        let lti = LtiPredictor::new(a, b, c, h).unwrap();
        let uni = UnicyclePredictor::with_default_eps(h).unwrap();
        let mut r = rng(seed ^ 2);
        for _ in 0..50 {
            let x: Vec<f64> = (0..3).map(|_| r.gen_range(-2.0..2.0)).collect();
            let u = [r.gen_range(-2.0..2.0), r.gen_range(-3.0..3.0)];
            for pred in [&lti as &dyn PredictorModel<f64>, &uni] {
                let an = pred.dgdu(&x, &u).unwrap();
                let fd = fd_jacobian(|x: &[f64], u: &[f64]| pred.predict(x, u), &x, &u, Axis::Input, 1e-6).unwrap();
                let tol = 1e-5f64.max(1e-4 * an.max_abs());
                prop_assert!(mat_close(&an, &fd, tol));
            }
        }
    }

    #[test]
    fn bivariate_structure_and_determinant(seed in any::<u64>(), n in 1usize..5, m in 1usize..3) {
        let h = 0.3;
        let sys = random_system(seed, n, m, h);
        prop_assume!(sys.is_some());
        let (a, b, c) = sys.unwrap();
        for variant in [Variant::Basic, Variant::Intermediate] {
            let ls = LinearSystem::new(a.clone(), b.clone(), c.clone(), h, variant).unwrap();
            // fails with DegenerateStructure if any a_{i,j}, j > n+i, is above 1e−8·max|a|
            let p = char_poly_bivariate(&ls).unwrap();
            prop_assert_eq!(p.coeff(m, n + m), 1.0);
            prop_assert!(qtilde_identity_check(&p, 20));
            let mut r = rng(seed ^ 3);
            for _ in 0..20 {
                let alpha = 10f64.powf(r.gen_range(-1.0..2.0));
                let s = Complex64::new(r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0));
                let (phi, _) = build_phi_psi(&ls, alpha).unwrap();
                let want = char_det(&phi, s);
                let got = p.eval(alpha, s);
                let mut scale = 0.0;
                for i in 0..=m {
                    for j in 0..=n + i {
                        scale += p.coeff(i, j).abs() * alpha.powi((m - i) as i32) * s.norm().powi(j as i32);
                    }
                }
                prop_assert!((got - want).norm() <= 1e-6 * scale.max(want.norm()), "{got} vs {want}");
            }
        }
    }

    #[test]
    fn basic_equals_full_with_synthetic_injection(seed in any::<u64>()) {
        let plant = pendulum_dynamics(PendulumParams::default()).unwrap();
        let pred = NumericPredictor::with_default_steps(plant.clone(), 0.2).unwrap();
        let r = pendulum_reference(1.0).unwrap();
        let mut g = rng(seed);
        let t: f64 = g.gen_range(0.0..20.0);
        let x = [g.gen_range(-1.2..1.2), g.gen_range(-2.0..2.0)];
        let u = [g.gen_range(-20.0..20.0)];
        let state = AugmentedState::new(&plant, x.to_vec(), u.to_vec(), t).unwrap();
        let basic = ControllerConfig::new(Variant::Basic, 35.0, 0.2).unwrap();
        let ub: Vec<f64> = control_rate(&basic, &pred, &plant, &r, &state).unwrap();
        let rdot = r.eval_rate(t, 0.2).unwrap().unwrap();
        let gf = pred.dgdx(&x, &u).unwrap().mul_vec(&plant.dynamics(&x, &u));
        let e2 = vec![-rdot[0] + gf[0]];
        let full = ControllerConfig::new(Variant::Full, 35.0, 0.2).unwrap().with_constant_e2(e2);
        let uf: Vec<f64> = control_rate(&full, &pred, &plant, &r, &state).unwrap();
        prop_assert!((ub[0] - uf[0]).abs() <= 1e-10 * ub[0].abs().max(1.0));
    }
}

#[test]
fn corrupted_coefficient_breaks_qtilde_identity() {
    let (a, b, c, h) = unstable_nonminphase();
    let sys = LinearSystem::new(a, b, c, h, Variant::Basic).unwrap();
    let p = char_poly_bivariate(&sys).unwrap();
    let (_, q) = extract_p0_q(&p).unwrap();
    assert!(qtilde_matches(&p, &q, 100));
    let n = p.n();
    let bad = p.with_coeff(0, n, 1.1 * p.coeff(0, n)).unwrap();
    assert!(!qtilde_matches(&bad, &q, 100));
}

#[test]
fn transfer_gain_is_order_one_in_alpha() {
    let (a, b, c, h) = unstable_nonminphase();
    let sys = LinearSystem::new(a, b, c, h, Variant::Basic).unwrap();
    let omegas: Vec<f64> = (0..200).map(|k| 10f64.powf(-2.0 + 5.0 * k as f64 / 199.0)).collect();
    let gains: Vec<f64> = [1e2, 1e3, 1e4].iter().map(|&al| sys.transfer_peak_gain(al, &omegas).unwrap()).collect();
    let (lo, hi) = gains.iter().fold((f64::MAX, 0.0f64), |(l, h), &g| (l.min(g), h.max(g)));
    assert!(hi / lo < 3.0, "{gains:?}");
}

#[test]
fn pendulum_energy_is_conserved_unforced() {
    let p = PendulumParams::<f64>::default();
    let f = pendulum_dynamics(p).unwrap();
    let mut x = vec![0.4, 0.3];
    let e0 = p.energy(x[0], x[1]);
    for _ in 0..10_000 {
        x = euler_step(&|x: &[f64], u: &[f64], out: &mut [f64]| f.dynamics_into(x, u, out), 0.0, &x, &[0.0], 1e-4).unwrap();
    }
    let e1 = p.energy(x[0], x[1]);
    assert!((e1 - e0).abs() < 0.01 * e0.abs(), "{e0} -> {e1}");
}

#[test]
fn shipped_reference_rates_are_consistent() {
    let mut r = rng(7);
    let pend = pendulum_reference(1.0).unwrap();
    let ellipse = ReferenceSignal::sinusoid(vec![0.0, 0.0], vec![1.1, 0.7], vec![0.06, 0.06], vec![0.0, PI / 2.0]).unwrap();
    let road = SCurve::standard(50.0).unwrap().reference().unwrap();
    for reference in [pend, ellipse, road] {
        let times: Vec<f64> = (0..10).map(|_| r.gen_range(0.5..38.0)).collect();
        assert!(reference.check_rate_consistency(&times, 1e-4).unwrap());
    }
}

#[test]
fn grid_counts_steps() {
    let g = TimeGrid::new(0.0, 1.0, 0.3).unwrap();
    assert_eq!(g.steps(), 3);
    assert!(TimeGrid::new(1.0, 0.0, 0.1).is_err());
    assert!(TimeGrid::new(0.0, 1.0, 0.0).is_err());
}
