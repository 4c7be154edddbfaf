use num_complex::Complex64 as C;
use proptest::prelude::*;
use zakharov_core::bounds::{supsum_column, SupSumKind, SupSumParams};
use zakharov_core::convolution::convolve;
use zakharov_core::dynamics::{energy, mass, rhs, ModelParams, ZakharovState};
use zakharov_core::field::{sobolev_norm, FourierField};
use zakharov_core::normal_form::{NormalForm, Rho2Variant};
use zakharov_core::random::{random_sobolev_field, RandomFieldOptions};
use zakharov_core::reduction::{from_plus_minus, to_plus_minus};
use zakharov_core::regularity::fit_regularity;

fn field(radius: usize) -> impl Strategy<Value = FourierField> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2 * radius + 1)
        .prop_map(|v| FourierField::from_coeffs(v.into_iter().map(|(a, b)| C::new(a, b)).collect()).unwrap())
}

fn state(radius: usize) -> impl Strategy<Value = ZakharovState> {
    (field(radius), field(radius)).prop_map(|(u, n)| ZakharovState::new(u, n.with_mean_zero(), 0.0).unwrap())
}

fn alpha() -> impl Strategy<Value = ModelParams> {
    prop_oneof![(1i64..4, 1i64..5), Just((1, 1))].prop_map(|(p, q)| ModelParams::rational(p, q).unwrap())
}

fn close(a: &FourierField, b: &FourierField, tol: f64) -> bool {
    let scale = b.max_abs().max(1e-300);
    a.sub(b).unwrap().max_abs() <= tol * scale
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn convolution_commutes(f in field(10), g in field(10)) {
        prop_assert!(close(&convolve(&f, &g).unwrap(), &convolve(&g, &f).unwrap(), 1e-13));
    }

    #[test]
    fn mass_is_conserved_by_the_vector_field(s in state(12), p in alpha()) {
        let (du, _) = rhs(&s, &p);
        let dm: f64 = s.u.coeffs().iter().zip(du.coeffs()).map(|(u, d)| 2.0 * (u.conj() * d).re).sum();
        prop_assert!(dm.abs() <= 1e-10 * mass(&s).max(1.0), "dm {dm}");
    }

    #[test]
    fn energy_is_conserved_by_the_vector_field(s in state(12), p in alpha()) {
        let (du, dn) = rhs(&s, &p);
        let h = 1e-5;
        let shifted = |c: f64| ZakharovState::new(
            s.u.add(&du.scale(C::new(c, 0.0))).unwrap(),
            s.n_plus.add(&dn.scale(C::new(c, 0.0))).unwrap().with_mean_zero(),
            0.0,
        ).unwrap();
        let de = (energy(&shifted(h), &p) - energy(&shifted(-h), &p)) / (2.0 * h);
        let scale = du.max_abs().max(dn.max_abs()) * (1.0 + energy(&s, &p).abs());
        prop_assert!(de.abs() <= 1e-6 * scale, "dE/dt {de} scale {scale}");
    }

    #[test]
    fn b1_is_bilinear(s in state(8), p in alpha(), a in -2.0f64..2.0, c in (-2.0f64..2.0, -2.0f64..2.0)) {
        let nf = NormalForm::new(&p, 8);
        let base = nf.b1(&s.n_plus, &s.u).unwrap();
        let c = C::new(c.0, c.1);
        let in_u = nf.b1(&s.n_plus, &s.u.scale(c)).unwrap();
        prop_assert!(close(&in_u, &base.scale(c), 1e-12));
        let in_n = nf.b1(&s.n_plus.scale(C::new(a, 0.0)), &s.u).unwrap();
        prop_assert!(close(&in_n, &base.scale(C::new(a, 0.0)), 1e-12));
    }

    #[test]
    fn b2_is_quadratic_in_modulus(s in state(8), p in alpha(), c in (-2.0f64..2.0, -2.0f64..2.0)) {
        let nf = NormalForm::new(&p, 8);
        let c = C::new(c.0, c.1);
        let base = nf.b2(&s.u).unwrap();
        prop_assert!(close(&nf.b2(&s.u.scale(c)).unwrap(), &base.scale(C::new(c.norm_sqr(), 0.0)), 1e-12));
    }

    #[test]
    fn rho2_of_real_even_data_is_conjugate_symmetric(v in proptest::collection::vec(-1.0f64..1.0, 13), q in 1i64..4) {
        let u = FourierField::from_fn(12, |k| C::new(v[k.unsigned_abs() as usize], 0.0));
        let nf = NormalForm::new(&ModelParams::rational(1, q).unwrap(), 12);
        let r = nf.rho2(&u, Rho2Variant::Substituted).unwrap();
        for j in 0..=12i64 {
            prop_assert!((r.get(-j) - r.get(j).conj()).norm() <= 1e-12 * r.max_abs().max(1.0));
        }
    }

    #[test]
    fn plus_minus_round_trip(s in state(10)) {
        let back = to_plus_minus(&from_plus_minus(&s)).unwrap();
        prop_assert!(close(&back.u, &s.u, 1e-15));
        prop_assert!(close(&back.n_plus, &s.n_plus, 1e-14));
    }

    #[test]
    fn sobolev_norm_grows_with_index(f in field(10), s in -2.0f64..2.0, ds in 0.0f64..2.0) {
        prop_assert!(sobolev_norm(&f, s) <= sobolev_norm(&f, s + ds) * (1.0 + 1e-14));
    }

    #[test]
    fn regularity_fit_ignores_amplitude(seed in 0u64..1000, s in -0.5f64..2.0, amp in 0.01f64..100.0) {
        let f = random_sobolev_field(s, 128, seed, false, &RandomFieldOptions::default());
        let a = fit_regularity(&f, 4, 128).unwrap().s_hat;
        let b = fit_regularity(&f.scale(C::new(amp, 0.0)), 4, 128).unwrap().s_hat;
        prop_assert!((a - b).abs() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn supsum_columns_grow_with_s(k in 0i64..24, ds in 0.0f64..1.0, kind in 0usize..4) {
        let kind = SupSumKind::ALL[kind];
        let p = SupSumParams { s: 0.8, s0: 1.0, s1: 0.0, b: 0.55, alpha: ModelParams::rational(3, 4).unwrap() };
        let q = SupSumParams { s: 0.8 + ds, ..p };
        let lo = supsum_column(kind, &p, k, 128);
        let hi = supsum_column(kind, &q, k, 128);
        prop_assert!(lo.is_finite() && lo > 0.0);
        prop_assert!(lo <= hi * (1.0 + 1e-12));
    }
}
