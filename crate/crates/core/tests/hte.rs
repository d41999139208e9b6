use osp_thermo::hte::{pade, run_hte, shift_laurent, BetaSeries, Gaussian, PoleRational};
use osp_thermo::rational::{frac, int, parse, to_f64, to_string, Rational};
use osp_thermo::Complex64;
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Rational> {
    (-40i64..40, 1i64..12).prop_map(|(n, d)| frac(n, d))
}

fn pole_rational() -> impl Strategy<Value = PoleRational> {
    (1usize..=3, -3i64..=3, prop::collection::vec(rational(), 6), rational()).prop_map(|(n, l, xs, k)| {
        let (b, c) = xs.split_at(3);
        PoleRational::from_ansatz(n, &b[..n], &c[..n])
            .shift(l)
            .add(&PoleRational::constant(Gaussian::real(k)))
    })
}

/// Off the imaginary axis, so never on a pole.
fn point() -> impl Strategy<Value = Gaussian> {
    ((1i64..30, 1i64..7, any::<bool>()), rational()).prop_map(|((n, d, neg), im)| {
        let re = frac(if neg { -n } else { n }, d);
        Gaussian::new(re, im)
    })
}

fn ev(f: &PoleRational, z: &Gaussian) -> Gaussian {
    f.eval(z).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn product_evaluates_exactly(a in pole_rational(), b in pole_rational(), z in point()) {
        prop_assert_eq!(ev(&a.mul(&b), &z), &ev(&a, &z) * &ev(&b, &z));
    }

    #[test]
    fn sum_and_scale_evaluate_exactly(a in pole_rational(), b in pole_rational(), k in rational(), z in point()) {
        prop_assert_eq!(ev(&a.add(&b), &z), &ev(&a, &z) + &ev(&b, &z));
        prop_assert_eq!(ev(&a.sub(&b), &z), &ev(&a, &z) - &ev(&b, &z));
        prop_assert_eq!(ev(&a.scale(&k), &z), ev(&a, &z).scale(&k));
    }

    #[test]
    fn shift_moves_argument(a in pole_rational(), l in -4i64..=4, z in point()) {
        let moved = &z + &Gaussian::half_i(l);
        prop_assert_eq!(ev(&a.shift(l), &z), ev(&a, &moved));
    }

    #[test]
    fn ansatz_coefficients_round_trip(n in 1usize..=4, xs in prop::collection::vec(rational(), 8)) {
        let (b, c) = xs.split_at(4);
        let f = PoleRational::from_ansatz(n, &b[..n], &c[..n]);
        let (b2, c2) = f.ansatz_coefficients(n).unwrap();
        prop_assert_eq!(&b2[..], &b[..n]);
        prop_assert_eq!(&c2[..], &c[..n]);
    }

    #[test]
    fn laurent_expansion_agrees_with_values(a in pole_rational(), centre in -3i64..=3) {
        let centre = frac(centre, 2);
        let l = shift_laurent(&a, &centre, 6).unwrap();
        let y = Complex64::new(0.013, 0.007);
        let at = a.eval_c64(y + Complex64::new(0.0, to_f64(&centre)));
        let sum: Complex64 = (l.low..=6)
            .map(|e| l.coefficient(e).to_c64() * y.powi(e as i32))
            .sum();
        prop_assert!((at - sum).norm() < 1e-6 * (1.0 + at.norm()), "{at} vs {sum}");
    }

    #[test]
    fn rational_text_round_trip(q in rational()) {
        prop_assert_eq!(parse(&to_string(&q)).unwrap(), q);
    }
}

fn series(xs: &[PoleRational]) -> BetaSeries {
    BetaSeries::new(xs.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn series_product_is_associative(xs in prop::collection::vec(pole_rational(), 12)) {
        let (a, b, c) = (series(&xs[..4]), series(&xs[4..8]), series(&xs[8..]));
        let left = a.mul(&b).unwrap().mul(&c).unwrap();
        let right = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn exp_inverts_log(xs in prop::collection::vec(pole_rational(), 3)) {
        let mut coeffs = vec![PoleRational::constant(Gaussian::real(int(3)))];
        coeffs.extend(xs);
        let x = series(&coeffs);
        prop_assert_eq!(x.log().unwrap().exp().unwrap(), x);
    }
}

#[test]
fn log_of_product_is_sum_of_logs() {
    let a = series(&[
        PoleRational::constant(Gaussian::real(int(3))),
        PoleRational::from_ansatz(1, &[frac(-2, 3)], &[frac(-1, 3)]),
        PoleRational::from_ansatz(2, &[int(1), int(2)], &[int(0), frac(1, 5)]),
    ]);
    let b = series(&[
        PoleRational::constant(Gaussian::real(int(2))),
        PoleRational::from_ansatz(1, &[int(1)], &[int(4)]),
        PoleRational::constant(Gaussian::real(frac(7, 9))),
    ]);
    let left = a.mul(&b).unwrap().log().unwrap();
    let right = a.log().unwrap().add(&b.log().unwrap()).unwrap();
    assert_eq!(left, right);
}

#[test]
fn specific_heat_is_curvature_of_free_energy() {
    let res = run_hte(12).unwrap();
    for t in [3.0, 5.0, 8.0] {
        let h = 0.02;
        let f = |x: f64| res.free_energy_at(-1.0, x);
        let second =
            (-f(t + 2.0 * h) + 16.0 * f(t + h) - 30.0 * f(t) + 16.0 * f(t - h) - f(t - 2.0 * h)) / (12.0 * h * h);
        let c = res.specific_heat_at(-1.0, t);
        assert!(
            (c + t * second).abs() < 1e-7 * c.abs().max(1e-3),
            "T={t}: {c} vs {}",
            -t * second
        );
    }
}

#[test]
fn pade_reproduces_series_exactly() {
    let res = run_hte(12).unwrap();
    let c = res.specific_heat_series();
    let p = pade(&c, 6, 6).unwrap();
    assert!(!p.degenerate);
    // Q·C - P vanishes through order m+n
    for k in 0..=12usize {
        let qc = (0..=k.min(6)).fold(Rational::from_integer(0.into()), |acc, j| {
            acc + &p.denominator[j] * &c[k - j]
        });
        let pk = p
            .numerator
            .get(k)
            .cloned()
            .unwrap_or_else(|| Rational::from_integer(0.into()));
        assert_eq!(qc, pk, "order {k}");
    }
}

#[test]
fn pade_is_positive_and_tracks_series_at_high_temperature() {
    let res = run_hte(12).unwrap();
    let p = pade(&res.specific_heat_series(), 6, 6).unwrap();
    assert!(p.eval(-1.0) > 0.0);
    for t in [3.0, 4.0, 5.0, 10.0] {
        let series = res.specific_heat_at(-1.0, t);
        assert!((p.eval(-1.0 / t) / series - 1.0).abs() < 0.01, "T={t}");
    }
}

#[test]
fn ansatz_functions_are_even_and_real() {
    let res = run_hte(6).unwrap();
    for a in &res.ansatz {
        for v in [0.0, 0.4, 1.7] {
            let plus = a.eval_c64(Complex64::new(v, 0.0));
            let minus = a.eval_c64(Complex64::new(-v, 0.0));
            assert!((plus - minus).norm() < 1e-14 * (1.0 + plus.norm()));
            assert!(plus.im.abs() < 1e-14 * (1.0 + plus.norm()));
        }
    }
}

#[test]
fn series_orders_are_nested() {
    let low = run_hte(6).unwrap();
    let high = run_hte(9).unwrap();
    assert_eq!(low.free_energy[..], high.free_energy[..6]);
    assert_eq!(low.ansatz_coefficients[..], high.ansatz_coefficients[..6]);
}
