use std::collections::BTreeMap;

use loewner_witt::algebra::{kirillov_field, lie_bracket, CoeffPolynomial, VectorFieldOnM};
use loewner_witt::algebra::{cdot_from_u, u_from_cdot};
use loewner_witt::geodesics::{momenta_from_state, state_from_momenta, CotangentState};
use loewner_witt::io::fmt_f64;
use loewner_witt::scalar::{QComplex, Scalar};
use loewner_witt::series::{LaurentWindow, TruncatedTaylor};
use loewner_witt::sle::{drift_operator, simulate_chordal, Observable, SleParams, DRIFT_TOL};
use num_complex::Complex64;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn q() -> impl Strategy<Value = QComplex> {
    (-6i64..=6, 1i64..=4, -6i64..=6, 1i64..=4).prop_map(|(a, b, c, d)| {
        QComplex::from_ratio(a, b) + QComplex::from_ratio(c, d) * QComplex::i()
    })
}

fn series(order: usize) -> impl Strategy<Value = TruncatedTaylor<QComplex>> {
    prop::collection::vec(q(), order + 1).prop_map(TruncatedTaylor::new)
}

fn series_vanishing_at_zero(order: usize) -> impl Strategy<Value = TruncatedTaylor<QComplex>> {
    series(order).prop_map(|s| {
        let mut c = s.into_coeffs();
        c[0] = QComplex::zero();
        TruncatedTaylor::new(c)
    })
}

fn cx() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| Complex64::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn series_ring_axioms(a in series(5), b in series(5), c in series(5)) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        let one = TruncatedTaylor::constant(QComplex::one(), 5);
        prop_assert_eq!(&a * &one, a.clone());
        prop_assert_eq!(&a - &a, TruncatedTaylor::zero(5));
    }

    #[test]
    fn reciprocal_is_inverse(a in series(6)) {
        prop_assume!(!a.coeffs()[0].is_zero());
        let r = a.reciprocal().unwrap();
        prop_assert_eq!(&a * &r, TruncatedTaylor::constant(QComplex::one(), 6));
    }

    #[test]
    fn composition_identities(a in series(5), b in series_vanishing_at_zero(5), c in series_vanishing_at_zero(5)) {
        let z = TruncatedTaylor::<QComplex>::identity(5);
        prop_assert_eq!(a.compose(&z).unwrap(), a.clone());
        prop_assert_eq!(z.compose(&b).unwrap(), b.clone());
        // (a ∘ b) ∘ c = a ∘ (b ∘ c)
        let left = a.compose(&b).unwrap().compose(&c).unwrap();
        let right = a.compose(&b.compose(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        // Chain rule: (a ∘ b)' = (a' ∘ b) b', compared below the top order.
        let lhs = a.compose(&b).unwrap().derivative();
        let rhs = &a.derivative().compose(&b.truncate(4)).unwrap() * &b.derivative();
        prop_assert_eq!(lhs.truncate(4), rhs.truncate(4));
    }

    #[test]
    fn laurent_product_matches_brute_force(
        a in prop::collection::vec(q(), 7),
        b in prop::collection::vec(q(), 5),
        lo in -3i64..=0,
        hi in 0i64..=3,
        noise in q(),
    ) {
        // True Laurent polynomials on z^-3..z^3 and z^-2..z^2.
        let truth: BTreeMap<i64, QComplex> = {
            let mut m = BTreeMap::new();
            for (i, x) in a.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    let k = i as i64 - 3 + j as i64 - 2;
                    let e = m.entry(k).or_insert_with(QComplex::zero);
                    *e = e.clone() + x.clone() * y.clone();
                }
            }
            m
        };
        let exact = LaurentWindow::new(3, a.clone()).unwrap().mul(&LaurentWindow::new(2, b.clone()).unwrap());
        for k in -5..=5 {
            prop_assert_eq!(exact.trusted(k), truth.get(&k));
        }
        // Corrupt the first factor outside [lo, hi] and mark it unknown there:
        // whatever survives as trusted must still equal the true product.
        let mut corrupted = a.clone();
        for (i, v) in corrupted.iter_mut().enumerate() {
            let k = i as i64 - 3;
            if k < lo || k > hi {
                *v = v.clone() + noise.clone() + QComplex::one();
            }
        }
        let partial = LaurentWindow::new(3, corrupted).unwrap().with_validity(lo, hi);
        let prod = partial.mul(&LaurentWindow::new(2, b).unwrap());
        for k in -5..=5 {
            if let Some(v) = prod.trusted(k) {
                prop_assert_eq!(Some(v), truth.get(&k));
            }
        }
    }

    #[test]
    fn witt_relation(m in 1usize..6, k in 1usize..6) {
        let n = 11;
        let br = lie_bracket(&kirillov_field(m, n).unwrap(), &kirillov_field(k, n).unwrap()).unwrap();
        let expected = if m + k <= n {
            kirillov_field(m + k, n).unwrap().scale(&QComplex::from(k as i64 - m as i64))
        } else {
            VectorFieldOnM::zero(n)
        };
        let t = br.trusted();
        prop_assert_eq!(&br.components()[..t], &expected.components()[..t]);
    }

    #[test]
    fn bracket_antisymmetry_and_jacobi(
        wa in prop::collection::vec(-3i64..=3, 3),
        wb in prop::collection::vec(-3i64..=3, 3),
        wc in prop::collection::vec(-3i64..=3, 3),
    ) {
        let n = 9;
        let combo = |w: &[i64]| {
            let mut acc = VectorFieldOnM::zero(n);
            for (j, &x) in w.iter().enumerate() {
                acc = acc.add(&kirillov_field(j + 1, n).unwrap().scale(&QComplex::from(x))).unwrap();
            }
            acc
        };
        let (a, b, c) = (combo(&wa), combo(&wb), combo(&wc));
        let ab = lie_bracket(&a, &b).unwrap();
        let ba = lie_bracket(&b, &a).unwrap();
        prop_assert!(ab.add(&ba).unwrap().is_zero_on_trusted());
        let j = lie_bracket(&a, &lie_bracket(&b, &c).unwrap()).unwrap()
            .add(&lie_bracket(&b, &lie_bracket(&c, &a).unwrap()).unwrap()).unwrap()
            .add(&lie_bracket(&c, &lie_bracket(&a, &b).unwrap()).unwrap()).unwrap();
        prop_assert!(j.is_zero_on_trusted());
    }

    #[test]
    fn velocity_round_trip(c in prop::collection::vec(q(), 5), u in prop::collection::vec(q(), 5)) {
        let cd = cdot_from_u(&u, &c).unwrap();
        prop_assert_eq!(u_from_cdot(&cd, &c).unwrap(), u);
    }

    #[test]
    fn momenta_round_trip(c in prop::collection::vec(cx(), 6), psi in prop::collection::vec(cx(), 6)) {
        let s = CotangentState::new(c.clone(), psi.clone()).unwrap();
        let l = momenta_from_state(&s);
        prop_assert_eq!(l[5], psi[5]);
        let back = state_from_momenta(&l, &c).unwrap();
        for (x, y) in back.iter().zip(&psi) {
            prop_assert!((x - y).norm() < 1e-9);
        }
    }

    #[test]
    fn float_text_round_trips(bits in any::<u64>()) {
        let x = f64::from_bits(bits);
        prop_assume!(x.is_finite());
        prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn driftless_power_family(kappa in 0.2f64..10.0, a in cx()) {
        let f = Observable::monomial(a, 1.0 - 4.0 / kappa);
        prop_assert!(drift_operator(&f, kappa).is_negligible(a.norm().max(1e-300), DRIFT_TOL));
    }

    #[test]
    fn imaginary_part_never_increases(seed in any::<u64>(), kappa in 0.5f64..8.0, x in -1.0f64..1.0) {
        let p = SleParams::new(kappa, 5e-3, 0.2, 4, seed);
        for path in simulate_chordal(&p, Complex64::new(x, 0.7)).unwrap() {
            for w in path.k_values.windows(2) {
                prop_assert!(w[1].im <= w[0].im);
            }
        }
    }
}

#[test]
fn polynomial_ring_is_commutative_on_samples() {
    let c = |k| CoeffPolynomial::var(k);
    let a = &c(1) * &c(2) + c(3).scale_int(2);
    let b = &c(2) - &CoeffPolynomial::int(5);
    assert_eq!(&a * &b, &b * &a);
    assert_eq!(&(&a + &b) * &(&a + &b), &(&(&a * &a) + &(&a * &b).scale_int(2)) + &(&b * &b));
}
