//! Property-based invariants over the exact arithmetic: valuation laws,
//! square roots, DSq group structure, Hilbert symbol bilinearity, and
//! extension norm multiplicativity.

use proptest::prelude::*;

use padic_williamson::ext::QuadExt;
use padic_williamson::padic::{
    self, dsq_member, hilbert_symbol, nonresidue_sets, PadicScalar, Prime,
};

fn primes() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![2u64, 3, 5, 7, 13])
}

fn rational(p: Prime) -> impl Strategy<Value = PadicScalar> {
    (-400i64..400, 1i64..40).prop_map(move |(n, d)| PadicScalar::from_ratio(p, n, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn ord_is_a_valuation((pr, n1, d1, n2, d2) in (primes(), -500i64..500, 1i64..50, -500i64..500, 1i64..50)) {
        let p = Prime::new(pr).unwrap();
        let x = PadicScalar::from_ratio(p, n1, d1);
        let y = PadicScalar::from_ratio(p, n2, d2);
        if !x.is_zero() && !y.is_zero() {
            let prod = x.mul(&y);
            prop_assert_eq!(prod.ord().unwrap(), x.ord().unwrap() + y.ord().unwrap());
            let sum = x.add(&y);
            if !sum.is_zero() {
                prop_assert!(sum.ord().unwrap() >= x.ord().unwrap().min(y.ord().unwrap()));
            }
            if x.ord() != y.ord() {
                prop_assert_eq!(
                    x.add(&y).ord().unwrap(),
                    x.ord().unwrap().min(y.ord().unwrap())
                );
            }
        }
    }

    #[test]
    fn sqrt_squares_back((pr, n, d) in (primes(), -400i64..400, 1i64..40)) {
        let p = Prime::new(pr).unwrap();
        let x = PadicScalar::from_ratio(p, n, d);
        if !x.is_zero() {
            let sq = x.mul(&x);
            prop_assert!(sq.is_square().unwrap());
            let r = sq.sqrt().unwrap().unwrap();
            let back = r.mul(&r);
            prop_assert!(back.eq_to_precision(&sq));
        }
    }

    #[test]
    fn square_class_is_multiplicative((pr, n1, d1, n2, d2) in (primes(), -300i64..300, 1i64..30, -300i64..300, 1i64..30)) {
        let p = Prime::new(pr).unwrap();
        let x = PadicScalar::from_ratio(p, n1, d1);
        let y = PadicScalar::from_ratio(p, n2, d2);
        if !x.is_zero() && !y.is_zero() {
            let cx = padic::square_class(&x).unwrap();
            let cy = padic::square_class(&y).unwrap();
            let cxy = padic::square_class(&x.mul(&y)).unwrap();
            prop_assert_eq!(cx.mul(cy), cxy);
        }
    }

    #[test]
    fn dsq_is_a_group((pr, ci, n1, d1, n2, d2) in (primes(), 0usize..8, -200i64..200, 1i64..20, -200i64..200, 1i64..20)) {
        let p = Prime::new(pr).unwrap();
        let (xs, _) = nonresidue_sets(p);
        let c = xs[ci % xs.len()].clone();
        let u = PadicScalar::from_ratio(p, n1, d1);
        let v = PadicScalar::from_ratio(p, n2, d2);
        if !u.is_zero() && !v.is_zero() {
            let mu = dsq_member(&c, &u).unwrap();
            let mv = dsq_member(&c, &v).unwrap();
            if mu && mv {
                prop_assert!(dsq_member(&c, &u.mul(&v)).unwrap());
                prop_assert!(dsq_member(&c, &u.inv().unwrap()).unwrap());
            }
            // membership only depends on the square class
            prop_assert_eq!(mu, dsq_member(&c, &u.mul(&u).mul(&v.mul(&v)).mul(&u.inv().unwrap())).unwrap());
        }
    }

    #[test]
    fn hilbert_symbol_symmetric_multiplicative((pr, i, j, k) in (primes(), 0usize..12, 0usize..12, 0usize..12)) {
        let p = Prime::new(pr).unwrap();
        let (xs, ys) = nonresidue_sets(p);
        let reps: Vec<PadicScalar> = xs.into_iter().chain(ys).collect();
        let a = reps[i % reps.len()].clone();
        let b = reps[j % reps.len()].clone();
        let c = reps[k % reps.len()].clone();
        prop_assert_eq!(hilbert_symbol(&a, &b).unwrap(), hilbert_symbol(&b, &a).unwrap());
        prop_assert_eq!(
            hilbert_symbol(&a, &b.mul(&c)).unwrap(),
            hilbert_symbol(&a, &b).unwrap() * hilbert_symbol(&a, &c).unwrap()
        );
        // (1, u) = (u, -u) = 1
        prop_assert_eq!(hilbert_symbol(&PadicScalar::one(p), &a).unwrap(), 1);
        prop_assert_eq!(hilbert_symbol(&a, &a.neg()).unwrap(), 1);
        // dsq_member(c, u) iff (u, -c-ish) = 1
        let member = dsq_member(&c, &a).unwrap();
        prop_assert_eq!(member, hilbert_symbol(&a, &c.neg().mul(&b.mul(&b))).unwrap() == 1);
    }

    #[test]
    fn ext_norm_is_multiplicative((pr, ci, a1, b1, a2, b2) in (primes(), 0usize..4, -50i64..50, -50i64..50, -50i64..50, -50i64..50)) {
        let p = Prime::new(pr).unwrap();
        let (_, ys) = nonresidue_sets(p);
        let c = ys[ci % ys.len()].clone();
        let ext = QuadExt::new(p, c).unwrap();
        let z = ext.from_ints(a1, b1);
        let w = ext.from_ints(a2, b2);
        let nz = z.norm();
        let nw = w.norm();
        let nzw = z.mul(&w).norm();
        prop_assert!(nzw.eq_to_precision(&nz.mul(&nw)));
        // conjugation is an involutive automorphism
        prop_assert!(z.conj().conj().eq_to_precision(&z));
        prop_assert!(z.mul(&w).conj().eq_to_precision(&z.conj().mul(&w.conj())));
    }

    #[test]
    fn scalar_string_round_trip((pr, n, d) in (primes(), -10_000i64..10_000, 1i64..1000)) {
        let p = Prime::new(pr).unwrap();
        let x = PadicScalar::from_ratio(p, n, d);
        let back = padic::parse_scalar(p, &x.to_string()).unwrap();
        prop_assert!(x.eq_to_precision(&back));
    }

    #[test]
    fn report_json_round_trip((pr, seed) in (primes(), 0u64..64)) {
        use padic_williamson::rng::SplitMix64;
        use padic_williamson::symplin::random_symmetric;
        use padic_williamson::classify::classify4;
        use padic_williamson::json::{normal_form_from_json, normal_form_to_json};
        let p = Prime::new(pr).unwrap();
        let mut rng = SplitMix64::new(seed.wrapping_mul(0x9e37_79b9) + pr);
        let m = random_symmetric(p, 4, &mut rng);
        let nf = classify4(&m).unwrap();
        let back = normal_form_from_json(p, &normal_form_to_json(&nf)).unwrap();
        prop_assert!(nf.same_as(&back));
    }
}
