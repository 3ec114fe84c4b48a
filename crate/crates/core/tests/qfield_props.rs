use isodescent::qfield::{build_place_set, kronecker, QInt, QuadField};
use num_bigint::BigInt;
use proptest::prelude::*;

const DS: [i64; 9] = [-1, -2, -3, -7, -11, -19, -43, -67, -163];

fn field(i: usize) -> QuadField {
    QuadField::new(DS[i]).unwrap()
}

fn elem() -> impl Strategy<Value = (i64, i64)> {
    (-1_000_000i64..1_000_000, -1_000_000i64..1_000_000)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn norm_is_multiplicative(i in 0usize..9, x in elem(), y in elem()) {
        let k = field(i);
        let a = QInt::new(k, x.0, x.1);
        let b = QInt::new(k, y.0, y.1);
        prop_assert_eq!((&a * &b).norm(), a.norm() * b.norm());
    }

    #[test]
    fn conjugation_is_an_involutive_ring_map(i in 0usize..9, x in elem(), y in elem()) {
        let k = field(i);
        let a = QInt::new(k, x.0, x.1);
        let b = QInt::new(k, y.0, y.1);
        prop_assert_eq!(a.conj().conj(), a.clone());
        prop_assert_eq!((&a * &b).conj(), &a.conj() * &b.conj());
        prop_assert_eq!((&a + &b).conj(), &a.conj() + &b.conj());
        prop_assert_eq!(&a * &a.conj(), QInt::from_int(k, a.norm()));
    }
}

proptest! {
    #[test]
    fn exact_division_and_square_roots(i in 0usize..9, x in elem(), y in elem()) {
        let k = field(i);
        let a = QInt::new(k, x.0 / 1000, x.1 / 1000);
        let b = QInt::new(k, y.0 / 1000, y.1 / 1000);
        prop_assume!(!b.is_zero());
        let ab = &a * &b;
        prop_assert_eq!(ab.div_exact(&b), Some(a.clone()));
        let sq = (&a * &a).sqrt_exact().unwrap();
        prop_assert!(sq == a || sq == -a.clone());
    }

    #[test]
    fn valuations_add_under_products(i in 0usize..9, x in elem(), y in elem()) {
        let k = field(i);
        let Ok(places) = build_place_set(k, 11, 13).or_else(|_| build_place_set(k, 17, 19)) else {
            return Ok(());
        };
        let a = QInt::new(k, x.0, x.1);
        let b = QInt::new(k, y.0, y.1);
        prop_assume!(!a.is_zero() && !b.is_zero());
        for pl in &places.finite {
            let va = pl.valuation(&a).unwrap();
            let vb = pl.valuation(&b).unwrap();
            prop_assert_eq!(pl.valuation(&(&a * &b)), Some(va + vb));
            if let Some(vs) = pl.valuation(&(&a + &b)) {
                prop_assert!(vs >= va.min(vb));
                if va != vb {
                    prop_assert_eq!(vs, va.min(vb));
                }
            }
        }
    }
}

#[test]
fn norms_of_place_generators_match_splitting() {
    for &d in &DS {
        let k = QuadField::new(d).unwrap();
        for (p, q) in [(11u64, 13u64), (17, 19), (29, 31)] {
            let Ok(ps) = build_place_set(k, p, q) else { continue };
            for pl in &ps.finite {
                let n = pl.generator.norm();
                let ell = BigInt::from(pl.ell);
                let expect = match pl.split {
                    "inert" => &ell * &ell,
                    _ => ell.clone(),
                };
                assert_eq!(n, expect, "{k} {}", pl.label);
                if pl.split == "split" {
                    assert_eq!(kronecker(k.disc(), pl.ell as i64), 1);
                }
            }
        }
    }
}
