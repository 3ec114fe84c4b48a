mod common;

use common::oracle::{self, OracleVerdict};
use isodescent::localfield::{quartic_locally_solvable, Quartic, SearchPolicy, Verdict};
use isodescent::qfield::{build_place_set, QInt, QuadField};

fn place(d: i64, label: &str) -> isodescent::qfield::FinitePlace {
    let k = QuadField::new(d).unwrap();
    // p = 3, q = 5 puts places over 2, 3 and 5 in the set; use 5, 7 otherwise
    let (p, q) = if k.disc() % 3 == 0 || k.disc() % 5 == 0 { (5, 7) } else { (3, 5) };
    build_place_set(k, p, q).unwrap().find(label).unwrap().clone()
}

fn ints(k: QuadField, c: [i64; 5]) -> [QInt; 5] {
    c.map(|x| QInt::from_int(k, x))
}

#[test]
fn oracle_on_classical_cases() {
    // K at pi2 is Q_2: z = 0 gives 17 ≡ 1 (mod 8), while 3 + 3z⁴ is never a square
    let pl = place(-7, "pi2");
    let k = pl.field();
    assert_eq!(
        oracle::solvable(&pl, &ints(k, [17, 0, 0, 0, 17]), 30, 1 << 20),
        OracleVerdict::Solvable
    );
    assert_eq!(
        oracle::solvable(&pl, &ints(k, [3, 0, 0, 0, 3]), 30, 1 << 20),
        OracleVerdict::Insolvable
    );
    // unramified quadratic extension of Q_2
    let pl = place(-3, "2");
    let k = pl.field();
    let v = oracle::solvable(&pl, &ints(k, [2, 0, 0, 0, 2]), 30, 1 << 20);
    let f = Quartic {
        d: QInt::from_int(k, 1),
        c: ints(k, [2, 0, 0, 0, 2]),
    };
    let lib = quartic_locally_solvable(&f, &pl, &SearchPolicy::default());
    assert_eq!(v == OracleVerdict::Solvable, lib.is_solvable());
}

#[test]
fn oracle_agrees_with_solver_on_fixed_quartics() {
    let cases: &[(i64, &str, [i64; 5])] = &[
        (-1, "pi2", [1, 0, 0, 0, -1]),
        (-1, "pi2", [3, 0, 1, 0, 3]),
        (-2, "pi2", [5, 0, -2, 0, 5]),
        (-7, "p", [3, 0, 0, 0, 3]),
        (-7, "q", [5, 0, 1, 0, 5]),
        (-11, "2", [6, 1, 0, 3, 2]),
        (-3, "mu_q", [14, 0, 3, 0, 7]),
    ];
    for (d, label, c) in cases {
        let pl = place(*d, label);
        let k = pl.field();
        let o = oracle::solvable(&pl, &ints(k, *c), 30, 1 << 20);
        let lib = quartic_locally_solvable(
            &Quartic {
                d: QInt::from_int(k, 1),
                c: ints(k, *c),
            },
            &pl,
            &SearchPolicy::default(),
        );
        match o {
            OracleVerdict::Solvable => assert!(lib.is_solvable(), "{d} {label} {c:?}"),
            OracleVerdict::Insolvable => assert!(
                matches!(lib, Verdict::Insolvable { .. }),
                "{d} {label} {c:?}: {lib:?}"
            ),
            OracleVerdict::Open => {}
        }
    }
}
