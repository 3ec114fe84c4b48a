//! Membership statements for individual classes, checked on the smallest
//! qualifying twin pairs.

use isodescent::descent::{ks2, selmer_group, CurveSpec, Direction, Ks2};
use isodescent::localfield::SearchPolicy;
use isodescent::qfield::QuadField;
use isodescent::verify::twin_primes;

pub struct Clause {
    pub name: &'static str,
    pub d: i64,
    pub eps: i64,
    pub dir: Direction,
    pub expr: &'static str,
    pub applies: fn(u64) -> bool,
    pub expect: fn(u64, &Ks2) -> bool,
}

fn case_a(p: u64) -> bool {
    [3, 17, 31, 45].contains(&(p % 56))
}

fn im_mu_p(ks: &Ks2) -> i64 {
    let g = ks.generators.iter().find(|g| g.label == "mu_p").expect("p splits");
    i64::try_from(&g.rep.b).unwrap()
}

pub fn clauses() -> Vec<Clause> {
    use Direction::{Phi, PhiHat};
    vec![
        Clause {
            name: "A, eps=+1: -p in S(phihat)",
            d: -7,
            eps: 1,
            dir: PhiHat,
            expr: "-p",
            applies: case_a,
            expect: |_, _| true,
        },
        Clause {
            name: "A, eps=+1: -q in S(phihat)",
            d: -7,
            eps: 1,
            dir: PhiHat,
            expr: "-q",
            applies: case_a,
            expect: |_, _| true,
        },
        Clause {
            name: "A, eps=+1: -1 in S(phihat) iff p ≡ 3, 17, 31 (mod 56)",
            d: -7,
            eps: 1,
            dir: PhiHat,
            expr: "-1",
            applies: case_a,
            expect: |p, _| [3, 17, 31].contains(&(p % 56)),
        },
        Clause {
            name: "A, eps=+1: -2 in S(phi) iff p ≡ 45 (mod 56)",
            d: -7,
            eps: 1,
            dir: Phi,
            expr: "-2",
            applies: case_a,
            expect: |p, _| p % 56 == 45,
        },
        Clause {
            name: "A, eps=+1: pi2 in S(phi) iff p ≡ 31 (mod 56)",
            d: -7,
            eps: 1,
            dir: Phi,
            expr: "pi2",
            applies: case_a,
            expect: |p, _| p % 56 == 31,
        },
        Clause {
            name: "A, eps=-1: -1 in S(phihat) iff p ≡ 3, 31, 45 (mod 56)",
            d: -7,
            eps: -1,
            dir: PhiHat,
            expr: "-1",
            applies: case_a,
            expect: |p, _| [3, 31, 45].contains(&(p % 56)),
        },
        Clause {
            name: "A, eps=-1: -2 in S(phi) iff p ≡ 17 (mod 56)",
            d: -7,
            eps: -1,
            dir: Phi,
            expr: "-2",
            applies: case_a,
            expect: |p, _| p % 56 == 17,
        },
        Clause {
            name: "B, D=-11: -1 in S(phihat)",
            d: -11,
            eps: 1,
            dir: PhiHat,
            expr: "-1",
            applies: |p| {
                isodescent::qfield::kronecker(-11, p as i64) == -1
                    && isodescent::qfield::kronecker(-11, p as i64 + 2) == -1
            },
            expect: |_, _| true,
        },
        Clause {
            name: "C, eps=+1: -1 not in S(phi)",
            d: -2,
            eps: 1,
            dir: Phi,
            expr: "-1",
            applies: |p| p % 8 == 5,
            expect: |_, _| false,
        },
        Clause {
            name: "C, eps=-1: -1 in S(phi)",
            d: -2,
            eps: -1,
            dir: Phi,
            expr: "-1",
            applies: |p| p % 8 == 5,
            expect: |_, _| true,
        },
        Clause {
            name: "D, p ≡ 1 (mod 4), eps=+1: i in S(phi) iff p ≡ 1 (mod 8)",
            d: -1,
            eps: 1,
            dir: Phi,
            expr: "i",
            applies: |p| p % 4 == 1,
            expect: |p, _| p % 8 == 1,
        },
        Clause {
            name: "D, p ≡ 1 (mod 4), eps=-1: i in S(phi) iff p ≡ 1 (mod 8)",
            d: -1,
            eps: -1,
            dir: Phi,
            expr: "i",
            applies: |p| p % 4 == 1,
            expect: |p, _| p % 8 == 1,
        },
        Clause {
            name: "D, p ≡ 3 (mod 4), eps=+1: i in S(phi) iff p ≡ 7 (mod 8)",
            d: -1,
            eps: 1,
            dir: Phi,
            expr: "i",
            applies: |p| p % 4 == 3,
            expect: |p, _| p % 8 == 7,
        },
        Clause {
            name: "D, p ≡ 3 (mod 4), eps=-1: i in S(phi) iff p ≡ 7 (mod 8)",
            d: -1,
            eps: -1,
            dir: Phi,
            expr: "i",
            applies: |p| p % 4 == 3,
            expect: |p, _| p % 8 == 7,
        },
        Clause {
            name: "D, p ≡ 1 (mod 4), eps=+1: i not in S(phihat)",
            d: -1,
            eps: 1,
            dir: PhiHat,
            expr: "i",
            applies: |p| p % 4 == 1,
            expect: |_, _| false,
        },
        Clause {
            name: "D, p ≡ 1 (mod 4), eps=+1: mu in S(phihat) iff Im mu ≡ 0 (mod 4)",
            d: -1,
            eps: 1,
            dir: PhiHat,
            expr: "mu_p",
            applies: |p| p % 4 == 1,
            expect: |_, ks| im_mu_p(ks) % 4 == 0,
        },
        Clause {
            name: "D, p ≡ 1 (mod 4), eps=-1: mu in S(phihat) iff Im mu ≡ 0 (mod 4)",
            d: -1,
            eps: -1,
            dir: PhiHat,
            expr: "mu_p",
            applies: |p| p % 4 == 1,
            expect: |_, ks| im_mu_p(ks) % 4 == 0,
        },
        Clause {
            name: "E, eps=+1: mu in S(phihat) iff p ≡ 17, 23 (mod 24)",
            d: -3,
            eps: 1,
            dir: PhiHat,
            expr: "mu_q",
            applies: |p| p % 3 == 2,
            expect: |p, _| [17, 23].contains(&(p % 24)),
        },
        Clause {
            name: "E, eps=-1: mubar in S(phihat) iff p ≡ 17, 23 (mod 24)",
            d: -3,
            eps: -1,
            dir: PhiHat,
            expr: "mubar_q",
            applies: |p| p % 3 == 2,
            expect: |p, _| [17, 23].contains(&(p % 24)),
        },
        Clause {
            name: "E, eps=+1: 2 in S(phi) iff p ≡ 23 (mod 24)",
            d: -3,
            eps: 1,
            dir: Phi,
            expr: "2",
            applies: |p| p % 3 == 2,
            expect: |p, _| p % 24 == 23,
        },
        Clause {
            name: "E, eps=+1: -2 in S(phi) iff p ≡ 17 (mod 24)",
            d: -3,
            eps: 1,
            dir: Phi,
            expr: "-2",
            applies: |p| p % 3 == 2,
            expect: |p, _| p % 24 == 17,
        },
    ]
}

pub struct Outcome {
    pub p: u64,
    pub expected: bool,
    pub member: bool,
}

fn curve(c: &Clause, p: u64) -> CurveSpec {
    CurveSpec::new(QuadField::new(c.d).unwrap(), p, c.eps).unwrap()
}

fn expected(c: &Clause, p: u64) -> bool {
    let places = curve(c, p).place_set().unwrap();
    (c.expect)(p, &ks2(&places))
}

fn membership(c: &Clause, p: u64) -> Outcome {
    let group = selmer_group(&curve(c, p), c.dir, &SearchPolicy::default()).unwrap();
    let mask = group.ks2.parse(c.expr).unwrap();
    Outcome {
        p,
        expected: (c.expect)(p, &group.ks2),
        member: group.contains(mask),
    }
}

/// The smallest `n` qualifying pairs, plus the first pair taking the other
/// truth value when all `n` agree and such a pair exists below 1000.
pub fn check(c: &Clause, n: usize) -> Vec<Outcome> {
    let disc = QuadField::new(c.d).unwrap().disc();
    let pairs: Vec<u64> = twin_primes(1000)
        .into_iter()
        .filter(|&p| disc % p as i64 != 0 && disc % (p + 2) as i64 != 0 && (c.applies)(p))
        .collect();
    let mut chosen: Vec<u64> = pairs.iter().take(n).copied().collect();
    let first = expected(c, chosen[0]);
    if chosen.iter().all(|&p| expected(c, p) == first) {
        if let Some(&p) = pairs.iter().skip(n).find(|&&p| expected(c, p) != first) {
            chosen.push(p);
        }
    }
    chosen.into_iter().map(|p| membership(c, p)).collect()
}
