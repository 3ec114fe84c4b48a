//! Residue fields `O_K/π ≅ F_Q` for the odd places of `S`, with `Q = ℓ` or `ℓ²`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::qfield::QInt;

/// Element `x + y·ω̄` of `F_Q`; `y = 0` when `Q = ℓ`.
pub type Fq = (u64, u64);

#[derive(Debug, Clone)]
pub struct ResidueField {
    pub ell: u64,
    pub f: u32,
    tr: u64,
    n: u64,
    /// Image of `ω` in `F_ℓ` at a split place.
    root: Option<u64>,
}

fn modu(x: &BigInt, m: u64) -> u64 {
    x.mod_floor(&BigInt::from(m)).to_u64().expect("reduced residue fits in u64")
}

impl ResidueField {
    pub fn prime(ell: u64, omega_root: u64) -> Self {
        ResidueField {
            ell,
            f: 1,
            tr: 0,
            n: 0,
            root: Some(omega_root % ell),
        }
    }

    /// `F_ℓ[ω]/(ω² − tr·ω + n)`, assumed irreducible.
    pub fn quadratic(ell: u64, tr: i64, n: i64) -> Self {
        let l = ell as i64;
        ResidueField {
            ell,
            f: 2,
            tr: tr.rem_euclid(l) as u64,
            n: n.rem_euclid(l) as u64,
            root: None,
        }
    }

    pub fn order(&self) -> u64 {
        self.ell.pow(self.f)
    }

    pub fn zero(&self) -> Fq {
        (0, 0)
    }

    pub fn one(&self) -> Fq {
        (1, 0)
    }

    pub fn from_u64(&self, x: u64) -> Fq {
        (x % self.ell, 0)
    }

    pub fn reduce(&self, x: &QInt) -> Fq {
        match self.root {
            Some(r) => {
                let a = modu(&x.a, self.ell);
                let b = modu(&x.b, self.ell);
                ((a + b * r) % self.ell, 0)
            }
            None => (modu(&x.a, self.ell), modu(&x.b, self.ell)),
        }
    }

    /// A representative in `O_K` of a residue class.
    pub fn lift(&self, t: Fq, field: crate::qfield::QuadField) -> QInt {
        QInt::new(field, t.0, t.1)
    }

    /// The `i`-th element in canonical order `0, 1, …, ℓ−1, ω, 1+ω, …`.
    pub fn element(&self, i: u64) -> Fq {
        if self.f == 1 {
            (i, 0)
        } else {
            (i % self.ell, i / self.ell)
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = Fq> + '_ {
        (0..self.order()).map(move |i| self.element(i))
    }

    pub fn add(&self, x: Fq, y: Fq) -> Fq {
        ((x.0 + y.0) % self.ell, (x.1 + y.1) % self.ell)
    }

    pub fn neg(&self, x: Fq) -> Fq {
        ((self.ell - x.0) % self.ell, (self.ell - x.1) % self.ell)
    }

    pub fn sub(&self, x: Fq, y: Fq) -> Fq {
        self.add(x, self.neg(y))
    }

    pub fn mul(&self, x: Fq, y: Fq) -> Fq {
        let l = self.ell;
        if self.f == 1 {
            return (x.0 * y.0 % l, 0);
        }
        let bd = x.1 * y.1 % l;
        let a = (x.0 * y.0 % l + (l - self.n) * bd % l) % l;
        let b = (x.0 * y.1 % l + x.1 * y.0 % l + self.tr * bd % l) % l;
        (a, b)
    }

    pub fn pow(&self, x: Fq, mut e: u64) -> Fq {
        let mut base = x;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn is_zero(&self, x: Fq) -> bool {
        x == (0, 0)
    }

    pub fn inv(&self, x: Fq) -> Fq {
        assert!(!self.is_zero(x), "inverse of zero in F_Q");
        self.pow(x, self.order() - 2)
    }

    /// Nonzero square test (Euler's criterion); `ℓ` must be odd.
    pub fn is_square(&self, x: Fq) -> bool {
        !self.is_zero(x) && self.pow(x, (self.order() - 1) / 2) == self.one()
    }

    fn nonresidue(&self) -> Fq {
        self.elements()
            .skip(1)
            .find(|&t| !self.is_square(t))
            .expect("odd-order field has a nonresidue")
    }

    /// Tonelli–Shanks square root; `None` for nonsquares.
    pub fn sqrt(&self, x: Fq) -> Option<Fq> {
        if self.is_zero(x) {
            return Some(x);
        }
        if !self.is_square(x) {
            return None;
        }
        let mut q = self.order() - 1;
        let mut s = 0u32;
        while q % 2 == 0 {
            q /= 2;
            s += 1;
        }
        let z = self.nonresidue();
        let mut m = s;
        let mut c = self.pow(z, q);
        let mut t = self.pow(x, q);
        let mut r = self.pow(x, q.div_ceil(2));
        while t != self.one() {
            let mut i = 0;
            let mut tt = t;
            while tt != self.one() {
                tt = self.mul(tt, tt);
                i += 1;
            }
            let mut b = c;
            for _ in 0..(m - i - 1) {
                b = self.mul(b, b);
            }
            m = i;
            c = self.mul(b, b);
            t = self.mul(t, c);
            r = self.mul(r, b);
        }
        Some(r)
    }

    /// Horner evaluation; `coeffs[j]` multiplies `t^j`.
    pub fn eval(&self, coeffs: &[Fq], t: Fq) -> Fq {
        coeffs
            .iter()
            .rev()
            .fold(self.zero(), |acc, &c| self.add(self.mul(acc, t), c))
    }

    /// Roots of `a t² + b t + c` with `a ≠ 0` (odd characteristic).
    pub fn quadratic_roots(&self, a: Fq, b: Fq, c: Fq) -> Vec<Fq> {
        let four = self.from_u64(4);
        let disc = self.sub(self.mul(b, b), self.mul(four, self.mul(a, c)));
        let Some(s) = self.sqrt(disc) else {
            return Vec::new();
        };
        let inv2a = self.inv(self.add(a, a));
        let r1 = self.mul(self.sub(s, b), inv2a);
        let r2 = self.mul(self.sub(self.neg(s), b), inv2a);
        if r1 == r2 {
            vec![r1]
        } else {
            let mut v = vec![r1, r2];
            v.sort();
            v
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f9_is_a_field() {
        // ω² + 1 = 0 has no root mod 3, so F_3[ω] = F_9.
        let k = ResidueField::quadratic(3, 0, 1);
        let mut squares = 0;
        for x in k.elements().skip(1) {
            assert_eq!(k.mul(x, k.inv(x)), k.one());
            if k.is_square(x) {
                squares += 1;
                let r = k.sqrt(x).unwrap();
                assert_eq!(k.mul(r, r), x);
            } else {
                assert!(k.sqrt(x).is_none());
            }
        }
        assert_eq!(squares, 4);
    }

    #[test]
    fn sqrt_in_prime_fields() {
        for ell in [3u64, 5, 7, 13, 17, 41, 97, 193] {
            let k = ResidueField::prime(ell, 0);
            for x in 1..ell {
                let expect = (1..ell).any(|y| y * y % ell == x);
                assert_eq!(k.is_square((x, 0)), expect);
                if let Some(r) = k.sqrt((x, 0)) {
                    assert_eq!(r.0 * r.0 % ell, x);
                }
            }
        }
    }

    #[test]
    fn quadratic_roots_match_enumeration() {
        // x² + 2 is irreducible mod 5, so this is F_25.
        let k = ResidueField::quadratic(5, 0, 2);
        for a in k.elements().skip(1).step_by(5) {
            for b in k.elements().step_by(7) {
                for c in k.elements().step_by(11) {
                    let mut brute: Vec<Fq> = k
                        .elements()
                        .filter(|&t| k.is_zero(k.eval(&[c, b, a], t)))
                        .collect();
                    brute.sort();
                    assert_eq!(k.quadratic_roots(a, b, c), brute);
                }
            }
        }
    }
}
