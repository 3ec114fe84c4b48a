//! Completions `K_v` at the finite places of `S`, finite-precision elements,
//! Hensel lifting, and the local solvability decision for quartics.
//!
//! Precision is counted in powers of the internal uniformizer: `ℓ` when the
//! place is unramified (at a split place `K_v ≅ Q_ℓ`), and `π` at the ramified
//! place over 2 in `Q(i)` and `Q(√-2)`.

mod residue;
mod solver;

pub use residue::{Fq, ResidueField};
pub use solver::{
    depth_bound, eval as eval_quartic, newton_parity_obstruction, quartic_discriminant, quartic_locally_solvable, solve_quartic,
    Chart, HenselCertificate, Quartic, SearchPolicy, Verdict,
};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::qfield::{FinitePlace, QInt, QuadField};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LocalError {
    #[error("odd ramified place {0} is not supported")]
    UnsupportedPlace(String),
    #[error("insufficient precision: need {needed} digits, have {have}")]
    InsufficientPrecision { needed: u32, have: u32 },
    #[error("division by an element that is zero to working precision")]
    DivisionByZero,
    #[error("quotient is not integral (v(x) = {vx} < v(y) = {vy})")]
    NotIntegral { vx: u32, vy: u32 },
    #[error("invalid Hensel certificate: v(f) = {fval:?}, v(f_w) = {dval:?}")]
    InvalidCertificate { fval: Option<u32>, dval: Option<u32> },
    #[error("Newton iteration did not reach precision {0}")]
    NoConvergence(u32),
}

/// An integral element of `K_v` known modulo `uniformizer^prec`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalElem {
    a: BigInt,
    b: BigInt,
    /// `None` when the element is zero to the known precision.
    pub val: Option<u32>,
    pub prec: u32,
}

impl LocalElem {
    pub fn is_zero(&self) -> bool {
        self.val.is_none()
    }

    /// Coordinates in the ω-basis (`b = 0` at split places, where the single
    /// coordinate is the image in `Z_ℓ`).
    pub fn coords(&self) -> (&BigInt, &BigInt) {
        (&self.a, &self.b)
    }
}

#[derive(Debug, Clone)]
pub struct LocalField {
    pub place: FinitePlace,
    pub ell: u64,
    pub e: u32,
    pub f: u32,
    /// Image of `ω` in `F_ℓ` at a split place, chosen so that `π ↦ 0`.
    omega_root: Option<u64>,
}

impl LocalField {
    pub fn new(place: &FinitePlace) -> Result<Self, LocalError> {
        if place.e() == 2 && place.ell != 2 {
            return Err(LocalError::UnsupportedPlace(place.label.clone()));
        }
        let field = place.field();
        let omega_root = if place.split == "split" {
            let (c0, c1) = field.omega_minpoly();
            let l = place.ell as i64;
            let g = &place.generator;
            let ga = g.a.mod_floor(&BigInt::from(l));
            let gb = g.b.mod_floor(&BigInt::from(l));
            let r = (0..l)
                .find(|&x| {
                    (x * x + c1 * x + c0).rem_euclid(l) == 0
                        && ((&ga + &gb * x) % l).is_zero()
                })
                .expect("split place has a root of the minimal polynomial");
            Some(r as u64)
        } else {
            None
        };
        Ok(LocalField {
            ell: place.ell,
            e: place.e(),
            f: place.f(),
            place: place.clone(),
            omega_root,
        })
    }

    pub fn field(&self) -> QuadField {
        self.place.field()
    }

    /// `v(2)` in uniformizer units.
    pub fn v2(&self) -> u32 {
        if self.ell == 2 {
            self.e
        } else {
            0
        }
    }

    pub fn residue_field(&self) -> Option<ResidueField> {
        if self.ell == 2 {
            return None;
        }
        Some(match self.omega_root {
            Some(r) => ResidueField::prime(self.ell, r),
            None => {
                let f = self.field();
                ResidueField::quadratic(self.ell, f.omega_trace(), f.omega_norm())
            }
        })
    }

    /// Representatives of `O_K/π` in canonical order (`0, 1, ω, 1+ω` for `F_4`).
    pub fn residue_reps(&self) -> Vec<QInt> {
        let field = self.field();
        let l = self.ell;
        if self.f == 2 {
            (0..l * l)
                .map(|i| QInt::new(field, i % l, i / l))
                .collect()
        } else {
            (0..l).map(|i| QInt::from_int(field, i)).collect()
        }
    }

    fn storage_exp(&self, prec: u32) -> u32 {
        prec.div_ceil(self.e)
    }

    fn modulus(&self, exp: u32) -> BigInt {
        BigInt::from(self.ell).pow(exp)
    }

    /// Root of the minimal polynomial of `ω` modulo `ℓ^k`, lifting `omega_root`.
    fn omega_image(&self, k: u32) -> BigInt {
        let r0 = self.omega_root.expect("split place");
        let field = self.field();
        let tr = BigInt::from(field.omega_trace());
        let n = BigInt::from(field.omega_norm());
        let m = self.modulus(k.max(1));
        let mut r = BigInt::from(r0);
        let mut known = 1;
        while known < k {
            known = (2 * known).min(k);
            let mk = self.modulus(known);
            let g = (&r * &r - &tr * &r + &n).mod_floor(&mk);
            let dg = (&r * BigInt::from(2) - &tr).mod_floor(&mk);
            let inv = modinv(&dg, &mk).expect("simple root");
            r = (&r - g * inv).mod_floor(&mk);
        }
        r.mod_floor(&m)
    }

    fn make(&self, a: BigInt, b: BigInt, prec: u32) -> LocalElem {
        let m = self.modulus(self.storage_exp(prec));
        let a = a.mod_floor(&m);
        let b = b.mod_floor(&m);
        let val = self.coord_valuation(&a, &b, prec);
        LocalElem { a, b, val, prec }
    }

    fn coord_valuation(&self, a: &BigInt, b: &BigInt, prec: u32) -> Option<u32> {
        let k = self.storage_exp(prec);
        let vl = |x: &BigInt| -> u32 {
            if x.is_zero() {
                return k;
            }
            let l = BigInt::from(self.ell);
            let mut y = x.clone();
            let mut v = 0;
            while (&y % &l).is_zero() && v < k {
                y /= &l;
                v += 1;
            }
            v
        };
        let v = if self.e == 1 {
            vl(a).min(vl(b))
        } else {
            let j = vl(a).min(vl(b));
            if j >= k {
                return None;
            }
            let two_j = BigInt::from(2).pow(j);
            let a1 = a / &two_j;
            let b1 = b / &two_j;
            let n = QInt::new(self.field(), a1, b1).norm();
            2 * j + u32::from(n.is_even())
        };
        (v < prec).then_some(v)
    }

    pub fn embed(&self, x: &QInt, prec: u32) -> LocalElem {
        match self.omega_root {
            Some(_) => {
                let k = self.storage_exp(prec);
                let r = self.omega_image(k);
                self.make(&x.a + &x.b * r, BigInt::zero(), prec)
            }
            None => self.make(x.a.clone(), x.b.clone(), prec),
        }
    }

    pub fn from_int(&self, n: i64, prec: u32) -> LocalElem {
        self.make(BigInt::from(n), BigInt::zero(), prec)
    }

    pub fn zero(&self, prec: u32) -> LocalElem {
        self.from_int(0, prec)
    }

    pub fn add(&self, x: &LocalElem, y: &LocalElem) -> LocalElem {
        self.make(&x.a + &y.a, &x.b + &y.b, x.prec.min(y.prec))
    }

    pub fn sub(&self, x: &LocalElem, y: &LocalElem) -> LocalElem {
        self.make(&x.a - &y.a, &x.b - &y.b, x.prec.min(y.prec))
    }

    pub fn neg(&self, x: &LocalElem) -> LocalElem {
        self.make(-&x.a, -&x.b, x.prec)
    }

    fn raw_mul(&self, x: (&BigInt, &BigInt), y: (&BigInt, &BigInt)) -> (BigInt, BigInt) {
        if self.omega_root.is_some() {
            (x.0 * y.0, BigInt::zero())
        } else {
            let field = self.field();
            let p = &QInt::new(field, x.0.clone(), x.1.clone())
                * &QInt::new(field, y.0.clone(), y.1.clone());
            (p.a, p.b)
        }
    }

    pub fn mul(&self, x: &LocalElem, y: &LocalElem) -> LocalElem {
        let vx = x.val.unwrap_or(x.prec);
        let vy = y.val.unwrap_or(y.prec);
        let prec = (x.prec + vy).min(y.prec + vx).min(x.prec.max(y.prec));
        let (a, b) = self.raw_mul((&x.a, &x.b), (&y.a, &y.b));
        self.make(a, b, prec)
    }

    /// Exact division by `uniformizer^k`; requires `v(x) ≥ k`.
    fn shift_down(&self, x: &LocalElem, k: u32) -> LocalElem {
        if k == 0 {
            return x.clone();
        }
        debug_assert!(x.val.is_none_or(|v| v >= k));
        if self.e == 1 {
            let lk = self.modulus(k);
            return self.make(&x.a / &lk, &x.b / &lk, x.prec - k);
        }
        // Ramified over 2: π² = 2·u0 with u0 a unit.
        let field = self.field();
        let pi = &self.place.generator;
        let u0 = (pi * pi).div_exact(&QInt::from_int(field, 2)).expect("π² / 2");
        let u0inv = u0.conj().div_exact(&QInt::from_int(field, u0.norm())).expect("unit");
        let j = k / 2;
        let mut a = x.a.clone();
        let mut b = x.b.clone();
        let mut prec = x.prec;
        if j > 0 {
            let tj = BigInt::from(2).pow(j);
            let y = &QInt::new(field, &a / &tj, &b / &tj) * &u0inv.pow(j);
            a = y.a;
            b = y.b;
            prec -= 2 * j;
        }
        if k % 2 == 1 {
            let y = &QInt::new(field, a, b) * &pi.conj();
            a = y.a / 2;
            b = y.b / 2;
            let stored = self.storage_exp(prec) - 1;
            prec = (prec - 1).min(2 * stored);
        }
        self.make(a, b, prec)
    }

    /// Inverse of a unit, to the precision of the argument.
    pub fn unit_inverse(&self, x: &LocalElem) -> Result<LocalElem, LocalError> {
        match x.val {
            Some(0) => {}
            None => return Err(LocalError::DivisionByZero),
            Some(v) => return Err(LocalError::NotIntegral { vx: 0, vy: v }),
        }
        let m = self.modulus(self.storage_exp(x.prec));
        if self.omega_root.is_some() {
            let inv = modinv(&x.a, &m).expect("unit");
            return Ok(self.make(inv, BigInt::zero(), x.prec));
        }
        let q = QInt::new(self.field(), x.a.clone(), x.b.clone());
        let n = q.norm().mod_floor(&m);
        let ninv = modinv(&n, &m).expect("norm of a unit is a unit");
        let c = q.conj();
        Ok(self.make(c.a * &ninv, c.b * ninv, x.prec))
    }

    /// `x / y`, losing `v(y)` digits of precision.
    pub fn div(&self, x: &LocalElem, y: &LocalElem) -> Result<LocalElem, LocalError> {
        let vy = y.val.ok_or(LocalError::DivisionByZero)?;
        let prec = x.prec.min(y.prec);
        if prec <= vy {
            return Err(LocalError::InsufficientPrecision {
                needed: vy + 1,
                have: prec,
            });
        }
        if let Some(vx) = x.val {
            if vx < vy {
                return Err(LocalError::NotIntegral { vx, vy });
            }
        }
        let xs = self.shift_down(x, vy);
        let u = self.shift_down(y, vy);
        let uinv = self.unit_inverse(&u)?;
        let (a, b) = self.raw_mul((&xs.a, &xs.b), (&uinv.a, &uinv.b));
        Ok(self.make(a, b, prec - vy))
    }

    /// Whether `x` is a square in `K_v`. Needs `prec ≥ v(x) + 2·v(2) + 1`.
    pub fn is_square(&self, x: &LocalElem) -> Result<bool, LocalError> {
        let needed_extra = 2 * self.v2() + 1;
        let Some(v) = x.val else {
            return Err(LocalError::InsufficientPrecision {
                needed: x.prec + 1,
                have: x.prec,
            });
        };
        if x.prec < v + needed_extra {
            return Err(LocalError::InsufficientPrecision {
                needed: v + needed_extra,
                have: x.prec,
            });
        }
        if v % 2 == 1 {
            return Ok(false);
        }
        let u = self.shift_down(x, v);
        if self.ell != 2 {
            let rf = self.residue_field().expect("odd place");
            let q = QInt::new(self.field(), u.a.clone(), u.b.clone());
            let res = if self.omega_root.is_some() {
                rf.from_u64(
                    u.a.mod_floor(&BigInt::from(self.ell))
                        .to_u64()
                        .expect("residue fits in u64"),
                )
            } else {
                rf.reduce(&q)
            };
            return Ok(rf.is_square(res));
        }
        let target = 2 * self.e + 1;
        for r in self.unit_reps_mod(self.e + 1) {
            let r2 = self.embed(&(&r * &r), u.prec);
            let diff = self.sub(&u, &r2);
            if diff.val.is_none_or(|dv| dv >= target) {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Unit representatives of `O_K/π^k`, as elements of `O_K`.
    pub fn unit_reps_mod(&self, k: u32) -> Vec<QInt> {
        let reps = self.residue_reps();
        let pi = &self.place.generator;
        let mut out = vec![self.field().zero()];
        let mut pik = self.field().one();
        for _ in 0..k {
            let mut next = Vec::with_capacity(out.len() * reps.len());
            for x in &out {
                for t in &reps {
                    next.push(x + &(&pik * t));
                }
            }
            out = next;
            pik = &pik * pi;
        }
        out.into_iter()
            .filter(|x| self.place.valuation(x) == Some(0))
            .collect()
    }

    /// Newton iteration on `w` for `f(z, w) = w² − F(z)` starting from a
    /// valid certificate; returns `(z, w)` with `v(f(z, w)) ≥ target`.
    pub fn hensel_lift(
        &self,
        cert: &HenselCertificate,
        target: u32,
    ) -> Result<(LocalElem, LocalElem), LocalError> {
        let (fval, dval) = cert.recompute();
        if !HenselCertificate::criterion(fval, dval) {
            return Err(LocalError::InvalidCertificate { fval, dval });
        }
        let Some(dv) = dval else {
            // w = 0 and f = 0: an exact root.
            return Ok((self.embed(&cert.z, target), self.embed(&cert.w, target)));
        };
        if fval.is_none() {
            return Ok((self.embed(&cert.z, target), self.embed(&cert.w, target)));
        }
        let work = target + 2 * dv + 4;
        let fz = self.embed(&cert.eval_poly(), work);
        let two = self.from_int(2, work);
        let mut w = self.embed(&cert.w, work);
        for _ in 0..64 {
            let f = self.sub(&self.mul(&w, &w), &fz);
            if f.val.is_none_or(|v| v >= target) {
                let wt = self.make(w.a, w.b, w.prec.min(target.max(1)));
                return Ok((self.embed(&cert.z, target), wt));
            }
            let step = self.div(&f, &self.mul(&two, &w))?;
            w = self.sub(&w, &step);
        }
        Err(LocalError::NoConvergence(target))
    }
}

/// Modular inverse via the extended Euclidean algorithm.
pub(crate) fn modinv(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else if (-&e.gcd).is_one() {
        Some((-e.x).mod_floor(m))
    } else if m.abs().is_one() {
        Some(BigInt::zero())
    } else {
        None
    }
}
