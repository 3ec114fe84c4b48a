//! Exact arithmetic in the nine imaginary quadratic fields of class number one.
//!
//! Elements of the ring of integers are stored in the integral basis `{1, ω}`
//! where `ω = √D` for `D ≡ 2, 3 (mod 4)` and `ω = (1 + √D)/2` for `D ≡ 1 (mod 4)`,
//! so no half-integers ever appear. Coordinates are arbitrary precision.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QfieldError {
    #[error("Q(sqrt({0})) is not one of the nine imaginary quadratic fields of class number one")]
    UnsupportedField(i64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not congruent to 1 mod 4, so it does not split in Z[i]")]
    NotSplitInGaussian(u64),
    #[error("prime {prime} divides the discriminant {disc}")]
    PrimeDividesDiscriminant { prime: u64, disc: i64 },
    #[error("p and q must be distinct odd primes (got {0}, {1})")]
    BadPrimePair(u64, u64),
}

/// Squarefree parts of the class number one imaginary quadratic fields.
pub const CLASS_NUMBER_ONE: [i64; 9] = [-1, -2, -3, -7, -11, -19, -43, -67, -163];

/// One of the nine fields `Q(√D)`, identified by its squarefree `D < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadField {
    d: i64,
}

impl QuadField {
    pub fn new(d: i64) -> Result<Self, QfieldError> {
        if CLASS_NUMBER_ONE.contains(&d) {
            Ok(QuadField { d })
        } else {
            Err(QfieldError::UnsupportedField(d))
        }
    }

    /// Accepts either the squarefree `D` or the fundamental discriminant
    /// (`-4` for `Q(i)`, `-8` for `Q(√-2)`).
    pub fn from_label(x: i64) -> Result<Self, QfieldError> {
        match x {
            -4 => QuadField::new(-1),
            -8 => QuadField::new(-2),
            _ => QuadField::new(x),
        }
    }

    pub fn all() -> impl Iterator<Item = QuadField> {
        CLASS_NUMBER_ONE.iter().map(|&d| QuadField { d })
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    pub fn class_number(&self) -> u32 {
        1
    }

    /// Whether `ω = (1 + √D)/2`.
    pub fn half_integral(&self) -> bool {
        self.d.rem_euclid(4) == 1
    }

    pub fn disc(&self) -> i64 {
        if self.half_integral() {
            self.d
        } else {
            4 * self.d
        }
    }

    /// Trace of `ω`.
    pub fn omega_trace(&self) -> i64 {
        if self.half_integral() {
            1
        } else {
            0
        }
    }

    /// Norm of `ω`, so that `ω² = tr·ω − n`.
    pub fn omega_norm(&self) -> i64 {
        if self.half_integral() {
            (1 - self.d) / 4
        } else {
            -self.d
        }
    }

    /// Coefficients `(c0, c1)` of the monic minimal polynomial `x² + c1 x + c0` of `ω`.
    pub fn omega_minpoly(&self) -> (i64, i64) {
        (self.omega_norm(), -self.omega_trace())
    }

    pub fn zero(&self) -> QInt {
        QInt::from_int(*self, 0)
    }

    pub fn one(&self) -> QInt {
        QInt::from_int(*self, 1)
    }

    pub fn omega(&self) -> QInt {
        QInt::new(*self, 0, 1)
    }

    /// `√D` in the ω-basis.
    pub fn sqrt_d(&self) -> QInt {
        if self.half_integral() {
            QInt::new(*self, -1, 2)
        } else {
            self.omega()
        }
    }

    pub fn units(&self) -> Vec<QInt> {
        match self.d {
            -1 => vec![
                self.one(),
                self.omega(),
                -self.one(),
                -self.omega(),
            ],
            -3 => {
                // ω = (1 + √-3)/2 is a primitive sixth root of unity.
                let mut out = Vec::with_capacity(6);
                let mut u = self.one();
                for _ in 0..6 {
                    out.push(u.clone());
                    u = &u * &self.omega();
                }
                out
            }
            _ => vec![self.one(), -self.one()],
        }
    }

    /// Generator of the unit group modulo squares.
    pub fn unit_square_class_generator(&self) -> QInt {
        if self.d == -1 {
            self.omega()
        } else {
            -self.one()
        }
    }

    pub fn name(&self) -> String {
        format!("Q(sqrt({}))", self.d)
    }
}

impl fmt::Display for QuadField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q(√{})", self.d)
    }
}

/// An element `a + b·ω` of the ring of integers.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QInt {
    pub a: BigInt,
    pub b: BigInt,
    field: QuadField,
}

impl QInt {
    pub fn new(field: QuadField, a: impl Into<BigInt>, b: impl Into<BigInt>) -> Self {
        QInt {
            a: a.into(),
            b: b.into(),
            field,
        }
    }

    pub fn from_int(field: QuadField, a: impl Into<BigInt>) -> Self {
        QInt::new(field, a, 0)
    }

    pub fn field(&self) -> QuadField {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    /// Returns the rational integer this element equals, if it lies in `Z`.
    pub fn as_rational(&self) -> Option<&BigInt> {
        self.b.is_zero().then_some(&self.a)
    }

    pub fn conj(&self) -> QInt {
        let tr = self.field.omega_trace();
        QInt {
            a: &self.a + &self.b * tr,
            b: -&self.b,
            field: self.field,
        }
    }

    pub fn norm(&self) -> BigInt {
        let tr = self.field.omega_trace();
        let n = self.field.omega_norm();
        &self.a * &self.a + &self.a * &self.b * tr + &self.b * &self.b * n
    }

    pub fn trace(&self) -> BigInt {
        &self.a * 2 + &self.b * self.field.omega_trace()
    }

    pub fn scale(&self, k: &BigInt) -> QInt {
        QInt {
            a: &self.a * k,
            b: &self.b * k,
            field: self.field,
        }
    }

    pub fn pow(&self, mut e: u32) -> QInt {
        let mut base = self.clone();
        let mut acc = self.field.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Exact quotient `self / rhs` when it lies in the ring of integers.
    pub fn div_exact(&self, rhs: &QInt) -> Option<QInt> {
        if rhs.is_zero() {
            return None;
        }
        let n = rhs.norm();
        let num = self * &rhs.conj();
        let (qa, ra) = num.a.div_rem(&n);
        let (qb, rb) = num.b.div_rem(&n);
        (ra.is_zero() && rb.is_zero()).then(|| QInt::new(self.field, qa, qb))
    }

    pub fn divides(&self, x: &QInt) -> bool {
        x.div_exact(self).is_some()
    }

    pub fn is_unit(&self) -> bool {
        self.norm().is_one()
    }

    /// Exact square root in the ring of integers, if one exists.
    pub fn sqrt_exact(&self) -> Option<QInt> {
        if self.is_zero() {
            return Some(self.clone());
        }
        let n2 = self.norm();
        let n = n2.sqrt();
        if &n * &n != n2 {
            return None;
        }
        let d = BigInt::from(self.field.d);
        // Work in the √D basis: x = (X + Y√D)/h, s = (U + V√D)/h.
        let (big_x, h): (BigInt, i64) = if self.field.half_integral() {
            (&self.a * 2 + &self.b, 2)
        } else {
            (self.a.clone(), 1)
        };
        // U² + D V² = h X and U² − D V² = h² n.
        let hx = &big_x * h;
        let hn = &n * (h * h);
        let two_u2 = &hx + &hn;
        let two_dv2 = &hx - &hn;
        if two_u2.is_odd() || two_dv2.is_odd() {
            return None;
        }
        let u2: BigInt = two_u2 / 2;
        let dv2: BigInt = two_dv2 / 2;
        if u2.is_negative() || !(&dv2 % &d).is_zero() {
            return None;
        }
        let v2 = dv2 / &d;
        if v2.is_negative() {
            return None;
        }
        let u = u2.sqrt();
        let v = v2.sqrt();
        if &u * &u != u2 || &v * &v != v2 {
            return None;
        }
        for (su, sv) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
            let uu = &u * su;
            let vv = &v * sv;
            let cand = if self.field.half_integral() {
                // s = (U + V√D)/2 = (U − V)/2 + V ω
                let diff: BigInt = &uu - &vv;
                if diff.is_odd() {
                    continue;
                }
                QInt::new(self.field, diff / 2, vv)
            } else {
                QInt::new(self.field, uu, vv)
            };
            if &(&cand * &cand) == self {
                return Some(cand);
            }
        }
        None
    }

    /// Complex embedding with `√D ↦ i√|D|`.
    pub fn to_complex(&self) -> (f64, f64) {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        let s = (-(self.field.d as f64)).sqrt();
        if self.field.half_integral() {
            (a + b / 2.0, b * s / 2.0)
        } else {
            (a, b * s)
        }
    }

    /// Argument in `[0, 2π)`.
    pub fn argument(&self) -> f64 {
        let (re, im) = self.to_complex();
        let t = im.atan2(re);
        if t < 0.0 {
            t + std::f64::consts::TAU
        } else {
            t
        }
    }

    /// Coordinates `(x, y, h)` with `self = (x + y√D)/h`.
    pub fn sqrt_d_form(&self) -> (BigInt, BigInt, i64) {
        if self.field.half_integral() {
            let x: BigInt = &self.a * 2 + &self.b;
            let y = self.b.clone();
            if x.is_even() && y.is_even() {
                (x / 2, y / 2, 1)
            } else {
                (x, y, 2)
            }
        } else {
            (self.a.clone(), self.b.clone(), 1)
        }
    }
}

impl fmt::Debug for QInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for QInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (x, y, h) = self.sqrt_d_form();
        let root = if self.field.d == -1 {
            "i".to_string()
        } else {
            format!("√{}", self.field.d)
        };
        let body = if y.is_zero() {
            format!("{}", x)
        } else {
            let ypart = if y.is_one() {
                root.clone()
            } else if y == BigInt::from(-1) {
                format!("-{}", root)
            } else {
                format!("{}{}", y, root)
            };
            if x.is_zero() {
                ypart
            } else if y.is_negative() {
                format!("{} - {}", x, ypart.trim_start_matches('-'))
            } else {
                format!("{} + {}", x, ypart)
            }
        };
        if h == 1 {
            write!(f, "{}", body)
        } else {
            write!(f, "({})/{}", body, h)
        }
    }
}

impl<'a> Add<&'a QInt> for &'a QInt {
    type Output = QInt;
    fn add(self, rhs: &QInt) -> QInt {
        debug_assert_eq!(self.field, rhs.field);
        QInt::new(self.field, &self.a + &rhs.a, &self.b + &rhs.b)
    }
}

impl<'a> Sub<&'a QInt> for &'a QInt {
    type Output = QInt;
    fn sub(self, rhs: &QInt) -> QInt {
        debug_assert_eq!(self.field, rhs.field);
        QInt::new(self.field, &self.a - &rhs.a, &self.b - &rhs.b)
    }
}

impl<'a> Mul<&'a QInt> for &'a QInt {
    type Output = QInt;
    fn mul(self, rhs: &QInt) -> QInt {
        debug_assert_eq!(self.field, rhs.field);
        let tr = self.field.omega_trace();
        let n = self.field.omega_norm();
        let bd = &self.b * &rhs.b;
        let a = &self.a * &rhs.a - &bd * n;
        let b = &self.a * &rhs.b + &self.b * &rhs.a + &bd * tr;
        QInt::new(self.field, a, b)
    }
}

impl Add for QInt {
    type Output = QInt;
    fn add(self, rhs: QInt) -> QInt {
        &self + &rhs
    }
}

impl Sub for QInt {
    type Output = QInt;
    fn sub(self, rhs: QInt) -> QInt {
        &self - &rhs
    }
}

impl Mul for QInt {
    type Output = QInt;
    fn mul(self, rhs: QInt) -> QInt {
        &self * &rhs
    }
}

impl Neg for QInt {
    type Output = QInt;
    fn neg(self) -> QInt {
        QInt::new(self.field, -self.a, -self.b)
    }
}

impl Neg for &QInt {
    type Output = QInt;
    fn neg(self) -> QInt {
        QInt::new(self.field, -&self.a, -&self.b)
    }
}

/// Kronecker symbol `(a | n)`; `n` must be nonzero.
pub fn kronecker(a: i64, n: i64) -> i32 {
    assert!(n != 0, "kronecker symbol with zero modulus");
    let mut a = a as i128;
    let mut n = n as i128;
    let mut result = 1i32;
    if n < 0 {
        n = -n;
        if a < 0 {
            result = -result;
        }
    }
    let v = n.trailing_zeros();
    n >>= v;
    if v > 0 {
        if a % 2 == 0 {
            return 0;
        }
        if v % 2 == 1 && matches!(a.rem_euclid(8), 3 | 5) {
            result = -result;
        }
    }
    // n is now odd and positive: Jacobi symbol.
    a = a.rem_euclid(n);
    while a != 0 {
        let t = a.trailing_zeros();
        a >>= t;
        if t % 2 == 1 && matches!(n % 8, 3 | 5) {
            result = -result;
        }
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 {
        return false;
    }
    let mut k = 3u64;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 2;
    }
    true
}

/// Splitting behaviour of a rational prime, with the chosen generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SplitType {
    /// `ℓ = unit · π · π̄` with `π̄ = conj(π)`.
    Split(QInt, QInt),
    Inert,
    Ramified(QInt),
}

impl SplitType {
    pub fn tag(&self) -> &'static str {
        match self {
            SplitType::Split(..) => "split",
            SplitType::Inert => "inert",
            SplitType::Ramified(_) => "ramified",
        }
    }
}

/// All elements of norm `ell` up to nothing (every associate is returned).
fn elements_of_norm(field: QuadField, ell: u64) -> Vec<QInt> {
    // N(a + bω) = (a + tr b/2)² + (n − tr²/4) b², with n − tr²/4 = |D|/4 or |D|.
    let tr = field.omega_trace();
    let n = field.omega_norm();
    let target = ell as i128;
    let mut out = Vec::new();
    let bmax = ((4 * target) as f64 / (-field.d() as f64)).sqrt() as i128 + 1;
    for b in -bmax..=bmax {
        // a² + tr b a + n b² − ℓ = 0
        let disc = (tr as i128 * b).pow(2) - 4 * (n as i128 * b * b - target);
        if disc < 0 {
            continue;
        }
        let s = disc.sqrt();
        if s * s != disc {
            continue;
        }
        for sign in [1i128, -1] {
            let num = -(tr as i128) * b + sign * s;
            if num % 2 == 0 {
                let a = num / 2;
                let x = QInt::new(field, a, b);
                if !out.contains(&x) {
                    out.push(x);
                }
            }
        }
    }
    out
}

/// Canonical generator for a prime over a split rational prime.
fn canonical_split_generator(field: QuadField, ell: u64) -> QInt {
    let cands = elements_of_norm(field, ell);
    assert!(!cands.is_empty(), "split prime {ell} has no element of norm {ell}");
    if field.d() == -7 && ell == 2 {
        // π₂ = −(1 + √−7)/2 = −ω
        return -field.omega();
    }
    if field.d() == -1 {
        // a odd and positive, b even and positive
        if let Some(x) = cands
            .iter()
            .find(|x| x.a.is_odd() && x.a.is_positive() && x.b.is_even() && x.b.is_positive())
        {
            return x.clone();
        }
    }
    cands
        .into_iter()
        .min_by(|x, y| x.argument().partial_cmp(&y.argument()).unwrap())
        .unwrap()
}

/// Behaviour of the rational prime `ell` in `field`.
pub fn classify_prime(field: QuadField, ell: u64) -> Result<SplitType, QfieldError> {
    if !is_prime(ell) {
        return Err(QfieldError::NotPrime(ell));
    }
    let disc = field.disc();
    if disc % ell as i64 == 0 {
        let pi = if field.d() == -1 {
            QInt::new(field, 1, -1)
        } else {
            // |D| = ℓ for the remaining fields, and √D generates the prime above it.
            field.sqrt_d()
        };
        return Ok(SplitType::Ramified(pi));
    }
    match kronecker(disc, ell as i64) {
        1 => {
            let pi = canonical_split_generator(field, ell);
            let pibar = pi.conj();
            Ok(SplitType::Split(pi, pibar))
        }
        _ => Ok(SplitType::Inert),
    }
}

/// Writes a prime `q ≡ 1 (mod 4)` as `μ·μ̄` in `Z[i]` with `μ = a + bi`,
/// `a` odd and positive, `b` even and positive.
pub fn split_gaussian_prime(q: u64) -> Result<(QInt, QInt), QfieldError> {
    if !is_prime(q) {
        return Err(QfieldError::NotPrime(q));
    }
    if q % 4 != 1 {
        return Err(QfieldError::NotSplitInGaussian(q));
    }
    let field = QuadField::new(-1).expect("Q(i) is supported");
    match classify_prime(field, q)? {
        SplitType::Split(mu, mubar) => Ok((mu, mubar)),
        _ => Err(QfieldError::NotSplitInGaussian(q)),
    }
}

/// A finite place of `K`, given by a prime element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinitePlace {
    pub generator: QInt,
    pub ell: u64,
    pub split: &'static str,
    /// Label used in reports and class expressions.
    pub label: String,
}

impl FinitePlace {
    pub fn field(&self) -> QuadField {
        self.generator.field()
    }

    /// Ramification index over `ℓ`.
    pub fn e(&self) -> u32 {
        if self.split == "ramified" {
            2
        } else {
            1
        }
    }

    /// Residue degree over `ℓ`.
    pub fn f(&self) -> u32 {
        if self.split == "inert" {
            2
        } else {
            1
        }
    }

    /// Exact `π`-adic valuation of a nonzero element; `None` for zero.
    pub fn valuation(&self, x: &QInt) -> Option<u32> {
        if x.is_zero() {
            return None;
        }
        let mut v = 0;
        let mut y = x.clone();
        while let Some(z) = self.divide_once(&y) {
            y = z;
            v += 1;
        }
        Some(v)
    }

    /// `x / π` if `π | x`.
    pub fn divide_once(&self, x: &QInt) -> Option<QInt> {
        if self.split == "inert" {
            let l = BigInt::from(self.ell);
            if (&x.a % &l).is_zero() && (&x.b % &l).is_zero() {
                return Some(QInt::new(x.field(), &x.a / &l, &x.b / &l));
            }
            return None;
        }
        x.div_exact(&self.generator)
    }

    /// `x / π^k`, requiring `π^k | x`.
    pub fn divide_pow(&self, x: &QInt, k: u32) -> Option<QInt> {
        let mut y = x.clone();
        for _ in 0..k {
            y = self.divide_once(&y)?;
        }
        Some(y)
    }
}

/// The set `S` of places dividing `2pq` together with the archimedean place.
#[derive(Debug, Clone)]
pub struct PlaceSet {
    pub field: QuadField,
    pub p: u64,
    pub q: u64,
    pub finite: Vec<FinitePlace>,
}

impl PlaceSet {
    pub fn primes(&self) -> [u64; 3] {
        [2, self.p, self.q]
    }

    pub fn places_over(&self, ell: u64) -> impl Iterator<Item = &FinitePlace> {
        self.finite.iter().filter(move |pl| pl.ell == ell)
    }

    pub fn find(&self, label: &str) -> Option<&FinitePlace> {
        self.finite.iter().find(|pl| pl.label == label)
    }

    /// Number of places including `∞`.
    pub fn len(&self) -> usize {
        self.finite.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

fn places_for(field: QuadField, ell: u64, name: &str) -> Result<Vec<FinitePlace>, QfieldError> {
    let mk = |g: QInt, split: &'static str, label: String| FinitePlace {
        generator: g,
        ell,
        split,
        label,
    };
    Ok(match classify_prime(field, ell)? {
        SplitType::Inert => vec![mk(
            field.one().scale(&BigInt::from(ell)),
            "inert",
            name.to_string(),
        )],
        SplitType::Ramified(pi) => vec![mk(pi, "ramified", format!("pi_{name}"))],
        SplitType::Split(pi, pibar) => {
            let (l1, l2) = if ell == 2 {
                ("pi2".to_string(), "pibar2".to_string())
            } else {
                (format!("mu_{name}"), format!("mubar_{name}"))
            };
            vec![mk(pi, "split", l1), mk(pibar, "split", l2)]
        }
    })
}

/// Builds `S = {∞} ∪ {primes over 2, p, q}` for odd distinct primes `p`, `q`
/// coprime to the discriminant.
pub fn build_place_set(field: QuadField, p: u64, q: u64) -> Result<PlaceSet, QfieldError> {
    if p == q || p % 2 == 0 || q % 2 == 0 {
        return Err(QfieldError::BadPrimePair(p, q));
    }
    for ell in [p, q] {
        if !is_prime(ell) {
            return Err(QfieldError::NotPrime(ell));
        }
        if field.disc() % ell as i64 == 0 {
            return Err(QfieldError::PrimeDividesDiscriminant {
                prime: ell,
                disc: field.disc(),
            });
        }
    }
    let mut finite = places_for(field, 2, "2")?;
    if let [pl] = finite.as_mut_slice() {
        if pl.split == "ramified" {
            pl.label = "pi2".to_string();
        }
    }
    finite.extend(places_for(field, p, "p")?);
    finite.extend(places_for(field, q, "q")?);
    Ok(PlaceSet { field, p, q, finite })
}
