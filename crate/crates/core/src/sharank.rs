//! Two-torsion, the Selmer dimension identity, naive point search, and the
//! resulting rank/Sha statements.

use num_bigint::BigInt;
use num_integer::Roots;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::descent::{selmer_group, CurveSpec, DescentError, Direction, Ks2, SelmerGroup};
use crate::f2;
use crate::localfield::SearchPolicy;
use crate::qfield::{classify_prime, QInt, QuadField, SplitType};

pub const DEFAULT_HEIGHT: u64 = 10_000;

#[derive(Debug, Error)]
pub enum ShaRankError {
    #[error("dim S^(phi) + dim S^(phihat) = {0} < 2; the classes 1 and -eps*p must always be present")]
    IdentityUnderflow(usize),
    #[error(transparent)]
    Descent(#[from] DescentError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorsionReport {
    /// Affine 2-torsion points `(x, 0)`; the point at infinity is implicit.
    pub points: Vec<i64>,
    pub structure: &'static str,
}

impl TorsionReport {
    pub fn order(&self) -> usize {
        self.points.len() + 1
    }
}

pub fn two_torsion(curve: &CurveSpec) -> TorsionReport {
    let (a, b) = curve.e_coeffs();
    let e = curve.eps;
    let points = vec![0, -e * curve.p as i64, -e * curve.q as i64];
    for &x in &points {
        assert_eq!(x * (x * x + a * x + b), 0, "({x}, 0) is not on E");
    }
    TorsionReport {
        points,
        structure: "Z/2 x Z/2",
    }
}

/// `rank + dim TS(E)[φ] + dim TS(E′)[φ̂] = dim S^(φ) + dim S^(φ̂) − 2`.
pub fn dimension_identity(dim_phi: usize, dim_phihat: usize) -> Result<usize, ShaRankError> {
    let s = dim_phi + dim_phihat;
    if s < 2 {
        return Err(ShaRankError::IdentityUnderflow(s));
    }
    Ok(s - 2)
}

/// Which combination of rank and Sha dimensions the identity pins down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "shape", content = "value", rename_all = "snake_case")]
pub enum ShaClause {
    /// `rank + dim TS(E′)[2] = c` (the φ-Selmer group is trivial).
    RankShaPrime2(usize),
    /// `rank + dim TS(E)[2] = c` (the φ̂-Selmer group is spanned by torsion).
    RankSha2(usize),
    /// `rank + dim TS(E)[φ] + dim TS(E′)[φ̂] = c`.
    ThreeTerm(usize),
    /// `TS(E)[2] = TS(E′)[2] = 0` and `E(K) ≅ Z/2 × Z/2`.
    FullDetermination,
}

impl ShaClause {
    pub fn value(&self) -> usize {
        match self {
            ShaClause::RankShaPrime2(c) | ShaClause::RankSha2(c) | ShaClause::ThreeTerm(c) => *c,
            ShaClause::FullDetermination => 0,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ShaClause::RankShaPrime2(c) => format!("rank + dim TS(E'/K)[2] = {c}"),
            ShaClause::RankSha2(c) => format!("rank + dim TS(E/K)[2] = {c}"),
            ShaClause::ThreeTerm(c) => {
                format!("rank + dim TS(E/K)[phi] + dim TS(E'/K)[phihat] = {c}")
            }
            ShaClause::FullDetermination => {
                "TS(E/K)[2] = TS(E'/K)[2] = 0, E(K) = Z/2 x Z/2".to_string()
            }
        }
    }
}

/// When `S^(φ) = 0`, `TS(E)[φ] = 0` and `TS(E′)[φ̂] ≅ TS(E′)[2]`; dually when
/// `S^(φ̂)` is exactly the torsion image.
pub fn sha_two_part_reduction(dim_phi: usize, dim_phihat: usize) -> Result<ShaClause, ShaRankError> {
    let c = dimension_identity(dim_phi, dim_phihat)?;
    Ok(match (dim_phi, dim_phihat) {
        (0, 2) => ShaClause::FullDetermination,
        (0, _) => ShaClause::RankShaPrime2(c),
        (_, 2) => ShaClause::RankSha2(c),
        _ => ShaClause::ThreeTerm(c),
    })
}

/// A point `(m/e², y/e³)` on `y² = x³ + a x² + b x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalPoint {
    pub m: QInt,
    pub e: QInt,
    pub y: QInt,
    /// `max(N(m), N(e)²)`.
    pub height: BigInt,
}

impl RationalPoint {
    /// Checks `y² = m³ + a m² e² + b m e⁴` exactly.
    pub fn on_curve(&self, a: i64, b: i64) -> bool {
        let k = self.m.field();
        let m = &self.m;
        let e2 = &self.e * &self.e;
        let quad = &(&(m * m) + &(&(m * &e2) * &QInt::from_int(k, a)))
            + &(&(&e2 * &e2) * &QInt::from_int(k, b));
        &self.y * &self.y == m * &quad
    }

    pub fn is_two_torsion(&self) -> bool {
        self.y.is_zero()
    }
}

/// Elements `a + bω` with `N ≤ bound`, as coordinate pairs.
fn elements_up_to(field: QuadField, bound: u64) -> Vec<(i64, i64)> {
    let tr = field.omega_trace();
    let n = field.omega_norm();
    let bound = bound as i64;
    // N = (a + tr·b/2)² + (n − tr²/4)b², and n − tr²/4 = |D|/4 or |D|
    let bmax = ((4 * bound) as f64 / (-field.d()) as f64).sqrt() as i64 + 1;
    let mut out = Vec::new();
    for b in -bmax..=bmax {
        let amax = (bound as f64).sqrt() as i64 + bmax + 1;
        for a in -amax..=amax {
            let nn = a * a + tr * a * b + n * b * b;
            if nn <= bound {
                out.push((a, b));
            }
        }
    }
    out
}

/// One representative of each associate class among nonzero elements.
fn up_to_units(field: QuadField, elems: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let units = field.units();
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for &(a, b) in elems {
        if a == 0 && b == 0 {
            continue;
        }
        let x = QInt::new(field, a, b);
        let key = units
            .iter()
            .map(|u| {
                let y = &x * u;
                (y.a.clone(), y.b.clone())
            })
            .min()
            .expect("units");
        if seen.insert(key) {
            out.push((a, b));
        }
    }
    out
}

#[derive(Clone, Copy)]
struct Small {
    tr: i128,
    n: i128,
}

impl Small {
    fn mul(&self, x: (i128, i128), y: (i128, i128)) -> (i128, i128) {
        let bd = x.1 * y.1;
        (x.0 * y.0 - self.n * bd, x.0 * y.1 + x.1 * y.0 + self.tr * bd)
    }

    fn norm(&self, x: (i128, i128)) -> i128 {
        x.0 * x.0 + self.tr * x.0 * x.1 + self.n * x.1 * x.1
    }
}

/// Rational primes dividing `n > 0`.
fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Numerators `m` with `N(m) ≤ H` that can occur in lowest terms. If
/// `gcd(m, e) = 1` then `gcd(m, y²/m)` divides `b`, so `m = u·δ·s²` with `u` a
/// unit and `δ` a squarefree product of primes dividing `b`.
fn numerators(field: QuadField, b: i64, height: u64) -> Vec<(i64, i64)> {
    assert!(b != 0, "singular curve");
    let mut primes: Vec<QInt> = Vec::new();
    for ell in prime_factors(b.unsigned_abs()) {
        match classify_prime(field, ell).expect("prime") {
            SplitType::Inert => primes.push(QInt::from_int(field, ell)),
            SplitType::Ramified(pi) => primes.push(pi),
            SplitType::Split(pi, pibar) => primes.extend([pi, pibar]),
        }
    }
    let mut deltas = vec![field.one(), field.unit_square_class_generator()];
    for pi in &primes {
        let more: Vec<QInt> = deltas.iter().map(|d| d * pi).collect();
        deltas.extend(more);
    }
    let mut out = std::collections::BTreeSet::new();
    for d in &deltas {
        let nd = d.norm().to_u64().expect("small");
        if nd > height {
            continue;
        }
        for (sa, sb) in elements_up_to(field, (height / nd).sqrt()) {
            let s = QInt::new(field, sa, sb);
            let m = &(&s * &s) * d;
            if !m.is_zero() {
                out.insert((m.a.to_i64().expect("small"), m.b.to_i64().expect("small")));
            }
        }
    }
    out.into_iter().collect()
}

/// All points `x = m/e²` in lowest terms with `N(m) ≤ H`, `N(e)² ≤ H` on
/// `y² = x³ + a x² + b x`, excluding `x = 0`. Non-reduced representations of
/// the same points may also appear.
pub fn search_points(field: QuadField, a: i64, b: i64, height: u64) -> Vec<RationalPoint> {
    let small = Small {
        tr: field.omega_trace() as i128,
        n: field.omega_norm() as i128,
    };
    let ms = numerators(field, b, height);
    let es = up_to_units(field, &elements_up_to(field, height.sqrt()));
    let mut pts: Vec<RationalPoint> = es
        .par_iter()
        .flat_map_iter(|&(ea, eb)| {
            let e = (ea as i128, eb as i128);
            let e2 = small.mul(e, e);
            let e4 = small.mul(e2, e2);
            let ne = small.norm(e);
            ms.iter().filter_map(move |&(ma, mb)| {
                if ma == 0 && mb == 0 {
                    return None;
                }
                let m = (ma as i128, mb as i128);
                let m2 = small.mul(m, m);
                let t1 = small.mul(m2, m);
                let t2 = small.mul(small.mul(m2, e2), (a as i128, 0));
                let t3 = small.mul(small.mul(m, e4), (b as i128, 0));
                let rhs = (t1.0 + t2.0 + t3.0, t1.1 + t2.1 + t3.1);
                let nr = small.norm(rhs);
                let s = nr.sqrt();
                if s * s != nr {
                    return None;
                }
                let r = QInt::new(field, rhs.0, rhs.1);
                let y = r.sqrt_exact()?;
                let nm = small.norm(m);
                Some(RationalPoint {
                    m: QInt::new(field, ma, mb),
                    e: QInt::new(field, ea, eb),
                    y,
                    height: BigInt::from(nm.max(ne * ne)),
                })
            })
        })
        .collect();
    pts.sort_by(|x, y| {
        (&x.height, &x.m.a, &x.m.b, &x.e.a, &x.e.b).cmp(&(&y.height, &y.m.a, &y.m.b, &y.e.a, &y.e.b))
    });
    pts
}

#[derive(Debug, Clone)]
pub struct PointSearch {
    pub height: u64,
    pub points_e: Vec<RationalPoint>,
    pub points_e_prime: Vec<RationalPoint>,
    /// Images in `S^(φ̂)(E′/K)` of the points of `E` (torsion included).
    pub image_phihat: Vec<u64>,
    /// Images in `S^(φ)(E/K)` of the points of `E′` (torsion included).
    pub image_phi: Vec<u64>,
    pub rank_lower: usize,
}

impl PointSearch {
    pub fn only_torsion(&self) -> bool {
        self.points_e.iter().all(RationalPoint::is_two_torsion)
    }
}

/// Naive search on `E` and `E′`; points map to `K(S,2)` through `x ↦ x`, with
/// `(0,0) ↦ b`.
pub fn point_search(curve: &CurveSpec, ks: &Ks2, height: u64) -> PointSearch {
    let (a, b) = curve.e_coeffs();
    let (a2, b2) = curve.e_prime_coeffs();
    let points_e = search_points(curve.field, a, b, height);
    let points_e_prime = search_points(curve.field, a2, b2, height);
    let class = |x: &QInt| ks.coords(x).expect("x-coordinate of a point lies in K(S,2)");
    let k = curve.field;
    let mut image_phihat: Vec<u64> = two_torsion(curve)
        .points
        .iter()
        .map(|&x| class(&QInt::from_int(k, if x == 0 { b } else { x })))
        .collect();
    image_phihat.extend(points_e.iter().map(|pt| class(&pt.m)));
    let mut image_phi = vec![class(&QInt::from_int(k, b2))];
    image_phi.extend(points_e_prime.iter().map(|pt| class(&pt.m)));
    image_phihat.sort_unstable();
    image_phihat.dedup();
    image_phi.sort_unstable();
    image_phi.dedup();
    let rank_lower = (f2::rank(&image_phihat) + f2::rank(&image_phi)).saturating_sub(2);
    PointSearch {
        height,
        points_e,
        points_e_prime,
        image_phihat,
        image_phi,
        rank_lower,
    }
}

#[derive(Debug, Clone)]
pub struct DescentReport {
    pub curve: CurveSpec,
    pub phi: SelmerGroup,
    pub phihat: SelmerGroup,
    pub identity_value: usize,
    pub clause: ShaClause,
    pub search: PointSearch,
    pub torsion: TorsionReport,
}

impl DescentReport {
    pub fn dim_phi(&self) -> usize {
        self.phi.dim()
    }

    pub fn dim_phihat(&self) -> usize {
        self.phihat.dim()
    }

    pub fn rank_lower(&self) -> usize {
        self.search.rank_lower
    }

    pub fn rank_upper(&self) -> usize {
        self.identity_value
    }

    /// Selmer classes accounted for by a found point.
    pub fn explained(&self, dir: Direction) -> Vec<u64> {
        let (group, images) = match dir {
            Direction::Phi => (&self.phi, &self.search.image_phi),
            Direction::PhiHat => (&self.phihat, &self.search.image_phihat),
        };
        let span = f2::span(&f2::echelon_basis(images));
        group
            .members
            .iter()
            .copied()
            .filter(|m| span.binary_search(m).is_ok())
            .collect()
    }
}

pub fn descend(curve: &CurveSpec, policy: &SearchPolicy, height: u64) -> Result<DescentReport, ShaRankError> {
    let phi = selmer_group(curve, Direction::Phi, policy)?;
    let phihat = selmer_group(curve, Direction::PhiHat, policy)?;
    let identity_value = dimension_identity(phi.dim(), phihat.dim())?;
    let clause = sha_two_part_reduction(phi.dim(), phihat.dim())?;
    let search = point_search(curve, &phihat.ks2, height);
    Ok(DescentReport {
        curve: *curve,
        torsion: two_torsion(curve),
        phi,
        phihat,
        identity_value,
        clause,
        search,
    })
}
