//! `K(S,2)`, the homogeneous spaces `C_d` and `C′_d`, and the Selmer groups
//! `S^(φ)(E/K)` and `S^(φ̂)(E′/K)`.

use std::fmt;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::f2;
use crate::localfield::{
    newton_parity_obstruction, quartic_locally_solvable, Chart, HenselCertificate, Quartic,
    SearchPolicy, Verdict,
};
use crate::qfield::{build_place_set, is_prime, FinitePlace, PlaceSet, QInt, QfieldError, QuadField};

#[derive(Debug, Error)]
pub enum DescentError {
    #[error(transparent)]
    Field(#[from] QfieldError),
    #[error("eps must be +1 or -1 (got {0})")]
    BadEps(i64),
    #[error("p + 2 = {0} is not prime")]
    NotTwin(u64),
    #[error("local search undecided for d = {class} at place {place} (depth bound {bound})")]
    Undecided { class: String, place: String, bound: u32 },
    #[error("unknown class expression {expr:?}; generators are {generators}")]
    UnknownClass { expr: String, generators: String },
    #[error("{0} is not in K(S,2): odd valuation outside S")]
    NotInKs2(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Direction {
    #[serde(rename = "phi")]
    Phi,
    #[serde(rename = "phihat")]
    PhiHat,
}

impl Direction {
    pub fn name(&self) -> &'static str {
        match self {
            Direction::Phi => "phi",
            Direction::PhiHat => "phihat",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `E: y² = x(x + εp)(x + εq)` over `K`, with its 2-isogenous curve
/// `E′: y² = x³ − 2ε(p+q)x² + 4x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CurveSpec {
    pub field: QuadField,
    pub eps: i64,
    pub p: u64,
    pub q: u64,
}

impl CurveSpec {
    pub fn new(field: QuadField, p: u64, eps: i64) -> Result<Self, DescentError> {
        if eps != 1 && eps != -1 {
            return Err(DescentError::BadEps(eps));
        }
        if !is_prime(p) {
            return Err(QfieldError::NotPrime(p).into());
        }
        let q = p + 2;
        if !is_prime(q) {
            return Err(DescentError::NotTwin(q));
        }
        for ell in [p, q] {
            if field.disc() % ell as i64 == 0 {
                return Err(QfieldError::PrimeDividesDiscriminant {
                    prime: ell,
                    disc: field.disc(),
                }
                .into());
            }
        }
        Ok(CurveSpec { field, eps, p, q })
    }

    /// `(a, b)` with `E: y² = x³ + a x² + b x`.
    pub fn e_coeffs(&self) -> (i64, i64) {
        (self.eps * (self.p + self.q) as i64, (self.p * self.q) as i64)
    }

    /// `(a′, b′)` with `E′: y² = x³ + a′ x² + b′ x`.
    pub fn e_prime_coeffs(&self) -> (i64, i64) {
        let (a, b) = self.e_coeffs();
        (-2 * a, a * a - 4 * b)
    }

    pub fn place_set(&self) -> Result<PlaceSet, DescentError> {
        Ok(build_place_set(self.field, self.p, self.q)?)
    }

    fn int(&self, n: i64) -> QInt {
        QInt::from_int(self.field, n)
    }
}

/// One generator of `K(S,2)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    pub label: String,
    pub rep: QInt,
    /// The place it generates, or `None` for the unit generator.
    pub place: Option<FinitePlace>,
}

/// `K(S,2)` with its ordered generator list (unit, places over 2, p, q).
#[derive(Debug, Clone)]
pub struct Ks2 {
    pub field: QuadField,
    pub places: PlaceSet,
    pub generators: Vec<Generator>,
}

pub fn ks2(places: &PlaceSet) -> Ks2 {
    let field = places.field;
    let unit = field.unit_square_class_generator();
    let label = if field.d() == -1 { "i" } else { "-1" };
    let mut generators = vec![Generator {
        label: label.to_string(),
        rep: unit,
        place: None,
    }];
    for pl in &places.finite {
        generators.push(Generator {
            label: pl.label.clone(),
            rep: pl.generator.clone(),
            place: Some(pl.clone()),
        });
    }
    Ks2 {
        field,
        places: places.clone(),
        generators,
    }
}

impl Ks2 {
    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn order(&self) -> u64 {
        1 << self.len()
    }

    /// Product of generators selected by `mask`.
    pub fn rep(&self, mask: u64) -> QInt {
        self.generators
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .fold(self.field.one(), |acc, (_, g)| &acc * &g.rep)
    }

    pub fn expr(&self, mask: u64) -> String {
        let parts: Vec<&str> = self
            .generators
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, g)| g.label.as_str())
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }

    pub fn class(&self, mask: u64) -> SelmerClass {
        SelmerClass {
            exps: mask,
            rep: self.rep(mask),
            expr: self.expr(mask),
        }
    }

    /// Exponent vector of a nonzero `x`, or `None` if `x ∉ K(S,2)`.
    pub fn coords(&self, x: &QInt) -> Option<u64> {
        if x.is_zero() {
            return None;
        }
        let mut mask = 0u64;
        let mut r = x.clone();
        for (i, g) in self.generators.iter().enumerate().skip(1) {
            let pl = g.place.as_ref().expect("place generator");
            let v = pl.valuation(&r)?;
            r = pl.divide_pow(&r, v)?;
            if v % 2 == 1 {
                mask |= 1 << i;
            }
        }
        // r is now coprime to S; it must be a unit times a square.
        let units = self.field.units();
        for u in &units {
            let Some(s) = r.div_exact(u) else { continue };
            if s.sqrt_exact().is_some() {
                if u.sqrt_exact().is_none() {
                    mask |= 1;
                }
                return Some(mask);
            }
        }
        None
    }

    pub fn labels(&self) -> String {
        self.generators
            .iter()
            .map(|g| g.label.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    }

    /// Parses `'*'`-separated factors: generator labels, `p`, `q`, `i`, or
    /// integers, with an optional leading `-`.
    pub fn parse(&self, expr: &str) -> Result<u64, DescentError> {
        let unknown = || DescentError::UnknownClass {
            expr: expr.to_string(),
            generators: self.labels(),
        };
        let s = expr.trim();
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) if !rest.is_empty() && !rest.starts_with(|c: char| c.is_ascii_digit()) => {
                (true, rest)
            }
            _ => (false, s),
        };
        let mut mask = 0u64;
        let p_splits = self.places.find("mu_p").is_some();
        let q_splits = self.places.find("mu_q").is_some();
        for tok in body.split('*').map(str::trim) {
            if tok.is_empty() {
                return Err(unknown());
            }
            if let Some(i) = self.generators.iter().position(|g| g.label == tok) {
                mask ^= 1 << i;
                continue;
            }
            let alias = match tok {
                "mu" | "mubar" if p_splits != q_splits => {
                    let which = if p_splits { "p" } else { "q" };
                    Some(format!("{tok}_{which}"))
                }
                _ => None,
            };
            if let Some(i) = alias.and_then(|a| self.generators.iter().position(|g| g.label == a)) {
                mask ^= 1 << i;
                continue;
            }
            let value = match tok {
                "p" => self.places.p as i64,
                "q" => self.places.q as i64,
                "i" if self.field.d() == -1 => {
                    mask ^= self.coords(&self.field.omega()).ok_or_else(unknown)?;
                    continue;
                }
                _ => tok.parse::<i64>().map_err(|_| unknown())?,
            };
            let x = QInt::from_int(self.field, value);
            mask ^= self
                .coords(&x)
                .ok_or_else(|| DescentError::NotInKs2(tok.to_string()))?;
        }
        if neg {
            mask ^= self.coords(&-self.field.one()).expect("-1 is an S-unit");
        }
        Ok(mask)
    }

    /// Image of each generator under complex conjugation.
    pub fn conjugation_images(&self) -> Vec<u64> {
        self.generators
            .iter()
            .map(|g| self.coords(&g.rep.conj()).expect("conjugate of an S-unit"))
            .collect()
    }
}

/// A class of `K(S,2)` with its canonical representative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelmerClass {
    pub exps: u64,
    pub rep: QInt,
    pub expr: String,
}

/// The homogeneous space `d·w² = c₀ + c₂z² + c₄z⁴`, possibly after a
/// substitution `z ↦ λz` with `λ ∈ K*` (which preserves local solvability).
#[derive(Debug, Clone)]
pub struct HomSpace {
    pub class: SelmerClass,
    pub direction: Direction,
    pub quartic: Quartic,
    pub normalization: &'static str,
    /// `(num, den)` with `z_original = (num/den)·z`.
    pub lambda: (QInt, QInt),
}

/// `c_j ↦ c_j·(num/den)^j`, requiring exact division.
fn substitute(c: &[QInt; 5], num: &QInt, den: &QInt) -> [QInt; 5] {
    let mut out = c.clone();
    for (j, cj) in out.iter_mut().enumerate() {
        let n = num.pow(j as u32);
        let d = den.pow(j as u32);
        *cj = (&*cj * &n)
            .div_exact(&d)
            .expect("normalizing substitution keeps coefficients integral");
    }
    out
}

pub fn hom_space(ks: &Ks2, mask: u64, curve: &CurveSpec, dir: Direction) -> HomSpace {
    let class = ks.class(mask);
    let d = class.rep.clone();
    let zero = curve.int(0);
    let (a, b) = match dir {
        Direction::Phi => curve.e_prime_coeffs(),
        Direction::PhiHat => curve.e_coeffs(),
    };
    let c = [
        &d * &d,
        zero.clone(),
        &d * &curve.int(a),
        zero,
        curve.int(b),
    ];
    let field = curve.field;
    let (lambda, normalization) = match (field.d(), dir) {
        (-2, Direction::Phi) => ((field.one(), field.omega()), "z -> z/pi2"),
        (-1, Direction::Phi) => ((field.one(), QInt::new(field, 1, -1)), "z -> z/pi2"),
        (-1, Direction::PhiHat) => ((field.omega(), field.one()), "z -> i*z"),
        _ => ((field.one(), field.one()), "none"),
    };
    let c = substitute(&c, &lambda.0, &lambda.1);
    HomSpace {
        class,
        direction: dir,
        quartic: Quartic { d, c },
        normalization,
        lambda,
    }
}

/// A class known to be in the Selmer group because of an explicit global
/// point on the unnormalized space `C_x`.
#[derive(Debug, Clone)]
pub struct KnownMember {
    pub mask: u64,
    pub x: QInt,
    pub chart: Chart,
    /// `z` on `C_x` (ignored for the reversed chart, where `z₁ = 0`).
    pub z: QInt,
}

pub fn known_members(ks: &Ks2, curve: &CurveSpec, dir: Direction) -> Vec<KnownMember> {
    let field = curve.field;
    // d = 1: (z, w) = (0, 1)
    let mut out = vec![KnownMember {
        mask: 0,
        x: field.one(),
        chart: Chart::Affine,
        z: field.zero(),
    }];
    if dir == Direction::PhiHat {
        let e = curve.eps;
        let p = curve.p as i64;
        let q = curve.q as i64;
        for x in [-e * p, -e * q] {
            // (z, w) = (1, 0)
            out.push(KnownMember {
                mask: ks.coords(&curve.int(x)).expect("S-unit"),
                x: curve.int(x),
                chart: Chart::Affine,
                z: field.one(),
            });
        }
        // d·c₄ = (pq)², so z₁ = 0 is a point in the reversed chart
        out.push(KnownMember {
            mask: ks.coords(&curve.int(p * q)).expect("S-unit"),
            x: curve.int(p * q),
            chart: Chart::Reversed,
            z: field.zero(),
        });
    }
    let mut seen = Vec::new();
    out.retain(|k| {
        if seen.contains(&k.mask) {
            false
        } else {
            seen.push(k.mask);
            true
        }
    });
    out
}

/// Transports a known point to `h`, returning `(chart, z, W)` on the chart
/// polynomial of `h` with `W² = G(z)` exactly.
pub fn known_point(h: &HomSpace, k: &KnownMember) -> Option<(Chart, QInt, QInt)> {
    let mut f = h.quartic.scaled();
    match k.chart {
        Chart::Affine => {
            // rep = x·s², and (z, w) on C_x becomes (s·z, s·w) on C_rep
            let s = h.class.rep.div_exact(&k.x)?.sqrt_exact()?;
            let (num, den) = &h.lambda;
            let z = (&(&k.z * &s) * den).div_exact(num)?;
            let w = crate::localfield::eval_quartic(&f, &z).sqrt_exact()?;
            Some((Chart::Affine, z, w))
        }
        Chart::Reversed => {
            f.reverse();
            let w = f[0].sqrt_exact()?;
            Some((Chart::Reversed, h.quartic.d.field().zero(), w))
        }
    }
}

/// Verdict at one place of `S` for one class.
#[derive(Debug, Clone)]
pub enum PlaceVerdict {
    Local(Verdict),
    /// `K_∞ = C`: always solvable.
    Archimedean,
    /// Not evaluated because an earlier place already rejected the class.
    Skipped,
}

impl PlaceVerdict {
    pub fn tag(&self) -> &'static str {
        match self {
            PlaceVerdict::Local(v) => v.tag(),
            PlaceVerdict::Archimedean => "solvable",
            PlaceVerdict::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClassReport {
    pub class: SelmerClass,
    pub member: bool,
    pub known_member: bool,
    pub hom_space: HomSpace,
    /// `(place label, verdict)` in search order, ending with `inf`.
    pub verdicts: Vec<(String, PlaceVerdict)>,
}

impl ClassReport {
    pub fn certificates(&self) -> impl Iterator<Item = &HenselCertificate> {
        self.verdicts.iter().filter_map(|(_, v)| match v {
            PlaceVerdict::Local(Verdict::Solvable(c)) => Some(c.as_ref()),
            _ => None,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SelmerGroup {
    pub direction: Direction,
    pub ks2: Ks2,
    pub members: Vec<u64>,
    pub basis: Vec<u64>,
    pub classes: Vec<ClassReport>,
}

impl SelmerGroup {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn contains(&self, mask: u64) -> bool {
        self.members.binary_search(&mask).is_ok()
    }

    pub fn basis_exprs(&self) -> Vec<String> {
        self.basis.iter().map(|&m| self.ks2.expr(m)).collect()
    }
}

/// The valuation-only rejection: `Some(Insolvable)` at the first place of `S`
/// where the Newton polygon of `F` forces odd valuations everywhere.
pub fn membership_prescreen(h: &HomSpace, places: &PlaceSet) -> Option<(String, Verdict)> {
    let f = h.quartic.scaled();
    places.finite.iter().find_map(|pl| {
        newton_parity_obstruction(pl, &f).then(|| {
            (
                pl.label.clone(),
                Verdict::Insolvable {
                    depth: 0,
                    bound: 0,
                    prescreen: true,
                },
            )
        })
    })
}

fn exact_certificate(pl: &FinitePlace, h: &HomSpace, chart: Chart, z: &QInt, w: &QInt) -> Verdict {
    let mut poly = h.quartic.scaled();
    if chart == Chart::Reversed {
        poly.reverse();
    }
    let cert = HenselCertificate::new(pl, chart, poly, z.clone(), w.clone());
    debug_assert!(cert.is_exact());
    Verdict::Solvable(Box::new(cert))
}

/// Decides membership of one class, in the order prescreen, known member,
/// then places over 2, p, q, and ∞.
pub fn classify_class(
    ks: &Ks2,
    mask: u64,
    curve: &CurveSpec,
    dir: Direction,
    known: &[KnownMember],
    policy: &SearchPolicy,
) -> Result<ClassReport, DescentError> {
    let h = hom_space(ks, mask, curve, dir);
    let places = &ks.places;
    let mut verdicts = Vec::new();
    let finish = |verdicts: Vec<(String, PlaceVerdict)>, member: bool, known_member: bool| {
        let mut verdicts = verdicts;
        verdicts.push((
            "inf".to_string(),
            if member {
                PlaceVerdict::Archimedean
            } else {
                PlaceVerdict::Skipped
            },
        ));
        ClassReport {
            class: ks.class(mask),
            member,
            known_member,
            hom_space: h.clone(),
            verdicts,
        }
    };
    if let Some((label, v)) = membership_prescreen(&h, places) {
        for pl in &places.finite {
            let pv = if pl.label == label {
                PlaceVerdict::Local(v.clone())
            } else {
                PlaceVerdict::Skipped
            };
            verdicts.push((pl.label.clone(), pv));
        }
        return Ok(finish(verdicts, false, false));
    }
    if let Some((chart, z, w)) = known
        .iter()
        .find(|k| k.mask == mask)
        .and_then(|k| known_point(&h, k))
    {
        for pl in &places.finite {
            let v = exact_certificate(pl, &h, chart, &z, &w);
            verdicts.push((pl.label.clone(), PlaceVerdict::Local(v)));
        }
        return Ok(finish(verdicts, true, true));
    }
    let mut member = true;
    for pl in &places.finite {
        if !member {
            verdicts.push((pl.label.clone(), PlaceVerdict::Skipped));
            continue;
        }
        let v = quartic_locally_solvable(&h.quartic, pl, policy);
        match v {
            Verdict::Undecided { bound } => {
                return Err(DescentError::Undecided {
                    class: ks.expr(mask),
                    place: pl.label.clone(),
                    bound,
                })
            }
            Verdict::Insolvable { .. } => member = false,
            Verdict::Solvable(_) => {}
        }
        verdicts.push((pl.label.clone(), PlaceVerdict::Local(v)));
    }
    Ok(finish(verdicts, member, false))
}

pub fn selmer_group(
    curve: &CurveSpec,
    dir: Direction,
    policy: &SearchPolicy,
) -> Result<SelmerGroup, DescentError> {
    let places = curve.place_set()?;
    let ks = ks2(&places);
    let known = known_members(&ks, curve, dir);
    let classes: Vec<ClassReport> = (0..ks.order())
        .into_par_iter()
        .map(|mask| classify_class(&ks, mask, curve, dir, &known, policy))
        .collect::<Result<_, _>>()?;
    let members: Vec<u64> = classes
        .iter()
        .filter(|c| c.member)
        .map(|c| c.class.exps)
        .collect();
    let basis = f2::echelon_basis(&members);
    Ok(SelmerGroup {
        direction: dir,
        ks2: ks,
        members,
        basis,
        classes,
    })
}

/// Applies `z ↦ λz` to `d·w² = d² + a·d·z² + b·z⁴` and returns the new
/// `(c₀, c₂, c₄)`; used to check the printed normalized forms.
pub fn substituted_coeffs(c: [QInt; 3], num: &QInt, den: &QInt) -> [QInt; 3] {
    let zero = num.field().zero();
    let full = [c[0].clone(), zero.clone(), c[1].clone(), zero, c[2].clone()];
    let s = substitute(&full, num, den);
    [s[0].clone(), s[2].clone(), s[4].clone()]
}

pub fn int(field: QuadField, n: i64) -> QInt {
    QInt::from_int(field, BigInt::from(n))
}
