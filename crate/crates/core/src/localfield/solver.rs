//! Certified local solvability of `W² = F(z)` for a quartic `F` over `K_v`.
//!
//! The search walks residue discs `z₀ + π^k O_v` in both charts (`z ∈ O_v` and
//! `z = 1/z₁` with `z₁ ∈ πO_v`). A disc is closed either by a point satisfying
//! Hensel's criterion or by a valuation argument showing `F` takes no square
//! values on it. All arithmetic is exact in `O_K`.

use num_bigint::BigInt;
use serde::Serialize;

use super::residue::{Fq, ResidueField};
use super::{LocalError, LocalField};
use crate::qfield::{FinitePlace, QInt};

/// `d·w² = Σ c_j z^j` with all coefficients in `O_K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quartic {
    pub d: QInt,
    pub c: [QInt; 5],
}

impl Quartic {
    /// Coefficients of `F = d·Σ c_j z^j`, so that the curve is `W² = F(z)` with `W = d·w`.
    pub fn scaled(&self) -> [QInt; 5] {
        self.c.clone().map(|x| &x * &self.d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    /// `z ∈ O_v`.
    Affine,
    /// `z = 1/z₁`, `W = W₁/z₁²`, with `z₁ ∈ πO_v`.
    Reversed,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SearchPolicy {
    /// Overrides the computed depth bound when set.
    pub depth: Option<u32>,
    /// Working precision for Hensel lifting; defaults to `max(2B, 40)`.
    pub prec: Option<u32>,
}

impl SearchPolicy {
    pub fn working_precision(&self, bound: u32) -> u32 {
        self.prec.unwrap_or((2 * bound).max(40))
    }
}

/// A point `(z, w)` on `w² = G(z)` (the chart polynomial) with
/// `v(w² − G(z)) > 2·v(2w)`, or an exact root (`fval = None`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HenselCertificate {
    pub place: FinitePlace,
    pub chart: Chart,
    pub poly: [QInt; 5],
    pub z: QInt,
    pub w: QInt,
    pub fval: Option<u32>,
    pub dval: Option<u32>,
}

impl HenselCertificate {
    pub fn new(place: &FinitePlace, chart: Chart, poly: [QInt; 5], z: QInt, w: QInt) -> Self {
        let mut cert = HenselCertificate {
            place: place.clone(),
            chart,
            poly,
            z,
            w,
            fval: None,
            dval: None,
        };
        let (fval, dval) = cert.recompute();
        cert.fval = fval;
        cert.dval = dval;
        cert
    }

    pub fn eval_poly(&self) -> QInt {
        eval(&self.poly, &self.z)
    }

    /// `(v(w² − G(z)), v(2w))` recomputed from the stored point.
    pub fn recompute(&self) -> (Option<u32>, Option<u32>) {
        let f = &(&self.w * &self.w) - &self.eval_poly();
        let fw = self.w.scale(&BigInt::from(2));
        (self.place.valuation(&f), self.place.valuation(&fw))
    }

    pub fn criterion(fval: Option<u32>, dval: Option<u32>) -> bool {
        match (fval, dval) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(f), Some(d)) => f > 2 * d,
        }
    }

    /// Re-checks the lifting criterion from the stored point, ignoring the
    /// cached valuations.
    pub fn verify(&self) -> bool {
        let (fval, dval) = self.recompute();
        fval == self.fval && dval == self.dval && Self::criterion(fval, dval)
    }

    pub fn is_exact(&self) -> bool {
        self.fval.is_none()
    }

    /// The point on the original affine model `W² = F(z)`, when affine.
    pub fn affine_z(&self) -> Option<&QInt> {
        (self.chart == Chart::Affine).then_some(&self.z)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Solvable(Box<HenselCertificate>),
    /// Every residue disc was refuted by depth `depth ≤ bound`.
    Insolvable { depth: u32, bound: u32, prescreen: bool },
    Undecided { bound: u32 },
}

impl Verdict {
    pub fn is_solvable(&self) -> bool {
        matches!(self, Verdict::Solvable(_))
    }

    pub fn is_insolvable(&self) -> bool {
        matches!(self, Verdict::Insolvable { .. })
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Verdict::Solvable(_) => "solvable",
            Verdict::Insolvable { .. } => "insolvable",
            Verdict::Undecided { .. } => "undecided",
        }
    }
}

pub fn eval(c: &[QInt; 5], z: &QInt) -> QInt {
    let mut acc = z.field().zero();
    for cj in c.iter().rev() {
        acc = &(&acc * z) + cj;
    }
    acc
}

/// Discriminant of `c₄z⁴ + c₃z³ + c₂z² + c₁z + c₀`.
pub fn quartic_discriminant(c: &[QInt; 5]) -> QInt {
    let field = c[0].field();
    let k = |n: i64| QInt::from_int(field, n);
    let (a, b, cc, d, e) = (&c[4], &c[3], &c[2], &c[1], &c[0]);
    let m = |xs: &[&QInt]| xs.iter().fold(field.one(), |acc, x| &acc * x);
    let terms: Vec<(i64, QInt)> = vec![
        (256, m(&[a, a, a, e, e, e])),
        (-192, m(&[a, a, b, d, e, e])),
        (-128, m(&[a, a, cc, cc, e, e])),
        (144, m(&[a, a, cc, d, d, e])),
        (-27, m(&[a, a, d, d, d, d])),
        (144, m(&[a, b, b, cc, e, e])),
        (-6, m(&[a, b, b, d, d, e])),
        (-80, m(&[a, b, cc, cc, d, e])),
        (18, m(&[a, b, cc, d, d, d])),
        (16, m(&[a, cc, cc, cc, cc, e])),
        (-4, m(&[a, cc, cc, cc, d, d])),
        (-27, m(&[b, b, b, b, e, e])),
        (18, m(&[b, b, b, cc, d, e])),
        (-4, m(&[b, b, b, d, d, d])),
        (-4, m(&[b, b, cc, cc, cc, e])),
        (1, m(&[b, b, cc, cc, d, d])),
    ];
    terms
        .into_iter()
        .fold(field.zero(), |acc, (n, t)| &acc + &(&k(n) * &t))
}

/// The depth bound `v_π(16·disc(F)) + 2e + 2`, where `F` is the quartic
/// actually searched (`d` folded in).
pub fn depth_bound(place: &FinitePlace, f: &[QInt; 5]) -> Option<u32> {
    let disc = quartic_discriminant(f).scale(&BigInt::from(16));
    place.valuation(&disc).map(|v| v + 2 * place.e() + 2)
}

const FALLBACK_DEPTH: u32 = 40;

/// Sound valuation-only obstruction: if for every `z ∈ K_v ∪ {∞}` exactly one
/// monomial of `F` has minimal valuation and that valuation is odd, then
/// `F(z)` is never a square.
pub fn newton_parity_obstruction(place: &FinitePlace, f: &[QInt; 5]) -> bool {
    let vals: Vec<Option<u32>> = f.iter().map(|c| place.valuation(c)).collect();
    let (Some(v0), Some(v4)) = (vals[0], vals[4]) else {
        return false;
    };
    if v0 % 2 == 0 || v4 % 2 == 0 {
        return false;
    }
    let spread = vals.iter().flatten().max().copied().unwrap_or(0) as i64 + 1;
    for k in -spread..=spread {
        let mut best: Option<i64> = None;
        let mut count = 0;
        for (i, v) in vals.iter().enumerate() {
            let Some(v) = v else { continue };
            let t = *v as i64 + i as i64 * k;
            match best {
                Some(b) if t > b => {}
                Some(b) if t == b => count += 1,
                _ => {
                    best = Some(t);
                    count = 1;
                }
            }
        }
        let b = best.expect("nonzero coefficients");
        if count != 1 || b.rem_euclid(2) == 0 {
            return false;
        }
    }
    true
}

enum Disc {
    Solved(Box<HenselCertificate>),
    Refuted,
    Undecided,
}

struct Search<'a> {
    place: &'a FinitePlace,
    lf: LocalField,
    residue: Option<ResidueField>,
    reps: Vec<QInt>,
    square_reps: Vec<QInt>,
    bound: u32,
    max_depth: u32,
}

/// Binomial coefficients `C(i, j)` for `i ≤ 4`.
const BINOM: [[i64; 5]; 5] = [
    [1, 0, 0, 0, 0],
    [1, 1, 0, 0, 0],
    [1, 2, 1, 0, 0],
    [1, 3, 3, 1, 0],
    [1, 4, 6, 4, 1],
];

fn taylor(c: &[QInt; 5], z0: &QInt, pik: &QInt) -> [QInt; 5] {
    let field = z0.field();
    let mut pows = vec![field.one()];
    for i in 1..5 {
        pows.push(&pows[i - 1] * z0);
    }
    let mut out: [QInt; 5] = std::array::from_fn(|_| field.zero());
    let mut scale = field.one();
    for j in 0..5 {
        let mut t = field.zero();
        for i in j..5 {
            if c[i].is_zero() {
                continue;
            }
            let term = (&c[i] * &pows[i - j]).scale(&BigInt::from(BINOM[i][j]));
            t = &t + &term;
        }
        out[j] = &t * &scale;
        scale = &scale * pik;
    }
    out
}

impl<'a> Search<'a> {
    fn new(place: &'a FinitePlace, bound: u32) -> Result<Self, LocalError> {
        let lf = LocalField::new(place)?;
        let residue = lf.residue_field();
        let (reps, square_reps) = if place.ell == 2 {
            (lf.residue_reps(), lf.unit_reps_mod(lf.e + 1))
        } else {
            (Vec::new(), Vec::new())
        };
        Ok(Search {
            place,
            lf,
            residue,
            reps,
            square_reps,
            bound,
            max_depth: 0,
        })
    }

    fn v(&self, x: &QInt) -> Option<u32> {
        self.place.valuation(x)
    }

    /// A witness `W` with `v(W² − x) > 2·v(2W)` when `x ≠ 0` is a square in `K_v`.
    fn square_witness(&self, x: &QInt) -> Option<QInt> {
        let v = self.v(x)?;
        if v % 2 == 1 {
            return None;
        }
        let u = self.place.divide_pow(x, v)?;
        let half = self.place.generator.pow(v / 2);
        if self.place.ell == 2 {
            let target = 2 * self.lf.e + 1;
            for r in &self.square_reps {
                let diff = &u - &(r * r);
                if self.v(&diff).is_none_or(|dv| dv >= target) {
                    return Some(&half * r);
                }
            }
            None
        } else {
            let rf = self.residue.as_ref().expect("odd place");
            let root = rf.sqrt(rf.reduce(&u))?;
            if rf.is_zero(root) {
                return None;
            }
            Some(&half * &rf.lift(root, x.field()))
        }
    }

    fn cert(&self, chart: Chart, poly: &[QInt; 5], z: QInt, w: QInt) -> Box<HenselCertificate> {
        let cert = HenselCertificate::new(self.place, chart, poly.clone(), z, w);
        debug_assert!(cert.verify());
        Box::new(cert)
    }

    fn disc(&mut self, chart: Chart, poly: &[QInt; 5], z0: QInt, k: u32) -> Disc {
        if k > self.bound {
            return Disc::Undecided;
        }
        self.max_depth = self.max_depth.max(k);
        let pik = self.place.generator.pow(k);
        let s = taylor(poly, &z0, &pik);
        if self.place.ell == 2 {
            self.disc_two(chart, poly, z0, k, &pik, &s)
        } else {
            self.disc_odd(chart, poly, z0, k, &pik, &s)
        }
    }

    fn children(
        &mut self,
        chart: Chart,
        poly: &[QInt; 5],
        z0: &QInt,
        k: u32,
        pik: &QInt,
        ts: Vec<QInt>,
    ) -> Disc {
        let mut undecided = false;
        for t in ts {
            let z = z0 + &(pik * &t);
            match self.disc(chart, poly, z, k + 1) {
                Disc::Solved(c) => return Disc::Solved(c),
                Disc::Undecided => undecided = true,
                Disc::Refuted => {}
            }
        }
        if undecided {
            Disc::Undecided
        } else {
            Disc::Refuted
        }
    }

    fn disc_two(
        &mut self,
        chart: Chart,
        poly: &[QInt; 5],
        z0: QInt,
        k: u32,
        pik: &QInt,
        s: &[QInt; 5],
    ) -> Disc {
        if s[0].is_zero() {
            let w = z0.field().zero();
            return Disc::Solved(self.cert(chart, poly, z0, w));
        }
        if let Some(w) = self.square_witness(&s[0]) {
            return Disc::Solved(self.cert(chart, poly, z0, w));
        }
        let v0 = self.v(&s[0]).expect("nonzero");
        let m = s[1..].iter().filter_map(|x| self.v(x)).min();
        let refuted = match m {
            None => true,
            Some(m) => (v0 < m && v0 % 2 == 1) || m >= v0 + 2 * self.lf.e + 1,
        };
        if refuted {
            return Disc::Refuted;
        }
        let reps = self.reps.clone();
        self.children(chart, poly, &z0, k, pik, reps)
    }

    fn disc_odd(
        &mut self,
        chart: Chart,
        poly: &[QInt; 5],
        z0: QInt,
        k: u32,
        pik: &QInt,
        s: &[QInt; 5],
    ) -> Disc {
        if s[0].is_zero() {
            let w = z0.field().zero();
            return Disc::Solved(self.cert(chart, poly, z0, w));
        }
        let vals: Vec<Option<u32>> = s.iter().map(|x| self.v(x)).collect();
        let m0 = vals.iter().flatten().min().copied().expect("nonzero");
        let rf = self.residue.clone().expect("odd place");
        let field = z0.field();
        let g: Vec<Fq> = s
            .iter()
            .zip(&vals)
            .map(|(x, v)| {
                if *v == Some(m0) {
                    rf.reduce(&self.place.divide_pow(x, m0).expect("v ≥ m0"))
                } else {
                    rf.zero()
                }
            })
            .collect();
        let roots = if m0 % 2 == 0 {
            match find_square_value(&rf, &g) {
                SquareSearch::Found(t) => {
                    let z = &z0 + &(pik * &rf.lift(t, field));
                    let fz = eval(poly, &z);
                    let w = self
                        .square_witness(&fz)
                        .expect("unit square residue lifts");
                    return Disc::Solved(self.cert(chart, poly, z, w));
                }
                SquareSearch::NotFound(roots) => roots,
            }
        } else {
            all_roots(&rf, &g)
        };
        let ts = roots.into_iter().map(|t| rf.lift(t, field)).collect();
        self.children(chart, poly, &z0, k, pik, ts)
    }
}

enum SquareSearch {
    Found(Fq),
    NotFound(Vec<Fq>),
}

fn degree(g: &[Fq]) -> Option<usize> {
    g.iter().rposition(|&c| c != (0, 0))
}

/// If `g = c·h²` with `h` monic, returns `h` (low degree first).
fn square_cofactor(rf: &ResidueField, g: &[Fq]) -> Option<Vec<Fq>> {
    let deg = degree(g)?;
    let inv = rf.inv(g[deg]);
    let m: Vec<Fq> = g[..=deg].iter().map(|&x| rf.mul(x, inv)).collect();
    let half = rf.inv(rf.from_u64(2));
    match deg {
        0 => Some(vec![rf.one()]),
        2 => {
            let (a, b) = (m[1], m[0]);
            let disc = rf.sub(rf.mul(a, a), rf.mul(rf.from_u64(4), b));
            rf.is_zero(disc).then(|| vec![rf.mul(a, half), rf.one()])
        }
        4 => {
            let (a, b, c, d) = (m[3], m[2], m[1], m[0]);
            let ah = rf.mul(a, half);
            let beta = rf.mul(rf.sub(b, rf.mul(ah, ah)), half);
            (c == rf.mul(a, beta) && d == rf.mul(beta, beta)).then(|| vec![beta, ah, rf.one()])
        }
        _ => None,
    }
}

fn roots_low_degree(rf: &ResidueField, h: &[Fq]) -> Vec<Fq> {
    match degree(h) {
        None | Some(0) => Vec::new(),
        Some(1) => vec![rf.neg(rf.mul(h[0], rf.inv(h[1])))],
        Some(2) => rf.quadratic_roots(h[2], h[1], h[0]),
        Some(_) => {
            let mut r: Vec<Fq> = rf.elements().filter(|&t| rf.is_zero(rf.eval(h, t))).collect();
            r.sort();
            r
        }
    }
}

fn all_roots(rf: &ResidueField, g: &[Fq]) -> Vec<Fq> {
    if let Some(h) = square_cofactor(rf, g) {
        return roots_low_degree(rf, &h);
    }
    roots_low_degree(rf, g)
}

/// Looks for `t` with `g(t)` a nonzero square; otherwise returns the roots of `g`.
fn find_square_value(rf: &ResidueField, g: &[Fq]) -> SquareSearch {
    let deg = degree(g).expect("nonzero reduction");
    if let Some(h) = square_cofactor(rf, g) {
        let roots = roots_low_degree(rf, &h);
        if rf.is_square(g[deg]) {
            if let Some(t) = rf.elements().find(|t| !roots.contains(t)) {
                return SquareSearch::Found(t);
            }
        }
        return SquareSearch::NotFound(roots);
    }
    let mut roots = Vec::new();
    for t in rf.elements() {
        let val = rf.eval(g, t);
        if rf.is_zero(val) {
            roots.push(t);
        } else if rf.is_square(val) {
            return SquareSearch::Found(t);
        }
    }
    SquareSearch::NotFound(roots)
}

/// Decides whether `W² = F(z)` has a point over `K_v` (including points at infinity).
pub fn solve_quartic(place: &FinitePlace, f: &[QInt; 5], policy: &SearchPolicy) -> Verdict {
    let bound = policy
        .depth
        .or_else(|| depth_bound(place, f))
        .unwrap_or(FALLBACK_DEPTH);
    let mut search = match Search::new(place, bound) {
        Ok(s) => s,
        Err(_) => return Verdict::Undecided { bound },
    };
    let field = f[0].field();
    let mut reversed = f.clone();
    reversed.reverse();
    let mut undecided = false;
    for (chart, poly, k) in [(Chart::Affine, f, 0), (Chart::Reversed, &reversed, 1)] {
        match search.disc(chart, poly, field.zero(), k) {
            Disc::Solved(c) => return Verdict::Solvable(c),
            Disc::Undecided => undecided = true,
            Disc::Refuted => {}
        }
    }
    if undecided {
        Verdict::Undecided { bound }
    } else {
        Verdict::Insolvable {
            depth: search.max_depth,
            bound,
            prescreen: false,
        }
    }
}

/// Local solvability of the homogeneous space `d·w² = Σ c_j z^j` at `place`.
pub fn quartic_locally_solvable(h: &Quartic, place: &FinitePlace, policy: &SearchPolicy) -> Verdict {
    solve_quartic(place, &h.scaled(), policy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfield::{build_place_set, QuadField};

    fn ints(k: QuadField, c: [i64; 5]) -> [QInt; 5] {
        c.map(|x| QInt::from_int(k, x))
    }

    #[test]
    fn discriminant_of_even_quartic() {
        let k = QuadField::new(-7).unwrap();
        let (a, c, e) = (3i64, -5i64, 7i64);
        let disc = quartic_discriminant(&ints(k, [e, 0, c, 0, a]));
        let expect = 16 * a * e * (c * c - 4 * a * e).pow(2);
        assert_eq!(disc, QInt::from_int(k, expect));
        // (z − 1)²(z² + 1) has a repeated root
        let disc = quartic_discriminant(&ints(k, [1, -2, 2, -2, 1]));
        assert!(disc.is_zero());
    }

    #[test]
    fn constant_quartics_in_q2() {
        let k = QuadField::new(-7).unwrap();
        let s = build_place_set(k, 3, 5).unwrap();
        let pl = s.find("pi2").unwrap();
        let pol = SearchPolicy::default();
        // W² = 17 z⁴ + 17: z = 0 gives 17, a 2-adic square
        assert!(solve_quartic(pl, &ints(k, [17, 0, 0, 0, 17]), &pol).is_solvable());
        // W² = 3 + 3z⁴ has no 2-adic point: values are 3(1 + z⁴) ∈ {3, 6, 3·unit ≡ 3 mod 8} ...
        let v = solve_quartic(pl, &ints(k, [3, 0, 0, 0, 3]), &pol);
        assert!(v.is_insolvable(), "{:?}", v);
    }

    #[test]
    fn parity_obstruction_examples() {
        let k = QuadField::new(-7).unwrap();
        let s = build_place_set(k, 3, 5).unwrap();
        let pl = s.find("p").unwrap();
        // d = 3: F = 3(9 − 2·8·3 z² + 4 z⁴) has valuations 3, 2, 1 at p = 3
        let f = ints(k, [27, 0, -144, 0, 12]);
        assert!(newton_parity_obstruction(pl, &f));
        let v = solve_quartic(pl, &f, &SearchPolicy::default());
        assert!(v.is_insolvable(), "{:?}", v);
        assert!(!newton_parity_obstruction(pl, &ints(k, [1, 0, 0, 0, 1])));
    }
}
