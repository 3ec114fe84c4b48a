//! Classification of `(K, p)` into the five conditions, the expected
//! Selmer dimensions per row, and conformance sweeps over twin primes.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::descent::{
    classify_class, known_members, ks2, ClassReport, CurveSpec, DescentError, Direction,
    PlaceVerdict,
};
use crate::localfield::{quartic_locally_solvable, HenselCertificate, SearchPolicy, Verdict};
use crate::qfield::{is_prime, kronecker, QuadField};
use crate::sharank::{descend, sha_two_part_reduction, DescentReport, ShaClause, ShaRankError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("outside the classified range: no condition applies to {0}")]
    OutsideScope(String),
    #[error("no expected row for condition {tag}, eps={eps:+}, subcase {subcase}")]
    MissingRow { tag: Condition, eps: i64, subcase: String },
    #[error(transparent)]
    Descent(#[from] DescentError),
    #[error(transparent)]
    ShaRank(#[from] ShaRankError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Condition {
    A,
    B,
    C,
    D,
    E,
    None,
}

impl Condition {
    pub fn name(&self) -> &'static str {
        match self {
            Condition::A => "A",
            Condition::B => "B",
            Condition::C => "C",
            Condition::D => "D",
            Condition::E => "E",
            Condition::None => "none",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionTag {
    pub tag: Condition,
    /// `(p mod m, m)` selecting the expected-outcome row.
    pub subcase: Option<(u64, u64)>,
    /// Kronecker symbols `(disc|p)` and `(disc|q)`: −1 inert, +1 split.
    pub kronecker: (i32, i32),
}

impl ConditionTag {
    pub fn subcase_string(&self) -> Option<String> {
        self.subcase.map(|(r, m)| format!("{r} mod {m}"))
    }
}

const B_FIELDS: [i64; 5] = [-11, -19, -43, -67, -163];
const A_RESIDUES: [u64; 4] = [3, 17, 31, 45];

/// Assumes `q = p + 2` prime and `pq` coprime to the discriminant.
pub fn classify_condition(field: QuadField, p: u64) -> ConditionTag {
    let q = p + 2;
    let disc = field.disc();
    let kr = (kronecker(disc, p as i64), kronecker(disc, q as i64));
    let both_inert = kr == (-1, -1);
    let (tag, modulus) = match field.d() {
        -7 => {
            let by_residue = A_RESIDUES.contains(&(p % 56));
            assert_eq!(
                by_residue, both_inert,
                "mod 56 shortcut disagrees with Kronecker symbols at p={p}"
            );
            if both_inert {
                (Condition::A, Some(56))
            } else {
                (Condition::None, None)
            }
        }
        d if B_FIELDS.contains(&d) && both_inert => (Condition::B, Some(4)),
        -2 if p % 8 == 5 => (Condition::C, Some(8)),
        -1 => (Condition::D, Some(8)),
        -3 if p % 3 == 2 => (Condition::E, Some(24)),
        _ => (Condition::None, None),
    };
    ConditionTag {
        tag,
        subcase: modulus.map(|m| (p % m, m)),
        kronecker: kr,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExpectedOutcome {
    pub dim_phi: usize,
    pub dim_phihat: usize,
    pub clause: ShaClause,
    pub row: String,
}

fn eps_str(eps: i64) -> &'static str {
    if eps > 0 {
        "+1"
    } else {
        "-1"
    }
}

pub fn expected_outcome(tag: &ConditionTag, eps: i64) -> Result<ExpectedOutcome, VerifyError> {
    use ShaClause::*;
    let missing = || VerifyError::MissingRow {
        tag: tag.tag,
        eps,
        subcase: tag.subcase_string().unwrap_or_default(),
    };
    let r = tag.subcase.map(|(r, _)| r);
    let es = eps_str(eps);
    let (dims, clause, row) = match (tag.tag, eps > 0, r) {
        (Condition::None, ..) => {
            return Err(VerifyError::OutsideScope(format!("eps={es}")));
        }
        (Condition::A, true, Some(3 | 17)) => ((0, 3), RankShaPrime2(1), "p ≡ 3, 17 (mod 56)"),
        (Condition::A, true, Some(45)) => ((1, 2), RankSha2(1), "p ≡ 45 (mod 56)"),
        (Condition::A, true, Some(31)) => ((2, 3), ThreeTerm(3), "p ≡ 31 (mod 56)"),
        (Condition::A, false, Some(3 | 45)) => ((0, 3), RankShaPrime2(1), "p ≡ 3, 45 (mod 56)"),
        (Condition::A, false, Some(17)) => ((1, 2), RankSha2(1), "p ≡ 17 (mod 56)"),
        (Condition::A, false, Some(31)) => ((2, 3), ThreeTerm(3), "p ≡ 31 (mod 56)"),
        (Condition::B, _, Some(_)) => ((1, 3), ThreeTerm(2), ""),
        (Condition::C, true, Some(5)) => ((0, 3), RankShaPrime2(1), "p ≡ 5 (mod 8)"),
        (Condition::C, false, Some(5)) => ((1, 3), ThreeTerm(2), "p ≡ 5 (mod 8)"),
        (Condition::D, _, Some(1)) => ((1, 3), ThreeTerm(2), "p ≡ 1 (mod 8)"),
        (Condition::D, _, Some(3)) => ((0, 3), RankShaPrime2(1), "p ≡ 3 (mod 8)"),
        (Condition::D, _, Some(5)) => ((0, 2), FullDetermination, "p ≡ 5 (mod 8)"),
        (Condition::D, _, Some(7)) => ((1, 4), ThreeTerm(3), "p ≡ 7 (mod 8)"),
        (Condition::E, _, Some(5 | 11)) => ((0, 3), RankShaPrime2(1), "p ≡ 5, 11 (mod 24)"),
        (Condition::E, _, Some(17 | 23)) => ((1, 4), ThreeTerm(3), "p ≡ 17, 23 (mod 24)"),
        _ => return Err(missing()),
    };
    // B, D and E rows do not depend on eps.
    let mut parts = vec![tag.tag.name().to_string()];
    if matches!(tag.tag, Condition::A | Condition::C) {
        parts.push(format!("eps={es}"));
    }
    if !row.is_empty() {
        parts.push(row.to_string());
    }
    Ok(ExpectedOutcome {
        dim_phi: dims.0,
        dim_phihat: dims.1,
        clause,
        row: parts.join(", "),
    })
}

/// Primes `p < p_max` with `p + 2` prime.
pub fn twin_primes(p_max: u64) -> Vec<u64> {
    let n = (p_max + 2) as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    if n >= 1 {
        sieve[1] = false;
    }
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            for j in (i * i..=n).step_by(i) {
                sieve[j] = false;
            }
        }
        i += 1;
    }
    (2..p_max as usize)
        .filter(|&p| sieve[p] && sieve[p + 2])
        .map(|p| p as u64)
        .collect()
}

/// Which fields and signs a sweep covers.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub p_max: u64,
    pub fields: Vec<QuadField>,
    pub eps: Vec<i64>,
    pub policy: SearchPolicy,
    pub height: u64,
}

impl SweepConfig {
    pub fn new(p_max: u64) -> Self {
        SweepConfig {
            p_max,
            fields: QuadField::all().collect(),
            eps: vec![1, -1],
            policy: SearchPolicy::default(),
            height: crate::sharank::DEFAULT_HEIGHT,
        }
    }
}

/// One curve in a sweep. The match flag is derived on demand from the
/// stored values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub d: i64,
    pub eps: i64,
    pub p: u64,
    pub q: u64,
    pub condition: ConditionTag,
    pub dim_sel_phi: Option<usize>,
    pub dim_sel_phihat: Option<usize>,
    pub expected: Option<ExpectedOutcome>,
    pub identity_value: Option<usize>,
    pub rank_lower: Option<usize>,
    pub undecided: Option<String>,
}

impl Record {
    /// `None` outside the classified range; `Some(false)` also when undecided.
    pub fn matches(&self) -> Option<bool> {
        let exp = self.expected.as_ref()?;
        let (Some(a), Some(b), Some(id)) = (self.dim_sel_phi, self.dim_sel_phihat, self.identity_value)
        else {
            return Some(false);
        };
        let clause_ok = sha_two_part_reduction(a, b).map(|c| c == exp.clause).unwrap_or(false);
        Some(a == exp.dim_phi && b == exp.dim_phihat && id == exp.clause.value() && clause_ok)
    }

    pub fn key(&self) -> String {
        format!("D={} eps={} p={}", self.d, eps_str(self.eps), self.p)
    }
}

impl Serialize for Record {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Record", 14)?;
        st.serialize_field("D", &self.d)?;
        st.serialize_field("eps", &self.eps)?;
        st.serialize_field("p", &self.p)?;
        st.serialize_field("q", &self.q)?;
        st.serialize_field("condition", self.condition.tag.name())?;
        st.serialize_field("subcase", &self.condition.subcase_string())?;
        st.serialize_field("dim_sel_phi", &self.dim_sel_phi)?;
        st.serialize_field("dim_sel_phihat", &self.dim_sel_phihat)?;
        st.serialize_field("expected_phi", &self.expected.as_ref().map(|e| e.dim_phi))?;
        st.serialize_field("expected_phihat", &self.expected.as_ref().map(|e| e.dim_phihat))?;
        st.serialize_field("identity_value", &self.identity_value)?;
        st.serialize_field(
            "expected_identity",
            &self.expected.as_ref().map(|e| e.clause.value()),
        )?;
        st.serialize_field("rank_lower", &self.rank_lower)?;
        st.serialize_field("match", &self.matches())?;
        st.end()
    }
}

/// Counts over the certificates of every decided class in a sweep.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CertificateStats {
    pub solvable: usize,
    pub solvable_verified: usize,
    pub exact: usize,
    pub insolvable: usize,
    pub insolvable_within_bound: usize,
    pub prescreened: usize,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub records: usize,
    pub applicable: usize,
    pub matched: usize,
    pub mismatches: Vec<String>,
    pub undecided: Vec<String>,
    pub by_condition: BTreeMap<String, usize>,
    pub certificates: CertificateStats,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PolicyView {
    pub depth: Option<u32>,
    pub prec: Option<u32>,
    pub height: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConformanceReport {
    pub schema_version: u32,
    pub policy: PolicyView,
    pub records: Vec<Record>,
    pub summary: Summary,
}

impl ConformanceReport {
    pub fn is_clean(&self) -> bool {
        self.summary.mismatches.is_empty() && self.summary.undecided.is_empty()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_tsv(&self) -> String {
        let mut out = format!("# schema_version={}\n", self.schema_version);
        out.push_str(
            "D\teps\tp\tq\tcondition\tsubcase\tdim_sel_phi\tdim_sel_phihat\texpected_phi\t\
             expected_phihat\tidentity_value\texpected_identity\trank_lower\tmatch\n",
        );
        let opt = |x: Option<usize>| x.map_or("-".to_string(), |v| v.to_string());
        for r in &self.records {
            let exp = r.expected.as_ref();
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.d,
                eps_str(r.eps),
                r.p,
                r.q,
                r.condition.tag,
                r.condition.subcase_string().unwrap_or_else(|| "-".into()),
                opt(r.dim_sel_phi),
                opt(r.dim_sel_phihat),
                opt(exp.map(|e| e.dim_phi)),
                opt(exp.map(|e| e.dim_phihat)),
                opt(r.identity_value),
                opt(exp.map(|e| e.clause.value())),
                opt(r.rank_lower),
                r.matches().map_or("-".to_string(), |m| m.to_string()),
            );
        }
        out
    }
}

/// A sweep result together with the full descent data behind each record.
pub struct SweepOutcome {
    pub report: ConformanceReport,
    /// Parallel to `report.records`; `None` when the descent was undecided.
    pub descents: Vec<Option<DescentReport>>,
}

fn certificate_line(curve: &CurveSpec, dir: Direction, class: &ClassReport, cert: &HenselCertificate) -> String {
    format!(
        "{} {} {} {} {} {} {:?} {} {} {:?} {:?}\n",
        curve.field.d(),
        curve.eps,
        curve.p,
        dir,
        class.class.expr,
        cert.place.label,
        cert.chart,
        cert.z,
        cert.w,
        cert.fval,
        cert.dval
    )
}

fn certificate_stats(descents: &[Option<DescentReport>]) -> CertificateStats {
    let mut st = CertificateStats::default();
    let mut hasher = Sha256::new();
    for rep in descents.iter().flatten() {
        for group in [&rep.phi, &rep.phihat] {
            for class in &group.classes {
                for (_, v) in &class.verdicts {
                    match v {
                        PlaceVerdict::Local(Verdict::Solvable(c)) => {
                            st.solvable += 1;
                            st.solvable_verified += c.verify() as usize;
                            st.exact += c.is_exact() as usize;
                            hasher.update(certificate_line(&rep.curve, group.direction, class, c));
                        }
                        PlaceVerdict::Local(Verdict::Insolvable {
                            depth,
                            bound,
                            prescreen,
                        }) => {
                            st.insolvable += 1;
                            st.insolvable_within_bound += (depth <= bound) as usize;
                            st.prescreened += *prescreen as usize;
                        }
                        _ => {}
                    }
                }
            }
        }
    }
    st.digest = hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();
    st
}

const C_HEADER_FLAG: &str = "condition C identity rows: the source labels this clause with \
condition (B); it is checked here under condition C (Q(sqrt(-2)), p = 5 mod 8)";

pub fn sweep(cfg: &SweepConfig) -> Result<SweepOutcome, VerifyError> {
    let pairs = twin_primes(cfg.p_max);
    for &p in &pairs {
        assert!(p == 3 || p % 3 == 2, "twin prime {p} > 3 must be 2 mod 3");
    }
    let mut jobs = Vec::new();
    for &field in &cfg.fields {
        for &eps in &cfg.eps {
            for &p in &pairs {
                let disc = field.disc();
                if disc % p as i64 == 0 || disc % (p + 2) as i64 == 0 {
                    continue;
                }
                jobs.push((field, eps, p));
            }
        }
    }
    let results: Vec<(Record, Option<DescentReport>)> = jobs
        .par_iter()
        .map(|&(field, eps, p)| run_one(field, eps, p, cfg))
        .collect::<Result<_, _>>()?;
    let (records, descents): (Vec<Record>, Vec<Option<DescentReport>>) = results.into_iter().unzip();

    let mut by_condition = BTreeMap::new();
    for r in &records {
        *by_condition.entry(r.condition.tag.name().to_string()).or_insert(0) += 1;
    }
    let applicable = records.iter().filter(|r| r.expected.is_some()).count();
    let matched = records.iter().filter(|r| r.matches() == Some(true)).count();
    let mismatches = records
        .iter()
        .filter(|r| r.matches() == Some(false) && r.undecided.is_none())
        .map(Record::key)
        .collect();
    let undecided = records
        .iter()
        .filter_map(|r| r.undecided.as_ref().map(|u| format!("{}: {u}", r.key())))
        .collect();
    let mut flags = Vec::new();
    if records.iter().any(|r| r.condition.tag == Condition::C) {
        flags.push(C_HEADER_FLAG.to_string());
    }
    let summary = Summary {
        records: records.len(),
        applicable,
        matched,
        mismatches,
        undecided,
        by_condition,
        certificates: certificate_stats(&descents),
        flags,
    };
    Ok(SweepOutcome {
        report: ConformanceReport {
            schema_version: SCHEMA_VERSION,
            policy: PolicyView {
                depth: cfg.policy.depth,
                prec: cfg.policy.prec,
                height: cfg.height,
            },
            records,
            summary,
        },
        descents,
    })
}

fn run_one(
    field: QuadField,
    eps: i64,
    p: u64,
    cfg: &SweepConfig,
) -> Result<(Record, Option<DescentReport>), VerifyError> {
    let curve = CurveSpec::new(field, p, eps)?;
    let condition = classify_condition(field, p);
    let expected = match expected_outcome(&condition, eps) {
        Ok(e) => Some(e),
        Err(VerifyError::OutsideScope(_)) => None,
        Err(e) => return Err(e),
    };
    let mut rec = Record {
        d: field.d(),
        eps,
        p,
        q: curve.q,
        condition,
        dim_sel_phi: None,
        dim_sel_phihat: None,
        expected,
        identity_value: None,
        rank_lower: None,
        undecided: None,
    };
    match descend(&curve, &cfg.policy, cfg.height) {
        Ok(rep) => {
            rec.dim_sel_phi = Some(rep.dim_phi());
            rec.dim_sel_phihat = Some(rep.dim_phihat());
            rec.identity_value = Some(rep.identity_value);
            rec.rank_lower = Some(rep.rank_lower());
            Ok((rec, Some(rep)))
        }
        Err(ShaRankError::Descent(e @ DescentError::Undecided { .. })) => {
            rec.undecided = Some(e.to_string());
            Ok((rec, None))
        }
        Err(e) => Err(e.into()),
    }
}

/// One class examined at every place of `S`, including places after the
/// first failure.
#[derive(Debug, Clone)]
pub struct Explanation {
    pub curve: CurveSpec,
    pub direction: Direction,
    pub generators: String,
    pub report: ClassReport,
    /// Verdicts at places the membership search skipped.
    pub extra: Vec<(String, Verdict)>,
}

pub fn explain(
    curve: &CurveSpec,
    dir: Direction,
    expr: &str,
    policy: &SearchPolicy,
) -> Result<Explanation, VerifyError> {
    let places = curve.place_set()?;
    let ks = ks2(&places);
    let mask = ks.parse(expr)?;
    let known = known_members(&ks, curve, dir);
    let report = classify_class(&ks, mask, curve, dir, &known, policy)?;
    let extra = report
        .verdicts
        .iter()
        .filter(|(_, v)| matches!(v, PlaceVerdict::Skipped))
        .filter_map(|(label, _)| places.find(label))
        .map(|pl| {
            (
                pl.label.clone(),
                quartic_locally_solvable(&report.hom_space.quartic, pl, policy),
            )
        })
        .collect();
    Ok(Explanation {
        curve: *curve,
        direction: dir,
        generators: ks.labels(),
        report,
        extra,
    })
}

fn verdict_json(v: &Verdict) -> serde_json::Value {
    use serde_json::json;
    match v {
        Verdict::Solvable(c) => json!({
            "verdict": "solvable",
            "chart": c.chart,
            "z": c.z.to_string(),
            "w": c.w.to_string(),
            "v_f": c.fval,
            "v_2w": c.dval,
            "exact": c.is_exact(),
            "verified": c.verify(),
        }),
        Verdict::Insolvable {
            depth,
            bound,
            prescreen,
        } => json!({
            "verdict": "insolvable",
            "depth": depth,
            "bound": bound,
            "prescreen": prescreen,
        }),
        Verdict::Undecided { bound } => json!({ "verdict": "undecided", "bound": bound }),
    }
}

fn verdict_text(v: &Verdict) -> String {
    match v {
        Verdict::Solvable(c) => {
            let val = |x: Option<u32>| x.map_or("inf".to_string(), |v| v.to_string());
            format!(
                "solvable   {:?} z = {}, w = {}; v(f) = {}, v(2w) = {}{}",
                c.chart,
                c.z,
                c.w,
                val(c.fval),
                val(c.dval),
                if c.verify() { "" } else { "  [FAILS RECHECK]" }
            )
        }
        Verdict::Insolvable {
            depth,
            bound,
            prescreen: true,
        } => format!("insolvable (valuation parity) depth {depth} / bound {bound}"),
        Verdict::Insolvable { depth, bound, .. } => {
            format!("insolvable  all discs refuted by depth {depth} (bound {bound})")
        }
        Verdict::Undecided { bound } => format!("undecided  depth bound {bound} reached"),
    }
}

impl Explanation {
    fn rows(&self) -> Vec<(String, Option<&Verdict>, bool)> {
        self.report
            .verdicts
            .iter()
            .map(|(label, v)| match v {
                PlaceVerdict::Local(v) => (label.clone(), Some(v), false),
                PlaceVerdict::Archimedean => (label.clone(), None, false),
                PlaceVerdict::Skipped => {
                    let extra = self.extra.iter().find(|(l, _)| l == label).map(|(_, v)| v);
                    (label.clone(), extra, true)
                }
            })
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::json;
        let h = &self.report.hom_space;
        let places: Vec<_> = self
            .rows()
            .into_iter()
            .map(|(label, v, after)| {
                let mut obj = match v {
                    Some(v) => verdict_json(v),
                    None if label == "inf" && self.report.member => json!({ "verdict": "solvable" }),
                    None => json!({ "verdict": "not evaluated" }),
                };
                obj["place"] = json!(label);
                obj["after_rejection"] = json!(after);
                obj
            })
            .collect();
        json!({
            "D": self.curve.field.d(),
            "eps": self.curve.eps,
            "p": self.curve.p,
            "q": self.curve.q,
            "direction": self.direction,
            "class": self.report.class.expr,
            "rep": self.report.class.rep.to_string(),
            "generators": self.generators,
            "member": self.report.member,
            "known_member": self.report.known_member,
            "normalization": h.normalization,
            "quartic": h.quartic.scaled().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "places": places,
        })
    }
}

impl fmt::Display for Explanation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.curve;
        let h = &self.report.hom_space;
        writeln!(
            f,
            "K = {}, eps = {}, p = {}, q = {}, direction {}",
            c.field,
            eps_str(c.eps),
            c.p,
            c.q,
            self.direction
        )?;
        writeln!(f, "generators of K(S,2): {}", self.generators)?;
        writeln!(
            f,
            "class d = {} (rep {}): {}",
            self.report.class.expr,
            self.report.class.rep,
            if self.report.member { "member" } else { "not a member" }
        )?;
        let q = h.quartic.scaled();
        writeln!(
            f,
            "W^2 = {} + ({})z^2 + ({})z^4  [{}]",
            q[0], q[2], q[4], h.normalization
        )?;
        if self.report.known_member {
            writeln!(f, "witnessed by a global point")?;
        }
        for (label, v, after) in self.rows() {
            let text = match v {
                Some(v) => verdict_text(v),
                None if self.report.member => "solvable   (complex place)".to_string(),
                None => "not evaluated".to_string(),
            };
            let note = if after { "  (after rejection)" } else { "" };
            writeln!(f, "  {label:<8} {text}{note}")?;
        }
        Ok(())
    }
}

/// Human-readable summary of a full descent.
pub fn render_descent(rep: &DescentReport, dir: Option<Direction>) -> String {
    let c = &rep.curve;
    let tag = classify_condition(c.field, c.p);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "K = {}, eps = {}, p = {}, q = {}, condition {}{}",
        c.field,
        eps_str(c.eps),
        c.p,
        c.q,
        tag.tag,
        tag.subcase_string().map(|s| format!(" ({s})")).unwrap_or_default()
    );
    let _ = writeln!(out, "generators of K(S,2): {}", rep.phi.ks2.labels());
    for group in [&rep.phi, &rep.phihat] {
        if dir.is_some_and(|d| d != group.direction) {
            continue;
        }
        let members: Vec<String> = group.members.iter().map(|&m| group.ks2.expr(m)).collect();
        let _ = writeln!(
            out,
            "S^({}): dim {}, basis [{}], members {{{}}}",
            group.direction,
            group.dim(),
            group.basis_exprs().join(", "),
            members.join(", ")
        );
    }
    let _ = writeln!(out, "{}", rep.clause.describe());
    let _ = writeln!(
        out,
        "rank bounds: {} <= rank <= {} (points up to height {})",
        rep.rank_lower(),
        rep.rank_upper(),
        rep.search.height
    );
    if let Ok(exp) = expected_outcome(&tag, c.eps) {
        let ok = rep.dim_phi() == exp.dim_phi && rep.dim_phihat() == exp.dim_phihat;
        let _ = writeln!(
            out,
            "expected ({}): dims ({}, {}), {} -> {}",
            exp.row,
            exp.dim_phi,
            exp.dim_phihat,
            exp.clause.describe(),
            if ok { "match" } else { "MISMATCH" }
        );
    }
    out
}

pub fn check_prime_pair(p: u64) -> bool {
    is_prime(p) && is_prime(p + 2)
}
