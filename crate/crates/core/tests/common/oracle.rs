//! Brute-force local solvability of `W² = f(z)` over `K_v`, written against
//! plain `i128` residue arithmetic in `O_K / ℓ^M` so that it shares nothing
//! with the library solver beyond the choice of prime element.
//!
//! At level `N` every class `z mod π^N` is enumerated afresh (no pruning
//! carried over from level `N − 1`). A class is settled once `f(z)` has
//! valuation `k < N` and either `k` is odd or the unit part is known modulo
//! `π^{2e+1}`.

use isodescent::qfield::{FinitePlace, QInt};
use num_traits::ToPrimitive;

type El = (i128, i128);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Split,
    Inert,
    Ramified,
}

pub struct Model {
    ell: i128,
    m: u32,
    modulus: i128,
    tr: i128,
    n: i128,
    kind: Kind,
    /// Image of `ω` in `Z/ℓ^M` under the embedding with `π ↦ 0` (split only).
    root: i128,
    pi: El,
    e: u32,
    digits: Vec<El>,
}

fn v_ell(x: i128, ell: i128, cap: u32) -> u32 {
    if x == 0 {
        return cap;
    }
    let mut v = 0;
    let mut y = x;
    while y % ell == 0 && v < cap {
        y /= ell;
        v += 1;
    }
    v
}

impl Model {
    pub fn new(place: &FinitePlace) -> Model {
        let field = place.field();
        let ell = place.ell as i128;
        let mut m = 1;
        while ell.pow(m + 1) < (1i128 << 61) {
            m += 1;
        }
        let modulus = ell.pow(m);
        let tr = field.omega_trace() as i128;
        let n = field.omega_norm() as i128;
        let kind = match place.split {
            "split" => Kind::Split,
            "inert" => Kind::Inert,
            _ => Kind::Ramified,
        };
        let g = &place.generator;
        let pi = match kind {
            Kind::Inert => (ell, 0),
            _ => (g.a.to_i128().unwrap(), g.b.to_i128().unwrap()),
        };
        let mut model = Model {
            ell,
            m,
            modulus,
            tr,
            n,
            kind,
            root: 0,
            pi,
            e: if kind == Kind::Ramified { 2 } else { 1 },
            digits: Vec::new(),
        };
        if kind == Kind::Split {
            // digit-by-digit search for the root of x² − tr·x + n with a + b·x ≡ 0 (mod ℓ)
            let md = |x: i128, k: i128| x.rem_euclid(k);
            let mut r = (0..ell)
                .find(|&r| md(r * r - tr * r + n, ell) == 0 && md(pi.0 + pi.1 * r, ell) == 0)
                .expect("split place has a root");
            let mut pk = ell;
            for _ in 1..m {
                let next = pk * ell;
                r = (0..ell)
                    .map(|t| r + t * pk)
                    .find(|&x| md(x * x - tr * x + n, next) == 0)
                    .expect("simple root lifts");
                pk = next;
            }
            model.root = r;
        }
        model.digits = match kind {
            Kind::Split => (0..ell).map(|t| (t, 0)).collect(),
            Kind::Inert => (0..ell).flat_map(|a| (0..ell).map(move |b| (a, b))).collect(),
            Kind::Ramified => vec![(0, 0), (1, 0)],
        };
        model
    }

    /// Usable precision in powers of `π`.
    pub fn cap(&self) -> u32 {
        self.m
    }

    pub fn residue_size(&self) -> usize {
        self.digits.len()
    }

    fn red(&self, x: i128) -> i128 {
        x.rem_euclid(self.modulus)
    }

    fn mulm(&self, x: i128, y: i128) -> i128 {
        self.red(self.red(x) * self.red(y))
    }

    pub fn el(&self, x: &QInt) -> El {
        let md = |b: &num_bigint::BigInt| {
            let m = num_bigint::BigInt::from(self.modulus);
            ((b % &m + &m) % &m).to_i128().unwrap()
        };
        (md(&x.a), md(&x.b))
    }

    fn add(&self, x: El, y: El) -> El {
        (self.red(x.0 + y.0), self.red(x.1 + y.1))
    }

    fn sub(&self, x: El, y: El) -> El {
        (self.red(x.0 - y.0), self.red(x.1 - y.1))
    }

    fn mul(&self, x: El, y: El) -> El {
        let ac = self.mulm(x.0, y.0);
        let bd = self.mulm(x.1, y.1);
        let ad = self.mulm(x.0, y.1);
        let bc = self.mulm(x.1, y.0);
        // ω² = tr·ω − n
        (
            self.red(ac - self.mulm(self.n, bd)),
            self.red(ad + bc + self.mulm(self.tr, bd)),
        )
    }

    fn pow(&self, x: El, k: u32) -> El {
        (0..k).fold((1, 0), |acc, _| self.mul(acc, x))
    }

    pub fn val(&self, x: El) -> u32 {
        match self.kind {
            Kind::Split => {
                let t = self.red(x.0 + self.mulm(x.1, self.root));
                v_ell(t, self.ell, self.m)
            }
            Kind::Inert => v_ell(x.0, self.ell, self.m).min(v_ell(x.1, self.ell, self.m)),
            Kind::Ramified => {
                let nm = self.red(
                    self.mulm(x.0, x.0) + self.mulm(self.tr, self.mulm(x.0, x.1))
                        + self.mulm(self.n, self.mulm(x.1, x.1)),
                );
                v_ell(nm, self.ell, self.m)
            }
        }
    }

    /// All classes of `O / π^k` as sums `Σ dᵢ πⁱ`.
    pub fn reps(&self, k: u32) -> Vec<El> {
        let mut out = vec![(0, 0)];
        let mut pik = (1, 0);
        for _ in 0..k {
            let mut next = Vec::with_capacity(out.len() * self.digits.len());
            for &d in &self.digits {
                let t = self.mul(d, pik);
                for &r in &out {
                    next.push(self.add(r, t));
                }
            }
            out = next;
            pik = self.mul(pik, self.pi);
        }
        out
    }

    fn eval(&self, f: &[El; 5], z: El) -> El {
        f.iter()
            .rev()
            .fold((0, 0), |acc, &c| self.add(self.mul(acc, z), c))
    }

    /// Whether `x` with even valuation `k` is a square, given `x` modulo at
    /// least `π^{k+2e+1}`.
    fn is_square(&self, x: El, k: u32, unit_squares: &[El]) -> bool {
        let scale = self.pow(self.pi, k);
        unit_squares
            .iter()
            .any(|&s| self.val(self.sub(x, self.mul(scale, s))) >= k + 2 * self.e + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleVerdict {
    Solvable,
    Insolvable,
    /// Not settled within the level or enumeration limits.
    Open,
}

/// Decides `W² = f(z)` over `K_v` for `z ∈ O_v` and `z = 1/t`, `t ∈ πO_v`,
/// examining levels `N = 1..=max_level` with at most `max_classes` classes
/// per level.
pub fn solvable(place: &FinitePlace, f: &[QInt; 5], max_level: u32, max_classes: usize) -> OracleVerdict {
    let md = Model::new(place);
    let fe: [El; 5] = std::array::from_fn(|i| md.el(&f[i]));
    let mut ge = fe;
    ge.reverse();
    let w = 2 * md.e + 1;
    let unit_squares: Vec<El> = md
        .reps(w)
        .into_iter()
        .filter(|&t| md.val(t) == 0)
        .map(|t| md.mul(t, t))
        .collect();
    let top = max_level.min(md.cap().saturating_sub(w + 1));
    for level in 1..=top {
        if md.residue_size().pow(level) * 2 > max_classes {
            return OracleVerdict::Open;
        }
        let affine = md.reps(level);
        let reversed: Vec<El> = md
            .reps(level - 1)
            .into_iter()
            .map(|s| md.mul(s, md.pi))
            .collect();
        let mut settled = true;
        for (poly, zs) in [(&fe, &affine), (&ge, &reversed)] {
            for &z in zs {
                let x = md.eval(poly, z);
                let k = md.val(x);
                if k >= level {
                    settled = false;
                } else if k % 2 == 1 {
                    // odd valuation on the whole class
                } else if level - k >= w {
                    if md.is_square(x, k, &unit_squares) {
                        return OracleVerdict::Solvable;
                    }
                } else {
                    settled = false;
                }
            }
        }
        if settled {
            return OracleVerdict::Insolvable;
        }
    }
    OracleVerdict::Open
}
