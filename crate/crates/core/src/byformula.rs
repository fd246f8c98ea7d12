//! The conjectural intersection tally for a cyclic quartic CM field.
//!
//! For each Hirzebruch–Zagier index m = (D - x^2)/4 the local sums
//! b_m(p) run over t = (n + m sqrt(D~)) / 2D with t in the inverse
//! relative different; the final exponent of log p is half their total.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cmfield::CMField;
use crate::exactmath::int::{is_prime, isqrt};
use crate::exactmath::{frac, rat, Rat};
use crate::quadfield::{PrimeKind, QuadElem, QuadIdealFactored, QuadPrime};

/// Exact rational exponent of log p for each prime p.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrimeTally(BTreeMap<i128, Rat>);

impl PrimeTally {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(it: impl IntoIterator<Item = (i128, Rat)>) -> Self {
        let mut t = Self::new();
        for (p, e) in it {
            t.add(p, e);
        }
        t
    }

    pub fn from_ints(it: impl IntoIterator<Item = (i128, i128)>) -> Self {
        Self::from_pairs(it.into_iter().map(|(p, e)| (p, rat(e))))
    }

    /// Add to the exponent at p; zero entries are dropped.
    pub fn add(&mut self, p: i128, e: Rat) {
        let v = self.0.entry(p).or_insert_with(Rat::zero);
        *v += e;
        if v.is_zero() {
            self.0.remove(&p);
        }
    }

    pub fn get(&self, p: i128) -> Rat {
        self.0.get(&p).copied().unwrap_or_else(Rat::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&i128, &Rat)> {
        self.0.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn primes(&self) -> impl Iterator<Item = i128> + '_ {
        self.0.keys().copied()
    }

    /// Entries with p != 2.
    pub fn odd_part(&self) -> PrimeTally {
        PrimeTally(self.0.iter().filter(|(p, _)| **p != 2).map(|(p, e)| (*p, *e)).collect())
    }

    pub fn restrict(&self, bound: i128) -> PrimeTally {
        PrimeTally(self.0.range(..=bound).map(|(p, e)| (*p, *e)).collect())
    }
}

impl fmt::Display for PrimeTally {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(p, e)| if e.is_one() { p.to_string() } else { format!("{p}^{e}") })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl Serialize for PrimeTally {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let m: BTreeMap<String, String> = self.0.iter().map(|(p, e)| (p.to_string(), e.to_string())).collect();
        m.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PrimeTally {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let m = BTreeMap::<String, String>::deserialize(d)?;
        let mut out = PrimeTally::new();
        for (k, v) in m {
            let p: i128 = k.parse().map_err(D::Error::custom)?;
            let e: Rat = v.parse().map_err(|_| D::Error::custom(format!("bad exponent {v:?}")))?;
            out.add(p, e);
        }
        Ok(out)
    }
}

/// One nonzero B_t(P) contribution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BYTermRecord {
    pub m: i128,
    pub x: i128,
    pub n: i128,
    pub prime: QuadPrime,
    pub ord_t: i64,
    pub rho: u64,
    pub f: u32,
    #[serde(with = "rat_string")]
    pub contribution: Rat,
}

/// One index m = (D - x^2)/4 of the pullback sum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MIndex {
    pub m: i128,
    pub x: i128,
    /// Whether m is a rational prime splitting in F.
    pub split_prime: bool,
}

pub(crate) mod rat_string {
    use super::Rat;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(|_| serde::de::Error::custom(format!("bad rational {s:?}")))
    }
}

/// All m = (D - x^2)/4 > 0 with x >= 0 and x^2 = D mod 4, largest m first.
pub fn enumerate_m(disc: i128) -> Vec<(i128, i128)> {
    let mut out = Vec::new();
    let mut x = 0;
    while x * x < disc {
        if (disc - x * x) % 4 == 0 {
            out.push(((disc - x * x) / 4, x));
        }
        x += 1;
    }
    out
}

/// The m-indices of K's real subfield with their split-prime flag.
pub fn m_indices(k: &CMField) -> Vec<MIndex> {
    let f = k.real_field();
    enumerate_m(k.disc())
        .into_iter()
        .map(|(m, x)| {
            let split_prime =
                is_prime(m) && f.split_type(m).map(|v| v[0].kind == PrimeKind::Split).unwrap_or(false);
            MIndex { m, x, split_prime }
        })
        .collect()
}

/// t = (n + m sqrt(D~)) / 2D as an element of F.
pub fn t_element(k: &CMField, m: i128, n: i128) -> QuadElem {
    let two_d = rat(2 * k.disc());
    (QuadElem::from_int(n) + k.sqrt_dtilde().scale(rat(m))).scale(Rat::one() / two_d)
}

/// Whether the (m, n) pair passes the optional 16-adic filter.
pub fn passes_mod16(m: i128, n: i128) -> bool {
    (8 * m + n).rem_euclid(16) == 0
}

/// Every nonzero contribution B_t(P) for one m, over all admissible n and
/// all primes P with norm at most `prime_bound` (no bound if `None`).
pub fn m_terms(k: &CMField, m: i128, x: i128, correction: bool, prime_bound: Option<i128>) -> Vec<BYTermRecord> {
    let f = k.real_field();
    let limit = m * m * k.dtilde();
    let nmax = if limit > 0 { isqrt(limit - 1) } else { return Vec::new() };
    let mut out = Vec::new();
    for n in -nmax..=nmax {
        if correction && !passes_mod16(m, n) {
            continue;
        }
        let t = t_element(k, m, n);
        if t.is_zero() {
            continue;
        }
        let tt = f.ideal_of_element(&t).expect("t is nonzero");
        let td = tt.mul(k.relative_discriminant());
        if !td.is_integral() {
            continue;
        }
        for (prime, &e) in td.iter() {
            if e < 1 || prime_bound.is_some_and(|b| prime.p > b) {
                continue;
            }
            if k.splitting_in_k(prime) == PrimeKind::Split {
                continue;
            }
            let rho = k.rho(&td.mul(&QuadIdealFactored::prime(*prime).inverse()));
            if rho == 0 {
                continue;
            }
            let ord_t = tt.exponent(prime);
            let fdeg = prime.residue_degree();
            let contribution = rat(i128::from(ord_t + 1)) * rat(i128::from(rho)) * rat(i128::from(fdeg));
            if contribution.is_zero() {
                continue;
            }
            out.push(BYTermRecord { m, x, n, prime: *prime, ord_t, rho, f: fdeg, contribution });
        }
    }
    out
}

/// The coefficient of log p in b_m(p).
pub fn b_m(k: &CMField, m: i128, p: i128, correction: bool) -> Rat {
    m_terms(k, m, 0, correction, Some(p))
        .iter()
        .filter(|r| r.prime.p == p)
        .map(|r| r.contribution)
        .sum()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ByResult {
    pub tally: PrimeTally,
    pub terms: Vec<BYTermRecord>,
    pub m_values: Vec<MIndex>,
}

impl ByResult {
    /// Whether any term came from the x = 0 index.
    pub fn uses_x_zero(&self) -> bool {
        self.terms.iter().any(|t| t.x == 0)
    }

    /// Rendering as a product of (p^inner)^outer with outer = (ord_P t + 1)/2.
    pub fn render(&self) -> String {
        render_terms(&self.terms)
    }
}

/// e_p = 1/2 sum_m b_m(p) for all p up to `prime_bound`.
pub fn predicted_tally(k: &CMField, prime_bound: i128, correction: bool) -> ByResult {
    let m_values = m_indices(k);
    let mut terms = Vec::new();
    for mi in &m_values {
        terms.extend(m_terms(k, mi.m, mi.x, correction, Some(prime_bound)));
    }
    let mut tally = PrimeTally::new();
    for t in &terms {
        tally.add(t.prime.p, t.contribution * frac(1, 2));
    }
    ByResult { tally, terms, m_values }
}

/// Group terms by (p, ord_P t) and print each group as (p^inner)^outer.
pub fn render_terms(terms: &[BYTermRecord]) -> String {
    let mut groups: BTreeMap<(i128, i64), Rat> = BTreeMap::new();
    for t in terms {
        *groups.entry((t.prime.p, t.ord_t)).or_insert_with(Rat::zero) += rat(i128::from(t.rho)) * rat(i128::from(t.f));
    }
    let parts: Vec<String> = groups
        .into_iter()
        .filter(|(_, inner)| !inner.is_zero())
        .map(|((p, ord), inner)| {
            let outer = frac(i128::from(ord) + 1, 2);
            if outer.is_one() {
                format!("{p}^{inner}")
            } else if outer.is_integer() && outer.is_positive() {
                format!("({p}^{inner})^{outer}")
            } else {
                format!("({p}^{inner})^({outer})")
            }
        })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join(" ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dt29() -> CMField {
        CMField::from_surd(29, -29, 2, 11, -1, -35, 3).unwrap()
    }

    #[test]
    fn m_ranges() {
        assert_eq!(enumerate_m(29), vec![(7, 1), (5, 3), (1, 5)]);
        assert_eq!(enumerate_m(5), vec![(1, 1)]);
        assert_eq!(enumerate_m(8), vec![(2, 0), (1, 2)]);
    }

    #[test]
    fn cyclotomic_b_m_vanishes() {
        let k = CMField::from_surd(5, -10, -2, -1, -1, -1, 2).unwrap();
        for p in crate::exactmath::int::primes_up_to(100) {
            assert!(b_m(&k, 1, p, false).is_zero());
        }
    }

    #[test]
    fn dt29_b_m_sum() {
        let k = dt29();
        let total: Rat = [1, 5, 7].iter().map(|&m| b_m(&k, m, 5, false)).sum();
        assert_eq!(total, rat(4));
        let r = predicted_tally(&k, 150, false);
        assert_eq!(r.tally, PrimeTally::from_ints([(5, 2)]));
        assert_eq!(r.render(), "5^2");
    }

    #[test]
    fn empty_n_range() {
        let k = dt29();
        assert!(m_terms(&k, 0, 0, false, None).is_empty());
    }

    #[test]
    fn tally_serializes_as_fraction_strings() {
        let t = PrimeTally::from_pairs([(2, frac(-3, 2)), (11, rat(2))]);
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"11":"2","2":"-3/2"}"#);
        assert_eq!(serde_json::from_str::<PrimeTally>(&s).unwrap(), t);
    }
}
