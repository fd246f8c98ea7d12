//! Arithmetic in a real quadratic field F = Q(sqrt d).
//!
//! Elements are stored as `x + y sqrt(d)` with rational `x, y`; the integral
//! basis is `(1, omega)` with `omega = (D + sqrt D) / 2`. Ideals are never
//! reduced to generators: they live in factored form as prime-to-exponent
//! maps, which is all the intersection formula needs.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactmath::int::{self, factor, is_prime, kronecker, mod_pow};
use crate::exactmath::{lcm_of_denominators, rat, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not a squarefree integer greater than 1")]
    NotSquarefree(i128),
    #[error("{0} is not prime")]
    InvalidPrime(i128),
    #[error("valuation of zero")]
    ZeroElement,
}

/// `x + y sqrt(d)`; the field is implicit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuadElem {
    pub x: Rat,
    pub y: Rat,
}

impl QuadElem {
    pub fn new(x: Rat, y: Rat) -> Self {
        QuadElem { x, y }
    }

    pub fn from_int(n: i128) -> Self {
        QuadElem { x: rat(n), y: Rat::zero() }
    }

    pub fn conj(&self) -> Self {
        QuadElem { x: self.x, y: -self.y }
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn scale(&self, c: Rat) -> Self {
        QuadElem { x: self.x * c, y: self.y * c }
    }
}

impl Add for QuadElem {
    type Output = QuadElem;
    fn add(self, o: QuadElem) -> QuadElem {
        QuadElem { x: self.x + o.x, y: self.y + o.y }
    }
}

impl Sub for QuadElem {
    type Output = QuadElem;
    fn sub(self, o: QuadElem) -> QuadElem {
        QuadElem { x: self.x - o.x, y: self.y - o.y }
    }
}

impl Neg for QuadElem {
    type Output = QuadElem;
    fn neg(self) -> QuadElem {
        QuadElem { x: -self.x, y: -self.y }
    }
}

impl Mul<Rat> for QuadElem {
    type Output = QuadElem;
    fn mul(self, c: Rat) -> QuadElem {
        self.scale(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrimeKind {
    Split,
    Inert,
    Ramified,
}

/// A prime ideal of O_F.
///
/// `residue` is the image of omega in the residue field for degree-one
/// primes. The two primes above a split p get labels 0 and 1 in order of
/// increasing residue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct QuadPrime {
    pub p: i128,
    pub kind: PrimeKind,
    pub label: u8,
    pub residue: Option<i128>,
}

impl QuadPrime {
    pub fn residue_degree(&self) -> u32 {
        match self.kind {
            PrimeKind::Inert => 2,
            _ => 1,
        }
    }

    pub fn ramification_index(&self) -> u32 {
        match self.kind {
            PrimeKind::Ramified => 2,
            _ => 1,
        }
    }

    /// Absolute norm |O_F / P|.
    pub fn norm(&self) -> i128 {
        self.p.pow(self.residue_degree())
    }
}

impl fmt::Display for QuadPrime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            PrimeKind::Split => write!(f, "P{}_{}", self.p, self.label),
            _ => write!(f, "P{}", self.p),
        }
    }
}

/// A fractional ideal as a finitely supported prime-to-exponent map.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct QuadIdealFactored(BTreeMap<QuadPrime, i64>);

impl QuadIdealFactored {
    pub fn unit() -> Self {
        Self::default()
    }

    pub fn prime(p: QuadPrime) -> Self {
        Self::from_exponents([(p, 1)])
    }

    pub fn from_exponents(it: impl IntoIterator<Item = (QuadPrime, i64)>) -> Self {
        let mut out = Self::default();
        for (p, e) in it {
            out.add_exponent(p, e);
        }
        out
    }

    fn add_exponent(&mut self, p: QuadPrime, e: i64) {
        let entry = self.0.entry(p).or_insert(0);
        *entry += e;
        if *entry == 0 {
            self.0.remove(&p);
        }
    }

    pub fn exponent(&self, p: &QuadPrime) -> i64 {
        self.0.get(p).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&QuadPrime, &i64)> {
        self.0.iter()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (p, e) in &other.0 {
            out.add_exponent(*p, *e);
        }
        out
    }

    pub fn inverse(&self) -> Self {
        QuadIdealFactored(self.0.iter().map(|(p, e)| (*p, -e)).collect())
    }

    pub fn is_integral(&self) -> bool {
        self.0.values().all(|&e| e >= 0)
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    /// Absolute norm as a rational number.
    pub fn norm(&self) -> Rat {
        self.0.iter().fold(Rat::one(), |acc, (p, &e)| {
            let n = rat(p.norm());
            if e >= 0 {
                acc * n.pow(e as i32)
            } else {
                acc / n.pow((-e) as i32)
            }
        })
    }
}

impl fmt::Display for QuadIdealFactored {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "(1)");
        }
        let parts: Vec<String> = self.0.iter().map(|(p, e)| format!("{p}^{e}")).collect();
        write!(f, "{}", parts.join("*"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadField {
    d: i128,
    disc: i128,
}

impl QuadField {
    pub fn new(d: i128) -> Result<Self, FieldError> {
        if d <= 1 || !int::is_squarefree(d) {
            return Err(FieldError::NotSquarefree(d));
        }
        let disc = if d.mod_floor(&4) == 1 { d } else { 4 * d };
        Ok(QuadField { d, disc })
    }

    pub fn d(&self) -> i128 {
        self.d
    }

    /// Field discriminant D.
    pub fn disc(&self) -> i128 {
        self.disc
    }

    /// Norm of omega, (D^2 - D) / 4.
    pub fn omega_norm(&self) -> i128 {
        (self.disc * self.disc - self.disc) / 4
    }

    pub fn omega(&self) -> QuadElem {
        self.from_omega_coords(Rat::zero(), Rat::one())
    }

    pub fn sqrt_disc(&self) -> QuadElem {
        let c = if self.disc == self.d { 1 } else { 2 };
        QuadElem::new(Rat::zero(), rat(c))
    }

    pub fn mul(&self, a: &QuadElem, b: &QuadElem) -> QuadElem {
        QuadElem {
            x: a.x * b.x + rat(self.d) * a.y * b.y,
            y: a.x * b.y + a.y * b.x,
        }
    }

    pub fn pow(&self, a: &QuadElem, e: u32) -> QuadElem {
        (0..e).fold(QuadElem::from_int(1), |acc, _| self.mul(&acc, a))
    }

    pub fn norm(&self, a: &QuadElem) -> Rat {
        a.x * a.x - rat(self.d) * a.y * a.y
    }

    pub fn trace(&self, a: &QuadElem) -> Rat {
        a.x * rat(2)
    }

    pub fn inv(&self, a: &QuadElem) -> Result<QuadElem, FieldError> {
        if a.is_zero() {
            return Err(FieldError::ZeroElement);
        }
        Ok(a.conj().scale(self.norm(a).recip()))
    }

    pub fn div(&self, a: &QuadElem, b: &QuadElem) -> Result<QuadElem, FieldError> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    /// Coordinates `(u, v)` with `t = u + v omega`.
    pub fn to_omega_coords(&self, t: &QuadElem) -> (Rat, Rat) {
        if self.disc == self.d {
            // sqrt d = 2 omega - d
            (t.x - t.y * rat(self.d), t.y * rat(2))
        } else {
            // sqrt d = omega - 2d
            (t.x - t.y * rat(2 * self.d), t.y)
        }
    }

    pub fn from_omega_coords(&self, u: Rat, v: Rat) -> QuadElem {
        if self.disc == self.d {
            QuadElem::new(u + v * Rat::new(self.d, 2), v / rat(2))
        } else {
            QuadElem::new(u + v * rat(2 * self.d), v)
        }
    }

    pub fn from_omega_ints(&self, u: i128, v: i128) -> QuadElem {
        self.from_omega_coords(rat(u), rat(v))
    }

    pub fn is_integral(&self, t: &QuadElem) -> bool {
        let (u, v) = self.to_omega_coords(t);
        u.is_integer() && v.is_integer()
    }

    /// Both real embeddings positive, decided by exact sign comparisons.
    pub fn is_totally_positive(&self, t: &QuadElem) -> bool {
        // x + y sqrt d > 0 and x - y sqrt d > 0  <=>  x > 0 and x^2 > d y^2
        t.x.is_positive() && t.x * t.x > rat(self.d) * t.y * t.y
    }

    /// Sign of x + y sqrt(d) under the embedding sqrt(d) > 0.
    pub fn sign(&self, t: &QuadElem) -> i32 {
        let (xs, ys) = (sgn(&t.x), sgn(&t.y));
        if xs == ys || ys == 0 {
            return xs;
        }
        if xs == 0 {
            return ys;
        }
        let lhs = t.x * t.x;
        let rhs = rat(self.d) * t.y * t.y;
        match lhs.cmp(&rhs) {
            std::cmp::Ordering::Greater => xs,
            std::cmp::Ordering::Less => ys,
            std::cmp::Ordering::Equal => 0,
        }
    }

    /// A square root of `t` in F, if one exists.
    pub fn sqrt(&self, t: &QuadElem) -> Option<QuadElem> {
        if t.is_zero() {
            return Some(*t);
        }
        let n = self.norm(t);
        let s = rational_sqrt(&n)?;
        for cand in [(t.x + s) / rat(2), (t.x - s) / rat(2)] {
            if let Some(u) = rational_sqrt(&cand) {
                if !u.is_zero() {
                    let r = QuadElem::new(u, t.y / (u * rat(2)));
                    if self.mul(&r, &r) == *t {
                        return Some(r);
                    }
                }
            }
            // purely irrational root v sqrt d
            if let Some(v) = rational_sqrt(&(cand / rat(self.d))) {
                let r = QuadElem::new(Rat::zero(), v);
                if self.mul(&r, &r) == *t {
                    return Some(r);
                }
            }
        }
        None
    }

    /// Primes of O_F above p with deterministic labels.
    pub fn split_type(&self, p: i128) -> Result<Vec<QuadPrime>, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::InvalidPrime(p));
        }
        let roots = self.omega_roots_mod(p);
        Ok(match kronecker(self.disc, p) {
            1 => roots
                .iter()
                .enumerate()
                .map(|(i, &r)| QuadPrime { p, kind: PrimeKind::Split, label: i as u8, residue: Some(r) })
                .collect(),
            -1 => vec![QuadPrime { p, kind: PrimeKind::Inert, label: 0, residue: None }],
            _ => vec![QuadPrime { p, kind: PrimeKind::Ramified, label: 0, residue: Some(roots[0]) }],
        })
    }

    fn omega_roots_mod(&self, p: i128) -> Vec<i128> {
        let nw = self.omega_norm();
        (0..p)
            .filter(|&r| (r * r - self.disc * r + nw).mod_floor(&p) == 0)
            .collect()
    }

    /// Integral representative `A + B omega` and rational scale: t = (A + B omega) / c.
    fn integral_parts(&self, t: &QuadElem) -> (i128, i128, i128) {
        let (u, v) = self.to_omega_coords(t);
        let c = lcm_of_denominators(&[u, v]);
        ((u * rat(c)).to_integer(), (v * rat(c)).to_integer(), c)
    }

    fn integral_valuation(&self, a: i128, b: i128, prime: &QuadPrime) -> i64 {
        let p = prime.p;
        let g = (if a == 0 { u32::MAX } else { int::ord(p, a) }).min(if b == 0 { u32::MAX } else { int::ord(p, b) });
        let scale = p.pow(g);
        let (a1, b1) = (a / scale, b / scale);
        let n1 = a1 * a1 + self.disc * a1 * b1 + self.omega_norm() * b1 * b1;
        let g = g as i64;
        match prime.kind {
            PrimeKind::Inert => g,
            PrimeKind::Ramified => 2 * g + i64::from(n1 % p == 0),
            PrimeKind::Split => {
                let r = prime.residue.expect("split prime has a residue");
                if (a1 + b1 * r).mod_floor(&p) == 0 {
                    g + int::ord(p, n1) as i64
                } else {
                    g
                }
            }
        }
    }

    /// P-adic valuation of a nonzero element.
    pub fn valuation(&self, t: &QuadElem, prime: &QuadPrime) -> Result<i64, FieldError> {
        if t.is_zero() {
            return Err(FieldError::ZeroElement);
        }
        let (a, b, c) = self.integral_parts(t);
        let den = int::ord(prime.p, c) as i64 * prime.ramification_index() as i64;
        Ok(self.integral_valuation(a, b, prime) - den)
    }

    /// The principal fractional ideal (t) in factored form.
    pub fn ideal_of_element(&self, t: &QuadElem) -> Result<QuadIdealFactored, FieldError> {
        if t.is_zero() {
            return Err(FieldError::ZeroElement);
        }
        let (a, b, c) = self.integral_parts(t);
        let n = a * a + self.disc * a * b + self.omega_norm() * b * b;
        let mut ps: Vec<i128> = factor(n).into_iter().chain(factor(c)).map(|(p, _)| p).collect();
        ps.sort_unstable();
        ps.dedup();
        let mut out = QuadIdealFactored::unit();
        for p in ps {
            for prime in self.split_type(p)? {
                let v = self.valuation(t, &prime)?;
                out.add_exponent(prime, v);
            }
        }
        Ok(out)
    }

    /// The ideal generated by a rational integer.
    pub fn ideal_of_integer(&self, n: i128) -> Result<QuadIdealFactored, FieldError> {
        self.ideal_of_element(&QuadElem::from_int(n))
    }

    /// An integral element with valuation exactly 1 at `prime` and 0 at the
    /// other primes above the same rational prime.
    pub fn uniformizer(&self, prime: &QuadPrime) -> QuadElem {
        if prime.kind == PrimeKind::Inert {
            return QuadElem::from_int(prime.p);
        }
        let others: Vec<QuadPrime> = self
            .split_type(prime.p)
            .expect("prime")
            .into_iter()
            .filter(|q| q != prime)
            .collect();
        for size in 1i128.. {
            for b in -size..=size {
                for a in -size..=size {
                    if a.abs() != size && b.abs() != size {
                        continue;
                    }
                    let t = self.from_omega_ints(a, b);
                    if t.is_zero() {
                        continue;
                    }
                    let ok = self.valuation(&t, prime) == Ok(1)
                        && others.iter().all(|q| self.valuation(&t, q) == Ok(0));
                    if ok {
                        return t;
                    }
                }
            }
        }
        unreachable!()
    }

    /// Whether a unit at an odd prime is a square in the residue field.
    pub fn is_residue_square(&self, t: &QuadElem, prime: &QuadPrime) -> bool {
        let p = prime.p;
        assert!(p != 2, "residue square test is for odd primes");
        let (a, b, c) = self.integral_parts(t);
        assert!(c % p != 0, "element is not integral at the prime");
        match prime.residue {
            Some(r) => {
                let v = (a + b * r).mod_floor(&p) * mod_pow(c, (p - 2) as u128, p) % p;
                int::legendre(v, p) == 1
            }
            None => {
                // c lies in F_p^*, which is contained in the squares of F_{p^2}.
                let e = ((p * p - 1) / 2) as u128;
                self.residue_pow_inert(a, b, e, p) == (1, 0)
            }
        }
    }

    /// (a + b omega)^e in O_F / p for an inert prime p.
    fn residue_pow_inert(&self, a: i128, b: i128, e: u128, p: i128) -> (i128, i128) {
        let dd = self.disc.mod_floor(&p);
        let nw = self.omega_norm().mod_floor(&p);
        // omega^2 = D omega - nw
        let mulm = |x: (i128, i128), y: (i128, i128)| {
            let c0 = x.0 * y.0 % p;
            let c1 = (x.0 * y.1 + x.1 * y.0) % p;
            let c2 = x.1 * y.1 % p;
            ((c0 - c2 * nw).mod_floor(&p), (c1 + c2 * dd).mod_floor(&p))
        };
        let mut result = (1, 0);
        let mut base = (a.mod_floor(&p), b.mod_floor(&p));
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = mulm(result, base);
            }
            base = mulm(base, base);
            e >>= 1;
        }
        result
    }

    /// Whether `t` is congruent to a square modulo `prime^j`.
    ///
    /// `t` must be integral at `prime`. Searches representatives of
    /// O_F / p^m with p^m contained in prime^j.
    pub fn is_square_mod_prime_power(&self, t: &QuadElem, prime: &QuadPrime, j: u32) -> bool {
        let e = prime.ramification_index();
        let m = j.div_ceil(e);
        let modulus = prime.p.pow(m);
        for a in 0..modulus {
            for b in 0..modulus {
                let x = self.from_omega_ints(a, b);
                let diff = *t - self.mul(&x, &x);
                if diff.is_zero() || self.valuation(&diff, prime).expect("nonzero") >= j as i64 {
                    return true;
                }
            }
        }
        false
    }
}

fn sgn(x: &Rat) -> i32 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

/// Exact square root of a nonnegative rational, if it is a square.
pub fn rational_sqrt(x: &Rat) -> Option<Rat> {
    if x.is_negative() {
        return None;
    }
    let (n, d) = (*x.numer(), *x.denom());
    (int::is_square(n) && int::is_square(d)).then(|| Rat::new(int::isqrt(n), int::isqrt(d)))
}
