//! The definite quaternion algebra B_p ramified at p and infinity, its
//! maximal orders and left ideal classes.

pub mod classes;
mod lattice;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactmath::int::{factor, is_prime, legendre};
use crate::exactmath::{rat, ExactError, Rat};

pub use classes::{all_end_rings, left_ideal_classes, maximal_order, mass, EndRing};
pub use lattice::QuatLattice;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuatError {
    #[error("{0} is not prime")]
    InvalidPrime(i128),
    #[error("no order enlargement found at reduced discriminant {0}")]
    SaturationFailure(Rat),
    #[error("ideal classes have mass {found}, expected {expected}")]
    MassMismatch { found: Rat, expected: Rat },
    #[error("lattice does not have full rank")]
    Degenerate,
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// A place of Q.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Place {
    Finite(i128),
    Infinite,
}

fn split_off(p: i128, mut n: i128) -> (u32, i128) {
    let mut k = 0;
    while n % p == 0 {
        n /= p;
        k += 1;
    }
    (k, n)
}

/// Local Hilbert symbol (a, b)_v for nonzero integers a, b.
pub fn hilbert_symbol(a: i128, b: i128, v: Place) -> i32 {
    assert!(a != 0 && b != 0, "Hilbert symbol of zero");
    match v {
        Place::Infinite => {
            if a < 0 && b < 0 {
                -1
            } else {
                1
            }
        }
        Place::Finite(2) => {
            let (al, u) = split_off(2, a);
            let (be, w) = split_off(2, b);
            let eps = |x: i128| ((x - 1) / 2).rem_euclid(2);
            let omg = |x: i128| ((x * x - 1) / 8).rem_euclid(2);
            let e = eps(u) * eps(w) + i128::from(al) * omg(w) + i128::from(be) * omg(u);
            if e % 2 == 0 {
                1
            } else {
                -1
            }
        }
        Place::Finite(p) => {
            let (al, u) = split_off(p, a);
            let (be, w) = split_off(p, b);
            let mut s = if al % 2 == 1 && be % 2 == 1 && (p - 1) / 2 % 2 == 1 { -1 } else { 1 };
            if be % 2 == 1 {
                s *= legendre(u, p);
            }
            if al % 2 == 1 {
                s *= legendre(w, p);
            }
            s
        }
    }
}

/// Places where (a, b) ramifies: finite primes first, then infinity.
pub fn ramified_places(a: i128, b: i128) -> Vec<Place> {
    let mut primes: Vec<i128> = factor(2 * a * b).into_iter().map(|(p, _)| p).collect();
    primes.dedup();
    let mut out: Vec<Place> = primes
        .into_iter()
        .filter(|&p| hilbert_symbol(a, b, Place::Finite(p)) == -1)
        .map(Place::Finite)
        .collect();
    if hilbert_symbol(a, b, Place::Infinite) == -1 {
        out.push(Place::Infinite);
    }
    out
}

/// The algebra (a, b) with i^2 = a, j^2 = b, k = ij.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuatAlgebra {
    pub a: i128,
    pub b: i128,
    pub p: i128,
}

impl QuatAlgebra {
    /// B_p with b = -p and a the largest negative integer that makes the
    /// algebra ramified exactly at p and infinity; (-1, -1) for p = 2.
    pub fn for_prime(p: i128) -> Result<Self, QuatError> {
        if !is_prime(p) {
            return Err(QuatError::InvalidPrime(p));
        }
        if p == 2 {
            return Ok(QuatAlgebra { a: -1, b: -1, p });
        }
        let b = -p;
        let mut a = -1;
        loop {
            let nonsquare = legendre(a, p) == -1;
            if nonsquare && ramified_places(a, b) == [Place::Finite(p), Place::Infinite] {
                return Ok(QuatAlgebra { a, b, p });
            }
            a -= 1;
        }
    }

    pub fn mul(&self, x: &QuatElem, y: &QuatElem) -> QuatElem {
        let (a, b) = (rat(self.a), rat(self.b));
        let [x0, x1, x2, x3] = x.0;
        let [y0, y1, y2, y3] = y.0;
        QuatElem([
            x0 * y0 + a * x1 * y1 + b * x2 * y2 - a * b * x3 * y3,
            x0 * y1 + x1 * y0 - b * x2 * y3 + b * x3 * y2,
            x0 * y2 + x2 * y0 + a * x1 * y3 - a * x3 * y1,
            x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1,
        ])
    }

    pub fn nrd(&self, x: &QuatElem) -> Rat {
        let (a, b) = (rat(self.a), rat(self.b));
        let [x0, x1, x2, x3] = x.0;
        x0 * x0 - a * x1 * x1 - b * x2 * x2 + a * b * x3 * x3
    }

    pub fn inverse(&self, x: &QuatElem) -> Option<QuatElem> {
        let n = self.nrd(x);
        if n.is_zero() {
            None
        } else {
            Some(x.conj().scale(Rat::one() / n))
        }
    }

    /// trd(x conj(y)), the bilinear form attached to nrd (times two).
    pub fn trd_pair(&self, x: &QuatElem, y: &QuatElem) -> Rat {
        self.mul(x, &y.conj()).trd()
    }

    pub fn i(&self) -> QuatElem {
        QuatElem::basis(1)
    }

    pub fn j(&self) -> QuatElem {
        QuatElem::basis(2)
    }

    pub fn k(&self) -> QuatElem {
        QuatElem::basis(3)
    }
}

/// x0 + x1 i + x2 j + x3 k.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuatElem(pub [Rat; 4]);

impl QuatElem {
    pub fn zero() -> Self {
        QuatElem([Rat::zero(); 4])
    }

    pub fn one() -> Self {
        Self::from_rat(Rat::one())
    }

    pub fn from_rat(r: Rat) -> Self {
        QuatElem([r, Rat::zero(), Rat::zero(), Rat::zero()])
    }

    pub fn from_int(n: i128) -> Self {
        Self::from_rat(rat(n))
    }

    pub fn from_ints(c: [i128; 4]) -> Self {
        QuatElem(c.map(rat))
    }

    pub fn basis(idx: usize) -> Self {
        let mut c = [Rat::zero(); 4];
        c[idx] = Rat::one();
        QuatElem(c)
    }

    pub fn coords(&self) -> &[Rat; 4] {
        &self.0
    }

    pub fn conj(&self) -> Self {
        let [x0, x1, x2, x3] = self.0;
        QuatElem([x0, -x1, -x2, -x3])
    }

    pub fn trd(&self) -> Rat {
        self.0[0] * rat(2)
    }

    pub fn scale(&self, c: Rat) -> Self {
        QuatElem(self.0.map(|x| x * c))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    /// Whether the element is a rational scalar.
    pub fn is_scalar(&self) -> bool {
        self.0[1..].iter().all(Zero::is_zero)
    }
}

impl Add for QuatElem {
    type Output = QuatElem;
    fn add(self, o: QuatElem) -> QuatElem {
        QuatElem(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl Sub for QuatElem {
    type Output = QuatElem;
    fn sub(self, o: QuatElem) -> QuatElem {
        QuatElem(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl Neg for QuatElem {
    type Output = QuatElem;
    fn neg(self) -> QuatElem {
        QuatElem(self.0.map(|x| -x))
    }
}

impl Mul<Rat> for QuatElem {
    type Output = QuatElem;
    fn mul(self, c: Rat) -> QuatElem {
        self.scale(c)
    }
}

impl fmt::Display for QuatElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["", "i", "j", "k"];
        let mut first = true;
        for (c, name) in self.0.iter().zip(names) {
            if c.is_zero() {
                continue;
            }
            let a = c.abs();
            match (first, c.is_negative()) {
                (true, true) => write!(f, "-")?,
                (true, false) => {}
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
            }
            first = false;
            match (name, a.is_one()) {
                ("", _) => write!(f, "{a}")?,
                (_, true) => write!(f, "{name}")?,
                _ => write!(f, "{a}*{name}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Serialize for QuatElem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuatElem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let v = Vec::<String>::deserialize(d)?;
        if v.len() != 4 {
            return Err(D::Error::custom("quaternion needs four coordinates"));
        }
        let mut c = [Rat::zero(); 4];
        for (slot, s) in c.iter_mut().zip(&v) {
            *slot = s.parse().map_err(|_| D::Error::custom(format!("bad rational {s:?}")))?;
        }
        Ok(QuatElem(c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn display_signs() {
        assert_eq!(QuatElem::from_ints([-2, 1, 0, -3]).to_string(), "-2 + i - 3*k");
        assert_eq!(QuatElem([Rat::new(-1, 2), Rat::new(-3, 4), rat(0), rat(0)]).to_string(), "-1/2 - 3/4*i");
        assert_eq!(QuatElem::zero().to_string(), "0");
        assert_eq!(QuatElem::basis(2).scale(rat(-1)).to_string(), "-j");
    }

    #[test]
    fn hilbert_examples() {
        assert_eq!(hilbert_symbol(-1, -1, Place::Finite(2)), -1);
        assert_eq!(hilbert_symbol(-1, -1, Place::Finite(3)), 1);
        assert_eq!(hilbert_symbol(-1, -1, Place::Infinite), -1);
        assert_eq!(hilbert_symbol(-1, -5, Place::Finite(2)), -1);
        assert_eq!(hilbert_symbol(2, 3, Place::Finite(3)), -1);
    }

    #[test]
    fn algebra_presentations() {
        let q = |p| {
            let b = QuatAlgebra::for_prime(p).unwrap();
            (b.a, b.b)
        };
        assert_eq!(q(2), (-1, -1));
        assert_eq!(q(3), (-1, -3));
        assert_eq!(q(5), (-2, -5));
        assert_eq!(q(7), (-1, -7));
        assert!(QuatAlgebra::for_prime(9).is_err());
        for p in crate::exactmath::int::primes_up_to(150) {
            let b = QuatAlgebra::for_prime(p).unwrap();
            assert_eq!(ramified_places(b.a, b.b), vec![Place::Finite(p), Place::Infinite]);
        }
    }

    #[test]
    fn hamilton_relations() {
        let b = QuatAlgebra::for_prime(7).unwrap();
        let (i, j, k) = (b.i(), b.j(), b.k());
        assert_eq!(b.mul(&i, &j), k);
        assert_eq!(b.mul(&j, &i), -k);
        assert_eq!(b.mul(&i, &i), QuatElem::from_int(b.a));
        assert_eq!(b.mul(&j, &j), QuatElem::from_int(b.b));
        assert_eq!(b.mul(&k, &k), QuatElem::from_int(-b.a * b.b));
    }

    fn nonzero() -> impl Strategy<Value = i128> {
        prop_oneof![-200i128..=-1, 1i128..=200]
    }

    fn elem() -> impl Strategy<Value = QuatElem> {
        prop::array::uniform4((-20i128..=20, 1i128..=4))
            .prop_map(|c| QuatElem(c.map(|(n, d)| Rat::new(n, d))))
    }

    proptest! {
        #[test]
        fn product_formula(a in nonzero(), b in nonzero()) {
            let mut primes: Vec<i128> = factor(2 * a * b).into_iter().map(|(p, _)| p).collect();
            primes.dedup();
            let prod: i32 = primes.iter().map(|&p| hilbert_symbol(a, b, Place::Finite(p))).product::<i32>()
                * hilbert_symbol(a, b, Place::Infinite);
            prop_assert_eq!(prod, 1);
        }

        #[test]
        fn norm_is_multiplicative(x in elem(), y in elem(), p in prop::sample::select(vec![2i128, 3, 5, 11, 13])) {
            let b = QuatAlgebra::for_prime(p).unwrap();
            prop_assert_eq!(b.nrd(&b.mul(&x, &y)), b.nrd(&x) * b.nrd(&y));
            prop_assert_eq!(b.mul(&x, &y).conj(), b.mul(&y.conj(), &x.conj()));
            prop_assert_eq!(x.conj().conj(), x);
            prop_assert!(b.nrd(&x) >= Rat::zero());
        }
    }
}
