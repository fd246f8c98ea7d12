//! Primitive cyclic quartic CM fields K = F(eta), O_K = O_F[eta].
//!
//! A field is described by its real quadratic subfield and the trace and
//! norm of eta in the basis (1, omega). The relative discriminant is worked
//! out prime by prime from the local behaviour of `delta = disc(eta)` and
//! then checked against the closed-form D̃ polynomial, so a generator that
//! does not give the maximal order is rejected at construction.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactmath::int::{self, factor};
use crate::exactmath::{frac, rat, Rat};
use crate::quadfield::{rational_sqrt, FieldError, PrimeKind, QuadElem, QuadField, QuadIdealFactored, QuadPrime};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CmError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("D~ polynomial evaluates to {0}, which is not a positive integer")]
    NotPositive(Rat),
    #[error("a + b sqrt(d) is not totally negative")]
    NotTotallyImaginary,
    #[error("field is biquadratic (not primitive)")]
    NotPrimitive,
    #[error("field is not cyclic over Q")]
    NotCyclic,
    #[error("generator minimal polynomial does not define a CM extension")]
    NotCm,
    #[error("generator does not lie in Q(sqrt(a + b sqrt d))")]
    GeneratorMismatch,
    #[error("norm of the relative discriminant is {computed}, D~ polynomial gives {expected}")]
    InconsistentDtilde { expected: i128, computed: Rat },
    #[error("D~ / d = {0} is not a square")]
    ReflexMismatch(Rat),
}

/// The closed-form D̃ polynomial in (D, alpha, beta).
///
/// It equals the norm to Q of `alpha^2 - 4 beta`, the discriminant of eta.
pub fn dtilde_from_generators(
    disc: i128,
    alpha0: i128,
    alpha1: i128,
    beta0: i128,
    beta1: i128,
) -> Result<i128, CmError> {
    let d = rat(disc);
    let (a0, a1, b0, b1) = (rat(alpha0), rat(alpha1), rat(beta0), rat(beta1));
    let v = frac(1, 16) * d.pow(4) * a1.pow(4) + frac(1, 2) * d.pow(3) * a0 * a1.pow(3)
        - frac(1, 8) * d.pow(3) * a1.pow(4)
        - d.pow(3) * a1.pow(2) * b1
        + frac(3, 2) * d.pow(2) * a0.pow(2) * a1.pow(2)
        - frac(1, 2) * d.pow(2) * a0 * a1.pow(3)
        - rat(4) * d.pow(2) * a0 * a1 * b1
        + frac(1, 16) * d.pow(2) * a1.pow(4)
        - rat(2) * d.pow(2) * a1.pow(2) * b0
        + d.pow(2) * a1.pow(2) * b1
        + rat(4) * d.pow(2) * b1.pow(2)
        + rat(2) * d * a0.pow(3) * a1
        - frac(1, 2) * d * a0.pow(2) * a1.pow(2)
        - rat(4) * d * a0.pow(2) * b1
        - rat(8) * d * a0 * a1 * b0
        + rat(4) * d * a0 * a1 * b1
        - rat(2) * d * a1.pow(2) * b0
        + rat(16) * d * b0 * b1
        - rat(4) * d * b1.pow(2)
        + a0.pow(4)
        - rat(8) * a0.pow(2) * b0
        + rat(16) * b0.pow(2);
    if !v.is_integer() || !v.is_positive() {
        return Err(CmError::NotPositive(v));
    }
    Ok(v.to_integer())
}

fn check_totally_negative(d: i128, a: Rat, b: Rat) -> Result<(), CmError> {
    if a.is_negative() && a * a > b * b * rat(d) {
        Ok(())
    } else {
        Err(CmError::NotTotallyImaginary)
    }
}

/// Q(sqrt(a + b sqrt d)) is primitive iff a^2 - b^2 d is not a square.
pub fn is_primitive(d: i128, a: i128, b: i128) -> Result<bool, CmError> {
    check_totally_negative(d, rat(a), rat(b))?;
    Ok(!int::is_square(a * a - b * b * d))
}

/// Cyclic quartic iff d (a^2 - b^2 d) is a square.
pub fn is_cyclic(d: i128, a: i128, b: i128) -> bool {
    int::is_square(d * (a * a - b * b * d))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CmDescriptor {
    pub d: i128,
    pub alpha0: i128,
    pub alpha1: i128,
    pub beta0: i128,
    pub beta1: i128,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surd: Option<(i128, i128)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CMField {
    field: QuadField,
    alpha: (i128, i128),
    beta: (i128, i128),
    surd: Option<(i128, i128)>,
    delta: QuadElem,
    dtilde: i128,
    sqrt_dtilde: QuadElem,
    rel_disc: QuadIdealFactored,
}

impl CMField {
    /// Validate a descriptor given only by eta's trace and norm.
    pub fn from_generators(d: i128, alpha0: i128, alpha1: i128, beta0: i128, beta1: i128) -> Result<Self, CmError> {
        let field = QuadField::new(d)?;
        let dtilde = dtilde_from_generators(field.disc(), alpha0, alpha1, beta0, beta1)?;
        let alpha = field.from_omega_ints(alpha0, alpha1);
        let beta = field.from_omega_ints(beta0, beta1);
        let delta = field.mul(&alpha, &alpha) - beta.scale(rat(4));
        // x^2 - alpha x + beta must have totally negative discriminant
        check_totally_negative(d, delta.x, delta.y).map_err(|_| CmError::NotCm)?;
        let n = field.norm(&delta);
        if rational_sqrt(&n).is_some() {
            return Err(CmError::NotPrimitive);
        }
        if rational_sqrt(&(n * rat(d))).is_none() {
            return Err(CmError::NotCyclic);
        }
        let ratio = Rat::new(dtilde, d);
        let s = rational_sqrt(&ratio).ok_or(CmError::ReflexMismatch(ratio))?;
        let rel_disc = relative_discriminant_of(&field, &delta)?;
        let computed = rel_disc.norm();
        if computed != rat(dtilde) {
            return Err(CmError::InconsistentDtilde { expected: dtilde, computed });
        }
        Ok(CMField {
            field,
            alpha: (alpha0, alpha1),
            beta: (beta0, beta1),
            surd: None,
            delta,
            dtilde,
            sqrt_dtilde: QuadElem::new(Rat::zero(), s),
            rel_disc,
        })
    }

    /// Validate a field given as Q(sqrt(a + b sqrt d)) together with eta.
    pub fn from_surd(
        d: i128,
        a: i128,
        b: i128,
        alpha0: i128,
        alpha1: i128,
        beta0: i128,
        beta1: i128,
    ) -> Result<Self, CmError> {
        if !is_primitive(d, a, b)? {
            return Err(CmError::NotPrimitive);
        }
        if !is_cyclic(d, a, b) {
            return Err(CmError::NotCyclic);
        }
        let mut k = Self::from_generators(d, alpha0, alpha1, beta0, beta1)?;
        let surd = QuadElem::new(rat(a), rat(b));
        let ratio = k.field.div(&k.delta, &surd)?;
        if k.field.sqrt(&ratio).is_none() {
            return Err(CmError::GeneratorMismatch);
        }
        k.surd = Some((a, b));
        Ok(k)
    }

    pub fn from_descriptor(desc: &CmDescriptor) -> Result<Self, CmError> {
        match desc.surd {
            Some((a, b)) => Self::from_surd(desc.d, a, b, desc.alpha0, desc.alpha1, desc.beta0, desc.beta1),
            None => Self::from_generators(desc.d, desc.alpha0, desc.alpha1, desc.beta0, desc.beta1),
        }
    }

    pub fn descriptor(&self) -> CmDescriptor {
        CmDescriptor {
            d: self.field.d(),
            alpha0: self.alpha.0,
            alpha1: self.alpha.1,
            beta0: self.beta.0,
            beta1: self.beta.1,
            surd: self.surd,
        }
    }

    pub fn real_field(&self) -> &QuadField {
        &self.field
    }

    /// Discriminant D of the real quadratic subfield.
    pub fn disc(&self) -> i128 {
        self.field.disc()
    }

    pub fn alpha(&self) -> (i128, i128) {
        self.alpha
    }

    pub fn beta(&self) -> (i128, i128) {
        self.beta
    }

    pub fn surd(&self) -> Option<(i128, i128)> {
        self.surd
    }

    pub fn dtilde(&self) -> i128 {
        self.dtilde
    }

    /// sqrt(D̃) as an element of F (positive under sqrt d > 0).
    pub fn sqrt_dtilde(&self) -> QuadElem {
        self.sqrt_dtilde
    }

    /// Discriminant alpha^2 - 4 beta of eta's minimal polynomial.
    pub fn delta(&self) -> QuadElem {
        self.delta
    }

    pub fn relative_discriminant(&self) -> &QuadIdealFactored {
        &self.rel_disc
    }

    /// Behaviour of a prime of F in K.
    pub fn splitting_in_k(&self, prime: &QuadPrime) -> PrimeKind {
        if self.rel_disc.exponent(prime) > 0 {
            return PrimeKind::Ramified;
        }
        let f = &self.field;
        let k = f.valuation(&self.delta, prime).expect("delta is nonzero");
        debug_assert!(k % 2 == 0 || prime.p == 2);
        let unit = strip_even_power(f, &self.delta, prime, k);
        let is_square = if prime.p == 2 {
            let e = prime.ramification_index();
            f.is_square_mod_prime_power(&unit, prime, 2 * e + 1)
        } else {
            f.is_residue_square(&unit, prime)
        };
        if is_square {
            PrimeKind::Split
        } else {
            PrimeKind::Inert
        }
    }

    /// Number of integral ideals of O_K with relative norm `a`.
    pub fn rho(&self, a: &QuadIdealFactored) -> u64 {
        let mut out = 1u64;
        for (prime, &k) in a.iter() {
            if k < 0 {
                return 0;
            }
            out *= match self.splitting_in_k(prime) {
                PrimeKind::Split => k as u64 + 1,
                PrimeKind::Inert => u64::from(k % 2 == 0),
                PrimeKind::Ramified => 1,
            };
            if out == 0 {
                return 0;
            }
        }
        out
    }
}

/// delta / pi^k for a uniformizer pi at `prime`, with k rounded down to even.
fn strip_even_power(f: &QuadField, delta: &QuadElem, prime: &QuadPrime, k: i64) -> QuadElem {
    let k = (k - k.rem_euclid(2)) as u32;
    if k == 0 {
        return *delta;
    }
    let pi = f.uniformizer(prime);
    f.div(delta, &f.pow(&pi, k)).expect("uniformizer is nonzero")
}

/// Exponent of the relative discriminant of F(sqrt delta)/F at every prime.
///
/// Odd primes ramify exactly when the valuation of delta is odd. At a dyadic
/// prime with ramification index e, an odd valuation gives exponent 2e + 1;
/// otherwise the unit part u is tested for being a square modulo increasing
/// powers of the prime: a square mod P^(2e) means unramified, and if t is the
/// largest level below that where u is still a square the exponent is
/// 2e + 1 - t.
pub fn relative_discriminant_of(f: &QuadField, delta: &QuadElem) -> Result<QuadIdealFactored, CmError> {
    let n = f.norm(delta);
    let mut primes: Vec<i128> = factor(*n.numer()).into_iter().chain(factor(*n.denom())).map(|(p, _)| p).collect();
    primes.sort_unstable();
    primes.dedup();
    let mut exps = Vec::new();
    for p in primes {
        for prime in f.split_type(p)? {
            let k = f.valuation(delta, &prime)?;
            let exp = if p != 2 {
                k.rem_euclid(2)
            } else if k.rem_euclid(2) == 1 {
                2 * prime.ramification_index() as i64 + 1
            } else {
                let e = prime.ramification_index();
                let unit = strip_even_power(f, delta, &prime, k);
                if f.is_square_mod_prime_power(&unit, &prime, 2 * e) {
                    0
                } else {
                    let t = (1..2 * e)
                        .rev()
                        .find(|&j| f.is_square_mod_prime_power(&unit, &prime, j))
                        .expect("every unit is a square modulo a dyadic prime");
                    (2 * e + 1 - t) as i64
                }
            };
            if exp != 0 {
                exps.push((prime, exp));
            }
        }
    }
    Ok(QuadIdealFactored::from_exponents(exps))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zeta5() -> CMField {
        CMField::from_surd(5, -10, -2, -1, -1, -1, 2).unwrap()
    }

    #[test]
    fn dtilde_values() {
        assert_eq!(dtilde_from_generators(5, -1, -1, -1, 2), Ok(5));
        assert_eq!(dtilde_from_generators(5, 0, 0, 0, 2), Ok(320));
        assert_eq!(dtilde_from_generators(29, 11, -1, -35, 3), Ok(29));
        assert!(matches!(dtilde_from_generators(5, 0, 0, -2, 1), Err(CmError::NotPositive(_))));
    }

    #[test]
    fn primitivity() {
        assert_eq!(is_primitive(5, -5, 1), Ok(true));
        assert_eq!(is_primitive(5, -3, 1), Ok(false));
        assert_eq!(is_primitive(29, -29, 2), Ok(true));
        assert_eq!(is_primitive(5, 3, 1), Err(CmError::NotTotallyImaginary));
        assert_eq!(is_primitive(5, -2, 1), Err(CmError::NotTotallyImaginary));
    }

    #[test]
    fn cyclotomic_relative_discriminant() {
        let k = zeta5();
        let p5 = k.real_field().split_type(5).unwrap()[0];
        assert_eq!(k.relative_discriminant(), &QuadIdealFactored::prime(p5));
        assert_eq!(k.dtilde(), 5);
    }

    #[test]
    fn cyclotomic_splitting() {
        let k = zeta5();
        let f = k.real_field();
        for prime in f.split_type(11).unwrap() {
            assert_eq!(k.splitting_in_k(&prime), PrimeKind::Split);
        }
        assert_eq!(k.splitting_in_k(&f.split_type(2).unwrap()[0]), PrimeKind::Inert);
        assert_eq!(k.splitting_in_k(&f.split_type(5).unwrap()[0]), PrimeKind::Ramified);
        // 19 = -1 mod 5 splits in F and each prime stays inert in K
        for prime in f.split_type(19).unwrap() {
            assert_eq!(k.splitting_in_k(&prime), PrimeKind::Inert);
        }
    }

    #[test]
    fn rho_values() {
        let k = zeta5();
        let f = k.real_field();
        assert_eq!(k.rho(&QuadIdealFactored::unit()), 1);
        let p11 = f.split_type(11).unwrap()[0];
        assert_eq!(k.rho(&QuadIdealFactored::prime(p11)), 2);
        let p2 = f.split_type(2).unwrap()[0];
        assert_eq!(k.rho(&QuadIdealFactored::from_exponents([(p2, 3)])), 0);
        assert_eq!(k.rho(&QuadIdealFactored::from_exponents([(p2, 2)])), 1);
        assert_eq!(k.rho(&QuadIdealFactored::from_exponents([(p11, -1)])), 0);
    }

    #[test]
    fn constructor_errors() {
        assert_eq!(CMField::from_surd(5, -3, 1, -1, -1, -1, 2), Err(CmError::NotPrimitive));
        // wrong generator for the surd: sqrt(-5 + sqrt5) instead of zeta5
        assert_eq!(CMField::from_surd(5, -10, -2, 0, 0, 0, 2), Err(CmError::GeneratorMismatch));
        // twice a maximal generator only spans a suborder
        assert!(matches!(
            CMField::from_generators(29, 22, -2, -140, 12),
            Err(CmError::InconsistentDtilde { .. })
        ));
    }
}
