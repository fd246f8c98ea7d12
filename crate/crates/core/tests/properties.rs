use humbert_core::byformula::predicted_tally;
use humbert_core::cmfield::CMField;
use humbert_core::exactmath::int::primes_up_to;
use humbert_core::fixtures;
use humbert_core::quadfield::{PrimeKind, QuadIdealFactored, QuadPrime};
use proptest::prelude::*;

fn fields() -> Vec<(String, CMField)> {
    fixtures::all().into_iter().map(|f| (f.name.clone(), f.field().unwrap())).collect()
}

/// O_F / P as F_p[w] / (w^2 - c1 w - c0), or F_p when `c` is None.
struct Residue {
    p: i128,
    quad: Option<(i128, i128)>,
    omega: (i128, i128),
}

impl Residue {
    fn new(k: &CMField, prime: &QuadPrime) -> Self {
        let p = prime.p;
        let d = k.disc();
        match prime.residue {
            Some(r) => Residue { p, quad: None, omega: (r.rem_euclid(p), 0) },
            None => {
                // omega^2 = D omega - (D^2 - D)/4
                let c0 = (-(d * d - d) / 4).rem_euclid(p);
                Residue { p, quad: Some((c0, d.rem_euclid(p))), omega: (0, 1) }
            }
        }
    }

    fn elems(&self) -> Vec<(i128, i128)> {
        let vs = if self.quad.is_some() { self.p } else { 1 };
        (0..self.p).flat_map(|u| (0..vs).map(move |v| (u, v))).collect()
    }

    fn add(&self, a: (i128, i128), b: (i128, i128)) -> (i128, i128) {
        ((a.0 + b.0).rem_euclid(self.p), (a.1 + b.1).rem_euclid(self.p))
    }

    fn mul(&self, a: (i128, i128), b: (i128, i128)) -> (i128, i128) {
        let p = self.p;
        match self.quad {
            None => ((a.0 * b.0).rem_euclid(p), 0),
            Some((c0, c1)) => {
                let w2 = a.1 * b.1;
                ((a.0 * b.0 + w2 * c0).rem_euclid(p), (a.0 * b.1 + a.1 * b.0 + w2 * c1).rem_euclid(p))
            }
        }
    }

    fn of(&self, u: i128, v: i128) -> (i128, i128) {
        let w = self.omega;
        self.add(((u).rem_euclid(self.p), 0), self.mul(((v).rem_euclid(self.p), 0), w))
    }
}

/// Dedekind-Kummer on x^2 - alpha x + beta modulo P.
fn kummer_kind(k: &CMField, prime: &QuadPrime) -> PrimeKind {
    let r = Residue::new(k, prime);
    let (a0, a1) = k.alpha();
    let (b0, b1) = k.beta();
    let alpha = r.of(a0, a1);
    let beta = r.of(b0, b1);
    let neg = |x: (i128, i128)| ((-x.0).rem_euclid(r.p), (-x.1).rem_euclid(r.p));
    let roots: Vec<(i128, i128)> = r
        .elems()
        .into_iter()
        .filter(|&x| r.add(r.add(r.mul(x, x), neg(r.mul(alpha, x))), beta) == (0, 0))
        .collect();
    match roots.len() {
        0 => PrimeKind::Inert,
        1 => PrimeKind::Ramified,
        _ => PrimeKind::Split,
    }
}

fn primes_of_f(k: &CMField, bound: i128) -> Vec<QuadPrime> {
    primes_up_to(bound).into_iter().flat_map(|p| k.real_field().split_type(p).unwrap()).collect()
}

#[test]
fn splitting_matches_dedekind_kummer() {
    for (name, k) in fields() {
        for prime in primes_of_f(&k, 60) {
            assert_eq!(k.splitting_in_k(&prime), kummer_kind(&k, &prime), "{name} at {prime}");
        }
    }
}

#[test]
fn ramified_primes_divide_relative_discriminant() {
    for (name, k) in fields() {
        for prime in primes_of_f(&k, 60) {
            let ram = k.relative_discriminant().exponent(&prime) > 0;
            assert_eq!(ram, k.splitting_in_k(&prime) == PrimeKind::Ramified, "{name} at {prime}");
        }
    }
}

fn field_and_primes() -> impl Strategy<Value = (usize, Vec<i64>)> {
    (0usize..13, prop::collection::vec(0i64..4, 24))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn rho_is_multiplicative((fi, exps) in field_and_primes(), split in prop::collection::vec(any::<bool>(), 24)) {
        let (_, k) = &fields()[fi];
        let primes = primes_of_f(k, 40);
        let pick = |side: bool| QuadIdealFactored::from_exponents(
            primes.iter().zip(&exps).zip(&split).filter(|(_, &s)| s == side).map(|((q, &e), _)| (*q, e)),
        );
        let (a, b) = (pick(true), pick(false));
        prop_assert_eq!(k.rho(&a.mul(&b)), k.rho(&a) * k.rho(&b));
    }

    #[test]
    fn rho_on_prime_powers(fi in 0usize..13, e in 1i64..6, ix in any::<prop::sample::Index>()) {
        let (_, k) = &fields()[fi];
        let primes = primes_of_f(k, 60);
        let q = *ix.get(&primes);
        let r = k.rho(&QuadIdealFactored::from_exponents([(q, e)]));
        let want = match kummer_kind(k, &q) {
            PrimeKind::Split => e as u64 + 1,
            PrimeKind::Inert => u64::from(e % 2 == 0),
            PrimeKind::Ramified => 1,
        };
        prop_assert_eq!(r, want);
        prop_assert_eq!(k.rho(&QuadIdealFactored::from_exponents([(q, -e)])), 0);
    }

    #[test]
    fn by_bound_restricts(fi in 0usize..13, b in 2i128..150) {
        let (name, k) = &fields()[fi];
        let full = predicted_tally(k, 150, false);
        let part = predicted_tally(k, b, false);
        prop_assert_eq!(full.tally.restrict(b), part.tally.clone(), "{}", name);
        prop_assert_eq!(predicted_tally(k, b, false), part);
    }
}

#[test]
fn by_support_is_nonsplit() {
    for (name, k) in fields() {
        let r = predicted_tally(&k, 150, false);
        for p in r.tally.primes() {
            let nonsplit = k
                .real_field()
                .split_type(p)
                .unwrap()
                .iter()
                .any(|q| k.splitting_in_k(q) != PrimeKind::Split);
            assert!(nonsplit, "{name}: {p} splits completely yet appears");
        }
        for t in &r.terms {
            assert_ne!(k.splitting_in_k(&t.prime), PrimeKind::Split, "{name}: {t:?}");
        }
    }
}

#[test]
fn correction_keeps_a_subset_of_terms() {
    for (name, k) in fields() {
        let all = predicted_tally(&k, 150, false).terms;
        for t in predicted_tally(&k, 150, true).terms {
            assert!(all.contains(&t), "{name}: {t:?}");
        }
    }
}
