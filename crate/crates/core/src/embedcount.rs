//! Counting embeddings of O_K into End(E x E') that carry the Rosati
//! involution to complex conjugation.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::byformula::PrimeTally;
use crate::cmfield::CMField;
use crate::exactmath::int::{is_prime, isqrt, primes_up_to};
use crate::exactmath::{rat, Rat};
use crate::quadfield::{rational_sqrt, QuadElem};
use crate::quatalg::classes::{self, EndRing};
use crate::quatalg::{QuatAlgebra, QuatElem, QuatError, QuatLattice};

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("{0} is not prime")]
    NotPrime(i128),
    #[error("orbit count {0} is not an integer")]
    NonIntegralCount(Rat),
    #[error(transparent)]
    Quat(#[from] QuatError),
}

/// A 2x2 matrix with quaternion entries.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BlockMatrix(pub [[QuatElem; 2]; 2]);

impl BlockMatrix {
    pub fn new(a: QuatElem, b: QuatElem, c: QuatElem, d: QuatElem) -> Self {
        BlockMatrix([[a, b], [c, d]])
    }

    pub fn scalar(r: Rat) -> Self {
        let z = QuatElem::zero();
        Self::new(QuatElem::from_rat(r), z, z, QuatElem::from_rat(r))
    }

    pub fn identity() -> Self {
        Self::scalar(Rat::one())
    }

    pub fn diag(x: QuatElem, w: QuatElem) -> Self {
        Self::new(x, QuatElem::zero(), QuatElem::zero(), w)
    }

    pub fn antidiag(y: QuatElem, z: QuatElem) -> Self {
        Self::new(QuatElem::zero(), y, z, QuatElem::zero())
    }

    pub fn get(&self, r: usize, c: usize) -> &QuatElem {
        &self.0[r][c]
    }

    pub fn add(&self, other: &Self) -> Self {
        let m = |r: usize, c: usize| self.0[r][c] + other.0[r][c];
        Self::new(m(0, 0), m(0, 1), m(1, 0), m(1, 1))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-Rat::one()))
    }

    pub fn scale(&self, c: Rat) -> Self {
        let m = |r: usize, k: usize| self.0[r][k].scale(c);
        Self::new(m(0, 0), m(0, 1), m(1, 0), m(1, 1))
    }

    pub fn mul(&self, alg: &QuatAlgebra, other: &Self) -> Self {
        let m = |r: usize, c: usize| {
            alg.mul(&self.0[r][0], &other.0[0][c]) + alg.mul(&self.0[r][1], &other.0[1][c])
        };
        Self::new(m(0, 0), m(0, 1), m(1, 0), m(1, 1))
    }
}

/// The Rosati involution for the product polarization twisted by N(I).
pub fn rosati(m: &BlockMatrix, ni: Rat) -> BlockMatrix {
    BlockMatrix::new(
        m.0[0][0].conj(),
        m.0[1][0].conj().scale(ni),
        m.0[0][1].conj().scale(ni.recip()),
        m.0[1][1].conj(),
    )
}

/// A pair (Λ1, Λ2): the images of omega and eta.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EmbeddingSolution {
    pub lambda1: BlockMatrix,
    pub lambda2: BlockMatrix,
}

/// Everything about B_p needed for the search, computed once per prime.
#[derive(Debug)]
pub struct PrimeData {
    pub alg: QuatAlgebra,
    pub rings: Vec<EndRing>,
}

/// One triple (O, I, O_R(I)) per ordered pair of supersingular curves.
pub fn all_end_rings(p: i128) -> Result<PrimeData, EmbedError> {
    if !is_prime(p) {
        return Err(EmbedError::NotPrime(p));
    }
    let alg = QuatAlgebra::for_prime(p)?;
    let rings = classes::all_end_rings(&alg)?;
    Ok(PrimeData { alg, rings })
}

/// Memoized `all_end_rings`.
pub fn end_rings_cached(p: i128) -> Result<Arc<PrimeData>, EmbedError> {
    static CACHE: OnceLock<Mutex<HashMap<i128, Arc<PrimeData>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(d) = cache.lock().expect("cache lock").get(&p) {
        return Ok(d.clone());
    }
    let data = Arc::new(all_end_rings(p)?);
    cache.lock().expect("cache lock").entry(p).or_insert(data.clone());
    Ok(data)
}

/// Field constants used throughout the search.
#[derive(Debug, Clone, Copy)]
struct Consts {
    d: i128,
    a0: i128,
    a1: i128,
    b0: i128,
    b1: i128,
    dtilde: i128,
}

impl Consts {
    fn of(k: &CMField) -> Self {
        let (a0, a1) = k.alpha();
        let (b0, b1) = k.beta();
        Consts { d: k.disc(), a0, a1, b0, b1, dtilde: k.dtilde() }
    }

    fn alpha_of(&self, l1: &BlockMatrix) -> BlockMatrix {
        BlockMatrix::scalar(rat(self.a0)).add(&l1.scale(rat(self.a1)))
    }

    fn beta_of(&self, l1: &BlockMatrix) -> BlockMatrix {
        BlockMatrix::scalar(rat(self.b0)).add(&l1.scale(rat(self.b1)))
    }
}

/// Admissible values of s11.
pub fn s11_range(d: i128) -> std::ops::RangeInclusive<i128> {
    // (d - sqrt d)/2 <= s <= (d + sqrt d)/2  iff  (2s - d)^2 <= d
    let mid = d.div_euclid(2);
    let (mut lo, mut hi) = (mid, mid);
    while (2 * (lo - 1) - d).pow(2) <= d {
        lo -= 1;
    }
    while (2 * (hi + 1) - d).pow(2) <= d {
        hi += 1;
    }
    lo..=hi
}

/// Exact norm and trace targets for one (s11, n).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Targets {
    pub s11: i128,
    pub n: i128,
    pub delta: i128,
    #[serde(with = "crate::byformula::rat_string")]
    pub normx: Rat,
    #[serde(with = "crate::byformula::rat_string")]
    pub normu: Rat,
    #[serde(with = "crate::byformula::rat_string")]
    pub tracexuc: Rat,
    #[serde(with = "crate::byformula::rat_string")]
    pub normv: Rat,
    #[serde(with = "crate::byformula::rat_string")]
    pub norm_t11: Rat,
    #[serde(with = "crate::byformula::rat_string")]
    pub norm_t12: Rat,
    #[serde(with = "crate::byformula::rat_string")]
    pub norm_t22: Rat,
    #[serde(with = "crate::byformula::rat_string")]
    pub norm_s12: Rat,
    pub trace_t11: i128,
    pub trace_t22: i128,
}

fn normx_poly(c: &Consts, a: i128) -> Rat {
    let (a, d) = (rat(a), rat(c.d));
    let (a0, a1, b0, b1) = (rat(c.a0), rat(c.a1), rat(c.b0), rat(c.b1));
    let q = |n: i128, k: i128| Rat::new(n, k);
    let a2 = a * a;
    let (d2, d3, d4) = (d * d, d * d * d, d * d * d * d);
    q(1, 4) * a2 * d2 * a1 * a1 - q(1, 4) * a * d3 * a1 * a1 + q(1, 16) * d4 * a1 * a1
        - q(1, 4) * a2 * d * a1 * a1
        + q(1, 4) * a * d2 * a1 * a1
        - q(1, 8) * d3 * a1 * a1
        + a2 * d * a1 * a0
        - a * d2 * a1 * a0
        + q(1, 4) * d3 * a1 * a0
        + q(1, 16) * d2 * a1 * a1
        - q(1, 4) * d2 * a1 * a0
        + a2 * a0 * a0
        - a * d * a0 * a0
        + q(1, 4) * d2 * a0 * a0
        - rat(2) * a2 * d * b1
        + rat(2) * a * d2 * b1
        - q(1, 2) * d3 * b1
        - q(1, 4) * d * a0 * a0
        - rat(2) * a * d * b1
        + q(1, 2) * d2 * b1
        - rat(4) * a2 * b0
        + rat(4) * a * d * b0
        - d2 * b0
        - d * b0
}

fn targets(c: &Consts, s11: i128, n: i128, ni: Rat) -> Targets {
    let a = s11;
    let d = c.d;
    let nw = (d * d - d) / 4;
    let delta = -a * a + a * d - nw;
    let dl = rat(delta);
    let normx = (rat(n) - normx_poly(c, a)) / rat(2 * d);
    let normu = dl * rat(c.b0 + c.b1 * a) - dl * normx;
    let tracexuc = rat(c.b1) * dl - rat(d - 2 * a) / dl * normu;
    let normv = dl * dl * normx + dl * rat(d - 2 * a) * tracexuc + rat((d - 2 * a) * (d - 2 * a)) * normu;
    Targets {
        s11,
        n,
        delta,
        normx,
        normu,
        tracexuc,
        normv,
        norm_t11: normx,
        norm_t12: normu * ni / dl,
        norm_t22: normv / (dl * dl),
        norm_s12: ni * dl,
        trace_t11: c.a0 + c.a1 * s11,
        trace_t22: c.a0 + c.a1 * (d - s11),
    }
}

fn n_bound(c: &Consts, m: i128) -> i128 {
    isqrt((m * m * c.dtilde - 4 * c.d).max(0))
}

fn p_gate(c: &Consts, m: i128, n: i128, p: i128) -> bool {
    (m * m * c.dtilde - n * n) % (4 * c.d * p) == 0
}

/// All (s11, n) targets that pass the integrality gate for this ring.
pub fn admissible_targets(k: &CMField, p: i128, ni: Rat) -> Vec<Targets> {
    let c = Consts::of(k);
    let mut out = Vec::new();
    for s11 in s11_range(c.d) {
        let m = -s11 * s11 + s11 * c.d - (c.d * c.d - c.d) / 4;
        let b = n_bound(&c, m);
        for n in -b..=b {
            let t = targets(&c, s11, n, ni);
            if p_gate(&c, m, n, p) && t.norm_t11.is_integer() && t.norm_t12.is_integer() && t.norm_t22.is_integer() {
                out.push(t);
            }
        }
    }
    out
}

/// Whether any (s11, n) passes the part of the gate that does not see N(I).
pub fn prime_passes_prefilter(k: &CMField, p: i128) -> bool {
    let c = Consts::of(k);
    s11_range(c.d).any(|s11| {
        let m = -s11 * s11 + s11 * c.d - (c.d * c.d - c.d) / 4;
        let b = n_bound(&c, m);
        (-b..=b).any(|n| {
            let t = targets(&c, s11, n, Rat::one());
            p_gate(&c, m, n, p) && t.norm_t11.is_integer() && t.norm_t22.is_integer()
        })
    })
}

/// The embedding conditions, checked exactly.
pub fn is_solution(k: &CMField, alg: &QuatAlgebra, ni: Rat, sol: &EmbeddingSolution) -> bool {
    let c = Consts::of(k);
    let (l1, l2) = (&sol.lambda1, &sol.lambda2);
    let d = rat(c.d);
    let quad = l1.mul(alg, l1).sub(&l1.scale(d)).add(&BlockMatrix::scalar((d * d - d) / rat(4)));
    let zero = BlockMatrix::scalar(Rat::zero());
    l1.mul(alg, l2) == l2.mul(alg, l1)
        && quad == zero
        && l2.add(&rosati(l2, ni)) == c.alpha_of(l1)
        && l2.mul(alg, &rosati(l2, ni)) == c.beta_of(l1)
}

/// Whether every entry lies in its block of [O, I; I^-1, O'].
pub fn in_blocks(ring: &EndRing, alg: &QuatAlgebra, m: &BlockMatrix) -> bool {
    let inv = ring.ideal.conj().scale(ring.norm_ideal.recip());
    let _ = alg;
    ring.order.contains(m.get(0, 0))
        && ring.ideal.contains(m.get(0, 1))
        && inv.contains(m.get(1, 0))
        && ring.right_order.contains(m.get(1, 1))
}

/// Λ2^2 - (α0 + α1 Λ1) Λ2 + (β0 + β1 Λ1) = 0.
pub fn satisfies_eta_quadratic(k: &CMField, alg: &QuatAlgebra, sol: &EmbeddingSolution) -> bool {
    let c = Consts::of(k);
    let (l1, l2) = (&sol.lambda1, &sol.lambda2);
    let lhs = l2.mul(alg, l2).sub(&c.alpha_of(l1).mul(alg, l2)).add(&c.beta_of(l1));
    lhs == BlockMatrix::scalar(Rat::zero())
}

fn all_traces(lat: &QuatLattice, alg: &QuatAlgebra, n: &Rat) -> Vec<QuatElem> {
    // every trace in [-floor(sqrt(4n)), floor(sqrt(4n))], i.e. all of them
    lat.fixed_norm(alg, n)
}

fn search_one(k: &CMField, alg: &QuatAlgebra, ring: &EndRing, t: &Targets) -> Vec<EmbeddingSolution> {
    let c = Consts::of(k);
    let ni = ring.norm_ideal;
    let s11 = QuatElem::from_int(t.s11);
    let s22 = QuatElem::from_int(c.d - t.s11);
    let s12vals = all_traces(&ring.ideal, alg, &t.norm_s12);
    let t12vals = all_traces(&ring.ideal, alg, &t.norm_t12);
    let t11vals = ring.order.fixed_norm_and_trace(alg, &t.norm_t11, &rat(t.trace_t11));
    let t22vals = ring.right_order.fixed_norm_and_trace(alg, &t.norm_t22, &rat(t.trace_t22));
    let mut out = Vec::new();
    if t11vals.is_empty() || t22vals.is_empty() {
        return out;
    }
    for s12 in &s12vals {
        let omega = BlockMatrix::new(s11, *s12, s12.conj().scale(ni.recip()), s22);
        let s12_inv = alg.inverse(s12).expect("delta > 0");
        // The (1,1) entry of the commutator forces trd(s12 conj(t12)) = α1 nrd(s12).
        let need = rat(c.a1) * alg.nrd(s12);
        for t12 in t12vals.iter().filter(|t12| alg.trd_pair(s12, t12) == need) {
            let t21 = (s12.conj().scale(rat(c.a1)) - t12.conj()).scale(ni.recip());
            for t11 in &t11vals {
                // The (1,2) entry gives s12 t22 = t11 s12 + (D - 2 s11) t12.
                let forced = alg.mul(&s12_inv, &(alg.mul(t11, s12) + t12.scale(rat(c.d - 2 * t.s11))));
                if let Ok(t22) = t22vals.binary_search(&forced).map(|i| &t22vals[i]) {
                    let eta = BlockMatrix::new(*t11, *t12, t21, *t22);
                    let sol = EmbeddingSolution { lambda1: omega.clone(), lambda2: eta };
                    if ring.ideal.contains(s12) && ring.ideal.contains(t12) && is_solution(k, alg, ni, &sol) {
                        debug_assert!(satisfies_eta_quadratic(k, alg, &sol));
                        out.push(sol);
                    }
                }
            }
        }
    }
    out
}

/// Every (Λ1, Λ2) in the ring, found through the gated n-search.
pub fn find_solutions(k: &CMField, alg: &QuatAlgebra, ring: &EndRing) -> Vec<EmbeddingSolution> {
    let ts = admissible_targets(k, alg.p, ring.norm_ideal);
    let mut out: Vec<EmbeddingSolution> = ts.par_iter().flat_map_iter(|t| search_one(k, alg, ring, t)).collect();
    out.sort();
    out
}

/// Direct search bounded only by the diagonal norm identities; no n-gate.
pub fn find_solutions_unfiltered(k: &CMField, alg: &QuatAlgebra, ring: &EndRing) -> Vec<EmbeddingSolution> {
    let c = Consts::of(k);
    let ni = ring.norm_ideal;
    let mut out = Vec::new();
    for s11 in s11_range(c.d) {
        let delta = -s11 * s11 + s11 * c.d - (c.d * c.d - c.d) / 4;
        let top1 = c.b0 + c.b1 * s11;
        let top2 = c.b0 + c.b1 * (c.d - s11);
        let tr11 = rat(c.a0 + c.a1 * s11);
        let tr22 = rat(c.a0 + c.a1 * (c.d - s11));
        let omega_of = |s12: &QuatElem| {
            BlockMatrix::new(
                QuatElem::from_int(s11),
                *s12,
                s12.conj().scale(ni.recip()),
                QuatElem::from_int(c.d - s11),
            )
        };
        let s12vals = ring.ideal.fixed_norm(alg, &(ni * rat(delta)));
        let t22all: Vec<QuatElem> = {
            let mut v: Vec<QuatElem> = (0..=top2.max(-1))
                .flat_map(|n| ring.right_order.fixed_norm_and_trace(alg, &rat(n), &tr22))
                .collect();
            v.sort();
            v
        };
        // nrd(t11) + nrd(t12)/N(I) = β0 + β1 s11
        for k12 in 0..=top1.max(-1) {
            let t12vals = ring.ideal.fixed_norm(alg, &(ni * rat(k12)));
            let t11vals = ring.order.fixed_norm_and_trace(alg, &rat(top1 - k12), &tr11);
            for s12 in &s12vals {
                let omega = omega_of(s12);
                let s12_inv = alg.inverse(s12).expect("delta > 0");
                let need = rat(c.a1) * alg.nrd(s12);
                for t12 in t12vals.iter().filter(|t12| alg.trd_pair(s12, t12) == need) {
                    let t21 = (s12.conj().scale(rat(c.a1)) - t12.conj()).scale(ni.recip());
                    for t11 in &t11vals {
                        // commutation fixes t22 once s12, t12, t11 are chosen
                        let forced = alg.mul(&s12_inv, &(alg.mul(t11, s12) + t12.scale(rat(c.d - 2 * s11))));
                        if let Ok(i) = t22all.binary_search(&forced) {
                            let eta = BlockMatrix::new(*t11, *t12, t21, t22all[i]);
                            let sol = EmbeddingSolution { lambda1: omega.clone(), lambda2: eta };
                            if is_solution(k, alg, ni, &sol) {
                                out.push(sol);
                            }
                        }
                    }
                }
            }
        }
    }
    out.sort();
    out
}

/// Norm-one elements with trace 0, 1, -1, 2, -2.
pub fn torsion_units(alg: &QuatAlgebra, o: &QuatLattice) -> Vec<QuatElem> {
    [0, 1, -1, 2, -2]
        .iter()
        .flat_map(|&t| o.fixed_norm_and_trace(alg, &Rat::one(), &rat(t)))
        .collect()
}

fn exclude(solns: &mut Vec<EmbeddingSolution>, x: &EmbeddingSolution) {
    if let Some(pos) = solns.iter().position(|s| s == x) {
        solns.remove(pos);
    }
}

/// One representative per orbit under unit conjugation and complex
/// conjugation. Input is sorted first so the survivors are canonical.
pub fn remove_conjugates(alg: &QuatAlgebra, ring: &EndRing, solutions: &[EmbeddingSolution]) -> Vec<EmbeddingSolution> {
    let mut solns = solutions.to_vec();
    solns.sort();
    solns.dedup();
    let rs = torsion_units(alg, &ring.order);
    let ss = torsion_units(alg, &ring.right_order);
    let ni = ring.norm_ideal;
    let step = |solns: &mut Vec<EmbeddingSolution>, n: usize, u: &BlockMatrix, uinv: &BlockMatrix| {
        let cur = solns[n].clone();
        let (l1, l2) = (&cur.lambda1, &cur.lambda2);
        let l1_fixed = l1.mul(alg, u) == u.mul(alg, l1);
        if !(l1_fixed && l2.mul(alg, u) == u.mul(alg, l2)) {
            let img = EmbeddingSolution {
                lambda1: u.mul(alg, l1).mul(alg, uinv),
                lambda2: u.mul(alg, l2).mul(alg, uinv),
            };
            exclude(solns, &img);
        }
        let cur = solns[n].clone();
        let (l1, l2) = (&cur.lambda1, &cur.lambda2);
        let r2 = rosati(l2, ni);
        if !(l1.mul(alg, u) == u.mul(alg, l1) && l2.mul(alg, u) == u.mul(alg, &r2)) {
            let img = EmbeddingSolution {
                lambda1: u.mul(alg, l1).mul(alg, uinv),
                lambda2: u.mul(alg, &r2).mul(alg, uinv),
            };
            exclude(solns, &img);
        }
    };
    let mut n = 0;
    while n < solns.len() {
        for r in &rs {
            for s in &ss {
                let u = BlockMatrix::diag(*r, *s);
                let uinv = BlockMatrix::diag(r.conj(), s.conj());
                step(&mut solns, n, &u, &uinv);
                if ring.is_diagonal() {
                    let u = BlockMatrix::antidiag(*r, *s);
                    let uinv = BlockMatrix::antidiag(s.conj(), r.conj());
                    debug_assert_eq!(u.mul(alg, &uinv), BlockMatrix::identity());
                    step(&mut solns, n, &u, &uinv);
                }
            }
        }
        n += 1;
    }
    solns
}

/// Per-ring results.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingReport {
    pub index: usize,
    pub diagonal: bool,
    #[serde(with = "crate::byformula::rat_string")]
    pub norm_ideal: Rat,
    pub found: usize,
    pub representatives: Vec<EmbeddingSolution>,
    /// Orbits once the order-4 automorphism of K is also quotiented out.
    pub full_aut_orbits: usize,
}

/// Detailed result at one prime.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeReport {
    pub p: i128,
    pub count: u64,
    #[serde(with = "crate::byformula::rat_string")]
    pub full_aut_count: Rat,
    pub rings: Vec<RingReport>,
}

fn weight(ring: &EndRing, n: usize) -> Rat {
    if ring.is_diagonal() {
        rat(n as i128)
    } else {
        Rat::new(n as i128, 2)
    }
}

/// Reduced orbit representatives for a single ring.
pub fn ring_representatives(k: &CMField, alg: &QuatAlgebra, ring: &EndRing) -> (usize, Vec<EmbeddingSolution>) {
    let sols = find_solutions(k, alg, ring);
    let reps = remove_conjugates(alg, ring, &sols);
    (sols.len(), reps)
}

/// Number of embeddings up to isomorphism at p.
pub fn embedding_count(k: &CMField, p: i128) -> Result<u64, EmbedError> {
    let data = end_rings_cached(p)?;
    let total: Rat = data
        .rings
        .par_iter()
        .map(|r| weight(r, ring_representatives(k, &data.alg, r).1.len()))
        .reduce(Rat::zero, |a, b| a + b);
    if !total.is_integer() || total.is_negative() {
        return Err(EmbedError::NonIntegralCount(total));
    }
    Ok(total.to_integer() as u64)
}

/// The generator of Gal(K/Q): omega -> D - omega, eta -> u + v eta.
fn sigma_coeffs(k: &CMField) -> Option<((Rat, Rat), (Rat, Rat))> {
    let f = k.real_field();
    let delta = k.delta();
    let s = rational_sqrt(&(f.norm(&delta) / rat(f.d())))?;
    let v = f.div(&QuadElem::new(Rat::zero(), s), &delta).ok()?;
    let (a0, a1) = k.alpha();
    let alpha = f.from_omega_ints(a0, a1);
    let u = (alpha.conj() - f.mul(&v, &alpha)).scale(Rat::new(1, 2));
    Some((f.to_omega_coords(&u), f.to_omega_coords(&v)))
}

fn apply_sigma(k: &CMField, alg: &QuatAlgebra, sol: &EmbeddingSolution) -> Option<EmbeddingSolution> {
    let ((u0, u1), (v0, v1)) = sigma_coeffs(k)?;
    let l1 = &sol.lambda1;
    let ev = |c0: Rat, c1: Rat| BlockMatrix::scalar(c0).add(&l1.scale(c1));
    Some(EmbeddingSolution {
        lambda1: BlockMatrix::scalar(rat(k.disc())).sub(l1),
        lambda2: ev(u0, u1).add(&ev(v0, v1).mul(alg, &sol.lambda2)),
    })
}

/// Orbit of a solution under unit conjugation and complex conjugation.
fn small_orbit(alg: &QuatAlgebra, ring: &EndRing, sol: &EmbeddingSolution) -> Vec<EmbeddingSolution> {
    let rs = torsion_units(alg, &ring.order);
    let ss = torsion_units(alg, &ring.right_order);
    let mut us = Vec::new();
    for r in &rs {
        for s in &ss {
            us.push((BlockMatrix::diag(*r, *s), BlockMatrix::diag(r.conj(), s.conj())));
            if ring.is_diagonal() {
                us.push((BlockMatrix::antidiag(*r, *s), BlockMatrix::antidiag(s.conj(), r.conj())));
            }
        }
    }
    let r2 = rosati(&sol.lambda2, ring.norm_ideal);
    let mut out = Vec::new();
    for (u, uinv) in &us {
        let l1 = u.mul(alg, &sol.lambda1).mul(alg, uinv);
        out.push(EmbeddingSolution { lambda1: l1.clone(), lambda2: u.mul(alg, &sol.lambda2).mul(alg, uinv) });
        out.push(EmbeddingSolution { lambda1: l1, lambda2: u.mul(alg, &r2).mul(alg, uinv) });
    }
    out
}

fn full_aut_orbits(k: &CMField, alg: &QuatAlgebra, ring: &EndRing, reps: &[EmbeddingSolution]) -> usize {
    let orbits: Vec<Vec<EmbeddingSolution>> = reps.iter().map(|r| small_orbit(alg, ring, r)).collect();
    let mut parent: Vec<usize> = (0..reps.len()).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut i = i;
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for (i, rep) in reps.iter().enumerate() {
        let Some(img) = apply_sigma(k, alg, rep) else { continue };
        if let Some(j) = orbits.iter().position(|o| o.contains(&img)) {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            parent[a] = b;
        }
    }
    (0..reps.len()).filter(|&i| find(&mut parent, i) == i).count()
}

/// Count at p together with representatives and the full-automorphism count.
pub fn embedding_report(k: &CMField, p: i128) -> Result<PrimeReport, EmbedError> {
    let data = end_rings_cached(p)?;
    let alg = &data.alg;
    let rings: Vec<RingReport> = data
        .rings
        .par_iter()
        .enumerate()
        .map(|(index, ring)| {
            let (found, reps) = ring_representatives(k, alg, ring);
            let full = full_aut_orbits(k, alg, ring, &reps);
            RingReport {
                index,
                diagonal: ring.is_diagonal(),
                norm_ideal: ring.norm_ideal,
                found,
                representatives: reps,
                full_aut_orbits: full,
            }
        })
        .collect();
    let total: Rat = rings.iter().zip(&data.rings).map(|(r, ring)| weight(ring, r.representatives.len())).sum();
    let full: Rat = rings.iter().zip(&data.rings).map(|(r, ring)| weight(ring, r.full_aut_orbits)).sum();
    if !total.is_integer() || total.is_negative() {
        return Err(EmbedError::NonIntegralCount(total));
    }
    Ok(PrimeReport { p, count: total.to_integer() as u64, full_aut_count: full, rings })
}

/// Primes up to the bound that survive the integrality prefilter.
pub fn candidate_primes(k: &CMField, prime_bound: i128) -> Vec<i128> {
    primes_up_to(prime_bound).into_iter().filter(|&p| prime_passes_prefilter(k, p)).collect()
}

/// p -> embedding_count(K, p) over p <= prime_bound, zeros dropped.
pub fn embedding_tally(k: &CMField, prime_bound: i128) -> Result<PrimeTally, EmbedError> {
    let counts: Vec<(i128, u64)> = candidate_primes(k, prime_bound)
        .par_iter()
        .map(|&p| embedding_count(k, p).map(|c| (p, c)))
        .collect::<Result<_, _>>()?;
    Ok(PrimeTally::from_ints(counts.into_iter().map(|(p, c)| (p, c as i128))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn field(name: &str) -> CMField {
        fixtures::by_name(name).unwrap().field().unwrap()
    }

    #[test]
    fn s11_interval() {
        assert_eq!(s11_range(5), 2..=3);
        assert_eq!(s11_range(8), 3..=5);
        assert_eq!(s11_range(13), 5..=8);
        for d in [5, 8, 12, 13, 17, 21, 24, 29, 37, 53, 61] {
            for s in s11_range(d) {
                assert!(-s * s + s * d - (d * d - d) / 4 > 0, "d = {d}, s = {s}");
            }
            let (lo, hi) = (*s11_range(d).start(), *s11_range(d).end());
            assert!((2 * (lo - 1) - d).pow(2) > d && (2 * (hi + 1) - d).pow(2) > d);
        }
    }

    #[test]
    fn rosati_examples() {
        let ni = rat(3);
        let x = QuatElem::from_ints([1, 2, 0, -1]);
        let w = QuatElem::from_ints([0, 1, 1, 1]);
        assert_eq!(rosati(&BlockMatrix::identity(), ni), BlockMatrix::identity());
        assert_eq!(rosati(&BlockMatrix::diag(x, w), ni), BlockMatrix::diag(x.conj(), w.conj()));
        let z = QuatElem::zero();
        assert_eq!(
            rosati(&BlockMatrix::new(z, x, z, z), ni),
            BlockMatrix::new(z, z, x.conj().scale(Rat::new(1, 3)), z)
        );
    }

    #[test]
    fn outside_interval_gives_negative_s12_norm() {
        let k = field("dt29");
        let c = Consts::of(&k);
        let s = *s11_range(c.d).end() + 1;
        let t = targets(&c, s, 0, Rat::one());
        assert!(t.norm_s12.is_negative());
        let data = all_end_rings(5).unwrap();
        assert!(data.rings[0].ideal.fixed_norm(&data.alg, &t.norm_s12).is_empty());
    }

    #[test]
    fn remove_conjugates_trivial() {
        let data = all_end_rings(2).unwrap();
        assert!(remove_conjugates(&data.alg, &data.rings[0], &[]).is_empty());
    }

    #[test]
    fn cyclotomic_has_no_solutions_at_7() {
        let k = field("dt5");
        let data = all_end_rings(7).unwrap();
        for r in &data.rings {
            assert!(find_solutions(&k, &data.alg, r).is_empty());
        }
    }

    #[test]
    fn dt29_at_5() {
        let k = field("dt29");
        let data = all_end_rings(5).unwrap();
        let sols: Vec<_> = data.rings.iter().flat_map(|r| find_solutions(&k, &data.alg, r)).collect();
        assert!(!sols.is_empty());
        assert_eq!(embedding_count(&k, 5).unwrap(), 2);
    }

    #[test]
    fn sigma_is_an_automorphism() {
        let k = field("dt29");
        let data = all_end_rings(5).unwrap();
        let ring = &data.rings[0];
        for sol in find_solutions(&k, &data.alg, ring) {
            let img = apply_sigma(&k, &data.alg, &sol).unwrap();
            assert!(is_solution(&k, &data.alg, ring.norm_ideal, &img));
            let twice = apply_sigma(&k, &data.alg, &img).unwrap();
            assert_eq!(twice.lambda1, sol.lambda1);
            assert_eq!(twice.lambda2, rosati(&sol.lambda2, ring.norm_ideal));
        }
    }
}
