use std::collections::VecDeque;

use num_traits::One;

use super::{QuatAlgebra, QuatElem, QuatError, QuatLattice};
use crate::exactmath::int::{factor, is_prime};
use crate::exactmath::{frac, rat, Rat};

fn is_integral_elem(alg: &QuatAlgebra, x: &QuatElem) -> bool {
    x.trd().is_integer() && alg.nrd(x).is_integer()
}

/// The smallest order containing `o` and `x`, if it stays inside `bound`.
fn order_closure(alg: &QuatAlgebra, o: &QuatLattice, x: &QuatElem, bound: &QuatLattice) -> Option<QuatLattice> {
    let mut gens: Vec<QuatElem> = o.basis().to_vec();
    gens.push(*x);
    let mut l = QuatLattice::from_generators(&gens).ok()?;
    loop {
        if !bound.contains_lattice(&l) || !l.basis().iter().all(|b| is_integral_elem(alg, b)) {
            return None;
        }
        let next = l.product(alg, &l);
        if next == l {
            return Some(l);
        }
        l = next;
    }
}

/// An order strictly containing `o` with index a power of `ell`, if any.
fn enlarge_at(alg: &QuatAlgebra, o: &QuatLattice, ell: i128) -> Option<QuatLattice> {
    let bound = o.scale(Rat::new(1, ell));
    let total = ell.pow(4);
    for idx in 1..total {
        let mut k = idx;
        let c: Vec<i128> = (0..4)
            .map(|_| {
                let v = k % ell;
                k /= ell;
                v
            })
            .collect();
        let x = o.element(&c).scale(Rat::new(1, ell));
        if !is_integral_elem(alg, &x) {
            continue;
        }
        if let Some(l) = order_closure(alg, o, &x, &bound) {
            return Some(l);
        }
    }
    None
}

/// A maximal order of B_p, by saturating Z<1, i, j, k> prime by prime.
pub fn maximal_order(alg: &QuatAlgebra) -> Result<QuatLattice, QuatError> {
    let mut o = QuatLattice::standard();
    loop {
        let drd = o.reduced_discriminant(alg);
        if drd == rat(alg.p) {
            return Ok(o);
        }
        let excess = drd / rat(alg.p);
        if !excess.is_integer() {
            return Err(QuatError::SaturationFailure(drd));
        }
        let mut grown = None;
        for (ell, _) in factor(excess.to_integer()) {
            if let Some(l) = enlarge_at(alg, &o, ell) {
                grown = Some(l);
                break;
            }
        }
        o = grown.ok_or(QuatError::SaturationFailure(drd))?;
    }
}

/// The mass (p - 1) / 12 of a maximal order in B_p.
pub fn mass(p: i128) -> Rat {
    frac(p - 1, 12)
}

fn unit_weight(alg: &QuatAlgebra, o: &QuatLattice) -> Rat {
    Rat::new(2, o.units(alg).len() as i128)
}

/// The left O-ideals J of index ell^2 in I with N(J) = ell N(I).
pub fn neighbors(alg: &QuatAlgebra, o: &QuatLattice, ideal: &QuatLattice, ell: i128) -> Vec<QuatLattice> {
    let n = ideal.norm(alg);
    let ell_i = ideal.scale(rat(ell));
    let target_volume = ideal.volume() * rat(ell * ell);
    let mut out: Vec<QuatLattice> = Vec::new();
    for idx in 1..ell.pow(4) {
        let mut k = idx;
        let c: Vec<i128> = (0..4)
            .map(|_| {
                let v = k % ell;
                k /= ell;
                v
            })
            .collect();
        let beta = ideal.element(&c);
        let q = alg.nrd(&beta) / n;
        if !(q / rat(ell)).is_integer() {
            continue;
        }
        let j = ell_i.sum(&ideal_from_element(alg, o, &beta));
        if j.volume() == target_volume && !out.contains(&j) {
            out.push(j);
        }
    }
    out.sort();
    out
}

/// The lattice O * beta (not full rank when beta = 0).
fn ideal_from_element(alg: &QuatAlgebra, o: &QuatLattice, beta: &QuatElem) -> QuatLattice {
    o.right_mul(alg, beta)
}

/// Whether I and J are in the same left ideal class (J = I x for some x).
pub fn is_equivalent(alg: &QuatAlgebra, i: &QuatLattice, j: &QuatLattice) -> bool {
    let ni = i.norm(alg);
    let nj = j.norm(alg);
    let l = i.conj().product(alg, j);
    !l.fixed_norm(alg, &(ni * nj)).is_empty()
}

/// Right order, computed as a colon lattice.
pub fn right_order(alg: &QuatAlgebra, i: &QuatLattice) -> QuatLattice {
    let o = i.right_order(alg);
    debug_assert_eq!(o, i.conj().product(alg, i).scale(Rat::one() / i.norm(alg)));
    o
}

/// One integral representative per left ideal class of a maximal order,
/// starting with the order itself, found by walking neighbor ideals until
/// the mass formula is satisfied.
pub fn left_ideal_classes(alg: &QuatAlgebra, o: &QuatLattice) -> Result<Vec<QuatLattice>, QuatError> {
    let ell = (2..).find(|&l| is_prime(l) && l != alg.p).expect("primes are infinite");
    let expected = mass(alg.p);
    let mut classes = vec![o.clone()];
    let mut found = unit_weight(alg, o);
    let mut queue = VecDeque::from([o.clone()]);
    while found < expected {
        let Some(cur) = queue.pop_front() else { break };
        for j in neighbors(alg, o, &cur, ell) {
            if classes.iter().any(|c| is_equivalent(alg, c, &j)) {
                continue;
            }
            found += unit_weight(alg, &right_order(alg, &j));
            classes.push(j.clone());
            queue.push_back(j);
            if found >= expected {
                break;
            }
        }
    }
    if found != expected {
        return Err(QuatError::MassMismatch { found, expected });
    }
    Ok(classes)
}

/// A block ring [O, I; I^-1, O'] given by its three lattices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndRing {
    pub order: QuatLattice,
    pub ideal: QuatLattice,
    pub right_order: QuatLattice,
    pub norm_ideal: Rat,
}

impl EndRing {
    pub fn new(alg: &QuatAlgebra, order: QuatLattice, ideal: QuatLattice) -> Self {
        let right_order = right_order(alg, &ideal);
        let norm_ideal = ideal.norm(alg);
        EndRing { order, ideal, right_order, norm_ideal }
    }

    /// The ideal is literally the order, so both curves coincide.
    pub fn is_diagonal(&self) -> bool {
        self.ideal == self.order
    }
}

/// For each right order O of the class set and each left ideal class I of
/// O, the triple (O, I, O_R(I)).
pub fn all_end_rings(alg: &QuatAlgebra) -> Result<Vec<EndRing>, QuatError> {
    let o0 = maximal_order(alg)?;
    let orders: Vec<QuatLattice> = left_ideal_classes(alg, &o0)?.iter().map(|i| right_order(alg, i)).collect();
    let mut out = Vec::new();
    for o in orders {
        for i in left_ideal_classes(alg, &o)? {
            out.push(EndRing::new(alg, o.clone(), i));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(p: i128) -> (QuatAlgebra, QuatLattice) {
        let alg = QuatAlgebra::for_prime(p).unwrap();
        let o = maximal_order(&alg).unwrap();
        (alg, o)
    }

    #[test]
    fn maximal_orders_small_primes() {
        let (alg, o) = setup(2);
        assert!(o.is_order(&alg));
        assert_eq!(o.reduced_discriminant(&alg), rat(2));
        assert!(o.contains(&QuatElem([frac(1, 2); 4])));
        assert_eq!(o.units(&alg).len(), 24);

        let (alg, o) = setup(3);
        assert_eq!(o.reduced_discriminant(&alg), rat(3));
        assert_eq!(o.units(&alg).len(), 12);
        // Z<1, i, (1+k)/2, (i+j)/2> is another maximal order; class number 1
        // makes it a conjugate of ours.
        let h = frac(1, 2);
        let other = QuatLattice::from_generators(&[
            QuatElem::one(),
            alg.i(),
            QuatElem([h, rat(0), rat(0), h]),
            QuatElem([rat(0), h, h, rat(0)]),
        ])
        .unwrap();
        assert!(other.is_order(&alg));
        assert_eq!(other.reduced_discriminant(&alg), rat(3));
        let conjugate = (1..=6).any(|n| {
            o.fixed_norm(&alg, &rat(n)).iter().any(|x| {
                let inv = alg.inverse(x).unwrap();
                o.left_mul(&alg, x).right_mul(&alg, &inv) == other
            })
        });
        assert!(conjugate);
    }

    #[test]
    fn class_numbers() {
        for (p, h) in [(2, 1), (3, 1), (5, 1), (7, 1), (11, 2), (13, 1), (23, 3), (37, 3)] {
            let (alg, o) = setup(p);
            let cls = left_ideal_classes(&alg, &o).unwrap();
            assert_eq!(cls.len(), h, "p = {p}");
            assert_eq!(cls[0], o);
            for c in &cls {
                assert_eq!(c.left_order(&alg), o);
            }
        }
    }

    #[test]
    fn ideal_norms() {
        let (alg, o) = setup(11);
        assert_eq!(o.norm(&alg), rat(1));
        assert_eq!(o.scale(rat(2)).norm(&alg), rat(4));
        let cls = left_ideal_classes(&alg, &o).unwrap();
        assert_eq!(cls[1].norm(&alg), rat(2));
        assert!(!is_equivalent(&alg, &cls[0], &cls[1]));
        assert!(is_equivalent(&alg, &cls[1], &cls[1]));
        let gamma = QuatElem::from_ints([1, 2, -1, 1]);
        assert!(is_equivalent(&alg, &cls[1], &cls[1].right_mul(&alg, &gamma)));
    }

    #[test]
    fn end_ring_counts() {
        for (p, n) in [(2, 1), (5, 1), (11, 4)] {
            let alg = QuatAlgebra::for_prime(p).unwrap();
            assert_eq!(all_end_rings(&alg).unwrap().len(), n, "p = {p}");
        }
    }
}
