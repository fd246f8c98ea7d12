use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{QuatAlgebra, QuatElem, QuatError};
use crate::exactmath::int::isqrt;
use crate::exactmath::{
    enumerate_fixed_value, enumerate_fixed_value_centered, is_integral, lattice_hnf, lcm_of_denominators, rat,
    rational_gcd, solve_linear, Rat, RatMatrix,
};

/// A full-rank Z-lattice in B_p, stored by its canonical HNF basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuatLattice {
    basis: [QuatElem; 4],
}

impl QuatLattice {
    pub fn from_generators(gens: &[QuatElem]) -> Result<Self, QuatError> {
        let rows: Vec<Vec<Rat>> = gens.iter().map(|g| g.0.to_vec()).collect();
        let h = lattice_hnf(&rows);
        if h.len() != 4 {
            return Err(QuatError::Degenerate);
        }
        Ok(QuatLattice { basis: std::array::from_fn(|i| QuatElem(std::array::from_fn(|j| h[i][j]))) })
    }

    /// Z<1, i, j, k>.
    pub fn standard() -> Self {
        Self::from_generators(&(0..4).map(QuatElem::basis).collect::<Vec<_>>()).expect("full rank")
    }

    pub fn basis(&self) -> &[QuatElem; 4] {
        &self.basis
    }

    pub fn matrix(&self) -> RatMatrix {
        RatMatrix::from_rows(&self.basis.iter().map(|b| b.0.to_vec()).collect::<Vec<_>>())
    }

    /// Coordinates of x in this basis (not necessarily integral).
    pub fn coordinates(&self, x: &QuatElem) -> Vec<Rat> {
        solve_linear(&self.matrix(), &x.0).expect("basis has full rank")
    }

    pub fn contains(&self, x: &QuatElem) -> bool {
        is_integral(&self.coordinates(x))
    }

    pub fn contains_lattice(&self, other: &QuatLattice) -> bool {
        other.basis.iter().all(|b| self.contains(b))
    }

    pub fn element(&self, coords: &[i128]) -> QuatElem {
        self.basis
            .iter()
            .zip(coords)
            .fold(QuatElem::zero(), |acc, (b, &c)| acc + b.scale(rat(c)))
    }

    /// Covolume relative to Z<1, i, j, k>.
    pub fn volume(&self) -> Rat {
        self.matrix().determinant().abs()
    }

    pub fn scale(&self, c: Rat) -> Self {
        Self::from_generators(&self.basis.map(|b| b.scale(c))).expect("nonzero scale")
    }

    pub fn conj(&self) -> Self {
        Self::from_generators(&self.basis.map(|b| b.conj())).expect("full rank")
    }

    pub fn sum(&self, other: &QuatLattice) -> Self {
        let gens: Vec<QuatElem> = self.basis.iter().chain(&other.basis).copied().collect();
        Self::from_generators(&gens).expect("full rank")
    }

    /// The lattice spanned by all products x y with x in self, y in other.
    pub fn product(&self, alg: &QuatAlgebra, other: &QuatLattice) -> Self {
        let mut gens = Vec::with_capacity(16);
        for x in &self.basis {
            for y in &other.basis {
                gens.push(alg.mul(x, y));
            }
        }
        Self::from_generators(&gens).expect("product of full-rank lattices")
    }

    pub fn left_mul(&self, alg: &QuatAlgebra, x: &QuatElem) -> Self {
        Self::from_generators(&self.basis.map(|b| alg.mul(x, &b))).expect("x is invertible")
    }

    pub fn right_mul(&self, alg: &QuatAlgebra, x: &QuatElem) -> Self {
        Self::from_generators(&self.basis.map(|b| alg.mul(&b, x))).expect("x is invertible")
    }

    /// Dual under the coordinate dot product.
    fn dual(&self) -> Self {
        let inv = self.matrix().inverse().expect("full rank").transpose();
        Self::from_generators(&inv.rows().into_iter().map(|r| QuatElem(std::array::from_fn(|j| r[j]))).collect::<Vec<_>>())
            .expect("full rank")
    }

    pub fn intersection(lattices: &[QuatLattice]) -> Self {
        let mut acc = lattices[0].dual();
        for l in &lattices[1..] {
            acc = acc.sum(&l.dual());
        }
        acc.dual()
    }

    /// {x : self * x contained in self}.
    pub fn right_order(&self, alg: &QuatAlgebra) -> Self {
        let parts: Vec<QuatLattice> = self
            .basis
            .iter()
            .map(|b| self.left_mul(alg, &alg.inverse(b).expect("nonzero basis element")))
            .collect();
        Self::intersection(&parts)
    }

    /// {x : x * self contained in self}.
    pub fn left_order(&self, alg: &QuatAlgebra) -> Self {
        let parts: Vec<QuatLattice> = self
            .basis
            .iter()
            .map(|b| self.right_mul(alg, &alg.inverse(b).expect("nonzero basis element")))
            .collect();
        Self::intersection(&parts)
    }

    /// Gram matrix G with x G x^T = nrd(x) in this basis.
    pub fn gram(&self, alg: &QuatAlgebra) -> RatMatrix {
        let mut g = RatMatrix::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                g[(i, j)] = alg.trd_pair(&self.basis[i], &self.basis[j]) / rat(2);
            }
        }
        g
    }

    /// gcd of nrd over the lattice.
    pub fn norm(&self, alg: &QuatAlgebra) -> Rat {
        let mut vals = Vec::with_capacity(10);
        for i in 0..4 {
            vals.push(alg.nrd(&self.basis[i]));
            for j in i + 1..4 {
                vals.push(alg.trd_pair(&self.basis[i], &self.basis[j]));
            }
        }
        rational_gcd(&vals)
    }

    /// sqrt |det trd(e_i conj(e_j))|.
    pub fn reduced_discriminant(&self, alg: &QuatAlgebra) -> Rat {
        let d = (self.gram(alg).determinant() * rat(16)).abs();
        let (n, m) = (*d.numer(), *d.denom());
        let (rn, rm) = (isqrt(n), isqrt(m));
        assert!(rn * rn == n && rm * rm == m, "discriminant of a lattice in B_p is a square");
        Rat::new(rn, rm)
    }

    /// Contains 1, closed under multiplication.
    pub fn is_order(&self, alg: &QuatAlgebra) -> bool {
        self.contains(&QuatElem::one())
            && self
                .basis
                .iter()
                .all(|x| self.basis.iter().all(|y| self.contains(&alg.mul(x, y))))
    }

    /// All elements with reduced norm `n`, sorted.
    pub fn fixed_norm(&self, alg: &QuatAlgebra, n: &Rat) -> Vec<QuatElem> {
        if n.is_negative() {
            return Vec::new();
        }
        let vs = enumerate_fixed_value(&self.gram(alg), n).expect("nrd is positive definite");
        let mut out: Vec<QuatElem> = vs.iter().map(|v| self.element(v)).collect();
        out.sort();
        out
    }

    /// All elements with reduced norm `n` and reduced trace `t`, sorted.
    ///
    /// Works on the affine slice trd = t: a unimodular change of basis
    /// puts the trace on a single coordinate, and the remaining three
    /// coordinates are enumerated around the induced center.
    pub fn fixed_norm_and_trace(&self, alg: &QuatAlgebra, n: &Rat, t: &Rat) -> Vec<QuatElem> {
        if n.is_negative() || *t * *t > *n * rat(4) {
            return Vec::new();
        }
        let traces: Vec<Rat> = self.basis.iter().map(QuatElem::trd).collect();
        let l = lcm_of_denominators(&traces);
        let tau: Vec<i128> = traces.iter().map(|x| (x * rat(l)).to_integer()).collect();
        let target = *t * rat(l);
        let (g, u) = trace_reduction(&tau);
        if !target.is_integer() || target.to_integer() % g != 0 {
            return Vec::new();
        }
        let y0 = target.to_integer() / g;
        // new basis b'_k = sum_i u[i][k] b_i
        let nb: Vec<QuatElem> = (0..4)
            .map(|k| (0..4).fold(QuatElem::zero(), |acc, i| acc + self.basis[i].scale(rat(u[i][k]))))
            .collect();
        let base = nb[0].scale(rat(y0));
        let mut g3 = RatMatrix::zeros(3, 3);
        let mut lin = [Rat::zero(); 3];
        for r in 0..3 {
            for c in 0..3 {
                g3[(r, c)] = alg.trd_pair(&nb[r + 1], &nb[c + 1]) / rat(2);
            }
            lin[r] = alg.trd_pair(&base, &nb[r + 1]) / rat(2);
        }
        // nrd(base + y B) = (y - c) G (y - c)^T + nrd(base) - c G c^T with c = -lin G^-1
        let ginv = g3.inverse().expect("trace-zero part is definite");
        let c: Vec<Rat> = ginv.left_mul_vec(&lin).into_iter().map(|x| -x).collect();
        let shift = g3.quadratic_form(&c);
        let value = *n - alg.nrd(&base) + shift;
        let Ok(ys) = enumerate_fixed_value_centered(&g3, &c, &value) else {
            return Vec::new();
        };
        let mut out: Vec<QuatElem> = ys
            .iter()
            .map(|y| (0..3).fold(base, |acc, r| acc + nb[r + 1].scale(rat(y[r]))))
            .collect();
        out.sort();
        debug_assert!(out.iter().all(|x| alg.nrd(x) == *n && x.trd() == *t));
        out
    }

    /// Norm-one elements.
    pub fn units(&self, alg: &QuatAlgebra) -> Vec<QuatElem> {
        self.fixed_norm(alg, &Rat::one())
    }
}

/// Unimodular U with tau U = (g, 0, 0, 0), g = gcd(tau) > 0.
fn trace_reduction(tau: &[i128]) -> (i128, [[i128; 4]; 4]) {
    let mut u = [[0i128; 4]; 4];
    for (i, row) in u.iter_mut().enumerate() {
        row[i] = 1;
    }
    let mut v = [tau[0], tau[1], tau[2], tau[3]];
    for k in 1..4 {
        // combine columns 0 and k so that v[k] becomes 0
        if v[k] == 0 {
            continue;
        }
        let e = v[0].extended_gcd(&v[k]);
        let (a, b) = (v[0] / e.gcd, v[k] / e.gcd);
        // [x, -b; y, a] has determinant x a + y b = 1
        for row in u.iter_mut() {
            let (c0, ck) = (row[0], row[k]);
            row[0] = e.x * c0 + e.y * ck;
            row[k] = -b * c0 + a * ck;
        }
        v[0] = e.gcd;
        v[k] = 0;
    }
    if v[0] < 0 {
        for row in u.iter_mut() {
            row[0] = -row[0];
        }
        v[0] = -v[0];
    }
    (v[0], u)
}
