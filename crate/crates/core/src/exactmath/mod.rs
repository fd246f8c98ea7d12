//! Exact rational linear algebra and lattice-point enumeration.
//!
//! Everything here works over `Ratio<i128>`. Release builds keep overflow
//! checks on, so a coefficient blow-up aborts loudly instead of wrapping.

mod enumerate;
mod hnf;
pub mod int;

use std::fmt;
use std::ops::{Index, IndexMut};

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use enumerate::{enumerate_ellipsoid, enumerate_fixed_value, enumerate_fixed_value_centered};
pub use hnf::{hnf_integer_rows, lattice_hnf};

pub type Rat = Ratio<i128>;
pub type RationalVector = Vec<Rat>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("vector is not in the row span of the matrix")]
    NoSolution,
    #[error("quadratic form is not positive definite")]
    NotPositiveDefinite,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub fn rat(n: i128) -> Rat {
    Rat::from_integer(n)
}

pub fn frac(n: i128, d: i128) -> Rat {
    Rat::new(n, d)
}

/// Dense rational matrix, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, data: vec![Rat::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Rat>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        RatMatrix { rows: rows.len(), cols, data: rows.iter().flatten().cloned().collect() }
    }

    pub fn from_int_rows(rows: &[Vec<i128>]) -> Self {
        let rows: Vec<Vec<Rat>> = rows.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn diagonal(entries: &[Rat]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = *e;
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows(&self) -> Vec<Vec<Rat>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Row vector times matrix.
    pub fn left_mul_vec(&self, x: &[Rat]) -> RationalVector {
        assert_eq!(x.len(), self.rows);
        (0..self.cols).map(|j| (0..self.rows).map(|i| x[i] * self[(i, j)]).sum()).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// Value of the quadratic form x G x^T.
    pub fn quadratic_form(&self, x: &[Rat]) -> Rat {
        let gx = self.left_mul_vec(x);
        x.iter().zip(&gx).map(|(a, b)| a * b).sum()
    }

    pub fn determinant(&self) -> Rat {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Rat::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&r| !m[(r, c)].is_zero()) else {
                return Rat::zero();
            };
            if p != c {
                m.swap_rows(p, c);
                det = -det;
            }
            let piv = m[(c, c)];
            det *= piv;
            for r in c + 1..n {
                let f = m[(r, c)] / piv;
                if f.is_zero() {
                    continue;
                }
                for k in c..n {
                    let v = m[(c, k)];
                    m[(r, k)] -= f * v;
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Option<RatMatrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut inv = Self::identity(n);
        for c in 0..n {
            let p = (c..n).find(|&r| !m[(r, c)].is_zero())?;
            m.swap_rows(p, c);
            inv.swap_rows(p, c);
            let piv = m[(c, c)];
            for k in 0..n {
                m[(c, k)] /= piv;
                inv[(c, k)] /= piv;
            }
            for r in 0..n {
                if r == c || m[(r, c)].is_zero() {
                    continue;
                }
                let f = m[(r, c)];
                for k in 0..n {
                    let (a, b) = (m[(c, k)], inv[(c, k)]);
                    m[(r, k)] -= f * a;
                    inv[(r, k)] -= f * b;
                }
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for k in 0..self.cols {
            self.data.swap(a * self.cols + k, b * self.cols + k);
        }
    }
}

impl Index<(usize, usize)> for RatMatrix {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries((0..self.rows).map(|i| {
            self.row(i).iter().map(ToString::to_string).collect::<Vec<_>>()
        })).finish()
    }
}

/// Solve `x A = v` for a row vector `x` (rows of `A` are basis vectors).
///
/// When `A` is singular any solution is returned.
pub fn solve_linear(a: &RatMatrix, v: &[Rat]) -> Result<RationalVector, ExactError> {
    if v.len() != a.ncols() {
        return Err(ExactError::Dimension(format!(
            "vector of length {} against {} columns",
            v.len(),
            a.ncols()
        )));
    }
    // Work on A^T x^T = v^T with an augmented column.
    let n = a.nrows();
    let m = a.ncols();
    let mut aug = RatMatrix::zeros(m, n + 1);
    for i in 0..m {
        for j in 0..n {
            aug[(i, j)] = a[(j, i)];
        }
        aug[(i, n)] = v[i];
    }
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let Some(p) = (row..m).find(|&r| !aug[(r, col)].is_zero()) else {
            continue;
        };
        aug.swap_rows(p, row);
        let piv = aug[(row, col)];
        for k in 0..=n {
            aug[(row, k)] /= piv;
        }
        for r in 0..m {
            if r != row && !aug[(r, col)].is_zero() {
                let f = aug[(r, col)];
                for k in 0..=n {
                    let t = aug[(row, k)];
                    aug[(r, k)] -= f * t;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == m {
            break;
        }
    }
    if (row..m).any(|r| !aug[(r, n)].is_zero()) {
        return Err(ExactError::NoSolution);
    }
    let mut x = vec![Rat::zero(); n];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = aug[(r, n)];
    }
    Ok(x)
}

/// Least positive N with N * v_i integral for every entry.
pub fn lcm_of_denominators(v: &[Rat]) -> i128 {
    v.iter().fold(1i128, |acc, x| acc.lcm(x.denom()))
}

pub fn is_integral(v: &[Rat]) -> bool {
    v.iter().all(Ratio::is_integer)
}

/// gcd of a list of rationals: the positive generator of the Z-module they span.
pub fn rational_gcd(v: &[Rat]) -> Rat {
    let den = lcm_of_denominators(v);
    let g = v.iter().fold(0i128, |acc, x| acc.gcd(&(x * den).to_integer()));
    Rat::new(g, den)
}

pub fn floor(x: &Rat) -> i128 {
    x.floor().to_integer()
}

pub fn ceil(x: &Rat) -> i128 {
    x.ceil().to_integer()
}

/// Integers `x` with `(x - center)^2 <= radius_sq`, as an inclusive range.
pub fn integer_window(center: &Rat, radius_sq: &Rat) -> Option<(i128, i128)> {
    if radius_sq.is_negative() {
        return None;
    }
    // floor(sqrt(r)) = isqrt(floor(r))
    let s = int::isqrt(floor(radius_sq));
    let fits = |x: i128| {
        let d = rat(x) - center;
        d * d <= *radius_sq
    };
    let mut hi = floor(center) + s + 1;
    while !fits(hi) && rat(hi) > *center {
        hi -= 1;
    }
    let mut lo = ceil(center) - s - 1;
    while !fits(lo) && rat(lo) < *center {
        lo += 1;
    }
    (lo <= hi && fits(lo) && fits(hi)).then_some((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rv(v: &[i128]) -> RationalVector {
        v.iter().map(|&x| rat(x)).collect()
    }

    #[test]
    fn solve_identity_and_scaling() {
        let id = RatMatrix::identity(4);
        assert_eq!(solve_linear(&id, &rv(&[1, 2, 3, 4])).unwrap(), rv(&[1, 2, 3, 4]));
        let two = RatMatrix::diagonal(&rv(&[2, 2, 2, 2]));
        assert_eq!(
            solve_linear(&two, &rv(&[1, 0, 0, 0])).unwrap(),
            vec![frac(1, 2), rat(0), rat(0), rat(0)]
        );
    }

    #[test]
    fn solve_triangular_rows() {
        let a = RatMatrix::from_int_rows(&[
            vec![1, 0, 0, 0],
            vec![1, 2, 0, 0],
            vec![0, 0, 1, 0],
            vec![0, 0, 0, 1],
        ]);
        let x = solve_linear(&a, &rv(&[3, 2, 0, 0])).unwrap();
        assert_eq!(x, rv(&[2, 1, 0, 0]));
        assert_eq!(a.left_mul_vec(&x), rv(&[3, 2, 0, 0]));
    }

    #[test]
    fn solve_outside_span() {
        let a = RatMatrix::from_int_rows(&[
            vec![1, 0, 0, 0],
            vec![2, 0, 0, 0],
            vec![0, 0, 1, 0],
            vec![0, 0, 0, 1],
        ]);
        assert_eq!(solve_linear(&a, &rv(&[0, 1, 0, 0])), Err(ExactError::NoSolution));
        let x = solve_linear(&a, &rv(&[4, 0, 1, 0])).unwrap();
        assert_eq!(a.left_mul_vec(&x), rv(&[4, 0, 1, 0]));
    }

    #[test]
    fn denominators() {
        assert_eq!(lcm_of_denominators(&[frac(1, 2), frac(1, 3), rat(1), frac(1, 6)]), 6);
        assert_eq!(lcm_of_denominators(&rv(&[0, 0, 0, 0])), 1);
        assert_eq!(lcm_of_denominators(&[frac(3, 4), frac(5, 6), frac(1, 2), rat(7)]), 12);
        assert_eq!(rational_gcd(&[frac(3, 2), rat(6), frac(9, 4)]), frac(3, 4));
    }

    #[test]
    fn windows_are_exact_at_the_boundary() {
        assert_eq!(integer_window(&rat(0), &rat(4)), Some((-2, 2)));
        assert_eq!(integer_window(&frac(1, 2), &frac(1, 4)), Some((0, 1)));
        assert_eq!(integer_window(&frac(1, 2), &frac(1, 5)), None);
        assert_eq!(integer_window(&rat(3), &rat(0)), Some((3, 3)));
        assert_eq!(integer_window(&rat(3), &rat(-1)), None);
    }

    #[test]
    fn determinant_and_inverse() {
        let a = RatMatrix::from_int_rows(&[vec![2, 1], vec![1, 3]]);
        assert_eq!(a.determinant(), rat(5));
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), RatMatrix::identity(2));
    }
}
