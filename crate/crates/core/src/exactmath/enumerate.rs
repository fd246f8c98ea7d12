//! Fincke–Pohst enumeration with exact rational bounds.
//!
//! The form is decomposed as `q(x) = sum_i d_i (x_i + sum_{j>i} mu_ij x_j)^2`
//! and coordinates are fixed from the last one down. Every interval endpoint
//! is decided by an exact comparison, so vectors sitting exactly on the
//! boundary are never lost.

use num_traits::{Signed, Zero};

use super::{integer_window, rat, ExactError, Rat, RatMatrix};

struct Decomposition {
    diag: Vec<Rat>,
    // mu[i][j] for j > i
    mu: Vec<Vec<Rat>>,
}

fn decompose(gram: &RatMatrix) -> Result<Decomposition, ExactError> {
    let n = gram.nrows();
    if gram.ncols() != n || !gram.is_symmetric() {
        return Err(ExactError::Dimension("Gram matrix must be square and symmetric".into()));
    }
    let mut diag = vec![Rat::zero(); n];
    let mut mu = vec![vec![Rat::zero(); n]; n];
    for i in 0..n {
        let mut d = gram[(i, i)];
        for k in 0..i {
            d -= diag[k] * mu[k][i] * mu[k][i];
        }
        if !d.is_positive() {
            return Err(ExactError::NotPositiveDefinite);
        }
        diag[i] = d;
        for j in i + 1..n {
            let mut s = gram[(i, j)];
            for k in 0..i {
                s -= diag[k] * mu[k][i] * mu[k][j];
            }
            mu[i][j] = s / d;
        }
    }
    Ok(Decomposition { diag, mu })
}

/// Visit every integer vector `x` with `(x - center) G (x - center)^T <= bound`.
///
/// The callback receives the vector and its exact form value.
pub fn enumerate_ellipsoid<F>(
    gram: &RatMatrix,
    center: &[Rat],
    bound: &Rat,
    mut visit: F,
) -> Result<(), ExactError>
where
    F: FnMut(&[i128], &Rat),
{
    let n = gram.nrows();
    if center.len() != n {
        return Err(ExactError::Dimension("center length".into()));
    }
    let dec = decompose(gram)?;
    if bound.is_negative() {
        return Ok(());
    }
    if n == 0 {
        visit(&[], &Rat::zero());
        return Ok(());
    }
    let mut x = vec![0i128; n];
    let mut shifted = vec![Rat::zero(); n];
    recurse(&dec, center, bound, n - 1, *bound, &mut x, &mut shifted, &mut visit);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn recurse<F>(
    dec: &Decomposition,
    center: &[Rat],
    bound: &Rat,
    level: usize,
    remaining: Rat,
    x: &mut [i128],
    shifted: &mut [Rat],
    visit: &mut F,
) where
    F: FnMut(&[i128], &Rat),
{
    let n = x.len();
    let mut c = center[level];
    for j in level + 1..n {
        c -= dec.mu[level][j] * shifted[j];
    }
    let d = dec.diag[level];
    let Some((lo, hi)) = integer_window(&c, &(remaining / d)) else {
        return;
    };
    for v in lo..=hi {
        let t = rat(v) - c;
        let rest = remaining - d * t * t;
        x[level] = v;
        shifted[level] = rat(v) - center[level];
        if level == 0 {
            visit(x, &(bound - rest));
        } else {
            recurse(dec, center, bound, level - 1, rest, x, shifted, visit);
        }
    }
}

/// All integer vectors with `x G x^T = value`, sorted lexicographically.
pub fn enumerate_fixed_value(gram: &RatMatrix, value: &Rat) -> Result<Vec<Vec<i128>>, ExactError> {
    let zero = vec![Rat::zero(); gram.nrows()];
    enumerate_fixed_value_centered(gram, &zero, value)
}

/// All integer vectors with `(x - c) G (x - c)^T = value`, sorted lexicographically.
pub fn enumerate_fixed_value_centered(
    gram: &RatMatrix,
    center: &[Rat],
    value: &Rat,
) -> Result<Vec<Vec<i128>>, ExactError> {
    let mut out = Vec::new();
    enumerate_ellipsoid(gram, center, value, |x, v| {
        if v == value {
            out.push(x.to_vec());
        }
    })?;
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::{frac, int::isqrt};
    use proptest::prelude::*;

    fn box_search(gram: &RatMatrix, value: &Rat, radius: i128) -> Vec<Vec<i128>> {
        let n = gram.nrows();
        let mut out = Vec::new();
        let side = (2 * radius + 1) as usize;
        let total = side.pow(n as u32);
        for idx in 0..total {
            let mut k = idx;
            let x: Vec<i128> = (0..n)
                .map(|_| {
                    let v = (k % side) as i128 - radius;
                    k /= side;
                    v
                })
                .collect();
            let xr: Vec<Rat> = x.iter().map(|&v| rat(v)).collect();
            if gram.quadratic_form(&xr) == *value {
                out.push(x);
            }
        }
        out.sort();
        out
    }

    #[test]
    fn unit_vectors_of_identity() {
        let g = RatMatrix::identity(4);
        let v = enumerate_fixed_value(&g, &rat(1)).unwrap();
        assert_eq!(v.len(), 8);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(enumerate_fixed_value(&g, &rat(0)).unwrap(), vec![vec![0, 0, 0, 0]]);
        assert!(enumerate_fixed_value(&g, &rat(-1)).unwrap().is_empty());
    }

    #[test]
    fn diagonal_form_value_three() {
        let g = RatMatrix::diagonal(&[rat(1), rat(1), rat(3), rat(3)]);
        let got = enumerate_fixed_value(&g, &rat(3)).unwrap();
        assert_eq!(
            got,
            vec![vec![0, 0, -1, 0], vec![0, 0, 0, -1], vec![0, 0, 0, 1], vec![0, 0, 1, 0]]
        );
        assert_eq!(got, box_search(&g, &rat(3), 2));
    }

    #[test]
    fn centered_enumeration() {
        let g = RatMatrix::identity(2);
        let got = enumerate_fixed_value_centered(&g, &[frac(1, 2), frac(1, 2)], &frac(1, 2)).unwrap();
        assert_eq!(got, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn rejects_indefinite() {
        let g = RatMatrix::diagonal(&[rat(1), rat(-1)]);
        assert_eq!(enumerate_fixed_value(&g, &rat(1)), Err(ExactError::NotPositiveDefinite));
    }

    fn pd_gram() -> impl Strategy<Value = RatMatrix> {
        // G = A^T A + I with small integer A is positive definite and integral.
        prop::collection::vec(-3i128..=3, 16).prop_map(|a| {
            let mut g = RatMatrix::identity(4);
            for i in 0..4 {
                for j in 0..4 {
                    let s: i128 = (0..4).map(|k| a[k * 4 + i] * a[k * 4 + j]).sum();
                    g[(i, j)] += rat(s);
                }
            }
            g
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn agrees_with_box_search(g in pd_gram(), value in 0i128..=50) {
            // Every coordinate satisfies |x_i| <= sqrt(value * (G^-1)_ii).
            let inv = g.inverse().unwrap();
            let radius = (0..4)
                .map(|i| isqrt((inv[(i, i)] * rat(value)).ceil().to_integer()) + 1)
                .max()
                .unwrap();
            let got = enumerate_fixed_value(&g, &rat(value)).unwrap();
            prop_assert_eq!(got, box_search(&g, &rat(value), radius));
        }

        #[test]
        fn closed_under_negation(g in pd_gram(), value in 1i128..=40) {
            let got = enumerate_fixed_value(&g, &rat(value)).unwrap();
            for x in &got {
                let neg: Vec<i128> = x.iter().map(|v| -v).collect();
                prop_assert!(got.binary_search(&neg).is_ok());
            }
        }
    }
}
