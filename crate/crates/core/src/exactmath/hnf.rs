use num_integer::Integer;
use num_traits::Zero;

use super::{lcm_of_denominators, Rat};

/// Row-style Hermite normal form of the lattice spanned by `gens`.
///
/// Returns only the nonzero rows. Pivots are positive and entries above a
/// pivot lie in `[0, pivot)`, so two generating sets of the same lattice give
/// identical output.
pub fn hnf_integer_rows(gens: &[Vec<i128>]) -> Vec<Vec<i128>> {
    let Some(ncols) = gens.first().map(Vec::len) else {
        return Vec::new();
    };
    let mut m: Vec<Vec<i128>> = gens.iter().filter(|r| r.iter().any(|&x| x != 0)).cloned().collect();
    let mut r = 0;
    for col in 0..ncols {
        if r == m.len() {
            break;
        }
        loop {
            let pivot = (r..m.len())
                .filter(|&i| m[i][col] != 0)
                .min_by_key(|&i| m[i][col].abs());
            let Some(p) = pivot else { break };
            m.swap(r, p);
            let mut done = true;
            for i in r + 1..m.len() {
                if m[i][col] != 0 {
                    let q = Integer::div_floor(&m[i][col], &m[r][col]);
                    let (head, tail) = m.split_at_mut(i);
                    for (x, y) in tail[0].iter_mut().zip(&head[r]) {
                        *x -= q * y;
                    }
                    if tail[0][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if m[r][col] == 0 {
            continue;
        }
        if m[r][col] < 0 {
            for x in m[r].iter_mut() {
                *x = -*x;
            }
        }
        for i in 0..r {
            let q = Integer::div_floor(&m[i][col], &m[r][col]);
            if q != 0 {
                let (head, tail) = m.split_at_mut(r);
                for (x, y) in head[i].iter_mut().zip(&tail[0]) {
                    *x -= q * y;
                }
            }
        }
        r += 1;
        m.retain(|row| row.iter().any(|&x| x != 0));
    }
    m.truncate(r);
    m
}

/// Canonical basis of the Z-lattice spanned by rational vectors.
pub fn lattice_hnf(gens: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let flat: Vec<Rat> = gens.iter().flatten().cloned().collect();
    let den = lcm_of_denominators(&flat);
    let ints: Vec<Vec<i128>> = gens
        .iter()
        .map(|r| r.iter().map(|x| (x * den).to_integer()).collect())
        .collect();
    hnf_integer_rows(&ints)
        .into_iter()
        .map(|r| r.into_iter().map(|x| Rat::new(x, den)).collect())
        .filter(|r: &Vec<Rat>| r.iter().any(|x| !x.is_zero()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::{frac, rat};

    #[test]
    fn hnf_is_canonical() {
        let a = vec![vec![2, 0, 0], vec![0, 3, 0], vec![0, 0, 5], vec![4, 6, 10]];
        let b = vec![vec![2, 3, 5], vec![2, 0, 0], vec![0, 3, 5], vec![0, 0, 5]];
        assert_eq!(hnf_integer_rows(&a), hnf_integer_rows(&b));
        assert_eq!(hnf_integer_rows(&a), vec![vec![2, 0, 0], vec![0, 3, 0], vec![0, 0, 5]]);
    }

    #[test]
    fn hnf_reduces_above_pivot() {
        let h = hnf_integer_rows(&[vec![1, 5], vec![0, 3]]);
        assert_eq!(h, vec![vec![1, 2], vec![0, 3]]);
        let h = hnf_integer_rows(&[vec![-1, -5], vec![0, -3]]);
        assert_eq!(h, vec![vec![1, 2], vec![0, 3]]);
    }

    #[test]
    fn rational_lattice() {
        let h = lattice_hnf(&[vec![frac(1, 2), frac(1, 2)], vec![rat(1), rat(0)], vec![rat(0), rat(1)]]);
        assert_eq!(h, vec![vec![frac(1, 2), frac(1, 2)], vec![rat(0), rat(1)]]);
    }
}
