//! Integer helpers: square roots, primality, factorization, modular powers.

use num_integer::Integer;

/// Floor of the square root of a nonnegative integer.
pub fn isqrt(n: i128) -> i128 {
    assert!(n >= 0, "isqrt of negative number {n}");
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as i128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

pub fn is_square(n: i128) -> bool {
    n >= 0 && {
        let r = isqrt(n);
        r * r == n
    }
}

pub fn is_prime(n: i128) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Prime factorization of |n| by trial division, primes ascending.
pub fn factor(n: i128) -> Vec<(i128, u32)> {
    let mut n = n.abs();
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn primes_up_to(bound: i128) -> Vec<i128> {
    (2..=bound).filter(|&n| is_prime(n)).collect()
}

/// p-adic valuation of a nonzero integer.
pub fn ord(p: i128, n: i128) -> u32 {
    assert!(n != 0, "valuation of zero");
    let mut n = n;
    let mut e = 0;
    while n % p == 0 {
        n /= p;
        e += 1;
    }
    e
}

pub fn mod_pow(base: i128, exp: u128, m: i128) -> i128 {
    let mut result = 1i128.mod_floor(&m);
    let mut b = base.mod_floor(&m);
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            result = (result * b) % m;
        }
        b = (b * b) % m;
        e >>= 1;
    }
    result
}

/// Legendre symbol (a/p) for an odd prime p.
pub fn legendre(a: i128, p: i128) -> i32 {
    let a = a.mod_floor(&p);
    if a == 0 {
        return 0;
    }
    if mod_pow(a, ((p - 1) / 2) as u128, p) == 1 {
        1
    } else {
        -1
    }
}

/// Kronecker symbol (D/p) for a quadratic discriminant D and a prime p.
pub fn kronecker(disc: i128, p: i128) -> i32 {
    if p == 2 {
        if disc % 2 == 0 {
            0
        } else if disc.mod_floor(&8) == 1 || disc.mod_floor(&8) == 7 {
            1
        } else {
            -1
        }
    } else {
        legendre(disc, p)
    }
}

/// Squarefree part and square root of the cofactor: n = core * s^2.
pub fn squarefree_decomposition(n: i128) -> (i128, i128) {
    let mut core = n.signum();
    let mut s = 1;
    for (p, e) in factor(n) {
        if e % 2 == 1 {
            core *= p;
        }
        s *= p.pow(e / 2);
    }
    (core, s)
}

pub fn is_squarefree(n: i128) -> bool {
    factor(n).iter().all(|&(_, e)| e == 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_primes_and_factors() {
        assert_eq!(primes_up_to(20), vec![2, 3, 5, 7, 11, 13, 17, 19]);
        assert_eq!(factor(832), vec![(2, 6), (13, 1)]);
        assert_eq!(factor(-45), vec![(3, 2), (5, 1)]);
        assert_eq!(factor(1), vec![]);
        assert_eq!(squarefree_decomposition(800), (2, 20));
    }

    #[test]
    fn isqrt_boundaries() {
        for n in 0..2000i128 {
            let r = isqrt(n);
            assert!(r * r <= n && (r + 1) * (r + 1) > n);
        }
        let big = (1i128 << 61) - 1;
        assert_eq!(isqrt(big * big), big);
        assert_eq!(isqrt(big * big - 1), big - 1);
    }

    #[test]
    fn kronecker_table_at_two() {
        assert_eq!(kronecker(5, 2), -1);
        assert_eq!(kronecker(17, 2), 1);
        assert_eq!(kronecker(8, 2), 0);
        assert_eq!(kronecker(5, 11), 1);
        assert_eq!(kronecker(5, 5), 0);
    }
}
