//! Small integer number theory used across the crate.

use rug::ops::Pow;
use rug::Integer;

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm(a: i64, b: i64) -> i64 {
    if a == 0 || b == 0 {
        return 0;
    }
    (a / gcd(a, b) * b).abs()
}

pub fn gcd_u(a: u64, b: u64) -> u64 {
    gcd(a as i64, b as i64) as u64
}

pub fn lcm_u(a: u64, b: u64) -> u64 {
    lcm(a as i64, b as i64) as u64
}

/// Extended Euclid: returns `(g, x, y)` with `a x + b y = g = gcd(a, b) >= 0`.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i64, 0i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// Positive divisors in increasing order.
pub fn divisors(n: u64) -> Vec<u64> {
    assert!(n > 0, "divisors of zero");
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Prime factorisation as `(p, k)` pairs with increasing `p`.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut k = 0;
            while n % p == 0 {
                n /= p;
                k += 1;
            }
            out.push((p, k));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n).len() == 1 && factorize(n)[0].1 == 1
}

pub fn mobius(n: u64) -> i64 {
    let f = factorize(n);
    if f.iter().any(|&(_, k)| k > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .iter()
        .fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

/// Sum of `d^k` over positive divisors `d` of `n`.
pub fn sigma(n: u64, k: u32) -> Integer {
    divisors(n)
        .into_iter()
        .map(|d| Integer::from(d).pow(k))
        .sum()
}

/// Kronecker symbol `(d | a)`.
pub fn kronecker(d: i64, a: i64) -> i32 {
    Integer::from(d).kronecker(&Integer::from(a))
}

pub fn is_discriminant(d: i64) -> bool {
    d.rem_euclid(4) == 0 || d.rem_euclid(4) == 1
}

pub fn is_squarefree(n: u64) -> bool {
    n > 0 && factorize(n).iter().all(|&(_, k)| k == 1)
}

/// Fundamental discriminants, including 1.
pub fn is_fundamental(d: i64) -> bool {
    if d == 1 {
        return true;
    }
    if d == 0 {
        return false;
    }
    match d.rem_euclid(4) {
        1 => is_squarefree(d.unsigned_abs()),
        0 => {
            let e = d / 4;
            matches!(e.rem_euclid(4), 2 | 3) && is_squarefree(e.unsigned_abs())
        }
        _ => false,
    }
}

/// Decompose `n = a^2 * s` with `s` squarefree; returns `(a, s)`.
pub fn square_part(n: u64) -> (u64, u64) {
    let mut a = 1;
    let mut s = 1;
    for (p, k) in factorize(n) {
        a *= p.pow(k / 2);
        if k % 2 == 1 {
            s *= p;
        }
    }
    (a, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divisor_lists() {
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(divisors(1), vec![1]);
        assert_eq!(divisors(49), vec![1, 7, 49]);
    }

    #[test]
    fn multiplicative_functions() {
        assert_eq!(mobius(1), 1);
        assert_eq!(mobius(6), 1);
        assert_eq!(mobius(12), 0);
        assert_eq!(mobius(30), -1);
        assert_eq!(euler_phi(1), 1);
        assert_eq!(euler_phi(12), 4);
        assert_eq!(sigma(6, 1), 12);
        assert_eq!(sigma(2, 3), 9);
    }

    #[test]
    fn kronecker_values() {
        assert_eq!(kronecker(5, 2), -1);
        assert_eq!(kronecker(5, 3), -1);
        assert_eq!(kronecker(5, 4), 1);
        assert_eq!(kronecker(1, 17), 1);
        assert_eq!(kronecker(-4, 3), -1);
        assert_eq!(kronecker(8, 3), -1);
    }

    #[test]
    fn fundamental_discriminants() {
        let fund: Vec<i64> = (-30..30).filter(|&d| is_fundamental(d)).collect();
        assert_eq!(
            fund,
            vec![-24, -23, -20, -19, -15, -11, -8, -7, -4, -3, 1, 5, 8, 12, 13, 17, 21, 24, 28, 29]
        );
    }

    #[test]
    fn extended_euclid() {
        for a in -20..20 {
            for b in -20..20 {
                let (g, x, y) = ext_gcd(a, b);
                assert_eq!(g, gcd(a, b));
                assert_eq!(a * x + b * y, g);
            }
        }
    }

    #[test]
    fn square_parts() {
        assert_eq!(square_part(72), (6, 2));
        assert_eq!(square_part(15), (1, 15));
        assert_eq!(square_part(1), (1, 1));
    }
}
