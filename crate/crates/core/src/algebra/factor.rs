//! Square-part extraction for radicands.
//!
//! Trial division by primes below `TRIAL_LIMIT`, then Pollard rho with a
//! Miller-Rabin primality test for cofactors that fit in 64 bits. A larger
//! cofactor is only checked for being a perfect square and otherwise left
//! as is, which is the documented canonicalization limit.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

const TRIAL_LIMIT: u32 = 1 << 14;

fn small_primes() -> &'static [u32] {
    use std::sync::OnceLock;
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let n = TRIAL_LIMIT as usize;
        let mut sieve = vec![true; n + 1];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i <= n {
            if sieve[i] {
                let mut j = i * i;
                while j <= n {
                    sieve[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        (2..=n).filter(|&i| sieve[i]).map(|i| i as u32).collect()
    })
}

/// Writes `n = s²·t` with `t` squarefree (up to the canonicalization limit).
pub fn square_split(n: &BigUint) -> (BigUint, BigUint) {
    let mut s = BigUint::one();
    let mut t = BigUint::one();
    if n.is_zero() {
        return (BigUint::zero(), BigUint::one());
    }
    let mut rest = n.clone();
    for &p in small_primes() {
        let pb = BigUint::from(p);
        if &pb * &pb > rest {
            break;
        }
        let mut e = 0u32;
        loop {
            let (q, r) = rest.div_rem(&pb);
            if !r.is_zero() {
                break;
            }
            rest = q;
            e += 1;
        }
        if e > 0 {
            s *= pb.pow(e / 2);
            if e % 2 == 1 {
                t *= &pb;
            }
        }
    }
    if rest.is_one() {
        return (s, t);
    }
    if let Some(small) = rest.to_u64() {
        let mut factors = Vec::new();
        factor_u64(small, &mut factors);
        factors.sort_unstable();
        let mut i = 0;
        while i < factors.len() {
            let p = factors[i];
            let mut e = 0;
            while i < factors.len() && factors[i] == p {
                e += 1;
                i += 1;
            }
            let pb = BigUint::from(p);
            s *= pb.pow(e / 2);
            if e % 2 == 1 {
                t *= pb;
            }
        }
        return (s, t);
    }
    let root = rest.sqrt();
    if &root * &root == rest {
        let (s2, t2) = square_split(&root);
        // rest is a perfect square, root = s2²·t2
        s *= &s2 * &s2 * &t2;
        return (s, t);
    }
    t *= rest;
    (s, t)
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = x.abs_diff(y).gcd(&n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

fn factor_u64(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime_u64(n) {
        out.push(n);
        return;
    }
    let d = pollard_rho(n);
    factor_u64(d, out);
    factor_u64(n / d, out);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn split(n: u64) -> (u64, u64) {
        let (s, t) = square_split(&BigUint::from(n));
        (s.to_u64().unwrap(), t.to_u64().unwrap())
    }

    #[test]
    fn small_values() {
        assert_eq!(split(1), (1, 1));
        assert_eq!(split(12), (2, 3));
        assert_eq!(split(72), (6, 2));
        assert_eq!(split(49), (7, 1));
    }

    #[test]
    fn large_prime_cofactors() {
        // 1000003 and 999983 are prime, both above the trial bound
        let p = 1_000_003u64;
        let q = 999_983u64;
        assert_eq!(split(p * p * q), (p, q));
        let big = BigUint::from(p) * BigUint::from(q);
        let (s, t) = square_split(&(&big * &big * 5u32));
        assert_eq!(s, big);
        assert_eq!(t, BigUint::from(5u32));
    }

    #[test]
    fn miller_rabin() {
        assert!(is_prime_u64(18_446_744_073_709_551_557));
        assert!(!is_prime_u64(3_215_031_751));
    }
}
