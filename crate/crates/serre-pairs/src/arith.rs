//! Shared machine-word number theory: primality, sieving, modular arithmetic.

/// Deterministic Miller-Rabin over `u64`.
///
/// The base set {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37} is known to be
/// deterministic for all 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = mod_pow(a % n, d, n);
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

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn mod_pow(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if `gcd(a, m) = 1`.
pub fn mod_inv(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

/// All primes `<= limit` by a plain sieve of Eratosthenes.
pub fn sieve_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for p in 2..=n {
        if !composite[p] {
            primes.push(p as u64);
            let mut k = p * p;
            while k <= n {
                composite[k] = true;
                k += p;
            }
        }
    }
    primes
}

/// Euler's totient by trial-division factorization; intended for small moduli.
pub fn euler_phi(n: u64) -> u64 {
    let mut n = n;
    let mut phi = 1u64;
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut pe = 1u64;
            n /= p;
            while n.is_multiple_of(p) {
                pe *= p;
                n /= p;
            }
            phi *= pe * (p - 1);
        }
        p += 1;
    }
    if n > 1 {
        phi *= n - 1;
    }
    phi
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(mut n: i128, p: u64) -> u32 {
    assert!(n != 0, "valuation of zero is undefined");
    assert!(p >= 2);
    let p = p as i128;
    let mut v = 0u32;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// Combine residues under coprime moduli: the unique `x mod m1*m2` with
/// `x = r1 mod m1` and `x = r2 mod m2`.
pub fn crt_pair(r1: u64, m1: u64, r2: u64, m2: u64) -> u64 {
    let inv = mod_inv(m1 % m2, m2).expect("crt moduli must be coprime");
    let diff = (r2 + m2 - r1 % m2) % m2;
    r1 + m1 * mul_mod(diff, inv, m2)
}

/// Legendre symbol (a/q) for odd prime q, as {-1, 0, 1}.
pub fn legendre(a: i128, q: u64) -> i32 {
    debug_assert!(q % 2 == 1 && is_prime(q));
    let r = a.rem_euclid(q as i128) as u64;
    if r == 0 {
        return 0;
    }
    if mod_pow(r, (q - 1) / 2, q) == 1 {
        1
    } else {
        -1
    }
}
