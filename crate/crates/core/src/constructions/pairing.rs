//! Fixed computable layouts of ℕ.

/// Cantor pairing; `None` on overflow.
pub fn pair(x: u64, y: u64) -> Option<u64> {
    let s = x.checked_add(y)?;
    let t = if s % 2 == 0 {
        (s / 2).checked_mul(s.checked_add(1)?)?
    } else {
        s.checked_mul(s.checked_add(1)? / 2)?
    };
    t.checked_add(y)
}

pub fn unpair(z: u64) -> (u64, u64) {
    // w = ⌊(√(8z+1) − 1)/2⌋, computed in u128 to avoid overflow
    let w = ((8 * z as u128 + 1).isqrt() as u64 - 1) / 2;
    let t = (w as u128 * (w as u128 + 1) / 2) as u64;
    let y = z - t;
    (w - y, y)
}

/// Index of (i, j) with j < i in the order (1,0), (2,0), (2,1), (3,0), …
pub fn tri(i: u64, j: u64) -> Option<u64> {
    debug_assert!(j < i);
    let t = if i % 2 == 0 {
        (i / 2).checked_mul(i - 1)?
    } else {
        i.checked_mul((i - 1) / 2)?
    };
    t.checked_add(j)
}

pub fn untri(q: u64) -> (u64, u64) {
    // i is the largest value with i(i−1)/2 ≤ q
    let mut i = (((8 * q as u128 + 1).isqrt() as u64) + 1) / 2;
    while (i as u128) * (i as u128 - 1) / 2 > q as u128 {
        i -= 1;
    }
    (i, q - (i as u128 * (i as u128 - 1) / 2) as u64)
}

/// The n-th prime, counting from p₀ = 2.
pub fn nth_prime(n: usize) -> u64 {
    let mut found = 0;
    let mut c = 1u64;
    loop {
        c += 1;
        if is_prime(c) {
            if found == n {
                return c;
            }
            found += 1;
        }
    }
}

pub fn is_prime(c: u64) -> bool {
    c >= 2 && (2..).take_while(|d| d * d <= c).all(|d| c % d != 0)
}

/// (p, j) with order = pʲ, j ≥ 1, p prime.
pub fn prime_power(order: u64) -> Option<(u64, u32)> {
    if order < 2 {
        return None;
    }
    let p = (2..)
        .take_while(|d| d * d <= order)
        .find(|d| order % d == 0)
        .unwrap_or(order);
    let mut rest = order;
    let mut j = 0;
    while rest % p == 0 {
        rest /= p;
        j += 1;
    }
    (rest == 1).then_some((p, j))
}

/// Index n with pₙ = p.
pub fn prime_index(p: u64) -> Option<usize> {
    is_prime(p).then(|| (2..p).filter(|c| is_prime(*c)).count())
}
