//! Dense univariate polynomials over F_p, used for residue-field moduli.

/// Coefficients low degree first, no trailing zeros (zero polynomial is empty).
pub(crate) type DensePoly = Vec<u64>;

fn trim(mut a: DensePoly) -> DensePoly {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn mul_mod_p(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn inv_mod_p(a: u64, p: u64) -> u64 {
    // p prime, a != 0 mod p
    pow_mod(a % p, p - 2, p)
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_p(acc, base, m);
        }
        base = mul_mod_p(base, base, m);
        exp >>= 1;
    }
    acc
}

fn sub(a: &[u64], b: &[u64], p: u64) -> DensePoly {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(out)
}

fn mul(a: &[u64], b: &[u64], p: u64) -> DensePoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mul_mod_p(x, y, p)) % p;
        }
    }
    trim(out)
}

/// Remainder of `a` modulo a nonzero `m`.
fn rem(a: &[u64], m: &[u64], p: u64) -> DensePoly {
    let mut r = trim(a.to_vec());
    let dm = m.len() - 1;
    let lead_inv = inv_mod_p(m[dm], p);
    while r.len() > dm {
        let dr = r.len() - 1;
        let c = mul_mod_p(r[dr], lead_inv, p);
        let shift = dr - dm;
        for (i, &mc) in m.iter().enumerate() {
            r[shift + i] = (r[shift + i] + p - mul_mod_p(c, mc, p)) % p;
        }
        r = trim(r);
    }
    r
}

fn gcd(a: &[u64], b: &[u64], p: u64) -> DensePoly {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !b.is_empty() {
        let r = rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

fn pow_x_mod(exp_is_p_power: u32, m: &[u64], p: u64) -> DensePoly {
    // x^(p^k) mod m via k successive p-th powers
    let mut acc = rem(&[0, 1], m, p);
    for _ in 0..exp_is_p_power {
        let mut base = acc.clone();
        let mut e = p;
        let mut out = vec![1u64];
        while e > 0 {
            if e & 1 == 1 {
                out = rem(&mul(&out, &base, p), m, p);
            }
            base = rem(&mul(&base, &base, p), m, p);
            e >>= 1;
        }
        acc = out;
    }
    acc
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Rabin's irreducibility test for a monic polynomial of degree >= 1.
pub(crate) fn is_irreducible(f: &[u64], p: u64) -> bool {
    let f = trim(f.to_vec());
    if f.len() < 2 {
        return false;
    }
    let r = (f.len() - 1) as u32;
    if r == 1 {
        return true;
    }
    let x = vec![0, 1];
    let top = pow_x_mod(r, &f, p);
    if !sub(&top, &rem(&x, &f, p), p).is_empty() {
        return false;
    }
    for l in prime_factors(r) {
        let h = sub(&pow_x_mod(r / l, &f, p), &x, p);
        if gcd(&f, &h, p).len() != 1 {
            return false;
        }
    }
    true
}

/// First monic irreducible polynomial of the given degree, ordered by the
/// base-p value of its non-leading coefficients.
pub(crate) fn first_irreducible(degree: u32, p: u64) -> DensePoly {
    if degree == 1 {
        return vec![0, 1];
    }
    let total = p.pow(degree);
    for code in 0..total {
        let mut f = Vec::with_capacity(degree as usize + 1);
        let mut c = code;
        for _ in 0..degree {
            f.push(c % p);
            c /= p;
        }
        f.push(1);
        if is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_over_f2() {
        assert_eq!(first_irreducible(2, 2), vec![1, 1, 1]);
        assert!(!is_irreducible(&[1, 0, 1], 2));
    }

    #[test]
    fn counts_irreducible_cubics_over_f3() {
        // (3^3 - 3) / 3 = 8 monic irreducible cubics
        let count = (0..27u64)
            .filter(|code| {
                let f = vec![code % 3, (code / 3) % 3, code / 9, 1];
                is_irreducible(&f, 3)
            })
            .count();
        assert_eq!(count, 8);
    }

    #[test]
    fn quartic_reducible_without_roots() {
        // (x^2+1)^2 over F_3 has no roots but is reducible
        let f = mul(&[1, 0, 1], &[1, 0, 1], 3);
        assert!(!is_irreducible(&f, 3));
    }
}
