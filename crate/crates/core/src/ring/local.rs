use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use smallvec::SmallVec;

use super::fp_poly;
use super::RingError;

/// Valuation of an element of a truncated ring.
///
/// `Infinity` is reserved for zero and sorts above every finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(u32),
    Infinity,
}

impl Valuation {
    pub fn finite(self) -> Option<u32> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinity)
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinity => write!(f, "INFINITY"),
        }
    }
}

/// Parameters of a truncated local ring `R_n = R / (ω^{n+1})` where `R` is
/// the ring of integers of an extension of `Q_p` with ramification index `e`
/// and residue field `F_{p^r}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RingSpec {
    pub p: u64,
    pub ramification: u32,
    /// Coefficients `c_0..c_{e-1}` of the Eisenstein polynomial
    /// `ω^e + c_{e-1} ω^{e-1} + ... + c_0`; empty when unramified.
    pub eisenstein: Vec<i64>,
    pub level: u32,
    pub residue_degree: u32,
    /// Monic residue modulus over F_p, low degree first. `None` selects the
    /// first irreducible polynomial in base-p order.
    pub modulus: Option<Vec<u64>>,
}

impl RingSpec {
    /// `Z_p / p^{level+1}`.
    pub fn unramified(p: u64, level: u32) -> Self {
        RingSpec { p, ramification: 1, eisenstein: Vec::new(), level, residue_degree: 1, modulus: None }
    }

    /// The finite field `F_{p^degree}`.
    pub fn residue_field(p: u64, degree: u32) -> Self {
        RingSpec::unramified(p, 0).with_residue_degree(degree)
    }

    /// Totally ramified extension cut out by an Eisenstein polynomial.
    pub fn eisenstein(p: u64, coefficients: Vec<i64>, level: u32) -> Self {
        RingSpec {
            p,
            ramification: coefficients.len() as u32,
            eisenstein: coefficients,
            level,
            residue_degree: 1,
            modulus: None,
        }
    }

    pub fn with_residue_degree(mut self, r: u32) -> Self {
        self.residue_degree = r;
        self
    }

    pub fn with_modulus(mut self, modulus: Vec<u64>) -> Self {
        self.residue_degree = modulus.len().saturating_sub(1) as u32;
        self.modulus = Some(modulus);
        self
    }

    pub fn with_level(mut self, level: u32) -> Self {
        self.level = level;
        self
    }
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={} e={} n={} r={}", self.p, self.ramification, self.level, self.residue_degree)?;
        if self.ramification > 1 {
            write!(f, " eisenstein={:?}", self.eisenstein)?;
        }
        if self.residue_degree > 1 {
            if let Some(m) = &self.modulus {
                write!(f, " modulus={m:?}")?;
            }
        }
        Ok(())
    }
}

/// Canonical representative of a ring element.
///
/// The ring is stored as `⊕_{j<e} (Z_q / p^{k_j}) ω^j` with
/// `k_j = ceil((n+1-j)/e)`; each `Z_q` coefficient is a polynomial in the
/// residue generator `u` of degree `< r`. Entry `j*r + a` holds the
/// coefficient of `u^a ω^j`, reduced into `[0, p^{k_j})`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Elem(pub(crate) SmallVec<[u64; 4]>);

impl Elem {
    /// Raw coefficient vector (see the type-level docs for the layout).
    pub fn coefficients(&self) -> &[u64] {
        &self.0
    }
}

struct RingData {
    spec: RingSpec,
    q: u64,
    size: u128,
    moduli: Vec<u64>,
    big_mod: u64,
    /// `u^r = Σ mod_red[a] u^a` modulo `big_mod`.
    mod_red: Vec<u64>,
    /// `ω^e = Σ eis_red[i] ω^i` modulo `big_mod`.
    eis_red: Vec<u64>,
    /// Angular component of `p`, an element of F_p.
    ac_p: u64,
    omega_powers: Vec<Elem>,
    residue_field: OnceLock<LocalRing>,
}

/// A truncated local ring `R_n`. Cheap to clone.
#[derive(Clone)]
pub struct LocalRing(Arc<RingData>);

impl fmt::Debug for LocalRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LocalRing({})", self.0.spec)
    }
}

impl PartialEq for LocalRing {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.spec == other.0.spec
    }
}

impl Eq for LocalRing {}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn checked_pow(base: u64, exp: u32) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

fn p_adic_valuation(mut c: u64, p: u64) -> u32 {
    debug_assert!(c != 0);
    let mut v = 0;
    while c.is_multiple_of(p) {
        c /= p;
        v += 1;
    }
    v
}

/// Builds the ring described by `spec`, validating primality, the Eisenstein
/// condition and irreducibility of the residue modulus.
pub fn make_ring(spec: RingSpec) -> Result<LocalRing, RingError> {
    LocalRing::new(spec)
}

impl LocalRing {
    pub fn new(mut spec: RingSpec) -> Result<Self, RingError> {
        let p = spec.p;
        if !is_prime(p) {
            return Err(RingError::NotPrime(p));
        }
        let e = spec.ramification;
        let r = spec.residue_degree;
        if e == 0 {
            return Err(RingError::InvalidSpec("ramification index must be >= 1".into()));
        }
        if r == 0 {
            return Err(RingError::InvalidSpec("residue degree must be >= 1".into()));
        }
        if e == 1 {
            if !spec.eisenstein.is_empty() {
                return Err(RingError::InvalidSpec("Eisenstein coefficients given for an unramified ring".into()));
            }
        } else {
            if spec.eisenstein.len() != e as usize {
                return Err(RingError::NotEisenstein(format!(
                    "expected {e} coefficients, got {}",
                    spec.eisenstein.len()
                )));
            }
            let pi = p as i64;
            if let Some(c) = spec.eisenstein.iter().find(|c| *c % pi != 0) {
                return Err(RingError::NotEisenstein(format!("{p} does not divide {c}")));
            }
            if spec.eisenstein[0] % (pi * pi) == 0 {
                return Err(RingError::NotEisenstein(format!(
                    "{p}^2 divides the constant term {}",
                    spec.eisenstein[0]
                )));
            }
        }

        let modulus = match &spec.modulus {
            Some(m) => {
                let ok = m.len() == r as usize + 1
                    && m.last() == Some(&1)
                    && m.iter().all(|&c| c < p)
                    && fp_poly::is_irreducible(m, p);
                if !ok {
                    return Err(RingError::ReducibleModulus(r, p));
                }
                m.clone()
            }
            None => fp_poly::first_irreducible(r, p),
        };
        spec.modulus = Some(modulus.clone());

        let n = spec.level;
        let q = checked_pow(p, r).ok_or_else(|| RingError::InvalidSpec("residue field too large".into()))?;
        let mut size: u128 = 1;
        for _ in 0..=n {
            size = size.checked_mul(q as u128).ok_or_else(|| RingError::InvalidSpec("ring too large".into()))?;
        }
        let moduli: Vec<u64> = (0..e)
            .map(|j| {
                let top = (n + 1) as i64 - j as i64;
                let k = if top <= 0 { 0 } else { (top as u32).div_ceil(e) };
                checked_pow(p, k)
            })
            .collect::<Option<_>>()
            .ok_or_else(|| RingError::InvalidSpec("ring too large".into()))?;
        let big_mod = moduli[0];
        if big_mod >= 1 << 62 {
            return Err(RingError::InvalidSpec("ring too large".into()));
        }
        let m = big_mod as i128;
        let mod_red = modulus[..r as usize].iter().map(|&c| ((-(c as i128)).rem_euclid(m)) as u64).collect();
        let (eis_red, ac_p) = if e == 1 {
            (vec![(p as i128 % m) as u64], 1)
        } else {
            let red = spec.eisenstein.iter().map(|&c| ((-(c as i128)).rem_euclid(m)) as u64).collect();
            // ω^e = -c_0 (1 + ...) so ac(p) = (-c_0/p)^{-1} mod p
            let u0 = (-(spec.eisenstein[0] / p as i64)).rem_euclid(p as i64) as u64;
            (red, fp_poly::inv_mod_p(u0, p))
        };

        let mut ring = LocalRing(Arc::new(RingData {
            spec,
            q,
            size,
            moduli,
            big_mod,
            mod_red,
            eis_red,
            ac_p,
            omega_powers: Vec::new(),
            residue_field: OnceLock::new(),
        }));
        let omega = ring.uniformizer();
        let mut powers = vec![ring.one()];
        for i in 1..=n as usize {
            let next = ring.mul(&powers[i - 1], &omega);
            powers.push(next);
        }
        Arc::get_mut(&mut ring.0).expect("unshared during construction").omega_powers = powers;
        Ok(ring)
    }

    pub fn spec(&self) -> &RingSpec {
        &self.0.spec
    }

    pub fn p(&self) -> u64 {
        self.0.spec.p
    }

    /// Size of the residue field.
    pub fn q(&self) -> u64 {
        self.0.q
    }

    pub fn level(&self) -> u32 {
        self.0.spec.level
    }

    pub fn ramification(&self) -> u32 {
        self.0.spec.ramification
    }

    pub fn residue_degree(&self) -> u32 {
        self.0.spec.residue_degree
    }

    pub fn is_unramified(&self) -> bool {
        self.ramification() == 1
    }

    /// Number of elements, `q^{n+1}`.
    pub fn size(&self) -> u128 {
        self.0.size
    }

    /// Number of units, `q^n (q - 1)`.
    pub fn unit_count(&self) -> u128 {
        self.0.size / self.0.q as u128 * (self.0.q as u128 - 1)
    }

    /// The same ring truncated at another level.
    pub fn at_level(&self, level: u32) -> LocalRing {
        if level == self.level() {
            return self.clone();
        }
        LocalRing::new(self.0.spec.clone().with_level(level)).expect("validated parameters")
    }

    /// The residue field `F_q` as a level-0 unramified ring.
    pub fn residue_field(&self) -> LocalRing {
        if self.level() == 0 && self.is_unramified() {
            return self.clone();
        }
        self.0
            .residue_field
            .get_or_init(|| {
                let m = self.0.spec.modulus.clone().expect("filled at construction");
                LocalRing::new(RingSpec::unramified(self.p(), 0).with_modulus(m)).expect("validated parameters")
            })
            .clone()
    }

    fn width(&self) -> usize {
        (self.ramification() * self.residue_degree()) as usize
    }

    pub fn zero(&self) -> Elem {
        Elem(SmallVec::from_elem(0, self.width()))
    }

    pub fn one(&self) -> Elem {
        self.from_int(1)
    }

    pub fn from_int(&self, c: i64) -> Elem {
        let mut out = self.zero();
        let m = self.0.moduli[0] as i128;
        out.0[0] = (c as i128).rem_euclid(m) as u64;
        out
    }

    pub fn from_bigint(&self, c: &BigInt) -> Elem {
        let mut out = self.zero();
        let m = BigInt::from(self.0.moduli[0]);
        out.0[0] = c.mod_floor(&m).to_u64().expect("reduced below modulus");
        out
    }

    /// The uniformizer `ω` (equal to `p` when unramified).
    pub fn uniformizer(&self) -> Elem {
        if self.is_unramified() {
            self.from_int(self.p() as i64)
        } else {
            let mut out = self.zero();
            let r = self.residue_degree() as usize;
            out.0[r] = 1 % self.0.moduli[1];
            out
        }
    }

    /// `ω^i` for `i <= n`, zero beyond.
    pub fn omega_power(&self, i: u32) -> Elem {
        self.0.omega_powers.get(i as usize).cloned().unwrap_or_else(|| self.zero())
    }

    pub fn is_zero(&self, x: &Elem) -> bool {
        x.0.iter().all(|&c| c == 0)
    }

    pub fn add(&self, x: &Elem, y: &Elem) -> Elem {
        let r = self.residue_degree() as usize;
        let mut out = x.clone();
        for (i, (o, &b)) in out.0.iter_mut().zip(y.0.iter()).enumerate() {
            let m = self.0.moduli[i / r];
            let s = *o + b;
            *o = if s >= m { s - m } else { s };
        }
        out
    }

    pub fn neg(&self, x: &Elem) -> Elem {
        let r = self.residue_degree() as usize;
        let mut out = x.clone();
        for (i, o) in out.0.iter_mut().enumerate() {
            let m = self.0.moduli[i / r];
            *o = if *o == 0 { 0 } else { m - *o };
        }
        out
    }

    pub fn sub(&self, x: &Elem, y: &Elem) -> Elem {
        self.add(x, &self.neg(y))
    }

    pub fn mul(&self, x: &Elem, y: &Elem) -> Elem {
        let d = &*self.0;
        let e = d.spec.ramification as usize;
        let r = d.spec.residue_degree as usize;
        let m = d.big_mod as u128;
        if e == 1 && r == 1 {
            let v = (x.0[0] as u128 * y.0[0] as u128) % m;
            return Elem(SmallVec::from_slice(&[v as u64]));
        }
        let w = 2 * r - 1;
        let rows = 2 * e - 1;
        let mut tmp = vec![0u128; rows * w];
        for j1 in 0..e {
            for a1 in 0..r {
                let c1 = x.0[j1 * r + a1] as u128;
                if c1 == 0 {
                    continue;
                }
                for j2 in 0..e {
                    for a2 in 0..r {
                        let c2 = y.0[j2 * r + a2] as u128;
                        if c2 == 0 {
                            continue;
                        }
                        let slot = &mut tmp[(j1 + j2) * w + a1 + a2];
                        *slot = (*slot + c1 * c2 % m) % m;
                    }
                }
            }
        }
        // u^r = Σ mod_red[a] u^a
        for row in 0..rows {
            for top in (r..w).rev() {
                let c = tmp[row * w + top];
                if c == 0 {
                    continue;
                }
                tmp[row * w + top] = 0;
                for a in 0..r {
                    let slot = &mut tmp[row * w + top - r + a];
                    *slot = (*slot + c * d.mod_red[a] as u128 % m) % m;
                }
            }
        }
        // ω^e = Σ eis_red[i] ω^i
        for row in (e..rows).rev() {
            for a in 0..r {
                let c = tmp[row * w + a];
                if c == 0 {
                    continue;
                }
                tmp[row * w + a] = 0;
                for i in 0..e {
                    let slot = &mut tmp[(row - e + i) * w + a];
                    *slot = (*slot + c * d.eis_red[i] as u128 % m) % m;
                }
            }
        }
        let mut out = SmallVec::with_capacity(e * r);
        for j in 0..e {
            let mj = d.moduli[j] as u128;
            for a in 0..r {
                out.push((tmp[j * w + a] % mj) as u64);
            }
        }
        Elem(out)
    }

    pub fn pow(&self, x: &Elem, mut exp: u128) -> Elem {
        let mut acc = self.one();
        let mut base = x.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            exp >>= 1;
            if exp > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// `ord(x)`: index of the first nonzero ω-adic digit.
    pub fn valuation(&self, x: &Elem) -> Valuation {
        self.leading(x).map_or(Valuation::Infinity, |(v, _, _)| Valuation::Finite(v))
    }

    /// (ord, ω-index j, p-valuation of α_j)
    fn leading(&self, x: &Elem) -> Option<(u32, usize, u32)> {
        let e = self.ramification();
        let r = self.residue_degree() as usize;
        let p = self.p();
        let mut best: Option<(u32, usize, u32)> = None;
        for j in 0..e as usize {
            let v = x.0[j * r..(j + 1) * r].iter().filter(|&&c| c != 0).map(|&c| p_adic_valuation(c, p)).min();
            if let Some(v) = v {
                let ord = e * v + j as u32;
                if best.is_none_or(|(b, _, _)| ord < b) {
                    best = Some((ord, j, v));
                }
            }
        }
        best
    }

    pub fn is_unit(&self, x: &Elem) -> bool {
        self.valuation(x) == Valuation::Finite(0)
    }

    /// Residue index of `x mod ω` in `F_q` (coefficient `a` of `u^a` is
    /// digit `a` in base p).
    pub fn residue_index(&self, x: &Elem) -> u64 {
        let p = self.p();
        let r = self.residue_degree() as usize;
        x.0[..r].iter().rev().fold(0, |acc, &c| acc * p + c % p)
    }

    /// Angular component as a residue index; zero for `x = 0`.
    pub fn ac_index(&self, x: &Elem) -> u64 {
        let Some((_, j, v)) = self.leading(x) else {
            return 0;
        };
        let p = self.p();
        let r = self.residue_degree() as usize;
        let pv = p.pow(v);
        let scale = fp_poly::pow_mod(self.0.ac_p, v as u64, p);
        x.0[j * r..(j + 1) * r].iter().rev().fold(0, |acc, &c| acc * p + ((c / pv) % p) * scale % p)
    }

    /// Element of the residue field with the given index.
    pub fn residue_element(&self, index: u64) -> Elem {
        self.lift_residue(index)
    }

    /// `x mod ω` as an element of the residue field.
    pub fn residue(&self, x: &Elem) -> Elem {
        self.residue_field().lift_residue(self.residue_index(x))
    }

    /// `ac(x) = x ω^{-ord(x)} mod ω`, with `ac(0) = 0`, in the residue field.
    pub fn ac(&self, x: &Elem) -> Elem {
        self.residue_field().lift_residue(self.ac_index(x))
    }

    /// Canonical lift of a residue index: coefficients in `[0, p)`.
    fn lift_residue(&self, index: u64) -> Elem {
        let p = self.p();
        let mut out = self.zero();
        let mut s = index;
        for a in 0..self.residue_degree() as usize {
            out.0[a] = (s % p) % self.0.moduli[0].max(1);
            s /= p;
        }
        out
    }

    /// ω-adic digits `d_0..d_n` as residue indices.
    pub fn digits(&self, x: &Elem) -> Vec<u64> {
        let n = self.level() as usize;
        let p = self.p();
        if self.is_unramified() {
            let r = self.residue_degree() as usize;
            let mut coeffs: Vec<u64> = x.0[..r].to_vec();
            return (0..=n)
                .map(|_| {
                    let d = coeffs.iter().rev().fold(0, |acc, &c| acc * p + c % p);
                    coeffs.iter_mut().for_each(|c| *c /= p);
                    d
                })
                .collect();
        }
        let mut y = x.clone();
        let mut out = vec![0; n + 1];
        for (i, slot) in out.iter_mut().enumerate() {
            match self.valuation(&y) {
                Valuation::Infinity => break,
                Valuation::Finite(v) if v as usize == i => {
                    let d = self.ac_index(&y);
                    *slot = d;
                    let term = self.mul(&self.lift_residue(d), &self.0.omega_powers[i]);
                    y = self.sub(&y, &term);
                }
                Valuation::Finite(_) => {}
            }
        }
        out
    }

    /// Inverse of [`digits`](Self::digits); missing high digits are zero.
    pub fn from_digits(&self, digits: &[u64]) -> Elem {
        let n = self.level() as usize;
        if self.is_unramified() {
            let p = self.p();
            let r = self.residue_degree() as usize;
            let mut out = self.zero();
            let mut pi = 1u64;
            for &d in digits.iter().take(n + 1) {
                let mut s = d;
                for a in 0..r {
                    out.0[a] += (s % p) * pi;
                    s /= p;
                }
                pi = pi.saturating_mul(p);
            }
            return out;
        }
        let mut acc = self.zero();
        for (i, &d) in digits.iter().enumerate().take(n + 1) {
            if d != 0 {
                let term = self.mul(&self.lift_residue(d), &self.0.omega_powers[i]);
                acc = self.add(&acc, &term);
            }
        }
        acc
    }

    /// Position of `x` in the enumeration order: `Σ d_i q^i`.
    pub fn index_of(&self, x: &Elem) -> u128 {
        let q = self.q() as u128;
        self.digits(x).iter().rev().fold(0u128, |acc, &d| acc * q + d as u128)
    }

    /// Element at position `index` of the enumeration order.
    pub fn element(&self, mut index: u128) -> Elem {
        let q = self.q() as u128;
        let digits: Vec<u64> = (0..=self.level())
            .map(|_| {
                let d = (index % q) as u64;
                index /= q;
                d
            })
            .collect();
        self.from_digits(&digits)
    }

    /// All elements, ordered lexicographically on digits with the highest
    /// ω-power most significant (for `Z/p^k` this is `0, 1, ..., p^k - 1`).
    pub fn enumerate(&self, bound: u64) -> Result<impl Iterator<Item = Elem> + '_, RingError> {
        if self.size() > bound as u128 {
            return Err(RingError::BoundExceeded { size: self.size(), bound });
        }
        Ok((0..self.size()).map(move |i| self.element(i)))
    }

    /// All elements as a vector (see [`enumerate`](Self::enumerate)).
    pub fn elements(&self, bound: u64) -> Result<Vec<Elem>, RingError> {
        Ok(self.enumerate(bound)?.collect())
    }

    pub fn units(&self, bound: u64) -> Result<Vec<Elem>, RingError> {
        Ok(self.enumerate(bound)?.filter(|x| self.is_unit(x)).collect())
    }

    pub fn inverse(&self, x: &Elem) -> Result<Elem, RingError> {
        if !self.is_unit(x) {
            return Err(RingError::NotInvertible);
        }
        Ok(self.pow(x, self.unit_count() - 1))
    }

    /// Reduction `R_n -> R_m` for `m <= n`; `target` must be this ring at level `m`.
    pub fn reduce(&self, x: &Elem, target: &LocalRing) -> Result<Elem, RingError> {
        if target.level() > self.level() || target.0.spec != self.0.spec.clone().with_level(target.level()) {
            return Err(RingError::BadLevel { from: self.level(), to: target.level() });
        }
        let r = self.residue_degree() as usize;
        let mut out = x.clone();
        for (i, c) in out.0.iter_mut().enumerate() {
            *c %= target.0.moduli[i / r];
        }
        Ok(out)
    }

    /// Digit-wise embedding of an element of a lower level (the lift with
    /// zero high digits).
    pub fn lift_digits(&self, x: &Elem, source: &LocalRing) -> Elem {
        if self.is_unramified() {
            // canonical coefficients are already the digit-wise lift
            return x.clone();
        }
        self.from_digits(&source.digits(x))
    }

    /// Human-readable element: an integer for `Z/p^k`, digit tuple otherwise.
    pub fn format(&self, x: &Elem) -> String {
        if self.is_unramified() && self.residue_degree() == 1 {
            return x.0[0].to_string();
        }
        let ds: Vec<String> = self.digits(x).iter().map(|d| d.to_string()).collect();
        format!("({})", ds.join(","))
    }

    /// Exact integer value of the canonical representative, for `Z/p^k`.
    pub fn integer_value(&self, x: &Elem) -> Option<u64> {
        (self.is_unramified() && self.residue_degree() == 1).then(|| x.0[0])
    }
}

/// An element bundled with its ring, for checked arithmetic across rings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingElement {
    ring: LocalRing,
    value: Elem,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Mul,
    Neg,
}

impl RingElement {
    pub fn new(ring: &LocalRing, value: Elem) -> Self {
        RingElement { ring: ring.clone(), value }
    }

    pub fn from_int(ring: &LocalRing, c: i64) -> Self {
        RingElement::new(ring, ring.from_int(c))
    }

    pub fn ring(&self) -> &LocalRing {
        &self.ring
    }

    pub fn value(&self) -> &Elem {
        &self.value
    }

    fn check(&self, other: &RingElement) -> Result<(), RingError> {
        if self.ring == other.ring {
            Ok(())
        } else {
            Err(RingError::MismatchedRings)
        }
    }

    /// `x ∘ y`; the second operand is ignored for negation.
    pub fn arith(&self, other: &RingElement, op: ArithOp) -> Result<RingElement, RingError> {
        self.check(other)?;
        let v = match op {
            ArithOp::Add => self.ring.add(&self.value, &other.value),
            ArithOp::Mul => self.ring.mul(&self.value, &other.value),
            ArithOp::Neg => self.ring.neg(&self.value),
        };
        Ok(RingElement::new(&self.ring, v))
    }

    pub fn try_add(&self, other: &RingElement) -> Result<RingElement, RingError> {
        self.arith(other, ArithOp::Add)
    }

    pub fn try_mul(&self, other: &RingElement) -> Result<RingElement, RingError> {
        self.arith(other, ArithOp::Mul)
    }

    pub fn neg(&self) -> RingElement {
        RingElement::new(&self.ring, self.ring.neg(&self.value))
    }

    pub fn inv(&self) -> Result<RingElement, RingError> {
        Ok(RingElement::new(&self.ring, self.ring.inverse(&self.value)?))
    }

    pub fn ord(&self) -> Valuation {
        self.ring.valuation(&self.value)
    }

    pub fn ac(&self) -> RingElement {
        let k = self.ring.residue_field();
        RingElement::new(&k, self.ring.ac(&self.value))
    }

    pub fn digits(&self) -> Vec<u64> {
        self.ring.digits(&self.value)
    }

    pub fn reduce(&self, level: u32) -> Result<RingElement, RingError> {
        let target = self.ring.at_level(level);
        let v = self.ring.reduce(&self.value, &target)?;
        Ok(RingElement::new(&target, v))
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.ring.format(&self.value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BOUND: u64 = 1_000_000;

    fn zmod(p: u64, n: u32) -> LocalRing {
        make_ring(RingSpec::unramified(p, n)).unwrap()
    }

    fn ram3(n: u32) -> LocalRing {
        make_ring(RingSpec::eisenstein(3, vec![-3, 0], n)).unwrap()
    }

    #[test]
    fn ring_sizes() {
        assert_eq!(zmod(3, 2).size(), 27);
        assert_eq!(ram3(3).size(), 81);
        let f4 = make_ring(RingSpec::residue_field(2, 2)).unwrap();
        assert_eq!(f4.size(), 4);
        assert_eq!(f4.spec().modulus, Some(vec![1, 1, 1]));
    }

    #[test]
    fn rejects_bad_specs() {
        assert_eq!(make_ring(RingSpec::unramified(9, 1)).unwrap_err(), RingError::NotPrime(9));
        assert!(matches!(make_ring(RingSpec::eisenstein(3, vec![-9, 0], 2)), Err(RingError::NotEisenstein(_))));
        assert!(matches!(make_ring(RingSpec::eisenstein(3, vec![-3, 1], 2)), Err(RingError::NotEisenstein(_))));
        assert!(matches!(
            make_ring(RingSpec::unramified(3, 0).with_modulus(vec![1, 0, 1, 0, 1])),
            Err(RingError::ReducibleModulus(4, 3))
        ));
        assert!(matches!(
            make_ring(RingSpec::unramified(2, 0).with_modulus(vec![1, 0, 1])),
            Err(RingError::ReducibleModulus(2, 2))
        ));
    }

    #[test]
    fn arithmetic_examples() {
        let z9 = zmod(3, 1);
        assert_eq!(z9.add(&z9.from_int(5), &z9.from_int(7)), z9.from_int(3));

        let f4 = make_ring(RingSpec::residue_field(2, 2)).unwrap();
        let u = f4.residue_element(2);
        let u1 = f4.add(&u, &f4.one());
        assert_eq!(f4.mul(&u, &u1), f4.one());

        let r = ram3(3);
        let w = r.uniformizer();
        let w2 = r.mul(&w, &w);
        assert_eq!(w2, r.from_int(3));
        assert_eq!(r.digits(&w2), vec![0, 0, 1, 0]);
    }

    #[test]
    fn inverses() {
        let z27 = zmod(3, 2);
        assert_eq!(z27.inverse(&z27.from_int(2)).unwrap(), z27.from_int(14));
        let z9 = zmod(3, 1);
        assert_eq!(z9.inverse(&z9.from_int(3)), Err(RingError::NotInvertible));
        let f5 = zmod(5, 0);
        assert_eq!(f5.inverse(&f5.from_int(4)).unwrap(), f5.from_int(4));
    }

    #[test]
    fn valuation_and_angular_component() {
        let z27 = zmod(3, 2);
        assert_eq!(z27.valuation(&z27.from_int(18)), Valuation::Finite(2));
        assert_eq!(z27.ac_index(&z27.from_int(18)), 2);
        assert_eq!(z27.ac_index(&z27.from_int(5)), 2);
        assert_eq!(z27.ac_index(&z27.zero()), 0);
        assert_eq!(z27.valuation(&z27.zero()), Valuation::Infinity);

        let r = ram3(3);
        let w = r.uniformizer();
        let three_plus_w = r.add(&r.from_int(3), &w);
        assert_eq!(r.valuation(&three_plus_w), Valuation::Finite(1));
        assert_eq!(r.valuation(&r.mul(&r.from_int(3), &w)), Valuation::Finite(3));
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(zmod(3, 1).elements(BOUND).unwrap().len(), 9);
        let f4 = make_ring(RingSpec::residue_field(2, 2)).unwrap();
        assert_eq!(f4.elements(BOUND).unwrap().len(), 4);
        assert_eq!(ram3(1).elements(BOUND).unwrap().len(), 9);
        assert!(matches!(zmod(3, 5).elements(100), Err(RingError::BoundExceeded { .. })));
    }

    #[test]
    fn enumeration_is_natural_order_for_integers_mod_pk() {
        let z9 = zmod(3, 1);
        let vals: Vec<u64> = z9.elements(BOUND).unwrap().iter().map(|x| x.0[0]).collect();
        assert_eq!(vals, (0..9).collect::<Vec<_>>());
    }

    #[test]
    fn digits_roundtrip_every_element() {
        for ring in [ram3(3), zmod(5, 2), make_ring(RingSpec::unramified(2, 2).with_residue_degree(2)).unwrap()] {
            let all = ring.elements(BOUND).unwrap();
            for (i, x) in all.iter().enumerate() {
                assert_eq!(ring.index_of(x), i as u128);
                assert_eq!(&ring.from_digits(&ring.digits(x)), x);
            }
            let mut sorted = all.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len() as u128, ring.size());
        }
    }

    #[test]
    fn mismatched_rings_rejected() {
        let a = RingElement::from_int(&zmod(3, 1), 1);
        let b = RingElement::from_int(&zmod(3, 2), 1);
        assert_eq!(a.try_add(&b), Err(RingError::MismatchedRings));
    }
}
