//! Finite-length p-typical Witt vectors: structure polynomials, ghost map,
//! Verschiebung, Frobenius and the Teichmüller digit encoding of Z/p^L.

use crate::poly::{ModPoly, MultiPoly};
use crate::ring::is_prime;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::HashMap;
use std::fmt::Debug;
use std::sync::{Arc, Mutex, OnceLock};

pub const DEFAULT_LENGTH_BOUND: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WittError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("Witt length {len} outside the supported range 1..={bound}")]
    LengthBound { len: usize, bound: usize },
    #[error("inexact division by p^{index} while solving for structure polynomial {index}")]
    InexactDivision { index: usize },
    #[error("Witt vectors have different lengths or primes")]
    Mismatch,
    #[error("Frobenius needs coordinates in an F_{0}-algebra")]
    NotCharacteristicP(u64),
    #[error("cannot truncate length {from} to length {to}")]
    BadTruncation { from: usize, to: usize },
}

/// Addition and multiplication polynomials for W_L, in variables x_0..x_{L-1}, y_0..y_{L-1}.
#[derive(Debug)]
pub struct StructurePolys {
    p: u64,
    len: usize,
    sum: Vec<MultiPoly>,
    prod: Vec<MultiPoly>,
    sum_mod: Vec<ModPoly>,
    prod_mod: Vec<ModPoly>,
}

impl StructurePolys {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Integral addition polynomial S_i.
    pub fn sum_integral(&self, i: usize) -> &MultiPoly {
        &self.sum[i]
    }

    /// Integral multiplication polynomial P_i.
    pub fn prod_integral(&self, i: usize) -> &MultiPoly {
        &self.prod[i]
    }

    pub fn sum(&self, i: usize) -> &ModPoly {
        &self.sum_mod[i]
    }

    pub fn prod(&self, i: usize) -> &ModPoly {
        &self.prod_mod[i]
    }

    pub fn variable_names(&self) -> Vec<String> {
        let mut names: Vec<String> = (0..self.len).map(|i| format!("x_{i}")).collect();
        names.extend((0..self.len).map(|i| format!("y_{i}")));
        names
    }
}

fn ghost_poly(p: u64, len: usize, i: usize, offset: usize) -> MultiPoly {
    let nvars = 2 * len;
    let mut acc = MultiPoly::zero(nvars);
    for j in 0..=i {
        let mut m = vec![0u32; nvars];
        m[offset + j] = (p as u32).pow((i - j) as u32);
        let coef = BigInt::from(p).pow(j as u32);
        acc = acc.add(&MultiPoly::from_terms(nvars, [(m, coef)]));
    }
    acc
}

/// Solves the ghost equations `Σ_j p^j T_j^{p^{i-j}} = target_i` for T_0..T_{L-1} over Z.
fn solve_ghost(p: u64, len: usize, targets: &[MultiPoly]) -> Result<Vec<MultiPoly>, WittError> {
    let nvars = 2 * len;
    let mut solved: Vec<MultiPoly> = Vec::with_capacity(len);
    // powers[j] holds T_j^{p^{i-1-j}} from the previous round
    let mut powers: Vec<MultiPoly> = Vec::with_capacity(len);
    for (i, target) in targets.iter().enumerate().take(len) {
        let mut rhs = target.clone();
        for (j, pw) in powers.iter_mut().enumerate() {
            *pw = pw.pow(p as u32);
            let coef = BigInt::from(p).pow(j as u32);
            rhs = rhs.sub(&pw.scale(&coef));
        }
        let divisor = BigInt::from(p).pow(i as u32);
        let t = rhs.div_exact(&divisor).ok_or(WittError::InexactDivision { index: i })?;
        powers.push(t.clone());
        solved.push(t);
    }
    debug_assert!(solved.iter().all(|t| t.nvars() == nvars));
    Ok(solved)
}

fn compute(p: u64, len: usize) -> Result<StructurePolys, WittError> {
    let mut sums = Vec::with_capacity(len);
    let mut prods = Vec::with_capacity(len);
    for i in 0..len {
        let gx = ghost_poly(p, len, i, 0);
        let gy = ghost_poly(p, len, i, len);
        sums.push(gx.add(&gy));
        prods.push(gx.mul(&gy));
    }
    let sum = solve_ghost(p, len, &sums)?;
    let prod = solve_ghost(p, len, &prods)?;
    let sum_mod = sum.iter().map(|s| s.reduce_mod(p)).collect();
    let prod_mod = prod.iter().map(|s| s.reduce_mod(p)).collect();
    Ok(StructurePolys { p, len, sum, prod, sum_mod, prod_mod })
}

type Cache = Mutex<HashMap<(u64, usize), Arc<StructurePolys>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

pub fn structure_polynomials(p: u64, len: usize) -> Result<Arc<StructurePolys>, WittError> {
    structure_polynomials_bounded(p, len, DEFAULT_LENGTH_BOUND)
}

pub fn structure_polynomials_bounded(p: u64, len: usize, bound: usize) -> Result<Arc<StructurePolys>, WittError> {
    if !is_prime(p) {
        return Err(WittError::NotPrime(p));
    }
    if len == 0 || len > bound {
        return Err(WittError::LengthBound { len, bound });
    }
    let mut guard = cache().lock().unwrap_or_else(|e| e.into_inner());
    if let Some(sp) = guard.get(&(p, len)) {
        return Ok(sp.clone());
    }
    let sp = Arc::new(compute(p, len)?);
    guard.insert((p, len), sp.clone());
    Ok(sp)
}

/// A commutative ring that can hold Witt coordinates.
pub trait CoordRing: Clone {
    type Elem: Clone + PartialEq + Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn embed_int(&self, c: &BigInt) -> Self::Elem;
    /// `Some(p)` when the ring is an F_p-algebra, `None` for Z.
    fn characteristic(&self) -> Option<u64>;

    fn pow(&self, a: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut acc = self.one();
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Integers;

impl CoordRing for Integers {
    type Elem = BigInt;
    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn one(&self) -> BigInt {
        BigInt::one()
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
    fn embed_int(&self, c: &BigInt) -> BigInt {
        c.clone()
    }
    fn characteristic(&self) -> Option<u64> {
        None
    }
    fn pow(&self, a: &BigInt, e: u64) -> BigInt {
        num_traits::pow(a.clone(), e as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    pub p: u64,
}

impl CoordRing for PrimeField {
    type Elem = u64;
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.p
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        (a + b) % self.p
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.p as u128) as u64
    }
    fn embed_int(&self, c: &BigInt) -> u64 {
        c.mod_floor(&BigInt::from(self.p)).to_u64().expect("residue fits")
    }
    fn characteristic(&self) -> Option<u64> {
        Some(self.p)
    }
    fn pow(&self, a: &u64, e: u64) -> u64 {
        crate::ring::pow_mod_u64(*a, e, self.p)
    }
}

/// F_p[v_0, ..., v_{k-1}].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolyRing {
    pub nvars: usize,
    pub p: u64,
}

impl CoordRing for PolyRing {
    type Elem = ModPoly;
    fn zero(&self) -> ModPoly {
        ModPoly::zero(self.nvars, self.p)
    }
    fn one(&self) -> ModPoly {
        ModPoly::constant(self.nvars, self.p, 1)
    }
    fn add(&self, a: &ModPoly, b: &ModPoly) -> ModPoly {
        a.add(b)
    }
    fn mul(&self, a: &ModPoly, b: &ModPoly) -> ModPoly {
        a.mul(b)
    }
    fn embed_int(&self, c: &BigInt) -> ModPoly {
        let r = c.mod_floor(&BigInt::from(self.p)).to_u64().expect("residue fits");
        ModPoly::constant(self.nvars, self.p, r)
    }
    fn characteristic(&self) -> Option<u64> {
        Some(self.p)
    }
    fn pow(&self, a: &ModPoly, e: u64) -> ModPoly {
        a.pow(e)
    }
}

/// Evaluates a polynomial given as (exponent vector, coefficient) pairs.
fn eval_terms<'a, R: CoordRing>(
    ring: &R,
    terms: impl Iterator<Item = (&'a Vec<u32>, BigInt)>,
    point: &[&R::Elem],
) -> R::Elem {
    let mut powers: HashMap<(usize, u32), R::Elem> = HashMap::new();
    let mut acc = ring.zero();
    for (m, c) in terms {
        let mut t = ring.embed_int(&c);
        for (i, &e) in m.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let pw = powers.entry((i, e)).or_insert_with(|| {
                if e == 1 {
                    point[i].clone()
                } else {
                    ring.pow(point[i], e as u64)
                }
            });
            t = ring.mul(&t, pw);
        }
        acc = ring.add(&acc, &t);
    }
    acc
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Add,
    Mul,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WittVector<R: CoordRing> {
    ring: R,
    p: u64,
    coords: Vec<R::Elem>,
}

impl<R: CoordRing> WittVector<R> {
    pub fn new(ring: R, p: u64, coords: Vec<R::Elem>) -> Self {
        WittVector { ring, p, coords }
    }

    pub fn zero(ring: R, p: u64, len: usize) -> Self {
        let coords = vec![ring.zero(); len];
        WittVector { ring, p, coords }
    }

    pub fn one(ring: R, p: u64, len: usize) -> Self {
        let mut w = Self::zero(ring, p, len);
        if len > 0 {
            w.coords[0] = w.ring.one();
        }
        w
    }

    /// Image of the integer `a` in W_L of an F_p-algebra, via Teichmüller digits.
    pub fn from_int(ring: R, p: u64, len: usize, a: &BigInt) -> Result<Self, WittError> {
        match ring.characteristic() {
            Some(c) if c == p => {}
            _ => return Err(WittError::NotCharacteristicP(p)),
        }
        let digits = teichmuller_digits(a, p, len);
        let coords = digits.iter().map(|&d| ring.embed_int(&BigInt::from(d))).collect();
        Ok(WittVector { ring, p, coords })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[R::Elem] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<R::Elem> {
        self.coords
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    fn combine(&self, other: &Self, op: Op) -> Result<Self, WittError> {
        if self.len() != other.len() || self.p != other.p {
            return Err(WittError::Mismatch);
        }
        let len = self.len();
        if len == 0 {
            return Ok(self.clone());
        }
        let sp = structure_polynomials(self.p, len)?;
        let point: Vec<&R::Elem> = self.coords.iter().chain(other.coords.iter()).collect();
        let coords = (0..len)
            .map(|i| match (self.ring.characteristic(), op) {
                (None, Op::Add) => eval_terms(&self.ring, sp.sum[i].terms().map(|(m, c)| (m, c.clone())), &point),
                (None, Op::Mul) => eval_terms(&self.ring, sp.prod[i].terms().map(|(m, c)| (m, c.clone())), &point),
                (Some(_), Op::Add) => {
                    eval_terms(&self.ring, sp.sum_mod[i].terms().map(|(m, &c)| (m, BigInt::from(c))), &point)
                }
                (Some(_), Op::Mul) => {
                    eval_terms(&self.ring, sp.prod_mod[i].terms().map(|(m, &c)| (m, BigInt::from(c))), &point)
                }
            })
            .collect();
        Ok(WittVector { ring: self.ring.clone(), p: self.p, coords })
    }

    pub fn add(&self, other: &Self) -> Result<Self, WittError> {
        self.combine(other, Op::Add)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, WittError> {
        self.combine(other, Op::Mul)
    }

    /// Ghost components `w_i = Σ_{j≤i} p^j x_j^{p^{i-j}}`.
    pub fn ghost(&self) -> Vec<R::Elem> {
        let p = self.p;
        (0..self.len())
            .map(|i| {
                let mut acc = self.ring.zero();
                for j in 0..=i {
                    let e = p.pow((i - j) as u32);
                    let t = self.ring.pow(&self.coords[j], e);
                    let c = self.ring.embed_int(&BigInt::from(p).pow(j as u32));
                    acc = self.ring.add(&acc, &self.ring.mul(&c, &t));
                }
                acc
            })
            .collect()
    }

    /// Shift right by one, dropping the last coordinate.
    pub fn verschiebung(&self) -> Self {
        let mut coords = Vec::with_capacity(self.len());
        if !self.coords.is_empty() {
            coords.push(self.ring.zero());
            coords.extend(self.coords[..self.len() - 1].iter().cloned());
        }
        WittVector { ring: self.ring.clone(), p: self.p, coords }
    }

    /// Componentwise p-th power; only meaningful over F_p-algebras.
    pub fn frobenius(&self) -> Result<Self, WittError> {
        if self.ring.characteristic() != Some(self.p) {
            return Err(WittError::NotCharacteristicP(self.p));
        }
        let coords = self.coords.iter().map(|x| self.ring.pow(x, self.p)).collect();
        Ok(WittVector { ring: self.ring.clone(), p: self.p, coords })
    }

    pub fn truncate(&self, len: usize) -> Result<Self, WittError> {
        if len > self.len() {
            return Err(WittError::BadTruncation { from: self.len(), to: len });
        }
        Ok(WittVector { ring: self.ring.clone(), p: self.p, coords: self.coords[..len].to_vec() })
    }
}

/// Teichmüller representative of `d` modulo `m`: the fixpoint of t ↦ t^p.
fn teichmuller(d: &BigInt, p: u64, m: &BigInt) -> BigInt {
    let pb = BigInt::from(p);
    let mut t = d.mod_floor(m);
    loop {
        let next = t.modpow(&pb, m);
        if next == t {
            return t;
        }
        t = next;
    }
}

fn teichmuller_digits(a: &BigInt, p: u64, len: usize) -> Vec<u64> {
    let pb = BigInt::from(p);
    let modulus = pb.pow(len as u32);
    let mut rem = a.mod_floor(&modulus);
    let mut digits = Vec::with_capacity(len);
    for i in 0..len {
        let scale = pb.pow(i as u32);
        let d = (&rem / &scale).mod_floor(&pb);
        let tau = teichmuller(&d, p, &modulus);
        rem = (rem - &scale * tau).mod_floor(&modulus);
        digits.push(d.to_u64().expect("digit fits"));
    }
    debug_assert!(rem.is_zero());
    digits
}

/// Witt coordinates over F_p of `a mod p^len`.
pub fn witt_from_int(a: &BigInt, p: u64, len: usize) -> WittVector<PrimeField> {
    let coords = teichmuller_digits(a, p, len);
    WittVector { ring: PrimeField { p }, p, coords }
}

/// Inverse of [`witt_from_int`]: `Σ p^i τ(x_i)` reduced into `[0, p^len)`.
pub fn witt_to_int(w: &WittVector<PrimeField>) -> BigInt {
    let pb = BigInt::from(w.p);
    let modulus = pb.pow(w.len() as u32);
    let mut acc = BigInt::zero();
    for (i, &x) in w.coords.iter().enumerate() {
        let tau = teichmuller(&BigInt::from(x), w.p, &modulus);
        acc += pb.pow(i as u32) * tau;
    }
    acc.mod_floor(&modulus)
}
