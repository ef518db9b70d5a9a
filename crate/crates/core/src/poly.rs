//! Sparse multivariate polynomials with integer or F_p coefficients.

use crate::ring::{Elem, LocalRing};
use crate::syntax::{Expr, ParseError, Parser};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt::Write as _;

pub type Monomial = Vec<u32>;

/// Integer-coefficient polynomial in a fixed number of variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Monomial, BigInt>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: impl Into<BigInt>) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c.into());
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, 1)
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index out of range");
        let mut m = vec![0; nvars];
        m[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(m, BigInt::one());
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, BigInt)>) -> Self {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            assert_eq!(m.len(), nvars, "monomial length mismatch");
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &[u32]) -> BigInt {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn constant_term(&self) -> BigInt {
        self.coefficient(&vec![0; self.nvars])
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.iter().all(|&e| e == 0))
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.iter().sum()).max()
    }

    /// Variables that occur with a positive exponent.
    pub fn support(&self) -> Vec<usize> {
        (0..self.nvars).filter(|&i| self.terms.keys().any(|m| m[i] > 0)).collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        MultiPoly { nvars: self.nvars, terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        if k.is_zero() {
            return Self::zero(self.nvars);
        }
        MultiPoly { nvars: self.nvars, terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = Self::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m: Monomial = ma.iter().zip(mb).map(|(a, b)| a + b).collect();
                out.add_term(m, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut acc = Self::one(self.nvars);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            if m[var] > 0 {
                let mut m2 = m.clone();
                m2[var] -= 1;
                out.add_term(m2, c * BigInt::from(m[var]));
            }
        }
        out
    }

    /// Divides every coefficient by `d`, or returns `None` if some division is inexact.
    pub fn div_exact(&self, d: &BigInt) -> Option<Self> {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let (q, r) = c.div_rem(d);
            if !r.is_zero() {
                return None;
            }
            terms.insert(m.clone(), q);
        }
        Some(MultiPoly { nvars: self.nvars, terms })
    }

    /// Reinterprets the polynomial in a larger variable set; variable `i` becomes `map[i]`.
    pub fn remap(&self, nvars: usize, map: &[usize]) -> Self {
        assert_eq!(map.len(), self.nvars);
        let mut out = Self::zero(nvars);
        for (m, c) in &self.terms {
            let mut m2 = vec![0; nvars];
            for (i, &e) in m.iter().enumerate() {
                m2[map[i]] += e;
            }
            out.add_term(m2, c.clone());
        }
        out
    }

    /// Substitutes `subs[i]` for variable `i`.
    pub fn compose(&self, subs: &[MultiPoly]) -> MultiPoly {
        assert_eq!(subs.len(), self.nvars);
        let target = subs.first().map_or(0, |s| s.nvars);
        let mut out = MultiPoly::zero(target);
        let mut cache: BTreeMap<(usize, u32), MultiPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut t = MultiPoly::constant(target, c.clone());
            for (i, &e) in m.iter().enumerate() {
                if e > 0 {
                    let pw = cache.entry((i, e)).or_insert_with(|| subs[i].pow(e));
                    t = t.mul(pw);
                }
            }
            out = out.add(&t);
        }
        out
    }

    pub fn eval_int(&self, point: &[BigInt]) -> BigInt {
        let mut acc = BigInt::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(m) {
                if e > 0 {
                    t *= num_traits::pow(x.clone(), e as usize);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn reduce_mod(&self, p: u64) -> ModPoly {
        let pb = BigInt::from(p);
        let mut out = ModPoly::zero(self.nvars, p);
        for (m, c) in &self.terms {
            let r = c.mod_floor(&pb).to_u64().expect("residue fits");
            out.add_term(m.clone(), r);
        }
        out
    }

    pub fn compile(&self, ring: &LocalRing) -> CompiledPoly {
        CompiledPoly::new(ring, self.terms.iter().map(|(m, c)| (m.as_slice(), ring.from_bigint(c))))
    }

    pub fn format(&self, names: &[String]) -> String {
        format_terms(self.terms.iter().rev().map(|(m, c)| (m.as_slice(), c.clone())), names)
    }

    /// One line per term: coefficient followed by the exponent vector.
    pub fn format_exponents(&self) -> String {
        let mut s = String::new();
        for (m, c) in &self.terms {
            let exps: Vec<String> = m.iter().map(|e| e.to_string()).collect();
            let _ = writeln!(s, "{c} [{}]", exps.join(","));
        }
        s
    }

    /// Parses `src` against the ordered variable list `vars`.
    pub fn parse(src: &str, vars: &[String]) -> Result<Self, ParseError> {
        let mut parser = Parser::new(src)?;
        let e = parser.expr()?;
        parser.finish()?;
        expr_to_poly(&e, vars, None)
    }
}

/// Converts a syntax tree to a polynomial; `param` names an extra symbol mapped to a fixed polynomial.
pub(crate) fn expr_to_poly(
    e: &Expr,
    vars: &[String],
    param: Option<(&str, &MultiPoly)>,
) -> Result<MultiPoly, ParseError> {
    let n = vars.len();
    Ok(match e {
        Expr::Int(v) => MultiPoly::constant(n, v.clone()),
        Expr::Var(name, at) => {
            if let Some(i) = vars.iter().position(|v| v == name) {
                MultiPoly::var(n, i)
            } else if let Some((_, pval)) = param.filter(|(pn, _)| pn == name) {
                pval.clone()
            } else {
                return Err(ParseError::new(*at, format!("unbound variable '{name}'")));
            }
        }
        Expr::Infinity(at) => return Err(ParseError::new(*at, "INFINITY is not a polynomial")),
        Expr::Call(name, _, at) => {
            return Err(ParseError::new(*at, format!("'{name}' is not allowed inside a polynomial")))
        }
        Expr::Div(_, _, at) => return Err(ParseError::new(*at, "division is not allowed in polynomials")),
        Expr::Neg(a) => expr_to_poly(a, vars, param)?.neg(),
        Expr::Add(a, b) => expr_to_poly(a, vars, param)?.add(&expr_to_poly(b, vars, param)?),
        Expr::Sub(a, b) => expr_to_poly(a, vars, param)?.sub(&expr_to_poly(b, vars, param)?),
        Expr::Mul(a, b) => expr_to_poly(a, vars, param)?.mul(&expr_to_poly(b, vars, param)?),
        Expr::Pow(a, k) => expr_to_poly(a, vars, param)?.pow(*k),
    })
}

fn format_terms<'a>(terms: impl Iterator<Item = (&'a [u32], BigInt)>, names: &[String]) -> String {
    let mut s = String::new();
    for (m, c) in terms {
        let neg = c.is_negative();
        let abs = c.abs();
        if s.is_empty() {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        let mut factors: Vec<String> = Vec::new();
        for (i, &e) in m.iter().enumerate() {
            let name = names.get(i).cloned().unwrap_or_else(|| format!("v{i}"));
            match e {
                0 => {}
                1 => factors.push(name),
                _ => factors.push(format!("{name}^{e}")),
            }
        }
        if factors.is_empty() {
            let _ = write!(s, "{abs}");
        } else {
            if !abs.is_one() {
                let _ = write!(s, "{abs}*");
            }
            s.push_str(&factors.join("*"));
        }
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

/// Polynomial with coefficients in F_p.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModPoly {
    nvars: usize,
    p: u64,
    terms: BTreeMap<Monomial, u64>,
}

impl ModPoly {
    pub fn zero(nvars: usize, p: u64) -> Self {
        ModPoly { nvars, p, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, p: u64, c: u64) -> Self {
        let mut out = Self::zero(nvars, p);
        out.add_term(vec![0; nvars], c % p);
        out
    }

    pub fn var(nvars: usize, p: u64, i: usize) -> Self {
        let mut m = vec![0; nvars];
        m[i] = 1;
        let mut out = Self::zero(nvars, p);
        out.add_term(m, 1);
        out
    }

    fn add_term(&mut self, m: Monomial, c: u64) {
        let c = c % self.p;
        if c == 0 {
            return;
        }
        let p = self.p;
        let slot = self.terms.entry(m.clone()).or_insert(0);
        *slot = (*slot + c) % p;
        if *slot == 0 {
            self.terms.remove(&m);
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &u64)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        ModPoly {
            nvars: self.nvars,
            p: self.p,
            terms: self.terms.iter().map(|(m, &c)| (m.clone(), self.p - c)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: u64) -> Self {
        let mut out = Self::zero(self.nvars, self.p);
        let k = k % self.p;
        for (m, &c) in &self.terms {
            out.add_term(m.clone(), ((c as u128 * k as u128) % self.p as u128) as u64);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let p = self.p as u128;
        let mut acc: std::collections::HashMap<Monomial, u128> = std::collections::HashMap::new();
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &other.terms {
                let m: Monomial = ma.iter().zip(mb).map(|(a, b)| a + b).collect();
                let slot = acc.entry(m).or_insert(0);
                *slot = (*slot + ca as u128 * cb as u128) % p;
            }
        }
        ModPoly {
            nvars: self.nvars,
            p: self.p,
            terms: acc.into_iter().filter(|(_, c)| *c != 0).map(|(m, c)| (m, c as u64)).collect(),
        }
    }

    /// `self^p`, computed as the Frobenius twist: exponents and coefficients raised termwise.
    pub fn frobenius(&self) -> Self {
        let p = self.p;
        let e = p as u32;
        ModPoly {
            nvars: self.nvars,
            p,
            terms: self
                .terms
                .iter()
                .map(|(m, &c)| {
                    let m2 = m.iter().map(|x| x * e).collect();
                    (m2, crate::ring::pow_mod_u64(c, p, p))
                })
                .collect(),
        }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        // peel off p-adic digits so large p-powers go through Frobenius
        let p = self.p;
        let mut acc = Self::constant(self.nvars, p, 1);
        let mut base = self.clone();
        while e > 0 {
            let d = e % p;
            for _ in 0..d {
                acc = acc.mul(&base);
            }
            e /= p;
            if e > 0 {
                base = base.frobenius();
            }
        }
        acc
    }

    pub fn to_multipoly(&self) -> MultiPoly {
        MultiPoly::from_terms(self.nvars, self.terms.iter().map(|(m, &c)| (m.clone(), BigInt::from(c))))
    }

    pub fn remap(&self, nvars: usize, map: &[usize]) -> Self {
        let mut out = Self::zero(nvars, self.p);
        for (m, &c) in &self.terms {
            let mut m2 = vec![0; nvars];
            for (i, &e) in m.iter().enumerate() {
                m2[map[i]] += e;
            }
            out.add_term(m2, c);
        }
        out
    }

    pub fn eval(&self, point: &[u64]) -> u64 {
        let p = self.p;
        let mut acc = 0u64;
        for (m, &c) in &self.terms {
            let mut t = c;
            for (x, &e) in point.iter().zip(m) {
                if e > 0 {
                    t = ((t as u128 * crate::ring::pow_mod_u64(*x, e as u64, p) as u128) % p as u128) as u64;
                }
            }
            acc = (acc + t) % p;
        }
        acc
    }

    pub fn format(&self, names: &[String]) -> String {
        format_terms(self.terms.iter().rev().map(|(m, &c)| (m.as_slice(), BigInt::from(c))), names)
    }

    pub fn format_exponents(&self) -> String {
        self.to_multipoly().format_exponents()
    }
}

/// A polynomial with coefficients already mapped into a fixed ring, ready for fast evaluation.
#[derive(Debug, Clone)]
pub struct CompiledPoly {
    ring: LocalRing,
    terms: Vec<(Elem, Vec<(usize, u32)>)>,
    max_var: Option<usize>,
}

impl CompiledPoly {
    fn new<'a>(ring: &LocalRing, terms: impl Iterator<Item = (&'a [u32], Elem)>) -> Self {
        let mut out = Vec::new();
        let mut max_var = None;
        for (m, c) in terms {
            if ring.is_zero(&c) {
                continue;
            }
            let factors: Vec<(usize, u32)> =
                m.iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, &e)| (i, e)).collect();
            if let Some(&(i, _)) = factors.last() {
                max_var = max_var.max(Some(i));
            }
            out.push((c, factors));
        }
        CompiledPoly { ring: ring.clone(), terms: out, max_var }
    }

    pub fn ring(&self) -> &LocalRing {
        &self.ring
    }

    /// Highest variable index with a nonzero term in the working ring.
    pub fn max_var(&self) -> Option<usize> {
        self.max_var
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, point: &[Elem]) -> Elem {
        let r = &self.ring;
        let mut acc = r.zero();
        for (c, factors) in &self.terms {
            let mut t = c.clone();
            for &(i, e) in factors {
                let x = &point[i];
                let xe = if e == 1 { x.clone() } else { r.pow(x, e as u128) };
                t = r.mul(&t, &xe);
            }
            acc = r.add(&acc, &t);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::RingSpec;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_and_formats() {
        let vars = names(&["x", "y"]);
        let f = MultiPoly::parse("y^2 - x^3", &vars).unwrap();
        assert_eq!(f.format(&vars), "-x^3 + y^2");
        let g = MultiPoly::parse("(x+1)*(x-1) - x^2", &vars).unwrap();
        assert_eq!(g, MultiPoly::constant(2, -1));
        assert_eq!(MultiPoly::parse("-x^2", &vars).unwrap().format(&vars), "-x^2");
    }

    #[test]
    fn parse_errors_carry_positions() {
        let vars = names(&["x"]);
        let err = MultiPoly::parse("x + z", &vars).unwrap_err();
        assert_eq!(err.pos, 4);
        assert!(MultiPoly::parse("x / 2", &vars).is_err());
        assert!(MultiPoly::parse("x^", &vars).is_err());
        assert!(MultiPoly::parse("(x", &vars).is_err());
    }

    #[test]
    fn derivative_of_cusp() {
        let vars = names(&["x", "y"]);
        let f = MultiPoly::parse("y^2 - x^3", &vars).unwrap();
        assert_eq!(f.derivative(0), MultiPoly::parse("-3*x^2", &vars).unwrap());
        assert_eq!(f.derivative(1), MultiPoly::parse("2*y", &vars).unwrap());
    }

    #[test]
    fn compose_and_eval_agree() {
        let vars = names(&["x", "y"]);
        let f = MultiPoly::parse("x^2*y + 3*y - 1", &vars).unwrap();
        let subs = vec![MultiPoly::parse("x + y", &vars).unwrap(), MultiPoly::parse("2*x", &vars).unwrap()];
        let g = f.compose(&subs);
        for a in -3..4 {
            for b in -3..4 {
                let pt = [BigInt::from(a), BigInt::from(b)];
                let inner = [BigInt::from(a + b), BigInt::from(2 * a)];
                assert_eq!(g.eval_int(&pt), f.eval_int(&inner));
            }
        }
    }

    #[test]
    fn compiled_eval_matches_integer_eval() {
        let ring = LocalRing::new(RingSpec::unramified(3, 2)).unwrap();
        let vars = names(&["x", "y"]);
        let f = MultiPoly::parse("x*y - 3 + 5*x^4", &vars).unwrap();
        let cf = f.compile(&ring);
        for a in 0..27i64 {
            for b in 0..27i64 {
                let v = cf.eval(&[ring.from_int(a), ring.from_int(b)]);
                let exact = f.eval_int(&[BigInt::from(a), BigInt::from(b)]);
                assert_eq!(v, ring.from_bigint(&exact));
            }
        }
    }

    #[test]
    fn modpoly_pow_uses_frobenius_correctly() {
        let p = 3;
        let f = ModPoly::var(2, p, 0).add(&ModPoly::var(2, p, 1)).add(&ModPoly::constant(2, p, 2));
        let mut naive = ModPoly::constant(2, p, 1);
        for _ in 0..11 {
            naive = naive.mul(&f);
        }
        assert_eq!(f.pow(11), naive);
    }

    #[test]
    fn div_exact_detects_remainders() {
        let f = MultiPoly::from_terms(1, [(vec![1], BigInt::from(6)), (vec![0], BigInt::from(3))]);
        assert!(f.div_exact(&BigInt::from(3)).is_some());
        assert!(f.div_exact(&BigInt::from(2)).is_none());
    }
}
