//! Greenberg transform of affine schemes over Z/p^{n+1}: a scheme over F_p
//! in Witt-digit variables with the same points.

use crate::poly::{ModPoly, MultiPoly};
use crate::ring::{Elem, LocalRing, RingError, RingSpec};
use crate::scheme::{AffineScheme, Point, SchemeError};
use crate::witt::{witt_from_int, witt_to_int, PolyRing, WittError, WittVector};
use num_bigint::BigInt;
use std::collections::hash_map::Entry;
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GreenbergError {
    #[error("Greenberg transform needs an unramified ring with residue field F_p")]
    Unsupported,
    #[error("cannot truncate level {from} to level {to}")]
    BadLevel { from: u32, to: u32 },
    #[error("point has {got} coordinates, expected {expected}")]
    PointShape { expected: usize, got: usize },
    #[error(transparent)]
    Witt(#[from] WittError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// `Gr_n(X)`: variables `x_j_i` for source variable `j` and Witt digit `i`,
/// ordered digit-major so that truncation keeps a prefix.
#[derive(Debug, Clone)]
pub struct GreenbergScheme {
    source: AffineScheme,
    p: u64,
    level: u32,
    scheme: AffineScheme,
}

impl GreenbergScheme {
    pub fn source(&self) -> &AffineScheme {
        &self.source
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// The transform as a scheme whose generators are read over F_p.
    pub fn scheme(&self) -> &AffineScheme {
        &self.scheme
    }

    pub fn field(&self) -> LocalRing {
        LocalRing::new(RingSpec::unramified(self.p, 0)).expect("prime checked at construction")
    }

    pub fn target_ring(&self) -> LocalRing {
        LocalRing::new(RingSpec::unramified(self.p, self.level)).expect("prime checked at construction")
    }

    pub fn var_index(&self, var: usize, digit: u32) -> usize {
        digit as usize * self.source.nvars() + var
    }

    /// Digit decoding `Gr_n(X)(F_p) -> X(Z/p^{n+1})`.
    pub fn decode(&self, point: &[Elem]) -> Result<Point, GreenbergError> {
        let n = self.source.nvars();
        let len = self.level as usize + 1;
        if point.len() != n * len {
            return Err(GreenbergError::PointShape { expected: n * len, got: point.len() });
        }
        let field = self.field();
        let target = self.target_ring();
        (0..n)
            .map(|j| {
                let coords: Vec<u64> =
                    (0..len).map(|i| field.integer_value(&point[i * n + j]).expect("prime field")).collect();
                let w = WittVector::new(crate::witt::PrimeField { p: self.p }, self.p, coords);
                Ok(target.from_bigint(&witt_to_int(&w)))
            })
            .collect()
    }

    /// Inverse of [`decode`](Self::decode).
    pub fn encode(&self, point: &[Elem]) -> Result<Point, GreenbergError> {
        let n = self.source.nvars();
        if point.len() != n {
            return Err(GreenbergError::PointShape { expected: n, got: point.len() });
        }
        let len = self.level as usize + 1;
        let field = self.field();
        let target = self.target_ring();
        let mut out = vec![field.zero(); n * len];
        for (j, x) in point.iter().enumerate() {
            let v = target.integer_value(x).expect("prime field");
            let w = witt_from_int(&BigInt::from(v), self.p, len);
            for (i, &d) in w.coords().iter().enumerate() {
                out[i * n + j] = field.from_int(d as i64);
            }
        }
        Ok(out)
    }

    /// Truncation `Gr_m(X)(F_p) -> Gr_n(X)(F_p)` dropping digit blocks above `n`.
    pub fn truncate_coords(&self, point: &[Elem], n: u32) -> Result<Point, GreenbergError> {
        if n > self.level {
            return Err(GreenbergError::BadLevel { from: self.level, to: n });
        }
        Ok(point[..(n as usize + 1) * self.source.nvars()].to_vec())
    }
}

/// Witt-digit expansion of a polynomial: component `i` is a polynomial over
/// F_p in the digit variables.
pub fn witt_expand(f: &MultiPoly, p: u64, level: u32) -> Result<Vec<ModPoly>, GreenbergError> {
    let n = f.nvars();
    let len = level as usize + 1;
    let total = n * len;
    let ring = PolyRing { nvars: total, p };
    let vars: Vec<WittVector<PolyRing>> = (0..n)
        .map(|j| {
            let coords = (0..len).map(|i| ModPoly::var(total, p, i * n + j)).collect();
            WittVector::new(ring, p, coords)
        })
        .collect();
    let mut powers: HashMap<(usize, u32), WittVector<PolyRing>> = HashMap::new();
    let mut acc = WittVector::zero(ring, p, len);
    for (m, c) in f.terms() {
        let mut term = WittVector::from_int(ring, p, len, c)?;
        if term.coords().iter().all(|x| x.is_zero()) {
            continue;
        }
        for (j, &e) in m.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let pw = match powers.entry((j, e)) {
                Entry::Occupied(o) => o.into_mut(),
                Entry::Vacant(v) => v.insert(witt_pow(&vars[j], e)?),
            };
            term = term.mul(pw)?;
        }
        acc = acc.add(&term)?;
    }
    Ok(acc.into_coords())
}

fn witt_pow(w: &WittVector<PolyRing>, mut e: u32) -> Result<WittVector<PolyRing>, WittError> {
    let mut acc = WittVector::one(*w.ring(), w.p(), w.len());
    let mut base = w.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.mul(&base)?;
        }
        e >>= 1;
        if e > 0 {
            base = base.mul(&base)?;
        }
    }
    Ok(acc)
}

pub fn greenberg_transform(x: &AffineScheme, p: u64, level: u32) -> Result<GreenbergScheme, GreenbergError> {
    if !crate::ring::is_prime(p) {
        return Err(WittError::NotPrime(p).into());
    }
    let n = x.nvars();
    let len = level as usize + 1;
    let names: Vec<String> = (0..len).flat_map(|i| (0..n).map(move |j| format!("x_{j}_{i}"))).collect();
    let mut gens = Vec::new();
    for f in x.generators() {
        for comp in witt_expand(f, p, level)? {
            let g = comp.to_multipoly();
            if !g.is_zero() && !gens.contains(&g) {
                gens.push(g);
            }
        }
    }
    let dim = x.dim() * len as i64;
    let scheme = AffineScheme::new(format!("Gr{level}({})", x.name()), names, gens, dim)?;
    Ok(GreenbergScheme { source: x.clone(), p, level, scheme })
}

/// Transform for a ring given as a spec; rejects ramified or non-prime residue fields.
pub fn greenberg_transform_ring(x: &AffineScheme, ring: &LocalRing) -> Result<GreenbergScheme, GreenbergError> {
    if !ring.is_unramified() || ring.residue_degree() != 1 {
        return Err(GreenbergError::Unsupported);
    }
    greenberg_transform(x, ring.p(), ring.level())
}

/// A morphism `X -> Y` given by polynomials in X's variables, one per variable of Y.
#[derive(Debug, Clone)]
pub struct Substitution {
    pub components: Vec<MultiPoly>,
}

impl Substitution {
    pub fn apply(&self, ring: &LocalRing, point: &[Elem]) -> Point {
        self.components.iter().map(|c| c.compile(ring).eval(point)).collect()
    }
}

/// `Gr_n` of a substitution morphism, acting on digit coordinates.
pub struct GreenbergMorphism {
    /// Indexed digit-major like the target's variables.
    images: Vec<MultiPoly>,
}

impl GreenbergMorphism {
    pub fn new(phi: &Substitution, p: u64, level: u32) -> Result<Self, GreenbergError> {
        let len = level as usize + 1;
        let m = phi.components.len();
        let expanded: Vec<Vec<ModPoly>> =
            phi.components.iter().map(|c| witt_expand(c, p, level)).collect::<Result<_, _>>()?;
        let mut images = Vec::with_capacity(m * len);
        for i in 0..len {
            for comp in &expanded {
                images.push(comp[i].to_multipoly());
            }
        }
        Ok(GreenbergMorphism { images })
    }

    pub fn apply(&self, field: &LocalRing, point: &[Elem]) -> Point {
        self.images.iter().map(|f| f.compile(field).eval(point)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::{count_points, enumerate_points};

    fn zp(p: u64, n: u32) -> LocalRing {
        LocalRing::new(RingSpec::unramified(p, n)).unwrap()
    }

    #[test]
    fn affine_line_has_no_equations() {
        let a1 = AffineScheme::affine_space(1);
        for p in [2u64, 3, 5] {
            for n in 0..3 {
                let g = greenberg_transform(&a1, p, n).unwrap();
                assert!(g.scheme().generators().is_empty());
                assert_eq!(count_points(g.scheme(), &g.field()).unwrap(), (p as u128).pow(n + 1));
            }
        }
    }

    #[test]
    fn constant_point_is_forced() {
        let x = AffineScheme::parse("c", &["x"], &["x - 5"], 0).unwrap();
        let g = greenberg_transform(&x, 3, 1).unwrap();
        assert_eq!(g.scheme().generators().len(), 2);
        let pts = enumerate_points(g.scheme(), &g.field()).unwrap();
        assert_eq!(pts.len(), 1);
        let decoded = g.decode(&pts[0]).unwrap();
        assert_eq!(decoded, vec![zp(3, 1).from_int(5)]);
    }

    #[test]
    fn square_roots_of_seven_mod_nine() {
        let x = AffineScheme::parse("sq", &["x"], &["x^2 - 7"], 0).unwrap();
        let g = greenberg_transform(&x, 3, 1).unwrap();
        let pts = enumerate_points(g.scheme(), &g.field()).unwrap();
        let mut decoded: Vec<u64> =
            pts.iter().map(|p| zp(3, 1).integer_value(&g.decode(p).unwrap()[0]).unwrap()).collect();
        decoded.sort();
        assert_eq!(decoded, vec![4, 5]);
        let mut low: Vec<u64> = pts
            .iter()
            .map(|p| {
                let t = g.truncate_coords(p, 0).unwrap();
                g.field().integer_value(&t[0]).unwrap()
            })
            .collect();
        low.sort();
        assert_eq!(low, vec![1, 2]);
        assert!(g.truncate_coords(&pts[0], 2).is_err());
    }

    #[test]
    fn encode_decode_round_trip() {
        let a2 = AffineScheme::affine_space(2);
        let g = greenberg_transform(&a2, 2, 2).unwrap();
        let r = zp(2, 2);
        for a in 0..8 {
            for b in 0..8 {
                let pt = vec![r.from_int(a), r.from_int(b)];
                assert_eq!(g.decode(&g.encode(&pt).unwrap()).unwrap(), pt);
            }
        }
    }

    #[test]
    fn rejects_ramified_rings() {
        let r = LocalRing::new(RingSpec::eisenstein(3, vec![-3, 0], 2)).unwrap();
        let a1 = AffineScheme::affine_space(1);
        assert!(matches!(greenberg_transform_ring(&a1, &r), Err(GreenbergError::Unsupported)));
    }
}
