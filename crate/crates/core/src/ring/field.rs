use super::{Elem, LocalRing, RingError, RingSpec};

/// The finite field `F_{p^N}`, a level-0 unramified [`LocalRing`] with
/// Frobenius helpers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteField {
    ring: LocalRing,
}

impl FiniteField {
    pub fn new(p: u64, degree: u32) -> Result<Self, RingError> {
        Ok(FiniteField { ring: LocalRing::new(RingSpec::residue_field(p, degree))? })
    }

    /// Field given by an explicit monic irreducible modulus (low degree first).
    pub fn with_modulus(p: u64, modulus: Vec<u64>) -> Result<Self, RingError> {
        Ok(FiniteField { ring: LocalRing::new(RingSpec::unramified(p, 0).with_modulus(modulus))? })
    }

    /// The field of size `q`, which must be a prime power.
    pub fn of_size(q: u64) -> Result<Self, RingError> {
        let (p, r) = prime_power(q).ok_or_else(|| RingError::InvalidSpec(format!("{q} is not a prime power")))?;
        FiniteField::new(p, r)
    }

    pub fn from_ring(ring: LocalRing) -> Option<Self> {
        (ring.level() == 0 && ring.is_unramified()).then_some(FiniteField { ring })
    }

    pub fn ring(&self) -> &LocalRing {
        &self.ring
    }

    pub fn p(&self) -> u64 {
        self.ring.p()
    }

    pub fn degree(&self) -> u32 {
        self.ring.residue_degree()
    }

    pub fn size(&self) -> u64 {
        self.ring.q()
    }

    /// The field of degree `degree * k` over F_p, i.e. `F_{q^k}`.
    pub fn extension(&self, k: u32) -> Result<FiniteField, RingError> {
        FiniteField::new(self.p(), self.degree() * k)
    }

    /// `x ↦ x^p`.
    pub fn frobenius(&self, x: &Elem) -> Elem {
        self.ring.pow(x, self.p() as u128)
    }

    /// `x ↦ x^{p^k}`.
    pub fn frobenius_power(&self, x: &Elem, k: u32) -> Elem {
        (0..k).fold(x.clone(), |acc, _| self.frobenius(&acc))
    }

    pub fn elements(&self) -> Vec<Elem> {
        self.ring.elements(u64::MAX).expect("finite field fits the bound")
    }
}

/// `(p, r)` with `q = p^r`, or `None` when `q` is not a prime power.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut r = 0;
    let mut m = q;
    while m.is_multiple_of(p) {
        m /= p;
        r += 1;
    }
    (m == 1).then_some((p, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frobenius_fixes_exactly_prime_field() {
        for (p, d) in [(2, 3), (3, 2), (5, 2), (2, 4)] {
            let f = FiniteField::new(p, d).unwrap();
            let els = f.elements();
            let fixed = els.iter().filter(|x| &f.frobenius(x) == *x).count();
            assert_eq!(fixed as u64, p, "F_{p}^{d}");
            let mut images: Vec<Elem> = els.iter().map(|x| f.frobenius(x)).collect();
            images.sort();
            images.dedup();
            assert_eq!(images.len(), els.len());
            for x in &els {
                assert_eq!(&f.frobenius_power(x, d), x);
            }
        }
    }

    #[test]
    fn field_axioms_small() {
        let f = FiniteField::new(3, 2).unwrap();
        let r = f.ring();
        for x in f.elements() {
            if !r.is_zero(&x) {
                assert_eq!(r.mul(&x, &r.inverse(&x).unwrap()), r.one());
            }
        }
    }

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power(25), Some((5, 2)));
        assert_eq!(prime_power(7), Some((7, 1)));
        assert_eq!(prime_power(12), None);
    }
}
