use proptest::prelude::*;
use stackcount::ring::{FiniteField, LocalRing, RingSpec, Valuation};

fn rings() -> Vec<LocalRing> {
    [
        RingSpec::unramified(3, 2),
        RingSpec::unramified(5, 1),
        RingSpec::unramified(2, 3),
        RingSpec::unramified(3, 1).with_residue_degree(2),
        RingSpec::eisenstein(3, vec![-3, 0], 3),
        RingSpec::eisenstein(2, vec![2, 2], 2),
    ]
    .into_iter()
    .map(|s| LocalRing::new(s).unwrap())
    .collect()
}

fn ring_and_pair() -> impl Strategy<Value = (LocalRing, u128, u128)> {
    (0..rings().len(), any::<u64>(), any::<u64>()).prop_map(|(i, a, b)| {
        let r = rings()[i].clone();
        let size = r.size();
        (r, a as u128 % size, b as u128 % size)
    })
}

proptest! {
    #[test]
    fn reduction_is_a_ring_homomorphism((r, a, b) in ring_and_pair()) {
        let x = r.element(a);
        let y = r.element(b);
        for level in 0..r.level() {
            let s = r.at_level(level);
            let red = |z: &_| r.reduce(z, &s).unwrap();
            prop_assert_eq!(red(&r.add(&x, &y)), s.add(&red(&x), &red(&y)));
            prop_assert_eq!(red(&r.mul(&x, &y)), s.mul(&red(&x), &red(&y)));
            prop_assert_eq!(red(&r.neg(&x)), s.neg(&red(&x)));
        }
    }

    #[test]
    fn ord_is_additive_and_ac_multiplicative((r, a, b) in ring_and_pair()) {
        let x = r.element(a);
        let y = r.element(b);
        if let (Valuation::Finite(u), Valuation::Finite(v)) = (r.valuation(&x), r.valuation(&y)) {
            let xy = r.mul(&x, &y);
            if u + v <= r.level() {
                prop_assert_eq!(r.valuation(&xy), Valuation::Finite(u + v));
                let k = r.residue_field();
                prop_assert_eq!(r.ac(&xy), k.mul(&r.ac(&x), &r.ac(&y)));
            } else {
                prop_assert_eq!(r.valuation(&xy), Valuation::Infinity);
            }
        }
    }

    #[test]
    fn units_invert((r, a, _b) in ring_and_pair()) {
        let x = r.element(a);
        if r.is_unit(&x) {
            prop_assert_eq!(r.mul(&x, &r.inverse(&x).unwrap()), r.one());
        } else {
            prop_assert!(r.inverse(&x).is_err());
        }
    }

    #[test]
    fn ring_axioms((r, a, b) in ring_and_pair(), c in any::<u64>()) {
        let x = r.element(a);
        let y = r.element(b);
        let z = r.element(c as u128 % r.size());
        prop_assert_eq!(r.mul(&x, &r.add(&y, &z)), r.add(&r.mul(&x, &y), &r.mul(&x, &z)));
        prop_assert_eq!(r.mul(&r.mul(&x, &y), &z), r.mul(&x, &r.mul(&y, &z)));
        prop_assert_eq!(r.mul(&x, &y), r.mul(&y, &x));
        prop_assert_eq!(r.sub(&r.add(&x, &y), &y), x);
    }
}

#[test]
fn unit_counts_match_closed_form() {
    for r in rings() {
        let q = r.q() as u128;
        let units = (0..r.size()).filter(|&i| r.is_unit(&r.element(i))).count() as u128;
        assert_eq!(units, q.pow(r.level()) * (q - 1), "{}", r.spec());
        assert_eq!(r.size(), q.pow(r.level() + 1));
    }
}

#[test]
fn valuation_levels_have_expected_sizes() {
    // exactly q^{n+1-k} elements have ord >= k
    for r in rings() {
        let q = r.q() as u128;
        for k in 0..=r.level() + 1 {
            let n = (0..r.size())
                .filter(|&i| match r.valuation(&r.element(i)) {
                    Valuation::Finite(v) => v >= k,
                    Valuation::Infinity => true,
                })
                .count() as u128;
            assert_eq!(n, q.pow(r.level() + 1 - k));
        }
    }
}

#[test]
fn frobenius_generates_galois_group() {
    let f = FiniteField::new(2, 4).unwrap();
    let elems = f.elements();
    assert_eq!(elems.len(), 16);
    for x in &elems {
        assert_eq!(&f.frobenius_power(x, 4), x);
    }
    let fixed_by_f2 = elems.iter().filter(|x| &f.frobenius_power(x, 2) == *x).count();
    assert_eq!(fixed_by_f2, 4);
}
