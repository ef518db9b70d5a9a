use num_bigint::BigInt;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stackcount::witt::{structure_polynomials, witt_from_int, witt_to_int, Integers, PrimeField, WittVector};

fn random_int_vector(rng: &mut ChaCha8Rng, p: u64, len: usize) -> WittVector<Integers> {
    let coords = (0..len).map(|_| BigInt::from(rng.random_range(-4i64..=4))).collect();
    WittVector::new(Integers, p, coords)
}

fn check_ghost_homomorphism(p: u64, len: usize, samples: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let a = random_int_vector(&mut rng, p, len);
        let b = random_int_vector(&mut rng, p, len);
        let (ga, gb) = (a.ghost(), b.ghost());
        let sum = a.add(&b).unwrap().ghost();
        let prod = a.mul(&b).unwrap().ghost();
        for i in 0..len {
            assert_eq!(sum[i], &ga[i] + &gb[i], "p={p} len={len} sum index {i}");
            assert_eq!(prod[i], &ga[i] * &gb[i], "p={p} len={len} product index {i}");
        }
    }
}

#[test]
fn ghost_map_is_additive_and_multiplicative() {
    for p in [2u64, 3, 5] {
        for len in 1..=4 {
            check_ghost_homomorphism(p, len, 250, 1000 * p + len as u64);
        }
    }
}

fn all_vectors(p: u64, len: usize) -> Vec<WittVector<PrimeField>> {
    let total = p.pow(len as u32);
    (0..total)
        .map(|mut code| {
            let coords = (0..len)
                .map(|_| {
                    let d = code % p;
                    code /= p;
                    d
                })
                .collect();
            WittVector::new(PrimeField { p }, p, coords)
        })
        .collect()
}

fn times_p(w: &WittVector<PrimeField>) -> WittVector<PrimeField> {
    let p = w.p();
    let pw = witt_from_int(&BigInt::from(p), p, w.len());
    pw.mul(w).unwrap()
}

#[test]
fn verschiebung_frobenius_identities_exhaustive() {
    for p in [2u64, 3] {
        let all = all_vectors(p, 3);
        for a in &all {
            let pa = times_p(a);
            assert_eq!(a.frobenius().unwrap().verschiebung(), pa);
            assert_eq!(a.verschiebung().frobenius().unwrap(), pa);
            let fa = a.frobenius().unwrap();
            for b in &all {
                let lhs = a.mul(&b.verschiebung()).unwrap();
                let rhs = fa.mul(b).unwrap().verschiebung();
                assert_eq!(lhs, rhs, "p={p} a={:?} b={:?}", a.coords(), b.coords());
            }
        }
    }
}

#[test]
fn frobenius_after_verschiebung_is_p_on_w3_f5() {
    for a in all_vectors(5, 3) {
        assert_eq!(a.verschiebung().frobenius().unwrap(), times_p(&a));
    }
}

#[test]
fn verschiebung_filtration_is_multiplicative() {
    for p in [2u64, 3] {
        let all = all_vectors(p, 3);
        for a in &all {
            for b in &all {
                for n in 0..3 {
                    for m in 0..3 {
                        let mut va = a.clone();
                        for _ in 0..n {
                            va = va.verschiebung();
                        }
                        let mut vb = b.clone();
                        for _ in 0..m {
                            vb = vb.verschiebung();
                        }
                        let prod = va.mul(&vb).unwrap();
                        let cut = (n + m).min(3);
                        assert!(prod.coords()[..cut].iter().all(|&c| c == 0));
                    }
                }
            }
        }
    }
}

#[test]
fn truncation_is_a_ring_homomorphism() {
    let all = all_vectors(3, 3);
    for a in all.iter().step_by(2) {
        for b in all.iter().step_by(3) {
            let s = a.add(b).unwrap().truncate(2).unwrap();
            let t = a.truncate(2).unwrap().add(&b.truncate(2).unwrap()).unwrap();
            assert_eq!(s, t);
            let s = a.mul(b).unwrap().truncate(1).unwrap();
            let t = a.truncate(1).unwrap().mul(&b.truncate(1).unwrap()).unwrap();
            assert_eq!(s, t);
        }
    }
}

#[test]
fn structure_polys_are_cached() {
    let a = structure_polynomials(3, 3).unwrap();
    let b = structure_polynomials(3, 3).unwrap();
    assert!(std::sync::Arc::ptr_eq(&a, &b));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn encoding_respects_ring_operations(p in prop::sample::select(vec![2u64, 3, 5]), a in -500i64..500, b in -500i64..500) {
        let len = 3;
        let m = BigInt::from(p.pow(len as u32));
        let (ba, bb) = (BigInt::from(a), BigInt::from(b));
        let wa = witt_from_int(&ba, p, len);
        let wb = witt_from_int(&bb, p, len);
        prop_assert_eq!(witt_to_int(&wa.add(&wb).unwrap()), ((&ba + &bb) % &m + &m) % &m);
        prop_assert_eq!(witt_to_int(&wa.mul(&wb).unwrap()), ((&ba * &bb) % &m + &m) % &m);
    }
}
