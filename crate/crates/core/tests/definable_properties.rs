use proptest::prelude::*;
use stackcount::definable::{measure_formula, parse_formula, specialize_primes, QExpression, Truth, Verdict};
use stackcount::measures::{tau, Target};
use stackcount::rational::ratio;
use stackcount::ring::{Elem, LocalRing, RingSpec};
use stackcount::scheme::AffineScheme;

fn zp(p: u64, n: u32) -> LocalRing {
    LocalRing::new(RingSpec::unramified(p, n)).unwrap()
}

fn vars() -> Vec<String> {
    vec!["x".into(), "y".into()]
}

fn plane() -> AffineScheme {
    AffineScheme::parse("A2", &["x", "y"], &[], 2).unwrap()
}

/// Atoms whose truth at a point only depends on the p-adic point, not the level.
const POINT_ATOMS: &[&str] = &[
    "ord(x) >= 1",
    "ord(x - y) < 2",
    "ord(x) + 1 <= ord(y)",
    "ac(x) == 1",
    "ac(y) != 2",
    "res(x + y) == 0",
    "res(x)^2 == res(y)",
    "ord(x) mod 2 == 0",
    "ord(x*y) > 1",
];

/// Atoms read at the level of the ring (`== 0` means zero in `R_n`).
const LEVEL_ATOMS: &[&str] = &["x - y == 0", "ord(x*y - t) == INFINITY", "x*y != 3"];

#[derive(Debug, Clone)]
enum Shape {
    Atom(usize),
    Not(Box<Shape>),
    And(Box<Shape>, Box<Shape>),
    Or(Box<Shape>, Box<Shape>),
}

impl Shape {
    fn text(&self, atoms: &[&str]) -> String {
        match self {
            Shape::Atom(i) => atoms[*i % atoms.len()].to_string(),
            Shape::Not(a) => format!("!({})", a.text(atoms)),
            Shape::And(a, b) => format!("({}) && ({})", a.text(atoms), b.text(atoms)),
            Shape::Or(a, b) => format!("({}) || ({})", a.text(atoms), b.text(atoms)),
        }
    }

    fn atoms(&self) -> Vec<usize> {
        match self {
            Shape::Atom(i) => vec![*i],
            Shape::Not(a) => a.atoms(),
            Shape::And(a, b) | Shape::Or(a, b) => [a.atoms(), b.atoms()].concat(),
        }
    }
}

fn shape() -> impl Strategy<Value = Shape> {
    (0usize..64).prop_map(Shape::Atom).prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Shape::Not(Box::new(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Shape::And(Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| Shape::Or(Box::new(a), Box::new(b))),
        ]
    })
}

fn kleene_not(a: Truth) -> Truth {
    match a {
        Truth::True => Truth::False,
        Truth::False => Truth::True,
        Truth::Unknown => Truth::Unknown,
    }
}

fn kleene_and(a: Truth, b: Truth) -> Truth {
    match (a, b) {
        (Truth::False, _) | (_, Truth::False) => Truth::False,
        (Truth::True, Truth::True) => Truth::True,
        _ => Truth::Unknown,
    }
}

fn kleene_or(a: Truth, b: Truth) -> Truth {
    kleene_not(kleene_and(kleene_not(a), kleene_not(b)))
}

/// Truth value computed bottom-up from the atoms alone.
fn oracle(s: &Shape, atoms: &[&str], ring: &LocalRing, pt: &[Elem]) -> Truth {
    match s {
        Shape::Atom(_) => parse_formula(&s.text(atoms), &vars()).unwrap().eval(ring, pt),
        Shape::Not(a) => kleene_not(oracle(a, atoms, ring, pt)),
        Shape::And(a, b) => kleene_and(oracle(a, atoms, ring, pt), oracle(b, atoms, ring, pt)),
        Shape::Or(a, b) => kleene_or(oracle(a, atoms, ring, pt), oracle(b, atoms, ring, pt)),
    }
}

fn all_points(ring: &LocalRing) -> Vec<Vec<Elem>> {
    let elems = ring.elements(1 << 16).unwrap();
    elems.iter().flat_map(|x| elems.iter().map(move |y| vec![x.clone(), y.clone()])).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn connectives_follow_kleene_tables(s in shape(), level_atoms in any::<bool>()) {
        let atoms: Vec<&str> = if level_atoms { [POINT_ATOMS, LEVEL_ATOMS].concat() } else { POINT_ATOMS.to_vec() };
        let ring = zp(3, 1);
        let f = parse_formula(&s.text(&atoms), &vars()).unwrap();
        let neg = parse_formula(&format!("!({})", s.text(&atoms)), &vars()).unwrap();
        for pt in all_points(&ring) {
            let t = f.eval(&ring, &pt);
            prop_assert_eq!(t, oracle(&s, &atoms, &ring, &pt));
            prop_assert_eq!(neg.eval(&ring, &pt), kleene_not(t));
        }
    }

    /// A value decided at a coarse level is the value at every lift.
    #[test]
    fn decided_values_survive_lifting(s in shape()) {
        prop_assume!(s.atoms().len() <= 6);
        let coarse = zp(3, 1);
        let fine = zp(3, 2);
        let f = parse_formula(&s.text(POINT_ATOMS), &vars()).unwrap();
        for pt in all_points(&fine) {
            let below = f.eval(&coarse, &tau(&fine, &pt, 1).unwrap());
            if below != Truth::Unknown {
                prop_assert_eq!(f.eval(&fine, &pt), below);
            }
        }
    }
}

#[test]
fn positive_valuation_has_measure_inverse_p() {
    let a1 = AffineScheme::parse("A1", &["x"], &[], 1).unwrap();
    let f = parse_formula("ord(x) >= 1", &["x".to_string()]).unwrap();
    for p in [3u64, 5, 7] {
        let m = measure_formula(&f, Target::Scheme(&a1), &zp(p, 0), 1, 4).unwrap();
        assert!(m.is_stabilized());
        assert_eq!(m.value, ratio(1, p));
    }
}

#[test]
fn even_order_bounded_set_has_exact_measure() {
    let a1 = AffineScheme::parse("A1", &["x"], &[], 1).unwrap();
    let f = parse_formula("(ord(x) mod 2 == 0) && ord(x) <= 4 && ac(x) == 1", &["x".to_string()]).unwrap();
    let m = measure_formula(&f, Target::Scheme(&a1), &zp(3, 0), 1, 7).unwrap();
    // {ord x = k, ac x = 1} has measure 3^(-k-1)
    let oracle = ratio(1, 3) + ratio(1, 27) + ratio(1, 243);
    assert_eq!(oracle, ratio(91, 243));
    assert!(m.is_stabilized());
    assert_eq!(m.value, oracle);
}

#[test]
fn hyperbola_through_uniformizer_specializes_uniformly() {
    let f = parse_formula("ord(x*y - t) == INFINITY", &vars()).unwrap();
    let a2 = plane();
    let good = QExpression::parse("2(1 - 1/q)").unwrap();
    let verdicts = specialize_primes(&f, Target::Scheme(&a2), 1, &[3, 5], &[], &good, 3).unwrap();
    assert!(verdicts.iter().all(|v| v.verdict == Verdict::Match), "{verdicts:?}");
    let bad = QExpression::parse("1/q^2").unwrap();
    let verdicts = specialize_primes(&f, Target::Scheme(&a2), 1, &[3, 5], &[], &bad, 3).unwrap();
    for v in verdicts {
        assert_eq!(v.verdict, Verdict::Mismatch { expected: ratio(1, v.p * v.p) });
    }
}
