use stackcount::ring::{LocalRing, RingSpec};
use stackcount::scheme::{hensel_liftable, reduce_point, AffineScheme, HenselVerdict, Point, PointTower};
use std::collections::HashMap;

fn zp(p: u64, n: u32) -> LocalRing {
    LocalRing::new(RingSpec::unramified(p, n)).unwrap()
}

/// Schemes smooth over Z_p for p in {2, 3, 5}.
fn smooth_battery() -> Vec<AffineScheme> {
    vec![
        AffineScheme::affine_space(1),
        AffineScheme::affine_space(2),
        AffineScheme::parse("parabola", &["x", "y"], &["y - x^2"], 1).unwrap(),
        AffineScheme::parse("gm", &["x", "y"], &["x*y - 1"], 1).unwrap(),
        AffineScheme::parse("conic", &["x", "y"], &["x^2 + x*y + y^2 - 1"], 1).unwrap(),
        AffineScheme::parse("curve37", &["x", "y"], &["y^2 + y - x^3 + x"], 1).unwrap(),
        AffineScheme::parse("graph", &["x", "y", "z"], &["x + y^2 + z^3"], 2).unwrap(),
        AffineScheme::parse("line_in_plane", &["x", "y", "z"], &["x - y", "z - 1"], 1).unwrap(),
    ]
}

#[test]
fn smooth_fibers_have_p_to_the_d_points() {
    let mut fibers_checked = 0u64;
    for x in smooth_battery() {
        for p in [2u64, 3, 5] {
            let mut tower = PointTower::new(&x, &zp(p, 0));
            for n in 0..=2u32 {
                let lower: Vec<Point> = tower.points(n).unwrap().to_vec();
                let upper: Vec<Point> = tower.points(n + 1).unwrap().to_vec();
                let (rl, ru) = (tower.ring(n), tower.ring(n + 1));
                let mut sizes: HashMap<Point, u128> = HashMap::new();
                for y in &upper {
                    *sizes.entry(reduce_point(&ru, &rl, y).unwrap()).or_default() += 1;
                }
                let expected = (p as u128).pow(x.dim() as u32);
                for pt in &lower {
                    assert_eq!(sizes.get(pt).copied(), Some(expected), "{} p={p} n={n}", x.name());
                    fibers_checked += 1;
                }
                assert_eq!(sizes.len(), lower.len());
            }
        }
    }
    assert!(fibers_checked > 1000);
}

#[test]
fn reduction_maps_points_to_points() {
    let singular = [
        AffineScheme::parse("cusp", &["x", "y"], &["y^2 - x^3"], 1).unwrap(),
        AffineScheme::parse("node", &["x", "y"], &["x*y"], 1).unwrap(),
        AffineScheme::parse("xy3", &["x", "y"], &["x*y - 3"], 1).unwrap(),
    ];
    for x in smooth_battery().iter().chain(singular.iter()) {
        for p in [2u64, 3] {
            let mut tower = PointTower::new(x, &zp(p, 0));
            let top = tower.points(2).unwrap().to_vec();
            let r2 = tower.ring(2);
            for n in 0..2 {
                let rn = tower.ring(n);
                for y in &top {
                    assert!(x.contains(&rn, &reduce_point(&r2, &rn, y).unwrap()));
                }
            }
        }
    }
}

#[test]
fn singular_fibers_can_be_irregular() {
    // the cusp origin over F_3 has 9 lifts mod 9 while smooth points have 3
    let cusp = AffineScheme::parse("cusp", &["x", "y"], &["y^2 - x^3"], 1).unwrap();
    let mut tower = PointTower::new(&cusp, &zp(3, 0));
    let origin = vec![tower.ring(0).zero(); 2];
    assert_eq!(tower.lifts(&origin, 0, 1).unwrap().len(), 9);
    let smooth = vec![tower.ring(0).one(), tower.ring(0).one()];
    assert_eq!(tower.lifts(&smooth, 0, 1).unwrap().len(), 3);
}

#[test]
fn hensel_verdicts() {
    let x23 = AffineScheme::parse("x23", &["x"], &["x^2 - 3"], 0).unwrap();
    let f3 = zp(3, 0);
    assert_eq!(hensel_liftable(&x23, &f3, &[f3.zero()], 2).unwrap(), HenselVerdict::CertifiedNot);
    let x22 = AffineScheme::parse("x22", &["x"], &["x^2 - 2"], 0).unwrap();
    let f7 = zp(7, 0);
    assert_eq!(hensel_liftable(&x22, &f7, &[f7.from_int(3)], 2).unwrap(), HenselVerdict::CertifiedLiftable);
    let cusp = AffineScheme::parse("cusp", &["x", "y"], &["y^2 - x^3"], 1).unwrap();
    let f5 = zp(5, 0);
    assert_eq!(hensel_liftable(&cusp, &f5, &[f5.zero(), f5.zero()], 2).unwrap(), HenselVerdict::Unknown);
}
