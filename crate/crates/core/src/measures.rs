//! Truncation maps, p-adic measures as stabilized normalized counts, and the
//! Poincaré series with rational-function fitting.

use crate::rational::{format_rational, int, pow_int, Rational};
use crate::ring::{Elem, LocalRing, RingError};
use crate::scheme::{classify_lifts, reduce_point, AffineScheme, Point, PointTower, SchemeError};
use crate::stacks::{GroupAction, QuotientStack, StackError};
use num_traits::{One, Zero};
use std::collections::HashSet;
use std::fmt;

/// Embedded in every report so that numbers from different runs compare unambiguously.
pub const NORMALIZATION: &str = "mu_d(A) = lim_n #tau_n(A) / q^((n+1)*d + dim G) with R_n = R/(omega^(n+1)); \
series c_0 = 1, c_n = count over R_(n-1)";

/// Consecutive equal exact normalized counts required for stabilization.
pub const STABLE_RUN: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MeasureError {
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("cannot truncate level {from} to level {to}")]
    BadLevel { from: u32, to: u32 },
    #[error("need at least {needed} coefficients, got {got}")]
    TooFewTerms { needed: usize, got: usize },
    #[error("no rational function of denominator degree <= {max_order} fits {terms} coefficients")]
    NotFound { max_order: usize, terms: usize },
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Stack(#[from] StackError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// A scheme or a quotient stack whose points are counted.
#[derive(Debug, Clone, Copy)]
pub enum Target<'a> {
    Scheme(&'a AffineScheme),
    Stack(&'a QuotientStack),
}

impl<'a> Target<'a> {
    pub fn name(&self) -> &str {
        match self {
            Target::Scheme(x) => x.name(),
            Target::Stack(s) => s.name(),
        }
    }

    /// The scheme carrying the points (the atlas for a stack).
    pub fn scheme(&self) -> &'a AffineScheme {
        match self {
            Target::Scheme(x) => x,
            Target::Stack(s) => s.scheme(),
        }
    }

    pub fn dim(&self) -> i64 {
        match self {
            Target::Scheme(x) => x.dim(),
            Target::Stack(s) => s.dim(),
        }
    }

    pub fn group_dim(&self) -> i64 {
        match self {
            Target::Scheme(_) => 0,
            Target::Stack(s) => s.group_dim(),
        }
    }

    /// `q^((n+1)d + dim G)`.
    pub fn normalizer(&self, q: u64, level: u32) -> Rational {
        pow_int(q, (level as i64 + 1) * self.dim() + self.group_dim())
    }

    /// Weight of a single atlas point at `ring`: 1 for schemes, `1/|G(R_n)|` for special quotients.
    pub fn point_weight(&self, ring: &LocalRing) -> Result<Rational, MeasureError> {
        match self {
            Target::Scheme(_) => Ok(Rational::one()),
            Target::Stack(s) => match s.action() {
                GroupAction::Special(a) => Ok(Rational::new(1.into(), a.group().order(ring).into())),
                GroupAction::Finite(_) => Err(MeasureError::Unsupported(
                    "finite group quotients have no per-point weight over truncated rings".into(),
                )),
            },
        }
    }

    /// `#X(R_n)`, groupoid-weighted for stacks.
    pub fn count(&self, tower: &mut PointTower, level: u32) -> Result<Rational, MeasureError> {
        match self {
            Target::Scheme(_) => Ok(int(tower.count(level)?)),
            Target::Stack(s) => {
                let ring = tower.ring(level);
                match s.action() {
                    GroupAction::Special(_) => Ok(int(tower.count(level)?) * self.point_weight(&ring)?),
                    GroupAction::Finite(_) => Ok(s.count(&ring)?),
                }
            }
        }
    }
}

/// Digitwise reduction of a point over `ring` to level `n`.
pub fn tau(ring: &LocalRing, point: &[Elem], n: u32) -> Result<Point, MeasureError> {
    if n > ring.level() {
        return Err(MeasureError::BadLevel { from: ring.level(), to: n });
    }
    Ok(reduce_point(ring, &ring.at_level(n), point)?)
}

/// Size of the image of `X(R) -> X(R_n)`, bracketed by certified lifts and
/// points lifting to level `n + slack`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ImageCount {
    pub lower: u128,
    pub upper: u128,
}

impl ImageCount {
    pub fn exact(&self) -> Option<u128> {
        (self.lower == self.upper).then_some(self.upper)
    }
}

pub fn tau_image_count(x: &AffineScheme, ring: &LocalRing, n: u32, slack: u32) -> Result<ImageCount, MeasureError> {
    let mut tower = PointTower::new(x, ring);
    let c = classify_lifts(&mut tower, n, slack)?;
    Ok(ImageCount { lower: c.lower(), upper: c.upper() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureStatus {
    Stabilized,
    Partial,
}

impl fmt::Display for MeasureStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeasureStatus::Stabilized => "STABILIZED",
            MeasureStatus::Partial => "PARTIAL",
        })
    }
}

/// Counts at one level, with lower and upper bounds for sets known only up to truncation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelMeasure {
    pub level: u32,
    pub count_lower: Rational,
    pub count_upper: Rational,
    pub normalized_lower: Rational,
    pub normalized_upper: Rational,
}

impl LevelMeasure {
    pub fn is_exact(&self) -> bool {
        self.count_lower == self.count_upper
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasureResult {
    pub status: MeasureStatus,
    /// The stable value, or the last lower bound when partial.
    pub value: Rational,
    pub stable_from: Option<u32>,
    pub levels: Vec<LevelMeasure>,
}

impl MeasureResult {
    pub fn is_stabilized(&self) -> bool {
        self.status == MeasureStatus::Stabilized
    }

    /// Key/value report lines.
    pub fn report_lines(&self) -> Vec<String> {
        let mut out = vec![format!("status: {}", self.status), format!("value: {}", format_rational(&self.value))];
        if let Some(s) = self.stable_from {
            out.push(format!("stable_from: {s}"));
        }
        out.push(format!("levels_used: {}", self.levels.len()));
        for l in &self.levels {
            if l.is_exact() {
                out.push(format!(
                    "level {}: count {} normalized {}",
                    l.level,
                    format_rational(&l.count_lower),
                    format_rational(&l.normalized_lower)
                ));
            } else {
                out.push(format!(
                    "level {}: count [{}, {}] normalized [{}, {}]",
                    l.level,
                    format_rational(&l.count_lower),
                    format_rational(&l.count_upper),
                    format_rational(&l.normalized_lower),
                    format_rational(&l.normalized_upper)
                ));
            }
        }
        out
    }
}

/// Runs levels `start..=max_level` until [`STABLE_RUN`] consecutive exact levels
/// share a normalized value.
pub fn stabilize<E>(
    start: u32,
    max_level: u32,
    normalizer: impl Fn(u32) -> Rational,
    mut bounds_at: impl FnMut(u32) -> Result<(Rational, Rational), E>,
) -> Result<MeasureResult, E> {
    let mut levels: Vec<LevelMeasure> = Vec::new();
    for n in start..=max_level {
        let (lo, hi) = bounds_at(n)?;
        let norm = normalizer(n);
        levels.push(LevelMeasure {
            level: n,
            normalized_lower: &lo / &norm,
            normalized_upper: &hi / &norm,
            count_lower: lo,
            count_upper: hi,
        });
        if levels.len() >= STABLE_RUN {
            let run = &levels[levels.len() - STABLE_RUN..];
            if run.iter().all(|l| l.is_exact() && l.normalized_lower == run[0].normalized_lower) {
                return Ok(MeasureResult {
                    status: MeasureStatus::Stabilized,
                    value: run[0].normalized_lower.clone(),
                    stable_from: Some(run[0].level),
                    levels,
                });
            }
        }
    }
    let value = levels.last().map(|l| l.normalized_lower.clone()).unwrap_or_else(Rational::zero);
    Ok(MeasureResult { status: MeasureStatus::Partial, value, stable_from: None, levels })
}

/// Measure of all points of the target from normalized level counts.
pub fn padic_measure(target: Target<'_>, ring: &LocalRing, max_level: u32) -> Result<MeasureResult, MeasureError> {
    let mut tower = PointTower::new(target.scheme(), ring);
    let q = ring.q();
    stabilize(
        0,
        max_level,
        |n| target.normalizer(q, n),
        |n| {
            let c = target.count(&mut tower, n)?;
            Ok::<_, MeasureError>((c.clone(), c))
        },
    )
}

/// Same limit computed from images `τ_n(X(R))` rather than all level-n points.
pub fn padic_measure_from_images(
    target: Target<'_>,
    ring: &LocalRing,
    max_level: u32,
    slack: u32,
) -> Result<MeasureResult, MeasureError> {
    let mut tower = PointTower::new(target.scheme(), ring);
    let q = ring.q();
    stabilize(
        0,
        max_level,
        |n| target.normalizer(q, n),
        |n| {
            let c = classify_lifts(&mut tower, n, slack)?;
            let w = target.point_weight(&tower.ring(n))?;
            Ok::<_, MeasureError>((int(c.lower()) * &w, int(c.upper()) * w))
        },
    )
}

/// Measure of the points whose level-`n` truncation avoids the singular locus.
pub fn smooth_part_measure(
    x: &AffineScheme,
    ring: &LocalRing,
    n: u32,
    max_level: u32,
    slack: u32,
) -> Result<MeasureResult, MeasureError> {
    let sing = x.singular_locus()?;
    let base_ring = ring.at_level(n);
    let sing_pts: HashSet<Point> = PointTower::new(&sing, ring).points(n)?.iter().cloned().collect();
    let mut tower = PointTower::new(x, ring);
    let q = ring.q();
    stabilize(
        n,
        max_level,
        |m| pow_int(q, (m as i64 + 1) * x.dim()),
        |m| {
            let c = classify_lifts(&mut tower, m, slack)?;
            let r = tower.ring(m);
            let mut lower = 0u128;
            let mut upper = 0u128;
            for pt in &c.liftable {
                if !sing_pts.contains(&reduce_point(&r, &base_ring, pt)?) {
                    upper += 1;
                    if c.certified.contains(pt) {
                        lower += 1;
                    }
                }
            }
            Ok::<_, MeasureError>((int(lower), int(upper)))
        },
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeriesKind {
    /// All points.
    Tilde,
    /// Points that lift to the ring.
    P,
    /// `P_X - P_{X_sing}`.
    Q,
}

impl SeriesKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "tilde" | "P_tilde" => Some(SeriesKind::Tilde),
            "p" | "P" => Some(SeriesKind::P),
            "q" | "Q" => Some(SeriesKind::Q),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SeriesKind::Tilde => "P_tilde",
            SeriesKind::P => "P",
            SeriesKind::Q => "Q",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Coefficient {
    Exact(Rational),
    Bounds { lower: Rational, upper: Rational },
}

impl Coefficient {
    fn from_bounds(lower: Rational, upper: Rational) -> Self {
        if lower == upper {
            Coefficient::Exact(lower)
        } else {
            Coefficient::Bounds { lower, upper }
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Coefficient::Exact(r) => Some(r),
            Coefficient::Bounds { .. } => None,
        }
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Exact(r) => f.write_str(&format_rational(r)),
            Coefficient::Bounds { lower, upper } => {
                write!(f, "[{}, {}]", format_rational(lower), format_rational(upper))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesTable {
    pub kind: SeriesKind,
    pub target: String,
    pub ring: String,
    pub coefficients: Vec<Coefficient>,
}

impl SeriesTable {
    /// All coefficients, if every one is exact.
    pub fn exact_coefficients(&self) -> Option<Vec<Rational>> {
        self.coefficients.iter().map(|c| c.exact().cloned()).collect()
    }
}

/// Coefficients `c_0 = 1`, `c_n = count over R_{n-1}` for `n < terms`.
pub fn series(
    target: Target<'_>,
    ring: &LocalRing,
    kind: SeriesKind,
    terms: usize,
    slack: u32,
) -> Result<SeriesTable, MeasureError> {
    let x = target.scheme();
    let mut coefficients = Vec::with_capacity(terms);
    if terms > 0 {
        coefficients.push(Coefficient::Exact(Rational::one()));
    }
    let mut tower = PointTower::new(x, ring);
    let mut sing_tower = match kind {
        SeriesKind::Q => Some(PointTower::new(&x.singular_locus()?, ring)),
        _ => None,
    };
    for n in 1..terms {
        let level = n as u32 - 1;
        let w = target.point_weight(&tower.ring(level));
        let coeff = match kind {
            SeriesKind::Tilde => Coefficient::Exact(target.count(&mut tower, level)?),
            SeriesKind::P | SeriesKind::Q => {
                let w = w?;
                let c = classify_lifts(&mut tower, level, slack)?;
                let (mut lo, mut hi) = (int(c.lower()), int(c.upper()));
                if let Some(st) = sing_tower.as_mut() {
                    let s = classify_lifts(st, level, slack)?;
                    // subtracting an interval swaps its ends
                    lo -= int(s.upper());
                    hi -= int(s.lower());
                }
                Coefficient::from_bounds(lo * &w, hi * w)
            }
        };
        coefficients.push(coeff);
    }
    Ok(SeriesTable { kind, target: target.name().to_string(), ring: ring.spec().to_string(), coefficients })
}

/// `numerator / denominator` in `T`, with denominator constant term 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalFunction {
    pub numerator: Vec<Rational>,
    pub denominator: Vec<Rational>,
}

impl RationalFunction {
    pub fn new(mut numerator: Vec<Rational>, mut denominator: Vec<Rational>) -> Self {
        trim(&mut numerator);
        trim(&mut denominator);
        RationalFunction { numerator, denominator }
    }

    /// First `n` Taylor coefficients at `T = 0`.
    pub fn taylor(&self, n: usize) -> Vec<Rational> {
        let mut c: Vec<Rational> = Vec::with_capacity(n);
        for k in 0..n {
            let mut v = self.numerator.get(k).cloned().unwrap_or_else(Rational::zero);
            for i in 1..self.denominator.len().min(k + 1) {
                v -= &self.denominator[i] * &c[k - i];
            }
            c.push(v / &self.denominator[0]);
        }
        c
    }
}

fn trim(v: &mut Vec<Rational>) {
    while v.len() > 1 && v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
    if v.is_empty() {
        v.push(Rational::zero());
    }
}

fn format_poly_t(coeffs: &[Rational]) -> String {
    let mut out = String::new();
    for (k, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let neg = c < &Rational::zero();
        let a = if neg { -c.clone() } else { c.clone() };
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mono = match k {
            0 => String::new(),
            1 => "T".into(),
            _ => format!("T^{k}"),
        };
        let coeff = if a.is_integer() { a.numer().to_string() } else { format!("({})", format_rational(&a)) };
        if k == 0 {
            out.push_str(&coeff);
        } else if a.is_one() {
            out.push_str(&mono);
        } else {
            out.push_str(&coeff);
            out.push_str(&mono);
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = format_poly_t(&self.numerator);
        let nterms = self.numerator.iter().filter(|c| !c.is_zero()).count();
        if self.denominator.len() == 1 && self.denominator[0].is_one() {
            return f.write_str(&num);
        }
        let den = format_poly_t(&self.denominator);
        if nterms > 1 {
            write!(f, "({num})/({den})")
        } else {
            write!(f, "{num}/({den})")
        }
    }
}

/// Coefficients withheld from fitting and used only for validation.
pub const HELD_OUT: usize = 2;

/// Smallest `P/Q` (by `deg P + deg Q`, then `deg Q`) matching the series:
/// `Q` is solved from the Hankel-type recurrence on all but the last
/// [`HELD_OUT`] coefficients, which must then be predicted exactly.
pub fn rational_fit(coeffs: &[Rational]) -> Result<RationalFunction, MeasureError> {
    let n = coeffs.len();
    if n < 4 {
        return Err(MeasureError::TooFewTerms { needed: 4, got: n });
    }
    let train = n - HELD_OUT;
    let max_order = (n - 2) / 2;
    for total in 0..train {
        for den_deg in 0..=total.min(max_order) {
            let num_deg = total - den_deg;
            // equations k in (num_deg, train); need one more than unknowns
            if train < num_deg + 1 + den_deg + 1 {
                continue;
            }
            let Some(q) = solve_recurrence(&coeffs[..train], num_deg, den_deg) else { continue };
            let p: Vec<Rational> =
                (0..=num_deg).map(|k| (0..=den_deg.min(k)).map(|i| &q[i] * &coeffs[k - i]).sum()).collect();
            let f = RationalFunction::new(p, q);
            if f.taylor(n) == coeffs {
                return Ok(f);
            }
        }
    }
    Err(MeasureError::NotFound { max_order, terms: n })
}

/// Denominator `1 + q_1 T + ... + q_L T^L` with `Σ_i q_i c_{k-i} = 0` for
/// `num_deg < k < c.len()`.
fn solve_recurrence(c: &[Rational], num_deg: usize, den_deg: usize) -> Option<Vec<Rational>> {
    let get = |k: isize| if k < 0 { Rational::zero() } else { c[k as usize].clone() };
    // rows: [c_{k-1} .. c_{k-L} | -c_k]
    let mut rows: Vec<Vec<Rational>> = (num_deg + 1..c.len())
        .map(|k| {
            let mut r: Vec<Rational> = (1..=den_deg).map(|i| get(k as isize - i as isize)).collect();
            r.push(-get(k as isize));
            r
        })
        .collect();
    let l = den_deg;
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for col in 0..l {
        let Some(r) = (pivot_row..rows.len()).find(|&r| !rows[r][col].is_zero()) else { continue };
        rows.swap(pivot_row, r);
        let inv = Rational::one() / &rows[pivot_row][col];
        for v in rows[pivot_row].iter_mut() {
            *v *= &inv;
        }
        let pivot = rows[pivot_row].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != pivot_row && !row[col].is_zero() {
                let factor = row[col].clone();
                for (x, y) in row.iter_mut().zip(&pivot).take(l + 1) {
                    *x -= &factor * y;
                }
            }
        }
        pivots.push(col);
        pivot_row += 1;
    }
    if rows[pivot_row..].iter().any(|r| !r[l].is_zero()) {
        return None;
    }
    let mut q = vec![Rational::zero(); l + 1];
    q[0] = Rational::one();
    for (r, &col) in pivots.iter().enumerate() {
        q[col + 1] = rows[r][l].clone();
    }
    Some(q)
}

/// Points of the level-`n` image in enumeration order.
pub fn tau_image_points(x: &AffineScheme, ring: &LocalRing, n: u32, slack: u32) -> Result<Vec<Point>, MeasureError> {
    let mut tower = PointTower::new(x, ring);
    Ok(classify_lifts(&mut tower, n, slack)?.liftable)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::ring::RingSpec;
    use crate::stacks::{SpecialAction, SpecialGroup};

    fn zp(p: u64, n: u32) -> LocalRing {
        LocalRing::new(RingSpec::unramified(p, n)).unwrap()
    }

    #[test]
    fn tau_image_examples() {
        let a1 = AffineScheme::affine_space(1);
        assert_eq!(tau_image_count(&a1, &zp(3, 0), 2, 2).unwrap().exact(), Some(27));
        let xy3 = AffineScheme::parse("xy3", &["x", "y"], &["x*y - 3"], 1).unwrap();
        assert_eq!(tau_image_count(&xy3, &zp(3, 0), 1, 2).unwrap().exact(), Some(12));
        let x23 = AffineScheme::parse("x23", &["x"], &["x^2 - 3"], 0).unwrap();
        assert_eq!(tau_image_count(&x23, &zp(3, 0), 0, 2).unwrap().exact(), Some(0));
        let r = zp(3, 2);
        assert_eq!(tau(&r, &[r.from_int(22)], 1).unwrap(), vec![zp(3, 1).from_int(4)]);
        assert!(tau(&zp(3, 0), &[zp(3, 0).one()], 1).is_err());
    }

    #[test]
    fn measure_examples() {
        let a1 = AffineScheme::affine_space(1);
        let m = padic_measure(Target::Scheme(&a1), &zp(3, 0), 4).unwrap();
        assert!(m.is_stabilized());
        assert_eq!((m.value.clone(), m.stable_from), (int(1), Some(0)));
        let xy3 = AffineScheme::parse("xy3", &["x", "y"], &["x*y - 3"], 1).unwrap();
        let m = padic_measure(Target::Scheme(&xy3), &zp(3, 0), 4).unwrap();
        assert_eq!((m.value.clone(), m.stable_from), (ratio(4, 3), Some(1)));
        let pt = AffineScheme::affine_space(0);
        let stack =
            QuotientStack::new("BGm", GroupAction::Special(SpecialAction::trivial(SpecialGroup::Multiplicative, pt)));
        assert_eq!(stack.dim(), -1);
        let m = padic_measure(Target::Stack(&stack), &zp(3, 0), 3).unwrap();
        assert_eq!(m.value, ratio(1, 2));
        assert!(m.levels.iter().all(|l| l.normalized_lower == ratio(1, 2)));
    }

    #[test]
    fn partial_when_not_stable() {
        let x = AffineScheme::parse("x2", &["x"], &["x^2"], 0).unwrap();
        let m = padic_measure(Target::Scheme(&x), &zp(3, 0), 2).unwrap();
        assert_eq!(m.status, MeasureStatus::Partial);
        assert_eq!(m.levels.len(), 3);
    }

    #[test]
    fn tilde_series_examples() {
        let a2 = AffineScheme::affine_space(2);
        let s = series(Target::Scheme(&a2), &zp(3, 0), SeriesKind::Tilde, 4, 2).unwrap();
        assert_eq!(s.exact_coefficients().unwrap(), vec![int(1), int(9), int(81), int(729)]);
        let conic = AffineScheme::parse("conic", &["x", "y"], &["x^2 + y^2 - 1"], 1).unwrap();
        let s = series(Target::Scheme(&conic), &zp(5, 0), SeriesKind::Tilde, 4, 2).unwrap();
        assert_eq!(s.exact_coefficients().unwrap(), vec![int(1), int(4), int(20), int(100)]);
    }

    #[test]
    fn fits_geometric_and_shifted_series() {
        let c: Vec<Rational> = (0..8).map(|k| int(3u64.pow(k))).collect();
        let f = rational_fit(&c).unwrap();
        assert_eq!(f.to_string(), "1/(1 - 3T)");
        let mut c = vec![int(1)];
        c.extend((0..7).map(|k| int(4 * 5u64.pow(k))));
        let f = rational_fit(&c).unwrap();
        assert_eq!(f, RationalFunction::new(vec![int(1), int(-1)], vec![int(1), int(-5)]));
        assert_eq!(f.to_string(), "(1 - T)/(1 - 5T)");
        let mut c = vec![int(1)];
        c.extend((0..7).map(|k| ratio(1, 4 * 5u64.pow(k))));
        let f = rational_fit(&c).unwrap();
        assert_eq!(f.denominator, vec![int(1), ratio(-1, 5)]);
    }

    #[test]
    fn fit_rejects_short_or_irregular_input() {
        assert!(matches!(rational_fit(&[int(1), int(2)]), Err(MeasureError::TooFewTerms { .. })));
        let c: Vec<Rational> = [1, 1, 2, 3, 5, 8, 13, 21, 34, 55].iter().map(|&v| int(v)).collect();
        assert_eq!(rational_fit(&c).unwrap().denominator, vec![int(1), int(-1), int(-1)]);
        // factorials satisfy no linear recurrence with constant coefficients
        let c: Vec<Rational> = [1u64, 1, 2, 6, 24, 120, 720, 5040].iter().map(|&v| int(v)).collect();
        assert!(matches!(rational_fit(&c), Err(MeasureError::NotFound { .. })));
    }
}
