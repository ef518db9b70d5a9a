//! Affine schemes over Z: point enumeration over truncated rings, Jacobians,
//! singular loci and Hensel lifting certificates.

use crate::fp_search::FpSearch;
use crate::poly::{CompiledPoly, MultiPoly};
use crate::ring::{Elem, LocalRing, RingError, Valuation};
use crate::syntax::ParseError;
use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use std::collections::HashSet;

/// Default cap on the number of candidate tuples examined per level.
pub const DEFAULT_SEARCH_BOUND: u64 = 100_000_000;

pub type Point = Vec<Elem>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SchemeError {
    #[error("in '{context}': {source}")]
    Parse { context: String, source: ParseError },
    #[error("declared dimension {dim} outside 0..={nvars}")]
    DimensionOutOfRange { dim: i64, nvars: usize },
    #[error("codimension {codim} exceeds the number of generators ({generators})")]
    InconsistentDimension { codim: usize, generators: usize },
    #[error("polynomial has {got} variables, scheme has {expected}")]
    VariableMismatch { expected: usize, got: usize },
    #[error("duplicate variable '{0}'")]
    DuplicateVariable(String),
    #[error("search would examine {candidates} candidates, above the bound {bound}")]
    BoundExceeded { candidates: u128, bound: u64 },
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// Affine scheme `Spec Z[vars]/(generators)` with a declared relative dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineScheme {
    name: String,
    vars: Vec<String>,
    generators: Vec<MultiPoly>,
    dim: i64,
}

impl AffineScheme {
    pub fn new(
        name: impl Into<String>,
        vars: Vec<String>,
        generators: Vec<MultiPoly>,
        dim: i64,
    ) -> Result<Self, SchemeError> {
        let n = vars.len();
        if dim < 0 || dim > n as i64 {
            return Err(SchemeError::DimensionOutOfRange { dim, nvars: n });
        }
        if let Some(dup) = vars.iter().duplicates().next() {
            return Err(SchemeError::DuplicateVariable(dup.clone()));
        }
        for g in &generators {
            if g.nvars() != n {
                return Err(SchemeError::VariableMismatch { expected: n, got: g.nvars() });
            }
        }
        Ok(AffineScheme { name: name.into(), vars, generators, dim })
    }

    pub fn parse(name: &str, vars: &[&str], equations: &[&str], dim: i64) -> Result<Self, SchemeError> {
        let vars: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        let gens = equations
            .iter()
            .map(|eq| {
                MultiPoly::parse(eq, &vars).map_err(|source| SchemeError::Parse { context: eq.to_string(), source })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(name, vars, gens, dim)
    }

    pub fn affine_space(n: usize) -> Self {
        let vars = (0..n).map(|i| format!("x{i}")).collect();
        AffineScheme { name: format!("A{n}"), vars, generators: Vec::new(), dim: n as i64 }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn generators(&self) -> &[MultiPoly] {
        &self.generators
    }

    pub fn dim(&self) -> i64 {
        self.dim
    }

    pub fn codim(&self) -> usize {
        self.nvars() - self.dim as usize
    }

    pub fn with_generators(&self, name: impl Into<String>, generators: Vec<MultiPoly>) -> Self {
        AffineScheme { name: name.into(), vars: self.vars.clone(), generators, dim: self.dim }
    }

    /// Entry `(i, j)` is the derivative of generator `i` by variable `j`.
    pub fn jacobian(&self) -> Vec<Vec<MultiPoly>> {
        self.generators.iter().map(|g| (0..self.nvars()).map(|j| g.derivative(j)).collect()).collect()
    }

    /// All `c × c` minors of the Jacobian with `c` the codimension; zero minors are dropped.
    pub fn jacobian_minors(&self) -> Result<Vec<MultiPoly>, SchemeError> {
        let c = self.codim();
        if c > self.generators.len() {
            return Err(SchemeError::InconsistentDimension { codim: c, generators: self.generators.len() });
        }
        let jac = self.jacobian();
        let n = self.nvars();
        let mut minors = Vec::new();
        for rows in (0..jac.len()).combinations(c) {
            for cols in (0..n).combinations(c) {
                let m: Vec<Vec<MultiPoly>> =
                    rows.iter().map(|&r| cols.iter().map(|&k| jac[r][k].clone()).collect()).collect();
                let d = determinant(&m, n);
                if !d.is_zero() && !minors.contains(&d) {
                    minors.push(d);
                }
            }
        }
        Ok(minors)
    }

    /// Scheme cut out by the generators together with the Jacobian minors.
    pub fn singular_locus(&self) -> Result<AffineScheme, SchemeError> {
        let mut gens = self.generators.clone();
        for m in self.jacobian_minors()? {
            if !gens.contains(&m) {
                gens.push(m);
            }
        }
        Ok(self.with_generators(format!("{}_sing", self.name), gens))
    }

    pub fn format_generators(&self) -> Vec<String> {
        self.generators.iter().map(|g| g.format(&self.vars)).collect()
    }

    pub fn contains(&self, ring: &LocalRing, point: &[Elem]) -> bool {
        self.generators.iter().all(|g| ring.is_zero(&g.compile(ring).eval(point)))
    }

    /// Rank of the Jacobian at a point over the residue field.
    pub fn jacobian_rank(&self, field: &LocalRing, point: &[Elem]) -> usize {
        let rows: Vec<Vec<Elem>> =
            self.jacobian().iter().map(|row| row.iter().map(|d| d.compile(field).eval(point)).collect()).collect();
        field_rank(field, rows)
    }
}

fn determinant(m: &[Vec<MultiPoly>], nvars: usize) -> MultiPoly {
    match m.len() {
        0 => MultiPoly::one(nvars),
        1 => m[0][0].clone(),
        k => {
            let mut acc = MultiPoly::zero(nvars);
            for col in 0..k {
                if m[0][col].is_zero() {
                    continue;
                }
                let sub: Vec<Vec<MultiPoly>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|&(j, _)| j != col).map(|(_, x)| x.clone()).collect())
                    .collect();
                let term = m[0][col].mul(&determinant(&sub, nvars));
                acc = if col % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
            }
            acc
        }
    }
}

/// Row rank over a finite field given as a level-0 ring.
fn field_rank(field: &LocalRing, mut rows: Vec<Vec<Elem>>) -> usize {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..rows.len()).find(|&r| !field.is_zero(&rows[r][col])) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = field.inverse(&rows[rank][col]).expect("nonzero field element");
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && !field.is_zero(&row[col]) {
                let factor = field.mul(&row[col], &inv);
                for (x, y) in row.iter_mut().zip(&pivot).take(ncols).skip(col) {
                    *x = field.sub(x, &field.mul(&factor, y));
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Generators compiled for one ring, grouped by the last variable they need.
struct LevelEvaluator {
    ring: LocalRing,
    /// `checks[i]` lists generators fully determined once variable `i` is set.
    checks: Vec<Vec<CompiledPoly>>,
    /// A constant generator that is nonzero in this ring empties the scheme.
    empty: bool,
    /// Faster search used when the ring is a prime field.
    prime_field: Option<FpSearch>,
}

impl LevelEvaluator {
    fn new(scheme: &AffineScheme, ring: &LocalRing) -> Self {
        let n = scheme.nvars();
        let mut checks: Vec<Vec<CompiledPoly>> = vec![Vec::new(); n];
        let mut empty = false;
        for g in &scheme.generators {
            let c = g.compile(ring);
            match c.max_var() {
                Some(i) => checks[i].push(c),
                None => {
                    if !c.is_zero() {
                        empty = true;
                    }
                }
            }
        }
        let prime_field =
            (ring.level() == 0 && ring.residue_degree() == 1).then(|| FpSearch::new(ring.p(), n, &scheme.generators));
        LevelEvaluator { ring: ring.clone(), checks, empty, prime_field }
    }

    fn passes(&self, i: usize, point: &[Elem]) -> bool {
        self.checks[i].iter().all(|c| self.ring.is_zero(&c.eval(point)))
    }

    /// Visits every `base + (c_0, ..., c_{N-1})`, `c_i ∈ offsets`, that satisfies all generators.
    fn search(&self, base: &[Elem], offsets: &[Elem], visit: &mut dyn FnMut(&[Elem])) {
        if self.empty {
            return;
        }
        if let Some(fp) = &self.prime_field {
            // at level 0 the base point is zero and the offsets are all of F_p
            let mut point: Vec<Elem> = Vec::with_capacity(base.len());
            fp.search(&mut |xs| {
                point.clear();
                point.extend(xs.iter().map(|&x| self.ring.from_int(x as i64)));
                visit(&point);
            });
            return;
        }
        let n = base.len();
        if n == 0 {
            visit(&[]);
            return;
        }
        let mut current: Vec<Elem> = base.to_vec();
        self.dfs(0, base, offsets, &mut current, visit);
    }

    fn dfs(&self, i: usize, base: &[Elem], offsets: &[Elem], current: &mut Vec<Elem>, visit: &mut dyn FnMut(&[Elem])) {
        for off in offsets {
            current[i] = self.ring.add(&base[i], off);
            if !self.passes(i, current) {
                continue;
            }
            if i + 1 == base.len() {
                visit(current);
            } else {
                self.dfs(i + 1, base, offsets, current, visit);
            }
        }
    }
}

/// The elements `ω^k · [d]` for all residue digits `d`: the kernel of `R_k -> R_{k-1}`.
fn kernel_offsets(ring: &LocalRing) -> Vec<Elem> {
    let k = ring.level();
    let pi_k = ring.omega_power(k);
    (0..ring.q()).map(|d| ring.mul(&pi_k, &ring.residue_element(d))).collect()
}

/// Points of a scheme over `R_0, R_1, ...`, computed level by level by lifting.
pub struct PointTower {
    scheme: AffineScheme,
    rings: Vec<LocalRing>,
    levels: Vec<Vec<Point>>,
    bound: u64,
}

impl PointTower {
    /// `ring` fixes the prime, ramification and residue field; its level is ignored.
    pub fn new(scheme: &AffineScheme, ring: &LocalRing) -> Self {
        Self::with_bound(scheme, ring, DEFAULT_SEARCH_BOUND)
    }

    pub fn with_bound(scheme: &AffineScheme, ring: &LocalRing, bound: u64) -> Self {
        PointTower { scheme: scheme.clone(), rings: vec![ring.at_level(0)], levels: Vec::new(), bound }
    }

    pub fn scheme(&self) -> &AffineScheme {
        &self.scheme
    }

    pub fn ring(&self, level: u32) -> LocalRing {
        self.rings.get(level as usize).cloned().unwrap_or_else(|| self.rings[0].at_level(level))
    }

    fn candidates(&self, level: u32) -> u128 {
        let q = self.rings[0].q() as u128;
        let n = self.scheme.nvars() as u32;
        let base = if level == 0 { 1 } else { self.levels[level as usize - 1].len() as u128 };
        base.saturating_mul(q.saturating_pow(n))
    }

    fn check_bound(&self, level: u32) -> Result<(), SchemeError> {
        let c = self.candidates(level);
        if c > self.bound as u128 {
            return Err(SchemeError::BoundExceeded { candidates: c, bound: self.bound });
        }
        Ok(())
    }

    fn next_level(&self) -> Result<Vec<Point>, SchemeError> {
        let k = self.levels.len() as u32;
        self.check_bound(k)?;
        let ring = self.rings[k as usize].clone();
        let eval = LevelEvaluator::new(&self.scheme, &ring);
        let offsets = kernel_offsets(&ring);
        let mut pts: Vec<Point> = if k == 0 {
            let zero = vec![ring.zero(); self.scheme.nvars()];
            let mut out = Vec::new();
            eval.search(&zero, &offsets, &mut |p| out.push(p.to_vec()));
            out
        } else {
            let prev_ring = &self.rings[k as usize - 1];
            self.levels[k as usize - 1]
                .par_iter()
                .flat_map_iter(|base| {
                    let lifted: Point = base.iter().map(|x| ring.lift_digits(x, prev_ring)).collect();
                    let mut out = Vec::new();
                    eval.search(&lifted, &offsets, &mut |p| out.push(p.to_vec()));
                    out
                })
                .collect()
        };
        pts.sort_by_cached_key(|p| point_key(&ring, p));
        Ok(pts)
    }

    fn ensure_rings(&mut self, level: u32) {
        while self.rings.len() <= level as usize {
            let l = self.rings.len() as u32;
            self.rings.push(self.rings[0].at_level(l));
        }
    }

    /// Ensures all levels up to `level` are computed.
    pub fn ensure(&mut self, level: u32) -> Result<(), SchemeError> {
        self.ensure_rings(level);
        while self.levels.len() <= level as usize {
            let pts = self.next_level()?;
            self.levels.push(pts);
        }
        Ok(())
    }

    /// `X(R_level)` in deterministic order.
    pub fn points(&mut self, level: u32) -> Result<&[Point], SchemeError> {
        self.ensure(level)?;
        Ok(&self.levels[level as usize])
    }

    pub fn count(&mut self, level: u32) -> Result<u128, SchemeError> {
        if level > 0 && self.levels.len() == level as usize {
            // count the top level without materialising it
            self.ensure(level - 1)?;
            self.ensure_rings(level);
            self.check_bound(level)?;
            let ring = self.rings[level as usize].clone();
            let prev_ring = self.rings[level as usize - 1].clone();
            let eval = LevelEvaluator::new(&self.scheme, &ring);
            let offsets = kernel_offsets(&ring);
            let total: u128 = self.levels[level as usize - 1]
                .par_iter()
                .map(|base| {
                    let lifted: Point = base.iter().map(|x| ring.lift_digits(x, &prev_ring)).collect();
                    let mut c = 0u128;
                    eval.search(&lifted, &offsets, &mut |_| c += 1);
                    c
                })
                .sum();
            return Ok(total);
        }
        Ok(self.points(level)?.len() as u128)
    }

    /// Points of `X(R_level)` reducing to `point` in `X(R_from)`.
    pub fn lifts(&mut self, point: &[Elem], from: u32, level: u32) -> Result<Vec<Point>, SchemeError> {
        assert!(from <= level);
        self.ensure(from)?;
        let mut frontier = vec![point.to_vec()];
        for k in from + 1..=level {
            self.ensure_rings(k);
            let ring = self.rings[k as usize].clone();
            let prev = self.rings[k as usize - 1].clone();
            let eval = LevelEvaluator::new(&self.scheme, &ring);
            let offsets = kernel_offsets(&ring);
            let mut next = Vec::new();
            for base in &frontier {
                let lifted: Point = base.iter().map(|x| ring.lift_digits(x, &prev)).collect();
                eval.search(&lifted, &offsets, &mut |p| next.push(p.to_vec()));
            }
            frontier = next;
        }
        Ok(frontier)
    }
}

/// Sort key realising lexicographic order on coordinate enumeration indices.
pub fn point_key(ring: &LocalRing, p: &[Elem]) -> Vec<u128> {
    p.iter().map(|x| ring.index_of(x)).collect()
}

pub fn reduce_point(from: &LocalRing, to: &LocalRing, p: &[Elem]) -> Result<Point, RingError> {
    p.iter().map(|x| from.reduce(x, to)).collect()
}

pub fn count_points(scheme: &AffineScheme, ring: &LocalRing) -> Result<u128, SchemeError> {
    count_points_bounded(scheme, ring, DEFAULT_SEARCH_BOUND)
}

pub fn count_points_bounded(scheme: &AffineScheme, ring: &LocalRing, bound: u64) -> Result<u128, SchemeError> {
    PointTower::with_bound(scheme, ring, bound).count(ring.level())
}

/// Streams the points over a residue field (a level-0 ring) without storing them.
pub fn visit_field_points(
    scheme: &AffineScheme,
    field: &LocalRing,
    visit: &mut dyn FnMut(&[Elem]),
) -> Result<(), SchemeError> {
    let field = field.at_level(0);
    let candidates = (field.q() as u128).saturating_pow(scheme.nvars() as u32);
    if candidates > DEFAULT_SEARCH_BOUND as u128 {
        return Err(SchemeError::BoundExceeded { candidates, bound: DEFAULT_SEARCH_BOUND });
    }
    let eval = LevelEvaluator::new(scheme, &field);
    let zero = vec![field.zero(); scheme.nvars()];
    eval.search(&zero, &kernel_offsets(&field), visit);
    Ok(())
}

pub fn enumerate_points(scheme: &AffineScheme, ring: &LocalRing) -> Result<Vec<Point>, SchemeError> {
    let mut tower = PointTower::new(scheme, ring);
    Ok(tower.points(ring.level())?.to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HenselVerdict {
    CertifiedLiftable,
    CertifiedNot,
    Unknown,
}

impl std::fmt::Display for HenselVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            HenselVerdict::CertifiedLiftable => "CERTIFIED_LIFTABLE",
            HenselVerdict::CertifiedNot => "CERTIFIED_NOT",
            HenselVerdict::Unknown => "UNKNOWN",
        })
    }
}

pub const DEFAULT_SLACK: u32 = 2;

/// Lift certificates for points of one scheme.
pub struct LiftCertifier {
    minors: Option<Vec<MultiPoly>>,
    generators: Vec<MultiPoly>,
}

impl LiftCertifier {
    pub fn new(scheme: &AffineScheme) -> Self {
        // Newton's criterion needs exactly as many equations as the codimension
        let minors = (scheme.generators.len() == scheme.codim()).then(|| scheme.jacobian_minors().ok()).flatten();
        LiftCertifier { minors, generators: scheme.generators.clone() }
    }

    /// Newton–Hensel: a point `y ∈ X(R_level)` lifts to `X(R)` with the same
    /// image in `R_base` when some minor `δ` has `2 ord δ < level + 1` and
    /// `ord δ ≤ level - base`.
    pub fn newton(&self, ring: &LocalRing, y: &[Elem], base: u32) -> bool {
        let Some(minors) = &self.minors else { return false };
        let level = ring.level();
        minors.iter().any(|m| match ring.valuation(&m.compile(ring).eval(y)) {
            Valuation::Finite(v) => 2 * v < level + 1 && v + base <= level,
            Valuation::Infinity => false,
        })
    }

    /// The integer representative (canonical or balanced) is an exact root over Z.
    pub fn exact_root(&self, ring: &LocalRing, y: &[Elem]) -> bool {
        if !ring.is_unramified() || ring.residue_degree() != 1 {
            return false;
        }
        let modulus = BigInt::from(ring.size() as u64);
        let half = &modulus / 2;
        let canonical: Vec<BigInt> = y.iter().map(|x| BigInt::from(ring.integer_value(x).unwrap())).collect();
        let balanced: Vec<BigInt> =
            canonical.iter().map(|v| if v > &half { v - &modulus } else { v.clone() }).collect();
        [canonical, balanced].iter().any(|pt| self.generators.iter().all(|g| g.eval_int(pt).is_zero()))
    }

    pub fn certifies(&self, ring: &LocalRing, y: &[Elem], base: u32) -> bool {
        self.newton(ring, y, base) || self.exact_root(ring, y)
    }
}

/// Newton–Hensel verdict for a point of `X(R_n)`, searching lifts up to level `n + slack`.
pub fn hensel_liftable(
    scheme: &AffineScheme,
    ring: &LocalRing,
    point: &[Elem],
    slack: u32,
) -> Result<HenselVerdict, SchemeError> {
    if !scheme.contains(ring, point) {
        return Ok(HenselVerdict::CertifiedNot);
    }
    let cert = LiftCertifier::new(scheme);
    let n = ring.level();
    let mut tower = PointTower::new(scheme, ring);
    for level in n..=n + slack {
        let lifts = tower.lifts(point, n, level)?;
        if lifts.is_empty() {
            return Ok(HenselVerdict::CertifiedNot);
        }
        let r = ring.at_level(level);
        if lifts.iter().any(|y| cert.newton(&r, y, n)) {
            return Ok(HenselVerdict::CertifiedLiftable);
        }
    }
    Ok(HenselVerdict::Unknown)
}

/// Image of `X(R_{n+slack}) -> X(R_n)` together with its certified part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftClassification {
    /// Points of `X(R_n)` with a lift to level `n + slack`.
    pub liftable: Vec<Point>,
    /// Subset of `liftable` certified to come from `X(R)`.
    pub certified: HashSet<Point>,
}

impl LiftClassification {
    pub fn upper(&self) -> u128 {
        self.liftable.len() as u128
    }

    pub fn lower(&self) -> u128 {
        self.certified.len() as u128
    }

    pub fn unknown(&self) -> u128 {
        self.upper() - self.lower()
    }
}

pub fn classify_lifts(tower: &mut PointTower, n: u32, slack: u32) -> Result<LiftClassification, SchemeError> {
    tower.ensure(n + slack)?;
    let base_ring = tower.ring(n);
    let cert = LiftCertifier::new(tower.scheme());
    let mut liftable: HashSet<Point> = HashSet::new();
    let mut certified: HashSet<Point> = HashSet::new();
    for level in n..=n + slack {
        let ring = tower.ring(level);
        let pts = &tower.levels[level as usize];
        let marks: Vec<(Point, bool)> = pts
            .par_iter()
            .map(|y| {
                let base = reduce_point(&ring, &base_ring, y).expect("levels are compatible");
                let ok = cert.certifies(&ring, y, n);
                (base, ok)
            })
            .collect();
        for (base, ok) in marks {
            if level == n + slack {
                liftable.insert(base.clone());
            }
            if ok {
                certified.insert(base);
            }
        }
    }
    certified.retain(|p| liftable.contains(p));
    let mut liftable: Vec<Point> = liftable.into_iter().collect();
    liftable.sort_by_cached_key(|p| point_key(&base_ring, p));
    Ok(LiftClassification { liftable, certified })
}
