//! Quotient stacks `[X/G]` for finite groups and for the special groups
//! G_a, G_m, GL_k, with groupoid-weighted point counts.

use crate::poly::{CompiledPoly, MultiPoly};
use crate::rational::{int, ratio, Rational};
use crate::ring::{Elem, FiniteField, LocalRing, RingError};
use crate::scheme::{enumerate_points, point_key, visit_field_points, AffineScheme, Point, PointTower, SchemeError};
use num_integer::Integer;
use num_traits::Zero;
use std::collections::{BTreeMap, HashMap, HashSet};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StackError {
    #[error("invalid group table: {0}")]
    GroupTable(String),
    #[error("invalid action: {0}")]
    Action(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("automorphism group order must be positive")]
    ZeroAutomorphismOrder,
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// A finite group given by its multiplication table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    name: String,
    labels: Vec<String>,
    table: Vec<Vec<usize>>,
    identity: usize,
    inverses: Vec<usize>,
}

impl FiniteGroup {
    /// `table[a][b]` is the index of `a·b`. Group axioms are checked exhaustively.
    pub fn from_table(
        name: impl Into<String>,
        labels: Vec<String>,
        table: Vec<Vec<usize>>,
    ) -> Result<Self, StackError> {
        let n = labels.len();
        if n == 0 {
            return Err(StackError::GroupTable("empty group".into()));
        }
        if table.len() != n || table.iter().any(|row| row.len() != n) {
            return Err(StackError::GroupTable(format!("table must be {n}×{n}")));
        }
        if table.iter().flatten().any(|&x| x >= n) {
            return Err(StackError::GroupTable("entry out of range".into()));
        }
        if labels.iter().collect::<HashSet<_>>().len() != n {
            return Err(StackError::GroupTable("duplicate labels".into()));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
            .ok_or_else(|| StackError::GroupTable("no identity element".into()))?;
        let mut inverses = Vec::with_capacity(n);
        for a in 0..n {
            let inv = (0..n)
                .find(|&b| table[a][b] == identity && table[b][a] == identity)
                .ok_or_else(|| StackError::GroupTable(format!("'{}' has no inverse", labels[a])))?;
            inverses.push(inv);
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(StackError::GroupTable(format!(
                            "not associative at ({}, {}, {})",
                            labels[a], labels[b], labels[c]
                        )));
                    }
                }
            }
        }
        Ok(FiniteGroup { name: name.into(), labels, table, identity, inverses })
    }

    pub fn trivial() -> Self {
        Self::cyclic(1)
    }

    pub fn cyclic(n: usize) -> Self {
        let labels = (0..n).map(|i| i.to_string()).collect();
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::from_table(format!("Z/{n}"), labels, table).expect("cyclic group table")
    }

    pub fn klein() -> Self {
        let labels = ["e", "a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let table = (0..4).map(|a| (0..4).map(|b| a ^ b).collect()).collect();
        Self::from_table("V4", labels, table).expect("Klein table")
    }

    /// Permutations of `1..=n` in lexicographic order of their one-line notation.
    pub fn symmetric(n: usize) -> Self {
        use itertools::Itertools;
        let perms: Vec<Vec<usize>> = (0..n).permutations(n).collect();
        let index: HashMap<Vec<usize>, usize> = perms.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let labels = perms.iter().map(|p| p.iter().map(|i| (i + 1).to_string()).collect::<String>()).collect();
        // (a·b)(i) = a(b(i))
        let table = perms
            .iter()
            .map(|a| perms.iter().map(|b| index[&(0..n).map(|i| a[b[i]]).collect::<Vec<_>>()]).collect())
            .collect();
        Self::from_table(format!("S{n}"), labels, table).expect("symmetric group table")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverses[a]
    }

    pub fn conjugate(&self, h: usize, g: usize) -> usize {
        self.mul(self.mul(h, g), self.inv(h))
    }

    pub fn element_order(&self, g: usize) -> u32 {
        let mut x = g;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    /// Least common multiple of the element orders.
    pub fn exponent(&self) -> u32 {
        (0..self.order()).map(|g| self.element_order(g)).fold(1, |a, b| a.lcm(&b))
    }

    pub fn centralizer_order(&self, g: usize) -> usize {
        (0..self.order()).filter(|&h| self.mul(h, g) == self.mul(g, h)).count()
    }

    pub fn conjugacy_classes(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.order()];
        let mut classes = Vec::new();
        for g in 0..self.order() {
            if seen[g] {
                continue;
            }
            let mut class: Vec<usize> = (0..self.order()).map(|h| self.conjugate(h, g)).collect();
            class.sort_unstable();
            class.dedup();
            for &c in &class {
                seen[c] = true;
            }
            classes.push(class);
        }
        classes
    }
}

/// A finite group acting on an affine scheme by polynomial substitutions.
#[derive(Debug, Clone)]
pub struct FiniteAction {
    group: FiniteGroup,
    scheme: AffineScheme,
    /// `subs[g][i]` is coordinate `i` of `g·x`.
    subs: Vec<Vec<MultiPoly>>,
}

impl FiniteAction {
    pub fn new(group: FiniteGroup, scheme: AffineScheme, subs: Vec<Vec<MultiPoly>>) -> Result<Self, StackError> {
        if subs.len() != group.order() {
            return Err(StackError::Action(format!("expected {} substitutions, got {}", group.order(), subs.len())));
        }
        let n = scheme.nvars();
        for (g, s) in subs.iter().enumerate() {
            if s.len() != n || s.iter().any(|f| f.nvars() != n) {
                return Err(StackError::Action(format!(
                    "substitution for '{}' must give {n} polynomials in {n} variables",
                    group.labels[g]
                )));
            }
        }
        Ok(FiniteAction { group, scheme, subs })
    }

    /// Every element acts as the identity.
    pub fn trivial(group: FiniteGroup, scheme: AffineScheme) -> Self {
        let n = scheme.nvars();
        let id: Vec<MultiPoly> = (0..n).map(|i| MultiPoly::var(n, i)).collect();
        let subs = vec![id; group.order()];
        FiniteAction { group, scheme, subs }
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn scheme(&self) -> &AffineScheme {
        &self.scheme
    }

    pub fn act(&self, g: usize, ring: &LocalRing, x: &[Elem]) -> Point {
        self.subs[g].iter().map(|f| f.compile(ring).eval(x)).collect()
    }

    /// The substitutions compiled for repeated use over one ring.
    fn on_ring(&self, ring: &LocalRing) -> CompiledAction {
        CompiledAction(self.subs.iter().map(|s| s.iter().map(|f| f.compile(ring)).collect()).collect())
    }

    /// Checks identity, compatibility `g·(h·x) = (gh)·x` and stability of X on `X(ring)`.
    pub fn validate(&self, ring: &LocalRing) -> Result<(), StackError> {
        let pts = enumerate_points(&self.scheme, ring)?;
        let g = &self.group;
        let act = self.on_ring(ring);
        for x in &pts {
            if act.apply(g.identity(), x) != *x {
                return Err(StackError::Action("identity does not act trivially".into()));
            }
            let images: Vec<Point> = (0..g.order()).map(|a| act.apply(a, x)).collect();
            for (a, y) in images.iter().enumerate() {
                if !self.scheme.contains(ring, y) {
                    return Err(StackError::Action(format!("'{}' does not preserve the scheme", g.labels[a])));
                }
                for b in 0..g.order() {
                    if act.apply(b, y) != images[g.mul(b, a)] {
                        return Err(StackError::Action(format!(
                            "'{}'·('{}'·x) differs from ('{}''{}')·x",
                            g.labels[b], g.labels[a], g.labels[b], g.labels[a]
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

struct CompiledAction(Vec<Vec<CompiledPoly>>);

impl CompiledAction {
    fn apply(&self, g: usize, x: &[Elem]) -> Point {
        self.0[g].iter().map(|f| f.eval(x)).collect()
    }
}

fn frobenius_q(field: &FiniteField, base_degree: u32, x: &[Elem]) -> Point {
    x.iter().map(|c| field.frobenius_power(c, base_degree)).collect()
}

/// `(1/|G|) Σ_g #{x ∈ X(F_{q^{ord g}}) : Frob_q(x) = g^{-1}·x}`.
pub fn stacky_count_finite(action: &FiniteAction, field: &FiniteField) -> Result<Rational, StackError> {
    action.validate(field.ring())?;
    let tp = twisted_pairs(action, field)?;
    Ok(ratio(tp.pairs.len() as u64, action.group.order() as u64))
}

/// An isomorphism class of objects of a quotient groupoid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orbit {
    /// Twisting group element of the class (identity for trivial torsors).
    pub sector: usize,
    pub representative: Point,
    pub size: usize,
    pub stabilizer_order: u64,
}

impl Orbit {
    pub fn mass(&self) -> Rational {
        ratio(1, self.stabilizer_order)
    }
}

/// `Σ 1/|Aut(x)|` over the given automorphism orders.
pub fn weighted_subset_count(aut_orders: &[u64]) -> Result<Rational, StackError> {
    let mut acc = Rational::zero();
    for &a in aut_orders {
        if a == 0 {
            return Err(StackError::ZeroAutomorphismOrder);
        }
        acc += ratio(1, a);
    }
    Ok(acc)
}

pub fn groupoid_cardinality(orbits: &[Orbit]) -> Rational {
    orbits.iter().map(Orbit::mass).sum()
}

struct TwistedPairs {
    /// The action over `F_{q^m}` for each element order `m`.
    actions: HashMap<u32, CompiledAction>,
    pairs: Vec<(usize, Point)>,
    index: HashMap<(usize, Point), usize>,
}

impl TwistedPairs {
    fn action(&self, group: &FiniteGroup, g: usize) -> &CompiledAction {
        &self.actions[&group.element_order(g)]
    }
}

/// Pairs `(g, x)` with `x ∈ X(F_{q^{ord g}})` and `Frob_q x = g^{-1} x`.
/// Conjugation preserves `ord g`, so each sector lives in one field.
fn twisted_pairs(action: &FiniteAction, field: &FiniteField) -> Result<TwistedPairs, StackError> {
    let g = &action.group;
    let mut actions = HashMap::new();
    let mut by_order: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for a in 0..g.order() {
        by_order.entry(g.element_order(a)).or_default().push(a);
    }
    let mut pairs = Vec::new();
    for (m, elems) in by_order {
        let ext = field.extension(m)?;
        let act = action.on_ring(ext.ring());
        visit_field_points(&action.scheme, ext.ring(), &mut |x| {
            let frob = frobenius_q(&ext, field.degree(), x);
            for &a in &elems {
                if frob == act.apply(g.inv(a), x) {
                    pairs.push((a, x.to_vec()));
                }
            }
        })?;
        actions.insert(m, act);
    }
    // group by sector, each in enumeration order
    pairs.sort_by_key(|(a, _)| *a);
    let index = pairs.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
    Ok(TwistedPairs { actions, pairs, index })
}

/// Isomorphism classes of `[X/G](F_q)` as G-orbits on twisted pairs under
/// `h·(g, x) = (h g h^{-1}, h x)`.
pub fn orbit_groupoid(action: &FiniteAction, field: &FiniteField) -> Result<Vec<Orbit>, StackError> {
    action.validate(field.ring())?;
    let tp = twisted_pairs(action, field)?;
    Ok(orbits_of_pairs(action, &tp).into_iter().map(|(o, _)| o).collect())
}

fn orbits_of_pairs(action: &FiniteAction, tp: &TwistedPairs) -> Vec<(Orbit, Vec<usize>)> {
    let g = &action.group;
    let mut seen = vec![false; tp.pairs.len()];
    let mut out = Vec::new();
    for start in 0..tp.pairs.len() {
        if seen[start] {
            continue;
        }
        let (a, x) = &tp.pairs[start];
        let act = tp.action(g, *a);
        let mut members: Vec<usize> = (0..g.order())
            .map(|h| {
                let key = (g.conjugate(h, *a), act.apply(h, x));
                tp.index[&key]
            })
            .collect();
        members.sort_unstable();
        members.dedup();
        for &m in &members {
            seen[m] = true;
        }
        let orbit = Orbit {
            sector: *a,
            representative: x.clone(),
            size: members.len(),
            stabilizer_order: (g.order() / members.len()) as u64,
        };
        out.push((orbit, members));
    }
    out
}

/// Per-class check of `#p^{-1}(y) = #F_y · #{y}` for the atlas `X -> [X/G]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberVerdict {
    pub orbit: Orbit,
    pub preimage: u64,
    pub fiber: u64,
    pub holds: bool,
}

pub fn fiber_decomposition_check(
    action: &FiniteAction,
    field: &FiniteField,
) -> Result<(Vec<FiberVerdict>, bool), StackError> {
    action.validate(field.ring())?;
    let g = &action.group;
    let tp = twisted_pairs(action, field)?;
    let e = g.identity();
    let act = tp.action(g, e);
    let orbits = orbits_of_pairs(action, &tp);
    let mut orbit_of = vec![0; tp.pairs.len()];
    for (i, (_, members)) in orbits.iter().enumerate() {
        for &m in members {
            orbit_of[m] = i;
        }
    }
    let rep_of: HashMap<(usize, &Point), usize> =
        orbits.iter().enumerate().map(|(i, (o, _))| ((o.sector, &o.representative), i)).collect();
    let mut preimage = vec![0u64; orbits.len()];
    let mut fiber = vec![0u64; orbits.len()];
    // the atlas points are the trivially twisted pairs (e, u)
    for (i, (_, u)) in tp.pairs.iter().enumerate().filter(|(_, (a, _))| *a == e) {
        preimage[orbit_of[i]] += 1;
        for h in 0..g.order() {
            if let Some(&y) = rep_of.get(&(g.conjugate(h, e), &act.apply(h, u))) {
                fiber[y] += 1;
            }
        }
    }
    let verdicts: Vec<FiberVerdict> = orbits
        .into_iter()
        .enumerate()
        .map(|(i, (orbit, _))| {
            let holds = int(preimage[i]) == int(fiber[i]) * orbit.mass();
            FiberVerdict { orbit, preimage: preimage[i], fiber: fiber[i], holds }
        })
        .collect();
    let all = verdicts.iter().all(|v| v.holds);
    Ok((verdicts, all))
}

/// Connected groups all of whose torsors over finite fields and their
/// truncated lifts are trivial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpecialGroup {
    Additive,
    Multiplicative,
    GeneralLinear(u32),
}

impl SpecialGroup {
    pub fn parse(tag: &str) -> Option<Self> {
        match tag {
            "Ga" | "G_a" => Some(SpecialGroup::Additive),
            "Gm" | "G_m" => Some(SpecialGroup::Multiplicative),
            _ => {
                let k: u32 = tag.strip_prefix("GL_").or_else(|| tag.strip_prefix("GL"))?.parse().ok()?;
                (1..=3).contains(&k).then_some(SpecialGroup::GeneralLinear(k))
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            SpecialGroup::Additive => "Ga".into(),
            SpecialGroup::Multiplicative => "Gm".into(),
            SpecialGroup::GeneralLinear(k) => format!("GL{k}"),
        }
    }

    pub fn dim(&self) -> i64 {
        match self {
            SpecialGroup::Additive | SpecialGroup::Multiplicative => 1,
            SpecialGroup::GeneralLinear(k) => (*k as i64).pow(2),
        }
    }

    /// Coordinates usable in action polynomials.
    pub fn coordinates(&self) -> Vec<String> {
        match self {
            SpecialGroup::Additive => vec!["lambda".into()],
            SpecialGroup::Multiplicative => vec!["lambda".into(), "lambda_inv".into()],
            SpecialGroup::GeneralLinear(k) => {
                let mut v: Vec<String> = (1..=*k).flat_map(|i| (1..=*k).map(move |j| format!("g_{i}_{j}"))).collect();
                v.push("det_inv".into());
                v
            }
        }
    }

    fn matrix_det(k: usize, vars: usize) -> MultiPoly {
        use itertools::Itertools;
        let mut det = MultiPoly::zero(vars);
        for perm in (0..k).permutations(k) {
            let inversions = (0..k).tuple_combinations().filter(|&(i, j)| perm[i] > perm[j]).count();
            let mut term = MultiPoly::one(vars);
            for (i, &j) in perm.iter().enumerate() {
                term = term.mul(&MultiPoly::var(vars, i * k + j));
            }
            det = if inversions % 2 == 0 { det.add(&term) } else { det.sub(&term) };
        }
        det
    }

    /// The group as an affine scheme in its coordinates.
    pub fn scheme(&self) -> AffineScheme {
        let vars = self.coordinates();
        let n = vars.len();
        let gens = match self {
            SpecialGroup::Additive => vec![],
            SpecialGroup::Multiplicative => {
                vec![MultiPoly::var(2, 0).mul(&MultiPoly::var(2, 1)).sub(&MultiPoly::one(2))]
            }
            SpecialGroup::GeneralLinear(k) => {
                let det = Self::matrix_det(*k as usize, n);
                vec![det.mul(&MultiPoly::var(n, n - 1)).sub(&MultiPoly::one(n))]
            }
        };
        AffineScheme::new(self.name(), vars, gens, self.dim()).expect("group scheme")
    }

    /// `|G(R_n)|` in closed form.
    pub fn order(&self, ring: &LocalRing) -> u128 {
        let q = ring.q() as u128;
        let n = ring.level();
        match self {
            SpecialGroup::Additive => q.pow(n + 1),
            SpecialGroup::Multiplicative => q.pow(n) * (q - 1),
            SpecialGroup::GeneralLinear(k) => {
                let qk = q.pow(*k);
                let gl_f: u128 = (0..*k).map(|i| qk - q.pow(i)).product();
                q.pow(n * k * k) * gl_f
            }
        }
    }

    pub fn identity(&self, ring: &LocalRing) -> Point {
        match self {
            SpecialGroup::Additive => vec![ring.zero()],
            SpecialGroup::Multiplicative => vec![ring.one(), ring.one()],
            SpecialGroup::GeneralLinear(k) => {
                let k = *k as usize;
                let mut v: Point =
                    (0..k * k).map(|i| if i % (k + 1) == 0 { ring.one() } else { ring.zero() }).collect();
                v.push(ring.one());
                v
            }
        }
    }

    pub fn mul(&self, ring: &LocalRing, a: &[Elem], b: &[Elem]) -> Point {
        match self {
            SpecialGroup::Additive => vec![ring.add(&a[0], &b[0])],
            SpecialGroup::Multiplicative => vec![ring.mul(&a[0], &b[0]), ring.mul(&a[1], &b[1])],
            SpecialGroup::GeneralLinear(k) => {
                let k = *k as usize;
                let mut out = Vec::with_capacity(k * k + 1);
                for i in 0..k {
                    for j in 0..k {
                        let mut s = ring.zero();
                        for l in 0..k {
                            s = ring.add(&s, &ring.mul(&a[i * k + l], &b[l * k + j]));
                        }
                        out.push(s);
                    }
                }
                out.push(ring.mul(&a[k * k], &b[k * k]));
                out
            }
        }
    }
}

/// Action of a special group, written in the scheme's variables followed by
/// the group coordinates.
#[derive(Debug, Clone)]
pub struct SpecialAction {
    group: SpecialGroup,
    scheme: AffineScheme,
    subs: Vec<MultiPoly>,
}

impl SpecialAction {
    pub fn new(group: SpecialGroup, scheme: AffineScheme, subs: Vec<MultiPoly>) -> Result<Self, StackError> {
        let n = scheme.nvars();
        let total = n + group.coordinates().len();
        if subs.len() != n || subs.iter().any(|f| f.nvars() != total) {
            return Err(StackError::Action(format!("expected {n} polynomials in {total} variables")));
        }
        Ok(SpecialAction { group, scheme, subs })
    }

    /// Parses substitutions over the scheme variables and the group coordinates.
    pub fn parse(group: SpecialGroup, scheme: AffineScheme, subs: &[&str]) -> Result<Self, StackError> {
        let mut vars: Vec<String> = scheme.vars().to_vec();
        vars.extend(group.coordinates());
        let polys = subs
            .iter()
            .map(|s| MultiPoly::parse(s, &vars).map_err(|e| StackError::Action(format!("in '{s}': {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(group, scheme, polys)
    }

    pub fn trivial(group: SpecialGroup, scheme: AffineScheme) -> Self {
        let n = scheme.nvars();
        let total = n + group.coordinates().len();
        let subs = (0..n).map(|i| MultiPoly::var(total, i)).collect();
        SpecialAction { group, scheme, subs }
    }

    pub fn group(&self) -> SpecialGroup {
        self.group
    }

    pub fn scheme(&self) -> &AffineScheme {
        &self.scheme
    }

    pub fn act(&self, ring: &LocalRing, g: &[Elem], x: &[Elem]) -> Point {
        let mut pt: Vec<Elem> = x.to_vec();
        pt.extend_from_slice(g);
        self.subs.iter().map(|f| f.compile(ring).eval(&pt)).collect()
    }

    /// Checks identity, stability and compatibility on `X(ring)` against up to
    /// `sample` group elements.
    pub fn validate(&self, ring: &LocalRing, sample: usize) -> Result<(), StackError> {
        let pts = enumerate_points(&self.scheme, ring)?;
        let group_pts = enumerate_points(&self.group.scheme(), ring)?;
        let gs: Vec<&Point> = group_pts.iter().take(sample).collect();
        let e = self.group.identity(ring);
        for x in &pts {
            if self.act(ring, &e, x) != *x {
                return Err(StackError::Action("identity does not act trivially".into()));
            }
            for h in &gs {
                let hx = self.act(ring, h, x);
                if !self.scheme.contains(ring, &hx) {
                    return Err(StackError::Action("action does not preserve the scheme".into()));
                }
                for g in &gs {
                    let gh = self.group.mul(ring, g, h);
                    if self.act(ring, g, &hx) != self.act(ring, &gh, x) {
                        return Err(StackError::Action("g·(h·x) differs from (gh)·x".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

/// `|X(R_n)| / |G(R_n)|`.
pub fn stacky_count_special(
    group: SpecialGroup,
    scheme: &AffineScheme,
    ring: &LocalRing,
) -> Result<Rational, StackError> {
    let count = PointTower::new(scheme, ring).count(ring.level())?;
    Ok(ratio(count, group.order(ring)))
}

/// Orbits of `G(R_n)` on `X(R_n)`, by enumeration.
pub fn special_orbits(action: &SpecialAction, ring: &LocalRing) -> Result<Vec<Orbit>, StackError> {
    let pts = enumerate_points(&action.scheme, ring)?;
    let group_pts = enumerate_points(&action.group.scheme(), ring)?;
    let index: HashMap<&Point, usize> = pts.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut seen = vec![false; pts.len()];
    let mut out = Vec::new();
    for start in 0..pts.len() {
        if seen[start] {
            continue;
        }
        let mut members = HashSet::new();
        for g in &group_pts {
            let y = action.act(ring, g, &pts[start]);
            let j = *index.get(&y).ok_or_else(|| StackError::Action("action leaves the scheme".into()))?;
            seen[j] = true;
            members.insert(j);
        }
        let size = members.len();
        let group_order = group_pts.len();
        out.push(Orbit {
            sector: 0,
            representative: pts[start].clone(),
            size,
            stabilizer_order: (group_order / size) as u64,
        });
    }
    out.sort_by_cached_key(|o| point_key(ring, &o.representative));
    Ok(out)
}

/// For each orbit `x` of `[X/G](R_n)`, the mass `Σ 1/|Aut y|` of classes `y`
/// over `R_{n+1}` reducing to `x`, next to `#{x} = 1/|Aut x|`.
pub fn special_truncation_fibers(
    action: &SpecialAction,
    ring: &LocalRing,
) -> Result<Vec<(Orbit, Rational)>, StackError> {
    let lower = special_orbits(action, ring)?;
    let upper_ring = ring.at_level(ring.level() + 1);
    let upper = special_orbits(action, &upper_ring)?;
    let group_pts = enumerate_points(&action.group.scheme(), ring)?;
    let mut class_of: HashMap<Point, usize> = HashMap::new();
    for (i, o) in lower.iter().enumerate() {
        for g in &group_pts {
            class_of.insert(action.act(ring, g, &o.representative), i);
        }
    }
    let mut masses = vec![Rational::zero(); lower.len()];
    for o in &upper {
        let down: Point = o.representative.iter().map(|x| upper_ring.reduce(x, ring)).collect::<Result<_, _>>()?;
        let i = class_of[&down];
        masses[i] += o.mass();
    }
    Ok(lower.into_iter().zip(masses).collect())
}

/// The group acting in a quotient presentation.
#[derive(Debug, Clone)]
pub enum GroupAction {
    Finite(FiniteAction),
    Special(SpecialAction),
}

#[derive(Debug, Clone)]
pub struct QuotientStack {
    name: String,
    action: GroupAction,
}

impl QuotientStack {
    pub fn new(name: impl Into<String>, action: GroupAction) -> Self {
        QuotientStack { name: name.into(), action }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn action(&self) -> &GroupAction {
        &self.action
    }

    pub fn scheme(&self) -> &AffineScheme {
        match &self.action {
            GroupAction::Finite(a) => &a.scheme,
            GroupAction::Special(a) => &a.scheme,
        }
    }

    pub fn group_dim(&self) -> i64 {
        match &self.action {
            GroupAction::Finite(_) => 0,
            GroupAction::Special(a) => a.group.dim(),
        }
    }

    /// `dim X - dim G`, possibly negative.
    pub fn dim(&self) -> i64 {
        self.scheme().dim() - self.group_dim()
    }

    /// Groupoid-weighted count `#[X/G](R_n)`.
    pub fn count(&self, ring: &LocalRing) -> Result<Rational, StackError> {
        match &self.action {
            GroupAction::Special(a) => stacky_count_special(a.group, &a.scheme, ring),
            GroupAction::Finite(a) => {
                let field = FiniteField::from_ring(ring.clone()).ok_or_else(|| {
                    StackError::Unsupported(
                        "finite group quotients are counted over finite fields only (level 0, unramified)".into(),
                    )
                })?;
                stacky_count_finite(a, &field)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::RingSpec;

    fn point_scheme() -> AffineScheme {
        AffineScheme::new("pt", vec![], vec![], 0).unwrap()
    }

    fn field(q: u64) -> FiniteField {
        FiniteField::of_size(q).unwrap()
    }

    #[test]
    fn builtin_groups_have_expected_shape() {
        assert_eq!(FiniteGroup::symmetric(3).order(), 6);
        assert_eq!(FiniteGroup::symmetric(3).conjugacy_classes().len(), 3);
        assert_eq!(FiniteGroup::klein().exponent(), 2);
        assert_eq!(FiniteGroup::cyclic(4).exponent(), 4);
        assert_eq!(FiniteGroup::symmetric(3).exponent(), 6);
    }

    #[test]
    fn rejects_bad_tables() {
        let labels: Vec<String> = vec!["a".into(), "b".into()];
        assert!(FiniteGroup::from_table("x", labels.clone(), vec![vec![0, 0], vec![0, 1]]).is_err());
        assert!(FiniteGroup::from_table("x", labels.clone(), vec![vec![0, 1]]).is_err());
        assert!(FiniteGroup::from_table("x", labels, vec![vec![0, 1], vec![1, 0]]).is_ok());
        // a Latin square with identity that is not associative
        let l5: Vec<String> = (0..5).map(|i| i.to_string()).collect();
        let t = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        assert!(matches!(FiniteGroup::from_table("loop", l5, t), Err(StackError::GroupTable(_))));
    }

    #[test]
    fn classifying_stack_of_s3_has_mass_one() {
        let g = FiniteGroup::symmetric(3);
        // independent oracle: class equation
        let mass: Rational = g.conjugacy_classes().iter().map(|c| ratio(1, g.centralizer_order(c[0]) as u64)).sum();
        assert_eq!(mass, int(1));
        let action = FiniteAction::trivial(g, point_scheme());
        assert_eq!(stacky_count_finite(&action, &field(5)).unwrap(), int(1));
        assert_eq!(
            stacky_count_finite(&FiniteAction::trivial(FiniteGroup::trivial(), point_scheme()), &field(5)).unwrap(),
            int(1)
        );
    }

    #[test]
    fn free_involution_on_two_points() {
        let x = AffineScheme::parse("pm1", &["x"], &["x^2 - 1"], 0).unwrap();
        let neg = vec![vec![MultiPoly::var(1, 0)], vec![MultiPoly::var(1, 0).neg()]];
        let action = FiniteAction::new(FiniteGroup::cyclic(2), x, neg).unwrap();
        assert_eq!(stacky_count_finite(&action, &field(5)).unwrap(), int(1));
        let orbits = orbit_groupoid(&action, &field(5)).unwrap();
        assert_eq!(orbits.len(), 1);
        assert_eq!(groupoid_cardinality(&orbits), int(1));
        let (verdicts, ok) = fiber_decomposition_check(&action, &field(5)).unwrap();
        assert!(ok);
        assert_eq!((verdicts[0].preimage, verdicts[0].fiber), (2, 2));
    }

    #[test]
    fn point_mod_involution_fiber() {
        let action = FiniteAction::trivial(FiniteGroup::cyclic(2), point_scheme());
        let (verdicts, ok) = fiber_decomposition_check(&action, &field(5)).unwrap();
        assert!(ok);
        let trivial_class = verdicts.iter().find(|v| v.orbit.sector == 0).unwrap();
        assert_eq!((trivial_class.preimage, trivial_class.fiber), (1, 2));
        assert_eq!(trivial_class.orbit.mass(), ratio(1, 2));
    }

    #[test]
    fn weighted_counts() {
        assert_eq!(weighted_subset_count(&[2, 3]).unwrap(), ratio(5, 6));
        assert_eq!(weighted_subset_count(&[]).unwrap(), int(0));
        assert!(weighted_subset_count(&[0]).is_err());
    }

    #[test]
    fn invalid_actions_are_rejected() {
        let a1 = AffineScheme::affine_space(1);
        // x -> x + 1 is not an involution over F_5
        let subs = vec![vec![MultiPoly::var(1, 0)], vec![MultiPoly::var(1, 0).add(&MultiPoly::one(1))]];
        let action = FiniteAction::new(FiniteGroup::cyclic(2), a1, subs).unwrap();
        assert!(matches!(stacky_count_finite(&action, &field(5)), Err(StackError::Action(_))));
    }

    #[test]
    fn special_group_orders() {
        let f5 = LocalRing::new(RingSpec::unramified(5, 0)).unwrap();
        let z25 = LocalRing::new(RingSpec::unramified(5, 1)).unwrap();
        let f3 = LocalRing::new(RingSpec::unramified(3, 0)).unwrap();
        let gm = SpecialGroup::Multiplicative;
        assert_eq!(stacky_count_special(gm, &point_scheme(), &f5).unwrap(), ratio(1, 4));
        assert_eq!(stacky_count_special(gm, &point_scheme(), &z25).unwrap(), ratio(1, 20));
        let gl2 = SpecialGroup::GeneralLinear(2);
        assert_eq!(enumerate_points(&gl2.scheme(), &f3).unwrap().len(), 48);
        assert_eq!(gl2.order(&f3), 48);
        assert_eq!(stacky_count_special(gl2, &point_scheme(), &f3).unwrap(), ratio(1, 48));
        for (g, ring) in [(SpecialGroup::Additive, &z25), (gm, &z25), (SpecialGroup::GeneralLinear(1), &z25)] {
            assert_eq!(enumerate_points(&g.scheme(), ring).unwrap().len() as u128, g.order(ring));
        }
    }

    #[test]
    fn scaling_action_orbits() {
        let f5 = LocalRing::new(RingSpec::unramified(5, 0)).unwrap();
        let a1 = AffineScheme::affine_space(1);
        let action = SpecialAction::parse(SpecialGroup::Multiplicative, a1, &["lambda*x0"]).unwrap();
        action.validate(&f5, 64).unwrap();
        let orbits = special_orbits(&action, &f5).unwrap();
        assert_eq!(orbits.len(), 2);
        assert_eq!(groupoid_cardinality(&orbits), ratio(5, 4));
        assert_eq!(stacky_count_special(SpecialGroup::Multiplicative, action.scheme(), &f5).unwrap(), ratio(5, 4));
    }

    #[test]
    fn parses_group_tags() {
        assert_eq!(SpecialGroup::parse("Gm"), Some(SpecialGroup::Multiplicative));
        assert_eq!(SpecialGroup::parse("GL_3"), Some(SpecialGroup::GeneralLinear(3)));
        assert_eq!(SpecialGroup::parse("GL4"), None);
        assert_eq!(SpecialGroup::parse("SL2"), None);
    }

    #[test]
    fn finite_quotients_over_higher_levels_are_unsupported() {
        let stack = QuotientStack::new(
            "BZ2",
            GroupAction::Finite(FiniteAction::trivial(FiniteGroup::cyclic(2), point_scheme())),
        );
        let z9 = LocalRing::new(RingSpec::unramified(3, 1)).unwrap();
        assert!(matches!(stack.count(&z9), Err(StackError::Unsupported(_))));
        assert_eq!(stack.count(&z9.at_level(0)).unwrap(), int(1));
    }
}
