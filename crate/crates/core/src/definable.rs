//! Quantifier-free Denef–Pas conditions on points over `R_n`: parsing,
//! three-valued evaluation under truncation, measures and comparison across primes.

use crate::measures::{stabilize, MeasureError, MeasureResult, Target};
use crate::poly::{expr_to_poly, CompiledPoly, MultiPoly};
use crate::rational::{format_rational, int, pow_int, Rational};
use crate::ring::{Elem, LocalRing, RingSpec, Valuation};
use crate::scheme::{Point, PointTower};
use crate::syntax::{Expr, ParseError, Parser, Tok};
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use std::fmt;

/// Name of the constant symbol interpreted as the uniformizer.
pub const UNIFORMIZER_SYMBOL: &str = "t";

/// Largest number of residue completions tried for undetermined angular components.
const MAX_RESIDUE_COMPLETIONS: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DefinableError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("invalid expression in q: {0}")]
    Expression(String),
}

/// Kleene truth values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl Truth {
    fn not(self) -> Truth {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
        }
    }

    fn from_bool(b: bool) -> Truth {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cmp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Cmp {
    fn from_tok(t: &Tok) -> Option<Cmp> {
        Some(match t {
            Tok::EqEq => Cmp::Eq,
            Tok::NotEq => Cmp::Ne,
            Tok::Lt => Cmp::Lt,
            Tok::Le => Cmp::Le,
            Tok::Gt => Cmp::Gt,
            Tok::Ge => Cmp::Ge,
            _ => return None,
        })
    }

    fn holds(self, d: i128) -> bool {
        match self {
            Cmp::Eq => d == 0,
            Cmp::Ne => d != 0,
            Cmp::Lt => d < 0,
            Cmp::Le => d <= 0,
            Cmp::Gt => d > 0,
            Cmp::Ge => d >= 0,
        }
    }

    /// Truth of `d ⋈ 0` for `d` ranging over `[lo, hi]` (`None` = unbounded).
    fn on_interval(self, lo: Option<i128>, hi: Option<i128>) -> Truth {
        if let (Some(a), Some(b)) = (lo, hi) {
            if a == b {
                return Truth::from_bool(self.holds(a));
            }
        }
        // the ordering predicates are monotone in d
        let t = match self {
            Cmp::Eq | Cmp::Ne => {
                let contains_zero = lo.is_none_or(|a| a <= 0) && hi.is_none_or(|b| b >= 0);
                (!contains_zero).then_some(self == Cmp::Ne)
            }
            Cmp::Lt | Cmp::Le => match (lo, hi) {
                (_, Some(b)) if self.holds(b) => Some(true),
                (Some(a), _) if !self.holds(a) => Some(false),
                _ => None,
            },
            Cmp::Gt | Cmp::Ge => match (lo, hi) {
                (Some(a), _) if self.holds(a) => Some(true),
                (_, Some(b)) if !self.holds(b) => Some(false),
                _ => None,
            },
        };
        t.map_or(Truth::Unknown, Truth::from_bool)
    }
}

/// `Σ c_i ord(f_i) + constant`, with `f_i` indices into the formula's polynomial table.
#[derive(Debug, Clone, PartialEq, Eq)]
struct OrdTerm {
    terms: Vec<(i64, usize)>,
    constant: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ResFn {
    Ac,
    Res,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Atom {
    /// `f = 0` (or `≠`) in `R_n`.
    Zero {
        poly: usize,
        equal: bool,
    },
    /// `ord(f) = ∞` read as `f = 0` at the current level.
    OrdInfinite {
        poly: usize,
        equal: bool,
    },
    Ord {
        lhs: OrdTerm,
        cmp: Cmp,
    },
    Congruence {
        lhs: OrdTerm,
        modulus: i64,
        equal: bool,
    },
    /// Polynomial over the residue field in `ac(f_j)`, `res(f_j)`.
    Residue {
        poly: MultiPoly,
        slots: Vec<(ResFn, usize)>,
        equal: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Node {
    Atom(Atom),
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
}

/// A parsed quantifier-free formula over the coordinates of a target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    text: String,
    vars: Vec<String>,
    /// Polynomials in `vars` followed by the uniformizer symbol.
    polys: Vec<MultiPoly>,
    root: Node,
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

struct FormulaParser<'a> {
    p: Parser,
    vars: &'a [String],
    all_vars: Vec<String>,
    polys: Vec<MultiPoly>,
}

fn expr_pos(e: &Expr) -> usize {
    match e {
        Expr::Var(_, at) | Expr::Infinity(at) | Expr::Call(_, _, at) | Expr::Div(_, _, at) => *at,
        Expr::Neg(a) | Expr::Pow(a, _) | Expr::Add(a, _) | Expr::Sub(a, _) | Expr::Mul(a, _) => expr_pos(a),
        Expr::Int(_) => 0,
    }
}

impl FormulaParser<'_> {
    fn intern(&mut self, f: MultiPoly) -> usize {
        if let Some(i) = self.polys.iter().position(|g| *g == f) {
            return i;
        }
        self.polys.push(f);
        self.polys.len() - 1
    }

    fn poly(&self, e: &Expr) -> Result<MultiPoly, ParseError> {
        expr_to_poly(e, &self.all_vars, None)
    }

    fn or(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.and()?;
        while self.p.eat(&Tok::OrOr) {
            lhs = Node::Or(Box::new(lhs), Box::new(self.and()?));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.not()?;
        while self.p.eat(&Tok::AndAnd) {
            lhs = Node::And(Box::new(lhs), Box::new(self.not()?));
        }
        Ok(lhs)
    }

    fn not(&mut self) -> Result<Node, ParseError> {
        if self.p.eat(&Tok::Bang) {
            return Ok(Node::Not(Box::new(self.not()?)));
        }
        if self.p.peek() == Some(&Tok::LParen) {
            // a parenthesised formula, unless the parenthesis opens a term
            let save = self.p.pos;
            let saved_polys = self.polys.len();
            self.p.bump();
            if let Ok(inner) = self.or() {
                if self.p.eat(&Tok::RParen)
                    && matches!(self.p.peek(), None | Some(Tok::AndAnd) | Some(Tok::OrOr) | Some(Tok::RParen))
                {
                    return Ok(inner);
                }
            }
            self.p.pos = save;
            self.polys.truncate(saved_polys);
        }
        self.atom().map(Node::Atom)
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        let start = self.p.offset();
        let lhs = self.p.expr()?;
        let modulus = if self.p.peek() == Some(&Tok::Ident("mod".into())) {
            self.p.bump();
            let at = self.p.offset();
            match self.p.bump() {
                Some(Tok::Int(m)) => {
                    let m = m
                        .to_i64()
                        .filter(|&m| m >= 2)
                        .ok_or_else(|| ParseError::new(at, "modulus must be at least 2"))?;
                    Some(m)
                }
                _ => return Err(ParseError::new(at, "expected an integer modulus")),
            }
        } else {
            None
        };
        let cmp_at = self.p.offset();
        let cmp = self.p.peek().and_then(Cmp::from_tok).ok_or_else(|| self.p.unexpected("expected a comparison"))?;
        self.p.bump();
        let rhs = self.p.expr()?;
        let ord_side = |e: &Expr| e.contains_call("ord") || e.contains_infinity();
        let res_side = |e: &Expr| e.contains_call("ac") || e.contains_call("res");
        if let Some(m) = modulus {
            if !matches!(cmp, Cmp::Eq | Cmp::Ne) {
                return Err(ParseError::new(cmp_at, "congruences use == or !="));
            }
            let mut lhs = self.ord_term(&lhs)?;
            let r = self.ord_term(&rhs)?;
            if !r.terms.is_empty() {
                return Err(ParseError::new(expr_pos(&rhs), "congruence residue must be an integer"));
            }
            lhs.constant -= r.constant;
            return Ok(Atom::Congruence { lhs, modulus: m, equal: cmp == Cmp::Eq });
        }
        if ord_side(&lhs) || ord_side(&rhs) {
            if res_side(&lhs) || res_side(&rhs) {
                return Err(ParseError::new(start, "cannot compare value-group and residue terms"));
            }
            let (inf, other) = match (&lhs, &rhs) {
                (Expr::Infinity(_), o) | (o, Expr::Infinity(_)) => (true, o),
                _ => (false, &lhs),
            };
            if inf {
                let poly = match other {
                    Expr::Call(name, inner, _) if name == "ord" => self.poly(inner)?,
                    _ => return Err(ParseError::new(expr_pos(other), "INFINITY can only be compared with ord(...)")),
                };
                if !matches!(cmp, Cmp::Eq | Cmp::Ne) {
                    return Err(ParseError::new(cmp_at, "INFINITY comparisons use == or !="));
                }
                let poly = self.intern(poly);
                return Ok(Atom::OrdInfinite { poly, equal: cmp == Cmp::Eq });
            }
            let mut l = self.ord_term(&lhs)?;
            let r = self.ord_term(&rhs)?;
            l.terms.extend(r.terms.into_iter().map(|(c, i)| (-c, i)));
            l.constant -= r.constant;
            return Ok(Atom::Ord { lhs: l, cmp });
        }
        if !matches!(cmp, Cmp::Eq | Cmp::Ne) {
            return Err(ParseError::new(cmp_at, "order comparisons need ord(...) terms"));
        }
        let equal = cmp == Cmp::Eq;
        if res_side(&lhs) || res_side(&rhs) {
            let mut slots = Vec::new();
            let diff = Expr::Sub(Box::new(lhs), Box::new(rhs));
            let poly = self.residue_poly(&diff, &mut slots)?;
            return Ok(Atom::Residue { poly: poly.into_multipoly(slots.len()), slots, equal });
        }
        let f = self.poly(&lhs)?.sub(&self.poly(&rhs)?);
        Ok(Atom::Zero { poly: self.intern(f), equal })
    }

    fn ord_term(&mut self, e: &Expr) -> Result<OrdTerm, ParseError> {
        let err = |e: &Expr| ParseError::new(expr_pos(e), "expected a linear combination of ord(...) and integers");
        Ok(match e {
            Expr::Int(v) => OrdTerm { terms: vec![], constant: v.to_i64().ok_or_else(|| err(e))? },
            Expr::Call(name, inner, _) if name == "ord" => {
                let f = self.poly(inner)?;
                OrdTerm { terms: vec![(1, self.intern(f))], constant: 0 }
            }
            Expr::Neg(a) => self.ord_term(a)?.scale(-1),
            Expr::Add(a, b) => self.ord_term(a)?.plus(self.ord_term(b)?),
            Expr::Sub(a, b) => self.ord_term(a)?.plus(self.ord_term(b)?.scale(-1)),
            Expr::Mul(a, b) => match (a.as_ref(), b.as_ref()) {
                (Expr::Int(k), o) | (o, Expr::Int(k)) => self.ord_term(o)?.scale(k.to_i64().ok_or_else(|| err(e))?),
                _ => return Err(err(e)),
            },
            _ => return Err(err(e)),
        })
    }

    fn residue_poly(&mut self, e: &Expr, slots: &mut Vec<(ResFn, usize)>) -> Result<ResExpr, ParseError> {
        Ok(match e {
            Expr::Int(v) => ResExpr::Const(v.clone()),
            Expr::Call(name, inner, at) => {
                let kind = match name.as_str() {
                    "ac" => ResFn::Ac,
                    "res" => ResFn::Res,
                    _ => return Err(ParseError::new(*at, "ord(...) is not a residue term")),
                };
                let f = self.poly(inner)?;
                let slot = (kind, self.intern(f));
                let i = slots.iter().position(|s| *s == slot).unwrap_or_else(|| {
                    slots.push(slot);
                    slots.len() - 1
                });
                ResExpr::Slot(i)
            }
            Expr::Neg(a) => ResExpr::Neg(Box::new(self.residue_poly(a, slots)?)),
            Expr::Add(a, b) => {
                ResExpr::Add(Box::new(self.residue_poly(a, slots)?), Box::new(self.residue_poly(b, slots)?))
            }
            Expr::Sub(a, b) => ResExpr::Add(
                Box::new(self.residue_poly(a, slots)?),
                Box::new(ResExpr::Neg(Box::new(self.residue_poly(b, slots)?))),
            ),
            Expr::Mul(a, b) => {
                ResExpr::Mul(Box::new(self.residue_poly(a, slots)?), Box::new(self.residue_poly(b, slots)?))
            }
            Expr::Pow(a, k) => ResExpr::Pow(Box::new(self.residue_poly(a, slots)?), *k),
            Expr::Var(name, at) => {
                return Err(ParseError::new(*at, format!("'{name}' must appear inside ac(...) or res(...) here")))
            }
            Expr::Infinity(at) | Expr::Div(_, _, at) => {
                return Err(ParseError::new(*at, "not allowed in a residue condition"))
            }
        })
    }
}

/// Residue-sort term before the slot count is known.
enum ResExpr {
    Const(BigInt),
    Slot(usize),
    Neg(Box<ResExpr>),
    Add(Box<ResExpr>, Box<ResExpr>),
    Mul(Box<ResExpr>, Box<ResExpr>),
    Pow(Box<ResExpr>, u32),
}

impl ResExpr {
    fn into_multipoly(self, n: usize) -> MultiPoly {
        match self {
            ResExpr::Const(c) => MultiPoly::constant(n, c),
            ResExpr::Slot(i) => MultiPoly::var(n, i),
            ResExpr::Neg(a) => a.into_multipoly(n).neg(),
            ResExpr::Add(a, b) => a.into_multipoly(n).add(&b.into_multipoly(n)),
            ResExpr::Mul(a, b) => a.into_multipoly(n).mul(&b.into_multipoly(n)),
            ResExpr::Pow(a, k) => a.into_multipoly(n).pow(k),
        }
    }
}

impl OrdTerm {
    fn scale(mut self, k: i64) -> Self {
        for t in &mut self.terms {
            t.0 *= k;
        }
        self.constant *= k;
        self
    }

    fn plus(mut self, other: OrdTerm) -> Self {
        self.terms.extend(other.terms);
        self.constant += other.constant;
        self
    }
}

/// Parses a formula over the given coordinate names; `t` denotes the uniformizer.
pub fn parse_formula(text: &str, vars: &[String]) -> Result<Formula, DefinableError> {
    if let Some(v) = vars.iter().find(|v| *v == UNIFORMIZER_SYMBOL || *v == "mod") {
        return Err(ParseError::new(0, format!("coordinate name '{v}' is reserved")).into());
    }
    let mut all_vars = vars.to_vec();
    all_vars.push(UNIFORMIZER_SYMBOL.to_string());
    let mut fp = FormulaParser { p: Parser::new(text)?, vars, all_vars, polys: Vec::new() };
    let root = fp.or()?;
    fp.p.finish()?;
    Ok(Formula { text: text.to_string(), vars: fp.vars.to_vec(), polys: fp.polys, root })
}

/// Formula compiled for one ring.
struct Compiled<'a> {
    formula: &'a Formula,
    ring: LocalRing,
    residue_field: LocalRing,
    polys: Vec<CompiledPoly>,
    uniformizer: Elem,
}

impl<'a> Compiled<'a> {
    fn new(formula: &'a Formula, ring: &LocalRing) -> Self {
        Compiled {
            formula,
            ring: ring.clone(),
            residue_field: ring.residue_field(),
            polys: formula.polys.iter().map(|f| f.compile(ring)).collect(),
            uniformizer: ring.uniformizer(),
        }
    }

    fn eval(&self, x: &[Elem]) -> Truth {
        let mut pt: Vec<Elem> = x.to_vec();
        pt.push(self.uniformizer.clone());
        let values: Vec<Elem> = self.polys.iter().map(|f| f.eval(&pt)).collect();
        self.node(&self.formula.root, &values)
    }

    fn node(&self, n: &Node, v: &[Elem]) -> Truth {
        match n {
            Node::Atom(a) => self.atom(a, v),
            Node::Not(a) => self.node(a, v).not(),
            Node::And(a, b) => match (self.node(a, v), self.node(b, v)) {
                (Truth::False, _) | (_, Truth::False) => Truth::False,
                (Truth::True, Truth::True) => Truth::True,
                _ => Truth::Unknown,
            },
            Node::Or(a, b) => match (self.node(a, v), self.node(b, v)) {
                (Truth::True, _) | (_, Truth::True) => Truth::True,
                (Truth::False, Truth::False) => Truth::False,
                _ => Truth::Unknown,
            },
        }
    }

    /// Range of `ord` consistent with the truncated value.
    fn ord_range(&self, x: &Elem) -> (i128, Option<i128>) {
        match self.ring.valuation(x) {
            Valuation::Finite(v) => (v as i128, Some(v as i128)),
            Valuation::Infinity => (self.ring.level() as i128 + 1, None),
        }
    }

    fn term_range(&self, t: &OrdTerm, v: &[Elem]) -> (Option<i128>, Option<i128>) {
        let mut lo = Some(t.constant as i128);
        let mut hi = Some(t.constant as i128);
        for &(c, i) in &t.terms {
            let (a, b) = self.ord_range(&v[i]);
            let c = c as i128;
            if c == 0 {
                continue;
            }
            if c > 0 {
                lo = lo.map(|l| l + c * a);
                hi = hi.and_then(|h| b.map(|b| h + c * b));
            } else {
                lo = lo.and_then(|l| b.map(|b| l + c * b));
                hi = hi.map(|h| h + c * a);
            }
        }
        (lo, hi)
    }

    fn atom(&self, a: &Atom, v: &[Elem]) -> Truth {
        match a {
            Atom::Zero { poly, equal } | Atom::OrdInfinite { poly, equal } => {
                Truth::from_bool(self.ring.is_zero(&v[*poly]) == *equal)
            }
            Atom::Ord { lhs, cmp } => {
                let (lo, hi) = self.term_range(lhs, v);
                cmp.on_interval(lo, hi)
            }
            Atom::Congruence { lhs, modulus, equal } => {
                let t = match self.term_range(lhs, v) {
                    (Some(a), Some(b)) if a == b => Truth::from_bool(a.rem_euclid(*modulus as i128) == 0),
                    (Some(a), Some(b)) => {
                        let first_multiple = a + (-a).rem_euclid(*modulus as i128);
                        if first_multiple > b {
                            Truth::False
                        } else {
                            Truth::Unknown
                        }
                    }
                    _ => Truth::Unknown,
                };
                if *equal {
                    t
                } else {
                    t.not()
                }
            }
            Atom::Residue { poly, slots, equal } => self.residue_atom(poly, slots, *equal, v),
        }
    }

    fn residue_atom(&self, poly: &MultiPoly, slots: &[(ResFn, usize)], equal: bool, v: &[Elem]) -> Truth {
        let k = &self.residue_field;
        let f = poly.compile(k);
        let mut known: Vec<Option<Elem>> = Vec::with_capacity(slots.len());
        for &(kind, i) in slots {
            let x = &v[i];
            known.push(match kind {
                ResFn::Res => Some(self.ring.residue(x)),
                ResFn::Ac if self.ring.is_zero(x) => None,
                ResFn::Ac => Some(self.ring.ac(x)),
            });
        }
        let free: Vec<usize> = (0..known.len()).filter(|&i| known[i].is_none()).collect();
        let q = k.q();
        let completions = (q as u128).checked_pow(free.len() as u32).unwrap_or(u128::MAX);
        if completions > MAX_RESIDUE_COMPLETIONS as u128 {
            return Truth::Unknown;
        }
        let mut seen: Option<bool> = None;
        let mut vals: Vec<Elem> = known.iter().map(|e| e.clone().unwrap_or_else(|| k.zero())).collect();
        for idx in 0..completions as u64 {
            let mut s = idx;
            for &i in &free {
                vals[i] = k.residue_element(s % q);
                s /= q;
            }
            let holds = k.is_zero(&f.eval(&vals)) == equal;
            match seen {
                None => seen = Some(holds),
                Some(b) if b != holds => return Truth::Unknown,
                _ => {}
            }
        }
        Truth::from_bool(seen.unwrap_or(true))
    }
}

/// Points of a level split by the truth value of a formula.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FormulaSets {
    pub certain_true: Vec<Point>,
    pub certain_false: Vec<Point>,
    pub undetermined: Vec<Point>,
}

impl Formula {
    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    /// Truth value at one point of `R_n^N`.
    pub fn eval(&self, ring: &LocalRing, point: &[Elem]) -> Truth {
        Compiled::new(self, ring).eval(point)
    }

    fn check_vars(&self, target: &Target<'_>) -> Result<(), DefinableError> {
        if target.scheme().vars() != self.vars.as_slice() {
            return Err(ParseError::new(0, "formula variables differ from the target's coordinates").into());
        }
        Ok(())
    }
}

/// Splits `X(R_n)` into certain-true, certain-false and undetermined points.
pub fn eval_formula(formula: &Formula, target: Target<'_>, ring: &LocalRing) -> Result<FormulaSets, DefinableError> {
    formula.check_vars(&target)?;
    let mut tower = PointTower::new(target.scheme(), ring);
    let pts = tower.points(ring.level()).map_err(MeasureError::from)?;
    let c = Compiled::new(formula, ring);
    let truths: Vec<Truth> = pts.par_iter().map(|x| c.eval(x)).collect();
    let mut out = FormulaSets::default();
    for (x, t) in pts.iter().zip(truths) {
        match t {
            Truth::True => out.certain_true.push(x.clone()),
            Truth::False => out.certain_false.push(x.clone()),
            Truth::Unknown => out.undetermined.push(x.clone()),
        }
    }
    Ok(out)
}

/// Measure of the defined subset, normalized with dimension `d`, from the
/// sandwich `certain-true ⊆ A ⊆ certain-true ∪ undetermined`.
pub fn measure_formula(
    formula: &Formula,
    target: Target<'_>,
    ring: &LocalRing,
    d: i64,
    max_level: u32,
) -> Result<MeasureResult, DefinableError> {
    formula.check_vars(&target)?;
    let mut tower = PointTower::new(target.scheme(), ring);
    let q = ring.q();
    let g = target.group_dim();
    stabilize(
        0,
        max_level,
        |n| pow_int(q, (n as i64 + 1) * d + g),
        |n| {
            let r = tower.ring(n);
            let w = target.point_weight(&r)?;
            let c = Compiled::new(formula, &r);
            let pts = tower.points(n).map_err(MeasureError::from)?;
            let (t, u) = pts
                .par_iter()
                .map(|x| match c.eval(x) {
                    Truth::True => (1u64, 0u64),
                    Truth::Unknown => (0, 1),
                    Truth::False => (0, 0),
                })
                .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
            Ok::<_, DefinableError>((int(t) * &w, int(t + u) * w))
        },
    )
}

/// A rational function of `q` given as text, e.g. `2(1 - 1/q)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QExpression {
    text: String,
    expr: Expr,
}

impl QExpression {
    pub fn parse(text: &str) -> Result<Self, DefinableError> {
        let mut p = Parser::new(text)?;
        let expr = p.expr()?;
        p.finish()?;
        check_q_expr(&expr)?;
        Ok(QExpression { text: text.to_string(), expr })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn eval(&self, q: u64) -> Result<Rational, DefinableError> {
        eval_q(&self.expr, &int(q))
    }
}

fn check_q_expr(e: &Expr) -> Result<(), ParseError> {
    match e {
        Expr::Int(_) => Ok(()),
        Expr::Var(name, at) if name != "q" => Err(ParseError::new(*at, format!("unknown symbol '{name}', expected q"))),
        Expr::Var(..) => Ok(()),
        Expr::Infinity(at) | Expr::Call(_, _, at) => Err(ParseError::new(*at, "not allowed in an expression in q")),
        Expr::Neg(a) | Expr::Pow(a, _) => check_q_expr(a),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b, _) => {
            check_q_expr(a)?;
            check_q_expr(b)
        }
    }
}

fn eval_q(e: &Expr, q: &Rational) -> Result<Rational, DefinableError> {
    Ok(match e {
        Expr::Int(v) => int(v.clone()),
        Expr::Var(..) => q.clone(),
        Expr::Neg(a) => -eval_q(a, q)?,
        Expr::Add(a, b) => eval_q(a, q)? + eval_q(b, q)?,
        Expr::Sub(a, b) => eval_q(a, q)? - eval_q(b, q)?,
        Expr::Mul(a, b) => eval_q(a, q)? * eval_q(b, q)?,
        Expr::Div(a, b, _) => {
            let d = eval_q(b, q)?;
            if d.is_zero() {
                return Err(DefinableError::Expression(format!("division by zero at q = {q}")));
            }
            eval_q(a, q)? / d
        }
        Expr::Pow(a, k) => num_traits::pow(eval_q(a, q)?, *k as usize),
        Expr::Infinity(_) | Expr::Call(..) => unreachable!("rejected by check_q_expr"),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Match,
    Mismatch {
        expected: Rational,
    },
    /// The measure did not stabilize within the level budget.
    Inconclusive,
    SkippedBadPrime,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Match => f.write_str("MATCH"),
            Verdict::Mismatch { expected } => write!(f, "MISMATCH (expected {})", format_rational(expected)),
            Verdict::Inconclusive => f.write_str("INCONCLUSIVE"),
            Verdict::SkippedBadPrime => f.write_str("SKIPPED_BAD_PRIME"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeVerdict {
    pub p: u64,
    pub verdict: Verdict,
    pub measure: Option<MeasureResult>,
}

/// Measures the formula over `Z_p` for each prime and compares with the expression at `q = p`.
pub fn specialize_primes(
    formula: &Formula,
    target: Target<'_>,
    d: i64,
    primes: &[u64],
    bad_primes: &[u64],
    expected: &QExpression,
    max_level: u32,
) -> Result<Vec<PrimeVerdict>, DefinableError> {
    let mut out = Vec::with_capacity(primes.len());
    for &p in primes {
        if bad_primes.contains(&p) {
            out.push(PrimeVerdict { p, verdict: Verdict::SkippedBadPrime, measure: None });
            continue;
        }
        let ring = LocalRing::new(RingSpec::unramified(p, 0)).map_err(MeasureError::from)?;
        let m = measure_formula(formula, target, &ring, d, max_level)?;
        let verdict = if !m.is_stabilized() {
            Verdict::Inconclusive
        } else {
            let e = expected.eval(p)?;
            if e == m.value {
                Verdict::Match
            } else {
                Verdict::Mismatch { expected: e }
            }
        };
        out.push(PrimeVerdict { p, verdict, measure: Some(m) });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::scheme::AffineScheme;

    fn x_vars() -> Vec<String> {
        vec!["x".into()]
    }

    fn line() -> AffineScheme {
        AffineScheme::parse("A1", &["x"], &[], 1).unwrap()
    }

    fn zp(p: u64, n: u32) -> LocalRing {
        LocalRing::new(RingSpec::unramified(p, n)).unwrap()
    }

    fn values(r: &LocalRing, pts: &[Point]) -> Vec<u64> {
        let mut v: Vec<u64> = pts.iter().map(|p| r.integer_value(&p[0]).unwrap()).collect();
        v.sort();
        v
    }

    #[test]
    fn parses_example_formulas() {
        for f in
            ["ord(x) >= 1", "ac(x) == 1 && ord(x) mod 2 == 0", "!(ord(x) < 2) || res(x)^2 == 1", "(ord(x) + 1) >= 2"]
        {
            parse_formula(f, &x_vars()).unwrap();
        }
        let xy = vec!["x".to_string(), "y".to_string()];
        let f = parse_formula("ord(x*y − t) == INFINITY", &xy).unwrap();
        assert!(matches!(f.root, Node::Atom(Atom::OrdInfinite { equal: true, .. })));
    }

    #[test]
    fn parse_errors_carry_positions() {
        let e = parse_formula("ord(z) >= 1", &x_vars()).unwrap_err();
        assert!(matches!(e, DefinableError::Parse(ParseError { pos: 4, .. })));
        let e = parse_formula("ord(x) mod 1 == 0", &x_vars()).unwrap_err();
        assert!(matches!(e, DefinableError::Parse(ParseError { pos: 11, .. })));
        assert!(parse_formula("x < 1", &x_vars()).is_err());
        assert!(parse_formula("ord(x) >= 1 &&", &x_vars()).is_err());
        assert!(parse_formula("ac(x) == ord(x)", &x_vars()).is_err());
    }

    #[test]
    fn evaluation_examples_mod_nine() {
        let r = zp(3, 1);
        let a1 = line();
        let f = parse_formula("ord(x) >= 1", &x_vars()).unwrap();
        let s = eval_formula(&f, Target::Scheme(&a1), &r).unwrap();
        assert_eq!(values(&r, &s.certain_true), vec![0, 3, 6]);
        let f = parse_formula("ac(x) == 2", &x_vars()).unwrap();
        let s = eval_formula(&f, Target::Scheme(&a1), &r).unwrap();
        assert_eq!(values(&r, &s.certain_true), vec![2, 5, 6, 8]);
        assert_eq!(values(&r, &s.undetermined), vec![0]);
        let f = parse_formula("ord(x) == 2", &x_vars()).unwrap();
        let s = eval_formula(&f, Target::Scheme(&a1), &r).unwrap();
        assert!(s.certain_true.is_empty());
        assert_eq!(values(&r, &s.undetermined), vec![0]);
    }

    #[test]
    fn measure_examples() {
        let a1 = line();
        let f = parse_formula("ord(x) >= 1", &x_vars()).unwrap();
        let m = measure_formula(&f, Target::Scheme(&a1), &zp(3, 0), 1, 4).unwrap();
        assert!(m.is_stabilized());
        assert_eq!(m.value, ratio(1, 3));
        let f = parse_formula("(ord(x) mod 2 == 0) && ord(x) <= 4 && ac(x) == 1", &x_vars()).unwrap();
        let m = measure_formula(&f, Target::Scheme(&a1), &zp(3, 0), 1, 6).unwrap();
        assert_eq!((m.value.clone(), m.status), (ratio(91, 243), crate::measures::MeasureStatus::Stabilized));
    }

    #[test]
    fn q_expressions() {
        let e = QExpression::parse("2(1 − 1/q)").unwrap();
        assert_eq!(e.eval(3).unwrap(), ratio(4, 3));
        assert_eq!(QExpression::parse("1/q^2").unwrap().eval(5).unwrap(), ratio(1, 25));
        assert!(QExpression::parse("1/(q - 3)").unwrap().eval(3).is_err());
        assert!(QExpression::parse("p + 1").is_err());
    }

    #[test]
    fn bad_primes_are_skipped() {
        let a1 = line();
        let f = parse_formula("ord(x) >= 1", &x_vars()).unwrap();
        let e = QExpression::parse("1/q").unwrap();
        let v = specialize_primes(&f, Target::Scheme(&a1), 1, &[2, 3], &[2], &e, 4).unwrap();
        assert_eq!(v[0].verdict, Verdict::SkippedBadPrime);
        assert_eq!(v[1].verdict, Verdict::Match);
    }
}
