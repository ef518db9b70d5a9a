use stackcount::definable::{
    measure_formula, parse_formula, specialize_primes, Formula, PrimeVerdict, QExpression, Verdict,
};
use stackcount::greenberg::greenberg_transform_ring;
use stackcount::measures::{padic_measure, rational_fit, series, SeriesKind, HELD_OUT, NORMALIZATION};
use stackcount::rational::format_rational;
use stackcount::ring::LocalRing;
use stackcount::scheme::count_points_bounded;
use stackcount::stacks::GroupAction;
use stackcount::witt::structure_polynomials;
use std::fmt;

use crate::error::CliError;
use crate::project::{Project, Resolved};

/// Plain `key: value` lines, always in the order they were added.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    lines: Vec<String>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report { lines: vec![format!("command: {command}"), format!("normalization: {NORMALIZATION}")] }
    }

    pub fn kv(&mut self, key: &str, value: impl fmt::Display) {
        self.lines.push(format!("{key}: {value}"));
    }

    pub fn extend(&mut self, lines: impl IntoIterator<Item = String>) {
        self.lines.extend(lines);
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            writeln!(f, "{l}")?;
        }
        Ok(())
    }
}

/// A report plus whether every number in it is final.
pub struct Outcome {
    pub report: Report,
    pub complete: bool,
}

impl From<Report> for Outcome {
    fn from(report: Report) -> Self {
        Outcome { report, complete: true }
    }
}

fn header(report: &mut Report, target: &Resolved, ring: &LocalRing) {
    let t = target.as_target();
    report.kv("target", t.name());
    report.kv("kind", if matches!(target, Resolved::Scheme(_)) { "scheme" } else { "stack" });
    report.kv("ring", ring.spec());
}

pub fn count(project: &Project, target: &str, ring: &str, bound: Option<u64>) -> Result<Outcome, CliError> {
    let target = project.target(target)?;
    let ring = project.ring(ring)?;
    let mut r = Report::new("count");
    header(&mut r, &target, &ring);
    match &target {
        Resolved::Scheme(x) => {
            let bound = bound.unwrap_or(project.defaults().bound);
            r.kv("count", count_points_bounded(x, &ring, bound)?);
        }
        Resolved::Stack(s) => r.kv("count", format_rational(&s.count(&ring)?)),
    }
    Ok(r.into())
}

pub fn series_cmd(
    project: &Project,
    target: &str,
    ring: &str,
    kind: SeriesKind,
    terms: Option<usize>,
    fit: bool,
) -> Result<Outcome, CliError> {
    let target = project.target(target)?;
    let ring = project.ring(ring)?;
    let d = project.defaults();
    let table = series(target.as_target(), &ring, kind, terms.unwrap_or(d.terms), d.slack)?;
    let mut r = Report::new("series");
    header(&mut r, &target, &ring);
    r.kv("series", kind.name());
    r.kv("terms", table.coefficients.len());
    for (i, c) in table.coefficients.iter().enumerate() {
        r.kv(&format!("c_{i}"), c);
    }
    let exact = table.exact_coefficients();
    if fit {
        match &exact {
            Some(c) => match rational_fit(c) {
                Ok(f) => {
                    r.kv("fit", f);
                    r.kv("held_out", HELD_OUT);
                }
                Err(e) => r.kv("fit", format!("none ({e})")),
            },
            None => r.kv("fit", "none (some coefficients are only bounded)"),
        }
    }
    Ok(Outcome { report: r, complete: exact.is_some() })
}

/// A formula named in the project, or formula text.
struct FormulaArgs {
    text: String,
    target: Option<String>,
    dim: Option<i64>,
    expect: Option<String>,
    primes: Vec<u64>,
    bad_primes: Vec<u64>,
}

fn formula_args(project: &Project, set: &str) -> FormulaArgs {
    match project.formula(set) {
        Some(f) => FormulaArgs {
            text: f.text.clone(),
            target: f.target.clone(),
            dim: f.dim,
            expect: f.expect.clone(),
            primes: f.primes.clone(),
            bad_primes: f.bad_primes.clone(),
        },
        None => FormulaArgs {
            text: set.to_string(),
            target: None,
            dim: None,
            expect: None,
            primes: Vec::new(),
            bad_primes: Vec::new(),
        },
    }
}

fn resolve_target(project: &Project, flag: Option<&str>, from_formula: Option<&str>) -> Result<Resolved, CliError> {
    let name = flag.or(from_formula).ok_or_else(|| CliError::Usage("--target is required".into()))?;
    project.target(name)
}

fn compile(text: &str, target: &Resolved) -> Result<Formula, CliError> {
    Ok(parse_formula(text, target.as_target().scheme().vars())?)
}

pub fn measure(
    project: &Project,
    target: Option<&str>,
    ring: &str,
    set: Option<&str>,
    dim: Option<i64>,
    max_level: Option<u32>,
) -> Result<Outcome, CliError> {
    let ring = project.ring(ring)?;
    let max_level = max_level.unwrap_or(project.defaults().max_level);
    let mut r = Report::new("measure");
    let result = match set {
        None => {
            let target = resolve_target(project, target, None)?;
            header(&mut r, &target, &ring);
            r.kv("dimension", target.as_target().dim());
            padic_measure(target.as_target(), &ring, max_level)?
        }
        Some(set) => {
            let args = formula_args(project, set);
            let target = resolve_target(project, target, args.target.as_deref())?;
            let formula = compile(&args.text, &target)?;
            let d = dim.or(args.dim).unwrap_or(target.as_target().dim());
            header(&mut r, &target, &ring);
            r.kv("formula", formula.text());
            r.kv("dimension", d);
            measure_formula(&formula, target.as_target(), &ring, d, max_level)?
        }
    };
    r.kv("max_level", max_level);
    r.extend(result.report_lines());
    Ok(Outcome { report: r, complete: result.is_stabilized() })
}

pub fn greenberg(
    project: &Project,
    target: &str,
    ring: &str,
    level: Option<u32>,
    emit_equations: bool,
) -> Result<Outcome, CliError> {
    let x = project.scheme(target)?;
    let mut ring = project.ring(ring)?;
    if let Some(n) = level {
        ring = ring.at_level(n);
    }
    let gr = greenberg_transform_ring(&x, &ring)?;
    let bound = project.defaults().bound;
    let mut r = Report::new("greenberg");
    header(&mut r, &Resolved::Scheme(x.clone()), &ring);
    r.kv("level", ring.level());
    r.kv("variables", gr.scheme().vars().join(" "));
    r.kv("equations", gr.scheme().generators().len());
    if emit_equations {
        for eq in gr.scheme().format_generators() {
            r.kv("equation", eq);
        }
    }
    let over_field = count_points_bounded(gr.scheme(), &gr.field(), bound)?;
    let over_ring = count_points_bounded(&x, &ring, bound)?;
    r.kv("transform_count", over_field);
    r.kv("ring_count", over_ring);
    r.kv("equal", over_field == over_ring);
    Ok(r.into())
}

pub fn singular(project: &Project, target: &str, ring: Option<&str>) -> Result<Outcome, CliError> {
    let x = project.scheme(target)?;
    let sing = x.singular_locus()?;
    let mut r = Report::new("singular");
    r.kv("target", x.name());
    r.kv("vars", x.vars().join(" "));
    r.kv("generators", sing.generators().len());
    for g in sing.format_generators() {
        r.kv("equation", g);
    }
    if let Some(ring) = ring {
        let ring = project.ring(ring)?;
        r.kv("ring", ring.spec());
        r.kv("count", count_points_bounded(&sing, &ring, project.defaults().bound)?);
    }
    Ok(r.into())
}

pub fn witt(p: u64, len: usize, emit_polys: bool) -> Result<Outcome, CliError> {
    let polys = structure_polynomials(p, len)?;
    let names = polys.variable_names();
    let mut r = Report::new("witt");
    r.kv("p", p);
    r.kv("length", len);
    r.kv("variables", names.join(" "));
    for i in 0..len {
        if emit_polys {
            r.kv(&format!("S_{i}"), polys.sum(i).format(&names));
            r.kv(&format!("P_{i}"), polys.prod(i).format(&names));
        } else {
            r.kv(&format!("S_{i}_terms"), polys.sum(i).num_terms());
            r.kv(&format!("P_{i}_terms"), polys.prod(i).num_terms());
        }
    }
    Ok(r.into())
}

pub fn stack_count(project: &Project, stack: &str, field: &str) -> Result<Outcome, CliError> {
    let s = project.stack(stack)?;
    let ring = project.field(field)?;
    let mut r = Report::new("stack-count");
    header(&mut r, &Resolved::Stack(s.clone()), &ring);
    let method = match s.action() {
        GroupAction::Finite(a) => {
            r.kv("group", a.group().name());
            r.kv("group_order", a.group().order());
            "twisted sectors"
        }
        GroupAction::Special(a) => {
            r.kv("group", a.group().name());
            r.kv("group_order", a.group().order(&ring));
            "points over group order"
        }
    };
    r.kv("method", method);
    r.kv("count", format_rational(&s.count(&ring)?));
    Ok(r.into())
}

pub struct SpecializeArgs<'a> {
    pub set: &'a str,
    pub target: Option<&'a str>,
    pub primes: Vec<u64>,
    pub bad_primes: Vec<u64>,
    pub expect: Option<&'a str>,
    pub dim: Option<i64>,
    pub max_level: Option<u32>,
}

pub fn specialize(project: &Project, a: SpecializeArgs<'_>) -> Result<Outcome, CliError> {
    let args = formula_args(project, a.set);
    let target = resolve_target(project, a.target, args.target.as_deref())?;
    let formula = compile(&args.text, &target)?;
    let expect_text =
        a.expect.map(str::to_string).or(args.expect).ok_or_else(|| CliError::Usage("--expect is required".into()))?;
    let expected = QExpression::parse(&expect_text)?;
    let primes = if !a.primes.is_empty() {
        a.primes
    } else if !args.primes.is_empty() {
        args.primes
    } else {
        vec![3, 5]
    };
    let bad = if !a.bad_primes.is_empty() { a.bad_primes } else { args.bad_primes };
    let d = a.dim.or(args.dim).unwrap_or(target.as_target().dim());
    let max_level = a.max_level.unwrap_or(project.defaults().max_level);
    let verdicts = specialize_primes(&formula, target.as_target(), d, &primes, &bad, &expected, max_level)?;
    let mut r = Report::new("specialize");
    r.kv("target", target.as_target().name());
    r.kv("formula", formula.text());
    r.kv("expected", expected.text());
    r.kv("dimension", d);
    r.kv("max_level", max_level);
    let mut complete = true;
    for PrimeVerdict { p, verdict, measure } in &verdicts {
        complete &= matches!(verdict, Verdict::Match | Verdict::SkippedBadPrime);
        match measure {
            Some(m) => r.kv(&format!("prime {p}"), format!("{verdict} measure {}", format_rational(&m.value))),
            None => r.kv(&format!("prime {p}"), verdict),
        }
    }
    Ok(Outcome { report: r, complete })
}
