//! Project files: named rings, schemes, groups, actions, stacks and formulas.
//!
//! The grammar is TOML; see `docs/project-format.md`. Names not declared in
//! the file fall back to a small set of built-ins (`p5n0`, `A2`, `S3`, `BS3`, ...).

use serde::Deserialize;
use stackcount::measures::Target;
use stackcount::poly::MultiPoly;
use stackcount::ring::{FiniteField, LocalRing, RingSpec};
use stackcount::scheme::{AffineScheme, DEFAULT_SEARCH_BOUND};
use stackcount::stacks::{FiniteAction, FiniteGroup, GroupAction, QuotientStack, SpecialAction, SpecialGroup};
use std::collections::BTreeMap;
use std::path::Path;

use crate::error::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectFile {
    #[serde(default)]
    pub defaults: Defaults,
    #[serde(default)]
    pub rings: BTreeMap<String, RingDecl>,
    #[serde(default)]
    pub schemes: BTreeMap<String, SchemeDecl>,
    #[serde(default)]
    pub groups: BTreeMap<String, GroupDecl>,
    #[serde(default)]
    pub actions: BTreeMap<String, ActionDecl>,
    #[serde(default)]
    pub stacks: BTreeMap<String, StackDecl>,
    #[serde(default)]
    pub formulas: BTreeMap<String, FormulaDecl>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Defaults {
    pub max_level: u32,
    pub slack: u32,
    pub terms: usize,
    pub bound: u64,
}

impl Default for Defaults {
    fn default() -> Self {
        Defaults { max_level: 4, slack: 2, terms: 8, bound: DEFAULT_SEARCH_BOUND }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingDecl {
    pub p: u64,
    #[serde(default)]
    pub level: u32,
    #[serde(default)]
    pub eisenstein: Vec<i64>,
    pub residue_degree: Option<u32>,
    pub modulus: Option<Vec<u64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeDecl {
    pub vars: Vec<String>,
    #[serde(default)]
    pub equations: Vec<String>,
    pub dim: i64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDecl {
    /// `cyclic`, `klein`, `symmetric`, `trivial` or `table`.
    pub kind: String,
    pub n: Option<usize>,
    pub labels: Option<Vec<String>>,
    pub table: Option<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Substitutions {
    /// Finite groups: one coordinate list per group element, in label order.
    PerElement(Vec<Vec<String>>),
    /// Special groups: one polynomial per coordinate, in the scheme variables
    /// followed by the group coordinates.
    Coordinates(Vec<String>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionDecl {
    pub group: String,
    pub scheme: String,
    /// Omitted for the trivial action.
    pub substitutions: Option<Substitutions>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StackDecl {
    pub action: Option<String>,
    /// Shorthand for the classifying stack: the group acting on a point.
    pub group: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormulaDecl {
    pub text: String,
    pub target: Option<String>,
    pub dim: Option<i64>,
    pub expect: Option<String>,
    #[serde(default)]
    pub primes: Vec<u64>,
    #[serde(default)]
    pub bad_primes: Vec<u64>,
}

/// A resolved point-counting target.
#[derive(Debug, Clone)]
pub enum Resolved {
    Scheme(AffineScheme),
    Stack(QuotientStack),
}

impl Resolved {
    pub fn as_target(&self) -> Target<'_> {
        match self {
            Resolved::Scheme(x) => Target::Scheme(x),
            Resolved::Stack(s) => Target::Stack(s),
        }
    }
}

pub enum Group {
    Finite(FiniteGroup),
    Special(SpecialGroup),
}

#[derive(Debug, Default)]
pub struct Project {
    pub file: ProjectFile,
}

impl Project {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Project(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Parses and resolves every declaration, so later lookups only fail on unknown names.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: ProjectFile = toml::from_str(text).map_err(|e| CliError::Project(e.to_string()))?;
        let project = Project { file };
        project.check()?;
        Ok(project)
    }

    fn check(&self) -> Result<(), CliError> {
        for name in self.file.schemes.keys() {
            if self.file.stacks.contains_key(name) {
                return Err(CliError::Project(format!("'{name}' names both a scheme and a stack")));
            }
        }
        for name in self.file.rings.keys() {
            self.ring(name)?;
        }
        for name in self.file.schemes.keys() {
            self.scheme(name)?;
        }
        for name in self.file.groups.keys() {
            self.group(name)?;
        }
        for name in self.file.actions.keys() {
            self.action(name)?;
        }
        for name in self.file.stacks.keys() {
            self.stack(name)?;
        }
        for (name, f) in &self.file.formulas {
            if let Some(t) = &f.target {
                self.target(t).map_err(|e| CliError::Project(format!("formula '{name}': {e}")))?;
            }
        }
        Ok(())
    }

    pub fn defaults(&self) -> &Defaults {
        &self.file.defaults
    }

    pub fn ring(&self, name: &str) -> Result<LocalRing, CliError> {
        let spec = match self.file.rings.get(name) {
            Some(d) => {
                let mut spec = if d.eisenstein.is_empty() {
                    RingSpec::unramified(d.p, d.level)
                } else {
                    RingSpec::eisenstein(d.p, d.eisenstein.clone(), d.level)
                };
                if let Some(r) = d.residue_degree {
                    spec = spec.with_residue_degree(r);
                }
                if let Some(m) = &d.modulus {
                    spec = spec.with_modulus(m.clone());
                }
                spec
            }
            None => builtin_ring(name).ok_or_else(|| unknown("ring", name))?,
        };
        LocalRing::new(spec).map_err(|e| CliError::Project(format!("ring '{name}': {e}")))
    }

    /// `q=<prime power>` or a ring name.
    pub fn field(&self, spec: &str) -> Result<LocalRing, CliError> {
        match spec.strip_prefix("q=") {
            Some(q) => {
                let q: u64 = q.parse().map_err(|_| CliError::Usage(format!("bad field size '{q}'")))?;
                let f = FiniteField::of_size(q).map_err(|e| CliError::Usage(e.to_string()))?;
                Ok(f.ring().clone())
            }
            None => self.ring(spec),
        }
    }

    pub fn scheme(&self, name: &str) -> Result<AffineScheme, CliError> {
        match self.file.schemes.get(name) {
            Some(d) => {
                let vars: Vec<&str> = d.vars.iter().map(String::as_str).collect();
                let eqs: Vec<&str> = d.equations.iter().map(String::as_str).collect();
                AffineScheme::parse(name, &vars, &eqs, d.dim)
                    .map_err(|e| CliError::Project(format!("scheme '{name}': {e}")))
            }
            None => builtin_scheme(name).ok_or_else(|| unknown("scheme", name)),
        }
    }

    pub fn group(&self, name: &str) -> Result<Group, CliError> {
        let Some(d) = self.file.groups.get(name) else {
            return builtin_group(name).ok_or_else(|| unknown("group", name));
        };
        let err = |msg: String| CliError::Project(format!("group '{name}': {msg}"));
        let need_n = || d.n.ok_or_else(|| err(format!("kind '{}' needs n", d.kind)));
        let g = match d.kind.as_str() {
            "trivial" => FiniteGroup::trivial(),
            "cyclic" => FiniteGroup::cyclic(need_n()?.max(1)),
            "klein" => FiniteGroup::klein(),
            "symmetric" => {
                let n = need_n()?;
                if !(1..=5).contains(&n) {
                    return Err(err("symmetric groups are supported for 1 <= n <= 5".into()));
                }
                FiniteGroup::symmetric(n)
            }
            "table" => {
                let table = d.table.clone().ok_or_else(|| err("kind 'table' needs table".into()))?;
                let labels = d.labels.clone().unwrap_or_else(|| (0..table.len()).map(|i| i.to_string()).collect());
                FiniteGroup::from_table(name, labels, table).map_err(|e| err(e.to_string()))?
            }
            other => return Err(err(format!("unknown kind '{other}'"))),
        };
        Ok(Group::Finite(g))
    }

    pub fn action(&self, name: &str) -> Result<GroupAction, CliError> {
        let d = self.file.actions.get(name).ok_or_else(|| unknown("action", name))?;
        let err = |msg: String| CliError::Project(format!("action '{name}': {msg}"));
        let scheme = self.scheme(&d.scheme)?;
        match (self.group(&d.group)?, &d.substitutions) {
            (Group::Finite(g), None) => Ok(GroupAction::Finite(FiniteAction::trivial(g, scheme))),
            (Group::Special(g), None) => Ok(GroupAction::Special(SpecialAction::trivial(g, scheme))),
            (Group::Finite(g), Some(Substitutions::PerElement(rows))) => {
                let subs = rows
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|s| MultiPoly::parse(s, scheme.vars()).map_err(|e| err(format!("'{s}': {e}"))))
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                FiniteAction::new(g, scheme, subs).map(GroupAction::Finite).map_err(|e| err(e.to_string()))
            }
            (Group::Special(g), Some(Substitutions::Coordinates(subs))) => {
                let subs: Vec<&str> = subs.iter().map(String::as_str).collect();
                SpecialAction::parse(g, scheme, &subs).map(GroupAction::Special).map_err(|e| err(e.to_string()))
            }
            (Group::Finite(_), Some(_)) => Err(err("finite groups need one substitution list per element".into())),
            (Group::Special(_), Some(_)) => Err(err("special groups need one substitution per coordinate".into())),
        }
    }

    pub fn stack(&self, name: &str) -> Result<QuotientStack, CliError> {
        let Some(d) = self.file.stacks.get(name) else {
            return self.builtin_stack(name).ok_or_else(|| unknown("stack", name));
        };
        let action = match (&d.action, &d.group) {
            (Some(a), None) => self.action(a)?,
            (None, Some(g)) => self.classifying(g)?,
            _ => return Err(CliError::Project(format!("stack '{name}': give exactly one of action, group"))),
        };
        Ok(QuotientStack::new(name, action))
    }

    fn classifying(&self, group: &str) -> Result<GroupAction, CliError> {
        let pt = builtin_scheme("pt").expect("point");
        Ok(match self.group(group)? {
            Group::Finite(g) => GroupAction::Finite(FiniteAction::trivial(g, pt)),
            Group::Special(g) => GroupAction::Special(SpecialAction::trivial(g, pt)),
        })
    }

    /// `B<group>` for any resolvable group name.
    fn builtin_stack(&self, name: &str) -> Option<QuotientStack> {
        let group = name.strip_prefix('B')?;
        self.classifying(group).ok().map(|a| QuotientStack::new(name, a))
    }

    /// Project schemes, then project stacks, then built-in schemes and stacks.
    pub fn target(&self, name: &str) -> Result<Resolved, CliError> {
        if self.file.schemes.contains_key(name) {
            return self.scheme(name).map(Resolved::Scheme);
        }
        if self.file.stacks.contains_key(name) {
            return self.stack(name).map(Resolved::Stack);
        }
        if let Some(x) = builtin_scheme(name) {
            return Ok(Resolved::Scheme(x));
        }
        self.builtin_stack(name).map(Resolved::Stack).ok_or_else(|| unknown("target", name))
    }

    pub fn formula(&self, name: &str) -> Option<&FormulaDecl> {
        self.file.formulas.get(name)
    }
}

fn unknown(kind: &str, name: &str) -> CliError {
    CliError::Project(format!("unknown {kind} '{name}'"))
}

/// `p<P>n<N>` with an optional `r<R>` suffix, or `F<q>` for a finite field.
fn builtin_ring(name: &str) -> Option<RingSpec> {
    if let Some(q) = name.strip_prefix('F') {
        let f = FiniteField::of_size(q.parse().ok()?).ok()?;
        return Some(f.ring().spec().clone());
    }
    let rest = name.strip_prefix('p')?;
    let (p, rest) = rest.split_once('n')?;
    let (level, r) = match rest.split_once('r') {
        Some((n, r)) => (n, r.parse().ok()?),
        None => (rest, 1),
    };
    Some(RingSpec::unramified(p.parse().ok()?, level.parse().ok()?).with_residue_degree(r))
}

/// `pt`, and `A<d>` with coordinates `x, y, z` up to dimension 3.
fn builtin_scheme(name: &str) -> Option<AffineScheme> {
    if name == "pt" {
        return AffineScheme::new("pt", vec![], vec![], 0).ok();
    }
    let d: usize = name.strip_prefix('A')?.parse().ok()?;
    if d <= 3 {
        let vars = ["x", "y", "z"][..d].to_vec();
        AffineScheme::parse(name, &vars, &[], d as i64).ok()
    } else {
        Some(AffineScheme::affine_space(d))
    }
}

/// `Z<n>`/`C<n>`, `V4`, `S<n>` (n <= 5), `Ga`, `Gm`, `GL<k>`.
fn builtin_group(name: &str) -> Option<Group> {
    if let Some(g) = SpecialGroup::parse(name) {
        return Some(Group::Special(g));
    }
    if name == "V4" || name == "Klein" {
        return Some(Group::Finite(FiniteGroup::klein()));
    }
    let (kind, n) = name.split_at(1);
    let n: usize = n.parse().ok().filter(|&n| n >= 1)?;
    match kind {
        "Z" | "C" => Some(Group::Finite(FiniteGroup::cyclic(n))),
        "S" if n <= 5 => Some(Group::Finite(FiniteGroup::symmetric(n))),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[rings.p5n0]
p = 5

[schemes.X_conic]
vars = ["x", "y"]
equations = ["x^2 + y^2 - 1"]
dim = 1

[groups.C2]
kind = "cyclic"
n = 2

[actions.flip]
group = "C2"
scheme = "X_conic"
substitutions = [["x", "y"], ["-x", "y"]]

[stacks.conic_mod_flip]
action = "flip"
"#;

    #[test]
    fn resolves_declarations_and_builtins() {
        let p = Project::parse(SAMPLE).unwrap();
        assert_eq!(p.ring("p5n0").unwrap().q(), 5);
        assert_eq!(p.ring("p3n2").unwrap().size(), 27);
        assert_eq!(p.ring("p2n0r2").unwrap().q(), 4);
        assert!(matches!(p.target("X_conic").unwrap(), Resolved::Scheme(_)));
        assert!(matches!(p.target("conic_mod_flip").unwrap(), Resolved::Stack(_)));
        assert!(matches!(p.target("BS3").unwrap(), Resolved::Stack(_)));
        assert!(matches!(p.target("BGm").unwrap(), Resolved::Stack(_)));
        assert_eq!(p.scheme("A2").unwrap().vars(), ["x", "y"]);
        assert_eq!(p.field("q=25").unwrap().q(), 25);
    }

    #[test]
    fn rejects_dangling_references_and_unknown_keys() {
        let bad = SAMPLE.replace("scheme = \"X_conic\"", "scheme = \"nowhere\"");
        assert!(matches!(Project::parse(&bad), Err(CliError::Project(_))));
        assert!(Project::parse("[rings.r]\np = 5\nlevle = 2\n").is_err());
        assert!(Project::parse("[rings.r]\np = 6\n").is_err());
        assert!(Project::parse("[groups.g]\nkind = \"table\"\ntable = [[0, 1], [0, 1]]\n").is_err());
        assert!(Project::parse("[stacks.s]\n").is_err());
    }
}
