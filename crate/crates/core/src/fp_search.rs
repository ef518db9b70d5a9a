//! Point search over a prime field by successive partial evaluation: each
//! assigned coordinate is substituted into the pending generators, so large
//! generators shrink before the deep levels of the search.

use crate::poly::MultiPoly;
use crate::ring::pow_mod_u64;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use smallvec::SmallVec;
use std::collections::HashMap;
use std::sync::Arc;

type Exps = SmallVec<[u32; 12]>;

#[derive(Debug)]
struct SparsePoly {
    terms: Vec<(Exps, u64)>,
    /// Sorted variables with a positive exponent somewhere.
    support: SmallVec<[usize; 12]>,
}

impl SparsePoly {
    fn from_terms(p: u64, nvars: usize, terms: HashMap<Exps, u64>) -> Self {
        let terms: Vec<(Exps, u64)> = terms.into_iter().filter(|(_, c)| c % p != 0).collect();
        let support = (0..nvars).filter(|&i| terms.iter().any(|(m, _)| m[i] > 0)).collect();
        SparsePoly { terms, support }
    }

    fn constant(&self) -> u64 {
        self.terms.iter().map(|(_, c)| *c).sum::<u64>()
    }

    fn specialize(&self, p: u64, var: usize, value: u64) -> SparsePoly {
        let mut acc: HashMap<Exps, u64> = HashMap::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let e = m[var];
            let factor = if e == 0 { 1 } else { pow_mod_u64(value, e as u64, p) };
            if factor == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2[var] = 0;
            let slot = acc.entry(m2).or_insert(0);
            *slot = ((*slot as u128 + *c as u128 * factor as u128) % p as u128) as u64;
        }
        let nvars = self.terms.first().map_or(0, |(m, _)| m.len());
        SparsePoly::from_terms(p, nvars, acc)
    }
}

pub(crate) struct FpSearch {
    p: u64,
    nvars: usize,
    polys: Vec<Arc<SparsePoly>>,
    empty: bool,
}

impl FpSearch {
    pub(crate) fn new(p: u64, nvars: usize, generators: &[MultiPoly]) -> Self {
        let pb = BigInt::from(p);
        let mut polys = Vec::new();
        let mut empty = false;
        for g in generators {
            let mut terms: HashMap<Exps, u64> = HashMap::new();
            for (m, c) in g.terms() {
                let r = c.mod_floor(&pb).to_u64().expect("residue fits");
                *terms.entry(m.iter().copied().collect()).or_insert(0) += r;
            }
            let sp = SparsePoly::from_terms(p, nvars, terms);
            if sp.support.is_empty() {
                if !sp.constant().is_multiple_of(p) {
                    empty = true;
                }
            } else {
                polys.push(Arc::new(sp));
            }
        }
        FpSearch { p, nvars, polys, empty }
    }

    pub(crate) fn search(&self, visit: &mut dyn FnMut(&[u64])) {
        if self.empty {
            return;
        }
        if self.nvars == 0 {
            visit(&[]);
            return;
        }
        let mut current = vec![0u64; self.nvars];
        self.dfs(0, &self.polys, &mut current, visit);
    }

    fn dfs(&self, i: usize, pending: &[Arc<SparsePoly>], current: &mut Vec<u64>, visit: &mut dyn FnMut(&[u64])) {
        'values: for v in 0..self.p {
            current[i] = v;
            let mut next: Vec<Arc<SparsePoly>> = Vec::with_capacity(pending.len());
            for poly in pending {
                if poly.support.first() != Some(&i) {
                    next.push(poly.clone());
                    continue;
                }
                let s = poly.specialize(self.p, i, v);
                if s.support.is_empty() {
                    if s.constant() % self.p != 0 {
                        continue 'values;
                    }
                } else {
                    next.push(Arc::new(s));
                }
            }
            if i + 1 == self.nvars {
                visit(current);
            } else {
                self.dfs(i + 1, &next, current, visit);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_conic_over_f5() {
        let vars: Vec<String> = vec!["x".into(), "y".into()];
        let f = MultiPoly::parse("x^2 + y^2 - 1", &vars).unwrap();
        let s = FpSearch::new(5, 2, &[f]);
        let mut n = 0;
        s.search(&mut |_| n += 1);
        assert_eq!(n, 4);
    }

    #[test]
    fn constant_generators() {
        let s = FpSearch::new(3, 1, &[MultiPoly::constant(1, 3)]);
        let mut n = 0;
        s.search(&mut |_| n += 1);
        assert_eq!(n, 3);
        let s = FpSearch::new(3, 1, &[MultiPoly::constant(1, 1)]);
        let mut n = 0;
        s.search(&mut |_| n += 1);
        assert_eq!(n, 0);
    }
}
