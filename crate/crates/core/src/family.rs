//! Constraint families over `[q]^k` given as truth tables.
//!
//! Symbols are stored 0-based internally (`0..q`); the line-based file
//! format and all user-facing output use the 1-based alphabet `1..=q`.
//! Patterns `a ∈ [q]^k` are indexed row-major with `a_1` most significant.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintFamily {
    q: usize,
    k: usize,
    names: Vec<String>,
    tables: Vec<Vec<bool>>,
}

impl ConstraintFamily {
    pub fn new(q: usize, k: usize, functions: Vec<(String, Vec<bool>)>) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidFamily(format!("alphabet size q = {q} must be at least 2")));
        }
        if k < 1 {
            return Err(Error::InvalidFamily("arity k must be at least 1".into()));
        }
        if functions.is_empty() {
            return Err(Error::InvalidFamily("family has no functions".into()));
        }
        let width = q
            .checked_pow(k as u32)
            .filter(|w| *w <= 1 << 20)
            .ok_or_else(|| Error::InvalidFamily(format!("q^k too large for q = {q}, k = {k}")))?;
        let mut names = Vec::with_capacity(functions.len());
        let mut tables: Vec<Vec<bool>> = Vec::with_capacity(functions.len());
        for (name, table) in functions {
            if table.len() != width {
                return Err(Error::InvalidFamily(format!(
                    "table `{name}` has length {}, expected q^k = {width}",
                    table.len()
                )));
            }
            if name.is_empty() || name.contains(char::is_whitespace) {
                return Err(Error::InvalidFamily(format!("invalid function name `{name}`")));
            }
            if names.contains(&name) {
                return Err(Error::InvalidFamily(format!("duplicate function name `{name}`")));
            }
            if let Some(pos) = tables.iter().position(|t| *t == table) {
                return Err(Error::InvalidFamily(format!(
                    "function `{name}` duplicates `{}`",
                    names[pos]
                )));
            }
            names.push(name);
            tables.push(table);
        }
        Ok(Self { q, k, names, tables })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of functions `|F|`.
    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    /// `q^k`.
    pub fn num_patterns(&self) -> usize {
        self.q.pow(self.k as u32)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, f: usize) -> &str {
        &self.names[f]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn table(&self, f: usize) -> &[bool] {
        &self.tables[f]
    }

    pub fn tables(&self) -> &[Vec<bool>] {
        &self.tables
    }

    pub fn is_zero(&self, f: usize) -> bool {
        self.tables[f].iter().all(|b| !b)
    }

    /// Row-major index of a 0-based pattern.
    pub fn pattern_index(&self, pattern: &[usize]) -> usize {
        pattern_index(self.q, pattern)
    }

    /// Inverse of [`pattern_index`](Self::pattern_index).
    pub fn pattern(&self, index: usize) -> Vec<usize> {
        pattern_of(self.q, self.k, index)
    }

    pub fn eval(&self, f: usize, pattern: &[usize]) -> bool {
        self.tables[f][self.pattern_index(pattern)]
    }

    /// A family with the same alphabet and arity restricted to `subset`.
    pub fn subfamily(&self, subset: &[usize]) -> Result<Self> {
        let functions = subset
            .iter()
            .map(|&f| (self.names[f].clone(), self.tables[f].clone()))
            .collect();
        Self::new(self.q, self.k, functions)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing `q=<int> k=<int>` header".into(),
        })?;
        let mut q = None;
        let mut k = None;
        for tok in header.split_whitespace() {
            match tok.split_once('=') {
                Some(("q", v)) => q = Some(parse_usize(v, hline)?),
                Some(("k", v)) => k = Some(parse_usize(v, hline)?),
                _ => {
                    return Err(Error::Parse { line: hline, msg: format!("unexpected header token `{tok}`") })
                }
            }
        }
        let (q, k) = match (q, k) {
            (Some(q), Some(k)) => (q, k),
            _ => return Err(Error::Parse { line: hline, msg: "header must give q and k".into() }),
        };
        let mut functions = Vec::new();
        for (line, l) in lines {
            let mut toks = l.split_whitespace();
            if toks.next() != Some("f") {
                return Err(Error::Parse { line, msg: "expected `f <name> <bits>`".into() });
            }
            let name = toks
                .next()
                .ok_or_else(|| Error::Parse { line, msg: "missing function name".into() })?;
            let bits = toks
                .map(|t| match t {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    _ => Err(Error::Parse { line, msg: format!("bad bit `{t}`") }),
                })
                .collect::<Result<Vec<_>>>()?;
            functions.push((name.to_string(), bits));
        }
        Self::new(q, k, functions)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("q={} k={}\n", self.q, self.k);
        for (name, table) in self.names.iter().zip(&self.tables) {
            let _ = write!(out, "f {name}");
            for &b in table {
                out.push(' ');
                out.push(if b { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    /// Max-DICUT: `f(x, y) = 1` iff `x = 2` and `y = 1`.
    pub fn dicut() -> Self {
        Self::from_predicate(2, 2, "dicut", |a| a[0] == 1 && a[1] == 0)
    }

    /// Max-CUT: `f(x, y) = 1` iff `x ≠ y`, binary alphabet.
    pub fn max_cut() -> Self {
        Self::qcol(2)
    }

    /// Max-qCol: the single inequality predicate over `[q]^2`.
    pub fn qcol(q: usize) -> Self {
        Self::from_predicate(q, 2, "neq", |a| a[0] != a[1])
    }

    /// Max-qUG: one function per bijection `π` of `[q]`, `f_π(x, y) = 1` iff `y = π(x)`.
    pub fn qug(q: usize) -> Self {
        let mut functions = Vec::new();
        for perm in permutations(q) {
            let mut table = vec![false; q * q];
            for (x, &y) in perm.iter().enumerate() {
                table[x * q + y] = true;
            }
            let name = format!(
                "ug_{}",
                perm.iter().map(|s| (s + 1).to_string()).collect::<Vec<_>>().join("")
            );
            functions.push((name, table));
        }
        Self::new(q, 2, functions).expect("bijection family is valid")
    }

    /// AND pinned to the constant symbol `sigma` (0-based): `f(a) = 1` iff `a = sigma^k`.
    pub fn constant_and(q: usize, k: usize, sigma: usize) -> Self {
        Self::from_predicate(q, k, "and", |a| a.iter().all(|&s| s == sigma))
    }

    pub fn constant_one(q: usize, k: usize) -> Self {
        Self::from_predicate(q, k, "one", |_| true)
    }

    pub fn zero(q: usize, k: usize) -> Self {
        Self::from_predicate(q, k, "zero", |_| false)
    }

    pub fn from_predicate(q: usize, k: usize, name: &str, pred: impl Fn(&[usize]) -> bool) -> Self {
        let width = q.pow(k as u32);
        let table = (0..width).map(|i| pred(&pattern_of(q, k, i))).collect();
        Self::new(q, k, vec![(name.to_string(), table)]).expect("predicate family is valid")
    }
}

pub(crate) fn pattern_index(q: usize, pattern: &[usize]) -> usize {
    pattern.iter().fold(0, |acc, &s| acc * q + s)
}

pub(crate) fn pattern_of(q: usize, k: usize, mut index: usize) -> Vec<usize> {
    let mut out = vec![0; k];
    for slot in out.iter_mut().rev() {
        *slot = index % q;
        index /= q;
    }
    out
}

fn permutations(q: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for s in 0..used.len() {
            if !used[s] {
                used[s] = true;
                prefix.push(s);
                rec(prefix, used, out);
                prefix.pop();
                used[s] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; q], &mut out);
    out
}

pub(crate) fn parse_usize(s: &str, line: usize) -> Result<usize> {
    s.parse().map_err(|_| Error::Parse { line, msg: format!("expected a non-negative integer, got `{s}`") })
}

pub(crate) fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.parse().map_err(|_| Error::Parse { line, msg: format!("expected a number, got `{s}`") })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dicut_table_is_row_major() {
        let f = ConstraintFamily::dicut();
        assert_eq!(f.table(0), &[false, false, true, false]);
        assert!(f.eval(0, &[1, 0]));
        assert!(!f.eval(0, &[0, 0]));
    }

    #[test]
    fn pattern_index_roundtrip() {
        for i in 0..27 {
            assert_eq!(pattern_index(3, &pattern_of(3, 3, i)), i);
        }
        assert_eq!(pattern_of(3, 2, 5), vec![1, 2]);
    }

    #[test]
    fn rejects_bad_families() {
        assert!(ConstraintFamily::new(2, 2, vec![]).is_err());
        assert!(ConstraintFamily::new(2, 2, vec![("a".into(), vec![true; 3])]).is_err());
        let dup = vec![("a".into(), vec![true, false, false, true]), ("b".into(), vec![true, false, false, true])];
        assert!(matches!(ConstraintFamily::new(2, 2, dup), Err(Error::InvalidFamily(_))));
        assert!(ConstraintFamily::new(1, 2, vec![("a".into(), vec![true])]).is_err());
    }

    #[test]
    fn ug_family_has_all_bijections() {
        let f = ConstraintFamily::qug(3);
        assert_eq!(f.len(), 6);
        for t in f.tables() {
            assert_eq!(t.iter().filter(|b| **b).count(), 3);
        }
    }

    #[test]
    fn text_roundtrip() {
        let f = ConstraintFamily::qug(3);
        let text = f.to_text();
        let g = ConstraintFamily::parse(&text).unwrap();
        assert_eq!(f, g);
        assert_eq!(g.to_text(), text);
    }

    #[test]
    fn parse_errors_carry_line() {
        let err = ConstraintFamily::parse("q=2 k=2\nf a 0 0 1\n").unwrap_err();
        assert!(matches!(err, Error::InvalidFamily(_)));
        let err = ConstraintFamily::parse("q=2 k=2\nf b 0 2 0 0\n").unwrap_err();
        assert_eq!(err, Error::Parse { line: 2, msg: "bad bit `2`".into() });
    }
}
