//! Max-CSP instances, assignments, values and exact/heuristic optimization.

use std::fmt::Write as _;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{parse_f64, parse_usize, ConstraintFamily};
use crate::rng::{child_seed, rng_from};

/// Default cap on `q^n` for exact enumeration.
pub const DEFAULT_ENUM_BUDGET: u64 = 1 << 24;

/// A constraint `(f, j)`: function index plus `k` distinct 0-based variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Constraint {
    pub f: usize,
    pub vars: Vec<usize>,
}

impl Constraint {
    pub fn new(f: usize, vars: Vec<usize>) -> Self {
        Self { f, vars }
    }

    pub fn validate(&self, family: &ConstraintFamily, n: usize) -> Result<()> {
        if self.f >= family.len() {
            return Err(Error::FunctionIndex { index: self.f, len: family.len() });
        }
        if self.vars.len() != family.k() {
            return Err(Error::Shape(format!(
                "constraint has {} variables, family arity is {}",
                self.vars.len(),
                family.k()
            )));
        }
        for (i, &v) in self.vars.iter().enumerate() {
            if v >= n {
                return Err(Error::VariableIndex { index: v, n });
            }
            if self.vars[..i].contains(&v) {
                return Err(Error::RepeatedVariable(v));
            }
        }
        Ok(())
    }
}

/// An assignment `b ∈ [q]^n`, 0-based symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment(pub Vec<usize>);

impl Assignment {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn restrict(&self, vars: &[usize]) -> Vec<usize> {
        vars.iter().map(|&v| self.0[v]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub n: usize,
    pub constraints: Vec<Constraint>,
    pub weights: Vec<f64>,
}

impl Instance {
    pub fn new(family: &ConstraintFamily, n: usize, constraints: Vec<Constraint>, weights: Vec<f64>) -> Result<Self> {
        if constraints.len() != weights.len() {
            return Err(Error::Shape(format!(
                "{} constraints but {} weights",
                constraints.len(),
                weights.len()
            )));
        }
        for c in &constraints {
            c.validate(family, n)?;
        }
        if let Some(&w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidWeight(w));
        }
        Ok(Self { n, constraints, weights })
    }

    /// Unit weights on every constraint.
    pub fn unweighted(family: &ConstraintFamily, n: usize, constraints: Vec<Constraint>) -> Result<Self> {
        let w = vec![1.0; constraints.len()];
        Self::new(family, n, constraints, w)
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Total weight, or `EmptyInstance` when there is nothing to normalize by.
    pub(crate) fn positive_total_weight(&self) -> Result<f64> {
        let w = self.total_weight();
        if self.is_empty() || w <= 0.0 {
            return Err(Error::EmptyInstance);
        }
        Ok(w)
    }

    pub fn parse(family: &ConstraintFamily, text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines
            .next()
            .ok_or(Error::Parse { line: 1, msg: "missing `n=<int>` header".into() })?;
        let n = match header.split_once('=') {
            Some(("n", v)) => parse_usize(v.trim(), hline)?,
            _ => return Err(Error::Parse { line: hline, msg: "expected `n=<int>` header".into() }),
        };
        let k = family.k();
        let mut constraints = Vec::new();
        let mut weights = Vec::new();
        for (line, l) in lines {
            let toks: Vec<&str> = l.split_whitespace().collect();
            if toks.first() != Some(&"c") || toks.len() != k + 3 {
                return Err(Error::Parse { line, msg: format!("expected `c <f_name> <j1> .. <j{k}> <weight>`") });
            }
            let f = family
                .index_of(toks[1])
                .ok_or_else(|| Error::Parse { line, msg: format!("unknown function `{}`", toks[1]) })?;
            let vars = parse_vars(&toks[2..2 + k], line)?;
            constraints.push(Constraint::new(f, vars));
            weights.push(parse_f64(toks[k + 2], line)?);
        }
        Self::new(family, n, constraints, weights)
    }

    pub fn to_text(&self, family: &ConstraintFamily) -> String {
        let mut out = format!("n={}\n", self.n);
        for (c, w) in self.constraints.iter().zip(&self.weights) {
            let _ = write!(out, "c {}", family.name(c.f));
            for v in &c.vars {
                let _ = write!(out, " {}", v + 1);
            }
            let _ = writeln!(out, " {w:?}");
        }
        out
    }
}

/// Parses 1-based variable indices into 0-based ones.
pub(crate) fn parse_vars(toks: &[&str], line: usize) -> Result<Vec<usize>> {
    toks.iter()
        .map(|t| {
            let v = parse_usize(t, line)?;
            v.checked_sub(1)
                .ok_or_else(|| Error::Parse { line, msg: "variable indices are 1-based".into() })
        })
        .collect()
}

pub fn eval_constraint(family: &ConstraintFamily, c: &Constraint, b: &Assignment) -> Result<bool> {
    c.validate(family, b.len())?;
    for &s in &b.0 {
        if s >= family.q() {
            return Err(Error::Symbol { symbol: s + 1, q: family.q() });
        }
    }
    Ok(family.eval(c.f, &b.restrict(&c.vars)))
}

/// Weighted fraction of satisfied constraints.
pub fn value(family: &ConstraintFamily, inst: &Instance, b: &Assignment) -> Result<f64> {
    let w = inst.positive_total_weight()?;
    if b.len() != inst.n {
        return Err(Error::Shape(format!("assignment has length {}, instance has n = {}", b.len(), inst.n)));
    }
    let mut sat = 0.0;
    for (c, &wi) in inst.constraints.iter().zip(&inst.weights) {
        if eval_constraint(family, c, b)? {
            sat += wi;
        }
    }
    Ok(sat / w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OptMode {
    /// Enumerate all of `[q]^n`; refused when `q^n > budget`.
    Exact { budget: u64 },
    /// Multistart greedy single-variable local search.
    Heuristic { restarts: usize, seed: u64 },
}

impl OptMode {
    pub fn exact() -> Self {
        OptMode::Exact { budget: DEFAULT_ENUM_BUDGET }
    }

    pub fn heuristic(seed: u64) -> Self {
        OptMode::Heuristic { restarts: 50, seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub value: f64,
    pub witness: Assignment,
}

/// `max_b val(b)`. Exact mode returns the lexicographically smallest maximizer.
pub fn opt_value(family: &ConstraintFamily, inst: &Instance, mode: OptMode) -> Result<OptResult> {
    let w = inst.positive_total_weight()?;
    if inst.n == 0 {
        let b = Assignment(vec![]);
        return Ok(OptResult { value: value(family, inst, &b)?, witness: b });
    }
    let eval = Evaluator::new(family, inst);
    match mode {
        OptMode::Exact { budget } => {
            let needed = (family.q() as f64).powi(inst.n as i32);
            if needed > budget as f64 {
                return Err(Error::EnumerationBudget { needed, budget });
            }
            let (sat, b) = eval.enumerate();
            Ok(OptResult { value: sat / w, witness: Assignment(b) })
        }
        OptMode::Heuristic { restarts, seed } => {
            let mut best: Option<(f64, Vec<usize>)> = None;
            for r in 0..restarts.max(1) {
                let mut rng = rng_from(child_seed(seed, r as u64));
                let start: Vec<usize> = (0..inst.n).map(|_| rng.gen_range(0..family.q())).collect();
                let (sat, b) = eval.local_search(start);
                if best.as_ref().is_none_or(|(s, _)| sat > *s + 1e-12 * w) {
                    best = Some((sat, b));
                }
            }
            let (sat, b) = best.expect("at least one restart");
            Ok(OptResult { value: sat / w, witness: Assignment(b) })
        }
    }
}

/// Incidence-based satisfied-weight bookkeeping shared by both optimizers.
struct Evaluator<'a> {
    family: &'a ConstraintFamily,
    inst: &'a Instance,
    incident: Vec<Vec<usize>>,
}

impl<'a> Evaluator<'a> {
    fn new(family: &'a ConstraintFamily, inst: &'a Instance) -> Self {
        let mut incident = vec![Vec::new(); inst.n];
        for (ci, c) in inst.constraints.iter().enumerate() {
            for &v in &c.vars {
                incident[v].push(ci);
            }
        }
        Self { family, inst, incident }
    }

    fn sat(&self, ci: usize, b: &[usize]) -> bool {
        let c = &self.inst.constraints[ci];
        let q = self.family.q();
        let idx = c.vars.iter().fold(0, |acc, &v| acc * q + b[v]);
        self.family.table(c.f)[idx]
    }

    fn total(&self, b: &[usize]) -> f64 {
        (0..self.inst.len())
            .filter(|&ci| self.sat(ci, b))
            .map(|ci| self.inst.weights[ci])
            .sum()
    }

    /// Odometer enumeration, last variable fastest; keeps the first strict maximum.
    fn enumerate(&self) -> (f64, Vec<usize>) {
        let n = self.inst.n;
        let q = self.family.q();
        let w = self.inst.total_weight();
        let mut b = vec![0usize; n];
        let mut state: Vec<bool> = (0..self.inst.len()).map(|ci| self.sat(ci, &b)).collect();
        let mut cur = self.total(&b);
        let mut best = (cur, b.clone());
        let mut stamp = vec![0u64; self.inst.len()];
        let mut step = 0u64;
        loop {
            let mut pos = n;
            loop {
                if pos == 0 {
                    return best;
                }
                pos -= 1;
                b[pos] += 1;
                if b[pos] < q {
                    break;
                }
                b[pos] = 0;
            }
            step += 1;
            for v in pos..n {
                for &ci in &self.incident[v] {
                    if stamp[ci] == step {
                        continue;
                    }
                    stamp[ci] = step;
                    let now = self.sat(ci, &b);
                    if now != state[ci] {
                        state[ci] = now;
                        if now {
                            cur += self.inst.weights[ci];
                        } else {
                            cur -= self.inst.weights[ci];
                        }
                    }
                }
            }
            if cur > best.0 + 1e-12 * w {
                best = (cur, b.clone());
            }
        }
    }

    /// Best-improvement single-variable moves; ties go to the smallest `(variable, symbol)`.
    fn local_search(&self, mut b: Vec<usize>) -> (f64, Vec<usize>) {
        let q = self.family.q();
        let tol = 1e-12 * self.inst.total_weight().max(1.0);
        loop {
            let mut best_move: Option<(f64, usize, usize)> = None;
            for v in 0..self.inst.n {
                let old = b[v];
                let base: f64 = self.incident[v]
                    .iter()
                    .filter(|&&ci| self.sat(ci, &b))
                    .map(|&ci| self.inst.weights[ci])
                    .sum();
                for s in 0..q {
                    if s == old {
                        continue;
                    }
                    b[v] = s;
                    let moved: f64 = self.incident[v]
                        .iter()
                        .filter(|&&ci| self.sat(ci, &b))
                        .map(|&ci| self.inst.weights[ci])
                        .sum();
                    b[v] = old;
                    let gain = moved - base;
                    if gain > tol && best_move.is_none_or(|(g, _, _)| gain > g + tol) {
                        best_move = Some((gain, v, s));
                    }
                }
            }
            match best_move {
                Some((_, v, s)) => b[v] = s,
                None => break,
            }
        }
        (self.total(&b), b)
    }
}

/// Smallest 0-based `σ` with `f(σ^k) = 1` for every non-zero `f`.
pub fn constant_satisfiable(family: &ConstraintFamily) -> Option<usize> {
    (0..family.q()).find(|&s| {
        let pattern = vec![s; family.k()];
        (0..family.len()).all(|f| family.is_zero(f) || family.eval(f, &pattern))
    })
}

/// Optimal value for constant-satisfiable families: the weight fraction of
/// constraints whose function is not identically zero.
pub fn exact_count_solver(family: &ConstraintFamily, inst: &Instance) -> Result<f64> {
    if constant_satisfiable(family).is_none() {
        return Err(Error::NotConstantSatisfiable);
    }
    let w = inst.positive_total_weight()?;
    let live: f64 = inst
        .constraints
        .iter()
        .zip(&inst.weights)
        .filter(|(c, _)| !family.is_zero(c.f))
        .map(|(_, w)| w)
        .sum();
    Ok(live / w)
}
