//! Distributions over `F × [q]^k` and their marginal vectors.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{parse_f64, parse_usize, ConstraintFamily};
use crate::instance::{Assignment, Instance};
use crate::lp::{Cmp, LinearProgram, LpOutcome};
use crate::polarize::GradedFunction;

/// Normalization tolerance for probability vectors.
pub const PROB_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintDist {
    family: Arc<ConstraintFamily>,
    probs: Vec<f64>,
}

/// `μ_{f,i,σ}` stored at `f·k·q + i·q + σ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalVector {
    pub nf: usize,
    pub k: usize,
    pub q: usize,
    pub entries: Vec<f64>,
}

impl MarginalVector {
    pub fn zeros(nf: usize, k: usize, q: usize) -> Self {
        Self { nf, k, q, entries: vec![0.0; nf * k * q] }
    }

    pub fn index(&self, f: usize, i: usize, sigma: usize) -> usize {
        (f * self.k + i) * self.q + sigma
    }

    pub fn get(&self, f: usize, i: usize, sigma: usize) -> f64 {
        self.entries[self.index(f, i, sigma)]
    }

    pub fn dot(&self, lambda: &[f64]) -> f64 {
        self.entries.iter().zip(lambda).map(|(a, b)| a * b).sum()
    }

    pub fn max_deviation(&self, other: &MarginalVector) -> f64 {
        self.entries.iter().zip(&other.entries).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Rows `μ_{f,i,·}` for one function.
    pub fn rows(&self, f: usize) -> Vec<Vec<f64>> {
        (0..self.k).map(|i| (0..self.q).map(|s| self.get(f, i, s)).collect()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.len() != self.nf * self.k * self.q {
            return Err(Error::Shape("marginal vector length".into()));
        }
        if self.entries.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidDistribution("negative marginal".into()));
        }
        for i in 0..self.k {
            let s: f64 = (0..self.nf).flat_map(|f| (0..self.q).map(move |s| (f, s))).map(|(f, s)| self.get(f, i, s)).sum();
            if (s - 1.0).abs() > PROB_TOL {
                return Err(Error::InvalidDistribution(format!("position {} marginals sum to {s}", i + 1)));
            }
        }
        for f in 0..self.nf {
            let rows = self.rows(f);
            let t: Vec<f64> = rows.iter().map(|r| r.iter().sum()).collect();
            if t.iter().any(|x| (x - t[0]).abs() > PROB_TOL) {
                return Err(Error::InvalidDistribution(format!("function {f} has inconsistent marginals")));
            }
        }
        Ok(())
    }
}

impl ConstraintDist {
    pub fn new(family: Arc<ConstraintFamily>, probs: Vec<f64>) -> Result<Self> {
        let len = family.len() * family.num_patterns();
        if probs.len() != len {
            return Err(Error::Shape(format!("distribution has {} entries, expected {len}", probs.len())));
        }
        if let Some(v) = probs.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidDistribution(format!("entry {v} is not a probability")));
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {s}")));
        }
        Ok(Self { family, probs })
    }

    /// Normalizes non-negative weights; entries above `-1e-12` are clamped to zero.
    pub fn from_weights(family: Arc<ConstraintFamily>, weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|w| *w < -1e-12 || !w.is_finite()) {
            return Err(Error::InvalidDistribution("negative weight".into()));
        }
        let clamped: Vec<f64> = weights.iter().map(|w| w.max(0.0)).collect();
        let s: f64 = clamped.iter().sum();
        if s <= 0.0 {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        Self::new(family, clamped.iter().map(|w| w / s).collect())
    }

    pub fn uniform(family: Arc<ConstraintFamily>) -> Self {
        let len = family.len() * family.num_patterns();
        Self { family, probs: vec![1.0 / len as f64; len] }
    }

    pub fn point_mass(family: Arc<ConstraintFamily>, f: usize, pattern: &[usize]) -> Self {
        let mut probs = vec![0.0; family.len() * family.num_patterns()];
        probs[f * family.num_patterns() + family.pattern_index(pattern)] = 1.0;
        Self { family, probs }
    }

    /// Uniform over the listed `(f, pattern)` atoms.
    pub fn uniform_on(family: Arc<ConstraintFamily>, atoms: &[(usize, Vec<usize>)]) -> Result<Self> {
        let mut w = vec![0.0; family.len() * family.num_patterns()];
        for (f, a) in atoms {
            w[f * family.num_patterns() + family.pattern_index(a)] += 1.0;
        }
        Self::from_weights(family, &w)
    }

    pub fn family(&self) -> &ConstraintFamily {
        &self.family
    }

    pub fn family_arc(&self) -> &Arc<ConstraintFamily> {
        &self.family
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, f: usize, pattern: &[usize]) -> f64 {
        self.probs[f * self.family.num_patterns() + self.family.pattern_index(pattern)]
    }

    /// `Pr[g = f]`.
    pub fn function_mass(&self, f: usize) -> f64 {
        let w = self.family.num_patterns();
        self.probs[f * w..(f + 1) * w].iter().sum()
    }

    /// `α·self + (1 − α)·other`.
    pub fn mix(&self, other: &Self, alpha: f64) -> Result<Self> {
        if self.family != other.family {
            return Err(Error::Shape("mixing distributions over different families".into()));
        }
        let probs = self.probs.iter().zip(&other.probs).map(|(a, b)| alpha * a + (1.0 - alpha) * b).collect();
        Self::new(self.family.clone(), probs)
    }

    pub fn marginals(&self) -> MarginalVector {
        marginals_of(&self.family, &self.probs)
    }

    pub fn is_one_wise(&self) -> bool {
        let m = self.marginals();
        (0..m.nf).all(|f| {
            (0..m.k).all(|i| {
                let first = m.get(f, i, 0);
                (1..m.q).all(|s| (m.get(f, i, s) - first).abs() <= PROB_TOL)
            })
        })
    }

    /// The mass of function `f` as a function on the box `[q]^k`.
    pub fn component(&self, f: usize) -> GradedFunction<f64> {
        let w = self.family.num_patterns();
        GradedFunction::new(vec![self.family.q(); self.family.k()], self.probs[f * w..(f + 1) * w].to_vec())
            .expect("component of a valid distribution")
    }

    /// Each function's conditional support is totally ordered.
    pub fn is_chain_supported(&self) -> bool {
        (0..self.family.len()).all(|f| self.component(f).is_chain_supported())
    }

    /// Parses the `p <f_name> <a1> … <ak> <prob>` body; the `family=` header is required.
    pub fn parse(family: Arc<ConstraintFamily>, text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        match lines.next() {
            Some((_, h)) if h.starts_with("family=") => {}
            Some((line, _)) => return Err(Error::Parse { line, msg: "expected `family=<path>` header".into() }),
            None => return Err(Error::Parse { line: 1, msg: "missing `family=<path>` header".into() }),
        }
        let (q, k, w) = (family.q(), family.k(), family.num_patterns());
        let mut probs = vec![0.0; family.len() * w];
        for (line, l) in lines {
            let toks: Vec<&str> = l.split_whitespace().collect();
            if toks.first() != Some(&"p") || toks.len() != k + 3 {
                return Err(Error::Parse { line, msg: format!("expected `p <f_name> <a1> .. <a{k}> <prob>`") });
            }
            let f = family
                .index_of(toks[1])
                .ok_or_else(|| Error::Parse { line, msg: format!("unknown function `{}`", toks[1]) })?;
            let mut pattern = Vec::with_capacity(k);
            for t in &toks[2..2 + k] {
                let s = parse_usize(t, line)?;
                if s == 0 || s > q {
                    return Err(Error::Parse { line, msg: format!("symbol {s} outside 1..={q}") });
                }
                pattern.push(s - 1);
            }
            probs[f * w + family.pattern_index(&pattern)] += parse_f64(toks[k + 2], line)?;
        }
        Self::new(family, probs)
    }

    pub fn to_text(&self, family_path: &str) -> String {
        let mut out = format!("family={family_path}\n");
        let w = self.family.num_patterns();
        for (idx, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let _ = write!(out, "p {}", self.family.name(idx / w));
            for s in self.family.pattern(idx % w) {
                let _ = write!(out, " {}", s + 1);
            }
            let _ = writeln!(out, " {p:?}");
        }
        out
    }
}

/// Path named by a distribution file's `family=` header.
pub fn family_path_of(text: &str) -> Option<&str> {
    text.lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .and_then(|l| l.strip_prefix("family="))
        .map(str::trim)
}

/// Marginals of an arbitrary (not necessarily normalized) vector over `F × [q]^k`.
pub fn marginals_of(family: &ConstraintFamily, probs: &[f64]) -> MarginalVector {
    let (q, k, w) = (family.q(), family.k(), family.num_patterns());
    let mut m = MarginalVector::zeros(family.len(), k, q);
    for (idx, &p) in probs.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let f = idx / w;
        let mut a = idx % w;
        for i in (0..k).rev() {
            let s = a % q;
            a /= q;
            let j = m.index(f, i, s);
            m.entries[j] += p;
        }
    }
    m
}

/// `D(Ψ^b)`: sample a constraint with probability `w_i / W`, record `(f_i, b|_{j(i)})`.
pub fn dist_of_instance(family: &Arc<ConstraintFamily>, inst: &Instance, b: &Assignment) -> Result<ConstraintDist> {
    let total = inst.positive_total_weight()?;
    let w = family.num_patterns();
    let mut probs = vec![0.0; family.len() * w];
    for (c, &wi) in inst.constraints.iter().zip(&inst.weights) {
        c.validate(family, b.len())?;
        probs[c.f * w + family.pattern_index(&b.restrict(&c.vars))] += wi / total;
    }
    ConstraintDist::from_weights(family.clone(), &probs)
}

/// A uniform-marginal distribution supported on `f^{-1}(1)`, if one exists.
pub fn supports_one_wise(family: &Arc<ConstraintFamily>, f: usize) -> Result<Option<ConstraintDist>> {
    if family.is_zero(f) {
        return Err(Error::ZeroFunction);
    }
    let (q, k, w) = (family.q(), family.k(), family.num_patterns());
    let sat: Vec<usize> = (0..w).filter(|&a| family.table(f)[a]).collect();
    let embed = |x: &[f64]| {
        let mut probs = vec![0.0; family.len() * w];
        for (&a, &v) in sat.iter().zip(x) {
            probs[f * w + a] = v;
        }
        ConstraintDist::from_weights(family.clone(), &probs)
    };
    let uniform = embed(&vec![1.0; sat.len()])?;
    if uniform.is_one_wise() {
        return Ok(Some(uniform));
    }
    let constraints = |lp: &mut LinearProgram| {
        lp.add(vec![1.0; sat.len()], Cmp::Eq, 1.0);
        for i in 0..k {
            for s in 0..q {
                let row: Vec<f64> = sat
                    .iter()
                    .map(|&a| if family.pattern(a)[i] == s { 1.0 } else { 0.0 })
                    .collect();
                lp.add(row, Cmp::Eq, 1.0 / q as f64);
            }
        }
    };
    // average of the maximizers of each coordinate lands in the relative interior
    let mut acc = vec![0.0; sat.len()];
    for j in 0..sat.len() {
        let mut obj = vec![0.0; sat.len()];
        obj[j] = 1.0;
        let mut lp = LinearProgram::maximize(obj);
        constraints(&mut lp);
        match lp.solve() {
            LpOutcome::Optimal { x, .. } => acc.iter_mut().zip(&x).for_each(|(a, v)| *a += v),
            LpOutcome::Infeasible => return Ok(None),
            LpOutcome::Unbounded => return Err(Error::Lp("unbounded feasibility program".into())),
        }
    }
    let d = embed(&acc)?;
    if d.is_one_wise() {
        Ok(Some(d))
    } else {
        Ok(None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OneWiseClass {
    Strong,
    Weak,
    None,
}

/// Largest family accepted by [`one_wise_class`].
pub const SUBSET_BUDGET: usize = 8;

/// Tolerance for `ρ(F′) = ρ(F)` in [`one_wise_class`].
pub const ONE_WISE_RHO_TOL: f64 = 1e-4;

pub fn one_wise_class(
    family: &Arc<ConstraintFamily>,
    rho_fn: impl Fn(&ConstraintFamily) -> Result<f64>,
) -> Result<OneWiseClass> {
    if family.len() > SUBSET_BUDGET {
        return Err(Error::SubsetBudget(family.len()));
    }
    let mut supporting = Vec::new();
    for f in 0..family.len() {
        if !family.is_zero(f) && supports_one_wise(family, f)?.is_some() {
            supporting.push(f);
        }
    }
    if supporting.len() == family.len() {
        return Ok(OneWiseClass::Strong);
    }
    if supporting.is_empty() {
        return Ok(OneWiseClass::None);
    }
    let target = rho_fn(family)?;
    for mask in 1u32..(1 << supporting.len()) {
        let subset: Vec<usize> = (0..supporting.len()).filter(|b| mask >> b & 1 == 1).map(|b| supporting[b]).collect();
        if (rho_fn(&family.subfamily(&subset)?)? - target).abs() <= ONE_WISE_RHO_TOL {
            return Ok(OneWiseClass::Weak);
        }
    }
    Ok(OneWiseClass::None)
}

/// Per-function canonical chain distribution with marginals `mu`.
pub fn canonical(family: &Arc<ConstraintFamily>, mu: &MarginalVector) -> Result<ConstraintDist> {
    if mu.nf != family.len() || mu.k != family.k() || mu.q != family.q() {
        return Err(Error::Shape("marginal vector does not match family".into()));
    }
    mu.validate()?;
    let mut probs = Vec::with_capacity(family.len() * family.num_patterns());
    for f in 0..family.len() {
        probs.extend_from_slice(GradedFunction::canonical(&mu.rows(f))?.values());
    }
    ConstraintDist::from_weights(family.clone(), &probs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaddedDecomposition {
    pub tau: f64,
    pub d0: ConstraintDist,
    pub dy_prime: ConstraintDist,
    pub dn_prime: ConstraintDist,
}

/// Writes `D_Y = τ D_0 + (1−τ) D′_Y`, `D_N = τ D_0 + (1−τ) D′_N` with one-wise `D′` (q = k = 2).
pub fn padded_one_wise_decomposition(dy: &ConstraintDist, dn: &ConstraintDist) -> Result<PaddedDecomposition> {
    let fam = dy.family_arc().clone();
    if fam.q() != 2 || fam.k() != 2 {
        return Err(Error::InvalidParams(format!("needs q = k = 2, got q = {}, k = {}", fam.q(), fam.k())));
    }
    if dn.family() != dy.family() {
        return Err(Error::Shape("distributions over different families".into()));
    }
    let dev = dy.marginals().max_deviation(&dn.marginals());
    if dev > PROB_TOL {
        return Err(Error::MarginalMismatch(dev));
    }
    const DIAG: [f64; 4] = [0.5, 0.0, 0.0, 0.5];
    const ANTI: [f64; 4] = [0.0, 0.5, 0.5, 0.0];
    let nf = fam.len();
    let mut common = vec![0.0; nf * 4];
    let mut yp = vec![0.0; nf * 4];
    let mut np = vec![0.0; nf * 4];
    let mut tau = 0.0;
    for g in 0..nf {
        let mass = dy.function_mass(g);
        if mass <= 0.0 {
            continue;
        }
        let py: Vec<f64> = dy.probs()[g * 4..g * 4 + 4].iter().map(|p| p / mass).collect();
        let pn: Vec<f64> = dn.probs()[g * 4..g * 4 + 4].iter().map(|p| p / mass).collect();
        let delta = py[0] - pn[0];
        let (base, y_part, n_part) = if delta >= 0.0 { (&py, DIAG, ANTI) } else { (&pn, ANTI, DIAG) };
        let d = delta.abs();
        let tau_g = 1.0 - 2.0 * d;
        if tau_g > 0.0 {
            let d0 = [(base[0] - d).max(0.0), base[1], base[2], (base[3] - d).max(0.0)];
            for a in 0..4 {
                common[g * 4 + a] = mass * d0[a];
            }
        }
        for a in 0..4 {
            yp[g * 4 + a] = mass * (1.0 - tau_g) * y_part[a];
            np[g * 4 + a] = mass * (1.0 - tau_g) * n_part[a];
        }
        tau += mass * tau_g;
    }
    let pick = |w: &[f64], scale: f64| {
        if scale > 1e-15 {
            ConstraintDist::from_weights(fam.clone(), w)
        } else {
            Ok(ConstraintDist::uniform(fam.clone()))
        }
    };
    let tau = tau.clamp(0.0, 1.0);
    Ok(PaddedDecomposition {
        tau,
        d0: pick(&common, tau)?,
        dy_prime: pick(&yp, 1.0 - tau)?,
        dn_prime: pick(&np, 1.0 - tau)?,
    })
}
