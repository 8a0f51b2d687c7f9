//! Linear bias-matrix sketches for dynamic streams of constraints and the
//! threshold test built on `B_λ(Ψ) = Σ_ℓ max_σ bias_λ(Ψ)_{ℓ,σ}`.
//!
//! Accumulators are fixed point (`i128`, scale `2^48`) so that composing and
//! combining sketches is exact and order-independent.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{parse_usize, ConstraintFamily};
use crate::instance::{parse_vars, Constraint, Instance};
use crate::rng::child_seed;
use crate::separator::SeparatorCertificate;

const SCALE: f64 = (1u64 << 48) as f64;
const MAGIC: &[u8; 4] = b"BSK1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamUpdate {
    pub constraint: Constraint,
    /// `+1` insert, `-1` delete.
    pub delta: i8,
}

impl StreamUpdate {
    pub fn insert(constraint: Constraint) -> Self {
        Self { constraint, delta: 1 }
    }

    pub fn delete(constraint: Constraint) -> Self {
        Self { constraint, delta: -1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stream {
    pub n: usize,
    pub family_path: String,
    pub updates: Vec<StreamUpdate>,
}

impl Stream {
    pub fn parse(family: &ConstraintFamily, text: &str) -> Result<Self> {
        let mut header: Option<(usize, String)> = None;
        let mut updates = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line_no = ln + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let Some((n, _)) = &header else {
                let mut n = None;
                let mut path = String::new();
                for tok in &toks {
                    if let Some(v) = tok.strip_prefix("n=") {
                        n = Some(parse_usize(v, line_no)?);
                    } else if let Some(v) = tok.strip_prefix("family=") {
                        path = v.to_string();
                    } else {
                        return Err(Error::Parse { line: line_no, msg: format!("unexpected header token {tok}") });
                    }
                }
                let n = n.ok_or_else(|| Error::Parse { line: line_no, msg: "expected `n=<int> family=<path>` header".into() })?;
                header = Some((n, path));
                continue;
            };
            let delta = match toks[0] {
                "+" => 1,
                "-" => -1,
                other => return Err(Error::Parse { line: line_no, msg: format!("expected + or -, got {other}") }),
            };
            if toks.len() != 2 + family.k() {
                return Err(Error::Parse { line: line_no, msg: format!("expected {} variables", family.k()) });
            }
            let f = family
                .index_of(toks[1])
                .ok_or_else(|| Error::Parse { line: line_no, msg: format!("unknown function {}", toks[1]) })?;
            let c = Constraint::new(f, parse_vars(&toks[2..], line_no)?);
            c.validate(family, *n)
                .map_err(|e| Error::Parse { line: line_no, msg: e.to_string() })?;
            updates.push(StreamUpdate { constraint: c, delta });
        }
        let (n, family_path) = header.ok_or_else(|| Error::Parse { line: 0, msg: "missing header".into() })?;
        Ok(Self { n, family_path, updates })
    }

    pub fn to_text(&self, family: &ConstraintFamily) -> String {
        let mut out = format!("n={} family={}\n", self.n, self.family_path);
        for u in &self.updates {
            out.push(if u.delta > 0 { '+' } else { '-' });
            out.push(' ');
            out.push_str(family.name(u.constraint.f));
            for v in &u.constraint.vars {
                out.push_str(&format!(" {}", v + 1));
            }
            out.push('\n');
        }
        out
    }

    /// Net unit-weight instance; constraints with non-positive net multiplicity are dropped.
    pub fn to_instance(&self, family: &ConstraintFamily) -> Result<Instance> {
        let mut net: Vec<(Constraint, i64)> = Vec::new();
        for u in &self.updates {
            match net.iter_mut().find(|(c, _)| *c == u.constraint) {
                Some((_, m)) => *m += u.delta as i64,
                None => net.push((u.constraint.clone(), u.delta as i64)),
            }
        }
        let (cs, ws): (Vec<_>, Vec<_>) = net.into_iter().filter(|(_, m)| *m > 0).map(|(c, m)| (c, m as f64)).unzip();
        Instance::new(family, self.n, cs, ws)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SketchMode {
    Exact,
    Sampled { rate: f64, seed: u64 },
}

/// A sketchable `λ`: quantized weights with their digest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SketchWeights {
    nf: usize,
    k: usize,
    q: usize,
    fixed: Vec<i128>,
    digest: u64,
}

impl SketchWeights {
    pub fn new(family: &ConstraintFamily, lambda: &[f64]) -> Result<Self> {
        let (nf, k, q) = (family.len(), family.k(), family.q());
        if lambda.len() != nf * k * q {
            return Err(Error::Shape(format!("lambda has {} entries, expected {}", lambda.len(), nf * k * q)));
        }
        if let Some(v) = lambda.iter().find(|v| !v.is_finite() || v.abs() > 1e12) {
            return Err(Error::InvalidParams(format!("lambda entry {v} cannot be sketched")));
        }
        let fixed: Vec<i128> = lambda.iter().map(|v| (v * SCALE).round() as i128).collect();
        let mut digest: u64 = 0xcbf2_9ce4_8422_2325;
        for v in &fixed {
            for b in v.to_le_bytes() {
                digest ^= b as u64;
                digest = digest.wrapping_mul(0x0100_0000_01b3);
            }
        }
        Ok(Self { nf, k, q, fixed, digest })
    }

    pub fn from_certificate(family: &ConstraintFamily, cert: &SeparatorCertificate) -> Result<Self> {
        Self::new(family, &cert.lambda)
    }

    /// The weights actually used, after quantization.
    pub fn effective(&self) -> Vec<f64> {
        self.fixed.iter().map(|v| *v as f64 / SCALE).collect()
    }

    pub fn digest(&self) -> u64 {
        self.digest
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasSketch {
    mode: SketchMode,
    n: usize,
    weights: Arc<SketchWeights>,
    /// Sorted tracked rows (all rows in exact mode).
    rows: Vec<usize>,
    acc: Vec<i128>,
    w: i64,
}

/// Row `row` is tracked iff its seeded hash, read as a uniform in `[0,1)`, is below `rate`.
fn sampled(seed: u64, rate: f64, row: usize) -> bool {
    ((child_seed(seed, row as u64) >> 11) as f64 / (1u64 << 53) as f64) < rate
}

impl BiasSketch {
    pub fn new(mode: SketchMode, n: usize, weights: Arc<SketchWeights>) -> Result<Self> {
        let rows: Vec<usize> = match mode {
            SketchMode::Exact => (0..n).collect(),
            SketchMode::Sampled { rate, seed } => {
                if !(rate > 0.0 && rate <= 1.0) {
                    return Err(Error::InvalidParams(format!("sample rate {rate} outside (0, 1]")));
                }
                (0..n).filter(|&r| sampled(seed, rate, r)).collect()
            }
        };
        let acc = vec![0; rows.len() * weights.q];
        Ok(Self { mode, n, weights, rows, acc, w: 0 })
    }

    pub fn mode(&self) -> SketchMode {
        self.mode
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weight(&self) -> i64 {
        self.w
    }

    pub fn tracked_rows(&self) -> &[usize] {
        &self.rows
    }

    fn slot(&self, row: usize) -> Option<usize> {
        match self.mode {
            SketchMode::Exact => Some(row),
            SketchMode::Sampled { .. } => self.rows.binary_search(&row).ok(),
        }
    }

    pub fn update(&mut self, u: &StreamUpdate) -> Result<()> {
        let c = &u.constraint;
        let (k, q) = (self.weights.k, self.weights.q);
        if c.f >= self.weights.nf {
            return Err(Error::FunctionIndex { index: c.f, len: self.weights.nf });
        }
        if c.vars.len() != k {
            return Err(Error::Shape(format!("constraint has {} variables, expected {k}", c.vars.len())));
        }
        if let Some(&v) = c.vars.iter().find(|v| **v >= self.n) {
            return Err(Error::VariableIndex { index: v, n: self.n });
        }
        if u.delta != 1 && u.delta != -1 {
            return Err(Error::InvalidWeight(u.delta as f64));
        }
        let d = u.delta as i128;
        for (t, &v) in c.vars.iter().enumerate() {
            if let Some(slot) = self.slot(v) {
                for s in 0..q {
                    self.acc[slot * q + s] += d * self.weights.fixed[(c.f * k + t) * q + s];
                }
            }
        }
        self.w += u.delta as i64;
        Ok(())
    }

    /// Bias row of variable `row`, or `None` if it is not tracked.
    pub fn row(&self, row: usize) -> Option<Vec<f64>> {
        let q = self.weights.q;
        self.slot(row).map(|s| self.acc[s * q..(s + 1) * q].iter().map(|v| *v as f64 / SCALE).collect())
    }

    pub fn comb(&self, other: &Self) -> Result<Self> {
        if self.mode != other.mode || self.n != other.n || self.weights.digest != other.weights.digest || *self.weights != *other.weights {
            return Err(Error::SketchMismatch("sketches differ in mode, n, seed, rate or lambda".into()));
        }
        let mut out = self.clone();
        out.acc.iter_mut().zip(&other.acc).for_each(|(a, b)| *a += b);
        out.w += other.w;
        Ok(out)
    }

    fn check_weight(&self) -> Result<f64> {
        match self.w {
            0 => Err(Error::EmptyInstance),
            w if w < 0 => Err(Error::NegativeWeight(w as f64)),
            w => Ok(w as f64),
        }
    }

    fn row_max_sum(&self) -> f64 {
        let q = self.weights.q;
        self.acc.chunks(q).map(|r| *r.iter().max().expect("q >= 1") as f64 / SCALE).sum()
    }

    /// `B_λ(Ψ)` (exact mode) or its row-sampling estimate (sampled mode).
    pub fn b_lambda(&self) -> Result<f64> {
        let w = self.check_weight()?;
        match self.mode {
            SketchMode::Exact => Ok(self.row_max_sum() / w),
            SketchMode::Sampled { .. } => {
                if self.rows.is_empty() {
                    return Err(Error::InvalidParams("no rows sampled".into()));
                }
                Ok(self.n as f64 / self.rows.len() as f64 * self.row_max_sum() / w)
            }
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(64 + self.acc.len() * 16);
        out.extend_from_slice(MAGIC);
        let (mode, rate, seed) = match self.mode {
            SketchMode::Exact => (0u8, 1.0f64, 0u64),
            SketchMode::Sampled { rate, seed } => (1u8, rate, seed),
        };
        out.push(mode);
        for v in [self.n as u64, self.weights.q as u64, seed] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&rate.to_le_bytes());
        out.extend_from_slice(&self.w.to_le_bytes());
        out.extend_from_slice(&self.weights.digest.to_le_bytes());
        out.extend_from_slice(&(self.rows.len() as u64).to_le_bytes());
        if mode == 1 {
            for r in &self.rows {
                out.extend_from_slice(&(*r as u64).to_le_bytes());
            }
        }
        for v in &self.acc {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], weights: Arc<SketchWeights>) -> Result<Self> {
        let bad = |m: &str| Error::SketchMismatch(format!("corrupt sketch: {m}"));
        let mut pos = 0;
        let mut take = |len: usize| -> Result<&[u8]> {
            let s = bytes.get(pos..pos + len).ok_or_else(|| bad("truncated"))?;
            pos += len;
            Ok(s)
        };
        if take(4)? != MAGIC {
            return Err(bad("bad magic"));
        }
        let mode = take(1)?[0];
        let u64_of = |s: &[u8]| u64::from_le_bytes(s.try_into().expect("8 bytes"));
        let n = u64_of(take(8)?) as usize;
        let q = u64_of(take(8)?) as usize;
        let seed = u64_of(take(8)?);
        let rate = f64::from_le_bytes(take(8)?.try_into().expect("8 bytes"));
        let w = i64::from_le_bytes(take(8)?.try_into().expect("8 bytes"));
        let digest = u64_of(take(8)?);
        let nrows = u64_of(take(8)?) as usize;
        if q != weights.q || digest != weights.digest {
            return Err(Error::SketchMismatch("lambda does not match the sketch".into()));
        }
        let (mode, rows) = match mode {
            0 => {
                if nrows != n {
                    return Err(bad("row count"));
                }
                (SketchMode::Exact, (0..n).collect())
            }
            1 => {
                let rows = (0..nrows).map(|_| take(8).map(|s| u64_of(s) as usize)).collect::<Result<Vec<_>>>()?;
                (SketchMode::Sampled { rate, seed }, rows)
            }
            _ => return Err(bad("unknown mode")),
        };
        let acc = (0..nrows * q)
            .map(|_| take(16).map(|s| i128::from_le_bytes(s.try_into().expect("16 bytes"))))
            .collect::<Result<Vec<_>>>()?;
        if pos != bytes.len() {
            return Err(bad("trailing bytes"));
        }
        Ok(Self { mode, n, weights, rows, acc, w })
    }
}

pub fn sketch_comp(mode: SketchMode, n: usize, weights: &Arc<SketchWeights>, updates: &[StreamUpdate]) -> Result<BiasSketch> {
    let mut s = BiasSketch::new(mode, n, weights.clone())?;
    for u in updates {
        s.update(u)?;
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StreamDecision {
    Yes,
    No,
}

impl std::fmt::Display for StreamDecision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StreamDecision::Yes => "YES",
            StreamDecision::No => "NO",
        })
    }
}

/// NO iff `b ≤ τ_N(1+ε)` with `ε = (τ_Y−τ_N)/(2(τ_Y+τ_N))`.
pub fn threshold_decision(tau_y: f64, tau_n: f64, b: f64) -> StreamDecision {
    let eps = (tau_y - tau_n) / (2.0 * (tau_y + tau_n));
    if b <= tau_n * (1.0 + eps) {
        StreamDecision::No
    } else {
        StreamDecision::Yes
    }
}

pub fn decide_stream(
    cert: &SeparatorCertificate,
    family: &ConstraintFamily,
    n: usize,
    updates: &[StreamUpdate],
    mode: SketchMode,
) -> Result<(StreamDecision, f64)> {
    let weights = Arc::new(SketchWeights::from_certificate(family, cert)?);
    let b = sketch_comp(mode, n, &weights, updates)?.b_lambda()?;
    Ok((threshold_decision(cert.tau_y, cert.tau_n, b), b))
}
