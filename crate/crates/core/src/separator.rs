//! Non-negative separating hyperplanes `(λ, τ_Y, τ_N)` between `K^Y_γ` and
//! `K^N_β` in marginal space, with an adversarial audit.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::dist::marginals_of;
use crate::error::{Error, Result};
use crate::family::{parse_f64, parse_usize, pattern_of, ConstraintFamily};
use crate::feasibility::{decide_intersection, FeasibilityConfig, Verdict};
use crate::lp::{Cmp, LinearProgram, Simplex};
use crate::rng::{child_seed, rng_from};
use crate::simplex_opt::{ColumnObjective, Columns};

/// Slack below which an audit counts as a violation.
pub const VIOLATION_TOL: f64 = 1e-6;
/// Smallest margin accepted for a certificate.
pub const MIN_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatorCertificate {
    /// Indexed by `(f·k + i)·q + σ`.
    pub lambda: Vec<f64>,
    pub tau_y: f64,
    pub tau_n: f64,
    pub gamma: f64,
    pub beta: f64,
    pub verified_margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparatorConfig {
    pub feasibility: FeasibilityConfig,
    pub rounds: usize,
    /// Random objectives used to seed the YES sample set.
    pub yes_samples: usize,
    pub attack_iters: usize,
    pub seed: u64,
}

impl Default for SeparatorConfig {
    fn default() -> Self {
        Self { feasibility: FeasibilityConfig::default(), rounds: 30, yes_samples: 16, attack_iters: 500, seed: 0x5eed }
    }
}

impl SeparatorCertificate {
    pub fn value(&self, mu: &[f64]) -> f64 {
        self.lambda.iter().zip(mu).map(|(a, b)| a * b).sum()
    }

    pub fn to_text(&self, family: &ConstraintFamily) -> String {
        let (k, q) = (family.k(), family.q());
        let mut out = format!(
            "tauY={:.16e} tauN={:.16e} gamma={:.16e} beta={:.16e} margin={:.16e}\n",
            self.tau_y, self.tau_n, self.gamma, self.beta, self.verified_margin
        );
        for f in 0..family.len() {
            for i in 0..k {
                for s in 0..q {
                    let v = self.lambda[(f * k + i) * q + s];
                    let _ = writeln!(out, "lambda {} {} {} {:.16e}", family.name(f), i + 1, s + 1, v);
                }
            }
        }
        out
    }

    pub fn parse(family: &ConstraintFamily, text: &str) -> Result<Self> {
        let (k, q) = (family.k(), family.q());
        let mut lambda = vec![0.0; family.len() * k * q];
        let mut header: Option<[f64; 5]> = None;
        for (ln, line) in text.lines().enumerate() {
            let line_no = ln + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks[0] == "lambda" {
                if toks.len() != 5 {
                    return Err(Error::Parse { line: line_no, msg: "expected `lambda <f> <i> <sigma> <value>`".into() });
                }
                let f = family
                    .index_of(toks[1])
                    .ok_or_else(|| Error::Parse { line: line_no, msg: format!("unknown function {}", toks[1]) })?;
                let i = parse_usize(toks[2], line_no)?;
                let s = parse_usize(toks[3], line_no)?;
                if i == 0 || i > k || s == 0 || s > q {
                    return Err(Error::Parse { line: line_no, msg: "position or symbol out of range".into() });
                }
                lambda[(f * k + i - 1) * q + s - 1] = parse_f64(toks[4], line_no)?;
            } else {
                let mut vals = [f64::NAN, f64::NAN, f64::NAN, f64::NAN, 0.0];
                for tok in toks {
                    let (key, v) = tok
                        .split_once('=')
                        .ok_or_else(|| Error::Parse { line: line_no, msg: format!("unexpected token {tok}") })?;
                    let slot = match key {
                        "tauY" => 0,
                        "tauN" => 1,
                        "gamma" => 2,
                        "beta" => 3,
                        "margin" => 4,
                        _ => return Err(Error::Parse { line: line_no, msg: format!("unknown key {key}") }),
                    };
                    vals[slot] = parse_f64(v, line_no)?;
                }
                if vals[..4].iter().any(|v| v.is_nan()) {
                    return Err(Error::Parse { line: line_no, msg: "header needs tauY, tauN, gamma and beta".into() });
                }
                header = Some(vals);
            }
        }
        let h = header.ok_or_else(|| Error::Parse { line: 0, msg: "missing tauY/tauN header".into() })?;
        Ok(Self { lambda, tau_y: h[0], tau_n: h[1], gamma: h[2], beta: h[3], verified_margin: h[4] })
    }
}

/// Coefficient of `D(f,a)` in `⟨λ, μ(D)⟩`.
fn dist_coefficients(family: &ConstraintFamily, lambda: &[f64]) -> Vec<f64> {
    let (q, k, w) = (family.q(), family.k(), family.num_patterns());
    let mut out = vec![0.0; family.len() * w];
    for f in 0..family.len() {
        for a in 0..w {
            let p = pattern_of(q, k, a);
            out[f * w + a] = p.iter().enumerate().map(|(i, &s)| lambda[(f * k + i) * q + s]).sum();
        }
    }
    out
}

/// `min ⟨λ, μ(D)⟩` over `S^Y_γ`; `None` if `S^Y_γ` is empty.
fn attack_yes(family: &ConstraintFamily, gamma: f64, lambda: &[f64]) -> Result<Option<(f64, Vec<f64>)>> {
    let c = dist_coefficients(family, lambda);
    let w = family.num_patterns();
    let m = c.len();
    let mut lp = LinearProgram::minimize(c);
    lp.add(vec![1.0; m], Cmp::Eq, 1.0);
    lp.add((0..m).map(|j| if family.table(j / w)[j % w] { 1.0 } else { 0.0 }).collect(), Cmp::Ge, gamma);
    match lp.solve() {
        crate::lp::LpOutcome::Optimal { x, objective } => Ok(Some((objective, x))),
        crate::lp::LpOutcome::Infeasible => Ok(None),
        crate::lp::LpOutcome::Unbounded => Err(Error::Lp("yes attack unbounded".into())),
    }
}

/// Upper bound on `max ⟨λ, μ(D)⟩` over `S^N_β` from an outer cutting-plane
/// approximation, with the final LP point. `None` if the outer model is empty.
fn attack_no(
    family: &ConstraintFamily,
    beta: f64,
    lambda: &[f64],
    cfg: &SeparatorConfig,
) -> Result<Option<(f64, Vec<f64>)>> {
    let (q, k) = (family.q(), family.k());
    let c = dist_coefficients(family, lambda);
    let m = c.len();
    let mut lp = LinearProgram::maximize(c);
    lp.add(vec![1.0; m], Cmp::Eq, 1.0);
    let zero = ColumnObjective::new(q, k, family.tables(), &vec![0.0; m]);
    let mut initial: Vec<Columns> = (0..q.pow(q as u32)).map(|i| zero.vertex_columns(&pattern_of(q, q, i))).collect();
    initial.push(vec![vec![1.0 / q as f64; q]; q]);
    for cols in &initial {
        lp.add(ColumnObjective::cut_coefficients(q, k, family.tables(), cols), Cmp::Le, beta);
    }
    let mut s = Simplex::new(&lp);
    if !s.is_optimal() {
        return Ok(None);
    }
    for _ in 0..cfg.attack_iters {
        let z = s.x();
        let inner = ColumnObjective::new(q, k, family.tables(), &z).maximize(&cfg.feasibility.inner);
        if inner.value <= beta + 1e-9 {
            break;
        }
        let mut added = 0;
        for (v, cols) in inner.local.iter().take(cfg.feasibility.cuts_per_iter) {
            if *v > beta + 1e-9 {
                let cut = ColumnObjective::cut_coefficients(q, k, family.tables(), cols);
                let sparse: Vec<(usize, f64)> = cut.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, v)| (j, *v)).collect();
                s.add_row(&sparse, Cmp::Le, beta)?;
                added += 1;
            }
        }
        if !s.is_optimal() {
            return Ok(None);
        }
        if added == 0 {
            break;
        }
    }
    Ok(Some((s.objective(), s.x())))
}

fn marginal_point(family: &ConstraintFamily, d: &[f64]) -> Vec<f64> {
    marginals_of(family, d).entries
}

/// Max-margin `(λ′ ∈ [−1,1]^d, τ, m)` with `⟨λ′,y⟩ ≥ τ + m`, `⟨λ′,z⟩ ≤ τ − m`.
fn max_margin(dim: usize, ys: &[Vec<f64>], ns: &[Vec<f64>], cap: f64) -> Result<(Vec<f64>, f64, f64)> {
    // variables: w (λ′ = w − 1), τ⁺, τ⁻, m
    let (tp, tm, mv) = (dim, dim + 1, dim + 2);
    let mut obj = vec![0.0; dim + 3];
    obj[mv] = 1.0;
    let mut lp = LinearProgram::maximize(obj);
    for j in 0..dim {
        lp.add_sparse(&[(j, 1.0)], Cmp::Le, 2.0);
    }
    lp.add_sparse(&[(mv, 1.0)], Cmp::Le, cap);
    for y in ys {
        let mut row: Vec<(usize, f64)> = y.iter().enumerate().map(|(j, v)| (j, *v)).collect();
        row.extend([(tp, -1.0), (tm, 1.0), (mv, -1.0)]);
        lp.add_sparse(&row, Cmp::Ge, y.iter().sum());
    }
    for z in ns {
        let mut row: Vec<(usize, f64)> = z.iter().enumerate().map(|(j, v)| (j, *v)).collect();
        row.extend([(tp, -1.0), (tm, 1.0), (mv, 1.0)]);
        lp.add_sparse(&row, Cmp::Le, z.iter().sum());
    }
    let (x, obj) = lp.solve().optimal()?;
    Ok((x[..dim].iter().map(|w| w - 1.0).collect(), x[tp] - x[tm], obj))
}

/// Finds `(λ ≥ 0, τ_Y > τ_N)` separating `K^Y_γ` from `K^N_β` when they are disjoint.
pub fn separating_hyperplane(
    family: &Arc<ConstraintFamily>,
    gamma: f64,
    beta: f64,
    cfg: &SeparatorConfig,
) -> Result<SeparatorCertificate> {
    let decision = decide_intersection(family, gamma, beta, &cfg.feasibility)?;
    if decision.verdict != Verdict::Disjoint {
        return Err(Error::NotDisjoint(decision.verdict.to_string()));
    }
    let (q, k, nf) = (family.q(), family.k(), family.len());
    let dim = nf * k * q;
    let ones = vec![1.0; dim];
    if attack_no(family, beta, &ones, cfg)?.is_none() {
        // ⟨1, μ⟩ = k identically
        return Ok(SeparatorCertificate {
            lambda: ones,
            tau_y: k as f64,
            tau_n: k as f64 - 1.0,
            gamma,
            beta,
            verified_margin: 1.0,
        });
    }
    let mut rng = rng_from(child_seed(cfg.seed, 2));
    let mut ys = Vec::new();
    for _ in 0..cfg.yes_samples {
        let dir: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if let Some((_, y)) = attack_yes(family, gamma, &dir)? {
            ys.push(marginal_point(family, &y));
        }
    }
    if ys.is_empty() {
        return Err(Error::NotDisjoint("K^Y empty".into()));
    }
    let mut ns = Vec::new();
    for _ in 0..cfg.yes_samples / 2 {
        let dir: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if let Some((_, z)) = attack_no(family, beta, &dir, cfg)? {
            ns.push(marginal_point(family, &z));
        }
    }
    let mut best: Option<(f64, Vec<f64>, f64, f64)> = None;
    let mut last_margin = 0.0;
    for _ in 0..cfg.rounds {
        let (lp_lambda, _, margin) = max_margin(dim, &ys, &ns, k as f64)?;
        last_margin = margin;
        if margin < MIN_MARGIN {
            break;
        }
        let (vy, y) = attack_yes(family, gamma, &lp_lambda)?.ok_or_else(|| Error::NotDisjoint("K^Y empty".into()))?;
        let (vn, z) = attack_no(family, beta, &lp_lambda, cfg)?.ok_or_else(|| Error::Lp("no attack lost feasibility".into()))?;
        let gap = vy - vn;
        if best.as_ref().is_none_or(|b| gap > b.0) {
            best = Some((gap, lp_lambda.clone(), vy, vn));
        }
        if gap >= 2.0 * margin * (1.0 - 1e-3) {
            break;
        }
        ys.push(marginal_point(family, &y));
        ns.push(marginal_point(family, &z));
    }
    let Some((gap, lp_lambda, vy, vn)) = best.filter(|b| b.0 >= MIN_MARGIN) else {
        return Err(Error::SeparationNotCertified(last_margin));
    };
    let shift = (-lp_lambda.iter().cloned().fold(f64::INFINITY, f64::min)).max(0.0);
    let lambda: Vec<f64> = lp_lambda.iter().map(|v| v + shift).collect();
    let kshift = k as f64 * shift;
    Ok(SeparatorCertificate {
        lambda,
        tau_y: vy - gap / 4.0 + kshift,
        tau_n: vn + gap / 4.0 + kshift,
        gamma,
        beta,
        verified_margin: gap / 4.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub pass: bool,
    /// `min ⟨λ,μ⟩ − τ_Y` over the YES side.
    pub yes_slack: f64,
    /// `τ_N − max ⟨λ,μ⟩` over the NO side (upper bound on the maximum).
    pub no_slack: f64,
    pub structural: Option<String>,
}

/// Audits a certificate: exact LP minimum on the YES side, outer cutting-plane
/// maximum on the NO side, plus `trials` random probes of each side.
pub fn verify_hyperplane(
    cert: &SeparatorCertificate,
    family: &ConstraintFamily,
    trials: usize,
    seed: u64,
    cfg: &SeparatorConfig,
) -> Result<VerifyReport> {
    let dim = family.len() * family.k() * family.q();
    let fail = |msg: &str| VerifyReport { pass: false, yes_slack: f64::NAN, no_slack: f64::NAN, structural: Some(msg.into()) };
    if cert.lambda.len() != dim {
        return Ok(fail("lambda has the wrong length"));
    }
    if cert.tau_y <= cert.tau_n {
        return Ok(fail("tauY <= tauN"));
    }
    if cert.lambda.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return Ok(fail("lambda has a negative entry"));
    }
    let mut yes_slack = match attack_yes(family, cert.gamma, &cert.lambda)? {
        Some((v, _)) => v - cert.tau_y,
        None => f64::INFINITY,
    };
    let mut no_slack = match attack_no(family, cert.beta, &cert.lambda, cfg)? {
        Some((v, _)) => cert.tau_n - v,
        None => f64::INFINITY,
    };
    let mut rng = rng_from(child_seed(seed, 3));
    for _ in 0..trials {
        let dir: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if let Some((_, y)) = attack_yes(family, cert.gamma, &dir)? {
            yes_slack = yes_slack.min(cert.value(&marginal_point(family, &y)) - cert.tau_y);
        }
        let e: Vec<f64> = (0..family.len() * family.num_patterns()).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
        let total: f64 = e.iter().sum();
        let d: Vec<f64> = e.iter().map(|v| v / total).collect();
        let sn = ColumnObjective::new(family.q(), family.k(), family.tables(), &d).maximize(&cfg.feasibility.inner).value;
        if sn <= cert.beta {
            no_slack = no_slack.min(cert.tau_n - cert.value(&marginal_point(family, &d)));
        }
    }
    Ok(VerifyReport {
        pass: yes_slack >= -VIOLATION_TOL && no_slack >= -VIOLATION_TOL,
        yes_slack,
        no_slack,
        structural: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::ConstraintDist;

    fn dicut() -> Arc<ConstraintFamily> {
        Arc::new(ConstraintFamily::dicut())
    }

    #[test]
    fn constant_one_certificate() {
        let one = Arc::new(ConstraintFamily::constant_one(2, 2));
        let cfg = SeparatorConfig::default();
        let cert = separating_hyperplane(&one, 1.0, 0.5, &cfg).unwrap();
        assert_eq!(cert.lambda, vec![1.0; 4]);
        assert_eq!((cert.tau_y, cert.tau_n), (2.0, 1.0));
        let rep = verify_hyperplane(&cert, &one, 10, 1, &cfg).unwrap();
        assert!(rep.pass && rep.yes_slack >= -1e-9 && rep.no_slack >= 1.0);
    }

    #[test]
    fn dicut_certificate_verifies() {
        let cfg = SeparatorConfig::default();
        let cert = separating_hyperplane(&dicut(), 0.7, 0.3, &cfg).unwrap();
        assert!(cert.lambda.iter().all(|v| *v >= 0.0));
        assert!(cert.tau_y > cert.tau_n && cert.verified_margin > 0.0);
        let rep = verify_hyperplane(&cert, &dicut(), 50, 7, &cfg).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn intersect_regime_is_rejected() {
        let err = separating_hyperplane(&dicut(), 0.7, 0.5, &SeparatorConfig::default()).unwrap_err();
        assert!(matches!(err, Error::NotDisjoint(_)));
    }

    #[test]
    fn structural_failure() {
        let cert = SeparatorCertificate { lambda: vec![1.0; 4], tau_y: 1.0, tau_n: 1.0, gamma: 0.7, beta: 0.3, verified_margin: 0.0 };
        let rep = verify_hyperplane(&cert, &dicut(), 0, 0, &SeparatorConfig::default()).unwrap();
        assert!(!rep.pass && rep.structural.is_some());
    }

    #[test]
    fn shift_moves_values_by_k_times_shift() {
        let f = dicut();
        let lp_lambda = [-0.3, 0.5, 0.2, -0.7];
        let shift = 0.7;
        let shifted: Vec<f64> = lp_lambda.iter().map(|v| v + shift).collect();
        for d in [ConstraintDist::uniform(f.clone()), ConstraintDist::point_mass(f.clone(), 0, &[1, 0])] {
            let mu = d.marginals().entries;
            let a: f64 = lp_lambda.iter().zip(&mu).map(|(x, y)| x * y).sum();
            let b: f64 = shifted.iter().zip(&mu).map(|(x, y)| x * y).sum();
            assert!((b - a - 2.0 * shift).abs() < 1e-12);
        }
    }

    #[test]
    fn text_roundtrip_and_determinism() {
        let cfg = SeparatorConfig::default();
        let a = separating_hyperplane(&dicut(), 0.7, 0.3, &cfg).unwrap();
        let b = separating_hyperplane(&dicut(), 0.7, 0.3, &cfg).unwrap();
        assert_eq!(a.to_text(&dicut()), b.to_text(&dicut()));
        let back = SeparatorCertificate::parse(&dicut(), &a.to_text(&dicut())).unwrap();
        assert_eq!(back, a);
    }
}
