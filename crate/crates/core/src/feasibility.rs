//! YES/NO convex framework: `S^Y`/`S^N` membership values, the matched-marginal
//! program `min { sn(D_N) : μ(D_Y) = μ(D_N), sy(D_Y) ≥ γ }`, hardness curves,
//! `ρ(F)`, approximation resistance and the threshold `α`.
//!
//! Both outer minimizations are Kelley cutting-plane loops: for fixed columns
//! `P` the objective is linear in the distribution, so every inner maximizer
//! yields a valid cut and the LP value is a certified lower bound.

use std::sync::Arc;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::dist::ConstraintDist;
use crate::error::{Error, Result};
use crate::family::{pattern_of, ConstraintFamily};
use crate::lp::{Cmp, LinearProgram, Simplex};
use crate::rng::{child_seed, rng_from};
use crate::simplex_opt::{ColumnObjective, Columns, InnerConfig, SimplexPolynomial};

/// Largest `|F|·q^k` handled by the cutting-plane programs.
pub const SIZE_BUDGET: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricProductAssignment {
    pub columns: Columns,
}

impl SymmetricProductAssignment {
    pub fn new(columns: Columns) -> Result<Self> {
        let q = columns.len();
        for (s, col) in columns.iter().enumerate() {
            let sum: f64 = col.iter().sum();
            if col.len() != q || col.iter().any(|v| *v < 0.0 || !v.is_finite()) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidDistribution(format!("column {} is not a probability vector", s + 1)));
            }
        }
        Ok(Self { columns })
    }

    /// Expected satisfied weight of `d` under these columns.
    pub fn value(&self, d: &ConstraintDist) -> f64 {
        let fam = d.family();
        let c = ColumnObjective::cut_coefficients(fam.q(), fam.k(), fam.tables(), &self.columns);
        c.iter().zip(d.probs()).map(|(a, b)| a * b).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Disjoint,
    Intersect,
    Undecided,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Disjoint => "DISJOINT",
            Verdict::Intersect => "INTERSECT",
            Verdict::Undecided => "UNDECIDED",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionOutcome {
    pub verdict: Verdict,
    /// Matched pair `(D_Y, D_N)` attaining `bound`.
    pub witness: Option<(ConstraintDist, ConstraintDist)>,
    pub columns: Option<SymmetricProductAssignment>,
    /// Best `sn(D_N)` found over matched pairs.
    pub bound: f64,
    /// Certified lower bound on the matched minimum.
    pub lower: f64,
    pub delta: f64,
    pub iterations: usize,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityConfig {
    pub delta: f64,
    pub inner: InnerConfig,
    pub max_iters: usize,
    /// Stop once upper and lower bounds are this close.
    pub gap_tol: f64,
    pub cuts_per_iter: usize,
    /// Stop after this many iterations without either bound moving by more than `gap_tol`.
    pub stall_iters: usize,
    /// Grid refinement used to re-verify an INTERSECT witness.
    pub refine_factor: f64,
}

impl Default for FeasibilityConfig {
    fn default() -> Self {
        Self { delta: 1e-4, inner: InnerConfig::default(), max_iters: 2000, gap_tol: 1e-7, cuts_per_iter: 5, stall_iters: 100, refine_factor: 4.0 }
    }
}

pub fn sy_value(d: &ConstraintDist) -> f64 {
    let fam = d.family();
    let w = fam.num_patterns();
    d.probs()
        .iter()
        .enumerate()
        .filter(|(idx, _)| fam.table(idx / w)[idx % w])
        .map(|(_, p)| p)
        .sum()
}

/// Best column-symmetric product value found for `d`; a lower bound on the true maximum.
pub fn sn_value(d: &ConstraintDist, cfg: &InnerConfig) -> (f64, SymmetricProductAssignment) {
    let fam = d.family();
    let r = ColumnObjective::new(fam.q(), fam.k(), fam.tables(), d.probs()).maximize(cfg);
    (r.value, SymmetricProductAssignment { columns: r.columns })
}

fn check_budget(family: &ConstraintFamily) -> Result<()> {
    let size = family.len() * family.num_patterns();
    if size > SIZE_BUDGET {
        return Err(Error::SizeBudget(size));
    }
    Ok(())
}

#[derive(Debug, Clone)]
struct MatchedMin {
    lower: f64,
    upper: f64,
    dy: Vec<f64>,
    dn: Vec<f64>,
    columns: Columns,
    iterations: usize,
}

/// Kelley loop for the matched program. `None` when no `D_Y` reaches `γ`.
fn min_matched(
    family: &ConstraintFamily,
    gamma: f64,
    cfg: &FeasibilityConfig,
    stop: &dyn Fn(f64, f64) -> bool,
) -> Result<Option<MatchedMin>> {
    check_budget(family)?;
    let (q, k, w, nf) = (family.q(), family.k(), family.num_patterns(), family.len());
    let m = nf * w;
    let t = 2 * m;
    let mut obj = vec![0.0; 2 * m + 1];
    obj[t] = 1.0;
    let mut lp = LinearProgram::minimize(obj);
    lp.add_sparse(&(0..m).map(|j| (j, 1.0)).collect::<Vec<_>>(), Cmp::Eq, 1.0);
    lp.add_sparse(&(m..2 * m).map(|j| (j, 1.0)).collect::<Vec<_>>(), Cmp::Eq, 1.0);
    let pats: Vec<Vec<usize>> = (0..w).map(|a| pattern_of(q, k, a)).collect();
    for f in 0..nf {
        for i in 0..k {
            for s in 0..q {
                let row: Vec<(usize, f64)> = (0..w)
                    .filter(|&a| pats[a][i] == s)
                    .flat_map(|a| [(f * w + a, 1.0), (m + f * w + a, -1.0)])
                    .collect();
                lp.add_sparse(&row, Cmp::Eq, 0.0);
            }
        }
    }
    let sat: Vec<(usize, f64)> = (0..m).filter(|&j| family.table(j / w)[j % w]).map(|j| (j, 1.0)).collect();
    lp.add_sparse(&sat, Cmp::Ge, gamma);
    let cut = |cols: &Columns| -> Vec<(usize, f64)> {
        let c = ColumnObjective::cut_coefficients(q, k, family.tables(), cols);
        std::iter::once((t, 1.0))
            .chain(c.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, v)| (m + j, -v)))
            .collect()
    };
    let zero_obj = ColumnObjective::new(q, k, family.tables(), &vec![0.0; m]);
    let mut initial: Vec<Columns> = (0..q.pow(q as u32)).map(|i| zero_obj.vertex_columns(&pattern_of(q, q, i))).collect();
    initial.push(vec![vec![1.0 / q as f64; q]; q]);
    for cols in &initial {
        lp.add_sparse(&cut(cols), Cmp::Ge, 0.0);
    }
    let mut simplex = Simplex::new(&lp);
    if !simplex.is_optimal() {
        return match simplex.outcome() {
            crate::lp::LpOutcome::Infeasible => Ok(None),
            _ => Err(Error::Lp("matched program unbounded".into())),
        };
    }
    let mut best: Option<MatchedMin> = None;
    let mut lower = f64::NEG_INFINITY;
    let mut mark = (f64::NEG_INFINITY, f64::INFINITY, 0);
    for it in 0..cfg.max_iters {
        let x = simplex.x();
        lower = lower.max(simplex.objective());
        let z: Vec<f64> = x[m..2 * m].to_vec();
        let inner = ColumnObjective::new(q, k, family.tables(), &z).maximize(&cfg.inner);
        if best.as_ref().is_none_or(|b| inner.value < b.upper) {
            best = Some(MatchedMin {
                lower,
                upper: inner.value,
                dy: x[..m].to_vec(),
                dn: z.clone(),
                columns: inner.columns.clone(),
                iterations: it + 1,
            });
        }
        let b = best.as_mut().expect("set above");
        b.lower = lower;
        b.iterations = it + 1;
        if b.upper - lower <= cfg.gap_tol || stop(lower, b.upper) {
            break;
        }
        if lower > mark.0 + cfg.gap_tol || b.upper < mark.1 - cfg.gap_tol {
            mark = (lower, b.upper, it);
        } else if it - mark.2 >= cfg.stall_iters {
            break;
        }
        let mut added = 0;
        for (v, cols) in &inner.local {
            if added >= cfg.cuts_per_iter {
                break;
            }
            if *v > lower + 1e-10 {
                simplex.add_row(&cut(cols), Cmp::Ge, 0.0)?;
                added += 1;
            }
        }
        if added == 0 {
            break;
        }
        if !simplex.is_optimal() {
            return Err(Error::Lp("cutting-plane program lost feasibility".into()));
        }
    }
    Ok(best)
}

fn verdict_of(lower: f64, upper: f64, beta: f64, delta: f64) -> Verdict {
    if lower > beta + delta {
        Verdict::Disjoint
    } else if upper <= beta - delta {
        Verdict::Intersect
    } else {
        Verdict::Undecided
    }
}

fn to_dist(family: &Arc<ConstraintFamily>, v: &[f64]) -> Result<ConstraintDist> {
    let clean: Vec<f64> = v.iter().map(|x| x.max(0.0)).collect();
    ConstraintDist::from_weights(family.clone(), &clean)
}

pub fn decide_intersection(
    family: &Arc<ConstraintFamily>,
    gamma: f64,
    beta: f64,
    cfg: &FeasibilityConfig,
) -> Result<DecisionOutcome> {
    if !(0.0..=1.0).contains(&beta) || !(0.0..=1.0).contains(&gamma) || beta >= gamma {
        return Err(Error::InvalidParams(format!("need 0 <= beta < gamma <= 1, got gamma = {gamma}, beta = {beta}")));
    }
    let delta = cfg.delta;
    let stop = |lo: f64, up: f64| verdict_of(lo, up, beta, delta) != Verdict::Undecided;
    let Some(r) = min_matched(family, gamma, cfg, &stop)? else {
        return Ok(DecisionOutcome {
            verdict: Verdict::Disjoint,
            witness: None,
            columns: None,
            bound: f64::INFINITY,
            lower: f64::INFINITY,
            delta,
            iterations: 0,
            note: Some("K^Y empty".into()),
        });
    };
    let mut verdict = verdict_of(r.lower, r.upper, beta, delta);
    let mut bound = r.upper;
    let mut note = None;
    let dy = to_dist(family, &r.dy)?;
    let dn = to_dist(family, &r.dn)?;
    let mut columns = SymmetricProductAssignment { columns: r.columns };
    if verdict == Verdict::Intersect {
        let (fine, cols) = sn_value(&dn, &cfg.inner.refined(cfg.refine_factor));
        if fine > bound {
            bound = fine;
            columns = cols;
        }
        if fine > beta {
            verdict = Verdict::Undecided;
            note = Some(format!("witness failed re-verification: sn = {fine}"));
        }
    }
    Ok(DecisionOutcome {
        verdict,
        witness: Some((dy, dn)),
        columns: Some(columns),
        bound,
        lower: r.lower,
        delta,
        iterations: r.iterations,
        note,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub gamma: f64,
    /// Best matched `sn` value found (`+∞` when `K^Y_γ` is empty).
    pub beta: f64,
    pub lower: f64,
}

pub fn curve_point(family: &Arc<ConstraintFamily>, gamma: f64, cfg: &FeasibilityConfig) -> Result<CurvePoint> {
    curve_point_until(family, gamma, cfg, &|_, _| false)
}

fn curve_point_until(
    family: &Arc<ConstraintFamily>,
    gamma: f64,
    cfg: &FeasibilityConfig,
    stop: &dyn Fn(f64, f64) -> bool,
) -> Result<CurvePoint> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidParams(format!("gamma {gamma} outside (0, 1]")));
    }
    Ok(match min_matched(family, gamma, cfg, stop)? {
        Some(r) => CurvePoint { gamma, beta: r.upper, lower: r.lower },
        None => CurvePoint { gamma, beta: f64::INFINITY, lower: f64::INFINITY },
    })
}

pub fn hardness_curve(family: &Arc<ConstraintFamily>, grid: &[f64], cfg: &FeasibilityConfig) -> Result<Vec<CurvePoint>> {
    grid.iter().map(|&g| curve_point(family, g, cfg)).collect()
}

/// `Σ_a f(a) Π_i d[a_i]` per function.
fn iid_values(family: &ConstraintFamily, d: &[f64]) -> Vec<f64> {
    let (q, k) = (family.q(), family.k());
    let probs: Vec<f64> = (0..family.num_patterns()).map(|a| pattern_of(q, k, a).iter().map(|&s| d[s]).product()).collect();
    family.tables().iter().map(|t| t.iter().zip(&probs).filter(|(s, _)| **s).map(|(_, p)| p).sum()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoResult {
    pub value: f64,
    pub lower: f64,
    /// Minimizing mixture `D_F`.
    pub mixture: Vec<f64>,
    /// Best response `D ∈ Δ([q])` to the mixture.
    pub point: Vec<f64>,
}

/// `ρ(F) = min_{D_F} max_{D ∈ Δ([q])} E_{f∼D_F, a∼D^k}[f(a)]`.
pub fn rho(family: &ConstraintFamily, cfg: &FeasibilityConfig) -> Result<RhoResult> {
    check_budget(family)?;
    let (q, k, nf) = (family.q(), family.k(), family.len());
    let t = nf;
    let mut obj = vec![0.0; nf + 1];
    obj[t] = 1.0;
    let mut lp = LinearProgram::minimize(obj);
    lp.add_sparse(&(0..nf).map(|j| (j, 1.0)).collect::<Vec<_>>(), Cmp::Eq, 1.0);
    let cut = |d: &[f64]| -> Vec<(usize, f64)> {
        std::iter::once((t, 1.0)).chain(iid_values(family, d).into_iter().enumerate().map(|(f, v)| (f, -v))).collect()
    };
    let mut initial: Vec<Vec<f64>> = (0..q)
        .map(|s| {
            let mut d = vec![0.0; q];
            d[s] = 1.0;
            d
        })
        .collect();
    initial.push(vec![1.0 / q as f64; q]);
    for d in &initial {
        lp.add_sparse(&cut(d), Cmp::Ge, 0.0);
    }
    let mut simplex = Simplex::new(&lp);
    let (_, _) = simplex.outcome().optimal()?;
    let mut rng = rng_from(child_seed(cfg.inner.seed, 1));
    let mut starts: Vec<Vec<f64>> = (0..cfg.inner.starts)
        .map(|_| {
            let e: Vec<f64> = (0..q).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
            let s: f64 = e.iter().sum();
            e.iter().map(|v| v / s).collect()
        })
        .collect();
    starts.push(vec![1.0 / q as f64; q]);
    let grid = (q <= 3).then_some(cfg.inner.grid_h);
    let mut best: Option<RhoResult> = None;
    let mut lower = f64::NEG_INFINITY;
    for _ in 0..cfg.max_iters {
        let x = simplex.x();
        lower = lower.max(simplex.objective());
        let u = &x[..nf];
        let mut poly = SimplexPolynomial::zeros(q, k);
        for (f, table) in family.tables().iter().enumerate() {
            for (a, &s) in table.iter().enumerate() {
                if s {
                    poly.tensor_mut(k)[a] += u[f];
                }
            }
        }
        let (v, d) = poly.maximize(grid, &starts);
        if best.as_ref().is_none_or(|b| v < b.value) {
            best = Some(RhoResult { value: v, lower, mixture: u.to_vec(), point: d.clone() });
        }
        let b = best.as_mut().expect("set above");
        b.lower = lower;
        if b.value - lower <= cfg.gap_tol || v <= lower + 1e-10 {
            break;
        }
        simplex.add_row(&cut(&d), Cmp::Ge, 0.0)?;
        starts.push(d);
    }
    best.ok_or_else(|| Error::Lp("no iterations".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Resistance {
    Resistant { dy: ConstraintDist, dn: ConstraintDist, sy: f64, sn: f64 },
    NotResistant { curve_lower: f64 },
    Undecided { curve_lower: f64, curve_upper: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResistanceReport {
    pub rho: RhoResult,
    pub outcome: Resistance,
    /// Verdict at `β = ρ − 2δ`; anything but DISJOINT there would contradict `curve ≥ ρ`.
    pub below: Verdict,
}

impl ResistanceReport {
    pub fn is_resistant(&self) -> Option<bool> {
        match self.outcome {
            Resistance::Resistant { .. } => Some(true),
            Resistance::NotResistant { .. } => Some(false),
            Resistance::Undecided { .. } => None,
        }
    }
}

/// Resistant iff `K^Y_1 ∩ K^N_ρ ≠ ∅`, decided at `β = ρ + 2δ`.
pub fn is_approx_resistant(family: &Arc<ConstraintFamily>, cfg: &FeasibilityConfig) -> Result<ResistanceReport> {
    let rho = rho(family, cfg)?;
    let delta = cfg.delta;
    let r0 = rho.value;
    let beta = r0 + 2.0 * delta;
    let stop = |lo: f64, _: f64| lo > beta + delta;
    let Some(m) = min_matched(family, 1.0, cfg, &stop)? else {
        return Ok(ResistanceReport {
            rho,
            outcome: Resistance::NotResistant { curve_lower: f64::INFINITY },
            below: Verdict::Disjoint,
        });
    };
    let below = verdict_of(m.lower, m.upper, r0 - 2.0 * delta, delta);
    let outcome = match verdict_of(m.lower, m.upper, beta, delta) {
        Verdict::Intersect => {
            let dy = to_dist(family, &m.dy)?;
            let dn = to_dist(family, &m.dn)?;
            let (sn, _) = sn_value(&dn, &cfg.inner.refined(cfg.refine_factor));
            let sn = sn.max(m.upper);
            if (sn - r0).abs() <= 2.0 * delta {
                Resistance::Resistant { sy: sy_value(&dy), dy, dn, sn }
            } else {
                Resistance::Undecided { curve_lower: m.lower, curve_upper: sn }
            }
        }
        Verdict::Disjoint => Resistance::NotResistant { curve_lower: m.lower },
        Verdict::Undecided => Resistance::Undecided { curve_lower: m.lower, curve_upper: m.upper },
    };
    Ok(ResistanceReport { rho, outcome, below })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaResult {
    pub value: f64,
    pub gamma: f64,
    /// Spacing of the finest γ grid searched.
    pub resolution: f64,
    pub points: Vec<CurvePoint>,
}

/// `min_γ curve(γ)/γ` over the grid `{i/m}`, refined twice by a factor of 10 around the minimizer.
///
/// Grid points with `ρ/γ` above the incumbent ratio are skipped, since `curve ≥ ρ`.
pub fn alpha(family: &Arc<ConstraintFamily>, step: f64, cfg: &FeasibilityConfig) -> Result<AlphaResult> {
    if !(step > 0.0 && step <= 0.1) {
        return Err(Error::InvalidParams(format!("grid step {step} outside (0, 0.1]")));
    }
    let floor = rho(family, cfg)?.lower - 1e-9;
    let mut m = (1.0 / step).round() as u64;
    let mut best = (f64::INFINITY, 1.0);
    let mut points = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut visit = |num: u64, den: u64, best: &mut (f64, f64), points: &mut Vec<CurvePoint>| -> Result<()> {
        let g = gcd(num, den);
        if !seen.insert((num / g, den / g)) {
            return Ok(());
        }
        let gamma = num as f64 / den as f64;
        if floor / gamma >= best.0 {
            return Ok(());
        }
        let bound = best.0 * gamma;
        let p = curve_point_until(family, gamma, cfg, &|lo, _| lo >= bound)?;
        if p.beta / gamma < best.0 {
            *best = (p.beta / gamma, gamma);
        }
        points.push(p);
        Ok(())
    };
    for i in (1..=m).rev() {
        visit(i, m, &mut best, &mut points)?;
    }
    for _ in 0..2 {
        let centre = (best.1 * (10 * m) as f64).round() as u64;
        m *= 10;
        for num in centre.saturating_sub(10).max(1)..=(centre + 10).min(m) {
            visit(num, m, &mut best, &mut points)?;
        }
    }
    Ok(AlphaResult { value: best.0, gamma: best.1, resolution: 1.0 / m as f64, points })
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessCheck {
    pub sy: f64,
    pub sn: f64,
    pub marginal_deviation: f64,
}

/// Membership values of a candidate matched pair.
pub fn check_witness(dy: &ConstraintDist, dn: &ConstraintDist, cfg: &InnerConfig) -> WitnessCheck {
    WitnessCheck {
        sy: sy_value(dy),
        sn: sn_value(dn, cfg).0,
        marginal_deviation: dy.marginals().max_deviation(&dn.marginals()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dicut() -> Arc<ConstraintFamily> {
        Arc::new(ConstraintFamily::dicut())
    }

    #[test]
    fn sy_examples() {
        let f = dicut();
        assert!((sy_value(&ConstraintDist::uniform(f.clone())) - 0.25).abs() < 1e-12);
        let d = ConstraintDist::new(f, vec![0.0, 0.6, 0.4, 0.0]).unwrap();
        // (0, γ, 1−γ, 0) puts mass 1−γ on the satisfying pattern (2,1)
        assert!((sy_value(&d) - 0.4).abs() < 1e-12);
        let one = Arc::new(ConstraintFamily::constant_one(2, 2));
        assert!((sy_value(&ConstraintDist::uniform(one)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sn_examples() {
        let f = dicut();
        let cfg = InnerConfig::default();
        let (v, cols) = sn_value(&ConstraintDist::point_mass(f.clone(), 0, &[1, 0]), &cfg);
        assert!((v - 1.0).abs() < 1e-12);
        assert!((cols.columns[1][1] - 1.0).abs() < 1e-12 && (cols.columns[0][0] - 1.0).abs() < 1e-12);
        assert!((sn_value(&ConstraintDist::uniform(f), &cfg).0 - 0.25).abs() < 1e-9);
        let cut = Arc::new(ConstraintFamily::max_cut());
        assert!((sn_value(&ConstraintDist::uniform(cut), &cfg).0 - 0.5).abs() < 1e-9);
    }

    #[test]
    fn decide_examples() {
        let f = dicut();
        let cfg = FeasibilityConfig::default();
        let yes = decide_intersection(&f, 0.7, 0.5, &cfg).unwrap();
        assert_eq!(yes.verdict, Verdict::Intersect);
        let (dy, dn) = yes.witness.unwrap();
        assert!(dy.marginals().max_deviation(&dn.marginals()) < 1e-7);
        assert!(sy_value(&dy) >= 0.7 - 1e-7);
        assert_eq!(decide_intersection(&f, 0.7, 0.3, &cfg).unwrap().verdict, Verdict::Disjoint);
        let one = Arc::new(ConstraintFamily::constant_one(2, 2));
        assert_eq!(decide_intersection(&one, 1.0, 0.5, &cfg).unwrap().verdict, Verdict::Disjoint);
        assert!(decide_intersection(&f, 0.5, 0.5, &cfg).is_err());
    }

    #[test]
    fn empty_yes_side() {
        let z = Arc::new(ConstraintFamily::zero(2, 2));
        let out = decide_intersection(&z, 0.5, 0.2, &FeasibilityConfig::default()).unwrap();
        assert_eq!(out.verdict, Verdict::Disjoint);
        assert_eq!(out.note.as_deref(), Some("K^Y empty"));
    }

    #[test]
    fn dicut_curve_points() {
        let f = dicut();
        let cfg = FeasibilityConfig::default();
        for (g, b) in [(2.0 / 3.0, 1.0 / 3.0), (0.6, 4.0 / 15.0), (0.55, 0.2025 / 0.8)] {
            let p = curve_point(&f, g, &cfg).unwrap();
            assert!((p.beta - b).abs() < 1e-4, "gamma {g}: {} vs {b}", p.beta);
            assert!(p.lower <= p.beta + 1e-9, "lower {} beta {}", p.lower, p.beta);
        }
    }

    #[test]
    fn rho_examples() {
        let cfg = FeasibilityConfig::default();
        assert!((rho(&ConstraintFamily::dicut(), &cfg).unwrap().value - 0.25).abs() < 1e-6);
        for q in 2..=4 {
            let r = rho(&ConstraintFamily::qcol(q), &cfg).unwrap();
            assert!((r.value - (1.0 - 1.0 / q as f64)).abs() < 1e-6, "q={q}: {}", r.value);
        }
        assert!((rho(&ConstraintFamily::qug(2), &cfg).unwrap().value - 0.5).abs() < 1e-6);
    }

    #[test]
    fn resistance_examples() {
        let cfg = FeasibilityConfig::default();
        let cut = is_approx_resistant(&Arc::new(ConstraintFamily::max_cut()), &cfg).unwrap();
        assert_eq!(cut.is_resistant(), Some(true));
        assert_eq!(cut.below, Verdict::Disjoint);
        let di = is_approx_resistant(&dicut(), &cfg).unwrap();
        assert_eq!(di.is_resistant(), Some(false));
    }

    #[test]
    fn product_assignment_validation() {
        assert!(SymmetricProductAssignment::new(vec![vec![0.5, 0.5], vec![1.0, 0.0]]).is_ok());
        assert!(SymmetricProductAssignment::new(vec![vec![0.5, 0.6], vec![1.0, 0.0]]).is_err());
    }
}
