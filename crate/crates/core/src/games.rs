//! Signal-detection games, padded streaming hard instances, the stream to
//! CSP conversion `Ψ(σ)` and a baseline counting protocol.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::dist::ConstraintDist;
use crate::error::{Error, Result};
use crate::family::ConstraintFamily;
use crate::instance::{opt_value, value, Assignment, Constraint, Instance, OptMode, DEFAULT_ENUM_BUDGET};
use crate::rng::{child_seed, rng_from, Rng};
use crate::sketch::{Stream, StreamUpdate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GameCase {
    Yes,
    No,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdParams {
    pub n: usize,
    pub alpha: f64,
    pub dist_y: ConstraintDist,
    pub dist_n: ConstraintDist,
    pub seed: u64,
}

impl SdParams {
    /// Edges per block, `αn`.
    pub fn edges_per_block(&self) -> Result<usize> {
        let an = self.alpha * self.n as f64;
        let r = an.round();
        if !(self.alpha > 0.0) || (an - r).abs() > 1e-9 {
            return Err(Error::InvalidParams(format!("alpha*n = {an} is not a positive integer")));
        }
        let m = r as usize;
        let k = self.dist_y.family().k();
        if self.dist_y.family() != self.dist_n.family() {
            return Err(Error::InvalidParams("YES and NO distributions use different families".into()));
        }
        if k * m >= self.n {
            return Err(Error::InvalidParams(format!("need alpha*n < n/k, got alpha*n = {m}, n/k = {}", self.n as f64 / k as f64)));
        }
        Ok(m)
    }

    fn dist(&self, case: GameCase) -> &ConstraintDist {
        match case {
            GameCase::Yes => &self.dist_y,
            GameCase::No => &self.dist_n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PaddedParams {
    pub sd: SdParams,
    pub blocks: usize,
    pub tau: f64,
    pub dist_0: ConstraintDist,
}

impl PaddedParams {
    /// `⌊τ/(1−τ)·αn·T⌋`.
    pub fn padding_count(&self) -> Result<usize> {
        if !(0.0..1.0).contains(&self.tau) {
            return Err(Error::InvalidParams(format!("tau = {} outside [0, 1)", self.tau)));
        }
        let m = self.sd.edges_per_block()?;
        Ok((self.tau / (1.0 - self.tau) * (m * self.blocks) as f64 + 1e-9).floor() as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub vars: Vec<usize>,
    pub f: usize,
    pub z: bool,
    /// Sampled pattern, kept only in debug mode.
    pub pattern: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameInstance {
    pub x_star: Assignment,
    pub case: GameCase,
    pub padding: Vec<EdgeRecord>,
    pub blocks: Vec<Vec<EdgeRecord>>,
}

impl GameInstance {
    /// Padding followed by the blocks, in stream order.
    pub fn records(&self) -> impl Iterator<Item = &EdgeRecord> {
        self.padding.iter().chain(self.blocks.iter().flatten())
    }
}

struct Sampler {
    index: WeightedIndex<f64>,
    w: usize,
    q: usize,
    k: usize,
}

impl Sampler {
    fn new(d: &ConstraintDist) -> Result<Self> {
        let fam = d.family();
        let index = WeightedIndex::new(d.probs()).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
        Ok(Self { index, w: fam.num_patterns(), q: fam.q(), k: fam.k() })
    }

    fn draw(&self, rng: &mut Rng) -> (usize, Vec<usize>) {
        let idx = self.index.sample(rng);
        (idx / self.w, crate::family::pattern_of(self.q, self.k, idx % self.w))
    }
}

fn record(x_star: &Assignment, vars: Vec<usize>, (f, pattern): (usize, Vec<usize>), debug: bool) -> EdgeRecord {
    let z = x_star.restrict(&vars) == pattern;
    EdgeRecord { vars, f, z, pattern: debug.then_some(pattern) }
}

fn block(rng: &mut Rng, n: usize, k: usize, m: usize, x_star: &Assignment, s: &Sampler, debug: bool) -> Vec<EdgeRecord> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm[..k * m].chunks(k).map(|e| record(x_star, e.to_vec(), s.draw(rng), debug)).collect()
}

pub fn gen_sd(p: &SdParams, case: GameCase, debug: bool) -> Result<GameInstance> {
    let padded = PaddedParams { sd: p.clone(), blocks: 1, tau: 0.0, dist_0: p.dist_y.clone() };
    gen_pssd(&padded, case, debug)
}

pub fn gen_pssd(p: &PaddedParams, case: GameCase, debug: bool) -> Result<GameInstance> {
    let m = p.sd.edges_per_block()?;
    let pad = p.padding_count()?;
    let fam = p.sd.dist_y.family();
    if p.dist_0.family() != fam {
        return Err(Error::InvalidParams("padding distribution uses a different family".into()));
    }
    let (n, q, k) = (p.sd.n, fam.q(), fam.k());
    let mut rng = rng_from(p.sd.seed);
    let x_star = Assignment((0..n).map(|_| rng.gen_range(0..q)).collect());
    let s0 = Sampler::new(&p.dist_0)?;
    let padding = (0..pad)
        .map(|_| {
            let vars = rand::seq::index::sample(&mut rng, n, k).into_vec();
            record(&x_star, vars, s0.draw(&mut rng), debug)
        })
        .collect();
    let s = Sampler::new(p.sd.dist(case))?;
    let blocks = (0..p.blocks).map(|_| block(&mut rng, n, k, m, &x_star, &s, debug)).collect();
    Ok(GameInstance { x_star, case, padding, blocks })
}

/// Keeps the `z = 1` records as unit-weight constraints.
pub fn psi_of_stream<'a>(
    family: &ConstraintFamily,
    n: usize,
    records: impl IntoIterator<Item = &'a EdgeRecord>,
) -> Result<Instance> {
    let cs: Vec<Constraint> = records.into_iter().filter(|r| r.z).map(|r| Constraint::new(r.f, r.vars.clone())).collect();
    Instance::unweighted(family, n, cs)
}

/// `Ψ(σ)` as an insert-only stream.
pub fn psi_stream(family_path: &str, n: usize, game: &GameInstance) -> Stream {
    let updates = game
        .records()
        .filter(|r| r.z)
        .map(|r| StreamUpdate::insert(Constraint::new(r.f, r.vars.clone())))
        .collect();
    Stream { n, family_path: family_path.into(), updates }
}

/// `α_0 = ε/(20 k q^k)`.
pub fn lemma_alpha0(eps: f64, k: usize, q: usize) -> f64 {
    eps / (20.0 * k as f64 * (q as f64).powi(k as i32))
}

/// `T_0 = 1000/(ε² α)`.
pub fn lemma_t0(eps: f64, alpha: f64) -> f64 {
    1000.0 / (eps * eps * alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueStats {
    pub trials: usize,
    /// Trials whose `Ψ` had no constraints.
    pub empty: usize,
    pub no_constraints: bool,
    /// `value(Ψ, x*)` per non-empty trial.
    pub planted: Vec<f64>,
    /// Optimum per non-empty trial.
    pub optimum: Vec<f64>,
    /// False when any optimum is a heuristic lower bound.
    pub exact: bool,
    pub kept: Vec<usize>,
}

impl ValueStats {
    /// Empirical `p`-quantile of the optima (nearest rank).
    pub fn quantile(&self, p: f64) -> Option<f64> {
        let mut v = self.optimum.clone();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let idx = ((p * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1;
        Some(v[idx])
    }

    pub fn fraction_at_most(&self, t: f64) -> f64 {
        if self.optimum.is_empty() {
            return 0.0;
        }
        self.optimum.iter().filter(|v| **v <= t).count() as f64 / self.optimum.len() as f64
    }
}

pub fn validate_instance_values(p: &PaddedParams, case: GameCase, trials: usize, seed: u64) -> Result<ValueStats> {
    let fam = p.sd.dist_y.family();
    let n = p.sd.n;
    let exact = (fam.q() as f64).powi(n as i32) <= DEFAULT_ENUM_BUDGET as f64;
    let mut stats = ValueStats { trials, empty: 0, no_constraints: false, planted: vec![], optimum: vec![], exact, kept: vec![] };
    for t in 0..trials {
        let mut params = p.clone();
        params.sd.seed = child_seed(seed, t as u64);
        let game = gen_pssd(&params, case, false)?;
        let psi = psi_of_stream(fam, n, game.records())?;
        stats.kept.push(psi.len());
        if psi.is_empty() {
            stats.empty += 1;
            continue;
        }
        stats.planted.push(value(fam, &psi, &game.x_star)?);
        let mode = if exact { OptMode::exact() } else { OptMode::heuristic(params.sd.seed) };
        stats.optimum.push(opt_value(fam, &psi, mode)?.value);
    }
    stats.no_constraints = stats.empty == trials;
    Ok(stats)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdvantageEstimate {
    /// `2·Pr[correct] − 1`.
    pub advantage: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: usize,
}

/// Wilson 95% interval for a binomial proportion.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Alice reveals `x*_1..x*_C`; Bob runs a log-likelihood test on the revealed
/// symbols of `z = 1` edges against the two position marginals.
pub fn counting_protocol_advantage(p: &SdParams, c: usize, trials: usize) -> Result<AdvantageEstimate> {
    if c > p.n {
        return Err(Error::InvalidParams(format!("C = {c} exceeds n = {}", p.n)));
    }
    p.edges_per_block()?;
    let (my, mn) = (p.dist_y.marginals(), p.dist_n.marginals());
    let mut coin = rng_from(child_seed(p.seed, u64::MAX));
    let mut correct = 0;
    for t in 0..trials {
        let case = if t % 2 == 0 { GameCase::Yes } else { GameCase::No };
        let mut params = p.clone();
        params.seed = child_seed(p.seed, t as u64);
        let game = gen_sd(&params, case, false)?;
        let mut ll = 0.0;
        for r in game.records().filter(|r| r.z) {
            for (pos, &v) in r.vars.iter().enumerate() {
                if v < c {
                    let s = game.x_star.0[v];
                    ll += (my.get(r.f, pos, s) + 1e-12).ln() - (mn.get(r.f, pos, s) + 1e-12).ln();
                }
            }
        }
        let guess = if ll > 1e-12 {
            GameCase::Yes
        } else if ll < -1e-12 {
            GameCase::No
        } else if coin.gen::<bool>() {
            GameCase::Yes
        } else {
            GameCase::No
        };
        if guess == case {
            correct += 1;
        }
    }
    let (lo, hi) = wilson_interval(correct, trials);
    Ok(AdvantageEstimate {
        advantage: 2.0 * correct as f64 / trials.max(1) as f64 - 1.0,
        ci_low: 2.0 * lo - 1.0,
        ci_high: 2.0 * hi - 1.0,
        trials,
    })
}
