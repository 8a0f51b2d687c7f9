//! Non-negative functions on boxes `[q_1] × … × [q_k]`, chains, canonical
//! chain-supported functions, the polarization operator and `Polarize`.
//!
//! Points are 0-based coordinate vectors; the box is stored row-major with
//! the first coordinate most significant.

use std::fmt::Debug;
use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on `Σ q_i` accepted by [`GradedFunction::polarize`].
pub const POLARIZE_BUDGET: usize = 16;

/// Scalar masses: `f64` for numerics, integers for exact checks.
pub trait Mass: Copy + PartialOrd + Add<Output = Self> + Sub<Output = Self> + Default + Debug {
    fn is_positive(self) -> bool {
        self > Self::default()
    }

    /// Equality up to the representation's rounding.
    fn close(self, other: Self) -> bool;

    fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Mass for f64 {
    fn close(self, other: Self) -> bool {
        (self - other).abs() <= 1e-9 * self.abs().max(other.abs()).max(1.0)
    }
}

impl Mass for i64 {
    fn close(self, other: Self) -> bool {
        self == other
    }
}

impl Mass for i128 {
    fn close(self, other: Self) -> bool {
        self == other
    }
}

/// `a ≤ b` coordinatewise.
pub fn leq(a: &[usize], b: &[usize]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

pub fn comparable(a: &[usize], b: &[usize]) -> bool {
    leq(a, b) || leq(b, a)
}

/// True iff `points` is totally ordered under `≤`.
pub fn is_chain(points: &[Vec<usize>]) -> bool {
    points
        .iter()
        .enumerate()
        .all(|(i, a)| points[i + 1..].iter().all(|b| comparable(a, b)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradedFunction<T> {
    dims: Vec<usize>,
    values: Vec<T>,
}

/// One polarization update performed by [`GradedFunction::polarize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarizeStep<T> {
    /// Identifies the while loop that issued the step.
    pub loop_id: usize,
    pub depth: usize,
    /// Position of `u` on the chain of the lower half.
    pub i: usize,
    /// Position of `v` on the chain of the top slice.
    pub j: usize,
    pub u: Vec<usize>,
    pub v: Vec<usize>,
    pub eps: T,
}

impl<T: Mass> GradedFunction<T> {
    pub fn new(dims: Vec<usize>, values: Vec<T>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Shape(format!("invalid box dims {dims:?}")));
        }
        let size: usize = dims.iter().product();
        if values.len() != size {
            return Err(Error::Shape(format!("box of size {size} given {} values", values.len())));
        }
        if values.iter().any(|v| *v < T::default()) {
            return Err(Error::InvalidDistribution("negative mass".into()));
        }
        Ok(Self { dims, values })
    }

    pub fn zeros(dims: Vec<usize>) -> Self {
        let size = dims.iter().product();
        Self { dims, values: vec![T::default(); size] }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn index(&self, point: &[usize]) -> usize {
        point.iter().zip(&self.dims).fold(0, |acc, (&x, &d)| acc * d + x)
    }

    pub fn point(&self, mut index: usize) -> Vec<usize> {
        let mut p = vec![0; self.dims.len()];
        for (slot, &d) in p.iter_mut().zip(&self.dims).rev() {
            *slot = index % d;
            index /= d;
        }
        p
    }

    pub fn get(&self, point: &[usize]) -> T {
        self.values[self.index(point)]
    }

    pub fn set(&mut self, point: &[usize], v: T) {
        let i = self.index(point);
        self.values[i] = v;
    }

    pub fn total(&self) -> T {
        self.values.iter().fold(T::default(), |a, &b| a + b)
    }

    /// `μ_{i,σ} = Σ_{a: a_i = σ} A(a)`, one row per coordinate.
    pub fn marginals(&self) -> Vec<Vec<T>> {
        let mut out: Vec<Vec<T>> = self.dims.iter().map(|&d| vec![T::default(); d]).collect();
        for (idx, &v) in self.values.iter().enumerate() {
            for (i, &x) in self.point(idx).iter().enumerate() {
                out[i][x] = out[i][x] + v;
            }
        }
        out
    }

    pub fn support(&self) -> Vec<Vec<usize>> {
        (0..self.values.len())
            .filter(|&i| self.values[i].is_positive())
            .map(|i| self.point(i))
            .collect()
    }

    pub fn is_chain_supported(&self) -> bool {
        is_chain(&self.support())
    }

    /// The `(u, v)`-polarization and its amount `ε = min(A(u), A(v))`.
    pub fn polarize_step(&self, u: &[usize], v: &[usize]) -> Result<(Self, T)> {
        if comparable(u, v) {
            return Err(Error::ComparablePoints);
        }
        let mut out = self.clone();
        let eps = out.apply_step(u, v);
        Ok((out, eps))
    }

    fn apply_step(&mut self, u: &[usize], v: &[usize]) -> T {
        let (iu, iv) = (self.index(u), self.index(v));
        let eps = Mass::min(self.values[iu], self.values[iv]);
        if !eps.is_positive() {
            return eps;
        }
        let lo: Vec<usize> = u.iter().zip(v).map(|(a, b)| *a.min(b)).collect();
        let hi: Vec<usize> = u.iter().zip(v).map(|(a, b)| *a.max(b)).collect();
        let (il, ih) = (self.index(&lo), self.index(&hi));
        // x - x is exactly zero, so the smaller of the two vanishes
        self.values[iu] = self.values[iu] - eps;
        self.values[iv] = self.values[iv] - eps;
        self.values[il] = self.values[il] + eps;
        self.values[ih] = self.values[ih] + eps;
        eps
    }

    /// Runs `Polarize`, returning the chain-supported result and the step trace.
    pub fn polarize(&self) -> Result<(Self, Vec<PolarizeStep<T>>)> {
        let budget: usize = self.dims.iter().sum();
        if budget > POLARIZE_BUDGET {
            return Err(Error::PolarizeBudget(budget));
        }
        let mut run = Polarizer { a: self.clone(), trace: Vec::new(), loops: 0 };
        let lo = vec![0; self.dims.len()];
        let hi: Vec<usize> = self.dims.iter().map(|d| d - 1).collect();
        run.polarize(&lo, &hi, 0)?;
        Ok((run.a, run.trace))
    }

    /// The unique chain-supported function with row marginals `marg`.
    ///
    /// Repeatedly puts `τ = min_i rem_{i,top_i}` on the current top point,
    /// then lowers the top of the first coordinate attaining the minimum.
    pub fn canonical(marg: &[Vec<T>]) -> Result<Self> {
        let dims: Vec<usize> = marg.iter().map(|r| r.len()).collect();
        let mut out = Self::zeros(dims);
        if marg.is_empty() || marg.iter().any(|r| r.is_empty()) {
            return Err(Error::Shape("empty marginal row".into()));
        }
        if marg.iter().flatten().any(|v| *v < T::default()) {
            return Err(Error::InvalidDistribution("negative marginal".into()));
        }
        let totals: Vec<T> = marg.iter().map(|r| r.iter().fold(T::default(), |a, &b| a + b)).collect();
        if totals.iter().any(|t| !t.close(totals[0])) {
            return Err(Error::InvalidDistribution(format!("marginal rows have different totals {totals:?}")));
        }
        let mut rem: Vec<Vec<T>> = marg.to_vec();
        let mut top: Vec<usize> = out.dims.iter().map(|d| d - 1).collect();
        loop {
            let mut h = 0;
            for i in 1..rem.len() {
                if rem[i][top[i]] < rem[h][top[h]] {
                    h = i;
                }
            }
            let tau = rem[h][top[h]];
            if tau.is_positive() {
                let i = out.index(&top);
                out.values[i] = out.values[i] + tau;
            }
            for (r, &t) in rem.iter_mut().zip(&top) {
                r[t] = r[t] - tau;
            }
            if top[h] == 0 {
                break;
            }
            top[h] -= 1;
        }
        Ok(out)
    }
}

struct Polarizer<T> {
    a: GradedFunction<T>,
    trace: Vec<PolarizeStep<T>>,
    loops: usize,
}

/// All points of the sub-box `[lo, hi]` in row-major order.
fn box_points(lo: &[usize], hi: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p = lo.to_vec();
    loop {
        out.push(p.clone());
        let mut i = p.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if p[i] < hi[i] {
                p[i] += 1;
                break;
            }
            p[i] = lo[i];
        }
    }
}

fn rank(p: &[usize], lo: &[usize]) -> usize {
    p.iter().zip(lo).map(|(x, l)| x - l).sum()
}

impl<T: Mass> Polarizer<T> {
    fn positive_points(&self, lo: &[usize], hi: &[usize]) -> Vec<Vec<usize>> {
        box_points(lo, hi).into_iter().filter(|p| self.a.get(p).is_positive()).collect()
    }

    fn polarize(&mut self, lo: &[usize], hi: &[usize], depth: usize) -> Result<()> {
        let wide: Vec<usize> = (0..lo.len()).filter(|&i| hi[i] > lo[i]).collect();
        if wide.len() <= 1 {
            return Ok(());
        }
        let kc = *wide.last().expect("non-empty");
        let mut lower_hi = hi.to_vec();
        lower_hi[kc] -= 1;
        let mut top_lo = lo.to_vec();
        top_lo[kc] = hi[kc];
        self.polarize(lo, &lower_hi, depth + 1)?;
        self.polarize(&top_lo, hi, depth + 1)?;

        let loop_id = self.loops;
        self.loops += 1;
        loop {
            // member points of the maximal supporting chains sit at position = rank
            let mut lower = self.positive_points(lo, &lower_hi);
            lower.sort_by_key(|p| rank(p, lo));
            let mut upper: Vec<Vec<usize>> =
                self.positive_points(&top_lo, hi).into_iter().filter(|p| p.as_slice() != hi).collect();
            upper.sort_by_key(|p| rank(p, &top_lo));
            let pair = lower.iter().find_map(|a| {
                upper
                    .iter()
                    .find(|b| a.iter().zip(b.iter()).map(|(x, y)| *x.max(y)).eq(hi.iter().copied()))
                    .map(|b| (a.clone(), b.clone()))
            });
            let Some((u, v)) = pair else { break };
            let eps = self.a.apply_step(&u, &v);
            self.trace.push(PolarizeStep {
                loop_id,
                depth,
                i: rank(&u, lo),
                j: rank(&v, &top_lo),
                u,
                v,
                eps,
            });
            self.polarize(lo, &lower_hi, depth + 1)?;
        }

        let rest: Vec<Vec<usize>> =
            self.positive_points(lo, hi).into_iter().filter(|p| p.as_slice() != hi).collect();
        if rest.is_empty() {
            return Ok(());
        }
        let ell = wide
            .iter()
            .copied()
            .find(|&l| rest.iter().all(|p| p[l] < hi[l]))
            .ok_or_else(|| Error::InvalidDistribution("polarize found no free coordinate".into()))?;
        let mut clean_hi = hi.to_vec();
        clean_hi[ell] -= 1;
        self.polarize(lo, &clean_hi, depth + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn step_on_antichain() {
        let a = GradedFunction::new(vec![2, 2], vec![0.0, 0.5, 0.5, 0.0]).unwrap();
        let (b, eps) = a.polarize_step(&[0, 1], &[1, 0]).unwrap();
        assert_eq!(eps, 0.5);
        assert_eq!(b.values(), &[0.5, 0.0, 0.0, 0.5]);
        assert_eq!(a.polarize_step(&[0, 0], &[1, 1]).unwrap_err(), Error::ComparablePoints);
    }

    #[test]
    fn step_without_mass_is_identity() {
        let a = GradedFunction::new(vec![2, 2], vec![0.2, 0.0, 0.5, 0.3]).unwrap();
        let (b, eps) = a.polarize_step(&[0, 1], &[1, 0]).unwrap();
        assert_eq!(eps, 0.0);
        assert_eq!(a, b);
    }

    #[test]
    fn polarize_uniform_antichain() {
        let a = GradedFunction::new(vec![2, 2], vec![0.0, 0.5, 0.5, 0.0]).unwrap();
        let (b, trace) = a.polarize().unwrap();
        assert_eq!(trace.len(), 1);
        assert_eq!(b.values(), &[0.5, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn chain_input_is_fixpoint() {
        let a = GradedFunction::new(vec![2, 2], vec![0.25, 0.5, 0.0, 0.25]).unwrap();
        let (b, trace) = a.polarize().unwrap();
        assert!(trace.is_empty());
        assert_eq!(a, b);
    }

    #[test]
    fn canonical_examples() {
        let c = GradedFunction::canonical(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert_eq!(c.values(), &[0.5, 0.0, 0.0, 0.5]);
        let c = GradedFunction::canonical(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(c.values(), &[0.0, 0.0, 1.0, 0.0]);
        let c = GradedFunction::canonical(&[vec![0.2, 0.3, 0.5]]).unwrap();
        assert_eq!(c.values(), &[0.2, 0.3, 0.5]);
        assert!(GradedFunction::canonical(&[vec![0.5, 0.5], vec![0.2, 0.2]]).is_err());
    }

    #[test]
    fn chain_predicate() {
        assert!(is_chain(&[vec![0, 0], vec![0, 1], vec![1, 1]]));
        assert!(!is_chain(&[vec![0, 1], vec![1, 0]]));
    }

    #[test]
    fn budget_enforced() {
        let a: GradedFunction<f64> = GradedFunction::zeros(vec![9, 9]);
        assert_eq!(a.polarize().unwrap_err(), Error::PolarizeBudget(18));
    }

    /// Distribution on the maximal chain `chain` with the given marginals, if non-negative.
    fn solve_on_chain(chain: &[[usize; 2]; 3], mu: &[Vec<f64>]) -> Option<[f64; 3]> {
        // chain 00 < m < 11 with m = 01 or 10; D(11) = μ_{c,1} for the coordinate c where m_c = 0
        let c = if chain[1][0] == 0 { 0 } else { 1 };
        let d11 = mu[c][1];
        let d00 = mu[1 - c][0];
        let dm = 1.0 - d11 - d00;
        (dm >= -1e-12).then_some([d00, dm, d11])
    }

    proptest! {
        #[test]
        fn canonical_matches_chain_enumeration(p in 0.0f64..1.0, r in 0.0f64..1.0) {
            let mu = vec![vec![1.0 - p, p], vec![1.0 - r, r]];
            let c = GradedFunction::canonical(&mu).unwrap();
            prop_assert!(c.is_chain_supported());
            let chains = [[[0, 0], [0, 1], [1, 1]], [[0, 0], [1, 0], [1, 1]]];
            let mut found = 0;
            for ch in &chains {
                if let Some(d) = solve_on_chain(ch, &mu) {
                    let mut g = GradedFunction::<f64>::zeros(vec![2, 2]);
                    for (pt, &m) in ch.iter().zip(&d) {
                        g.set(pt, m.max(0.0));
                    }
                    for (a, b) in g.values().iter().zip(c.values()) {
                        prop_assert!((a - b).abs() < 1e-12);
                    }
                    found += 1;
                }
            }
            prop_assert!(found >= 1);
        }

        #[test]
        fn integer_polarize_is_exact(dims in prop::collection::vec(1usize..4, 1..4), seed in any::<u64>()) {
            let size: usize = dims.iter().product();
            let mut s = seed;
            let values: Vec<i64> = (0..size)
                .map(|_| {
                    s = crate::rng::splitmix64(s);
                    if s % 3 == 0 { 0 } else { (s >> 40) as i64 % 17 }
                })
                .collect();
            let a = GradedFunction::new(dims, values).unwrap();
            let (b, _) = a.polarize().unwrap();
            prop_assert_eq!(a.marginals(), b.marginals());
            prop_assert_eq!(a.total(), b.total());
            prop_assert!(b.is_chain_supported());
            prop_assert_eq!(b, GradedFunction::canonical(&a.marginals()).unwrap());
        }

        #[test]
        fn loop_pairs_increase(dims in prop::collection::vec(1usize..5, 2..5), values in prop::collection::vec(0i64..9, 256)) {
            let size: usize = dims.iter().product();
            let a = GradedFunction::new(dims, values[..size].to_vec()).unwrap();
            let (_, trace) = a.polarize().unwrap();
            let mut last = std::collections::HashMap::new();
            for s in &trace {
                prop_assert!(!comparable(&s.u, &s.v));
                if let Some(prev) = last.insert(s.loop_id, (s.i, s.j)) {
                    prop_assert!(prev < (s.i, s.j), "loop {}: {:?} then {:?}", s.loop_id, prev, (s.i, s.j));
                }
            }
        }

        #[test]
        fn step_preserves_integer_marginals(values in prop::collection::vec(0i64..20, 9)) {
            let a = GradedFunction::new(vec![3, 3], values).unwrap();
            let (b, _) = a.polarize_step(&[0, 2], &[1, 0]).unwrap();
            prop_assert_eq!(a.marginals(), b.marginals());
        }
    }
}
