//! Maximization of polynomials over probability simplices.
//!
//! [`SimplexPolynomial`] handles one simplex `Δ([q])` (grid + projected
//! gradient polish). [`ColumnObjective`] is the column-symmetric product
//! objective `Σ_{a,x} W(a,x) Π_i P[a_i][x_i]` over `Δ([q])^q`, maximized by
//! point-mass enumeration, an optional joint grid and multistart coordinate
//! ascent.

use rand::Rng as _;

use crate::family::pattern_of;
use crate::rng::{child_seed, rng_from};

/// `Σ_m Σ_{y ∈ [q]^m} T_m[y] Π_j p[y_j]` on `Δ([q])`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPolynomial {
    q: usize,
    tensors: Vec<Vec<f64>>,
}

impl SimplexPolynomial {
    pub fn zeros(q: usize, degree: usize) -> Self {
        Self { q, tensors: (0..=degree).map(|m| vec![0.0; q.pow(m as u32)]).collect() }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn degree(&self) -> usize {
        self.tensors.len() - 1
    }

    pub fn tensor_mut(&mut self, m: usize) -> &mut [f64] {
        &mut self.tensors[m]
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        let mut prods = vec![1.0];
        let mut total = self.tensors[0][0];
        for t in self.tensors.iter().skip(1) {
            prods = prods.iter().flat_map(|a| p.iter().map(move |b| a * b)).collect();
            total += t.iter().zip(&prods).map(|(c, w)| c * w).sum::<f64>();
        }
        total
    }

    pub fn grad(&self, p: &[f64]) -> Vec<f64> {
        let q = self.q;
        let mut g = vec![0.0; q];
        for (m, t) in self.tensors.iter().enumerate().skip(1) {
            for (idx, &c) in t.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                let y = pattern_of(q, m, idx);
                for j in 0..m {
                    let mut prod = c;
                    for (l, &s) in y.iter().enumerate() {
                        if l != j {
                            prod *= p[s];
                        }
                    }
                    g[y[j]] += prod;
                }
            }
        }
        g
    }

    /// Maximizes over `Δ([q])`: vertices, an optional grid of step `grid_h`,
    /// and projected-gradient polish from the best candidates and `starts`.
    pub fn maximize(&self, grid_h: Option<f64>, starts: &[Vec<f64>]) -> (f64, Vec<f64>) {
        let q = self.q;
        let mut cands: Vec<(f64, Vec<f64>)> = Vec::new();
        for s in 0..q {
            let mut p = vec![0.0; q];
            p[s] = 1.0;
            cands.push((self.eval(&p), p));
        }
        if let Some(h) = grid_h {
            let n = (1.0 / h).round().max(1.0) as usize;
            for comp in compositions(n, q) {
                let p: Vec<f64> = comp.iter().map(|&c| c as f64 / n as f64).collect();
                cands.push((self.eval(&p), p));
            }
        }
        cands.sort_by(|a, b| b.0.total_cmp(&a.0));
        cands.truncate(3);
        if grid_h.is_none() {
            let floor = starts.iter().map(|s| self.eval(s)).fold(f64::NEG_INFINITY, f64::max);
            cands.retain(|c| c.0 > floor);
        }
        for s in starts {
            cands.push((self.eval(s), s.clone()));
        }
        let mut best = (f64::NEG_INFINITY, vec![1.0 / q as f64; q]);
        for (_, p) in cands {
            let (v, p) = self.polish(p);
            if v > best.0 {
                best = (v, p);
            }
        }
        best
    }

    /// Projected gradient ascent with step doubling/halving.
    pub fn polish(&self, mut p: Vec<f64>) -> (f64, Vec<f64>) {
        let mut v = self.eval(&p);
        let mut step = 1.0;
        for _ in 0..500 {
            let g = self.grad(&p);
            let unit: Vec<f64> = p.iter().zip(&g).map(|(a, b)| a + b).collect();
            let residual: f64 = project_simplex(&unit).iter().zip(&p).map(|(a, b)| (a - b).abs()).sum();
            if residual < 1e-10 {
                break;
            }
            let mut improved = false;
            while step > 1e-12 {
                let trial: Vec<f64> = p.iter().zip(&g).map(|(a, b)| a + step * b).collect();
                let trial = project_simplex(&trial);
                let tv = self.eval(&trial);
                if tv > v + 1e-15 {
                    improved = tv > v + 1e-13;
                    p = trial;
                    v = tv;
                    step = (step * 2.0).min(1e3);
                    break;
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        (v, p)
    }
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        css += ui;
        let t = (css - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// All `q`-part compositions of `n`.
pub fn compositions(n: usize, q: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(left - c, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, q, &mut Vec::with_capacity(q), &mut out);
    out
}

/// Column-symmetric product assignment: `cols[σ]` is the law `P_σ` of every grid variable `x_{i,σ}`.
pub type Columns = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq)]
pub struct InnerConfig {
    /// Per-column grid step for `q ≤ 3`.
    pub grid_h: f64,
    /// Multistart coordinate ascents.
    pub starts: usize,
    pub max_sweeps: usize,
    pub seed: u64,
}

impl Default for InnerConfig {
    fn default() -> Self {
        Self { grid_h: 0.02, starts: 20, max_sweeps: 30, seed: 0x5eed }
    }
}

impl InnerConfig {
    /// Same search at a finer grid.
    pub fn refined(&self, factor: f64) -> Self {
        Self { grid_h: self.grid_h / factor, ..self.clone() }
    }
}

/// `Σ_{a,x} W(a,x) Π_i P[a_i][x_i]` with `W(a,x) = Σ_f D(f,a) f(x)`.
#[derive(Debug, Clone)]
pub struct ColumnObjective {
    q: usize,
    k: usize,
    /// Non-zero `(a, x, w)` terms.
    terms: Vec<(Vec<usize>, Vec<usize>, f64)>,
}

#[derive(Debug, Clone)]
pub struct InnerMax {
    pub value: f64,
    pub columns: Columns,
    /// Final points of the individual ascents, best first, deduplicated.
    pub local: Vec<(f64, Columns)>,
}

impl ColumnObjective {
    /// Builds `W` from truth tables and weights over `F × [q]^k`.
    pub fn new(q: usize, k: usize, tables: &[Vec<bool>], weights: &[f64]) -> Self {
        let w = q.pow(k as u32);
        let mut acc = vec![0.0; w * w];
        for (f, table) in tables.iter().enumerate() {
            for a in 0..w {
                let d = weights[f * w + a];
                if d == 0.0 {
                    continue;
                }
                for (x, &sat) in table.iter().enumerate() {
                    if sat {
                        acc[a * w + x] += d;
                    }
                }
            }
        }
        let terms = acc
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, &v)| (pattern_of(q, k, i / w), pattern_of(q, k, i % w), v))
            .collect();
        Self { q, k, terms }
    }

    pub fn eval(&self, cols: &Columns) -> f64 {
        self.terms
            .iter()
            .map(|(a, x, w)| w * a.iter().zip(x).map(|(&ai, &xi)| cols[ai][xi]).product::<f64>())
            .sum()
    }

    /// Value at deterministic columns `P_σ = δ_{c(σ)}`.
    pub fn eval_vertex(&self, c: &[usize]) -> f64 {
        self.terms
            .iter()
            .filter(|(a, x, _)| a.iter().zip(x).all(|(&ai, &xi)| c[ai] == xi))
            .map(|(_, _, w)| w)
            .sum()
    }

    /// The objective as a polynomial in column `sigma` with the others fixed.
    pub fn column_polynomial(&self, cols: &Columns, sigma: usize) -> SimplexPolynomial {
        let q = self.q;
        let mut poly = SimplexPolynomial::zeros(q, self.k);
        for (a, x, w) in &self.terms {
            let mut coef = *w;
            let mut idx = 0;
            let mut m = 0;
            for (&ai, &xi) in a.iter().zip(x) {
                if ai == sigma {
                    idx = idx * q + xi;
                    m += 1;
                } else {
                    coef *= cols[ai][xi];
                }
            }
            if coef != 0.0 {
                poly.tensors[m][idx] += coef;
            }
        }
        poly
    }

    pub fn vertex_columns(&self, c: &[usize]) -> Columns {
        c.iter()
            .map(|&s| {
                let mut p = vec![0.0; self.q];
                p[s] = 1.0;
                p
            })
            .collect()
    }

    /// All `q^q` deterministic column choices, best first.
    pub fn vertices(&self) -> Vec<(f64, Vec<usize>)> {
        let q = self.q;
        let total = q.pow(q as u32);
        let mut out: Vec<(f64, Vec<usize>)> = (0..total)
            .map(|i| {
                let c = pattern_of(q, q, i);
                (self.eval_vertex(&c), c)
            })
            .collect();
        out.sort_by(|a, b| b.0.total_cmp(&a.0));
        out
    }

    fn ascend(&self, mut cols: Columns, cfg: &InnerConfig) -> (f64, Columns) {
        let q = self.q;
        let mut v = self.eval(&cols);
        for sweep in 0..cfg.max_sweeps {
            let before = v;
            for sigma in 0..q {
                let poly = self.column_polynomial(&cols, sigma);
                let grid = (sweep == 0 && q <= 3).then_some(cfg.grid_h);
                let (pv, p) = poly.maximize(grid, std::slice::from_ref(&cols[sigma]));
                if pv > v {
                    cols[sigma] = p;
                    v = pv;
                }
            }
            if v - before < 1e-10 {
                break;
            }
        }
        (self.eval(&cols), cols)
    }

    /// Best value found over `Δ([q])^q`, a lower bound on the true maximum.
    pub fn maximize(&self, cfg: &InnerConfig) -> InnerMax {
        let q = self.q;
        let verts = self.vertices();
        let mut starts: Vec<Columns> = Vec::new();
        let mut seen = Vec::new();
        for (v, c) in &verts {
            if starts.len() >= cfg.starts / 4 {
                break;
            }
            if !seen.iter().any(|s: &f64| (s - v).abs() < 1e-12) {
                seen.push(*v);
                starts.push(self.vertex_columns(c));
            }
        }
        if q == 2 {
            let n = (1.0 / cfg.grid_h).round().max(1.0) as usize;
            let mut best: Option<(f64, Columns)> = None;
            for i in 0..=n {
                for j in 0..=n {
                    let (s, t) = (i as f64 / n as f64, j as f64 / n as f64);
                    let cols = vec![vec![1.0 - s, s], vec![1.0 - t, t]];
                    let v = self.eval(&cols);
                    if best.as_ref().is_none_or(|b| v > b.0) {
                        best = Some((v, cols));
                    }
                }
            }
            starts.push(best.expect("grid is non-empty").1);
        }
        starts.push(vec![vec![1.0 / q as f64; q]; q]);
        let mut rng = rng_from(child_seed(cfg.seed, 0));
        while starts.len() < cfg.starts.max(1) {
            let cols = (0..q)
                .map(|_| {
                    let e: Vec<f64> = (0..q).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
                    let s: f64 = e.iter().sum();
                    e.iter().map(|v| v / s).collect()
                })
                .collect();
            starts.push(cols);
        }
        let mut local: Vec<(f64, Columns)> = starts.into_iter().map(|s| self.ascend(s, cfg)).collect();
        let (bv, bc) = &verts[0];
        local.push((*bv, self.vertex_columns(bc)));
        local.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut dedup: Vec<(f64, Columns)> = Vec::new();
        for (v, c) in local {
            let dup = dedup.iter().any(|(_, d)| {
                d.iter().flatten().zip(c.iter().flatten()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) < 1e-6
            });
            if !dup {
                dedup.push((v, c));
            }
        }
        let (value, columns) = dedup[0].clone();
        InnerMax { value, columns, local: dedup }
    }

    /// Linear coefficients `c_P(f,a) = Σ_x f(x) Π_i P[a_i][x_i]` so that the objective is `⟨c_P, D⟩`.
    pub fn cut_coefficients(q: usize, k: usize, tables: &[Vec<bool>], cols: &Columns) -> Vec<f64> {
        let w = q.pow(k as u32);
        let pats: Vec<Vec<usize>> = (0..w).map(|i| pattern_of(q, k, i)).collect();
        // prob[a][x] = Π_i P[a_i][x_i]
        let prob: Vec<Vec<f64>> = pats
            .iter()
            .map(|a| pats.iter().map(|x| a.iter().zip(x).map(|(&ai, &xi)| cols[ai][xi]).product()).collect())
            .collect();
        let mut out = vec![0.0; tables.len() * w];
        for (f, table) in tables.iter().enumerate() {
            for a in 0..w {
                out[f * w + a] = table.iter().zip(&prob[a]).filter(|(s, _)| **s).map(|(_, p)| p).sum();
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn projection_lands_on_simplex() {
        let p = project_simplex(&[0.5, 0.9, -0.3]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|v| *v >= 0.0));
        assert_eq!(project_simplex(&[0.2, 0.8]), vec![0.2, 0.8]);
    }

    #[test]
    fn compositions_count() {
        assert_eq!(compositions(4, 3).len(), 15);
        assert_eq!(compositions(50, 2).len(), 51);
    }

    #[test]
    fn quadratic_interior_max() {
        // p0 p1 on Δ([2]) peaks at (1/2, 1/2) with value 1/4
        let mut poly = SimplexPolynomial::zeros(2, 2);
        poly.tensor_mut(2)[1] = 1.0;
        let (v, p) = poly.maximize(Some(0.1), &[]);
        assert!((v - 0.25).abs() < 1e-12);
        assert!((p[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut poly = SimplexPolynomial::zeros(3, 2);
        poly.tensor_mut(0)[0] = 0.3;
        poly.tensor_mut(1).copy_from_slice(&[0.1, -0.2, 0.4]);
        for (i, v) in poly.tensor_mut(2).iter_mut().enumerate() {
            *v = (i as f64 * 0.37).sin();
        }
        let p = [0.2, 0.5, 0.3];
        let g = poly.grad(&p);
        for s in 0..3 {
            let mut hi = p;
            hi[s] += 1e-6;
            let mut lo = p;
            lo[s] -= 1e-6;
            let fd = (poly.eval(&hi) - poly.eval(&lo)) / 2e-6;
            assert!((fd - g[s]).abs() < 1e-6);
        }
    }

    #[test]
    fn dicut_point_mass_value() {
        // D = δ_{(f,(2,1))}: the deterministic columns P_2 = δ_2, P_1 = δ_1 satisfy it
        let table = vec![false, false, true, false];
        let obj = ColumnObjective::new(2, 2, &[table], &[0.0, 0.0, 1.0, 0.0]);
        let r = obj.maximize(&InnerConfig::default());
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cut_coefficients_reproduce_objective() {
        let tables = vec![vec![false, true, true, false], vec![false, false, true, false]];
        let d = [0.1, 0.2, 0.05, 0.15, 0.1, 0.1, 0.2, 0.1];
        let obj = ColumnObjective::new(2, 2, &tables, &d);
        let cols = vec![vec![0.3, 0.7], vec![0.6, 0.4]];
        let c = ColumnObjective::cut_coefficients(2, 2, &tables, &cols);
        let lin: f64 = c.iter().zip(&d).map(|(a, b)| a * b).sum();
        assert!((lin - obj.eval(&cols)).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn single_function_matches_fine_grid(w in prop::collection::vec(0.0f64..1.0, 4), bits in 1u8..16) {
            // q = k = 2: each column is one parameter, so a 2-d grid at 1e-3 is an oracle
            let table: Vec<bool> = (0..4).map(|i| bits >> i & 1 == 1).collect();
            let s: f64 = w.iter().sum::<f64>().max(1e-9);
            let d: Vec<f64> = w.iter().map(|v| v / s).collect();
            let obj = ColumnObjective::new(2, 2, &[table], &d);
            let found = obj.maximize(&InnerConfig::default()).value;
            let n = 400;
            let mut oracle = f64::NEG_INFINITY;
            for i in 0..=n {
                for j in 0..=n {
                    let (a, b) = (i as f64 / n as f64, j as f64 / n as f64);
                    oracle = oracle.max(obj.eval(&vec![vec![1.0 - a, a], vec![1.0 - b, b]]));
                }
            }
            prop_assert!(found >= oracle - 1e-9, "found {} oracle {}", found, oracle);
            // the grid cannot beat the true maximum by more than its resolution allows
            prop_assert!(found <= oracle + 1e-4);
        }
    }
}

