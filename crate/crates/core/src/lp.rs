//! Dense two-phase tableau simplex for small LPs over `x ≥ 0`.
//!
//! [`Simplex`] keeps the optimal tableau so rows can be appended afterwards
//! and the optimum restored by dual simplex pivots; this is what the
//! cutting-plane loops use.

use crate::error::{Error, Result};

const EPS: f64 = 1e-9;
/// Consecutive degenerate pivots before switching from Dantzig to Bland.
const STALL_LIMIT: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotRule {
    Bland,
    /// Most negative reduced cost, falling back to Bland after a degenerate stall.
    Dantzig,
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    n: usize,
    objective: Vec<f64>,
    maximize: bool,
    rows: Vec<(Vec<f64>, Cmp, f64)>,
    rule: PivotRule,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Result<(Vec<f64>, f64)> {
        match self {
            LpOutcome::Optimal { x, objective } => Ok((x, objective)),
            LpOutcome::Infeasible => Err(Error::Lp("infeasible".into())),
            LpOutcome::Unbounded => Err(Error::Lp("unbounded".into())),
        }
    }
}

impl LinearProgram {
    pub fn minimize(objective: Vec<f64>) -> Self {
        Self { n: objective.len(), objective, maximize: false, rows: Vec::new(), rule: PivotRule::Dantzig }
    }

    pub fn maximize(objective: Vec<f64>) -> Self {
        Self { maximize: true, ..Self::minimize(objective) }
    }

    pub fn with_rule(mut self, rule: PivotRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add(&mut self, coeffs: Vec<f64>, cmp: Cmp, rhs: f64) {
        assert_eq!(coeffs.len(), self.n, "row width must match variable count");
        self.rows.push((coeffs, cmp, rhs));
    }

    /// Adds a row given as sparse `(index, coefficient)` pairs.
    pub fn add_sparse(&mut self, coeffs: &[(usize, f64)], cmp: Cmp, rhs: f64) {
        let mut row = vec![0.0; self.n];
        for &(j, c) in coeffs {
            row[j] += c;
        }
        self.add(row, cmp, rhs);
    }

    pub fn solve(&self) -> LpOutcome {
        let mut s = Simplex::new(self);
        s.status()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Col {
    Structural,
    Slack,
    Artificial,
}

/// Simplex state retained between solves.
#[derive(Debug, Clone)]
pub struct Simplex {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    /// Reduced costs of the minimization form.
    cost: Vec<f64>,
    kind: Vec<Col>,
    basis: Vec<usize>,
    n: usize,
    /// Minimization-form objective coefficients over structural columns.
    c: Vec<f64>,
    maximize: bool,
    rule: PivotRule,
    status: Status,
    /// Rows appended by `add_row`, tagged by their slack column.
    cut_slacks: Vec<usize>,
}

impl Simplex {
    pub fn new(lp: &LinearProgram) -> Self {
        let n = lp.n;
        let sign = if lp.maximize { -1.0 } else { 1.0 };
        let mut s = Simplex {
            a: Vec::with_capacity(lp.rows.len()),
            b: Vec::with_capacity(lp.rows.len()),
            cost: Vec::new(),
            kind: vec![Col::Structural; n],
            basis: Vec::with_capacity(lp.rows.len()),
            n,
            c: lp.objective.iter().map(|v| sign * v).collect(),
            maximize: lp.maximize,
            rule: lp.rule,
            status: Status::Optimal,
            cut_slacks: Vec::new(),
        };
        // normalize to b ≥ 0 and add slacks / artificials
        let mut extra: Vec<(usize, f64)> = Vec::new();
        for (coeffs, cmp, rhs) in &lp.rows {
            let (row, cmp, rhs) = if *rhs < 0.0 {
                let flipped = match cmp {
                    Cmp::Le => Cmp::Ge,
                    Cmp::Ge => Cmp::Le,
                    Cmp::Eq => Cmp::Eq,
                };
                (coeffs.iter().map(|v| -v).collect::<Vec<_>>(), flipped, -rhs)
            } else {
                (coeffs.clone(), *cmp, *rhs)
            };
            let r = s.a.len();
            let mut row = row;
            row.resize(s.cols(), 0.0);
            s.a.push(row);
            s.b.push(rhs);
            match cmp {
                Cmp::Le => {
                    let j = s.push_col(Col::Slack);
                    s.a[r][j] = 1.0;
                    s.basis.push(j);
                }
                Cmp::Ge => {
                    let j = s.push_col(Col::Slack);
                    s.a[r][j] = -1.0;
                    extra.push((r, 1.0));
                    s.basis.push(usize::MAX);
                }
                Cmp::Eq => {
                    extra.push((r, 1.0));
                    s.basis.push(usize::MAX);
                }
            }
        }
        for (r, v) in extra {
            let j = s.push_col(Col::Artificial);
            s.a[r][j] = v;
            s.basis[r] = j;
        }
        s.phase_one();
        if s.status == Status::Optimal {
            s.cost = s.reduced(&s.c.clone());
            if !s.primal(usize::MAX) {
                s.status = Status::Unbounded;
            }
        }
        s
    }

    fn push_col(&mut self, kind: Col) -> usize {
        for row in self.a.iter_mut() {
            row.push(0.0);
        }
        if !self.cost.is_empty() {
            let at = self.cost.len() - 1;
            self.cost.insert(at, 0.0);
        }
        self.kind.push(kind);
        self.kind.len() - 1
    }

    fn cols(&self) -> usize {
        self.kind.len()
    }

    fn reduced(&self, c: &[f64]) -> Vec<f64> {
        let mut cost = c.to_vec();
        cost.resize(self.cols() + 1, 0.0);
        for (r, &bv) in self.basis.iter().enumerate() {
            let cb = cost[bv];
            if cb != 0.0 {
                for (v, av) in cost.iter_mut().zip(&self.a[r]) {
                    *v -= cb * av;
                }
                let last = self.cols();
                cost[last] -= cb * self.b[r];
            }
        }
        cost
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.a[r][c];
        for v in self.a[r].iter_mut() {
            *v /= p;
        }
        self.b[r] /= p;
        let prow = std::mem::take(&mut self.a[r]);
        let pb = self.b[r];
        for (i, row) in self.a.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&prow) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
                self.b[i] -= f * pb;
            }
        }
        if !self.cost.is_empty() {
            let f = self.cost[c];
            if f != 0.0 {
                for (v, pv) in self.cost.iter_mut().zip(&prow) {
                    *v -= f * pv;
                }
                self.cost[c] = 0.0;
                let last = self.cost.len() - 1;
                self.cost[last] -= f * pb;
            }
        }
        self.a[r] = prow;
        self.basis[r] = c;
    }

    fn entering(&self, bland: bool, allowed: &dyn Fn(usize) -> bool) -> Option<usize> {
        let cols = self.cols();
        if bland {
            (0..cols).find(|&j| allowed(j) && self.cost[j] < -EPS)
        } else {
            let mut best: Option<(f64, usize)> = None;
            for j in 0..cols {
                let cj = self.cost[j];
                if cj < -EPS && allowed(j) && best.is_none_or(|(b, _)| cj < b) {
                    best = Some((cj, j));
                }
            }
            best.map(|(_, j)| j)
        }
    }

    /// Primal simplex on the current cost row. Returns false if unbounded.
    fn primal(&mut self, _limit: usize) -> bool {
        let mut bland = self.rule == PivotRule::Bland;
        let mut stall = 0usize;
        let max_iter = 50_000 + 100 * (self.cols() + self.a.len());
        let kinds = self.kind.clone();
        let allowed = move |j: usize| kinds[j] != Col::Artificial;
        for _ in 0..max_iter {
            let Some(c) = self.entering(bland, &allowed) else { return true };
            let Some((ratio, r)) = self.ratio_test(c) else { return false };
            if ratio <= 1e-12 {
                stall += 1;
                if stall > STALL_LIMIT {
                    bland = true;
                }
            } else {
                stall = 0;
            }
            self.pivot(r, c);
        }
        true
    }

    fn ratio_test(&self, c: usize) -> Option<(f64, usize)> {
        let col_scale = self.a.iter().map(|r| r[c].abs()).fold(1.0, f64::max);
        let mut leave: Option<(f64, usize)> = None;
        for (i, row) in self.a.iter().enumerate() {
            if row[c] > EPS * col_scale {
                let ratio = self.b[i].max(0.0) / row[c];
                let better = match leave {
                    None => true,
                    Some((br, bi)) => ratio < br - 1e-12 || (ratio <= br + 1e-12 && self.basis[i] < self.basis[bi]),
                };
                if better {
                    leave = Some((ratio, i));
                }
            }
        }
        leave
    }

    fn phase_one(&mut self) {
        if !self.kind.contains(&Col::Artificial) {
            return;
        }
        let c1: Vec<f64> = self.kind.iter().map(|k| if *k == Col::Artificial { 1.0 } else { 0.0 }).collect();
        self.cost = self.reduced(&c1);
        let mut bland = self.rule == PivotRule::Bland;
        let mut stall = 0usize;
        let max_iter = 50_000 + 100 * (self.cols() + self.a.len());
        for _ in 0..max_iter {
            let Some(c) = self.entering(bland, &|_| true) else { break };
            let Some((ratio, r)) = self.ratio_test(c) else { break };
            if ratio <= 1e-12 {
                stall += 1;
                if stall > STALL_LIMIT {
                    bland = true;
                }
            } else {
                stall = 0;
            }
            self.pivot(r, c);
        }
        let infeas = -self.cost[self.cols()];
        let scale = 1.0 + self.b.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if infeas > 1e-7 * scale {
            self.status = Status::Infeasible;
            return;
        }
        // drive artificials out; rows with no other support are redundant
        let mut r = 0;
        while r < self.a.len() {
            if self.kind[self.basis[r]] == Col::Artificial {
                let c = (0..self.cols()).find(|&j| self.kind[j] != Col::Artificial && self.a[r][j].abs() > 1e-7);
                match c {
                    Some(c) => self.pivot(r, c),
                    None => {
                        self.a.remove(r);
                        self.b.remove(r);
                        self.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
        let keep: Vec<usize> = (0..self.cols()).filter(|&j| self.kind[j] != Col::Artificial).collect();
        self.remove_cols(&keep);
    }

    /// Keeps only columns in `keep` (sorted), remapping the basis.
    fn remove_cols(&mut self, keep: &[usize]) {
        let mut map = vec![usize::MAX; self.cols()];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        for row in self.a.iter_mut() {
            *row = keep.iter().map(|&j| row[j]).collect();
        }
        if !self.cost.is_empty() {
            let last = self.cost[self.cost.len() - 1];
            let mut c: Vec<f64> = keep.iter().map(|&j| self.cost[j]).collect();
            c.push(last);
            self.cost = c;
        }
        self.kind = keep.iter().map(|&j| self.kind[j]).collect();
        for b in self.basis.iter_mut() {
            *b = map[*b];
        }
        for s in self.cut_slacks.iter_mut() {
            *s = map[*s];
        }
        self.cut_slacks.retain(|&s| s != usize::MAX);
    }

    fn status(&mut self) -> LpOutcome {
        match self.status {
            Status::Infeasible => LpOutcome::Infeasible,
            Status::Unbounded => LpOutcome::Unbounded,
            Status::Optimal => LpOutcome::Optimal { x: self.x(), objective: self.objective() },
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    pub fn outcome(&mut self) -> LpOutcome {
        self.status()
    }

    pub fn x(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for (r, &bv) in self.basis.iter().enumerate() {
            if bv < self.n {
                x[bv] = self.b[r].max(0.0);
            }
        }
        x
    }

    pub fn objective(&self) -> f64 {
        let x = self.x();
        let v: f64 = self.c.iter().zip(&x).map(|(c, v)| c * v).sum();
        if self.maximize {
            -v
        } else {
            v
        }
    }

    pub fn num_rows(&self) -> usize {
        self.a.len()
    }

    /// Appends `coeffs · x (cmp) rhs` (`Le` or `Ge`) and re-optimizes by dual simplex.
    pub fn add_row(&mut self, coeffs: &[(usize, f64)], cmp: Cmp, rhs: f64) -> Result<()> {
        if self.status != Status::Optimal {
            return Err(Error::Lp("rows can only be added to a solved program".into()));
        }
        let sign = match cmp {
            Cmp::Le => 1.0,
            Cmp::Ge => -1.0,
            Cmp::Eq => return Err(Error::Lp("incremental equality rows are not supported".into())),
        };
        let s = self.push_col(Col::Slack);
        let mut row = vec![0.0; self.cols()];
        for &(j, v) in coeffs {
            row[j] += sign * v;
        }
        row[s] = 1.0;
        let mut rb = sign * rhs;
        for (r, &bv) in self.basis.iter().enumerate() {
            let f = row[bv];
            if f != 0.0 {
                for (v, av) in row.iter_mut().zip(&self.a[r]) {
                    *v -= f * av;
                }
                row[bv] = 0.0;
                rb -= f * self.b[r];
            }
        }
        self.a.push(row);
        self.b.push(rb);
        self.basis.push(s);
        self.cut_slacks.push(s);
        self.dual()
    }

    fn dual(&mut self) -> Result<()> {
        let max_iter = 50_000 + 100 * (self.cols() + self.a.len());
        for _ in 0..max_iter {
            let mut leave: Option<(f64, usize)> = None;
            for (i, &bi) in self.b.iter().enumerate() {
                if bi < -1e-10 && leave.is_none_or(|(v, _)| bi < v) {
                    leave = Some((bi, i));
                }
            }
            let Some((_, r)) = leave else {
                // repair tiny dual infeasibilities left by rounding
                if !self.primal(usize::MAX) {
                    self.status = Status::Unbounded;
                }
                return Ok(());
            };
            let mut enter: Option<(f64, f64, usize)> = None;
            for j in 0..self.cols() {
                let arj = self.a[r][j];
                if arj < -EPS {
                    let ratio = self.cost[j].max(0.0) / -arj;
                    let better = enter.is_none_or(|(v, mag, _)| ratio < v - 1e-12 || (ratio <= v + 1e-12 && -arj > mag));
                    if better {
                        enter = Some((ratio, -arj, j));
                    }
                }
            }
            match enter {
                Some((_, _, c)) => self.pivot(r, c),
                None if self.b[r] > -1e-7 => self.b[r] = 0.0,
                None => {
                    self.status = Status::Infeasible;
                    return Ok(());
                }
            }
        }
        Err(Error::Lp("dual simplex iteration limit".into()))
    }

    /// Drops appended rows whose slack is basic with value above `threshold`.
    /// Returns the number removed.
    pub fn prune(&mut self, threshold: f64) -> usize {
        let mut drop_rows = Vec::new();
        let mut drop_cols = Vec::new();
        for &s in &self.cut_slacks {
            if let Some(r) = self.basis.iter().position(|&bv| bv == s) {
                if self.b[r] > threshold {
                    drop_rows.push(r);
                    drop_cols.push(s);
                }
            }
        }
        if drop_rows.is_empty() {
            return 0;
        }
        drop_rows.sort_unstable();
        for &r in drop_rows.iter().rev() {
            self.a.remove(r);
            self.b.remove(r);
            self.basis.remove(r);
        }
        let keep: Vec<usize> = (0..self.cols()).filter(|j| !drop_cols.contains(j)).collect();
        self.remove_cols(&keep);
        drop_rows.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-7
    }

    #[test]
    fn textbook_max() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → 36 at (2, 6)
        let mut lp = LinearProgram::maximize(vec![3.0, 5.0]);
        lp.add(vec![1.0, 0.0], Cmp::Le, 4.0);
        lp.add(vec![0.0, 2.0], Cmp::Le, 12.0);
        lp.add(vec![3.0, 2.0], Cmp::Le, 18.0);
        let (x, obj) = lp.solve().optimal().unwrap();
        assert!(close(obj, 36.0));
        assert!(close(x[0], 2.0) && close(x[1], 6.0));
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + 2y + 3z, x + y + z = 1, y + z ≥ 0.5
        let mut lp = LinearProgram::minimize(vec![1.0, 2.0, 3.0]);
        lp.add(vec![1.0, 1.0, 1.0], Cmp::Eq, 1.0);
        lp.add(vec![0.0, 1.0, 1.0], Cmp::Ge, 0.5);
        let (x, obj) = lp.solve().optimal().unwrap();
        assert!(close(obj, 1.5));
        assert!(close(x[0], 0.5) && close(x[1], 0.5));
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::minimize(vec![1.0, -1.0]);
        lp.add(vec![1.0, 1.0], Cmp::Eq, 1.0);
        lp.add(vec![2.0, 2.0], Cmp::Eq, 2.0);
        lp.add(vec![1.0, 1.0], Cmp::Eq, 1.0);
        let (x, obj) = lp.solve().optimal().unwrap();
        assert!(close(obj, -1.0));
        assert!(close(x[1], 1.0));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::minimize(vec![1.0]);
        lp.add(vec![1.0], Cmp::Ge, 2.0);
        lp.add(vec![1.0], Cmp::Le, 1.0);
        assert_eq!(lp.solve(), LpOutcome::Infeasible);
        let mut lp = LinearProgram::maximize(vec![1.0, 1.0]);
        lp.add(vec![1.0, -1.0], Cmp::Le, 1.0);
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn negative_rhs_is_normalized() {
        // -x ≤ -3 means x ≥ 3
        let mut lp = LinearProgram::minimize(vec![1.0]);
        lp.add(vec![-1.0], Cmp::Le, -3.0);
        let (_, obj) = lp.solve().optimal().unwrap();
        assert!(close(obj, 3.0));
    }

    #[test]
    fn beale_cycling_example_terminates() {
        // Beale's degenerate LP cycles under naive Dantzig; optimum -1/20
        for rule in [PivotRule::Bland, PivotRule::Dantzig] {
            let mut lp = LinearProgram::minimize(vec![-0.75, 150.0, -0.02, 6.0]).with_rule(rule);
            lp.add(vec![0.25, -60.0, -0.04, 9.0], Cmp::Le, 0.0);
            lp.add(vec![0.5, -90.0, -0.02, 3.0], Cmp::Le, 0.0);
            lp.add(vec![0.0, 0.0, 1.0, 0.0], Cmp::Le, 1.0);
            let (_, obj) = lp.solve().optimal().unwrap();
            assert!(close(obj, -0.05), "{rule:?}: {obj}");
        }
    }

    #[test]
    fn incremental_rows_match_fresh_solve() {
        // min t s.t. t ≥ c_i · z for cuts, z on the simplex
        let mut lp = LinearProgram::minimize(vec![0.0, 0.0, 1.0]);
        lp.add(vec![1.0, 1.0, 0.0], Cmp::Eq, 1.0);
        let mut s = Simplex::new(&lp);
        let cuts = [[1.0, 0.0], [0.0, 1.0], [0.7, 0.2]];
        for c in cuts {
            s.add_row(&[(2, 1.0), (0, -c[0]), (1, -c[1])], Cmp::Ge, 0.0).unwrap();
            lp.add(vec![-c[0], -c[1], 1.0], Cmp::Ge, 0.0);
            let fresh = lp.solve().optimal().unwrap().1;
            assert!(close(s.objective(), fresh), "{} vs {}", s.objective(), fresh);
        }
        assert!(close(s.objective(), 0.5));
        // nothing is slack by more than 0.1 → nothing pruned
        assert_eq!(s.prune(0.1), 0);
        assert!(s.is_optimal());
    }

    #[test]
    fn incremental_row_can_make_infeasible() {
        let mut lp = LinearProgram::maximize(vec![1.0]);
        lp.add(vec![1.0], Cmp::Le, 2.0);
        let mut s = Simplex::new(&lp);
        assert!(close(s.objective(), 2.0));
        s.add_row(&[(0, 1.0)], Cmp::Le, 1.5).unwrap();
        assert!(close(s.objective(), 1.5));
        s.add_row(&[(0, 1.0)], Cmp::Ge, 3.0).unwrap();
        assert_eq!(s.outcome(), LpOutcome::Infeasible);
    }

    /// Solves a square system by Gaussian elimination with partial pivoting.
    fn solve_square(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
        let n = b.len();
        for col in 0..n {
            let p = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
            if m[p][col].abs() < 1e-10 {
                return None;
            }
            m.swap(col, p);
            b.swap(col, p);
            for r in 0..n {
                if r != col {
                    let f = m[r][col] / m[col][col];
                    for c in col..n {
                        m[r][c] -= f * m[col][c];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
        Some((0..n).map(|i| b[i] / m[i][i]).collect())
    }

    /// Best vertex of `{x ≥ 0, A x ≤ b}` by enumerating all active sets.
    fn vertex_oracle(c: &[f64], rows: &[(Vec<f64>, f64)]) -> Option<f64> {
        let n = c.len();
        let mut all: Vec<(Vec<f64>, f64)> = rows.to_vec();
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = -1.0;
            all.push((e, 0.0));
        }
        let mut best: Option<f64> = None;
        let mut pick = vec![0usize; n];
        fn rec(
            start: usize,
            depth: usize,
            pick: &mut Vec<usize>,
            all: &[(Vec<f64>, f64)],
            c: &[f64],
            best: &mut Option<f64>,
        ) {
            let n = c.len();
            if depth == n {
                let m: Vec<Vec<f64>> = pick.iter().map(|&i| all[i].0.clone()).collect();
                let b: Vec<f64> = pick.iter().map(|&i| all[i].1).collect();
                if let Some(x) = solve_square(m, b) {
                    let ok = all
                        .iter()
                        .all(|(r, rhs)| r.iter().zip(&x).map(|(a, v)| a * v).sum::<f64>() <= rhs + 1e-7);
                    if ok {
                        let v: f64 = c.iter().zip(&x).map(|(a, v)| a * v).sum();
                        if best.is_none_or(|b| v > b) {
                            *best = Some(v);
                        }
                    }
                }
                return;
            }
            for i in start..all.len() {
                pick[depth] = i;
                rec(i + 1, depth + 1, pick, all, c, best);
            }
        }
        rec(0, 0, &mut pick, &all, c, &mut best);
        best
    }

    fn boxed(rows: Vec<(Vec<f64>, f64)>) -> Vec<(Vec<f64>, f64)> {
        // the box x ≤ 10 keeps every instance bounded
        let mut rows = rows;
        for j in 0..3 {
            let mut e = vec![0.0; 3];
            e[j] = 1.0;
            rows.push((e, 10.0));
        }
        rows
    }

    proptest! {
        #[test]
        fn matches_vertex_enumeration(
            c in prop::collection::vec(-5.0f64..5.0, 3),
            rows in prop::collection::vec((prop::collection::vec(-3.0f64..3.0, 3), 0.1f64..5.0), 1..6),
        ) {
            let rows = boxed(rows);
            let mut lp = LinearProgram::maximize(c.clone());
            for (r, b) in &rows {
                lp.add(r.clone(), Cmp::Le, *b);
            }
            let (x, obj) = lp.solve().optimal().unwrap();
            for (r, b) in &rows {
                prop_assert!(r.iter().zip(&x).map(|(a, v)| a * v).sum::<f64>() <= b + 1e-7);
            }
            let oracle = vertex_oracle(&c, &rows).unwrap();
            prop_assert!((obj - oracle).abs() < 1e-6, "lp {} oracle {}", obj, oracle);
        }

        #[test]
        fn incremental_matches_vertex_enumeration(
            c in prop::collection::vec(-5.0f64..5.0, 3),
            rows in prop::collection::vec((prop::collection::vec(-3.0f64..3.0, 3), 0.1f64..5.0), 1..6),
        ) {
            let rows = boxed(rows);
            let mut lp = LinearProgram::maximize(c.clone());
            for (r, b) in &rows[rows.len() - 3..] {
                lp.add(r.clone(), Cmp::Le, *b);
            }
            let mut s = Simplex::new(&lp);
            for (r, b) in &rows[..rows.len() - 3] {
                let sparse: Vec<(usize, f64)> = r.iter().copied().enumerate().collect();
                s.add_row(&sparse, Cmp::Le, *b).unwrap();
            }
            let oracle = vertex_oracle(&c, &rows).unwrap();
            prop_assert!((s.objective() - oracle).abs() < 1e-6, "lp {} oracle {}", s.objective(), oracle);
        }
    }
}
