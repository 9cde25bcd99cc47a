//! Bounded primal simplex on a dense basis inverse.
//!
//! Columns are the structural variables, one slack per row (`a'x + s = b`),
//! and phase-one artificials for rows whose slack cannot absorb the initial
//! residual. Pricing and the ratio test both follow Bland's smallest-index
//! rule, so the pivot path is a pure function of the input program. The
//! inverse is maintained by elementary row updates and rebuilt from scratch
//! every `REFACTOR_EVERY` pivots and before optimality is declared.

use super::{LinearProgram, LpSolution, LpStatus, Sense};
use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const PHASE_ONE_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Basic,
    Lower,
    Upper,
    /// Nonbasic free variable held at zero.
    Zero,
}

enum Outcome {
    Optimal,
    Unbounded,
}

/// Working state for one solve. Not shareable; use one per worker.
#[derive(Debug, Default)]
pub struct SimplexSolver {
    m: usize,
    cols: Vec<Vec<(usize, f64)>>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    x: Vec<f64>,
    state: Vec<State>,
    basis: Vec<usize>,
    binv: Vec<f64>,
    b: Vec<f64>,
    since_refactor: usize,
    iterations: usize,
    max_iterations: usize,
    // scratch
    y: Vec<f64>,
    alpha: Vec<f64>,
}

/// Solves `lp` with a fresh solver.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    SimplexSolver::new().solve(lp)
}

impl SimplexSolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn solve(&mut self, lp: &LinearProgram) -> Result<LpSolution> {
        lp.validate()?;
        let n = lp.variables.len();
        let artificials = self.setup(lp);
        let ncols = self.cols.len();

        if artificials > 0 {
            let mut cost = vec![0.0; ncols];
            for c in cost.iter_mut().skip(n + self.m) {
                *c = 1.0;
            }
            // phase one is bounded below by zero, so it always terminates optimal
            self.run(&cost)?;
            let infeas: f64 = (n + self.m..ncols).map(|j| self.x[j]).sum();
            let scale = 1.0 + self.b.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            if infeas > PHASE_ONE_TOL * scale {
                return Ok(self.terminal(LpStatus::Infeasible, lp));
            }
            for j in n + self.m..ncols {
                self.ub[j] = 0.0;
                if self.state[j] != State::Basic {
                    self.x[j] = 0.0;
                    self.state[j] = State::Lower;
                }
            }
        }

        let mut cost = vec![0.0; ncols];
        for (c, v) in cost.iter_mut().zip(&lp.variables) {
            *c = v.cost;
        }
        match self.run(&cost)? {
            Outcome::Unbounded => return Ok(self.terminal(LpStatus::Unbounded, lp)),
            Outcome::Optimal => {}
        }

        self.refactor()?;
        self.compute_duals(&cost);
        let primal: Vec<f64> = self.x[..n].to_vec();
        let duals = self.y.clone();
        let reduced_costs = (0..n).map(|j| self.reduced_cost(j, &cost)).collect();
        Ok(LpSolution {
            status: LpStatus::Optimal,
            objective: lp.evaluate(&primal),
            primal,
            duals,
            reduced_costs,
            iterations: self.iterations,
        })
    }

    fn terminal(&self, status: LpStatus, lp: &LinearProgram) -> LpSolution {
        let objective = match status {
            LpStatus::Infeasible => f64::INFINITY,
            LpStatus::Unbounded => f64::NEG_INFINITY,
            LpStatus::Optimal => unreachable!(),
        };
        // sized zero vectors so callers never index out of range
        LpSolution {
            status,
            objective,
            primal: vec![0.0; lp.variables.len()],
            duals: vec![0.0; lp.constraints.len()],
            reduced_costs: vec![0.0; lp.variables.len()],
            iterations: self.iterations,
        }
    }

    /// Builds the column structure and a starting basis of slacks and
    /// artificials. Returns the number of artificials.
    fn setup(&mut self, lp: &LinearProgram) -> usize {
        let n = lp.variables.len();
        let m = lp.constraints.len();
        self.m = m;
        self.cols = vec![Vec::new(); n + m];
        self.lb = Vec::with_capacity(n + 2 * m);
        self.ub = Vec::with_capacity(n + 2 * m);
        self.x = Vec::with_capacity(n + 2 * m);
        self.state = Vec::with_capacity(n + 2 * m);
        self.b = lp.constraints.iter().map(|c| c.rhs).collect();
        self.iterations = 0;
        self.since_refactor = 0;

        for (i, c) in lp.constraints.iter().enumerate() {
            for &(j, a) in &c.coeffs {
                self.cols[j].push((i, a));
            }
        }
        for v in &lp.variables {
            self.lb.push(v.lower);
            self.ub.push(v.upper);
            let (x, s) = if v.lower.is_finite() {
                (v.lower, State::Lower)
            } else if v.upper.is_finite() {
                (v.upper, State::Upper)
            } else {
                (0.0, State::Zero)
            };
            self.x.push(x);
            self.state.push(s);
        }

        let mut residual = self.b.clone();
        for j in 0..n {
            if self.x[j] != 0.0 {
                for &(i, a) in &self.cols[j] {
                    residual[i] -= a * self.x[j];
                }
            }
        }

        self.basis = vec![usize::MAX; m];
        let mut diag = vec![1.0; m];
        let mut artificial_rows = Vec::new();
        for (i, c) in lp.constraints.iter().enumerate() {
            self.cols[n + i].push((i, 1.0));
            let (lo, hi) = match c.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            self.lb.push(lo);
            self.ub.push(hi);
            let r = residual[i];
            if r >= lo && r <= hi {
                self.x.push(r);
                self.state.push(State::Basic);
                self.basis[i] = n + i;
            } else {
                let v = r.clamp(lo, hi);
                self.x.push(v);
                self.state.push(if v == lo { State::Lower } else { State::Upper });
                artificial_rows.push((i, r - v));
            }
        }
        for &(i, gap) in &artificial_rows {
            let sigma = gap.signum();
            self.cols.push(vec![(i, sigma)]);
            self.lb.push(0.0);
            self.ub.push(f64::INFINITY);
            self.x.push(gap.abs());
            self.state.push(State::Basic);
            self.basis[i] = self.cols.len() - 1;
            diag[i] = sigma;
        }

        self.binv = vec![0.0; m * m];
        for (i, d) in diag.iter().enumerate() {
            self.binv[i * m + i] = 1.0 / d;
        }
        self.max_iterations = 100 * (n + m) + 1000;
        artificial_rows.len()
    }

    fn compute_duals(&mut self, cost: &[f64]) {
        let m = self.m;
        self.y.clear();
        self.y.resize(m, 0.0);
        for r in 0..m {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                let row = &self.binv[r * m..(r + 1) * m];
                for (yi, bi) in self.y.iter_mut().zip(row) {
                    *yi += cb * bi;
                }
            }
        }
    }

    fn reduced_cost(&self, j: usize, cost: &[f64]) -> f64 {
        cost[j] - self.cols[j].iter().map(|&(i, a)| self.y[i] * a).sum::<f64>()
    }

    fn run(&mut self, cost: &[f64]) -> Result<Outcome> {
        let m = self.m;
        loop {
            if self.iterations > self.max_iterations {
                return Err(Error::Solve(format!(
                    "simplex iteration limit ({}) reached",
                    self.max_iterations
                )));
            }
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            self.compute_duals(cost);

            // Bland: first eligible column by index.
            let mut entering = None;
            for j in 0..self.cols.len() {
                let st = self.state[j];
                if st == State::Basic {
                    continue;
                }
                let d = self.reduced_cost(j, cost);
                let tol = DUAL_TOL * (1.0 + cost[j].abs());
                let dir = match st {
                    State::Lower if d < -tol && self.ub[j] > self.lb[j] => 1.0,
                    State::Upper if d > tol && self.ub[j] > self.lb[j] => -1.0,
                    State::Zero if d.abs() > tol => -d.signum(),
                    _ => continue,
                };
                entering = Some((j, dir));
                break;
            }
            let Some((q, dir)) = entering else {
                if self.since_refactor > 0 {
                    self.refactor()?;
                    continue;
                }
                return Ok(Outcome::Optimal);
            };

            // alpha = B^-1 a_q
            self.alpha.clear();
            self.alpha.resize(m, 0.0);
            for &(i, a) in &self.cols[q] {
                for r in 0..m {
                    self.alpha[r] += self.binv[r * m + i] * a;
                }
            }

            // Ratio test. `None` as the blocking row means a bound flip.
            let mut step = if dir > 0.0 {
                self.ub[q] - self.x[q]
            } else {
                self.x[q] - self.lb[q]
            };
            let mut block: Option<(usize, bool)> = None;
            let mut block_col = q;
            for r in 0..m {
                let a = self.alpha[r];
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let k = self.basis[r];
                let delta = dir * a;
                let (limit, to_upper) = if delta > 0.0 {
                    if !self.lb[k].is_finite() {
                        continue;
                    }
                    (((self.x[k] - self.lb[k]) / delta).max(0.0), false)
                } else {
                    if !self.ub[k].is_finite() {
                        continue;
                    }
                    (((self.ub[k] - self.x[k]) / -delta).max(0.0), true)
                };
                let tie = 1e-12 * (1.0 + step.abs().min(limit.abs()));
                if limit < step - tie || (limit <= step + tie && k < block_col) {
                    step = limit;
                    block = Some((r, to_upper));
                    block_col = k;
                }
            }
            if !step.is_finite() {
                return Ok(Outcome::Unbounded);
            }

            self.iterations += 1;
            if step != 0.0 {
                self.x[q] += dir * step;
                for r in 0..m {
                    let a = self.alpha[r];
                    if a != 0.0 {
                        let k = self.basis[r];
                        self.x[k] -= dir * step * a;
                    }
                }
            }
            match block {
                None => {
                    if dir > 0.0 {
                        self.x[q] = self.ub[q];
                        self.state[q] = State::Upper;
                    } else {
                        self.x[q] = self.lb[q];
                        self.state[q] = State::Lower;
                    }
                }
                Some((r, to_upper)) => {
                    let k = self.basis[r];
                    if to_upper {
                        self.x[k] = self.ub[k];
                        self.state[k] = State::Upper;
                    } else {
                        self.x[k] = self.lb[k];
                        self.state[k] = State::Lower;
                    }
                    self.basis[r] = q;
                    self.state[q] = State::Basic;
                    self.pivot(r);
                }
            }
        }
    }

    /// Updates the inverse for a basis change in row `r`, using `self.alpha`.
    fn pivot(&mut self, r: usize) {
        let m = self.m;
        let inv = 1.0 / self.alpha[r];
        for v in &mut self.binv[r * m..(r + 1) * m] {
            *v *= inv;
        }
        let (head, rest) = self.binv.split_at_mut(r * m);
        let (pivot_row, tail) = rest.split_at_mut(m);
        for (i, row) in head.chunks_exact_mut(m).enumerate() {
            let f = self.alpha[i];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(pivot_row.iter()) {
                    *v -= f * p;
                }
            }
        }
        for (off, row) in tail.chunks_exact_mut(m).enumerate() {
            let f = self.alpha[r + 1 + off];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(pivot_row.iter()) {
                    *v -= f * p;
                }
            }
        }
        self.since_refactor += 1;
    }

    /// Rebuilds `B^-1` by Gauss-Jordan elimination and recomputes the basic
    /// values from the nonbasic ones.
    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for (c, &k) in self.basis.iter().enumerate() {
            for &(i, v) in &self.cols[k] {
                a[i * m + c] = v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let mut p = col;
            let mut best = a[col * m + col].abs();
            for r in col + 1..m {
                let v = a[r * m + col].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best < 1e-13 {
                return Err(Error::Solve("singular basis during refactorization".into()));
            }
            if p != col {
                for c in 0..m {
                    a.swap(p * m + c, col * m + c);
                    inv.swap(p * m + c, col * m + c);
                }
            }
            let d = 1.0 / a[col * m + col];
            for c in 0..m {
                a[col * m + c] *= d;
                inv[col * m + c] *= d;
            }
            for r in 0..m {
                if r == col {
                    continue;
                }
                let f = a[r * m + col];
                if f != 0.0 {
                    for c in 0..m {
                        a[r * m + c] -= f * a[col * m + c];
                        inv[r * m + c] -= f * inv[col * m + c];
                    }
                }
            }
        }
        // `a` held B with columns in basis order, so `inv` maps rows to basis
        // positions: x_B = inv * (b - N x_N).
        self.binv = inv;

        let mut rhs = self.b.clone();
        for j in 0..self.cols.len() {
            if self.state[j] != State::Basic && self.x[j] != 0.0 {
                for &(i, v) in &self.cols[j] {
                    rhs[i] -= v * self.x[j];
                }
            }
        }
        for r in 0..m {
            let row = &self.binv[r * m..(r + 1) * m];
            self.x[self.basis[r]] = row.iter().zip(&rhs).map(|(a, b)| a * b).sum();
        }
        self.since_refactor = 0;
        Ok(())
    }
}
