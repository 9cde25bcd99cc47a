//! Linear programs, their solutions, and right-hand-side sensitivities.
//!
//! Sign convention: for a minimization, the dual of constraint `i` is the
//! derivative of the optimal objective with respect to its right-hand side.
//! A binding `<=` row therefore has a non-positive dual and a binding `>=`
//! row a non-negative one.

mod simplex;

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use simplex::{solve, SimplexSolver};

pub const TOL_FEAS: f64 = 1e-7;
pub const TOL_GAP: f64 = 1e-8;
pub const TOL_CS: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FlowDir {
    Forward,
    Reverse,
}

/// Semantic role of a tagged constraint in the dispatch model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    Balance { hour: usize },
    RenewCap { renewable: usize, hour: usize },
    RampUp { gen: usize, hour: usize },
    RampDown { gen: usize, hour: usize },
    Line { line: usize, hour: usize, dir: FlowDir },
    Reserve { hour: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub id: String,
    pub lower: f64,
    pub upper: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub id: String,
    /// `(variable index, coefficient)`; indices are unique within a row.
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    /// Constant added to the objective.
    pub objective_offset: f64,
    tags: BTreeMap<Role, usize>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, id: impl Into<String>, lower: f64, upper: f64, cost: f64) -> usize {
        self.variables.push(Variable {
            id: id.into(),
            lower,
            upper,
            cost,
        });
        self.variables.len() - 1
    }

    /// Adds a row; repeated variable indices are merged and zeros dropped.
    pub fn add_constraint(
        &mut self,
        id: impl Into<String>,
        coeffs: impl IntoIterator<Item = (usize, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> usize {
        let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
        for (j, a) in coeffs {
            *merged.entry(j).or_insert(0.0) += a;
        }
        self.constraints.push(Constraint {
            id: id.into(),
            coeffs: merged.into_iter().filter(|&(_, a)| a != 0.0).collect(),
            sense,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn tag(&mut self, constraint: usize, role: Role) -> Result<()> {
        if constraint >= self.constraints.len() {
            return Err(Error::Model(format!("tag on unknown constraint {constraint}")));
        }
        if self.tags.insert(role, constraint).is_some() {
            return Err(Error::Model(format!("role {role:?} tagged twice")));
        }
        Ok(())
    }

    pub fn tagged(&self, role: Role) -> Option<usize> {
        self.tags.get(&role).copied()
    }

    pub fn tags(&self) -> &BTreeMap<Role, usize> {
        &self.tags
    }

    pub fn constraint_index(&self, id: &str) -> Option<usize> {
        self.constraints.iter().position(|c| c.id == id)
    }

    pub fn variable_index(&self, id: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.id == id)
    }

    pub fn validate(&self) -> Result<()> {
        for v in &self.variables {
            if v.lower.is_nan() || v.upper.is_nan() || !v.cost.is_finite() {
                return Err(Error::Model(format!("variable {} has non-numeric data", v.id)));
            }
            if v.lower > v.upper {
                return Err(Error::Model(format!(
                    "variable {} has lower bound {} above upper bound {}",
                    v.id, v.lower, v.upper
                )));
            }
            if v.lower == f64::INFINITY || v.upper == f64::NEG_INFINITY {
                return Err(Error::Model(format!("variable {} has an empty domain", v.id)));
            }
        }
        let n = self.variables.len();
        for c in &self.constraints {
            if !c.rhs.is_finite() {
                return Err(Error::Model(format!("constraint {} has non-finite rhs", c.id)));
            }
            for &(j, a) in &c.coeffs {
                if j >= n {
                    return Err(Error::Model(format!(
                        "constraint {} references undeclared variable {j}",
                        c.id
                    )));
                }
                if !a.is_finite() {
                    return Err(Error::Model(format!("constraint {} has non-finite coefficient", c.id)));
                }
            }
        }
        if !self.objective_offset.is_finite() {
            return Err(Error::Model("objective offset is not finite".into()));
        }
        Ok(())
    }

    /// `sum_j c_j x_j + offset`.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.variables.iter().zip(x).map(|(v, xj)| v.cost * xj).sum::<f64>() + self.objective_offset
    }

    pub fn row_activity(&self, row: usize, x: &[f64]) -> f64 {
        self.constraints[row].coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Dumps the program in CPLEX LP text format.
    pub fn to_lp_text(&self) -> String {
        let name = |s: &str| s.replace(['@', '(', ')', ',', ' '], "_");
        let term = |out: &mut String, first: bool, a: f64, var: &str| {
            if first {
                let _ = write!(out, "{a} {var}");
            } else if a < 0.0 {
                let _ = write!(out, " - {} {var}", -a);
            } else {
                let _ = write!(out, " + {a} {var}");
            }
        };
        let mut out = String::from("\\ objective offset ");
        let _ = writeln!(out, "{}", self.objective_offset);
        out.push_str("Minimize\n obj: ");
        let mut first = true;
        for v in &self.variables {
            if v.cost != 0.0 {
                term(&mut out, first, v.cost, &name(&v.id));
                first = false;
            }
        }
        if first {
            out.push('0');
        }
        out.push_str("\nSubject To\n");
        for c in &self.constraints {
            let _ = write!(out, " {}: ", name(&c.id));
            let mut first = true;
            for &(j, a) in &c.coeffs {
                term(&mut out, first, a, &name(&self.variables[j].id));
                first = false;
            }
            if first {
                out.push('0');
            }
            let _ = writeln!(out, " {} {}", c.sense.symbol(), c.rhs);
        }
        out.push_str("Bounds\n");
        for v in &self.variables {
            let n = name(&v.id);
            match (v.lower.is_finite(), v.upper.is_finite()) {
                (true, true) => {
                    let _ = writeln!(out, " {} <= {n} <= {}", v.lower, v.upper);
                }
                (true, false) => {
                    let _ = writeln!(out, " {n} >= {}", v.lower);
                }
                (false, true) => {
                    let _ = writeln!(out, " -inf <= {n} <= {}", v.upper);
                }
                (false, false) => {
                    let _ = writeln!(out, " {n} free");
                }
            }
        }
        out.push_str("End\n");
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    /// Indexed like `LinearProgram::variables`.
    pub primal: Vec<f64>,
    /// Indexed like `LinearProgram::constraints`.
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub fn value(&self, lp: &LinearProgram, var: &str) -> Option<f64> {
        lp.variable_index(var).map(|j| self.primal[j])
    }

    pub fn dual(&self, lp: &LinearProgram, constraint: &str) -> Option<f64> {
        lp.constraint_index(constraint).map(|i| self.duals[i])
    }

    /// Dual objective rebuilt from duals and reduced costs alone:
    /// `b'y + sum_j (d_j at the bound its sign selects) + offset`.
    pub fn dual_objective(&self, lp: &LinearProgram) -> f64 {
        let mut obj = lp.objective_offset;
        for (c, y) in lp.constraints.iter().zip(&self.duals) {
            obj += c.rhs * y;
        }
        for (j, v) in lp.variables.iter().enumerate() {
            let d = self.reduced_costs[j];
            let bound = if d > 0.0 && v.lower.is_finite() {
                v.lower
            } else if d < 0.0 && v.upper.is_finite() {
                v.upper
            } else {
                self.primal[j]
            };
            obj += d * bound;
        }
        obj
    }

    /// Checks primal feasibility, dual sign feasibility, strong duality, and
    /// complementary slackness. Returns a description of the first violation.
    pub fn check_optimality(&self, lp: &LinearProgram) -> std::result::Result<(), String> {
        if !self.is_optimal() {
            return Err(format!("status {:?}", self.status));
        }
        let x = &self.primal;
        for (j, v) in lp.variables.iter().enumerate() {
            let scale = 1.0 + x[j].abs();
            if x[j] < v.lower - TOL_FEAS * scale || x[j] > v.upper + TOL_FEAS * scale {
                return Err(format!(
                    "variable {} = {} outside [{}, {}]",
                    v.id, x[j], v.lower, v.upper
                ));
            }
        }
        for (i, c) in lp.constraints.iter().enumerate() {
            let act = lp.row_activity(i, x);
            let tol = TOL_FEAS * (1.0 + c.rhs.abs());
            let ok = match c.sense {
                Sense::Le => act <= c.rhs + tol,
                Sense::Ge => act >= c.rhs - tol,
                Sense::Eq => (act - c.rhs).abs() <= tol,
            };
            if !ok {
                return Err(format!("row {} activity {act} vs rhs {}", c.id, c.rhs));
            }
            let y = self.duals[i];
            let slack = act - c.rhs;
            let sign_ok = match c.sense {
                Sense::Le => y <= TOL_CS,
                Sense::Ge => y >= -TOL_CS,
                Sense::Eq => true,
            };
            if !sign_ok {
                return Err(format!("row {} dual {y} has the wrong sign", c.id));
            }
            if (y * slack).abs() > TOL_CS * (1.0 + y.abs()) * (1.0 + c.rhs.abs()) {
                return Err(format!("row {} slack {slack} with dual {y}", c.id));
            }
        }
        for (j, v) in lp.variables.iter().enumerate() {
            let d = self.reduced_costs[j];
            let at_lower = (x[j] - v.lower).abs() <= TOL_FEAS * (1.0 + x[j].abs());
            let at_upper = (x[j] - v.upper).abs() <= TOL_FEAS * (1.0 + x[j].abs());
            let tol = TOL_CS * (1.0 + v.cost.abs());
            let ok = (d.abs() <= tol) || (d > 0.0 && at_lower) || (d < 0.0 && at_upper);
            if !ok {
                return Err(format!("variable {} = {} has reduced cost {d}", v.id, x[j]));
            }
        }
        let primal = lp.evaluate(x);
        if (primal - self.objective).abs() > TOL_GAP * (1.0 + primal.abs()) {
            return Err(format!("reported objective {} vs c'x {primal}", self.objective));
        }
        let dual = self.dual_objective(lp);
        if (primal - dual).abs() > TOL_GAP * (1.0 + primal.abs()) {
            return Err(format!("duality gap: primal {primal} dual {dual}"));
        }
        Ok(())
    }
}

/// `dF/dtheta = sum_i y_i * (db_i/dtheta)` for every parameter in `param_map`.
///
/// Each entry lists the constraints whose right-hand side moves with the
/// parameter and the rate at which it moves.
pub fn rhs_gradient<K: Ord + Clone>(
    lp: &LinearProgram,
    sol: &LpSolution,
    param_map: &BTreeMap<K, Vec<(usize, f64)>>,
) -> Result<BTreeMap<K, f64>> {
    if !sol.is_optimal() {
        return Err(Error::Solve(format!(
            "gradient requested from a {:?} solution",
            sol.status
        )));
    }
    param_map
        .iter()
        .map(|(k, entries)| {
            let mut g = 0.0;
            for &(i, coef) in entries {
                let y = sol
                    .duals
                    .get(i)
                    .filter(|_| i < lp.constraints.len())
                    .ok_or_else(|| Error::Model(format!("unknown constraint index {i}")))?;
                g += y * coef;
            }
            Ok((k.clone(), g))
        })
        .collect()
}

/// Replaces the duals of each group by the group mean.
///
/// Every group must consist of structurally identical rows: same sense,
/// same right-hand side, and the same multiset of coefficients. Reduced
/// costs are recomputed from the new duals; primal values and the
/// objective are untouched.
pub fn symmetrize_duals(lp: &LinearProgram, sol: &LpSolution, groups: &[Vec<usize>]) -> Result<LpSolution> {
    let mut out = sol.clone();
    for group in groups {
        if group.len() < 2 {
            continue;
        }
        let first = lp
            .constraints
            .get(group[0])
            .ok_or_else(|| Error::Model(format!("unknown constraint index {}", group[0])))?;
        let signature = |c: &Constraint| {
            let mut a: Vec<f64> = c.coeffs.iter().map(|&(_, a)| a).collect();
            a.sort_by(f64::total_cmp);
            a
        };
        let sig0 = signature(first);
        for &i in &group[1..] {
            let c = lp
                .constraints
                .get(i)
                .ok_or_else(|| Error::Model(format!("unknown constraint index {i}")))?;
            if c.sense != first.sense || c.rhs != first.rhs || signature(c) != sig0 {
                return Err(Error::Model(format!(
                    "constraints {} and {} are not structurally identical",
                    first.id, c.id
                )));
            }
        }
        let mean = group.iter().map(|&i| sol.duals[i]).sum::<f64>() / group.len() as f64;
        for &i in group {
            out.duals[i] = mean;
        }
    }
    recompute_reduced_costs(lp, &mut out);
    Ok(out)
}

fn recompute_reduced_costs(lp: &LinearProgram, sol: &mut LpSolution) {
    let mut d: Vec<f64> = lp.variables.iter().map(|v| v.cost).collect();
    for (c, &y) in lp.constraints.iter().zip(&sol.duals) {
        if y != 0.0 {
            for &(j, a) in &c.coeffs {
                d[j] -= y * a;
            }
        }
    }
    sol.reduced_costs = d;
}

/// Index lookup of constraint ids, for callers that address rows by name.
pub fn constraint_ids(lp: &LinearProgram) -> HashMap<&str, usize> {
    lp.constraints
        .iter()
        .enumerate()
        .map(|(i, c)| (c.id.as_str(), i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_var() -> LinearProgram {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x", 0.0, 100.0, 10.0);
        lp.add_constraint("min_x", [(x, 1.0)], Sense::Ge, 50.0);
        lp
    }

    #[test]
    fn one_variable_dual() {
        let lp = one_var();
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 500.0).abs() < 1e-9);
        assert!((sol.dual(&lp, "min_x").unwrap() - 10.0).abs() < 1e-9);
        sol.check_optimality(&lp).unwrap();
    }

    #[test]
    fn contradictory_bounds_rejected() {
        let mut lp = LinearProgram::new();
        lp.add_var("x", 2.0, 1.0, 1.0);
        assert!(matches!(solve(&lp), Err(Error::Model(_))));
    }

    #[test]
    fn undeclared_variable_rejected() {
        let mut lp = LinearProgram::new();
        lp.add_var("x", 0.0, 1.0, 1.0);
        lp.add_constraint("c", [(3, 1.0)], Sense::Le, 1.0);
        assert!(lp.validate().is_err());
    }

    #[test]
    fn duplicate_tag_rejected() {
        let mut lp = one_var();
        lp.tag(0, Role::Balance { hour: 0 }).unwrap();
        assert!(lp.tag(0, Role::Balance { hour: 0 }).is_err());
        assert_eq!(lp.tagged(Role::Balance { hour: 0 }), Some(0));
    }

    #[test]
    fn gradient_single_term_and_absent() {
        let lp = one_var();
        let sol = solve(&lp).unwrap();
        let mut map = BTreeMap::new();
        map.insert("theta", vec![(0usize, 1.0)]);
        let g = rhs_gradient(&lp, &sol, &map).unwrap();
        assert!((g["theta"] - 10.0).abs() < 1e-12);
        assert!(!g.contains_key("other"));
        map.insert("bad", vec![(7, 1.0)]);
        assert!(rhs_gradient(&lp, &sol, &map).is_err());
    }

    fn two_caps() -> (LinearProgram, LpSolution) {
        let mut lp = LinearProgram::new();
        let a = lp.add_var("a", 0.0, f64::INFINITY, 0.0);
        let b = lp.add_var("b", 0.0, f64::INFINITY, 0.0);
        lp.add_constraint("cap_a", [(a, 1.0)], Sense::Le, 40.0);
        lp.add_constraint("cap_b", [(b, 1.0)], Sense::Le, 40.0);
        let sol = LpSolution {
            status: LpStatus::Optimal,
            objective: 0.0,
            primal: vec![40.0, 40.0],
            duals: vec![-150.0, -170.0],
            reduced_costs: vec![0.0, 0.0],
            iterations: 0,
        };
        (lp, sol)
    }

    #[test]
    fn symmetrize_pair_and_singleton() {
        let (lp, sol) = two_caps();
        let s = symmetrize_duals(&lp, &sol, &[vec![0, 1]]).unwrap();
        assert_eq!(s.duals, vec![-160.0, -160.0]);
        assert_eq!(s.primal, sol.primal);
        assert_eq!(s.objective, sol.objective);
        let s = symmetrize_duals(&lp, &sol, &[vec![0], vec![1]]).unwrap();
        assert_eq!(s.duals, sol.duals);
    }

    #[test]
    fn symmetrize_rejects_distinct_rows() {
        let (mut lp, sol) = two_caps();
        lp.constraints[1].rhs = 41.0;
        assert!(symmetrize_duals(&lp, &sol, &[vec![0, 1]]).is_err());
    }

    #[test]
    fn lp_text_dump_has_sections() {
        let text = one_var().to_lp_text();
        assert!(text.contains("Minimize"));
        assert!(text.contains("Subject To"));
        assert!(text.contains("min_x: 1 x >= 50"));
        assert!(text.contains("0 <= x <= 100"));
    }
}
