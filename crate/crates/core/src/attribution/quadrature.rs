use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{gradient_with, GradientPoint, PathSpec};
use crate::dispatch::CommitmentSchedule;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::lp::SimplexSolver;

/// Path nodes live on the dyadic grid `k / GRID_UNITS`. The grid is much
/// finer than any node budget so a jump next to an endpoint can still be
/// isolated by local refinement.
pub const GRID_UNITS: u32 = 1 << 30;

/// Largest accepted node budget: a full uniform grid of 4096 intervals.
pub const NODE_LIMIT: usize = (1 << 12) + 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    /// Upper bound on distinct path points solved per hour.
    pub max_nodes: usize,
    pub rel_threshold: f64,
    /// Uniform refinement depth before adaptivity; 1 gives `{0, 1/2, 1}`.
    pub min_levels: u32,
    /// Refine on each asset's own error instead of the aggregate.
    pub per_asset: bool,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            max_nodes: 4096,
            rel_threshold: 0.05,
            min_levels: 1,
            per_asset: false,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_threshold > 0.0) {
            return Err(Error::invalid("quadrature threshold must be positive"));
        }
        if self.max_nodes < 3 || self.max_nodes > NODE_LIMIT {
            return Err(Error::invalid(format!(
                "quadrature node budget must lie in 3..={NODE_LIMIT}"
            )));
        }
        if self.min_levels < 1 || (1usize << self.min_levels) + 1 > self.max_nodes || self.min_levels > 12 {
            return Err(Error::invalid("min_levels must be >= 1 and fit the node budget"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub attribution: Vec<f64>,
    /// Path average of each gradient component.
    pub mean_gradient: Vec<f64>,
    pub c_fcst: f64,
    pub c_act: f64,
    pub nodes: usize,
    /// Sum of coarse-vs-refined differences over the final panels.
    pub error_estimate: f64,
    pub budget_exhausted: bool,
}

struct Cache<'a> {
    grid: &'a GridSpec,
    commit: &'a CommitmentSchedule,
    spec: &'a PathSpec,
    solver: SimplexSolver,
    points: BTreeMap<u32, GradientPoint>,
}

impl Cache<'_> {
    fn get(&mut self, k: u32) -> Result<&GradientPoint> {
        if !self.points.contains_key(&k) {
            let lambda = k as f64 / GRID_UNITS as f64;
            let p = gradient_with(self.grid, self.commit, self.spec, lambda, &mut self.solver)?;
            self.points.insert(k, p);
        }
        Ok(&self.points[&k])
    }
}

/// A panel `[a, b]` with its midpoint; all three nodes are evaluated.
#[derive(Clone, Copy)]
struct Panel {
    a: u32,
    b: u32,
}

impl Panel {
    fn mid(self) -> u32 {
        (self.a + self.b) / 2
    }
    fn width(self) -> f64 {
        (self.b - self.a) as f64 / GRID_UNITS as f64
    }
}

/// Per-asset refined integral and its per-asset error bound.
///
/// The bound sums the half-panel variations, `w/4 (|gm - ga| + |gb - gm|)`.
/// It dominates `|refined - coarse|` and, unlike it, cannot cancel when one
/// panel holds two gradient jumps in opposite halves. For gradients that are
/// monotone between nodes (piecewise-constant LP duals) it bounds the true
/// error of the refined sum.
fn panel_terms(p: Panel, ga: &[f64], gm: &[f64], gb: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let w = p.width();
    let fine: Vec<f64> = (0..ga.len()).map(|i| w / 4.0 * (ga[i] + 2.0 * gm[i] + gb[i])).collect();
    let diff = (0..ga.len())
        .map(|i| w / 4.0 * ((gm[i] - ga[i]).abs() + (gb[i] - gm[i]).abs()))
        .collect();
    (fine, diff)
}

/// Adaptive dyadic trapezoid integration of the gradient along `spec`.
pub fn integrate_path(
    grid: &GridSpec,
    commit: &CommitmentSchedule,
    spec: &PathSpec,
    qcfg: &QuadratureConfig,
) -> Result<QuadratureResult> {
    qcfg.validate()?;
    let delta = spec.delta();
    let mut cache = Cache {
        grid,
        commit,
        spec,
        solver: SimplexSolver::new(),
        points: BTreeMap::new(),
    };

    if delta.iter().all(|&d| d == 0.0) {
        let p0 = cache.get(0)?.clone();
        let c_act = cache.get(GRID_UNITS)?.objective;
        return Ok(QuadratureResult {
            attribution: vec![0.0; delta.len()],
            mean_gradient: p0.gradient,
            c_fcst: p0.objective,
            c_act,
            nodes: cache.points.len(),
            error_estimate: 0.0,
            budget_exhausted: false,
        });
    }

    let c_fcst = cache.get(0)?.objective;
    let c_act = cache.get(GRID_UNITS)?.objective;
    let floor = 1e-6 * c_fcst.abs().max(c_act.abs()).max(1.0);

    let step = GRID_UNITS >> (qcfg.min_levels - 1);
    let mut panels: Vec<Panel> = (0..GRID_UNITS / step)
        .map(|i| Panel {
            a: i * step,
            b: (i + 1) * step,
        })
        .collect();
    for p in &panels {
        cache.get(p.a)?;
        cache.get(p.mid())?;
        cache.get(p.b)?;
    }

    let n = delta.len();
    let mut exhausted = false;
    loop {
        let mut integral = vec![0.0; n];
        let mut terms = Vec::with_capacity(panels.len());
        for &p in &panels {
            let (fine, diff) = panel_terms(
                p,
                &cache.points[&p.a].gradient,
                &cache.points[&p.mid()].gradient,
                &cache.points[&p.b].gradient,
            );
            for i in 0..n {
                integral[i] += fine[i];
            }
            terms.push(diff);
        }
        let attribution: Vec<f64> = integral.iter().zip(&delta).map(|(g, d)| g * d).collect();
        let total: f64 = attribution.iter().sum();
        let thr = qcfg.rel_threshold * total.abs().max(floor);

        let errors: Vec<f64> = terms
            .iter()
            .map(|diff| diff.iter().zip(&delta).map(|(e, d)| e * d.abs()).sum())
            .collect();
        let wants = |idx: usize| -> bool {
            if qcfg.per_asset {
                terms[idx]
                    .iter()
                    .zip(&delta)
                    .enumerate()
                    .any(|(i, (e, d))| e * d.abs() > qcfg.rel_threshold * attribution[i].abs().max(floor))
            } else {
                errors[idx] > thr
            }
        };
        let mut split: Vec<usize> = (0..panels.len()).filter(|&i| wants(i)).collect();
        let error_estimate: f64 = errors.iter().sum();
        // Each panel may pass on its own while the sum still exceeds the
        // threshold; keep refining the largest contributors until it fits.
        if split.is_empty() && !qcfg.per_asset && error_estimate > thr {
            let active = errors.iter().filter(|&&e| e > 0.0).count() as f64;
            split = (0..panels.len()).filter(|&i| errors[i] >= thr / active).collect();
        }

        let refinable: Vec<usize> = split
            .iter()
            .copied()
            .filter(|&i| panels[i].b - panels[i].a >= 4)
            .collect();
        if refinable.len() < split.len() {
            exhausted = true;
        }
        split = refinable;
        let room = qcfg.max_nodes.saturating_sub(cache.points.len()) / 2;
        if split.len() > room {
            exhausted = true;
            split.sort_by(|&x, &y| errors[y].total_cmp(&errors[x]).then(x.cmp(&y)));
            split.truncate(room);
            split.sort_unstable();
        }
        if split.is_empty() {
            let mean_gradient = integral;
            return Ok(QuadratureResult {
                attribution,
                mean_gradient,
                c_fcst,
                c_act,
                nodes: cache.points.len(),
                error_estimate,
                budget_exhausted: exhausted,
            });
        }

        let mut next = Vec::with_capacity(panels.len() + split.len());
        let mut it = split.iter().peekable();
        for (i, &p) in panels.iter().enumerate() {
            if it.peek() == Some(&&i) {
                it.next();
                let m = p.mid();
                let (left, right) = (Panel { a: p.a, b: m }, Panel { a: m, b: p.b });
                cache.get(left.mid())?;
                cache.get(right.mid())?;
                next.push(left);
                next.push(right);
            } else {
                next.push(p);
            }
        }
        panels = next;
    }
}

/// Fixed composite trapezoid over `intervals + 1` equally spaced nodes, for
/// cross-checking the adaptive rule.
pub fn uniform_trapezoid(
    grid: &GridSpec,
    commit: &CommitmentSchedule,
    spec: &PathSpec,
    intervals: usize,
) -> Result<Vec<f64>> {
    if intervals == 0 {
        return Err(Error::invalid("need at least one interval"));
    }
    let mut solver = SimplexSolver::new();
    let delta = spec.delta();
    let mut integral = vec![0.0; delta.len()];
    let w = 1.0 / intervals as f64;
    for k in 0..=intervals {
        let lambda = if k == intervals { 1.0 } else { k as f64 * w };
        let g = gradient_with(grid, commit, spec, lambda, &mut solver)?;
        let weight = if k == 0 || k == intervals { w / 2.0 } else { w };
        for (acc, v) in integral.iter_mut().zip(&g.gradient) {
            *acc += weight * v;
        }
    }
    Ok(integral.iter().zip(&delta).map(|(g, d)| g * d).collect())
}
