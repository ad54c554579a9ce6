//! The problem `minimize f(x) subject to x ∈ Ω` on the real line:
//! minimizing and inf-stationary sequences, the epigraph embedding into a
//! pair of planar sets, and the sequential necessary conditions.

mod conditions;
mod embedding;
mod function;
mod stationarity;

pub use conditions::{
    check_necessary_conditions, multiplier_rule_check, qualification_check, ConditionParams, MultiplierBranch, MultiplierReport,
    MultiplierRow, NecessaryReport, NecessaryRow, NormalWitness, SingularWitness,
};
pub use embedding::{build_stationarity_witness, embed_epigraph, embed_with_level, lift_sequence, WitnessParams, WitnessVariant};
pub use function::ScalarFunction;
pub use stationarity::{
    check_approx_inf_stationary, check_firm_inf_stationary, check_inf_stationary, check_minimizing, check_minimizing_at_level,
    ApproxSchedule, AuxWitness, DiagnosticRow, StationarityProperty, StationarityReport, WitnessSource,
};

use crate::error::{Error, Result};
use crate::geometry::SetExpr;
use crate::linalg::golden;
use serde::{Deserialize, Serialize};

/// Problem data. `Ω` must be a closed interval of R (strict faces are read as
/// their closures).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    pub f: ScalarFunction,
    pub omega: SetExpr,
    /// `μ0`; the capped-grid infimum is used when absent.
    #[serde(default)]
    pub level: Option<f64>,
    /// A registered point of `Ω`.
    pub feasible: f64,
}

impl Problem {
    pub fn new(f: ScalarFunction, omega: SetExpr, level: Option<f64>, feasible: f64) -> Self {
        Problem { f, omega, level, feasible }
    }

    /// `Ω = R`.
    pub fn unconstrained(f: ScalarFunction, level: Option<f64>) -> Self {
        Problem::new(f, SetExpr::Polyhedron { dim: 1, faces: vec![] }, level, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        self.omega.validate()?;
        let (lo, hi) = omega_interval(&self.omega)?;
        if lo > hi {
            return Err(Error::InvalidInput("feasible set is empty".into()));
        }
        if !self.is_feasible(self.feasible) {
            return Err(Error::InvalidInput(format!("registered point {} is not feasible", self.feasible)));
        }
        if let Some(l) = self.level {
            if !l.is_finite() {
                return Err(Error::InvalidInput("level must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn interval(&self) -> Result<(f64, f64)> {
        omega_interval(&self.omega)
    }

    pub fn is_feasible(&self, x: f64) -> bool {
        let tol = 1e-12 * (1.0 + x.abs());
        match omega_interval(&self.omega) {
            Ok((lo, hi)) => lo - tol <= x && x <= hi + tol,
            Err(_) => false,
        }
    }

    /// `μ0`, or the capped-grid infimum of `f` over `Ω` when no level is set.
    pub fn level_or_estimate(&self, budget: &OptBudget) -> Result<f64> {
        if let Some(l) = self.level {
            return Ok(l);
        }
        let g = global_inf(self, budget)?;
        if g.unbounded {
            return Err(Error::InvalidInput("no level given and f is unbounded below on the grid".into()));
        }
        Ok(g.value)
    }
}

/// `Ω` as a closed interval `[lo, hi]` (possibly unbounded; `lo > hi` when
/// empty).
pub fn omega_interval(set: &SetExpr) -> Result<(f64, f64)> {
    if set.dim() != 1 {
        return Err(Error::DimensionUnsupported(set.dim()));
    }
    let face = |a: f64, b: f64| -> (f64, f64) {
        if a > 0.0 {
            (f64::NEG_INFINITY, b / a)
        } else if a < 0.0 {
            (b / a, f64::INFINITY)
        } else if b >= 0.0 {
            (f64::NEG_INFINITY, f64::INFINITY)
        } else {
            (f64::INFINITY, f64::NEG_INFINITY)
        }
    };
    match set {
        SetExpr::Halfspace { a, b, .. } => Ok(face(a[0], *b)),
        SetExpr::Polyhedron { faces, .. } => Ok(faces.iter().fold((f64::NEG_INFINITY, f64::INFINITY), |(lo, hi), f| {
            let (l, h) = face(f.a[0], f.b);
            (lo.max(l), hi.min(h))
        })),
        SetExpr::Ball { center, radius, .. } => {
            let c = center.coords()[0];
            Ok((c - radius, c + radius))
        }
        SetExpr::Translate { base, shift } => {
            let (lo, hi) = omega_interval(base)?;
            let s = shift.coords()[0];
            Ok((lo + s, hi + s))
        }
        _ => Err(Error::UnsupportedCapability("the feasible set must be an interval of R".into())),
    }
}

/// Sampling budgets of the optimization checkers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptBudget {
    /// Uniform grid size of `local_inf`.
    pub grid: usize,
    pub refine_iters: usize,
    /// Sequence indices evaluated; the upper half is the tail.
    pub k_values: Vec<u64>,
    /// Radii for the ratio checks; the smaller half is the tail.
    pub rho_values: Vec<f64>,
    /// Convergence tolerance; Certified needs `tol`, Falsified needs `2 tol`.
    pub tol: f64,
    /// Half-width of the grid used for `inf_Ω f`.
    pub global_cap: f64,
    /// Values below this count as "unbounded below".
    pub unbounded_below: f64,
    /// Relative slack of the level bound `f >= μ0`.
    pub level_eta: f64,
    /// The fallback search for auxiliary points scans `|u - x^k| <= approx_window / sqrt(k)`.
    pub approx_window: f64,
}

impl Default for OptBudget {
    fn default() -> Self {
        OptBudget {
            grid: 2001,
            refine_iters: 80,
            k_values: vec![10, 30, 100, 300, 1000, 3000, 10000],
            rho_values: vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5],
            tol: 1e-3,
            global_cap: 1e4,
            unbounded_below: -1e6,
            level_eta: 1e-9,
            approx_window: 1.0,
        }
    }
}

impl OptBudget {
    pub fn validate(&self) -> Result<()> {
        if self.grid < 3 || self.k_values.is_empty() || self.rho_values.is_empty() {
            return Err(Error::InvalidInput("budget needs a grid of at least 3 points, k values and radii".into()));
        }
        if self.rho_values.iter().any(|r| !(*r > 0.0)) || !(self.tol > 0.0) || !(self.global_cap > 0.0) {
            return Err(Error::InvalidInput("radii, tolerance and cap must be positive".into()));
        }
        Ok(())
    }

    pub(crate) fn sorted_ks(&self) -> Vec<u64> {
        let mut k = self.k_values.clone();
        k.sort_unstable();
        k.dedup();
        k
    }

    /// Radii in decreasing order.
    pub(crate) fn sorted_rhos(&self) -> Vec<f64> {
        let mut r = self.rho_values.clone();
        r.sort_by(|a, b| b.total_cmp(a));
        r.dedup();
        r
    }
}

/// Estimate of `inf f` over a window of `Ω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalInf {
    /// Upper estimate (the value at a sampled point), or `-inf` when the
    /// samples run below `unbounded_below`.
    pub value: f64,
    pub argmin: f64,
    /// `argmin - anchor`, computed without cancellation.
    pub offset: f64,
    /// Largest jump of `f` between neighbouring grid points.
    pub error_bound: f64,
    pub unbounded: bool,
}

/// Upper estimate of `inf f` over `Ω ∩ B_ρ(center)`.
pub fn local_inf(prob: &Problem, center: f64, rho: f64, budget: &OptBudget) -> Result<f64> {
    Ok(local_inf_detail(prob, center, rho, budget)?.value)
}

pub fn local_inf_detail(prob: &Problem, center: f64, rho: f64, budget: &OptBudget) -> Result<LocalInf> {
    window_inf(prob, center, 0.0, rho, budget)
}

/// `inf f` over `Ω ∩ [anchor + offset - ρ, anchor + offset + ρ]`, with every
/// sample evaluated as `f.eval_offset(anchor, s)`. Centres that are not
/// representable next to a large anchor stay exact this way.
pub fn window_inf(prob: &Problem, anchor: f64, offset: f64, rho: f64, budget: &OptBudget) -> Result<LocalInf> {
    if !(rho > 0.0) {
        return Err(Error::InvalidInput("radius must be positive".into()));
    }
    let (lo, hi) = prob.interval()?;
    let slo = if lo == f64::NEG_INFINITY { offset - rho } else { (lo - anchor).max(offset - rho) };
    let shi = if hi == f64::INFINITY { offset + rho } else { (hi - anchor).min(offset + rho) };
    if slo > shi {
        return Err(Error::InfeasibleBall);
    }
    let mut extra = vec![offset];
    let f = &prob.f;
    extra.extend(f.candidate_offsets(anchor, slo, shi));
    let w = shi - slo;
    for b in f.breakpoints(anchor + slo, anchor + shi) {
        let s = b - anchor;
        extra.push(s);
        for j in 1..=12 {
            let d = w * 10f64.powi(-j);
            extra.push(s - d);
            extra.push(s + d);
        }
    }
    Ok(inf_on(prob, anchor, slo, shi, &extra, budget))
}

fn inf_on(prob: &Problem, anchor: f64, slo: f64, shi: f64, extra: &[f64], budget: &OptBudget) -> LocalInf {
    let g = |s: f64| {
        let v = prob.f.eval_offset(anchor, s);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let n = budget.grid.max(3);
    let h = (shi - slo) / (n - 1) as f64;
    let mut grid: Vec<(f64, f64)> = Vec::with_capacity(n);
    let mut modulus = 0.0f64;
    for i in 0..n {
        let s = if i == n - 1 { shi } else { slo + h * i as f64 };
        let v = g(s);
        if let Some(&(_, pv)) = grid.last() {
            if v.is_finite() && pv.is_finite() {
                modulus = modulus.max((v - pv).abs());
            }
        }
        grid.push((s, v));
    }
    let mut best = (slo, f64::INFINITY);
    let consider = |best: &mut (f64, f64), s: f64, v: f64| {
        if v < best.1 {
            *best = (s, v);
        }
    };
    for &(s, v) in &grid {
        consider(&mut best, s, v);
    }
    for &s in extra {
        if slo <= s && s <= shi {
            consider(&mut best, s, g(s));
        }
    }
    if h > 0.0 {
        let mut order: Vec<usize> = (0..grid.len()).collect();
        order.sort_by(|a, b| grid[*a].1.total_cmp(&grid[*b].1));
        for &i in order.iter().take(4) {
            let a = grid[i].0 - h;
            let b = grid[i].0 + h;
            let (s, v) = golden(g, a.max(slo), b.min(shi), budget.refine_iters);
            consider(&mut best, s, v);
        }
        let s0 = best.0;
        let (s, v) = golden(g, (s0 - h).max(slo), (s0 + h).min(shi), budget.refine_iters);
        consider(&mut best, s, v);
    }
    let unbounded = best.1 < budget.unbounded_below;
    LocalInf {
        value: if unbounded { f64::NEG_INFINITY } else { best.1 },
        argmin: anchor + best.0,
        offset: best.0,
        error_bound: modulus,
        unbounded,
    }
}

/// Capped-grid estimate of `inf_Ω f`: a uniform grid on `Ω ∩ [-cap, cap]`,
/// a symmetric logarithmic ladder around the origin and the breakpoints, and
/// geometric approaches to breakpoints near the origin.
pub fn global_inf(prob: &Problem, budget: &OptBudget) -> Result<LocalInf> {
    let (lo, hi) = prob.interval()?;
    let cap = budget.global_cap;
    let (a, b) = (lo.max(-cap), hi.min(cap));
    let (a, b) = if a <= b { (a, b) } else { (prob.feasible, prob.feasible) };
    let mut extra = vec![prob.feasible];
    let top = cap.log10();
    let mut e = -12.0;
    while e <= top {
        let v = 10f64.powf(e);
        extra.push(v);
        extra.push(-v);
        e += 0.05;
    }
    let near = prob.f.breakpoints(a.max(-50.0), b.min(50.0));
    for &bp in near.iter().chain([a, b].iter()) {
        extra.push(bp);
        for j in 1..=12 {
            let d = 10f64.powi(-j);
            extra.push(bp - d);
            extra.push(bp + d);
        }
    }
    extra.extend(prob.f.candidate_offsets(0.0, a, b));
    if a == b {
        let v = prob.f.eval(a);
        return Ok(LocalInf { value: v, argmin: a, offset: a, error_bound: 0.0, unbounded: false });
    }
    let mut wide = budget.clone();
    wide.grid = budget.grid.max(3) * 4;
    Ok(inf_on(prob, 0.0, a, b, &extra, &wide))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Face, Point};

    fn parab() -> Problem {
        Problem::unconstrained(ScalarFunction::PiecewiseParabolic, Some(0.0))
    }

    #[test]
    fn parabolic_local_inf_small_radius() {
        let b = OptBudget::default();
        let v = local_inf(&parab(), 10.0, 0.3, &b).unwrap();
        assert!((v - (1.0 / 10.3 - 0.09)).abs() < 1e-6, "{v}");
    }

    #[test]
    fn reciprocal_on_the_left() {
        let p = Problem::unconstrained(ScalarFunction::Reciprocal, Some(0.0));
        let v = local_inf(&p, -10.0, 1.0, &OptBudget::default()).unwrap();
        assert!((v + 1.0 / 9.0).abs() < 1e-12);
        // the ball around the pole sees -inf
        let d = local_inf_detail(&p, 0.5, 1.0, &OptBudget::default()).unwrap();
        assert!(d.unbounded);
    }

    #[test]
    fn constant_function() {
        let p = Problem::unconstrained(ScalarFunction::Polynomial { coeffs: vec![2.5] }, None);
        assert_eq!(local_inf(&p, 3.0, 0.7, &OptBudget::default()).unwrap(), 2.5);
    }

    #[test]
    fn intervals_and_infeasible_balls() {
        let half = SetExpr::halfspace(vec![-1.0], 0.0);
        assert_eq!(omega_interval(&half).unwrap(), (0.0, f64::INFINITY));
        let pt = SetExpr::Polyhedron { dim: 1, faces: vec![Face::new(vec![1.0], 0.0), Face::new(vec![-1.0], 0.0)] };
        assert_eq!(omega_interval(&pt).unwrap(), (0.0, 0.0));
        let ball = SetExpr::translate(SetExpr::ball(Point::from([1.0]), 0.5), Point::from([2.0]));
        assert_eq!(omega_interval(&ball).unwrap(), (2.5, 3.5));
        let p = Problem::new(ScalarFunction::Polynomial { coeffs: vec![0.0, 1.0] }, half, None, 1.0);
        assert_eq!(local_inf(&p, -5.0, 1.0, &OptBudget::default()), Err(Error::InfeasibleBall));
        assert_eq!(local_inf(&p, -0.5, 1.0, &OptBudget::default()).unwrap(), 0.0);
    }

    #[test]
    fn global_infimum_of_a_parabola() {
        let p = Problem::unconstrained(ScalarFunction::Polynomial { coeffs: vec![1.0, -2.0, 1.0] }, None);
        let g = global_inf(&p, &OptBudget::default()).unwrap();
        assert!(g.value.abs() < 1e-12 && (g.argmin - 1.0).abs() < 1e-5);
        let r = Problem::unconstrained(ScalarFunction::Reciprocal, None);
        assert!(global_inf(&r, &OptBudget::default()).unwrap().unbounded);
    }
}
