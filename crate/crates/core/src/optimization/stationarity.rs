//! Minimizing and inf-stationary sequences. Limits are replaced by the
//! tail of a finite `(k, ρ)` grid: the upper half of the `k` values and the
//! smaller half of the radii. Certified needs the tail within `tol`,
//! Falsified needs it beyond `2 tol`.

use super::{global_inf, window_inf, OptBudget, Problem};
use crate::error::{Error, Result};
use crate::expr::KExpr;
use crate::extremality::SequenceSpec;
use crate::geometry::Radius;
use crate::Outcome;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StationarityProperty {
    Minimizing,
    MinimizingAtLevel,
    FirmInfStationary,
    InfStationary,
    ApproxInfStationary,
}

impl std::fmt::Display for StationarityProperty {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StationarityProperty::Minimizing => "minimizing",
            StationarityProperty::MinimizingAtLevel => "minimizing at level",
            StationarityProperty::FirmInfStationary => "firmly inf-stationary",
            StationarityProperty::InfStationary => "inf-stationary",
            StationarityProperty::ApproxInfStationary => "approximately inf-stationary",
        };
        f.write_str(s)
    }
}

/// One `(k, ρ)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRow {
    pub k: u64,
    pub x: f64,
    pub f_x: f64,
    pub rho: Option<f64>,
    pub local_inf: Option<f64>,
    /// `(local_inf - f(x)) / ρ`.
    pub ratio: Option<f64>,
    pub error_bound: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WitnessSource {
    /// The registered `(δ_k, ρ_k)` schedule.
    Schedule,
    /// Minimizer of `f` on a shrinking window around `x^k`.
    Scan,
    /// `u^k = x^k`.
    Identity,
}

/// Auxiliary point `u^k = x^k + offset` of the approximate property.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxWitness {
    pub k: u64,
    pub x: f64,
    pub offset: f64,
    pub u: f64,
    pub rho: f64,
    pub f_u: f64,
    /// Grid minimum of `f` on `Ω ∩ B_ρ(u)`.
    pub window_min: f64,
    pub ratio: f64,
    /// `f(u)` is within `1e-9` of `window_min`.
    pub is_window_min: bool,
    pub source: WitnessSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub property: StationarityProperty,
    pub outcome: Outcome,
    pub level: f64,
    /// Tail estimate of the limit in the definition (infimum, limsup of the
    /// local infima, or limsup of the ratios).
    pub estimate: Option<f64>,
    pub diagnostics: Vec<DiagnosticRow>,
    pub witnesses: Vec<AuxWitness>,
    pub notes: Vec<String>,
}

impl StationarityReport {
    /// `k,x,rho,f_x,local_inf,ratio` rows; empty cells for missing values.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,x,rho,f_x,local_inf,ratio\n");
        let o = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:e}"));
        for r in &self.diagnostics {
            let _ = writeln!(s, "{},{:e},{},{:e},{},{}", r.k, r.x, o(r.rho), r.f_x, o(r.local_inf), o(r.ratio));
        }
        s
    }
}

/// `u^k = x^k + δ_k` with radius `ρ_k`, both closed forms in `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApproxSchedule {
    pub delta: KExpr,
    pub rho: KExpr,
}

impl ApproxSchedule {
    pub fn new(delta: &str, rho: &str) -> Result<Self> {
        Ok(ApproxSchedule { delta: KExpr::parse(delta)?, rho: KExpr::parse(rho)? })
    }
}

pub(crate) fn seq_points(prob: &Problem, seq: &SequenceSpec, ks: &[u64], feasible: bool) -> Result<Vec<(u64, f64)>> {
    seq.validate()?;
    if seq.n_sets() != 1 || seq.dim() != 1 {
        return Err(Error::InvalidInput("expected a single sequence in R".into()));
    }
    let cap = seq.k_max().unwrap_or(u64::MAX);
    let mut out = Vec::new();
    for &k in ks.iter().filter(|k| **k <= cap) {
        let x = seq.eval(k)?[0].coords()[0];
        if feasible && !prob.is_feasible(x) {
            return Err(Error::InvalidInput(format!("x^{k} = {x} is not in the feasible set")));
        }
        out.push((k, x));
    }
    if out.is_empty() {
        return Err(Error::InvalidInput("no sequence index inside the budget".into()));
    }
    Ok(out)
}

fn tail<T>(v: &[T]) -> &[T] {
    &v[v.len() / 2..]
}

/// Three-way decision on `gaps → 0` from tail gaps in increasing `k`:
/// Certified when the last gap is within `tol` and the tail does not grow,
/// Falsified when every gap exceeds `2 tol`.
fn vanishes(gaps: &[f64], tol: f64) -> Outcome {
    let abs: Vec<f64> = gaps.iter().map(|g| g.abs()).collect();
    let min = abs.iter().copied().fold(f64::INFINITY, f64::min);
    let settling = abs.windows(2).all(|w| w[1] <= w[0] + tol);
    if abs.last().is_some_and(|g| *g <= tol) && settling {
        Outcome::Certified
    } else if min > 2.0 * tol {
        Outcome::Falsified
    } else {
        Outcome::Inconclusive
    }
}

fn value_row(prob: &Problem, k: u64, x: f64) -> DiagnosticRow {
    DiagnosticRow { k, x, f_x: prob.f.eval(x), rho: None, local_inf: None, ratio: None, error_bound: None }
}

fn report(property: StationarityProperty, outcome: Outcome, level: f64, estimate: Option<f64>, rows: Vec<DiagnosticRow>) -> StationarityReport {
    StationarityReport { property, outcome, level, estimate, diagnostics: rows, witnesses: vec![], notes: vec![] }
}

/// `f(x^k) → inf_Ω f`, with the infimum estimated on the capped grid.
pub fn check_minimizing(prob: &Problem, seq: &SequenceSpec, budget: &OptBudget) -> Result<StationarityReport> {
    prob.validate()?;
    budget.validate()?;
    let pts = seq_points(prob, seq, &budget.sorted_ks(), true)?;
    let rows: Vec<DiagnosticRow> = pts.iter().map(|&(k, x)| value_row(prob, k, x)).collect();
    let g = global_inf(prob, budget)?;
    if g.unbounded {
        let mut r = report(StationarityProperty::Minimizing, Outcome::Falsified, f64::NEG_INFINITY, None, rows);
        r.notes.push(format!("inf unbounded below on grid (f({}) < {})", g.argmin, budget.unbounded_below));
        return Ok(r);
    }
    let inf = rows.iter().map(|r| r.f_x).fold(g.value, f64::min);
    let gaps: Vec<f64> = tail(&rows).iter().map(|r| r.f_x - inf).collect();
    let outcome = vanishes(&gaps, budget.tol);
    let mut r = report(StationarityProperty::Minimizing, outcome, inf, Some(inf), rows);
    r.notes.push(format!("capped-grid infimum {inf} near x = {}", g.argmin));
    Ok(r)
}

/// `f(x^k) → μ0` and `f >= μ0` on `Ω ∩ B_ρ(x^k)` for `k > k0`. Falsified when
/// the level bound fails at every tail index for this `ρ`.
pub fn check_minimizing_at_level(prob: &Problem, seq: &SequenceSpec, rho: Radius, k0: u64, budget: &OptBudget) -> Result<StationarityReport> {
    prob.validate()?;
    budget.validate()?;
    let level = prob.level_or_estimate(budget)?;
    let (r, capped) = rho.resolve(budget.global_cap);
    let pts = seq_points(prob, seq, &budget.sorted_ks(), true)?;
    let mut rows = Vec::new();
    for &(k, x) in &pts {
        let li = window_inf(prob, x, 0.0, r, budget)?;
        rows.push(DiagnosticRow { rho: Some(r), local_inf: Some(li.value), error_bound: Some(li.error_bound), ..value_row(prob, k, x) });
    }
    let eta = budget.level_eta * (1.0 + level.abs());
    let conv = vanishes(&tail(&rows).iter().map(|r| r.f_x - level).collect::<Vec<_>>(), budget.tol);
    let after: Vec<&DiagnosticRow> = rows.iter().filter(|r| r.k > k0).collect();
    let violated: Vec<u64> = after.iter().filter(|r| r.local_inf.unwrap() < level - eta).map(|r| r.k).collect();
    let tail_after: Vec<&&DiagnosticRow> = tail(&after).iter().collect();
    let all_tail_violated = !tail_after.is_empty() && tail_after.iter().all(|r| r.local_inf.unwrap() < level - eta);
    let outcome = if conv == Outcome::Falsified || all_tail_violated {
        Outcome::Falsified
    } else if after.is_empty() {
        Outcome::Inconclusive
    } else if conv == Outcome::Certified && violated.is_empty() {
        Outcome::Certified
    } else {
        Outcome::Inconclusive
    };
    let worst = after.iter().map(|r| r.local_inf.unwrap()).fold(f64::INFINITY, f64::min);
    let no_after = after.is_empty();
    let mut rep = report(StationarityProperty::MinimizingAtLevel, outcome, level, Some(worst), rows);
    if !violated.is_empty() {
        rep.notes.push(format!("f < μ0 inside the ball for k in {violated:?}"));
    }
    if no_after {
        rep.notes.push(format!("no k > {k0} in the budget"));
    }
    if capped {
        rep.notes.push(format!("radius capped at {r}"));
    }
    Ok(rep)
}

/// `f(x^k) → μ0` and `limsup_k inf_{Ω∩B_ρ(x^k)} f = μ0`.
pub fn check_firm_inf_stationary(prob: &Problem, seq: &SequenceSpec, mu0: f64, rho: Radius, budget: &OptBudget) -> Result<StationarityReport> {
    prob.validate()?;
    budget.validate()?;
    let (r, capped) = rho.resolve(budget.global_cap);
    let pts = seq_points(prob, seq, &budget.sorted_ks(), true)?;
    let mut rows = Vec::new();
    for &(k, x) in &pts {
        let li = window_inf(prob, x, 0.0, r, budget)?;
        rows.push(DiagnosticRow { rho: Some(r), local_inf: Some(li.value), error_bound: Some(li.error_bound), ..value_row(prob, k, x) });
    }
    let conv = vanishes(&tail(&rows).iter().map(|r| r.f_x - mu0).collect::<Vec<_>>(), budget.tol);
    // the local infima converge to their limsup along the tail; the largest k is the estimate
    let infima: Vec<f64> = tail(&rows).iter().map(|r| r.local_inf.unwrap() - mu0).collect();
    let limsup = mu0 + infima.last().copied().unwrap_or(f64::NAN);
    let outcome = match (conv, vanishes(&infima, budget.tol)) {
        (Outcome::Falsified, _) | (_, Outcome::Falsified) => Outcome::Falsified,
        (Outcome::Certified, Outcome::Certified) => Outcome::Certified,
        _ => Outcome::Inconclusive,
    };
    let mut rep = report(StationarityProperty::FirmInfStationary, outcome, mu0, Some(limsup), rows);
    rep.notes.push(format!("limsup of the local infima at radius {r}: {limsup}"));
    if capped {
        rep.notes.push(format!("radius capped at {r}"));
    }
    Ok(rep)
}

/// Ratio grid for the inf-stationarity quotient at `x^k`.
fn ratio_rows(prob: &Problem, pts: &[(u64, f64)], rhos: &[f64], budget: &OptBudget) -> Result<Vec<DiagnosticRow>> {
    let mut rows = Vec::new();
    for &(k, x) in pts {
        let fx = prob.f.eval(x);
        for &r in rhos {
            let li = window_inf(prob, x, 0.0, r, budget)?;
            rows.push(DiagnosticRow {
                k,
                x,
                f_x: fx,
                rho: Some(r),
                local_inf: Some(li.value),
                ratio: Some((li.value - fx) / r),
                error_bound: Some(li.error_bound),
            });
        }
    }
    Ok(rows)
}

/// `f(x^k) → μ0` and `limsup_{k→∞, ρ↓0} (inf_{Ω∩B_ρ(x^k)} f - f(x^k))/ρ = 0`.
pub fn check_inf_stationary(prob: &Problem, seq: &SequenceSpec, mu0: f64, budget: &OptBudget) -> Result<StationarityReport> {
    prob.validate()?;
    budget.validate()?;
    let ks = budget.sorted_ks();
    let rhos = budget.sorted_rhos();
    let pts = seq_points(prob, seq, &ks, true)?;
    let rows = ratio_rows(prob, &pts, &rhos, budget)?;
    let conv = vanishes(&tail(&pts).iter().map(|&(_, x)| prob.f.eval(x) - mu0).collect::<Vec<_>>(), budget.tol);
    let tail_k = pts[pts.len() / 2].0;
    let tail_rho = rhos[rhos.len() / 2];
    let limsup = rows
        .iter()
        .filter(|r| r.k >= tail_k && r.rho.unwrap() <= tail_rho)
        .map(|r| r.ratio.unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    let tol = budget.tol;
    let outcome = if conv == Outcome::Falsified || limsup < -2.0 * tol {
        Outcome::Falsified
    } else if conv == Outcome::Certified && limsup >= -tol {
        Outcome::Certified
    } else {
        Outcome::Inconclusive
    };
    let mut rep = report(StationarityProperty::InfStationary, outcome, mu0, Some(limsup), rows);
    rep.notes.push(format!("tail cells: k >= {tail_k}, rho <= {tail_rho}"));
    Ok(rep)
}

/// Candidate auxiliary points at one `k`: schedule, identity, scan.
pub(crate) fn aux_candidates(
    prob: &Problem,
    k: u64,
    x: f64,
    schedule: Option<&ApproxSchedule>,
    budget: &OptBudget,
) -> Result<Vec<AuxWitness>> {
    let mut out = Vec::new();
    let mut push = |offset: f64, rho: f64, source: WitnessSource| -> Result<()> {
        if !(rho > 0.0) || !prob.is_feasible(x + offset) {
            return Ok(());
        }
        let f_u = prob.f.eval_offset(x, offset);
        if !f_u.is_finite() {
            return Ok(());
        }
        let w = window_inf(prob, x, offset, rho, budget)?;
        let window_min = w.value.min(f_u);
        out.push(AuxWitness {
            k,
            x,
            offset,
            u: x + offset,
            rho,
            f_u,
            window_min,
            ratio: (window_min - f_u) / rho,
            is_window_min: f_u - window_min <= 1e-9,
            source,
        });
        Ok(())
    };
    if let Some(s) = schedule {
        let kf = k as f64;
        push(s.delta.eval(kf), s.rho.eval(kf), WitnessSource::Schedule)?;
    }
    let rhos = budget.sorted_rhos();
    let smallest = *rhos.last().unwrap();
    push(0.0, smallest, WitnessSource::Identity)?;
    let sigma = budget.approx_window / (k as f64).sqrt();
    if let Ok(w) = window_inf(prob, x, 0.0, sigma, budget) {
        if !w.unbounded {
            let room = sigma - w.offset.abs();
            let r = if room > 0.0 { (0.5 * room).min(smallest) } else { smallest };
            push(w.offset, r, WitnessSource::Scan)?;
        }
    }
    Ok(out)
}

/// The schedule entry when its ratio is within `tol` of zero, otherwise the
/// candidate with the largest ratio.
pub(crate) fn pick(cands: Vec<AuxWitness>, tol: f64) -> Option<AuxWitness> {
    if let Some(s) = cands.iter().find(|w| w.source == WitnessSource::Schedule && w.ratio >= -tol) {
        return Some(s.clone());
    }
    cands.into_iter().reduce(|a, b| if b.ratio > a.ratio { b } else { a })
}

/// Searches `u^k ∈ Ω` with `u^k - x^k → 0`, `f(u^k) → μ0` and vanishing
/// ratio at `u^k`. The registered schedule is tried first, then `u^k = x^k`
/// and a local-minimum scan.
pub fn check_approx_inf_stationary(
    prob: &Problem,
    seq: &SequenceSpec,
    mu0: f64,
    schedule: Option<&ApproxSchedule>,
    budget: &OptBudget,
) -> Result<StationarityReport> {
    prob.validate()?;
    budget.validate()?;
    let pts = seq_points(prob, seq, &budget.sorted_ks(), false)?;
    let mut rows = Vec::new();
    let mut witnesses = Vec::new();
    let mut missing = Vec::new();
    for &(k, x) in &pts {
        match pick(aux_candidates(prob, k, x, schedule, budget)?, budget.tol) {
            Some(w) => {
                rows.push(DiagnosticRow {
                    k,
                    x,
                    f_x: w.f_u,
                    rho: Some(w.rho),
                    local_inf: Some(w.window_min),
                    ratio: Some(w.ratio),
                    error_bound: None,
                });
                witnesses.push(w);
            }
            None => missing.push(k),
        }
    }
    let tol = budget.tol;
    let mut rep = report(StationarityProperty::ApproxInfStationary, Outcome::Inconclusive, mu0, None, rows);
    rep.witnesses = witnesses;
    if !missing.is_empty() {
        rep.notes.push(format!("no feasible auxiliary point for k in {missing:?}"));
        return Ok(rep);
    }
    let t = tail(&rep.witnesses);
    let dist = vanishes(&t.iter().map(|w| w.offset).collect::<Vec<_>>(), tol);
    let level = vanishes(&t.iter().map(|w| w.f_u - mu0).collect::<Vec<_>>(), tol);
    let limsup = t.iter().map(|w| w.ratio).fold(f64::NEG_INFINITY, f64::max);
    rep.estimate = Some(limsup);
    rep.outcome = if dist == Outcome::Certified && level == Outcome::Certified && limsup >= -tol {
        Outcome::Certified
    } else if limsup < -2.0 * tol {
        rep.notes.push("every candidate auxiliary point has a negative ratio; falsified relative to the candidates searched".into());
        Outcome::Falsified
    } else {
        Outcome::Inconclusive
    };
    let sources: Vec<WitnessSource> = t.iter().map(|w| w.source).collect();
    rep.notes.push(format!("tail witness sources: {sources:?}"));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimization::ScalarFunction;
    use std::f64::consts::PI;

    fn seq(s: &str) -> SequenceSpec {
        SequenceSpec::single(&[s]).unwrap()
    }

    #[test]
    fn minimizing_parabola() {
        let p = Problem::unconstrained(ScalarFunction::Polynomial { coeffs: vec![0.0, 0.0, 1.0] }, None);
        let r = check_minimizing(&p, &seq("1/k"), &OptBudget::default()).unwrap();
        assert_eq!(r.outcome, Outcome::Certified);
    }

    #[test]
    fn reciprocal_is_unbounded() {
        let p = Problem::unconstrained(ScalarFunction::Reciprocal, Some(0.0));
        for s in ["-1/k", "k"] {
            let r = check_minimizing(&p, &seq(s), &OptBudget::default()).unwrap();
            assert_eq!(r.outcome, Outcome::Falsified);
            assert!(r.notes[0].contains("inf unbounded below on grid"));
        }
    }

    #[test]
    fn level_bound_on_both_sides() {
        let p = Problem::unconstrained(ScalarFunction::Reciprocal, Some(0.0));
        let b = OptBudget::default();
        let right = check_minimizing_at_level(&p, &seq("k"), Radius::Finite(1.0), 1, &b).unwrap();
        assert_eq!(right.outcome, Outcome::Certified);
        let left = check_minimizing_at_level(&p, &seq("-k"), Radius::Finite(1.0), 1, &b).unwrap();
        assert_eq!(left.outcome, Outcome::Falsified);
        let firm = check_firm_inf_stationary(&p, &seq("-k"), 0.0, Radius::Finite(1.0), &b).unwrap();
        assert_eq!(firm.outcome, Outcome::Certified);
    }

    #[test]
    fn constant_sequence_at_a_local_minimizer() {
        // x^3 - 3x has a strict local minimum at 1 with value -2
        let p = Problem::unconstrained(ScalarFunction::Polynomial { coeffs: vec![0.0, -3.0, 0.0, 1.0] }, Some(-2.0));
        let b = OptBudget::default();
        let r = check_minimizing_at_level(&p, &seq("1"), Radius::Finite(0.5), 0, &b).unwrap();
        assert_eq!(r.outcome, Outcome::Certified);
        let r = check_firm_inf_stationary(&p, &seq("1"), -2.0, Radius::Finite(0.5), &b).unwrap();
        assert_eq!(r.outcome, Outcome::Certified);
        let r = check_inf_stationary(&p, &seq("1"), -2.0, &b).unwrap();
        assert_eq!(r.outcome, Outcome::Certified);
    }

    #[test]
    fn parabolic_windows() {
        let p = Problem::unconstrained(ScalarFunction::PiecewiseParabolic, Some(0.0));
        let b = OptBudget::default();
        let r = check_inf_stationary(&p, &seq("k"), 0.0, &b).unwrap();
        assert_eq!(r.outcome, Outcome::Certified, "{:?}", r.estimate);
        for rho in [0.1, 0.3, 1.0] {
            let r = check_firm_inf_stationary(&p, &seq("k"), 0.0, Radius::Finite(rho), &b).unwrap();
            assert_eq!(r.outcome, Outcome::Falsified);
            let expect = -(rho * rho).min(0.25);
            assert!((r.estimate.unwrap() - expect).abs() < 1e-3, "{rho}: {:?}", r.estimate);
        }
    }

    #[test]
    fn oscillation_needs_auxiliary_points() {
        let p = Problem::unconstrained(ScalarFunction::OscillatorySine, Some(0.0));
        let b = OptBudget {
            k_values: vec![10, 30, 100, 300, 1000],
            rho_values: vec![1e-1, 3e-2, 1e-2, 3e-3, 1e-3],
            ..OptBudget::default()
        };
        let r = check_inf_stationary(&p, &seq("2*k/pi"), 0.0, &b).unwrap();
        assert_eq!(r.outcome, Outcome::Falsified);
        assert!(r.estimate.unwrap() <= -0.9);
        let sched = ApproxSchedule::new("1/(2*k*pi - pi/2)", "1/(4*pi*k^2)").unwrap();
        let b = OptBudget { k_values: vec![1000, 10000, 100000, 1000000], ..OptBudget::default() };
        let r = check_approx_inf_stationary(&p, &seq("2*k/pi"), 0.0, Some(&sched), &b).unwrap();
        assert_eq!(r.outcome, Outcome::Certified);
        for w in &r.witnesses {
            assert_eq!(w.source, WitnessSource::Schedule);
            assert!(w.is_window_min, "k = {}", w.k);
            let d = 1.0 / (2.0 * w.k as f64 * PI - PI / 2.0);
            assert!((w.f_u + d).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_slope_has_no_auxiliary_points() {
        let p = Problem::unconstrained(ScalarFunction::Polynomial { coeffs: vec![0.0, -1.0] }, Some(0.0));
        let r = check_approx_inf_stationary(&p, &seq("1/k"), 0.0, None, &OptBudget::default()).unwrap();
        assert_eq!(r.outcome, Outcome::Falsified);
        assert!((r.estimate.unwrap() + 1.0).abs() < 1e-6);
    }

    #[test]
    fn csv_has_one_row_per_cell() {
        let p = Problem::unconstrained(ScalarFunction::PiecewiseParabolic, Some(0.0));
        let b = OptBudget { k_values: vec![10, 100], rho_values: vec![0.1, 0.3], ..OptBudget::default() };
        let r = check_inf_stationary(&p, &seq("k"), 0.0, &b).unwrap();
        assert_eq!(r.to_csv().lines().count(), 5);
    }
}
