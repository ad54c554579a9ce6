//! The planar pair `Ω1 = epi f`, `Ω2 = Ω × (-∞, μ0]` and the vertical shift
//! witnesses that turn inf-stationarity of `{x^k}` into extremality-type
//! properties of the pair.

use super::stationarity::{aux_candidates, pick, seq_points};
use super::{window_inf, OptBudget, Problem};
use super::{check_approx_inf_stationary, check_firm_inf_stationary, check_inf_stationary, ApproxSchedule};
use crate::error::{Error, Result};
use crate::expr::KExpr;
use crate::extremality::{k_schedule, EpsilonRecord, PropertyVerdict, SequenceSpec};
use crate::geometry::{intersection_empty, Emptiness, Method, Point, Radius, SearchBudget, SetExpr};
use crate::norms::NormSpec;
use crate::Outcome;
use serde::{Deserialize, Serialize};

/// `(epi f, Ω × (-∞, μ0])` with `μ0` from the problem (or its grid estimate).
pub fn embed_epigraph(prob: &Problem) -> Result<(SetExpr, SetExpr)> {
    prob.validate()?;
    let mu0 = prob.level_or_estimate(&OptBudget::default())?;
    Ok(embed_with_level(prob, mu0))
}

pub fn embed_with_level(prob: &Problem, mu0: f64) -> (SetExpr, SetExpr) {
    (SetExpr::Epigraph { f: prob.f.clone() }, SetExpr::ProductWithRay { base: Box::new(prob.omega.clone()), level: mu0 })
}

/// `{(x^k, c)}` in R^2 from a sequence in R.
pub fn lift_sequence(seq: &SequenceSpec, c: f64) -> Result<SequenceSpec> {
    seq.validate()?;
    if seq.n_sets() != 1 || seq.dim() != 1 {
        return Err(Error::InvalidInput("expected a single sequence in R".into()));
    }
    Ok(match seq {
        SequenceSpec::ClosedForm { maps, .. } => {
            SequenceSpec::ClosedForm { maps: vec![vec![maps[0][0].clone(), KExpr::constant(c)]], single: true }
        }
        SequenceSpec::Tabulated { points, .. } => SequenceSpec::Tabulated {
            points: vec![points[0].iter().map(|p| Point::from([p.coords()[0], c])).collect()],
            single: true,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WitnessVariant {
    /// Extremality at `{(x^k, f(x^k))}`, `{(x^k, μ0)}` with a fixed radius.
    Firm { rho: Radius },
    /// Stationarity at the same pair of sequences.
    Stationary,
    /// Approximate stationarity at `{(x^k, μ0)}`.
    Approx { schedule: Option<ApproxSchedule> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WitnessParams {
    pub epsilons: Vec<f64>,
    pub k_budget: u64,
    /// Budget of the primal check run before the construction.
    pub budget: OptBudget,
    pub search: SearchBudget,
    /// Floor of the adapted oracle resolution.
    pub min_resolution: f64,
}

impl Default for WitnessParams {
    fn default() -> Self {
        WitnessParams { epsilons: vec![1.0, 0.1, 0.01], k_budget: 10_000, budget: OptBudget::default(), search: SearchBudget::default(), min_resolution: 1e-5 }
    }
}

/// One admissible choice: bases `(u, f(u))`, `(u, μ0)`, radius and the
/// smallest `α` that the local infimum allows.
struct Choice {
    k: u64,
    u: f64,
    f_u: f64,
    rho: Radius,
    /// `α` is measured in units of `ρ` for the stationary variants.
    unit: f64,
    needed: f64,
}

/// Builds the shifts `a1 = (0, -αρ)`, `a2 = (0, αρ)` for every `ε` and checks
/// that `(Ω1 - x1 - a1) ∩ (Ω2 - x2 - a2)` misses the ball of radius `ρ` with
/// the grid oracle.
pub fn build_stationarity_witness(prob: &Problem, seq: &SequenceSpec, variant: &WitnessVariant, params: &WitnessParams) -> Result<PropertyVerdict> {
    prob.validate()?;
    let budget = &params.budget;
    let mu0 = prob.level_or_estimate(budget)?;
    let primal = match variant {
        WitnessVariant::Firm { rho } => check_firm_inf_stationary(prob, seq, mu0, *rho, budget)?,
        WitnessVariant::Stationary => check_inf_stationary(prob, seq, mu0, budget)?,
        WitnessVariant::Approx { schedule } => check_approx_inf_stationary(prob, seq, mu0, schedule.as_ref(), budget)?,
    };
    if primal.outcome != Outcome::Certified {
        return Err(Error::ConstructionFailed(format!("the sequence is not certified {} ({})", primal.property, primal.outcome)));
    }
    let (epi, ray) = embed_with_level(prob, mu0);
    let sets = [epi, ray];
    let norm = NormSpec::default();
    let mut records = Vec::new();
    let mut notes = vec![format!("primal check: {} {}", primal.property, primal.outcome)];
    for &eps in &params.epsilons {
        let ks = k_schedule(eps, params.k_budget);
        let pts = seq_points(prob, seq, &ks, !matches!(variant, WitnessVariant::Approx { .. }))?;
        let mut rec = EpsilonRecord {
            eps,
            found: false,
            k: None,
            rho: None,
            bases: vec![],
            shifts: vec![],
            shift_norm: None,
            shift_bound: None,
            emptiness: None,
            inconclusive_calls: 0,
            oracle_calls: 0,
            note: String::new(),
        };
        for (k, x) in pts {
            for c in choices(prob, k, x, eps, mu0, variant, budget)? {
                let alpha = 0.5 * (c.needed + eps);
                let h = alpha * c.unit;
                let bases = vec![Point::from([c.u, c.f_u]), Point::from([c.u, mu0])];
                let shifts = vec![Point::from([0.0, -h]), Point::from([0.0, h])];
                let translations: Vec<Point> = bases.iter().zip(&shifts).map(|(b, a)| b + a).collect();
                let r = c.rho.resolve(params.search.radius_cap).0;
                let mut sb = params.search.clone();
                sb.resolution = (0.25 * h / r).clamp(params.min_resolution.min(sb.resolution), sb.resolution);
                sb.eta = sb.eta.min(1e-2 * h);
                let v = intersection_empty(&sets, &translations, c.rho, Method::GridOracle, &sb)?;
                rec.oracle_calls += 1;
                match v.outcome {
                    Emptiness::Empty => {
                        rec.found = true;
                        rec.k = Some(c.k);
                        rec.rho = Some(r);
                        rec.shift_norm = Some(norm.product_norm(&shifts)?);
                        rec.shift_bound = Some(eps * c.unit);
                        rec.bases = bases;
                        rec.shifts = shifts;
                        rec.emptiness = Some(v);
                        rec.note = format!("alpha = {alpha}, needed > {}", c.needed);
                        break;
                    }
                    Emptiness::Inconclusive => rec.inconclusive_calls += 1,
                    Emptiness::Nonempty => {
                        notes.push(format!("eps {eps}: oracle found a point for k = {} although alpha = {alpha} exceeds {}", c.k, c.needed))
                    }
                }
            }
            if rec.found {
                break;
            }
        }
        if !rec.found && rec.oracle_calls == 0 {
            rec.note = "no admissible (k, rho, alpha) within the budget".into();
        }
        records.push(rec);
    }
    let outcome = if records.iter().all(|r| r.found) { Outcome::Certified } else { Outcome::Inconclusive };
    if records.iter().any(|r| !r.found && r.oracle_calls == 0) {
        let bad: Vec<f64> = records.iter().filter(|r| !r.found && r.oracle_calls == 0).map(|r| r.eps).collect();
        return Err(Error::ConstructionFailed(format!("no admissible witness at eps {bad:?}")));
    }
    Ok(PropertyVerdict { outcome, per_epsilon: records, notes })
}

fn choices(prob: &Problem, k: u64, x: f64, eps: f64, mu0: f64, variant: &WitnessVariant, budget: &OptBudget) -> Result<Vec<Choice>> {
    let mut out = Vec::new();
    let fx = prob.f.eval(x);
    if !fx.is_finite() && !matches!(variant, WitnessVariant::Approx { .. }) {
        return Ok(out);
    }
    match variant {
        WitnessVariant::Firm { rho } => {
            let r = rho.resolve(budget.global_cap).0;
            let gap = fx - window_inf(prob, x, 0.0, r, budget)?.value;
            let needed = (0.5 * gap).max(0.0);
            if needed < eps && (fx - mu0).abs() < eps {
                out.push(Choice { k, u: x, f_u: fx, rho: *rho, unit: 1.0, needed });
            }
        }
        WitnessVariant::Stationary => {
            let mut rhos: Vec<f64> = budget.sorted_rhos().into_iter().filter(|r| *r < eps).collect();
            rhos.insert(0, 0.5 * eps);
            for r in rhos {
                let gap = fx - window_inf(prob, x, 0.0, r, budget)?.value;
                let needed = (0.5 * gap / r).max(0.0);
                if needed < eps {
                    out.push(Choice { k, u: x, f_u: fx, rho: Radius::Finite(r), unit: r, needed });
                }
            }
        }
        WitnessVariant::Approx { schedule } => {
            if let Some(w) = pick(aux_candidates(prob, k, x, schedule.as_ref(), budget)?, budget.tol) {
                let needed = (-0.5 * w.ratio).max(0.0);
                if w.offset.abs() < eps && (w.f_u - mu0).abs() < eps && w.rho < eps && needed < eps {
                    out.push(Choice { k, u: w.u, f_u: w.f_u, rho: Radius::Finite(w.rho), unit: w.rho, needed });
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimization::ScalarFunction;

    #[test]
    fn embedding_of_the_zero_function() {
        let p = Problem::unconstrained(ScalarFunction::Polynomial { coeffs: vec![0.0] }, Some(0.0));
        let (a, b) = embed_epigraph(&p).unwrap();
        assert!(a.contains(&Point::from([3.0, 0.5]), 0.0).unwrap());
        assert!(!a.contains(&Point::from([3.0, -0.5]), 0.0).unwrap());
        assert!(b.contains(&Point::from([3.0, -0.5]), 0.0).unwrap());
        assert!(!b.contains(&Point::from([3.0, 0.5]), 0.0).unwrap());
    }

    #[test]
    fn lifted_sequence() {
        let s = lift_sequence(&SequenceSpec::single(&["k"]).unwrap(), -1.5).unwrap();
        assert_eq!(s.eval(4).unwrap()[0], Point::from([4.0, -1.5]));
    }

    #[test]
    fn firm_witness_on_the_reciprocal() {
        let p = Problem::unconstrained(ScalarFunction::Reciprocal, Some(0.0));
        let seq = SequenceSpec::single(&["k"]).unwrap();
        let v = build_stationarity_witness(&p, &seq, &WitnessVariant::Firm { rho: Radius::Finite(1.0) }, &WitnessParams::default()).unwrap();
        assert_eq!(v.outcome, Outcome::Certified, "{v:#?}");
        for r in &v.per_epsilon {
            assert!(r.shift_norm.unwrap() < r.eps);
        }
    }
}
