//! Run configuration: one JSON object with a `schema_version`, the property to
//! check, the sets (or a scalar problem), a sequence and optional budgets.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "property": "extremal",
//!   "sets": [
//!     {"type": "PolynomialRegion", "dim": 2, "poly": {"terms": [{"coef": 1.0, "exps": [1, 1]}]},
//!      "relation": ">=", "value": 1.0, "side": [{"a": [-1.0, 0.0], "b": 0.0, "strict": true}]},
//!     {"type": "Halfspace", "a": [0.0, 1.0], "b": 0.0}
//!   ],
//!   "sequence": {"kind": "ClosedForm", "maps": [["k", "1/k"], ["k", "0"]]},
//!   "radius": {"Finite": 1.0}
//! }
//! ```
//!
//! `example` (a registry id) with an optional `sequence_label` may replace
//! `sets`/`problem` and `sequence`. Unknown fields are rejected everywhere.

use crate::cones::ConeKind;
use crate::error::{Error, Result};
use crate::extremality::{
    check_alpha_stationary, check_approx_stationary, check_extremal, check_stationary, check_transversal, CheckParams, PropertyVerdict,
    SequenceSpec,
};
use crate::geometry::{Radius, SetExpr};
use crate::norms::NormSpec;
use crate::optimization::{
    check_approx_inf_stationary, check_firm_inf_stationary, check_inf_stationary, check_minimizing, check_minimizing_at_level,
    check_necessary_conditions, multiplier_rule_check, qualification_check, ApproxSchedule, ConditionParams, MultiplierBranch, OptBudget,
    Problem, StationarityReport,
};
use crate::registry::{get_example, Fixture};
use crate::separation::SeparationSearchParams;
use crate::Outcome;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Extremal,
    Stationary,
    ApproxStationary,
    AlphaStationary,
    Transversal,
    Minimizing,
    MinimizingAtLevel,
    FirmInfStationary,
    InfStationary,
    ApproxInfStationary,
    NecessaryConditions,
    MultiplierRule,
    Qualification,
}

impl Property {
    pub fn needs_problem(self) -> bool {
        matches!(
            self,
            Property::Minimizing
                | Property::MinimizingAtLevel
                | Property::FirmInfStationary
                | Property::InfStationary
                | Property::ApproxInfStationary
                | Property::NecessaryConditions
                | Property::MultiplierRule
                | Property::Qualification
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub property: Property,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub example: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence_label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sets: Option<Vec<SetExpr>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<Problem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<SequenceSpec>,
    /// Overrides the norm of `params` and `separation`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<NormSpec>,
    #[serde(default)]
    pub params: CheckParams,
    #[serde(default)]
    pub budget: OptBudget,
    #[serde(default)]
    pub separation: SeparationSearchParams,
    #[serde(default)]
    pub conditions: ConditionParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<Radius>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// ε grid of the separation, necessary-condition and multiplier checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ApproxSchedule>,
    /// Bound `M` on the normal-cone part of the multiplier rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k0: Option<u64>,
    #[serde(default)]
    pub cone_kind: ConeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn json_error(src: &str, e: serde_json::Error) -> Error {
    let line = src.lines().nth(e.line().saturating_sub(1)).unwrap_or("").trim();
    Error::Config(format!("line {}, column {}: {e} (near `{line}`)", e.line(), e.column()))
}

impl RunConfig {
    pub fn parse(src: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(src).map_err(|e| json_error(src, e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&src)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!("field `schema_version`: expected {SCHEMA_VERSION}, found {}", self.schema_version)));
        }
        if self.example.is_none() {
            if self.sequence.is_none() {
                return Err(Error::Config("missing field `sequence`".into()));
            }
            if self.property.needs_problem() && self.problem.is_none() {
                return Err(Error::Config(format!("property `{:?}` needs field `problem`", self.property)));
            }
            if !self.property.needs_problem() && self.sets.is_none() {
                return Err(Error::Config(format!("property `{:?}` needs field `sets`", self.property)));
            }
        }
        if self.sets.is_some() && self.problem.is_some() {
            return Err(Error::Config("fields `sets` and `problem` are exclusive".into()));
        }
        if let Some(s) = &self.sets {
            for (i, set) in s.iter().enumerate() {
                set.validate().map_err(|e| Error::Config(format!("field `sets[{i}]`: {e}")))?;
            }
        }
        if let Some(p) = &self.problem {
            p.validate().map_err(|e| Error::Config(format!("field `problem`: {e}")))?;
        }
        if let Some(s) = &self.sequence {
            s.validate().map_err(|e| Error::Config(format!("field `sequence`: {e}")))?;
        }
        self.params.validate().map_err(|e| Error::Config(format!("field `params`: {e}")))?;
        self.budget.validate().map_err(|e| Error::Config(format!("field `budget`: {e}")))?;
        Ok(())
    }

    /// Fills `sets`/`problem`/`sequence` from the registry and applies the
    /// seed, norm and radius-cap overrides, so that the result replays alone.
    pub fn resolve(mut self, seed: Option<u64>, rmax: Option<f64>) -> Result<Self> {
        if let Some(id) = self.example.take() {
            let e = get_example(&id)?;
            let ns = match &self.sequence_label {
                Some(l) => e.sequences.iter().find(|s| &s.label == l).ok_or_else(|| Error::Config(format!("{id} has no sequence `{l}`")))?,
                None => &e.sequences[0],
            };
            if self.sequence.is_none() {
                self.sequence = Some(ns.seq.clone());
                if self.params.shift_search.hints.is_empty() {
                    self.params.shift_search.hints = ns.hints.clone();
                }
            }
            match e.fixture {
                Fixture::Sets { sets } if self.sets.is_none() => self.sets = Some(sets),
                Fixture::Problem { problem } if self.problem.is_none() => self.problem = Some(problem),
                _ => {}
            }
            self.sequence_label = None;
            self.validate()?;
        }
        if let Some(s) = seed.or(self.seed) {
            self.seed = Some(s);
            self.params.shift_search.seed = s;
            self.params.search.seed = s;
            self.separation.seed = s;
            self.conditions.separation.seed = s;
        }
        if let Some(n) = &self.norm {
            self.params.norm = n.clone();
            self.separation.norm = n.clone();
        }
        if let Some(r) = rmax {
            if !(r > 0.0) {
                return Err(Error::Config(format!("VEXT_RMAX must be positive, found {r}")));
            }
            self.params.search.radius_cap = r;
            self.budget.global_cap = r;
        }
        Ok(self)
    }

    fn seq(&self) -> Result<&SequenceSpec> {
        self.sequence.as_ref().ok_or_else(|| Error::Config("missing field `sequence`".into()))
    }

    fn sets(&self) -> Result<&[SetExpr]> {
        self.sets.as_deref().ok_or_else(|| Error::Config("missing field `sets`".into()))
    }

    fn problem(&self) -> Result<&Problem> {
        self.problem.as_ref().ok_or_else(|| Error::Config("missing field `problem`".into()))
    }

    fn need<T: Copy>(v: Option<T>, name: &str) -> Result<T> {
        v.ok_or_else(|| Error::Config(format!("property needs field `{name}`")))
    }

    fn eps_grid(&self) -> Vec<f64> {
        self.eps.clone().unwrap_or_else(|| vec![0.1, 0.01, 0.001])
    }
}

/// Outcome, JSON result and CSV table of one check.
pub struct Checked {
    pub outcome: Outcome,
    pub result: Value,
    pub csv: String,
}

fn verdict_csv(v: &PropertyVerdict) -> String {
    let mut s = String::from("eps,found,k,rho,shift_norm\n");
    for r in &v.per_epsilon {
        let opt = |x: Option<f64>| x.map_or(String::new(), |x| x.to_string());
        s.push_str(&format!("{},{},{},{},{}\n", r.eps, r.found, r.k.map_or(String::new(), |k| k.to_string()), opt(r.rho), opt(r.shift_norm)));
    }
    s
}

fn from_verdict(v: PropertyVerdict) -> Result<Checked> {
    Ok(Checked { outcome: v.outcome, csv: verdict_csv(&v), result: serde_json::to_value(&v)? })
}

fn from_report(r: StationarityReport) -> Result<Checked> {
    Ok(Checked { outcome: r.outcome, csv: r.to_csv(), result: serde_json::to_value(&r)? })
}

/// Runs the configured property on a resolved config.
pub fn execute(cfg: &RunConfig) -> Result<Checked> {
    let seq = cfg.seq()?;
    let p = &cfg.params;
    let level = |prob: &Problem| prob.level_or_estimate(&cfg.budget);
    match cfg.property {
        Property::Extremal => from_verdict(check_extremal(cfg.sets()?, seq, cfg.radius.unwrap_or(Radius::Finite(1.0)), p)?),
        Property::Stationary => from_verdict(check_stationary(cfg.sets()?, seq, p)?),
        Property::ApproxStationary => from_verdict(check_approx_stationary(cfg.sets()?, seq, p)?),
        Property::AlphaStationary => from_verdict(check_alpha_stationary(cfg.sets()?, seq, RunConfig::need(cfg.alpha, "alpha")?, p)?),
        Property::Transversal => from_verdict(check_transversal(cfg.sets()?, seq, RunConfig::need(cfg.alpha, "alpha")?, p)?),
        Property::Minimizing => from_report(check_minimizing(cfg.problem()?, seq, &cfg.budget)?),
        Property::MinimizingAtLevel => {
            let r = cfg.radius.unwrap_or(Radius::Finite(1.0));
            from_report(check_minimizing_at_level(cfg.problem()?, seq, r, cfg.k0.unwrap_or(0), &cfg.budget)?)
        }
        Property::FirmInfStationary => {
            let prob = cfg.problem()?;
            let r = cfg.radius.unwrap_or(Radius::Finite(1.0));
            from_report(check_firm_inf_stationary(prob, seq, level(prob)?, r, &cfg.budget)?)
        }
        Property::InfStationary => {
            let prob = cfg.problem()?;
            from_report(check_inf_stationary(prob, seq, level(prob)?, &cfg.budget)?)
        }
        Property::ApproxInfStationary => {
            let prob = cfg.problem()?;
            from_report(check_approx_inf_stationary(prob, seq, level(prob)?, cfg.schedule.as_ref(), &cfg.budget)?)
        }
        Property::NecessaryConditions => {
            let r = check_necessary_conditions(cfg.problem()?, seq, &cfg.eps_grid(), cfg.cone_kind, &cfg.separation)?;
            let mut csv = String::from("eps,success,k,x1_star,nu1,x2_star,sum\n");
            for w in &r.rows {
                csv.push_str(&format!("{},{},{},{},{},{},{}\n", w.eps, w.success, w.k.map_or(String::new(), |k| k.to_string()), w.x1_star, w.nu1, w.x2_star, w.sum));
            }
            Ok(Checked { outcome: r.outcome, csv, result: serde_json::to_value(&r)? })
        }
        Property::MultiplierRule => {
            let mut params = cfg.conditions.clone();
            params.budget = cfg.budget.clone();
            params.kind = cfg.cone_kind;
            let r = multiplier_rule_check(cfg.problem()?, seq, cfg.m.unwrap_or(100.0), &cfg.eps_grid(), &params)?;
            let outcome = if r.branch == MultiplierBranch::Neither { Outcome::Falsified } else { Outcome::Certified };
            let mut csv = String::from("eps,normal_residual,singular_sum\n");
            for w in &r.rows {
                csv.push_str(&format!("{},{},{}\n", w.eps, w.normal_residual, w.singular_sum));
            }
            Ok(Checked { outcome, csv, result: serde_json::to_value(&r)? })
        }
        Property::Qualification => {
            let mut params = cfg.conditions.clone();
            params.budget = cfg.budget.clone();
            params.kind = cfg.cone_kind;
            let eps = cfg.eps.as_ref().and_then(|e| e.first().copied()).unwrap_or(0.1);
            from_verdict(qualification_check(cfg.problem()?, seq, eps, &params)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_sequence_is_a_config_error() {
        let e = RunConfig::parse(r#"{"schema_version": 1, "property": "extremal", "sets": []}"#).unwrap_err();
        assert!(e.to_string().contains("sequence"), "{e}");
    }

    #[test]
    fn unknown_fields_are_rejected_with_position() {
        let src = "{\n  \"schema_version\": 1,\n  \"property\": \"extremal\",\n  \"colour\": 3\n}";
        let e = RunConfig::parse(src).unwrap_err().to_string();
        assert!(e.contains("line 4") && e.contains("colour"), "{e}");
    }

    #[test]
    fn example_configs_resolve_and_round_trip() {
        let cfg = RunConfig::parse(r#"{"schema_version": 1, "property": "extremal", "example": "E1.5"}"#).unwrap();
        let r = cfg.resolve(Some(7), Some(500.0)).unwrap();
        assert!(r.sets.is_some() && r.sequence.is_some());
        assert_eq!(r.params.search.radius_cap, 500.0);
        let again = RunConfig::parse(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(again, r);
    }
}
