//! Built-in catalog of the worked examples with their analytic facts, and a
//! runner that pushes every fact through the matching checker.
//!
//! Ids: `E1.5`, `E3.4.1` ... `E3.4.5` (item n of the sequential extremality
//! list, item 1 restating the `E1.5` pair), `E4.2` ... `E4.5`.

use crate::cones::{cone_model, ConeKind};
use crate::error::{Error, Result};
use crate::extremality::{check_approx_stationary, check_extremal, CheckParams, SequenceSpec, ShiftHint};
use crate::geometry::{intersection_empty, Domain, Face, Method, Point, Polynomial, Radius, Relation, SetExpr};
use crate::norms::{BaseNorm, DualConvention, NormSpec, ProductNorm};
use crate::optimization::{
    check_approx_inf_stationary, check_firm_inf_stationary, check_inf_stationary, check_minimizing, check_minimizing_at_level,
    check_necessary_conditions, local_inf, multiplier_rule_check, qualification_check, ApproxSchedule, ConditionParams, MultiplierBranch,
    OptBudget, Problem, ScalarFunction, WitnessSource,
};
use crate::separation::{search_certificate, SeparationSearchParams};
use crate::Outcome;
use serde::{Deserialize, Serialize};

/// Every registered id, in catalog order.
pub const IDS: [&str; 10] = ["E1.5", "E3.4.1", "E3.4.2", "E3.4.3", "E3.4.4", "E3.4.5", "E4.2", "E4.3", "E4.4", "E4.5"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedSequence {
    pub label: String,
    pub seq: SequenceSpec,
    /// Single sequences that need not lie in any of the sets.
    pub external: bool,
    #[serde(default)]
    pub hints: Vec<ShiftHint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "fixture")]
pub enum Fixture {
    Sets { sets: Vec<SetExpr> },
    Problem { problem: Problem },
}

/// Analytic facts; `seq` indexes [`ExampleEntry::sequences`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "fact")]
pub enum Fact {
    /// The sequences lie in their sets for `k = 1..=k_max` (in `Ω` for problems).
    Membership { seq: usize, k_max: u64 },
    /// Unit normals at `x1 = (t, 1/t)`, `x2 = (t, 0)` scaled to `component_norm`
    /// under the mirror convention, and the norm of their sum.
    DualPair { t: f64, x1_star: [f64; 2], x2_star: [f64; 2], component_norm: f64, sum: f64, tol: f64 },
    /// `⋂ (Ω_i - x_i - a_i)` misses the ball of radius `rho`.
    ShiftEmpty { bases: Vec<Point>, shifts: Vec<Point>, rho: Radius },
    Extremal { seq: usize, rho: Radius, expected: Outcome },
    ApproxStationary { seq: usize, expected: Outcome },
    /// A verified separation certificate exists at every `ε`.
    Separation { seq: usize, eps: Vec<f64>, expected: Outcome },
    LocalInf { seq: usize, k: u64, rho: f64, value: f64, tol: f64 },
    Minimizing { seq: usize, expected: Outcome },
    MinimizingAtLevel { seq: usize, rho: Radius, k0: u64, expected: Outcome },
    FirmInfStationary { seq: usize, rho: Radius, expected: Outcome, limsup: Option<f64>, tol: f64 },
    /// `max_estimate` bounds the reported limsup from above.
    InfStationary { seq: usize, expected: Outcome, max_estimate: Option<f64>, k_values: Option<Vec<u64>>, rho_values: Option<Vec<f64>> },
    /// With a schedule, every witness must come from it and be the window
    /// minimum; `f(u^k) = -δ_k` within `tol`.
    ApproxInfStationary { seq: usize, schedule: Option<ApproxSchedule>, k_values: Option<Vec<u64>>, expected: Outcome, tol: f64 },
    NecessaryConditions { seq: usize, eps: Vec<f64>, expected: Outcome },
    Multiplier { seq: usize, m: f64, eps: Vec<f64>, expected: MultiplierBranch },
    Qualification { seq: usize, eps: f64, expected: Outcome },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactRow {
    pub fact: Fact,
    /// Where in the worked example the fact comes from, and any correction.
    pub location: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleEntry {
    pub id: String,
    pub description: String,
    pub fixture: Fixture,
    pub sequences: Vec<NamedSequence>,
    pub facts: Vec<FactRow>,
    pub notes: Vec<String>,
}

impl ExampleEntry {
    pub fn sets(&self) -> Option<&[SetExpr]> {
        match &self.fixture {
            Fixture::Sets { sets } => Some(sets),
            Fixture::Problem { .. } => None,
        }
    }

    pub fn problem(&self) -> Option<&Problem> {
        match &self.fixture {
            Fixture::Problem { problem } => Some(problem),
            Fixture::Sets { .. } => None,
        }
    }

    pub fn sequence(&self, label: &str) -> Option<&SequenceSpec> {
        self.sequences.iter().find(|s| s.label == label).map(|s| &s.seq)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunBudgets {
    pub check: CheckParams,
    pub opt: OptBudget,
    pub separation: SeparationSearchParams,
    pub conditions: ConditionParams,
    pub membership_tol: f64,
}

impl Default for RunBudgets {
    fn default() -> Self {
        RunBudgets {
            check: CheckParams::default(),
            opt: OptBudget::default(),
            separation: SeparationSearchParams::default(),
            conditions: ConditionParams::default(),
            membership_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowStatus {
    Match,
    Mismatch,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowResult {
    pub fact: String,
    pub location: String,
    pub status: RowStatus,
    pub expected: String,
    pub observed: String,
    pub detail: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalInfRow {
    pub k: u64,
    pub rho: f64,
    pub local_inf: f64,
    pub expected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleReport {
    pub id: String,
    pub rows: Vec<RowResult>,
    /// Local infimum rows, for CSV output.
    pub table: Vec<LocalInfRow>,
}

impl ExampleReport {
    /// 0 when every row matches, 1 on any mismatch, 2 on inconclusive rows.
    pub fn exit_code(&self) -> i32 {
        if self.rows.iter().any(|r| r.status == RowStatus::Mismatch) {
            1
        } else if self.rows.iter().any(|r| r.status == RowStatus::Inconclusive) {
            2
        } else {
            0
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,rho,local_inf,expected\n");
        for r in &self.table {
            s.push_str(&format!("{},{},{},{}\n", r.k, r.rho, r.local_inf, r.expected));
        }
        s
    }
}

/// One line per id with a one-sentence description.
pub fn list() -> Vec<(String, String)> {
    IDS.iter().map(|id| (id.to_string(), get_example(id).expect("registered").description)).collect()
}

pub fn all() -> Vec<ExampleEntry> {
    IDS.iter().map(|id| get_example(id).expect("registered")).collect()
}

fn pair(label: &str, a: [&str; 2], b: [&str; 2]) -> NamedSequence {
    NamedSequence {
        label: label.into(),
        seq: SequenceSpec::closed_form(&[&a, &b]).expect("registered sequence parses"),
        external: false,
        hints: vec![],
    }
}

fn single(label: &str, coords: &[&str], external: bool) -> NamedSequence {
    NamedSequence { label: label.into(), seq: SequenceSpec::single(coords).expect("registered sequence parses"), external, hints: vec![] }
}

fn row(fact: Fact, location: &str) -> FactRow {
    FactRow { fact, location: location.into() }
}

fn e15_sets() -> Vec<SetExpr> {
    vec![SetExpr::hyperbolic(Relation::Ge, 1.0, vec![Face::strict(vec![-1.0, 0.0], 0.0)]), SetExpr::halfspace(vec![0.0, 1.0], 0.0)]
}

fn extremal_rows(n: usize, location: &str) -> Vec<FactRow> {
    (0..n)
        .map(|i| row(Fact::Extremal { seq: i, rho: Radius::Finite(1.0), expected: Outcome::Certified }, &format!("{location}, pair {}", i + 1)))
        .chain((0..n).map(|i| row(Fact::Membership { seq: i, k_max: 100 }, &format!("{location}, pair {}", i + 1))))
        .collect()
}

/// Closed form of the local infimum of the piecewise parabolic function at
/// `x = k` (k >= 1): for `ρ <= 1/2` the minimum sits at `k + ρ`; beyond that
/// the infimum is approached at the piece boundary `k + 1/2`.
pub fn parabolic_local_inf(k: u64, rho: f64) -> f64 {
    let k = k as f64;
    if rho <= 0.5 {
        1.0 / (k + rho) - rho * rho
    } else {
        1.0 / (k + 0.5) - 0.25
    }
}

/// The simpler closed form `1/(k+ρ) - min(ρ², 1/4)`, exact only for `ρ <= 1/2`.
pub fn parabolic_stated(k: u64, rho: f64) -> f64 {
    1.0 / (k as f64 + rho) - (rho * rho).min(0.25)
}

pub fn e45_schedule() -> ApproxSchedule {
    ApproxSchedule::new("1/(2*k*pi - pi/2)", "1/(4*pi*k^2)").expect("registered schedule parses")
}

pub fn get_example(id: &str) -> Result<ExampleEntry> {
    let eps_grid = vec![0.1, 0.01, 0.001];
    let entry = match id {
        "E1.5" => ExampleEntry {
            id: id.into(),
            description: "Hyperbola region {x>0, xy>=1} against the lower half-plane: disjoint sets at distance 0.".into(),
            fixture: Fixture::Sets { sets: e15_sets() },
            sequences: vec![
                NamedSequence { hints: vec![ShiftHint::new(&[&["0", "-(1/k+eps)/2"], &["0", "0"]]).expect("hint parses")], ..pair("main", ["k", "1/k"], ["k", "0"]) },
                single("midpoint", &["k", "1/(2*k)"], true),
            ],
            facts: vec![
                row(Fact::Membership { seq: 0, k_max: 100 }, "points x1 = (t, 1/t), x2 = (t, 0)"),
                row(
                    Fact::DualPair { t: 10.0, x1_star: [-0.005, -0.5], x2_star: [0.0, 0.5], component_norm: 0.5, sum: 0.005, tol: 1e-12 },
                    "normals at t = 10 under the maximum norm",
                ),
                row(
                    Fact::ShiftEmpty {
                        bases: vec![Point::from([10.0, 0.1]), Point::from([10.0, 0.0])],
                        shifts: vec![Point::from([0.0, -0.15]), Point::from([0.0, 0.0])],
                        rho: Radius::Unbounded,
                    },
                    "shift a1 = (0, -xi) with xi in (1/t, eps), t = 10, xi = 0.15",
                ),
                row(Fact::Extremal { seq: 0, rho: Radius::Finite(1.0), expected: Outcome::Certified }, "extremality along (k, 1/k), (k, 0)"),
                row(Fact::Extremal { seq: 0, rho: Radius::Unbounded, expected: Outcome::Certified }, "rho = +inf"),
                row(Fact::Separation { seq: 1, eps: vec![0.1, 0.01], expected: Outcome::Certified }, "approximate extremal principle conclusions"),
                row(Fact::ApproxStationary { seq: 1, expected: Outcome::Certified }, "single sequence between the pair"),
            ],
            notes: vec!["Dual norm values are recorded under the mirror convention (maximum norm on duals), 0.5 per component.".into()],
        },
        "E3.4.1" => ExampleEntry {
            id: id.into(),
            description: "The E1.5 pair, extremal at (k, 1/k) and (k, 0).".into(),
            fixture: Fixture::Sets { sets: e15_sets() },
            sequences: vec![pair("1", ["k", "1/k"], ["k", "0"])],
            facts: extremal_rows(1, "item (i)"),
            notes: vec![],
        },
        "E3.4.2" => ExampleEntry {
            id: id.into(),
            description: "Epigraph of exp(-x) against the lower half-plane, extremal at (k, exp(-k)) and (k, 0).".into(),
            fixture: Fixture::Sets {
                sets: vec![SetExpr::Epigraph { f: ScalarFunction::Exp { scale: 1.0, rate: -1.0 } }, SetExpr::halfspace(vec![0.0, 1.0], 0.0)],
            },
            sequences: vec![pair("1", ["k", "exp(-k)"], ["k", "0"])],
            facts: extremal_rows(1, "item (ii)"),
            notes: vec![],
        },
        "E3.4.3" => ExampleEntry {
            id: id.into(),
            description: "Hyperbola region {xy>=1} against the coordinate quadrants {xy<=0}: four extremal directions and a mixed pair.".into(),
            fixture: Fixture::Sets { sets: vec![SetExpr::hyperbolic(Relation::Ge, 1.0, vec![]), SetExpr::hyperbolic(Relation::Le, 0.0, vec![])] },
            sequences: vec![
                pair("1", ["k", "1/k"], ["k", "0"]),
                pair("2", ["1/k", "k"], ["0", "k"]),
                pair("3", ["-k", "-1/k"], ["-k", "0"]),
                pair("4", ["-1/k", "-k"], ["0", "-k"]),
                pair("mixed", ["(-1)^k*k", "(-1)^k/k"], ["(-1)^k*k", "0"]),
            ],
            facts: extremal_rows(5, "item (iii)"),
            notes: vec!["Pair 4 is listed with first point (1/k, -k), where xy = -1; the registered point is (-1/k, -k).".into()],
        },
        "E3.4.4" => {
            let p = Polynomial::new(&[(1.0, &[1, 1]), (-1.0, &[2, 0])]);
            ExampleEntry {
                id: id.into(),
                description: "Regions {xy >= x^2+1} and {x(y-x) <= 0}: four extremal directions along the diagonal and the y-axis.".into(),
                fixture: Fixture::Sets {
                    sets: vec![
                        SetExpr::PolynomialRegion { dim: 2, poly: p.clone(), relation: Relation::Ge, value: 1.0, side: vec![] },
                        SetExpr::PolynomialRegion { dim: 2, poly: p, relation: Relation::Le, value: 0.0, side: vec![] },
                    ],
                },
                sequences: vec![
                    pair("1", ["k", "k+1/k"], ["k", "k"]),
                    pair("2", ["1/k", "k+1/k"], ["0", "k"]),
                    pair("3", ["-k", "-k-1/k"], ["-k", "-k"]),
                    pair("4", ["-1/k", "-k-1/k"], ["0", "-k"]),
                ],
                facts: extremal_rows(4, "item (iv)"),
                notes: vec!["Pair 3 is listed with first point (-k, -1/k), which is not in {xy >= x^2+1}; the registered point is (-k, -k-1/k), mirroring pair 1.".into()],
            }
        }
        "E3.4.5" => {
            let g2 = ScalarFunction::Sum { terms: vec![ScalarFunction::Reciprocal, ScalarFunction::SinRecip] };
            ExampleEntry {
                id: id.into(),
                description: "Graphs of sin(1/x) and 1/x + sin(1/x), extremal far out on either side.".into(),
                fixture: Fixture::Sets { sets: vec![SetExpr::graph(ScalarFunction::SinRecip, Domain::punctured()), SetExpr::graph(g2, Domain::punctured())] },
                sequences: vec![
                    pair("1", ["k", "sin(1/k)"], ["k", "1/k+sin(1/k)"]),
                    pair("2", ["-k", "-sin(1/k)"], ["-k", "-1/k-sin(1/k)"]),
                ],
                facts: extremal_rows(2, "item (v)"),
                notes: vec![],
            }
        }
        "E4.2" => ExampleEntry {
            id: id.into(),
            description: "Minimize 1/x over R: x = k is minimizing at level 0 but not minimizing; both x = k and x = -k satisfy the normal multiplier rule.".into(),
            fixture: Fixture::Problem { problem: Problem::unconstrained(ScalarFunction::Reciprocal, Some(0.0)) },
            sequences: vec![single("k", &["k"], false), single("-k", &["-k"], false)],
            facts: vec![
                row(Fact::Membership { seq: 0, k_max: 100 }, "x_k -> +inf"),
                row(Fact::MinimizingAtLevel { seq: 0, rho: Radius::Finite(1.0), k0: 1, expected: Outcome::Certified }, "minimizing at level 0"),
                row(Fact::Minimizing { seq: 0, expected: Outcome::Falsified }, "not a minimizing sequence"),
                row(Fact::NecessaryConditions { seq: 0, eps: vec![0.1, 0.01], expected: Outcome::Certified }, "separation on the embedded pair"),
                row(Fact::Multiplier { seq: 0, m: 100.0, eps: eps_grid.clone(), expected: MultiplierBranch::Normal }, "normal multiplier rule along x_k = k"),
                row(Fact::Multiplier { seq: 1, m: 100.0, eps: eps_grid.clone(), expected: MultiplierBranch::Normal }, "normal multiplier rule along x_k = -k"),
                row(Fact::Qualification { seq: 0, eps: 0.1, expected: Outcome::Certified }, "qualification condition along x_k = k"),
                row(Fact::Qualification { seq: 1, eps: 0.1, expected: Outcome::Certified }, "qualification condition along x_k = -k"),
            ],
            notes: vec!["Along x_k = 1/k and -1/k the values f(x_k) = +-k do not converge to the level, so the multiplier rows use x_k = k and -k.".into()],
        },
        "E4.3" => ExampleEntry {
            id: id.into(),
            description: "Minimize 1/x over R along x = -k: firmly inf-stationary at level 0 but not minimizing at that level.".into(),
            fixture: Fixture::Problem { problem: Problem::unconstrained(ScalarFunction::Reciprocal, Some(0.0)) },
            sequences: vec![single("-k", &["-k"], false)],
            facts: vec![
                row(Fact::MinimizingAtLevel { seq: 0, rho: Radius::Finite(1.0), k0: 1, expected: Outcome::Falsified }, "f < 0 left of the origin"),
                row(
                    Fact::FirmInfStationary { seq: 0, rho: Radius::Finite(1.0), expected: Outcome::Certified, limsup: Some(0.0), tol: 1e-3 },
                    "limsup of 1/(-k+1) at rho = 1",
                ),
            ],
            notes: vec![],
        },
        "E4.4" => {
            let mut facts = Vec::new();
            for k in [10u64, 100] {
                for rho in [0.1, 0.3, 1.0] {
                    let loc = if rho > 0.5 {
                        "local infimum 1/(k+1/2) - 1/4; the simpler form 1/(k+rho) - 1/4 lies below every value of f on the window for rho > 1/2"
                    } else {
                        "local infimum 1/(k+rho) - rho^2"
                    };
                    facts.push(row(Fact::LocalInf { seq: 0, k, rho, value: parabolic_local_inf(k, rho), tol: 1e-6 }, loc));
                }
            }
            facts.push(row(
                Fact::InfStationary { seq: 0, expected: Outcome::Certified, max_estimate: None, k_values: None, rho_values: None },
                "ratio limsup 0",
            ));
            for rho in [0.1, 0.3, 1.0] {
                facts.push(row(
                    Fact::FirmInfStationary { seq: 0, rho: Radius::Finite(rho), expected: Outcome::Falsified, limsup: Some(-(rho * rho).min(0.25)), tol: 1e-3 },
                    "limsup of the local infima -min(rho^2, 1/4)",
                ));
            }
            ExampleEntry {
                id: id.into(),
                description: "Piecewise parabolic 1/|x| - (x-j)^2 along x = k: inf-stationary but not firmly inf-stationary at level 0.".into(),
                fixture: Fixture::Problem { problem: Problem::unconstrained(ScalarFunction::PiecewiseParabolic, Some(0.0)) },
                sequences: vec![single("k", &["k"], false)],
                facts,
                notes: vec!["For rho in (1/2, 1] the local infimum is 1/(k+1/2) - 1/4, approached at the piece boundary k + 1/2; the simpler form 1/(k+rho) - 1/4 is lower than f anywhere on the window.".into()],
            }
        }
        "E4.5" => ExampleEntry {
            id: id.into(),
            description: "Oscillating t sin(1/t) windows along x = 2k/pi: not inf-stationary, approximately inf-stationary via u = x + delta_k.".into(),
            fixture: Fixture::Problem { problem: Problem::unconstrained(ScalarFunction::OscillatorySine, Some(0.0)) },
            sequences: vec![single("2k/pi", &["2*k/pi"], false)],
            facts: vec![
                row(
                    Fact::InfStationary {
                        seq: 0,
                        expected: Outcome::Falsified,
                        max_estimate: Some(-0.9),
                        k_values: Some(vec![10, 30, 100, 300, 1000]),
                        rho_values: Some(vec![1e-1, 3e-2, 1e-2, 3e-3, 1e-3]),
                    },
                    "ratio limsup <= -1",
                ),
                row(
                    Fact::ApproxInfStationary {
                        seq: 0,
                        schedule: Some(e45_schedule()),
                        k_values: Some(vec![1_000, 10_000, 100_000, 1_000_000]),
                        expected: Outcome::Certified,
                        tol: 1e-9,
                    },
                    "delta_k = 1/(2k pi - pi/2), rho_k = 1/(4 pi k^2)",
                ),
            ],
            notes: vec!["u^k is the minimum of f on its window only once k is in the hundreds; the schedule rows start at k = 1000.".into()],
        },
        _ => return Err(Error::UnknownExample(id.into())),
    };
    Ok(entry)
}

fn status_of(expected: Outcome, observed: Outcome) -> RowStatus {
    if expected == observed {
        RowStatus::Match
    } else if observed == Outcome::Inconclusive {
        RowStatus::Inconclusive
    } else {
        RowStatus::Mismatch
    }
}

fn fact_name(f: &Fact) -> &'static str {
    match f {
        Fact::Membership { .. } => "membership",
        Fact::DualPair { .. } => "dual pair",
        Fact::ShiftEmpty { .. } => "shifted intersection empty",
        Fact::Extremal { .. } => "extremal",
        Fact::ApproxStationary { .. } => "approximately stationary",
        Fact::Separation { .. } => "separation certificates",
        Fact::LocalInf { .. } => "local infimum",
        Fact::Minimizing { .. } => "minimizing",
        Fact::MinimizingAtLevel { .. } => "minimizing at level",
        Fact::FirmInfStationary { .. } => "firmly inf-stationary",
        Fact::InfStationary { .. } => "inf-stationary",
        Fact::ApproxInfStationary { .. } => "approximately inf-stationary",
        Fact::NecessaryConditions { .. } => "necessary conditions",
        Fact::Multiplier { .. } => "multiplier rule",
        Fact::Qualification { .. } => "qualification condition",
    }
}

fn seq_of<'a>(e: &'a ExampleEntry, i: usize) -> Result<&'a NamedSequence> {
    e.sequences.get(i).ok_or_else(|| Error::InvalidInput(format!("{}: no sequence {i}", e.id)))
}

fn sets_of(e: &ExampleEntry) -> Result<&[SetExpr]> {
    e.sets().ok_or_else(|| Error::InvalidInput(format!("{}: fact needs a set fixture", e.id)))
}

fn problem_of(e: &ExampleEntry) -> Result<&Problem> {
    e.problem().ok_or_else(|| Error::InvalidInput(format!("{}: fact needs a problem fixture", e.id)))
}

fn mirror() -> NormSpec {
    NormSpec::new(BaseNorm::LInf, ProductNorm::MaxProduct, DualConvention::MirrorBase)
}

/// Runs every fact of the entry through its checker.
pub fn run_example(id: &str, budgets: &RunBudgets) -> Result<ExampleReport> {
    let e = get_example(id)?;
    let mut rows = Vec::new();
    let mut table = Vec::new();
    for fr in &e.facts {
        let mut r = RowResult {
            fact: fact_name(&fr.fact).into(),
            location: fr.location.clone(),
            status: RowStatus::Match,
            expected: String::new(),
            observed: String::new(),
            detail: vec![],
        };
        run_fact(&e, &fr.fact, budgets, &mut r, &mut table)?;
        rows.push(r);
    }
    Ok(ExampleReport { id: e.id, rows, table })
}

fn outcome_row(r: &mut RowResult, label: &str, expected: Outcome, observed: Outcome) {
    r.fact = format!("{} ({label})", r.fact);
    r.expected = expected.to_string();
    r.observed = observed.to_string();
    r.status = status_of(expected, observed);
}

fn run_fact(e: &ExampleEntry, fact: &Fact, b: &RunBudgets, r: &mut RowResult, table: &mut Vec<LocalInfRow>) -> Result<()> {
    match fact {
        Fact::Membership { seq, k_max } => {
            let ns = seq_of(e, *seq)?;
            let mut bad = Vec::new();
            for k in 1..=*k_max {
                let pts = ns.seq.eval(k)?;
                match &e.fixture {
                    Fixture::Sets { sets } => {
                        for (i, (s, p)) in sets.iter().zip(&pts).enumerate() {
                            if !s.contains(p, b.membership_tol)? {
                                bad.push(format!("k = {k}, set {i}"));
                            }
                        }
                    }
                    Fixture::Problem { problem } => {
                        if !problem.is_feasible(pts[0][0]) {
                            bad.push(format!("k = {k}"));
                        }
                    }
                }
            }
            r.fact = format!("membership ({})", ns.label);
            r.expected = format!("inside for k <= {k_max}");
            r.observed = if bad.is_empty() { "inside".into() } else { format!("{} violations", bad.len()) };
            r.status = if bad.is_empty() { RowStatus::Match } else { RowStatus::Mismatch };
            r.detail = bad.into_iter().take(5).collect();
        }
        Fact::DualPair { t, x1_star, x2_star, component_norm, sum, tol } => {
            let sets = sets_of(e)?;
            let ns = mirror();
            let bases = [Point::from([*t, 1.0 / t]), Point::from([*t, 0.0])];
            let mut duals = Vec::new();
            for (s, x) in sets.iter().zip(&bases) {
                let cone = cone_model(s, x, ConeKind::Frechet)?;
                let g = cone.generators().first().cloned().ok_or_else(|| Error::ConstructionFailed("trivial normal cone".into()))?;
                duals.push(g.scale(component_norm / ns.dual_norm(&g)));
            }
            let got_sum = ns.dual_norm(&(&duals[0] + &duals[1]));
            let err = [
                (duals[0][0] - x1_star[0]).abs(),
                (duals[0][1] - x1_star[1]).abs(),
                (duals[1][0] - x2_star[0]).abs(),
                (duals[1][1] - x2_star[1]).abs(),
                (got_sum - sum).abs(),
            ]
            .into_iter()
            .fold(0.0, f64::max);
            r.expected = format!("x1* = {x1_star:?}, x2* = {x2_star:?}, sum {sum}");
            r.observed = format!("x1* = {:?}, x2* = {:?}, sum {got_sum}", duals[0].coords(), duals[1].coords());
            r.status = if err <= *tol { RowStatus::Match } else { RowStatus::Mismatch };
            r.detail = vec![format!("max deviation {err:e}")];
        }
        Fact::ShiftEmpty { bases, shifts, rho } => {
            let sets = sets_of(e)?;
            let tr: Vec<Point> = bases.iter().zip(shifts).map(|(x, a)| x + a).collect();
            let v = intersection_empty(sets, &tr, *rho, Method::GridOracle, &b.check.search)?;
            r.expected = "Empty".into();
            r.observed = format!("{:?}", v.outcome);
            r.status = match v.outcome {
                crate::geometry::Emptiness::Empty => RowStatus::Match,
                crate::geometry::Emptiness::Nonempty => RowStatus::Mismatch,
                crate::geometry::Emptiness::Inconclusive => RowStatus::Inconclusive,
            };
            r.detail = vec![format!("rigorous {}, capped {}, boxes {}", v.rigorous, v.capped, v.work)];
        }
        Fact::Extremal { seq, rho, expected } => {
            let ns = seq_of(e, *seq)?;
            let p = b.check.clone().with_hints(ns.hints.clone());
            let v = check_extremal(sets_of(e)?, &ns.seq, *rho, &p)?;
            outcome_row(r, &format!("{}, rho {rho:?}", ns.label), *expected, v.outcome);
            r.detail = v.notes;
        }
        Fact::ApproxStationary { seq, expected } => {
            let ns = seq_of(e, *seq)?;
            let v = check_approx_stationary(sets_of(e)?, &ns.seq, &b.check)?;
            outcome_row(r, &ns.label, *expected, v.outcome);
            r.detail = v.notes;
        }
        Fact::Separation { seq, eps, expected } => {
            let ns = seq_of(e, *seq)?;
            let mut found = true;
            for &ep in eps {
                let c = search_certificate(sets_of(e)?, &ns.seq, ep, ConeKind::Frechet, &b.separation)?;
                r.detail.push(format!("eps {ep}: {}", c.as_ref().map_or("none".into(), |c| format!("k = {}", c.k))));
                found &= c.is_some();
            }
            let observed = if found { Outcome::Certified } else { Outcome::Inconclusive };
            outcome_row(r, &ns.label, *expected, observed);
        }
        Fact::LocalInf { seq, k, rho, value, tol } => {
            let prob = problem_of(e)?;
            let x = seq_of(e, *seq)?.seq.eval(*k)?[0][0];
            let got = local_inf(prob, x, *rho, &b.opt)?;
            table.push(LocalInfRow { k: *k, rho: *rho, local_inf: got, expected: *value });
            r.fact = format!("local infimum (k {k}, rho {rho})");
            r.expected = format!("{value}");
            r.observed = format!("{got}");
            r.status = if (got - value).abs() <= *tol { RowStatus::Match } else { RowStatus::Mismatch };
        }
        Fact::Minimizing { seq, expected } => {
            let ns = seq_of(e, *seq)?;
            let v = check_minimizing(problem_of(e)?, &ns.seq, &b.opt)?;
            outcome_row(r, &ns.label, *expected, v.outcome);
            r.detail = v.notes;
        }
        Fact::MinimizingAtLevel { seq, rho, k0, expected } => {
            let ns = seq_of(e, *seq)?;
            let v = check_minimizing_at_level(problem_of(e)?, &ns.seq, *rho, *k0, &b.opt)?;
            outcome_row(r, &ns.label, *expected, v.outcome);
            r.detail = v.notes;
        }
        Fact::FirmInfStationary { seq, rho, expected, limsup, tol } => {
            let ns = seq_of(e, *seq)?;
            let prob = problem_of(e)?;
            let v = check_firm_inf_stationary(prob, &ns.seq, prob.level.unwrap_or(0.0), *rho, &b.opt)?;
            outcome_row(r, &format!("{}, rho {rho:?}", ns.label), *expected, v.outcome);
            if let (Some(want), Some(got)) = (limsup, v.estimate) {
                if (want - got).abs() > *tol && r.status == RowStatus::Match {
                    r.status = RowStatus::Mismatch;
                }
                r.detail.push(format!("limsup estimate {got}, expected {want}"));
            }
        }
        Fact::InfStationary { seq, expected, max_estimate, k_values, rho_values } => {
            let ns = seq_of(e, *seq)?;
            let prob = problem_of(e)?;
            let mut opt = b.opt.clone();
            if let Some(k) = k_values {
                opt.k_values = k.clone();
            }
            if let Some(rh) = rho_values {
                opt.rho_values = rh.clone();
            }
            let v = check_inf_stationary(prob, &ns.seq, prob.level.unwrap_or(0.0), &opt)?;
            outcome_row(r, &ns.label, *expected, v.outcome);
            if let (Some(bound), Some(got)) = (max_estimate, v.estimate) {
                if got > *bound && r.status == RowStatus::Match {
                    r.status = RowStatus::Mismatch;
                }
                r.detail.push(format!("ratio estimate {got}, bound {bound}"));
            }
        }
        Fact::ApproxInfStationary { seq, schedule, k_values, expected, tol } => {
            let ns = seq_of(e, *seq)?;
            let prob = problem_of(e)?;
            let mut opt = b.opt.clone();
            if let Some(k) = k_values {
                opt.k_values = k.clone();
            }
            let v = check_approx_inf_stationary(prob, &ns.seq, prob.level.unwrap_or(0.0), schedule.as_ref(), &opt)?;
            outcome_row(r, &ns.label, *expected, v.outcome);
            if let Some(s) = schedule {
                for w in &v.witnesses {
                    let delta = s.delta.eval(w.k as f64);
                    let ok = w.source == WitnessSource::Schedule && w.is_window_min && (w.f_u + delta).abs() <= *tol;
                    if !ok && r.status == RowStatus::Match {
                        r.status = RowStatus::Mismatch;
                    }
                    r.detail.push(format!("k {}: source {:?}, window minimum {}, f(u) + delta = {:e}", w.k, w.source, w.is_window_min, w.f_u + delta));
                }
            }
        }
        Fact::NecessaryConditions { seq, eps, expected } => {
            let ns = seq_of(e, *seq)?;
            let v = check_necessary_conditions(problem_of(e)?, &ns.seq, eps, ConeKind::Frechet, &b.separation)?;
            outcome_row(r, &ns.label, *expected, v.outcome);
            r.detail = v.rows.iter().map(|w| format!("eps {}: sum {} (k {:?})", w.eps, w.sum, w.k)).collect();
        }
        Fact::Multiplier { seq, m, eps, expected } => {
            let ns = seq_of(e, *seq)?;
            let v = multiplier_rule_check(problem_of(e)?, &ns.seq, *m, eps, &b.conditions)?;
            r.fact = format!("multiplier rule ({})", ns.label);
            r.expected = format!("{expected:?}");
            r.observed = format!("{:?}", v.branch);
            r.status = if v.branch == *expected { RowStatus::Match } else { RowStatus::Mismatch };
            r.detail = v.rows.iter().map(|w| format!("eps {}: normal residual {:e}, singular sum {}", w.eps, w.normal_residual, w.singular_sum)).collect();
            r.detail.extend(v.notes);
        }
        Fact::Qualification { seq, eps, expected } => {
            let ns = seq_of(e, *seq)?;
            let v = qualification_check(problem_of(e)?, &ns.seq, *eps, &b.conditions)?;
            outcome_row(r, &ns.label, *expected, v.outcome);
            r.detail = v.notes;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_complete() {
        assert_eq!(all().len(), 10);
        for (id, e) in IDS.iter().zip(all()) {
            assert_eq!(*id, e.id);
            assert!(!e.facts.is_empty());
        }
        assert!(matches!(get_example("E9.9"), Err(Error::UnknownExample(_))));
    }

    #[test]
    fn parabolic_forms_agree_below_one_half() {
        for k in [1u64, 10, 100] {
            for rho in [0.05, 0.1, 0.3, 0.5] {
                assert!((parabolic_local_inf(k, rho) - parabolic_stated(k, rho)).abs() < 1e-15);
            }
        }
        // brute force over the window at rho = 1
        let f = ScalarFunction::PiecewiseParabolic;
        let m = (0..=200_000).map(|i| f.eval(9.0 + i as f64 * 1e-5)).fold(f64::INFINITY, f64::min);
        assert!((m - parabolic_local_inf(10, 1.0)).abs() < 1e-9);
        assert!(parabolic_local_inf(10, 1.0) > parabolic_stated(10, 1.0) + 1e-3);
    }

    #[test]
    fn sequence_pairs_listed() {
        let e = get_example("E3.4.3").unwrap();
        assert_eq!(e.sequences.len(), 5);
        let e = get_example("E3.4.5").unwrap();
        assert!(matches!(e.sets().unwrap()[0], SetExpr::Graph { f: ScalarFunction::SinRecip, .. }));
    }
}
