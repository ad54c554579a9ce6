//! Dual necessary conditions along a sequence: the separation certificate on
//! the embedded pair, the normal/singular multiplier rule and the
//! qualification condition that rules out the singular branch.
//!
//! Everything here is one-dimensional: `∂f` is read off the epigraph cone
//! model and `N_Ω` is `{0}`, a half-line or R at the ends of the interval.

use super::embedding::{embed_with_level, lift_sequence};
use super::stationarity::seq_points;
use super::{OptBudget, Problem};
use crate::cones::{cone_model, ConeKind};
use crate::error::{Error, Result};
use crate::extremality::{k_schedule, EpsilonRecord, PropertyVerdict, SequenceSpec};
use crate::geometry::{Point, SetExpr};
use crate::separation::{dual_infimum, search_certificate, transversality_dual_check, SeparationCertificate, SeparationSearchParams};
use crate::Outcome;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConditionParams {
    pub k_budget: u64,
    pub max_k_steps: usize,
    /// Uniform samples of `x1` in `(x^k - ε, x^k + ε)`; geometric approaches to
    /// `x^k` and to the breakpoints are added.
    pub samples: usize,
    pub kind: ConeKind,
    /// Used by the transversality route of the qualification check.
    pub separation: SeparationSearchParams,
    pub budget: OptBudget,
}

impl Default for ConditionParams {
    fn default() -> Self {
        ConditionParams {
            k_budget: 10_000,
            max_k_steps: 4,
            samples: 201,
            kind: ConeKind::Frechet,
            separation: SeparationSearchParams::default(),
            budget: OptBudget::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NecessaryRow {
    pub eps: f64,
    /// `ε/(2+ε)`, the tolerance handed to the certificate search.
    pub eps_prime: f64,
    pub success: bool,
    pub k: Option<u64>,
    pub x1: Option<Point>,
    pub x2: Option<Point>,
    /// Renormalized so that `|x1*| + |x2*| + |ν1| = 1`.
    pub x1_star: f64,
    pub nu1: f64,
    pub x2_star: f64,
    /// `|x1* + x2*|` after renormalization.
    pub sum: f64,
    /// Smallest normalized dual sum seen when the search fails.
    pub infimum: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NecessaryReport {
    pub level: f64,
    pub outcome: Outcome,
    pub rows: Vec<NecessaryRow>,
    pub certificates: Vec<SeparationCertificate>,
}

/// Searches separation certificates for `(epi f, Ω × (-∞, μ0])` along
/// `{(x^k, μ0)}` with tolerance `ε' = ε/(2+ε)`, drops `ν2` and rescales to
/// `|x1*| + |x2*| + |ν1| = 1`. A row fails honestly when the scan's smallest
/// normalized sum stays at or above `ε'`.
pub fn check_necessary_conditions(
    prob: &Problem,
    seq: &SequenceSpec,
    eps_grid: &[f64],
    kind: ConeKind,
    params: &SeparationSearchParams,
) -> Result<NecessaryReport> {
    prob.validate()?;
    let mu0 = prob.level_or_estimate(&OptBudget::default())?;
    let (epi, ray) = embed_with_level(prob, mu0);
    let sets = [epi, ray];
    let lifted = lift_sequence(seq, mu0)?;
    let mut rows = Vec::new();
    let mut certificates = Vec::new();
    let mut falsified = false;
    for &eps in eps_grid {
        let ep = eps / (2.0 + eps);
        let mut row = NecessaryRow {
            eps,
            eps_prime: ep,
            success: false,
            k: None,
            x1: None,
            x2: None,
            x1_star: 0.0,
            nu1: 0.0,
            x2_star: 0.0,
            sum: f64::INFINITY,
            infimum: None,
        };
        match search_certificate(&sets, &lifted, ep, kind, params)? {
            Some(cert) => {
                let (a, nu1, b) = (cert.duals[0][0], cert.duals[0][1], cert.duals[1][0]);
                let s = a.abs() + b.abs() + nu1.abs();
                if s > 0.0 {
                    row.x1_star = a / s;
                    row.nu1 = nu1 / s;
                    row.x2_star = b / s;
                    row.sum = (a + b).abs() / s;
                    row.success = row.sum < eps;
                }
                row.k = Some(cert.k);
                row.x1 = Some(cert.points[0].clone());
                row.x2 = Some(cert.points[1].clone());
                certificates.push(cert);
            }
            None => {
                let inf = dual_infimum(&sets, &lifted, ep, kind, params)?;
                if inf.infimum >= ep {
                    falsified = true;
                }
                row.infimum = Some(inf.infimum);
                row.k = inf.k;
            }
        }
        rows.push(row);
    }
    let outcome = if rows.iter().all(|r| r.success) {
        Outcome::Certified
    } else if falsified {
        Outcome::Falsified
    } else {
        Outcome::Inconclusive
    };
    Ok(NecessaryReport { level: mu0, outcome, rows, certificates })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MultiplierBranch {
    /// `0 ∈ ∂f(x1) + N_Ω(x2) ∩ M·B + ε·B` at every grid `ε`.
    Normal,
    /// Near-horizontal epigraph normals with vanishing sum at every grid `ε`.
    Singular,
    Both,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalWitness {
    pub k: u64,
    pub x1: f64,
    pub x2: f64,
    pub g: f64,
    pub v: f64,
    /// `|g + v|`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularWitness {
    pub k: u64,
    pub x1: f64,
    pub mu1: f64,
    pub x2: f64,
    pub x1_star: f64,
    pub nu1: f64,
    pub x2_star: f64,
    /// `|x1* + x2*|` with `|x1*| + |x2*| = 1` and `-ε < ν1 <= 0`.
    pub sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierRow {
    pub eps: f64,
    pub normal: Option<NormalWitness>,
    /// Smallest `|g + v|` seen (`+inf` when `∂f` was empty at every sample).
    pub normal_residual: f64,
    pub singular: Option<SingularWitness>,
    /// Smallest `|x1* + x2*|` over near-horizontal tuples (`+inf` when none).
    pub singular_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierReport {
    pub m: f64,
    pub level: f64,
    pub rows: Vec<MultiplierRow>,
    pub branch: MultiplierBranch,
    pub notes: Vec<String>,
}

/// Subgradient interval `{g : (g, -1) ∈ N_epi}` from cone generators.
fn subgradients(gens: &[Point]) -> Option<(f64, f64)> {
    let slopes: Vec<f64> = gens.iter().filter(|g| g[1] < 0.0).map(|g| g[0] / -g[1]).collect();
    if slopes.is_empty() {
        return None;
    }
    let mut lo = slopes.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for g in gens.iter().filter(|g| g[1] == 0.0) {
        if g[0] > 0.0 {
            hi = f64::INFINITY;
        } else if g[0] < 0.0 {
            lo = f64::NEG_INFINITY;
        }
    }
    Some((lo, hi))
}

/// Normal cone generators of the interval `[lo, hi]` at `x`.
fn omega_normals(lo: f64, hi: f64, x: f64) -> Vec<f64> {
    let tol = 1e-12 * (1.0 + x.abs());
    let mut g = Vec::new();
    if (x - lo).abs() <= tol {
        g.push(-1.0);
    }
    if (x - hi).abs() <= tol {
        g.push(1.0);
    }
    g
}

struct Base {
    x1: f64,
    f1: f64,
    gens: Vec<Point>,
}

fn x1_samples(prob: &Problem, x: f64, eps: f64, samples: usize) -> Vec<f64> {
    let n = samples.max(3);
    let w = eps * (1.0 - 1e-9);
    let mut out = vec![x];
    for i in 0..n {
        out.push(x - w + 2.0 * w * i as f64 / (n - 1) as f64);
    }
    let mut anchors = vec![x];
    anchors.extend(prob.f.breakpoints(x - w, x + w));
    for a in anchors {
        out.push(a);
        for j in 1..=45 {
            let d = eps * 0.5f64.powi(j);
            out.push(a - d);
            out.push(a + d);
        }
    }
    out.retain(|u| (u - x).abs() < eps);
    out.sort_by(|a, b| a.total_cmp(b));
    out.dedup();
    out
}

/// Graph points `(x1, f(x1))` near `(x^k, μ0)` with their epigraph cone.
fn epi_bases(prob: &Problem, x: f64, mu0: f64, eps: f64, kind: ConeKind, samples: usize) -> Result<(Vec<Base>, usize)> {
    let epi = SetExpr::Epigraph { f: prob.f.clone() };
    let mut out = Vec::new();
    let mut unsupported = 0;
    for x1 in x1_samples(prob, x, eps, samples) {
        let f1 = prob.f.eval(x1);
        if !f1.is_finite() || (f1 - mu0).abs() >= eps {
            continue;
        }
        match cone_model(&epi, &Point::from([x1, f1]), kind) {
            Ok(c) => out.push(Base { x1, f1, gens: c.generators().to_vec() }),
            Err(Error::UnsupportedCapability(_)) => {
                let d = prob.f.numeric_derivative(x1);
                if d.is_finite() {
                    out.push(Base { x1, f1, gens: vec![Point::from([d, -1.0])] });
                } else {
                    unsupported += 1;
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok((out, unsupported))
}

/// Points of `Ω` within `ε` of `x`: the nearest point and the interval ends.
fn omega_bases(lo: f64, hi: f64, x: f64, eps: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for c in [x.clamp(lo, hi), lo, hi] {
        if c.is_finite() && (c - x).abs() < eps && !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

/// `inf |x1* + x2*|` over `(x1*, ν1) ∈ cone(gens)`, `x2* ∈ cone(e)`,
/// `|x1*| + |x2*| = 1`, `-ε < ν1 <= 0`; `+inf` when no tuple qualifies.
fn horizontal_sum(gens: &[Point], normals: &[f64], eps: f64) -> (f64, Option<(f64, f64, f64)>) {
    let mut best: (f64, Option<(f64, f64, f64)>) = (f64::INFINITY, None);
    let mut offer = |v: f64, t: (f64, f64, f64)| {
        if v < best.0 {
            best = (v, Some(t));
        }
    };
    if let Some(&e) = normals.first() {
        offer(1.0, (0.0, 0.0, e));
    }
    // the most horizontal direction of the cone on each side
    for side in [-1.0f64, 1.0] {
        let r = gens
            .iter()
            .filter(|g| g[0] * side > 0.0)
            .map(|g| g[1].abs() / g[0].abs())
            .fold(f64::INFINITY, f64::min);
        if !r.is_finite() {
            continue;
        }
        if r < eps {
            offer(1.0, (side, -r, 0.0));
        }
        for &e in normals.iter().filter(|e| **e == -side) {
            // x1* = t·side, ν1 = -t·r, x2* = (1-t)·e; the sum is |2t - 1|
            let t_max = if r == 0.0 { f64::INFINITY } else { eps / r };
            if t_max > 0.5 {
                offer(0.0, (0.5 * side, -0.5 * r, 0.5 * e));
            } else {
                let t = t_max * (1.0 - 1e-12);
                offer(1.0 - 2.0 * t, (t * side, -t * r, (1.0 - t) * e));
            }
        }
    }
    best
}

/// For each `ε`, searches the normal branch `|g + v| < ε` with
/// `g ∈ ∂f(x1)`, `v ∈ N_Ω(x2) ∩ [-M, M]`, `|f(x1) - μ0| < ε`, and the
/// singular branch with near-horizontal epigraph normals. The classification
/// requires the branch at every grid `ε`.
pub fn multiplier_rule_check(prob: &Problem, seq: &SequenceSpec, m: f64, eps_grid: &[f64], params: &ConditionParams) -> Result<MultiplierReport> {
    prob.validate()?;
    if !(m > 0.0) || eps_grid.is_empty() {
        return Err(Error::InvalidInput("M must be positive and the eps grid nonempty".into()));
    }
    let mu0 = prob.level_or_estimate(&params.budget)?;
    let (lo, hi) = prob.interval()?;
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for &eps in eps_grid {
        let ks: Vec<u64> = k_schedule(eps, params.k_budget).into_iter().take(params.max_k_steps).collect();
        let mut row = MultiplierRow { eps, normal: None, normal_residual: f64::INFINITY, singular: None, singular_sum: f64::INFINITY };
        for (k, x) in seq_points(prob, seq, &ks, false)? {
            let (bases, unsupported) = epi_bases(prob, x, mu0, eps, params.kind, params.samples)?;
            if unsupported > 0 {
                notes.push(format!("eps {eps}, k {k}: {unsupported} samples without a cone model"));
            }
            let x2s = omega_bases(lo, hi, x, eps);
            for b in &bases {
                for &x2 in &x2s {
                    let normals = omega_normals(lo, hi, x2);
                    if let Some((glo, ghi)) = subgradients(&b.gens) {
                        let vlo = if normals.contains(&-1.0) { -m } else { 0.0 };
                        let vhi = if normals.contains(&1.0) { m } else { 0.0 };
                        // distance between [glo, ghi] and [-vhi, -vlo]
                        let (a, c) = (glo.max(-vhi), ghi.min(-vlo));
                        let (g, v) = if a <= c {
                            let g = 0.0f64.clamp(a, c);
                            (g, -g)
                        } else if ghi < -vhi {
                            (ghi, vhi)
                        } else {
                            (glo, vlo)
                        };
                        let res = (g + v).abs();
                        if res < row.normal_residual {
                            row.normal_residual = res;
                            row.normal = Some(NormalWitness { k, x1: b.x1, x2, g, v, residual: res });
                        }
                    }
                    let (s, t) = horizontal_sum(&b.gens, &normals, eps);
                    if s < row.singular_sum {
                        row.singular_sum = s;
                        row.singular = t.map(|(x1_star, nu1, x2_star)| SingularWitness { k, x1: b.x1, mu1: b.f1, x2, x1_star, nu1, x2_star, sum: s });
                    }
                }
            }
        }
        rows.push(row);
    }
    let normal = rows.iter().all(|r| r.normal_residual < r.eps);
    let singular = rows.iter().all(|r| r.singular_sum < r.eps);
    let branch = match (normal, singular) {
        (true, true) => MultiplierBranch::Both,
        (true, false) => MultiplierBranch::Normal,
        (false, true) => MultiplierBranch::Singular,
        (false, false) => MultiplierBranch::Neither,
    };
    let partial: Vec<f64> = rows.iter().filter(|r| r.normal_residual < r.eps).map(|r| r.eps).collect();
    if !normal && !partial.is_empty() {
        notes.push(format!("normal branch only at eps {partial:?}"));
    }
    Ok(MultiplierReport { m, level: mu0, rows, branch, notes })
}

/// Estimates `inf |x1* + x2*|` over near-horizontal tuples at graph points
/// near the tail. Certified when it stays at or above `ε` (or no tuple
/// exists), Falsified when a tuple below `ε` is found. Both cone kinds are
/// evaluated; the outcome follows `params.kind`. The transversality route on
/// `(epi f, Ω × R)` is reported in the notes.
pub fn qualification_check(prob: &Problem, seq: &SequenceSpec, eps: f64, params: &ConditionParams) -> Result<PropertyVerdict> {
    prob.validate()?;
    if !(eps > 0.0) {
        return Err(Error::InvalidInput("eps must be positive".into()));
    }
    let mu0 = prob.level_or_estimate(&params.budget)?;
    let (lo, hi) = prob.interval()?;
    let ks: Vec<u64> = k_schedule(eps, params.k_budget).into_iter().take(params.max_k_steps).collect();
    let pts = seq_points(prob, seq, &ks, false)?;
    let mut notes = Vec::new();
    let mut chosen = None;
    for kind in [ConeKind::Frechet, ConeKind::Clarke] {
        let mut inf = f64::INFINITY;
        let mut at: Option<SingularWitness> = None;
        for &(k, x) in &pts {
            let (bases, _) = epi_bases(prob, x, mu0, eps, kind, params.samples)?;
            for b in &bases {
                for x2 in omega_bases(lo, hi, x, eps) {
                    let (s, t) = horizontal_sum(&b.gens, &omega_normals(lo, hi, x2), eps);
                    if s < inf {
                        inf = s;
                        at = t.map(|(x1_star, nu1, x2_star)| SingularWitness { k, x1: b.x1, mu1: b.f1, x2, x1_star, nu1, x2_star, sum: s });
                    }
                }
            }
        }
        let name = if kind == ConeKind::Frechet { "QC_F" } else { "QC_C" };
        let verdict = if inf >= eps { Outcome::Certified } else { Outcome::Falsified };
        notes.push(format!("{name}: infimum estimate {inf} ({verdict})"));
        if kind == params.kind {
            chosen = Some((verdict, inf, at));
        }
    }
    let (outcome, inf, at) = chosen.expect("both kinds evaluated");
    let product = SetExpr::Product { factors: vec![prob.omega.clone(), SetExpr::Polyhedron { dim: 1, faces: vec![] }] };
    let sets = [SetExpr::Epigraph { f: prob.f.clone() }, product];
    match transversality_dual_check(&sets, &lift_sequence(seq, mu0)?, eps, &params.separation) {
        Ok(t) => {
            notes.push(format!("transversality of (epi f, Omega x R): {}", t.outcome));
            if t.outcome == Outcome::Certified && outcome == Outcome::Falsified {
                notes.push("transversality route certifies while the direct estimate falsifies; the sampled bases differ".into());
            }
        }
        Err(e) => notes.push(format!("transversality route unavailable: {e}")),
    }
    let rec = EpsilonRecord {
        eps,
        found: outcome == Outcome::Certified,
        k: at.as_ref().map(|w| w.k),
        rho: None,
        bases: at.as_ref().map_or(vec![], |w| vec![Point::from([w.x1, w.mu1]), Point::from([w.x2, mu0])]),
        shifts: vec![],
        shift_norm: None,
        shift_bound: None,
        emptiness: None,
        inconclusive_calls: 0,
        oracle_calls: 0,
        note: format!("infimum of |x1* + x2*| over near-horizontal tuples: {inf}"),
    };
    Ok(PropertyVerdict { outcome, per_epsilon: vec![rec], notes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Face;
    use crate::optimization::ScalarFunction;

    fn seq(s: &str) -> SequenceSpec {
        SequenceSpec::single(&[s]).unwrap()
    }

    fn cube_root() -> Problem {
        Problem::new(
            ScalarFunction::SignedPower { scale: 1.0, p: 1.0 / 3.0 },
            SetExpr::halfspace(vec![-1.0], 0.0),
            Some(0.0),
            0.0,
        )
    }

    #[test]
    fn reciprocal_takes_the_normal_branch() {
        let p = Problem::unconstrained(ScalarFunction::Reciprocal, Some(0.0));
        let grid = [0.1, 0.01, 0.001];
        for s in ["k", "-k"] {
            let r = multiplier_rule_check(&p, &seq(s), 100.0, &grid, &ConditionParams::default()).unwrap();
            assert_eq!(r.branch, MultiplierBranch::Normal, "{s}");
            for row in &r.rows {
                let w = row.normal.as_ref().unwrap();
                assert!(w.k as f64 > 1.0 / row.eps && w.residual < row.eps);
            }
            let q = qualification_check(&p, &seq(s), 0.1, &ConditionParams::default()).unwrap();
            assert_eq!(q.outcome, Outcome::Certified, "{:?}", q.notes);
        }
    }

    #[test]
    fn absolute_value_has_zero_subgradient() {
        let p = Problem::unconstrained(ScalarFunction::AbsPower { scale: 1.0, p: 1.0 }, Some(0.0));
        let r = multiplier_rule_check(&p, &seq("0"), 10.0, &[0.1, 0.01], &ConditionParams::default()).unwrap();
        assert_eq!(r.branch, MultiplierBranch::Normal);
        assert_eq!(r.rows[1].normal.as_ref().unwrap().g, 0.0);
    }

    #[test]
    fn square_root_cusp_is_a_minimizer() {
        // 0 is the minimizer of sqrt|x|, so g = 0 already closes the normal branch
        let p = Problem::unconstrained(ScalarFunction::AbsPower { scale: 1.0, p: 0.5 }, Some(0.0));
        let r = multiplier_rule_check(&p, &seq("0"), 100.0, &[0.1, 0.01, 0.001], &ConditionParams::default()).unwrap();
        assert!(matches!(r.branch, MultiplierBranch::Normal | MultiplierBranch::Both), "{r:#?}");
        assert!(r.rows.iter().all(|w| w.normal_residual < w.eps));
    }

    #[test]
    fn cube_root_on_a_half_line_is_singular() {
        let p = cube_root();
        let r = multiplier_rule_check(&p, &seq("0"), 100.0, &[0.1, 0.01, 0.001], &ConditionParams::default()).unwrap();
        assert_eq!(r.branch, MultiplierBranch::Singular, "{r:#?}");
        let q = qualification_check(&p, &seq("0"), 0.01, &ConditionParams::default()).unwrap();
        assert_eq!(q.outcome, Outcome::Falsified);
    }

    #[test]
    fn necessary_conditions_on_the_reciprocal() {
        let p = Problem::unconstrained(ScalarFunction::Reciprocal, Some(0.0));
        let r = check_necessary_conditions(&p, &seq("k"), &[0.1, 0.01], ConeKind::Frechet, &SeparationSearchParams::default()).unwrap();
        assert_eq!(r.outcome, Outcome::Certified, "{r:#?}");
        for row in &r.rows {
            assert!(row.x2_star.abs() < 1e-12);
            assert!((row.x1_star.abs() + row.nu1.abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn point_constraint_absorbs_the_gradient() {
        let omega = SetExpr::Polyhedron { dim: 1, faces: vec![Face::new(vec![1.0], 0.0), Face::new(vec![-1.0], 0.0)] };
        let p = Problem::new(ScalarFunction::Polynomial { coeffs: vec![0.0, 2.0] }, omega, Some(0.0), 0.0);
        let r = check_necessary_conditions(&p, &seq("0"), &[0.1, 0.01], ConeKind::Frechet, &SeparationSearchParams::default()).unwrap();
        assert_eq!(r.outcome, Outcome::Certified, "{r:#?}");
    }

    #[test]
    fn interior_non_stationary_point_fails() {
        // f(x) = 2x at 0: the normalized sum is bounded below by 2/3
        let p = Problem::unconstrained(ScalarFunction::Polynomial { coeffs: vec![0.0, 2.0] }, Some(0.0));
        let r = check_necessary_conditions(&p, &seq("0"), &[0.1], ConeKind::Frechet, &SeparationSearchParams::default()).unwrap();
        assert_eq!(r.outcome, Outcome::Falsified, "{r:#?}");
    }
}
