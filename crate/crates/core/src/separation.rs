//! Generalized separation certificates: verification, search, and the
//! constructive passage from certificates back to approximate α-stationarity.

use crate::cones::{cone_model, ConeKind, ConeModel, DualVector};
use crate::error::{check_dim, Error, Result};
use crate::extremality::{k_schedule, EpsilonRecord, PropertyVerdict, SequenceSpec};
use crate::geometry::{intersection_empty, proj, Method, Point, Radius, SearchBudget, SetExpr};
use crate::linalg::golden;
use crate::norms::NormSpec;
use crate::Outcome;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Base points, normals and (optionally) the extra data of the full
/// generalized-separation conclusion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparationCertificate {
    pub k: u64,
    pub points: Vec<Point>,
    #[serde(default)]
    pub points_prime: Option<Vec<Point>>,
    #[serde(default)]
    pub shifts: Option<Vec<Point>>,
    #[serde(default)]
    pub x0: Option<Point>,
    pub duals: Vec<DualVector>,
    pub eps: f64,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub cone_kind: ConeKind,
    pub norm: NormSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub valid: bool,
    pub violations: Vec<String>,
    /// `‖Σ x_i*‖` under the certificate's convention.
    pub dual_sum: f64,
    /// `⦀x̂*⦀`.
    pub dual_norm: f64,
}

/// Tolerance for the normalization and membership checks.
pub const VERIFY_TOL: f64 = 1e-9;

/// Checks every condition of the certificate contract and lists the ones that
/// fail.
pub fn verify_certificate(cert: &SeparationCertificate, sets: &[SetExpr], seq: &SequenceSpec) -> Result<CertificateCheck> {
    verify_certificate_with(cert, sets, seq, VERIFY_TOL)
}

pub fn verify_certificate_with(
    cert: &SeparationCertificate,
    sets: &[SetExpr],
    seq: &SequenceSpec,
    tol: f64,
) -> Result<CertificateCheck> {
    let n = sets.len();
    check_dim(n, cert.points.len())?;
    check_dim(n, cert.duals.len())?;
    let d = sets[0].dim();
    for (s, (p, v)) in sets.iter().zip(cert.points.iter().zip(&cert.duals)) {
        check_dim(d, s.dim())?;
        check_dim(d, p.dim())?;
        check_dim(d, v.dim())?;
    }
    for extra in [&cert.points_prime, &cert.shifts].into_iter().flatten() {
        check_dim(n, extra.len())?;
        for p in extra {
            check_dim(d, p.dim())?;
        }
    }
    if let Some(x0) = &cert.x0 {
        check_dim(d, x0.dim())?;
    }
    if seq.n_sets() != 1 {
        return Err(Error::InvalidInput("certificates refer to a single sequence".into()));
    }
    let ns = &cert.norm;
    let mut violations = Vec::new();
    let eps = cert.eps;
    if !((cert.k as f64) > 1.0 / eps) {
        violations.push(format!("k = {} does not exceed 1/eps = {}", cert.k, 1.0 / eps));
    }
    let xk = seq.eval(cert.k.max(1))?.remove(0);
    check_dim(d, xk.dim())?;
    let dist = |pts: &[Point]| -> Result<f64> { ns.product_norm(&pts.iter().map(|p| p - &xk).collect::<Vec<_>>()) };
    let dx = dist(&cert.points)?;
    if !(dx < eps) {
        violations.push(format!("base points are at distance {dx} >= eps from the sequence point"));
    }
    if let Some(pp) = &cert.points_prime {
        let dp = dist(pp)?;
        if !(dp < eps) {
            violations.push(format!("primed points are at distance {dp} >= eps from the sequence point"));
        }
    }
    if let Some(a) = &cert.shifts {
        let na = ns.product_norm(a)?;
        if !(na < eps) {
            violations.push(format!("shift norm {na} is not below eps"));
        }
    }
    if let Some(x0) = &cert.x0 {
        let n0 = ns.base_norm(x0);
        if !(n0 < eps) {
            violations.push(format!("x0 norm {n0} is not below eps"));
        }
    }
    for (i, (s, p)) in sets.iter().zip(&cert.points).enumerate() {
        let scale = 1.0 + p.coords().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if !s.contains(p, tol * scale)? {
            violations.push(format!("point {i} is not in set {i}"));
            continue;
        }
        match cone_model(s, p, cert.cone_kind) {
            Ok(c) => {
                if !c.contains(&cert.duals[i], 1e-7) {
                    violations.push(format!("dual vector {i} is not in the normal cone at point {i}"));
                }
            }
            Err(e) => violations.push(format!("no cone model at point {i}: {e}")),
        }
    }
    if let Some(pp) = &cert.points_prime {
        for (i, (s, p)) in sets.iter().zip(pp).enumerate() {
            let scale = 1.0 + p.coords().iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if !s.contains(p, tol * scale)? {
                violations.push(format!("primed point {i} is not in set {i}"));
            }
        }
    }
    let dual_sum = ns.dual_sum_norm(&cert.duals)?;
    let bound = cert.beta.unwrap_or(eps);
    if !(dual_sum < bound) {
        violations.push(format!("sum of dual vectors has norm {dual_sum} >= {bound}"));
    }
    let dual_norm = ns.dual_product_norm(&cert.duals)?;
    if (dual_norm - 1.0).abs() > tol {
        violations.push(format!("dual tuple has norm {dual_norm}, expected 1"));
    }
    if let Some(tau) = cert.tau {
        // v_i = x0 + a_i + x_i' - x_i, missing parts read as zero
        let v: Vec<Point> = (0..n)
            .map(|i| {
                let mut w = -&cert.points[i];
                if let Some(x0) = &cert.x0 {
                    w = w + x0;
                }
                if let Some(a) = &cert.shifts {
                    w = w + &a[i];
                }
                if let Some(pp) = &cert.points_prime {
                    w = w + &pp[i];
                }
                w
            })
            .collect();
        let pairing: f64 = cert.duals.iter().zip(&v).map(|(x, w)| x.dot(w)).sum();
        let nv = ns.product_norm(&v)?;
        if !(pairing > tau * nv) {
            violations.push(format!("pairing {pairing} does not exceed tau times {nv}"));
        }
    }
    Ok(CertificateCheck { valid: violations.is_empty(), violations, dual_sum, dual_norm })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Optimizer {
    /// Grid over the weights only.
    GridMin,
    /// Grid, then golden-section sweeps over each weight.
    #[default]
    CoordinateDescent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeparationSearchParams {
    pub k_budget: u64,
    /// How many k values of the schedule are tried.
    pub max_k_steps: usize,
    /// Offsets (as fractions of ε) of the extra projection seeds per axis.
    pub offsets: Vec<f64>,
    /// Step of the weight grid on the cone parametrization.
    pub weight_resolution: f64,
    pub optimizer: Optimizer,
    pub norm: NormSpec,
    /// `β`; certificates must have `‖Σ x_i*‖ < min(ε, β)`.
    pub beta: Option<f64>,
    pub seed: u64,
}

impl Default for SeparationSearchParams {
    fn default() -> Self {
        SeparationSearchParams {
            k_budget: 10_000,
            max_k_steps: 6,
            offsets: vec![0.25, 0.5],
            weight_resolution: 1e-3,
            optimizer: Optimizer::CoordinateDescent,
            norm: NormSpec::default(),
            beta: None,
            seed: 0,
        }
    }
}

/// Points of `set` within ε of `x` (base norm): projections of `x` and of
/// nearby seeds.
fn base_candidates(set: &SetExpr, x: &Point, eps: f64, params: &SeparationSearchParams) -> Result<Vec<Point>> {
    let d = x.dim();
    let mut seeds = vec![x.clone()];
    for &f in &params.offsets {
        for j in 0..d {
            for s in [-1.0, 1.0] {
                let mut e = x.coords().to_vec();
                e[j] += s * f * eps;
                seeds.push(Point::from(e));
            }
        }
    }
    let mut out: Vec<Point> = Vec::new();
    for q in seeds {
        let p = if set.holds(q.coords(), 0.0) { q } else { Point::from(proj(set, q.coords(), 1e-12)?) };
        if params.norm.base_norm(&(&p - x)) < eps && !out.iter().any(|o| o.dist2(&p) <= 1e-12 * (1.0 + p.norm2())) {
            out.push(p);
        }
    }
    Ok(out)
}

/// Minimum of `‖Σ x_i*‖ / ⦀x̂*⦀` over the cones (weights on generators),
/// returning the normalized minimizer. `None` when every cone is trivial.
pub fn min_normalized_sum(cones: &[ConeModel], norm: &NormSpec, resolution: f64, optimizer: Optimizer) -> Result<Option<(f64, Vec<DualVector>)>> {
    let d = cones.first().map_or(0, |c| c.dim);
    let gens: Vec<(usize, Point)> =
        cones.iter().enumerate().flat_map(|(i, c)| c.generators().iter().map(move |g| (i, g.clone()))).collect();
    let m = gens.len();
    if m == 0 {
        return Ok(None);
    }
    let n = cones.len();
    let assemble = |w: &[f64]| -> Vec<Point> {
        let mut duals = vec![Point::zeros(d); n];
        for ((i, g), wi) in gens.iter().zip(w) {
            duals[*i] = &duals[*i] + &g.scale(*wi);
        }
        duals
    };
    let ratio = |w: &[f64]| -> f64 {
        let duals = assemble(w);
        let den = norm.dual_product_norm(&duals).unwrap_or(0.0);
        if den <= 1e-300 {
            return f64::INFINITY;
        }
        norm.dual_sum_norm(&duals).unwrap_or(f64::INFINITY) / den
    };
    // the ratio is scale invariant, so a grid on the weight simplex suffices
    let steps = match m {
        1 => 1,
        2 => ((1.0 / resolution).round() as usize).clamp(1, 100_000),
        3 => 40,
        4 => 12,
        _ => 4,
    };
    let mut best = (f64::INFINITY, vec![0.0; m]);
    for_each_composition(steps, m, &mut |c| {
        let w: Vec<f64> = c.iter().map(|&i| i as f64 / steps as f64).collect();
        let r = ratio(&w);
        if r < best.0 {
            best = (r, w);
        }
    });
    if optimizer == Optimizer::CoordinateDescent && m > 1 {
        let h = 1.0 / steps as f64;
        for _ in 0..4 {
            for j in 0..m {
                let mut w = best.1.clone();
                let lo = (w[j] - h).max(0.0);
                let hi = (w[j] + h).min(1.0);
                let (x, fx) = golden(
                    |t| {
                        let mut v = w.clone();
                        v[j] = t;
                        ratio(&v)
                    },
                    lo,
                    hi,
                    60,
                );
                if fx < best.0 {
                    w[j] = x;
                    best = (fx, w);
                }
            }
        }
    }
    if !best.0.is_finite() {
        return Ok(None);
    }
    let duals = assemble(&best.1);
    let den = norm.dual_product_norm(&duals)?;
    let duals: Vec<Point> = duals.iter().map(|v| v.scale(1.0 / den)).collect();
    Ok(Some((norm.dual_sum_norm(&duals)?, duals)))
}

/// Calls `f` on every `m`-tuple of nonnegative integers summing to `total`.
fn for_each_composition(total: usize, m: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(rem: usize, slot: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if slot + 1 == cur.len() {
            cur[slot] = rem;
            f(cur);
            return;
        }
        for i in 0..=rem {
            cur[slot] = i;
            rec(rem - i, slot + 1, cur, f);
        }
    }
    let mut cur = vec![0; m];
    rec(total, 0, &mut cur, f);
}

/// All combinations of per-set candidates, capped.
fn combinations(cands: &[Vec<Point>], cap: usize) -> Vec<Vec<Point>> {
    let mut out: Vec<Vec<Point>> = vec![vec![]];
    for c in cands {
        let mut next = Vec::new();
        for prefix in &out {
            for p in c {
                if next.len() >= cap {
                    break;
                }
                let mut v = prefix.clone();
                v.push(p.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out
}

fn check_inputs(sets: &[SetExpr], seq: &SequenceSpec) -> Result<()> {
    if sets.is_empty() {
        return Err(Error::InvalidInput("no sets".into()));
    }
    seq.validate()?;
    if seq.n_sets() != 1 {
        return Err(Error::InvalidInput("expected a single sequence".into()));
    }
    let d = sets[0].dim();
    for s in sets {
        s.validate()?;
        check_dim(d, s.dim())?;
    }
    check_dim(d, seq.dim())
}

/// Smallest normalized dual sum found at one k; `Err` only for hard failures.
struct Scan {
    best: Option<(f64, Vec<Point>, Vec<DualVector>)>,
    unsupported: usize,
}

fn scan_k(sets: &[SetExpr], x: &Point, eps: f64, kind: ConeKind, params: &SeparationSearchParams, stop_below: f64) -> Result<Scan> {
    let mut cands = Vec::with_capacity(sets.len());
    for s in sets {
        cands.push(base_candidates(s, x, eps, params)?);
    }
    let mut scan = Scan { best: None, unsupported: 0 };
    if cands.iter().any(|c| c.is_empty()) {
        return Ok(scan);
    }
    for bases in combinations(&cands, 400) {
        if params.norm.product_norm(&bases.iter().map(|p| p - x).collect::<Vec<_>>())? >= eps {
            continue;
        }
        let mut cones = Vec::with_capacity(sets.len());
        let mut ok = true;
        for (s, p) in sets.iter().zip(&bases) {
            match cone_model(s, p, kind) {
                Ok(c) => cones.push(c),
                Err(Error::UnsupportedCapability(_)) => {
                    scan.unsupported += 1;
                    ok = false;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if !ok {
            continue;
        }
        if let Some((v, duals)) = min_normalized_sum(&cones, &params.norm, params.weight_resolution, params.optimizer)? {
            if scan.best.as_ref().map_or(true, |b| v < b.0) {
                scan.best = Some((v, bases, duals));
            }
            if v < stop_below {
                break;
            }
        }
    }
    Ok(scan)
}

/// Searches `k > 1/ε`, base points near `x^k` and normal tuples with small
/// `‖Σ x_i*‖`; returns the first certificate that passes verification.
pub fn search_certificate(
    sets: &[SetExpr],
    seq: &SequenceSpec,
    eps: f64,
    kind: ConeKind,
    params: &SeparationSearchParams,
) -> Result<Option<SeparationCertificate>> {
    check_inputs(sets, seq)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidInput("eps must be positive".into()));
    }
    let target = params.beta.map_or(eps, |b| b.min(eps));
    let mut unsupported = 0;
    let mut scanned = 0;
    for k in k_schedule(eps, params.k_budget).into_iter().take(params.max_k_steps) {
        let x = seq.eval(k)?.remove(0);
        let scan = scan_k(sets, &x, eps, kind, params, target)?;
        unsupported += scan.unsupported;
        let Some((v, bases, duals)) = scan.best else { continue };
        scanned += 1;
        if v < target {
            let cert = SeparationCertificate {
                k,
                points: bases,
                points_prime: None,
                shifts: None,
                x0: None,
                duals,
                eps,
                beta: params.beta,
                tau: None,
                cone_kind: kind,
                norm: params.norm.clone(),
            };
            if verify_certificate(&cert, sets, seq)?.valid {
                return Ok(Some(cert));
            }
        }
    }
    if scanned == 0 && unsupported > 0 {
        return Err(Error::UnsupportedCapability("no cone model at any candidate base point".into()));
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstructionParams {
    /// Samples per set for the Fréchet inequality.
    pub samples: usize,
    /// Halvings of `ρ` tried, starting from `ε/2`.
    pub max_halvings: usize,
    pub search: SearchBudget,
    pub seed: u64,
}

impl Default for ConstructionParams {
    fn default() -> Self {
        ConstructionParams { samples: 200, max_halvings: 30, search: SearchBudget::default(), seed: 0 }
    }
}

/// `sup <x*, w - x> / ‖w - x‖` over sampled `w ∈ set` with `‖w - x‖ < r`.
fn sampled_frechet_slope(set: &SetExpr, x: &Point, xs: &Point, r: f64, norm: &NormSpec, samples: usize, rng: &mut ChaCha8Rng) -> f64 {
    let d = x.dim();
    let mut worst = f64::NEG_INFINITY;
    for i in 0..samples {
        let dir: Vec<f64> = if i < 2 * d {
            let mut e = vec![0.0; d];
            e[i / 2] = if i % 2 == 0 { 1.0 } else { -1.0 };
            e
        } else {
            (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()
        };
        for frac in [1.0, 0.5, 0.1, 0.01] {
            let q: Vec<f64> = x.coords().iter().zip(&dir).map(|(a, u)| a + frac * r * u).collect();
            let w = if set.holds(&q, 0.0) { Some(q) } else { proj(set, &q, 1e-12).ok() };
            if let Some(w) = w {
                let dv = Point::from(w) - x;
                let nd = norm.base_norm(&dv);
                if nd > 0.0 && nd < r {
                    worst = worst.max(xs.dot(&dv) / nd);
                }
            }
        }
    }
    worst
}

/// Replays the passage from certificates (`‖Σ x_i*‖ < β`) to approximate
/// α-stationarity for `α > β`: picks `ρ` where the sampled Fréchet inequality
/// holds with constant `ξ/(κ₂ + α)`, `ξ = (α - β)/2`, builds
/// `a_i = s u_i` along norming directions of `x_i*` with `s = (α - ξ'/2)ρ`, and
/// confirms emptiness with the grid oracle.
pub fn stationarity_from_certificates(
    sets: &[SetExpr],
    seq: &SequenceSpec,
    certs: &[SeparationCertificate],
    alpha: f64,
    params: &ConstructionParams,
) -> Result<PropertyVerdict> {
    check_inputs(sets, seq)?;
    let mut records = Vec::new();
    let mut notes = Vec::new();
    if certs.is_empty() {
        notes.push("no certificates to process".into());
        return Ok(PropertyVerdict { outcome: Outcome::Inconclusive, per_epsilon: records, notes });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    for cert in certs {
        let ns = &cert.norm;
        let beta = cert.beta.unwrap_or(cert.eps);
        if !(alpha > beta) {
            return Err(Error::ConstructionFailed(format!("alpha = {alpha} must exceed beta = {beta}")));
        }
        let sum = ns.dual_sum_norm(&cert.duals)?;
        if !(sum < beta) {
            return Err(Error::ConstructionFailed(format!("dual sum {sum} is not below beta = {beta}")));
        }
        if cert.cone_kind != ConeKind::Frechet {
            return Err(Error::ConstructionFailed("the construction needs Fréchet normals".into()));
        }
        let check = verify_certificate(cert, sets, seq)?;
        if !check.valid {
            return Err(Error::ConstructionFailed(format!("certificate does not verify: {}", check.violations.join("; "))));
        }
        let xi = (alpha - beta) / 2.0;
        let xi_p = alpha - beta - xi;
        let slope_cap = xi / (ns.kappa2 + alpha);
        let mut rho = cert.eps / 2.0;
        let mut ok = false;
        for _ in 0..params.max_halvings {
            let r = (ns.kappa2 + alpha) * rho;
            let total: f64 = sets
                .iter()
                .zip(cert.points.iter().zip(&cert.duals))
                .map(|(s, (x, xs))| sampled_frechet_slope(s, x, xs, r, ns, params.samples, &mut rng).max(0.0))
                .sum();
            if total / ns.kappa1 <= slope_cap {
                ok = true;
                break;
            }
            rho /= 2.0;
        }
        if !ok {
            return Err(Error::ConstructionFailed(format!("no radius admits the Fréchet inequality at eps = {}", cert.eps)));
        }
        let s = (alpha - xi_p / 2.0) * rho;
        let shifts: Vec<Point> =
            cert.duals.iter().map(|v| Point::from(ns.base.norming_direction(v.coords())).scale(s)).collect();
        let na = ns.product_norm(&shifts)?;
        let pairing: f64 = cert.duals.iter().zip(&shifts).map(|(v, a)| v.dot(a)).sum();
        if !(na < alpha * rho) || !(pairing > (beta + xi) * rho) {
            return Err(Error::ConstructionFailed(format!(
                "shift norm {na} / pairing {pairing} miss the bounds {} / {}",
                alpha * rho,
                (beta + xi) * rho
            )));
        }
        let translations: Vec<Point> = cert.points.iter().zip(&shifts).map(|(x, a)| x + a).collect();
        let mut budget = params.search.clone();
        let smallest = shifts.iter().map(|a| ns.base_norm(a)).filter(|v| *v > 0.0).fold(f64::INFINITY, f64::min);
        if smallest.is_finite() {
            budget.resolution = budget.resolution.min(0.25 * smallest / rho).max(1e-6);
            budget.eta = budget.eta.min(1e-2 * smallest);
        }
        let v = intersection_empty(sets, &translations, Radius::Finite(rho), Method::GridOracle, &budget)?;
        let found = v.is_empty();
        notes.push(format!("eps {}: rho = {rho:.3e}, pairing {pairing:.3e} > {:.3e}", cert.eps, (beta + xi) * rho));
        records.push(EpsilonRecord {
            eps: cert.eps,
            found,
            k: Some(cert.k),
            rho: Some(rho),
            bases: cert.points.clone(),
            shifts,
            shift_norm: Some(na),
            shift_bound: Some(alpha * rho),
            emptiness: Some(v.clone()),
            inconclusive_calls: usize::from(v.outcome == crate::geometry::Emptiness::Inconclusive),
            oracle_calls: 1,
            note: if found { String::new() } else { "grid oracle did not confirm emptiness".into() },
        });
    }
    let outcome = if records.iter().all(|r| r.found) { Outcome::Certified } else { Outcome::Inconclusive };
    Ok(PropertyVerdict { outcome, per_epsilon: records, notes })
}

/// Estimated `inf ‖Σ x_i*‖` over unit normal tuples at base points near the
/// sequence tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualInfimum {
    pub eps: f64,
    /// `+inf` when no nonzero normal tuple exists at the sampled bases.
    pub infimum: f64,
    pub k: Option<u64>,
    pub bases: Vec<Point>,
    pub duals: Vec<DualVector>,
}

pub fn dual_infimum(sets: &[SetExpr], seq: &SequenceSpec, eps: f64, kind: ConeKind, params: &SeparationSearchParams) -> Result<DualInfimum> {
    check_inputs(sets, seq)?;
    let mut out = DualInfimum { eps, infimum: f64::INFINITY, k: None, bases: vec![], duals: vec![] };
    let mut scanned = 0;
    let mut unsupported = 0;
    for k in k_schedule(eps, params.k_budget).into_iter().take(params.max_k_steps) {
        let x = seq.eval(k)?.remove(0);
        let scan = scan_k(sets, &x, eps, kind, params, f64::NEG_INFINITY)?;
        unsupported += scan.unsupported;
        scanned += 1;
        if let Some((v, bases, duals)) = scan.best {
            if v < out.infimum {
                out = DualInfimum { eps, infimum: v, k: Some(k), bases, duals };
            }
        }
    }
    if scanned > 0 && out.k.is_none() && unsupported > 0 {
        return Err(Error::UnsupportedCapability("no cone model at any candidate base point".into()));
    }
    Ok(out)
}

/// Dual characterization of transversality at `ε`: Falsified when a unit
/// normal tuple with `‖Σ x_i*‖ < ε` is found near the tail, Certified when the
/// estimated infimum stays at or above ε.
pub fn transversality_dual_check(sets: &[SetExpr], seq: &SequenceSpec, eps: f64, params: &SeparationSearchParams) -> Result<PropertyVerdict> {
    let inf = dual_infimum(sets, seq, eps, ConeKind::Frechet, params)?;
    let outcome = if inf.infimum < eps { Outcome::Falsified } else { Outcome::Certified };
    let rec = EpsilonRecord {
        eps,
        found: outcome == Outcome::Falsified,
        k: inf.k,
        rho: None,
        bases: inf.bases.clone(),
        shifts: vec![],
        shift_norm: None,
        shift_bound: None,
        emptiness: None,
        inconclusive_calls: 0,
        oracle_calls: 0,
        note: String::new(),
    };
    let notes = vec![format!("estimated infimum of the normalized dual sum: {}", inf.infimum)];
    Ok(PropertyVerdict { outcome, per_epsilon: vec![rec], notes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Face, Relation};
    use crate::norms::{BaseNorm, DualConvention, ProductNorm};

    fn e15() -> Vec<SetExpr> {
        vec![
            SetExpr::hyperbolic(Relation::Ge, 1.0, vec![Face::strict(vec![-1.0, 0.0], 0.0)]),
            SetExpr::halfspace(vec![0.0, 1.0], 0.0),
        ]
    }

    fn mirror() -> NormSpec {
        NormSpec::new(BaseNorm::LInf, ProductNorm::MaxProduct, DualConvention::MirrorBase)
    }

    /// `x_1* = (-1/(2t^2), -1/2)`, `x_2* = (0, 1/2)` at `x_1 = (t, 1/t)`, `x_2 = (t, 0)`.
    fn closed_form_cert(t: f64, k: u64, eps: f64) -> SeparationCertificate {
        SeparationCertificate {
            k,
            points: vec![Point::from([t, 1.0 / t]), Point::from([t, 0.0])],
            points_prime: None,
            shifts: None,
            x0: None,
            duals: vec![Point::from([-1.0 / (2.0 * t * t), -0.5]), Point::from([0.0, 0.5])],
            eps,
            beta: None,
            tau: None,
            cone_kind: ConeKind::Frechet,
            norm: mirror(),
        }
    }

    #[test]
    fn closed_form_certificate_verifies() {
        let seq = SequenceSpec::single(&["k", "1/(2*k)"]).unwrap();
        let c = closed_form_cert(200.0, 200, 0.01);
        let r = verify_certificate(&c, &e15(), &seq).unwrap();
        assert!(r.valid, "{:?}", r.violations);
        assert!((r.dual_sum - 1.0 / 80_000.0).abs() < 1e-15);

        let mut doubled = c.clone();
        doubled.duals = doubled.duals.iter().map(|v| v.scale(2.0)).collect();
        let r = verify_certificate(&doubled, &e15(), &seq).unwrap();
        assert!(!r.valid && r.violations.iter().any(|v| v.contains("expected 1")));

        let mut tangential = c.clone();
        tangential.duals[1] = Point::from([1.0, 0.0]);
        let r = verify_certificate(&tangential, &e15(), &seq).unwrap();
        assert!(r.violations.iter().any(|v| v.contains("normal cone at point 1")));
    }

    #[test]
    fn small_t_certificate_fails_only_index_and_distance() {
        let seq = SequenceSpec::single(&["k", "1/(2*k)"]).unwrap();
        let r = verify_certificate(&closed_form_cert(10.0, 10, 0.01), &e15(), &seq).unwrap();
        assert_eq!(r.violations.len(), 2, "{:?}", r.violations);
        assert!(r.violations[0].contains("does not exceed 1/eps"));
        assert!(r.violations[1].contains("base points"));
        assert!((r.dual_sum - 0.005).abs() < 1e-15);
    }

    #[test]
    fn search_finds_e15_certificate() {
        let seq = SequenceSpec::single(&["k", "0"]).unwrap();
        let c = search_certificate(&e15(), &seq, 0.01, ConeKind::Frechet, &SeparationSearchParams::default())
            .unwrap()
            .expect("certificate");
        let r = verify_certificate(&c, &e15(), &seq).unwrap();
        assert!(r.valid);
        let t = c.points[0][0];
        assert!(r.dual_sum < 0.01);
        // canonical dual: the optimum is close to 1/(2t^2)
        assert!(r.dual_sum <= 1.0 / (2.0 * t * t) * 1.01, "{} vs {}", r.dual_sum, 1.0 / (2.0 * t * t));
    }

    #[test]
    fn crossing_halfspaces_have_no_certificate() {
        let sets = vec![SetExpr::halfspace(vec![1.0, 0.0], 0.0), SetExpr::halfspace(vec![0.0, 1.0], 0.0)];
        let seq = SequenceSpec::single(&["0", "0"]).unwrap();
        let p = SeparationSearchParams::default();
        assert!(search_certificate(&sets, &seq, 0.1, ConeKind::Frechet, &p).unwrap().is_none());
        let inf = dual_infimum(&sets, &seq, 0.1, ConeKind::Frechet, &p).unwrap();
        assert!((inf.infimum - 1.0).abs() < 1e-9, "{}", inf.infimum);
        assert_eq!(transversality_dual_check(&sets, &seq, 0.1, &p).unwrap().outcome, Outcome::Certified);
        let one = transversality_dual_check(&sets[..1], &seq, 0.1, &p).unwrap();
        assert_eq!(one.outcome, Outcome::Certified);
    }

    #[test]
    fn e15_is_not_dually_transversal() {
        let seq = SequenceSpec::single(&["k", "0"]).unwrap();
        let v = transversality_dual_check(&e15(), &seq, 0.01, &SeparationSearchParams::default()).unwrap();
        assert_eq!(v.outcome, Outcome::Falsified);
    }

    #[test]
    fn certificates_give_stationarity() {
        let seq = SequenceSpec::single(&["k", "0"]).unwrap();
        let p = SeparationSearchParams { beta: Some(0.01), ..Default::default() };
        let certs: Vec<_> = [0.1, 0.01]
            .iter()
            .map(|e| search_certificate(&e15(), &seq, *e, ConeKind::Frechet, &p).unwrap().unwrap())
            .collect();
        let v = stationarity_from_certificates(&e15(), &seq, &certs, 0.02, &ConstructionParams::default()).unwrap();
        assert_eq!(v.outcome, Outcome::Certified, "{v:#?}");
        for r in &v.per_epsilon {
            assert!(r.shift_norm.unwrap() < r.shift_bound.unwrap());
        }
        let mut bad = certs[0].clone();
        bad.beta = Some(0.01);
        bad.duals = vec![Point::from([0.5, 0.0]), Point::from([0.5, 0.0])];
        assert!(matches!(
            stationarity_from_certificates(&e15(), &seq, &[bad], 0.02, &ConstructionParams::default()),
            Err(Error::ConstructionFailed(_))
        ));
    }
}
