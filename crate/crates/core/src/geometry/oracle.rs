//! Emptiness of `(Omega_1 - s_1) ∩ ... ∩ (Omega_n - s_n) ∩ rho B` and the
//! set-family gap.

use super::project::proj;
use super::set::{Class, SetExpr};
use super::Point;
use crate::error::{check_dim, Error, Result};
use crate::interval::Interval;
use crate::linalg::nnls;
use crate::norms::BaseNorm;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Radius {
    Finite(f64),
    /// `rho = +inf`, searched up to the configured cap.
    Unbounded,
}

impl Radius {
    pub fn resolve(self, cap: f64) -> (f64, bool) {
        match self {
            Radius::Finite(r) if r <= cap => (r, false),
            Radius::Finite(_) => (cap, true),
            Radius::Unbounded => (cap, true),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    AlternatingProjections,
    GridOracle,
    /// Produced by catalog arguments in the checkers, never computed here.
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Emptiness {
    Empty,
    Nonempty,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmptinessVerdict {
    pub outcome: Emptiness,
    pub witness: Option<Point>,
    /// For `Empty`: a positive separation scale (leaf width when every box was
    /// pruned by interval arithmetic, otherwise the smallest membership
    /// violation seen at an unresolved lattice point).
    pub lower_bound: Option<f64>,
    pub method: Method,
    /// The search radius was clipped to the cap.
    pub capped: bool,
    /// `Empty` was obtained without any lattice-point decision.
    pub rigorous: bool,
    pub work: usize,
}

impl EmptinessVerdict {
    pub fn is_empty(&self) -> bool {
        self.outcome == Emptiness::Empty
    }

    pub fn is_nonempty(&self) -> bool {
        self.outcome == Emptiness::Nonempty
    }

    pub fn analytic_empty() -> Self {
        EmptinessVerdict {
            outcome: Emptiness::Empty,
            witness: None,
            lower_bound: None,
            method: Method::Analytic,
            capped: false,
            rigorous: true,
            work: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchBudget {
    /// Leaf width of the grid oracle relative to the radius.
    pub resolution: f64,
    /// Membership tolerance for witnesses; the ball is shrunk by the same
    /// relative amount for emptiness.
    pub eta: f64,
    pub max_boxes: usize,
    /// Iteration budget of alternating projections.
    pub max_iter: usize,
    /// Number of seeds for `family_gap`.
    pub seeds: usize,
    pub gap_iters: usize,
    pub seed: u64,
    pub radius_cap: f64,
    /// Norm of the search ball.
    pub norm: BaseNorm,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            resolution: 1e-3,
            eta: 1e-9,
            max_boxes: 4_000_000,
            max_iter: 20_000,
            seeds: 64,
            gap_iters: 60,
            seed: 0,
            radius_cap: 1e4,
            norm: BaseNorm::LInf,
        }
    }
}

/// Decides whether `⋂ (sets_i - shifts_i)` meets the ball of the given radius
/// centred at the origin.
pub fn intersection_empty(
    sets: &[SetExpr],
    shifts: &[Point],
    radius: Radius,
    method: Method,
    params: &SearchBudget,
) -> Result<EmptinessVerdict> {
    if sets.is_empty() {
        return Err(Error::InvalidInput("no sets".into()));
    }
    check_dim(sets.len(), shifts.len())?;
    let dim = sets[0].dim();
    for (s, v) in sets.iter().zip(shifts) {
        check_dim(dim, s.dim())?;
        check_dim(dim, v.dim())?;
    }
    if let Radius::Finite(r) = radius {
        if !(r > 0.0) {
            return Err(Error::InvalidInput("radius must be positive".into()));
        }
    }
    let translated: Vec<SetExpr> = sets.iter().zip(shifts).map(|(s, v)| s.shifted_back(v)).collect();
    let (r, capped) = radius.resolve(params.radius_cap);
    match method {
        Method::GridOracle => grid_oracle(&translated, r, capped, params),
        Method::AlternatingProjections => alternating(&translated, r, capped, params),
        Method::Analytic => Err(Error::MethodUnsupported("analytic verdicts come from catalog arguments".into())),
    }
}

fn witness_ok(sets: &[SetExpr], w: &[f64], r_eff: f64, params: &SearchBudget) -> bool {
    params.norm.norm(w) < r_eff && sets.iter().all(|s| s.holds(w, params.eta))
}

fn ball_class(norm: BaseNorm, b: &[Interval], r: f64) -> Class {
    let (lo, hi): (Vec<f64>, Vec<f64>) = b
        .iter()
        .map(|x| {
            let a = x.abs();
            (a.lo, a.hi)
        })
        .unzip();
    let nlo = norm.norm(&lo);
    let nhi = norm.norm(&hi);
    if nlo > r {
        Class::Outside
    } else if nhi <= r {
        Class::Inside
    } else {
        Class::Unknown
    }
}

/// `y` on the curve of a (translated) graph set at abscissa `x`.
fn curve_y(s: &SetExpr, x: f64) -> Option<f64> {
    match s {
        SetExpr::Graph { f, domain } => {
            if domain.iter().any(|d| d.contains(x)) {
                let v = f.eval(x);
                v.is_finite().then_some(v)
            } else {
                None
            }
        }
        SetExpr::Translate { base, shift } if matches!(**base, SetExpr::Graph { .. }) => {
            curve_y(base, x - shift[0]).map(|y| y + shift[1])
        }
        _ => None,
    }
}

fn leaf_candidates(sets: &[SetExpr], b: &[Interval]) -> Vec<Vec<f64>> {
    let c: Vec<f64> = b.iter().map(|x| x.mid()).collect();
    let mut out = vec![c.clone()];
    let n = b.len();
    for mask in 0..(1usize << n) {
        out.push((0..n).map(|i| if mask & (1 << i) != 0 { b[i].hi } else { b[i].lo }).collect());
    }
    let thin: Vec<&SetExpr> = sets.iter().filter(|s| s.is_thin()).collect();
    if n == 2 && !thin.is_empty() {
        if let Some(y) = curve_y(thin[0], c[0]) {
            out.push(vec![c[0], y]);
        }
        if thin.len() >= 2 {
            // crossing of the first two curves inside the leaf
            let h = |x: f64| Some(curve_y(thin[0], x)? - curve_y(thin[1], x)?);
            let (mut lo, mut hi) = (b[0].lo, b[0].hi);
            if let (Some(hl), Some(hh)) = (h(lo), h(hi)) {
                if hl == 0.0 {
                    out.push(vec![lo, curve_y(thin[0], lo).unwrap()]);
                } else if hl * hh <= 0.0 {
                    let sl = hl.signum();
                    for _ in 0..100 {
                        let m = 0.5 * (lo + hi);
                        match h(m) {
                            Some(v) if v.signum() == sl => lo = m,
                            Some(_) => hi = m,
                            None => break,
                        }
                    }
                    if let Some(y) = curve_y(thin[0], lo) {
                        out.push(vec![lo, y]);
                    }
                }
            }
        }
    }
    out
}

fn all_exact(sets: &[SetExpr]) -> bool {
    sets.iter().all(|s| s.capabilities().exact_projection)
}

fn grid_oracle(sets: &[SetExpr], r: f64, capped: bool, params: &SearchBudget) -> Result<EmptinessVerdict> {
    let n = sets[0].dim();
    if n > 4 {
        return Err(Error::DimensionUnsupported(n));
    }
    let r_eff = r * (1.0 - params.eta);
    let h = params.resolution * r;
    let exact = all_exact(sets);
    let mut queue: VecDeque<Vec<Interval>> = VecDeque::new();
    queue.push_back(vec![Interval::new(-r, r); n]);
    let mut work = 0usize;
    let mut rigorous = true;
    let mut min_violation = f64::INFINITY;
    let verdict = |outcome, witness: Option<Vec<f64>>, lb, rig, work| EmptinessVerdict {
        outcome,
        witness: witness.map(Point::from),
        lower_bound: lb,
        method: Method::GridOracle,
        capped,
        rigorous: rig,
        work,
    };

    while let Some(b) = queue.pop_front() {
        work += 1;
        if work > params.max_boxes {
            return Ok(verdict(Emptiness::Inconclusive, None, None, false, work));
        }
        let bc = ball_class(params.norm, &b, r);
        if bc == Class::Outside {
            continue;
        }
        let mut all_inside = bc == Class::Inside;
        let mut pruned = false;
        for s in sets {
            match s.classify(&b, params.eta) {
                Class::Outside => {
                    pruned = true;
                    break;
                }
                Class::Inside => {}
                Class::Unknown => all_inside = false,
            }
        }
        if pruned {
            continue;
        }
        let c: Vec<f64> = b.iter().map(|x| x.mid()).collect();
        if all_inside && witness_ok(sets, &c, r_eff, params) {
            return Ok(verdict(Emptiness::Nonempty, Some(c), None, true, work));
        }
        let (split, width) = b
            .iter()
            .enumerate()
            .map(|(i, x)| (i, x.width()))
            .fold((0, -1.0), |m, (i, w)| if w >= m.1 { (i, w) } else { m });
        if width <= h {
            for w in leaf_candidates(sets, &b) {
                if witness_ok(sets, &w, r_eff, params) {
                    return Ok(verdict(Emptiness::Nonempty, Some(w), None, true, work));
                }
            }
            if exact {
                let mut x = c.clone();
                for _ in 0..20 {
                    for s in sets {
                        x = proj(s, &x, 0.0)?;
                    }
                    if witness_ok(sets, &x, r_eff, params) {
                        return Ok(verdict(Emptiness::Nonempty, Some(x), None, true, work));
                    }
                }
            }
            rigorous = false;
            let v = sets.iter().map(|s| s.violation(&c)).fold(f64::NEG_INFINITY, f64::max);
            min_violation = min_violation.min(v.max(params.eta));
            continue;
        }
        let m = b[split].mid();
        let mut lower = b.clone();
        lower[split] = Interval::new(b[split].lo, m);
        let mut upper = b;
        upper[split] = Interval::new(m, upper[split].hi);
        queue.push_back(lower);
        queue.push_back(upper);
    }
    let lb = if rigorous { h } else { min_violation };
    Ok(verdict(Emptiness::Empty, None, Some(lb), rigorous, work))
}

/// Closed-form support function `sigma(y) = sup_{z in S} <y, z>` after
/// replacing `y` by the nearest vector where it is finite. Returns
/// `(y', sigma(y'))`, or `None` for sets without a closed form.
fn support(s: &SetExpr, y: &[f64]) -> Option<(Vec<f64>, f64)> {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    match s {
        SetExpr::Halfspace { a, b, .. } => {
            let a2 = dot(a, a);
            let lam = (dot(y, a) / a2).max(0.0);
            Some((a.iter().map(|x| lam * x).collect(), lam * b))
        }
        SetExpr::Ball { center, radius, .. } => {
            Some((y.to_vec(), dot(y, center.coords()) + radius * dot(y, y).sqrt()))
        }
        SetExpr::Polyhedron { dim, faces } => {
            if faces.is_empty() {
                return Some((vec![0.0; *dim], 0.0));
            }
            let gens: Vec<Vec<f64>> = faces.iter().map(|f| f.a.clone()).collect();
            let (lam, _) = nnls(&gens, y);
            let mut yp = vec![0.0; *dim];
            let mut sigma = 0.0;
            for (l, f) in lam.iter().zip(faces) {
                for (a, g) in yp.iter_mut().zip(&f.a) {
                    *a += l * g;
                }
                sigma += l * f.b;
            }
            Some((yp, sigma))
        }
        SetExpr::Translate { base, shift } => {
            let (yp, sg) = support(base, y)?;
            let extra = dot(&yp, shift.coords());
            Some((yp, sg + extra))
        }
        _ => None,
    }
}

/// Tries to prove emptiness from the residuals `y_i = x - P_i x`.
fn separation_certificate(sets: &[SetExpr], x: &[f64], pts: &[Vec<f64>], r_eff: f64, norm: BaseNorm) -> Option<f64> {
    let n = x.len();
    let mut total = vec![0.0; n];
    let mut sigma = 0.0;
    let mut mass = 0.0;
    for (s, p) in sets.iter().zip(pts) {
        let y: Vec<f64> = x.iter().zip(p).map(|(a, b)| a - b).collect();
        let (yp, sg) = support(s, &y)?;
        for (t, v) in total.iter_mut().zip(&yp) {
            *t += v;
        }
        sigma += sg;
        mass += yp.iter().map(|v| v * v).sum::<f64>().sqrt();
    }
    if mass == 0.0 {
        return None;
    }
    // every z in all sets has <total, z> <= sigma, every z in the ball has
    // <total, z> >= -r ||total||_*
    let margin = -r_eff * norm.dual_norm(&total) - sigma;
    (margin > 1e-12 * mass * (1.0 + r_eff)).then(|| margin / mass)
}

fn alternating(sets: &[SetExpr], r: f64, capped: bool, params: &SearchBudget) -> Result<EmptinessVerdict> {
    if let Some(i) = sets.iter().position(|s| s.is_thin()) {
        return Err(Error::MethodUnsupported(format!("set {i} has empty interior; use the grid oracle")));
    }
    let r_eff = r * (1.0 - params.eta);
    let n = sets[0].dim();
    let zero = vec![0.0; n];
    let verdict = |outcome, witness: Option<Vec<f64>>, lb, work| EmptinessVerdict {
        outcome,
        witness: witness.map(Point::from),
        lower_bound: lb,
        method: Method::AlternatingProjections,
        capped,
        rigorous: outcome == Emptiness::Empty,
        work,
    };
    let mut x = zero.clone();
    let k = sets.len() as f64 + 1.0;
    for it in 0..params.max_iter {
        let pts: Vec<Vec<f64>> = sets.iter().map(|s| proj(s, &x, params.eta * 0.1)).collect::<Result<_>>()?;
        let pb = params.norm.project_ball(&x, &zero, r_eff * (1.0 - 1e-12));
        if it % 5 == 0 {
            // a cyclic sweep lands in the intersection much faster than the average
            let mut z = x.clone();
            for _ in 0..3 {
                for s in sets {
                    z = proj(s, &z, params.eta * 0.1)?;
                }
                z = params.norm.project_ball(&z, &zero, r_eff * (1.0 - 1e-12));
                if witness_ok(sets, &z, r_eff, params) {
                    return Ok(verdict(Emptiness::Nonempty, Some(z), None, it));
                }
            }
            if let Some(lb) = separation_certificate(sets, &x, &pts, r_eff, params.norm) {
                return Ok(verdict(Emptiness::Empty, None, Some(lb), it));
            }
        }
        if witness_ok(sets, &x, r_eff, params) {
            return Ok(verdict(Emptiness::Nonempty, Some(x), None, it));
        }
        let mut next = pb;
        for p in &pts {
            for (a, b) in next.iter_mut().zip(p) {
                *a += b;
            }
        }
        for a in next.iter_mut() {
            *a /= k;
        }
        let change = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        x = next;
        if change <= 1e-16 * (1.0 + r) {
            let pts: Vec<Vec<f64>> = sets.iter().map(|s| proj(s, &x, params.eta * 0.1)).collect::<Result<_>>()?;
            if let Some(lb) = separation_certificate(sets, &x, &pts, r_eff, params.norm) {
                return Ok(verdict(Emptiness::Empty, None, Some(lb), it));
            }
            break;
        }
    }
    Ok(verdict(Emptiness::Inconclusive, None, None, params.max_iter))
}

/// Halton-type point in `[0,1)^d`; prefixes are nested, so more seeds never
/// lose earlier ones.
fn halton(i: usize, d: usize) -> Vec<f64> {
    const PRIMES: [usize; 4] = [2, 3, 5, 7];
    (0..d)
        .map(|k| {
            let b = PRIMES[k % 4];
            let (mut f, mut r, mut n) = (1.0, 0.0, i + 1);
            while n > 0 {
                f /= b as f64;
                r += f * (n % b) as f64;
                n /= b;
            }
            r
        })
        .collect()
}

/// Upper estimate of `inf diam{x_1..x_n}` over `x_i in sets_i ∩ region`,
/// where the region is the base-norm ball `B_radius(center)`.
pub fn family_gap(sets: &[SetExpr], center: &Point, radius: f64, budget: &SearchBudget) -> Result<f64> {
    if sets.len() < 2 {
        return Err(Error::InvalidInput("family_gap needs at least two sets".into()));
    }
    let dim = center.dim();
    for s in sets {
        check_dim(dim, s.dim())?;
    }
    let norm = budget.norm;
    let in_region = |p: &[f64]| {
        let d: Vec<f64> = p.iter().zip(center.coords()).map(|(a, b)| a - b).collect();
        norm.norm(&d) <= radius * (1.0 + 1e-12)
    };
    let mut found = vec![false; sets.len()];
    let mut best = f64::INFINITY;
    for i in 0..budget.seeds.max(1) {
        let z: Vec<f64> = if i == 0 {
            center.coords().to_vec()
        } else {
            halton(i, dim).iter().zip(center.coords()).map(|(u, c)| c + radius * (2.0 * u - 1.0)).collect()
        };
        let Ok(mut xs) = sets.iter().map(|s| proj(s, &z, 0.0)).collect::<Result<Vec<_>>>() else { continue };
        for _ in 0..budget.gap_iters {
            for (f, x) in found.iter_mut().zip(&xs) {
                if in_region(x) {
                    *f = true;
                }
            }
            if xs.iter().all(|x| in_region(x)) {
                let mut diam: f64 = 0.0;
                for a in 0..xs.len() {
                    for b in a + 1..xs.len() {
                        let d: Vec<f64> = xs[a].iter().zip(&xs[b]).map(|(p, q)| p - q).collect();
                        diam = diam.max(norm.norm(&d));
                    }
                }
                best = best.min(diam);
            }
            let mut m = vec![0.0; dim];
            for x in &xs {
                for (a, b) in m.iter_mut().zip(x) {
                    *a += b / xs.len() as f64;
                }
            }
            // keep the mean inside the region so the iterates stay admissible
            let m = norm.project_ball(&m, center.coords(), radius);
            match sets.iter().map(|s| proj(s, &m, 0.0)).collect::<Result<Vec<_>>>() {
                Ok(next) => xs = next,
                Err(_) => break,
            }
        }
    }
    if let Some(i) = found.iter().position(|f| !f) {
        return Err(Error::EmptyCatalogSet { index: i });
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::set::{Face, Relation};

    fn e15() -> Vec<SetExpr> {
        vec![
            SetExpr::hyperbolic(Relation::Ge, 1.0, vec![Face::strict(vec![-1.0, 0.0], 0.0)]),
            SetExpr::halfspace(vec![0.0, 1.0], 0.0),
        ]
    }

    #[test]
    fn halfspace_twice_nonempty() {
        let h = SetExpr::halfspace(vec![0.0, 1.0], 0.0);
        let z = Point::zeros(2);
        let v = intersection_empty(&[h.clone(), h.clone()], &[z.clone(), z], Radius::Finite(1.0), Method::GridOracle, &SearchBudget::default())
            .unwrap();
        assert!(v.is_nonempty());
        let w = v.witness.unwrap();
        assert_eq!(w, Point::from([0.0, -0.5]));
        assert!(h.contains(&w, 1e-9).unwrap());
    }

    #[test]
    fn e15_shifted_pair_is_empty() {
        let sets = e15();
        let shifts = vec![Point::from([10.0, 0.1 - 0.15]), Point::from([10.0, 0.0])];
        let v = intersection_empty(&sets, &shifts, Radius::Finite(1.0), Method::GridOracle, &SearchBudget::default()).unwrap();
        assert!(v.is_empty(), "{v:?}");
        assert!(v.rigorous);
        // without the shift the translated sets touch at the origin
        let shifts = vec![Point::from([10.0, 0.1]), Point::from([10.0, 0.0])];
        let v = intersection_empty(&sets, &shifts, Radius::Finite(1.0), Method::GridOracle, &SearchBudget::default()).unwrap();
        assert!(v.is_nonempty(), "{v:?}");
    }

    #[test]
    fn ap_certifies_parallel_halfspaces() {
        let sets = vec![SetExpr::halfspace(vec![0.0, 1.0], 0.0), SetExpr::halfspace(vec![0.0, -1.0], -1.0)];
        let z = vec![Point::zeros(2), Point::zeros(2)];
        let v = intersection_empty(&sets, &z, Radius::Finite(5.0), Method::AlternatingProjections, &SearchBudget::default()).unwrap();
        assert!(v.is_empty(), "{v:?}");
        let sets = vec![SetExpr::halfspace(vec![1.0, 0.0], 0.0), SetExpr::halfspace(vec![0.0, 1.0], 0.0)];
        let v = intersection_empty(&sets, &z, Radius::Finite(1.0), Method::AlternatingProjections, &SearchBudget::default()).unwrap();
        assert!(v.is_nonempty());
    }

    #[test]
    fn gap_examples() {
        let b = SearchBudget::default();
        let g = family_gap(&e15(), &Point::zeros(2), 50.0, &b).unwrap();
        assert!(g <= 1.0 / 40.0, "gap {g}");
        let h = SetExpr::halfspace(vec![0.0, 1.0], 0.0);
        assert_eq!(family_gap(&[h.clone(), h], &Point::zeros(2), 5.0, &b).unwrap(), 0.0);
        let up = SetExpr::halfspace(vec![0.0, -1.0], -1.0);
        let down = SetExpr::halfspace(vec![0.0, 1.0], 0.0);
        let g = family_gap(&[up, down], &Point::zeros(2), 5.0, &b).unwrap();
        assert!((g - 1.0).abs() < 1e-12);
        let far = SetExpr::ball(Point::from([100.0, 0.0]), 1.0);
        let near = SetExpr::ball(Point::zeros(2), 1.0);
        assert!(matches!(family_gap(&[near, far], &Point::zeros(2), 5.0, &b), Err(Error::EmptyCatalogSet { index: 1 })));
    }
}
