//! Fréchet and Clarke normal cones of catalog sets.
//!
//! Sampled tests can only falsify; `Certified` comes from the analytic cone
//! model of the set at the base point.

use crate::error::{Error, Result};
use crate::geometry::{proj, Point, Relation, SetExpr};
use crate::linalg::nnls;
use crate::optimization::ScalarFunction;
use crate::Outcome;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type DualVector = Point;

/// Tolerance used to decide which constraints are active at a base point.
const ACTIVE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum ConeKind {
    #[default]
    Frechet,
    Clarke,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ConeRepr {
    /// Conic hull of the generators (lines appear as `±v` pairs).
    Generators(Vec<DualVector>),
    Trivial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeModel {
    pub kind: ConeKind,
    pub dim: usize,
    pub repr: ConeRepr,
}

impl ConeModel {
    fn trivial(kind: ConeKind, dim: usize) -> Self {
        ConeModel { kind, dim, repr: ConeRepr::Trivial }
    }

    fn gens(kind: ConeKind, dim: usize, g: Vec<Vec<f64>>) -> Self {
        let g: Vec<DualVector> = g.into_iter().filter(|v| v.iter().any(|x| *x != 0.0)).map(Point::from).collect();
        if g.is_empty() {
            ConeModel::trivial(kind, dim)
        } else {
            ConeModel { kind, dim, repr: ConeRepr::Generators(g) }
        }
    }

    pub fn generators(&self) -> &[DualVector] {
        match &self.repr {
            ConeRepr::Generators(g) => g,
            ConeRepr::Trivial => &[],
        }
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self.repr, ConeRepr::Trivial)
    }

    /// Distance (Euclidean) from `v` to the cone.
    pub fn distance(&self, v: &[f64]) -> f64 {
        let gens: Vec<Vec<f64>> = self.generators().iter().map(|g| g.coords().to_vec()).collect();
        nnls(&gens, v).1
    }

    /// Membership with a tolerance relative to `|v|`.
    pub fn contains(&self, v: &DualVector, tol: f64) -> bool {
        v.dim() == self.dim && self.distance(v.coords()) <= tol * (1.0 + v.norm2())
    }

    /// Product of cones, used for product sets.
    fn product(kind: ConeKind, parts: &[ConeModel]) -> ConeModel {
        let dim: usize = parts.iter().map(|c| c.dim).sum();
        let mut gens = Vec::new();
        let mut off = 0;
        for c in parts {
            for g in c.generators() {
                let mut v = vec![0.0; dim];
                v[off..off + c.dim].copy_from_slice(g.coords());
                gens.push(v);
            }
            off += c.dim;
        }
        ConeModel::gens(kind, dim, gens)
    }
}

/// Fréchet (or Clarke) normal cone at a regular point of the epigraph,
/// or at the kinks the function catalog knows about.
fn epi_cone(f: &ScalarFunction, x: f64, kind: ConeKind) -> Result<Vec<Vec<f64>>> {
    if let Some(d) = f.derivative(x) {
        return Ok(vec![vec![d, -1.0]]);
    }
    if kind == ConeKind::Clarke {
        if let Some((l, r)) = f.one_sided(x) {
            // convex hull of the limiting normals from both sides
            return Ok(vec![vec![l, -1.0], vec![r, -1.0]]);
        }
    }
    match f.epi_kink_generators(x) {
        Some(g) => Ok(g.into_iter().map(|v| v.to_vec()).collect()),
        None => Err(Error::UnsupportedCapability(format!("no normal cone model for the epigraph at x = {x}"))),
    }
}

/// Exact normal cone model of a catalog set at `base` (assumed in the set).
pub fn cone_model(set: &SetExpr, base: &Point, kind: ConeKind) -> Result<ConeModel> {
    crate::error::check_dim(set.dim(), base.dim())?;
    model(set, base.coords(), kind)
}

fn model(set: &SetExpr, p: &[f64], kind: ConeKind) -> Result<ConeModel> {
    let dim = set.dim();
    let scale = 1.0 + p.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = ACTIVE_TOL * scale;
    Ok(match set {
        SetExpr::Halfspace { a, b, .. } => {
            let v: f64 = a.iter().zip(p).map(|(x, y)| x * y).sum();
            if (v - b).abs() <= tol {
                ConeModel::gens(kind, dim, vec![a.clone()])
            } else {
                ConeModel::trivial(kind, dim)
            }
        }
        SetExpr::Ball { center, radius, .. } => {
            let d: Vec<f64> = p.iter().zip(center.coords()).map(|(x, c)| x - c).collect();
            let n = d.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (n - radius).abs() <= tol {
                ConeModel::gens(kind, dim, vec![d])
            } else {
                ConeModel::trivial(kind, dim)
            }
        }
        SetExpr::Polyhedron { faces, .. } => {
            let g = faces.iter().filter(|f| f.value(p).abs() <= tol).map(|f| f.a.clone()).collect();
            ConeModel::gens(kind, dim, g)
        }
        SetExpr::PolynomialRegion { poly, relation, value, side, .. } => {
            let mut g: Vec<Vec<f64>> = side.iter().filter(|f| f.value(p).abs() <= tol).map(|f| f.a.clone()).collect();
            let v = poly.eval(p);
            if (v - value).abs() <= tol * (1.0 + value.abs()) {
                let grad = poly.gradient(p);
                let gn = grad.iter().map(|x| x * x).sum::<f64>().sqrt();
                if gn <= 1e-9 * scale {
                    return Err(Error::UnsupportedCapability("nonsmooth boundary point of a polynomial region".into()));
                }
                let sign = if matches!(relation, Relation::Le | Relation::Lt) { 1.0 } else { -1.0 };
                g.push(grad.iter().map(|x| sign * x).collect());
            }
            ConeModel::gens(kind, dim, g)
        }
        SetExpr::Epigraph { f } => {
            let fx = f.eval(p[0]);
            if p[1] > fx + tol {
                ConeModel::trivial(kind, dim)
            } else {
                ConeModel::gens(kind, dim, epi_cone(f, p[0], kind)?)
            }
        }
        SetExpr::Graph { f, .. } => match f.derivative(p[0]) {
            Some(d) => ConeModel::gens(kind, dim, vec![vec![d, -1.0], vec![-d, 1.0]]),
            None => return Err(Error::UnsupportedCapability(format!("graph is not smooth at x = {}", p[0]))),
        },
        SetExpr::ProductWithRay { base, level } => {
            let n = base.dim();
            let bc = model(base, &p[..n], kind)?;
            let ray = if p[n] >= level - tol {
                ConeModel::gens(kind, 1, vec![vec![1.0]])
            } else {
                ConeModel::trivial(kind, 1)
            };
            ConeModel::product(kind, &[bc, ray])
        }
        SetExpr::Translate { base, shift } => {
            let q: Vec<f64> = p.iter().zip(shift.coords()).map(|(x, s)| x - s).collect();
            model(base, &q, kind)?
        }
        SetExpr::Product { factors } => {
            let mut parts = Vec::new();
            let mut off = 0;
            for f in factors {
                let n = f.dim();
                parts.push(model(f, &p[off..off + n], kind)?);
                off += n;
            }
            ConeModel::product(kind, &parts)
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConeTestParams {
    /// Decreasing radii of the sampled balls.
    pub radii: Vec<f64>,
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for ConeTestParams {
    fn default() -> Self {
        ConeTestParams { radii: (1..=6).map(|i| 10f64.powi(-i)).collect(), samples: 200, tol: 1e-3, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeVerdict {
    pub outcome: Outcome,
    /// `(radius, estimate)` per sampled radius.
    pub estimates: Vec<(f64, f64)>,
    /// Point of the set realising the last estimate when falsified.
    pub witness: Option<Point>,
    pub note: String,
}

fn unit_ball_sample(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r2: f64 = v.iter().map(|x| x * x).sum();
        if r2 <= 1.0 && r2 > 1e-12 {
            return v;
        }
    }
}

/// Points of `set` within distance `r` of `base`: random points that happen to
/// lie in the set, and projections of random points (boundary samples).
fn local_points(set: &SetExpr, base: &[f64], r: f64, samples: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = base.len();
    let mut out = Vec::new();
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[i] = s;
            dirs.push(e);
        }
    }
    while dirs.len() < samples {
        dirs.push(unit_ball_sample(rng, n));
    }
    for u in dirs {
        let q: Vec<f64> = base.iter().zip(&u).map(|(b, x)| b + r * x).collect();
        if set.holds(&q, 0.0) {
            out.push(q.clone());
        }
        if let Ok(pq) = proj(set, &q, 0.0) {
            let d = pq.iter().zip(base).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            if d > 0.0 && d <= r * (1.0 + 1e-9) {
                out.push(pq);
            }
        }
    }
    out
}

fn require_member(set: &SetExpr, base: &Point) -> Result<()> {
    let scale = 1.0 + base.coords().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if !set.contains(base, 1e-9 * scale)? {
        return Err(Error::BaseNotInSet);
    }
    Ok(())
}

/// Sampled limsup test of `cand ∈ N^F_set(base)`.
pub fn frechet_normal_test(set: &SetExpr, base: &Point, cand: &DualVector, params: &ConeTestParams) -> Result<ConeVerdict> {
    crate::error::check_dim(set.dim(), cand.dim())?;
    require_member(set, base)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let b = base.coords();
    let cn = cand.norm2();
    let mut estimates = Vec::new();
    let mut witness = None;
    let mut always_above = !params.radii.is_empty();
    for &r in &params.radii {
        let mut best = f64::NEG_INFINITY;
        let mut arg = None;
        for q in local_points(set, b, r, params.samples, &mut rng) {
            let d: Vec<f64> = q.iter().zip(b).map(|(x, y)| x - y).collect();
            let nd = d.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nd == 0.0 {
                continue;
            }
            let ratio = d.iter().zip(cand.coords()).map(|(x, y)| x * y).sum::<f64>() / (nd * cn.max(1e-300));
            if ratio > best {
                best = ratio;
                arg = Some(q);
            }
        }
        estimates.push((r, best));
        if best <= params.tol {
            always_above = false;
        } else {
            witness = arg.map(Point::from);
        }
    }
    if always_above {
        return Ok(ConeVerdict { outcome: Outcome::Falsified, estimates, witness, note: "sampled ratio stays positive".into() });
    }
    let (outcome, note) = match model(set, b, ConeKind::Frechet) {
        Ok(m) if m.contains(cand, 1e-9) => (Outcome::Certified, "analytic cone model".to_string()),
        Ok(_) => (Outcome::Falsified, "outside the analytic cone model".to_string()),
        Err(e) => (Outcome::Inconclusive, format!("sampling consistent; {e}")),
    };
    Ok(ConeVerdict { outcome, estimates, witness: None, note })
}

/// Tests `dir ∈ T^C_set(base)` by sampling base sequences and step sizes.
pub fn clarke_tangent_test(set: &SetExpr, base: &Point, dir: &Point, params: &ConeTestParams) -> Result<ConeVerdict> {
    crate::error::check_dim(set.dim(), dir.dim())?;
    require_member(set, base)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let b = base.coords();
    let dn = dir.norm2().max(1e-300);
    let mut estimates = Vec::new();
    let mut always_above = !params.radii.is_empty();
    let mut witness = None;
    for &r in &params.radii {
        // base points x_k near `base`, step t = r
        let mut bases = vec![b.to_vec()];
        bases.extend(local_points(set, b, r, params.samples.min(20), &mut rng));
        let mut worst = 0.0f64;
        let mut arg = None;
        for x in bases {
            let q: Vec<f64> = x.iter().zip(dir.coords()).map(|(a, d)| a + r * d).collect();
            let pq = proj(set, &q, 0.0)?;
            let gap = pq.iter().zip(&q).map(|(a, c)| (a - c).powi(2)).sum::<f64>().sqrt() / (r * dn);
            if gap > worst {
                worst = gap;
                arg = Some(x);
            }
        }
        estimates.push((r, worst));
        if worst <= params.tol {
            always_above = false;
        } else {
            witness = arg.map(Point::from);
        }
    }
    if always_above {
        return Ok(ConeVerdict { outcome: Outcome::Falsified, estimates, witness, note: "step gap stays positive".into() });
    }
    // T^C is the polar of N^C
    let (outcome, note) = match model(set, b, ConeKind::Clarke) {
        Ok(m) => {
            let polar = m.generators().iter().all(|g| g.dot(dir) <= 1e-9 * g.norm2() * dn);
            if polar {
                (Outcome::Certified, "polar of the analytic Clarke normal cone".to_string())
            } else {
                (Outcome::Falsified, "pairs positively with a Clarke normal".to_string())
            }
        }
        Err(e) => (Outcome::Inconclusive, format!("sampling consistent; {e}")),
    };
    Ok(ConeVerdict { outcome, estimates, witness: None, note })
}

/// `cand ∈ ∂^F f(x)` through `(cand, -1) ∈ N^F_{epi f}(x, f(x))`.
pub fn frechet_subdiff_test(f: &ScalarFunction, x: f64, cand: f64, params: &ConeTestParams) -> Result<ConeVerdict> {
    let fx = f.eval(x);
    if !fx.is_finite() {
        return Err(Error::InfiniteValueAtBase);
    }
    let epi = SetExpr::Epigraph { f: f.clone() };
    frechet_normal_test(&epi, &Point::from([x, fx]), &Point::from([cand, -1.0]), params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Face;

    fn lower() -> SetExpr {
        SetExpr::halfspace(vec![0.0, 1.0], 0.0)
    }

    fn e15_first() -> SetExpr {
        SetExpr::hyperbolic(Relation::Ge, 1.0, vec![Face::strict(vec![-1.0, 0.0], 0.0)])
    }

    #[test]
    fn frechet_examples() {
        let p = ConeTestParams::default();
        let base = Point::from([10.0, 0.0]);
        let v = frechet_normal_test(&lower(), &base, &Point::from([0.0, 1.0]), &p).unwrap();
        assert_eq!(v.outcome, Outcome::Certified);
        let v = frechet_normal_test(&lower(), &base, &Point::from([1.0, 0.0]), &p).unwrap();
        assert_eq!(v.outcome, Outcome::Falsified);
        assert!(v.witness.is_some());
        let v = frechet_normal_test(&e15_first(), &Point::from([10.0, 0.1]), &Point::from([-1.0 / 200.0, -0.5]), &p).unwrap();
        assert_eq!(v.outcome, Outcome::Certified, "{v:?}");
        assert!(matches!(
            frechet_normal_test(&lower(), &Point::from([0.0, 1.0]), &Point::from([0.0, 1.0]), &p),
            Err(Error::BaseNotInSet)
        ));
    }

    #[test]
    fn models() {
        let m = cone_model(&lower(), &Point::from([3.0, 0.0]), ConeKind::Frechet).unwrap();
        assert_eq!(m.generators(), &[Point::from([0.0, 1.0])]);
        let epi = SetExpr::Epigraph { f: ScalarFunction::Reciprocal };
        let m = cone_model(&epi, &Point::from([4.0, 0.25]), ConeKind::Frechet).unwrap();
        let g = &m.generators()[0];
        assert!((g.coords()[0] + 1.0 / 16.0).abs() < 1e-6 && g.coords()[1] == -1.0);
        let ball = SetExpr::ball(Point::zeros(2), 1.0);
        assert!(cone_model(&ball, &Point::from([0.2, 0.1]), ConeKind::Clarke).unwrap().is_trivial());
        let cross = SetExpr::hyperbolic(Relation::Le, 0.0, vec![]);
        assert!(matches!(cone_model(&cross, &Point::zeros(2), ConeKind::Frechet), Err(Error::UnsupportedCapability(_))));
    }

    #[test]
    fn clarke_tangents() {
        let p = ConeTestParams::default();
        let o = Point::zeros(2);
        assert_eq!(clarke_tangent_test(&lower(), &o, &Point::from([1.0, 0.0]), &p).unwrap().outcome, Outcome::Certified);
        assert_eq!(clarke_tangent_test(&lower(), &o, &Point::from([0.0, 1.0]), &p).unwrap().outcome, Outcome::Falsified);
        let v = clarke_tangent_test(&e15_first(), &Point::from([1.0, 1.0]), &Point::from([1.0, -1.0]), &p).unwrap();
        assert_eq!(v.outcome, Outcome::Certified, "{v:?}");
    }

    #[test]
    fn subdifferentials() {
        let p = ConeTestParams::default();
        assert_eq!(frechet_subdiff_test(&ScalarFunction::Reciprocal, 10.0, -0.01, &p).unwrap().outcome, Outcome::Certified);
        let abs = ScalarFunction::AbsPower { scale: 1.0, p: 1.0 };
        assert_eq!(frechet_subdiff_test(&abs, 0.0, 0.0, &p).unwrap().outcome, Outcome::Certified);
        assert_eq!(frechet_subdiff_test(&abs, 0.0, 2.0, &p).unwrap().outcome, Outcome::Falsified);
        assert!(matches!(frechet_subdiff_test(&ScalarFunction::Reciprocal, 0.0, 0.0, &p), Err(Error::InfiniteValueAtBase)));
    }

    #[test]
    fn polyhedral_cones_coincide() {
        let poly = SetExpr::Polyhedron { dim: 2, faces: vec![Face::new(vec![1.0, 0.0], 0.0), Face::new(vec![0.0, 1.0], 0.0)] };
        let o = Point::zeros(2);
        let f = cone_model(&poly, &o, ConeKind::Frechet).unwrap();
        let c = cone_model(&poly, &o, ConeKind::Clarke).unwrap();
        assert_eq!(f.generators(), c.generators());
    }
}
