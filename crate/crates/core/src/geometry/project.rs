//! Euclidean projections onto catalog sets.

use super::set::{Domain, Face, Polynomial, Relation, SetExpr};
use super::Point;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{min_1d, solve};
use crate::optimization::ScalarFunction;

/// Depth used when projecting onto a strict constraint, so that the result
/// passes membership with margin `tol`.
fn strict_depth(tol: f64, scale: f64) -> f64 {
    1.5 * tol + 1e-13 * scale.max(1.0)
}

/// Euclidean projection of `p` onto `set`.
///
/// Exact for halfspaces, balls and polyhedra (and their translates and
/// products). Curved sets use one-dimensional searches or an iterative
/// level-set method. For strict constraints the result sits `1.5 tol` inside
/// so that it passes [`SetExpr::contains`] with the same `tol`.
pub fn project(set: &SetExpr, p: &Point, tol: f64) -> Result<Point> {
    check_dim(set.dim(), p.dim())?;
    let q = proj(set, p.coords(), tol)?;
    Point::new(q).map_err(|_| Error::NonConvergence("projection produced a non-finite point".into()))
}

/// Euclidean distance from `p` to `set` via [`project`].
pub fn distance(set: &SetExpr, p: &Point, tol: f64) -> Result<f64> {
    Ok(project(set, p, tol)?.dist2(p))
}

pub(crate) fn proj(set: &SetExpr, p: &[f64], tol: f64) -> Result<Vec<f64>> {
    match set {
        SetExpr::Halfspace { a, b, strict } => {
            let f = Face { a: a.clone(), b: *b, strict: *strict };
            Ok(proj_face(&f, p, tol))
        }
        SetExpr::Ball { center, radius, open } => {
            let r = if *open { radius - strict_depth(tol, *radius) } else { *radius };
            let d: Vec<f64> = p.iter().zip(center.coords()).map(|(x, c)| x - c).collect();
            let n = d.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n <= r {
                Ok(p.to_vec())
            } else {
                Ok(d.iter().zip(center.coords()).map(|(x, c)| c + x * r / n).collect())
            }
        }
        SetExpr::Polyhedron { faces, .. } => proj_polyhedron(faces, p, tol),
        SetExpr::PolynomialRegion { dim, poly, relation, value, side } => {
            proj_poly(set, *dim, poly, *relation, *value, side, p, tol)
        }
        SetExpr::Epigraph { f } => proj_epigraph(f, p, tol),
        SetExpr::ProductWithRay { base, level } => {
            let n = p.len() - 1;
            let mut q = proj(base, &p[..n], tol)?;
            q.push(p[n].min(*level));
            Ok(q)
        }
        SetExpr::Graph { f, domain } => proj_graph(f, domain, p),
        SetExpr::Translate { base, shift } => {
            let q: Vec<f64> = p.iter().zip(shift.coords()).map(|(x, s)| x - s).collect();
            let r = proj(base, &q, tol)?;
            Ok(r.iter().zip(shift.coords()).map(|(x, s)| x + s).collect())
        }
        SetExpr::Product { factors } => {
            let mut out = Vec::with_capacity(p.len());
            let mut off = 0;
            for f in factors {
                let d = f.dim();
                out.extend(proj(f, &p[off..off + d], tol)?);
                off += d;
            }
            Ok(out)
        }
    }
}

fn effective_b(f: &Face, tol: f64) -> f64 {
    if f.strict {
        let an = f.a.iter().map(|x| x * x).sum::<f64>().sqrt();
        f.b - strict_depth(tol, f.b.abs()) * an.max(1.0)
    } else {
        f.b
    }
}

fn proj_face(f: &Face, p: &[f64], tol: f64) -> Vec<f64> {
    let b = effective_b(f, tol);
    let v = f.value(p) - b;
    let an2: f64 = f.a.iter().map(|x| x * x).sum();
    if v <= 0.0 || an2 == 0.0 {
        return p.to_vec();
    }
    p.iter().zip(&f.a).map(|(x, a)| x - v * a / an2).collect()
}

/// Exact projection onto a polyhedron by enumerating candidate active sets
/// and keeping the nearest KKT point. Falls back to Dykstra's method when the
/// enumeration would be too large.
fn proj_polyhedron(faces: &[Face], p: &[f64], tol: f64) -> Result<Vec<f64>> {
    let bs: Vec<f64> = faces.iter().map(|f| effective_b(f, tol)).collect();
    let feasible = |q: &[f64]| faces.iter().zip(&bs).all(|(f, b)| f.value(q) - b <= 1e-12 * (1.0 + b.abs()));
    if feasible(p) {
        return Ok(p.to_vec());
    }
    let n = p.len();
    let m = faces.len();
    let limit = n.min(m);
    if m > 14 {
        return dykstra(faces, &bs, p);
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut subset = Vec::with_capacity(limit);
    enumerate_subsets(m, limit, 0, &mut subset, &mut |idx| {
        if idx.is_empty() {
            return;
        }
        let k = idx.len();
        let mut g = vec![0.0; k * k];
        let mut r = vec![0.0; k];
        for (i, &fi) in idx.iter().enumerate() {
            for (j, &fj) in idx.iter().enumerate() {
                g[i * k + j] = faces[fi].a.iter().zip(&faces[fj].a).map(|(x, y)| x * y).sum();
            }
            r[i] = faces[fi].value(p) - bs[fi];
        }
        let Some(lam) = solve(&g, &r, k) else { return };
        if lam.iter().any(|l| *l < -1e-12) {
            return;
        }
        let mut q = p.to_vec();
        for (i, &fi) in idx.iter().enumerate() {
            for (qj, aj) in q.iter_mut().zip(&faces[fi].a) {
                *qj -= lam[i] * aj;
            }
        }
        if !feasible(&q) {
            return;
        }
        let d: f64 = q.iter().zip(p).map(|(a, b)| (a - b).powi(2)).sum();
        if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
            best = Some((d, q));
        }
    });
    match best {
        Some((_, q)) => Ok(q),
        None => Err(Error::NonConvergence("polyhedron appears to be empty".into())),
    }
}

fn enumerate_subsets(m: usize, max: usize, start: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    f(cur);
    if cur.len() == max {
        return;
    }
    for i in start..m {
        cur.push(i);
        enumerate_subsets(m, max, i + 1, cur, f);
        cur.pop();
    }
}

fn dykstra(faces: &[Face], bs: &[f64], p: &[f64]) -> Result<Vec<f64>> {
    let m = faces.len();
    let mut x = p.to_vec();
    let mut incr = vec![vec![0.0; p.len()]; m];
    for _ in 0..20_000 {
        let prev = x.clone();
        for i in 0..m {
            let y: Vec<f64> = x.iter().zip(&incr[i]).map(|(a, b)| a + b).collect();
            let face = Face { a: faces[i].a.clone(), b: bs[i], strict: false };
            let q = proj_face(&face, &y, 0.0);
            incr[i] = y.iter().zip(&q).map(|(a, b)| a - b).collect();
            x = q;
        }
        let ch: f64 = x.iter().zip(&prev).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if ch < 1e-14 * (1.0 + x.iter().fold(0.0f64, |s, v| s.max(v.abs()))) {
            return Ok(x);
        }
    }
    Err(Error::NonConvergence("Dykstra iteration budget exhausted".into()))
}

#[allow(clippy::too_many_arguments)]
fn proj_poly(
    set: &SetExpr,
    dim: usize,
    poly: &Polynomial,
    rel: Relation,
    value: f64,
    side: &[Face],
    p: &[f64],
    tol: f64,
) -> Result<Vec<f64>> {
    if set.holds(p, tol) {
        return Ok(p.to_vec());
    }
    let sign = match rel {
        Relation::Le | Relation::Lt => 1.0,
        Relation::Ge | Relation::Gt => -1.0,
    };
    let scale = 1.0 + value.abs();
    let target = if rel.is_strict() { -strict_depth(tol, scale) } else { -(0.5 * tol).min(1e-9 * scale) - 1e-14 * scale };
    let g = |x: &[f64]| sign * (poly.eval(x) - value);
    let grad = |x: &[f64]| poly.gradient(x).into_iter().map(|v| sign * v).collect::<Vec<f64>>();
    let to_level = |mut q: Vec<f64>| -> Option<Vec<f64>> {
        for _ in 0..60 {
            let gv = g(&q) - target;
            if gv.abs() <= 1e-13 * scale && gv <= 0.0 {
                return Some(q);
            }
            let gr = grad(&q);
            let n2: f64 = gr.iter().map(|x| x * x).sum();
            if n2 == 0.0 || !n2.is_finite() {
                return None;
            }
            for (qi, gi) in q.iter_mut().zip(&gr) {
                *qi -= gv * gi / n2;
            }
        }
        (g(&q) <= target + 1e-10 * scale).then_some(q)
    };
    let dist = |q: &[f64]| q.iter().zip(p).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();

    let mut starts: Vec<Vec<f64>> = vec![p.to_vec()];
    for f in side {
        starts.push(proj_face(f, p, tol));
    }
    if dim == 2 {
        let gr = grad(p);
        let n = gr.iter().map(|x| x * x).sum::<f64>().sqrt();
        let r = if n > 0.0 { (g(p) / n).abs().max(1e-6) } else { 1.0 };
        for k in 0..8 {
            let th = k as f64 * std::f64::consts::FRAC_PI_4;
            starts.push(vec![p[0] + r * th.cos(), p[1] + r * th.sin()]);
        }
    }

    let mut best: Option<(f64, Vec<f64>)> = None;
    for s in starts {
        let Some(mut q) = to_level(s) else { continue };
        for _ in 0..400 {
            let gr = grad(&q);
            let n = gr.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n == 0.0 {
                break;
            }
            let d: Vec<f64> = p.iter().zip(&q).map(|(a, b)| a - b).collect();
            let dn: f64 = d.iter().zip(&gr).map(|(x, y)| x * y / n).sum();
            let tang: Vec<f64> = d.iter().zip(&gr).map(|(x, y)| x - dn * y / n).collect();
            let tn = tang.iter().map(|x| x * x).sum::<f64>().sqrt();
            if tn <= 1e-14 * (1.0 + dist(&q)) {
                break;
            }
            let cur = dist(&q);
            let mut step = 1.0;
            let mut moved = false;
            while step > 1e-6 {
                let trial: Vec<f64> = q.iter().zip(&tang).map(|(a, t)| a + step * t).collect();
                if let Some(r) = to_level(trial) {
                    if dist(&r) < cur {
                        q = r;
                        moved = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if set.holds(&q, tol) {
            let d = dist(&q);
            if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
                best = Some((d, q));
            }
        }
    }
    if !side.is_empty() {
        // the nearest point may sit on the side faces
        if let Ok(q) = proj_polyhedron(side, p, tol) {
            if set.holds(&q, tol) {
                let d = dist(&q);
                if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
                    best = Some((d, q));
                }
            }
        }
    }
    if let Some((_, q)) = best {
        return Ok(q);
    }
    if dim == 2 {
        return ray_march(set, p, tol);
    }
    Err(Error::NonConvergence("level-set projection found no feasible point".into()))
}

/// First-hit search along rays from `p`; robust but slow, used as a fallback.
fn ray_march(set: &SetExpr, p: &[f64], tol: f64) -> Result<Vec<f64>> {
    let s0 = 1e-9 * (1.0 + p[0].abs().max(p[1].abs()));
    let smax = 1e7 * (1.0 + p[0].abs().max(p[1].abs()));
    let hit = |th: f64| -> Option<f64> {
        let (c, s) = (th.cos(), th.sin());
        let at = |r: f64| [p[0] + r * c, p[1] + r * s];
        let mut prev = 0.0;
        let mut r = s0;
        while r < smax {
            if set.holds(&at(r), tol) {
                let (mut lo, mut hi) = (prev, r);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if set.holds(&at(mid), tol) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                return Some(hi);
            }
            prev = r;
            r *= 1.1;
        }
        None
    };
    let n = 720;
    let mut best: Option<(f64, f64)> = None;
    for k in 0..n {
        let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        if let Some(r) = hit(th) {
            if best.map_or(true, |(_, br)| r < br) {
                best = Some((th, r));
            }
        }
    }
    let (th, _) = best.ok_or_else(|| Error::NonConvergence("no ray reaches the set".into()))?;
    let h = 2.0 * std::f64::consts::PI / n as f64;
    let (th, _) = crate::linalg::golden(|t| hit(t).unwrap_or(f64::INFINITY), th - h, th + h, 60);
    let r = hit(th).or_else(|| best.map(|b| b.1)).unwrap();
    let q = vec![p[0] + r * th.cos(), p[1] + r * th.sin()];
    if set.holds(&q, tol) {
        Ok(q)
    } else {
        let (th, r) = best.unwrap();
        Ok(vec![p[0] + r * th.cos(), p[1] + r * th.sin()])
    }
}

fn proj_epigraph(f: &ScalarFunction, p: &[f64], _tol: f64) -> Result<Vec<f64>> {
    let (px, py) = (p[0], p[1]);
    let fx = f.eval(px);
    if fx.is_finite() && py >= fx {
        return Ok(p.to_vec());
    }
    let phi = |x: f64| {
        let v = f.eval(x);
        if !v.is_finite() {
            return f64::INFINITY;
        }
        (x - px).powi(2) + (v - py).max(0.0).powi(2)
    };
    let mut w = if fx.is_finite() { (fx - py).abs() } else { 1.0 };
    let mut best = (px, f64::INFINITY);
    for _ in 0..60 {
        best = min_1d(phi, px - w, px + w, 4001);
        if best.1.is_finite() {
            break;
        }
        w *= 2.0;
    }
    if !best.1.is_finite() {
        return Err(Error::NonConvergence("epigraph has no finite point near the query".into()));
    }
    let x = best.0;
    Ok(vec![x, f.eval(x).max(py)])
}

fn proj_graph(f: &ScalarFunction, domain: &[Domain], p: &[f64]) -> Result<Vec<f64>> {
    let (px, py) = (p[0], p[1]);
    let in_dom = |x: f64| domain.iter().any(|d| d.contains(x));
    let phi = |x: f64| {
        if !in_dom(x) {
            return f64::INFINITY;
        }
        let v = f.eval(x);
        if !v.is_finite() {
            return f64::INFINITY;
        }
        (x - px).powi(2) + (v - py).powi(2)
    };
    let mut w = if in_dom(px) && f.eval(px).is_finite() { (f.eval(px) - py).abs().max(1e-12) } else { 1.0 };
    for _ in 0..60 {
        let mut best = (px, f64::INFINITY);
        for d in domain {
            let lo = (px - w).max(d.lo.map_or(f64::NEG_INFINITY, |l| l + 1e-15 * (1.0 + l.abs())));
            let hi = (px + w).min(d.hi.map_or(f64::INFINITY, |h| h - 1e-15 * (1.0 + h.abs())));
            if lo >= hi {
                continue;
            }
            let r = min_1d(phi, lo, hi, 4001);
            if r.1 < best.1 {
                best = r;
            }
        }
        if best.1.is_finite() {
            return Ok(vec![best.0, f.eval(best.0)]);
        }
        w *= 2.0;
    }
    Err(Error::NonConvergence("graph has no point near the query".into()))
}
