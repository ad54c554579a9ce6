use super::Point;
use crate::error::{check_dim, Error, Result};
use crate::interval::Interval;
use crate::optimization::ScalarFunction;
use serde::{Deserialize, Serialize};

/// `<a, x> <= b`, or `< b` when strict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Face {
    pub a: Vec<f64>,
    pub b: f64,
    #[serde(default)]
    pub strict: bool,
}

impl Face {
    pub fn new(a: Vec<f64>, b: f64) -> Self {
        Face { a, b, strict: false }
    }

    pub fn strict(a: Vec<f64>, b: f64) -> Self {
        Face { a, b, strict: true }
    }

    pub fn value(&self, p: &[f64]) -> f64 {
        self.a.iter().zip(p).map(|(a, x)| a * x).sum()
    }

    fn holds(&self, p: &[f64], tol: f64) -> bool {
        let v = self.value(p) - self.b;
        if self.strict {
            v < -tol
        } else {
            v <= tol
        }
    }

    fn enclose(&self, b: &[Interval]) -> Interval {
        self.a.iter().zip(b).fold(Interval::point(0.0), |acc, (a, x)| acc + x.scale(*a))
    }

    fn classify(&self, b: &[Interval], eta: f64) -> Class {
        let v = self.enclose(b);
        let (out, inside) = if self.strict {
            (v.lo >= self.b, v.hi < self.b - eta)
        } else {
            (v.lo > self.b, v.hi <= self.b)
        };
        Class::of(out, inside)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    pub coef: f64,
    pub exps: Vec<u32>,
}

/// A real polynomial as a sum of monomials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Polynomial {
    pub terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(terms: &[(f64, &[u32])]) -> Self {
        Polynomial { terms: terms.iter().map(|(c, e)| Monomial { coef: *c, exps: e.to_vec() }).collect() }
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coef * t.exps.iter().zip(p).map(|(e, x)| x.powi(*e as i32)).product::<f64>())
            .sum()
    }

    pub fn gradient(&self, p: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; p.len()];
        for t in &self.terms {
            for (i, gi) in g.iter_mut().enumerate() {
                let ei = t.exps.get(i).copied().unwrap_or(0);
                if ei == 0 {
                    continue;
                }
                let mut v = t.coef * ei as f64;
                for (j, (e, x)) in t.exps.iter().zip(p).enumerate() {
                    let e = if j == i { e - 1 } else { *e };
                    v *= x.powi(e as i32);
                }
                *gi += v;
            }
        }
        g
    }

    pub fn enclose(&self, b: &[Interval]) -> Interval {
        self.terms.iter().fold(Interval::point(0.0), |acc, t| {
            let m = t.exps.iter().zip(b).fold(Interval::point(1.0), |m, (e, x)| m * x.powi(*e));
            acc + m.scale(t.coef)
        })
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| t.exps.iter().sum::<u32>()).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">")]
    Gt,
}

impl Relation {
    pub fn is_strict(self) -> bool {
        matches!(self, Relation::Lt | Relation::Gt)
    }

    /// Signed violation `s` of `p rel value`: the relation holds iff `s <= 0`
    /// (or `s < 0` for strict relations).
    pub fn violation(self, p: f64, value: f64) -> f64 {
        match self {
            Relation::Le | Relation::Lt => p - value,
            Relation::Ge | Relation::Gt => value - p,
        }
    }
}

/// An open interval of parameters; `None` bounds are infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Domain {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

impl Domain {
    pub const ALL: Domain = Domain { lo: None, hi: None };

    pub fn contains(&self, x: f64) -> bool {
        self.lo.map_or(true, |l| x > l) && self.hi.map_or(true, |h| x < h)
    }

    fn lo(&self) -> f64 {
        self.lo.unwrap_or(f64::NEG_INFINITY)
    }

    fn hi(&self) -> f64 {
        self.hi.unwrap_or(f64::INFINITY)
    }

    /// `x != 0`.
    pub fn punctured() -> Vec<Domain> {
        vec![Domain { lo: None, hi: Some(0.0) }, Domain { lo: Some(0.0), hi: None }]
    }
}

/// Structured subsets of R^n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum SetExpr {
    Halfspace {
        a: Vec<f64>,
        b: f64,
        #[serde(default)]
        strict: bool,
    },
    /// Euclidean ball.
    Ball {
        center: Point,
        radius: f64,
        #[serde(default)]
        open: bool,
    },
    /// Intersection of faces; no faces means the whole space.
    Polyhedron { dim: usize, faces: Vec<Face> },
    /// `{x : poly(x) rel value}` intersected with the side faces.
    PolynomialRegion {
        dim: usize,
        poly: Polynomial,
        relation: Relation,
        value: f64,
        #[serde(default)]
        side: Vec<Face>,
    },
    /// `{(x, y) : y >= f(x)}` in R^2.
    Epigraph { f: ScalarFunction },
    /// `base x (-inf, level]`.
    ProductWithRay { base: Box<SetExpr>, level: f64 },
    /// `{(x, f(x)) : x in domain}` in R^2.
    Graph { f: ScalarFunction, domain: Vec<Domain> },
    /// `base + shift`.
    Translate { base: Box<SetExpr>, shift: Point },
    Product { factors: Vec<SetExpr> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Capabilities {
    pub membership: bool,
    pub exact_projection: bool,
    pub iterative_projection: bool,
    pub cone_model: bool,
}

/// Box classification used by the grid oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    /// No point of the box is in the set.
    Outside,
    /// Every point of the box is in the set (with the strict margin).
    Inside,
    Unknown,
}

impl Class {
    fn of(out: bool, inside: bool) -> Class {
        if out {
            Class::Outside
        } else if inside {
            Class::Inside
        } else {
            Class::Unknown
        }
    }

    fn and(self, o: Class) -> Class {
        match (self, o) {
            (Class::Outside, _) | (_, Class::Outside) => Class::Outside,
            (Class::Inside, Class::Inside) => Class::Inside,
            _ => Class::Unknown,
        }
    }
}

impl SetExpr {
    pub fn halfspace(a: Vec<f64>, b: f64) -> Self {
        SetExpr::Halfspace { a, b, strict: false }
    }

    pub fn ball(center: Point, radius: f64) -> Self {
        SetExpr::Ball { center, radius, open: false }
    }

    pub fn graph(f: ScalarFunction, domain: Vec<Domain>) -> Self {
        SetExpr::Graph { f, domain }
    }

    /// `{ (x1, x2) : x1 * x2 rel c }` plus side faces, the hyperbola family
    /// used throughout the catalog.
    pub fn hyperbolic(relation: Relation, c: f64, side: Vec<Face>) -> Self {
        SetExpr::PolynomialRegion { dim: 2, poly: Polynomial::new(&[(1.0, &[1, 1])]), relation, value: c, side }
    }

    /// `base + shift`, folding nested translations.
    pub fn translate(base: SetExpr, shift: Point) -> SetExpr {
        match base {
            SetExpr::Translate { base, shift: s0 } => {
                let s = &s0 + &shift;
                if s.is_zero() {
                    *base
                } else {
                    SetExpr::Translate { base, shift: s }
                }
            }
            other => SetExpr::Translate { base: Box::new(other), shift },
        }
    }

    /// `self - v`, the shifted copy appearing in `Omega_i - x_i - a_i`.
    pub fn shifted_back(&self, v: &Point) -> SetExpr {
        SetExpr::translate(self.clone(), -v)
    }

    pub fn dim(&self) -> usize {
        match self {
            SetExpr::Halfspace { a, .. } => a.len(),
            SetExpr::Ball { center, .. } => center.dim(),
            SetExpr::Polyhedron { dim, .. } | SetExpr::PolynomialRegion { dim, .. } => *dim,
            SetExpr::Epigraph { .. } | SetExpr::Graph { .. } => 2,
            SetExpr::ProductWithRay { base, .. } => base.dim() + 1,
            SetExpr::Translate { base, .. } => base.dim(),
            SetExpr::Product { factors } => factors.iter().map(|f| f.dim()).sum(),
        }
    }

    /// Structural sanity checks (dimensions agree, radii positive, ...).
    pub fn validate(&self) -> Result<()> {
        match self {
            SetExpr::Halfspace { a, b, .. } => {
                if a.is_empty() || a.iter().any(|x| !x.is_finite()) || !b.is_finite() {
                    return Err(Error::InvalidInput("halfspace needs a finite nonempty normal".into()));
                }
            }
            SetExpr::Ball { radius, .. } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::InvalidInput("ball radius must be positive".into()));
                }
            }
            SetExpr::Polyhedron { dim, faces } => {
                for f in faces {
                    check_dim(*dim, f.a.len())?;
                }
            }
            SetExpr::PolynomialRegion { dim, poly, side, .. } => {
                for t in &poly.terms {
                    check_dim(*dim, t.exps.len())?;
                }
                for f in side {
                    check_dim(*dim, f.a.len())?;
                }
            }
            SetExpr::ProductWithRay { base, .. } => base.validate()?,
            SetExpr::Translate { base, shift } => {
                base.validate()?;
                check_dim(base.dim(), shift.dim())?;
            }
            SetExpr::Product { factors } => {
                if factors.is_empty() {
                    return Err(Error::InvalidInput("empty product".into()));
                }
                for f in factors {
                    f.validate()?;
                }
            }
            SetExpr::Epigraph { .. } | SetExpr::Graph { .. } => {}
        }
        Ok(())
    }

    pub fn capabilities(&self) -> Capabilities {
        let exact = self.has_exact_projection();
        Capabilities { membership: true, exact_projection: exact, iterative_projection: !exact, cone_model: true }
    }

    fn has_exact_projection(&self) -> bool {
        match self {
            SetExpr::Halfspace { .. } | SetExpr::Ball { .. } | SetExpr::Polyhedron { .. } => true,
            SetExpr::Translate { base, .. } | SetExpr::ProductWithRay { base, .. } => base.has_exact_projection(),
            SetExpr::Product { factors } => factors.iter().all(|f| f.has_exact_projection()),
            _ => false,
        }
    }

    /// Thin sets have empty interior; the grid oracle cannot wait for a box
    /// to fall inside them.
    pub fn is_thin(&self) -> bool {
        match self {
            SetExpr::Graph { .. } => true,
            SetExpr::Polyhedron { faces, .. } => {
                // opposite faces with equal offsets pin a hyperplane
                faces.iter().enumerate().any(|(i, f)| {
                    faces[i + 1..].iter().any(|g| f.a.iter().zip(&g.a).all(|(x, y)| *x == -y) && f.b == -g.b)
                })
            }
            SetExpr::Translate { base, .. } | SetExpr::ProductWithRay { base, .. } => base.is_thin(),
            SetExpr::Product { factors } => factors.iter().any(|f| f.is_thin()),
            _ => false,
        }
    }

    /// Whether the set is recognised as convex. Conservative: `false` means
    /// "not known to be convex".
    pub fn is_convex(&self) -> bool {
        match self {
            SetExpr::Halfspace { .. } | SetExpr::Ball { .. } | SetExpr::Polyhedron { .. } => true,
            SetExpr::Epigraph { f } => f.is_convex_catalog(),
            SetExpr::ProductWithRay { base, .. } | SetExpr::Translate { base, .. } => base.is_convex(),
            SetExpr::Product { factors } => factors.iter().all(|f| f.is_convex()),
            SetExpr::Graph { f, .. } => matches!(f, ScalarFunction::Polynomial { coeffs } if coeffs.len() <= 2),
            SetExpr::PolynomialRegion { dim, poly, relation, value, side } => {
                if poly.degree() <= 1 {
                    return true;
                }
                // x*y >= c > 0 restricted to the positive (or negative) branch
                let hyper = *dim == 2
                    && poly.terms.len() == 1
                    && poly.terms[0].exps == [1, 1]
                    && matches!(relation, Relation::Ge | Relation::Gt)
                    && value / poly.terms[0].coef > 0.0;
                let branch = side.iter().any(|f| f.b == 0.0 && f.a.iter().filter(|x| **x != 0.0).count() == 1);
                hyper && branch
            }
        }
    }

    pub fn contains(&self, p: &Point, tol: f64) -> Result<bool> {
        check_dim(self.dim(), p.dim())?;
        Ok(self.holds(p.coords(), tol))
    }

    pub(crate) fn holds(&self, p: &[f64], tol: f64) -> bool {
        match self {
            SetExpr::Halfspace { a, b, strict } => {
                let v: f64 = a.iter().zip(p).map(|(a, x)| a * x).sum::<f64>() - b;
                if *strict {
                    v < -tol
                } else {
                    v <= tol
                }
            }
            SetExpr::Ball { center, radius, open } => {
                let d = p.iter().zip(center.coords()).map(|(x, c)| (x - c).powi(2)).sum::<f64>().sqrt();
                if *open {
                    d < radius - tol
                } else {
                    d <= radius + tol
                }
            }
            SetExpr::Polyhedron { faces, .. } => faces.iter().all(|f| f.holds(p, tol)),
            SetExpr::PolynomialRegion { poly, relation, value, side, .. } => {
                let s = relation.violation(poly.eval(p), *value);
                let ok = if relation.is_strict() { s < -tol } else { s <= tol };
                ok && side.iter().all(|f| f.holds(p, tol))
            }
            SetExpr::Epigraph { f } => {
                let v = f.eval(p[0]);
                v.is_finite() && p[1] >= v - tol
            }
            SetExpr::ProductWithRay { base, level } => {
                let n = p.len() - 1;
                base.holds(&p[..n], tol) && p[n] <= level + tol
            }
            SetExpr::Graph { f, domain } => {
                domain.iter().any(|d| d.contains(p[0])) && {
                    let v = f.eval(p[0]);
                    v.is_finite() && (p[1] - v).abs() <= tol
                }
            }
            SetExpr::Translate { base, shift } => {
                let q: Vec<f64> = p.iter().zip(shift.coords()).map(|(x, s)| x - s).collect();
                base.holds(&q, tol)
            }
            SetExpr::Product { factors } => {
                let mut off = 0;
                factors.iter().all(|f| {
                    let d = f.dim();
                    let ok = f.holds(&p[off..off + d], tol);
                    off += d;
                    ok
                })
            }
        }
    }

    /// Largest raw constraint violation at `p` (`<= 0` inside, ignoring
    /// strictness). Units are those of the defining functions.
    pub fn violation(&self, p: &[f64]) -> f64 {
        match self {
            SetExpr::Halfspace { a, b, .. } => a.iter().zip(p).map(|(a, x)| a * x).sum::<f64>() - b,
            SetExpr::Ball { center, radius, .. } => {
                p.iter().zip(center.coords()).map(|(x, c)| (x - c).powi(2)).sum::<f64>().sqrt() - radius
            }
            SetExpr::Polyhedron { faces, .. } => {
                faces.iter().map(|f| f.value(p) - f.b).fold(f64::NEG_INFINITY, f64::max)
            }
            SetExpr::PolynomialRegion { poly, relation, value, side, .. } => side
                .iter()
                .map(|f| f.value(p) - f.b)
                .fold(relation.violation(poly.eval(p), *value), f64::max),
            SetExpr::Epigraph { f } => {
                let v = f.eval(p[0]);
                if v.is_finite() {
                    v - p[1]
                } else {
                    f64::INFINITY
                }
            }
            SetExpr::ProductWithRay { base, level } => {
                let n = p.len() - 1;
                base.violation(&p[..n]).max(p[n] - level)
            }
            SetExpr::Graph { f, domain } => {
                if !domain.iter().any(|d| d.contains(p[0])) {
                    return f64::INFINITY;
                }
                let v = f.eval(p[0]);
                if v.is_finite() {
                    (p[1] - v).abs()
                } else {
                    f64::INFINITY
                }
            }
            SetExpr::Translate { base, shift } => {
                let q: Vec<f64> = p.iter().zip(shift.coords()).map(|(x, s)| x - s).collect();
                base.violation(&q)
            }
            SetExpr::Product { factors } => {
                let mut off = 0;
                factors
                    .iter()
                    .map(|f| {
                        let d = f.dim();
                        let v = f.violation(&p[off..off + d]);
                        off += d;
                        v
                    })
                    .fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    /// Interval classification of the box `b` against the set.
    pub fn classify(&self, b: &[Interval], eta: f64) -> Class {
        match self {
            SetExpr::Halfspace { a, b: off, strict } => {
                Face { a: a.clone(), b: *off, strict: *strict }.classify(b, eta)
            }
            SetExpr::Ball { center, radius, open } => {
                let d2 = b
                    .iter()
                    .zip(center.coords())
                    .fold(Interval::point(0.0), |acc, (x, c)| acc + x.shift(-c).sqr());
                let r2 = radius * radius;
                if *open {
                    Class::of(d2.lo >= r2, d2.hi.sqrt() < radius - eta)
                } else {
                    Class::of(d2.lo > r2, d2.hi <= r2)
                }
            }
            SetExpr::Polyhedron { faces, .. } => {
                faces.iter().fold(Class::Inside, |c, f| c.and(f.classify(b, eta)))
            }
            SetExpr::PolynomialRegion { poly, relation, value, side, .. } => {
                let v = poly.enclose(b);
                let (lo, hi) = match relation {
                    Relation::Le | Relation::Lt => (v.lo - value, v.hi - value),
                    Relation::Ge | Relation::Gt => (value - v.hi, value - v.lo),
                };
                // [lo, hi] encloses the violation
                let c = if relation.is_strict() {
                    Class::of(lo >= 0.0, hi < -eta)
                } else {
                    Class::of(lo > 0.0, hi <= 0.0)
                };
                side.iter().fold(c, |c, f| c.and(f.classify(b, eta)))
            }
            SetExpr::Epigraph { f } => {
                let fv = f.enclose(b[0]);
                Class::of(b[1].hi < fv.lo, b[1].lo >= fv.hi)
            }
            SetExpr::ProductWithRay { base, level } => {
                let n = b.len() - 1;
                base.classify(&b[..n], eta).and(Class::of(b[n].lo > *level, b[n].hi <= *level))
            }
            SetExpr::Graph { f, domain } => {
                let x = b[0];
                let mut hit = false;
                for d in domain {
                    if let Some(part) = x.meet(&Interval::new(d.lo(), d.hi())) {
                        if part.lo == part.hi && !d.contains(part.lo) {
                            continue;
                        }
                        let fv = f.enclose(part);
                        if fv.meet(&b[1]).is_some() {
                            hit = true;
                            break;
                        }
                    }
                }
                if hit {
                    Class::Unknown
                } else {
                    Class::Outside
                }
            }
            SetExpr::Translate { base, shift } => {
                let q: Vec<Interval> = b.iter().zip(shift.coords()).map(|(x, s)| x.shift(-s)).collect();
                base.classify(&q, eta)
            }
            SetExpr::Product { factors } => {
                let mut off = 0;
                factors.iter().fold(Class::Inside, |c, f| {
                    let d = f.dim();
                    let r = c.and(f.classify(&b[off..off + d], eta));
                    off += d;
                    r
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn omega1() -> SetExpr {
        SetExpr::hyperbolic(Relation::Ge, 1.0, vec![Face::strict(vec![-1.0, 0.0], 0.0)])
    }

    #[test]
    fn membership_examples() {
        let o1 = omega1();
        assert!(o1.contains(&Point::from([10.0, 0.1]), 0.0).unwrap());
        assert!(!o1.contains(&Point::from([-1.0, -1.0]), 0.0).unwrap());
        let h = SetExpr::halfspace(vec![0.0, 1.0], 0.0);
        assert!(h.contains(&Point::from([0.0, 0.0]), 0.0).unwrap());
        assert!(matches!(h.contains(&Point::from([0.0, 0.0, 1.0]), 0.0), Err(Error::DimensionMismatch { .. })));
        assert!(o1.is_convex());
    }

    #[test]
    fn translations_fold() {
        let h = SetExpr::halfspace(vec![0.0, 1.0], 0.0);
        let t = SetExpr::translate(SetExpr::translate(h.clone(), Point::from([1.0, 2.0])), Point::from([0.5, -1.0]));
        match &t {
            SetExpr::Translate { base, shift } => {
                assert_eq!(**base, h);
                assert_eq!(*shift, Point::from([1.5, 1.0]));
            }
            _ => panic!("expected a single translate"),
        }
        let back = SetExpr::translate(t, Point::from([-1.5, -1.0]));
        assert_eq!(back, h);
    }

    #[test]
    fn classification_agrees_with_membership() {
        let sets = [
            omega1(),
            SetExpr::Epigraph { f: ScalarFunction::Reciprocal },
            SetExpr::ball(Point::from([0.5, 0.0]), 1.0),
            SetExpr::graph(ScalarFunction::SinRecip, Domain::punctured()),
        ];
        for s in &sets {
            for i in 0..20 {
                for j in 0..20 {
                    let x = -2.0 + 0.2 * i as f64;
                    let y = -2.0 + 0.2 * j as f64;
                    let b = [Interval::new(x, x + 0.2), Interval::new(y, y + 0.2)];
                    let c = s.classify(&b, 1e-12);
                    for (u, v) in [(0.0, 0.0), (0.1, 0.1), (0.2, 0.05), (0.03, 0.2)] {
                        let p = [x + u, y + v];
                        let inside = s.holds(&p, 0.0);
                        if c == Class::Outside {
                            assert!(!inside, "{s:?} {p:?}");
                        }
                        if c == Class::Inside {
                            assert!(inside, "{s:?} {p:?}");
                        }
                    }
                }
            }
        }
    }
}
