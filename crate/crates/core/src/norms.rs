//! Base norms on R^d, product norms on (R^d)^n and their duals.

use crate::error::{check_dim, Error, Result};
use crate::geometry::Point;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BaseNorm {
    L1,
    L2,
    #[default]
    LInf,
}

impl BaseNorm {
    pub fn norm(self, v: &[f64]) -> f64 {
        match self {
            BaseNorm::L1 => v.iter().map(|x| x.abs()).sum(),
            BaseNorm::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            BaseNorm::LInf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }

    /// The norm of the dual space.
    pub fn dual(self) -> BaseNorm {
        match self {
            BaseNorm::L1 => BaseNorm::LInf,
            BaseNorm::L2 => BaseNorm::L2,
            BaseNorm::LInf => BaseNorm::L1,
        }
    }

    pub fn dual_norm(self, v: &[f64]) -> f64 {
        self.dual().norm(v)
    }

    /// A unit vector `u` with `<v, u> = ||v||_*`, i.e. an element of the
    /// duality map of `v` seen as a dual vector. Zero for `v = 0`.
    pub fn norming_direction(self, v: &[f64]) -> Vec<f64> {
        match self {
            BaseNorm::LInf => v.iter().map(|x| if *x > 0.0 { 1.0 } else if *x < 0.0 { -1.0 } else { 0.0 }).collect(),
            BaseNorm::L2 => {
                let n = BaseNorm::L2.norm(v);
                if n == 0.0 {
                    vec![0.0; v.len()]
                } else {
                    v.iter().map(|x| x / n).collect()
                }
            }
            BaseNorm::L1 => {
                let mut out = vec![0.0; v.len()];
                if let Some((i, x)) = v.iter().enumerate().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())) {
                    if *x != 0.0 {
                        out[i] = x.signum();
                    }
                }
                out
            }
        }
    }

    /// Euclidean projection onto `{x : ||x - c|| <= r}` in this norm.
    pub fn project_ball(self, p: &[f64], c: &[f64], r: f64) -> Vec<f64> {
        let d: Vec<f64> = p.iter().zip(c).map(|(a, b)| a - b).collect();
        let q = match self {
            BaseNorm::LInf => d.iter().map(|x| x.clamp(-r, r)).collect(),
            BaseNorm::L2 => {
                let n = BaseNorm::L2.norm(&d);
                if n <= r {
                    d
                } else {
                    d.iter().map(|x| x * r / n).collect()
                }
            }
            BaseNorm::L1 => project_l1(&d, r),
        };
        q.iter().zip(c).map(|(a, b)| a + b).collect()
    }
}

// Sort-based projection onto the l1 ball (Duchi et al.).
fn project_l1(v: &[f64], r: f64) -> Vec<f64> {
    if BaseNorm::L1.norm(v) <= r {
        return v.to_vec();
    }
    let mut u: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (j, uj) in u.iter().enumerate() {
        css += uj;
        let t = (css - r) / (j + 1) as f64;
        if *uj > t {
            theta = t;
        }
    }
    v.iter().map(|x| x.signum() * (x.abs() - theta).max(0.0)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum ProductNorm {
    #[default]
    MaxProduct,
    /// `(sum_i w_i ||u_i||^p)^(1/p)`, `p >= 1`.
    WeightedP { p: f64, weights: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum DualConvention {
    /// The dual of the product norm, built from the dual of the base norm.
    #[default]
    CanonicalDual,
    /// Dual vectors are measured with the base norm itself and summed over
    /// components.
    MirrorBase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormSpec {
    #[serde(default)]
    pub base: BaseNorm,
    #[serde(default)]
    pub product: ProductNorm,
    #[serde(default)]
    pub dual_convention: DualConvention,
    #[serde(default = "one")]
    pub kappa1: f64,
    #[serde(default = "one")]
    pub kappa2: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for NormSpec {
    fn default() -> Self {
        NormSpec::new(BaseNorm::LInf, ProductNorm::MaxProduct, DualConvention::CanonicalDual)
    }
}

impl NormSpec {
    /// Builds a norm setup with the exact compatibility constants of `product`.
    pub fn new(base: BaseNorm, product: ProductNorm, dual_convention: DualConvention) -> Self {
        let (kappa1, kappa2) = exact_kappas(&product);
        NormSpec { base, product, dual_convention, kappa1, kappa2 }
    }

    pub fn with_convention(mut self, c: DualConvention) -> Self {
        self.dual_convention = c;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa1 > 0.0 && self.kappa1 <= self.kappa2) {
            return Err(Error::InvalidInput(format!("need 0 < kappa1 <= kappa2, got {} and {}", self.kappa1, self.kappa2)));
        }
        if let ProductNorm::WeightedP { p, weights } = &self.product {
            if *p < 1.0 || weights.is_empty() || weights.iter().any(|w| *w <= 0.0) {
                return Err(Error::InvalidInput("weighted product norm needs p >= 1 and positive weights".into()));
            }
        }
        Ok(())
    }

    pub fn base_norm(&self, v: &Point) -> f64 {
        self.base.norm(v.coords())
    }

    /// Norm of a single dual vector under the configured convention.
    pub fn dual_norm(&self, v: &Point) -> f64 {
        match self.dual_convention {
            DualConvention::CanonicalDual => self.base.dual_norm(v.coords()),
            DualConvention::MirrorBase => self.base.norm(v.coords()),
        }
    }

    pub fn product_norm(&self, tuple: &[Point]) -> Result<f64> {
        uniform_dim(tuple)?;
        let norms: Vec<f64> = tuple.iter().map(|u| self.base_norm(u)).collect();
        Ok(match &self.product {
            ProductNorm::MaxProduct => norms.iter().fold(0.0, |m, x| m.max(*x)),
            ProductNorm::WeightedP { p, weights } => {
                check_dim(weights.len(), tuple.len())?;
                weighted_p(&norms, weights, *p)
            }
        })
    }

    pub fn dual_product_norm(&self, duals: &[Point]) -> Result<f64> {
        uniform_dim(duals)?;
        match self.dual_convention {
            DualConvention::MirrorBase => Ok(duals.iter().map(|u| self.base_norm(u)).sum()),
            DualConvention::CanonicalDual => {
                let norms: Vec<f64> = duals.iter().map(|u| self.base.dual_norm(u.coords())).collect();
                Ok(match &self.product {
                    ProductNorm::MaxProduct => norms.iter().sum(),
                    ProductNorm::WeightedP { p, weights } => {
                        check_dim(weights.len(), duals.len())?;
                        if *p == 1.0 {
                            norms.iter().zip(weights).fold(0.0, |m, (x, w)| m.max(x / w))
                        } else {
                            let q = *p / (*p - 1.0);
                            norms
                                .iter()
                                .zip(weights)
                                .map(|(x, w)| w.powf(-q / p) * x.powf(q))
                                .sum::<f64>()
                                .powf(1.0 / q)
                        }
                    }
                })
            }
        }
    }

    /// Norm of a sum of dual vectors in X*, consistent with [`Self::dual_norm`].
    pub fn dual_sum_norm(&self, duals: &[Point]) -> Result<f64> {
        uniform_dim(duals)?;
        let d = duals.first().map_or(0, |p| p.dim());
        let mut s = vec![0.0; d];
        for u in duals {
            for (a, b) in s.iter_mut().zip(u.coords()) {
                *a += b;
            }
        }
        Ok(self.dual_norm(&Point::from(s)))
    }
}

fn weighted_p(norms: &[f64], weights: &[f64], p: f64) -> f64 {
    norms.iter().zip(weights).map(|(x, w)| w * x.powf(p)).sum::<f64>().powf(1.0 / p)
}

fn exact_kappas(product: &ProductNorm) -> (f64, f64) {
    match product {
        ProductNorm::MaxProduct => (1.0, 1.0),
        ProductNorm::WeightedP { p, weights } => {
            let lo = weights.iter().fold(f64::INFINITY, |m, w| m.min(*w));
            let sum: f64 = weights.iter().sum();
            (lo.powf(1.0 / p), sum.powf(1.0 / p))
        }
    }
}

fn uniform_dim(tuple: &[Point]) -> Result<()> {
    if tuple.is_empty() {
        return Err(Error::InvalidInput("empty tuple".into()));
    }
    let d = tuple[0].dim();
    for u in tuple {
        check_dim(d, u.dim())?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityReport {
    pub kappa1_est: f64,
    pub kappa2_est: f64,
    pub pass: bool,
    /// First tuple that broke one of the declared bounds.
    pub violation: Option<Vec<Point>>,
}

/// Samples tuples and checks `kappa1 max||u_i|| <= |||u||| <= kappa2 max||u_i||`
/// and `sum ||u_i*|| <= kappa2 |||u*|||` against the declared constants.
///
/// The sample set starts with the single-component and equal-magnitude sign
/// patterns, where the ratio is extremal, followed by random tuples.
pub fn verify_compatibility(ns: &NormSpec, samples: usize, seed: u64) -> CompatibilityReport {
    let n = match &ns.product {
        ProductNorm::MaxProduct => 3,
        ProductNorm::WeightedP { weights, .. } => weights.len(),
    };
    let dim = 2;
    let mut tuples: Vec<Vec<Point>> = Vec::new();
    for i in 0..n {
        let mut t = vec![Point::zeros(dim); n];
        t[i] = Point::from(vec![1.0, 0.0]);
        tuples.push(t);
    }
    for mask in 0..(1u32 << n.min(10)) {
        let t = (0..n)
            .map(|i| {
                let s = if i < 10 && mask & (1 << i) != 0 { -1.0 } else { 1.0 };
                Point::from(vec![s, 0.5 * s])
            })
            .collect();
        tuples.push(t);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        tuples.push((0..n).map(|_| Point::from(vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])).collect());
    }

    let mut k1 = f64::INFINITY;
    let mut k2: f64 = 0.0;
    let mut violation = None;
    let slack = 1e-12;
    for t in &tuples {
        let m = t.iter().fold(0.0f64, |a, u| a.max(ns.base_norm(u)));
        if m == 0.0 {
            continue;
        }
        let Ok(pn) = ns.product_norm(t) else { continue };
        let r = pn / m;
        k1 = k1.min(r);
        k2 = k2.max(r);
        let dual_ok = match ns.dual_product_norm(t) {
            Ok(d) => {
                let s: f64 = t.iter().map(|u| ns.dual_norm(u)).sum();
                s <= ns.kappa2 * d * (1.0 + slack) + slack
            }
            Err(_) => true,
        };
        let primal_ok = ns.kappa1 * m <= pn * (1.0 + slack) + slack && pn <= ns.kappa2 * m * (1.0 + slack) + slack;
        if (!primal_ok || !dual_ok) && violation.is_none() {
            violation = Some(t.clone());
        }
    }
    CompatibilityReport { kappa1_est: k1, kappa2_est: k2, pass: violation.is_none(), violation }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[[f64; 2]]) -> Vec<Point> {
        v.iter().map(|p| Point::from(*p)).collect()
    }

    #[test]
    fn product_norm_values() {
        let ns = NormSpec::default();
        assert_eq!(ns.product_norm(&pts(&[[1.0, 2.0], [3.0, -1.0]])).unwrap(), 3.0);
        assert_eq!(ns.product_norm(&pts(&[[0.0, 0.0], [0.0, 0.0]])).unwrap(), 0.0);
        let l2 = NormSpec::new(BaseNorm::L2, ProductNorm::MaxProduct, DualConvention::CanonicalDual);
        assert_eq!(l2.product_norm(&pts(&[[3.0, 4.0], [0.0, 1.0]])).unwrap(), 5.0);
        let bad = vec![Point::from([1.0, 2.0]), Point::from([1.0, 2.0, 3.0])];
        assert!(matches!(ns.product_norm(&bad), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn dual_conventions() {
        let duals = pts(&[[-0.005, -0.5], [0.0, 0.5]]);
        let canon = NormSpec::default();
        assert!((canon.dual_product_norm(&duals).unwrap() - 1.005).abs() < 1e-15);
        let mirror = canon.clone().with_convention(DualConvention::MirrorBase);
        assert_eq!(mirror.dual_norm(&duals[0]), 0.5);
        assert_eq!(mirror.dual_norm(&duals[1]), 0.5);
        assert_eq!(mirror.dual_product_norm(&duals).unwrap(), 1.0);
        assert_eq!(canon.dual_product_norm(&pts(&[[0.0, 0.0], [0.0, 0.0]])).unwrap(), 0.0);
    }

    #[test]
    fn compatibility_constants() {
        let r = verify_compatibility(&NormSpec::default(), 200, 1);
        assert!(r.pass);
        assert_eq!((r.kappa1_est, r.kappa2_est), (1.0, 1.0));

        let w = NormSpec::new(
            BaseNorm::LInf,
            ProductNorm::WeightedP { p: 1.0, weights: vec![1.0, 1.0] },
            DualConvention::CanonicalDual,
        );
        assert_eq!((w.kappa1, w.kappa2), (1.0, 2.0));
        let r = verify_compatibility(&w, 200, 1);
        assert!(r.pass);
        assert!((r.kappa1_est - 1.0).abs() < 1e-12 && (r.kappa2_est - 2.0).abs() < 1e-12);

        let mut lying = w.clone();
        lying.kappa2 = 1.5;
        let r = verify_compatibility(&lying, 50, 1);
        assert!(!r.pass);
        assert!(r.violation.is_some());
    }

    #[test]
    fn l1_ball_projection() {
        let q = BaseNorm::L1.project_ball(&[3.0, 1.0], &[0.0, 0.0], 1.0);
        assert!((q[0] - 1.0).abs() < 1e-12 && q[1].abs() < 1e-12);
        let q = BaseNorm::L1.project_ball(&[1.0, 1.0], &[0.0, 0.0], 1.0);
        assert!((q[0] - 0.5).abs() < 1e-12 && (q[1] - 0.5).abs() < 1e-12);
    }
}
