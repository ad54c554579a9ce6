//! Extended-real scalar functions on R used for epigraphs, graphs and problem
//! objectives.

use crate::interval::Interval;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Piecewise-smooth scalar functions. Every variant is lower semicontinuous.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum ScalarFunction {
    /// `1/x`, with value `+inf` at 0.
    Reciprocal,
    /// `1/|x| - (x-j)^2` on `[j-1/2, j+1/2)` for integers `j != 0`, and `7/4`
    /// on `(-1/2, 1/2)`.
    PiecewiseParabolic,
    /// `t sin(1/t)` with `t = x - 2j/pi` on the window `|t| <= 1/pi` around
    /// `2j/pi`, and 0 where `t = 0`.
    OscillatorySine,
    /// Coefficients in increasing degree.
    Polynomial { coeffs: Vec<f64> },
    /// Piecewise linear interpolation, constant outside the nodes.
    Tabulated { xs: Vec<f64>, ys: Vec<f64> },
    /// `scale * |x|^p`, `p > 0`.
    AbsPower { scale: f64, p: f64 },
    /// `scale * sign(x) |x|^p`, `p > 0`. Odd, monotone, and for `p < 1` the
    /// epigraph has a horizontal normal at the origin.
    SignedPower { scale: f64, p: f64 },
    /// `scale * exp(rate * x)`.
    Exp { scale: f64, rate: f64 },
    /// `sin(1/x)`, with value -1 at 0 (the lower limit).
    SinRecip,
    Sum { terms: Vec<ScalarFunction> },
}

const MAX_WINDOWS: i64 = 64;

fn osc_center(j: i64) -> f64 {
    // same operation order as the closed form "2*k/pi"
    (2.0 * j as f64) / PI
}

fn osc_window(x: f64) -> i64 {
    (x * PI / 2.0).round() as i64
}

fn osc_value(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t * (1.0 / t).sin()
    }
}

fn parab_window(x: f64) -> i64 {
    (x + 0.5).floor() as i64
}

impl ScalarFunction {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ScalarFunction::Reciprocal => {
                if x == 0.0 {
                    f64::INFINITY
                } else {
                    1.0 / x
                }
            }
            ScalarFunction::PiecewiseParabolic => {
                let j = parab_window(x);
                if j == 0 {
                    1.75
                } else {
                    1.0 / x.abs() - (x - j as f64).powi(2)
                }
            }
            ScalarFunction::OscillatorySine => {
                let j = osc_window(x);
                osc_value(x - osc_center(j))
            }
            ScalarFunction::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c),
            ScalarFunction::Tabulated { xs, ys } => tab_eval(xs, ys, x),
            ScalarFunction::AbsPower { scale, p } => scale * x.abs().powf(*p),
            ScalarFunction::SignedPower { scale, p } => scale * x.signum() * x.abs().powf(*p),
            ScalarFunction::Exp { scale, rate } => scale * (rate * x).exp(),
            ScalarFunction::SinRecip => {
                if x == 0.0 {
                    -1.0
                } else {
                    (1.0 / x).sin()
                }
            }
            ScalarFunction::Sum { terms } => terms.iter().map(|t| t.eval(x)).sum(),
        }
    }

    /// `f(anchor + s)`, keeping the offset `s` exact for the periodic
    /// variants so that tiny windows far from the origin stay resolvable.
    pub fn eval_offset(&self, anchor: f64, s: f64) -> f64 {
        let x = anchor + s;
        match self {
            ScalarFunction::OscillatorySine => {
                let j = osc_window(x);
                osc_value((anchor - osc_center(j)) + s)
            }
            ScalarFunction::PiecewiseParabolic => {
                let j = parab_window(x);
                if j == 0 {
                    1.75
                } else {
                    let t = (anchor - j as f64) + s;
                    1.0 / x.abs() - t * t
                }
            }
            ScalarFunction::Sum { terms } => terms.iter().map(|t| t.eval_offset(anchor, s)).sum(),
            _ => self.eval(x),
        }
    }

    /// Enclosure of the range over `[x.lo, x.hi]`. May be loose, never wrong
    /// (up to rounding).
    pub fn enclose(&self, x: Interval) -> Interval {
        match self {
            ScalarFunction::Reciprocal => {
                if x.contains_zero() {
                    // the +inf value at 0 is included by the unbounded side
                    let r = x.recip();
                    Interval::new(r.lo, f64::INFINITY)
                } else {
                    x.recip()
                }
            }
            ScalarFunction::PiecewiseParabolic => {
                let (j0, j1) = (parab_window(x.lo), parab_window(x.hi));
                if !x.lo.is_finite() || !x.hi.is_finite() || j1 - j0 > MAX_WINDOWS {
                    return Interval::new(-0.25, 2.0);
                }
                let mut acc: Option<Interval> = None;
                for j in j0..=j1 {
                    let piece = Interval::new((j as f64 - 0.5).max(x.lo), (j as f64 + 0.5).min(x.hi));
                    if piece.lo > piece.hi {
                        continue;
                    }
                    // the window formula is continuous across the closing edge,
                    // so the closed piece is enclosed by the same expression
                    let v = if j == 0 {
                        Interval::point(1.75)
                    } else {
                        piece.abs().recip() - piece.shift(-(j as f64)).sqr()
                    };
                    acc = Some(acc.map_or(v, |a| a.hull(&v)));
                }
                acc.unwrap_or(Interval::point(self.eval(x.lo)))
            }
            ScalarFunction::OscillatorySine => {
                let (j0, j1) = (osc_window(x.lo), osc_window(x.hi));
                let bound = 1.0 / PI;
                if !x.lo.is_finite() || !x.hi.is_finite() || j1 - j0 > MAX_WINDOWS {
                    return Interval::new(-bound, bound);
                }
                let mut acc: Option<Interval> = None;
                for j in j0..=j1 {
                    let c = osc_center(j);
                    let t = Interval::new((x.lo - c).max(-bound), (x.hi - c).min(bound));
                    if t.lo > t.hi {
                        continue;
                    }
                    let v = osc_enclose(t);
                    acc = Some(acc.map_or(v, |a| a.hull(&v)));
                }
                acc.unwrap_or(Interval::point(self.eval(x.lo)))
            }
            ScalarFunction::Polynomial { coeffs } => {
                let mut acc = Interval::point(0.0);
                for (d, c) in coeffs.iter().enumerate() {
                    acc = acc + x.powi(d as u32).scale(*c);
                }
                acc
            }
            ScalarFunction::Tabulated { xs, ys } => {
                let mut lo = tab_eval(xs, ys, x.lo).min(tab_eval(xs, ys, x.hi));
                let mut hi = tab_eval(xs, ys, x.lo).max(tab_eval(xs, ys, x.hi));
                for (xi, yi) in xs.iter().zip(ys) {
                    if x.contains(*xi) {
                        lo = lo.min(*yi);
                        hi = hi.max(*yi);
                    }
                }
                Interval::new(lo, hi)
            }
            ScalarFunction::AbsPower { scale, p } => x.abs_pow(*p).scale(*scale),
            ScalarFunction::SignedPower { .. } => {
                let (a, b) = (self.eval(x.lo), self.eval(x.hi));
                Interval::new(a.min(b).next_down(), a.max(b).next_up())
            }
            ScalarFunction::Exp { scale, rate } => x.scale(*rate).exp().scale(*scale),
            ScalarFunction::SinRecip => {
                if x.contains_zero() {
                    Interval::new(-1.0, 1.0)
                } else {
                    x.recip().sin()
                }
            }
            ScalarFunction::Sum { terms } => {
                terms.iter().fold(Interval::point(0.0), |acc, t| acc + t.enclose(x))
            }
        }
    }

    /// Derivative where `f` is differentiable and finite.
    pub fn derivative(&self, x: f64) -> Option<f64> {
        match self {
            ScalarFunction::Reciprocal => (x != 0.0).then(|| -1.0 / (x * x)),
            ScalarFunction::PiecewiseParabolic => {
                if (x - 0.5).fract() == 0.0 {
                    return None;
                }
                let j = parab_window(x);
                if j == 0 {
                    Some(0.0)
                } else {
                    Some(-x.signum() / (x * x) - 2.0 * (x - j as f64))
                }
            }
            ScalarFunction::OscillatorySine => {
                let j = osc_window(x);
                let t = x - osc_center(j);
                if t == 0.0 || (t.abs() - 1.0 / PI).abs() < 1e-15 {
                    None
                } else {
                    Some((1.0 / t).sin() - (1.0 / t).cos() / t)
                }
            }
            ScalarFunction::Polynomial { coeffs } => Some(
                coeffs
                    .iter()
                    .enumerate()
                    .skip(1)
                    .rev()
                    .fold(0.0, |acc, (d, c)| acc * x + d as f64 * c),
            ),
            ScalarFunction::Tabulated { xs, ys } => {
                if xs.iter().any(|n| *n == x) {
                    return None;
                }
                match xs.iter().position(|n| *n > x) {
                    Some(0) | None => Some(0.0),
                    Some(i) => Some((ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1])),
                }
            }
            ScalarFunction::AbsPower { scale, p } => {
                if x == 0.0 {
                    (*p > 1.0).then_some(0.0)
                } else {
                    Some(scale * p * x.abs().powf(p - 1.0) * x.signum())
                }
            }
            ScalarFunction::SignedPower { scale, p } => {
                if x != 0.0 {
                    Some(scale * p * x.abs().powf(p - 1.0))
                } else if *p > 1.0 {
                    Some(0.0)
                } else if *p == 1.0 {
                    Some(*scale)
                } else {
                    None
                }
            }
            ScalarFunction::Exp { scale, rate } => Some(scale * rate * (rate * x).exp()),
            ScalarFunction::SinRecip => (x != 0.0).then(|| -(1.0 / x).cos() / (x * x)),
            ScalarFunction::Sum { terms } => terms.iter().map(|t| t.derivative(x)).sum(),
        }
    }

    /// One-sided derivatives at a kink, `(left, right)`, where they exist.
    pub fn one_sided(&self, x: f64) -> Option<(f64, f64)> {
        let h = 1e-7 * x.abs().max(1.0);
        let d = |a: f64, b: f64| (self.eval(b) - self.eval(a)) / (b - a);
        let l = d(x - h, x);
        let r = d(x, x + h);
        (l.is_finite() && r.is_finite()).then_some((l, r))
    }

    /// Generators `(v, w)` of the Fréchet normal cone to the epigraph at
    /// `(x, f(x))` when `f` is not differentiable at `x`. `Some(vec![])` means
    /// the cone is `{0}`; `None` means no model is available.
    pub fn epi_kink_generators(&self, x: f64) -> Option<Vec<[f64; 2]>> {
        match self {
            ScalarFunction::AbsPower { scale, p } if x == 0.0 => {
                if *p == 1.0 {
                    Some(vec![[*scale, -1.0], [-*scale, -1.0]])
                } else if *p < 1.0 {
                    Some(vec![[1.0, 0.0], [-1.0, 0.0], [0.0, -1.0]])
                } else {
                    None
                }
            }
            ScalarFunction::SignedPower { scale, p } if x == 0.0 && *p < 1.0 => Some(vec![[scale.signum(), 0.0]]),
            ScalarFunction::OscillatorySine => {
                let t = x - osc_center(osc_window(x));
                if t == 0.0 {
                    return Some(vec![]);
                }
                let (l, r) = self.one_sided(x)?;
                kink_cone(l, r)
            }
            ScalarFunction::PiecewiseParabolic | ScalarFunction::Tabulated { .. } => {
                let (l, r) = self.one_sided(x)?;
                kink_cone(l, r)
            }
            _ => None,
        }
    }

    /// Breakpoints inside `[lo, hi]` (window edges, table nodes, nonsmooth
    /// points). Capped at a few thousand entries.
    pub fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut out = Vec::new();
        match self {
            ScalarFunction::Reciprocal | ScalarFunction::SinRecip => {
                if lo <= 0.0 && 0.0 <= hi {
                    out.push(0.0);
                }
            }
            ScalarFunction::PiecewiseParabolic => {
                let (a, b) = ((lo - 0.5).ceil() as i64, (hi - 0.5).floor() as i64);
                for j in a..=b.min(a + 4096) {
                    out.push(j as f64 + 0.5);
                }
            }
            ScalarFunction::OscillatorySine => {
                let (a, b) = (osc_window(lo) - 1, osc_window(hi) + 1);
                for j in a..=b.min(a + 4096) {
                    let c = osc_center(j);
                    for e in [c, c + 1.0 / PI] {
                        if lo <= e && e <= hi {
                            out.push(e);
                        }
                    }
                }
            }
            ScalarFunction::Tabulated { xs, .. } => out.extend(xs.iter().filter(|x| lo <= **x && **x <= hi)),
            ScalarFunction::AbsPower { .. } | ScalarFunction::SignedPower { .. } => {
                if lo <= 0.0 && 0.0 <= hi {
                    out.push(0.0);
                }
            }
            ScalarFunction::Sum { terms } => {
                for t in terms {
                    out.extend(t.breakpoints(lo, hi));
                }
            }
            _ => {}
        }
        out
    }

    /// Known local minimizers in `[lo, hi]` given as offsets from `anchor`.
    /// For the oscillatory variant these are the points `t = ±2/((4j-1)pi)`
    /// where `t sin(1/t) = -|t|`, plus the true minimizers just beside them.
    pub fn candidate_offsets(&self, anchor: f64, lo: f64, hi: f64) -> Vec<f64> {
        let mut out = Vec::new();
        match self {
            ScalarFunction::OscillatorySine => {
                let j = osc_window(anchor + 0.5 * (lo + hi));
                // offset of the window centre from the anchor; exactly 0 when
                // the anchor is itself a centre
                let base = osc_center(j) - anchor;
                let (tlo, thi) = (lo - base, hi - base);
                let tmax = tlo.abs().max(thi.abs()).min(1.0 / PI);
                if tmax == 0.0 {
                    return out;
                }
                let tmin = if tlo > 0.0 {
                    tlo
                } else if thi < 0.0 {
                    -thi
                } else {
                    0.0
                };
                // |t| = 2/((4m-1) pi) within [tmin, tmax]
                let m_lo = ((2.0 / (PI * tmax) + 1.0) / 4.0).ceil().max(1.0) as i64;
                let m_hi = if tmin > 0.0 { ((2.0 / (PI * tmin) + 1.0) / 4.0).floor() as i64 } else { m_lo + 2000 };
                for m in m_lo..=m_hi.min(m_lo + 2000) {
                    let t = 2.0 / ((4 * m - 1) as f64 * PI);
                    for tt in [t, -t] {
                        // the exact minimizer solves tan(s) = s for s = 1/t; start
                        // Newton just beside the pole of tan at s0
                        let s0 = 1.0 / tt;
                        let mut s = s0 - 1.0 / s0;
                        for _ in 0..30 {
                            let tan = s.tan();
                            let g = tan - s;
                            let dg = tan * tan;
                            if !g.is_finite() || dg == 0.0 {
                                break;
                            }
                            let step = g / dg;
                            s -= step;
                            if step.abs() <= 1e-16 * s.abs() {
                                break;
                            }
                        }
                        for t in [tt, if (s - s0).abs() < 1.0 { 1.0 / s } else { tt }] {
                            let off = base + t;
                            if lo <= off && off <= hi {
                                out.push(off);
                            }
                        }
                    }
                }
            }
            ScalarFunction::PiecewiseParabolic => {
                // inner minimizers of 1/|x| - (x-j)^2 are at the window edges
                out.extend(self.breakpoints(anchor + lo, anchor + hi).into_iter().map(|b| b - anchor));
            }
            _ => out.extend(self.breakpoints(anchor + lo, anchor + hi).into_iter().map(|b| b - anchor)),
        }
        out
    }

    pub fn is_convex_catalog(&self) -> bool {
        match self {
            ScalarFunction::AbsPower { p, scale } => *p >= 1.0 && *scale >= 0.0,
            ScalarFunction::Exp { scale, .. } => *scale >= 0.0,
            ScalarFunction::Polynomial { coeffs } => coeffs.len() <= 2 || (coeffs.len() == 3 && coeffs[2] >= 0.0),
            ScalarFunction::Sum { terms } => terms.iter().all(|t| t.is_convex_catalog()),
            _ => false,
        }
    }

    /// Central finite-difference derivative, `h = 1e-6`.
    pub fn numeric_derivative(&self, x: f64) -> f64 {
        let h = 1e-6;
        (self.eval(x + h) - self.eval(x - h)) / (2.0 * h)
    }
}

fn kink_cone(l: f64, r: f64) -> Option<Vec<[f64; 2]>> {
    if (r - l).abs() < 1e-6 * (1.0 + l.abs()) {
        Some(vec![[0.5 * (l + r), -1.0]])
    } else if l < r {
        Some(vec![[l, -1.0], [r, -1.0]])
    } else {
        Some(vec![])
    }
}

fn osc_enclose(t: Interval) -> Interval {
    let m = t.abs().hi;
    if t.contains_zero() || t.width() > 0.5 * t.abs().lo {
        // |t sin(1/t)| <= |t|; cheap and tight enough near the accumulation point
        if !t.contains_zero() && t.abs().lo > 1e-3 {
            let v = t * t.recip().sin();
            return v.meet(&Interval::new(-m, m)).unwrap_or(v);
        }
        return Interval::new(-m, m);
    }
    let v = t * t.recip().sin();
    v.meet(&Interval::new(-m, m)).unwrap_or(v)
}

fn tab_eval(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    if x <= xs[0] {
        return ys[0];
    }
    for i in 1..xs.len() {
        if x <= xs[i] {
            let w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
            return ys[i - 1] + w * (ys[i] - ys[i - 1]);
        }
    }
    *ys.last().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabolic_windows_are_continuous() {
        let f = ScalarFunction::PiecewiseParabolic;
        for j in 1..20 {
            let e = j as f64 + 0.5;
            let left = f.eval(e - 1e-12);
            assert!((left - f.eval(e)).abs() < 1e-9, "jump at {e}");
        }
        assert_eq!(f.eval(0.2), 1.75);
        assert!((f.eval(0.5) - 1.75).abs() < 1e-12);
        assert_eq!(f.eval(10.0), 0.1);
    }

    #[test]
    fn oscillatory_hits_minus_delta() {
        let f = ScalarFunction::OscillatorySine;
        for k in [1.0, 7.0, 1000.0] {
            let xk = 2.0 * k / PI;
            assert_eq!(f.eval(xk), 0.0);
            let d = 1.0 / (2.0 * k * PI - PI / 2.0);
            assert!((f.eval_offset(xk, d) + d).abs() < 1e-12);
        }
    }

    #[test]
    fn enclosures_contain_samples() {
        let fs = [
            ScalarFunction::Reciprocal,
            ScalarFunction::PiecewiseParabolic,
            ScalarFunction::OscillatorySine,
            ScalarFunction::SinRecip,
            ScalarFunction::AbsPower { scale: 1.0, p: 0.5 },
            ScalarFunction::SignedPower { scale: 1.0, p: 1.0 / 3.0 },
            ScalarFunction::SignedPower { scale: -2.0, p: 2.0 },
            ScalarFunction::Exp { scale: 1.0, rate: -1.0 },
            ScalarFunction::Polynomial { coeffs: vec![1.0, -2.0, 0.5] },
        ];
        let boxes = [(-3.0, -2.9), (0.01, 0.02), (0.4, 0.6), (2.5, 4.5), (-0.3, 0.3)];
        for f in &fs {
            for (a, b) in boxes {
                let iv = f.enclose(Interval::new(a, b));
                for i in 0..=200 {
                    let x = a + (b - a) * i as f64 / 200.0;
                    let v = f.eval(x);
                    assert!(iv.lo <= v + 1e-9 && v <= iv.hi + 1e-9, "{f:?} on [{a},{b}] at {x}: {v} not in {iv:?}");
                }
            }
        }
    }

    #[test]
    fn kink_cones() {
        let abs = ScalarFunction::AbsPower { scale: 1.0, p: 1.0 };
        assert_eq!(abs.epi_kink_generators(0.0).unwrap().len(), 2);
        // convex kink of the parabolic windows at 10.5
        let g = ScalarFunction::PiecewiseParabolic.epi_kink_generators(10.5).unwrap();
        assert_eq!(g.len(), 2);
        assert!(g[0][0] < g[1][0]);
        // cube root: the only epigraph normal at the origin is horizontal
        let cbrt = ScalarFunction::SignedPower { scale: 1.0, p: 1.0 / 3.0 };
        assert_eq!(cbrt.epi_kink_generators(0.0).unwrap(), vec![[1.0, 0.0]]);
        assert_eq!(cbrt.derivative(0.0), None);
        assert!((cbrt.eval(-8.0) + 2.0).abs() < 1e-12);
    }
}
