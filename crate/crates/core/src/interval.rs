//! Plain interval arithmetic used to prune boxes in the grid oracle.
//!
//! Rounding is not directed; enclosures are exact up to a few ulps, which is
//! far below every tolerance used by the oracles.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const ENTIRE: Interval = Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };

    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(!(lo > hi), "inverted interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    /// Intersection, or `None` when disjoint.
    pub fn meet(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then(|| Interval::new(lo, hi))
    }

    pub fn shift(&self, c: f64) -> Interval {
        Interval::new(self.lo + c, self.hi + c)
    }

    pub fn scale(&self, c: f64) -> Interval {
        if c >= 0.0 {
            Interval::new(c * self.lo, c * self.hi)
        } else {
            Interval::new(c * self.hi, c * self.lo)
        }
    }

    pub fn abs(&self) -> Interval {
        if self.lo >= 0.0 {
            *self
        } else if self.hi <= 0.0 {
            -*self
        } else {
            Interval::new(0.0, (-self.lo).max(self.hi))
        }
    }

    pub fn sqr(&self) -> Interval {
        let a = self.abs();
        Interval::new(a.lo * a.lo, a.hi * a.hi)
    }

    pub fn powi(&self, n: u32) -> Interval {
        match n {
            0 => Interval::point(1.0),
            1 => *self,
            _ if n % 2 == 0 => {
                let a = self.abs();
                Interval::new(a.lo.powi(n as i32), a.hi.powi(n as i32))
            }
            _ => Interval::new(self.lo.powi(n as i32), self.hi.powi(n as i32)),
        }
    }

    /// `|x|^p` for `p > 0`.
    pub fn abs_pow(&self, p: f64) -> Interval {
        let a = self.abs();
        Interval::new(a.lo.powf(p), a.hi.powf(p))
    }

    pub fn recip(&self) -> Interval {
        if self.lo > 0.0 || self.hi < 0.0 {
            Interval::new(1.0 / self.hi, 1.0 / self.lo)
        } else if self.lo == 0.0 && self.hi > 0.0 {
            Interval::new(1.0 / self.hi, f64::INFINITY)
        } else if self.hi == 0.0 && self.lo < 0.0 {
            Interval::new(f64::NEG_INFINITY, 1.0 / self.lo)
        } else {
            Interval::ENTIRE
        }
    }

    pub fn exp(&self) -> Interval {
        Interval::new(self.lo.exp(), self.hi.exp())
    }

    pub fn sin(&self) -> Interval {
        if !self.lo.is_finite() || !self.hi.is_finite() || self.width() >= 2.0 * PI {
            return Interval::new(-1.0, 1.0);
        }
        let (a, b) = (self.lo.sin(), self.hi.sin());
        let mut lo = a.min(b);
        let mut hi = a.max(b);
        // interior extrema at pi/2 + 2 pi m (max) and -pi/2 + 2 pi m (min)
        let m_max = ((self.lo - FRAC_PI_2) / (2.0 * PI)).ceil();
        if FRAC_PI_2 + 2.0 * PI * m_max <= self.hi {
            hi = 1.0;
        }
        let m_min = ((self.lo + FRAC_PI_2) / (2.0 * PI)).ceil();
        if -FRAC_PI_2 + 2.0 * PI * m_min <= self.hi {
            lo = -1.0;
        }
        Interval::new(lo, hi)
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval::new(self.lo + o.lo, self.hi + o.hi)
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, o: Interval) -> Interval {
        Interval::new(self.lo - o.hi, self.hi - o.lo)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        let c = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in c {
            // 0 * inf: an unattained infinite bound times an exact zero is zero
            let v = if v.is_nan() { 0.0 } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Interval::new(lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin_encloses_samples() {
        let iv = Interval::new(0.3, 2.0);
        let s = iv.sin();
        assert_eq!(s.hi, 1.0);
        for i in 0..=100 {
            let x = 0.3 + 1.7 * i as f64 / 100.0;
            assert!(s.contains(x.sin()));
        }
        let t = Interval::new(4.0, 5.0).sin();
        assert_eq!(t.lo, -1.0);
    }

    #[test]
    fn recip_through_zero_is_entire() {
        assert_eq!(Interval::new(-1.0, 1.0).recip(), Interval::ENTIRE);
        let r = Interval::new(2.0, 4.0).recip();
        assert_eq!((r.lo, r.hi), (0.25, 0.5));
    }

    #[test]
    fn products_cover_sign_cases() {
        let p = Interval::new(-2.0, 3.0) * Interval::new(-1.0, 4.0);
        assert_eq!((p.lo, p.hi), (-8.0, 12.0));
        assert_eq!(Interval::new(-3.0, 2.0).sqr(), Interval::new(0.0, 9.0));
    }
}
