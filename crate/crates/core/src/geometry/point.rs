use crate::error::{check_dim, Error, Result};
use serde::{Deserialize, Deserializer, Serialize};
use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

/// A point (or vector) of R^n with finite coordinates.
#[derive(Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidInput("point of dimension 0".into()));
        }
        if let Some(x) = coords.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite coordinate {x}")));
        }
        Ok(Point { coords })
    }

    pub fn zeros(dim: usize) -> Self {
        Point { coords: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn dot(&self, other: &Point) -> f64 {
        self.coords.iter().zip(&other.coords).map(|(a, b)| a * b).sum()
    }

    pub fn norm2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dist2(&self, other: &Point) -> f64 {
        (self - other).norm2()
    }

    pub fn scale(&self, c: f64) -> Point {
        Point::from(self.coords.iter().map(|x| c * x).collect::<Vec<_>>())
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|x| *x == 0.0)
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        check_dim(dim, self.dim())
    }

    /// Concatenation, used for product spaces.
    pub fn concat(parts: &[Point]) -> Point {
        Point::from(parts.iter().flat_map(|p| p.coords.iter().copied()).collect::<Vec<_>>())
    }

    pub fn slice(&self, from: usize, len: usize) -> Point {
        Point::from(self.coords[from..from + len].to_vec())
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        Point::new(v).map_err(serde::de::Error::custom)
    }
}

/// Panics on non-finite input; use [`Point::new`] for untrusted data.
impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        assert!(coords.iter().all(|x| x.is_finite()), "non-finite coordinate in {coords:?}");
        Point { coords }
    }
}

impl<const N: usize> From<[f64; N]> for Point {
    fn from(a: [f64; N]) -> Self {
        Point::from(a.to_vec())
    }
}

impl Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr<&Point> for &Point {
            type Output = Point;
            fn $m(self, o: &Point) -> Point {
                debug_assert_eq!(self.dim(), o.dim());
                Point { coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a $op b).collect() }
            }
        }
        impl $tr<Point> for Point {
            type Output = Point;
            fn $m(self, o: Point) -> Point {
                &self $op &o
            }
        }
        impl $tr<&Point> for Point {
            type Output = Point;
            fn $m(self, o: &Point) -> Point {
                &self $op o
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);

impl Neg for &Point {
    type Output = Point;
    fn neg(self) -> Point {
        self.scale(-1.0)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        self.scale(-1.0)
    }
}

impl Mul<&Point> for f64 {
    type Output = Point;
    fn mul(self, p: &Point) -> Point {
        p.scale(self)
    }
}

impl Mul<Point> for f64 {
    type Output = Point;
    fn mul(self, p: Point) -> Point {
        p.scale(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        assert!(Point::new(vec![1.0, f64::NAN]).is_err());
        assert!(serde_json::from_str::<Point>("[1.0, 2.0]").is_ok());
        assert!(serde_json::from_str::<Point>("[]").is_err());
    }

    #[test]
    fn arithmetic() {
        let a = Point::from([1.0, 2.0]);
        let b = Point::from([0.5, -1.0]);
        assert_eq!(&a + &b, Point::from([1.5, 1.0]));
        assert_eq!(&a - &b, Point::from([0.5, 3.0]));
        assert_eq!(2.0 * &a, Point::from([2.0, 4.0]));
        assert_eq!(a.dot(&b), -1.5);
    }
}
