//! Numerical toolkit for sequential extremality of set collections in R^n.
//!
//! Sets are described symbolically ([`geometry::SetExpr`]), sequences of points
//! along which the sets approach each other are given in closed form
//! ([`extremality::SequenceSpec`]), and every property check returns a
//! three-way [`Outcome`] together with the witness data needed to replay it.

pub mod cli;
pub mod cones;
pub mod error;
pub mod expr;
pub mod extremality;
pub mod geometry;
pub mod interval;
mod linalg;
pub mod norms;
pub mod optimization;
pub mod registry;
pub mod separation;

pub use error::{Error, Result};
pub use geometry::{Point, SetExpr};

use serde::{Deserialize, Serialize};

/// Result of a numerical property check.
///
/// `Certified` and `Falsified` are always relative to the finite grids and
/// budgets that produced them; `Inconclusive` means neither side could be
/// established within those budgets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Certified,
    Falsified,
    Inconclusive,
}

impl Outcome {
    pub fn is_certified(self) -> bool {
        self == Outcome::Certified
    }

    pub fn is_falsified(self) -> bool {
        self == Outcome::Falsified
    }

    /// Exit code used by the command line front end.
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Certified => 0,
            Outcome::Falsified => 1,
            Outcome::Inconclusive => 2,
        }
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Outcome::Certified => "Certified",
            Outcome::Falsified => "Falsified",
            Outcome::Inconclusive => "Inconclusive",
        };
        f.write_str(s)
    }
}
