//! Structured sets in R^n: membership, projection, the set-family gap and
//! ball-restricted emptiness of shifted intersections.

mod oracle;
mod point;
mod project;
mod set;

pub use oracle::{family_gap, intersection_empty, Emptiness, EmptinessVerdict, Method, Radius, SearchBudget};
pub use point::Point;
pub use project::{distance, project};
pub use set::{Capabilities, Class, Domain, Face, Monomial, Polynomial, Relation, SetExpr};

pub(crate) use project::proj;

use crate::error::Result;

/// Membership of `p` in `set` with tolerance `tol` (strict relations need a
/// margin larger than `tol`).
pub fn contains(set: &SetExpr, p: &Point, tol: f64) -> Result<bool> {
    set.contains(p, tol)
}
