//! Numerical checks for convex log-Sobolev inequalities on the real line.
//!
//! The crate evaluates the modulus of the monotone map pushing the symmetric
//! exponential measure onto a target measure, infimum convolutions and their
//! Hopf–Lax semigroup, entropy-based inequalities over convex test families,
//! barycentric weak transport costs, and Monte Carlo concentration of
//! product measures.
//!
//! ```
//! use cvxlsi::costs::CostFunction;
//! use cvxlsi::measures::two_point;
//! use cvxlsi::transport::{criterion_check, CriterionOptions};
//!
//! let mu = two_point(0.0, 1.0, 0.5).unwrap();
//! let theta = CostFunction::quadratic_theta(1.0);
//! let r = criterion_check(&mu, &theta, 1.0, &CriterionOptions::default()).unwrap();
//! assert!(r.passed());
//! assert!((r.get("b_best").unwrap() - 1.0).abs() < 1e-9);
//! ```

pub mod concentration;
pub mod costs;
pub mod directives;
pub mod error;
pub mod inequalities;
pub mod infconv;
pub mod measures;
pub mod quad;
pub mod report;
pub mod selftest;
pub mod transport;
pub mod weak_ot;

pub use costs::{CostFunction, CostSpec};
pub use error::{Error, Result};
pub use infconv::{GridFunction, inf_convolution, Engine, Extension};
pub use measures::{Atoms, Family, Measure1D};
pub use report::{Report, Table, Verdict};
pub use transport::TransportMap;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/measures.md")]
    struct Measures;
    #[doc = include_str!("../../../book/src/costs.md")]
    struct Costs;
    #[doc = include_str!("../../../book/src/transport.md")]
    struct Transport;
    #[doc = include_str!("../../../book/src/infconv.md")]
    struct Infconv;
    #[doc = include_str!("../../../book/src/inequalities.md")]
    struct Inequalities;
    #[doc = include_str!("../../../book/src/weak_ot.md")]
    struct WeakOt;
    #[doc = include_str!("../../../book/src/concentration.md")]
    struct Concentration;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}
