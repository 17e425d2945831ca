//! Numerical laboratory for Carathéodory delay differential equations.
//!
//! The crate makes three things computable at desk scale:
//!
//! * optimal `m`/`l`-bounds of Lipschitz Carathéodory vector fields on balls,
//!   and the moduli of continuity their integrals generate ([`bounds`]);
//! * the strong and weak integral seminorm families (classic and hybrid) over
//!   compact classes of continuous paths, evaluated exactly on a finite
//!   relaxation by dynamic programming over layered grids ([`topologies`]);
//! * solutions of the unit-delay problem `x'(t) = f(t, x(t), x(t-1))` by the
//!   method of steps with an integral-form scheme that tolerates fields that
//!   are merely measurable in time ([`solver`]).
//!
//! [`lab`] combines the three into reproducible experiments: continuous
//! dependence of solutions on fields and initial data, translation-flow
//! continuity, topology orderings and equivalences, and skew-product orbit
//! checks.

pub mod bounds;
pub mod error;
pub mod lab;
pub mod model;
pub mod solver;
pub mod topologies;

pub use error::{CoreError, Result};
pub use model::{
    ball_lattice, merge_moduli, shared_modulus, Expr, FieldTemplate, Modulus, ModulusSet,
    PathClass, Rational, RationalInterval, Regularity, RegularityClass, SampledPath, TimeGrid,
    VectorField,
};
