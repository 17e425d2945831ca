//! Shared representations: rational intervals, expression-tree vector fields,
//! moduli of continuity, sampled paths and the grids everything is computed
//! on. All types are immutable after construction and safe to share across
//! worker threads.

pub mod expr;
pub mod field;
pub mod grid;
pub mod interval;
pub mod modulus;
pub mod path;

pub use expr::{BinaryOp, Expr, UnaryOp};
pub use field::{FieldTemplate, Regularity, RegularityClass, VectorField};
pub use grid::{ball_lattice, refine_window, TimeGrid};
pub use interval::{Rational, RationalInterval};
pub use modulus::{merge_moduli, shared_modulus, Modulus, ModulusSet};
pub use path::{PathClass, SampledPath, MEMBERSHIP_TOL};
