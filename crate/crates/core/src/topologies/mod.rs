//! Strong and weak integral seminorm families over compact path classes,
//! the layered optimization engine behind their suprema, the induced
//! pseudometrics, and chain-of-order verification.

pub mod dp;
pub mod metric;
pub mod ordering;
pub mod seminorm;

pub use dp::{enumerate_paths, solve_dp, DpObjective, DpPosition, DpProblem, DpSolution, StepBound};
pub use metric::{metric, metric_of_difference, MetricValue, SeminormEnumeration};
pub use ordering::{ordering_check, OrderingInequality, OrderingReport};
pub use seminorm::{
    seminorm, seminorm_alternative, ArgmaxPath, SeminormContext, SeminormIndex, SeminormKind,
    SeminormResolution, SeminormValue,
};
