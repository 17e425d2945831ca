//! Method-of-steps solver for the unit-delay problem
//! `x'(t) = f(t, x(t), x(t-1))`, `x = phi` on `[-1, 0]`, with an
//! integral-form scheme valid for fields that are only measurable in time,
//! plus the Sobolev-space norms and moduli used to measure solutions.

pub mod integrate;
pub mod sobolev;
pub mod trajectory;

pub use integrate::{
    integrate_caratheodory_ode, step_reduce, DelayStepRhs, FnRhs, IntegrateOutcome, OdeRhs,
    SolverParams,
};
pub use sobolev::{c1p_modulus_tau, c1p_norm, sample_c1p_ball, C1pPath};
pub use trajectory::{solve, BlowUp, InitialHistory, SolveStats, Trajectory};
