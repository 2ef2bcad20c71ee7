//! Termination analysis for Chemical Ground Form models.
//!
//! The pipeline for a single initial solution is
//! [`parse_model`] → [`build_lts`] → [`to_dtmc`] → [`reach_termination`].
//! For an interval-valued family of initial solutions it is
//! [`explore`] → [`to_imc`] → [`reach_bounds`], which yields lower and upper
//! bounds on the termination probability valid for every member of the
//! family.

pub mod alts;
pub mod concrete;
pub mod domain;
pub mod dtmc;
pub mod export;
pub mod imc;
mod iteration;
pub mod model;
pub mod multiset;
pub mod parser;
pub mod random;
pub mod scalar;
pub mod simulation;
pub mod symbolic;
pub mod termination;

pub use alts::{
    abstract_enabled, best_abstraction_lts, explore, AbsMultInfo, AbstractLts, AbstractTransition,
};
pub use concrete::{build_lts, enabled_transitions, rate, Lts, MultInfo, TransLabel, Transition};
pub use domain::{AbstractState, Interval, Polarity, SplitTag, Upper};
pub use dtmc::{reach_termination, terminated, to_dtmc, Dtmc};

pub use imc::{best_abstraction_mc, conflict, feasible, no_conflict_sets, to_imc, Imc};
pub use model::{Environment, InitialDecl, Label, Model, Name};
pub use multiset::Multiset;
pub use parser::parse_model;
pub use scalar::Scalar;
pub use simulation::check_simulation;
pub use symbolic::{bound_ratio, SymbolicRate};
pub use termination::{extremal_expectation, reach_bounds, Direction, ReachBounds};

/// Exact rational used for rates and one-step probabilities.
pub type Rational = num_rational::BigRational;

pub type ExactDtmc = Dtmc<Rational>;
pub type FloatDtmc = Dtmc<f64>;
pub type ExactImc = Imc<Rational>;
pub type FloatImc = Imc<f64>;
