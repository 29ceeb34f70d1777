//! Numerical Löwner-Kufarev dynamics in coefficient space.

pub mod alternate;
pub mod conserved;
pub mod driving;
pub mod flow;
pub mod negative;

pub use alternate::{alternate_evolve, chain_series, Normalization};
pub use conserved::{conserved_virasoro, generating_function, ConservedReport, ConservedSeries};
pub use driving::{caratheodory_check, kernel_series, CaratheodoryGrid, CaratheodoryReport, DrivingFunction, DrivingKind, DrivingSpec};
pub use flow::{
    coefficient_velocity, integrate, integrate_with, loewner_limit, momentum_velocity, q_series, EvolutionState,
    IntegrateOptions, LimitResult, Trajectory, TrajectoryMeta,
};
pub use negative::{build_l_nonpositive, kirillov_action_check, ActionCheck};
