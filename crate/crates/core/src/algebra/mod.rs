//! Exact symbolic algebra over the coefficient variables `c_1..c_n`.

pub mod fields;
pub mod poly;
pub mod recurrences;

pub use fields::{kirillov_field, lie_bracket, poisson_bracket, CovariantFunctional, OneForm, VectorFieldOnM};
pub use poly::{CoeffPolynomial, Monomial};
pub use recurrences::{
    cdot_from_u, kirillov_action_on_p, omega_forms, omega_forms_closed, p_polynomials, pi_expansion,
    u_from_cdot, PiExpansion,
};
