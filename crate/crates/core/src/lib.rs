//! Exact computer algebra for the Hurwitz / Hodge / KP pipeline.
//!
//! Everything here computes over arbitrary-precision rationals in truncated
//! graded series rings; there is no floating point anywhere. The crate is
//! organized around the objects it manipulates:
//!
//! - [`rat`]: exact rational scalars and combinatorial helpers.
//! - [`series`]: the truncated sparse series ring (variables `p`, `q`, `r`,
//!   `t`; parameters `beta`, `u`, `v`, `gamma`).
//! - [`laurent`]: truncated Laurent series in one variable `z`.
//! - [`diffop`]: the operator algebra `a_k`, `Lambda_m`, `M_m` and the
//!   cut-and-join operator, materialized below truncation caps.
//! - [`hurwitz`]: the Hurwitz tau-function, connected Hurwitz numbers, and
//!   an independent symmetric-group enumeration oracle.
//! - [`elsv`]: changes of variables (Lagrange inversion, the `p -> q`
//!   triangular change), Hodge correlator extraction, and the series `G`.
//! - [`kp`]: executable checks of KP/KdV equations, Virasoro constraints,
//!   and the transformed cut-and-join equation.
//! - [`bosonfermion`]: Schur functions, the semi-infinite wedge space, the
//!   regularized hat action, and Pluecker coordinates of decomposables.
//! - [`faber`]: the lambda_g machinery (`F^top`, symmetrization, the `W`
//!   reduction operator, the `Psi` evolution equations).

pub mod bosonfermion;
pub mod diffop;
pub mod elsv;
pub mod error;
pub mod faber;
pub mod hurwitz;
pub mod kp;
pub mod laurent;
pub mod rat;
pub mod series;

pub use error::{Error, Result};
pub use rat::Rat;
pub use series::{Caps, Family, Monomial, Param, Series, Var, Window};
