//! Replicator dynamics in feedback with static and dynamic population games,
//! plus numerical passivity and negative-imaginary certificates.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod dynamics;
pub mod error;
pub mod game;
pub mod interconnection;
pub mod scenario;
pub mod simplex;

pub use error::{Error, Result};
pub use game::{make_rps_game, GameModel, LtiGame, MatrixGame, StateSpace};
pub use simplex::{tangent_basis, SimplexState, TangentBasis, TangentVector};
