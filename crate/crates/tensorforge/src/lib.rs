// SPDX-License-Identifier: Apache-2.0

//! Exact rational machinery for order-3 tensors.
//!
//! Everything is computed over the rationals with arbitrary precision. Floating
//! point appears only in the μ grid search, in the prefilter of the parameter
//! scan, and in ALS proposals that are verified exactly before being returned.

pub mod constructions;
pub mod error;
pub mod linalg;
pub mod mu_optimizer;
pub mod param_search;
pub mod phi_family;
pub mod rank_bounds;
pub mod rational;
pub mod secant_geometry;
pub mod tensor_core;

pub use error::{Error, Result};
pub use rational::Q;
pub use tensor_core::{Decomposition, MatrixQ, Mode, RankOneTerm, Tensor3};
