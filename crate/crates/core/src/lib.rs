//! Difference calculus, Riesz-mean averaging and recurrence experiments along
//! floors of slowly growing sequences.

pub mod blocks;
pub mod catalog;
pub mod difference;
pub mod equidistribution;
pub mod error;
pub mod number;
pub mod pet;
pub mod recurrence;
pub mod riesz;
pub mod systems;

pub use error::{Error, Result};
