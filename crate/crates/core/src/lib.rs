//! Numerics for conformally flat metrics `g = e^{2u}|dx|^2` on `R^n`, `n` even.

pub mod calculus;
pub mod error;
pub mod fields;
pub mod fit;
pub mod gallery;
pub mod geometry;
pub mod jet;
pub mod normality;
pub mod potential;
pub mod quad;

pub use error::{Error, Result};
pub use fields::{Dimension, Point, ScalarField};
