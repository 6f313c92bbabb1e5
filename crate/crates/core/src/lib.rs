//! Exact spanning-tree valuations in `Z_ell^d` towers of graph covers.
//!
//! The pipeline: a base [`MultiGraph`] with integer voltages ([`VoltageSpec`])
//! determines a tower of derived graphs `X_n`. The number of spanning trees
//! `kappa_n` of each layer is computed two ways, by the Matrix-Tree theorem on
//! the explicit cover and by a product of Artin-Ihara L-values over Galois
//! orbits of characters. The resulting valuations `ord_ell(kappa_n)` are then
//! fitted by a polynomial in `ell^n` and `n`.

pub mod artin;
pub mod cyclotomic;
pub mod error;
pub mod graph;
pub mod greenberg;
pub mod ring;
pub mod series;
pub mod spanning;
pub mod voltage;

pub use cyclotomic::{CycInt, Level, Valuation};
pub use error::{Error, Result};
pub use graph::{GraphJson, MultiGraph};
pub use spanning::{kappa_matrix_tree, spanning_tree_count, TreeCount};
pub use voltage::{DerivedGraph, Section, TowerSpecJson, VoltageSpec};
