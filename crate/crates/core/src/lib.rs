//! Solvers for the min-sum collaborative delivery problem with vehicles of
//! heterogeneous speed.
//!
//! The pipeline builds one spanning tree per depot over the request sources
//! ([`trees`]), combines those trees across speed levels with a multi-level
//! primal-dual moat-growing procedure ([`primal_dual`]), and converts each
//! combined tree into a route for its fastest vehicle ([`routing`]).
//! [`oracle`] holds exhaustive solvers used to check the approximation
//! guarantees on small instances.

pub mod error;
pub mod geometry;
pub mod instance;
pub mod oracle;
pub mod primal_dual;
pub mod routing;
pub mod trees;
mod union_find;

pub use error::{Error, Result};
pub use geometry::Point;
pub use instance::{Depot, Instance, LevelPartition, Request};
pub use routing::{Route, Solution};
