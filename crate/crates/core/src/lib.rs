//! Fragmentation of a linear chain of links: rooted-tree combinatorics, the
//! pruning poset, fragmentation-tree probabilities under discrete and
//! continuous removal dynamics, and Monte Carlo validation.

mod bits;
pub mod dot;
pub mod error;
pub mod fragtree;
pub mod links;
pub mod numeric;
pub mod poset;
pub mod prob;
pub mod sim;
pub mod tree;
pub mod verify;

pub use error::{Error, Result};
pub use fragtree::{catalan, enumerate_fragmentation_trees, Budget, FragTree, Line};
pub use links::{fragments_of, Fragment, LinkSet, Subset};
pub use numeric::Scalar;
pub use prob::{DistTable, Mode, RateSpec, Time};
pub use tree::{enumerate_plane_trees, EdgeSet, RootedTree, TreeJson, VertexSet};
