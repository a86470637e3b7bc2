//! Perfect matchings in uniform hypergraphs and triangle decompositions of
//! graphs: barrier constructions, exact relaxations, nibble processes, the
//! absorbing method, iterative absorption and a randomized algebraic
//! construction over GF(2^a).

pub mod algebraic;
pub mod barriers;
pub mod codegree;
pub mod degrees;
pub mod design;
pub mod error;
pub mod exact;
pub mod generators;
pub mod graph;
pub mod harness;
pub mod hypergraph;
pub mod intlin;
pub mod iterative;
pub mod latin;
pub mod lp;
pub mod nibble;
pub mod octahedron;
pub mod relaxations;
pub mod rng;
pub mod verify;

pub use error::{Error, Failure, Result};
pub use graph::SimpleGraph;
pub use hypergraph::{Hypergraph, Matching, Triangle, TriangleDecomposition, Vertex};
