//! Four small discrete models for school mathematics, with worksheet output.
//!
//! - [`ca1d`]: a one-dimensional automaton where a cell lives iff exactly one
//!   neighbour lives, with exact ancestor and stationary-point solvers.
//! - [`truck`]: a truck on a line of stations driven by per-station rules, a
//!   small Turing machine with a text rule language.
//! - [`minesweeper`]: chessboard "paper minesweeper" tables with a solver and
//!   a uniqueness checker.
//! - [`mapgraph`]: border-graph predicates over country maps.
//! - [`render`]: text and SVG worksheets.

pub mod ca1d;
pub mod gf2;
pub mod mapgraph;
pub mod minesweeper;
pub mod render;
pub mod truck;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator behind every seeded operation. ChaCha output is fixed by
/// its specification, so worksheets are identical across platforms.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
