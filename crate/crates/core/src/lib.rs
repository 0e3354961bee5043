//! Pure Nash equilibria of binary public goods games on graphs.
//!
//! A vertex either contributes (active) or not, and its best response depends
//! only on the weighted number of active neighbors through an infinite 0/1
//! [`Pattern`]. The crate covers pattern classification, equilibrium checks
//! and enumeration, better-response dynamics with an exact potential, the
//! congestion and threshold game correspondences, an exact backtracking
//! solver with CNF export, and the gadget reduction from positive 1-in-3 SAT.

pub mod congestion;
pub mod dynamics;
pub mod error;
pub mod format;
pub mod gadgets;
pub mod game;
pub mod generate;
pub mod pattern;
pub mod reduction;
pub mod solver;

pub use error::{Error, Result};
pub use format::{parse_game, write_game};
pub use game::{Edge, Game, Profile};
pub use pattern::Pattern;
