//! Seeded synthetic rallies with a tunable mix of past dependence and
//! player style, plus dataset files.

pub mod generator;
pub mod io;

pub use generator::*;
pub use io::*;
