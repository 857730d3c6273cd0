//! Shapley attribution of forecasting losses to past strokes and players.

pub mod aggregate;
pub mod attribution;
pub mod engine;
pub mod games;

pub use aggregate::*;
pub use attribution::*;
pub use engine::*;
pub use games::*;
