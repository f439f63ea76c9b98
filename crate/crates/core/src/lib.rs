//! Leontief exchange economies, bimatrix games, and the reduction between them.
//!
//! The crate is organized around three pillars:
//!
//! - [`market`]: economies with Leontief (fixed-proportion) consumers, their
//!   equilibria in utility/price form, and checkers for exact, ε-approximate,
//!   and strictly ε-approximate equilibria.
//! - [`games`]: two-player bimatrix games, ε-Nash checkers (absolute and
//!   relative), and small exact solvers (support enumeration, Lemke–Howson).
//! - [`reduction`]: the translation of a bimatrix game into an exchange
//!   economy whose equilibria correspond to the game's Nash equilibria, the
//!   reverse map from Nash profiles to market equilibria, and quantitative
//!   bounds on how equilibrium quality transfers between the two sides.
//!
//! Supporting modules: [`solvers`] (grid search over the price simplex and a
//!   price-adjustment refiner), [`smoothed`] (random perturbation models, the
//!   end-to-end game → perturbed market → recovered-strategies pipeline, and a
//!   batch experiment runner), [`scalar`] (a dual numeric mode: fast `f64` or
//!   exact `BigRational`), [`linalg`] (dense matrices and small solvers),
//!   [`rng`] (a counter-based deterministic generator), and [`json`]
//!   (serialization of every document the CLI reads or writes).
//!
//! Everything is deterministic: equal inputs (including seeds) produce
//! byte-identical outputs, regardless of thread count.

pub mod games;
pub mod json;
pub mod linalg;
pub mod market;
pub mod reduction;
pub mod rng;
pub mod scalar;
pub mod smoothed;
pub mod solvers;

pub use games::{BimatrixGame, MixedProfile};
pub use market::{
    Allocation, CheckReport, Economy, MarketEquilibrium, PriceVector, UtilityVector,
};
pub use reduction::ReducedEconomy;
pub use solvers::{GridSpec, SolveResult, SolveStatus};
