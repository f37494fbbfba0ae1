//! Exact polyhedral value iteration for discounted and energy games.

pub mod discounted;
pub mod dnp;
pub mod energy;
pub mod error;
pub mod exec;
pub mod harness;
pub mod game;
pub mod gen;
pub mod json;
pub mod monitor;
pub mod oracles;
pub mod paths;
pub mod weight;

pub use discounted::{solve_discounted, DiscountedOptions, DiscountedSolution, RealizeStrategy};
pub use energy::{decide_mean_payoff, solve_energy, EnergyOptions, EnergySolution};
pub use error::SolveError;
pub use oracles::WinnerPartition;
pub use game::{Edge, GameGraph, GameKind, GameSpec, Node, Owner};
pub use json::{parse_game, serialize_game};
pub use weight::{LexWeight, Rational, WeightValue};
