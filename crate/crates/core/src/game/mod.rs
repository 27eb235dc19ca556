//! The stochastic game among base stations: state and action spaces, the
//! effective DL rate, the true utility `u` (expected rate over interfering
//! channels) and the pessimistic utility `v` (every interfering channel at
//! its largest gain level).

mod actions;
mod state;
mod strategy;
mod utility;

pub use actions::{enumerate_actions, ActionSpace, JointActionSpace, PowerAction};
pub use state::{GlobalState, LocalState, StateSpace};
pub use strategy::{average_utility, deviation_utility, GameStructure, StrategyTable, UtilityTable};
pub use utility::{dl_rate, GameModel, PlayerTables};
