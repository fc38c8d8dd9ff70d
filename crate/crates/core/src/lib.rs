pub mod balance;
pub mod cli;
pub mod concat;
pub mod configspace;
pub mod error;
pub mod periods;
pub mod surfacegen;
pub mod verify;

pub use configspace::{Configuration, LevelType, C64};
pub use error::{Error, Result};
