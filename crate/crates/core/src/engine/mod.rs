//! Live paste pipeline, stdio protocol and batch modes.

pub mod batch;
pub mod config;
pub mod protocol;
pub mod serve;
pub mod session;

pub use config::EngineConfig;
pub use protocol::{ClientMessage, EngineMessage};
pub use serve::serve;
pub use session::{Dropped, Engine, Status};
