//! Synchronous CONGEST simulator: bandwidth-checked message passing in rounds,
//! shared randomness, trace accounting, and pipelined tree primitives.

mod engine;
mod message;
pub mod primitives;
mod random;
mod trace;

pub use engine::{run, Action, Ctx, NodeProgram, Port, SimConfig, Simulator, Status};
pub use message::{word_bits, Budget, Message};
pub use random::SharedRandomness;
pub use trace::RoundTrace;
