pub mod analysis;
pub mod channel;
pub mod cli;
pub mod harness;
pub mod numeric;
pub mod protocol;
pub mod verify;
